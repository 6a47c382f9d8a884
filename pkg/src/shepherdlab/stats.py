"""Friedman rank test, Conover post-hoc comparisons and rank summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import InvalidInput
from .missions import ObjectiveSense

__all__ = [
    "FriedmanResult",
    "RankSummary",
    "friedman_eliminate",
    "friedman_rank_summary",
    "friedman_test",
]


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    rank_sums: np.ndarray
    critical_difference: float
    n_blocks: int

    @property
    def mean_ranks(self):
        return self.rank_sums / self.n_blocks


def _costs(scores, sense):
    s = np.asarray(scores, dtype=np.float64)
    return s * ObjectiveSense(sense).sign()


def friedman_test(costs, alpha=0.05):
    """Friedman test on a ``(blocks, treatments)`` cost matrix (lower is better).

    Ranks are 1 for the best treatment of a block, ties share the mean rank.
    The statistic uses the tie-corrected form
    ``(k-1) * sum_j (R_j - n(k+1)/2)^2 / (A1 - C1)`` with ``A1`` the sum of
    squared ranks and ``C1 = n k (k+1)^2 / 4``; the critical difference on
    rank sums is the Conover bound
    ``t_{1-alpha/2, (n-1)(k-1)} * sqrt(2 (n A1 - sum R_j^2) / ((n-1)(k-1)))``.
    """
    c = np.asarray(costs, dtype=np.float64)
    n, k = c.shape
    ranks = sps.rankdata(c, axis=1)
    rank_sums = ranks.sum(axis=0)
    a1 = float(np.sum(ranks**2))
    c1 = n * k * (k + 1) ** 2 / 4.0
    denom = a1 - c1
    if denom <= 1e-12 * max(1.0, a1):
        # every block fully tied
        return FriedmanResult(0.0, 1.0, rank_sums, math.inf, n)
    stat = (k - 1) * float(np.sum((rank_sums - n * (k + 1) / 2.0) ** 2)) / denom
    p = float(sps.chi2.sf(stat, k - 1))
    df = (n - 1) * (k - 1)
    spread = max(0.0, n * a1 - float(np.sum(rank_sums**2)))
    cd = float(sps.t.ppf(1.0 - alpha / 2.0, df)) * math.sqrt(2.0 * spread / df) if df > 0 else math.inf
    return FriedmanResult(stat, p, rank_sums, cd, n)


def friedman_eliminate(scores, alpha=0.05, sense=ObjectiveSense.MINIMIZE):
    """Indices of candidates that survive one racing test.

    ``scores`` is a ``(candidates, instances)`` matrix. When the Friedman
    test rejects at ``alpha``, candidates whose rank sum exceeds the best one
    by more than the critical difference are dropped. The rank-best
    candidate always survives.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 2 or s.shape[1] < 2:
        raise InvalidInput("need at least 2 candidates and 2 instances")
    res = friedman_test(_costs(s, sense).T, alpha)
    best = int(np.argmin(res.rank_sums))
    if not res.p_value < alpha:
        return list(range(s.shape[0]))
    keep = res.rank_sums - res.rank_sums[best] <= res.critical_difference
    keep[best] = True
    return [int(i) for i in np.flatnonzero(keep)]


@dataclass(frozen=True)
class RankSummary:
    """Average rank of each method over all blocks, with 95% intervals.

    Two methods differ significantly when their intervals do not overlap;
    each half-width is half the Conover critical difference, in mean-rank
    units.
    """

    methods: tuple
    mean_ranks: tuple
    lower: tuple
    upper: tuple
    statistic: float
    p_value: float
    n_blocks: int

    def interval(self, method):
        i = self.methods.index(method)
        return self.lower[i], self.mean_ranks[i], self.upper[i]

    def disjoint(self, a, b):
        la, _, ua = self.interval(a)
        lb, _, ub = self.interval(b)
        return la > ub or lb > ua

    def significant_pairs(self):
        return [(a, b) for i, a in enumerate(self.methods) for b in self.methods[i + 1:]
                if self.disjoint(a, b)]

    def ranking(self):
        """Methods from best to worst mean rank."""
        return [m for _, m in sorted(zip(self.mean_ranks, self.methods))]

    def format(self):
        lines = [f"{'method':<16}{'mean_rank':>10}{'ci_low':>10}{'ci_high':>10}"]
        for m, r, lo, hi in zip(self.methods, self.mean_ranks, self.lower, self.upper):
            lines.append(f"{m:<16}{r:>10.4f}{lo:>10.4f}{hi:>10.4f}")
        lines.append(f"blocks={self.n_blocks} friedman={self.statistic:.4f} p={self.p_value:.3g}")
        for a, b in self.significant_pairs():
            lines.append(f"significant: {a} vs {b}")
        return "\n".join(lines)


def _field(o, name):
    return o[name] if isinstance(o, dict) else getattr(o, name)


def block_matrix(observations):
    """Arrange observations into a ``(blocks, methods)`` cost matrix.

    A block is a (mission, sheep, replicate) triple; the replicate index of
    a row is its position among the rows of the same method and scenario,
    in input order.
    """
    cells = {}
    methods = []
    scenarios = []
    senses = {}
    for o in observations:
        m = str(_field(o, "method"))
        sc = (str(_field(o, "mission")), str(_field(o, "sheep")))
        sense = ObjectiveSense(str(_field(o, "sense")))
        if senses.setdefault(sc, sense) is not sense:
            raise InvalidInput(f"scenario {sc} mixes objective senses")
        if m not in methods:
            methods.append(m)
        if sc not in scenarios:
            scenarios.append(sc)
        cells.setdefault((m, sc), []).append(float(_field(o, "objective")))
    if len(methods) < 2:
        raise InvalidInput("need observations for at least two methods")
    rows = []
    for sc in scenarios:
        counts = {len(cells.get((m, sc), [])) for m in methods}
        if len(counts) != 1 or 0 in counts:
            raise InvalidInput(f"unbalanced observations in scenario {sc[0]}-{sc[1]}")
        sign = senses[sc].sign()
        n = counts.pop()
        for r in range(n):
            rows.append([sign * cells[(m, sc)][r] for m in methods])
    return tuple(methods), np.array(rows)


def friedman_rank_summary(observations, alpha=0.05):
    """Cross-scenario ranking of methods from observation records.

    Each record provides ``method``, ``mission``, ``sheep``, ``objective``
    and ``sense`` (as attributes or mapping keys).
    """
    methods, costs = block_matrix(observations)
    if costs.shape[0] < 2:
        raise InvalidInput("need at least two blocks")
    res = friedman_test(costs, alpha)
    n = costs.shape[0]
    mean = res.mean_ranks
    half = 0.0 if not math.isfinite(res.critical_difference) else res.critical_difference / (2.0 * n)
    return RankSummary(
        methods,
        tuple(float(x) for x in mean),
        tuple(float(x - half) for x in mean),
        tuple(float(x + half) for x in mean),
        res.statistic,
        res.p_value,
        n,
    )
