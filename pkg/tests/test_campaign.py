import csv
import io
import json

import numpy as np
import pytest
from sklearn.base import clone

from shepherdlab.campaign import (
    CSV_HEADER,
    CampaignConfig,
    Observation,
    assess,
    read_observations,
    run_campaign,
    write_observations,
)
from shepherdlab.cli import main
from shepherdlab.controllers import load_controller, save_controller
from shepherdlab.errors import FormatError, InvalidConfig
from shepherdlab.estimators import EvoCMYDesigner, PistacchioDesigner, RandomWalkDesigner
from shepherdlab.missions import build_scenario
from shepherdlab.pfsm import Exploration, PfsmConfig, RandomWalk, Stop, Transition, WhiteFloor


def small_config(tmp_path, **kw):
    base = dict(methods=["rwalk"], designs_per_scenario=2, assessments_per_design=1,
                master_seed=7, output_dir=str(tmp_path / "out"))
    base.update(kw)
    return CampaignConfig(**base)


class TestObservationsCsv:
    def test_round_trip_and_header(self):
        rows = [Observation("rwalk", "herding", "c1", 0, 123, 7.0, "minimize"),
                Observation("evocmy", "dispersion", "c2", 3, 2**63, 0.1 + 0.2, "maximize")]
        buf = io.StringIO()
        write_observations(rows, buf)
        text = buf.getvalue()
        assert text.startswith(",".join(CSV_HEADER) + "\r\n")
        back = read_observations(io.StringIO(text))
        assert back == rows

    def test_bad_header(self):
        with pytest.raises(FormatError):
            read_observations(io.StringIO("a,b\r\n1,2\r\n"))

    def test_bad_row(self):
        bad = ",".join(CSV_HEADER) + "\r\nrwalk,herding,c1,x,1,2.0,minimize\r\n"
        with pytest.raises(FormatError):
            read_observations(io.StringIO(bad))


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(methods=[]),
        dict(methods=["rwalk", "rwalk"]),
        dict(methods=["magic"]),
        dict(methods=["rwalk"], scenarios=[("herding", "c9")]),
        dict(methods=["rwalk"], designs_per_scenario=0),
        dict(methods=["evocmy"], budget=10),
        dict(methods=["rwalk"], master_seed="x"),
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfig):
            CampaignConfig(**kw)

    def test_json_round_trip(self, tmp_path):
        cfg = small_config(tmp_path, scenarios=[("herding", "c1")])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert CampaignConfig.load(path) == cfg

    def test_version_and_keys_checked(self):
        with pytest.raises(InvalidConfig):
            CampaignConfig.from_dict({"format_version": 2, "methods": ["rwalk"]})
        with pytest.raises(InvalidConfig):
            CampaignConfig.from_dict({"format_version": 1, "methods": ["rwalk"], "colour": 1})


class TestCampaign:
    def test_rwalk_nine_scenarios(self, tmp_path):
        cfg = small_config(tmp_path, designs_per_scenario=10, scenarios=[
            (m, v) for m in ("aggregation", "dispersion", "herding") for v in ("c1", "c2", "c3")])
        obs = run_campaign(cfg)
        assert len(obs) == 90
        cells = {}
        for o in obs:
            cells[(o.mission, o.sheep)] = cells.get((o.mission, o.sheep), 0) + 1
        assert set(cells.values()) == {10}
        on_disk = read_observations(tmp_path / "out" / "observations.csv")
        assert on_disk == obs

    def test_byte_identical_and_resume(self, tmp_path):
        cfg = small_config(tmp_path, methods=["pistacchio", "rwalk"], budget=1000,
                           scenarios=[("aggregation", "c1")], designs_per_scenario=2,
                           assessments_per_design=2)
        first = run_campaign(cfg)
        path = tmp_path / "out" / "observations.csv"
        a = path.read_bytes()
        designs = sorted((tmp_path / "out" / "designs").rglob("*.json"))
        assert len(designs) == 4
        stamps = [p.stat().st_mtime_ns for p in designs]
        run_campaign(cfg)
        assert path.read_bytes() == a
        assert [p.stat().st_mtime_ns for p in designs] == stamps  # reused, not redesigned
        # an interrupted run resumes from the missing design only
        designs[0].unlink()
        run_campaign(cfg)
        assert path.read_bytes() == a
        assert len(first) == 8
        assert {o.method for o in first} == {"pistacchio", "rwalk"}

    def test_design_and_assessment_seeds_disjoint(self, tmp_path):
        cfg = small_config(tmp_path, methods=["pistacchio"], budget=1000, scenarios=[("herding", "c2")],
                           designs_per_scenario=1, assessments_per_design=3)
        obs = run_campaign(cfg)
        manifest = json.loads(next((tmp_path / "out" / "designs").rglob("*.manifest.json")).read_text())
        assert manifest["seed"] not in {o.seed for o in obs}
        assert manifest["consumed"] <= 1000

    def test_threads_do_not_change_results(self, tmp_path):
        out = []
        for t in (1, 3):
            cfg = small_config(tmp_path, output_dir=str(tmp_path / f"t{t}"), threads=t,
                               scenarios=[("dispersion", "c1"), ("herding", "c3")], designs_per_scenario=4)
            run_campaign(cfg)
            out.append((tmp_path / f"t{t}" / "observations.csv").read_bytes())
        assert out[0] == out[1]

    def test_file_controller(self, tmp_path):
        path = tmp_path / "human.json"
        save_controller(PfsmConfig((Exploration(10, "magenta"), Stop("cyan")),
                                   ((Transition(WhiteFloor(0.5), 1),), ())), path)
        cfg = small_config(tmp_path, methods=["human", "idle"], controller_files={"human": str(path)},
                           scenarios=[("herding", "c1")])
        obs = run_campaign(cfg)
        assert [o.method for o in obs] == ["human", "human", "idle", "idle"]


class TestAssess:
    def test_deterministic_rows(self):
        sc = build_scenario("aggregation", "c2")
        a = assess(RandomWalk(), sc, 10, seed=4)
        b = assess(RandomWalk(), sc, 10, seed=4)
        assert len(a) == 10 and a == b
        assert len({r.seed for r in a}) == 10

    def test_controller_files(self, tmp_path):
        bad = tmp_path / "big.json"
        doc = PfsmConfig((Stop(),)).to_dict()
        doc["states"] = doc["states"] * 5
        bad.write_text(json.dumps(doc))
        with pytest.raises(FormatError):
            load_controller(str(bad))
        garbage = tmp_path / "garbage.json"
        garbage.write_text("{not json")
        with pytest.raises(FormatError):
            load_controller(str(garbage))
        assert load_controller("rwalk") == RandomWalk()


class TestCli:
    def run(self, capsys, *args):
        code = main(list(args))
        return code, capsys.readouterr()

    def test_assess_to_stdout(self, capsys):
        code, out = self.run(capsys, "assess", "--controller", "rwalk", "--mission", "herding",
                             "--sheep", "c2", "-n", "3", "--seed", "5")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out.out)))
        assert tuple(rows[0]) == CSV_HEADER and len(rows) == 4
        assert all(r[0] == "rwalk" and r[6] == "minimize" for r in rows[1:])

    def test_design_assess_stats_trace(self, tmp_path, capsys):
        d = tmp_path / "d"
        code, _ = self.run(capsys, "design", "--method", "evocmy", "--mission", "dispersion",
                           "--sheep", "c1", "--budget", "1000", "--seed", "2", "--out", str(d))
        assert code == 0
        manifest = json.loads((d / "manifest.json").read_text())
        assert manifest["consumed"] == 1000
        ctl = d / "controller.json"
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert self.run(capsys, "assess", "--controller", str(ctl), "--mission", "dispersion",
                        "--sheep", "c1", "-n", "4", "--out", str(a))[0] == 0
        assert self.run(capsys, "assess", "--controller", "rwalk", "--mission", "dispersion",
                        "--sheep", "c1", "-n", "4", "--out", str(b))[0] == 0
        merged = tmp_path / "all.csv"
        merged.write_text(a.read_text() + "".join(b.read_text().splitlines(True)[1:]))
        code, out = self.run(capsys, "stats", "--input", str(merged))
        assert code == 0 and "controller" in out.out and "rwalk" in out.out
        trace = tmp_path / "t.csv"
        code, _ = self.run(capsys, "trace", "--controller", str(ctl), "--mission", "dispersion",
                           "--sheep", "c1", "--seed", "1", "--out", str(trace))
        assert code == 0 and len(trace.read_text().splitlines()) == 1 + 1201 * 15

    def test_exit_codes(self, tmp_path, capsys):
        assert self.run(capsys, "design", "--method", "evocmy", "--mission", "herding", "--sheep", "c1",
                        "--budget", "10", "--out", str(tmp_path / "x"))[0] == 2
        garbage = tmp_path / "g.json"
        garbage.write_text("[1, 2")
        assert self.run(capsys, "assess", "--controller", str(garbage), "--mission", "herding",
                        "--sheep", "c1")[0] == 2
        assert self.run(capsys, "assess", "--controller", str(tmp_path / "missing.json"),
                        "--mission", "herding", "--sheep", "c1")[0] == 3
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"format_version": 1, "methods": []}))
        assert self.run(capsys, "campaign", "--config", str(cfg))[0] == 2
        unbalanced = tmp_path / "u.csv"
        unbalanced.write_text(",".join(CSV_HEADER) + "\r\nrwalk,herding,c1,0,1,3.0,minimize\r\n")
        assert self.run(capsys, "stats", "--input", str(unbalanced))[0] == 2
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert self.run(capsys, "design", "--method", "pistacchio", "--mission", "herding",
                        "--sheep", "c1", "--budget", "1000", "--out", str(blocker / "sub"))[0] == 3

    def test_campaign_command(self, tmp_path, capsys):
        cfg = small_config(tmp_path, scenarios=[("herding", "c1")])
        path = tmp_path / "c.json"
        path.write_text(json.dumps(cfg.to_dict()))
        code, out = self.run(capsys, "campaign", "--config", str(path))
        assert code == 0 and "2 observations" in out.out


class TestEstimators:
    @pytest.mark.parametrize("cls", [PistacchioDesigner, EvoCMYDesigner, RandomWalkDesigner])
    def test_sklearn_protocol(self, cls):
        est = cls(random_state=3)
        params = est.get_params()
        assert params["random_state"] == 3
        twin = clone(est)
        assert twin.get_params() == params and twin is not est
        est.set_params(n_jobs=2)
        assert est.n_jobs == 2

    def test_fit_predict_score(self):
        est = PistacchioDesigner(budget=1000, random_state=1).fit("aggregation-c3")
        assert est.budget_consumed_ <= 1000 and est.history_
        pred = est.predict([1, 2, 3])
        assert pred.shape == (3,) and np.all(pred >= 0)
        assert est.score([1, 2, 3]) == pytest.approx(-pred.mean())
        base = RandomWalkDesigner().fit(("dispersion", "c1"))
        assert base.budget_consumed_ == 0 and base.controller_ == RandomWalk()
        assert base.score([4]) == pytest.approx(base.predict([4])[0])

    def test_unfitted(self):
        from sklearn.exceptions import NotFittedError
        with pytest.raises(NotFittedError):
            EvoCMYDesigner().predict([1])
