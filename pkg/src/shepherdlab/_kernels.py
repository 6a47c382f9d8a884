"""Compiled inner loops: sensing, controllers, kinematics and collisions.

Every operation that touches a robot's perception or motion goes through
these functions, so the Python API and the episode runner share one
implementation.

Array conventions for a world of N robots (robot ``i`` is row ``i``):

* ``pos`` (N, 2), ``heading`` (N,), ``led`` (N,) int, ``halted`` (N,) bool
* ``prox`` (N, 8), ``gnd`` (N, 3) int, ``cam`` (N, 3) bool, ``vang`` (N, 3)
* ``mem`` (N, 4) int controller scratch; layout depends on the controller

Helpers take whole 2D arrays plus a row index rather than row views: view
creation costs two reference-count operations per call, which dominated the
cycle time.
"""

import math

import numba as nb
import numpy as np

from ._rng import next_float

RADIUS = 0.035
AXLE = 0.053
DT = 0.1
VMAX = 0.12
PROX_RANGE = 0.03
PROX_CONE = math.radians(15.0)
PROX_TRIGGER = 0.1
CAM_RANGE = 0.40
GND_OFFSET = 0.03
CIRCLING_SPEED = 0.06
AVOID_GAIN = 0.12
SHEEP_NUDGE_CYCLES = 5
COLLISION_PASSES = 200
TWO_PI = 2.0 * math.pi

# e-puck proximity layout, counter-clockwise from the front-left sensor
PROX_ANGLES = np.radians(np.array([17.5, 49.0, 90.0, 150.0, -150.0, -90.0, -49.0, -17.5]))
PROX_COS = np.cos(PROX_ANGLES)
PROX_SIN = np.sin(PROX_ANGLES)
FRONT_SENSORS = np.array([0, 1, 6, 7])
GND_ANGLES = np.radians(np.array([-30.0, 0.0, 30.0]))
GND_COS = np.cos(GND_ANGLES)
GND_SIN = np.sin(GND_ANGLES)
# body-frame directions of the three rays (-cone, axis, +cone) per sensor
_RAY_ANGLES = PROX_ANGLES[:, None] + np.array([-PROX_CONE, 0.0, PROX_CONE])[None, :]
RAY_COS = np.cos(_RAY_ANGLES)
RAY_SIN = np.sin(_RAY_ANGLES)
COS_CONE = math.cos(PROX_CONE)
SIN_CONE = math.sin(PROX_CONE)
PROX_REACH2 = (2.0 * RADIUS + PROX_RANGE) ** 2
CAM_RANGE2 = CAM_RANGE * CAM_RANGE

BLACK = 0
GRAY = 1
WHITE = 2

# controller kinds
CTL_IDLE = 0
CTL_PFSM = 1
CTL_NN = 2
CTL_RWALK = 3

# behaviors / conditions
B_EXPLORATION = 0
B_STOP = 1
B_FOLLOWING = 2
B_ELUSION = 3
B_CIRCLING = 4
C_BLACK = 0
C_GRAY = 1
C_WHITE = 2
C_FIXED = 3
C_COLOR = 4

N_IN = 24
N_OUT = 8
N_WEIGHTS = N_IN * N_OUT
PROJ_ANGLES = np.radians(np.array([45.0, 135.0, 225.0, 315.0]))
PROJ_COS = np.cos(PROJ_ANGLES)
PROJ_SIN = np.sin(PROJ_ANGLES)

RWALK_TURN_PER_CYCLE = 2.0 * VMAX / AXLE * DT

_jit = nb.njit(cache=True, nogil=True)
_inline = nb.njit(cache=True, nogil=True, inline="always")


@_inline
def wrap_pi(a):
    """Wrap an angle into (-pi, pi]."""
    a = np.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


@_inline
def wrap_2pi(a):
    a = np.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:
        a -= TWO_PI
    return a


@_inline
def clamp(v, lo, hi):
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


# --------------------------------------------------------------------------
# geometry


@_inline
def inside_arena(x, y, normals, offsets, tol):
    for k in range(normals.shape[0]):
        if normals[k, 0] * x + normals[k, 1] * y > offsets[k] + tol:
            return False
    return True


@_inline
def region_color(x, y, reg_c, reg_r, reg_col, default):
    # forward scan keeping the last hit: a reversed range with an early
    # return compiled to a loop several times slower
    out = default
    for k in range(reg_r.shape[0]):
        dx = x - reg_c[k, 0]
        dy = y - reg_c[k, 1]
        if math.sqrt(dx * dx + dy * dy) <= reg_r[k]:
            out = reg_col[k]
    return out


@_jit
def floor_at(x, y, normals, offsets, reg_c, reg_r, reg_col, default):
    """Floor color at (x, y); -1 when the point is outside the arena."""
    if not inside_arena(x, y, normals, offsets, 1e-12):
        return -1
    return region_color(x, y, reg_c, reg_r, reg_col, default)


# --------------------------------------------------------------------------
# sensing


@_inline
def _prox_contact(prox, i, bx, by, dist):
    """Fold one nearby disk into robot ``i``'s readings.

    ``(bx, by)`` is the unit bearing to the disk in the body frame. A sensor
    sees the disk when the angle between its axis and the bearing is within
    the acceptance cone widened by the disk's angular half-size.
    """
    value = 1.0 - (dist - 2.0 * RADIUS) / PROX_RANGE
    if value > 1.0:
        value = 1.0
    if dist > RADIUS:
        sin_half = RADIUS / dist
        cos_half = math.sqrt(1.0 - sin_half * sin_half)
        limit = COS_CONE * cos_half - SIN_CONE * sin_half
    else:
        limit = -2.0
    for s in range(8):
        if bx * PROX_COS[s] + by * PROX_SIN[s] >= limit:
            if value > prox[i, s]:
                prox[i, s] = value


@_inline
def _prox_walls(prox, i, x, y, ch, sh, normals, offsets):
    for k in range(normals.shape[0]):
        clear = offsets[k] - normals[k, 0] * x - normals[k, 1] * y
        if clear >= RADIUS + PROX_RANGE:
            continue  # a farther wall cannot be within sensor range
        for s in range(8):
            for e in range(3):
                ux = ch * RAY_COS[s, e] - sh * RAY_SIN[s, e]
                uy = sh * RAY_COS[s, e] + ch * RAY_SIN[s, e]
                nu = normals[k, 0] * ux + normals[k, 1] * uy
                if nu <= 1e-12:
                    continue
                gap = clear / nu - RADIUS
                if gap < PROX_RANGE:
                    value = 1.0 - gap / PROX_RANGE
                    if value > 1.0:
                        value = 1.0
                    if value > prox[i, s]:
                        prox[i, s] = value


@_inline
def _ground(gnd, i, x, y, ch, sh, normals, offsets, reg_c, reg_r, reg_col, default):
    clear = 1e300
    for k in range(normals.shape[0]):
        c = offsets[k] - normals[k, 0] * x - normals[k, 1] * y
        if c < clear:
            clear = c
    near = clear <= GND_OFFSET + 1e-9
    for g in range(3):
        px = x + GND_OFFSET * (ch * GND_COS[g] - sh * GND_SIN[g])
        py = y + GND_OFFSET * (sh * GND_COS[g] + ch * GND_SIN[g])
        col = region_color(px, py, reg_c, reg_r, reg_col, default)
        # a probe past the wall sees no painted floor
        if near and not inside_arena(px, py, normals, offsets, 1e-12):
            col = GRAY
        gnd[i, g] = col


@_jit
def sense_all(pos, heading, led, normals, offsets, reg_c, reg_r, reg_col, default,
              prox, gnd, cam, vang, acc):
    """Fill every robot's readings from one world snapshot.

    ``acc`` (N, 3, 3) is scratch: per-color unit-vector sums in columns 0-1,
    the heading cosine and sine in ``acc[:, 0, 2]`` and ``acc[:, 1, 2]``.
    """
    n = pos.shape[0]
    prox[:, :] = 0.0
    cam[:, :] = False
    acc[:, :, :] = 0.0
    for i in range(n):
        acc[i, 0, 2] = math.cos(heading[i])
        acc[i, 1, 2] = math.sin(heading[i])
    for i in range(n):
        xi = pos[i, 0]
        yi = pos[i, 1]
        for j in range(i + 1, n):
            dx = pos[j, 0] - xi
            dy = pos[j, 1] - yi
            d2 = dx * dx + dy * dy
            if d2 > CAM_RANGE2:
                continue
            d = math.sqrt(d2)
            if d > 0.0:
                ux = dx / d
                uy = dy / d
            else:
                ux = 0.0
                uy = 0.0
            cj = led[j]
            ci = led[i]
            if cj != 0:
                cam[i, cj - 1] = True
                acc[i, cj - 1, 0] += ux
                acc[i, cj - 1, 1] += uy
            if ci != 0:
                cam[j, ci - 1] = True
                acc[j, ci - 1, 0] -= ux
                acc[j, ci - 1, 1] -= uy
            if d2 < PROX_REACH2:
                if d > 0.0:
                    chi = acc[i, 0, 2]
                    shi = acc[i, 1, 2]
                    chj = acc[j, 0, 2]
                    shj = acc[j, 1, 2]
                    _prox_contact(prox, i, ux * chi + uy * shi, -ux * shi + uy * chi, d)
                    _prox_contact(prox, j, -ux * chj - uy * shj, ux * shj - uy * chj, d)
                else:
                    _prox_contact(prox, i, 1.0, 0.0, d)
                    _prox_contact(prox, j, 1.0, 0.0, d)
    for i in range(n):
        x = pos[i, 0]
        y = pos[i, 1]
        ch = acc[i, 0, 2]
        sh = acc[i, 1, 2]
        _prox_walls(prox, i, x, y, ch, sh, normals, offsets)
        _ground(gnd, i, x, y, ch, sh, normals, offsets, reg_c, reg_r, reg_col, default)
        for c in range(3):
            sx = acc[i, c, 0]
            sy = acc[i, c, 1]
            if cam[i, c] and (abs(sx) > 1e-12 or abs(sy) > 1e-12):
                vang[i, c] = wrap_2pi(math.atan2(sy, sx) - heading[i])
            else:
                vang[i, c] = 0.0


def new_workspace(n):
    """Scratch arrays reused across the cycles of one episode."""
    return (
        np.zeros((n, 8)),
        np.zeros((n, 3), dtype=np.int64),
        np.zeros((n, 3), dtype=np.bool_),
        np.zeros((n, 3)),
        np.zeros((n, 3, 3)),
        np.zeros(n),
        np.zeros(n),
        np.zeros(n, dtype=np.int64),
        np.zeros(n, dtype=np.bool_),
        np.zeros(N_IN),
        np.zeros(N_OUT),
    )


# --------------------------------------------------------------------------
# motion primitives


@_inline
def steer(angle, speed):
    """Wheel speeds that head toward a body-frame bearing.

    Within +-90 degrees the robot drives forward with a turn proportional to
    sin(error); beyond that it turns in place toward the target side.
    """
    e = wrap_pi(angle)
    if abs(e) > 0.5 * math.pi:
        sgn = 1.0 if e > 0.0 else -1.0
        return -sgn * speed, sgn * speed
    c = math.cos(e)
    s = math.sin(e)
    return speed * (c - s), speed * (c + s)


@_inline
def front_triggered(prox, i):
    for k in range(FRONT_SENSORS.shape[0]):
        if prox[i, FRONT_SENSORS[k]] > PROX_TRIGGER:
            return True
    return False


@_inline
def exploration_motion(tau, prox, i, mem, rng):
    """Straight at full speed; a frontal obstacle starts a turn of U{0..tau} cycles."""
    if mem[i, 1] > 0:
        mem[i, 1] -= 1
        d = float(mem[i, 2])
        return -d * VMAX, d * VMAX
    if front_triggered(prox, i):
        d = -1 if prox[i, 0] + prox[i, 1] > prox[i, 6] + prox[i, 7] else 1
        cycles = int(next_float(rng) * (tau + 1))
        if cycles > 0:
            mem[i, 2] = d
            mem[i, 1] = cycles - 1
            return -d * VMAX, d * VMAX
    return VMAX, VMAX


@_inline
def add_avoidance(vl, vr, prox, i):
    px = 0.0
    py = 0.0
    for s in range(8):
        px += prox[i, s] * PROX_COS[s]
        py += prox[i, s] * PROX_SIN[s]
    return vl + AVOID_GAIN * (py - px), vr + AVOID_GAIN * (-py - px)


# --------------------------------------------------------------------------
# Pistacchio modules
#
# beh (4, 4) int: [type, tau, delta, gamma]; beh_theta (4,) float
# n_tr (4,) int; tr (4, 4, 3) int: [type, delta, target]; tr_beta (4, 4) float
# mem row: [current state, turn countdown, turn sign, unused]


@_inline
def behavior_output(btype, tau, delta, gamma, theta, prox, cam, vang, mem, i, rng):
    if btype == B_STOP:
        vl, vr = 0.0, 0.0
    elif btype == B_FOLLOWING or btype == B_ELUSION:
        if cam[i, delta - 1]:
            target = vang[i, delta - 1]
            if btype == B_ELUSION:
                target += math.pi
            vl, vr = steer(target, VMAX)
        else:
            vl, vr = exploration_motion(tau, prox, i, mem, rng)
    elif btype == B_CIRCLING:
        half = 0.5 * theta * AXLE
        vl, vr = CIRCLING_SPEED - half, CIRCLING_SPEED + half
    else:
        vl, vr = exploration_motion(tau, prox, i, mem, rng)
    vl, vr = add_avoidance(vl, vr, prox, i)
    return clamp(vl, -VMAX, VMAX), clamp(vr, -VMAX, VMAX), gamma


@_inline
def condition_holds(ctype, delta, gnd, cam, i):
    if ctype == C_FIXED:
        return True
    if ctype == C_COLOR:
        return cam[i, delta - 1]
    # floor condition codes equal floor color codes
    return gnd[i, 0] == ctype or gnd[i, 1] == ctype or gnd[i, 2] == ctype


@_inline
def transition_fires(ctype, delta, beta, gnd, cam, i, rng):
    if not condition_holds(ctype, delta, gnd, cam, i):
        return False
    return next_float(rng) < beta


@_inline
def pfsm_step(beh, beh_theta, n_tr, tr, tr_beta, prox, gnd, cam, vang, mem, i, rng):
    cur = mem[i, 0]
    for t in range(n_tr[cur]):
        if transition_fires(tr[cur, t, 0], tr[cur, t, 1], tr_beta[cur, t], gnd, cam, i, rng):
            mem[i, 0] = tr[cur, t, 2]
            mem[i, 1] = 0
            mem[i, 2] = 0
            break
    cur = mem[i, 0]
    return behavior_output(beh[cur, 0], beh[cur, 1], beh[cur, 2], beh[cur, 3], beh_theta[cur],
                           prox, cam, vang, mem, i, rng)


# --------------------------------------------------------------------------
# sheep, random walk, neural network
#
# sheep mem row: [nudge countdown, nudge direction, unused, unused]
# rwalk mem row: [unused, turn countdown, turn sign, unused]


@_inline
def sheep_step(variant, repulsion_first, prox, gnd, cam, vang, mem, halted, i):
    """Fixed sheep controller. Returns (vl, vr, led, halted)."""
    if halted[i]:
        return 0.0, 0.0, 0, True
    if gnd[i, 0] == WHITE or gnd[i, 1] == WHITE or gnd[i, 2] == WHITE:
        mem[i, 0] = 0
        return 0.0, 0.0, 0, True
    flee = (variant == 2 or variant == 3) and cam[i, 0]
    seek = (variant == 1 or variant == 3) and cam[i, 1]
    if flee and seek and not repulsion_first:
        flee = False
    if flee:
        mem[i, 0] = 0
        vl, vr = steer(vang[i, 0] + math.pi, VMAX)
        return vl, vr, 3, False
    if seek:
        mem[i, 0] = 0
        vl, vr = steer(vang[i, 1], VMAX)
        return vl, vr, 3, False
    if mem[i, 0] > 0:
        mem[i, 0] -= 1
        v = mem[i, 1] * VMAX
        return v, v, 3, False
    best = 0
    for s in range(1, 8):
        if prox[i, s] > prox[i, best]:
            best = s
    if prox[i, best] > PROX_TRIGGER:
        d = -1 if PROX_COS[best] > 0.0 else 1
        mem[i, 1] = d
        mem[i, 0] = SHEEP_NUDGE_CYCLES - 1
        return d * VMAX, d * VMAX, 3, False
    return 0.0, 0.0, 3, False


@_inline
def rwalk_step(prox, mem, i, rng):
    """Ballistic walk: straight until a frontal obstacle, then rotate by U[-pi, pi]."""
    if mem[i, 1] > 0:
        mem[i, 1] -= 1
        d = float(mem[i, 2])
        return -d * VMAX, d * VMAX, 0
    if front_triggered(prox, i):
        delta = (2.0 * next_float(rng) - 1.0) * math.pi
        d = -1 if delta < 0.0 else 1
        cycles = max(1, int(math.ceil(abs(delta) / RWALK_TURN_PER_CYCLE)))
        mem[i, 2] = d
        mem[i, 1] = cycles - 1
        return -d * VMAX, d * VMAX, 0
    return VMAX, VMAX, 0


@_inline
def encode_inputs(prox, gnd, cam, vang, i, out):
    for s in range(8):
        out[s] = prox[i, s]
    for g in range(3):
        out[8 + g] = 0.5 * gnd[i, g]
    for c in range(3):
        if cam[i, c]:
            vc = math.cos(vang[i, c])
            vs = math.sin(vang[i, c])
            for k in range(4):
                p = vc * PROJ_COS[k] + vs * PROJ_SIN[k]
                out[11 + 4 * c + k] = p if p > 0.0 else 0.0
        else:
            for k in range(4):
                out[11 + 4 * c + k] = 0.0
    out[23] = 1.0


@_inline
def nn_outputs(weights, inputs, out):
    for b in range(N_OUT):
        acc = 0.0
        for a in range(N_IN):
            acc += weights[b * N_IN + a] * inputs[a]
        out[b] = 1.0 / (1.0 + math.exp(-acc))


@_inline
def nn_decode(o):
    vl = VMAX * (o[0] - o[1])
    vr = VMAX * (o[2] - o[3])
    best = 4
    for b in range(5, 8):
        if o[b] > o[best]:
            best = b
    return vl, vr, best - 4


@_inline
def nn_step(weights, prox, gnd, cam, vang, i, inputs, outputs):
    encode_inputs(prox, gnd, cam, vang, i, inputs)
    nn_outputs(weights, inputs, outputs)
    return nn_decode(outputs)


# --------------------------------------------------------------------------
# physics


@_inline
def integrate(pos, heading, vl, vr, halted):
    for i in range(pos.shape[0]):
        if halted[i]:
            continue
        v = 0.5 * (vl[i] + vr[i])
        w = (vr[i] - vl[i]) / AXLE
        pos[i, 0] += v * math.cos(heading[i]) * DT
        pos[i, 1] += v * math.sin(heading[i]) * DT
        heading[i] = wrap_2pi(heading[i] + w * DT)


@_jit
def resolve_collisions(pos, halted, normals, offsets, passes):
    """Push overlapping disks apart and project wall penetrations back.

    Pairs separate symmetrically along their center line; a halted robot is
    immovable, so its partner takes the whole correction. Returns the number
    of passes that moved something.
    """
    n = pos.shape[0]
    lim = 2.0 * RADIUS
    lim2 = lim * lim
    for p in range(passes):
        moved = False
        for i in range(n):
            for j in range(i + 1, n):
                dx = pos[j, 0] - pos[i, 0]
                dy = pos[j, 1] - pos[i, 1]
                d2 = dx * dx + dy * dy
                if d2 >= lim2:
                    continue
                if halted[i] and halted[j]:
                    continue
                d = math.sqrt(d2)
                overlap = lim - d
                if overlap <= 1e-9:
                    continue
                if d > 0.0:
                    ux = dx / d
                    uy = dy / d
                else:
                    ux = 1.0
                    uy = 0.0
                if halted[i]:
                    wi, wj = 0.0, 1.0
                elif halted[j]:
                    wi, wj = 1.0, 0.0
                else:
                    wi, wj = 0.5, 0.5
                pos[i, 0] -= ux * overlap * wi
                pos[i, 1] -= uy * overlap * wi
                pos[j, 0] += ux * overlap * wj
                pos[j, 1] += uy * overlap * wj
                moved = True
        for i in range(n):
            if halted[i]:
                continue
            for k in range(normals.shape[0]):
                excess = normals[k, 0] * pos[i, 0] + normals[k, 1] * pos[i, 1] - (offsets[k] - RADIUS)
                if excess > 1e-9:
                    pos[i, 0] -= excess * normals[k, 0]
                    pos[i, 1] -= excess * normals[k, 1]
                    moved = True
        if not moved:
            return p
    return passes


# --------------------------------------------------------------------------
# episode


@_jit
def control_all(n_shepherds, shep_kind, beh, beh_theta, n_tr, tr, tr_beta, weights,
                sheep_variant, repulsion_first, prox, gnd, cam, vang, mem, halted, rng,
                vl, vr, new_led, inputs, outputs):
    """Query every controller in index order; False on a non-finite actuation."""
    n = prox.shape[0]
    for i in range(n):
        if i < n_shepherds:
            if shep_kind == CTL_PFSM:
                a, b, c = pfsm_step(beh, beh_theta, n_tr, tr, tr_beta,
                                    prox, gnd, cam, vang, mem, i, rng)
            elif shep_kind == CTL_NN:
                a, b, c = nn_step(weights, prox, gnd, cam, vang, i, inputs, outputs)
            elif shep_kind == CTL_RWALK:
                a, b, c = rwalk_step(prox, mem, i, rng)
            else:
                a, b, c = 0.0, 0.0, 0
        else:
            a, b, c, h = sheep_step(sheep_variant, repulsion_first,
                                    prox, gnd, cam, vang, mem, halted, i)
            halted[i] = h
        if not (math.isfinite(a) and math.isfinite(b)):
            return False
        vl[i] = clamp(a, -VMAX, VMAX)
        vr[i] = clamp(b, -VMAX, VMAX)
        new_led[i] = c
    return True


@_jit
def step_world(pos, heading, led, halted, mem, rng,
               normals, offsets, reg_c, reg_r, reg_col, default,
               n_shepherds, shep_kind, beh, beh_theta, n_tr, tr, tr_beta, weights,
               sheep_variant, repulsion_first, ws):
    """One control cycle in place. Returns False on a controller fault (poses untouched)."""
    prox, gnd, cam, vang, acc, vl, vr, new_led, was_halted, inputs, outputs = ws
    n = pos.shape[0]
    sense_all(pos, heading, led, normals, offsets, reg_c, reg_r, reg_col, default,
              prox, gnd, cam, vang, acc)
    for i in range(n):
        was_halted[i] = halted[i]
    ok = control_all(n_shepherds, shep_kind, beh, beh_theta, n_tr, tr, tr_beta, weights,
                     sheep_variant, repulsion_first, prox, gnd, cam, vang, mem, halted, rng,
                     vl, vr, new_led, inputs, outputs)
    if not ok:
        return False
    advance(pos, heading, led, halted, vl, vr, new_led, was_halted, normals, offsets)
    return True


@_jit
def advance(pos, heading, led, halted, vl, vr, new_led, was_halted, normals, offsets):
    """Apply chosen actuations: LEDs, kinematics, then collision resolution."""
    for i in range(pos.shape[0]):
        if not was_halted[i]:
            led[i] = new_led[i]
    integrate(pos, heading, vl, vr, halted)
    resolve_collisions(pos, halted, normals, offsets, COLLISION_PASSES)


@_inline
def _record(trace, row, pos, heading, led):
    for i in range(pos.shape[0]):
        trace[row, i, 0] = pos[i, 0]
        trace[row, i, 1] = pos[i, 1]
        trace[row, i, 2] = heading[i]
        trace[row, i, 3] = led[i]


@_jit
def run_episode_kernel(pos, heading, led, halted, mem, rng,
                       normals, offsets, reg_c, reg_r, reg_col, default,
                       n_shepherds, shep_kind, beh, beh_theta, n_tr, tr, tr_beta, weights,
                       sheep_variant, repulsion_first, n_ticks, trace):
    """Run ``n_ticks`` cycles in place; returns the number of completed cycles.

    When ``trace`` has ``n_ticks + 1`` rows it receives (x, y, heading, led)
    per robot before the first cycle and after every completed cycle.
    """
    n = pos.shape[0]
    ws = (
        np.zeros((n, 8)),
        np.zeros((n, 3), dtype=np.int64),
        np.zeros((n, 3), dtype=np.bool_),
        np.zeros((n, 3)),
        np.zeros((n, 3, 3)),
        np.zeros(n),
        np.zeros(n),
        np.zeros(n, dtype=np.int64),
        np.zeros(n, dtype=np.bool_),
        np.zeros(N_IN),
        np.zeros(N_OUT),
    )
    record = trace.shape[0] == n_ticks + 1
    if record:
        _record(trace, 0, pos, heading, led)
    for t in range(n_ticks):
        ok = step_world(pos, heading, led, halted, mem, rng,
                        normals, offsets, reg_c, reg_r, reg_col, default,
                        n_shepherds, shep_kind, beh, beh_theta, n_tr, tr, tr_beta, weights,
                        sheep_variant, repulsion_first, ws)
        if not ok:
            return t
        if record:
            _record(trace, t + 1, pos, heading, led)
    return n_ticks


# --------------------------------------------------------------------------
# single-call entry points for the Python API (row 0 of 1-row arrays)


@_jit
def behavior_output_1(btype, tau, delta, gamma, theta, prox, cam, vang, mem, rng):
    return behavior_output(btype, tau, delta, gamma, theta, prox, cam, vang, mem, 0, rng)


@_jit
def transition_fires_1(ctype, delta, beta, gnd, cam, rng):
    return transition_fires(ctype, delta, beta, gnd, cam, 0, rng)


@_jit
def pfsm_step_1(beh, beh_theta, n_tr, tr, tr_beta, prox, gnd, cam, vang, mem, rng):
    return pfsm_step(beh, beh_theta, n_tr, tr, tr_beta, prox, gnd, cam, vang, mem, 0, rng)


@_jit
def sheep_step_1(variant, repulsion_first, prox, gnd, cam, vang, mem, halted):
    return sheep_step(variant, repulsion_first, prox, gnd, cam, vang, mem, halted, 0)


@_jit
def rwalk_step_1(prox, mem, rng):
    return rwalk_step(prox, mem, 0, rng)


@_jit
def encode_inputs_1(prox, gnd, cam, vang, out):
    encode_inputs(prox, gnd, cam, vang, 0, out)


@_jit
def nn_forward_1(weights, inputs, outputs):
    nn_outputs(weights, inputs, outputs)
    return nn_decode(outputs)


# --------------------------------------------------------------------------
# placement


@_jit
def place_robots(rng, n, disk_radius, min_dist, wall_gap, normals, offsets,
                 reg_c, reg_r, reg_col, max_rejections, pos, heading):
    """Rejection-sample ``n`` non-overlapping centers.

    ``disk_radius <= 0`` samples the whole arena. A robot is also rejected
    when any ground probe of any heading could touch a white region. After
    too many consecutive misses the layout restarts, since sequential
    sampling can jam. Returns the number of rejections, or -1 on failure.
    """
    r_out = 0.0
    for k in range(offsets.shape[0]):
        r_out = max(r_out, offsets[k])
    r_out = r_out / math.cos(math.pi / offsets.shape[0])
    rejections = 0
    streak = 0
    placed = 0
    while placed < n:
        if rejections >= max_rejections:
            return -1
        if disk_radius > 0.0:
            rr = disk_radius * math.sqrt(next_float(rng))
            aa = TWO_PI * next_float(rng)
            x = rr * math.cos(aa)
            y = rr * math.sin(aa)
        else:
            x = (2.0 * next_float(rng) - 1.0) * r_out
            y = (2.0 * next_float(rng) - 1.0) * r_out
        ok = inside_arena(x, y, normals, offsets, -wall_gap)
        if ok:
            for k in range(reg_r.shape[0]):
                if reg_col[k] == WHITE:
                    dx = x - reg_c[k, 0]
                    dy = y - reg_c[k, 1]
                    if math.sqrt(dx * dx + dy * dy) <= reg_r[k] + GND_OFFSET:
                        ok = False
                        break
        if ok:
            for j in range(placed):
                dx = x - pos[j, 0]
                dy = y - pos[j, 1]
                if dx * dx + dy * dy < min_dist * min_dist:
                    ok = False
                    break
        if not ok:
            rejections += 1
            streak += 1
            if streak >= 2000:
                placed = 0
                streak = 0
            continue
        pos[placed, 0] = x
        pos[placed, 1] = y
        placed += 1
        streak = 0
    for i in range(n):
        heading[i] = TWO_PI * next_float(rng)
    return rejections
