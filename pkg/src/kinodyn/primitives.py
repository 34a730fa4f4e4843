"""Vehicle motion primitives.

Single-track kinematic integration with exact closed-form arcs for
constant controls, plus Dubins and Reeds-Shepp shortest-path lengths for
heuristics and initial guesses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Point2, Pose, normalize_angle

_RS_EPS = 1e-10


@dataclass(frozen=True)
class VehicleParams:
    """Geometric vehicle parameters for the kinematic single-track model."""

    wheelbase: float = 2.7
    max_steer: float = 0.55
    v_abs_max: float = 13.9

    def __post_init__(self):
        if self.wheelbase <= 0.0:
            raise ValueError("wheelbase must be positive")
        if not 0.0 < self.max_steer < math.pi / 2:
            raise ValueError("max_steer must be in (0, pi/2)")

    @property
    def turn_radius_min(self) -> float:
        return self.wheelbase / math.tan(self.max_steer)


@dataclass(frozen=True)
class KinState:
    """Kinematic vehicle state: rear-axle pose and longitudinal speed."""

    pose: Pose
    speed: float

    @classmethod
    def of(cls, x: float, y: float, heading: float, speed: float) -> "KinState":
        return cls(Pose.of(x, y, heading), speed)


@dataclass(frozen=True)
class ControlPair:
    """Constant acceleration and steering angle held over one step."""

    accel: float
    steer: float

    def __post_init__(self):
        if abs(self.steer) >= math.pi / 2:
            raise ValueError("steer angle must satisfy |beta| < pi/2")


def _clamp_event(v0: float, a: float, dt: float, v_max: float, stop_at_zero: bool):
    """First time in (0, dt] at which the speed law changes, or None.

    After the event the acceleration is zero (speed holds at the limit),
    so a step decomposes into at most two constant-acceleration phases.
    """
    if a == 0.0:
        return None, v0
    candidates = []
    if stop_at_zero and v0 != 0.0 and (v0 > 0.0) != (a > 0.0):
        tz = -v0 / a
        if 0.0 < tz <= dt:
            candidates.append((tz, 0.0))
    v_hit = v_max if a > 0.0 else -v_max
    th = (v_hit - v0) / a
    if 0.0 < th <= dt:
        candidates.append((th, v_hit))
    if not candidates:
        return None, v0
    return min(candidates, key=lambda c: c[0])


def _sinc_half(h: float) -> float:
    """sin(h)/h, series-expanded near zero for stability."""
    if abs(h) < 1e-6:
        return 1.0 - h * h / 6.0
    return math.sin(h) / h


def _advance(x: float, y: float, psi: float, v0: float, a: float, curv: float, tau: float):
    """Advance one constant-acceleration phase by closed-form integration.

    Uses the half-angle chord form, which stays well-conditioned as the
    curvature approaches zero (straight-line motion is the smooth limit).
    """
    s = v0 * tau + 0.5 * a * tau * tau
    half = 0.5 * curv * s
    chord = s * _sinc_half(half)
    x1 = x + chord * math.cos(psi + half)
    y1 = y + chord * math.sin(psi + half)
    return x1, y1, psi + curv * s, v0 + a * tau


def _phase_arc_length(v0: float, a: float, tau: float) -> float:
    """Unsigned distance traveled in one constant-acceleration phase."""
    v1 = v0 + a * tau
    if v0 * v1 >= 0.0:
        return abs(v0 * tau + 0.5 * a * tau * tau)
    tz = -v0 / a
    s1 = v0 * tz + 0.5 * a * tz * tz
    s2 = v0 * tau + 0.5 * a * tau * tau - s1
    return abs(s1) + abs(s2)


def integrate_step(
    s: KinState,
    u: ControlPair,
    dt: float,
    params: VehicleParams,
    stop_at_zero: bool = False,
) -> KinState:
    """Advance the single-track kinematics by ``dt`` under constant controls.

    Uses exact arc integration (heading from the analytically integrated
    speed), not an Euler scheme, so composing half steps reproduces a full
    step to rounding error.  Speed is clamped at ``params.v_abs_max``; with
    ``stop_at_zero`` a step that would cross v = 0 holds the vehicle at
    standstill instead.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    state, _ = integrate_step_with_length(s, u, dt, params, stop_at_zero)
    return state


def integrate_step_with_length(
    s: KinState,
    u: ControlPair,
    dt: float,
    params: VehicleParams,
    stop_at_zero: bool = False,
):
    """Like :func:`integrate_step` but also returns the traveled arc length."""
    curv = math.tan(u.steer) / params.wheelbase
    x, y, psi, v = s.pose.x, s.pose.y, s.pose.heading, s.speed
    t_ev, v_ev = _clamp_event(v, u.accel, dt, params.v_abs_max, stop_at_zero)
    if t_ev is None:
        arc = _phase_arc_length(v, u.accel, dt)
        x, y, psi, v = _advance(x, y, psi, v, u.accel, curv, dt)
    else:
        arc = _phase_arc_length(v, u.accel, t_ev)
        x, y, psi, _ = _advance(x, y, psi, v, u.accel, curv, t_ev)
        rest = dt - t_ev
        arc += abs(v_ev) * rest
        x, y, psi, v = _advance(x, y, psi, v_ev, 0.0, curv, rest)
    return KinState(Pose(Point2(x, y), normalize_angle(psi)), v), arc


# -- Dubins paths -------------------------------------------------------------


def _mod2pi(x: float) -> float:
    """Wrap to [0, 2*pi)."""
    return x % (2.0 * math.pi)


def _apply_segments(x: float, y: float, h: float, segments):
    """Compose unit-radius arc/straight segments with signed lengths."""
    for steer, ln in segments:
        if steer == 0:
            x += ln * math.cos(h)
            y += ln * math.sin(h)
        elif steer > 0:  # left
            x += math.sin(h + ln) - math.sin(h)
            y += math.cos(h) - math.cos(h + ln)
            h += ln
        else:  # right
            x += math.sin(h) - math.sin(h - ln)
            y += math.cos(h - ln) - math.cos(h)
            h -= ln
    return x, y, h


def _closes(segments, d: float, alpha: float, beta: float, tol: float = 1e-8) -> bool:
    x, y, h = _apply_segments(0.0, 0.0, alpha, segments)
    return math.hypot(x - d, y) <= tol and abs(normalize_angle(h - beta)) <= tol


def _dubins_words(alpha: float, beta: float, d: float):
    sa, sb = math.sin(alpha), math.sin(beta)
    ca, cb = math.cos(alpha), math.cos(beta)
    c_ab = math.cos(alpha - beta)
    words = []

    p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb)
    if p_sq >= 0.0:
        tmp = math.atan2(cb - ca, d + sa - sb)
        words.append(("LSL", _mod2pi(tmp - alpha), math.sqrt(p_sq), _mod2pi(beta - tmp)))

    p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa)
    if p_sq >= 0.0:
        tmp = math.atan2(ca - cb, d - sa + sb)
        words.append(("RSR", _mod2pi(alpha - tmp), math.sqrt(p_sq), _mod2pi(tmp - beta)))

    p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb)
    if p_sq >= 0.0:
        p = math.sqrt(p_sq)
        tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        words.append(("LSR", _mod2pi(tmp - alpha), p, _mod2pi(tmp - beta)))

    p_sq = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb)
    if p_sq >= 0.0:
        p = math.sqrt(p_sq)
        tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        words.append(("RSL", _mod2pi(alpha - tmp), p, _mod2pi(beta - tmp)))

    tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0
    if abs(tmp) <= 1.0:
        p = _mod2pi(2.0 * math.pi - math.acos(tmp))
        t = _mod2pi(alpha - math.atan2(ca - cb, d - sa + sb) + p / 2.0)
        words.append(("RLR", t, p, _mod2pi(alpha - beta - t + p)))

    tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0
    if abs(tmp) <= 1.0:
        p = _mod2pi(2.0 * math.pi - math.acos(tmp))
        t = _mod2pi(-alpha + math.atan2(cb - ca, d + sa - sb) + p / 2.0)
        words.append(("LRL", t, p, _mod2pi(beta - alpha - t + p)))

    return words


_STEER = {"L": 1, "S": 0, "R": -1}


def dubins_length(pose_from: Pose, pose_to: Pose, radius: float) -> float:
    """Length of the shortest forward-only bounded-curvature path."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    dx = pose_to.x - pose_from.x
    dy = pose_to.y - pose_from.y
    d = math.hypot(dx, dy) / radius
    theta = math.atan2(dy, dx)
    alpha = normalize_angle(pose_from.heading - theta)
    beta = normalize_angle(pose_to.heading - theta)
    if d < 1e-15 and abs(normalize_angle(alpha - beta)) < 1e-15:
        return 0.0
    best = math.inf
    for word, t, p, q in _dubins_words(alpha, beta, d):
        total = t + p + q
        if total >= best:
            continue
        segments = [(_STEER[c], ln) for c, ln in zip(word, (t, p, q))]
        if _closes(segments, d, alpha, beta):
            best = total
    if not math.isfinite(best):
        raise RuntimeError("no valid Dubins word found")
    return best * radius


# -- Reeds-Shepp paths ---------------------------------------------------------


def _rs_wrap(x: float) -> float:
    return math.pi - (math.pi - x) % (2.0 * math.pi)


def _polar(x: float, y: float):
    return math.hypot(x, y), math.atan2(y, x)


def _tau_omega(u, v, xi, eta, phi):
    delta = _rs_wrap(u - v)
    A = math.sin(u) - math.sin(delta)
    B = math.cos(u) - math.cos(delta) - 1.0
    t1 = math.atan2(eta * A - xi * B, xi * A + eta * B)
    t2 = 2.0 * (math.cos(delta) - math.cos(v) - math.cos(u)) + 3.0
    tau = _rs_wrap(t1 + math.pi) if t2 < 0.0 else _rs_wrap(t1)
    return tau, _rs_wrap(tau - u + v - phi)


def _csc(x, y, phi):
    out = []
    u, t = _polar(x - math.sin(phi), y - 1.0 + math.cos(phi))
    if t >= -_RS_EPS:
        v = _rs_wrap(phi - t)
        if v >= -_RS_EPS:
            out.append(("LSL", (t, u, v)))
    u1, t1 = _polar(x + math.sin(phi), y - 1.0 - math.cos(phi))
    if u1 * u1 >= 4.0:
        u = math.sqrt(u1 * u1 - 4.0)
        t = _rs_wrap(t1 + math.atan2(2.0, u))
        v = _rs_wrap(t - phi)
        if t >= -_RS_EPS and v >= -_RS_EPS:
            out.append(("LSR", (t, u, v)))
    return out


def _ccc(x, y, phi):
    out = []
    xi = x - math.sin(phi)
    eta = y - 1.0 + math.cos(phi)
    u1, theta = _polar(xi, eta)
    if u1 <= 4.0:
        u = -2.0 * math.asin(u1 / 4.0)
        t = _rs_wrap(theta + u / 2.0 + math.pi)
        v = _rs_wrap(phi - t + u)
        if t >= -_RS_EPS and u <= _RS_EPS:
            out.append(("LRL", (t, u, v)))
    return out


def _cccc(x, y, phi):
    out = []
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho = (2.0 + math.hypot(xi, eta)) / 4.0
    if rho <= 1.0:
        u = math.acos(rho)
        t, v = _tau_omega(u, -u, xi, eta, phi)
        if t >= -_RS_EPS and v <= _RS_EPS:
            out.append(("LRLR", (t, u, -u, v)))
    rho = (20.0 - xi * xi - eta * eta) / 16.0
    if 0.0 <= rho <= 1.0:
        u = -math.acos(rho)
        if u >= -math.pi / 2.0:
            t, v = _tau_omega(u, u, xi, eta, phi)
            if t >= -_RS_EPS and v >= -_RS_EPS:
                out.append(("LRLR", (t, u, u, v)))
    return out


def _ccsc(x, y, phi):
    out = []
    xi = x - math.sin(phi)
    eta = y - 1.0 + math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        r = math.sqrt(rho * rho - 4.0)
        u = 2.0 - r
        t = _rs_wrap(theta + math.atan2(r, -2.0))
        v = _rs_wrap(phi - math.pi / 2.0 - t)
        if t >= -_RS_EPS and u <= _RS_EPS and v <= _RS_EPS:
            out.append(("LRSL", (t, -math.pi / 2.0, u, v)))
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, theta = _polar(-eta, xi)
    if rho >= 2.0:
        t = theta
        u = 2.0 - rho
        v = _rs_wrap(t + math.pi / 2.0 - phi)
        if t >= -_RS_EPS and u <= _RS_EPS and v <= _RS_EPS:
            out.append(("LRSR", (t, -math.pi / 2.0, u, v)))
    return out


def _ccscc(x, y, phi):
    out = []
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, _ = _polar(xi, eta)
    if rho >= 2.0:
        u = 4.0 - math.sqrt(rho * rho - 4.0)
        if u <= _RS_EPS:
            t = _rs_wrap(math.atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta))
            v = _rs_wrap(t - phi)
            if t >= -_RS_EPS and v >= -_RS_EPS:
                out.append(("LRSLR", (t, -math.pi / 2.0, u, -math.pi / 2.0, v)))
    return out


_RS_FAMILIES = (
    (_csc, False),
    (_ccc, True),
    (_cccc, False),
    (_ccsc, True),
    (_ccscc, False),
)

_FLIP = {"L": "R", "R": "L", "S": "S"}


def _rs_candidates(x: float, y: float, phi: float):
    """All Reeds-Shepp word candidates as (letters, signed lengths)."""
    cands = []
    for family, with_backwards in _RS_FAMILIES:
        variants = [
            ((x, y, phi), False, False),
            ((-x, y, -phi), True, False),
            ((x, -y, -phi), False, True),
            ((-x, -y, phi), True, True),
        ]
        frames = [(variants, False)]
        if with_backwards:
            xb = x * math.cos(phi) + y * math.sin(phi)
            yb = x * math.sin(phi) - y * math.cos(phi)
            back_variants = [
                ((xb, yb, phi), False, False),
                ((-xb, yb, -phi), True, False),
                ((xb, -yb, -phi), False, True),
                ((-xb, -yb, phi), True, True),
            ]
            frames.append((back_variants, True))
        for variant_list, backwards in frames:
            for (vx, vy, vphi), timeflip, reflect in variant_list:
                for letters, lengths in family(vx, vy, vphi):
                    lets = [(_FLIP[c] if reflect else c) for c in letters]
                    lens = [-l if timeflip else l for l in lengths]
                    if backwards:
                        lets = lets[::-1]
                        lens = lens[::-1]
                    cands.append((lets, lens))
    return cands


def reeds_shepp_path(pose_from: Pose, pose_to: Pose, radius: float):
    """Shortest Reeds-Shepp path as (length, segments).

    Segments are (steer, signed arc length in meters) with steer in
    {-1, 0, +1} for right/straight/left; negative lengths mean reversing.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    dx = pose_to.x - pose_from.x
    dy = pose_to.y - pose_from.y
    c, s = math.cos(pose_from.heading), math.sin(pose_from.heading)
    x = (c * dx + s * dy) / radius
    y = (-s * dx + c * dy) / radius
    phi = normalize_angle(pose_to.heading - pose_from.heading)
    if math.hypot(x, y) < 1e-15 and abs(phi) < 1e-15:
        return 0.0, []
    best = math.inf
    best_segments = None
    for letters, lengths in _rs_candidates(x, y, phi):
        total = sum(abs(l) for l in lengths)
        if total >= best:
            continue
        segments = [(_STEER[c], ln) for c, ln in zip(letters, lengths) if abs(ln) > 1e-12]
        ex, ey, eh = _apply_segments(0.0, 0.0, 0.0, segments)
        if math.hypot(ex - x, ey - y) > 1e-8 or abs(normalize_angle(eh - phi)) > 1e-8:
            continue
        best = total
        best_segments = segments
    if best_segments is None:
        raise RuntimeError("no valid Reeds-Shepp word found")
    return best * radius, [(steer, ln * radius) for steer, ln in best_segments]


def reeds_shepp_length(pose_from: Pose, pose_to: Pose, radius: float) -> float:
    """Length (forward plus backward arc lengths) of the shortest RS path."""
    return reeds_shepp_path(pose_from, pose_to, radius)[0]


def sample_reeds_shepp(pose_from: Pose, segments, radius: float, arc_positions):
    """Poses and gears along an RS path at the given unsigned arc positions."""
    bounds = [0.0]
    for _, ln in segments:
        bounds.append(bounds[-1] + abs(ln))
    total = bounds[-1]
    out = []
    for s_query in arc_positions:
        s_query = min(max(s_query, 0.0), total)
        x, y, h = pose_from.x, pose_from.y, pose_from.heading
        gear = 1.0
        remaining = s_query
        for steer, ln in segments:
            seg_len = abs(ln)
            gear = 1.0 if ln >= 0 else -1.0
            take = min(remaining, seg_len)
            if take > 0.0:
                signed = math.copysign(take, ln) / radius
                x, y, h = _apply_scaled(x, y, h, steer, signed, radius)
            remaining -= take
            if remaining <= 1e-12:
                break
        out.append((Pose(Point2(x, y), normalize_angle(h)), gear))
    return out


def _apply_scaled(x, y, h, steer, signed_scaled, radius):
    """Apply one unit-frame segment scaled back to world units."""
    if steer == 0:
        ln = signed_scaled * radius
        return x + ln * math.cos(h), y + ln * math.sin(h), h
    if steer > 0:
        h1 = h + signed_scaled
        return (
            x + radius * (math.sin(h1) - math.sin(h)),
            y + radius * (math.cos(h) - math.cos(h1)),
            h1,
        )
    h1 = h - signed_scaled
    return (
        x + radius * (math.sin(h) - math.sin(h1)),
        y + radius * (math.cos(h1) - math.cos(h)),
        h1,
    )
