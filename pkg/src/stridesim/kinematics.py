"""Stateless conversion from a pendulum-model state to a lower-limb posture.

Given the state q and phase time t, the conversion (1) lowers the pelvis
from its model plane onto a smooth height profile built from per-leg
arcs around each foot's center of pressure, (2) lifts the swing toe on a
clearance sinusoid, and (3) resolves one redundancy per leg by aiming
the thigh at a ground target, then solving the shank/foot pair in closed
form.  Everything is a pure function of (q, t, config, body): converting
the same inputs twice is bit-identical, and no history is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .body import BodyModel
from .config import GaitConfig
from .errors import GeometryError, WorkspaceError

COP_EPS = 0.2   # heel-side asymmetry of the center-of-pressure remap


# --------------------------------------------------------------- shape set

def _boundary_cubic(dt: float):
    """Cubic on [0, dt] with value 0 and slope -1 at both ends."""
    if dt <= 0.0:
        return (0.0, 0.0, 0.0)
    return (-2.0 / dt**2, 3.0 / dt, -1.0)


def _eval_cubic(c3, c2, c1, s):
    return ((c3 * s + c2) * s + c1) * s


class ShapeSet:
    """Per-(T, T_ds) time-shape functions used by the conversion.

    alpha: piecewise cubic, zero with slope -1 at t = 0, T_ds and T, so that
      p + alpha * pdot has zero rate at every phase boundary.
    beta: quintic, zero at both ends with slopes -2 (so the swing target
      advances through double support) and -1; its magnitude is tuned as
      close to twice alpha's as those slopes admit.
    gamma: smoothstep weight moving from the stance arc to the swing arc
      over the single-support phase, flat through double support.
    """

    _cache: dict = {}

    def __init__(self, step_time: float, ds_time: float):
        self.T = step_time
        self.Tds = ds_time
        self._c_ds = _boundary_cubic(ds_time)
        self._c_ss = _boundary_cubic(step_time - ds_time)
        # |alpha| peaks at (3 +- sqrt(3))/6 of each piece, scaling with its span
        t_ext = (3.0 - math.sqrt(3.0)) / 6.0
        self.alpha_max = abs(_eval_cubic(*_boundary_cubic(1.0), t_ext)) * max(ds_time, step_time - ds_time)
        self._beta_c = self._fit_beta(2.0 * self.alpha_max)
        self._beta_tuple = tuple(float(c) for c in self._beta_c)

    @classmethod
    def for_config(cls, config: GaitConfig) -> "ShapeSet":
        key = (config.step_time, config.ds_time)
        inst = cls._cache.get(key)
        if inst is None:
            inst = cls(*key)
            cls._cache[key] = inst
        return inst

    # ---- alpha / beta / gamma

    def alpha(self, t: float) -> float:
        if t <= self.Tds:
            return _eval_cubic(*self._c_ds, t)
        return _eval_cubic(*self._c_ss, t - self.Tds)

    def alpha_dot(self, t: float) -> float:
        if t <= self.Tds and self.Tds > 0.0:
            c3, c2, c1 = self._c_ds
            s = t
        else:
            c3, c2, c1 = self._c_ss
            s = t - self.Tds
        return (3.0 * c3 * s + 2.0 * c2) * s + c1

    def _fit_beta(self, target: float) -> np.ndarray:
        """Quintic with beta(0)=0, beta'(0)=-2, beta(T)=0, beta'(T)=-1 and a
        free interior knot value tuned toward max|beta| = target, keeping the
        base cubic's slope at the knot (similar shape, larger magnitude)."""
        T = self.T
        tm = self.Tds if self.Tds >= 0.1 * T else 0.3 * T
        # unique cubic with the four end conditions: T * s(1-s)(3s-2), s = t/T
        base = lambda t: t * (1.0 - t / T) * (3.0 * t / T - 2.0)
        base_dot = lambda t: (1.0 - 2.0 * t / T) * (3.0 * t / T - 2.0) + (t / T) * (1.0 - t / T) * 3.0

        def coeffs(bm):
            rows, rhs = [], []

            def row(t, deriv, val):
                r = np.zeros(6)
                for k in range(6):
                    if deriv == 0:
                        r[k] = t**k
                    elif deriv == 1:
                        r[k] = k * t**(k - 1) if k >= 1 else 0.0
                rows.append(r)
                rhs.append(val)

            row(0.0, 0, 0.0)
            row(0.0, 1, -2.0)
            row(T, 0, 0.0)
            row(T, 1, -1.0)
            row(tm, 0, bm)
            row(tm, 1, base_dot(tm))
            return np.linalg.solve(np.array(rows), np.array(rhs))

        grid = np.linspace(0.0, T, 257)

        def peak(bm):
            return float(abs(np.polyval(coeffs(bm)[::-1], grid)).max())

        b0 = base(tm)
        span = np.linspace(b0 - 0.6 * T, b0 + 0.6 * T, 241)
        g = np.array([peak(b) for b in span]) - target
        # bracket the nearest sign change to the base shape, then bisect
        crossings = [i for i in range(len(span) - 1) if g[i] * g[i + 1] <= 0.0]
        if not crossings:
            return coeffs(span[int(np.argmin(np.abs(g)))])
        i = min(crossings, key=lambda k: abs(span[k] - b0))
        lo, hi = span[i], span[i + 1]
        glo = g[i]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            gm = peak(mid) - target
            if glo * gm <= 0.0:
                hi = mid
            else:
                lo, glo = mid, gm
        return coeffs(0.5 * (lo + hi))

    def beta(self, t: float) -> float:
        c0, c1, c2, c3, c4, c5 = self._beta_tuple
        return ((((c5 * t + c4) * t + c3) * t + c2) * t + c1) * t + c0

    def gamma(self, t: float) -> float:
        # smoothstep over the single-support phase; flat through double
        # support so the mixed height has zero rate at the phase switch
        if t <= self.Tds:
            return 0.0
        s = min(max((t - self.Tds) / (self.T - self.Tds), 0.0), 1.0)
        return s * s * (3.0 - 2.0 * s)



def shape_functions(t: float, ds_time: float, step_time: float):
    """(alpha, beta, gamma) at phase time t for the given step timing."""
    key = (step_time, ds_time)
    inst = ShapeSet._cache.get(key)
    if inst is None:
        inst = ShapeSet(step_time, ds_time)
        ShapeSet._cache[key] = inst
    return inst.alpha(t), inst.beta(t), inst.gamma(t)


# monotone Hermite slopes of the center-of-pressure remap
# (Fritsch-Carlson on the knots (-1,-eps), (0,0), (1,1); the flat left end
# is the clamped one-sided slope)
_D_M1 = 2.0 * COP_EPS / (COP_EPS + 1.0)
_D_M2 = (3.0 - COP_EPS) / 2.0


def cop_remap(x: float) -> float:
    """Monotone map [-1, 1] -> [-eps, 1] through (-1,-eps), (0,0), (1,1)."""
    x = min(max(x, -1.0), 1.0)
    if x <= 0.0:
        s = x + 1.0
        y0, y1, m0, m1 = -COP_EPS, 0.0, 0.0, _D_M1
    else:
        s = x
        y0, y1, m0, m1 = 0.0, 1.0, _D_M1, _D_M2
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1


# ----------------------------------------------------- geometric primitives

def relative_vectors(q: np.ndarray, d: int, w: float):
    """Foot-minus-hip horizontal vectors p (stance) and r (swing) and rates.

    The stance hip sits at -d w/2, the swing hip at +d w/2 laterally from
    the pelvis center, so p = x_stance - x_pelvis + [0, d w/2] and
    r = x_swing - x_pelvis + [0, -d w/2].
    """
    q = np.asarray(q, float)
    off = 0.5 * w * d
    p = np.array([q[4] - q[2], q[5] - q[3] + off])
    r = np.array([q[0] - q[2], q[1] - q[3] - off])
    pdot = np.array([q[10] - q[8], q[11] - q[9]])
    rdot = np.array([q[6] - q[8], q[7] - q[9]])
    return p, r, pdot, rdot


def cop_offsets(p: np.ndarray, r: np.ndarray, h: float, l: float):
    """Sagittal center-of-pressure offsets from each heel.

    Linear in the feet separation: equal separation puts both at mid-foot
    h/2; a separation of one leg length spreads them to toe (h) and heel
    (0); backward separations reverse the travel automatically.
    """
    gap = (r[0] - p[0]) / l
    p_cop = 0.5 * h * (1.0 + gap)
    r_cop = 0.5 * h * (1.0 - gap)
    return p_cop, r_cop


def delta_map(x_cop: float, h: float) -> float:
    """Ellipse offset Delta = (h/2) delta(2 x_cop / h - 1) for x_cop in [0, h]."""
    return 0.5 * h * cop_remap(2.0 * x_cop / h - 1.0)


def smooth_max(a: float, b: float) -> float:
    """C0 blending maximum used to pick a feasible per-leg height error."""
    if a >= 0.0 and b >= 0.0:
        return math.hypot(a, b)
    if b < 0.0 <= a:
        return a
    if a < 0.0 <= b:
        return b
    return a + b + math.hypot(a, b)


def fixed_arc_height(x: float, y: float, x_cop: float, l: float, slope: float) -> float:
    """Pelvis height over a fixed leg-length arc centered at the foot's
    center of pressure; the l sin(slope) shift keeps a zero-speed gait on
    an incline fully stretched."""
    zc = l * math.cos(slope)
    rad = zc * zc - (x + x_cop + l * math.sin(slope)) ** 2 - y * y
    if rad <= 0.0:
        raise GeometryError("fixed arc has no real intersection")
    return math.sqrt(rad)


def adaptive_arc_height(x: float, y: float, delta: float, l: float, slope: float,
                        leg: str = "") -> float:
    """Height of the true-vertical line through the pelvis on the leg's
    offset ellipse ((x-2D)/(l+2D))^2 + (y/l)^2 + (z/(l+D))^2 = 1.

    ``x, y`` are the foot-minus-hip components; the ellipse lives in the
    heel frame, where the pelvis sits at their negation.  The +2D offset
    then points at the toe when the center of pressure does, letting the
    support arc extend over the toe during push-off (heel rise) while the
    heel-side shrink produces the touch-down knee flexion."""
    zc = l * math.cos(slope)
    tan = math.tan(slope)
    a1 = l + 2.0 * delta
    a3 = l + delta
    x, y = -x, -y
    u0 = x - tan * zc - 2.0 * delta
    qa = (tan / a1) ** 2 + 1.0 / (a3 * a3)
    qb = 2.0 * u0 * tan / (a1 * a1)
    qc = (u0 / a1) ** 2 + (y / l) ** 2 - 1.0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        raise GeometryError(f"{leg or 'leg'} ellipse misses the vertical line")
    z = (-qb + math.sqrt(disc)) / (2.0 * qa)
    if z <= 0.0:
        raise GeometryError(f"{leg or 'leg'} ellipse intersection not above ground")
    return z


def pelvis_height_fixed(pbar, rbar, p_cop: float, r_cop: float, l: float,
                        slope: float, t: float, shapes: ShapeSet) -> float:
    """Time-mixed fixed-arc pelvis height (first method)."""
    zp = fixed_arc_height(pbar[0], pbar[1], p_cop, l, slope)
    zq = fixed_arc_height(rbar[0], rbar[1], r_cop, l, slope)
    g = shapes.gamma(t)
    return (1.0 - g) * zp + g * zq


def pelvis_height_adaptive(pbar, rbar, p_cop: float, r_cop: float, l: float,
                           slope: float, h: float, clamp: bool = False):
    """Smooth-minimum adaptive pelvis height (second method).

    Returns (z, z_stance_candidate, z_swing_candidate).  Under ``clamp``
    a leg whose arc cannot reach the pelvis line abstains from the blend
    (zero height error) instead of raising.
    """
    dp = delta_map(min(max(p_cop, 0.0), h), h)
    dr = delta_map(min(max(r_cop, 0.0), h), h)
    try:
        zp = adaptive_arc_height(pbar[0], pbar[1], dp, l, slope, "stance")
    except GeometryError:
        if not clamp:
            raise
        zp = l
    try:
        zq = adaptive_arc_height(rbar[0], rbar[1], dr, l, slope, "swing")
    except GeometryError:
        if not clamp:
            raise
        zq = l
    z = l - smooth_max(l - zp, l - zq)
    return z, zp, zq


def toe_clearance(t: float, ds_time: float, step_time: float, c: float, l: float) -> float:
    """Swing-toe lift: zero through double support, half-sine during swing."""
    if t <= ds_time or t >= step_time or c == 0.0:
        return 0.0
    return c * l * math.sin(math.pi * (t - ds_time) / (step_time - ds_time))


def knee_targets(p, r, pdot, alpha: float, beta: float, p_cop: float, r_cop: float):
    """Ground targets the thigh rays aim at; the center-of-pressure offset
    is added on the sagittal axis only."""
    u_p = np.array([p[0] + alpha * pdot[0] + p_cop, p[1] + alpha * pdot[1]])
    u_r = np.array([r[0] + beta * pdot[0] + r_cop, r[1] + beta * pdot[1]])
    return u_p, u_r


# ----------------------------------------------------------------- leg IK

class LegPose:
    """One resolved leg: joint positions (ankle is the heel point) and
    angles.  ``clamped`` marks a toe target that was out of reach, with
    the pose stretched toward it."""

    __slots__ = ("hip", "knee", "ankle", "toe", "hip_sag", "hip_lat",
                 "shank_sag", "shank_lat", "knee_flex", "ankle_flex",
                 "foot_pitch", "clamped")

    def __init__(self, hip, knee, ankle, toe, hip_sag, hip_lat, shank_sag,
                 shank_lat, knee_flex, ankle_flex, foot_pitch, clamped=False):
        self.hip = hip
        self.knee = knee
        self.ankle = ankle
        self.toe = toe
        self.hip_sag = hip_sag
        self.hip_lat = hip_lat
        self.shank_sag = shank_sag
        self.shank_lat = shank_lat
        self.knee_flex = knee_flex
        self.ankle_flex = ankle_flex
        self.foot_pitch = foot_pitch
        self.clamped = clamped


def _dir_angles(v):
    """(sagittal, lateral) angles of a mostly-downward segment direction."""
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    sag = math.atan2(v[0], -v[2])
    lat = math.asin(min(max(v[1] / n, -1.0), 1.0))
    return sag, lat


def dir_from_angles(sag: float, lat: float) -> np.ndarray:
    """Inverse of :func:`_dir_angles` (unit vector)."""
    cl = math.cos(lat)
    return np.array([math.sin(sag) * cl, math.sin(lat), -math.cos(sag) * cl])


def _foot_pitch_roots(u, shank: float, h: float):
    """Foot pitch angles psi with |knee - (toe + h(-cos psi, 0, sin psi))| = shank."""
    k = (shank * shank - (u[0] * u[0] + u[2] * u[2]) - h * h) / (2.0 * h)
    rho = math.hypot(u[0], u[2])
    if rho < abs(k):
        return []
    phi0 = math.atan2(-u[2], u[0])
    gam = math.acos(min(max(k / rho, -1.0), 1.0))
    roots = []
    for psi in (phi0 - gam, phi0 + gam):
        psi = math.atan2(math.sin(psi), math.cos(psi))
        roots.append(psi)
    return roots


def _two_link_knee(hip: np.ndarray, ankle: np.ndarray, thigh: float, shank: float) -> np.ndarray:
    """Closed-form knee position between fixed hip and ankle, bending the
    knee toward the character's forward axis."""
    d = ankle - hip
    dist = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    if dist > thigh + shank:
        if dist > thigh + shank + 1e-9:
            raise WorkspaceError(f"hip-ankle distance {dist:.4f} exceeds leg reach")
        dist = thigh + shank
    if dist < abs(thigh - shank) or dist < 1e-12:
        raise WorkspaceError("hip-ankle distance below the leg's inner workspace")
    dhat = d / dist
    a = (thigh * thigh - shank * shank + dist * dist) / (2.0 * dist)
    h2 = thigh * thigh - a * a
    h2 = max(h2, 0.0)
    fwd = np.array([1.0, 0.0, 0.0])
    perp = fwd - float(fwd @ dhat) * dhat
    n = float(np.linalg.norm(perp))
    if n < 1e-9:
        perp = np.array([0.0, 0.0, 1.0]) - float(dhat[2]) * dhat
        n = float(np.linalg.norm(perp))
    return hip + a * dhat + math.sqrt(h2) * perp / n


def _stretched_leg(hx, hy, hz, tx, ty, tz, thigh, shank, h, lo):
    """Fully stretched leg toward an unreachable toe (all lengths exact;
    the toe itself is not attained).  Used only under clamping."""
    dx, dy, dz = tx - hx, ty - hy, tz - hz
    dn = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dn < 1e-9:
        raise WorkspaceError("toe coincides with the hip")
    reach = thigh + shank
    ax = hx + reach * dx / dn
    ay = hy + reach * dy / dn
    az = hz + reach * dz / dn
    rx, rz = tx - ax, tz - az
    psi = math.atan2(-rz, rx) if (abs(rx) + abs(rz)) > 1e-12 else 0.0
    # keep the (detached) toe at or above the terrain plane
    psi_toe = math.asin(min(max(az, 0.0) / h, 1.0))
    psi = min(max(psi, max(lo, -1.2)), 1.2, psi_toe)
    kx = hx + thigh * dx / dn
    ky = hy + thigh * dy / dn
    kz = hz + thigh * dz / dn
    return (kx, ky, kz), (ax, ay, az), psi


def _foot_pitch_roots(ux, uz, shank, h):
    """Foot pitch angles psi with |knee - (toe + h(-cos psi, 0, sin psi))| = shank."""
    k = (shank * shank - (ux * ux + uz * uz) - h * h) / (2.0 * h)
    rho = math.hypot(ux, uz)
    if rho < abs(k):
        return ()
    phi0 = math.atan2(-uz, ux)
    gam = math.acos(min(max(k / rho, -1.0), 1.0))
    return (math.atan2(math.sin(phi0 - gam), math.cos(phi0 - gam)),
            math.atan2(math.sin(phi0 + gam), math.cos(phi0 + gam)))


def _two_link_knee(hx, hy, hz, ax, ay, az, thigh, shank):
    """Closed-form knee position between fixed hip and ankle, bending the
    knee toward the character's forward axis."""
    dx, dy, dz = ax - hx, ay - hy, az - hz
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist > thigh + shank:
        if dist > thigh + shank + 1e-9:
            raise WorkspaceError(f"hip-ankle distance {dist:.4f} exceeds leg reach")
        dist = thigh + shank
    if dist < abs(thigh - shank) or dist < 1e-12:
        raise WorkspaceError("hip-ankle distance below the leg's inner workspace")
    ux, uy, uz = dx / dist, dy / dist, dz / dist
    a = (thigh * thigh - shank * shank + dist * dist) / (2.0 * dist)
    h2 = max(thigh * thigh - a * a, 0.0)
    # component of the forward axis orthogonal to the hip-ankle line
    px, py, pz = 1.0 - ux * ux, -ux * uy, -ux * uz
    n = math.sqrt(px * px + py * py + pz * pz)
    if n < 1e-9:
        px, py, pz = -uz * ux, -uz * uy, 1.0 - uz * uz
        n = math.sqrt(px * px + py * py + pz * pz)
    hk = math.sqrt(h2) / n
    return (hx + a * ux + hk * px, hy + a * uy + hk * py, hz + a * uz + hk * pz)


def solve_leg(hip, toe, target, body: BodyModel, grounded: bool,
              clamp: bool = False) -> LegPose:
    """Resolve one leg: thigh aims at the ground target, then the
    shank/foot pair closes on the toe with the foot in the sagittal
    plane.  A grounded foot never tilts past flat (no digging heel); an
    airborne foot may dorsiflex as long as the heel stays above the
    terrain.  If no pitch closes the chain, the foot is laid flat and
    the hip angle recomputed from a two-link solve (foot-flat rule).
    With ``clamp`` an unreachable toe degrades to a stretched leg
    instead of raising, marked on the returned pose.
    """
    hx, hy, hz = float(hip[0]), float(hip[1]), float(hip[2])
    tx, ty, tz = float(toe[0]), float(toe[1]), float(toe[2])
    thigh, shank, h = body.thigh_length, body.shank_length, body.foot_length

    rx, ry, rz = float(target[0]) - hx, float(target[1]) - hy, -hz
    rn = math.sqrt(rx * rx + ry * ry + rz * rz)
    if rn < 1e-9 or rz >= 0.0:
        raise GeometryError("thigh target not below the hip")
    kx = hx + thigh * rx / rn
    ky = hy + thigh * ry / rn
    kz = hz + thigh * rz / rn

    s_eff = shank * shank - (ky - ty) * (ky - ty)
    roots = () if s_eff <= 0.0 else _foot_pitch_roots(kx - tx, kz - tz,
                                                      math.sqrt(s_eff), h)
    if grounded:
        lo = -1e-9
    else:
        lo = -math.asin(min(max(tz, 0.0) / h, 1.0)) - 1e-9
    # heel rise capped at a physiological pitch; past it the chain folds
    psi = None
    for cand in roots:
        if lo <= cand <= 1.2 and (psi is None or abs(cand) < abs(psi)):
            psi = cand
    clamped = False
    if psi is not None:
        if psi < 0.0 and psi >= -1e-9:
            psi = 0.0
        ankle = (tx - h * math.cos(psi), ty, tz + h * math.sin(psi))
        knee = (kx, ky, kz)
    else:  # no admissible pitch closes the chain
        # foot-flat rule: heel level with the toe, hip angle recomputed
        psi = 0.0
        ankle = (tx - h, ty, tz)
        dfx, dfy, dfz = hx - ankle[0], hy - ankle[1], hz - ankle[2]
        d_flat = math.sqrt(dfx * dfx + dfy * dfy + dfz * dfz)
        reach = thigh + shank
        if d_flat > reach:
            # tip-toe stretch: smallest heel rise that brings the straight
            # leg onto the ankle circle (continuous with the flat case)
            s_eff2 = reach * reach - (hy - ty) * (hy - ty)
            roots2 = () if s_eff2 <= 0.0 else _foot_pitch_roots(
                hx - tx, hz - tz, math.sqrt(s_eff2), h)
            stretch = [p for p in roots2 if lo <= p <= 1.2]
            if stretch:
                psi = min(stretch, key=abs)
                ankle = (tx - h * math.cos(psi), ty, tz + h * math.sin(psi))
            elif clamp:
                knee, ankle, psi = _stretched_leg(hx, hy, hz, tx, ty, tz,
                                                  thigh, shank, h, lo)
                tx = ankle[0] + h * math.cos(psi)
                tz = ankle[2] - h * math.sin(psi)
                clamped = True
            else:
                raise WorkspaceError(
                    f"hip-ankle distance {d_flat:.4f} exceeds leg reach")
        if not clamped:
            knee = _two_link_knee(hx, hy, hz, ankle[0], ankle[1], ankle[2],
                                  thigh, shank)

    tvx, tvy, tvz = knee[0] - hx, knee[1] - hy, knee[2] - hz
    svx, svy, svz = ankle[0] - knee[0], ankle[1] - knee[1], ankle[2] - knee[2]
    fvx, fvz = tx - ankle[0], tz - ankle[2]
    tn = math.sqrt(tvx * tvx + tvy * tvy + tvz * tvz)
    hip_sag = math.atan2(tvx, -tvz)
    hip_lat = math.asin(min(max(tvy / tn, -1.0), 1.0))
    sn = math.sqrt(svx * svx + svy * svy + svz * svz)
    shank_sag = math.atan2(svx, -svz)
    shank_lat = math.asin(min(max(svy / sn, -1.0), 1.0))
    fn = math.sqrt(fvx * fvx + fvz * fvz)
    cosk = (tvx * svx + tvy * svy + tvz * svz) / (thigh * sn)
    knee_flex = math.acos(min(max(cosk, -1.0), 1.0))
    cosa = (svx * fvx + svz * fvz) / (sn * fn)
    ankle_flex = math.acos(min(max(cosa, -1.0), 1.0)) - 0.5 * math.pi
    return LegPose(np.array((hx, hy, hz)), np.array(knee), np.array(ankle),
                   np.array((tx, ty, tz)), hip_sag, hip_lat, shank_sag,
                   shank_lat, knee_flex, ankle_flex, psi, clamped)


def leg_forward_kinematics(hip: np.ndarray, pose: LegPose, body: BodyModel) -> np.ndarray:
    """Toe position from the stored joint angles (round-trip oracle hook)."""
    knee = hip + body.thigh_length * dir_from_angles(pose.hip_sag, pose.hip_lat)
    ankle = knee + body.shank_length * dir_from_angles(pose.shank_sag, pose.shank_lat)
    psi = pose.foot_pitch
    return ankle + np.array([body.foot_length * math.cos(psi), 0.0,
                             -body.foot_length * math.sin(psi)])


# -------------------------------------------------------------- conversion

class Pose:
    """Converted posture in the slope-attached frame (z = 0 is the terrain)."""

    __slots__ = ("pelvis", "stance", "swing", "t", "support", "z_candidates")

    def __init__(self, pelvis, stance, swing, t, support, z_candidates):
        self.pelvis = pelvis
        self.stance = stance
        self.swing = swing
        self.t = t
        self.support = support
        self.z_candidates = z_candidates

    @property
    def left(self) -> LegPose:
        return self.swing if self.support == 1 else self.stance

    @property
    def right(self) -> LegPose:
        return self.stance if self.support == 1 else self.swing


def convert(q: np.ndarray, t: float, config: GaitConfig, body: BodyModel,
            method: str = "adaptive", clamp: bool = False) -> Pose:
    """Full state-to-posture conversion at phase time t.

    Scalar inline of relative_vectors / cop_offsets / knee_targets: this
    runs once or twice per display frame.
    """
    d = config.support
    w = body.pelvis_width
    l = body.leg_length
    h = body.foot_length
    shapes = ShapeSet.for_config(config)

    off = 0.5 * w * d
    q0, q1, q2, q3, q4, q5 = (float(q[0]), float(q[1]), float(q[2]),
                              float(q[3]), float(q[4]), float(q[5]))
    px, py = q4 - q2, q5 - q3 + off          # stance foot relative to its hip
    rx, ry = q0 - q2, q1 - q3 - off          # swing foot relative to its hip
    pdx, pdy = float(q[10]) - float(q[8]), float(q[11]) - float(q[9])
    gap = (rx - px) / l
    p_cop = 0.5 * h * (1.0 + gap)
    r_cop = 0.5 * h * (1.0 - gap)
    a = shapes.alpha(t)
    b = shapes.beta(t)
    pbx, pby = px + a * pdx, py + a * pdy
    rbx, rby = rx + a * pdx, ry + a * pdy

    zp = zq = None
    if method == "fixed":
        try:
            z = pelvis_height_fixed((pbx, pby), (rbx, rby), p_cop, r_cop, l,
                                    config.slope, t, shapes)
        except GeometryError:
            method = "adaptive"
    if method == "adaptive":
        if config.slope == 0.0 and not clamp:
            # inline of pelvis_height_adaptive for the flat frame-rate path
            dp = 0.5 * h * cop_remap(2.0 * min(max(p_cop, 0.0), h) / h - 1.0)
            dr = 0.5 * h * cop_remap(2.0 * min(max(r_cop, 0.0), h) / h - 1.0)
            a3p, a3r = l + dp, l + dr
            up = (-pbx - 2.0 * dp) / (l + 2.0 * dp)
            ur = (-rbx - 2.0 * dr) / (l + 2.0 * dr)
            radp = 1.0 - up * up - (pby / l) * (pby / l)
            radr = 1.0 - ur * ur - (rby / l) * (rby / l)
            if radp <= 0.0 or radr <= 0.0:
                raise GeometryError("support ellipse misses the vertical line")
            zp = a3p * math.sqrt(radp)
            zq = a3r * math.sqrt(radr)
            z = l - smooth_max(l - zp, l - zq)
        else:
            z, zp, zq = pelvis_height_adaptive((pbx, pby), (rbx, rby), p_cop,
                                               r_cop, l, config.slope, h,
                                               clamp=clamp)
            if clamp:
                # the blended minimum can dive when both arcs are deep; keep
                # a crouch floor so degraded frames stay above the terrain
                z = max(z, 0.45 * l)

    lift = toe_clearance(t, config.ds_time, config.step_time, config.clearance, l)
    hip_st = (q2, q3 - off, z)
    hip_sw = (q2, q3 + off, z)
    stance = solve_leg(hip_st, (q4 + h, q5, 0.0),
                       (q2 + px + a * pdx + p_cop, q3 - off + py + a * pdy),
                       body, grounded=True, clamp=clamp)
    swing = solve_leg(hip_sw, (q0 + h, q1, lift),
                      (q2 + rx + b * pdx + r_cop, q3 + off + ry + b * pdy),
                      body, grounded=t <= config.ds_time, clamp=clamp)
    return Pose(np.array((q2, q3, z)), stance, swing, t, d, (zp, zq))
