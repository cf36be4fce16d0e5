"""Chamber and face volumes: Monte Carlo estimators plus closed forms.

Monte Carlo sampling is organized in fixed blocks of a counter-based
generator, so a result depends only on (seed, stream, sample count) and
never on how blocks are scheduled.  Closed forms cover the n=2 chamber
areas (assembled from lens areas and the three-arc region), the lens
volume in any dimension, cap integrals, the Euclidean simplex volume,
and the cone-cell volumes of the simplex decomposition.

Boundedness: a chamber with at least one minus sign lives inside the
corresponding ball, so rejection sampling uses the intersection of the
minus-ball bounding boxes.  The all-plus chamber is unbounded as a sign
region; its bounded component (the gap enclosed by the spheres) lies
inside the simplex of the centers, so all-plus calls must opt in with
``bounding="simplex"`` which intersects the predicate with simplex
membership.  Face estimators restrict to the same bounded component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .arrangement import Chamber, check_hypotheses
from .cayley_menger import CMTable, ConfigMatrix
from .errors import (
    DegenerateConfigError,
    EmptyIntersectionError,
    HypothesisError,
    IndeterminateSignError,
    SphexError,
    TangencyError,
)
from .intersect import angles_pair, intersection_sphere, sphere_circle, triangle_angles

#: samples per RNG block; results are invariant under block scheduling
BLOCK = 65536
_ADVANCE = 1 << 24


@dataclass(frozen=True)
class Rng:
    """Deterministic counter-based random source.

    Each (seed, stream) pair is an independent Philox stream; block i of
    a computation always draws from counter offset i * 2^24, so any
    partition of blocks over workers yields bit-identical results.
    """

    seed: int
    stream: int = 0

    def substream(self, stream: int) -> "Rng":
        return Rng(self.seed, stream)

    def generator(self, block: int) -> np.random.Generator:
        key = np.array([self.seed % 2 ** 64, self.stream % 2 ** 64],
                       dtype=np.uint64)
        bit = np.random.Philox(key=key)
        bit.advance(block * _ADVANCE)
        return np.random.Generator(bit)


@dataclass(frozen=True)
class VolumeEstimate:
    """A volume value with its uncertainty bookkeeping.

    `std_error` is the binomial standard error propagated through the
    bounding-measure factor; closed forms carry std_error 0 and
    exact=True.
    """

    value: float
    std_error: float
    samples: int
    exact: bool = False

    def __post_init__(self):
        if self.exact and self.std_error != 0.0:
            raise ValueError("exact results must have zero std_error")


def _mc_fraction(samples: int, rng: Rng, hit_fn) -> float:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    hits = 0
    done = 0
    block = 0
    while done < samples:
        cnt = min(BLOCK, samples - done)
        hits += int(hit_fn(rng.generator(block), cnt))
        done += cnt
        block += 1
    return hits / samples


def _signs_mask(a, c: Chamber, pts, tol: float = 0.0):
    mask = np.ones(len(pts), dtype=bool)
    for j in range(1, a.n + 2):
        d = pts - a.center(j)
        fj = np.einsum("ij,ij->i", d, d) - a.radius(j) ** 2
        mask &= c.sign(j) * fj >= -tol
    return mask


def _barycentric(a):
    T = (a.centers[:-1] - a.centers[-1]).T
    return np.linalg.inv(T), a.centers[-1]


def _simplex_mask(bary, pts, tol: float = 0.0):
    Minv, base = bary
    lam = (pts - base) @ Minv.T
    return (lam >= -tol).all(axis=1) & (lam.sum(axis=1) <= 1.0 + tol)


# ---------------------------------------------------------------------------
# Monte Carlo chamber and face volumes
# ---------------------------------------------------------------------------


def chamber_volume_mc(a, c: Chamber, samples: int, rng: Rng,
                      bounding=None) -> VolumeEstimate:
    """Rejection-sampled volume of a chamber.

    For chambers with a minus sign the sampling box is the intersection
    of the minus-ball boxes.  The all-plus sign region is unbounded; the
    caller must pass ``bounding="simplex"`` to select the bounded
    component inside the center simplex, or a sphere index to sample
    that ball's box when the region is known to lie inside it.
    """
    if len(c.signs) != a.n + 1:
        raise ValueError("chamber length must be n+1")
    minus = c.minus_set()
    use_simplex = False
    if minus:
        lo = np.max([a.center(j) - a.radius(j) for j in minus], axis=0)
        hi = np.min([a.center(j) + a.radius(j) for j in minus], axis=0)
        if np.any(hi <= lo):
            return VolumeEstimate(0.0, 0.0, samples, exact=False)
    elif bounding == "simplex":
        lo = a.centers.min(axis=0)
        hi = a.centers.max(axis=0)
        use_simplex = True
    elif isinstance(bounding, int):
        lo = a.center(bounding) - a.radius(bounding)
        hi = a.center(bounding) + a.radius(bounding)
    else:
        raise ValueError(
            "all-plus chamber is unbounded; pass bounding='simplex' for the "
            "component inside the center simplex, or a bounding sphere index")
    box = float(np.prod(hi - lo))
    bary = _barycentric(a) if use_simplex else None
    width = hi - lo

    def hit_fn(gen, cnt):
        pts = lo + width * gen.random((cnt, a.n))
        mask = _signs_mask(a, c, pts)
        if use_simplex:
            mask &= _simplex_mask(bary, pts)
        return mask.sum()

    f = _mc_fraction(samples, rng, hit_fn)
    return VolumeEstimate(box * f, box * math.sqrt(f * (1.0 - f) / samples),
                          samples, exact=False)


def unit_sphere_area(m: int) -> float:
    """Surface measure of the unit m-sphere in R^{m+1}; m = 0 gives 2."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def face_volume_mc(a, c: Chamber, J, samples: int, rng: Rng,
                   bounding=None) -> VolumeEstimate:
    """Hausdorff measure of S_J intersected with the chamber boundary.

    Samples the (n-p)-sphere S_J uniformly and scores the sign
    constraints of the spheres outside J.  For |J| = n the result is the
    exact count of the two points lying on the boundary.  All-plus
    chambers need ``bounding="simplex"`` exactly as in
    `chamber_volume_mc` (the far side of each sphere satisfies the sign
    constraints without bounding the gap component).
    """
    J = tuple(sorted(J))
    p = len(J)
    n = a.n
    sub = intersection_sphere(a, J)
    others = [k for k in range(1, n + 2) if k not in J]
    all_plus = not c.minus_set()
    if all_plus and bounding != "simplex":
        raise ValueError(
            "all-plus chamber faces need bounding='simplex' to select the "
            "bounded component")
    bary = _barycentric(a) if all_plus else None
    if p == n:
        tol = 1e-9 * max(1.0, float(np.max(a.radii)) ** 2)
        count = 0
        for sgn in (1.0, -1.0):
            x = sub.center + sgn * sub.radius * sub.basis[0]
            ok = all(c.sign(k) * _f_val(a, k, x) >= -tol for k in others)
            if ok and all_plus:
                ok = bool(_simplex_mask(bary, x[None, :], tol=1e-9)[0])
            count += bool(ok)
        return VolumeEstimate(float(count), 0.0, 2, exact=True)
    m = n - p
    area = unit_sphere_area(m) * sub.radius ** m

    def hit_fn(gen, cnt):
        g = gen.normal(size=(cnt, m + 1))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts = sub.center + sub.radius * (g @ sub.basis)
        mask = np.ones(cnt, dtype=bool)
        for k in others:
            d = pts - a.center(k)
            fk = np.einsum("ij,ij->i", d, d) - a.radius(k) ** 2
            mask &= c.sign(k) * fk >= 0.0
        if all_plus:
            mask &= _simplex_mask(bary, pts)
        return mask.sum()

    f = _mc_fraction(samples, rng, hit_fn)
    return VolumeEstimate(area * f, area * math.sqrt(f * (1.0 - f) / samples),
                          samples, exact=False)


def _f_val(a, j, x):
    d = np.asarray(x, float) - a.center(j)
    return float(d @ d - a.radius(j) ** 2)


# ---------------------------------------------------------------------------
# caps and lenses
# ---------------------------------------------------------------------------


def sin_power_integral(m: int, theta: float) -> float:
    """int_0^theta sin^m t dt by the stable reduction recurrence."""
    if m < 0:
        raise ValueError("power must be >= 0")
    if m == 0:
        return theta
    if m == 1:
        return 1.0 - math.cos(theta)
    return (-math.cos(theta) * math.sin(theta) ** (m - 1)
            + (m - 1) * sin_power_integral(m - 2, theta)) / m


def cap_integral(n: int, t0: float, method: str = "expansion") -> float:
    """int_{t0}^1 (1 - tau^2)^((n-1)/2) dtau.

    The expansion path substitutes tau = cos t and uses the finite
    sine-power recurrence; the quadrature path integrates adaptively.
    Both agree to 1e-12 and are exposed for cross-checking.
    """
    if not -1.0 <= t0 <= 1.0:
        raise ValueError("t0 must lie in [-1, 1]")
    if method == "expansion":
        return sin_power_integral(n, math.acos(t0))
    if method == "quadrature":
        val, _ = quad(lambda t: (1.0 - t * t) ** ((n - 1) / 2.0), t0, 1.0,
                      epsabs=1e-13, epsrel=1e-13)
        return float(val)
    raise ValueError(f"unknown method {method!r}")


def _lens_half_angles(r1, r2, rho):
    c1 = (rho * rho + r1 * r1 - r2 * r2) / (2.0 * rho * r1)
    c2 = (rho * rho + r2 * r2 - r1 * r1) / (2.0 * rho * r2)
    return math.acos(max(-1.0, min(1.0, c1))), math.acos(max(-1.0, min(1.0, c2)))


def lens_volume_closed(n: int, r1: float, r2: float, rho: float,
                       method: str = "general") -> float:
    """Volume of the intersection of two n-balls with center distance rho.

    The general path sums two hyperspherical caps; "2d" and "3d" are the
    printed low-dimensional specializations (circular segments, and the
    cubic cap polynomial).  All paths agree to 1e-12.
    """
    if rho >= r1 + r2:
        raise EmptyIntersectionError("balls do not overlap")
    if rho <= abs(r1 - r2):
        raise EmptyIntersectionError("one ball is nested inside the other")
    h1, h2 = _lens_half_angles(r1, r2, rho)
    if method == "general":
        out = 0.0
        for r, h in ((r1, h1), (r2, h2)):
            out += unit_sphere_area(n - 2) / (n - 1) * r ** n \
                * sin_power_integral(n, h)
        return out
    if method == "2d":
        if n != 2:
            raise ValueError("2d path needs n = 2")
        return (0.5 * r1 * r1 * (2 * h1 - math.sin(2 * h1))
                + 0.5 * r2 * r2 * (2 * h2 - math.sin(2 * h2)))
    if method == "3d":
        if n != 3:
            raise ValueError("3d path needs n = 3")
        out = 0.0
        for r, h in ((r1, h1), (r2, h2)):
            ch = math.cos(h)
            out += math.pi * r ** 3 * (2.0 / 3.0 - ch + ch ** 3 / 3.0)
        return out
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# closed forms for n = 2 chambers
# ---------------------------------------------------------------------------


def _pair_data(a):
    """Half-angles psih[(j,k)] and triangle angles phi for n = 2."""
    psih = {}
    for j, k in ((1, 2), (1, 3), (2, 3)):
        pjk, pkj = angles_pair(a, j, k)
        psih[(j, k)] = 0.5 * pjk
        psih[(k, j)] = 0.5 * pkj
    phi = dict(zip((1, 2, 3), triangle_angles(a)))
    return psih, phi


def chamber_arc_angles(a, c: Chamber) -> dict:
    """Opening angle of the boundary arc of each circle, n = 2.

    For sign patterns with a minus entry this is pure inclusion and
    exclusion of the in-disk arcs; for the all-plus chamber it is the
    gap arc phi_j - psi_jk/2 - psi_jl/2 of the bounded component.
    Assumes the hypotheses appropriate to the chamber hold, so that the
    region has the standard arc structure.
    """
    if a.n != 2:
        raise ValueError("arc angles are defined for n = 2")
    psih, phi = _pair_data(a)
    out = {}
    for j in (1, 2, 3):
        k, l = (m for m in (1, 2, 3) if m != j)
        tri = psih[(j, k)] + psih[(j, l)] - phi[j]
        if not c.minus_set():
            out[j] = phi[j] - psih[(j, k)] - psih[(j, l)]
        else:
            sk, sl = c.sign(k), c.sign(l)
            if sk < 0 and sl < 0:
                out[j] = tri
            elif sk < 0:
                out[j] = 2.0 * psih[(j, k)] - tri
            elif sl < 0:
                out[j] = 2.0 * psih[(j, l)] - tri
            else:
                out[j] = 2.0 * math.pi - 2.0 * psih[(j, k)] \
                    - 2.0 * psih[(j, l)] + tri
    return out


def pseudo_triangle_area_closed(a, n: int = 2) -> float:
    """Area of the all-minus chamber for n = 2, assembled exactly.

    Triangle area minus the three circular sectors at the corners plus
    the half-lens corrections over the edges.
    """
    if n != 2 or a.n != 2:
        raise ValueError("closed area path is for n = 2")
    rep = check_hypotheses(a, h2="skip")
    if rep.h1 is None:
        raise IndeterminateSignError("H1 indeterminate")
    if not rep.h1:
        raise HypothesisError("H1 fails; the three-arc region does not exist")
    psih, phi = _pair_data(a)
    table = CMTable.from_arrangement(a)
    total = 0.25 * math.sqrt(-table.chain(("0", 1, 2, 3), ("0", 1, 2, 3)))
    for j in (1, 2, 3):
        total -= 0.5 * a.radius(j) ** 2 * phi[j]
    for j, k in ((1, 2), (1, 3), (2, 3)):
        pj, pk = 2.0 * psih[(j, k)], 2.0 * psih[(k, j)]
        total += 0.25 * a.radius(j) ** 2 * (pj - math.sin(pj))
        total += 0.25 * a.radius(k) ** 2 * (pk - math.sin(pk))
    return total


def simplex_volume(a) -> float:
    """Euclidean volume of the simplex spanned by the n+1 centers."""
    E = a.centers[:-1] - a.centers[-1]
    scale = max(1.0, float(np.max(np.abs(E))) ** a.n)
    det = float(np.linalg.det(E))
    if abs(det) < 1e-12 * scale:
        raise DegenerateConfigError("centers are affinely dependent")
    return abs(det) / math.factorial(a.n)


def chamber_area_closed_n2(a, c: Chamber) -> float:
    """Closed-form area of any n = 2 chamber.

    All-minus: the three-arc region.  All-plus (needs H1'): simplex
    minus the decomposition cells.  One or two minus signs (needs H1):
    inclusion-exclusion of disk, lens and three-arc areas.
    """
    if a.n != 2:
        raise ValueError("closed area path is for n = 2")
    minus = c.minus_set()
    if not minus:
        rep = check_hypotheses(a, h2="skip")
        if rep.h1_prime is None:
            raise IndeterminateSignError("H1' indeterminate")
        if not rep.h1_prime:
            raise HypothesisError("H1' fails; bounded gap chamber undefined")
        table = CMTable.from_arrangement(a)
        arcs = chamber_arc_angles(a, c)
        total = simplex_volume(a)
        for j in (1, 2, 3):
            total -= 0.5 * a.radius(j) ** 2 * arcs[j]
        for j, k in ((1, 2), (1, 3), (2, 3)):
            cnt = face_volume_mc(a, c, (j, k), 1, Rng(0), bounding="simplex")
            total -= 0.25 * math.sqrt(
                -table.chain(("0", "*", j, k), ("0", "*", j, k))) * cnt.value
        return total
    if len(minus) == 3:
        return pseudo_triangle_area_closed(a)
    tri = pseudo_triangle_area_closed(a)  # also certifies H1

    def lens(j, k):
        return lens_volume_closed(2, a.radius(j), a.radius(k), a.distance(j, k))

    if len(minus) == 2:
        j, k = minus
        return lens(j, k) - tri
    (j,) = minus
    k, l = (m for m in (1, 2, 3) if m != j)
    return math.pi * a.radius(j) ** 2 - lens(j, k) - lens(j, l) + tri


def chamber_volume(a, c: Chamber, samples: int = 1_000_000,
                   rng: "Rng | None" = None) -> VolumeEstimate:
    """Chamber volume, closed form when available (n = 2), else MC."""
    if a.n == 2:
        try:
            return VolumeEstimate(chamber_area_closed_n2(a, c), 0.0, 0,
                                  exact=True)
        except SphexError:
            pass
    rng = rng if rng is not None else Rng(0)
    bounding = None if c.minus_set() else "simplex"
    return chamber_volume_mc(a, c, samples, rng, bounding=bounding)


def face_volume(a, c: Chamber, J, samples: int = 1_000_000,
                rng: "Rng | None" = None) -> VolumeEstimate:
    """Face measure v_J, closed form when available, else MC."""
    J = tuple(sorted(J))
    rng = rng if rng is not None else Rng(0)
    bounding = None if c.minus_set() else "simplex"
    if len(J) == a.n:
        return face_volume_mc(a, c, J, 1, rng, bounding=bounding)
    if a.n == 2 and len(J) == 1:
        try:
            ang = chamber_arc_angles(a, c)[J[0]]
            return VolumeEstimate(a.radius(J[0]) * ang, 0.0, 0, exact=True)
        except SphexError:
            pass
    return face_volume_mc(a, c, J, samples, rng, bounding=bounding)


def decomposition_cell_coefficient(a, J) -> float:
    """The constant (n-p)!/n! * sqrt((-1)^(p+1) B(0*J)/2^p) of a cone cell.

    Validated against direct MC integration of the explicit cone region
    (union of segments from the centers O_J to points of the face); the
    1/n! normalization is what makes the full decomposition close up to
    the simplex volume.
    """
    J = tuple(sorted(J))
    p = len(J)
    if not 1 <= p <= a.n:
        raise ValueError("cell index set must satisfy 1 <= |J| <= n")
    table = CMTable.from_arrangement(a)
    starred = table.chain(("0", "*") + J, ("0", "*") + J)
    arg = (-1) ** (p + 1) * starred
    if arg <= 0:
        raise HypothesisError(f"B(0*J) has the wrong sign for J={J}")
    return (math.factorial(a.n - p) / math.factorial(a.n)
            * math.sqrt(arg / 2 ** p))


def decomposition_cell_volume(a, J, samples: int = 1_000_000,
                              rng: "Rng | None" = None) -> float:
    """Volume of the cone cell over the face S_J of the gap chamber.

    The cell is the union of segments from the centers O_J to the face
    S_J of the bounded all-plus chamber; its volume is the cell
    coefficient times v_J, with v_J exact where closed forms exist.
    """
    const = decomposition_cell_coefficient(a, J)
    vJ = face_volume(a, Chamber.all_plus(a.n), tuple(sorted(J)), samples, rng)
    return const * vJ.value


# ---------------------------------------------------------------------------
# the restricted model: regions on the unit 2-sphere (n = 3)
# ---------------------------------------------------------------------------


def sphere_region_area_mc(m: ConfigMatrix, samples: int,
                          rng: Rng) -> VolumeEstimate:
    """MC area of the region {x on S^2 : u_j . x + u_j0 <= 0 for all j}."""
    if m.n != 3:
        raise ValueError("spherical region area is implemented for n = 3")
    U = m.normals
    u0 = m.offsets

    def hit_fn(gen, cnt):
        g = gen.normal(size=(cnt, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        vals = g @ U.T + u0
        return np.all(vals <= 0.0, axis=1).sum()

    f = _mc_fraction(samples, rng, hit_fn)
    area = 4.0 * math.pi
    return VolumeEstimate(area * f, area * math.sqrt(f * (1.0 - f) / samples),
                          samples, exact=False)


def _wrap_intervals(lo, hi):
    """Normalize an arc [lo, hi] on the circle into [0, 2pi) pieces."""
    two_pi = 2.0 * math.pi
    width = hi - lo
    lo = lo % two_pi
    hi = lo + width
    if hi <= two_pi:
        return [(lo, hi)]
    return [(lo, two_pi), (0.0, hi - two_pi)]


def _intersect_intervals(xs, ys):
    out = []
    for a0, a1 in xs:
        for b0, b1 in ys:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi > lo:
                out.append((lo, hi))
    return out


def circle_feasible_arcs(m: ConfigMatrix, j: int):
    """Feasible parameter arcs of circle j under the other constraints.

    Returns (list of (t0, t1) intervals, circle radius); the boundary
    length of the region on circle j is radius times the total measure.
    Handles non-binding constraints (full circle) and empty cases.
    """
    if m.n != 3:
        raise ValueError("circle arcs are implemented for n = 3")
    center, radius, frame = sphere_circle(m, j)
    e1, e2 = frame
    intervals = [(0.0, 2.0 * math.pi)]
    for k in range(1, m.n + 1):
        if k == j:
            continue
        u = m.normals[k - 1]
        cA = radius * float(u @ e1)
        cB = radius * float(u @ e2)
        cC = float(u @ center) + m.offset(k)
        amp = math.hypot(cA, cB)
        if amp < 1e-14:
            if cC > 0:
                return [], radius
            continue
        q = -cC / amp
        if q >= 1.0:
            continue
        if q <= -1.0:
            return [], radius
        phase = math.atan2(cB, cA)
        alpha = math.acos(q)
        pieces = _wrap_intervals(phase + alpha, phase + 2.0 * math.pi - alpha)
        intervals = _intersect_intervals(intervals, pieces)
    return intervals, radius


def sphere_arc_lengths(m: ConfigMatrix) -> dict:
    """Closed-form boundary arc length of each circle on the unit sphere."""
    out = {}
    for j in range(1, m.n + 1):
        intervals, radius = circle_feasible_arcs(m, j)
        out[j] = radius * sum(hi - lo for lo, hi in intervals)
    return out


def sphere_vertex_counts(m: ConfigMatrix, tol: float = 1e-9) -> dict:
    """Number of region vertices on each circle pair (0, 1 or 2)."""
    if m.n != 3:
        raise ValueError("vertex counts are implemented for n = 3")
    out = {}
    for j in range(1, 4):
        for k in range(j + 1, 4):
            (l,) = (i for i in range(1, 4) if i not in (j, k))
            uj, uk, ul = m.normals[j - 1], m.normals[k - 1], m.normals[l - 1]
            A = np.array([uj, uk])
            b = -np.array([m.offset(j), m.offset(k)])
            x0, *_ = np.linalg.lstsq(A, b, rcond=None)
            d = np.cross(uj, uk)
            nd = np.linalg.norm(d)
            if nd < 1e-12:
                out[(j, k)] = 0
                continue
            d /= nd
            t_sq = 1.0 - float(x0 @ x0)
            if t_sq <= 0:
                out[(j, k)] = 0
                continue
            t = math.sqrt(t_sq)
            count = 0
            for sgn in (1.0, -1.0):
                x = x0 + sgn * t * d
                if float(x @ ul) + m.offset(l) <= tol:
                    count += 1
            out[(j, k)] = count
    return out
