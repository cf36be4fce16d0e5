"""Numerical verification of the contiguity and pointwise identities.

Each check returns an IdentityReport whose terms always sum (fsum) to
the reported rhs, so a failing identity can be diagnosed per summand.
Tolerances are fixed absolute bounds when every ingredient is closed
form, and 3x the propagated standard error when Monte Carlo estimates
enter the sum.

The volume identity for a chamber with sign vector sigma reads

    n * v(chamber) = sum_J c_J * v_J + c_N * sqrt((-1)^(n+1) B(0N)/2^n)

with c_J = -((n-p)!/(n-1)!) * s_J * sqrt((-1)^(p+1) B(0*J)/2^p).  For
the all-minus chamber s_J = (-1)^p and c_N carries (-1)^n/(n-1)!; for
chambers mixing signs each face factor gains (-1)^{|J cap plus|} and
the determinant term gains (-1)^{#plus}.  The all-plus chamber is the
one exception: there s_J = +1 and the determinant term is
+1/(n-1)!, which differs from the mixed-sign extrapolation in the
final term only.  All sign patterns are validated against closed-form
areas at machine precision for n = 2 and against MC for n = 3.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .arrangement import Chamber, evaluate_f
from .cayley_menger import CMTable, ConfigMatrix
from .errors import DegenerateConfigError, HypothesisError
from .intersect import intersection_sphere, sphere_angle, vertices
from .volume import (
    Rng,
    chamber_volume,
    decomposition_cell_coefficient,
    face_volume,
    simplex_volume,
    sphere_arc_lengths,
    sphere_region_area_mc,
    sphere_vertex_counts,
)


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of one identity check with a per-term breakdown."""

    name: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    passed: bool
    terms: tuple  # of (label, value) pairs; fsum of values == rhs

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "terms": [{"label": l, "value": v} for l, v in self.terms],
        }


def _report(name, lhs, terms, tolerance, passed=None) -> IdentityReport:
    rhs = math.fsum(v for _, v in terms)
    residual = abs(lhs - rhs)
    if passed is None:
        passed = residual <= tolerance
    return IdentityReport(name, float(lhs), rhs, residual, float(tolerance),
                          bool(passed), tuple(terms))


def _sqrt_starred(table: CMTable, J) -> float:
    p = len(J)
    starred = table.chain(("0", "*") + tuple(J), ("0", "*") + tuple(J))
    arg = (-1) ** (p + 1) * starred
    if arg <= 0:
        raise HypothesisError(
            f"B(0*J) has the wrong sign for J={tuple(J)}; face sphere missing")
    return math.sqrt(arg / 2 ** p)


def _sqrt_plain_full(table: CMTable, n: int) -> float:
    N = tuple(range(1, n + 2))
    plain = table.chain(("0",) + N, ("0",) + N)
    arg = (-1) ** (n + 1) * plain
    if arg <= 0:
        raise HypothesisError("B(0N) has the wrong sign; centers degenerate")
    return math.sqrt(arg / 2 ** n)


def volume_identity_coefficients(table: CMTable, n: int, c: Chamber):
    """Face coefficients and determinant term of the volume identity.

    Returns (dict J -> coefficient on v_J, value of the determinant
    term), with the sign pattern selected by the chamber as described
    in the module docstring.
    """
    plus = set(c.plus_set())
    all_plus = len(plus) == n + 1
    coefs = {}
    for p in range(1, n + 1):
        base = -math.factorial(n - p) / math.factorial(n - 1)
        for J in itertools.combinations(range(1, n + 2), p):
            w = base * _sqrt_starred(table, J)
            if not all_plus:
                w *= (-1) ** p * (-1) ** len(plus & set(J))
            coefs[J] = w
    final = _sqrt_plain_full(table, n) / math.factorial(n - 1)
    if not all_plus:
        final *= (-1) ** n * (-1) ** len(plus)
    return coefs, final


def _label(J) -> str:
    return "S_" + "".join(str(j) for j in J)


def _check_volume_identity(name, a, c, samples, rng, method="auto"):
    table = CMTable.from_arrangement(a)
    n = a.n
    coefs, final = volume_identity_coefficients(table, n, c)
    if method == "mc":
        from .volume import chamber_volume_mc, face_volume_mc
        bounding = None if c.minus_set() else "simplex"
        vol = chamber_volume_mc(a, c, samples, rng.substream(0),
                                bounding=bounding)
    else:
        vol = chamber_volume(a, c, samples, rng.substream(0))
    lhs = n * vol.value
    var = (n * vol.std_error) ** 2
    all_exact = vol.exact
    terms = []
    stream = 1
    for J in sorted(coefs, key=lambda t: (len(t), t)):
        if method == "mc" and len(J) < n:
            bounding = None if c.minus_set() else "simplex"
            v = face_volume_mc(a, c, J, samples, rng.substream(stream),
                               bounding=bounding)
        else:
            v = face_volume(a, c, J, samples, rng.substream(stream))
        stream += 1
        terms.append((_label(J), coefs[J] * v.value))
        var += (coefs[J] * v.std_error) ** 2
        all_exact = all_exact and v.exact
    terms.append(("simplex", final))
    tolerance = 1e-9 if all_exact else 3.0 * math.sqrt(var)
    return _report(name, lhs, terms, tolerance)


def check_theorem_I_i(a, samples: int = 1_000_000, rng: "Rng | None" = None,
                      chamber: "Chamber | None" = None,
                      method: str = "auto") -> IdentityReport:
    """n * v(chamber) against the face-volume expansion, default all-minus.

    Closed-form volumes and arcs are used for n = 2 (tolerance 1e-9);
    otherwise every term is MC and the tolerance is 3x the propagated
    standard error.  `chamber` may be any sign vector with at least one
    minus entry; the all-plus case has its own sign pattern and check.
    """
    c = chamber if chamber is not None else Chamber.all_minus(a.n)
    if not c.minus_set():
        raise ValueError("all-plus chamber: use check_theorem_II_i")
    rng = rng if rng is not None else Rng(0)
    return _check_volume_identity("theorem_I_i", a, c, samples, rng, method)


def check_theorem_II_i(a, samples: int = 1_000_000, rng: "Rng | None" = None,
                       method: str = "auto") -> IdentityReport:
    """The all-plus (gap chamber) volume identity."""
    rng = rng if rng is not None else Rng(0)
    return _check_volume_identity("theorem_II_i", a, Chamber.all_plus(a.n),
                                  samples, rng, method)


def check_decomposition(a, samples: int = 1_000_000,
                        rng: "Rng | None" = None,
                        method: str = "auto") -> IdentityReport:
    """Closure of the cone-cell decomposition of the center simplex.

    lhs is the simplex volume; the terms are the cone cells over every
    face of the gap chamber plus the gap chamber itself.
    """
    rng = rng if rng is not None else Rng(0)
    lhs = simplex_volume(a)
    c = Chamber.all_plus(a.n)
    terms = []
    var = 0.0
    all_exact = True
    stream = 0
    for p in range(1, a.n + 1):
        for J in itertools.combinations(range(1, a.n + 2), p):
            const = decomposition_cell_coefficient(a, J)
            if method == "mc" and len(J) < a.n:
                from .volume import face_volume_mc
                v = face_volume_mc(a, c, J, samples, rng.substream(stream),
                                   bounding="simplex")
            else:
                v = face_volume(a, c, J, samples, rng.substream(stream))
            stream += 1
            terms.append(("cell_" + _label(J), const * v.value))
            var += (const * v.std_error) ** 2
            all_exact = all_exact and v.exact
    if method == "mc":
        from .volume import chamber_volume_mc
        gap = chamber_volume_mc(a, c, samples, rng.substream(stream),
                                bounding="simplex")
    else:
        gap = chamber_volume(a, c, samples, rng.substream(stream))
    terms.append(("gap", gap.value))
    var += gap.std_error ** 2
    all_exact = all_exact and gap.exact
    tolerance = 1e-9 if all_exact else 3.0 * math.sqrt(var)
    return _report("decomposition", lhs, terms, tolerance)


def check_lemma5_pointwise(a, x) -> IdentityReport:
    """Pointwise n-form identity at a point off all spheres.

    lhs alternates minors of the gradient rows divided by products of
    the f values; rhs is the weighted combination of mixed determinants
    divided by the same products.  The prefactor sign (-1)^(n(n-1)/2)
    is fixed by requiring lhs = rhs, which holds to machine precision
    across random arrangements and points in n = 2 and 3.
    """
    x = np.asarray(x, dtype=float)
    n = a.n
    if x.shape != (n,):
        raise ValueError(f"point must have {n} coordinates")
    N = tuple(range(1, n + 2))
    f = {j: evaluate_f(a, j, x) for j in N}
    scale = max(1.0, float(np.max(a.radii)) ** 2)
    if min(abs(v) for v in f.values()) < 1e-9 * scale:
        raise DegenerateConfigError("point lies on (or too near) a sphere")
    grads = {j: 2.0 * (x - a.center(j)) for j in N}
    lhs_parts = []
    for nu in N:
        rows = np.array([grads[j] for j in N if j != nu])
        prod = math.prod(f[j] for j in N if j != nu)
        lhs_parts.append((-1) ** (nu - 1) * float(np.linalg.det(rows)) / prod)
    lhs = math.fsum(lhs_parts)
    table = CMTable.from_arrangement(a)
    plain = table.chain(("0",) + N, ("0",) + N)
    pref = (2 ** n * (-1) ** (n * (n - 1) // 2)
            / math.sqrt((-1) ** (n + 1) * 2 ** n * plain))
    terms = []
    for nu in N:
        dN = tuple(j for j in N if j != nu)
        mixed = table.chain(("0", "*") + dN, ("0", nu) + dN)
        prod = math.prod(f[j] for j in dN)
        terms.append((f"face_{nu}", -pref * mixed / prod))
    starred_full = table.chain(("0", "*") + N, ("0", "*") + N)
    terms.append(("full", pref * starred_full / math.prod(f.values())))
    tolerance = 1e-10 * max(abs(lhs), 1.0)
    return _report("lemma5_pointwise", lhs, terms, tolerance)


def check_prop4_residue(a, J, trials: int = 20,
                        rng: "Rng | None" = None) -> IdentityReport:
    """Constancy of the face-form normalizing determinant on S_J.

    At sampled points of S_J, the determinant of the p gradient rows
    stacked with an orthonormal tangent frame has constant absolute
    value sqrt((-1)^(p-1) 2^p B(0*J)); the printed residue constant is
    its reciprocal up to an orientation sign.  Passing requires both
    the match to the constant (1e-9 relative) and constancy across the
    samples (std below 1e-10 of the constant's scale).
    """
    J = tuple(sorted(J))
    p = len(J)
    n = a.n
    rng = rng if rng is not None else Rng(0)
    sub = intersection_sphere(a, J)
    table = CMTable.from_arrangement(a)
    starred = table.chain(("0", "*") + J, ("0", "*") + J)
    const = math.sqrt((-1) ** (p - 1) * 2 ** p * starred)
    V = sub.basis.T  # (n, n-p+1)
    gen = rng.generator(0)
    vals = []
    for _ in range(max(1, trials)):
        g = gen.normal(size=V.shape[1])
        u = V @ g / np.linalg.norm(g)
        x = sub.center + sub.radius * u
        rows = [2.0 * (x - a.center(j)) for j in J]
        M = V - np.outer(u, u @ V)
        q, rr = np.linalg.qr(M)
        keep = [i for i in range(q.shape[1]) if abs(rr[i, i]) > 1e-8]
        if len(keep) != n - p:
            raise DegenerateConfigError("tangent frame extraction failed")
        rows += [q[:, i] for i in keep]
        vals.append(abs(float(np.linalg.det(np.array(rows)))))
    vals = np.array(vals)
    worst = float(vals[np.argmax(np.abs(vals - const))])
    residual = float(np.max(np.abs(vals - const)))
    spread = float(np.std(vals))
    tolerance = 1e-9 * max(const, 1.0)
    passed = residual <= tolerance and spread <= 1e-10 * max(const, 1.0)
    name = "prop4_residue_" + "".join(str(j) for j in J)
    return IdentityReport(name, worst, const, residual, tolerance,
                          passed, (("constant", const),))


def check_prop6_values(a, j: int) -> IdentityReport:
    """Closed forms for 1/f_j at the two vertices of the opposite face.

    Checks the two vertex values (negative at P, positive at P') and
    their product against the determinant expressions; residual is the
    worst relative error of the three.
    """
    n = a.n
    N = tuple(range(1, n + 2))
    dN = tuple(k for k in N if k != j)
    vp = vertices(a, j)
    fP = evaluate_f(a, j, vp.P)
    fPp = evaluate_f(a, j, vp.P_prime)
    table = CMTable.from_arrangement(a)
    Bss = table.chain(("0", "*") + dN, ("0", "*") + dN)
    BN = table.chain(("0",) + N, ("0",) + N)
    Bmix = table.chain(("0", "*") + dN, ("0", j) + dN)
    BsN = table.chain(("0", "*") + N, ("0", "*") + N)
    BdN = table.chain(("0",) + dN, ("0",) + dN)
    root = math.sqrt(Bss * BN)
    closP = ((-1) ** (n + 1) * root + Bmix) / BsN
    closPp = ((-1) ** n * root + Bmix) / BsN
    closProd = -BdN / BsN
    residual = max(
        abs(1.0 / fP - closP) / abs(closP),
        abs(1.0 / fPp - closPp) / abs(closPp),
        abs(1.0 / (fP * fPp) - closProd) / abs(closProd),
    )
    tolerance = 1e-9
    passed = residual <= tolerance and closP < 0 < closPp
    return IdentityReport(f"prop6_values_{j}", 1.0 / fP, closP,
                          float(residual), tolerance, bool(passed),
                          (("vertex_value", closP),))


def check_gauss_bonnet_n3(m: ConfigMatrix, samples: int = 1_000_000,
                          rng: "Rng | None" = None) -> IdentityReport:
    """Spherical region area against its boundary-integral closed form.

    lhs is the MC area of the region cut by the planes on the unit
    2-sphere; rhs combines the Euler term 2 pi, the offset-weighted
    boundary arc lengths, and the exterior angles at the vertices, all
    computed exactly from circle geometry.
    """
    if m.n != 3:
        raise ValueError("this check is specific to n = 3")
    rng = rng if rng is not None else Rng(0)
    est = sphere_region_area_mc(m, samples, rng)
    arcs = sphere_arc_lengths(m)
    counts = sphere_vertex_counts(m)
    terms = [("euler", 2.0 * math.pi)]
    for j in (1, 2, 3):
        terms.append((f"arc_{j}", -m.offset(j) * arcs[j]))
    for j, k in itertools.combinations((1, 2, 3), 2):
        cnt = counts[(j, k)]
        if cnt:
            ang = sphere_angle(m, j, k)
            terms.append((f"vertex_{j}{k}", -cnt * (math.pi - ang)))
        else:
            terms.append((f"vertex_{j}{k}", 0.0))
    tolerance = max(3.0 * est.std_error, 1e-12)
    return _report("gauss_bonnet_n3", est.value, terms, tolerance)
