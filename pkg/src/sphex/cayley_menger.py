"""Bordered squared-distance determinants for sphere arrangements.

Every quantity in this package ultimately reduces to determinants of
matrices whose entries are squared radii and squared center distances,
bordered by rows and columns of ones.  A determinant is described here
by a pair of index chains (row chain, column chain).  A chain is a tuple
of tokens: the string ``"0"`` for a border of ones, the string ``"*"``
for a border of squared radii, and 1-based sphere indices for ordinary
rows.  The entry rule is symmetric:

    ("0", "0") -> 0      ("0", j)   -> 1      ("*", j) -> r_j^2
    ("0", "*") -> 1      ("*", "*") -> 0      (j, k)   -> rho_jk^2  (0 if j = k)

`CMTable` memoizes values per arrangement, canonicalizing index order
and applying the permutation sign on lookup.  `cm` is the narrow public
face restricted to the four standard header shapes; `cm_chain` accepts
any square pair of chains (several mixed shapes appear in the one-form
coefficients and in the vertex value formulas).

The module also builds the configuration matrix of an arrangement whose
last sphere is the unit sphere at the origin: each other sphere is cut
by a hyperplane, normalized so that the Lorentzian square of its
coefficient vector is one, and the matrix collects the pairwise
Lorentzian products.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor

from .errors import DegenerateConfigError, NonRealizableError

Token = "int | str"

_HEADERS = {
    ("0", "0"),
    ("*", "0"),
    ("*", "*"),
    ("0*", "0*"),
}

#: pivot magnitudes below this fraction of the entry scale set a warning flag
PIVOT_WARN = 1e-12


def _perm_sign(seq):
    """Sign of the permutation sorting `seq` (distinct ints)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _split_chain(chain):
    """Separate leading header tokens from index tokens.

    Headers may appear only before the first index.  Returns
    (headers, indices).
    """
    head = []
    idx = []
    for t in chain:
        if isinstance(t, str):
            if t not in ("0", "*"):
                raise ValueError(f"unknown chain token {t!r}")
            if idx:
                raise ValueError("header tokens must precede index tokens")
            head.append(t)
        else:
            idx.append(int(t))
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated index in chain {chain!r}")
    return tuple(head), tuple(idx)


def _det_lu(M):
    """Determinant via partially pivoted LU, plus a pivot-degradation flag."""
    m = M.shape[0]
    if m == 0:
        return 1.0, False
    if m == 1:
        return float(M[0, 0]), False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(M, check_finite=False)
    diag = np.diag(lu)
    sign = 1.0
    for i, p in enumerate(piv):
        if p != i:
            sign = -sign
    det = sign * float(np.prod(diag))
    scale = max(1.0, float(np.max(np.abs(M))))
    degraded = bool(np.min(np.abs(diag)) < PIVOT_WARN * scale)
    return det, degraded


@dataclass(frozen=True)
class CMKey:
    """One of the four standard determinant shapes.

    `row_header` / `col_header` are ``"0"``, ``"*"`` or ``"0*"``; `rows`
    and `cols` are equal-length tuples of 1-based sphere indices.  Shapes
    outside the standard four are rejected; use `cm_chain` for those.
    """

    row_header: str
    col_header: str
    rows: tuple
    cols: tuple

    def __post_init__(self):
        if (self.row_header, self.col_header) not in _HEADERS:
            raise ValueError(
                f"unsupported header shape ({self.row_header!r}, {self.col_header!r})")
        if len(self.rows) != len(self.cols):
            raise ValueError("row and column index sets must have equal size")
        if not self.rows:
            raise ValueError("index sets must be non-empty")

    @classmethod
    def plain(cls, J, K=None):
        """B(0 J; 0 K); K defaults to J."""
        J = tuple(J)
        return cls("0", "0", J, tuple(K) if K is not None else J)

    @classmethod
    def starred(cls, J, K=None):
        """B(0 * J; 0 * K); K defaults to J."""
        J = tuple(J)
        return cls("0*", "0*", J, tuple(K) if K is not None else J)

    def chains(self):
        rh = {"0": ("0",), "*": ("*",), "0*": ("0", "*")}
        return rh[self.row_header] + self.rows, rh[self.col_header] + self.cols


@dataclass
class CMTable:
    """Memoized determinant evaluator for one set of squared parameters.

    Values are cached under canonical keys (indices sorted, transpose
    normalized); the permutation sign is applied on lookup.  The cache
    only ever stores pure values, so concurrent readers inserting the
    same key are harmless.
    """

    n: int
    radii_sq: np.ndarray  # shape (n+2,), entry 0 unused
    dist_sq: np.ndarray   # shape (n+2, n+2), entry [j, k] = rho_jk^2

    _cache: dict = field(default_factory=dict, repr=False)
    pivot_warnings: set = field(default_factory=set, repr=False)

    @classmethod
    def from_arrangement(cls, a):
        m = a.n + 1
        r2 = np.zeros(m + 1)
        r2[1:] = np.asarray(a.radii, float) ** 2
        d2 = np.zeros((m + 1, m + 1))
        for j in range(1, m + 1):
            for k in range(j + 1, m + 1):
                d2[j, k] = d2[k, j] = float(
                    np.sum((a.centers[j - 1] - a.centers[k - 1]) ** 2))
        return cls(a.n, r2, d2)

    @classmethod
    def from_params(cls, params):
        """Build from a parameter vector (no point coordinates needed)."""
        m = params.n + 1
        r2 = np.zeros(m + 1)
        r2[1:] = params.radii_sq
        d2 = np.zeros((m + 1, m + 1))
        d2[1:, 1:] = params.dist_sq
        return cls(params.n, r2, d2)

    # -- evaluation -------------------------------------------------------

    def _entry(self, a, b):
        if a == "0":
            return 0.0 if b == "0" else 1.0
        if a == "*":
            if b == "0":
                return 1.0
            if b == "*":
                return 0.0
            return self.radii_sq[b]
        if b == "0":
            return 1.0
        if b == "*":
            return self.radii_sq[a]
        return self.dist_sq[a, b]

    def chain(self, rows, cols):
        """Determinant for an arbitrary square pair of chains."""
        rh, ri = _split_chain(rows)
        ch, ci = _split_chain(cols)
        if len(rh) + len(ri) != len(ch) + len(ci):
            raise ValueError("row and column chains must have equal length")
        for t in ri + ci:
            if not 1 <= t <= self.n + 1:
                raise ValueError(f"sphere index {t} out of range 1..{self.n + 1}")
        sign = _perm_sign(ri) * _perm_sign(ci)
        rkey = (rh, tuple(sorted(ri)))
        ckey = (ch, tuple(sorted(ci)))
        key = (rkey, ckey) if rkey <= ckey else (ckey, rkey)  # transpose symmetry
        if key not in self._cache:
            chain_r = key[0][0] + key[0][1]
            chain_c = key[1][0] + key[1][1]
            M = np.array([[self._entry(x, y) for y in chain_c] for x in chain_r])
            det, degraded = _det_lu(M)
            self._cache[key] = det
            if degraded:
                self.pivot_warnings.add(key)
        return sign * self._cache[key]


def hadamard_scale(table: CMTable, size: int) -> float:
    """Conservative magnitude bound for a size x size bordered determinant.

    Used to turn absolute sign thresholds into scale-aware ones: a
    determinant whose magnitude is below tol * hadamard_scale has an
    unreliable sign at double precision.
    """
    M = max(1.0, float(np.max(table.radii_sq)), float(np.max(table.dist_sq)))
    return M ** size * size ** (size / 2.0)


def cm(table: CMTable, key: CMKey) -> float:
    """Evaluate one of the four standard determinant shapes."""
    rows, cols = key.chains()
    return table.chain(rows, cols)


def cm_chain(table: CMTable, rows, cols) -> float:
    """Evaluate a determinant given explicit row and column chains."""
    return table.chain(rows, cols)


# ---------------------------------------------------------------------------
# configuration matrix (arrangement restricted to the unit sphere)
# ---------------------------------------------------------------------------


@dataclass
class ConfigMatrix:
    """Normalized hyperplane data for spheres cutting the unit sphere.

    For an arrangement in dimension n whose sphere n+1 is the unit
    sphere at the origin, each sphere j <= n meets the unit sphere in
    the slice of a hyperplane  sum_nu u[j-1, nu] x_nu + offset[j-1] = 0
    with |u_j|^2 - offset_j^2 = 1.  `matrix` is the (n+1) x (n+1) Gram
    matrix of Lorentzian products, index 0 being the distinguished
    direction: matrix[0, 0] = -1, matrix[0, j] = offset_{j},
    matrix[j, j] = 1.
    """

    n: int
    matrix: np.ndarray        # (n+1, n+1)
    normals: np.ndarray       # (n, n) rows u_j
    offsets: np.ndarray       # (n,)

    def offset(self, j: int) -> float:
        return float(self.offsets[j - 1])

    def inner(self, j: int, k: int) -> float:
        return float(self.matrix[j, k])

    @classmethod
    def from_entries(cls, n: int, offsets, inner) -> "ConfigMatrix":
        """Rebuild plane data from matrix entries.

        Args:
            n: ambient dimension (the sphere is the unit (n-1)-sphere).
            offsets: sequence of n offset entries.
            inner: mapping (j, k) -> matrix entry for 1 <= j < k <= n.

        The Euclidean Gram matrix u_j . u_k = inner[jk] + off_j off_k
        must be positive definite; its Cholesky factor supplies normals
        in a fixed orientation, which makes perturbation sweeps of the
        entries well defined.
        """
        off = np.asarray(offsets, float)
        if off.shape != (n,):
            raise ValueError("expected one offset per cutting sphere")
        A = np.zeros((n + 1, n + 1))
        A[0, 0] = -1.0
        G = np.empty((n, n))
        for j in range(1, n + 1):
            A[0, j] = A[j, 0] = off[j - 1]
            A[j, j] = 1.0
            G[j - 1, j - 1] = 1.0 + off[j - 1] ** 2
        for (j, k), v in dict(inner).items():
            j, k = int(j), int(k)
            A[j, k] = A[k, j] = v
            G[j - 1, k - 1] = G[k - 1, j - 1] = v + off[j - 1] * off[k - 1]
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError as e:
            raise NonRealizableError(
                "matrix entries admit no plane configuration") from e
        return cls(n, A, L, off)


def config_matrix(a) -> ConfigMatrix:
    """Configuration matrix of an arrangement with unit last sphere.

    Requires radius 1 and center at the origin for sphere n+1 (see
    `restrict_to_unit_sphere`).  Matrix entries are computed from
    bordered determinants; the plane coefficient vectors come directly
    from the centers.  Both routes agree to rounding.
    """
    n = a.n
    m = n + 1
    if abs(a.radii[-1] - 1.0) > 1e-9 or np.max(np.abs(a.centers[-1])) > 1e-9:
        raise ValueError("sphere n+1 must be the unit sphere at the origin")
    table = CMTable.from_arrangement(a)
    norm = np.empty(m - 1)
    for j in range(1, m):
        c2 = -table.chain(("0", "*", j, m), ("0", "*", j, m))
        if c2 <= 0:
            raise DegenerateConfigError(
                f"sphere {j} does not cut the unit sphere transversally")
        norm[j - 1] = math.sqrt(c2)
    off = np.empty(m - 1)
    A = np.zeros((m, m))
    A[0, 0] = -1.0
    for j in range(1, m):
        off[j - 1] = table.chain(("0", j, m), ("0", "*", m)) / norm[j - 1]
        A[0, j] = A[j, 0] = off[j - 1]
        A[j, j] = 1.0
    for j in range(1, m):
        for k in range(j + 1, m):
            A[j, k] = A[k, j] = -table.chain(
                ("0", "*", j, m), ("0", "*", k, m)) / (norm[j - 1] * norm[k - 1])
    normals = np.array([-2.0 * a.centers[j - 1] / norm[j - 1] for j in range(1, m)])
    return ConfigMatrix(n, A, normals, off)


def config_minor(m: ConfigMatrix, J, with_zero: bool = False) -> float:
    """Principal minor A'(J) or A'(0 J) of the configuration matrix.

    `J` holds 1-based sphere labels; `with_zero` prepends the
    distinguished index 0.  An empty J with `with_zero` gives -1.
    """
    J = tuple(J)
    rows = ((0,) if with_zero else ()) + J
    if not rows:
        return 1.0
    return float(np.linalg.det(m.matrix[np.ix_(rows, rows)]))


def config_minor_pair(m: ConfigMatrix, rows, cols) -> float:
    """General minor A'(rows; cols) with independent row and column sets.

    Needed by the one-form recursion, which mixes the 0 index into the
    rows only.  Indices as in `config_minor`.
    """
    rows = tuple(rows)
    cols = tuple(cols)
    if len(rows) != len(cols):
        raise ValueError("row and column index sets must have equal size")
    return float(np.linalg.det(m.matrix[np.ix_(rows, cols)]))
