"""Dense complex linear algebra at desk scale.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Exact work is
done on nested lists of :class:`fractions.Fraction` (a "rational matrix").
Spectral routines (characteristic polynomial, roots, eigenpairs) are capped
at n = 16; rank and power computations are allowed up to n = 32.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, UnsupportedSizeError

RANK_TOL = 1e-9
CLUSTER_RADIUS = 1e-6
MAX_SPECTRAL_N = 16
MAX_N = 32

RationalMatrix = list[list[Fraction]]


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array (a copy is not guaranteed)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or 0 in m.shape:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def mat_mul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def _row_reduce(a: np.ndarray, tol: float) -> tuple[np.ndarray, list[int]]:
    """Gauss-Jordan elimination with partial pivoting.

    A candidate pivot counts only if its magnitude exceeds ``tol`` times the
    largest entry magnitude of the *input*.  Returns the reduced matrix and
    the pivot columns.
    """
    m = np.array(a, dtype=complex)
    n_rows, n_cols = m.shape
    scale = float(np.abs(m).max())
    pivots: list[int] = []
    if scale == 0.0:
        return m, pivots
    thresh = tol * scale
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[p, c]) <= thresh:
            m[r:, c] = 0.0
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] /= m[r, c]
        others = np.arange(n_rows) != r
        m[others] -= np.outer(m[others, c], m[r])
        m[others, c] = 0.0
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a, tol: float = RANK_TOL) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    _, pivots = _row_reduce(as_matrix(a), tol)
    return len(pivots)


def canonicalize(v, tol: float = 1e-12) -> np.ndarray:
    """Rotate the phase of ``v`` so its lowest-index nonzero entry is real positive."""
    v = np.array(v, dtype=complex)
    mags = np.abs(v)
    peak = mags.max() if v.size else 0.0
    if peak == 0.0:
        return v
    idx = int(np.argmax(mags > tol * peak))
    v *= np.conj(v[idx]) / mags[idx]
    v[idx] = mags[idx]
    return v


def null_space(a, tol: float = RANK_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the kernel, each vector canonicalized.

    The basis comes from the reduced row echelon form (one vector per free
    column, in column order) followed by modified Gram-Schmidt.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("null_space expects a square matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = a.shape[1]
    red, pivots = _row_reduce(a, tol)
    free = [c for c in range(n) if c not in pivots]
    raw = []
    for f in free:
        v = np.zeros(n, dtype=complex)
        v[f] = 1.0
        for row, pc in enumerate(pivots):
            v[pc] = -red[row, f]
        raw.append(v)
    basis: list[np.ndarray] = []
    for v in raw:
        for q in basis:
            v = v - np.vdot(q, v) * q
        basis.append(v / np.linalg.norm(v))
    return [canonicalize(v) for v in basis]


def char_poly(a) -> np.ndarray:
    """Monic characteristic polynomial by the Faddeev-LeVerrier recursion.

    Coefficients are returned highest degree first: ``[1, c_{n-1}, ..., c_0]``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("char_poly expects a square matrix")
    if n > MAX_SPECTRAL_N:
        raise UnsupportedSizeError(f"char_poly supports n <= {MAX_SPECTRAL_N}, got {n}")
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    eye = np.eye(n, dtype=complex)
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def _polyval(coeffs: np.ndarray, z):
    acc = np.zeros_like(z, dtype=complex)
    for c in coeffs:
        acc = acc * z + c
    return acc


def poly_roots(coeffs, tol: float = 1e-10, max_iter: int = 5000) -> list[complex]:
    """All roots of a monic polynomial via Durand-Kerner iteration.

    Exactly-zero trailing coefficients are deflated first, so a root at the
    origin of multiplicity m comes back as m exact zeros.  Every returned
    root satisfies ``|p(z)| < tol * (1 + max|c|)``.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need a polynomial of degree >= 1")
    if c[0] == 0:
        raise ValueError("leading coefficient is zero")
    if abs(c[0] - 1.0) > 1e-12:
        raise ValueError("polynomial must be monic")
    n = c.size - 1
    zeros = 0
    while zeros < n and c[n - zeros] == 0:
        zeros += 1
    work = c[: n + 1 - zeros]
    d = work.size - 1
    found = [0j] * zeros
    if d == 1:
        found.append(complex(-work[1]))
    elif d > 1:
        radius = 1.0 + float(np.abs(work[1:]).max())
        z = radius * (0.4 + 0.9j) ** np.arange(d) / abs(0.4 + 0.9j) ** np.arange(d)
        for _ in range(max_iter):
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            step = _polyval(work, z) / diff.prod(axis=1)
            z = z - step
            if np.all(np.abs(step) <= 1e-14 * (1.0 + np.abs(z))):
                break
        found.extend(complex(x) for x in z)
    roots = np.array(found, dtype=complex)
    bound = tol * (1.0 + float(np.abs(c).max()))
    resid = np.abs(_polyval(c, roots))
    if not np.all(np.isfinite(resid)) or np.any(resid >= bound):
        raise ConvergenceError(
            f"Durand-Kerner did not converge in {max_iter} iterations "
            f"(max residual {np.nanmax(resid):.3e})",
            best=list(roots),
        )
    return list(roots)


def cluster_roots(roots, radius: float = CLUSTER_RADIUS) -> list[tuple[complex, int]]:
    """Single-linkage clustering; returns (mean value, multiplicity) pairs."""
    roots = list(roots)
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i, r in enumerate(roots):
        groups.setdefault(find(i), []).append(r)
    out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    out.sort(key=lambda p: (round(p[0].real, 9), round(p[0].imag, 9)))
    return out


@dataclass
class Eigenpair:
    """One eigenvalue cluster with its right eigenvectors.

    ``multiplicity`` is algebraic; ``len(vectors)`` is geometric.  At an
    exceptional point the latter is smaller.
    """

    value: complex
    multiplicity: int
    vectors: list[np.ndarray] = field(default_factory=list)


def eig(a, tol: float = RANK_TOL) -> list[Eigenpair]:
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("eig expects a square matrix")
    if n > MAX_SPECTRAL_N:
        raise UnsupportedSizeError(f"eig supports n <= {MAX_SPECTRAL_N}, got {n}")
    pairs = []
    eye = np.eye(n)
    for value, mult in cluster_roots(poly_roots(char_poly(a))):
        # eigenvalues carry root-finder error; widen the rank threshold until
        # the shifted matrix is seen as singular
        vt = tol
        vecs = null_space(a - value * eye, vt)
        while not vecs and vt < 1e-5:
            vt *= 10
            vecs = null_space(a - value * eye, vt)
        pairs.append(Eigenpair(value, mult, vecs))
    return pairs


def eigenvalues(a) -> list[complex]:
    """Flat eigenvalue list with algebraic multiplicity."""
    out = []
    for p in eig(a):
        out.extend([p.value] * p.multiplicity)
    return out


# -- exact rational backend ------------------------------------------------

def to_rational(a) -> RationalMatrix | None:
    """Exact rational copy of a real matrix, or ``None`` if any entry is complex.

    Every finite double is a dyadic rational, so the conversion is lossless.
    """
    if isinstance(a, list) and a and all(isinstance(x, Fraction) for row in a for x in row):
        return [list(row) for row in a]
    m = as_matrix(a)
    if np.any(m.imag != 0):
        return None
    return [[Fraction(float(x)) for x in row] for row in m.real]


def _rational_rank(m: RationalMatrix) -> int:
    rows = [list(r) for r in m]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, n_rows):
            if rows[i][c] != 0:
                f = rows[i][c] / piv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == n_rows:
            break
    return r


def _rational_mul(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    cols = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols] for row in a]


def exact_rank_filtration(a: RationalMatrix) -> list[int]:
    """Exact ranks of a, a^2, ..., a^n with no tolerance involved."""
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("exact_rank_filtration expects a square matrix")
    a = [[Fraction(x) for x in row] for row in a]
    out = []
    power = a
    for _ in range(n):
        r = _rational_rank(power)
        out.append(r)
        if r == 0:
            out.extend([0] * (n - len(out)))
            break
        power = _rational_mul(power, a)
    return out


# -- matrix text format ----------------------------------------------------

def _parse_token(tok: str):
    if "/" in tok:
        return Fraction(tok)
    try:
        return Fraction(int(tok))
    except ValueError:
        return complex(tok)


def parse_matrix(text: str) -> tuple[np.ndarray, RationalMatrix | None]:
    """Parse the matrix text format.

    First line ``n_rows n_cols``, then one row per line of whitespace
    separated entries (``1.5``, ``1+2j``, or exact ``3/4``).  When every
    entry is an integer or ratio of integers the exact rational matrix is
    returned alongside the floating one.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        n_rows, n_cols = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad header line {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != n_rows:
        raise ValueError(f"expected {n_rows} rows, found {len(body)}")
    entries = []
    for i, ln in enumerate(body, start=2):
        toks = ln.split()
        if len(toks) != n_cols:
            raise ValueError(f"line {i}: expected {n_cols} entries, found {len(toks)}")
        try:
            entries.append([_parse_token(t) for t in toks])
        except ValueError as exc:
            raise ValueError(f"line {i}: {exc}") from exc
    exact = None
    if all(isinstance(x, Fraction) for row in entries for x in row):
        exact = entries
    m = np.array([[complex(x) for x in row] for row in entries], dtype=complex)
    return as_matrix(m), exact


def read_matrix(path) -> tuple[np.ndarray, RationalMatrix | None]:
    return parse_matrix(Path(path).read_text(encoding="utf-8"))


def format_matrix(a) -> str:
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(f"{float(z.real)!r}{float(z.imag):+}j" for z in row))
    return "\n".join(lines) + "\n"


def write_matrix(a, path) -> None:
    Path(path).write_text(format_matrix(a), encoding="utf-8")
