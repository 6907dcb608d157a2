"""Exceptional points of order N: nilpotency, Jordan chains, parameter paths.

A matrix H of size n carries an EPN at E = 0 exactly when it is similar to
one n x n Jordan block, i.e. when rank(H^k) = n - k for k = 1..n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numlin
from .errors import NotEPNError, UnsupportedSizeError
from .jsonio import complex_to_json, vector_to_json
from .lattice import HamiltonianFamily
from .numlin import RANK_TOL, RationalMatrix

CHAIN_TOL = 1e-8
COND_LIMIT = 1e12


def _inf_norm(m: np.ndarray) -> float:
    return float(np.abs(m).sum(axis=1).max())


def _negligible(power: np.ndarray, p: int, h_norm: float, tol: float, structural: bool) -> bool:
    if structural:
        # acyclic support: every entry of H^p is a sum over walks of length p,
        # so the floating power vanishes exactly once no walks remain
        return not power.any()
    # powers of non-normal matrices can grow transiently, so the zero test
    # scales with (1 + ||H||)^p
    return _inf_norm(power) < tol * (1.0 + h_norm) ** p


def structurally_nilpotent(h) -> bool:
    """True when the support digraph of ``h`` (edge i -> j for H[i][j] != 0) is acyclic."""
    support = (np.asarray(h) != 0).astype(np.int64)
    n = support.shape[0]
    reach = support.copy()
    for _ in range(n):
        if not reach.any():
            return True
        reach = ((reach @ support) > 0).astype(np.int64)
    return not reach.any()


def nilpotency_index(h, tol: float = RANK_TOL) -> int | None:
    """Smallest p <= n with H^p = 0, else None.

    For a structurally nilpotent ``h`` the floating power must vanish
    exactly; otherwise ``||H^p||`` must fall below ``tol * (1 + ||H||)^p``.
    """
    h = numlin.as_matrix(h)
    n = h.shape[0]
    if h.shape[1] != n:
        raise ValueError("nilpotency_index expects a square matrix")
    if n > numlin.MAX_N:
        raise UnsupportedSizeError(f"n <= {numlin.MAX_N} required, got {n}")
    h_norm = _inf_norm(h)
    structural = structurally_nilpotent(h)
    power = np.eye(n, dtype=complex)
    for p in range(1, n + 1):
        power = power @ h
        if _negligible(power, p, h_norm, tol, structural):
            return p
    return None


def rank_filtration(h, tol: float = RANK_TOL) -> list[int]:
    """Floating ranks of H^k, k = 1..n.

    A power that passes the nilpotency zero test counts as rank 0; otherwise
    the pivot rank relative to that power's own largest entry is used.
    """
    h = numlin.as_matrix(h)
    n = h.shape[0]
    h_norm = _inf_norm(h)
    structural = structurally_nilpotent(h)
    out = []
    power = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        power = power @ h
        out.append(0 if _negligible(power, k, h_norm, tol, structural) else numlin.rank(power, tol))
    return out


@dataclass
class EPReport:
    n: int
    nilpotency_index: int | None
    rank_filtration: list[int]
    kernel: list[np.ndarray]
    is_epn: bool
    jordan_value: complex = 0j
    structural_nilpotent: bool = False

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "nilpotency_index": self.nilpotency_index,
            "rank_filtration": [int(r) for r in self.rank_filtration],
            "kernel": [vector_to_json(v) for v in self.kernel],
            "is_epn": self.is_epn,
            "jordan_value": complex_to_json(self.jordan_value),
            "structural_nilpotent": self.structural_nilpotent,
        }


def epn_check(h, tol: float = RANK_TOL, exact: RationalMatrix | None = None) -> EPReport:
    """Certify whether ``h`` is a single Jordan block with value 0.

    When ``exact`` is given, the rank filtration comes from exact rational
    arithmetic and the nilpotency index is read off it.
    """
    h = numlin.as_matrix(h)
    n = h.shape[0]
    if h.shape[1] != n:
        raise ValueError("epn_check expects a square matrix")
    if n > numlin.MAX_N:
        raise UnsupportedSizeError(f"n <= {numlin.MAX_N} required, got {n}")
    if exact is not None:
        filtration = numlin.exact_rank_filtration(exact)
        index = next((k + 1 for k, r in enumerate(filtration) if r == 0), None)
    else:
        filtration = rank_filtration(h, tol)
        index = nilpotency_index(h, tol)
    is_epn = filtration == list(range(n - 1, -1, -1))
    return EPReport(
        n=n,
        nilpotency_index=index,
        rank_filtration=filtration,
        kernel=numlin.null_space(h, tol),
        is_epn=is_epn,
        jordan_value=0j,
        structural_nilpotent=structurally_nilpotent(h),
    )


def jordan_block(n: int, value: complex = 0.0) -> np.ndarray:
    return value * np.eye(n, dtype=complex) + np.eye(n, k=1, dtype=complex)


@dataclass
class JordanChain:
    """Generalized eigenvectors v_1..v_N with H v_1 = 0 and H v_k = v_{k-1}."""

    vectors: list[np.ndarray]
    similarity: np.ndarray
    residual: float
    condition: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "vectors": [vector_to_json(v) for v in self.vectors],
            "similarity": [vector_to_json(row) for row in self.similarity],
            "residual": self.residual,
            "condition": self.condition,
            "warnings": list(self.warnings),
        }


def jordan_chain(h, tol: float = CHAIN_TOL) -> JordanChain:
    """Build the chain from the basis vector e_j maximizing ||H^{N-1} e_j||.

    Raises :class:`NotEPNError` unless ``h`` is EPN-certified.
    """
    h = numlin.as_matrix(h)
    n = h.shape[0]
    if not epn_check(h).is_epn:
        raise NotEPNError("matrix is not similar to a single Jordan block")
    top = np.linalg.matrix_power(h, n - 1)
    j = int(np.argmax(np.linalg.norm(top, axis=0)))
    vecs = [np.zeros(n, dtype=complex)]
    vecs[0][j] = 1.0
    for _ in range(n - 1):
        vecs.append(h @ vecs[-1])
    vecs.reverse()
    s = np.column_stack(vecs)
    cond = float(np.linalg.cond(s))
    residual = _inf_norm(np.linalg.solve(s, h @ s) - jordan_block(n))
    warns = []
    if cond > COND_LIMIT:
        warns.append(f"similarity matrix is ill-conditioned (cond ~ {cond:.3e})")
    if not residual < tol:
        warns.append(f"similarity residual {residual:.3e} exceeds tolerance {tol:.1e}")
    return JordanChain(vecs, s, residual, cond, warns)


@dataclass
class PathVerdict:
    """Per-sample EPN verdicts along one parameter path.

    A failing path says only that *this* path leaves the EPN manifold.
    """

    samples: list[tuple[float, bool]]
    path_equivalent: bool
    first_failure: float | None

    def to_dict(self) -> dict:
        return {
            "samples": [[float(p), bool(ok)] for p, ok in self.samples],
            "path_equivalent": self.path_equivalent,
            "first_failure": self.first_failure,
        }


def uniform_grid(start: float, stop: float, num: int = 101) -> list[float]:
    return [float(x) for x in np.linspace(start, stop, num)]


def adiabatic_path_check(family: HamiltonianFamily, parameter_grid, tol: float = RANK_TOL) -> PathVerdict:
    grid = [float(x) for x in parameter_grid]
    if not grid:
        raise ValueError("parameter grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("parameter grid must be sorted")
    if not all(math.isfinite(x) for x in grid):
        raise ValueError("parameter grid must be finite")
    samples = [(x, epn_check(family.at(x), tol).is_epn) for x in grid]
    failures = [x for x, ok in samples if not ok]
    return PathVerdict(samples, not failures, failures[0] if failures else None)
