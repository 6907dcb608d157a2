"""Tight-binding chains with asymmetric forward and backward hopping.

Matrix convention (1-based sites, bond n joins sites n and n+1)::

    H[n][n+1] = J^F_n      forward amplitude
    H[n+1][n] = J^B_n      backward amplitude
    H[n][n+2] = J'         next-nearest-neighbour amplitude

Ring closures use the edge bond N, which joins site N back to site 1:
``ring_backward`` places J^B_N at H[1][N] and ``ring_forward`` places J^F_N
at H[N][1].  Under this convention the H1 chain (J^F = 1, J^B = 0) has its
zero mode on site 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import SpecError
from .numlin import RationalMatrix

Amplitude = Union[int, float, complex, Fraction]

BOUNDARIES = ("open", "ring_backward", "ring_forward")
DISORDER_TARGETS = ("forward", "backward", "both")
PROFILES = ("uniform_sine", "random_sine", "cos_sin_path", "ring_closure")


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class LatticeSpec:
    """Declarative description of a 1-D chain.

    ``forward`` and ``backward`` hold the N-1 bulk bonds; the ring bond N is
    kept in ``forward_edge`` / ``backward_edge`` and only used by the
    matching ring boundary.
    """

    n_sites: int
    forward: tuple
    backward: tuple
    forward_edge: Amplitude = 0
    backward_edge: Amplitude = 0
    nnn_amplitude: Amplitude | None = None
    boundary: str = "open"
    interface_site: int | None = None

    def __post_init__(self):
        if not isinstance(self.n_sites, int) or self.n_sites < 1:
            raise SpecError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        object.__setattr__(self, "forward", tuple(self.forward))
        object.__setattr__(self, "backward", tuple(self.backward))
        nb = self.n_sites - 1
        if len(self.forward) != nb or len(self.backward) != nb:
            raise SpecError(
                f"bond arrays must have length n_sites-1 = {nb}, "
                f"got forward={len(self.forward)} backward={len(self.backward)}"
            )
        if self.boundary not in BOUNDARIES:
            raise SpecError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.nnn_amplitude is not None and not abs(self.nnn_amplitude) < 1:
            raise SpecError(f"|nnn_amplitude| must be < 1, got {self.nnn_amplitude!r}")
        if self.interface_site is not None and not 1 < self.interface_site < self.n_sites:
            raise SpecError(
                f"interface_site must satisfy 1 < site < {self.n_sites}, got {self.interface_site}"
            )

    @property
    def is_exact(self) -> bool:
        """True when every amplitude is an integer or a Fraction."""
        vals = [*self.forward, *self.backward, self.forward_edge, self.backward_edge]
        if self.nnn_amplitude is not None:
            vals.append(self.nnn_amplitude)
        return all(_is_exact(v) for v in vals)

    def validate(self) -> None:
        """Check cross-field consistency; raises :class:`SpecError`."""
        if self.boundary == "open" and (self.forward_edge != 0 or self.backward_edge != 0):
            raise SpecError("edge amplitudes require a ring boundary")
        if self.boundary == "ring_backward" and self.forward_edge != 0:
            raise SpecError("ring_backward closes with backward_edge only")
        if self.boundary == "ring_forward" and self.backward_edge != 0:
            raise SpecError("ring_forward closes with forward_edge only")
        s = self.interface_site
        if s is None:
            return
        if self.boundary != "open":
            raise SpecError("an interface lattice must have open boundaries")
        if self.nnn_amplitude is not None:
            raise SpecError("an interface lattice has no NNN bonds")
        # lattice-I (bonds 1..s) hops backward only, lattice-II (bonds s..N-1)
        # forward only; bond s carries both
        for n in range(1, s):
            if self.forward[n - 1] != 0:
                raise SpecError(f"interface: forward bond {n} must be zero in lattice-I")
        for n in range(s + 1, self.n_sites):
            if self.backward[n - 1] != 0:
                raise SpecError(f"interface: backward bond {n} must be zero in lattice-II")

    # -- JSON ---------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "forward": [amplitude_to_json(x) for x in self.forward],
            "backward": [amplitude_to_json(x) for x in self.backward],
            "forward_edge": amplitude_to_json(self.forward_edge),
            "backward_edge": amplitude_to_json(self.backward_edge),
            "nnn_amplitude": None if self.nnn_amplitude is None else amplitude_to_json(self.nnn_amplitude),
            "boundary": self.boundary,
            "interface_site": self.interface_site,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSpec":
        allowed = {
            "n_sites", "forward", "backward", "forward_edge", "backward_edge",
            "nnn_amplitude", "boundary", "interface_site",
        }
        unknown = set(d) - allowed
        if unknown:
            raise SpecError(f"unknown LatticeSpec fields: {sorted(unknown)}")
        try:
            n = d["n_sites"]
            fwd = d["forward"]
            bwd = d["backward"]
        except KeyError as exc:
            raise SpecError(f"LatticeSpec missing field {exc.args[0]!r}") from None
        nnn = d.get("nnn_amplitude")
        return cls(
            n_sites=n,
            forward=tuple(amplitude_from_json(x) for x in fwd),
            backward=tuple(amplitude_from_json(x) for x in bwd),
            forward_edge=amplitude_from_json(d.get("forward_edge", 0)),
            backward_edge=amplitude_from_json(d.get("backward_edge", 0)),
            nnn_amplitude=None if nnn is None else amplitude_from_json(nnn),
            boundary=d.get("boundary", "open"),
            interface_site=d.get("interface_site"),
        )


def amplitude_to_json(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, complex):
        if x.imag == 0:
            return x.real
        return {"re": x.real, "im": x.imag}
    return x


def amplitude_from_json(x) -> Amplitude:
    """Numbers pass through; ``{"re", "im"}`` becomes complex; ``"p/q"`` a Fraction."""
    if isinstance(x, bool):
        raise SpecError(f"bad amplitude {x!r}")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"bad amplitude string {x!r}") from None
    if isinstance(x, dict) and set(x) <= {"re", "im"} and "re" in x:
        return complex(x["re"], x.get("im", 0.0))
    raise SpecError(f"bad amplitude {x!r}")


# -- standard families ---------------------------------------------------------

def _zeros(n):
    return (0,) * (n - 1)


def h1(n: int) -> LatticeSpec:
    """Unidirectional forward chain: a single Jordan block of size n."""
    return LatticeSpec(n, (1,) * (n - 1), _zeros(n))


def h2(n: int) -> LatticeSpec:
    return LatticeSpec(n, _zeros(n), (1,) * (n - 1))


def hermitian_chain(n: int, j: Amplitude = 1) -> LatticeSpec:
    return LatticeSpec(n, (j,) * (n - 1), (j,) * (n - 1))


def h1_nnn(n: int, nnn: Amplitude) -> LatticeSpec:
    return replace(h1(n), nnn_amplitude=nnn)


def ring_backward(n: int, g: Amplitude = 1) -> LatticeSpec:
    """H1 closed by a backward edge bond; stays nilpotent for every g."""
    return replace(h1(n), boundary="ring_backward", backward_edge=g)


def ring_forward(n: int, g: Amplitude = 1) -> LatticeSpec:
    """H1 closed by a forward edge bond; g = 1 is the periodic cyclic shift."""
    return replace(h1(n), boundary="ring_forward", forward_edge=g)


def interface(n: int, site: int | None = None) -> LatticeSpec:
    """Lattice-I (backward hopping) on sites 1..site joined to lattice-II (forward).

    Both lattices hop toward the interface.  ``site`` defaults to ``n // 2``,
    which for n = 10 gives the zero modes e4 - e6 and e5 - e7.
    """
    s = n // 2 if site is None else site
    fwd = tuple(1 if b >= s else 0 for b in range(1, n))
    bwd = tuple(1 if b <= s else 0 for b in range(1, n))
    return LatticeSpec(n, fwd, bwd, interface_site=s)


# -- matrix assembly -----------------------------------------------------------

def _assemble(n, fwd, bwd, fwd_edge, bwd_edge, nnn, boundary):
    h = np.zeros((n, n), dtype=complex)
    if n > 1:
        idx = np.arange(n - 1)
        h[idx, idx + 1] = fwd
        h[idx + 1, idx] = bwd
    if nnn is not None and n > 2:
        idx = np.arange(n - 2)
        h[idx, idx + 2] = nnn
    if boundary == "ring_backward":
        h[0, n - 1] += bwd_edge
    elif boundary == "ring_forward":
        h[n - 1, 0] += fwd_edge
    return h


def build_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    spec.validate()
    return _assemble(
        spec.n_sites,
        np.array([complex(x) for x in spec.forward], dtype=complex),
        np.array([complex(x) for x in spec.backward], dtype=complex),
        complex(spec.forward_edge),
        complex(spec.backward_edge),
        None if spec.nnn_amplitude is None else complex(spec.nnn_amplitude),
        spec.boundary,
    )


def build_exact(spec: LatticeSpec) -> RationalMatrix | None:
    """Exact rational matrix when every amplitude is an integer or Fraction."""
    if not spec.is_exact:
        return None
    spec.validate()
    n = spec.n_sites
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n - 1):
        m[i][i + 1] = Fraction(spec.forward[i])
        m[i + 1][i] = Fraction(spec.backward[i])
    if spec.nnn_amplitude is not None:
        for i in range(n - 2):
            m[i][i + 2] = Fraction(spec.nnn_amplitude)
    if spec.boundary == "ring_backward":
        m[0][n - 1] += Fraction(spec.backward_edge)
    elif spec.boundary == "ring_forward":
        m[n - 1][0] += Fraction(spec.forward_edge)
    return m


def reversal_conjugate(m) -> np.ndarray:
    """Site reversal n -> N+1-n applied to both matrix indices (R H R)."""
    m = np.asarray(m)
    if m.ndim == 1:
        return m[::-1].copy()
    if m.shape[0] != m.shape[1]:
        raise ValueError("reversal_conjugate expects a square matrix")
    return m[::-1, ::-1].copy()


# -- disorder ------------------------------------------------------------------

@dataclass(frozen=True)
class DisorderSpec:
    """Uniform coupling disorder with a hard floor ``|J| >= exclusion_radius``.

    Only bonds that are already nonzero in the targeted direction(s) are
    redrawn, so a unidirectional lattice stays unidirectional.
    """

    target: str = "forward"
    interval: tuple[float, float] = (-1.5, 1.5)
    exclusion_radius: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.target not in DISORDER_TARGETS:
            raise SpecError(f"disorder target must be one of {DISORDER_TARGETS}")
        lo, hi = self.interval
        object.__setattr__(self, "interval", (float(lo), float(hi)))
        if not lo < hi:
            raise SpecError(f"disorder interval needs lo < hi, got {self.interval}")
        if not self.exclusion_radius > 0:
            raise SpecError("exclusion_radius must be positive")
        if not 0 <= self.seed < 2**64:
            raise SpecError("seed must be a 64-bit unsigned integer")


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; the single generator used for every random draw."""
    return np.random.Generator(np.random.PCG64(seed))


def _draw(rng, lo, hi, jmin) -> float:
    while True:
        x = float(rng.uniform(lo, hi))
        if abs(x) >= jmin:
            return x


def sample_disorder(spec_in: LatticeSpec, d: DisorderSpec) -> LatticeSpec:
    """Redraw targeted couplings; forward bonds first, then backward, in bond order.

    Edge bonds follow their direction's bulk bonds.
    """
    lo, hi = d.interval
    if d.exclusion_radius >= max(abs(lo), abs(hi)):
        raise SpecError("disorder admissible set is empty: exclusion_radius too large")
    rng = make_rng(d.seed)

    def redraw(bonds, edge):
        new = [_draw(rng, lo, hi, d.exclusion_radius) if b != 0 else b for b in bonds]
        if edge != 0:
            edge = _draw(rng, lo, hi, d.exclusion_radius)
        return tuple(new), edge

    fwd, fe = spec_in.forward, spec_in.forward_edge
    bwd, be = spec_in.backward, spec_in.backward_edge
    if d.target in ("forward", "both"):
        fwd, fe = redraw(fwd, fe)
    if d.target in ("backward", "both"):
        bwd, be = redraw(bwd, be)
    return replace(spec_in, forward=fwd, backward=bwd, forward_edge=fe, backward_edge=be)


# -- time dependence -----------------------------------------------------------

@dataclass(frozen=True)
class TimeDependentCouplingSpec:
    """Closed-form coupling rules evaluated at arbitrary t.

    ``uniform_sine``   J^F_n = base + depth * sin(omega t)
    ``random_sine``    J^F_n = base + R_n + depth * sin(R'_n omega t)
    ``cos_sin_path``   J^F_n = cos(omega t), J^B_n = sin(omega t) on every bond
    ``ring_closure``   J^B_N = base * t  (edge-bond ramp for ring_backward)
    """

    profile: str = "uniform_sine"
    base: float = 1.0
    modulation_depth: float = 0.5
    omega: float = 1.0
    static_offsets: tuple = ()
    frequency_factors: tuple = ()

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise SpecError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        object.__setattr__(self, "static_offsets", tuple(float(x) for x in self.static_offsets))
        object.__setattr__(self, "frequency_factors", tuple(float(x) for x in self.frequency_factors))
        if self.profile == "random_sine":
            if len(self.static_offsets) != len(self.frequency_factors):
                raise SpecError("static_offsets and frequency_factors must have equal length")
            for x in (*self.static_offsets, *self.frequency_factors):
                if not -0.5 <= x <= 0.5:
                    raise SpecError("random_sine offsets and factors must lie in [-0.5, 0.5]")


def sample_modulation(n_bonds: int, seed: int, base: float = 1.0,
                      modulation_depth: float = 0.5, omega: float = 1.0) -> TimeDependentCouplingSpec:
    """random_sine rule with R_n then R'_n drawn uniformly from [-0.5, 0.5]."""
    rng = make_rng(seed)
    offsets = tuple(float(x) for x in rng.uniform(-0.5, 0.5, n_bonds))
    factors = tuple(float(x) for x in rng.uniform(-0.5, 0.5, n_bonds))
    return TimeDependentCouplingSpec("random_sine", base, modulation_depth, omega, offsets, factors)


@dataclass
class HamiltonianFamily:
    """A lattice plus an optional time rule; ``at(t)`` gives the matrix H(t)."""

    spec: LatticeSpec
    time_rule: TimeDependentCouplingSpec | None = None
    _static: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.spec.validate()
        rule = self.time_rule
        if rule is None:
            self._static = build_hamiltonian(self.spec)
            self._static.setflags(write=False)
            return
        nb = self.spec.n_sites - 1
        if rule.profile == "random_sine" and len(rule.static_offsets) != nb:
            raise SpecError(f"random_sine needs {nb} per-bond offsets, got {len(rule.static_offsets)}")
        if rule.profile == "ring_closure" and self.spec.boundary != "ring_backward":
            raise SpecError("ring_closure profile needs a ring_backward lattice")
        if self.spec.interface_site is not None:
            raise SpecError("time rules are not defined for interface lattices")

    @property
    def is_constant(self) -> bool:
        return self.time_rule is None

    def at(self, t: float) -> np.ndarray:
        if self._static is not None:
            return self._static
        s, rule = self.spec, self.time_rule
        fwd = np.array([complex(x) for x in s.forward], dtype=complex)
        bwd = np.array([complex(x) for x in s.backward], dtype=complex)
        fe, be = complex(s.forward_edge), complex(s.backward_edge)
        wt = rule.omega * t
        if rule.profile == "uniform_sine":
            fwd[:] = rule.base + rule.modulation_depth * math.sin(wt)
        elif rule.profile == "random_sine":
            r = np.array(rule.static_offsets)
            rp = np.array(rule.frequency_factors)
            fwd[:] = rule.base + r + rule.modulation_depth * np.sin(rp * wt)
        elif rule.profile == "cos_sin_path":
            fwd[:] = math.cos(wt)
            bwd[:] = math.sin(wt)
        elif rule.profile == "ring_closure":
            be = complex(rule.base * t)
        nnn = None if s.nnn_amplitude is None else complex(s.nnn_amplitude)
        return _assemble(s.n_sites, fwd, bwd, fe, be, nnn, s.boundary)


def family_at(family: HamiltonianFamily, t: float) -> np.ndarray:
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    return family.at(t)


def ring_closure_family(n: int) -> HamiltonianFamily:
    """Edge bond J^B_N ramped linearly with the parameter (J^B_N = g)."""
    return HamiltonianFamily(ring_backward(n, 0), TimeDependentCouplingSpec("ring_closure", base=1.0))


def cos_sin_family(n: int, omega: float = 1.0) -> HamiltonianFamily:
    """H1 at omega t = 0 rotating into H2 at omega t = pi/2."""
    return HamiltonianFamily(h1(n), TimeDependentCouplingSpec("cos_sin_path", omega=omega))
