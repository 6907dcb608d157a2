"""Time evolution i d/dt psi = H(t) psi with per-step renormalization.

Non-Hermitian evolution does not conserve sum |psi_n|^2; for the H1 chain
started on the far edge it grows like t^(2(N-1)).  The integrator therefore
stores unit-normalized states and carries the growth separately as a
log-intensity, which is exact for a linear equation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import numlin
from .epn import nilpotency_index
from .errors import EvolutionError, NotNilpotentError
from .lattice import HamiltonianFamily


@dataclass
class EvolutionConfig:
    t_max: float
    dt: float | None = None
    snapshot_stride: int = 1
    target_state: np.ndarray | None = None
    renormalize_every_step: bool = True

    def __post_init__(self):
        if self.dt is None:
            self.dt = min(1e-2, self.t_max / 1e4)
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max >= self.dt:
            raise ValueError("t_max must be at least dt")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")
        if not self.renormalize_every_step:
            raise ValueError("renormalize_every_step is fixed to True")
        if self.target_state is not None:
            self.target_state = np.asarray(self.target_state, dtype=complex)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # (snapshots, sites), unit-normalized rows
    log_intensity: np.ndarray
    fidelity: np.ndarray | None = None

    @property
    def densities(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    @property
    def n_sites(self) -> int:
        return self.states.shape[1]

    def to_csv(self) -> str:
        """CSV text with header ``t,log_intensity,fidelity,d1..dN``.

        Floats are written with ``repr`` so identical runs give identical bytes.
        Without a target state the fidelity column holds ``nan``.
        """
        buf = io.StringIO()
        cols = ["t", "log_intensity", "fidelity"] + [f"d{i}" for i in range(1, self.n_sites + 1)]
        buf.write(",".join(cols) + "\n")
        dens = self.densities
        for i, t in enumerate(self.times):
            fid = self.fidelity[i] if self.fidelity is not None else math.nan
            row = [t, self.log_intensity[i], fid, *dens[i]]
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()


def _normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("state must be nonzero and finite")
    return v / norm


def evolve(family: HamiltonianFamily, psi0, cfg: EvolutionConfig) -> TrajectoryRecord:
    """Classical RK4 on d psi/dt = -i H(t) psi.

    H is evaluated at t, t + dt/2 and t + dt of every step.  After each step
    the state is rescaled to unit norm and ``2 ln ||psi||`` is added to the
    log-intensity.
    """
    n = family.spec.n_sites
    psi = _normalize(psi0)
    if psi.shape != (n,):
        raise ValueError(f"psi0 must have dimension {n}")
    target = None if cfg.target_state is None else _normalize(cfg.target_state)
    if target is not None and target.shape != (n,):
        raise ValueError(f"target_state must have dimension {n}")

    dt = cfg.dt
    stride = int(cfg.snapshot_stride)
    times, states, logs = [0.0], [psi.copy()], [0.0]
    log_i = 0.0
    for k in range(cfg.n_steps):
        t = k * dt
        h0 = family.at(t)
        hm = family.at(t + 0.5 * dt)
        h1 = family.at(t + dt)
        # overflow is reported below as EvolutionError
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = -1j * (h0 @ psi)
            k2 = -1j * (hm @ (psi + 0.5 * dt * k1))
            k3 = -1j * (hm @ (psi + 0.5 * dt * k2))
            k4 = -1j * (h1 @ (psi + dt * k3))
            nxt = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            norm = float(np.linalg.norm(nxt))
        if not (np.isfinite(norm) and norm > 0):
            raise EvolutionError(f"state became non-finite after t = {t!r}", last_good_time=t)
        psi = nxt / norm
        log_i += 2.0 * math.log(norm)
        if (k + 1) % stride == 0:
            times.append((k + 1) * dt)
            states.append(psi.copy())
            logs.append(log_i)

    states_arr = np.array(states)
    fid = None
    if target is not None:
        fid = np.abs(states_arr @ np.conj(target)) ** 2
    return TrajectoryRecord(np.array(times), states_arr, np.array(logs), fid)


def exact_nilpotent_propagator(h, t: float) -> np.ndarray:
    """U(t) = sum_{k<p} (-i t)^k H^k / k!, exact for constant nilpotent H."""
    h = numlin.as_matrix(h)
    p = nilpotency_index(h)
    if p is None:
        raise NotNilpotentError("exact propagator requires a nilpotent matrix")
    n = h.shape[0]
    u = np.zeros((n, n), dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(p):
        u += term
        term = term @ h * (-1j * t) / (k + 1)
    return u


def convergence_time(record: TrajectoryRecord, epsilon: float) -> float | None:
    """Earliest snapshot time after which fidelity never drops below 1 - epsilon."""
    if record.fidelity is None:
        raise ValueError("record has no fidelity series (no target_state)")
    below = np.nonzero(record.fidelity < 1.0 - epsilon)[0]
    if below.size == 0:
        return float(record.times[0])
    last = int(below[-1])
    if last + 1 >= len(record.times):
        return None
    return float(record.times[last + 1])


def growth_exponent(record: TrajectoryRecord, window: tuple[float, float]) -> float:
    """Least-squares slope of log-intensity against ln t inside ``window``."""
    lo, hi = window
    t = record.times
    mask = (t >= lo) & (t <= hi) & (t > 0)
    if mask.sum() < 2 or not hi > lo:
        raise ValueError(f"window {window} holds fewer than two usable snapshots")
    slope, _ = np.polyfit(np.log(t[mask]), record.log_intensity[mask], 1)
    return float(slope)
