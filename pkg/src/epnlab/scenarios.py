"""Scenario files: parsing, single runs, seeded ensembles, report emission.

A scenario is one JSON document.  ``model`` names a standard lattice
(``H1``, ``H2``, ``H1_nnn``, ``hermitian``, ``interface``, ``ring_backward``,
``ring_forward``) sized by ``n``, or points at a LatticeSpec JSON file, or
holds an inline LatticeSpec object.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, ValidationInfo, field_validator, model_validator

from . import lattice as lat
from . import numlin
from .dynamics import EvolutionConfig, TrajectoryRecord, convergence_time, evolve, growth_exponent
from .epn import adiabatic_path_check, epn_check, jordan_chain
from .errors import AnalysisError, EpnlabError, SpecError
from .jsonio import complex_from_json, complex_to_json, dumps, vector_to_json

NAMED_MODELS = ("H1", "H2", "H1_nnn", "hermitian", "interface", "ring_backward", "ring_forward")
Analysis = Literal["epn_check", "spectrum", "jordan_chain", "path_check", "evolve"]
Output = Literal["json_report", "csv_trajectory", "pgm_heatmap"]


class ScenarioError(EpnlabError):
    """Scenario text is malformed or fails validation (CLI exit code 1)."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelParams(_Strict):
    nnn_amplitude: Optional[float] = None
    interface_site: Optional[int] = None
    edge_coupling: float = 1.0
    coupling: float = 1.0


class DisorderModel(_Strict):
    target: Literal["forward", "backward", "both"] = "forward"
    interval: tuple[float, float] = (-1.5, 1.5)
    exclusion_radius: float = 0.1


class TimeRuleModel(_Strict):
    profile: Literal["uniform_sine", "random_sine", "cos_sin_path", "ring_closure"]
    base: float = 1.0
    modulation_depth: float = 0.5
    omega: float = 1.0
    static_offsets: Optional[list[float]] = None
    frequency_factors: Optional[list[float]] = None


class PathModel(_Strict):
    start: float
    stop: float
    num: int = Field(101, ge=1)


ComplexJson = Union[float, dict[str, float]]


class EvolutionModel(_Strict):
    t_max: float = Field(gt=0)
    dt: Optional[float] = Field(None, gt=0)
    snapshot_stride: int = Field(1, ge=1)
    initial_site: Optional[int] = Field(None, ge=1)
    initial_state: Optional[list[ComplexJson]] = None
    target_site: Optional[int] = Field(None, ge=1)
    target_state: Optional[list[ComplexJson]] = None
    convergence_epsilon: float = Field(0.01, gt=0, lt=1)
    growth_window: Optional[tuple[float, float]] = None

    @model_validator(mode="after")
    def _one_initial(self):
        if (self.initial_site is None) == (self.initial_state is None):
            raise ValueError("give exactly one of initial_site or initial_state")
        if self.target_site is not None and self.target_state is not None:
            raise ValueError("give at most one of target_site or target_state")
        return self


class ScenarioConfig(_Strict):
    name: str = Field(min_length=1)
    model: Union[str, dict[str, Any]]
    n: Optional[int] = Field(None, ge=1)
    model_params: ModelParams = ModelParams()
    disorder: Optional[DisorderModel] = None
    time_rule: Optional[TimeRuleModel] = None
    path: Optional[PathModel] = None
    analysis: list[Analysis] = Field(min_length=1)
    evolution: Optional[EvolutionModel] = None
    ensemble_trials: int = Field(1, ge=1)
    master_seed: int = Field(0, ge=0, lt=2**64)
    outputs: list[Output] = ["json_report"]

    _lattice: lat.LatticeSpec = PrivateAttr()

    @field_validator("name")
    @classmethod
    def _safe_name(cls, v):
        if any(c in v for c in "/\\") or v in (".", ".."):
            raise ValueError("name must not contain path separators")
        return v

    @model_validator(mode="after")
    def _consistency(self, info: ValidationInfo):
        if "evolve" in self.analysis and self.evolution is None:
            raise ValueError("analysis 'evolve' requires an 'evolution' section")
        if "path_check" in self.analysis and (self.path is None or self.time_rule is None):
            raise ValueError("analysis 'path_check' requires 'path' and 'time_rule' sections")
        if {"csv_trajectory", "pgm_heatmap"} & set(self.outputs) and "evolve" not in self.analysis:
            raise ValueError("trajectory outputs require analysis 'evolve'")
        base_dir = (info.context or {}).get("base_dir")
        try:
            self._lattice = _resolve_model(self, base_dir)
            self._lattice.validate()
            if self.time_rule is not None:
                lat.HamiltonianFamily(self._lattice, _time_rule(self, 0))
        except (SpecError, OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"model: {exc}") from exc
        if self.evolution is not None:
            n = self._lattice.n_sites
            ev = self.evolution
            for label, site in (("initial_site", ev.initial_site), ("target_site", ev.target_site)):
                if site is not None and site > n:
                    raise ValueError(f"evolution.{label} {site} exceeds n_sites {n}")
            for label, vec in (("initial_state", ev.initial_state), ("target_state", ev.target_state)):
                if vec is not None and len(vec) != n:
                    raise ValueError(f"evolution.{label} must have {n} entries")
        return self

    @property
    def lattice(self) -> lat.LatticeSpec:
        return self._lattice


def _resolve_model(cfg: ScenarioConfig, base_dir) -> lat.LatticeSpec:
    m = cfg.model
    if isinstance(m, dict):
        return lat.LatticeSpec.from_dict(m)
    if m.endswith(".json"):
        path = Path(m)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        return lat.LatticeSpec.from_dict(json.loads(path.read_text(encoding="utf-8")))
    if m not in NAMED_MODELS:
        raise SpecError(f"unknown model {m!r}; expected one of {NAMED_MODELS} or a .json path")
    if cfg.n is None:
        raise SpecError(f"named model {m!r} needs 'n'")
    n, p = cfg.n, cfg.model_params
    if m == "H1":
        return lat.h1(n)
    if m == "H2":
        return lat.h2(n)
    if m == "hermitian":
        return lat.hermitian_chain(n, p.coupling)
    if m == "H1_nnn":
        if p.nnn_amplitude is None:
            raise SpecError("H1_nnn needs model_params.nnn_amplitude")
        return lat.h1_nnn(n, p.nnn_amplitude)
    if m == "interface":
        return lat.interface(n, p.interface_site)
    if m == "ring_backward":
        return lat.ring_backward(n, p.edge_coupling)
    return lat.ring_forward(n, p.edge_coupling)


def parse_scenario(text: str, base_dir=None) -> ScenarioConfig:
    """Parse and validate a scenario document.

    Raises :class:`ScenarioError` with line/column for malformed JSON and
    with the offending field for semantic violations.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        return ScenarioConfig.model_validate(data, context={"base_dir": base_dir})
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            loc = ".".join(str(x) for x in err["loc"]) or "<root>"
            msgs.append(f"{loc}: {err['msg']}")
        raise ScenarioError("invalid scenario: " + "; ".join(msgs)) from None


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), base_dir=path.parent)


def shipped_scenarios() -> dict[str, Path]:
    """Example scenarios bundled with the package, keyed by file name."""
    root = resources.files("epnlab") / "scenarios"
    return {p.name: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name) if p.name.endswith(".json")}


# -- seeds -------------------------------------------------------------------

def derive_seed(master_seed: int, trial_index: int, stream: int = 0) -> int:
    """64-bit seed from (master_seed, trial_index, stream) via numpy's SeedSequence hash.

    Depends only on its arguments, so trials can run in any order.
    """
    ss = np.random.SeedSequence([master_seed, trial_index, stream])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _time_rule(cfg: ScenarioConfig, seed: int) -> lat.TimeDependentCouplingSpec | None:
    r = cfg.time_rule
    if r is None:
        return None
    if r.profile == "random_sine" and r.static_offsets is None:
        rule = lat.sample_modulation(cfg.lattice.n_sites - 1, seed, r.base, r.modulation_depth, r.omega)
        if r.frequency_factors is not None:
            rule = lat.TimeDependentCouplingSpec(
                rule.profile, rule.base, rule.modulation_depth, rule.omega,
                rule.static_offsets, r.frequency_factors,
            )
        return rule
    return lat.TimeDependentCouplingSpec(
        r.profile, r.base, r.modulation_depth, r.omega,
        tuple(r.static_offsets or ()), tuple(r.frequency_factors or ()),
    )


# -- running -------------------------------------------------------------------

@dataclass
class EnsembleSummary:
    trials: int
    epn_pass_count: int
    max_kernel_deviation: float | None
    eigenvalue_drift: float | None

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "epn_pass_count": self.epn_pass_count,
            "max_kernel_deviation": self.max_kernel_deviation,
            "eigenvalue_drift": self.eigenvalue_drift,
        }


@dataclass
class TrialResult:
    index: int
    seed: int
    results: list[dict]
    trajectory: TrajectoryRecord | None = None
    is_epn: bool | None = None
    kernel: list[np.ndarray] | None = None
    zero_mode_energy: float | None = None
    failed: bool = False


@dataclass
class RunOutcome:
    exit_code: int
    report: dict
    files: list[Path] = field(default_factory=list)


def _vector(site, state, n) -> np.ndarray | None:
    if site is not None:
        v = np.zeros(n, dtype=complex)
        v[site - 1] = 1.0
        return v
    if state is not None:
        return np.array([complex_from_json(x) for x in state], dtype=complex)
    return None


def kernel_deviation(kernel, reference) -> float:
    """Max-norm distance between canonicalized kernel bases (inf on dimension mismatch)."""
    if len(kernel) != len(reference):
        return math.inf
    if not kernel:
        return 0.0
    return float(max(np.abs(a - b).max() for a, b in zip(kernel, reference)))


def run_trial(cfg: ScenarioConfig, index: int) -> TrialResult:
    """Run every analysis for one trial.  Pure in (cfg, index)."""
    seed = derive_seed(cfg.master_seed, index)
    spec = cfg.lattice
    if cfg.disorder is not None:
        d = cfg.disorder
        spec = lat.sample_disorder(spec, lat.DisorderSpec(d.target, d.interval, d.exclusion_radius,
                                                          derive_seed(cfg.master_seed, index, 0)))
    rule = _time_rule(cfg, derive_seed(cfg.master_seed, index, 1))
    family = lat.HamiltonianFamily(spec, rule)
    h = lat.build_hamiltonian(spec)
    out = TrialResult(index, seed, [])

    for name in cfg.analysis:
        entry: dict[str, Any] = {"analysis": name, "trial": index}
        try:
            if name == "epn_check":
                exact = lat.build_exact(spec)
                rep = epn_check(h, exact=exact)
                entry["backend"] = "exact" if exact is not None else "float"
                entry["report"] = rep.to_dict()
                out.is_epn, out.kernel = rep.is_epn, rep.kernel
            elif name == "spectrum":
                pairs = numlin.eig(h)
                entry["eigenpairs"] = [
                    {"value": complex_to_json(p.value), "multiplicity": p.multiplicity,
                     "vectors": [vector_to_json(v) for v in p.vectors]}
                    for p in pairs
                ]
                out.zero_mode_energy = float(min(abs(p.value) for p in pairs))
            elif name == "jordan_chain":
                entry["chain"] = jordan_chain(h).to_dict()
            elif name == "path_check":
                p = cfg.path
                grid = np.linspace(p.start, p.stop, p.num)
                entry["verdict"] = adiabatic_path_check(family, grid).to_dict()
            elif name == "evolve":
                ev = cfg.evolution
                n = spec.n_sites
                ec = EvolutionConfig(t_max=ev.t_max, dt=ev.dt, snapshot_stride=ev.snapshot_stride,
                                     target_state=_vector(ev.target_site, ev.target_state, n))
                rec = evolve(family, _vector(ev.initial_site, ev.initial_state, n), ec)
                out.trajectory = rec
                res = {
                    "snapshots": len(rec.times),
                    "final_time": float(rec.times[-1]),
                    "final_log_intensity": float(rec.log_intensity[-1]),
                    "max_abs_log_intensity": float(np.abs(rec.log_intensity).max()),
                }
                if rec.fidelity is not None:
                    res["final_fidelity"] = float(rec.fidelity[-1])
                    res["min_fidelity"] = float(rec.fidelity.min())
                    res["convergence_time"] = convergence_time(rec, ev.convergence_epsilon)
                if ev.growth_window is not None:
                    res["growth_exponent"] = growth_exponent(rec, ev.growth_window)
                entry["evolution"] = res
        except (AnalysisError, ValueError, np.linalg.LinAlgError) as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            out.failed = True
        out.results.append(entry)
    return out


def run_trials(cfg: ScenarioConfig, order=None, workers: int = 1) -> list[TrialResult]:
    """Run all trials (in ``order`` if given) and return them sorted by index."""
    indices = list(range(cfg.ensemble_trials)) if order is None else list(order)
    if sorted(indices) != list(range(cfg.ensemble_trials)):
        raise ValueError("order must be a permutation of the trial indices")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: run_trial(cfg, i), indices))
    else:
        results = [run_trial(cfg, i) for i in indices]
    return sorted(results, key=lambda r: r.index)


def summarize(cfg: ScenarioConfig, trials: list[TrialResult]) -> EnsembleSummary:
    """Aggregate per-trial verdicts.

    ``max_kernel_deviation`` compares each trial's kernel to that of the clean
    (disorder-free) lattice; ``eigenvalue_drift`` is the largest modulus of
    the eigenvalue nearest zero over all trials.
    """
    checked = [t for t in trials if t.is_epn is not None]
    dev = None
    if checked:
        clean = epn_check(lat.build_hamiltonian(cfg.lattice)).kernel
        dev = max(kernel_deviation(t.kernel, clean) for t in checked)
    energies = [t.zero_mode_energy for t in trials if t.zero_mode_energy is not None]
    return EnsembleSummary(
        trials=len(trials),
        epn_pass_count=sum(1 for t in checked if t.is_epn),
        max_kernel_deviation=dev,
        eigenvalue_drift=max(energies) if energies else None,
    )


def emit_heatmap(record: TrajectoryRecord, path) -> Path:
    """8-bit binary PGM: one row per snapshot (time downward), one column per site."""
    dens = record.densities
    if dens.size == 0:
        raise ValueError("empty trajectory")
    gray = np.clip(np.floor(255.0 * dens + 0.5), 0, 255).astype(np.uint8)
    rows, cols = gray.shape
    path = Path(path)
    path.write_bytes(f"P5\n{cols} {rows}\n255\n".encode("ascii") + gray.tobytes())
    return path


def run_scenario(cfg: ScenarioConfig, out_dir, workers: int = 1) -> RunOutcome:
    """Execute ``cfg`` and write its declared outputs into ``out_dir``.

    Exit code 0 on success, 2 if any analysis failed.  I/O errors propagate
    as ``OSError``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials = run_trials(cfg, workers=workers)
    summary = summarize(cfg, trials)
    report = {
        "scenario": cfg.name,
        "config_echo": cfg.model_dump(mode="json"),
        "results": [r for t in trials for r in t.results],
        "summary": summary.to_dict(),
    }
    files = []
    multi = len(trials) > 1
    for t in trials:
        if t.trajectory is None:
            continue
        stem = f"{cfg.name}_trial{t.index:03d}" if multi else cfg.name
        if "csv_trajectory" in cfg.outputs:
            p = out_dir / f"{stem}.csv"
            p.write_text(t.trajectory.to_csv(), encoding="utf-8")
            files.append(p)
        if "pgm_heatmap" in cfg.outputs:
            files.append(emit_heatmap(t.trajectory, out_dir / f"{stem}.pgm"))
    if "json_report" in cfg.outputs:
        p = out_dir / f"{cfg.name}.json"
        p.write_text(dumps(report), encoding="utf-8")
        files.append(p)
    code = 2 if any(t.failed for t in trials) else 0
    return RunOutcome(code, report, files)
