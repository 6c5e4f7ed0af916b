"""Parameter sweeps over (alpha, tau), the EMFT-vs-exact comparator and
CSV emission.

Output is deterministic: grid points are evaluated (possibly in worker
processes), gathered, and written alpha-major / tau-minor with floats at 17
significant digits. Metadata goes into a trailing block of ``#`` lines.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable

import numpy as np

from . import __version__
from .emft import (
    QuenchProtocol,
    evolve_fixed_point_trajectory,
    evolve_tdscf,
    static_fixed_point,
)
from .exactchain import ChainSpec, exact_entanglement_trajectory
from .extrema import count_extrema

MODES = ("emft-fixed", "emft-tdscf", "exact", "compare")
SWEEP_COLUMNS = ("alpha", "tau", "C", "log_negativity", "converged", "iterations", "residual")
COMPARE_COLUMNS = ("tau", "L_emft", "L_exact")


class ConfigError(ValueError):
    """Invalid sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    alpha_min: float = 0.594
    alpha_max: float = 0.594
    alpha_steps: int = 1
    tau_max: float = 15.0
    tau_steps: int = 600
    nu_e: int = 1
    chain_n: int = 512
    mode: str = "emft-fixed"
    out: str = "-"
    extrema_eps: float = 0.01
    strict: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}; got {self.mode!r}")
        for name in ("alpha_min", "alpha_max", "tau_max", "extrema_eps"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        for name in ("alpha_steps", "tau_steps", "nu_e", "threads"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.alpha_min > self.alpha_max:
            raise ConfigError("alpha_min must not exceed alpha_max")
        if self.alpha_steps > 1 and self.alpha_min == self.alpha_max:
            raise ConfigError("alpha_steps > 1 needs alpha_min < alpha_max")
        if not self.tau_max > 0:
            raise ConfigError("tau_max must be positive")
        if not self.extrema_eps > 0:
            raise ConfigError("extrema_eps must be positive")
        if any(a == 0 for a in self.alphas):
            raise ConfigError("the alpha grid must not contain 0 (the pre-quench field is nonzero)")
        if self.mode in ("exact", "compare"):
            try:
                ChainSpec(self.chain_n)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.mode == "compare":
            if self.alpha_steps != 1:
                raise ConfigError("compare runs a single alpha")
            if self.nu_e != 1:
                raise ConfigError("compare needs nu_e = 1 (the chain)")
            if self.tau_steps < 3:
                raise ConfigError("compare needs at least 3 tau points")

    @property
    def alphas(self) -> np.ndarray:
        if self.alpha_steps == 1:
            return np.array([float(self.alpha_min)])
        return np.linspace(self.alpha_min, self.alpha_max, self.alpha_steps)

    @property
    def taus(self) -> np.ndarray:
        if self.tau_steps == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.tau_max, self.tau_steps)

    def echo(self) -> list[tuple[str, str]]:
        """``(key, value)`` pairs for the metadata block; excludes options that
        do not affect the numbers."""
        skip = {"out", "threads"}
        return [(f.name, _fmt(getattr(self, f.name))) for f in fields(self) if f.name not in skip]


@dataclass
class SweepResult:
    """Records ``(alpha, tau, C, L, converged, iterations, residual)`` in
    alpha-major, tau-minor order."""

    records: list[tuple]
    metadata: dict = field(default_factory=dict)

    @property
    def all_converged(self) -> bool:
        return all(r[4] for r in self.records)

    def column(self, name: str) -> np.ndarray:
        i = SWEEP_COLUMNS.index(name)
        return np.array([r[i] for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for rec in self.records:
            w.writerow([_fmt(v) for v in rec])
        _write_meta(buf, self.metadata.items())
        return buf.getvalue()

    def write_csv(self, path: str) -> None:
        _write_text(path, self.to_csv())


@dataclass
class CompareReport:
    tau: np.ndarray
    L_emft: np.ndarray
    L_exact: np.ndarray
    crests_emft: int
    troughs_emft: int
    crests_exact: int
    troughs_exact: int
    converged: bool
    metadata: dict = field(default_factory=dict)

    @property
    def counts_equal(self) -> bool:
        return self.crests_emft == self.crests_exact and self.troughs_emft == self.troughs_exact

    def summary(self) -> dict:
        return {
            "crests_emft": self.crests_emft,
            "troughs_emft": self.troughs_emft,
            "crests_exact": self.crests_exact,
            "troughs_exact": self.troughs_exact,
            "counts_equal": self.counts_equal,
            "emft_converged": self.converged,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for row in zip(self.tau, self.L_emft, self.L_exact):
            w.writerow([_fmt(v) for v in row])
        _write_meta(buf, list(self.metadata.items()) + list(self.summary().items()))
        return buf.getvalue()

    def write_csv(self, path: str) -> None:
        _write_text(path, self.to_csv())


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_meta(buf, items: Iterable[tuple[str, object]]) -> None:
    for k, v in items:
        buf.write(f"# {k} = {_fmt(v)}\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_csv(text: str) -> tuple[list[dict], dict]:
    """Parse emitted CSV text into ``(rows, metadata)``.

    Numeric fields come back as ``float`` (``int`` for ``converged`` and
    ``iterations``); metadata values stay strings.
    """
    data_lines, meta = [], {}
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif line:
            data_lines.append(line)
    rows = []
    for rec in csv.DictReader(data_lines):
        rows.append({k: int(v) if k in ("converged", "iterations") else float(v) for k, v in rec.items()})
    return rows, meta


def _metadata(config: SweepConfig, mode: str, nu_e: int) -> dict:
    meta = {"tool": "emftdyn", "version": __version__, "mode": mode, "nu_e": nu_e, "chain_n": config.chain_n}
    meta.update({f"config.{k}": v for k, v in config.echo()})
    return meta


def _map_ordered(fn, args: list, threads: int) -> list:
    if threads <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]


def _emft_rows(alpha: float, nu_e: int, mode: str, taus: np.ndarray) -> list[tuple]:
    protocol = QuenchProtocol.from_alpha(alpha, nu_e=nu_e)
    initial = static_fixed_point(protocol)
    if mode == "emft-tdscf":
        traj = evolve_tdscf(protocol, taus, initial=initial)
    else:
        traj = evolve_fixed_point_trajectory(protocol, taus, initial=initial)
    return [
        (float(alpha), float(t), float(c), float(l), bool(ok), int(it), float(res))
        for t, c, l, ok, it, res in zip(traj.tau, traj.C, traj.L, traj.converged, traj.iterations, traj.residual)
    ]


def _exact_rows(alpha: float, chain_n: int, taus: np.ndarray) -> list[tuple]:
    traj = exact_entanglement_trajectory(ChainSpec(chain_n), alpha, taus)
    return [(float(alpha), float(t), float(c), float(l), True, 0, 0.0) for t, c, l in zip(traj.tau, traj.C, traj.L)]


def run_emft_sweep(config: SweepConfig) -> SweepResult:
    """EMFT log-negativity on the (alpha, tau) grid, one trajectory per alpha."""
    if config.mode not in ("emft-fixed", "emft-tdscf"):
        raise ConfigError(f"EMFT sweep needs mode emft-fixed or emft-tdscf, got {config.mode!r}")
    taus = config.taus
    chunks = _map_ordered(_emft_rows, [(a, config.nu_e, config.mode, taus) for a in config.alphas], config.threads)
    records = [r for chunk in chunks for r in chunk]
    return SweepResult(records, _metadata(config, config.mode, config.nu_e))


def run_exact_sweep(config: SweepConfig) -> SweepResult:
    """Exact chain sweep; the EMFT coordination number is irrelevant and
    reported as 1 (a chain)."""
    if config.mode != "exact":
        raise ConfigError(f"exact sweep needs mode exact, got {config.mode!r}")
    taus = config.taus
    chunks = _map_ordered(_exact_rows, [(a, config.chain_n, taus) for a in config.alphas], config.threads)
    records = [r for chunk in chunks for r in chunk]
    return SweepResult(records, _metadata(config, "exact", 1))


def compare_sections(config: SweepConfig) -> CompareReport:
    """EMFT (nu_E = 1) and exact trajectories at one alpha, with crest and
    trough counts for both."""
    if config.mode != "compare":
        raise ConfigError(f"comparison needs mode compare, got {config.mode!r}")
    alpha = float(config.alphas[0])
    taus = config.taus
    emft = evolve_fixed_point_trajectory(QuenchProtocol.from_alpha(alpha, nu_e=1), taus)
    exact = exact_entanglement_trajectory(ChainSpec(config.chain_n), alpha, taus)
    ce, te = count_extrema(emft.L, config.extrema_eps)
    cx, tx = count_extrema(exact.L, config.extrema_eps)
    return CompareReport(
        tau=taus,
        L_emft=emft.L,
        L_exact=exact.L,
        crests_emft=ce,
        troughs_emft=te,
        crests_exact=cx,
        troughs_exact=tx,
        converged=bool(np.all(emft.converged)),
        metadata=_metadata(config, "compare", 1),
    )


def static_report(alpha: float, nu_e: int = 1) -> dict:
    sol = static_fixed_point(QuenchProtocol.from_alpha(alpha, nu_e=nu_e))
    return {
        "alpha": float(alpha),
        "nu_e": nu_e,
        "C": sol.C,
        "log_negativity": sol.log_negativity,
        "energy": sol.energy,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "residual": sol.residual,
    }
