"""Command line front-end.

Subcommands ``static``, ``emft-sweep``, ``exact-sweep`` and ``compare``
share one set of options. Values come from, in increasing precedence,
built-in defaults, a ``--config`` file (``key = value`` lines mirroring the
long option names) and the command line.

Exit codes: 0 success, 2 invalid configuration, 3 solver non-convergence
with ``--strict``, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from . import __version__
from .harness import (
    ConfigError,
    SweepConfig,
    compare_sections,
    run_emft_sweep,
    run_exact_sweep,
    static_report,
)

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_IO = 0, 2, 3, 4

_TYPES = {
    "alpha": float,
    "alpha_min": float,
    "alpha_max": float,
    "alpha_steps": int,
    "tau_max": float,
    "tau_steps": int,
    "nu_e": int,
    "chain_n": int,
    "mode": str,
    "out": str,
    "extrema_eps": float,
    "strict": None,  # boolean, parsed separately
    "threads": int,
}

_SUBCOMMAND_MODE = {"emft-sweep": "emft-fixed", "exact-sweep": "exact", "compare": "compare", "static": None}
_ALLOWED_MODES = {
    "emft-sweep": ("emft-fixed", "emft-tdscf"),
    "exact-sweep": ("exact",),
    "compare": ("compare",),
    "static": ("emft-fixed",),
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def read_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` file. Blank lines and ``#`` comments are
    skipped; keys may use dashes or underscores."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _TYPES:
            raise ConfigError(f"{path}:{n}: expected 'key = value' with a known key, got {raw.strip()!r}")
        value = value.strip()
        try:
            out[key] = _parse_bool(value) if key == "strict" else _TYPES[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{n}: bad value for {key}: {value!r}") from None
    return out


def _add_options(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--alpha", type=float, default=S, help="single scaled field a/(nu_E J)")
    p.add_argument("--alpha-min", type=float, default=S)
    p.add_argument("--alpha-max", type=float, default=S)
    p.add_argument("--alpha-steps", type=int, default=S)
    p.add_argument("--tau-max", type=float, default=S, help="end of the scaled time window (default 15)")
    p.add_argument("--tau-steps", type=int, default=S, help="number of tau points, 0 included (default 600)")
    p.add_argument("--nu-e", type=int, default=S, help="EMFT coordination number (default 1)")
    p.add_argument("--chain-n", type=int, default=S, help="exact chain length (default 512)")
    p.add_argument("--mode", default=S, help="emft-fixed | emft-tdscf | exact | compare")
    p.add_argument("--out", default=S, help="output CSV path, '-' for stdout (default)")
    p.add_argument("--extrema-eps", type=float, default=S, help="crest/trough prominence (default 0.01)")
    p.add_argument("--config", default=S, help="key = value file with defaults for these options")
    p.add_argument("--strict", action="store_true", default=S, help="exit 3 if any solver fails to converge")
    p.add_argument("--threads", type=int, default=S, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emftdyn", description="EMFT and exact transverse Ising quench dynamics"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "static": "self-consistent EMFT ground state at one alpha",
        "emft-sweep": "EMFT entanglement on an (alpha, tau) grid",
        "exact-sweep": "exact chain entanglement on an (alpha, tau) grid",
        "compare": "EMFT vs exact trajectories at one alpha, with crest/trough counts",
    }
    for name, text in helps.items():
        _add_options(sub.add_parser(name, help=text, description=text))
    return parser


def resolve_config(command: str, cli: dict) -> SweepConfig:
    """Merge defaults, config file and command line into a SweepConfig."""
    cli = dict(cli)
    cli.pop("command", None)
    merged: dict = {}
    if "config" in cli:
        merged.update(read_config_file(cli.pop("config")))
    merged.update(cli)

    if "alpha" in merged:
        alpha = merged.pop("alpha")
        if merged.get("alpha_steps", 1) != 1:
            raise ConfigError("--alpha selects a single value; drop --alpha-steps")
        merged.update(alpha_min=alpha, alpha_max=alpha, alpha_steps=1)
    if command in ("compare", "static") and "alpha_min" in merged and "alpha_max" not in merged:
        merged["alpha_max"] = merged["alpha_min"]

    default_mode = _SUBCOMMAND_MODE[command]
    mode = merged.get("mode", default_mode) or "emft-fixed"
    if mode not in _ALLOWED_MODES[command]:
        raise ConfigError(f"mode {mode!r} is not valid for {command}")
    merged["mode"] = mode
    if command == "static" and merged.get("alpha_steps", 1) != 1:
        raise ConfigError("static takes a single alpha")
    try:
        return SweepConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _static_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.keys())
    w.writerow([_fmt_cell(v) for v in report.values()])
    return buf.getvalue()


def _fmt_cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args["command"]
    try:
        config = resolve_config(command, args)
    except ConfigError as exc:
        print(f"emftdyn: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if command == "static":
        report = static_report(config.alpha_min, config.nu_e)
        text, converged = _static_csv(report), report["converged"]
    elif command == "compare":
        result = compare_sections(config)
        text, converged = result.to_csv(), result.converged
        s = result.summary()
        print(
            f"crests/troughs emft {s['crests_emft']}/{s['troughs_emft']}, "
            f"exact {s['crests_exact']}/{s['troughs_exact']}, equal: {s['counts_equal']}",
            file=sys.stderr,
        )
    elif command == "emft-sweep":
        result = run_emft_sweep(config)
        text, converged = result.to_csv(), result.all_converged
    else:
        result = run_exact_sweep(config)
        text, converged = result.to_csv(), result.all_converged

    try:
        _emit(text, config.out)
    except OSError as exc:
        print(f"emftdyn: cannot write {config.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO

    if not converged:
        print("emftdyn: warning: some points did not converge (flagged in the output)", file=sys.stderr)
        if config.strict:
            return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
