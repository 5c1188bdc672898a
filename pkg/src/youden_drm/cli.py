"""Command-line interface: ``youden-drm estimate`` and ``youden-drm simulate``.

Exit codes: 0 success, 2 data or configuration error, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .basis import get_basis
from .dataio import parse_dataset
from .errors import DataError, EstimationError, YoudenDRMError
from .report import BiomarkerReport, EstimateReport, analyze_sample
from .scenarios import DEFAULT_SEED, load_scenario
from .sim import run

__all__ = ["EXIT_DATA", "EXIT_ESTIMATION", "EXIT_OK", "cmd_estimate", "cmd_simulate", "main"]

EXIT_OK = 0
EXIT_DATA = 2
EXIT_ESTIMATION = 3


def _err(msg: str) -> None:
    print(f"youden-drm: error: {msg}", file=sys.stderr)


def _module_of(exc: BaseException) -> str:
    tb = exc.__traceback__
    mod = "youden_drm"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("youden_drm."):
            mod = name
        tb = tb.tb_next
    return mod


def _llod(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid LLOD {text!r}") from None
    if math.isnan(v) or v == math.inf:
        raise argparse.ArgumentTypeError("LLOD must be a finite number or -inf")
    return v


def _methods(text: str) -> tuple[str, ...]:
    ms = tuple(dict.fromkeys(m.strip() for m in text.split(",") if m.strip()))
    bad = [m for m in ms if m not in ("drm", "ecdf")]
    if not ms or bad:
        raise argparse.ArgumentTypeError(f"methods must be a comma list of drm, ecdf; got {text!r}")
    return ms


def _level(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid level {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="youden-drm",
        description="Youden index and optimal cutoff under two-sample density ratio models.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="estimate J and c from a CSV dataset")
    e.add_argument("--input", required=True, help="CSV with columns group, value[, biomarker]")
    e.add_argument("--basis", required=True, help="linear, loglog or xlogx")
    e.add_argument("--llod", type=_llod, default=-math.inf, help="lower limit of detection (default: none)")
    e.add_argument("--level", type=_level, default=0.95, help="confidence level (default: 0.95)")
    e.add_argument("--methods", type=_methods, default=("drm",), help="comma list of drm, ecdf (default: drm)")
    e.add_argument("--bootstrap-B", type=_nonneg_int, default=1000,
                   help="bootstrap resamples for ecdf intervals; 0 disables them (default: 1000)")
    e.add_argument("--seed", type=_nonneg_int, default=DEFAULT_SEED, help="bootstrap seed")
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.add_argument("--output", help="write the report here instead of stdout")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    s.add_argument("--scenario", required=True, help="JSON scenario file or built-in name, e.g. gamma_J0.4_200_200_nollod")
    s.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    s.add_argument("--out", default=".", help="output directory (default: current)")
    s.set_defaults(func=cmd_simulate)
    return p


def _write(text: str, dest: str | None) -> None:
    if dest is None:
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def cmd_estimate(args: argparse.Namespace) -> int:
    try:
        basis = get_basis(args.basis)
        if args.bootstrap_B and args.bootstrap_B < 100 and "ecdf" in args.methods:
            raise DataError("--bootstrap-B must be 0 or at least 100")
        samples = parse_dataset(args.input, args.llod)
    except (DataError, ValueError) as exc:
        _err(str(exc))
        return EXIT_DATA
    report = EstimateReport(
        input=str(args.input),
        basis=basis.name,
        llod=args.llod,
        level=args.level,
        methods=list(args.methods),
        bootstrap_B=args.bootstrap_B,
        seed=args.seed,
    )
    code = EXIT_OK
    for name, sample in samples.items():
        try:
            br = analyze_sample(sample, basis, name, args.level, args.methods, args.bootstrap_B, args.seed)
        except YoudenDRMError as exc:
            msg = f"{_module_of(exc)}: {type(exc).__name__}: {exc}"
            _err(f"biomarker {name!r}: {msg}")
            br = BiomarkerReport(name, sample.n0, sample.n1, sample.m0, sample.m1, error=msg)
            code = max(code, EXIT_DATA if isinstance(exc, DataError) else EXIT_ESTIMATION)
        report.biomarkers.append(br)
    if args.format == "json":
        text = report.to_json()
    else:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(report.csv_rows())
        text = buf.getvalue()
    try:
        _write(text, args.output)
    except OSError as exc:
        _err(f"{args.output}: {exc.strerror or exc}")
        return EXIT_DATA
    return code


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.workers < 1:
        _err("--workers must be at least 1")
        return EXIT_DATA
    try:
        scenario = load_scenario(args.scenario)
    except DataError as exc:
        _err(str(exc))
        return EXIT_DATA
    try:
        metrics = run(scenario, workers=args.workers)
    except EstimationError as exc:
        _err(f"{_module_of(exc)}: {type(exc).__name__}: {exc}")
        return EXIT_ESTIMATION
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{scenario.name}_metrics.csv"
        json_path = out / f"{scenario.name}_summary.json"
        csv_path.write_text(metrics.to_csv())
        json_path.write_text(metrics.to_json())
    except OSError as exc:
        _err(f"{out}: {exc.strerror or exc}")
        return EXIT_DATA
    print(csv_path)
    print(json_path)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
