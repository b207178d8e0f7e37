"""``fockline`` command line: run, sweep, components, circuit, verify.

Exit status: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, formats, verify
from .detection import ClickPattern, conditional_state, pattern_probabilities
from .elements import Circuit, apply_circuit
from .fock import BellVariant, ModeRegistry, bell_state, fidelity_pure, purity
from .scheme import (
    FIG1_PATHS,
    SchemeConfig,
    SchemeReport,
    build_fig1_circuit,
    fig1_detectors,
    prepare_inputs,
    run_scheme,
    scheme_registry,
)

CSV_COLUMNS = (
    "epsilon",
    "eta",
    "p_coincidence",
    "fidelity",
    "bound_1m4e2",
    "bound_eta",
    "p1",
    "p2",
    "p3",
    "p_im",
)
PRESETS = {"fig1": build_fig1_circuit}
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def parse_scalar(text: str) -> complex:
    try:
        return complex(float(text))
    except ValueError:
        pass
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def parse_grid(text: str) -> tuple[list[float], bool]:
    """``start:stop:count`` or a scalar; returns (values, is_grid)."""
    if ":" not in text:
        v = parse_scalar(text)
        if v.imag:
            return [v], False  # type: ignore[list-item]
        return [v.real], False
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be start:stop:count, got {text!r}") from None
    if count < 1:
        raise UsageError("grid count must be at least 1")
    if start > stop:
        raise UsageError("grid start must not exceed stop")
    return [float(v) for v in np.linspace(start, stop, count)], True


def _g(v: Any) -> str:
    if v is None:
        return "nan"
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# report shaping


def report_to_dict(report: SchemeReport, with_rho: bool = False) -> dict:
    cfg = report.config
    out: dict[str, Any] = {
        "epsilon": [cfg.epsilon.real, cfg.epsilon.imag],
        "epsilon_abs": abs(cfg.epsilon),
        "eta": cfg.eta,
        "coincidence": cfg.coincidence.value,
        "p_coincidence": report.p_coincidence,
        "event_probabilities": dict(report.event_probabilities),
        "fidelity": report.fidelity,
        "event_fidelities": dict(report.event_fidelities),
        "purity": report.purity,
        "two_photon_weight": report.two_photon_weight,
        "analytic": report.analytic.to_dict(),
        "components": [
            {
                "label": r.label.value,
                "amplitude": r.amplitude,
                "prior": r.prior,
                "coincidence_given_component": r.coincidence_given_component,
                "contribution": r.contribution,
                "verdict": "excluded" if r.excluded else "heralds",
            }
            for r in report.components
        ],
        "notes": list(report.notes),
    }
    if with_rho and report.rho is not None:
        out["rho"] = formats.density_to_json(report.rho)
    return out


def sweep_row(report: SchemeReport) -> dict[str, Any]:
    a = report.analytic
    return {
        "epsilon": abs(report.config.epsilon),
        "eta": report.config.eta,
        "p_coincidence": report.p_coincidence,
        "fidelity": report.fidelity,
        "bound_1m4e2": a.fidelity_lower_bound,
        "bound_eta": a.fidelity_lower_bound_eta,
        "p1": a.p1,
        "p2": a.p2,
        "p3": a.p3,
        "p_im": a.p_im,
    }


def _envelope(command: str, config: dict, data: Any) -> dict:
    return {"meta": {"tool": "fockline", "version": __version__, "command": command, "config": config}, "data": data}


def _csv(rows: Sequence[dict], header_comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_g(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _table(rows: Sequence[Sequence[Any]], header: Sequence[str]) -> str:
    cells = [list(header)] + [[c if isinstance(c, str) else _short(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _short(v: Any) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}j" if v.imag else f"{v.real:.6g}"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _config(args) -> SchemeConfig:
    try:
        return SchemeConfig(parse_scalar(args.epsilon), float(args.eta), args.coincidence)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_echo(cfg: SchemeConfig) -> dict:
    return {"epsilon": [cfg.epsilon.real, cfg.epsilon.imag], "eta": cfg.eta, "coincidence": cfg.coincidence.value}


def cmd_run(args) -> int:
    cfg = _config(args)
    report = run_scheme(cfg)
    if args.format == "json":
        text = formats.dumps(_envelope("run", _config_echo(cfg), report_to_dict(report, args.with_rho)))
    elif args.format == "csv":
        text = _csv([sweep_row(report)], f"fockline {__version__} run coincidence={cfg.coincidence.value}")
    else:
        d = report_to_dict(report)
        rows = [(k, d[k]) for k in ("epsilon_abs", "eta", "coincidence", "p_coincidence", "fidelity", "purity")]
        rows += [(f"p[{k}]", v) for k, v in d["event_probabilities"].items()]
        rows += [(f"fidelity[{k}]", v) for k, v in d["event_fidelities"].items()]
        rows += [(k, v) for k, v in d["analytic"].items() if k not in ("epsilon_abs", "eta")]
        text = _table(rows, ("quantity", "value"))
        for note in report.notes:
            text += f"note: {note}\n"
    _emit(text, args.out)
    return EXIT_OK


def _threads() -> int:
    raw = os.environ.get("FOCKLINE_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise UsageError("FOCKLINE_THREADS must be an integer") from None
    if n < 1:
        raise UsageError("FOCKLINE_THREADS must be at least 1")
    return n


def cmd_sweep(args) -> int:
    eps_values, eps_grid = parse_grid(args.epsilon)
    eta_values, eta_grid = parse_grid(args.eta)
    if not (eps_grid or eta_grid):
        raise UsageError("sweep needs a start:stop:count grid for --epsilon or --eta")
    points = [(e, h) for e in eps_values for h in eta_values]
    try:
        configs = [SchemeConfig(e, h, args.coincidence) for e, h in points]
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def one(cfg: SchemeConfig) -> SchemeReport:
        return run_scheme(cfg, with_components=False)

    with ThreadPoolExecutor(max_workers=min(_threads(), len(configs))) as pool:
        reports = list(pool.map(one, configs))
    rows = [sweep_row(r) for r in reports]
    echo = {"epsilon": args.epsilon, "eta": args.eta, "coincidence": args.coincidence}
    if args.format == "csv":
        text = _csv(rows, f"fockline {__version__} sweep coincidence={args.coincidence}")
    elif args.format == "json":
        text = formats.dumps(_envelope("sweep", echo, rows))
    else:
        text = _table([[r[c] for c in CSV_COLUMNS] for r in rows], CSV_COLUMNS)
    _emit(text, args.out)
    return EXIT_OK


def cmd_components(args) -> int:
    cfg = _config(args)
    report = run_scheme(cfg)
    d = report_to_dict(report)
    if args.format == "json":
        text = formats.dumps(_envelope("components", _config_echo(cfg), d["components"]))
    elif args.format == "csv":
        buf = io.StringIO()
        buf.write(f"# fockline {__version__} components coincidence={cfg.coincidence.value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("label", "prior", "coincidence_given_component", "contribution", "verdict"))
        for r in d["components"]:
            w.writerow(
                (r["label"], _g(r["prior"]), _g(r["coincidence_given_component"]), _g(r["contribution"]), r["verdict"])
            )
        text = buf.getvalue()
    else:
        rows = [
            (r["label"], r["amplitude"], r["prior"], r["coincidence_given_component"], r["contribution"], r["verdict"])
            for r in d["components"]
        ]
        text = _table(rows, ("component", "amplitude", "prior", "p(coinc|comp)", "contribution", "verdict"))
    _emit(text, args.out)
    return EXIT_OK


def _load_circuit(source: str) -> tuple[Circuit, list[str]]:
    if source in PRESETS:
        return PRESETS[source](), list(FIG1_PATHS)
    data = formats.load_json(source, formats.CIRCUIT_SCHEMA, "circuit")
    circuit = formats.circuit_from_json(data)
    return circuit, list(data.get("paths", []))


def cmd_circuit(args) -> int:
    try:
        circuit, declared = _load_circuit(args.circuit)
        if args.detectors:
            detectors = formats.detectors_from_json(formats.load_json(args.detectors, formats.DETECTORS_SCHEMA, "detectors"))
        else:
            detectors = fig1_detectors(float(args.eta))
        if args.input:
            state_data = formats.load_json(args.input, formats.STATE_SCHEMA, "input state")
            state_paths = state_data["paths"]
        else:
            state_data, state_paths = None, ["1", "2", "3", "4"]
        keep = [p for p in (args.keep or "").split(",") if p]
        paths = set(declared) | circuit.paths() | set(state_paths) | {d.path for d in detectors} | set(keep)
        reg = ModeRegistry(paths) if set(paths) != set(FIG1_PATHS) else scheme_registry()
        circuit.validate(reg)
        if state_data is not None:
            state = formats.state_from_json(state_data, reg).normalize()
        else:
            state = prepare_inputs(parse_scalar(args.epsilon), reg)
    except (formats.FormatError, ValueError) as exc:
        raise UsageError(str(exc)) from None

    out = apply_circuit(state, circuit)
    probs = pattern_probabilities(out, detectors)
    data: dict[str, Any] = {"patterns": formats.pattern_results_to_json(probs)}
    if args.herald:
        heralds = [ClickPattern.from_clicked(detectors, [i for i in h.split(",") if i]) for h in args.herald]
        p = sum(probs[h] for h in dict.fromkeys(heralds))
        data["herald"] = {"patterns": [h.label for h in heralds], "probability": p}
        if keep and p > 0:
            _, rho = conditional_state(out, list(dict.fromkeys(heralds)), detectors, keep)
            data["herald"]["purity"] = purity(rho)
            if len(keep) == 2:
                data["herald"]["fidelity_singlet"] = fidelity_pure(
                    rho, bell_state(reg, BellVariant.PSI_MINUS, keep[0], keep[1])
                )
    if args.with_state:
        data["output_state"] = formats.state_to_json(out)
    echo = {"circuit": args.circuit, "input": args.input, "detectors": args.detectors, "keep": keep, "herald": args.herald}
    if args.format == "json":
        text = formats.dumps(_envelope("circuit", echo, data))
    else:
        rows = [(k, v) for k, v in data["patterns"].items()]
        if "herald" in data:
            rows += [(f"herald.{k}", str(v) if isinstance(v, list) else v) for k, v in data["herald"].items()]
        text = _table(rows, ("pattern", "probability"))
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    opts = verify.Options(bs_matrix=np.eye(2) if args.tamper_bs else None)
    try:
        selected = verify.select(args.criterion)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    t0 = time.perf_counter()
    results = [fn(opts) for _, _, fn in selected]
    elapsed = time.perf_counter() - t0
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    if not args.criterion:
        fast = elapsed < 60
        ok &= fast
        lines.append(f"[{'PASS' if fast else 'FAIL'}] c10 runtime: criteria c1-c9 finish in under 60 s")
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    _emit("\n".join(lines) + "\n", args.out)
    print(f"elapsed {elapsed:.1f} s", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockline", description="Linear-optics Fock simulator and heralded singlet source.")
    parser.add_argument("--version", action="version", version=f"fockline {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default, eps_help="polarization deviation epsilon"):
        p.add_argument("--epsilon", default="0.05", help=eps_help)
        p.add_argument("--eta", default="1.0", help="detector efficiency in (0, 1]")
        p.add_argument("--coincidence", choices=("strict", "lenient"), default="strict")
        p.add_argument("--format", choices=("json", "csv", "table"), default=fmt_default)
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("run", help="single (epsilon, eta) point")
    common(p, "json")
    p.add_argument("--with-rho", action="store_true", help="include the conditional density matrix")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid over epsilon and/or eta (start:stop:count)")
    common(p, "csv", "scalar or start:stop:count")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("components", help="prior and coincidence contribution per component")
    common(p, "table")
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("circuit", help="evolve an input state through a circuit file and detect")
    common(p, "json")
    p.add_argument("--circuit", required=True, help="circuit JSON path or preset name (fig1)")
    p.add_argument("--input", metavar="PATH", help="input state JSON (default: four-photon source at --epsilon)")
    p.add_argument("--detectors", metavar="PATH", help="detector JSON (default: D1..D4 of fig1 at --eta)")
    p.add_argument("--keep", help="comma-separated paths kept after heralding")
    p.add_argument("--herald", action="append", help="comma-separated clicked detectors; repeatable")
    p.add_argument("--with-state", action="store_true", help="include the output state")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--criterion", action="append", help="criterion id (c1..c9) or family; repeatable")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--tamper-bs", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(f"fockline {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
