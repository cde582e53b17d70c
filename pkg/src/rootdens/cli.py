"""Command-line interface: ``rootdens {fit,test,merge,select,bench}``.

Exit codes: 0 success, 2 input error, 3 incompatible states, 4 numerical failure.
Every output file gets a ``<name>.manifest.json`` sidecar describing the run.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .basis import HERMITE, HISTOGRAM, AffineTransform, BasisSpec
from .bench import (
    TABLE1_MIXTURES,
    convergence_profile,
    run_table1,
    sample_mixture,
    trial_seed,
    write_profile_csv,
    write_rows_csv,
    write_summary_json,
)
from .core import StateVector
from .densmat import merge_states
from .errors import IncompatibleStatesError, InvalidInputError, NumericalError, RootDensError
from .inference import chi2_goodness, chi2_homogeneity
from .numerics import RandomStream
from .selection import select_harmonics
from .solver import FitConfig, density_eval, fit

log = logging.getLogger("rootdens")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INCOMPATIBLE = 3
EXIT_NUMERICAL = 4
GRID_POINTS = 512


class CliInputError(InvalidInputError):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None = None
    input_digest: dict = field(default_factory=dict)
    version: str = __version__
    timestamp: str = ""

    def write_for(self, output: Path) -> Path:
        path = output.with_name(output.name + ".manifest.json")
        body = {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "input_sha256": self.input_digest,
            "version": self.version,
            "timestamp": self.timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
        return path


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# --- input / state files ------------------------------------------------------------


def read_sample(path) -> np.ndarray:
    """One number per line; ``#`` starts a comment; blank lines are skipped.

    A trailing comma-separated field list is accepted if it has one column.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise CliInputError(f"cannot read {p}: {exc.strerror}") from exc
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip().rstrip(",").strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise CliInputError(f"{p}:{lineno}: not a number: {raw.strip()!r}") from None
        if not np.isfinite(v):
            raise CliInputError(f"{p}:{lineno}: value is not finite: {raw.strip()!r}")
        values.append(v)
    if not values:
        raise CliInputError(f"{p}: no data values")
    return np.array(values)


def state_to_dict(state: StateVector, n: int, diagnostics: dict | None = None) -> dict:
    b = state.basis
    return {
        "basis": b.kind,
        "s": b.size,
        "affine": {"shift": b.affine.shift, "scale": b.affine.scale},
        "edges": list(b.edges) if b.edges is not None else None,
        "coefficients": [float(v) for v in state.coefficients],
        "n": int(n),
        "diagnostics": diagnostics or {},
    }


def state_from_dict(d: dict) -> tuple[StateVector, int]:
    try:
        kind = d["basis"]
        coeffs = np.asarray(d["coefficients"], dtype=float)
        n = int(d["n"])
        if kind == HISTOGRAM:
            basis = BasisSpec.histogram(d["edges"])
        elif kind == HERMITE:
            aff = d.get("affine") or {}
            basis = BasisSpec.hermite(int(d["s"]), AffineTransform(float(aff.get("shift", 0.0)), float(aff.get("scale", 1.0))))
        else:
            raise CliInputError(f"unknown basis {kind!r}")
        if basis.size != int(d["s"]):
            raise CliInputError(f"state declares s={d['s']} but its basis has {basis.size} functions")
        return StateVector(coeffs, basis), n
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RootDensError):
            raise
        raise CliInputError(f"malformed state file: {exc}") from exc


def load_state(path) -> tuple[StateVector, int]:
    p = Path(path)
    try:
        d = json.loads(p.read_text())
    except OSError as exc:
        raise CliInputError(f"cannot read {p}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(f"{p}: invalid JSON: {exc}") from exc
    return state_from_dict(d)


def save_state(path, state: StateVector, n: int, diagnostics: dict | None = None) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state, n, diagnostics), indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([int(v) if isinstance(v, (int, np.integer)) else repr(float(v)) for v in row])


def _out_paths(out: str, *suffixes: str) -> list[Path]:
    base = Path(out)
    base.parent.mkdir(parents=True, exist_ok=True)
    stem = base.with_suffix("") if base.suffix else base
    return [stem.with_name(stem.name + sfx) for sfx in suffixes]


# --- commands -------------------------------------------------------------------------


def cmd_fit(args) -> int:
    x = read_sample(args.input)
    alpha = "auto" if args.alpha == "auto" else float(args.alpha)
    affine = AffineTransform(*args.affine) if args.affine else None
    config = FitConfig(basis=args.basis, alpha=alpha, max_iterations=args.max_iter, affine=affine)
    report = fit(x, args.s, config)
    state_path, curve_path = _out_paths(args.out, ".json", "_density.csv")
    save_state(state_path, report.state, report.n, report.diagnostics())
    sd = float(np.std(x))
    grid = np.linspace(x.min() - 4.0 * sd, x.max() + 4.0 * sd, GRID_POINTS)
    if grid[0] == grid[-1]:
        grid = np.linspace(grid[0] - 1.0, grid[0] + 1.0, GRID_POINTS)
    _write_csv(curve_path, ["x", "density"], zip(grid, density_eval(report.state, grid)))
    params = {"basis": args.basis, "s": args.s, "alpha": args.alpha, "affine": args.affine, "max_iter": args.max_iter}
    digest = {str(args.input): _digest(Path(args.input))}
    for p in (state_path, curve_path):
        RunManifest("fit", params, None, digest).write_for(p)
    if not report.converged:
        print(f"warning: fit did not converge after {report.iterations} iterations", file=sys.stderr)
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(json.dumps({"state": str(state_path), "curve": str(curve_path), **report.diagnostics()}))
    return EXIT_OK


def cmd_test(args) -> int:
    if args.goodness:
        est, n = load_state(args.goodness[0])
        ref, _ = load_state(args.goodness[1])
        _check_same_basis(est, ref)
        report = chi2_goodness(est, ref, n, args.alpha)
        kind = "goodness"
    else:
        a, n1 = load_state(args.homogeneity[0])
        b, n2 = load_state(args.homogeneity[1])
        _check_same_basis(a, b)
        report = chi2_homogeneity(a, b, n1, n2, args.alpha)
        kind = "homogeneity"
    print(json.dumps({"test": kind, **report.as_dict()}))
    return EXIT_OK


def _check_same_basis(a: StateVector, b: StateVector) -> None:
    if not a.basis.compatible(b.basis):
        raise IncompatibleStatesError(f"state files use different bases: {_describe(a.basis)} vs {_describe(b.basis)}")


def _describe(b: BasisSpec) -> str:
    if b.kind == HISTOGRAM:
        return f"histogram with {b.size} bins on [{b.edges[0]:g}, {b.edges[-1]:g}]"
    return f"hermite s={b.size} shift={b.affine.shift:.6g} scale={b.affine.scale:.6g}"


def cmd_merge(args) -> int:
    a, n1 = load_state(args.a)
    b, n2 = load_state(args.b)
    _check_same_basis(a, b)
    check = chi2_homogeneity(a, b, n1, n2, args.alpha)
    if check.verdict:
        print(
            f"warning: samples look inhomogeneous (statistic {check.statistic:.3f}, p = {check.p_value:.3g}); "
            "the merged pure state may be misleading",
            file=sys.stderr,
        )
    merged, lam2 = merge_states(a, b, n1, n2)
    (out,) = _out_paths(args.out, ".json")
    save_state(out, merged, n1 + n2, {"lambda2": lam2, "homogeneity": check.as_dict()})
    digest = {str(args.a): _digest(Path(args.a)), str(args.b): _digest(Path(args.b))}
    RunManifest("merge", {"alpha": args.alpha}, None, digest).write_for(out)
    print(json.dumps({"state": str(out), "lambda2": lam2}))
    return EXIT_OK


def cmd_select(args) -> int:
    x = read_sample(args.input)
    sel = select_harmonics(x, s_max=args.s_max)
    state_path, risk_path, tail_path = _out_paths(args.out, ".json", "_risk.csv", "_tail.csv")
    diag = sel.report.diagnostics()
    diag.update({"s_opt": sel.s_opt, "tail_f": sel.tail.f, "tail_r": sel.tail.r, "fit_range": list(sel.tail.fit_range)})
    save_state(state_path, sel.report.state, sel.n, diag)
    s, f = sel.risk_curve()
    _write_csv(risk_path, ["s", "risk"], zip(s, f))
    ls, lq = sel.rectified_tail()
    _write_csv(tail_path, ["ln_s", "ln_Q"], zip(ls, lq))
    digest = {str(args.input): _digest(Path(args.input))}
    for p in (state_path, risk_path, tail_path):
        RunManifest("select", {"s_max": args.s_max}, None, digest).write_for(p)
    print(json.dumps({"s_opt": sel.s_opt, "state": str(state_path), "tail_f": sel.tail.f, "tail_r": sel.tail.r}))
    return EXIT_OK


def cmd_bench(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    run = run_table1(trials=args.trials, n=args.n, seed=args.seed, s=args.s, auto_s=args.auto_s, s_max=args.s_max)
    table_csv = outdir / "table1.csv"
    summary = outdir / "table1_summary.json"
    profile_csv = outdir / "profile.csv"
    write_rows_csv(run.rows, table_csv)
    write_summary_json(run, summary)
    # profile on the first trial sample of the first mixture
    x = sample_mixture(TABLE1_MIXTURES[0], args.n, RandomStream(trial_seed(args.seed, 0, 0)))
    write_profile_csv(convergence_profile(x, args.s), profile_csv)
    params = {"trials": args.trials, "n": args.n, "s": args.s, "auto_s": args.auto_s, "s_max": args.s_max}
    for p in (table_csv, summary, profile_csv):
        RunManifest("bench", params, args.seed).write_for(p)
    for r in run.results:
        print(f"{r.mixture:>4} {r.estimator:>7}  mean={r.mean:.4f}  sd={r.sd:.4f}  n={r.trials}  failed={r.failures}")
    return EXIT_OK


# --- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rootdens", description="Root (psi-function) density estimation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a state vector to a sample")
    p.add_argument("input")
    p.add_argument("--basis", choices=[HERMITE, HISTOGRAM], default=HERMITE)
    p.add_argument("--s", type=int, default=9, help="number of basis functions (bins for histogram)")
    p.add_argument("--alpha", default="auto", help="'auto' or a fixed value in (0, 1)")
    p.add_argument("--affine", nargs=2, type=float, metavar=("SHIFT", "SCALE"), help="fixed z = (x - SHIFT)/SCALE")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--out", required=True, help="output stem; writes STEM.json and STEM_density.csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("test", help="chi-square goodness-of-fit or homogeneity test")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--goodness", nargs=2, metavar=("EST", "REF"))
    g.add_argument("--homogeneity", nargs=2, metavar=("A", "B"))
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("merge", help="merge two state files through their joint density matrix")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--alpha", type=float, default=0.05, help="level of the homogeneity warning")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("select", help="choose the number of harmonics")
    p.add_argument("input")
    p.add_argument("--s-max", type=int, default=24)
    p.add_argument("--out", required=True, help="output stem")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bench", help="Monte Carlo comparison on the three reference mixtures")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s", type=int, default=9)
    p.add_argument("--auto-s", action="store_true", help="select s per trial instead of fixing it")
    p.add_argument("--s-max", type=int, default=24)
    p.add_argument("--outdir", default="bench_out")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IncompatibleStatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
