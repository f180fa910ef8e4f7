"""Command-line front end.

Subcommands: ``fit``, ``plot``, ``baseline``, ``simulate`` and ``replay``.
Every artifact directory gets a ``run_manifest.txt``; ``replay`` re-runs the
command it describes and reproduces the CSV artifacts byte for byte.

Exit codes: 0 success, 2 validation error, 3 fit failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from . import io as pio
from .baselines import co_occurrence, half_weight_index
from .errors import DegenerateMassError, FitFailureError, ValidationError
from .estimate import FitConfig, eta_grid, select_eta
from .evalmetrics import DESIGNS, SimSettings, run_replicates
from .plot import check_plot_matrix, reorder, rho_order, write_plot

logger = logging.getLogger("pchm")

EXIT_OK, EXIT_VALIDATION, EXIT_FIT, EXIT_IO = 0, 2, 3, 4
MANIFEST = "run_manifest.txt"

# manifest key -> command-line flag, per replayable command
_FIT_KEYS = ("eta_grid", "starts", "seed", "max_iter", "rel_tol", "threshold", "plot_cell")
_SIM_KEYS = (
    "n", "n_o", "p", "alpha", "beta", "q", "gamma_b", "gamma_c", "c", "T", "R",
    "seed", "starts", "max_iter", "rel_tol", "threshold", "eta_grid", "permute",
)
_BASELINE_KEYS = ("plot_cell",)


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` as an inclusive grid, or a comma-separated list of values."""
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            return eta_grid(lo, hi, step)
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad eta grid {text!r}: {exc}") from exc


def _fmt_grid(grid: Sequence[float]) -> str:
    return ",".join(repr(g) for g in grid)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _config(args) -> FitConfig:
    return FitConfig(
        n_starts=args.starts, max_iter=args.max_iter, rel_tol=args.rel_tol,
        zero_threshold=args.threshold, seed=args.seed,
    )


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(command: str, args, keys: Sequence[str], **extra) -> dict[str, object]:
    entries: dict[str, object] = {"command": command, "version": __version__}
    for k in keys:
        v = getattr(args, k)
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        entries[k] = v
    entries.update(extra)
    return entries


def cmd_fit(args) -> int:
    data = pio.ingest(args.data)
    grid = [args.eta] if args.eta is not None else parse_grid(args.eta_grid)
    args.eta_grid = _fmt_grid(grid)
    cfg = _config(args)
    path = select_eta(data, grid, cfg)
    best = path.selected.fit
    labels = data.labels
    order = rho_order(best.params.rho)
    out = _out_dir(args.out_dir)

    pio.write_rho(out / "rho.csv", best.params.rho, labels, order)
    pio.write_matrix(out / "A.csv", best.params.A, labels)
    pio.write_matrix(out / "A_sorted.csv", reorder(best.params.A, order), [labels[i] for i in order])
    rows = []
    for e in path.entries:
        if e.failed:
            rows.append((e.eta, "nan", "inf", "", "", "failed"))
        else:
            f = e.fit
            rows.append((e.eta, f.log_lik, f.bic, f.n_o, f.d, str(f.converged).lower()))
    pio.write_table(out / "eta_path.csv", ["eta", "log_lik", "bic", "n_o", "d", "converged"], rows)
    if args.plot_cell:
        sorted_A = reorder(best.params.A, order)
        sorted_labels = [labels[i] for i in order]
        write_plot(out / "A_sorted.pgm", sorted_A, cell=args.plot_cell)
        write_plot(out / "A_sorted.svg", sorted_A, sorted_labels)
    pio.write_manifest(
        out / MANIFEST,
        _manifest(
            "fit", args, _FIT_KEYS, input=Path(args.data).resolve(), input_sha256=_sha256(args.data),
            selected_eta=path.selected.eta, selected_n_o=best.n_o,
        ),
    )
    print(f"selected eta={path.selected.eta:g} n_o={best.n_o} log_lik={best.log_lik:.4f} bic={best.bic:.4f}")
    return EXIT_OK


def cmd_plot(args) -> int:
    M, labels = pio.read_matrix(args.matrix)
    M = check_plot_matrix(M)
    if args.rho is not None:
        rho, _ = pio.read_rho(args.rho)
        if rho.size != M.shape[0]:
            raise ValidationError(f"rho has {rho.size} entries for a {M.shape[0]}x{M.shape[0]} matrix")
        order = rho_order(rho)
        M = reorder(M, order)
        labels = tuple(labels[i] for i in order)
    write_plot(args.out, M, labels, cell=args.cell)
    return EXIT_OK


def cmd_baseline(args) -> int:
    data = pio.ingest(args.data)
    out = _out_dir(args.out_dir)
    for name, M in (("co_occurrence", co_occurrence(data)), ("half_weight", half_weight_index(data))):
        pio.write_matrix(out / f"{name}.csv", M, data.labels)
        if args.plot_cell:
            # co-occurrence never exceeds 1, so both matrices are plottable as-is
            write_plot(out / f"{name}.pgm", M, cell=args.plot_cell)
            write_plot(out / f"{name}.svg", M, data.labels)
    pio.write_manifest(
        out / MANIFEST,
        _manifest("baseline", args, _BASELINE_KEYS, input=Path(args.data).resolve(), input_sha256=_sha256(args.data)),
    )
    return EXIT_OK


_REPLICATE_HEADER = [
    "design", "T", "replicate", "method", "mae_A", "mae_rho", "est_n_o", "est_d", "selected_eta", "seed",
    "permutation",
]


def cmd_simulate(args) -> int:
    settings = SimSettings(
        n=args.n, n_o=args.n_o, p=args.p, alpha=args.alpha, beta=args.beta,
        q=args.q, gamma_b=args.gamma_b, gamma_c=args.gamma_c, c=args.c,
    )
    grid = parse_grid(args.eta_grid)
    args.eta_grid = _fmt_grid(grid)
    res = run_replicates(
        args.design, settings, args.T, args.R, _config(args), grid, permute=args.permute, workers=args.workers
    )
    out = _out_dir(args.out_dir)
    rows = [
        (
            r.design, r.T, r.replicate, r.method, r.mae_A, r.mae_rho, r.est_n_o, r.est_d, r.selected_eta,
            r.seed, "" if r.permutation is None else " ".join(str(i) for i in r.permutation),
        )
        for r in res.reports
    ]
    pio.write_table(out / "replicates.csv", _REPLICATE_HEADER, rows)
    pio.write_table(
        out / "aggregate.csv",
        ["design", "T", "method", "metric", "mean", "stdev", "n_failed"],
        [(a.design, a.T, a.method, a.metric, a.mean, a.stdev, a.n_failed) for a in res.aggregate],
    )
    # wall-clock times vary between runs, so they live apart from the reproducible tables
    pio.write_table(
        out / "timings.csv",
        ["design", "T", "replicate", "method", "runtime_seconds"],
        [(r.design, r.T, r.replicate, r.method, r.runtime_seconds) for r in res.reports],
    )
    pio.write_manifest(out / MANIFEST, _manifest("simulate", args, _SIM_KEYS, design=args.design))
    n_failed = sum(res.failures.values()) // 2
    print(f"{len(res.reports) // 2} replicates written to {out}" + (f", {n_failed} failed" if n_failed else ""))
    return EXIT_OK


def _replay_argv(m: dict[str, str], out_dir: str) -> list[str]:
    command = m.get("command")
    if command == "fit":
        argv = ["fit", m["input"]]
        keys = _FIT_KEYS
    elif command == "baseline":
        argv = ["baseline", m["input"]]
        keys = _BASELINE_KEYS
    elif command == "simulate":
        argv = ["simulate", m["design"]]
        keys = _SIM_KEYS
    else:
        raise ValidationError(f"manifest command {command!r} cannot be replayed")
    for k in keys:
        if k not in m:
            raise ValidationError(f"manifest is missing {k!r}")
        flag = "--" + k.replace("_", "-")
        v = m[k]
        if k == "permute":
            if v == "True":
                argv.append(flag)
        elif k == "T":
            argv += [flag, *v.split(",")]
        else:
            argv.append(f"{flag}={v}")
    return argv + ["--out-dir", out_dir]


def cmd_replay(args) -> int:
    m = pio.read_manifest(args.manifest)
    if m.get("version") != __version__:
        logger.warning("manifest written by version %s, running %s", m.get("version"), __version__)
    if "input_sha256" in m and _sha256(m["input"]) != m["input_sha256"]:
        raise ValidationError(f"input file {m['input']} changed since the manifest was written")
    return main(_replay_argv(m, args.out_dir))


def _add_fit_options(p: argparse.ArgumentParser, starts: int) -> None:
    p.add_argument("--starts", type=int, default=starts, help="random starts for the HM fit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--threshold", type=float, default=1e-6, help="mixing weights below this become 0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pchm", description="Hub-model fitting for grouped network data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit PCHM over an eta grid and select eta by BIC")
    p.add_argument("data", help="0/1 group-by-individual matrix file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eta-grid", default="1:15:0.5", help="a:b:step or comma list (default 1:15:0.5)")
    g.add_argument("--eta", type=float, help="fit a single eta (1 gives the plain hub model)")
    _add_fit_options(p, starts=20)
    p.add_argument("--plot-cell", type=int, default=0, help="also write sorted plots with this cell size")
    p.add_argument("--out-dir", default="pchm_fit")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plot", help="grayscale plot of a square matrix in [0, 1]")
    p.add_argument("matrix", help="CSV matrix, e.g. A.csv from fit")
    p.add_argument("--rho", help="rho.csv; rows and columns are then ordered by descending rho")
    p.add_argument("--out", required=True, help="output path ending in .pgm or .svg")
    p.add_argument("--cell", type=int, default=16, help="pixels per matrix cell")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("baseline", help="co-occurrence and half-weight association matrices")
    p.add_argument("data")
    p.add_argument("--plot-cell", type=int, default=0)
    p.add_argument("--out-dir", default="pchm_baseline")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of HM and PCHM")
    p.add_argument("design", choices=DESIGNS)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--n-o", type=int, default=8)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--q", type=float, default=0.2)
    p.add_argument("--gamma-b", type=float, default=1.0)
    p.add_argument("--gamma-c", type=float, default=-1.0)
    p.add_argument("--c", type=float, default=-3.5)
    p.add_argument("--T", type=int, nargs="+", default=[100, 200, 500])
    p.add_argument("--R", type=int, default=20)
    p.add_argument("--eta-grid", default="1:15:0.5")
    p.add_argument("--permute", action="store_true", help="randomly relabel nodes in every replicate")
    p.add_argument("--workers", type=int, default=1)
    _add_fit_options(p, starts=20)
    p.add_argument("--out-dir", default="pchm_sim")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FitFailureError, DegenerateMassError) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
