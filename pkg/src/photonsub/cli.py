"""Command-line front end: ``photonsub <command> [options]``.

Commands
--------
tradeoff      PS curves and the best GPS curve for one or more output squeezings.
sweep         Heralded Wigner grids and metrics over beam-splitter transmissivities.
tables        Simulated counterparts of the reference experimental operating points.
plan          GPS input parameters for a target squeezing and rate or quality.
oracle-check  Closed-form heralding against the Fock oracle on random specs.
tomo-sim      Synthetic homodyne data, MLE reconstruction and estimators.

Exit codes: 0 success, 1 usage error, 2 infeasible target, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import Provenance, default_out_dir, write_json, write_rows, write_wigner
from .gaussian_core import db_to_r, r_to_db
from .heralding import (
    GridTooCoarseError,
    HeraldError,
    HeraldSpec,
    LossBudget,
    PhaseSpaceGrid,
    herald_onoff,
    quality_metric,
)

log = logging.getLogger("photonsub")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def _losses(args) -> LossBudget:
    return LossBudget(args.signal_loss, args.trigger_loss, args.fake_fraction)


def _grid(args) -> PhaseSpaceGrid:
    return PhaseSpaceGrid(args.grid_extent, args.grid_points)


def _out(args) -> Path:
    out = Path(args.out) if args.out else default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _db_tag(db: float) -> str:
    return f"{db:+.2f}dB".replace("+", "p").replace("-", "m").replace(".", "_")


def _t_tag(T: float) -> str:
    return f"T{T:.3f}".replace(".", "_")


def _map(fn, items, jobs: int):
    """Ordered map, optionally on worker threads."""
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_tradeoff(args, prov: Provenance) -> int:
    from .tradeoff import (
        DEFAULT_PON_GRID,
        gps_best_curve,
        lossy_tradeoff_curve,
        ps_curve_for_p_on,
    )

    if not args.r_out_db:
        raise UsageError("give at least one --r-out-db target")
    losses, grid, out = _losses(args), _grid(args), _out(args)
    p_grid = np.logspace(math.log10(args.p_min), math.log10(args.p_max), args.p_points)
    if args.p_points == len(DEFAULT_PON_GRID) and args.p_min == 1e-4 and args.p_max == 0.5:
        p_grid = DEFAULT_PON_GRID
    cols = ("p_on", "w00", "r1_db", "r2_db", "T", "s")
    failures = []
    n_ok = 0
    for db in sorted(args.r_out_db):
        r_out = db_to_r(db)
        for scheme, build in (("ps", ps_curve_for_p_on), ("gps", gps_best_curve)):
            curve = build(r_out, p_grid)
            failures += [
                {"curve": f"{scheme} {db:g} dB", "p_on": p, "reason": why} for p, why in curve.failures
            ]
            if not curve.points:
                continue
            n_ok += 1
            stem = out / f"{scheme}_{_db_tag(db)}"
            write_rows(stem, cols, curve.rows(), prov, args.format)
            if not losses.is_lossless:
                lossy = lossy_tradeoff_curve(curve, losses, grid)
                write_rows(out / f"{scheme}_{_db_tag(db)}_lossy", cols, lossy.rows(), prov, args.format)
    if failures:
        write_rows(out / "tradeoff_failures", ("curve", "p_on", "reason"), failures, prov, args.format)
        log.info("%d curve points were infeasible (see tradeoff_failures)", len(failures))
    return EXIT_OK if n_ok else EXIT_INFEASIBLE


def _t_values(args) -> list:
    if args.t_step:
        n = int(round((args.t_stop - args.t_start) / args.t_step))
        return [round(args.t_start + k * args.t_step, 12) for k in range(n + 1)]
    return sorted(args.t or [round(0.1 * k, 10) for k in range(1, 10)])


def cmd_sweep(args, prov: Provenance) -> int:
    if args.r1_db is None or args.r2_db is None:
        raise UsageError("sweep needs --r1-db and --r2-db")
    losses, grid, out = _losses(args), _grid(args), _out(args)
    ts = _t_values(args)
    for T in ts:
        if not 0 < T < 1:
            raise UsageError(f"transmissivity {T} outside (0, 1)")
    axis = grid.axis

    def point(T):
        row = {"T": T}
        files = []
        for tag, lb in (("lossless", LossBudget()), ("lossy", losses)):
            if tag == "lossy" and losses.is_lossless:
                continue
            spec = HeraldSpec.from_db(args.r1_db, args.r2_db, T).with_losses(lb)
            try:
                mix = herald_onoff(spec)
                values = mix.grid(axis, axis)
                q = quality_metric(mix, grid, mix.p_on)
                row[f"w00_{tag}"], row[f"p_on_{tag}"] = q.w00, q.p_on
                if args.wigner:
                    files.append((f"wigner_{_t_tag(T)}_{tag}", values))
            except (HeraldError, GridTooCoarseError) as exc:
                row[f"error_{tag}"] = str(exc)
        return row, files

    results = _map(point, ts, args.jobs)
    rows = []
    for row, files in results:
        rows.append(row)
        for stem, values in files:
            write_wigner(out / stem, axis, values, prov, args.format)
    cols = ["T", "w00_lossless", "p_on_lossless"]
    if not losses.is_lossless:
        cols += ["w00_lossy", "p_on_lossy"]
    if any(k.startswith("error") for r in rows for k in r):
        cols += ["error_lossless", "error_lossy"]
    write_rows(out / "sweep_metrics", cols, rows, prov, args.format)
    ok = [r for r in rows if "w00_lossless" in r]
    if ok:
        best = min(ok, key=lambda r: r["w00_lossless"])
        log.info("lossless W00 minimum %.5f at T = %.3f", best["w00_lossless"], best["T"])
    return EXIT_OK if ok else EXIT_INFEASIBLE


def cmd_tables(args, prov: Provenance) -> int:
    from .tables import EXPERIMENT_ROWS, TABLE_COLUMNS, reproduce_row
    from .tomography import CalibrationConstant

    losses = _losses(args) if args.custom_losses else LossBudget.experiment()
    cal = CalibrationConstant(args.calibration) if args.calibration else None
    rows = _map(
        lambda r: reproduce_row(
            r, losses, cal, _grid(args), duty_corrected=args.duty_corrected, fit_squeezing=args.fit
        ),
        EXPERIMENT_ROWS,
        args.jobs,
    )
    write_rows(_out(args) / "tables", TABLE_COLUMNS, rows, prov, args.format)
    for r in rows:
        log.info("%-6s r_out %.3f dB  W00 %.4f  rate %.3g (listed %.3g)",
                 r["label"], r["r_out_db"], r["w00_lossy"], r["rate_pred"], r["rate_listed"])
    return EXIT_OK


def cmd_plan(args, prov: Provenance) -> int:
    from .tradeoff import (
        InfeasibleTargetError,
        evaluate_lossy,
        gps_point,
        p_on_for_best_w,
    )

    if args.r_out_db is None or len(args.r_out_db) != 1:
        raise UsageError("plan needs exactly one --r-out-db value")
    if (args.p_on is None) == (args.w00 is None):
        raise UsageError("give exactly one of --p-on or --w00")
    r_out = db_to_r(args.r_out_db[0])
    try:
        p_on = args.p_on if args.p_on is not None else p_on_for_best_w(args.w00)
        pt = gps_point(r_out, p_on, mirrored=args.mirrored)
    except (InfeasibleTargetError, HeraldError, ValueError) as exc:
        log.error("infeasible target: %s", exc)
        return EXIT_INFEASIBLE
    payload = {
        "target": {"r_out_db": args.r_out_db[0], "p_on": args.p_on, "w00": args.w00},
        "r1_db": r_to_db(pt.r1),
        "r2_db": r_to_db(pt.r2),
        "T": pt.T,
        "s": pt.s,
        "lossless": {"p_on": pt.p_on, "w00": pt.w00},
    }
    losses = _losses(args)
    if not losses.is_lossless:
        lp = evaluate_lossy(pt, losses, _grid(args))
        payload["lossy"] = {"p_on": lp.p_on, "w00": lp.w00, "losses": vars(losses)}
    write_json(_out(args) / "plan.json", payload, prov)
    log.info("r1 %.3f dB, r2 %.3f dB, T %.4f", payload["r1_db"], payload["r2_db"], pt.T)
    return EXIT_OK


def oracle_case(spec: HeraldSpec, axis, cutoff: int = 40, inject_error: bool = False) -> dict:
    """Compare closed-form and Fock-oracle heralding for one spec."""
    from .fock_oracle import herald_spec_fock

    mix = herald_onoff(spec)
    ref_spec = spec
    if inject_error:
        ref_spec = HeraldSpec(spec.r1, -spec.r2 if spec.r2 else 0.1, spec.T).with_losses(spec.losses)
    rho, p_ref = herald_spec_fock(ref_spec, cutoff)
    w_mix = mix.grid(axis, axis)
    w_ref = rho.wigner(axis, axis, check_boundary=False)
    return {
        "r1": spec.r1,
        "r2": spec.r2,
        "T": spec.T,
        "signal_loss": spec.signal_loss,
        "trigger_loss": spec.trigger_loss,
        "dp_on": abs(mix.p_on - p_ref),
        "dw": float(np.max(np.abs(w_mix - w_ref))),
    }


def random_specs(seed: int, n: int, r_max: float = 0.7, loss_levels=(0.0, 0.25, 0.9)) -> list:
    rng = np.random.Generator(np.random.Philox(seed))
    specs = []
    for _ in range(n):
        r1, r2 = rng.uniform(-r_max, r_max, 2)
        T = rng.uniform(0.1, 0.95)
        sl, tl = rng.choice(loss_levels, 2)
        specs.append(HeraldSpec(float(r1), float(r2), float(T), signal_loss=float(sl), trigger_loss=float(tl)))
    return specs


def cmd_oracle_check(args, prov: Provenance) -> int:
    axis = np.linspace(-args.grid_extent, args.grid_extent, args.grid_points)
    specs = random_specs(args.seed, args.n_cases)
    rows = _map(lambda s: oracle_case(s, axis, args.cutoff, args.inject_error), specs, args.jobs)
    for r in rows:
        r["pass"] = int(r["dp_on"] <= args.tol and r["dw"] <= args.tol)
    cols = ("r1", "r2", "T", "signal_loss", "trigger_loss", "dp_on", "dw", "pass")
    write_rows(_out(args) / "oracle_check", cols, rows, prov, args.format)
    n_fail = sum(1 - r["pass"] for r in rows)
    worst = max(max(r["dp_on"], r["dw"]) for r in rows)
    print(f"oracle-check: {len(rows) - n_fail}/{len(rows)} passed, worst deviation {worst:.2e} (tol {args.tol:g})")
    return EXIT_VERIFY if n_fail else EXIT_OK


def _tomo_state(args):
    from .fock_oracle import FockDensityMatrix, herald_spec_fock
    from .tables import ROWS_BY_LABEL

    losses = _losses(args) if args.custom_losses else LossBudget.experiment()
    if args.preset == "vacuum":
        m = np.zeros((args.cutoff + 1, args.cutoff + 1), complex)
        m[0, 0] = 1
        return FockDensityMatrix(m), None
    if args.preset:
        spec = ROWS_BY_LABEL[args.preset].spec
    elif args.r1_db is not None and args.r2_db is not None and args.t:
        spec = HeraldSpec.from_db(args.r1_db, args.r2_db, args.t[0])
    else:
        raise UsageError("tomo-sim needs --preset or all of --r1-db, --r2-db, --t")
    spec = spec.with_losses(losses)
    rho, p = herald_spec_fock(spec, args.cutoff)
    return rho, p


def cmd_tomo_sim(args, prov: Provenance) -> int:
    from . import tomography as tm

    rho, p_on = _tomo_state(args)
    out, grid = _out(args), _grid(args)
    phases = np.deg2rad(np.arange(args.phases) * 180.0 / args.phases)
    data = tm.synthesize_homodyne(rho, phases, args.samples, args.seed)
    data.write_csv(out / "homodyne.csv", prov.lines())
    res = tm.mle_reconstruct(data, N=args.mle_cutoff, max_iter=args.max_iter)
    write_json(out / "reconstruction.json", res.rho.to_dict(), prov)
    write_wigner(out / "reconstruction_wigner", grid.axis, res.rho.wigner(grid.axis, grid.axis, check_boundary=False),
                 prov, args.format)

    def estimators(state):
        q = tm.density_quality(state, grid)
        try:
            r_est = tm.fit_output_squeezing(state)
        except tm.FitError:
            r_est = float("nan")
        return q.w00, r_est

    w_true, r_true = estimators(rho)
    w_rec, r_rec = estimators(res.rho)
    truth = rho.padded(max(rho.dim, res.rho.dim)).matrix
    rec = res.rho.padded(truth.shape[0]).matrix
    sq = _sqrtm_psd(truth)
    fid = float(np.real(np.trace(_sqrtm_psd(sq @ rec @ sq))) ** 2)
    metrics = {
        "p_on": p_on,
        "true": {"w00": w_true, "r_est_db": r_to_db(r_true) if math.isfinite(r_true) else None},
        "reconstructed": {
            "w00": w_rec,
            "r_est_db": r_to_db(r_rec) if math.isfinite(r_rec) else None,
            "fidelity_to_truth": fid,
            "fidelity_from_w00": tm.fidelity_from_w00(max(min(w_rec, 1 / math.pi), -1 / math.pi)),
        },
        "mle": {"iterations": res.iterations, "converged": res.converged, "loglik": res.loglik[-1]},
        "samples": {"phases": int(args.phases), "per_phase": int(args.samples)},
    }
    if math.isfinite(r_rec):
        metrics["reconstructed"]["fidelity_to_fit"] = tm.squeezed_photon_overlap(res.rho, r_rec)
    if args.repeats > 1:
        spread = tm.monte_carlo_spread(
            rho, args.repeats, args.samples, args.seed + 1, args.mle_cutoff, phases, grid
        )
        metrics["monte_carlo"] = {"repeats": args.repeats, "w00_mean": spread["mean"], "w00_std": spread["std"]}
    if not res.converged:
        log.warning("MLE did not converge; metrics refer to the last iterate")
    write_json(out / "tomo_metrics.json", metrics, prov)
    log.info("W00 %.4f -> %.4f, fidelity %.4f", w_true, w_rec, fid)
    return EXIT_OK


def _sqrtm_psd(m):
    vals, vecs = np.linalg.eigh(m)
    return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p, seed=False):
    g = p.add_argument_group("losses and grid")
    g.add_argument("--signal-loss", type=float, default=0.0)
    g.add_argument("--trigger-loss", type=float, default=0.0)
    g.add_argument("--fake-fraction", type=float, default=0.0)
    g.add_argument("--grid-extent", type=float, default=5.0)
    g.add_argument("--grid-points", type=int, default=201)
    p.add_argument("--out", help="output directory (default: $PHOTONSUB_OUT_DIR or ./photonsub_out)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for independent points")
    p.add_argument("--seed", type=int, default=0 if seed else None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="photonsub", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"photonsub {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tradeoff", help="PS and GPS trade-off curves")
    p.add_argument("--r-out-db", type=float, nargs="*", default=None)
    p.add_argument("--p-min", type=float, default=1e-4)
    p.add_argument("--p-max", type=float, default=0.5)
    p.add_argument("--p-points", type=int, default=60)
    _common(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("sweep", help="Wigner grids and metrics versus T")
    p.add_argument("--r1-db", type=float)
    p.add_argument("--r2-db", type=float)
    p.add_argument("--t", type=float, nargs="+", help="transmissivities (default 0.1..0.9)")
    p.add_argument("--t-start", type=float, default=0.01)
    p.add_argument("--t-stop", type=float, default=0.99)
    p.add_argument("--t-step", type=float, default=None, help="regular sweep instead of --t")
    p.add_argument("--no-wigner", dest="wigner", action="store_false", help="metrics only")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tables", help="simulate the reference operating points")
    p.add_argument("--calibration", type=float, help="override C (cps per unit P_on)")
    p.add_argument("--custom-losses", action="store_true", help="use the loss flags instead of the experimental budget")
    p.add_argument("--duty-corrected", action="store_true", help="report rates divided by the 13%% duty cycle")
    p.add_argument("--fit", action="store_true", help="also fit r_est with the Fock oracle")
    _common(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("plan", help="GPS parameters for a target")
    p.add_argument("--r-out-db", type=float, nargs=1)
    p.add_argument("--p-on", type=float)
    p.add_argument("--w00", type=float)
    p.add_argument("--mirrored", action="store_true", help="put the larger squeezing on the second input")
    _common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("oracle-check", help="closed form versus Fock oracle")
    p.add_argument("--n-cases", type=int, default=50)
    p.add_argument("--cutoff", type=int, default=40)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--inject-error", action="store_true", help="self-test: corrupt the oracle input")
    _common(p, seed=True)
    p.set_defaults(func=cmd_oracle_check, grid_points=41)

    p = sub.add_parser("tomo-sim", help="synthetic homodyne tomography")
    p.add_argument("--preset", help="vacuum or a table label such as GPS-2")
    p.add_argument("--r1-db", type=float)
    p.add_argument("--r2-db", type=float)
    p.add_argument("--t", type=float, nargs=1)
    p.add_argument("--custom-losses", action="store_true", help="use the loss flags instead of the experimental budget")
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--phases", type=int, default=12)
    p.add_argument("--cutoff", type=int, default=40, help="Fock cutoff of the generating state")
    p.add_argument("--mle-cutoff", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--repeats", type=int, default=0, help="extra datasets for a Monte-Carlo W00 spread")
    _common(p, seed=True)
    p.set_defaults(func=cmd_tomo_sim)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    prov = Provenance(("photonsub", *argv), args.seed)
    try:
        return args.func(args, prov)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"photonsub: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"photonsub: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
