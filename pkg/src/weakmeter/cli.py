"""``weakmeter`` command line: sweeps, pointer distributions and extrema as CSV.

Exit codes: 0 success, 1 configuration error, 2 physics-domain error
(vanishing postselection, degenerate geometry), 3 internal numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import engine as en
from . import probe as pm
from . import spin as sp
from .config import parse_config
from .errors import (ConfigError, NumericalAssertionError, OrthogonalPostselectionError,
                     PhysicsDomainError, RegimeNotApplicableError, ValidationError,
                     VanishingPostselectionError)
from .quantum_core import bloch_to_spinor, spin_observable

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_COLUMNS = ["exact_A", "approx_A", "re_Aw", "im_Aw", "exact_var", "approx_var",
                 "postselection_probability"]
COMPARE_COLUMNS = ["closed_form_A", "closed_form_var", "approx_error", "approx_rel_error",
                   "engine_closed_form_diff"]


def fmt(value):
    """Round-trippable text for a float; ``""`` for missing or non-finite."""
    if value is None:
        return ""
    value = float(value)
    return format(value, ".17g") if math.isfinite(value) else ""


# --- scenario construction ------------------------------------------------------

def scenario(cfg):
    geom = sp.SpinGeometry(cfg.theta, cfg.gamma, cfg.phi)
    return sp.SpinScenario(geom, cfg.probe, pm.coupling_moments(cfg.window), cfg.lam)


def measurement_setup(cfg):
    geom = sp.SpinGeometry(cfg.theta, cfg.gamma, cfg.phi)
    return en.MeasurementSetup(bloch_to_spinor(geom.n_i), bloch_to_spinor(geom.n_f),
                               spin_observable(geom.n), cfg.probe, cfg.window, cfg.lam)


def pointer_grid(cfg, setup):
    if cfg.grid.auto:
        return en.PointerGrid.default_for(setup, n_points=cfg.grid.n_points)
    return en.PointerGrid(cfg.grid.p_min, cfg.grid.p_max, cfg.grid.n_points)


# --- sweep ---------------------------------------------------------------------

def evaluate_row(cfg, compare=False):
    """All sweep columns for one configuration point, plus a flag string.

    Failures in one quantity blank its columns and add a flag instead of
    raising, so a sweep never aborts on a single bad point.
    """
    row = dict.fromkeys(SWEEP_COLUMNS + (COMPARE_COLUMNS if compare else []))
    flags = []
    try:
        setup = measurement_setup(cfg)
        dist = en.conditional_distribution(setup, pointer_grid(cfg, setup))
        row["exact_A"] = dist.mean() / cfg.lam
        row["exact_var"] = dist.variance() / cfg.lam**2
        row["postselection_probability"] = dist.postselection_probability
        if dist.weak_limit_suspect:
            flags.append("weak_limit_suspect")
    except VanishingPostselectionError:
        flags.append("vanishing_postselection")
    except ValidationError as exc:
        flags.append(f"invalid:{exc}")
        return row, flags
    except NumericalAssertionError:
        flags.append("numeric_assertion")

    sc = scenario(cfg)
    moments = sc.moments
    try:
        report = en.weak_value(bloch_to_spinor(sc.geometry.n_i), bloch_to_spinor(sc.geometry.n_f),
                               spin_observable(sc.geometry.n))
        row["re_Aw"] = report.A_w.real
        row["im_Aw"] = report.A_w.imag
        row["approx_A"] = en.weak_average_approx(report, cfg.probe, moments)
        row["approx_var"] = en.weak_variance_approx(report, cfg.probe, moments, cfg.lam)
    except OrthogonalPostselectionError:
        flags.append("orthogonal_postselection")

    if compare:
        try:
            row["closed_form_A"] = sp.exact_average_spin(sc)
            row["closed_form_var"] = sp.exact_variance_spin(sc)
        except VanishingPostselectionError:
            pass
        if row["exact_A"] is not None and row["approx_A"] is not None:
            err = row["exact_A"] - row["approx_A"]
            row["approx_error"] = err
            if row["exact_A"] != 0:
                row["approx_rel_error"] = err / abs(row["exact_A"])
        if row["exact_A"] is not None and row["closed_form_A"] is not None:
            row["engine_closed_form_diff"] = row["exact_A"] - row["closed_form_A"]

    for key, value in row.items():
        if value is not None and not math.isfinite(value):
            row[key] = None
            flags.append(f"nonfinite:{key}")
    return row, flags


def _row_job(args):
    cfg, variable, value, compare = args
    try:
        point = cfg.at(variable, value)
    except ValidationError as exc:
        return dict.fromkeys(SWEEP_COLUMNS + (COMPARE_COLUMNS if compare else [])), [f"invalid:{exc}"]
    return evaluate_row(point, compare)


def run_sweep(cfg, compare=False, jobs=1):
    """Header and rows for a sweep (a single row when no sweep is configured)."""
    if cfg.sweep is None:
        variable, values = "gamma", [cfg.gamma]
    else:
        variable, values = cfg.sweep.variable, cfg.sweep.values()
    columns = SWEEP_COLUMNS + (COMPARE_COLUMNS if compare else [])
    tasks = [(cfg, variable, v, compare) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_row_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_row_job(t) for t in tasks]
    header = [variable] + columns + ["flags"]
    rows = []
    for value, (row, flags) in zip(values, results):
        rows.append([fmt(value)] + [fmt(row[c]) for c in columns] + [";".join(flags)])
    return header, rows


# --- distribution ----------------------------------------------------------------

def run_distribution(cfg):
    """Pointer density from the generic engine and the spin closed form."""
    setup = measurement_setup(cfg)
    dist = en.conditional_distribution(setup, pointer_grid(cfg, setup))
    p = dist.p
    closed = sp.conditional_pdf_spin(scenario(cfg), p)
    header = ["p", "A", "density", "closed_form_density"]
    rows = [[fmt(pi), fmt(pi / cfg.lam), fmt(d), fmt(c)]
            for pi, d, c in zip(p, dist.density, closed)]
    return header, rows, dist.postselection_probability


# --- extrema ---------------------------------------------------------------------

def run_extrema(cfg):
    """Closed-form extrema with brute-force confirmations, one CSV row each."""
    sc = scenario(cfg)
    header = ["quantity", "value", "gamma", "phi", "label", "regime"]
    rows = []
    for branch in ("upper", "lower"):
        name = f"A_extremum_{branch}"
        ext = sp.extremum(sc, branch)
        rows.append([name, fmt(ext.A_m), fmt(ext.gamma_star), fmt(cfg.phi), ext.label, ext.regime])
        if ext.label == "analytic":
            num = sp.numeric_extremum(sc, branch)
            rows.append([name, fmt(num.A_m), fmt(num.gamma_star), fmt(cfg.phi), "numeric", "sweep"])

    try:
        spread = sp.spread_extrema(sc)
    except RegimeNotApplicableError:
        spread = None
    if spread is not None:
        g_min, phi_min = spread.min_locations[0]
        rows.append(["variance_min", fmt(spread.min), fmt(g_min), fmt(phi_min), "analytic", "i"])
        rows.append(["variance_max", fmt(spread.max), fmt(spread.max_location[0]),
                     fmt(spread.max_location[1]), "analytic", "i"])
    (vmin, gmin, pmin), (vmax, gmax, pmax) = sp.numeric_spread_extrema(sc)
    rows.append(["variance_min", fmt(vmin), fmt(gmin), fmt(pmin), "numeric", "sweep"])
    rows.append(["variance_max", fmt(vmax), fmt(gmax), fmt(pmax), "numeric", "sweep"])
    return header, rows


# --- entry point -----------------------------------------------------------------

def write_csv(stream, header, rows):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="weakmeter",
        description="Weak measurement with pre/postselection and probe dynamics.")
    parser.add_argument("command", choices=["sweep", "distribution", "extrema", "compare"])
    parser.add_argument("--config", required=True, type=Path, help="INI scenario file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override one config value")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--degrees", action="store_true", help="angles in the config are degrees")
    parser.add_argument("--out", type=Path, help="write CSV here instead of stdout")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"weakmeter: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text, args.overrides, degrees=args.degrees)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
    except ConfigError as exc:
        print(f"weakmeter: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command in ("sweep", "compare"):
            header, rows = run_sweep(cfg, compare=args.command == "compare", jobs=args.jobs)
        elif args.command == "distribution":
            header, rows, prob = run_distribution(cfg)
            print(f"weakmeter: postselection probability {prob:.17g}", file=sys.stderr)
        else:
            header, rows = run_extrema(cfg)
    except VanishingPostselectionError as exc:
        msg = f"weakmeter: {exc}"
        if exc.probability is not None:
            msg += f" (computed postselection probability {exc.probability:.17g})"
        print(msg, file=sys.stderr)
        return EXIT_PHYSICS
    except PhysicsDomainError as exc:
        print(f"weakmeter: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except NumericalAssertionError as exc:
        print(f"weakmeter: internal numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"weakmeter: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, header, rows)
    else:
        buf = io.StringIO()
        write_csv(buf, header, rows)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
