"""Command-line front end: ``foldylax {caps,forward,oracle,compare,check,sweep}``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .capacitance import verify_eigenvalue_bounds
from .config import ScenarioConfig, load_config
from .convergence import reference_caps, run_compare, run_forward, sweep
from .errors import (
    ConditionInapplicableError,
    ConfigError,
    DomainError,
    FoldyLaxError,
    InvertibilityError,
    NumericalError,
    UsageError,
)
from .foldy_lax import incident_field, solvability_check, validity_report
from .geometry import compute_stats
from .oracle import oracle_farfield, oracle_solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INVERTIBILITY = 4


def fmt(value) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class Table:
    def __init__(self, name: str, header, rows):
        self.name = name
        self.header = list(header)
        self.rows = [list(r) for r in rows]

    def render(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()


def farfield_table(name, pattern) -> Table:
    header = ["x1", "x2", "x3"]
    for part in ("up", "us"):
        for i in (1, 2, 3):
            header += [f"{part}{i}_re", f"{part}{i}_im"]
    rows = []
    for x, up, us in zip(pattern.directions, pattern.up, pattern.us):
        row = list(x)
        for vec in (up, us):
            for c in vec:
                row += [c.real, c.imag]
        rows.append(row)
    return Table(name, header, rows)


def charge_table(name, charges) -> Table:
    header = ["m", "q1_re", "q1_im", "q2_re", "q2_im", "q3_re", "q3_im"]
    rows = []
    for m, q in enumerate(np.asarray(charges)):
        row = [m]
        for c in q:
            row += [c.real, c.imag]
        rows.append(row)
    return Table(name, header, rows)


def density_table(name, sol) -> Table:
    header = ["panel", "obstacle", "phi1_re", "phi1_im", "phi2_re", "phi2_im", "phi3_re", "phi3_im"]
    rows = []
    for p, (owner, phi) in enumerate(zip(sol.owner, sol.density)):
        row = [p, int(owner)]
        for c in phi:
            row += [c.real, c.imag]
        rows.append(row)
    return Table(name, header, rows)


def _require_obstacles(scenario: ScenarioConfig):
    if scenario.scattering.M == 0:
        raise ConfigError("config defines no [[obstacle]] entries")


def _caps(scenario):
    sc = scenario.scattering
    return reference_caps([ob.shape for ob in sc.obstacles], sc.lame)


def cmd_caps(scenario: ScenarioConfig):
    _require_obstacles(scenario)
    sc = scenario.scattering
    shapes = {}
    for ob in sc.obstacles:
        shapes.setdefault(id(ob.shape), ob.shape)
    caps = reference_caps(list(shapes.values()), sc.lame)
    header = ["shape_id", "panels"] + [f"c{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    header += ["acoustic", "eig_min", "eig_max", "condition", "eigen_bounds"]
    rows = []
    for cap in caps:
        row = cap.as_row()
        report = verify_eigenvalue_bounds(cap, sc.lame)
        rows.append(
            [row["shape_id"], row["panels"]]
            + [row[f"c{i}{j}"] for i in (1, 2, 3) for j in (1, 2, 3)]
            + [row["acoustic"], report.eigenvalues[0], report.eigenvalues[-1], cap.condition,
               "ok" if report.ok else "violated"]
        )
    return [Table("caps.csv", header, rows)]


def cmd_forward(scenario: ScenarioConfig):
    _require_obstacles(scenario)
    charges, pattern = run_forward(scenario.scattering, _caps(scenario), scenario.directions)
    return [
        Table("charges.csv", *_charge_parts(charges.charges)),
        farfield_table("farfield.csv", pattern),
    ]


def _charge_parts(charges):
    t = charge_table("", charges)
    return t.header, t.rows


def cmd_oracle(scenario: ScenarioConfig):
    _require_obstacles(scenario)
    sc = scenario.scattering
    sol = oracle_solve(sc)
    pattern = oracle_farfield(sol, scenario.directions, sc.wn, sc.lame)
    return [
        Table("oracle_charges.csv", *_charge_parts(sol.charges)),
        farfield_table("oracle_farfield.csv", pattern),
        density_table("oracle_density.csv", sol),
    ]


_METRIC_KEYS = ("max_abs", "max_rel", "max_abs_p", "max_abs_s", "rms_abs_p", "rms_abs_s",
                "max_rel_p", "max_rel_s", "rms_rel_p", "rms_rel_s")


def cmd_compare(scenario: ScenarioConfig):
    _require_obstacles(scenario)
    run = run_compare(scenario.scattering, _caps(scenario), scenario.directions)
    row = run.metrics.as_row()
    return [
        Table("compare.csv", _METRIC_KEYS, [[row[k] for k in _METRIC_KEYS]]),
        farfield_table("farfield.csv", run.foldy),
        farfield_table("oracle_farfield.csv", run.oracle),
    ]


def check_rows(scenario: ScenarioConfig):
    _require_obstacles(scenario)
    sc = scenario.scattering
    stats = compute_stats(sc.obstacles)
    report = validity_report(stats, sc.wn, sc.lame)
    rows = [
        ("M", stats.M), ("a", stats.a), ("d", stats.d), ("diam_omega", stats.diam_omega),
        ("omega", sc.omega), ("N_omega", report.N_omega), ("t", report.t),
        ("t_positive", report.t_positive), ("sqrtM1_a_over_d", report.sqrtM1_a_over_d),
        ("footnote_small_domain", report.footnote_small_domain),
    ]
    if not report.t_positive:
        rows.append(("verdict", "not applicable (t <= 0)"))
        return rows, report
    caps = [cap.scaled(ob.scale) for cap, ob in zip(_caps(scenario), sc.obstacles)]
    incident = incident_field(sc.wave, sc.centers, sc.wn)
    result = solvability_check(caps, stats, report, sc.lame, incident)
    rows += [("inequality_lhs", result.lhs), ("inequality_rhs", result.rhs)]
    rows.append(("verdict", "certified" if result.holds else "not certified"))
    if result.holds:
        rows += [("q_sum_bound", result.bound), ("q_sum_eigen_bound", result.eigen_bound)]
    return rows, report


def cmd_check(scenario: ScenarioConfig):
    rows, report = check_rows(scenario)
    summary = []
    if report.t_positive and report.N_omega == 1:
        summary.append(f"t>0, N_omega=1 (t = {fmt(report.t)})")
    elif report.t_positive:
        summary.append(f"t>0, N_omega={report.N_omega} (t = {fmt(report.t)})")
    else:
        summary.append(f"t<=0, N_omega={report.N_omega} (t = {fmt(report.t)})")
    verdict = dict(rows)["verdict"]
    summary.append(f"solvability inequality: {verdict}")
    return [Table("check.csv", ["quantity", "value"], rows)], summary


def cmd_sweep(scenario: ScenarioConfig):
    _require_obstacles(scenario)
    if scenario.sweep_parameter is None:
        raise UsageError("sweep needs a [sweep] section with 'parameter' and 'values'")
    result = sweep(scenario.scattering, _caps(scenario), scenario.directions,
                   scenario.sweep_parameter, scenario.sweep_values)
    header = ["row", result.parameter] + list(_METRIC_KEYS)
    rows = []
    for v, m in zip(result.values, result.metrics):
        r = m.as_row()
        rows.append(["value", v] + [r[k] for k in _METRIC_KEYS])
    rows.append(["slope", result.slope] + [""] * len(_METRIC_KEYS))
    return [Table("sweep.csv", header, rows)]


COMMANDS = {
    "caps": cmd_caps,
    "forward": cmd_forward,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "check": cmd_check,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foldylax",
        description="Elastic scattering by many small rigid bodies: point-interaction model and BEM reference.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="scenario TOML file")
    parser.add_argument("--out", type=Path, help="output directory (default: [output] dir, else stdout)")
    parser.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
    return parser


def _emit(tables, out_dir: Path | None, stdout):
    if out_dir is None:
        for k, table in enumerate(tables):
            if k:
                stdout.write("\n")
            stdout.write(table.render())
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    for table in tables:
        path = out_dir / table.name
        path.write_text(table.render())
        stdout.write(f"{path}\n")


def _validity_or_none(scenario):
    if scenario is None:
        return None
    try:
        sc = scenario.scattering
        return validity_report(compute_stats(sc.obstacles), sc.wn, sc.lame)
    except FoldyLaxError:
        return None


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.threads is not None and args.threads < 1:
        stderr.write("error: --threads must be >= 1\n")
        return EXIT_CONFIG
    scenario = None
    try:
        with threadpool_limits(limits=args.threads):
            scenario = load_config(args.config)
            result = COMMANDS[args.command](scenario)
            summary = []
            if isinstance(result, tuple):
                result, summary = result
            out_dir = args.out or scenario.output_dir
            _emit(result, out_dir, stdout)
            for line in summary:
                stdout.write(line + "\n")
    except (ConfigError, UsageError, DomainError) as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except InvertibilityError as exc:
        stderr.write(f"invertibility failure: {exc}\n")
        report = exc.report if exc.report is not None else _validity_or_none(scenario)
        if report is not None:
            stderr.write(f"validity report: {report}\n")
        return EXIT_INVERTIBILITY
    except (NumericalError, ConditionInapplicableError) as exc:
        stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except FoldyLaxError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
