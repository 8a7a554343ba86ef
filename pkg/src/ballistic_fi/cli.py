"""Command-line interface: ballistic-fi pl|poincare|lsi|langevin|sweep|laplace.

Every subcommand reads a flat key = value config file and writes CSV with
12 significant digits.  Exit codes: 0 success, 2 precondition failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import dynamics
from .config import get_float, get_floats, get_int, get_str, parse_config, potential_params
from .errors import NumericalError, PreconditionError
from .logsobolev import ls_lower_bound_search, ls_upper_bound, ls_variational
from .measures import (
    build_gibbs,
    gaussian_density,
    gibbs_to_csv,
    laplace_gap,
    rescaled_moments,
)
from .pl import hessian_floor_check, pl_constant_static, quadratic_growth_margin
from .poincare import (
    lyapunov_bound_formula,
    lyapunov_criterion_verify,
    muckenhoupt_bracket,
    poincare_spectral,
    select_lyapunov_params,
)
from .potentials import get_potential
from .sweep import (
    SweepConfig,
    render_outputs,
    render_summary_csv,
    require_finite_pl,
    run_sweep,
)

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, header: List[str], rows: List[List]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_bytes(buf.getvalue().encode())
    sys.stdout.write(buf.getvalue())


def _potential_from(cfg: Dict[str, str]):
    return get_potential(get_str(cfg, "potential.name"), **potential_params(cfg))


def _temperatures(cfg: Dict[str, str]) -> List[float]:
    return get_floats(cfg, "temperatures")


def _dump_measures(cfg, p, temps, out: Path, resolution: float) -> None:
    for t in temps:
        mu = build_gibbs(p, t, resolution=resolution)
        (out / f"measure_t{_fmt(t)}.csv").write_text(gibbs_to_csv(mu))


def cmd_pl(cfg: Dict[str, str], out: Path, dump: bool) -> int:
    p = _potential_from(cfg)
    resolution = get_float(cfg, "pl.resolution", 1000.0)
    est = pl_constant_static(p, resolution=resolution)
    if est.divergent:
        row = [est.value, est.bracket[0], est.bracket[1], est.method, True,
               est.diagnostics.get("witness", math.nan), math.nan, math.nan, False]
    else:
        probes = np.linspace(-p.domain_halfwidth, p.domain_halfwidth, 10001)
        qg = quadratic_growth_margin(p, est.value, probes)
        floor = hessian_floor_check(p, est.value)
        row = [est.value, est.bracket[0], est.bracket[1], est.method, False,
               est.diagnostics.get("argmax", math.nan), qg.margin,
               floor.lambda_min, floor.passed]
    _write_csv(out / "pl.csv",
               ["value", "lower", "upper", "method", "divergent", "witness",
                "qg_margin", "lambda_min", "hessian_floor_pass"],
               [row])
    return EXIT_OK


def cmd_poincare(cfg: Dict[str, str], out: Path, dump: bool) -> int:
    p = _potential_from(cfg)
    require_finite_pl(p, resolution=get_float(cfg, "pl.resolution", 1000.0))
    temps = _temperatures(cfg)
    resolution = get_float(cfg, "grid.resolution", 200.0)
    k = get_float(cfg, "lyapunov.k", 1.0)
    rows = []
    for t in temps:
        mu = build_gibbs(p, t, resolution=resolution)
        spec = poincare_spectral(mu)
        muck = muckenhoupt_bracket(mu)
        params = select_lyapunov_params(p, t, k=k)
        bound = lyapunov_bound_formula(params)
        crit = lyapunov_criterion_verify(mu, params)
        rows.append([t, spec.value, muck.bracket[0], muck.bracket[1], bound,
                     crit.min_margin])
    _write_csv(out / "poincare.csv",
               ["t", "spectral", "bracket_low", "bracket_high",
                "lyapunov_bound", "criterion_margin"],
               rows)
    if dump:
        _dump_measures(cfg, p, temps, out, resolution)
    return EXIT_OK


def cmd_lsi(cfg: Dict[str, str], out: Path, dump: bool) -> int:
    p = _potential_from(cfg)
    static = require_finite_pl(p, resolution=get_float(cfg, "pl.resolution", 1000.0))
    temps = _temperatures(cfg)
    resolution = get_float(cfg, "grid.resolution", 200.0)
    iters = get_int(cfg, "lsi.iters", 200)
    step = get_float(cfg, "lsi.step", 0.5)
    rows = []
    for t in temps:
        mu = build_gibbs(p, t, resolution=resolution, c_pl=static.value)
        lower = ls_lower_bound_search(mu, x0_points=get_int(cfg, "lsi.x0_points", 61))
        init = gaussian_density(mu, lower.diagnostics["x0"], lower.diagnostics["sigma"])
        var = ls_variational(mu, init, iters=iters, step=step)
        upper = ls_upper_bound(p, t, mu=mu, c_pl=static.value)
        rows.append([t, lower.value, max(var.value, lower.value), upper.value,
                     lower.diagnostics["x0"], lower.diagnostics["sigma"]])
    _write_csv(out / "lsi.csv",
               ["t", "testfamily_lower", "variational", "tightened_upper", "x0", "sigma"],
               rows)
    if dump:
        _dump_measures(cfg, p, temps, out, resolution)
    return EXIT_OK


def cmd_langevin(cfg: Dict[str, str], out: Path, dump: bool) -> int:
    p = _potential_from(cfg)
    t = get_float(cfg, "langevin.t", _temperatures(cfg)[0] if "temperatures" in cfg else None)
    config = dynamics.EnsembleConfig(
        n_particles=get_int(cfg, "langevin.n_particles", 10000),
        step=get_float(cfg, "langevin.step"),
        horizon=get_float(cfg, "langevin.horizon"),
        seed=get_int(cfg, "seed", 1),
        init_point=get_float(cfg, "langevin.init", 0.0),
        init_spread=get_float(cfg, "langevin.init_spread", 0.0),
    )
    checkpoints = get_floats(cfg, "langevin.checkpoints")
    report = dynamics.empirical_kl_decay(p, t, config, checkpoints)
    rows = [[s.time, s.kl, s.mean, s.var] for s in report.samples]
    _write_csv(out / "langevin.csv", ["time", "kl", "mean", "var"], rows)
    sys.stdout.write(f"# bias_floor,{_fmt(report.bias_floor)}\n")
    sys.stdout.write(f"# caveat,{report.histogram_bias_caveat}\n")
    return EXIT_OK


def cmd_laplace(cfg: Dict[str, str], out: Path, dump: bool) -> int:
    p = _potential_from(cfg)
    temps = _temperatures(cfg)
    resolution = get_float(cfg, "grid.resolution", 200.0)
    rows = []
    for t in temps:
        gap = laplace_gap(p, t)
        mu = build_gibbs(p, t, resolution=resolution)
        mom = rescaled_moments(mu)
        rows.append([t, gap, mom.mean_z, mom.var_z])
    _write_csv(out / "laplace.csv", ["t", "gap", "mean_z", "var_z"], rows)
    if dump:
        _dump_measures(cfg, p, temps, out, resolution)
    return EXIT_OK


def cmd_sweep(cfg: Dict[str, str], out: Path, dump: bool) -> int:
    sweep_cfg = SweepConfig.from_mapping(cfg)
    rows, summary, failures = run_sweep(sweep_cfg)
    if not rows:
        raise NumericalError(
            "all sweep rows failed: " + "; ".join(f"t={f.t}: {f.reason}" for f in failures)
        )
    for fmt in ("csv", "gnuplot", "markdown-table"):
        text = render_outputs(rows, fmt, out_dir=out)
        if fmt == "csv":
            sys.stdout.write(text)
    (out / "summary.csv").write_text(render_summary_csv(summary))
    sys.stdout.write(render_summary_csv(summary))
    for failure in failures:
        sys.stderr.write(f"row t={failure.t} aborted: {failure.reason}\n")

    from .plots import save_sweep_figures

    save_sweep_figures(rows, summary, out)
    if dump:
        p = sweep_cfg.potential()
        _dump_measures(cfg, p, sweep_cfg.temperatures, out, sweep_cfg.grid_resolution)
    return EXIT_OK


COMMANDS = {
    "pl": cmd_pl,
    "poincare": cmd_poincare,
    "lsi": cmd_lsi,
    "langevin": cmd_langevin,
    "sweep": cmd_sweep,
    "laplace": cmd_laplace,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ballistic-fi",
        description="Functional-inequality constants of Gibbs measures at low temperature",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="flat key = value config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--dump-measure", action="store_true",
                        help="also write the Gibbs grid CSV per temperature")
    args = parser.parse_args(argv)

    out = Path(args.out)
    try:
        cfg = parse_config(args.config)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.dump_measure)
    except PreconditionError as exc:
        sys.stderr.write(f"precondition failure: {exc}\n")
        return EXIT_PRECONDITION
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
