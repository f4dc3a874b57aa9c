"""Command-line workbench: figure data reproduction as CSV, single-value
queries, and verification suites, all deterministic under a fixed seed.

Exit codes: 0 success / verification pass, 1 verification failure,
2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import NonPositiveFieldError, SystemParams
from .closed_form import erlang_cdf, erlang_survival
from .montecarlo import McConfig, UpaGprMcEvaluator, eval_det_polynomial, \
    precoder_det_coefficients, sample_channel_batch, upa_gpr_curve_mc
from .asymptotics import inflection_regime_a, inflection_regime_c, regime_b_limits
from .solvers import miso_optimal_precoder, solve_c_thresholds, solve_nu
from .search import (
    SimplexGrid,
    conjecture1_scan,
    maximize_upa_gpr,
    schur_extreme_snr_check,
    tiso_counterexample,
    trace_logdet_inequality_check,
    unimodality_check,
)

# Scenario constants used by the figure commands unless overridden.
BASE_DEFAULTS = {
    "nt": 2, "nr": 2, "rho_db": 10.0, "rate": 1.0, "pmax": 1.0,
    "seed": 12345, "trials": 100_000, "grid_points": 40,
}
FIGURE_DEFAULTS = {
    1: {},
    2: {},
    3: {"nr": 2},
    4: {"nt": 4, "nr": 1, "rho_db": 10.0, "rate": 3.0, "pmax": 2.0},
    5: {"rho_db": 3.0, "pmax": 1.0},
    6: {"rho_db": 3.0, "pmax": 1.0},
}

QUERY_KINDS = ("gpr", "outage", "miso-opt", "nu", "thresholds", "asymptotic")
VERIFY_SUITES = ("conjecture1", "conjecture2", "schur", "appendixA", "tiso")


class ConfigError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _read_config_file(path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_INT_KEYS = {"nt", "nr", "seed", "trials", "grid_points", "n", "samples"}
_FLOAT_KEYS = {"rho_db", "rate", "pmax"}


def _assemble(args, command_defaults) -> dict:
    """flags > config file > per-command defaults > base defaults."""
    cfg = dict(BASE_DEFAULTS)
    cfg.update(command_defaults)
    if getattr(args, "config", None):
        for key, raw in _read_config_file(args.config).items():
            if key in _INT_KEYS:
                cfg[key] = int(raw)
            elif key in _FLOAT_KEYS:
                cfg[key] = float(raw)
            else:
                cfg[key] = raw
    for key in ("nt", "nr", "rho_db", "rate", "pmax", "seed", "trials", "grid_points"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _params(cfg) -> SystemParams:
    try:
        return SystemParams.from_rho_db(cfg["nt"], cfg["nr"], cfg["rho_db"],
                                        cfg["rate"], cfg["pmax"])
    except (NonPositiveFieldError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _write_manifest(path: Path, command, cfg, wall_time, files, extra=None):
    lines = [f"command={command}", f"version={__version__}"]
    for key in sorted(cfg):
        lines.append(f"config.{key}={cfg[key]}")
    if extra:
        for key, value in extra.items():
            lines.append(f"{key}={value}")
    lines.append(f"wall_time_s={wall_time:.3f}")
    for f in files:
        digest = hashlib.sha256(Path(f).read_bytes()).hexdigest()
        lines.append(f"digest.{Path(f).name}={digest}")
    path.write_text("\n".join(lines) + "\n", newline="\n")


# ---------------------------------------------------------------------------
# figure command
# ---------------------------------------------------------------------------

def _upa_family_curve(cfg, pairs, labels):
    """UPA efficiency columns over a shared linear power grid."""
    p_grid = np.linspace(0.0, cfg["pmax"], cfg["grid_points"] + 1)
    columns = []
    for n_t, n_r in pairs:
        params = SystemParams.from_rho_db(n_t, n_r, cfg["rho_db"], cfg["rate"], cfg["pmax"])
        gam, _ = upa_gpr_curve_mc(params, McConfig(cfg["seed"], cfg["trials"]), p_grid[1:])
        columns.append(np.concatenate([[0.0], gam]))
    header = ["p"] + labels
    rows = [(p_grid[i],) + tuple(col[i] for col in columns) for i in range(p_grid.size)]
    return header, rows


def _figure_1(cfg, out_dir):
    ns = (1, 2, 4, 8)
    header, rows = _upa_family_curve(cfg, [(n, n) for n in ns],
                                     [f"gamma_n{n}" for n in ns])
    path = out_dir / "fig1.csv"
    _write_csv(path, header, rows)
    return [path], {}


def _figure_2(cfg, out_dir):
    rows = []
    for n in (1, 2, 4, 8):
        params = SystemParams.from_rho_db(n, n, cfg["rho_db"], cfg["rate"], cfg["pmax"])
        gamma = UpaGprMcEvaluator(params, McConfig(cfg["seed"], cfg["trials"]))
        curve = maximize_upa_gpr(gamma, cfg["pmax"], grid_points=cfg["grid_points"])
        rows.append((n, curve.p_star, curve.gamma_star))
    path = out_dir / "fig2.csv"
    _write_csv(path, ["n", "p_star", "gamma_star"], rows)
    return [path], {}


def _figure_3(cfg, out_dir):
    nts = (1, 2, 4, 8)
    header, rows = _upa_family_curve(cfg, [(nt, cfg["nr"]) for nt in nts],
                                     [f"gamma_nt{nt}" for nt in nts])
    path = out_dir / "fig3.csv"
    _write_csv(path, header, rows)
    return [path], {}


def _figure_4(cfg, out_dir):
    params = _params(cfg)
    if params.n_r != 1:
        raise ConfigError("figure 4 is a single-receive-antenna scenario (--nr 1)")
    n_t, c = params.n_t, params.c
    pbars = np.linspace(cfg["pmax"] / cfg["grid_points"], cfg["pmax"], cfg["grid_points"])
    rows = []
    for pbar in pbars:
        gammas = []
        for ell in range(1, n_t + 1):
            total = min(ell * c / solve_nu(ell), pbar)
            gammas.append(params.rate * erlang_survival(ell, ell * c / total) / total)
        best_l = int(np.argmax(gammas)) + 1
        rows.append((pbar, *gammas, max(gammas), best_l))
    header = ["pbar"] + [f"gamma_l{ell}" for ell in range(1, n_t + 1)] + ["gamma_opt", "best_l"]
    path = out_dir / "fig4.csv"
    _write_csv(path, header, rows)
    return [path], {}


def _structure_comparison(cfg, success_mode):
    """Shared machinery for figures 5 and 6: beamforming (closed form) vs
    UPA vs exhaustive grid search, all scored on one channel set.

    Figure 5 compares success probabilities at full budget; figure 6
    compares the best efficiency achievable within the budget, so its
    exhaustive triangle also visits interior totals.
    """
    params = _params(cfg)
    if params.n_t != 2:
        raise ConfigError("figures 5 and 6 use the two-transmit-antenna scenario")
    mc = McConfig(cfg["seed"], cfg["trials"])
    channels = sample_channel_batch(params, mc.seed, 0, mc.trials)
    coeffs = precoder_det_coefficients(channels, params.rho)
    threshold = 2.0 ** params.rate
    resolution = 32

    def succ(powers):
        det = eval_det_polynomial(coeffs, np.asarray(powers, float))
        return float(np.count_nonzero(det >= threshold)) / mc.trials

    bf_opt_total = params.c / solve_nu(params.n_r)
    pbars = np.linspace(cfg["pmax"] / cfg["grid_points"], cfg["pmax"], cfg["grid_points"])
    rows = []
    for pbar in pbars:
        quantum = pbar / resolution
        if success_mode:
            bf = 1.0 - erlang_cdf(params.n_r, params.c / pbar)
            upa = succ((pbar / 2, pbar / 2))
            best = max(succ((i * quantum, pbar - i * quantum))
                       for i in range(resolution + 1))
        else:
            t_bf = min(bf_opt_total, pbar)
            bf = params.rate * erlang_survival(params.n_r, params.c / t_bf) / t_bf
            upa = best = -math.inf
            for i in range(resolution + 1):
                for j in range(resolution + 1 - i):
                    if i + j == 0:
                        continue
                    total = (i + j) * quantum
                    value = params.rate * succ((i * quantum, j * quantum)) / total
                    best = max(best, value)
                    if i == j:
                        upa = max(upa, value)
        rows.append((pbar, bf, upa, best))

    # budget where the UPA column overtakes beamforming (last sign change,
    # so near-zero noise at tiny budgets cannot fake an early crossover)
    crossover = math.nan
    for i in range(len(rows) - 1):
        if rows[i][2] < rows[i][1] and rows[i + 1][2] >= rows[i + 1][1]:
            crossover = 0.5 * (rows[i][0] + rows[i + 1][0])
    return params, rows, crossover


def _figure_5(cfg, out_dir):
    _, rows, crossover = _structure_comparison(cfg, success_mode=True)
    path = out_dir / "fig5.csv"
    _write_csv(path, ["pbar", "success_bf", "success_upa", "success_best"], rows)
    return [path], {"crossover_w": _fmt(crossover)}


def _figure_6(cfg, out_dir):
    _, rows, crossover = _structure_comparison(cfg, success_mode=False)
    path = out_dir / "fig6.csv"
    _write_csv(path, ["pbar", "gamma_bf", "gamma_upa", "gamma_best"], rows)
    return [path], {"crossover_w": _fmt(crossover)}


_FIGURES = {1: _figure_1, 2: _figure_2, 3: _figure_3, 4: _figure_4,
            5: _figure_5, 6: _figure_6}


def run_figure(args) -> int:
    fig_id = args.id
    cfg = _assemble(args, FIGURE_DEFAULTS[fig_id])
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    files, extra = _FIGURES[fig_id](cfg, out_dir)
    wall = time.perf_counter() - start
    manifest = out_dir / f"fig{fig_id}_manifest.txt"
    _write_manifest(manifest, f"figure {fig_id}", cfg, wall, files, extra)
    for f in files + [manifest]:
        print(f"wrote {f}")
    return 0


# ---------------------------------------------------------------------------
# query command
# ---------------------------------------------------------------------------

def _emit(record):
    for key, value in record.items():
        print(f"{key}={value if isinstance(value, str) else _fmt(value)}")


def run_query(args) -> int:
    cfg = _assemble(args, {})
    kind = args.kind
    if kind == "nu":
        n = args.n if args.n is not None else cfg["nt"]
        if n < 1:
            raise ConfigError(f"nu needs n >= 1, got {n}")
        _emit({"n": n, "nu": solve_nu(n)})
        return 0
    if kind == "thresholds":
        table = solve_c_thresholds(cfg["nt"])
        _emit({f"c_{ell}": value for ell, value in enumerate(table.c_values, start=1)})
        return 0
    params = _params(cfg)
    if kind == "miso-opt":
        sol = miso_optimal_precoder(params)
        total = sol.total()
        gamma = params.rate * erlang_survival(
            sol.active_antennas, sol.active_antennas * params.c / total) / total
        _emit({"active_antennas": sol.active_antennas,
               "per_antenna_power": sol.per_antenna_power,
               "total_power": total, "saturated": sol.saturated, "gamma": gamma})
        return 0
    if kind == "asymptotic":
        regime = args.regime or "b"
        if regime == "a":
            _emit({"regime": "a", "p_tilde": inflection_regime_a(params)})
        elif regime == "b":
            p_star, gamma_star = regime_b_limits(params)
            _emit({"regime": "b", "p_star": p_star, "gamma_star": gamma_star})
        elif regime == "c":
            beta = params.n_r / params.n_t
            _emit({"regime": "c", "beta": beta,
                   "p_tilde": inflection_regime_c(params, beta)})
        else:
            raise ConfigError(f"unknown regime {regime!r}")
        return 0
    if kind in ("gpr", "outage"):
        p = cfg["pmax"]
        if params.n_r == 1:
            outage = erlang_cdf(params.n_t, params.d / p)
            method, se = "closed_form", 0.0
        elif params.n_t == 1:
            outage = erlang_cdf(params.n_r, params.c / p)
            method, se = "closed_form", 0.0
        else:
            from .montecarlo import outage_probability_mc
            from .core import PowerAllocation
            est = outage_probability_mc(PowerAllocation.upa(p, params.n_t), params,
                                        McConfig(cfg["seed"], cfg["trials"]))
            outage, se, method = est.mean, est.std_error, "monte_carlo"
        if kind == "outage":
            _emit({"p": p, "outage": outage, "std_error": se, "method": method})
        else:
            _emit({"p": p, "gamma": params.rate * (1.0 - outage) / p,
                   "std_error": params.rate * se / p, "method": method})
        return 0
    raise ConfigError(f"unknown query kind {kind!r}")


# ---------------------------------------------------------------------------
# verify command
# ---------------------------------------------------------------------------

def _verify_conjecture1(cfg, report):
    params = _params(cfg)
    grid = SimplexGrid(params.n_t, 16, cfg["pmax"])
    pbars = np.linspace(0.04, max(0.4, cfg["pmax"] * 0.4), 10)
    scan = conjecture1_scan(pbars, params, grid, McConfig(cfg["seed"], cfg["trials"]))
    report.append(f"threshold_estimate_w={_fmt(scan.threshold_estimate)}")
    for (lo, hi), structure in scan.regimes:
        report.append(f"gpr_regime={_fmt(lo)}..{_fmt(hi)}:{structure}")
    for (lo, hi), structure in scan.outage_regimes:
        report.append(f"outage_regime={_fmt(lo)}..{_fmt(hi)}:{structure}")
    report.append(f"violations={len(scan.violations)}")
    for pbar, alloc, value in scan.violations:
        report.append(f"violation_at={_fmt(pbar)} powers={alloc.powers} value={_fmt(value)}")
    return bool(scan.violations == () and math.isfinite(scan.threshold_estimate))


def _verify_conjecture2(cfg, report):
    params = _params(cfg)
    p_grid = np.linspace(cfg["pmax"] / cfg["grid_points"], cfg["pmax"], cfg["grid_points"])
    gam, err = upa_gpr_curve_mc(params, McConfig(cfg["seed"], cfg["trials"]), p_grid)
    band = 4.0 * float(np.max(err))
    ok, peaks = unimodality_check(gam, noise_band=band)
    report.append(f"noise_band={_fmt(band)}")
    report.append(f"unimodal={str(ok).lower()}")
    report.append(f"peaks={','.join(str(i) for i in peaks)}")
    return ok


def _verify_schur(cfg, report):
    ok = True
    for regime, rho_db in (("low", -10.0), ("high", 40.0)):
        params = SystemParams.from_rho_db(cfg["nt"], 1, rho_db, cfg["rate"], cfg["pmax"])
        grid = SimplexGrid(params.n_t, 20, cfg["pmax"])
        verdict = schur_extreme_snr_check(params, regime, grid,
                                          McConfig(cfg["seed"], cfg["trials"]))
        expected = "beamforming" if regime == "low" else "upa"
        regime_ok = verdict.ok and verdict.argmax_structure == expected
        report.append(f"{regime}_snr_argmax={verdict.argmax_structure} "
                      f"(expected {expected}), violations={len(verdict.violations)}")
        ok = ok and regime_ok
    return ok


def _verify_appendix_a(cfg, report, samples):
    params = _params(cfg)
    verdict = trace_logdet_inequality_check(samples, params,
                                            McConfig(cfg["seed"], cfg["trials"]))
    report.append(f"samples={verdict.samples}")
    report.append(f"max_gap={_fmt(verdict.max_gap)}")
    report.append(f"pass={str(verdict.ok).lower()}")
    return verdict.ok


def _verify_tiso(cfg, report):
    params = SystemParams.from_rho_db(2, 1, cfg["rho_db"], cfg["rate"], cfg["pmax"])
    witness = tiso_counterexample(params)
    report.append(f"q={_fmt(witness.q)}")
    report.append(f"gamma_level={_fmt(witness.gamma_level)}")
    report.append(f"gamma_midpoint={_fmt(witness.gamma_midpoint)}")
    for p1, p2, g in witness.points:
        report.append(f"point=({_fmt(p1)},{_fmt(p2)}) gamma={_fmt(g)}")
    report.append("level_set_convex=false")
    return not witness.level_set_convex


def run_verify(args) -> int:
    suite = args.suite
    cfg = _assemble(args, {"rho_db": 3.0} if suite == "conjecture1" else {})
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    report = [f"suite={suite}", f"version={__version__}"]
    start = time.perf_counter()
    if suite == "conjecture1":
        ok = _verify_conjecture1(cfg, report)
    elif suite == "conjecture2":
        ok = _verify_conjecture2(cfg, report)
    elif suite == "schur":
        ok = _verify_schur(cfg, report)
    elif suite == "appendixA":
        ok = _verify_appendix_a(cfg, report, args.samples or 1000)
    elif suite == "tiso":
        ok = _verify_tiso(cfg, report)
    else:
        raise ConfigError(f"unknown suite {suite!r}")
    report.append(f"wall_time_s={time.perf_counter() - start:.3f}")
    report.append(f"result={'pass' if ok else 'fail'}")
    path = out_dir / f"verify_{suite}.txt"
    path.write_text("\n".join(report) + "\n", newline="\n")
    for line in report:
        print(line)
    print(f"wrote {path}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--nt", type=int, help="transmit antennas")
    shared.add_argument("--nr", type=int, help="receive antennas")
    shared.add_argument("--rho-db", dest="rho_db", type=float, help="SNR scale in dB")
    shared.add_argument("--rate", type=float, help="target rate R in bpcu")
    shared.add_argument("--pmax", type=float, help="power budget in Watts")
    shared.add_argument("--seed", type=int, help="RNG seed")
    shared.add_argument("--trials", type=int, help="Monte Carlo trials")
    shared.add_argument("--grid-points", dest="grid_points", type=int,
                        help="points per power sweep")
    shared.add_argument("--out", help="output directory")
    shared.add_argument("--config", help="key=value config file")

    parser = argparse.ArgumentParser(prog="mimoee",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", parents=[shared], help="emit figure data as CSV")
    fig.add_argument("id", type=int, choices=sorted(_FIGURES))
    fig.set_defaults(run=run_figure)

    query = sub.add_parser("query", parents=[shared], help="print one key=value record")
    query.add_argument("kind", choices=QUERY_KINDS)
    query.add_argument("--n", type=int, help="order for the nu query")
    query.add_argument("--regime", choices=("a", "b", "c"),
                       help="asymptotic regime for the asymptotic query")
    query.set_defaults(run=run_query)

    verify = sub.add_parser("verify", parents=[shared], help="run a verification suite")
    verify.add_argument("suite", choices=VERIFY_SUITES)
    verify.add_argument("--samples", type=int, help="sample count for appendixA")
    verify.set_defaults(run=run_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (ConfigError, NonPositiveFieldError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced with context, mapped to exit code 3
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
