"""
Command-line front end.

Subcommands: ``fekete``, ``pat-fit``, ``taumin``, ``sweep`` and
``analyze``.  Output goes to stdout (or ``--out``) as CSV or JSON.

Exit status: 0 success, 2 bad input, 3 infeasible deployment or target
EMG not achievable, 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

import numpy as np

from . import __version__
from .capacity import (WATERFILLING, capacity_equal_power, capacity_sweep,
                       capacity_waterfilling, normalize_spectrum)
from .channel import ula_layout
from .eig import SearchConfig, emg, ratio_sweep, spectrum, tau_min_search
from .errors import (ConvergenceError, InfeasibleDeploymentError, NotAchievableError,
                     NulaError)
from .fekete import fekete_certificate, fekete_points
from .geometry import rayleigh_distance, tau_to_distance
from .pat import (THETA_SEARCH_CONFIG, pat_taumin, default_theta_grid, fit_theta,
                  groupwise_deploy, groupwise_fekete_deploy, optimize_theta_for_taumin,
                  pat_points, theta_sweep)
from .scenario import ArraySpec, Scenario, load_scenario, parse_tau_grid
from .table import ResultTable

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_CONVERGENCE = 4

DEFAULT_GAMMA_DB = -10.0
DEFAULT_TAU_GRID = "0.01:4:0.01"
DEFAULT_SNR_GRID_DB = [float(v) for v in range(0, 55, 5)]


class UsageError(NulaError, ValueError):
    """Inconsistent or missing command-line options."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def _int_range(text: str) -> list:
    """``"4"`` or ``"4:10"`` (inclusive) to a list of integers."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K or lo:hi, got {text!r}") from None


def _tau_grid_arg(text: str) -> np.ndarray:
    try:
        return parse_tau_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _metadata(command: str, scenario: Optional[Scenario] = None) -> dict:
    meta = {"tool": "nula", "version": __version__, "command": command}
    if scenario is not None:
        meta["scenario_sha256"] = scenario.digest
    return meta


def _array_from_flag(text: str, K: Optional[int], delta: float) -> ArraySpec:
    """``ula:M``, ``fekete:M[:K]`` or ``pat:M:theta[:K]``."""
    parts = text.split(":")
    try:
        kind, M = parts[0], int(parts[1])
        if kind == "ula" and len(parts) == 2:
            return ArraySpec("ula", ula_layout(M))
        if kind == "fekete" and len(parts) in (2, 3):
            k = int(parts[2]) if len(parts) == 3 else K
            if k is None:
                raise UsageError("fekete arrays need K (fekete:M:K or --emg)")
            dep = groupwise_fekete_deploy(M, k, delta)
            return ArraySpec("groupwise", dep.alphas, dep)
        if kind == "pat" and len(parts) in (3, 4):
            k = int(parts[3]) if len(parts) == 4 else K
            if k is None:
                raise UsageError("pat arrays need K (pat:M:theta:K or --emg)")
            dep = groupwise_deploy(M, k, pat_points(k, float(parts[2])), delta)
            return ArraySpec("groupwise", dep.alphas, dep)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, NulaError):
            raise
        raise UsageError(f"bad --array value {text!r}") from None
    raise UsageError(f"bad --array value {text!r}")


def _load(args) -> Scenario:
    if args.scenario and args.array:
        raise UsageError("give either --scenario or --array, not both")
    if args.scenario:
        return load_scenario(args.scenario)
    if args.array:
        spec = _array_from_flag(args.array, args.emg, args.delta)
        return Scenario(None, spec, spec)
    raise UsageError("a scenario is required (--scenario PATH or --array SPEC)")


def _K(args, scenario) -> int:
    K = args.emg if args.emg is not None else scenario.K
    if K is None:
        raise UsageError("the target EMG is required (--emg or analysis.K)")
    return K


def _gamma_db(args, scenario) -> float:
    if args.gamma_db is not None:
        return args.gamma_db
    if scenario is not None and scenario.gamma_db is not None:
        return scenario.gamma_db
    return DEFAULT_GAMMA_DB


def _tau(args, scenario) -> float:
    if getattr(args, "tau", None) is not None:
        return args.tau
    return scenario.resolved_tau()


def cmd_fekete(args) -> ResultTable:
    table = ResultTable(["K", "k", "point", "objective", "certificate_max"],
                        metadata=_metadata("fekete"))
    for K in args.K:
        sol = fekete_points(K, tol=args.tol)
        cert = fekete_certificate(sol.points)
        for k, p in enumerate(sol.points, start=1):
            table.add(K, k, float(p), sol.objective, cert)
    return table


def cmd_pat_fit(args) -> ResultTable:
    table = ResultTable(["K", "theta", "residual", "degenerate"], metadata=_metadata("pat-fit"))
    for K in args.k_range:
        fit = fit_theta(K)
        table.add(K, fit.theta, fit.residual, fit.degenerate)
    return table


def _search_config(args, base=None) -> SearchConfig:
    base = base or SearchConfig()
    return SearchConfig(step=args.tau_step or base.step, tau_max=args.tau_max or base.tau_max)


def cmd_taumin(args) -> ResultTable:
    scenario = _load(args)
    K, gamma_db = _K(args, scenario), _gamma_db(args, scenario)
    res = tau_min_search(scenario.transmit.layout, scenario.receive.layout, K,
                         db_to_linear(gamma_db), _search_config(args))
    distance = None
    if scenario.geometry is not None and res.tau_min > 0:
        try:
            distance = tau_to_distance(res.tau_min, scenario.geometry, broadside=False)
        except NulaError:
            distance = None
    table = ResultTable(["K", "gamma_db", "tau_min", "bracket_lo", "bracket_hi",
                         "ratio_db", "distance_m"], metadata=_metadata("taumin", scenario))
    table.add(K, gamma_db, res.tau_min, res.bracket[0], res.bracket[1],
              linear_to_db(res.ratio_at_tau), distance)
    return table


def _sweep_ratio(args, scenario):
    K = _K(args, scenario)
    grid = args.tau_grid if args.tau_grid is not None else scenario.tau_grid
    if grid is None:
        grid = parse_tau_grid(DEFAULT_TAU_GRID)
    rows = ratio_sweep(scenario.transmit.layout, scenario.receive.layout, K, grid,
                       threads=args.threads)
    table = ResultTable(["tau", "ratio", "ratio_db"], metadata=_metadata("sweep ratio", scenario))
    for tau, r in rows:
        table.add(float(tau), float(r), linear_to_db(float(r)))
    return table


def _sweep_capacity(args, scenario):
    K = _K(args, scenario)
    tau = _tau(args, scenario)
    snr_grid = scenario.snr_grid_db or DEFAULT_SNR_GRID_DB
    spectra = {"scenario": spectrum(scenario.receive.layout, scenario.transmit.layout, tau).values}
    if scenario.transmit.kind != "ula" or scenario.receive.kind != "ula":
        M, N = scenario.receive.size, scenario.transmit.size
        spectra["ula"] = spectrum(ula_layout(M), ula_layout(N), tau).values
    rows = capacity_sweep(spectra, snr_grid, [WATERFILLING, K], threads=args.threads)
    table = ResultTable(["array", "snr_db", "scheme", "bits_per_s_per_hz"],
                        metadata={**_metadata("sweep capacity", scenario), "tau": tau})
    for row in rows:
        table.add(*row)
    return table


def _sweep_theta(args, scenario):
    K = _K(args, scenario)
    gamma = db_to_linear(_gamma_db(args, scenario))
    M, N = scenario.receive.size, scenario.transmit.size
    dep = scenario.receive.deployment
    delta = dep.intra_spacing if dep is not None else 0.0
    cfg = _search_config(args, THETA_SEARCH_CONFIG)
    grid = default_theta_grid()
    fit = fit_theta(K) if K >= 2 else None
    if fit is not None and not fit.degenerate:
        grid = np.union1d(grid, [fit.theta])
    table = ResultTable(["label", "theta", "tau_min"], metadata=_metadata("sweep theta", scenario))
    for theta, tau in theta_sweep(M, N, K, gamma, grid, delta, cfg, args.threads):
        table.add("grid", float(theta), float(tau))
    if fit is not None and not fit.degenerate:
        try:
            tau_k = pat_taumin(M, N, K, gamma, fit.theta, delta, cfg)
        except NotAchievableError:
            tau_k = math.nan
        table.add("theta_K", fit.theta, tau_k)
    star = optimize_theta_for_taumin(M, N, K, gamma, grid, delta, cfg)
    table.add("theta_star", star.theta_star, star.tau_min)
    return table


def cmd_sweep(args) -> ResultTable:
    scenario = _load(args)
    return {"ratio": _sweep_ratio, "capacity": _sweep_capacity,
            "theta": _sweep_theta}[args.kind](args, scenario)


def cmd_analyze(args) -> ResultTable:
    scenario = _load(args)
    tau = _tau(args, scenario)
    gamma_db = _gamma_db(args, scenario)
    rx, tx = scenario.receive.layout, scenario.transmit.layout
    spec = spectrum(rx, tx, tau)
    table = ResultTable(["quantity", "index", "value"], metadata=_metadata("analyze", scenario))
    table.add("tau", 0, tau)
    geom = scenario.geometry
    if geom is not None:
        if tau > 0:
            try:
                table.add("distance_m", 0, tau_to_distance(tau, geom, broadside=False))
            except NulaError:
                pass
        if len(rx) >= 2 and len(tx) >= 2:
            table.add("rayleigh_distance_m", 0, rayleigh_distance(len(rx), len(tx), geom))
    table.add("gamma_db", 0, gamma_db)
    table.add("emg", 0, emg(spec, db_to_linear(gamma_db)))
    for m, value in enumerate(spec.values, start=1):
        table.add("eigenvalue", m, float(value))
    for m, ratio in enumerate(spec.ratios(), start=1):
        table.add("ratio_db", m, linear_to_db(float(ratio)))
    norm = normalize_spectrum(spec)
    K = args.emg if args.emg is not None else scenario.K
    rank = int(np.count_nonzero(norm.values > 0))
    for snr_db in scenario.snr_grid_db or DEFAULT_SNR_GRID_DB:
        snr = db_to_linear(snr_db)
        table.add("capacity_waterfilling", snr_db,
                  capacity_waterfilling(norm, snr).bits_per_s_per_hz)
        if K is not None and K <= rank:
            table.add(f"capacity_equal_power_{K}", snr_db,
                      capacity_equal_power(norm, snr, K).bits_per_s_per_hz)
    return table


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH", help="write here instead of stdout")


def _add_scenario(p):
    p.add_argument("--scenario", metavar="PATH", help="JSON scenario file")
    p.add_argument("--array", metavar="SPEC",
                   help="same array on both sides: ula:M, fekete:M[:K], pat:M:theta[:K]")
    p.add_argument("--delta", type=float, default=0.0,
                   help="normalized intra-group spacing for --array groupwise arrays")
    p.add_argument("--emg", type=int, metavar="K", help="target effective multiplexing gain")
    p.add_argument("--gamma-db", type=float, help="eigenvalue-ratio threshold in dB")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nula", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fekete", help="Fekete points on [-1, 1]")
    p.add_argument("K", type=_int_range, help="K or lo:hi")
    p.add_argument("--tol", type=float, default=1e-10)
    _add_output(p)
    p.set_defaults(func=cmd_fekete)

    p = sub.add_parser("pat-fit", help="PAT angle fitted to Fekete points")
    p.add_argument("--k-range", type=_int_range, default=list(range(4, 11)),
                   help="K or lo:hi (default 4:10)")
    _add_output(p)
    p.set_defaults(func=cmd_pat_fit)

    p = sub.add_parser("taumin", help="smallest tau reaching the target EMG")
    _add_scenario(p)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-step", type=float)
    _add_output(p)
    p.set_defaults(func=cmd_taumin)

    p = sub.add_parser("sweep", help="ratio, capacity or PAT-angle sweeps")
    p.add_argument("kind", choices=("ratio", "capacity", "theta"))
    _add_scenario(p)
    p.add_argument("--tau-grid", type=_tau_grid_arg, metavar="LO:HI:STEP")
    p.add_argument("--tau", type=float, help="operating tau for capacity sweeps")
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-step", type=float)
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="tau, spectrum, EMG and capacities of one scenario")
    _add_scenario(p)
    p.add_argument("--tau", type=float, help="override the scenario tau")
    _add_output(p)
    p.set_defaults(func=cmd_analyze)
    return parser


def _check_tau(args):
    if getattr(args, "tau", None) is not None and not args.tau >= 0:
        raise UsageError("--tau must be non-negative")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_tau(args)
        for name in ("K", "k_range"):
            for K in getattr(args, name, None) or []:
                if K < 2:
                    raise UsageError(f"K must be at least 2, got {K}")
        text = args.func(args).render(args.format)
    except (InfeasibleDeploymentError, NotAchievableError) as exc:
        print(f"nula: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"nula: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except NulaError as exc:
        print(f"nula: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK
