"""Command-line front end.

    skewlab run --config example-1.5-symmetric [--task NAME] [--max-n N] [--tol T]
                [--precision exact|float] [--output PATH] [--format csv|structured]
    skewlab verify [--suite SELECTOR] [--inject-pressure-offset X]
    skewlab configs

Exit status: 0 success, 2 invalid input, 3 computational signal.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import asdict, is_dataclass
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .cogrowth import cogrowth_series, eta_bounds_check
from .config import ConfigError, SystemConfig, bundled_names, dumps, load
from .groups import HomCandidate
from .paths import DEFAULT_BUDGET, BudgetExceeded
from .recurrence import (UnboundedTilt, fit_homomorphism, positive_recurrence_dichotomy, pressure_gap,
                         product_structure_check, recurrence_diagnose, symmetric_on_average, tilted_pressure_check)
from .shift import mixing_class
from .transfer import (ConvergenceError, NotMixingError, base_pressure, build_transfer, gibbs_measure,
                       partition_Z, partition_Z_star, perron_eigen, skew_partition_Z, skew_pressure,
                       verify_gibbs)

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 2, 3


class TaskError(Exception):
    """A computational signal raised while running a task."""


def _plain(x):
    """Convert results into JSON-friendly values (no timestamps, no ids)."""
    if is_dataclass(x) and not isinstance(x, type):
        return {k: _plain(v) for k, v in asdict(x).items()}
    if isinstance(x, HomCandidate):
        return [_plain(v) for v in x.values]
    if isinstance(x, dict):
        return {_key(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if x is None or isinstance(x, str):
        return x
    return repr(x)


def _key(k):
    if isinstance(k, tuple):
        return ",".join(str(v) for v in k)
    return str(k)


def _need_system(cfg: SystemConfig, task: str):
    if cfg.system is None:
        raise ConfigError(f"task {task!r} needs a group block")
    return cfg.system


def _series_csv(series_list) -> str:
    # several series side by side share the n column
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [s.kind for s in series_list]
    w.writerow(["n"] + [f"{k}:Z_n" for k in names] + [f"{k}:log_Z_n" for k in names])
    for n in range(1, series_list[0].N + 1):
        vals = [_plain(s[n]) for s in series_list]
        logs = [repr(float(s.log_values()[n - 1])) for s in series_list]
        w.writerow([n] + [str(v) for v in vals] + logs)
    return buf.getvalue()


def run_task(cfg: SystemConfig, task: str):
    """Returns ``(outputs, evidence, verdicts, csv_text or None)``."""
    N = cfg.param("N")
    a = cfg.param("anchor")
    tol = cfg.param("tol")
    shift, phi = cfg.shift, cfg.potential
    budget = cfg.param("budget") or DEFAULT_BUDGET
    if task == "mixing":
        rep = mixing_class(shift)
        return {"kind": rep.kind, "period": rep.period, "witness_length": rep.witness_length}, \
            {"witness": _plain(rep.witness), "components": _plain(rep.components)}, {}, None
    if task == "pressure":
        P = base_pressure(shift, phi, tol)
        return {"pressure": P, "rho": math.exp(P)}, {}, {}, None
    if task == "perron":
        pd = perron_eigen(build_transfer(shift, phi), tol)
        return {"rho": pd.rho, "pressure": pd.pressure, "residual_right": pd.residual_right,
                "residual_left": pd.residual_left}, {"h": pd.h, "nu": pd.nu}, {}, None
    if task == "partition":
        Z, Zs = partition_Z(shift, phi, a, N), partition_Z_star(shift, phi, a, N)
        return {"Z": Z.values, "Z_star": Zs.values}, {}, {}, _series_csv([Z, Zs])
    if task == "skew-partition":
        system = _need_system(cfg, task)
        Z = skew_partition_Z(system, phi, a, N, budget=budget)
        Zs = skew_partition_Z(system, phi, a, N, star=True, budget=budget)
        return {"Z": Z.values, "Z_star": Zs.values}, {}, {}, _series_csv([Z, Zs])
    if task == "skew-pressure":
        system = _need_system(cfg, task)
        Z = skew_partition_Z(system, phi, a, N, budget=budget)
        b = skew_pressure(Z, cfg.param("window"), upper_bound=base_pressure(shift, phi, tol))
        return {"estimate": b.estimate, "lower": b.lower, "upper": b.upper, "extrapolated": b.extrapolated},\
            {"bracket": b, "Z": Z.values}, {}, None
    if task == "gibbs":
        mu, pd = gibbs_measure(shift, phi, tol)
        P = cfg.param("pressure")
        P = pd.pressure if P is None else float(P)
        cert = verify_gibbs(mu, phi, P, cfg.param("depth"))
        return {"C": cert.C, "growth_rate": cert.growth_rate, "pressure_used": P}, \
            {"certificate": cert}, {"gibbs": cert.is_gibbs}, None
    if task == "fit":
        fit = fit_homomorphism(_need_system(cfg, task), phi)
        return {"c": fit.theta, "fitted_pressure": fit.fitted_pressure, "drift": fit.drift}, \
            {"iterations": fit.iterations}, {"converged": fit.converged}, None
    if task == "recurrence":
        system = _need_system(cfg, task)
        P = cfg.param("pressure")
        if P is None:
            P = fit_homomorphism(system, phi).fitted_pressure if system.group.kind != "free" else \
                skew_pressure(skew_partition_Z(system, phi, a, N)).extrapolated
        Z = skew_partition_Z(system, phi, a, N)
        Zs = skew_partition_Z(system, phi, a, N, star=True)
        rep = recurrence_diagnose(Z, Zs, float(P))
        return {"pressure_used": rep.pressure_used, "verdict": rep.verdict, "sub_verdict": rep.sub_verdict}, \
            {"diagnostics": rep.diagnostics, "partial_sums": rep.partial_sums,
             "weighted_star_sums": rep.weighted_star_sums}, \
            {"verdict": rep.verdict, "sub_verdict": rep.sub_verdict}, None
    if task == "tilted-pressure":
        rep = tilted_pressure_check(_need_system(cfg, task), phi, N, a)
        return {"fitted_pressure": rep.fitted_pressure, "bracket": [rep.bracket.lower, rep.bracket.upper],
                "c": rep.fit.theta, "base_pressure": rep.base}, \
            {"recurrence": rep.recurrence.diagnostics}, {"asserted": rep.asserted, "passed": rep.passed}, None
    if task == "symmetry":
        system = _need_system(cfg, task)
        P = cfg.param("pressure")
        if P is None:
            P = fit_homomorphism(system, phi).fitted_pressure
        rep = symmetric_on_average(system, phi, float(P), N, cfg.param("ball_radius"))
        return {"sup_ratio": rep.sup_ratio, "pressure_used": float(P)}, \
            {"ratios": rep.ratios, "trend": rep.trend, "inconclusive": rep.inconclusive}, \
            {"bounded": rep.bounded}, None
    if task == "gap":
        rep = pressure_gap(_need_system(cfg, task), phi, N, a)
        return {"base": rep.base, "gap": rep.gap, "gap_estimate": rep.gap_estimate,
                "bracket": [rep.bracket.lower, rep.bracket.upper]}, {}, {"equal": rep.equal}, None
    if task == "product":
        rep = product_structure_check(_need_system(cfg, task), phi, cfg.task.get("tol", 1e-8))
        return _plain(rep), {}, {"passed": rep.passed}, None
    if task == "dichotomy":
        rep = positive_recurrence_dichotomy(_need_system(cfg, task), phi, N, a)
        return {"finite_group": rep.finite_group, "finitely_primitive": rep.finitely_primitive,
                "pressure": rep.pressure, "star_ratio": rep.star_ratio,
                "connecting_lengths": rep.connecting_lengths}, \
            {"recurrence": rep.recurrence.diagnostics}, \
            {"positive": rep.positive, "sub_verdict": rep.recurrence.sub_verdict}, None
    if task == "cogrowth":
        system = _need_system(cfg, task)
        if shift.alphabet_size % 2:
            raise ConfigError("cogrowth needs the free-group shift on 2t symbols")
        rep = cogrowth_series(shift.alphabet_size // 2, system.psi, N, budget=budget)
        check = eta_bounds_check(rep) if rep.lattice() else None
        return {"a": rep.a, "eta_estimate": rep.eta_estimate() if check else None}, \
            {"gamma": rep.gamma, "eta": rep.eta, "divergence_sums": rep.divergence_sums}, \
            {"eta_bounds": check.passed if check else None}, rep.to_csv()
    raise ConfigError(f"unknown task {task!r}; choose from {sorted(TASKS)}")


TASKS = {"mixing", "pressure", "perron", "partition", "skew-partition", "skew-pressure", "gibbs", "fit",
         "recurrence", "tilted-pressure", "symmetry", "gap", "product", "dichotomy", "cogrowth"}


def _flat_csv(outputs: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k in sorted(outputs):
        w.writerow([k, dumps(_plain(outputs[k])).strip().replace("\n", "")])
    return buf.getvalue()


def result_document(cfg: SystemConfig, task: str) -> tuple:
    outputs, evidence, verdicts, csv_text = run_task(cfg, task)
    doc = {
        "metadata": {"timestamp": datetime.now(timezone.utc).isoformat(), "version": __version__},
        "inputs_digest": cfg.digest(),
        "operation": task,
        "parameters": {k: cfg.param(k) for k in ("N", "anchor", "tol", "window", "ball_radius", "depth",
                                                  "pressure")},
        "outputs": _plain(outputs),
        "evidence": _plain(evidence),
        "verdicts": _plain(verdicts),
    }
    return doc, csv_text


def _cmd_run(args) -> int:
    try:
        cfg = load(args.config, args.precision)
        task = dict(cfg.task)
        if args.task:
            task["name"] = args.task
        if args.max_n is not None:
            if args.max_n < 1:
                raise ConfigError("--max-n must be >= 1")
            task["N"] = args.max_n
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("--tol must be positive")
            task["tol"] = args.tol
        if not task.get("name"):
            raise ConfigError("no task given (task block or --task)")
        cfg = SystemConfig(cfg.shift, cfg.potential, cfg.system, task)
        doc, csv_text = result_document(cfg, task["name"])
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, BudgetExceeded, NotMixingError, UnboundedTilt, ValueError,
            ArithmeticError) as e:
        print(f"computation failed: {e}", file=sys.stderr)
        return EXIT_COMPUTE
    if args.format == "csv":
        text = csv_text if csv_text is not None else _flat_csv(doc["outputs"])
    else:
        text = dumps(doc)
    out = args.output or cfg.task.get("output")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .suite import run_check, selected
    try:
        numbers = selected(args.suite)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    failed = 0
    for k in numbers:
        res = run_check(k, args.inject_pressure_offset)
        print(res.line(), flush=True)
        failed += not res.passed
    print(f"{len(numbers) - failed}/{len(numbers)} criteria passed")
    return EXIT_OK if failed == 0 else 1


def _cmd_configs(args) -> int:
    for name in bundled_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skewlab", description=__doc__.split("\n")[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one task on a system description")
    r.add_argument("--config", required=True, help="path to a JSON config or a bundled config name")
    r.add_argument("--task", choices=sorted(TASKS))
    r.add_argument("--max-n", type=int)
    r.add_argument("--tol", type=float)
    r.add_argument("--precision", choices=["exact", "float"])
    r.add_argument("--output")
    r.add_argument("--format", choices=["csv", "structured"], default="structured")
    r.set_defaults(func=_cmd_run)
    v = sub.add_parser("verify", help="run the reproduction suite")
    v.add_argument("--suite", default="all", help="'all', a tag, or a criterion number")
    v.add_argument("--inject-pressure-offset", type=float, default=0.0,
                   help="shift the reference pressure of the Gibbs check (to see it fail)")
    v.set_defaults(func=_cmd_verify)
    c = sub.add_parser("configs", help="list bundled configs")
    c.set_defaults(func=_cmd_configs)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
