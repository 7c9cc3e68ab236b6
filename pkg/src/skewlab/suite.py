"""Reproduction suite: one check function per acceptance criterion.

Each check returns a :class:`CheckResult` with the measured values and the
tolerance it was judged against. ``run_suite`` filters by selector (a tag
such as ``"cogrowth"`` or a criterion number).
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .cogrowth import cogrowth_series, eta_bounds_check
from .config import bundled_names, load
from .groups import FiniteGroup, GroupExtendedSystem, HomCandidate, LatticeGroup, SymbolMap
from .potentials import LocallyConstantPotential, potential_from_symbol_weights, tilt
from .recurrence import (TiltedFamily, fit_homomorphism, positive_recurrence_dichotomy, pressure_gap,
                         product_structure_check, recurrence_diagnose, symmetric_on_average)
from .shift import MarkovShift, sigma_free
from .transfer import (base_pressure, gibbs_measure, partition_Z, partition_Z_star, renewal_residuals,
                       skew_partition_Z, skew_pressure, verify_gibbs)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    tolerance: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] {self.number:2d} {self.name}: {vals} (tolerance: {self.tolerance}; {self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    if isinstance(v, tuple):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def walk_system(d: int) -> GroupExtendedSystem:
    """Simple walk on Z^d: the full 2d-shift with steps +-e_k."""
    ims = []
    for k in range(d):
        e = [0] * d
        e[k] = 1
        ims.append(tuple(e))
        ims.append(tuple(-x for x in e))
    return GroupExtendedSystem(MarkovShift.full(2 * d), SymbolMap(LatticeGroup(d), tuple(ims)))


def signed_walk(weights) -> tuple:
    system = walk_system(1)
    return system, potential_from_symbol_weights(system.shift, [Fraction(w) for w in weights])


def cyclic_extension(order: int, psi) -> GroupExtendedSystem:
    return GroupExtendedSystem(MarkovShift.full(2), SymbolMap(FiniteGroup.cyclic(order), tuple(psi)))


# criteria


def check_base_pressure() -> CheckResult:
    errs = {}
    for t in range(2, 7):
        shift = MarkovShift.full(t)
        errs[f"full{t}"] = abs(base_pressure(shift, LocallyConstantPotential.zero(shift)) - math.log(t))
    for t in (2, 3):
        shift = sigma_free(t)
        errs[f"F{t}"] = abs(base_pressure(shift, LocallyConstantPotential.zero(shift)) - math.log(2 * t - 1))
    worst = max(errs.values())
    return CheckResult(1, "base pressure exactness", worst <= 1e-10, {"max_error": worst}, "1e-10")


def check_signed_walk() -> CheckResult:
    # homomorphism weights (s, 1/s): every zero-sum word has weight 1
    system, phi = signed_walk((Fraction(3, 2), Fraction(2, 3)))
    Z = skew_partition_Z(system, phi, 0, 40)
    exact = all(Z[2 * n] == comb(2 * n - 1, n - 1) for n in range(1, 13)) and \
        all(Z[2 * n - 1] == 0 for n in range(1, 13))
    sym, phi1 = signed_walk((1, 1))
    b = skew_pressure(skew_partition_Z(sym, phi1, 0, 40), upper_bound=base_pressure(sym.shift, phi1))
    in_bracket = b.contains(math.log(2)) and b.width <= 0.08
    base_err = 0.0
    for w in ((1, 1), (2, 3), (1, 4), (Fraction(3, 2), Fraction(2, 3))):
        s, p = signed_walk(w)
        base_err = max(base_err, abs(base_pressure(s.shift, p) - math.log(float(w[0]) + float(w[1]))))
    # pressure gap vanishes iff c = 1: weights (s, 1/s) scaled to mean 1 is c = 1 only for s = 1
    gaps = {}
    for w in ((1, 1), (1, 4), (2, 1)):
        s, p = signed_walk(w)
        g = pressure_gap(s, p, 40)
        gaps[w] = (g.gap, g.equal)
    iff = gaps[(1, 1)][1] and gaps[(1, 1)][0] == 0 and not gaps[(1, 4)][1] and gaps[(1, 4)][0] > 0 \
        and not gaps[(2, 1)][1] and gaps[(2, 1)][0] > 0
    passed = exact and in_bracket and base_err <= 1e-10 and iff
    return CheckResult(2, "signed walk on Z reproduction", passed,
                       {"binomial_exact": exact, "bracket": (round(b.lower, 6), round(b.upper, 6)),
                        "width": b.width, "base_error": base_err, "gap_iff_c_trivial": iff},
                       "exact; width <= 0.08; 1e-10")


def check_tilting() -> CheckResult:
    system, phi = signed_walk((1, 4))
    fit = fit_homomorphism(system, phi)
    c1 = float(fit.theta.values[0])
    b = skew_pressure(skew_partition_Z(system, phi, 0, 40), upper_bound=base_pressure(system.shift, phi))
    passed = abs(c1 - 0.5) <= 1e-8 and abs(fit.fitted_pressure - math.log(4)) <= 1e-10 and b.contains(math.log(4))
    return CheckResult(3, "tilting homomorphism", passed,
                       {"c(1)": c1, "fitted_pressure": fit.fitted_pressure,
                        "bracket": (round(b.lower, 6), round(b.upper, 6))},
                       "1e-8 on c, 1e-10 on pressure, bracket contains log 4")


def check_polya() -> CheckResult:
    expected = {1: ("recurrent-divergent", 0.5), 2: ("recurrent-divergent", 1.0), 3: ("transient-converged", 1.5)}
    measured = {}
    ok = True
    for d, (verdict, beta) in expected.items():
        system = walk_system(d)
        phi = LocallyConstantPotential.zero(system.shift)
        Z = skew_partition_Z(system, phi, 0, 40)
        Zs = skew_partition_Z(system, phi, 0, 40, star=True)
        rep = recurrence_diagnose(Z, Zs, math.log(2 * d))
        measured[f"Z{d}"] = (rep.verdict, round(rep.main.beta, 4))
        ok &= rep.verdict == verdict and abs(rep.main.beta - beta) <= 0.15
    return CheckResult(4, "Polya dichotomy surrogate", ok, measured, "beta within 0.15")


def check_positive_null() -> CheckResult:
    measured = {}
    ok = True
    for name, system in (("Z/2", cyclic_extension(2, (0, 1))), ("Z/3", cyclic_extension(3, (1, 2)))):
        rep = positive_recurrence_dichotomy(system, LocallyConstantPotential.zero(system.shift), 40)
        measured[name] = (rep.recurrence.sub_verdict, round(rep.star_ratio, 4))
        ok &= rep.positive and rep.star_ratio < 0.9
    system, phi = signed_walk((1, 1))
    rep = positive_recurrence_dichotomy(system, phi, 40)
    rec = rep.recurrence
    null = rec.sub_verdict == "null" and rec.weighted_star.verdict == "divergent" and rec.star.verdict == "convergent"
    measured["Z"] = (rec.sub_verdict, round(rec.weighted_star.beta, 4), round(rec.star.beta, 4))
    return CheckResult(5, "positive/null dichotomy", ok and null and not rep.finitely_primitive, measured,
                       "star ratio < 0.9")


def check_product_structure() -> CheckResult:
    system = cyclic_extension(3, (1, 2))
    phi = potential_from_symbol_weights(system.shift, [Fraction(2), Fraction(3)])
    r = product_structure_check(system, phi, 1e-8)
    rho_err = abs(r.rho_skew - r.rho_base)
    passed = r.mixing and r.h_base_error <= 1e-8 and r.nu_factor_error <= 1e-8 and rho_err <= 1e-10
    return CheckResult(6, "product structure", passed,
                       {"h_error": r.h_base_error, "nu_error": r.nu_factor_error, "rho_error": rho_err},
                       "1e-8 on h and nu, 1e-10 on rho")


def check_coboundary(samples: int = 50, seed: int = 7) -> CheckResult:
    rng = random.Random(seed)
    system, phi = signed_walk((2, 3))
    ref = skew_partition_Z(system, phi, 0, 16)
    ref_star = skew_partition_Z(system, phi, 0, 16, star=True)
    bad = 0
    for _ in range(samples):
        c = HomCandidate(system.group, (Fraction(rng.randint(1, 9), rng.randint(1, 9)),))
        tilted = tilt(phi, c, system.psi)
        if skew_partition_Z(system, tilted, 0, 16).values != ref.values:
            bad += 1
        if skew_partition_Z(system, tilted, 0, 16, star=True).values != ref_star.values:
            bad += 1
    return CheckResult(7, "coboundary exactness", bad == 0, {"samples": samples, "mismatches": bad},
                       "exact rational equality")


def check_renewal(n_max: int = 12) -> CheckResult:
    failures = []
    for name in bundled_names():
        cfg = load(name)
        shift, phi = cfg.shift, cfg.potential
        for a in range(shift.alphabet_size):
            res = renewal_residuals(partition_Z(shift, phi, a, n_max), partition_Z_star(shift, phi, a, n_max))
            if any(r != 0 for r in res):
                failures.append((name, "base", a))
        if cfg.system is not None:
            a = 0
            Z = skew_partition_Z(cfg.system, phi, a, n_max)
            Zs = skew_partition_Z(cfg.system, phi, a, n_max, star=True)
            if any(r != 0 for r in renewal_residuals(Z, Zs)):
                failures.append((name, "skew", a))
    return CheckResult(8, "renewal identity", not failures,
                       {"systems": len(bundled_names()), "failures": failures}, "exact")


def check_symmetry() -> CheckResult:
    measured = {}
    sym, phi_s = signed_walk((1, 1))
    rs = symmetric_on_average(sym, phi_s, math.log(2), 40, 6)
    ones = all(v == 1 for g, v in rs.ratios.items() if abs(g[0]) <= 6)
    asym, phi_a = signed_walk((1, 4))
    P = fit_homomorphism(asym, phi_a).fitted_pressure
    ra = symmetric_on_average(asym, phi_a, P, 40, 6)
    gap_s = pressure_gap(sym, phi_s, 40)
    gap_a = pressure_gap(asym, phi_a, 40)
    agree = (gap_s.equal == rs.bounded) and (gap_a.equal == ra.bounded)
    passed = ones and rs.bounded and ra.sup_ratio > 1e3 and not ra.bounded and agree
    measured.update({"symmetric_ratio_one": ones, "asym_sup_ratio": ra.sup_ratio,
                     "asym_bounded": ra.bounded, "flags_agree": agree})
    return CheckResult(9, "symmetric on average", passed, measured, "ratio == 1 exactly; sup > 1e3")


def check_cogrowth() -> CheckResult:
    triv = cogrowth_series(2, SymbolMap(FiniteGroup.cyclic(1), (0, 0, 0, 0)), 12)
    ab_psi = SymbolMap(LatticeGroup(2), ((1, 0), (-1, 0), (0, 1), (0, -1)))
    ab = cogrowth_series(2, ab_psi, 14)
    trend = [e for _, e in eta_bounds_check(ab).eta_trend]
    ab_ok = ab.a[3] == 8 and 0.5 < ab.eta_estimate() < 1 and all(y >= x for x, y in zip(trend, trend[1:]))
    f32 = cogrowth_series(3, SymbolMap(load("F3-onto-F2").system.group,
                                       load("F3-onto-F2").system.psi.images), 12)
    f_ok = 0.5 < f32.eta_estimate() < 1
    sums_ok = all(eta_bounds_check(r).sums_increasing for r in (triv, ab, f32))
    passed = triv.eta[11] >= 0.98 and ab_ok and f_ok and sums_ok
    return CheckResult(10, "cogrowth", passed,
                       {"eta12_trivial": triv.eta[11], "a4_abelian": ab.a[3], "eta_abelian": ab.eta_estimate(),
                        "eta_F3F2": f32.eta_estimate(), "sums_increasing": sums_ok},
                       "eta_12 >= 0.98; eta in (0.5, 1)")


def check_gibbs(pressure_offset: float = 0.0, depth: int = 8) -> CheckResult:
    measured = {}
    ok = True
    for name in bundled_names():
        cfg = load(name)
        mu, perron = gibbs_measure(cfg.shift, cfg.potential)
        good = verify_gibbs(mu, cfg.potential, perron.pressure + pressure_offset, depth)
        bad = verify_gibbs(mu, cfg.potential, perron.pressure + pressure_offset + 0.1, depth)
        measured[name] = (round(good.C, 6), round(bad.growth_rate, 4))
        ok &= good.is_gibbs and not bad.is_gibbs
    return CheckResult(11, "Gibbs certificate", ok, measured, "growth <= 0.02 at P, flagged at P + 0.1")


def check_convexity(seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_grad = 0.0
    worst_convex = -math.inf
    systems = [signed_walk((1, 4)), (walk_system(2), potential_from_symbol_weights(
        MarkovShift.full(4), [Fraction(1), Fraction(2), Fraction(3), Fraction(5)]))]
    for system, phi in systems:
        fam = TiltedFamily(system, phi)
        for _ in range(10):
            th = rng.uniform(-1, 1, fam.dim)
            g = fam.gradient(th)
            fd = np.array([(fam.pressure(th + e) - fam.pressure(th - e)) / 2e-5
                           for e in np.eye(fam.dim) * 1e-5])
            worst_grad = max(worst_grad, float(np.max(np.abs(g - fd))))
        for _ in range(20):
            a, b = rng.uniform(-2, 2, fam.dim), rng.uniform(-2, 2, fam.dim)
            excess = fam.pressure((a + b) / 2) - (fam.pressure(a) + fam.pressure(b)) / 2
            worst_convex = max(worst_convex, excess)
    passed = worst_grad <= 1e-6 and worst_convex <= 1e-9
    return CheckResult(12, "gradient and convexity", passed,
                       {"max_gradient_error": worst_grad, "max_midpoint_excess": worst_convex},
                       "1e-6 gradient, 1e-9 convexity")


CHECKS = {
    1: (check_base_pressure, {"pressure"}),
    2: (check_signed_walk, {"signed-walk", "pressure"}),
    3: (check_tilting, {"signed-walk", "tilting"}),
    4: (check_polya, {"recurrence"}),
    5: (check_positive_null, {"recurrence"}),
    6: (check_product_structure, {"product", "tilting"}),
    7: (check_coboundary, {"exact"}),
    8: (check_renewal, {"exact"}),
    9: (check_symmetry, {"symmetry", "example-1.5"}),
    10: (check_cogrowth, {"cogrowth"}),
    11: (check_gibbs, {"gibbs"}),
    12: (check_convexity, {"tilting", "convexity"}),
}

SELECTORS = sorted({"all"} | set().union(*(tags for _, tags in CHECKS.values())))


def selected(selector: str = "all") -> list:
    selector = str(selector)
    if selector == "all":
        return sorted(CHECKS)
    if selector.isdigit():
        if int(selector) not in CHECKS:
            raise ValueError(f"no criterion {selector}")
        return [int(selector)]
    picked = [k for k, (_, tags) in CHECKS.items() if selector in tags]
    if not picked:
        raise ValueError(f"unknown suite selector {selector!r}; choose from {SELECTORS} or 1..12")
    return picked


def run_check(number: int, pressure_offset: float = 0.0) -> CheckResult:
    fn, _ = CHECKS[number]
    t0 = time.perf_counter()
    res = fn(pressure_offset=pressure_offset) if fn is check_gibbs else fn()
    res.seconds = time.perf_counter() - t0
    return res


def run_suite(selector: str = "all", pressure_offset: float = 0.0) -> list:
    return [run_check(k, pressure_offset) for k in selected(selector)]
