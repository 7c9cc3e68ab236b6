"""Cogrowth of quotients of free groups.

Reduced words of ``F_t`` are the admissible words of the free-group shift
(symbol ``2k`` is generator ``k+1``, ``2k+1`` its inverse). A quotient
``F_t -> G`` is given by a symbol map into a computable backend; the kernel
words of length ``n`` are those with ``Psi(omega) = id``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from . import paths
from .groups import GroupExtendedSystem, SymbolMap
from .potentials import LocallyConstantPotential
from .shift import sigma_free


def _check_inverses(t, psi: SymbolMap):
    if len(psi) != 2 * t:
        raise ValueError(f"a rank-{t} quotient needs {2 * t} symbol images, got {len(psi)}")
    G = psi.group
    for k in range(t):
        if G.invert(psi[2 * k]) != psi[2 * k + 1]:
            raise ValueError(f"image of generator {k + 1} and of its inverse are not inverse")


def kernel_counts(t: int, psi: SymbolMap, N: int, buckets: bool = False, budget=paths.DEFAULT_BUDGET):
    """``a_n`` for ``n = 1..N`` (or, with ``buckets``, the ``(first, last)``
    split of the kernel words of each length)."""
    if t < 1:
        raise ValueError("rank must be >= 1")
    _check_inverses(t, psi)
    shift = sigma_free(t)
    zero = LocallyConstantPotential.zero(shift)
    ident = psi.group.identity
    out = []
    for _, layer in paths.word_layers(zero, psi, N, radius=0, buckets=buckets, budget=budget):
        if buckets:
            out.append({k: int(v) for k, v in layer.get(ident, {}).items()})
        else:
            out.append(int(layer.get(ident, 0)))
    return out


def cyclically_reduced_kernel_counts(t: int, psi: SymbolMap, N: int) -> list:
    """Kernel words whose last letter may be followed by the first one."""
    shift = sigma_free(t)
    return [sum(v for (f, l), v in b.items() if shift.allows(l, f))
            for b in kernel_counts(t, psi, N, buckets=True)]


@dataclass(frozen=True)
class CogrowthReport:
    t: int
    a: tuple                 # a_n, n = 1..N
    gamma: tuple             # per n; None where a_n = 0
    eta: tuple
    divergence_sums: tuple   # partial sums of a_n (2t-1)^(-n/2)

    @property
    def N(self) -> int:
        return len(self.a)

    def lattice(self) -> list:
        return [n for n in range(1, self.N + 1) if self.a[n - 1] > 0]

    def gamma_estimate(self, N=None) -> float:
        """Trailing-window maximum of ``gamma_n`` over the first ``N`` terms."""
        lat = [n for n in self.lattice() if N is None or n <= N]
        if not lat:
            raise ValueError("trivial kernel: no kernel words up to N")
        window = lat[-max(1, (len(lat) + 2) // 3):]
        return max(self.gamma[n - 1] for n in window)

    def eta_estimate(self, N=None) -> float:
        return math.log(self.gamma_estimate(N)) / math.log(2 * self.t - 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "a_n", "gamma_n", "eta_n", "divergence_partial_sum"])
        for n in range(1, self.N + 1):
            g, e = self.gamma[n - 1], self.eta[n - 1]
            w.writerow([n, self.a[n - 1], "" if g is None else repr(g), "" if e is None else repr(e),
                        repr(self.divergence_sums[n - 1])])
        return buf.getvalue()


def cogrowth_series(t: int, psi: SymbolMap, N: int, budget=paths.DEFAULT_BUDGET) -> CogrowthReport:
    """Exact kernel counts with growth and cogrowth exponents.

    ``gamma_n`` is normalised as ``(a_n (2t-1)/(2t))^(1/n)``: the number of
    reduced words of length ``n`` is ``2t (2t-1)^(n-1)``, so the factor
    makes ``gamma_n <= 2t-1`` (hence ``eta_n <= 1``) for every ``n`` without
    changing the limit.
    """
    if t < 2:
        raise ValueError("cogrowth needs rank t >= 2")
    a = kernel_counts(t, psi, N, budget=budget)
    q = 2 * t - 1
    gamma, eta, sums = [], [], []
    acc = 0.0
    for n, an in enumerate(a, start=1):
        if an > 0:
            g = math.exp((math.log(an) + math.log(q) - math.log(2 * t)) / n)
            gamma.append(g)
            eta.append(math.log(g) / math.log(q))
        else:
            gamma.append(None)
            eta.append(None)
        acc += an * q ** (-n / 2)
        sums.append(acc)
    return CogrowthReport(t, tuple(a), tuple(gamma), tuple(eta), tuple(sums))


@dataclass(frozen=True)
class EtaCheck:
    passed: bool
    eta: float
    gamma: float
    sqrt_bound: float
    sums_increasing: bool
    eta_trend: tuple      # (N, eta estimate from the first N terms)


def eta_bounds_check(report: CogrowthReport, tail_points: int = 4) -> EtaCheck:
    """``gamma > sqrt(2t-1)`` and growing divergence sums at the last lattice points."""
    lat = report.lattice()
    if not lat:
        raise ValueError("trivial kernel: all a_n vanish")
    q = 2 * report.t - 1
    gamma = report.gamma_estimate()
    eta = math.log(gamma) / math.log(q)
    last = lat[-tail_points:]
    sums = [report.divergence_sums[n - 1] for n in last]
    increasing = len(sums) >= 2 and all(b > a for a, b in zip(sums, sums[1:]))
    trend = tuple((n, report.eta_estimate(n)) for n in lat)
    passed = gamma > math.sqrt(q) and eta <= 1 + 1e-12 and increasing
    return EtaCheck(passed, eta, gamma, math.sqrt(q), increasing, trend)


def free_group_system(t: int, psi: SymbolMap) -> GroupExtendedSystem:
    _check_inverses(t, psi)
    return GroupExtendedSystem(sigma_free(t), psi)
