"""Transfer matrices, Perron data, pressure, partition functions, Gibbs measures.

The transfer matrix of a memory-``m`` potential acts on functions of the
first ``m`` coordinates. Its states are the admissible ``m``-words and
``L[u, v] = w(v)`` whenever ``v`` is a preimage state of ``u`` (``v[1:] ==
u[:-1]`` and ``v[0] -> u[0]`` admissible). The right Perron vector is the
eigenfunction ``h`` and the left one the conformal measure ``nu`` on
``m``-cylinders.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import paths
from .groups import FiniteGroup, GroupExtendedSystem, SymbolMap
from .potentials import LocallyConstantPotential, sup_weight_on_cylinder, inf_weight_on_cylinder, tail_factors
from .shift import MarkovShift, _period_of, word_array


class NotMixingError(ValueError):
    def __init__(self, period, message=None):
        super().__init__(message or f"matrix is not primitive (period {period})")
        self.period = period


class ConvergenceError(RuntimeError):
    def __init__(self, residual, iterations):
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    states: list
    matrix: sp.csr_matrix
    phi: Optional[LocallyConstantPotential] = None

    @property
    def size(self) -> int:
        return len(self.states)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @cached_property
    def pattern(self) -> tuple:
        """Forward adjacency of the state graph: ``v -> u`` iff ``L[u, v] > 0``."""
        M = self.matrix.tocsc()
        return tuple(tuple(int(u) for u in M.indices[M.indptr[v]:M.indptr[v + 1]])
                     for v in range(self.size))


def build_transfer(shift: MarkovShift, phi: LocallyConstantPotential) -> TransferMatrix:
    if phi.shift != shift:
        raise ValueError("potential lives on a different shift")
    states = phi.states
    index = phi.state_index
    rows, cols, vals = [], [], []
    for v, s in enumerate(states):
        wv = float(phi.weights[s])
        for j in shift.successors[s[-1]]:
            u = index[s[1:] + (j,)]
            rows.append(u)
            cols.append(v)
            vals.append(wv)
    n = len(states)
    L = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return TransferMatrix(states, L, phi)


def _as_matrix(M):
    if isinstance(M, TransferMatrix):
        return M.matrix
    if sp.issparse(M):
        return M.tocsr()
    return sp.csr_matrix(np.asarray(M, dtype=float))


def matrix_period(M) -> int:
    """Period of an irreducible nonnegative matrix; 0 if reducible."""
    L = _as_matrix(M).tocsc()
    n = L.shape[0]
    fwd = [L.indices[L.indptr[v]:L.indptr[v + 1]].tolist() for v in range(n)]
    # irreducibility by forward/backward search from state 0
    def reach(adj):
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen
    bwd = [[] for _ in range(n)]
    for v, us in enumerate(fwd):
        for u in us:
            bwd[u].append(v)
    if len(reach(fwd)) < n or len(reach(bwd)) < n:
        return 0
    return _period_of(fwd, range(n))


@dataclass(frozen=True)
class PerronData:
    rho: float
    h: np.ndarray
    nu: np.ndarray
    residual_right: float
    residual_left: float
    iterations: int = 0

    @property
    def pressure(self) -> float:
        return math.log(self.rho)


def perron_eigen(M, tol: float = 1e-12, max_iter: int = 1_000_000) -> PerronData:
    """Leading eigen-triple of a primitive nonnegative matrix by power iteration.

    Left and right vectors are iterated together from the uniform vector;
    the eigenvalue is the two-sided quotient ``nu L h / nu h``, whose error is
    quadratic in the vector errors.
    """
    L = _as_matrix(M)
    p = matrix_period(L)
    if p == 0:
        raise NotMixingError(0, "matrix is reducible")
    if p > 1:
        raise NotMixingError(p)
    n = L.shape[0]
    LT = L.T.tocsr()
    h = np.full(n, 1.0 / n)
    nu = np.full(n, 1.0 / n)
    res_r = res_l = math.inf
    for it in range(1, max_iter + 1):
        Lh = L @ h
        nuL = LT @ nu
        rho = float(nu @ Lh) / float(nu @ h)
        res_r = float(np.max(np.abs(Lh - rho * h)) / np.max(np.abs(h)))
        res_l = float(np.sum(np.abs(nuL - rho * nu)) / np.sum(np.abs(nu)))
        if res_r <= tol * max(rho, 1.0) and res_l <= tol * max(rho, 1.0):
            break
        h = Lh / np.sum(Lh)
        nu = nuL / np.sum(nuL)
    else:
        raise ConvergenceError(max(res_r, res_l), max_iter)
    nu = nu / nu.sum()
    h = h / float(nu @ h)
    # residuals of the returned, normalised vectors
    res_r = float(np.max(np.abs(L @ h - rho * h)) / np.max(np.abs(h)))
    res_l = float(np.sum(np.abs(LT @ nu - rho * nu)))
    return PerronData(rho, h, nu, res_r, res_l, it)


def base_pressure(shift: MarkovShift, phi: LocallyConstantPotential, tol: float = 1e-12) -> float:
    """Gurevich pressure of ``phi`` on an irreducible shift (spectral)."""
    T = build_transfer(shift, phi)
    p = matrix_period(T)
    if p == 0:
        raise ValueError("base pressure needs an irreducible shift")
    if p == 1:
        return perron_eigen(T, tol).pressure
    # periodic: L^p is primitive on each cyclic class
    Lp = T.matrix ** p
    cls = _cyclic_class(T, p)
    sub = Lp[cls][:, cls]
    return perron_eigen(sub, tol).pressure / p


def _cyclic_class(T: TransferMatrix, p: int) -> list:
    adj = T.pattern
    level = {0: 0}
    queue = [0]
    while queue:
        nxt = []
        for u in queue:
            for v in adj[u]:
                if v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        queue = nxt
    return [v for v in range(T.size) if level[v] % p == 0]


@dataclass
class PartitionSeries:
    kind: str  # base | base-star | skew | skew-star
    anchor: int
    values: list
    P_reference: Optional[float] = None

    @property
    def N(self) -> int:
        return len(self.values)

    def __getitem__(self, n):
        """``Z_n`` (1-based); ``Z_0 = 1`` as the renewal convention."""
        if n == 0:
            return 1
        return self.values[n - 1]

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.values)

    def lattice(self) -> list:
        return [n for n in range(1, self.N + 1) if self.values[n - 1] > 0]

    @property
    def period(self) -> int:
        return math.gcd(*self.lattice()) if self.lattice() else 0

    def log_values(self) -> np.ndarray:
        return np.array([_log(v) for v in self.values])

    def discounted(self, P: float) -> np.ndarray:
        """``exp(-nP) Z_n`` for ``n = 1..N``, computed in log space."""
        lv = self.log_values()
        n = np.arange(1, self.N + 1)
        with np.errstate(invalid="ignore"):
            out = np.exp(lv - n * P)
        out[np.isneginf(lv)] = 0.0
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["n", "Z_n", "log_Z_n"]
        if self.P_reference is not None:
            header.append("discounted")
        w.writerow(header)
        lv = self.log_values()
        for n, v in enumerate(self.values, start=1):
            row = [n, _decimal(v), repr(float(lv[n - 1]))]
            if self.P_reference is not None:
                row.append(repr(float(math.exp(lv[n - 1] - n * self.P_reference))) if v else "0.0")
            w.writerow(row)
        return buf.getvalue()


def _log(v) -> float:
    if v == 0:
        return -math.inf
    if isinstance(v, Fraction):
        return math.log(v.numerator) - math.log(v.denominator)
    return math.log(v)


def _decimal(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _trivial_map(shift):
    G = FiniteGroup.cyclic(1)
    return SymbolMap(G, (0,) * shift.alphabet_size)


def _check_anchor(shift, a):
    if not 0 <= a < shift.alphabet_size:
        raise ValueError(f"anchor {a} is not a symbol")


def partition_Z(shift: MarkovShift, phi: LocallyConstantPotential, a: int, N: int) -> PartitionSeries:
    """``Z_n(phi, a)`` for ``n = 1..N``: weighted periodic points through ``[a]``."""
    _check_anchor(shift, a)
    vals = paths.closed_walks(phi, _trivial_map(shift), a, N)
    return PartitionSeries("base", a, vals)


def partition_Z_star(shift: MarkovShift, phi: LocallyConstantPotential, a: int, N: int) -> PartitionSeries:
    """First-return sums ``Z*_n(phi, a)``."""
    _check_anchor(shift, a)
    vals = paths.closed_walks(phi, _trivial_map(shift), a, N, star=True)
    return PartitionSeries("base-star", a, vals)


def skew_partition_Z(system: GroupExtendedSystem, phi: LocallyConstantPotential, a: int, N: int,
                     star: bool = False, budget=paths.DEFAULT_BUDGET) -> PartitionSeries:
    """Partition function of ``phi o pi_1`` on the skew product at ``(a, id)``."""
    _check_anchor(system.shift, a)
    vals = paths.closed_walks(phi, system.psi, a, N, star=star, budget=budget)
    return PartitionSeries("skew-star" if star else "skew", a, vals)


def renewal_residuals(Z: PartitionSeries, Zs: PartitionSeries) -> list:
    """``Z_n - sum_k Z*_k Z_(n-k)`` for ``n = 1..N`` (exact for exact input)."""
    out = []
    for n in range(1, min(Z.N, Zs.N) + 1):
        out.append(Z[n] - sum(Zs[k] * Z[n - k] for k in range(1, n + 1)))
    return out


def series_pressure(series: PartitionSeries) -> float:
    """Pressure from the last two lattice points, ``log(Z_n / Z_(n-p)) / p``."""
    lat = series.lattice()
    if len(lat) < 2:
        raise ValueError("need at least two nonzero terms")
    n1, n2 = lat[-2], lat[-1]
    return (_log(series[n2]) - _log(series[n1])) / (n2 - n1)


def _ratio_points(series):
    # growth rates between consecutive lattice points, placed at the midpoint
    lat = series.lattice()
    lv = series.log_values()
    ns = np.array([(a + b) / 2 for a, b in zip(lat, lat[1:])])
    rs = np.array([(lv[b - 1] - lv[a - 1]) / (b - a) for a, b in zip(lat, lat[1:])])
    return ns, rs


def _richardson(ns, rs, order):
    """Fit ``r(n) = P + k1/n + ... + k_order/n^order``; returns ``(P, stderr)``."""
    X = np.column_stack([ns ** -j for j in range(order + 1)])
    coef, *_ = np.linalg.lstsq(X, rs, rcond=None)
    dof = len(rs) - X.shape[1]
    if dof <= 0:
        return float(coef[0]), math.inf
    resid = rs - X @ coef
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.pinv(X.T @ X)
    return float(coef[0]), math.sqrt(max(cov[0, 0], 0.0))


@dataclass(frozen=True)
class SkewPressure:
    estimate: float          # max of (1/n) log Z_n over the trailing window
    lower: float             # max of (1/n) log Z_n over all computed n
    extrapolated: float      # Richardson limit of the lattice growth rates
    extrapolation_error: float
    upper: float             # min(rigorous upper bound, extrapolated + error)
    rigorous_upper: float
    raw_rate: float          # mean trailing growth rate, no bias correction
    lattice: tuple = field(default=())

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 1e-9) -> bool:
        return self.lower - tol <= value <= self.upper + tol


EXTRAPOLATION_FLOOR = 1e-4


def skew_pressure(series: PartitionSeries, window: Optional[int] = None,
                  upper_bound: float = math.inf) -> SkewPressure:
    """Estimate and bracket the growth rate of a skew partition series.

    ``lower`` is a true lower bound for memory-1 potentials: closed loops at
    the anchor concatenate, so ``Z_(n+k) >= Z_n Z_k`` and the limsup equals
    the supremum of ``(1/n) log Z_n``. ``upper_bound`` should be a proven
    bound such as the base pressure.

    The growth rates ``r`` between consecutive lattice points behave like
    ``P + k1/n + k2/n^2`` under polynomial corrections ``n^kappa``, so the
    trailing half is fitted with one and two correction terms. The error bar
    is the larger of twice their disagreement and three standard errors,
    floored at ``EXTRAPOLATION_FLOOR``; the upper end of the bracket is the
    smaller of ``upper_bound`` and the extrapolation plus its error.
    """
    lat = series.lattice()
    if len(lat) < 3:
        raise ValueError("skew pressure needs at least three nonzero terms")
    lv = series.log_values()
    rates = [lv[n - 1] / n for n in lat]
    window = window or max(3, len(lat) // 3)
    estimate = float(max(rates[-window:]))
    lower = float(max(rates))
    ns, rs = _ratio_points(series)
    tail = ns >= ns[-1] / 2
    if tail.sum() < 3:
        tail = np.ones_like(ns, dtype=bool)
    raw = float(np.mean(rs[tail]))
    P1, se1 = _richardson(ns[tail], rs[tail], 1)
    if tail.sum() >= 6:
        P2, se2 = _richardson(ns[tail], rs[tail], 2)
        extrapolated = P2
        err = max(2 * abs(P2 - P1), 3 * se2)
    else:
        extrapolated = P1
        err = max(abs(P1 - raw), 3 * se1)
    if not math.isfinite(err):
        err = math.inf
    err = max(err, EXTRAPOLATION_FLOOR)
    upper = min(upper_bound, max(extrapolated + err, lower))
    return SkewPressure(estimate, lower, extrapolated, err, upper, upper_bound, raw, tuple(lat))


# Gibbs measures


class GibbsMeasure:
    """The invariant Gibbs measure ``h d nu`` evaluated on cylinders."""

    def __init__(self, phi: LocallyConstantPotential, perron: PerronData):
        self.phi = phi
        self.perron = perron
        self.m = phi.memory
        self.k = phi.shift.alphabet_size
        self._code = np.full(self.k ** self.m, -1, dtype=np.int64)
        for i, s in enumerate(phi.states):
            self._code[self._encode(np.array([s]))[0]] = i
        self._logw = np.array([phi.log_table[s] for s in phi.states])
        self._logh = np.log(perron.h)
        self._lognu = np.log(perron.nu)
        self._logrho = math.log(perron.rho)

    def _encode(self, blocks):
        code = np.zeros(len(blocks), dtype=np.int64)
        for c in range(blocks.shape[1]):
            code = code * self.k + blocks[:, c]
        return code

    def state_indices(self, words: np.ndarray) -> np.ndarray:
        """Index of every ``m``-block along each word, shape ``(K, n-m+1)``."""
        n = words.shape[1]
        cols = [self._code[self._encode(words[:, j:j + self.m])] for j in range(n - self.m + 1)]
        return np.column_stack(cols)

    def log_batch(self, words) -> np.ndarray:
        words = np.atleast_2d(np.asarray(words, dtype=np.int64))
        n = words.shape[1]
        if n >= self.m:
            idx = self.state_indices(words)
            if (idx < 0).any():
                raise ValueError("inadmissible word")
            inner = self._logw[idx[:, :-1]].sum(axis=1)
            return inner - (n - self.m) * self._logrho + self._logh[idx[:, 0]] + self._lognu[idx[:, -1]]
        # short cylinders: sum over the m-states they contain
        out = np.empty(len(words))
        prob = np.exp(self._logh + self._lognu)
        states = np.array(self.phi.states)
        for r, w in enumerate(words):
            mask = np.all(states[:, :n] == w, axis=1)
            out[r] = math.log(prob[mask].sum()) if mask.any() else -math.inf
        return out

    def batch(self, words) -> np.ndarray:
        return np.exp(self.log_batch(words))

    def __call__(self, word) -> float:
        return float(self.batch(np.array([tuple(word)]))[0])


def gibbs_measure(shift: MarkovShift, phi: LocallyConstantPotential, tol: float = 1e-12):
    T = build_transfer(shift, phi)
    perron = perron_eigen(T, tol)
    return GibbsMeasure(phi, perron), perron


@dataclass(frozen=True)
class GibbsCertificate:
    C: float
    worst_cylinder: tuple
    depth: int
    per_depth: tuple
    growth_rate: float
    is_gibbs: bool

    def __post_init__(self):
        if self.C < 1:
            raise ValueError("Gibbs constant must be >= 1")


GROWTH_TOL = 0.02


def cylinder_sums(phi: LocallyConstantPotential, words: np.ndarray, states_idx=None):
    """``(sup, inf)`` of ``S_n phi`` over each cylinder, vectorised."""
    n = words.shape[1]
    m = phi.memory
    if n < m:
        sups = np.array([math.log(sup_weight_on_cylinder(phi, tuple(w))) for w in words])
        infs = np.array([math.log(inf_weight_on_cylinder(phi, tuple(w))) for w in words])
        return sups, infs
    logw = np.array([phi.log_table[s] for s in phi.states])
    tmax = np.log(np.array([float(v) for v in tail_factors(phi, max).values()]))
    tmin = np.log(np.array([float(v) for v in tail_factors(phi, min).values()]))
    idx = states_idx
    inner = logw[idx[:, :-1]].sum(axis=1)
    return inner + tmax[idx[:, -1]], inner + tmin[idx[:, -1]]


def verify_gibbs(mu: GibbsMeasure, phi: LocallyConstantPotential, P: float, depth: int,
                 growth_tol: float = GROWTH_TOL) -> GibbsCertificate:
    """Exhaustive Gibbs-ratio check over all cylinders up to ``depth``.

    The ratio ``mu[w] / exp(S phi(tau) - |w| P)`` is bounded over every
    ``tau`` in ``[w]`` using the exact sup and inf of ``S phi`` on the
    cylinder. If ``P`` is wrong the per-depth constant grows like
    ``exp(|delta P| depth)``; a slope of ``log C_d`` above ``growth_tol``
    over the trailing half of depths marks the certificate as failed.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    per_depth = []
    worst = None
    best = -math.inf
    for n in range(1, depth + 1):
        words = word_array(phi.shift, n)
        logmu = mu.log_batch(words)
        idx = mu.state_indices(words) if n >= phi.memory else None
        sups, infs = cylinder_sums(phi, words, idx)
        hi = logmu - (infs - n * P)     # largest ratio on the cylinder
        lo = logmu - (sups - n * P)     # smallest ratio
        cand = np.maximum(hi, -lo)
        k = int(np.argmax(cand))
        per_depth.append(float(cand[k]))
        if cand[k] > best:
            best = float(cand[k])
            worst = tuple(int(x) for x in words[k])
    logC = np.array(per_depth)
    d = np.arange(1, depth + 1)
    tail = d >= max(1, (depth + 1) // 2)
    if tail.sum() >= 2:
        growth = float(np.polyfit(d[tail], logC[tail], 1)[0])
    else:
        growth = 0.0
    C = math.exp(max(best, 0.0))
    return GibbsCertificate(C, worst, depth, tuple(math.exp(x) for x in per_depth),
                            growth, growth <= growth_tol)
