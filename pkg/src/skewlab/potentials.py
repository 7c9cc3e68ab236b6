"""Locally constant potentials of finite memory.

A potential of memory ``m`` is a table over the admissible ``m``-words.
It is stored multiplicatively: ``weights[w] = exp(phi on [w])``. Exact
potentials hold :class:`fractions.Fraction` weights so that partition
functions come out as exact rationals; everything else is a float.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Mapping, Sequence

import numpy as np

from .shift import MarkovShift, admissible_words


class DegenerateCylinder(ValueError):
    pass


def _as_weight(x):
    if isinstance(x, Rational):
        x = Fraction(x)
        if x <= 0:
            raise ValueError(f"weights must be positive, got {x}")
        return x
    x = float(x)
    if not x > 0:
        raise ValueError(f"weights must be positive, got {x}")
    return x


@dataclass(frozen=True, eq=False)
class LocallyConstantPotential:
    shift: MarkovShift
    memory: int
    weights: Mapping

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        expected = admissible_words(self.shift, self.memory)
        table = {}
        for w in expected:
            if w not in self.weights:
                raise ValueError(f"potential table misses word {w}")
            table[w] = _as_weight(self.weights[w])
        extra = set(self.weights) - set(table)
        if extra:
            raise ValueError(f"potential table has inadmissible words {sorted(extra)}")
        object.__setattr__(self, "weights", table)

    # constructors

    @classmethod
    def from_weights(cls, shift, weights, memory=None):
        weights = {tuple(k) if not isinstance(k, int) else (k,): v for k, v in dict(weights).items()}
        if memory is None:
            memory = len(next(iter(weights)))
        return cls(shift, memory, weights)

    @classmethod
    def from_log_values(cls, shift, values, memory=None):
        values = {tuple(k) if not isinstance(k, int) else (k,): v for k, v in dict(values).items()}
        return cls.from_weights(shift, {k: math.exp(v) for k, v in values.items()}, memory)

    @classmethod
    def constant(cls, shift, weight=Fraction(1), memory=1):
        return cls(shift, memory, {w: weight for w in admissible_words(shift, memory)})

    @classmethod
    def zero(cls, shift, memory=1):
        return cls.constant(shift, Fraction(1), memory)

    # views

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.weights.values())

    @cached_property
    def states(self) -> list:
        return list(self.weights)

    @cached_property
    def state_index(self) -> dict:
        return {w: k for k, w in enumerate(self.states)}

    @cached_property
    def log_table(self) -> dict:
        return {w: math.log(v) for w, v in self.weights.items()}

    def value(self, word) -> float:
        """phi on the cylinder of the ``m``-word ``word``."""
        return self.log_table[tuple(word)]

    def scaled(self, factor) -> "LocallyConstantPotential":
        """phi + log(factor), i.e. all weights multiplied by ``factor``."""
        factor = _as_weight(factor)
        return LocallyConstantPotential(self.shift, self.memory,
                                        {w: v * factor for w, v in self.weights.items()})

    def as_float(self) -> "LocallyConstantPotential":
        return LocallyConstantPotential(self.shift, self.memory,
                                        {w: float(v) for w, v in self.weights.items()})

    def extensions(self, word) -> list:
        """Admissible continuations of length ``m-1`` after ``word``."""
        k = self.memory - 1
        if k == 0:
            return [()]
        return [e for e in admissible_words(self.shift, k)
                if self.shift.allows(word[-1], e[0])]

    def __eq__(self, other):
        if not isinstance(other, LocallyConstantPotential):
            return NotImplemented
        return (self.shift == other.shift and self.memory == other.memory
                and self.weights == other.weights)

    def __hash__(self):
        return hash((self.shift, self.memory))


def _window_product(phi, x, n):
    m = phi.memory
    w = phi.weights
    prod = Fraction(1) if phi.exact else 1.0
    for i in range(n):
        prod = prod * w[tuple(x[i:i + m])]
    return prod


def birkhoff_weight(phi: LocallyConstantPotential, omega, continuation=()):
    """exp(S_n phi) along ``omega + continuation``, ``n = len(omega)``."""
    x = tuple(omega) + tuple(continuation)
    n = len(omega)
    if n == 0:
        return Fraction(1) if phi.exact else 1.0
    if len(x) < n + phi.memory - 1:
        raise ValueError(f"continuation must have length >= {phi.memory - 1}")
    if not phi.shift.is_admissible(x):
        raise ValueError(f"inadmissible concatenation {x}")
    return _window_product(phi, x, n)


def birkhoff_sum(phi: LocallyConstantPotential, omega, continuation=()) -> float:
    """S_n phi along ``omega + continuation``; S_0 phi = 0."""
    x = tuple(omega) + tuple(continuation)
    n = len(omega)
    if n == 0:
        return 0.0
    if len(x) < n + phi.memory - 1:
        raise ValueError(f"continuation must have length >= {phi.memory - 1}")
    if not phi.shift.is_admissible(x):
        raise ValueError(f"inadmissible concatenation {x}")
    lt = phi.log_table
    m = phi.memory
    return math.fsum(lt[x[i:i + m]] for i in range(n))


def holder_variation(phi: LocallyConstantPotential, alpha: float, n: int) -> float:
    """V_{alpha,n}(phi), exact from the table.

    Pairs with common prefix of length ``k >= m`` give no contribution, so the
    supremum is a maximum over ``n <= k < m`` of ``e^(alpha k)`` times the
    largest table difference between words splitting after ``k`` symbols.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    m = phi.memory
    lt = phi.log_table
    best = 0.0
    words = list(lt)
    for k in range(n, m):
        groups = {}
        for w in words:
            groups.setdefault(w[:k], []).append(w)
        diff = 0.0
        for group in groups.values():
            for u, v in itertools.combinations(group, 2):
                if u[k] != v[k]:
                    diff = max(diff, abs(lt[u] - lt[v]))
        best = max(best, diff * math.exp(alpha * k))
    return best


@dataclass(frozen=True)
class DistortionBound:
    log_C: float

    def __post_init__(self):
        if self.log_C < 0:
            raise ValueError("log_C must be nonnegative")


def distortion_constant(phi: LocallyConstantPotential) -> DistortionBound:
    """Best constant in the bounded distortion property.

    For ``|omega| >= m-1`` only the last ``m-1`` summands of ``S_n phi`` see
    the continuation, and they depend on the ``(m-1)``-suffix of ``omega``
    alone, so lengths ``1..m-1`` exhaust the supremum.
    """
    m = phi.memory
    if m == 1:
        return DistortionBound(0.0)
    best = 0.0
    lt = phi.log_table
    for n in range(1, m):
        for omega in admissible_words(phi.shift, n):
            vals = []
            for e in phi.extensions(omega):
                x = omega + e
                vals.append(math.fsum(lt[x[i:i + m]] for i in range(n)))
            best = max(best, max(vals) - min(vals))
    return DistortionBound(best)


def _cylinder_values(phi, omega):
    omega = phi.shift.check_word(omega)
    exts = phi.extensions(omega)
    if not exts:
        raise DegenerateCylinder(f"cylinder {omega} is empty")
    return [_window_product(phi, omega + e, len(omega)) for e in exts]


def sup_weight_on_cylinder(phi: LocallyConstantPotential, omega):
    """exp(sup S_|omega| phi on [omega]), exact when phi is exact."""
    return max(_cylinder_values(phi, omega))


def inf_weight_on_cylinder(phi: LocallyConstantPotential, omega):
    return min(_cylinder_values(phi, omega))


def sup_on_cylinder(phi: LocallyConstantPotential, omega) -> float:
    return math.log(sup_weight_on_cylinder(phi, omega))


def tail_factors(phi: LocallyConstantPotential, reduce=max) -> dict:
    """For each ``m``-state ``s``: ``w(s)`` times the extremal continuation
    weight of the remaining ``m-1`` windows. Multiplying the internal
    window weights of a word by the factor of its last ``m``-block yields
    ``exp(sup S phi)`` on the cylinder."""
    m = phi.memory
    out = {}
    for s in phi.states:
        if m == 1:
            out[s] = phi.weights[s]
            continue
        vals = []
        for e in phi.extensions(s):
            x = s + e
            vals.append(_window_product(phi, x, m))
        out[s] = reduce(vals)
    return out


def tilt(phi: LocallyConstantPotential, c, psi) -> LocallyConstantPotential:
    """phi_c = phi - log c(Psi(x_1)).

    ``c`` is a :class:`~skewlab.groups.HomCandidate`, ``psi`` the symbol map.
    """
    new = {}
    for w, v in phi.weights.items():
        cv = c(psi[w[0]])
        if not cv > 0:
            raise ValueError(f"homomorphism value {cv} is not positive")
        if isinstance(v, Fraction) and isinstance(cv, Fraction):
            new[w] = v / cv
        else:
            new[w] = float(v) / float(cv)
    return LocallyConstantPotential(phi.shift, phi.memory, new)


def table_arrays(phi: LocallyConstantPotential):
    """``(states array (K, m), log-weights (K,))`` for vectorised code."""
    states = np.array(phi.states, dtype=np.int64).reshape(len(phi.states), phi.memory)
    logs = np.array([phi.log_table[s] for s in phi.states])
    return states, logs


def potential_from_symbol_weights(shift: MarkovShift, weights: Sequence) -> LocallyConstantPotential:
    """Memory-1 potential with ``exp(phi) = weights[x_1]``."""
    return LocallyConstantPotential(shift, 1, {(i,): w for i, w in enumerate(weights)})
