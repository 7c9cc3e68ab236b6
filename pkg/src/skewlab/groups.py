"""Group backends, symbol maps and homomorphisms into (R^+, *).

Elements are hashable Python values so they can key dynamic-programming
buckets directly:

* lattice ``Z^d``: tuples of ints,
* finite groups: ints indexing a multiplication table,
* free groups: reduced words as tuples of nonzero ints (``k`` is generator
  ``k``, ``-k`` its inverse), reduced eagerly on every product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np


class LatticeGroup:
    kind = "lattice"

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("lattice dimension must be >= 1")
        self.d = d
        self.identity = (0,) * d

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def invert(self, a):
        return tuple(-x for x in a)

    def element(self, raw):
        if isinstance(raw, int):
            raw = (raw,)
        g = tuple(int(x) for x in raw)
        if len(g) != self.d:
            raise ValueError(f"expected a {self.d}-vector, got {raw!r}")
        return g

    def norm(self, g) -> int:
        return sum(abs(x) for x in g)

    def describe(self) -> dict:
        return {"kind": "lattice", "d": self.d}

    def __eq__(self, other):
        return isinstance(other, LatticeGroup) and other.d == self.d

    def __hash__(self):
        return hash(("lattice", self.d))

    def __repr__(self):
        return f"LatticeGroup({self.d})"


class FiniteGroup:
    kind = "finite"

    def __init__(self, table, identity: int = 0):
        T = np.asarray(table, dtype=np.int64)
        n = T.shape[0]
        if T.shape != (n, n) or n < 1:
            raise ValueError("multiplication table must be square")
        perm = np.arange(n)
        for r in range(n):
            if not np.array_equal(np.sort(T[r]), perm) or not np.array_equal(np.sort(T[:, r]), perm):
                raise ValueError(f"row/column {r} of the table is not a permutation")
        if not (np.array_equal(T[identity], perm) and np.array_equal(T[:, identity], perm)):
            raise ValueError(f"element {identity} is not an identity")
        # associativity, exhaustive (tables here are small)
        lhs = T[T[:, :, None], np.arange(n)[None, None, :]]
        rhs = T[np.arange(n)[:, None, None], T[None, :, :]]
        if not np.array_equal(lhs, rhs):
            raise ValueError("multiplication table is not associative")
        T.setflags(write=False)
        self.table = T
        self.order = n
        self.identity = int(identity)
        self._inv = [int(np.flatnonzero(T[a] == identity)[0]) for a in range(n)]

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n, 0)

    def multiply(self, a, b):
        return int(self.table[a, b])

    def invert(self, a):
        return self._inv[a]

    def element(self, raw):
        g = int(raw)
        if not 0 <= g < self.order:
            raise ValueError(f"element {raw!r} outside 0..{self.order - 1}")
        return g

    def norm(self, g) -> int:
        return 0

    def elements(self):
        return range(self.order)

    def describe(self) -> dict:
        return {"kind": "finite", "table": self.table.tolist(), "identity": self.identity}

    def __eq__(self, other):
        return (isinstance(other, FiniteGroup) and other.identity == self.identity
                and np.array_equal(other.table, self.table))

    def __hash__(self):
        return hash(("finite", self.table.tobytes()))

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"


class FreeGroup:
    kind = "free"

    def __init__(self, rank: int):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        self.rank = rank
        self.identity = ()

    def multiply(self, a, b):
        a = list(a)
        i = 0
        while i < len(b) and a and a[-1] == -b[i]:
            a.pop()
            i += 1
        return tuple(a) + tuple(b[i:])

    def invert(self, a):
        return tuple(-x for x in reversed(a))

    def element(self, raw):
        if isinstance(raw, int):
            raw = (raw,)
        g = self.identity
        for x in raw:
            x = int(x)
            if x == 0 or abs(x) > self.rank:
                raise ValueError(f"bad generator index {x} for rank {self.rank}")
            g = self.multiply(g, (x,))
        return g

    def norm(self, g) -> int:
        return len(g)

    def describe(self) -> dict:
        return {"kind": "free", "rank": self.rank}

    def __eq__(self, other):
        return isinstance(other, FreeGroup) and other.rank == self.rank

    def __hash__(self):
        return hash(("free", self.rank))

    def __repr__(self):
        return f"FreeGroup({self.rank})"


@dataclass(frozen=True)
class SymbolMap:
    """Psi on symbols; extended to words as a semigroup homomorphism."""
    group: object
    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.group.element(g) for g in self.images))

    def __getitem__(self, symbol):
        return self.images[symbol]

    def __len__(self):
        return len(self.images)

    @property
    def max_step(self) -> int:
        return max(self.group.norm(g) for g in self.images)


def extend_hom(psi: SymbolMap, word: Sequence[int]):
    if len(word) == 0:
        raise ValueError("empty word")
    G = psi.group
    g = psi[word[0]]
    for s in word[1:]:
        g = G.multiply(g, psi[s])
    return g


@dataclass(frozen=True)
class HomCandidate:
    """A homomorphism c: G -> (R^+, *).

    ``values`` are the images of the generators (standard basis vectors for
    a lattice, free generators for a free group); finite groups only carry
    the trivial homomorphism and have ``values == ()``. Rational values keep
    ``c`` exact.
    """
    group: object
    values: tuple

    def __post_init__(self):
        vals = []
        for v in self.values:
            v = Fraction(v) if isinstance(v, Rational) else float(v)
            if not v > 0:
                raise ValueError(f"homomorphism values must be positive, got {v}")
            vals.append(v)
        expected = {"lattice": getattr(self.group, "d", 0), "free": getattr(self.group, "rank", 0),
                    "finite": 0}[self.group.kind]
        if len(vals) != expected:
            raise ValueError(f"{self.group.kind} backend needs {expected} values, got {len(vals)}")
        object.__setattr__(self, "values", tuple(vals))

    @classmethod
    def trivial(cls, group) -> "HomCandidate":
        n = {"lattice": getattr(group, "d", 0), "free": getattr(group, "rank", 0), "finite": 0}[group.kind]
        return cls(group, (Fraction(1),) * n)

    @classmethod
    def from_theta(cls, group, theta) -> "HomCandidate":
        return cls(group, tuple(math.exp(t) for t in np.atleast_1d(theta)))

    @property
    def theta(self) -> np.ndarray:
        return np.array([math.log(v) for v in self.values])

    def inverse(self) -> "HomCandidate":
        return HomCandidate(self.group, tuple(1 / v for v in self.values))

    def exponents(self, g) -> tuple:
        if self.group.kind == "lattice":
            return g
        if self.group.kind == "free":
            e = [0] * self.group.rank
            for x in g:
                e[abs(x) - 1] += 1 if x > 0 else -1
            return tuple(e)
        return ()

    def __call__(self, g):
        return eval_hom(self, g)


def eval_hom(c: HomCandidate, g):
    out = Fraction(1) if all(isinstance(v, Fraction) for v in c.values) else 1.0
    for v, e in zip(c.values, c.exponents(g)):
        if e:
            out = out * v ** e
    return out


def _hermite_basis(vectors) -> list:
    """Row-style Hermite reduction over Z: a basis of the generated lattice."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    d = len(rows[0])
    basis = []
    col = 0
    while rows and col < d:
        nz = [r for r in rows if r[col] != 0]
        zero = [r for r in rows if r[col] == 0]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            rest = []
            for r in nz[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                (rest if r[col] != 0 else zero).append(r)
            nz = [piv] + rest
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        rows = [r for r in zero if any(r)]
        col += 1
    # reduce entries above each pivot into [0, pivot)
    for i, piv in enumerate(basis):
        c = next(k for k, x in enumerate(piv) if x)
        for j in range(i):
            q = basis[j][c] // piv[c]
            basis[j] = [x - q * y for x, y in zip(basis[j], piv)]
    return [tuple(b) for b in basis]


@dataclass(frozen=True)
class GroupExtendedSystem:
    """Skew product (omega, g) -> (sigma omega, g Psi(omega_1))."""
    shift: object
    psi: SymbolMap

    def __post_init__(self):
        if len(self.psi) != self.shift.alphabet_size:
            raise ValueError(f"Psi maps {len(self.psi)} symbols, alphabet has "
                             f"{self.shift.alphabet_size}")

    @property
    def group(self):
        return self.psi.group

    def step(self, omega, g):
        """Apply the skew map to a finite word carrying group coordinate ``g``."""
        return tuple(omega[1:]), self.group.multiply(g, self.psi[omega[0]])


def _counting(system):
    from .potentials import LocallyConstantPotential
    return LocallyConstantPotential.zero(system.shift)


def reachable_elements(system: GroupExtendedSystem, n: int, phi=None, budget=None):
    """Group elements ``Psi(omega)``, ``omega`` an admissible ``n``-word.

    Maps each reachable ``g`` to ``{(first, last): weight}`` where the weight
    aggregates ``exp(sup S_n phi)`` over the cylinders (word counts when
    ``phi`` is omitted).
    """
    from .paths import DEFAULT_BUDGET, word_layers
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = phi if phi is not None else _counting(system)
    for k, layer in word_layers(phi, system.psi, n, buckets=True,
                                budget=budget or DEFAULT_BUDGET):
        if k == n:
            return layer
    return {}


@dataclass(frozen=True)
class SubgroupReport:
    elements: frozenset
    basis: tuple = None
    inverse_closed: bool = True
    product_closed: bool = True


def subgroup_G0(system: GroupExtendedSystem, p: int, n_max: int) -> SubgroupReport:
    """Union of ``Psi(Sigma^(np))`` for ``n <= n_max``; a lattice basis when
    the group is ``Z^d``."""
    from .paths import word_layers
    if p < 1 or n_max < 1:
        raise ValueError("p and n_max must be >= 1")
    G = system.group
    elems = set()
    for k, layer in word_layers(_counting(system), system.psi, p * n_max):
        if k % p == 0:
            elems.update(layer)
    basis = None
    if G.kind == "lattice":
        basis = tuple(_hermite_basis(sorted(elems)))
        inverse_closed = all(G.invert(b) in elems for b in basis)
    else:
        inverse_closed = all(G.invert(g) in elems for g in elems
                             if G.norm(g) * 2 <= p * n_max * system.psi.max_step)
    radius = p * n_max * system.psi.max_step // 2
    inner = [g for g in elems if G.norm(g) <= radius]
    product_closed = all(G.multiply(a, b) in elems for a in inner for b in inner)
    return SubgroupReport(frozenset(elems), basis, inverse_closed, product_closed)
