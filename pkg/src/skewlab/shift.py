"""Finite-alphabet Markov shifts.

Words are plain tuples of integer symbols ``0..n-1``. A shift is an
immutable wrapper around a boolean incidence matrix ``A`` where
``A[i, j]`` means symbol ``j`` may follow symbol ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Optional, Sequence

import numpy as np

Word = tuple


@dataclass(frozen=True, eq=False)
class MarkovShift:
    alphabet_size: int
    incidence: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        A = np.asarray(self.incidence, dtype=bool)
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        if A.shape != (self.alphabet_size, self.alphabet_size):
            raise ValueError(
                f"incidence matrix has shape {A.shape}, expected "
                f"{(self.alphabet_size, self.alphabet_size)}"
            )
        for i in range(self.alphabet_size):
            if not A[i].any():
                raise ValueError(f"symbol {i} has no admissible successor")
            if not A[:, i].any():
                raise ValueError(f"symbol {i} has no admissible predecessor")
        A.setflags(write=False)
        object.__setattr__(self, "incidence", A)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.alphabet_size:
                raise ValueError("one label per symbol required")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def full(cls, t: int, labels=None) -> "MarkovShift":
        return cls(t, np.ones((t, t), dtype=bool), labels)

    @classmethod
    def from_rows(cls, rows: Sequence[str], labels=None) -> "MarkovShift":
        """Build from 0/1 strings, one per row (``["11", "10"]``)."""
        n = len(rows)
        A = np.zeros((n, n), dtype=bool)
        for i, row in enumerate(rows):
            if len(row) != n or set(row) - {"0", "1"}:
                raise ValueError(f"malformed incidence row {i}: {row!r}")
            A[i] = [c == "1" for c in row]
        return cls(n, A, labels)

    def rows(self) -> list:
        return ["".join("1" if x else "0" for x in r) for r in self.incidence]

    def __eq__(self, other):
        if not isinstance(other, MarkovShift):
            return NotImplemented
        return (self.alphabet_size == other.alphabet_size
                and np.array_equal(self.incidence, other.incidence)
                and self.labels == other.labels)

    def __hash__(self):
        return hash((self.alphabet_size, self.incidence.tobytes()))

    @cached_property
    def successors(self) -> tuple:
        return tuple(tuple(int(j) for j in np.flatnonzero(r)) for r in self.incidence)

    @cached_property
    def predecessors(self) -> tuple:
        return tuple(tuple(int(i) for i in np.flatnonzero(c)) for c in self.incidence.T)

    def allows(self, i: int, j: int) -> bool:
        return bool(self.incidence[i, j])

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not 0 <= s < self.alphabet_size for s in word):
            return False
        return all(self.incidence[a, b] for a, b in zip(word, word[1:]))

    def check_word(self, word: Sequence[int]) -> Word:
        word = tuple(int(s) for s in word)
        if not self.is_admissible(word):
            raise ValueError(f"inadmissible word {word}")
        return word


def sigma_free(t: int) -> MarkovShift:
    """The shift of reduced words in the free group of rank ``t``.

    Symbol ``2k`` is generator ``k+1`` and ``2k+1`` its inverse; a symbol may
    not be followed by its own inverse.
    """
    if t < 1:
        raise ValueError("rank must be >= 1")
    n = 2 * t
    A = np.ones((n, n), dtype=bool)
    for s in range(n):
        A[s, s ^ 1] = False
    labels = []
    for k in range(1, t + 1):
        labels += [f"g{k}", f"g{k}^-1"]
    return MarkovShift(n, A, tuple(labels))


def admissible_words(shift: MarkovShift, n: int) -> list:
    """All admissible words of length ``n`` in lexicographic order."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    words = [(i,) for i in range(shift.alphabet_size)]
    for _ in range(n - 1):
        words = [w + (j,) for w in words for j in shift.successors[w[-1]]]
    return words


def word_array(shift: MarkovShift, n: int) -> np.ndarray:
    """Admissible ``n``-words as an ``(K, n)`` integer array, lexicographic."""
    words = np.arange(shift.alphabet_size, dtype=np.int64)[:, None]
    succ = shift.successors
    counts = np.array([len(s) for s in succ])
    flat = np.array([j for s in succ for j in s], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    for _ in range(n - 1):
        last = words[:, -1]
        reps = counts[last]
        parent = np.repeat(np.arange(len(words)), reps)
        within = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
        nxt = flat[offsets[last[parent]] + within]
        words = np.column_stack([words[parent], nxt])
    return words


def _reach(shift: MarkovShift) -> np.ndarray:
    n = shift.alphabet_size
    R = shift.incidence.copy()
    # transitive closure by repeated squaring
    while True:
        R2 = R | ((R.astype(np.int64) @ R.astype(np.int64)) > 0)
        if np.array_equal(R2, R):
            return R
        R = R2


def components(shift: MarkovShift) -> list:
    """Irreducible components (strongly connected classes carrying a loop)."""
    R = _reach(shift)
    seen = set()
    out = []
    for i in range(shift.alphabet_size):
        if i in seen or not R[i, i]:
            continue
        comp = tuple(j for j in range(shift.alphabet_size) if R[i, j] and R[j, i])
        seen.update(comp)
        out.append(comp)
    return out


def is_irreducible(shift: MarkovShift) -> bool:
    return bool(_reach(shift).all())


def _period_of(adj: Sequence[Sequence[int]], nodes: Sequence[int]) -> int:
    # BFS levels; period = gcd of level(u) + 1 - level(v) over internal edges
    nodes = list(nodes)
    inside = set(nodes)
    level = {nodes[0]: 0}
    queue = [nodes[0]]
    g = 0
    while queue:
        nxt = []
        for u in queue:
            for v in adj[u]:
                if v not in inside:
                    continue
                if v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
                else:
                    g = math.gcd(g, abs(level[u] + 1 - level[v]))
        queue = nxt
    return g


def period(shift: MarkovShift) -> int:
    """Period of an irreducible shift (gcd of loop lengths)."""
    if not is_irreducible(shift):
        raise ValueError("period is only defined for irreducible shifts")
    return _period_of(shift.successors, range(shift.alphabet_size))


@dataclass(frozen=True)
class MixingReport:
    kind: str  # reducible | irreducible-periodic | topologically-mixing | finitely-primitive
    period: Optional[int] = None
    witness_length: Optional[int] = None
    witness: dict = field(default_factory=dict)
    components: tuple = ()


def _connecting_word(shift: MarkovShift, i: int, j: int, length: int) -> Optional[Word]:
    # word w of the given length with i w j admissible, via backward reachability
    A = shift.incidence
    can = [None] * (length + 1)
    can[0] = A[:, j].copy()  # symbols that can be followed directly by j
    for k in range(1, length + 1):
        can[k] = (A.astype(np.int64) @ can[k - 1].astype(np.int64)) > 0
    # can[k][s]: there's a path of k+1 edges from s to j
    if not can[length][i]:
        return None
    word = []
    cur = i
    for k in range(length - 1, -1, -1):
        for s in shift.successors[cur]:
            if can[k][s]:
                word.append(s)
                cur = s
                break
    return tuple(word)


def mixing_class(shift: MarkovShift) -> MixingReport:
    """Classify the shift within the mixing hierarchy.

    On a finite alphabet topological mixing and finite primitivity coincide,
    so a mixing shift is always reported as ``finitely-primitive`` together
    with the connecting set: for the least ``l >= 1`` with ``A^(l+1) > 0`` we
    return one word ``w`` of length ``l`` per pair ``(i, j)`` with ``i w j``
    admissible.
    """
    n = shift.alphabet_size
    if not is_irreducible(shift):
        return MixingReport("reducible", components=tuple(components(shift)))
    p = period(shift)
    if p > 1:
        witness = {}
        for i in range(n):
            for j in range(n):
                for length in range(1, n * n + 1):
                    w = _connecting_word(shift, i, j, length)
                    if w is not None:
                        witness[(i, j)] = w
                        break
        return MixingReport("irreducible-periodic", period=p, witness=witness)
    A = shift.incidence.astype(np.int64)
    P = A.copy()
    for length in range(1, n * n + 1):
        P = (P @ A > 0).astype(np.int64)  # P = A^(length+1) pattern
        if P.all():
            witness = {(i, j): _connecting_word(shift, i, j, length)
                       for i in range(n) for j in range(n)}
            return MixingReport("finitely-primitive", period=1,
                                witness_length=length, witness=witness)
    # unreachable for aperiodic irreducible matrices (Wielandt bound)
    return MixingReport("topologically-mixing", period=1)


def p_power_shift(shift: MarkovShift, p: int):
    """Recode ``sigma^p`` as a shift over the admissible ``p``-words.

    Returns ``(shift_p, words)`` where ``words[k]`` is the ``p``-word used as
    symbol ``k``; flattening a word of the new shift through this table gives
    the corresponding word of the original shift.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    words = admissible_words(shift, p)
    A = np.array([[shift.incidence[u[-1], v[0]] for v in words] for u in words], dtype=bool)
    labels = None
    if shift.labels is not None:
        labels = tuple(".".join(shift.labels[s] for s in w) for w in words)
    return MarkovShift(len(words), A, labels), words


def flatten(words: Sequence[Word], recoded: Sequence[int]) -> Word:
    return tuple(s for k in recoded for s in words[k])


def common_prefix(omega: Sequence[int], tau: Sequence[int]) -> int:
    """Length of the longest common initial block; ``inf`` for equal sequences."""
    if tuple(omega) == tuple(tau):
        return math.inf
    k = 0
    for a, b in zip(omega, tau):
        if a != b:
            break
        k += 1
    return k


def metric_distance(alpha: float, omega: Sequence[int], tau: Sequence[int]) -> float:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    k = common_prefix(omega, tau)
    if k == math.inf:
        return 0.0
    return math.exp(-alpha * k)


def gcd_all(values) -> int:
    return reduce(math.gcd, values, 0)
