import itertools
import math
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from skewlab.groups import extend_hom
from skewlab.shift import MarkovShift


def all_words(shift, n):
    """Brute force: filter the full product of the alphabet."""
    return [w for w in itertools.product(range(shift.alphabet_size), repeat=n)
            if shift.is_admissible(w)]


def walks(shift, n, start=None):
    """Depth-first enumeration of admissible words (no product filtering)."""
    stack = [(i,) for i in (range(shift.alphabet_size) if start is None else [start])]
    while stack:
        w = stack.pop()
        if len(w) == n:
            yield w
            continue
        stack.extend(w + (j,) for j in range(shift.alphabet_size) if shift.allows(w[-1], j))


def periodic_weight(phi, word):
    # exp(S_n phi) at the periodic point word^infinity
    n, m = len(word), phi.memory
    x = word * (m // n + 2)
    out = Fraction(1) if phi.exact else 1.0
    for i in range(n):
        out = out * phi.weights[tuple(x[i:i + m])]
    return out


def brute_Z(phi, a, n, star=False, psi=None):
    shift = phi.shift
    total = 0
    for w in walks(shift, n, a):
        if not shift.allows(w[-1], w[0]):
            continue
        if psi is None:
            if star and a in w[1:]:
                continue
        else:
            G = psi.group
            if extend_hom(psi, w) != G.identity:
                continue
            if star and any(w[k] == a and extend_hom(psi, w[:k]) == G.identity for k in range(1, n)):
                continue
        total += periodic_weight(phi, w)
    return total


def cycle_shift(n):
    return MarkovShift.from_rows(["".join("1" if j == (i + 1) % n else "0" for j in range(n))
                                  for i in range(n)])


@st.composite
def irreducible_shifts(draw, min_size=2, max_size=4, aperiodic=False):
    """Random irreducible shifts: a Hamiltonian cycle plus random extra edges."""
    n = draw(st.integers(min_size, max_size))
    extra = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    A = np.array(extra, dtype=bool).reshape(n, n)
    for i in range(n):
        A[i, (i + 1) % n] = True
    if aperiodic:
        A[0, 0] = True
    return MarkovShift(n, A)


rational_weights = st.fractions(min_value=Fraction(1, 5), max_value=5, max_denominator=7).filter(lambda x: x > 0)


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


LOG = math.log
