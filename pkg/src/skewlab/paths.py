"""Dynamic programming over (block state, group element).

Paths live in the ``m``-block graph of a potential of memory ``m``: a state
is an admissible ``m``-word ``v`` and stepping from ``v`` multiplies the
weight by ``w(v) = exp(phi[v])`` and the group coordinate by
``Psi(v[0])``. Exact potentials run on integers (weights scaled by a common
denominator ``D``) and are divided by ``D**n`` at readout.

Bucket dictionaries are shared between successor states whenever their
content is identical; they are never mutated after a step completes, so the
sharing is safe (the taboo removal copies before it edits).
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction

from .potentials import LocallyConstantPotential, tail_factors


class BudgetExceeded(RuntimeError):
    def __init__(self, n, buckets, budget):
        super().__init__(f"group-ball budget exceeded at n={n}: {buckets} buckets > {budget}")
        self.n = n
        self.buckets = buckets
        self.budget = budget


DEFAULT_BUDGET = 5_000_000


class BlockGraph:
    """``m``-block presentation of a shift carrying integer or float weights."""

    def __init__(self, phi: LocallyConstantPotential):
        self.phi = phi
        self.states = phi.states
        self.index = phi.state_index
        self.exact = phi.exact
        if self.exact:
            D = 1
            for v in phi.weights.values():
                D = D * v.denominator // math.gcd(D, v.denominator)
            self.denominator = D
            self.weights = [int(phi.weights[s] * D) for s in self.states]
        else:
            self.denominator = 1
            self.weights = [float(phi.weights[s]) for s in self.states]
        shift = phi.shift
        succ = []
        for s in self.states:
            succ.append(tuple(self.index[s[1:] + (j,)] for j in shift.successors[s[-1]]))
        self.successors = succ
        # states sharing a successor list are merged before distribution
        groups = defaultdict(list)
        for v, sv in enumerate(succ):
            groups[sv].append(v)
        self.fanout = [(tuple(vs), sv) for sv, vs in groups.items()]

    def scale(self, value, n):
        if self.exact:
            return Fraction(value, self.denominator ** n)
        return value


def _advance(graph, G, step_of, dist, alive):
    """One step: returns the new ``state -> {g: weight}`` mapping."""
    new = {}
    for sources, targets in graph.fanout:
        merged = None
        for v in sources:
            gd = dist.get(v)
            if not gd:
                continue
            wv = graph.weights[v]
            step = step_of[v]
            if merged is None:
                merged = {}
            for g, x in gd.items():
                h = G.multiply(g, step)
                if alive(h):
                    merged[h] = merged.get(h, 0) + x * wv
        if merged:
            for u in targets:
                prev = new.get(u)
                if prev is None:
                    new[u] = merged
                else:
                    combined = dict(prev)
                    for h, x in merged.items():
                        combined[h] = combined.get(h, 0) + x
                    new[u] = combined
    return new


def _bucket_count(dist):
    seen = set()
    total = 0
    for gd in dist.values():
        if id(gd) not in seen:
            seen.add(id(gd))
            total += len(gd)
    return total


def closed_walks(phi, psi, anchor, N, star=False, budget=DEFAULT_BUDGET):
    """Weights of closed walks at ``(anchor, id)`` for lengths ``1..N``.

    Returns a list ``Z`` with ``Z[n-1]`` the sum over base-periodic words
    ``omega`` of length ``n`` with ``omega_1 = anchor`` and
    ``Psi(omega) = id`` of ``exp(S_n phi)`` on the periodic point. With
    ``star`` intermediate visits to ``(anchor, id)`` are forbidden.
    """
    G = psi.group
    graph = BlockGraph(phi)
    step_of = [psi[s[0]] for s in graph.states]
    max_step = psi.max_step
    ident = G.identity
    totals = [0] * N
    anchor_states = [k for k, s in enumerate(graph.states) if s[0] == anchor]
    for s0 in anchor_states:
        dist = {s0: {ident: 1}}
        for n in range(1, N + 1):
            def alive(h, r=N - n):
                # must still be able to walk back to the identity
                return G.norm(h) <= r * max_step
            dist = _advance(graph, G, step_of, dist, alive)
            hit = dist.get(s0, {}).get(ident, 0)
            totals[n - 1] += hit
            if star:
                for u in anchor_states:
                    gd = dist.get(u)
                    if gd and ident in gd:
                        gd = dict(gd)
                        del gd[ident]
                        dist[u] = gd
            if budget is not None:
                count = _bucket_count(dist)
                if count > budget:
                    raise BudgetExceeded(n, count, budget)
            if not dist:
                break
    return [graph.scale(z, n) for n, z in enumerate(totals, start=1)]


def word_layers(phi, psi, N, radius=None, buckets=False, budget=DEFAULT_BUDGET):
    """Aggregate ``exp(sup S_k phi | [omega])`` over words by ``Psi(omega)``.

    Yields ``(k, layer)`` for ``k = 1..N`` where ``layer`` maps a group
    element ``g`` to the total weight of admissible ``k``-words with
    ``Psi(omega) = g`` (or, with ``buckets``, to a dict keyed by
    ``(first symbol, last symbol)``). ``radius`` restricts the output to
    elements of norm at most ``radius`` and prunes the search accordingly.
    """
    from .potentials import sup_weight_on_cylinder
    from .shift import admissible_words

    G = psi.group
    graph = BlockGraph(phi)
    m = phi.memory
    D = graph.denominator
    step_of = [psi[s[0]] for s in graph.states]
    max_step = psi.max_step
    tails = tail_factors(phi)
    if graph.exact:
        # T(s) carries m window weights
        tail_int = [int(tails[s] * D ** m) for s in graph.states]
    else:
        tail_int = [float(tails[s]) for s in graph.states]
    tail_elem = []
    for s in graph.states:
        g = psi[s[0]]
        for x in s[1:]:
            g = G.multiply(g, psi[x])
        tail_elem.append(g)

    def emit(layer, first, last, g, x):
        if radius is not None and G.norm(g) > radius:
            return
        if buckets:
            b = layer.setdefault(g, {})
            b[(first, last)] = b.get((first, last), 0) + x
        else:
            layer[g] = layer.get(g, 0) + x

    def finish(layer, k):
        if buckets:
            return {g: {key: graph.scale(x, k) for key, x in b.items()} for g, b in layer.items()}
        return {g: graph.scale(x, k) for g, x in layer.items()}

    # short words: direct enumeration
    for k in range(1, min(m - 1, N) + 1):
        layer = {}
        for w in admissible_words(phi.shift, k):
            g = psi[w[0]]
            for x in w[1:]:
                g = G.multiply(g, psi[x])
            val = sup_weight_on_cylinder(phi, w)
            if graph.exact:
                val = int(val * D ** k)
            emit(layer, w[0], w[-1], g, val)
        yield k, finish(layer, k)

    if N < m:
        return
    # paths s_1 .. s_{j+1}: word length k = j + m; keyed additionally by first symbol
    ident = G.identity
    firsts = sorted({s[0] for s in graph.states}) if buckets else [None]
    dists = {}
    for f in firsts:
        dists[f] = {v: {ident: 1} for v, s in enumerate(graph.states) if f is None or s[0] == f}
    slack = (m * max_step) if max_step else 0
    for k in range(m, N + 1):
        j = k - m
        layer = {}
        if j > 0:
            if radius is not None:
                def alive(h, r=N - k):
                    return G.norm(h) <= radius + r * max_step + slack
            else:
                def alive(h):
                    return True
            for f in firsts:
                dists[f] = _advance(graph, G, step_of, dists[f], alive)
        for f in firsts:
            for v, gd in dists[f].items():
                s = graph.states[v]
                t = tail_int[v]
                te = tail_elem[v]
                for g, x in gd.items():
                    emit(layer, f, s[-1], G.multiply(g, te), x * t)
            if budget is not None:
                count = _bucket_count(dists[f])
                if count > budget:
                    raise BudgetExceeded(k, count, budget)
        yield k, finish(layer, k)
