"""Textbook projection-postulate simulator.

Used as an independent check on :mod:`lks.measurement`. It evolves a
density matrix stage by stage, ``rho -> G rho G^T``, and at each probed stage
splits every branch into ``P_k rho P_k`` for the blocks of the probe. The
trace of a branch is the weight of its record history. Nothing here uses
processes or links.
"""

from fractions import Fraction

import numpy as np


def _frac_matrix(rows):
    return np.array([[Fraction(x) for x in row] for row in rows], dtype=object)


def _initial(v, n):
    if v is None:
        return np.identity(n, dtype=int).astype(object) * Fraction(1)
    v = np.array([Fraction(x) for x in v], dtype=object)
    return np.outer(v, v)


def simulate(generators, v, probes, n=None):
    """Joint distribution of record histories.

    ``generators`` are the step matrices (rows = after). ``v`` is the initial
    amplitude vector, or None for the maximally mixed start. ``probes`` maps
    a stage to its block labels (a tuple with one label per value), or to
    None for a complete probe. Returns ``{history: probability}`` with
    histories ordered by stage.
    """
    gens = [_frac_matrix(g) for g in generators]
    n = n if n is not None else (len(gens[0]) if gens else len(v))
    branches = {(): _initial(v, n)}
    for t in range(len(gens) + 1):
        if t in probes:
            labels = probes[t] if probes[t] is not None else tuple(range(n))
            nxt = {}
            for hist, rho in branches.items():
                for k in range(max(labels) + 1):
                    p = np.diag([Fraction(int(l == k)) for l in labels]).astype(object)
                    nxt[hist + (k,)] = p.dot(rho).dot(p)
            branches = nxt
        if t < len(gens):
            g = gens[t]
            branches = {h: g.dot(rho).dot(g.T) for h, rho in branches.items()}
    total = sum(np.trace(rho) for rho in branches.values())
    return {h: np.trace(rho) / total for h, rho in branches.items()}


def stage_distribution(generators, v, t):
    """Squared amplitudes of ``G_t ... G_1 v``, normalized."""
    a = np.array([Fraction(x) for x in v], dtype=object)
    for g in generators[:t]:
        a = _frac_matrix(g).dot(a)
    sq = a * a
    return tuple(sq / sq.sum())
