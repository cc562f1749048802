"""Exact certificates for single elimination steps ∃W body ↔ R.

The oracle in :mod:`oracle` enumerates whole cardinality vectors, which is
hopeless once the step has 16 coarse minterms.  For a single ∃-block over a
quantifier-free body there is a better order of work.  Minterm counts are
independent, so a dynamic programme can walk the coarse minterms one at a
time.  For each one it carries two things:

* the capped partial sums of R's atoms;
* the set of capped partial-sum vectors of the body's atoms that some
  splitting of the counts seen so far can reach.

At the end, ∃W body holds iff some reachable vector satisfies the body, and
R is read off its own sums.  States that agree on both parts are merged.

A coarse count c is split among the g cells of its minterm (cells as in
:mod:`qe`).  Every count ≥ max(k_R, g·k_B) behaves like an infinite one,
where k_R and k_B are the largest thresholds of R and of the body.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import BoundExceeded
from ..formula import And, Atomic, Iff, Implies, Not, Or, atl_index
from .oracle import CardinalityState, OracleVerdict
from .qe import MAX_MINTERM_VARS, _Cells, _atoms
from .terms import term_mask

MAX_DP_STATES = 2_000_000


def _threshold(a) -> int:
    k = atl_index(a.relation)
    return 1 if k is None else k


def _compile(f, index):
    """Truth of a QF formula given a tuple of atom sums (capped)."""
    if isinstance(f, Atomic):
        i = index[f]
        if f.relation == "=":
            return lambda s: s[i] == 0
        k = atl_index(f.relation)
        return lambda s: s[i] >= k
    if isinstance(f, Not):
        g = _compile(f.body, index)
        return lambda s: not g(s)
    if isinstance(f, And):
        a, b = _compile(f.left, index), _compile(f.right, index)
        return lambda s: a(s) and b(s)
    if isinstance(f, Or):
        a, b = _compile(f.left, index), _compile(f.right, index)
        return lambda s: a(s) or b(s)
    if isinstance(f, Implies):
        a, b = _compile(f.left, index), _compile(f.right, index)
        return lambda s: (not a(s)) or b(s)
    if isinstance(f, Iff):
        a, b = _compile(f.left, index), _compile(f.right, index)
        return lambda s: a(s) == b(s)
    raise TypeError(f"not a quantifier-free formula: {f!r}")


def certify_block(variables, block, body, result) -> OracleVerdict:
    """Decide whether ∃block body ↔ result holds in all infinite atomic BAs.

    ``body`` and ``result`` must be quantifier-free; ``result`` may only
    mention ``variables``.
    """
    order = tuple(variables)
    r = len(order)
    block = tuple(w for w in block if w not in order)
    if r > MAX_MINTERM_VARS:
        raise BoundExceeded(
            f"certificate over {r} Boolean variables exceeds the minterm bound {MAX_MINTERM_VARS}", bound="minterms"
        )
    cells = _Cells(body, order + block, r)
    # atoms that meet no live cell always have sum 0; they are not tracked
    body_atoms = [a for a, _ in cells.atoms if cells.cell_mask[a]]
    dead = [a for a, _ in cells.atoms if not cells.cell_mask[a]]
    caps_b = [_threshold(a) for a in body_atoms]
    kb = max(caps_b, default=1)
    r_atoms = _atoms(result)
    caps_r = [_threshold(a) for a in r_atoms]
    kr = max(caps_r, default=1)
    r_masks = []
    for a in r_atoms:
        if a.relation == "=":
            r_masks.append(term_mask(a.terms[0], order) ^ term_mask(a.terms[1], order))
        else:
            r_masks.append(term_mask(a.terms[0], order))
    index_b = {a: i for i, a in enumerate(body_atoms)}
    for a in dead:
        index_b[a] = len(body_atoms)  # reads the constant 0 appended below
    body_fn_raw = _compile(body, index_b)

    def body_fn(u):
        return body_fn_raw(u + (0,))

    result_fn = _compile(result, {a: i for i, a in enumerate(r_atoms)})

    by_coarse: dict = {m: [] for m in range(1 << r)}
    for j, m in enumerate(cells.coarse):
        by_coarse[m].append(j)
    cell_in_atom = [[cells.cell_mask[a] >> j & 1 for a in body_atoms] for j in range(cells.n)]

    BIG = None

    def contributions(m, c):
        js = by_coarse[m]
        g = len(js)
        out = set()
        if g == 0:
            if c == 0:
                out.add((0,) * len(body_atoms))
            return out
        for vec in itertools.product(range(kb + 1), repeat=g):
            n_cap = sum(1 for v in vec if v == kb)
            s = sum(v for v in vec if v < kb)
            if c is BIG:
                ok = n_cap > 0
            else:
                ok = (n_cap == 0 and s == c) or (n_cap > 0 and s + n_cap * kb <= c)
            if not ok:
                continue
            sums = [0] * len(body_atoms)
            for v, j in zip(vec, js):
                if v:
                    for i, inside in enumerate(cell_in_atom[j]):
                        if inside:
                            sums[i] += v
            out.add(tuple(min(x, k) for x, k in zip(sums, caps_b)))
        return out

    # Reachable body-sum vectors are stored as sorted arrays of mixed-radix
    # codes; the bytes of that array identify the set.
    radix = np.array([k + 1 for k in caps_b], dtype=np.int64)
    place = np.cumprod(np.concatenate(([1], radix[:-1]))).astype(np.int64) if len(radix) else np.zeros(0, np.int64)
    caps_arr = np.array(caps_b, dtype=np.int64)
    sets: dict = {}

    def intern(codes):
        codes = np.unique(codes)
        key = codes.tobytes()
        sets.setdefault(key, codes)
        return key

    def decode(codes):
        return (codes[:, None] // place[None, :]) % radix[None, :]

    start = intern(np.zeros(1, dtype=np.int64))
    # DP: state -> representative count vector
    states = {((0,) * len(r_atoms), start, False): ()}
    visited = 0
    empty = intern(np.zeros(0, dtype=np.int64))
    for m in range(1 << r):
        g = len(by_coarse[m])
        limit = max(kr, g * kb, 1)
        classes = list(range(limit)) + [BIG]
        new_states: dict = {}
        for c in classes:
            contrib = contributions(m, c)
            cv = np.array(sorted(contrib), dtype=np.int64).reshape(len(contrib), len(body_atoms))
            sumsets: dict = {}
            add_r = [(k if c is BIG else min(c, k)) if mask >> m & 1 else 0 for mask, k in zip(r_masks, caps_r)]
            rs_memo: dict = {}
            for (rsum, reach, big), rep in states.items():
                rs = rs_memo.get(rsum)
                if rs is None:
                    rs = rs_memo[rsum] = tuple(min(a + b, k) for a, b, k in zip(rsum, add_r, caps_r))
                reach2 = sumsets.get(reach)
                if reach2 is None:
                    if contrib:
                        u = decode(sets[reach])
                        both = np.minimum(u[:, None, :] + cv[None, :, :], caps_arr).reshape(-1, len(body_atoms))
                        reach2 = intern(both @ place)
                    else:
                        reach2 = empty
                    sumsets[reach] = reach2
                key = (rs, reach2, big or c is BIG)
                if key not in new_states:
                    new_states[key] = rep + (c,)
        states = new_states
        visited += len(states)
        if len(states) > MAX_DP_STATES:
            raise BoundExceeded("certificate DP exceeded its state budget", bound="states")
    fn_cache: dict = {}

    def reach_holds(key):
        hit = fn_cache.get(key)
        if hit is None:
            hit = any(body_fn(tuple(int(x) for x in u)) for u in decode(sets[key]))
            fn_cache[key] = hit
        return hit

    for (rsum, reach, big), rep in states.items():
        if not big:
            continue
        lhs = reach_holds(reach)
        if lhs != result_fn(rsum):
            return OracleVerdict(False, CardinalityState(order, rep, max(kr, kb)), visited, max(kr, kb))
    return OracleVerdict(True, None, visited, max(kr, kb))
