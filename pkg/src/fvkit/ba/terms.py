"""Boolean terms as sets of minterms.

Over variables v_0..v_{r-1} a minterm is an index i < 2^r whose bit j says
whether the region lies inside v_j.  A term denotes the set of minterms it
covers, stored as a Python int bitmask of width 2^r.
"""

from __future__ import annotations

from functools import lru_cache

from ..formula import ONE, ZERO, Apply, Const, Var, comp, join_all, meet_all


def full_mask(r: int) -> int:
    return (1 << (1 << r)) - 1


@lru_cache(maxsize=None)
def var_mask(j: int, r: int) -> int:
    """Minterms lying inside variable j."""
    mask = 0
    for i in range(1 << r):
        if i >> j & 1:
            mask |= 1 << i
    return mask


def term_mask(t, order) -> int:
    """Minterm set of a Boolean term over the variable order."""
    r = len(order)
    index = {v: j for j, v in enumerate(order)}

    def go(s):
        if isinstance(s, Var):
            if s.name not in index:
                raise KeyError(f"variable {s.name!r} not in the minterm order")
            return var_mask(index[s.name], r)
        if isinstance(s, Const):
            if s.symbol == "0":
                return 0
            if s.symbol == "1":
                return full_mask(r)
            raise ValueError(f"not a Boolean constant: {s.symbol!r}")
        if isinstance(s, Apply):
            if s.symbol == "meet":
                return go(s.args[0]) & go(s.args[1])
            if s.symbol == "join":
                return go(s.args[0]) | go(s.args[1])
            if s.symbol == "comp":
                return full_mask(r) ^ go(s.args[0])
        raise ValueError(f"not a Boolean term: {s!r}")

    return go(t)


def minterms(mask: int) -> list:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _prime_implicants(ones: list, r: int) -> list:
    """Quine–McCluskey prime implicants as (value, care) pairs."""
    full = (1 << r) - 1
    current = {(m, full) for m in ones}
    primes = set()
    while current:
        merged = set()
        used = set()
        items = sorted(current)
        by_care: dict = {}
        for value, care in items:
            by_care.setdefault(care, []).append(value)
        for care, values in by_care.items():
            vs = set(values)
            for v in values:
                for j in range(r):
                    bit = 1 << j
                    if care & bit and not v & bit and (v | bit) in vs:
                        merged.add((v, care & ~bit))
                        used.add((v, care))
                        used.add((v | bit, care))
        primes |= current - used
        current = merged
    return sorted(primes)


def _covers(imp, m) -> bool:
    value, care = imp
    return (m & care) == value


def minimal_cover(mask: int, r: int, dont_care: int = 0) -> list:
    """A small sum-of-products cover: essential primes, then greedy.

    Minterms in ``dont_care`` may be covered or not, whichever is smaller.
    """
    mask &= ~dont_care
    ones = minterms(mask)
    if not ones:
        return []
    primes = _prime_implicants(minterms(mask | dont_care), r)
    remaining = set(ones)
    chosen = []
    for m in ones:
        covering = [p for p in primes if _covers(p, m)]
        if len(covering) == 1 and covering[0] not in chosen:
            chosen.append(covering[0])
    for p in chosen:
        remaining -= {m for m in remaining if _covers(p, m)}
    while remaining:
        best = max(primes, key=lambda p: (sum(1 for m in remaining if _covers(p, m)), -bin(p[1]).count("1")))
        chosen.append(best)
        remaining -= {m for m in remaining if _covers(best, m)}
    return sorted(chosen, key=lambda p: (bin(p[1]).count("1"), p))


def mask_to_term(mask: int, order, dont_care: int = 0):
    """A compact Boolean term (join of meets of literals) with the given minterm set.

    The term agrees with ``mask`` outside the ``dont_care`` minterms.
    """
    r = len(order)
    if mask & ~dont_care == 0:
        return ZERO
    if (mask | dont_care) == full_mask(r):
        return ONE
    products = []
    for value, care in minimal_cover(mask, r, dont_care):
        lits = []
        for j, v in enumerate(order):
            if care >> j & 1:
                lits.append(Var(v) if value >> j & 1 else comp(Var(v)))
        products.append(meet_all(lits))
    return join_all(products)


def minterm_term(i: int, order):
    """The meet of literals describing minterm i."""
    return meet_all([Var(v) if i >> j & 1 else comp(Var(v)) for j, v in enumerate(order)])
