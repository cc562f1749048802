"""Exact elimination of the partition quantifiers of an ∃-step.

After :func:`fv.exists_block_step` the Boolean side has the shape

    ∃w̄ [ w_S ⊆ z_S,  w̄ pairwise disjoint,  ⋁ w̄ = 1,  σ(p̄, ȳ) ]

where p̄ are passed-through components, y_i is the join of the w_S with
i ∈ S and σ is tight (its atoms are A_k(y_i) and A_k(p_j)).  Read atom by
atom: every atom λ lies in a fixed p-minterm π and in a set c of realised
types (the S with λ ∈ z_S), and the w̄ choose one type S ∈ c for it.  The
counts N_{π,S} of atoms sent to type S are all σ can see.

σ denotes a union of boxes over the (π, S) coordinates.  Whether some
choice lands in a box B is a transportation problem from the coarse
minterms (π, c) to the types (π, S), S ∈ c, with N_{π,S} ∈ [lo, hi].  By
Hoffman's circulation theorem it is feasible iff, for every π and every
set V of types,

    Σ_{c ∩ V ≠ ∅} n_{π,c} ≥ Σ_{S ∈ V} lo_S       (A_L of π ∧ ⋁_{S∈V} z_S)
    Σ_{c ⊆ V}     n_{π,c} ≤ Σ_{S ∈ V} hi_S       (¬A_{H+1} of π ∧ ⋀_{S∉V} z_S^C)

Both families are A_k statements about Boolean terms in p̄, z̄, so the
elimination result is written down directly, one conjunction per box.  The
result is exact under the covering hypothesis ⋁ z̄ = 1 (every atom has a
realised type), which holds for the K-sets of the θ_S in every product.
"""

from __future__ import annotations

from itertools import combinations

from ..formula import FALSE, TRUE, Not, Var, atl, comp, conj, disj, join_all, meet_all
from .qe import INF, _Cells, _denote, _simplify

MAX_CONSTRAINT_SUBSETS = 12  # at most 2^12 subsets V per coordinate family


def _subsets(items):
    for n in range(1, len(items) + 1):
        yield from combinations(items, n)


def eliminate_partition(sigma, k: int, dep: int, order_y, order_out):
    """Eliminate the partition block for a tight σ.

    ``order_y`` lists σ's variables: the k passed-through ones first, then
    the ``dep`` ones split by the step.  ``order_out`` lists the result's
    variables: the k passed-through ones, then one z per type S ⊆ {0..dep-1}
    (type S at position k + mask(S)).
    """
    from ..errors import BoundExceeded

    order_y = tuple(order_y)
    r = len(order_y)
    cells = _Cells(sigma, order_y, r)
    boxes = _denote(sigma, cells)
    n_types = 1 << dep
    # coordinates (π, S): minterm index = π | S << k
    full = [(0, INF)] * (1 << r)
    disjuncts = []
    for box in _simplify(boxes):
        iv = list(full)
        for (lo, hi), members in zip(box, cells.cells):
            iv[members[0]] = (lo, hi)
        if not any(hi >= INF for lo, hi in iv):
            continue  # finite algebra: no infinite atom count
        parts = []
        for pi in range(1 << k):
            pi_lits = [Var(order_out[j]) if pi >> j & 1 else comp(Var(order_out[j])) for j in range(k)]
            coords = [iv[pi | (S << k)] for S in range(n_types)]
            positive = [S for S, (lo, _) in enumerate(coords) if lo > 0]
            finite = [S for S, (_, hi) in enumerate(coords) if hi < INF]
            zero = [S for S in finite if coords[S][1] == 0]
            loose = [S for S in finite if coords[S][1] > 0]
            if len(positive) > MAX_CONSTRAINT_SUBSETS or len(loose) > MAX_CONSTRAINT_SUBSETS:
                raise BoundExceeded("partition elimination needs too many subset constraints", bound="boxes")
            for V in _subsets(positive):
                need = sum(coords[S][0] for S in V)
                parts.append(atl(need, meet_all(pi_lits + [join_all([Var(order_out[k + S]) for S in V])])))
            for extra in [()] + list(_subsets(loose)):
                U = set(zero) | set(extra)
                if not U:
                    continue  # only the empty type set: covered by the hypothesis
                cap = sum(coords[S][1] for S in U)
                outside = [comp(Var(order_out[k + S])) for S in range(n_types) if S not in U]
                parts.append(Not(atl(cap + 1, meet_all(pi_lits + outside))))
        if not parts:
            return TRUE
        disjuncts.append(conj(parts))
    if not disjuncts:
        return FALSE
    return disj(disjuncts)
