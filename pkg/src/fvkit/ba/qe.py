"""Quantifier elimination for infinite atomic Boolean algebras.

The elimination is semantic.  A quantifier-free formula over variables V ∪ W
describes a set of minterm-cardinality vectors, and that set is a finite
union of boxes: products of intervals over ℕ ∪ {∞}.  ∃W projects each box
by summing the intervals of the fine minterms inside each coarse minterm of
V.  The projected union is then written back as a quantifier-free formula
using A_k / ¬A_k on minterm terms.

Two reductions keep the boxes small:

* positive equalities that are top-level conjuncts of the body force whole
  sets of fine minterms to be empty, so those minterms are dropped;
* live fine minterms that lie in the same coarse minterm and in exactly the
  same atoms can only be told apart by their total, so they are merged into
  one cell.

The output only has to be equivalent modulo the theory of infinite atomic
Boolean algebras.  Boxes in which every minterm is bounded describe finite
algebras, so they are dropped.
"""

from __future__ import annotations

from math import comb

from ..errors import BoundExceeded
from ..formula import (
    FALSE,
    TRUE,
    And,
    Atomic,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    atl,
    atl_index,
    conj,
    disj,
    free_variables,
    is_quantifier_free,
    uniquify_bound,
)
from ..engine import conjuncts
from .terms import full_mask, mask_to_term, minterm_term, minterms as minterms_of, term_mask

INF = 1 << 40
MAX_MINTERM_VARS = 16
MAX_BOXES = 20_000
MAX_PAIRS = 4_000_000  # box pairs examined by one intersection


# ---------------------------------------------------------------------------
# unions of boxes


def _simplify(boxes: list) -> list:
    """Drop empty and subsumed boxes and merge neighbours along one coordinate."""
    boxes = [b for b in set(boxes) if all(lo <= hi for lo, hi in b)]
    changed = True
    while changed:
        changed = False
        if boxes:
            n = len(boxes[0])
            for i in range(n):
                groups: dict = {}
                for b in boxes:
                    groups.setdefault(b[:i] + b[i + 1 :], []).append(b[i])
                if all(len(v) == 1 for v in groups.values()):
                    continue
                merged = []
                for rest, ivs in groups.items():
                    ivs.sort()
                    cur_lo, cur_hi = ivs[0]
                    for lo, hi in ivs[1:]:
                        if lo <= cur_hi + 1:
                            if hi > cur_hi:
                                cur_hi = hi
                        else:
                            merged.append(rest[:i] + ((cur_lo, cur_hi),) + rest[i:])
                            cur_lo, cur_hi = lo, hi
                    merged.append(rest[:i] + ((cur_lo, cur_hi),) + rest[i:])
                if len(merged) < len(boxes):
                    changed = True
                boxes = merged
        boxes = _drop_subsumed(boxes)
    if len(boxes) > MAX_BOXES:
        raise BoundExceeded(f"box union grew beyond {MAX_BOXES} boxes", bound="boxes")
    return sorted(boxes)


def _contains(a, b) -> bool:
    return all(la <= lb and hb <= ha for (la, ha), (lb, hb) in zip(a, b))


def _drop_subsumed(boxes: list) -> list:
    boxes = sorted(boxes, key=lambda b: -sum(min(hi, 1 << 20) - lo for lo, hi in b))
    kept: list = []
    for b in boxes:
        if not any(_contains(k, b) for k in kept):
            kept.append(b)
    return kept


def _intersect(us: list, vs: list) -> list:
    if len(us) * len(vs) > MAX_PAIRS:
        raise BoundExceeded(f"intersecting {len(us)} by {len(vs)} boxes exceeds the work bound", bound="boxes")
    out = []
    for a in us:
        for b in vs:
            box = tuple((max(la, lb), min(ha, hb)) for (la, ha), (lb, hb) in zip(a, b))
            if all(lo <= hi for lo, hi in box):
                out.append(box)
        if len(out) > MAX_BOXES:
            raise BoundExceeded(f"box intersection grew beyond {MAX_BOXES} boxes", bound="boxes")
    return _simplify(out)


def _full(n: int) -> tuple:
    return ((0, INF),) * n


def _complement(boxes: list, n: int) -> list:
    result = [_full(n)]
    for b in boxes:
        pieces = []
        for i, (lo, hi) in enumerate(b):
            if lo > 0:
                pieces.append(_full(n)[:i] + ((0, lo - 1),) + _full(n)[i + 1 :])
            if hi < INF:
                pieces.append(_full(n)[:i] + ((hi + 1, INF),) + _full(n)[i + 1 :])
        result = _intersect(result, pieces)
        if not result:
            break
    return result


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# denotations over cells


class _Cells:
    """Live fine minterms grouped into cells; each atom sees a set of cells."""

    def __init__(self, body, order, r):
        self.order = tuple(order)
        self.r = r
        self.atoms = []  # (atom formula, fine mask)
        for a in _atoms(body):
            if a.relation == "=":
                mask = term_mask(a.terms[0], order) ^ term_mask(a.terms[1], order)
            else:
                mask = term_mask(a.terms[0], order)
            self.atoms.append((a, mask))
        forced = 0
        for c in conjuncts(body):
            if isinstance(c, Atomic) and c.relation == "=":
                forced |= term_mask(c.terms[0], order) ^ term_mask(c.terms[1], order)
        live = full_mask(len(order)) & ~forced
        groups: dict = {}
        i = 0
        m = live
        while m:
            if m & 1:
                sig = (i & ((1 << r) - 1),) + tuple(mask >> i & 1 for _, mask in self.atoms)
                groups.setdefault(sig, []).append(i)
            m >>= 1
            i += 1
        self.cells = [groups[k] for k in sorted(groups)]
        self.coarse = [k[0] for k in sorted(groups)]
        self.cell_mask = {}
        for a, mask in self.atoms:
            cm = 0
            for j, members in enumerate(self.cells):
                if mask >> members[0] & 1:
                    cm |= 1 << j
            self.cell_mask[a] = cm

    @property
    def n(self):
        return len(self.cells)


def _atoms(f) -> list:
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atomic):
            if g not in out:
                out.append(g)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or, Implies, Iff)):
            stack.extend((g.right, g.left))
        else:
            raise TypeError("expected a quantifier-free formula")
    return out


def _denote(f, cells: _Cells) -> list:
    n = cells.n
    if isinstance(f, Atomic):
        cm = cells.cell_mask[f]
        idx = [j for j in range(n) if cm >> j & 1]
        if f.relation == "=":
            if not idx:
                return [_full(n)]
            box = list(_full(n))
            for j in idx:
                box[j] = (0, 0)
            return [tuple(box)]
        k = atl_index(f.relation)
        if k is None:
            raise ValueError(f"unknown relation {f.relation!r}")
        if not idx:
            return []
        if comb(len(idx) + k - 1, k) > MAX_BOXES:
            raise BoundExceeded(f"A_{k} over {len(idx)} cells needs too many boxes", bound="boxes")
        out = []
        for parts in _compositions(k, len(idx)):
            box = list(_full(n))
            for j, p in zip(idx, parts):
                if p:
                    box[j] = (p, INF)
            out.append(tuple(box))
        return _simplify(out)
    if isinstance(f, Not):
        return _complement(_denote(f.body, cells), n)
    if isinstance(f, And):
        left = _denote(f.left, cells)
        return _intersect(left, _denote(f.right, cells)) if left else []
    if isinstance(f, Or):
        return _simplify(_denote(f.left, cells) + _denote(f.right, cells))
    if isinstance(f, Implies):
        return _denote(Or(Not(f.left), f.right), cells)
    if isinstance(f, Iff):
        return _denote(Or(And(f.left, f.right), And(Not(f.left), Not(f.right))), cells)
    raise TypeError(f"not a quantifier-free formula: {f!r}")


def _project(boxes: list, cells: _Cells) -> list:
    r = cells.r
    out = []
    for b in boxes:
        lo = [0] * (1 << r)
        hi = [0] * (1 << r)
        for (l, h), c in zip(b, cells.coarse):
            lo[c] += l
            hi[c] = INF if (h >= INF or hi[c] >= INF) else hi[c] + h
        out.append(tuple(zip(lo, hi)))
    return _simplify(out)


def _admissible(boxes: list) -> list:
    return [b for b in boxes if any(hi >= INF for _, hi in b)]


def _group_at_least_one(boxes: list) -> list:
    """Group boxes that differ only in which single minterm is required non-empty.

    Returns (box with the grouped coordinates relaxed, grouped minterms) pairs;
    ungrouped boxes come back with an empty group.  This turns the n boxes
    produced by A_1 over n cells back into a single A_1 of a join.
    """
    remaining = set(boxes)
    out = []
    while remaining:
        groups: dict = {}
        for b in remaining:
            for j, iv in enumerate(b):
                if iv == (1, INF):
                    key = b[:j] + ((0, INF),) + b[j + 1 :]
                    groups.setdefault(key, set()).add(j)
        best = None
        for key, js in groups.items():
            if len(js) >= 2 and (best is None or (len(js), key) > (len(groups[best]), best)):
                best = key
        if best is None:
            out.extend((b, ()) for b in sorted(remaining))
            break
        js = sorted(groups[best])
        for j in js:
            remaining.discard(best[:j] + ((1, INF),) + best[j + 1 :])
        out.append((best, tuple(js)))
    return out


def _assume_empty(boxes: list, empty: int) -> list:
    """Restrict to the states where the minterms in ``empty`` have no atoms."""
    out = []
    for b in boxes:
        if all(b[i][0] == 0 for i in minterms_of(empty)):
            out.append(tuple((0, 0) if empty >> i & 1 else iv for i, iv in enumerate(b)))
    return out


def _relax(boxes: list, empty: int) -> list:
    return [tuple((0, INF) if empty >> i & 1 else iv for i, iv in enumerate(b)) for b in boxes]


def boxes_to_formula(boxes: list, order, assume_empty: int = 0) -> object:
    """Write a union of boxes over the minterms of ``order`` as a formula.

    Bounded boxes are dropped, and a union that covers every admissible
    state becomes ``0 = 0``.  Minterms in the ``assume_empty`` mask are
    taken to have no atoms: the result R only satisfies H → (R ↔ boxes),
    where H says those minterms are 0.
    """
    r = len(order)
    boxes = _admissible(_simplify(_assume_empty(boxes, assume_empty)))
    if not boxes:
        return FALSE
    rest = _assume_empty(_complement(boxes, 1 << r), assume_empty)
    if not _admissible(rest):
        return TRUE
    boxes = _simplify(_relax(boxes, assume_empty))
    disjuncts = []
    for b, group in _group_at_least_one(boxes):
        zero = 0
        parts = []
        for i, (lo, hi) in enumerate(b):
            if hi == 0:
                zero |= 1 << i
                continue
            t = minterm_term(i, order)
            if lo > 0:
                parts.append(atl(lo, t))
            if hi < INF:
                parts.append(Not(atl(hi + 1, t)))
        if group:
            mask = 0
            for j in group:
                mask |= 1 << j
            parts.insert(0, atl(1, mask_to_term(mask, order, assume_empty)))
        if zero:
            parts.insert(0, Not(atl(1, mask_to_term(zero, order, assume_empty))))
        disjuncts.append(conj(parts))
    return disj(disjuncts)


def eliminate_block(variables, block, body, assume_empty: int = 0):
    """∃block body → an equivalent quantifier-free formula over ``variables``.

    ``body`` must be quantifier-free; ``variables`` lists the free variables
    of the result (a superset of free(∃block body) is fine).  With a non-zero
    ``assume_empty`` mask the result is only equivalent under the hypothesis
    that those minterms of ``variables`` are 0 (see :func:`boxes_to_formula`).
    """
    order = tuple(variables)
    block = [w for w in block if w not in order]
    r = len(order)
    if r + len(block) > MAX_MINTERM_VARS:
        raise BoundExceeded(
            f"{r + len(block)} Boolean variables exceed the minterm bound {MAX_MINTERM_VARS}", bound="minterms"
        )
    cells = _Cells(body, order + tuple(block), r)
    projected = _project(_denote(body, cells), cells)
    return boxes_to_formula(projected, order, assume_empty)


def ba_eliminate_quantifiers(phi):
    """A quantifier-free formula equivalent to φ in every infinite atomic Boolean algebra."""
    if is_quantifier_free(phi):
        return phi
    return _qe(uniquify_bound(phi))


def _qe(f):
    if is_quantifier_free(f):
        return f
    if isinstance(f, Not):
        return Not(_qe(f.body))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_qe(f.left), _qe(f.right))
    kind = type(f)
    block = []
    body = f
    while isinstance(body, kind):
        block.append(body.var)
        body = body.body
    body = _qe(body)
    order = sorted(free_variables(f))
    if kind is Exists:
        return eliminate_block(order, block, body)
    return _negate(eliminate_block(order, block, _negate(body)))


def _negate(f):
    if isinstance(f, Not):
        return f.body
    return Not(f)
