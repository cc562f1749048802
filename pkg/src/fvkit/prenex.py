"""Prenex normal form and quantifier-shape classification."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .formula import (
    BINARY,
    QUANTIFIERS,
    And,
    Atomic,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    all_variables,
    fresh_name,
    free_variables,
    is_quantifier_free,
    substitute,
    uniquify_bound,
)

_FLIP = {Exists: Forall, Forall: Exists}


def _prefix(f):
    """Split f into (list of (quantifier class, var), matrix) with renaming.

    Quantifiers are pulled outward; ``taken`` names are avoided so that
    variables pulled from different operands never clash.
    """
    taken = set(all_variables(f))
    return _pull(f, taken)


def _pull(f, taken):
    if isinstance(f, Atomic) or is_quantifier_free(f):
        return [], f
    if isinstance(f, QUANTIFIERS):
        prefix, matrix = _pull(f.body, taken)
        return [(type(f), f.var)] + prefix, matrix
    if isinstance(f, Not):
        prefix, matrix = _pull(f.body, taken)
        return [(_FLIP[q], v) for q, v in prefix], Not(matrix)
    if isinstance(f, Iff):
        left, right = f.left, f.right
        expanded = And(Implies(left, right), Implies(right, left))
        return _pull(expanded, taken)
    left_prefix, left_matrix = _pull(f.left, taken)
    right_prefix, right_matrix = _pull(f.right, taken)
    if isinstance(f, Implies):
        left_prefix = [(_FLIP[q], v) for q, v in left_prefix]
    # rename apart: bound names must not occur free in the other operand
    left_prefix, left_matrix = _rename_apart(left_prefix, left_matrix, free_variables(right_matrix), taken)
    right_prefix, right_matrix = _rename_apart(
        right_prefix, right_matrix, free_variables(left_matrix) | {v for _, v in left_prefix}, taken
    )
    prefix = _merge(left_prefix, right_prefix)
    return prefix, type(f)(left_matrix, right_matrix)


def _rename_apart(prefix, matrix, avoid, taken):
    out = []
    for q, v in prefix:
        if v in avoid or any(v == w for _, w in out):
            new = fresh_name(v, taken | avoid)
            taken.add(new)
            matrix = substitute(matrix, {v: Var(new)})
            v = new
        out.append((q, v))
    return out, matrix


def _blocks(prefix):
    blocks = []
    for q, v in prefix:
        if blocks and blocks[-1][0] is q:
            blocks[-1][1].append((q, v))
        else:
            blocks.append((q, [(q, v)]))
    return blocks


def _merge(a, b):
    """Interleave two prefixes (order inside each kept) with fewest blocks."""
    if not a:
        return list(b)
    if not b:
        return list(a)
    ba, bb = _blocks(a), _blocks(b)
    ta = tuple(q for q, _ in ba)
    tb = tuple(q for q, _ in bb)

    @lru_cache(maxsize=None)
    def best(i, j):
        # minimal number of blocks to emit the suffixes ba[i:], bb[j:]
        if i == len(ta):
            return len(tb) - j, ()
        if j == len(tb):
            return len(ta) - i, ()
        options = []
        if ta[i] is tb[j]:
            cost, plan = best(i + 1, j + 1)
            options.append((cost + 1, ("both",) + plan))
        cost, plan = best(i + 1, j)
        options.append((cost + 1, ("a",) + plan))
        cost, plan = best(i, j + 1)
        options.append((cost + 1, ("b",) + plan))
        return min(options, key=lambda o: o[0])

    _, plan = best(0, 0)
    out = []
    i = j = 0
    for step in plan:
        if step == "both":
            out += ba[i][1] + bb[j][1]
            i += 1
            j += 1
        elif step == "a":
            out += ba[i][1]
            i += 1
        else:
            out += bb[j][1]
            j += 1
    for blk in ba[i:]:
        out += blk[1]
    for blk in bb[j:]:
        out += blk[1]
    return out


def to_prenex(f):
    """Logically equivalent prenex form.

    Quantifier-free input is returned unchanged; ``->`` and ``<->`` survive
    in the matrix unless a quantifier has to be pulled through them.
    Prefixes of sibling operands are interleaved so that the number of
    quantifier alternations is as small as possible.
    """
    if is_quantifier_free(f):
        return f
    prefix, matrix = _prefix(uniquify_bound(f))
    for q, v in reversed(prefix):
        matrix = q(v, matrix)
    return matrix


def prefix_word(f) -> str:
    word = []
    while isinstance(f, QUANTIFIERS):
        word.append("∃" if isinstance(f, Exists) else "∀")
        f = f.body
    return "".join(word)


_EAE = re.compile(r"^∃*∀*∃*$")


@dataclass(frozen=True)
class ShapeReport:
    word: str
    eae: bool
    leaves: tuple = ()

    def as_dict(self):
        return {"word": self.word, "eae": self.eae, "leaf_words": list(self.leaves)}


def boolean_leaves(f) -> list:
    """Maximal non-Boolean subformulas (atoms or quantified formulas)."""
    if isinstance(f, Not):
        return boolean_leaves(f.body)
    if isinstance(f, BINARY):
        return boolean_leaves(f.left) + boolean_leaves(f.right)
    return [f]


def quantifier_shape(f) -> ShapeReport:
    """Prefix word of to_prenex(f) plus the Boolean-combination-of-∃*∀*∃* flag."""
    word = prefix_word(to_prenex(f))
    leaves = []
    ok = True
    for leaf in boolean_leaves(f):
        if isinstance(leaf, Atomic):
            continue
        w = prefix_word(to_prenex(leaf))
        leaves.append(w)
        ok = ok and bool(_EAE.match(w))
    return ShapeReport(word, ok, tuple(leaves))
