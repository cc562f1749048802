"""Model-checking API: structures, products, index sets and acceptable sequences."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .engine import DEFAULT_MAX_CELLS, Evaluator
from .errors import BoundExceeded
from .formula import free_variables
from .powerset import PowersetEvaluator
from .structures import FiniteStructure, IndexSet, PointTuple, ProductStructure

_EVALUATORS: dict = {}


def structure_evaluator(s, max_cells: int = DEFAULT_MAX_CELLS) -> Evaluator:
    """A (cached) evaluator for a FiniteStructure or a ProductStructure."""
    key = (id(s), max_cells)
    hit = _EVALUATORS.get(key)
    if hit is not None and hit[0] is s:
        return hit[1]
    if isinstance(s, ProductStructure):
        ev = Evaluator(s.factors, s.coords, max_cells=max_cells)
    else:
        ev = Evaluator([s], max_cells=max_cells)
    _EVALUATORS[key] = (s, ev)
    return ev


def evaluate(s: FiniteStructure, f, asg: Mapping) -> bool:
    """Tarskian truth of f in a finite structure under an assignment of element ids."""
    return structure_evaluator(s).evaluate(f, dict(asg))


def _product_assignment(P: ProductStructure, asg: Mapping) -> dict:
    out = {}
    for k, v in asg.items():
        if isinstance(v, (tuple, list)):
            v = P.element(v)
        out[k] = int(v)
    return out


def evaluate_product(P: ProductStructure, f, asg: Mapping, max_cells: int = DEFAULT_MAX_CELLS) -> bool:
    """Truth of f in the product; asg maps variables to product ids or coordinate tuples."""
    return structure_evaluator(P, max_cells).evaluate(f, _product_assignment(P, asg))


def evaluate_product_batch(P: ProductStructure, f, batch: Mapping, max_cells: int = DEFAULT_MAX_CELLS):
    """Truth of f for each row of a batch; large batches are split to respect ``max_cells``."""
    ev = structure_evaluator(P, max_cells)
    try:
        return ev.evaluate_batch(f, batch)
    except BoundExceeded:
        arrays = {k: np.atleast_1d(np.asarray(v)) for k, v in batch.items()}
        n = max((len(v) for v in arrays.values()), default=1)
        if n <= 1:
            raise
        half = n // 2

        def part(sl):
            return {k: (v[sl] if len(v) == n else v) for k, v in arrays.items()}

        lo = evaluate_product_batch(P, f, part(slice(0, half)), max_cells)
        hi = evaluate_product_batch(P, f, part(slice(half, n)), max_cells)
        return np.concatenate([lo, hi])


def k_masks(P: ProductStructure, theta, batch: Mapping) -> np.ndarray:
    """Bitmask of K_θ for every row of a batch of product assignments."""
    free = free_variables(theta)
    n = max((len(np.atleast_1d(v)) for v in batch.values()), default=1)
    masks = np.zeros(n, dtype=np.int64)
    for i, fac in enumerate(P.factors):
        ev = structure_evaluator(fac)
        local = {v: P.coords[i][np.atleast_1d(np.asarray(batch[v], dtype=np.int64))] for v in free}
        if local:
            truth = ev.evaluate_batch(theta, local)
        else:
            truth = np.broadcast_to(ev.evaluate_batch(theta, {}), (n,))
        masks |= truth.astype(np.int64) << i
    return masks


def k_set(P: ProductStructure, theta, asg) -> IndexSet:
    """K_θ(ā) = {λ : factor λ satisfies θ at ā[λ]}.

    ``asg`` is a mapping from variables to product elements, or a
    PointTuple paired with the variable order via :func:`point_assignment`.
    """
    if isinstance(asg, PointTuple):
        raise TypeError("pass a variable->element mapping (see point_assignment)")
    batch = {k: [v] for k, v in _product_assignment(P, asg).items()}
    return P.index_set(int(k_masks(P, theta, batch)[0]))


def point_assignment(P: ProductStructure, variables: Sequence[str], point: PointTuple) -> dict:
    """Turn a PointTuple into a variable -> product-element mapping."""
    out = {}
    for j, v in enumerate(variables):
        out[v] = P.element([point.at(lab)[j] for lab in P.labels])
    return out


def _mask(x) -> int:
    return x.mask if isinstance(x, IndexSet) else int(x)


def evaluate_powerset(labels: Sequence, phi, asg: Mapping, evaluator: PowersetEvaluator | None = None) -> bool:
    """Truth of a Boolean/A_k formula in P(Λ) with variables bound to IndexSets."""
    ev = evaluator or PowersetEvaluator(len(labels))
    return ev.holds(phi, {k: _mask(v) for k, v in asg.items()})


def evaluate_acceptable(P: ProductStructure, xi, asg: Mapping) -> bool:
    """Evaluate Φ in P(Λ) at the index sets K_{θ_i}(ā)."""
    env = {}
    for i, theta in enumerate(xi.components):
        env[xi.var(i)] = k_set(P, theta, asg).mask
    return PowersetEvaluator(len(P.labels)).holds(xi.bool_formula, env)


def evaluate_acceptable_batch(P: ProductStructure, xi, batch: Mapping) -> np.ndarray:
    """Vectorised evaluate_acceptable over a batch of assignments.

    K-sets are computed per component for the whole batch; the Boolean
    formula is evaluated once per distinct vector of K-sets.
    """
    n = max((len(np.atleast_1d(v)) for v in batch.values()), default=1)
    cols = [k_masks(P, theta, batch) for theta in xi.components]
    ev = PowersetEvaluator(len(P.labels))
    out = np.zeros(n, dtype=bool)
    seen: dict = {}
    names = [xi.var(i) for i in range(len(xi.components))]
    for r in range(n):
        key = tuple(int(c[r]) for c in cols)
        val = seen.get(key)
        if val is None:
            val = ev.holds(xi.bool_formula, dict(zip(names, key)))
            seen[key] = val
        out[r] = val
    return out


# ---------------------------------------------------------------------------
# mixing witnesses


@dataclass(frozen=True)
class CylinderSpec:
    """Basic open set: tuples agreeing with ``values`` on the labels in ``fixed``.

    ``values`` maps each label of Λ₀ to an n-tuple of factor element ids.
    """

    fixed: tuple
    values: Mapping

    def matches(self, P: ProductStructure, tup: Sequence[int]) -> bool:
        for lab in self.fixed:
            i = P.labels.index(lab)
            coords = tuple(P.coordinates(e)[i] for e in tup)
            if coords != tuple(self.values[lab]):
                return False
        return True


@dataclass(frozen=True)
class MixingWitness:
    inside: tuple | None
    outside: tuple | None

    @property
    def found(self) -> bool:
        return self.inside is not None and self.outside is not None


def mixing_witness(
    P: ProductStructure,
    member: Callable[[tuple], bool],
    cyl: CylinderSpec,
    budget: int = 100_000,
    arity: int = 1,
    seed: int = 0,
    candidates=None,
) -> MixingWitness:
    """Search for ā ∈ X and b̄ ∉ X inside the cylinder ``cyl``.

    Tuples are enumerated exhaustively when the cylinder has at most
    ``budget`` points, otherwise ``budget`` random points are drawn (seeded).
    Optional ``candidates`` yields extra tuples to try first (e.g. the
    integer images used by the demos).  Returns a MixingWitness whose
    ``found`` is False when the search is exhausted.
    """
    for lab in cyl.fixed:
        if lab not in P.labels:
            raise ValueError(f"cylinder label {lab!r} not in the product")
        i = P.labels.index(lab)
        vals = tuple(cyl.values[lab])
        if len(vals) != arity or any(not 0 <= v < P.sizes[i] for v in vals):
            raise ValueError(f"cylinder values at {lab!r} inconsistent with the product")
    free_pos = [i for i, lab in enumerate(P.labels) if lab not in cyl.fixed]
    fixed = {P.labels.index(lab): tuple(cyl.values[lab]) for lab in cyl.fixed}

    inside = outside = None

    def consider(tup):
        nonlocal inside, outside
        if inside is not None and outside is not None:
            return True
        if not cyl.matches(P, tup):
            return False
        if member(tup):
            if inside is None:
                inside = tup
        elif outside is None:
            outside = tup
        return inside is not None and outside is not None

    if candidates is not None:
        for tup in candidates:
            if consider(tuple(tup)):
                return MixingWitness(inside, outside)

    free_points = 1
    for i in free_pos:
        free_points *= P.sizes[i] ** arity

    def build(choice):
        # choice: per free position a tuple of arity coordinates
        per = dict(fixed)
        per.update(zip(free_pos, choice))
        return tuple(P.element([per[i][j] for i in range(len(P.labels))]) for j in range(arity))

    ranges = [list(itertools.product(range(P.sizes[i]), repeat=arity)) for i in free_pos]
    if free_points <= budget:
        for choice in itertools.product(*ranges):
            if consider(build(choice)):
                break
    else:
        rng = random.Random(seed)
        for _ in range(budget):
            choice = [r[rng.randrange(len(r))] for r in ranges]
            if consider(build(choice)):
                break
    return MixingWitness(inside, outside)
