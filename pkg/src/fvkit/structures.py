"""Explicit finite structures and their labelled direct products.

Elements are dense integer ids.  A field of order p^n stores the element
with coefficient vector (c_0, ..., c_{n-1}) (a residue modulo the
irreducible modulus) under the id sum c_i p^i, so in F_4 the class of x
(called γ) has id 2.  Product elements are mixed-radix ids with the first
label most significant, i.e. lexicographic order on coordinate tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import gf
from .errors import BoundExceeded

MAX_FIELD_ORDER = 4096


class FiniteStructure:
    """A finite structure given by explicit tables.

    ``functions`` maps a symbol to an integer array of shape (size,)*arity,
    ``constants`` maps a symbol to an element id and ``relations`` maps a
    symbol to a boolean array.  Equality is built in.  ``numerals`` gives the
    interpretation of the ring numerals n·1 and ``relation_family`` lets a
    structure provide relations such as A_k lazily.
    """

    def __init__(
        self,
        label: str,
        flavor: str,
        size: int,
        functions: Mapping,
        constants: Mapping,
        relations: Mapping | None = None,
        names: Sequence[str] | None = None,
        characteristic: int | None = None,
        relation_family=None,
    ):
        self.label = label
        self.flavor = flavor
        self.size = int(size)
        self.functions = {k: np.asarray(v) for k, v in functions.items()}
        self.constants = dict(constants)
        self.relations = {k: np.asarray(v, dtype=bool) for k, v in (relations or {}).items()}
        self.names = list(names) if names is not None else [str(i) for i in range(self.size)]
        self.characteristic = characteristic
        self._relation_family = relation_family
        self.universe = range(self.size)
        for sym, table in self.functions.items():
            if table.size and (table.min() < 0 or table.max() >= self.size):
                raise ValueError(f"function {sym!r} leaves the universe of {label}")

    def __repr__(self):
        return f"FiniteStructure({self.label}, size={self.size})"

    def relation_table(self, symbol: str) -> np.ndarray:
        table = self.relations.get(symbol)
        if table is None and self._relation_family is not None:
            table = self._relation_family(symbol)
            if table is not None:
                self.relations[symbol] = table
        if table is None:
            raise KeyError(f"{self.label} has no relation {symbol!r}")
        return table

    def numeral(self, n: int) -> int:
        if self.flavor != "ring":
            if n in (0, 1):
                return self.constants[str(n)]
            raise KeyError(f"numeral {n} in a Boolean structure")
        one = self.constants["1"]
        add = self.functions["+"]
        acc = self.constants["0"]
        n = n % self.characteristic if self.characteristic else n
        for _ in range(n):
            acc = int(add[acc, one])
        return acc

    def constant(self, symbol: str) -> int:
        if symbol in self.constants:
            return self.constants[symbol]
        if symbol.isdigit():
            return self.numeral(int(symbol))
        raise KeyError(f"{self.label} has no constant {symbol!r}")

    def power_table(self, k: int) -> np.ndarray:
        """Vector e -> e^k (for the ``^`` sugar)."""
        mul = self.functions["*"]
        result = np.full(self.size, self.constants["1"], dtype=mul.dtype)
        base = np.arange(self.size, dtype=mul.dtype)
        while k:
            if k & 1:
                result = mul[result, base]
            base = mul[base, base]
            k >>= 1
        return result

    def element_name(self, e: int) -> str:
        return self.names[e]


def _field_names(p: int, n: int) -> list:
    if n == 1:
        return [str(i) for i in range(p)]
    out = []
    for e in range(p**n):
        cs = gf.element_coefficients(e, p, n)
        parts = []
        for i in reversed(range(n)):
            c = cs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("g" if i == 1 else f"g^{i}")
            if not mono:
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"{c}{mono}")
        out.append("+".join(parts) if parts else "0")
    return out


@lru_cache(maxsize=64)
def finite_field(q: int, bound: int = MAX_FIELD_ORDER) -> FiniteStructure:
    """The field of order q as a ring-flavoured FiniteStructure."""
    pp = gf.prime_power(q)
    if pp is None:
        raise ValueError(f"{q} is not a prime power")
    if q > bound:
        raise BoundExceeded(f"field order {q} exceeds the bound {bound}", bound="field order")
    p, n = pp
    modulus = gf.irreducible_coefficients(p, n)
    digits = np.array([gf.element_coefficients(e, p, n) for e in range(q)], dtype=np.int64)
    weights = p ** np.arange(n, dtype=np.int64)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    negation = ((-digits) % p) @ weights
    # multiplication via discrete logarithms of a primitive element
    elems = [gf.element_coefficients(e, p, n) for e in range(q)]

    def mul_elem(a, b):
        return gf.coefficients_to_element(gf.poly_mulmod(gf._trim(list(a)), gf._trim(list(b)), modulus, p), p)

    exp = log = None
    for g in range(1, q):
        powers = [1]
        x = 1
        for _ in range(q - 2):
            x = mul_elem(elems[x], elems[g])
            if x == 1:
                break
            powers.append(x)
        if len(powers) == q - 1:
            exp = np.array(powers, dtype=np.int64)
            log = np.zeros(q, dtype=np.int64)
            log[exp] = np.arange(q - 1)
            break
    mul = np.zeros((q, q), dtype=np.int64)
    nz = np.arange(1, q)
    mul[1:, 1:] = exp[(log[nz][:, None] + log[nz][None, :]) % (q - 1)]
    dtype = np.int16 if q < 2**15 else np.int32
    s = FiniteStructure(
        label=f"F{q}",
        flavor="ring",
        size=q,
        functions={"+": add.astype(dtype), "*": mul.astype(dtype), "-": negation.astype(dtype)},
        constants={"0": 0, "1": 1},
        names=_field_names(p, n),
        characteristic=p,
    )
    s.p, s.n, s.q, s.modulus = p, n, q, modulus
    return s


def power_set_structure(n: int, label: str | None = None) -> FiniteStructure:
    """The Boolean algebra P({0..n-1}) with the A_k predicates; ids are bitmasks."""
    size = 1 << n
    full = size - 1
    ids = np.arange(size, dtype=np.int64)
    pop = np.array([bin(i).count("1") for i in range(size)], dtype=np.int64)

    def family(symbol):
        if symbol.startswith("A_"):
            return pop >= int(symbol[2:])
        return None

    return FiniteStructure(
        label=label or f"P({n})",
        flavor="boolean",
        size=size,
        functions={"meet": ids[:, None] & ids[None, :], "join": ids[:, None] | ids[None, :], "comp": full ^ ids},
        constants={"0": 0, "1": full},
        relation_family=family,
    )


# ---------------------------------------------------------------------------
# products


@dataclass(frozen=True)
class IndexSet:
    """A subset of the index labels, stored as a bitmask over label positions."""

    mask: int
    labels: tuple

    @classmethod
    def from_labels(cls, members, labels) -> "IndexSet":
        labels = tuple(labels)
        mask = 0
        for m in members:
            mask |= 1 << labels.index(m)
        return cls(mask, labels)

    def members(self) -> list:
        return [lab for i, lab in enumerate(self.labels) if self.mask >> i & 1]

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, label) -> bool:
        return label in self.labels and bool(self.mask >> self.labels.index(label) & 1)

    def complement(self) -> "IndexSet":
        return IndexSet(((1 << len(self.labels)) - 1) ^ self.mask, self.labels)

    def __and__(self, other):
        return IndexSet(self.mask & other.mask, self.labels)

    def __or__(self, other):
        return IndexSet(self.mask | other.mask, self.labels)

    def __repr__(self):
        return "{" + ", ".join(self.members()) + "}"


class ProductStructure:
    """Finite direct product of labelled structures sharing one signature."""

    def __init__(self, factors: Sequence, labels: Sequence[str] | None = None):
        factors = list(factors)
        if not factors:
            raise ValueError("a product needs at least one factor")
        if labels is None:
            labels = _default_labels([f.label for f in factors])
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValueError("index labels must be unique")
        flavors = {f.flavor for f in factors}
        if len(flavors) != 1:
            raise ValueError("mixed signatures in a product")
        self.labels = labels
        self.factors = factors
        self.flavor = factors[0].flavor
        self.sizes = tuple(f.size for f in factors)
        self.size = int(np.prod(self.sizes, dtype=object))
        self._coords = None

    def __repr__(self):
        return "×".join(self.labels)

    @property
    def coords(self) -> list:
        """coords[i][e] is the i-th coordinate of product element e."""
        if self._coords is None:
            if self.size > 50_000_000:
                raise BoundExceeded(f"product universe {self.size} too large", bound="universe")
            grids = np.unravel_index(np.arange(self.size, dtype=np.int64), self.sizes)
            self._coords = [g.astype(np.int64) for g in grids]
        return self._coords

    def factor(self, label):
        return self.factors[self.labels.index(label)]

    def element(self, coords: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(int(c) for c in coords), self.sizes))

    def coordinates(self, e: int) -> tuple:
        return tuple(int(c) for c in np.unravel_index(int(e), self.sizes))

    def element_name(self, e: int) -> str:
        cs = self.coordinates(e)
        return "(" + ",".join(f.element_name(c) for f, c in zip(self.factors, cs)) + ")"

    def constant(self, symbol: str) -> int:
        return self.element([f.constant(symbol) for f in self.factors])

    def integer_image(self, n: int) -> int:
        """The image of the integer n (n·1 computed coordinatewise)."""
        return self.element([f.numeral(n) if n >= 0 else int(f.functions["-"][f.numeral(-n)]) for f in self.factors])

    def full_index(self) -> IndexSet:
        return IndexSet((1 << len(self.labels)) - 1, self.labels)

    def index_set(self, mask: int) -> IndexSet:
        return IndexSet(mask, self.labels)

    def point(self, elements: Sequence[int]) -> "PointTuple":
        per = {lab: tuple(self.coordinates(e)[i] for e in elements) for i, lab in enumerate(self.labels)}
        return PointTuple(len(elements), per)


def _default_labels(names):
    seen: dict = {}
    out = []
    for n in names:
        seen[n] = seen.get(n, 0) + 1
    count: dict = {}
    for n in names:
        if seen[n] == 1:
            out.append(n)
        else:
            count[n] = count.get(n, 0) + 1
            out.append(f"{n}#{count[n]}")
    return out


def direct_product(factors, labels=None) -> ProductStructure:
    """Build a product from a list of structures or a label→structure mapping."""
    if isinstance(factors, Mapping):
        labels = list(factors.keys())
        factors = list(factors.values())
    return ProductStructure(factors, labels)


@dataclass(frozen=True)
class PointTuple:
    """An n-tuple of product elements viewed per index: label -> coordinates."""

    arity: int
    per_label: Mapping

    def at(self, label) -> tuple:
        return self.per_label[label]


def parse_products(spec: str, bound: int = MAX_FIELD_ORDER) -> ProductStructure:
    """Parse ``"F2xF3xF5"`` into a product of finite fields."""
    parts = [s.strip() for s in spec.replace("×", "x").split("x") if s.strip()]
    if not parts:
        raise ValueError(f"empty product spec {spec!r}")
    factors = []
    for part in parts:
        if not (part[0] in "Ff" and part[1:].isdigit()):
            raise ValueError(f"bad factor {part!r} (expected F<q>)")
        factors.append(finite_field(int(part[1:]), bound))
    return direct_product(factors)


def structure_from_json(obj) -> ProductStructure:
    """Read {"signature": "ring", "factors": [{"kind": "finite_field", "q": 4}, ...]}."""
    if obj.get("signature", "ring") != "ring":
        raise ValueError("only ring-signature structures are supported")
    factors = []
    labels = []
    for item in obj["factors"]:
        if item.get("kind") != "finite_field":
            raise ValueError(f"unsupported factor kind {item.get('kind')!r}")
        f = finite_field(int(item["q"]))
        factors.append(f)
        labels.append(item.get("label", f.label))
    return direct_product(factors, _default_labels(labels))
