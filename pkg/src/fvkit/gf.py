"""Arithmetic helpers for prime fields and their extensions.

Polynomials over F_p are plain coefficient lists, lowest degree first.
"""

from __future__ import annotations

import itertools

from .polynomial import Polynomial


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_power(q: int):
    """Return (p, n) with q = p^n, or None if q is not a prime power."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            if not is_prime(p):
                return None
            n = 0
            r = q
            while r % p == 0:
                r //= p
                n += 1
            return (p, n) if r == 1 else None
    return None


def prime_powers_upto(m: int) -> list:
    return [q for q in range(2, m + 1) if prime_power(q)]


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a: list, m: list, p: int) -> list:
    """Remainder of a modulo the monic polynomial m over F_p."""
    a = [c % p for c in a]
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return _trim(a[:dm] if len(a) > dm else a)


def poly_mulmod(a: list, b: list, m: list, p: int) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return poly_mod(out, m, p)


def _monic_polys(p: int, n: int):
    """Monic degree-n polynomials, lexicographic in (c_{n-1}, ..., c_0)."""
    for high_first in itertools.product(range(p), repeat=n):
        yield list(reversed(high_first)) + [1]


def irreducible_coefficients(p: int, n: int) -> list:
    """Lexicographically least monic irreducible of degree n over F_p.

    Candidates are ordered by the coefficient vector (c_{n-1}, ..., c_0);
    irreducibility is decided by trial division by every monic polynomial of
    degree 1..n//2.
    """
    if not is_prime(p) or n < 1:
        raise ValueError("need a prime p and a degree n >= 1")
    for cand in _monic_polys(p, n):
        reducible = False
        for d in range(1, n // 2 + 1):
            for div in _monic_polys(p, d):
                if not poly_mod(list(cand), div, p):
                    reducible = True
                    break
            if reducible:
                break
        if not reducible:
            return cand
    raise AssertionError("every degree has an irreducible polynomial")


def coefficients_to_polynomial(coeffs: list, var: str = "x") -> Polynomial:
    return Polynomial({((var, i),) if i else (): c for i, c in enumerate(coeffs) if c})


def element_coefficients(e: int, p: int, n: int) -> list:
    """Digits of an element id: id = sum c_i p^i."""
    out = []
    for _ in range(n):
        out.append(e % p)
        e //= p
    return out


def coefficients_to_element(coeffs: list, p: int) -> int:
    e = 0
    for c in reversed(coeffs):
        e = e * p + (c % p)
    return e
