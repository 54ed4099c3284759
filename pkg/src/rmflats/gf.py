"""Arithmetic in F_q = F_{p^r}.

Elements are plain ints in ``[0, q)``; the base-p digits of an element
(least significant first) are the coefficients of its representing
polynomial modulo ``FieldSpec.modulus``.  For ``r == 1`` this is ordinary
arithmetic mod p.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

# largest q for which dense q x q operation tables are built
TABLE_LIMIT = 4096


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, r)`` with ``q == p**r``; raise if q is not a prime power."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if q % p == 0:
            r, m = 0, q
            while m % p == 0:
                m //= p
                r += 1
            if m != 1 or not is_prime(p):
                raise ValueError(f"{q} is not a prime power")
            return p, r
    raise AssertionError("unreachable")


# --- univariate polynomials over F_p, coefficient lists low-to-high ---------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _trim(list(a))
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _trim(a)
    return a


def _polymul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _is_irreducible(m: list[int], p: int) -> bool:
    """Monic m is irreducible iff it has no monic factor of degree <= deg/2."""
    r = len(m) - 1
    for deg in range(1, r // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if not _polymod(m, list(low) + [1], p):
                return False
    return True


@lru_cache(maxsize=None)
def find_modulus(p: int, r: int) -> tuple[int, ...]:
    """Lexicographically smallest (low-to-high) monic irreducible of degree r.

    For ``r == 1`` the prime field needs no modulus and ``()`` is returned.
    """
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if r < 1:
        raise ValueError("extension degree must be positive")
    if r == 1:
        return ()
    for low in itertools.product(range(p), repeat=r):
        cand = list(low) + [1]
        if _is_irreducible(cand, p):
            return tuple(cand)
    raise AssertionError(f"no irreducible polynomial of degree {r} over F_{p}")


@dataclass(frozen=True)
class FieldSpec:
    """The field F_{p^r} with a fixed defining modulus."""

    p: int
    r: int = 1
    modulus: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.r < 1:
            raise ValueError("extension degree must be positive")
        if self.p ** self.r > 2 ** 16:
            raise ValueError("fields beyond 2^16 elements are not supported")
        if self.r == 1:
            object.__setattr__(self, "modulus", ())
            return
        mod = tuple(int(c) for c in self.modulus) or find_modulus(self.p, self.r)
        if len(mod) != self.r + 1 or mod[-1] != 1:
            raise ValueError("modulus must be monic of degree r")
        if any(not 0 <= c < self.p for c in mod):
            raise ValueError("modulus coefficients must lie in [0, p)")
        if not _is_irreducible(list(mod), self.p):
            raise ValueError(f"modulus {mod} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", mod)

    @classmethod
    def of_order(cls, q: int) -> "FieldSpec":
        p, r = prime_power(q)
        return cls(p, r)

    @property
    def q(self) -> int:
        return self.p ** self.r

    def __repr__(self):
        if self.r == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.r}, modulus={list(self.modulus)})"

    def elements(self) -> range:
        return range(self.q)

    # --- encoding helpers ---------------------------------------------------

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.r):
            a, d = divmod(a, self.p)
            out.append(d)
        return out

    def _undigits(self, ds: list[int]) -> int:
        v = 0
        for d in reversed(ds):
            v = v * self.p + d
        return v

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of {self!r}")
        return a

    # --- arithmetic (direct, table-free) -------------------------------------

    def _add(self, a: int, b: int) -> int:
        if self.r == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self._undigits([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def _neg(self, a: int) -> int:
        if self.r == 1:
            return -a % self.p
        if self.p == 2:
            return a
        return self._undigits([-x % self.p for x in self._digits(a)])

    def _mul(self, a: int, b: int) -> int:
        if self.r == 1:
            return a * b % self.p
        prod = _polymul(_trim(self._digits(a)), _trim(self._digits(b)), self.p)
        red = _polymod(prod, list(self.modulus), self.p)
        return self._undigits(red + [0] * (self.r - len(red)))

    # --- tables --------------------------------------------------------------

    @cached_property
    def add_table(self) -> np.ndarray:
        q = self.q
        if q > TABLE_LIMIT:
            raise ValueError("field too large for dense tables")
        if self.r == 1:
            i = np.arange(q)
            return (i[:, None] + i[None, :]) % q
        if self.p == 2:
            i = np.arange(q)
            return i[:, None] ^ i[None, :]
        return np.array([[self._add(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)

    @cached_property
    def mul_table(self) -> np.ndarray:
        q = self.q
        if q > TABLE_LIMIT:
            raise ValueError("field too large for dense tables")
        if self.r == 1:
            i = np.arange(q)
            return (i[:, None] * i[None, :]) % q
        return np.array([[self._mul(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self._neg(a) for a in range(self.q)], dtype=np.int64)

    @cached_property
    def inv_table(self) -> np.ndarray:
        """``inv_table[0]`` is 0 as a placeholder; use :meth:`inv` for checked inversion."""
        mt = self.mul_table
        inv = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            inv[a] = int(np.nonzero(mt[a] == 1)[0][0])
        return inv

    @cached_property
    def sub_table(self) -> np.ndarray:
        return self.add_table[:, self.neg_table]

    @property
    def has_tables(self) -> bool:
        return self.q <= TABLE_LIMIT

    # --- public scalar operations ------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self._add(a, b)

    def neg(self, a: int) -> int:
        return self._neg(a)

    def sub(self, a: int, b: int) -> int:
        return self._add(a, self._neg(b))

    def mul(self, a: int, b: int) -> int:
        return self._mul(a, b)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            raise ValueError("negative exponents are not supported; use inv")
        result, base = 1, a
        while e:
            if e & 1:
                result = self._mul(result, base)
            base = self._mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self._mul(a, self.inv(b))

    @cached_property
    def generator(self) -> int:
        """Smallest element generating the multiplicative group."""
        order = self.q - 1
        factors = [f for f in range(2, order + 1) if order % f == 0 and is_prime(f)]
        for g in range(1, self.q):
            if all(self.pow(g, order // f) != 1 for f in factors):
                return g
        raise AssertionError("multiplicative group is cyclic")

    # --- trace and characters ----------------------------------------------

    def trace(self, a: int) -> int:
        """Absolute trace sum_{i<r} a^(p^i); lands in the prime subfield {0..p-1}."""
        total, x = 0, a
        for _ in range(self.r):
            total = self._add(total, x)
            x = self.pow(x, self.p)
        assert total < self.p
        return total

    @cached_property
    def trace_table(self) -> np.ndarray:
        return np.array([self.trace(a) for a in range(self.q)], dtype=np.int64)

    def character(self, a: int, x: int) -> complex:
        """chi_a(x) = exp(2 pi i Tr(a x) / p)."""
        return cmath.exp(2j * math.pi * self.trace(self._mul(a, x)) / self.p)

    @cached_property
    def character_matrix(self) -> np.ndarray:
        """``C[a, x] = chi_a(x)``; symmetric since Tr(ax) = Tr(xa)."""
        tr = self.trace_table[self.mul_table]
        return np.exp(2j * np.pi * tr / self.p)


def GF(q: int, modulus=None) -> FieldSpec:
    p, r = prime_power(q)
    return FieldSpec(p, r, tuple(modulus) if modulus else ())
