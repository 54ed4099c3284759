"""Reduced multivariate polynomials over F_q and their truth tables.

Points of F_q^n are indexed canonically: point ``m`` has i-th coordinate
equal to the i-th base-q digit of ``m`` (coordinate 1 least significant).
Dense coefficient arrays have shape ``(q,)*n`` and are indexed
``coef[e_1, ..., e_n]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .gf import FieldSpec

NEG_INF = -math.inf  # degree of the zero polynomial


# --- points ---------------------------------------------------------------

@lru_cache(maxsize=None)
def point_coords(q: int, n: int) -> np.ndarray:
    """Array of shape (q**n, n): row m holds the coordinates of point m."""
    idx = np.arange(q ** n, dtype=np.int64)
    out = np.empty((q ** n, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = (idx // q ** i) % q
    out.setflags(write=False)
    return out


def point_index(coords, q: int) -> int:
    return sum(int(c) * q ** i for i, c in enumerate(coords))


def point_indices(coords: np.ndarray, q: int) -> np.ndarray:
    """Vectorised :func:`point_index` over the last axis."""
    n = coords.shape[-1]
    return coords @ (q ** np.arange(n, dtype=np.int64))


def point_tuple(m: int, q: int, n: int) -> tuple[int, ...]:
    return tuple((m // q ** i) % q for i in range(n))


# --- dense transforms -------------------------------------------------------

def apply_along(field: FieldSpec, M: np.ndarray, arr: np.ndarray, axis: int) -> np.ndarray:
    """``out[.., e, ..] = sum_y M[e, y] * arr[.., y, ..]`` over F_q along ``axis``."""
    arr = np.moveaxis(arr, axis, 0)
    if field.r == 1:
        out = np.tensordot(M, arr, axes=([1], [0])) % field.p
    else:
        add, mul = field.add_table, field.mul_table
        out = np.zeros((M.shape[0],) + arr.shape[1:], dtype=np.int64)
        shape = (-1,) + (1,) * (arr.ndim - 1)
        for y in range(arr.shape[0]):
            col = M[:, y]
            if col.any():
                out = add[out, mul[col.reshape(shape), arr[y][None]]]
    return np.moveaxis(out, 0, axis)


@lru_cache(maxsize=None)
def interpolation_matrix(field: FieldSpec) -> np.ndarray:
    """``L[e, y]`` = coefficient of x^e in the reduced polynomial of 1_{x=y}.

    Uses 1_{x=y} = 1 - (x - y)^(q-1) expanded binomially.
    """
    q, p = field.q, field.p
    L = np.zeros((q, q), dtype=np.int64)
    for y in range(q):
        my = field.neg(y)
        for j in range(q):
            c = comb(q - 1, j) % p
            if c == 0:
                continue
            # c is an integer < p, which is also its encoding in F_q
            term = field.mul(c, field.pow(my, q - 1 - j))
            L[j, y] = field.neg(term)
        L[0, y] = field.add(L[0, y], 1)
    L.setflags(write=False)
    return L


@lru_cache(maxsize=None)
def evaluation_matrix(field: FieldSpec) -> np.ndarray:
    """``V[y, e] = y**e`` with 0**0 = 1."""
    q = field.q
    V = np.array([[field.pow(y, e) for e in range(q)] for y in range(q)], dtype=np.int64)
    V.setflags(write=False)
    return V


@lru_cache(maxsize=None)
def degree_grid(q: int, n: int) -> np.ndarray:
    """Total degree sum(e) of every reduced monomial, shape (q,)*n."""
    if n == 0:
        return np.zeros((), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(q)] * n, indexing="ij")
    out = sum(grids)
    out.setflags(write=False)
    return out


def values_to_grid(values: np.ndarray, q: int, n: int) -> np.ndarray:
    """Reshape (..., q**n) canonical-order values to (..., q,...,q) indexed [c_1..c_n]."""
    batch = values.shape[:-1]
    arr = values.reshape(batch + (q,) * n)
    nb = len(batch)
    return arr.transpose(tuple(range(nb)) + tuple(range(nb + n - 1, nb - 1, -1)))


def grid_to_values(arr: np.ndarray, q: int, n: int) -> np.ndarray:
    nb = arr.ndim - n
    arr = arr.transpose(tuple(range(nb)) + tuple(range(nb + n - 1, nb - 1, -1)))
    return arr.reshape(arr.shape[:nb] + (q ** n,))


def coefficients(field: FieldSpec, n: int, values: np.ndarray) -> np.ndarray:
    """Batched interpolation: values (..., q**n) -> coefficient grids (..., q,...,q)."""
    q = field.q
    arr = values_to_grid(np.asarray(values, dtype=np.int64), q, n)
    L = interpolation_matrix(field)
    for ax in range(arr.ndim - n, arr.ndim):
        arr = apply_along(field, L, arr, ax)
    return arr


def evaluations(field: FieldSpec, n: int, coef: np.ndarray) -> np.ndarray:
    """Inverse of :func:`coefficients`."""
    q = field.q
    V = evaluation_matrix(field)
    arr = np.asarray(coef, dtype=np.int64)
    for ax in range(arr.ndim - n, arr.ndim):
        arr = apply_along(field, V, arr, ax)
    return grid_to_values(arr, q, n)


def has_forbidden(coef: np.ndarray, forbidden: np.ndarray) -> np.ndarray:
    """True where some nonzero coefficient sits on a forbidden monomial.

    ``coef`` is (..., q,...,q) and ``forbidden`` a boolean (q,...,q) mask.
    """
    n = forbidden.ndim
    hit = (coef != 0) & forbidden
    return hit.reshape(hit.shape[: hit.ndim - n] + (-1,)).any(axis=-1)


def degree_mask(q: int, n: int, d: int) -> np.ndarray:
    """Boolean mask of reduced monomials of total degree > d."""
    return degree_grid(q, n) > d


# --- polynomials -------------------------------------------------------------

def reduce_exponent(e: int, q: int) -> int:
    """Exponent of the reduced monomial equal to x^e as a function on F_q."""
    if e == 0:
        return 0
    return (e - 1) % (q - 1) + 1


class ReducedPoly:
    """Polynomial with every individual exponent at most q-1.

    ``terms`` maps exponent tuples to nonzero field elements.
    """

    __slots__ = ("field", "n", "terms")

    def __init__(self, field: FieldSpec, n: int, terms=None):
        self.field = field
        self.n = n
        clean = {}
        q = field.q
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != n:
                raise ValueError(f"monomial {mono} has wrong arity for n={n}")
            if any(not 0 <= e < q for e in mono):
                raise ValueError(f"monomial {mono} is not reduced for q={q}")
            c = int(c)
            field.check(c)
            if c:
                clean[mono] = c
        self.terms = clean

    @classmethod
    def zero(cls, field, n):
        return cls(field, n)

    @classmethod
    def constant(cls, field, n, c):
        return cls(field, n, {(0,) * n: c})

    @classmethod
    def variable(cls, field, n, i):
        mono = [0] * n
        mono[i] = 1
        return cls(field, n, {tuple(mono): 1})

    @classmethod
    def from_grid(cls, field, n, coef: np.ndarray):
        nz = np.argwhere(coef != 0)
        return cls(field, n, {tuple(int(e) for e in m): int(coef[tuple(m)]) for m in nz})

    def to_grid(self) -> np.ndarray:
        coef = np.zeros((self.field.q,) * self.n, dtype=np.int64)
        for mono, c in self.terms.items():
            coef[mono] = c
        return coef

    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(m) for m in self.terms)

    def support(self) -> frozenset:
        return frozenset(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, x) -> int:
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, ReducedPoly):
            return NotImplemented
        return self.field == other.field and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.field, self.n, frozenset(self.terms.items())))

    def _check(self, other):
        if self.field != other.field or self.n != other.n:
            raise ValueError("polynomials live over different rings")

    def __add__(self, other):
        self._check(other)
        F = self.field
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = F.add(out.get(m, 0), c)
        return ReducedPoly(F, self.n, out)

    def __neg__(self):
        F = self.field
        return ReducedPoly(F, self.n, {m: F.neg(c) for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: int):
        F = self.field
        return ReducedPoly(F, self.n, {m: F.mul(c, v) for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        F, q = self.field, self.field.q
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(reduce_exponent(a + b, q) for a, b in zip(m1, m2))
                out[m] = F.add(out.get(m, 0), F.mul(c1, c2))
        return ReducedPoly(F, self.n, out)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (sum(m), m)):
            c = self.terms[m]
            mono = "*".join(f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


@dataclass(eq=False)
class TruthTable:
    """Dense evaluation table of a function F_q^n -> F_q in canonical point order."""

    field: FieldSpec
    n: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64).reshape(-1)
        if self.values.shape[0] != self.field.q ** self.n:
            raise ValueError(f"truth table must have q^n = {self.field.q ** self.n} entries")
        if self.values.size and (self.values.min() < 0 or self.values.max() >= self.field.q):
            raise ValueError("truth table entries must lie in [0, q)")

    @property
    def q(self) -> int:
        return self.field.q

    def __len__(self):
        return len(self.values)

    def __getitem__(self, m):
        return int(self.values[m])

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return (self.field == other.field and self.n == other.n
                and np.array_equal(self.values, other.values))

    def with_value(self, m: int, c: int) -> "TruthTable":
        v = self.values.copy()
        v[m] = c
        return TruthTable(self.field, self.n, v)

    def at(self, x) -> int:
        return int(self.values[point_index(x, self.q)])

    def hamming(self, other: "TruthTable") -> int:
        return int(np.count_nonzero(self.values != other.values))


# --- operations ---------------------------------------------------------------

def evaluate(f: ReducedPoly, x) -> int:
    x = tuple(int(v) for v in x)
    if len(x) != f.n:
        raise ValueError(f"point of dimension {len(x)} given to a polynomial in {f.n} variables")
    F = f.field
    total = 0
    for mono, c in f.terms.items():
        term = c
        for xi, e in zip(x, mono):
            term = F.mul(term, F.pow(xi, e))
        total = F.add(total, term)
    return total


def tabulate(f: ReducedPoly) -> TruthTable:
    return TruthTable(f.field, f.n, evaluations(f.field, f.n, f.to_grid()))


def interpolate(t: TruthTable) -> ReducedPoly:
    return ReducedPoly.from_grid(t.field, t.n, coefficients(t.field, t.n, t.values))


def degree(f):
    """Total degree; accepts a polynomial or a truth table. Zero has degree -inf."""
    if isinstance(f, TruthTable):
        f = interpolate(f)
    return f.degree()


def restrict_to_flat(f, A) -> ReducedPoly:
    """Reduced polynomial g(u) = f(base + sum_j u_j b_j) in dim(A) variables."""
    if isinstance(f, ReducedPoly):
        f = tabulate(f)
    if A.n != f.n:
        raise ValueError(f"flat lives in F_q^{A.n} but f is defined on F_q^{f.n}")
    vals = f.values[A.point_indices()]
    return interpolate(TruthTable(f.field, A.t, vals))


def point_indicator(y, n: int, field: FieldSpec) -> ReducedPoly:
    """Reduced polynomial of 1_{x=y}."""
    vals = np.zeros(field.q ** n, dtype=np.int64)
    vals[point_index(y, field.q)] = 1
    return interpolate(TruthTable(field, n, vals))


def cancel_top_monomial(g: ReducedPoly, x_star) -> tuple[ReducedPoly, int]:
    """Add c * 1_{x=x_star} to g so that the top monomial prod x_i^(q-1) vanishes.

    Returns the new polynomial and the constant c.  The indicator has full
    support, so exactly one c works.
    """
    F = g.field
    top = (F.q - 1,) * g.n
    ind = point_indicator(x_star, g.n, F)
    a = g.terms.get(top, 0)
    b = ind.terms[top]
    c = F.neg(F.div(a, b))
    return g + ind.scale(c), c


def monomials_up_to(q: int, n: int, d: int) -> list[tuple[int, ...]]:
    """Reduced monomials of total degree <= d, in lexicographic order."""
    return [m for m in itertools.product(range(q), repeat=n) if sum(m) <= d]


def random_poly(field: FieldSpec, n: int, d: int, rng, exact_degree: bool = False) -> ReducedPoly:
    """Uniform element of the degree-<=d code (optionally conditioned on degree == d)."""
    monos = monomials_up_to(field.q, n, d)
    while True:
        coeffs = rng.integers(0, field.q, size=len(monos))
        f = ReducedPoly(field, n, dict(zip(monos, (int(c) for c in coeffs))))
        if not exact_degree or f.degree() == min(d, n * (field.q - 1)):
            return f
