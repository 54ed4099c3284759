"""Lifted affine-invariant codes: base codes given by monomial supports, lift membership,
the k-flat tester and the corrector with support inclusion as the local check."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import math

import numpy as np

from .corrector import CorrectionTrace, correct
from .flats import AffineFlat, count_flats, flat_space, sample_flat
from .gf import FieldSpec
from .poly import TruthTable, coefficients, degree_grid, has_forbidden, point_coords, reduce_exponent
from .tester import TestReport, failing_mask


def dominates(m: int, n: int, p: int) -> bool:
    """Every base-p digit of m is at least the matching digit of n."""
    if m < 0 or n < 0:
        raise ValueError("domination is defined for nonnegative integers")
    while m or n:
        if m % p < n % p:
            return False
        m //= p
        n //= p
    return True


def spread(M: tuple, e: int, i: int, j: int, p: int, q: int) -> tuple:
    """Move e from the exponent of x_i to the exponent of x_j (requires M[i] to dominate e)."""
    if e == 0:
        return tuple(M)
    if i == j:
        raise ValueError("source and target coordinates must differ")
    if not (0 < e <= M[i] and dominates(M[i], e, p)):
        raise ValueError(f"exponent {M[i]} of x_{i + 1} does not dominate {e}")
    out = list(M)
    out[i] -= e
    out[j] = reduce_exponent(out[j] + e, q)
    return tuple(out)


def _affine_generators(field: FieldSpec, t: int):
    """Maps on (q^t, t) coordinate arrays generating AGL(t, q)."""
    add, mul = field.add_table, field.mul_table
    g = field.generator
    gens = []
    for a in range(t - 1):
        def swap(P, a=a):
            P = P.copy()
            P[:, [a, a + 1]] = P[:, [a + 1, a]]
            return P
        gens.append(("transpose", swap))

    def scale(P):
        P = P.copy()
        P[:, 0] = mul[g, P[:, 0]]
        return P
    gens.append(("scale", scale))
    if t >= 2:
        def shear(P):
            P = P.copy()
            P[:, 0] = add[P[:, 0], P[:, 1]]
            return P
        gens.append(("shear", shear))

    def translate(P):
        P = P.copy()
        P[:, 0] = add[P[:, 0], 1]
        return P
    gens.append(("translate", translate))
    return gens


def _monomial_values(field: FieldSpec, M: tuple, P: np.ndarray) -> np.ndarray:
    q = field.q
    pw = np.ones((q, q), dtype=np.int64)
    for e in range(1, q):
        pw[:, e] = field.mul_table[pw[:, e - 1], np.arange(q)]
    v = np.ones(len(P), dtype=np.int64)
    for i, e in enumerate(M):
        v = field.mul_table[v, pw[P[:, i], e]]
    return v


def composed_support(field: FieldSpec, M: tuple, gen) -> frozenset:
    """Support of the reduced form of M composed with an affine map."""
    t = len(M)
    P = point_coords(field.q, t)
    coef = coefficients(field, t, _monomial_values(field, M, gen(P)))
    return frozenset(tuple(int(a) for a in e) for e in np.argwhere(coef != 0))


class NotAffineInvariant(ValueError):
    pass


@dataclass(frozen=True)
class BaseCode:
    field: FieldSpec
    t: int
    support: frozenset

    def __post_init__(self):
        q = self.field.q
        sup = frozenset(tuple(int(e) for e in M) for M in self.support)
        for M in sup:
            if len(M) != self.t or any(not 0 <= e < q for e in M):
                raise ValueError(f"monomial {M} is not a reduced monomial in {self.t} variables")
        object.__setattr__(self, "support", sup)
        for M in sorted(sup):
            for name, gen in _affine_generators(self.field, self.t):
                extra = composed_support(self.field, M, gen) - sup
                if extra:
                    raise NotAffineInvariant(
                        f"support is not affine invariant: {M} under {name} produces {sorted(extra)[0]}")

    @classmethod
    def reed_muller(cls, field: FieldSpec, t: int, d: int) -> "BaseCode":
        grid = degree_grid(field.q, t)
        return cls(field, t, frozenset(tuple(int(a) for a in e) for e in np.argwhere(grid <= d)))

    @classmethod
    def full(cls, field: FieldSpec, t: int) -> "BaseCode":
        return cls.reed_muller(field, t, t * (field.q - 1))

    @classmethod
    def trivial(cls, field: FieldSpec, t: int) -> "BaseCode":
        return cls(field, t, frozenset())

    @cached_property
    def forbidden(self) -> np.ndarray:
        """Boolean (q,)*t mask of monomials outside the support."""
        mask = np.ones((self.field.q,) * self.t, dtype=bool)
        for M in self.support:
            mask[M] = False
        return mask

    def contains(self, g) -> bool:
        """Membership by support inclusion; accepts a polynomial or a table on F_q^t."""
        if isinstance(g, TruthTable):
            coef = coefficients(self.field, self.t, g.values)
            return not bool(has_forbidden(coef, self.forbidden))
        return g.support() <= self.support

    def spreading_closed(self) -> bool:
        """Every admissible spread of a support monomial stays in the support."""
        p, q = self.field.p, self.field.q
        for M in self.support:
            for i in range(self.t):
                for j in range(self.t):
                    if i == j:
                        continue
                    for e in range(1, M[i] + 1):
                        if dominates(M[i], e, p) and spread(M, e, i, j, p, q) not in self.support:
                            return False
        return True


# --- membership and testing ---------------------------------------------------------------

def lift_membership(f: TruthTable, B: BaseCode) -> tuple[bool, AffineFlat | None]:
    """f is in Lift_n(B) iff every t-flat restriction has support inside B; else a witness flat."""
    if f.n < B.t:
        raise ValueError("the ambient dimension must be at least the base dimension")
    if f.field != B.field:
        raise ValueError("function and base code live over different fields")
    bad = failing_mask(f, B.t, B.forbidden)
    if not bad.any():
        return True, None
    return False, flat_space(f.field, f.n, B.t).flats[int(np.argmax(bad))]


def _k_flat_failures(f: TruthTable, B: BaseCode, k_points: np.ndarray, k: int) -> np.ndarray:
    """For each k-flat (rows of point indices): does some t-subflat violate B?"""
    local = flat_space(f.field, k, B.t).points
    out = np.zeros(len(k_points), dtype=bool)
    step = max(1, 2 ** 22 // max(1, local.size))
    for lo in range(0, len(k_points), step):
        vals = f.values[k_points[lo:lo + step][:, local]]
        out[lo:lo + step] = has_forbidden(coefficients(f.field, B.t, vals), B.forbidden).any(axis=1)
    return out


def reject_lifted(f: TruthTable, B: BaseCode, k: int, mode: str = "exact",
                  samples: int | None = None, seed: int | None = None) -> TestReport:
    """Rejection probability of the k-flat tester for Lift(B)."""
    if not B.t <= k <= f.n:
        raise ValueError(f"need t={B.t} <= k <= n={f.n}")
    if mode == "exact":
        pts = flat_space(f.field, f.n, k).points
        r = int(_k_flat_failures(f, B, pts, k).sum())
        total = count_flats(f.n, k, f.q)
        return TestReport("exact", -1, k, epsilon=Fraction(r, total), rejecting=r, total=total)
    if samples is None or seed is None or samples < 1:
        raise ValueError("Monte Carlo mode needs a positive sample count and a seed")
    rng = np.random.default_rng(seed)
    pts = np.stack([sample_flat(f.field, f.n, k, rng).point_indices() for _ in range(samples)])
    est = float(_k_flat_failures(f, B, pts, k).mean())
    return TestReport("monte-carlo", -1, k, estimate=est,
                      stderr=math.sqrt(est * (1 - est) / samples), samples=samples, seed=seed)


@dataclass(frozen=True)
class LiftedSoundness:
    member: bool
    epsilon: Fraction
    floor_holds: bool | None
    equality_case: bool
    repair_point: tuple | None
    repairable: bool | None

    @property
    def holds(self) -> bool:
        return self.floor_holds is not False and self.repairable is not False


def lifted_soundness_check(f: TruthTable, B: BaseCode) -> LiftedSoundness:
    """Hyperplane soundness for Lift(B) on F_q^{k+1}, including the single-point repair case."""
    k = f.n - 1
    if k < B.t:
        raise ValueError("need k >= t")
    member, _ = lift_membership(f, B)
    eps = reject_lifted(f, B, k).epsilon
    if member:
        return LiftedSoundness(True, eps, None, False, None, None)
    q = f.q
    floor = eps >= Fraction(1, q)
    if eps != Fraction(1, q):
        return LiftedSoundness(False, eps, floor, False, None, None)
    # are the failing hyperplanes exactly those through one point?
    space = flat_space(f.field, f.n, k)
    bad = _k_flat_failures(f, B, space.points, k)
    for x in range(q ** f.n):
        through = np.zeros(len(space), dtype=bool)
        through[space.through_point[x]] = True
        if np.array_equal(through, bad):
            ok = any(lift_membership(f.with_value(x, c), B)[0] for c in range(q))
            pt = tuple(int(a) for a in point_coords(q, f.n)[x])
            return LiftedSoundness(False, eps, floor, True, pt, ok)
    return LiftedSoundness(False, eps, floor, False, None, None)


@dataclass(frozen=True)
class ChainStep:
    k: int
    k_prime: int
    eps_k: Fraction
    eps_k_prime: Fraction
    q: int

    @property
    def holds(self) -> bool:
        return self.eps_k <= Fraction(self.q) ** (self.k - self.k_prime) * self.eps_k_prime


def lifted_chain_check(f: TruthTable, B: BaseCode) -> list[ChainStep]:
    """eps_k <= q^(k-k') eps_k' for all t <= k' <= k <= n."""
    eps = {k: reject_lifted(f, B, k).epsilon for k in range(B.t, f.n + 1)}
    return [ChainStep(k, kp, eps[k], eps[kp], f.q)
            for k in eps for kp in eps if kp <= k]


def correct_lifted(f: TruthTable, B: BaseCode, max_iters: int | None = None) -> CorrectionTrace:
    """The correction loop with 'restriction support inside B' as the local check."""
    if f.field != B.field:
        raise ValueError("function and base code live over different fields")
    return correct(f, None, B.t, max_iters=max_iters, forbidden=B.forbidden)
