"""The t-flat low-degree tester: parameters, rejection probabilities, distance."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .flats import count_flats, flat_space, sample_flat, upper_shadow
from .gf import FieldSpec, prime_power
from .poly import TruthTable, coefficients, degree, degree_mask, has_forbidden, monomials_up_to, point_coords

DISTANCE_CAP = 2 ** 24


def compute_t(q: int, p: int, d: int) -> int:
    """Smallest flat dimension whose restrictions detect degree > d: ceil((d+1)/(q - q/p))."""
    pp, _ = prime_power(q)
    if pp != p:
        raise ValueError(f"q={q} is not a power of p={p}")
    if d < 0:
        raise ValueError("degree must be nonnegative")
    # (d+1)/(q - q/p) = (d+1) p / (q (p-1))
    return -(-(d + 1) * p // (q * (p - 1)))


def default_t(f_field: FieldSpec, d: int) -> int:
    return compute_t(f_field.q, f_field.p, d)


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    mode: str
    d: int
    t: int
    epsilon: Fraction | None = None
    rejecting: int | None = None
    total: int | None = None
    estimate: float | None = None
    stderr: float | None = None
    samples: int | None = None
    seed: int | None = None

    @property
    def value(self) -> float:
        return float(self.epsilon) if self.mode == "exact" else self.estimate


# --- restriction checks ---------------------------------------------------------

def failing_mask(f: TruthTable, t: int, forbidden: np.ndarray) -> np.ndarray:
    """For every t-flat in enumeration order: does f restricted to it use a forbidden monomial?"""
    space = flat_space(f.field, f.n, t)
    return failing_on_points(f, space.points, forbidden)


def failing_on_points(f: TruthTable, points: np.ndarray, forbidden: np.ndarray) -> np.ndarray:
    t = forbidden.ndim
    out = np.zeros(len(points), dtype=bool)
    # chunk so the coefficient tensor stays small
    step = max(1, 2 ** 22 // max(1, points.shape[1]))
    for lo in range(0, len(points), step):
        vals = f.values[points[lo:lo + step]]
        out[lo:lo + step] = has_forbidden(coefficients(f.field, t, vals), forbidden)
    return out


def _check_dims(f: TruthTable, t: int):
    if not 0 <= t <= f.n:
        raise ValueError(f"flat dimension t={t} outside [0, n={f.n}]")


def reject_exact(f: TruthTable, d: int, t: int | None = None) -> TestReport:
    """epsilon_{t,d}(f) = |{T : deg(f|_T) > d}| / #t-flats, exactly."""
    t = default_t(f.field, d) if t is None else t
    _check_dims(f, t)
    bad = failing_mask(f, t, degree_mask(f.q, t, d))
    total = count_flats(f.n, t, f.q)
    r = int(bad.sum())
    return TestReport("exact", d, t, epsilon=Fraction(r, total), rejecting=r, total=total)


def reject_mc(f: TruthTable, d: int, t: int | None, samples: int, seed: int) -> TestReport:
    """Monte Carlo estimate over ``samples`` uniform t-flats."""
    if samples < 1:
        raise ValueError("samples must be positive")
    t = default_t(f.field, d) if t is None else t
    _check_dims(f, t)
    rng = np.random.default_rng(seed)
    pts = np.stack([sample_flat(f.field, f.n, t, rng).point_indices() for _ in range(samples)])
    hits = int(failing_on_points(f, pts, degree_mask(f.q, t, d)).sum())
    est = hits / samples
    return TestReport("monte-carlo", d, t, estimate=est,
                      stderr=math.sqrt(est * (1 - est) / samples), samples=samples, seed=seed)


# --- distance oracle ----------------------------------------------------------------

def _codeword_tables(field: FieldSpec, n: int, monos) -> np.ndarray:
    """Evaluations of every F_q-combination of the given monomials, shape (q^len, q^n)."""
    q = field.q
    pts = point_coords(q, n)
    pw = np.stack([_powtab(field)[pts[:, i]] for i in range(n)])
    # pw[i, x, e] = x_i^e
    cols = []
    for m in monos:
        v = np.ones(q ** n, dtype=np.int64)
        for i, e in enumerate(m):
            v = field.mul_table[v, pw[i, :, e]]
        cols.append(v)
    tables = np.zeros((1, q ** n), dtype=np.int64)
    for v in cols:
        scaled = field.mul_table[np.arange(q)[:, None], v[None, :]]  # (q, q^n)
        tables = field.add_table[tables[:, None, :], scaled[None, :, :]].reshape(-1, q ** n)
    return tables


def _powtab(field: FieldSpec) -> np.ndarray:
    q = field.q
    out = np.zeros((q, q), dtype=np.int64)
    for x in range(q):
        out[x, 0] = 1
        for e in range(1, q):
            out[x, e] = field.mul_table[out[x, e - 1], x]
    return out


def distance_exact(f: TruthTable, d: int, cap: int = DISTANCE_CAP) -> Fraction:
    """delta_d(f) by brute force over every reduced polynomial of degree <= d."""
    F, q, n = f.field, f.q, f.n
    monos = monomials_up_to(q, n, d)
    if q ** len(monos) > cap:
        raise ValueError(f"{q}^{len(monos)} codewords exceed the distance cap {cap}")
    half = len(monos) // 2
    A = _codeword_tables(F, n, monos[:half])
    B = _codeword_tables(F, n, monos[half:])
    target = f.values
    best = q ** n
    for a in A:
        diff = F.sub_table[target, a]  # codeword a + b matches f where b == f - a
        mism = (B != diff[None, :]).sum(axis=1).min()
        best = min(best, int(mism))
        if best == 0:
            break
    return Fraction(best, q ** n)


# --- lemma checkers ----------------------------------------------------------------

@dataclass(frozen=True)
class SoundnessReport:
    d: int
    k: int
    deg: float
    epsilon: Fraction
    bullet: str          # "none", "floor", or "strict"
    floor_holds: bool | None
    strict_holds: bool | None

    @property
    def holds(self) -> bool:
        return all(v is not False for v in (self.floor_holds, self.strict_holds))


def lemma_hss_check(f: TruthTable, d: int) -> SoundnessReport:
    """Hyperplane soundness on F_q^{k+1}: eps_{k,d} >= 1/q if deg > d, strictly if also deg < (k+1)(q-1)."""
    q, k = f.q, f.n - 1
    if k < compute_t(q, f.field.p, d):
        raise ValueError(f"k={k} is below the tester dimension for d={d}")
    eps = reject_exact(f, d, k).epsilon
    deg = degree(f)
    if deg <= d:
        return SoundnessReport(d, k, deg, eps, "none", None, None)
    floor = eps >= Fraction(1, q)
    if deg < (k + 1) * (q - 1):
        return SoundnessReport(d, k, deg, eps, "strict", floor, eps > Fraction(1, q))
    return SoundnessReport(d, k, deg, eps, "floor", floor, None)


@dataclass(frozen=True)
class RelateStep:
    j: int
    eps_j: Fraction
    eps_next: Fraction
    mu_shadow: Fraction
    q: int

    @property
    def holds(self) -> bool:
        return self.eps_next <= self.q * self.eps_j

    @property
    def shadow_holds(self) -> bool:
        return self.mu_shadow <= self.q * self.eps_j


@dataclass(frozen=True)
class RelateReport:
    steps: tuple

    @property
    def holds(self) -> bool:
        return all(s.holds and s.shadow_holds for s in self.steps)


def relate_check(f: TruthTable, d: int, t: int, k: int) -> RelateReport:
    """eps_{j+1,d} <= q eps_{j,d} and mu(S_j up) <= q mu(S_j) for j = t..k."""
    if not t <= k < f.n:
        raise ValueError("need t <= k < n")
    from .corrector import error_set
    steps = []
    eps = {j: reject_exact(f, d, j).epsilon for j in range(t, k + 2)}
    for j in range(t, k + 1):
        S = error_set(f, d, j)
        steps.append(RelateStep(j, eps[j], eps[j + 1], upper_shadow(S).measure(), f.q))
    return RelateReport(tuple(steps))
