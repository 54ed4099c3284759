"""Local correction: locate the most suspicious point, repair it by plurality vote, repeat.

All routines take an optional ``forbidden`` monomial mask over t variables;
by default it is the Reed-Muller mask "total degree > d", and the lifted
module passes the complement of a base-code support instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .flats import (FlatSet, count_flats, expansion, flat_space, pr_profile, zoom_size)
from .poly import TruthTable, degree, degree_mask, point_tuple
from .tester import default_t, distance_exact, failing_mask, failing_on_points


class CorrectionStall(RuntimeError):
    """A repair step did not strictly decrease the rejection probability."""

    def __init__(self, message, step=None, trace=None):
        super().__init__(message)
        self.step = step
        self.trace = trace


@dataclass(frozen=True)
class CorrectionStep:
    point: tuple
    point_index: int
    old_value: int
    new_value: int
    mu_S_x_star: Fraction
    epsilon_before: Fraction
    epsilon_after: Fraction
    vote_tally: tuple  # ((c, passing fraction), ...) for every c in F_q

    @property
    def decrement(self) -> Fraction:
        return self.epsilon_before - self.epsilon_after


@dataclass
class CorrectionTrace:
    steps: list
    final: TruthTable
    converged: bool
    iterations: int
    t: int
    changed_points: int = 0
    epsilon_initial: Fraction = Fraction(0)
    distance: Fraction | None = None
    stall: str | None = None
    decrement_floor: Fraction = Fraction(0)
    decrement_floor_literal: Fraction = Fraction(0)

    @property
    def distance_bound(self) -> Fraction:
        """4 q^(1-t) eps_{t,d}(f) for the input f."""
        q = self.final.q
        return 4 * Fraction(q) ** (1 - self.t) * self.epsilon_initial

    @property
    def bound_holds(self) -> bool | None:
        if self.distance is None:
            return None
        return self.distance <= self.distance_bound

    def step_key(self) -> tuple:
        """Everything about the run that does not depend on how the code was specified."""
        return (tuple(self.steps), self.final.values.tobytes(), self.converged, self.iterations)


def _mask(f: TruthTable, d, t, forbidden):
    if forbidden is not None:
        return forbidden
    if d is None:
        raise ValueError("either a degree or a forbidden-monomial mask is required")
    return degree_mask(f.q, t, d)


def error_set(f: TruthTable, d: int | None, t: int | None = None, forbidden=None) -> FlatSet:
    """The t-flats on which f fails the local check."""
    t = default_t(f.field, d) if t is None else t
    space = flat_space(f.field, f.n, t)
    return space.subset(failing_mask(f, t, _mask(f, d, t, forbidden)))


def point_counts(S: FlatSet) -> np.ndarray:
    """Number of members of S through each point."""
    q, n = S.field.q, S.n
    if not S.members:
        return np.zeros(q ** n, dtype=np.int64)
    pts = np.concatenate([A.point_indices() for A in S.members])
    return np.bincount(pts, minlength=q ** n)


def find_candidate_point(S: FlatSet) -> tuple[tuple, Fraction]:
    """argmax_x mu(S_x), smallest point index on ties."""
    if not S.members:
        raise ValueError("no candidate point for an empty set")
    counts = point_counts(S)
    m = int(np.argmax(counts))
    return point_tuple(m, S.field.q, S.n), Fraction(int(counts[m]), zoom_size(S.n, S.t, S.field.q, "point"))


def _tally(f: TruthTable, m: int, t: int, forbidden) -> list[tuple[int, Fraction, int]]:
    """For each c: (c, passing fraction, failing count) among t-flats through point m after f(m) := c."""
    space = flat_space(f.field, f.n, t)
    pts = space.points[space.through_point[m]]
    total = len(pts)
    out = []
    for c in range(f.q):
        bad = int(failing_on_points(f.with_value(m, c), pts, forbidden).sum())
        out.append((c, Fraction(total - bad, total), bad))
    return out


def _winner(tally):
    return max(tally, key=lambda e: (e[1], -e[0]))


def best_value_at(f: TruthTable, x_star, d: int | None, t: int | None = None, forbidden=None):
    """Plurality value at x_star and the per-value passing fractions of through-x_star flats."""
    t = default_t(f.field, d) if t is None else t
    m = x_star if isinstance(x_star, (int, np.integer)) else _index(f, x_star)
    tally = _tally(f, int(m), t, _mask(f, d, t, forbidden))
    c, _, _ = _winner(tally)
    return c, {c_: frac for c_, frac, _ in tally}


def _index(f, x):
    m = 0
    for c in reversed(tuple(x)):
        m = m * f.q + int(c)
    return m


def correct_once(f: TruthTable, d: int | None, t: int | None = None, forbidden=None,
                 epsilon=None) -> tuple[TruthTable, CorrectionStep]:
    """One repair: change f at x_star to the plurality value; eps must strictly drop."""
    t = default_t(f.field, d) if t is None else t
    forbidden = _mask(f, d, t, forbidden)
    S = error_set(f, None, t, forbidden)
    total = count_flats(f.n, t, f.q)
    eps = Fraction(len(S), total) if epsilon is None else epsilon
    if not S.members:
        raise ValueError("f already passes every local check")
    x_star, mu_x = find_candidate_point(S)
    m = _index(f, x_star)
    tally = _tally(f, m, t, forbidden)
    c, _, bad_after = _winner(tally)
    bad_before = next(b for c_, _, b in tally if c_ == int(f.values[m]))
    eps_after = eps - Fraction(bad_before - bad_after, total)
    step = CorrectionStep(x_star, m, int(f.values[m]), c, mu_x, eps, eps_after,
                          tuple((c_, frac) for c_, frac, _ in tally))
    if not eps_after < eps:
        raise CorrectionStall(
            f"no strict decrease at x*={x_star}: eps stays {eps}, mu(S_x*)={mu_x}", step=step)
    return f.with_value(m, c), step


def correct(f: TruthTable, d: int | None, t: int | None = None, max_iters: int | None = None,
            forbidden=None, check_distance: bool = False) -> CorrectionTrace:
    """Iterate ``correct_once`` until every local check passes or the cap is hit."""
    t = default_t(f.field, d) if t is None else t
    forbidden = _mask(f, d, t, forbidden)
    q, n = f.q, f.n
    max_iters = q ** n if max_iters is None else max_iters
    total = count_flats(n, t, q)
    eps0 = Fraction(int(failing_mask(f, t, forbidden).sum()), total)
    trace = CorrectionTrace([], f, eps0 == 0, 0, t, epsilon_initial=eps0,
                            decrement_floor=Fraction(q) ** (t - n) / (4 * q),
                            decrement_floor_literal=(Fraction(q) ** (t - d) / (4 * q)) if d is not None else Fraction(0))
    g, eps = f, eps0
    while eps > 0 and trace.iterations < max_iters:
        try:
            g, step = correct_once(g, None, t, forbidden, epsilon=eps)
        except CorrectionStall as err:
            trace.stall = str(err)
            break
        trace.steps.append(step)
        trace.iterations += 1
        eps = step.epsilon_after
    trace.final = g
    trace.converged = eps == 0
    trace.changed_points = f.hamming(g)
    if trace.converged and d is not None:
        assert degree(g) <= d, "a function passing every local check must be a codeword"
    if check_distance and trace.converged and d is not None:
        trace.distance = distance_exact(f, d)
        assert trace.distance <= Fraction(trace.changed_points, q ** n)
    return trace


# --- structural claims on error sets ----------------------------------------------

@dataclass(frozen=True)
class ClaimReport:
    mu: Fraction
    stay: Fraction | None
    expansion_holds: bool | None          # 1 - Phi(S) >= 1/q
    zoom_out: Fraction | None             # max over affine hyperplanes
    zoom_out_linear: Fraction | None      # max over linear-part hyperplanes
    zoom_out_holds: bool | None           # both <= 2q mu(S)
    zoom_in_linear: Fraction | None       # reported only; its bound is asymptotic
    zoom_in: Fraction | None
    vacuous: bool = field(default=False)

    @property
    def holds(self) -> bool:
        return self.vacuous or bool(self.expansion_holds and self.zoom_out_holds)


def claim_checks(S: FlatSet) -> ClaimReport:
    """Expansion and zoom-out pseudo-randomness of an error set, exactly."""
    if not S.members:
        return ClaimReport(Fraction(0), None, None, None, None, None, None, None, vacuous=True)
    q = S.field.q
    mu = S.measure()
    stay = expansion(S)
    prof = pr_profile(S)
    zo, zol = prof["hyperplane"].value, prof["hyperplane_linear"].value
    return ClaimReport(mu, stay, stay >= Fraction(1, q), zo, zol,
                       zo <= 2 * q * mu and zol <= 2 * q * mu,
                       prof["point_linear"].value, prof["point"].value)
