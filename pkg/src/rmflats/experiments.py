"""Named batch experiments; each returns a list of CSV-ready rows."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .corrector import claim_checks, correct, error_set
from .flats import KINDS, expansion, random_flat_set, sharp_threshold_check, zoom_family
from .gf import GF
from .poly import TruthTable, degree, random_poly, tabulate
from .tester import compute_t, lemma_hss_check

ZOOM_PARAMS = {
    "point": lambda n: (0,) * n,
    "hyperplane": lambda n: ((1,) + (0,) * (n - 1), 0),
    "point_linear": lambda n: (1,) + (0,) * (n - 1),
    "hyperplane_linear": lambda n: (1,) + (0,) * (n - 1),
}


def random_high_degree(field, n, d, rng) -> TruthTable:
    while True:
        f = TruthTable(field, n, rng.integers(0, field.q, size=field.q ** n))
        if degree(f) > d:
            return f


def corrupt(g: TruthTable, m: int, rng) -> tuple[TruthTable, list[int]]:
    """Change g at m distinct uniform points to uniform different values."""
    q = g.q
    pts = [int(x) for x in rng.choice(q ** g.n, size=m, replace=False)]
    f = g
    for x in pts:
        f = f.with_value(x, (int(g.values[x]) + int(rng.integers(1, q))) % q)
    return f, pts


def lemma21_sweep(seed: int = 0, instances: int = 20) -> list[dict]:
    """Hyperplane soundness on F_q^3 for every d the hyperplane tester handles."""
    rng = np.random.default_rng(seed)
    rows = []
    for q in (2, 3, 4):
        F, n = GF(q), 3
        for d in range(0, n * (q - 1)):
            if compute_t(q, F.p, d) > n - 1:
                continue
            for i in range(instances):
                f = random_high_degree(F, n, d, rng)
                rep = lemma_hss_check(f, d)
                rows.append(dict(instance=f"q{q}-d{d}-{i}", q=q, n=n, d=d, k=n - 1,
                                 degree=int(rep.deg), epsilon=rep.epsilon,
                                 floor_holds=rep.floor_holds, strict_holds=rep.strict_holds))
    return rows


def correction_sweep(seed: int = 0, instances: int = 20, q: int = 2, n: int = 4, d: int = 1,
                     corruptions: int = 1) -> list[dict]:
    """Corrupt random codewords and run the corrector with the distance oracle."""
    rng = np.random.default_rng(seed)
    F = GF(q)
    rows = []
    for i in range(instances):
        g = tabulate(random_poly(F, n, d, rng))
        f, pts = corrupt(g, corruptions, rng)
        tr = correct(f, d, check_distance=True)
        S = error_set(f, d, tr.t)
        claims = claim_checks(S)
        rows.append(dict(instance=i, q=q, n=n, d=d, t=tr.t, corruptions=corruptions,
                         epsilon=tr.epsilon_initial, delta=tr.distance, steps=tr.iterations,
                         converged=tr.converged, recovered=tr.final == g,
                         bound_holds=tr.bound_holds, stay=claims.stay,
                         zoom_out=claims.zoom_out, zoom_out_linear=claims.zoom_out_linear))
    return rows


def zoom_expansion(qs=(2, 3), n: int = 4, ts=(1, 2)) -> list[dict]:
    """Exact stay probabilities of the four zoom families."""
    rows = []
    for q in qs:
        F = GF(q)
        for t in ts:
            for kind in KINDS:
                H = zoom_family(F, n, t, kind, ZOOM_PARAMS[kind](n))
                stay = expansion(H)
                rows.append(dict(instance=f"q{q}-t{t}-{kind}", q=q, n=n, t=t, kind=kind, size=len(H),
                                 stay=stay, stay_no_self_loop=expansion(H, include_self_loops=False),
                                 at_least_1_over_q=stay >= Fraction(1, q)))
    return rows


def shadow_sweep(seed: int = 0, instances: int = 100, q: int = 2, n: int = 4, t: int = 1) -> list[dict]:
    """Sharp-threshold shadow bound on random flat sets."""
    rng = np.random.default_rng(seed)
    F = GF(q)
    rows = []
    from .flats import count_flats
    total = count_flats(n, t, q)
    for i in range(instances):
        size = int(rng.integers(1, total + 1))
        rep = sharp_threshold_check(random_flat_set(F, n, t, size, rng))
        rows.append(dict(instance=i, size=size, mu=rep.mu, mu_shadow=rep.mu_shadow,
                         stay=rep.stay, rhs=rep.rhs, holds=rep.holds))
    return rows


EXPERIMENTS = {
    "lemma21-sweep": lemma21_sweep,
    "correction-sweep": correction_sweep,
    "zoom-expansion": zoom_expansion,
    "shadow-sweep": shadow_sweep,
}
