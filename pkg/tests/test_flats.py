import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmflats.flats import (KINDS, EnumerationCapError, FlatSet, all_parameters, canonicalize,
                           count_flats, count_subflats, count_superflats, enumerate_flats, expansion,
                           flat_space, gaussian_binomial, pr_profile, pseudo_randomness, random_flat_set,
                           sample_flat, sharp_threshold_check, stay_counts, upper_shadow, vadd, vscale,
                           walk_step, walk_weights, zoom_family, zoom_size)
from rmflats.gf import GF
from rmflats.poly import point_coords, point_index


def brute_flat_pointsets(F, n, t):
    """All t-flats as frozensets of point indices, from every (base, t vectors) choice."""
    q = F.q
    pts = [tuple(int(a) for a in r) for r in point_coords(q, n)]
    out = set()
    for base in pts:
        for vecs in itertools.combinations(pts[1:], t):
            span = {tuple([0] * n)}
            for v in vecs:
                span = {vadd(F, s, vscale(F, c, v)) for s in span for c in range(q)}
            if len(span) != q ** t:
                continue
            out.add(frozenset(point_index(vadd(F, base, s), q) for s in span))
    return out


def test_count_examples():
    assert count_flats(2, 1, 2) == 6
    assert count_flats(2, 2, 3) == 1
    assert count_flats(3, 2, 2) == 14
    assert count_flats(3, 0, 5) == 125
    assert gaussian_binomial(4, 2, 2) == 35
    assert count_superflats(4, 1, 3) == (3 ** 3 - 1) // 2
    assert count_subflats(1, 2) == 6
    assert count_subflats(2, 2) == 14


@pytest.mark.parametrize("q,n", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)])
def test_enumeration_matches_brute_force(q, n):
    F = GF(q)
    for t in range(n + 1):
        flats = list(enumerate_flats(F, n, t))
        assert len(flats) == count_flats(n, t, q)
        sets = {frozenset(int(m) for m in A.point_indices()) for A in flats}
        assert len(sets) == len(flats)
        if q ** n <= 27 and t <= 2:
            assert sets == brute_flat_pointsets(F, n, t)


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        list(enumerate_flats(GF(2), 4, 2, cap=10))
    with pytest.raises(EnumerationCapError):
        flat_space(GF(3), 4, 2, cap=100)


@pytest.mark.parametrize("q,n,t", [(2, 3, 1), (3, 3, 2), (4, 3, 1), (5, 2, 1)])
def test_canonicalization_is_presentation_independent(q, n, t, rng):
    F = GF(q)
    for _ in range(1000 // 4):
        A = sample_flat(F, n, t, rng)
        # random base point of A and random basis of its direction space
        u = tuple(int(a) for a in rng.integers(0, q, size=t))
        base = A.parametrize(u)
        while True:
            M = rng.integers(0, q, size=(t, t))
            vecs = []
            for row in M:
                v = (0,) * n
                for c, b in zip(row, A.basis):
                    v = vadd(F, v, vscale(F, int(c), b))
                vecs.append(v)
            try:
                B = canonicalize(F, base, vecs)
            except ValueError:
                continue
            if B.t == t:
                break
        assert B == A
        assert hash(B) == hash(A)


def test_canonicalize_rejects_dependent_vectors():
    F = GF(3)
    with pytest.raises(ValueError):
        canonicalize(F, (0, 0, 0), [(1, 2, 0), (2, 1, 0)])


def test_sampler_is_uniform(rng):
    F, n, t = GF(2), 3, 1
    space = flat_space(F, n, t)
    N = 60000
    counts = np.zeros(len(space))
    for _ in range(N):
        counts[space.index[sample_flat(F, n, t, rng)]] += 1
    exp = N / len(space)
    chi2 = ((counts - exp) ** 2 / exp).sum()
    # 27 degrees of freedom; 99.99% quantile is about 61.1
    assert chi2 < 61.1


@pytest.mark.parametrize("q,n,t", [(2, 3, 1), (2, 4, 2), (3, 3, 1)])
def test_walk_kernel_is_symmetric_and_stochastic(q, n, t):
    W, D = walk_weights(GF(q), n, t)
    assert np.array_equal(W, W.T)
    assert np.all(W.sum(axis=1) == D)
    # self-loop weight: every superflat of A returns to A
    assert np.all(np.diag(W) == count_superflats(n, t, q))


def test_walk_step_matches_kernel(rng):
    F, n, t = GF(2), 3, 1
    space = flat_space(F, n, t)
    W, D = walk_weights(F, n, t)
    A = space.flats[5]
    N = 40000
    hits = np.zeros(len(space))
    for _ in range(N):
        hits[space.index[walk_step(A, rng)]] += 1
    p = W[5] / D
    assert np.all(np.abs(hits / N - p) <= 5 * np.sqrt(p * (1 - p) / N) + 1e-12)


@pytest.mark.parametrize("q,n,t", [(2, 3, 1), (2, 4, 2), (3, 3, 1)])
def test_expansion_matches_kernel(q, n, t, rng):
    F = GF(q)
    W, D = walk_weights(F, n, t)
    space = flat_space(F, n, t)
    for _ in range(5):
        S = random_flat_set(F, n, t, int(rng.integers(1, len(space) + 1)), rng)
        m = space.mask(S)
        stay = Fraction(int(W[np.ix_(m, m)].sum()), len(S) * D)
        assert expansion(S) == stay
        off = W - np.diag(np.diag(W))
        no_loop = Fraction(int(off[np.ix_(m, m)].sum()), len(S) * (D - count_superflats(n, t, q)))
        assert expansion(S, include_self_loops=False) == no_loop


@pytest.mark.parametrize("q,n,t", [(2, 4, 1), (2, 4, 2), (3, 3, 1), (3, 3, 2)])
def test_point_zoom_measure(q, n, t):
    F = GF(q)
    for x in [(0,) * n, (1,) * n]:
        H = zoom_family(F, n, t, "point", x)
        assert H.measure() == Fraction(q ** t, q ** n)
    for kind in KINDS:
        prm = all_parameters(F, n, kind)[-1]
        assert len(zoom_family(F, n, t, kind, prm)) == zoom_size(n, t, q, kind)


@pytest.mark.parametrize("q,n,t", [(2, 3, 1), (2, 4, 2), (3, 3, 1)])
def test_profile_matches_double_loop(q, n, t, rng):
    F = GF(q)
    space = flat_space(F, n, t)
    for _ in range(3):
        S = random_flat_set(F, n, t, int(rng.integers(1, len(space) // 2 + 1)), rng)
        prof = pr_profile(S)
        for kind in KINDS:
            vals = [(pseudo_randomness(S, kind, prm), i) for i, prm in enumerate(all_parameters(F, n, kind))]
            best = max(v for v, _ in vals)
            first = min(i for v, i in vals if v == best)
            assert prof[kind].value == best
            assert prof[kind].argmax == all_parameters(F, n, kind)[first]


def test_upper_shadow_oracle(rng):
    F, n, t = GF(3), 3, 1
    S = random_flat_set(F, n, t, 20, rng)
    up = upper_shadow(S)
    oracle = {B for B in flat_space(F, n, t + 1).flats if any(A.issubset(B) for A in S)}
    assert set(up.members) == oracle


@pytest.mark.parametrize("q,n,t", [(2, 4, 1), (2, 4, 2), (3, 3, 1)])
def test_sharp_threshold_on_random_sets(q, n, t, rng):
    F = GF(q)
    total = count_flats(n, t, q)
    for _ in range(15):
        rep = sharp_threshold_check(random_flat_set(F, n, t, int(rng.integers(1, total + 1)), rng))
        assert rep.holds, rep


def test_flatset_algebra():
    F = GF(2)
    E = FlatSet.everything(F, 3, 1)
    assert E.measure() == 1 and expansion(E) == 1
    H = zoom_family(F, 3, 1, "point", (0, 0, 0))
    assert (H & E) == H and (H | E) == E
    sq, size, sup = stay_counts(H)
    assert size == len(H) and sup == count_superflats(3, 1, 2)
    with pytest.raises(ValueError):
        expansion(FlatSet.of(F, 3, 1))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 3), (2, 4), (3, 3)]), st.integers(0, 2 ** 32 - 1))
def test_expansion_bounds(qn, seed):
    q, n = qn
    F = GF(q)
    rng = np.random.default_rng(seed)
    t = int(rng.integers(0, n))
    S = random_flat_set(F, n, t, int(rng.integers(1, count_flats(n, t, q) + 1)), rng)
    stay = expansion(S)
    # the up-down walk is positive semidefinite, so staying beats the measure
    assert S.measure() <= stay <= 1
    assert 0 <= expansion(S, include_self_loops=False) <= 1
