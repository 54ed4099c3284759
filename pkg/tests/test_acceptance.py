"""Acceptance criteria, each checked at its stated scale and tolerance.

Every test carries a ``criterion`` marker; the conftest hook prints one
PASS/FAIL line per criterion in the terminal summary.
"""
from fractions import Fraction

import numpy as np
import pytest

from rmflats.corrector import claim_checks, correct, error_set
from rmflats.experiments import corrupt
from rmflats.flats import (KINDS, all_parameters, count_flats, expansion, random_flat_set,
                           sharp_threshold_check, zoom_family)
from rmflats.gf import GF
from rmflats.lifted import BaseCode, correct_lifted, lift_membership, reject_lifted
from rmflats.poly import TruthTable, degree, interpolate, random_poly, tabulate
from rmflats.spectral import CayleyIndex, cayley_stay, eigen_residual, lift_set, verify_appendix
from rmflats.tester import compute_t, lemma_hss_check, reject_exact, reject_mc, relate_check

SEED = 20240601


def detail(request, text):
    request.node.user_properties.append(("detail", text))


def random_above(F, n, d, rng):
    while True:
        f = TruthTable(F, n, rng.integers(0, F.q, size=F.q ** n))
        if degree(f) > d:
            return f


@pytest.mark.criterion(1, "hyperplane soundness floor eps >= 1/q")
def test_criterion_01_soundness_floor(request):
    rng = np.random.default_rng(SEED)
    checked = failures = 0
    for q, n in [(2, 3), (3, 3), (4, 3), (2, 4)]:
        F = GF(q)
        ds = [d for d in range(n * (q - 1)) if compute_t(q, F.p, d) <= n - 1]
        for i in range(100):
            d = ds[i % len(ds)]
            rep = lemma_hss_check(random_above(F, n, d, rng), d)
            checked += 1
            failures += rep.floor_holds is False
    F2 = GF(2)
    for bits in range(256):
        f = TruthTable(F2, 3, np.array([(bits >> i) & 1 for i in range(8)]))
        for d in range(3):
            if compute_t(2, 2, d) <= 2 and degree(f) > d:
                checked += 1
                failures += lemma_hss_check(f, d).floor_holds is False
    detail(request, f"{checked} instances, {failures} exceptions")
    assert failures == 0


@pytest.mark.criterion(2, "strict soundness eps > 1/q on F_3^3")
def test_criterion_02_strict_soundness(request):
    rng = np.random.default_rng(SEED + 2)
    F, n, q = GF(3), 3, 3
    failures = 0
    for i in range(100):
        d = i % 4                              # compute_t(3, 3, d) <= 2 exactly for d <= 3
        D = int(rng.integers(d + 1, n * (q - 1)))
        f = tabulate(random_poly(F, n, D, rng, exact_degree=True))
        rep = lemma_hss_check(f, d)
        assert rep.bullet == "strict"
        failures += not rep.strict_holds
    detail(request, f"100 instances, {failures} exceptions")
    assert failures == 0


@pytest.mark.criterion(3, "shadow growth mu(S up) <= q mu(S) and eps_{k+1} <= q eps_k")
def test_criterion_03_shadow_growth(request):
    rng = np.random.default_rng(SEED + 3)
    F = GF(2)
    failures = 0
    for _ in range(50):
        f = random_above(F, 4, 1, rng)
        failures += not relate_check(f, 1, 2, 3).holds
    detail(request, f"50 instances, {failures} exceptions")
    assert failures == 0


@pytest.mark.criterion(4, "sharp-threshold bound on AffGras(F_2^4, 1) and zoom families")
def test_criterion_04_sharp_threshold(request):
    rng = np.random.default_rng(SEED + 4)
    F, n, t = GF(2), 4, 1
    total = count_flats(n, t, 2)
    failures = checked = 0
    for _ in range(100):
        rep = sharp_threshold_check(random_flat_set(F, n, t, int(rng.integers(1, total + 1)), rng))
        failures += not rep.holds
        checked += 1
    for kind in KINDS:
        for prm in all_parameters(F, n, kind):
            H = zoom_family(F, n, t, kind, prm)
            if H.members:
                failures += not sharp_threshold_check(H).holds
                checked += 1
    detail(request, f"{checked} sets, {failures} exceptions")
    assert failures == 0


@pytest.mark.criterion(5, "Cayley characters are eigenfunctions with eigenvalue q^-dim span")
def test_criterion_05_eigenvalues(request):
    res = [eigen_residual(CayleyIndex(GF(q), k, ell)) for q, k, ell in [(2, 3, 1), (3, 2, 1)]]
    detail(request, "max residuals " + ", ".join(f"{r:.1e}" for r in res))
    assert max(res) <= 1e-9


@pytest.mark.criterion(6, "appendix identities at q=2, k=4, l=1 and exact expansion transfer")
def test_criterion_06_appendix_identities(request):
    rng = np.random.default_rng(SEED + 6)
    F, n = GF(2), 4
    sets = []
    for _ in range(4):
        g = tabulate(random_poly(F, n, 0, rng))
        f, _ = corrupt(g, int(rng.integers(1, 4)), rng)
        sets.append(error_set(f, 0, 1))
    for kind in KINDS:
        sets.append(zoom_family(F, n, 1, kind, all_parameters(F, n, kind)[3]))
    names = ["parseval", "level_reconstruction", "f1_reconstruction", "f1_lin_fourier_link",
             "f1_aff_fourier_link", "claim_expansion_transfer"]
    worst = 0.0
    for S in sets:
        rep = verify_appendix(S, 1)
        for name in names:
            c = rep.by_name(name)
            assert c.verdict == "holds", (name, c)
            if name != "claim_expansion_transfer":
                worst = max(worst, c.lhs)
        # the transfer inequality compared again in exact arithmetic
        assert cayley_stay(lift_set(S)) >= expansion(S) - Fraction(1, 2)
    detail(request, f"{len(sets)} sets, max identity residual {worst:.1e}")


@pytest.mark.criterion(7, "zoom expansion 1 - Phi(H) >= 1/q for all four zoom families")
def test_criterion_07_zoom_expansion(request):
    bad = []
    for q in (2, 3):
        F = GF(q)
        for t in (1, 2):
            for kind in KINDS:
                prm = all_parameters(F, 4, kind)[0]
                stay = expansion(zoom_family(F, 4, t, kind, prm))
                if stay < Fraction(1, q):
                    bad.append(f"q={q} t={t} {kind}: {stay}")
    detail(request, "below 1/q: " + ", ".join(bad) if bad else "all 16 families at least 1/q")
    assert not bad


def _correction_instances():
    return [(GF(2), 4, 1), (GF(3), 3, 1), (GF(3), 3, 2)]


@pytest.fixture(scope="module")
def correction_runs():
    """All criterion-8 runs: (f, original, trace), shared with criterion 9."""
    rng = np.random.default_rng(SEED + 8)
    single, multi = [], []
    for F, n, d in _correction_instances():
        q = F.q
        for _ in range(50):
            g = tabulate(random_poly(F, n, d, rng))
            for m in range(q ** n):
                for delta in range(1, q):
                    f = g.with_value(m, (int(g.values[m]) + delta) % q)
                    single.append((F, n, d, f, g, correct(f, d)))
        for mcount in (2, 3):
            for _ in range(100):
                g = tabulate(random_poly(F, n, d, rng))
                f, _ = corrupt(g, mcount, rng)
                multi.append((F, n, d, mcount, f, g, correct(f, d, check_distance=True)))
    return single, multi


@pytest.mark.criterion(8, "end-to-end correction of corrupted codewords")
def test_criterion_08_correction(request, correction_runs):
    single, multi = correction_runs
    single_bad = sum(1 for *_, f, g, tr in single if not (tr.converged and tr.final == g and tr.iterations <= 3))
    rates, bound_bad = [], 0
    for (F, n, d) in _correction_instances():
        for mcount in (2, 3):
            runs = [r for r in multi if r[0] == F and r[1] == n and r[2] == d and r[3] == mcount]
            exact = sum(1 for *_, g, tr in runs if tr.converged and tr.final == g)
            rates.append((f"q{F.q}n{n}d{d}m{mcount}", exact / len(runs)))
            bound_bad += sum(1 for *_, tr in runs if tr.converged and not tr.bound_holds)
    detail(request, f"{len(single)} single corruptions, {single_bad} misses; multi exact rates "
                    + ", ".join(f"{k}={v:.2f}" for k, v in rates) + f"; bound failures {bound_bad}")
    assert single_bad == 0
    assert all(v >= 0.95 for _, v in rates)
    assert bound_bad == 0


@pytest.mark.criterion(9, "error-set expansion and zoom-out profile")
def test_criterion_09_error_set_structure(request, correction_runs):
    single, multi = correction_runs
    seen, failures = set(), []
    for F, n, d, f, *rest in [r[:4] + r[4:] for r in single] + [r[:3] + r[4:] for r in multi]:
        tr = rest[-1]
        g = f
        for step in [None] + list(tr.steps):
            if step is not None:
                g = g.with_value(step.point_index, step.new_value)
            key = (F.q, n, d, g.values.tobytes())
            if key in seen:
                continue
            seen.add(key)
            S = error_set(g, d, tr.t)
            if not S.members:
                continue
            rep = claim_checks(S)
            if not (rep.expansion_holds and rep.zoom_out_holds):
                failures.append((F.q, n, d, rep))
    detail(request, f"{len(seen)} distinct functions, {len(failures)} violations")
    assert not failures, failures[:3]


@pytest.mark.criterion(10, "lifted RM base code coincides with the RM tester and corrector")
def test_criterion_10_lifted_coherence(request):
    F = GF(2)
    B = BaseCode.reed_muller(F, 2, 1)
    mismatches = 0
    for bits in range(256):
        f = TruthTable(F, 3, np.array([(bits >> i) & 1 for i in range(8)]))
        mismatches += lift_membership(f, B)[0] != (degree(f) <= 1)
        for k in (2, 3):
            mismatches += reject_lifted(f, B, k).epsilon != reject_exact(f, 1, k).epsilon
        mismatches += correct_lifted(f, B).step_key() != correct(f, 1, 2).step_key()
    detail(request, f"256 functions, {mismatches} mismatches")
    assert mismatches == 0


@pytest.mark.criterion(11, "oracle cross-checks")
def test_criterion_11_oracles(request):
    rng = np.random.default_rng(SEED + 11)
    for q, n, d in [(2, 4, 1), (3, 3, 2), (4, 2, 1)]:
        F = GF(q)
        for _ in range(5):
            f = TruthTable(F, n, rng.integers(0, q, size=q ** n))
            t = compute_t(q, F.p, d)
            assert error_set(f, d, t).measure() == reject_exact(f, d, t).epsilon
    worst = 0.0
    for i in range(20):
        q, n, d = [(2, 4, 1), (3, 3, 2)][i % 2]
        F = GF(q)
        f = TruthTable(F, n, rng.integers(0, q, size=q ** n))
        exact = float(reject_exact(f, d).epsilon)
        mc = reject_mc(f, d, None, 2000, seed=i)
        z = abs(mc.estimate - exact) / max(mc.stderr, 1e-12)
        worst = max(worst, z if mc.stderr > 0 else abs(mc.estimate - exact) * 1e12)
    for i in range(1000):
        q = (2, 3, 4)[i % 3]
        F = GF(q)
        n = int(rng.integers(1, 4))
        p = random_poly(F, n, int(rng.integers(0, n * (q - 1) + 1)), rng)
        assert interpolate(tabulate(p)) == p
    detail(request, f"worst Monte Carlo deviation {worst:.2f} sigma")
    assert worst <= 5
