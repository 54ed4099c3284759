"""Cayley-graph surrogate for the affine Grassmann walk and its Fourier analysis.

Vertices are tuples (s, x_1, ..., x_l) of points of F_q^k.  A vertex is an
integer whose base-q digits, least significant first, are the coordinates of
s, then x_1, and so on; each block uses the canonical point encoding.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .flats import FlatSet, expansion, projective_points, rank, _ops
from .gf import FieldSpec
from .poly import point_coords, point_indices

VERTEX_CAP = 2 ** 20
TOL = 1e-9


@dataclass(frozen=True)
class CayleyIndex:
    field: FieldSpec
    k: int
    ell: int

    def __post_init__(self):
        if self.k < 1 or self.ell < 0:
            raise ValueError("need k >= 1 and l >= 0")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def dims(self) -> int:
        return self.k * (self.ell + 1)

    @property
    def size(self) -> int:
        return self.q ** self.dims

    def check_cap(self, cap: int = VERTEX_CAP):
        if self.size > cap:
            raise ValueError(f"{self.size} Cayley vertices exceed the cap {cap}")

    @cached_property
    def coords(self) -> np.ndarray:
        """(size, k(l+1)) digit array; block j holds coordinates of s (j=0) or x_j."""
        return point_coords(self.q, self.dims)

    def block(self, j: int) -> np.ndarray:
        return self.coords[:, j * self.k:(j + 1) * self.k]

    def block_index(self, j: int) -> np.ndarray:
        """Canonical index in F_q^k of block j for every vertex."""
        return point_indices(self.block(j), self.q)

    def encode(self, s, xs) -> int:
        v = 0
        for blk in reversed([tuple(s)] + [tuple(x) for x in xs]):
            for c in reversed(blk):
                v = v * self.q + int(c)
        return v

    def decode(self, v: int) -> tuple[tuple, ...]:
        row = self.coords[v]
        return tuple(tuple(int(a) for a in row[j * self.k:(j + 1) * self.k]) for j in range(self.ell + 1))

    @cached_property
    def span_dims(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per index alpha: dim span(alpha_0..alpha_l), dim span(alpha_1..alpha_l), alpha_0 in that span."""
        F = self.field
        full = np.empty(self.size, dtype=np.int64)
        lin = np.empty(self.size, dtype=np.int64)
        inside = np.empty(self.size, dtype=bool)
        for v in range(self.size):
            blocks = self.decode(v)
            r_lin = rank(F, blocks[1:]) if self.ell else 0
            r_all = rank(F, blocks)
            full[v], lin[v], inside[v] = r_all, r_lin, r_all == r_lin
        return full, lin, inside


@dataclass
class SpectralFn:
    index: CayleyIndex
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.index.size,):
            raise ValueError("values must have one entry per Cayley vertex")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    def mean(self) -> complex:
        return self.values.mean()

    def inner(self, other: "SpectralFn") -> complex:
        """E[F conj(G)] under the uniform measure."""
        return np.mean(self.values * np.conj(other.values))

    def norm2(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def norm4_4(self) -> float:
        return float(np.mean(np.abs(self.values) ** 4))

    def __add__(self, other):
        return SpectralFn(self.index, self.values + other.values)

    def __sub__(self, other):
        return SpectralFn(self.index, self.values - other.values)

    def scale(self, c):
        return SpectralFn(self.index, c * self.values)


# --- the lifted set S* ---------------------------------------------------------------

@lru_cache(maxsize=None)
def general_linear(field: FieldSpec, ell: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All invertible l x l matrices over F_q as row tuples."""
    q = field.q
    mats = []
    for entries in itertools.product(range(q), repeat=ell * ell):
        rows = tuple(tuple(entries[i * ell:(i + 1) * ell]) for i in range(ell))
        if rank(field, rows) == ell:
            mats.append(rows)
    return tuple(mats)


def presentations(A, ell: int) -> list[tuple[tuple, tuple]]:
    """Every (s, (x_1..x_l)) with s in A and x an ordered basis of A's direction."""
    F = A.field
    add, mul, _, _ = _ops(F)
    out = []
    bases = []
    for G in general_linear(F, ell):
        xs = []
        for row in G:
            v = (0,) * A.n
            for c, b in zip(row, A.basis):
                v = tuple(add[a][mul[c][bb]] for a, bb in zip(v, b))
            xs.append(v)
        bases.append(tuple(xs))
    for s in A.points():
        for xs in bases:
            out.append((s, xs))
    return out


def lift_set(S: FlatSet, ell: int | None = None) -> SpectralFn:
    """Indicator of S*: tuples whose s + span(x) is a member of S (degenerate tuples excluded)."""
    ell = S.t if ell is None else ell
    if ell != S.t:
        raise ValueError(f"members have dimension {S.t}, not {ell}")
    idx = CayleyIndex(S.field, S.n, ell)
    idx.check_cap()
    vals = np.zeros(idx.size)
    for A in S.members:
        for s, xs in presentations(A, ell):
            vals[idx.encode(s, xs)] = 1.0
    return SpectralFn(idx, vals)


def lifted_members(F: SpectralFn) -> np.ndarray:
    return np.flatnonzero(np.abs(F.values) > 0.5)


# --- the walk -------------------------------------------------------------------------

def _moves(index: CayleyIndex):
    """Every (y, b) displacement as a digit vector of length k(l+1)."""
    F, q, k = index.field, index.q, index.k
    ys = point_coords(q, k)
    bs = point_coords(q, index.ell + 1)
    for b in bs:
        for y in ys:
            yield np.concatenate([F.mul_table[int(bj), y] for bj in b])


def _shift(index: CayleyIndex, move: np.ndarray) -> np.ndarray:
    F = index.field
    return point_indices(F.add_table[index.coords, move[None, :]], index.q)


@lru_cache(maxsize=8)
def _shift_table(index: CayleyIndex) -> np.ndarray:
    """(moves, size) array: row i sends every vertex to its image under move i."""
    return np.stack([_shift(index, mv) for mv in _moves(index)])


def walk_apply(Fn: SpectralFn) -> SpectralFn:
    """(HF)(v): exact average of F over all q^(k+l+1) moves from v."""
    return SpectralFn(Fn.index, Fn.values[_shift_table(Fn.index)].mean(axis=0))


def walk_counts(index: CayleyIndex) -> tuple[np.ndarray, int]:
    """Integer matrix of move counts between vertices and the number of moves per vertex."""
    W = np.zeros((index.size, index.size), dtype=np.int64)
    rows = np.arange(index.size)
    count = 0
    for mv in _moves(index):
        np.add.at(W, (rows, _shift(index, mv)), 1)
        count += 1
    return W, count


def walk_matrix(index: CayleyIndex) -> np.ndarray:
    W, c = walk_counts(index)
    return W / c


def cayley_stay(F: SpectralFn) -> Fraction:
    """1 - Phi(S*) exactly, by counting moves that stay inside the set."""
    index = F.index
    inS = np.abs(F.values) > 0.5
    if not inS.any():
        raise ValueError("expansion of the empty set is undefined")
    members = np.flatnonzero(inS)
    stay = moves = 0
    for mv in _moves(index):
        stay += int(inS[_shift(index, mv)[members]].sum())
        moves += 1
    return Fraction(stay, len(members) * moves)


# --- Fourier analysis -------------------------------------------------------------------

def _transform(field: FieldSpec, dims: int, values: np.ndarray, M: np.ndarray) -> np.ndarray:
    q = field.q
    arr = np.asarray(values, dtype=complex).reshape((q,) * dims)
    # the same matrix acts on every axis, so axis order is irrelevant
    for ax in range(dims):
        arr = np.moveaxis(np.tensordot(M, arr, axes=([1], [ax])), 0, ax)
    return arr.reshape(-1)


def fourier_vector(field: FieldSpec, dims: int, values: np.ndarray) -> np.ndarray:
    """hat f(alpha) = E_x f(x) conj(chi_alpha(x)) on F_q^dims."""
    C = field.character_matrix
    return _transform(field, dims, values, np.conj(C) / field.q)


def inverse_fourier_vector(field: FieldSpec, dims: int, coeffs: np.ndarray) -> np.ndarray:
    return _transform(field, dims, coeffs, field.character_matrix)


def fourier(Fn: SpectralFn) -> np.ndarray:
    return fourier_vector(Fn.index.field, Fn.index.dims, Fn.values)


def inverse_fourier(index: CayleyIndex, coeffs: np.ndarray) -> SpectralFn:
    return SpectralFn(index, inverse_fourier_vector(index.field, index.dims, coeffs))


def character(index: CayleyIndex, alpha: int) -> SpectralFn:
    F = index.field
    a = index.coords[alpha]
    tr = F.trace_table[F.mul_table[index.coords, a[None, :]]].sum(axis=1) % F.p
    return SpectralFn(index, np.exp(2j * np.pi * tr / F.p))


def eigen_residual(index: CayleyIndex, alphas=None) -> float:
    """max over alpha of || H chi_alpha - q^(-dim span alpha) chi_alpha ||_inf (all alpha by default)."""
    full, _, _ = index.span_dims
    alphas = range(index.size) if alphas is None else alphas
    worst = 0.0
    for alpha in alphas:
        chi = character(index, int(alpha))
        lam = float(index.q) ** (-int(full[alpha]))
        worst = max(worst, float(np.max(np.abs(walk_apply(chi).values - lam * chi.values))))
    return worst


@dataclass
class LevelDecomposition:
    lin: list          # F_{lin,i}, i = 0..l
    aff: list          # F_{aff,i}, i = 0..l
    index: CayleyIndex

    def level(self, i: int) -> SpectralFn:
        """F_i = F_{lin,i} + F_{aff,i-1}."""
        out = self.lin[i]
        return out + self.aff[i - 1] if i >= 1 else out

    def components(self) -> list:
        return [c for c in self.lin + self.aff]

    def total(self) -> SpectralFn:
        acc = np.zeros(self.index.size, dtype=complex)
        for c in self.components():
            acc += c.values
        return SpectralFn(self.index, acc)

    def walk_image(self) -> SpectralFn:
        """sum_i q^(-i) F_i + q^(-l-1) F_{aff,l}."""
        q, ell = self.index.q, self.index.ell
        acc = np.zeros(self.index.size, dtype=complex)
        for i in range(ell + 1):
            acc += q ** (-i) * self.level(i).values
        acc += q ** (-ell - 1) * self.aff[ell].values
        return SpectralFn(self.index, acc)


def level_decompose(Fn: SpectralFn) -> LevelDecomposition:
    index = Fn.index
    coeffs = fourier(Fn)
    _, lin_dim, inside = index.span_dims
    lin, aff = [], []
    for i in range(index.ell + 1):
        for inside_flag, out in ((True, lin), (False, aff)):
            mask = (lin_dim == i) & (inside == inside_flag)
            out.append(inverse_fourier(index, np.where(mask, coeffs, 0)))
    return LevelDecomposition(lin, aff, index)


# --- f_1 ----------------------------------------------------------------------------------

def f1_components(Fn: SpectralFn) -> tuple[np.ndarray, np.ndarray]:
    """(f_lin, f_aff) on F_q^k: conditional mean of F given x_1 = z (resp. s = z), minus mu(S*)."""
    index = Fn.index
    if index.ell < 1:
        raise ValueError("f_1 needs l >= 1")
    qk = index.q ** index.k
    mu = Fn.values.real.mean()
    vals = Fn.values.real
    x1 = index.block_index(1)
    s = index.block_index(0)
    per = index.size // qk
    f_lin = np.bincount(x1, weights=vals, minlength=qk) / per - mu
    f_aff = np.bincount(s, weights=vals, minlength=qk) / per - mu
    return f_lin, f_aff


def f1_reconstruction(index: CayleyIndex, f_lin: np.ndarray, f_aff: np.ndarray) -> SpectralFn:
    """sum_{M in B} f_lin(<M,x>) + sum_{M in F_q^l} f_aff(s + <M,x>)."""
    F, q, ell = index.field, index.q, index.ell
    xs = [index.block(j) for j in range(1, ell + 1)]
    s = index.block(0)

    def combo(M, start):
        acc = start.copy()
        for c, x in zip(M, xs):
            acc = F.add_table[acc, F.mul_table[int(c), x]]
        return point_indices(acc, q)

    zero = np.zeros_like(s)
    out = np.zeros(index.size)
    for M in projective_points(F, ell):
        out += f_lin[combo(M, zero)]
    for M in point_coords(q, ell):
        out += f_aff[combo(M, s)]
    return SpectralFn(index, out)


def f1_fourier_links(Fn: SpectralFn) -> dict[str, float]:
    """Max deviations between hat f_lin, hat f_aff and the matching coefficients of F (alpha != 0)."""
    index = Fn.index
    F, q, k, ell = index.field, index.q, index.k, index.ell
    coeffs = fourier(Fn)
    f_lin, f_aff = f1_components(Fn)
    hl = fourier_vector(F, k, f_lin)
    ha = fourier_vector(F, k, f_aff)
    pts = point_coords(q, k)
    lin_dev = lin_scaled_dev = aff_dev = 0.0
    for a in range(1, q ** k):
        alpha = pts[a]
        lin_idx = index.encode((0,) * k, [alpha] * ell)
        aff_idx = index.encode(alpha, [(0,) * k] * ell)
        lin_dev = max(lin_dev, abs(hl[a] - coeffs[lin_idx]))
        lin_scaled_dev = max(lin_scaled_dev, abs(hl[a] - coeffs[lin_idx] / (q - 1)))
        aff_dev = max(aff_dev, abs(ha[a] - coeffs[aff_idx]))
    return {"lin": lin_dev, "lin_scaled": lin_scaled_dev, "aff": aff_dev}


# --- zoom profiles in the Cayley graph ------------------------------------------------------

def _span_points(index: CayleyIndex, with_base: bool) -> np.ndarray:
    """(size, q^l) indices of s + sum c_i x_i (or sum c_i x_i) over all c in F_q^l."""
    F, q, ell = index.field, index.q, index.ell
    xs = [index.block(j) for j in range(1, ell + 1)]
    start = index.block(0) if with_base else np.zeros_like(index.block(0))
    cols = []
    for c in point_coords(q, ell):
        acc = start.copy()
        for cj, x in zip(c, xs):
            acc = F.add_table[acc, F.mul_table[int(cj), x]]
        cols.append(point_indices(acc, q))
    return np.stack(cols, axis=1)


def _occupancy(pts: np.ndarray, npts: int) -> np.ndarray:
    occ = np.zeros((pts.shape[0], npts), dtype=bool)
    occ[np.arange(pts.shape[0])[:, None], pts] = True
    return occ


def _fdot(F: FieldSpec, X: np.ndarray, h) -> np.ndarray:
    acc = np.zeros(X.shape[0], dtype=np.int64)
    for j, hj in enumerate(h):
        acc = F.add_table[acc, F.mul_table[int(hj), X[:, j]]]
    return acc


def pr_profile_cayley(Fn: SpectralFn) -> dict[str, Fraction]:
    """Max conditional measure of S* over each of the four zoom kinds, exact."""
    index = Fn.index
    F, q, k, ell = index.field, index.q, index.k, index.ell
    inS = np.abs(Fn.values) > 0.5
    out = {}
    occ = _occupancy(_span_points(index, True), q ** k)
    num, den = occ[inS].sum(axis=0), occ.sum(axis=0)
    out["point"] = max(Fraction(int(a), int(b)) for a, b in zip(num, den) if b)
    occ = _occupancy(_span_points(index, False), q ** k)[:, 1:]
    num, den = occ[inS].sum(axis=0), occ.sum(axis=0)
    out["point_linear"] = max(Fraction(int(a), int(b)) for a, b in zip(num, den) if b)
    s = index.block(0)
    xs = [index.block(j) for j in range(1, ell + 1)]
    best_h = best_hl = Fraction(0)
    for h in projective_points(F, k):
        lin_ok = np.ones(index.size, dtype=bool)
        for x in xs:
            lin_ok &= _fdot(F, x, h) == 0
        best_hl = max(best_hl, Fraction(int((lin_ok & inS).sum()), int(lin_ok.sum())))
        hs = _fdot(F, s, h)
        for c in range(q):
            m = lin_ok & (hs == c)
            best_h = max(best_h, Fraction(int((m & inS).sum()), int(m.sum())))
    out["hyperplane"] = best_h
    out["hyperplane_linear"] = best_hl
    return out


# --- the appendix report ---------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    lhs: object
    rhs: object
    verdict: str   # holds | vacuous | violated | n/a


def _ineq(name, anchor, lhs, rhs, tol=1e-7, vacuous_if_nonpositive=True) -> Check:
    """lhs >= rhs; a non-positive right side makes a lower bound vacuous."""
    if vacuous_if_nonpositive and rhs <= 0:
        return Check(name, anchor, lhs, rhs, "vacuous")
    ok = lhs >= rhs if isinstance(lhs, Fraction) and isinstance(rhs, Fraction) else lhs >= rhs - tol
    return Check(name, anchor, lhs, rhs, "holds" if ok else "violated")


def _identity(name, anchor, residual, tol=TOL) -> Check:
    return Check(name, anchor, float(residual), tol, "holds" if residual <= tol else "violated")


@dataclass
class AppendixReport:
    checks: list = field(default_factory=list)
    xi: Fraction = Fraction(0)
    a: Fraction = Fraction(0)
    grouping: str = ""

    @property
    def ok(self) -> bool:
        return all(c.verdict != "violated" for c in self.checks)

    def by_name(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def verify_appendix(S: FlatSet, ell: int | None = None) -> AppendixReport:
    """Every identity and inequality of the Cayley-graph argument, evaluated on S*."""
    ell = S.t if ell is None else ell
    Fn = lift_set(S, ell)
    index = Fn.index
    q = index.q
    rep = AppendixReport()
    mu_star = float(Fn.values.real.mean())
    if not S.members:
        rep.checks.append(Check("nonempty", "set", 0, 0, "n/a"))
        return rep

    # expansion transfer
    stay_star, stay = cayley_stay(Fn), expansion(S)
    rep.checks.append(_ineq("claim_expansion_transfer", "Cayley expansion transfer",
                            stay_star, stay - Fraction(1, q ** ell), vacuous_if_nonpositive=False))

    # Fourier and levels
    coeffs = fourier(Fn)
    rep.checks.append(_identity("parseval", "Parseval",
                                abs(np.sum(np.abs(coeffs) ** 2) - np.mean(np.abs(Fn.values) ** 2))))
    rep.checks.append(_identity("fourier_roundtrip", "Fourier inversion",
                                np.max(np.abs(inverse_fourier(index, coeffs).values - Fn.values))))
    dec = level_decompose(Fn)
    rep.checks.append(_identity("level_reconstruction", "level decomposition",
                                np.max(np.abs(dec.total().values - Fn.values))))
    comps = dec.components()
    ortho = max((abs(a.inner(b)) for i, a in enumerate(comps) for b in comps[i + 1:]), default=0.0)
    rep.checks.append(_identity("level_orthogonality", "level decomposition", ortho))
    HF = walk_apply(Fn)
    rep.checks.append(_identity("walk_levels", "walk on levels",
                                np.max(np.abs(HF.values - dec.walk_image().values))))
    quad = Fn.inner(HF).real
    grouped = sum(q ** (-i) * dec.level(i).norm2() ** 2 for i in range(ell + 1)) \
        + q ** (-ell - 1) * dec.aff[ell].norm2() ** 2
    literal = dec.level(0).norm2() ** 2 + grouped
    rep.grouping = "separate top affine level" if abs(quad - grouped) <= TOL else (
        "as displayed" if abs(quad - literal) <= TOL else "neither")
    rep.checks.append(_identity("quadratic_form", "walk quadratic form", abs(quad - grouped)))
    rep.checks.append(_identity("stay_from_spectrum", "walk quadratic form",
                                abs(quad / mu_star - float(stay_star))))

    # f_1
    F1 = dec.level(1) if ell >= 1 else None
    if ell >= 1:
        f_lin, f_aff = f1_components(Fn)
        recon = f1_reconstruction(index, f_lin, f_aff)
        rep.checks.append(_identity("f1_reconstruction", "alternative description of F_1",
                                    np.max(np.abs(recon.values - F1.values))))
        links = f1_fourier_links(Fn)
        rep.checks.append(_identity("f1_lin_fourier_link", "Fourier coefficients of f_1", links["lin"]))
        rep.checks.append(_identity("f1_aff_fourier_link", "Fourier coefficients of f_1", links["aff"]))
        rep.checks.append(_identity("f1_mean_zero", "orthogonality of f_1",
                                    max(abs(f_lin.mean()), abs(f_aff.mean()))))
        nB = len(projective_points(index.field, ell))
        w1 = F1.norm2() ** 2
        rep.checks.append(_ineq("f1_lin_second_moment", "second moment of f_1",
                                w1 / nB, float(np.mean(f_lin[1:] ** 2)), vacuous_if_nonpositive=False))
        rep.checks.append(_ineq("f1_aff_second_moment", "second moment of f_1",
                                w1 / q ** ell, float(np.mean(f_aff ** 2)), vacuous_if_nonpositive=False))

        prof = pr_profile_cayley(Fn)
        xi = max(S.measure(), prof["hyperplane"], prof["hyperplane_linear"], prof["point_linear"])
        a = prof["point"]
        rep.xi, rep.a = xi, a
        base = 1 - q ** (2 - ell) - q ** 2 * float(xi)
        rep.checks.append(_ineq("level1_weight", "level-1 weight lower bound", w1 / mu_star, base))
        rep.checks.append(_ineq("fourth_norm_lower", "fourth norm lower bound",
                                F1.norm4_4() / mu_star, base ** 4 if base > 0 else base))
        ub = mu_star * float(a) ** 2 + 863 * q ** 2 * mu_star * float(xi) ** 0.25
        rep.checks.append(_ineq("fourth_norm_upper", "fourth norm upper bound", ub, F1.norm4_4(),
                                vacuous_if_nonpositive=False))
    return rep
