"""Affine flats of F_q^n, their enumeration, and the affine Grassmann walk.

Every flat is stored canonically (RREF direction basis, base point zero on
the pivot columns), so set membership is plain equality.  Measures are
exact ``Fraction`` values computed by counting.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator

import numpy as np

from .gf import FieldSpec
from .poly import point_coords, point_index, point_indices, point_tuple

DEFAULT_CAP = 10 ** 7

KINDS = ("point", "hyperplane", "point_linear", "hyperplane_linear")


class EnumerationCapError(RuntimeError):
    """Raised instead of enumerating more objects than the configured cap."""


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def count_flats(n: int, t: int, q: int) -> int:
    """Number of t-flats in F_q^n: q^(n-t) * [n choose t]_q."""
    if not 0 <= t <= n:
        raise ValueError(f"flat dimension t={t} outside [0, n={n}]")
    return q ** (n - t) * gaussian_binomial(n, t, q)


def count_superflats(n: int, t: int, q: int) -> int:
    """(t+1)-flats containing a fixed t-flat."""
    return (q ** (n - t) - 1) // (q - 1)


def count_subflats(t: int, q: int) -> int:
    """t-flats inside a fixed (t+1)-flat."""
    return count_flats(t + 1, t, q)


# --- vector arithmetic over F_q ----------------------------------------------

@lru_cache(maxsize=None)
def _ops(field: FieldSpec):
    return (field.add_table.tolist(), field.mul_table.tolist(),
            field.neg_table.tolist(), field.inv_table.tolist())


def vadd(field, u, v):
    add = _ops(field)[0]
    return tuple(add[a][b] for a, b in zip(u, v))


def vsub(field, u, v):
    add, _, neg, _ = _ops(field)
    return tuple(add[a][neg[b]] for a, b in zip(u, v))


def vscale(field, c, v):
    mul = _ops(field)[1]
    return tuple(mul[c][a] for a in v)


def vdot(field, u, v) -> int:
    add, mul, _, _ = _ops(field)
    s = 0
    for a, b in zip(u, v):
        s = add[s][mul[a][b]]
    return s


def rref(field: FieldSpec, rows) -> tuple[list[tuple[int, ...]], list[int]]:
    """Reduced row echelon form; zero rows are dropped. Returns (rows, pivots)."""
    add, mul, neg, inv = _ops(field)
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    n = len(rows[0])
    out: list[list[int]] = []
    pivots: list[int] = []
    for col in range(n):
        sel = next((i for i, r in enumerate(rows) if r[col]), None)
        if sel is None:
            continue
        r = rows.pop(sel)
        c = inv[r[col]]
        r = [mul[c][a] for a in r]
        for others in (rows, out):
            for j, o in enumerate(others):
                if o[col]:
                    f = neg[o[col]]
                    others[j] = [add[a][mul[f][b]] for a, b in zip(o, r)]
        out.append(r)
        pivots.append(col)
    return [tuple(r) for r in out], pivots


def rank(field: FieldSpec, rows) -> int:
    return len(rref(field, rows)[0])


def reduce_against(field, v, rows, pivots):
    """v minus its components along an RREF basis (zero on every pivot column)."""
    add, mul, neg, _ = _ops(field)
    v = list(v)
    for r, p in zip(rows, pivots):
        if v[p]:
            f = neg[v[p]]
            v = [add[a][mul[f][b]] for a, b in zip(v, r)]
    return tuple(v)


def normalize_projective(field, v):
    """Scale a nonzero vector so its first nonzero entry is 1."""
    lead = next((a for a in v if a), 0)
    if lead == 0:
        raise ValueError("the zero vector has no projective representative")
    return vscale(field, _ops(field)[3][lead], v)


@lru_cache(maxsize=None)
def projective_points(field: FieldSpec, n: int) -> tuple[tuple[int, ...], ...]:
    """Nonzero vectors of F_q^n whose first nonzero entry is 1, in canonical order."""
    pts = point_coords(field.q, n)
    out = []
    for row in pts[1:]:
        nz = row[row != 0]
        if nz[0] == 1:
            out.append(tuple(int(a) for a in row))
    return tuple(out)


# --- flats ---------------------------------------------------------------------

@dataclass(frozen=True)
class AffineFlat:
    field: FieldSpec
    n: int
    basis: tuple[tuple[int, ...], ...]
    base: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(i for i, a in enumerate(b) if a) for b in self.basis)

    @cached_property
    def _points(self) -> np.ndarray:
        F, q = self.field, self.field.q
        U = point_coords(q, self.t)
        P = np.broadcast_to(np.array(self.base, dtype=np.int64), (len(U), self.n)).copy()
        for j, b in enumerate(self.basis):
            P = F.add_table[P, F.mul_table[U[:, j][:, None], np.array(b)[None, :]]]
        idx = point_indices(P, q)
        idx.setflags(write=False)
        return idx

    def point_indices(self) -> np.ndarray:
        """Indices of the flat's points, ordered by the parameter u in canonical order."""
        return self._points

    def points(self) -> list[tuple[int, ...]]:
        return [point_tuple(int(m), self.field.q, self.n) for m in self._points]

    def contains(self, x) -> bool:
        d = vsub(self.field, tuple(x), self.base)
        return not any(reduce_against(self.field, d, self.basis, self.pivots))

    def direction_contains(self, z) -> bool:
        return not any(reduce_against(self.field, tuple(z), self.basis, self.pivots))

    def inside_hyperplane(self, h, c) -> bool:
        F = self.field
        return vdot(F, h, self.base) == c and all(vdot(F, h, b) == 0 for b in self.basis)

    def direction_inside(self, h) -> bool:
        return all(vdot(self.field, h, b) == 0 for b in self.basis)

    def parametrize(self, u) -> tuple[int, ...]:
        x = self.base
        for uj, b in zip(u, self.basis):
            x = vadd(self.field, x, vscale(self.field, uj, b))
        return x

    def issubset(self, other: "AffineFlat") -> bool:
        return other.contains(self.base) and all(other.direction_contains(b) for b in self.basis)

    def __repr__(self):
        dirs = "; ".join(",".join(map(str, b)) for b in self.basis)
        return f"Flat({','.join(map(str, self.base))} | {dirs})"


def canonicalize(field: FieldSpec, base, vectors=()) -> AffineFlat:
    base = tuple(int(a) for a in base)
    vectors = [tuple(int(a) for a in v) for v in vectors]
    n = len(base)
    if any(len(v) != n for v in vectors):
        raise ValueError("direction vectors must live in the ambient space of the base point")
    rows, piv = rref(field, vectors)
    if len(rows) != len(vectors):
        raise ValueError("direction vectors are linearly dependent")
    return AffineFlat(field, n, tuple(rows), reduce_against(field, base, rows, piv))


def full_space(field: FieldSpec, n: int) -> AffineFlat:
    ident = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return canonicalize(field, (0,) * n, ident)


def _check_cap(n, t, q, cap):
    total = count_flats(n, t, q)
    if cap is not None and total > cap:
        raise EnumerationCapError(
            f"{total} flats of dimension {t} in F_{q}^{n} exceed the cap {cap}; use Monte Carlo")
    return total


def enumerate_flats(field: FieldSpec, n: int, t: int, cap: int | None = DEFAULT_CAP) -> Iterator[AffineFlat]:
    """Every t-flat exactly once, canonical, ordered by pivots, basis entries, base."""
    q = field.q
    _check_cap(n, t, q, cap)
    for piv in itertools.combinations(range(n), t):
        free = [[c for c in range(p + 1, n) if c not in piv] for p in piv]
        nfree = sum(len(f) for f in free)
        off_piv = [c for c in range(n) if c not in piv]
        for entries in itertools.product(range(q), repeat=nfree):
            it = iter(entries)
            basis = []
            for p, fr in zip(piv, free):
                row = [0] * n
                row[p] = 1
                for c in fr:
                    row[c] = next(it)
                basis.append(tuple(row))
            basis = tuple(basis)
            for bvals in itertools.product(range(q), repeat=len(off_piv)):
                base = [0] * n
                for c, v in zip(off_piv, bvals):
                    base[c] = v
                yield AffineFlat(field, n, basis, tuple(base))


def sample_flat(field: FieldSpec, n: int, t: int, rng) -> AffineFlat:
    """Uniform t-flat: rejection-sample independent directions, uniform base."""
    q = field.q
    while True:
        vecs = [tuple(int(a) for a in rng.integers(0, q, size=n)) for _ in range(t)]
        if rank(field, vecs) == t:
            break
    base = tuple(int(a) for a in rng.integers(0, q, size=n))
    return canonicalize(field, base, vecs)


# --- flat spaces: indexed enumerations with containment structure -------------

class FlatSpace:
    """All t-flats of F_q^n with integer ids in enumeration order."""

    def __init__(self, field: FieldSpec, n: int, t: int, cap: int | None = DEFAULT_CAP):
        self.field, self.n, self.t = field, n, t
        self.flats = list(enumerate_flats(field, n, t, cap))
        self.index = {A: i for i, A in enumerate(self.flats)}
        self.points = (np.stack([A.point_indices() for A in self.flats])
                       if self.flats else np.zeros((0, field.q ** t), dtype=np.int64))
        self._by_pointset = {np.sort(row).tobytes(): i for i, row in enumerate(self.points)}

    def __len__(self):
        return len(self.flats)

    def id_of_pointset(self, pts: np.ndarray) -> int:
        return self._by_pointset[np.sort(np.asarray(pts, dtype=np.int64)).tobytes()]

    @cached_property
    def through_point(self) -> list[np.ndarray]:
        """``through_point[x]``: ids of the flats containing point x."""
        q, n = self.field.q, self.n
        owners = [[] for _ in range(q ** n)]
        for i, row in enumerate(self.points):
            for x in row:
                owners[x].append(i)
        return [np.array(o, dtype=np.int64) for o in owners]

    @cached_property
    def children(self) -> np.ndarray:
        """For each (t+1)-flat B of F_q^n (ids of ``space(n, t+1)``), the ids of its t-subflats."""
        upper = flat_space(self.field, self.n, self.t + 1)
        local = flat_space(self.field, self.t + 1, self.t)
        out = np.empty((len(upper), len(local)), dtype=np.int64)
        for j, row in enumerate(upper.points):
            sub = row[local.points]
            for k, s in enumerate(sub):
                out[j, k] = self._by_pointset[np.sort(s).tobytes()]
        return out

    def mask(self, S: "FlatSet") -> np.ndarray:
        m = np.zeros(len(self), dtype=bool)
        for A in S.members:
            m[self.index[A]] = True
        return m

    def subset(self, mask) -> "FlatSet":
        return FlatSet(self.field, self.n, self.t,
                       frozenset(self.flats[i] for i in np.flatnonzero(mask)))


_SPACES: dict = {}
_CAP = [DEFAULT_CAP]


def set_enumeration_cap(cap: int | None) -> None:
    """Cap used by every indexed enumeration; ``None`` disables it."""
    _CAP[0] = cap


def flat_space(field: FieldSpec, n: int, t: int, cap: int | None = None) -> FlatSpace:
    key = (field, n, t)
    _check_cap(n, t, field.q, _CAP[0] if cap is None else cap)
    if key not in _SPACES:
        _SPACES[key] = FlatSpace(field, n, t, cap=None)
    return _SPACES[key]


# --- flat sets -------------------------------------------------------------------

@dataclass(frozen=True)
class FlatSet:
    field: FieldSpec
    n: int
    t: int
    members: frozenset

    def __post_init__(self):
        for A in self.members:
            if A.n != self.n or A.t != self.t:
                raise ValueError(f"member {A} is not a {self.t}-flat of F_q^{self.n}")

    @classmethod
    def of(cls, field, n, t, flats: Iterable[AffineFlat] = ()):
        return cls(field, n, t, frozenset(flats))

    @classmethod
    def everything(cls, field, n, t):
        return cls(field, n, t, frozenset(flat_space(field, n, t).flats))

    def __len__(self):
        return len(self.members)

    def __contains__(self, A):
        return A in self.members

    def __iter__(self):
        return iter(self.members)

    @property
    def space(self) -> FlatSpace:
        return flat_space(self.field, self.n, self.t)

    def measure(self) -> Fraction:
        return Fraction(len(self.members), count_flats(self.n, self.t, self.field.q))

    def __and__(self, other: "FlatSet") -> "FlatSet":
        return FlatSet(self.field, self.n, self.t, self.members & other.members)

    def __or__(self, other: "FlatSet") -> "FlatSet":
        return FlatSet(self.field, self.n, self.t, self.members | other.members)


def measure(S: FlatSet) -> Fraction:
    return S.measure()


def upper_shadow(S: FlatSet) -> FlatSet:
    """(t+1)-flats containing some member of S."""
    if S.t >= S.n:
        raise ValueError("no flats of dimension above the ambient dimension")
    space = S.space
    inS = space.mask(S)
    hit = inS[space.children].any(axis=1)
    return flat_space(S.field, S.n, S.t + 1).subset(hit)


def upper_shadow_k(S: FlatSet, h: int) -> FlatSet:
    if h > S.n or h < S.t:
        raise ValueError(f"shadow dimension h={h} outside [{S.t}, {S.n}]")
    while S.t < h:
        S = upper_shadow(S)
    return S


# --- the affine Grassmann walk --------------------------------------------------

def walk_step(A: AffineFlat, rng) -> AffineFlat:
    """Up to a uniform (t+1)-superflat B, then down to a uniform t-subflat of B."""
    F, n, t, q = A.field, A.n, A.t, A.field.q
    if t >= n:
        raise ValueError("the walk needs t < n")
    while True:
        v = tuple(int(a) for a in rng.integers(0, q, size=n))
        if any(reduce_against(F, v, A.basis, A.pivots)):
            break
    B = canonicalize(F, A.base, list(A.basis) + [v])
    local = sample_flat(F, t + 1, t, rng)
    base = B.parametrize(local.base)
    dirs = [vsub(F, B.parametrize(b), B.parametrize((0,) * (t + 1))) for b in local.basis]
    return canonicalize(F, base, dirs)


def walk_weights(field: FieldSpec, n: int, t: int) -> tuple[np.ndarray, int]:
    """Integer matrix W and denominator D with transition probability W/D.

    ``W[A, A']`` counts the (t+1)-flats containing both A and A'.
    """
    space = flat_space(field, n, t)
    ch = space.children
    W = np.zeros((len(space), len(space)), dtype=np.int64)
    for row in ch:
        W[np.ix_(row, row)] += 1
    q = field.q
    return W, count_superflats(n, t, q) * count_subflats(t, q)


def stay_counts(S: FlatSet) -> tuple[int, int, int]:
    """(sum_B cnt(B)^2, |S|, number of superflats per member) for the up-down walk."""
    space = S.space
    inS = space.mask(S)
    cnt = inS[space.children].sum(axis=1)
    return int((cnt * cnt).sum()), len(S), count_superflats(S.n, S.t, S.field.q)


def expansion(S: FlatSet, include_self_loops: bool = True) -> Fraction:
    """1 - Phi(S): probability a walk step from a uniform member stays in S."""
    if not S.members:
        raise ValueError("expansion of the empty set is undefined")
    if S.t >= S.n:
        raise ValueError("the walk needs t < n")
    sq, size, sup = stay_counts(S)
    sub = count_subflats(S.t, S.field.q)
    if include_self_loops:
        return Fraction(sq, size * sup * sub)
    # the self-loop accounts for exactly `sup` of the counted (A, B, A) triples
    return Fraction(sq - size * sup, size * sup * (sub - 1))


# --- zoom families and pseudo-randomness ------------------------------------------

def _norm_param(field, n, kind, param):
    if kind == "point":
        x = tuple(int(a) for a in param)
        if len(x) != n:
            raise ValueError("point of wrong dimension")
        return x
    if kind == "point_linear":
        z = tuple(int(a) for a in param)
        if len(z) != n:
            raise ValueError("vector of wrong dimension")
        if not any(z):
            raise ValueError("linear-part zoom needs a nonzero vector")
        return normalize_projective(field, z)
    if kind == "hyperplane":
        h, c = param
        h = tuple(int(a) for a in h)
        if len(h) != n or not any(h):
            raise ValueError("hyperplane normal must be a nonzero vector of F_q^n")
        lead = next(a for a in h if a)
        inv = _ops(field)[3][lead]
        return vscale(field, inv, h), _ops(field)[1][inv][int(c)]
    if kind == "hyperplane_linear":
        h = tuple(int(a) for a in (param[0] if isinstance(param[0], (tuple, list)) else param))
        if len(h) != n or not any(h):
            raise ValueError("hyperplane normal must be a nonzero vector of F_q^n")
        return normalize_projective(field, h)
    raise ValueError(f"unknown zoom kind {kind!r}")


def in_zoom(A: AffineFlat, kind: str, param) -> bool:
    """Membership of A in the zoom family; ``param`` must already be normalized."""
    if kind == "point":
        return A.contains(param)
    if kind == "point_linear":
        return A.direction_contains(param)
    if kind == "hyperplane":
        return A.inside_hyperplane(*param)
    if kind == "hyperplane_linear":
        return A.direction_inside(param)
    raise ValueError(f"unknown zoom kind {kind!r}")


def zoom_family(field: FieldSpec, n: int, t: int, kind: str, param) -> FlatSet:
    """Exact member set of H_x, H_W, H_{z,lin} or H_{W,lin}.

    Parameters: a point for ``point``; a nonzero vector for ``point_linear``;
    ``(h, c)`` for the affine hyperplane <h,x> = c; ``h`` for the linear
    hyperplane <h,x> = 0 in ``hyperplane_linear``.
    """
    param = _norm_param(field, n, kind, param)
    space = flat_space(field, n, t)
    return FlatSet.of(field, n, t, (A for A in space.flats if in_zoom(A, kind, param)))


def zoom_size(n: int, t: int, q: int, kind: str) -> int:
    """|H| for any parameter of the given kind (all parameters are equivalent)."""
    if kind == "point":
        return count_flats(n, t, q) * q ** t // q ** n
    if kind == "hyperplane":
        return count_flats(n - 1, t, q)
    if kind == "point_linear":
        return q ** (n - t) * gaussian_binomial(n - 1, t - 1, q)
    if kind == "hyperplane_linear":
        return q ** (n - t) * gaussian_binomial(n - 1, t, q)
    raise ValueError(f"unknown zoom kind {kind!r}")


def all_parameters(field: FieldSpec, n: int, kind: str) -> list:
    q = field.q
    if kind == "point":
        return [tuple(int(a) for a in row) for row in point_coords(q, n)]
    if kind == "point_linear":
        return list(projective_points(field, n))
    if kind == "hyperplane":
        return [(h, c) for h in projective_points(field, n) for c in range(q)]
    if kind == "hyperplane_linear":
        return list(projective_points(field, n))
    raise ValueError(f"unknown zoom kind {kind!r}")


def _member_params(A: AffineFlat, kind: str):
    F, q, n = A.field, A.field.q, A.n
    if kind == "point":
        return [point_tuple(int(m), q, n) for m in A.point_indices()]
    if kind == "point_linear":
        lin = AffineFlat(F, n, A.basis, (0,) * n)
        return sorted({normalize_projective(F, point_tuple(int(m), q, n))
                       for m in lin.point_indices() if m})
    if kind == "hyperplane":
        return [(h, vdot(F, h, A.base)) for h in projective_points(F, n) if A.direction_inside(h)]
    if kind == "hyperplane_linear":
        return [h for h in projective_points(F, n) if A.direction_inside(h)]
    raise ValueError(f"unknown zoom kind {kind!r}")


def pseudo_randomness(S: FlatSet, kind: str, param) -> Fraction:
    """Conditional measure mu(S cap H) / mu(H) for one zoom family H."""
    param = _norm_param(S.field, S.n, kind, param)
    size = zoom_size(S.n, S.t, S.field.q, kind)
    if size == 0:
        return Fraction(0)
    hits = sum(1 for A in S.members if in_zoom(A, kind, param))
    return Fraction(hits, size)


def zoom_profile(S: FlatSet, kind: str) -> dict:
    """Conditional measure for every parameter of one kind (zero entries omitted)."""
    size = zoom_size(S.n, S.t, S.field.q, kind)
    counts: dict = {}
    if size == 0:
        return counts
    for A in S.members:
        for prm in _member_params(A, kind):
            counts[prm] = counts.get(prm, 0) + 1
    return {prm: Fraction(c, size) for prm, c in counts.items()}


@dataclass(frozen=True)
class ProfileEntry:
    value: Fraction
    argmax: object


def pr_profile(S: FlatSet, kinds=KINDS) -> dict[str, ProfileEntry]:
    """Maximum conditional measure per zoom kind (ties: first parameter in canonical order)."""
    out = {}
    for kind in kinds:
        prof = zoom_profile(S, kind)
        if not prof:
            out[kind] = ProfileEntry(Fraction(0), None)
            continue
        order = {p: i for i, p in enumerate(all_parameters(S.field, S.n, kind))}
        best = max(prof.items(), key=lambda kv: (kv[1], -order[kv[0]]))
        out[kind] = ProfileEntry(best[1], best[0])
    return out


@dataclass(frozen=True)
class SharpThresholdReport:
    mu: Fraction
    mu_shadow: Fraction
    stay: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.mu_shadow >= self.rhs

    @property
    def slack(self) -> Fraction:
        return self.mu_shadow - self.rhs


def sharp_threshold_check(S: FlatSet) -> SharpThresholdReport:
    """mu(S up) >= mu(S) / (1 - Phi(S)), all exact."""
    if not S.members:
        raise ValueError("the shadow bound needs a nonempty set")
    stay = expansion(S)
    return SharpThresholdReport(S.measure(), upper_shadow(S).measure(), stay, S.measure() / stay)


def random_flat_set(field: FieldSpec, n: int, t: int, size: int, rng) -> FlatSet:
    """Uniform random subset of the t-flats of the given size."""
    space = flat_space(field, n, t)
    ids = rng.choice(len(space), size=size, replace=False)
    return FlatSet.of(field, n, t, (space.flats[i] for i in ids))


def point_of(field: FieldSpec, n: int, m: int) -> tuple[int, ...]:
    return point_tuple(m, field.q, n)


def index_of(field: FieldSpec, x) -> int:
    return point_index(x, field.q)
