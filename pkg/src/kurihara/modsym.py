"""Weight-2 modular symbols for Gamma0(N), plus quotient.

Manin-symbol presentation indexed by P^1(Z/N) (Stein, Algorithms 8.29/8.32),
quotient by the 2-term, 3-term and star relations, boundary map to cusp
classes (Cremona, Prop. 2.2.3), Hecke action through Merel's matrices, and
extraction of the rational eigensymbol attached to a curve.

The eigensymbol is stored as a linear functional on the plus quotient (the
dual Hecke eigenvector): pairing it with the unimodular decomposition of
{oo -> a/d} evaluates the normalized plus modular symbol at the cusp a/d,
exactly, up to the recorded calibration unit.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from . import lseries
from .curve import primes_upto, trace_of_frobenius
from .errors import (
    AmbiguousEigenspace,
    BadPrime,
    CalibrationError,
    EigensymbolNotFound,
    FrickeNotScalar,
    NotCoprime,
)
from .exactmath import kernel_basis, mat_mul, mat_transpose, rref, primitive_vector, solve_rational, xgcd


# ---------------------------------------------------------------------------
# P^1(Z/N)


def _lift_unit(a, d, n):
    """Lift a unit a mod d (with d | n) to a unit mod n."""
    u, v = 1, n
    g = gcd(v, d)
    while g > 1:
        u *= g
        v //= g
        g = gcd(v, g)
    _, x, y = xgcd(u, v)
    return (u * x + a * y * v) % n


class P1List:
    """Canonical representatives of P^1(Z/N) with index lookup."""

    def __init__(self, N):
        assert N >= 1
        self.N = N
        seen = {}
        reps = []
        if N == 1:
            reps = [(0, 0)]
            seen[(0, 0)] = 0
        else:
            for c in range(N):
                for d in range(N):
                    r = self.normalize(c, d)
                    if r is not None and r not in seen:
                        seen[r] = len(reps)
                        reps.append(r)
        self.reps = reps
        self._index = seen

    def __len__(self):
        return len(self.reps)

    def normalize(self, u, v):
        """Canonical form of (u : v), or None when gcd(u, v, N) > 1."""
        N = self.N
        if N == 1:
            return (0, 0)
        u %= N
        v %= N
        if u == 0:
            return (0, 1) if gcd(v, N) == 1 else None
        g, _, s = xgcd(N, u)  # s*u = g mod N
        if gcd(g, v) > 1:
            return None
        s = _lift_unit(s % N, N // g, N)
        v = s * v % N
        if g == 1:
            return (1, v)
        best = min(
            v * t % N for t in range(1, N, N // g) if gcd(t, N) == 1
        )
        return (g, best)

    def index(self, u, v):
        r = self.normalize(u, v)
        if r is None:
            return None
        return self._index[r]


def build_p1(N):
    return P1List(N)


# ---------------------------------------------------------------------------
# cusps


def _cusp_normalize(a, c):
    g = gcd(a, c)
    if g:
        a, c = a // g, c // g
    if c < 0:
        a, c = -a, -c
    if c == 0:
        a = 1
    return (a, c)


def _cusp_equivalent(N, cusp1, cusp2):
    """Gamma0(N)-equivalence of cusps (Cremona, Prop. 2.2.3)."""
    p1, q1 = cusp1
    p2, q2 = cusp2

    def inv_mod(p, q):
        if q == 0:
            return 1
        if q == 1:
            return 0
        return pow(p % q, -1, q)

    s1, s2 = inv_mod(p1, q1), inv_mod(p2, q2)
    return (s1 * q2 - s2 * q1) % gcd(q1 * q2, N) == 0


class CuspClasses:
    """Cusp classes for Gamma0(N), folded by the star involution a/c -> -a/c."""

    def __init__(self, N):
        self.N = N
        self.reps = []

    def index(self, a, c):
        cusp = _cusp_normalize(a, c)
        star = _cusp_normalize(-cusp[0], cusp[1])
        for i, rep in enumerate(self.reps):
            if _cusp_equivalent(self.N, cusp, rep) or _cusp_equivalent(self.N, star, rep):
                return i
        self.reps.append(cusp)
        return len(self.reps) - 1


def _sl2_lift(c, d, N):
    """An SL2(Z) matrix with bottom row congruent to (c, d) mod N."""
    if N == 1:
        return (1, 0, 0, 1)
    c %= N
    d %= N
    if c == 0 and d == 0:
        raise ValueError("not a P1 element")
    while gcd(c, d) != 1:
        d += N
    g, x, y = xgcd(d, c)
    assert g == 1
    # a*d - b*c = 1 with (a, b) = (x, -y)
    return (x, -y, c, d)


# ---------------------------------------------------------------------------
# Merel's matrices for the Hecke action on Manin symbols


def merel_matrices(n):
    """Matrices (a, b; c, d), det = n, a > b >= 0, d > c >= 0 (Merel's set)."""
    out = []
    for a in range(1, n + 1):
        for d in range((n + a - 1) // a, n + 2 - a):
            bc = a * d - n
            if bc == 0:
                for b in range(a):
                    out.append((a, b, 0, d))
                for c in range(1, d):
                    out.append((a, 0, c, d))
            else:
                for b in range((bc - 1) // (d - 1) + 1, a):
                    if bc % b == 0:
                        out.append((a, b, bc // b, d))
    return out


# ---------------------------------------------------------------------------
# the plus-quotient space


class ManinSpace:
    """Plus quotient of weight-2 Manin symbols for Gamma0(N).

    Coordinates live on the free basis chosen by row reduction of the 2-term,
    3-term, and star relations; `proj[i]` expresses generator i in them.
    """

    def __init__(self, N, sign=+1):
        assert sign == +1, "only the plus quotient is implemented"
        self.N = N
        self.sign = sign
        self.p1 = P1List(N)
        G = len(self.p1)
        expected = N
        for q, e in _factor_items(N):
            expected = expected // q * (q + 1)
        assert G == expected, "wrong P1 orbit count"

        rel_rows = []
        seen = set()

        def add_rel(items):
            row = [0] * G
            for idx, coeff in items:
                row[idx] += coeff
            key = tuple(row)
            if any(row) and key not in seen:
                seen.add(key)
                rel_rows.append(row)

        idx = self.p1.index
        for i, (c, d) in enumerate(self.p1.reps):
            add_rel([(i, 1), (idx(d, -c), 1)])
            add_rel([(i, 1), (idx(c + d, -c), 1), (idx(d, -c - d), 1)])
            add_rel([(i, 1), (idx(-c, d), -1)])
        self.relations = rel_rows

        red, pivots = rref(rel_rows) if rel_rows else ([], [])
        pivot_set = set(pivots)
        self.free = [j for j in range(G) if j not in pivot_set]
        self.dim = len(self.free)
        free_pos = {j: k for k, j in enumerate(self.free)}

        # proj[i]: coordinates of generator i in the free basis
        proj = [None] * G
        for k, j in enumerate(self.free):
            v = [Fraction(0)] * self.dim
            v[k] = Fraction(1)
            proj[j] = v
        for r, c in enumerate(pivots):
            v = [Fraction(0)] * self.dim
            for j, k in free_pos.items():
                if red[r][j]:
                    v[k] = -red[r][j]
            proj[c] = v
        self.proj = proj

        # boundary map on the free basis
        cusps = CuspClasses(N)
        rows = {}
        for k, j in enumerate(self.free):
            c, d = self.p1.reps[j]
            a, b, ct, dt = _sl2_lift(c, d, N)
            i1 = cusps.index(a, ct)
            i2 = cusps.index(b, dt)
            rows.setdefault(i1, [Fraction(0)] * self.dim)[k] += 1
            rows.setdefault(i2, [Fraction(0)] * self.dim)[k] -= 1
        self.cusp_classes = cusps
        self.boundary = [rows.get(i, [Fraction(0)] * self.dim) for i in range(len(cusps.reps))]
        self.cuspidal_basis = kernel_basis(self.boundary, self.dim) if self.boundary else [
            list(v) for v in _identity_int(self.dim)
        ]
        self._hecke_cache = {}
        self._merel_cache = {}

    # -- Hecke ------------------------------------------------------------

    def hecke_full(self, q):
        """Matrix of T_q on the plus quotient (columns act on coordinates)."""
        mat = self._hecke_cache.get(q)
        if mat is not None:
            return mat
        fam = self._merel_cache.setdefault(q, merel_matrices(q))
        G = len(self.p1)

        def image_cols(i):
            c, d = self.p1.reps[i]
            cols = []
            for a, b, cc, dd in fam:
                t = self.p1.index(c * a + d * cc, c * b + d * dd)
                if t is not None:
                    cols.append(t)
            return cols

        images = [image_cols(i) for i in range(G)]
        mat = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for k, j in enumerate(self.free):
            for t in images[j]:
                pv = self.proj[t]
                for r in range(self.dim):
                    if pv[r]:
                        mat[r][k] += pv[r]
        # the action must kill the relation submodule (Merel / star-equivariance)
        for row in self.relations:
            acc = [Fraction(0)] * self.dim
            for i, coeff in enumerate(row):
                if coeff:
                    for t in images[i]:
                        pv = self.proj[t]
                        for r in range(self.dim):
                            if pv[r]:
                                acc[r] += coeff * pv[r]
            assert not any(acc), f"T_{q} does not descend to the quotient"
        self._hecke_cache[q] = mat
        return mat

    def hecke_cuspidal(self, q):
        """Matrix of T_q restricted to the cuspidal plus subspace."""
        if self.N % q == 0:
            raise BadPrime(f"{q} divides the level")
        T = self.hecke_full(q)
        C = mat_transpose([list(map(Fraction, v)) for v in self.cuspidal_basis])
        TC = mat_mul(T, C)
        cols = []
        for j in range(len(self.cuspidal_basis)):
            rhs = [TC[r][j] for r in range(self.dim)]
            x = solve_rational(C, rhs)
            assert x is not None, "cuspidal subspace not Hecke stable"
            cols.append(x)
        return mat_transpose(cols)

    # -- paths -------------------------------------------------------------

    def path_symbols(self, a, d):
        """Indices of the unimodular pieces of {oo -> a/d} (Manin's trick)."""
        if d == 0:
            return []
        if d < 0:
            a, d = -a, -d
        quotients = []
        aa, dd = a, d
        while dd:
            qq, rr = divmod(aa, dd)
            quotients.append(qq)
            aa, dd = dd, rr
        ps, qs = [1], [0]
        for qq in quotients:
            if len(ps) == 1:
                ps.append(qq)
                qs.append(1)
            else:
                ps.append(qq * ps[-1] + ps[-2])
                qs.append(qq * qs[-1] + qs[-2])
        out = []
        for k in range(1, len(ps)):
            pk, pk1, qk, qk1 = ps[k], ps[k - 1], qs[k], qs[k - 1]
            det = pk * qk1 - pk1 * qk
            assert det in (1, -1)
            bottom = (qk, qk1) if det == 1 else (qk, -qk1)
            out.append(self.p1.index(*bottom))
        return out

    def path_vector(self, a, d):
        """Coordinates of the path {oo -> a/d} in the plus quotient."""
        v = [Fraction(0)] * self.dim
        for i in self.path_symbols(a, d):
            pv = self.proj[i]
            for r in range(self.dim):
                if pv[r]:
                    v[r] += pv[r]
        return v

    def path_between(self, cusp1, cusp2):
        """Coordinates of {cusp1 -> cusp2}; cusps are (num, den) pairs."""
        v2 = self.path_vector(cusp2[0], cusp2[1])
        v1 = self.path_vector(cusp1[0], cusp1[1])
        return [x - y for x, y in zip(v2, v1)]

    def fricke_matrix(self):
        """Action of [0, -1; N, 0] on the plus quotient, column by column."""
        cols = []
        for j in self.free:
            c, d = self.p1.reps[j]
            a, b, ct, dt = _sl2_lift(c, d, self.N)
            # symbol = {b/dt -> a/ct}; eta(p/q) = -q/(N p)
            alpha = _cusp_normalize(-dt, self.N * b)
            beta = _cusp_normalize(-ct, self.N * a)
            cols.append(self.path_between(alpha, beta))
        return mat_transpose(cols)


def _identity_int(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _factor_items(N):
    from .exactmath import factorize

    return sorted(factorize(N).items())


def build_space(N, sign=+1):
    return ManinSpace(N, sign)


def hecke_operator(space, q):
    """Matrix of T_q on the cuspidal plus quotient (q coprime to the level)."""
    return space.hecke_cuspidal(q)


# ---------------------------------------------------------------------------
# eigensymbol


@dataclass
class EigenSymbol:
    """The rational Hecke eigensymbol of a curve, as an evaluation functional.

    `vector` is a content-1 integral left eigenvector of every T_q (the dual
    action); `column` is the matching content-1 column eigenvector inside the
    cuspidal subspace, kept for the boundary and Fricke checks.
    """

    space: ManinSpace
    curve: object
    vector: tuple
    column: tuple
    hecke_pairs: tuple
    holdout_pairs: tuple
    chain_dims: tuple
    calibration_status: str
    calibration_unit: Fraction
    _wfree: list = field(default=None, repr=False)
    _memo: dict = field(default_factory=dict, repr=False)

    def generator_values(self):
        """Functional evaluated on each Manin generator (pulled back once).

        Stored as integer numerators over one common denominator so that the
        hot evaluation path sums plain ints.
        """
        if self._wfree is None:
            w = self.vector
            vals = [
                sum(Fraction(wi) * pj for wi, pj in zip(w, pv) if pj)
                for pv in self.space.proj
            ]
            den = 1
            for v in vals:
                den = den * v.denominator // gcd(den, v.denominator)
            self._wfree = ([int(v * den) for v in vals], den)
        return self._wfree

    def raw_value(self, a, d):
        """Uncalibrated pairing of the functional with {oo -> a/d}."""
        nums, den = self.generator_values()
        total = 0
        for i in self.space.path_symbols(a, d):
            total += nums[i]
        return Fraction(total, den)

    def to_json(self):
        return {
            "N": self.space.N,
            "sign": 1,
            "basis_dim": self.space.dim,
            "vector": [str(x) for x in self.vector],
            "hecke_pairs": [[q, aq] for q, aq in self.hecke_pairs],
            "calibration": {
                "status": self.calibration_status,
                "unit": f"{self.calibration_unit.numerator}/{self.calibration_unit.denominator}",
            },
        }


def eval_plus(symbol, a, d):
    """[a/d]+ = Re([a/d])/Omega+ as an exact rational, up to the calibration unit.

    The path {oo -> a/d} is decomposed into unimodular pieces through the
    continued-fraction convergents of a/d; the result depends only on a mod d.
    """
    if d <= 0:
        raise NotCoprime("denominator must be positive")
    if gcd(a, d) != 1:
        raise NotCoprime(f"gcd({a}, {d}) != 1")
    key = (a, d)
    val = symbol._memo.get(key)
    if val is None:
        val = symbol.raw_value(a, d) * symbol.calibration_unit
        symbol._memo[key] = val
    return val


def _intersect_eigenspace(mats_pairs, start_basis, dim):
    """Iteratively intersect kernels of (T_q - a_q) with a column subspace."""
    basis = [list(map(Fraction, v)) for v in start_basis]  # list of vectors
    dims = [len(basis)]
    used = []
    for q, aq, T in mats_pairs:
        if len(basis) <= 1 and used:
            break
        cols = mat_transpose(basis)
        M = mat_mul(T, cols)
        for j in range(len(basis)):
            for r in range(dim):
                M[r][j] -= aq * cols[r][j]
        K = kernel_basis(M, len(basis))
        basis = [
            [sum(Fraction(k[j]) * basis[j][r] for j in range(len(basis))) for r in range(dim)]
            for k in K
        ]
        basis = [primitive_vector(v) for v in basis]
        used.append((q, aq))
        dims.append(len(basis))
        if not basis:
            break
    return basis, used, dims


def extract_eigensymbol(space, E, qmax=100, holdout_count=3, calibrate=True):
    """Cut the eigenline of E out of the plus quotient and package it.

    Requires E to be the Gamma0(N)-optimal curve of its class (asserted by the
    caller; the calibration unit records any leftover rational scalar).
    """
    if E.conductor != space.N:
        raise EigensymbolNotFound(
            f"curve conductor {E.conductor} does not match level {space.N}"
        )
    good_q = [q for q in primes_upto(qmax) if space.N % q != 0]

    def pair_stream():
        for q in good_q:
            yield q, trace_of_frobenius(E, q), space.hecke_full(q)

    # column chain inside the cuspidal subspace
    col_basis, used, chain = _intersect_eigenspace(
        pair_stream(), space.cuspidal_basis, space.dim
    )
    if not col_basis:
        raise EigensymbolNotFound(
            "no cuspidal eigenvector matches the a_q of the curve "
            "(wrong conductor, inconsistent a_q, or non-optimal input)"
        )
    if len(col_basis) > 1:
        raise AmbiguousEigenspace(
            f"eigenspace still {len(col_basis)}-dimensional after q <= {qmax}"
        )
    column = tuple(col_basis[0])

    # functional chain on the full quotient (transposed action)
    def dual_stream():
        for q in good_q:
            yield q, trace_of_frobenius(E, q), mat_transpose(space.hecke_full(q))

    dual_basis, dual_used, _ = _intersect_eigenspace(
        dual_stream(), _identity_int(space.dim), space.dim
    )
    if len(dual_basis) != 1:
        raise AmbiguousEigenspace(
            f"dual eigenspace has dimension {len(dual_basis)} after q <= {qmax}"
        )
    vector = tuple(dual_basis[0])

    pairs = tuple(sorted(set(used) | set(dual_used)))
    used_qs = {q for q, _ in pairs}
    holdout = []
    for q in good_q:
        if q not in used_qs:
            holdout.append((q, trace_of_frobenius(E, q)))
            if len(holdout) >= holdout_count:
                break
    for q, aq in holdout:
        T = space.hecke_full(q)
        assert _is_eigen_column(T, column, aq), f"held-out T_{q} fails on the column"
        assert _is_eigen_row(T, vector, aq), f"held-out T_{q} fails on the functional"
    # cuspidality of the eigenline
    for row in space.boundary:
        assert sum(Fraction(c) * x for c, x in zip(row, column)) == 0

    status, unit = "uncalibrated", Fraction(1)
    if calibrate:
        _, rec = lseries.lratio(E)
        if rec is not None and rec != 0:
            sym0 = EigenSymbol(
                space, E, vector, column, pairs, tuple(holdout), tuple(chain),
                "uncalibrated", Fraction(1),
            )
            raw0 = sym0.raw_value(0, 1)
            if raw0 == 0:
                raise CalibrationError(
                    "L(E,1) != 0 numerically but the symbol vanishes at {oo -> 0}"
                )
            status, unit = "calibrated", rec / raw0
    return EigenSymbol(
        space, E, vector, column, pairs, tuple(holdout), tuple(chain), status, unit
    )


def _is_eigen_column(T, v, aq):
    n = len(T)
    for r in range(n):
        if sum(T[r][j] * v[j] for j in range(n)) != aq * v[r]:
            return False
    return True


def _is_eigen_row(T, w, aq):
    n = len(T)
    for c in range(n):
        if sum(w[r] * T[r][c] for r in range(n)) != aq * w[c]:
            return False
    return True


def fricke_eigenvalue(symbol):
    """Eigenvalue of the Fricke involution on the eigensymbol line (+1 or -1)."""
    W = symbol.space.fricke_matrix()
    w = symbol.vector
    n = len(w)
    img = [sum(Fraction(w[r]) * W[r][c] for r in range(n)) for c in range(n)]
    eps = None
    for x, y in zip(img, w):
        if y:
            eps = Fraction(x, y) if x else Fraction(0)
            break
    if eps is None:
        raise FrickeNotScalar("eigensymbol is zero")
    for x, y in zip(img, w):
        if Fraction(x) != eps * y:
            raise FrickeNotScalar("Fricke image is not a scalar multiple; convention bug")
    if eps not in (1, -1):
        raise FrickeNotScalar(f"Fricke eigenvalue {eps} is not a sign")
    return int(eps)


# ---------------------------------------------------------------------------
# cache round-trip


def symbol_to_json(symbol):
    return symbol.to_json()


def symbol_from_json(obj, E):
    """Rebuild an EigenSymbol from its cache entry (space is reconstructed)."""
    space = ManinSpace(obj["N"], obj["sign"])
    assert space.dim == obj["basis_dim"], "cache schema/level mismatch"
    vector = tuple(int(x) for x in obj["vector"])
    pairs = tuple((int(q), int(aq)) for q, aq in obj["hecke_pairs"])

    def stream():
        for q, aq in pairs:
            yield q, aq, space.hecke_full(q)

    col_basis, _, chain = _intersect_eigenspace(stream(), space.cuspidal_basis, space.dim)
    assert len(col_basis) == 1, "cached hecke pairs no longer cut a line"
    num, den = obj["calibration"]["unit"].split("/")
    return EigenSymbol(
        space,
        E,
        vector,
        tuple(col_basis[0]),
        pairs,
        (),
        tuple(chain),
        obj["calibration"]["status"],
        Fraction(int(num), int(den)),
    )
