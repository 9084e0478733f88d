"""Elliptic-curve data over Q and point counting over prime fields.

A curve is carried as an integral Weierstrass model with its conductor and
Tamagawa product supplied (not computed: no Tate's algorithm here).  Traces of
Frobenius come from exact point counting; the module also classifies the
p-primary part of E(F_l) far enough to recognise Kolyvagin primes and checks
the running hypotheses on (E, p).
"""

import json
import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from .errors import BadPrime, HypothesisViolation, NonInvertibleEll
from .exactmath import QQ, factorize, is_prime

NAIVE_COUNT_LIMIT = 10**6  # character-sum enumeration below, BSGS above


@dataclass(frozen=True)
class CurveData:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int
    tamagawa_product: int
    label: str = ""
    mod_p_surjective: tuple = ()

    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b2(self):
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self):
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self):
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self):
        return (
            self.a1 * self.a1 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3 * self.a3
            - self.a4 * self.a4
        )

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def validate(self, stated_discriminant=None):
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass model")
        if stated_discriminant is not None and stated_discriminant != self.discriminant:
            raise ValueError(
                f"stated discriminant {stated_discriminant} != computed {self.discriminant}"
            )
        if self.conductor < 1 or self.tamagawa_product < 1:
            raise ValueError("conductor and Tamagawa product must be positive")
        for q in factorize(self.conductor):
            if self.discriminant % q != 0:
                raise ValueError(f"conductor prime {q} does not divide the discriminant")
        return self

    def bad_primes(self):
        return sorted(factorize(self.conductor))

    def __str__(self):
        return self.label or f"E{self.ainvs()}"


def curve_from_json(obj):
    a1, a2, a3, a4, a6 = obj["ainvs"]
    E = CurveData(
        a1, a2, a3, a4, a6,
        conductor=obj["conductor"],
        tamagawa_product=obj["tamagawa_product"],
        label=obj.get("label", ""),
        mod_p_surjective=tuple(obj.get("mod_p_surjective", ())),
    )
    return E.validate(obj.get("discriminant"))


def load_curve(path):
    with open(path) as f:
        return curve_from_json(json.load(f))


# ---------------------------------------------------------------------------
# arithmetic of points over F_l (general Weierstrass model; None = infinity)


def on_curve(E, l, P):
    if P is None:
        return True
    x, y = P
    lhs = (y * y + E.a1 * x * y + E.a3 * y) % l
    rhs = (x**3 + E.a2 * x * x + E.a4 * x + E.a6) % l
    return lhs == rhs


def ec_neg(E, l, P):
    if P is None:
        return None
    x, y = P
    return (x, (-y - E.a1 * x - E.a3) % l)


def ec_add(E, l, P, Q):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and (y1 + y2 + E.a1 * x1 + E.a3) % l == 0:
        return None
    if P == Q:
        num = (3 * x1 * x1 + 2 * E.a2 * x1 + E.a4 - E.a1 * y1) % l
        den = (2 * y1 + E.a1 * x1 + E.a3) % l
    else:
        num = (y2 - y1) % l
        den = (x2 - x1) % l
    lam = num * pow(den, -1, l) % l
    x3 = (lam * lam + E.a1 * lam - E.a2 - x1 - x2) % l
    y3 = (-(lam + E.a1) * x3 + lam * x1 - y1 - E.a3) % l
    return (x3, y3)


def ec_mul(E, l, k, P):
    if k < 0:
        return ec_mul(E, l, -k, ec_neg(E, l, P))
    R = None
    while k:
        if k & 1:
            R = ec_add(E, l, R, P)
        P = ec_add(E, l, P, P)
        k >>= 1
    return R


def jacobi(a, n):
    """Jacobi symbol (a/n) for odd n > 0."""
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def sqrt_mod(a, l):
    """A square root of a mod prime l (Tonelli-Shanks), or None."""
    a %= l
    if a == 0:
        return 0
    if l == 2:
        return a
    if jacobi(a, l) != 1:
        return None
    if l % 4 == 3:
        return pow(a, (l + 1) // 4, l)
    q, s = l - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while jacobi(z, l) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, l), pow(a, q, l), pow(a, (q + 1) // 2, l)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % l
            i += 1
        b = pow(c, 1 << (m - i - 1), l)
        m, c = i, b * b % l
        t, r = t * c % l, r * b % l
    return r


def random_point(E, l, rng):
    """Uniform-enough random affine point of E(F_l) (l odd, good reduction)."""
    while True:
        x = rng.randrange(l)
        # complete the square: (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
        s = (4 * x**3 + E.b2 * x * x + 2 * E.b4 * x + E.b6) % l
        r = sqrt_mod(s, l)
        if r is None:
            continue
        if rng.randrange(2):
            r = -r % l
        y = (r - E.a1 * x - E.a3) * pow(2, -1, l) % l
        return (x, y)


# ---------------------------------------------------------------------------
# point counting


def _count_naive(E, l):
    if l == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                if (y * y + E.a1 * x * y + E.a3 * y - x**3 - E.a2 * x * x - E.a4 * x - E.a6) % 2 == 0:
                    n += 1
        return n
    b2, b4, b6 = E.b2 % l, (2 * E.b4) % l, E.b6 % l
    n = 1 + l
    for x in range(l):
        s = (((4 * x + b2) * x + b4) * x + b6) % l
        n += jacobi(s, l)
    return n


def _order_of_point(E, l, P, multiple):
    """Exact order of P given a multiple of it."""
    order = multiple
    for q in factorize(multiple):
        while order % q == 0 and ec_mul(E, l, order // q, P) is None:
            order //= q
    return order


def _count_bsgs(E, l, rng):
    """#E(F_l) by baby-step/giant-step in the Hasse window (Shanks/Mestre)."""
    lo = l + 1 - 2 * isqrt(l)
    hi = l + 1 + 2 * isqrt(l)
    lcm_orders = 1
    while True:
        P = random_point(E, l, rng)
        # find all multiples of P's order in the Hasse window
        width = hi - lo + 1
        w = isqrt(width) + 1
        Q = ec_mul(E, l, lo, P)
        baby = {}
        R = None
        for j in range(w):
            key = R
            baby.setdefault(key, j)
            R = ec_add(E, l, R, P)
        G = ec_mul(E, l, w, P)
        hits = []
        S = Q
        k = 0
        while lo + k * w <= hi:
            # S = (lo + k*w) P; S + j P = O  <=>  -S appears in the baby table
            j = baby.get(ec_neg(E, l, S))
            if j is not None and lo + k * w + j <= hi:
                hits.append(lo + k * w + j)
            S = ec_add(E, l, S, G)
            k += 1
        assert hits, "group order must appear in the Hasse window"
        order = _order_of_point(E, l, P, hits[0])
        lcm_orders = lcm_orders * order // gcd(lcm_orders, order)
        candidates = [m for m in range(lo + (-lo) % lcm_orders, hi + 1, lcm_orders)]
        if len(candidates) == 1:
            return candidates[0]


def count_points(E, l, rng=None):
    """#E(F_l) for a prime of good reduction, including the point at infinity."""
    if not is_prime(l):
        raise BadPrime(f"{l} is not prime")
    if E.discriminant % l == 0:
        raise BadPrime(f"{l} divides the discriminant")
    if l <= NAIVE_COUNT_LIMIT:
        return _count_naive(E, l)
    return _count_bsgs(E, l, rng or random.Random(l))


def trace_of_frobenius(E, l):
    return l + 1 - count_points(E, l)


@dataclass
class ApTable:
    good: dict
    bad: set


_ap_cache = {}
_ap_lock = threading.Lock()


def ap_table(E, bound):
    """a_l for all good primes l <= bound; bad primes are marked separately.

    Concurrent readers are safe; the cache takes a lock for its single writer.
    """
    assert bound >= 2
    key = (E.ainvs(), E.conductor)
    with _ap_lock:
        cached = _ap_cache.get(key)
        if cached is None:
            cached = ApTable({}, set())
            _ap_cache[key] = cached
    missing = [l for l in _primes_upto(bound) if l not in cached.good and l not in cached.bad]
    if missing:
        newgood, newbad = {}, set()
        for l in missing:
            if E.discriminant % l == 0:
                newbad.add(l)
            else:
                newgood[l] = trace_of_frobenius(E, l)
        with _ap_lock:
            cached.good.update(newgood)
            cached.bad.update(newbad)
    return ApTable(
        {l: a for l, a in cached.good.items() if l <= bound},
        {l for l in cached.bad if l <= bound},
    )


def _primes_upto(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(2, n + 1) if sieve[i]]


def primes_upto(n):
    return _primes_upto(n)


# ---------------------------------------------------------------------------
# hypotheses (a), (b), (c)


@dataclass
class HypothesisReport:
    p: int
    ordinary: bool          # (a): p good and a_p != 0 mod p
    points_ok: bool         # (c): p does not divide #E(F_p)
    tamagawa_ok: bool       # (c): p does not divide the Tamagawa product
    surjectivity: str       # (b): "asserted" | "heuristically-confirmed" | "unknown"
    ap: int = 0

    @property
    def passed(self):
        return (
            self.ordinary
            and self.points_ok
            and self.tamagawa_ok
            and self.surjectivity in ("asserted", "heuristically-confirmed")
        )

    def to_json(self):
        return {
            "p": self.p,
            "ordinary": self.ordinary,
            "points_ok": self.points_ok,
            "tamagawa_ok": self.tamagawa_ok,
            "surjectivity": self.surjectivity,
            "ap": self.ap,
            "passed": self.passed,
        }


def _surjectivity_heuristic(E, p, scan_bound=1000):
    """Sufficient criterion for mod-p surjectivity from Frobenius samples.

    Looks for (i) an irreducible characteristic polynomial x^2 - a_l x + l
    mod p, (ii) a split sample with eigenvalue ratio not +-1, and (iii) full
    determinant image (the l mod p generate (Z/p)^*).  All three together
    rule out the proper subgroup classes of GL_2(F_p) for p >= 5; for p = 3
    the verdict stays heuristic and is reported, never silently passed.
    """
    seen_irreducible = False
    seen_split_generic = False
    det_subgroup = {1 % p}
    table = ap_table(E, scan_bound)
    for l, a in sorted(table.good.items()):
        if l == p:
            continue
        disc = (a * a - 4 * l) % p
        if jacobi(disc, p) == -1:
            seen_irreducible = True
        elif disc % p != 0:
            s = sqrt_mod(disc, p)
            e1 = (a + s) * pow(2, -1, p) % p
            e2 = (a - s) * pow(2, -1, p) % p
            if e1 % p and e2 % p:
                ratio = e1 * pow(e2, -1, p) % p
                if ratio not in (1 % p, (p - 1) % p):
                    seen_split_generic = True
        new = {l % p}
        frontier = set(det_subgroup)
        while new:
            x = new.pop()
            if x in frontier:
                continue
            frontier.add(x)
            new.update({x * y % p for y in frontier})
        det_subgroup = frontier
        if seen_irreducible and seen_split_generic and len(det_subgroup) == p - 1:
            return True
    return False


def check_hypotheses(E, p, scan_bound=1000):
    """Report on hypotheses (a)-(c) for the pair (E, p)."""
    if p < 3:
        raise BadPrime("p must be an odd prime >= 3")
    if not is_prime(p):
        raise BadPrime(f"{p} is not prime")
    if E.discriminant % p == 0:
        raise BadPrime(f"{p} is a prime of bad reduction")
    a_p = trace_of_frobenius(E, p)
    ordinary = E.conductor % p != 0 and a_p % p != 0
    points_ok = (p + 1 - a_p) % p != 0
    tamagawa_ok = E.tamagawa_product % p != 0
    if p in E.mod_p_surjective:
        verdict = "asserted"
    elif _surjectivity_heuristic(E, p, scan_bound):
        verdict = "heuristically-confirmed"
    else:
        verdict = "unknown"
    return HypothesisReport(p, ordinary, points_ok, tamagawa_ok, verdict, ap=a_p)


def require_hypotheses(E, p):
    report = check_hypotheses(E, p)
    if not report.passed:
        raise HypothesisViolation(f"hypotheses fail for ({E}, p={p}): {report.to_json()}")
    return report


def frobenius_poly(E, l, ring=QQ):
    """Coefficients (1, -a_l/l, 1/l) of t^2 - l^{-1} a_l t + l^{-1} in `ring`."""
    a = trace_of_frobenius(E, l)
    if ring == QQ:
        return (Fraction(1), Fraction(-a, l), Fraction(1, l))
    if l % ring.p == 0:
        raise NonInvertibleEll(f"{l} is not invertible in {ring}")
    linv = ring.inv(ring.coerce(l))
    return (ring.one, ring.mul(ring.neg(ring.coerce(a)), linv), linv)


# ---------------------------------------------------------------------------
# division polynomials and the p-primary structure of E(F_l)


def _polytrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymul(a, b, l):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % l
    return _polytrim(out)


def _polysub(a, b, l):
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] = x
    for i, y in enumerate(b):
        out[i] = (out[i] - y) % l
    return _polytrim(out)


def _polymod(a, b, l):
    a = list(a)
    db, lead = len(b) - 1, b[-1]
    inv = pow(lead, -1, l)
    while len(a) - 1 >= db and a:
        c = a[-1] * inv % l
        shift = len(a) - 1 - db
        for i, y in enumerate(b):
            a[shift + i] = (a[shift + i] - c * y) % l
        _polytrim(a)
    return a


def _polygcd(a, b, l):
    a, b = list(a), list(b)
    while b:
        a, b = b, _polymod(a, b, l)
    if a:
        inv = pow(a[-1], -1, l)
        a = [x * inv % l for x in a]
    return a


def _polypow_mod(base, e, mod, l):
    result = [1]
    base = _polymod(list(base), mod, l)
    while e:
        if e & 1:
            result = _polymod(_polymul(result, base, l), mod, l)
        base = _polymod(_polymul(base, base, l), mod, l)
        e >>= 1
    return result


def division_polynomial(E, n, l):
    """psi_n mod l for odd n, as a polynomial in x (list of coefficients).

    Uses the b-invariant recurrences with psi_2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6.
    """
    b2, b4, b6, b8 = E.b2 % l, E.b4 % l, E.b6 % l, E.b8 % l
    B = [b6, 2 * b4 % l, b2, 4 % l]  # psi_2^2
    cache = {}

    def psi(k):
        # value: (poly, e) meaning poly * psi_2^e with e in {0, 1}
        if k in cache:
            return cache[k]
        if k == 0:
            v = ([], 0)
        elif k == 1:
            v = ([1], 0)
        elif k == 2:
            v = ([1], 1)
        elif k == 3:
            v = (_polytrim([b8, 3 * b6 % l, 3 * b4 % l, b2, 3 % l]), 0)
        elif k == 4:
            poly = _polytrim(
                [
                    (b4 * b8 - b6 * b6) % l,
                    (b2 * b8 - b4 * b6) % l,
                    10 * b8 % l,
                    10 * b6 % l,
                    5 * b4 % l,
                    b2,
                    2 % l,
                ]
            )
            v = (poly, 1)
        elif k % 2 == 1:
            m = (k - 1) // 2
            a_, ae = psi(m + 2)
            b_, be = psi(m)
            c_, ce = psi(m - 1)
            d_, de = psi(m + 1)
            t1 = _polymul(a_, _polymul(b_, _polymul(b_, b_, l), l), l)
            e1 = ae + 3 * be
            t2 = _polymul(c_, _polymul(d_, _polymul(d_, d_, l), l), l)
            e2 = ce + 3 * de
            # both sides have the same psi_2 parity; reduce psi_2^2 -> B
            while e1 >= 2:
                t1 = _polymul(t1, B, l)
                e1 -= 2
            while e2 >= 2:
                t2 = _polymul(t2, B, l)
                e2 -= 2
            assert e1 == e2 == 0  # odd-index psi is a polynomial in x
            v = (_polysub(t1, t2, l), 0)
        else:
            # psi_2m = psi_m (psi_{m+2} psi_{m-1}^2 - psi_{m-2} psi_{m+1}^2) / psi_2;
            # both products carry the same raw psi_2 power, and the total power
            # before division is always 2, so no polynomial division is needed.
            m = k // 2
            a_, ae = psi(m + 2)
            b_, be = psi(m - 1)
            c_, ce = psi(m - 2)
            d_, de = psi(m + 1)
            e_, ee = psi(m)
            t1 = _polymul(a_, _polymul(b_, b_, l), l)
            e1 = ae + 2 * be
            t2 = _polymul(c_, _polymul(d_, d_, l), l)
            e2 = ce + 2 * de
            assert e1 == e2 and ee + e1 == 2
            v = (_polymul(e_, _polysub(t1, t2, l), l), 1)
        cache[k] = v
        return v

    assert n % 2 == 1
    poly, e = psi(n)
    assert e == 0
    return poly


def full_p_torsion_deterministic(E, l, p):
    """True iff E(F_l) contains (Z/p)^2, via the p-division polynomial.

    Full rational p-torsion needs every root of psi_p in F_l (checked through
    gcd with x^l - x) and a rational y above each root (quadratic characters,
    batched as (4x^3+b2x^2+2b4x+b6)^((l-1)/2) = 1 mod psi_p).
    """
    if (l - 1) % p != 0:
        return False  # Weil pairing forces mu_p in F_l
    psi = division_polynomial(E, p, l)
    deg = len(psi) - 1
    assert deg == (p * p - 1) // 2
    xl = _polypow_mod([0, 1], l, psi, l)
    g = _polygcd(_polysub(xl, [0, 1], l), psi, l)
    if len(g) - 1 != deg:
        return False
    B = [E.b6 % l, 2 * E.b4 % l, E.b2 % l, 4 % l]
    s = _polypow_mod(B, (l - 1) // 2, psi, l)
    return s == [1]


def p_torsion_structure(E, l, p, rng=None):
    """Classify the p^infinity-part of E(F_l): 'trivial', 'cyclic', or 'full'.

    'full' means E(F_l) contains (Z/p)^2.  The random-sampling fast path looks
    for two independent p-torsion points; inconclusive sampling falls back to
    the deterministic division-polynomial test.
    """
    if E.discriminant % l == 0 or l == p:
        raise BadPrime(f"{l} is bad or equals p")
    order = count_points(E, l)
    n = order
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    if v == 0:
        return ("trivial", 0)
    if v == 1 or (l - 1) % p != 0:
        return ("cyclic", v)
    rng = rng or random.Random(l * 1000003 + p)
    cofactor = order // p**v
    first = None
    for _ in range(32):
        P = random_point(E, l, rng)
        Q = ec_mul(E, l, cofactor, P)
        if Q is None:
            continue
        # reduce Q to exact p-torsion
        while True:
            R = ec_mul(E, l, p, Q)
            if R is None:
                break
            Q = R
        if first is None:
            first = Q
            first_orbit = set()
            S = None
            for _ in range(p):
                S = ec_add(E, l, S, first)
                first_orbit.add(S)
            continue
        if Q not in first_orbit:
            return ("full", v)
    return ("full" if full_p_torsion_deterministic(E, l, p) else "cyclic", v)


# ---------------------------------------------------------------------------
# a_q at bad primes (only needed by the L-series plumbing)


def bad_prime_aq(E, q):
    """a_q for q | N: 0 if additive, +-1 for split/non-split multiplicative."""
    if E.conductor % (q * q) == 0:
        return 0
    # count nonsingular points: for multiplicative reduction the singular
    # point contributes exactly one affine solution, so the character sum
    # already counts #E^ns(F_q) - 1 affine points
    if q == 2:
        n = 0
        for x in range(2):
            for y in range(2):
                if (y * y + E.a1 * x * y + E.a3 * y - x**3 - E.a2 * x * x - E.a4 * x - E.a6) % 2 == 0:
                    n += 1
        return 2 - n
    b2, b4, b6 = E.b2 % q, (2 * E.b4) % q, E.b6 % q
    n = 0
    for x in range(q):
        s = (((4 * x + b2) * x + b4) * x + b6) % q
        n += 1 + jacobi(s, q)
    return q - n
