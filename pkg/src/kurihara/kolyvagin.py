"""Kolyvagin primes and Kurihara numbers.

The sieve picks the primes l with l = 1 mod p^max(m, n+1) whose reduction has
cyclic p^m-torsion; each carries a fixed generator h_l of (Z/l)^* and discrete
logarithms to that base.  delta_d is then computed by three routes: the direct
weighted sum over (Z/d)^*, the transport through the p-part quotient
Gal(Q(d)/Q), and the Kolyvagin-derivative expansion, which also certifies the
closed-form identity the transport rests on.
"""

from dataclasses import dataclass
from math import gcd, isqrt

from .curve import count_points, p_torsion_structure, primes_upto
from .errors import (
    DenominatorDivisibleByP,
    HypothesisViolation,
    NotAUnit,
    NotSquarefree,
    PrimeNotKolyvagin,
)
from .exactmath import (
    AbelianGroup,
    GroupRingElement,
    ResidueRing,
    factorize,
    is_prime,
    primitive_root,
)

DLOG_TABLE_LIMIT = 1 << 16  # full table below, baby-step/giant-step above


@dataclass
class KolyvaginPrime:
    """A sieved prime with its generator and discrete-log context."""

    ell: int
    p: int
    m: int
    n: int
    generator: int
    _table: dict = None

    def __post_init__(self):
        if self.ell <= DLOG_TABLE_LIMIT and self._table is None:
            t = {}
            x = 1
            for i in range(self.ell - 1):
                t[x] = i
                x = x * self.generator % self.ell
            self._table = t

    @property
    def p_part_order(self):
        k = 1
        n = self.ell - 1
        while n % self.p == 0:
            n //= self.p
            k *= self.p
        return k

    def dlog(self, a):
        """Exponent k with generator^k = a mod ell, in Z/(ell-1)."""
        a %= self.ell
        if a == 0:
            raise NotAUnit(f"{a} is not a unit mod {self.ell}")
        if self._table is not None:
            return self._table[a]
        # baby-step giant-step
        l, g = self.ell, self.generator
        w = isqrt(l - 1) + 1
        baby = {}
        x = 1
        for j in range(w):
            baby.setdefault(x, j)
            x = x * g % l
        ginv_w = pow(g, -(w), l)
        y = a
        for i in range(w + 1):
            j = baby.get(y)
            if j is not None:
                return (i * w + j) % (l - 1)
            y = y * ginv_w % l
        raise NotAUnit(f"no discrete log for {a} base {g} mod {l}")

    def dlog_mod(self, a, pk):
        """dlog reduced mod p^k; requires p^k | ell - 1."""
        assert (self.ell - 1) % pk == 0
        return self.dlog(a) % pk


def kolyvagin_predicate(E, ell, p, m=1, n=0):
    """Membership test for the sieve, evaluated from scratch."""
    if ell == p or not is_prime(ell) or E.discriminant % ell == 0:
        return False
    modulus = p ** max(m, n + 1)
    if (ell - 1) % modulus != 0:
        return False
    order = count_points(E, ell)
    if order % (p**m) != 0:
        return False
    kind, _ = p_torsion_structure(E, ell, p)
    return kind == "cyclic"


def sieve(E, p, m, n, bound, hypothesis_report=None, workers=1):
    """All Kolyvagin primes up to `bound` with their dlog contexts attached.

    Candidate predicates are independent per prime and may run on a worker
    pool; the returned list order is deterministic either way.
    """
    if hypothesis_report is not None and not hypothesis_report.passed:
        raise HypothesisViolation(f"hypotheses fail for ({E}, {p})")
    modulus = p ** max(m, n + 1)
    candidates = [
        ell
        for ell in (primes_upto(bound) if bound >= 2 else [])
        if (ell - 1) % modulus == 0
    ]
    if workers > 1 and len(candidates) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            flags = list(pool.map(
                lambda ell: kolyvagin_predicate(E, ell, p, m, n), candidates
            ))
    else:
        flags = [kolyvagin_predicate(E, ell, p, m, n) for ell in candidates]
    return [
        KolyvaginPrime(ell, p, m, n, primitive_root(ell))
        for ell, ok in zip(candidates, flags)
        if ok
    ]


def _factors_of(d, primes):
    fac = factorize(d)
    if any(e > 1 for e in fac.values()):
        raise NotSquarefree(f"{d} is not squarefree")
    ells = sorted(fac)
    for ell in ells:
        if ell not in primes:
            raise PrimeNotKolyvagin(f"{ell} | d was not produced by the sieve")
    return ells


@dataclass
class KuriharaNumber:
    d: int
    factors: tuple
    value: int  # element of Z/p^m
    p: int
    m: int
    route: str
    generators: dict

    @property
    def nonzero(self):
        return self.value % self.p**self.m != 0

    def to_json(self):
        return {
            "d": self.d,
            "factors": list(self.factors),
            "delta": self.value,
            "route": self.route,
            "generators": {str(l): g for l, g in self.generators.items()},
        }


def kurihara_number_direct(symbol, primes, d, p=None, m=1):
    """delta_d as the plain weighted sum over units a mod d.

    Weights are products over l | d of the discrete log of a base h_l, taken
    mod p^m; the empty product makes delta_1 the L-value mod p^m.  The sum is
    taken straight from the plus-symbol values, with no group-ring machinery,
    so it stays independent of the via-e_d route.
    """
    from math import gcd as _gcd

    from .modsym import eval_plus

    primes = {kp.ell: kp for kp in primes} if not isinstance(primes, dict) else primes
    p = p if p is not None else next(iter(primes.values())).p if primes else None
    assert p is not None, "p must be supplied when the prime set is empty"
    ring = ResidueRing(p, m)
    ells = _factors_of(d, primes) if d > 1 else []
    pk = p**m
    total = 0
    for a in range(1, d + 1):
        if d > 1 and _gcd(a, d) != 1:
            continue
        try:
            coeff = ring.coerce(eval_plus(symbol, a, d))
        except DenominatorDivisibleByP as exc:
            raise DenominatorDivisibleByP(
                f"theta at level {d} is not p-integral: {exc}"
            ) from exc
        if not coeff:
            continue
        weight = 1
        for ell in ells:
            weight = weight * primes[ell].dlog_mod(a, pk) % pk
        total = (total + coeff * weight) % pk
    gens = {ell: primes[ell].generator for ell in ells}
    return KuriharaNumber(d, tuple(ells), total, p, m, "direct", gens)


def _project_theta(symbol, primes, d, p, m):
    """Image of theta_d in Z/p^m[Gal(Q(d)/Q)], via per-prime discrete logs.

    Gal(Q(d)/Q) = prod of the p-parts G_l; sigma_a lands on the tuple of
    discrete logs of a reduced mod the p-part orders.
    """
    from math import gcd as _gcd

    from .modsym import eval_plus

    ells = _factors_of(d, primes) if d > 1 else []
    orders = [primes[ell].p_part_order for ell in ells]
    quotient = AbelianGroup(tuple(orders))
    ring = ResidueRing(p, m)
    coeffs = {}
    for a in range(1, d + 1):
        if d > 1 and _gcd(a, d) != 1:
            continue
        try:
            coeff = ring.coerce(eval_plus(symbol, a, d))
        except DenominatorDivisibleByP as exc:
            raise DenominatorDivisibleByP(
                f"theta at level {d} is not p-integral: {exc}"
            ) from exc
        key = tuple(
            primes[ell].dlog(a) % orders[i] for i, ell in enumerate(ells)
        )
        coeffs[key] = (coeffs.get(key, 0) + coeff) % ring.modulus
    return GroupRingElement(quotient, ring, coeffs), quotient, ells, orders


def kurihara_number_via_ed(symbol, primes, d, p=None, m=1):
    """delta_d through the p-part quotient and transported generators.

    theta_d is pushed to Z/p^m[Gal(Q(d)/Q)]; logs are taken to the base
    g_l = image of h_l^{e_d} with e_d = #Gal(Q(mu_d)/Q(d)), and the unit
    e_d^{nu(d)} rescales the sum back to the direct-route value.
    """
    primes = {kp.ell: kp for kp in primes} if not isinstance(primes, dict) else primes
    p = p if p is not None else next(iter(primes.values())).p if primes else None
    assert p is not None
    pk = p**m
    projected, quotient, ells, orders = _project_theta(symbol, primes, d, p, m)
    e_d = 1
    for ell in ells:
        e_d *= (ell - 1) // primes[ell].p_part_order
    # log base g_l = image of h_l^{e_d}: coordinate times e_d^{-1}
    ed_inv = pow(e_d, -1, pk)
    total = 0
    for g, coeff in projected.coeffs.items():
        weight = 1
        for coord in g:
            weight = weight * (coord * ed_inv) % pk
        total = (total + coeff * weight) % pk
    total = total * pow(e_d % pk, len(ells), pk) % pk
    gens = {ell: primes[ell].generator for ell in ells}
    return KuriharaNumber(d, tuple(ells), total, p, m, "via_ed", gens)


@dataclass
class DerivativeData:
    norm_coefficient: int  # coefficient at the identity of D_d theta_d mod p
    closed_form: int       # (-1)^nu(d) sum a_sigma prod log_{g_l}(sigma)
    is_norm_multiple: bool  # expansion == closed_form * N_d exactly
    nonzero: bool           # D_d theta_d mod p != 0 as a whole element


def derivative_data(symbol, primes, d, p=None):
    """Literal expansion of D_d theta_d in F_p[Gal(Q(d)/Q)].

    D_l = sum i g_l^i with g_l the image of h_l^{e_d}; the product of the D_l
    is convolved against the projected theta_d and compared with the closed
    form (-1)^nu(d) sum a_sigma prod log_{g_l}(sigma) times the norm element.
    """
    primes = {kp.ell: kp for kp in primes} if not isinstance(primes, dict) else primes
    p = p if p is not None else next(iter(primes.values())).p if primes else None
    assert p is not None
    projected, quotient, ells, orders = _project_theta(symbol, primes, d, p, 1)
    ring = ResidueRing(p, 1)
    e_d = 1
    for ell in ells:
        e_d *= (ell - 1) // primes[ell].p_part_order
    deriv = GroupRingElement.one(quotient, ring)
    for i, ell in enumerate(ells):
        order = orders[i]
        gl = tuple(e_d % order if j == i else 0 for j in range(len(ells)))
        term = {}
        acc = quotient.identity
        for k in range(order):
            if k:
                term[acc] = k % p
            acc = quotient.mul(acc, gl)
        deriv = deriv * GroupRingElement(quotient, ring, term)
    expansion = deriv * projected

    ed_inv = pow(e_d, -1, p)
    closed = 0
    for g, coeff in projected.coeffs.items():
        weight = 1
        for coord in g:
            weight = weight * (coord * ed_inv) % p
        closed = (closed + coeff * weight) % p
    closed = closed * pow(p - 1, len(ells), p) % p

    is_multiple = all(expansion.coefficient(g) == closed for g in quotient.elements())
    return DerivativeData(
        norm_coefficient=expansion.coefficient(quotient.identity),
        closed_form=closed,
        is_norm_multiple=is_multiple,
        nonzero=not expansion.is_zero(),
    )


def derivative_oracle(symbol, primes, d, p=None):
    """(coefficient of N_d in D_d theta_d mod p, closed-form consistency check)."""
    data = derivative_data(symbol, primes, d, p)
    return data.norm_coefficient, data.is_norm_multiple
