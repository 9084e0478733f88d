"""Mazur-Tate modular elements and their ordinary stabilizations.

theta(d, n) collects the plus-symbol values over (Z/dp^n)^*; vartheta applies
the unit-root stabilization, xi_tilde assembles the Kurihara combination over
the divisor lattice of d.  Everything is a finite truncation: the projective
limits exist only level-by-level here, and the limit relations are exercised
as finite identities by the verifier suite.
"""

from dataclasses import dataclass

from .curve import trace_of_frobenius
from .errors import (
    BadPrime,
    DenominatorDivisibleByP,
    HypothesisViolation,
    NonInvertibleEll,
    NotSquarefree,
    Supersingular,
)
from .exactmath import (
    QQ,
    GroupRingElement,
    ResidueRing,
    factorize,
    norm_map,
    unit_group,
    unit_reduction,
)
from .modsym import eval_plus


@dataclass(frozen=True)
class UnitRoot:
    p: int
    m: int
    alpha: int  # unit root of x^2 - a_p x + p in Z/p^m

    @property
    def ring(self):
        return ResidueRing(self.p, self.m)


def unit_root(E, p, m):
    """Hensel lift of the unit root of x^2 - a_p x + p to Z/p^m."""
    if E.discriminant % p == 0:
        raise BadPrime(f"{p} is a prime of bad reduction")
    a_p = trace_of_frobenius(E, p)
    if a_p % p == 0:
        raise Supersingular(f"a_p = {a_p} = 0 mod {p}")
    mod = p**m
    x = a_p % p
    for _ in range(m + 1):
        f = (x * x - a_p * x + p) % mod
        df = (2 * x - a_p) % mod
        x = (x - f * pow(df, -1, mod)) % mod
    assert (x * x - a_p * x + p) % mod == 0
    assert x % p != 0
    if x % p == 1 % p:
        raise HypothesisViolation(
            "unit root is 1 mod p; hypothesis (c) fails (p | #E(F_p))"
        )
    return UnitRoot(p, m, x)


def _check_level(E, d, p=None):
    fac = factorize(d)
    if any(e > 1 for e in fac.values()):
        raise NotSquarefree(f"{d} is not squarefree")
    for ell in fac:
        if E.discriminant % ell == 0:
            raise BadPrime(f"{ell} | d is a prime of bad reduction")
        if p is not None and ell == p:
            raise BadPrime(f"d = {d} is not coprime to p = {p}")


@dataclass
class ThetaElement:
    """theta over Q(mu_{d p^n}): sigma_a-coefficient is the value [a/(d p^n)]+."""

    d: int
    n: int
    p: int
    element: GroupRingElement  # rational coefficients over (Z/dp^n)^*
    curve_label: str = ""

    @property
    def level(self):
        return self.d * (self.p**self.n if self.n else 1)

    def reduce_mod(self, p, m):
        """Coefficients in Z/p^m; a denominator divisible by p is a hard error."""
        ring = ResidueRing(p, m)
        try:
            return self.element.change_ring(ring)
        except DenominatorDivisibleByP as exc:
            raise DenominatorDivisibleByP(
                f"theta at level {self.level} is not p-integral: {exc}"
            ) from exc


def theta(symbol, d, n=0, p=None):
    """The modular element over (Z/dp^n)^* built from plus-symbol values.

    Cached per symbol and level: the identity suites revisit the same levels
    many times and the element is immutable.
    """
    E = symbol.curve
    if n > 0 and p is None:
        raise ValueError("n > 0 requires p")
    cache = getattr(symbol, "_theta_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(symbol, "_theta_cache", cache)
    key = (d, n, p)
    cached = cache.get(key)
    if cached is not None:
        return cached
    _check_level(E, d, p)
    level = d * (p**n if n else 1)
    group = unit_group(level)
    coeffs = {}
    for a in group.units():
        coeffs[group.sigma(a)] = eval_plus(symbol, a, level)
    elem = GroupRingElement(group, QQ, coeffs)
    out = ThetaElement(d, n, p if p is not None else 0, elem, str(E))
    cache[key] = out
    return out


def _sigma_ell(group, ell):
    """sigma_ell in (Z/D)^* for the level D of `group`.

    For ell | D (necessarily to the first power here), the Frobenius at ell
    only makes sense on the prime-to-ell component: take the class that is
    1 on mu_ell and ell elsewhere.  For ell coprime to D it is plain sigma_ell.
    """
    D = group.n
    if D % ell != 0:
        return group.sigma(ell)
    rest = D
    v = 0
    while rest % ell == 0:
        rest //= ell
        v += 1
    lv = ell**v
    if rest == 1:
        return group.identity
    # CRT: x = 1 mod ell^v, x = ell mod rest
    g, u, w = _xgcd(lv, rest)
    assert g == 1
    x = (1 * w * rest + (ell % rest) * u * lv) % D
    return group.sigma(x)


def _xgcd(a, b):
    from .exactmath import xgcd

    return xgcd(a, b)


def stabilization_scalar(group, root):
    """(1 - alpha^{-1} sigma_p)(1 - alpha^{-1} sigma_p^{-1}) over Z/p^m[group]."""
    ring = root.ring
    ainv = ring.inv(root.alpha)
    sp = group.sigma(root.p)
    one = GroupRingElement.one(group, ring)
    f1 = one - GroupRingElement.monomial(group, ring, sp, ainv)
    f2 = one - GroupRingElement.monomial(group, ring, group.inv(sp), ainv)
    return f1 * f2


def vartheta(symbol, d, n, p, m):
    """Ordinary-stabilized element at level d p^n with Z/p^m coefficients.

    For n >= 1 this is alpha^{-n} (theta_{dp^n} - alpha^{-1} nu(theta_{dp^{n-1}})).
    At n = 0 the stabilization degenerates to the scalar
    (1 - alpha^{-1} sigma_p)(1 - alpha^{-1} sigma_p^{-1}) acting on theta_d,
    which is taken as the definition of the bottom layer.
    """
    root = unit_root(symbol.curve, p, m)
    ring = root.ring
    ainv = ring.inv(root.alpha)
    if n == 0:
        th = theta(symbol, d, 0, p).reduce_mod(p, m)
        return stabilization_scalar(th.group, root) * th
    top = theta(symbol, d, n, p).reduce_mod(p, m)
    below = theta(symbol, d, n - 1, p).reduce_mod(p, m)
    hom = unit_reduction(top.group, below.group)
    lifted = norm_map(below, hom)
    diff = top - lifted.scale(ainv)
    return diff.scale(pow(ainv, n, ring.modulus))


def xi_tilde(symbol, d, n, p, m):
    """The Kurihara combination over the divisor lattice of squarefree d.

    xi = sum over e | d of nu_{d,e}((prod_{l | d/e} -sigma_l^{-1}) vartheta_e),
    then xi_tilde twists by prod_{l | d} (-l sigma_l)^{-1}.  Exactly 2^nu(d)
    terms enter the sum.
    """
    E = symbol.curve
    _check_level(E, d, p)
    ring = ResidueRing(p, m)
    primes = sorted(factorize(d))
    for ell in primes:
        if ell % p == 0:
            raise NonInvertibleEll(f"{ell} is not invertible mod {p}^{m}")
    top_group = unit_group(d * p**n if n else d)
    total = GroupRingElement.zero(top_group, ring)
    nterms = 0
    for mask in range(1 << len(primes)):
        e = 1
        for i, ell in enumerate(primes):
            if mask & (1 << i):
                e *= ell
        v = vartheta(symbol, e, n, p, m)
        for ell in primes:
            if e % ell:
                s_inv = v.group.inv(_sigma_ell(v.group, ell))
                v = v.translate(s_inv).scale(ring.neg(ring.one))
        hom = unit_reduction(top_group, v.group)
        total = total + norm_map(v, hom)
        nterms += 1
    assert nterms == 1 << len(primes)
    for ell in primes:
        s_inv = top_group.inv(_sigma_ell(top_group, ell))
        total = total.translate(s_inv).scale(ring.neg(ring.inv(ring.coerce(ell))))
    return total


def euler_factor(E, ell, group, ring):
    """(a_l - sigma_l - sigma_l^{-1}) as a group-ring element."""
    a = trace_of_frobenius(E, ell)
    s = group.sigma(ell)
    out = GroupRingElement.monomial(group, ring, group.identity, a)
    out = out - GroupRingElement.monomial(group, ring, s)
    out = out - GroupRingElement.monomial(group, ring, group.inv(s))
    return out


def frobenius_factor(E, ell, group, ring):
    """P_l(sigma_l^{-1}) = sigma_l^{-2} - l^{-1} a_l sigma_l^{-1} + l^{-1}."""
    a = trace_of_frobenius(E, ell)
    if not ring.is_unit(ring.coerce(ell)):
        raise NonInvertibleEll(f"{ell} not invertible in {ring}")
    linv = ring.inv(ring.coerce(ell))
    s_inv = group.inv(group.sigma(ell))
    out = GroupRingElement.monomial(group, ring, group.mul(s_inv, s_inv))
    out = out - GroupRingElement.monomial(group, ring, s_inv, ring.mul(linv, ring.coerce(a)))
    out = out + GroupRingElement.monomial(group, ring, group.identity, linv)
    return out
