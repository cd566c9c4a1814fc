"""Coefficient rings: exact arithmetic, endomorphisms, ring morphisms.

Four descriptor shapes cover every coefficient ring in the toolkit:

    PrimePower(p, N)                  Z/p^N
    FiniteField(p, f)                 F_{p^d}, d = deg f, f monic irreducible
    GaloisRing(p, N, f)               Z/p^N[t]/(f), the unramified extension
    TruncatedLaurent(base, low, high) window [-low, high) of base((X))

Descriptors are frozen dataclasses, so they hash and compare by value and the
module-level caches key on them directly.  Elements are plain data: an int
for PrimePower, a tuple of ints (coefficients of t^0 .. t^(d-1)) for the two
extension shapes, and a tuple of base elements indexed by X-exponent for the
Laurent window.  Every operation returns fully reduced data, so == on
elements is semantic equality.

Window semantics: products silently lose their X^high and higher terms, but
precision loss below the window is loud.  Any operation that would need a
nonzero coefficient under X^(-low) raises PrecisionExhausted.  Windows with
low > 0 support ring operations only; they are not honest quotients, so
inversion and the chain-ring interface refuse them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .config import CAPS
from .errors import (
    EndoDomainMismatch,
    LevelExceedsPrecision,
    MorphismDomainMismatch,
    NotAUnit,
    PrecisionExhausted,
    RingMismatch,
    SchemaError,
)


def _is_prime(n):
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _int_val(c, p, cap):
    """p-adic valuation of the integer c, capped at cap (val(0) = cap)."""
    if c == 0:
        return cap
    v = 0
    while c % p == 0 and v < cap:
        c //= p
        v += 1
    return v


class Ring:
    """Interface shared by the descriptor classes.

    Subclasses provide zero/one/el/add/neg/mul/invert plus the chain-ring
    and prime-subring hooks.  Everything here is derived convenience.
    """

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def pow_el(self, a, n):
        if n < 0:
            raise ValueError("negative exponent, invert explicitly instead")
        acc = self.one()
        while n:
            if n & 1:
                acc = self.mul(acc, a)
            n >>= 1
            if n:
                a = self.mul(a, a)
        return acc

    def is_unit(self, a):
        try:
            self.invert(a)
        except (NotAUnit, PrecisionExhausted):
            return False
        return True

    def is_chain(self):
        return False

    def is_field(self):
        return self.is_chain() and self.bound() == 1

    def bound(self):
        raise RingMismatch(f"{self.describe()} has no chain structure")

    def r_el(self):
        raise RingMismatch(f"{self.describe()} has no chain structure")

    def val(self, a):
        raise RingMismatch(f"{self.describe()} has no chain structure")

    def sum_list(self, items):
        acc = self.zero()
        for x in items:
            acc = self.add(acc, x)
        return acc

    def random_unit(self, rng):
        for _ in range(512):
            x = self.random_element(rng)
            if self.is_unit(x):
                return x
        raise NotAUnit(f"no unit found by sampling in {self.describe()}")


@dataclass(frozen=True)
class PrimePower(Ring):
    """Z/p^N with elements stored as ints in [0, p^N)."""

    p: int
    N: int

    @cached_property
    def modulus(self):
        return self.p ** self.N

    def describe(self):
        return f"Z/{self.modulus}"

    def zero(self):
        return 0

    def one(self):
        return 1 % self.modulus

    def from_int(self, c):
        return c % self.modulus

    def el(self, x):
        if isinstance(x, bool) or not isinstance(x, int):
            raise RingMismatch(f"{self.describe()} elements are ints, got {x!r}")
        return x % self.modulus

    def add(self, a, b):
        return (a + b) % self.modulus

    def neg(self, a):
        return -a % self.modulus

    def mul(self, a, b):
        return a * b % self.modulus

    def invert(self, a):
        """
        >>> PrimePower(2, 3).invert(3)
        3
        """
        if a % self.p == 0:
            raise NotAUnit(f"{a} is not a unit in {self.describe()}")
        return pow(a, -1, self.modulus)

    def is_chain(self):
        return True

    def bound(self):
        return self.N

    def r_el(self):
        return self.p % self.modulus

    def val(self, a):
        return _int_val(a, self.p, self.N)

    def r_split(self, a):
        """Split a as (unit, k) with a = unit * p^k; zero splits as (1, N).

        >>> PrimePower(2, 5).r_split(12)
        (3, 2)
        """
        if a == 0:
            return self.one(), self.N
        k = self.val(a)
        return a // self.p ** k, k

    def r_shift_down(self, a, k):
        return a // self.p ** k

    def level_ring(self, n):
        if not 1 <= n <= self.N:
            raise LevelExceedsPrecision(f"level {n} not in 1..{self.N}")
        return PrimePower(self.p, n)

    def reduce_to_level(self, a, n):
        return a % self.p ** n

    def lift_from_level(self, a, n):
        return a % self.modulus

    def prime_ring(self):
        return self

    def prime_rank(self):
        return 1

    def to_prime_vec(self, a):
        return [a]

    def from_prime_vec(self, v):
        return v[0] % self.modulus

    def generators(self):
        return [self.one()]

    def carrier_size(self):
        return self.modulus

    def enumerate_elements(self):
        return iter(range(self.modulus))

    def random_element(self, rng):
        return rng.randrange(self.modulus)

    def random_unit(self, rng):
        while True:
            x = rng.randrange(self.modulus)
            if x % self.p:
                return x


@lru_cache(maxsize=None)
def _t_reduction_table(f, m):
    """Images of t^d .. t^(2d-2) modulo monic f, coefficients mod m."""
    d = len(f) - 1
    red = tuple(-c % m for c in f[:d])
    table = [red]
    for _ in range(d - 2):
        prev = table[-1]
        top = prev[d - 1]
        nxt = [0] * d
        for i in range(1, d):
            nxt[i] = prev[i - 1]
        if top:
            for i in range(d):
                nxt[i] = (nxt[i] + top * red[i]) % m
        table.append(tuple(nxt))
    return tuple(table)


def _ext_mul(a, b, f, m):
    d = len(f) - 1
    conv = [0] * (2 * d - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    conv[i + j] += ai * bj
    out = [c % m for c in conv[:d]]
    if d > 1:
        table = _t_reduction_table(f, m)
        for k in range(d, 2 * d - 1):
            c = conv[k] % m
            if c:
                red = table[k - d]
                for i in range(d):
                    out[i] = (out[i] + c * red[i]) % m
    return tuple(out)


@dataclass(frozen=True)
class FiniteField(Ring):
    """F_{p^d} presented as F_p[t]/(f), f monic irreducible of degree d."""

    p: int
    f: tuple

    @property
    def d(self):
        return len(self.f) - 1

    @cached_property
    def q(self):
        return self.p ** self.d

    def describe(self):
        return f"F_{self.q}"

    def zero(self):
        return (0,) * self.d

    def one(self):
        return (1,) + (0,) * (self.d - 1)

    def from_int(self, c):
        return (c % self.p,) + (0,) * (self.d - 1)

    def el(self, x):
        if isinstance(x, int) and not isinstance(x, bool):
            return self.from_int(x)
        x = tuple(x)
        if len(x) != self.d:
            raise RingMismatch(
                f"{self.describe()} elements have {self.d} coefficients, got {len(x)}")
        return tuple(int(c) % self.p for c in x)

    def t_el(self):
        """The class of t (a constant when d = 1)."""
        if self.d == 1:
            return (-self.f[0] % self.p,)
        return (0, 1) + (0,) * (self.d - 2)

    def add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple(-x % p for x in a)

    def mul(self, a, b):
        return _ext_mul(a, b, self.f, self.p)

    def invert(self, a):
        if not any(a):
            raise NotAUnit(f"zero is not a unit in {self.describe()}")
        K = PrimePower(self.p, 1)
        inv = poly_invert_mod(K, list(a), list(self.f))
        return tuple(inv + [0] * (self.d - len(inv)))

    def is_chain(self):
        return True

    def bound(self):
        return 1

    def r_el(self):
        return self.zero()

    def val(self, a):
        return 0 if any(a) else 1

    def r_split(self, a):
        if not any(a):
            return self.one(), 1
        return a, 0

    def r_shift_down(self, a, k):
        return a

    def level_ring(self, n):
        if n != 1:
            raise LevelExceedsPrecision("a field only has level 1")
        return self

    def reduce_to_level(self, a, n):
        return a

    def lift_from_level(self, a, n):
        return a

    def prime_ring(self):
        return PrimePower(self.p, 1)

    def prime_rank(self):
        return self.d

    def to_prime_vec(self, a):
        return list(a)

    def from_prime_vec(self, v):
        p = self.p
        return tuple(c % p for c in v)

    def generators(self):
        return [self.t_el()]

    def carrier_size(self):
        return self.q

    def enumerate_elements(self):
        return itertools.product(range(self.p), repeat=self.d)

    def random_element(self, rng):
        p = self.p
        return tuple(rng.randrange(p) for _ in range(self.d))

    def random_unit(self, rng):
        while True:
            x = self.random_element(rng)
            if any(x):
                return x


@dataclass(frozen=True)
class GaloisRing(Ring):
    """GR(p^N, d) = Z/p^N[t]/(f), f the residue minimal polynomial.

    The residue coefficients of f (ints in [0, p)) are lifted verbatim, so
    one tuple describes both the residue field and the ring modulus.
    """

    p: int
    N: int
    f: tuple

    @property
    def d(self):
        return len(self.f) - 1

    @cached_property
    def coeff_modulus(self):
        return self.p ** self.N

    def describe(self):
        return f"GR({self.coeff_modulus},{self.d})"

    def residue_field(self):
        return FiniteField(self.p, self.f)

    def zero(self):
        return (0,) * self.d

    def one(self):
        return (1,) + (0,) * (self.d - 1)

    def from_int(self, c):
        return (c % self.coeff_modulus,) + (0,) * (self.d - 1)

    def el(self, x):
        if isinstance(x, int) and not isinstance(x, bool):
            return self.from_int(x)
        x = tuple(x)
        if len(x) != self.d:
            raise RingMismatch(
                f"{self.describe()} elements have {self.d} coefficients, got {len(x)}")
        m = self.coeff_modulus
        return tuple(int(c) % m for c in x)

    def t_el(self):
        if self.d == 1:
            return (-self.f[0] % self.coeff_modulus,)
        return (0, 1) + (0,) * (self.d - 2)

    def add(self, a, b):
        m = self.coeff_modulus
        return tuple((x + y) % m for x, y in zip(a, b))

    def neg(self, a):
        m = self.coeff_modulus
        return tuple(-x % m for x in a)

    def mul(self, a, b):
        return _ext_mul(a, b, self.f, self.coeff_modulus)

    def invert(self, a):
        Fq = self.residue_field()
        try:
            x = Fq.invert(tuple(c % self.p for c in a))
        except NotAUnit:
            raise NotAUnit(f"not a unit in {self.describe()}") from None
        # Newton lift, doubles p-adic precision each step
        two = self.from_int(2)
        for _ in range((self.N - 1).bit_length()):
            x = self.mul(x, self.sub(two, self.mul(a, x)))
        return x

    def is_chain(self):
        return True

    def bound(self):
        return self.N

    def r_el(self):
        return self.from_int(self.p)

    def val(self, a):
        v = self.N
        for c in a:
            if c:
                vc = _int_val(c, self.p, self.N)
                if vc < v:
                    v = vc
                    if v == 0:
                        break
        return v

    def r_split(self, a):
        k = self.val(a)
        if k == self.N:
            return self.one(), self.N
        pk = self.p ** k
        return tuple(c // pk for c in a), k

    def r_shift_down(self, a, k):
        pk = self.p ** k
        return tuple(c // pk for c in a)

    def level_ring(self, n):
        if not 1 <= n <= self.N:
            raise LevelExceedsPrecision(f"level {n} not in 1..{self.N}")
        return GaloisRing(self.p, n, self.f)

    def reduce_to_level(self, a, n):
        pn = self.p ** n
        return tuple(c % pn for c in a)

    def lift_from_level(self, a, n):
        m = self.coeff_modulus
        return tuple(c % m for c in a)

    def prime_ring(self):
        return PrimePower(self.p, self.N)

    def prime_rank(self):
        return self.d

    def to_prime_vec(self, a):
        return list(a)

    def from_prime_vec(self, v):
        m = self.coeff_modulus
        return tuple(c % m for c in v)

    def generators(self):
        return [self.t_el()]

    def carrier_size(self):
        return self.coeff_modulus ** self.d

    def enumerate_elements(self):
        return itertools.product(range(self.coeff_modulus), repeat=self.d)

    def random_element(self, rng):
        m = self.coeff_modulus
        return tuple(rng.randrange(m) for _ in range(self.d))

    def random_unit(self, rng):
        while True:
            x = self.random_element(rng)
            if any(c % self.p for c in x):
                return x


@dataclass(frozen=True)
class TruncatedLaurent(Ring):
    """Window [-low, high) of base((X)); see the module docstring."""

    base: Ring
    low: int
    high: int

    @property
    def window(self):
        return self.low + self.high

    def describe(self):
        b = self.base.describe()
        if self.low == 0:
            return f"{b}[[X]]/(X^{self.high})"
        return f"{b}((X)) window [{-self.low},{self.high})"

    def zero(self):
        return (self.base.zero(),) * self.window

    def one(self):
        return self.const_embed(self.base.one())

    def const_embed(self, b):
        out = [self.base.zero()] * self.window
        out[self.low] = b
        return tuple(out)

    def from_int(self, c):
        return self.const_embed(self.base.from_int(c))

    def x_el(self):
        out = [self.base.zero()] * self.window
        idx = self.low + 1
        if idx < self.window:
            out[idx] = self.base.one()
        return tuple(out)

    def from_terms(self, terms):
        """Element from {exponent: coefficient}; terms at or above high drop."""
        out = [self.base.zero()] * self.window
        for e, c in terms.items():
            c = self.base.el(c)
            if e >= self.high:
                continue
            if e < -self.low:
                if c != self.base.zero():
                    raise PrecisionExhausted(
                        f"exponent {e} under the window of {self.describe()}")
                continue
            out[e + self.low] = c
        return tuple(out)

    def el(self, x):
        if isinstance(x, int) and not isinstance(x, bool):
            return self.from_int(x)
        x = tuple(x)
        if len(x) != self.window:
            raise RingMismatch(
                f"{self.describe()} elements have {self.window} coefficients, got {len(x)}")
        return tuple(self.base.el(c) for c in x)

    def add(self, a, b):
        base = self.base
        return tuple(base.add(x, y) for x, y in zip(a, b))

    def neg(self, a):
        base = self.base
        return tuple(base.neg(x) for x in a)

    def mul(self, a, b):
        base = self.base
        z = base.zero()
        lo = self.low
        acc = {}
        for i, ai in enumerate(a):
            if ai == z:
                continue
            for j, bj in enumerate(b):
                if bj == z:
                    continue
                e = i + j - 2 * lo
                prod = base.mul(ai, bj)
                prev = acc.get(e)
                acc[e] = prod if prev is None else base.add(prev, prod)
        out = [z] * self.window
        for e, c in acc.items():
            if c == z or e >= self.high:
                continue
            if e < -lo:
                raise PrecisionExhausted(
                    f"product needs X^{e}, under the window of {self.describe()}")
            out[e + lo] = c
        return tuple(out)

    def x_val(self, a):
        """Lowest exponent carrying a nonzero coefficient (high for zero)."""
        z = self.base.zero()
        for i, c in enumerate(a):
            if c != z:
                return i - self.low
        return self.high

    def invert(self, a):
        """
        >>> R = TruncatedLaurent(FiniteField(2, (1, 1)), 0, 4)
        >>> R.invert(R.from_terms({0: 1, 1: 1}))
        ((1,), (1,), (1,), (1,))
        """
        if self.low > 0:
            raise PrecisionExhausted(
                "inversion is not window-stable when low > 0")
        base = self.base
        try:
            c = base.invert(a[0])
        except NotAUnit:
            raise NotAUnit(
                f"constant coefficient is not a unit in {self.describe()}") from None
        cc = self.const_embed(c)
        res = self.sub(self.one(), self.mul(a, cc))
        acc = self.one()
        for _ in range(self.high - 1):
            acc = self.add(self.one(), self.mul(res, acc))
        return self.mul(cc, acc)

    def is_chain(self):
        return self.low == 0 and self.base.is_field()

    def _chain_only(self):
        if not self.is_chain():
            raise RingMismatch(f"{self.describe()} has no chain structure")

    def bound(self):
        self._chain_only()
        return self.high

    def r_el(self):
        self._chain_only()
        return self.x_el()

    def val(self, a):
        self._chain_only()
        return self.x_val(a)

    def r_split(self, a):
        self._chain_only()
        k = self.x_val(a)
        if k == self.high:
            return self.one(), self.high
        return self.r_shift_down(a, k), k

    def r_shift_down(self, a, k):
        z = self.base.zero()
        return tuple(a[k:]) + (z,) * k

    def level_ring(self, n):
        self._chain_only()
        if not 1 <= n <= self.high:
            raise LevelExceedsPrecision(f"level {n} not in 1..{self.high}")
        return TruncatedLaurent(self.base, 0, n)

    def reduce_to_level(self, a, n):
        return tuple(a[:n])

    def lift_from_level(self, a, n):
        z = self.base.zero()
        return tuple(a) + (z,) * (self.window - len(a))

    def prime_ring(self):
        return self.base.prime_ring()

    def prime_rank(self):
        return self.window * self.base.prime_rank()

    def to_prime_vec(self, a):
        # t-degree major, X-degree minor
        vecs = [self.base.to_prime_vec(c) for c in a]
        return [vecs[i][j] for j in range(self.base.prime_rank()) for i in range(self.window)]

    def from_prime_vec(self, v):
        W = self.window
        br = self.base.prime_rank()
        return tuple(
            self.base.from_prime_vec([v[j * W + i] for j in range(br)])
            for i in range(W))

    def generators(self):
        return [self.x_el()] + [self.const_embed(g) for g in self.base.generators()]

    def carrier_size(self):
        return self.base.carrier_size() ** self.window

    def enumerate_elements(self):
        base_list = list(self.base.enumerate_elements())
        return (tuple(c) for c in itertools.product(base_list, repeat=self.window))

    def random_element(self, rng):
        base = self.base
        return tuple(base.random_element(rng) for _ in range(self.window))

    def random_unit(self, rng):
        if self.low > 0:
            return Ring.random_unit(self, rng)
        out = list(self.random_element(rng))
        out[0] = self.base.random_unit(rng)
        return tuple(out)


# ---------------------------------------------------------------------------
# polynomials over a descriptor (field operations where division is needed)

def poly_trim(K, f):
    f = list(f)
    z = K.zero()
    while f and f[-1] == z:
        f.pop()
    return f


def poly_add(K, f, g):
    n = max(len(f), len(g))
    z = K.zero()
    f = list(f) + [z] * (n - len(f))
    g = list(g) + [z] * (n - len(g))
    return poly_trim(K, [K.add(a, b) for a, b in zip(f, g)])


def poly_sub(K, f, g):
    return poly_add(K, f, [K.neg(c) for c in g])


def poly_mul(K, f, g):
    f = poly_trim(K, f)
    g = poly_trim(K, g)
    if not f or not g:
        return []
    z = K.zero()
    out = [z] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == z:
            continue
        for j, b in enumerate(g):
            out[i + j] = K.add(out[i + j], K.mul(a, b))
    return poly_trim(K, out)


def poly_divmod(K, num, den):
    den = poly_trim(K, den)
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    num = list(num)
    z = K.zero()
    if len(num) < len(den):
        return [], poly_trim(K, num)
    quot = [z] * (len(num) - len(den) + 1)
    linv = K.invert(den[-1])
    for i in range(len(num) - len(den), -1, -1):
        c = K.mul(num[i + len(den) - 1], linv)
        if c != z:
            quot[i] = c
            for j, dj in enumerate(den):
                num[i + j] = K.sub(num[i + j], K.mul(c, dj))
    return poly_trim(K, quot), poly_trim(K, num)


def poly_mod(K, f, g):
    return poly_divmod(K, f, g)[1]


def poly_gcd(K, f, g):
    f, g = poly_trim(K, f), poly_trim(K, g)
    while g:
        f, g = g, poly_mod(K, f, g)
    if f:
        linv = K.invert(f[-1])
        f = [K.mul(linv, c) for c in f]
    return f


def poly_mulmod(K, f, g, m):
    return poly_mod(K, poly_mul(K, f, g), m)


def poly_powmod(K, f, e, m):
    acc = [K.one()]
    f = poly_mod(K, f, m)
    while e:
        if e & 1:
            acc = poly_mulmod(K, acc, f, m)
        e >>= 1
        if e:
            f = poly_mulmod(K, f, f, m)
    return acc


def poly_eval(K, f, x):
    acc = K.zero()
    for c in reversed(f):
        acc = K.add(K.mul(acc, x), c)
    return acc


def poly_deriv(K, f):
    return poly_trim(K, [K.mul(K.from_int(i), f[i]) for i in range(1, len(f))])


def poly_invert_mod(K, a, f):
    """Inverse of a modulo monic f over the field K (extended Euclid)."""
    r0, s0 = poly_trim(K, f), []
    r1, s1 = poly_mod(K, a, f), [K.one()]
    if not r1:
        raise NotAUnit("zero has no inverse modulo f")
    while r1:
        q, rem = poly_divmod(K, r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, poly_sub(K, s0, poly_mul(K, q, s1))
    if len(r0) != 1:
        raise NotAUnit("element shares a factor with the modulus")
    c = K.invert(r0[0])
    return [K.mul(c, x) for x in poly_mod(K, s0, f)]


def _prime_factors(n):
    out = []
    k = 2
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def is_irreducible_mod_p(f, p):
    n = len(f) - 1
    if n < 1 or f[-1] % p != 1:
        return False
    if n == 1:
        return True
    K = PrimePower(p, 1)
    fK = [c % p for c in f]
    x = [0, 1]
    xq = poly_powmod(K, x, p ** n, fK)
    if poly_trim(K, poly_sub(K, xq, x)):
        return False
    for l in _prime_factors(n):
        xe = poly_powmod(K, x, p ** (n // l), fK)
        g = poly_gcd(K, poly_sub(K, xe, x), fK)
        if len(g) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def lex_min_irreducible(p, n):
    """First monic irreducible of degree n over F_p in base-p counting order.

    >>> lex_min_irreducible(2, 2)
    (1, 1, 1)
    >>> lex_min_irreducible(2, 3)
    (1, 1, 0, 1)
    """
    for k in range(p ** n):
        coeffs = []
        kk = k
        for _ in range(n):
            coeffs.append(kk % p)
            kk //= p
        f = tuple(coeffs) + (1,)
        if is_irreducible_mod_p(f, p):
            return f
    raise AssertionError("no irreducible polynomial found, impossible")


def _split_distinct_linears(K, g, q):
    """Split a product of at least two distinct monic linear factors."""
    for c in K.enumerate_elements():
        if c == K.zero():
            continue
        if q % 2 == 0:
            # gcd against the F_2-trace of c*x
            h = poly_mod(K, [K.zero(), c], g)
            acc = h
            for _ in range(q.bit_length() - 2):
                h = poly_mulmod(K, h, h, g)
                acc = poly_add(K, acc, h)
            cand = poly_gcd(K, acc, g)
        else:
            h = poly_powmod(K, [c, K.one()], (q - 1) // 2, g)
            cand = poly_gcd(K, poly_sub(K, h, [K.one()]), g)
        if 0 < len(cand) - 1 < len(g) - 1:
            return [cand, poly_divmod(K, g, cand)[0]]
    raise AssertionError("failed to split a split polynomial")


def poly_roots(K, f):
    """All roots of f in the field K, sorted, multiplicity stripped."""
    f = poly_trim(K, f)
    if len(f) <= 1:
        return []
    q = K.carrier_size()
    x = [K.zero(), K.one()]
    xq = poly_powmod(K, x, q, f)
    lin = poly_gcd(K, poly_sub(K, xq, x), f)
    roots = []
    stack = [lin]
    while stack:
        g = stack.pop()
        if len(g) <= 1:
            continue
        if len(g) == 2:
            roots.append(K.mul(K.neg(g[0]), K.invert(g[1])))
            continue
        stack.extend(_split_distinct_linears(K, g, q))
    return sorted(roots)


def hensel_lift_root(R, f_ints, root_bar):
    """Lift a simple residue root of the integer polynomial f into R."""
    fpoly = [R.from_int(c) for c in f_ints]
    dpoly = poly_deriv(R, fpoly)
    x = R.el(tuple(root_bar))
    for _ in range(R.N.bit_length() + 1):
        fx = poly_eval(R, fpoly, x)
        if fx == R.zero():
            break
        x = R.sub(x, R.mul(fx, R.invert(poly_eval(R, dpoly, x))))
    if poly_eval(R, fpoly, x) != R.zero():
        raise NotAUnit("root does not lift, the residue root must be simple")
    return x


# ---------------------------------------------------------------------------
# endomorphisms

@dataclass(frozen=True)
class Identity:
    def describe(self):
        return "id"


@dataclass(frozen=True)
class FieldFrobenius:
    """x -> x^(p^e) on a finite field."""

    e: int = 1

    def describe(self):
        return "frob" if self.e == 1 else f"frob^{self.e}"


@dataclass(frozen=True)
class WittFrobenius:
    """The unique lift of x -> x^(p^e) along the residue map of a Galois ring.

    On Z/p^N itself this is the identity.
    """

    e: int = 1

    def describe(self):
        return "witt" if self.e == 1 else f"witt^{self.e}"


@dataclass(frozen=True)
class LaurentSubst:
    """X -> image on a low = 0 window, with an endo acting on coefficients."""

    image: tuple
    base_endo: object = Identity()

    def describe(self):
        return "subst"


def check_endo_domain(R, endo):
    if isinstance(endo, Identity):
        return
    if isinstance(endo, FieldFrobenius):
        if not isinstance(R, FiniteField):
            raise EndoDomainMismatch(
                f"field Frobenius does not act on {R.describe()}")
        if endo.e < 0:
            raise EndoDomainMismatch("Frobenius power must be nonnegative")
        return
    if isinstance(endo, WittFrobenius):
        if not isinstance(R, (PrimePower, GaloisRing)):
            raise EndoDomainMismatch(
                f"Witt Frobenius does not act on {R.describe()}")
        if endo.e < 0:
            raise EndoDomainMismatch("Frobenius power must be nonnegative")
        return
    if isinstance(endo, LaurentSubst):
        if not isinstance(R, TruncatedLaurent):
            raise EndoDomainMismatch(
                f"substitution does not act on {R.describe()}")
        if R.low != 0:
            raise EndoDomainMismatch("substitution needs a low = 0 window")
        if len(endo.image) != R.window:
            raise EndoDomainMismatch("substitution image has the wrong window")
        img = R.el(endo.image)
        if R.x_val(img) < 1:
            raise EndoDomainMismatch(
                "substitution image needs positive X-valuation")
        check_endo_domain(R.base, endo.base_endo)
        return
    raise EndoDomainMismatch(f"unknown endomorphism {endo!r}")


_ENDO_MATRIX = {}


def _prime_basis(R, k):
    return R.from_prime_vec([1 if i == k else 0 for i in range(R.prime_rank())])


def _endo_basis_images(R, endo):
    if isinstance(endo, Identity):
        return [_prime_basis(R, k) for k in range(R.prime_rank())]
    if isinstance(endo, FieldFrobenius):
        g = R.pow_el(R.t_el(), R.p ** endo.e)
        out = [R.one()]
        for _ in range(R.d - 1):
            out.append(R.mul(out[-1], g))
        return out
    if isinstance(endo, WittFrobenius):
        if isinstance(R, PrimePower):
            return [R.one()]
        res = R.residue_field()
        rbar = res.pow_el(res.t_el(), R.p ** endo.e)
        tau = hensel_lift_root(R, R.f, rbar)
        out = [R.one()]
        for _ in range(R.d - 1):
            out.append(R.mul(out[-1], tau))
        return out
    # LaurentSubst
    u = R.el(endo.image)
    upow = [R.one()]
    for _ in range(R.window - 1):
        upow.append(R.mul(upow[-1], u))
    base = R.base
    out = []
    for j in range(base.prime_rank()):
        cj = R.const_embed(apply_endo(base, endo.base_endo, _prime_basis(base, j)))
        for i in range(R.window):
            out.append(R.mul(cj, upow[i]))
    return out


def endo_prime_matrix(R, endo):
    """Matrix of the endo on prime-ring coordinates of R (cached)."""
    key = (R, endo)
    M = _ENDO_MATRIX.get(key)
    if M is None:
        check_endo_domain(R, endo)
        beta = R.prime_rank()
        cols = [R.to_prime_vec(im) for im in _endo_basis_images(R, endo)]
        M = [[cols[k][i] for k in range(beta)] for i in range(beta)]
        _ENDO_MATRIX[key] = M
    return M


def apply_endo(R, endo, a):
    """Apply the endo to one element, through the cached prime matrix."""
    if isinstance(endo, Identity):
        return R.el(a)
    if isinstance(endo, WittFrobenius) and isinstance(R, PrimePower):
        check_endo_domain(R, endo)
        return R.el(a)
    M = endo_prime_matrix(R, endo)
    m = R.prime_ring().modulus
    v = R.to_prime_vec(R.el(a))
    n = len(v)
    out = [sum(Mi[k] * v[k] for k in range(n)) % m for Mi in M]
    return R.from_prime_vec(out)


def endo_on_level(R, endo, n):
    """The endo induced on R.level_ring(n)."""
    if isinstance(endo, (Identity, FieldFrobenius, WittFrobenius)):
        return endo
    if isinstance(endo, LaurentSubst):
        S = R.level_ring(n)
        return LaurentSubst(S.el(R.reduce_to_level(R.el(endo.image), n)),
                            endo.base_endo)
    raise EndoDomainMismatch(f"unknown endomorphism {endo!r}")


def endo_on_residue_field(endo):
    """Translate a Galois-ring endo to the residue field."""
    if isinstance(endo, Identity):
        return endo
    if isinstance(endo, WittFrobenius):
        return FieldFrobenius(endo.e)
    raise EndoDomainMismatch(f"{endo!r} has no residue-field form")


def gamma_image(R, a):
    """(1+X)^a - 1, the image of X under the weight-a substitution.

    >>> R = TruncatedLaurent(PrimePower(2, 2), 0, 4)
    >>> gamma_image(R, 2)
    (0, 2, 1, 0)
    """
    one_plus_x = R.add(R.one(), R.x_el())
    return R.sub(R.pow_el(one_plus_x, a), R.one())


def standard_phi(R):
    """The substitution X -> (1+X)^p - 1, Frobenius on coefficients."""
    base_endo = FieldFrobenius(1) if isinstance(R.base, FiniteField) else Identity()
    return LaurentSubst(gamma_image(R, R.base.p), base_endo)


def standard_gamma(R, a):
    """The substitution X -> (1+X)^a - 1, fixing coefficients."""
    return LaurentSubst(gamma_image(R, a), Identity())


# ---------------------------------------------------------------------------
# ring morphisms

class RingMorphism:
    """A ring homomorphism, applied as a callable.

    Equivariance against a pair of endos is checked on algebra generators
    and cached; both sides are homomorphisms that agree on the prime ring,
    so generator agreement settles the square.
    """

    def __init__(self, source, target, fn, kind):
        self.source = source
        self.target = target
        self._fn = fn
        self.kind = kind
        self._equivariance = {}

    def __call__(self, a):
        try:
            a = self.source.el(a)
        except (RingMismatch, PrecisionExhausted) as exc:
            raise MorphismDomainMismatch(str(exc)) from None
        return self._fn(a)

    def equivariant_for(self, endo_src, endo_tgt):
        key = (endo_src, endo_tgt)
        cached = self._equivariance.get(key)
        if cached is None:
            cached = all(
                self(apply_endo(self.source, endo_src, g))
                == apply_endo(self.target, endo_tgt, self(g))
                for g in self.source.generators())
            self._equivariance[key] = cached
        return cached


def reduction_morphism(R, n):
    S = R.level_ring(n)
    return RingMorphism(R, S, lambda a: R.reduce_to_level(a, n), "reduce")


def residue_field_morphism(R):
    if not isinstance(R, GaloisRing):
        raise RingMismatch("residue_field_morphism expects a Galois ring")
    F = R.residue_field()
    p = R.p
    return RingMorphism(R, F, lambda a: tuple(c % p for c in a), "residue")


def _powers_morphism(source, target, gen_image):
    m = target.prime_ring().modulus
    rank = target.prime_rank()
    pows = [target.one()]
    for _ in range(source.d - 1):
        pows.append(target.mul(pows[-1], gen_image))
    cols = [target.to_prime_vec(x) for x in pows]

    def fn(a):
        out = [0] * rank
        for k, c in enumerate(a):
            if c:
                col = cols[k]
                for i in range(rank):
                    out[i] = (out[i] + c * col[i]) % m
        return target.from_prime_vec(out)

    mor = RingMorphism(source, target, fn, "embed")
    mor.gen_image = gen_image
    return mor


def embedding_morphism(source, target):
    """The canonical unital embedding for a supported shape pair.

    Extension generators land on the smallest root of their minimal
    polynomial in the target, so the choice is deterministic.
    """
    if isinstance(source, PrimePower) and isinstance(target, PrimePower):
        if source != target:
            raise RingMismatch(
                f"no embedding {source.describe()} -> {target.describe()}")
        return RingMorphism(source, target, lambda a: a, "embed")
    if isinstance(source, PrimePower) and isinstance(target, GaloisRing):
        if (source.p, source.N) != (target.p, target.N):
            raise RingMismatch(
                f"no embedding {source.describe()} -> {target.describe()}")
        return RingMorphism(source, target, target.from_int, "embed")
    if isinstance(source, FiniteField) and isinstance(target, FiniteField):
        if source.p != target.p or target.d % source.d:
            raise RingMismatch(
                f"no embedding {source.describe()} -> {target.describe()}")
        roots = poly_roots(target, [target.from_int(c) for c in source.f])
        if not roots:
            raise RingMismatch("minimal polynomial has no root in the target")
        return _powers_morphism(source, target, roots[0])
    if isinstance(source, GaloisRing) and isinstance(target, GaloisRing):
        if source.p != target.p or source.N != target.N or target.d % source.d:
            raise RingMismatch(
                f"no embedding {source.describe()} -> {target.describe()}")
        res = target.residue_field()
        roots = poly_roots(res, [res.from_int(c) for c in source.f])
        if not roots:
            raise RingMismatch("minimal polynomial has no root in the target")
        tau = hensel_lift_root(target, source.f, roots[0])
        return _powers_morphism(source, target, tau)
    if isinstance(target, TruncatedLaurent) and source == target.base:
        return RingMorphism(source, target, target.const_embed, "const")
    raise RingMismatch(
        f"no canonical embedding {source.describe()} -> {target.describe()}")


def compose_morphisms(outer, inner):
    if inner.target != outer.source:
        raise RingMismatch("morphisms do not compose")
    return RingMorphism(inner.source, outer.target,
                        lambda a: outer(inner(a)),
                        f"{outer.kind}*{inner.kind}")


# ---------------------------------------------------------------------------
# validated constructors and JSON forms

def make_prime_power(p, N, caps=None):
    caps = CAPS if caps is None else caps
    if not isinstance(p, int) or isinstance(p, bool) or not _is_prime(p):
        raise SchemaError(f"p must be a prime, got {p!r}")
    if not isinstance(N, int) or isinstance(N, bool) or not 1 <= N <= caps["max_precision"]:
        raise SchemaError(f"precision N must lie in 1..{caps['max_precision']}")
    return PrimePower(p, N)


def _checked_min_poly(p, f, d, caps):
    if f is None:
        if d is None:
            raise SchemaError("give either f or d")
        f = lex_min_irreducible(p, d)
    f = tuple(int(c) % p for c in f)
    if d is not None and len(f) - 1 != d:
        raise SchemaError("f does not have the stated degree")
    if len(f) < 2 or f[-1] != 1:
        raise SchemaError("f must be monic of degree at least 1")
    if len(f) - 1 > caps["max_t_degree"]:
        raise SchemaError(
            f"extension degree exceeds cap {caps['max_t_degree']}")
    if not is_irreducible_mod_p(f, p):
        raise SchemaError("f is not irreducible mod p")
    return f


def make_finite_field(p, f=None, d=None, caps=None):
    caps = CAPS if caps is None else caps
    if not isinstance(p, int) or isinstance(p, bool) or not _is_prime(p):
        raise SchemaError(f"p must be a prime, got {p!r}")
    return FiniteField(p, _checked_min_poly(p, f, d, caps))


def make_galois_ring(p, N, f=None, d=None, caps=None):
    caps = CAPS if caps is None else caps
    if not isinstance(p, int) or isinstance(p, bool) or not _is_prime(p):
        raise SchemaError(f"p must be a prime, got {p!r}")
    if not isinstance(N, int) or isinstance(N, bool) or not 1 <= N <= caps["max_precision"]:
        raise SchemaError(f"precision N must lie in 1..{caps['max_precision']}")
    return GaloisRing(p, N, _checked_min_poly(p, f, d, caps))


def make_laurent(base, low, high, caps=None):
    caps = CAPS if caps is None else caps
    if not isinstance(base, (PrimePower, FiniteField)):
        raise SchemaError("window base must be Z/p^N or a finite field")
    if not isinstance(low, int) or isinstance(low, bool) or not 0 <= low <= caps["max_low"]:
        raise SchemaError(f"low must lie in 0..{caps['max_low']}")
    if not isinstance(high, int) or isinstance(high, bool) or not 1 <= high <= caps["max_high"]:
        raise SchemaError(f"high must lie in 1..{caps['max_high']}")
    return TruncatedLaurent(base, low, high)


def _require_keys(obj, keys, what):
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be an object")
    extra = set(obj) - set(keys)
    if extra:
        raise SchemaError(f"{what} has unknown fields {sorted(extra)}")
    missing = set(keys) - set(obj)
    if missing:
        raise SchemaError(f"{what} is missing fields {sorted(missing)}")


def _int_of(obj, key, what):
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{what}.{key} must be an integer")
    return v


def _int_list_of(obj, key, what):
    v = obj.get(key)
    if not isinstance(v, list) or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in v):
        raise SchemaError(f"{what}.{key} must be a list of integers")
    return v


def ring_to_json(R):
    if isinstance(R, PrimePower):
        return {"variant": "prime_power", "p": R.p, "N": R.N}
    if isinstance(R, FiniteField):
        return {"variant": "finite_field", "p": R.p, "f": list(R.f)}
    if isinstance(R, GaloisRing):
        return {"variant": "galois_ring", "p": R.p, "N": R.N, "f": list(R.f)}
    if isinstance(R, TruncatedLaurent):
        return {"variant": "truncated_laurent", "base": ring_to_json(R.base),
                "low": R.low, "high": R.high}
    raise RingMismatch(f"unknown ring {R!r}")


def ring_from_json(obj, caps=None):
    caps = CAPS if caps is None else caps
    if not isinstance(obj, dict) or "variant" not in obj:
        raise SchemaError("ring must be an object with a variant field")
    variant = obj["variant"]
    if variant == "prime_power":
        _require_keys(obj, {"variant", "p", "N"}, "ring")
        return make_prime_power(_int_of(obj, "p", "ring"),
                                _int_of(obj, "N", "ring"), caps)
    if variant == "finite_field":
        _require_keys(obj, {"variant", "p", "f"}, "ring")
        return make_finite_field(_int_of(obj, "p", "ring"),
                                 tuple(_int_list_of(obj, "f", "ring")),
                                 None, caps)
    if variant == "galois_ring":
        _require_keys(obj, {"variant", "p", "N", "f"}, "ring")
        return make_galois_ring(_int_of(obj, "p", "ring"),
                                _int_of(obj, "N", "ring"),
                                tuple(_int_list_of(obj, "f", "ring")),
                                None, caps)
    if variant == "truncated_laurent":
        _require_keys(obj, {"variant", "base", "low", "high"}, "ring")
        base = ring_from_json(obj["base"], caps)
        return make_laurent(base, _int_of(obj, "low", "ring"),
                            _int_of(obj, "high", "ring"), caps)
    raise SchemaError(f"unknown ring variant {variant!r}")


def el_to_json(R, a):
    a = R.el(a)
    if isinstance(R, PrimePower):
        return a
    if isinstance(R, (FiniteField, GaloisRing)):
        return list(a)
    if isinstance(R, TruncatedLaurent):
        if isinstance(R.base, PrimePower):
            return list(a)
        # t-degree major, X-degree minor
        return [[a[i][j] for i in range(R.window)] for j in range(R.base.d)]
    raise RingMismatch(f"unknown ring {R!r}")


def el_from_json(R, obj):
    def bad(msg):
        raise SchemaError(f"element for {R.describe()}: {msg}")

    if isinstance(R, PrimePower):
        if isinstance(obj, bool) or not isinstance(obj, int):
            bad("must be an integer")
        return R.el(obj)
    if isinstance(R, (FiniteField, GaloisRing)):
        if not isinstance(obj, list) or len(obj) != R.d or not all(
                isinstance(c, int) and not isinstance(c, bool) for c in obj):
            bad(f"must be a list of {R.d} integers")
        return R.el(tuple(obj))
    if isinstance(R, TruncatedLaurent):
        if isinstance(R.base, PrimePower):
            if not isinstance(obj, list) or len(obj) != R.window or not all(
                    isinstance(c, int) and not isinstance(c, bool) for c in obj):
                bad(f"must be a list of {R.window} integers")
            return R.el(tuple(obj))
        d = R.base.d
        if not isinstance(obj, list) or len(obj) != d:
            bad(f"must be a list of {d} coefficient rows")
        for row in obj:
            if not isinstance(row, list) or len(row) != R.window or not all(
                    isinstance(c, int) and not isinstance(c, bool) for c in row):
                bad(f"each row must be a list of {R.window} integers")
        return R.el(tuple(
            tuple(obj[j][i] for j in range(d)) for i in range(R.window)))
    raise SchemaError(f"unknown ring {R!r}")


def endo_to_json(R, endo):
    if isinstance(endo, Identity):
        return {"kind": "identity"}
    if isinstance(endo, FieldFrobenius):
        return {"kind": "field_frobenius", "e": endo.e}
    if isinstance(endo, WittFrobenius):
        return {"kind": "witt_frobenius", "e": endo.e}
    if isinstance(endo, LaurentSubst):
        return {"kind": "laurent_subst",
                "image": el_to_json(R, endo.image),
                "base": endo_to_json(R.base, endo.base_endo)}
    raise EndoDomainMismatch(f"unknown endomorphism {endo!r}")


def endo_from_json(R, obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError("endo must be an object with a kind field")
    kind = obj["kind"]
    if kind == "identity":
        _require_keys(obj, {"kind"}, "endo")
        return Identity()
    if kind in ("field_frobenius", "witt_frobenius"):
        _require_keys(obj, {"kind", "e"}, "endo")
        e = _int_of(obj, "e", "endo")
        if e < 0:
            raise SchemaError("endo.e must be nonnegative")
        endo = FieldFrobenius(e) if kind == "field_frobenius" else WittFrobenius(e)
    elif kind == "laurent_subst":
        _require_keys(obj, {"kind", "image", "base"}, "endo")
        if not isinstance(R, TruncatedLaurent):
            raise SchemaError(
                f"laurent_subst endo needs a window ring, got {R.describe()}")
        endo = LaurentSubst(el_from_json(R, obj["image"]),
                            endo_from_json(R.base, obj["base"]))
    else:
        raise SchemaError(f"unknown endo kind {kind!r}")
    try:
        check_endo_domain(R, endo)
    except EndoDomainMismatch as exc:
        raise SchemaError(str(exc)) from None
    return endo
