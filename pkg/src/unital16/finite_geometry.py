"""Small finite fields and the Desarguesian plane PG(2, q).

Elements of GF(p^k) are encoded as integers whose base-p digits are the
coefficients of a polynomial over GF(p), reduced modulo a fixed irreducible
polynomial.  All arithmetic goes through precomputed tables, so a field is
cheap to use once built.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .incidence import IncidenceStructure

__all__ = [
    "SUPPORTED_ORDERS",
    "ConfigurationError",
    "GF",
    "FieldElement",
    "field_ops",
    "pg2_points",
    "build_pg2",
    "hermitian_unital",
]

# order -> (characteristic, modulus coefficients, low degree first, monic)
_MODULI = {
    2: (2, None),
    3: (3, None),
    5: (5, None),
    7: (7, None),
    13: (13, None),
    4: (2, (1, 1, 1)),        # x^2 + x + 1
    8: (2, (1, 1, 0, 1)),     # x^3 + x + 1
    9: (3, (1, 0, 1)),        # x^2 + 1
    16: (2, (1, 1, 0, 0, 1)),  # x^4 + x + 1
}

SUPPORTED_ORDERS = tuple(sorted(_MODULI))


class ConfigurationError(ValueError):
    """Requested field or plane order is not supported."""


def _digits(value, p, k):
    out = []
    for _ in range(k):
        value, d = divmod(value, p)
        out.append(d)
    return out


def _undigits(ds, p):
    value = 0
    for d in reversed(ds):
        value = value * p + d
    return value


class GF:
    """The finite field with ``q`` elements, backed by lookup tables.

    ``GF(q)`` is cached, so repeated calls return the same object.
    """

    def __new__(cls, q: int):
        return _field(q)

    @classmethod
    def _build(cls, q: int) -> "GF":
        if q not in _MODULI:
            raise ConfigurationError(
                f"unsupported field order {q}; supported: {SUPPORTED_ORDERS}")
        self = object.__new__(cls)
        p, modulus = _MODULI[q]
        self.q = q
        self.p = p
        self.modulus = modulus
        if modulus is None:
            self.k = 1
            add = [[(a + b) % p for b in range(p)] for a in range(p)]
            mul = [[(a * b) % p for b in range(p)] for a in range(p)]
        else:
            k = len(modulus) - 1
            self.k = k
            add = [[_undigits([(x + y) % p for x, y in
                               zip(_digits(a, p, k), _digits(b, p, k))], p)
                    for b in range(q)] for a in range(q)]
            mul = [[self._polymul(a, b) for b in range(q)] for a in range(q)]
        self.add = add
        self.mul = mul
        self.neg = [next(b for b in range(q) if add[a][b] == 0) for a in range(q)]
        self.inv = [None] + [next(b for b in range(1, q) if mul[a][b] == 1)
                             for a in range(1, q)]
        return self

    def _polymul(self, a, b):
        p, k, mod = self.p, self.k, self.modulus
        x, y = _digits(a, p, k), _digits(b, p, k)
        prod = [0] * (2 * k - 1)
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    prod[i + j] = (prod[i + j] + xi * yj) % p
        # reduce from the top using the monic modulus
        for deg in range(2 * k - 2, k - 1, -1):
            c = prod[deg]
            if c:
                for i, m in enumerate(mod):
                    prod[deg - k + i] = (prod[deg - k + i] - c * m) % p
        return _undigits(prod[:k], p)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            if a == 0:
                raise ZeroDivisionError("zero has no inverse")
            a, e = self.inv[a], -e
        result = 1
        while e:
            if e & 1:
                result = self.mul[result][a]
            a = self.mul[a][a]
            e >>= 1
        return result

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value, self.q)

    def __repr__(self):
        return f"GF({self.q})"

    def __reduce__(self):
        return (GF, (self.q,))


@lru_cache(maxsize=None)
def _field(q):
    return GF._build(q)


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int

    def __post_init__(self):
        if self.q not in _MODULI:
            raise ConfigurationError(f"unsupported field order {self.q}")
        if not 0 <= self.value < self.q:
            raise ValueError(f"value {self.value} outside GF({self.q})")

    @property
    def field(self) -> GF:
        return GF(self.q)

    def _check(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.q != self.q:
            raise ValueError(f"mixed fields GF({self.q}) and GF({other.q})")
        return other

    def __add__(self, other):
        other = self._check(other)
        return FieldElement(self.field.add[self.value][other.value], self.q)

    def __sub__(self, other):
        other = self._check(other)
        f = self.field
        return FieldElement(f.add[self.value][f.neg[other.value]], self.q)

    def __neg__(self):
        return FieldElement(self.field.neg[self.value], self.q)

    def __mul__(self, other):
        other = self._check(other)
        return FieldElement(self.field.mul[self.value][other.value], self.q)

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, e: int):
        return FieldElement(self.field.pow(self.value, e), self.q)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return FieldElement(self.field.inv[self.value], self.q)


def field_ops(a: FieldElement, b, op: str) -> FieldElement:
    """Apply ``op`` in {'add', 'mul', 'inv', 'pow'} to field elements.

    For ``inv`` the second argument is ignored; for ``pow`` it is an integer
    exponent.
    """
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown field operation {op!r}")


@lru_cache(maxsize=None)
def pg2_points(q: int) -> tuple:
    """Normalized coordinate triples of PG(2, q) in lexicographic order.

    A triple is normalized when its first nonzero coordinate is 1.
    """
    GF(q)  # validates q
    pts = [t for t in product(range(q), repeat=3)
           if any(t) and t[next(i for i in range(3) if t[i])] == 1]
    return tuple(pts)


def _normalize(f: GF, t):
    lead = next(c for c in t if c)
    s = f.inv[lead]
    return tuple(f.mul[s][c] for c in t)


@lru_cache(maxsize=None)
def build_pg2(q: int) -> IncidenceStructure:
    """PG(2, q) with points and lines both indexed by normalized coordinates.

    Line ``[a, b, c]`` contains point ``(x, y, z)`` when ``ax + by + cz = 0``.
    Because points and lines share one coordinate list, the map sending point
    ``i`` to line ``i`` is a polarity.
    """
    f = GF(q)
    pts = pg2_points(q)
    add, mul = f.add, f.mul
    blocks = []
    for a, b, c in pts:
        ma, mb, mc = mul[a], mul[b], mul[c]
        blocks.append([i for i, (x, y, z) in enumerate(pts)
                       if add[add[ma[x]][mb[y]]][mc[z]] == 0])
    return IncidenceStructure(len(pts), blocks, name=f"pg2_{q}")


def point_index(q: int, coords) -> int:
    """Index of the point with (not necessarily normalized) coordinates."""
    return _point_lookup(q)[_normalize(GF(q), tuple(coords))]


@lru_cache(maxsize=None)
def _point_lookup(q):
    return {t: i for i, t in enumerate(pg2_points(q))}


def hermitian_unital(q0: int) -> tuple:
    """Point indices of the Hermitian curve x^(q0+1) + y^(q0+1) + z^(q0+1) = 0
    in ``build_pg2(q0**2)``."""
    q = q0 * q0
    f = GF(q)
    e = q0 + 1
    powe = [f.pow(x, e) for x in range(q)]
    add = f.add
    return tuple(i for i, (x, y, z) in enumerate(pg2_points(q))
                 if add[add[powe[x]][powe[y]]][powe[z]] == 0)


def collineation(q: int, matrix, frobenius: int = 0) -> tuple:
    """Point permutation of PG(2, q) induced by ``x -> M * sigma(x)``.

    ``sigma`` is the field automorphism ``t -> t^(p^frobenius)``.  Returns a
    tuple ``perm`` with ``perm[i]`` the image of point ``i``.
    """
    f = GF(q)
    add, mul = f.add, f.mul
    e = f.p ** frobenius
    sig = [f.pow(t, e) for t in range(q)]
    lookup = _point_lookup(q)
    out = []
    for pt in pg2_points(q):
        x = [sig[c] for c in pt]
        img = []
        for row in matrix:
            acc = 0
            for m, xi in zip(row, x):
                acc = add[acc][mul[m][xi]]
            img.append(acc)
        if not any(img):
            raise ValueError("singular matrix")
        out.append(lookup[_normalize(f, img)])
    if len(set(out)) != len(out):
        raise ValueError("singular matrix")
    return tuple(out)


def random_collineation(q: int, rng) -> tuple:
    """A collineation of PG(2, q) drawn with ``rng`` (a ``random.Random``)."""
    f = GF(q)
    while True:
        m = [[rng.randrange(q) for _ in range(3)] for _ in range(3)]
        if _det(f, m) != 0:
            return collineation(q, m, rng.randrange(f.k))


def _det(f, m):
    add, mul, neg = f.add, f.mul, f.neg

    def sub(a, b):
        return add[a][neg[b]]

    def minor(i, j, k, l):
        return sub(mul[m[1][i]][m[2][j]], mul[m[1][k]][m[2][l]])

    t0 = mul[m[0][0]][minor(1, 2, 2, 1)]
    t1 = mul[m[0][1]][minor(0, 2, 2, 0)]
    t2 = mul[m[0][2]][minor(0, 1, 1, 0)]
    return add[sub(t0, t1)][t2]
