import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
from sympy import isprime

from ..models.field import FieldContext
from ..models.poly import Place, PolyOverFq
from ..utils.config import Config
from ..utils.errors import BoundViolation, FieldError, PolynomialError, WorkBoundExceeded

logger = logging.getLogger(__name__)

BASE_GENUS = 0


def prime_field(p: int) -> FieldContext:
    return FieldContext(p, 1, (0, 1))


@lru_cache(maxsize=None)
def make_field(p: int, k: int = 1) -> FieldContext:
    """F_{p^k} with the smallest irreducible modulus, ordered by the integer sum(c_i p^i)."""

    if not isinstance(p, int) or not isprime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if k < 1:
        raise FieldError(f"extension degree must be >= 1, got {k}")
    base = prime_field(p)
    if k == 1:
        return base
    for index in range(p ** k):
        candidate = PolyOverFq.from_code(base, index, k)
        if is_irreducible(candidate):
            logger.debug("F_%d^%d modulus %r", p, k, candidate)
            return FieldContext(p, k, candidate.coeffs)
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")


def field_from_q(q: int) -> FieldContext:
    """Parse a prime power q into its field."""
    for p in range(2, q + 1):
        if q % p == 0:
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1:
                raise FieldError(f"q={q} is not a prime power")
            return make_field(p, k)
    raise FieldError(f"q={q} is not a prime power")


def is_irreducible(f: PolyOverFq) -> bool:
    """Ben-Or test: gcd(f, t^{q^i} - t) = 1 for every i <= deg(f)/2."""

    if f.is_zero():
        raise PolynomialError("irreducibility of the zero polynomial")
    n = f.degree
    if n <= 0:
        return False
    if n == 1:
        return True
    f = f.monic()
    t = PolyOverFq.t(f.ctx)
    h = t
    for _ in range(n // 2):
        h = h.pow_mod(f.ctx.q, f)
        if not f.gcd(h - t).is_constant():
            return False
    return True


def is_irreducible_exhaustive(f: PolyOverFq) -> bool:
    """Trial division by every monic polynomial of degree <= deg(f)/2."""

    if f.is_zero():
        raise PolynomialError("irreducibility of the zero polynomial")
    n = f.degree
    if n <= 0:
        return False
    ctx = f.ctx
    for d in range(1, n // 2 + 1):
        for index in range(ctx.q ** d):
            if PolyOverFq.from_code(ctx, index, d).divides(f):
                return False
    return True


@lru_cache(maxsize=None)
def _finite_places(ctx: FieldContext, d: int) -> Tuple[Place, ...]:
    if d == 1:
        return tuple(Place.finite(PolyOverFq.from_code(ctx, i, 1)) for i in range(ctx.q))
    found = []
    for index in range(ctx.q ** d):
        f = PolyOverFq.from_code(ctx, index, d)
        if is_irreducible(f):
            found.append(Place.finite(f))
    return tuple(found)


def places_of_degree(ctx: FieldContext, d: int) -> List[Place]:
    """All places of degree d; the infinite place leads at d = 1."""

    if d < 1:
        raise PolynomialError(f"place degree must be >= 1, got {d}")
    places = list(_finite_places(ctx, d))
    if d == 1:
        places.insert(0, Place.infinity())
    return places


def first_irreducible(ctx: FieldContext, d: int) -> PolyOverFq:
    for index in range(ctx.q ** d):
        f = PolyOverFq.from_code(ctx, index, d)
        if is_irreducible(f):
            return f
    raise PolynomialError(f"no irreducible polynomial of degree {d}")


@dataclass(frozen=True)
class PlaceCount:
    q: int
    degree: int
    count: int
    residual: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.residual <= self.bound


def frobenius_matrix(ctx: FieldContext, pi: PolyOverFq) -> np.ndarray:
    """Matrix (as element codes) of x -> x^q on F_q[t]/(pi); column j is the image of t^j."""
    d = pi.degree
    t = PolyOverFq.t(ctx)
    tq = t.pow_mod(ctx.q, pi)
    cols = []
    power = PolyOverFq.one(ctx)
    for _ in range(d):
        cols.append([power.coeff(i) for i in range(d)])
        power = (power * tq) % pi
    return np.array(cols, dtype=np.int64).T


def _apply_linear(ctx: FieldContext, vectors: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    if ctx.k == 1:
        return (vectors @ matrix.T) % ctx.p
    add, mul = ctx.add_table, ctx.mul_table
    d = matrix.shape[0]
    out = np.zeros_like(vectors)
    for i in range(d):
        acc = np.zeros(vectors.shape[0], dtype=np.int64)
        for j in range(d):
            acc = add[acc, mul[vectors[:, j], matrix[i, j]]]
        out[:, i] = acc
    return out


def count_places(ctx: FieldContext, d: int) -> PlaceCount:
    """Count places of degree d by counting elements of F_{q^d} of exact degree d.

    Residual against q^d/d is checked against the genus-0 prime-polynomial bound.
    """

    if d < 1:
        raise PolynomialError(f"place degree must be >= 1, got {d}")
    q = ctx.q
    size = q ** d
    if size > Config.COUNT_LIMIT:
        raise WorkBoundExceeded(
            f"counting places of degree {d} over F_{q} needs {size} elements",
            bound="count_limit", limit=Config.COUNT_LIMIT, requested=size,
        )
    if d == 1:
        finite = q
    else:
        pi = first_irreducible(ctx, d)
        frob = frobenius_matrix(ctx, pi)
        codes = np.arange(size, dtype=np.int64)
        vectors = np.stack([(codes // q ** i) % q for i in range(d)], axis=1)
        proper = [e for e in range(1, d) if d % e == 0]
        in_subfield = np.zeros(size, dtype=bool)
        image = vectors
        for e in range(1, proper[-1] + 1):
            image = _apply_linear(ctx, image, frob)
            if d % e == 0:
                in_subfield |= np.all(image == vectors, axis=1)
        exact = int(size - in_subfield.sum())
        if exact % d:
            raise PolynomialError(f"orbit count {exact} not divisible by {d}")
        finite = exact // d
    count = finite + (1 if d == 1 else 0)
    residual = abs(count - q ** d / d)
    bound = (2 * BASE_GENUS + 1) / (1 - 1 / q) * q ** (d / 2)
    if residual > bound:
        raise BoundViolation(f"place count residual {residual:.3f} exceeds bound {bound:.3f}", q=q, degree=d)
    return PlaceCount(q=q, degree=d, count=count, residual=residual, bound=bound)


def distinct_degree_parts(f: PolyOverFq) -> Dict[int, PolyOverFq]:
    """For each e, the product of the distinct monic irreducible factors of f of degree e."""

    if f.is_zero():
        raise PolynomialError("distinct-degree split of the zero polynomial")
    ctx = f.ctx
    rest = f.monic()
    t = PolyOverFq.t(ctx)
    parts: Dict[int, PolyOverFq] = {}
    h = t
    e = 0
    while rest.degree >= 1:
        e += 1
        if rest.degree < 2 * e:
            # remaining factors all have degree >= e, so rest is irreducible
            parts[rest.degree] = rest.monic()
            break
        h = h.pow_mod(ctx.q, rest)
        g = rest.gcd(h - t)
        if not g.is_constant():
            parts[e] = g
            while not rest.gcd(g).is_constant():
                rest = rest // rest.gcd(g)
            h = h % rest if rest.degree >= 1 else h
    return parts
