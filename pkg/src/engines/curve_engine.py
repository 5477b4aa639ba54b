import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .places import distinct_degree_parts, field_from_q, make_field, places_of_degree
from .residue import ResidueField
from ..models.curve import (
    BAD_TRACE, ConductorData, CurveModel, ReductionData, ReductionTable, ReductionType,
)
from ..models.field import FieldContext
from ..models.poly import Place, PolyOverFq
from ..utils.config import Config
from ..utils.errors import CurveError, NonMinimalModelError, TwistError, WorkBoundExceeded
from ..utils.serialization import CurveDocument

logger = logging.getLogger(__name__)

PolyLike = Union[PolyOverFq, int, Sequence]


def as_poly(ctx: FieldContext, value: PolyLike) -> PolyOverFq:
    """Accept a polynomial, a constant, prime-field integers, or coordinate lists (lowest degree first)."""
    if isinstance(value, PolyOverFq):
        if value.ctx != ctx:
            raise CurveError("coefficient polynomial lives over another field")
        return value
    if isinstance(value, int):
        return PolyOverFq.from_ints(ctx, [value])
    values = list(value)
    if values and isinstance(values[0], (list, tuple)):
        return PolyOverFq(ctx, tuple(ctx.code(c) for c in values))
    return PolyOverFq.from_ints(ctx, values)


def make_curve(ctx: FieldContext, a1: PolyLike, a2: PolyLike, a3: PolyLike,
               a4: PolyLike, a6: PolyLike, name: Optional[str] = None) -> CurveModel:
    curve = CurveModel(ctx, *(as_poly(ctx, a) for a in (a1, a2, a3, a4, a6)), name=name)
    if curve.discriminant.is_zero():
        raise CurveError("discriminant vanishes: not an elliptic curve", curve=name)
    num, den = curve.j_invariant
    if num.is_constant() and den.is_constant():
        raise CurveError("constant j-invariant (isotrivial curve) is not supported", curve=name)
    logger.debug("curve %s: deg disc %d, chart exponent %d", name, curve.discriminant.degree, curve.chart_exponent)
    return curve


def ulmer_curve(p: int, k: int, d: int) -> CurveModel:
    """y^2 + xy = x^3 - t^d over F_{p^k}(t)."""
    ctx = make_field(p, k)
    zero = PolyOverFq.zero(ctx)
    a6 = -PolyOverFq.monomial(ctx, d)
    return make_curve(ctx, PolyOverFq.one(ctx), zero, zero, zero, a6, name=f"E_{d}")


def legendre_curve(ctx: FieldContext) -> CurveModel:
    """y^2 = x(x-1)(x-t)."""
    t = PolyOverFq.t(ctx)
    zero = PolyOverFq.zero(ctx)
    return make_curve(ctx, zero, -(t + 1), zero, t, zero, name="Legendre")


def local_model(curve: CurveModel, place: Place) -> Tuple[CurveModel, PolyOverFq]:
    """Model integral at the place together with the uniformiser it is reduced by."""
    if place.is_infinite:
        return curve.infinity_chart, PolyOverFq.t(curve.ctx)
    return curve, place.generator


def _check_minimal(model: CurveModel, pi: PolyOverFq, place: Place) -> None:
    v_disc = model.discriminant.valuation(pi)
    if v_disc < 12:
        return
    v_c4 = model.c4.valuation(pi)
    if v_c4 < 4:
        return
    if model.p >= 5:
        raise NonMinimalModelError(
            f"non-minimal at place {place.label()}", place=place.label(), v_disc=v_disc, v_c4=v_c4,
        )
    # in characteristic 2 and 3 these valuations do not decide minimality
    logger.debug("place %s: v(disc)=%d, v(c4)=%d undecided in characteristic %d",
                 place.label(), v_disc, v_c4, model.p)


def _reduced(rf: ResidueField, f: PolyOverFq, n: int) -> np.ndarray:
    return rf.constant(f, n)


def _count_odd(model: CurveModel, rf: ResidueField) -> int:
    """a_v = -sum chi(4x^3 + b2 x^2 + 2 b4 x + b6)."""
    xs = rf.elements
    n = xs.shape[0]
    coeffs = (
        _reduced(rf, model.b6, n),
        _reduced(rf, model.b4 * 2, n),
        _reduced(rf, model.b2, n),
        _reduced(rf, PolyOverFq.from_ints(model.ctx, [4]), n),
    )
    values = rf.evaluate(coeffs, xs)
    return -int(rf.character(values).sum())


def _count_even(model: CurveModel, rf: ResidueField) -> int:
    """a_v = q_v - #affine points, solving y^2 + h(x) y = f(x) through the trace."""
    xs = rf.elements
    n = xs.shape[0]
    a1, a2, a3, a4, a6 = (_reduced(rf, a, n) for a in model.coefficients)
    one = _reduced(rf, PolyOverFq.one(model.ctx), n)
    h = rf.add(rf.mul(a1, xs), a3)
    f = rf.evaluate((a6, a4, a2, one), xs)
    h_zero = rf.is_zero(h)
    ratio = rf.mul(f, rf.inverse(rf.mul(h, h)))
    traces = rf.trace(ratio)
    affine = int(h_zero.sum()) + 2 * int(((traces == 0) & ~h_zero).sum())
    return rf.size - affine


def _classify_odd(model: CurveModel, rf: ResidueField) -> ReductionType:
    xs = rf.elements
    n = xs.shape[0]
    b2 = _reduced(rf, model.b2, n)
    b4 = _reduced(rf, model.b4, n)
    b6 = _reduced(rf, model.b6, n)
    four = _reduced(rf, PolyOverFq.from_ints(model.ctx, [4]), n)
    g = rf.evaluate((b6, rf.scale(b4, 2), b2, four), xs)
    dg = rf.evaluate((rf.scale(b4, 2), rf.scale(b2, 2), rf.scale(four, 3)), xs)
    singular = np.flatnonzero(rf.is_zero(g) & rf.is_zero(dg))
    if singular.size != 1:
        raise CurveError(f"expected one singular point, found {singular.size}")
    x0 = xs[singular]
    # the tangent cone at the node is Y^2 = (12 x0 + b2) X^2
    c2 = rf.add(rf.scale(x0, 12), b2[:1])
    if rf.is_zero(c2)[0]:
        return ReductionType.ADDITIVE
    return ReductionType.SPLIT if rf.character(c2)[0] == 1 else ReductionType.NONSPLIT


def _classify_even(model: CurveModel, rf: ResidueField) -> ReductionType:
    a1, a2, a3 = (_reduced(rf, a, 1) for a in (model.a1, model.a2, model.a3))
    if rf.is_zero(a1)[0]:
        return ReductionType.ADDITIVE
    inv_a1 = rf.inverse(a1)
    x0 = rf.mul(a3, inv_a1)
    value = rf.mul(rf.add(x0, a2), rf.mul(inv_a1, inv_a1))
    return ReductionType.SPLIT if rf.trace(value)[0] == 0 else ReductionType.NONSPLIT


def reduce_at(curve: CurveModel, place: Place, max_residue_field: Optional[int] = None) -> ReductionData:
    """Reduction type and Frobenius trace at one place by exhaustive counting over k_v."""

    model, pi = local_model(curve, place)
    rf = ResidueField(curve.ctx, pi, max_residue_field)
    q_v = rf.size
    even = curve.p == 2
    a_v = _count_even(model, rf) if even else _count_odd(model, rf)
    count = q_v + 1 - a_v

    if model.discriminant.valuation(pi) == 0:
        if a_v * a_v > 4 * q_v:
            raise CurveError(f"Hasse bound violated at {place.label()}: a_v={a_v}, q_v={q_v}")
        theta = math.acos(max(-1.0, min(1.0, a_v / (2 * math.sqrt(q_v)))))
        return ReductionData(place, ReductionType.GOOD, a_v, q_v, theta_v=theta, point_count=count)

    _check_minimal(model, pi, place)
    kind = _classify_even(model, rf) if even else _classify_odd(model, rf)
    if BAD_TRACE[kind] != a_v:
        raise CurveError(
            f"point count disagrees with {kind.value} reduction at {place.label()}",
            a_v=a_v, place=place.label(),
        )
    return ReductionData(place, kind, a_v, q_v, point_count=count)


def reduction_table(curve: CurveModel, max_degree: int, max_residue_field: Optional[int] = None) -> ReductionTable:
    if max_degree > Config.MAX_PLACE_DEGREE:
        raise WorkBoundExceeded(
            f"place degree {max_degree} exceeds the place-degree bound",
            bound="max_place_degree", limit=Config.MAX_PLACE_DEGREE, requested=max_degree,
        )
    rows: List[ReductionData] = []
    for d in range(1, max_degree + 1):
        for place in places_of_degree(curve.ctx, d):
            rows.append(reduce_at(curve, place, max_residue_field))
    return ReductionTable(curve, rows)


def translate(curve: CurveModel, c: int) -> CurveModel:
    """Substitute t -> t + c for c in F_q (given as an element code)."""
    ctx = curve.ctx
    shift = PolyOverFq(ctx, (c, 1))
    coeffs = [a.compose(shift) for a in curve.coefficients]
    return CurveModel(ctx, *coeffs, name=curve.name)


def short_form(curve: CurveModel) -> CurveModel:
    """y^2 = x^3 - 27 c4 x - 54 c6, isomorphic to the curve when p >= 5."""
    if curve.p < 5:
        raise CurveError("short Weierstrass form needs characteristic >= 5", p=curve.p)
    ctx = curve.ctx
    zero = PolyOverFq.zero(ctx)
    return CurveModel(ctx, zero, zero, zero, curve.c4 * (-27), curve.c6 * (-54), name=curve.name)


def _finite_bad_parts(curve: CurveModel) -> Dict[int, Tuple[PolyOverFq, PolyOverFq]]:
    """Per degree e: (multiplicative part, additive part) of the finite bad locus."""
    parts = distinct_degree_parts(curve.discriminant)
    out = {}
    for e, G in sorted(parts.items()):
        additive = G.gcd(curve.c4)
        out[e] = (G // additive, additive)
    return out


def multiplicative_locus(curve: CurveModel) -> PolyOverFq:
    """Monic product of the finite places of multiplicative reduction."""
    m = PolyOverFq.one(curve.ctx)
    for mult, _ in _finite_bad_parts(curve).values():
        m = m * mult
    return m


def _assert_finite_minimal(curve: CurveModel) -> None:
    disc, c4 = curve.discriminant, curve.c4
    radical = PolyOverFq.one(curve.ctx)
    for G in distinct_degree_parts(disc).values():
        radical = radical * G
    if radical.is_constant():
        return
    deep_disc = disc // disc.gcd(radical ** 11)
    deep_c4 = c4 // c4.gcd(radical ** 3)
    locus = radical.gcd(deep_disc).gcd(deep_c4)
    if not locus.is_constant():
        raise NonMinimalModelError(f"non-minimal at the places dividing {locus!r}", locus=repr(locus))


def infinity_valuations(curve: CurveModel) -> Tuple[int, int]:
    """(v_inf(disc), v_inf(c4)) of the infinity chart."""
    e = curve.chart_exponent
    return 12 * e - curve.discriminant.degree, 4 * e - curve.c4.degree


def conductor_degree(curve: CurveModel) -> ConductorData:
    """Tame conductor degree and N = deg(n) - 4 over P^1."""
    if curve.p in (2, 3):
        raise CurveError("wild ramification unsupported; supply degree explicitly", p=curve.p)
    _assert_finite_minimal(curve)
    mult_deg = add_deg = 0
    m = PolyOverFq.one(curve.ctx)
    for mult, additive in _finite_bad_parts(curve).values():
        mult_deg += mult.degree
        add_deg += additive.degree
        m = m * mult
    v_disc, v_c4 = infinity_valuations(curve)
    if v_disc >= 12 and v_c4 >= 4:
        raise NonMinimalModelError("non-minimal at place inf", place="inf", v_disc=v_disc, v_c4=v_c4)
    if v_disc == 0:
        inf_exp = 0
    else:
        inf_exp = 1 if v_c4 == 0 else 2
    degree = mult_deg + 2 * add_deg + inf_exp
    logger.info("conductor of %s: %d multiplicative, %d additive, %d at infinity",
                curve.name or "curve", mult_deg, add_deg, inf_exp)
    return ConductorData(
        degree=degree,
        analytic_degree=degree - 4,
        multiplicative_degree=mult_deg,
        additive_degree=add_deg,
        infinity_exponent=inf_exp,
        multiplicative_locus=m,
    )


def bad_places(curve: CurveModel, max_degree: Optional[int] = None) -> List[Place]:
    """Bad places in place order, split out by enumeration within the residue-field bound."""
    places: List[Place] = []
    v_disc, _ = infinity_valuations(curve)
    if v_disc > 0:
        places.append(Place.infinity())
    for e, G in sorted(distinct_degree_parts(curve.discriminant).items()):
        if max_degree is not None and e > max_degree:
            continue
        found = [pl for pl in places_of_degree(curve.ctx, e)
                 if not pl.is_infinite and pl.generator.divides(G)]
        if sum(pl.degree for pl in found) != G.degree:
            raise CurveError(f"bad places of degree {e} do not account for the discriminant")
        places.extend(found)
    return places


def is_squarefree(f: PolyOverFq) -> bool:
    if f.is_zero():
        return False
    if f.is_constant():
        return True
    df = f.derivative()
    return not df.is_zero() and f.gcd(df).is_constant()


def quadratic_twist(curve: CurveModel, f: PolyOverFq, m: Optional[PolyOverFq] = None) -> CurveModel:
    """E_f: y^2 = x^3 + f^2 a x + f^3 b for a short model y^2 = x^3 + a x + b."""
    if curve.p < 5:
        raise TwistError("quadratic twists need characteristic >= 5", p=curve.p)
    if any(not a.is_zero() for a in (curve.a1, curve.a2, curve.a3)):
        raise TwistError("twisting needs a short Weierstrass model; apply short_form first")
    if not is_squarefree(f):
        raise TwistError(f"twisting polynomial {f!r} is not squarefree")
    m = multiplicative_locus(curve) if m is None else m
    if not f.gcd(m).is_constant():
        raise TwistError(f"twisting polynomial {f!r} meets the multiplicative locus {m!r}")
    f2 = f * f
    name = f"{curve.name or 'E'} twisted by {f!r}"
    return make_curve(curve.ctx, curve.a1, curve.a2, curve.a3, curve.a4 * f2, curve.a6 * f2 * f, name=name)


def base_change(curve: CurveModel, n: int) -> CurveModel:
    """The same model over F_{p^n}(t); prime-field codes embed unchanged."""
    if n == 1:
        return curve
    if curve.ctx.k != 1:
        raise CurveError("base change is implemented from prime fields only", q=curve.q)
    ctx = make_field(curve.p, n)
    coeffs = [PolyOverFq(ctx, a.coeffs) for a in curve.coefficients]
    name = f"{curve.name or 'E'}/F_{curve.p}^{n}"
    return make_curve(ctx, *coeffs, name=name)


def _poly_from_json(ctx: FieldContext, coeffs: Sequence) -> PolyOverFq:
    """Coefficients given as coordinate lists, or as integers (prime-field values or element codes)."""

    def code(c) -> int:
        if isinstance(c, (list, tuple)):
            return ctx.code(c)
        return ctx.from_int(c) if ctx.k == 1 else int(c)

    return PolyOverFq(ctx, tuple(code(c) for c in coeffs))


def curve_from_json(data: Dict) -> CurveModel:
    """Read a curve file: five coefficient arrays over F_{p^k}, or a named family."""
    doc = CurveDocument.model_validate(data)
    ctx = make_field(doc.p, doc.k) if doc.p is not None else field_from_q(doc.q)
    if doc.modulus is not None and tuple(doc.modulus) != ctx.modulus:
        raise CurveError(f"field modulus {doc.modulus} differs from the standard one {list(ctx.modulus)}")
    if doc.family == "ulmer":
        return ulmer_curve(ctx.p, ctx.k, doc.d)
    if doc.family == "legendre":
        return legendre_curve(ctx)
    a1, a2, a3, a4, a6 = (_poly_from_json(ctx, a) for a in doc.a)
    return make_curve(ctx, a1, a2, a3, a4, a6, name=doc.name)
