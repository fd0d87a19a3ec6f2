"""Regularization and renormalization of branched integrals.

The regularized value of a decorated forest is the closed-form symbol
x^(-sum of decorations) * prod_v pi/sin(pi L_v), one cosecant factor per
vertex, with L_v the subtree sum at v.  Evaluating at x = 1 keeps the factor
list; expanding each factor as 1/z_v + h(z_v) and clearing denominators
yields a single fraction with one simple pole per vertex, whose holomorphic
projection at zero is the renormalized value: an exact polynomial in pi^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import mpmath

from .errors import NotProperlyDecorated
from .forest import (
    DecoratedForest,
    canonical,
    decorations,
    degree,
    subtree_sums,
    vertex_ids,
)
from .pairing import (
    InnerProduct,
    LinearForm,
    check_properly_decorated,
    gram,
    inner,
)
from .projector import (
    GermFraction,
    ProjectionContext,
    ev0_piplus_direct,
)
from .series import PiPoly, TruncSeries, h_series


@dataclass(frozen=True)
class RegularizedIntegral:
    """The symbol f * x^(-exponent) with f a product of cosecant factors.

    ``factors`` holds the arguments L of the pi/sin(pi L) factors, sorted
    canonically so that structural equality is multiset equality.
    """

    exponent: LinearForm
    factors: tuple[LinearForm, ...]

    @staticmethod
    def make(
        exponent: LinearForm, factors: tuple[LinearForm, ...]
    ) -> "RegularizedIntegral":
        return RegularizedIntegral(
            exponent, tuple(sorted(factors, key=lambda f: f.items))
        )


@dataclass(frozen=True)
class RenormalizedValue:
    """Exact value in Q[pi^2] together with a high-precision numeric rendering."""

    exact: PiPoly
    numeric: mpmath.mpf

    @staticmethod
    def from_exact(exact: PiPoly, dps: int = 30) -> "RenormalizedValue":
        return RenormalizedValue(exact, exact.evalf(dps))

    def numeric_str(self, digits: int = 17) -> str:
        return mpmath.nstr(self.numeric, digits)


def _require_properly_decorated(
    forest: DecoratedForest, Q: InnerProduct
) -> None:
    if not check_properly_decorated(forest, Q):
        raise NotProperlyDecorated(
            "the pipeline is defined only for properly decorated forests"
        )


def regularize(forest: DecoratedForest, Q: InnerProduct) -> RegularizedIntegral:
    """Closed form of the regularized branched integral attached to a forest."""
    _require_properly_decorated(forest, Q)
    sums = subtree_sums(forest)
    # The exponent is the sum of all decorations, equivalently the sum of the
    # root subtree sums of the individual trees.
    exponent = LinearForm(())
    for d in decorations(forest).values():
        exponent = exponent + d
    return RegularizedIntegral.make(exponent, tuple(sums.values()))


def r1(forest: DecoratedForest, Q: InnerProduct) -> tuple[LinearForm, ...]:
    """The cosecant factor list of the evaluation at x = 1."""
    return regularize(forest, Q).factors


def expand_r1(
    forest: DecoratedForest, Q: InnerProduct, N: Optional[int] = None
) -> tuple[GermFraction, ProjectionContext]:
    """Laurent-expand the factor product into a single germ fraction.

    Each factor pi/sin(pi L_v) = 1/z_v + h(z_v) in the coordinate z_v = L_v;
    the product over all vertices equals
    prod_v (1 + z_v h(z_v)) / prod_v z_v, a fraction with one simple pole per
    vertex.  The context carries the Gram matrix of the subtree sums.
    """
    _require_properly_decorated(forest, Q)
    deg = degree(forest)
    if N is None:
        N = deg + 2
    if N < deg:
        raise ValueError(f"truncation {N} is below the forest degree {deg}")
    variables = vertex_ids(forest)
    numerator = TruncSeries.one(variables, N)
    for v in variables:
        factor = TruncSeries.one(variables, N) + h_series(
            v, N, variables
        ).mul_by_var(v).truncated(N)
        numerator = numerator * factor
    ctx = ProjectionContext(gram(forest, Q))
    return GermFraction(numerator, frozenset(variables)), ctx


def renormalize(
    forest: DecoratedForest, Q: InnerProduct, N: Optional[int] = None
) -> RenormalizedValue:
    """The renormalized character: eval at zero of the projected expansion.

    Exact in Q[pi^2]; multiplicative over independent concatenation and
    invariant under global positive rescaling of the weights.  Evaluates via
    :func:`ev0_piplus_direct`, which agrees with the telescoping
    :func:`ev0_piplus` on every fraction but scales to larger forests.
    """
    frac, ctx = expand_r1(forest, Q, N)
    return RenormalizedValue.from_exact(ev0_piplus_direct(frac, ctx))


def is_similar(
    f1: DecoratedForest,
    Q1: InnerProduct,
    f2: DecoratedForest,
    Q2: InnerProduct,
) -> bool:
    """Same underlying forest with one global positive weight ratio.

    The candidate ratio is forced: it must equal the ratio of total weights.
    Scaling Q2 by it and comparing canonical encodings then settles the
    question without choosing a vertex matching by hand.
    """
    if f1.degree() != f2.degree():
        return False
    if f1.is_empty():
        return f2.is_empty()
    total1 = sum((inner(Q1, d, d) for d in decorations(f1).values()), start=0)
    total2 = sum((inner(Q2, d, d) for d in decorations(f2).values()), start=0)
    if total2 == 0 or total1 == 0:
        return False
    c = total1 / total2
    if c <= 0:
        return False
    return canonical(f1, Q1) == canonical(f2, Q2.scaled(c))
