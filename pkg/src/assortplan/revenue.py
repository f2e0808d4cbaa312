"""Cascade purchase probabilities, exact expected revenue, and the
exhaustive slate optimizer used as the optimality oracle.

A browsing customer inspects slots in order and buys the first satisfactory
product, so slot k converts with probability prod_{i<k}(1 - lambda_i) *
lambda_k.  Expected revenue truncates the walk at the attention span; for a
random span the point-mass evaluations are mixed by the span distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .catalog import BeliefPrior, Catalog
from .demand import CostModel, purchase_prob

# Hard ceiling on the number of ordered slates the oracle may enumerate.
ENUMERATION_LIMIT = 50_000_000
MAX_UNIVERSE = 12
MAX_SLOTS = 8

_PMF_TOL = 1e-12
_FORM_AGREEMENT_TOL = 1e-10


class EnumerationGuardError(RuntimeError):
    """The brute-force oracle would exceed its enumeration budget."""

    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count


@dataclass(frozen=True)
class AttentionSpanDist:
    """Distribution of the number of slots a customer is willing to view.

    Either a point mass (kind "deterministic") or a finite pmf over spans
    >= 1.  ``tail(y)`` gives Pr(span >= y).
    """

    kind: str
    pmf: tuple[tuple[int, float], ...]

    @classmethod
    def deterministic(cls, span: int) -> "AttentionSpanDist":
        if not isinstance(span, int) or span < 1:
            raise ValueError(f"span must be an integer >= 1, got {span!r}")
        return cls(kind="deterministic", pmf=((span, 1.0),))

    @classmethod
    def from_pmf(
        cls, entries: Mapping[int, float] | Iterable[tuple[int, float]]
    ) -> "AttentionSpanDist":
        items = sorted(dict(entries).items())
        if not items:
            raise ValueError("span pmf is empty")
        total = 0.0
        for span, prob in items:
            if not isinstance(span, int) or span < 1:
                raise ValueError(f"span values must be integers >= 1, got {span!r}")
            if prob < 0:
                raise ValueError(f"span probability must be nonnegative, got {prob}")
            total += prob
        if abs(total - 1.0) > _PMF_TOL:
            raise ValueError(f"span probabilities must sum to 1, got {total!r}")
        return cls(kind="pmf", pmf=tuple(items))

    def tail(self, span: int) -> float:
        """Pr(attention span >= span)."""
        return math.fsum(h for y, h in self.pmf if y >= span)

    @property
    def max_span(self) -> int:
        return self.pmf[-1][0]


@dataclass(frozen=True)
class SlateInputs:
    """Per-slot evaluation inputs for an ordered slate."""

    ids: tuple[str, ...]
    lambdas: tuple[float, ...]
    prices: tuple[float, ...]
    omegas: tuple[float, ...]


@dataclass(frozen=True)
class CascadeProbs:
    """Unconditional slot purchase probabilities and the no-purchase mass."""

    per_slot: tuple[float, ...]
    no_purchase: float


@dataclass(frozen=True)
class SlateEvaluation:
    per_slot_purchase_prob: tuple[float, ...]
    no_purchase_prob: float
    expected_revenue: float


def resolve_inputs(
    catalog: Catalog,
    slate: Sequence[str],
    prior: BeliefPrior | None = None,
    cost: CostModel | None = None,
    omega: float | None = None,
) -> SlateInputs:
    """Resolve per-slot demand, price, and share for an ordered slate.

    Demand precedence: a product's pinned override wins; otherwise the
    logit path computes a slot-dependent probability from the prior and
    cost model.  ``omega`` overrides every revenue share uniformly.
    """
    if len(set(slate)) != len(slate):
        raise ValueError(f"slate contains duplicate ids: {list(slate)}")
    cost = cost if cost is not None else CostModel()
    lambdas = []
    prices = []
    omegas = []
    for slot, pid in enumerate(slate, start=1):
        product = catalog.get(pid)
        lambdas.append(purchase_prob(product, prior, slot, cost))
        prices.append(product.price)
        omegas.append(omega if omega is not None else product.revenue_share)
    return SlateInputs(tuple(slate), tuple(lambdas), tuple(prices), tuple(omegas))


def cascade_probs(lambdas: Sequence[float]) -> CascadeProbs:
    """Slot-level purchase split under sequential browsing.

    Slot k receives prefix * lambda_k where prefix is the probability that
    every earlier slot was rejected; the leftover prefix is the no-purchase
    mass.  Together they always sum to 1.
    """
    per_slot = []
    prefix = 1.0
    for lam in lambdas:
        if not 0 < lam < 1:
            raise ValueError(f"purchase probability must lie in (0, 1), got {lam}")
        per_slot.append(prefix * lam)
        prefix *= 1.0 - lam
    return CascadeProbs(per_slot=tuple(per_slot), no_purchase=prefix)


def expected_revenue_fixed(inputs: SlateInputs, span: int) -> float:
    """Expected platform revenue from a customer who views up to ``span`` slots."""
    if span < 1:
        raise ValueError(f"span must be >= 1, got {span}")
    terms = []
    prefix = 1.0
    for k in range(min(span, len(inputs.ids))):
        lam = inputs.lambdas[k]
        terms.append(prefix * lam * inputs.prices[k] * inputs.omegas[k])
        prefix *= 1.0 - lam
    return math.fsum(terms)


def _mixture_value(
    lambdas: Sequence[float],
    prices: Sequence[float],
    omegas: Sequence[float],
    dist: AttentionSpanDist,
) -> float:
    """Span-pmf mixture of fixed-span revenues, via cumulative slot values.

    Shared by expected_revenue and the brute-force enumeration so that
    optimizer comparisons and reported slate values ride the identical
    arithmetic path.
    """
    cumulative = [0.0]
    prefix = 1.0
    running = 0.0
    for k, lam in enumerate(lambdas):
        running += prefix * lam * prices[k] * omegas[k]
        cumulative.append(running)
        prefix *= 1.0 - lam
    last = len(lambdas)
    return math.fsum(h * cumulative[min(y, last)] for y, h in dist.pmf)


def expected_revenue(inputs: SlateInputs, dist: AttentionSpanDist) -> float:
    """Expected revenue under a random attention span.

    Computed as the pmf-weighted mixture of fixed-span evaluations; spans
    beyond the slate length contribute the full-slate value.  The
    equivalent tail-weighted form is evaluated alongside and must agree to
    1e-10, failing loudly otherwise.
    """
    direct = _mixture_value(inputs.lambdas, inputs.prices, inputs.omegas, dist)

    tail_terms = []
    prefix = 1.0
    for k, lam in enumerate(inputs.lambdas, start=1):
        tail_terms.append(
            prefix * lam * inputs.prices[k - 1] * inputs.omegas[k - 1] * dist.tail(k)
        )
        prefix *= 1.0 - lam
    tail_form = math.fsum(tail_terms)

    if abs(direct - tail_form) > _FORM_AGREEMENT_TOL:
        raise ArithmeticError(f"span-expectation forms disagree: {direct!r} vs {tail_form!r}")
    return direct


def evaluate_slate(inputs: SlateInputs, dist: AttentionSpanDist) -> SlateEvaluation:
    """Bundle the cascade split with the span-weighted expected revenue."""
    probs = cascade_probs(inputs.lambdas)
    return SlateEvaluation(
        per_slot_purchase_prob=probs.per_slot,
        no_purchase_prob=probs.no_purchase,
        expected_revenue=expected_revenue(inputs, dist),
    )


@dataclass(frozen=True)
class OptimizeResult:
    slate: tuple[str, ...]
    value: float
    enumerated: int
    compare_value: float | None = None
    gap: float | None = None


def enumeration_count(universe: int, slot_count: int) -> int:
    """Number of nonempty ordered slates of at most slot_count products."""
    return sum(math.perm(universe, m) for m in range(1, min(slot_count, universe) + 1))


def brute_force_optimize(
    catalog: Catalog,
    slot_count: int,
    dist: AttentionSpanDist,
    prior: BeliefPrior | None = None,
    cost: CostModel | None = None,
    omega: float | None = None,
    compare: Sequence[str] | None = None,
) -> OptimizeResult:
    """Exhaustively maximize expected revenue over every ordered slate.

    Enumerates all nonempty ordered selections of at most slot_count
    products; ties break toward the lexicographically smallest id sequence,
    so the result is independent of evaluation order.  Refuses universes
    beyond the guard limits rather than truncating silently.
    """
    if slot_count < 1:
        raise ValueError(f"slot_count must be >= 1, got {slot_count}")
    if not catalog.products:
        raise ValueError("catalog is empty")
    size = catalog.universe_size
    count = enumeration_count(size, slot_count)
    if size > MAX_UNIVERSE or slot_count > MAX_SLOTS or count > ENUMERATION_LIMIT:
        raise EnumerationGuardError(
            f"enumeration guard exceeded: {count} ordered slates "
            f"(universe {size}, slots {slot_count}); "
            f"limits are universe <= {MAX_UNIVERSE}, slots <= {MAX_SLOTS}, "
            f"slates <= {ENUMERATION_LIMIT}",
            count,
        )

    cost = cost if cost is not None else CostModel()
    ids = [p.id for p in catalog.products]
    # Demand depends only on (product, slot), so cache the logit evaluations.
    lam_cache: dict[tuple[str, int], float] = {}

    def lam_at(pid: str, slot: int) -> float:
        key = (pid, slot)
        if key not in lam_cache:
            lam_cache[key] = purchase_prob(catalog.get(pid), prior, slot, cost)
        return lam_cache[key]

    price = {p.id: p.price for p in catalog.products}
    share = {p.id: (omega if omega is not None else p.revenue_share) for p in catalog.products}

    best_value = -math.inf
    best_slate: tuple[str, ...] = ()
    enumerated = 0
    for m in range(1, min(slot_count, size) + 1):
        for perm in permutations(ids, m):
            enumerated += 1
            lams = [lam_at(pid, slot) for slot, pid in enumerate(perm, start=1)]
            value = _mixture_value(
                lams, [price[p] for p in perm], [share[p] for p in perm], dist
            )
            if value > best_value or (value == best_value and perm < best_slate):
                best_value = value
                best_slate = perm

    compare_value = None
    gap = None
    if compare is not None:
        compare_inputs = resolve_inputs(catalog, compare, prior=prior, cost=cost, omega=omega)
        compare_value = expected_revenue(compare_inputs, dist)
        gap = best_value - compare_value
    return OptimizeResult(
        slate=best_slate,
        value=best_value,
        enumerated=enumerated,
        compare_value=compare_value,
        gap=gap,
    )
