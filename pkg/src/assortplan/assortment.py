"""Two-stage threshold ranking with a per-iteration audit trace.

Each iteration computes a quality-weighted review-count cutoff over the
remaining pool, ranks the products that clear it by rating, recomputes a
price-weighted cutoff over that shortlist, filters again, and selects the
first survivor before eliminating it from the pool.  Revenue shares are
never read, so the resulting order cannot favor the platform's own cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .catalog import Catalog, Product

POLICY_STAGE1_ORDER = "stage1-order"
POLICY_PRICE_DESC = "price-desc"
POLICIES = (POLICY_STAGE1_ORDER, POLICY_PRICE_DESC)


def stage1_threshold(products: Iterable[Product]) -> float:
    """Rating-weighted mean review count over the given products.

    Products below this count are not treated as quality evidence no matter
    how high their average rating.  Undefined (raises) when every rating is
    zero.
    """
    products = list(products)
    rating_mass = sum(p.avg_rating for p in products)
    if rating_mass == 0:
        raise ValueError("stage-1 threshold undefined: all ratings are zero")
    return sum(p.avg_rating * p.review_count for p in products) / rating_mass


def stage2_threshold(products: Iterable[Product]) -> float:
    """Price-weighted mean review count over the given products.

    Undefined (raises) when every price is zero.
    """
    products = list(products)
    price_mass = sum(p.price for p in products)
    if price_mass == 0:
        raise ValueError("stage-2 threshold undefined: all prices are zero")
    return sum(p.price * p.review_count for p in products) / price_mass


def stage1_rank(products: Iterable[Product], threshold: float) -> list[str]:
    """Ids of products with review_count >= threshold, best rating first.

    Ties break by review count descending, then id ascending.
    """
    eligible = [p for p in products if p.review_count >= threshold]
    eligible.sort(key=lambda p: (-p.avg_rating, -p.review_count, p.id))
    return [p.id for p in eligible]


def stage2_filter(
    shortlist: Sequence[str],
    threshold: float,
    by_id: Mapping[str, Product],
    policy: str = POLICY_STAGE1_ORDER,
) -> list[str]:
    """Subsequence of the shortlist whose products clear the stage-2 cutoff.

    The default policy preserves the shortlist (quality) order; the
    price-desc policy re-sorts survivors by price descending, breaking
    price ties by pinned demand descending, then id ascending.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown ordering policy {policy!r}")
    passers = [pid for pid in shortlist if by_id[pid].review_count >= threshold]
    if policy == POLICY_PRICE_DESC:
        passers.sort(
            key=lambda pid: (-by_id[pid].price, -(by_id[pid].demand_override or 0.0), pid)
        )
    return passers


@dataclass(frozen=True)
class Ranking:
    """An ordered slate of product ids filling at most slot_count slots."""

    slots: tuple[str, ...]
    slot_count: int


@dataclass(frozen=True)
class IterationRecord:
    """Audit record of one selection round.

    Thresholds are None when undefined for the round's pool (all-zero
    ratings or prices), in which case the documented fallback picked the
    product and fallback_used is set.
    """

    stage1_threshold: float | None
    stage1_order: tuple[str, ...]
    stage2_threshold: float | None
    stage2_passers: tuple[str, ...]
    selected: str
    fallback_used: bool


@dataclass(frozen=True)
class TwoStageTrace:
    """Per-iteration audit trail; iteration i selected slot i of the ranking."""

    iterations: tuple[IterationRecord, ...]

    def to_report(self) -> list[dict]:
        return [
            {
                "iteration": i,
                "stage1_threshold": rec.stage1_threshold,
                "stage1_order": list(rec.stage1_order),
                "stage2_threshold": rec.stage2_threshold,
                "stage2_passers": list(rec.stage2_passers),
                "selected": rec.selected,
                "fallback_used": rec.fallback_used,
            }
            for i, rec in enumerate(self.iterations, start=1)
        ]


def run_iteration(pool: Sequence[Product], policy: str = POLICY_STAGE1_ORDER) -> IterationRecord:
    """Run one selection round over a pool of remaining products.

    Fallbacks: with all ratings zero the most-reviewed product is taken;
    with the shortlist priced at zero throughout, its top entry is taken.
    """
    if not pool:
        raise ValueError("iteration pool is empty")
    by_id = {p.id: p for p in pool}
    try:
        cutoff1: float | None = stage1_threshold(pool)
    except ValueError:
        cutoff1 = None
    shortlist = stage1_rank(pool, cutoff1) if cutoff1 is not None else []
    if not shortlist:
        pick = sorted(pool, key=lambda p: (-p.review_count, -p.avg_rating, p.id))[0]
        return IterationRecord(cutoff1, (), None, (), pick.id, True)
    try:
        cutoff2: float | None = stage2_threshold([by_id[pid] for pid in shortlist])
    except ValueError:
        cutoff2 = None
    passers = (
        stage2_filter(shortlist, cutoff2, by_id, policy) if cutoff2 is not None else []
    )
    if passers:
        return IterationRecord(cutoff1, tuple(shortlist), cutoff2, tuple(passers), passers[0], False)
    return IterationRecord(cutoff1, tuple(shortlist), cutoff2, (), shortlist[0], True)


def two_stage_select(
    catalog: Catalog,
    slot_count: int,
    policy: str = POLICY_STAGE1_ORDER,
) -> tuple[Ranking, TwoStageTrace]:
    """Fill up to slot_count slots by iterative two-stage selection.

    Each round removes exactly one product until the slots are filled or
    the catalog is exhausted.  Deterministic: identical catalog and policy
    reproduce the identical ranking and trace.
    """
    if slot_count < 1:
        raise ValueError(f"slot_count must be >= 1, got {slot_count}")
    if not catalog.products:
        raise ValueError("catalog is empty")
    if policy not in POLICIES:
        raise ValueError(f"unknown ordering policy {policy!r}")
    remaining = list(catalog.products)
    iterations: list[IterationRecord] = []
    slots: list[str] = []
    while remaining and len(slots) < slot_count:
        record = run_iteration(remaining, policy)
        iterations.append(record)
        slots.append(record.selected)
        remaining = [p for p in remaining if p.id != record.selected]
    return Ranking(tuple(slots), slot_count), TwoStageTrace(tuple(iterations))
