"""Sequential market simulation: arriving customers browse a slate under the
cascade model, purchase, rate, and move the public review state.

Randomness is counter-based: customer t draws from a Philox stream keyed by
the config seed at counter t * 2**128, so a policy change (say, re-ranking
mid-run) never perturbs the draws of later customers.  Within a customer the
draw order is fixed: one uniform for the attention span (random spans only),
one uniform per inspected slot, one normal for the rating on purchase.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .assortment import POLICIES, POLICY_STAGE1_ORDER, two_stage_select
from .catalog import BeliefPrior, Catalog
from .demand import (
    CostModel,
    ReviewState,
    expected_utility,
    logistic,
    posterior_mean,
    update_review_state,
)
from .revenue import AttentionSpanDist


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls.

    Exactly one of ``slate`` (fixed display order) or ``rerank_every``
    (recompute the two-stage ranking every r customers, needs
    ``slot_count``) must be set.  ``freeze_beliefs`` pins review states at
    their catalog values: no ratings are drawn and demand never moves.
    ``clamp_ratings`` optionally clips drawn ratings to a display scale.
    """

    horizon: int
    seed: int
    dist: AttentionSpanDist
    prior: BeliefPrior
    cost: CostModel = CostModel()
    slate: tuple[str, ...] | None = None
    rerank_every: int | None = None
    slot_count: int | None = None
    policy: str = POLICY_STAGE1_ORDER
    freeze_beliefs: bool = False
    clamp_ratings: tuple[float, float] | None = None


@dataclass(frozen=True)
class CustomerRecord:
    """One arrival: span drawn, slots viewed, and the purchase outcome.

    ``post_state`` is the (count, mean) review state of the purchased
    product right after this customer, present only when the state moved.
    """

    t: int
    span: int
    viewed: int
    purchased: str | None
    rating: float | None
    post_state: tuple[int, float] | None


@dataclass(frozen=True)
class SimSummary:
    gross_revenue: float
    platform_revenue: float
    purchase_count: int
    purchase_rate: float
    per_product_purchases: dict[str, int]
    final_states: dict[str, tuple[int, float]]
    posterior_means: dict[str, float]


@dataclass(frozen=True)
class SimTrace:
    records: tuple[CustomerRecord, ...]
    final_states: dict[str, ReviewState]
    prior: BeliefPrior
    product_params: dict[str, tuple[float, float]]

    @cached_property
    def summary(self) -> SimSummary:
        return summarize(self)


def _validate_config(catalog: Catalog, cfg: SimConfig) -> None:
    if cfg.horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {cfg.horizon}")
    if not 0 <= cfg.seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {cfg.seed}")
    if (cfg.slate is None) == (cfg.rerank_every is None):
        raise ValueError("exactly one of slate or rerank_every must be set")
    if cfg.rerank_every is not None:
        if cfg.rerank_every < 1:
            raise ValueError(f"rerank_every must be >= 1, got {cfg.rerank_every}")
        if cfg.slot_count is None or cfg.slot_count < 1:
            raise ValueError("slot_count must be >= 1 when re-ranking")
    if cfg.policy not in POLICIES:
        raise ValueError(f"unknown ordering policy {cfg.policy!r}")
    if cfg.clamp_ratings is not None and cfg.clamp_ratings[0] > cfg.clamp_ratings[1]:
        raise ValueError(f"clamp_ratings bounds out of order: {cfg.clamp_ratings}")
    if cfg.slate is not None:
        if not cfg.slate:
            raise ValueError("fixed slate is empty")
        if len(set(cfg.slate)) != len(cfg.slate):
            raise ValueError(f"fixed slate contains duplicate ids: {list(cfg.slate)}")
        reachable = [catalog.get(pid) for pid in cfg.slate]
    else:
        reachable = list(catalog.products)
    if not cfg.freeze_beliefs:
        for product in reachable:
            if product.demand_override is None and (
                product.true_quality is None or product.rating_noise is None
            ):
                raise ValueError(
                    f"product {product.id!r} needs true_quality and rating_noise "
                    "for an unfrozen run with computed demand"
                )


def _draw_span(dist: AttentionSpanDist, rng: np.random.Generator) -> int:
    if dist.kind == "deterministic":
        return dist.pmf[0][0]
    u = rng.random()
    cumulative = 0.0
    for span, prob in dist.pmf:
        cumulative += prob
        if u < cumulative:
            return span
    return dist.pmf[-1][0]


def simulate(catalog: Catalog, cfg: SimConfig) -> SimTrace:
    """Run the horizon; identical catalog and config reproduce the trace exactly.

    Customer t sees the review states left by customer t-1.  At slot j the
    purchase chance is the product's pinned override or the logistic of its
    current posterior utility; the walk stops at the first purchase or when
    the attention span runs out.
    """
    _validate_config(catalog, cfg)
    states: dict[str, ReviewState] = {
        p.id: ReviewState(p.review_count, p.avg_rating) for p in catalog.products
    }
    slate: tuple[str, ...] = cfg.slate if cfg.slate is not None else ()
    records: list[CustomerRecord] = []

    for t in range(1, cfg.horizon + 1):
        if cfg.rerank_every is not None and (t - 1) % cfg.rerank_every == 0:
            slate = _rerank(catalog, states, cfg)
        rng = np.random.Generator(np.random.Philox(key=cfg.seed, counter=t << 128))
        span = _draw_span(cfg.dist, rng)
        limit = min(span, len(slate))
        purchased: str | None = None
        rating: float | None = None
        post_state: tuple[int, float] | None = None
        viewed = limit
        for j in range(1, limit + 1):
            product = catalog.get(slate[j - 1])
            if product.demand_override is not None:
                lam = product.demand_override
            else:
                lam = logistic(
                    expected_utility(
                        cfg.prior, states[product.id], product.price, j, cfg.cost
                    )
                )
            if rng.random() < lam:
                purchased = product.id
                viewed = j
                if (
                    not cfg.freeze_beliefs
                    and product.true_quality is not None
                    and product.rating_noise is not None
                ):
                    drawn = float(rng.normal(product.true_quality, product.rating_noise))
                    if cfg.clamp_ratings is not None:
                        lo, hi = cfg.clamp_ratings
                        drawn = min(max(drawn, lo), hi)
                    rating = drawn
                    new_state = update_review_state(states[product.id], rating)
                    states[product.id] = new_state
                    post_state = (new_state.count, new_state.mean)
                break
        records.append(
            CustomerRecord(
                t=t,
                span=span,
                viewed=viewed,
                purchased=purchased,
                rating=rating,
                post_state=post_state,
            )
        )

    return SimTrace(
        records=tuple(records),
        final_states=states,
        prior=cfg.prior,
        product_params={p.id: (p.price, p.revenue_share) for p in catalog.products},
    )


def _rerank(
    catalog: Catalog, states: Mapping[str, ReviewState], cfg: SimConfig
) -> tuple[str, ...]:
    refreshed = tuple(
        dataclasses.replace(
            p, review_count=states[p.id].count, avg_rating=states[p.id].mean
        )
        for p in catalog.products
    )
    ranking, _ = two_stage_select(Catalog(refreshed), cfg.slot_count, cfg.policy)
    return ranking.slots


def summarize(trace: SimTrace) -> SimSummary:
    """Totals and rates over a trace; platform revenue is share-weighted."""
    gross = 0.0
    platform = 0.0
    per_product: dict[str, int] = {}
    for record in trace.records:
        if record.purchased is None:
            continue
        price, share = trace.product_params[record.purchased]
        gross += price
        platform += share * price
        per_product[record.purchased] = per_product.get(record.purchased, 0) + 1
    count = sum(per_product.values())
    horizon = len(trace.records)
    final_states = {pid: (s.count, s.mean) for pid, s in trace.final_states.items()}
    posterior_means = {
        pid: posterior_mean(trace.prior, s) for pid, s in trace.final_states.items()
    }
    return SimSummary(
        gross_revenue=gross,
        platform_revenue=platform,
        purchase_count=count,
        purchase_rate=count / horizon if horizon else 0.0,
        per_product_purchases=per_product,
        final_states=final_states,
        posterior_means=posterior_means,
    )


def trace_table(trace: SimTrace) -> str:
    """Columnar export: one tab-separated line per customer record."""
    lines = ["t\tspan\tviewed\tpurchased\trating\tpost_reviews\tpost_avg_rating"]
    for r in trace.records:
        lines.append(
            "\t".join(
                (
                    str(r.t),
                    str(r.span),
                    str(r.viewed),
                    r.purchased if r.purchased is not None else "-",
                    repr(r.rating) if r.rating is not None else "-",
                    str(r.post_state[0]) if r.post_state is not None else "-",
                    repr(r.post_state[1]) if r.post_state is not None else "-",
                )
            )
        )
    return "\n".join(lines) + "\n"


def summary_document(trace: SimTrace) -> dict:
    """Summary in the structured report shape used by the CLI."""
    s = trace.summary
    return {
        "gross_revenue": s.gross_revenue,
        "platform_revenue": s.platform_revenue,
        "purchase_count": s.purchase_count,
        "purchase_rate": s.purchase_rate,
        "per_product_purchases": dict(sorted(s.per_product_purchases.items())),
        "final_states": {
            pid: {"reviews": n, "avg_rating": mean}
            for pid, (n, mean) in sorted(s.final_states.items())
        },
        "posterior_means": dict(sorted(s.posterior_means.items())),
    }
