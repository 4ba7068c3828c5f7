"""Weight systems on directed trees and their derived systems.

A weight system assigns a complex weight to every non-root vertex.  The
square norm of the shift at a basis vector is the aggregate of squared child
weights; derived systems divide by parent norms (polar factor) or scale by a
power of the child/parent norm ratio (Aluthge transform).  Aggregates go
through exact finite sums, registered closed forms, or the series engine, in
that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

from . import series
from .errors import EvaluationError, StructureError
from .trees import DescendantSubtree, DirectedTree, OmegaTree, OmegaVertex

__all__ = [
    "NodeNorm",
    "WeightSystem",
    "TableWeights",
    "CallableWeights",
    "OmegaShiftWeights",
    "PolarWeights",
    "AluthgeWeights",
    "node_norm",
    "polar_weights",
    "aluthge_weights",
]


@dataclass(frozen=True)
class NodeNorm:
    """Norm of the shift applied to one basis vector.

    ``value`` is the square root of the child-weight aggregate when that is
    finite, ``inf`` when it diverges, ``nan`` when the series verdict was
    inconclusive.  ``detail`` keeps the underlying verdict so certificates
    survive into domain reports.
    """

    status: str  # "finite" | "infinite" | "unknown"
    value: float
    error: float = 0.0
    detail: object = None

    @property
    def is_finite(self) -> bool:
        return self.status == "finite"

    @property
    def is_zero(self) -> bool:
        return self.status == "finite" and self.value == 0.0

    @property
    def certificate(self):
        if isinstance(self.detail, series.Diverges):
            return self.detail.certificate
        return None


def _norm_from_verdict(verdict: series.SeriesVerdict) -> NodeNorm:
    if isinstance(verdict, series.Converges):
        value = math.sqrt(verdict.value)
        if verdict.tail_bound:
            error = math.sqrt(verdict.value + verdict.tail_bound) - value
        else:
            error = 0.0
        return NodeNorm("finite", value, error, verdict)
    if isinstance(verdict, series.Diverges):
        return NodeNorm("infinite", math.inf, 0.0, verdict)
    return NodeNorm("unknown", math.nan, 0.0, verdict)


class WeightSystem:
    """Base class: weights live on non-root vertices of ``tree``."""

    kind = "user"

    def __init__(self, tree: DirectedTree, policy: series.SumPolicy = series.DEFAULT_POLICY):
        self.tree = tree
        self.policy = policy
        self._aggregates: dict = {}

    def weight(self, v) -> complex:
        raise NotImplementedError

    def _require_non_root(self, v):
        self.tree.require_vertex(v)
        if self.tree.root is not None and v == self.tree.root:
            raise EvaluationError("weights are defined on non-root vertices only", vertex=v)

    def _closed_form(self, u) -> Optional[series.ExtendedNonneg]:
        return None

    def _divergence_claim(self, u) -> Optional[series.DivergenceCertificate]:
        return None

    def aggregate(self, u) -> series.SeriesVerdict:
        """Verdict for the sum of squared child weights at ``u``."""
        cached = self._aggregates.get(u)
        if cached is not None:
            return cached
        verdict = self._aggregate_uncached(u)
        self._aggregates[u] = verdict
        return verdict

    def _aggregate_uncached(self, u) -> series.SeriesVerdict:
        closed = self._closed_form(u)
        if closed is not None:
            if isinstance(closed, series.Finite):
                return series.Converges(closed.value, closed.error)
            return series.Diverges(closed.certificate)
        count = self.tree.child_count(u)
        if count is not None:
            total = math.fsum(abs(self.weight(v)) ** 2 for v in self.tree.children(u))
            return series.Converges(total, 0.0)
        stream = (abs(self.weight(v)) ** 2 for v in self.tree.children(u))
        return series.sum_series(stream, self.policy, certificate=self._divergence_claim(u))

    def node_norm(self, u) -> NodeNorm:
        return _norm_from_verdict(self.aggregate(u))

    def is_active(self, u) -> bool:
        """Whether the shift sends the basis vector at ``u`` to a nonzero vector."""
        nn = self.node_norm(u)
        if nn.status == "finite":
            return nn.value > 0.0
        if nn.status == "infinite":
            raise EvaluationError(f"node norm at {u!r} is infinite", vertex=u)
        raise EvaluationError(f"node norm at {u!r} is undetermined", vertex=u)


class TableWeights(WeightSystem):
    """Weights from an explicit table; must cover exactly the non-root vertices."""

    kind = "table"

    def __init__(self, tree: DirectedTree, table: Mapping):
        super().__init__(tree)
        if tree.is_finite:
            expected = {v for v in tree.vertices() if v != tree.root}
            given = set(table)
            if given != expected:
                missing = sorted(expected - given)
                extra = sorted(given - expected)
                raise StructureError(
                    f"weight table mismatch: missing {missing}, unexpected {extra}"
                )
        self._table = {v: complex(c) for v, c in table.items()}

    def weight(self, v) -> complex:
        self._require_non_root(v)
        try:
            return self._table[v]
        except KeyError:
            raise EvaluationError(f"no weight stored for vertex {v!r}", vertex=v) from None


class CallableWeights(WeightSystem):
    """Weights from a callable; optional per-vertex analytic divergence claims.

    ``divergence_claims``, when given, maps a vertex to a certificate that the
    squared-weight aggregate at that vertex diverges; the claim is verified
    against the actual child stream before being endorsed.
    """

    kind = "callable"

    def __init__(self, tree, fn, divergence_claims=None, policy=series.DEFAULT_POLICY):
        super().__init__(tree, policy)
        self._fn = fn
        self._claims = divergence_claims

    def weight(self, v) -> complex:
        self._require_non_root(v)
        return complex(self._fn(v))

    def _divergence_claim(self, u):
        return self._claims(u) if self._claims is not None else None


def _require_omega_family(tree: DirectedTree) -> None:
    if isinstance(tree, OmegaTree):
        return
    if isinstance(tree, DescendantSubtree) and isinstance(tree.base, OmegaTree):
        return
    raise StructureError("this weight family lives on the infinitely-branching tree")


class OmegaShiftWeights(WeightSystem):
    """Built-in weights on the infinitely-branching family.

    The weight at a vertex is 2^(sum of digits before the last) over
    (last digit + 1).  Child weights at any vertex then share the factor
    2^(digit sum of the parent), so every node norm is that factor times the
    square root of the inverse-square constant: finite and positive
    everywhere, with an exact closed form.
    """

    kind = "omega-shift"
    closed_form_total = True
    aluthge_aggregate_key = "omega-aluthge"

    def __init__(self, tree: Optional[DirectedTree] = None):
        tree = tree if tree is not None else OmegaTree()
        _require_omega_family(tree)
        super().__init__(tree)

    def weight(self, v) -> complex:
        self._require_non_root(v)
        return complex(2.0 ** (v.digit_sum - v.last_digit) / (v.last_digit + 1))

    def _closed_form(self, u):
        return series.closed_form_aggregate("omega-shift", u)

    def margin_terms(self, u=None):
        """Terms of the per-vertex hyponormality margin, in child-digit order.

        The margin is the sum over children of |weight|^2 divided by the
        child's squared node norm; for this family it is independent of the
        vertex.
        """
        inv_sq = series.inverse_square_sum().value

        def stream():
            n = 0
            while True:
                yield 1.0 / ((n + 1) ** 2 * 4.0**n * inv_sq)
                n += 1

        return stream()

    def margin_tail_bound(self, n: int) -> float:
        """Dominates the margin tail past the first ``n`` terms (geometric bound)."""
        inv_sq = series.inverse_square_sum().value
        return (4.0 / 3.0) * 4.0 ** (-n) / ((n + 1) ** 2 * inv_sq)


def _omega_shift_aggregate(vertex: OmegaVertex) -> series.ExtendedNonneg:
    inv_sq = series.inverse_square_sum()
    scale = 4.0**vertex.digit_sum
    return series.Finite(scale * inv_sq.value, scale * inv_sq.error)


def aluthge_divergence_params(t: float) -> tuple[int, float]:
    """Start index and ratio bound for the transformed-weight aggregate terms.

    The squared transformed weights at any vertex are proportional to
    4^(t n) / (n + 1)^2 over the child digit n, so consecutive terms grow by
    4^t ((n+1)/(n+2))^2, which exceeds 1 from some digit on whenever t > 0.
    """
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    growth = 4.0**t
    n = 0
    while growth * ((n + 1) / (n + 2)) ** 2 <= 1.0:
        n += 1
        if n > 10**7:
            raise ArithmeticError("no increasing index found; t too small for floats")
    return n, growth * ((n + 1) / (n + 2)) ** 2


def _omega_aluthge_aggregate(vertex: OmegaVertex, t: float) -> series.ExtendedNonneg:
    start, ratio = aluthge_divergence_params(t)
    return series.Infinite(series.EventuallyIncreasing(start, ratio))


series.register_closed_form("omega-shift", _omega_shift_aggregate)
series.register_closed_form("omega-aluthge", _omega_aluthge_aggregate)


class PolarWeights(WeightSystem):
    """Weights of the polar-factor shift: child weight over parent node norm.

    Children of a vertex with zero norm get weight 0; an infinite parent norm
    is an evaluation error naming the vertex.  The aggregate at any vertex
    with finite positive norm is exactly 1.
    """

    kind = "polar"

    def __init__(self, base: WeightSystem):
        super().__init__(base.tree)
        self.base = base

    def weight(self, v) -> complex:
        self._require_non_root(v)
        parent = self.tree.parent(v)
        nn = self.base.node_norm(parent)
        if nn.status == "infinite":
            raise EvaluationError(f"parent norm at {parent!r} is infinite", vertex=v)
        if nn.status == "unknown":
            raise EvaluationError(f"parent norm at {parent!r} is undetermined", vertex=v)
        if nn.value == 0.0:
            return 0j
        return complex(self.base.weight(v)) / nn.value

    def _closed_form(self, u):
        nn = self.base.node_norm(u)
        if nn.status == "finite":
            return series.Finite(1.0 if nn.value > 0.0 else 0.0, 0.0)
        if nn.status == "infinite":
            raise EvaluationError(f"node norm at {u!r} is infinite", vertex=u)
        return None


class AluthgeWeights(WeightSystem):
    """Transformed weights: base weight times (child norm / parent norm)^t."""

    kind = "aluthge"

    def __init__(self, base: WeightSystem, t: float):
        if not 0 < t <= 1:
            raise ValueError("t must lie in (0, 1]")
        super().__init__(base.tree)
        self.base = base
        self.t = float(t)

    def weight(self, v) -> complex:
        self._require_non_root(v)
        parent = self.tree.parent(v)
        parent_norm = self.base.node_norm(parent)
        child_norm = self.base.node_norm(v)
        for vertex, nn in ((parent, parent_norm), (v, child_norm)):
            if nn.status == "infinite":
                raise EvaluationError(f"node norm at {vertex!r} is infinite", vertex=v)
            if nn.status == "unknown":
                raise EvaluationError(f"node norm at {vertex!r} is undetermined", vertex=v)
        if parent_norm.value == 0.0:
            return 0j
        return (child_norm.value / parent_norm.value) ** self.t * complex(self.base.weight(v))

    def _closed_form(self, u):
        key = getattr(self.base, "aluthge_aggregate_key", None)
        if key is None:
            return None
        return series.closed_form_aggregate(key, u, t=self.t)

    @property
    def family_divergent(self) -> bool:
        """True when a closed form makes every aggregate divergent."""
        return getattr(self.base, "aluthge_aggregate_key", None) == "omega-aluthge"


def node_norm(w: WeightSystem, u) -> NodeNorm:
    return w.node_norm(u)


def polar_weights(w: WeightSystem) -> PolarWeights:
    return PolarWeights(w)


def aluthge_weights(w: WeightSystem, t: float) -> AluthgeWeights:
    return AluthgeWeights(w, t)
