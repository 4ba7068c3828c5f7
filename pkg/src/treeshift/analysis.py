"""High-level verdicts: density, hyponormality, domain triviality, closability.

Family-level claims come only from closed forms; everything else is reported
per sampled vertex, and analytic certificates are re-verified against the
actual term streams they describe before a report endorses them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import series
from .errors import NoWitnessError
from .operators import StructuredVector, apply_adjoint, basis_vector, domain_check
from .trees import SampleWindow, format_vertex, sample_vertices
from .weights import OmegaShiftWeights, WeightSystem, aluthge_weights

__all__ = [
    "DensityReport",
    "HyponormalityReport",
    "TrivialityReport",
    "NonClosabilityWitness",
    "BranchingReport",
    "StrictInclusionReport",
    "check_densely_defined",
    "check_hyponormal",
    "certify_trivial_aluthge_domain",
    "nonclosability_witness",
    "branching_necessity_check",
    "strict_inclusion_example",
    "strict_inclusion_weight",
]


def _default_sample(w: WeightSystem, sample, window: Optional[SampleWindow]):
    if sample is not None:
        return list(sample)
    return sample_vertices(w.tree, window)


@dataclass(frozen=True)
class DensityReport:
    """Whether every sampled (or, family-level, every) basis vector is in the domain."""

    status: str  # "family" | "sample" | "counterexample" | "inconclusive"
    counterexample: object = None
    checked: tuple = ()
    notes: str = ""

    @property
    def densely_defined(self) -> Optional[bool]:
        if self.status in ("family", "sample"):
            return True
        if self.status == "counterexample":
            return False
        return None


def check_densely_defined(
    w: WeightSystem, sample=None, window: Optional[SampleWindow] = None
) -> DensityReport:
    """Dense definedness reduces to finiteness of every node norm."""
    if getattr(w, "closed_form_total", False):
        return DensityReport(status="family", notes="closed-form aggregate covers every vertex")
    if w.tree.is_finite:
        return DensityReport(status="family", notes="finite tree: all aggregates are finite sums")
    checked = []
    unknown = False
    for u in _default_sample(w, sample, window):
        nn = w.node_norm(u)
        if nn.status == "infinite":
            return DensityReport(
                status="counterexample", counterexample=u, checked=tuple(checked)
            )
        if nn.status == "unknown":
            unknown = True
        checked.append(u)
    if unknown:
        return DensityReport(
            status="inconclusive",
            checked=tuple(checked),
            notes="some aggregates returned no verdict under the evaluation policy",
        )
    return DensityReport(status="sample", checked=tuple(checked))


@dataclass(frozen=True)
class MarginEntry:
    value: float
    tail: float
    kind: str  # "closed-form-tail" | "exact-finite"


@dataclass(frozen=True)
class HyponormalityReport:
    verdict: str  # "hyponormal" | "not-hyponormal" | "unknown"
    family_level: bool = False
    margins: dict = field(default_factory=dict)
    witness: Optional[tuple] = None  # (vertex, violated condition)
    notes: str = ""


def check_hyponormal(
    w: WeightSystem, sample=None, window: Optional[SampleWindow] = None
) -> HyponormalityReport:
    """Two per-vertex conditions: zero-norm children carry zero weight, and the
    sum over active children of |weight|^2 / child-norm^2 stays at most 1."""
    if isinstance(w, OmegaShiftWeights):
        policy = series.SumPolicy(max_terms=48, tail_bound=w.margin_tail_bound)
        verdict = series.sum_series(w.margin_terms(), policy)
        entry = MarginEntry(verdict.value, verdict.tail_bound, "closed-form-tail")
        certified = verdict.value + verdict.tail_bound <= 1.0
        return HyponormalityReport(
            verdict="hyponormal" if certified else "unknown",
            family_level=True,
            margins={"family": entry},
            notes=(
                "all node norms are positive closed forms; the margin is "
                "vertex-independent and certified below 1 by its tail bound"
            ),
        )

    margins: dict = {}
    unknown_at = None
    for u in _default_sample(w, sample, window):
        count = w.tree.child_count(u)
        if count is None:
            unknown_at = (u, "infinite child set without closed form")
            continue
        terms = []
        incomplete = False
        for v in w.tree.children(u):
            weight = w.weight(v)
            child_norm = w.node_norm(v)
            if child_norm.status == "unknown":
                unknown_at = (v, "child norm undetermined")
                incomplete = True
                continue
            if child_norm.status == "infinite":
                continue  # child contributes nothing: |w|^2 / inf^2 = 0
            if child_norm.value == 0.0:
                if weight != 0:
                    return HyponormalityReport(
                        verdict="not-hyponormal",
                        margins=margins,
                        witness=(v, "zero-norm-child"),
                    )
                continue
            terms.append(abs(weight) ** 2 / child_norm.value**2)
        if incomplete:
            continue
        margin = math.fsum(terms)
        margins[format_vertex(u)] = MarginEntry(margin, 0.0, "exact-finite")
        if margin > 1.0:
            return HyponormalityReport(
                verdict="not-hyponormal", margins=margins, witness=(u, "margin-above-one")
            )
    if unknown_at is not None:
        return HyponormalityReport(
            verdict="unknown", margins=margins, notes=f"undetermined at {unknown_at}"
        )
    return HyponormalityReport(verdict="hyponormal", margins=margins)


@dataclass(frozen=True)
class TrivialityReport:
    """Divergence of the transformed-weight aggregate at every (sampled) vertex."""

    status: str  # "certified-family" | "certified-sample" | "refuted" | "inconclusive" | "heuristic"
    t: float
    family_certificate: object = None
    per_vertex: dict = field(default_factory=dict)
    refuted_vertex: object = None
    checked: tuple = ()


_CERT_VERIFY_TERMS = 48


def certify_trivial_aluthge_domain(
    w: WeightSystem, t: float, sample=None, window: Optional[SampleWindow] = None
) -> TrivialityReport:
    """Certify that no basis vector lies in the transform's domain.

    Divergence of the transformed aggregate at every vertex empties the whole
    domain, because any nonzero vector has a nonzero coefficient somewhere.
    Family-level certification needs a registered closed form; sampled
    analytic certificates are re-verified against their term streams.
    """
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    mu = aluthge_weights(w, t)
    vertices = _default_sample(w, sample, window)
    family_cert = None
    if mu.family_divergent and vertices:
        closed = mu._closed_form(vertices[0])
        family_cert = closed.certificate

    per_vertex = {}
    heuristic = False
    inconclusive = False
    for u in vertices:
        agg = mu.aggregate(u)
        if isinstance(agg, series.Converges):
            return TrivialityReport(
                status="refuted", t=t, refuted_vertex=u, checked=tuple(vertices)
            )
        if isinstance(agg, series.Inconclusive):
            inconclusive = True
            continue
        cert = agg.certificate
        if not getattr(cert, "heuristic", False):
            stream = (abs(mu.weight(v)) ** 2 for v in w.tree.children(u))
            count = max(_CERT_VERIFY_TERMS, getattr(cert, "start", 0) + 16)
            series.verify_certificate(cert, stream, count)
        else:
            heuristic = True
        per_vertex[format_vertex(u)] = cert

    if family_cert is not None:
        status = "certified-family"
    elif inconclusive:
        status = "inconclusive"
    elif heuristic:
        status = "heuristic"
    else:
        status = "certified-sample"
    return TrivialityReport(
        status=status,
        t=t,
        family_certificate=family_cert,
        per_vertex=per_vertex,
        checked=tuple(vertices),
    )


@dataclass(frozen=True)
class NonClosabilityWitness:
    """Unbounded pairing sums of one vector against the adjoint-transform images.

    ``partial_sums[K]`` accumulates |<f, transform-of-adjoint at the k-th probe
    vertex>|^2 for k <= K; the probe vertices extend the base vertex by the
    digits (k, 0).  Unboundedness of these sums shows no adjoint can pair with
    f, so the transform of the adjoint shift has no closure.
    """

    t: float
    base_vertex: object
    adjoint_coefficient: complex
    terms: tuple
    partial_sums: tuple
    threshold: float
    crossing_index: Optional[int]
    ratio_limit: float
    certificate: series.EventuallyIncreasing
    probe_vertices: tuple = ()


def nonclosability_witness(
    w: WeightSystem,
    t: float,
    f: StructuredVector,
    terms: int = 60,
    threshold: float = 1e6,
) -> NonClosabilityWitness:
    """Build the divergent pairing-sum witness for the built-in family.

    Requires t in (0, 1) and a vector not annihilated by the adjoint shift.
    The squared pairing against the k-th probe vertex is
    4^((1-t) k) / ((k+1)^2 g^4) times |adjoint coefficient|^2, with g^2 the
    inverse-square constant, so consecutive terms grow like 4^(1-t).
    """
    if not isinstance(w, OmegaShiftWeights):
        raise ValueError("the witness construction needs the built-in branching family")
    if not 0 < t < 1:
        raise ValueError("the witness needs t strictly inside (0, 1)")
    image = apply_adjoint(w, f)
    support = [v for v in image.support() if image.e[v] != 0]
    if not support:
        raise NoWitnessError("the adjoint shift annihilates this vector")
    base = support[0]
    coeff = image.e[base]
    base_sq = abs(coeff) ** 2
    inv_sq = series.inverse_square_sum().value
    g4 = inv_sq * inv_sq

    term_list = []
    sums = []
    total = 0.0
    crossing = None
    for k in range(terms):
        term = 4.0 ** ((1 - t) * k) / ((k + 1) ** 2 * g4) * base_sq
        if not math.isfinite(term):
            break
        term_list.append(term)
        total += term
        sums.append(total)
        if crossing is None and total > threshold:
            crossing = k

    ratio_limit = 4.0 ** (1 - t)
    start = 0
    while ratio_limit * ((start + 1) / (start + 2)) ** 2 <= 1.0:
        start += 1
    certificate = series.EventuallyIncreasing(
        start, ratio_limit * ((start + 1) / (start + 2)) ** 2
    )
    series.verify_certificate(certificate, iter(term_list), len(term_list))

    probes = tuple(
        format_vertex(base.child(k).child(0)) for k in range(min(4, len(term_list)))
    )
    return NonClosabilityWitness(
        t=t,
        base_vertex=base,
        adjoint_coefficient=coeff,
        terms=tuple(term_list),
        partial_sums=tuple(sums),
        threshold=threshold,
        crossing_index=crossing,
        ratio_limit=ratio_limit,
        certificate=certificate,
        probe_vertices=probes,
    )


@dataclass(frozen=True)
class BranchingReport:
    """Contrapositive check: finite branching keeps basis vectors in the domain."""

    status: str  # "all-in" | "violation" | "vacuous"
    t: float
    checked: tuple = ()
    violations: tuple = ()
    vacuous: tuple = ()
    notes: str = ""


def branching_necessity_check(
    w: WeightSystem, t: float, sample=None, window: Optional[SampleWindow] = None
) -> BranchingReport:
    """At vertices with finitely many children and nonzero weights, the basis
    vector must stay inside the transform's domain; a violation would need
    infinite branching.  Refuses zero weights."""
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    checked, violations, vacuous = [], [], []
    for u in _default_sample(w, sample, window):
        if w.tree.child_count(u) is None:
            vacuous.append(u)
            continue
        for v in w.tree.children(u):
            if w.weight(v) == 0:
                raise ValueError(
                    f"branching check requires nonzero weights; zero weight at {v!r}"
                )
        verdict = domain_check(w, basis_vector(u), "aluthge", t=t)
        checked.append(u)
        if not verdict.is_in:
            violations.append((u, verdict))
    if violations:
        return BranchingReport(
            status="violation",
            t=t,
            checked=tuple(checked),
            violations=tuple(violations),
            vacuous=tuple(vacuous),
        )
    if not checked and vacuous:
        return BranchingReport(
            status="vacuous",
            t=t,
            vacuous=tuple(vacuous),
            notes="every sampled vertex has infinitely many children; hypothesis is vacuous",
        )
    return BranchingReport(status="all-in", t=t, checked=tuple(checked), vacuous=tuple(vacuous))


@dataclass(frozen=True)
class StrictInclusionReport:
    """Exact-arithmetic record of the domain gap on the rooted path.

    With the even-indexed profile 1/(k+1) and odd path weights (k+1)^m for
    m = 1/(1-t), every term of the modulus-power domain series equals exactly
    1, so the profile leaves that domain even though every transformed weight
    vanishes and the transformed shift is defined everywhere.
    """

    t: Fraction
    weight_exponent: int
    terms_checked: int
    all_terms_one: bool
    modulus_certificate: series.TermsDoNotVanish
    transformed_weights_zero: bool

    @property
    def proper_inclusion(self) -> bool:
        return self.all_terms_one and self.transformed_weights_zero


def strict_inclusion_weight(m: int):
    """Float-side weight callable matching the exact construction: odd path
    vertices get (k+1)^m, even ones 0."""

    def fn(v: int) -> float:
        if v % 2 == 1:
            k = (v - 1) // 2
            return float((k + 1) ** m)
        return 0.0

    return fn


def strict_inclusion_example(t: Fraction = Fraction(1, 2), terms: int = 64) -> StrictInclusionReport:
    """Certify the domain gap exactly, in big-integer rationals.

    ``t`` must make 1/(1-t) a whole number m >= 2, so the modulus power
    2 - 2t = 2/m turns the integer weights (k+1)^m into the exact squares
    (k+1)^2 that cancel the profile.
    """
    t = Fraction(t)
    if not 0 < t < 1:
        raise ValueError("the strict-inclusion construction needs t in (0, 1)")
    m_frac = 1 / (1 - t)
    if m_frac.denominator != 1:
        raise ValueError("exact arithmetic needs 1/(1-t) to be a whole number")
    m = int(m_frac)

    exact_terms = []
    for k in range(terms):
        profile = Fraction(1, k + 1)  # value of the vector at path vertex 2k
        norm_power = Fraction((k + 1) ** 2)  # ((k+1)^m)^(2/m), exactly
        exact_terms.append(norm_power * profile * profile)
    all_one = all(term == 1 for term in exact_terms)

    # Dual route: the generic float machinery must agree that every
    # transformed weight vanishes (odd vertices have zero child norm, even
    # vertices zero weight).
    from .trees import nat_path
    from .weights import CallableWeights

    float_system = CallableWeights(nat_path(), strict_inclusion_weight(m))
    mu = aluthge_weights(float_system, float(t))
    transformed_zero = all(mu.weight(v) == 0 for v in range(1, 2 * min(terms, 24)))

    certificate = series.TermsDoNotVanish(start=0, lower_bound=1.0)
    series.verify_certificate(certificate, (float(x) for x in exact_terms), terms)
    return StrictInclusionReport(
        t=t,
        weight_exponent=m,
        terms_checked=terms,
        all_terms_one=all_one,
        modulus_certificate=certificate,
        transformed_weights_zero=transformed_zero,
    )
