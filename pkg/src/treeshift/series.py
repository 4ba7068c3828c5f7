"""Nonnegative series evaluation with certified verdicts.

A sum over a child stream ends in one of three verdicts: a value with a tail
bound, a divergence certificate, or an inconclusive partial sum.  Analytic
certificates (terms bounded below, eventual ratio above 1) are only ever
*claimed* by callers that own a closed form; this module verifies the claim
against the actual terms before endorsing it.  Without such a claim, a raw
stream can at best earn the heuristic partial-sum certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .errors import CertificateError, NonnegativityError

__all__ = [
    "TermsDoNotVanish",
    "EventuallyIncreasing",
    "PartialSumExceeds",
    "DivergenceCertificate",
    "Converges",
    "Diverges",
    "Inconclusive",
    "SeriesVerdict",
    "Finite",
    "Infinite",
    "ExtendedNonneg",
    "SumPolicy",
    "DEFAULT_POLICY",
    "sum_series",
    "verify_certificate",
    "inverse_square_sum",
    "register_closed_form",
    "closed_form_aggregate",
]

_REL_SLACK = 1e-9  # float slack when checking analytic certificates on computed terms


@dataclass(frozen=True)
class TermsDoNotVanish:
    """All terms from ``start`` on are at least ``lower_bound`` > 0."""

    start: int
    lower_bound: float
    heuristic: bool = False


@dataclass(frozen=True)
class EventuallyIncreasing:
    """From ``start`` on, each term is at least ``ratio`` > 1 times the previous."""

    start: int
    ratio: float
    heuristic: bool = False


@dataclass(frozen=True)
class PartialSumExceeds:
    """Partial sums crossed ``threshold`` at term ``crossed_at``.

    Evidence-grade only: says nothing about the infinite tail.
    """

    threshold: float
    crossed_at: int
    heuristic: bool = True


DivergenceCertificate = Union[TermsDoNotVanish, EventuallyIncreasing, PartialSumExceeds]


@dataclass(frozen=True)
class Converges:
    value: float
    tail_bound: float = 0.0


@dataclass(frozen=True)
class Diverges:
    certificate: DivergenceCertificate


@dataclass(frozen=True)
class Inconclusive:
    partial_sum: float
    terms_evaluated: int


SeriesVerdict = Union[Converges, Diverges, Inconclusive]


@dataclass(frozen=True)
class Finite:
    """Nonnegative value; ``error`` bounds the defect of a truncated evaluation."""

    value: float
    error: float = 0.0


@dataclass(frozen=True)
class Infinite:
    certificate: DivergenceCertificate


ExtendedNonneg = Union[Finite, Infinite]


@dataclass(frozen=True)
class SumPolicy:
    """Evaluation budget and verdict thresholds for ``sum_series``.

    ``tail_bound`` maps the number of evaluated terms to a bound dominating
    the true tail; convergence is only certified when it is present or the
    stream ends.  ``verify_terms`` caps how many terms are consumed when a
    claimed certificate is being checked.
    """

    max_terms: int = 100_000
    divergence_threshold: float = 1e12
    tail_bound: Optional[Callable[[int], float]] = None
    verify_terms: int = 256


DEFAULT_POLICY = SumPolicy()


def verify_certificate(certificate: DivergenceCertificate, terms: Iterable[float], count: int) -> None:
    """Check a divergence claim against up to ``count`` actual terms.

    Raises :class:`CertificateError` on any contradiction.  Passing proves
    nothing beyond the sampled window; the analytic validity of the claim is
    the caller's responsibility.
    """
    it = iter(terms)
    if isinstance(certificate, TermsDoNotVanish):
        if certificate.lower_bound <= 0:
            raise CertificateError("lower bound must be positive")
        seen = 0
        for n, term in enumerate(it):
            if n >= count:
                break
            if n >= certificate.start:
                seen += 1
                if term < certificate.lower_bound * (1 - _REL_SLACK):
                    raise CertificateError(
                        f"term {n} = {term} below claimed bound {certificate.lower_bound}"
                    )
        if seen == 0:
            raise CertificateError("stream ended before the claimed start index")
        return
    if isinstance(certificate, EventuallyIncreasing):
        if certificate.ratio <= 1:
            raise CertificateError("ratio must exceed 1")
        prev = None
        checked = 0
        for n, term in enumerate(it):
            if n >= count or not math.isfinite(term):
                break
            if n == certificate.start and term <= 0:
                raise CertificateError("term at the start index must be positive")
            if n > certificate.start and prev is not None:
                checked += 1
                if term < prev * certificate.ratio * (1 - _REL_SLACK):
                    raise CertificateError(
                        f"ratio at term {n} drops below the claimed {certificate.ratio}"
                    )
            if n >= certificate.start:
                prev = term
        if checked == 0:
            raise CertificateError("stream ended before the claimed start index")
        return
    if isinstance(certificate, PartialSumExceeds):
        total = 0.0
        for n, term in enumerate(it):
            total += term
            if total > certificate.threshold:
                return
            if n > certificate.crossed_at + count:
                break
        raise CertificateError("partial sums never crossed the claimed threshold")
    raise CertificateError(f"unknown certificate {certificate!r}")


def sum_series(
    terms: Iterable[float],
    policy: SumPolicy = DEFAULT_POLICY,
    certificate: Optional[DivergenceCertificate] = None,
) -> SeriesVerdict:
    """Evaluate a nonnegative series under the given policy.

    With a claimed analytic ``certificate`` the terms are sampled against it
    and the verdict is ``Diverges`` carrying that certificate.  Otherwise the
    stream is summed: a stream that ends converges exactly; hitting the term
    budget converges only when the policy supplies a tail bound; crossing the
    divergence threshold yields the heuristic partial-sum certificate.
    """
    if certificate is not None:
        checked = max(policy.verify_terms, _cert_start(certificate) + 16)
        verify_certificate(certificate, _nonneg(terms), checked)
        return Diverges(certificate)

    total = 0.0
    comp = 0.0  # Kahan compensation
    n = 0
    for term in _nonneg(terms):
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        n += 1
        if total > policy.divergence_threshold:
            return Diverges(PartialSumExceeds(policy.divergence_threshold, n - 1))
        if n >= policy.max_terms:
            if policy.tail_bound is not None:
                return Converges(total, float(policy.tail_bound(n)))
            return Inconclusive(total, n)
    return Converges(total, 0.0)


def _nonneg(terms: Iterable[float]):
    for term in terms:
        if term < 0:
            raise NonnegativityError(f"negative series term {term}")
        yield term


def _cert_start(certificate: DivergenceCertificate) -> int:
    if isinstance(certificate, (TermsDoNotVanish, EventuallyIncreasing)):
        return certificate.start
    return certificate.crossed_at


_INV_SQUARE: Optional[Finite] = None
_INV_SQUARE_TERMS = 10_000_000


def inverse_square_sum() -> Finite:
    """Sum of 1/n^2 over n >= 1, by direct summation.

    Partial sum to 1e7 terms plus the midpoint tail correction 1/(N + 1/2);
    the error field bounds both the correction defect and the float rounding
    of the pairwise sum.  Computed once and cached.
    """
    global _INV_SQUARE
    if _INV_SQUARE is None:
        n = _INV_SQUARE_TERMS
        ns = np.arange(n, 0, -1, dtype=np.float64)
        partial = float(np.sum(1.0 / (ns * ns)))
        value = partial + 1.0 / (n + 0.5)
        error = 1.0 / (6.0 * (n + 1.0) ** 3) + 64 * np.finfo(np.float64).eps
        _INV_SQUARE = Finite(value, error)
    return _INV_SQUARE


_CLOSED_FORMS: dict[str, Callable] = {}


def register_closed_form(key: str, fn: Callable) -> None:
    """Register an exact aggregate formula for a (family, weight-kind) pair."""
    _CLOSED_FORMS[key] = fn


def closed_form_aggregate(key: str, vertex, **params) -> Optional[ExtendedNonneg]:
    """Exact analytic aggregate for a registered family, or None when absent.

    Callers fall back to ``sum_series`` when no closed form is registered.
    """
    fn = _CLOSED_FORMS.get(key)
    if fn is None:
        return None
    return fn(vertex, **params)
