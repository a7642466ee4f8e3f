"""The evolution operator and its boundedness certificates.

The evolution operator sends ``e_i`` to ``e_i * e_i`` and extends linearly:

    C(v) = sum_k ( sum_i v_i c_ki ) e_k,

defined on the vectors for which the output series is square-summable.  The
operator is unbounded in general; this module issues *certificates* that it is
bounded, each one a verdict over a truncation plus certified tail metadata:

* Hilbert-Schmidt: ``sum_{k,i} c_ki**2`` finite, norm bound its square root.
* Schur: positive weights ``alpha_k, beta_i`` with weighted column sums
  ``<= M1 * beta_i`` and weighted row sums ``<= M2 * alpha_k``; norm bound
  ``sqrt(M1 * M2)``.
* Row-sum: for stochastic maps, ``sup_k sum_i c_ki <= M`` gives the Schur
  bound with unit weights and ``M1 = 1``, so norm bound ``sqrt(M)``.

A failed certification is never a proof of unboundedness; it renders as
``INCONCLUSIVE`` with the measured partial sums as diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .algebra import StructureMap, _accumulate_columns
from .elements import BasisIndex, Element, Kahan, TruncationPolicy, norm, truncate
from .errors import (
    InvalidWeights,
    MissingCertificate,
    NotMarkov,
    TailTooLarge,
)
from .rng import counter_uniform, counter_word

WeightOracle = Callable[[BasisIndex], float]

HILBERT_SCHMIDT = "HilbertSchmidt"
SCHUR = "Schur"
ROWSUM = "RowSum"
NONE = "None"


@dataclass(frozen=True)
class Certificate:
    """Boundedness verdict for the evolution operator.

    ``variant`` is one of ``HilbertSchmidt``, ``Schur``, ``RowSum`` or
    ``None``; only the first three carry a ``norm_bound``.  ``details`` holds
    measured quantities (partial sums, their argmax) for diagnostics.
    """

    variant: str
    norm_bound: float | None
    cutoff_used: int
    hs_sum: float | None = None
    m1: float | None = None
    m2: float | None = None
    m: float | None = None
    diagnostic: str = ""
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.variant != NONE

    def render(self) -> str:
        if self.certified:
            return (
                f"CERTIFIED {self.variant} norm_bound={self.norm_bound!r} "
                f"cutoff={self.cutoff_used}"
            )
        return f"INCONCLUSIVE {self.diagnostic}"


@dataclass(frozen=True)
class DomainVerdict:
    """Outcome of the domain membership test.

    ``certified`` means the output series is square-summable with total at
    most ``bound``; otherwise only the truncated partial sum is known.  The
    test never claims non-membership.
    """

    certified: bool
    bound: float | None
    partial_sum: float
    diagnostic: str = ""


def evolution_apply(
    s: StructureMap,
    v: Element,
    policy: TruncationPolicy,
    *,
    norm_bound: float | None = None,
    _enforce_max_tail: bool = True,
) -> Element:
    """Apply the evolution operator: ``out_k = sum_i v_i c_ki``.

    A nonzero input tail propagates through an operator-norm factor: the
    explicit ``norm_bound`` if given, else the map's own certified
    ``operator_norm_factor``.  Without either the output tail is
    uncertifiable (infinite).
    """
    if _enforce_max_tail and v.tail_bound > policy.max_tail:
        raise TailTooLarge("input tail bound already exceeds policy.max_tail")
    coeffs, lost = _accumulate_columns(s, list(v.items()), policy.cutoff)
    tail: float | None = lost
    if tail is not None and v.tail_bound > 0.0:
        factor = norm_bound if norm_bound is not None else s.operator_norm_factor
        if factor is None:
            tail = None
        else:
            tail += factor * v.tail_bound
    tail_bound = tail if tail is not None else math.inf
    if _enforce_max_tail and tail_bound > policy.max_tail:
        raise TailTooLarge(
            f"output tail {tail_bound:.6g} exceeds max_tail {policy.max_tail:.6g}"
        )
    return Element(coeffs, tail_bound)


def in_domain(s: StructureMap, v: Element, policy: TruncationPolicy) -> DomainVerdict:
    """Test membership of ``v`` in the operator's domain, within the cutoff.

    Returns a certified bound on ``sum_k |sum_i v_i c_ki|**2`` when column
    metadata controls the tails, else an inconclusive verdict carrying the
    truncated partial sum.
    """
    coeffs, lost = _accumulate_columns(s, list(v.items()), policy.cutoff)
    partial = Kahan()
    for k in sorted(coeffs):
        partial.add(coeffs[k] * coeffs[k])

    tail_out = lost
    tail_in = 0.0
    if v.tail_bound > 0.0:
        factor = s.operator_norm_factor
        if factor is None:
            tail_in = math.nan
        else:
            tail_in = factor * v.tail_bound
    if tail_out is None or math.isnan(tail_in):
        reason = "column tails uncertified" if tail_out is None else (
            "input tail uncertified (no operator norm factor)"
        )
        return DomainVerdict(
            False,
            None,
            partial.total,
            f"partial sum {partial.total:.12g} at cutoff {policy.cutoff}; {reason}",
        )
    # The column-tail part lives on indices >= cutoff, disjoint from the
    # computed part; the input-tail part can land anywhere.
    bound = (math.sqrt(partial.total + tail_out * tail_out) + tail_in) ** 2
    return DomainVerdict(True, bound, partial.total)


# -- certificates -------------------------------------------------------------


def certify_hilbert_schmidt(s: StructureMap, policy: TruncationPolicy) -> Certificate:
    """Certify via joint square-summability of the structure constants."""
    partial = Kahan()
    for i in range(policy.cutoff):
        for _, c in s.column(i, policy.cutoff):
            partial.add(c * c)
    if s.kind == "explicit-sparse" and s.n_columns is not None:
        # Everything is stored, so the grid tail is exactly enumerable.
        rest = Kahan()
        big = max(s.n_columns, policy.cutoff)
        for i in range(s.n_columns):
            full = dict(s.column(i, big + 1))
            for k, c in full.items():
                if i >= policy.cutoff or k >= policy.cutoff:
                    rest.add(c * c)
        total = partial.total + rest.total
        return Certificate(
            HILBERT_SCHMIDT,
            math.sqrt(total),
            policy.cutoff,
            hs_sum=total,
            details={"partial_sum": partial.total, "grid_tail": rest.total},
        )
    return Certificate(
        NONE,
        None,
        policy.cutoff,
        diagnostic=(
            f"squared-constant partial sum {partial.total:.12g} at cutoff "
            f"{policy.cutoff} has no certified tail"
        ),
        details={"partial_sum": partial.total},
    )


def _weight(oracle: WeightOracle | None, idx: BasisIndex) -> float:
    if oracle is None:
        return 1.0
    w = oracle(idx)
    if not w > 0.0:
        raise InvalidWeights(f"weight at index {idx} is {w!r}, must be > 0")
    return w


def _measured_schur_sums(
    s: StructureMap,
    alpha: WeightOracle | None,
    beta: WeightOracle | None,
    cutoff: int,
) -> tuple[float, int, float, int]:
    """Truncated-grid suprema: weighted column sums over i < cutoff and
    weighted row sums over k < cutoff.  Returns (m1, argmax_i, m2, argmax_k)."""
    m1 = 0.0
    arg1 = 0
    row_acc: dict[BasisIndex, Kahan] = {}
    n_cols = cutoff if s.n_columns is None else min(cutoff, s.n_columns)
    for i in range(n_cols):
        col = Kahan()
        bi = _weight(beta, i)
        for k, c in s.column(i, cutoff):
            col.add(abs(c) * _weight(alpha, k))
            row_acc.setdefault(k, Kahan()).add(abs(c) * bi)
        if col.total / bi > m1:
            m1 = col.total / bi
            arg1 = i
    m2 = 0.0
    arg2 = 0
    for k, acc in row_acc.items():
        val = acc.total / _weight(alpha, k)
        if val > m2:
            m2 = val
            arg2 = k
    return m1, arg1, m2, arg2


def certify_schur(
    s: StructureMap,
    alpha: WeightOracle | None,
    beta: WeightOracle | None,
    policy: TruncationPolicy,
) -> Certificate:
    """Two-sided weighted test with weights ``alpha`` (rows) and ``beta``
    (columns); ``None`` means unit weights.

    Explicitly stored maps are certified by exact scans.  Lazy maps certify
    only with unit weights and certified l1 metadata (constant column mass
    and a row-mass sup); anything else is inconclusive, with the measured
    truncated suprema reported.
    """
    measured = _measured_schur_sums(s, alpha, beta, policy.cutoff)
    m1_meas, arg1, m2_meas, arg2 = measured
    details = {
        "measured_m1": m1_meas,
        "argmax_column": arg1,
        "measured_m2": m2_meas,
        "argmax_row": arg2,
    }

    if s.kind == "explicit-sparse":
        # Finitely many nonzero entries: the truncated scan at a cutoff
        # covering them all is exact.
        big = max(policy.cutoff, (s.n_columns or 0) + 1)
        m1, a1, m2, a2 = _measured_schur_sums(s, alpha, beta, big)
        return Certificate(
            SCHUR,
            math.sqrt(m1 * m2),
            policy.cutoff,
            m1=m1,
            m2=m2,
            details={
                "measured_m1": m1,
                "argmax_column": a1,
                "measured_m2": m2,
                "argmax_row": a2,
            },
        )

    unit = alpha is None and beta is None
    if unit and s.column_l1_const is not None and s.row_l1_sup is not None:
        m1 = s.column_l1_const
        m2 = s.row_l1_sup
        return Certificate(
            SCHUR,
            math.sqrt(m1 * m2),
            policy.cutoff,
            m1=m1,
            m2=m2,
            details=details,
        )

    if unit:
        reason = (
            f"row-mass sup uncertified; measured weighted row sum "
            f"{m2_meas:.12g} at row {arg2}, cutoff {policy.cutoff}"
        )
    else:
        reason = (
            f"non-unit weights on a lazy map have uncontrolled tails; measured "
            f"M1 {m1_meas:.12g}, M2 {m2_meas:.12g} at cutoff {policy.cutoff}"
        )
    return Certificate(NONE, None, policy.cutoff, diagnostic=reason, details=details)


def certify_rowsum(s: StructureMap, policy: TruncationPolicy) -> Certificate:
    """Row-sum certificate for stochastic structure maps.

    Requires Markov structure (nonnegative constants, unit column masses);
    certifies ``m = sup_k sum_i c_ki`` from exact data or family metadata,
    with norm bound ``sqrt(m)``.
    """
    _check_markov_columns(s, policy)
    _, _, m2_meas, arg2 = _measured_schur_sums(s, None, None, policy.cutoff)
    details = {"measured_sup": m2_meas, "argmax_row": arg2}
    if s.kind == "explicit-sparse":
        big = max(policy.cutoff, (s.n_columns or 0) + 1)
        _, _, m, arg = _measured_schur_sums(s, None, None, big)
        return Certificate(
            ROWSUM,
            math.sqrt(m),
            policy.cutoff,
            m=m,
            details={"measured_sup": m, "argmax_row": arg},
        )
    if s.row_l1_sup is not None:
        m = s.row_l1_sup
        return Certificate(ROWSUM, math.sqrt(m), policy.cutoff, m=m, details=details)
    return Certificate(
        NONE,
        None,
        policy.cutoff,
        diagnostic=(
            f"row-mass sup uncertified; partial row sum {m2_meas:.12g} at row "
            f"{arg2} is still growing at cutoff {policy.cutoff}"
        ),
        details=details,
    )


def _check_markov_columns(s: StructureMap, policy: TruncationPolicy) -> None:
    limit = min(policy.cutoff, 64)
    if s.n_columns is not None:
        limit = min(limit, s.n_columns)
    for i in range(limit):
        for k, c in s.column(i, policy.cutoff):
            if c < -policy.abs_tol:
                raise NotMarkov(f"negative structure constant {c!r} at ({k}, {i})")
        full = s.column_l1(i)
        if full is None:
            raise NotMarkov(
                f"column {i} has no certified l1 mass; cannot confirm stochasticity"
            )
        if abs(full - 1.0) > policy.abs_tol:
            raise NotMarkov(f"column {i} mass {full!r} deviates from 1")


# -- iteration and empirical checks -------------------------------------------


def power_apply(
    s: StructureMap,
    v: Element,
    n: int,
    policy: TruncationPolicy,
    *,
    norm_bound: float | None = None,
    strict_tails: bool = False,
) -> Element:
    """``C^n(v)`` by n-fold application with re-truncation per step.

    Tails grow by at most the operator norm per application, so certified
    propagation needs a norm bound: the explicit ``norm_bound`` or the map's
    ``operator_norm_factor``.  Without one, a result with nonzero tail is
    marked unbounded (infinite tail) rather than refused; pass
    ``strict_tails=True`` to get :class:`MissingCertificate` instead.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    factor = norm_bound if norm_bound is not None else s.operator_norm_factor
    x = truncate(v, policy) if v.tail_bound <= policy.max_tail else v
    for _ in range(n):
        uncertified = x.tail_bound > 0.0 and factor is None
        if uncertified and strict_tails:
            raise MissingCertificate(
                "tail propagation requested without any operator norm bound"
            )
        x = evolution_apply(
            s,
            x,
            policy,
            norm_bound=factor,
            _enforce_max_tail=not uncertified,
        )
    return x


def empirical_norm_lower_bound(
    s: StructureMap,
    trials: int,
    seed: int,
    policy: TruncationPolicy,
) -> float:
    """Max of ``||C(v)||`` over random finitely supported unit vectors.

    A sanity check that certificates really are upper bounds; the draws use
    counter-based substreams keyed by (seed, trial), so the result does not
    depend on scheduling.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    window = min(policy.cutoff, 64)
    best = 0.0
    for t in range(trials):
        size = 1 + counter_word(seed, t, 0) % min(6, window)
        indices: list[int] = []
        draw = 1
        while len(indices) < size:
            idx = counter_word(seed, t, draw) % window
            draw += 1
            if idx not in indices:
                indices.append(idx)
        coeffs: dict[int, float] = {}
        sq = 0.0
        for slot, idx in enumerate(sorted(indices)):
            x = 2.0 * counter_uniform(seed, t, 1000 + slot) - 1.0
            coeffs[idx] = x
            sq += x * x
        if sq == 0.0:
            continue
        inv = 1.0 / math.sqrt(sq)
        v = Element({i: x * inv for i, x in coeffs.items()})
        image = evolution_apply(s, v, policy, _enforce_max_tail=False)
        best = max(best, norm(image).value / norm(v).value)
    return best
