"""Evolution-algebra structure over the orthonormal basis.

The algebra is determined by structure constants ``c_ki`` through the basis
rules ``e_i * e_i = sum_k c_ki e_k`` and ``e_i * e_j = 0`` for ``i != j``.
Extending bilinearly, the product of two elements is the series

    v * w = sum_k ( sum_i v_i w_i c_ki ) e_k,

which this module evaluates column by column under a truncation policy, with
certified tail accounting instead of silent truncation.

A :class:`StructureMap` is a column oracle ``i -> {(k, c_ki)}`` plus optional
certified metadata (exact column l1 masses, global row/column sup bounds).
Stochastic columns always come with the metadata needed for tail bounds; raw
lazy maps without metadata still work but produce uncertifiable (infinite)
tails, and operations refuse them when a policy cap is enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .elements import BasisIndex, Element, Kahan, TruncationPolicy, norm
from .errors import NonFiniteCoefficient, TailTooLarge, UnsupportedInput

ColumnEntries = Sequence[tuple[BasisIndex, float]]

EXPLICIT_SPARSE = "explicit-sparse"
LAZY_FORMULA = "lazy-formula"


class StructureMap:
    """Column oracle for the structure constants ``c_ki``.

    ``column(i, cutoff)`` returns the entries ``(k, c_ki)`` with
    ``k < cutoff``, sorted by ``k``, each ``k`` at most once.

    Certified metadata (all optional):

    column_l1
        Exact l1 mass of the *full* (untruncated) column ``i``.
    column_l1_const
        Asserts ``column_l1(i)`` equals this constant for every ``i``
        (stochastic maps: 1).
    col_l1_sup / row_l1_sup
        Certified ``sup_i sum_k |c_ki|`` and ``sup_k sum_i |c_ki|``; together
        they bound the evolution operator norm by their geometric mean.
    sup_col_sq
        Certified ``sup_i sum_k c_ki**2``; bounds the left-multiplication
        constant of a unit vector and propagates input tails through products.
    entries_le_one
        All ``|c_ki| <= 1`` (true for transition probabilities).
    """

    def __init__(
        self,
        column_fn: Callable[[BasisIndex, int], ColumnEntries],
        *,
        kind: str = LAZY_FORMULA,
        description: str = "",
        column_l1: Callable[[BasisIndex], float] | None = None,
        column_l1_const: float | None = None,
        col_l1_sup: float | None = None,
        row_l1_sup: float | None = None,
        sup_col_sq: float | None = None,
        entries_le_one: bool = False,
        column_tail_fn: Callable[[BasisIndex, int], float] | None = None,
        n_columns: int | None = None,
        max_index: int | None = None,
    ) -> None:
        self._column_fn = column_fn
        self.kind = kind
        self.description = description
        self._column_l1 = column_l1
        self.column_l1_const = column_l1_const
        self.col_l1_sup = col_l1_sup
        self.row_l1_sup = row_l1_sup
        self.sup_col_sq = sup_col_sq
        self.entries_le_one = entries_le_one
        self._column_tail_fn = column_tail_fn
        self.n_columns = n_columns
        self.max_index = max_index

    # -- oracles ---------------------------------------------------------

    def column(self, i: BasisIndex, cutoff: int) -> list[tuple[BasisIndex, float]]:
        entries = [
            (k, c) for k, c in self._column_fn(i, cutoff) if c != 0.0 and k < cutoff
        ]
        entries.sort(key=lambda kc: kc[0])
        return entries

    def column_l1(self, i: BasisIndex) -> float | None:
        """Exact l1 mass of the full column, when known."""
        if self.column_l1_const is not None:
            return self.column_l1_const
        if self._column_l1 is not None:
            return self._column_l1(i)
        return None

    def column_tail(self, i: BasisIndex, cutoff: int) -> float | None:
        """Certified l2-norm bound for the part of column ``i`` at
        ``k >= cutoff``; ``None`` when no bound is available."""
        if self._column_tail_fn is not None:
            return self._column_tail_fn(i, cutoff)
        full = self.column_l1(i)
        if full is None:
            return None
        kept = kahan_abs_sum(self.column(i, cutoff))
        l1_tail = max(full - kept, 0.0)
        # l2 <= l1 always; with entries in [-1, 1] also l2 <= sqrt(l1).
        if self.entries_le_one:
            return min(l1_tail, math.sqrt(l1_tail))
        return l1_tail

    @property
    def operator_norm_factor(self) -> float | None:
        """Unit-weight two-sided bound ``sqrt(col_l1_sup * row_l1_sup)`` on
        the evolution operator norm, when both sups are certified."""
        if self.col_l1_sup is None or self.row_l1_sup is None:
            return None
        return math.sqrt(self.col_l1_sup * self.row_l1_sup)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_columns(
        cls,
        columns: Mapping[BasisIndex, Mapping[BasisIndex, float] | ColumnEntries],
        description: str = "explicit sparse map",
    ) -> "StructureMap":
        """Explicit sparse map from fully stored columns.

        All tails are exact: entries beyond any cutoff are known, and columns
        not present are zero.
        """
        stored: dict[BasisIndex, list[tuple[BasisIndex, float]]] = {}
        for i, col in columns.items():
            entries = sorted(col.items()) if isinstance(col, Mapping) else sorted(col)
            seen: set[BasisIndex] = set()
            for k, c in entries:
                if k in seen:
                    raise ValueError(f"column {i} repeats row index {k}")
                if not math.isfinite(c):
                    raise ValueError(f"non-finite structure constant at ({k}, {i})")
                seen.add(k)
            stored[i] = [(k, c) for k, c in entries if c != 0.0]

        def column_fn(i: BasisIndex, cutoff: int) -> ColumnEntries:
            return [(k, c) for k, c in stored.get(i, []) if k < cutoff]

        def column_tail_fn(i: BasisIndex, cutoff: int) -> float:
            acc = Kahan()
            for k, c in stored.get(i, []):
                if k >= cutoff:
                    acc.add(c * c)
            return math.sqrt(acc.total)

        def column_l1(i: BasisIndex) -> float:
            return kahan_abs_sum(stored.get(i, []))

        row_sums: dict[BasisIndex, Kahan] = {}
        col_sq_max = 0.0
        col_l1_max = 0.0
        max_entry = 0.0
        for i in sorted(stored):
            sq = Kahan()
            for k, c in stored[i]:
                row_sums.setdefault(k, Kahan()).add(abs(c))
                sq.add(c * c)
                max_entry = max(max_entry, abs(c))
            col_sq_max = max(col_sq_max, sq.total)
            col_l1_max = max(col_l1_max, column_l1(i))
        row_l1_sup = max((acc.total for acc in row_sums.values()), default=0.0)
        n_columns = max(stored, default=-1) + 1

        return cls(
            column_fn,
            kind=EXPLICIT_SPARSE,
            description=description,
            column_l1=column_l1,
            col_l1_sup=col_l1_max,
            row_l1_sup=row_l1_sup,
            sup_col_sq=col_sq_max,
            entries_le_one=max_entry <= 1.0,
            column_tail_fn=column_tail_fn,
            n_columns=n_columns,
        )

    @classmethod
    def from_dense(cls, matrix, description: str = "dense map") -> "StructureMap":
        """Dense ``matrix[k][i] = c_ki`` (finite-dimensional special case)."""
        cols: dict[BasisIndex, dict[BasisIndex, float]] = {}
        n_rows = len(matrix)
        for k in range(n_rows):
            row = matrix[k]
            for i in range(len(row)):
                c = float(row[i])
                if c != 0.0:
                    cols.setdefault(i, {})[k] = c
        return cls.from_columns(cols, description)


def kahan_abs_sum(entries: ColumnEntries) -> float:
    acc = Kahan()
    for _, c in entries:
        acc.add(abs(c))
    return acc.total


@dataclass(frozen=True)
class ContinuityBound:
    """Bound ``m_v`` with ``||v * w|| <= m_v * ||w||``; ``exact`` marks that
    every touched column was fully enumerable under the policy."""

    m_v: float
    exact: bool


def square_basis(s: StructureMap, i: BasisIndex, policy: TruncationPolicy) -> Element:
    """``e_i * e_i``: column ``i`` of the structure map as an element.

    The tail bound comes from column metadata; with none available the tail
    is uncertifiable and the policy cap rejects the result.
    """
    entries = s.column(i, policy.cutoff)
    tail = s.column_tail(i, policy.cutoff)
    tail_bound = tail if tail is not None else math.inf
    if tail_bound > policy.max_tail:
        raise TailTooLarge(
            f"column {i} tail {tail_bound:.6g} exceeds max_tail {policy.max_tail:.6g}"
        )
    return Element(dict(entries), tail_bound)


def _accumulate_columns(
    s: StructureMap,
    weighted: Sequence[tuple[BasisIndex, float]],
    cutoff: int,
) -> tuple[dict[BasisIndex, float], float | None]:
    """Shared series loop: ``out_k = sum_i weight_i * c_ki``.

    ``weighted`` must be sorted by index; terms are accumulated per output
    index in that order with compensation, so equal inputs give bit-equal
    outputs.  Returns the coefficients and the certified l2 bound for the
    discarded ``k >= cutoff`` part (``None`` if any touched column lacks
    tail metadata).
    """
    sums: dict[BasisIndex, Kahan] = {}
    lost = Kahan()
    lost_known = True
    for i, weight in weighted:
        for k, c in s.column(i, cutoff):
            acc = sums.get(k)
            if acc is None:
                acc = sums[k] = Kahan()
            acc.add(weight * c)
        ct = s.column_tail(i, cutoff)
        if ct is None:
            lost_known = False
        else:
            lost.add(abs(weight) * ct)
    coeffs = {k: acc.total for k, acc in sums.items()}
    for k, val in coeffs.items():
        if not math.isfinite(val):
            raise NonFiniteCoefficient(f"coefficient at index {k} is {val!r}")
    return coeffs, (lost.total if lost_known else None)


def _stored_left_mult_bound(
    s: StructureMap, v: Element, cutoff: int
) -> float | None:
    """Upper bound on the left-multiplication constant of the stored part of
    ``v``, tail-corrected; ``None`` when a touched column tail is unknown."""
    total = Kahan()
    for i, vi in v.items():
        sq = Kahan()
        for _, c in s.column(i, cutoff):
            sq.add(c * c)
        ct = s.column_tail(i, cutoff)
        if ct is None:
            return None
        total.add(vi * vi * (sq.total + ct * ct))
    return math.sqrt(total.total)


def product(
    s: StructureMap,
    v: Element,
    w: Element,
    policy: TruncationPolicy,
    *,
    _enforce_max_tail: bool = True,
) -> Element:
    """The series product ``v * w`` under the truncation policy.

    Distinct basis vectors annihilate exactly: the sum runs over the
    intersection of the stored supports, so ``product(s, e_i, e_j)`` is the
    zero element for ``i != j``.  Coefficients of ``v * w`` and ``w * v`` are
    bit-identical because terms are accumulated in the same index order.

    The result tail charges (a) truncated columns, (b) omitted coefficients
    of ``v`` through ``sup_col_sq``, and (c) omitted coefficients of ``w``
    through the stored left-multiplication bound of ``v``.  If any of these
    cannot be certified the tail is infinite, which the policy cap rejects.
    """
    if v.tail_bound > policy.max_tail or w.tail_bound > policy.max_tail:
        raise TailTooLarge("input tail bound already exceeds policy.max_tail")
    common = sorted(set(v.coefficients) & set(w.coefficients))
    weighted = [(i, v.coefficients[i] * w.coefficients[i]) for i in common]
    coeffs, lost = _accumulate_columns(s, weighted, policy.cutoff)

    tail: float | None = lost
    if tail is not None and v.tail_bound > 0.0:
        if s.sup_col_sq is None:
            tail = None
        else:
            w_full = norm(w).value + w.tail_bound
            tail += math.sqrt(s.sup_col_sq) * v.tail_bound * w_full
    if tail is not None and w.tail_bound > 0.0:
        m_stored = _stored_left_mult_bound(s, v, policy.cutoff)
        if m_stored is None:
            tail = None
        else:
            tail += m_stored * w.tail_bound

    tail_bound = tail if tail is not None else math.inf
    if _enforce_max_tail and tail_bound > policy.max_tail:
        raise TailTooLarge(
            f"product tail {tail_bound:.6g} exceeds max_tail {policy.max_tail:.6g}"
        )
    return Element(coeffs, tail_bound)


class LeftMultiplication:
    """Handle for ``w -> v * w`` that caches the columns touched by ``v``."""

    def __init__(self, s: StructureMap, v: Element) -> None:
        self.structure = s
        self.vector = v
        self._cache: dict[int, StructureMap] = {}

    def apply(self, w: Element, policy: TruncationPolicy) -> Element:
        cached = self._cache.get(policy.cutoff)
        if cached is None:
            cached = _snapshot_columns(self.structure, self.vector, policy.cutoff)
            self._cache[policy.cutoff] = cached
        return product(cached, self.vector, w, policy)

    __call__ = apply


def _snapshot_columns(s: StructureMap, v: Element, cutoff: int) -> StructureMap:
    stored = {i: s.column(i, cutoff) for i in v.support}
    tails = {i: s.column_tail(i, cutoff) for i in v.support}

    def column_fn(i: BasisIndex, cut: int) -> ColumnEntries:
        entries = stored.get(i)
        if entries is None:
            entries = s.column(i, cut)
        return [(k, c) for k, c in entries if k < cut]

    def column_tail_fn(i: BasisIndex, cut: int) -> float | None:
        if i in tails and cut == cutoff:
            return tails[i]
        return s.column_tail(i, cut)

    return StructureMap(
        column_fn,
        kind=s.kind,
        description=s.description,
        column_l1=s.column_l1,
        column_l1_const=s.column_l1_const,
        col_l1_sup=s.col_l1_sup,
        row_l1_sup=s.row_l1_sup,
        sup_col_sq=s.sup_col_sq,
        entries_le_one=s.entries_le_one,
        column_tail_fn=column_tail_fn,
        n_columns=s.n_columns,
    )


def left_mult(s: StructureMap, v: Element) -> LeftMultiplication:
    """Left-multiplication operator handle ``L_v : w -> v * w``."""
    return LeftMultiplication(s, v)


def continuity_bound(
    s: StructureMap, v: Element, policy: TruncationPolicy
) -> ContinuityBound:
    """Continuity constant of ``L_v`` for finitely supported ``v``:
    ``m_v**2 = sum_i v_i**2 * sum_k c_ki**2``, with column-tail corrections.

    Raises
    ------
    UnsupportedInput
        If ``v`` carries a nonzero tail bound.
    """
    if v.tail_bound != 0.0:
        raise UnsupportedInput("continuity_bound requires a finitely supported v")
    total = Kahan()
    exact = True
    for i, vi in v.items():
        sq = Kahan()
        for _, c in s.column(i, policy.cutoff):
            sq.add(c * c)
        ct = s.column_tail(i, policy.cutoff)
        if ct is None:
            exact = False
            ct = 0.0
        elif ct != 0.0:
            exact = False
        total.add(vi * vi * (sq.total + ct * ct))
    return ContinuityBound(math.sqrt(total.total), exact)
