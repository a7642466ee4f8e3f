"""Square-summable elements of a separable Hilbert space.

An element ``v`` of the space is a coefficient sequence over a fixed countable
orthonormal basis ``{e_i}`` (0-based indexing throughout).  Only finitely many
coefficients are stored; everything omitted is accounted for by a certified
``tail_bound`` on its total l2 norm, so every downstream result can be stated
as value plus certified uncertainty instead of pretending truncations are
exact.

Coefficient sums are accumulated in increasing index order with compensated
(Kahan) summation, which makes results independent of dict iteration order
and bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import ElementFormatError, TailTooLarge

BasisIndex = int


class Kahan:
    """Compensated accumulator; ``add`` terms in a fixed order for
    reproducible sums."""

    __slots__ = ("total", "_c")

    def __init__(self) -> None:
        self.total = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


def kahan_sum(values: Iterable[float]) -> float:
    acc = Kahan()
    for x in values:
        acc.add(x)
    return acc.total


class BoundedScalar(NamedTuple):
    """A real value together with a certified error bar."""

    value: float
    uncertainty: float


@dataclass(frozen=True)
class TruncationPolicy:
    """Governs every infinite-series evaluation.

    Parameters
    ----------
    cutoff : int
        Basis indices ``>= cutoff`` are dropped.
    abs_tol : float
        Numeric comparison tolerance.
    max_tail : float
        Largest admissible certified tail before an operation refuses.
    """

    cutoff: int = 256
    abs_tol: float = 1e-9
    max_tail: float = 1e-3

    def __post_init__(self) -> None:
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.max_tail > 0:
            raise ValueError("max_tail must be positive")


@dataclass(frozen=True)
class Element:
    """Finitely many stored coefficients plus a certified l2 tail bound.

    ``tail_bound`` is an upper bound on the l2 norm of every omitted
    coefficient; an element with ``tail_bound == 0`` is exact.  ``math.inf``
    is admitted and marks a result whose tail could not be certified.
    Instances are immutable; all operations return new elements.
    """

    coefficients: Mapping[BasisIndex, float]
    tail_bound: float = 0.0

    def __post_init__(self) -> None:
        coeffs = dict(self.coefficients)
        for idx, val in coeffs.items():
            if not isinstance(idx, int) or idx < 0:
                raise ValueError(f"basis index must be a nonnegative int, got {idx!r}")
            if not math.isfinite(val):
                raise ValueError(f"coefficient at index {idx} is not finite: {val!r}")
        if math.isnan(self.tail_bound) or self.tail_bound < 0:
            raise ValueError("tail_bound must be nonnegative")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def basis(cls, i: BasisIndex) -> "Element":
        return cls({i: 1.0})

    @classmethod
    def zero(cls) -> "Element":
        return cls({})

    @property
    def support(self) -> list[BasisIndex]:
        return sorted(self.coefficients)

    @property
    def exact(self) -> bool:
        return self.tail_bound == 0.0

    def __getitem__(self, i: BasisIndex) -> float:
        return self.coefficients.get(i, 0.0)

    def items(self) -> Iterator[tuple[BasisIndex, float]]:
        """Stored entries in increasing index order."""
        for i in sorted(self.coefficients):
            yield i, self.coefficients[i]

    def __eq__(self, other: object) -> bool:
        # Sparse-vector semantics: a stored 0.0 equals an absent entry.
        if not isinstance(other, Element):
            return NotImplemented
        keys = set(self.coefficients) | set(other.coefficients)
        return self.tail_bound == other.tail_bound and all(
            self[k] == other[k] for k in keys
        )

    def __hash__(self) -> int:  # pragma: no cover - not used as dict key
        return hash((frozenset((k, v) for k, v in self.coefficients.items() if v != 0.0),
                     self.tail_bound))

    def __repr__(self) -> str:
        entries = ", ".join(f"{i}: {v!r}" for i, v in self.items())
        return f"Element({{{entries}}}, tail_bound={self.tail_bound!r})"


def inner_product(v: Element, w: Element) -> BoundedScalar:
    """``<v, w>`` over the stored supports, with a Cauchy-Schwarz error bar.

    The uncertainty charges all omitted mass:
    ``v.tail*w.tail + v.tail*||w|| + w.tail*||v||``.
    """
    acc = Kahan()
    common = sorted(set(v.coefficients) & set(w.coefficients))
    for i in common:
        acc.add(v.coefficients[i] * w.coefficients[i])
    unc = 0.0
    if v.tail_bound or w.tail_bound:
        unc = (
            v.tail_bound * w.tail_bound
            + v.tail_bound * norm(w).value
            + w.tail_bound * norm(v).value
        )
    return BoundedScalar(acc.total, unc)


def norm(v: Element) -> BoundedScalar:
    """l2 norm of the stored part; the true norm lies in
    ``[value, sqrt(value**2 + tail_bound**2)]``."""
    acc = Kahan()
    for _, val in v.items():
        acc.add(val * val)
    value = math.sqrt(acc.total)
    if v.tail_bound == 0.0:
        return BoundedScalar(value, 0.0)
    upper = math.sqrt(acc.total + v.tail_bound * v.tail_bound)
    return BoundedScalar(value, upper - value)


def axpy(a: float, v: Element, w: Element) -> Element:
    """``a*v + w`` with tail bound ``|a|*v.tail + w.tail`` (Minkowski)."""
    out: dict[BasisIndex, float] = {}
    for i in sorted(set(v.coefficients) | set(w.coefficients)):
        out[i] = a * v[i] + w[i]
    return Element(out, abs(a) * v.tail_bound + w.tail_bound)


def scale(a: float, v: Element) -> Element:
    return axpy(a, v, Element.zero())


def truncate(v: Element, policy: TruncationPolicy) -> Element:
    """Drop indices ``>= policy.cutoff``, charging their exact l2 norm to the
    tail bound.

    Raises
    ------
    TailTooLarge
        If the resulting tail bound exceeds ``policy.max_tail``.
    """
    kept: dict[BasisIndex, float] = {}
    dropped_sq = Kahan()
    for i, val in v.items():
        if i < policy.cutoff:
            kept[i] = val
        else:
            dropped_sq.add(val * val)
    new_tail = v.tail_bound + math.sqrt(dropped_sq.total)
    if new_tail > policy.max_tail:
        raise TailTooLarge(
            f"truncation tail {new_tail:.6g} exceeds max_tail {policy.max_tail:.6g}"
        )
    return Element(kept, new_tail)


# -- text format --------------------------------------------------------------
#
# One entry per line: "<index> <value>"; lines starting with "#" are ignored;
# an optional final line "tail <bound>" sets the tail bound.


def parse_element(text: str) -> Element:
    """Parse the line-oriented coefficient format.

    Raises
    ------
    ElementFormatError
        On malformed lines, duplicate indices, or a misplaced tail line.
    """
    coeffs: dict[BasisIndex, float] = {}
    tail = 0.0
    seen_tail = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if seen_tail:
            raise ElementFormatError(f"line {lineno}: entries after tail line")
        parts = line.split()
        if parts[0] == "tail":
            if len(parts) != 2:
                raise ElementFormatError(f"line {lineno}: malformed tail line")
            try:
                tail = float(parts[1])
            except ValueError as exc:
                raise ElementFormatError(f"line {lineno}: bad tail value") from exc
            seen_tail = True
            continue
        if len(parts) != 2:
            raise ElementFormatError(f"line {lineno}: expected 'index value'")
        try:
            idx = int(parts[0])
            val = float(parts[1])
        except ValueError as exc:
            raise ElementFormatError(f"line {lineno}: bad entry {line!r}") from exc
        if idx in coeffs:
            raise ElementFormatError(f"line {lineno}: duplicate index {idx}")
        coeffs[idx] = val
    try:
        return Element(coeffs, tail)
    except ValueError as exc:
        raise ElementFormatError(str(exc)) from exc


def format_element(v: Element) -> str:
    lines = [f"{i} {val!r}" for i, val in v.items()]
    if v.tail_bound != 0.0:
        lines.append(f"tail {v.tail_bound!r}")
    return "\n".join(lines) + "\n"


def read_element(path: str) -> Element:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_element(fh.read())
