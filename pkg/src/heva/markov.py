"""Countable-state Markov chains and their induced evolution algebras.

A :class:`TransitionKernel` is a row oracle ``i -> {(k, p_ik)}`` for a chain
on the nonnegative integers.  Transposing indices (``c_ki = p_ik``) turns an
honest kernel into a stochastic structure map, and then ``C^n(e_i)`` recovers
the n-step transition probabilities; :func:`nstep_oracle` computes the same
table by brute-force row pushes so the two routes can be cross-checked, and
:func:`simulate` adds a Monte Carlo route on top.

Kernels stay row-oriented (a row is one state's outgoing law, the natural
sampling unit); only :func:`to_structure_map` transposes.  Probability mass
pushed past the truncation window is never renormalized away: it accumulates
in explicit deficit scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _mc
from .algebra import EXPLICIT_SPARSE, LAZY_FORMULA, StructureMap
from .elements import (
    BasisIndex,
    Element,
    Kahan,
    TruncationPolicy,
    parse_element,
)
from .errors import (
    ElementFormatError,
    InvalidParameter,
    KernelFormatError,
    NotMarkov,
    TailTooLarge,
)
from .operator import power_apply
from .rng import MASK64

State = int
RowEntries = Sequence[tuple[State, float]]


class TransitionKernel:
    """Row oracle for a countable-state chain.

    ``row(i, cutoff)`` returns the outgoing law of state ``i`` restricted to
    target states ``k < cutoff``, sorted, each target once.  ``row_mass(i)``
    is the exact mass of the full row (1 for honest kernels) and
    ``row_tail(i, cutoff)`` the exact mass beyond the window.

    ``incoming_mass_bound``, when set, certifies ``sup_k sum_i p_ik``; the
    built-in families derive it analytically and the row-sum certificate
    reports it verbatim.
    """

    def __init__(
        self,
        row_fn: Callable[[State, int], RowEntries],
        *,
        description: str = "",
        kind: str = LAZY_FORMULA,
        row_mass_fn: Callable[[State], float] | None = None,
        row_tail_fn: Callable[[State, int], float] | None = None,
        incoming_mass_bound: float | None = None,
        stored_rows: dict[State, list[tuple[State, float]]] | None = None,
        max_index: int | None = None,
    ) -> None:
        self._row_fn = row_fn
        self.description = description
        self.kind = kind
        self._row_mass_fn = row_mass_fn
        self._row_tail_fn = row_tail_fn
        self.incoming_mass_bound = incoming_mass_bound
        self.stored_rows = stored_rows
        self.max_index = max_index

    def row(self, i: State, cutoff: int) -> list[tuple[State, float]]:
        entries = [(k, p) for k, p in self._row_fn(i, cutoff) if p != 0.0 and k < cutoff]
        entries.sort(key=lambda kp: kp[0])
        return entries

    def row_mass(self, i: State) -> float:
        if self._row_mass_fn is None:
            return 1.0
        return self._row_mass_fn(i)

    def row_tail(self, i: State, cutoff: int) -> float:
        """Exact row mass beyond the window (closed form when the family has
        one, otherwise mass minus the truncated sum)."""
        if self._row_tail_fn is not None:
            return self._row_tail_fn(i, cutoff)
        acc = Kahan()
        for _, p in self.row(i, cutoff):
            acc.add(p)
        return max(self.row_mass(i) - acc.total, 0.0)

    @classmethod
    def from_rows(
        cls,
        rows: Mapping[State, Mapping[State, float] | RowEntries],
        description: str = "explicit kernel",
    ) -> "TransitionKernel":
        """Explicitly stored kernel; rows not present are empty and get
        flagged by validation (an honest kernel claims unit row mass)."""
        stored: dict[State, list[tuple[State, float]]] = {}
        max_index = 0
        for i, row in rows.items():
            entries = sorted(row.items()) if isinstance(row, Mapping) else sorted(row)
            seen: set[State] = set()
            for k, p in entries:
                if k in seen:
                    raise ValueError(f"row {i} repeats target state {k}")
                if not math.isfinite(p):
                    raise ValueError(f"non-finite probability at ({i}, {k})")
                seen.add(k)
                max_index = max(max_index, k + 1)
            stored[i] = [(k, float(p)) for k, p in entries if p != 0.0]
            max_index = max(max_index, i + 1)

        def row_fn(i: State, cutoff: int) -> RowEntries:
            return [(k, p) for k, p in stored.get(i, []) if k < cutoff]

        inflow: dict[State, Kahan] = {}
        for i in sorted(stored):
            for k, p in stored[i]:
                inflow.setdefault(k, Kahan()).add(p)
        bound = max((acc.total for acc in inflow.values()), default=0.0)

        return cls(
            row_fn,
            description=description,
            kind=EXPLICIT_SPARSE,
            incoming_mass_bound=bound,
            stored_rows=stored,
            max_index=max_index,
        )


@dataclass(frozen=True)
class Distribution:
    """A probability distribution over states, stored as an element with
    coefficients in [0, 1] plus the mass lost to truncation."""

    underlying: Element
    mass_deficit: float = 0.0

    def validate(self, abs_tol: float = 1e-9) -> None:
        total = Kahan()
        for i, p in self.underlying.items():
            if p < -abs_tol or p > 1.0 + abs_tol:
                raise ValueError(f"coefficient at state {i} outside [0, 1]: {p!r}")
            total.add(p)
        if self.mass_deficit < -abs_tol:
            raise ValueError("mass_deficit must be nonnegative")
        if abs(total.total + self.mass_deficit - 1.0) > abs_tol:
            raise ValueError(
                f"total mass {total.total + self.mass_deficit!r} deviates from 1"
            )

    @classmethod
    def point_mass(cls, i: State) -> "Distribution":
        return cls(Element.basis(i))

    def __eq__(self, other: object) -> bool:
        # Tail bounds are bookkeeping, not identity: distributions compare by
        # coefficients and deficit.
        if not isinstance(other, Distribution):
            return NotImplemented
        keys = set(self.underlying.coefficients) | set(other.underlying.coefficients)
        return self.mass_deficit == other.mass_deficit and all(
            self.underlying[k] == other.underlying[k] for k in keys
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class NStepTable:
    """n-step transition probabilities out of one state."""

    from_state: State
    horizon: int
    probabilities: dict[State, float]
    deficit: float


@dataclass(frozen=True)
class KernelReport:
    states_checked: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_kernel(
    kernel: TransitionKernel, states_to_check: int, policy: TruncationPolicy
) -> KernelReport:
    """Check nonnegativity and row masses for the first states.

    Explicit kernels are checked on their full stored rows; lazy kernels on
    the truncated window plus their declared row mass.
    """
    violations: list[str] = []
    full_cutoff = policy.cutoff
    if kernel.kind == EXPLICIT_SPARSE and kernel.max_index is not None:
        full_cutoff = max(full_cutoff, kernel.max_index)
    for i in range(states_to_check):
        entries = kernel.row(i, full_cutoff)
        total = Kahan()
        for k, p in entries:
            if p < -policy.abs_tol:
                violations.append(f"row {i}: negative probability {p!r} to state {k}")
            if p > 1.0 + policy.abs_tol:
                violations.append(f"row {i}: probability {p!r} to state {k} exceeds 1")
            total.add(p)
        mass = kernel.row_mass(i)
        if abs(mass - 1.0) > policy.abs_tol:
            violations.append(f"row {i}: declared row mass {mass!r} is not 1")
        if kernel.kind == EXPLICIT_SPARSE:
            if abs(total.total - mass) > policy.abs_tol:
                violations.append(
                    f"row {i}: stored mass {total.total!r} deviates from declared "
                    f"{mass!r}"
                )
        elif total.total > mass + policy.abs_tol:
            violations.append(
                f"row {i}: truncated mass {total.total!r} exceeds declared {mass!r}"
            )
    return KernelReport(states_to_check, violations)


def to_structure_map(
    kernel: TransitionKernel,
    *,
    validate_states: int = 32,
    abs_tol: float = 1e-9,
) -> StructureMap:
    """Structure map with ``c_ki = p_ik``: column ``i`` is row ``i`` of the
    kernel.  Fails with :class:`NotMarkov` when validation finds violations.
    """
    policy = TruncationPolicy(cutoff=1024, abs_tol=abs_tol, max_tail=1.0)
    report = validate_kernel(kernel, validate_states, policy)
    if not report.ok:
        raise NotMarkov("; ".join(report.violations[:3]))

    if kernel.kind == EXPLICIT_SPARSE and kernel.stored_rows is not None:
        return StructureMap.from_columns(
            {i: dict(row) for i, row in kernel.stored_rows.items()},
            description=f"transposed {kernel.description}",
        )

    def column_tail_fn(i: BasisIndex, cutoff: int) -> float:
        l1 = max(kernel.row_tail(i, cutoff), 0.0)
        return min(l1, math.sqrt(l1))

    return StructureMap(
        kernel.row,
        kind=LAZY_FORMULA,
        description=f"transposed {kernel.description}",
        column_l1=kernel.row_mass,
        column_l1_const=1.0,
        col_l1_sup=1.0,
        row_l1_sup=kernel.incoming_mass_bound,
        sup_col_sq=1.0,
        entries_le_one=True,
        column_tail_fn=column_tail_fn,
    )


def nstep_oracle(
    kernel: TransitionKernel, from_state: State, n: int, policy: TruncationPolicy
) -> NStepTable:
    """Brute-force n-step probabilities by pushing a row vector through the
    truncated kernel.  Kept deliberately independent of the algebra route.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    dist: dict[State, float] = {from_state: 1.0}
    deficit = 0.0
    for _ in range(n):
        new: dict[State, float] = {}
        for i in sorted(dist):
            mass = dist[i]
            pushed = 0.0
            for k, p in kernel.row(i, policy.cutoff):
                new[k] = new.get(k, 0.0) + mass * p
                pushed += p
            deficit += mass * max(kernel.row_mass(i) - pushed, 0.0)
        dist = new
        if deficit > policy.max_tail:
            raise TailTooLarge(
                f"n-step deficit {deficit:.6g} exceeds max_tail {policy.max_tail:.6g}"
            )
    return NStepTable(from_state, n, dist, deficit)


def evolve_distribution(
    kernel: TransitionKernel,
    init: Distribution,
    n: int,
    policy: TruncationPolicy,
) -> Distribution:
    """Push a distribution ``n`` steps through the evolution operator of the
    induced algebra (the algebra route; cross-check against
    :func:`nstep_oracle` or :func:`simulate`).

    Coefficientwise this is exactly ``power_apply`` on the transposed kernel;
    on top of it the probability mass pushed past the cutoff is tracked as an
    explicit deficit.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    init.validate(policy.abs_tol)
    smap = to_structure_map(kernel, abs_tol=policy.abs_tol)
    x = init.underlying
    deficit = init.mass_deficit
    for _ in range(n):
        before = Kahan()
        for _, p in x.items():
            before.add(p)
        x = power_apply(smap, x, 1, policy)
        after = Kahan()
        for _, p in x.items():
            after.add(p)
        deficit += max(before.total - after.total, 0.0)
        if deficit > policy.max_tail:
            raise TailTooLarge(
                f"evolution deficit {deficit:.6g} exceeds max_tail "
                f"{policy.max_tail:.6g}"
            )
    return Distribution(x, deficit)


# -- Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True)
class SimulationResult:
    """Empirical distribution over states at the horizon.

    Paths that left the truncation window are counted in ``escaped`` and
    excluded from ``counts``; frequencies use all paths as denominator, which
    estimates exactly the truncated push-forward coefficients.
    """

    counts: dict[State, int]
    escaped: int
    paths: int

    @property
    def frequencies(self) -> dict[State, float]:
        return {s: c / self.paths for s, c in self.counts.items()}


def _window_csr(
    kernel: TransitionKernel, cutoff: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR snapshot of the kernel window with per-row cumulative sums."""
    indptr = np.zeros(cutoff + 1, dtype=np.int64)
    cols: list[int] = []
    cdf: list[float] = []
    for i in range(cutoff):
        running = 0.0
        for k, p in kernel.row(i, cutoff):
            running += p
            cols.append(k)
            cdf.append(running)
        indptr[i + 1] = len(cols)
    return indptr, np.array(cols, dtype=np.int64), np.array(cdf, dtype=np.float64)


def simulate(
    kernel: TransitionKernel,
    init: Distribution,
    n: int,
    paths: int,
    seed: int,
    policy: TruncationPolicy,
) -> SimulationResult:
    """Sample ``paths`` trajectories of length ``n`` by inverse-CDF over the
    truncated rows; residual row mass maps to an absorbing escape bucket.

    Draws are keyed by ``(seed, path, step)``, so results are
    bit-reproducible regardless of scheduling or implementation (compiled or
    pure Python).
    """
    if paths < 1:
        raise ValueError("paths must be >= 1")
    if n < 0:
        raise ValueError("n must be nonnegative")
    init.validate(policy.abs_tol)

    indptr, cols, cdf = _window_csr(kernel, policy.cutoff)
    init_states = []
    init_cdf = []
    running = 0.0
    for i, p in init.underlying.items():
        running += p
        init_states.append(i)
        init_cdf.append(running)
    final = _mc.walk_paths(
        indptr,
        cols,
        cdf,
        np.array(init_states, dtype=np.int64),
        np.array(init_cdf, dtype=np.float64),
        n,
        seed & MASK64,
        paths,
    )
    in_window = final[final >= 0]
    states, counts = np.unique(in_window, return_counts=True)
    return SimulationResult(
        {int(s): int(c) for s, c in zip(states, counts)},
        escaped=int(paths - in_window.size),
        paths=paths,
    )


# -- built-in chain families ----------------------------------------------------


class GeometricSequence:
    """``p_i = (1 - q) * q**(i - start)`` for ``i >= start``; total mass 1
    with closed-form tails ``q**(m - start + 1)``."""

    def __init__(self, q: float, start: int = 0) -> None:
        if not 0.0 < q < 1.0:
            raise InvalidParameter(f"geometric ratio must be in (0, 1), got {q!r}")
        self.q = q
        self.start = start
        self.total = 1.0

    def mass(self, i: int) -> float:
        if i < self.start:
            return 0.0
        return (1.0 - self.q) * self.q ** (i - self.start)

    def tail(self, m: int) -> float:
        """Mass strictly beyond index ``m``."""
        if m < self.start:
            return 1.0
        return self.q ** (m - self.start + 1)


class ConstantSequence:
    """``p_i = p`` for every ``i >= start``; infinite total mass."""

    def __init__(self, p: float, start: int = 0) -> None:
        if not 0.0 < p <= 1.0:
            raise InvalidParameter(f"constant probability must be in (0, 1], got {p!r}")
        self.p = p
        self.start = start
        self.total = math.inf

    def mass(self, i: int) -> float:
        return self.p if i >= self.start else 0.0

    def tail(self, m: int) -> float:
        return math.inf


def build_renewal(seq) -> TransitionKernel:
    """Chain that descends one step deterministically and redistributes from
    state 0 with law ``p_i`` (``i >= 1``).

    The sequence oracle must certify total mass 1 through its tail formula.
    Every state's inflow is the descent step plus at most one jump from 0,
    so ``sum_i p_ik <= 1 + p_0k <= 2``; the family certifies that bound for
    any admissible sequence.
    """
    probes = [0, 1, 2, 5, 9]
    if not math.isfinite(seq.total) or abs(seq.total - 1.0) > 1e-12:
        raise NotMarkov(f"jump law total mass {seq.total!r} is not 1")
    if abs(seq.tail(0) - 1.0) > 1e-12:
        raise NotMarkov("jump law tail formula inconsistent with total mass 1")
    for m in probes:
        lhs = seq.tail(m) - seq.tail(m + 1)
        if abs(lhs - seq.mass(m + 1)) > 1e-12:
            raise NotMarkov(f"tail formula inconsistent at index {m + 1}")
    if seq.mass(0) != 0.0:
        raise NotMarkov("renewal jump law must start at state 1")

    def row_fn(i: State, cutoff: int) -> RowEntries:
        if i == 0:
            return [(k, seq.mass(k)) for k in range(1, cutoff)]
        return [(i - 1, 1.0)] if i - 1 < cutoff else []

    def row_tail_fn(i: State, cutoff: int) -> float:
        if i == 0:
            return seq.tail(cutoff - 1)
        return 0.0 if i - 1 < cutoff else 1.0

    return TransitionKernel(
        row_fn,
        description="renewal chain",
        row_tail_fn=row_tail_fn,
        incoming_mass_bound=2.0,
    )


def build_house_of_cards(seq) -> TransitionKernel:
    """Chain that collapses to 0 with probability ``p_i`` or climbs one step.

    Inflow to state 0 is the full sequence mass, so the family certifies an
    incoming bound only when that total is finite: ``max(total, 1)``.
    """
    for i in range(16):
        p = seq.mass(i)
        if not 0.0 < p <= 1.0:
            raise InvalidParameter(f"collapse probability p_{i} = {p!r} not in (0, 1]")

    def _p(i: State) -> float:
        p = seq.mass(i)
        if not 0.0 < p <= 1.0:
            raise InvalidParameter(f"collapse probability p_{i} = {p!r} not in (0, 1]")
        return p

    def row_fn(i: State, cutoff: int) -> RowEntries:
        p = _p(i)
        entries = [(0, p)]
        if i + 1 < cutoff:
            entries.append((i + 1, 1.0 - p))
        return entries

    def row_tail_fn(i: State, cutoff: int) -> float:
        return 0.0 if i + 1 < cutoff else 1.0 - _p(i)

    bound = max(seq.total, 1.0) if math.isfinite(seq.total) else None
    return TransitionKernel(
        row_fn,
        description="house-of-cards chain",
        row_tail_fn=row_tail_fn,
        incoming_mass_bound=bound,
    )


def build_identity() -> TransitionKernel:
    """The chain that never moves; its evolution operator is the identity."""
    return TransitionKernel(
        lambda i, cutoff: [(i, 1.0)] if i < cutoff else [],
        description="identity chain",
        row_tail_fn=lambda i, cutoff: 0.0 if i < cutoff else 1.0,
        incoming_mass_bound=1.0,
    )


def branching_column_bound(offspring: Sequence[float], s: float) -> float:
    """Inflow bound for the branching kernel via the offspring generating
    function: ``max(p_0/(1-p_0), phi(s)/(s*(1-phi(s))))`` for ``s in (0,1)``.
    """
    if not 0.0 < s < 1.0:
        raise InvalidParameter(f"evaluation point must be in (0, 1), got {s!r}")
    _check_offspring(offspring)
    phi = Kahan()
    for j, p in enumerate(offspring):
        phi.add(p * s**j)
    if phi.total >= 1.0:
        raise InvalidParameter(f"generating function value {phi.total!r} >= 1")
    p0 = offspring[0]
    return max(p0 / (1.0 - p0), phi.total / (s * (1.0 - phi.total)))


def _check_offspring(offspring: Sequence[float]) -> None:
    if len(offspring) < 2:
        raise InvalidParameter("offspring law needs at least degrees 0 and 1")
    if not 0.0 < offspring[0] < 1.0:
        raise InvalidParameter(f"p_0 must be in (0, 1), got {offspring[0]!r}")
    total = Kahan()
    for p in offspring:
        if p < 0.0 or not math.isfinite(p):
            raise InvalidParameter(f"offspring probability {p!r} invalid")
        total.add(p)
    if abs(total.total - 1.0) > 1e-12:
        raise InvalidParameter(f"offspring law mass {total.total!r} is not 1")


def build_branching(
    offspring: Sequence[float], max_population: int = 256
) -> TransitionKernel:
    """Population chain: each of ``i`` individuals independently produces
    offspring by the given finite law; row ``i`` is the i-fold convolution.

    Rows up to ``max_population`` are materialized eagerly; larger
    populations are convolved on demand (and memoized).
    """
    _check_offspring(offspring)
    if max_population < 1:
        raise InvalidParameter("max_population must be >= 1")
    base = [float(p) for p in offspring]
    rows: dict[int, list[float]] = {0: [1.0]}

    def _convolve(a: list[float]) -> list[float]:
        out = [Kahan() for _ in range(len(a) + len(base) - 1)]
        for t in range(len(a)):
            at = a[t]
            for j, pj in enumerate(base):
                out[t + j].add(at * pj)
        return [acc.total for acc in out]

    def _row(i: int) -> list[float]:
        known = max(rows)
        while known < i:
            rows[known + 1] = _convolve(rows[known])
            known += 1
        return rows[i]

    for i in range(1, max_population + 1):
        _row(i)

    def row_fn(i: State, cutoff: int) -> RowEntries:
        dense = _row(i)
        return [(k, p) for k, p in enumerate(dense[:cutoff]) if p != 0.0]

    def row_tail_fn(i: State, cutoff: int) -> float:
        dense = _row(i)
        acc = Kahan()
        for p in dense[cutoff:]:
            acc.add(p)
        return acc.total

    # Extinction inflow includes the absorbing self-loop, so the certified
    # bound covers 1 + p0/(1-p0); the generating-function term already covers
    # every other state.
    p0 = base[0]
    bound = max(branching_column_bound(base, 0.5), 1.0 + p0 / (1.0 - p0))
    return TransitionKernel(
        row_fn,
        description="branching process chain",
        row_tail_fn=row_tail_fn,
        incoming_mass_bound=bound,
    )


# -- file formats ---------------------------------------------------------------


def parse_kernel(text: str) -> TransitionKernel:
    """Parse the line-oriented kernel format.

    Header ``kernel v1``, then either a single ``builtin`` line or sparse
    triples ``row <i> <k> <p>`` terminated by ``end``.
    """
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines or lines[0] != "kernel v1":
        raise KernelFormatError("expected header 'kernel v1'")
    body = lines[1:]
    if not body:
        raise KernelFormatError("kernel file has no content")
    if body[0].startswith("builtin"):
        if len(body) > 1:
            raise KernelFormatError("unexpected lines after builtin declaration")
        return builtin_kernel(body[0].split()[1:])
    rows: dict[State, dict[State, float]] = {}
    terminated = False
    for line in body:
        if line == "end":
            terminated = True
            continue
        if terminated:
            raise KernelFormatError("entries after 'end'")
        parts = line.split()
        if len(parts) != 4 or parts[0] != "row":
            raise KernelFormatError(f"expected 'row <i> <k> <p>', got {line!r}")
        try:
            i, k, p = int(parts[1]), int(parts[2]), float(parts[3])
        except ValueError as exc:
            raise KernelFormatError(f"bad row entry {line!r}") from exc
        if i < 0 or k < 0:
            raise KernelFormatError(f"negative state in {line!r}")
        if k in rows.setdefault(i, {}):
            raise KernelFormatError(f"duplicate entry for transition {i} -> {k}")
        rows[i][k] = p
    if not terminated:
        raise KernelFormatError("missing 'end' terminator")
    return TransitionKernel.from_rows(rows, description="kernel from file")


def builtin_kernel(tokens: Sequence[str]) -> TransitionKernel:
    def _float(tok: str) -> float:
        try:
            return float(tok)
        except ValueError as exc:
            raise KernelFormatError(f"bad parameter {tok!r}") from exc

    if tokens[:1] == ["renewal"]:
        if len(tokens) != 3 or tokens[1] != "geometric":
            raise KernelFormatError("expected 'builtin renewal geometric <q>'")
        return build_renewal(GeometricSequence(_float(tokens[2]), start=1))
    if tokens[:1] == ["house-of-cards"]:
        if len(tokens) != 3 or tokens[1] not in ("constant", "geometric"):
            raise KernelFormatError(
                "expected 'builtin house-of-cards constant|geometric <x>'"
            )
        if tokens[1] == "constant":
            return build_house_of_cards(ConstantSequence(_float(tokens[2])))
        return build_house_of_cards(GeometricSequence(_float(tokens[2])))
    if tokens[:1] == ["branching"]:
        if len(tokens) < 3:
            raise KernelFormatError("expected 'builtin branching <p0> <p1> [...]'")
        return build_branching([_float(t) for t in tokens[1:]])
    raise KernelFormatError(f"unknown builtin family {tokens[:1]!r}")


def load_kernel(path: str) -> TransitionKernel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kernel(fh.read())


def parse_distribution(text: str, abs_tol: float = 1e-9) -> Distribution:
    """Element format plus an optional ``#deficit <x>`` trailer."""
    deficit = 0.0
    plain_lines: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#deficit"):
            parts = line.split()
            if len(parts) != 2:
                raise ElementFormatError("malformed #deficit line")
            try:
                deficit = float(parts[1])
            except ValueError as exc:
                raise ElementFormatError("bad deficit value") from exc
            continue
        plain_lines.append(raw)
    element = parse_element("\n".join(plain_lines))
    if element.tail_bound == 0.0 and deficit > 0.0:
        # The lost probability mass also bounds the lost l2 norm.
        element = Element(dict(element.coefficients), deficit)
    dist = Distribution(element, deficit)
    dist.validate(abs_tol)
    return dist


def format_distribution(dist: Distribution) -> str:
    lines = [f"{i}\t{p!r}" for i, p in dist.underlying.items()]
    lines.append(f"#deficit {dist.mass_deficit!r}")
    return "\n".join(lines) + "\n"


def read_distribution(path: str, abs_tol: float = 1e-9) -> Distribution:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_distribution(fh.read(), abs_tol)
