"""Domain types and elementary operations shared by every other module.

Every quantity that enters a comparison somewhere (loss entries, mixture
weights, thresholds, game values) is an exact `fractions.Fraction`. The
dimension recursions test game values against thresholds with
equality-sensitive comparisons, so a single float anywhere in the pipeline
would make reported dimensions depend on rounding. All types here are
immutable after construction and safe to share between workers; the
operations are pure functions of their arguments.

Conventions: instances, labels, and predictions are addressed by index into
the corresponding tuple of a `Problem`. The identifier objects themselves are
opaque except where a computation needs structure (numeric labels for the
fat-shattering dimension, for example).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

RationalLike = Union[Fraction, int, str]


class ValidationError(ValueError):
    """An input violates a structural invariant."""


class RealizabilityError(RuntimeError):
    """Feedback emptied the version space of a realizable-mode learner."""


class BudgetError(RuntimeError):
    """A configured work budget (memo table, expert pool) was exceeded."""


class ProtocolError(RuntimeError):
    """A learner/adversary game-protocol violation (wrong phase, exhausted depth)."""


def parse_rational(value: RationalLike) -> Fraction:
    """Parse an exact rational from an int, a Fraction, or a 'p/q' / decimal string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"cannot interpret {value!r} as a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, float):
        raise ValidationError(
            f"refusing float {value!r}: pass a 'p/q' or decimal string to stay exact"
        )
    raise ValidationError(f"cannot interpret {value!r} as a rational")


def format_rational(q: Fraction) -> str:
    """Canonical text form: 'p/q' in lowest terms, or just 'p' for integers."""
    return str(q)


@dataclass(frozen=True)
class Problem:
    """A finite online decision problem.

    `loss[y][z]` is the loss of prediction index `z` against label index `y`.
    `bound_c` is the effective loss bound (tightened to the max entry by
    `validate_problem`); `declared_bound` keeps whatever the constructor was
    given, for reporting.
    """

    instances: tuple
    labels: tuple
    predictions: tuple
    loss: tuple
    bound_c: Fraction
    declared_bound: Fraction

    def __post_init__(self):
        if len(self.loss) != len(self.labels):
            raise ValidationError(
                f"dimension mismatch: {len(self.loss)} loss rows for {len(self.labels)} labels"
            )
        for i, row in enumerate(self.loss):
            if len(row) != len(self.predictions):
                raise ValidationError(
                    f"dimension mismatch: loss row {i} has {len(row)} entries "
                    f"for {len(self.predictions)} predictions"
                )

    @property
    def num_instances(self) -> int:
        return len(self.instances)

    @property
    def num_labels(self) -> int:
        return len(self.labels)

    @property
    def num_predictions(self) -> int:
        return len(self.predictions)

    def loss_at(self, y: int, z: int) -> Fraction:
        return self.loss[y][z]


@dataclass(frozen=True)
class HypothesisClass:
    """A finite set of hypotheses, tabulated as prediction indices per instance.

    `table[h][x]` is the prediction index hypothesis `h` makes on instance
    index `x`. Duplicate rows are rejected: two hypotheses that agree
    everywhere would be indistinguishable to every computation downstream.
    """

    table: tuple

    def __post_init__(self):
        if not self.table:
            raise ValidationError("hypothesis class is empty")
        width = len(self.table[0])
        seen = {}
        for h, row in enumerate(self.table):
            if len(row) != width:
                raise ValidationError(f"hypothesis {h} has {len(row)} entries, expected {width}")
            if row in seen:
                raise ValidationError(f"duplicate hypothesis rows {seen[row]} and {h}")
            seen[row] = h

    @property
    def num_hypotheses(self) -> int:
        return len(self.table)

    def predict(self, h: int, x: int) -> int:
        return self.table[h][x]


@dataclass(frozen=True)
class VersionSpace:
    """An immutable subset of hypothesis indices, kept sorted for canonical keys."""

    members: tuple

    def __post_init__(self):
        prev = None
        for m in self.members:
            if not isinstance(m, int):
                raise ValidationError(f"hypothesis index {m!r} is not an int")
            if prev is not None and m <= prev:
                raise ValidationError("version space members must be strictly increasing")
            prev = m

    @classmethod
    def of(cls, members: Iterable[int]) -> "VersionSpace":
        return cls(tuple(sorted(set(members))))

    @classmethod
    def full(cls, num_hypotheses: int) -> "VersionSpace":
        return cls(tuple(range(num_hypotheses)))

    @property
    def nonempty(self) -> bool:
        return bool(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, h: int) -> bool:
        return h in self.members


@dataclass(frozen=True)
class Mixture:
    """A probability mixture over prediction indices: exact weights summing to 1."""

    weights: tuple

    def __post_init__(self):
        if not self.weights:
            raise ValidationError("mixture over an empty prediction space")
        total = Fraction(0)
        for w in self.weights:
            if not isinstance(w, Fraction):
                raise ValidationError(f"mixture weight {w!r} is not a Fraction")
            if w < 0:
                raise ValidationError(f"negative mixture weight {w}")
            total += w
        if total != 1:
            raise ValidationError(f"mixture weights sum to {total}, expected 1")

    @classmethod
    def of(cls, weights: Iterable[RationalLike]) -> "Mixture":
        return cls(tuple(parse_rational(w) for w in weights))

    @classmethod
    def dirac(cls, size: int, index: int) -> "Mixture":
        if not 0 <= index < size:
            raise ValidationError(f"dirac index {index} out of range for size {size}")
        return cls(tuple(Fraction(1) if j == index else Fraction(0) for j in range(size)))

    @classmethod
    def uniform(cls, size: int) -> "Mixture":
        if size <= 0:
            raise ValidationError("uniform mixture needs a positive size")
        return cls(tuple(Fraction(1, size) for _ in range(size)))

    def __len__(self) -> int:
        return len(self.weights)

    def support(self) -> tuple:
        return tuple(j for j, w in enumerate(self.weights) if w > 0)


@dataclass(frozen=True)
class Candidate:
    """A thresholded label (y, eps): 'loss against y is at most eps'."""

    label: int
    threshold: Fraction

    def __post_init__(self):
        if not isinstance(self.threshold, Fraction):
            raise ValidationError(f"candidate threshold {self.threshold!r} is not a Fraction")
        if self.threshold < 0:
            raise ValidationError(f"negative candidate threshold {self.threshold}")


@dataclass(frozen=True)
class ThresholdedExample:
    """One observed round: instance index, label index, optional loss threshold."""

    x: int
    y: int
    eps: Optional[Fraction] = None


def make_stream(items: Iterable) -> tuple:
    """Build a stream from (x, y) or (x, y, eps) tuples / ThresholdedExamples.

    Thresholds must be present on every element or on none; a mixed stream has
    no consistent interpretation (realizable vs. agnostic protocol).
    """
    out = []
    for item in items:
        if isinstance(item, ThresholdedExample):
            out.append(item)
        else:
            parts = tuple(item)
            if len(parts) == 2:
                out.append(ThresholdedExample(parts[0], parts[1]))
            elif len(parts) == 3:
                eps = None if parts[2] is None else parse_rational(parts[2])
                out.append(ThresholdedExample(parts[0], parts[1], eps))
            else:
                raise ValidationError(f"stream element {item!r} is not (x, y) or (x, y, eps)")
    with_eps = sum(1 for e in out if e.eps is not None)
    if with_eps not in (0, len(out)):
        raise ValidationError("thresholds must be present on every stream element or on none")
    return tuple(out)


def validate_stream(problem: Problem, stream: Sequence[ThresholdedExample]) -> tuple:
    """Check stream indices and thresholds against a problem; returns the stream."""
    for t, ex in enumerate(stream):
        if not 0 <= ex.x < problem.num_instances:
            raise ValidationError(f"round {t + 1}: instance index {ex.x} out of range")
        if not 0 <= ex.y < problem.num_labels:
            raise ValidationError(f"round {t + 1}: label index {ex.y} out of range")
        if ex.eps is not None and not 0 <= ex.eps <= problem.bound_c:
            raise ValidationError(
                f"round {t + 1}: threshold {ex.eps} outside [0, {problem.bound_c}]"
            )
    return tuple(stream)


def make_problem(instances, labels, predictions, loss, bound_c=None) -> Problem:
    """Assemble a Problem from raw entries, parsing rationals; no deep validation."""
    rows = tuple(tuple(parse_rational(v) for v in row) for row in loss)
    entries = [v for row in rows for v in row]
    max_entry = max(entries) if entries else Fraction(0)
    declared = max_entry if bound_c is None else parse_rational(bound_c)
    return Problem(
        instances=tuple(instances),
        labels=tuple(labels),
        predictions=tuple(predictions),
        loss=rows,
        bound_c=declared,
        declared_bound=declared,
    )


def validate_problem(problem: Problem, cls: HypothesisClass):
    """Validate a (problem, hypothesis class) pair; returns the checked pair.

    Checks: nonempty spaces, nonnegative losses, no loss above the declared
    bound, table indices in range, duplicate hypothesis rows. The effective
    `bound_c` is tightened to the maximum loss entry when the declared bound
    is larger; the declared bound is kept in `declared_bound` for reporting.
    """
    if problem.num_instances == 0:
        raise ValidationError("problem has no instances")
    if problem.num_labels == 0:
        raise ValidationError("problem has no labels")
    if problem.num_predictions == 0:
        raise ValidationError("problem has no predictions")
    max_entry = Fraction(0)
    for y, row in enumerate(problem.loss):
        for z, v in enumerate(row):
            if not isinstance(v, Fraction):
                raise ValidationError(f"loss[{y}][{z}] = {v!r} is not a Fraction")
            if v < 0:
                raise ValidationError(f"negative loss at [{y}][{z}]: {v}")
            if v > problem.declared_bound:
                raise ValidationError(
                    f"loss {v} at [{y}][{z}] exceeds declared bound {problem.declared_bound}"
                )
            if v > max_entry:
                max_entry = v
    seen = {}
    for h, row in enumerate(cls.table):
        if len(row) != problem.num_instances:
            raise ValidationError(
                f"hypothesis {h} covers {len(row)} instances, problem has {problem.num_instances}"
            )
        for x, z in enumerate(row):
            if not 0 <= z < problem.num_predictions:
                raise ValidationError(f"hypothesis {h} predicts out-of-range index {z} at x={x}")
        if row in seen:
            raise ValidationError(f"duplicate hypothesis rows {seen[row]} and {h}")
        seen[row] = h
    if max_entry < problem.bound_c:
        problem = replace(problem, bound_c=max_entry)
    return problem, cls


def expected_loss(problem: Problem, mixture: Mixture, y: int) -> Fraction:
    """Exact expected loss of a mixture against label index y."""
    row = problem.loss[y]
    if len(mixture.weights) != len(row):
        raise ValidationError(
            f"mixture has {len(mixture.weights)} entries, problem has {len(row)} predictions"
        )
    total = Fraction(0)
    for w, v in zip(mixture.weights, row):
        if w:
            total += w * v
    return total


def restrict(
    problem: Problem,
    cls: HypothesisClass,
    space: VersionSpace,
    x: int,
    cand: Candidate,
) -> VersionSpace:
    """Keep the hypotheses whose loss against the candidate label is within threshold.

    The result is a subset of the input and may be empty; callers that need a
    nonempty result (realizable-mode learners) must check.
    """
    if not 0 <= x < problem.num_instances:
        raise ValidationError(f"instance index {x} out of range")
    if not 0 <= cand.label < problem.num_labels:
        raise ValidationError(f"label index {cand.label} out of range")
    if cand.threshold > problem.bound_c:
        raise ValidationError(f"threshold {cand.threshold} exceeds loss bound {problem.bound_c}")
    row = problem.loss[cand.label]
    kept = tuple(h for h in space.members if row[cls.table[h][x]] <= cand.threshold)
    return VersionSpace(kept)
