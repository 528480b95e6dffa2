"""Shattering dimensions of finite hypothesis classes, with replayable certificates.

The central notion: a version space V is shatterable to depth d >= 1 at margin
gamma when some instance x lets an adversary keep the game going, meaning

    min over mixtures mu of  max over qualifying (y, eps) of
        expected_loss(mu, y) - eps   reaches gamma
    (strictly above 0 in the strict gamma = 0 variant),

where (y, eps) qualifies when the restricted child space {h in V :
loss(y, h(x)) <= eps} is itself shatterable to depth d - 1. The restriction is
a step function of eps, so thresholds only need to be enumerated at the loss
values actually realized on V; the inner min-max is a finite game solved
exactly by `solve_min_max`. For a fixed label the qualifying row with the
smallest threshold dominates the others pointwise (same coefficients, larger
offset), so each LP is solved over one row per label while certificates record
the full qualifying candidate list; both have the same value and minimizer.

Depth is capped at |V| - 1: against the Dirac mixture on any surviving
hypothesis's prediction, a qualifying candidate needs a loss strictly below
(margin gamma below, in the non-strict case) the played one, so every branch
excludes the played hypothesis. The same argument caps the strict variant.

`smdim` is the dimension under an arbitrary loss matrix, `ldim_k` the zero-loss
branching dimension for {0,1} losses (k+1 labels per node), `seqfat` the
sequential fat-shattering dimension on a numeric grid, and `msdim` the
set-valued-label dimension, computed by delegating to `smdim` on the 0/1
membership loss (the expected membership loss of a mixture is exactly the mass
it puts outside the label set). `msdim_direct` recomputes it from the
definition without threshold enumeration, as an independent cross-check.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .core import (
    BudgetError,
    Candidate,
    HypothesisClass,
    Problem,
    RationalLike,
    ValidationError,
    VersionSpace,
    format_rational,
    parse_rational,
    validate_problem,
)
from .game import AffineRow, solve_min_max
from .instances import canonical_json

MEMO_CAP_ENV = "SMDIM_MEMO_CAP"
DEFAULT_MEMO_CAP = 200_000


@dataclass(frozen=True)
class GammaValue:
    """A shattering margin: either a positive rational, or the strict-zero variant."""

    gamma: Fraction
    strict: bool = False

    def __post_init__(self):
        if not isinstance(self.gamma, Fraction):
            raise ValidationError(f"gamma {self.gamma!r} is not a Fraction")
        if self.gamma < 0:
            raise ValidationError(f"negative gamma {self.gamma}")
        if self.strict and self.gamma != 0:
            raise ValidationError("strict mode is only defined for gamma = 0")
        if not self.strict and self.gamma == 0:
            raise ValidationError("gamma = 0 requires the strict variant")

    @classmethod
    def of(cls, value: Union["GammaValue", RationalLike]) -> "GammaValue":
        if isinstance(value, GammaValue):
            return value
        return cls(parse_rational(value))

    @classmethod
    def strict_zero(cls) -> "GammaValue":
        return cls(Fraction(0), strict=True)

    def describe(self) -> str:
        return "0 (strict)" if self.strict else format_rational(self.gamma)


@dataclass(frozen=True)
class CertificateNode:
    """One level of a shattering tree: the instance to play and the candidate fan-out."""

    space: VersionSpace
    depth: int
    instance: int
    value: Fraction
    candidates: tuple  # ((Candidate, VersionSpace), ...)


@dataclass(frozen=True)
class ShatteringCertificate:
    """A replayable witness that `root` is shatterable to `depth` at margin `gamma`.

    `nodes` maps (members, depth) to the CertificateNode chosen there; every
    child of a recorded node at depth >= 2 is itself recorded, so walking
    best responses from the root always stays inside the certificate.
    """

    gamma: GammaValue
    root: VersionSpace
    depth: int
    nodes: dict

    def node(self, space: VersionSpace, depth: int) -> CertificateNode:
        key = (space.members, depth)
        if key not in self.nodes:
            raise ValidationError(f"certificate has no node for space {space.members} depth {depth}")
        return self.nodes[key]

    def to_json(self) -> str:
        entries = []
        for (members, depth) in sorted(self.nodes):
            node = self.nodes[(members, depth)]
            entries.append(
                {
                    "space": list(members),
                    "depth": depth,
                    "x": node.instance,
                    "value": format_rational(node.value),
                    "candidates": [
                        {
                            "y": cand.label,
                            "eps": format_rational(cand.threshold),
                            "child": list(child.members),
                        }
                        for cand, child in node.candidates
                    ],
                }
            )
        doc = {
            "gamma": format_rational(self.gamma.gamma),
            "strict": self.gamma.strict,
            "depth": self.depth,
            "root": list(self.root.members),
            "nodes": entries,
        }
        return canonical_json(doc)


class DimensionEngine:
    """Memoized shattering computations for one (problem, class, gamma) context.

    The memo table is keyed by (version-space members, depth) and is shared by
    every query against this engine, so learners that probe many sub-spaces of
    the same class reuse all prior work. Lookups are idempotent pure values:
    concurrent readers are safe, and a duplicated insert computes the same
    entry. The number of distinct version spaces visited is capped
    (`memo_cap`, or the SMDIM_MEMO_CAP environment variable) and exceeding the
    cap raises BudgetError rather than thrashing.
    """

    def __init__(
        self,
        problem: Problem,
        cls: HypothesisClass,
        gamma: Union[GammaValue, RationalLike],
        memo_cap: Optional[int] = None,
    ):
        problem, cls = validate_problem(problem, cls)
        self.problem = problem
        self.cls = cls
        self.gamma = GammaValue.of(gamma)
        if memo_cap is None:
            env = os.environ.get(MEMO_CAP_ENV)
            memo_cap = int(env) if env else DEFAULT_MEMO_CAP
        if memo_cap <= 0:
            raise ValidationError(f"memo cap must be positive, got {memo_cap}")
        self.memo_cap = memo_cap
        self._loss = problem.loss
        self._table = cls.table
        self._num_x = problem.num_instances
        self._num_y = problem.num_labels
        self._memo = {}
        self._nodes = {}
        self._spaces = set()

    # -- public API ---------------------------------------------------------

    def smdim(self, space: VersionSpace) -> int:
        self._check_space(space)
        return self.dim_members(space.members)

    def shatterable(self, space: VersionSpace, depth: int) -> bool:
        self._check_space(space)
        if depth < 0:
            raise ValidationError(f"negative depth {depth}")
        return self._shatter(space.members, depth)

    def certificate(self, space: VersionSpace) -> ShatteringCertificate:
        """Certificate for the full dimension of `space` (depth 0 gives no nodes)."""
        self._check_space(space)
        depth = self.dim_members(space.members)
        nodes = {}
        stack = [(space.members, depth)]
        while stack:
            members, d = stack.pop()
            if d < 1 or (members, d) in nodes:
                continue
            node = self._nodes[(members, d)]
            nodes[(members, d)] = node
            for _, child in node.candidates:
                stack.append((child.members, d - 1))
        return ShatteringCertificate(gamma=self.gamma, root=space, depth=depth, nodes=nodes)

    def candidates(self, space: VersionSpace, x: int):
        """Every (Candidate, child) pair at the realized distinct thresholds."""
        self._check_space(space)
        if not 0 <= x < self._num_x:
            raise ValidationError(f"instance index {x} out of range")
        return tuple(
            (Candidate(y, eps), VersionSpace(child))
            for y, eps, child in self.candidate_rows(space.members, x)
        )

    # -- low-level API (raw member tuples, shared with the learners) ---------

    def dim_members(self, members) -> int:
        """Dimension of the version space given as a sorted member tuple."""
        if not members:
            raise ValidationError("dimension of an empty version space is undefined")
        depth = 0
        while depth < len(members) - 1 and self._shatter(members, depth + 1):
            depth += 1
        return depth

    def candidate_rows(self, members, x):
        """(label, threshold, child member tuple) at each realized distinct loss."""
        out = []
        table = self._table
        for y in range(self._num_y):
            row = self._loss[y]
            realized = sorted({row[table[h][x]] for h in members})
            for eps in realized:
                child = tuple(h for h in members if row[table[h][x]] <= eps)
                out.append((y, eps, child))
        return out

    # -- internals ----------------------------------------------------------

    def _check_space(self, space: VersionSpace):
        if not isinstance(space, VersionSpace):
            raise ValidationError(f"expected a VersionSpace, got {space!r}")
        if space.members and space.members[-1] >= self.cls.num_hypotheses:
            raise ValidationError(f"hypothesis index {space.members[-1]} out of range")

    def _passes(self, value: Fraction) -> bool:
        if self.gamma.strict:
            return value > 0
        return value >= self.gamma.gamma

    def _shatter(self, members, depth) -> bool:
        if depth == 0:
            return bool(members)
        if depth > len(members) - 1:
            return False
        key = (members, depth)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if members not in self._spaces:
            if len(self._spaces) >= self.memo_cap:
                raise BudgetError(
                    f"visited more than {self.memo_cap} version spaces; "
                    f"raise {MEMO_CAP_ENV} or pass a larger memo_cap"
                )
            self._spaces.add(members)
        result = False
        for x in range(self._num_x):
            qualifying = [
                (y, eps, child)
                for y, eps, child in self.candidate_rows(members, x)
                if self._shatter(child, depth - 1)
            ]
            if not qualifying:
                continue
            sol = solve_min_max(self._dominant_rows(qualifying))
            if self._passes(sol.value):
                self._nodes[key] = CertificateNode(
                    space=VersionSpace(members),
                    depth=depth,
                    instance=x,
                    value=sol.value,
                    candidates=tuple(
                        (Candidate(y, eps), VersionSpace(child)) for y, eps, child in qualifying
                    ),
                )
                result = True
                break
        self._memo[key] = result
        return result

    def _dominant_rows(self, qualifying):
        """One row per label at its smallest qualifying threshold."""
        best = {}
        for y, eps, _ in qualifying:
            if y not in best or eps < best[y]:
                best[y] = eps
        return tuple(AffineRow(self._loss[y], -eps) for y, eps in sorted(best.items()))


def smdim(
    problem: Problem,
    cls: HypothesisClass,
    space: VersionSpace,
    gamma: Union[GammaValue, RationalLike],
    memo_cap: Optional[int] = None,
) -> int:
    """Sequential minimax dimension of `space` at margin `gamma`."""
    return DimensionEngine(problem, cls, gamma, memo_cap).smdim(space)


def ldim_k(problem: Problem, cls: HypothesisClass, space: VersionSpace, k: int = 1) -> int:
    """Zero-loss branching dimension: depth d+1 needs an instance with k+1
    distinct labels whose zero-loss sub-spaces all have depth d.

    Requires a {0,1} loss matrix in which no prediction has zero loss against
    more than k labels (multiclass and size-<=k list losses satisfy this);
    otherwise the recursion has no finite value and the input is rejected.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    _check_binary_loss(problem)
    for z in range(problem.num_predictions):
        zeros = sum(1 for y in range(problem.num_labels) if problem.loss[y][z] == 0)
        if zeros > k:
            raise ValidationError(
                f"prediction {z} has zero loss against {zeros} labels; "
                f"the depth-{k + 1} branching recursion does not terminate"
            )
    if not space.members:
        raise ValidationError("dimension of an empty version space is undefined")
    table = cls.table
    loss = problem.loss
    memo = {}

    def shatter(members, depth):
        if depth == 0:
            return bool(members)
        if depth > len(members) - 1:
            return False
        key = (members, depth)
        hit = memo.get(key)
        if hit is not None:
            return hit
        result = False
        for x in range(problem.num_instances):
            fanout = 0
            for y in range(problem.num_labels):
                child = tuple(h for h in members if loss[y][table[h][x]] == 0)
                if child and shatter(child, depth - 1):
                    fanout += 1
                    if fanout > k:
                        break
            if fanout > k:
                result = True
                break
        memo[key] = result
        return result

    depth = 0
    while depth < len(space.members) - 1 and shatter(space.members, depth + 1):
        depth += 1
    return depth


def seqfat(
    problem: Problem,
    cls: HypothesisClass,
    space: VersionSpace,
    gamma: RationalLike,
) -> int:
    """Sequential fat-shattering dimension at width gamma on a numeric grid.

    Needs Y = Z (a regression grid); witnesses range over the grid itself.
    Depth d+1 needs an instance x and witness s with both {h : h(x) >= s+gamma}
    and {h : h(x) <= s-gamma} of depth d.
    """
    gamma = parse_rational(gamma)
    if gamma <= 0:
        raise ValidationError(f"seqfat needs gamma > 0, got {gamma}")
    if problem.labels != problem.predictions:
        raise ValidationError("seqfat needs a regression grid with Y = Z")
    try:
        values = tuple(parse_rational(v) for v in problem.predictions)
    except ValidationError as exc:
        raise ValidationError(f"seqfat needs numeric labels: {exc}") from exc
    if not space.members:
        raise ValidationError("dimension of an empty version space is undefined")
    table = cls.table
    memo = {}

    def shatter(members, depth):
        if depth == 0:
            return bool(members)
        if depth > len(members) - 1:
            return False
        key = (members, depth)
        hit = memo.get(key)
        if hit is not None:
            return hit
        result = False
        for x in range(problem.num_instances):
            for s in values:
                upper = tuple(h for h in members if values[table[h][x]] >= s + gamma)
                if not upper:
                    continue
                lower = tuple(h for h in members if values[table[h][x]] <= s - gamma)
                if not lower:
                    continue
                if shatter(upper, depth - 1) and shatter(lower, depth - 1):
                    result = True
                    break
            if result:
                break
        memo[key] = result
        return result

    depth = 0
    while depth < len(space.members) - 1 and shatter(space.members, depth + 1):
        depth += 1
    return depth


def msdim(
    problem: Problem,
    cls: HypothesisClass,
    space: VersionSpace,
    gamma: Union[GammaValue, RationalLike],
    memo_cap: Optional[int] = None,
) -> int:
    """Set-valued-label dimension at margin gamma, via the minimax recursion.

    For the 0/1 membership loss the expected loss of a mixture against a label
    set is exactly the mass placed outside the set, so the general minimax
    dimension on the tabulated matrix computes this dimension directly.
    """
    _check_binary_loss(problem)
    return DimensionEngine(problem, cls, gamma, memo_cap).smdim(space)


def msdim_direct(
    problem: Problem,
    cls: HypothesisClass,
    space: VersionSpace,
    gamma: Union[GammaValue, RationalLike],
) -> int:
    """Set-valued-label dimension recomputed from its definition.

    Depth d+1 needs an instance x such that every mixture gives some label set
    y with mass >= gamma outside y (> 0 in strict mode) whose member child
    {h : loss(y, h(x)) = 0} has depth d. Independent of the threshold
    enumeration used by `msdim`; used to cross-check it.
    """
    gv = GammaValue.of(gamma)
    _check_binary_loss(problem)
    if not space.members:
        raise ValidationError("dimension of an empty version space is undefined")
    table = cls.table
    loss = problem.loss
    memo = {}

    def passes(value):
        return value > 0 if gv.strict else value >= gv.gamma

    def shatter(members, depth):
        if depth == 0:
            return bool(members)
        if depth > len(members) - 1:
            return False
        key = (members, depth)
        hit = memo.get(key)
        if hit is not None:
            return hit
        result = False
        for x in range(problem.num_instances):
            rows = []
            for y in range(problem.num_labels):
                child = tuple(h for h in members if loss[y][table[h][x]] == 0)
                if child and shatter(child, depth - 1):
                    rows.append(AffineRow(loss[y], Fraction(0)))
            if rows and passes(solve_min_max(rows).value):
                result = True
                break
        memo[key] = result
        return result

    depth = 0
    while depth < len(space.members) - 1 and shatter(space.members, depth + 1):
        depth += 1
    return depth


def _check_binary_loss(problem: Problem):
    for y, row in enumerate(problem.loss):
        for z, v in enumerate(row):
            if v != 0 and v != 1:
                raise ValidationError(f"loss[{y}][{z}] = {v} is not in {{0, 1}}")
