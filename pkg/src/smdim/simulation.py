"""Game harness: run a learner against a stream or adversary and account regret.

The default mode is exact: per-round expected losses are rationals computed
from the played mixtures, so regret statements are equalities and
inequalities over Fractions, not float estimates. A monte-carlo mode samples
prediction draws for the same transcript and reports mean and standard error,
for eyeballing only.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Optional, Sequence, Union

from .core import (
    HypothesisClass,
    Mixture,
    Problem,
    ProtocolError,
    RealizabilityError,
    ThresholdedExample,
    ValidationError,
    expected_loss,
    format_rational,
    make_stream,
    validate_stream,
)
from .instances import encode_identifier


@dataclass(frozen=True)
class RoundRecord:
    """One round: 1-based index, instance, label, optional threshold, play."""

    index: int
    x: int
    y: int
    eps: Optional[Fraction]
    mixture: Mixture
    expected: Fraction


@dataclass(frozen=True)
class RegretReport:
    rounds: tuple
    cumulative: Fraction
    hindsight_index: int
    hindsight_loss: Fraction
    regret: Fraction
    mode: str
    seed: Optional[int] = None
    trials: Optional[int] = None
    mc_mean: Optional[float] = None
    mc_stderr: Optional[float] = None

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    def per_round_expected(self) -> tuple:
        return tuple(r.expected for r in self.rounds)

    def to_doc(self, problem: Problem) -> dict:
        doc = {
            "mode": self.mode,
            "rounds": [
                {
                    "round": r.index,
                    "instance": encode_identifier(problem.instances[r.x]),
                    "label": encode_identifier(problem.labels[r.y]),
                    "eps": None if r.eps is None else format_rational(r.eps),
                    "mixture": [format_rational(w) for w in r.mixture.weights],
                    "expected_loss": format_rational(r.expected),
                }
                for r in self.rounds
            ],
            "cumulative_expected_loss": format_rational(self.cumulative),
            "hindsight_hypothesis": self.hindsight_index,
            "hindsight_loss": format_rational(self.hindsight_loss),
            "regret": format_rational(self.regret),
        }
        if self.mode == "monte-carlo":
            doc["seed"] = self.seed
            doc["trials"] = self.trials
            doc["mc_mean"] = self.mc_mean
            doc["mc_stderr"] = self.mc_stderr
        return doc


def _cell(identifier) -> str:
    encoded = encode_identifier(identifier)
    if isinstance(encoded, str):
        return encoded
    return json.dumps(encoded, separators=(",", ":"))


TRANSCRIPT_COLUMNS = ("round", "instance", "label", "eps", "mixture", "expected_loss")


def transcript_rows(problem: Problem, report: RegretReport) -> list:
    """CSV rows (header first) for the transcript; mixtures semicolon-joined."""
    rows = [list(TRANSCRIPT_COLUMNS)]
    for r in report.rounds:
        rows.append(
            [
                str(r.index),
                _cell(problem.instances[r.x]),
                _cell(problem.labels[r.y]),
                "" if r.eps is None else format_rational(r.eps),
                ";".join(format_rational(w) for w in r.mixture.weights),
                format_rational(r.expected),
            ]
        )
    return rows


def best_in_hindsight(
    problem: Problem, cls: HypothesisClass, stream: Sequence
) -> tuple:
    """(index, loss) of the cumulative-loss-minimizing hypothesis (lowest index wins)."""
    totals = [Fraction(0)] * cls.num_hypotheses
    for item in stream:
        x, y = (item.x, item.y) if isinstance(item, ThresholdedExample) else (item[0], item[1])
        row = problem.loss[y]
        for h in range(cls.num_hypotheses):
            totals[h] += row[cls.table[h][x]]
    best = 0
    for h in range(1, cls.num_hypotheses):
        if totals[h] < totals[best]:
            best = h
    return best, totals[best]


def run_game(
    problem: Problem,
    cls: HypothesisClass,
    learner,
    source,
    rounds: Optional[int] = None,
    mode: str = "exact",
    seed: int = 0,
    trials: int = 1000,
) -> RegretReport:
    """Run `learner` against `source` (a stream or an adversary object).

    A stream is a sequence of (x, y[, eps]) or ThresholdedExample; an
    adversary is anything with next_instance() and observe_mixture(mixture).
    Rounds defaults to the stream length (mandatory for adversaries).
    Realizability and protocol errors are re-raised with the 1-based round.
    """
    if mode not in ("exact", "monte-carlo"):
        raise ValidationError(f"mode must be 'exact' or 'monte-carlo', got {mode!r}")
    is_stream = isinstance(source, (tuple, list))
    if is_stream:
        stream = make_stream(source)
        validate_stream(problem, stream)
        if rounds is None:
            rounds = len(stream)
        if rounds > len(stream):
            raise ValidationError(f"asked for {rounds} rounds but the stream has {len(stream)}")
    elif rounds is None:
        raise ValidationError("rounds is required when playing an adversary")
    if rounds < 0:
        raise ValidationError(f"rounds must be >= 0, got {rounds}")

    records = []
    for t in range(1, rounds + 1):
        try:
            if is_stream:
                example = stream[t - 1]
                x = example.x
                mixture = learner.predict(x)
                y, eps = example.y, example.eps
            else:
                x = source.next_instance()
                mixture = learner.predict(x)
                y, eps = source.observe_mixture(mixture)
            value = expected_loss(problem, mixture, y)
            learner.update(x, y, eps)
        except (RealizabilityError, ProtocolError) as exc:
            raise type(exc)(f"round {t}: {exc}") from exc
        records.append(RoundRecord(t, x, y, eps, mixture, value))

    cumulative = sum((r.expected for r in records), Fraction(0))
    hindsight_index, hindsight_loss = best_in_hindsight(
        problem, cls, [(r.x, r.y) for r in records]
    )
    regret = cumulative - hindsight_loss
    if mode == "exact":
        return RegretReport(
            rounds=tuple(records),
            cumulative=cumulative,
            hindsight_index=hindsight_index,
            hindsight_loss=hindsight_loss,
            regret=regret,
            mode="exact",
        )
    mean, stderr = _sample_losses(problem, records, seed, trials)
    return RegretReport(
        rounds=tuple(records),
        cumulative=cumulative,
        hindsight_index=hindsight_index,
        hindsight_loss=hindsight_loss,
        regret=regret,
        mode="monte-carlo",
        seed=seed,
        trials=trials,
        mc_mean=mean,
        mc_stderr=stderr,
    )


def _sample_losses(problem: Problem, records, seed: int, trials: int):
    if trials < 2:
        raise ValidationError(f"monte-carlo needs at least 2 trials, got {trials}")
    rng = random.Random(seed)
    cutoffs = []
    for r in records:
        acc = 0.0
        cdf = []
        for w in r.mixture.weights:
            acc += float(w)
            cdf.append(acc)
        cdf[-1] = 1.0
        cutoffs.append((cdf, [float(v) for v in problem.loss[r.y]]))
    totals = []
    for _ in range(trials):
        total = 0.0
        for cdf, losses in cutoffs:
            u = rng.random()
            for z, cut in enumerate(cdf):
                if u <= cut:
                    total += losses[z]
                    break
        totals.append(total)
    mean = math.fsum(totals) / trials
    var = math.fsum((v - mean) ** 2 for v in totals) / (trials - 1)
    return mean, math.sqrt(var / trials)


SIGN_ENUM_CAP = 12


def exact_expectation_over_signs(
    problem: Problem,
    cls: HypothesisClass,
    make_stream_for_signs: Callable[[tuple], Iterable],
    learner_factory: Callable[[], object],
    rounds: int,
    cap: int = SIGN_ENUM_CAP,
) -> Fraction:
    """Average regret over all 2^rounds sign streams, exactly.

    Each sign vector in {+1,-1}^rounds is mapped to a stream by
    `make_stream_for_signs`, played against a fresh learner, and the exact
    expected regrets are averaged. Capped because the cost doubles per round.
    """
    if rounds < 0:
        raise ValidationError(f"rounds must be >= 0, got {rounds}")
    if rounds > cap:
        raise ValidationError(f"sign enumeration over 2^{rounds} streams exceeds the cap of {cap}")
    total = Fraction(0)
    for signs in product((1, -1), repeat=rounds):
        stream = make_stream_for_signs(signs)
        report = run_game(problem, cls, learner_factory(), list(stream))
        total += report.regret
    return total / Fraction(2**rounds)
