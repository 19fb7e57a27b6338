"""Crowdsourced proposal reviewing as a game with proportional rewards.

A game instance has n agents and m proposals. Agent i reviewing proposal j
at quality level v spends effort f(v) * skills[i, j]. Each proposal holds
an equal slice beta = budget / m of the total budget, and that slice is
split among the proposal's reviewers in proportion to the effort of their
submitted reviews. A proposal nobody reviews pays nobody and keeps its
slice (the 0/0 share is defined as 0).

Quality levels are stored as small integer codes indexing the instance
alphabet: code 0 is always "no review", code 1 a good review and, when the
alphabet has three levels, code 2 an excellent review worth ``alpha`` good
ones. Strategy profiles are plain (n, m) integer arrays of codes. All
types are immutable after construction and every operation is a pure
function of its inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

NO_REVIEW = 0
GOOD = 1
EXCELLENT = 2

DEFAULT_TOL = 1e-9

#: default node budget for exhaustive searches; beyond it we refuse rather
#: than silently truncate or approximate.
DEFAULT_CAP = 10_000_000


class GameError(Exception):
    """Base class for domain errors raised by this package."""


class CapExceededError(GameError):
    """An exhaustive search would exceed the configured node cap."""


def _as_scalar(x):
    # keep integral values as int so objective sums stay exact integers
    f = float(x)
    return int(f) if f.is_integer() else f


@dataclass(frozen=True, eq=False)
class Instance:
    """A review game: agents, proposals, skills, budget and time limit.

    skills[i, j] is agent i's cost per unit of effort on proposal j (all
    entries strictly positive). ``alphabet`` lists the quality value of
    each code, either (0, 1) or (0, 1, alpha) with alpha >= 2. ``efforts``
    maps codes to work units and defaults to the alphabet values, i.e. the
    effort of a review equals its quality. Validation is eager: a bad
    instance never constructs.
    """

    skills: np.ndarray
    budget: float
    time_horizon: float
    alphabet: tuple = (0, 1)
    efforts: tuple | None = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        skills = np.array(self.skills, dtype=float)
        if skills.ndim != 2 or skills.size == 0:
            raise ValueError("skills must be a non-empty 2-d matrix")
        if not np.all(skills > 0):
            raise ValueError("all skills must be strictly positive")
        skills.flags.writeable = False
        object.__setattr__(self, "skills", skills)

        if not self.budget > 0:
            raise ValueError("budget must be positive")
        if not self.time_horizon > 0:
            raise ValueError("time horizon must be positive")

        alphabet = tuple(_as_scalar(v) for v in self.alphabet)
        if len(alphabet) not in (2, 3):
            raise ValueError("alphabet must have 2 or 3 levels")
        if alphabet[0] != 0:
            raise ValueError("quality 0 (no review) must be in the alphabet")
        if any(a >= b for a, b in zip(alphabet, alphabet[1:])):
            raise ValueError("alphabet must be strictly increasing")
        if len(alphabet) == 3 and alphabet[2] < 2:
            raise ValueError("alpha must be at least 2")
        object.__setattr__(self, "alphabet", alphabet)

        efforts = alphabet if self.efforts is None else tuple(
            _as_scalar(v) for v in self.efforts)
        if len(efforts) != len(alphabet):
            raise ValueError("efforts must map every alphabet code")
        if efforts[0] != 0:
            raise ValueError("a non-review takes zero effort")
        if any(a >= b for a, b in zip(efforts, efforts[1:])):
            raise ValueError("effort must be strictly increasing in quality")
        object.__setattr__(self, "efforts", efforts)

        if not self.tol >= 0:
            raise ValueError("tolerance must be non-negative")

    @property
    def n(self) -> int:
        return self.skills.shape[0]

    @property
    def m(self) -> int:
        return self.skills.shape[1]

    @property
    def beta(self) -> float:
        """Per-proposal budget slice B / m."""
        return self.budget / self.m

    @property
    def alpha(self):
        """Quality value of an excellent review, or None for {0, 1}."""
        return self.alphabet[2] if len(self.alphabet) == 3 else None

    @property
    def levels(self) -> int:
        return len(self.alphabet)

    @property
    def effort_levels(self) -> np.ndarray:
        return np.array(self.efforts, dtype=float)

    def with_budget(self, budget: float) -> "Instance":
        return replace(self, budget=budget)

    def leq(self, a: float, b: float) -> bool:
        """a <= b under this instance's absolute comparison tolerance."""
        return a <= b + self.tol


def zero_profile(instance: Instance) -> np.ndarray:
    return np.zeros((instance.n, instance.m), dtype=np.int64)


def validate_profile(instance: Instance, profile) -> np.ndarray:
    """Check shape and codes, returning the profile as an int array."""
    q = np.asarray(profile)
    if q.shape != (instance.n, instance.m):
        raise ValueError(
            f"profile shape {q.shape} does not match instance "
            f"({instance.n}, {instance.m})")
    if not np.issubdtype(q.dtype, np.integer):
        if not np.all(q == np.floor(q)):
            raise ValueError("profile entries must be integer quality codes")
        q = q.astype(np.int64)
    if q.size and (q.min() < 0 or q.max() >= instance.levels):
        raise ValueError("profile contains codes outside the alphabet")
    return q.astype(np.int64, copy=False)


def effort_costs(instance: Instance, profile) -> np.ndarray:
    """Per-agent total effort cost: sum_j f(q_ij) * s_ij."""
    q = validate_profile(instance, profile)
    f = instance.effort_levels[q]
    return (f * instance.skills).sum(axis=1)


def effort_cost(instance: Instance, profile, agent: int) -> float:
    if not 0 <= agent < instance.n:
        raise IndexError(f"agent index {agent} out of range")
    return float(effort_costs(instance, profile)[agent])


def is_max_effort_feasible(instance: Instance, profile) -> np.ndarray:
    """Boolean per agent: total effort cost fits in the time horizon."""
    costs = effort_costs(instance, profile)
    return costs <= instance.time_horizon + instance.tol


@dataclass(frozen=True, eq=False)
class PaymentResult:
    """Per-agent, per-proposal payments plus the induced utilities."""

    payments: np.ndarray      # (n, m)
    agent_totals: np.ndarray  # (n,)
    costs: np.ndarray         # (n,)
    utilities: np.ndarray     # (n,)


def proportional_payments(instance: Instance, profile) -> PaymentResult:
    """Split each proposal's budget slice in proportion to review effort.

    Proposals with no reviews pay nothing. Utilities are payments minus
    effort costs.
    """
    q = validate_profile(instance, profile)
    f = instance.effort_levels[q]
    denom = f.sum(axis=0)
    # a zero denominator implies the whole column is zero effort
    unit = instance.beta / np.where(denom > 0, denom, 1.0)
    payments = f * unit
    totals = payments.sum(axis=1)
    costs = (f * instance.skills).sum(axis=1)
    for a in (payments, totals, costs):
        a.flags.writeable = False
    utilities = totals - costs
    utilities.flags.writeable = False
    return PaymentResult(payments, totals, costs, utilities)


def agent_utility(instance: Instance, profile, agent: int) -> float:
    if not 0 <= agent < instance.n:
        raise IndexError(f"agent index {agent} out of range")
    return float(proportional_payments(instance, profile).utilities[agent])


def quality_objective(instance: Instance, profile):
    """Total review quality; excellent entries contribute alpha each."""
    q = validate_profile(instance, profile)
    counts = np.bincount(q.ravel(), minlength=instance.levels)
    return sum(v * int(c) for v, c in zip(instance.alphabet, counts))


def coverage_objective(profile) -> int:
    """Number of proposals with at least one review."""
    q = np.asarray(profile)
    return int((q >= GOOD).any(axis=0).sum())


def is_ns_feasible(instance: Instance, profile) -> bool:
    """Non-strategic feasibility: reviews bought at cost fit the budget.

    Every proposal's total review cost must stay within beta and every
    agent must respect the time horizon. This is the regime optimal
    benchmarks are computed in.
    """
    q = validate_profile(instance, profile)
    f = instance.effort_levels[q]
    per_proposal = (f * instance.skills).sum(axis=0)
    if not np.all(per_proposal <= instance.beta + instance.tol):
        return False
    return bool(is_max_effort_feasible(instance, q).all())


# -- serialization ----------------------------------------------------------

def instance_to_dict(instance: Instance) -> dict:
    doc = {
        "agents": instance.n,
        "proposals": instance.m,
        "skills": [float(v) for v in instance.skills.ravel()],
        "budget": float(instance.budget),
        "time_horizon": float(instance.time_horizon),
        "alphabet": list(instance.alphabet),
    }
    if instance.alpha is not None:
        doc["alpha"] = instance.alpha
    return doc


def instance_from_dict(doc: dict) -> Instance:
    n = int(doc["agents"])
    m = int(doc["proposals"])
    flat = doc["skills"]
    if len(flat) != n * m:
        raise ValueError("skills length does not match agents * proposals")
    skills = np.array(flat, dtype=float).reshape(n, m)
    alphabet = tuple(doc["alphabet"])
    if "alpha" in doc:
        if len(alphabet) != 3 or _as_scalar(doc["alpha"]) != _as_scalar(alphabet[2]):
            raise ValueError("alpha does not match the alphabet")
    return Instance(
        skills=skills,
        budget=float(doc["budget"]),
        time_horizon=float(doc["time_horizon"]),
        alphabet=alphabet,
    )


def save_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def profile_to_lists(profile) -> list:
    return [[int(v) for v in row] for row in np.asarray(profile)]


def profile_from_lists(instance: Instance, rows: Sequence[Sequence[int]]) -> np.ndarray:
    return validate_profile(instance, np.array(rows, dtype=np.int64))
