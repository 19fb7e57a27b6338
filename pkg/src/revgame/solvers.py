"""Non-strategic optimal benchmarks.

Reviews are bought directly at cost here, so the binding constraints are
the per-proposal budget slice and the per-agent time horizon rather than
any incentive condition. The module pairs each fast solver with an
independent exhaustive oracle at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    CapExceededError,
    DEFAULT_CAP,
    GOOD,
    EXCELLENT,
    Instance,
    zero_profile,
)


@dataclass(frozen=True)
class OptimalQualityResult:
    """Best single-proposal review purchase within the budget slice."""

    excellent: frozenset
    good: frozenset
    value: float
    cost: float
    respects_time_horizon: bool

    def to_dict(self) -> dict:
        return {
            "excellent": sorted(self.excellent),
            "good": sorted(self.good),
            "value": self.value,
            "cost": self.cost,
            "respects_time_horizon": self.respects_time_horizon,
        }


def _single_proposal(instance: Instance) -> np.ndarray:
    if instance.m != 1:
        raise ValueError("quality optimum is defined for a single proposal")
    return instance.skills[:, 0]


def _quality_result(instance: Instance, exc, good) -> OptimalQualityResult:
    s = instance.skills[:, 0]
    f = instance.efforts
    a = instance.alphabet
    cost = float(sum(f[EXCELLENT] * s[i] for i in exc)
                 + sum(f[GOOD] * s[i] for i in good))
    value = (a[EXCELLENT] if len(a) == 3 else 0) * len(exc) + a[GOOD] * len(good)
    limit = instance.time_horizon + instance.tol
    ok = all(f[EXCELLENT] * s[i] <= limit for i in exc) and all(
        f[GOOD] * s[i] <= limit for i in good)
    return OptimalQualityResult(
        excellent=frozenset(int(i) for i in exc),
        good=frozenset(int(i) for i in good),
        value=value,
        cost=cost,
        respects_time_horizon=ok,
    )


def greedy_quality_opt(instance: Instance,
                       enforce_time_horizon: bool = True) -> OptimalQualityResult:
    """Maximum total quality purchasable within the budget slice.

    Walks agents by ascending skill, buying excellent reviews while they
    fit, then fills the leftover budget with good reviews. Value-per-cost
    is identical across quality levels of one agent, which is what makes
    the greedy exact (cheapest agents first can never hurt).
    """
    s = _single_proposal(instance)
    order = np.argsort(s, kind="stable")
    beta, tol = instance.beta, instance.tol
    limit = instance.time_horizon + tol
    f = instance.efforts
    has_exc = instance.levels == 3

    spent = 0.0
    exc = []
    pos = 0
    if has_exc:
        while pos < instance.n:
            i = int(order[pos])
            cost = f[EXCELLENT] * s[i]
            if enforce_time_horizon and cost > limit:
                break
            if spent + cost > beta + tol:
                break
            exc.append(i)
            spent += cost
            pos += 1
    good = []
    while pos < instance.n:
        i = int(order[pos])
        cost = f[GOOD] * s[i]
        if enforce_time_horizon and cost > limit:
            break
        if spent + cost > beta + tol:
            break
        good.append(i)
        spent += cost
        pos += 1
    return _quality_result(instance, exc, good)


@lru_cache(maxsize=32)
def _code_table(levels: int, n: int) -> np.ndarray:
    codes = np.array(
        np.meshgrid(*[np.arange(levels)] * n, indexing="ij"), dtype=np.int8)
    return codes.reshape(n, -1).T  # (levels**n, n), lexicographic


def brute_quality_opt(instance: Instance,
                      enforce_time_horizon: bool = True,
                      cap: int = DEFAULT_CAP) -> OptimalQualityResult:
    """Independent oracle: scan every assignment of levels to agents."""
    s = _single_proposal(instance)
    total = instance.levels ** instance.n
    if total > cap:
        raise CapExceededError(f"{total} assignments exceed cap {cap}")
    codes = _code_table(instance.levels, instance.n)
    efforts = instance.effort_levels[codes]          # (total, n)
    costs_per_agent = efforts * s
    total_cost = costs_per_agent.sum(axis=1)
    feasible = total_cost <= instance.beta + instance.tol
    if enforce_time_horizon:
        limit = instance.time_horizon + instance.tol
        feasible &= (costs_per_agent <= limit).all(axis=1)
    values = np.array(instance.alphabet, dtype=float)[codes].sum(axis=1)
    values = np.where(feasible, values, -1.0)
    best = int(values.argmax())
    assign = codes[best]
    exc = [i for i in range(instance.n) if assign[i] == EXCELLENT]
    good = [i for i in range(instance.n) if assign[i] == GOOD]
    return _quality_result(instance, exc, good)


def opt_upper_bound(instance: Instance) -> float:
    """Closed-form cap on the no-time-limit optimum.

    With i* the longest ascending-skill prefix whose excellent reviews all
    fit in the budget slice together, no purchase is worth more than
    alpha * (i* + 1); i* = 0 degenerates to a bound of alpha.
    """
    if instance.levels != 3:
        raise ValueError("the bound needs the three-level alphabet")
    s = np.sort(_single_proposal(instance))
    f_exc = instance.efforts[EXCELLENT]
    prefix = np.cumsum(f_exc * s)
    i_star = int((prefix <= instance.beta + instance.tol).sum())
    return instance.alphabet[EXCELLENT] * (i_star + 1)


# -- coverage ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoverageOptResult:
    assignment: np.ndarray
    covered: frozenset
    value: int

    def to_dict(self) -> dict:
        return {
            "assignment": [[int(v) for v in row] for row in self.assignment],
            "covered": sorted(self.covered),
            "value": self.value,
        }


def coverage_opt(instance: Instance, cap: int = DEFAULT_CAP) -> CoverageOptResult:
    """Exact maximum number of proposals coverable at cost.

    A covered proposal needs one review whose cost fits the budget slice
    and whose writer still has time for it, so extra reviews never help
    and the search branches over proposal-to-agent assignments. Depth
    first with the uncovered proposal of fewest options expanded first, an
    admissible covered-plus-coverable bound, and agents collapsed when
    their remaining time and skill footprint are identical. Refuses past
    the node cap instead of approximating.
    """
    if instance.levels != 2:
        raise ValueError("coverage optimum is defined for the {0, 1} alphabet")
    n, m = instance.n, instance.m
    s = instance.skills
    f_good = instance.efforts[GOOD]
    beta, tol = instance.beta, instance.tol
    horizon = instance.time_horizon

    best_value = -1
    best_assign: dict = {}
    nodes = 0

    def options(j: int, remaining) -> list:
        cost = f_good * s[:, j]
        return [i for i in range(n)
                if cost[i] <= beta + tol and cost[i] <= remaining[i] + tol]

    def dfs(undecided: list, remaining, chosen: dict):
        nonlocal best_value, best_assign, nodes
        nodes += 1
        if nodes > cap:
            raise CapExceededError(f"coverage search exceeded {cap} nodes")
        coverable = {j: options(j, remaining) for j in undecided}
        coverable = {j: opts for j, opts in coverable.items() if opts}
        if len(chosen) + len(coverable) <= best_value:
            return
        if not coverable:
            if len(chosen) > best_value:
                best_value = len(chosen)
                best_assign = dict(chosen)
            return
        j = min(coverable, key=lambda jj: (len(coverable[jj]), jj))
        rest = [jj for jj in undecided if jj != j]
        seen = set()
        opts = sorted(coverable[j], key=lambda i: (f_good * s[i, j], i))
        for i in opts:
            key = (remaining[i], s[i, j]) + tuple(s[i, jj] for jj in rest)
            if key in seen:
                continue
            seen.add(key)
            before = remaining[i]
            remaining[i] = before - f_good * s[i, j]
            chosen[j] = i
            dfs(rest, remaining, chosen)
            del chosen[j]
            remaining[i] = before
        dfs(rest, remaining, chosen)  # leave j uncovered

    dfs(list(range(m)), [horizon] * n, {})

    assignment = zero_profile(instance)
    for j, i in best_assign.items():
        assignment[i, j] = GOOD
    assignment.flags.writeable = False
    return CoverageOptResult(
        assignment=assignment,
        covered=frozenset(best_assign),
        value=best_value,
    )


def greedy_set_construction(candidates, targets, assignment) -> tuple:
    """Small agent subset whose given reviews cover every target proposal.

    Repeatedly picks the candidate covering the most still-uncovered
    targets (smallest index on ties) until all targets are covered; the
    result never needs more picks than there are targets. Raises when the
    candidates cannot cover the targets at all.
    """
    targets = frozenset(int(j) for j in targets)
    pool = sorted(int(i) for i in candidates)
    q = np.asarray(assignment)
    reviews = {i: frozenset(j for j in targets if q[i, j] >= GOOD)
               for i in pool}
    chosen = []
    covered: set = set()
    while covered != targets:
        best_i, best_gain = None, 0
        for i in pool:
            if i in chosen:
                continue
            gain = len(reviews[i] - covered)
            if gain > best_gain:
                best_i, best_gain = i, gain
        if best_i is None:
            missing = sorted(targets - covered)
            raise ValueError(f"candidates cannot cover proposals {missing}")
        chosen.append(best_i)
        covered |= reviews[best_i]
    return tuple(chosen)
