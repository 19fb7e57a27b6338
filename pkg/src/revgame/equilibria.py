"""Pure Nash equilibria of the proportional review game.

Provides exhaustive best responses, equilibrium verification, brute-force
enumeration of all equilibria, a constructive equilibrium for the
single-proposal three-level game, the exact potential of the two-level
game and potential-guided best-response dynamics.

A deviation with zero utility gain is never taken: agents are inert under
indifference, so verification only rejects a profile when some agent can
*strictly* improve (beyond the instance tolerance).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CapExceededError,
    DEFAULT_CAP,
    GameError,
    GOOD,
    EXCELLENT,
    Instance,
    coverage_objective,
    is_max_effort_feasible,
    quality_objective,
    validate_profile,
    zero_profile,
)


class DynamicsDefectError(GameError):
    """Best-response dynamics exceeded its safety cap; implementation defect."""


@dataclass(frozen=True)
class Deviation:
    """A profitable unilateral row change for one agent."""

    agent: int
    new_row: tuple
    utility_gain: float


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    profile: np.ndarray
    is_pne: bool
    witness: Deviation | None
    qual: float
    cov: int
    potential: float | None

    def to_dict(self) -> dict:
        return {
            "profile": [[int(v) for v in row] for row in self.profile],
            "is_pne": self.is_pne,
            "witness": None if self.witness is None else {
                "agent": self.witness.agent,
                "new_row": list(self.witness.new_row),
                "utility_gain": self.witness.utility_gain,
            },
            "qual": self.qual,
            "cov": self.cov,
            "potential": self.potential,
        }


def _row_sets(instance: Instance, cap: int):
    """Per-agent feasible rows under the time horizon, in lex order.

    Returns (rows_i, efforts_i, costs_i) triples where rows_i is an
    (R_i, m) code matrix, efforts_i the matching effort values and costs_i
    the total effort cost of each row for that agent.
    """
    levels, m = instance.levels, instance.m
    if levels ** m > cap:
        raise CapExceededError(
            f"row space {levels}^{m} exceeds cap {cap}")
    rows = np.array(
        list(itertools.product(range(levels), repeat=m)), dtype=np.int64)
    efforts = instance.effort_levels[rows]
    limit = instance.time_horizon + instance.tol
    out = []
    for i in range(instance.n):
        costs = efforts @ instance.skills[i]
        keep = costs <= limit
        out.append((rows[keep], efforts[keep], costs[keep]))
    return out


def best_response(instance: Instance, profile, agent: int) -> Deviation | None:
    """Exhaustive best response of one agent against the fixed opponents.

    Returns None when the agent's current row is already utility-maximal
    among her feasible rows; otherwise the maximal-gain deviation (ties
    broken toward the lexicographically smallest row).
    """
    q = validate_profile(instance, profile)
    if not 0 <= agent < instance.n:
        raise IndexError(f"agent index {agent} out of range")
    f_levels = instance.effort_levels
    f_all = f_levels[q]
    others = f_all.sum(axis=0) - f_all[agent]
    s_i = instance.skills[agent]
    beta, tol = instance.beta, instance.tol
    limit = instance.time_horizon + tol

    def utility(row_f: np.ndarray) -> float:
        denom = others + row_f
        shares = row_f / np.where(denom > 0, denom, 1.0)
        return float(beta * shares.sum() - (row_f * s_i).sum())

    current = utility(f_all[agent])
    best_gain = tol
    best_row = None
    for codes in itertools.product(range(instance.levels), repeat=instance.m):
        row_f = f_levels[list(codes)]
        if (row_f * s_i).sum() > limit:
            continue
        gain = utility(row_f) - current
        if gain > best_gain:
            best_gain = gain
            best_row = codes
    if best_row is None:
        return None
    return Deviation(agent=agent, new_row=best_row, utility_gain=best_gain)


def _report(instance: Instance, q: np.ndarray,
            witness: Deviation | None) -> EquilibriumReport:
    pot = potential(instance, q) if instance.levels == 2 else None
    frozen = q.copy()
    frozen.flags.writeable = False
    return EquilibriumReport(
        profile=frozen,
        is_pne=witness is None,
        witness=witness,
        qual=quality_objective(instance, q),
        cov=coverage_objective(q),
        potential=pot,
    )


def verify_pne(instance: Instance, profile) -> EquilibriumReport:
    """Check a feasible profile for unilateral improving deviations.

    The witness, when present, is a maximal-gain deviation over all agents
    (first agent in index order on ties). Infeasible profiles are rejected.
    """
    q = validate_profile(instance, profile)
    if not is_max_effort_feasible(instance, q).all():
        raise ValueError("profile violates the maximum effort constraint")
    witness = None
    for i in range(instance.n):
        dev = best_response(instance, q, i)
        if dev is not None and (
                witness is None or dev.utility_gain > witness.utility_gain):
            witness = dev
    return _report(instance, q, witness)


def enumerate_pne(instance: Instance, cap: int = DEFAULT_CAP) -> list:
    """All max-effort-feasible pure Nash equilibria, in lexicographic order.

    The search space is the product of the per-agent feasible row sets;
    when that product exceeds the cap the call refuses outright rather
    than truncating.
    """
    per_agent = _row_sets(instance, cap)
    sizes = [r.shape[0] for r, _, _ in per_agent]
    total = math.prod(sizes)
    if total > cap:
        raise CapExceededError(
            f"{total} feasible profiles exceed cap {cap}")

    n, m = instance.n, instance.m
    beta, tol = instance.beta, instance.tol
    strides = [math.prod(sizes[i + 1:]) for i in range(n)]
    tiny = 1e-300  # denominators are zero only where numerators are zero

    found = []
    chunk = 1 << 15
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        row_idx = [(idx // strides[i]) % sizes[i] for i in range(n)]
        f_sel = [per_agent[i][1][row_idx[i]] for i in range(n)]
        denom = np.zeros((idx.size, m))
        for f in f_sel:
            denom += f
        alive = np.ones(idx.size, dtype=bool)
        for i in range(n):
            base = denom - f_sel[i]
            shares = f_sel[i] / np.maximum(base + f_sel[i], tiny)
            u_cur = beta * shares.sum(axis=1) - per_agent[i][2][row_idx[i]]
            rows_f, costs = per_agent[i][1], per_agent[i][2]
            for r in range(sizes[i]):
                shares = rows_f[r] / np.maximum(base + rows_f[r], tiny)
                u_alt = beta * shares.sum(axis=1) - costs[r]
                alive &= u_alt <= u_cur + tol
                if not alive.any():
                    break
            if not alive.any():
                break
        for p in idx[alive]:
            q = np.empty((n, m), dtype=np.int64)
            for i in range(n):
                q[i] = per_agent[i][0][(p // strides[i]) % sizes[i]]
            report = verify_pne(instance, q)
            if report.is_pne:
                found.append(report)
    return found


# -- single proposal, three quality levels ----------------------------------

@dataclass(frozen=True)
class FixpointState:
    """Partition of the agents reached by the constructive procedure.

    Sets hold original agent indices; ``order`` lists the original indices
    in ascending skill order (stable on ties). ``history`` records the
    partition after every refinement step, the initial state included.
    """

    excellent: frozenset
    good: frozenset
    idle: frozenset
    order: tuple
    history: tuple


def fixpoint_construct(instance: Instance):
    """Constructive equilibrium for a single proposal.

    Seeds the largest prefix of skill-sorted agents whose good reviews are
    individually worthwhile, then repeatedly refines: the cheapest good
    reviewer upgrades to excellent when that strictly improves her utility
    and fits the time horizon, after which up to alpha - 1 of the most
    expensive good reviewers whose utilities turned negative drop out.
    Stops at the first step that changes nothing and returns the reached
    partition together with its strategy profile (original indexing).
    """
    if instance.m != 1:
        raise ValueError("fixpoint construction needs a single proposal")
    s_col = instance.skills[:, 0]
    order = tuple(int(i) for i in np.argsort(s_col, kind="stable"))
    s = s_col[list(order)]
    n = instance.n
    beta, tol, horizon = instance.beta, instance.tol, instance.time_horizon
    f_good = instance.efforts[GOOD]
    f_exc = instance.efforts[EXCELLENT] if instance.levels == 3 else None

    # largest prefix where a good review is affordable for everyone in it
    cutoff = 0
    for c in range(1, n + 1):
        cost = f_good * s[c - 1]
        if cost <= horizon + tol and cost <= beta / c + tol:
            cutoff = c
        else:
            break

    good = list(range(cutoff))       # positions in sorted order
    excellent: list = []
    idle = list(range(cutoff, n))

    def snapshot():
        return (
            frozenset(order[p] for p in excellent),
            frozenset(order[p] for p in good),
            frozenset(order[p] for p in idle),
        )

    history = [snapshot()]
    # one upgrade grows the reward denominator by f_exc - f_good, so at most
    # that many good-sized slots can turn negative before it shrinks back
    removal_cap = 0 if f_exc is None else int(math.ceil(f_exc / f_good - 1))

    while f_exc is not None and good:
        head = good[0]
        if f_exc * s[head] > horizon + tol:
            # the cheapest good reviewer cannot afford excellent, so nobody can
            break
        denom = f_exc * len(excellent) + f_good * len(good)
        u_good = beta * f_good / denom - f_good * s[head]
        denom_up = denom - f_good + f_exc
        u_exc = beta * f_exc / denom_up - f_exc * s[head]
        if not u_exc > u_good + tol:
            # not worthwhile for the cheapest, hence for no good reviewer
            break
        excellent.append(good.pop(0))
        removed = 0
        while removed < removal_cap and good:
            denom = f_exc * len(excellent) + f_good * len(good)
            tail = good[-1]
            if beta * f_good / denom - f_good * s[tail] < -tol:
                idle.append(good.pop())
                removed += 1
            else:
                break
        history.append(snapshot())

    q = zero_profile(instance)
    for p in excellent:
        q[order[p], 0] = EXCELLENT
    for p in good:
        q[order[p], 0] = GOOD
    q.flags.writeable = False
    e_set, g_set, z_set = history[-1]
    state = FixpointState(
        excellent=e_set, good=g_set, idle=z_set,
        order=order, history=tuple(history))
    return state, q


# -- two quality levels: exact potential and dynamics ------------------------

def potential(instance: Instance, profile) -> float:
    """Exact potential of the two-level game.

    Each proposal contributes beta * H_k minus the effort cost of its k
    reviews, H_k the k-th harmonic number; an unreviewed proposal
    contributes 0. Any unilateral change moves this function by exactly
    the deviator's utility change.
    """
    if instance.levels != 2:
        raise ValueError("the potential is defined for the {0, 1} alphabet")
    q = validate_profile(instance, profile)
    reviewed = q == GOOD
    counts = reviewed.sum(axis=0)
    harmonics = np.concatenate(
        ([0.0], np.cumsum(1.0 / np.arange(1, instance.n + 1))))
    f_good = instance.efforts[GOOD]
    return float(instance.beta * harmonics[counts].sum()
                 - f_good * instance.skills[reviewed].sum())


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    agent: int
    new_row: tuple
    utility_gain: float
    potential_value: float


def trace_to_csv(trace) -> str:
    lines = ["iteration,agent,move,delta_u,potential"]
    for step in trace:
        move = "".join(str(c) for c in step.new_row)
        lines.append(
            f"{step.iteration},{step.agent},{move},"
            f"{step.utility_gain!r},{step.potential_value!r}")
    return "\n".join(lines) + "\n"


def best_response_dynamics(instance: Instance, start_profile,
                           schedule: str = "round_robin",
                           seed: int | None = None,
                           max_moves: int | None = None):
    """Iterate single-agent best responses until no one can improve.

    Termination is guaranteed by the exact potential: every improving move
    strictly raises it over a finite profile space. The safety cap (the
    profile-space size by default) turns a non-terminating run into a
    loud defect instead of a hang. Returns the final equilibrium report
    and the trace of improving moves.
    """
    if instance.levels != 2:
        raise ValueError("dynamics are defined for the {0, 1} alphabet")
    q = validate_profile(instance, start_profile).copy()
    if not is_max_effort_feasible(instance, q).all():
        raise ValueError("start profile violates the maximum effort constraint")
    n = instance.n
    cap = max_moves if max_moves is not None else instance.levels ** (n * instance.m)
    if schedule == "round_robin":
        agent_stream = itertools.cycle(range(n))
    elif schedule == "random":
        rng = np.random.default_rng(seed)
        agent_stream = iter(lambda: int(rng.integers(n)), None)
    else:
        raise ValueError(f"unknown schedule {schedule!r}")

    trace = []
    stable: set = set()
    moves = 0
    for agent in agent_stream:
        if len(stable) == n:
            break
        dev = best_response(instance, q, agent)
        if dev is None:
            stable.add(agent)
            continue
        moves += 1
        if moves > cap:
            raise DynamicsDefectError(
                f"exceeded {cap} improving moves; potential argument broken")
        q[agent] = dev.new_row
        stable = {agent}
        trace.append(TraceStep(
            iteration=moves,
            agent=agent,
            new_row=dev.new_row,
            utility_gain=dev.utility_gain,
            potential_value=potential(instance, q),
        ))
    return verify_pne(instance, q), trace
