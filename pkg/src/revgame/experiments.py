"""Instance generators and the empirical price-of-anarchy harness.

The named families below are the hand-built worst cases the theory is
tight on; the random generator produces seeded families for bound
validation campaigns. A campaign enumerates every equilibrium of every
instance, compares the worst one against the non-strategic optimum and
reports any bound violation with a full instance dump.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_CAP,
    GOOD,
    EXCELLENT,
    Instance,
    instance_to_dict,
    zero_profile,
)
from .equilibria import enumerate_pne
from .solvers import coverage_opt, greedy_quality_opt

QUALITY = "quality"
COVERAGE = "coverage"

NAMED_FAMILIES = (
    "two_pne_remark",
    "poa2_tight",
    "coverage_n",
    "budget_augment",
    "poa2_coverage_tight",
    "alpha_corner",
)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def gen_paper_instance(name: str, **params) -> Instance:
    """Build one of the named worst-case families.

    two_pne_remark(eps, variant): four agents, one proposal, alpha 3,
        budget 1, time 1/2; two skill groups around 1/4 and at 1/8. The
        default "minus" variant uses 1/4 - eps (the reading under which
        both described equilibria check out); "plus" uses 1/4 + eps.
    poa2_tight(): two agents, skills 0.4 / 0.6, budget = time = 1.
    coverage_n(n, eps): n agents, n proposals, everyone cheap (eps) on the
        first proposal and cost 1 elsewhere, unit slice, time 1.
    budget_augment(eps, beta): two agents, three proposals, both cheap on
        the first two and cost 1 on the third, slice beta, time 1.
    poa2_coverage_tight(k, eps): 3k-1 agents and proposals in two blocks;
        the large agent block is cheap on the small proposal block and
        priced out of more than one review elsewhere.
    alpha_corner(alpha, eps): one agent of skill 1/alpha, budget 1, time
        1 + eps.
    """
    if name == "two_pne_remark":
        eps = params.pop("eps", 1 / 28)
        variant = params.pop("variant", "minus")
        _require(not params, f"unexpected params {sorted(params)}")
        _require(0 < eps < 1 / 14, "eps must lie in (0, 1/14)")
        _require(variant in ("minus", "plus"), "variant must be minus or plus")
        base = 0.25 - eps if variant == "minus" else 0.25 + eps
        skills = np.array([[base], [base], [0.125], [0.125]])
        return Instance(skills=skills, budget=1.0, time_horizon=0.5,
                        alphabet=(0, 1, 3))

    if name == "poa2_tight":
        _require(not params, f"unexpected params {sorted(params)}")
        return Instance(skills=np.array([[0.4], [0.6]]), budget=1.0,
                        time_horizon=1.0, alphabet=(0, 1))

    if name == "coverage_n":
        n = int(params.pop("n"))
        eps = params.pop("eps", 1e-3)
        _require(not params, f"unexpected params {sorted(params)}")
        _require(n >= 2, "n must be at least 2")
        _require(0 < eps < 1 / n, "eps must lie in (0, 1/n)")
        skills = np.ones((n, n))
        skills[:, 0] = eps
        return Instance(skills=skills, budget=float(n), time_horizon=1.0,
                        alphabet=(0, 1))

    if name == "budget_augment":
        eps = params.pop("eps", 1e-3)
        beta = params.pop("beta", 1.0)
        _require(not params, f"unexpected params {sorted(params)}")
        _require(0 < eps < 0.5, "eps must lie in (0, 1/2)")
        _require(beta >= 1, "beta must be at least 1")
        skills = np.array([[eps, eps, 1.0], [eps, eps, 1.0]])
        return Instance(skills=skills, budget=3.0 * beta, time_horizon=1.0,
                        alphabet=(0, 1))

    if name == "poa2_coverage_tight":
        k = int(params.pop("k"))
        eps = params.pop("eps", 1e-3)
        _require(not params, f"unexpected params {sorted(params)}")
        _require(k >= 2, "k must be at least 2")
        _require(0 < eps < 1 / (k * (2 * k - 1)),
                 "eps must lie in (0, 1/(k(2k-1)))")
        size = 3 * k - 1
        skills = np.empty((size, size))
        skills[: 2 * k - 1, :k] = eps    # cheap block on the small side
        skills[: 2 * k - 1, k:] = 1.0
        skills[2 * k - 1:, :k] = 1.0
        skills[2 * k - 1:, k:] = 3.0
        return Instance(skills=skills, budget=float(size), time_horizon=1.0,
                        alphabet=(0, 1))

    if name == "alpha_corner":
        alpha = params.pop("alpha", 3)
        eps = params.pop("eps", 0.1)
        _require(not params, f"unexpected params {sorted(params)}")
        _require(alpha >= 2, "alpha must be at least 2")
        _require(eps > 0, "eps must be positive")
        return Instance(skills=np.array([[1.0 / alpha]]), budget=1.0,
                        time_horizon=1.0 + eps, alphabet=(0, 1, alpha))

    raise ValueError(f"unknown family {name!r}")


def known_equilibria(name: str, **params) -> list:
    """The equilibria each family was built to exhibit.

    For poa2_coverage_tight the returned profile is the worst equilibrium
    under the doubled budget (it is an equilibrium under the base budget
    too); the others are equilibria of the instance as generated.
    """
    instance = gen_paper_instance(name, **params)
    if name == "two_pne_remark":
        all_good = zero_profile(instance)
        all_good[:, 0] = GOOD
        split = zero_profile(instance)
        split[2, 0] = EXCELLENT
        split[3, 0] = EXCELLENT
        return [all_good, split]
    if name == "poa2_tight":
        q = zero_profile(instance)
        q[0, 0] = GOOD
        return [q]
    if name == "coverage_n":
        q = zero_profile(instance)
        q[:, 0] = GOOD
        return [q]
    if name == "budget_augment":
        q = zero_profile(instance)
        q[:, :2] = GOOD
        return [q]
    if name == "poa2_coverage_tight":
        k = int(params["k"])
        q = zero_profile(instance)
        q[: 2 * k - 1, :k] = GOOD
        return [q]
    if name == "alpha_corner":
        q = zero_profile(instance)
        q[0, 0] = GOOD
        return [q]
    raise ValueError(f"unknown family {name!r}")


def gen_random_instance(seed, n: int, m: int, alphabet=(0, 1),
                        skill_distribution=("uniform", 0.1, 1.0),
                        budget: float = 1.0,
                        time_horizon: float = 1.0) -> Instance:
    """Seeded random instance; identical seeds give identical instances."""
    rng = np.random.default_rng(seed)
    kind = skill_distribution[0]
    if kind == "uniform":
        lo, hi = skill_distribution[1], skill_distribution[2]
        _require(0 < lo <= hi, "uniform support must be positive")
        skills = rng.uniform(lo, hi, size=(n, m))
    elif kind == "lognormal":
        mu, sigma = skill_distribution[1], skill_distribution[2]
        _require(sigma >= 0, "sigma must be non-negative")
        skills = rng.lognormal(mu, sigma, size=(n, m))
    else:
        raise ValueError(f"unknown skill distribution {kind!r}")
    return Instance(skills=skills, budget=budget, time_horizon=time_horizon,
                    alphabet=alphabet)


@dataclass(frozen=True)
class PoAExperiment:
    """Optimum versus enumerated equilibria for one instance.

    ``worst_ratio`` is optimum over the worst equilibrium objective and is
    None when some equilibrium has objective zero (the degenerate case,
    counted separately rather than divided by). ``bound`` is the guarantee
    applicable to the scenario, with ``bound_additive`` its additive
    slack; ``bound_holds`` is the actual check. For three-level quality
    instances ``sharper_holds`` reports the tighter quarter-minus-alpha
    inequality whenever its preconditions are detected.
    """

    instance_id: str
    objective: str
    augmentation_factor: float
    opt_value: float
    pne_values: tuple
    worst_ratio: float | None
    degenerate: bool
    degenerate_count: int
    bound: float | None
    bound_additive: float
    bound_holds: bool
    opt_no_time_limit: float | None = None
    sharper_holds: bool | None = None

    def to_dict(self) -> dict:
        doc = {
            "instance_id": self.instance_id,
            "objective": self.objective,
            "augmentation_factor": self.augmentation_factor,
            "opt_value": self.opt_value,
            "pne_values": list(self.pne_values),
            "worst_ratio": self.worst_ratio,
            "degenerate": self.degenerate,
            "degenerate_count": self.degenerate_count,
            "bound": self.bound,
            "bound_additive": self.bound_additive,
            "bound_holds": self.bound_holds,
            "opt_no_time_limit": self.opt_no_time_limit,
            "sharper_holds": self.sharper_holds,
        }
        return doc


def measure_poa(instance: Instance, objective: str, k: float = 1.0,
                cap: int = DEFAULT_CAP,
                instance_id: str = "adhoc") -> PoAExperiment:
    """Enumerate equilibria under budget k*B and compare with the optimum.

    The optimum always uses the base budget; only the mechanism sees the
    augmented one. Quality instances must be single proposal.
    """
    if k < 1:
        raise ValueError("augmentation factor must be at least 1")
    tol = instance.tol
    reports = enumerate_pne(instance.with_budget(instance.budget * k), cap=cap)

    opt_no_limit = None
    sharper = None
    if objective == QUALITY:
        if instance.m != 1:
            raise ValueError("quality comparisons need a single proposal")
        opt = greedy_quality_opt(instance, enforce_time_horizon=True).value
        opt_no_limit = greedy_quality_opt(
            instance, enforce_time_horizon=False).value
        values = tuple(r.qual for r in reports)
    elif objective == COVERAGE:
        opt = coverage_opt(instance, cap=cap).value
        values = tuple(r.cov for r in reports)
    else:
        raise ValueError(f"unknown objective {objective!r}")

    worst = min(values) if values else None
    degenerate_count = sum(1 for v in values if v == 0)
    degenerate = worst == 0
    ratio = None
    if worst is not None and worst > 0:
        ratio = opt / worst

    bound = None
    additive = 0.0
    holds = True
    if objective == QUALITY and instance.levels == 2 and k == 1:
        bound = 2.0
        positive = [v for v in values if v > 0]
        holds = all(opt <= bound * v + tol for v in positive)
    elif objective == QUALITY and instance.levels == 3 and k == 1:
        alpha = instance.alpha
        bound = 4.0
        additive = 6.0 * alpha
        if values:
            x = min(values)
            holds = x >= (opt - additive) / bound - tol
            s = np.sort(instance.skills[:, 0])
            prefix = np.cumsum(instance.efforts[EXCELLENT] * s)
            i_star = int((prefix <= instance.beta + tol).sum())
            if x >= 2 and i_star >= 6:
                sharper = x >= opt / 4.0 - alpha / 4.0 - tol
    elif objective == COVERAGE and instance.levels == 2 and k == 2:
        bound = 3.0
        holds = all(v >= opt / bound - tol for v in values)

    return PoAExperiment(
        instance_id=instance_id,
        objective=objective,
        augmentation_factor=k,
        opt_value=opt,
        pne_values=values,
        worst_ratio=ratio,
        degenerate=degenerate,
        degenerate_count=degenerate_count,
        bound=bound,
        bound_additive=additive,
        bound_holds=holds,
        opt_no_time_limit=opt_no_limit,
        sharper_holds=sharper,
    )


# -- campaigns ---------------------------------------------------------------

def _sample(rng, value_or_range):
    if isinstance(value_or_range, (list, tuple)):
        lo, hi = value_or_range
        return float(rng.uniform(lo, hi))
    return float(value_or_range)


def _campaign_items(config: dict) -> list:
    """Expand the config into (instance_id, family, instance, objective, k)."""
    items = []
    for t, task in enumerate(config["tasks"]):
        family = task["family"]
        objective = task["objective"]
        k = float(task.get("k", 1))
        if family == "random":
            count = int(task["count"])
            seed = int(task.get("seed", 0))
            for i in range(count):
                rng = np.random.default_rng([seed, t, i])
                n = int(rng.integers(task.get("n_min", 1),
                                     task["n_max"] + 1))
                m = int(rng.integers(task.get("m_min", 1),
                                     task.get("m_max", 1) + 1))
                alphabet = tuple(task.get("alphabet", (0, 1)))
                choices = task.get("alpha_choices")
                if choices:
                    alphabet = (0, 1, int(rng.choice(choices)))
                instance = gen_random_instance(
                    seed=[seed, t, i, 1],
                    n=n, m=m, alphabet=alphabet,
                    skill_distribution=tuple(task.get(
                        "skill_distribution", ("uniform", 0.05, 1.0))),
                    budget=_sample(rng, task.get("budget", 1.0)),
                    time_horizon=_sample(rng, task.get("time_horizon", 1.0)),
                )
                items.append((f"{t:02d}-random-{i:05d}", family, instance,
                              objective, k))
        else:
            params = dict(task.get("params", {}))
            instance = gen_paper_instance(family, **params)
            tag = ",".join(f"{key}={params[key]}" for key in sorted(params))
            items.append((f"{t:02d}-{family}({tag})", family, instance,
                          objective, k))
    return items


def _run_item(args):
    instance_id, family, instance, objective, k, cap = args
    exp = measure_poa(instance, objective, k=k, cap=cap,
                      instance_id=instance_id)
    doc = exp.to_dict()
    doc["family"] = family
    doc["n"] = instance.n
    doc["m"] = instance.m
    doc["alphabet"] = "-".join(str(v) for v in instance.alphabet)
    dump = None
    if not exp.bound_holds:
        dump = instance_to_dict(instance)
    return doc, dump


def run_campaign(config: dict, jobs: int = 1) -> dict:
    """Run every configured experiment and aggregate the results.

    Violations carry a full instance dump so a failure reproduces from the
    report alone. The report is deterministic for a fixed config.
    """
    cap = int(config.get("cap", DEFAULT_CAP))
    items = _campaign_items(config)
    work = [item + (cap,) for item in items]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_item, work))
    else:
        outcomes = [_run_item(w) for w in work]

    results = []
    violations = []
    ratios = []
    degenerate_total = 0
    for (exp, dump), (iid, _, _, _, _) in zip(outcomes, items):
        results.append(exp)
        degenerate_total += exp["degenerate_count"]
        if exp["worst_ratio"] is not None:
            ratios.append(exp["worst_ratio"])
        if dump is not None:
            violations.append({"instance_id": iid, "experiment": exp,
                               "instance": dump})
    summary = {
        "experiments": len(results),
        "violations": len(violations),
        "degenerate_equilibria": degenerate_total,
        "max_ratio": max(ratios) if ratios else None,
    }
    return {
        "config": config,
        "summary": summary,
        "results": results,
        "violations": violations,
    }


def campaign_csv(report: dict) -> str:
    """Flat experiment table for the campaign report."""
    lines = ["instance_id,family,n,m,alphabet,k,opt,worst_pne,ratio,bound,holds"]
    for exp in report["results"]:
        worst = min(exp["pne_values"]) if exp["pne_values"] else ""
        lines.append(",".join(str(v) for v in (
            exp["instance_id"], exp["family"], exp["n"], exp["m"],
            exp["alphabet"], exp["augmentation_factor"], exp["opt_value"],
            worst, exp["worst_ratio"], exp["bound"], exp["bound_holds"])))
    return "\n".join(lines) + "\n"


def ratio_histogram_svg(report: dict, bins: int = 20) -> str:
    """Histogram of finite optimum-to-worst-equilibrium ratios, as SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from io import StringIO

    ratios = [exp["worst_ratio"] for exp in report["results"]
              if exp["worst_ratio"] is not None]
    with plt.rc_context({"svg.hashsalt": "revgame"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        if ratios:
            ax.hist(ratios, bins=bins, color="#4878d0", edgecolor="black")
        ax.set_xlabel("optimum / worst equilibrium")
        ax.set_ylabel("instances")
        ax.set_title("empirical price of anarchy")
        buf = StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
