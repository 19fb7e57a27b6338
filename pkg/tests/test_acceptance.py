"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (run with -s to see them all) and
asserts the criterion as stated. Criterion 3 asserts an existence claim
that has genuine counterexamples (see test_equilibria's
test_no_equilibrium_corner_is_detected for a minimal one); it is
implemented faithfully and expected to fail with a reproducible dump
rather than being weakened.
"""

import numpy as np
import pytest

import revgame as rg
from revgame.equilibria import _row_sets


def _line(num: int, ok: bool, text: str) -> None:
    print(f"\nACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'}: {text}")


def test_c01_potential_exactness():
    rng = np.random.default_rng(101)
    checks = 0
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        inst = rg.Instance(
            skills=rng.uniform(0.05, 1.0, (n, m)),
            budget=float(rng.uniform(0.5, 3.0)),
            time_horizon=float(rng.uniform(0.5, 2.0)))
        for _ in range(105):
            q = rng.integers(0, 2, size=(n, m))
            agent = int(rng.integers(n))
            q2 = np.array(q)
            q2[agent] = rng.integers(0, 2, size=m)
            d_phi = rg.potential(inst, q2) - rg.potential(inst, q)
            d_u = (rg.proportional_payments(inst, q2).utilities[agent]
                   - rg.proportional_payments(inst, q).utilities[agent])
            worst = max(worst, abs(d_phi - d_u))
            checks += 1
    ok = checks >= 100_000 and worst <= 1e-9
    _line(1, ok, f"exact potential, {checks} moves, max |dPhi - du| = {worst:.3e}")
    assert ok


def _random_feasible_start(rng, inst):
    rows, _, _ = zip(*_row_sets(inst, rg.DEFAULT_CAP))
    q = np.stack([r[rng.integers(len(r))] for r in rows])
    return q


def test_c02_dynamics_reach_equilibrium():
    rng = np.random.default_rng(102)
    failures = 0
    for i in range(500):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 5))
        inst = rg.Instance(
            skills=rng.uniform(0.05, 1.0, (n, m)),
            budget=float(rng.uniform(0.5, 3.0)),
            time_horizon=float(rng.uniform(0.3, 1.5)))
        start = _random_feasible_start(rng, inst)
        schedule = "round_robin" if i % 2 == 0 else "random"
        report, trace = rg.best_response_dynamics(
            inst, start, schedule=schedule, seed=i)
        potentials = [s.potential_value for s in trace]
        if not report.is_pne or any(
                a >= b for a, b in zip(potentials, potentials[1:])):
            failures += 1
    ok = failures == 0
    _line(2, ok, f"dynamics converged on 500 two-level games, {failures} failures")
    assert ok


def test_c03_fixpoint_equilibrium_existence():
    rng = np.random.default_rng(103)
    failures = []
    missed = []
    for _ in range(500):
        n = int(rng.integers(1, 9))
        inst = rg.Instance(
            skills=rng.uniform(0.05, 1.0, (n, 1)),
            budget=float(rng.uniform(0.5, 2.5)),
            time_horizon=float(rng.uniform(0.3, 2.0)),
            alphabet=(0, 1, int(rng.choice([2, 3, 4]))))
        _, profile = rg.fixpoint_construct(inst)
        if not rg.verify_pne(inst, profile).is_pne:
            if rg.enumerate_pne(inst):
                missed.append(inst)  # a PNE exists: implementation defect
            else:
                failures.append(inst)  # no PNE exists at all
    ok = not failures and not missed
    detail = (f"{len(failures)} equilibrium-free instances, "
              f"{len(missed)} construction misses")
    _line(3, ok, f"single-proposal existence on 500 instances, {detail}")
    assert not missed, "construction missed an existing equilibrium"
    assert ok, (
        "pure equilibria do not always exist in the three-level game; "
        "first counterexample skills="
        f"{failures[0].skills.ravel() if failures else None}, "
        f"budget={failures[0].budget if failures else None} "
        "(see notes on the lone-reviewer downgrade cycle)")


def test_c04_greedy_matches_brute():
    rng = np.random.default_rng(104)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        levels = int(rng.choice([2, 3]))
        alphabet = (0, 1) if levels == 2 else (0, 1, int(rng.choice([2, 3, 4])))
        inst = rg.Instance(
            skills=rng.uniform(0.05, 1.0, (n, 1)),
            budget=float(rng.uniform(0.3, 3.0)),
            time_horizon=float(rng.uniform(0.2, 2.0)),
            alphabet=alphabet)
        for enforce in (True, False):
            g = rg.greedy_quality_opt(inst, enforce_time_horizon=enforce)
            b = rg.brute_quality_opt(inst, enforce_time_horizon=enforce)
            if g.value != b.value:
                mismatches += 1
    ok = mismatches == 0
    _line(4, ok, f"greedy optimum exact on 1000 instances x2, {mismatches} mismatches")
    assert ok


def test_c05_three_level_quality_bound():
    config = {
        "tasks": [{
            "family": "random", "objective": "quality", "k": 1, "count": 500,
            "seed": 105, "n_max": 6, "m_max": 1, "alpha_choices": [2, 3],
            "skill_distribution": ["uniform", 0.05, 1.0],
            "budget": [0.5, 2.5], "time_horizon": [0.3, 2.0],
        }],
    }
    report = rg.run_campaign(config)
    violations = report["summary"]["violations"]
    sharper = [e["sharper_holds"] for e in report["results"]
               if e["sharper_holds"] is not None]
    ok = violations == 0
    _line(5, ok, f"quality >= (opt_T - 6a)/4 on 500 instances, "
                 f"{violations} violations, {len(sharper)} sharper-case logs")
    assert ok


def test_c06_two_level_quality_poa_is_two():
    config = {
        "tasks": [{
            "family": "random", "objective": "quality", "k": 1, "count": 500,
            "seed": 106, "n_max": 8, "m_max": 1, "alphabet": [0, 1],
            "skill_distribution": ["uniform", 0.05, 1.0],
            "budget": [0.5, 2.5], "time_horizon": [0.3, 2.0],
        }],
    }
    report = rg.run_campaign(config)
    violations = report["summary"]["violations"]
    degenerate = report["summary"]["degenerate_equilibria"]

    tight = rg.measure_poa(rg.gen_paper_instance("poa2_tight"), "quality")
    tight_ok = (tight.opt_value == 2 and set(tight.pne_values) == {1}
                and tight.worst_ratio == 2.0)
    ok = violations == 0 and tight_ok
    _line(6, ok, f"two-level ratio <= 2 on 500 instances ({violations} violations, "
                 f"{degenerate} degenerate kept aside); tight family ratio "
                 f"{tight.worst_ratio}")
    assert ok


def test_c07_coverage_poa_grows_with_n():
    ok = True
    details = []
    for n in range(2, 7):
        inst = rg.gen_paper_instance("coverage_n", n=n, eps=1e-3)
        reports = rg.enumerate_pne(inst)
        opt = rg.coverage_opt(inst).value
        good = (len(reports) == 1 and reports[0].cov == 1 and opt == n)
        ok = ok and good
        details.append(f"n={n}:{'ok' if good else 'BAD'}")
    _line(7, ok, "coverage family has one equilibrium covering 1 of n "
                 f"({', '.join(details)})")
    assert ok


def test_c08_budget_augmentation_cannot_reach_optimum():
    ok = True
    details = []
    for beta in (1.0, 10.0, 100.0):
        inst = rg.gen_paper_instance("budget_augment", eps=1e-3, beta=beta)
        reports = rg.enumerate_pne(inst)
        opt = rg.coverage_opt(inst).value
        good = (len(reports) >= 1 and {r.cov for r in reports} == {2}
                and opt == 3)
        ok = ok and good
        details.append(f"beta={beta:g}:{'ok' if good else 'BAD'}")
    _line(8, ok, f"equilibria cover 2 of 3 at any slice ({', '.join(details)})")
    assert ok


def test_c09_doubled_budget_coverage_bound():
    config = {
        "tasks": [{
            "family": "random", "objective": "coverage", "k": 2, "count": 200,
            "seed": 109, "n_max": 4, "m_max": 4, "alphabet": [0, 1],
            "skill_distribution": ["uniform", 0.05, 1.2],
            "budget": [0.5, 3.0], "time_horizon": [0.3, 1.5],
        }],
    }
    report = rg.run_campaign(config)
    violations = report["summary"]["violations"]

    ratios = {}
    exp2 = rg.measure_poa(
        rg.gen_paper_instance("poa2_coverage_tight", k=2), "coverage", k=2)
    ratios[2] = exp2.worst_ratio
    tight_ok = exp2.worst_ratio == pytest.approx(2.5) and exp2.bound_holds
    for k in (3, 4):
        # full enumeration is past the cap here; the built worst equilibrium
        # is verified directly against the exact optimum
        inst = rg.gen_paper_instance("poa2_coverage_tight", k=k)
        (worst,) = rg.known_equilibria("poa2_coverage_tight", k=k)
        doubled = inst.with_budget(2 * inst.budget)
        is_pne = rg.verify_pne(doubled, worst).is_pne
        opt = rg.coverage_opt(inst).value
        ratios[k] = opt / rg.coverage_objective(worst)
        tight_ok = tight_ok and is_pne and ratios[k] == pytest.approx(
            (3 * k - 1) / k)
    ok = violations == 0 and tight_ok
    _line(9, ok, f"doubled-budget coverage bound, {violations} violations; "
                 f"tight ratios {ratios[2]:.3f}, {ratios[3]:.3f}, {ratios[4]:.3f}")
    assert ok


def test_c10_two_equilibria_with_different_quality():
    inst = rg.gen_paper_instance("two_pne_remark", eps=1 / 28)
    reports = rg.enumerate_pne(inst)
    profiles = {tuple(r.profile.ravel()) for r in reports}
    all_good, split = rg.known_equilibria("two_pne_remark", eps=1 / 28)
    ok = (tuple(all_good.ravel()) in profiles
          and tuple(split.ravel()) in profiles)
    quals = sorted(r.qual for r in reports)
    _line(10, ok, f"enumeration holds both described equilibria, qualities {quals}")
    assert ok


def _synthetic_round(tmp_path):
    # aggregate shape of a real funding round: 541 reviewers, 712 proposals,
    # 357 excellent + 4832 good + 3971 filtered reviews
    grades = (["excellent"] * 357 + ["good"] * 4832 + ["filtered_out"] * 3971)
    path = tmp_path / "round.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("reviewer_id,proposal_id,grade\n")
        for i, grade in enumerate(grades):
            fh.write(f"ca{i % 541:04d},p{i % 712:04d},{grade}\n")
    return path


def test_c11_data_path_round_trip(tmp_path):
    path = _synthetic_round(tmp_path)
    records = rg.ingest_reviews(path)
    assert len(records) == 9160  # 541 and 712 are coprime: no collisions
    budget = 320_000.0
    summary = rg.compute_payouts(records, budget, alpha=3)

    beta = budget / 712
    by_proposal = {}
    for rec in records:
        by_proposal.setdefault(rec.proposal_id, []).append(rec)

    conservation_ok = True
    ratio_ok = True
    for recs in by_proposal.values():
        sub = rg.compute_payouts(recs, beta, alpha=3)
        paid = sum(sub.payouts.values())
        graded = [r for r in recs if r.grade != "filtered_out"]
        if graded:
            conservation_ok &= abs(paid - beta) <= 1e-6
        else:
            conservation_ok &= paid == 0.0
        exc = next((r for r in recs if r.grade == "excellent"), None)
        good = next((r for r in recs if r.grade == "good"), None)
        if exc is not None and good is not None:
            ratio_ok &= sub.payouts[exc.reviewer_id] == 3 * sub.payouts[good.reviewer_id]

    stats_ok = (summary.n_proposals == 712
                and summary.n_reviewers == 541
                and summary.grade_counts["excellent"] == 357
                and summary.grade_counts["good"] == 4832
                and summary.grade_counts["filtered_out"] == 3971
                and summary.reviews_per_proposal_mean == pytest.approx(5189 / 712)
                and summary.quality_per_proposal_mean == pytest.approx(
                    (3 * 357 + 4832) / 712))
    total_ok = abs(sum(summary.payouts.values()) - budget) <= 712 * 1e-6

    ok = conservation_ok and ratio_ok and stats_ok and total_ok
    _line(11, ok, "synthetic round pays out with per-proposal conservation "
                  "and an exact 3:1 excellent:good split")
    assert ok
