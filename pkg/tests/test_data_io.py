import numpy as np
import pytest

import revgame as rg
from revgame.data_io import grade_effort, payouts_to_csv


def write_csv(tmp_path, rows, name="reviews.csv"):
    path = tmp_path / name
    path.write_text("reviewer_id,proposal_id,grade\n" + "".join(
        f"{r},{p},{g}\n" for r, p, g in rows), encoding="utf-8")
    return path


def test_ingest_basics(tmp_path):
    path = write_csv(tmp_path, [
        ("ca1", "p1", "excellent"),
        ("ca2", "p1", "good"),
        ("ca3", "p2", "filtered_out"),
    ])
    records = rg.ingest_reviews(path)
    assert len(records) == 3
    assert records[0] == rg.ReviewRecord("ca1", "p1", "excellent")

    empty = tmp_path / "empty.csv"
    empty.write_text("reviewer_id,proposal_id,grade\n", encoding="utf-8")
    assert rg.ingest_reviews(empty) == []


def test_ingest_duplicate_collapses_to_highest(tmp_path):
    path = write_csv(tmp_path, [
        ("ca1", "p1", "good"),
        ("ca1", "p1", "excellent"),
        ("ca2", "p1", "good"),
    ])
    with pytest.warns(UserWarning, match="duplicate review"):
        records = rg.ingest_reviews(path)
    assert len(records) == 2
    assert records[0].grade == "excellent"


def test_ingest_errors_carry_line_numbers(tmp_path):
    bad_grade = write_csv(tmp_path, [("ca1", "p1", "superb")], "grade.csv")
    with pytest.raises(ValueError, match="line 2.*superb"):
        rg.ingest_reviews(bad_grade)

    short = tmp_path / "short.csv"
    short.write_text("reviewer_id,proposal_id,grade\nca1,p1\n", encoding="utf-8")
    with pytest.raises(ValueError, match="line 2"):
        rg.ingest_reviews(short)

    headerless = tmp_path / "headerless.csv"
    headerless.write_text("ca1,p1,good\n", encoding="utf-8")
    with pytest.raises(ValueError, match="line 1"):
        rg.ingest_reviews(headerless)


def test_ingest_round_trip_is_fixed_point(tmp_path):
    path = write_csv(tmp_path, [
        ("ca1", "p1", "excellent"),
        ("ca2", "p1", "good"),
        ("ca2", "p2", "filtered_out"),
    ])
    records = rg.ingest_reviews(path)
    echo = tmp_path / "echo.csv"
    echo.write_text(rg.records_to_csv(records), encoding="utf-8")
    assert rg.ingest_reviews(echo) == records
    assert rg.records_to_csv(rg.ingest_reviews(echo)) == rg.records_to_csv(records)


def test_payout_split_examples():
    records = [
        rg.ReviewRecord("ca1", "p1", "excellent"),
        rg.ReviewRecord("ca2", "p1", "good"),
    ]
    summary = rg.compute_payouts(records, total_review_budget=100.0, alpha=3)
    assert summary.payouts["ca1"] == pytest.approx(75.0)
    assert summary.payouts["ca2"] == pytest.approx(25.0)
    assert summary.payouts["ca1"] == 3 * summary.payouts["ca2"]

    # a proposal with only filtered reviews pays nobody and keeps its slice
    records.append(rg.ReviewRecord("ca3", "p2", "filtered_out"))
    summary = rg.compute_payouts(records, total_review_budget=100.0, alpha=3)
    assert summary.payouts["ca3"] == 0.0
    assert sum(summary.payouts.values()) == pytest.approx(50.0)  # beta = 50
    assert summary.n_proposals == 2

    with pytest.raises(ValueError):
        rg.compute_payouts([], total_review_budget=10.0)
    with pytest.raises(ValueError):
        rg.compute_payouts(records, total_review_budget=0.0)
    with pytest.raises(ValueError):
        grade_effort("superb")


def test_summary_statistics():
    records = [
        rg.ReviewRecord("ca1", "p1", "excellent"),
        rg.ReviewRecord("ca2", "p1", "good"),
        rg.ReviewRecord("ca3", "p1", "filtered_out"),
        rg.ReviewRecord("ca1", "p2", "good"),
    ]
    summary = rg.compute_payouts(records, total_review_budget=10.0, alpha=3)
    assert summary.n_reviewers == 3
    assert summary.n_proposals == 2
    assert summary.grade_counts == {
        "excellent": 1, "good": 2, "filtered_out": 1}
    assert summary.reviews_per_proposal_mean == pytest.approx(1.5)
    assert summary.reviews_per_proposal_mean_with_filtered == pytest.approx(2.0)
    assert summary.quality_per_proposal_mean == pytest.approx(2.5)


def test_payout_csv_formatting():
    records = [
        rg.ReviewRecord("ca2", "p1", "good"),
        rg.ReviewRecord("ca1", "p1", "excellent"),
    ]
    summary = rg.compute_payouts(records, total_review_budget=1.0, alpha=3)
    text = payouts_to_csv(summary)
    lines = text.strip().split("\n")
    assert lines[0] == "reviewer_id,amount"
    assert lines[1] == "ca1,0.750000"
    assert lines[2] == "ca2,0.250000"


def test_grade_monotonicity_matches_game_payments():
    # the data path and the game path split a slice identically
    records = [
        rg.ReviewRecord("ca1", "p1", "excellent"),
        rg.ReviewRecord("ca2", "p1", "good"),
        rg.ReviewRecord("ca3", "p1", "good"),
    ]
    summary = rg.compute_payouts(records, total_review_budget=7.0, alpha=3)
    inst = rg.Instance(skills=np.full((3, 1), 0.01), budget=7.0,
                       time_horizon=10.0, alphabet=(0, 1, 3))
    res = rg.proportional_payments(inst, [[2], [1], [1]])
    assert summary.payouts["ca1"] == pytest.approx(res.payments[0, 0], rel=1e-12)
    assert summary.payouts["ca2"] == pytest.approx(res.payments[1, 0], rel=1e-12)
