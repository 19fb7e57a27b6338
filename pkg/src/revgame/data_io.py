"""Review dataset ingestion and payout computation.

Reads funding-round review exports shaped as CSV rows of reviewer,
proposal and a coarse grade (excellent, good or filtered_out), then pays
each proposal's equal budget slice out proportionally to review effort.
Filtered-out reviews take the zero-effort role and earn nothing; a
proposal with only filtered reviews keeps its slice.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

EXCELLENT_GRADE = "excellent"
GOOD_GRADE = "good"
FILTERED_GRADE = "filtered_out"

GRADE_RANK = {FILTERED_GRADE: 0, GOOD_GRADE: 1, EXCELLENT_GRADE: 2}
HEADER = ("reviewer_id", "proposal_id", "grade")


@dataclass(frozen=True)
class ReviewRecord:
    reviewer_id: str
    proposal_id: str
    grade: str


def grade_effort(grade: str, alpha=3):
    """Work units of a graded review: alpha, 1 or 0."""
    if grade == EXCELLENT_GRADE:
        return alpha
    if grade == GOOD_GRADE:
        return 1
    if grade == FILTERED_GRADE:
        return 0
    raise ValueError(f"unknown grade {grade!r}")


def ingest_reviews(path) -> list:
    """Parse a review CSV, collapsing duplicate (reviewer, proposal) pairs.

    Duplicates keep the highest grade and emit a warning each. Malformed
    rows and unknown grades raise with the offending line number.
    """
    records: dict = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise ValueError("line 1: expected header reviewer_id,proposal_id,grade")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"line {line_no}: expected 3 fields, got {len(row)}")
            reviewer, proposal, grade = (v.strip() for v in row)
            if grade not in GRADE_RANK:
                raise ValueError(f"line {line_no}: unknown grade {grade!r}")
            if not reviewer or not proposal:
                raise ValueError(f"line {line_no}: empty reviewer or proposal id")
            key = (reviewer, proposal)
            if key in records:
                kept = max(records[key].grade, grade, key=GRADE_RANK.get)
                warnings.warn(
                    f"duplicate review by {reviewer!r} for {proposal!r}; "
                    f"keeping grade {kept!r}")
                records[key] = ReviewRecord(reviewer, proposal, kept)
            else:
                records[key] = ReviewRecord(reviewer, proposal, grade)
    return list(records.values())


def records_to_csv(records) -> str:
    lines = [",".join(HEADER)]
    for rec in records:
        lines.append(f"{rec.reviewer_id},{rec.proposal_id},{rec.grade}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DatasetSummary:
    """Aggregate view of one ingested round plus per-reviewer payouts.

    ``reviews_per_proposal_mean`` counts graded (unfiltered) reviews; the
    with_filtered variant counts every submitted record, since exports are
    ambiguous about which convention their own headline figures use.
    """

    n_reviewers: int
    n_proposals: int
    grade_counts: dict
    reviews_per_proposal_mean: float
    reviews_per_proposal_mean_with_filtered: float
    quality_per_proposal_mean: float
    payouts: dict

    def to_dict(self) -> dict:
        return {
            "n_reviewers": self.n_reviewers,
            "n_proposals": self.n_proposals,
            "grade_counts": dict(self.grade_counts),
            "reviews_per_proposal_mean": self.reviews_per_proposal_mean,
            "reviews_per_proposal_mean_with_filtered":
                self.reviews_per_proposal_mean_with_filtered,
            "quality_per_proposal_mean": self.quality_per_proposal_mean,
            "payouts": {r: self.payouts[r] for r in sorted(self.payouts)},
        }


def compute_payouts(records, total_review_budget: float,
                    alpha=3) -> DatasetSummary:
    """Split the review budget equally over proposals, then by effort.

    The per-proposal slice is budget over the number of distinct proposals
    seen in the data. Within a proposal each review earns effort times the
    per-effort-unit share, so an excellent review pays exactly alpha times
    a good one.
    """
    if total_review_budget <= 0:
        raise ValueError("budget must be positive")
    proposals: dict = {}
    for rec in records:
        proposals.setdefault(rec.proposal_id, []).append(rec)
    if not proposals:
        raise ValueError("no proposals in the dataset")
    beta = total_review_budget / len(proposals)

    payouts: dict = {}
    counts = {EXCELLENT_GRADE: 0, GOOD_GRADE: 0, FILTERED_GRADE: 0}
    for rec in records:
        counts[rec.grade] += 1
        payouts.setdefault(rec.reviewer_id, 0.0)
    for recs in proposals.values():
        denom = sum(grade_effort(r.grade, alpha) for r in recs)
        if denom == 0:
            continue  # only filtered reviews; the slice stays unspent
        unit = beta / denom
        for r in recs:
            payouts[r.reviewer_id] += grade_effort(r.grade, alpha) * unit

    n_props = len(proposals)
    unfiltered = counts[EXCELLENT_GRADE] + counts[GOOD_GRADE]
    quality_total = alpha * counts[EXCELLENT_GRADE] + counts[GOOD_GRADE]
    return DatasetSummary(
        n_reviewers=len(payouts),
        n_proposals=n_props,
        grade_counts=counts,
        reviews_per_proposal_mean=unfiltered / n_props,
        reviews_per_proposal_mean_with_filtered=len(records) / n_props,
        quality_per_proposal_mean=quality_total / n_props,
        payouts=payouts,
    )


def payouts_to_csv(summary: DatasetSummary) -> str:
    """Reviewer payout table; amounts carry six fractional digits."""
    lines = ["reviewer_id,amount"]
    for reviewer in sorted(summary.payouts):
        lines.append(f"{reviewer},{summary.payouts[reviewer]:.6f}")
    return "\n".join(lines) + "\n"
