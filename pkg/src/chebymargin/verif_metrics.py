"""Verification scoring: cosine trial scoring, EER, and minimum DCF.

Both metrics depend only on the ordering of scores.  The threshold sweep
walks every distinct operating point of the decision rule
``accept iff score >= t``; ties in score collapse to a single operating
point.  EER linearly interpolates between the two operating points where
``FAR - FRR`` changes sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrialScore:
    """One scored verification trial."""

    enroll_id: str
    test_id: str
    score: float
    is_target: bool

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score}")


@dataclass(frozen=True)
class DcfParams:
    """Detection cost parameters; defaults follow the common benchmark setup."""

    p_target: float = 0.01
    c_miss: float = 1.0
    c_fa: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p_target < 1.0:
            raise ValueError(f"p_target must be in (0, 1), got {self.p_target}")
        if self.c_miss <= 0 or self.c_fa <= 0:
            raise ValueError("costs must be positive")


def cosine_score(a, b) -> float:
    """Cosine similarity of two embedding vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"vectors must share one dimension, got {a.shape} and {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine score undefined for zero-norm input")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def _split_scores(scores):
    targets = np.sort([s.score for s in scores if s.is_target])
    nontargets = np.sort([s.score for s in scores if not s.is_target])
    if targets.size == 0 or nontargets.size == 0:
        raise ValueError("need at least one target and one nontarget trial")
    return targets, nontargets


def _operating_points(targets: np.ndarray, nontargets: np.ndarray):
    """Thresholds with the FAR/FRR of ``accept iff score >= t`` at each.

    Candidate thresholds are midpoints between consecutive distinct scores
    plus one sentinel below the minimum (accept everything) and one above
    the maximum (reject everything); that covers every achievable
    operating point exactly once.
    """
    values = np.unique(np.concatenate([targets, nontargets]))
    thresholds = np.concatenate(
        [[values[0] - 1.0], (values[:-1] + values[1:]) / 2.0, [values[-1] + 1.0]]
    )
    far = 1.0 - np.searchsorted(nontargets, thresholds, side="left") / nontargets.size
    frr = np.searchsorted(targets, thresholds, side="left") / targets.size
    return thresholds, far, frr


def compute_eer(scores) -> tuple[float, float]:
    """Equal error rate and the interpolated crossing threshold.

    ``FAR - FRR`` is non-increasing along the sweep; the rate is linearly
    interpolated between the two adjacent operating points where the sign
    changes.
    """
    targets, nontargets = _split_scores(scores)
    thresholds, far, frr = _operating_points(targets, nontargets)
    diff = far - frr
    # diff starts at +1 and ends at -1, so a sign change always exists.
    idx = int(np.nonzero(diff <= 0)[0][0])
    if idx == 0 or diff[idx] == 0.0:
        return float(frr[idx]), float(thresholds[idx])
    span = diff[idx - 1] - diff[idx]
    alpha = diff[idx - 1] / span
    eer = frr[idx - 1] + alpha * (frr[idx] - frr[idx - 1])
    threshold = thresholds[idx - 1] + alpha * (thresholds[idx] - thresholds[idx - 1])
    return float(eer), float(threshold)


def compute_min_dcf(scores, params: DcfParams = DcfParams()) -> float:
    """Minimum normalized detection cost over all thresholds.

    ``min_t [c_miss p_t FRR(t) + c_fa (1 - p_t) FAR(t)]`` divided by
    ``min(c_miss p_t, c_fa (1 - p_t))``, the better of the two
    score-blind decisions, so the value lies in [0, 1].
    """
    targets, nontargets = _split_scores(scores)
    _, far, frr = _operating_points(targets, nontargets)
    miss_cost = params.c_miss * params.p_target
    fa_cost = params.c_fa * (1.0 - params.p_target)
    costs = miss_cost * frr + fa_cost * far
    return float(np.min(costs) / min(miss_cost, fa_cost))


def parse_trials(trial_file: str, scores_file: str) -> list[TrialScore]:
    """Join a trial list with a score list on the (enroll, test) id pair.

    Trial lines are ``label enroll_id test_id`` with label 0 or 1; score
    lines are ``enroll_id test_id score``.  Every trial must match exactly
    one score; problems are reported with their line numbers.  The output
    preserves trial-file order.
    """
    score_map: dict[tuple[str, str], float] = {}
    with open(scores_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ValueError(
                    f"{scores_file}:{lineno}: expected 'enroll test score', got {line.strip()!r}"
                )
            enroll, test, raw = fields
            try:
                value = float(raw)
            except ValueError:
                raise ValueError(f"{scores_file}:{lineno}: bad score {raw!r}") from None
            if (enroll, test) in score_map:
                raise ValueError(f"{scores_file}:{lineno}: duplicate score for ({enroll}, {test})")
            score_map[(enroll, test)] = value

    trials: list[TrialScore] = []
    with open(trial_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 3 or fields[0] not in ("0", "1"):
                raise ValueError(
                    f"{trial_file}:{lineno}: expected 'label enroll test' with label 0/1, "
                    f"got {line.strip()!r}"
                )
            label, enroll, test = fields
            if (enroll, test) not in score_map:
                raise ValueError(
                    f"{trial_file}:{lineno}: no score for trial pair ({enroll}, {test})"
                )
            trials.append(
                TrialScore(
                    enroll_id=enroll,
                    test_id=test,
                    score=score_map[(enroll, test)],
                    is_target=label == "1",
                )
            )
    return trials
