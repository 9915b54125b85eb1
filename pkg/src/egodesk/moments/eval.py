"""Average-mAP evaluation for moment detection.

AP per (category, tIoU threshold) uses ranked greedy matching: predictions
sorted by score (ties by clip id and interval for determinism), each
matched to the best still-unmatched ground-truth segment of the same clip
and category; a match at or above the threshold is a true positive.
AP = sum of precisions at true-positive ranks / number of gt instances,
so unmatched ground truth counts against the score.  mAP averages over
categories that have ground truth; average mAP averages mAP over the
threshold set.  R1@0.5 is the fraction of (clip, category) instances whose
top-scoring prediction overlaps some gt segment at tIoU >= 0.5.
"""

from __future__ import annotations

import json
import logging
from typing import Dict, List, Mapping, Sequence, Tuple

from ..metrics import tiou
from ..segments import TemporalSegment
from .types import MomentAnnotation

log = logging.getLogger(__name__)

DEFAULT_TIOUS = (0.1, 0.2, 0.3, 0.4, 0.5)

PredictionMap = Mapping[Tuple[str, int], Sequence[TemporalSegment]]


def _category_ap(
    preds: List[Tuple[str, TemporalSegment]],
    gt_by_clip: Dict[str, List[TemporalSegment]],
    threshold: float,
) -> float:
    num_gt = sum(len(v) for v in gt_by_clip.values())
    if num_gt == 0:
        return 0.0
    ranked = sorted(
        preds,
        key=lambda p: (
            -(p[1].score if p[1].score is not None else 0.0),
            p[0],
            p[1].start_s,
            p[1].end_s,
        ),
    )
    matched: Dict[str, set] = {cid: set() for cid in gt_by_clip}
    hits = 0
    precisions = []
    for rank, (clip_id, seg) in enumerate(ranked, start=1):
        best_iou, best_j = 0.0, -1
        for j, gt_seg in enumerate(gt_by_clip.get(clip_id, [])):
            if j in matched.get(clip_id, set()):
                continue
            overlap = tiou(seg, gt_seg)
            if overlap > best_iou:
                best_iou, best_j = overlap, j
        if best_j >= 0 and best_iou >= threshold:
            matched[clip_id].add(best_j)
            hits += 1
            precisions.append(hits / rank)
    return sum(precisions) / num_gt


def average_map(
    predictions: PredictionMap,
    gt: Sequence[MomentAnnotation],
    tious: Sequence[float] = DEFAULT_TIOUS,
) -> Dict:
    """Per-threshold mAP, their mean, and R1@0.5.

    Predictions keyed by (clip_id, category_id); categories absent from the
    ground truth are skipped with a warning count.
    """
    known = {ann.category_id for ann in gt}
    ignored = sum(1 for (_cid, cat) in predictions if cat not in known)
    if ignored:
        log.warning("ignoring %d predictions with unknown category ids", ignored)

    by_category: Dict[int, Dict[str, List[TemporalSegment]]] = {}
    for ann in gt:
        by_category.setdefault(ann.category_id, {}).setdefault(ann.clip_id, []).extend(
            ann.segments
        )
    preds_by_category: Dict[int, List[Tuple[str, TemporalSegment]]] = {
        c: [] for c in known
    }
    for (clip_id, cat), segs in predictions.items():
        if cat in known:
            preds_by_category[cat].extend((clip_id, s) for s in segs)

    per_threshold = {}
    for t in tious:
        aps = [
            _category_ap(preds_by_category[c], by_category[c], t)
            for c in sorted(known)
        ]
        per_threshold[t] = sum(aps) / len(aps) if aps else 0.0

    # top-1 recall per (clip, category) instance at tIoU 0.5
    hits, total = 0, 0
    for ann in gt:
        total += 1
        ranked = sorted(
            predictions.get((ann.clip_id, ann.category_id), []),
            key=lambda s: -(s.score if s.score is not None else 0.0),
        )
        if ranked and any(tiou(ranked[0], g) >= 0.5 for g in ann.segments):
            hits += 1

    return {
        "per_threshold": per_threshold,
        "average_map": sum(per_threshold.values()) / len(per_threshold)
        if per_threshold
        else 0.0,
        "r1@0.5": hits / total if total else 0.0,
        "ignored_predictions": ignored,
    }


def save_moment_predictions(predictions: PredictionMap, path) -> None:
    with open(path, "w", encoding="utf8") as f:
        for clip_id, cat in sorted(predictions):
            rec = {
                "clip_id": clip_id,
                "category_id": cat,
                "segments": [
                    {
                        "start_s": s.start_s,
                        "end_s": s.end_s,
                        "score": s.score if s.score is not None else 0.0,
                    }
                    for s in predictions[(clip_id, cat)]
                ],
            }
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def load_moment_predictions(path) -> Dict[Tuple[str, int], List[TemporalSegment]]:
    out: Dict[Tuple[str, int], List[TemporalSegment]] = {}
    with open(path, "r", encoding="utf8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            segs = []
            for s in rec["segments"]:
                if s["start_s"] > s["end_s"]:
                    raise ValueError(f"{path}:{line_no}: malformed segment")
                segs.append(TemporalSegment(s["start_s"], s["end_s"], score=s.get("score")))
            out[(rec["clip_id"], rec["category_id"])] = segs
    return out
