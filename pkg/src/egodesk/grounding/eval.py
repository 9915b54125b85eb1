"""Recall-at-k evaluation for temporal grounding.

R_k@t is the fraction of queries whose top-k ranked windows contain at
least one with tIoU >= t against the ground truth.  Queries missing from
the prediction map count as misses.  Only the given ranking matters; scores
merely travel along for reporting.
"""

from __future__ import annotations

import json
from typing import Dict, List, Mapping, Sequence

from ..metrics import tiou
from ..segments import TemporalSegment
from .types import GroundingQuery


def eval_grounding(
    predictions: Mapping[str, Sequence[TemporalSegment]],
    gt: Sequence[GroundingQuery],
    ks: Sequence[int] = (1, 5),
    tious: Sequence[float] = (0.3, 0.5),
) -> Dict[str, float]:
    """Recall table keyed ``R{k}@{t}`` over all gt queries."""
    if not gt:
        return {f"R{k}@{t}": 0.0 for k in ks for t in tious}
    hits = {(k, t): 0 for k in ks for t in tious}
    for query in gt:
        if query.gt is None:
            raise ValueError(f"query {query.query_id} has no ground truth")
        ranked = predictions.get(query.query_id, [])
        for k in ks:
            best = max(
                (tiou(seg, query.gt) for seg in ranked[:k]),
                default=0.0,
            )
            for t in tious:
                if best >= t:
                    hits[(k, t)] += 1
    n = len(gt)
    return {f"R{k}@{t}": hits[(k, t)] / n for k in ks for t in tious}


def save_predictions(predictions: Mapping[str, Sequence[TemporalSegment]], path) -> None:
    with open(path, "w", encoding="utf8") as f:
        for query_id in sorted(predictions):
            rec = {
                "query_id": query_id,
                "segments": [
                    {
                        "start_s": seg.start_s,
                        "end_s": seg.end_s,
                        "score": seg.score if seg.score is not None else 0.0,
                    }
                    for seg in predictions[query_id]
                ],
            }
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def load_predictions(path) -> Dict[str, List[TemporalSegment]]:
    """Parse a prediction file, rejecting malformed segments at ingestion."""
    out: Dict[str, List[TemporalSegment]] = {}
    with open(path, "r", encoding="utf8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            segments = []
            for s in rec["segments"]:
                if s["start_s"] > s["end_s"]:
                    raise ValueError(
                        f"{path}:{line_no}: malformed segment "
                        f"[{s['start_s']}, {s['end_s']}]"
                    )
                segments.append(
                    TemporalSegment(s["start_s"], s["end_s"], score=s.get("score"))
                )
            out[rec["query_id"]] = segments
    return out
