#!/usr/bin/env python3
"""Writes data/label_counts_fixture.jsonl, a synthetic corpus whose per-label record
counts equal the published label frequency table (3681 label tokens)."""

import json
import random
import sys
from pathlib import Path

COUNTS = {
    "elaboration": 636,
    "continuation": 554,
    "acknowledgement": 494,
    "explanation": 383,
    "comment": 265,
    "background": 252,
    "narration": 249,
    "question_answer_pair": 248,
    "contrast": 191,
    "clarification_question": 179,
    "result": 124,
    "other": 106,
}
CONTEXTS = ["single_turn", "within_speaker", "cross_speaker"]
TEAMS = 19
ANNOTATORS_PER_TEAM = 5
PAIRS_PER_TEAM = 26


def main(out: Path) -> None:
    rng = random.Random(20240601)
    n_records = TEAMS * ANNOTATORS_PER_TEAM * PAIRS_PER_TEAM
    tokens = [label for label, n in COUNTS.items() for _ in range(n)]
    n_double = len(tokens) - n_records
    assert 0 <= n_double <= n_records

    rng.shuffle(tokens)
    slots = [[tokens[i]] for i in range(n_records)]
    for k, tok in enumerate(tokens[n_records:]):
        slots[k].append(tok)
    # Repair records that received the same label twice by swapping the
    # second label with one from another two-label record.
    for i in range(n_double):
        while slots[i][0] == slots[i][1]:
            j = rng.randrange(n_double)
            a, b = slots[i][1], slots[j][1]
            if a != slots[j][0] and b != slots[i][0]:
                slots[i][1], slots[j][1] = b, a
    rng.shuffle(slots)

    lines = []
    rid = 0
    for t in range(TEAMS):
        contexts = [rng.choice(CONTEXTS) for _ in range(PAIRS_PER_TEAM)]
        for a in range(ANNOTATORS_PER_TEAM):
            for p in range(PAIRS_PER_TEAM):
                rec = {
                    "record_id": f"r{rid:05d}",
                    "annotator": f"t{t:02d}a{a}",
                    "team": f"t{t:02d}",
                    "conversation": f"c{t:02d}",
                    "du_pair": f"t{t:02d}p{p:02d}",
                    "context": contexts[p],
                    "labels": slots[rid],
                    "confidence": rng.randint(1, 5),
                }
                lines.append(json.dumps(rec, separators=(",", ":")))
                rid += 1
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "label_counts_fixture.jsonl")
