#!/usr/bin/env python3
"""Generate random BLEU corpora and freeze the Moses multi-bleu.perl output.

Run once from this directory:
    python3 gen_bleu_corpora.py > bleu_corpora.json
"""
import json
import os
import random
import re
import subprocess
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
SCRIPT = os.path.join(HERE, "multi-bleu.perl")
LINE = re.compile(
    r"BLEU = ([\d.]+), ([\d.]+)/([\d.]+)/([\d.]+)/([\d.]+) "
    r"\(BP=([\d.]+), ratio=([\d.]+), hyp_len=(\d+), ref_len=(\d+)\)"
)


def sentence(rng, vocab, lo, hi):
    return " ".join(rng.choice(vocab) for _ in range(rng.randint(lo, hi)))


def corpus(rng, idx):
    vocab_size = rng.randint(2, 20)
    vocab = ["w%d" % i for i in range(vocab_size)]
    n = rng.randint(1, 50)
    refs = [sentence(rng, vocab, 1, 15) for _ in range(n)]
    kind = "random"
    if idx % 5 == 0:
        # hypotheses are noisy copies of the references
        kind = "noisy-copy"
        hyps = []
        for r in refs:
            toks = r.split()
            toks = [t if rng.random() < 0.8 else rng.choice(vocab) for t in toks]
            hyps.append(" ".join(toks))
    elif idx % 5 == 1:
        # short hypotheses (brevity penalty < 1)
        kind = "short"
        hyps = []
        for r in refs:
            toks = r.split()
            keep = max(1, (len(toks) * 2) // 3)
            toks = [t if rng.random() < 0.9 else rng.choice(vocab) for t in toks[:keep]]
            hyps.append(" ".join(toks))
    elif idx % 5 == 2:
        # disjoint vocabulary: zero unigram precision
        kind = "zero-precision"
        hyps = [sentence(rng, ["z%d" % i for i in range(5)], 1, 15) for _ in refs]
    elif idx % 5 == 3:
        # single-token hypotheses: no 2-, 3-, 4-grams at all
        kind = "unigram-only"
        hyps = [rng.choice(vocab) for _ in refs]
    else:
        # edits: deletions, insertions, substitutions; lengths drift both ways
        hyps = []
        for r in refs:
            out = []
            for t in r.split():
                x = rng.random()
                if x < 0.1:
                    continue
                if x < 0.2:
                    out.append(rng.choice(vocab))
                out.append(t if rng.random() < 0.85 else rng.choice(vocab))
            hyps.append(" ".join(out) if out else rng.choice(vocab))
    return kind, hyps, refs


def moses(hyps, refs, lowercase):
    with tempfile.NamedTemporaryFile("w", delete=False, suffix=".ref") as f:
        f.write("\n".join(refs) + "\n")
        ref_path = f.name
    args = ["perl", SCRIPT] + (["-lc"] if lowercase else []) + [ref_path]
    out = subprocess.run(
        args, input="\n".join(hyps) + "\n", capture_output=True, text=True, check=True
    ).stdout.strip()
    os.unlink(ref_path)
    m = LINE.match(out)
    assert m, out
    g = m.groups()
    return {
        "line": out,
        "bleu": float(g[0]),
        "precisions_pct": [float(x) for x in g[1:5]],
        "bp": float(g[5]),
        "ratio": float(g[6]),
        "hyp_len": int(g[7]),
        "ref_len": int(g[8]),
    }


def main():
    rng = random.Random(20190801)
    cases = []
    for idx in range(20):
        kind, hyps, refs = corpus(rng, idx)
        lowercase = False
        if idx == 19:
            # mixed case, scored with -lc
            hyps = [h.replace("w1", "W1") for h in hyps]
            lowercase = True
        cases.append(
            {
                "id": idx,
                "kind": kind,
                "lowercase": lowercase,
                "hypotheses": hyps,
                "references": refs,
                "moses": moses(hyps, refs, lowercase),
            }
        )
    print(json.dumps(cases, indent=1, ensure_ascii=False))


if __name__ == "__main__":
    main()
