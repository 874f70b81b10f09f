"""Independent multinomial Naive Bayes cross-validation over cv_oracle.tsv.

Features are the indicators whole=, left=, right= (no stems). Laplace alpha=1.
Indicators not seen in training are ignored. Ties go to the negative class.
Prints the pooled confusion matrix and precision / recall / F as fractions.
"""
from collections import Counter
from fractions import Fraction
import math

rows = []
for line in open("cv_oracle.tsv"):
    if line.startswith("#") or not line.strip():
        continue
    label, phrase, fold = line.rstrip("\n").split("\t")
    left, right = phrase.split(" kao ")
    rows.append((int(label), [f"whole={phrase}", f"left={left}", f"right={right}"], int(fold)))

tp = fp = fn = tn = 0
for k in sorted({r[2] for r in rows}):
    train = [r for r in rows if r[2] != k]
    counts = {0: Counter(), 1: Counter()}
    n_class = Counter()
    for label, feats, _ in train:
        n_class[label] += 1
        counts[label].update(feats)
    vocab = set(counts[0]) | set(counts[1])
    total = {c: sum(counts[c].values()) for c in (0, 1)}
    for label, feats, fold in rows:
        if fold != k:
            continue
        score = {}
        for c in (0, 1):
            s = math.log(n_class[c] / len(train))
            for f in feats:
                if f in vocab:
                    s += math.log((counts[c][f] + 1) / (total[c] + len(vocab)))
            score[c] = s
        pred = 1 if score[1] - score[0] > 0 else 0
        tp += pred == 1 and label == 1
        fp += pred == 1 and label == 0
        fn += pred == 0 and label == 1
        tn += pred == 0 and label == 0

p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
f = 2 * p * r / (p + r) if p + r else Fraction(0)
print(f"tp={tp} fp={fp} fn={fn} tn={tn}")
print(f"precision={p} recall={r} f={f}")
