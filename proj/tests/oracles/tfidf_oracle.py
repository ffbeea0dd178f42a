"""Character uni+bi-gram tf-idf from first principles for a toy dictionary.

idf(t) = ln((1 + N) / (1 + df(t))) + 1, tf = raw count, L2-normalized.
Prints the values frozen in tests/test_evaluation.cpp.
"""
import math
from collections import Counter

synonyms = {"flu": "C1", "fever": "C2", "flux": "C3"}


def grams(s):
    return [s[i] for i in range(len(s))] + [s[i:i + 2] for i in range(len(s) - 1)]


docs = sorted(synonyms)
n = len(docs)
df = Counter(g for d in docs for g in set(grams(d)))
idf = {g: math.log((1 + n) / (1 + c)) + 1 for g, c in df.items()}


def vec(s):
    tf = Counter(g for g in grams(s) if g in idf)
    v = {g: c * idf[g] for g, c in tf.items()}
    norm = math.sqrt(sum(w * w for w in v.values()))
    return {g: w / norm for g, w in v.items()} if norm else v


for d in docs:
    v = vec(d)
    print(d, " ".join(f"{g}={v[g]:.17g}" for g in sorted(v)))
for q in ["flue", "fluxe", "ever"]:
    qv = vec(q)
    scores = [(sum(w * vec(d).get(g, 0.0) for g, w in qv.items()), d) for d in docs]
    print("query", q, " ".join(f"{d}={s:.17g}" for s, d in scores),
          "best", synonyms[max(scores, key=lambda t: t[0])[1]])
