#!/usr/bin/env python3
"""Brute-force reference implementations of BLEU, ROUGE-L and CIDEr-D.

Computes the expected values for the frozen metric fixtures by direct
n-gram enumeration, independent of the C++ implementation. Run from the
repository root:

    python3 tests/oracles/metrics_oracle.py > tests/fixtures/metric_fixtures.json
"""
import json
import math
import sys
from collections import Counter


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------- BLEU

def bleu_corpus(candidates, references_per_cand, max_n=4):
    """Corpus-level BLEU-1..max_n. Clipped modified precision, geometric
    mean, brevity penalty against the closest reference length (ties
    broken toward the shorter reference)."""
    match = [0] * max_n
    total = [0] * max_n
    cand_len = 0
    eff_ref_len = 0
    for cand, refs in zip(candidates, references_per_cand):
        cand_len += len(cand)
        eff_ref_len += min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
        for n in range(1, max_n + 1):
            cn = ngrams(cand, n)
            total[n - 1] += sum(cn.values())
            if not cn:
                continue
            best = Counter()
            for r in refs:
                rn = ngrams(r, n)
                for g, c in rn.items():
                    best[g] = max(best[g], c)
            match[n - 1] += sum(min(c, best[g]) for g, c in cn.items())
    bp = 1.0 if cand_len > eff_ref_len else (
        0.0 if cand_len == 0 else math.exp(1.0 - eff_ref_len / cand_len))
    scores = []
    for k in range(1, max_n + 1):
        logsum = 0.0
        ok = True
        for n in range(1, k + 1):
            if total[n - 1] == 0 or match[n - 1] == 0:
                ok = False
                break
            logsum += math.log(match[n - 1] / total[n - 1])
        scores.append(bp * math.exp(logsum / k) if ok else 0.0)
    return scores


# -------------------------------------------------------------- ROUGE-L

def lcs_len(a, b):
    dp = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            dp[i][j] = dp[i - 1][j - 1] + 1 if a[i - 1] == b[j - 1] else \
                max(dp[i - 1][j], dp[i][j - 1])
    return dp[len(a)][len(b)]


def rouge_l(cand, refs, beta=1.2):
    """LCS F-measure, maximum over references."""
    best = 0.0
    for r in refs:
        lcs = lcs_len(cand, r)
        if lcs == 0 or not cand or not r:
            continue
        p = lcs / len(cand)
        rec = lcs / len(r)
        f = (1 + beta * beta) * p * rec / (rec + beta * beta * p)
        best = max(best, f)
    return best


# -------------------------------------------------------------- CIDEr-D

def cider_d(cands_per_image, refs_per_image, sigma=6.0, max_n=4):
    """CIDEr-D per its standard definition: clipped tf-idf cosine per n,
    Gaussian length penalty, averaged over n and references, scaled by 10.
    Document frequency counts each image whose reference set contains the
    n-gram at least once."""
    num_images = len(refs_per_image)
    df = [Counter() for _ in range(max_n)]
    for refs in refs_per_image:
        for n in range(1, max_n + 1):
            seen = set()
            for r in refs:
                seen.update(ngrams(r, n).keys())
            for g in seen:
                df[n - 1][g] += 1
    log_num = math.log(num_images)

    def tfidf_vec(tokens):
        vecs, norms = [], []
        for n in range(1, max_n + 1):
            cn = ngrams(tokens, n)
            v = {g: c * (log_num - math.log(max(1.0, df[n - 1][g])))
                 for g, c in cn.items()}
            vecs.append(v)
            norms.append(math.sqrt(sum(x * x for x in v.values())))
        return vecs, norms

    per_image = []
    for cand, refs in zip(cands_per_image, refs_per_image):
        cv, cn = tfidf_vec(cand)
        acc = [0.0] * max_n
        for r in refs:
            rv, rn = tfidf_vec(r)
            penalty = math.exp(-((len(cand) - len(r)) ** 2) / (2 * sigma * sigma))
            for n in range(max_n):
                s = sum(min(cv[n][g], rv[n].get(g, 0.0)) * rv[n].get(g, 0.0)
                        for g in cv[n])
                if cn[n] != 0 and rn[n] != 0:
                    s /= cn[n] * rn[n]
                acc[n] += s * penalty
        score = sum(acc) / max_n / len(refs) * 10.0
        per_image.append(score)
    return per_image, sum(per_image) / len(per_image)


def main():
    fixtures = {"bleu_cases": [], "rouge_cases": [], "cider_cases": []}

    def bleu_case(name, cands, refs):
        fixtures["bleu_cases"].append({
            "name": name,
            "candidates": cands,
            "references": refs,
            "expected": bleu_corpus(cands, refs),
        })

    def rouge_case(name, cand, refs):
        fixtures["rouge_cases"].append({
            "name": name,
            "candidate": cand,
            "references": refs,
            "expected": rouge_l(cand, refs),
        })

    # 1. Repetition clipping: BLEU-1 = 1/3, BP = 1 (candidate longer).
    bleu_case("repetition_clip",
              [["the", "the", "the"]],
              [[["the", "cat"]]])

    # 2. Perfect match: BLEU-4 = 1.
    bleu_case("perfect_match",
              [["a", "red", "box", "on", "a", "table"]],
              [[["a", "red", "box", "on", "a", "table"]]])

    # 3. Short candidate: brevity penalty e^{1-r/c}.
    bleu_case("brevity_penalty",
              [["a", "red", "box"]],
              [[["a", "red", "box", "on", "a", "table"]]])

    # 4. Mixed two-sentence corpus with multiple references.
    bleu_case("mixed_corpus",
              [["a", "blue", "ball", "under", "a", "chair"],
               ["two", "dogs", "run", "in", "a", "park"]],
              [[["a", "blue", "ball", "under", "a", "chair"],
                ["a", "small", "ball", "under", "the", "chair"]],
               [["two", "dogs", "play", "in", "a", "park"],
                ["dogs", "running", "in", "a", "green", "park"]]])

    # 5. Clipped partial overlap with repeated candidate n-grams.
    bleu_case("partial_overlap",
              [["a", "cat", "and", "a", "cat", "on", "a", "mat"]],
              [[["a", "cat", "sits", "on", "a", "mat"]]])

    rouge_case("identical", ["a", "b", "c", "d"], [["a", "b", "c", "d"]])
    rouge_case("worked_075", ["a", "b", "c", "d"], [["a", "c", "d", "e"]])
    rouge_case("disjoint", ["a", "b"], [["c", "d"]])
    rouge_case("two_refs",
               ["a", "red", "box", "on", "a", "table"],
               [["a", "red", "box", "under", "a", "chair"],
                ["a", "big", "red", "box", "on", "a", "table"]])
    rouge_case("subsequence",
               ["the", "quick", "fox", "jumps"],
               [["the", "very", "quick", "brown", "fox", "jumps", "high"]])

    # CIDEr-D toy corpus of 3 images. Image 0 is the identity case: the
    # candidate equals the sole reference and its n-grams are non-degenerate,
    # so the per-image score must be exactly 10.
    cands = [
        ["a", "red", "box", "on", "a", "table"],
        ["a", "ball", "under", "a", "chair"],
        ["a", "dog", "plays", "in", "a", "park"],
    ]
    refs = [
        [["a", "red", "box", "on", "a", "table"]],
        [["a", "blue", "ball", "under", "a", "chair"],
         ["a", "small", "ball", "under", "a", "chair"]],
        [["two", "dogs", "play", "in", "a", "park"]],
    ]
    per_image, mean = cider_d(cands, refs)
    fixtures["cider_cases"].append({
        "name": "toy_corpus",
        "candidates": cands,
        "references": refs,
        "expected_per_image": per_image,
        "expected_mean": mean,
    })

    # Disjoint candidate scores 0 on the same corpus.
    cands2 = [
        ["purple", "elephants", "dancing", "wildly", "tonight"],
        ["a", "ball", "under", "a", "chair"],
        ["a", "dog", "plays", "in", "a", "park"],
    ]
    per_image2, mean2 = cider_d(cands2, refs)
    fixtures["cider_cases"].append({
        "name": "no_overlap_image0",
        "candidates": cands2,
        "references": refs,
        "expected_per_image": per_image2,
        "expected_mean": mean2,
    })

    json.dump(fixtures, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
