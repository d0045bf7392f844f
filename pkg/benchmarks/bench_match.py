#!/usr/bin/env python3
"""Benchmark: compiled scan kernel vs the pure-Python twin.

Builds a synthetic corpus around the fixture ontologies (every paper gets
a handful of real map phrases buried in filler) and times full-corpus
prescreening with each backend.

    python3 benchmarks/bench_match.py [--papers 20000] [--repeats 3]
"""

import argparse
import random
import statistics
import time
from pathlib import Path

from taxoscope._kernels import available_backends, get_scan
from taxoscope.conceptmap import derive_concept_map, normalize
from taxoscope.ontology import load_taxonomy
from taxoscope.turtle import parse_turtle

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

FILLER = ("study approach results method analysis system practice industrial "
          "empirical evaluation framework pipeline report experience dataset "
          "replication threats validity design survey participants tooling "
          "builds latency throughput review maintenance evolution").split()


def synth_corpus(n_papers: int, phrases, rng) -> list:
    texts = []
    for _ in range(n_papers):
        words = [rng.choice(FILLER) for _ in range(rng.randint(30, 120))]
        for _ in range(rng.randint(0, 4)):
            pos = rng.randint(0, len(words))
            words[pos:pos] = rng.choice(phrases).split(" ")
        texts.append(" ".join(words))
    return texts


def run(cmap, token_lists, scan) -> int:
    hits = 0
    for tokens in token_lists:
        hits += len(cmap.match_tokens(tokens, scan=scan))
    return hits


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--papers", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    stc = load_taxonomy(parse_turtle((FIXTURES / "stc.ttl").read_text()))
    cmap = derive_concept_map(stc)
    phrases = [" ".join(e.form) for e in cmap.entries]
    rng = random.Random(42)
    texts = synth_corpus(args.papers, phrases, rng)
    token_lists = [normalize(t) for t in texts]
    total_tokens = sum(len(t) for t in token_lists)
    print(f"{args.papers} papers, {total_tokens} tokens, {len(cmap)} map entries\n")

    results = {}
    for name in available_backends():
        scan = get_scan(name)
        expected = run(cmap, token_lists, scan)
        timings = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            hits = run(cmap, token_lists, scan)
            timings.append(time.perf_counter() - t0)
            assert hits == expected
        best = min(timings)
        results[name] = best
        print(f"{name:>9}: best {best * 1000:8.1f} ms  "
              f"median {statistics.median(timings) * 1000:8.1f} ms  "
              f"({total_tokens / best / 1e6:.2f} Mtokens/s, {hits} hits)")

    if len(results) == 2:
        print(f"\nspeedup: {results['python'] / results['compiled']:.2f}x "
              "(compiled over pure Python)")


if __name__ == "__main__":
    main()
