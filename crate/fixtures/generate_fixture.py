#!/usr/bin/env python3
"""Regenerates the synthetic fixture corpus (occurrences.csv, cooccurrences.csv).

Counts are derived from explicit per-year document lists, so every pair count is
bounded by both occurrence counts. The generator is deterministic.

Layout (30 terms, years 1996-2005):
  * machine learning block (7 terms) and data mining block (7 terms) sharing
    the bridge term "knowledge discovery";
  * planted hierarchy: hub "complex systems" plus five specifics; the hub is in
    every document that mentions a specific;
  * a 4-term game theory block (below the 6..20 map filter);
  * a 7-term statistical physics block;
  * a handful of weak cross-block documents.
"""

import csv
import itertools
import os
from collections import Counter

YEARS = list(range(1996, 2006))

ML = ["knowledge discovery", "genetic algorithm", "neural network", "machine learning",
      "reinforcement learning", "support vector machine", "feature selection"]
DM = ["knowledge discovery", "data mining", "mining technology", "association rules",
      "clustering", "text mining", "databases"]
HUB = "complex systems"
SPECIFICS = ["self-organization", "scale-free networks", "emergence", "cellular automata",
             "agent-based models"]
GT = ["game theory", "nash equilibrium", "evolutionary games", "cooperation"]
SP = ["statistical physics", "phase transition", "spin glass", "percolation",
      "renormalization", "ising model", "random walk"]


def block_docs(members):
    """One document with every member plus one document omitting each member."""
    docs = [set(members)]
    for omitted in members:
        docs.append(set(m for m in members if m != omitted))
    return docs


def hierarchy_docs():
    docs = [{HUB}]
    docs += [{HUB, *SPECIFICS}] * 6
    for omitted in SPECIFICS:
        docs.append({HUB, *(s for s in SPECIFICS if s != omitted)})
    return docs


def multiplicities(year):
    step = year - YEARS[0]
    return {
        "ml": 1 + step // 3,          # growing
        "dm": 2,                      # flat
        "hub": 1 + step // 2,         # growing fast
        "gt": 3 - step // 4,          # shrinking
        "sp": 2,                      # flat
    }


def documents(year):
    m = multiplicities(year)
    docs = []
    for name, template in (("ml", block_docs(ML)), ("dm", block_docs(DM)),
                           ("hub", hierarchy_docs()), ("gt", block_docs(GT)),
                           ("sp", block_docs(SP))):
        for _ in range(m[name]):
            docs.extend(template)
    # weak cross-block links
    docs.append({"neural network", "spin glass"})
    docs.append({"clustering", "percolation"})
    if year >= 2000:
        docs.append({"emergence", "cooperation"})
    return docs


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    occ_rows, cooc_rows = [], []
    for year in YEARS:
        occ, cooc = Counter(), Counter()
        for doc in documents(year):
            for term in doc:
                occ[term] += 1
            for a, b in itertools.combinations(sorted(doc), 2):
                cooc[(a, b)] += 1
        occ_rows += [(t, year, c) for t, c in sorted(occ.items())]
        cooc_rows += [(a, b, year, c) for (a, b), c in sorted(cooc.items())]

    with open(os.path.join(here, "occurrences.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["term", "year", "count"])
        w.writerows(occ_rows)
    with open(os.path.join(here, "cooccurrences.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["term_a", "term_b", "year", "count"])
        w.writerows(cooc_rows)


if __name__ == "__main__":
    main()
