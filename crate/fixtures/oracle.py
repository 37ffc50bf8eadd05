#!/usr/bin/env python3
"""Independent reference values for the test suites.

Reads the raw fixture CSVs line by line (no shared code with the Rust crate),
evaluates proximities in 50-digit arithmetic with mpmath, and runs networkx's
own k-clique percolation. Prints a JSON document; the values are frozen into
the Rust tests by hand.
"""

import csv
import itertools
import json
import os
import sys
from collections import defaultdict

import mpmath
import networkx as nx
from networkx.algorithms.community import k_clique_communities

mpmath.mp.dps = 50
HERE = os.path.dirname(os.path.abspath(__file__))


def prox(nij, ni, nj, alpha):
    if nij == 0:
        return mpmath.mpf(0)
    a = mpmath.mpf(alpha)
    r1 = min(mpmath.mpf(nij) / ni, 1)
    r2 = min(mpmath.mpf(nij) / nj, 1)
    return r1 ** a * r2 ** (1 / a)


def load(y1, y2):
    occ = defaultdict(int)
    cooc = defaultdict(int)
    with open(os.path.join(HERE, "occurrences.csv")) as f:
        for row in csv.DictReader(f):
            if y1 <= int(row["year"]) <= y2:
                occ[row["term"]] += int(row["count"])
    with open(os.path.join(HERE, "cooccurrences.csv")) as f:
        for row in csv.DictReader(f):
            if y1 <= int(row["year"]) <= y2:
                a, b = sorted((row["term_a"], row["term_b"]))
                cooc[(a, b)] += int(row["count"])
    return occ, cooc


def n_ij(cooc, a, b):
    return cooc.get(tuple(sorted((a, b))), 0)


def p(occ, cooc, i, j, alpha):
    if i == j:
        return mpmath.mpf(1)
    return prox(n_ij(cooc, i, j), occ[i], occ[j], alpha)


def lexical_graph(occ, cooc, alpha, s, rule="or"):
    g = nx.Graph()
    terms = sorted(t for t, n in occ.items() if n > 0)
    g.add_nodes_from(terms)
    for a, b in itertools.combinations(terms, 2):
        ab = p(occ, cooc, a, b, alpha) > s
        ba = p(occ, cooc, b, a, alpha) > s
        if (ab or ba) if rule == "or" else (ab and ba):
            g.add_edge(a, b)
    return g


def indexes(occ, cooc, members, alpha):
    out = {}
    n = len(members)
    for w in members:
        i_s = sum(p(occ, cooc, o, w, alpha) for o in members) / n
        i_g = sum(p(occ, cooc, w, o, alpha) for o in members) / n
        out[w] = (float(i_s), float(i_g))
    return out


def shares(occ):
    total = sum(occ.values())
    return {t: mpmath.mpf(n) / total for t, n in occ.items()}


def main():
    result = {}

    # small hand-made cases
    result["p_10_5_5_a2"] = float(prox(5, 10, 5, 2))
    result["p_2_8_2_a1"] = float(prox(2, 8, 2, 1))

    three = {"a": 12, "b": 10, "c": 4}
    three_pairs = {("a", "b"): 8, ("a", "c"): 3, ("b", "c"): 2}
    directed = {}
    for i, j in itertools.permutations(three, 2):
        directed[f"{i}->{j}"] = float(p(three, three_pairs, i, j, 2))
    result["three_term_a2"] = directed

    four = {"w": 20, "x": 12, "y": 8, "z": 5}
    four_pairs = {("w", "x"): 9, ("w", "y"): 6, ("w", "z"): 4, ("x", "y"): 5,
                  ("x", "z"): 2, ("y", "z"): 3}
    members = sorted(four)
    result["four_term_a2"] = indexes(four, four_pairs, members, 2)
    result["four_term_a0.5"] = indexes(four, four_pairs, members, 0.5)

    # fixture corpus
    occ, cooc = load(2002, 2005)
    prev, _ = load(1998, 2001)
    result["fixture_total_2002_2005"] = sum(occ.values())
    result["fixture_terms"] = len(set(load(1996, 2005)[0]))

    hub = "complex systems"
    specifics = ["agent-based models", "cellular automata", "emergence",
                 "scale-free networks", "self-organization"]
    result["hub_to_specific_a10"] = {t: float(p(occ, cooc, hub, t, 10)) for t in specifics}
    result["specific_to_hub_a0.1"] = {t: float(p(occ, cooc, t, hub, 0.1)) for t in specifics}
    hier = sorted([hub] + specifics)
    result["hierarchy_indexes_a0.1"] = indexes(occ, cooc, hier, 0.1)

    for alpha, s in ((1, 0.1), (0.1, 0.1)):
        g = lexical_graph(occ, cooc, alpha, s)
        comms = sorted(sorted(c) for c in k_clique_communities(g, 3))
        result[f"fixture_communities_a{alpha}_s{s}"] = comms
        result[f"fixture_edges_a{alpha}_s{s}"] = g.number_of_edges()

    comms = result["fixture_communities_a1_s0.1"]
    sh, sh_prev = shares(occ), shares(prev)
    activity = []
    for c in comms:
        ratios = [sh[t] / sh_prev[t] for t in c if prev.get(t, 0) > 0]
        activity.append(float(sum(ratios) / len(ratios)))
    result["fixture_activity_a1_s0.1"] = activity
    result["fixture_size_raw_a1_s0.1"] = [float(sum(sh[t] for t in c) / len(c)) for c in comms]
    overlaps = {}
    for (i, a), (j, b) in itertools.combinations(enumerate(comms), 2):
        w = len(set(a) & set(b))
        if w:
            overlaps[f"{i}-{j}"] = w
    result["fixture_overlaps_a1_s0.1"] = overlaps

    json.dump(result, sys.stdout, indent=1, sort_keys=True)
    print()


if __name__ == "__main__":
    main()
