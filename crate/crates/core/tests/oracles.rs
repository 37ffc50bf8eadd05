// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Hand-sized cases against frozen high-precision values, and clique
//! enumeration against exhaustive subset search.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use paramap::cliques::{build_lexical_graph, k_clique_communities, maximal_cliques, CpmParams, EdgeRule, LexicalGraph};
use paramap::corpus::{ingest, CooccurrenceRecord, CorpusStore, OccurrenceRecord, TermId, TimeWindow, Validation};
use paramap::fields::{genericity_index, specificity_index};
use paramap::proximity::{ProximityIndex, ProximityParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn store(occ: &[(&str, u64)], cooc: &[(&str, &str, u64)]) -> CorpusStore {
    let o: Vec<_> = occ
        .iter()
        .map(|(l, c)| Ok(OccurrenceRecord { label: l.to_string(), year: 2000, count: *c, line: None }))
        .collect();
    let c: Vec<_> = cooc
        .iter()
        .map(|(a, b, c)| {
            Ok(CooccurrenceRecord { label_a: a.to_string(), label_b: b.to_string(), year: 2000, count: *c, line: None })
        })
        .collect();
    ingest(o, c, Validation::Strict, "").unwrap().0
}

fn params(alpha: f64, s: f64) -> ProximityParams {
    ProximityParams::new(alpha, s, TimeWindow::single(2000)).unwrap()
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn three_terms() -> CorpusStore {
    store(&[("a", 12), ("b", 10), ("c", 4)], &[("a", "b", 8), ("a", "c", 3), ("b", "c", 2)])
}

#[test]
fn three_term_directed_values() {
    let st = three_terms();
    let idx = ProximityIndex::new(&st, params(2.0, 0.0)).unwrap();
    let expected = [
        ("a", "b", 0.3975231959999626),
        ("a", "c", 0.05412658773652741),
        ("b", "a", 0.5225578117937446),
        ("b", "c", 0.0282842712474619),
        ("c", "a", 0.28125),
        ("c", "b", 0.11180339887498948),
    ];
    for (i, j, v) in expected {
        let got = idx.proximity(st.term_id(i).unwrap(), st.term_id(j).unwrap()).unwrap().value;
        assert!(rel_close(got, v), "{i}->{j}: {got} vs {v}");
    }
}

#[test]
fn three_term_edge_sets() {
    let st = three_terms();
    let [a, b, c] = ["a", "b", "c"].map(|l| st.term_id(l).unwrap());
    let edges = |alpha: f64, s: f64, rule: EdgeRule| {
        let idx = ProximityIndex::new(&st, params(alpha, s)).unwrap();
        build_lexical_graph(&idx, rule).unwrap().edges()
    };
    // directed values above: a<->b clear 0.3, c->a (0.281) and c->b (0.112) clear 0.1
    assert_eq!(edges(2.0, 0.3, EdgeRule::Or), vec![(a, b)]);
    assert_eq!(edges(2.0, 0.1, EdgeRule::Or), vec![(a, b), (a, c), (b, c)]);
    assert_eq!(edges(2.0, 0.1, EdgeRule::And), vec![(a, b)]);
    assert!(edges(2.0, 1.0, EdgeRule::Or).is_empty());
    for s in [0.0, 0.05, 0.2, 0.5] {
        assert_eq!(edges(1.0, s, EdgeRule::Or), edges(1.0, s, EdgeRule::And));
    }
}

#[test]
fn four_term_indexes() {
    let st = store(
        &[("w", 20), ("x", 12), ("y", 8), ("z", 5)],
        &[("w", "x", 9), ("w", "y", 6), ("w", "z", 4), ("x", "y", 5), ("x", "z", 2), ("y", "z", 3)],
    );
    let members: Vec<TermId> = st.terms().collect();
    let oracle: BTreeMap<&str, (f64, f64)> = [
        ("w", (0.4929117777299296, 0.3222723795617362)),
        ("x", (0.3732093060023197, 0.3830390787455416)),
        ("y", (0.3589119994367512, 0.4172922371193629)),
        ("z", (0.29056823836880946, 0.3929976261111693)),
    ]
    .into();
    let idx = ProximityIndex::new(&st, params(2.0, 0.0)).unwrap();
    let dual = idx.dual();
    for (label, (i_s, i_g)) in oracle {
        let w = st.term_id(label).unwrap();
        assert!(rel_close(specificity_index(&idx, &members, w).unwrap(), i_s));
        assert!(rel_close(genericity_index(&idx, &members, w).unwrap(), i_g));
        // at 1/alpha the two indexes trade places
        assert!(rel_close(specificity_index(&dual, &members, w).unwrap(), i_g));
        assert!(rel_close(genericity_index(&dual, &members, w).unwrap(), i_s));
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: u32, p: f64) -> LexicalGraph {
    let edges: Vec<(TermId, TermId)> = (0..n)
        .tuple_combinations()
        .filter(|_| rng.gen_bool(p))
        .map(|(a, b)| (TermId(a), TermId(b)))
        .collect();
    LexicalGraph::from_edges((0..n).map(TermId), edges)
}

fn is_clique(g: &LexicalGraph, nodes: &[TermId]) -> bool {
    nodes.iter().tuple_combinations().all(|(&a, &b)| g.has_edge(a, b))
}

/// Every subset of the node set, kept when it is a clique no node can extend.
fn brute_maximal_cliques(g: &LexicalGraph) -> Vec<Vec<TermId>> {
    let nodes: Vec<TermId> = g.nodes().collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << nodes.len()) {
        let set: Vec<TermId> = (0..nodes.len()).filter(|i| mask & (1 << i) != 0).map(|i| nodes[i]).collect();
        if !is_clique(g, &set) {
            continue;
        }
        let extendable = nodes
            .iter()
            .any(|n| !set.contains(n) && set.iter().all(|&m| g.has_edge(*n, m)));
        if !extendable {
            out.push(set);
        }
    }
    out.sort();
    out
}

/// All k-subsets that are cliques, joined when they share k-1 nodes.
fn brute_percolation(g: &LexicalGraph, k: usize) -> BTreeSet<BTreeSet<TermId>> {
    let nodes: Vec<TermId> = g.nodes().collect();
    let cliques: Vec<Vec<TermId>> = nodes
        .iter()
        .copied()
        .combinations(k)
        .filter(|c| is_clique(g, c))
        .collect();
    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for i in 0..cliques.len() {
        for j in i + 1..cliques.len() {
            let shared = cliques[i].iter().filter(|n| cliques[j].contains(n)).count();
            if shared == k - 1 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<TermId>> = BTreeMap::new();
    for (i, c) in cliques.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().extend(c.iter().copied());
    }
    groups.into_values().collect()
}

#[test]
fn maximal_cliques_match_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..150 {
        let n = rng.gen_range(0..=12);
        let p = [0.2, 0.4, 0.6, 0.8][rng.gen_range(0..4)];
        let g = random_graph(&mut rng, n, p);
        assert_eq!(maximal_cliques(&g, 1_000_000).unwrap(), brute_maximal_cliques(&g));
    }
}

#[test]
fn percolation_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..120 {
        let n = rng.gen_range(3..=12);
        let p = [0.3, 0.5, 0.7][rng.gen_range(0..3)];
        let k = rng.gen_range(3..=5);
        let g = random_graph(&mut rng, n, p);
        let got: BTreeSet<BTreeSet<TermId>> = k_clique_communities(&g, &CpmParams::new(k, EdgeRule::Or).unwrap(), 1_000_000)
            .unwrap()
            .into_iter()
            .map(|c| c.members.into_iter().collect())
            .collect();
        assert_eq!(got, brute_percolation(&g, k));
    }
}

#[test]
fn communities_are_never_nested_and_cover_their_cliques() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 12, 0.5);
        let comms = k_clique_communities(&g, &CpmParams::default(), 1_000_000).unwrap();
        for (a, b) in comms.iter().tuple_combinations() {
            let (sa, sb): (BTreeSet<_>, BTreeSet<_>) = (a.members.iter().collect(), b.members.iter().collect());
            assert!(!sa.is_subset(&sb) && !sb.is_subset(&sa));
        }
        for c in &comms {
            assert!(c.members.len() >= 3);
            let covered: BTreeSet<TermId> = c
                .members
                .iter()
                .copied()
                .combinations(3)
                .filter(|t| is_clique(&g, t))
                .flatten()
                .collect();
            assert_eq!(covered, c.members.iter().copied().collect());
        }
        let ids: Vec<usize> = comms.iter().map(|c| c.id).collect();
        assert_eq!(ids, (0..comms.len()).collect::<Vec<_>>());
    }
}
