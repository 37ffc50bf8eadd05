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

//! Checks against the shipped fixture corpus. Expected values come from
//! `fixtures/oracle.py` (50-digit arithmetic, networkx percolation) and from
//! flat-file summation done here without going through the store.

use std::collections::BTreeMap;
use std::path::PathBuf;

use paramap::cliques::{build_lexical_graph, k_clique_communities, CpmParams, EdgeRule, DEFAULT_CLIQUE_BUDGET};
use paramap::corpus::{ingest_files, CorpusStore, TimeWindow, Validation};
use paramap::fields::{build_field, FieldOptions};
use paramap::pipeline::{run_macro, run_meso, MacroConfig, MesoConfig};
use paramap::proximity::{ProximityIndex, ProximityParams};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture() -> CorpusStore {
    let dir = fixture_dir();
    ingest_files(
        &dir.join("occurrences.csv"),
        &dir.join("cooccurrences.csv"),
        Validation::Strict,
    )
    .unwrap()
    .0
}

fn window() -> TimeWindow {
    TimeWindow::new(2002, 2005).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

const HUB: &str = "complex systems";
const SPECIFICS: [&str; 5] = [
    "agent-based models",
    "cellular automata",
    "emergence",
    "scale-free networks",
    "self-organization",
];
const HIERARCHY_S: f64 = 0.1;

#[test]
fn fixture_shape() {
    let store = fixture();
    assert_eq!(store.term_count(), 30);
    assert_eq!(store.years().len(), 10);
    assert_eq!(store.year_range(), Some((1996, 2005)));
}

#[test]
fn total_occurrences_matches_flat_file_sum() {
    let text = std::fs::read_to_string(fixture_dir().join("occurrences.csv")).unwrap();
    let mut sum = 0u64;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.rsplitn(3, ',').collect();
        let (count, year) = (cols[0].parse::<u64>().unwrap(), cols[1].parse::<i32>().unwrap());
        if (2002..=2005).contains(&year) {
            sum += count;
        }
    }
    assert_eq!(sum, 2657);
    assert_eq!(fixture().total_occurrences(window()).unwrap(), sum);
}

#[test]
fn planted_hierarchy_neighborhoods() {
    let store = fixture();
    let hub = store.term_id(HUB).unwrap();
    let oracle: BTreeMap<&str, f64> = [
        ("agent-based models", 0.16150558288984573),
        ("cellular automata", 0.16150558288984573),
        ("emergence", 0.16115100108451771),
        ("scale-free networks", 0.16150558288984573),
        ("self-organization", 0.16150558288984573),
    ]
    .into();

    let specific_focus = ProximityIndex::new(&store, ProximityParams::new(10.0, HIERARCHY_S, window()).unwrap()).unwrap();
    let around_hub = specific_focus.neighborhood(hub).unwrap();
    for label in SPECIFICS {
        let t = store.term_id(label).unwrap();
        assert!(around_hub.contains(&t), "{label} missing around hub at alpha=10");
        let v = specific_focus.proximity(hub, t).unwrap().value;
        assert!(rel_close(v, oracle[label], 1e-12), "{label}: {v}");
    }

    let generic_focus = ProximityIndex::new(&store, ProximityParams::new(0.1, HIERARCHY_S, window()).unwrap()).unwrap();
    for label in SPECIFICS {
        let t = store.term_id(label).unwrap();
        assert!(generic_focus.neighborhood(t).unwrap().contains(&hub));
        let v = generic_focus.proximity(t, hub).unwrap().value;
        assert!(rel_close(v, oracle[label], 1e-12));
    }
}

fn labels(store: &CorpusStore, ids: &[paramap::TermId]) -> Vec<String> {
    ids.iter().map(|&t| store.label(t).to_string()).collect()
}

const ML: [&str; 7] = [
    "feature selection",
    "genetic algorithm",
    "knowledge discovery",
    "machine learning",
    "neural network",
    "reinforcement learning",
    "support vector machine",
];
const DM: [&str; 7] = [
    "association rules",
    "clustering",
    "data mining",
    "databases",
    "knowledge discovery",
    "mining technology",
    "text mining",
];
const GT: [&str; 4] = ["cooperation", "evolutionary games", "game theory", "nash equilibrium"];
const SP: [&str; 7] = [
    "ising model",
    "percolation",
    "phase transition",
    "random walk",
    "renormalization",
    "spin glass",
    "statistical physics",
];

fn hierarchy() -> Vec<&'static str> {
    let mut h = vec![HUB];
    h.extend(SPECIFICS);
    h.sort();
    h
}

#[test]
fn communities_match_networkx_percolation() {
    let store = fixture();
    let cases: [(f64, usize, Vec<Vec<&str>>); 2] = [
        (1.0, 84, vec![hierarchy(), DM.to_vec(), GT.to_vec(), ML.to_vec(), SP.to_vec()]),
        (0.1, 77, vec![hierarchy(), DM.to_vec(), ML.to_vec(), SP.to_vec()]),
    ];
    for (alpha, edge_count, expected) in cases {
        let index = ProximityIndex::new(&store, ProximityParams::new(alpha, 0.1, window()).unwrap()).unwrap();
        let g = build_lexical_graph(&index, EdgeRule::Or).unwrap();
        assert_eq!(g.edge_count(), edge_count, "alpha={alpha}");
        let comms = k_clique_communities(&g, &CpmParams::default(), DEFAULT_CLIQUE_BUDGET).unwrap();
        let got: Vec<Vec<String>> = comms.iter().map(|c| labels(&store, &c.members)).collect();
        assert_eq!(got, expected, "alpha={alpha}");
    }
}

#[test]
fn bridge_term_sits_in_two_fields() {
    let store = fixture();
    let result = run_meso(&store, &MesoConfig::new(window(), 1.0, 0.1)).unwrap();
    let kd = store.term_id("knowledge discovery").unwrap();
    let holding: Vec<usize> = result
        .fields
        .iter()
        .filter(|f| f.term_ids().any(|t| t == kd))
        .map(|f| f.id)
        .collect();
    assert_eq!(holding, vec![1, 3]);
    assert_eq!(result.overlap(), 1);
    assert_eq!(result.coverage(), 30);
}

#[test]
fn hierarchy_field_profiles_match_oracle() {
    let store = fixture();
    let oracle: BTreeMap<&str, (f64, f64)> = [
        ("agent-based models", (0.5602119463017261, 0.41225405983665825)),
        ("cellular automata", (0.5602119463017261, 0.41225405983665825)),
        ("complex systems", (0.30119555544065013, 0.9526530235996548)),
        ("emergence", (0.4826621151779448, 0.42303619287921157)),
        ("scale-free networks", (0.5602119463017261, 0.41225405983665825)),
        ("self-organization", (0.5602119463017261, 0.41225405983665825)),
    ]
    .into();
    let index = ProximityIndex::new(&store, ProximityParams::new(0.1, 0.1, window()).unwrap()).unwrap();
    let members: Vec<_> = hierarchy().iter().map(|l| store.term_id(l).unwrap()).collect();
    let community = paramap::cliques::Community { id: 0, members };
    let field = build_field(&index, &community, &FieldOptions::default()).unwrap();
    for m in &field.members {
        let (i_s, i_g) = oracle[m.label.as_str()];
        assert!(rel_close(m.i_s, i_s, 1e-12), "{}: i_s {}", m.label, m.i_s);
        assert!(rel_close(m.i_g, i_g, 1e-12), "{}: i_g {}", m.label, m.i_g);
    }
    assert_eq!(field.label_generic, HUB);
    // specifics tie on i_s; emergence trails; the tie breaks on intra weight then label
    assert_eq!(field.label_specific, "agent-based models");
}

#[test]
fn macro_map_matches_oracle() {
    let store = fixture();
    let cfg = MesoConfig::new(window(), 1.0, 0.1);
    let meso = run_meso(&store, &cfg).unwrap();
    let map = run_macro(&store, &cfg, &meso.fields, &MacroConfig::default()).unwrap();

    // the 4-term game theory field (id 2) is filtered out
    let ids: Vec<usize> = map.nodes.iter().map(|n| n.field_id).collect();
    assert_eq!(ids, vec![0, 1, 3, 4]);
    let activity = [
        1.3059313049018377,
        0.7666971342545298,
        0.44723999498180905,
        1.2928344552043127,
        0.7252540459164472,
    ];
    let size_raw = [
        0.07025467319031489,
        0.026184203451798484,
        0.00940910801656003,
        0.03747513307167052,
        0.02150653260928007,
    ];
    for n in &map.nodes {
        assert!(rel_close(n.activity.unwrap(), activity[n.field_id], 1e-12));
        assert!(rel_close(n.size_raw, size_raw[n.field_id], 1e-12));
        assert_eq!(n.excluded_members, 0);
    }
    assert_eq!(map.edges.len(), 1);
    assert_eq!((map.edges[0].field_a, map.edges[0].field_b, map.edges[0].weight), (1, 3, 1));
    let smallest = map.nodes.iter().map(|n| n.size_display).fold(f64::INFINITY, f64::min);
    assert_eq!(smallest, 1.0);
}

#[test]
fn raising_threshold_to_one_leaves_no_fields() {
    let store = fixture();
    let result = run_meso(&store, &MesoConfig::new(window(), 1.0, 1.0)).unwrap();
    assert_eq!(result.graph.edge_count(), 0);
    assert!(result.fields.is_empty());
}

#[test]
fn k_above_largest_clique_leaves_no_fields() {
    let store = fixture();
    let mut cfg = MesoConfig::new(window(), 1.0, 0.1);
    cfg.k = 8;
    assert!(run_meso(&store, &cfg).unwrap().fields.is_empty());
}
