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

//! Thresholded lexical graph and k-clique percolation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::corpus::TermId;
use crate::error::{BudgetKind, Error, Result};
use crate::proximity::{ProximityIndex, ProximityParams};

/// Default cap on enumerated cliques (maximal and k-cliques alike).
pub const DEFAULT_CLIQUE_BUDGET: usize = 10_000_000;

/// How the two directed proximities of a pair become one undirected edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeRule {
    /// `P(i,j) > s` or `P(j,i) > s`.
    #[default]
    Or,
    /// `P(i,j) > s` and `P(j,i) > s`.
    And,
}

impl FromStr for EdgeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "or" => Ok(EdgeRule::Or),
            "and" => Ok(EdgeRule::And),
            other => Err(Error::InvalidParams(format!(
                "edge rule must be or/and, got \"{other}\""
            ))),
        }
    }
}

impl fmt::Display for EdgeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeRule::Or => "or",
            EdgeRule::And => "and",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CpmParams {
    /// Clique size, at least 3.
    pub k: usize,
    pub edge_rule: EdgeRule,
}

impl CpmParams {
    pub fn new(k: usize, edge_rule: EdgeRule) -> Result<Self> {
        let p = CpmParams { k, edge_rule };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::InvalidParams(format!("k must be at least 3, got {}", self.k)));
        }
        Ok(())
    }
}

impl Default for CpmParams {
    fn default() -> Self {
        CpmParams {
            k: 3,
            edge_rule: EdgeRule::Or,
        }
    }
}

/// Undirected simple graph over terms.
#[derive(Clone, Debug, PartialEq)]
pub struct LexicalGraph {
    adjacency: BTreeMap<TermId, BTreeSet<TermId>>,
    params: Option<ProximityParams>,
    edge_rule: EdgeRule,
}

impl LexicalGraph {
    /// Graph from explicit nodes and edges. Edge endpoints are added as nodes;
    /// self-loops are dropped.
    pub fn from_edges(
        nodes: impl IntoIterator<Item = TermId>,
        edges: impl IntoIterator<Item = (TermId, TermId)>,
    ) -> Self {
        let mut adjacency: BTreeMap<TermId, BTreeSet<TermId>> =
            nodes.into_iter().map(|n| (n, BTreeSet::new())).collect();
        for (a, b) in edges {
            if a == b {
                continue;
            }
            adjacency.entry(a).or_default().insert(b);
            adjacency.entry(b).or_default().insert(a);
        }
        LexicalGraph {
            adjacency,
            params: None,
            edge_rule: EdgeRule::Or,
        }
    }

    pub fn params(&self) -> Option<&ProximityParams> {
        self.params.as_ref()
    }

    pub fn edge_rule(&self) -> EdgeRule {
        self.edge_rule
    }

    pub fn nodes(&self) -> impl Iterator<Item = TermId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, t: TermId) -> impl Iterator<Item = TermId> + '_ {
        self.adjacency.get(&t).into_iter().flatten().copied()
    }

    pub fn has_edge(&self, a: TermId, b: TermId) -> bool {
        self.adjacency.get(&a).is_some_and(|n| n.contains(&b))
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(TermId, TermId)> {
        self.adjacency
            .iter()
            .flat_map(|(&a, ns)| ns.range(a..).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Links every term present in the window to its neighborhood, then merges
/// the directed links with `rule`. Terms without links stay as isolated nodes.
pub fn build_lexical_graph(index: &ProximityIndex<'_>, rule: EdgeRule) -> Result<LexicalGraph> {
    let nodes: Vec<TermId> = index.counts().present_terms().collect();
    let mut directed: BTreeSet<(TermId, TermId)> = BTreeSet::new();
    for &i in &nodes {
        directed.extend(index.neighborhood(i)?.into_iter().map(|j| (i, j)));
    }
    let edges = directed
        .iter()
        .filter(|&&(i, j)| match rule {
            EdgeRule::Or => true,
            EdgeRule::And => directed.contains(&(j, i)),
        })
        .copied()
        .collect::<Vec<_>>();
    let mut g = LexicalGraph::from_edges(nodes, edges);
    g.params = Some(*index.params());
    g.edge_rule = rule;
    Ok(g)
}

struct Enumerator<'a> {
    adj: &'a [Vec<usize>],
    out: Vec<Vec<usize>>,
    budget: usize,
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn intersect_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

impl Enumerator<'_> {
    // Bron-Kerbosch with Tomita pivoting; `p` and `x` stay sorted.
    fn expand(&mut self, r: &mut Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>) -> Result<()> {
        if p.is_empty() {
            if x.is_empty() {
                if self.out.len() == self.budget {
                    return Err(Error::Budget {
                        what: BudgetKind::MaximalCliques,
                        budget: self.budget,
                    });
                }
                self.out.push(r.clone());
            }
            return Ok(());
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| (intersect_count(&p, &self.adj[u]), std::cmp::Reverse(u)))
            .expect("p is non-empty");
        let candidates: Vec<usize> = p
            .iter()
            .copied()
            .filter(|v| self.adj[pivot].binary_search(v).is_err())
            .collect();
        for v in candidates {
            r.push(v);
            let np = intersect(&p, &self.adj[v]);
            let nx = intersect(&x, &self.adj[v]);
            self.expand(r, np, nx)?;
            r.pop();
            p.retain(|&u| u != v);
            let pos = x.binary_search(&v).unwrap_err();
            x.insert(pos, v);
        }
        Ok(())
    }
}

/// All maximal cliques, each sorted by id, the list sorted lexicographically.
/// Isolated nodes come back as singleton cliques.
pub fn maximal_cliques(g: &LexicalGraph, budget: usize) -> Result<Vec<Vec<TermId>>> {
    let nodes: Vec<TermId> = g.nodes().collect();
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    let local: HashMap<TermId, usize> = nodes.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let adj: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&t| g.neighbors(t).map(|n| local[&n]).collect())
        .collect();
    let mut e = Enumerator {
        adj: &adj,
        out: Vec::new(),
        budget,
    };
    e.expand(&mut Vec::new(), (0..nodes.len()).collect(), Vec::new())?;
    let mut cliques: Vec<Vec<TermId>> = e
        .out
        .into_iter()
        .map(|c| {
            let mut c: Vec<TermId> = c.into_iter().map(|i| nodes[i]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    cliques.sort();
    Ok(cliques)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Community {
    pub id: usize,
    /// Sorted by id.
    pub members: Vec<TermId>,
}

/// k-clique percolation.
///
/// Every size-k subset of a maximal clique with at least k nodes is a
/// k-clique. Two k-cliques are adjacent when they share k-1 nodes; each
/// connected component of that relation is a community (the union of its
/// cliques). Communities are ordered by smallest member, then size, then
/// members, and numbered from 0 in that order.
pub fn k_clique_communities(g: &LexicalGraph, p: &CpmParams, budget: usize) -> Result<Vec<Community>> {
    p.validate()?;
    let k = p.k;
    let mut k_cliques: BTreeSet<Vec<TermId>> = BTreeSet::new();
    for clique in maximal_cliques(g, budget)? {
        if clique.len() < k {
            continue;
        }
        for sub in clique.into_iter().combinations(k) {
            k_cliques.insert(sub);
            if k_cliques.len() > budget {
                return Err(Error::Budget {
                    what: BudgetKind::KCliques,
                    budget,
                });
            }
        }
    }
    let k_cliques: Vec<Vec<TermId>> = k_cliques.into_iter().collect();

    let mut uf = UnionFind::<usize>::new(k_cliques.len());
    let mut by_face: HashMap<Vec<TermId>, usize> = HashMap::new();
    for (idx, clique) in k_cliques.iter().enumerate() {
        for face in clique.iter().copied().combinations(k - 1) {
            match by_face.get(&face) {
                Some(&other) => {
                    uf.union(idx, other);
                }
                None => {
                    by_face.insert(face, idx);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, BTreeSet<TermId>> = BTreeMap::new();
    for (idx, clique) in k_cliques.iter().enumerate() {
        groups.entry(uf.find(idx)).or_default().extend(clique.iter().copied());
    }
    let mut members: Vec<Vec<TermId>> = groups
        .into_values()
        .map(|s| s.into_iter().collect())
        .collect();
    members.sort_by(|a, b| {
        a[0].cmp(&b[0])
            .then(a.len().cmp(&b.len()))
            .then_with(|| a.cmp(b))
    });
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(id, members)| Community { id, members })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: u32) -> TermId {
        TermId(i)
    }

    fn graph(n: u32, edges: &[(u32, u32)]) -> LexicalGraph {
        LexicalGraph::from_edges((0..n).map(t), edges.iter().map(|&(a, b)| (t(a), t(b))))
    }

    fn ids(v: &[u32]) -> Vec<TermId> {
        v.iter().copied().map(t).collect()
    }

    #[test]
    fn triangle_has_one_maximal_clique() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(maximal_cliques(&g, 10).unwrap(), vec![ids(&[0, 1, 2])]);
    }

    #[test]
    fn path_has_two_edges_as_cliques() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(maximal_cliques(&g, 10).unwrap(), vec![ids(&[0, 1]), ids(&[1, 2])]);
    }

    #[test]
    fn isolated_nodes_are_singletons() {
        let g = graph(3, &[(0, 1)]);
        assert_eq!(maximal_cliques(&g, 10).unwrap(), vec![ids(&[0, 1]), ids(&[2])]);
        assert!(maximal_cliques(&graph(0, &[]), 10).unwrap().is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        // three disjoint edges: three maximal cliques
        let g = graph(6, &[(0, 1), (2, 3), (4, 5)]);
        assert!(maximal_cliques(&g, 3).is_ok());
        let err = maximal_cliques(&g, 2).unwrap_err();
        assert!(matches!(
            err,
            Error::Budget {
                what: BudgetKind::MaximalCliques,
                budget: 2
            }
        ));
    }

    #[test]
    fn k_clique_budget_is_enforced() {
        let edges: Vec<(u32, u32)> = (0..8u32)
            .flat_map(|a| (a + 1..8).map(move |b| (a, b)))
            .collect();
        let g = graph(8, &edges);
        // one maximal clique, C(8,3) = 56 triangles
        let p = CpmParams::default();
        assert!(k_clique_communities(&g, &p, 56).is_ok());
        assert!(matches!(
            k_clique_communities(&g, &p, 55),
            Err(Error::Budget {
                what: BudgetKind::KCliques,
                ..
            })
        ));
    }

    #[test]
    fn triangles_sharing_an_edge_merge() {
        let g = graph(4, &[(0, 1), (1, 2), (0, 2), (1, 3), (2, 3)]);
        let c = k_clique_communities(&g, &CpmParams::default(), 100).unwrap();
        assert_eq!(c, vec![Community { id: 0, members: ids(&[0, 1, 2, 3]) }]);
    }

    #[test]
    fn triangles_sharing_a_node_overlap() {
        let g = graph(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]);
        let c = k_clique_communities(&g, &CpmParams::default(), 100).unwrap();
        assert_eq!(
            c,
            vec![
                Community { id: 0, members: ids(&[0, 1, 2]) },
                Community { id: 1, members: ids(&[2, 3, 4]) },
            ]
        );
    }

    #[test]
    fn triangle_free_graph_has_no_communities() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(k_clique_communities(&g, &CpmParams::default(), 100).unwrap().is_empty());
    }

    #[test]
    fn k_must_be_at_least_three() {
        assert!(CpmParams::new(2, EdgeRule::Or).is_err());
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let p = CpmParams { k: 2, edge_rule: EdgeRule::Or };
        assert!(k_clique_communities(&g, &p, 100).is_err());
    }

    #[test]
    fn k4_separates_what_k3_merges() {
        // two K4s sharing exactly two nodes
        let mut edges = Vec::new();
        for set in [[0u32, 1, 2, 3], [2, 3, 4, 5]] {
            for (a, b) in set.iter().tuple_combinations() {
                edges.push((*a, *b));
            }
        }
        let g = graph(6, &edges);
        let k3 = k_clique_communities(&g, &CpmParams::default(), 100).unwrap();
        assert_eq!(k3.len(), 1);
        let k4 = k_clique_communities(&g, &CpmParams::new(4, EdgeRule::Or).unwrap(), 100).unwrap();
        assert_eq!(
            k4.into_iter().map(|c| c.members).collect::<Vec<_>>(),
            vec![ids(&[0, 1, 2, 3]), ids(&[2, 3, 4, 5])]
        );
    }

    #[test]
    fn edges_are_canonical() {
        let g = graph(3, &[(2, 0), (1, 0), (0, 2)]);
        assert_eq!(g.edges(), vec![(t(0), t(1)), (t(0), t(2))]);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(t(2), t(0)));
    }
}
