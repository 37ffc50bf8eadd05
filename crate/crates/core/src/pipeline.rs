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

//! End-to-end runs shared by the command line and the query service.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cliques::{build_lexical_graph, k_clique_communities, Community, CpmParams, EdgeRule, LexicalGraph, DEFAULT_CLIQUE_BUDGET};
use crate::corpus::{CorpusStore, TermId, TimeWindow};
use crate::error::{Error, Result};
use crate::fields::{build_field_with_previous, FieldDoc, FieldOptions, GrowthBasis, ParadigmaticField, PreviousWindow};
use crate::macromap::{build_macro_map, MacroMap, MapOptions, SizeFilter};
use crate::proximity::{ProximityIndex, ProximityParams};

/// Everything that determines a meso-level result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MesoConfig {
    pub window: TimeWindow,
    pub alpha: f64,
    pub threshold: f64,
    pub k: usize,
    pub edge_rule: EdgeRule,
    pub growth_basis: GrowthBasis,
    pub previous: PreviousWindow,
    pub clique_budget: usize,
}

impl MesoConfig {
    pub fn new(window: TimeWindow, alpha: f64, threshold: f64) -> Self {
        MesoConfig {
            window,
            alpha,
            threshold,
            k: 3,
            edge_rule: EdgeRule::Or,
            growth_basis: GrowthBasis::Occurrences,
            previous: PreviousWindow::Adjacent,
            clique_budget: DEFAULT_CLIQUE_BUDGET,
        }
    }

    pub fn proximity_params(&self) -> Result<ProximityParams> {
        ProximityParams::new(self.alpha, self.threshold, self.window)
    }

    pub fn cpm_params(&self) -> Result<CpmParams> {
        CpmParams::new(self.k, self.edge_rule)
    }
}

#[derive(Clone, Debug)]
pub struct MesoResult {
    pub graph: LexicalGraph,
    pub communities: Vec<Community>,
    pub fields: Vec<ParadigmaticField>,
}

impl MesoResult {
    /// Distinct terms belonging to at least one field.
    pub fn coverage(&self) -> usize {
        self.membership().len()
    }

    /// Terms belonging to two or more fields.
    pub fn overlap(&self) -> usize {
        self.membership().values().filter(|&&n| n >= 2).count()
    }

    fn membership(&self) -> BTreeMap<TermId, usize> {
        let mut m = BTreeMap::new();
        for c in &self.communities {
            for &t in &c.members {
                *m.entry(t).or_insert(0) += 1;
            }
        }
        m
    }
}

/// Lexical graph, k-clique communities, and field profiles for `cfg`.
pub fn run_meso(store: &CorpusStore, cfg: &MesoConfig) -> Result<MesoResult> {
    let params = cfg.proximity_params()?;
    let cpm = cfg.cpm_params()?;
    let index = ProximityIndex::new(store, params)?;
    let previous = store.window_counts(cfg.previous.of(cfg.window))?;
    let graph = build_lexical_graph(&index, cpm.edge_rule)?;
    let communities = k_clique_communities(&graph, &cpm, cfg.clique_budget)?;
    let options = FieldOptions {
        growth_basis: cfg.growth_basis,
        previous: cfg.previous,
        alpha: None,
    };
    let fields = communities
        .iter()
        .map(|c| build_field_with_previous(&index, c, &options, &previous))
        .collect::<Result<Vec<_>>>()?;
    if index.clamp_count() > 0 {
        log::warn!("{} proximity evaluations clamped a ratio above 1", index.clamp_count());
    }
    Ok(MesoResult {
        graph,
        communities,
        fields,
    })
}

/// Wire form of a complete meso run: the configuration plus every field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSet {
    pub config: MesoConfig,
    pub fields: Vec<FieldDoc>,
}

impl FieldSet {
    pub fn new(config: MesoConfig, fields: &[ParadigmaticField]) -> Self {
        FieldSet {
            config,
            fields: fields.iter().map(FieldDoc::from).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn resolve(self, store: &CorpusStore) -> Result<(MesoConfig, Vec<ParadigmaticField>)> {
        let fields = self
            .fields
            .into_iter()
            .map(|f| f.into_field(store))
            .collect::<Result<Vec<_>>>()?;
        if let Some(f) = fields.iter().find(|f| f.window != self.config.window) {
            return Err(Error::InvalidParams(format!(
                "field {} was computed for window {}, not {}",
                f.id, f.window, self.config.window
            )));
        }
        Ok((self.config, fields))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MacroConfig {
    pub filter: SizeFilter,
    pub log_base: f64,
}

impl Default for MacroConfig {
    fn default() -> Self {
        MacroConfig {
            filter: SizeFilter::default(),
            log_base: 10.0,
        }
    }
}

pub fn run_macro(
    store: &CorpusStore,
    meso: &MesoConfig,
    fields: &[ParadigmaticField],
    cfg: &MacroConfig,
) -> Result<MacroMap> {
    let options = MapOptions {
        filter: cfg.filter,
        log_base: cfg.log_base,
        previous: meso.previous,
    };
    build_macro_map(fields, store, meso.window, &options)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborEntry {
    pub label: String,
    pub value: f64,
}

/// Neighborhood of one term, as printed by the CLI and served over HTTP.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborsPayload {
    pub term: String,
    pub alpha: f64,
    pub s: f64,
    pub window: [i32; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_alpha: Option<f64>,
    pub neighbors: Vec<NeighborEntry>,
}

pub fn neighbors_payload(store: &CorpusStore, term: TermId, params: ProximityParams) -> Result<NeighborsPayload> {
    let index = ProximityIndex::new(store, params)?;
    let neighbors = index
        .ranked_neighbors(term)?
        .into_iter()
        .map(|v| NeighborEntry {
            label: store.label(v.target).to_string(),
            value: v.value,
        })
        .collect();
    Ok(NeighborsPayload {
        term: store.label(term).to_string(),
        alpha: params.alpha,
        s: params.threshold,
        window: [params.window.y1, params.window.y2],
        dual_alpha: None,
        neighbors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub threshold: f64,
    pub k: usize,
    pub fields: Option<usize>,
    pub coverage: Option<usize>,
    pub overlap: Option<usize>,
    pub status: String,
}

/// Runs the meso pipeline for every `(α, s, k)` combination. Budget errors
/// are recorded per cell; other errors abort.
pub fn sweep(
    store: &CorpusStore,
    base: &MesoConfig,
    alphas: &[f64],
    thresholds: &[f64],
    ks: &[usize],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &threshold in thresholds {
            for &k in ks {
                let cfg = MesoConfig {
                    alpha,
                    threshold,
                    k,
                    ..*base
                };
                let row = match run_meso(store, &cfg) {
                    Ok(r) => SweepRow {
                        alpha,
                        threshold,
                        k,
                        fields: Some(r.fields.len()),
                        coverage: Some(r.coverage()),
                        overlap: Some(r.overlap()),
                        status: "ok".into(),
                    },
                    Err(e @ Error::Budget { .. }) => SweepRow {
                        alpha,
                        threshold,
                        k,
                        fields: None,
                        coverage: None,
                        overlap: None,
                        status: e.to_string(),
                    },
                    Err(e) => return Err(e),
                };
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["alpha", "threshold", "k", "fields", "coverage", "overlap", "status"])
        .map_err(std::io::Error::from)?;
    let opt = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.alpha.to_string(),
            r.threshold.to_string(),
            r.k.to_string(),
            opt(r.fields),
            opt(r.coverage),
            opt(r.overlap),
            r.status.clone(),
        ])
        .map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
