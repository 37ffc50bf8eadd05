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

//! Macro-level map: fields as nodes, shared terms as edge weights.
//!
//! Node size derives from the mean normalized occurrence share of a field's
//! members, `p_i^T = N_i(T) / Σ_j N_j(T)`. Activity is the mean share ratio
//! between the window and the period before it:
//!
//! ```text
//! A_C = 1/|C| · Σ_{i∈C} p_i^T / p_i^{T-}
//! ```
//!
//! Members with a zero previous share are left out of the mean and tallied.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStore, TermId, TimeWindow, WindowCounts};
use crate::error::{Error, Result};
use crate::fields::{ParadigmaticField, PreviousWindow};

/// Inclusive bounds on field size for the map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SizeFilter {
    pub min_terms: usize,
    pub max_terms: usize,
}

impl SizeFilter {
    pub fn new(min_terms: usize, max_terms: usize) -> Result<Self> {
        if min_terms > max_terms {
            return Err(Error::InvalidParams(format!(
                "filter minimum {min_terms} exceeds maximum {max_terms}"
            )));
        }
        Ok(SizeFilter {
            min_terms,
            max_terms,
        })
    }

    pub fn admits(&self, size: usize) -> bool {
        (self.min_terms..=self.max_terms).contains(&size)
    }
}

impl Default for SizeFilter {
    /// Fields of 6 to 20 terms.
    fn default() -> Self {
        SizeFilter {
            min_terms: 6,
            max_terms: 20,
        }
    }
}

impl std::str::FromStr for SizeFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("filter must look like MIN:MAX, got \"{s}\""));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        SizeFilter::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Activity {
    pub value: f64,
    /// Members left out because their previous share was zero.
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroNode {
    pub field_id: usize,
    pub label: String,
    pub term_count: usize,
    pub size_raw: f64,
    pub size_display: f64,
    pub activity: Option<f64>,
    pub excluded_members: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroEdge {
    pub field_a: usize,
    pub field_b: usize,
    pub weight: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroMap {
    pub window: TimeWindow,
    pub filter: SizeFilter,
    pub log_base: f64,
    pub nodes: Vec<MacroNode>,
    pub edges: Vec<MacroEdge>,
}

impl MacroMap {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// `N_i / Σ_j N_j` for the counted window.
pub fn normalized_share(counts: &WindowCounts, i: TermId) -> Result<f64> {
    match counts.total() {
        0 => Err(Error::DegenerateWindow(counts.window())),
        total => Ok(counts.occurrence(i) as f64 / total as f64),
    }
}

fn activity_of(now: &WindowCounts, before: &WindowCounts, members: &[TermId]) -> Option<Activity> {
    if now.total() == 0 || before.total() == 0 {
        return None;
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for &m in members {
        let prev = before.occurrence(m);
        if prev == 0 {
            continue;
        }
        let p_now = now.occurrence(m) as f64 / now.total() as f64;
        let p_prev = prev as f64 / before.total() as f64;
        sum += p_now / p_prev;
        used += 1;
    }
    (used > 0).then(|| Activity {
        value: sum / used as f64,
        excluded: members.len() - used,
    })
}

/// `A_C` for `members` over `window` against the previous period.
pub fn field_activity(
    store: &CorpusStore,
    members: &[TermId],
    window: TimeWindow,
    previous: PreviousWindow,
) -> Result<Activity> {
    let now = store.window_counts(window)?;
    let before = store.window_counts(previous.of(window))?;
    if now.total() == 0 {
        return Err(Error::DegenerateWindow(now.window()));
    }
    if before.total() == 0 {
        return Err(Error::DegenerateWindow(before.window()));
    }
    activity_of(&now, &before, members).ok_or(Error::UndefinedActivity)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapOptions {
    pub filter: SizeFilter,
    pub log_base: f64,
    pub previous: PreviousWindow,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            filter: SizeFilter::default(),
            log_base: 10.0,
            previous: PreviousWindow::Adjacent,
        }
    }
}

/// Assembles the field graph for `window`.
///
/// Only fields whose size passes the filter become nodes. Any two surviving
/// fields sharing at least one term are linked with the shared-term count as
/// weight. Display size is `1 + log_b(size_raw / smallest size_raw)`, so the
/// smallest node is 1.0; nodes with no occurrences sit at the 1.0 floor.
pub fn build_macro_map(
    fields: &[ParadigmaticField],
    store: &CorpusStore,
    window: TimeWindow,
    options: &MapOptions,
) -> Result<MacroMap> {
    if !(options.log_base.is_finite() && options.log_base > 1.0) {
        return Err(Error::InvalidParams(format!(
            "log base must be greater than 1, got {}",
            options.log_base
        )));
    }
    let now = store.window_counts(window)?;
    if now.total() == 0 {
        return Err(Error::DegenerateWindow(window));
    }
    let before = store.window_counts(options.previous.of(window))?;

    let kept: Vec<&ParadigmaticField> = fields
        .iter()
        .filter(|f| options.filter.admits(f.len()))
        .collect();

    let mut nodes: Vec<MacroNode> = kept
        .iter()
        .map(|f| {
            let members: Vec<TermId> = f.term_ids().collect();
            let size_raw = members
                .iter()
                .map(|&m| now.occurrence(m) as f64 / now.total() as f64)
                .sum::<f64>()
                / members.len().max(1) as f64;
            let activity = activity_of(&now, &before, &members);
            MacroNode {
                field_id: f.id,
                label: f.label_generic.clone(),
                term_count: members.len(),
                size_raw,
                size_display: 1.0,
                activity: activity.map(|a| a.value),
                excluded_members: activity.map_or(members.len(), |a| a.excluded),
            }
        })
        .collect();

    let smallest = nodes
        .iter()
        .map(|n| n.size_raw)
        .filter(|&s| s > 0.0)
        .min_by(f64::total_cmp);
    if let Some(min) = smallest {
        for n in &mut nodes {
            if n.size_raw > 0.0 {
                n.size_display = (1.0 + (n.size_raw / min).log(options.log_base)).max(1.0);
            }
        }
    }

    let sets: Vec<BTreeSet<TermId>> = kept.iter().map(|f| f.term_ids().collect()).collect();
    let mut edges = Vec::new();
    for a in 0..kept.len() {
        for b in a + 1..kept.len() {
            let weight = sets[a].intersection(&sets[b]).count();
            if weight > 0 {
                let (fa, fb) = (kept[a].id.min(kept[b].id), kept[a].id.max(kept[b].id));
                edges.push(MacroEdge {
                    field_a: fa,
                    field_b: fb,
                    weight,
                });
            }
        }
    }
    nodes.sort_by_key(|n| n.field_id);
    edges.sort_by_key(|e| (e.field_a, e.field_b));

    Ok(MacroMap {
        window,
        filter: options.filter,
        log_base: options.log_base,
        nodes,
        edges,
    })
}
