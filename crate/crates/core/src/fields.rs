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

//! Paradigmatic fields: communities with per-term profiles.
//!
//! Inside a community `C`, a term `w` is placed at
//!
//! ```text
//! i_s(w) = 1/|C| · Σ_{w'∈C} P^α(w', w)     (specificity, incoming)
//! i_g(w) = 1/|C| · Σ_{w'∈C} P^α(w, w')     (genericity, outgoing)
//! ```
//!
//! Both sums run over every member, `w` included, so each index is at least
//! `1/|C|`. Meso plots put `i_s` decreasing left to right and `i_g`
//! decreasing top to bottom; exports carry raw values and leave the axis
//! orientation to the renderer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cliques::Community;
use crate::corpus::{CorpusStore, TermId, TimeWindow, WindowCounts};
use crate::error::{Error, Result};
use crate::proximity::ProximityIndex;

/// Growth ratio at or above which a term renders fully red (a 150% increase).
pub const FULL_GROWTH_RATIO: f64 = 2.5;

/// Which counts a term's growth ratio compares between the two periods.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthBasis {
    /// Corpus-wide occurrences `N_w`.
    #[default]
    Occurrences,
    /// Co-occurrences of `w` with the other field members.
    IntraCooccurrences,
}

impl FromStr for GrowthBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occurrences" => Ok(GrowthBasis::Occurrences),
            "intra_cooccurrences" => Ok(GrowthBasis::IntraCooccurrences),
            other => Err(Error::InvalidParams(format!(
                "growth basis must be occurrences or intra_cooccurrences, got \"{other}\""
            ))),
        }
    }
}

impl fmt::Display for GrowthBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrowthBasis::Occurrences => "occurrences",
            GrowthBasis::IntraCooccurrences => "intra_cooccurrences",
        })
    }
}

/// Placement of the comparison period relative to the analysis window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreviousWindow {
    /// Equal-length window ending the year before `y1`.
    #[default]
    Adjacent,
    /// Equal-length window ending on `y1` itself.
    SharedBoundary,
}

impl PreviousWindow {
    pub fn of(self, w: TimeWindow) -> TimeWindow {
        w.preceding(self == PreviousWindow::SharedBoundary)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldOptions {
    pub growth_basis: GrowthBasis,
    pub previous: PreviousWindow,
    /// Focus for the indexes; defaults to the index's own α.
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermFieldProfile {
    #[serde(skip)]
    pub term: TermId,
    pub label: String,
    pub i_s: f64,
    pub i_g: f64,
    pub intra_weight: u64,
    /// `None` when the previous period has a zero base.
    pub growth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParadigmaticField {
    pub id: usize,
    /// Sorted by term id.
    pub members: Vec<TermFieldProfile>,
    pub window: TimeWindow,
    pub alpha: f64,
    pub label_generic: String,
    pub label_specific: String,
}

impl ParadigmaticField {
    pub fn term_ids(&self) -> impl Iterator<Item = TermId> + '_ {
        self.members.iter().map(|m| m.term)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&FieldDoc::from(self))?;
        s.push('\n');
        Ok(s)
    }
}

/// Wire form of a field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldDoc {
    pub id: usize,
    pub window: [i32; 2],
    pub alpha: f64,
    pub members: Vec<TermFieldProfile>,
    pub label_generic: String,
    pub label_specific: String,
}

impl From<&ParadigmaticField> for FieldDoc {
    fn from(f: &ParadigmaticField) -> Self {
        FieldDoc {
            id: f.id,
            window: [f.window.y1, f.window.y2],
            alpha: f.alpha,
            members: f.members.clone(),
            label_generic: f.label_generic.clone(),
            label_specific: f.label_specific.clone(),
        }
    }
}

impl FieldDoc {
    /// Resolves member labels against `store`.
    pub fn into_field(self, store: &CorpusStore) -> Result<ParadigmaticField> {
        let window = TimeWindow::new(self.window[0], self.window[1])?;
        let mut members = self.members;
        for m in &mut members {
            m.term = store.require_term(&m.label)?;
        }
        members.sort_by_key(|m| m.term);
        Ok(ParadigmaticField {
            id: self.id,
            members,
            window,
            alpha: self.alpha,
            label_generic: self.label_generic,
            label_specific: self.label_specific,
        })
    }
}

fn check_member(index: &ProximityIndex<'_>, members: &[TermId], w: TermId) -> Result<()> {
    if members.contains(&w) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "term \"{}\" is not a member of the field",
            index.store().label(w)
        )))
    }
}

fn mean_proximity(
    index: &ProximityIndex<'_>,
    members: &[TermId],
    alpha: f64,
    f: impl Fn(TermId) -> (TermId, TermId),
) -> Result<f64> {
    let mut sum = 0.0;
    for &other in members {
        let (a, b) = f(other);
        sum += index.proximity_at(a, b, alpha)?;
    }
    Ok(sum / members.len() as f64)
}

/// Mean incoming proximity of `w` from every member (itself included).
pub fn specificity_index(index: &ProximityIndex<'_>, members: &[TermId], w: TermId) -> Result<f64> {
    specificity_index_at(index, members, w, index.params().alpha)
}

pub fn specificity_index_at(
    index: &ProximityIndex<'_>,
    members: &[TermId],
    w: TermId,
    alpha: f64,
) -> Result<f64> {
    check_member(index, members, w)?;
    mean_proximity(index, members, alpha, |other| (other, w))
}

/// Mean outgoing proximity of `w` to every member (itself included).
pub fn genericity_index(index: &ProximityIndex<'_>, members: &[TermId], w: TermId) -> Result<f64> {
    genericity_index_at(index, members, w, index.params().alpha)
}

pub fn genericity_index_at(
    index: &ProximityIndex<'_>,
    members: &[TermId],
    w: TermId,
    alpha: f64,
) -> Result<f64> {
    check_member(index, members, w)?;
    mean_proximity(index, members, alpha, |other| (w, other))
}

/// `Σ_{w' ∈ C, w' ≠ w} N_{w w'}`.
pub fn intra_weight(counts: &WindowCounts, members: &[TermId], w: TermId) -> u64 {
    members
        .iter()
        .filter(|&&o| o != w)
        .map(|&o| counts.cooccurrence(w, o))
        .sum()
}

fn ratio(now: u64, before: u64) -> Option<f64> {
    (before > 0).then(|| now as f64 / before as f64)
}

/// `N_w(T) / N_w(T_)`; `None` when the previous period has no occurrences.
pub fn term_growth(
    store: &CorpusStore,
    w: TermId,
    window: TimeWindow,
    previous: PreviousWindow,
) -> Result<Option<f64>> {
    let now = store.window_counts(window)?;
    let before = store.window_counts(previous.of(window))?;
    Ok(ratio(now.occurrence(w), before.occurrence(w)))
}

/// Builds the field for `community`, profiling every member.
///
/// `label_generic` is the member with the largest `i_g` and `label_specific`
/// the one with the largest `i_s`; ties go to the larger intra weight, then to
/// the lexicographically smaller label.
pub fn build_field(
    index: &ProximityIndex<'_>,
    community: &Community,
    options: &FieldOptions,
) -> Result<ParadigmaticField> {
    let window = index.params().window;
    let previous = index.store().window_counts(options.previous.of(window))?;
    build_field_with_previous(index, community, options, &previous)
}

/// As [`build_field`], reusing counts already aggregated for the previous
/// period.
pub fn build_field_with_previous(
    index: &ProximityIndex<'_>,
    community: &Community,
    options: &FieldOptions,
    previous: &WindowCounts,
) -> Result<ParadigmaticField> {
    let store = index.store();
    let alpha = options.alpha.unwrap_or(index.params().alpha);
    let members = &community.members;
    let counts = index.counts();

    let mut profiles = Vec::with_capacity(members.len());
    for &w in members {
        let i_s = specificity_index_at(index, members, w, alpha)?;
        let i_g = genericity_index_at(index, members, w, alpha)?;
        let weight = intra_weight(counts, members, w);
        let growth = match options.growth_basis {
            GrowthBasis::Occurrences => ratio(counts.occurrence(w), previous.occurrence(w)),
            GrowthBasis::IntraCooccurrences => ratio(weight, intra_weight(previous, members, w)),
        };
        profiles.push(TermFieldProfile {
            term: w,
            label: store.label(w).to_string(),
            i_s,
            i_g,
            intra_weight: weight,
            growth,
        });
    }

    let pick = |key: fn(&TermFieldProfile) -> f64| -> String {
        profiles
            .iter()
            .max_by(|a, b| {
                key(a)
                    .total_cmp(&key(b))
                    .then(a.intra_weight.cmp(&b.intra_weight))
                    .then_with(|| b.label.cmp(&a.label))
            })
            .map(|p| p.label.clone())
            .unwrap_or_default()
    };
    let label_generic = pick(|p| p.i_g);
    let label_specific = pick(|p| p.i_s);

    Ok(ParadigmaticField {
        id: community.id,
        members: profiles,
        window: index.params().window,
        alpha,
        label_generic,
        label_specific,
    })
}

/// Maps a growth ratio to a fill color: blue below 1, white at 1, deep red
/// from [`FULL_GROWTH_RATIO`] up. `None` renders light grey.
pub fn growth_color(ratio: Option<f64>) -> String {
    let Some(r) = ratio else {
        return "#d9d9d9".to_string();
    };
    let lerp = |a: u8, b: u8, t: f64| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    let (r, g, b) = if r < 1.0 {
        let t = r.max(0.0);
        (lerp(0x21, 0xff, t), lerp(0x66, 0xff, t), lerp(0xac, 0xff, t))
    } else {
        let t = ((r - 1.0) / (FULL_GROWTH_RATIO - 1.0)).min(1.0);
        (lerp(0xff, 0xb2, t), lerp(0xff, 0x18, t), lerp(0xff, 0x2b, t))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}
