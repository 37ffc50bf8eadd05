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

//! Asymmetric paradigmatic proximity and threshold neighborhoods.
//!
//! For a window with aggregated counts `N_i`, `N_j`, `N_ij`:
//!
//! ```text
//! P^α(i, j) = (N_ij / N_i)^α · (N_ij / N_j)^(1/α)
//! ```
//!
//! With `α > 1` the first ratio dominates and `j` must accompany most
//! occurrences of `i`; with `α < 1` the roles flip. The measure satisfies
//! `P^α(i, j) = P^(1/α)(j, i)` and reduces to the equivalence index
//! `N_ij² / (N_i · N_j)` at `α = 1`.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStore, TermId, TimeWindow, WindowCounts};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximityParams {
    /// Focus parameter, strictly positive.
    pub alpha: f64,
    /// Neighborhood threshold `s` in `[0, 1]`; membership requires `P > s`.
    pub threshold: f64,
    pub window: TimeWindow,
}

impl ProximityParams {
    pub fn new(alpha: f64, threshold: f64, window: TimeWindow) -> Result<Self> {
        let p = ProximityParams {
            alpha,
            threshold,
            window,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be a positive finite number, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParams(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.window.y1 > self.window.y2 {
            return Err(Error::InvalidParams(format!("empty window {}", self.window)));
        }
        Ok(())
    }
}

/// Same threshold and window, focus `1/α`.
pub fn dual_params(params: &ProximityParams) -> ProximityParams {
    ProximityParams {
        alpha: 1.0 / params.alpha,
        ..*params
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProximityValue {
    pub source: TermId,
    pub target: TermId,
    pub value: f64,
}

/// Result of evaluating the formula on raw counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// A ratio exceeded 1 and was clamped (only possible on lenient data).
    pub clamped: bool,
}

fn ratio(n_ij: u64, n: u64) -> (f64, bool) {
    if n_ij >= n {
        (1.0, n_ij > n)
    } else {
        (n_ij as f64 / n as f64, false)
    }
}

/// Evaluates `(n_ij/n_i)^α · (n_ij/n_j)^(1/α)`. Both marginals must be
/// positive. Exact `0` when `n_ij = 0` and exact `1` when both ratios are 1.
pub fn paradigmatic_proximity(n_ij: u64, n_i: u64, n_j: u64, alpha: f64) -> Evaluation {
    debug_assert!(n_i > 0 && n_j > 0);
    if n_ij == 0 {
        return Evaluation {
            value: 0.0,
            clamped: false,
        };
    }
    let (r_i, c_i) = ratio(n_ij, n_i);
    let (r_j, c_j) = ratio(n_ij, n_j);
    let clamped = c_i || c_j;
    let value = if r_i == 1.0 && r_j == 1.0 {
        1.0
    } else if alpha == 1.0 {
        r_i * r_j
    } else {
        (alpha * r_i.ln() + r_j.ln() / alpha).exp()
    };
    Evaluation { value, clamped }
}

/// Natural log of the proximity; `-inf` when `n_ij = 0`. Unlike the value
/// itself this does not underflow for extreme `α`.
pub fn ln_proximity(n_ij: u64, n_i: u64, n_j: u64, alpha: f64) -> f64 {
    if n_ij == 0 {
        return f64::NEG_INFINITY;
    }
    let (r_i, _) = ratio(n_ij, n_i);
    let (r_j, _) = ratio(n_ij, n_j);
    alpha * r_i.ln() + r_j.ln() / alpha
}

/// Proximity evaluator bound to one store and one window.
///
/// Clamped evaluations are tallied in [`ProximityIndex::clamp_count`].
#[derive(Debug)]
pub struct ProximityIndex<'s> {
    store: &'s CorpusStore,
    counts: WindowCounts,
    params: ProximityParams,
    clamped: AtomicU64,
}

impl<'s> ProximityIndex<'s> {
    pub fn new(store: &'s CorpusStore, params: ProximityParams) -> Result<Self> {
        params.validate()?;
        let counts = store.window_counts(params.window)?;
        if counts.total() == 0 {
            return Err(Error::DegenerateWindow(params.window));
        }
        Ok(Self::with_counts(store, counts, params))
    }

    /// Reuses counts that were already aggregated for `params.window`.
    pub fn with_counts(store: &'s CorpusStore, counts: WindowCounts, params: ProximityParams) -> Self {
        debug_assert_eq!(counts.window(), params.window);
        ProximityIndex {
            store,
            counts,
            params,
            clamped: AtomicU64::new(0),
        }
    }

    pub fn store(&self) -> &'s CorpusStore {
        self.store
    }

    pub fn counts(&self) -> &WindowCounts {
        &self.counts
    }

    pub fn params(&self) -> &ProximityParams {
        &self.params
    }

    /// Number of evaluations so far in which a ratio was clamped to 1.
    pub fn clamp_count(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }

    fn require_present(&self, t: TermId) -> Result<u64> {
        match self.counts.occurrence(t) {
            0 => Err(Error::UndefinedTerm {
                term: self.store.label(t).to_string(),
                window: self.params.window,
            }),
            n => Ok(n),
        }
    }

    /// `P^α(i, j)` at an explicit focus, sharing this index's window.
    pub fn proximity_at(&self, i: TermId, j: TermId, alpha: f64) -> Result<f64> {
        let n_i = self.require_present(i)?;
        let n_j = self.require_present(j)?;
        if i == j {
            return Ok(1.0);
        }
        let eval = paradigmatic_proximity(self.counts.cooccurrence(i, j), n_i, n_j, alpha);
        if eval.clamped {
            self.clamped.fetch_add(1, Ordering::Relaxed);
        }
        Ok(eval.value)
    }

    pub fn proximity(&self, i: TermId, j: TermId) -> Result<ProximityValue> {
        Ok(ProximityValue {
            source: i,
            target: j,
            value: self.proximity_at(i, j, self.params.alpha)?,
        })
    }

    /// `P^α(i, j)` for every co-occurring partner `j`, sorted by target id.
    /// Zero values are omitted.
    pub fn row(&self, i: TermId) -> Result<Vec<ProximityValue>> {
        self.require_present(i)?;
        let mut out = Vec::with_capacity(self.counts.partners(i).len());
        for &(j, _) in self.counts.partners(i) {
            let v = self.proximity(i, j)?;
            if v.value > 0.0 {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// `{ j ≠ i | P^α(i, j) > s }`.
    pub fn neighborhood(&self, i: TermId) -> Result<BTreeSet<TermId>> {
        Ok(self
            .row(i)?
            .into_iter()
            .filter(|v| v.value > self.params.threshold)
            .map(|v| v.target)
            .collect())
    }

    /// Neighborhood with values, sorted by descending value then label.
    pub fn ranked_neighbors(&self, i: TermId) -> Result<Vec<ProximityValue>> {
        let mut row: Vec<_> = self
            .row(i)?
            .into_iter()
            .filter(|v| v.value > self.params.threshold)
            .collect();
        row.sort_by(|a, b| {
            b.value
                .total_cmp(&a.value)
                .then_with(|| self.store.label(a.target).cmp(self.store.label(b.target)))
        });
        Ok(row)
    }

    /// Same counts, focus `1/α`.
    pub fn dual(&self) -> ProximityIndex<'s> {
        ProximityIndex::with_counts(self.store, self.counts.clone(), dual_params(&self.params))
    }
}

pub fn proximity(
    store: &CorpusStore,
    i: TermId,
    j: TermId,
    params: &ProximityParams,
) -> Result<ProximityValue> {
    ProximityIndex::new(store, *params)?.proximity(i, j)
}

pub fn proximity_row(store: &CorpusStore, i: TermId, params: &ProximityParams) -> Result<Vec<ProximityValue>> {
    ProximityIndex::new(store, *params)?.row(i)
}

pub fn neighborhood(store: &CorpusStore, i: TermId, params: &ProximityParams) -> Result<BTreeSet<TermId>> {
    ProximityIndex::new(store, *params)?.neighborhood(i)
}
