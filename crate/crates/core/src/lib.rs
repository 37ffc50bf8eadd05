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

//! Three-level co-word maps of a scientific domain.
//!
//! Starting from per-year term occurrence and co-occurrence counts this crate
//! computes:
//!
//! * **micro** level: the asymmetric proximity `P^α(i,j) = (N_ij/N_i)^α · (N_ij/N_j)^(1/α)`
//!   and thresholded term neighborhoods ([`proximity`]);
//! * **meso** level: overlapping term communities found by k-clique percolation
//!   on the thresholded graph ([`cliques`]), turned into fields with per-term
//!   specificity/genericity profiles ([`fields`]);
//! * **macro** level: a graph of fields weighted by shared terms, with
//!   per-field activity growth and display sizes ([`macromap`]).
//!
//! [`pipeline`] wires the stages together for the CLI and the query service.

pub mod cliques;
pub mod corpus;
pub mod error;
pub mod export;
pub mod fields;
pub mod macromap;
pub mod pipeline;
pub mod proximity;

pub use cliques::{CpmParams, EdgeRule, LexicalGraph};
pub use corpus::{CorpusStore, TermId, TimeWindow, Validation, WindowCounts};
pub use error::{Error, Result};
pub use fields::{GrowthBasis, ParadigmaticField, PreviousWindow};
pub use macromap::MacroMap;
pub use proximity::{ProximityIndex, ProximityParams};
