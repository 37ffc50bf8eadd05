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

use std::fmt;

use crate::corpus::TimeWindow;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}, line {line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("co-occurrence of \"{term_a}\" and \"{term_b}\" in {year} is {count}, above min occurrence {bound}")]
    Validation {
        term_a: String,
        term_b: String,
        year: i32,
        count: u64,
        bound: u64,
    },

    #[error("malformed store: {0}")]
    InvalidStore(String),

    #[error("window {window} is outside the corpus year range {first}..={last}")]
    Range {
        window: TimeWindow,
        first: i32,
        last: i32,
    },

    #[error("corpus has no years")]
    EmptyCorpus,

    #[error("term \"{term}\" has no occurrences in window {window}")]
    UndefinedTerm { term: String, window: TimeWindow },

    #[error("unknown term \"{0}\"")]
    UnknownTerm(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("{what} budget of {budget} exceeded")]
    Budget { what: BudgetKind, budget: usize },

    #[error("window {0} has zero total occurrences")]
    DegenerateWindow(TimeWindow),

    #[error("field activity is undefined: no member occurs in the previous window")]
    UndefinedActivity,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    MaximalCliques,
    KCliques,
}

impl fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetKind::MaximalCliques => f.write_str("maximal-clique"),
            BudgetKind::KCliques => f.write_str("k-clique"),
        }
    }
}
