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

//! Occurrence and co-occurrence count time series.
//!
//! A [`CorpusStore`] holds, for every year, the number of documents mentioning
//! each term and the number mentioning each unordered pair of terms. Pairs are
//! keyed once as `(min id, max id)`. The store is immutable once built; all
//! window aggregation goes through [`CorpusStore::window_counts`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Dense term identifier. Ids follow the lexicographic order of the
/// normalized labels, so a store's numbering does not depend on input order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Inclusive range of calendar years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeWindow {
    pub y1: i32,
    pub y2: i32,
}

impl TimeWindow {
    pub fn new(y1: i32, y2: i32) -> Result<Self> {
        if y1 > y2 {
            return Err(Error::InvalidParams(format!(
                "window start {y1} is after its end {y2}"
            )));
        }
        Ok(TimeWindow { y1, y2 })
    }

    pub fn single(year: i32) -> Self {
        TimeWindow { y1: year, y2: year }
    }

    /// Number of years covered.
    pub fn span(&self) -> i32 {
        self.y2 - self.y1 + 1
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.y1..=self.y2).contains(&year)
    }

    /// The equal-length window right before this one. With `share_boundary`
    /// the two windows overlap on `y1` (1999-2002 before 2002-2005).
    pub fn preceding(&self, share_boundary: bool) -> TimeWindow {
        let len = self.span();
        let end = if share_boundary { self.y1 } else { self.y1 - 1 };
        TimeWindow {
            y1: end - len + 1,
            y2: end,
        }
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.y1, self.y2)
    }
}

impl FromStr for TimeWindow {
    type Err = Error;

    /// Parses `Y1:Y2`, or a single year `Y`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("window must look like Y1:Y2, got \"{s}\""));
        match s.split_once(':') {
            Some((a, b)) => {
                let y1 = a.trim().parse().map_err(|_| bad())?;
                let y2 = b.trim().parse().map_err(|_| bad())?;
                TimeWindow::new(y1, y2)
            }
            None => Ok(TimeWindow::single(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

/// What to do when a pair count exceeds one of its occurrence counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validation {
    Strict,
    #[default]
    Lenient,
}

impl FromStr for Validation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Validation::Strict),
            "lenient" => Ok(Validation::Lenient),
            other => Err(Error::InvalidParams(format!(
                "validation must be strict or lenient, got \"{other}\""
            ))),
        }
    }
}

/// NFC, lowercase, and runs of whitespace collapsed to one space.
pub fn normalize_label(raw: &str) -> String {
    let nfc: String = raw.nfc().collect();
    nfc.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccurrenceRecord {
    pub label: String,
    pub year: i32,
    pub count: u64,
    /// 1-based source line, when the record came from a file.
    pub line: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CooccurrenceRecord {
    pub label_a: String,
    pub label_b: String,
    pub year: i32,
    pub count: u64,
    pub line: Option<u64>,
}

/// Counts for a single year. Missing entries are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct YearCounts {
    pub year: i32,
    pub occurrences: BTreeMap<TermId, u64>,
    pub cooccurrences: BTreeMap<(TermId, TermId), u64>,
}

impl YearCounts {
    pub fn occurrence(&self, t: TermId) -> u64 {
        self.occurrences.get(&t).copied().unwrap_or(0)
    }

    pub fn cooccurrence(&self, a: TermId, b: TermId) -> u64 {
        self.cooccurrences
            .get(&pair_key(a, b))
            .copied()
            .unwrap_or(0)
    }
}

pub(crate) fn pair_key(a: TermId, b: TermId) -> (TermId, TermId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A pair whose count exceeded `min(occ(a), occ(b))` during lenient ingestion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IngestWarning {
    pub term_a: String,
    pub term_b: String,
    pub year: i32,
    pub count: u64,
    pub bound: u64,
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "co-occurrence of \"{}\" and \"{}\" in {} is {}, above min occurrence {}",
            self.term_a, self.term_b, self.year, self.count, self.bound
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct IngestReport {
    pub warnings: Vec<IngestWarning>,
}

/// Per-term and per-pair counts summed over a window.
#[derive(Clone, Debug)]
pub struct WindowCounts {
    window: TimeWindow,
    occurrences: Vec<u64>,
    pairs: BTreeMap<(TermId, TermId), u64>,
    partners: Vec<Vec<(TermId, u64)>>,
    total: u64,
}

impl WindowCounts {
    pub fn window(&self) -> TimeWindow {
        self.window
    }

    /// `N_i` for the window.
    pub fn occurrence(&self, t: TermId) -> u64 {
        self.occurrences.get(t.index()).copied().unwrap_or(0)
    }

    /// `N_ij` for the window, independent of argument order.
    pub fn cooccurrence(&self, a: TermId, b: TermId) -> u64 {
        self.pairs.get(&pair_key(a, b)).copied().unwrap_or(0)
    }

    /// Pairs with a positive windowed count, in `(min id, max id)` order.
    pub fn pairs(&self) -> impl Iterator<Item = ((TermId, TermId), u64)> + '_ {
        self.pairs.iter().map(|(k, v)| (*k, *v))
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Co-occurring partners of `t`, sorted by id.
    pub fn partners(&self, t: TermId) -> &[(TermId, u64)] {
        self.partners.get(t.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Terms with `N_i > 0`.
    pub fn present_terms(&self) -> impl Iterator<Item = TermId> + '_ {
        self.occurrences
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0)
            .map(|(i, _)| TermId(i as u32))
    }

    /// `Σ_j N_j` over the whole vocabulary.
    pub fn total(&self) -> u64 {
        self.total
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusStore {
    vocabulary: Vec<String>,
    index: HashMap<String, TermId>,
    years: Vec<YearCounts>,
    provenance: String,
}

impl CorpusStore {
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn term_count(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = TermId> {
        (0..self.vocabulary.len() as u32).map(TermId)
    }

    pub fn label(&self, t: TermId) -> &str {
        &self.vocabulary[t.index()]
    }

    /// Looks a label up after normalizing it.
    pub fn term_id(&self, label: &str) -> Option<TermId> {
        self.index.get(&normalize_label(label)).copied()
    }

    pub fn require_term(&self, label: &str) -> Result<TermId> {
        self.term_id(label)
            .ok_or_else(|| Error::UnknownTerm(label.to_string()))
    }

    pub fn years(&self) -> &[YearCounts] {
        &self.years
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        Some((self.years.first()?.year, self.years.last()?.year))
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn pair_count(&self) -> usize {
        let keys: BTreeSet<_> = self
            .years
            .iter()
            .flat_map(|y| y.cooccurrences.keys())
            .collect();
        keys.len()
    }

    pub fn check_window(&self, w: TimeWindow) -> Result<()> {
        let (first, last) = self.year_range().ok_or(Error::EmptyCorpus)?;
        if w.y1 < first || w.y2 > last {
            return Err(Error::Range {
                window: w,
                first,
                last,
            });
        }
        Ok(())
    }

    /// Sums occurrence and co-occurrence counts over `w`.
    pub fn window_counts(&self, w: TimeWindow) -> Result<WindowCounts> {
        self.check_window(w)?;
        let n = self.vocabulary.len();
        let mut occurrences = vec![0u64; n];
        let mut pairs: BTreeMap<(TermId, TermId), u64> = BTreeMap::new();
        for year in self.years.iter().filter(|y| w.contains(y.year)) {
            for (t, c) in &year.occurrences {
                occurrences[t.index()] += c;
            }
            for (k, c) in &year.cooccurrences {
                *pairs.entry(*k).or_default() += c;
            }
        }
        pairs.retain(|_, c| *c > 0);
        let mut partners = vec![Vec::new(); n];
        for (&(a, b), &c) in &pairs {
            partners[a.index()].push((b, c));
            partners[b.index()].push((a, c));
        }
        for p in &mut partners {
            p.sort_unstable();
        }
        let total = occurrences.iter().sum();
        Ok(WindowCounts {
            window: w,
            occurrences,
            pairs,
            partners,
            total,
        })
    }

    /// `Σ_j N_j` over the vocabulary for window `w`.
    pub fn total_occurrences(&self, w: TimeWindow) -> Result<u64> {
        self.check_window(w)?;
        Ok(self
            .years
            .iter()
            .filter(|y| w.contains(y.year))
            .flat_map(|y| y.occurrences.values())
            .sum())
    }

    /// Canonical JSON export: ids ascending, pairs sorted, no run metadata
    /// besides `provenance`.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.to_doc())?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StoreDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 over the canonical export with the provenance blanked.
    pub fn fingerprint(&self) -> String {
        let mut doc = self.to_doc();
        doc.provenance.clear();
        let bytes = serde_json::to_vec(&doc).expect("store serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn to_doc(&self) -> StoreDoc {
        StoreDoc {
            vocabulary: self.vocabulary.clone(),
            years: self
                .years
                .iter()
                .map(|y| YearDoc {
                    year: y.year,
                    occ: y.occurrences.iter().map(|(t, c)| (t.0, *c)).collect(),
                    cooc: y
                        .cooccurrences
                        .iter()
                        .map(|(&(a, b), &c)| [a.0 as u64, b.0 as u64, c])
                        .collect(),
                })
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    fn from_doc(doc: StoreDoc) -> Result<Self> {
        let bad = |m: String| Error::InvalidStore(m);
        let n = doc.vocabulary.len();
        let mut index = HashMap::with_capacity(n);
        for (i, label) in doc.vocabulary.iter().enumerate() {
            if label.is_empty() || normalize_label(label) != *label {
                return Err(bad(format!("label {label:?} is not normalized")));
            }
            if index.insert(label.clone(), TermId(i as u32)).is_some() {
                return Err(bad(format!("duplicate label {label:?}")));
            }
        }
        let check_id = |id: u64| -> Result<TermId> {
            if (id as usize) < n {
                Ok(TermId(id as u32))
            } else {
                Err(bad(format!("term id {id} outside vocabulary of {n}")))
            }
        };
        let mut years: Vec<YearCounts> = Vec::with_capacity(doc.years.len());
        for y in doc.years {
            if let Some(prev) = years.last() {
                if prev.year >= y.year {
                    return Err(bad(format!("years not strictly increasing at {}", y.year)));
                }
            }
            let mut counts = YearCounts {
                year: y.year,
                ..Default::default()
            };
            for (id, c) in y.occ {
                counts.occurrences.insert(check_id(id as u64)?, c);
            }
            for [a, b, c] in y.cooc {
                let (a, b) = (check_id(a)?, check_id(b)?);
                if a >= b {
                    return Err(bad(format!("pair [{}, {}] is not in (min, max) order", a.0, b.0)));
                }
                if counts.cooccurrences.insert((a, b), c).is_some() {
                    return Err(bad(format!("duplicate pair [{}, {}] in {}", a.0, b.0, y.year)));
                }
            }
            years.push(counts);
        }
        Ok(CorpusStore {
            vocabulary: doc.vocabulary,
            index,
            years,
            provenance: doc.provenance,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StoreDoc {
    vocabulary: Vec<String>,
    years: Vec<YearDoc>,
    provenance: String,
}

#[derive(Serialize, Deserialize)]
struct YearDoc {
    year: i32,
    occ: BTreeMap<u32, u64>,
    cooc: Vec<[u64; 3]>,
}

fn record_error(line: Option<u64>, message: String) -> Error {
    Error::Parse {
        source_name: "record".to_string(),
        line: line.unwrap_or(0),
        message,
    }
}

/// Builds a store from occurrence and co-occurrence records.
///
/// Duplicate `(term, year)` and `(pair, year)` records are summed. Labels are
/// normalized; terms that only appear in co-occurrence records still enter the
/// vocabulary (with zero occurrences). Self-pairs are rejected.
pub fn ingest<O, C>(
    occurrences: O,
    cooccurrences: C,
    validation: Validation,
    provenance: impl Into<String>,
) -> Result<(CorpusStore, IngestReport)>
where
    O: IntoIterator<Item = Result<OccurrenceRecord>>,
    C: IntoIterator<Item = Result<CooccurrenceRecord>>,
{
    let mut occ = Vec::new();
    for r in occurrences {
        let mut r = r?;
        r.label = normalize_label(&r.label);
        if r.label.is_empty() {
            return Err(record_error(r.line, "empty term label".into()));
        }
        occ.push(r);
    }
    let mut cooc = Vec::new();
    for r in cooccurrences {
        let mut r = r?;
        r.label_a = normalize_label(&r.label_a);
        r.label_b = normalize_label(&r.label_b);
        if r.label_a.is_empty() || r.label_b.is_empty() {
            return Err(record_error(r.line, "empty term label".into()));
        }
        if r.label_a == r.label_b {
            return Err(record_error(
                r.line,
                format!("self-pair \"{}\" is not allowed", r.label_a),
            ));
        }
        cooc.push(r);
    }

    let labels: BTreeSet<&str> = occ
        .iter()
        .map(|r| r.label.as_str())
        .chain(cooc.iter().flat_map(|r| [r.label_a.as_str(), r.label_b.as_str()]))
        .collect();
    let vocabulary: Vec<String> = labels.into_iter().map(str::to_string).collect();
    let index: HashMap<String, TermId> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), TermId(i as u32)))
        .collect();

    fn year(by_year: &mut BTreeMap<i32, YearCounts>, y: i32) -> &mut YearCounts {
        by_year.entry(y).or_insert_with(|| YearCounts {
            year: y,
            ..Default::default()
        })
    }
    let mut by_year: BTreeMap<i32, YearCounts> = BTreeMap::new();
    for r in &occ {
        *year(&mut by_year, r.year)
            .occurrences
            .entry(index[&r.label])
            .or_default() += r.count;
    }
    for r in &cooc {
        let key = pair_key(index[&r.label_a], index[&r.label_b]);
        *year(&mut by_year, r.year)
            .cooccurrences
            .entry(key)
            .or_default() += r.count;
    }
    for y in by_year.values_mut() {
        y.occurrences.retain(|_, c| *c > 0);
        y.cooccurrences.retain(|_, c| *c > 0);
    }

    let mut report = IngestReport::default();
    for y in by_year.values() {
        for (&(a, b), &count) in &y.cooccurrences {
            let bound = y.occurrence(a).min(y.occurrence(b));
            if count > bound {
                let (term_a, term_b) = (vocabulary[a.index()].clone(), vocabulary[b.index()].clone());
                match validation {
                    Validation::Strict => {
                        return Err(Error::Validation {
                            term_a,
                            term_b,
                            year: y.year,
                            count,
                            bound,
                        })
                    }
                    Validation::Lenient => {
                        let w = IngestWarning {
                            term_a,
                            term_b,
                            year: y.year,
                            count,
                            bound,
                        };
                        log::warn!("{w}");
                        report.warnings.push(w);
                    }
                }
            }
        }
    }

    Ok((
        CorpusStore {
            vocabulary,
            index,
            years: by_year.into_values().collect(),
            provenance: provenance.into(),
        },
        report,
    ))
}

fn csv_reader<R: Read>(reader: R, expected: &[&str], source_name: &str) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        line: 1,
        message: e.to_string(),
    })?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            source_name: source_name.to_string(),
            line: 1,
            message: format!("expected header {}, got {}", expected.join(","), got.join(",")),
        });
    }
    Ok(rdr)
}

fn parse_field<T: FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
    source_name: &str,
    line: u64,
) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: format!("invalid {name} {raw:?}"),
    })
}

fn csv_rows<R: Read>(
    rdr: csv::Reader<R>,
    width: usize,
    source_name: String,
) -> impl Iterator<Item = Result<(csv::StringRecord, u64)>> {
    rdr.into_records().map(move |rec| {
        let rec = rec.map_err(|e| Error::Parse {
            source_name: source_name.clone(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != width {
            return Err(Error::Parse {
                source_name: source_name.clone(),
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        Ok((rec, line))
    })
}

/// Reads a `term,year,count` CSV.
pub fn read_occurrences<R: Read>(
    reader: R,
    source_name: &str,
) -> Result<impl Iterator<Item = Result<OccurrenceRecord>>> {
    let rdr = csv_reader(reader, &["term", "year", "count"], source_name)?;
    let name = source_name.to_string();
    Ok(csv_rows(rdr, 3, name.clone()).map(move |row| {
        let (rec, line) = row?;
        let label = rec[0].to_string();
        if normalize_label(&label).is_empty() {
            return Err(Error::Parse {
                source_name: name.clone(),
                line,
                message: "empty term label".into(),
            });
        }
        Ok(OccurrenceRecord {
            label,
            year: parse_field(&rec, 1, "year", &name, line)?,
            count: parse_field(&rec, 2, "count", &name, line)?,
            line: Some(line),
        })
    }))
}

/// Reads a `term_a,term_b,year,count` CSV.
pub fn read_cooccurrences<R: Read>(
    reader: R,
    source_name: &str,
) -> Result<impl Iterator<Item = Result<CooccurrenceRecord>>> {
    let rdr = csv_reader(reader, &["term_a", "term_b", "year", "count"], source_name)?;
    let name = source_name.to_string();
    Ok(csv_rows(rdr, 4, name.clone()).map(move |row| {
        let (rec, line) = row?;
        let (label_a, label_b) = (rec[0].to_string(), rec[1].to_string());
        if normalize_label(&label_a).is_empty() || normalize_label(&label_b).is_empty() {
            return Err(Error::Parse {
                source_name: name.clone(),
                line,
                message: "empty term label".into(),
            });
        }
        if normalize_label(&label_a) == normalize_label(&label_b) {
            return Err(Error::Parse {
                source_name: name.clone(),
                line,
                message: format!("self-pair {label_a:?} is not allowed"),
            });
        }
        Ok(CooccurrenceRecord {
            label_a,
            label_b,
            year: parse_field(&rec, 2, "year", &name, line)?,
            count: parse_field(&rec, 3, "count", &name, line)?,
            line: Some(line),
        })
    }))
}

/// Reads both CSV files from disk and ingests them.
pub fn ingest_files(
    occurrences: &std::path::Path,
    cooccurrences: &std::path::Path,
    validation: Validation,
) -> Result<(CorpusStore, IngestReport)> {
    let occ_name = occurrences.display().to_string();
    let cooc_name = cooccurrences.display().to_string();
    let occ = read_occurrences(std::fs::File::open(occurrences)?, &occ_name)?;
    let cooc = read_cooccurrences(std::fs::File::open(cooccurrences)?, &cooc_name)?;
    let provenance = format!(
        "occurrences: {}; cooccurrences: {}",
        file_name(occurrences),
        file_name(cooccurrences)
    );
    ingest(occ, cooc, validation, provenance)
}

fn file_name(p: &std::path::Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}
