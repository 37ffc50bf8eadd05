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
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use paramap::corpus::{ingest_files, CorpusStore};
use paramap::export;
use paramap::pipeline::{
    neighbors_payload, run_macro, run_meso, sweep, sweep_csv, FieldSet, MesoConfig,
};
use paramap::ProximityParams;
use paramap_server::ServerConfig;
use serde_json::json;

use crate::settings::Settings;
use crate::Command;

/// An unknown term, with the closest vocabulary labels.
#[derive(Debug)]
pub struct UnknownTerm {
    term: String,
    nearest: Vec<String>,
}

impl fmt::Display for UnknownTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown term \"{}\"", self.term)?;
        if !self.nearest.is_empty() {
            write!(f, "; nearest matches: {}", self.nearest.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for UnknownTerm {}

fn nearest_labels(store: &CorpusStore, term: &str, n: usize) -> Vec<String> {
    let needle = paramap::corpus::normalize_label(term);
    let mut scored: Vec<(f64, &str)> = store
        .vocabulary()
        .iter()
        .map(|l| (strsim::jaro_winkler(&needle, l), l.as_str()))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().take(n).map(|(_, l)| l.to_string()).collect()
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn provenance(command: &str, settings: &Settings, store: &CorpusStore, config: Option<&MesoConfig>) -> anyhow::Result<String> {
    let doc = json!({
        "tool": concat!("paramap ", env!("CARGO_PKG_VERSION")),
        "command": command,
        "arguments": std::env::args().skip(1).collect::<Vec<_>>(),
        "store": settings.store_path().display().to_string(),
        "store_fingerprint": store.fingerprint(),
        "store_provenance": store.provenance(),
        "config": config,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn describe(cfg: &MesoConfig) -> String {
    format!(
        "window={} alpha={} s={} k={} edge_rule={} budget={}",
        cfg.window, cfg.alpha, cfg.threshold, cfg.k, cfg.edge_rule, cfg.clique_budget
    )
}

pub fn run(command: Command, settings: &Settings) -> anyhow::Result<()> {
    match command {
        Command::Ingest {
            occurrences,
            cooccurrences,
        } => ingest(settings, &occurrences, &cooccurrences),
        Command::Neighbors { term } => neighbors(settings, &term),
        Command::Fields => fields(settings),
        Command::Map { fields } => map(settings, fields.as_deref()),
        Command::Sweep {
            alphas,
            thresholds,
            ks,
        } => run_sweep(settings, &alphas, &thresholds, &ks),
        Command::Serve {
            bind,
            fields,
            map,
            cors,
            static_dir,
            cache_capacity,
            soft_deadline,
        } => {
            let mut config = ServerConfig::new(bind, settings.store_path());
            config.fields_path = fields;
            config.map_path = map;
            config.cors_allowlist = cors;
            config.static_dir = static_dir;
            config.cache_capacity = cache_capacity;
            config.soft_deadline = Duration::try_from_secs_f64(soft_deadline).context("--soft-deadline")?;
            if let Some(b) = settings.budget {
                config.clique_budget = b;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(paramap_server::serve(config))?;
            Ok(())
        }
        Command::Validate { fields } => validate(settings, fields.as_deref()),
    }
}

fn ingest(settings: &Settings, occ: &Path, cooc: &Path) -> anyhow::Result<()> {
    let validation = settings.validation.unwrap_or_default();
    let (store, report) = ingest_files(occ, cooc, validation)?;
    let out = settings.out.clone().unwrap_or_else(|| PathBuf::from("store.json"));
    write_atomic(&out, &store.to_json()?)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let pairs = store.pair_count();
    if pairs == 0 {
        eprintln!("warning: 0 pairs");
    }
    let years = match store.year_range() {
        Some((a, b)) => format!("{} ({a}-{b})", store.years().len()),
        None => "0".to_string(),
    };
    println!("terms: {}", store.term_count());
    println!("years: {years}");
    println!("pairs: {pairs}");
    println!("warnings: {}", report.warnings.len());
    println!("store: {}", out.display());
    Ok(())
}

fn neighbors(settings: &Settings, term: &str) -> anyhow::Result<()> {
    let store = settings.load_store()?;
    let Some(id) = store.term_id(term) else {
        return Err(UnknownTerm {
            term: term.to_string(),
            nearest: nearest_labels(&store, term, 3),
        }
        .into());
    };
    let params = ProximityParams::new(
        settings.alpha.unwrap_or(1.0),
        settings.threshold.unwrap_or(0.0),
        settings.window_or_full(&store)?,
    )?;
    let payload = neighbors_payload(&store, id, params)?;
    let text = serde_json::to_string_pretty(&payload)? + "\n";
    match &settings.out {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn out_dir(settings: &Settings) -> PathBuf {
    settings.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn fields(settings: &Settings) -> anyhow::Result<()> {
    let store = settings.load_store()?;
    let cfg = settings.meso(&store, 0.1)?;
    let result = run_meso(&store, &cfg).with_context(|| describe(&cfg))?;
    let dir = out_dir(settings);
    write_atomic(&dir.join("fields.json"), &FieldSet::new(cfg, &result.fields).to_json()?)?;
    for f in &result.fields {
        write_atomic(&dir.join(format!("field-{}.json", f.id)), &f.to_json()?)?;
    }
    write_atomic(
        &dir.join("communities.json"),
        &export::communities_json(&result.communities, &store)?,
    )?;
    write_atomic(&dir.join("graph.csv"), &export::graph_edge_csv(&result.graph, &store)?)?;
    write_atomic(&dir.join("graph.graphml"), &export::graph_graphml(&result.graph, &store))?;
    write_atomic(
        &dir.join("fields.provenance.json"),
        &provenance("fields", settings, &store, Some(&cfg))?,
    )?;
    println!(
        "{} fields, {} terms covered, {} in more than one field",
        result.fields.len(),
        result.coverage(),
        result.overlap()
    );
    Ok(())
}

fn map(settings: &Settings, fields_path: Option<&Path>) -> anyhow::Result<()> {
    let store = settings.load_store()?;
    let (cfg, fields) = match fields_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let set = FieldSet::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(w) = settings.window {
                if w != set.config.window {
                    return Err(paramap::Error::InvalidParams(format!(
                        "--window {w} does not match the fields file window {}",
                        set.config.window
                    ))
                    .into());
                }
            }
            set.resolve(&store)?
        }
        None => {
            let cfg = settings.meso(&store, 0.1)?;
            let fields = run_meso(&store, &cfg).with_context(|| describe(&cfg))?.fields;
            (cfg, fields)
        }
    };
    let map = run_macro(&store, &cfg, &fields, &settings.macro_config())?;
    let dir = out_dir(settings);
    write_atomic(&dir.join("map.json"), &map.to_json()?)?;
    write_atomic(&dir.join("map.graphml"), &export::macro_graphml(&map))?;
    write_atomic(&dir.join("map.dot"), &export::macro_dot(&map))?;
    write_atomic(
        &dir.join("map.provenance.json"),
        &provenance("map", settings, &store, Some(&cfg))?,
    )?;
    println!("{} fields on the map, {} edges", map.nodes.len(), map.edges.len());
    Ok(())
}

fn run_sweep(settings: &Settings, alphas: &[f64], thresholds: &[f64], ks: &[usize]) -> anyhow::Result<()> {
    let store = settings.load_store()?;
    let base = settings.meso(&store, 0.1)?;
    let rows = sweep(&store, &base, alphas, thresholds, ks)?;
    let text = sweep_csv(&rows)?;
    match &settings.out {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(settings: &Settings, fields_path: Option<&Path>) -> anyhow::Result<()> {
    let store = settings.load_store()?;
    let range = store
        .year_range()
        .map(|(a, b)| format!("{a}-{b}"))
        .unwrap_or_else(|| "none".into());
    println!(
        "store ok: {} terms, years {range}, {} pairs, fingerprint {}",
        store.term_count(),
        store.pair_count(),
        store.fingerprint()
    );
    if let Some(path) = fields_path {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (cfg, fields) = FieldSet::from_json(&text)?.resolve(&store)?;
        println!("fields ok: {} fields for {}", fields.len(), describe(&cfg));
    }
    Ok(())
}
