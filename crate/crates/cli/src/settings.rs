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

//! Run settings merged from command-line flags and an optional config file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::Args;
use paramap::cliques::{EdgeRule, DEFAULT_CLIQUE_BUDGET};
use paramap::corpus::{CorpusStore, TimeWindow, Validation};
use paramap::fields::{GrowthBasis, PreviousWindow};
use paramap::macromap::SizeFilter;
use paramap::pipeline::{MacroConfig, MesoConfig};

#[derive(Args, Clone, Debug, Default)]
pub struct Settings {
    /// Canonical store file
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// Analysis window, `Y1:Y2` or a single year
    #[arg(long, global = true)]
    pub window: Option<TimeWindow>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Proximity threshold s
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Clique size for percolation
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// `or` or `and`
    #[arg(long, global = true)]
    pub edge_rule: Option<EdgeRule>,
    /// Macro map size filter, `MIN:MAX`
    #[arg(long, global = true)]
    pub filter: Option<SizeFilter>,
    /// Output file or directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `occurrences` or `intra_cooccurrences`
    #[arg(long, global = true)]
    pub growth_basis: Option<GrowthBasis>,
    /// Let the previous window share its last year with the analysis window
    #[arg(long, global = true)]
    pub overlap_boundary: bool,
    #[arg(long, global = true)]
    pub log_base: Option<f64>,
    /// Maximum number of cliques to enumerate
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// `strict` or `lenient`
    #[arg(long, global = true)]
    pub validation: Option<Validation>,
    /// key = value settings file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn parse<T>(key: &str, value: &toml::Value) -> anyhow::Result<T>
where
    T: FromStr,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let text = match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(_) | toml::Value::Float(_) => value.to_string(),
        _ => bail!("config key `{key}` must be a string or a number"),
    };
    text.parse().with_context(|| format!("config key `{key}`"))
}

impl Settings {
    /// Fills every unset flag from the config file, if one was given.
    pub fn resolve(mut self) -> anyhow::Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let table: toml::Table = text.parse().with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for (key, value) in &table {
            match key.as_str() {
                "store" => {
                    let p: PathBuf = parse(key, value)?;
                    self.store.get_or_insert(base.join(p));
                }
                "out" => {
                    let p: PathBuf = parse(key, value)?;
                    self.out.get_or_insert(base.join(p));
                }
                "window" => set(&mut self.window, key, value)?,
                "alpha" => set(&mut self.alpha, key, value)?,
                "threshold" => set(&mut self.threshold, key, value)?,
                "k" => set(&mut self.k, key, value)?,
                "edge_rule" => set(&mut self.edge_rule, key, value)?,
                "filter" => set(&mut self.filter, key, value)?,
                "growth_basis" => set(&mut self.growth_basis, key, value)?,
                "log_base" => set(&mut self.log_base, key, value)?,
                "budget" => set(&mut self.budget, key, value)?,
                "validation" => set(&mut self.validation, key, value)?,
                "overlap_boundary" => match value {
                    toml::Value::Boolean(b) => self.overlap_boundary |= b,
                    _ => bail!("config key `overlap_boundary` must be true or false"),
                },
                other => bail!("unknown config key `{other}` in {}", path.display()),
            }
        }
        Ok(self)
    }

    pub fn store_path(&self) -> PathBuf {
        self.store.clone().unwrap_or_else(|| PathBuf::from("store.json"))
    }

    pub fn load_store(&self) -> anyhow::Result<CorpusStore> {
        let path = self.store_path();
        CorpusStore::load(&path).with_context(|| format!("loading store {}", path.display()))
    }

    /// The requested window, or the whole corpus.
    pub fn window_or_full(&self, store: &CorpusStore) -> anyhow::Result<TimeWindow> {
        if let Some(w) = self.window {
            return Ok(w);
        }
        let (first, last) = store.year_range().ok_or(paramap::Error::EmptyCorpus)?;
        Ok(TimeWindow::new(first, last)?)
    }

    pub fn meso(&self, store: &CorpusStore, default_threshold: f64) -> anyhow::Result<MesoConfig> {
        let mut cfg = MesoConfig::new(
            self.window_or_full(store)?,
            self.alpha.unwrap_or(1.0),
            self.threshold.unwrap_or(default_threshold),
        );
        cfg.k = self.k.unwrap_or(cfg.k);
        cfg.edge_rule = self.edge_rule.unwrap_or(cfg.edge_rule);
        cfg.growth_basis = self.growth_basis.unwrap_or(cfg.growth_basis);
        cfg.clique_budget = self.budget.unwrap_or(DEFAULT_CLIQUE_BUDGET);
        if self.overlap_boundary {
            cfg.previous = PreviousWindow::SharedBoundary;
        }
        Ok(cfg)
    }

    pub fn macro_config(&self) -> MacroConfig {
        let d = MacroConfig::default();
        MacroConfig {
            filter: self.filter.unwrap_or(d.filter),
            log_base: self.log_base.unwrap_or(d.log_base),
        }
    }
}

fn set<T>(slot: &mut Option<T>, key: &str, value: &toml::Value) -> anyhow::Result<()>
where
    T: FromStr,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    if slot.is_none() {
        *slot = Some(parse(key, value)?);
    }
    Ok(())
}
