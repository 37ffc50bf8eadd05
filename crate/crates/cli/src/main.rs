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

mod commands;
mod settings;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "paramap", version, about = "Micro, meso and macro maps of a term co-occurrence corpus")]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a canonical store from occurrence and co-occurrence CSV files
    Ingest {
        #[arg(long)]
        occurrences: PathBuf,
        #[arg(long)]
        cooccurrences: PathBuf,
    },
    /// Print the thresholded neighborhood of one term
    Neighbors { term: String },
    /// Detect paradigmatic fields and write their profiles
    Fields,
    /// Assemble the macro map from a fields file
    Map {
        /// `fields.json` written by `paramap fields`; computed on the fly if omitted
        #[arg(long)]
        fields: Option<PathBuf>,
    },
    /// Tabulate field counts over a grid of parameters
    Sweep {
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        ks: Vec<usize>,
    },
    /// Serve the store over HTTP
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long)]
        fields: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Allowed CORS origin; repeatable
        #[arg(long = "cors")]
        cors: Vec<String>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        cache_capacity: usize,
        /// Seconds before a slow request is answered with 202
        #[arg(long, default_value_t = 10.0)]
        soft_deadline: f64,
    },
    /// Check a store, and optionally a fields file against it
    Validate {
        #[arg(long)]
        fields: Option<PathBuf>,
    },
}

const EXIT_INPUT: u8 = 2;
const EXIT_QUERY: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_DEGENERATE: u8 = 5;

fn exit_code(err: &anyhow::Error) -> u8 {
    use paramap::Error as E;
    if err.downcast_ref::<commands::UnknownTerm>().is_some() {
        return EXIT_QUERY;
    }
    match err.downcast_ref::<paramap::Error>() {
        Some(E::UnknownTerm(_) | E::UndefinedTerm { .. } | E::Range { .. }) => EXIT_QUERY,
        Some(E::Budget { .. }) => EXIT_BUDGET,
        Some(E::DegenerateWindow(_) | E::EmptyCorpus | E::UndefinedActivity) => EXIT_DEGENERATE,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli.settings.resolve().and_then(|s| commands::run(cli.command, &s));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
