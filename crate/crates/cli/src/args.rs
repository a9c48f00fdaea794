use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qkd_core::{BiasedAttackParams, ProtocolConfig};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "qkd-sim", version, about = "Biased-basis BB84 simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one session and write its transcript.
    Run(RunArgs),
    /// Run a grid of sessions and emit one row per (point, trial).
    Sweep(SweepArgs),
    /// Compare naive and refined verdicts over an attack grid.
    Compare(CompareArgs),
    /// Verify the 2-universality of the Toeplitz hash family.
    HashCheck(HashCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SessionArgs {
    /// JSON file with ProtocolConfig fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Sets both epsilon_alice and epsilon_bob.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub epsilon_alice: Option<f64>,
    #[arg(long)]
    pub epsilon_bob: Option<f64>,
    #[arg(long)]
    pub e_max: Option<f64>,
    #[arg(long)]
    pub m1: Option<usize>,
    #[arg(long)]
    pub m2: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub delta_failure_prob: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fail instead of drawing a seed from system entropy.
    #[arg(long)]
    pub require_seed: bool,
    #[arg(long)]
    pub eve_p1: Option<f64>,
    #[arg(long)]
    pub eve_p2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Transcript path.
    #[arg(long, default_value = "transcript.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Range axis, `NAME=START:STOP:STEPS[:log]`. Repeatable; axes form a grid.
    #[arg(long = "axis")]
    pub axes: Vec<String>,
    /// List axis, `NAME=V1,V2,...`. Repeatable.
    #[arg(long = "values")]
    pub values: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Rectilinear attack probabilities.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.03, 0.06, 0.09, 0.12])]
    pub p1: Vec<f64>,
    /// Diagonal attack probabilities.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.03, 0.06, 0.09, 0.12])]
    pub p2: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HashMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args)]
pub struct HashCheckArgs {
    /// Hash input length.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Hash output length.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Check every 1 <= k <= n <= 6 with k <= 3.
    #[arg(long)]
    pub all: bool,
    #[arg(long, value_enum, default_value_t = HashMode::Exhaustive)]
    pub mode: HashMode,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Config file schema: every ProtocolConfig field is optional, plus an
/// optional attack.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    epsilon_alice: Option<f64>,
    epsilon_bob: Option<f64>,
    e_max: Option<f64>,
    m1: Option<usize>,
    m2: Option<usize>,
    s: Option<usize>,
    eta: Option<f64>,
    seed: Option<u64>,
    delta_failure_prob: Option<f64>,
    attack: Option<AttackFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttackFile {
    p1: f64,
    p2: f64,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ProtocolConfig,
    pub attack: Option<BiasedAttackParams>,
    /// True when the seed was drawn from system entropy.
    pub seed_drawn: bool,
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

impl SessionArgs {
    pub fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => ConfigFile::default(),
        };
        let mut cfg = ProtocolConfig::default();
        cfg.n = pick(self.n, file.n, cfg.n);
        cfg.epsilon_alice = pick(
            self.epsilon_alice.or(self.epsilon),
            file.epsilon_alice,
            cfg.epsilon_alice,
        );
        cfg.epsilon_bob = pick(
            self.epsilon_bob.or(self.epsilon),
            file.epsilon_bob,
            cfg.epsilon_bob,
        );
        cfg.e_max = pick(self.e_max, file.e_max, cfg.e_max);
        cfg.m1 = pick(self.m1, file.m1, cfg.m1);
        cfg.m2 = pick(self.m2, file.m2, cfg.m2);
        cfg.s = pick(self.s, file.s, cfg.s);
        cfg.eta = pick(self.eta, file.eta, cfg.eta);
        cfg.delta_failure_prob = pick(
            self.delta_failure_prob,
            file.delta_failure_prob,
            cfg.delta_failure_prob,
        );

        let mut seed_drawn = false;
        cfg.seed = match self.seed.or(file.seed) {
            Some(seed) => seed,
            None if self.require_seed => bail!("--require-seed is set but no seed was given"),
            None => {
                seed_drawn = true;
                rand::random()
            }
        };
        cfg.validate()?;

        let (file_p1, file_p2) = file
            .attack
            .map_or((None, None), |a| (Some(a.p1), Some(a.p2)));
        let p1 = self.eve_p1.or(file_p1);
        let p2 = self.eve_p2.or(file_p2);
        let attack = if p1.is_some() || p2.is_some() {
            Some(BiasedAttackParams::new(
                p1.unwrap_or(0.0),
                p2.unwrap_or(0.0),
            )?)
        } else {
            None
        };
        Ok(Resolved {
            config: cfg,
            attack,
            seed_drawn,
        })
    }
}
