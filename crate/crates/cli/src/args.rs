use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cgdp::{ProblemKind, Solver};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "cgdp", version, about = "Branch-and-price with dynamic-programming pricing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print a JSON report.
    Solve(SolveArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// bpp, gcp, pms, mrasp, vrptw, cumvrptw or pdptw.
    #[arg(long)]
    pub problem: ProblemKind,

    /// Instance file.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    pub instance: Option<PathBuf>,

    /// Generated instance, e.g. `n=8,m=2,config=1,seed=3`.
    #[arg(long)]
    pub generate: Option<GeneratorSpec>,

    /// labeling, caasdy (best-first), cabs or exhaustive.
    #[arg(long, default_value = "labeling")]
    pub pricer: Solver,

    /// Elementary routes (default).
    #[arg(long, conflicts_with = "non_elementary")]
    pub elementary: bool,

    /// Routes may revisit customers; only 2-cycles are excluded.
    #[arg(long)]
    pub non_elementary: bool,

    #[arg(long, value_enum, default_value_t = Mode::Bnp)]
    pub mode: Mode,

    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,

    /// Generator seed (when `--generate` has none).
    #[arg(long, requires = "generate")]
    pub seed: Option<u64>,

    /// Keep only the first N customers of a Solomon file.
    #[arg(long)]
    pub customers: Option<usize>,

    /// Master duals for `--mode pricing-only`, one per master row.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub duals: Option<Vec<f64>>,

    /// Disable dominance pruning in the pricer.
    #[arg(long)]
    pub no_dominance: bool,

    /// Disable dual-bound pruning in the pricer.
    #[arg(long)]
    pub no_dual_bounds: bool,

    /// Report file (standard output if absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Bnp,
    RootLp,
    PricingOnly,
}

/// Parameters of a generated instance. Keys not used by a family are
/// ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: Option<usize>,
    pub config: Option<u32>,
    pub density: Option<f64>,
    pub seed: Option<u64>,
}

impl FromStr for GeneratorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = GeneratorSpec::default();
        let mut has_n = false;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found `{part}`"))?;
            let bad = |_| format!("bad value for `{key}`: `{value}`");
            match key.trim() {
                "n" => {
                    spec.n = value.parse().map_err(bad)?;
                    has_n = true;
                }
                "m" => spec.m = Some(value.parse().map_err(bad)?),
                "config" => spec.config = Some(value.parse().map_err(bad)?),
                "seed" => spec.seed = Some(value.parse().map_err(bad)?),
                "density" => {
                    let d: f64 = value.parse().map_err(|_| format!("bad value for `density`: `{value}`"))?;
                    if !(0.0..=1.0).contains(&d) {
                        return Err("density must lie in [0, 1]".into());
                    }
                    spec.density = Some(d);
                }
                other => return Err(format!("unknown generator key `{other}`")),
            }
        }
        if !has_n {
            return Err("generator spec needs `n`".into());
        }
        Ok(spec)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        if let Some(m) = self.m {
            write!(f, ",m={m}")?;
        }
        if let Some(c) = self.config {
            write!(f, ",config={c}")?;
        }
        if let Some(d) = self.density {
            write!(f, ",density={d}")?;
        }
        if let Some(s) = self.seed {
            write!(f, ",seed={s}")?;
        }
        Ok(())
    }
}
