use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand};
use tbt::estimators::{projection_cutoff, DEFAULT_GAMMA};
use tbt::{EstimatorConfig, FunctionSpec, Variant};

#[derive(Debug, Parser)]
#[command(name = "tbt", version, about = "Truncated block thresholding experiments and denoising")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Risk as a function of gamma (writes gamma_sweep.csv).
    GammaSweep(GammaSweepArgs),
    /// Empirical distribution of the level statistics L_j (writes lj_dist.csv).
    LjDist(LjDistArgs),
    /// Risks over a grid of sample sizes and fitted log-log slopes (writes rates.csv).
    Rates(RatesArgs),
    /// Denoise a signal read from a text file.
    Denoise(DenoiseArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GammaSweep(_) => "gamma-sweep",
            Command::LjDist(_) => "lj-dist",
            Command::Rates(_) => "rates",
            Command::Denoise(_) => "denoise",
            Command::Replay(_) => "replay",
        }
    }

    /// Every flag with its value, in a form that parses back to the same command.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            Command::GammaSweep(a) => {
                let mut p = vec![
                    ("n", a.n.to_string()),
                    ("sigma", a.sigma.to_string()),
                    ("gamma-min", a.gamma_min.to_string()),
                    ("gamma-max", a.gamma_max.to_string()),
                    ("gamma-step", a.gamma_step.to_string()),
                    ("reps", a.reps.to_string()),
                    ("seed", a.seed.to_string()),
                    ("variant", a.variant.to_string()),
                    ("function", a.function.to_string()),
                ];
                p.extend(a.estimator.params());
                p.push(("out", a.out.display().to_string()));
                p
            }
            Command::LjDist(a) => vec![
                ("n", a.n.to_string()),
                ("sigma", a.sigma.to_string()),
                ("gamma", a.gamma.to_string()),
                ("reps", a.reps.to_string()),
                ("seed", a.seed.to_string()),
                ("function", a.function.to_string()),
                ("out", a.out.display().to_string()),
            ],
            Command::Rates(a) => {
                let mut p = vec![
                    ("n-grid", a.n_grid.to_string()),
                    ("sigma", a.sigma.to_string()),
                    ("gamma", a.gamma.to_string()),
                    ("reps", a.reps.to_string()),
                    ("seed", a.seed.to_string()),
                    ("variant", a.variant.to_string()),
                    ("function", a.function.to_string()),
                ];
                p.extend(a.estimator.params());
                p.push(("compare-plain", a.compare_plain.to_string()));
                p.push(("out", a.out.display().to_string()));
                p
            }
            Command::Denoise(a) => {
                let mut p = vec![("in", a.input.display().to_string())];
                if let Some(s) = a.sigma {
                    p.push(("sigma", s.to_string()));
                }
                p.push(("gamma", a.gamma.to_string()));
                p.push(("variant", a.variant.to_string()));
                p.extend(a.estimator.params());
                p.push(("out", a.out.display().to_string()));
                if let Some(d) = &a.diag {
                    p.push(("diag", d.display().to_string()));
                }
                p
            }
            Command::Replay(a) => {
                let mut p = vec![("manifest", a.manifest.display().to_string())];
                if let Some(o) = &a.out {
                    p.push(("out", o.display().to_string()));
                }
                p
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::GammaSweep(a) => Some(a.seed),
            Command::LjDist(a) => Some(a.seed),
            Command::Rates(a) => Some(a.seed),
            Command::Denoise(_) | Command::Replay(_) => None,
        }
    }

    /// Main output file, if the command writes one.
    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::GammaSweep(a) => Some(&a.out),
            Command::LjDist(a) => Some(&a.out),
            Command::Rates(a) => Some(&a.out),
            Command::Denoise(a) => Some(&a.out),
            Command::Replay(_) => None,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::GammaSweep(a) => a.out = out,
            Command::LjDist(a) => a.out = out,
            Command::Rates(a) => a.out = out,
            Command::Denoise(a) => {
                a.out = out;
                a.diag = None;
            }
            Command::Replay(_) => {}
        }
    }
}

/// Switches shared by the commands that run the estimator.
#[derive(Debug, Clone, Args)]
pub struct EstimatorFlags {
    /// Zero blocks whose energy is below the detection threshold.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub block_zeroing: bool,
    /// Pass levels <= 2 through unchanged.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub keep_coarse: bool,
}

impl EstimatorFlags {
    fn params(&self) -> Vec<(&'static str, String)> {
        vec![
            ("block-zeroing", self.block_zeroing.to_string()),
            ("keep-coarse", self.keep_coarse.to_string()),
        ]
    }

    pub fn config(&self, variant: Variant, gamma: f64) -> EstimatorConfig {
        EstimatorConfig {
            gamma,
            variant,
            block_zeroing: self.block_zeroing,
            keep_coarse: self.keep_coarse,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GammaSweepArgs {
    #[arg(long, default_value_t = 1024, value_parser = parse_sample_size)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    pub sigma: f64,
    #[arg(long, default_value_t = 3.0, value_parser = parse_positive)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 15.0, value_parser = parse_positive)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
    pub gamma_step: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// truncated | plain | hard[:mult] | projection:beta:Q
    #[arg(long, default_value = "truncated")]
    pub variant: VariantArg,
    /// sine | block-spike:beta:Q:level | block-spike:beta:Q:auto | samples:path
    #[arg(long, default_value = "sine")]
    pub function: FunctionArg,
    #[command(flatten)]
    pub estimator: EstimatorFlags,
    #[arg(long, default_value = "gamma_sweep.csv")]
    pub out: PathBuf,
}

impl GammaSweepArgs {
    /// `gamma_min + i * step` up to `gamma_max` (inclusive, with rounding slack).
    pub fn gammas(&self) -> Vec<f64> {
        let steps = ((self.gamma_max - self.gamma_min) / self.gamma_step + 1e-9).floor();
        if steps < 0.0 {
            return Vec::new();
        }
        (0..=steps as usize)
            .map(|i| self.gamma_min + i as f64 * self.gamma_step)
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct LjDistArgs {
    #[arg(long, default_value_t = 1024, value_parser = parse_sample_size)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    pub sigma: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA, value_parser = parse_positive)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "sine")]
    pub function: FunctionArg,
    #[arg(long, default_value = "lj_dist.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    /// Comma-separated sample sizes; `2^k` is accepted.
    #[arg(long, default_value = "2^8,2^9,2^10,2^11,2^12,2^13,2^14,2^15,2^16")]
    pub n_grid: NGrid,
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    pub sigma: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA, value_parser = parse_positive)]
    pub gamma: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "truncated")]
    pub variant: VariantArg,
    #[arg(long, default_value = "sine")]
    pub function: FunctionArg,
    #[command(flatten)]
    pub estimator: EstimatorFlags,
    /// Also run plain block thresholding on the same noise and add comparison columns.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub compare_plain: bool,
    #[arg(long, default_value = "rates.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DenoiseArgs {
    /// Text file with one value per line; the count must be a power of two.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Noise level per sample; estimated from the finest level when absent.
    #[arg(long, value_parser = parse_positive)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GAMMA, value_parser = parse_positive)]
    pub gamma: f64,
    /// truncated | plain
    #[arg(long, default_value = "truncated", value_parser = parse_block_variant)]
    pub variant: VariantArg,
    #[command(flatten)]
    pub estimator: EstimatorFlags,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-level diagnostics; defaults to the output path with extension `diag.csv`.
    #[arg(long)]
    pub diag: Option<PathBuf>,
}

impl DenoiseArgs {
    pub fn diag_path(&self) -> PathBuf {
        self.diag.clone().unwrap_or_else(|| self.out.with_extension("diag.csv"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantArg(pub Variant);

impl FromStr for VariantArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?} in variant: {e}"));
        let v = match parts.as_slice() {
            ["truncated"] => Variant::TruncatedBlock,
            ["plain"] => Variant::PlainBlock,
            ["hard"] => Variant::Hard { lambda_mult: 1.0 },
            ["hard", m] => Variant::Hard { lambda_mult: num(m)? },
            ["projection", b, q] => Variant::Projection { beta: num(b)?, q: num(q)? },
            _ => return Err(format!("unknown variant {s:?}")),
        };
        EstimatorConfig::simulation(v).validate().map_err(|e| e.to_string())?;
        Ok(VariantArg(v))
    }
}

impl fmt::Display for VariantArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Variant::TruncatedBlock => write!(f, "truncated"),
            Variant::PlainBlock => write!(f, "plain"),
            Variant::Hard { lambda_mult } => write!(f, "hard:{lambda_mult}"),
            Variant::Projection { beta, q } => write!(f, "projection:{beta}:{q}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpikeLevel {
    Fixed(u32),
    /// `floor(log2 n / (2 beta + 1))`, at least 1.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionArg {
    Sine,
    BlockSpike { beta: f64, q: f64, level: SpikeLevel },
    Samples(PathBuf),
}

impl FunctionArg {
    pub fn build(&self, n: usize) -> tbt::Result<FunctionSpec> {
        match self {
            FunctionArg::Sine => Ok(FunctionSpec::Sine),
            FunctionArg::BlockSpike { beta, q, level } => {
                let level = match level {
                    SpikeLevel::Fixed(l) => *l,
                    SpikeLevel::Auto => projection_cutoff(n, *beta).max(1) as u32,
                };
                FunctionSpec::block_spike(*beta, *q, level, n)
            }
            FunctionArg::Samples(path) => FunctionSpec::samples_from_file(path),
        }
    }
}

impl FromStr for FunctionArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "sine" {
            return Ok(FunctionArg::Sine);
        }
        if let Some(path) = s.strip_prefix("samples:") {
            return Ok(FunctionArg::Samples(PathBuf::from(path)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let ["block-spike", b, q, level] = parts.as_slice() else {
            return Err(format!("unknown function {s:?}"));
        };
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?} in function: {e}"));
        let (beta, q) = (num(b)?, num(q)?);
        if !(beta > 0.0 && beta.is_finite() && q > 0.0 && q.is_finite()) {
            return Err(format!("block-spike needs beta > 0 and Q > 0, got {s:?}"));
        }
        let level = match *level {
            "auto" => SpikeLevel::Auto,
            l => {
                let l: u32 = l.parse().map_err(|e| format!("bad level {l:?}: {e}"))?;
                if l < 1 {
                    return Err("block-spike level must be >= 1".into());
                }
                SpikeLevel::Fixed(l)
            }
        };
        Ok(FunctionArg::BlockSpike { beta, q, level })
    }
}

impl fmt::Display for FunctionArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionArg::Sine => write!(f, "sine"),
            FunctionArg::BlockSpike { beta, q, level } => match level {
                SpikeLevel::Fixed(l) => write!(f, "block-spike:{beta}:{q}:{l}"),
                SpikeLevel::Auto => write!(f, "block-spike:{beta}:{q}:auto"),
            },
            FunctionArg::Samples(p) => write!(f, "samples:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGrid(pub Vec<usize>);

impl FromStr for NGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let ns = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                match t.strip_prefix("2^") {
                    Some(e) => {
                        let e: u32 = e.parse().map_err(|err| format!("bad exponent in {t:?}: {err}"))?;
                        1usize
                            .checked_shl(e)
                            .filter(|_| e < usize::BITS - 1)
                            .ok_or_else(|| format!("{t} is too large"))
                    }
                    None => t.parse::<usize>().map_err(|err| format!("bad sample size {t:?}: {err}")),
                }
                .and_then(|n| parse_sample_size(&n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if ns.len() < 2 {
            return Err("the n-grid needs at least two sample sizes".into());
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err("the n-grid must be strictly increasing".into());
        }
        Ok(NGrid(ns))
    }
}

impl fmt::Display for NGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", items.join(","))
    }
}

fn parse_sample_size(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{s:?} is not a sample size: {e}"))?;
    if n < 4 || !n.is_power_of_two() {
        return Err(format!("n must be a power of two >= 4, got {n}"));
    }
    Ok(n)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{s:?} is not a number: {e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("expected a positive finite number, got {s}"));
    }
    Ok(v)
}

fn parse_block_variant(s: &str) -> Result<VariantArg, String> {
    let v: VariantArg = s.parse()?;
    if !v.0.is_block() {
        return Err(format!("denoise supports truncated and plain, got {s:?}"));
    }
    Ok(v)
}
