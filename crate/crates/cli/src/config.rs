//! Run configuration: defaults, then the config file, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use ionsync_core::SystemParams;

/// Flags shared by every subcommand. Each unset flag falls back to the
/// config file, then to the built-in defaults.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Config file; parsed as JSON for a .json extension, TOML otherwise.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Lamb-Dicke parameter.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Blue-sideband pump rate.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Qubit relaxation rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Oscillator damping rate, the unit of all other rates.
    #[arg(long)]
    pub big_gamma: Option<f64>,
    /// Resonant drive strength.
    #[arg(long)]
    pub drive_f: Option<f64>,
    /// Drive detuning from the oscillator frequency.
    #[arg(long)]
    pub detuning: Option<f64>,
    /// Fock-space truncation.
    #[arg(long)]
    pub n_fock: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 means one per core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Tolerance for bisection scans.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sweep axis as "param=lo:hi:steps", inclusive endpoints; repeat to
    /// nest, first axis outermost. Flags replace any config-file sweep.
    #[arg(long, value_name = "AXIS")]
    pub sweep: Vec<String>,
}

/// Config-file schema; every field may be omitted.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub eta: Option<f64>,
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
    pub big_gamma: Option<f64>,
    pub drive_f: Option<f64>,
    pub detuning: Option<f64>,
    pub n_fock: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub tol: Option<f64>,
    pub sweep: Vec<SweepSpec>,
}

/// One sweep axis: an inclusive range with a fixed number of points.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct SweepSpec {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    /// Grid values, inclusive of both endpoints; a single step sits at `from`.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.from + h * k as f64).collect()
    }
}

/// One concrete parameter point of a sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamSet {
    pub eta: f64,
    pub omega: f64,
    pub gamma: f64,
    pub big_gamma: f64,
    pub drive_f: f64,
    pub detuning: f64,
    pub n_fock: usize,
}

impl Default for ParamSet {
    fn default() -> Self {
        let p = SystemParams::default();
        ParamSet {
            eta: p.eta,
            omega: p.omega,
            gamma: p.gamma,
            big_gamma: p.big_gamma,
            drive_f: p.drive_f,
            detuning: p.detuning,
            n_fock: p.n_fock,
        }
    }
}

impl ParamSet {
    pub fn to_params(self) -> SystemParams {
        SystemParams {
            eta: self.eta,
            omega: self.omega,
            gamma: self.gamma,
            big_gamma: self.big_gamma,
            drive_f: self.drive_f,
            detuning: self.detuning,
            n_fock: self.n_fock,
        }
    }

    fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "eta" => self.eta = value,
            "omega" => self.omega = value,
            "gamma" => self.gamma = value,
            "big_gamma" => self.big_gamma = value,
            "drive_f" => self.drive_f = value,
            "detuning" => self.detuning = value,
            "n_fock" => bail!("n_fock cannot be swept; set it per run"),
            other => bail!("unknown sweep parameter {other:?}"),
        }
        Ok(())
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub base: ParamSet,
    pub sweep: Vec<SweepSpec>,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub tol: f64,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig> {
        let file = match &args.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let d = ParamSet::default();
        let base = ParamSet {
            eta: args.eta.or(file.eta).unwrap_or(d.eta),
            omega: args.omega.or(file.omega).unwrap_or(d.omega),
            gamma: args.gamma.or(file.gamma).unwrap_or(d.gamma),
            big_gamma: args.big_gamma.or(file.big_gamma).unwrap_or(d.big_gamma),
            drive_f: args.drive_f.or(file.drive_f).unwrap_or(d.drive_f),
            detuning: args.detuning.or(file.detuning).unwrap_or(d.detuning),
            n_fock: args.n_fock.or(file.n_fock).unwrap_or(d.n_fock),
        };
        let sweep = if args.sweep.is_empty() {
            file.sweep
        } else {
            args.sweep.iter().map(|s| parse_axis(s)).collect::<Result<Vec<_>>>()?
        };
        for ax in &sweep {
            if !(ax.from.is_finite() && ax.to.is_finite()) {
                bail!("sweep axis {:?} has a non-finite endpoint", ax.param);
            }
            if ax.steps == 0 {
                bail!("sweep axis {:?} has zero steps", ax.param);
            }
            let mut scratch = base;
            scratch.set(&ax.param, ax.from)?;
        }
        let tol = args.tol.or(file.tol).unwrap_or(1e-3);
        if !(tol.is_finite() && tol > 0.0) {
            bail!("tolerance {tol} must be a positive finite number");
        }
        Ok(RunConfig {
            base,
            sweep,
            out_dir: args.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("out")),
            threads: args.threads.or(file.threads).unwrap_or(0),
            tol,
        })
    }

    /// Cartesian sweep points in lexicographic order, first axis outermost.
    pub fn points(&self) -> Vec<ParamSet> {
        let axes: Vec<Vec<f64>> = self.sweep.iter().map(SweepSpec::values).collect();
        let total: usize = axes.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut p = self.base;
            let mut rem = idx;
            for (ax, values) in self.sweep.iter().zip(&axes).rev() {
                let j = rem % values.len();
                rem /= values.len();
                p.set(&ax.param, values[j]).expect("sweep axis validated at resolve time");
            }
            out.push(p);
        }
        out
    }

    /// JSON image of the resolved run for metadata sidecars.
    pub fn meta<T: Serialize>(&self, command: &str, options: &T) -> serde_json::Value {
        serde_json::json!({
            "command": command,
            "params": self.base,
            "sweep": self.sweep,
            "out_dir": self.out_dir,
            "threads": self.threads,
            "tol": self.tol,
            "options": options,
        })
    }
}

fn parse_axis(text: &str) -> Result<SweepSpec> {
    let (param, rest) = text
        .split_once('=')
        .with_context(|| format!("sweep axis {text:?} is not param=lo:hi:steps"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        bail!("sweep axis {text:?} is not param=lo:hi:steps");
    }
    Ok(SweepSpec {
        param: param.to_string(),
        from: parts[0].parse().with_context(|| format!("bad sweep start in {text:?}"))?,
        to: parts[1].parse().with_context(|| format!("bad sweep end in {text:?}"))?,
        steps: parts[2].parse().with_context(|| format!("bad sweep count in {text:?}"))?,
    })
}

/// Parse "lo:hi" into an ordered pair.
pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text.split_once(':').with_context(|| format!("range {text:?} is not lo:hi"))?;
    let lo: f64 = lo.parse().with_context(|| format!("bad range start in {text:?}"))?;
    let hi: f64 = hi.parse().with_context(|| format!("bad range end in {text:?}"))?;
    Ok((lo, hi))
}

/// Parse "lo:hi:n" into an inclusive uniform grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("grid {text:?} is not lo:hi:n");
    }
    let spec = SweepSpec {
        param: String::new(),
        from: parts[0].parse().with_context(|| format!("bad grid start in {text:?}"))?,
        to: parts[1].parse().with_context(|| format!("bad grid end in {text:?}"))?,
        steps: parts[2].parse().with_context(|| format!("bad grid count in {text:?}"))?,
    };
    if spec.steps == 0 {
        bail!("grid {text:?} has zero points");
    }
    Ok(spec.values())
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
