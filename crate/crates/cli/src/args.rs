//! Command-line definitions, the key=value config file and grid parsing.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cutofflab", version, about = "Cutoff experiments for Dyson-Ornstein-Uhlenbeck particles")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (directory for `figures`); standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write an SVG rendering next to the output.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingMode {
    /// Shared noise: gap decay along one pair.
    Parallel,
    /// Switching noise: merge times over replicas.
    Merge,
    /// Tail of the area's quadratic variation at merging.
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    All,
    Oudou,
    Hellinger,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Exact OU distance curves.
    OuCurves {
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// |z0|^2 / n for the constant initial vector.
        #[arg(long, default_value_t = 1.0)]
        z0_norm2_over_n: f64,
        /// A metric name or `all`.
        #[arg(long, default_value = "all")]
        metric: String,
        #[arg(long, default_value = "0:10:101")]
        t_grid: String,
    },
    /// OU cutoff profiles against their limits.
    OuProfile {
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value = "tv")]
        metric: String,
        /// Limit of sqrt(n) |z0|^2: a number or `inf`.
        #[arg(long, default_value = "inf")]
        a: String,
        /// |z0|^2; defaults to a / sqrt(n), or 1e4 / sqrt(n) when a = inf.
        #[arg(long)]
        z0_norm2: Option<f64>,
        #[arg(long, default_value = "-2:2:9", allow_hyphen_values = true)]
        b_grid: String,
    },
    /// DOU paths: simulated moments of pi and |x|^2 against exact values.
    DouSim {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        /// `semicircle`, `const:<a>` or a comma list of sorted positions.
        #[arg(long, default_value = "semicircle", allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value = "0:2:11")]
        t_grid: String,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value = "adaptive")]
        scheme: String,
    },
    /// Statistics of the exact equilibrium sampler.
    EquilibriumCheck {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Matrix OU eigenvalues against DOU simulation (beta 1 or 2).
    MatrixCheck {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,
        #[arg(long, default_value = "0.25,1")]
        t_grid: String,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Coupling experiments.
    Coupling {
        #[arg(value_enum)]
        mode: CouplingMode,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, default_value_t = 0.001)]
        dt: f64,
        /// Initial area of the tail experiment.
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value = "4,25,100")]
        u_grid: String,
        #[arg(long, default_value = "0:3:31")]
        t_grid: String,
        #[arg(long, default_value_t = 2.0)]
        kappa: f64,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
    },
    /// Lower and upper cutoff bounds over sizes and betas for x0 = a 1.
    CutoffSweep {
        #[arg(long, default_value = "16,64,256")]
        ns: String,
        #[arg(long, default_value = "0,1,2")]
        betas: String,
        #[arg(long, default_value = "0:20:41")]
        t_grid: String,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        kappa: f64,
        /// Monte Carlo replicas for the projected TV; 0 disables it.
        #[arg(long, default_value_t = 0)]
        replicas: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Reproduce the shared-noise trajectories and the n = 50 Hellinger curve.
    Figures {
        #[arg(long, value_enum, default_value_t = Figure::All)]
        which: Figure,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 5.0)]
        horizon: f64,
    },
}

/// Append `--key value` for every config-file entry whose flag is absent
/// from `argv`. Unknown keys then fail in the parser like unknown flags.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let mut out = argv;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .filter(|(k, _)| !k.is_empty())
            .ok_or_else(|| format!("{path}:{}: expected key=value", lineno + 1))?;
        if key == "config" {
            return Err(format!("{path}:{}: nested config files are not supported", lineno + 1));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let given = out.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        if key == "plot" {
            match value {
                "true" => out.push(flag),
                "false" => {}
                _ => return Err(format!("{path}:{}: plot must be true or false", lineno + 1)),
            }
        } else {
            out.push(format!("{flag}={value}"));
        }
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// `start:stop:count` (inclusive, evenly spaced), a comma list, or empty.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}' in grid '{s}'"));
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let k: usize = parts[2].trim().parse().map_err(|_| format!("bad count in grid '{s}'"))?;
        return Ok(match k {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
        });
    }
    if parts.len() != 1 {
        return Err(format!("grid '{s}' is neither start:stop:count nor a list"));
    }
    parse_list(s)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}'")))
        .collect()
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad size '{p}'")))
        .collect()
}
