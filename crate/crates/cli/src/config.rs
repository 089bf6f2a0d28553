//! Run configuration: command-line flags layered over a flat `key = value`
//! config file layered over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use kawahara::periodic::DEFAULT_TOL;
use kawahara::solitary::DEFAULT_MATCH_TOL;

/// Largest Fourier truncation accepted on the command line.
pub const MAX_MODES: usize = 256;

#[derive(Debug, Parser)]
#[command(
    name = "kawahara",
    version,
    about = "Kawahara waves and transverse spectra"
)]
pub struct Cli {
    /// Flat `key = value` config file; flags take precedence over its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed, recorded in every output.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fourier truncation N (modes −N..N).
    #[arg(long, short = 'n', global = true)]
    pub modes: Option<usize>,
    /// Residual tolerance of the periodic-wave Newton solve.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Wave,
    Spectrum,
    BlochSweep,
    Weyl,
    Solitary,
    Growth,
    VerifyAll,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Wave => "wave",
            Kind::Spectrum => "spectrum",
            Kind::BlochSweep => "bloch-sweep",
            Kind::Weyl => "weyl",
            Kind::Solitary => "solitary",
            Kind::Growth => "growth",
            Kind::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Periodic wave profiles.
    Wave(Grid),
    /// Pencil spectra at given Floquet exponents and drifts.
    Spectrum(Grid),
    /// Pencil spectra over a grid of Floquet exponents.
    BlochSweep(Grid),
    /// Weyl-sequence ratios.
    Weyl(Grid),
    /// Generalized solitary waves.
    Solitary(Grid),
    /// Growth rates of the transverse evolution.
    Growth(Grid),
    /// Built-in consistency checks.
    VerifyAll(Grid),
}

impl Command {
    pub fn parts(&self) -> (Kind, &Grid) {
        match self {
            Command::Wave(g) => (Kind::Wave, g),
            Command::Spectrum(g) => (Kind::Spectrum, g),
            Command::BlochSweep(g) => (Kind::BlochSweep, g),
            Command::Weyl(g) => (Kind::Weyl, g),
            Command::Solitary(g) => (Kind::Solitary, g),
            Command::Growth(g) => (Kind::Growth, g),
            Command::VerifyAll(g) => (Kind::VerifyAll, g),
        }
    }
}

/// Parameter grids; lists are comma separated.
#[derive(Debug, Default, Args)]
pub struct Grid {
    /// Amplitude parameters a.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Wave speeds c.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Option<Vec<f64>>,
    /// Rescaled drifts Λ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    /// Floquet exponents γ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Option<Vec<f64>>,
    /// Rescaled transverse wavenumbers ω̃.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub omega: Option<Vec<f64>>,
    /// Phase shift τ of the Weyl sequence.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Plateau lengths of the Weyl sequence.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Matching point of the solitary shoot (default 16/√c).
    #[arg(long)]
    pub x_match: Option<f64>,
    /// Tail-defect tolerance of the solitary shoot.
    #[arg(long)]
    pub match_tol: Option<f64>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: Kind,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    /// Empty means the subcommand's default drift.
    pub lambda: Vec<f64>,
    /// Empty means the subcommand's default exponents.
    pub gamma: Vec<f64>,
    pub omega: Vec<f64>,
    pub tau: f64,
    pub ns: Vec<usize>,
    pub x_match: Option<f64>,
    pub match_tol: f64,
    pub modes: usize,
    pub tol: f64,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Parses the flat config format: one `key = value` per line, `#` starts a
/// comment, keys use `-` or `_` interchangeably.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!(
                "config line {}: unknown key `{}`",
                i + 1,
                k.trim()
            )));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(usage(format!(
                "config line {}: duplicate key `{key}`",
                i + 1
            )));
        }
    }
    Ok(map)
}

const KEYS: &[&str] = &[
    "a",
    "c",
    "lambda",
    "gamma",
    "omega",
    "tau",
    "ns",
    "x-match",
    "match-tol",
    "modes",
    "tol",
    "seed",
    "out",
];

struct Layer<'a>(&'a BTreeMap<String, String>);

impl Layer<'_> {
    fn scalar<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError> {
        self.0
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| usage(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, UsageError> {
        self.0
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| usage(format!("config key `{key}`: cannot parse `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }
}

impl RunConfig {
    /// Resolves flags over the config file over defaults and validates.
    pub fn resolve(cli: &Cli) -> Result<Self, UsageError> {
        let file = match &cli.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let f = Layer(&file);
        let (kind, g) = cli.command.parts();
        let cfg = RunConfig {
            subcommand: kind,
            a: pick(g.a.clone(), f.list("a")?, vec![0.1]),
            c: pick(g.c.clone(), f.list("c")?, vec![0.1]),
            lambda: pick(g.lambda.clone(), f.list("lambda")?, vec![]),
            gamma: pick(g.gamma.clone(), f.list("gamma")?, vec![]),
            omega: pick(g.omega.clone(), f.list("omega")?, vec![]),
            tau: pick(g.tau, f.scalar("tau")?, 0.3),
            ns: pick(g.ns.clone(), f.list("ns")?, vec![4, 8, 16, 32, 64]),
            x_match: g.x_match.or(f.scalar("x-match")?),
            match_tol: pick(g.match_tol, f.scalar("match-tol")?, DEFAULT_MATCH_TOL),
            modes: pick(cli.modes, f.scalar("modes")?, 32),
            tol: pick(cli.tol, f.scalar("tol")?, DEFAULT_TOL),
            seed: pick(cli.seed, f.scalar("seed")?, 0),
            out: pick(cli.out.clone(), f.scalar("out")?, PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        if self.a.is_empty() || self.c.is_empty() {
            return Err(usage("parameter grids for a and c must be non-empty"));
        }
        if !(1..=MAX_MODES).contains(&self.modes) {
            return Err(usage(format!(
                "modes must lie in 1..={MAX_MODES}, got {}",
                self.modes
            )));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(usage("plateau lengths must be positive and non-empty"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.a)
            && finite(&self.c)
            && finite(&self.lambda)
            && finite(&self.gamma)
            && finite(&self.omega)
            && self.tau.is_finite())
        {
            return Err(usage("grid values must be finite"));
        }
        if !(self.tol > 0.0 && self.match_tol > 0.0) {
            return Err(usage("tolerances must be positive"));
        }
        if self.out.as_os_str().is_empty() {
            return Err(usage("output directory must be non-empty"));
        }
        Ok(())
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("kawahara").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn config_file_format() {
        let m = parse_config_file("# comment\na = 0.1, 0.2\nx_match=50 # trailing\n\n").unwrap();
        assert_eq!(m["a"], "0.1, 0.2");
        assert_eq!(m["x-match"], "50");
        assert!(parse_config_file("bogus = 1").is_err());
        assert!(parse_config_file("a 0.1").is_err());
        assert!(parse_config_file("a = 1\na = 2").is_err());
    }

    #[test]
    fn precedence_flags_file_defaults() {
        let dir = std::env::temp_dir().join(format!("kawahara-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "a = 0.3\nc = 0.05\nseed = 9\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = RunConfig::resolve(&cli(&["--config", p, "wave", "--a", "0.2"])).unwrap();
        assert_eq!(cfg.a, vec![0.2]);
        assert_eq!(cfg.c, vec![0.05]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.modes, 32);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn validation() {
        assert!(RunConfig::resolve(&cli(&["wave", "--modes", "0"])).is_err());
        assert!(RunConfig::resolve(&cli(&["wave", "--modes", "1000"])).is_err());
        assert!(RunConfig::resolve(&cli(&["weyl", "--ns", "0,4"])).is_err());
        let cfg =
            RunConfig::resolve(&cli(&["spectrum", "--a", "0.1,0.2", "--gamma", "-0.25"])).unwrap();
        assert_eq!(cfg.a, vec![0.1, 0.2]);
        assert_eq!(cfg.gamma, vec![-0.25]);
    }
}
