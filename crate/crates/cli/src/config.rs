//! Run configuration: a flat `key = value` file overridden by flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cmc_orbit::shooting::SolverConfig;
use cmc_orbit::{Family, FamilyKind, Params};

use crate::error::CliError;

pub const CONFIG_KEYS: &str = "\
CONFIG FILE
  One `key = value` per line; `#` starts a comment. Flags override keys.
  family          s2n | s3n-1
  n               integer >= 2
  lambda          mean curvature target, > 0
  lambdas         comma-separated list (sweep, verify)
  ns              comma-separated list (verify)
  r0              initial radius (shoot, assemble)
  rtol            integrator relative tolerance
  atol            integrator absolute tolerance
  event_tol       event localization tolerance
  h_max           largest integrator step
  max_steps       step budget per shot
  tol_r0          bisection width on r0
  max_bisections  bisection budget
  strict_monitors true | false
  oracle          true | false (verify: cross-check against the fixed-step oracle)
  out             output directory
  plot            true | false (shoot: also write an SVG)
";

#[derive(Debug, Parser)]
#[command(name = "cmc-orbit", version, about = "Shoot, solve and certify generating curves of CMC hypersurfaces", after_long_help = CONFIG_KEYS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one shot from a given initial radius.
    Shoot(CommonArgs),
    /// Bisect on the initial radius, then assemble and certify the curve.
    Solve(CommonArgs),
    /// Assemble and certify from a known initial radius, or re-certify a
    /// curve written by `solve`.
    Assemble(CommonArgs),
    /// Run the claim suite.
    Verify(CommonArgs),
    /// Run `solve` over a list of lambda values.
    Sweep(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Shoot(a) | Command::Solve(a) | Command::Assemble(a) | Command::Verify(a) | Command::Sweep(a) => a,
        }
    }

    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Shoot(_) => CommandKind::Shoot,
            Command::Solve(_) => CommandKind::Solve,
            Command::Assemble(_) => CommandKind::Assemble,
            Command::Verify(_) => CommandKind::Verify,
            Command::Sweep(_) => CommandKind::Sweep,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// s2n or s3n-1
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated lambda values.
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Comma-separated dimensions for `verify`.
    #[arg(long)]
    pub ns: Option<String>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long = "event-tol")]
    pub event_tol: Option<f64>,
    #[arg(long = "tol-r0")]
    pub tol_r0: Option<f64>,
    #[arg(long = "strict-monitors")]
    pub strict_monitors: bool,
    /// Skip the fixed-step oracle cross-check in `verify`.
    #[arg(long = "no-oracle")]
    pub no_oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; keys are listed in `cmc-orbit --help`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub plot: bool,
    /// Curve CSV written by `solve`; its JSON sidecar is read alongside.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Shoot,
    Solve,
    Assemble,
    Verify,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub family: Option<FamilyKind>,
    pub n: Option<u32>,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub ns: Option<Vec<u32>>,
    pub r0: Option<f64>,
    pub solver: SolverConfig,
    pub oracle: bool,
    pub out: PathBuf,
    pub plot: bool,
    pub curve: Option<PathBuf>,
}

const KNOWN_KEYS: [&str; 17] = [
    "family",
    "n",
    "lambda",
    "lambdas",
    "ns",
    "r0",
    "rtol",
    "atol",
    "event_tol",
    "h_max",
    "max_steps",
    "tol_r0",
    "max_bisections",
    "strict_monitors",
    "oracle",
    "out",
    "plot",
];

/// Parse the flat `key = value` format.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(format!("line {}: expected `key = value`", lineno + 1)));
        };
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::config(format!("cannot parse `{key}` value `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::config(format!("`{key}` must be true or false, got `{v}`"))),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

pub fn parse_family(v: &str) -> Result<FamilyKind, CliError> {
    match v {
        "s2n" => Ok(FamilyKind::S2n),
        "s3n-1" => Ok(FamilyKind::S3nMinus1),
        _ => Err(CliError::config(format!("family must be s2n or s3n-1, got `{v}`"))),
    }
}

impl RunConfig {
    fn defaults(command: CommandKind) -> Self {
        Self {
            command,
            family: None,
            n: None,
            lambda: None,
            lambdas: None,
            ns: None,
            r0: None,
            solver: SolverConfig::default(),
            oracle: true,
            out: PathBuf::from("out"),
            plot: false,
            curve: None,
        }
    }

    fn apply_key(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "family" => self.family = Some(parse_family(v)?),
            "n" => self.n = Some(parse_value(key, v)?),
            "lambda" => self.lambda = Some(parse_value(key, v)?),
            "lambdas" => self.lambdas = Some(parse_list(key, v)?),
            "ns" => self.ns = Some(parse_list(key, v)?),
            "r0" => self.r0 = Some(parse_value(key, v)?),
            "rtol" => self.solver.integrator.rtol = parse_value(key, v)?,
            "atol" => self.solver.integrator.atol = parse_value(key, v)?,
            "event_tol" => self.solver.integrator.event_tol = parse_value(key, v)?,
            "h_max" => self.solver.integrator.h_max = parse_value(key, v)?,
            "max_steps" => self.solver.integrator.max_steps = parse_value(key, v)?,
            "tol_r0" => self.solver.tol_r0 = parse_value(key, v)?,
            "max_bisections" => self.solver.max_bisections = parse_value(key, v)?,
            "strict_monitors" => self.solver.strict_monitors = parse_bool(key, v)?,
            "oracle" => self.oracle = parse_bool(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "plot" => self.plot = parse_bool(key, v)?,
            _ => return Err(CliError::config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Defaults, then the config file, then flags; validated.
    pub fn resolve(command: &Command) -> Result<Self, CliError> {
        let args = command.args();
        let mut cfg = Self::defaults(command.kind());
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in parse_config_text(&text)? {
                cfg.apply_key(&k, &v)?;
            }
        }
        if let Some(v) = &args.family {
            cfg.family = Some(parse_family(v)?);
        }
        if let Some(v) = args.n {
            cfg.n = Some(v);
        }
        if let Some(v) = args.lambda {
            cfg.lambda = Some(v);
        }
        if let Some(v) = &args.lambdas {
            cfg.lambdas = Some(parse_list("lambdas", v)?);
        }
        if let Some(v) = &args.ns {
            cfg.ns = Some(parse_list("ns", v)?);
        }
        if let Some(v) = args.r0 {
            cfg.r0 = Some(v);
        }
        if let Some(v) = args.rtol {
            cfg.solver.integrator.rtol = v;
        }
        if let Some(v) = args.atol {
            cfg.solver.integrator.atol = v;
        }
        if let Some(v) = args.event_tol {
            cfg.solver.integrator.event_tol = v;
        }
        if let Some(v) = args.tol_r0 {
            cfg.solver.tol_r0 = v;
        }
        cfg.solver.strict_monitors |= args.strict_monitors;
        cfg.plot |= args.plot;
        if args.no_oracle {
            cfg.oracle = false;
        }
        if let Some(v) = &args.out {
            cfg.out = v.clone();
        }
        cfg.curve = args.curve.clone();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.solver.validate().map_err(CliError::config)?;
        if let Some(n) = self.n {
            Family::new(self.family_kind(), n).map_err(|e| CliError::config(e.to_string()))?;
        }
        for &l in self.lambda.iter().chain(self.lambdas.iter().flatten()) {
            if !(l > 0.0 && l.is_finite()) {
                return Err(CliError::config(format!("lambda must be positive and finite, got {l}")));
            }
        }
        for &n in self.ns.iter().flatten() {
            if n < 2 {
                return Err(CliError::config(format!("n must be at least 2, got {n}")));
            }
        }
        match self.command {
            CommandKind::Shoot => {
                self.params()?;
                self.checked_r0()?;
            }
            CommandKind::Solve => {
                self.params()?;
            }
            CommandKind::Assemble => {
                if self.curve.is_none() {
                    self.params()?;
                    self.checked_r0()?;
                }
            }
            CommandKind::Sweep => {
                self.family()?;
            }
            CommandKind::Verify => {}
        }
        Ok(())
    }

    pub fn family_kind(&self) -> FamilyKind {
        self.family.unwrap_or(FamilyKind::S2n)
    }

    pub fn family(&self) -> Result<Family, CliError> {
        let n = self.n.unwrap_or(2);
        Family::new(self.family_kind(), n).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn params(&self) -> Result<Params, CliError> {
        let lambda = self
            .lambda
            .ok_or_else(|| CliError::config("lambda is required".to_string()))?;
        Params::new(self.family()?, lambda).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn checked_r0(&self) -> Result<f64, CliError> {
        let r0 = self
            .r0
            .ok_or_else(|| CliError::config("r0 is required".to_string()))?;
        let upper = self.family()?.r0_upper();
        if !(r0 > 0.0 && r0 < upper) {
            return Err(CliError::config(format!("r0 must lie in (0, {upper}), got {r0}")));
        }
        Ok(r0)
    }
}
