use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirac_minmax::driver::{linspace, TrialFamily};
use dirac_minmax::CouplingFamily;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "dirac-minmax", version)]
#[command(about = "Variational one-electron Dirac solver based on the min-max principle")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Speed of light in atomic units (default 137.035999084).
    #[arg(long, global = true)]
    pub c: Option<f64>,

    /// Flat key=value file mirroring the flags; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Min-max ground state for one trial family
    Solve(SolveArgs),

    /// Parameter scans written as CSV
    #[command(subcommand)]
    Scan(ScanCommand),

    /// Finite-basis experiments reported as JSON
    #[command(subcommand)]
    Matrix(MatrixCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Trial {
    Sto,
    ExactPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coupling {
    Kb,
    SameRadial,
    KappaScaled,
}

impl From<Coupling> for CouplingFamily {
    fn from(c: Coupling) -> Self {
        match c {
            Coupling::Kb => CouplingFamily::KineticBalance,
            Coupling::SameRadial => CouplingFamily::SameRadial,
            Coupling::KappaScaled => CouplingFamily::KappaScaled,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrialArgs {
    /// Upper-component family.
    #[arg(long, value_enum, default_value = "sto")]
    pub trial: Trial,

    /// Principal number n of the r^(n-1) e^(-zeta r) trial.
    #[arg(long = "sto-n", default_value_t = 1)]
    pub sto_n: u32,

    /// Coupling family (default: kb for sto, same-radial for exact-power).
    #[arg(long, value_enum)]
    pub coupling: Option<Coupling>,
}

impl TrialArgs {
    pub fn family(&self) -> Result<TrialFamily, CliError> {
        match self.trial {
            Trial::Sto if self.sto_n == 0 => Err(CliError::Usage("--sto-n must be at least 1".into())),
            Trial::Sto => Ok(TrialFamily::Sto(self.sto_n)),
            Trial::ExactPower => Ok(TrialFamily::ExactPower),
        }
    }

    pub fn coupling(&self) -> Result<CouplingFamily, CliError> {
        let trial = self.family()?;
        let coupling = self.coupling.map(CouplingFamily::from).unwrap_or(trial.default_coupling());
        if trial == TrialFamily::ExactPower && coupling != CouplingFamily::SameRadial {
            return Err(CliError::Usage(format!(
                "the exact-power trial needs --coupling same-radial; {} makes the lower potential integral diverge",
                coupling.name()
            )));
        }
        Ok(coupling)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Nuclear charge.
    #[arg(long = "Z")]
    pub z: f64,

    #[command(flatten)]
    pub trial: TrialArgs,

    /// Seed exponent; the search covers [zeta/4, 4 zeta]. Default nZ.
    #[arg(long)]
    pub zeta: Option<f64>,

    /// Grid points of the exponent pre-scan.
    #[arg(long, default_value_t = 41)]
    pub points: usize,

    /// Write the JSON document here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ScanCommand {
    /// Energy along the coupling for several exponents
    Shower(ShowerArgs),
    /// Both stationary roots and potential expectations against the exponent
    Fig5(Fig5Args),
    /// Same-radial min-max for several STO principal numbers
    DftFallacy(DftFallacyArgs),
    /// Spurious (negative-branch) root against the exponent
    Maxmin(MaxminArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ShowerArgs {
    #[arg(long = "Z")]
    pub z: f64,

    #[command(flatten)]
    pub trial: TrialArgs,

    /// Exponents, as lo:hi:points or a comma list.
    #[arg(long)]
    pub zeta: Grid,

    /// Coupling parameters, as lo:hi:points or a comma list.
    #[arg(long)]
    pub lambda: Grid,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Fig5Args {
    #[arg(long = "Z")]
    pub z: f64,

    #[command(flatten)]
    pub trial: TrialArgs,

    #[arg(long, default_value = "0.1:3:30")]
    pub zeta: Grid,

    /// Dimension of the lower space for the negative root (1 to 8).
    #[arg(long = "lower-dim", default_value_t = 1)]
    pub lower_dim: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DftFallacyArgs {
    #[arg(long = "Z")]
    pub z: f64,

    /// STO principal numbers.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub n: Vec<u32>,

    /// Grid points of each exponent pre-scan.
    #[arg(long, default_value_t = 41)]
    pub points: usize,

    /// Radii for the densities.
    #[arg(long, default_value = "0.01:20:400")]
    pub r: Grid,

    /// Summary CSV; densities go to the same name with a .density.csv suffix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MaxminArgs {
    #[arg(long = "Z")]
    pub z: f64,

    #[command(flatten)]
    pub trial: TrialArgs,

    #[arg(long, default_value = "0.001:2:50")]
    pub zeta: Grid,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MatrixCommand {
    /// Balanced against detuned lower basis
    Collapse(CollapseArgs),
    /// Spectrum with the negative-energy pseudopotential
    Nepp(NeppArgs),
    /// Spectral mirror symmetry under charge conjugation
    Conjugation(BasisArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BasisArgs {
    #[arg(long = "Z", default_value_t = 1.0)]
    pub z: f64,

    /// Even-tempered upper basis zeta0,ratio,count.
    #[arg(long, default_value = "0.5,2,4")]
    pub uppers: EvenTempered,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CollapseArgs {
    #[command(flatten)]
    pub basis: BasisArgs,

    /// Factor applied to the exponents of the balanced lowers.
    #[arg(long, default_value_t = 4.0)]
    pub detune: f64,
}

#[derive(Debug, Clone, Args)]
pub struct NeppArgs {
    #[command(flatten)]
    pub basis: BasisArgs,

    /// Energy the negative branch is moved to: "exact" or a total energy.
    #[arg(long = "eg", alias = "Eg", default_value = "exact")]
    pub eg: Target,
}

/// A list of grid values, with the text it was parsed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub values: Vec<f64>,
    spec: String,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let values = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(format!("expected lo:hi:points, got {s:?}"));
            };
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            let n: usize = n.trim().parse().map_err(|e| format!("bad point count {n:?}: {e}"))?;
            if n < 2 || !(lo < hi) {
                return Err(format!("need lo < hi and at least 2 points, got {s:?}"));
            }
            linspace(lo, hi, n)
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(format!("grid {s:?} is empty or not finite"));
        }
        Ok(Grid {
            values,
            spec: s.trim().to_string(),
        })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenTempered {
    pub zeta0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl FromStr for EvenTempered {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [z, r, n] = parts[..] else {
            return Err(format!("expected zeta0,ratio,count, got {s:?}"));
        };
        let zeta0: f64 = z.parse().map_err(|e| format!("bad zeta0 {z:?}: {e}"))?;
        let ratio: f64 = r.parse().map_err(|e| format!("bad ratio {r:?}: {e}"))?;
        let count: usize = n.parse().map_err(|e| format!("bad count {n:?}: {e}"))?;
        if !(zeta0 > 0.0) || !(ratio > 1.0) || count == 0 {
            return Err(format!("need zeta0 > 0, ratio > 1, count >= 1, got {s:?}"));
        }
        Ok(EvenTempered { zeta0, ratio, count })
    }
}

impl fmt::Display for EvenTempered {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.zeta0, self.ratio, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Exact,
    Value(f64),
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Target::Exact);
        }
        s.parse::<f64>()
            .map(Target::Value)
            .map_err(|e| format!("expected \"exact\" or a number, got {s:?}: {e}"))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Exact => write!(f, "exact"),
            Target::Value(v) => write!(f, "{v}"),
        }
    }
}

const COMMANDS: [&str; 3] = ["solve", "scan", "matrix"];

/// Splices the `--config` file's key=value pairs into the argument list
/// right after the subcommand, so that flags typed later override them.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key == "config" {
            return Err(CliError::Usage(format!("{path}:{}: config files cannot nest", lineno + 1)));
        }
        extra.push(format!("--{key}"));
        extra.push(value.trim().to_string());
    }
    let Some(cmd) = args.iter().position(|a| COMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };
    let at = if args[cmd] == "solve" { cmd + 1 } else { (cmd + 2).min(args.len()) };
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
