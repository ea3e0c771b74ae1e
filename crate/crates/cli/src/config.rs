//! Run configuration: command-line flags layered over an optional flat
//! `key = value` document whose keys mirror the long flag names.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bellsim_core::lrhvm::{default_relaxation, DEFAULT_EXPERIMENT_DURATION};
use bellsim_core::{Complex64, PrepRoute, PureState, RelaxationParams};
use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};

/// Largest number of points a grid may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "bellsim", version, about = "Density-matrix simulator for NMR Bell-inequality tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    ChshSweep,
    BellEval,
    PpsPrep,
    Tomography,
    PolarizationSweep,
    LrhvmCompare,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bulk CHSH curve over a theta grid.
    ChshSweep(Flags),
    /// Evaluate one inequality (CHSH at --theta-star, or --inequality FILE).
    BellEval(Flags),
    /// Emit the prepared pseudo-pure density matrix.
    PpsPrep(Flags),
    /// Pauli tomography of the prepared state.
    Tomography(Flags),
    /// Raw CHSH at --theta-star across a polarization grid.
    PolarizationSweep(Flags),
    /// Pure-state and bulk-ensemble CHSH curves side by side.
    LrhvmCompare(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::ChshSweep(f) => (CommandKind::ChshSweep, f),
            Command::BellEval(f) => (CommandKind::BellEval, f),
            Command::PpsPrep(f) => (CommandKind::PpsPrep, f),
            Command::Tomography(f) => (CommandKind::Tomography, f),
            Command::PolarizationSweep(f) => (CommandKind::PolarizationSweep, f),
            Command::LrhvmCompare(f) => (CommandKind::LrhvmCompare, f),
        }
    }
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::ChshSweep => "chsh-sweep",
            CommandKind::BellEval => "bell-eval",
            CommandKind::PpsPrep => "pps-prep",
            CommandKind::Tomography => "tomography",
            CommandKind::PolarizationSweep => "polarization-sweep",
            CommandKind::LrhvmCompare => "lrhvm-compare",
        }
    }
}

/// Flags shared by every subcommand. All optional so that a config
/// document can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat `key = value` document; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// zero | uniform | cat | singlet | custom
    #[arg(long)]
    pub state: Option<String>,
    /// Qubit count for zero, uniform and cat.
    #[arg(long)]
    pub qubits: Option<String>,
    /// Custom amplitudes `re[,im];re[,im];…`, rescaled to unit norm.
    #[arg(long, allow_hyphen_values = true)]
    pub amplitudes: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Degrees, `start:stop:step`.
    #[arg(long)]
    pub theta: Option<String>,
    /// Degrees.
    #[arg(long)]
    pub theta_star: Option<String>,
    /// Polarization grid `start:stop:step`.
    #[arg(long)]
    pub eps: Option<String>,
    /// Per-qubit `T1,T2` seconds separated by `;`, or `default`.
    #[arg(long)]
    pub relax: Option<String>,
    /// Seconds over which relaxation acts.
    #[arg(long)]
    pub duration: Option<String>,
    /// auto | direct | thermal
    #[arg(long)]
    pub route: Option<String>,
    #[arg(long)]
    pub shots: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// JSON inequality document for bell-eval.
    #[arg(long)]
    pub inequality: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
}

const KEYS: [&str; 15] = [
    "state",
    "qubits",
    "amplitudes",
    "epsilon",
    "theta",
    "theta-star",
    "eps",
    "relax",
    "duration",
    "route",
    "shots",
    "seed",
    "inequality",
    "output",
    "format",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateChoice {
    Zero(usize),
    Uniform(usize),
    Cat(usize),
    Singlet,
    Custom(Vec<Complex64>),
}

impl StateChoice {
    pub fn label(&self) -> &'static str {
        match self {
            StateChoice::Zero(_) => "zero",
            StateChoice::Uniform(_) => "uniform",
            StateChoice::Cat(_) => "cat",
            StateChoice::Singlet => "singlet",
            StateChoice::Custom(_) => "custom",
        }
    }

    pub fn pure_state(&self) -> CliResult<PureState> {
        Ok(match self {
            StateChoice::Zero(n) => PureState::zero(*n)?,
            StateChoice::Uniform(n) => PureState::uniform(*n)?,
            StateChoice::Cat(n) => PureState::cat(*n)?,
            StateChoice::Singlet => PureState::singlet(),
            StateChoice::Custom(amps) => PureState::normalized(amps.clone())?,
        })
    }
}

/// Inclusive `start:stop:step` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn parse(text: &str, what: &str) -> CliResult<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(CliError::validation(format!(
                "{what} grid must be start:stop:step, got '{text}'"
            )));
        };
        let grid = Grid {
            start: parse_f64(start, what)?,
            stop: parse_f64(stop, what)?,
            step: parse_f64(step, what)?,
        };
        grid.count()?;
        Ok(grid)
    }

    pub fn count(&self) -> CliResult<usize> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(CliError::validation(format!("grid step must be positive, got {}", self.step)));
        }
        if !self.stop.is_finite() || self.start > self.stop {
            return Err(CliError::validation(format!(
                "grid start {} exceeds stop {}",
                self.start, self.stop
            )));
        }
        let intervals = ((self.stop - self.start) / self.step + 1e-9).floor();
        if intervals + 1.0 > MAX_GRID_POINTS as f64 {
            return Err(CliError::validation(format!(
                "grid has {} points, more than the cap of {MAX_GRID_POINTS}",
                intervals + 1.0
            )));
        }
        Ok(intervals as usize + 1)
    }

    pub fn points(&self) -> CliResult<Vec<f64>> {
        let n = self.count()?;
        Ok((0..n)
            .map(|i| (self.start + i as f64 * self.step).min(self.stop))
            .collect())
    }

    fn render(&self) -> String {
        format!("{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub state: StateChoice,
    pub epsilon: f64,
    /// Degrees.
    pub theta: Grid,
    /// Degrees.
    pub theta_star: f64,
    pub eps: Grid,
    pub relaxation: Option<Vec<RelaxationParams>>,
    pub duration: f64,
    pub route: PrepRoute,
    pub shots: Option<u64>,
    pub seed: u64,
    pub inequality: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn parse_f64(text: &str, what: &str) -> CliResult<f64> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::validation(format!("{what}: cannot parse '{}' as a number", text.trim())))?;
    if !value.is_finite() {
        return Err(CliError::validation(format!("{what}: value must be finite")));
    }
    Ok(value)
}

fn parse_u64(text: &str, what: &str) -> CliResult<u64> {
    text.trim()
        .parse()
        .map_err(|_| CliError::validation(format!("{what}: cannot parse '{}' as a non-negative integer", text.trim())))
}

/// Parses a config document into a key → value map.
pub fn parse_document(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::validation(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::validation(format!("config line {}: unknown key '{key}'", lineno + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::validation(format!("config line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(out)
}

fn flag_map(flags: &Flags) -> BTreeMap<String, String> {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let pairs = [
        ("state", flags.state.clone()),
        ("qubits", flags.qubits.clone()),
        ("amplitudes", flags.amplitudes.clone()),
        ("epsilon", flags.epsilon.clone()),
        ("theta", flags.theta.clone()),
        ("theta-star", flags.theta_star.clone()),
        ("eps", flags.eps.clone()),
        ("relax", flags.relax.clone()),
        ("duration", flags.duration.clone()),
        ("route", flags.route.clone()),
        ("shots", flags.shots.clone()),
        ("seed", flags.seed.clone()),
        ("inequality", path(&flags.inequality)),
        ("output", path(&flags.output)),
        ("format", flags.format.clone()),
    ];
    pairs
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
}

fn parse_amplitudes(text: &str) -> CliResult<Vec<Complex64>> {
    text.split(';')
        .map(|entry| {
            let parts: Vec<&str> = entry.split(',').collect();
            match parts.as_slice() {
                [re] => Ok(Complex64::new(parse_f64(re, "amplitudes")?, 0.0)),
                [re, im] => Ok(Complex64::new(parse_f64(re, "amplitudes")?, parse_f64(im, "amplitudes")?)),
                _ => Err(CliError::validation(format!("amplitudes: malformed entry '{entry}'"))),
            }
        })
        .collect()
}

fn parse_relaxation(text: &str, duration: f64) -> CliResult<Vec<RelaxationParams>> {
    if text.trim() == "default" {
        return Ok(default_relaxation()
            .into_iter()
            .map(|p| RelaxationParams { duration, ..p })
            .collect());
    }
    text.split(';')
        .map(|entry| {
            let (t1, t2) = entry
                .split_once(',')
                .ok_or_else(|| CliError::validation(format!("relax: expected T1,T2, got '{entry}'")))?;
            Ok(RelaxationParams::new(parse_f64(t1, "relax")?, parse_f64(t2, "relax")?, duration)?)
        })
        .collect()
}

impl RunConfig {
    /// Resolves flags over the document named by `--config`, if any.
    pub fn resolve(command: CommandKind, flags: &Flags) -> CliResult<Self> {
        let mut merged = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::validation(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_document(&text)?
            }
            None => BTreeMap::new(),
        };
        merged.extend(flag_map(flags));
        Self::from_map(command, &merged)
    }

    pub fn from_map(command: CommandKind, map: &BTreeMap<String, String>) -> CliResult<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);

        let qubits = match get("qubits") {
            Some(q) => {
                let q = parse_u64(q, "qubits")? as usize;
                if q == 0 {
                    return Err(CliError::validation("qubits must be at least 1"));
                }
                q
            }
            None => 2,
        };
        let state = match get("state").unwrap_or("cat") {
            "zero" => StateChoice::Zero(qubits),
            "uniform" => StateChoice::Uniform(qubits),
            "cat" => StateChoice::Cat(qubits),
            "singlet" => StateChoice::Singlet,
            "custom" => {
                let amps = get("amplitudes")
                    .ok_or_else(|| CliError::validation("state custom requires amplitudes"))?;
                StateChoice::Custom(parse_amplitudes(amps)?)
            }
            other => return Err(CliError::validation(format!("unknown state label '{other}'"))),
        };
        if get("amplitudes").is_some() && !matches!(state, StateChoice::Custom(_)) {
            return Err(CliError::validation("amplitudes given without state custom"));
        }
        state.pure_state()?;

        let epsilon = get("epsilon").map(|e| parse_f64(e, "epsilon")).transpose()?.unwrap_or(1e-6);
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(CliError::validation(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        let theta = Grid::parse(get("theta").unwrap_or("0:90:0.5"), "theta")?;
        if theta.start < 0.0 || theta.stop > 90.0 {
            return Err(CliError::validation("theta grid must lie within [0, 90] degrees"));
        }
        let theta_star = get("theta-star").map(|t| parse_f64(t, "theta-star")).transpose()?.unwrap_or(22.5);
        let eps = Grid::parse(get("eps").unwrap_or("0.05:1:0.05"), "eps")?;
        let duration = get("duration")
            .map(|d| parse_f64(d, "duration"))
            .transpose()?
            .unwrap_or(DEFAULT_EXPERIMENT_DURATION);
        if duration < 0.0 {
            return Err(CliError::validation("duration must be non-negative"));
        }
        let relaxation = get("relax").map(|r| parse_relaxation(r, duration)).transpose()?;
        let route = match get("route").unwrap_or("auto") {
            "auto" => PrepRoute::Auto,
            "direct" => PrepRoute::Direct,
            "thermal" => PrepRoute::Thermal,
            other => return Err(CliError::validation(format!("unknown route '{other}'"))),
        };
        let shots = get("shots").map(|s| parse_u64(s, "shots")).transpose()?;
        if shots == Some(0) {
            return Err(CliError::validation("shots must be at least 1"));
        }
        let seed = get("seed").map(|s| parse_u64(s, "seed")).transpose()?.unwrap_or(0);
        let format = match get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::validation(format!("unknown format '{other}'"))),
        };

        Ok(Self {
            command,
            state,
            epsilon,
            theta,
            theta_star,
            eps,
            relaxation,
            duration,
            route,
            shots,
            seed,
            inequality: get("inequality").map(PathBuf::from),
            output: get("output").map(PathBuf::from),
            format,
        })
    }

    /// Echo of every resolved setting, in a fixed order.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("command".to_string(), self.command.name().to_string()),
            ("state".to_string(), self.state.label().to_string()),
        ];
        match &self.state {
            StateChoice::Zero(n) | StateChoice::Uniform(n) | StateChoice::Cat(n) => {
                out.push(("qubits".into(), n.to_string()));
            }
            StateChoice::Singlet => out.push(("qubits".into(), "2".into())),
            StateChoice::Custom(amps) => {
                out.push(("qubits".into(), amps.len().trailing_zeros().to_string()));
                let text = amps
                    .iter()
                    .map(|a| format!("{},{}", a.re, a.im))
                    .collect::<Vec<_>>()
                    .join(";");
                out.push(("amplitudes".into(), text));
            }
        }
        let relax = match &self.relaxation {
            None => "none".to_string(),
            Some(params) => params
                .iter()
                .map(|p| format!("{},{}", p.t1, p.t2))
                .collect::<Vec<_>>()
                .join(";"),
        };
        let route = match self.route {
            PrepRoute::Auto => "auto",
            PrepRoute::Direct => "direct",
            PrepRoute::Thermal => "thermal",
        };
        let opt_path = |p: &Option<PathBuf>| p.as_deref().map_or("-".to_string(), |p: &Path| p.display().to_string());
        out.extend([
            ("epsilon".to_string(), self.epsilon.to_string()),
            ("theta".to_string(), self.theta.render()),
            ("theta-star".to_string(), self.theta_star.to_string()),
            ("eps".to_string(), self.eps.render()),
            ("relax".to_string(), relax),
            ("duration".to_string(), self.duration.to_string()),
            ("route".to_string(), route.to_string()),
            ("shots".to_string(), self.shots.map_or("none".to_string(), |s| s.to_string())),
            ("seed".to_string(), self.seed.to_string()),
            ("inequality".to_string(), opt_path(&self.inequality)),
            ("output".to_string(), opt_path(&self.output)),
            (
                "format".to_string(),
                match self.format {
                    Format::Csv => "csv",
                    Format::Json => "json",
                }
                .to_string(),
            ),
        ]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn grid_counts_inclusive_endpoints() {
        assert_eq!(Grid::parse("0:90:0.5", "theta").unwrap().count().unwrap(), 181);
        assert_eq!(Grid::parse("0.05:1.0:0.05", "eps").unwrap().count().unwrap(), 20);
        assert_eq!(Grid::parse("3:3:1", "t").unwrap().points().unwrap(), vec![3.0]);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::parse("0:90:0", "t").is_err());
        assert!(Grid::parse("0:90:-1", "t").is_err());
        assert!(Grid::parse("10:0:1", "t").is_err());
        assert!(Grid::parse("0:1:1e-7", "t").is_err());
        assert!(Grid::parse("0:90", "t").is_err());
        assert!(Grid::parse("a:1:1", "t").is_err());
    }

    #[test]
    fn document_parsing() {
        let doc = "# comment\nstate = singlet\n\nepsilon=0.5\ntheta_star = 30\n";
        let m = parse_document(doc).unwrap();
        assert_eq!(m["state"], "singlet");
        assert_eq!(m["theta-star"], "30");
        assert!(parse_document("bogus = 1").is_err());
        assert!(parse_document("state cat").is_err());
        assert!(parse_document("state = cat\nstate = zero").is_err());
    }

    #[test]
    fn defaults_and_labels() {
        let cfg = RunConfig::from_map(CommandKind::ChshSweep, &BTreeMap::new()).unwrap();
        assert_eq!(cfg.state, StateChoice::Cat(2));
        assert_eq!(cfg.epsilon, 1e-6);
        assert_eq!(cfg.format, Format::Csv);
        let err = RunConfig::from_map(CommandKind::ChshSweep, &map(&[("state", "bell")])).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn custom_amplitudes_are_rescaled() {
        let cfg = RunConfig::from_map(
            CommandKind::PpsPrep,
            &map(&[("state", "custom"), ("amplitudes", "1;0;0;1")]),
        )
        .unwrap();
        let psi = cfg.state.pure_state().unwrap();
        assert!((psi.amplitudes()[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(RunConfig::from_map(CommandKind::PpsPrep, &map(&[("state", "custom"), ("amplitudes", "1;0;0")])).is_err());
    }

    #[test]
    fn relaxation_parsing() {
        let cfg = RunConfig::from_map(CommandKind::ChshSweep, &map(&[("relax", "5,0.2;15,0.3")])).unwrap();
        assert_eq!(cfg.relaxation.unwrap(), default_relaxation());
        assert!(RunConfig::from_map(CommandKind::ChshSweep, &map(&[("relax", "5")])).is_err());
        assert!(RunConfig::from_map(CommandKind::ChshSweep, &map(&[("relax", "-5,1")])).is_err());
    }
}
