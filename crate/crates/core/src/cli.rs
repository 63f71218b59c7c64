//! Command-line driver: price sweeps to CSV, the six-panel figure data set,
//! and a validation report.
//!
//! Settings come from flags, a `key = value` config file (`--config`), and
//! built-in defaults, in that order of precedence. Config keys are the flag
//! names without the leading dashes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::black_scholes::{bs_price, payoff, MarketParams, OptionKind, OptionSpec};
use crate::curve::PriceCurve;
use crate::error::{Error, Result};
use crate::fd::{fd_solve, FdGrid};
use crate::grid::UniformGrid;
use crate::oscillator::OscillatorParams;
use crate::quadrature::QuadratureSpec;
use crate::spectral::{
    effective_hamiltonian_residual, martingale_residual, oscillator_params_from_market,
    SpectralSolution,
};

/// Tilts and evaluation times of the six figure panels.
pub const FIG1_TILTS: [f64; 3] = [-0.03, -0.02, -0.01];
pub const FIG1_TIMES: [f64; 2] = [3.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSelection {
    ClosedForm,
    Spectral,
    Fd,
    All,
}

impl ModelSelection {
    pub fn spectral(self) -> bool {
        matches!(self, Self::Spectral | Self::All)
    }

    pub fn closed_form(self) -> bool {
        matches!(self, Self::ClosedForm | Self::All)
    }

    pub fn fd(self) -> bool {
        matches!(self, Self::Fd | Self::All)
    }
}

impl fmt::Display for ModelSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed_form",
            Self::Spectral => "spectral",
            Self::Fd => "fd",
            Self::All => "all",
        })
    }
}

impl FromStr for ModelSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" => Ok(Self::ClosedForm),
            "spectral" => Ok(Self::Spectral),
            "fd" => Ok(Self::Fd),
            "all" => Ok(Self::All),
            other => Err(Error::Usage(format!(
                "model must be closed_form, spectral, fd or all (got {other:?})"
            ))),
        }
    }
}

/// Everything one pricing run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mkt: MarketParams,
    pub spec: OptionSpec,
    pub t: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub steps: usize,
    pub model: ModelSelection,
    pub n_terms: usize,
    pub quad: QuadratureSpec,
    pub fd_nx: usize,
    pub fd_nt: usize,
    pub fd_halfwidth: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mkt: MarketParams {
                sigma: 0.25,
                r: 0.03,
                a: -0.03,
            },
            spec: OptionSpec {
                strike: 3.0,
                maturity: 5.0,
                kind: OptionKind::Call,
            },
            t: 3.0,
            s_min: 0.05,
            s_max: 8.0,
            steps: 400,
            model: ModelSelection::All,
            n_terms: 1024,
            quad: QuadratureSpec::default(),
            fd_nx: 2001,
            fd_nt: 2000,
            fd_halfwidth: 6.0,
            out: None,
        }
    }
}

impl RunConfig {
    /// Checks every invariant; violations are usage errors naming the rule.
    pub fn validate(&self) -> Result<()> {
        let usage = |e: Error| match e {
            Error::InvalidParameter(m) | Error::Domain(m) => Error::Usage(m),
            other => other,
        };
        self.mkt.validate().map_err(usage)?;
        self.spec.validate().map_err(usage)?;
        if !(self.t >= 0.0 && self.t <= self.spec.maturity) {
            return Err(Error::Usage(format!(
                "t must satisfy 0 <= t <= T (got t = {}, T = {})",
                self.t, self.spec.maturity
            )));
        }
        if !(self.s_min > 0.0 && self.s_min.is_finite()) {
            return Err(Error::Usage(format!("s-min must be > 0 (got {})", self.s_min)));
        }
        if !(self.s_max > self.s_min && self.s_max.is_finite()) {
            return Err(Error::Usage(format!(
                "s-max must exceed s-min (got s-min = {}, s-max = {})",
                self.s_min, self.s_max
            )));
        }
        if self.steps < 2 {
            return Err(Error::Usage(format!("steps must be >= 2 (got {})", self.steps)));
        }
        if self.model.spectral() && !(self.mkt.a < 0.0) {
            return Err(Error::Usage(format!(
                "the spectral model needs a < 0 (got a = {}); use --model closed_form or fd",
                self.mkt.a
            )));
        }
        self.quad.validate().map_err(usage)?;
        if self.model.fd() {
            self.fd_grid()?.validate(&self.spec).map_err(usage)?;
        }
        Ok(())
    }

    /// `steps` equally spaced values from `s_min` to `s_max`.
    pub fn spots(&self) -> Result<Vec<f64>> {
        Ok(UniformGrid::new(self.s_min, self.s_max, self.steps)?
            .points()
            .collect())
    }

    pub fn fd_grid(&self) -> Result<FdGrid> {
        FdGrid::centered(self.spec.strike, self.fd_halfwidth, self.fd_nx, self.fd_nt).map_err(
            |e| match e {
                Error::InvalidParameter(m) => Error::Usage(m),
                other => other,
            },
        )
    }

    /// Same configuration for one figure panel.
    pub fn panel(&self, a: f64, t: f64) -> Self {
        let mut cfg = self.clone();
        cfg.mkt.a = a;
        cfg.t = t;
        cfg
    }
}

/// Computes the selected price columns on the configured `S` grid.
pub fn run_curve(cfg: &RunConfig) -> Result<PriceCurve> {
    cfg.validate()?;
    let spots = cfg.spots()?;
    let payoffs = spots
        .iter()
        .map(|&s| payoff(&cfg.spec, s).map_err(|e| e.at_spot(s)))
        .collect::<Result<Vec<_>>>()?;
    let mut curve = PriceCurve::new(cfg.spec.kind, spots.clone(), payoffs)?;

    if cfg.model.spectral() {
        let sol = SpectralSolution::compute(&cfg.mkt, &cfg.spec, cfg.n_terms, &cfg.quad)?;
        let values = spots
            .iter()
            .map(|&s| sol.price(s, cfg.t).map_err(|e| e.at_spot(s)))
            .collect::<Result<Vec<_>>>()?;
        curve = curve.with_spectral(values)?;
    }
    if cfg.model.closed_form() {
        let values = spots
            .iter()
            .map(|&s| bs_price(&cfg.mkt, &cfg.spec, s, cfg.t).map_err(|e| e.at_spot(s)))
            .collect::<Result<Vec<_>>>()?;
        curve = curve.with_closed_form(values)?;
    }
    if cfg.model.fd() {
        let fd = fd_solve(&cfg.mkt, &cfg.spec, &cfg.fd_grid()?, cfg.t)?;
        let values = spots
            .iter()
            .map(|&s| fd.interpolate(s).map_err(|e| e.at_spot(s)))
            .collect::<Result<Vec<_>>>()?;
        curve = curve.with_fd(values)?;
    }
    Ok(curve)
}

/// File name of one figure panel, e.g. `fig1_a-0.03_t3.csv`.
pub fn fig1_file_name(a: f64, t: f64) -> String {
    format!("fig1_a{a}_t{t}.csv")
}

/// Writes the six figure panels (spectral and closed-form columns) into
/// `dir`, computing them concurrently. Returns the written paths.
pub fn emit_fig1(dir: &Path, base: &RunConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut base = base.clone();
    base.model = ModelSelection::All;
    let panels: Vec<(f64, f64)> = FIG1_TILTS
        .iter()
        .flat_map(|&a| FIG1_TIMES.iter().map(move |&t| (a, t)))
        .collect();
    let results: Vec<Result<PathBuf>> = std::thread::scope(|scope| {
        let handles: Vec<_> = panels
            .iter()
            .map(|&(a, t)| {
                let cfg = base.panel(a, t);
                scope.spawn(move || -> Result<PathBuf> {
                    let mut cfg = cfg;
                    cfg.model = ModelSelection::Spectral;
                    cfg.validate()?;
                    let spectral = run_curve(&cfg)?;
                    cfg.model = ModelSelection::ClosedForm;
                    let closed = run_curve(&cfg)?;
                    let curve = spectral.with_closed_form(closed.closed_form().unwrap().to_vec())?;
                    let path = dir.join(fig1_file_name(a, t));
                    curve.write_csv(&path)?;
                    Ok(path)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("panel worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured <= self.bound
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (bound {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound
        )
    }
}

/// Operator residuals and cross-model agreement for one configuration.
pub fn validate(cfg: &RunConfig) -> Result<Vec<Check>> {
    let mut cfg = cfg.clone();
    cfg.model = ModelSelection::All;
    cfg.validate()?;
    let k = cfg.spec.strike;
    let mut checks = Vec::new();

    let grid = UniformGrid::with_step(-2.0, 4.0, 1e-3)?;
    checks.push(Check {
        name: "martingale residual |H_V e^x| on [-2, 4]".into(),
        measured: martingale_residual(&cfg.mkt, &grid)?,
        bound: 1e-5 * 4f64.exp(),
    });

    let osc: OscillatorParams = oscillator_params_from_market(&cfg.mkt)?;
    let (lo, hi) = osc.support(3);
    let hgrid = UniformGrid::with_step(lo, hi, 1e-3)?;
    let residual = (0..=3)
        .map(|n| effective_hamiltonian_residual(&cfg.mkt, n, &hgrid))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "eigenfunction residual, n <= 3".into(),
        measured: residual,
        bound: 1e-5,
    });

    let mut flat = cfg.clone();
    flat.mkt.a = 0.0;
    flat.model = ModelSelection::Fd;
    let fd0 = fd_solve(&flat.mkt, &flat.spec, &flat.fd_grid()?, cfg.t)?;
    let mut fd_bs = 0.0f64;
    for i in 0..=100 {
        let s = 1.0 + 0.05 * i as f64;
        let d = fd0.interpolate(s)? - bs_price(&flat.mkt, &flat.spec, s, cfg.t)?;
        fd_bs = fd_bs.max(d.abs());
    }
    checks.push(Check {
        name: "FD vs closed form at a = 0, S in [1, 6]".into(),
        measured: fd_bs,
        bound: 2e-4 * k,
    });

    let sol = SpectralSolution::compute(&cfg.mkt, &cfg.spec, cfg.n_terms, &cfg.quad)?;
    let fd = fd_solve(&cfg.mkt, &cfg.spec, &cfg.fd_grid()?, cfg.t)?;
    let mut cross = 0.0f64;
    for i in 0..=130 {
        let s = 0.5 + 0.05 * i as f64;
        cross = cross.max((sol.price(s, cfg.t)? - fd.interpolate(s)?).abs());
    }
    checks.push(Check {
        name: format!("spectral (N = {}) vs FD, S in [0.5, 7]", cfg.n_terms),
        measured: cross,
        bound: 1e-4 * k,
    });

    let mut terminal = 0.0f64;
    for i in 0..=130 {
        let s = 0.5 + 0.05 * i as f64;
        if (s / k).ln().abs() > 0.1 {
            let d = sol.price(s, cfg.spec.maturity)? - payoff(&cfg.spec, s)?;
            terminal = terminal.max(d.abs());
        }
    }
    checks.push(Check {
        name: format!("spectral (N = {}) terminal payoff, |ln S/K| > 0.1", cfg.n_terms),
        measured: terminal,
        bound: 5e-4 * k,
    });
    Ok(checks)
}

#[derive(Debug, Parser)]
#[command(
    name = "gbs",
    version,
    about = "Option prices under the generalized Black-Scholes equation with V(x) = a x + r",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the six figure panels as CSV files.
    Fig1 {
        /// Output directory.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Print residual and cross-model checks; exit code 2 if any fails.
    Validate {
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Debug, Clone, Default, Args)]
struct Settings {
    /// Volatility.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Risk-free rate.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Potential tilt, a <= 0.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Strike.
    #[arg(long = "K", allow_negative_numbers = true)]
    strike: Option<f64>,
    /// Maturity.
    #[arg(long = "T", allow_negative_numbers = true)]
    maturity: Option<f64>,
    /// Evaluation time.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s_max: Option<f64>,
    /// Number of S points.
    #[arg(long)]
    steps: Option<usize>,
    /// closed_form, spectral, fd or all.
    #[arg(long)]
    model: Option<String>,
    /// call or put.
    #[arg(long)]
    kind: Option<String>,
    /// Highest eigenfunction index in the spectral sum.
    #[arg(long)]
    n_terms: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    quad_rel_tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    quad_abs_tol: Option<f64>,
    #[arg(long)]
    quad_max_subdivisions: Option<usize>,
    /// FD space nodes.
    #[arg(long)]
    fd_nx: Option<usize>,
    /// FD time steps.
    #[arg(long)]
    fd_nt: Option<usize>,
    /// FD half-width in log-price around ln K.
    #[arg(long, allow_negative_numbers = true)]
    fd_halfwidth: Option<f64>,
    /// CSV output path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 19] = [
    "sigma",
    "r",
    "a",
    "K",
    "T",
    "t",
    "s-min",
    "s-max",
    "steps",
    "model",
    "kind",
    "n-terms",
    "quad-rel-tol",
    "quad-abs-tol",
    "quad-max-subdivisions",
    "fd-nx",
    "fd-nt",
    "fd-halfwidth",
    "out",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("config line {}: expected key = value, got {raw:?}", i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Usage(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Usage(format!("config key {key}: cannot parse {v:?}")))
        })
        .transpose()
}

impl Settings {
    fn from_config(map: &BTreeMap<String, String>) -> Result<Self> {
        Ok(Self {
            sigma: config_value(map, "sigma")?,
            r: config_value(map, "r")?,
            a: config_value(map, "a")?,
            strike: config_value(map, "K")?,
            maturity: config_value(map, "T")?,
            t: config_value(map, "t")?,
            s_min: config_value(map, "s-min")?,
            s_max: config_value(map, "s-max")?,
            steps: config_value(map, "steps")?,
            model: config_value(map, "model")?,
            kind: config_value(map, "kind")?,
            n_terms: config_value(map, "n-terms")?,
            quad_rel_tol: config_value(map, "quad-rel-tol")?,
            quad_abs_tol: config_value(map, "quad-abs-tol")?,
            quad_max_subdivisions: config_value(map, "quad-max-subdivisions")?,
            fd_nx: config_value(map, "fd-nx")?,
            fd_nt: config_value(map, "fd-nt")?,
            fd_halfwidth: config_value(map, "fd-halfwidth")?,
            out: config_value(map, "out")?,
            config: None,
        })
    }

    /// Fields set here win over `lower`.
    fn over(self, lower: Settings) -> Settings {
        Settings {
            sigma: self.sigma.or(lower.sigma),
            r: self.r.or(lower.r),
            a: self.a.or(lower.a),
            strike: self.strike.or(lower.strike),
            maturity: self.maturity.or(lower.maturity),
            t: self.t.or(lower.t),
            s_min: self.s_min.or(lower.s_min),
            s_max: self.s_max.or(lower.s_max),
            steps: self.steps.or(lower.steps),
            model: self.model.or(lower.model),
            kind: self.kind.or(lower.kind),
            n_terms: self.n_terms.or(lower.n_terms),
            quad_rel_tol: self.quad_rel_tol.or(lower.quad_rel_tol),
            quad_abs_tol: self.quad_abs_tol.or(lower.quad_abs_tol),
            quad_max_subdivisions: self.quad_max_subdivisions.or(lower.quad_max_subdivisions),
            fd_nx: self.fd_nx.or(lower.fd_nx),
            fd_nt: self.fd_nt.or(lower.fd_nt),
            fd_halfwidth: self.fd_halfwidth.or(lower.fd_halfwidth),
            out: self.out.or(lower.out),
            config: self.config.or(lower.config),
        }
    }

    fn resolve(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                Settings::from_config(&parse_config_text(&text)?)?
            }
            None => Settings::default(),
        };
        let s = self.over(file);
        let d = RunConfig::default();
        let cfg = RunConfig {
            mkt: MarketParams {
                sigma: s.sigma.unwrap_or(d.mkt.sigma),
                r: s.r.unwrap_or(d.mkt.r),
                a: s.a.unwrap_or(d.mkt.a),
            },
            spec: OptionSpec {
                strike: s.strike.unwrap_or(d.spec.strike),
                maturity: s.maturity.unwrap_or(d.spec.maturity),
                kind: s.kind.as_deref().map(str::parse).transpose()?.unwrap_or(d.spec.kind),
            },
            t: s.t.unwrap_or(d.t),
            s_min: s.s_min.unwrap_or(d.s_min),
            s_max: s.s_max.unwrap_or(d.s_max),
            steps: s.steps.unwrap_or(d.steps),
            model: s.model.as_deref().map(str::parse).transpose()?.unwrap_or(d.model),
            n_terms: s.n_terms.unwrap_or(d.n_terms),
            quad: QuadratureSpec {
                rel_tol: s.quad_rel_tol.unwrap_or(d.quad.rel_tol),
                abs_tol: s.quad_abs_tol.unwrap_or(d.quad.abs_tol),
                max_subdivisions: s.quad_max_subdivisions.unwrap_or(d.quad.max_subdivisions),
            },
            fd_nx: s.fd_nx.unwrap_or(d.fd_nx),
            fd_nt: s.fd_nt.unwrap_or(d.fd_nt),
            fd_halfwidth: s.fd_halfwidth.unwrap_or(d.fd_halfwidth),
            out: s.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What the command line asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Curve(RunConfig),
    Fig1 { dir: PathBuf, config: RunConfig },
    Validate(RunConfig),
    /// `--help` or `--version` text.
    Info(String),
}

/// Parses arguments (without the program name) into an invocation.
pub fn parse_args<I, T>(args: I) -> Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("gbs")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Ok(Invocation::Info(e.render().to_string()))
                }
                _ => Err(Error::Usage(e.render().to_string().trim_end().to_string())),
            };
        }
    };
    Ok(match cli.command {
        None => Invocation::Curve(cli.settings.resolve()?),
        Some(Command::Fig1 { dir, settings }) => Invocation::Fig1 {
            dir,
            config: settings.resolve()?,
        },
        Some(Command::Validate { settings }) => Invocation::Validate(settings.resolve()?),
    })
}

/// Parses the flags of a single curve run.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(args)? {
        Invocation::Curve(cfg) => Ok(cfg),
        _ => Err(Error::Usage("expected pricing flags, not a subcommand".into())),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match execute(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gbs: {e}");
            e.exit_code()
        }
    }
}

fn execute<I, T>(args: I) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(args)? {
        Invocation::Info(text) => {
            print!("{text}");
            Ok(0)
        }
        Invocation::Curve(cfg) => {
            let curve = run_curve(&cfg)?;
            match &cfg.out {
                Some(path) => curve.write_csv(path)?,
                None => {
                    let stdout = std::io::stdout();
                    stdout
                        .lock()
                        .write_all(curve.to_csv().as_bytes())
                        .map_err(|source| Error::Io {
                            path: PathBuf::from("<stdout>"),
                            source,
                        })?;
                }
            }
            Ok(0)
        }
        Invocation::Fig1 { dir, config } => {
            for path in emit_fig1(&dir, &config)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Invocation::Validate(cfg) => {
            let checks = validate(&cfg)?;
            for c in &checks {
                println!("{c}");
            }
            Ok(if checks.iter().all(Check::passed) { 0 } else { 2 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_args_give_figure_defaults() {
        let cfg = parse_config(Vec::<String>::new()).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!((cfg.mkt.sigma, cfg.mkt.r, cfg.mkt.a), (0.25, 0.03, -0.03));
        assert_eq!((cfg.spec.strike, cfg.spec.maturity, cfg.t), (3.0, 5.0, 3.0));
        assert_eq!((cfg.s_min, cfg.s_max, cfg.steps), (0.05, 8.0, 400));
        assert_eq!(cfg.model, ModelSelection::All);
    }

    #[test]
    fn usage_errors_name_the_constraint() {
        let err = parse_config(["--a", "0.01"]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        assert!(err.to_string().contains("a must be <= 0"), "{err}");
        let err = parse_config(["--t", "6", "--T", "5"]).unwrap_err();
        assert!(err.to_string().contains("t <= T"), "{err}");
        assert!(matches!(parse_config(["--steps", "1"]), Err(Error::Usage(_))));
        assert!(matches!(parse_config(["--s-min", "0"]), Err(Error::Usage(_))));
        assert!(matches!(parse_config(["--model", "mc"]), Err(Error::Usage(_))));
        assert!(matches!(parse_config(["--bogus"]), Err(Error::Usage(_))));
        assert!(matches!(
            parse_config(["--a", "0", "--model", "spectral"]),
            Err(Error::Usage(_))
        ));
        assert!(parse_config(["--a", "0", "--model", "closed_form"]).is_ok());
    }

    #[test]
    fn negative_values_parse() {
        let cfg = parse_config(["--a", "-0.01", "--r", "-0.005"]).unwrap();
        assert_eq!((cfg.mkt.a, cfg.mkt.r), (-0.01, -0.005));
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# panel\nsigma = 0.3\na=-0.02  # tilt\n\nsteps = 7\nkind = put\n").unwrap();
        let cfg = parse_config(["--config", path.to_str().unwrap(), "--steps", "9"]).unwrap();
        assert_eq!(cfg.mkt.sigma, 0.3);
        assert_eq!(cfg.mkt.a, -0.02);
        assert_eq!(cfg.steps, 9);
        assert_eq!(cfg.spec.kind, OptionKind::Put);

        fs::write(&path, "vol = 0.3\n").unwrap();
        let err = parse_config(["--config", path.to_str().unwrap()]).unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        let err = parse_config(["--config", "/nonexistent/run.cfg"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn help_is_not_an_error() {
        assert!(matches!(parse_args(["--help"]), Ok(Invocation::Info(_))));
        assert!(matches!(parse_args(["fig1", "--help"]), Ok(Invocation::Info(_))));
    }

    #[test]
    fn closed_form_at_expiry_is_the_payoff() {
        let cfg = parse_config(["--model", "closed_form", "--t", "5"]).unwrap();
        let curve = run_curve(&cfg).unwrap();
        assert_eq!(curve.closed_form().unwrap(), curve.payoff());
        assert_eq!(curve.header(), ["S", "C_call", "payoff"]);
    }

    #[test]
    fn two_step_grid() {
        let cfg = parse_config(["--model", "closed_form", "--steps", "2"]).unwrap();
        let curve = run_curve(&cfg).unwrap();
        assert_eq!(curve.spots(), [0.05, 8.0]);
    }

    #[test]
    fn panel_file_names() {
        assert_eq!(fig1_file_name(-0.03, 3.0), "fig1_a-0.03_t3.csv");
        assert_eq!(fig1_file_name(-0.01, 4.0), "fig1_a-0.01_t4.csv");
    }
}
