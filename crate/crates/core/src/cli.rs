//! Command-line front end.
//!
//! Every flag can also be given as `key = value` in a file passed with
//! `--config`; flags win over file values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::contact::{psi_forward, psi_inverse, pullback_check, InversionControls, Partials, PushforwardSolution};
use crate::fields::{grid_verify, EulerPoisson, Grid, HunterSaxton, Jet1, Point, VerifyReport};
use crate::laplace::{
    antiderivative_pair, cascade_v_field, cascade_w_field, ep_coeffs, ep_trans_coeffs, general_solution_u,
    general_solution_v, ovsiannikov, semi_invariants, v_to_u, w_ode_residual, AntiderivativeMode, SolutionSpec,
};
use crate::{Error, Result};

/// Step of the five-point `t`-difference used to check `∂_t A₁ = A₂/κ`.
const ANTIDERIVATIVE_STEP: f64 = 5e-3;
const ROUND_TRIP_TOL: f64 = 1e-8;
const W_ODE_TOL: f64 = 1e-8;
const ANTIDERIVATIVE_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "cascade-lab", version, about = "Euler-Poisson / Hunter-Saxton solution and verification tool")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Sample the Laplace and Ovsiannikov invariants of the Euler-Poisson equation
    Invariants(Flags),
    /// Tabulate a general Euler-Poisson solution and verify it
    SolveEp(Flags),
    /// Tabulate the explicit Hunter-Saxton solution on a (t̃, x̃) rectangle and verify it
    SolveHs(Flags),
    /// Map a 1-jet through the contact transformation
    Transform(Flags),
    /// Check the v, w cascade on a general solution
    VerifyCascade(Flags),
}

#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Flat key = value file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// S(t)
    #[arg(long = "S", allow_hyphen_values = true)]
    pub s: Option<String>,
    /// R(x)
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: Option<String>,
    /// `base` or `natural`
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long = "t-min", allow_hyphen_values = true)]
    pub t_min: Option<String>,
    #[arg(long = "t-max", allow_hyphen_values = true)]
    pub t_max: Option<String>,
    #[arg(long = "x-min", allow_hyphen_values = true)]
    pub x_min: Option<String>,
    #[arg(long = "x-max", allow_hyphen_values = true)]
    pub x_max: Option<String>,
    #[arg(long)]
    pub nt: Option<String>,
    #[arg(long)]
    pub nx: Option<String>,
    /// Finite-difference step
    #[arg(long = "h")]
    pub h: Option<String>,
    /// Residual tolerance of verification reports
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long = "quad-tol")]
    pub quad_tol: Option<String>,
    /// CSV output path (stdout when absent)
    #[arg(long)]
    pub out: Option<String>,
    /// JSON report path (stdout when absent)
    #[arg(long)]
    pub report: Option<String>,
    /// Five comma-separated reals t,x,u,u_t,u_x
    #[arg(long, allow_hyphen_values = true)]
    pub jet: Option<String>,
    #[arg(long = "work-x-min", allow_hyphen_values = true)]
    pub work_x_min: Option<String>,
    #[arg(long = "work-x-max", allow_hyphen_values = true)]
    pub work_x_max: Option<String>,
    #[arg(long = "root-tol")]
    pub root_tol: Option<String>,
    #[arg(long = "bracket-factor")]
    pub bracket_factor: Option<String>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("kappa", &self.kappa),
            ("S", &self.s),
            ("R", &self.r),
            ("mode", &self.mode),
            ("x0", &self.x0),
            ("t_min", &self.t_min),
            ("t_max", &self.t_max),
            ("x_min", &self.x_min),
            ("x_max", &self.x_max),
            ("nt", &self.nt),
            ("nx", &self.nx),
            ("h", &self.h),
            ("tol", &self.tol),
            ("quad_tol", &self.quad_tol),
            ("out", &self.out),
            ("report", &self.report),
            ("jet", &self.jet),
            ("work_x_min", &self.work_x_min),
            ("work_x_max", &self.work_x_max),
            ("root_tol", &self.root_tol),
            ("bracket_factor", &self.bracket_factor),
            ("max_iter", &self.max_iter),
        ]
    }
}

const KEYS: [&str; 22] = [
    "kappa", "S", "R", "mode", "x0", "t_min", "t_max", "x_min", "x_max", "nt", "nx", "h", "tol", "quad_tol", "out",
    "report", "jet", "work_x_min", "work_x_max", "root_tol", "bracket_factor", "max_iter",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Invariants,
    SolveEp,
    SolveHs,
    Transform,
    VerifyCascade,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Invariants => "invariants",
            Command::SolveEp => "solve-ep",
            Command::SolveHs => "solve-hs",
            Command::Transform => "transform",
            Command::VerifyCascade => "verify-cascade",
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub kappa: f64,
    pub s: String,
    pub r: String,
    pub mode: AntiderivativeMode,
    /// `(t, x)` rectangle, or `(t̃, x̃)` for `solve-hs`.
    pub grid: Grid,
    pub h: f64,
    pub tol: f64,
    pub quad_tol: f64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub jet: Option<[f64; 5]>,
    pub inversion: InversionControls,
}

/// Reads a `key = value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value, got `{line}`", n + 1)));
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn number<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: Option<T>) -> Result<T> {
    match map.get(key) {
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("`{key}`: cannot read `{v}` as a number"))),
        None => default.ok_or_else(|| Error::Config(format!("missing required setting `{key}`"))),
    }
}

fn parse_jet(src: &str) -> Result<[f64; 5]> {
    let parts: Vec<&str> = src.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(Error::Config(format!("`jet` needs five comma-separated reals, got `{src}`")));
    }
    let mut out = [0.0; 5];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| Error::Config(format!("`jet`: cannot read `{p}` as a number")))?;
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_map(command: Command, map: &BTreeMap<String, String>) -> Result<Self> {
        let kappa: f64 = number(map, "kappa", None)?;
        if kappa == 0.0 || !kappa.is_finite() {
            return Err(Error::Config(format!("kappa must be finite and non-zero, got {kappa}")));
        }
        let x0: f64 = number(map, "x0", Some(0.0))?;
        let mode = match map.get("mode").map(String::as_str).unwrap_or("base") {
            "base" => AntiderivativeMode::BasePoint(x0),
            "natural" => AntiderivativeMode::Natural,
            other => return Err(Error::Config(format!("mode must be `base` or `natural`, got `{other}`"))),
        };
        let grid = Grid::new(
            number(map, "t_min", Some(0.5))?,
            number(map, "t_max", Some(1.5))?,
            number(map, "x_min", Some(0.5))?,
            number(map, "x_max", Some(1.5))?,
            number(map, "nt", Some(11))?,
            number(map, "nx", Some(11))?,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        if !matches!(command, Command::SolveHs | Command::Transform) {
            grid.require_positive_sum(0.0)
                .map_err(|_| Error::Config(format!("t + x must be positive on {}", grid.describe())))?;
        }
        let defaults = InversionControls::default();
        let inversion = InversionControls {
            x_range: (
                number(map, "work_x_min", Some(defaults.x_range.0))?,
                number(map, "work_x_max", Some(defaults.x_range.1))?,
            ),
            bracket_factor: number(map, "bracket_factor", Some(defaults.bracket_factor))?,
            root_tol: number(map, "root_tol", Some(defaults.root_tol))?,
            max_iter: number(map, "max_iter", Some(defaults.max_iter))?,
            ..defaults
        };
        let jet = map.get("jet").map(|s| parse_jet(s)).transpose()?;
        if command == Command::Transform && jet.is_none() {
            return Err(Error::Config("transform needs `jet`".into()));
        }
        let cfg = RunConfig {
            command,
            kappa,
            s: map.get("S").cloned().unwrap_or_else(|| "0".into()),
            r: map.get("R").cloned().unwrap_or_else(|| "1".into()),
            mode,
            grid,
            h: number(map, "h", Some(1e-3))?,
            tol: number(map, "tol", Some(1e-6))?,
            quad_tol: number(map, "quad_tol", Some(crate::laplace::DEFAULT_QUAD_TOL))?,
            out: map.get("out").map(PathBuf::from),
            report: map.get("report").map(PathBuf::from),
            jet,
            inversion,
        };
        for (name, v) in [("h", cfg.h), ("tol", cfg.tol), ("quad_tol", cfg.quad_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        Ok(cfg)
    }

    /// Merges the config file named in `flags` with the flags themselves.
    pub fn from_flags(command: Command, flags: &Flags) -> Result<Self> {
        let mut map = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in flags.pairs() {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        RunConfig::from_map(command, &map)
    }

    /// The settings as config-file text, readable by [`parse_config_text`].
    pub fn to_config_text(&self) -> String {
        let g = &self.grid;
        let mut lines = vec![
            format!("kappa = {}", self.kappa),
            format!("S = {}", self.s),
            format!("R = {}", self.r),
        ];
        match self.mode {
            AntiderivativeMode::Natural => lines.push("mode = natural".into()),
            AntiderivativeMode::BasePoint(x0) => {
                lines.push("mode = base".into());
                lines.push(format!("x0 = {x0}"));
            }
        }
        lines.extend([
            format!("t_min = {}", g.t_min),
            format!("t_max = {}", g.t_max),
            format!("x_min = {}", g.x_min),
            format!("x_max = {}", g.x_max),
            format!("nt = {}", g.n_t),
            format!("nx = {}", g.n_x),
            format!("h = {}", self.h),
            format!("tol = {}", self.tol),
            format!("quad_tol = {}", self.quad_tol),
            format!("work_x_min = {}", self.inversion.x_range.0),
            format!("work_x_max = {}", self.inversion.x_range.1),
            format!("bracket_factor = {}", self.inversion.bracket_factor),
            format!("root_tol = {}", self.inversion.root_tol),
            format!("max_iter = {}", self.inversion.max_iter),
        ]);
        if let Some(p) = &self.out {
            lines.push(format!("out = {}", p.display()));
        }
        if let Some(p) = &self.report {
            lines.push(format!("report = {}", p.display()));
        }
        if let Some(j) = self.jet {
            lines.push(format!("jet = {},{},{},{},{}", j[0], j[1], j[2], j[3], j[4]));
        }
        lines.join("\n") + "\n"
    }

    pub fn solution_spec(&self) -> Result<SolutionSpec> {
        SolutionSpec::parse(self.kappa, &self.s, &self.r, self.mode, self.quad_tol)
    }
}

/// Rows `(first, second, value)` with a header.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub header: [String; 3],
    pub rows: Vec<(f64, f64, f64)>,
}

impl GridOutput {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for (a, b, v) in &self.rows {
            let _ = writeln!(out, "{a},{b},{v}");
        }
        out
    }
}

/// Everything a command produces before anything is written.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub table: Option<GridOutput>,
    pub report: Value,
    /// False when a verification inside the command failed.
    pub pass: bool,
}

pub fn run_command(cfg: &RunConfig) -> Result<Artifacts> {
    match cfg.command {
        Command::Invariants => invariants(cfg),
        Command::SolveEp => solve_ep(cfg),
        Command::SolveHs => solve_hs(cfg),
        Command::Transform => transform(cfg),
        Command::VerifyCascade => verify_cascade(cfg),
    }
}

fn invariants(cfg: &RunConfig) -> Result<Artifacts> {
    let coeffs = ep_coeffs(cfg.kappa)?;
    let mut samples = Vec::new();
    let mut max_dev = 0.0f64;
    for p in cfg.grid.points() {
        let hk = semi_invariants(&coeffs, p)?;
        let pq = ovsiannikov(&coeffs, p)?;
        max_dev = max_dev.max((pq.p + pq.q - 2.0).abs());
        samples.push(json!({ "t": p.t, "x": p.x, "H": hk.h, "K": hk.k, "P": pq.p, "Q": pq.q }));
    }
    let report = json!({
        "command": Command::Invariants.name(),
        "kappa": cfg.kappa,
        "grid": cfg.grid.describe(),
        "P_expected": 2.0 * (1.0 - cfg.kappa),
        "Q_expected": 2.0 * cfg.kappa,
        "max_abs_p_plus_q_minus_2": max_dev,
        "samples": samples,
    });
    Ok(Artifacts { table: None, report, pass: true })
}

fn solve_ep(cfg: &RunConfig) -> Result<Artifacts> {
    let spec = cfg.solution_spec()?;
    let values = spec.u_on_grid(&cfg.grid)?;
    let rows = cfg
        .grid
        .points()
        .into_iter()
        .zip(values)
        .map(|(p, u)| (p.t, p.x, u))
        .collect();
    let report = grid_verify(&general_solution_u(&spec), &EulerPoisson { kappa: cfg.kappa }, &cfg.grid, cfg.h, cfg.tol)?;
    Ok(verified(GridOutput { header: ["t".into(), "x".into(), "u".into()], rows }, &report))
}

fn solve_hs(cfg: &RunConfig) -> Result<Artifacts> {
    let ps = PushforwardSolution::new(cfg.solution_spec()?, cfg.inversion)?;
    let points = cfg.grid.points();
    let values: Vec<f64> = points
        .par_iter()
        .map(|p| ps.evaluate(p.t, p.x))
        .collect::<Result<_>>()?;
    let rows = points.iter().zip(values).map(|(p, u)| (p.t, p.x, u)).collect();
    let field = crate::contact::pushforward_field(&ps);
    let report = grid_verify(&field, &HunterSaxton { kappa: cfg.kappa }, &cfg.grid, cfg.h, cfg.tol)?;
    Ok(verified(
        GridOutput { header: ["t_tilde".into(), "x_tilde".into(), "u_tilde".into()], rows },
        &report,
    ))
}

fn verified(table: GridOutput, report: &VerifyReport) -> Artifacts {
    Artifacts { table: Some(table), report: report.to_json(), pass: report.pass }
}

fn transform(cfg: &RunConfig) -> Result<Artifacts> {
    let jet = Jet1::from_array(cfg.jet.ok_or_else(|| Error::Config("transform needs `jet`".into()))?);
    let image = psi_forward(&jet, cfg.kappa)?;
    let back = psi_inverse(&image, cfg.kappa)?;
    let round_trip_error = jet
        .to_array()
        .iter()
        .zip(back.to_array())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let pullback = pullback_check(&jet, cfg.kappa, Partials::Exact)?;
    let report = json!({
        "command": Command::Transform.name(),
        "kappa": cfg.kappa,
        "jet": jet.to_array(),
        "image": image.to_array(),
        "round_trip": back.to_array(),
        "round_trip_error": round_trip_error,
        "lambda": pullback.lambda,
        "pullback_residual": pullback.max_coeff_residual,
    });
    Ok(Artifacts { table: None, report, pass: true })
}

fn verify_cascade(cfg: &RunConfig) -> Result<Artifacts> {
    let spec = cfg.solution_spec()?;
    let kappa = cfg.kappa;
    let u = general_solution_u(&spec);
    let v = general_solution_v(&spec);
    let v_from_u = cascade_v_field(&u, kappa);
    let w = cascade_w_field(&v, kappa);
    let points = cfg.grid.points();
    let errors: Vec<[f64; 4]> = points
        .par_iter()
        .map(|&p| -> Result<[f64; 4]> {
            let u_p = u.eval(p)?;
            let v_err = (v_from_u.eval(p)? - v.eval(p)?).abs();
            let u_err = (v_to_u(&v_from_u, kappa, p)? - u_p).abs();
            let w_err = w_ode_residual(&w, kappa, p)?.abs();
            let dt = ANTIDERIVATIVE_STEP;
            let a1 = |k: f64| antiderivative_pair(&spec, Point::new(p.t + k * dt, p.x)).map(|a| a.0);
            let d = (8.0 * (a1(1.0)? - a1(-1.0)?) - (a1(2.0)? - a1(-2.0)?)) / (12.0 * dt);
            let (_, a2) = antiderivative_pair(&spec, p)?;
            let anti = (d - a2 / kappa).abs();
            Ok([v_err, u_err, w_err, anti])
        })
        .collect::<Result<_>>()?;
    let mut max = [0.0f64; 4];
    for e in &errors {
        for (m, v) in max.iter_mut().zip(e) {
            *m = m.max(*v);
        }
    }
    let trans = grid_verify(&v, &ep_trans_coeffs(kappa)?, &cfg.grid, cfg.h, cfg.tol)?;
    let pass = max[0] <= ROUND_TRIP_TOL
        && max[1] <= ROUND_TRIP_TOL
        && max[2] <= W_ODE_TOL
        && max[3] <= ANTIDERIVATIVE_TOL
        && trans.pass;
    let report = json!({
        "command": Command::VerifyCascade.name(),
        "kappa": kappa,
        "grid": cfg.grid.describe(),
        "v_mismatch": max[0],
        "u_round_trip_error": max[1],
        "w_ode_residual": max[2],
        "antiderivative_error": max[3],
        "ep_trans": trans.to_json(),
        "pass": pass,
    });
    Ok(Artifacts { table: None, report, pass })
}

/// Sorted-key, pretty JSON with a trailing newline.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes the artifacts to the configured paths, or to stdout.
pub fn emit(cfg: &RunConfig, art: &Artifacts) -> Result<()> {
    let mut stdout = String::new();
    if let Some(table) = &art.table {
        match &cfg.out {
            Some(p) => write_file(p, &table.to_csv())?,
            None => stdout.push_str(&table.to_csv()),
        }
    }
    match &cfg.report {
        Some(p) => write_file(p, &render_json(&art.report))?,
        None => stdout.push_str(&render_json(&art.report)),
    }
    print!("{stdout}");
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let (command, flags) = match &cli.command {
        CommandArgs::Invariants(f) => (Command::Invariants, f),
        CommandArgs::SolveEp(f) => (Command::SolveEp, f),
        CommandArgs::SolveHs(f) => (Command::SolveHs, f),
        CommandArgs::Transform(f) => (Command::Transform, f),
        CommandArgs::VerifyCascade(f) => (Command::VerifyCascade, f),
    };
    let result = RunConfig::from_flags(command, flags).and_then(|cfg| {
        let art = run_command(&cfg)?;
        emit(&cfg, &art)?;
        Ok(art.pass)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("cascade-lab: verification failed");
            1
        }
        Err(e) => {
            eprintln!("cascade-lab: {e}");
            2
        }
    }
}
