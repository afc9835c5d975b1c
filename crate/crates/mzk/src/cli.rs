//! Command-line surface: `classify`, `eval`, `sample`, `identify`, `verify`.
//!
//! Exit codes: 0 success, 2 validation failure, 3 boundary-case warning under
//! `--strict`, 4 not-a-solution (identify). Data outputs are byte-stable for
//! identical configurations: no timestamps, shortest-round-trip float
//! formatting, fixed row order (t-major, then y, then x).

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classify::{
    classify_with_tol, descriptor_from_free_params, identify_detailed, Aux, Branch, ClassId,
    ClassifyError, FamilyDescriptor, FreeParams,
};
use crate::families::{evaluate_profile, EvalStatus, WavePoint};
use crate::model::{EquationParams, JetPoint, WaveConstants};
use crate::roots::DEFAULT_REL_TOL;
use crate::verify::{ode_residual, pde_residual, AxisSpec, GridSpec};

/// Schema tag stamped on all machine-readable outputs.
pub const SCHEMA: &str = "mzk/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BOUNDARY: i32 = 3;
pub const EXIT_NOT_A_SOLUTION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "mzk",
    about = "Classify, evaluate, identify and verify traveling-wave solutions \
             of the modified Zakharov-Kuznetsov equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify wave constants into their solution family
    Classify(ClassifyArgs),
    /// Evaluate u(x, y, t) at a single point
    Eval(EvalArgs),
    /// Export a grid of (x, y, t, u, status) rows
    Sample(SampleArgs),
    /// Identify the family of a sampled profile from a CSV file
    Identify(IdentifyArgs),
    /// Run ODE/PDE residual checks against the governing equation
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct EqArgs {
    /// Coefficient A of u u_x
    #[arg(short = 'A', long = "A", allow_negative_numbers = true)]
    pub a: f64,
    /// Coefficient B of u^2 u_x
    #[arg(short = 'B', long = "B", allow_negative_numbers = true)]
    pub b: f64,
    /// Coefficient M of u_xxx
    #[arg(short = 'M', long = "M", allow_negative_numbers = true)]
    pub m: f64,
    /// Coefficient N of u_xyy
    #[arg(short = 'N', long = "N", allow_negative_numbers = true)]
    pub n: f64,
}

impl EqArgs {
    fn params(&self) -> Result<EquationParams, CliError> {
        EquationParams::new(self.a, self.b, self.m, self.n)
            .map_err(|e| CliError::validation(e.to_string()))
    }
}

/// Either `(c, C2, C3)` directly, or `--class` with the family's free
/// parameters; exactly one of the two styles.
#[derive(Debug, Args, Serialize, Deserialize, Default)]
pub struct FamilyArgs {
    /// Wave speed c
    #[arg(short = 'c', long = "c", allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Phase constant C1
    #[arg(long = "C1", allow_negative_numbers = true, default_value_t = 0.0)]
    #[serde(default)]
    pub c1: f64,
    /// Level of I2
    #[arg(long = "C2", allow_negative_numbers = true)]
    pub c2: Option<f64>,
    /// Level of I3
    #[arg(long = "C3", allow_negative_numbers = true)]
    pub c3: Option<f64>,
    /// Family class id (e.g. solg3triple, sol2rd+, sol4dist3)
    #[arg(long)]
    pub class: Option<String>,
    /// Double root phi (cubic double-root families)
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Root phi1 (cubic simple-root families)
    #[arg(long, allow_negative_numbers = true)]
    pub phi1: Option<f64>,
    /// Root phi2 (cubic simple-root families)
    #[arg(long, allow_negative_numbers = true)]
    pub phi2: Option<f64>,
    /// Double root rho (quartic double-root families)
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Pair offset lambda (four-distinct families)
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Constant profile value (class constant)
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Sign branch for the +-/-+ formula pairs
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Root clustering tolerance
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Branch {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

impl FamilyArgs {
    /// Resolve to `(wc, descriptor)` through either the constants or the
    /// class + free-parameter route.
    fn resolve(&self, params: &EquationParams) -> Result<(WaveConstants, FamilyDescriptor), CliError> {
        if self.class.is_some() {
            let name = self.class.as_deref().unwrap();
            let class = ClassId::parse(name)
                .ok_or_else(|| CliError::validation(format!("unknown class {name:?}")))?;
            let free = FreeParams {
                c: self.c,
                c1: Some(self.c1),
                c2: self.c2,
                c3: self.c3,
                phi: self.phi,
                phi1: self.phi1,
                phi2: self.phi2,
                rho: self.rho,
                lambda: self.lambda,
                u0: self.u0,
                branch: self.branch.map(Into::into),
            };
            let (wc, fd) = descriptor_from_free_params(class, params, &free)?;
            Ok((wc, fd))
        } else {
            let c = self
                .c
                .ok_or_else(|| CliError::validation("missing wave speed -c"))?;
            let (c2, c3) = match (self.c2, self.c3) {
                (Some(c2), Some(c3)) => (c2, c3),
                _ => {
                    return Err(CliError::validation(
                        "supply both --C2 and --C3 (or use --class)",
                    ))
                }
            };
            let wc = WaveConstants::new(c, self.c1, c2, c3)
                .map_err(|e| CliError::validation(e.to_string()))?;
            let mut fd = classify_with_tol(params, &wc, self.rel_tol)?;
            if let Some(b) = self.branch {
                fd = fd.with_branch(b.into());
            }
            Ok((wc, fd))
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub eq: EqArgs,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Emit the descriptor as JSON instead of text
    #[arg(long)]
    pub json: bool,
    /// Escalate boundary-case warnings to exit code 3
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub eq: EqArgs,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub eq: EqArgs,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path (stdout when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Suppress the version header line (CSV)
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
    pub x0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub x1: f64,
    #[arg(long, default_value_t = 11)]
    pub nx: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y1: f64,
    #[arg(long, default_value_t = 1)]
    pub ny: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub t1: f64,
    #[arg(long, default_value_t = 1)]
    pub nt: usize,
}

impl GridArgs {
    fn validate(&self) -> Result<(), CliError> {
        for (n, name) in [(self.nx, "nx"), (self.ny, "ny"), (self.nt, "nt")] {
            if n == 0 {
                return Err(CliError::validation(format!("--{name} must be >= 1")));
            }
        }
        for (lo, hi, name) in [
            (self.x0, self.x1, "x"),
            (self.y0, self.y1, "y"),
            (self.t0, self.t1, "t"),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(CliError::validation(format!("bad {name} range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn axis(&self, which: char) -> AxisSpec {
        match which {
            'x' => AxisSpec::new(self.x0, self.x1, self.nx),
            'y' => AxisSpec::new(self.y0, self.y1, self.ny),
            _ => AxisSpec::new(self.t0, self.t1, self.nt),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub eq: EqArgs,
    /// Wave speed c of the sampled profile
    #[arg(short = 'c', long = "c", allow_negative_numbers = true)]
    pub c: f64,
    /// CSV file with rows `r,v` or `r,v,v1,v2`
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Constancy tolerance for the recovered constants
    #[arg(long, default_value_t = crate::classify::IDENTIFY_TOL)]
    pub tol: f64,
    /// Escalate boundary-case warnings to exit code 3
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub eq: EqArgs,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Profile interval start
    #[arg(long, allow_negative_numbers = true, default_value_t = -5.0)]
    pub r0: f64,
    /// Profile interval end
    #[arg(long, allow_negative_numbers = true, default_value_t = 5.0)]
    pub r1: f64,
    /// Number of residual sample points
    #[arg(long = "n", default_value_t = 50)]
    pub n_samples: usize,
    /// ODE finite-difference step (default 1e-3 * width / 20)
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// ODE max_rel threshold
    #[arg(long, default_value_t = 1e-5)]
    pub ode_tol: f64,
    /// Also run the PDE residual on a grid
    #[arg(long)]
    pub pde: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    /// PDE per-axis finite-difference step
    #[arg(long, default_value_t = 0.05)]
    pub pde_step: f64,
    /// PDE max_rel threshold
    #[arg(long, default_value_t = 1e-4)]
    pub pde_tol: f64,
}

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        Self { message: msg.into(), exit_code: EXIT_VALIDATION }
    }

    fn not_a_solution(msg: impl Into<String>) -> Self {
        Self { message: msg.into(), exit_code: EXIT_NOT_A_SOLUTION }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::NotASolution { .. } => CliError::not_a_solution(e.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

/// Run a parsed command, writing to `out`; returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Classify(args) => cmd_classify(args, out),
        Command::Eval(args) => cmd_eval(args, out),
        Command::Sample(args) => cmd_sample(args, out),
        Command::Identify(args) => cmd_identify(args, out),
        Command::Verify(args) => cmd_verify(args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.exit_code
        }
    }
}

/// Subcase condition values behind the classification decision.
fn condition_values(fd: &FamilyDescriptor, wc: &WaveConstants) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    let mu = fd.params.mu();
    out.push(("M+N".to_string(), mu));
    if fd.params.a != 0.0 {
        out.push(("(M+N)/A".to_string(), mu / fd.params.a));
    }
    out.push(("(M+N)/c".to_string(), mu / wc.c));
    if let Some(k) = fd.k_const {
        out.push(("K".to_string(), k));
    }
    if let Aux::DoubleTwoReal { phi1, phi2, phi3 } = fd.aux {
        if let Some(k) = fd.k_const {
            out.push((
                "K(phi1-phi2)(phi3-phi1)".to_string(),
                k * (phi1 - phi2) * (phi3 - phi1),
            ));
        }
    }
    if let Aux::DoubleCubic { phi, .. } = fd.aux {
        out.push(("c-A*phi".to_string(), wc.c - fd.params.a * phi));
    }
    out
}

/// JSON view of a descriptor plus the derived condition values.
fn descriptor_report(fd: &FamilyDescriptor, wc: &WaveConstants) -> serde_json::Value {
    let mut conditions = serde_json::Map::new();
    for (name, value) in condition_values(fd, wc) {
        conditions.insert(name, json!(value));
    }
    json!({
        "schema": SCHEMA,
        "family": fd.family_label(),
        "descriptor": fd,
        "constants": wc,
        "k": fd.k(),
        "conditions": conditions,
    })
}

fn boundary_exit(fd: &FamilyDescriptor, strict: bool) -> i32 {
    if strict && !fd.warnings.is_empty() {
        EXIT_BOUNDARY
    } else {
        EXIT_OK
    }
}

fn cmd_classify(args: ClassifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let params = args.eq.params()?;
    let (wc, fd) = args.family.resolve(&params)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&descriptor_report(&fd, &wc))?)?;
    } else {
        writeln!(out, "family:  {}", fd.family_label())?;
        writeln!(
            out,
            "members: {}",
            fd.siblings
                .iter()
                .map(|c| c.label().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )?;
        writeln!(out, "k:       {}", fd.k())?;
        writeln!(out, "free:    {}", fd.free_params.join(", "))?;
        if let Some(k) = fd.k_const {
            writeln!(out, "K:       {k}")?;
        }
        writeln!(out, "constants: c={} C2={} C3={}", wc.c, wc.c2, wc.c3)?;
        for (name, value) in condition_values(&fd, &wc) {
            writeln!(out, "  {name} = {value}")?;
        }
        writeln!(out, "roots ({:?}):", fd.roots.pattern)?;
        for e in &fd.roots.entries {
            if e.is_real() {
                writeln!(out, "  {} (x{})", e.re, e.multiplicity)?;
            } else {
                writeln!(out, "  {}{:+}i (x{})", e.re, e.im, e.multiplicity)?;
            }
        }
        for w in &fd.warnings {
            writeln!(out, "warning: {w}")?;
        }
    }
    Ok(boundary_exit(&fd, args.strict))
}

fn cmd_eval(args: EvalArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let params = args.eq.params()?;
    let (wc, fd) = args.family.resolve(&params)?;
    let p = WavePoint::new(args.x, args.y, args.t);
    let res = crate::families::evaluate(&fd, &wc, p);
    writeln!(
        out,
        "{}",
        serde_json::to_string(&json!({
            "schema": SCHEMA,
            "x": p.x, "y": p.y, "t": p.t, "r": p.r(wc.c),
            "u": res.value,
            "status": res.status,
        }))?
    )?;
    Ok(EXIT_OK)
}

fn status_str(s: EvalStatus) -> &'static str {
    match s {
        EvalStatus::Ok => "ok",
        EvalStatus::Pole => "pole",
        EvalStatus::OutOfDomain => "out-of-domain",
        EvalStatus::ComplexResidue => "complex-residue",
    }
}

fn cmd_sample(args: SampleArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let params = args.eq.params()?;
    let (wc, fd) = args.family.resolve(&params)?;
    args.grid.validate()?;
    let (xs, ys, ts) = (args.grid.axis('x'), args.grid.axis('y'), args.grid.axis('t'));

    let mut buf: Vec<u8> = Vec::new();
    match args.format {
        Format::Csv => {
            if !args.no_header {
                writeln!(buf, "# {SCHEMA}")?;
            }
            writeln!(buf, "x,y,t,u,status")?;
            for it in 0..ts.n {
                let t = ts.at(it);
                for iy in 0..ys.n {
                    let y = ys.at(iy);
                    for ix in 0..xs.n {
                        let x = xs.at(ix);
                        let res = crate::families::evaluate(&fd, &wc, WavePoint::new(x, y, t));
                        match res.value {
                            Some(u) => writeln!(buf, "{x},{y},{t},{u},{}", status_str(res.status))?,
                            None => writeln!(buf, "{x},{y},{t},,{}", status_str(res.status))?,
                        }
                    }
                }
            }
        }
        Format::Json => {
            let mut rows = Vec::new();
            for it in 0..ts.n {
                let t = ts.at(it);
                for iy in 0..ys.n {
                    let y = ys.at(iy);
                    for ix in 0..xs.n {
                        let x = xs.at(ix);
                        let res = crate::families::evaluate(&fd, &wc, WavePoint::new(x, y, t));
                        rows.push(json!([x, y, t, res.value, status_str(res.status)]));
                    }
                }
            }
            let doc = json!({
                "schema": SCHEMA,
                "header": ["x", "y", "t", "u", "status"],
                "rows": rows,
            });
            writeln!(buf, "{}", serde_json::to_string(&doc)?)?;
        }
    }
    match &args.output {
        Some(path) => fs::write(path, &buf)?,
        None => out.write_all(&buf)?,
    }
    Ok(EXIT_OK)
}

fn parse_sample_file(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields[0].parse::<f64>().is_err() && lineno == 0 {
            continue; // header row
        }
        let row: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let row = row.map_err(|e| {
            CliError::validation(format!("line {}: bad number: {e}", lineno + 1))
        })?;
        if row.len() != 2 && row.len() != 4 {
            return Err(CliError::validation(format!(
                "line {}: expected r,v or r,v,v1,v2 ({} fields)",
                lineno + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::validation("sample file holds no data rows"));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(CliError::validation("mixed row widths in sample file"));
    }
    Ok(rows)
}

/// Derivatives of a uniformly sampled table via the interior 5-point
/// stencils (the two edge points on each side are dropped).
fn jets_from_table(rows: &[Vec<f64>]) -> Result<Vec<JetPoint>, CliError> {
    if rows[0].len() == 4 {
        return Ok(rows
            .iter()
            .map(|r| JetPoint::new(r[0], r[1], r[2], r[3]))
            .collect());
    }
    if rows.len() < 9 {
        return Err(CliError::validation(
            "need at least 9 rows to differentiate r,v samples",
        ));
    }
    let h = rows[1][0] - rows[0][0];
    for w in rows.windows(2) {
        let d = w[1][0] - w[0][0];
        if ((d - h) / h).abs() > 1e-9 {
            return Err(CliError::validation(
                "r,v samples must be uniformly spaced for differentiation",
            ));
        }
    }
    let v = |i: usize| rows[i][1];
    let mut jets = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for i in 2..rows.len() - 2 {
        let v1 = (-v(i + 2) + 8.0 * v(i + 1) - 8.0 * v(i - 1) + v(i - 2)) / (12.0 * h);
        let v2 = (-v(i + 2) + 16.0 * v(i + 1) - 30.0 * v(i) + 16.0 * v(i - 1) - v(i - 2))
            / (12.0 * h * h);
        jets.push(JetPoint::new(rows[i][0], v(i), v1, v2));
    }
    Ok(jets)
}

fn cmd_identify(args: IdentifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let params = args.eq.params()?;
    let text = fs::read_to_string(&args.input)?;
    let rows = parse_sample_file(&text)?;
    let jets: Vec<JetPoint> = jets_from_table(&rows)?
        .into_iter()
        .filter(|j| j.v != 0.0)
        .collect();
    let id = identify_detailed(&jets, &params, args.c, Some(args.tol))?;
    let fd = &id.descriptor;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema": SCHEMA,
            "C2": id.c2,
            "C3": id.c3,
            "deviations": { "I2": id.i2_dev, "I3": id.i3_dev },
            "family": fd.family_label(),
            "members": fd.siblings.iter().map(|c| c.label()).collect::<Vec<_>>(),
            "k": fd.k(),
            "n_samples": jets.len(),
            "warnings": fd.warnings,
        }))?
    )?;
    Ok(boundary_exit(fd, args.strict))
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let params = args.eq.params()?;
    let (wc, fd) = args.family.resolve(&params)?;
    if args.n_samples < 7 {
        return Err(CliError::validation("--n must be at least 7"));
    }
    let profile = |r: f64| evaluate_profile(&fd, &wc, r);
    let ode = ode_residual(&profile, &params, wc.c, (args.r0, args.r1), args.n_samples, args.fd_step)
        .map_err(|e| CliError::validation(e.to_string()))?;
    let mut pass = ode.max_rel <= args.ode_tol;
    let mut doc = json!({
        "schema": SCHEMA,
        "family": fd.family_label(),
        "ode": { "report": ode, "tol": args.ode_tol, "pass": ode.max_rel <= args.ode_tol },
    });
    if args.pde {
        args.grid.validate()?;
        let grid = GridSpec {
            x: args.grid.axis('x'),
            y: args.grid.axis('y'),
            t: args.grid.axis('t'),
            fd_step: args.pde_step,
        };
        let u = |x: f64, y: f64, t: f64| {
            crate::families::evaluate(&fd, &wc, WavePoint::new(x, y, t))
        };
        let pde = pde_residual(&u, &params, &grid)
            .map_err(|e| CliError::validation(e.to_string()))?;
        pass = pass && pde.max_rel <= args.pde_tol;
        doc["pde"] = json!({
            "report": pde,
            "tol": args.pde_tol,
            "pass": pde.max_rel <= args.pde_tol,
        });
    }
    doc["pass"] = json!(pass);
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(if pass { EXIT_OK } else { EXIT_VALIDATION })
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

/// Expand `--config file.json` into an argv list. The file is a flat JSON
/// object: a `command` field plus one entry per flag (single-letter keys map
/// to short flags, booleans to switches).
pub fn argv_from_config(path: &str) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| CliError::validation("config must be a JSON object"))?;
    let command = obj
        .get("command")
        .and_then(|v| v.as_str())
        .ok_or_else(|| CliError::validation("config needs a \"command\" string field"))?;
    let mut argv = vec![command.to_string()];
    for (key, value) in obj {
        if key == "command" {
            continue;
        }
        let flag = if key.chars().count() == 1 {
            format!("-{key}")
        } else {
            format!("--{key}")
        };
        match value {
            serde_json::Value::Bool(true) => argv.push(flag),
            serde_json::Value::Bool(false) => {}
            serde_json::Value::String(s) => {
                argv.push(flag);
                argv.push(s.clone());
            }
            serde_json::Value::Number(n) => {
                argv.push(flag);
                argv.push(n.to_string());
            }
            other => {
                return Err(CliError::validation(format!(
                    "config field {key:?} has unsupported value {other}"
                )))
            }
        }
    }
    Ok(argv)
}
