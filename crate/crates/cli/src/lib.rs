//! Command-line front end: argument parsing, kinematics and the five
//! subcommands. `main` only forwards to [`run`].

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use knzeta::domain::{self, AffineCondition};
use knzeta::oracle::Budget;
use knzeta::verify::{run_suite, Fault, SuiteConfig};
use knzeta::{AmplitudeContext, Assignment, Engine, LazySum, RationalFn, SVar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Dimension of the momentum vectors.
pub const DIM: usize = 26;
const KIN_TOL: f64 = 1e-9;

pub const MEMO_ENV: &str = "KN_ZETA_MEMO_DIR";

pub const DIVERGENT_WARNING: &str =
    "nonnegative real part: integral diverges; value is the analytic continuation";

#[derive(Debug, Parser)]
#[command(name = "knzeta", version, about = "p-adic Koba-Nielsen zeta functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Number of external points, 4..=8.
    #[arg(long = "N", value_name = "N")]
    pub n: u32,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Also write the output to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print Z^(N)(s) as a rational function in p and p^s.
    Compute(Common),
    /// Evaluate Z^(N) at a point, given as s values or momenta.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Prime(s); repeatable.
        #[arg(long = "p", required = true)]
        p: Vec<u64>,
        /// s_<i>_<j>=<re>[+<im>i]; repeatable.
        #[arg(long = "s", conflicts_with = "momenta")]
        s: Vec<String>,
        /// JSON file with N momentum vectors of 26 components.
        #[arg(long)]
        momenta: Option<PathBuf>,
    },
    /// Cross-check every integral against the numerical oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "p", default_values_t = [2u64, 3])]
        p: Vec<u64>,
        #[arg(long, default_value_t = Budget::default().seed)]
        seed: u64,
        /// Monte Carlo samples per integral.
        #[arg(long, default_value_t = Budget::default().samples)]
        samples: u64,
        /// Monte Carlo resolution level; chosen from p when absent.
        #[arg(long)]
        level: Option<u32>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// List the pole hyperplanes of Z^(N).
    Poles(Common),
    /// Show the witness point, or check a point against the convergence
    /// conditions.
    Domain {
        #[command(flatten)]
        common: Common,
        #[arg(long = "s")]
        s: Vec<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {0}", .0.kind())]
    Core(#[from] knzeta::Error),
    #[error("KinematicsViolation: {0}")]
    Kinematics(String),
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Parse `s_<i>_<j>=<value>`, where the value is `a`, `a+bi`, `a-bi` or `bi`.
pub fn parse_assignment(text: &str) -> Result<(SVar, Complex64), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected s_<i>_<j>=<value>, got {text:?}")))?;
    let var: SVar = name.trim().parse()?;
    Ok((var, parse_complex(value.trim())?))
}

pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("bad complex number {text:?}"));
    let t = text.replace(' ', "");
    let Some(body) = t.strip_suffix('i') else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // The imaginary part starts at the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(Complex64::new(
        re.parse().map_err(|_| bad())?,
        im.parse().map_err(|_| bad())?,
    ))
}

/// Canonicalize the given variables for `ctx` and require all of them.
pub fn assignment_from_args(
    ctx: &AmplitudeContext,
    args: &[String],
) -> Result<Assignment, CliError> {
    let mut out = Assignment::new();
    for a in args {
        let (v, z) = parse_assignment(a)?;
        let v = ctx.var(v.i(), v.j())?;
        if out.insert(v, z).is_some() {
            return Err(CliError::Usage(format!("{v} given twice")));
        }
    }
    for v in ctx.vars() {
        if !out.contains_key(&v) {
            return Err(knzeta::Error::MissingAssignment(v.to_string()).into());
        }
    }
    Ok(out)
}

/// `N` momenta in 26 dimensions with signature `(-,+,...,+)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub momenta: Vec<Vec<f64>>,
}

pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

impl Kinematics {
    /// Accepts `[[...], ...]` or `{"momenta": [[...], ...]}`.
    pub fn from_json(v: &Value, n: u32) -> Result<Self, CliError> {
        let arr = v.get("momenta").unwrap_or(v);
        let rows = arr
            .as_array()
            .ok_or_else(|| CliError::Kinematics("expected an array of momenta".into()))?;
        let mut momenta = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let comps: Option<Vec<f64>> = row
                .as_array()
                .map(|r| r.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
                .unwrap_or(None);
            let comps = comps.ok_or_else(|| {
                CliError::Kinematics(format!("k_{} is not a list of numbers", i + 1))
            })?;
            momenta.push(comps);
        }
        let k = Kinematics { momenta };
        k.validate(n)?;
        Ok(k)
    }

    pub fn validate(&self, n: u32) -> Result<(), CliError> {
        if self.momenta.len() != n as usize {
            return Err(CliError::Kinematics(format!(
                "expected {n} momenta, got {}",
                self.momenta.len()
            )));
        }
        for (i, k) in self.momenta.iter().enumerate() {
            if k.len() != DIM {
                return Err(CliError::Kinematics(format!(
                    "k_{} has {} components, expected {DIM}",
                    i + 1,
                    k.len()
                )));
            }
        }
        for c in 0..DIM {
            let total: f64 = self.momenta.iter().map(|k| k[c]).sum();
            if total.abs() > KIN_TOL {
                return Err(CliError::Kinematics(format!(
                    "momentum conservation: sum of component {c} is {total:e}"
                )));
            }
        }
        for (i, k) in self.momenta.iter().enumerate() {
            let sq = minkowski(k, k);
            if (sq - 2.0).abs() > KIN_TOL {
                return Err(CliError::Kinematics(format!(
                    "mass shell: k_{0}·k_{0} = {sq}, expected 2",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// `s_ij = k_i·k_j` for the amplitude's variables (indices from 1).
    pub fn assignment(&self, ctx: &AmplitudeContext) -> Assignment {
        ctx.vars()
            .into_iter()
            .map(|v| {
                let (i, j) = (v.i() as usize - 1, v.j() as usize - 1);
                (
                    v,
                    Complex64::new(minkowski(&self.momenta[i], &self.momenta[j]), 0.0),
                )
            })
            .collect()
    }
}

fn engine(n: u32) -> Result<Engine, CliError> {
    let mut e = Engine::new(n)?;
    if let Some(dir) = memo_dir() {
        if dir.exists() {
            e.load_memo(&dir)?;
        }
    }
    Ok(e)
}

fn memo_dir() -> Option<PathBuf> {
    std::env::var_os(MEMO_ENV)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
}

fn save_memo(e: &Engine) -> Result<(), CliError> {
    if let Some(dir) = memo_dir() {
        std::fs::create_dir_all(&dir)?;
        e.save_memo(&dir)?;
    }
    Ok(())
}

/// Either the reduced amplitude or, when expansion is over budget, its
/// sector terms.
pub enum Amplitude {
    Reduced(RationalFn),
    Sectors(LazySum),
}

impl Amplitude {
    pub fn compute(e: &mut Engine) -> Result<Self, CliError> {
        let sectors = e.zn_sectors()?;
        match sectors.expand(Some(knzeta::ZN_EXPAND_BUDGET)) {
            Ok(f) => Ok(Amplitude::Reduced(f)),
            Err(knzeta::Error::BudgetExceeded(_)) => Ok(Amplitude::Sectors(sectors)),
            Err(err) => Err(err.into()),
        }
    }

    pub fn eval(&self, p: u64, a: &Assignment) -> knzeta::Result<Complex64> {
        match self {
            Amplitude::Reduced(f) => f.eval(p as f64, a),
            Amplitude::Sectors(s) => s.eval(p as f64, a),
        }
    }

    pub fn denominator(&self) -> Vec<knzeta::DenFactor> {
        match self {
            Amplitude::Reduced(f) => f.den().collect(),
            Amplitude::Sectors(s) => s.denominator(),
        }
    }
}

struct Output {
    buf: String,
}

impl Output {
    fn line(&mut self, s: impl AsRef<str>) {
        self.buf.push_str(s.as_ref());
        self.buf.push('\n');
    }

    fn finish(self, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
        stdout.write_all(self.buf.as_bytes())?;
        if let Some(path) = out {
            std::fs::write(path, &self.buf)?;
        }
        Ok(())
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn complex_text(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!(
            "{} {} {}i",
            z.re,
            if z.im < 0.0 { "-" } else { "+" },
            z.im.abs()
        )
    }
}

/// Warnings for a point where the integral itself does not converge.
pub fn divergence_warnings(
    ctx: &AmplitudeContext,
    a: &Assignment,
) -> Result<Vec<String>, CliError> {
    if a.values().all(|z| z.re >= 0.0) {
        return Ok(vec![DIVERGENT_WARNING.to_string()]);
    }
    let report = domain::check_point(&domain::c_primed(ctx), a)?;
    if report.passed() {
        return Ok(Vec::new());
    }
    let labels: Vec<String> = report
        .violated
        .iter()
        .take(4)
        .map(|c| c.label.clone())
        .collect();
    let more = report.violated.len().saturating_sub(labels.len());
    Ok(vec![format!(
        "point outside the region where convergence is established (violates {}{}): value is the analytic continuation",
        labels.join(", "),
        if more > 0 { format!(" and {more} more") } else { String::new() }
    )])
}

fn cmd_compute(c: &Common, o: &mut Output) -> Result<i32, CliError> {
    let mut e = engine(c.n)?;
    let amp = Amplitude::compute(&mut e)?;
    save_memo(&e)?;
    match (c.format, &amp) {
        (Format::Json, Amplitude::Reduced(f)) => {
            o.line(serde_json::to_string_pretty(&f.to_json()).expect("json"))
        }
        (Format::Json, Amplitude::Sectors(s)) => {
            let parts: Vec<Value> = s.parts().iter().map(RationalFn::to_json).collect();
            o.line(serde_json::to_string_pretty(&json!({ "sectors": parts })).expect("json"));
        }
        (Format::Text, Amplitude::Reduced(f)) => o.line(format!("Z^({}) = {f}", c.n)),
        (Format::Text, Amplitude::Sectors(s)) => {
            o.line(format!(
                "# Z^({}) as a sum of {} terms; the common-denominator form exceeds the expansion budget",
                c.n,
                s.parts().len()
            ));
            for (k, part) in s.parts().iter().enumerate() {
                o.line(format!("term {k}: {part}"));
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_eval(
    c: &Common,
    primes: &[u64],
    s: &[String],
    momenta: Option<&Path>,
    o: &mut Output,
) -> Result<i32, CliError> {
    let mut e = engine(c.n)?;
    let ctx = e.ctx().clone();
    let assign = match momenta {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|err| CliError::Kinematics(format!("{}: {err}", path.display())))?;
            Kinematics::from_json(&v, c.n)?.assignment(&ctx)
        }
        None => assignment_from_args(&ctx, s)?,
    };
    let warnings = divergence_warnings(&ctx, &assign)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let amp = Amplitude::compute(&mut e)?;
    save_memo(&e)?;
    let mut values = Vec::new();
    for &p in primes {
        values.push((p, amp.eval(p, &assign)?));
    }
    match c.format {
        Format::Json => {
            let point: BTreeMap<String, Value> = assign
                .iter()
                .map(|(v, z)| (v.to_string(), complex_json(*z)))
                .collect();
            let vals: Vec<Value> = values
                .iter()
                .map(|(p, z)| json!({"p": p, "value": complex_json(*z)}))
                .collect();
            o.line(
                serde_json::to_string_pretty(
                    &json!({"N": c.n, "point": point, "values": vals, "warnings": warnings}),
                )
                .expect("json"),
            );
        }
        Format::Text => {
            for (p, z) in values {
                o.line(format!("Z^({})(s) at p={p}: {}", c.n, complex_text(z)));
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(c: &Common, cfg: SuiteConfig, o: &mut Output) -> Result<i32, CliError> {
    let report = run_suite(&cfg)?;
    match c.format {
        Format::Json => o.line(serde_json::to_string_pretty(&report.to_json()).expect("json")),
        Format::Text => {
            o.buf.push_str(&report.table());
            o.line(format!(
                "{}: {} checks, {} failed",
                if report.passed() { "PASS" } else { "FAIL" },
                report.checks.len() + report.counts.len(),
                report.failures()
            ));
        }
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn cmd_poles(c: &Common, o: &mut Output) -> Result<i32, CliError> {
    let mut e = engine(c.n)?;
    let dens = e.zn_sectors()?.denominator();
    save_memo(&e)?;
    let shapes = domain::pole_shapes(e.ctx());
    let rows: Vec<(domain::PoleHyperplane, Vec<String>)> = domain::hyperplanes_of(&dens)
        .into_iter()
        .map(|h| {
            let names = domain::classify_pole(&shapes, &h)
                .iter()
                .map(|s| s.to_string())
                .collect();
            (h, names)
        })
        .collect();
    match c.format {
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|(h, names)| {
                    let mut v = h.to_json();
                    v["shapes"] = json!(names);
                    v
                })
                .collect();
            o.line(serde_json::to_string_pretty(&Value::Array(arr)).expect("json"));
        }
        Format::Text => {
            o.line(format!("# {} pole hyperplanes of Z^({})", rows.len(), c.n));
            for (h, names) in rows {
                let shape = if names.is_empty() {
                    "unclassified".to_string()
                } else {
                    names.join(", ")
                };
                o.line(format!("{h}    [{shape}]"));
            }
        }
    }
    Ok(EXIT_OK)
}

fn family(label: &str) -> &str {
    label.split('(').next().unwrap_or(label)
}

fn cmd_domain(c: &Common, s: &[String], o: &mut Output) -> Result<i32, CliError> {
    let ctx = AmplitudeContext::new(c.n)?;
    let conds = domain::c_primed(&ctx);
    if s.is_empty() {
        let w = domain::witness_point(&ctx)?;
        let report = domain::check_point(&conds, &domain::to_assignment(&w))?;
        match c.format {
            Format::Json => {
                let point: BTreeMap<String, String> = w
                    .iter()
                    .map(|(v, q)| (v.to_string(), q.to_string()))
                    .collect();
                o.line(
                    serde_json::to_string_pretty(&json!({
                        "N": c.n,
                        "witness": point,
                        "conditions": report.checked,
                        "all_pass": report.passed(),
                    }))
                    .expect("json"),
                );
            }
            Format::Text => {
                o.line(format!("witness point for N={}:", c.n));
                for (v, q) in &w {
                    o.line(format!("  {v} = {q}"));
                }
                o.line(format!(
                    "{} conditions: {}",
                    report.checked,
                    if report.passed() {
                        "all pass"
                    } else {
                        "VIOLATED"
                    }
                ));
            }
        }
        return Ok(EXIT_OK);
    }
    let a = assignment_from_args(&ctx, s)?;
    let mut by_family: BTreeMap<String, (usize, Vec<&AffineCondition>)> = BTreeMap::new();
    for cond in &conds {
        let entry = by_family
            .entry(family(&cond.label).to_string())
            .or_default();
        entry.0 += 1;
        if !cond.holds(&a)? {
            entry.1.push(cond);
        }
    }
    match c.format {
        Format::Json => {
            let fams: BTreeMap<String, Value> = by_family
                .iter()
                .map(|(f, (n, bad))| {
                    let v: Vec<String> = bad.iter().map(|c| c.to_string()).collect();
                    (
                        f.clone(),
                        json!({"checked": n, "pass": bad.is_empty(), "violations": v}),
                    )
                })
                .collect();
            o.line(
                serde_json::to_string_pretty(&json!({"N": c.n, "families": fams})).expect("json"),
            );
        }
        Format::Text => {
            for (f, (n, bad)) in &by_family {
                o.line(format!(
                    "{f}: {} ({n} conditions{})",
                    if bad.is_empty() { "pass" } else { "FAIL" },
                    if bad.is_empty() {
                        String::new()
                    } else {
                        format!(", {} violated", bad.len())
                    }
                ));
                for b in bad {
                    o.line(format!("  violated {}: {b}", b.label));
                }
            }
        }
    }
    Ok(EXIT_OK)
}

/// Execute a parsed command, writing results to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut o = Output { buf: String::new() };
    let (code, out) = match &cli.command {
        Command::Compute(c) => (cmd_compute(c, &mut o)?, c.out.clone()),
        Command::Eval {
            common,
            p,
            s,
            momenta,
        } => (
            cmd_eval(common, p, s, momenta.as_deref(), &mut o)?,
            common.out.clone(),
        ),
        Command::Verify {
            common,
            p,
            seed,
            samples,
            level,
            inject_fault,
        } => {
            let mut cfg = SuiteConfig::new(common.n, p.clone());
            cfg.budget.seed = *seed;
            cfg.budget.samples = *samples;
            cfg.budget.level = *level;
            if *inject_fault {
                cfg.fault = Some(Fault::OffsetSymbolic(0.1));
            }
            (cmd_verify(common, cfg, &mut o)?, common.out.clone())
        }
        Command::Poles(c) => (cmd_poles(c, &mut o)?, c.out.clone()),
        Command::Domain { common, s } => (cmd_domain(common, s, &mut o)?, common.out.clone()),
    };
    o.finish(out.as_deref(), stdout)?;
    Ok(code)
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_USAGE
        }
    }
}
