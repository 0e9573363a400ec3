//! Command-line front end. [`run`] parses arguments, dispatches and
//! returns the process exit status: 0 clean, 1 violations, 2 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::central::{
    cocycle_condition_check, degeneration_check, extended_jacobi_check, l_invariance_check,
    locality_check, nontriviality_witness, oracle_check, Cocycle, CurrentCocycle,
    VerificationReport, Violation, Window,
};
use crate::coefficients::{fmt_rational, Assignment, Param, ParamPoly, Rational};
use crate::current::{function_algebra, CurrentAlgebra};
use crate::error::{Error, Result};
use crate::expr::EvalContext;
use crate::kn::{Family, FnElement};
use crate::lie::{trace_form, BilinearForm, FiniteLieAlgebra};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Product,
    Cocycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormKind {
    /// `tr(AB)` in the matrix realization.
    Trace,
    /// `tr(A)·tr(B)`.
    TraceProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Check {
    Jacobi,
    CocycleCondition,
    Locality,
    Oracle,
    Linvariance,
    Degeneration,
    Witness,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Jacobi,
        Check::CocycleCondition,
        Check::Locality,
        Check::Oracle,
        Check::Linvariance,
        Check::Degeneration,
        Check::Witness,
    ];
}

/// Which finite-dimensional algebra the current algebra is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraSpec {
    Sl(usize),
    Gl(usize),
    Functions,
}

impl FromStr for AlgebraSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        if matches!(s.as_str(), "functions" | "function" | "a" | "fn") {
            return Ok(AlgebraSpec::Functions);
        }
        let rank = |rest: &str| -> std::result::Result<usize, String> {
            rest.trim_start_matches('(')
                .trim_end_matches(')')
                .parse()
                .map_err(|_| format!("bad algebra {s:?}; expected sl(n), gl(n) or functions"))
        };
        if let Some(r) = s.strip_prefix("sl") {
            Ok(AlgebraSpec::Sl(rank(r)?))
        } else if let Some(r) = s.strip_prefix("gl") {
            Ok(AlgebraSpec::Gl(rank(r)?))
        } else {
            Err(format!("bad algebra {s:?}; expected sl(n), gl(n) or functions"))
        }
    }
}

impl AlgebraSpec {
    pub fn build(self) -> Result<FiniteLieAlgebra> {
        match self {
            AlgebraSpec::Sl(n) => FiniteLieAlgebra::sl(n),
            AlgebraSpec::Gl(n) => FiniteLieAlgebra::gl(n),
            AlgebraSpec::Functions => Ok(function_algebra()),
        }
    }
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    s.parse::<Window>().map_err(|e| e.to_string())
}

fn parse_assignment(s: &str) -> std::result::Result<(Param, Rational), String> {
    let (p, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected PARAM=VALUE, got {s:?}"))?;
    let p = Param::from_name(p.trim()).ok_or_else(|| format!("unknown parameter {p:?}"))?;
    let v = v.trim();
    let r = match v.split_once('/') {
        Some((a, b)) => {
            let (a, b): (num_bigint::BigInt, num_bigint::BigInt) = (
                a.trim().parse().map_err(|_| format!("bad value {v:?}"))?,
                b.trim().parse().map_err(|_| format!("bad value {v:?}"))?,
            );
            if num_traits::Zero::is_zero(&b) {
                return Err("zero denominator".into());
            }
            Rational::new(a, b)
        }
        None => Rational::from_integer(v.parse().map_err(|_| format!("bad value {v:?}"))?),
    };
    Ok((p, r))
}

#[derive(Debug, Parser)]
#[command(name = "kn-affine", version, about = "Exact computations in current algebras of almost-graded function algebras and their central extensions")]
struct Cli {
    /// Function family: classical, threepoint or torus.
    #[arg(long, global = true, default_value = "classical", value_parser = parse_family)]
    family: Family,
    /// Finite Lie algebra: sl(n), gl(n) or functions.
    #[arg(long, global = true, default_value = "sl(2)")]
    algebra: AlgebraSpec,
    /// Invariant form used by the cocycle.
    #[arg(long, global = true, value_enum, default_value = "trace")]
    form: FormKind,
    /// Degree window LO:HI.
    #[arg(long, global = true, default_value = "-3:3", value_parser = parse_window, allow_hyphen_values = true)]
    window: Window,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Substitute a parameter value, e.g. a2=0 (repeatable).
    #[arg(long = "set", global = true, value_parser = parse_assignment)]
    set: Vec<(Param, Rational)>,
    /// Work in the centrally extended algebra.
    #[arg(long, global = true)]
    extended: bool,
    /// Write the output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Describe the Lie algebra and the function family as JSON.
    Describe,
    /// Evaluate `[LHS, RHS]`, or a single expression.
    Bracket {
        #[arg(allow_hyphen_values = true)]
        lhs: String,
        #[arg(allow_hyphen_values = true)]
        rhs: Option<String>,
    },
    /// Emit the product or cocycle table for all pairs in the window.
    Table {
        #[arg(value_enum)]
        kind: TableKind,
    },
    /// Run verification sweeps; exit 1 if any violation is found.
    Verify {
        /// Comma-separated subset of checks (default: all).
        #[arg(long, value_enum, value_delimiter = ',')]
        checks: Vec<Check>,
        /// Perturb the cocycle table entry (1, -1) by 1.
        #[arg(long)]
        corrupt_cocycle: bool,
    },
    /// Compare against the classical algebra at the degenerate parameter
    /// values; with an expression, show it before and after.
    Degenerate {
        #[arg(allow_hyphen_values = true)]
        expr: Option<String>,
    },
}

/// Resolved configuration shared by all commands.
#[derive(Clone, Debug)]
pub struct CliConfig {
    pub family: Family,
    pub algebra: AlgebraSpec,
    pub form: FormKind,
    pub window: Window,
    pub format: Format,
    pub assignment: Assignment,
    pub extended: bool,
}

impl CliConfig {
    pub fn new(family: Family, algebra: AlgebraSpec) -> Self {
        CliConfig {
            family,
            algebra,
            form: FormKind::Trace,
            window: Window { lo: -3, hi: 3 },
            format: Format::Csv,
            assignment: Assignment::new(),
            extended: false,
        }
    }

    pub fn current_algebra(&self) -> Result<CurrentAlgebra> {
        Ok(CurrentAlgebra::new(self.algebra.build()?, self.family))
    }

    /// The geometric cocycle `α·ω` for the configured form.
    pub fn cocycle(&self) -> Result<CurrentCocycle> {
        let lie = self.algebra.build()?;
        let form = match (self.algebra, self.form) {
            (AlgebraSpec::Functions, _) => trace_form(&lie, &[], &[vec![ParamPoly::one()]])?,
            (_, FormKind::Trace) => BilinearForm::trace(&lie)?,
            (_, FormKind::TraceProduct) => BilinearForm::trace_product(&lie)?,
        };
        Ok(CurrentCocycle::new(form, self.family))
    }

    pub fn context(&self) -> Result<EvalContext> {
        let alg = self.current_algebra()?;
        Ok(if self.extended {
            EvalContext::extended(alg, Arc::new(self.cocycle()?))
        } else {
            EvalContext::new(alg)
        })
    }
}

/// Rendered `[lhs, rhs]`, or `lhs` alone, after `--set` substitutions.
pub fn cmd_bracket(config: &CliConfig, lhs: &str, rhs: Option<&str>) -> Result<String> {
    let ctx = config.context()?;
    let u = match rhs {
        Some(r) => ctx.eval_element(&format!("[{lhs}, {r}]"))?,
        None => ctx.eval_element(lhs)?,
    };
    Ok(u.substitute(&config.assignment).to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductRow {
    pub n: i64,
    pub m: i64,
    pub h: i64,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CocycleRow {
    pub n: i64,
    pub m: i64,
    pub value: String,
}

pub fn product_rows(config: &CliConfig) -> Result<Vec<ProductRow>> {
    let mut rows = Vec::new();
    for n in config.window.degrees() {
        for m in config.window.degrees() {
            let p = FnElement::basis(config.family, n)
                .mul(&FnElement::basis(config.family, m))?
                .substitute(&config.assignment);
            for (h, c) in p.coeffs().rev() {
                rows.push(ProductRow {
                    n,
                    m,
                    h,
                    coefficient: c.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn cocycle_rows(config: &CliConfig) -> Result<Vec<CocycleRow>> {
    let mut rows = Vec::new();
    for n in config.window.degrees() {
        for m in config.window.degrees() {
            let w = FnElement::basis(config.family, n)
                .pairing(&FnElement::basis(config.family, m))?
                .substitute(&config.assignment);
            rows.push(CocycleRow {
                n,
                m,
                value: w.to_string(),
            });
        }
    }
    Ok(rows)
}

fn render_rows<T: Serialize>(rows: &[T], header: &[&str], cells: impl Fn(&T) -> Vec<String>, format: Format) -> Result<String> {
    let io = |e: &dyn std::fmt::Display| Error::Eval(format!("output: {e}"));
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).map_err(|e| io(&e))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).map_err(|e| io(&e))?;
            for r in rows {
                w.write_record(cells(r)).map_err(|e| io(&e))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| io(&e))?).map_err(|e| io(&e))?
        }
        Format::Markdown => {
            let mut s = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
            for r in rows {
                let _ = writeln!(s, "| {} |", cells(r).join(" | "));
            }
            s
        }
    })
}

/// Table text in the configured format; rows in window order.
pub fn cmd_table(config: &CliConfig, kind: TableKind) -> Result<String> {
    match kind {
        TableKind::Product => render_rows(
            &product_rows(config)?,
            &["n", "m", "h", "coefficient"],
            |r| vec![r.n.to_string(), r.m.to_string(), r.h.to_string(), r.coefficient.clone()],
            config.format,
        ),
        TableKind::Cocycle => render_rows(
            &cocycle_rows(config)?,
            &["n", "m", "value"],
            |r| vec![r.n.to_string(), r.m.to_string(), r.value.clone()],
            config.format,
        ),
    }
}

/// Runs the selected checks (all if empty) and returns their reports.
pub fn cmd_verify(config: &CliConfig, checks: &[Check], corrupt: bool) -> Result<Vec<VerificationReport>> {
    let mut psi = config.cocycle()?;
    if corrupt {
        psi = psi.corrupted(1, -1, ParamPoly::one());
    }
    let w = config.window;
    let family = config.family;
    let mut selected: Vec<Check> = if checks.is_empty() { Check::ALL.to_vec() } else { checks.to_vec() };
    selected.sort();
    selected.dedup();
    let mut out = Vec::new();
    for check in selected {
        let r = match check {
            Check::Jacobi => extended_jacobi_check(&psi, w, None)?,
            Check::CocycleCondition => cocycle_condition_check(&psi, w, None)?,
            Check::Locality => locality_check(&psi, w, family.cocycle_band())?,
            Check::Oracle => oracle_check(family, w)?,
            Check::Linvariance => {
                let mut merged: Option<VerificationReport> = None;
                for n in [-1, 0, 1, 2] {
                    let h = FnElement::basis(family, n);
                    let r = l_invariance_check(&psi, &h, w, 50)?;
                    match &mut merged {
                        None => merged = Some(r),
                        Some(m) => {
                            m.tuples_checked += r.tuples_checked;
                            m.violations.extend(r.violations);
                        }
                    }
                }
                merged.expect("at least one field")
            }
            Check::Degeneration => degeneration_check(family, w)?,
            Check::Witness => witness_report(&psi, w)?,
        };
        out.push(r);
    }
    Ok(out)
}

fn witness_report(psi: &CurrentCocycle, w: Window) -> Result<VerificationReport> {
    let max = w.hi.max(-w.lo).max(1);
    let (violations, bounds) = match nontriviality_witness(psi, max) {
        Ok(wit) => (Vec::new(), Some(serde_json::to_value(&wit).expect("witness serializes"))),
        Err(Error::NoWitness(n)) => (
            vec![Violation {
                tuple: format!("x(n), x(-n) for n = 1..{n}"),
                value: "no nonzero value on a Cartan-type pair".into(),
            }],
            None,
        ),
        Err(e) => return Err(e),
    };
    Ok(VerificationReport {
        check: "witness".into(),
        family: psi.family().to_string(),
        algebra: psi.algebra().name().into(),
        window: w,
        tuples_checked: 1,
        violations,
        bounds,
    })
}

/// Degeneration summary plus, with an expression, its value before and
/// after setting the parameters to zero.
pub fn cmd_degenerate(config: &CliConfig, expr: Option<&str>) -> Result<(serde_json::Value, bool)> {
    let report = degeneration_check(config.family, config.window)?;
    let clean = report.is_clean();
    let mut v = serde_json::json!({ "report": report });
    if let Some(e) = expr {
        let u = config.context()?.eval_element(e)?;
        let at = config.family.degeneration();
        let classical = CliConfig {
            family: Family::Classical,
            ..config.clone()
        };
        let reference = classical.context()?.eval_element(&zero_params(e))?;
        let degenerate = u.substitute(&at);
        v["expression"] = serde_json::json!({
            "input": e,
            "value": u.to_string(),
            "degenerate": degenerate.to_string(),
            "classical": reference.to_string(),
            "matches": degenerate.to_string() == reference.to_string(),
        });
    }
    Ok((v, clean))
}

/// Replaces parameter names by `0` so an expression can be read in the
/// classical family.
fn zero_params(e: &str) -> String {
    let mut out = e.to_string();
    for p in Param::ALL {
        out = replace_word(&out, p.name(), "0");
    }
    out
}

fn replace_word(s: &str, word: &str, by: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let w: Vec<char> = word.chars().collect();
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        let boundary_before = i == 0 || !is_ident(chars[i - 1]);
        let matches = chars[i..].starts_with(&w);
        let boundary_after = chars.get(i + w.len()).is_none_or(|c| !is_ident(*c));
        if boundary_before && matches && boundary_after {
            out.push_str(by);
            i += w.len();
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

fn describe(config: &CliConfig) -> Result<serde_json::Value> {
    let alg = config.algebra.build()?;
    let family = config.family;
    let (t2, t1) = family.cocycle_band();
    Ok(serde_json::json!({
        "algebra": alg.describe(),
        "family": {
            "name": family.name(),
            "params": family.params().iter().map(|p| p.name()).collect::<Vec<_>>(),
            "marked_points": family.marked_points().iter().map(|p| p.name()).collect::<Vec<_>>(),
            "pairing_points": family
                .pairing_points()
                .iter()
                .map(|(p, s)| serde_json::json!({"point": p.name(), "sign": s}))
                .collect::<Vec<_>>(),
            "max_shift": family.max_shift(),
            "cocycle_band": [t2, t1],
        },
        "set": config
            .assignment
            .iter()
            .map(|(p, v)| (p.name().to_string(), fmt_rational(v)))
            .collect::<std::collections::BTreeMap<_, _>>(),
    }))
}

fn emit(text: &str, out_path: Option<&std::path::Path>, stdout: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Eval(format!("output: {e}"));
    match out_path {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => stdout.write_all(text.as_bytes()).map_err(io),
    }
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let default_format = match cli.command {
        Command::Table { .. } => Format::Csv,
        _ => Format::Json,
    };
    let config = CliConfig {
        family: cli.family,
        algebra: cli.algebra,
        form: cli.form,
        window: cli.window,
        format: cli.format.unwrap_or(default_format),
        assignment: cli.set.into_iter().collect(),
        extended: cli.extended,
    };
    let out = cli.out.as_deref();
    match cli.command {
        Command::Describe => emit(&json_text(&describe(&config)?), out, stdout)?,
        Command::Bracket { lhs, rhs } => {
            let mut s = cmd_bracket(&config, &lhs, rhs.as_deref())?;
            s.push('\n');
            emit(&s, out, stdout)?;
        }
        Command::Table { kind } => emit(&cmd_table(&config, kind)?, out, stdout)?,
        Command::Verify { checks, corrupt_cocycle } => {
            let reports = cmd_verify(&config, &checks, corrupt_cocycle)?;
            emit(&json_text(&reports), out, stdout)?;
            return Ok(if reports.iter().all(VerificationReport::is_clean) { 0 } else { 1 });
        }
        Command::Degenerate { expr } => {
            let (v, clean) = cmd_degenerate(&config, expr.as_deref())?;
            emit(&json_text(&v), out, stdout)?;
            let matches = v["expression"]["matches"].as_bool().unwrap_or(true);
            return Ok(if clean && matches { 0 } else { 1 });
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("kn-affine").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn algebra_spec_parsing() {
        assert_eq!("sl(3)".parse::<AlgebraSpec>().unwrap(), AlgebraSpec::Sl(3));
        assert_eq!("gl2".parse::<AlgebraSpec>().unwrap(), AlgebraSpec::Gl(2));
        assert_eq!("functions".parse::<AlgebraSpec>().unwrap(), AlgebraSpec::Functions);
        assert!("so(3)".parse::<AlgebraSpec>().is_err());
    }

    #[test]
    fn assignment_parsing() {
        let (p, v) = parse_assignment("a2=3/4").unwrap();
        assert_eq!((p, v), (Param::A2, Rational::new(3.into(), 4.into())));
        assert!(parse_assignment("x=1").is_err());
        assert!(parse_assignment("e1=1/0").is_err());
    }

    #[test]
    fn bracket_command() {
        let (code, out, _) = run_str(&["--family", "torus", "bracket", "e(1)", "f(1)"]);
        assert_eq!(code, 0);
        assert_eq!(out, "h(2) + 3*e1*h(0) + (2*e1^2 - e1*e2 - e2^2)*h(-2)\n");
        let (_, out, _) = run_str(&["--family", "threepoint", "--extended", "bracket", "[e(2), f(-2)]"]);
        assert_eq!(out, "h(0) - 2*t\n");
        let (_, out, _) = run_str(&["--family", "threepoint", "--set", "a2=0", "bracket", "e(1)", "f(1)"]);
        assert_eq!(out, "h(2)\n");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["bracket", "[e(1), f(1)"]).0, 2);
        assert_eq!(run_str(&["--window", "3:1", "describe"]).0, 2);
        assert_eq!(run_str(&["frobnicate"]).0, 2);
    }

    #[test]
    fn table_rows() {
        let mut c = CliConfig::new(Family::ThreePoint, AlgebraSpec::Sl(2));
        c.window = Window::new(-3, 3).unwrap();
        let rows = cocycle_rows(&c).unwrap();
        let r = rows.iter().find(|r| (r.n, r.m) == (3, -1)).unwrap();
        assert_eq!(r.value, "-2*a2");
        c.family = Family::Torus;
        c.window = Window::new(-2, 2).unwrap();
        let rows: Vec<_> = product_rows(&c)
            .unwrap()
            .into_iter()
            .filter(|r| (r.n, r.m) == (1, 1))
            .map(|r| (r.h, r.coefficient))
            .collect();
        assert_eq!(
            rows,
            [(2, "1".to_string()), (0, "3*e1".into()), (-2, "2*e1^2 - e1*e2 - e2^2".into())]
        );
    }

    #[test]
    fn verify_exit_codes() {
        let (code, out, _) = run_str(&["--family", "threepoint", "--window", "-2:2", "verify"]);
        assert_eq!(code, 0, "{out}");
        let (code, _, _) = run_str(&[
            "--family", "threepoint", "--window", "-2:2", "verify", "--checks", "cocycle-condition", "--corrupt-cocycle",
        ]);
        assert_eq!(code, 1);
    }

    #[test]
    fn degenerate_command() {
        let (code, out, _) = run_str(&["--family", "torus", "--window", "-2:2", "degenerate", "[e(1), f(1)]"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("\"matches\": true"));
    }
}
