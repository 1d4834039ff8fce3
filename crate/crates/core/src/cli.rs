//! Command-line front end. `main` parses [`Cli`] and hands it to [`run`];
//! everything here returns rendered output plus an exit code so the commands
//! can be driven directly from tests.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{is_prime, pow};
use crate::error::Error;
use crate::explicit::{applicable_forms, e_explicit, Evaluation, Formula};
use crate::linalg::ZpsMatrix;
use crate::oracle::{bruteforce_table, bruteforce_table_direct, OracleBudget};
use crate::probability::{asymptotic_residual, crt_compose, leading_term, prob_gcd_correct};
use crate::recursive::{count_table, CountKey, RecursiveCounter};
use crate::table::CountTable;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "zps-count",
    version,
    about = "Count matrices over Z/p^sZ by kernel size"
)]
pub struct Cli {
    /// Oracle budget: the largest number of matrices to enumerate.
    #[arg(long, global = true, env = "ZPS_COUNT_BUDGET")]
    pub budget: Option<u64>,

    /// Worker threads for the brute-force oracle.
    #[arg(long, global = true, env = "ZPS_COUNT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Number of n x m matrices mod p^s with exactly p^j solutions.
    Count(CountArgs),
    /// Counts for every j = 0..s*m.
    Table(TableArgs),
    /// Compare closed forms, recursion and (optionally) enumeration on a grid.
    Verify(VerifyArgs),
    /// Solution count and determinant check for one matrix file.
    Solve(SolveArgs),
    /// Probability that gcd(det A, p^s) is the solution count.
    Prob(ProbArgs),
    /// Counts for a composite modulus from its prime-power factors.
    Crt(CrtArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Explicit,
    Recursive,
    Bruteforce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Args)]
pub struct Shape {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub s: u32,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub shape: Shape,
    #[arg(long)]
    pub j: u32,
    #[arg(long, value_enum, default_value_t = Method::Explicit)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub shape: Shape,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Method::Explicit)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub max_n: u32,
    #[arg(long)]
    pub max_m: u32,
    #[arg(long)]
    pub max_s: u32,
    /// Comma-separated primes, e.g. `2,3,5`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub primes: Vec<u64>,
    #[arg(long)]
    pub with_bruteforce: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub s: u32,
    /// Significant digits in decimal renderings.
    #[arg(long, default_value_t = 12)]
    pub digits: usize,
}

#[derive(Debug, Args)]
pub struct CrtArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    /// Prime powers, e.g. `2^2,3^1`.
    #[arg(long)]
    pub factors: String,
    /// One exponent per factor, e.g. `0,0`.
    #[arg(long)]
    pub j: String,
}

/// Rendered stdout/stderr and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: message.into(),
        }
    }
}

impl From<Error> for Outcome {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Outcome::fail(code, format!("error: {err}"))
    }
}

type CmdResult = std::result::Result<Outcome, Outcome>;

pub fn run(cli: Cli) -> Outcome {
    let budget = match oracle_budget(cli.budget) {
        Ok(b) => b,
        Err(e) => return e.into(),
    };
    let result = match cli.command {
        Command::Count(args) => cmd_count(&args, &budget),
        Command::Table(args) => cmd_table(&args, &budget),
        Command::Verify(args) => cmd_verify(&args, &budget),
        Command::Solve(args) => cmd_solve(&args),
        Command::Prob(args) => cmd_prob(&args),
        Command::Crt(args) => cmd_crt(&args),
    };
    result.unwrap_or_else(|failure| failure)
}

fn oracle_budget(max_matrices: Option<u64>) -> Result<OracleBudget, Error> {
    let budget = OracleBudget::default();
    match max_matrices {
        Some(cap) => budget.with_max_matrices(BigUint::from(cap)),
        None => Ok(budget),
    }
}

fn validate(n: u32, m: u32, p: u64, s: u32) -> std::result::Result<(), Outcome> {
    let _ = (n, m);
    if !is_prime(p) {
        return Err(Error::NotPrime(p).into());
    }
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()).into());
    }
    Ok(())
}

fn pretty(value: &impl Serialize) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serializable output");
    out.push('\n');
    out
}

/// One answered count query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    pub n: u32,
    pub m: u32,
    pub p: u64,
    pub s: u32,
    pub j: u32,
    pub count: String,
    pub method: Method,
    pub formula: String,
}

fn cmd_count(args: &CountArgs, budget: &OracleBudget) -> CmdResult {
    let Shape { n, m, p, s } = args.shape;
    validate(n, m, p, s)?;
    let j = args.j as i64;
    let (count, formula) = match args.method {
        Method::Explicit => {
            let Evaluation { value, formula } = e_explicit(n, m, p, s, j);
            (value, formula.name().to_string())
        }
        Method::Recursive => (
            RecursiveCounter::new().count(CountKey::new(n, m, p, s, j)),
            Formula::Recursion.name().to_string(),
        ),
        Method::Bruteforce => {
            let table = bruteforce_table(n, m, p, s, budget)?;
            (table.get(j), "enumeration".to_string())
        }
    };
    let result = QueryResult {
        n,
        m,
        p,
        s,
        j: args.j,
        count: count.to_string(),
        method: args.method,
        formula,
    };
    Ok(Outcome::ok(pretty(&result)))
}

fn table_by(
    method: Method,
    n: u32,
    m: u32,
    p: u64,
    s: u32,
    budget: &OracleBudget,
) -> Result<CountTable, Error> {
    Ok(match method {
        Method::Explicit => {
            let counts = (0..=(s * m) as i64)
                .map(|j| e_explicit(n, m, p, s, j).value)
                .collect();
            CountTable::new(n, m, p, s, counts)
        }
        Method::Recursive => count_table(n, m, p, s),
        Method::Bruteforce => bruteforce_table(n, m, p, s, budget)?,
    })
}

fn cmd_table(args: &TableArgs, budget: &OracleBudget) -> CmdResult {
    let Shape { n, m, p, s } = args.shape;
    validate(n, m, p, s)?;
    let table = table_by(args.method, n, m, p, s, budget)?;
    let rendered = match args.format {
        Format::Json => render_json(&table, args.method),
        Format::Csv => render_csv(&table),
        Format::Plain => render_plain(&table),
    };
    Ok(Outcome::ok(rendered))
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Explicit => "explicit",
        Method::Recursive => "recursive",
        Method::Bruteforce => "bruteforce",
    }
}

/// Only exponents with a nonzero count are listed.
pub fn render_json(table: &CountTable, method: Method) -> String {
    let counts: serde_json::Map<String, Value> = table
        .nonzero()
        .map(|(j, c)| (j.to_string(), Value::String(c.to_string())))
        .collect();
    let doc = json!({
        "n": table.n,
        "m": table.m,
        "p": table.p,
        "s": table.s,
        "total": table.total().to_string(),
        "counts": counts,
        "method": method_name(method),
    });
    pretty(&doc)
}

pub fn render_csv(table: &CountTable) -> String {
    let mut out = String::from("j,count\n");
    for (j, c) in table.nonzero() {
        let _ = writeln!(out, "{j},{c}");
    }
    out
}

pub fn render_plain(table: &CountTable) -> String {
    let rows: Vec<(String, String)> = table
        .nonzero()
        .map(|(j, c)| (j.to_string(), c.to_string()))
        .collect();
    let total = table.total().to_string();
    let jw = rows.iter().map(|r| r.0.len()).max().unwrap_or(1).max(1);
    let cw = rows
        .iter()
        .map(|r| r.1.len())
        .chain([total.len(), 5])
        .max()
        .unwrap_or(5);
    let mut out = format!(
        "E({}x{}, {}^{}, p^j)\n{:>jw$}  {:>cw$}\n",
        table.n, table.m, table.p, table.s, "j", "count"
    );
    for (j, c) in &rows {
        let _ = writeln!(out, "{j:>jw$}  {c:>cw$}");
    }
    let _ = writeln!(out, "{:>jw$}  {total:>cw$}", "Σ");
    out
}

/// Grid swept by `verify`.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub max_n: u32,
    pub max_m: u32,
    pub max_s: u32,
    pub primes: Vec<u64>,
    pub with_bruteforce: bool,
    pub budget: OracleBudget,
}

/// Per-point outcome of a verification sweep.
#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub lines: Vec<String>,
    pub mismatches: usize,
    pub points: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

fn fmt_table(t: &CountTable) -> String {
    let parts: Vec<String> = t.counts().iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Sweeps the grid, comparing every applicable closed form from `forms`
/// against the recursion and, when requested, both oracles.
pub fn verify_grid<F>(cfg: &VerifyConfig, forms: F) -> VerifyReport
where
    F: Fn(u32, u32, u64, u32, i64) -> Vec<Evaluation>,
{
    let mut report = VerifyReport::default();
    for &p in &cfg.primes {
        let mut ctx = RecursiveCounter::new();
        for s in 1..=cfg.max_s {
            for n in 1..=cfg.max_n {
                for m in 1..=cfg.max_m {
                    report.points += 1;
                    let table = ctx.table(n, m, p, s);
                    let tag = format!("n={n} m={m} p={p} s={s}");
                    let mut bad = Vec::new();
                    if !table.is_normalized() {
                        bad.push(format!(
                            "total {} != {}",
                            table.total(),
                            table.expected_total()
                        ));
                    }
                    let mut compared = 0;
                    for j in 0..=(s * m) as i64 {
                        let expected = table.get(j);
                        for eval in forms(n, m, p, s, j) {
                            compared += 1;
                            if eval.value != expected {
                                bad.push(format!(
                                    "j={j} recursion={expected} {}={}",
                                    eval.formula, eval.value
                                ));
                            }
                        }
                    }
                    let mut oracle_note = String::new();
                    if cfg.with_bruteforce {
                        match bruteforce_table(n, m, p, s, &cfg.budget) {
                            Ok(oracle) => {
                                oracle_note.push_str(" oracle=agree");
                                if oracle != table {
                                    oracle_note = " oracle=DISAGREE".into();
                                    bad.push(format!(
                                        "recursion={} oracle={}",
                                        fmt_table(&table),
                                        fmt_table(&oracle)
                                    ));
                                }
                                if let Ok(direct) = bruteforce_table_direct(n, m, p, s, &cfg.budget)
                                {
                                    if direct != oracle {
                                        bad.push(format!(
                                            "oracle={} direct={}",
                                            fmt_table(&oracle),
                                            fmt_table(&direct)
                                        ));
                                    }
                                }
                            }
                            Err(Error::BudgetExceeded { .. }) => {
                                oracle_note.push_str(" oracle=skipped")
                            }
                            Err(e) => bad.push(format!("oracle error: {e}")),
                        }
                    }
                    if bad.is_empty() {
                        report
                            .lines
                            .push(format!("ok {tag} forms={compared}{oracle_note}"));
                    } else {
                        report.mismatches += 1;
                        for b in bad {
                            report.lines.push(format!("MISMATCH {tag} {b}"));
                        }
                    }
                }
            }
        }
    }
    report
}

fn cmd_verify(args: &VerifyArgs, budget: &OracleBudget) -> CmdResult {
    for &p in &args.primes {
        if !is_prime(p) {
            return Err(Error::NotPrime(p).into());
        }
    }
    let cfg = VerifyConfig {
        max_n: args.max_n,
        max_m: args.max_m,
        max_s: args.max_s,
        primes: args.primes.clone(),
        with_bruteforce: args.with_bruteforce,
        budget: budget.clone(),
    };
    let report = verify_grid(&cfg, applicable_forms);
    let mut out = report.lines.join("\n");
    let _ = writeln!(
        out,
        "\n{} points, {} with mismatches",
        report.points, report.mismatches
    );
    let code = if report.passed() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    Ok(Outcome {
        code,
        stdout: out,
        stderr: String::new(),
    })
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let text = std::fs::read_to_string(&args.input).map_err(|e| {
        Outcome::fail(
            EXIT_USAGE,
            format!("error: cannot read {}: {e}", args.input.display()),
        )
    })?;
    let a = ZpsMatrix::from_json(&text)?;
    let modulus = a.modulus();
    let p = modulus.p();
    let k = a.kernel_exponent();
    let mut doc = json!({
        "p": p,
        "s": modulus.s(),
        "n": a.rows(),
        "m": a.cols(),
        "eta": a.solution_count().to_string(),
        "eta_power": format!("{p}^{k}"),
        "valuations": a.smith_profile().valuations(),
    });
    if a.is_square() {
        let v = a.det_valuation()?;
        let fields = doc.as_object_mut().expect("object");
        fields.insert("determinant".into(), json!(a.determinant()?.to_string()));
        fields.insert("gcd_det".into(), json!(pow(p, v as u64).to_string()));
        fields.insert("gcd_det_correct".into(), json!(a.gcd_det_correct()?));
    }
    Ok(Outcome::ok(pretty(&doc)))
}

fn cmd_prob(args: &ProbArgs) -> CmdResult {
    let ProbArgs { n, p, s, digits } = *args;
    validate(n, n, p, s)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()).into());
    }
    let prob = prob_gcd_correct(n, p, s)?;
    let lead = leading_term(p, s);
    let residual = if n >= 2 {
        Some(asymptotic_residual(n, p, s)?)
    } else {
        None
    };
    let doc = json!({
        "n": n,
        "p": p,
        "s": s,
        "probability": prob.to_string(),
        "probability_decimal": decimal(&prob, digits),
        "leading_term": lead.to_string(),
        "leading_term_decimal": decimal(&lead, digits),
        "residual": residual.as_ref().map(|r| r.to_string()),
        "residual_decimal": residual.as_ref().map(|r| decimal(r, digits)),
    });
    Ok(Outcome::ok(pretty(&doc)))
}

/// Parses `"p1^s1,p2^s2,..."`; a bare prime means exponent 1.
pub fn parse_factors(text: &str) -> Result<Vec<(u64, u32)>, Error> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            let (p, s) = match item.split_once('^') {
                Some((p, s)) => (p.trim(), s.trim()),
                None => (item, "1"),
            };
            let p: u64 = p
                .parse()
                .map_err(|_| Error::Malformed(format!("bad prime in {item:?}")))?;
            let s: u32 = s
                .parse()
                .map_err(|_| Error::Malformed(format!("bad exponent in {item:?}")))?;
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if s == 0 {
                return Err(Error::Malformed(format!("zero exponent in {item:?}")));
            }
            Ok((p, s))
        })
        .collect()
}

fn cmd_crt(args: &CrtArgs) -> CmdResult {
    let factors = parse_factors(&args.factors)?;
    let exponents: Vec<i64> = args
        .j
        .split(',')
        .map(|t| t.trim().parse::<u32>().map(i64::from))
        .collect::<Result<_, _>>()
        .map_err(|_| Outcome::from(Error::Malformed(format!("bad exponent list {:?}", args.j))))?;
    if exponents.len() != factors.len() {
        return Err(Error::Malformed(format!(
            "{} exponents for {} factors",
            exponents.len(),
            factors.len()
        ))
        .into());
    }
    let tables = factors
        .iter()
        .map(|&(p, s)| count_table(args.n, args.m, p, s))
        .collect();
    let composite = crt_compose(tables)?;
    let count = composite.lookup(&exponents).expect("arity checked");
    let solutions = composite.solution_count(&exponents).expect("arity checked");
    let parts: Vec<Value> = factors
        .iter()
        .zip(&exponents)
        .map(|(&(p, s), &j)| {
            json!({
                "p": p,
                "s": s,
                "j": j,
                "count": crate::recursive::e_rec(args.n, args.m, p, s, j).to_string(),
            })
        })
        .collect();
    let doc = json!({
        "n": args.n,
        "m": args.m,
        "modulus": composite.modulus().to_string(),
        "solutions": solutions.to_string(),
        "count": count.to_string(),
        "factors": parts,
    });
    Ok(Outcome::ok(pretty(&doc)))
}

/// Decimal rendering with `digits` significant digits (round half up).
///
/// Fixed notation for magnitudes in `[1e-5, 10^digits)`, scientific
/// otherwise; trailing zeros are dropped.
pub fn decimal(value: &BigRational, digits: usize) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let digits = digits.max(1);
    let negative = value.is_negative();
    let numer = value.numer().abs();
    let denom = value.denom().clone();
    let ten = BigInt::from(10);

    // exponent e with 10^e <= |value| < 10^{e+1}
    let mut e = numer.to_string().len() as i64 - denom.to_string().len() as i64;
    let scaled_cmp = |e: i64| -> bool {
        // |value| >= 10^e ?
        if e >= 0 {
            numer >= &denom * Pow::pow(&ten, e as u64)
        } else {
            &numer * Pow::pow(&ten, (-e) as u64) >= denom
        }
    };
    while !scaled_cmp(e) {
        e -= 1;
    }
    while scaled_cmp(e + 1) {
        e += 1;
    }

    let shift = digits as i64 - 1 - e;
    let (num, den) = if shift >= 0 {
        (&numer * Pow::pow(&ten, shift as u64), denom.clone())
    } else {
        (numer.clone(), &denom * Pow::pow(&ten, (-shift) as u64))
    };
    let (mut mantissa, rem) = num.div_rem(&den);
    if rem * 2 >= den {
        mantissa += 1;
    }
    if mantissa.to_string().len() > digits {
        mantissa /= 10;
        e += 1;
    }
    let mut body = mantissa.to_string();
    while body.len() < digits {
        body.push('0');
    }

    let sign = if negative { "-" } else { "" };
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if e >= -5 && e < digits as i64 {
        let text = if e >= 0 {
            let split = e as usize + 1;
            format!("{}.{}", &body[..split], &body[split..])
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), body)
        };
        format!("{sign}{}", trim(text))
    } else {
        let text = trim(format!("{}.{}", &body[..1], &body[1..]));
        format!("{sign}{text}e{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&frac(123, 128), 12), "0.9609375");
        assert_eq!(decimal(&frac(1, 3), 5), "0.33333");
        assert_eq!(decimal(&frac(2, 3), 5), "0.66667");
        assert_eq!(decimal(&frac(1, 1), 12), "1");
        assert_eq!(decimal(&frac(-1, 128), 3), "-0.00781");
        assert_eq!(decimal(&frac(1, 10_000_000), 4), "1e-7");
        assert_eq!(decimal(&frac(999_999, 1_000_000), 3), "1");
        assert_eq!(decimal(&frac(12345, 1), 3), "1.23e4");
        assert_eq!(decimal(&frac(0, 1), 3), "0");
    }

    #[test]
    fn factor_parsing() {
        assert_eq!(parse_factors("2^2,3^1").unwrap(), vec![(2, 2), (3, 1)]);
        assert_eq!(parse_factors("5").unwrap(), vec![(5, 1)]);
        assert!(parse_factors("4^1").is_err());
        assert!(parse_factors("2^x").is_err());
        assert!(parse_factors("2^0").is_err());
    }

    #[test]
    fn renderers() {
        let t = count_table(2, 2, 2, 1);
        assert_eq!(render_csv(&t), "j,count\n0,6\n1,9\n2,1\n");
        let doc: Value = serde_json::from_str(&render_json(&t, Method::Recursive)).unwrap();
        assert_eq!(doc["total"], "16");
        assert_eq!(doc["counts"]["1"], "9");
        assert_eq!(doc["method"], "recursive");
        let plain = render_plain(&count_table(0, 2, 3, 1));
        assert!(plain.contains("2      1"), "{plain}");
    }

    #[test]
    fn verify_detects_injected_fault() {
        let cfg = VerifyConfig {
            max_n: 2,
            max_m: 2,
            max_s: 2,
            primes: vec![2],
            with_bruteforce: false,
            budget: OracleBudget::default(),
        };
        assert!(verify_grid(&cfg, applicable_forms).passed());
        let faulty = |n, m, p, s, j| {
            let mut forms = applicable_forms(n, m, p, s, j);
            for f in forms.iter_mut() {
                if f.formula == Formula::AtModulus {
                    f.value += 1u32;
                }
            }
            forms
        };
        let report = verify_grid(&cfg, faulty);
        assert!(!report.passed());
        assert!(report
            .lines
            .iter()
            .any(|l| l.starts_with("MISMATCH") && l.contains("kernel-equals-modulus")));
    }
}
