//! Command-line front end for the truncated Iwasawa-algebra toolkit.
//!
//! Exit codes: 0 = success or a passing verification, 1 = a verification
//! that ran to completion and failed, 2 = parse or configuration error,
//! 3 = inconclusive at the working precision or budget.  Output is
//! byte-deterministic for a fixed invocation and seed.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iwasawa_core::error::{Error, Result};
use iwasawa_core::factors::nontorsion_screen;
use iwasawa_core::flats::{simple_element, zero_count};
use iwasawa_core::growth::{fit_kappas, rank_quotient, GrowthSeries, KappaFit};
use iwasawa_core::modules::{
    char_ideal_elementary, char_ideal_presented, descend, verify_descent_identity, CharIdeal,
    CyclicSummand, ElementaryModule, PresentedModule, Verdict,
};
use iwasawa_core::parse::{parse_character, parse_element, parse_word};
use iwasawa_core::scenario::{parse_scenario, Scenario};
use iwasawa_core::{CompatReport, RingCtx};

const GRAMMAR_HELP: &str = "\
Element expressions use grammar_v1:

  expr   := term ((\"+\" | \"-\") term)*
  term   := factor (\"*\"? factor)*
  factor := atom (\"^\" sint)?
  atom   := \"p\" | \"t\" uint | \"g\" uint | uint | \"(\" expr \")\" | \"-\" atom

Juxtaposition multiplies (\"3 t1 t2\"); \"p\" is the prime, \"t<i>\" the
i-th variable, \"g<i>\" the group generator 1 + t<i>.  Negative exponents
need a unit base.  Characters are written \"[e1,...,ed]@level\", group
words \"[a1,...,ad]\".  Scenario files use the scenario_v1 JSON schema.";

#[derive(Parser)]
#[command(
    name = "iwasawa",
    version,
    about = "Exact arithmetic and descent checks in truncated Iwasawa algebras",
    after_help = GRAMMAR_HELP,
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Prime p of the coefficient ring
    #[arg(long, global = true, default_value_t = 3)]
    p: u64,

    /// Number of tower variables d
    #[arg(long, global = true, default_value_t = 2)]
    d: usize,

    /// Scalar precision N: coefficients live mod p^N
    #[arg(long, global = true, default_value_t = 8)]
    precision: u32,

    /// Total-degree bound D for retained monomials
    #[arg(long = "degree-bound", global = true, default_value_t = 8)]
    degree_bound: u32,

    /// Enumeration budget in dual-group points
    #[arg(long, global = true, default_value_t = 10_000_000)]
    budget: u128,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Seed for randomized suites (recorded in output paths that use it)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an element at a finite-order character
    Eval(EvalArgs),
    /// Substitute images for the variables (with none given, send the
    /// last variable to zero)
    Specialize(SpecializeArgs),
    /// Apply the group-inversion involution to an element
    Sharp(ExprArg),
    /// Print the simple element attached to a group word and a root order
    Simple(SimpleArgs),
    /// Count common zeros of a generator family at a finite level
    Zeroset(ZerosetArgs),
    /// Characteristic ideal of an elementary or square-presented module
    Charideal(CharidealArgs),
    /// Verify the base-change identity for an elementary module
    Descent(ElementaryArg),
    /// Print every correction factor of a scenario
    Factors(FileArg),
    /// Verify the tower-descent compatibility identity of a scenario
    Check(FileArg),
    /// Screen an intermediate cut against non-torsion obstructions
    Screen(ScreenArgs),
    /// Count quotient ranks along the tower and fit growth coefficients
    Growth(GrowthArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Element expression
    expr: String,
    /// Character, written [e1,...,ed]@level
    #[arg(long)]
    character: String,
}

#[derive(Args)]
struct SpecializeArgs {
    /// Element expression
    expr: String,
    /// Images of t1..td in the target ring, repeat per variable
    #[arg(long = "image")]
    images: Vec<String>,
    /// Variable count of the target ring (defaults to d - 1)
    #[arg(long = "target-d")]
    target_d: Option<usize>,
}

#[derive(Args)]
struct ExprArg {
    /// Element expression
    expr: String,
}

#[derive(Args)]
struct SimpleArgs {
    /// Group word [a1,...,ad] naming the element gamma = prod gi^ai
    #[arg(long)]
    gamma: String,
    /// Order of the root of unity (a power of p)
    #[arg(long = "zeta-order")]
    zeta_order: u64,
}

#[derive(Args)]
struct ZerosetArgs {
    /// Generator expressions; repeat the flag or separate with ';'
    #[arg(long = "gens", required = true)]
    gens: Vec<String>,
    /// Character level n: the scan covers the p^(n*d) characters of level <= n
    #[arg(long)]
    n: u32,
}

#[derive(Args)]
struct CharidealArgs {
    /// Square presentation matrix: rows split by ';', entries by ','
    #[arg(long, conflicts_with = "elementary")]
    matrix: Option<String>,
    /// Elementary module: blocks "xi[:power[:copies]]" split by ';'
    #[arg(long)]
    elementary: Option<String>,
}

#[derive(Args)]
struct ElementaryArg {
    /// Elementary module: blocks "xi[:power[:copies]]" split by ';'
    #[arg(long)]
    elementary: String,
}

#[derive(Args)]
struct FileArg {
    /// Path to a scenario_v1 JSON file
    scenario: String,
}

#[derive(Args)]
struct ScreenArgs {
    /// Path to a scenario_v1 JSON file
    scenario: String,
    /// 1-based indices of the cut-out generators, written [i,j,...]
    #[arg(long)]
    cut: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

// Inconclusive outcomes (precision, degree, budget, non-stabilization)
// are distinguished from malformed input; everything else that stops a
// command before a verdict is a configuration problem.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::PrecisionInconclusive(_)
        | Error::DegreeOverflow(_)
        | Error::BudgetExceeded { .. }
        | Error::NotStabilized(_)
        | Error::IncompleteFactorBasis => 3,
        _ => 2,
    }
}

fn verdict_code(v: Verdict) -> ExitCode {
    match v {
        Verdict::Pass => ExitCode::from(0),
        Verdict::Fail => ExitCode::from(1),
        Verdict::Inconclusive => ExitCode::from(3),
    }
}

fn ring(cli: &Cli) -> Result<RingCtx> {
    if cli.d == 0 {
        return Err(Error::Config("d must be at least 1".into()));
    }
    if cli.degree_bound == 0 {
        return Err(Error::Config("degree bound must be at least 1".into()));
    }
    RingCtx::new(cli.p, cli.precision, cli.d, cli.degree_bound)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Eval(a) => cmd_eval(cli, a),
        Cmd::Specialize(a) => cmd_specialize(cli, a),
        Cmd::Sharp(a) => cmd_sharp(cli, a),
        Cmd::Simple(a) => cmd_simple(cli, a),
        Cmd::Zeroset(a) => cmd_zeroset(cli, a),
        Cmd::Charideal(a) => cmd_charideal(cli, a),
        Cmd::Descent(a) => cmd_descent(cli, a),
        Cmd::Factors(a) => cmd_factors(cli, a),
        Cmd::Check(a) => cmd_check(cli, a),
        Cmd::Screen(a) => cmd_screen(cli, a),
        Cmd::Growth(a) => cmd_growth(cli, a),
    }
}

fn print_value(cli: &Cli, value: &str) {
    match cli.format {
        Format::Table => println!("{value}"),
        Format::Json => println!("{}", serde_json::json!({ "value": value })),
    }
}

fn cmd_eval(cli: &Cli, a: &EvalArgs) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    let el = parse_element(&a.expr, ctx)?;
    let chi = parse_character(&a.character, cli.p)?;
    let v = el.eval_char(&chi)?;
    print_value(cli, &v.to_string());
    Ok(ExitCode::from(0))
}

fn cmd_specialize(cli: &Cli, a: &SpecializeArgs) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    let el = parse_element(&a.expr, ctx)?;
    let out = if a.images.is_empty() && a.target_d.is_none() {
        el.specialize_canonical()?
    } else {
        let td = a.target_d.unwrap_or(cli.d.saturating_sub(1));
        let target = RingCtx::new(cli.p, cli.precision, td, cli.degree_bound)?;
        if a.images.len() != cli.d {
            return Err(Error::Config(format!(
                "need {} images (one per variable), got {}",
                cli.d,
                a.images.len()
            )));
        }
        let images = a
            .images
            .iter()
            .map(|s| parse_element(s, target))
            .collect::<Result<Vec<_>>>()?;
        el.specialize(&images)?
    };
    print_value(cli, &out.to_string());
    Ok(ExitCode::from(0))
}

fn cmd_sharp(cli: &Cli, a: &ExprArg) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    let out = parse_element(&a.expr, ctx)?.sharp()?;
    print_value(cli, &out.to_string());
    Ok(ExitCode::from(0))
}

fn cmd_simple(cli: &Cli, a: &SimpleArgs) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    let w = parse_word(&a.gamma)?;
    // order p^(n+1) pins the level n of the simple element
    let mut q = a.zeta_order;
    let mut k = 0u32;
    while q > 1 && q % cli.p == 0 {
        q /= cli.p;
        k += 1;
    }
    if q != 1 || k == 0 {
        return Err(Error::Config(format!(
            "zeta order {} is not a positive power of p = {}",
            a.zeta_order, cli.p
        )));
    }
    let out = simple_element(ctx, &w, k - 1)?;
    print_value(cli, &out.to_string());
    Ok(ExitCode::from(0))
}

fn split_exprs(raw: &[String]) -> Vec<String> {
    raw.iter()
        .flat_map(|s| s.split(';'))
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn cmd_zeroset(cli: &Cli, a: &ZerosetArgs) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    let gens = split_exprs(&a.gens)
        .iter()
        .map(|s| parse_element(s, ctx))
        .collect::<Result<Vec<_>>>()?;
    let report = zero_count(&gens, a.n, cli.budget)?;
    match cli.format {
        Format::Table => {
            println!("level {}", report.level);
            println!("examined {}", report.examined);
            println!("count {}", report.zeros);
        }
        Format::Json => {
            let witnesses: Vec<String> =
                report.witnesses.iter().map(|c| c.to_string()).collect();
            println!(
                "{}",
                serde_json::json!({
                    "level": report.level,
                    "examined": report.examined,
                    "count": report.zeros,
                    "witnesses": witnesses,
                })
            );
        }
    }
    Ok(ExitCode::from(0))
}

// "xi[:power[:copies]]" blocks split by ';'
fn parse_elementary(spec: &str, ctx: RingCtx) -> Result<ElementaryModule> {
    let mut summands = Vec::new();
    for block in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let mut parts = block.split(':').map(str::trim);
        let xi = parse_element(parts.next().unwrap_or(""), ctx)?;
        let power = match parts.next() {
            Some(t) => t
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad power {t:?} in {block:?}")))?,
            None => 1,
        };
        let copies = match parts.next() {
            Some(t) => t
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad copy count {t:?} in {block:?}")))?,
            None => 1,
        };
        if parts.next().is_some() {
            return Err(Error::Config(format!("too many ':' fields in {block:?}")));
        }
        summands.push(CyclicSummand::new(xi, power, copies));
    }
    ElementaryModule::new(ctx, summands)
}

fn parse_matrix(spec: &str, ctx: RingCtx) -> Result<PresentedModule> {
    let rows = spec
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| parse_element(e.trim(), ctx))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PresentedModule::new(ctx, rows)
}

fn print_ideal(cli: &Cli, ideal: &CharIdeal) {
    match cli.format {
        Format::Table => println!("{ideal}"),
        Format::Json => {
            let gen = ideal.generator().map(|g| g.to_string());
            println!("{}", serde_json::json!({ "zero": ideal.is_zero(), "generator": gen }));
        }
    }
}

fn cmd_charideal(cli: &Cli, a: &CharidealArgs) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    let ideal = match (&a.matrix, &a.elementary) {
        (Some(m), None) => char_ideal_presented(&parse_matrix(m, ctx)?)?,
        (None, Some(e)) => {
            CharIdeal::from_element(char_ideal_elementary(&parse_elementary(e, ctx)?)?)
        }
        _ => {
            return Err(Error::Config(
                "give exactly one of --matrix or --elementary".into(),
            ))
        }
    };
    print_ideal(cli, &ideal);
    Ok(ExitCode::from(0))
}

fn cmd_descent(cli: &Cli, a: &ElementaryArg) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    let m = parse_elementary(&a.elementary, ctx)?;
    let (invariants, coinvariants) = descend(&m)?;
    let verdict = verify_descent_identity(&m)?;
    match cli.format {
        Format::Table => {
            println!("invariants {invariants}");
            println!("coinvariants {coinvariants}");
            println!("verdict {verdict}");
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::json!({
                    "invariants": invariants.to_string(),
                    "coinvariants": coinvariants.to_string(),
                    "verdict": verdict,
                })
            );
        }
    }
    Ok(verdict_code(verdict))
}

fn load_scenario(path: &str) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
    Scenario::from_file(&parse_scenario(&text)?)
}

fn print_report(cli: &Cli, report: &CompatReport) {
    match cli.format {
        Format::Table => {
            println!("verdict {}", report.verdict);
            println!(
                "ring p={} d={} precision={} degree_bound={}",
                report.p, report.d, report.precision, report.degree_bound
            );
            for e in &report.entries {
                println!("factor {} [{}] {}", e.name, e.kind, e.value);
            }
            if !report.lhs.is_empty() {
                println!("lhs {}", report.lhs);
                println!("rhs {}", report.rhs);
            }
            for n in &report.notes {
                println!("note {n}");
            }
        }
        Format::Json => match serde_json::to_string_pretty(report) {
            Ok(s) => println!("{s}"),
            Err(e) => eprintln!("error: cannot serialize report: {e}"),
        },
    }
}

fn cmd_factors(cli: &Cli, a: &FileArg) -> Result<ExitCode> {
    let sc = load_scenario(&a.scenario)?;
    let report = sc.check()?;
    // factor listing only: the verdict is check's business
    match cli.format {
        Format::Table => {
            for e in &report.entries {
                println!("factor {} [{}] {}", e.name, e.kind, e.value);
            }
            for n in &report.notes {
                println!("note {n}");
            }
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::json!({ "entries": report.entries, "notes": report.notes })
            );
        }
    }
    Ok(ExitCode::from(0))
}

fn cmd_check(cli: &Cli, a: &FileArg) -> Result<ExitCode> {
    let sc = load_scenario(&a.scenario)?;
    let report = sc.check()?;
    print_report(cli, &report);
    Ok(verdict_code(report.verdict))
}

fn cmd_screen(cli: &Cli, a: &ScreenArgs) -> Result<ExitCode> {
    let sc = load_scenario(&a.scenario)?;
    let cut_word = parse_word(&a.cut)?;
    let cut = cut_word
        .0
        .iter()
        .map(|&i| {
            usize::try_from(i).map_err(|_| Error::Config(format!("bad generator index {i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = CharIdeal::from_element(sc.theta_l.clone());
    let report = nontorsion_screen(&theta, sc.ctx, &sc.places, &cut)?;
    match cli.format {
        Format::Table => {
            let obstructions = if report.obstructions.is_empty() {
                "-".to_string()
            } else {
                report.obstructions.join(", ")
            };
            println!("obstructions {obstructions}");
            println!("specialization_vanishes {}", report.specialization_vanishes);
            println!("classification {}", report.classification());
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::json!({
                    "obstructions": report.obstructions,
                    "specialization_vanishes": report.specialization_vanishes,
                    "classification": report.classification(),
                })
            );
        }
    }
    Ok(ExitCode::from(0))
}

#[derive(Args)]
struct GrowthArgs {
    /// Generator expressions; repeat the flag or separate with ';'
    #[arg(long = "gens", required = true)]
    gens: Vec<String>,
    /// First level to count
    #[arg(long = "n-min", default_value_t = 1)]
    n_min: u32,
    /// Last level to count
    #[arg(long = "n-max", default_value_t = 3)]
    n_max: u32,
}

fn cmd_growth(cli: &Cli, a: &GrowthArgs) -> Result<ExitCode> {
    let ctx = ring(cli)?;
    if a.n_min > a.n_max {
        return Err(Error::Config("n-min must not exceed n-max".into()));
    }
    let gens = split_exprs(&a.gens)
        .iter()
        .map(|s| parse_element(s, ctx))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    for n in a.n_min..=a.n_max {
        samples.push((n, rank_quotient(&gens, n, cli.budget)?));
    }
    let series = GrowthSeries::new(cli.p, cli.d, samples.clone())?;
    let fit: Option<KappaFit> = if samples.len() >= 3 { Some(fit_kappas(&series)?) } else { None };
    match cli.format {
        Format::Table => {
            for (n, s) in &samples {
                println!("n {n} count {s}");
            }
            if let Some(f) = &fit {
                println!("kappa1 {}", f.kappa1);
                println!("kappa2 {}", f.kappa2);
                for (n, r, scale) in &f.residuals {
                    println!("residual n {n} value {r} scale {scale}");
                }
                println!("stabilized_at {}", f.stabilized_at);
                println!("pseudo_null_consistent {}", f.pseudo_null_consistent);
            }
        }
        Format::Json => {
            println!("{}", serde_json::json!({ "samples": samples, "fit": fit }));
        }
    }
    Ok(ExitCode::from(0))
}
