//! `uniteq`: the command-line front end.
//!
//! Exit codes: 0 completed, 2 completed with caveats (saturated or
//! heuristic solving), 1 error.

mod cache;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use uniteq_core::arith::{factorize_with, FactorConfig, DEFAULT_SEED};
use uniteq_core::cyclofield::{subfields_of_conductor, CyclicField, FieldFile};
use uniteq_core::sieve::{candidate_conductors_with, check_ell, compute_rl, CandidateReport};
use uniteq_core::solver::{
    nagell_cubic_check, solve_unit_equation, sophie_germain_check, NagellRecord, SolutionReport,
    SolveConfig, SolveMode, DEFAULT_BUDGET,
};
use uniteq_core::units::{UnitFile, UnitSystem};

use cache::Cache;

/// `println!` that propagates write errors, so a closed pipe ends the run
/// instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        writeln!(std::io::stdout().lock(), $($arg)*)?
    }};
}

#[derive(Parser, Debug)]
#[command(
    name = "uniteq",
    version,
    about = "Exceptional units in cyclic fields of prime degree"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Emit CSV tables where a command has one.
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    /// Seed for randomized factorization.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads for enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// First working precision in bits for bound reduction.
    #[arg(long, global = true, default_value_t = 512)]
    precision: u32,
    #[arg(
        long,
        global = true,
        env = "UE_CACHE_DIR",
        default_value = "./.ue-cache"
    )]
    cache_dir: PathBuf,
    /// Bypass the cache entirely.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// R_ell = Res(X^(2 ell) - 1, (X - 1)^(2 ell) - 1) and its factorization.
    Rl {
        #[arg(long)]
        ell: u64,
    },
    /// The primes p = 1 mod ell dividing R_ell.
    Sl {
        #[arg(long)]
        ell: u64,
    },
    /// Candidate conductors and discriminants.
    Candidates {
        #[arg(long)]
        ell: u64,
    },
    /// Construct every cyclic field of degree ell with a candidate conductor.
    Fields {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        conductor: Option<u64>,
        /// Directory for field files (default: <cache-dir>/fields).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve lambda + mu = 1 in units of one field.
    Solve {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value = "saturated")]
        mode: SolveMode,
        /// Unit file; its asserted mode decides whether rigorous mode is allowed.
        #[arg(long)]
        units: Option<PathBuf>,
        /// Initial bound override; in heuristic mode the search bound.
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// The whole pipeline for one ell.
    Survey {
        #[arg(long)]
        ell: u64,
        /// Solve the unit equation for ell > 5 as well.
        #[arg(long)]
        deep: bool,
    },
    /// Check that 2 + zeta_p + zeta_p^-1 is exceptional in Q(zeta_p)^+.
    CheckSg {
        #[arg(long)]
        p: u64,
        /// Check every prime from p up to this value.
        #[arg(long)]
        to: Option<u64>,
    },
    /// Nagell's cubics X^3 + k X^2 - (k + 3) X + 1.
    Nagell {
        #[arg(long, allow_hyphen_values = true)]
        k_from: i64,
        #[arg(long, allow_hyphen_values = true)]
        k_to: i64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

struct Ctx<'a> {
    g: &'a Global,
    cache: Cache,
}

impl Ctx<'_> {
    fn factor_config(&self) -> FactorConfig {
        FactorConfig {
            seed: self.g.seed,
            ..FactorConfig::default()
        }
    }

    fn print_json<T: Serialize>(&self, v: &T) -> Result<()> {
        out!("{}", serde_json::to_string_pretty(v)?);
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let cache = if cli.global.no_cache {
        Cache::disabled()
    } else {
        Cache::new(cli.global.cache_dir.clone())
    };
    let ctx = Ctx {
        g: &cli.global,
        cache,
    };
    match &cli.cmd {
        Command::Rl { ell } => cmd_rl(&ctx, *ell),
        Command::Sl { ell } => cmd_sl(&ctx, *ell),
        Command::Candidates { ell } => cmd_candidates(&ctx, *ell),
        Command::Fields {
            ell,
            conductor,
            out,
        } => cmd_fields(&ctx, *ell, *conductor, out.as_deref()),
        Command::Solve {
            field,
            mode,
            units,
            bound,
            budget,
        } => cmd_solve(&ctx, field, *mode, units.as_deref(), *bound, *budget),
        Command::Survey { ell, deep } => cmd_survey(&ctx, *ell, *deep),
        Command::CheckSg { p, to } => cmd_check_sg(&ctx, *p, *to),
        Command::Nagell { k_from, k_to } => cmd_nagell(&ctx, *k_from, *k_to),
    }
}

#[derive(Serialize)]
struct RlReport {
    ell: u64,
    r_ell: String,
    factorization: uniteq_core::arith::Factorization,
}

fn cmd_rl(ctx: &Ctx, ell: u64) -> Result<u8> {
    let r = compute_rl(ell)?;
    let f = factorize_with(&r, ctx.factor_config())?;
    if ctx.g.json {
        ctx.print_json(&RlReport {
            ell,
            r_ell: r.to_string(),
            factorization: f,
        })?;
    } else {
        out!("R_{ell} = {r} = {f}");
    }
    Ok(0)
}

fn candidates(ctx: &Ctx, ell: u64) -> Result<CandidateReport> {
    let rep = candidate_conductors_with(ell, ctx.factor_config())?;
    if !rep.complete {
        bail!("factorization of R_{ell} incomplete: {}", rep.factorization);
    }
    Ok(rep)
}

fn cmd_sl(ctx: &Ctx, ell: u64) -> Result<u8> {
    let rep = candidates(ctx, ell)?;
    if ctx.g.json {
        ctx.print_json(&serde_json::json!({ "ell": ell, "s_ell": rep.s_ell }))?;
    } else {
        let s: Vec<String> = rep.s_ell.iter().map(u64::to_string).collect();
        out!("S_{ell} = {{{}}}", s.join(", "));
    }
    Ok(0)
}

fn cmd_candidates(ctx: &Ctx, ell: u64) -> Result<u8> {
    let rep = candidates(ctx, ell)?;
    if ctx.g.json {
        ctx.print_json(&rep)?;
    } else if ctx.g.csv {
        out!("primes,conductor,discriminant");
        for c in &rep.candidates {
            let t: Vec<String> = c.primes.iter().map(u64::to_string).collect();
            out!("{},{},{}", t.join(" "), c.conductor, c.discriminant);
        }
    } else {
        out!("{:<16} {:>12}  discriminant", "T", "conductor");
        for c in &rep.candidates {
            let t: Vec<String> = c.primes.iter().map(u64::to_string).collect();
            out!(
                "{:<16} {:>12}  {} = {}^{}",
                format!("{{{}}}", t.join(", ")),
                c.conductor,
                c.discriminant,
                c.conductor,
                ell - 1
            );
        }
    }
    Ok(0)
}

/// Fields of degree `ell` and conductor `n`, from the cache when possible.
fn fields_for(ctx: &Ctx, ell: u64, n: u64) -> Result<Vec<CyclicField>> {
    let key = Cache::key("fields", &[ell.to_string(), n.to_string()]);
    let validate = |s: &str| {
        serde_json::from_str::<Vec<FieldFile>>(s)
            .map(|v| v.iter().all(|f| CyclicField::from_file(f).is_ok()))
            .unwrap_or(false)
    };
    let payload = ctx.cache.get_or_compute("fields", &key, validate, || {
        let fs = subfields_of_conductor(ell, n)?;
        let files: Vec<FieldFile> = fs.iter().map(CyclicField::to_file).collect();
        Ok(serde_json::to_string_pretty(&files)?)
    })?;
    let files: Vec<FieldFile> = serde_json::from_str(&payload)?;
    files
        .iter()
        .map(|f| CyclicField::from_file(f).map_err(Into::into))
        .collect()
}

fn field_file_name(f: &CyclicField, i: usize) -> String {
    format!("F{}_{}.json", f.conductor(), i + 1)
}

#[derive(Serialize)]
struct FieldRow {
    label: String,
    conductor: u64,
    minpoly: Vec<String>,
    discriminant: String,
    index: String,
    hash: String,
    file: String,
}

fn field_row(f: &CyclicField, file: &Path) -> FieldRow {
    FieldRow {
        label: f.label(),
        conductor: f.conductor(),
        minpoly: f.minpoly().coeffs().iter().map(|c| c.to_string()).collect(),
        discriminant: f.discriminant().to_string(),
        index: f.index().to_string(),
        hash: f.hash().to_string(),
        file: file.display().to_string(),
    }
}

fn poly_string(f: &CyclicField) -> String {
    let cs = f.minpoly().coeffs();
    let mut parts = Vec::new();
    for (i, c) in cs.iter().enumerate().rev() {
        if c == &BigInt::from(0) {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{i}"),
        };
        let one = c == &BigInt::from(1) || c == &BigInt::from(-1);
        let coef = if one && i > 0 {
            if c < &BigInt::from(0) {
                "-".into()
            } else {
                String::new()
            }
        } else {
            c.to_string()
        };
        parts.push(format!("{coef}{mono}"));
    }
    parts.join(" + ").replace("+ -", "- ")
}

/// Build (or load) all fields for `ell`, write field files, return them.
fn build_fields(
    ctx: &Ctx,
    ell: u64,
    only: Option<u64>,
    out: Option<&Path>,
) -> Result<Vec<(CyclicField, PathBuf)>> {
    let rep = candidates(ctx, ell)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ctx.g.cache_dir.join("fields"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut all = Vec::new();
    for c in &rep.candidates {
        if only.is_some_and(|n| n != c.conductor) {
            continue;
        }
        for (i, f) in fields_for(ctx, ell, c.conductor)?.into_iter().enumerate() {
            let path = dir.join(field_file_name(&f, i));
            cache::write_atomic(&dir, &path, &f.to_json())?;
            all.push((f, path));
        }
    }
    if let Some(n) = only {
        if all.is_empty() && !rep.candidates.iter().any(|c| c.conductor == n) {
            bail!("{n} is not a candidate conductor for ell = {ell}");
        }
    }
    Ok(all)
}

fn cmd_fields(ctx: &Ctx, ell: u64, conductor: Option<u64>, out: Option<&Path>) -> Result<u8> {
    let fields = build_fields(ctx, ell, conductor, out)?;
    let rows: Vec<FieldRow> = fields.iter().map(|(f, p)| field_row(f, p)).collect();
    if ctx.g.json {
        ctx.print_json(&rows)?;
    } else if ctx.g.csv {
        out!("label,conductor,discriminant,index,hash,file");
        for r in &rows {
            out!(
                "{},{},{},{},{},{}",
                r.label,
                r.conductor,
                r.discriminant,
                r.index,
                r.hash,
                r.file
            );
        }
    } else {
        out!("{} fields", rows.len());
        for ((f, _), r) in fields.iter().zip(&rows) {
            out!(
                "{:<14} N = {:<8} disc = {:<14} {}  -> {}",
                r.label,
                r.conductor,
                r.discriminant,
                poly_string(f),
                r.file
            );
        }
    }
    Ok(0)
}

fn load_field(path: &Path) -> Result<CyclicField> {
    let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CyclicField::from_json(&s).with_context(|| format!("loading field {}", path.display()))
}

fn solve_cached(
    ctx: &Ctx,
    f: &CyclicField,
    cfg: &SolveConfig,
    units_key: &str,
) -> Result<SolutionReport> {
    let key = Cache::key(
        "solve",
        &[
            f.hash().to_string(),
            format!("{:?}", cfg.mode),
            format!("{:?}", cfg.initial_bound_override),
            cfg.budget.to_string(),
            format!("{:?}", cfg.precision_schedule),
            units_key.to_string(),
        ],
    );
    let hash = f.hash().to_string();
    let validate = |s: &str| {
        SolutionReport::from_json(s)
            .map(|r| r.field_hash == hash)
            .unwrap_or(false)
    };
    let payload = ctx.cache.get_or_compute("solve", &key, validate, || {
        Ok(solve_unit_equation(f, cfg)?.to_json())
    })?;
    Ok(SolutionReport::from_json(&payload)?)
}

fn precision_schedule(first: u32) -> Vec<u32> {
    let mut s = vec![first.max(128)];
    while *s.last().expect("nonempty") < 8192 {
        let next = s.last().expect("nonempty") * 2;
        s.push(next);
    }
    s
}

fn cmd_solve(
    ctx: &Ctx,
    field: &Path,
    mode: SolveMode,
    units: Option<&Path>,
    bound: Option<u64>,
    budget: u64,
) -> Result<u8> {
    let f = load_field(field)?;
    let mut cfg = SolveConfig::with_mode(mode);
    cfg.budget = budget;
    cfg.initial_bound_override = bound.map(BigInt::from);
    cfg.precision_schedule = precision_schedule(ctx.g.precision);
    let mut units_key = String::from("saturated-cyclotomic");
    if let Some(p) = units {
        let s = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let file: UnitFile = serde_json::from_str(&s)?;
        cfg.units = Some(UnitSystem::from_file(&f, &file)?);
        units_key = s;
    }
    let rep = solve_cached(ctx, &f, &cfg, &units_key)?;
    if ctx.g.json {
        out!("{}", rep.to_json());
    } else if ctx.g.csv {
        print!("{}", rep.to_csv());
    } else {
        print_report(&rep)?;
    }
    Ok(rep.exit_code() as u8)
}

fn print_report(rep: &SolutionReport) -> Result<()> {
    out!(
        "{} (conductor {}): {} solutions in {} orbits [{}]",
        rep.field_label,
        rep.conductor,
        rep.count,
        rep.orbits.len(),
        serde_json::to_value(rep.mode)
            .expect("mode")
            .as_str()
            .unwrap_or("")
    );
    out!(
        "  bounds: initial {}, reduced {:?}, final {}",
        rep.bounds.initial.as_deref().unwrap_or("-"),
        rep.bounds.reduced_sequence,
        rep.bounds.final_bound
    );
    out!(
        "  checks: closed {}, free action {}, residues {}, within Evertse cap {}",
        rep.checks.closed_under_symmetry,
        rep.checks.free_action,
        rep.checks.residue_check,
        rep.checks.within_evertse_cap
    );
    if let Some(c) = &rep.caveat {
        out!("  caveat: {c}");
    }
    Ok(())
}

#[derive(Serialize)]
struct SurveyReport {
    ell: u64,
    candidates: CandidateReport,
    fields: Vec<FieldRow>,
    solved: bool,
    reports: Vec<SolutionReport>,
    exceptional: Vec<String>,
    verdict: String,
}

fn cmd_survey(ctx: &Ctx, ell: u64, deep: bool) -> Result<u8> {
    check_ell(ell)?;
    let cands = candidates(ctx, ell)?;
    let fields = build_fields(ctx, ell, None, None)?;
    let solve = ell == 5 || deep;
    let mut reports = Vec::new();
    if solve {
        let mut cfg = SolveConfig::default();
        cfg.precision_schedule = precision_schedule(ctx.g.precision);
        for (f, _) in &fields {
            reports.push(solve_cached(ctx, f, &cfg, "saturated-cyclotomic")?);
        }
    }
    let exceptional: Vec<String> = reports
        .iter()
        .filter(|r| r.count > 0)
        .map(|r| format!("{} (conductor {})", r.field_label, r.conductor))
        .collect();
    let verdict = if !solve {
        format!(
            "{} candidate fields constructed; unit equations not solved (pass --deep)",
            fields.len()
        )
    } else {
        match exceptional.len() {
            0 => format!("no exceptional cyclic fields of degree {ell}"),
            1 => format!(
                "exactly one exceptional cyclic field of degree {ell}: {}",
                exceptional[0]
            ),
            k => format!(
                "{k} exceptional cyclic fields of degree {ell}: {}",
                exceptional.join(", ")
            ),
        }
    };
    let code = reports.iter().map(|r| r.exit_code()).max().unwrap_or(0) as u8;
    let rows: Vec<FieldRow> = fields.iter().map(|(f, p)| field_row(f, p)).collect();
    if ctx.g.json {
        ctx.print_json(&SurveyReport {
            ell,
            candidates: cands,
            fields: rows,
            solved: solve,
            reports,
            exceptional,
            verdict,
        })?;
    } else if ctx.g.csv {
        out!("{}", SolutionReport::CSV_HEADER);
        for r in &reports {
            out!("{}", r.csv_row());
        }
    } else {
        let s: Vec<String> = cands.s_ell.iter().map(u64::to_string).collect();
        out!("R_{ell} = {} = {}", cands.r_ell, cands.factorization);
        out!("S_{ell} = {{{}}}", s.join(", "));
        out!(
            "conductors: {}",
            cands
                .candidates
                .iter()
                .map(|c| c.conductor.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        out!("{} fields", fields.len());
        for r in &reports {
            print_report(r)?;
        }
        out!("verdict: {verdict}");
    }
    Ok(code)
}

fn cmd_check_sg(ctx: &Ctx, p: u64, to: Option<u64>) -> Result<u8> {
    let hi = to.unwrap_or(p);
    let ps: Vec<u64> = if to.is_some() {
        (p..=hi)
            .filter(|&q| q >= 5 && uniteq_core::arith::is_prime_u64(q))
            .collect()
    } else {
        vec![p]
    };
    let mut rows = Vec::new();
    for q in ps {
        let ok = sophie_germain_check(q).map_err(|e| anyhow!("p = {q}: {e}"))?;
        rows.push(serde_json::json!({ "p": q, "exceptional": ok }));
        if !ctx.g.json {
            if ctx.g.csv {
                out!("{q},{ok}");
            } else {
                out!("p = {q}: 2 + zeta + zeta^-1 exceptional: {ok}");
            }
        }
    }
    if ctx.g.json {
        ctx.print_json(&rows)?;
    }
    Ok(0)
}

fn cmd_nagell(ctx: &Ctx, from: i64, to: i64) -> Result<u8> {
    if from > to {
        bail!("empty range {from}..{to}");
    }
    let rows: Vec<NagellRecord> = (from..=to)
        .map(nagell_cubic_check)
        .collect::<Result<_, _>>()?;
    if ctx.g.json {
        ctx.print_json(&rows)?;
    } else {
        out!("k,exceptional,disc,disc_formula");
        for r in &rows {
            let k = BigInt::from(r.k);
            let base: BigInt = &k * &k + 3 * &k + 9;
            let formula = &base * &base;
            out!("{},{},{},{}", r.k, r.exceptional, r.disc, r.disc == formula);
        }
    }
    Ok(0)
}
