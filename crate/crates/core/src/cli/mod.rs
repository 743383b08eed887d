//! The `ttdesign` command line.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage error or
//! unreadable input. Results go to stdout, progress to stderr.

mod config;

pub use config::{CliConfig, CONFIG_ENV};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{
    angle_profile, m_product_fingerprint, match_to_family_detailed, norm_profile, per_vector_angle_incidence,
    DEFAULT_CLUSTER_TOLERANCE, DEFAULT_QUANTUM,
};
use crate::constructions::{
    equally_spaced_lines, kempner_24pt, kempner_24pt_weighted, mercedes_benz, new_11pt_d5, reznick_11pt,
    stroud_design, three_mubs_r4, twelve_point_design, z3_orbit, MercedesAngles, StroudSign, Z3_SEED_COUNT,
};
use crate::design::io::{self as design_io, DesignDocument};
use crate::design::{Configuration, DesignProblem, NormMode};
use crate::error::{DesignError, Result};
use crate::manifold::multi_start;
use crate::scan::{self, detect_jump, detect_special, first_zero, ScanOptions};
use crate::verify::{is_design, run_oracles, Oracle, OracleThresholds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ttdesign", version, about = "Projective spherical (t,t)-designs: construct, search, verify, analyze")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key = value defaults file (else $TTDESIGN_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// No progress messages.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a closed-form design.
    Construct(ConstructArgs),
    /// Multi-start minimization for one (t, d, n).
    Solve(SolveArgs),
    /// Best potential over a range of n.
    Scan(ScanArgs),
    /// Check a design file with one or more oracles.
    Verify(VerifyArgs),
    /// Angle, norm and m-product structure of a design file.
    Analyze(AnalyzeArgs),
    /// Compare the m-product fingerprints of two design files.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ConstructName {
    EquallySpacedLines,
    MercedesBenz,
    TwelvePoint,
    ThreeMubs,
    #[value(name = "reznick_11pt", alias = "reznick-11pt")]
    Reznick11pt,
    #[value(name = "new_11pt_d5", alias = "new-11pt-d5")]
    New11ptD5,
    Stroud,
    #[value(name = "kempner_24pt", alias = "kempner-24pt")]
    Kempner24pt,
    #[value(name = "kempner_24pt_weighted", alias = "kempner-24pt-weighted")]
    Kempner24ptWeighted,
    #[value(name = "z3_orbit", alias = "z3-orbit")]
    Z3Orbit,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(value_enum)]
    name: ConstructName,
    /// Strength for equally_spaced_lines.
    #[arg(long)]
    t: Option<usize>,
    /// Dimension for stroud (4, 5 or 6).
    #[arg(long)]
    d: Option<usize>,
    /// Sign branch for stroud: plus or minus.
    #[arg(long, default_value = "plus")]
    sign: String,
    /// Frame angles for twelve_point: four comma-separated radians.
    #[arg(long, value_delimiter = ',')]
    angles: Option<Vec<f64>>,
    /// Rotation for mercedes_benz, in radians.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Seeds for z3_orbit: 24 comma-separated numbers (b, y, z per seed).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<f64>>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    t: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "equal_norm")]
    mode: NormMode,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    t: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "equal_norm")]
    mode: NormMode,
    #[arg(long)]
    n_from: usize,
    #[arg(long)]
    n_to: usize,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Locate the jump by bisection instead of sweeping every n.
    #[arg(long)]
    bisect: bool,
    /// Never double the restarts in the ambiguous band.
    #[arg(long)]
    no_escalate: bool,
    /// Reuse the records of an earlier scan CSV.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleChoice {
    Potential,
    Cubature,
    Bessel,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    file: PathBuf,
    /// Strength; defaults to the file's `t`.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "potential")]
    oracle: Vec<OracleChoice>,
    /// Potential threshold relative to n^2.
    #[arg(long)]
    zero_tolerance: Option<f64>,
    #[arg(long, default_value_t = crate::verify::ORACLE_TOLERANCE)]
    residual_tolerance: f64,
    #[arg(long, default_value_t = 0)]
    probe_seed: u64,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long)]
    angles: bool,
    #[arg(long)]
    norms: bool,
    /// m-product fingerprint with m = 2 or 3.
    #[arg(long)]
    fingerprint: Option<usize>,
    /// Per-vector count of partners at this squared angle.
    #[arg(long)]
    incidence: Option<f64>,
    /// Recognize a 12-point (2,2)-design for R^4 as a member of the frame family.
    #[arg(long)]
    match_family: bool,
    #[arg(long, default_value_t = DEFAULT_CLUSTER_TOLERANCE)]
    cluster_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_QUANTUM)]
    quantum: f64,
}

#[derive(Args, Debug)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, default_value_t = 2)]
    fingerprint: usize,
    #[arg(long, default_value_t = DEFAULT_QUANTUM)]
    quantum: f64,
}

struct Ctx {
    json: bool,
    quiet: bool,
    config: CliConfig,
}

impl Ctx {
    fn progress(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn emit(&self, value: Value, text: impl FnOnce() -> String) {
        let body = if self.json {
            serde_json::to_string_pretty(&value).expect("serializable")
        } else {
            text()
        };
        // a closed pipe on stdout is not an error worth reporting
        let _ = writeln!(std::io::stdout().lock(), "{body}");
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let config = CliConfig::resolve(cli.config.as_deref())?;
    let threads = cli.threads.or(config.threads);
    if threads == Some(0) {
        return Err(DesignError::InvalidParameter("threads must be >= 1".into()));
    }
    let ctx = Ctx {
        json: cli.json,
        quiet: cli.quiet,
        config,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| DesignError::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Construct(a) => construct(&ctx, a),
        Command::Solve(a) => solve(&ctx, a),
        Command::Scan(a) => scan_cmd(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Analyze(a) => analyze(&ctx, a),
        Command::Compare(a) => compare(&ctx, a),
    })
}

fn build(a: &ConstructArgs) -> Result<(Configuration, usize)> {
    let missing = |flag: &str| DesignError::InvalidParameter(format!("{flag} is required for this construction"));
    Ok(match a.name {
        ConstructName::EquallySpacedLines => {
            let t = a.t.ok_or_else(|| missing("--t"))?;
            (equally_spaced_lines(t)?, t)
        }
        ConstructName::MercedesBenz => (Configuration::new(mercedes_benz(a.theta), NormMode::EqualNorm)?, 2),
        ConstructName::TwelvePoint => {
            let th = a.angles.clone().unwrap_or_else(|| vec![0.0; 4]);
            let th: [f64; 4] = th
                .try_into()
                .map_err(|_| DesignError::InvalidParameter("--angles takes four values".into()))?;
            (twelve_point_design(&MercedesAngles::new(th)), 2)
        }
        ConstructName::ThreeMubs => (three_mubs_r4(), 2),
        ConstructName::Reznick11pt => (reznick_11pt(), 3),
        ConstructName::New11ptD5 => (new_11pt_d5(), 3),
        ConstructName::Stroud => {
            let d = a.d.ok_or_else(|| missing("--d"))?;
            let sign: StroudSign = a.sign.parse()?;
            (stroud_design(d, sign)?, 2)
        }
        ConstructName::Kempner24pt => (kempner_24pt(), 3),
        ConstructName::Kempner24ptWeighted => (kempner_24pt_weighted(), 3),
        ConstructName::Z3Orbit => {
            let raw = a.seeds.as_ref().ok_or_else(|| missing("--seeds"))?;
            if raw.len() != 3 * Z3_SEED_COUNT {
                return Err(DesignError::InvalidParameter(format!(
                    "--seeds takes {} numbers, got {}",
                    3 * Z3_SEED_COUNT,
                    raw.len()
                )));
            }
            let seeds: Vec<[f64; 3]> = raw.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            (z3_orbit(&seeds)?, 4)
        }
    })
}

fn construct(ctx: &Ctx, a: ConstructArgs) -> Result<i32> {
    let (config, t) = build(&a)?;
    let name = a.name.to_possible_value().expect("named").get_name().to_string();
    let doc = DesignDocument::new(config).with_t(t).with_meta(json!({ "construction": name }));
    match &a.out {
        Some(out) => {
            let path = ctx.config.output_path(out);
            design_io::save(&doc, &path)?;
            let (d, n) = (doc.config.d(), doc.config.n());
            ctx.emit(
                json!({ "construction": name, "t": t, "d": d, "n": n, "out": path }),
                || format!("{name}: t={t} d={d} n={n} -> {}", path.display()),
            );
        }
        None => {
            let _ = writeln!(std::io::stdout().lock(), "{}", design_io::to_json(&doc)?);
        }
    }
    Ok(EXIT_OK)
}

fn solver_options(ctx: &Ctx, seed: Option<u64>, max_iterations: Option<usize>) -> Result<crate::manifold::SolverOptions> {
    let mut o = ctx.config.solver.clone();
    o.seed = seed.unwrap_or(ctx.config.seed);
    if let Some(m) = max_iterations {
        o.max_iterations = m;
    }
    o.validate()?;
    Ok(o)
}

fn solve(ctx: &Ctx, a: SolveArgs) -> Result<i32> {
    let problem = DesignProblem::new(a.t, a.d, a.n, a.mode)?;
    let restarts = a.restarts.unwrap_or(ctx.config.restarts);
    let opts = solver_options(ctx, a.seed, a.max_iterations)?;
    ctx.progress(format!(
        "solving t={} d={} n={} {} with {restarts} restarts from seed {}",
        a.t, a.d, a.n, a.mode, opts.seed
    ));
    let (best, _) = multi_start(&problem, restarts, &opts)?;
    let (zero, f) = is_design(&best.config, a.t, ctx.config.zero_tolerance)?;
    if let Some(out) = &a.out {
        let path = ctx.config.output_path(out);
        design_io::save(&best.to_document(a.t), &path)?;
        ctx.progress(format!("wrote {}", path.display()));
    }
    ctx.emit(
        json!({
            "t": a.t, "d": a.d, "n": a.n, "mode": a.mode,
            "f_value": f, "is_design": zero, "seed": best.seed,
            "iterations": best.iterations, "converged": best.converged,
        }),
        || {
            format!(
                "f = {f:.6e} ({}), best seed {}, {} iterations, {:?}",
                if zero { "design" } else { "not a design" },
                best.seed,
                best.iterations,
                best.converged
            )
        },
    );
    Ok(if zero { EXIT_OK } else { EXIT_FAIL })
}

fn scan_cmd(ctx: &Ctx, a: ScanArgs) -> Result<i32> {
    let opts = ScanOptions {
        restarts: a.restarts.unwrap_or(ctx.config.restarts),
        seed: a.seed.unwrap_or(ctx.config.seed),
        zero_tolerance: ctx.config.zero_tolerance,
        escalate: !a.no_escalate,
        bisect: a.bisect,
        solver: solver_options(ctx, None, a.max_iterations)?,
    };
    let partial = a.resume.as_deref().map(scan::load).transpose()?;
    ctx.progress(format!(
        "scanning t={} d={} {} over n={}..={} with {} restarts{}",
        a.t,
        a.d,
        a.mode,
        a.n_from,
        a.n_to,
        opts.restarts,
        if a.bisect { " (bisection)" } else { "" }
    ));
    let table = scan::scan_n_range_resume(a.t, a.d, a.mode, a.n_from, a.n_to, &opts, partial.as_ref())?;
    for r in &table.records {
        ctx.progress(format!(
            "n={:>4}  best_f={:.6e}  zero={}  restarts={}  {:.2}s",
            r.n, r.best_f, r.is_zero, r.restarts_used, r.wall_seconds
        ));
    }
    let path = ctx.config.output_path(&a.out);
    scan::persist(&table, &path)?;
    let jump = detect_jump(&table, opts.zero_tolerance);
    let first = first_zero(&table, opts.zero_tolerance);
    let special = detect_special(&table, opts.zero_tolerance);
    ctx.emit(
        json!({
            "out": path, "jump": jump, "first_zero": first, "special": special,
            "records": table.records,
        }),
        || {
            format!(
                "jump: {}  first zero: {}  isolated zeros: {:?}  -> {}",
                jump.map_or("none".into(), |n| n.to_string()),
                first.map_or("none".into(), |n| n.to_string()),
                special,
                path.display()
            )
        },
    );
    Ok(EXIT_OK)
}

fn load_doc(path: &Path) -> Result<DesignDocument> {
    design_io::load(path)
}

fn verify(ctx: &Ctx, a: VerifyArgs) -> Result<i32> {
    let doc = load_doc(&a.file)?;
    let t = a
        .t
        .or(doc.t)
        .ok_or_else(|| DesignError::InvalidParameter("--t is required (the file records no t)".into()))?;
    let oracles: Vec<Oracle> = if a.oracle.contains(&OracleChoice::All) {
        Oracle::ALL.to_vec()
    } else {
        let mut v: Vec<Oracle> = a
            .oracle
            .iter()
            .map(|o| match o {
                OracleChoice::Potential => Oracle::Potential,
                OracleChoice::Cubature => Oracle::Cubature,
                _ => Oracle::Bessel,
            })
            .collect();
        v.dedup();
        v
    };
    let thresholds = OracleThresholds {
        potential: a.zero_tolerance.unwrap_or(ctx.config.zero_tolerance),
        cubature: a.residual_tolerance,
        bessel: a.residual_tolerance,
        probe_seed: a.probe_seed,
    };
    let outcomes = run_oracles(&doc.config, t, &oracles, &thresholds)?;
    if outcomes.is_empty() {
        return Err(DesignError::Precondition(
            "no requested oracle applies (cubature needs equal norms)".into(),
        ));
    }
    let skipped: Vec<&str> = oracles
        .iter()
        .filter(|o| !outcomes.iter().any(|x| x.oracle == **o))
        .map(|o| o.as_str())
        .collect();
    let passed = outcomes.iter().all(|o| o.passed);
    ctx.emit(
        json!({ "t": t, "passed": passed, "outcomes": outcomes, "skipped": skipped }),
        || {
            let mut s: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    format!(
                        "{:<9} {:.3e} <= {:.1e}  {}",
                        o.oracle.as_str(),
                        o.value,
                        o.threshold,
                        if o.passed { "pass" } else { "FAIL" }
                    )
                })
                .collect();
            for k in &skipped {
                s.push(format!("{k:<9} skipped (unequal norms)"));
            }
            s.push(format!("t={t}: {}", if passed { "design" } else { "not a design" }));
            s.join("\n")
        },
    );
    Ok(if passed { EXIT_OK } else { EXIT_FAIL })
}

fn analyze(ctx: &Ctx, a: AnalyzeArgs) -> Result<i32> {
    let doc = load_doc(&a.file)?;
    let c = &doc.config;
    let nothing_chosen = !a.angles && !a.norms && a.fingerprint.is_none() && a.incidence.is_none() && !a.match_family;
    let mut out = serde_json::Map::new();
    let mut text = Vec::new();
    let mut code = EXIT_OK;
    if a.angles || nothing_chosen {
        let p = angle_profile(c, a.cluster_tolerance)?;
        text.push("squared angles:".to_string());
        text.extend(p.clusters.iter().map(|k| format!("  {:.12}  x{}", k.value, k.multiplicity)));
        out.insert("angles".into(), serde_json::to_value(&p)?);
    }
    if a.norms || nothing_chosen {
        let p = norm_profile(c, a.cluster_tolerance)?;
        text.push("norms:".to_string());
        text.extend(p.iter().map(|k| format!("  {:.12}  x{}", k.value, k.multiplicity)));
        out.insert("norms".into(), serde_json::to_value(&p)?);
    }
    if let Some(target) = a.incidence {
        let inc = per_vector_angle_incidence(c, target, a.cluster_tolerance)?;
        text.push(format!("partners at squared angle {target}: {inc:?}"));
        out.insert("incidence".into(), json!({ "target": target, "counts": inc }));
    }
    if let Some(m) = a.fingerprint {
        let fp = m_product_fingerprint(c, m, a.quantum)?;
        let values = fp.values();
        text.push(format!("{m}-product fingerprint ({} values):", values.len()));
        let clusters = crate::analysis::cluster_values(&values, a.quantum.max(a.cluster_tolerance))?;
        text.extend(clusters.iter().map(|k| format!("  {:.12}  x{}", k.value, k.multiplicity)));
        out.insert("fingerprint".into(), json!({ "m": m, "quantum": a.quantum, "values": values }));
    }
    if a.match_family {
        match match_to_family_detailed(c) {
            Ok(Some(m)) => {
                text.push(format!(
                    "family member with angles {:?} (residual {:.2e})",
                    m.angles.theta, m.max_residual
                ));
                out.insert(
                    "family".into(),
                    json!({ "angles": m.angles, "frames": m.frames, "max_residual": m.max_residual }),
                );
            }
            Ok(None) => {
                text.push("no family member matches".into());
                out.insert("family".into(), Value::Null);
                code = EXIT_FAIL;
            }
            Err(e @ (DesignError::Precondition(_) | DesignError::DimensionMismatch(_))) => {
                text.push(format!("family match not applicable: {e}"));
                out.insert("family".into(), json!({ "error": e.to_string() }));
                code = EXIT_FAIL;
            }
            Err(e) => return Err(e),
        }
    }
    ctx.emit(Value::Object(out), || text.join("\n"));
    Ok(code)
}

fn compare(ctx: &Ctx, a: CompareArgs) -> Result<i32> {
    let x = load_doc(&a.first)?.config;
    let y = load_doc(&a.second)?.config;
    let fx = m_product_fingerprint(&x, a.fingerprint, a.quantum)?;
    let fy = m_product_fingerprint(&y, a.fingerprint, a.quantum)?;
    let equal = x.d() == y.d() && fx.matches(&fy);
    ctx.emit(json!({ "m": a.fingerprint, "equal": equal }), || {
        format!("{}-product fingerprints {}", a.fingerprint, if equal { "equal" } else { "differ" })
    });
    Ok(if equal { EXIT_OK } else { EXIT_FAIL })
}
