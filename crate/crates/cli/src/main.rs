//! `lawson`: command-line front end for the area, MZV, Ω-value and convergence-bound engines.

mod golden;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lawson_core::area::{self, TailConfig};
use lawson_core::genus2::{self, OptimizeOptions, TriangulationParams};
use lawson_core::ift::{IftOptions, IftParams, IftSetup, DEFAULT_KAPPA};
use lawson_core::mpl::{alternating_mzv, global_cache, MzvIndex};
use lawson_core::mzv_symbolic::{closed_form, omega_closed_form};
use lawson_core::omega::{Endpoint, OmegaEngine, Phi};
use lawson_core::series::{fmt_radius, Mode, ParamSeries, Value};
use lawson_core::{CertifiedComplex, Ctx, Error};
use serde_json::{json, Value as Json};

const SCHEMA: &str = "1";
const CACHE_ENV: &str = "LAWSON_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "lawson", version, about = "Certified expansions for Lawson surfaces ξ_{1,g}")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Working precision in decimal digits (20..=280).
    #[arg(long, global = true, default_value_t = 60, value_parser = clap::value_parser!(u32).range(20..=280))]
    digits: u32,
    /// Turn off radius tracking (faster, no guarantees).
    #[arg(long, global = true)]
    uncertified: bool,
    /// Output format; defaults to csv for area-table and json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Directory of the persistent MZV cache. Overrides $LAWSON_CACHE_DIR.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Worker threads for independent optimizer starts.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Area coefficients α_k (Area = 8π(1 − Σ α_k s^k), s = 1/(2g+2)).
    ///
    /// CSV columns: k,re,im,radius.
    Alpha {
        #[arg(long, default_value_t = 11)]
        order: usize,
        #[arg(long, default_value = "pi/4")]
        phi: String,
        /// Also report W_k, H_k, K_k, θ_k and the x-coefficients.
        #[arg(long)]
        full: bool,
    },
    /// Iterated integral Ω_w(z) of the forms ω₁, ω₂, ω₃ at z = 1 or z = i.
    Omega {
        /// Comma-separated letters in {1,2,3}, e.g. 2,2,3.
        #[arg(long)]
        word: String,
        #[arg(long, default_value = "pi/4")]
        phi: String,
        #[arg(long, default_value = "1")]
        endpoint: String,
    },
    /// Alternating multiple zeta value; negative entries (or a trailing b) are barred.
    Mzv {
        /// Comma-separated index, e.g. -1,2 or 1b,2.
        #[arg(long, allow_hyphen_values = true)]
        index: String,
    },
    /// Area table with Cauchy tail bounds.
    ///
    /// CSV columns: genus,approx,error_bound,K. The error column is empty unless
    /// --ca/--tprime or --ift are given.
    AreaTable {
        #[arg(long, default_value_t = 3)]
        gmin: u32,
        #[arg(long, default_value_t = 10)]
        gmax: u32,
        /// Truncation order K; orders above --computed-order use the tabulated values.
        #[arg(long, default_value_t = 21)]
        order: usize,
        /// Highest order computed from the series.
        #[arg(long, default_value_t = 11)]
        computed_order: usize,
        /// Significant digits of the approx column.
        #[arg(long, default_value_t = 10)]
        sig: usize,
        #[arg(long, requires = "tprime")]
        ca: Option<f64>,
        #[arg(long, requires = "ca")]
        tprime: Option<f64>,
        /// Number N of exactly known orders behind the tail constants.
        #[arg(long, default_value_t = 7)]
        derivs: usize,
        /// Take (C_A, T') from a verified parameter file of ift-genus.
        #[arg(long, value_name = "FILE", conflicts_with_all = ["ca", "tprime"])]
        ift: Option<PathBuf>,
    },
    /// Triangulated upper bound for the area of the genus-2 Lawson surface.
    Genus2Bound {
        #[arg(long, value_enum, default_value_t = Seed::Center)]
        seed: Seed,
        /// Evaluate at the seed only.
        #[arg(long)]
        no_optimize: bool,
    },
    /// Genus above which the series of the potential provably converges.
    IftGenus {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        derivs: usize,
        #[arg(long)]
        quadratic: bool,
        #[arg(long, default_value_t = DEFAULT_KAPPA)]
        kappa: f64,
        #[arg(long, conflicts_with = "verify")]
        optimize: bool,
        /// Re-check a parameter set (JSON of ift-genus output or bare parameters).
        #[arg(long, value_name = "FILE")]
        verify: Option<PathBuf>,
    },
    /// Golden-value regression suite; exit status 2 on any failure.
    Selftest {
        /// Series to order 7 only, no area rows.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Seed {
    Paper,
    Center,
}

enum Failure {
    Args(String),
    Compute(Error),
    Golden(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

type Out = Result<(Json, Option<String>), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Args(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Golden(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
    }
}

fn args_err(e: impl std::fmt::Display) -> Failure {
    Failure::Args(e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let rc = &cli.run;
    let cache = rc.cache_dir.clone().or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    if let Some(dir) = &cache {
        global_cache().attach(dir)?;
    }
    let mut ctx = Ctx::new(rc.digits)?;
    if rc.uncertified {
        ctx = ctx.uncertified();
    }
    let format = rc.format.unwrap_or(if matches!(cli.cmd, Command::AreaTable { .. }) { Format::Csv } else { Format::Json });

    let mut golden_failures = None;
    let (body, csv) = match &cli.cmd {
        Command::Alpha { order, phi, full } => alpha(&ctx, *order, phi, *full)?,
        Command::Omega { word, phi, endpoint } => omega(&ctx, word, phi, endpoint)?,
        Command::Mzv { index } => mzv(&ctx, index)?,
        Command::AreaTable { gmin, gmax, order, computed_order, sig, ca, tprime, derivs, ift } => {
            let tail = match (ca, tprime, ift) {
                (Some(c), Some(t), _) => Some(TailConfig::new(*c, *t, *derivs).map_err(args_err)?),
                (_, _, Some(path)) => Some(tail_from_ift(path)?),
                _ => None,
            };
            area_table(&ctx, *gmin, *gmax, *order, *computed_order, *sig, tail)?
        }
        Command::Genus2Bound { seed, no_optimize } => genus2_bound(*seed, *no_optimize)?,
        Command::IftGenus { n, derivs, quadratic, kappa, optimize, verify } => {
            ift_genus(*n, *derivs, *quadratic, *kappa, *optimize, verify.as_ref(), rc.jobs)?
        }
        Command::Selftest { quick } => {
            let checks = golden::run(&ctx, *quick);
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                golden_failures = Some(format!("selftest: {failed} of {} checks failed", checks.len()));
            }
            let lines: String = checks
                .iter()
                .map(|c| format!("{} {} ({})\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail))
                .collect();
            let body = json!({"checks": checks, "passed": checks.len() - failed, "failed": failed});
            if rc.format.is_none() {
                emit(rc, &lines)?;
                return golden_failures.map_or(Ok(()), |m| Err(Failure::Golden(m)));
            }
            (body, None)
        }
    };

    let text = match format {
        Format::Json => {
            let mut obj = json!({"schema": SCHEMA});
            if let (Json::Object(o), Json::Object(b)) = (&mut obj, body) {
                o.extend(b);
            }
            serde_json::to_string_pretty(&obj).expect("json") + "\n"
        }
        Format::Csv => csv.ok_or_else(|| Failure::Args("csv output is available for alpha and area-table only".into()))?,
        Format::Text => {
            let mut s = format!("schema = {SCHEMA}\n");
            flatten("", &body, &mut s);
            s
        }
    };
    emit(rc, &text)?;
    golden_failures.map_or(Ok(()), |m| Err(Failure::Golden(m)))
}

fn emit(rc: &RunConfig, text: &str) -> Result<(), Failure> {
    match &rc.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Compute(e.into())),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes()).map_err(|e| Failure::Compute(e.into()))
        }
    }
}

/// `path = value` lines.
fn flatten(prefix: &str, v: &Json, out: &mut String) {
    match v {
        Json::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, out);
            }
        }
        Json::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Json::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
        other => out.push_str(&format!("{prefix} = {other}\n")),
    }
}

fn disc(c: &CertifiedComplex, digits: usize) -> Json {
    serde_json::to_value(Value::of(c, digits)).expect("json")
}

fn out_digits(ctx: &Ctx) -> usize {
    ctx.digits() as usize
}

fn parse_word(s: &str) -> Result<Vec<u8>, Failure> {
    s.split(',')
        .map(|p| match p.trim().parse::<u8>() {
            Ok(l @ 1..=3) => Ok(l),
            _ => Err(Failure::Args(format!("word letters must be 1, 2 or 3, got {p:?}"))),
        })
        .collect()
}

fn alpha(ctx: &Ctx, order: usize, phi: &str, full: bool) -> Out {
    let phi = Phi::parse(ctx, phi).map_err(args_err)?;
    let mode = if phi.is_quarter() { Mode::Minimal } else { Mode::General };
    let series = ParamSeries::compute(ctx, &phi, mode, order)?;
    let d = out_digits(ctx);
    if full {
        let rep = series.report(order, d)?;
        return Ok((serde_json::to_value(rep).expect("json"), None));
    }
    let a = series.area_coefficients(order)?;
    let mut csv = String::from("k,re,im,radius\n");
    let mut rows = Vec::new();
    for (k, c) in a.c.iter().enumerate().skip(1) {
        let v = Value::of(c, d);
        csv.push_str(&format!("{k},{},{},{}\n", v.re, v.im, v.radius));
        rows.push(json!({"k": k, "re": v.re, "im": v.im, "radius": v.radius}));
    }
    let body = json!({
        "phi": phi.label(),
        "mode": mode,
        "order": order,
        "digits": ctx.digits(),
        "certified": ctx.certified(),
        "alpha": rows,
    });
    Ok((body, Some(csv)))
}

fn omega(ctx: &Ctx, word: &str, phi: &str, endpoint: &str) -> Out {
    let w = parse_word(word)?;
    let phi = Phi::parse(ctx, phi).map_err(args_err)?;
    let ep: Endpoint = endpoint.parse().map_err(args_err)?;
    let v = OmegaEngine::shared(ctx, &phi).eval(&w, ep)?;
    let mut body = json!({
        "word": w,
        "phi": phi.label(),
        "endpoint": ep,
        "digits": ctx.digits(),
        "value": disc(&v, out_digits(ctx)),
    });
    if phi.is_quarter() && ep == Endpoint::One {
        if let Ok(cf) = omega_closed_form(&w) {
            body["closed_form"] = json!(cf.to_string());
        }
    }
    Ok((body, None))
}

fn mzv(ctx: &Ctx, index: &str) -> Out {
    let idx: MzvIndex = index.parse().map_err(args_err)?;
    let v = alternating_mzv(&idx, ctx)?;
    let mut body = json!({
        "index": idx.to_string(),
        "weight": idx.weight(),
        "depth": idx.depth(),
        "digits": ctx.digits(),
        "value": disc(&v, out_digits(ctx)),
    });
    if let Ok(cf) = closed_form(&idx) {
        body["closed_form"] = json!(cf.to_string());
    }
    Ok((body, None))
}

fn area_table(ctx: &Ctx, gmin: u32, gmax: u32, order: usize, computed: usize, sig: usize, tail: Option<TailConfig>) -> Out {
    if gmin < 1 || gmin > gmax {
        return Err(Failure::Args(format!("bad genus range {gmin}..{gmax}")));
    }
    let computed = computed.min(order);
    let series = ParamSeries::compute(ctx, &Phi::quarter(ctx), Mode::Minimal, computed)?;
    let alphas = area::extend_with_published(ctx, &series.area_coefficients(computed)?, order)?;
    let rows = area::area_table(ctx, &alphas, gmin, gmax, tail.as_ref())?;
    let csv = area::to_csv(&rows, sig);
    let json_rows: Vec<Json> = rows
        .iter()
        .map(|r| {
            json!({
                "genus": r.genus,
                "approx": area::fixed(&r.approx, sig),
                "radius": fmt_radius(r.approx.radius()),
                "error_bound": r.error_bound.map(|e| format!("{e:.7e}")),
                "K": r.k_used,
            })
        })
        .collect();
    let mut body = json!({"order": order, "computed_order": computed, "rows": json_rows});
    if let Some(t) = &tail {
        body["tail"] = serde_json::to_value(t).expect("json");
        if t.t_prime > 0.05 {
            if let Ok(m) = area::monotonicity_certificate(&alphas, t, 0.05) {
                body["monotonicity"] = serde_json::to_value(m).expect("json");
            }
        }
    }
    Ok((body, Some(csv)))
}

fn read_params(path: &PathBuf) -> Result<IftParams, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Args(format!("{}: {e}", path.display())))?;
    let v: Json = serde_json::from_str(&text).map_err(|e| Failure::Args(format!("{}: {e}", path.display())))?;
    let inner = v.get("params").cloned().unwrap_or(v);
    serde_json::from_value(inner).map_err(|e| Failure::Args(format!("{}: {e}", path.display())))
}

fn tail_from_ift(path: &PathBuf) -> Result<TailConfig, Failure> {
    let p = read_params(path)?;
    p.validate().map_err(args_err)?;
    let setup = IftSetup::shared(p.n, p.derivs, p.quadratic)?;
    let c = setup.genus_bound(&p)?;
    if !c.feasible {
        return Err(Failure::Compute(Error::NoFeasiblePoint));
    }
    Ok(setup.cauchy_config(&p, &c)?)
}

fn ift_genus(n: usize, derivs: usize, quadratic: bool, kappa: f64, optimize: bool, verify: Option<&PathBuf>, jobs: usize) -> Out {
    let (params, constants, setup) = match (optimize, verify) {
        (_, Some(path)) => {
            let p = read_params(path)?;
            p.validate().map_err(args_err)?;
            let setup = IftSetup::shared(p.n, p.derivs, p.quadratic)?;
            let c = setup.genus_bound(&p)?;
            (p, c, setup)
        }
        (true, None) => {
            if !(kappa > 0.0 && kappa < 1.0) {
                return Err(Failure::Args(format!("κ must lie in (0, 1), got {kappa}")));
            }
            let setup = IftSetup::shared(n, derivs, quadratic).map_err(args_err)?;
            let opts = IftOptions { kappa, jobs, ..IftOptions::default() };
            let (p, c) = setup.optimize_genus(&opts)?;
            (p, c, setup)
        }
        (false, None) => return Err(Failure::Args("ift-genus needs --optimize or --verify FILE".into())),
    };
    let mut body = json!({
        "params": params,
        "constants": constants,
    });
    if constants.feasible {
        body["tail"] = serde_json::to_value(setup.cauchy_config(&params, &constants)?).expect("json");
    }
    Ok((body, None))
}

fn genus2_bound(seed: Seed, no_optimize: bool) -> Out {
    let start = match seed {
        Seed::Paper => TriangulationParams::PUBLISHED,
        Seed::Center => TriangulationParams::center(),
    };
    let at_seed = genus2::bound_certified(&start, 30)?;
    let mut body = json!({
        "seed": format!("{seed:?}").to_lowercase(),
        "seed_params": start,
        "seed_bound": lawson_core::real::Real::hi(&at_seed),
    });
    if !no_optimize {
        let r = genus2::optimize_bound(&start, &OptimizeOptions::default())?;
        body["optimized"] = serde_json::to_value(r).expect("json");
    }
    Ok((body, None))
}
