//! `relucalc`: build constructions to network files, verify the catalogue
//! of claims, and analyze stored networks.
//!
//! Exit codes: 0 when everything passes, 1 when a verification fails, 2 on
//! usage errors (bad arguments, unknown names, unreadable files).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relucalc::analysis::{count_breakpoints_in, eval_sorted1, exact_cpwl_1d, region_census};
use relucalc::claims::{find, registry, run_claims, Claim, ClaimError, ClaimOptions};
use relucalc::constructions_1d::{bit_extract_net, hat01, sawtooth, yarotsky_approx, BitExtractPlan, Cpwl1D};
use relucalc::constructions_product::{bspline_net, kproduct_net, product_net, square_net};
use relucalc::net_core::{load, q, q_to_f64, qi, save, BoxDomain, ReluNet, StoredNet, Q};
use rand::SeedableRng;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "relucalc", version, about = "Build, verify and analyze exact ReLU network constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a construction and write it, with a manifest, to a net file.
    Build(BuildArgs),
    /// Run claims against their contracts and report.
    Verify(VerifyArgs),
    /// Analyze a stored network.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// sawtooth, hat, square, product, kproduct, bitextract, yarotsky or bspline.
    construction: String,
    /// Accuracy / size parameter.
    #[arg(long)]
    n: Option<usize>,
    /// Depth of the sawtooth.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Number of factors of the k-product.
    #[arg(long)]
    k: Option<usize>,
    /// Input dimension of the B-spline.
    #[arg(long)]
    d: Option<usize>,
    /// Order of the B-spline.
    #[arg(long)]
    r: Option<u32>,
    /// Sign plan of the bit extraction, e.g. `+-+-...` (n² signs).
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Target of the super-convergent approximant: abs-mid or tent.
    #[arg(long)]
    f: Option<String>,
    /// Seed for randomly drawn sign plans.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; the manifest goes next to it as `<out>.manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Store exact rational weights (the default).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Store floating-point weights.
    #[arg(long)]
    float: bool,
    /// Print the manifest as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Claim id or number; see `--list`.
    claim: Option<String>,
    /// Run every claim.
    #[arg(long, conflicts_with = "claim")]
    all: bool,
    /// List the registered claims.
    #[arg(long)]
    list: bool,
    /// Parameter sweep: `4`, `4,8,16` or `1..8`.
    #[arg(long)]
    n: Option<String>,
    /// Target function (super-convergence claim).
    #[arg(long)]
    f: Option<String>,
    /// Grid resolution or sample count.
    #[arg(long)]
    grid: Option<usize>,
    /// Additive slack on every error bound.
    #[arg(long, default_value_t = 0.0)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate grid errors exactly.
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Evaluate grid errors in floating point (the default).
    #[arg(long)]
    float: bool,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of summary lines.
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Cpwl,
    Regions,
    Stats,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Network file.
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Stats)]
    mode: Mode,
    /// Write plot data as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Grid points (cpwl) or random samples (regions).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print JSON (the default output is already JSON; kept for symmetry).
    #[arg(long)]
    json: bool,
}

/// Error carrying its exit code.
enum Failure {
    Usage(String),
    Verification,
}

impl<E: std::fmt::Display> From<E> for Failure
where
    E: Into<anyhow::Error>,
{
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// `println!` that ends the process quietly when stdout is closed early
/// (e.g. piped into `head`) instead of panicking.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        if let Err(e) = writeln!(out, $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("failed writing to stdout: {e}");
        }
    }};
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Build(a) => build(a),
        Command::Verify(a) => verify(a),
        Command::Analyze(a) => analyze(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn need<T>(v: Option<T>, flag: &str, what: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("{what} needs --{flag}")))
}

fn build(a: BuildArgs) -> Result<(), Failure> {
    let name = a.construction.as_str();
    let (net, params, mut contract): (ReluNet<Q>, Value, Value) = match name {
        "sawtooth" => {
            let l = need(a.l.or(a.n), "L", "sawtooth")?;
            if l == 0 {
                return Err(Failure::Usage("--L must be at least 1".into()));
            }
            (sawtooth(l), json!({"L": l}), json!({"width": 2, "depth": l, "breakpoints_in_unit_interval": (1u64 << l.min(63)) - 1}))
        }
        "hat" => (hat01(), json!({}), json!({"width": 2, "depth": 1})),
        "square" => {
            let n = need(a.n, "n", "square")?;
            (square_net(n)?, json!({"n": n}), json!({"error_bound": format!("4^-{n}/3 on [0,1]")}))
        }
        "product" => {
            let n = need(a.n, "n", "product")?;
            (product_net(n)?, json!({"n": n}), json!({"error_bound": format!("4^-{n} on [0,1]^2"), "range": "[0,1]"}))
        }
        "kproduct" => {
            let (k, n) = (need(a.k, "k", "kproduct")?, need(a.n, "n", "kproduct")?);
            (kproduct_net(k, n)?, json!({"k": k, "n": n}), json!({"error_bound": format!("e*{k}*4^-{n} on [0,1]^{k}")}))
        }
        "bitextract" => {
            let n = need(a.n, "n", "bitextract")?;
            let plan = match &a.eps {
                Some(s) => BitExtractPlan::parse(n, s)?,
                None => BitExtractPlan::random(n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(a.seed))?,
            };
            let signs: String = plan.signs().iter().map(|s| if *s > 0 { '+' } else { '-' }).collect();
            (bit_extract_net(&plan)?, json!({"n": n, "eps": signs}), json!({"width": 11, "max_depth": 15 * n + 2, "interpolates": "y_i at t_i = i/n^2"}))
        }
        "yarotsky" => {
            let n = need(a.n, "n", "yarotsky")?;
            let half = q(1, 2);
            let f = match a.f.as_deref().unwrap_or("abs-mid") {
                "abs-mid" => Cpwl1D::new(vec![half.clone()], vec![qi(0)], qi(-1), qi(1))?,
                "tent" => Cpwl1D::new(vec![half.clone()], vec![half], qi(1), qi(-1))?,
                other => return Err(Failure::Usage(format!("unknown target '{other}' (abs-mid or tent)"))),
            };
            let r = yarotsky_approx(&|t: &Q| f.eval(t), n)?;
            (r.net, json!({"n": n, "f": a.f.as_deref().unwrap_or("abs-mid")}), json!({"error_bound": 6.0 / (n * n) as f64}))
        }
        "bspline" => {
            let (r, d, n) = (a.r.unwrap_or(2), a.d.unwrap_or(1), need(a.n, "n", "bspline")?);
            (bspline_net(r, d, n)?, json!({"r": r, "d": d, "n": n}), json!({"support": format!("[0,{r}]^{d}")}))
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown construction '{other}' (sawtooth, hat, square, product, kproduct, bitextract, yarotsky, bspline)"
            )))
        }
    };
    let stats = net.stats();
    contract["measured_width"] = json!(stats.width);
    contract["measured_depth"] = json!(stats.depth);
    contract["param_count"] = json!(stats.param_count);
    let mode = if a.float { "float" } else { "exact" };
    let out = a.out.unwrap_or_else(|| PathBuf::from(format!("{name}.net")));
    if a.float {
        save(&StoredNet::from(net.to_mode::<f64>()), &out)?;
    } else {
        save(&StoredNet::from(net), &out)?;
    }
    let manifest = json!({"construction": name, "parameters": params, "mode": mode, "contract": contract, "file": out.display().to_string()});
    let mpath = manifest_path(&out);
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest).expect("serializable"))?;
    if a.json {
        outln!("{}", serde_json::to_string_pretty(&manifest).expect("serializable"));
    } else {
        outln!("wrote {} (width {}, depth {}) and {}", out.display(), stats.width, stats.depth, mpath.display());
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// `8`, `4,8,16` or `1..8` (inclusive).
fn parse_sweep(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("cannot parse sweep '{s}' (use 8, 4,8,16 or 1..8)"));
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi): (usize, usize) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    if a.list {
        for c in registry() {
            outln!("{:>2}  {:<18} {}", c.number, c.id, c.title);
        }
        return Ok(());
    }
    let claims: Vec<&Claim> = match (&a.claim, a.all) {
        (_, true) => registry().iter().collect(),
        (Some(id), false) => vec![find(id).ok_or_else(|| Failure::Usage(format!("unknown claim '{id}' (see verify --list)")))?],
        (None, false) => return Err(Failure::Usage("give a claim id or --all".into())),
    };
    let opts = ClaimOptions {
        n: a.n.as_deref().map(parse_sweep).transpose()?,
        f: a.f.clone(),
        grid: a.grid,
        tolerance: a.tolerance,
        seed: a.seed,
        exact: a.exact && !a.float,
    };
    if !(opts.tolerance >= 0.0 && opts.tolerance.is_finite()) {
        return Err(Failure::Usage("--tolerance must be a nonnegative number".into()));
    }
    let reports = run_claims(&claims, &opts).map_err(|e| match e {
        ClaimError::Usage(m) => Failure::Usage(m),
        other => Failure::Usage(other.to_string()),
    })?;
    let doc = serde_json::to_string_pretty(&reports).expect("serializable");
    if let Some(p) = &a.out {
        std::fs::write(p, &doc)?;
    }
    if a.json {
        outln!("{doc}");
    } else {
        for r in &reports {
            outln!("{}", r.summary_line());
        }
    }
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let stored: StoredNet<Q> = load(&a.file).map_err(|e| Failure::Usage(format!("{}: {e}", a.file.display())))?;
    let net = stored.net();
    let d = net.input_dim();
    let domain = match &stored {
        StoredNet::Special(s) => s.domain_hint().cloned().unwrap_or_else(|| BoxDomain::unit(d)),
        StoredNet::Plain(_) => BoxDomain::unit(d),
    };
    let report = match a.mode {
        Mode::Stats => {
            let st = net.stats();
            json!({"d": d, "d_out": net.output_dim(), "width": st.width, "depth": st.depth, "param_count": st.param_count,
                   "special": matches!(stored, StoredNet::Special(_))})
        }
        Mode::Cpwl => {
            if d != 1 || net.output_dim() != 1 {
                return Err(Failure::Usage("cpwl mode needs a scalar network of one variable".into()));
            }
            let (lo, hi) = (domain.lo(0).cloned().unwrap_or(qi(0)), domain.hi(0).cloned().unwrap_or(qi(1)));
            let f = exact_cpwl_1d(net)?;
            let bps: Vec<Q> = f.breakpoints_in(&lo, &hi);
            if let Some(path) = &a.csv {
                let g = a.grid.unwrap_or(1001).max(2) as i64;
                let pts: Vec<Q> = (0..g).map(|k| lo.clone() + (hi.clone() - lo.clone()) * q(k, g - 1)).collect();
                let vals = eval_sorted1(net, &pts)?;
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["t", "net"])?;
                for (t, v) in pts.iter().zip(&vals) {
                    w.write_record([q_to_f64(t).to_string(), q_to_f64(v).to_string()])?;
                }
                w.flush()?;
            }
            json!({"interval": [lo.to_string(), hi.to_string()], "breakpoints": count_breakpoints_in(&f, &lo, &hi),
                   "locations": bps.iter().map(|b| b.to_string()).collect::<Vec<_>>()})
        }
        Mode::Regions => {
            let r = region_census(net, &domain, a.grid.unwrap_or(10_000), a.seed)?;
            if let Some(path) = &a.csv {
                std::fs::write(path, r.to_csv())?;
            }
            serde_json::from_str(&r.to_json()).expect("census serializes to JSON")
        }
    };
    outln!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(())
}
