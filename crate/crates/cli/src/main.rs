//! `lattice-flow`: batch front end for the min-cut, time-constant and
//! limit-shape experiments. Data goes to stdout (or `--out`); the resolved
//! configuration and warnings go to stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use lattice_flow::cutflow::{brute_force_min_cycle, mincut_infinity_with, DEFAULT_NMAX_FACTOR, ORACLE_MAX_RADIUS};
use lattice_flow::error::CutError;
use lattice_flow::experiments::{
    convergence_csv, disjoint_csv, estimate_i_hat, run_convergence, run_disjoint, run_tail, tail_csv, RunConfig,
    DEFAULT_MU_N, DEFAULT_MU_REPS,
};
use lattice_flow::fpp::{estimate_mu, format_micro, MuEstimate, MuTable};
use lattice_flow::lattice::{sites_in_scaled_polygon, Site, SiteSet};
use lattice_flow::rational::{format_rational, parse_rational, to_f64};
use lattice_flow::{truncated_maxflow, CapacityField, ConvexPolygon, DistributionSpec, MaxFlowResult, Rational, DEFAULT_SCALE};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "lattice-flow", version, about = "Max-flow / min-cut experiments on Z^2 with random capacities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time constant in one direction.
    Mu(Flags),
    /// Min cut from nA to infinity, with box doubling.
    Mincut(Flags),
    /// Max flow from A to the boundary of the l1 ball of radius n.
    Maxflow(Flags),
    /// Brute-force minimal surrounding dual cycle, next to the max flow of the same box.
    Oracle(Flags),
    /// Estimated mu-length of a polygon.
    Ifun(Flags),
    /// Ratios mincut(nA, inf) / (n I(A)) over a grid of n.
    Converge(Flags),
    /// Deviation frequencies of the convergence ratio.
    Tail(Flags),
    /// Edge-disjoint open paths from nA to infinity.
    Disjoint(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Flags {
    #[arg(long, default_value = "exp:1")]
    dist: DistributionSpec,
    /// square:r, ngon:k:r or @file; defaults depend on the subcommand
    #[arg(long)]
    polygon: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    ngrid: Option<Vec<u32>>,
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1/5", value_parser = rational)]
    eps: Rational,
    #[arg(long, default_value = "9/10", value_parser = rational)]
    p: Rational,
    #[arg(long, value_parser = direction)]
    dir: Option<(i64, i64)>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: u64,
    #[arg(long, default_value_t = DEFAULT_NMAX_FACTOR)]
    nmax_factor: i64,
    /// Length used for time-constant estimates in the grid experiments.
    #[arg(long, default_value_t = DEFAULT_MU_N)]
    mu_n: u32,
    #[arg(long, default_value_t = DEFAULT_MU_REPS)]
    mu_reps: u32,
    /// Fill the seconds column (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn direction(s: &str) -> Result<(i64, i64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => Ok((x.trim().parse().map_err(|_| format!("bad x in {s}"))?, y.trim().parse().map_err(|_| format!("bad y in {s}"))?)),
        _ => Err(format!("expected x,y, got {s}")),
    }
}

/// Any error before output is written; reported as a usage failure.
struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Finished output plus whether the doubling budget ran out somewhere.
struct Outcome {
    body: String,
    budget_exceeded: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (flags, result) = match &cli.command {
        Command::Mu(f) => (f, mu(f)),
        Command::Mincut(f) => (f, mincut(f)),
        Command::Maxflow(f) => (f, maxflow(f)),
        Command::Oracle(f) => (f, oracle(f)),
        Command::Ifun(f) => (f, ifun(f)),
        Command::Converge(f) => (f, converge(f)),
        Command::Tail(f) => (f, tail(f)),
        Command::Disjoint(f) => (f, disjoint(f)),
    };
    match result {
        Ok(out) => {
            if let Err(e) = emit(flags, &out.body) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if out.budget_exceeded {
                eprintln!("warning: box doubling budget exceeded; unstabilized values written");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn emit(flags: &Flags, body: &str) -> std::io::Result<()> {
    match &flags.out {
        Some(path) => fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

/// Prints the resolved config and returns its hash.
fn announce(command: &str, config: &Value) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    eprintln!("{command} config: {text}");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_document(hash: &str, table: String) -> String {
    format!("# lattice-flow {VERSION}\n# config_hash {hash}\n{table}")
}

fn json_document(kind: &str, hash: &str, config: &Value, fields: Value) -> String {
    let mut doc = Map::new();
    doc.insert("kind".into(), json!(kind));
    doc.insert("version".into(), json!(VERSION));
    doc.insert("config_hash".into(), json!(hash));
    doc.insert("config".into(), config.clone());
    if let Value::Object(m) = fields {
        doc.extend(m);
    }
    let mut s = serde_json::to_string(&Value::Object(doc)).expect("document serializes");
    s.push('\n');
    s
}

fn format_of(flags: &Flags, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = flags.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure(format!("--format {f:?} is not available for this subcommand").to_lowercase()))
    }
}

fn polygon(spec: &str) -> Result<ConvexPolygon, Failure> {
    ConvexPolygon::parse_spec(spec).map_err(|e| Failure(e.to_string()))
}

fn field(flags: &Flags) -> CapacityField {
    CapacityField::with_scale(flags.dist.clone(), flags.seed, flags.scale)
}

fn mu_json(e: &MuEstimate) -> Value {
    json!({
        "direction": [e.direction.0, e.direction.1],
        "n": e.n_used,
        "reps": e.replicates,
        "mean_micro": format_micro(&e.mean),
        "stderr_micro": e.stderr,
        "origin": format!("{:?}", e.origin),
    })
}

fn mu(flags: &Flags) -> Result<Outcome, Failure> {
    let dir = flags.dir.ok_or_else(|| Failure("mu needs --dir x,y".into()))?;
    let n = flags.n.unwrap_or(64);
    let reps = flags.reps.unwrap_or(30);
    let format = format_of(flags, Format::Csv, &[Format::Csv, Format::Json])?;
    let config = json!({"dist": flags.dist.to_string(), "dir": [dir.0, dir.1], "n": n, "reps": reps,
        "seed": flags.seed, "scale": flags.scale});
    let hash = announce("mu", &config);
    let estimate = estimate_mu(&flags.dist, dir, n, reps, flags.seed, flags.scale)?;
    let body = match format {
        Format::Csv => {
            let mut t = MuTable::new();
            t.insert(estimate);
            csv_document(&hash, t.to_csv())
        }
        Format::Json => json_document("mu", &hash, &config, json!({"entries": [mu_json(&estimate)]})),
    };
    Ok(Outcome { body, budget_exceeded: false })
}

fn maxflow_json(hash: &str, config: &Value, r: &MaxFlowResult) -> String {
    let summary = serde_json::to_value(r.summary()).expect("summary serializes");
    json_document("maxflow", hash, config, summary)
}

fn mincut(flags: &Flags) -> Result<Outcome, Failure> {
    format_of(flags, Format::Json, &[Format::Json])?;
    let n = flags.n.unwrap_or(1);
    let config = json!({"dist": flags.dist.to_string(), "polygon": flags.polygon, "n": n, "seed": flags.seed,
        "scale": flags.scale, "nmax_factor": flags.nmax_factor});
    let source = match &flags.polygon {
        Some(p) => sites_in_scaled_polygon(&polygon(p)?, n)?,
        None => SiteSet::singleton(Site::ORIGIN),
    };
    let hash = announce("mincut", &config);
    let (result, budget_exceeded) = match mincut_infinity_with(&field(flags), &source, flags.nmax_factor) {
        Ok(r) => (r, false),
        Err(CutError::BudgetExceeded { best }) => (*best, true),
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome { body: maxflow_json(&hash, &config, &result), budget_exceeded })
}

/// `A` for the box-level commands: the polygon at scale 1, or the origin.
fn box_source(flags: &Flags) -> Result<SiteSet, Failure> {
    match &flags.polygon {
        Some(p) => Ok(sites_in_scaled_polygon(&polygon(p)?, 1)?),
        None => Ok(SiteSet::singleton(Site::ORIGIN)),
    }
}

fn maxflow(flags: &Flags) -> Result<Outcome, Failure> {
    format_of(flags, Format::Json, &[Format::Json])?;
    let n = flags.n.ok_or_else(|| Failure("maxflow needs --n (box radius)".into()))? as i64;
    let config = json!({"dist": flags.dist.to_string(), "polygon": flags.polygon, "n": n, "seed": flags.seed,
        "scale": flags.scale});
    let source = box_source(flags)?;
    let hash = announce("maxflow", &config);
    let result = truncated_maxflow(&field(flags), &source, n)?;
    Ok(Outcome { body: maxflow_json(&hash, &config, &result), budget_exceeded: false })
}

fn oracle(flags: &Flags) -> Result<Outcome, Failure> {
    format_of(flags, Format::Json, &[Format::Json])?;
    let n = flags.n.unwrap_or(4) as i64;
    if n > ORACLE_MAX_RADIUS {
        return Err(Failure(format!("oracle radius is limited to {ORACLE_MAX_RADIUS}")));
    }
    let config = json!({"dist": flags.dist.to_string(), "polygon": flags.polygon, "n": n, "seed": flags.seed,
        "scale": flags.scale});
    let source = box_source(flags)?;
    let hash = announce("oracle", &config);
    let f = field(flags);
    let value = brute_force_min_cycle(&f, &source, n)?;
    let flow = truncated_maxflow(&f, &source, n)?;
    let body = json_document("oracle", &hash, &config, json!({"value_micro": value, "radius": n, "maxflow_micro": flow.value}));
    Ok(Outcome { body, budget_exceeded: false })
}

fn run_config(flags: &Flags, default_grid: &[u32], default_reps: u32) -> Result<RunConfig, Failure> {
    let poly = polygon(flags.polygon.as_deref().unwrap_or("square:1"))?;
    let grid = flags.ngrid.clone().unwrap_or_else(|| default_grid.to_vec());
    let mut cfg = RunConfig::new(flags.dist.clone(), poly, grid, flags.reps.unwrap_or(default_reps), flags.seed);
    cfg.epsilon = flags.eps;
    cfg.p_open = flags.p;
    cfg.scale = flags.scale;
    cfg.nmax_factor = flags.nmax_factor;
    cfg.mu_n = flags.mu_n;
    cfg.mu_reps = flags.mu_reps;
    cfg.validate().map_err(|e| Failure(e.to_string()))?;
    Ok(cfg)
}

fn ifun(flags: &Flags) -> Result<Outcome, Failure> {
    format_of(flags, Format::Json, &[Format::Json])?;
    let mut cfg = run_config(flags, &[1], 1)?;
    cfg.mu_n = flags.n.unwrap_or(flags.mu_n);
    cfg.mu_reps = flags.reps.unwrap_or(flags.mu_reps);
    let config = json!({"dist": flags.dist.to_string(), "polygon": cfg.polygon.to_string(), "mu_n": cfg.mu_n,
        "mu_reps": cfg.mu_reps, "seed": cfg.master_seed, "scale": cfg.scale});
    let hash = announce("ifun", &config);
    let (table, i) = estimate_i_hat(&cfg.spec, &cfg.polygon, &cfg)?;
    let mu: Vec<Value> = table.entries().map(mu_json).collect();
    let body = json_document(
        "ifun",
        &hash,
        &config,
        json!({"i_micro": format_rational(&i), "i_float": to_f64(&i) / cfg.scale as f64, "mu": mu}),
    );
    Ok(Outcome { body, budget_exceeded: false })
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn converge(flags: &Flags) -> Result<Outcome, Failure> {
    let format = format_of(flags, Format::Csv, &[Format::Csv, Format::Json])?;
    let cfg = run_config(flags, &[8, 16, 32], 10)?;
    let config = cfg.to_json();
    let hash = announce("converge", &config);
    let run = run_convergence(&cfg)?;
    warn_all(&run.warnings);
    let budget_exceeded = run.records.iter().any(|r| !r.stabilized);
    let body = match format {
        Format::Csv => csv_document(&hash, convergence_csv(&run.records, flags.timing)),
        Format::Json => {
            let summary = serde_json::to_value(run.summary(&cfg.n_grid, &cfg.epsilon)).expect("summary serializes");
            json_document(
                "summary",
                &hash,
                &config,
                json!({"i_hat_micro": format_micro(&run.i_hat), "summary": summary, "warnings": run.warnings}),
            )
        }
    };
    Ok(Outcome { body, budget_exceeded })
}

fn tail(flags: &Flags) -> Result<Outcome, Failure> {
    let format = format_of(flags, Format::Csv, &[Format::Csv, Format::Json])?;
    let cfg = run_config(flags, &[8, 16, 32], 200)?;
    let config = cfg.to_json();
    let hash = announce("tail", &config);
    let report = run_tail(&cfg)?;
    warn_all(&report.convergence.warnings);
    let budget_exceeded = report.convergence.records.iter().any(|r| !r.stabilized);
    let body = match format {
        Format::Csv => csv_document(&hash, tail_csv(&report.rows)),
        Format::Json => json_document(
            "tail",
            &hash,
            &config,
            json!({"rows": report.rows, "trend": report.trend, "nonincreasing": report.nonincreasing,
                "i_hat_micro": format_micro(&report.convergence.i_hat)}),
        ),
    };
    Ok(Outcome { body, budget_exceeded })
}

fn disjoint(flags: &Flags) -> Result<Outcome, Failure> {
    let format = format_of(flags, Format::Csv, &[Format::Csv, Format::Json])?;
    let cfg = run_config(flags, &[8, 16, 32], 30)?;
    let mut config = cfg.to_json();
    // the law is fixed by --p here
    config["dist"] = json!(DistributionSpec::Bernoulli(cfg.p_open).to_string());
    let hash = announce("disjoint", &config);
    let run = run_disjoint(&cfg)?;
    warn_all(&run.warnings);
    let budget_exceeded = run.records.iter().any(|r| !r.stabilized);
    let body = match format {
        Format::Csv => csv_document(&hash, disjoint_csv(&run.records, flags.timing)),
        Format::Json => {
            let records: Vec<Value> = run
                .records
                .iter()
                .map(|r| json!({"n": r.n, "replicate": r.replicate, "count": r.count, "ratio": r.ratio,
                    "stabilized": r.stabilized}))
                .collect();
            json_document(
                "disjoint",
                &hash,
                &config,
                json!({"i_hat_micro": format_micro(&run.i_hat), "records": records, "warnings": run.warnings}),
            )
        }
    };
    Ok(Outcome { body, budget_exceeded })
}
