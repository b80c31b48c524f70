//! `balance`: solve, estimate, enumerate and generate balanced-exposure instances.
//!
//! Every command prints exactly one JSON run record (to stdout, or to `--out` where that
//! flag names the record). Exit status: 0 ok, 2 bad input, 3 resource limit.

mod record;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use balance_core::corpus::{random_instance, CorpusSpec};
use balance_core::objective::exact_value;
use balance_core::{
    brute_force_solve, enumerate_values, estimate, greedy, greedy_iter, greedy_tuple, load_instance, solve_correlated,
    solve_heterogeneous, transform_tau, BalanceInstance, EstimatorConfig, Hypergraph, ObjectiveId, OracleLimit,
    Sampling, Setting, SolutionProfile, SolverOptions,
};

use record::{json_digest, sha256_hex, RunRecord};

#[derive(Debug, Parser)]
#[command(name = "balance", version, about = "balanced information exposure under multi-campaign cascades")]
struct Cli {
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Add `wall_ms` to the run record (makes records run-dependent).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct Accuracy {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,

    #[arg(long, default_value_t = 0.1)]
    delta: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Upper bound on samples per estimate (the uncapped count is still reported).
    #[arg(long)]
    samples_cap: Option<u64>,

    #[arg(long, value_enum, default_value_t = SamplingArg::Auto)]
    sampling: SamplingArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SamplingArg {
    Auto,
    Forward,
    Grouped,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Auto => Sampling::Auto,
            SamplingArg::Forward => Sampling::Forward,
            SamplingArg::Grouped => Sampling::Grouped,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    /// Plain greedy on `--objective` (default `geq:ν−1`).
    Greedy,
    /// Tuple greedy on `geq:ℓ` with `--level ℓ` (default 1).
    Tuple,
    /// Level-by-level greedy.
    Iter,
    /// Best of empty, tuple and iter.
    Het,
    /// Ψ-greedy with expansion; correlated instances only.
    Cor,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum SettingArg {
    Het,
    Cor,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one of the approximation algorithms.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[command(flatten)]
        accuracy: Accuracy,
        /// Objective for `--algo greedy`: phi, level:ℓ, geq:ℓ, band:ℓ:β or psi.
        #[arg(long)]
        objective: Option<ObjectiveId>,
        /// ℓ for `--algo tuple`.
        #[arg(long)]
        level: Option<u16>,
        /// Budget override (defaults to the instance's k).
        #[arg(long)]
        k: Option<u32>,
        /// Abort when one iteration would evaluate more candidate tuples than this.
        #[arg(long)]
        tuple_limit: Option<u128>,
        /// Write the run record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate one objective value by sampling.
    Estimate {
        instance: PathBuf,
        #[arg(long, default_value = "phi")]
        objective: ObjectiveId,
        /// Solution as `v:c,v:c,...` (empty for ∅).
        #[arg(long, default_value = "")]
        pairs: String,
        #[command(flatten)]
        accuracy: Accuracy,
        /// Also compute the exact value by world enumeration.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimum, optionally with the full value table as CSV.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value = "phi")]
        objective: ObjectiveId,
        #[arg(long)]
        k: Option<u32>,
        /// CSV destination for every enumerated solution and its exact value.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Ceiling on (solution, world) evaluations.
        #[arg(long)]
        ceiling: Option<u128>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the hardness-reduction instance from a hypergraph file.
    Reduce {
        hypergraph: PathBuf,
        #[arg(long)]
        mu: u16,
        #[arg(long)]
        nu: u16,
        #[arg(long)]
        k: u32,
        /// Instance JSON destination; embedded in the record when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gadget index destination (default: next to `--out`).
        #[arg(long)]
        gadget_out: Option<PathBuf>,
    },
    /// Generate seeded random instances.
    Corpus {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        mu: u16,
        #[arg(long)]
        nu: u16,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = SettingArg::Het)]
        setting: SettingArg,
        #[arg(long, default_value_t = 10)]
        count: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.35)]
        density: f64,
        /// Maximum number of fractional probability slots per instance.
        #[arg(long, default_value_t = 6)]
        fractional: usize,
        /// Directory for `instance_NNN.json` files; embedded in the record when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// A failure together with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let limit = error
            .chain()
            .any(|c| c.downcast_ref::<balance_core::Error>().is_some_and(|e| e.is_limit()));
        Failure { code: if limit { 3 } else { 2 }, error }
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Debug, Serialize)]
struct AccuracyEcho {
    epsilon: f64,
    delta: f64,
    seed: u64,
    samples_cap: Option<u64>,
    sampling: SamplingArg,
}

impl From<&Accuracy> for AccuracyEcho {
    fn from(a: &Accuracy) -> Self {
        AccuracyEcho { epsilon: a.epsilon, delta: a.delta, seed: a.seed, samples_cap: a.samples_cap, sampling: a.sampling }
    }
}

struct Ctx {
    started: Instant,
    timing: bool,
}

impl Ctx {
    fn emit<C: Serialize, R: Serialize>(
        &self,
        command: &'static str,
        input_digest: String,
        config: C,
        result: R,
        out: Option<&Path>,
    ) -> CmdResult {
        let rec = RunRecord {
            command,
            input_digest,
            config,
            result,
            wall_ms: self.timing.then(|| self.started.elapsed().as_millis() as u64),
        };
        let text = serde_json::to_string_pretty(&rec)? + "\n";
        match out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn read_instance(path: &Path, k: Option<u32>) -> Result<(BalanceInstance, String), Failure> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = json_digest(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    // A budget override is applied before validation, so e.g. reduced instances with k < ν can be solved.
    let bytes = match k {
        Some(k) => {
            let mut v: Value = serde_json::from_slice(&bytes)?;
            if let Some(obj) = v.as_object_mut() {
                obj.insert("k".into(), k.into());
            }
            serde_json::to_vec(&v)?
        }
        None => bytes,
    };
    let instance = load_instance(&bytes).with_context(|| format!("loading {}", path.display()))?;
    Ok((instance, digest))
}

fn write_json(path: &Path, v: &impl Serialize) -> anyhow::Result<String> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(json_digest(text.as_bytes())?)
}

fn solver_options(a: &Accuracy, tuple_limit: Option<u128>) -> SolverOptions {
    let mut o = SolverOptions::new(a.epsilon, a.delta, a.seed).with_cap(a.samples_cap).with_sampling(a.sampling.into());
    if let Some(t) = tuple_limit {
        o = o.with_tuple_limit(t);
    }
    o
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    ctx: &Ctx,
    path: &Path,
    algo: Algo,
    accuracy: &Accuracy,
    objective: Option<ObjectiveId>,
    level: Option<u16>,
    k: Option<u32>,
    tuple_limit: Option<u128>,
    out: Option<&Path>,
) -> CmdResult {
    let (inst, digest) = read_instance(path, k)?;
    let opts = solver_options(accuracy, tuple_limit);
    let k = inst.k();
    let report = match algo {
        Algo::Greedy => {
            let obj = objective.unwrap_or(ObjectiveId::PhiGeq(inst.nu() - 1));
            greedy(&inst, obj, &inst.seeds(), k, &opts)?
        }
        Algo::Tuple => greedy_tuple(&inst, level.unwrap_or(1), k, &opts)?,
        Algo::Iter => greedy_iter(&inst, k, &opts)?,
        Algo::Het => solve_heterogeneous(&inst, &opts)?,
        Algo::Cor => solve_correlated(&inst, &opts)?,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let config = json!({
        "algo": algo,
        "accuracy": AccuracyEcho::from(accuracy),
        "objective": objective,
        "level": level,
        "k": k,
        "tuple_limit": opts.tuple_limit.to_string(),
    });
    ctx.emit("solve", digest, config, report, out)
}

fn cmd_estimate(
    ctx: &Ctx,
    path: &Path,
    objective: ObjectiveId,
    pairs: &str,
    accuracy: &Accuracy,
    exact: bool,
    out: Option<&Path>,
) -> CmdResult {
    let (inst, digest) = read_instance(path, None)?;
    let s = SolutionProfile::parse(pairs)?;
    let cfg = EstimatorConfig::new(accuracy.epsilon, accuracy.delta, accuracy.seed)
        .with_cap(accuracy.samples_cap)
        .with_sampling(accuracy.sampling.into());
    let est = estimate(objective, &s, &inst, &cfg)?;
    let exact_v = if exact { Some(exact_value(objective, &s, &inst)?) } else { None };
    let config = json!({
        "objective": objective,
        "pairs": s,
        "accuracy": AccuracyEcho::from(accuracy),
    });
    let result = json!({ "estimate": est, "exact_value": exact_v });
    ctx.emit("estimate", digest, config, result, out)
}

fn csv_table(rows: &[(SolutionProfile, f64)]) -> String {
    let mut s = String::from("size,solution,value\n");
    for (set, v) in rows {
        s.push_str(&format!("{},\"{}\",{}\n", set.len(), set, v));
    }
    s
}

fn cmd_oracle(
    ctx: &Ctx,
    path: &Path,
    objective: ObjectiveId,
    k: Option<u32>,
    table: Option<&Path>,
    ceiling: Option<u128>,
    out: Option<&Path>,
) -> CmdResult {
    let (inst, digest) = read_instance(path, None)?;
    let k = k.unwrap_or(inst.k());
    let mut limit = OracleLimit::default();
    if let Some(c) = ceiling {
        limit.ceiling = c;
    }
    let (table_path, table_digest, rows, (best, value)) = match table {
        Some(p) => {
            let rows = enumerate_values(&inst, objective, k, &limit)?;
            let csv = csv_table(&rows);
            fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?;
            let best = brute_force_solve(&inst, objective, k, &limit)?;
            (Some(p.display().to_string()), Some(sha256_hex(csv.as_bytes())), Some(rows.len()), best)
        }
        None => (None, None, None, brute_force_solve(&inst, objective, k, &limit)?),
    };
    let config = json!({ "objective": objective, "k": k, "limit": limit_json(&limit) });
    let result = json!({
        "optimum": best,
        "value": value,
        "table": table_path,
        "table_sha256": table_digest,
        "rows": rows,
    });
    ctx.emit("oracle", digest, config, result, out)
}

fn limit_json(l: &OracleLimit) -> Value {
    json!({
        "max_pairs": l.max_pairs,
        "max_budget": l.max_budget,
        "max_slots": l.max_slots,
        "ceiling": l.ceiling.to_string(),
    })
}

fn cmd_reduce(
    ctx: &Ctx,
    path: &Path,
    mu: u16,
    nu: u16,
    k: u32,
    out: Option<&Path>,
    gadget_out: Option<&Path>,
) -> CmdResult {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let h = Hypergraph::parse(&text)?;
    let digest = sha256_hex(h.to_text().as_bytes());
    let (inst, gadget) = transform_tau(&h, k, mu, nu)?;
    let summary = json!({
        "nodes": inst.n(),
        "arcs": inst.arcs().len(),
        "rect_nodes": gadget.rect_nodes,
        "circle_nodes": gadget.circle_count(),
        "lambda": gadget.lambda,
        "l": gadget.l,
        "m": gadget.m,
    });
    let result = match out {
        Some(p) => {
            let gp = gadget_out.map(Path::to_path_buf).unwrap_or_else(|| p.with_extension("gadget.json"));
            let inst_digest = write_json(p, &inst)?;
            let gadget_digest = write_json(&gp, &gadget)?;
            json!({
                "summary": summary,
                "instance": p.display().to_string(),
                "instance_digest": inst_digest,
                "gadget": gp.display().to_string(),
                "gadget_digest": gadget_digest,
            })
        }
        None => {
            if let Some(gp) = gadget_out {
                write_json(gp, &gadget)?;
            }
            json!({ "summary": summary, "instance": inst, "gadget": gadget })
        }
    };
    ctx.emit("reduce", digest, json!({ "mu": mu, "nu": nu, "k": k }), result, None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_corpus(
    ctx: &Ctx,
    n: u32,
    mu: u16,
    nu: u16,
    k: u32,
    setting: SettingArg,
    count: u32,
    seed: u64,
    density: f64,
    fractional: usize,
    out_dir: Option<&Path>,
) -> CmdResult {
    let setting = match setting {
        SettingArg::Het => Setting::Heterogeneous,
        SettingArg::Cor => Setting::Correlated,
    };
    let spec = CorpusSpec::new(n, mu, nu, k, setting).density(density).fractional(fractional);
    // Catch a bad spec up front rather than panicking inside the generator.
    balance_core::validate(&balance_core::InstanceParts {
        n,
        mu,
        nu,
        k,
        setting,
        seeds: vec![Vec::new(); mu as usize],
        arcs: Vec::new(),
        names: None,
    })
    .map_err(balance_core::Error::Invalid)?;
    if !(0.0..=1.0).contains(&density) {
        return Err(anyhow!("density {density} outside [0, 1]").into());
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut entries = Vec::new();
    for i in 0..count {
        let s = seed.wrapping_add(i as u64);
        let inst = random_instance(&spec, s);
        let entry = match out_dir {
            Some(dir) => {
                let p = dir.join(format!("instance_{i:03}.json"));
                let d = write_json(&p, &inst)?;
                json!({ "seed": s, "file": p.display().to_string(), "digest": d })
            }
            None => {
                let text = serde_json::to_vec(&inst)?;
                json!({ "seed": s, "digest": json_digest(&text)?, "instance": inst })
            }
        };
        entries.push(entry);
    }
    let spec_text = serde_json::to_vec(&spec)?;
    let digest = json_digest(&spec_text)?;
    ctx.emit("corpus", digest, json!({ "spec": spec, "count": count, "seed": seed }), entries, None)
}

fn run(cli: Cli) -> CmdResult {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    let ctx = Ctx { started: Instant::now(), timing: cli.timing };
    match cli.command {
        Command::Solve { instance, algo, accuracy, objective, level, k, tuple_limit, out } => {
            cmd_solve(&ctx, &instance, algo, &accuracy, objective, level, k, tuple_limit, out.as_deref())
        }
        Command::Estimate { instance, objective, pairs, accuracy, exact, out } => {
            cmd_estimate(&ctx, &instance, objective, &pairs, &accuracy, exact, out.as_deref())
        }
        Command::Oracle { instance, objective, k, table, ceiling, out } => {
            cmd_oracle(&ctx, &instance, objective, k, table.as_deref(), ceiling, out.as_deref())
        }
        Command::Reduce { hypergraph, mu, nu, k, out, gadget_out } => {
            cmd_reduce(&ctx, &hypergraph, mu, nu, k, out.as_deref(), gadget_out.as_deref())
        }
        Command::Corpus { n, mu, nu, k, setting, count, seed, density, fractional, out_dir } => {
            cmd_corpus(&ctx, n, mu, nu, k, setting, count, seed, density, fractional, out_dir.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
