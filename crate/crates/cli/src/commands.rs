//! One function per CLI verb. Every command computes first, then stages all
//! outputs and flushes them atomically.

use crate::config::{self, RawConfig};
use crate::output::{guard_numeric, OutputSet};
use cplab::grid::{CellSet, Cube};
use cplab::lab::{
    self, best_constant, hunt, measure_one, sweep, BestConstantReport, ExperimentConfig,
    HuntState, InequalityKind, RatioEntry, SweepReport,
};
use cplab::report::{csv_f64, csv_table, ConditionReport};
use cplab::weights::{
    condition_phi, cp_constant, generate, reverse_holder, scp_search, top_slice, WeightSpec,
};
use cplab::maximal::Lattice;
use cplab::{Error, GridFunction, Result};
use serde::Serialize;

pub struct CommandInput {
    pub raw: RawConfig,
    pub cfg: ExperimentConfig,
    pub jobs: usize,
    pub log: crate::LogLevel,
}

fn weight_of(cfg: &ExperimentConfig) -> Result<GridFunction> {
    generate(&cfg.weight, &cfg.domain()?)
}

#[derive(Serialize)]
struct CheckWeightReport {
    command: &'static str,
    k: u32,
    l: u32,
    p: f64,
    r: f64,
    seed: u64,
    reverse_holder: ConditionReport,
    cp: ConditionReport,
    scp_lower: ConditionReport,
    level_condition: ConditionReport,
}

pub fn check_weight(input: &CommandInput, out: &mut OutputSet) -> Result<()> {
    let cfg = &input.cfg;
    let dom = cfg.domain()?;
    let w = weight_of(cfg)?;
    input.log.info("measuring reverse Hölder constant");
    let rh = reverse_holder(&w, cfg.r, Lattice::Dyadic)?;
    input.log.info("measuring single-cube constant");
    let cp = cp_constant(&w, cfg.p, cfg.r)?;
    input.log.info("searching disjoint families");
    let scp = scp_search(&w, cfg.p, cfg.r, cfg.budget, cfg.strategy, cfg.seed)?;
    input.log.info("sampling the level condition");
    let n = dom.cell_count();
    let esets = vec![
        CellSet::from_cube(&dom, &Cube::from_cells(&dom, 0, (n / 8).max(1))?),
        CellSet::from_cube(&dom, &Cube::from_cells(&dom, n / 4, (n / 4).max(1))?),
        top_slice(&w, &dom.root(), 0.25)?,
    ];
    let lambdas: Vec<f64> = (1..=8).map(|j| 0.5f64.powi(j)).collect();
    let phi = condition_phi(&w, cfg.p, &esets, &lambdas)?;

    guard_numeric(
        "check-weight",
        &[rh.constant, cp.constant, scp.constant, phi.constant],
    )?;

    let report = CheckWeightReport {
        command: "check-weight",
        k: cfg.k,
        l: cfg.l,
        p: cfg.p,
        r: cfg.r,
        seed: cfg.seed,
        reverse_holder: rh,
        cp,
        scp_lower: scp,
        level_condition: phi,
    };
    let mut rows = Vec::new();
    for (name, rep) in [
        ("reverse_holder", &report.reverse_holder),
        ("cp", &report.cp),
        ("scp_lower", &report.scp_lower),
        ("level_condition", &report.level_condition),
    ] {
        rows.push(vec![
            name.to_string(),
            csv_f64(rep.p),
            csv_f64(rep.r),
            csv_f64(rep.constant),
        ]);
    }
    out.add_text("report.json", to_json(&report)?);
    out.add_text("tables/conditions.csv", csv_table("condition,p,r,constant", &rows));
    out.add_text("tables/phi.csv", report.level_condition.samples_csv());
    out.add_text("artifacts/weight.gridfn", w.to_text());
    Ok(())
}

#[derive(Serialize)]
struct DominateReport {
    command: &'static str,
    k: u32,
    l: u32,
    eta: f64,
    constant: f64,
    median_abs: f64,
    cube_count: usize,
}

pub fn sparse_dominate(input: &CommandInput, out: &mut OutputSet) -> Result<()> {
    let cfg = &input.cfg;
    let dom = cfg.domain()?;
    let f = weight_of(cfg)?;
    input.log.info("running the stopping-time domination");
    let res = cplab::sparse::dominate(&f, &dom.root())?;
    guard_numeric("sparse-dominate", &[res.family.eta, res.constant])?;
    let report = DominateReport {
        command: "sparse-dominate",
        k: cfg.k,
        l: cfg.l,
        eta: res.family.eta,
        constant: res.constant,
        median_abs: res.median_abs,
        cube_count: res.family.cubes.len(),
    };
    let rows: Vec<Vec<String>> = res
        .family
        .cubes
        .iter()
        .zip(&res.oscillations)
        .map(|(q, o)| {
            vec![
                q.dyadic_level().expect("dyadic family").to_string(),
                (q.start() / q.len_cells()).to_string(),
                csv_f64(*o),
            ]
        })
        .collect();
    out.add_text("report.json", to_json(&report)?);
    out.add_text("tables/family.csv", csv_table("level,index,oscillation", &rows));
    out.add_text("artifacts/input.gridfn", f.to_text());
    out.add_text("artifacts/family.sparse", res.family.to_text());
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    kind: InequalityKind,
    k: u32,
    l: u32,
    p: f64,
    seed: u64,
    corpus: String,
    best_ratio: f64,
    best_index: usize,
    skipped: Vec<usize>,
}

type MeasuredEntry = (usize, Result<(f64, f64)>);

/// Evaluates the corpus with up to `jobs` worker threads; the merged result
/// is identical to the serial one (entries ordered by corpus index).
fn best_constant_parallel(
    kind: InequalityKind,
    w: &GridFunction,
    corpus: &[GridFunction],
    p: f64,
    jobs: usize,
) -> Result<BestConstantReport> {
    if jobs <= 1 || corpus.len() <= 1 {
        return best_constant(kind, w, corpus, p, None);
    }
    let chunk = corpus.len().div_ceil(jobs);
    let results: Vec<Vec<MeasuredEntry>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (ci, part) in corpus.chunks(chunk).enumerate() {
            handles.push(scope.spawn(move || {
                part.iter()
                    .enumerate()
                    .map(|(i, f)| (ci * chunk + i, measure_one(kind, f, w, p, None)))
                    .collect::<Vec<_>>()
            }));
        }
        handles.into_iter().map(|h| h.join().expect("worker")).collect()
    });
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut best = (0.0f64, usize::MAX);
    for (index, res) in results.into_iter().flatten() {
        let (lhs, rhs) = res?;
        if rhs == 0.0 {
            skipped.push(index);
            continue;
        }
        let ratio = lhs / rhs;
        if ratio > best.0 {
            best = (ratio, index);
        }
        entries.push(RatioEntry {
            index,
            lhs,
            rhs,
            ratio,
        });
    }
    Ok(BestConstantReport {
        kind,
        p,
        corpus_id: lab::CORPUS_ID.to_string(),
        best_ratio: best.0,
        best_index: best.1,
        entries,
        skipped,
    })
}

pub fn verify(input: &CommandInput, out: &mut OutputSet) -> Result<()> {
    let cfg = &input.cfg;
    let kind = config::inequality_kind(&input.raw)?;
    let dom = cfg.domain()?;
    let w = weight_of(cfg)?;
    let corpus = lab::corpus(&dom, cfg.seed);
    input
        .log
        .info(&format!("measuring {} over {} corpus entries", kind.name(), corpus.len()));
    let rep = best_constant_parallel(kind, &w, &corpus, cfg.p, input.jobs)?;
    guard_numeric("verify", &[rep.best_ratio])?;
    let report = VerifyReport {
        command: "verify",
        kind,
        k: cfg.k,
        l: cfg.l,
        p: cfg.p,
        seed: cfg.seed,
        corpus: rep.corpus_id.clone(),
        best_ratio: rep.best_ratio,
        best_index: rep.best_index,
        skipped: rep.skipped.clone(),
    };
    let rows: Vec<Vec<String>> = rep
        .entries
        .iter()
        .map(|e| {
            vec![
                e.index.to_string(),
                csv_f64(e.lhs),
                csv_f64(e.rhs),
                csv_f64(e.ratio),
            ]
        })
        .collect();
    out.add_text("report.json", to_json(&report)?);
    out.add_text("tables/ratios.csv", csv_table("index,lhs,rhs,ratio", &rows));
    out.add_text("artifacts/weight.gridfn", w.to_text());
    Ok(())
}

#[derive(Serialize)]
struct HuntReport {
    command: &'static str,
    state: HuntState,
}

pub fn run_hunt(input: &CommandInput, out: &mut OutputSet) -> Result<()> {
    let cfg = &input.cfg;
    let dom = cfg.domain()?;
    input.log.info("annealing over weights");
    let state = hunt(cfg.p, cfg.r, cfg.b, &dom, cfg.budget, cfg.seed)?;
    guard_numeric(
        "hunt",
        &[state.best_objective, state.best_scp_lower, state.best_cp_upper],
    )?;
    let best_weight = GridFunction::from_values(
        &dom,
        state.best_log_values.iter().map(|v| v.exp()).collect(),
    )?;
    let rows = vec![vec![
        state.seed.to_string(),
        state.budget.to_string(),
        state.accepted.to_string(),
        csv_f64(state.best_objective),
        csv_f64(state.best_scp_lower),
        csv_f64(state.best_cp_upper),
        format!("{:016x}", state.trajectory_hash),
    ]];
    let report = HuntReport {
        command: "hunt",
        state,
    };
    out.add_text("report.json", to_json(&report)?);
    out.add_text(
        "tables/hunt.csv",
        csv_table(
            "seed,budget,accepted,best_objective,best_scp_lower,best_cp_upper,trajectory_hash",
            &rows,
        ),
    );
    out.add_text("artifacts/best_weight.gridfn", best_weight.to_text());
    Ok(())
}

#[derive(Serialize)]
struct SweepOut {
    command: &'static str,
    p: f64,
    r: f64,
    report: SweepReport,
}

pub fn run_sweep(input: &CommandInput, out: &mut OutputSet) -> Result<()> {
    let cfg = &input.cfg;
    if matches!(cfg.weight, WeightSpec::Custom(_)) {
        return Err(Error::Config(
            "file weights are pinned to one resolution and cannot sweep".into(),
        ));
    }
    input.log.info("sweeping resolutions");
    let rep = sweep(cfg)?;
    let mut headline = Vec::new();
    let mut rows = Vec::new();
    for entry in &rep.entries {
        for (name, value) in &entry.constants {
            headline.push(*value);
            rows.push(vec![
                rep.experiment.clone(),
                entry.k.to_string(),
                entry.l.to_string(),
                csv_f64(cfg.p),
                csv_f64(cfg.r),
                csv_f64(*value),
                name.clone(),
            ]);
        }
    }
    guard_numeric("sweep", &headline)?;
    let report = SweepOut {
        command: "sweep",
        p: cfg.p,
        r: cfg.r,
        report: rep,
    };
    out.add_text("report.json", to_json(&report)?);
    out.add_text(
        "tables/sweep.csv",
        csv_table("experiment,K,L,p,r,constant,extremizer-id", &rows),
    );
    Ok(())
}

/// Renders an existing `report.json` as a one-screen summary on stdout.
pub fn render_report(out_dir: &std::path::Path) -> Result<String> {
    let path = out_dir.join("report.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("bad report.json: {e}")))?;
    let mut lines = Vec::new();
    let command = value
        .get("command")
        .and_then(|v| v.as_str())
        .unwrap_or("unknown");
    lines.push(format!("command: {command}"));
    fn walk(prefix: &str, v: &serde_json::Value, lines: &mut Vec<String>, depth: usize) {
        if depth > 2 {
            return;
        }
        match v {
            serde_json::Value::Number(n) => lines.push(format!("{prefix} = {n}")),
            serde_json::Value::String(s) => lines.push(format!("{prefix} = {s}")),
            serde_json::Value::Object(map) => {
                for (k, sub) in map {
                    if k == "command" || k == "samples" || k == "best_log_values" {
                        continue;
                    }
                    let p = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&p, sub, lines, depth + 1);
                }
            }
            _ => {}
        }
    }
    walk("", &value, &mut lines, 0);
    Ok(lines.join("\n") + "\n")
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Format(format!("serialization failed: {e}")))
}
