//! Experiment harness: best-constant measurement for the weak-type and
//! strong-type inequalities, the adversarial test functions from the
//! necessity arguments, a seeded annealing hunt for weights separating the
//! family condition from the single-cube condition, and resolution sweeps.

use crate::error::{Error, Result};
use crate::grid::{CellSet, Cube, GridDomain, GridFunction};
use crate::maximal::{maximal_values, sharp, Lattice};
use crate::norms::{weighted_norm, NormKind};
use crate::orlicz::stein_ratio;
use crate::singular::hilbert_star;
use crate::sparse::{apply, dominate, SparseFamily};
use crate::weights::{cp_constant, generate, scp_search, SearchStrategy, WeightSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const CORPUS_ID: &str = "corpus-v1";

/// Which left/right norm pair an experiment measures. Weak kinds compare a
/// weak left norm against a strong right norm; `Cf`/`Fs` are the strong
/// variants kept as diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `||T* f||_{L^{p,inf}(w)}` vs `||Mf||_{L^p(w)}`.
    Cfw,
    /// `||f||_{L^{p,inf}(w)}` vs `||f#||_{L^p(w)}`.
    Fsw,
    /// `||A_S f||_{L^{p,inf}(w)}` vs `||Mf||_{L^p(w)}`.
    Asm,
    /// Strong variant of `Cfw`.
    Cf,
    /// Strong variant of `Fsw`.
    Fs,
}

impl InequalityKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cfw" => Ok(InequalityKind::Cfw),
            "fsw" => Ok(InequalityKind::Fsw),
            "asm" => Ok(InequalityKind::Asm),
            "cf" => Ok(InequalityKind::Cf),
            "fs" => Ok(InequalityKind::Fs),
            _ => Err(Error::Config(format!("unknown inequality kind {s:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InequalityKind::Cfw => "cfw",
            InequalityKind::Fsw => "fsw",
            InequalityKind::Asm => "asm",
            InequalityKind::Cf => "cf",
            InequalityKind::Fs => "fs",
        }
    }
}

/// One corpus entry's measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestConstantReport {
    pub kind: InequalityKind,
    pub p: f64,
    pub corpus_id: String,
    pub best_ratio: f64,
    /// Corpus index of the extremal function; usize::MAX when empty.
    pub best_index: usize,
    pub entries: Vec<RatioEntry>,
    /// Indices skipped because the right norm vanished.
    pub skipped: Vec<usize>,
}

fn lhs_rhs(
    kind: InequalityKind,
    f: &GridFunction,
    w: &GridFunction,
    p: f64,
    s: Option<&SparseFamily>,
) -> Result<(f64, f64)> {
    match kind {
        InequalityKind::Cfw | InequalityKind::Cf => {
            let tf = hilbert_star(f);
            let mf = maximal_values(f, Lattice::AllGridAligned);
            let norm_kind = if kind == InequalityKind::Cfw {
                NormKind::Weak
            } else {
                NormKind::Strong
            };
            Ok((
                weighted_norm(&tf, w, p, norm_kind)?,
                weighted_norm(&mf, w, p, NormKind::Strong)?,
            ))
        }
        InequalityKind::Fsw | InequalityKind::Fs => {
            let sf = sharp(f);
            let norm_kind = if kind == InequalityKind::Fsw {
                NormKind::Weak
            } else {
                NormKind::Strong
            };
            Ok((
                weighted_norm(f, w, p, norm_kind)?,
                weighted_norm(&sf, w, p, NormKind::Strong)?,
            ))
        }
        InequalityKind::Asm => {
            let family_owned;
            let family = match s {
                Some(s) => s,
                None => {
                    family_owned = dominate(f, &f.domain().root())?.family;
                    &family_owned
                }
            };
            let af = apply(family, f);
            let mf = maximal_values(f, Lattice::AllGridAligned);
            Ok((
                weighted_norm(&af, w, p, NormKind::Weak)?,
                weighted_norm(&mf, w, p, NormKind::Strong)?,
            ))
        }
    }
}

/// Left and right norms of one corpus entry (the per-item work behind
/// [`best_constant`], exposed so callers can schedule it themselves).
pub fn measure_one(
    kind: InequalityKind,
    f: &GridFunction,
    w: &GridFunction,
    p: f64,
    s: Option<&SparseFamily>,
) -> Result<(f64, f64)> {
    lhs_rhs(kind, f, w, p, s)
}

/// Largest `lhs/rhs` ratio over a corpus. Entries with a vanishing right
/// norm are skipped and reported.
pub fn best_constant(
    kind: InequalityKind,
    w: &GridFunction,
    corpus: &[GridFunction],
    p: f64,
    s: Option<&SparseFamily>,
) -> Result<BestConstantReport> {
    if corpus.is_empty() {
        return Err(Error::Parameter("empty corpus".into()));
    }
    let mut entries = Vec::with_capacity(corpus.len());
    let mut skipped = Vec::new();
    let mut best = (0.0f64, usize::MAX);
    for (index, f) in corpus.iter().enumerate() {
        let (lhs, rhs) = lhs_rhs(kind, f, w, p, s)?;
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
        corpus_id: CORPUS_ID.to_string(),
        best_ratio: best.0,
        best_index: best.1,
        entries,
        skipped,
    })
}

/// The adversarial profile `log^+((1/lambda) M chi_E)`: supported in
/// `{M chi_E >= lambda}`, equal to `log(1/lambda)` on `E`, and of bounded
/// grid mean oscillation uniformly in `lambda`.
pub fn adversarial_fs(dom: &GridDomain, e: &CellSet, lambda: f64) -> Result<GridFunction> {
    if e.is_empty() {
        return Err(Error::Parameter("adversarial set is empty".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Parameter(format!("level {lambda} outside (0,1)")));
    }
    let m = maximal_values(&e.indicator(dom), Lattice::AllGridAligned);
    GridFunction::from_values(
        dom,
        m.values()
            .iter()
            .map(|&v| {
                let t = v / lambda;
                if t > 1.0 {
                    t.ln()
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// Grid BMO seminorm: the largest mean oscillation over all grid cubes.
pub fn bmo_seminorm(f: &GridFunction) -> f64 {
    sharp(f).max_value()
}

/// Deterministic Rademacher sign for a dyadic block, stable across grid
/// resolutions (keyed only by seed, level, and block index).
fn rademacher(seed: u64, level: u32, block: usize) -> f64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(level as u64 + 1))
        .wrapping_add((block as u64).wrapping_mul(0xbf58476d1ce4e5b9));
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58476d1ce4e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    if z & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The fixed experiment corpus: dyadic-set indicators, Rademacher martingale
/// profiles, smooth bumps, and adversarial log profiles. Every entry is
/// defined at a resolution-independent scale so refinement sweeps compare
/// like with like.
pub fn corpus(dom: &GridDomain, seed: u64) -> Vec<GridFunction> {
    let n = dom.cell_count();
    let len = dom.length();
    let mut out = Vec::new();

    // indicators of dyadic intervals at a few coarse scales
    for (num, den) in [(0usize, 2usize), (1, 4), (0, 1)] {
        let start = n * num / den;
        let width = (n / den.max(2)).max(1);
        let q = Cube::from_cells(dom, start, width).expect("inside domain");
        out.push(GridFunction::indicator(dom, &q));
    }
    // union of two separated dyadic cubes
    {
        let q1 = Cube::from_cells(dom, 0, (n / 8).max(1)).expect("inside");
        let q2 = Cube::from_cells(dom, n / 2, (n / 8).max(1)).expect("inside");
        let mut vals = vec![0.0; n];
        vals[q1.cells()].fill(1.0);
        vals[q2.cells()].fill(1.0);
        out.push(GridFunction::from_values(dom, vals).expect("finite"));
    }
    // Rademacher martingale profiles on dyadic blocks down to level 4
    for variant in 0..3u64 {
        let deepest = dom.k().min(4) + variant.min(1) as u32;
        let values = (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for level in 0..=deepest.min(dom.max_level()) {
                    let block = i >> (dom.max_level() - level);
                    acc += rademacher(seed ^ variant, level, block)
                        * 0.5f64.powf(level as f64 / 2.0);
                }
                acc
            })
            .collect();
        out.push(GridFunction::from_values(dom, values).expect("finite"));
    }
    // smooth bumps (Gaussian and modulated)
    for (frac, freq) in [(0.5f64, 0.0f64), (0.3, 4.0)] {
        let center = len * frac;
        let sigma = len / 12.0;
        out.push(
            GridFunction::from_fn(dom, |x| {
                let t = (x - center) / sigma;
                let osc = if freq > 0.0 { (freq * t).cos() } else { 1.0 };
                (-0.5 * t * t).exp() * osc
            })
            .expect("finite"),
        );
    }
    // adversarial log profiles over E = [0, min(1, |domain|/4))
    let e_cells = (n >> dom.k().min(2)).clamp(1, n / 2);
    let e = CellSet::from_cells(dom, 0..e_cells);
    for j in [2u32, dom.k() + 1] {
        let lambda = 0.5f64.powi(j as i32);
        if lambda > 0.0 && lambda < 1.0 {
            out.push(adversarial_fs(dom, &e, lambda).expect("valid adversarial profile"));
        }
    }
    out
}

/// State of the annealing hunt for a weight with a large disjoint-family
/// constant under a single-cube budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HuntState {
    pub seed: u64,
    pub p: f64,
    pub r: f64,
    /// The single-cube constant budget.
    pub b: f64,
    pub budget: usize,
    pub temp0: f64,
    pub temp_end: f64,
    pub steps: usize,
    pub accepted: usize,
    pub best_objective: f64,
    pub best_scp_lower: f64,
    pub best_cp_upper: f64,
    pub best_log_values: Vec<f64>,
    pub trajectory_hash: u64,
}

/// Penalized objective: the family lower bound minus a penalty for exceeding
/// the single-cube budget.
pub fn hunt_eval(w: &GridFunction, p: f64, r: f64, b: f64) -> Result<(f64, f64, f64)> {
    let scp = scp_search(w, p, r, 12, SearchStrategy::LevelSets, 0)?.constant;
    let cp = cp_constant(w, p, r)?.constant;
    let objective = scp - 10.0 * (cp - b).max(0.0);
    Ok((scp, cp, objective))
}

fn fnv_mix(hash: u64, value: u64) -> u64 {
    (hash ^ value).wrapping_mul(0x100000001b3)
}

/// Seeded annealing over per-cell log-values: single-cell perturbations,
/// dyadic-block rescales, and dyadic-block copies (lacunary self-similarity).
/// Deterministic per seed; the result is evidence, not a claimed extremum.
pub fn hunt(
    p: f64,
    r: f64,
    b: f64,
    dom: &GridDomain,
    budget: usize,
    seed: u64,
) -> Result<HuntState> {
    if b <= 0.0 {
        return Err(Error::Parameter("budget constant B must be positive".into()));
    }
    if budget == 0 {
        return Err(Error::Parameter("hunt budget must be at least 1".into()));
    }
    let n = dom.cell_count();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut log_values = vec![0.0f64; n];
    let to_weight = |lv: &[f64]| -> Result<GridFunction> {
        GridFunction::from_values(dom, lv.iter().map(|v| v.exp()).collect())
    };
    let (scp0, cp0, obj0) = hunt_eval(&to_weight(&log_values)?, p, r, b)?;
    let mut current_obj = obj0;
    let mut best = (obj0, scp0, cp0, log_values.clone());
    let temp0 = 0.1 * obj0.abs().max(1.0);
    let temp_end = temp0 * 1e-3;
    let mut hash = 0xcbf29ce484222325u64;
    let mut accepted = 0usize;
    for step in 0..budget {
        let frac = step as f64 / budget as f64;
        let temp = temp0 * (temp_end / temp0).powf(frac);
        let mut trial = log_values.clone();
        match rng.gen_range(0..3u8) {
            0 => {
                let i = rng.gen_range(0..n);
                trial[i] += rng.gen_range(-0.5..0.5);
            }
            1 => {
                let level = rng.gen_range(0..=dom.max_level());
                let len = 1usize << (dom.max_level() - level);
                let block = rng.gen_range(0..(n / len));
                let shift = rng.gen_range(-0.5..0.5);
                for v in &mut trial[block * len..(block + 1) * len] {
                    *v += shift;
                }
            }
            _ => {
                if dom.max_level() == 0 {
                    continue;
                }
                let level = rng.gen_range(1..=dom.max_level());
                let len = 1usize << (dom.max_level() - level);
                let block = rng.gen_range(0..(n / len));
                let sibling = block ^ 1;
                let (src, dst) = (block * len, sibling * len);
                for off in 0..len {
                    trial[dst + off] = trial[src + off];
                }
            }
        }
        let (scp, cp, obj) = hunt_eval(&to_weight(&trial)?, p, r, b)?;
        let take = obj >= current_obj || rng.gen_range(0.0..1.0) < ((obj - current_obj) / temp).exp();
        if take {
            log_values = trial;
            current_obj = obj;
            accepted += 1;
            if obj > best.0 {
                best = (obj, scp, cp, log_values.clone());
            }
        }
        hash = fnv_mix(hash, step as u64);
        hash = fnv_mix(hash, take as u64);
        hash = fnv_mix(hash, obj.to_bits());
    }
    Ok(HuntState {
        seed,
        p,
        r,
        b,
        budget,
        temp0,
        temp_end,
        steps: budget,
        accepted,
        best_objective: best.0,
        best_scp_lower: best.1,
        best_cp_upper: best.2,
        best_log_values: best.3,
        trajectory_hash: hash,
    })
}

/// Named experiments a sweep can rerun across resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ReverseHolder,
    Cp,
    Scp,
    Stein,
    Best(InequalityKind),
}

impl Experiment {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rh" | "reverse-holder" => Ok(Experiment::ReverseHolder),
            "cp" => Ok(Experiment::Cp),
            "scp" => Ok(Experiment::Scp),
            "stein" => Ok(Experiment::Stein),
            other => Ok(Experiment::Best(InequalityKind::parse(other)?)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Experiment::ReverseHolder => "rh".into(),
            Experiment::Cp => "cp".into(),
            Experiment::Scp => "scp".into(),
            Experiment::Stein => "stein".into(),
            Experiment::Best(kind) => kind.name().into(),
        }
    }
}

/// Declarative description of one harness run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k: u32,
    pub l: u32,
    pub weight: WeightSpec,
    pub p: f64,
    pub r: f64,
    pub strategy: SearchStrategy,
    pub budget: usize,
    pub seed: u64,
    pub b: f64,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn domain(&self) -> Result<GridDomain> {
        GridDomain::new(self.k, self.l)
    }
}

/// Runs one named experiment at one resolution, returning its measured
/// constants by name.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BTreeMap<String, f64>> {
    let dom = cfg.domain()?;
    let w = generate(&cfg.weight, &dom)?;
    let mut out = BTreeMap::new();
    match cfg.experiment {
        Experiment::ReverseHolder => {
            let rep = crate::weights::reverse_holder(&w, cfg.r, Lattice::Dyadic)?;
            out.insert("reverse_holder".into(), rep.constant);
        }
        Experiment::Cp => {
            let rep = cp_constant(&w, cfg.p, cfg.r)?;
            out.insert("cp".into(), rep.constant);
        }
        Experiment::Scp => {
            let rep = scp_search(&w, cfg.p, cfg.r, cfg.budget, cfg.strategy, cfg.seed)?;
            out.insert("scp_lower".into(), rep.constant);
        }
        Experiment::Stein => {
            let center = dom.length() / 2.0;
            let sigma = dom.length() / 10.0;
            let f = GridFunction::from_fn(&dom, |x| {
                let t = (x - center) / sigma;
                (-0.5 * t * t).exp() + 0.05
            })?;
            out.insert("stein_ratio".into(), stein_ratio(&f, &dom.root())?);
        }
        Experiment::Best(kind) => {
            let fs = corpus(&dom, cfg.seed);
            let rep = best_constant(kind, &w, &fs, cfg.p, None)?;
            out.insert(format!("best_{}", kind.name()), rep.best_ratio);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: u32,
    pub l: u32,
    pub constants: BTreeMap<String, f64>,
}

/// Resolution-stability report: the named experiment rerun across
/// `L in {L0, L0+1, L0+2}` and `K in {K0, K0+1}`, with relative spreads per
/// constant. Spread above 15% flags the constant unstable in that direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub experiment: String,
    pub entries: Vec<SweepEntry>,
    /// Per constant: worst relative spread across the L sweep at fixed K.
    pub drift_l: BTreeMap<String, f64>,
    /// Per constant: worst relative spread across the K sweep at fixed L.
    pub drift_k: BTreeMap<String, f64>,
    pub unstable_l: Vec<String>,
    pub unstable_k: Vec<String>,
}

pub const DRIFT_THRESHOLD: f64 = 0.15;

fn spread(values: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 {
        return f64::INFINITY;
    }
    hi / lo - 1.0
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let mut entries: Vec<SweepEntry> = Vec::new();
    for k in [cfg.k, cfg.k + 1] {
        for l in [cfg.l, cfg.l + 1, cfg.l + 2] {
            let mut sub = cfg.clone();
            sub.k = k;
            sub.l = l;
            let constants = run_experiment(&sub)?;
            entries.push(SweepEntry { k, l, constants });
        }
    }
    let names: Vec<String> = entries[0].constants.keys().cloned().collect();
    let mut drift_l = BTreeMap::new();
    let mut drift_k = BTreeMap::new();
    for name in &names {
        let mut worst_l = 0.0f64;
        for k in [cfg.k, cfg.k + 1] {
            let vals: Vec<f64> = entries
                .iter()
                .filter(|e| e.k == k)
                .map(|e| e.constants[name])
                .collect();
            worst_l = worst_l.max(spread(&vals));
        }
        let mut worst_k = 0.0f64;
        for l in [cfg.l, cfg.l + 1, cfg.l + 2] {
            let vals: Vec<f64> = entries
                .iter()
                .filter(|e| e.l == l)
                .map(|e| e.constants[name])
                .collect();
            worst_k = worst_k.max(spread(&vals));
        }
        drift_l.insert(name.clone(), worst_l);
        drift_k.insert(name.clone(), worst_k);
    }
    let unstable_l = names
        .iter()
        .filter(|n| drift_l[*n] > DRIFT_THRESHOLD)
        .cloned()
        .collect();
    let unstable_k = names
        .iter()
        .filter(|n| drift_k[*n] > DRIFT_THRESHOLD)
        .cloned()
        .collect();
    Ok(SweepReport {
        experiment: cfg.experiment.name(),
        entries,
        drift_l,
        drift_k,
        unstable_l,
        unstable_k,
    })
}
