//! Sparse families of dyadic cubes: sparseness measurement, density stopping
//! cubes, a constructive pointwise domination of `|f|` by oscillation sums
//! over a sparse family, the sparse averaging operator, and the
//! generation-layering combinatorics behind the weak-type bound.

use crate::error::{Error, Result};
use crate::grid::{CellSet, Cube, GridDomain, GridFunction};
use crate::oscillation::{oscillation_with_center, OscKind};
use crate::rearrange::median;

/// Half-open cell ranges `[start, end)`.
pub type CellRange = (usize, usize);

/// A family of dyadic cubes with its measured sparseness and the per-cube
/// exclusive sets `E_Q = Q \ union of strict subcubes in the family`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFamily {
    pub cubes: Vec<Cube>,
    /// Largest eta for which the family is eta-sparse.
    pub eta: f64,
    /// Exclusive set of each cube as disjoint sorted cell ranges.
    pub exclusive: Vec<Vec<CellRange>>,
}

impl SparseFamily {
    pub fn new(dom: &GridDomain, cubes: Vec<Cube>) -> Result<Self> {
        let (eta, exclusive) = sparseness(dom, &cubes)?;
        Ok(SparseFamily {
            cubes,
            eta,
            exclusive,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("sparse 1 eta={:.16e}\n", self.eta);
        for q in &self.cubes {
            let level = q.dyadic_level().expect("sparse families hold dyadic cubes");
            let index = q.start() / q.len_cells();
            out.push_str(&format!("{level} {index}\n"));
        }
        out
    }

    pub fn from_text(dom: &GridDomain, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty sparse family input".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "sparse" || parts[1] != "1" {
            return Err(Error::Format(format!("bad sparse header: {header:?}")));
        }
        let mut cubes = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let level: u32 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad sparse line {line:?}")))?;
            let index: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad sparse line {line:?}")))?;
            cubes.push(Cube::dyadic(dom, level, index)?);
        }
        SparseFamily::new(dom, cubes)
    }
}

/// The largest `eta` for which the family is eta-sparse, together with the
/// exclusive sets. Exact: `eta = 1 - max_Q |union of strict subcubes| / |Q|`.
pub fn sparseness(dom: &GridDomain, cubes: &[Cube]) -> Result<(f64, Vec<Vec<CellRange>>)> {
    for q in cubes {
        if q.dyadic_level().is_none() {
            return Err(Error::Lattice(format!(
                "cube [{}, {}) is not dyadic",
                q.start(),
                q.end()
            )));
        }
        if q.end() > dom.cell_count() {
            return Err(Error::Geometry("cube escapes the domain".into()));
        }
    }
    let mut max_covered_fraction = 0.0f64;
    let mut exclusive = Vec::with_capacity(cubes.len());
    for q in cubes {
        // maximal strict subcubes of q within the family are pairwise disjoint
        let mut subs: Vec<&Cube> = cubes
            .iter()
            .filter(|p| q.contains(p) && p.len_cells() < q.len_cells())
            .collect();
        subs.sort_by_key(|p| (p.start(), std::cmp::Reverse(p.len_cells())));
        let mut kept: Vec<CellRange> = Vec::new();
        let mut covered_end = q.start();
        for p in subs {
            if p.start() >= covered_end {
                kept.push((p.start(), p.end()));
                covered_end = p.end();
            }
        }
        let covered: usize = kept.iter().map(|(s, e)| e - s).sum();
        max_covered_fraction = max_covered_fraction.max(covered as f64 / q.len_cells() as f64);
        // complement of the kept ranges inside q
        let mut ex = Vec::new();
        let mut cursor = q.start();
        for (s, e) in kept {
            if s > cursor {
                ex.push((cursor, s));
            }
            cursor = e;
        }
        if cursor < q.end() {
            ex.push((cursor, q.end()));
        }
        exclusive.push(ex);
    }
    Ok((1.0 - max_covered_fraction, exclusive))
}

/// Maximal dyadic subcubes `P` of `q0` with `|P ∩ E|/|P| > tau`. Pairwise
/// disjoint; covers every cell of `E` (a single cell has density 1).
pub fn cz_stop(dom: &GridDomain, e: &CellSet, q0: &Cube, tau: f64) -> Result<Vec<Cube>> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Parameter(format!("density {tau} outside (0,1)")));
    }
    if q0.dyadic_level().is_none() {
        return Err(Error::Lattice("stopping root must be dyadic".into()));
    }
    if e.iter_cells().any(|c| !q0.contains_cell(c)) {
        return Err(Error::Containment("E escapes the stopping root".into()));
    }
    let prefix = e.prefix_counts();
    let mut out = Vec::new();
    let mut stack = vec![*q0];
    while let Some(q) = stack.pop() {
        let count = (prefix[q.end()] - prefix[q.start()]) as f64;
        if count == 0.0 {
            continue;
        }
        if count > tau * q.len_cells() as f64 {
            out.push(q);
        } else {
            let level = q.dyadic_level().expect("recursion stays dyadic") + 1;
            let half = q.len_cells() / 2;
            stack.push(Cube::dyadic(dom, level, q.start() / half)?);
            stack.push(Cube::dyadic(dom, level, q.start() / half + 1)?);
        }
    }
    out.sort_by_key(|q| q.start());
    Ok(out)
}

/// Result of the pointwise sparse domination.
#[derive(Debug, Clone)]
pub struct Domination {
    pub family: SparseFamily,
    /// Oscillation at level 1/8 of each family cube, aligned with `family.cubes`.
    pub oscillations: Vec<f64>,
    /// Smallest `c` with `|f| <= c * sum osc_Q chi_Q + |median(f, Q0)|` at
    /// every cell, verified by direct evaluation.
    pub constant: f64,
    pub median_abs: f64,
}

const DOMINATION_LAMBDA: f64 = 0.125;
const STOPPING_DENSITY: f64 = 0.5;

/// Constructive sparse domination: stopping-time recursion on the sets where
/// `f` strays from the optimal oscillation center, recursing on the dyadic
/// parents of the density stopping cubes so consecutive centers stay linked.
///
/// The emitted family is at least 1/2-sparse (stopping cubes capture at most
/// `2 lambda |Q|` of mass, their parents at most twice that), and the
/// verified constant is at most 3 in exact arithmetic.
pub fn dominate(f: &GridFunction, q0: &Cube) -> Result<Domination> {
    let dom = *f.domain();
    if q0.dyadic_level().is_none() {
        return Err(Error::Lattice("domination root must be dyadic".into()));
    }
    // work with f extended by zero outside q0
    let masked = GridFunction::from_values(
        &dom,
        (0..f.len())
            .map(|c| if q0.contains_cell(c) { f.value(c) } else { 0.0 })
            .collect(),
    )?;
    if masked.values().iter().all(|&v| v == 0.0) {
        return Ok(Domination {
            family: SparseFamily {
                cubes: Vec::new(),
                eta: 1.0,
                exclusive: Vec::new(),
            },
            oscillations: Vec::new(),
            constant: 0.0,
            median_abs: 0.0,
        });
    }

    let mut cubes = Vec::new();
    let mut oscs = Vec::new();
    let mut stack = vec![*q0];
    while let Some(q) = stack.pop() {
        let o = oscillation_with_center(&masked, &q, DOMINATION_LAMBDA, OscKind::Standard)?;
        cubes.push(q);
        oscs.push(o.value);
        let threshold = o.value * (1.0 + 1e-12);
        let deviant = CellSet::from_cells(
            &dom,
            q.cells()
                .filter(|&c| (masked.value(c) - o.center).abs() > threshold),
        );
        if deviant.is_empty() {
            continue;
        }
        let stops = cz_stop(&dom, &deviant, &q, STOPPING_DENSITY)?;
        // recurse on the dyadic parents; with lambda = 1/8 a stopping cube is
        // at most |Q|/8, so its parent is still strictly inside Q
        let mut parents: Vec<Cube> = stops
            .iter()
            .map(|p| p.parent().expect("stopping cubes sit below the root"))
            .collect();
        parents.sort_by_key(|p| (p.start(), std::cmp::Reverse(p.len_cells())));
        parents.dedup();
        let mut kept: Vec<Cube> = Vec::new();
        for p in parents {
            debug_assert!(q.contains(&p) && p.len_cells() < q.len_cells());
            if !kept.iter().any(|k| k.contains(&p)) {
                kept.push(p);
            }
        }
        stack.extend(kept);
    }

    let family = SparseFamily::new(&dom, cubes)?;

    // verify the domination inequality cell by cell
    let mut acc = vec![0.0f64; dom.cell_count() + 1];
    for (q, o) in family.cubes.iter().zip(&oscs) {
        acc[q.start()] += o;
        acc[q.end()] -= o;
    }
    let mut sum = 0.0;
    let med = median(&masked, q0)?.abs();
    let mut constant = 0.0f64;
    for c in 0..dom.cell_count() {
        sum += acc[c];
        let deficit = masked.value(c).abs() - med;
        if deficit > 0.0 {
            if sum > 0.0 {
                constant = constant.max(deficit / sum);
            } else {
                constant = f64::INFINITY;
            }
        }
    }
    Ok(Domination {
        family,
        oscillations: oscs,
        constant,
        median_abs: med,
    })
}

/// The sparse averaging operator `A_S f = sum_Q (avg_Q |f|) chi_Q`.
pub fn apply(s: &SparseFamily, f: &GridFunction) -> GridFunction {
    let dom = f.domain();
    let absf = f.abs();
    let mut acc = vec![0.0f64; dom.cell_count() + 1];
    for q in &s.cubes {
        let avg = absf.average(q);
        acc[q.start()] += avg;
        acc[q.end()] -= avg;
    }
    let mut sum = 0.0;
    let values = (0..dom.cell_count())
        .map(|c| {
            sum += acc[c];
            sum
        })
        .collect();
    GridFunction::from_values(dom, values).expect("averages are finite")
}

/// One cube's layering data: the union `A_k(Q)` of cubes `2^k` generations
/// below `Q` within the average-window family, against its sparseness bound.
#[derive(Debug, Clone)]
pub struct LayerBound {
    pub cube: Cube,
    pub generation: usize,
    pub a_k_measure: f64,
    pub bound: f64,
}

/// Layering report for the family `F_k = { Q : 4^{-k-1} < avg_Q |f| <= 4^{-k} }`.
#[derive(Debug, Clone)]
pub struct LayerReport {
    pub k: u32,
    /// Generations `F_{k,0}, F_{k,1}, ...` (maximal cubes peeled repeatedly).
    pub generations: Vec<Vec<Cube>>,
    pub bounds: Vec<LayerBound>,
    pub exclusive_sets_disjoint: bool,
    /// Max of `a_k_measure / bound` across cubes (0 when no bound applies).
    pub worst_ratio: f64,
}

pub fn layer_diagnostic(s: &SparseFamily, f: &GridFunction, k: u32) -> Result<LayerReport> {
    if k == 0 {
        return Err(Error::Parameter("layer index k must be positive".into()));
    }
    let dom = f.domain();
    let absf = f.abs();
    let lo = 0.25f64.powi(k as i32 + 1);
    let hi = 0.25f64.powi(k as i32);
    let mut fk: Vec<Cube> = s
        .cubes
        .iter()
        .copied()
        .filter(|q| {
            let avg = absf.average(q);
            avg > lo && avg <= hi
        })
        .collect();
    fk.sort_by_key(|q| (q.start(), std::cmp::Reverse(q.len_cells())));

    // peel maximal cubes generation by generation
    let mut generations: Vec<Vec<Cube>> = Vec::new();
    let mut remaining = fk.clone();
    while !remaining.is_empty() {
        let mut maximal: Vec<Cube> = Vec::new();
        for q in &remaining {
            if !remaining
                .iter()
                .any(|p| p.contains(q) && p.len_cells() > q.len_cells())
            {
                maximal.push(*q);
            }
        }
        remaining.retain(|q| !maximal.contains(q));
        generations.push(maximal);
    }

    // exclusive sets within the layering: E_Q = Q minus next-generation cubes
    let mut used = CellSet::empty(dom);
    let mut disjoint = true;
    for (nu, gen) in generations.iter().enumerate() {
        for q in gen {
            let next = generations.get(nu + 1);
            let mut eq = CellSet::empty(dom);
            for c in q.cells() {
                let in_next = next
                    .map(|g| g.iter().any(|p| p.contains_cell(c)))
                    .unwrap_or(false);
                if !in_next {
                    eq.insert(c);
                }
            }
            for c in eq.iter_cells() {
                if used.contains(c) {
                    disjoint = false;
                }
                used.insert(c);
            }
        }
    }

    // A_k(Q) and the (1-eta)^{2^k} bound
    let jump = 1usize << k;
    let mut bounds = Vec::new();
    let mut worst: f64 = 0.0;
    for (nu, gen) in generations.iter().enumerate() {
        let Some(target) = generations.get(nu + jump) else {
            continue;
        };
        for q in gen {
            let mut union = CellSet::empty(dom);
            for p in target.iter().filter(|p| q.contains(p)) {
                for c in p.cells() {
                    union.insert(c);
                }
            }
            let measured = union.measure(dom);
            let bound = (1.0 - s.eta).powi(jump as i32) * q.measure(dom);
            if bound > 0.0 {
                worst = worst.max(measured / bound);
            } else if measured > 0.0 {
                worst = f64::INFINITY;
            }
            bounds.push(LayerBound {
                cube: *q,
                generation: nu,
                a_k_measure: measured,
                bound,
            });
        }
    }
    Ok(LayerReport {
        k,
        generations,
        bounds,
        exclusive_sets_disjoint: disjoint,
        worst_ratio: worst,
    })
}
