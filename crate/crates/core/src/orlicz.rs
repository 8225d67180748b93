//! Normalized Orlicz averages over cubes for the two Young functions
//! `t log(e+t)` and `e^t - 1`, plus the generalized Hölder estimate and the
//! maximal-function lower bound for the `L log L` average.

use crate::error::{Error, Result};
use crate::grid::{CellSet, Cube, GridFunction};
use crate::maximal::{maximal_values, Lattice};

/// A Young function: zero at zero, strictly increasing, convex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YoungFunction {
    /// `Phi(t) = t log(e + t)`.
    LLogL,
    /// `Phi(t) = e^t - 1`.
    ExpL,
}

impl YoungFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            YoungFunction::LLogL => t * (std::f64::consts::E + t).ln(),
            YoungFunction::ExpL => t.exp_m1(),
        }
    }

    /// Inverse by bisection: `|Phi(inverse(y)) - y| <= 1e-12 max(1, y)`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0f64;
        while self.eval(hi) < y {
            hi *= 2.0;
        }
        let mut lo = 0.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// The normalized Orlicz average
/// `||f||_{Phi,Q} = inf { a > 0 : (1/|Q|) ∫_Q Phi(|f|/a) <= 1 }`,
/// computed by bisection on the exact cell sum. Returns 0 when `f` vanishes
/// identically on `Q`.
pub fn orlicz_average(f: &GridFunction, q: &Cube, phi: YoungFunction) -> Result<f64> {
    if q.end() > f.domain().cell_count() {
        return Err(Error::Geometry("cube escapes the domain".into()));
    }
    let vals: Vec<f64> = f.values()[q.cells()].iter().map(|v| v.abs()).collect();
    let max = vals.iter().fold(0.0f64, |m, &v| m.max(v));
    if max == 0.0 {
        return Ok(0.0);
    }
    let m = vals.len() as f64;
    // (1/|Q|) ∫_Q Phi(|f|/a) as a cell average; +inf counts as > 1
    let constraint = |a: f64| -> f64 {
        let mut acc = 0.0;
        for &v in &vals {
            if v > 0.0 {
                acc += phi.eval(v / a);
                if !acc.is_finite() {
                    return f64::INFINITY;
                }
            }
        }
        acc / m
    };
    // Phi(1/e) < 1 for both kinds, so a = e*max satisfies the constraint;
    // expand downward to bracket the crossing.
    let mut hi = std::f64::consts::E * max;
    debug_assert!(constraint(hi) <= 1.0);
    let mut lo = max * 1e-9;
    while constraint(lo) <= 1.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Ok(0.0);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if constraint(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Both sides of the Hölder estimate for integrating over a subset:
/// `lhs = ∫_E |f|`, `rhs = |Q| ||f||_{LlogL,Q} / log(1 + |Q|/|E|)`.
pub fn holder_check(f: &GridFunction, e: &CellSet, q: &Cube) -> Result<(f64, f64)> {
    if e.is_empty() {
        return Err(Error::Parameter("subset E is empty".into()));
    }
    if e.num_cells_total() != f.domain().cell_count() {
        return Err(Error::DomainMismatch("cell set on a different grid".into()));
    }
    if e.iter_cells().any(|c| !q.contains_cell(c)) {
        return Err(Error::Containment("E escapes the cube Q".into()));
    }
    let lhs = f.abs().integrate_set(e);
    let q_measure = q.measure(f.domain());
    let ratio = q.len_cells() as f64 / e.cell_count() as f64;
    let rhs = q_measure * orlicz_average(f, q, YoungFunction::LLogL)? / (1.0 + ratio).ln();
    Ok((lhs, rhs))
}

/// The ratio `||f||_{LlogL,Q} |Q| / ∫_Q M(f chi_Q)` for nonnegative `f`, the
/// quantity whose corpus-wide boundedness expresses the maximal-function
/// lower bound for the `L log L` average.
pub fn stein_ratio(f: &GridFunction, q: &Cube) -> Result<f64> {
    if q.cells().any(|c| f.value(c) < 0.0) {
        return Err(Error::Parameter("stein ratio requires f >= 0 on Q".into()));
    }
    if q.cells().all(|c| f.value(c) == 0.0) {
        return Err(Error::Parameter(
            "stein ratio requires f not identically zero on Q".into(),
        ));
    }
    let dom = f.domain();
    let masked = GridFunction::from_values(
        dom,
        (0..f.len())
            .map(|c| if q.contains_cell(c) { f.value(c) } else { 0.0 })
            .collect(),
    )?;
    let m = maximal_values(&masked, Lattice::AllGridAligned);
    let denom = m.integrate_cells(q.start(), q.end());
    let numer = orlicz_average(f, q, YoungFunction::LLogL)? * q.measure(dom);
    Ok(numer / denom)
}
