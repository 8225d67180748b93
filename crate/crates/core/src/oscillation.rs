//! Local oscillations over cubes.
//!
//! The standard kind is `inf_c ((f-c) chi_Q)^* (lambda |Q|)`; for cell-value
//! step functions the infimum is attained by the midrange of a minimal-width
//! window holding mass `>= (1-lambda)|Q|` of the sorted values, so both kinds
//! reduce to one exact sorted-window scan.

use crate::error::{Error, Result};
use crate::grid::{Cube, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscKind {
    /// `inf_c ((f-c) chi_Q)^* (lambda |Q|)`.
    Standard,
    /// `inf { osc(f; E) : E subset Q, |E| >= (1-lambda)|Q| }`.
    Tilde,
}

/// Oscillation value together with the optimal recentering constant
/// (the window midrange), used by the sparse domination recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    pub value: f64,
    pub center: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Parameter(format!(
            "oscillation level {lambda} outside (0,1)"
        )));
    }
    Ok(())
}

/// Number of sorted cell values a mass-`(1-lambda)|Q|` window must keep.
fn keep_count(m: usize, lambda: f64) -> usize {
    let k = (lambda * m as f64).floor() as usize;
    let k = k.min(m - 1);
    m - k
}

fn window_scan(sorted: &[f64], keep: usize) -> (f64, f64) {
    let mut best_width = f64::INFINITY;
    let mut best_center = 0.0;
    for i in 0..=(sorted.len() - keep) {
        let width = sorted[i + keep - 1] - sorted[i];
        if width < best_width {
            best_width = width;
            best_center = (sorted[i + keep - 1] + sorted[i]) / 2.0;
        }
    }
    (best_width, best_center)
}

/// Exact oscillation of `f` over `Q` at level `lambda`, with the optimal
/// centering constant for the standard kind.
pub fn oscillation_with_center(
    f: &GridFunction,
    q: &Cube,
    lambda: f64,
    kind: OscKind,
) -> Result<Oscillation> {
    check_lambda(lambda)?;
    if q.end() > f.domain().cell_count() {
        return Err(Error::Geometry("cube escapes the domain".into()));
    }
    let mut vals: Vec<f64> = f.values()[q.cells()].to_vec();
    vals.sort_by(|a, b| a.total_cmp(b));
    let keep = keep_count(vals.len(), lambda);
    let (width, center) = window_scan(&vals, keep);
    let value = match kind {
        OscKind::Standard => width / 2.0,
        OscKind::Tilde => width,
    };
    Ok(Oscillation { value, center })
}

/// Exact oscillation of `f` over `Q` at level `lambda`.
pub fn oscillation(f: &GridFunction, q: &Cube, lambda: f64, kind: OscKind) -> Result<f64> {
    Ok(oscillation_with_center(f, q, lambda, kind)?.value)
}

/// Oscillation of a pre-extracted slice of cell values (callers that scan many
/// cubes keep their own buffers). `sorted` must be ascending.
pub(crate) fn oscillation_sorted(sorted: &[f64], lambda: f64, kind: OscKind) -> Oscillation {
    let keep = keep_count(sorted.len(), lambda);
    let (width, center) = window_scan(sorted, keep);
    let value = match kind {
        OscKind::Standard => width / 2.0,
        OscKind::Tilde => width,
    };
    Oscillation { value, center }
}
