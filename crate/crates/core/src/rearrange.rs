//! Non-increasing rearrangement of grid functions (exact for step functions)
//! and the cell-value median.

use crate::error::{Error, Result};
use crate::grid::{CellSet, Cube, GridFunction};

/// The non-increasing rearrangement `f*` as a right-continuous step function
/// on `[0, total_measure)`; zero beyond.
///
/// Stored as merged steps `(value, end)`: `f*(t) = value` for
/// `t` in `[previous end, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    steps: Vec<(f64, f64)>,
    total: f64,
}

impl StepFunction {
    /// Right-continuous evaluation: `f*(t) = inf { a : |{|f| > a} ∩ S| <= t }`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::INFINITY;
        }
        // first step whose end exceeds t
        let mut lo = 0usize;
        let mut hi = self.steps.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.steps[mid].1 <= t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo < self.steps.len() {
            self.steps[lo].0
        } else {
            0.0
        }
    }

    /// Total mass of the underlying set.
    pub fn total_measure(&self) -> f64 {
        self.total
    }

    /// Merged `(value, cumulative-measure)` pairs, values strictly decreasing.
    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Measure of the level set `{f* > alpha}` (equals `|{|f| > alpha} ∩ S|`).
    pub fn level_measure(&self, alpha: f64) -> f64 {
        let mut m = 0.0;
        let mut prev_end = 0.0;
        for &(v, end) in &self.steps {
            if v > alpha {
                m = end;
            } else {
                break;
            }
            prev_end = end;
        }
        let _ = prev_end;
        m
    }
}

/// Rearrangement of `|f|` restricted to `s` (default: whole domain).
pub fn rearrangement(f: &GridFunction, s: Option<&CellSet>) -> StepFunction {
    let delta = f.domain().delta();
    let mut vals: Vec<f64> = match s {
        None => f.values().iter().map(|v| v.abs()).collect(),
        Some(set) => set.iter_cells().map(|c| f.value(c).abs()).collect(),
    };
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        let end = (i + 1) as f64 * delta;
        match steps.last_mut() {
            Some(last) if last.0 == *v => last.1 = end,
            _ => steps.push((*v, end)),
        }
    }
    let total = vals.len() as f64 * delta;
    StepFunction { steps, total }
}

/// Rearrangement of the multiset of cell values of `|f|` on a cube.
pub fn rearrangement_on_cube(f: &GridFunction, q: &Cube) -> StepFunction {
    let delta = f.domain().delta();
    let mut vals: Vec<f64> = f.values()[q.cells()].iter().map(|v| v.abs()).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        let end = (i + 1) as f64 * delta;
        match steps.last_mut() {
            Some(last) if last.0 == *v => last.1 = end,
            _ => steps.push((*v, end)),
        }
    }
    StepFunction {
        steps,
        total: vals.len() as f64 * delta,
    }
}

/// A median of the cell values of `f` on `Q`: a value `m` with
/// `|{f > m}| <= |Q|/2` and `|{f < m}| <= |Q|/2`, the smallest such among the
/// cell values.
pub fn median(f: &GridFunction, q: &Cube) -> Result<f64> {
    if q.end() > f.domain().cell_count() {
        return Err(Error::Geometry("cube escapes the domain".into()));
    }
    let mut vals: Vec<f64> = f.values()[q.cells()].to_vec();
    vals.sort_by(|a, b| a.total_cmp(b));
    let m = vals.len();
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && vals[j] == vals[i] {
            j += 1;
        }
        // i cells strictly below, m - j strictly above
        if 2 * i <= m && 2 * (m - j) <= m {
            return Ok(vals[i]);
        }
        i = j;
    }
    unreachable!("some cell value always satisfies the median inequalities")
}
