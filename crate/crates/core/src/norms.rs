//! Weighted strong, weak, and Lorentz-type norms.

use crate::error::{Error, Result};
use crate::grid::{Cube, GridFunction};
use crate::rearrange::rearrangement_on_cube;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Strong,
    Weak,
}

/// `||f||_{L^p(w)}` (strong) or `||f||_{L^{p,infty}(w)}` (weak).
///
/// The weak norm `sup_a a w({|f| > a})^{1/p}` is attained on the value set of
/// `|f|` when evaluated as `max_v v w({|f| >= v})^{1/p}`, which is how the sup
/// over each constancy interval of the distribution function closes.
pub fn weighted_norm(f: &GridFunction, w: &GridFunction, p: f64, kind: NormKind) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::Parameter(format!("exponent p = {p} must be positive")));
    }
    f.same_domain(w)?;
    w.check_weight()?;
    let delta = f.domain().delta();
    match kind {
        NormKind::Strong => {
            let mut acc = 0.0;
            for (v, wi) in f.values().iter().zip(w.values()) {
                if *v != 0.0 {
                    acc += v.abs().powf(p) * wi;
                }
            }
            Ok((acc * delta).powf(1.0 / p))
        }
        NormKind::Weak => {
            let mut order: Vec<usize> = (0..f.len()).collect();
            order.sort_by(|&a, &b| f.value(b).abs().total_cmp(&f.value(a).abs()));
            let mut best = 0.0f64;
            let mut wmass = 0.0;
            let mut i = 0;
            while i < order.len() {
                let v = f.value(order[i]).abs();
                let mut j = i;
                while j < order.len() && f.value(order[j]).abs() == v {
                    wmass += w.value(order[j]);
                    j += 1;
                }
                if v == 0.0 {
                    break;
                }
                best = best.max(v * (wmass * delta).powf(1.0 / p));
                i = j;
            }
            Ok(best)
        }
    }
}

/// Both sides of the embedding of the normalized `L^r` average into the
/// `L^{r,1}` rearrangement integral over a cube:
/// `lhs = ((1/|Q|) ∫_Q w^r)^{1/r}`,
/// `rhs = ∫_0^1 (w chi_Q)^*(lambda |Q|) d lambda / lambda^{1 - 1/r}`,
/// the integral evaluated in closed form per rearrangement step.
pub fn lorentz_r1_bound(w: &GridFunction, q: &Cube, r: f64) -> Result<(f64, f64)> {
    if r <= 1.0 {
        return Err(Error::Parameter(format!("exponent r = {r} must exceed 1")));
    }
    w.check_weight()?;
    if q.end() > w.domain().cell_count() {
        return Err(Error::Geometry("cube escapes the domain".into()));
    }
    let m = q.len_cells() as f64;
    let mean_r: f64 = q
        .cells()
        .map(|c| w.value(c).abs().powf(r))
        .sum::<f64>()
        / m;
    let lhs = mean_r.powf(1.0 / r);

    // Rearrangement of w|Q in mass coordinate; substitute lambda = t/|Q| so
    // each step [t0, t1) contributes value * r * ((t1/|Q|)^{1/r} - (t0/|Q|)^{1/r}).
    let rearr = rearrangement_on_cube(w, q);
    let total = rearr.total_measure();
    let mut rhs = 0.0;
    let mut prev = 0.0;
    for &(v, end) in rearr.steps() {
        let l0 = prev / total;
        let l1 = end / total;
        rhs += v * r * (l1.powf(1.0 / r) - l0.powf(1.0 / r));
        prev = end;
    }
    Ok((lhs, rhs))
}
