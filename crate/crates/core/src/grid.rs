//! Dyadic grid substrate: the bounded domain `[0, 2^K)` split into cells of
//! width `2^-L`, grid-aligned cubes (intervals), piecewise-constant functions,
//! cell sets, and exact integration.
//!
//! Every coordinate is a dyadic rational, so cube endpoints, measures and
//! integrals are exact in `f64` up to ordinary summation rounding.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Hard cap on `K + L` so brute-force oracles stay feasible.
pub const MAX_DEPTH: u32 = 26;

/// The domain `[0, 2^K)` with cells of width `2^-L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDomain {
    k: u32,
    l: u32,
}

impl GridDomain {
    pub fn new(k: u32, l: u32) -> Result<Self> {
        if k + l > MAX_DEPTH {
            return Err(Error::Parameter(format!(
                "K + L = {} exceeds the cap {MAX_DEPTH}",
                k + l
            )));
        }
        Ok(GridDomain { k, l })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Number of cells, `2^(K+L)`.
    pub fn cell_count(&self) -> usize {
        1usize << (self.k + self.l)
    }

    /// Cell width `2^-L` (exact).
    pub fn delta(&self) -> f64 {
        (0.5f64).powi(self.l as i32)
    }

    /// Domain length `2^K` (exact).
    pub fn length(&self) -> f64 {
        (2.0f64).powi(self.k as i32)
    }

    /// Midpoint of cell `i`.
    pub fn midpoint(&self, cell: usize) -> f64 {
        (cell as f64 + 0.5) * self.delta()
    }

    /// Number of dyadic levels: level 0 is the whole domain, level `K+L` is a
    /// single cell.
    pub fn max_level(&self) -> u32 {
        self.k + self.l
    }

    /// The whole domain as a cube (dyadic level 0).
    pub fn root(&self) -> Cube {
        Cube {
            start: 0,
            len: self.cell_count(),
            level: Some(0),
        }
    }
}

/// A grid-aligned interval `[start, start+len)` in cell units.
///
/// `level` is set iff the cube belongs to the domain's dyadic lattice, in
/// which case `len = 2^(K+L-level)` and `start` is a multiple of `len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    start: usize,
    len: usize,
    level: Option<u32>,
}

impl Cube {
    /// Grid-aligned cube from raw cell coordinates.
    pub fn from_cells(dom: &GridDomain, start: usize, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Parameter("cube length must be positive".into()));
        }
        if start + len > dom.cell_count() {
            return Err(Error::Geometry(format!(
                "cube [{start}, {}) escapes the domain of {} cells",
                start + len,
                dom.cell_count()
            )));
        }
        let level = if len.is_power_of_two() && start.is_multiple_of(len) {
            Some(dom.max_level() - len.trailing_zeros())
        } else {
            None
        };
        Ok(Cube { start, len, level })
    }

    /// Dyadic cube at `level` (0 = whole domain) with position `index`.
    pub fn dyadic(dom: &GridDomain, level: u32, index: usize) -> Result<Self> {
        if level > dom.max_level() {
            return Err(Error::Lattice(format!(
                "level {level} exceeds the finest level {}",
                dom.max_level()
            )));
        }
        let len = 1usize << (dom.max_level() - level);
        let start = index
            .checked_mul(len)
            .ok_or_else(|| Error::Lattice("dyadic index overflow".into()))?;
        if start + len > dom.cell_count() {
            return Err(Error::Lattice(format!(
                "dyadic cube (level {level}, index {index}) escapes the domain"
            )));
        }
        Ok(Cube {
            start,
            len,
            level: Some(level),
        })
    }

    /// Cube from real endpoints; errors unless both are cell multiples.
    pub fn from_reals(dom: &GridDomain, left: f64, length: f64) -> Result<Self> {
        let scale = dom.delta();
        let to_cells = |x: f64, what: &str| -> Result<usize> {
            let c = x / scale;
            let r = c.round();
            if (c - r).abs() > 1e-9 * c.abs().max(1.0) || r < 0.0 {
                return Err(Error::Alignment(format!(
                    "{what} {x} is not a nonnegative multiple of the cell width {scale}"
                )));
            }
            Ok(r as usize)
        };
        let start = to_cells(left, "left endpoint")?;
        let len = to_cells(length, "length")?;
        Cube::from_cells(dom, start, len)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len_cells(&self) -> usize {
        self.len
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn cells(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }

    pub fn dyadic_level(&self) -> Option<u32> {
        self.level
    }

    pub fn left(&self, dom: &GridDomain) -> f64 {
        self.start as f64 * dom.delta()
    }

    pub fn length(&self, dom: &GridDomain) -> f64 {
        self.len as f64 * dom.delta()
    }

    /// Lebesgue measure `|Q|`.
    pub fn measure(&self, dom: &GridDomain) -> f64 {
        self.length(dom)
    }

    pub fn contains_cell(&self, cell: usize) -> bool {
        cell >= self.start && cell < self.end()
    }

    pub fn contains(&self, other: &Cube) -> bool {
        self.start <= other.start && other.end() <= self.end()
    }

    pub fn intersects(&self, other: &Cube) -> bool {
        self.start < other.end() && other.start < self.end()
    }

    /// The dilation `3Q = [left - length, left + 2 length)` clipped to the domain.
    pub fn dilate3(&self, dom: &GridDomain) -> Cube {
        let start = self.start.saturating_sub(self.len);
        let end = (self.start + 2 * self.len).min(dom.cell_count());
        Cube {
            start,
            len: end - start,
            level: None,
        }
    }

    /// The unclipped `3Q` as real endpoints `(left, right)`.
    pub fn dilate3_reals(&self, dom: &GridDomain) -> (f64, f64) {
        let d = dom.delta();
        (
            (self.start as f64 - self.len as f64) * d,
            (self.start as f64 + 2.0 * self.len as f64) * d,
        )
    }

    /// Dyadic parent, if any (the root has none).
    pub fn parent(&self) -> Option<Cube> {
        let level = self.level?;
        if level == 0 {
            return None;
        }
        let len = self.len * 2;
        Some(Cube {
            start: self.start / len * len,
            len,
            level: Some(level - 1),
        })
    }
}

/// A finite union of cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    mask: Vec<bool>,
    count: usize,
}

impl CellSet {
    pub fn empty(dom: &GridDomain) -> Self {
        CellSet {
            mask: vec![false; dom.cell_count()],
            count: 0,
        }
    }

    pub fn full(dom: &GridDomain) -> Self {
        CellSet {
            mask: vec![true; dom.cell_count()],
            count: dom.cell_count(),
        }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let count = mask.iter().filter(|&&b| b).count();
        CellSet { mask, count }
    }

    pub fn from_cube(dom: &GridDomain, q: &Cube) -> Self {
        let mut mask = vec![false; dom.cell_count()];
        mask[q.cells()].fill(true);
        CellSet {
            mask,
            count: q.len_cells(),
        }
    }

    pub fn from_cells<I: IntoIterator<Item = usize>>(dom: &GridDomain, cells: I) -> Self {
        let mut mask = vec![false; dom.cell_count()];
        let mut count = 0;
        for c in cells {
            if !mask[c] {
                mask[c] = true;
                count += 1;
            }
        }
        CellSet { mask, count }
    }

    pub fn insert(&mut self, cell: usize) {
        if !self.mask[cell] {
            self.mask[cell] = true;
            self.count += 1;
        }
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.mask[cell]
    }

    pub fn cell_count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn num_cells_total(&self) -> usize {
        self.mask.len()
    }

    /// Lebesgue measure `count * 2^-L`.
    pub fn measure(&self, dom: &GridDomain) -> f64 {
        self.count as f64 * dom.delta()
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| if b { Some(i) } else { None })
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        let mask: Vec<bool> = self
            .mask
            .iter()
            .zip(&other.mask)
            .map(|(&a, &b)| a || b)
            .collect();
        CellSet::from_mask(mask)
    }

    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        self.mask
            .iter()
            .zip(&other.mask)
            .all(|(&a, &b)| !a || b)
    }

    /// Count of set cells inside `[start, end)`.
    pub fn count_in_range(&self, start: usize, end: usize) -> usize {
        self.mask[start..end].iter().filter(|&&b| b).count()
    }

    pub fn indicator(&self, dom: &GridDomain) -> GridFunction {
        let values = self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        GridFunction::from_values(dom, values).expect("indicator values are finite")
    }

    /// Prefix counts: `p[i]` = number of set cells among the first `i`.
    pub fn prefix_counts(&self) -> Vec<u32> {
        let mut p = Vec::with_capacity(self.mask.len() + 1);
        p.push(0u32);
        let mut acc = 0u32;
        for &b in &self.mask {
            acc += b as u32;
            p.push(acc);
        }
        p
    }
}

/// How a [`CubeFamily`] is constrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    Arbitrary,
    PairwiseDisjoint,
    RSeparated(f64),
}

/// A list of grid cubes with a verified structural kind.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFamily {
    cubes: Vec<Cube>,
    kind: FamilyKind,
}

impl CubeFamily {
    pub fn arbitrary(cubes: Vec<Cube>) -> Self {
        CubeFamily {
            cubes,
            kind: FamilyKind::Arbitrary,
        }
    }

    /// Verifies that interiors intersect in measure zero.
    pub fn pairwise_disjoint(cubes: Vec<Cube>) -> Result<Self> {
        let mut sorted: Vec<&Cube> = cubes.iter().collect();
        sorted.sort_by_key(|c| c.start);
        for w in sorted.windows(2) {
            if w[1].start < w[0].end() {
                return Err(Error::Family(format!(
                    "cubes [{},{}) and [{},{}) overlap",
                    w[0].start,
                    w[0].end(),
                    w[1].start,
                    w[1].end()
                )));
            }
        }
        Ok(CubeFamily {
            cubes,
            kind: FamilyKind::PairwiseDisjoint,
        })
    }

    /// Verifies that the (unclipped) `R`-dilates are pairwise disjoint.
    pub fn r_separated(cubes: Vec<Cube>, r: f64, dom: &GridDomain) -> Result<Self> {
        if r < 1.0 {
            return Err(Error::Parameter(format!("separation factor {r} < 1")));
        }
        let dil: Vec<(f64, f64)> = cubes.iter().map(|c| dilate_reals(c, r, dom)).collect();
        let mut order: Vec<usize> = (0..cubes.len()).collect();
        order.sort_by(|&a, &b| dil[a].0.total_cmp(&dil[b].0));
        for w in order.windows(2) {
            if dil[w[1]].0 < dil[w[0]].1 {
                return Err(Error::Family(format!(
                    "{r}-dilates of cubes {} and {} overlap",
                    w[0], w[1]
                )));
            }
        }
        Ok(CubeFamily {
            cubes,
            kind: FamilyKind::RSeparated(r),
        })
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// The union of the member cubes as a cell set.
    pub fn union_cells(&self, dom: &GridDomain) -> CellSet {
        let mut mask = vec![false; dom.cell_count()];
        for q in &self.cubes {
            mask[q.cells()].fill(true);
        }
        CellSet::from_mask(mask)
    }
}

/// Real endpoints of the `r`-dilate of a cube (same center, `r` times the length).
pub fn dilate_reals(q: &Cube, r: f64, dom: &GridDomain) -> (f64, f64) {
    let d = dom.delta();
    let left = q.start as f64 * d;
    let len = q.len as f64 * d;
    let pad = (r - 1.0) / 2.0 * len;
    (left - pad, left + len + pad)
}

/// A piecewise-constant real function on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dom: GridDomain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(dom: &GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != dom.cell_count() {
            return Err(Error::DomainMismatch(format!(
                "{} values for a domain of {} cells",
                values.len(),
                dom.cell_count()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite value {v}")));
        }
        Ok(GridFunction { dom: *dom, values })
    }

    pub fn constant(dom: &GridDomain, c: f64) -> Self {
        GridFunction {
            dom: *dom,
            values: vec![c; dom.cell_count()],
        }
    }

    /// Samples `g` at cell midpoints.
    pub fn from_fn(dom: &GridDomain, g: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..dom.cell_count()).map(|i| g(dom.midpoint(i))).collect();
        GridFunction::from_values(dom, values)
    }

    pub fn indicator(dom: &GridDomain, q: &Cube) -> Self {
        let mut values = vec![0.0; dom.cell_count()];
        values[q.cells()].fill(1.0);
        GridFunction { dom: *dom, values }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.dom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abs(&self) -> GridFunction {
        GridFunction {
            dom: self.dom,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> GridFunction {
        GridFunction {
            dom: self.dom,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Checks the weight contract: nonnegative and not identically zero.
    pub fn check_weight(&self) -> Result<()> {
        if self.values.iter().any(|&v| v < 0.0) {
            return Err(Error::Parameter("weight has a negative value".into()));
        }
        if self.values.iter().all(|&v| v == 0.0) {
            return Err(Error::Parameter("weight is identically zero".into()));
        }
        Ok(())
    }

    pub fn same_domain(&self, other: &GridFunction) -> Result<()> {
        if self.dom != other.dom {
            return Err(Error::DomainMismatch(
                "functions live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// Exact sum of `values[start..end] * delta`.
    pub fn integrate_cells(&self, start: usize, end: usize) -> f64 {
        let s: f64 = self.values[start..end].iter().sum();
        s * self.dom.delta()
    }

    /// `integral of f over the whole domain`.
    pub fn integrate_all(&self) -> f64 {
        self.integrate_cells(0, self.values.len())
    }

    /// `w(S) = integral of f over the cell set`.
    pub fn integrate_set(&self, s: &CellSet) -> f64 {
        let mut acc = 0.0;
        for c in s.iter_cells() {
            acc += self.values[c];
        }
        acc * self.dom.delta()
    }

    /// Average of `f` over a cube.
    pub fn average(&self, q: &Cube) -> f64 {
        self.integrate_cells(q.start(), q.end()) / q.measure(&self.dom)
    }

    /// Prefix sums of raw values: `p[i] = sum of values[0..i]`.
    pub fn prefix(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.values.len() + 1);
        p.push(0.0);
        let mut acc = 0.0;
        for &v in &self.values {
            acc += v;
            p.push(acc);
        }
        p
    }

    /// Serializes to the text format `gridfn 1 K=<k> L=<l>` + values.
    pub fn to_text(&self) -> String {
        let mut out = format!("gridfn 1 K={} L={}\n", self.dom.k, self.dom.l);
        for v in &self.values {
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty gridfn input".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "gridfn" || parts[1] != "1" {
            return Err(Error::Format(format!("bad gridfn header: {header:?}")));
        }
        let parse_field = |s: &str, name: &str| -> Result<u32> {
            s.strip_prefix(name)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad gridfn header field {s:?}")))
        };
        let k = parse_field(parts[2], "K=")?;
        let l = parse_field(parts[3], "L=")?;
        let dom = GridDomain::new(k, l)?;
        let mut values = Vec::with_capacity(dom.cell_count());
        for tok in lines.flat_map(|l| l.split_whitespace()) {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Format(format!("bad gridfn value {tok:?}")))?;
            values.push(v);
        }
        if values.len() != dom.cell_count() {
            return Err(Error::Format(format!(
                "expected {} values, found {}",
                dom.cell_count(),
                values.len()
            )));
        }
        GridFunction::from_values(&dom, values)
    }
}

/// Exact integral of `f` (or `f*w`) over a grid-aligned cube.
pub fn integrate(f: &GridFunction, q: &Cube, w: Option<&GridFunction>) -> Result<f64> {
    if q.end() > f.dom.cell_count() {
        return Err(Error::Geometry("cube escapes the domain".into()));
    }
    match w {
        None => Ok(f.integrate_cells(q.start(), q.end())),
        Some(w) => {
            f.same_domain(w)?;
            let mut acc = 0.0;
            for i in q.cells() {
                acc += f.values[i] * w.values[i];
            }
            Ok(acc * f.dom.delta())
        }
    }
}
