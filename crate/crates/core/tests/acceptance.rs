//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers. Everything runs on grids with at most 2^14 cells.
//!
//! Golden-value tracking (criterion 7) reads `tests/golden_constants.json`;
//! regenerate it with `CPLAB_FREEZE_GOLDENS=1 cargo test -p cplab --test
//! acceptance c7 -- --nocapture` after an intentional change.

use cplab::grid::{CellSet, Cube, CubeFamily, GridDomain, GridFunction};
use cplab::lab::{
    adversarial_fs, best_constant, bmo_seminorm, corpus, hunt, InequalityKind,
};
use cplab::maximal::{
    local_sharp, maximal_indicator, maximal_values, mchi_check, sharp, Lattice,
};
use cplab::norms::lorentz_r1_bound;
use cplab::orlicz::{holder_check, orlicz_average, stein_ratio, YoungFunction};
use cplab::oscillation::{oscillation, OscKind};
use cplab::rearrange::{rearrangement, rearrangement_on_cube};
use cplab::singular::{dual_sign_test, grand_maximal, hilbert_star, hilbert_truncated, reverse_llogl};
use cplab::sparse::{dominate, layer_diagnostic};
use cplab::weights::{
    cp_constant, generate, reverse_holder, scp_search, top_slice, whitney, SearchStrategy,
    WeightSpec,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn dom(k: u32, l: u32) -> GridDomain {
    GridDomain::new(k, l).unwrap()
}

fn random_f(d: &GridDomain, rng: &mut StdRng, lo: f64, hi: f64) -> GridFunction {
    GridFunction::from_values(
        d,
        (0..d.cell_count()).map(|_| rng.gen_range(lo..hi)).collect(),
    )
    .unwrap()
}

fn random_cube(d: &GridDomain, rng: &mut StdRng, min_len: usize) -> Cube {
    let n = d.cell_count();
    let start = rng.gen_range(0..=(n - min_len));
    let len = rng.gen_range(min_len..=(n - start));
    Cube::from_cells(d, start, len).unwrap()
}

// ---------------------------------------------------------------------------
// criterion 1: exactness oracles
// ---------------------------------------------------------------------------

fn oracle_oscillation(f: &GridFunction, q: &Cube, lambda: f64, kind: OscKind) -> f64 {
    let vals: Vec<f64> = f.values()[q.cells()].to_vec();
    let mut candidates = vals.clone();
    for i in 0..vals.len() {
        for j in i..vals.len() {
            candidates.push((vals[i] + vals[j]) / 2.0);
        }
    }
    let t = lambda * q.measure(f.domain());
    let mut best = f64::INFINITY;
    match kind {
        OscKind::Standard => {
            for c in candidates {
                let shifted = GridFunction::from_values(
                    f.domain(),
                    f.values()
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| if q.contains_cell(i) { v - c } else { 0.0 })
                        .collect(),
                )
                .unwrap();
                best = best.min(rearrangement_on_cube(&shifted, q).eval(t));
            }
        }
        OscKind::Tilde => {
            // enumerate sorted windows holding enough mass directly
            let m = vals.len();
            let keep = m - ((lambda * m as f64).floor() as usize).min(m - 1);
            let mut sorted = vals;
            sorted.sort_by(|a, b| a.total_cmp(b));
            for i in 0..=(m - keep) {
                best = best.min(sorted[i + keep - 1] - sorted[i]);
            }
        }
    }
    best
}

fn oracle_hilbert_quadrature(f: &GridFunction, cell: usize, eps: f64) -> f64 {
    let d = f.domain();
    let x = d.midpoint(cell);
    let delta = d.delta();
    #[allow(clippy::too_many_arguments)]
    fn simpson(
        g: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = g(lm);
        let frm = g(rm);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(g, a, m, fa, flm, fm, tol / 2.0, depth - 1)
                + simpson(g, m, b, fm, frm, fb, tol / 2.0, depth - 1)
        }
    }
    let mut acc = 0.0;
    for j in 0..f.len() {
        let v = f.value(j);
        if v == 0.0 {
            continue;
        }
        let u = j as f64 * delta;
        let vend = (j + 1) as f64 * delta;
        for (lo, hi) in [(u, vend.min(x - eps)), (u.max(x + eps), vend)] {
            if hi > lo + 1e-300 {
                let g = move |y: f64| 1.0 / (x - y);
                let m = 0.5 * (lo + hi);
                acc += v * simpson(&g, lo, hi, g(lo), g(m), g(hi), 1e-13, 44);
            }
        }
    }
    acc / std::f64::consts::PI
}

#[test]
fn c1_exactness_oracles() {
    let mut rng = StdRng::seed_from_u64(0xC1);

    // rearrangement: equimeasurability against direct level-set counting
    let d = dom(2, 5);
    for _ in 0..100 {
        let f = random_f(&d, &mut rng, -3.0, 3.0);
        let s = CellSet::from_cells(&d, (0..d.cell_count()).filter(|_| rng.gen_bool(0.6)));
        let r = rearrangement(&f, Some(&s));
        for alpha in f.values().iter().map(|v| v.abs()) {
            let direct =
                s.iter_cells().filter(|&c| f.value(c).abs() > alpha).count() as f64 * d.delta();
            assert_eq!(r.level_measure(alpha), direct);
        }
    }

    // oscillation, both kinds, against the brute-force oracle
    let d2 = dom(1, 4);
    for case in 0..100 {
        let f = random_f(&d2, &mut rng, -2.0, 2.0);
        let q = random_cube(&d2, &mut rng, 3);
        let lambda = [0.125, 0.25, 0.375][case % 3];
        for kind in [OscKind::Standard, OscKind::Tilde] {
            let got = oscillation(&f, &q, lambda, kind).unwrap();
            let want = oracle_oscillation(&f, &q, lambda, kind);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                "oscillation {kind:?}: {got} vs {want}"
            );
        }
    }

    // Orlicz average: indicator closed form and the defining infimum
    let d3 = dom(2, 4);
    for case in 0..100 {
        let phi = if case % 2 == 0 {
            YoungFunction::LLogL
        } else {
            YoungFunction::ExpL
        };
        if case < 50 {
            let q = random_cube(&d3, &mut rng, 4);
            let e_len = rng.gen_range(1..=q.len_cells());
            let e = Cube::from_cells(&d3, q.start(), e_len).unwrap();
            let f = GridFunction::indicator(&d3, &e);
            let got = orlicz_average(&f, &q, phi).unwrap();
            let want = 1.0 / phi.inverse(q.len_cells() as f64 / e_len as f64);
            assert!(
                (got - want).abs() <= 1e-10 * want,
                "indicator form {phi:?}: {got} vs {want}"
            );
        } else {
            let f = random_f(&d3, &mut rng, 0.0, 4.0);
            let q = random_cube(&d3, &mut rng, 2);
            let alpha = orlicz_average(&f, &q, phi).unwrap();
            if alpha == 0.0 {
                continue;
            }
            let constraint = |a: f64| -> f64 {
                q.cells()
                    .map(|c| phi.eval(f.value(c).abs() / a))
                    .sum::<f64>()
                    / q.len_cells() as f64
            };
            assert!(constraint(alpha) <= 1.0 + 1e-10);
            assert!(constraint(alpha * (1.0 - 1e-11)) > 1.0);
        }
    }

    // truncated transform against adaptive quadrature
    let d4 = dom(2, 4);
    for _ in 0..100 {
        let f = random_f(&d4, &mut rng, -2.0, 2.0);
        let cell = rng.gen_range(0..d4.cell_count());
        let eps = rng.gen_range(0.02..2.0);
        let got = hilbert_truncated(&f, cell, eps).unwrap();
        let want = oracle_hilbert_quadrature(&f, cell, eps);
        assert!(
            (got - want).abs() <= 1e-6 * want.abs().max(1.0),
            "transform: {got} vs {want}"
        );
    }

    // continuum maximal indicator against endpoint brute force
    let d5 = dom(3, 2);
    for _ in 0..100 {
        let q = random_cube(&d5, &mut rng, 1);
        let m = maximal_indicator(&d5, &q);
        let a = q.left(&d5);
        let b = a + q.length(&d5);
        let cell = rng.gen_range(0..d5.cell_count());
        let x = d5.midpoint(cell);
        // the optimum over intervals containing x is attained with endpoints
        // in {a, b, x} plus a fine sweep for safety
        let mut cands = vec![a, b, x];
        for t in 0..200 {
            cands.push(t as f64 * d5.length() / 200.0);
        }
        let mut best = 0.0f64;
        for &lo in &cands {
            for &hi in &cands {
                if lo <= x && x <= hi && hi > lo {
                    let overlap = (hi.min(b) - lo.max(a)).max(0.0);
                    best = best.max(overlap / (hi - lo));
                }
            }
        }
        let got = m.value(cell);
        assert!(
            got >= best - 1e-12 && (got - best).abs() <= 1e-10 * best.max(1.0),
            "indicator maximal at {x}: {got} vs {best}"
        );
    }

    println!("criterion 1 PASS: exactness oracles (rearrangement, oscillation, orlicz, transform, maximal indicator; 100 cases each)");
}

// ---------------------------------------------------------------------------
// criterion 2: fixed-constant assertions
// ---------------------------------------------------------------------------

#[test]
fn c2_fixed_constant_assertions() {
    let mut rng = StdRng::seed_from_u64(0xC2);

    // dilation lemma with constant 9 (ratio normalized to <= 1)
    let d = dom(2, 5);
    for _ in 0..200 {
        let f = random_f(&d, &mut rng, -2.0, 2.0);
        let alpha = rng.gen_range(0.05..2.0);
        let rep = mchi_check(&f, alpha).unwrap();
        assert!(rep.worst_ratio <= 1.0 + 1e-9, "ratio {}", rep.worst_ratio);
    }

    // tilde oscillation at most twice the standard one
    let d2 = dom(2, 4);
    for _ in 0..200 {
        let f = random_f(&d2, &mut rng, -5.0, 5.0);
        let q = random_cube(&d2, &mut rng, 2);
        let lambda = rng.gen_range(0.05..0.95);
        let s = oscillation(&f, &q, lambda, OscKind::Standard).unwrap();
        let t = oscillation(&f, &q, lambda, OscKind::Tilde).unwrap();
        assert!(t <= 2.0 * s * (1.0 + 1e-12) + 1e-15);
    }

    // weak (1,1) of the grid maximal operator with constant 3
    for _ in 0..200 {
        let f = random_f(&d2, &mut rng, -2.0, 2.0);
        let m = maximal_values(&f, Lattice::AllGridAligned);
        let alpha = rng.gen_range(0.05..2.5);
        let level =
            m.values().iter().filter(|&&v| v > alpha).count() as f64 * d2.delta();
        let l1 = f.abs().integrate_all();
        assert!(alpha * level <= 3.0 * l1 * (1.0 + 1e-12));
    }

    // sparse domination: sparseness >= 1/6, pointwise constant <= 4
    let d3 = dom(2, 5);
    for _ in 0..200 {
        let f = random_f(&d3, &mut rng, -2.0, 2.0);
        let res = dominate(&f, &d3.root()).unwrap();
        assert!(res.family.eta >= 1.0 / 6.0, "eta {}", res.family.eta);
        assert!(res.constant <= 4.0, "constant {}", res.constant);
    }

    // generation layering bound (1 - eta)^(2^k)
    let mut layer_checks = 0usize;
    for _ in 0..67 {
        let f = random_f(&d3, &mut rng, -0.3, 0.3);
        let res = dominate(&f, &d3.root()).unwrap();
        if res.family.cubes.is_empty() {
            continue;
        }
        for k in [1u32, 2, 3] {
            let rep = layer_diagnostic(&res.family, &f, k).unwrap();
            assert!(rep.worst_ratio <= 1.0 + 1e-9, "layer ratio {}", rep.worst_ratio);
            assert!(rep.exclusive_sets_disjoint);
            layer_checks += 1;
        }
    }
    assert!(layer_checks >= 200, "only {layer_checks} layering checks ran");

    // rearrangement-integral bound for the normalized L^r average
    let d4 = dom(2, 4);
    for _ in 0..200 {
        let w = random_f(&d4, &mut rng, 0.01, 4.0);
        let q = random_cube(&d4, &mut rng, 1);
        let r = [1.5, 2.0, 4.0][rng.gen_range(0..3)];
        let (lhs, rhs) = lorentz_r1_bound(&w, &q, r).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    // top-slice embedding and the reverse inclusion, exact on cells
    let d5 = dom(2, 5);
    for _ in 0..200 {
        let w = random_f(&d5, &mut rng, 0.01, 3.0);
        let lambda = [0.25, 0.125][rng.gen_range(0..2)];
        // random disjoint dyadic cubes with at least 1/lambda cells each
        let min_len = (1.0 / lambda) as usize;
        let mut cubes: Vec<Cube> = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let level = rng.gen_range(0..=(d5.max_level() - min_len.trailing_zeros()));
            let len = 1usize << (d5.max_level() - level);
            let block = rng.gen_range(0..(d5.cell_count() / len));
            let cand = Cube::dyadic(&d5, level, block).unwrap();
            if !cubes.iter().any(|q| q.intersects(&cand)) {
                cubes.push(cand);
            }
        }
        let mut union_e = CellSet::empty(&d5);
        let mut union_q = CellSet::empty(&d5);
        let mut union_3q = CellSet::empty(&d5);
        for q in &cubes {
            let e = top_slice(&w, q, lambda).unwrap();
            union_e = union_e.union(&e);
            union_q = union_q.union(&CellSet::from_cube(&d5, q));
            union_3q = union_3q.union(&CellSet::from_cube(&d5, &q.dilate3(&d5)));
        }
        // {M chi_E > 3 lambda} inside the union of triples
        let me = maximal_values(&union_e.indicator(&d5), Lattice::AllGridAligned);
        for c in 0..d5.cell_count() {
            if me.value(c) > 3.0 * lambda {
                assert!(union_3q.contains(c), "embedding fails at cell {c}");
            }
        }
        // union of triples inside {M chi_{union Q} >= 1/3}
        let mq = maximal_values(&union_q.indicator(&d5), Lattice::AllGridAligned);
        for c in union_3q.iter_cells() {
            assert!(mq.value(c) >= 1.0 / 3.0 - 1e-12, "inclusion fails at cell {c}");
        }
    }

    println!("criterion 2 PASS: fixed constants (9, 2, 3, 1/6 with c<=4, layering, rearrangement bound, embeddings) with zero violations");
}

// ---------------------------------------------------------------------------
// criterion 3: growth of the single-cube constant for the indicator weight
// ---------------------------------------------------------------------------

#[test]
fn c3_indicator_weight_growth() {
    let mut constants = Vec::new();
    for k in [4u32, 6, 8] {
        let d = dom(k, 2);
        let w = generate(
            &WeightSpec::Indicator {
                left: 0.0,
                length: 1.0,
            },
            &d,
        )
        .unwrap();
        let rep = cp_constant(&w, 1.5, 2.0).unwrap();
        constants.push(rep.constant);
    }
    for (i, pair) in constants.windows(2).enumerate() {
        let exponent = (pair[1] / pair[0]).log2() / 2.0;
        assert!(
            (0.4..=0.6).contains(&exponent),
            "step {i}: growth exponent {exponent} outside [0.4, 0.6]"
        );
    }
    println!(
        "criterion 3 PASS: single-cube constants {constants:?} grow at rate 2^(K/2) within 20%"
    );
}

// ---------------------------------------------------------------------------
// criterion 4: finiteness and refinement stability on power-weight fixtures
// ---------------------------------------------------------------------------

#[test]
fn c4_power_weight_fixtures() {
    let k = 3u32;
    let r = 1.5;
    let mut worst_drift = 0.0f64;
    for a in [-0.5, 0.0, 1.0] {
        for p in [1.5, 2.0] {
            let mut per_l: Vec<Vec<f64>> = Vec::new();
            for l in [3u32, 5] {
                let d = dom(k, l);
                let w = generate(&WeightSpec::Power { a }, &d).unwrap();
                let fs = corpus(&d, 0xC4);
                let consts = vec![
                    reverse_holder(&w, r, Lattice::Dyadic).unwrap().constant,
                    cp_constant(&w, p, r).unwrap().constant,
                    scp_search(&w, p, r, 24, SearchStrategy::LevelSets, 0)
                        .unwrap()
                        .constant,
                    best_constant(InequalityKind::Asm, &w, &fs, p, None)
                        .unwrap()
                        .best_ratio,
                    best_constant(InequalityKind::Fsw, &w, &fs, p, None)
                        .unwrap()
                        .best_ratio,
                    best_constant(InequalityKind::Cfw, &w, &fs, p, None)
                        .unwrap()
                        .best_ratio,
                ];
                for c in &consts {
                    assert!(c.is_finite() && *c > 0.0, "a={a} p={p} l={l}: {consts:?}");
                }
                per_l.push(consts);
            }
            for (idx, name) in ["rh", "cp", "scp", "asm", "fsw", "cfw"].iter().enumerate() {
                let lo = per_l[0][idx].min(per_l[1][idx]);
                let hi = per_l[0][idx].max(per_l[1][idx]);
                let drift = hi / lo - 1.0;
                worst_drift = worst_drift.max(drift);
                assert!(
                    drift < 0.15,
                    "a={a} p={p} {name}: drift {drift:.3} across L -> L+2 ({} vs {})",
                    per_l[0][idx],
                    per_l[1][idx]
                );
            }
        }
    }
    println!(
        "criterion 4 PASS: power-weight estimators finite, worst refinement drift {:.1}%",
        100.0 * worst_drift
    );
}

// ---------------------------------------------------------------------------
// criterion 5: necessity machinery
// ---------------------------------------------------------------------------

#[test]
fn c5_necessity_machinery() {
    // adversarial profile: grid BMO seminorm stable under refinement at each
    // level lambda = 2^-1 .. 2^-10
    let k = 4u32;
    let mut worst = 0.0f64;
    for j in 1..=10u32 {
        let lambda = 0.5f64.powi(j as i32);
        let mut norms = Vec::new();
        for l in [2u32, 4] {
            let d = dom(k, l);
            let e = CellSet::from_cells(&d, 0..(1usize << l)); // E = [0,1)
            let f = adversarial_fs(&d, &e, lambda).unwrap();
            norms.push(bmo_seminorm(&f));
        }
        let drift = norms[1].max(norms[0]) / norms[1].min(norms[0]) - 1.0;
        worst = worst.max(drift);
        assert!(
            drift <= 0.15,
            "lambda = 2^-{j}: seminorms {norms:?} drift {drift:.3}"
        );
    }

    // weak-type sharp-function constant for the indicator weight grows in K
    // once the corpus contains the adversarial profiles
    let mut ratios = Vec::new();
    for k in [4u32, 6, 8] {
        let l = 2u32;
        let d = dom(k, l);
        let w = generate(
            &WeightSpec::Indicator {
                left: 0.0,
                length: 1.0,
            },
            &d,
        )
        .unwrap();
        let unit = 1usize << l; // cells of [0,1)
        let mut fs: Vec<GridFunction> = Vec::new();
        for e_cells in [unit, unit / 2] {
            let e = CellSet::from_cells(&d, 0..e_cells.max(1));
            for j in 2..=(k + 2) {
                let lambda = 0.5f64.powi(j as i32);
                fs.push(adversarial_fs(&d, &e, lambda).unwrap());
            }
        }
        let rep = best_constant(InequalityKind::Fsw, &w, &fs, 1.5, None).unwrap();
        ratios.push(rep.best_ratio);
    }
    assert!(
        ratios[0] < ratios[1] && ratios[1] < ratios[2],
        "expected monotone growth, found {ratios:?}"
    );

    println!(
        "criterion 5 PASS: adversarial seminorm refinement-stable at every level (worst {:.1}%), weak-type constants grow {ratios:?}",
        100.0 * worst
    );
}

// ---------------------------------------------------------------------------
// criterion 6: duality identity and the grand-maximal bound
// ---------------------------------------------------------------------------

#[test]
fn c6_duality() {
    let d = dom(2, 5); // 128 cells
    let mut rng = StdRng::seed_from_u64(0xC6);
    let mut done = 0usize;
    let mut worst_rel = 0.0f64;
    while done < 50 {
        let w = random_f(&d, &mut rng, 0.0, 2.0);
        if w.values().iter().all(|&v| v == 0.0) {
            continue;
        }
        // random 3-separated family: triples disjoint and inside the domain
        let mut cubes: Vec<Cube> = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let len = rng.gen_range(2..=8usize);
            let start = rng.gen_range(len..(d.cell_count() - 2 * len));
            let cand = Cube::from_cells(&d, start, len).unwrap();
            let t = cand.dilate3(&d);
            let clear = cubes
                .iter()
                .all(|q| {
                    let tq = q.dilate3(&d);
                    t.end() <= tq.start() || tq.end() <= t.start()
                });
            if clear {
                cubes.push(cand);
            }
        }
        if cubes.is_empty() {
            continue;
        }
        let fam = CubeFamily::arbitrary(cubes);
        let rep = dual_sign_test(&w, &fam, 1.5).unwrap();
        assert!(
            rep.identity_max_rel_err <= 1e-8,
            "duality identity error {}",
            rep.identity_max_rel_err
        );
        assert!(
            rep.sum_lhs <= rep.bound_rhs * (1.0 + 1e-9) + 1e-12,
            "bound violated: {} > {}",
            rep.sum_lhs,
            rep.bound_rhs
        );
        worst_rel = worst_rel.max(rep.identity_max_rel_err);
        done += 1;
    }
    println!(
        "criterion 6 PASS: duality identity within {worst_rel:.2e} on 50 families, bound never violated"
    );
}

// ---------------------------------------------------------------------------
// criterion 7: golden-value tracking
// ---------------------------------------------------------------------------

#[derive(serde::Serialize, serde::Deserialize)]
struct Goldens {
    holder: f64,
    stein: f64,
    reverse_llogl: f64,
    sharp_vs_local_lower: f64,
    sharp_vs_local_upper: f64,
    whitney_c1: f64,
    whitney_c2: f64,
    grand_maximal: f64,
}

fn measure_goldens() -> Goldens {
    let mut rng = StdRng::seed_from_u64(0xC7);

    // Hölder subset estimate constant
    let d = dom(2, 4);
    let mut holder: f64 = 0.0;
    for _ in 0..200 {
        let f = random_f(&d, &mut rng, -4.0, 4.0);
        let q = random_cube(&d, &mut rng, 2);
        let picks: Vec<usize> = q.cells().filter(|_| rng.gen_bool(0.4)).collect();
        if picks.is_empty() {
            continue;
        }
        let e = CellSet::from_cells(&d, picks);
        let (lhs, rhs) = holder_check(&f, &e, &q).unwrap();
        if rhs > 0.0 {
            holder = holder.max(lhs / rhs);
        }
    }

    // maximal-function lower bound for the L log L average
    let mut stein: f64 = 0.0;
    for case in 0..50 {
        let f = if case % 2 == 0 {
            random_f(&d, &mut rng, 0.0, 3.0)
        } else {
            let spike = rng.gen_range(0..d.cell_count());
            GridFunction::from_values(
                &d,
                (0..d.cell_count())
                    .map(|i| if i == spike { 16.0 } else { 0.25 })
                    .collect(),
            )
            .unwrap()
        };
        let q = random_cube(&d, &mut rng, 4);
        if q.cells().all(|c| f.value(c) == 0.0) {
            continue;
        }
        stein = stein.max(stein_ratio(&f, &q).unwrap());
    }

    // reverse LlogL constant over a spiky weight corpus
    let d2 = dom(3, 3);
    let mut llogl: f64 = 0.0;
    let mut weights: Vec<GridFunction> = Vec::new();
    for seed in 0..90u64 {
        weights.push(generate(
            &WeightSpec::Random {
                seed,
                roughness: 2.0,
            },
            &d2,
        )
        .unwrap());
    }
    for levels in [2u32, 4, 6] {
        weights.push(generate(&WeightSpec::Lacunary { levels, gain: 3.0 }, &d2).unwrap());
    }
    for a in [-0.5, 0.5, 1.0] {
        weights.push(generate(&WeightSpec::Power { a }, &d2).unwrap());
    }
    for (i, w) in weights.iter().enumerate() {
        let len = 8 + (i % 2) * 8;
        let q = Cube::from_cells(&d2, 24, len).unwrap();
        let (lhs, rhs) = reverse_llogl(w, &q).unwrap();
        if rhs > 0.0 {
            llogl = llogl.max(lhs / rhs);
        }
    }

    // two-sided comparison of the sharp function with M(local sharp)
    let d3 = dom(2, 4);
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    for _ in 0..100 {
        let f = random_f(&d3, &mut rng, -2.0, 2.0);
        let s = sharp(&f);
        let mls = maximal_values(&local_sharp(&f, 0.25).unwrap(), Lattice::AllGridAligned);
        for c in 0..d3.cell_count() {
            if mls.value(c) > 1e-12 {
                let ratio = s.value(c) / mls.value(c);
                lower = lower.min(ratio);
                upper = upper.max(ratio);
            }
        }
    }

    // Whitney cover constants at R = 3
    let d4 = dom(2, 6);
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    let mut made = 0;
    while made < 50 {
        let omega = CellSet::from_cells(
            &d4,
            (0..d4.cell_count()).filter(|_| rng.gen_bool(0.7)),
        );
        if omega.is_empty() || omega.cell_count() == d4.cell_count() {
            continue;
        }
        let cover = whitney(&d4, &omega, 3.0).unwrap();
        c1 = c1.max(cover.c1);
        c2 = c2.max(cover.c2 as f64);
        made += 1;
    }

    // grand maximal against star-plus-maximal
    let d5 = dom(2, 5);
    let mut mt: f64 = 0.0;
    for _ in 0..50 {
        let f = random_f(&d5, &mut rng, -2.0, 2.0);
        let g = grand_maximal(&f);
        let star = hilbert_star(&f);
        let m = maximal_values(&f, Lattice::AllGridAligned);
        for c in 0..d5.cell_count() {
            let denom = star.value(c) + m.value(c);
            if denom > 1e-9 {
                mt = mt.max(g.value(c) / denom);
            }
        }
    }

    Goldens {
        holder,
        stein,
        reverse_llogl: llogl,
        sharp_vs_local_lower: lower,
        sharp_vs_local_upper: upper,
        whitney_c1: c1,
        whitney_c2: c2,
        grand_maximal: mt,
    }
}

#[test]
fn c7_golden_value_tracking() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden_constants.json");
    let measured = measure_goldens();
    if std::env::var("CPLAB_FREEZE_GOLDENS").is_ok() {
        std::fs::write(&path, serde_json::to_string_pretty(&measured).unwrap()).unwrap();
        println!("criterion 7: goldens frozen to {}", path.display());
        return;
    }
    let frozen: Goldens = serde_json::from_str(
        &std::fs::read_to_string(&path).expect("golden_constants.json is checked in"),
    )
    .unwrap();
    for (name, got, want) in [
        ("holder", measured.holder, frozen.holder),
        ("stein", measured.stein, frozen.stein),
        ("reverse_llogl", measured.reverse_llogl, frozen.reverse_llogl),
        (
            "sharp_vs_local_lower",
            measured.sharp_vs_local_lower,
            frozen.sharp_vs_local_lower,
        ),
        (
            "sharp_vs_local_upper",
            measured.sharp_vs_local_upper,
            frozen.sharp_vs_local_upper,
        ),
        ("whitney_c1", measured.whitney_c1, frozen.whitney_c1),
        ("whitney_c2", measured.whitney_c2, frozen.whitney_c2),
        ("grand_maximal", measured.grand_maximal, frozen.grand_maximal),
    ] {
        assert!(
            (got - want).abs() <= 0.10 * want.abs(),
            "{name} regressed beyond 10%: measured {got}, frozen {want}"
        );
    }
    println!(
        "criterion 7 PASS: tracked constants within 10% of frozen values (holder {:.3}, stein {:.3}, llogl {:.3}, sharp/local [{:.3}, {:.3}], whitney [{:.1}, {:.0}], grand {:.3})",
        measured.holder,
        measured.stein,
        measured.reverse_llogl,
        measured.sharp_vs_local_lower,
        measured.sharp_vs_local_upper,
        measured.whitney_c1,
        measured.whitney_c2,
        measured.grand_maximal
    );
}

// ---------------------------------------------------------------------------
// criterion 8: determinism
// ---------------------------------------------------------------------------

#[test]
fn c8_determinism() {
    let d = dom(2, 3);
    let w = generate(
        &WeightSpec::Random {
            seed: 5,
            roughness: 1.5,
        },
        &d,
    )
    .unwrap();
    let a = scp_search(&w, 1.5, 2.0, 80, SearchStrategy::Anneal, 31).unwrap();
    let b = scp_search(&w, 1.5, 2.0, 80, SearchStrategy::Anneal, 31).unwrap();
    assert_eq!(a.to_json(), b.to_json());

    let h1 = hunt(1.5, 1.5, 8.0, &d, 30, 13).unwrap();
    let h2 = hunt(1.5, 1.5, 8.0, &d, 30, 13).unwrap();
    assert_eq!(h1.trajectory_hash, h2.trajectory_hash);
    assert_eq!(
        serde_json::to_string(&h1).unwrap(),
        serde_json::to_string(&h2).unwrap()
    );
    // the command-level leg of this criterion (byte-identical CSV outputs for
    // a fixed config and seed) runs in the CLI crate's integration tests
    println!("criterion 8 PASS: family search and hunt reproduce byte-identical reports per seed");
}
