//! Property tests for the structural invariants of the substrate: exact
//! additivity, equimeasurability, oscillation symmetries, norm comparisons,
//! and format round-trips.

use cplab::grid::{integrate, CellSet, Cube, GridDomain, GridFunction};
use cplab::maximal::{maximal_values, Lattice};
use cplab::norms::{lorentz_r1_bound, weighted_norm, NormKind};
use cplab::oscillation::{oscillation, OscKind};
use cplab::rearrange::rearrangement;
use cplab::sparse::{apply, SparseFamily};
use proptest::prelude::*;

const CELLS: usize = 32;

fn domain() -> GridDomain {
    GridDomain::new(1, 4).unwrap() // [0,2) in 32 cells
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-8.0f64..8.0, CELLS)
}

fn weight_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..8.0, CELLS)
}

fn cube() -> impl Strategy<Value = (usize, usize)> {
    (0..CELLS - 1).prop_flat_map(|start| {
        (Just(start), 1..=(CELLS - start))
    })
}

proptest! {
    #[test]
    fn integration_is_additive_over_splits(vals in values(), split in 1..CELLS) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals).unwrap();
        let left = Cube::from_cells(&d, 0, split).unwrap();
        let right = Cube::from_cells(&d, split, CELLS - split).unwrap();
        let whole = d.root();
        let lhs = integrate(&f, &whole, None).unwrap();
        let rhs = integrate(&f, &left, None).unwrap() + integrate(&f, &right, None).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn rearrangement_is_equimeasurable(vals in values(), alpha in 0.0f64..8.0) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals).unwrap();
        let r = rearrangement(&f, None);
        let direct = f.values().iter().filter(|v| v.abs() > alpha).count() as f64 * d.delta();
        prop_assert_eq!(r.level_measure(alpha), direct);
    }

    #[test]
    fn oscillation_affine_covariance(
        vals in values(),
        (start, len) in cube(),
        a in -4.0f64..4.0,
        b in -4.0f64..4.0,
        lambda in 0.05f64..0.95,
    ) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals.clone()).unwrap();
        let g = GridFunction::from_values(&d, vals.iter().map(|v| a * v + b).collect()).unwrap();
        let q = Cube::from_cells(&d, start, len).unwrap();
        for kind in [OscKind::Standard, OscKind::Tilde] {
            let of = oscillation(&f, &q, lambda, kind).unwrap();
            let og = oscillation(&g, &q, lambda, kind).unwrap();
            prop_assert!((og - a.abs() * of).abs() <= 1e-10 * of.max(1.0));
        }
    }

    #[test]
    fn oscillation_monotone_and_tilde_bounded(
        vals in values(),
        (start, len) in cube(),
        lambda in 0.05f64..0.45,
    ) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals).unwrap();
        let q = Cube::from_cells(&d, start, len).unwrap();
        let s1 = oscillation(&f, &q, lambda, OscKind::Standard).unwrap();
        let s2 = oscillation(&f, &q, 2.0 * lambda, OscKind::Standard).unwrap();
        prop_assert!(s2 <= s1 + 1e-15);
        let t = oscillation(&f, &q, lambda, OscKind::Tilde).unwrap();
        prop_assert!(t <= 2.0 * s1 * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn weak_norm_below_strong_norm(
        vals in values(),
        wvals in weight_values(),
        p in prop::sample::select(vec![0.5f64, 1.0, 1.5, 2.0]),
    ) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals).unwrap();
        let w = GridFunction::from_values(&d, wvals).unwrap();
        let weak = weighted_norm(&f, &w, p, NormKind::Weak).unwrap();
        let strong = weighted_norm(&f, &w, p, NormKind::Strong).unwrap();
        prop_assert!(weak <= strong * (1.0 + 1e-12));
    }

    #[test]
    fn lorentz_embedding_holds(
        wvals in weight_values(),
        (start, len) in cube(),
        r in prop::sample::select(vec![1.5f64, 2.0, 4.0]),
    ) {
        let d = domain();
        let w = GridFunction::from_values(&d, wvals).unwrap();
        let q = Cube::from_cells(&d, start, len).unwrap();
        let (lhs, rhs) = lorentz_r1_bound(&w, &q, r).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn gridfn_text_round_trips(vals in values()) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals).unwrap();
        let g = GridFunction::from_text(&f.to_text()).unwrap();
        prop_assert_eq!(f, g);
    }

    #[test]
    fn maximal_is_sublinear(vals in values(), wals in values()) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals.clone()).unwrap();
        let g = GridFunction::from_values(&d, wals.clone()).unwrap();
        let sum = GridFunction::from_values(
            &d,
            vals.iter().zip(&wals).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        let mf = maximal_values(&f, Lattice::AllGridAligned);
        let mg = maximal_values(&g, Lattice::AllGridAligned);
        let ms = maximal_values(&sum, Lattice::AllGridAligned);
        for c in 0..CELLS {
            prop_assert!(ms.value(c) <= mf.value(c) + mg.value(c) + 1e-12);
            prop_assert!(mf.value(c) >= f.value(c).abs() - 1e-15);
        }
    }

    #[test]
    fn sparse_operator_is_monotone(vals in values(), scale in 1.0f64..3.0) {
        let d = domain();
        let f = GridFunction::from_values(&d, vals.clone()).unwrap();
        let g = GridFunction::from_values(&d, vals.iter().map(|v| scale * v).collect()).unwrap();
        let s = SparseFamily::new(
            &d,
            vec![d.root(), Cube::dyadic(&d, 1, 0).unwrap(), Cube::dyadic(&d, 3, 5).unwrap()],
        )
        .unwrap();
        let af = apply(&s, &f);
        let ag = apply(&s, &g);
        for c in 0..CELLS {
            prop_assert!(af.value(c) <= ag.value(c) + 1e-12);
        }
    }

    #[test]
    fn indicator_maximal_is_bounded(cells in prop::collection::vec(any::<bool>(), CELLS)) {
        let d = domain();
        prop_assume!(cells.iter().any(|&b| b));
        let e = CellSet::from_mask(cells);
        let m = maximal_values(&e.indicator(&d), Lattice::AllGridAligned);
        for c in 0..CELLS {
            prop_assert!(m.value(c) <= 1.0 + 1e-15);
            if e.contains(c) {
                prop_assert!((m.value(c) - 1.0).abs() < 1e-15);
            }
        }
    }
}
