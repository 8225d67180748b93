//! Rough operator timings across grid sizes. Run with
//! `cargo run --release -p cplab --example bench`.

use cplab::grid::{GridDomain, GridFunction};
use cplab::maximal::{local_sharp, maximal_values, maximal_values_fast, sharp, Lattice};
use cplab::singular::{grand_maximal, hilbert_pair};
use std::time::Instant;

fn profile(name: &str, n: usize, f: impl FnOnce()) {
    let t = Instant::now();
    f();
    println!("{name:>18} N={n:<6} {:?}", t.elapsed());
}

fn main() {
    for (k, l) in [(6u32, 6u32), (7, 7)] {
        let d = GridDomain::new(k, l).unwrap();
        let n = d.cell_count();
        let f = GridFunction::from_fn(&d, |x| (x * 0.37).sin() + 0.2 * (x * 3.1).cos()).unwrap();
        profile("maximal all-grid", n, || {
            maximal_values(&f, Lattice::AllGridAligned);
        });
        profile("maximal dyadic", n, || {
            maximal_values(&f, Lattice::Dyadic);
        });
        profile("maximal fast", n, || {
            maximal_values_fast(&f);
        });
        profile("hilbert pair", n, || {
            hilbert_pair(&f);
        });
    }
    for (k, l) in [(5u32, 5u32), (6, 6)] {
        let d = GridDomain::new(k, l).unwrap();
        let n = d.cell_count();
        let f = GridFunction::from_fn(&d, |x| (x * 0.37).sin()).unwrap();
        profile("sharp", n, || {
            sharp(&f);
        });
    }
    for (k, l) in [(4u32, 4u32), (5, 5)] {
        let d = GridDomain::new(k, l).unwrap();
        let n = d.cell_count();
        let f = GridFunction::from_fn(&d, |x| (x * 0.37).sin()).unwrap();
        profile("local sharp", n, || {
            local_sharp(&f, 0.25).unwrap();
        });
        profile("grand maximal", n, || {
            grand_maximal(&f);
        });
    }
}
