//! Fixture builders shared by the criterion benches.

use qwalk_core::{build_corona, eigendecompose, CoronaSpec, Graph, Spectrum};

/// Cycle base with one complete-graph satellite per vertex.
pub fn cycle_compound(n: usize, m: usize) -> Graph {
    let spec = CoronaSpec::uniform(Graph::cycle(n).unwrap(), Graph::complete(m).unwrap())
        .expect("valid compound parameters");
    build_corona(&spec).0
}

/// Numeric spectrum of the compound's adjacency matrix.
pub fn compound_spectrum(n: usize, m: usize) -> Spectrum {
    eigendecompose(&cycle_compound(n, m).adjacency_matrix()).expect("symmetric input")
}

/// Conjugate pairs (a ± b√5)/2, the shape the recognizer sees on
/// quadratic-spectrum inputs.
pub fn quadratic_family(pairs: usize) -> Vec<f64> {
    let root = 5f64.sqrt();
    let mut out = Vec::with_capacity(2 * pairs);
    for i in 0..pairs {
        let a = 2.0 * i as f64;
        let b = (i + 1) as f64;
        out.push((a + b * root) / 2.0);
        out.push((a - b * root) / 2.0);
    }
    out
}
