//! Shared helpers for the integration suites: an independent matrix
//! exponential oracle and the standard base x satellite battery.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qwalk_core::{CoronaSpec, Graph};

/// exp(-i t A) by scaling and squaring a Taylor series. Shares nothing
/// with the eigendecomposition route under test.
pub fn transition_oracle(a: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut m = DMatrix::from_fn(n, n, |r, c| Complex64::new(0.0, -t * a[(r, c)]));
    let bound: f64 = m
        .row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if bound > 0.5 {
        (bound / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 2f64.powi(squarings as i32);
    m = m.map(|z| z / scale);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=25 {
        term = (&term * &m).map(|z| z / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Seven regular connected bases crossed with five regular satellites.
pub fn battery() -> Vec<(String, CoronaSpec)> {
    let bases = [
        ("K2", Graph::complete(2).unwrap()),
        ("C4", Graph::cycle(4).unwrap()),
        ("C5", Graph::cycle(5).unwrap()),
        ("C6", Graph::cycle(6).unwrap()),
        ("K4", Graph::complete(4).unwrap()),
        ("Q3", Graph::hypercube(3).unwrap()),
        ("Petersen", Graph::petersen()),
    ];
    let satellites = [
        ("K1", Graph::complete(1).unwrap()),
        ("K2", Graph::complete(2).unwrap()),
        ("2K1", Graph::new(2, Vec::<(usize, usize)>::new()).unwrap()),
        ("C4", Graph::cycle(4).unwrap()),
        ("K3", Graph::complete(3).unwrap()),
    ];
    let mut out = Vec::new();
    for (bn, b) in &bases {
        for (sn, s) in &satellites {
            let spec = CoronaSpec::uniform(b.clone(), s.clone()).expect("battery spec is valid");
            out.push((format!("{bn}*{sn}"), spec));
        }
    }
    out
}

pub fn assert_multiset_close(a: &[f64], b: &[f64], tol: f64, ctx: &str) {
    assert_eq!(a.len(), b.len(), "{ctx}: multiset sizes differ");
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| q.partial_cmp(p).expect("finite"));
    y.sort_by(|p, q| q.partial_cmp(p).expect("finite"));
    for (p, q) in x.iter().zip(&y) {
        assert!((p - q).abs() <= tol, "{ctx}: {p} vs {q} beyond {tol}");
    }
}

/// Largest absolute entry of a matrix difference.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}
