//! Numeric spectral decomposition of symmetric matrices into distinct
//! eigenvalues with orthogonal projectors, plus the walk quantities that
//! live on top of it: transition amplitudes, eigenvalue supports, strong
//! cospectrality, and fidelity scans.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest tolerated |A - A^T| entry before a matrix is rejected.
pub const SYMMETRY_LIMIT: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix asymmetry {deviation:.3e} exceeds {limit:.3e}")]
    NotSymmetric { deviation: f64, limit: f64 },
    #[error("vertex {vertex} out of range for dimension {dim}")]
    VertexOutOfRange { vertex: usize, dim: usize },
    #[error("scan needs at least 2 steps, got {0}")]
    ScanTooShort(usize),
    #[error("invalid spectrum data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Distinct eigenvalues in descending order with their multiplicities and
/// orthogonal eigenprojectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
    projectors: Vec<DMatrix<f64>>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    projectors: Vec<Vec<Vec<f64>>>,
}

/// Decomposes with the default eigenvalue grouping tolerance.
pub fn eigendecompose(a: &DMatrix<f64>) -> Result<Spectrum, SpectralError> {
    eigendecompose_with(a, None)
}

/// Decomposes a symmetric matrix and merges numerically coincident
/// eigenvalues. Raw values closer than `group_tol` (default
/// `1e-9 * max(1, max|eigenvalue|)`) fall into one cluster; the cluster
/// reports the mean value and the summed projector.
pub fn eigendecompose_with(
    a: &DMatrix<f64>,
    group_tol: Option<f64>,
) -> Result<Spectrum, SpectralError> {
    if a.nrows() != a.ncols() {
        return Err(SpectralError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > SYMMETRY_LIMIT {
        return Err(SpectralError::NotSymmetric {
            deviation: asym,
            limit: SYMMETRY_LIMIT,
        });
    }
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("symmetric eigenvalues are finite")
    });
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = group_tol.unwrap_or(1e-9 * max_abs.max(1.0));

    let mut values = Vec::new();
    let mut multiplicities = Vec::new();
    let mut projectors = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && eig.eigenvalues[order[j - 1]] - eig.eigenvalues[order[j]] < tol {
            j += 1;
        }
        let members = &order[i..j];
        let mean = members.iter().map(|&c| eig.eigenvalues[c]).sum::<f64>() / members.len() as f64;
        let mut proj = DMatrix::zeros(n, n);
        for &c in members {
            let q: DVector<f64> = eig.eigenvectors.column(c).into();
            proj.ger(1.0, &q, &q, 1.0);
        }
        let proj = (&proj + proj.transpose()) * 0.5;
        values.push(mean);
        multiplicities.push(members.len());
        projectors.push(proj);
        i = j;
    }
    Ok(Spectrum {
        values,
        multiplicities,
        projectors,
        dim: n,
    })
}

impl Spectrum {
    pub(crate) fn from_parts(
        values: Vec<f64>,
        multiplicities: Vec<usize>,
        projectors: Vec<DMatrix<f64>>,
        dim: usize,
    ) -> Self {
        debug_assert_eq!(values.len(), multiplicities.len());
        debug_assert_eq!(values.len(), projectors.len());
        debug_assert!(values.windows(2).all(|w| w[0] > w[1]));
        debug_assert_eq!(multiplicities.iter().sum::<usize>(), dim);
        Spectrum {
            values,
            multiplicities,
            projectors,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distinct_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn projector(&self, j: usize) -> &DMatrix<f64> {
        &self.projectors[j]
    }

    pub fn projector_entry(&self, j: usize, u: usize, v: usize) -> f64 {
        self.projectors[j][(u, v)]
    }

    fn check_vertex(&self, vertex: usize) -> Result<(), SpectralError> {
        if vertex >= self.dim {
            return Err(SpectralError::VertexOutOfRange {
                vertex,
                dim: self.dim,
            });
        }
        Ok(())
    }

    /// Indices of eigenvalues whose projector acts nontrivially on
    /// `vertex`, judged by the projector column norm.
    pub fn support_with(&self, vertex: usize, tol: f64) -> Result<Vec<usize>, SpectralError> {
        self.check_vertex(vertex)?;
        Ok((0..self.values.len())
            .filter(|&j| self.projectors[j].column(vertex).norm() > tol)
            .collect())
    }

    pub fn support(&self, vertex: usize) -> Result<Vec<usize>, SpectralError> {
        self.support_with(vertex, 1e-8)
    }

    /// Continuous-time walk amplitude <v| exp(-itA) |u>.
    pub fn transition_entry(&self, t: f64, u: usize, v: usize) -> Result<Complex64, SpectralError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &lam) in self.values.iter().enumerate() {
            acc += Complex64::cis(-t * lam) * self.projectors[j][(u, v)];
        }
        Ok(acc)
    }

    /// Rebuilds the original matrix from the spectral data.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for (j, &lam) in self.values.iter().enumerate() {
            a += &self.projectors[j] * lam;
        }
        a
    }

    /// Worst violation across the resolution-of-identity invariants:
    /// completeness, idempotence, mutual orthogonality, and trace versus
    /// multiplicity.
    pub fn max_invariant_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut sum = DMatrix::<f64>::zeros(self.dim, self.dim);
        for p in &self.projectors {
            sum += p;
        }
        worst = worst.max((sum - DMatrix::identity(self.dim, self.dim)).abs().max());
        for (j, p) in self.projectors.iter().enumerate() {
            worst = worst.max((p * p - p).abs().max());
            worst = worst.max((p.trace() - self.multiplicities[j] as f64).abs());
            for q in &self.projectors[j + 1..] {
                worst = worst.max((p * q).abs().max());
            }
        }
        worst
    }

    /// Decides strong cospectrality of two vertices: every projector
    /// column must satisfy E e_u = +/- E e_v. Eigenvalues supported on
    /// neither vertex are skipped.
    pub fn strongly_cospectral(
        &self,
        u: usize,
        v: usize,
        tol: f64,
    ) -> Result<Cospectrality, SpectralError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let mut signs = Vec::new();
        for (j, p) in self.projectors.iter().enumerate() {
            let x: DVector<f64> = p.column(u).into();
            let y: DVector<f64> = p.column(v).into();
            let (nx, ny) = (x.norm(), y.norm());
            if nx <= tol && ny <= tol {
                continue;
            }
            if (&x - &y).norm() <= tol {
                signs.push((j, 1i8));
            } else if (&x + &y).norm() <= tol {
                signs.push((j, -1i8));
            } else {
                return Ok(Cospectrality::NotCospectral {
                    eigenvalue_index: j,
                });
            }
        }
        Ok(Cospectrality::Strong { signs })
    }

    /// Samples the walk amplitude from `u` to `v` on a uniform time grid.
    pub fn fidelity_scan(
        &self,
        u: usize,
        v: usize,
        t_min: f64,
        t_max: f64,
        steps: usize,
    ) -> Result<AmplitudeCurve, SpectralError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if steps < 2 {
            return Err(SpectralError::ScanTooShort(steps));
        }
        let entries: Vec<(f64, f64)> = (0..self.values.len())
            .map(|j| (self.values[j], self.projectors[j][(u, v)]))
            .collect();
        let dt = (t_max - t_min) / (steps - 1) as f64;
        let samples: Vec<(f64, Complex64)> = (0..steps)
            .into_par_iter()
            .map(|i| {
                let t = t_min + dt * i as f64;
                let amp = entries
                    .iter()
                    .map(|&(lam, e)| Complex64::cis(-t * lam) * e)
                    .sum();
                (t, amp)
            })
            .collect();
        let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let amplitudes: Vec<Complex64> = samples.iter().map(|s| s.1).collect();
        let fidelities: Vec<f64> = amplitudes.iter().map(|a| a.norm()).collect();
        let (mut argmax, mut best) = (0usize, f64::NEG_INFINITY);
        for (i, &f) in fidelities.iter().enumerate() {
            if f > best {
                best = f;
                argmax = i;
            }
        }
        Ok(AmplitudeCurve {
            max_fidelity: best,
            argmax_time: times[argmax],
            times,
            amplitudes,
            fidelities,
        })
    }

    pub fn to_json(&self) -> String {
        let projectors = self
            .projectors
            .iter()
            .map(|p| {
                (0..p.nrows())
                    .map(|r| p.row(r).iter().copied().collect())
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&SpectrumJson {
            eigenvalues: self.values.clone(),
            multiplicities: self.multiplicities.clone(),
            projectors,
        })
        .expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SpectralError> {
        let j: SpectrumJson = serde_json::from_str(s)?;
        let count = j.eigenvalues.len();
        if j.multiplicities.len() != count || j.projectors.len() != count {
            return Err(SpectralError::InvalidData(
                "eigenvalues, multiplicities, projectors must have equal length".into(),
            ));
        }
        if count == 0 {
            return Err(SpectralError::InvalidData("empty spectrum".into()));
        }
        if j.eigenvalues.windows(2).any(|w| w[0] <= w[1]) {
            return Err(SpectralError::InvalidData(
                "eigenvalues must be strictly descending".into(),
            ));
        }
        let dim: usize = j.multiplicities.iter().sum();
        let mut projectors = Vec::with_capacity(count);
        for rows in &j.projectors {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(SpectralError::InvalidData(format!(
                    "each projector must be {dim}x{dim}"
                )));
            }
            projectors.push(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]));
        }
        Ok(Spectrum {
            values: j.eigenvalues,
            multiplicities: j.multiplicities,
            projectors,
            dim,
        })
    }
}

/// Outcome of the strong cospectrality test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cospectrality {
    /// Each supported eigenvalue index with its relative sign.
    Strong {
        signs: Vec<(usize, i8)>,
    },
    NotCospectral {
        eigenvalue_index: usize,
    },
}

/// Amplitude samples over a time window.
#[derive(Debug, Clone)]
pub struct AmplitudeCurve {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub fidelities: Vec<f64>,
    pub max_fidelity: f64,
    pub argmax_time: f64,
}

impl AmplitudeCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,fidelity\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e}\n",
                self.times[i], self.amplitudes[i].re, self.amplitudes[i].im, self.fidelities[i]
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn spectrum_of(g: &Graph) -> Spectrum {
        eigendecompose(&g.adjacency_matrix()).unwrap()
    }

    #[test]
    fn edge_walk_amplitude_is_minus_i_sine() {
        let s = spectrum_of(&Graph::complete(2).unwrap());
        for &t in &[0.0, 0.3, 1.0, std::f64::consts::FRAC_PI_2, 4.0] {
            let a = s.transition_entry(t, 0, 1).unwrap();
            assert!((a.re).abs() < 1e-12);
            assert!((a.im + t.sin()).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn square_cycle_multiplicities() {
        let s = spectrum_of(&Graph::cycle(4).unwrap());
        assert_eq!(s.values().len(), 3);
        assert!((s.values()[0] - 2.0).abs() < 1e-9);
        assert!(s.values()[1].abs() < 1e-9);
        assert!((s.values()[2] + 2.0).abs() < 1e-9);
        assert_eq!(s.multiplicities(), &[1, 2, 1]);
        assert!(s.max_invariant_deviation() < 1e-10);
        let a = s.reconstruct();
        assert!(
            (a - Graph::cycle(4).unwrap().adjacency_matrix())
                .abs()
                .max()
                < 1e-10
        );
    }

    #[test]
    fn antipodal_square_vertices_are_strongly_cospectral() {
        let s = spectrum_of(&Graph::cycle(4).unwrap());
        match s.strongly_cospectral(0, 2, 1e-8).unwrap() {
            Cospectrality::Strong { signs } => {
                assert_eq!(signs, vec![(0, 1), (1, -1), (2, 1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn path_endpoints_vs_inner_vertex_fail_cospectrality() {
        let s = spectrum_of(&Graph::path(4).unwrap());
        assert!(matches!(
            s.strongly_cospectral(0, 1, 1e-8).unwrap(),
            Cospectrality::NotCospectral { .. }
        ));
        // the two ends of a path are strongly cospectral by symmetry
        assert!(matches!(
            s.strongly_cospectral(0, 3, 1e-8).unwrap(),
            Cospectrality::Strong { .. }
        ));
    }

    #[test]
    fn support_of_complete_graph_vertex() {
        let s = spectrum_of(&Graph::complete(3).unwrap());
        // every vertex sees both eigenvalues 2 and -1
        assert_eq!(s.support(0).unwrap(), vec![0, 1]);
    }

    #[test]
    fn scan_finds_edge_transfer_peak() {
        let s = spectrum_of(&Graph::complete(2).unwrap());
        let curve = s
            .fidelity_scan(0, 1, 0.0, std::f64::consts::PI, 1001)
            .unwrap();
        assert!((curve.max_fidelity - 1.0).abs() < 1e-12);
        assert!((curve.argmax_time - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let csv = curve.to_csv();
        assert!(csv.starts_with("t,re,im,fidelity\n"));
        assert_eq!(csv.lines().count(), 1002);
    }

    #[test]
    fn decomposition_rejects_asymmetric_input() {
        let mut a = Graph::cycle(4).unwrap().adjacency_matrix();
        a[(0, 1)] = 0.5;
        assert!(matches!(
            eigendecompose(&a),
            Err(SpectralError::NotSymmetric { .. })
        ));
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            eigendecompose(&rect),
            Err(SpectralError::NotSquare { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let s = spectrum_of(&Graph::petersen());
        let text = s.to_json();
        let back = Spectrum::from_json(&text).unwrap();
        assert_eq!(back.values(), s.values());
        assert_eq!(back.multiplicities(), s.multiplicities());
        assert!(back.max_invariant_deviation() < 1e-10);
        assert!(Spectrum::from_json(
            "{\"eigenvalues\":[1.0],\"multiplicities\":[1,2],\"projectors\":[]}"
        )
        .is_err());
    }
}
