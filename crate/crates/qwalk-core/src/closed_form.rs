//! Closed-form spectral data for compound graphs built from a regular
//! connected base and equal-size regular satellites. Eigenvalues,
//! eigenprojectors, and base-block walk amplitudes are all expressed in
//! terms of the base spectrum alone, so they stay exact where the base
//! data is exact and scale to compounds far beyond dense diagonalization.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::spectral::{eigendecompose, SpectralError, Spectrum};

#[derive(Debug, Error)]
pub enum ClosedFormError {
    #[error("base graph is not regular")]
    BaseNotRegular,
    #[error("base graph is not connected")]
    BaseNotConnected,
    #[error("base graph needs at least 2 vertices, got {0}")]
    BaseTooSmall(usize),
    #[error("top eigenvalue {top} (multiplicity {multiplicity}) does not match a simple eigenvalue at {expected}")]
    PerronMismatch {
        top: f64,
        multiplicity: usize,
        expected: f64,
    },
    #[error("expected {expected} satellite spectra, got {got}")]
    SatelliteCountMismatch { expected: usize, got: usize },
    #[error("satellite {index} has dimension {got}, expected {expected}")]
    SatelliteDimMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("satellite {index} has top eigenvalue {top}, expected degree {expected}")]
    SatelliteDegreeMismatch {
        index: usize,
        top: f64,
        expected: f64,
    },
    #[error("no stored projector entry for pair ({u}, {v})")]
    EntryMissing { u: usize, v: usize },
    #[error("vertex pair ({u}, {v}) out of range for n = {n}")]
    PairOutOfRange { u: usize, v: usize, n: usize },
    #[error("inconsistent spectral data: {0}")]
    Inconsistent(String),
    #[error("invalid spectral data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Spectrum of a regular connected graph together with eigenprojector
/// entries for selected vertex pairs. This is all the closed forms need,
/// so large bases can be described exactly without their adjacency
/// matrices ever materializing.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSpectralData {
    n: usize,
    r: f64,
    values: Vec<f64>,
    multiplicities: Vec<usize>,
    entries: BTreeMap<(usize, usize), Vec<Option<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct BaseSpectralJson {
    n: usize,
    r: f64,
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    projector_entries: BTreeMap<String, BTreeMap<String, f64>>,
}

impl BaseSpectralData {
    /// Extracts the data from a graph, keeping projector entries for the
    /// requested pairs plus the diagonals they touch.
    pub fn from_graph(g: &Graph, pairs: &[(usize, usize)]) -> Result<Self, ClosedFormError> {
        let info = g.analyze_structure();
        let r = info.degree.ok_or(ClosedFormError::BaseNotRegular)? as f64;
        if !info.is_connected {
            return Err(ClosedFormError::BaseNotConnected);
        }
        let s = eigendecompose(&g.adjacency_matrix())?;
        Self::from_spectrum(r, &s, pairs)
    }

    /// Wraps an existing spectrum; the top eigenvalue must be simple and
    /// equal to the stated degree.
    pub fn from_spectrum(
        r: f64,
        s: &Spectrum,
        pairs: &[(usize, usize)],
    ) -> Result<Self, ClosedFormError> {
        let n = s.dim();
        let top = s.values()[0];
        if (top - r).abs() > 1e-9 * r.abs().max(1.0) || s.multiplicities()[0] != 1 {
            return Err(ClosedFormError::PerronMismatch {
                top,
                multiplicity: s.multiplicities()[0],
                expected: r,
            });
        }
        let mut keys = BTreeSet::new();
        for &(u, v) in pairs {
            if u >= n || v >= n {
                return Err(ClosedFormError::PairOutOfRange { u, v, n });
            }
            keys.insert((u.min(v), u.max(v)));
            keys.insert((u, u));
            keys.insert((v, v));
        }
        let entries = keys
            .into_iter()
            .map(|(u, v)| {
                let col = (0..s.distinct_count())
                    .map(|j| Some(s.projector_entry(j, u, v)))
                    .collect();
                ((u, v), col)
            })
            .collect();
        Ok(BaseSpectralData {
            n,
            r,
            values: s.values().to_vec(),
            multiplicities: s.multiplicities().to_vec(),
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Projector entry E_j[u, v]; pair order does not matter.
    pub fn entry(&self, j: usize, u: usize, v: usize) -> Result<f64, ClosedFormError> {
        self.entries
            .get(&(u.min(v), u.max(v)))
            .and_then(|col| col.get(j).copied().flatten())
            .ok_or(ClosedFormError::EntryMissing { u, v })
    }

    pub fn has_pair(&self, u: usize, v: usize) -> bool {
        self.entries
            .get(&(u.min(v), u.max(v)))
            .is_some_and(|col| col.iter().all(Option::is_some))
    }

    /// Eigenvalue indices supported on `u`, judged by the stored diagonal
    /// entries. Needs the (u, u) diagonal to be fully present.
    pub fn support(&self, u: usize, tol: f64) -> Result<Vec<usize>, ClosedFormError> {
        let col = self
            .entries
            .get(&(u, u))
            .ok_or(ClosedFormError::EntryMissing { u, v: u })?;
        let mut out = Vec::new();
        for (j, e) in col.iter().enumerate() {
            match e {
                Some(x) => {
                    if *x > tol {
                        out.push(j);
                    }
                }
                None => return Err(ClosedFormError::EntryMissing { u, v: u }),
            }
        }
        Ok(out)
    }

    /// Cross-checks the stored entries against the resolution-of-identity
    /// row sums: entries for a pair must sum to the Kronecker delta, and
    /// their eigenvalue-weighted sum must be an adjacency bit.
    pub fn validate(&self) -> Result<(), ClosedFormError> {
        if self.values.len() != self.multiplicities.len() {
            return Err(ClosedFormError::InvalidData(
                "eigenvalue and multiplicity counts differ".into(),
            ));
        }
        if self.values.windows(2).any(|w| w[0] <= w[1]) {
            return Err(ClosedFormError::InvalidData(
                "eigenvalues must be strictly descending".into(),
            ));
        }
        if self.multiplicities.iter().sum::<usize>() != self.n {
            return Err(ClosedFormError::InvalidData(
                "multiplicities must sum to n".into(),
            ));
        }
        for (&(u, v), col) in &self.entries {
            if col.len() != self.values.len() {
                return Err(ClosedFormError::InvalidData(format!(
                    "pair ({u}, {v}) stores {} entries for {} eigenvalues",
                    col.len(),
                    self.values.len()
                )));
            }
            if col.iter().any(Option::is_none) {
                continue;
            }
            let sum: f64 = col.iter().map(|e| e.unwrap()).sum();
            let target = if u == v { 1.0 } else { 0.0 };
            if (sum - target).abs() > 1e-6 {
                return Err(ClosedFormError::InvalidData(format!(
                    "pair ({u}, {v}) entries sum to {sum}, expected {target}"
                )));
            }
            let weighted: f64 = col
                .iter()
                .zip(&self.values)
                .map(|(e, &lam)| e.unwrap() * lam)
                .sum();
            let bit = weighted.round();
            if (weighted - bit).abs() > 1e-6
                || !(bit == 0.0 || bit == 1.0)
                || (u == v && bit != 0.0)
            {
                return Err(ClosedFormError::InvalidData(format!(
                    "pair ({u}, {v}) weighted entries sum to {weighted}, expected an adjacency bit"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let projector_entries = self
            .entries
            .iter()
            .map(|(&(u, v), col)| {
                let inner: BTreeMap<String, f64> = col
                    .iter()
                    .enumerate()
                    .filter_map(|(j, e)| e.map(|x| (format!("{}", self.values[j]), x)))
                    .collect();
                (format!("{u},{v}"), inner)
            })
            .collect();
        serde_json::to_string_pretty(&BaseSpectralJson {
            n: self.n,
            r: self.r,
            eigenvalues: self.values.clone(),
            multiplicities: self.multiplicities.clone(),
            projector_entries,
        })
        .expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClosedFormError> {
        let j: BaseSpectralJson = serde_json::from_str(text)?;
        if j.eigenvalues.is_empty() || j.eigenvalues.len() != j.multiplicities.len() {
            return Err(ClosedFormError::InvalidData(
                "eigenvalues and multiplicities must be nonempty and equal length".into(),
            ));
        }
        if j.eigenvalues.windows(2).any(|w| w[0] <= w[1]) {
            return Err(ClosedFormError::InvalidData(
                "eigenvalues must be strictly descending".into(),
            ));
        }
        if j.multiplicities.iter().sum::<usize>() != j.n {
            return Err(ClosedFormError::InvalidData(
                "multiplicities must sum to n".into(),
            ));
        }
        if (j.eigenvalues[0] - j.r).abs() > 1e-9 * j.r.abs().max(1.0) || j.multiplicities[0] != 1 {
            return Err(ClosedFormError::InvalidData(
                "top eigenvalue must be simple and equal to r".into(),
            ));
        }
        let mut entries: BTreeMap<(usize, usize), Vec<Option<f64>>> = BTreeMap::new();
        for (key, inner) in &j.projector_entries {
            let (us, vs) = key
                .split_once(',')
                .ok_or_else(|| ClosedFormError::InvalidData(format!("bad pair key {key:?}")))?;
            let u: usize = us
                .trim()
                .parse()
                .map_err(|_| ClosedFormError::InvalidData(format!("bad pair key {key:?}")))?;
            let v: usize = vs
                .trim()
                .parse()
                .map_err(|_| ClosedFormError::InvalidData(format!("bad pair key {key:?}")))?;
            if u >= j.n || v >= j.n {
                return Err(ClosedFormError::PairOutOfRange { u, v, n: j.n });
            }
            let mut col = vec![None; j.eigenvalues.len()];
            for (lam_key, &val) in inner {
                let lam: f64 = lam_key.trim().parse().map_err(|_| {
                    ClosedFormError::InvalidData(format!("bad eigenvalue key {lam_key:?}"))
                })?;
                let (best, dist) = j
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (i, (x - lam).abs()))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
                    .expect("nonempty");
                if dist > 1e-9 * lam.abs().max(1.0) {
                    return Err(ClosedFormError::InvalidData(format!(
                        "eigenvalue key {lam_key:?} matches no listed eigenvalue"
                    )));
                }
                col[best] = Some(val);
            }
            entries.insert((u.min(v), u.max(v)), col);
        }
        let data = BaseSpectralData {
            n: j.n,
            r: j.r,
            values: j.eigenvalues,
            multiplicities: j.multiplicities,
            entries,
        };
        data.validate()?;
        Ok(data)
    }
}

/// One shifted eigenvalue pair contributed by a non-top base eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPair {
    pub lambda: f64,
    pub multiplicity: usize,
    pub plus: f64,
    pub minus: f64,
    /// sqrt((lambda - k)^2 + 4m), the splitting width.
    pub gap: f64,
}

/// The simple pair contributed by the base top eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronPair {
    pub plus: f64,
    pub minus: f64,
    /// sqrt((r - k)^2 + 4m(n-1)^2).
    pub gap: f64,
}

/// Complete eigenvalue account of a compound graph, organized by branch.
#[derive(Debug, Clone, PartialEq)]
pub struct CoronaEigenvalueSet {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub r: f64,
    /// Multiplicity of the satellite degree k as a compound eigenvalue.
    pub k_multiplicity: usize,
    /// Satellite eigenvalues other than k, with summed multiplicities.
    pub mu_branch: Vec<(f64, usize)>,
    pub lambda_pairs: Vec<LambdaPair>,
    pub perron_pair: PerronPair,
}

impl CoronaEigenvalueSet {
    pub fn total_multiplicity(&self) -> usize {
        self.k_multiplicity
            + self.mu_branch.iter().map(|p| p.1).sum::<usize>()
            + 2 * self
                .lambda_pairs
                .iter()
                .map(|p| p.multiplicity)
                .sum::<usize>()
            + 2
    }

    /// Every eigenvalue repeated by multiplicity, descending. Values that
    /// coincide across branches appear as duplicates.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_multiplicity());
        if self.k_multiplicity > 0 {
            out.extend(std::iter::repeat_n(self.k as f64, self.k_multiplicity));
        }
        for &(mu, s) in &self.mu_branch {
            out.extend(std::iter::repeat_n(mu, s));
        }
        for p in &self.lambda_pairs {
            out.extend(std::iter::repeat_n(p.plus, p.multiplicity));
            out.extend(std::iter::repeat_n(p.minus, p.multiplicity));
        }
        out.push(self.perron_pair.plus);
        out.push(self.perron_pair.minus);
        out.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        out
    }
}

fn check_satellites(
    n: usize,
    satellites: &[Spectrum],
    k: usize,
    m: usize,
) -> Result<(), ClosedFormError> {
    if satellites.len() != n {
        return Err(ClosedFormError::SatelliteCountMismatch {
            expected: n,
            got: satellites.len(),
        });
    }
    let kf = k as f64;
    for (index, s) in satellites.iter().enumerate() {
        if s.dim() != m {
            return Err(ClosedFormError::SatelliteDimMismatch {
                index,
                expected: m,
                got: s.dim(),
            });
        }
        let top = s.values()[0];
        if (top - kf).abs() > 1e-7 * kf.abs().max(1.0) {
            return Err(ClosedFormError::SatelliteDegreeMismatch {
                index,
                top,
                expected: kf,
            });
        }
    }
    Ok(())
}

/// Clusters (value, payload) pairs sorted descending by value; two values
/// closer than the relative grouping tolerance share a cluster.
fn cluster_desc<T: Copy>(mut items: Vec<(f64, T)>) -> Vec<(f64, Vec<(f64, T)>)> {
    items.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite"));
    let scale = items
        .iter()
        .fold(0.0f64, |acc, p| acc.max(p.0.abs()))
        .max(1.0);
    let tol = 1e-9 * scale;
    let mut clusters: Vec<(f64, Vec<(f64, T)>)> = Vec::new();
    for (v, payload) in items {
        match clusters.last_mut() {
            Some(last) if last.1.last().expect("nonempty").0 - v < tol => {
                last.1.push((v, payload));
            }
            _ => clusters.push((v, vec![(v, payload)])),
        }
    }
    for c in clusters.iter_mut() {
        c.0 = c.1.iter().map(|p| p.0).sum::<f64>() / c.1.len() as f64;
    }
    clusters
}

/// Derives the full compound eigenvalue multiset from the base spectrum
/// and the satellite spectra.
pub fn corona_eigenvalues(
    base: &BaseSpectralData,
    satellites: &[Spectrum],
    k: usize,
    m: usize,
) -> Result<CoronaEigenvalueSet, ClosedFormError> {
    let n = base.n;
    if n < 2 {
        return Err(ClosedFormError::BaseTooSmall(n));
    }
    check_satellites(n, satellites, k, m)?;
    let (kf, mf, nf) = (k as f64, m as f64, n as f64);

    let mut sat_values: Vec<(f64, usize)> = Vec::new();
    for s in satellites {
        for (j, &v) in s.values().iter().enumerate() {
            sat_values.push((v, s.multiplicities()[j]));
        }
    }
    let clusters = cluster_desc(sat_values);
    // the satellite degree is also each satellite's top eigenvalue, so it
    // always heads the cluster list
    let (top_value, top_members) = &clusters[0];
    if (top_value - kf).abs() > 1e-7 * kf.abs().max(1.0) {
        return Err(ClosedFormError::Inconsistent(format!(
            "top satellite cluster sits at {top_value}, expected {kf}"
        )));
    }
    let top_mult: usize = top_members.iter().map(|p| p.1).sum();
    if top_mult < n {
        return Err(ClosedFormError::Inconsistent(format!(
            "degree eigenvalue has total satellite multiplicity {top_mult} < n = {n}"
        )));
    }
    let k_multiplicity = top_mult - n;
    let mu_branch = clusters[1..]
        .iter()
        .map(|(v, members)| (*v, members.iter().map(|p| p.1).sum()))
        .collect();

    let lambda_pairs = base
        .values
        .iter()
        .zip(&base.multiplicities)
        .skip(1)
        .map(|(&lambda, &multiplicity)| {
            let d = lambda - kf;
            let gap = (d * d + 4.0 * mf).sqrt();
            LambdaPair {
                lambda,
                multiplicity,
                plus: (lambda + kf + gap) / 2.0,
                minus: (lambda + kf - gap) / 2.0,
                gap,
            }
        })
        .collect();

    let dr = base.r - kf;
    let gap_r = (dr * dr + 4.0 * mf * (nf - 1.0) * (nf - 1.0)).sqrt();
    let perron_pair = PerronPair {
        plus: (base.r + kf + gap_r) / 2.0,
        minus: (base.r + kf - gap_r) / 2.0,
        gap: gap_r,
    };

    Ok(CoronaEigenvalueSet {
        n,
        m,
        k,
        r: base.r,
        k_multiplicity,
        mu_branch,
        lambda_pairs,
        perron_pair,
    })
}

/// Builds the full compound eigendecomposition from the base and
/// satellite decompositions, without touching the compound adjacency
/// matrix. Eigenvalues that collide across branches merge into one
/// projector.
pub fn corona_eigenprojectors(
    base: &Spectrum,
    satellites: &[Spectrum],
    k: usize,
    m: usize,
) -> Result<Spectrum, ClosedFormError> {
    let n = base.dim();
    if n < 2 {
        return Err(ClosedFormError::BaseTooSmall(n));
    }
    check_satellites(n, satellites, k, m)?;
    if base.multiplicities()[0] != 1 {
        return Err(ClosedFormError::PerronMismatch {
            top: base.values()[0],
            multiplicity: base.multiplicities()[0],
            expected: base.values()[0],
        });
    }
    let (kf, mf, nf) = (k as f64, m as f64, n as f64);
    let total = n + n * m;
    let offset = |l: usize| n + l * m;

    let mut pieces: Vec<(f64, usize, DMatrix<f64>)> = Vec::new();

    // satellite branch: block-diagonal projectors, with the uniform
    // all-ones component removed from the degree eigenvalue
    let mut tagged: Vec<(f64, (usize, usize))> = Vec::new();
    for (l, s) in satellites.iter().enumerate() {
        for (j, &v) in s.values().iter().enumerate() {
            tagged.push((v, (l, j)));
        }
    }
    let clusters = cluster_desc(tagged);
    for (ci, (mu, members)) in clusters.iter().enumerate() {
        let mut p = DMatrix::zeros(total, total);
        let mut mult = 0usize;
        for &(_, (l, j)) in members {
            let off = offset(l);
            let block = satellites[l].projector(j);
            for a in 0..m {
                for b in 0..m {
                    p[(off + a, off + b)] += block[(a, b)];
                }
            }
            mult += satellites[l].multiplicities()[j];
        }
        if ci == 0 {
            // remove one uniform eigenvector per satellite block
            for l in 0..n {
                let off = offset(l);
                for a in 0..m {
                    for b in 0..m {
                        p[(off + a, off + b)] -= 1.0 / mf;
                    }
                }
            }
            if mult < n {
                return Err(ClosedFormError::Inconsistent(
                    "degree eigenvalue multiplicity below satellite count".into(),
                ));
            }
            mult -= n;
            if mult == 0 {
                let residue = p.abs().max();
                if residue > 1e-8 {
                    return Err(ClosedFormError::Inconsistent(format!(
                        "vanishing degree branch leaves projector residue {residue:.3e}"
                    )));
                }
                continue;
            }
        }
        pieces.push((*mu, mult, p));
    }

    // shifted pairs from each base eigenvalue
    for j in 0..base.distinct_count() {
        let lam = base.values()[j];
        let e = base.projector(j);
        let s_j = base.multiplicities()[j];
        let d0 = lam - kf;
        let (gap, coupling_scale, quad_weight) = if j == 0 {
            let gap = (d0 * d0 + 4.0 * mf * (nf - 1.0) * (nf - 1.0)).sqrt();
            (gap, nf - 1.0, (nf - 1.0) * (nf - 1.0))
        } else {
            ((d0 * d0 + 4.0 * mf).sqrt(), -1.0, 1.0)
        };
        for sign in [1.0f64, -1.0] {
            let theta = (lam + kf + sign * gap) / 2.0;
            let d = theta - kf;
            let c = d * d / (d * d + mf * quad_weight);
            let mut p = DMatrix::zeros(total, total);
            for a in 0..n {
                for b in 0..n {
                    p[(a, b)] = c * e[(a, b)];
                }
            }
            let coup = c * coupling_scale / d;
            for l in 0..n {
                for u in 0..n {
                    let val = coup * e[(u, l)];
                    for w in 0..m {
                        p[(u, offset(l) + w)] = val;
                        p[(offset(l) + w, u)] = val;
                    }
                }
            }
            let quad = c * quad_weight / (d * d);
            for l in 0..n {
                for lp in 0..n {
                    let val = quad * e[(l, lp)];
                    if val == 0.0 {
                        continue;
                    }
                    for w in 0..m {
                        for wp in 0..m {
                            p[(offset(l) + w, offset(lp) + wp)] = val;
                        }
                    }
                }
            }
            pieces.push((theta, s_j, p));
        }
    }

    // merge branch collisions into single eigenspaces
    let indexed: Vec<(f64, usize)> = pieces.iter().enumerate().map(|(i, p)| (p.0, i)).collect();
    let clusters = cluster_desc(indexed);
    let mut values = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for (v, members) in clusters {
        let mut p = DMatrix::zeros(total, total);
        let mut mult = 0usize;
        for &(_, i) in &members {
            p += &pieces[i].2;
            mult += pieces[i].1;
        }
        values.push(v);
        multiplicities.push(mult);
        projectors.push(p);
    }
    Ok(Spectrum::from_parts(
        values,
        multiplicities,
        projectors,
        total,
    ))
}

/// Walk amplitude between two base vertices of the compound graph,
/// evaluated from the base spectral data alone. The top eigenvalue term
/// oscillates at the wide splitting, every other term at the narrow one.
pub fn corona_transfer_entry(
    base: &BaseSpectralData,
    k: usize,
    m: usize,
    t: f64,
    u: usize,
    v: usize,
) -> Result<Complex64, ClosedFormError> {
    if u >= base.n || v >= base.n {
        return Err(ClosedFormError::PairOutOfRange { u, v, n: base.n });
    }
    if base.n < 2 {
        return Err(ClosedFormError::BaseTooSmall(base.n));
    }
    let (kf, mf, nf) = (k as f64, m as f64, base.n as f64);
    let half = 0.5 * t;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &lam) in base.values.iter().enumerate() {
        let e = base.entry(j, u, v)?;
        let d = lam - kf;
        let gap = if j == 0 {
            (d * d + 4.0 * mf * (nf - 1.0) * (nf - 1.0)).sqrt()
        } else {
            (d * d + 4.0 * mf).sqrt()
        };
        let phase = Complex64::cis(-(lam + kf) * half);
        let osc = Complex64::new((gap * half).cos(), -(d / gap) * (gap * half).sin());
        acc += phase * osc * e;
    }
    Ok(acc)
}
