//! Vertex complemented corona construction. The compound graph keeps the
//! base graph G on vertices 0..n, appends one satellite block H_i per base
//! vertex, and joins every vertex of H_i to every base vertex except v_i.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoronaError {
    #[error("base graph needs at least 2 vertices, got {0}")]
    BaseTooSmall(usize),
    #[error("expected {expected} satellite graphs (one per base vertex), got {got}")]
    SatelliteCountMismatch { expected: usize, got: usize },
    #[error("satellite {index} has {got} vertices, expected {expected}")]
    SatelliteSizeMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("satellite {index} is not regular")]
    SatelliteNotRegular { index: usize },
    #[error("satellite {index} has degree {got}, expected {expected}")]
    SatelliteDegreeMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("base graph is not regular")]
    BaseNotRegular,
    #[error("base graph is not connected")]
    BaseNotConnected,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot parse vertex label {0:?}")]
    BadLabel(String),
}

/// Base graph plus one satellite per base vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoronaSpec {
    pub base: Graph,
    pub satellites: Vec<Graph>,
}

impl CoronaSpec {
    pub fn new(base: Graph, satellites: Vec<Graph>) -> Result<Self, CoronaError> {
        if base.n() < 2 {
            return Err(CoronaError::BaseTooSmall(base.n()));
        }
        if satellites.len() != base.n() {
            return Err(CoronaError::SatelliteCountMismatch {
                expected: base.n(),
                got: satellites.len(),
            });
        }
        Ok(CoronaSpec { base, satellites })
    }

    /// Same satellite graph attached to every base vertex.
    pub fn uniform(base: Graph, satellite: Graph) -> Result<Self, CoronaError> {
        let sats = vec![satellite; base.n()];
        CoronaSpec::new(base, sats)
    }
}

/// Structured name of a compound-graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoronaVertex {
    Base(usize),
    Satellite { owner: usize, vertex: usize },
}

impl fmt::Display for CoronaVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoronaVertex::Base(i) => write!(f, "v:{i}"),
            CoronaVertex::Satellite { owner, vertex } => write!(f, "v:{owner}/w:{vertex}"),
        }
    }
}

impl FromStr for CoronaVertex {
    type Err = CoronaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CoronaError::BadLabel(s.to_string());
        let rest = s.strip_prefix("v:").ok_or_else(bad)?;
        match rest.split_once("/w:") {
            None => Ok(CoronaVertex::Base(rest.parse().map_err(|_| bad())?)),
            Some((own, vtx)) => Ok(CoronaVertex::Satellite {
                owner: own.parse().map_err(|_| bad())?,
                vertex: vtx.parse().map_err(|_| bad())?,
            }),
        }
    }
}

/// Maps structured vertex names to flat indices: base vertices come
/// first, then each satellite block in owner order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoronaLabeling {
    base_n: usize,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl CoronaLabeling {
    fn new(base_n: usize, sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut next = base_n;
        for &s in &sizes {
            offsets.push(next);
            next += s;
        }
        CoronaLabeling {
            base_n,
            sizes,
            offsets,
            total: next,
        }
    }

    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn satellite_size(&self, owner: usize) -> usize {
        self.sizes[owner]
    }

    pub fn flat(&self, v: CoronaVertex) -> Option<usize> {
        match v {
            CoronaVertex::Base(i) => (i < self.base_n).then_some(i),
            CoronaVertex::Satellite { owner, vertex } => (owner < self.base_n
                && vertex < self.sizes[owner])
                .then(|| self.offsets[owner] + vertex),
        }
    }

    pub fn label(&self, flat: usize) -> Option<CoronaVertex> {
        if flat < self.base_n {
            return Some(CoronaVertex::Base(flat));
        }
        if flat >= self.total {
            return None;
        }
        // offsets are ascending, so partition_point finds the owner block
        let owner = self.offsets.partition_point(|&o| o <= flat) - 1;
        Some(CoronaVertex::Satellite {
            owner,
            vertex: flat - self.offsets[owner],
        })
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.total)
            .map(|i| self.label(i).expect("index in range").to_string())
            .collect()
    }
}

/// Builds the compound graph by explicit edge enumeration.
pub fn build_corona(spec: &CoronaSpec) -> (Graph, CoronaLabeling) {
    let n = spec.base.n();
    let labeling = CoronaLabeling::new(n, spec.satellites.iter().map(Graph::n).collect());
    let mut edges: Vec<(usize, usize)> = spec.base.edges().collect();
    for (i, h) in spec.satellites.iter().enumerate() {
        let off = labeling.offsets[i];
        for (a, b) in h.edges() {
            edges.push((off + a, off + b));
        }
        // every satellite vertex sees every base vertex except its owner
        for w in 0..h.n() {
            for j in 0..n {
                if j != i {
                    edges.push((j, off + w));
                }
            }
        }
    }
    let g = Graph::new(labeling.total, edges).expect("corona edges are in range by construction");
    (g, labeling)
}

/// Parameters of a regular corona: r-regular connected base on n
/// vertices, k-regular satellites on m vertices each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularCoronaParams {
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub m: usize,
}

/// Checks the regularity preconditions the spectral closed forms rely on:
/// connected regular base with at least two vertices, and satellites that
/// share one size and one degree.
pub fn validate_regular(spec: &CoronaSpec) -> Result<RegularCoronaParams, CoronaError> {
    let base_info = spec.base.analyze_structure();
    let r = base_info.degree.ok_or(CoronaError::BaseNotRegular)?;
    if !base_info.is_connected {
        return Err(CoronaError::BaseNotConnected);
    }
    let m = spec.satellites[0].n();
    let mut k = None;
    for (index, h) in spec.satellites.iter().enumerate() {
        if h.n() != m {
            return Err(CoronaError::SatelliteSizeMismatch {
                index,
                expected: m,
                got: h.n(),
            });
        }
        let info = h.analyze_structure();
        let deg = info
            .degree
            .ok_or(CoronaError::SatelliteNotRegular { index })?;
        match k {
            None => k = Some(deg),
            Some(expected) if expected != deg => {
                return Err(CoronaError::SatelliteDegreeMismatch {
                    index,
                    expected,
                    got: deg,
                })
            }
            _ => {}
        }
    }
    Ok(RegularCoronaParams {
        n: spec.base.n(),
        r,
        k: k.expect("at least one satellite since base_n >= 2"),
        m,
    })
}

/// Assembles the compound adjacency matrix directly from its blocks:
/// base adjacency, satellite diagonal blocks, and (J - I) x all-ones
/// coupling. Independent of [`build_corona`]; the two must agree.
pub fn corona_adjacency_blocks(
    base: &Graph,
    satellites: &[Graph],
) -> Result<DMatrix<f64>, CoronaError> {
    let n = base.n();
    if n < 2 {
        return Err(CoronaError::BaseTooSmall(n));
    }
    if satellites.len() != n {
        return Err(CoronaError::SatelliteCountMismatch {
            expected: n,
            got: satellites.len(),
        });
    }
    let sizes: Vec<usize> = satellites.iter().map(Graph::n).collect();
    let total = n + sizes.iter().sum::<usize>();
    let mut a = DMatrix::zeros(total, total);
    a.view_mut((0, 0), (n, n))
        .copy_from(&base.adjacency_matrix());
    let mut off = n;
    for (i, h) in satellites.iter().enumerate() {
        let m_i = sizes[i];
        a.view_mut((off, off), (m_i, m_i))
            .copy_from(&h.adjacency_matrix());
        for j in 0..n {
            if j == i {
                continue;
            }
            for w in 0..m_i {
                a[(j, off + w)] = 1.0;
                a[(off + w, j)] = 1.0;
            }
        }
        off += m_i;
    }
    Ok(a)
}
