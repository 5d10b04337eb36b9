//! Simple undirected graphs on vertex set 0..n, with the named families
//! used throughout the crate and a plain-text edge-list format.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph needs at least {min} vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("circulant offset {offset} is out of range for n = {n}")]
    BadCirculantOffset { offset: usize, n: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Undirected simple graph; edges are stored normalized with u < v.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;
    fn try_from(j: GraphJson) -> Result<Self, Self::Error> {
        Graph::new(j.n, j.edges)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            n: g.n,
            edges: g.edges.into_iter().collect(),
        }
    }
}

/// Degree pattern and connectivity, computed in one pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityInfo {
    pub is_regular: bool,
    pub degree: Option<usize>,
    pub is_connected: bool,
}

impl Graph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::TooFewVertices { min: 1, got: 0 });
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u, v));
            }
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { u, v, n });
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::TooFewVertices { min: 1, got: 0 });
        }
        Graph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::TooFewVertices { min: 3, got: n });
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::TooFewVertices { min: 1, got: 0 });
        }
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    /// d-dimensional hypercube on 2^d vertices; adjacency is Hamming
    /// distance one on the binary labels.
    pub fn hypercube(d: u32) -> Result<Self, GraphError> {
        if d == 0 {
            return Err(GraphError::TooFewVertices { min: 2, got: 1 });
        }
        let n = 1usize << d;
        let edges = (0..n).flat_map(move |u| {
            (0..d).filter_map(move |bit| {
                let v = u ^ (1 << bit);
                (u < v).then_some((u, v))
            })
        });
        Graph::new(n, edges)
    }

    /// Circulant graph: i ~ j iff (i - j) mod n or (j - i) mod n lies in
    /// the connection set. Offsets must sit in 1..=n/2.
    pub fn circulant(n: usize, offsets: &[usize]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices { min: 2, got: n });
        }
        for &s in offsets {
            if s == 0 || s > n / 2 {
                return Err(GraphError::BadCirculantOffset { offset: s, n });
            }
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for &s in offsets {
                edges.push((i, (i + s) % n));
            }
        }
        Graph::new(n, edges)
    }

    /// Kneser graph K(5, 2): vertices are the 2-subsets of {0..4} in
    /// lexicographic order, adjacent when disjoint.
    pub fn petersen() -> Self {
        let subsets: Vec<(usize, usize)> = (0..5)
            .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
            .collect();
        let disjoint = |x: (usize, usize), y: (usize, usize)| {
            x.0 != y.0 && x.0 != y.1 && x.1 != y.0 && x.1 != y.1
        };
        let edges = (0..10).flat_map(|i| {
            let subsets = &subsets;
            (i + 1..10).filter_map(move |j| disjoint(subsets[i], subsets[j]).then_some((i, j)))
        });
        Graph::new(10, edges).expect("Kneser construction is in range")
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn analyze_structure(&self) -> RegularityInfo {
        let deg = self.degrees();
        let is_regular = deg.windows(2).all(|w| w[0] == w[1]);
        let degree = is_regular.then(|| deg.first().copied().unwrap_or(0));

        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        RegularityInfo {
            is_regular,
            degree,
            is_connected: count == self.n,
        }
    }

    /// Parses the plain-text edge list written by [`to_edge_list`]:
    /// optional `#` comments and blank lines, an optional header line
    /// `n m`, then one `u v` pair per line. Without a header the vertex
    /// count is one past the largest index seen.
    ///
    /// [`to_edge_list`]: Graph::to_edge_list
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut declared: Option<(usize, usize)> = None;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut max_idx = 0usize;
        let mut saw_data = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    msg: format!("expected two integers, got {:?}", line),
                });
            }
            let a: usize = fields[0].parse().map_err(|_| GraphError::Parse {
                line: lineno + 1,
                msg: format!("bad integer {:?}", fields[0]),
            })?;
            let b: usize = fields[1].parse().map_err(|_| GraphError::Parse {
                line: lineno + 1,
                msg: format!("bad integer {:?}", fields[1]),
            })?;
            if !saw_data {
                saw_data = true;
                // first data line doubles as "n edge_count" when consistent
                if a >= 1 && b <= a * a {
                    declared = Some((a, b));
                    continue;
                }
            }
            if a == b {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    msg: format!("self-loop at vertex {a}"),
                });
            }
            max_idx = max_idx.max(a).max(b);
            edges.push((a, b));
        }
        let n = match declared {
            Some((n, _)) if max_idx >= n => {
                return Err(GraphError::Parse {
                    line: 0,
                    msg: format!("edge references vertex {max_idx} but header declares n = {n}"),
                })
            }
            Some((n, _)) => n,
            None if edges.is_empty() => {
                return Err(GraphError::Parse {
                    line: 0,
                    msg: "no header and no edges".into(),
                })
            }
            None => max_idx + 1,
        };
        Graph::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Families recognized by the `name:params` spec syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    Path,
    Cycle,
    Complete,
    Hypercube,
    Circulant,
    Petersen,
}

pub fn build_named_graph(family: GraphFamily, params: &[usize]) -> Result<Graph, GraphError> {
    let arity_err = |want: &str| GraphError::Parse {
        line: 0,
        msg: format!("{family:?} expects {want}, got {} parameters", params.len()),
    };
    match family {
        GraphFamily::Path => match params {
            [n] => Graph::path(*n),
            _ => Err(arity_err("one parameter")),
        },
        GraphFamily::Cycle => match params {
            [n] => Graph::cycle(*n),
            _ => Err(arity_err("one parameter")),
        },
        GraphFamily::Complete => match params {
            [n] => Graph::complete(*n),
            _ => Err(arity_err("one parameter")),
        },
        GraphFamily::Hypercube => match params {
            [d] => Graph::hypercube(*d as u32),
            _ => Err(arity_err("one parameter")),
        },
        GraphFamily::Circulant => match params {
            [] => Err(arity_err("n followed by offsets")),
            [n, offsets @ ..] => Graph::circulant(*n, offsets),
        },
        GraphFamily::Petersen => {
            if params.is_empty() {
                Ok(Graph::petersen())
            } else {
                Err(arity_err("no parameters"))
            }
        }
    }
}
