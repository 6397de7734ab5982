//! Montage graph: binary channel adjacency and its self-loop,
//! symmetric-normalized propagation matrix.

use std::collections::{HashSet, VecDeque};
use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::signal_io::ChannelLabel;

/// The 23 derivations shared by every CHB-MIT case, in file order.
pub const CHB_MIT_MONTAGE: [&str; 23] = [
    "FP1-F7", "F7-T7", "T7-P7", "P7-O1", "FP1-F3", "F3-C3", "C3-P3", "P3-O1", "FP2-F4", "F4-C4",
    "C4-P4", "P4-O2", "FP2-F8", "F8-T8", "T8-P8-0", "P8-O2", "FZ-CZ", "CZ-PZ", "P7-T7", "T7-FT9",
    "FT9-FT10", "FT10-T8", "T8-P8-1",
];

/// Transverse 10-20 neighbours of the midline electrodes.
const MIDLINE_NEIGHBORS: [(&str, &str); 6] = [
    ("FZ", "F3"),
    ("FZ", "F4"),
    ("CZ", "C3"),
    ("CZ", "C4"),
    ("PZ", "P3"),
    ("PZ", "P4"),
];

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("montage needs {expected} channels, got {found}")]
    MontageSize { expected: usize, found: usize },
    #[error("duplicate channel {0} in montage")]
    DuplicateChannel(String),
    #[error("adjacency is not square ({0} x {1})")]
    NotSquare(usize, usize),
    #[error("adjacency entry ({i}, {j}) = {value} is not 0 or 1")]
    NotBinary { i: usize, j: usize, value: f64 },
    #[error("adjacency has a self-loop at node {0}")]
    SelfLoop(usize),
    #[error("adjacency is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Montage {
    channels: Vec<ChannelLabel>,
}

impl Montage {
    pub fn new(channels: Vec<ChannelLabel>) -> Result<Self, GraphError> {
        if channels.len() != CHB_MIT_MONTAGE.len() {
            return Err(GraphError::MontageSize {
                expected: CHB_MIT_MONTAGE.len(),
                found: channels.len(),
            });
        }
        let mut seen = HashSet::new();
        for c in &channels {
            if !seen.insert(c.raw.as_str()) {
                return Err(GraphError::DuplicateChannel(c.raw.clone()));
            }
        }
        Ok(Self { channels })
    }

    pub fn chb_mit() -> Self {
        let channels = CHB_MIT_MONTAGE
            .iter()
            .map(|l| ChannelLabel::parse(l).expect("montage labels are valid"))
            .collect();
        Self::new(channels).expect("canonical montage is valid")
    }

    pub fn channels(&self) -> &[ChannelLabel] {
        &self.channels
    }
}

/// How two bipolar channels are judged adjacent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EdgeRule {
    /// Channels sharing an electrode.
    SharedElectrode,
    /// Shared electrode, or an electrode pair that are transverse midline
    /// neighbours (FZ–F3/F4, CZ–C3/C4, PZ–P3/P4). Joins the FZ-CZ/CZ-PZ
    /// chain to the parasagittal chains.
    #[default]
    SharedOrMidlineNeighbor,
}

fn midline_adjacent(a: &str, b: &str) -> bool {
    MIDLINE_NEIGHBORS
        .iter()
        .any(|&(m, n)| (a == m && b == n) || (a == n && b == m))
}

fn channels_adjacent(x: &ChannelLabel, y: &ChannelLabel, rule: EdgeRule) -> bool {
    if x.shares_electrode(y) {
        return true;
    }
    match rule {
        EdgeRule::SharedElectrode => false,
        EdgeRule::SharedOrMidlineNeighbor => x
            .electrodes()
            .iter()
            .any(|a| y.electrodes().iter().any(|b| midline_adjacent(a, b))),
    }
}

/// Binary adjacency over any list of bipolar channels.
pub fn adjacency_from_labels(channels: &[ChannelLabel], rule: EdgeRule) -> Array2<f64> {
    let n = channels.len();
    Array2::from_shape_fn((n, n), |(i, j)| {
        (i != j && channels_adjacent(&channels[i], &channels[j], rule)) as u8 as f64
    })
}

pub fn build_adjacency(montage: &Montage, rule: EdgeRule) -> Array2<f64> {
    adjacency_from_labels(montage.channels(), rule)
}

/// Adjacency `A`, `Ã = A + I`, the degrees of `Ã`, and
/// `S = D̃^{-1/2} Ã D̃^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EegGraph {
    pub a: Array2<f64>,
    pub a_tilde: Array2<f64>,
    pub degree: Vec<f64>,
    pub s: Array2<f64>,
}

impl EegGraph {
    pub fn n_nodes(&self) -> usize {
        self.a.nrows()
    }

    /// SHA-256 over the row-major bytes of `A` (one byte per entry) and its size.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n_nodes() as u64).to_le_bytes());
        h.update(self.a.iter().map(|&v| v as u8).collect::<Vec<u8>>());
        hex::encode(h.finalize())
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.a[[i, j]] != 0.0)
            .collect()
    }

    pub fn write_edge_csv<W: Write>(&self, mut out: W, labels: &[ChannelLabel]) -> std::io::Result<()> {
        writeln!(out, "node_i,node_j")?;
        for (i, j) in self.edges() {
            writeln!(out, "{},{}", labels[i].raw, labels[j].raw)?;
        }
        Ok(())
    }
}

pub fn normalize(a: &Array2<f64>) -> Result<EegGraph, GraphError> {
    let (n, m) = a.dim();
    if n != m {
        return Err(GraphError::NotSquare(n, m));
    }
    for i in 0..n {
        for j in 0..n {
            let v = a[[i, j]];
            if v != 0.0 && v != 1.0 {
                return Err(GraphError::NotBinary { i, j, value: v });
            }
            if i == j && v != 0.0 {
                return Err(GraphError::SelfLoop(i));
            }
            if v != a[[j, i]] {
                return Err(GraphError::NotSymmetric { i: i.min(j), j: i.max(j) });
            }
        }
    }
    let a_tilde = a + &Array2::<f64>::eye(n);
    let degree: Vec<f64> = a_tilde.rows().into_iter().map(|r| r.sum()).collect();
    let s = Array2::from_shape_fn((n, n), |(i, j)| a_tilde[[i, j]] / (degree[i] * degree[j]).sqrt());
    Ok(EegGraph {
        a: a.clone(),
        a_tilde,
        degree,
        s,
    })
}

/// The canonical CHB-MIT montage graph.
pub fn montage_graph(rule: EdgeRule) -> EegGraph {
    normalize(&build_adjacency(&Montage::chb_mit(), rule)).expect("montage adjacency is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphReport {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// First `(i, j)` with `A_ij != A_ji`.
    pub a_asymmetry: Option<(usize, usize)>,
    pub s_asymmetry: Option<(usize, usize)>,
    pub components: usize,
    pub spectral_radius: f64,
    pub failures: Vec<String>,
}

impl GraphReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn first_asymmetry(m: &Array2<f64>, tol: f64) -> Option<(usize, usize)> {
    let n = m.nrows();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find(|&(i, j)| (m[[i, j]] - m[[j, i]]).abs() > tol)
}

fn count_components(a: &Array2<f64>) -> usize {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && (a[[u, v]] != 0.0 || a[[v, u]] != 0.0) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    components
}

/// Largest |eigenvalue| of `s` by power iteration on `s²`.
pub fn spectral_radius(s: &Array2<f64>) -> f64 {
    let n = s.nrows();
    if n == 0 {
        return 0.0;
    }
    let s2 = s.dot(s);
    let mut v = ndarray::Array1::from_shape_fn(n, |i| 1.0 + i as f64 / n as f64);
    v /= v.dot(&v).sqrt();
    let mut estimate = 0.0;
    for _ in 0..2000 {
        let w = s2.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - estimate).abs() <= 1e-15 * next.abs() {
            estimate = next;
            break;
        }
        estimate = next;
    }
    estimate.max(0.0).sqrt()
}

pub fn validate(graph: &EegGraph) -> GraphReport {
    let mut failures = Vec::new();
    let a_asymmetry = first_asymmetry(&graph.a, 0.0);
    if let Some((i, j)) = a_asymmetry {
        failures.push(format!("A is not symmetric at ({i}, {j})"));
    }
    let s_asymmetry = first_asymmetry(&graph.s, 1e-12);
    if let Some((i, j)) = s_asymmetry {
        failures.push(format!("S is not symmetric at ({i}, {j})"));
    }
    let components = count_components(&graph.a);
    if components != 1 {
        failures.push(format!("graph has {components} connected components"));
    }
    let rho = spectral_radius(&graph.s);
    if rho > 1.0 + 1e-9 {
        failures.push(format!("spectral radius of S is {rho}"));
    }
    GraphReport {
        n_nodes: graph.n_nodes(),
        n_edges: graph.edges().len(),
        a_asymmetry,
        s_asymmetry,
        components,
        spectral_radius: rho,
        failures,
    }
}
