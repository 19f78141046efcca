//! The mesh as a directed acyclic graph of inputs, MZ cells and outputs.
//!
//! Node ids follow a topological order: the `m` inputs first, then the
//! cells sorted by `(layer, row)`, then the `m` outputs. Each waveguide
//! segment between two nodes is one edge, labelled by the mode it carries.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{cell_positions, layer_count, Architecture, CellPosition};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeKind {
    Input { mode: usize },
    Mz { layer: usize, row: usize },
    Output { mode: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub mode: usize,
}

#[derive(Clone, Debug)]
pub struct MeshGraph {
    m: usize,
    architecture: Architecture,
    kinds: Vec<NodeKind>,
    edges: Vec<Edge>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    // reach[n][k]: input k reaches n / n reaches output k
    from_inputs: Vec<Vec<bool>>,
    to_outputs: Vec<Vec<bool>>,
}

/// Count, total length and mean length of all paths between two nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStats {
    pub count: BigUint,
    pub total_length: BigUint,
    pub mean_length: BigRational,
}

pub fn build_graph(m: usize, architecture: Architecture) -> Result<MeshGraph> {
    MeshGraph::new(m, architecture)
}

impl MeshGraph {
    pub fn new(m: usize, architecture: Architecture) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidArgument("a mesh needs at least one mode".into()));
        }
        let cells = cell_positions(m, architecture);
        let mut kinds: Vec<NodeKind> = (0..m).map(|mode| NodeKind::Input { mode }).collect();
        kinds.extend(cells.iter().map(|c| NodeKind::Mz {
            layer: c.layer,
            row: c.row,
        }));
        kinds.extend((0..m).map(|mode| NodeKind::Output { mode }));

        let mut last: Vec<NodeId> = (0..m).collect();
        let mut edges = Vec::with_capacity(2 * cells.len() + m);
        for (k, c) in cells.iter().enumerate() {
            let id = m + k;
            for mode in [c.row, c.row + 1] {
                edges.push(Edge {
                    from: last[mode],
                    to: id,
                    mode,
                });
                last[mode] = id;
            }
        }
        let out0 = m + cells.len();
        for mode in 0..m {
            edges.push(Edge {
                from: last[mode],
                to: out0 + mode,
                mode,
            });
        }

        let n = kinds.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            succ[edge.from].push(e);
            pred[edge.to].push(e);
        }

        let mut g = MeshGraph {
            m,
            architecture,
            kinds,
            edges,
            succ,
            pred,
            from_inputs: Vec::new(),
            to_outputs: Vec::new(),
        };
        g.compute_reach();
        Ok(g)
    }

    fn compute_reach(&mut self) {
        let n = self.node_count();
        let m = self.m;
        let mut fin = vec![vec![false; m]; n];
        for (k, row) in fin.iter_mut().take(m).enumerate() {
            row[k] = true;
        }
        for v in 0..n {
            for &e in &self.pred[v] {
                let u = self.edges[e].from;
                for k in 0..m {
                    if fin[u][k] {
                        fin[v][k] = true;
                    }
                }
            }
        }
        let mut fout = vec![vec![false; m]; n];
        let out0 = self.output_node(0);
        for k in 0..m {
            fout[out0 + k][k] = true;
        }
        for v in (0..n).rev() {
            for &e in &self.succ[v] {
                let w = self.edges[e].to;
                for k in 0..m {
                    if fout[w][k] {
                        fout[v][k] = true;
                    }
                }
            }
        }
        self.from_inputs = fin;
        self.to_outputs = fout;
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn mz_count(&self) -> usize {
        self.kinds.len() - 2 * self.m
    }

    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.kinds[n]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn successors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.succ[n].iter().map(move |&e| self.edges[e].to)
    }

    pub fn predecessors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.pred[n].iter().map(move |&e| self.edges[e].from)
    }

    pub fn out_degree(&self, n: NodeId) -> usize {
        self.succ[n].len()
    }

    pub fn in_degree(&self, n: NodeId) -> usize {
        self.pred[n].len()
    }

    pub fn input_node(&self, mode: usize) -> NodeId {
        mode
    }

    pub fn output_node(&self, mode: usize) -> NodeId {
        self.m + self.mz_count() + mode
    }

    /// Node ids of the MZ cells, in `(layer, row)` order.
    pub fn mz_nodes(&self) -> std::ops::Range<NodeId> {
        self.m..self.m + self.mz_count()
    }

    pub fn is_mz(&self, n: NodeId) -> bool {
        self.mz_nodes().contains(&n)
    }

    /// Index of an MZ node in the sorted cell list.
    pub fn cell_index(&self, n: NodeId) -> Option<usize> {
        self.is_mz(n).then(|| n - self.m)
    }

    pub fn mz_node(&self, pos: CellPosition) -> Option<NodeId> {
        self.mz_nodes().find(|&n| {
            self.kinds[n]
                == NodeKind::Mz {
                    layer: pos.layer,
                    row: pos.row,
                }
        })
    }

    pub fn position(&self, n: NodeId) -> Option<CellPosition> {
        match self.kinds[n] {
            NodeKind::Mz { layer, row } => Some(CellPosition::new(layer, row)),
            _ => None,
        }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.m {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange { mode, m: self.m })
        }
    }

    fn check_mz(&self, n: NodeId) -> Result<()> {
        if self.is_mz(n) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("node {n} is not an MZ node")))
        }
    }

    /// Inputs that reach `n` (the set `I_n`).
    pub fn reaching_inputs(&self, n: NodeId) -> Vec<usize> {
        (0..self.m).filter(|&k| self.from_inputs[n][k]).collect()
    }

    /// Outputs reachable from `n` (the set `O_n`).
    pub fn reachable_outputs(&self, n: NodeId) -> Vec<usize> {
        (0..self.m).filter(|&k| self.to_outputs[n][k]).collect()
    }

    pub fn input_reaches(&self, input: usize, n: NodeId) -> bool {
        self.from_inputs[n][input]
    }

    pub fn reaches_output(&self, n: NodeId, output: usize) -> bool {
        self.to_outputs[n][output]
    }

    /// Whether MZ `n` lies on some path from `input` to `output`.
    pub fn on_path(&self, n: NodeId, input: usize, output: usize) -> bool {
        self.from_inputs[n][input] && self.to_outputs[n][output]
    }

    /// `|I_n| + |O_n| + m - 1`.
    pub fn sensitivity_index(&self, n: NodeId) -> Result<usize> {
        self.check_mz(n)?;
        let i = self.from_inputs[n].iter().filter(|&&b| b).count();
        let o = self.to_outputs[n].iter().filter(|&&b| b).count();
        Ok(i + o + self.m - 1)
    }

    /// Path counts from `source` to every node.
    pub fn count_from(&self, source: NodeId) -> Vec<BigUint> {
        let mut count = vec![BigUint::zero(); self.node_count()];
        count[source] = BigUint::one();
        for v in source + 1..self.node_count() {
            let mut c = BigUint::zero();
            for &e in &self.pred[v] {
                c += &count[self.edges[e].from];
            }
            count[v] = c;
        }
        count
    }

    /// Paths between two arbitrary nodes (zero when `from == to`).
    pub fn count_between(&self, from: NodeId, to: NodeId) -> BigUint {
        if from >= to {
            return BigUint::zero();
        }
        self.count_from(from).swap_remove(to)
    }

    // (count, total length) from `source` to every node.
    fn stats_from(&self, source: NodeId) -> (Vec<BigUint>, Vec<BigUint>) {
        let n = self.node_count();
        let mut count = vec![BigUint::zero(); n];
        let mut length = vec![BigUint::zero(); n];
        count[source] = BigUint::one();
        for v in source + 1..n {
            let (mut c, mut l) = (BigUint::zero(), BigUint::zero());
            for &e in &self.pred[v] {
                let u = self.edges[e].from;
                c += &count[u];
                l += &length[u];
                l += &count[u];
            }
            count[v] = c;
            length[v] = l;
        }
        (count, length)
    }

    /// Paths from input `input` to output `output` (zero-based modes).
    pub fn path_stats(&self, input: usize, output: usize) -> Result<PathStats> {
        self.check_mode(input)?;
        self.check_mode(output)?;
        let (count, length) = self.stats_from(self.input_node(input));
        let o = self.output_node(output);
        make_stats(count[o].clone(), length[o].clone(), input, output)
    }

    /// Stats for every pair, indexed `[output][input]`.
    pub fn path_stats_matrix(&self) -> Result<Vec<Vec<PathStats>>> {
        let mut by_input = Vec::with_capacity(self.m);
        for j in 0..self.m {
            let (count, length) = self.stats_from(self.input_node(j));
            let row: Result<Vec<PathStats>> = (0..self.m)
                .map(|i| {
                    let o = self.output_node(i);
                    make_stats(count[o].clone(), length[o].clone(), j, i)
                })
                .collect();
            by_input.push(row?);
        }
        Ok((0..self.m)
            .map(|i| (0..self.m).map(|j| by_input[j][i].clone()).collect())
            .collect())
    }

    /// Path counts indexed `[output][input]`.
    pub fn path_count_matrix(&self) -> Vec<Vec<BigUint>> {
        let per_input: Vec<Vec<BigUint>> =
            (0..self.m).map(|j| self.count_from(self.input_node(j))).collect();
        (0..self.m)
            .map(|i| {
                let o = self.output_node(i);
                (0..self.m).map(|j| per_input[j][o].clone()).collect()
            })
            .collect()
    }

    // Per-length path-count histograms (as f64) from `source` to all nodes,
    // following edges forwards or backwards.
    fn histograms(&self, source: NodeId, forward: bool) -> Vec<Vec<f64>> {
        let n = self.node_count();
        let mut h: Vec<Vec<f64>> = vec![Vec::new(); n];
        h[source] = vec![1.0];
        let order: Box<dyn Iterator<Item = NodeId>> = if forward {
            Box::new(source + 1..n)
        } else {
            Box::new((0..source).rev())
        };
        for v in order {
            let incoming = if forward { &self.pred[v] } else { &self.succ[v] };
            let mut acc: Vec<f64> = Vec::new();
            for &e in incoming {
                let u = if forward { self.edges[e].from } else { self.edges[e].to };
                let hu = &h[u];
                if hu.is_empty() {
                    continue;
                }
                if acc.len() < hu.len() + 1 {
                    acc.resize(hu.len() + 1, 0.0);
                }
                for (len, &c) in hu.iter().enumerate() {
                    acc[len + 1] += c;
                }
            }
            h[v] = acc;
        }
        h
    }

    /// Flow of every MZ node, indexed like [`MeshGraph::mz_nodes`].
    ///
    /// `Phi_in(n)` averages, over the inputs reaching `n`, the mean of
    /// `|path|^k` over the paths from that input to `n`; `Phi_out` is the
    /// mirror quantity towards the outputs, and `Phi = sqrt(Phi_in Phi_out)`.
    pub fn flow_all(&self, k: f64) -> Result<Vec<f64>> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("flow exponent must be > 0, got {k}")));
        }
        let nz = self.mz_count();
        let mut fin = vec![(0.0, 0usize); nz];
        let mut fout = vec![(0.0, 0usize); nz];
        for mode in 0..self.m {
            let h = self.histograms(self.input_node(mode), true);
            for (slot, n) in self.mz_nodes().enumerate() {
                if let Some(mu) = moment(&h[n], k) {
                    fin[slot].0 += mu;
                    fin[slot].1 += 1;
                }
            }
            let h = self.histograms(self.output_node(mode), false);
            for (slot, n) in self.mz_nodes().enumerate() {
                if let Some(mu) = moment(&h[n], k) {
                    fout[slot].0 += mu;
                    fout[slot].1 += 1;
                }
            }
        }
        Ok(fin
            .iter()
            .zip(&fout)
            .map(|(&(a, na), &(b, nb))| ((a / na as f64) * (b / nb as f64)).sqrt())
            .collect())
    }

    /// Flow of a single MZ node.
    pub fn flow(&self, n: NodeId, k: f64) -> Result<f64> {
        self.check_mz(n)?;
        Ok(self.flow_all(k)?[n - self.m])
    }

    /// Image of a node under the mesh's mirror symmetry.
    ///
    /// The triangle and odd rectangles are symmetric under a left-right
    /// mirror, which swaps input and output `k`. Even rectangles are
    /// symmetric under an up-down mirror, which maps mode `k` to `m-1-k`.
    pub fn mirror(&self, n: NodeId) -> NodeId {
        let m = self.m;
        let last_layer = layer_count(m, self.architecture).saturating_sub(1);
        let left_right = self.architecture == Architecture::Triangular || m % 2 == 1;
        match self.kinds[n] {
            NodeKind::Input { mode } if left_right => self.output_node(mode),
            NodeKind::Output { mode } if left_right => self.input_node(mode),
            NodeKind::Input { mode } => self.input_node(m - 1 - mode),
            NodeKind::Output { mode } => self.output_node(m - 1 - mode),
            NodeKind::Mz { layer, row } => {
                let pos = if left_right {
                    CellPosition::new(last_layer - layer, row)
                } else {
                    CellPosition::new(layer, m - 2 - row)
                };
                self.mz_node(pos).expect("mirror maps cells onto cells")
            }
        }
    }

    /// Whether the mirror reverses edge direction.
    pub fn mirror_reverses(&self) -> bool {
        self.architecture == Architecture::Triangular || self.m % 2 == 1
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct NodeOut {
            id: NodeId,
            #[serde(flatten)]
            kind: NodeKind,
        }
        #[derive(Serialize)]
        struct GraphOut<'a> {
            m: usize,
            architecture: Architecture,
            nodes: Vec<NodeOut>,
            edges: &'a [Edge],
        }
        let nodes = self
            .kinds
            .iter()
            .enumerate()
            .map(|(id, &kind)| NodeOut { id, kind })
            .collect();
        Ok(serde_json::to_string_pretty(&GraphOut {
            m: self.m,
            architecture: self.architecture,
            nodes,
            edges: &self.edges,
        })?)
    }
}

fn make_stats(count: BigUint, total: BigUint, input: usize, output: usize) -> Result<PathStats> {
    if count.is_zero() {
        return Err(Error::Inconsistent(format!(
            "no path from input {input} to output {output}"
        )));
    }
    let mean = BigRational::new(total.clone().into(), count.clone().into());
    Ok(PathStats {
        count,
        total_length: total,
        mean_length: mean,
    })
}

fn moment(hist: &[f64], k: f64) -> Option<f64> {
    let total: f64 = hist.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let s: f64 = hist
        .iter()
        .enumerate()
        .map(|(len, &c)| c * (len as f64).powf(k))
        .sum();
    Some(s / total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centrality {
    Closeness,
    Betweenness,
    Degree,
    Eigenvector,
    Katz,
    PageRank,
}

impl Centrality {
    pub const ALL: [Centrality; 6] = [
        Centrality::Closeness,
        Centrality::Betweenness,
        Centrality::Degree,
        Centrality::Eigenvector,
        Centrality::Katz,
        Centrality::PageRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Centrality::Closeness => "closeness",
            Centrality::Betweenness => "betweenness",
            Centrality::Degree => "degree",
            Centrality::Eigenvector => "eigenvector",
            Centrality::Katz => "katz",
            Centrality::PageRank => "pagerank",
        }
    }
}

impl std::str::FromStr for Centrality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Centrality::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown centrality measure '{s}'")))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CentralityOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        CentralityOptions {
            tolerance: 1e-8,
            max_iterations: 10_000,
            damping: 0.85,
        }
    }
}

impl MeshGraph {
    /// Centrality of every node, keyed by node id.
    ///
    /// Degree, betweenness and PageRank use edge directions. A DAG has no
    /// nonzero adjacency eigenvalue, so closeness, eigenvector and Katz are
    /// evaluated on the underlying undirected graph.
    pub fn centrality(&self, measure: Centrality) -> Result<BTreeMap<NodeId, f64>> {
        self.centrality_with(measure, &CentralityOptions::default())
    }

    pub fn centrality_with(
        &self,
        measure: Centrality,
        opts: &CentralityOptions,
    ) -> Result<BTreeMap<NodeId, f64>> {
        let values = match measure {
            Centrality::Degree => (0..self.node_count())
                .map(|n| (self.in_degree(n) + self.out_degree(n)) as f64)
                .collect(),
            Centrality::Closeness => self.closeness(),
            Centrality::Betweenness => self.betweenness(),
            Centrality::Eigenvector => self.eigenvector(opts)?.0,
            Centrality::Katz => self.katz(opts)?,
            Centrality::PageRank => self.pagerank(opts)?,
        };
        Ok(values.into_iter().enumerate().collect())
    }

    fn undirected_neighbours(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.successors(n).chain(self.predecessors(n))
    }

    fn closeness(&self) -> Vec<f64> {
        let n = self.node_count();
        (0..n)
            .map(|s| {
                let mut dist = vec![usize::MAX; n];
                dist[s] = 0;
                let mut q = VecDeque::from([s]);
                let (mut total, mut reached) = (0usize, 0usize);
                while let Some(u) = q.pop_front() {
                    for v in self.undirected_neighbours(u) {
                        if dist[v] == usize::MAX {
                            dist[v] = dist[u] + 1;
                            total += dist[v];
                            reached += 1;
                            q.push_back(v);
                        }
                    }
                }
                if total == 0 {
                    0.0
                } else {
                    reached as f64 / total as f64
                }
            })
            .collect()
    }

    // Brandes' algorithm on the directed graph.
    fn betweenness(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut cb = vec![0.0; n];
        for s in 0..n {
            let mut stack = Vec::new();
            let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
            let mut sigma = vec![0.0f64; n];
            let mut dist = vec![i64::MAX; n];
            sigma[s] = 1.0;
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                stack.push(v);
                for w in self.successors(v) {
                    if dist[w] == i64::MAX {
                        dist[w] = dist[v] + 1;
                        q.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            let mut delta = vec![0.0; n];
            while let Some(w) = stack.pop() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    cb[w] += delta[w];
                }
            }
        }
        cb
    }

    // Power iteration on A + I (undirected); returns (vector, lambda_max of A).
    fn eigenvector(&self, opts: &CentralityOptions) -> Result<(Vec<f64>, f64)> {
        let n = self.node_count();
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..opts.max_iterations {
            let mut y = x.clone();
            for (u, yu) in y.iter_mut().enumerate() {
                for v in self.undirected_neighbours(u) {
                    *yu += x[v];
                }
            }
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            y.iter_mut().for_each(|v| *v /= norm);
            let diff: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            x = y;
            if diff < opts.tolerance {
                // Rayleigh quotient of A
                let mut lambda = 0.0;
                for u in 0..n {
                    let ax: f64 = self.undirected_neighbours(u).map(|v| x[v]).sum();
                    lambda += x[u] * ax;
                }
                return Ok((x, lambda));
            }
        }
        Err(Error::NoConvergence {
            what: "eigenvector centrality",
            iterations: opts.max_iterations,
        })
    }

    fn katz(&self, opts: &CentralityOptions) -> Result<Vec<f64>> {
        let (_, lambda) = self.eigenvector(opts)?;
        let alpha = if lambda > 0.0 { 0.5 / lambda } else { 0.1 };
        let n = self.node_count();
        let mut x = vec![0.0; n];
        for _ in 0..opts.max_iterations {
            let y: Vec<f64> = (0..n)
                .map(|u| 1.0 + alpha * self.undirected_neighbours(u).map(|v| x[v]).sum::<f64>())
                .collect();
            let diff: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            x = y;
            if diff < opts.tolerance {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                return Ok(x.into_iter().map(|v| v / norm).collect());
            }
        }
        Err(Error::NoConvergence {
            what: "Katz centrality",
            iterations: opts.max_iterations,
        })
    }

    fn pagerank(&self, opts: &CentralityOptions) -> Result<Vec<f64>> {
        let n = self.node_count();
        let d = opts.damping;
        let mut x = vec![1.0 / n as f64; n];
        for _ in 0..opts.max_iterations {
            let dangling: f64 = (0..n).filter(|&u| self.out_degree(u) == 0).map(|u| x[u]).sum();
            let base = (1.0 - d) / n as f64 + d * dangling / n as f64;
            let mut y = vec![base; n];
            for (u, &xu) in x.iter().enumerate() {
                let deg = self.out_degree(u);
                if deg > 0 {
                    let share = d * xu / deg as f64;
                    for v in self.successors(u) {
                        y[v] += share;
                    }
                }
            }
            let diff: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            x = y;
            if diff < opts.tolerance {
                return Ok(x);
            }
        }
        Err(Error::NoConvergence {
            what: "PageRank",
            iterations: opts.max_iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh() {
        let g = build_graph(2, Architecture::Rectangular).unwrap();
        assert_eq!(g.mz_count(), 1);
        assert_eq!(g.edges().len(), 4);
        let s = g.path_stats(0, 0).unwrap();
        assert_eq!(s.count, BigUint::one());
        assert_eq!(s.total_length, BigUint::from(2u32));
        assert_eq!(g.sensitivity_index(2).unwrap(), 5);
        assert!((g.flow(2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        for c in Centrality::ALL {
            let map = g.centrality(c).unwrap();
            assert!(map[&2].is_finite());
        }
    }

    #[test]
    fn every_mz_has_two_in_and_two_out_edges() {
        for arch in Architecture::ALL {
            for m in 2..10 {
                let g = build_graph(m, arch).unwrap();
                for n in g.mz_nodes() {
                    assert_eq!((g.in_degree(n), g.out_degree(n)), (2, 2));
                    assert!(!g.reaching_inputs(n).is_empty());
                    assert!(!g.reachable_outputs(n).is_empty());
                }
                for e in g.edges() {
                    assert!(e.from < e.to, "node ids must be topological");
                }
            }
        }
    }

    #[test]
    fn first_layer_mz_sees_two_inputs() {
        let g = build_graph(12, Architecture::Rectangular).unwrap();
        assert_eq!(g.mz_count(), 66);
        let n = g.mz_node(CellPosition::new(0, 4)).unwrap();
        assert_eq!(g.reaching_inputs(n), vec![4, 5]);
    }

    #[test]
    fn three_mode_counts() {
        for arch in Architecture::ALL {
            let g = build_graph(3, arch).unwrap();
            assert_eq!(g.path_stats(0, 0).unwrap().count, BigUint::from(2u32));
        }
    }

    #[test]
    fn mirror_is_an_involution_preserving_index() {
        for arch in Architecture::ALL {
            for m in 2..9 {
                let g = build_graph(m, arch).unwrap();
                for n in 0..g.node_count() {
                    assert_eq!(g.mirror(g.mirror(n)), n);
                }
                for n in g.mz_nodes() {
                    assert_eq!(
                        g.sensitivity_index(n).unwrap(),
                        g.sensitivity_index(g.mirror(n)).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn pagerank_sums_to_one() {
        let g = build_graph(7, Architecture::Triangular).unwrap();
        let pr = g.centrality(Centrality::PageRank).unwrap();
        let s: f64 = pr.values().sum();
        assert!((s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn non_convergence_is_reported() {
        let g = build_graph(6, Architecture::Rectangular).unwrap();
        let opts = CentralityOptions {
            max_iterations: 1,
            ..Default::default()
        };
        assert!(matches!(
            g.centrality_with(Centrality::PageRank, &opts),
            Err(Error::NoConvergence { .. })
        ));
    }
}
