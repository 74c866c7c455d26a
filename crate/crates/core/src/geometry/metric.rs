use super::mesh::{norm3, MeshSurface};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

/// Weighted adjacency used for shortest-path distances.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    lengths: Vec<f64>,
}

impl LengthGraph {
    /// Builds a symmetric graph; parallel edges keep the shorter length.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, l) in edges {
            if i == j {
                continue;
            }
            adj[i].push((j, l));
            adj[j].push((i, l));
        }
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut lengths = Vec::new();
        for mut row in adj {
            row.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));
            row.dedup_by_key(|e| e.0);
            for (j, l) in row {
                targets.push(j);
                lengths.push(l);
            }
            offsets.push(targets.len());
        }
        LengthGraph { offsets, targets, lengths }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.targets[r.clone()].iter().copied().zip(self.lengths[r].iter().copied())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut g = self.clone();
        g.lengths.iter_mut().for_each(|l| *l *= s);
        g
    }

    /// Single-source shortest paths; ties between equal tentative distances
    /// are settled in increasing vertex id.
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(o.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        let n = self.n();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Item(0.0, source));
        while let Some(Item(d, v)) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for (w, l) in self.neighbors(v) {
                let nd = d + l;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Item(nd, w));
                }
            }
        }
        dist
    }
}

/// How pairwise distances of a space are realized.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// Shortest paths over a length graph.
    Graph(LengthGraph),
    /// Explicit row-major distance matrix.
    Dense(Vec<f64>),
    /// Flat cone of total angle `total`: vertices in polar coordinates.
    Cone { radius: Vec<f64>, angle: Vec<f64>, total: f64 },
}

/// Distance scheme for mesh-built spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshMetric {
    /// Dijkstra over mesh edges.
    EdgeGraph,
    /// Dijkstra over straight chords to every vertex within `k` edge rings.
    RingChords(usize),
}

impl Default for MeshMetric {
    fn default() -> Self {
        MeshMetric::RingChords(4)
    }
}

pub(crate) fn cone_distance(r1: f64, a1: f64, r2: f64, a2: f64, total: f64) -> f64 {
    let mut da = (a1 - a2).abs() % total;
    da = da.min(total - da);
    if da >= std::f64::consts::PI {
        r1 + r2
    } else {
        (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * da.cos()).max(0.0).sqrt()
    }
}

impl Metric {
    pub fn distances_from(&self, n: usize, x: usize) -> Vec<f64> {
        match self {
            Metric::Graph(g) => g.dijkstra(x),
            Metric::Dense(d) => d[x * n..(x + 1) * n].to_vec(),
            Metric::Cone { radius, angle, total } => (0..n)
                .map(|y| if y == x { 0.0 } else { cone_distance(radius[x], angle[x], radius[y], angle[y], *total) })
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Metric {
        match self {
            Metric::Graph(g) => Metric::Graph(g.scaled(s)),
            Metric::Dense(d) => Metric::Dense(d.iter().map(|v| v * s).collect()),
            Metric::Cone { radius, angle, total } => Metric::Cone {
                radius: radius.iter().map(|r| r * s).collect(),
                angle: angle.clone(),
                total: *total,
            },
        }
    }
}

/// Chord edges from each vertex to all vertices within `k` combinatorial
/// rings, with straight-line lengths of the unfolded edge path.
pub(crate) fn ring_chord_edges(mesh: &MeshSurface, adjacency: &[Vec<usize>], k: usize) -> Vec<(usize, usize, f64)> {
    let n = mesh.vertex_count();
    let mut out = Vec::new();
    let mut depth = vec![usize::MAX; n];
    let mut offset = vec![[0.0; 3]; n];
    for i in 0..n {
        let mut touched = vec![i];
        depth[i] = 0;
        offset[i] = [0.0; 3];
        let mut q = VecDeque::from([i]);
        while let Some(v) = q.pop_front() {
            if depth[v] == k {
                continue;
            }
            for &w in &adjacency[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    let e = mesh.edge_vector(v, w);
                    offset[w] = [offset[v][0] + e[0], offset[v][1] + e[1], offset[v][2] + e[2]];
                    touched.push(w);
                    q.push_back(w);
                }
            }
        }
        for &w in &touched {
            if w > i {
                out.push((i, w, norm3(offset[w])));
            }
            depth[w] = usize::MAX;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dijkstra_takes_shortcut() {
        let g = LengthGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 0.1)]);
        let d = g.dijkstra(0);
        assert_eq!(d, vec![0.0, 1.0, 0.1]);
    }

    #[test]
    fn cone_distance_wraps_and_saturates() {
        let t = 1.5 * std::f64::consts::PI;
        assert!((cone_distance(1.0, 0.0, 1.0, t - 0.1, t) - cone_distance(1.0, 0.0, 1.0, 0.1, t)).abs() < 1e-14);
        assert!((cone_distance(1.0, 0.0, 2.0, 1.2 * std::f64::consts::PI, 3.0 * std::f64::consts::PI) - 3.0).abs() < 1e-14);
    }
}
