//! Synthetic benchmark graphs over point clouds.
//!
//! Support points are clustered with greedy farthest-point clustering; the
//! centers become nodes, a random set of `⌈M ln M⌉` or `⌈M^{3/2}⌉` node pairs
//! becomes the edge set with Euclidean lengths, and one random edge per extra
//! connected component is added to make the graph connected.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, UstError};
use crate::graph::{NodeId, PhysicalGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(UstError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(UstError::NonFiniteCoordinate(index));
            }
        }
        Ok(PointCloud { points, dim })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `n` points drawn uniformly from the unit cube in `dim` dimensions.
    pub fn uniform(n: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect();
        PointCloud { points, dim }
    }
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Indices of the chosen centers in the input cloud, in selection order.
    pub centers: Vec<usize>,
    pub centroids: PointCloud,
    /// Cluster id (index into `centers`) of every input point.
    pub assignment: Vec<usize>,
}

/// Greedy 2-approximate k-center clustering with a seeded first center.
pub fn farthest_point_clustering(pc: &PointCloud, m: usize, seed: u64) -> Result<Clustering> {
    if pc.is_empty() {
        return Err(UstError::EmptyCloud);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..pc.len());
    farthest_point_clustering_from(pc, m, first)
}

/// Same as [`farthest_point_clustering`] with an explicit first center.
pub fn farthest_point_clustering_from(pc: &PointCloud, m: usize, first: usize) -> Result<Clustering> {
    if pc.is_empty() {
        return Err(UstError::EmptyCloud);
    }
    if m == 0 {
        return Err(UstError::InvalidParams("number of clusters must be at least 1".into()));
    }
    let pts = pc.points();
    let mut nearest = vec![0usize; pts.len()];
    let mut gap: Vec<f64> = pts.iter().map(|p| euclidean(p, &pts[first])).collect();
    let mut centers = vec![first];
    while centers.len() < m {
        let (far, &d) = gap
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        if d == 0.0 {
            // every remaining point coincides with a center
            break;
        }
        let c = centers.len();
        centers.push(far);
        for (i, p) in pts.iter().enumerate() {
            let dc = euclidean(p, &pts[far]);
            if dc < gap[i] {
                gap[i] = dc;
                nearest[i] = c;
            }
        }
    }
    let centroids = PointCloud {
        points: centers.iter().map(|&i| pts[i].clone()).collect(),
        dim: pc.dim(),
    };
    Ok(Clustering {
        centers,
        centroids,
        assignment: nearest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphDensity {
    /// `⌈M ln M⌉` sampled edges.
    Log,
    /// `⌈M^{3/2}⌉` sampled edges.
    Sqrt,
}

impl GraphDensity {
    /// Number of sampled pairs before the connection step, capped by the pair count.
    pub fn target_edges(self, m: usize) -> usize {
        let mf = m as f64;
        let raw = match self {
            GraphDensity::Log => (mf * mf.ln()).ceil(),
            GraphDensity::Sqrt => (mf * mf.sqrt()).ceil(),
        };
        (raw as usize).min(m * (m - 1) / 2)
    }
}

impl std::str::FromStr for GraphDensity {
    type Err = UstError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(GraphDensity::Log),
            "sqrt" => Ok(GraphDensity::Sqrt),
            other => Err(UstError::InvalidParams(format!(
                "unknown density {other:?}, expected log or sqrt"
            ))),
        }
    }
}

/// `k`-th unordered pair `(i, j)` with `i > j` in the order (1,0), (2,0), (2,1), (3,0), ...
fn decode_pair(k: usize) -> (usize, usize) {
    let mut i = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0) as usize;
    while i * (i - 1) / 2 > k {
        i -= 1;
    }
    while (i + 1) * i / 2 <= k {
        i += 1;
    }
    (i, k - i * (i - 1) / 2)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn check_distinct(points: &[Vec<f64>]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .iter()
            .zip(&points[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(UstError::DegenerateCentroids(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

/// Random connected graph over `centroids` with Euclidean edge lengths.
pub fn build_random_graph(centroids: &PointCloud, density: GraphDensity, seed: u64) -> Result<PhysicalGraph> {
    let m = centroids.len();
    if m < 2 {
        return Err(UstError::SingleNode);
    }
    let pts = centroids.points();
    check_distinct(pts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = density.target_edges(m);
    let picks = index::sample(&mut rng, m * (m - 1) / 2, target);

    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(target + m);
    let mut uf = UnionFind::new(m);
    for k in picks {
        let (i, j) = decode_pair(k);
        edges.push((j, i, euclidean(&pts[i], &pts[j])));
        uf.union(i, j);
    }

    let mut members: Vec<Vec<NodeId>> = Vec::new();
    let mut slot = vec![usize::MAX; m];
    for v in 0..m {
        let r = uf.find(v);
        if slot[r] == usize::MAX {
            slot[r] = members.len();
            members.push(Vec::new());
        }
        members[slot[r]].push(v);
    }
    members.shuffle(&mut rng);
    for k in 1..members.len() {
        let a = members[k][rng.random_range(0..members[k].len())];
        let prev = &members[rng.random_range(0..k)];
        let b = prev[rng.random_range(0..prev.len())];
        edges.push((a.min(b), a.max(b), euclidean(&pts[a], &pts[b])));
    }
    PhysicalGraph::new(m, &edges)
}
