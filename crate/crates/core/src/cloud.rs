//! Point clouds in Euclidean space and cached neighbor structure.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A finite set of `dim`-dimensional points. Indices `0..len()` are global and
/// never renumbered; regions are index sets into the same cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if !points.is_empty() && dim == 0 {
            return Err(Error::InvalidCloud("points must have at least one coordinate".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidCloud(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if let Some(x) = p.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidCloud(format!("point {i} has non-finite coordinate {x}")));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidCloud(format!(
                "{} values cannot be split into {dim}-dimensional points",
                coords.len()
            )));
        }
        PointCloud::new(coords.chunks(dim).map(|c| c.to_vec()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn coord(&self, i: usize, axis: usize) -> f64 {
        self.coords[i * self.dim + axis]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim.max(1))
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len() })
        }
    }

    /// Euclidean distance; every distance in the crate goes through here so
    /// that equal pairs always compare bit-identically.
    #[inline]
    pub(crate) fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.dist(i, j))
    }

    /// Largest pairwise distance among `vertices`; 0 for a singleton.
    pub fn diameter(&self, vertices: &[usize]) -> Result<f64> {
        if vertices.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        for &v in vertices {
            self.check(v)?;
        }
        let mut best = 0.0f64;
        for (a, &i) in vertices.iter().enumerate() {
            for &j in &vertices[a + 1..] {
                best = best.max(self.dist(i, j));
            }
        }
        Ok(best)
    }

    /// Per-axis minimum and the common range `R` (largest per-axis spread).
    pub fn bounding_box(&self) -> (Vec<f64>, f64) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for (axis, &x) in p.iter().enumerate() {
                lo[axis] = lo[axis].min(x);
                hi[axis] = hi[axis].max(x);
            }
        }
        let range = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| h - l)
            .fold(0.0f64, f64::max);
        (lo, range)
    }
}

/// Adjacency lists of all pairs within `threshold`, computed once and reused
/// for every scale below it.
#[derive(Debug, Clone)]
pub struct NeighborGraph {
    threshold: f64,
    slack: f64,
    adjacency: Vec<Vec<(u32, f64)>>,
}

const BRUTE_FORCE_LIMIT: usize = 256;

impl NeighborGraph {
    /// Pairs with `distance <= max_scale + slack`.
    pub fn build(cloud: &PointCloud, max_scale: f64, slack: f64) -> Self {
        let threshold = max_scale + slack;
        let n = cloud.len();
        let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut push = |i: usize, j: usize| {
            let d = cloud.dist(i, j);
            if d <= threshold {
                adjacency[i].push((j as u32, d));
                adjacency[j].push((i as u32, d));
            }
        };
        if n <= BRUTE_FORCE_LIMIT || cloud.dim() > 4 || !(threshold > 0.0) {
            for i in 0..n {
                for j in i + 1..n {
                    push(i, j);
                }
            }
        } else {
            let (lo, _) = cloud.bounding_box();
            let key = |i: usize| -> Vec<i64> {
                (0..cloud.dim())
                    .map(|a| ((cloud.coord(i, a) - lo[a]) / threshold).floor() as i64)
                    .collect()
            };
            let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            for i in 0..n {
                cells.entry(key(i)).or_default().push(i);
            }
            let d = cloud.dim();
            let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
                .map(|mut code| {
                    (0..d)
                        .map(|_| {
                            let o = (code % 3) as i64 - 1;
                            code /= 3;
                            o
                        })
                        .collect()
                })
                .collect();
            for i in 0..n {
                let base = key(i);
                for off in &offsets {
                    let probe: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
                    if let Some(members) = cells.get(&probe) {
                        for &j in members {
                            if j > i {
                                push(i, j);
                            }
                        }
                    }
                }
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }
        NeighborGraph { threshold, slack, adjacency }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Sorted neighbors of `i` with their distances.
    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.adjacency[i]
    }

    /// Whether the edge `{i, j}` is present at `scale`.
    pub fn adjacent(&self, i: usize, j: usize, scale: f64) -> bool {
        let list = &self.adjacency[i];
        match list.binary_search_by_key(&(j as u32), |&(k, _)| k) {
            Ok(pos) => list[pos].1 <= scale + self.slack,
            Err(_) => false,
        }
    }
}
