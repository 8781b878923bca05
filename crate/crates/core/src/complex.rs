//! Vietoris-Rips complexes of a region, truncated at a maximum dimension.

use crate::chain::{Simplex, Vertices};
use crate::cloud::{NeighborGraph, PointCloud};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::sparse::{Column, SparseMatrix};

pub const DEFAULT_BUDGET: usize = 10_000_000;

/// All simplices of dimension `<= max_dim` on `points` whose pairwise
/// distances are at most `scale`. Each dimension is sorted lexicographically.
#[derive(Debug, Clone)]
pub struct RipsComplex {
    points: Vec<usize>,
    scale: f64,
    max_dim: usize,
    simplices: Vec<Vec<Simplex>>,
}

impl RipsComplex {
    /// Expands simplices by intersecting upper neighbor lists. `points` must
    /// be sorted and distinct.
    pub fn enumerate(
        points: &[usize],
        graph: &NeighborGraph,
        scale: f64,
        max_dim: usize,
        budget: usize,
    ) -> Result<Self> {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        let mut in_region = vec![false; graph.len()];
        for &p in points {
            in_region[p] = true;
        }
        let cutoff = scale + graph.slack();
        let upper: Vec<Vec<u32>> = points
            .iter()
            .map(|&v| {
                graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&(u, d)| u as usize > v && in_region[u as usize] && d <= cutoff)
                    .map(|&(u, _)| u)
                    .collect()
            })
            .collect();
        let slot = |v: u32| points.binary_search(&(v as usize)).unwrap();

        let mut simplices: Vec<Vec<Simplex>> = vec![Vec::new(); max_dim + 1];
        let mut count = 0usize;
        let mut stack: Vec<(Vertices, Vec<u32>)> = Vec::new();
        for (i, &v) in points.iter().enumerate() {
            stack.push((smallvec::smallvec![v as u32], upper[i].clone()));
            while let Some((sigma, cand)) = stack.pop() {
                let dim = sigma.len() - 1;
                count += 1;
                if count > budget {
                    return Err(Error::BudgetExceeded {
                        count,
                        budget,
                        region: format!("{} points at scale {scale}", points.len()),
                    });
                }
                if dim < max_dim {
                    // push in reverse so that children pop in increasing order
                    for (pos, &u) in cand.iter().enumerate().rev() {
                        let nu = &upper[slot(u)];
                        let next: Vec<u32> =
                            cand[pos + 1..].iter().copied().filter(|w| nu.binary_search(w).is_ok()).collect();
                        let mut tau = sigma.clone();
                        tau.push(u);
                        stack.push((tau, next));
                    }
                }
                simplices[dim].push(Simplex::from_sorted(sigma));
            }
        }
        Ok(RipsComplex { points: points.to_vec(), scale, max_dim, simplices })
    }

    /// Convenience constructor computing distances directly from the cloud.
    pub fn from_cloud(points: &[usize], cloud: &PointCloud, scale: f64, max_dim: usize) -> Result<Self> {
        for &p in points {
            if p >= cloud.len() {
                return Err(Error::IndexOutOfRange { index: p, len: cloud.len() });
            }
        }
        let mut sorted = points.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let graph = NeighborGraph::build(cloud, scale, 0.0);
        RipsComplex::enumerate(&sorted, &graph, scale, max_dim, DEFAULT_BUDGET)
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn simplices(&self, dim: usize) -> &[Simplex] {
        self.simplices.get(dim).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices(dim).len()
    }

    pub fn total(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.simplices.get(s.dim())?.binary_search(s).ok()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index_of(s).is_some()
    }

    /// Boundary matrix of dimension `dim`: rows are `(dim-1)`-simplices,
    /// columns `dim`-simplices.
    pub fn boundary_matrix(&self, dim: usize, field: PrimeField) -> Result<SparseMatrix> {
        if dim == 0 || dim > self.max_dim {
            return Err(Error::DimensionOutOfRange { dim, max: self.max_dim });
        }
        let rows = &self.simplices[dim - 1];
        let cols = self.simplices[dim]
            .iter()
            .map(|s| {
                let mut col: Column = s
                    .faces()
                    .map(|(i, face)| {
                        let r = rows.binary_search(&face).expect("Rips complex is face-closed");
                        (r as u32, field.sign(i))
                    })
                    .collect();
                col.sort_unstable_by_key(|&(r, _)| r);
                col
            })
            .collect();
        Ok(SparseMatrix::new(rows.len(), cols))
    }
}
