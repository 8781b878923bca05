//! Homology of a single region by boundary-matrix reduction, and the
//! filtration-ordered persistence barcode used as a global oracle.

use crate::chain::{Chain, Simplex};
use crate::cloud::{NeighborGraph, PointCloud};
use crate::complex::RipsComplex;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::sparse::{self, axpy, entry, low, Column, Reduction};

pub use crate::sparse::reduce;

/// Per-dimension data of a [`LeafSolver`].
#[derive(Debug, Clone)]
struct LeafDim {
    /// Row `t` is the lowest entry of boundary column `boundary_of_top[t]`.
    boundary_of_top: Vec<Option<u32>>,
    /// Row `t` is the top entry of homology representative `rep_of_top[t]`.
    rep_of_top: Vec<Option<u32>>,
    /// Representative cycles as columns over this dimension's simplices.
    rep_columns: Vec<Column>,
    reps: Vec<Chain>,
}

/// Homology of one region's Rips complex in dimensions `0..=max_dim`,
/// answering coordinate and bounding-chain queries.
#[derive(Debug, Clone)]
pub struct LeafSolver {
    field: PrimeField,
    max_dim: usize,
    complex: RipsComplex,
    /// `reductions[n]` reduces the boundary matrix of dimension `n + 1`.
    reductions: Vec<Reduction>,
    dims: Vec<LeafDim>,
}

/// Outcome of eliminating a cycle against the boundary and representative bases.
struct Elimination {
    coords: Vec<u32>,
    /// `(n+1)`-chain, as a column, whose boundary is `z - Σ coords·reps`.
    filling: Column,
}

impl LeafSolver {
    pub fn build(complex: RipsComplex, max_dim: usize, field: PrimeField) -> Result<Self> {
        if complex.max_dim() < max_dim + 1 {
            return Err(Error::DimensionOutOfRange { dim: max_dim + 1, max: complex.max_dim() });
        }
        let reductions: Vec<Reduction> = (1..=max_dim + 1)
            .map(|d| complex.boundary_matrix(d, field).map(|m| sparse::reduce(&m, field)))
            .collect::<Result<_>>()?;
        let mut dims = Vec::with_capacity(max_dim + 1);
        for n in 0..=max_dim {
            let count = complex.count(n);
            let mut boundary_of_top = vec![None; count];
            for (j, col) in reductions[n].r.iter().enumerate() {
                if let Some(lo) = low(col) {
                    boundary_of_top[lo as usize] = Some(j as u32);
                }
            }
            // cycle basis: zero columns of the dimension-n reduction (all
            // vertices when n = 0); those not hit by a boundary pivot carry homology
            let cycle_tops: Vec<(usize, Column)> = if n == 0 {
                (0..count).map(|t| (t, vec![(t as u32, 1)])).collect()
            } else {
                let red = &reductions[n - 1];
                red.zero_columns().map(|t| (t, red.v[t].clone())).collect()
            };
            let mut rep_of_top = vec![None; count];
            let mut rep_columns = Vec::new();
            for (t, col) in cycle_tops {
                if boundary_of_top[t].is_none() {
                    rep_of_top[t] = Some(rep_columns.len() as u32);
                    rep_columns.push(col);
                }
            }
            let simplices = complex.simplices(n);
            let reps = rep_columns.iter().map(|c| column_to_chain(c, simplices, n, field)).collect();
            dims.push(LeafDim { boundary_of_top, rep_of_top, rep_columns, reps });
        }
        Ok(LeafSolver { field, max_dim, complex, reductions, dims })
    }

    /// Enumerates the region's complex and builds the solver.
    pub fn from_points(
        points: &[usize],
        graph: &NeighborGraph,
        scale: f64,
        max_dim: usize,
        field: PrimeField,
        budget: usize,
    ) -> Result<Self> {
        let complex = RipsComplex::enumerate(points, graph, scale, max_dim + 1, budget)?;
        LeafSolver::build(complex, max_dim, field)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn complex(&self) -> &RipsComplex {
        &self.complex
    }

    pub fn betti(&self, n: usize) -> usize {
        self.dims.get(n).map_or(0, |d| d.reps.len())
    }

    /// Rank of the boundary map from dimension `n + 1` to `n`.
    pub fn boundary_rank(&self, n: usize) -> usize {
        self.reductions.get(n).map_or(0, Reduction::rank)
    }

    pub fn representatives(&self, n: usize) -> &[Chain] {
        self.dims.get(n).map_or(&[], |d| d.reps.as_slice())
    }

    fn check_dim(&self, z: &Chain) -> Result<usize> {
        if z.field() != self.field {
            return Err(Error::FieldMismatch { left: self.field.modulus(), right: z.field().modulus() });
        }
        if z.dim() > self.max_dim {
            return Err(Error::DimensionOutOfRange { dim: z.dim(), max: self.max_dim });
        }
        Ok(z.dim())
    }

    fn eliminate(&self, z: &Chain) -> Result<Elimination> {
        let n = self.check_dim(z)?;
        let f = self.field;
        let dim = &self.dims[n];
        let red = &self.reductions[n];
        let mut dense = vec![0u32; self.complex.count(n)];
        for (s, c) in z.terms() {
            let i = self
                .complex
                .index_of(s)
                .ok_or_else(|| Error::UnsupportedSimplex(s.to_string()))?;
            dense[i] = c;
        }
        let mut coords = vec![0u32; dim.reps.len()];
        let mut filling: Column = Vec::new();
        for t in (0..dense.len()).rev() {
            let c = dense[t];
            if c == 0 {
                continue;
            }
            let (col, scale) = if let Some(j) = dim.boundary_of_top[t] {
                let j = j as usize;
                let m = f.div(c, entry(&red.r[j], t as u32));
                filling = axpy(f, &filling, m, &red.v[j]);
                (&red.r[j], m)
            } else if let Some(r) = dim.rep_of_top[t] {
                coords[r as usize] = c;
                (&dim.rep_columns[r as usize], c)
            } else {
                return Err(Error::NotACycle);
            };
            let neg = f.neg(scale);
            for &(row, v) in col {
                let row = row as usize;
                dense[row] = f.add(dense[row], f.mul(neg, v));
            }
        }
        Ok(Elimination { coords, filling })
    }

    /// Coordinates of the homology class of the cycle `z` in the
    /// representative basis.
    pub fn coords(&self, z: &Chain) -> Result<Vec<u32>> {
        self.eliminate(z).map(|e| e.coords)
    }

    /// A chain `w` with `∂w = z`, or `None` when `z` is a non-bounding cycle.
    pub fn bound(&self, z: &Chain) -> Result<Option<Chain>> {
        let e = self.eliminate(z)?;
        if e.coords.iter().any(|&c| c != 0) {
            return Ok(None);
        }
        let n = z.dim();
        let w = column_to_chain(&e.filling, self.complex.simplices(n + 1), n + 1, self.field);
        if w.boundary() != *z && !(z.is_zero() && w.is_zero()) {
            return Err(Error::Internal(format!("leaf bound failed: ∂w ≠ z for z = {z}")));
        }
        Ok(Some(w))
    }
}

pub(crate) fn column_to_chain(col: &Column, simplices: &[Simplex], dim: usize, field: PrimeField) -> Chain {
    let mut c = Chain::zero(dim, field);
    for &(r, v) in col {
        c.add_term(simplices[r as usize].clone(), v);
    }
    c
}

/// One interval of a persistence barcode. `death == None` is an open bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub dim: usize,
    pub birth: f64,
    pub death: Option<f64>,
}

impl Bar {
    pub fn alive_at(&self, scale: f64) -> bool {
        self.birth <= scale && self.death.is_none_or(|d| scale < d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BarcodeOptions {
    /// Zero out columns already known to reduce to zero (twist optimization).
    pub clearing: bool,
}

/// Barcode of the Rips filtration of `points` up to `max_scale`, in homology
/// dimensions `0..=max_dim`. Simplices enter in order of diameter, then
/// dimension, then vertex tuple. Zero-length bars are dropped.
#[allow(clippy::too_many_arguments)]
pub fn persistence_barcode(
    points: &[usize],
    cloud: &PointCloud,
    graph: &NeighborGraph,
    max_scale: f64,
    max_dim: usize,
    field: PrimeField,
    budget: usize,
    options: BarcodeOptions,
) -> Result<Vec<Bar>> {
    let complex = RipsComplex::enumerate(points, graph, max_scale, max_dim + 1, budget)?;
    let mut order: Vec<(f64, usize, &Simplex)> = Vec::with_capacity(complex.total());
    for d in 0..=max_dim + 1 {
        for s in complex.simplices(d) {
            let v: Vec<usize> = s.vertices().iter().map(|&x| x as usize).collect();
            order.push((cloud.diameter(&v)?, d, s));
        }
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then_with(|| a.2.cmp(b.2)));
    let position: std::collections::HashMap<&Simplex, u32> =
        order.iter().enumerate().map(|(i, &(_, _, s))| (s, i as u32)).collect();

    let mut columns: Vec<Column> = order
        .iter()
        .map(|&(_, _, s)| {
            let mut col: Column = s.faces().map(|(i, face)| (position[&face], field.sign(i))).collect();
            col.sort_unstable_by_key(|&(r, _)| r);
            col
        })
        .collect();

    let total = columns.len();
    let mut pivot_col: Vec<Option<u32>> = vec![None; total];
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); max_dim + 2];
    for (i, &(_, d, _)) in order.iter().enumerate() {
        by_dim[d].push(i);
    }
    let dim_order: Vec<usize> = if options.clearing {
        (1..=max_dim + 1).rev().collect()
    } else {
        (1..=max_dim + 1).collect()
    };
    for d in dim_order {
        for &j in &by_dim[d] {
            if options.clearing && pivot_col[j].is_some() {
                columns[j].clear();
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(lo) = low(&col) {
                let Some(k) = pivot_col[lo as usize] else { break };
                let other = &columns[k as usize];
                let m = field.div(entry(&col, lo), entry(other, lo));
                col = axpy(field, &col, field.neg(m), other);
            }
            if let Some(lo) = low(&col) {
                pivot_col[lo as usize] = Some(j as u32);
            }
            columns[j] = col;
        }
    }

    let mut bars = Vec::new();
    let mut paired = vec![false; total];
    for (j, col) in columns.iter().enumerate() {
        if let Some(lo) = low(col) {
            let lo = lo as usize;
            paired[lo] = true;
            paired[j] = true;
            let (birth, d, _) = order[lo];
            let death = order[j].0;
            if death > birth {
                bars.push(Bar { dim: d, birth, death: Some(death) });
            }
        }
    }
    for (i, &(birth, d, _)) in order.iter().enumerate() {
        if !paired[i] && d <= max_dim && columns[i].is_empty() {
            bars.push(Bar { dim: d, birth, death: None });
        }
    }
    bars.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(b.death.unwrap_or(f64::INFINITY).total_cmp(&a.death.unwrap_or(f64::INFINITY)))
    });
    Ok(bars)
}

/// Betti numbers `0..=max_dim` at `scale` read off a barcode.
pub fn betti_from_barcode(bars: &[Bar], scale: f64, max_dim: usize) -> Vec<usize> {
    let mut out = vec![0; max_dim + 1];
    for b in bars {
        if b.dim <= max_dim && b.alive_at(scale) {
            out[b.dim] += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn leaf(cloud: &PointCloud, eps: f64, max_dim: usize, p: u32) -> LeafSolver {
        let all: Vec<usize> = (0..cloud.len()).collect();
        let g = NeighborGraph::build(cloud, eps, 0.0);
        LeafSolver::from_points(&all, &g, eps, max_dim, f(p), 1 << 24).unwrap()
    }

    fn square() -> PointCloud {
        PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    fn hexagon() -> PointCloud {
        PointCloud::new(
            (0..6)
                .map(|i| {
                    let a = std::f64::consts::PI / 3.0 * i as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v.iter().copied()).unwrap()
    }

    fn chain(dim: usize, p: u32, terms: &[(&[u32], i64)]) -> Chain {
        Chain::from_terms(dim, f(p), terms.iter().map(|(v, c)| (s(v), *c))).unwrap()
    }

    #[test]
    fn unit_square_homology() {
        for p in [2, 3, 5] {
            let l = leaf(&square(), 1.0, 1, p);
            assert_eq!((l.betti(0), l.betti(1)), (1, 1));
            assert_eq!(l.reductions[0].rank(), 3);
        }
    }

    #[test]
    fn empty_and_triangle() {
        let c = square();
        let g = NeighborGraph::build(&c, 1.0, 0.0);
        let l = LeafSolver::from_points(&[], &g, 1.0, 2, f(2), 100).unwrap();
        assert_eq!((0..=2).map(|n| l.betti(n)).collect::<Vec<_>>(), vec![0, 0, 0]);

        let h = 3f64.sqrt() / 2.0;
        let tri = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        let l = leaf(&tri, 1.0 + 1e-12, 1, 3);
        assert_eq!((l.betti(0), l.betti(1)), (1, 0));
    }

    #[test]
    fn square_cycle_coords_and_bound() {
        let l = leaf(&square(), 1.0, 1, 2);
        // sides: [0,1], [1,2], [2,3], [0,3]
        let z = chain(1, 2, &[(&[0, 1], 1), (&[1, 2], 1), (&[2, 3], 1), (&[0, 3], 1)]);
        assert_eq!(l.coords(&z).unwrap(), vec![1]);
        assert_eq!(l.bound(&z).unwrap(), None);
        assert_eq!(l.bound(&Chain::zero(1, f(2))).unwrap(), Some(Chain::zero(2, f(2))));

        let open = chain(1, 2, &[(&[0, 1], 1)]);
        assert_eq!(l.coords(&open), Err(Error::NotACycle));
        let diag = chain(1, 2, &[(&[0, 2], 1)]);
        assert!(matches!(l.coords(&diag), Err(Error::UnsupportedSimplex(_))));
    }

    #[test]
    fn triangle_boundary_bounds() {
        let h = 3f64.sqrt() / 2.0;
        let tri = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        for p in [2, 3, 5] {
            let l = leaf(&tri, 1.0 + 1e-12, 1, p);
            let z = s(&[0, 1, 2]).boundary(f(p));
            let w = l.bound(&z).unwrap().unwrap();
            assert_eq!(w.boundary(), z);
            assert_eq!(l.coords(&z).unwrap(), Vec::<u32>::new());
        }
    }

    #[test]
    fn representatives_have_unit_coords() {
        let l = leaf(&hexagon(), 1.0 + 1e-9, 1, 3);
        for n in 0..=1 {
            for (i, rep) in l.representatives(n).iter().enumerate() {
                assert!(rep.boundary().is_zero());
                let mut e = vec![0; l.betti(n)];
                e[i] = 1;
                assert_eq!(l.coords(rep).unwrap(), e);
            }
        }
    }

    #[test]
    fn barcode_examples() {
        let two = PointCloud::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let g = NeighborGraph::build(&two, 2.0, 0.0);
        let bars = persistence_barcode(&[0, 1], &two, &g, 2.0, 1, f(2), 1000, Default::default()).unwrap();
        assert_eq!(
            bars,
            vec![Bar { dim: 0, birth: 0.0, death: None }, Bar { dim: 0, birth: 0.0, death: Some(1.0) }]
        );

        let hex = hexagon();
        let g = NeighborGraph::build(&hex, 1.2, 0.0);
        let all: Vec<usize> = (0..6).collect();
        let bars = persistence_barcode(&all, &hex, &g, 1.2, 1, f(2), 1000, Default::default()).unwrap();
        let h1: Vec<&Bar> = bars.iter().filter(|b| b.dim == 1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 1.0).abs() < 1e-9 && h1[0].death.is_none());
        assert_eq!(bars.iter().filter(|b| b.dim == 0).count(), 6);
    }

    #[test]
    fn unit_triangle_h0_bars() {
        let h = 3f64.sqrt() / 2.0;
        let tri = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        let g = NeighborGraph::build(&tri, 2.0, 0.0);
        let bars = persistence_barcode(&[0, 1, 2], &tri, &g, 2.0, 1, f(3), 1000, Default::default()).unwrap();
        let h0: Vec<_> = bars.iter().filter(|b| b.dim == 0).collect();
        assert_eq!(h0.len(), 3);
        assert!(h0[0].death.is_none());
        assert!(h0[1..].iter().all(|b| (b.death.unwrap() - 1.0).abs() < 1e-12));
    }

    /// Betti numbers from the ranks of the boundary matrices, by dense
    /// Gaussian elimination.
    fn rank_oracle(complex: &RipsComplex, max_dim: usize, p: u32) -> Vec<usize> {
        let rank = |d: usize| {
            if d == 0 || d > complex.max_dim() {
                return 0;
            }
            let m = complex.boundary_matrix(d, f(p)).unwrap();
            crate::sparse::tests_support::dense_rank(f(p), m.to_dense())
        };
        (0..=max_dim).map(|n| complex.count(n) - rank(n) - rank(n + 1)).collect()
    }

    fn random_cloud(seed: u64, n: usize, d: usize) -> PointCloud {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new((0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn betti_matches_rank_oracle(seed in 0u64..10_000, n in 4usize..14, pi in 0usize..3, eps in 0.2f64..0.7) {
            let p = [2u32, 3, 5][pi];
            let c = random_cloud(seed, n, 2);
            let l = leaf(&c, eps, 1, p);
            if l.complex().total() <= 200 {
                prop_assert_eq!(vec![l.betti(0), l.betti(1)], rank_oracle(l.complex(), 1, p));
            }
            for k in 0..=1 {
                for (i, rep) in l.representatives(k).iter().enumerate() {
                    let coords = l.coords(rep).unwrap();
                    prop_assert!(coords.iter().enumerate().all(|(j, &c)| c == u32::from(i == j)));
                }
            }
        }

        #[test]
        fn boundaries_have_zero_coords(seed in 0u64..10_000, pi in 0usize..3) {
            use rand::{Rng, SeedableRng};
            let p = [2u32, 3, 5][pi];
            let c = random_cloud(seed, 12, 2);
            let l = leaf(&c, 0.5, 1, p);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let mut w = Chain::zero(2, f(p));
            for t in l.complex().simplices(2) {
                if rng.gen_bool(0.3) {
                    w.add_term(t.clone(), rng.gen_range(1..p));
                }
            }
            let z = w.boundary();
            prop_assert!(l.coords(&z).unwrap().iter().all(|&x| x == 0));
            let back = l.bound(&z).unwrap().unwrap();
            prop_assert_eq!(back.boundary(), z);
        }

        #[test]
        fn barcode_agrees_with_leaf(seed in 0u64..10_000, n in 5usize..40, d in 1usize..4, pi in 0usize..3, clearing: bool) {
            let p = [2u32, 3, 5][pi];
            let c = random_cloud(seed, n, d);
            let all: Vec<usize> = (0..n).collect();
            let eps = 0.6 / d as f64 + 0.1;
            let g = NeighborGraph::build(&c, eps, 0.0);
            let bars = persistence_barcode(&all, &c, &g, eps, 1, f(p), 1 << 22, BarcodeOptions { clearing }).unwrap();
            for s in [eps * 0.3, eps * 0.7, eps] {
                let l = LeafSolver::from_points(&all, &g, s, 1, f(p), 1 << 22).unwrap();
                prop_assert_eq!(betti_from_barcode(&bars, s, 1), vec![l.betti(0), l.betti(1)]);
            }
        }
    }
}
