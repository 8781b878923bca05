//! Mayer-Vietoris assembly over a path-shaped covering.
//!
//! A region `X` is covered by pieces `X_0, …, X_{K-1}` along one axis, where
//! only consecutive pieces meet, in `I_k = X_k ∩ X_{k+1}`. The chain-level
//! sequence
//!
//! ```text
//! 0 → ⊕ C(I_k) --f--> ⊕ C(X_k) --g--> C(X) → 0,   f(c ∈ C(I_k)) = (c in X_k) − (c in X_{k+1})
//! ```
//!
//! is exact once every simplex of `X` lies in some piece, which is what the
//! covering guarantees. Taking homology gives
//! `H_n(X) ≅ coker f_n ⊕ ker f_{n-1}`. An [`MvNode`] stores bases for both
//! summands together with global cycle representatives, and answers
//! coordinate and bounding queries by chasing a cycle through the sequence.
//!
//! Coordinates list the cokernel part first, then the kernel part, each in
//! pivot order of the reduced `f` matrices.

use std::sync::Arc;

use crate::chain::Chain;
use crate::cloud::PointCloud;
use crate::covering::AxisIntervals;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::solver::Solver;
use crate::sparse::{self, axpy, entry, low, Column, Reduction, SparseMatrix};

/// Matrix of the map `H_n(source) → H_n(target)` induced by inclusion,
/// optionally negated. Column `c` holds the target coordinates of the
/// source's `c`-th representative.
pub fn induced_map(source: &Solver, target: &Solver, n: usize, negate: bool) -> Result<SparseMatrix> {
    let f = target.field();
    let cols = source
        .representatives(n)
        .iter()
        .map(|rep| {
            let coords = target.coords(rep).map_err(|e| {
                Error::Internal(format!("representative does not include into its piece: {e}"))
            })?;
            Ok(coords
                .into_iter()
                .enumerate()
                .filter(|&(_, v)| v != 0)
                .map(|(r, v)| (r as u32, if negate { f.neg(v) } else { v }))
                .collect())
        })
        .collect::<Result<Vec<Column>>>()?;
    Ok(SparseMatrix::new(target.betti(n), cols))
}

/// Block matrix of `f_n : ⊕ H_n(I_k) → ⊕ H_n(X_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix {
    pub dim: usize,
    /// `row_offsets[k]..row_offsets[k+1]` are the rows of piece `k`.
    pub row_offsets: Vec<usize>,
    /// `col_offsets[k]..col_offsets[k+1]` are the columns of intersection `k`.
    pub col_offsets: Vec<usize>,
    pub matrix: SparseMatrix,
}

fn offsets(solvers: &[Arc<Solver>], n: usize) -> Vec<usize> {
    let mut out = vec![0];
    for s in solvers {
        out.push(out.last().unwrap() + s.betti(n));
    }
    out
}

/// Assembles `f_n` with blocks `(k, k) = i_k` and `(k+1, k) = −j_k`.
pub fn build_f(pieces: &[Arc<Solver>], inters: &[Arc<Solver>], n: usize) -> Result<FMatrix> {
    if !pieces.is_empty() && inters.len() + 1 != pieces.len() {
        return Err(Error::Config(format!(
            "{} pieces need {} intersections, got {}",
            pieces.len(),
            pieces.len() - 1,
            inters.len()
        )));
    }
    let row_offsets = offsets(pieces, n);
    let col_offsets = offsets(inters, n);
    let mut cols: Vec<Column> = Vec::with_capacity(*col_offsets.last().unwrap());
    for (k, inter) in inters.iter().enumerate() {
        let left = induced_map(inter, &pieces[k], n, false)?;
        let right = induced_map(inter, &pieces[k + 1], n, true)?;
        for (a, b) in left.cols.iter().zip(&right.cols) {
            let mut col: Column = a.iter().map(|&(r, v)| (r + row_offsets[k] as u32, v)).collect();
            col.extend(b.iter().map(|&(r, v)| (r + row_offsets[k + 1] as u32, v)));
            cols.push(col);
        }
    }
    Ok(FMatrix {
        dim: n,
        matrix: SparseMatrix::new(*row_offsets.last().unwrap(), cols),
        row_offsets,
        col_offsets,
    })
}

#[derive(Debug, Clone)]
struct DimData {
    f: FMatrix,
    red: Reduction,
    /// Rows of `f_n` without a pivot; their unit vectors span a complement of `im f_n`.
    coker_rows: Vec<usize>,
    coker_of_row: Vec<Option<u32>>,
    /// Zero columns of the reduced `f_n`; the matching columns of `V` span `ker f_n`.
    kernel_cols: Vec<usize>,
    kernel_of_col: Vec<Option<u32>>,
    /// Global cycles: cokernel lifts of `f_n`, then connecting lifts of `ker f_{n-1}`.
    reps: Vec<Chain>,
    coker_count: usize,
}

/// Per-node numbers for reports and the rank identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeStats {
    pub ranks_f: Vec<usize>,
    pub piece_betti: Vec<usize>,
    pub inter_betti: Vec<usize>,
    pub betti: Vec<usize>,
}

/// Test hooks for negative controls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Replace `f_n` at this dimension with the zero matrix.
    pub corrupt_f: Option<usize>,
}

/// Homology of a union assembled from piece and intersection solvers.
#[derive(Debug, Clone)]
pub struct MvNode {
    field: PrimeField,
    max_dim: usize,
    cloud: Arc<PointCloud>,
    axis: AxisIntervals,
    points: Vec<usize>,
    pieces: Vec<Arc<Solver>>,
    inters: Vec<Arc<Solver>>,
    dims: Vec<DimData>,
}

/// Data produced by chasing one cycle through the exact sequence.
struct Chase {
    coords: Vec<u32>,
    /// Corrected piece cycles summing to the input minus connecting lifts.
    xi: Vec<Chain>,
    /// Preimage under `f_n` of the piece coordinates, modulo the cokernel part.
    preimage: Vec<u32>,
}

impl MvNode {
    /// Builds the node. `pieces` are ordered along `axis`; `inters[k]` is the
    /// overlap of pieces `k` and `k + 1`.
    pub fn assemble(
        cloud: Arc<PointCloud>,
        axis: AxisIntervals,
        points: Vec<usize>,
        pieces: Vec<Arc<Solver>>,
        inters: Vec<Arc<Solver>>,
        options: AssemblyOptions,
    ) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::Config("assembly needs at least one piece".into()))?;
        let field = first.field();
        let max_dim = first.max_dim();
        if pieces.len() != axis.k {
            return Err(Error::Config(format!("{} pieces for {} cells", pieces.len(), axis.k)));
        }
        for s in pieces.iter().chain(&inters) {
            if s.field() != field || s.max_dim() != max_dim {
                return Err(Error::Config("child solvers disagree on field or dimension".into()));
            }
        }
        let mut node = MvNode { field, max_dim, cloud, axis, points, pieces, inters, dims: Vec::new() };

        for n in 0..=max_dim {
            let mut f = build_f(&node.pieces, &node.inters, n)?;
            if options.corrupt_f == Some(n) {
                f.matrix = SparseMatrix::zero(f.matrix.rows, f.matrix.ncols());
            }
            let red = sparse::reduce(&f.matrix, field);
            let coker_rows: Vec<usize> = (0..f.matrix.rows).filter(|&r| red.pivot_col[r].is_none()).collect();
            let mut coker_of_row = vec![None; f.matrix.rows];
            for (i, &r) in coker_rows.iter().enumerate() {
                coker_of_row[r] = Some(i as u32);
            }
            let kernel_cols: Vec<usize> = red.zero_columns().collect();
            let mut kernel_of_col = vec![None; f.matrix.ncols()];
            for (i, &c) in kernel_cols.iter().enumerate() {
                kernel_of_col[c] = Some(i as u32);
            }
            node.dims.push(DimData {
                f,
                red,
                coker_rows,
                coker_of_row,
                kernel_cols,
                kernel_of_col,
                reps: Vec::new(),
                coker_count: 0,
            });
        }

        for n in 0..=max_dim {
            let mut reps: Vec<Chain> = Vec::new();
            let d = &node.dims[n];
            for &r in &d.coker_rows {
                let (k, c) = locate(&d.f.row_offsets, r);
                reps.push(node.pieces[k].representatives(n)[c].clone());
            }
            let coker_count = reps.len();
            if n >= 1 {
                let below = &node.dims[n - 1];
                for &c in &below.kernel_cols {
                    reps.push(node.connecting_lift(n - 1, &below.red.v[c])?);
                }
            }
            let d = &mut node.dims[n];
            d.reps = reps;
            d.coker_count = coker_count;
        }

        let stats = node.stats();
        for n in 0..=max_dim {
            let expected = stats.piece_betti[n] - stats.ranks_f[n]
                + if n >= 1 { stats.inter_betti[n - 1] - stats.ranks_f[n - 1] } else { 0 };
            if expected != node.betti(n) {
                return Err(Error::Internal(format!(
                    "rank identity violated in dimension {n}: formula {expected}, basis {}",
                    node.betti(n)
                )));
            }
        }
        Ok(node)
    }

    /// A cycle in the union whose connecting image is the kernel vector `u`
    /// of `f_m` (a tuple of intersection classes of dimension `m`).
    fn connecting_lift(&self, m: usize, u: &Column) -> Result<Chain> {
        let f = self.field;
        let offs = &self.dims[m].f.col_offsets;
        let cycle_in = |k: usize| -> Result<Chain> {
            let mut r = Chain::zero(m, f);
            if k < self.inters.len() {
                let reps = self.inters[k].representatives(m);
                for &(c, v) in u {
                    let c = c as usize;
                    if (offs[k]..offs[k + 1]).contains(&c) {
                        r.axpy(v, &reps[c - offs[k]])?;
                    }
                }
            }
            Ok(r)
        };
        let mut zeta = Chain::zero(m + 1, f);
        let mut prev = Chain::zero(m, f);
        for (k, piece) in self.pieces.iter().enumerate() {
            let cur = cycle_in(k)?;
            let diff = cur.sub(&prev)?;
            let s = piece.bound(&diff)?.ok_or_else(|| {
                Error::Internal(format!("connecting lift: intersection cycle does not bound in piece {k}"))
            })?;
            zeta.axpy(1, &s)?;
            prev = cur;
        }
        if !zeta.boundary().is_zero() {
            return Err(Error::Internal("connecting lift is not a cycle".into()));
        }
        Ok(zeta)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn axis(&self) -> usize {
        self.axis.axis
    }

    pub fn pieces(&self) -> &[Arc<Solver>] {
        &self.pieces
    }

    pub fn intersections(&self) -> &[Arc<Solver>] {
        &self.inters
    }

    pub fn f_matrix(&self, n: usize) -> Option<&FMatrix> {
        self.dims.get(n).map(|d| &d.f)
    }

    pub fn rank_f(&self, n: usize) -> usize {
        self.dims.get(n).map_or(0, |d| d.red.rank())
    }

    pub fn betti(&self, n: usize) -> usize {
        self.dims.get(n).map_or(0, |d| d.reps.len())
    }

    /// Split of `betti(n)` into `(dim coker f_n, dim ker f_{n-1})`.
    pub fn betti_split(&self, n: usize) -> (usize, usize) {
        self.dims.get(n).map_or((0, 0), |d| (d.coker_count, d.reps.len() - d.coker_count))
    }

    pub fn representatives(&self, n: usize) -> &[Chain] {
        self.dims.get(n).map_or(&[], |d| d.reps.as_slice())
    }

    pub fn stats(&self) -> NodeStats {
        let sum = |s: &[Arc<Solver>], n: usize| s.iter().map(|x| x.betti(n)).sum::<usize>();
        NodeStats {
            ranks_f: (0..=self.max_dim).map(|n| self.rank_f(n)).collect(),
            piece_betti: (0..=self.max_dim).map(|n| sum(&self.pieces, n)).collect(),
            inter_betti: (0..=self.max_dim).map(|n| sum(&self.inters, n)).collect(),
            betti: (0..=self.max_dim).map(|n| self.betti(n)).collect(),
        }
    }

    /// Splits a chain among the pieces, each simplex going to the lowest
    /// cell containing it along the split axis.
    fn split(&self, z: &Chain) -> Result<Vec<Chain>> {
        let mut parts = vec![Chain::zero(z.dim(), self.field); self.pieces.len()];
        for (s, c) in z.terms() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in s.vertices() {
                let v = v as usize;
                if v >= self.cloud.len() {
                    return Err(Error::UnsupportedSimplex(s.to_string()));
                }
                let x = self.cloud.coord(v, self.axis.axis);
                lo = lo.min(x);
                hi = hi.max(x);
            }
            let k = self
                .axis
                .lowest_cell(lo, hi)
                .ok_or_else(|| Error::UnsupportedSimplex(format!("{s} lies in no piece")))?;
            parts[k].add_term(s.clone(), c);
        }
        Ok(parts)
    }

    /// The cycles `∂(z_0 + … + z_k)`, one per intersection.
    fn partial_boundaries(&self, parts: &[Chain]) -> Result<Vec<Chain>> {
        let mut acc = Chain::zero(parts[0].dim().saturating_sub(1), self.field);
        let mut out = Vec::with_capacity(self.inters.len());
        for part in &parts[..self.inters.len()] {
            acc.axpy(1, &part.boundary())?;
            out.push(acc.clone());
        }
        Ok(out)
    }

    fn check_input(&self, z: &Chain) -> Result<usize> {
        if z.field() != self.field {
            return Err(Error::FieldMismatch { left: self.field.modulus(), right: z.field().modulus() });
        }
        if z.dim() > self.max_dim {
            return Err(Error::DimensionOutOfRange { dim: z.dim(), max: self.max_dim });
        }
        if z.dim() > 0 && !z.boundary().is_zero() {
            return Err(Error::NotACycle);
        }
        Ok(z.dim())
    }

    fn chase(&self, z: &Chain) -> Result<Chase> {
        let n = self.check_input(z)?;
        let f = self.field;
        let here = &self.dims[n];
        let mut kernel = Vec::new();
        let mut residual = z.clone();
        let mut xi: Vec<Chain>;

        if n == 0 {
            xi = self.split(z)?;
        } else {
            // connecting image, expressed in the kernel basis of f_{n-1}
            let below = &self.dims[n - 1];
            let parts = self.split(z)?;
            let mut u = Vec::with_capacity(below.f.matrix.ncols());
            for (k, w) in self.partial_boundaries(&parts)?.iter().enumerate() {
                let c = self.inters[k].coords(w).map_err(|e| {
                    Error::Internal(format!("partial boundary is not a cycle of intersection {k}: {e}"))
                })?;
                u.extend(c);
            }
            kernel = kernel_coords(f, below, u)?;
            for (i, &b) in kernel.iter().enumerate() {
                if b != 0 {
                    residual.axpy(f.neg(b), &here.reps[here.coker_count + i])?;
                }
            }
            // the residual's partial boundaries now bound in the intersections
            let parts = self.split(&residual)?;
            let mut fill = Vec::with_capacity(self.inters.len());
            for (k, w) in self.partial_boundaries(&parts)?.iter().enumerate() {
                let v = self.inters[k].bound(w)?.ok_or_else(|| {
                    Error::Internal(format!("partial boundary does not bound in intersection {k}"))
                })?;
                fill.push(v);
            }
            xi = parts;
            for (k, v) in fill.iter().enumerate() {
                xi[k].axpy(f.neg(1), v)?;
                xi[k + 1].axpy(1, v)?;
            }
        }

        let mut y: Vec<u32> = Vec::with_capacity(here.f.matrix.rows);
        for (k, x) in xi.iter().enumerate() {
            let c = self.pieces[k].coords(x).map_err(|e| {
                Error::Internal(format!("corrected piece chain is not a cycle of piece {k}: {e}"))
            })?;
            y.extend(c);
        }
        let (coker, preimage) = project_cokernel(f, here, y);
        let mut coords = coker;
        coords.extend(kernel);
        Ok(Chase { coords, xi, preimage })
    }

    /// Coordinates of the class of the cycle `z`: cokernel part first, then
    /// kernel (connecting) part.
    pub fn union_coords(&self, z: &Chain) -> Result<Vec<u32>> {
        self.chase(z).map(|c| c.coords)
    }

    /// `Some(w)` with `∂w = z` when `z` bounds in the union, else `None`.
    pub fn union_bound(&self, z: &Chain) -> Result<Option<Chain>> {
        let chase = self.chase(z)?;
        if chase.coords.iter().any(|&c| c != 0) {
            return Ok(None);
        }
        let n = z.dim();
        let f = self.field;
        let offs = &self.dims[n].f.col_offsets;
        // q_k: intersection cycle realizing the preimage on intersection k
        let mut q: Vec<Chain> = Vec::with_capacity(self.inters.len());
        for (k, inter) in self.inters.iter().enumerate() {
            let mut qk = Chain::zero(n, f);
            for (c, rep) in inter.representatives(n).iter().enumerate() {
                qk.axpy(chase.preimage[offs[k] + c], rep)?;
            }
            q.push(qk);
        }
        let mut w = Chain::zero(n + 1, f);
        for (k, piece) in self.pieces.iter().enumerate() {
            let mut target = chase.xi[k].clone();
            if k < q.len() {
                target.axpy(f.neg(1), &q[k])?;
            }
            if k > 0 {
                target.axpy(1, &q[k - 1])?;
            }
            let h = piece.bound(&target)?.ok_or_else(|| {
                Error::Internal(format!("corrected cycle does not bound in piece {k}"))
            })?;
            w.axpy(1, &h)?;
        }
        if w.boundary() != *z {
            return Err(Error::Internal(format!("union bound failed: ∂w ≠ z for z = {z}")));
        }
        Ok(Some(w))
    }

    /// Checks that every stored representative is a cycle with unit
    /// coordinates. Returns the number of representatives checked.
    pub fn audit(&self) -> Result<usize> {
        let mut checked = 0;
        for n in 0..=self.max_dim {
            let reps = self.representatives(n);
            for (i, rep) in reps.iter().enumerate() {
                let coords = self.union_coords(rep)?;
                let unit = coords.iter().enumerate().all(|(j, &c)| c == u32::from(i == j));
                if !unit || coords.len() != reps.len() {
                    return Err(Error::Internal(format!(
                        "representative {i} in dimension {n} has coordinates {coords:?}"
                    )));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }
}

/// `(block, index within block)` for a global index.
fn locate(offsets: &[usize], i: usize) -> (usize, usize) {
    let k = offsets.partition_point(|&o| o <= i) - 1;
    (k, i - offsets[k])
}

/// Coordinates of `u ∈ ker f` in the basis of kernel columns of `V`.
fn kernel_coords(field: PrimeField, d: &DimData, mut u: Vec<u32>) -> Result<Vec<u32>> {
    let mut out = vec![0; d.kernel_cols.len()];
    for t in (0..u.len()).rev() {
        let c = u[t];
        if c == 0 {
            continue;
        }
        let Some(i) = d.kernel_of_col[t] else {
            return Err(Error::Internal("connecting image is not in the kernel of f".into()));
        };
        out[i as usize] = c;
        let neg = field.neg(c);
        for &(r, v) in &d.red.v[t] {
            let r = r as usize;
            u[r] = field.add(u[r], field.mul(neg, v));
        }
    }
    Ok(out)
}

/// Splits `y = f(t) + Σ a_r e_r` over the cokernel rows; returns `(a, t)`.
fn project_cokernel(field: PrimeField, d: &DimData, mut y: Vec<u32>) -> (Vec<u32>, Vec<u32>) {
    let mut pre: Column = Vec::new();
    for r in (0..y.len()).rev() {
        if y[r] == 0 {
            continue;
        }
        if let Some(j) = d.red.pivot_col[r] {
            let j = j as usize;
            let col = &d.red.r[j];
            debug_assert_eq!(low(col), Some(r as u32));
            let m = field.div(y[r], entry(col, r as u32));
            let neg = field.neg(m);
            for &(row, v) in col {
                let row = row as usize;
                y[row] = field.add(y[row], field.mul(neg, v));
            }
            pre = axpy(field, &pre, m, &d.red.v[j]);
        }
    }
    let coker = d.coker_rows.iter().map(|&r| y[r]).collect();
    debug_assert!(y.iter().enumerate().all(|(r, &v)| v == 0 || d.coker_of_row[r].is_some()));
    let mut preimage = vec![0; d.f.matrix.ncols()];
    for (c, v) in pre {
        preimage[c as usize] = v;
    }
    (coker, preimage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Simplex;
    use crate::cloud::NeighborGraph;
    use crate::covering::{Covering, Region, Split};
    use crate::reduction::LeafSolver;

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    /// One-level node over leaf pieces and leaf intersections along axis 0.
    fn one_level(cloud: &Arc<PointCloud>, eps: f64, k: usize, max_dim: usize, p: u32) -> MvNode {
        let mut ks = vec![1; cloud.dim()];
        ks[0] = k;
        let cov = Covering::build(cloud, eps, &ks).unwrap();
        assert_eq!(cov.axes[0].k, k);
        let g = NeighborGraph::build(cloud, eps, 0.0);
        let Split::Node { pieces, intersections, .. } = Region::full(cloud.dim()).split(&cov) else {
            panic!("expected a split")
        };
        let build = |r: &Region| {
            let pts = r.points(cloud, &cov);
            Arc::new(Solver::Leaf(LeafSolver::from_points(&pts, &g, eps, max_dim, f(p), 1 << 22).unwrap()))
        };
        MvNode::assemble(
            cloud.clone(),
            cov.axes[0].clone(),
            (0..cloud.len()).collect(),
            pieces.iter().map(build).collect(),
            intersections.iter().map(build).collect(),
            AssemblyOptions::default(),
        )
        .unwrap()
    }

    fn hexagon() -> Arc<PointCloud> {
        Arc::new(
            PointCloud::new(
                (0..6)
                    .map(|i| {
                        let a = std::f64::consts::PI / 3.0 * i as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect(),
            )
            .unwrap(),
        )
    }

    const HEX_EPS: f64 = 1.0 + 1e-9;

    #[test]
    fn collinear_points_f0() {
        let c = Arc::new(PointCloud::new(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap());
        // cells [-0.5, 1.5] and [0.5, 2.5] meet only in point 1
        let axis = AxisIntervals::new(0, -0.5, 2.0, 2, 1.0);
        let g = NeighborGraph::build(&c, 1.0, 0.0);
        let leaf = |pts: &[usize], p| Arc::new(Solver::Leaf(LeafSolver::from_points(pts, &g, 1.0, 1, f(p), 1000).unwrap()));
        for p in [2, 3] {
            let pieces = vec![leaf(&[0, 1], p), leaf(&[1, 2], p)];
            let inters = vec![leaf(&[1], p)];
            let fm = build_f(&pieces, &inters, 0).unwrap();
            assert_eq!(fm.matrix.to_dense(), vec![vec![1], vec![f(p).neg(1)]]);
            let node = MvNode::assemble(c.clone(), axis.clone(), vec![0, 1, 2], pieces, inters, Default::default()).unwrap();
            assert_eq!(node.rank_f(0), 1);
            assert_eq!((node.betti(0), node.betti(1)), (1, 0));
        }
    }

    #[test]
    fn identity_induced_map() {
        let c = hexagon();
        let g = NeighborGraph::build(&c, HEX_EPS, 0.0);
        let all: Vec<usize> = (0..6).collect();
        let s = Solver::Leaf(LeafSolver::from_points(&all, &g, HEX_EPS, 1, f(3), 1000).unwrap());
        for n in 0..=1 {
            let m = induced_map(&s, &s, n, false).unwrap();
            let dense = m.to_dense();
            for (i, row) in dense.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    assert_eq!(v, u32::from(i == j));
                }
            }
        }
        let empty = Solver::Leaf(LeafSolver::from_points(&[], &g, HEX_EPS, 1, f(3), 1000).unwrap());
        let m = induced_map(&empty, &empty, 0, false).unwrap();
        assert_eq!((m.rows, m.ncols()), (0, 0));
    }

    fn ring_cycle(n: usize, p: u32) -> Chain {
        Chain::from_terms(
            1,
            f(p),
            (0..n).map(|i| {
                let j = (i + 1) % n;
                // orient 0→1→…→n-1→0
                let coeff = if j == 0 { -1 } else { 1 };
                (Simplex::new([i as u32, j as u32]).unwrap(), coeff)
            }),
        )
        .unwrap()
    }

    fn check_cycle_class(node: &MvNode, cloud: &Arc<PointCloud>, eps: f64, cycle: &Chain, p: u32) {
        assert!(cycle.boundary().is_zero());
        let coords = node.union_coords(cycle).unwrap();
        assert_eq!(coords.len(), 1);
        assert_ne!(coords[0], 0);
        assert_eq!(node.union_bound(cycle).unwrap(), None);
        node.audit().unwrap();
        // cross-check against a direct leaf over the whole cloud
        let g = NeighborGraph::build(cloud, eps, 0.0);
        let all: Vec<usize> = (0..cloud.len()).collect();
        let direct = LeafSolver::from_points(&all, &g, eps, 1, f(p), 1000).unwrap();
        assert!(direct.coords(cycle).unwrap().iter().all(|&x| x != 0));
    }

    #[test]
    fn hexagon_two_pieces() {
        // R/k = ε: the first cell swallows the whole hexagon
        for p in [2, 3, 5] {
            let node = one_level(&hexagon(), HEX_EPS, 2, 1, p);
            let fm = node.f_matrix(0).unwrap();
            assert_eq!((fm.matrix.rows, fm.matrix.ncols()), (2, 1));
            assert_eq!(node.rank_f(0), 1);
            assert_eq!((node.betti(0), node.betti(1)), (1, 1));
            assert_eq!(node.betti_split(1), (1, 0));
            check_cycle_class(&node, &hexagon(), HEX_EPS, &ring_cycle(6, p), p);
        }
    }

    #[test]
    fn ring_class_comes_from_the_kernel() {
        // 12 points on a circle of radius 2, chord ≈ 1.035; the overlap has two arcs
        let ring = Arc::new(
            PointCloud::new(
                (0..12)
                    .map(|i| {
                        let a = std::f64::consts::PI / 6.0 * i as f64;
                        vec![2.0 * a.cos(), 2.0 * a.sin()]
                    })
                    .collect(),
            )
            .unwrap(),
        );
        for p in [2, 3, 5] {
            let node = one_level(&ring, 1.1, 2, 1, p);
            let fm = node.f_matrix(0).unwrap();
            assert_eq!((fm.matrix.rows, fm.matrix.ncols()), (2, 2));
            assert_eq!(node.rank_f(0), 1);
            assert_eq!((node.betti(0), node.betti(1)), (1, 1));
            assert_eq!(node.betti_split(1), (0, 1));
            check_cycle_class(&node, &ring, 1.1, &ring_cycle(12, p), p);
        }
    }

    #[test]
    fn two_clusters() {
        let c = Arc::new(
            PointCloud::new(vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![5.0, 0.0], vec![5.1, 0.0]]).unwrap(),
        );
        for k in [2, 3, 4] {
            let node = one_level(&c, 0.5, k, 1, 3);
            assert_eq!(node.betti(0), 2);
            node.audit().unwrap();
        }
    }

    #[test]
    fn empty_pieces_contribute_nothing() {
        // gap in the middle leaves interior pieces empty
        let c = Arc::new(PointCloud::new(vec![vec![0.0], vec![0.2], vec![10.0], vec![10.3]]).unwrap());
        let node = one_level(&c, 0.5, 5, 1, 3);
        assert!(node.pieces().iter().any(|p| p.points().is_empty()));
        assert_eq!(node.betti(0), 2);
        node.audit().unwrap();
    }

    #[test]
    fn boundaries_bound_in_union() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for p in [2, 3, 5] {
            let pts: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen::<f64>() * 3.0, rng.gen::<f64>()]).collect();
            let c = Arc::new(PointCloud::new(pts).unwrap());
            let eps = 0.45;
            let node = one_level(&c, eps, 3, 1, p);
            let g = NeighborGraph::build(&c, eps, 0.0);
            let all: Vec<usize> = (0..c.len()).collect();
            let direct = LeafSolver::from_points(&all, &g, eps, 1, f(p), 1 << 20).unwrap();
            assert_eq!(node.betti(0), direct.betti(0));
            assert_eq!(node.betti(1), direct.betti(1));
            node.audit().unwrap();
            for n in 0..=1 {
                let mut w = Chain::zero(n + 1, f(p));
                for s in direct.complex().simplices(n + 1) {
                    if rng.gen_bool(0.2) {
                        w.add_term(s.clone(), rng.gen_range(1..p));
                    }
                }
                let z = w.boundary();
                assert!(node.union_coords(&z).unwrap().iter().all(|&x| x == 0));
                let back = node.union_bound(&z).unwrap().unwrap();
                assert_eq!(back.boundary(), z);
            }
        }
    }

    #[test]
    fn representative_plus_boundary_keeps_coords() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..36)
            .map(|i| {
                let a = i as f64 / 36.0 * std::f64::consts::TAU;
                vec![2.0 * a.cos() + rng.gen::<f64>() * 0.1, 2.0 * a.sin()]
            })
            .collect();
        let c = Arc::new(PointCloud::new(pts).unwrap());
        let node = one_level(&c, 0.6, 3, 1, 3);
        assert_eq!(node.betti(1), 1);
        let g = NeighborGraph::build(&c, 0.6, 0.0);
        let direct = LeafSolver::from_points(&(0..36).collect::<Vec<_>>(), &g, 0.6, 1, f(3), 1 << 20).unwrap();
        let rep = &node.representatives(1)[0];
        let mut w = Chain::zero(2, f(3));
        for s in direct.complex().simplices(2).iter().take(10) {
            w.add_term(s.clone(), 2);
        }
        let shifted = rep.add(&w.boundary()).unwrap();
        assert_eq!(node.union_coords(&shifted).unwrap(), vec![1]);
        // piece representatives map consistently through the induced maps
        let m = induced_map(&node.pieces()[0], &Solver::Node(node.clone()), 0, false).unwrap();
        assert_eq!(m.rows, node.betti(0));
    }

    #[test]
    fn locate_blocks() {
        assert_eq!(locate(&[0, 2, 2, 5], 0), (0, 0));
        assert_eq!(locate(&[0, 2, 2, 5], 2), (2, 0));
        assert_eq!(locate(&[0, 2, 2, 5], 4), (2, 2));
    }
}
