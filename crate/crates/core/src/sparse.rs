//! Sparse column matrices over a prime field and the standard left-to-right
//! column reduction `R = D·V`.

use crate::field::PrimeField;

/// Nonzero entries `(row, value)` sorted by row.
pub type Column = Vec<(u32, u32)>;

#[inline]
pub fn low(col: &Column) -> Option<u32> {
    col.last().map(|&(r, _)| r)
}

#[inline]
pub fn entry(col: &Column, row: u32) -> u32 {
    col.binary_search_by_key(&row, |&(r, _)| r)
        .map_or(0, |pos| col[pos].1)
}

/// `target + coeff * src`, merged and pruned.
pub fn axpy(field: PrimeField, target: &Column, coeff: u32, src: &Column) -> Column {
    if coeff == 0 {
        return target.clone();
    }
    let mut out = Vec::with_capacity(target.len() + src.len());
    let (mut a, mut b) = (target.iter().peekable(), src.iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (Some(&&(ra, va)), Some(&&(rb, vb))) => {
                if ra < rb {
                    out.push((ra, va));
                    a.next();
                } else if rb < ra {
                    out.push((rb, field.mul(coeff, vb)));
                    b.next();
                } else {
                    let v = field.add(va, field.mul(coeff, vb));
                    if v != 0 {
                        out.push((ra, v));
                    }
                    a.next();
                    b.next();
                }
            }
            (Some(&&e), None) => {
                out.push(e);
                a.next();
            }
            (None, Some(&&(rb, vb))) => {
                out.push((rb, field.mul(coeff, vb)));
                b.next();
            }
            (None, None) => break,
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<Column>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: Vec<Column>) -> Self {
        debug_assert!(cols.iter().all(|c| c.windows(2).all(|w| w[0].0 < w[1].0)));
        debug_assert!(cols.iter().all(|c| c.iter().all(|&(r, v)| (r as usize) < rows && v != 0)));
        SparseMatrix { rows, cols }
    }

    pub fn zero(rows: usize, ncols: usize) -> Self {
        SparseMatrix { rows, cols: vec![Vec::new(); ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Builds from a dense row-major array of residues.
    pub fn from_dense(rows: usize, ncols: usize, values: &[u32]) -> Self {
        let cols = (0..ncols)
            .map(|c| {
                (0..rows)
                    .filter(|&r| values[r * ncols + c] != 0)
                    .map(|r| (r as u32, values[r * ncols + c]))
                    .collect()
            })
            .collect();
        SparseMatrix { rows, cols }
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        let mut out = vec![vec![0; self.ncols()]; self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                out[r as usize][c] = v;
            }
        }
        out
    }

    /// `self · other`, both over `field`.
    pub fn mul(&self, field: PrimeField, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), other.rows);
        let cols = other
            .cols
            .iter()
            .map(|oc| {
                oc.iter().fold(Vec::new(), |acc, &(k, v)| axpy(field, &acc, v, &self.cols[k as usize]))
            })
            .collect();
        SparseMatrix { rows: self.rows, cols }
    }
}

/// Output of [`reduce`]: `R = D·V` with `V` unit upper-triangular and the
/// nonzero columns of `R` having distinct lowest rows.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub r: Vec<Column>,
    pub v: Vec<Column>,
    /// `pivot_col[row] = Some(j)` when column `j` of `R` has its lowest entry at `row`.
    pub pivot_col: Vec<Option<u32>>,
}

impl Reduction {
    pub fn rank(&self) -> usize {
        self.r.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn zero_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.r.iter().enumerate().filter(|(_, c)| c.is_empty()).map(|(j, _)| j)
    }

    pub fn v_matrix(&self, rows: usize) -> SparseMatrix {
        SparseMatrix { rows, cols: self.v.clone() }
    }
}

/// Plain left-to-right reduction: while column `j` shares its lowest row with
/// an earlier column, subtract the matching multiple of that column.
pub fn reduce(d: &SparseMatrix, field: PrimeField) -> Reduction {
    let n = d.ncols();
    let mut r: Vec<Column> = Vec::with_capacity(n);
    let mut v: Vec<Column> = Vec::with_capacity(n);
    let mut pivot_col: Vec<Option<u32>> = vec![None; d.rows];
    for j in 0..n {
        let mut rj = d.cols[j].clone();
        let mut vj: Column = vec![(j as u32, 1)];
        while let Some(lo) = low(&rj) {
            let Some(k) = pivot_col[lo as usize] else { break };
            let k = k as usize;
            let c = field.div(entry(&rj, lo), entry(&r[k], lo));
            let neg = field.neg(c);
            rj = axpy(field, &rj, neg, &r[k]);
            vj = axpy(field, &vj, neg, &v[k]);
        }
        if let Some(lo) = low(&rj) {
            pivot_col[lo as usize] = Some(j as u32);
        }
        r.push(rj);
        v.push(vj);
    }
    Reduction { r, v, pivot_col }
}


#[cfg(test)]
mod tests {
    use super::*;
    use super::tests_support::dense_rank;
    use proptest::prelude::*;

    #[test]
    fn zero_matrix() {
        let f = PrimeField::new(2).unwrap();
        let red = reduce(&SparseMatrix::zero(3, 4), f);
        assert_eq!(red.rank(), 0);
        for (j, v) in red.v.iter().enumerate() {
            assert_eq!(v, &vec![(j as u32, 1)]);
        }
    }

    #[test]
    fn single_edge() {
        let f = PrimeField::new(2).unwrap();
        let d = SparseMatrix::new(2, vec![vec![(0, 1), (1, 1)]]);
        let red = reduce(&d, f);
        assert_eq!(red.rank(), 1);
        assert_eq!(red.r[0], d.cols[0]);
    }

    fn arb_matrix() -> impl Strategy<Value = (u32, usize, usize, Vec<u32>)> {
        (0usize..3, 1usize..9, 1usize..9).prop_flat_map(|(pi, rows, cols)| {
            let p = [2u32, 3, 5][pi];
            (Just(p), Just(rows), Just(cols), proptest::collection::vec(0..p, rows * cols))
        })
    }

    proptest! {
        #[test]
        fn r_equals_d_times_v((p, rows, cols, vals) in arb_matrix()) {
            let f = PrimeField::new(p).unwrap();
            let d = SparseMatrix::from_dense(rows, cols, &vals);
            let red = reduce(&d, f);
            let dv = d.mul(f, &red.v_matrix(cols));
            prop_assert_eq!(&dv.cols, &red.r);
            // V unit upper-triangular
            for (j, v) in red.v.iter().enumerate() {
                prop_assert_eq!(v.last().copied(), Some((j as u32, 1)));
            }
            // distinct lows
            let mut lows: Vec<u32> = red.r.iter().filter_map(low).collect();
            let n = lows.len();
            lows.sort_unstable();
            lows.dedup();
            prop_assert_eq!(lows.len(), n);
            prop_assert_eq!(red.rank(), dense_rank(f, d.to_dense()));
        }
    }
}
