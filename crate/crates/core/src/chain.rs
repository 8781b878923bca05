//! Simplices on global point indices and sparse chains over a prime field.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::PrimeField;

pub type Vertices = SmallVec<[u32; 4]>;

/// Strictly increasing tuple of global point indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vertices);

impl Simplex {
    /// Builds a simplex from any vertex list; sorts it and rejects repeats.
    pub fn new<I: IntoIterator<Item = u32>>(vertices: I) -> Result<Self> {
        let mut v: Vertices = vertices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCloud(format!("repeated vertex in simplex {v:?}")));
        }
        Ok(Simplex(v))
    }

    /// Caller guarantees the vertices are strictly increasing.
    pub(crate) fn from_sorted(v: Vertices) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Simplex(v)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Faces paired with the exponent of their boundary sign.
    pub fn faces(&self) -> impl Iterator<Item = (usize, Simplex)> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |i| {
            let mut f = self.0.clone();
            f.remove(i);
            (i, Simplex(f))
        })
    }

    pub fn boundary(&self, field: PrimeField) -> Chain {
        let mut out = Chain::zero(self.dim().saturating_sub(1), field);
        for (i, face) in self.faces() {
            out.add_term(face, field.sign(i));
        }
        out
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Sparse formal sum of same-dimensional simplices with nonzero coefficients.
///
/// The boundary of a 0-chain is the zero 0-chain (unreduced homology).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    dim: usize,
    field: PrimeField,
    terms: BTreeMap<Simplex, u32>,
}

impl Chain {
    pub fn zero(dim: usize, field: PrimeField) -> Self {
        Chain { dim, field, terms: BTreeMap::new() }
    }

    pub fn from_simplex(s: Simplex, field: PrimeField) -> Self {
        let mut c = Chain::zero(s.dim(), field);
        c.add_term(s, 1);
        c
    }

    pub fn from_terms<I>(dim: usize, field: PrimeField, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Simplex, i64)>,
    {
        let mut c = Chain::zero(dim, field);
        for (s, coeff) in terms {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: s.dim() });
            }
            c.add_term(s, field.reduce(coeff));
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, s: &Simplex) -> u32 {
        self.terms.get(s).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Simplex, u32)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    /// Adds `coeff * s`, pruning a resulting zero. Dimension is the caller's
    /// responsibility.
    pub(crate) fn add_term(&mut self, s: Simplex, coeff: u32) {
        let f = self.field;
        if coeff.is_multiple_of(f.modulus()) {
            return;
        }
        match self.terms.entry(s) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff % f.modulus());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = f.add(*e.get(), coeff);
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    fn compatible(&self, other: &Chain) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.modulus(),
                right: other.field.modulus(),
            });
        }
        if self.dim != other.dim && !(self.is_zero() || other.is_zero()) {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// `self += coeff * other`.
    pub fn axpy(&mut self, coeff: u32, other: &Chain) -> Result<()> {
        self.compatible(other)?;
        if self.is_zero() {
            self.dim = other.dim;
        }
        let c = coeff % self.field.modulus();
        if c == 0 {
            return Ok(());
        }
        for (s, &v) in &other.terms {
            self.add_term(s.clone(), self.field.mul(c, v));
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        let mut out = self.clone();
        out.axpy(1, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        let mut out = self.clone();
        out.axpy(self.field.neg(1), other)?;
        Ok(out)
    }

    pub fn scale(&self, coeff: u32) -> Chain {
        let f = self.field;
        let c = coeff % f.modulus();
        let mut out = Chain::zero(self.dim, f);
        if c != 0 {
            out.terms = self.terms.iter().map(|(s, &v)| (s.clone(), f.mul(v, c))).collect();
        }
        out
    }

    pub fn boundary(&self) -> Chain {
        let f = self.field;
        let mut out = Chain::zero(self.dim.saturating_sub(1), f);
        if self.dim == 0 {
            return out;
        }
        for (s, &c) in &self.terms {
            for (i, face) in s.faces() {
                out.add_term(face, f.mul(c, f.sign(i)));
            }
        }
        out
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if *c == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{c}·{s}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v.iter().copied()).unwrap()
    }

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn triangle_boundary_mod_two() {
        let b = s(&[0, 1, 2]).boundary(f(2));
        let expected =
            Chain::from_terms(1, f(2), [(s(&[1, 2]), 1), (s(&[0, 2]), 1), (s(&[0, 1]), 1)]).unwrap();
        assert_eq!(b, expected);
    }

    #[test]
    fn edge_boundary_mod_three() {
        let b = s(&[0, 1]).boundary(f(3));
        assert_eq!(b.coefficient(&s(&[1])), 1);
        assert_eq!(b.coefficient(&s(&[0])), 2);
    }

    #[test]
    fn boundary_squared_tetrahedron() {
        for p in [2, 3, 5, 7] {
            let b = s(&[0, 1, 2, 3]).boundary(f(p));
            assert!(b.boundary().is_zero());
        }
    }

    #[test]
    fn vertex_boundary_is_zero() {
        assert!(s(&[4]).boundary(f(3)).is_zero());
    }

    #[test]
    fn add_and_scale() {
        let a = Chain::from_terms(1, f(2), [(s(&[0, 1]), 1), (s(&[1, 2]), 1)]).unwrap();
        assert_eq!(a.add(&Chain::zero(1, f(2))).unwrap(), a);
        assert!(a.add(&a).unwrap().is_zero());

        let c = Chain::from_terms(1, f(5), [(s(&[0, 1]), 2)]).unwrap();
        assert_eq!(c.scale(3).coefficient(&s(&[0, 1])), 1);
    }

    #[test]
    fn mismatches_are_errors() {
        let a = Chain::from_simplex(s(&[0, 1]), f(3));
        let b = Chain::from_simplex(s(&[0]), f(3));
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        let c = Chain::from_simplex(s(&[0, 1]), f(5));
        assert!(matches!(a.add(&c), Err(Error::FieldMismatch { .. })));
        assert!(Simplex::new([1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn boundary_of_boundary_vanishes(
            pi in 0usize..4,
            simplices in proptest::collection::vec(
                (proptest::collection::btree_set(0u32..12, 4), 1i64..7), 1..6),
        ) {
            let p = [2u32, 3, 5, 7][pi];
            let terms = simplices.into_iter().map(|(v, c)| (Simplex::new(v).unwrap(), c));
            let chain = Chain::from_terms(3, f(p), terms).unwrap();
            prop_assert!(chain.boundary().boundary().is_zero());
        }
    }
}
