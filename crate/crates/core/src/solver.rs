//! A region's homology, computed either directly or by assembly from a
//! covering.

use crate::chain::Chain;
use crate::error::Result;
use crate::field::PrimeField;
use crate::mv::MvNode;
use crate::reduction::LeafSolver;

/// Answers `betti`, `coords` and `bound` queries for one region in
/// dimensions `0..=max_dim`. All chains use global point indices, so the
/// inclusion of a subregion is the identity on chains.
#[derive(Debug, Clone)]
pub enum Solver {
    Leaf(LeafSolver),
    Node(MvNode),
}

impl Solver {
    pub fn field(&self) -> PrimeField {
        match self {
            Solver::Leaf(l) => l.field(),
            Solver::Node(n) => n.field(),
        }
    }

    pub fn max_dim(&self) -> usize {
        match self {
            Solver::Leaf(l) => l.max_dim(),
            Solver::Node(n) => n.max_dim(),
        }
    }

    pub fn points(&self) -> &[usize] {
        match self {
            Solver::Leaf(l) => l.complex().points(),
            Solver::Node(n) => n.points(),
        }
    }

    pub fn betti(&self, n: usize) -> usize {
        match self {
            Solver::Leaf(l) => l.betti(n),
            Solver::Node(node) => node.betti(n),
        }
    }

    pub fn betti_numbers(&self) -> Vec<usize> {
        (0..=self.max_dim()).map(|n| self.betti(n)).collect()
    }

    pub fn representatives(&self, n: usize) -> &[Chain] {
        match self {
            Solver::Leaf(l) => l.representatives(n),
            Solver::Node(node) => node.representatives(n),
        }
    }

    /// Coordinates of the class of the cycle `z` in the representative basis.
    pub fn coords(&self, z: &Chain) -> Result<Vec<u32>> {
        match self {
            Solver::Leaf(l) => l.coords(z),
            Solver::Node(n) => n.union_coords(z),
        }
    }

    /// `Some(w)` with `∂w = z` when `z` bounds, `None` otherwise.
    pub fn bound(&self, z: &Chain) -> Result<Option<Chain>> {
        match self {
            Solver::Leaf(l) => l.bound(z),
            Solver::Node(n) => n.union_bound(z),
        }
    }

    pub fn as_node(&self) -> Option<&MvNode> {
        match self {
            Solver::Node(n) => Some(n),
            Solver::Leaf(_) => None,
        }
    }
}

impl From<LeafSolver> for Solver {
    fn from(l: LeafSolver) -> Self {
        Solver::Leaf(l)
    }
}

impl From<MvNode> for Solver {
    fn from(n: MvNode) -> Self {
        Solver::Node(n)
    }
}
