//! Grid coverings of a point cloud by overlapping axis-aligned strips.
//!
//! Along each axis the range `[a, a + R]` is cut into `k` cells
//! `[a + jR/k, a + (j+1)R/k + ε]` (0-based `j`). Consecutive cells overlap in
//! an interval of width `ε`; cells two or more apart are disjoint as long as
//! `R/k > ε`, which is enforced whenever `k >= 3`. Any set of diameter at most `ε` projects into an interval of
//! length at most `ε` and therefore fits inside one cell.

use std::fmt;

use crate::chain::Simplex;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisIntervals {
    pub axis: usize,
    pub min: f64,
    pub range: f64,
    pub k: usize,
    pub epsilon: f64,
    pub cells: Vec<Interval>,
    /// `overlaps[j] = cells[j] ∩ cells[j + 1]`.
    pub overlaps: Vec<Interval>,
}

impl AxisIntervals {
    pub fn new(axis: usize, min: f64, range: f64, k: usize, epsilon: f64) -> Self {
        assert!(k >= 1);
        let step = range / k as f64;
        let boundary = |j: usize| if j == 0 { min } else { min + j as f64 * step };
        let cells: Vec<Interval> = (0..k)
            .map(|j| Interval { lo: boundary(j), hi: boundary(j + 1) + epsilon })
            .collect();
        let overlaps = (0..k.saturating_sub(1))
            .map(|j| Interval { lo: cells[j + 1].lo, hi: cells[j].hi })
            .collect();
        AxisIntervals { axis, min, range, k, epsilon, cells, overlaps }
    }

    /// Cells two or more apart do not meet, checked in floating point.
    fn separated(&self) -> bool {
        (0..self.k.saturating_sub(2)).all(|j| self.cells[j].hi < self.cells[j + 2].lo)
    }

    pub fn selector_interval(&self, sel: Selector) -> Option<Interval> {
        match sel {
            Selector::Full => None,
            Selector::Cell(j) => Some(self.cells[j]),
            Selector::Overlap(j) => Some(self.overlaps[j]),
        }
    }

    /// Lowest cell containing every value of `xs`.
    pub fn lowest_cell(&self, lo: f64, hi: f64) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(lo) && c.contains(hi))
    }
}

/// Result of [`choose_k`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KChoice {
    pub k: usize,
    /// The `R/k > ε` requirement forced a smaller `k` than parallelism allows.
    pub eps_capped: bool,
}

/// Largest integer strictly below `p^(1/d)`.
fn parallel_cells(p: usize, d: usize) -> usize {
    let pow = |k: usize| (k as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    let mut k = (p as f64).powf(1.0 / d as f64).floor() as usize + 1;
    while k > 0 && pow(k) >= p as u128 {
        k -= 1;
    }
    while pow(k + 1) < p as u128 {
        k += 1;
    }
    k
}

/// Largest `k <= cap` with `range / k > epsilon` (0 if none).
fn separated_cells(range: f64, epsilon: f64, cap: usize) -> usize {
    if !(range > epsilon) {
        return 0;
    }
    let mut k = (range / epsilon).min(cap as f64).floor() as usize;
    while k > 0 && range / k as f64 <= epsilon {
        k -= 1;
    }
    while k < cap && range / (k + 1) as f64 > epsilon {
        k += 1;
    }
    k
}

/// Cells per axis for at most `p` concurrent cube computations in dimension
/// `d`, capped so that non-adjacent cells stay disjoint.
pub fn choose_k(p: usize, d: usize, range: f64, epsilon: f64) -> KChoice {
    let kp = parallel_cells(p.max(1), d.max(1));
    let ke = separated_cells(range, epsilon, kp.max(1));
    KChoice { k: kp.min(ke).max(1), eps_capped: ke < kp }
}

/// Per-axis intervals for a whole cloud at scale bound `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covering {
    pub epsilon: f64,
    pub min: Vec<f64>,
    pub range: f64,
    pub axes: Vec<AxisIntervals>,
    pub warnings: Vec<String>,
}

impl Covering {
    pub fn build(cloud: &PointCloud, epsilon: f64, ks: &[usize]) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::InvalidCloud("empty point cloud".into()));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if ks.len() != cloud.dim() {
            return Err(Error::Config(format!(
                "grid has {} entries but the cloud is {}-dimensional",
                ks.len(),
                cloud.dim()
            )));
        }
        let (min, range) = cloud.bounding_box();
        let mut warnings = Vec::new();
        let mut axes = Vec::with_capacity(ks.len());
        for (axis, &requested) in ks.iter().enumerate() {
            let mut k = requested.max(1);
            if range == 0.0 {
                k = 1;
            }
            // Two cells have no non-adjacent pair, so only k >= 3 needs R/k > ε.
            let cap = separated_cells(range, epsilon, k).max(k.min(2));
            if k > cap {
                warnings.push(format!(
                    "axis {axis}: {requested} cells would leave R/k <= epsilon; using {cap}"
                ));
                k = cap;
            }
            let mut intervals = AxisIntervals::new(axis, min[axis], range, k, epsilon);
            while !intervals.separated() {
                k -= 1;
                warnings.push(format!("axis {axis}: rounding forced k down to {k}"));
                intervals = AxisIntervals::new(axis, min[axis], range, k, epsilon);
            }
            axes.push(intervals);
        }
        Ok(Covering { epsilon, min, range, axes, warnings })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn grid(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.k).collect()
    }

    /// Leaf regions in a full decomposition: product of `2k - 1` over axes.
    pub fn leaf_count(&self) -> usize {
        self.axes.iter().map(|a| 2 * a.k - 1).product()
    }

    /// Lowest cell along `axis` containing every vertex of `simplex`.
    ///
    /// Fails only when the simplex is wider than `epsilon` along the axis.
    pub fn assign_simplex(&self, cloud: &PointCloud, axis: usize, simplex: &Simplex) -> Result<usize> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in simplex.vertices() {
            let x = cloud.coord(v as usize, axis);
            lo = lo.min(x);
            hi = hi.max(x);
        }
        self.axes[axis]
            .lowest_cell(lo, hi)
            .ok_or_else(|| Error::UnsupportedSimplex(format!("{simplex} fits no cell on axis {axis}")))
    }
}

/// Per-axis restriction of a region. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    Full,
    Cell(usize),
    Overlap(usize),
}

/// A region of the cloud: the points whose coordinates lie in the selected
/// interval on every restricted axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub selectors: Vec<Selector>,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.selectors.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match s {
                Selector::Full => write!(f, "*")?,
                Selector::Cell(j) => write!(f, "c{}", j + 1)?,
                Selector::Overlap(j) => write!(f, "o{}", j + 1)?,
            }
        }
        Ok(())
    }
}

/// Outcome of [`Region::split`].
#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    Leaf(Region),
    Node {
        axis: usize,
        pieces: Vec<Region>,
        intersections: Vec<Region>,
    },
}

impl Region {
    pub fn full(d: usize) -> Self {
        Region { selectors: vec![Selector::Full; d] }
    }

    pub fn is_leaf(&self) -> bool {
        !self.selectors.contains(&Selector::Full)
    }

    pub fn contains(&self, cloud: &PointCloud, covering: &Covering, i: usize) -> bool {
        self.selectors.iter().zip(&covering.axes).all(|(&sel, ax)| {
            ax.selector_interval(sel)
                .is_none_or(|iv| iv.contains(cloud.coord(i, ax.axis)))
        })
    }

    pub fn points(&self, cloud: &PointCloud, covering: &Covering) -> Vec<usize> {
        (0..cloud.len()).filter(|&i| self.contains(cloud, covering, i)).collect()
    }

    /// Splits along the first unrestricted axis into `k` cell pieces and the
    /// `k - 1` overlaps between neighbours. Axes with a single cell are
    /// restricted to it without splitting.
    pub fn split(&self, covering: &Covering) -> Split {
        let mut region = self.clone();
        for (axis, ax) in covering.axes.iter().enumerate() {
            if region.selectors[axis] != Selector::Full {
                continue;
            }
            if ax.k == 1 {
                region.selectors[axis] = Selector::Cell(0);
                continue;
            }
            let with = |sel: Selector| {
                let mut r = region.clone();
                r.selectors[axis] = sel;
                r
            };
            return Split::Node {
                axis,
                pieces: (0..ax.k).map(|j| with(Selector::Cell(j))).collect(),
                intersections: (0..ax.k - 1).map(|j| with(Selector::Overlap(j))).collect(),
            };
        }
        Split::Leaf(region)
    }
}
