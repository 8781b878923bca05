//! End-to-end workflow: build the covering once, decompose recursively into
//! leaf regions, compute leaves concurrently and assemble upward, for every
//! requested scale.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::Serialize;

use crate::cloud::{NeighborGraph, PointCloud};
use crate::complex::DEFAULT_BUDGET;
use crate::covering::{choose_k, Covering, Region, Split};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::mv::{AssemblyOptions, MvNode};
use crate::reduction::{betti_from_barcode, persistence_barcode, BarcodeOptions, LeafSolver};
use crate::scheduler;
use crate::solver::Solver;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub epsilon: f64,
    /// Scales in `(0, epsilon]`; sorted and deduplicated by the engine.
    pub scales: Vec<f64>,
    pub max_dim: usize,
    pub field: u32,
    /// Concurrent jobs.
    pub workers: usize,
    /// Parallelism used to pick cells per axis when `grid` is not given.
    pub parallelism: usize,
    pub grid: Option<Vec<usize>>,
    pub budget: usize,
    pub slack: f64,
    /// Check unit coordinates of every assembled representative.
    pub audit: bool,
    pub assembly: AssemblyOptions,
}

impl EngineConfig {
    pub fn new(epsilon: f64) -> Self {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        EngineConfig {
            epsilon,
            scales: vec![epsilon],
            max_dim: 1,
            field: 2,
            workers: cores,
            parallelism: cores,
            grid: None,
            budget: DEFAULT_BUDGET,
            slack: 0.0,
            audit: false,
            assembly: AssemblyOptions::default(),
        }
    }

    /// `steps` evenly spaced scales `epsilon * i / steps`, `i = 1..=steps`.
    pub fn with_scale_steps(mut self, steps: usize) -> Self {
        self.scales = evenly_spaced(self.epsilon, steps);
        self
    }

    fn validate(&self) -> Result<PrimeField> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if let Some(s) = self.scales.iter().find(|&&s| !(s > 0.0 && s <= self.epsilon)) {
            return Err(Error::Config(format!("scale {s} outside (0, {}]", self.epsilon)));
        }
        if !(self.slack >= 0.0) {
            return Err(Error::Config(format!("slack must be nonnegative, got {}", self.slack)));
        }
        PrimeField::new(self.field)
    }
}

pub fn evenly_spaced(epsilon: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|i| if i == steps { epsilon } else { epsilon * i as f64 / steps as f64 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleBetti {
    pub scale: f64,
    pub betti: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub scale: f64,
    pub dim: usize,
    pub expected: usize,
    pub actual: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub mismatches: Vec<Mismatch>,
    /// Set when the oracle could not run, e.g. over budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub leaf_count: usize,
    pub max_leaf_points: usize,
    /// Region label → per scale, ranks of `f_0..f_max_dim`.
    pub ranks_f: BTreeMap<String, Vec<Vec<usize>>>,
    pub timings_ms: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub node_count: usize,
    #[serde(skip)]
    pub max_leaf_simplices: usize,
    #[serde(skip)]
    pub audited_representatives: usize,
    /// Per leaf: (point count, wall time in ms), in job order.
    #[serde(skip)]
    pub leaf_timings: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BettiReport {
    pub epsilon: f64,
    pub field: u32,
    pub grid: Vec<usize>,
    pub scales: Vec<ScaleBetti>,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyReport>,
}

impl BettiReport {
    /// Pretty JSON with fixed key order. Timings are omitted unless asked
    /// for, so that reports are reproducible byte for byte.
    pub fn to_json(&self, include_timings: bool) -> String {
        let mut out = self.clone();
        if !include_timings {
            out.diagnostics.timings_ms.clear();
        }
        serde_json::to_string_pretty(&out).expect("report serializes")
    }
}

enum JobKind {
    Leaf { points: Vec<usize> },
    Node { axis: usize, points: Vec<usize> },
}

struct Job {
    scale: usize,
    region: Region,
    kind: JobKind,
    deps: Vec<usize>,
}

/// A cloud prepared for repeated runs: covering and neighbor lists are
/// computed once for `epsilon`.
pub struct Engine {
    cloud: Arc<PointCloud>,
    config: EngineConfig,
    field: PrimeField,
    scales: Vec<f64>,
    covering: Covering,
    graph: NeighborGraph,
    warnings: Vec<String>,
}

impl Engine {
    pub fn new(cloud: Arc<PointCloud>, config: EngineConfig) -> Result<Self> {
        let field = config.validate()?;
        if cloud.is_empty() {
            return Err(Error::InvalidCloud("empty point cloud".into()));
        }
        let mut scales = config.scales.clone();
        scales.sort_by(f64::total_cmp);
        scales.dedup();
        let mut warnings = Vec::new();
        let d = cloud.dim();
        let (_, range) = cloud.bounding_box();
        let ks = match &config.grid {
            Some(g) => g.clone(),
            None => {
                let choice = choose_k(config.parallelism, d, range, config.epsilon);
                if choice.eps_capped {
                    warnings.push(format!(
                        "cells per axis capped at {} so that R/k > epsilon (R = {range})",
                        choice.k
                    ));
                }
                vec![choice.k; d]
            }
        };
        let covering = Covering::build(&cloud, config.epsilon, &ks)?;
        warnings.extend(covering.warnings.iter().cloned());
        let graph = NeighborGraph::build(&cloud, config.epsilon, config.slack);
        Ok(Engine { cloud, config, field, scales, covering, graph, warnings })
    }

    pub fn covering(&self) -> &Covering {
        &self.covering
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn cloud(&self) -> &Arc<PointCloud> {
        &self.cloud
    }

    fn plan(&self, scale: usize, region: Region, jobs: &mut Vec<Job>) -> usize {
        let job = match region.split(&self.covering) {
            Split::Leaf(r) => {
                let points = r.points(&self.cloud, &self.covering);
                Job { scale, region: r, kind: JobKind::Leaf { points }, deps: Vec::new() }
            }
            Split::Node { axis, pieces, intersections } => {
                let points = region.points(&self.cloud, &self.covering);
                let deps = pieces
                    .into_iter()
                    .chain(intersections)
                    .map(|r| self.plan(scale, r, jobs))
                    .collect();
                Job { scale, region, kind: JobKind::Node { axis, points }, deps }
            }
        };
        jobs.push(job);
        jobs.len() - 1
    }

    /// Builds the root solvers for the given scale indices.
    fn solve(&self, scale_ids: &[usize], diag: &mut Diagnostics) -> Result<Vec<Arc<Solver>>> {
        let mut jobs = Vec::new();
        let mut roots = Vec::new();
        for &s in scale_ids {
            roots.push(self.plan(s, Region::full(self.cloud.dim()), &mut jobs));
        }
        let deps: Vec<Vec<usize>> = jobs.iter().map(|j| j.deps.clone()).collect();
        let leaf_time = Mutex::new(vec![None; jobs.len()]);
        let node_ms = Mutex::new(0.0f64);
        let audited = AtomicUsize::new(0);
        let max_simplices = AtomicUsize::new(0);

        let results = scheduler::execute(&deps, self.config.workers, |id, children: &[Arc<Solver>]| {
            let job = &jobs[id];
            let scale = self.scales[job.scale];
            let start = Instant::now();
            match &job.kind {
                JobKind::Leaf { points } => {
                    let leaf = LeafSolver::from_points(
                        points,
                        &self.graph,
                        scale,
                        self.config.max_dim,
                        self.field,
                        self.config.budget,
                    )?;
                    max_simplices.fetch_max(leaf.complex().total(), Ordering::Relaxed);
                    leaf_time.lock().unwrap()[id] = Some((points.len(), start.elapsed().as_secs_f64() * 1e3));
                    Ok(Solver::Leaf(leaf))
                }
                JobKind::Node { axis, points } => {
                    let k = self.covering.axes[*axis].k;
                    let node = MvNode::assemble(
                        self.cloud.clone(),
                        self.covering.axes[*axis].clone(),
                        points.clone(),
                        children[..k].to_vec(),
                        children[k..].to_vec(),
                        self.config.assembly,
                    )?;
                    if self.config.audit {
                        audited.fetch_add(node.audit()?, Ordering::Relaxed);
                    }
                    *node_ms.lock().unwrap() += start.elapsed().as_secs_f64() * 1e3;
                    Ok(Solver::Node(node))
                }
            }
        });
        let results = results.map_err(|(id, e)| self.locate_error(&jobs[id], e))?;

        let per_scale_leaves = jobs.iter().filter(|j| matches!(j.kind, JobKind::Leaf { .. })).count()
            / scale_ids.len().max(1);
        diag.leaf_count = per_scale_leaves;
        diag.max_leaf_simplices = diag.max_leaf_simplices.max(max_simplices.into_inner());
        diag.audited_representatives += audited.into_inner();
        for (id, job) in jobs.iter().enumerate() {
            match &job.kind {
                JobKind::Leaf { points } => diag.max_leaf_points = diag.max_leaf_points.max(points.len()),
                JobKind::Node { .. } => {
                    diag.node_count += 1;
                    let node = results[id].as_node().expect("node job yields a node");
                    diag.ranks_f
                        .entry(job.region.to_string())
                        .or_default()
                        .push(node.stats().ranks_f);
                }
            }
        }
        diag.leaf_timings.extend(leaf_time.into_inner().unwrap().into_iter().flatten());
        let leaf_ms: f64 = diag.leaf_timings.iter().map(|t| t.1).sum();
        *diag.timings_ms.entry("leaf_total".into()).or_default() = leaf_ms;
        *diag.timings_ms.entry("assembly_total".into()).or_default() += node_ms.into_inner().unwrap();
        Ok(roots.into_iter().map(|r| results[r].clone()).collect())
    }

    fn locate_error(&self, job: &Job, e: Error) -> Error {
        let scale = self.scales[job.scale];
        match e {
            Error::BudgetExceeded { count, budget, .. } => Error::BudgetExceeded {
                count,
                budget,
                region: format!("{} at scale {scale}", job.region),
            },
            Error::Internal(msg) => Error::Internal(format!("region {} at scale {scale}: {msg}", job.region)),
            other => other,
        }
    }

    /// The assembled solver for one scale (not necessarily one of the
    /// configured scales, but at most `epsilon`).
    pub fn solver_at(&self, scale: f64) -> Result<Arc<Solver>> {
        if !(scale > 0.0 && scale <= self.config.epsilon) {
            return Err(Error::Config(format!("scale {scale} outside (0, {}]", self.config.epsilon)));
        }
        let single = Engine {
            cloud: self.cloud.clone(),
            config: self.config.clone(),
            field: self.field,
            scales: vec![scale],
            covering: self.covering.clone(),
            graph: self.graph.clone(),
            warnings: Vec::new(),
        };
        let mut diag = empty_diagnostics();
        Ok(single.solve(&[0], &mut diag)?.remove(0))
    }

    pub fn run(&self) -> Result<BettiReport> {
        Ok(self.run_with_solvers()?.0)
    }

    /// Like [`Engine::run`], also returning the root solver of each scale.
    pub fn run_with_solvers(&self) -> Result<(BettiReport, Vec<Arc<Solver>>)> {
        let start = Instant::now();
        let mut diag = empty_diagnostics();
        let ids: Vec<usize> = (0..self.scales.len()).collect();
        let roots = if ids.is_empty() { Vec::new() } else { self.solve(&ids, &mut diag)? };
        diag.timings_ms.insert("wall".into(), start.elapsed().as_secs_f64() * 1e3);
        if diag.leaf_count == 0 {
            diag.leaf_count = self.covering.leaf_count();
        }
        diag.warnings = self.warnings.clone();
        if diag.max_leaf_simplices * 2 > self.config.budget {
            diag.warnings.push(format!(
                "largest leaf used {} of the {} simplex budget",
                diag.max_leaf_simplices, self.config.budget
            ));
        }
        let report = BettiReport {
            epsilon: self.config.epsilon,
            field: self.field.modulus(),
            grid: self.covering.grid(),
            scales: self
                .scales
                .iter()
                .zip(&roots)
                .map(|(&scale, root)| ScaleBetti { scale, betti: root.betti_numbers() })
                .collect(),
            diagnostics: diag,
            verify: None,
        };
        Ok((report, roots))
    }

    /// Global barcode of the whole cloud up to `epsilon`.
    pub fn oracle_betti(&self) -> Result<Vec<ScaleBetti>> {
        let all: Vec<usize> = (0..self.cloud.len()).collect();
        let bars = persistence_barcode(
            &all,
            &self.cloud,
            &self.graph,
            self.config.epsilon,
            self.config.max_dim,
            self.field,
            self.config.budget,
            BarcodeOptions::default(),
        )?;
        Ok(self
            .scales
            .iter()
            .map(|&scale| ScaleBetti {
                scale,
                betti: betti_from_barcode(&bars, scale + self.config.slack, self.config.max_dim),
            })
            .collect())
    }

    /// Compares a report against the global oracle.
    pub fn verify(&self, report: &BettiReport) -> VerifyReport {
        let expected = match self.oracle_betti() {
            Ok(e) => e,
            Err(e) => {
                return VerifyReport {
                    pass: false,
                    mismatches: Vec::new(),
                    error: Some(format!("oracle infeasible: {e}")),
                }
            }
        };
        let mut mismatches = Vec::new();
        for (exp, got) in expected.iter().zip(&report.scales) {
            for (dim, (&e, &a)) in exp.betti.iter().zip(&got.betti).enumerate() {
                if e != a {
                    mismatches.push(Mismatch { scale: exp.scale, dim, expected: e, actual: a });
                }
            }
        }
        VerifyReport { pass: mismatches.is_empty(), mismatches, error: None }
    }
}

fn empty_diagnostics() -> Diagnostics {
    Diagnostics {
        leaf_count: 0,
        max_leaf_points: 0,
        ranks_f: BTreeMap::new(),
        timings_ms: BTreeMap::new(),
        warnings: Vec::new(),
        node_count: 0,
        max_leaf_simplices: 0,
        audited_representatives: 0,
        leaf_timings: Vec::new(),
    }
}

/// Runs the engine and, if asked, the oracle comparison.
pub fn run(cloud: Arc<PointCloud>, config: EngineConfig, verify: bool) -> Result<BettiReport> {
    let engine = Engine::new(cloud, config)?;
    let mut report = engine.run()?;
    if verify {
        report.verify = Some(engine.verify(&report));
    }
    Ok(report)
}
