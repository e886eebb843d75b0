//! Grid sweeps over `Δ⁴`: solve every scalarization, rescale the objective
//! values, and extract superior trade-offs.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::{classify_lambda, RegionLabel};
use crate::error::{MvskError, Result};
use crate::moments::MomentModel;
use crate::objective::{LambdaPoint, ObjectiveValues};
use crate::projection::Domain;
use crate::returns::Bounds;
use crate::solver::{solve, SolveResult, SolverOptions};
use crate::sparse::{solve_sparse, SparseOptions};

/// A result counts as converged when its gradient mapping is this small.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

/// Default strictness margin for dominance checks.
pub const DOMINANCE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    /// `λ = counts / s`.
    pub counts: [u32; 4],
    pub lambda: LambdaPoint,
}

/// The points of `Δ⁴` with coordinates in `{0, 1/s, ..., 1}`, ordered
/// lexicographically in `(λ₂, λ₃, λ₄)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub s: u32,
    pub require_positive_mean_weight: bool,
    pub points: Vec<GridPoint>,
}

impl LambdaGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Enumerate the grid. With `require_positive_mean_weight`, points with
/// `λ₁ = 0` are dropped.
pub fn build_grid(s: u32, require_positive_mean_weight: bool) -> Result<LambdaGrid> {
    if s == 0 {
        return Err(MvskError::Domain("grid subdivision must be at least 1".into()));
    }
    let sf = f64::from(s);
    let mut points = Vec::new();
    for a2 in 0..=s {
        for a3 in 0..=s - a2 {
            for a4 in 0..=s - a2 - a3 {
                let a1 = s - a2 - a3 - a4;
                if require_positive_mean_weight && a1 == 0 {
                    continue;
                }
                let counts = [a1, a2, a3, a4];
                let lambda = LambdaPoint::normalized(counts.map(|c| f64::from(c) / sf))?;
                points.push(GridPoint { counts, lambda });
            }
        }
    }
    Ok(LambdaGrid {
        s,
        require_positive_mean_weight,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub sparse: Option<SparseOptions>,
    /// Seed each solve with the nearest solved point of its slice.
    pub warm_start: bool,
    /// Bounds used for region labels; defaults to the model's bounds.
    pub bounds: Option<Bounds>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            sparse: None,
            warm_start: true,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub point: GridPoint,
    pub region: RegionLabel,
    pub outcome: std::result::Result<SolveResult, String>,
}

impl SweepEntry {
    pub fn result(&self) -> Option<&SolveResult> {
        self.outcome.as_ref().ok()
    }

    pub fn converged(&self) -> bool {
        self.result()
            .is_some_and(|r| r.projected_gradient_norm <= CONVERGENCE_TOLERANCE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: LambdaGrid,
    pub domain: Domain,
    pub sparse_k: Option<usize>,
    pub bounds: Option<Bounds>,
    pub entries: Vec<SweepEntry>,
    /// Per-entry scaled `(f₁, f₂, f₃, f₄)`; `None` for failed solves or
    /// before [`scale_values`].
    pub scaled_values: Vec<Option<[f64; 4]>>,
    pub aggregate: Vec<Option<f64>>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_err()).count()
    }

    pub fn raw_values(&self) -> Vec<Option<ObjectiveValues>> {
        self.entries.iter().map(|e| e.result().map(|r| r.objectives)).collect()
    }
}

fn l1(a: &[u32; 4], b: &[u32; 4]) -> u32 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum()
}

/// Solve one slice (fixed `λ₄`) in grid order, chaining warm starts.
fn solve_slice(
    model: &MomentModel,
    domain: &Domain,
    grid: &LambdaGrid,
    indices: &[usize],
    opts: &SweepOptions,
) -> Vec<(usize, std::result::Result<SolveResult, String>)> {
    let mut solved: Vec<(usize, SolveResult)> = Vec::new();
    let mut out = Vec::with_capacity(indices.len());
    for &idx in indices {
        let point = &grid.points[idx];
        let seed = if opts.warm_start {
            // nearest solved point; later points win ties
            solved
                .iter()
                .rev()
                .min_by_key(|(j, _)| l1(&grid.points[*j].counts, &point.counts))
                .map(|(_, r)| r.w.clone())
        } else {
            None
        };
        let dense = solve(model, &point.lambda, domain, &opts.solver, seed.as_deref());
        let outcome = match (dense, &opts.sparse) {
            (Ok(d), Some(sp)) => {
                let sparse = solve_sparse(model, &point.lambda, domain, sp, &d, &opts.solver);
                solved.push((idx, d));
                sparse
            }
            (Ok(d), None) => {
                solved.push((idx, d.clone()));
                Ok(d)
            }
            (Err(e), _) => Err(e),
        };
        out.push((idx, outcome.map_err(|e| e.to_string())));
    }
    out
}

/// Solve every grid point. Slices of constant `λ₄` run in parallel on the
/// current rayon pool; within a slice, solves are chained sequentially.
/// Failed solves are recorded per point.
pub fn run_sweep(model: &MomentModel, domain: &Domain, grid: &LambdaGrid, opts: &SweepOptions) -> Result<SweepResult> {
    domain.validate(model.n())?;
    opts.solver.validate()?;
    if let Some(sp) = &opts.sparse {
        if sp.max_support == 0 || sp.max_support > model.n() {
            return Err(MvskError::Domain(format!(
                "max support {} must lie in 1..={}",
                sp.max_support,
                model.n()
            )));
        }
    }
    let bounds = opts
        .bounds
        .or_else(|| model.bounds().map(|b| b.for_domain(domain.kind)));

    let mut slices: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, p) in grid.points.iter().enumerate() {
        slices.entry(p.counts[3]).or_default().push(i);
    }
    let slices: Vec<Vec<usize>> = slices.into_values().collect();

    let mut outcomes: Vec<Option<std::result::Result<SolveResult, String>>> = vec![None; grid.len()];
    let solved: Vec<_> = slices
        .par_iter()
        .map(|idx| solve_slice(model, domain, grid, idx, opts))
        .collect();
    for (idx, outcome) in solved.into_iter().flatten() {
        outcomes[idx] = Some(outcome);
    }

    let entries = grid
        .points
        .iter()
        .zip(outcomes)
        .map(|(p, o)| SweepEntry {
            point: *p,
            region: bounds.map_or(RegionLabel::Unknown, |b| classify_lambda(&p.lambda, b)),
            outcome: o.expect("every grid point belongs to a slice"),
        })
        .collect();

    Ok(SweepResult {
        grid: grid.clone(),
        domain: domain.clone(),
        sparse_k: opts.sparse.as_ref().map(|s| s.max_support),
        bounds,
        entries,
        scaled_values: vec![None; grid.len()],
        aggregate: vec![None; grid.len()],
    })
}

/// Rescale each objective to `[0, 1]` across the sweep, with 1 the most
/// desirable value (high mean and skewness, low variance and kurtosis).
/// An objective that is constant across the sweep scales to 1.
pub fn scale_values(mut sweep: SweepResult) -> SweepResult {
    let values: Vec<Option<[f64; 4]>> = sweep
        .entries
        .iter()
        .map(|e| e.result().map(|r| r.objectives.as_array()))
        .collect();
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for v in values.iter().flatten() {
        for i in 0..4 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    sweep.scaled_values = values
        .iter()
        .map(|v| {
            v.map(|v| {
                let mut out = [1.0; 4];
                for i in 0..4 {
                    if hi[i] > lo[i] {
                        let t = ((v[i] - lo[i]) / (hi[i] - lo[i])).clamp(0.0, 1.0);
                        out[i] = if i % 2 == 0 { t } else { 1.0 - t };
                    }
                }
                out
            })
        })
        .collect();
    sweep.aggregate = sweep.scaled_values.iter().map(|s| s.map(|s| s.iter().sum())).collect();
    sweep
}

/// Entries whose aggregate score is at least `(1 - eta)` times the sweep
/// maximum, with their scores.
pub fn superior_set(sweep: &SweepResult, eta: f64) -> Result<Vec<(usize, f64)>> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(MvskError::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    let max = sweep
        .aggregate
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let threshold = (1.0 - eta) * max;
    Ok(sweep
        .aggregate
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.filter(|&a| a >= threshold).map(|a| (i, a)))
        .collect())
}

/// Normalized histogram of support sizes over successful solves.
pub fn support_histogram(sweep: &SweepResult) -> BTreeMap<usize, f64> {
    let sizes: Vec<usize> = sweep
        .entries
        .iter()
        .filter_map(|e| e.result().map(SolveResult::support_size))
        .collect();
    let mut hist = BTreeMap::new();
    for &s in &sizes {
        *hist.entry(s).or_insert(0.0) += 1.0;
    }
    let total = sizes.len() as f64;
    hist.values_mut().for_each(|v| *v /= total);
    hist
}

/// Orient objectives so that larger is better in every coordinate.
fn oriented(f: &ObjectiveValues) -> [f64; 4] {
    [f.f1, -f.f2, f.f3, -f.f4]
}

/// Whether `b` dominates `a`: no worse than `a` (up to `margin`) in every
/// objective and better by more than `margin` in at least one.
pub fn dominates(b: &ObjectiveValues, a: &ObjectiveValues, margin: f64) -> bool {
    let (ob, oa) = (oriented(b), oriented(a));
    ob.iter().zip(&oa).all(|(x, y)| *x >= y - margin) && ob.iter().zip(&oa).any(|(x, y)| *x > y + margin)
}

/// All pairs `(a, b)` of labelled objective vectors where `b` dominates `a`.
pub fn dominated_pairs(values: &[(usize, ObjectiveValues)], margin: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (ia, fa) in values {
        for (ib, fb) in values {
            if ia != ib && dominates(fb, fa, margin) {
                out.push((*ia, *ib));
            }
        }
    }
    out
}

/// Dominance violations among the selected entries. By default, entries
/// with every `λᵢ > 0` and a certified convex region are selected; their
/// optimizers should be Pareto optimal, so the result is expected empty.
pub fn non_domination_check(
    sweep: &SweepResult,
    restrict_to: Option<&dyn Fn(&SweepEntry) -> bool>,
    margin: f64,
) -> Vec<(usize, usize)> {
    let default = |e: &SweepEntry| e.point.lambda.is_interior() && e.region.is_domain_convex();
    let keep: &dyn Fn(&SweepEntry) -> bool = restrict_to.unwrap_or(&default);
    let values: Vec<(usize, ObjectiveValues)> = sweep
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| keep(e))
        .filter_map(|(i, e)| e.result().map(|r| (i, r.objectives)))
        .collect();
    dominated_pairs(&values, margin)
}
