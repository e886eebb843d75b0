//! FISTA with backtracking for `min F_λ(w)` over a [`Domain`].

use serde::{Deserialize, Serialize};

use crate::error::{MvskError, Result};
use crate::moments::MomentModel;
use crate::objective::{Evaluator, LambdaPoint, ObjectiveValues};
use crate::projection::Domain;

/// Weights with magnitude at or below this count as zero.
pub const SUPPORT_EPSILON: f64 = 1e-8;

/// Iteration budget for [`scalarized_reference`].
pub const REFERENCE_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Multiplier applied to the Lipschitz estimate when the sufficient
    /// decrease test fails.
    pub backtracking_factor: f64,
    pub initial_step: f64,
    /// Gradient-mapping norm below which the run stops early, when enabled.
    pub stationarity_tolerance: f64,
    pub stop_on_stationarity: bool,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            backtracking_factor: 2.0,
            initial_step: 1.0,
            stationarity_tolerance: 1e-9,
            stop_on_stationarity: false,
            record_trace: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(MvskError::Domain("max_iterations must be at least 1".into()));
        }
        if self.backtracking_factor.is_nan() || self.backtracking_factor <= 1.0 {
            return Err(MvskError::Domain("backtracking_factor must exceed 1".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(MvskError::Domain("initial_step must be positive".into()));
        }
        if self.stationarity_tolerance.is_nan() || self.stationarity_tolerance < 0.0 {
            return Err(MvskError::Domain("stationarity_tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub w: Vec<f64>,
    pub objectives: ObjectiveValues,
    pub scalarized_value: f64,
    pub iterations_used: usize,
    /// Norm of the gradient mapping `L (w - Proj(w - ∇F(w) / L))` at `w`.
    pub projected_gradient_norm: f64,
    /// Final backtracking estimate of the Lipschitz constant of `∇F_λ`.
    pub lipschitz_estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
    pub support: Vec<usize>,
}

impl SolveResult {
    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

pub fn support_of(w: &[f64]) -> Vec<usize> {
    w.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > SUPPORT_EPSILON)
        .map(|(i, _)| i)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `F_λ` over `domain`, starting from the projection of
/// `warm_start` (or the domain's default start). Returns the best iterate.
pub fn solve(
    model: &MomentModel,
    lambda: &LambdaPoint,
    domain: &Domain,
    opts: &SolverOptions,
    warm_start: Option<&[f64]>,
) -> Result<SolveResult> {
    let n = model.n();
    opts.validate()?;
    domain.validate(n)?;
    let start = match warm_start {
        Some(w) if w.len() != n => {
            return Err(MvskError::Dimension {
                expected: n,
                found: w.len(),
            })
        }
        Some(w) if w.iter().any(|v| !v.is_finite()) => {
            return Err(MvskError::Domain("warm start must be finite".into()))
        }
        Some(w) => domain.project(w),
        None => domain.default_start(n),
    };

    let eval = Evaluator::new(model);
    let mut scratch = Vec::with_capacity(model.m());
    let mut grad = vec![0.0; n];
    let mut step_point = vec![0.0; n];

    let mut best_value = eval.value(lambda, &start, &mut scratch);
    if !best_value.is_finite() {
        return Err(MvskError::Numerical {
            iteration: 0,
            quantity: "objective",
        });
    }
    let mut best = start.clone();
    let mut x_prev = start.clone();
    let mut y = start;
    let mut t = 1.0f64;
    let mut lipschitz = 1.0 / opts.initial_step;
    let mut trace = opts.record_trace.then(|| Vec::with_capacity(opts.max_iterations));
    let mut iterations = 0;

    for k in 1..=opts.max_iterations {
        iterations = k;
        let fy = eval.value_and_gradient(lambda, &y, &mut grad, &mut scratch);
        if !fy.is_finite() {
            return Err(MvskError::Numerical {
                iteration: k,
                quantity: "objective",
            });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(MvskError::Numerical {
                iteration: k,
                quantity: "gradient",
            });
        }

        let (x, fx) = loop {
            for ((s, yi), gi) in step_point.iter_mut().zip(&y).zip(&grad) {
                *s = yi - gi / lipschitz;
            }
            let x = domain.project(&step_point);
            let fx = eval.value(lambda, &x, &mut scratch);
            let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let model_bound = fy + dot(&grad, &d) + 0.5 * lipschitz * dot(&d, &d);
            // slack absorbs rounding once steps become tiny
            if fx <= model_bound + 1e-14 * (1.0 + fy.abs()) {
                break (x, fx);
            }
            lipschitz *= opts.backtracking_factor;
            if lipschitz.is_nan() || lipschitz >= 1e300 {
                return Err(MvskError::Numerical {
                    iteration: k,
                    quantity: "step size",
                });
            }
        };

        if let Some(tr) = trace.as_mut() {
            tr.push(fx);
        }
        // ties go to the later iterate
        if fx <= best_value {
            best_value = fx;
            best.copy_from_slice(&x);
        }
        if opts.stop_on_stationarity {
            let mapping = lipschitz * x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if mapping <= opts.stationarity_tolerance {
                break;
            }
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        for i in 0..n {
            y[i] = x[i] + momentum * (x[i] - x_prev[i]);
        }
        x_prev = x;
        t = t_next;
    }

    eval.value_and_gradient(lambda, &best, &mut grad, &mut scratch);
    for ((s, wi), gi) in step_point.iter_mut().zip(&best).zip(&grad) {
        *s = wi - gi / lipschitz;
    }
    let projected = domain.project(&step_point);
    let projected_gradient_norm = lipschitz
        * best
            .iter()
            .zip(&projected)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();

    let objectives = eval.objectives(&best, &mut scratch);
    Ok(SolveResult {
        support: support_of(&best),
        scalarized_value: objectives.scalarize(lambda.as_array()),
        objectives,
        w: best,
        iterations_used: iterations,
        projected_gradient_norm,
        lipschitz_estimate: lipschitz,
        trace,
    })
}

/// High-budget solve from the default start, used as a surrogate for the
/// optimal value on convex instances.
pub fn scalarized_reference(model: &MomentModel, lambda: &LambdaPoint, domain: &Domain, budget: usize) -> Result<f64> {
    let opts = SolverOptions {
        max_iterations: budget,
        ..SolverOptions::default()
    };
    Ok(solve(model, lambda, domain, &opts, None)?.scalarized_value)
}
