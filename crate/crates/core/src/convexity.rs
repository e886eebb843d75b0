//! Classification of hyper-parameters by provable convexity of `F_λ`.
//!
//! The Hessian of `F_λ` is `E[2 Ψ_λ(<R, w>) R Rᵀ]`, so `F_λ` is convex on a
//! domain whenever `Ψ_λ(y) = 6λ₄y² - 3λ₃y + λ₂` is nonnegative for every
//! attainable `y = <R, w>`. Given bounds `[lower, upper]` on `y`, four
//! closed-form conditions decide exactly when that holds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::objective::{psi, LambdaPoint};
use crate::returns::Bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    /// `Ψ_λ ≥ 0` on all of ℝ: convex on ℝⁿ.
    GlobalConvex,
    /// `Ψ_λ ≥ 0` on `[lower, upper]`: convex on the domain the bounds belong to.
    DomainConvex,
    Unknown,
}

impl RegionLabel {
    /// Whether convexity on the bounded domain is certified.
    pub fn is_domain_convex(self) -> bool {
        !matches!(self, RegionLabel::Unknown)
    }
}

/// Which of the four conditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionBreakdown {
    /// `λ₄ = 0` and `3 upper λ₃ ≤ λ₂`.
    pub linear_kurtosis: bool,
    /// `λ₄ > 0` and `λ₃ ≤ sqrt(8/3 λ₂λ₄)`, or `λ₃ = λ₄ = 0`.
    pub nonpositive_discriminant: bool,
    /// Both roots of `Ψ_λ` lie above `upper`.
    pub roots_above: bool,
    /// Both roots of `Ψ_λ` lie below `lower`.
    pub roots_below: bool,
    pub label: RegionLabel,
}

pub fn classify_lambda(lambda: &LambdaPoint, bounds: Bounds) -> RegionLabel {
    let [_, l2, l3, l4] = lambda.as_array();
    classify_weights(l2, l3, l4, bounds).label
}

pub fn classify_detailed(lambda: &LambdaPoint, bounds: Bounds) -> ConditionBreakdown {
    let [_, l2, l3, l4] = lambda.as_array();
    classify_weights(l2, l3, l4, bounds)
}

/// Classification on `(λ₂, λ₃, λ₄)`; `λ₁` does not enter the Hessian.
pub fn classify_weights(l2: f64, l3: f64, l4: f64, bounds: Bounds) -> ConditionBreakdown {
    let Bounds { lower, upper } = bounds;
    let disc_limit = (8.0 / 3.0 * l2 * l4).sqrt();
    let positive_disc = l4 > 0.0 && l3 > disc_limit;

    let linear_kurtosis = l4 == 0.0 && 3.0 * upper * l3 <= l2;
    let nonpositive_discriminant = (l4 > 0.0 && l3 <= disc_limit) || (l4 == 0.0 && l3 == 0.0);
    let roots_above = positive_disc && 3.0 * upper * l3 <= l2 + 6.0 * upper * upper * l4 && 4.0 * upper * l4 <= l3;
    let roots_below = positive_disc && 3.0 * lower * l3 <= l2 + 6.0 * lower * lower * l4 && 4.0 * lower * l4 >= l3;

    let label = if nonpositive_discriminant {
        RegionLabel::GlobalConvex
    } else if linear_kurtosis || roots_above || roots_below {
        RegionLabel::DomainConvex
    } else {
        RegionLabel::Unknown
    };
    ConditionBreakdown {
        linear_kurtosis,
        nonpositive_discriminant,
        roots_above,
        roots_below,
        label,
    }
}

/// Minimum of `Ψ_λ` over `[lower, upper]` and where it is attained.
pub fn psi_minimum(lambda: &LambdaPoint, bounds: Bounds) -> (f64, f64) {
    let [_, _, l3, l4] = lambda.as_array();
    let mut candidates = vec![bounds.lower, bounds.upper];
    if l4 > 0.0 {
        let vertex = l3 / (4.0 * l4);
        if vertex > bounds.lower && vertex < bounds.upper {
            candidates.push(vertex);
        }
    }
    candidates
        .into_iter()
        .map(|y| (y, psi(lambda, y)))
        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

/// Which region a volume estimate counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTarget {
    /// `Λ₊`
    Global,
    /// `Λ_Δ` or `Λ_□`, depending on the bounds supplied.
    Domain,
}

/// Fraction of the grid `{(i, j, k) / resolution : i + j + k ≤ resolution}`
/// over `Δ̂ = {(λ₂, λ₃, λ₄) ≥ 0 : λ₂ + λ₃ + λ₄ ≤ 1}` that lands in `target`.
pub fn region_volume(bounds: Bounds, target: RegionTarget, resolution: usize) -> f64 {
    assert!(resolution >= 2, "resolution must be at least 2");
    let r = resolution as f64;
    let (hits, total) = (0..=resolution)
        .into_par_iter()
        .map(|i| {
            let mut hits = 0u64;
            let mut total = 0u64;
            for j in 0..=resolution - i {
                for k in 0..=resolution - i - j {
                    total += 1;
                    let b = classify_weights(i as f64 / r, j as f64 / r, k as f64 / r, bounds);
                    let inside = match target {
                        RegionTarget::Global => b.label == RegionLabel::GlobalConvex,
                        RegionTarget::Domain => b.label.is_domain_convex(),
                    };
                    hits += u64::from(inside);
                }
            }
            (hits, total)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    hits as f64 / total as f64
}
