//! Euclidean projections onto the simplex, the cube, and their faces.

use serde::{Deserialize, Serialize};

use crate::error::{MvskError, Result};
use crate::returns::DomainKind;

/// A feasible set: the simplex or a cube, optionally restricted to the
/// coordinates in `support` (all others fixed at zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
}

impl Domain {
    pub fn simplex() -> Self {
        Self {
            kind: DomainKind::Simplex,
            support: None,
        }
    }

    pub fn cube(bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(MvskError::Domain(format!(
                "cube half-width must be positive, got {bound}"
            )));
        }
        Ok(Self {
            kind: DomainKind::Cube { bound },
            support: None,
        })
    }

    /// The same domain restricted to the coordinates in `support`.
    pub fn restricted(&self, support: Vec<usize>) -> Result<Self> {
        if support.is_empty() {
            return Err(MvskError::Domain("support restriction must be nonempty".into()));
        }
        Ok(Self {
            kind: self.kind,
            support: Some(support),
        })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let DomainKind::Cube { bound } = self.kind {
            if !(bound > 0.0 && bound.is_finite()) {
                return Err(MvskError::Domain(format!(
                    "cube half-width must be positive, got {bound}"
                )));
            }
        }
        if let Some(u) = &self.support {
            if u.is_empty() {
                return Err(MvskError::Domain("support restriction must be nonempty".into()));
            }
            if let Some(&bad) = u.iter().find(|&&i| i >= n) {
                return Err(MvskError::Domain(format!(
                    "support index {bad} out of range for n = {n}"
                )));
            }
        }
        Ok(())
    }

    /// Deterministic starting point: barycenter of the (face of the) simplex,
    /// or the origin for the cube.
    pub fn default_start(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        if self.kind == DomainKind::Simplex {
            match &self.support {
                Some(u) => u.iter().for_each(|&i| x[i] = 1.0 / u.len() as f64),
                None => x.iter_mut().for_each(|v| *v = 1.0 / n as f64),
            }
        }
        x
    }

    /// Project `x` onto the domain.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match (&self.kind, &self.support) {
            (DomainKind::Simplex, None) => project_simplex(x),
            (DomainKind::Simplex, Some(u)) => lift_face(x, u),
            (DomainKind::Cube { bound }, None) => project_cube(x, *bound),
            (DomainKind::Cube { bound }, Some(u)) => {
                let mut y = vec![0.0; x.len()];
                for &i in u {
                    y[i] = x[i].clamp(-bound, *bound);
                }
                y
            }
        }
    }

    /// Largest violation of the domain constraints by `x`.
    pub fn infeasibility(&self, x: &[f64]) -> f64 {
        let outside = |i: usize| match &self.support {
            Some(u) => !u.contains(&i),
            None => false,
        };
        let mut worst = 0.0f64;
        for (i, &v) in x.iter().enumerate() {
            if outside(i) {
                worst = worst.max(v.abs());
                continue;
            }
            worst = worst.max(match self.kind {
                DomainKind::Simplex => (-v).max(0.0),
                DomainKind::Cube { bound } => (v.abs() - bound).max(0.0),
            });
        }
        if self.kind == DomainKind::Simplex {
            worst = worst.max((x.iter().sum::<f64>() - 1.0).abs());
        }
        worst
    }
}

/// Projection onto the probability simplex by sorting and thresholding.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let theta = simplex_threshold(x.iter().copied());
    x.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// The shift `θ` with `Σ max(x_i - θ, 0) = 1`.
fn simplex_threshold(values: impl Iterator<Item = f64>) -> f64 {
    let mut sorted: Vec<(usize, f64)> = values.enumerate().collect();
    // descending by value, ties by original index
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut cumulative = 0.0;
    let mut theta = f64::NAN;
    for (j, &(_, u)) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    theta
}

/// Entry-wise clamp to `[-bound, bound]`.
pub fn project_cube(x: &[f64], bound: f64) -> Vec<f64> {
    x.iter().map(|v| v.clamp(-bound, bound)).collect()
}

/// Project the coordinates of `x` in `support` onto the simplex of that
/// face and zero the rest.
pub fn project_face(x: &[f64], support: &[usize]) -> Result<Vec<f64>> {
    if support.is_empty() {
        return Err(MvskError::Domain("face support must be nonempty".into()));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= x.len()) {
        return Err(MvskError::Domain(format!(
            "face index {bad} out of range for n = {}",
            x.len()
        )));
    }
    Ok(lift_face(x, support))
}

fn lift_face(x: &[f64], support: &[usize]) -> Vec<f64> {
    let theta = simplex_threshold(support.iter().map(|&i| x[i]));
    let mut y = vec![0.0; x.len()];
    for &i in support {
        y[i] = (x[i] - theta).max(0.0);
    }
    y
}
