//! The four MVSK objectives, the scalarization `F_λ`, its gradient and Hessian.
//!
//! When a model carries its centered samples, the third and fourth order
//! forms are evaluated through `z_p = <T[:, p], w>` in `O(n m)`; otherwise
//! through contraction of the stored tensors in `O(n^4)`. Both routes are
//! public so they can be checked against each other.

use serde::{Deserialize, Serialize};

use crate::error::{MvskError, Result};
use crate::moments::MomentModel;

/// Hyper-parameter `λ = (λ₁, λ₂, λ₃, λ₄)` on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct LambdaPoint([f64; 4]);

impl LambdaPoint {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(lambda: [f64; 4]) -> Result<Self> {
        if lambda.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(MvskError::Domain(format!(
                "lambda entries must be finite and nonnegative: {lambda:?}"
            )));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(MvskError::Domain(format!("lambda must sum to 1, got {sum}")));
        }
        Ok(Self(lambda))
    }

    /// Scale a nonnegative, nonzero weight vector onto the simplex. The
    /// minimizers of `F_λ` are unchanged by positive scaling.
    pub fn normalized(raw: [f64; 4]) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if sum.is_nan() || sum <= 0.0 || raw.iter().any(|x| *x < 0.0) {
            return Err(MvskError::Domain(format!("cannot normalize lambda {raw:?}")));
        }
        Self::new(raw.map(|x| x / sum)).or_else(|_| {
            // rounding can leave the sum a few ulps away from 1
            let mut v = raw.map(|x| x / sum);
            let rest: f64 = v[1..].iter().sum();
            v[0] = (1.0 - rest).max(0.0);
            Self::new(v)
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn mean_weight(&self) -> f64 {
        self.0[0]
    }

    pub fn variance_weight(&self) -> f64 {
        self.0[1]
    }

    pub fn skewness_weight(&self) -> f64 {
        self.0[2]
    }

    pub fn kurtosis_weight(&self) -> f64 {
        self.0[3]
    }

    /// True when every entry is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }
}

impl TryFrom<[f64; 4]> for LambdaPoint {
    type Error = MvskError;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LambdaPoint> for [f64; 4] {
    fn from(l: LambdaPoint) -> Self {
        l.0
    }
}

/// `(f₁, f₂, f₃, f₄)`: mean, variance, skewness and kurtosis of a portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveValues {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

impl ObjectiveValues {
    pub fn as_array(&self) -> [f64; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }

    /// `-c₁f₁ + c₂f₂ - c₃f₃ + c₄f₄` for arbitrary coefficients.
    pub fn scalarize(&self, c: [f64; 4]) -> f64 {
        -c[0] * self.f1 + c[1] * self.f2 - c[2] * self.f3 + c[3] * self.f4
    }
}

/// `Ψ_λ(y) = 6λ₄y² - 3λ₃y + λ₂`.
pub fn psi(lambda: &LambdaPoint, y: f64) -> f64 {
    let [_, l2, l3, l4] = lambda.as_array();
    6.0 * l4 * y * y - 3.0 * l3 * y + l2
}

fn check_dim(model: &MomentModel, w: &[f64]) -> Result<()> {
    if w.len() == model.n() {
        Ok(())
    } else {
        Err(MvskError::Dimension {
            expected: model.n(),
            found: w.len(),
        })
    }
}

pub fn eval_objectives(model: &MomentModel, w: &[f64]) -> Result<ObjectiveValues> {
    check_dim(model, w)?;
    let mut scratch = Vec::new();
    Ok(Evaluator::new(model).objectives(w, &mut scratch))
}

/// Objectives by tensor contraction regardless of attached samples.
pub fn eval_objectives_tensor(model: &MomentModel, w: &[f64]) -> Result<ObjectiveValues> {
    check_dim(model, w)?;
    let (f3, f4) = tensor_forms(model, w);
    Ok(ObjectiveValues {
        f1: dot(model.mean(), w),
        f2: quad_form(model, w),
        f3,
        f4,
    })
}

pub fn eval_scalarized(model: &MomentModel, lambda: &LambdaPoint, w: &[f64]) -> Result<f64> {
    check_dim(model, w)?;
    let mut scratch = Vec::new();
    Ok(Evaluator::new(model).value(lambda, w, &mut scratch))
}

pub fn gradient(model: &MomentModel, lambda: &LambdaPoint, w: &[f64]) -> Result<Vec<f64>> {
    check_dim(model, w)?;
    let mut grad = vec![0.0; w.len()];
    let mut scratch = Vec::new();
    Evaluator::new(model).value_and_gradient(lambda, w, &mut grad, &mut scratch);
    Ok(grad)
}

/// Gradient by tensor contraction regardless of attached samples.
pub fn gradient_tensor(model: &MomentModel, lambda: &LambdaPoint, w: &[f64]) -> Result<Vec<f64>> {
    check_dim(model, w)?;
    let n = model.n();
    let [l1, l2, l3, l4] = lambda.as_array();
    let vw = mat_vec(model.covariance(), w);
    let s_ww = contract_tail(model.coskewness(), w, 2);
    let k_www = contract_tail(model.cokurtosis(), w, 3);
    Ok((0..n)
        .map(|i| -l1 * model.mean()[i] + 2.0 * l2 * vw[i] - 3.0 * l3 * s_ww[i] + 4.0 * l4 * k_www[i])
        .collect())
}

/// `2λ₂V - 6λ₃ S(w) + 12λ₄ K(w, w)`, from the stored tensors. Row-major `n x n`.
pub fn hessian(model: &MomentModel, lambda: &LambdaPoint, w: &[f64]) -> Result<Vec<f64>> {
    check_dim(model, w)?;
    let [_, l2, l3, l4] = lambda.as_array();
    let s_w = contract_tail(model.coskewness(), w, 1);
    let k_ww = contract_tail(model.cokurtosis(), w, 2);
    Ok(model
        .covariance()
        .iter()
        .zip(s_w.iter().zip(&k_ww))
        .map(|(v, (s, k))| 2.0 * l2 * v - 6.0 * l3 * s + 12.0 * l4 * k)
        .collect())
}

/// Evaluates `F_λ` and its gradient for one model, reusing a scratch buffer.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    model: &'a MomentModel,
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a MomentModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &'a MomentModel {
        self.model
    }

    /// Fill `z[p] = <T[:, p], w>`; skips zero weights.
    fn projections(samples: &[f64], m: usize, w: &[f64], z: &mut Vec<f64>) {
        z.clear();
        z.resize(m, 0.0);
        for (row, &wi) in samples.chunks_exact(m).zip(w) {
            if wi != 0.0 {
                for (zp, t) in z.iter_mut().zip(row) {
                    *zp += wi * t;
                }
            }
        }
    }

    fn higher_forms(&self, w: &[f64], scratch: &mut Vec<f64>) -> (f64, f64) {
        match self.model.centered_returns() {
            Some(samples) => {
                let m = self.model.m();
                Self::projections(samples, m, w, scratch);
                let (mut s3, mut s4) = (0.0, 0.0);
                for &z in scratch.iter() {
                    let z2 = z * z;
                    s3 += z2 * z;
                    s4 += z2 * z2;
                }
                (s3 / m as f64, s4 / m as f64)
            }
            None => tensor_forms(self.model, w),
        }
    }

    pub fn objectives(&self, w: &[f64], scratch: &mut Vec<f64>) -> ObjectiveValues {
        let (f3, f4) = self.higher_forms(w, scratch);
        ObjectiveValues {
            f1: dot(self.model.mean(), w),
            f2: quad_form(self.model, w),
            f3,
            f4,
        }
    }

    pub fn value(&self, lambda: &LambdaPoint, w: &[f64], scratch: &mut Vec<f64>) -> f64 {
        self.objectives(w, scratch).scalarize(lambda.as_array())
    }

    /// Write `∇F_λ(w)` into `grad` and return `F_λ(w)`.
    pub fn value_and_gradient(&self, lambda: &LambdaPoint, w: &[f64], grad: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
        let model = self.model;
        let n = model.n();
        let [l1, l2, l3, l4] = lambda.as_array();
        let vw = mat_vec(model.covariance(), w);
        for i in 0..n {
            grad[i] = -l1 * model.mean()[i] + 2.0 * l2 * vw[i];
        }
        let f1 = dot(model.mean(), w);
        let f2 = dot(&vw, w);
        let (f3, f4) = match model.centered_returns() {
            Some(samples) => {
                let m = model.m();
                let inv_m = 1.0 / m as f64;
                Self::projections(samples, m, w, scratch);
                let (mut s3, mut s4) = (0.0, 0.0);
                for z in scratch.iter_mut() {
                    let z2 = *z * *z;
                    s3 += z2 * *z;
                    s4 += z2 * z2;
                    // reuse the buffer for the per-sample gradient weight
                    *z = (-3.0 * l3 * z2 + 4.0 * l4 * z2 * *z) * inv_m;
                }
                for (g, row) in grad.iter_mut().zip(samples.chunks_exact(m)) {
                    *g += dot(row, scratch);
                }
                (s3 * inv_m, s4 * inv_m)
            }
            None => {
                let s_ww = contract_tail(model.coskewness(), w, 2);
                let k_www = contract_tail(model.cokurtosis(), w, 3);
                for i in 0..n {
                    grad[i] += -3.0 * l3 * s_ww[i] + 4.0 * l4 * k_www[i];
                }
                (dot(&s_ww, w), dot(&k_www, w))
            }
        };
        ObjectiveValues { f1, f2, f3, f4 }.scalarize(lambda.as_array())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(a: &[f64], x: &[f64]) -> Vec<f64> {
    a.chunks_exact(x.len()).map(|row| dot(row, x)).collect()
}

fn quad_form(model: &MomentModel, w: &[f64]) -> f64 {
    dot(&mat_vec(model.covariance(), w), w)
}

/// Contract the trailing `times` indices of a flattened symmetric tensor with `w`.
fn contract_tail(tensor: &[f64], w: &[f64], times: usize) -> Vec<f64> {
    let mut cur = mat_vec(tensor, w);
    for _ in 1..times {
        cur = mat_vec(&cur, w);
    }
    cur
}

fn tensor_forms(model: &MomentModel, w: &[f64]) -> (f64, f64) {
    let s_ww = contract_tail(model.coskewness(), w, 2);
    let k_www = contract_tail(model.cokurtosis(), w, 3);
    (dot(&s_ww, w), dot(&k_www, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::build_moment_model;
    use crate::returns::ReturnsMatrix;

    fn identity_model(n: usize) -> MomentModel {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        MomentModel::from_tensors(vec![0.0; n], v, vec![0.0; n * n * n], vec![0.0; n * n * n * n]).unwrap()
    }

    fn one_asset() -> MomentModel {
        build_moment_model(&ReturnsMatrix::from_rows(&[vec![1.0, 3.0]]).unwrap()).unwrap()
    }

    fn lam(v: [f64; 4]) -> LambdaPoint {
        LambdaPoint::new(v).unwrap()
    }

    #[test]
    fn unit_quadratic_objectives() {
        let f = eval_objectives(&identity_model(3), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.as_array(), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn one_asset_objectives() {
        let model = one_asset();
        let f = eval_objectives(&model, &[1.0]).unwrap();
        assert_eq!(f.as_array(), [2.0, 2.0, 0.0, 1.0]);
        assert_eq!(eval_objectives_tensor(&model, &[1.0]).unwrap(), f);
        let v = eval_scalarized(&model, &lam([0.25; 4]), &[1.0]).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn origin_is_zero() {
        let raw = ReturnsMatrix::from_rows(&[vec![0.1, -0.3, 0.2], vec![0.4, 0.0, -0.5]]).unwrap();
        let model = build_moment_model(&raw).unwrap();
        let f = eval_objectives(&model, &[0.0, 0.0]).unwrap();
        assert_eq!(f.as_array(), [0.0; 4]);
    }

    #[test]
    fn single_term_scalarizations() {
        let model = identity_model(2);
        assert_eq!(
            eval_scalarized(&model, &lam([0.0, 1.0, 0.0, 0.0]), &[1.0, 0.0]).unwrap(),
            1.0
        );
        let raw = ReturnsMatrix::from_rows(&[vec![0.1, -0.3, 0.2], vec![0.4, 0.0, -0.5]]).unwrap();
        let model = build_moment_model(&raw).unwrap();
        let w = [0.3, 0.7];
        let expected = -(model.mean()[0] * 0.3 + model.mean()[1] * 0.7);
        let v = eval_scalarized(&model, &lam([1.0, 0.0, 0.0, 0.0]), &w).unwrap();
        assert!((v - expected).abs() < 1e-15);
        let g = gradient(&model, &lam([1.0, 0.0, 0.0, 0.0]), &w).unwrap();
        for (gi, mi) in g.iter().zip(model.mean()) {
            assert_eq!(*gi, -mi);
        }
    }

    #[test]
    fn quadratic_gradient_and_hessian() {
        let model = identity_model(2);
        let l = lam([0.0, 1.0, 0.0, 0.0]);
        let g = gradient(&model, &l, &[0.3, 0.7]).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 1.4).abs() < 1e-15);
        assert_eq!(hessian(&model, &l, &[0.3, 0.7]).unwrap(), vec![2.0, 0.0, 0.0, 2.0]);
        let h = hessian(&model, &lam([1.0, 0.0, 0.0, 0.0]), &[0.3, 0.7]).unwrap();
        assert!(h.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&lam([0.0, 1.0, 0.0, 0.0]), 123.0), 1.0);
        assert_eq!(psi(&lam([0.0, 0.0, 1.0, 0.0]), 1.0), -3.0);
        let third = 1.0 / 3.0;
        let v = psi(&lam([0.0, third, third, 1.0 - 2.0 * third]), 0.5);
        assert!((v - third).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            eval_objectives(&identity_model(2), &[1.0]),
            Err(MvskError::Dimension { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn lambda_validation() {
        assert!(LambdaPoint::new([0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(LambdaPoint::new([-0.1, 0.6, 0.5, 0.0]).is_err());
        let l = LambdaPoint::normalized([1.0, 1.0, 1.0, 4.0]).unwrap();
        assert!((l.kurtosis_weight() - 4.0 / 7.0).abs() < 1e-15);
    }
}
