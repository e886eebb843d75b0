//! Empirical moment model: mean vector, covariance, coskewness and cokurtosis.
//!
//! Tensors are stored fully materialized in row-major order. The coskewness
//! entry for `(i, j, k)` lives at `(i * n + j) * n + k`, i.e. the `n² x n`
//! matrix with row `(i, j)` and column `k`. The cokurtosis entry for
//! `(i, j, k, l)` lives at `((i * n + j) * n + k) * n + l`, the `n² x n²`
//! matrix with row `(i, j)` and column `(k, l)`.

use serde::{Deserialize, Serialize};

use crate::error::{MvskError, Result};
use crate::returns::{Bounds, DomainKind, ReturnsMatrix};

/// Largest asset count for which the cokurtosis tensor is materialized.
pub const MAX_ASSETS: usize = 64;

const LAYOUT: &str = "row-major; covariance[i][j]; coskewness_flat[(i*n+j)*n+k]; \
cokurtosis_flat[((i*n+j)*n+k)*n+l]; centered_returns[i][p] is asset i at sample p";

/// Simplex bounds and unit-cube bounds of the centered data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelBounds {
    pub simplex: Bounds,
    /// Bounds for the cube `[-1, 1]^n`; scale linearly for other half-widths.
    pub cube_unit: Bounds,
}

impl ModelBounds {
    pub fn for_domain(&self, kind: DomainKind) -> Bounds {
        match kind {
            DomainKind::Simplex => self.simplex,
            DomainKind::Cube { bound } => Bounds {
                lower: self.cube_unit.lower * bound,
                upper: self.cube_unit.upper * bound,
            },
        }
    }
}

/// The tuple `(M, V, S, K)` plus, when built from data, the centered samples.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentModel {
    n: usize,
    m: usize,
    labels: Vec<String>,
    mean: Vec<f64>,
    covariance: Vec<f64>,
    coskewness: Vec<f64>,
    cokurtosis: Vec<f64>,
    centered: Option<Vec<f64>>,
    bounds: Option<ModelBounds>,
}

/// Estimate the moment model from raw returns.
///
/// The covariance uses the unbiased `1/(m-1)` divisor; the third and fourth
/// order tensors use `1/m`.
pub fn build_moment_model(raw: &ReturnsMatrix) -> Result<MomentModel> {
    if raw.is_centralized() {
        return Err(MvskError::Domain(
            "moment estimation expects raw (non-centralized) returns".into(),
        ));
    }
    let (n, m) = (raw.n(), raw.m());
    if m < 2 {
        return Err(MvskError::InsufficientSamples { found: m });
    }
    if n > MAX_ASSETS {
        return Err(MvskError::TooManyAssets {
            found: n,
            max: MAX_ASSETS,
        });
    }
    let mean = raw.means();
    let t = raw.centralize();
    let bounds = ModelBounds {
        simplex: t.domain_bounds(DomainKind::Simplex)?,
        cube_unit: t.domain_bounds(DomainKind::Cube { bound: 1.0 })?,
    };

    // pairwise products of rows, reused by every tensor
    let mut pair_index = vec![usize::MAX; n * n];
    let mut pairs: Vec<Vec<f64>> = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            pair_index[i * n + j] = pairs.len();
            pair_index[j * n + i] = pairs.len();
            pairs.push(t.row(i).iter().zip(t.row(j)).map(|(a, b)| a * b).collect());
        }
    }
    let pair = |i: usize, j: usize| &pairs[pair_index[i * n + j]];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut covariance = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = pair(i, j).iter().sum::<f64>() / (m - 1) as f64;
            covariance[i * n + j] = v;
            covariance[j * n + i] = v;
        }
    }

    let mut coskewness = vec![0.0; n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let v = dot(pair(i, j), t.row(k)) / m as f64;
                for [a, b, c] in permutations3([i, j, k]) {
                    coskewness[(a * n + b) * n + c] = v;
                }
            }
        }
    }

    let mut cokurtosis = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                for l in k..n {
                    let v = dot(pair(i, j), pair(k, l)) / m as f64;
                    for [a, b, c, d] in permutations4([i, j, k, l]) {
                        cokurtosis[((a * n + b) * n + c) * n + d] = v;
                    }
                }
            }
        }
    }

    Ok(MomentModel {
        n,
        m,
        labels: raw.labels().to_vec(),
        mean,
        covariance,
        coskewness,
        cokurtosis,
        centered: Some(t.values().to_vec()),
        bounds: Some(bounds),
    })
}

fn permutations3([a, b, c]: [usize; 3]) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

fn permutations4(idx: [usize; 4]) -> impl Iterator<Item = [usize; 4]> {
    (0..4).flat_map(move |first| {
        let rest: Vec<usize> = (0..4).filter(|&x| x != first).map(|x| idx[x]).collect();
        permutations3([rest[0], rest[1], rest[2]])
            .into_iter()
            .map(move |[b, c, d]| [idx[first], b, c, d])
    })
}

impl MomentModel {
    /// Assemble a model directly from tensors. No samples are attached, so
    /// objectives are evaluated by tensor contraction and bounds are unknown.
    pub fn from_tensors(
        mean: Vec<f64>,
        covariance: Vec<f64>,
        coskewness: Vec<f64>,
        cokurtosis: Vec<f64>,
    ) -> Result<Self> {
        let n = mean.len();
        check_len(covariance.len(), n * n)?;
        check_len(coskewness.len(), n * n * n)?;
        check_len(cokurtosis.len(), n * n * n * n)?;
        if n == 0 {
            return Err(MvskError::Dimension { expected: 1, found: 0 });
        }
        if n > MAX_ASSETS {
            return Err(MvskError::TooManyAssets {
                found: n,
                max: MAX_ASSETS,
            });
        }
        Ok(Self {
            n,
            m: 0,
            labels: (0..n).map(|i| format!("asset{i}")).collect(),
            mean,
            covariance,
            coskewness,
            cokurtosis,
            centered: None,
            bounds: None,
        })
    }

    /// Attach explicit convexity bounds (for models built from tensors).
    pub fn with_bounds(mut self, bounds: ModelBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sample count, 0 when assembled from tensors.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major `n x n`.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn coskewness(&self) -> &[f64] {
        &self.coskewness
    }

    pub fn cokurtosis(&self) -> &[f64] {
        &self.cokurtosis
    }

    /// Centered returns, row-major `n x m`, when the model was built from data.
    pub fn centered_returns(&self) -> Option<&[f64]> {
        self.centered.as_deref()
    }

    pub fn bounds(&self) -> Option<ModelBounds> {
        self.bounds
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.n + j]
    }

    pub fn skew(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coskewness[(i * self.n + j) * self.n + k]
    }

    pub fn kurt(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.cokurtosis[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// Serialize in the documented JSON export layout.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: MomentModelFile = serde_json::from_str(s)?;
        Self::from_file(file)
    }

    fn to_file(&self) -> MomentModelFile {
        let n = self.n;
        MomentModelFile {
            layout: LAYOUT.to_owned(),
            n,
            m: self.m,
            labels: self.labels.clone(),
            mean: self.mean.clone(),
            covariance: self.covariance.chunks(n).map(<[f64]>::to_vec).collect(),
            coskewness_flat: self.coskewness.clone(),
            cokurtosis_flat: self.cokurtosis.clone(),
            bounds: self.bounds,
            centered_returns: self
                .centered
                .as_ref()
                .map(|c| c.chunks(self.m).map(<[f64]>::to_vec).collect()),
        }
    }

    fn from_file(f: MomentModelFile) -> Result<Self> {
        let n = f.n;
        check_len(f.labels.len(), n)?;
        check_len(f.covariance.len(), n)?;
        for row in &f.covariance {
            check_len(row.len(), n)?;
        }
        let mut model = Self::from_tensors(f.mean, f.covariance.concat(), f.coskewness_flat, f.cokurtosis_flat)?;
        model.m = f.m;
        model.labels = f.labels;
        model.bounds = f.bounds;
        if let Some(rows) = f.centered_returns {
            check_len(rows.len(), n)?;
            for row in &rows {
                check_len(row.len(), f.m)?;
            }
            model.centered = Some(rows.concat());
        }
        model.check_symmetry()?;
        Ok(model)
    }

    /// Verify covariance symmetry and full permutation symmetry of the
    /// higher-order tensors, relative to their largest entry.
    pub fn check_symmetry(&self) -> Result<()> {
        let n = self.n;
        let scale = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let tol_v = 1e-12 * scale(&self.covariance);
        for i in 0..n {
            for j in 0..i {
                if (self.cov(i, j) - self.cov(j, i)).abs() > tol_v {
                    return Err(MvskError::InvalidModel(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let tol_s = 1e-12 * scale(&self.coskewness);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.skew(i, j, k);
                    if permutations3([i, j, k])
                        .iter()
                        .any(|&[a, b, c]| (self.skew(a, b, c) - v).abs() > tol_s)
                    {
                        return Err(MvskError::InvalidModel(format!(
                            "coskewness not symmetric at ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        let tol_k = 1e-12 * scale(&self.cokurtosis);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.kurt(i, j, k, l);
                        // adjacent transpositions generate the symmetric group
                        let swaps = [self.kurt(j, i, k, l), self.kurt(i, k, j, l), self.kurt(i, j, l, k)];
                        if swaps.iter().any(|s| (s - v).abs() > tol_k) {
                            return Err(MvskError::InvalidModel(format!(
                                "cokurtosis not symmetric at ({i}, {j}, {k}, {l})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(MvskError::Dimension { expected, found })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MomentModelFile {
    layout: String,
    n: usize,
    m: usize,
    labels: Vec<String>,
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    coskewness_flat: Vec<f64>,
    cokurtosis_flat: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<ModelBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centered_returns: Option<Vec<Vec<f64>>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_asset_two_samples() {
        let raw = ReturnsMatrix::from_rows(&[vec![1.0, 3.0]]).unwrap();
        let model = build_moment_model(&raw).unwrap();
        assert_eq!(model.mean(), &[2.0]);
        assert_eq!(model.covariance(), &[2.0]);
        assert_eq!(model.coskewness(), &[0.0]);
        assert_eq!(model.cokurtosis(), &[1.0]);
        assert_eq!(model.centered_returns().unwrap(), &[-1.0, 1.0]);
    }

    #[test]
    fn constant_row_contributes_nothing() {
        let raw = ReturnsMatrix::from_rows(&[vec![0.3, -0.1, 0.7, 0.2], vec![0.05, 0.05, 0.05, 0.05]]).unwrap();
        let model = build_moment_model(&raw).unwrap();
        assert!((model.mean()[1] - 0.05).abs() < 1e-15);
        let n = 2;
        for a in 0..n {
            assert_eq!(model.cov(1, a), 0.0);
            for b in 0..n {
                assert_eq!(model.skew(1, a, b), 0.0);
                assert_eq!(model.skew(a, b, 1), 0.0);
                for c in 0..n {
                    assert_eq!(model.kurt(a, 1, b, c), 0.0);
                    assert_eq!(model.kurt(a, b, c, 1), 0.0);
                }
            }
        }
    }

    #[test]
    fn centralized_input_is_rejected() {
        let raw = ReturnsMatrix::from_rows(&[vec![1.0, 3.0]]).unwrap().centralize();
        assert!(build_moment_model(&raw).is_err());
    }

    #[test]
    fn json_round_trip() {
        let raw = ReturnsMatrix::from_rows(&[vec![0.1, -0.2, 0.4], vec![0.0, 0.3, -0.1]]).unwrap();
        let model = build_moment_model(&raw).unwrap();
        let back = MomentModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn asymmetric_covariance_is_rejected_on_import() {
        let model =
            MomentModel::from_tensors(vec![0.0, 0.0], vec![1.0, 0.5, 0.4, 1.0], vec![0.0; 8], vec![0.0; 16]).unwrap();
        assert!(model.check_symmetry().is_err());
    }

    #[test]
    fn too_many_assets() {
        let rows = vec![vec![0.0, 1.0]; MAX_ASSETS + 1];
        let raw = ReturnsMatrix::from_rows(&rows).unwrap();
        assert!(matches!(build_moment_model(&raw), Err(MvskError::TooManyAssets { .. })));
    }
}
