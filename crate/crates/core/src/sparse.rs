//! Support-constrained solving by decomposition into restricted sub-problems.
//!
//! A support-constrained minimum equals the minimum, over all maximal
//! admissible supports `U`, of `F_λ` restricted to the face (or cube slice)
//! on `U`. Each sub-problem has a convex feasible set and is warm-started
//! from the projection of the dense optimizer onto it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MvskError, Result};
use crate::moments::MomentModel;
use crate::objective::LambdaPoint;
use crate::projection::Domain;
use crate::solver::{solve, support_of, SolveResult, SolverOptions};

/// Largest ground set for which forbidden-pair supports are enumerated.
pub const MAX_PAIR_GROUND: usize = 20;

/// Upper limit on the number of sub-problems a single call may create.
pub const MAX_CANDIDATES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseOptions {
    /// Maximum support size `k`.
    pub max_support: usize,
    /// Only consider supports inside the support of the dense optimizer.
    pub use_support_heuristic: bool,
    /// Keep only this many candidates closest to the dense optimizer;
    /// `None` keeps all of them.
    pub proximity_count: Option<usize>,
    /// Pairs of assets that may not both be held.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden_pairs: Vec<(usize, usize)>,
}

impl SparseOptions {
    /// Both pruning heuristics on, keeping the `n` closest candidates.
    pub fn new(max_support: usize, n: usize) -> Self {
        Self {
            max_support,
            use_support_heuristic: true,
            proximity_count: Some(n),
            forbidden_pairs: Vec::new(),
        }
    }

    /// No pruning: every admissible support is solved.
    pub fn exhaustive(max_support: usize) -> Self {
        Self {
            max_support,
            use_support_heuristic: false,
            proximity_count: None,
            forbidden_pairs: Vec::new(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.max_support == 0 || self.max_support > n {
            return Err(MvskError::Domain(format!(
                "max support {} must lie in 1..={n}",
                self.max_support
            )));
        }
        if self.proximity_count == Some(0) {
            return Err(MvskError::Domain("proximity count must be positive".into()));
        }
        if let Some(&(a, b)) = self.forbidden_pairs.iter().find(|(a, b)| *a >= n || *b >= n || a == b) {
            return Err(MvskError::Domain(format!("invalid forbidden pair ({a}, {b})")));
        }
        Ok(())
    }

    /// Whether a support satisfies the size bound and avoids every forbidden pair.
    pub fn admits(&self, support: &[usize]) -> bool {
        support.len() <= self.max_support
            && !self
                .forbidden_pairs
                .iter()
                .any(|(a, b)| support.contains(a) && support.contains(b))
    }
}

/// All `k`-element subsets of `items`, in lexicographic order.
pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..=items.len() - need {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= items.len() {
        rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Maximal subsets of `ground` that have at most `max_support` elements and
/// contain no forbidden pair.
pub fn maximal_supports(ground: &[usize], opts: &SparseOptions) -> Result<Vec<Vec<usize>>> {
    let k = opts.max_support;
    if opts.forbidden_pairs.is_empty() {
        if ground.len() <= k {
            return Ok(vec![ground.to_vec()]);
        }
        if binomial(ground.len(), k) > MAX_CANDIDATES as f64 {
            return Err(MvskError::Domain(format!(
                "C({}, {k}) sub-problems exceeds the limit of {MAX_CANDIDATES}",
                ground.len()
            )));
        }
        return Ok(combinations(ground, k));
    }

    let g = ground.len();
    if g > MAX_PAIR_GROUND {
        return Err(MvskError::Domain(format!(
            "forbidden-pair supports are enumerated only for at most {MAX_PAIR_GROUND} assets, got {g}"
        )));
    }
    let mut conflict = vec![0u32; g];
    for &(a, b) in &opts.forbidden_pairs {
        if let (Some(pa), Some(pb)) = (ground.iter().position(|&x| x == a), ground.iter().position(|&x| x == b)) {
            conflict[pa] |= 1 << pb;
            conflict[pb] |= 1 << pa;
        }
    }
    let independent = |mask: u32| (0..g).all(|i| mask & (1 << i) == 0 || mask & conflict[i] == 0);
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << g) {
        let size = mask.count_ones() as usize;
        if size > k || !independent(mask) {
            continue;
        }
        let extendable = size < k && (0..g).any(|i| mask & (1 << i) == 0 && conflict[i] & mask == 0);
        if !extendable {
            out.push(
                (0..g)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| ground[i])
                    .collect::<Vec<_>>(),
            );
        }
    }
    out.sort();
    Ok(out)
}

/// The point of the restricted domain nearest to `w` (the warm start for
/// that sub-problem).
fn restricted_start(domain: &Domain, w: &[f64], support: &[usize]) -> Result<Vec<f64>> {
    Ok(domain.restricted(support.to_vec())?.project(w))
}

/// Candidate supports for the sparse problem, nearest-first.
///
/// When the dense optimizer already satisfies the constraint its support is
/// the only candidate.
pub fn enumerate_candidates(w_dense: &[f64], domain: &Domain, opts: &SparseOptions) -> Result<Vec<Vec<usize>>> {
    let n = w_dense.len();
    opts.validate(n)?;
    let support = support_of(w_dense);
    if opts.admits(&support) {
        return Ok(vec![support]);
    }
    let ground: Vec<usize> = if opts.use_support_heuristic {
        support
    } else {
        (0..n).collect()
    };
    let base = Domain {
        kind: domain.kind,
        support: None,
    };
    let mut scored = maximal_supports(&ground, opts)?
        .into_iter()
        .map(|u| {
            let start = restricted_start(&base, w_dense, &u)?;
            let dist = start
                .iter()
                .zip(w_dense)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok((dist, u))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    if let Some(limit) = opts.proximity_count {
        scored.truncate(limit);
    }
    Ok(scored.into_iter().map(|(_, u)| u).collect())
}

/// Solve the support-constrained problem on top of a dense solution for the
/// same `(model, λ, domain)`.
pub fn solve_sparse(
    model: &MomentModel,
    lambda: &LambdaPoint,
    domain: &Domain,
    opts: &SparseOptions,
    dense: &SolveResult,
    solver_opts: &SolverOptions,
) -> Result<SolveResult> {
    if dense.w.len() != model.n() {
        return Err(MvskError::Dimension {
            expected: model.n(),
            found: dense.w.len(),
        });
    }
    opts.validate(model.n())?;
    if opts.admits(&dense.support) {
        return Ok(dense.clone());
    }
    let base = Domain {
        kind: domain.kind,
        support: None,
    };
    let candidates = enumerate_candidates(&dense.w, &base, opts)?;
    let solved = candidates
        .par_iter()
        .map(|u| {
            let sub = base.restricted(u.clone())?;
            let start = sub.project(&dense.w);
            solve(model, lambda, &sub, solver_opts, Some(&start)).map(|r| (u, r))
        })
        .collect::<Result<Vec<_>>>()?;

    solved
        .into_iter()
        .reduce(|best, cur| {
            let better = cur.1.scalarized_value < best.1.scalarized_value
                || (cur.1.scalarized_value == best.1.scalarized_value && cur.0 < best.0);
            if better {
                cur
            } else {
                best
            }
        })
        .map(|(_, r)| r)
        .ok_or_else(|| MvskError::Domain("no admissible support".into()))
}
