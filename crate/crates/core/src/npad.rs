//! Iterated Givens rotations: full diagonalization, fixed rotation recipes
//! (optionally grouped), and block diagonalization.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::givens::{apply_givens, apply_givens_unchecked, make_givens, GivensRotation, PivotSelector, PivotStrategy};
use crate::linalg::{offdiag_norm_sq, Matrix, MatrixJson};
use crate::scalar::{NumericScalar, Scalar};

pub const DEFAULT_MAX_ROTATIONS: usize = 10_000;
pub const DEFAULT_BLOCK_MAX_ROTATIONS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct NpadConfig {
    /// Stop once the square root of the targeted off-diagonal norm is at
    /// most this (an energy).
    pub tolerance: f64,
    pub max_rotations: usize,
    pub strategy: PivotStrategy,
}

impl Default for NpadConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_rotations: DEFAULT_MAX_ROTATIONS,
            strategy: PivotStrategy::Largest,
        }
    }
}

impl NpadConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidParams(format!("tolerance {} must be >= 0", self.tolerance)));
        }
        if self.max_rotations == 0 {
            return Err(Error::InvalidParams("max_rotations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NpadResult<T> {
    pub h_final: Matrix<T>,
    pub rotations: Vec<GivensRotation<T>>,
    /// `offdiag_norm_sq` before any rotation, then after each one (numeric
    /// scalars only).
    pub norm_history: Vec<f64>,
    /// Inter-block part of the norm, recorded by [`npad_block`] only.
    pub block_history: Vec<f64>,
    /// Value of each targeted entry right after its own rotation (or, in
    /// grouped mode, after its group), recorded by [`npad_targeted`].
    pub residuals: Vec<T>,
    pub converged: bool,
}

impl<T: Scalar> NpadResult<T> {
    fn start(h: &Matrix<T>) -> Self {
        Self {
            h_final: h.clone(),
            rotations: Vec::new(),
            norm_history: numeric_norm(h).into_iter().collect(),
            block_history: Vec::new(),
            residuals: Vec::new(),
            converged: false,
        }
    }

    fn record(&mut self) {
        if let Some(n) = numeric_norm(&self.h_final) {
            self.norm_history.push(n);
        }
    }
}

fn numeric_norm<T: Scalar>(h: &Matrix<T>) -> Option<f64> {
    let n = h.dim();
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                acc += h.get(j, k).value()?.norm_sqr();
            }
        }
    }
    Some(acc)
}

#[derive(Serialize)]
struct RotationJson {
    j: usize,
    k: usize,
    c: f64,
    s: f64,
    phi: f64,
}

#[derive(Serialize)]
struct ResultJson {
    h_final: MatrixJson,
    rotations: Vec<RotationJson>,
    norm_history: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    block_history: Vec<f64>,
    converged: bool,
}

impl<T: NumericScalar> NpadResult<T> {
    pub fn to_json(&self) -> String {
        let wire = ResultJson {
            h_final: MatrixJson::from(&self.h_final.to_c64()),
            rotations: self
                .rotations
                .iter()
                .map(|g| RotationJson {
                    j: g.j,
                    k: g.k,
                    c: g.c.real(),
                    s: g.s.real(),
                    phi: g.phi,
                })
                .collect(),
            norm_history: self.norm_history.clone(),
            block_history: self.block_history.clone(),
            converged: self.converged,
        };
        serde_json::to_string_pretty(&wire).expect("plain numbers serialize")
    }

    /// Final diagonal, ascending.
    pub fn sorted_diagonal(&self) -> Vec<f64> {
        let mut d = self.h_final.real_diagonal();
        d.sort_by(f64::total_cmp);
        d
    }
}

/// Rotates until the full off-diagonal norm is within tolerance.
pub fn npad_diagonalize<T: NumericScalar>(h: &Matrix<T>, cfg: &NpadConfig) -> Result<NpadResult<T>> {
    cfg.validate()?;
    run_pivoted(h, cfg, |_, _| true, false)
}

/// Rotates only inter-block pairs of `partition` until their norm is within
/// tolerance. Both the full and the inter-block norm are recorded; the latter
/// need not decrease monotonically.
pub fn npad_block<T: NumericScalar>(
    h: &Matrix<T>,
    partition: &[Vec<usize>],
    cfg: &NpadConfig,
) -> Result<NpadResult<T>> {
    cfg.validate()?;
    let block = block_index(partition, h.dim())?;
    run_pivoted(h, cfg, move |j, k| block[j] != block[k], true)
}

/// Block id of each basis index, validating that `partition` covers
/// `0..dim` disjointly.
pub fn block_index(partition: &[Vec<usize>], dim: usize) -> Result<Vec<usize>> {
    let mut block = vec![usize::MAX; dim];
    for (b, set) in partition.iter().enumerate() {
        for &i in set {
            if i >= dim || block[i] != usize::MAX {
                return Err(Error::BadPartition { dim });
            }
            block[i] = b;
        }
    }
    if block.contains(&usize::MAX) {
        return Err(Error::BadPartition { dim });
    }
    Ok(block)
}

fn run_pivoted<T: NumericScalar>(
    h: &Matrix<T>,
    cfg: &NpadConfig,
    allowed: impl Fn(usize, usize) -> bool,
    track_block: bool,
) -> Result<NpadResult<T>> {
    let mut out = NpadResult::start(h);
    let masked = |m: &Matrix<T>| -> f64 {
        let n = m.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k && allowed(j.min(k), j.max(k)) {
                    acc += m.get(j, k).modulus().powi(2);
                }
            }
        }
        acc
    };
    if track_block {
        out.block_history.push(masked(h));
    }
    let mut selector = PivotSelector::new(cfg.strategy.clone());
    loop {
        let target = masked(&out.h_final);
        if target.sqrt() <= cfg.tolerance {
            out.converged = true;
            break;
        }
        if out.rotations.len() >= cfg.max_rotations {
            break;
        }
        let Some((j, k)) = selector.next(&out.h_final, 0.0, &allowed) else {
            break;
        };
        let g = make_givens(&out.h_final, j, k)?;
        out.h_final = apply_givens(&out.h_final, &g)?;
        out.rotations.push(g);
        out.record();
        if track_block {
            out.block_history.push(masked(&out.h_final));
        }
    }
    if !out.converged {
        out.converged = masked(&out.h_final).sqrt() <= cfg.tolerance;
    }
    Ok(out)
}

/// Applies a fixed recipe of rotations, organized in groups.
///
/// With `grouped = false` every rotation is built from the matrix as it
/// stands just before it, so each targeted entry is zeroed exactly. With
/// `grouped = true` all rotations of a group are built from the group's
/// starting matrix and then applied one after another as separate unitaries.
pub fn npad_targeted<T: Scalar>(
    h: &Matrix<T>,
    groups: &[Vec<(usize, usize)>],
    grouped: bool,
) -> Result<NpadResult<T>> {
    let mut out = NpadResult::start(h);
    for group in groups {
        if grouped {
            let base = out.h_final.clone();
            let rotations = group
                .iter()
                .map(|&(j, k)| make_givens(&base, j, k))
                .collect::<Result<Vec<_>>>()?;
            for g in rotations {
                out.h_final = apply_givens_unchecked(&out.h_final, &g)?;
                out.rotations.push(g);
                out.record();
            }
            for &(j, k) in group {
                out.residuals.push(out.h_final.get(j, k).clone());
            }
        } else {
            for &(j, k) in group {
                let g = make_givens(&out.h_final, j, k)?;
                out.h_final = apply_givens(&out.h_final, &g)?;
                out.residuals.push(out.h_final.get(j, k).clone());
                out.rotations.push(g);
                out.record();
            }
        }
    }
    out.converged = true;
    Ok(out)
}

/// Eigenvalues by rotating to convergence in the scalar's own precision,
/// ascending. Used with double-double scalars where f64 eigenvalues are not
/// accurate enough.
pub fn npad_eigenvalues<T: NumericScalar>(h: &Matrix<T>, tolerance: f64) -> Result<Vec<T>> {
    let cfg = NpadConfig {
        tolerance,
        max_rotations: 200 * h.dim() * h.dim(),
        strategy: PivotStrategy::Cyclic,
    };
    let res = npad_diagonalize(h, &cfg)?;
    if !res.converged {
        return Err(Error::NoConvergence {
            sweeps: res.rotations.len(),
            residual: offdiag_norm_sq(&res.h_final).sqrt(),
        });
    }
    let mut d = res.h_final.diagonal();
    d.sort_by(|a, b| a.real().total_cmp(&b.real()));
    Ok(d)
}
