//! ZX strength of a cross-resonance drive on the control qubit.
//!
//! The reported `omega_ZX` is `H[00][01] - H[10][11]` of the block-diagonal
//! frame, the difference of the target-flip amplitudes conditioned on the
//! control state. This is the normalization of the closed form below; the
//! coefficient of `Z (x) X / 2` in the computational block.

use serde::Serialize;

use super::nonresonant;
use crate::cqed::{cr_driven_frame, CqedParams, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{commutator, label_to_index, Matrix};
use crate::npad::{npad_block, npad_targeted, NpadConfig};
use crate::rswt::build_generator;
use crate::scalar::{Scalar, C64};

/// Drive couplings rotated away, as `(p, q)` label pairs with the control
/// qubit first.
pub const CR_DRIVE_TARGETS: [([usize; 2], [usize; 2]); 4] = [
    ([0, 0], [1, 0]),
    ([0, 1], [1, 1]),
    ([1, 0], [2, 0]),
    ([1, 1], [2, 1]),
];

/// Closed form after four rotations on the drive terms, with
/// `theta1 = atan(Omega / Delta_-)` and
/// `theta2 = atan(sqrt(2) Omega / (2 Delta_- + alpha1))`.
pub fn omega_zx_analytical(g: f64, drive: f64, detuning: f64, alpha1: f64) -> Result<f64> {
    nonresonant("Delta_-", detuning)?;
    nonresonant("2 Delta_- + alpha_1", 2.0 * detuning + alpha1)?;
    nonresonant("Delta_- + alpha_1", detuning + alpha1)?;
    let t1 = (drive / detuning).atan();
    let t2 = (2f64.sqrt() * drive / (2.0 * detuning + alpha1)).atan();
    let (s1, c1) = (t1 / 2.0).sin_cos();
    let (s2, c2) = (t2 / 2.0).sin_cos();
    let (d, a) = (detuning, alpha1);
    let bracket = (s1 * s1 * c2 * c2 - c1 * c1) / (2.0 * d) - s2 * s2 / (d + a)
        + ((s1 * s1 - c1 * c1 * c2 * c2) * (a - d) - 2f64.sqrt() * a * s1 * s2 * c2) / (2.0 * d * (d + a));
    Ok(g * drive * bracket)
}

/// Weak-drive limit of [`omega_zx_analytical`], `-g Omega alpha1 / (Delta_- (Delta_- + alpha1))`.
pub fn omega_zx_small_drive(g: f64, drive: f64, detuning: f64, alpha1: f64) -> Result<f64> {
    nonresonant("Delta_-", detuning)?;
    nonresonant("Delta_- + alpha_1", detuning + alpha1)?;
    Ok(-g * drive * alpha1 / (detuning * (detuning + alpha1)))
}

fn computational_indices(dims: &[usize]) -> Result<[usize; 4]> {
    Ok([
        label_to_index(&[0, 0], dims)?,
        label_to_index(&[0, 1], dims)?,
        label_to_index(&[1, 0], dims)?,
        label_to_index(&[1, 1], dims)?,
    ])
}

fn zx_entry<T: Scalar>(h: &Matrix<T>, idx: &[usize; 4]) -> T {
    (h.get(idx[0], idx[1]).clone() - h.get(idx[2], idx[3]).clone()).re()
}

/// Numerical block diagonalization with blocks `{00, 01}`, `{10, 11}` and
/// the leakage levels, rotated to an inter-block norm of `tolerance`.
pub fn omega_zx_numeric(p: &CqedParams, tolerance: f64) -> Result<f64> {
    p.validate()?;
    let dims = p.levels.resolve(2)?;
    let h = cr_driven_frame(&p.model::<C64>(), &dims)?;
    let idx = computational_indices(&dims)?;
    let rest: Vec<usize> = (0..h.dim()).filter(|i| !idx.contains(i)).collect();
    let partition = vec![vec![idx[0], idx[1]], vec![idx[2], idx[3]], rest];
    let cfg = NpadConfig {
        max_rotations: crate::npad::DEFAULT_BLOCK_MAX_ROTATIONS,
        ..NpadConfig::with_tolerance(tolerance)
    };
    let res = npad_block(&h, &partition, &cfg)?;
    if !res.converged {
        return Err(Error::NoConvergence {
            sweeps: res.rotations.len(),
            residual: res.block_history.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(zx_entry(&res.h_final, &idx).re)
}

/// The rotation pipeline over any scalar: a leading-order Schrieffer-Wolff
/// step on the static exchange coupling (keeping terms through first order
/// in `g` times the drive), then the four grouped drive rotations of
/// [`CR_DRIVE_TARGETS`].
pub fn omega_zx_pipeline<T: Scalar>(p: &ModelParams<T>, levels: &[usize]) -> Result<T> {
    let h = cr_driven_frame(p, levels)?;
    let idle = ModelParams {
        drive: T::zero(),
        ..p.clone()
    };
    let h_static = cr_driven_frame(&idle, levels)?;
    let drive = h.sub(&h_static)?.offdiagonal_part();
    let exchange = h_static.offdiagonal_part();
    let s = build_generator(&h_static, None)?.s;
    let frame = h_static
        .diagonal_part()
        .add(&drive)?
        .add(&commutator(&s, &exchange)?.scale_f64(0.5))?
        .add(&commutator(&s, &drive)?)?;
    let targets = CR_DRIVE_TARGETS
        .iter()
        .map(|(a, b)| Ok((label_to_index(a, levels)?, label_to_index(b, levels)?)))
        .collect::<Result<Vec<_>>>()?;
    let rotated = npad_targeted(&frame, &[targets], true)?.h_final;
    Ok(zx_entry(&rotated, &computational_indices(levels)?))
}

/// One drive amplitude of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrPoint {
    pub drive: f64,
    pub analytical: f64,
    pub numeric: f64,
    pub pipeline: f64,
    pub small_drive: f64,
}

/// Evaluates the estimates at drive amplitude `drive`, with `g = g1` as
/// the exchange coupling and `Delta_- = omega1 - omega2`.
pub fn cr_point(p: &CqedParams, drive: f64, tolerance: f64) -> Result<CrPoint> {
    let q = CqedParams { drive, ..p.clone() };
    let detuning = q.omega1 - q.omega2;
    let dims = q.levels.resolve(2)?;
    Ok(CrPoint {
        drive,
        analytical: omega_zx_analytical(q.g1, drive, detuning, q.alpha1)?,
        numeric: omega_zx_numeric(&q, tolerance)?,
        pipeline: omega_zx_pipeline(&q.model::<C64>(), &dims)?.re,
        small_drive: omega_zx_small_drive(q.g1, drive, detuning, q.alpha1)?,
    })
}
