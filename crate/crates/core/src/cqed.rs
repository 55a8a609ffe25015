//! Circuit-QED model Hamiltonians on truncated Fock spaces.
//!
//! Energies are plain numbers in GHz with hbar = 1; whether they are cyclic
//! or angular frequencies is the caller's convention (recorded in
//! [`CqedParams::convention`] for labeling only).
//!
//! Basis ordering is lexicographic: `(p, q)` for two directly coupled qubits
//! and `(l, p, q)` with the resonator first for the qubit-resonator-qubit
//! chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{label_to_index, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_LEVELS: usize = 4;

/// Truncation per subsystem, either one value for all or one per subsystem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Levels {
    Uniform(usize),
    PerSubsystem(Vec<usize>),
}

impl Default for Levels {
    fn default() -> Self {
        Levels::Uniform(DEFAULT_LEVELS)
    }
}

impl Levels {
    /// Levels for a model with `count` subsystems, each at least 2.
    pub fn resolve(&self, count: usize) -> Result<Vec<usize>> {
        let v = match self {
            Levels::Uniform(n) => vec![*n; count],
            Levels::PerSubsystem(v) if v.len() == count => v.clone(),
            Levels::PerSubsystem(v) => {
                return Err(Error::InvalidParams(format!(
                    "levels lists {} subsystems, model has {count}",
                    v.len()
                )))
            }
        };
        if let Some(bad) = v.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidParams(format!("truncation level {bad} < 2")));
        }
        Ok(v)
    }
}

/// Physical parameters as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqedParams {
    #[serde(default)]
    pub omega1: f64,
    #[serde(default)]
    pub omega2: f64,
    #[serde(default)]
    pub alpha1: f64,
    #[serde(default)]
    pub alpha2: f64,
    /// Qubit 1 to resonator coupling; also the direct qubit-qubit coupling
    /// of the two-qubit models.
    #[serde(default)]
    pub g1: f64,
    #[serde(default)]
    pub g2: f64,
    #[serde(default)]
    pub omega_r: f64,
    #[serde(default, rename = "Omega")]
    pub drive: f64,
    #[serde(default)]
    pub omega_d: f64,
    #[serde(default)]
    pub levels: Levels,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
}

impl Default for CqedParams {
    fn default() -> Self {
        Self {
            omega1: 0.0,
            omega2: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            g1: 0.0,
            g2: 0.0,
            omega_r: 0.0,
            drive: 0.0,
            omega_d: 0.0,
            levels: Levels::default(),
            convention: None,
        }
    }
}

impl CqedParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("g1", self.g1),
            ("g2", self.g2),
            ("omega_r", self.omega_r),
            ("Omega", self.drive),
            ("omega_d", self.omega_d),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    /// The same parameters in scalar form.
    pub fn model<T: Scalar>(&self) -> ModelParams<T> {
        ModelParams {
            omega1: T::from_f64(self.omega1),
            omega2: T::from_f64(self.omega2),
            alpha1: T::from_f64(self.alpha1),
            alpha2: T::from_f64(self.alpha2),
            g1: T::from_f64(self.g1),
            g2: T::from_f64(self.g2),
            omega_r: T::from_f64(self.omega_r),
            drive: T::from_f64(self.drive),
            omega_d: T::from_f64(self.omega_d),
        }
    }

    /// Every frequency-like parameter multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            omega1: self.omega1 * factor,
            omega2: self.omega2 * factor,
            alpha1: self.alpha1 * factor,
            alpha2: self.alpha2 * factor,
            g1: self.g1 * factor,
            g2: self.g2 * factor,
            omega_r: self.omega_r * factor,
            drive: self.drive * factor,
            omega_d: self.omega_d * factor,
            ..self.clone()
        }
    }
}

/// Model parameters over an arbitrary scalar.
#[derive(Clone, Debug)]
pub struct ModelParams<T> {
    pub omega1: T,
    pub omega2: T,
    pub alpha1: T,
    pub alpha2: T,
    pub g1: T,
    pub g2: T,
    pub omega_r: T,
    pub drive: T,
    pub omega_d: T,
}

impl ModelParams<Expr> {
    /// Every parameter a free symbol, named as in the config file.
    pub fn symbolic() -> Self {
        Self {
            omega1: Expr::param("omega1"),
            omega2: Expr::param("omega2"),
            alpha1: Expr::param("alpha1"),
            alpha2: Expr::param("alpha2"),
            g1: Expr::param("g1"),
            g2: Expr::param("g2"),
            omega_r: Expr::param("omega_r"),
            drive: Expr::param("Omega"),
            omega_d: Expr::param("omega_d"),
        }
    }
}

/// `omega n + (alpha / 2) n (n - 1)` for a fixed occupation `n`.
fn duffing_level<T: Scalar>(omega: &T, alpha: &T, n: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    let linear = omega.clone() * T::from_f64(n as f64);
    if n == 1 {
        linear
    } else {
        linear + alpha.clone() * T::from_f64((n * (n - 1)) as f64 / 2.0)
    }
}

fn coupling<T: Scalar>(g: &T, amplitude: f64) -> T {
    if amplitude == 1.0 {
        g.clone()
    } else {
        g.clone() * T::from_f64(amplitude)
    }
}

fn set_sym<T: Scalar>(h: &mut Matrix<T>, a: usize, b: usize, v: T) {
    h.set(b, a, v.conj());
    h.set(a, b, v);
}

/// Two Duffing oscillators with exchange coupling `g1`:
/// `sum_q [w_q n_q + a_q/2 n_q(n_q-1)] + g1 (b1 b2^dag + b1^dag b2)`.
pub fn duffing_two_qubit<T: Scalar>(p: &ModelParams<T>, levels: &[usize]) -> Result<Matrix<T>> {
    let dims = check_levels(levels, 2)?;
    let n = dims[0] * dims[1];
    let mut h = Matrix::zeros(n);
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            let i = label_to_index(&[a, b], &dims)?;
            let e = duffing_level(&p.omega1, &p.alpha1, a) + duffing_level(&p.omega2, &p.alpha2, b);
            h.set(i, i, e);
            if a + 1 < dims[0] && b >= 1 {
                // b1^dag b2 |a, b> = sqrt(a+1) sqrt(b) |a+1, b-1>
                let up = label_to_index(&[a + 1, b - 1], &dims)?;
                let amp = ((a + 1) as f64).sqrt() * (b as f64).sqrt();
                set_sym(&mut h, up, i, coupling(&p.g1, amp));
            }
        }
    }
    Ok(h)
}

/// The two-excitation subspace `(|20>, |11>, |02>)` with the level offset
/// removed.
pub fn three_level_cz<T: Scalar>(delta: T, big_delta: T, g1: T, g2: T) -> Matrix<T> {
    let z = T::zero;
    Matrix::from_rows(vec![
        vec![delta.clone(), g1.clone(), z()],
        vec![g1, -delta, g2.clone()],
        vec![z(), g2, -big_delta],
    ])
    .expect("3x3")
}

/// Diagonal parameters of [`three_level_cz`] for a Duffing pair:
/// `delta = (w1 - w2 + a1) / 2`, `Delta = 3 (w1 - w2) / 2 - a2 + a1 / 2`, and the
/// removed offset `(E20 + E11) / 2`.
pub fn cz_subspace_parameters<T: Scalar>(p: &ModelParams<T>) -> (T, T, T) {
    let half = T::from_f64(0.5);
    let detuning = p.omega1.clone() - p.omega2.clone();
    let delta = (detuning.clone() + p.alpha1.clone()) * half.clone();
    let big = detuning * T::from_f64(1.5) - p.alpha2.clone() + p.alpha1.clone() * half.clone();
    let e20 = p.omega1.clone() * T::from_f64(2.0) + p.alpha1.clone();
    let e11 = p.omega1.clone() + p.omega2.clone();
    (delta, big, (e20 + e11) * half)
}

/// Two Duffing qubits each exchange-coupled to a harmonic resonator, basis
/// `(l, p, q)`.
pub fn qubit_resonator_qubit<T: Scalar>(p: &ModelParams<T>, levels: &[usize]) -> Result<Matrix<T>> {
    let dims = check_levels(levels, 3)?;
    let n: usize = dims.iter().product();
    let mut h = Matrix::zeros(n);
    for l in 0..dims[0] {
        for a in 0..dims[1] {
            for b in 0..dims[2] {
                let i = label_to_index(&[l, a, b], &dims)?;
                let e = duffing_level(&p.omega_r, &T::zero(), l)
                    + duffing_level(&p.omega1, &p.alpha1, a)
                    + duffing_level(&p.omega2, &p.alpha2, b);
                h.set(i, i, e);
                if l + 1 < dims[0] {
                    let photon = ((l + 1) as f64).sqrt();
                    if a >= 1 {
                        let j = label_to_index(&[l + 1, a - 1, b], &dims)?;
                        set_sym(&mut h, j, i, coupling(&p.g1, photon * (a as f64).sqrt()));
                    }
                    if b >= 1 {
                        let j = label_to_index(&[l + 1, a, b - 1], &dims)?;
                        set_sym(&mut h, j, i, coupling(&p.g2, photon * (b as f64).sqrt()));
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Cross-resonance frame: the Duffing pair plus a drive `Omega/2 (b1 + b1^dag)`
/// on qubit 1, minus `omega_d (n1 + n2)`.
pub fn cr_driven_frame<T: Scalar>(p: &ModelParams<T>, levels: &[usize]) -> Result<Matrix<T>> {
    let dims = check_levels(levels, 2)?;
    if dims[0] < 3 {
        return Err(Error::InvalidParams("the driven qubit needs at least 3 levels".into()));
    }
    let mut h = duffing_two_qubit(p, &dims)?;
    let half_drive = p.drive.clone() * T::from_f64(0.5);
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            let i = label_to_index(&[a, b], &dims)?;
            let frame = p.omega_d.clone() * T::from_f64((a + b) as f64);
            let shifted = h.get(i, i).clone() - frame;
            h.set(i, i, shifted);
            if a + 1 < dims[0] && !half_drive.is_zero() {
                let j = label_to_index(&[a + 1, b], &dims)?;
                set_sym(&mut h, j, i, coupling(&half_drive, ((a + 1) as f64).sqrt()));
            }
        }
    }
    Ok(h)
}

fn check_levels(levels: &[usize], count: usize) -> Result<Vec<usize>> {
    Levels::PerSubsystem(levels.to_vec()).resolve(count)
}

/// Total excitation number of each basis state.
pub fn total_excitations(dims: &[usize]) -> Vec<usize> {
    crate::linalg::basis_labels(dims)
        .into_iter()
        .map(|l| l.iter().sum())
        .collect()
}
