//! ZZ and cross-resonance analyses of superconducting two-qubit models.
//!
//! Each estimate is available as a closed form over any [`Scalar`] (so the
//! same code yields numbers, double-double numbers or expression graphs) and
//! as an `f64` wrapper that checks the resonance preconditions and returns a
//! tagged [`ZzEstimate`].
//!
//! The numeric baselines evaluate `zeta = E11 - E10 - E01 + E00` on the
//! eigenvalues of the full model, with each bare label assigned to the
//! eigenvector it overlaps most.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_oracle, label_to_index, BasisLabel, Eigen, Matrix};
use crate::scalar::NumericScalar;

pub mod cross_resonance;
pub mod dispersive;
pub mod near_resonant;

pub use cross_resonance::{
    omega_zx_analytical, omega_zx_numeric, omega_zx_pipeline, omega_zx_small_drive, CR_DRIVE_TARGETS,
};
pub use dispersive::{
    zero_circle_residual, zeta4, zeta4_contributions, zeta6, zeta_disp, zeta_npad8, DispersiveParams,
    NPAD8_STEPS,
};
pub use near_resonant::{
    zeta_kerr_approx, zeta_leading_perturbation, zeta_three_rotation, zeta_two_level, zeta_two_rotation,
};

/// Labels `|00>, |10>, |01>, |11>` of a two-qubit model, basis `(p, q)`.
pub fn qubit_pair_labels() -> [BasisLabel; 4] {
    [vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]
}

/// Labels `|000>, |010>, |001>, |011>` of the resonator-qubit chain, basis
/// `(l, p, q)` with the resonator empty.
pub fn chain_labels() -> [BasisLabel; 4] {
    [vec![0, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![0, 1, 1]]
}

/// Which approximation produced an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TwoLevel,
    TwoRotation,
    ThreeRotation,
    KerrApprox,
    LeadingPerturbation,
    Disp,
    Zeta4,
    Zeta6,
    Npad8,
    Numeric,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::TwoLevel => "two_level",
            Method::TwoRotation => "two_rotation",
            Method::ThreeRotation => "three_rotation",
            Method::KerrApprox => "kerr_approx",
            Method::LeadingPerturbation => "leading_perturbation",
            Method::Disp => "disp",
            Method::Zeta4 => "zeta4",
            Method::Zeta6 => "zeta6",
            Method::Npad8 => "npad8",
            Method::Numeric => "numeric",
        }
    }
}

/// A ZZ strength in the units of the input parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZzEstimate {
    pub value: f64,
    pub method: Method,
    /// Leading analytic error estimate, where one is defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    /// Secondary error estimate, where one is defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    /// Set by the numeric baseline when some label could not be assigned
    /// unambiguously.
    pub ambiguous: bool,
    /// The value obtained with the runner-up assignment of the ambiguous
    /// labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative: Option<f64>,
}

impl ZzEstimate {
    pub fn new(value: f64, method: Method) -> Self {
        Self {
            value,
            method,
            error_bound: None,
            eps2: None,
            ambiguous: false,
            alternative: None,
        }
    }
}

/// `E11 - E10 - E01 + E00` from energies listed in the order of
/// [`qubit_pair_labels`].
pub fn zeta_from_energies(e: [f64; 4]) -> f64 {
    e[3] - e[1] - e[2] + e[0]
}

/// One bare label matched to an eigenvector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assigned {
    pub label: BasisLabel,
    pub basis_index: usize,
    pub eigen_index: usize,
    /// `|<label|v>|^2` of the chosen eigenvector.
    pub overlap: f64,
    /// Second-best eigenvector and its overlap.
    pub runner_up: Option<(usize, f64)>,
}

/// Maximum-overlap matching of bare labels to eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateAssignment {
    pub entries: Vec<Assigned>,
}

/// Overlaps at or below this are reported as ambiguous.
pub const AMBIGUOUS_OVERLAP: f64 = 0.5;

impl StateAssignment {
    pub fn eigen_index(&self, label: &[usize]) -> Option<usize> {
        self.entries.iter().find(|a| a.label == label).map(|a| a.eigen_index)
    }

    /// Whether every assigned overlap exceeds one half and no eigenvector is
    /// used twice.
    pub fn is_unambiguous(&self) -> bool {
        let injective = self
            .entries
            .iter()
            .enumerate()
            .all(|(i, a)| self.entries[..i].iter().all(|b| b.eigen_index != a.eigen_index));
        injective && self.entries.iter().all(|a| a.overlap > AMBIGUOUS_OVERLAP)
    }
}

pub fn assign_states(eigen: &Eigen, labels: &[BasisLabel], dims: &[usize]) -> Result<StateAssignment> {
    let n = eigen.values.len();
    let mut entries = Vec::with_capacity(labels.len());
    for label in labels {
        let basis_index = label_to_index(label, dims)?;
        if basis_index >= n {
            return Err(Error::IndexOutOfRange(basis_index, basis_index, n));
        }
        // Row i of the unitary is the conjugated i-th eigenvector, so column
        // `basis_index` holds the overlaps with this label.
        let mut best: Option<(usize, f64)> = None;
        let mut second: Option<(usize, f64)> = None;
        for i in 0..n {
            let p = eigen.unitary.get(i, basis_index).norm_sqr();
            if best.map_or(true, |(_, b)| p > b) {
                second = best;
                best = Some((i, p));
            } else if second.map_or(true, |(_, s)| p > s) {
                second = Some((i, p));
            }
        }
        let (eigen_index, overlap) = best.ok_or(Error::EmptyMatrix)?;
        entries.push(Assigned {
            label: label.clone(),
            basis_index,
            eigen_index,
            overlap,
            runner_up: second,
        });
    }
    Ok(StateAssignment { entries })
}

/// Numeric ZZ strength of `h` on the four labels, ordered as in
/// [`qubit_pair_labels`].
///
/// An ambiguous assignment still yields the maximum-overlap value but is
/// flagged, with the runner-up assignment of the worst label as the
/// alternative.
pub fn zeta_numeric<T: NumericScalar>(h: &Matrix<T>, dims: &[usize], labels: &[BasisLabel; 4]) -> Result<ZzEstimate> {
    let eigen = eig_oracle(h)?;
    let assignment = assign_states(&eigen, labels, dims)?;
    Ok(zeta_from_assignment(&eigen, &assignment))
}

pub fn zeta_from_assignment(eigen: &Eigen, assignment: &StateAssignment) -> ZzEstimate {
    let energies = |pick: &dyn Fn(usize, &Assigned) -> usize| {
        let mut e = [0.0; 4];
        for (slot, a) in assignment.entries.iter().enumerate().take(4) {
            e[slot] = eigen.values[pick(slot, a)];
        }
        zeta_from_energies(e)
    };
    let mut out = ZzEstimate::new(energies(&|_, a| a.eigen_index), Method::Numeric);
    if !assignment.is_unambiguous() {
        out.ambiguous = true;
        let worst = assignment
            .entries
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.overlap.total_cmp(&b.1.overlap))
            .map(|(i, _)| i);
        out.alternative = worst.and_then(|w| {
            let (alt, _) = assignment.entries[w].runner_up?;
            Some(energies(&|slot, a| if slot == w { alt } else { a.eigen_index }))
        });
    }
    out
}

/// Refuses a denominator that vanishes, naming it.
pub(crate) fn nonresonant(name: &str, value: f64) -> Result<()> {
    if value == 0.0 || !value.is_finite() {
        return Err(Error::Resonance(format!("{name} = {value}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C64;

    #[test]
    fn uncoupled_model_has_zero_zeta() {
        let h = Matrix::from_diagonal(
            [0.0, 5.0, 4.7, 9.7].iter().map(|&x| C64::new(x, 0.0)).collect(),
        );
        // basis (p, q) with two levels each: 00, 01, 10, 11
        let z = zeta_numeric(&h, &[2, 2], &qubit_pair_labels()).unwrap();
        assert!(z.value.abs() < 1e-14);
        assert!(!z.ambiguous);
        assert_eq!(z.error_bound, None);
    }

    #[test]
    fn strongly_mixed_pair_is_flagged() {
        let r = |x: f64| C64::new(x, 0.0);
        let h = Matrix::from_rows(vec![
            vec![r(0.0), r(0.0), r(0.0), r(0.0)],
            vec![r(0.0), r(1.0), r(0.5), r(0.0)],
            vec![r(0.0), r(0.5), r(1.0), r(0.0)],
            vec![r(0.0), r(0.0), r(0.0), r(2.5)],
        ])
        .unwrap();
        let z = zeta_numeric(&h, &[2, 2], &qubit_pair_labels()).unwrap();
        assert!(z.ambiguous);
        assert!(z.alternative.is_some());
    }

    #[test]
    fn method_tags_match_serde_names() {
        for m in [Method::TwoLevel, Method::KerrApprox, Method::Npad8, Method::Numeric] {
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.tag()));
        }
    }
}
