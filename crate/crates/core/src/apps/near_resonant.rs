//! ZZ strength near the `|11> <-> |20>` avoided crossing.
//!
//! Everything here works on the three-level block `(|20>, |11>, |02>)` of
//! [`three_level_cz`], parametrized by `delta`, `Delta`, `g1`, `g2`. The ZZ
//! strength is `H'[1][1] + delta`, because `E10 + E01` equals the block's
//! removed offset.

use serde::Serialize;

use super::{Method, ZzEstimate};
use crate::cqed::{cz_subspace_parameters, three_level_cz, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{eig_oracle, Matrix};
use crate::npad::{npad_targeted, NpadResult};
use crate::rswt::swt_leading_order;
use crate::scalar::{Scalar, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `E2 = sgn(delta) sqrt(delta^2 + g1^2)`: the upper eigenvalue of the
/// `|20>, |11>` pair, continued through `delta = 0` with `sgn(0) = +1`.
pub fn two_level_energy<T: Scalar>(delta: &T, g1: &T) -> T {
    delta.sign() * (delta.clone() * delta.clone() + g1.clone() * g1.clone()).sqrt()
}

/// Cosine of the first rotation, `1 / sqrt(((E2 - delta) / g1)^2 + 1)`.
pub fn first_rotation_cosine<T: Scalar>(delta: &T, g1: &T) -> T {
    if g1.is_zero() {
        return T::one();
    }
    let t = (two_level_energy(delta, g1) - delta.clone()) / g1.clone();
    T::one() / (t.clone() * t + T::one()).sqrt()
}

/// `delta - sgn(delta) sqrt(delta^2 + g1^2)`, ignoring `|02>`.
pub fn zeta_two_level(delta: f64, g1: f64) -> ZzEstimate {
    let z = delta - two_level_energy(&c(delta), &c(g1)).re;
    ZzEstimate::new(z, Method::TwoLevel)
}

/// The rotation recipe on entries `(0, 1)` then `(1, 2)`, optionally
/// followed by `(0, 1)` again.
pub fn cz_rotations<T: Scalar>(delta: T, big_delta: T, g1: T, g2: T, third: bool) -> Result<NpadResult<T>> {
    let h = three_level_cz(delta, big_delta, g1, g2);
    let mut groups = vec![vec![(0, 1)], vec![(1, 2)]];
    if third {
        groups.push(vec![(0, 1)]);
    }
    npad_targeted(&h, &groups, false)
}

/// ZZ strength after two rotations, over any scalar.
pub fn two_rotation_zeta<T: Scalar>(delta: T, big_delta: T, g1: T, g2: T) -> Result<T> {
    let r = cz_rotations(delta.clone(), big_delta, g1, g2, false)?;
    Ok(r.h_final.get(1, 1).clone() + delta)
}

/// ZZ strength after three rotations, over any scalar.
pub fn three_rotation_zeta<T: Scalar>(delta: T, big_delta: T, g1: T, g2: T) -> Result<T> {
    let r = cz_rotations(delta.clone(), big_delta, g1, g2, true)?;
    Ok(r.h_final.get(1, 1).clone() + delta)
}

/// Closed form of `H''[1][1]` after the two rotations:
/// `-E2 + (Delta - E2)/2 (sqrt(1 + (2 c01 g2 / (Delta - E2))^2) - 1)`.
///
/// At `Delta = E2` the second rotation is a quarter turn and the entry is
/// `-E2 + |c01 g2|`.
pub fn two_rotation_closed_form<T: Scalar>(delta: &T, big_delta: &T, g1: &T, g2: &T) -> T {
    let e2 = two_level_energy(delta, g1);
    let coupling = first_rotation_cosine(delta, g1) * g2.clone();
    let gap = big_delta.clone() - e2.clone();
    if gap.is_zero() {
        return -e2 + coupling.abs();
    }
    let x = T::from_f64(2.0) * coupling / gap.clone();
    -e2 + gap * T::from_f64(0.5) * ((T::one() + x.clone() * x).sqrt() - T::one())
}

pub fn zeta_two_rotation(delta: f64, big_delta: f64, g1: f64, g2: f64) -> ZzEstimate {
    let z = two_rotation_zeta(c(delta), c(big_delta), c(g1), c(g2)).expect("3x3 rotations on valid pairs");
    ZzEstimate::new(z.re, Method::TwoRotation)
}

pub fn zeta_three_rotation(delta: f64, big_delta: f64, g1: f64, g2: f64) -> ZzEstimate {
    let z = three_rotation_zeta(c(delta), c(big_delta), c(g1), c(g2)).expect("3x3 rotations on valid pairs");
    ZzEstimate::new(z.re, Method::ThreeRotation)
}

/// The Kerr-type expansion `-E2 + c01^2 g2^2 / (Delta - E2)` of the
/// two-rotation result, valid for `Delta >> delta, g`.
///
/// `error_bound` carries `eps1 = c01^4 g2^4 / (Delta - E2)^3`, the next term
/// of the square-root expansion. `eps2` is the second-order shift from the
/// residual `|20>, |11>` coupling left after the two rotations.
pub fn zeta_kerr_approx(delta: f64, big_delta: f64, g1: f64, g2: f64) -> Result<ZzEstimate> {
    let e2 = two_level_energy(&c(delta), &c(g1)).re;
    let gap = big_delta - e2;
    if !(gap > 0.0) {
        return Err(Error::Regime(format!("Delta = {big_delta} is not above E2 = {e2}")));
    }
    let c01 = first_rotation_cosine(&c(delta), &c(g1)).re;
    let coupling_sq = (c01 * g2).powi(2);
    let h11 = -e2 + coupling_sq / gap;
    let eps1 = coupling_sq * coupling_sq / gap.powi(3);
    let rotated = cz_rotations(c(delta), c(big_delta), c(g1), c(g2), false)?.h_final;
    let resid = rotated.get(0, 1).norm_sqr();
    let split = (rotated.get(0, 0).re - rotated.get(1, 1).re).abs();
    let eps2 = if resid == 0.0 { 0.0 } else { resid / split };
    let mut out = ZzEstimate::new(h11 + delta, Method::KerrApprox);
    out.error_bound = Some(eps1);
    out.eps2 = Some(eps2);
    Ok(out)
}

/// Leading-order Schrieffer-Wolff on the three-level block.
pub fn zeta_leading_perturbation(delta: f64, big_delta: f64, g1: f64, g2: f64) -> Result<ZzEstimate> {
    let h = three_level_cz(c(delta), c(big_delta), c(g1), c(g2));
    let h1 = swt_leading_order(&h)?;
    Ok(ZzEstimate::new(h1.get(1, 1).re + delta, Method::LeadingPerturbation))
}

/// Exact eigen-decomposition of the block, with `|11>` assigned by maximum
/// overlap.
pub fn zeta_numeric_cz(delta: f64, big_delta: f64, g1: f64, g2: f64) -> Result<(ZzEstimate, usize)> {
    let h: Matrix<C64> = three_level_cz(c(delta), c(big_delta), c(g1), c(g2));
    let eigen = eig_oracle(&h)?;
    let (best, overlap) = (0..3)
        .map(|i| (i, eigen.unitary.get(i, 1).norm_sqr()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three eigenvectors");
    let mut out = ZzEstimate::new(eigen.values[best] + delta, Method::Numeric);
    out.ambiguous = overlap <= super::AMBIGUOUS_OVERLAP;
    Ok((out, best))
}

/// One sample of the qubit-detuning sweep across the avoided crossing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzSweepPoint {
    /// `omega1 - omega2`.
    pub detuning: f64,
    pub numeric: f64,
    pub two_rotation: f64,
    pub three_rotation: f64,
    pub kerr_approx: Option<f64>,
    pub two_level: f64,
    pub leading_perturbation: Option<f64>,
    pub eps1: Option<f64>,
    /// The two-rotation energy tracks a different eigenvalue than the one
    /// labeled `|11>` by maximum overlap. Happens only where bare levels
    /// swap, which changes the direction of a rotation.
    pub label_switch: bool,
}

impl CzSweepPoint {
    pub fn relative_error(&self, estimate: f64) -> f64 {
        ((estimate - self.numeric) / self.numeric).abs()
    }
}

/// Evaluates every near-resonant estimate at one detuning of a Duffing
/// pair.
pub fn cz_sweep_point(detuning: f64, alpha1: f64, alpha2: f64, g1: f64, g2: f64) -> Result<CzSweepPoint> {
    let p = ModelParams {
        omega1: c(detuning),
        omega2: c(0.0),
        alpha1: c(alpha1),
        alpha2: c(alpha2),
        g1: c(g1),
        g2: c(g2),
        omega_r: c(0.0),
        drive: c(0.0),
        omega_d: c(0.0),
    };
    let (delta, big_delta, _) = cz_subspace_parameters(&p);
    let (delta, big_delta) = (delta.re, big_delta.re);
    let h: Matrix<C64> = three_level_cz(c(delta), c(big_delta), c(g1), c(g2));
    let eigen = eig_oracle(&h)?;
    let (numeric, assigned) = zeta_numeric_cz(delta, big_delta, g1, g2)?;
    let two_rotation = zeta_two_rotation(delta, big_delta, g1, g2).value;
    let nearest = (0..3)
        .min_by(|&a, &b| {
            let da = (eigen.values[a] + delta - two_rotation).abs();
            let db = (eigen.values[b] + delta - two_rotation).abs();
            da.total_cmp(&db)
        })
        .expect("three eigenvalues");
    let kerr = zeta_kerr_approx(delta, big_delta, g1, g2).ok();
    Ok(CzSweepPoint {
        detuning,
        numeric: numeric.value,
        two_rotation,
        three_rotation: zeta_three_rotation(delta, big_delta, g1, g2).value,
        kerr_approx: kerr.as_ref().map(|k| k.value),
        two_level: zeta_two_level(delta, g1).value,
        leading_perturbation: zeta_leading_perturbation(delta, big_delta, g1, g2).ok().map(|z| z.value),
        eps1: kerr.and_then(|k| k.error_bound),
        label_switch: nearest != assigned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, Expr, ParamEnv};
    use crate::scalar::DoubleDouble;

    #[test]
    fn two_level_limits() {
        assert_eq!(zeta_two_level(0.3, 0.0).value, 0.0);
        assert!((zeta_two_level(0.0, 0.1).value + 0.1).abs() < 1e-15);
        assert!((zeta_two_level(1e-9, 0.1).value + 0.1).abs() < 1e-8);
        let d = 0.07;
        assert!((zeta_two_level(d, d).value - d * (1.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn pipeline_matches_closed_form() {
        for &(d, big, g1, g2) in &[
            (0.05, 0.6, 0.14, 0.14),
            (-0.2, 0.4, 0.1, 0.2),
            (0.0, 0.3, 0.1, 0.05),
            (0.1, -0.5, 0.03, 0.2),
        ] {
            let z = zeta_two_rotation(d, big, g1, g2).value;
            let closed = two_rotation_closed_form(&c(d), &c(big), &c(g1), &c(g2)).re + d;
            assert!((z - closed).abs() < 1e-12, "{z} {closed}");
        }
    }

    #[test]
    fn zero_second_coupling_reduces_to_two_level() {
        let z = zeta_two_rotation(0.08, 0.7, 0.12, 0.0).value;
        assert!((z - zeta_two_level(0.08, 0.12).value).abs() < 1e-15);
        let k = zeta_kerr_approx(0.08, 0.7, 0.12, 0.0).unwrap();
        assert!((k.value - zeta_two_level(0.08, 0.12).value).abs() < 1e-15);
        assert_eq!(k.error_bound, Some(0.0));
    }

    #[test]
    fn kerr_regime_is_enforced() {
        assert!(matches!(zeta_kerr_approx(0.1, 0.05, 0.1, 0.1), Err(Error::Regime(_))));
    }

    #[test]
    fn kerr_tracks_two_rotation_within_eps1() {
        let (d, g) = (0.02, 2f64.sqrt() * 0.1);
        for big in [1.5, 2.5, 5.0] {
            let k = zeta_kerr_approx(d, big, g, g).unwrap();
            let z = zeta_two_rotation(d, big, g, g).value;
            assert!((k.value - z).abs() <= 2.0 * k.error_bound.unwrap());
            let c01 = first_rotation_cosine(&c(d), &c(g)).re;
            let bound = g.powi(4) * (1.0 - c01 * c01) / (g * (big - two_level_energy(&c(d), &c(g)).re).powi(2));
            assert!((0.0..=bound).contains(&k.eps2.unwrap()));
        }
    }

    #[test]
    fn three_rotations_improve_on_two() {
        let (d, big, g1, g2) = (0.03, 0.5, 0.1, 0.12);
        let (num, _) = zeta_numeric_cz(d, big, g1, g2).unwrap();
        let e2 = (zeta_two_rotation(d, big, g1, g2).value - num.value).abs();
        let e3 = (zeta_three_rotation(d, big, g1, g2).value - num.value).abs();
        assert!(e3 < e2 / 5.0, "{e3} {e2}");
    }

    #[test]
    fn symbolic_and_double_double_agree() {
        let (d, big, g1, g2) = (0.04, 0.45, 0.1, 0.09);
        let z64 = zeta_two_rotation(d, big, g1, g2).value;
        let sym = two_rotation_zeta(
            Expr::param("delta"),
            Expr::param("Delta"),
            Expr::param("g1"),
            Expr::param("g2"),
        )
        .unwrap();
        let env = ParamEnv::new().with("delta", d).with("Delta", big).with("g1", g1).with("g2", g2);
        assert!((eval(&sym, &env).unwrap() - z64).abs() < 1e-14);
        let dd = two_rotation_zeta(
            DoubleDouble::from(d),
            DoubleDouble::from(big),
            DoubleDouble::from(g1),
            DoubleDouble::from(g2),
        )
        .unwrap();
        assert!((f64::from(dd) - z64).abs() < 1e-14);
    }

    #[test]
    fn sweep_point_flags_nothing_far_from_crossings() {
        let g = 2f64.sqrt() * 0.1;
        let p = cz_sweep_point(-0.8, -0.3, -0.3, g, g).unwrap();
        assert!(!p.label_switch);
        assert!(p.relative_error(p.two_rotation) < 0.03);
        assert!(p.kerr_approx.is_none() || p.eps1.is_some());
    }
}
