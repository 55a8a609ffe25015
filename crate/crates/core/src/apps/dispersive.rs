//! ZZ strength of two qubits coupled through a resonator.
//!
//! Detunings are measured from the resonator, `Delta_q = omega_q - omega_r`.
//! The closed forms are perturbative in `g / Delta`; the baselines are the
//! exact spectrum of the truncated chain and eight grouped Givens rotations.

use serde::Serialize;

use super::{chain_labels, nonresonant, zeta_numeric, Method, ZzEstimate};
use crate::cqed::{qubit_resonator_qubit, CqedParams, ModelParams};
use crate::error::Result;
use crate::linalg::{label_to_index, BasisLabel, Matrix};
use crate::npad::npad_targeted;
use crate::scalar::{Scalar, C64};

/// The six parameters of the chain in the resonator frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersiveParams<T> {
    pub d1: T,
    pub d2: T,
    pub a1: T,
    pub a2: T,
    pub g1: T,
    pub g2: T,
}

impl<T: Clone> DispersiveParams<T> {
    /// Relabels the qubits.
    pub fn swapped(&self) -> Self {
        Self {
            d1: self.d2.clone(),
            d2: self.d1.clone(),
            a1: self.a2.clone(),
            a2: self.a1.clone(),
            g1: self.g2.clone(),
            g2: self.g1.clone(),
        }
    }
}

impl DispersiveParams<f64> {
    pub fn new(d1: f64, d2: f64, a1: f64, a2: f64, g1: f64, g2: f64) -> Self {
        Self { d1, d2, a1, a2, g1, g2 }
    }

    /// Equal anharmonicities and couplings, positioned by
    /// `Delta_+ = Delta_1 + Delta_2` and `Delta_- = Delta_1 - Delta_2`.
    pub fn from_sum_difference(sum: f64, diff: f64, alpha: f64, g: f64) -> Self {
        Self::new((sum + diff) / 2.0, (sum - diff) / 2.0, alpha, alpha, g, g)
    }

    pub fn from_cqed(p: &CqedParams) -> Self {
        Self::new(p.omega1 - p.omega_r, p.omega2 - p.omega_r, p.alpha1, p.alpha2, p.g1, p.g2)
    }

    /// Chain parameters with the resonator at zero frequency.
    pub fn to_cqed(&self, levels: usize) -> CqedParams {
        CqedParams {
            omega1: self.d1,
            omega2: self.d2,
            alpha1: self.a1,
            alpha2: self.a2,
            g1: self.g1,
            g2: self.g2,
            levels: crate::cqed::Levels::Uniform(levels),
            ..CqedParams::default()
        }
    }

    fn lift(&self) -> DispersiveParams<C64> {
        let c = |x: f64| C64::new(x, 0.0);
        DispersiveParams {
            d1: c(self.d1),
            d2: c(self.d2),
            a1: c(self.a1),
            a2: c(self.a2),
            g1: c(self.g1),
            g2: c(self.g2),
        }
    }

    fn check_lambda4(&self) -> Result<()> {
        let dm = self.d1 - self.d2;
        nonresonant("Delta_1", self.d1)?;
        nonresonant("Delta_2", self.d2)?;
        nonresonant("Delta_- - alpha_2", dm - self.a2)?;
        nonresonant("Delta_- + alpha_1", dm + self.a1)?;
        nonresonant("Delta_1 + alpha_1", self.d1 + self.a1)?;
        nonresonant("Delta_2 + alpha_2", self.d2 + self.a2)
    }
}

fn k<T: Scalar>(x: f64) -> T {
    T::from_f64(x)
}

fn sq<T: Scalar>(x: &T) -> T {
    x.clone() * x.clone()
}

fn cube<T: Scalar>(x: &T) -> T {
    x.clone() * x.clone() * x.clone()
}

/// `2 g1^2 g2^2 (1/(D1^2 (D- - a2)) - 1/(D2^2 (D- + a1)) + (D1 + D2)/(D1^2 D2^2))`.
pub fn zeta4_value<T: Scalar>(p: &DispersiveParams<T>) -> T {
    let dm = p.d1.clone() - p.d2.clone();
    let (d1s, d2s) = (sq(&p.d1), sq(&p.d2));
    let bracket = T::one() / (d1s.clone() * (dm.clone() - p.a2.clone()))
        - T::one() / (d2s.clone() * (dm + p.a1.clone()))
        + (p.d1.clone() + p.d2.clone()) / (d1s * d2s);
    k::<T>(2.0) * sq(&p.g1) * sq(&p.g2) * bracket
}

/// Leading effective coupling between `|011>` and `|020>`.
fn v12<T: Scalar>(p: &DispersiveParams<T>) -> T {
    let s = k::<T>(2f64.sqrt() / 2.0) * p.g1.clone() * p.g2.clone();
    s.clone() / (p.a1.clone() + p.d1.clone()) + s / p.d2.clone()
}

/// Next-order effective coupling between `|011>` and `|020>`.
fn v14<T: Scalar>(p: &DispersiveParams<T>) -> T {
    // Written for |002>, then relabeled.
    let q = p.swapped();
    let r2 = k::<T>(2f64.sqrt());
    let (d1, d2, a2, g1, g2) = (&q.d1, &q.d2, &q.a2, &q.g1, &q.g2);
    let ad = a2.clone() + d2.clone();
    let g13 = g1.clone() * cube(g2);
    let g31 = cube(g1) * g2.clone();
    r2 * (-(g13.clone() / (k::<T>(4.0) * cube(&ad)))
        + g13.clone() / (k::<T>(8.0) * sq(d2) * ad.clone())
        - k::<T>(7.0) * g13.clone() / (k::<T>(4.0) * d1.clone() * sq(&ad))
        + k::<T>(3.0) * g13.clone() / (k::<T>(2.0) * d1.clone() * d2.clone() * ad.clone())
        - k::<T>(5.0) * g13 / (k::<T>(8.0) * d1.clone() * sq(d2))
        - k::<T>(7.0) * g31.clone() / (k::<T>(8.0) * sq(d1) * ad)
        - g31 / (k::<T>(8.0) * cube(d1)))
}

/// Bare energy difference `E011 - E020`.
fn gap0<T: Scalar>(p: &DispersiveParams<T>) -> T {
    -p.a1.clone() - p.d1.clone() + p.d2.clone()
}

/// Dressed energy difference `E011 - E020` through second order.
fn gap2<T: Scalar>(p: &DispersiveParams<T>) -> T {
    gap0(p) - k::<T>(2.0) * sq(&p.g1) / (p.a1.clone() + p.d1.clone()) + sq(&p.g2) / p.d2.clone()
        + sq(&p.g1) / p.d1.clone()
}

/// Dispersive value from the effective couplings to `|020>` and `|002>`.
///
/// The factor `2 J^2` is the squared matrix element between `|11>` and the
/// doubly excited state, so it is taken as `V^2` directly.
pub fn zeta_disp_value<T: Scalar>(p: &DispersiveParams<T>) -> T {
    let q = p.swapped();
    sq(&v12(p)) / gap0(p) + sq(&v12(&q)) / gap0(&q)
}

/// Contributions through the second excited qubit states (`t`) and the
/// second excited resonator state (`r`). They sum to [`zeta4_value`].
pub fn zeta4_contributions_value<T: Scalar>(p: &DispersiveParams<T>) -> (T, T) {
    let g = sq(&p.g1) * sq(&p.g2);
    let (d1, d2) = (&p.d1, &p.d2);
    let (b1, b2) = (d1.clone() + p.a1.clone(), d2.clone() + p.a2.clone());
    let t = zeta_disp_value(p)
        - g.clone() / (k::<T>(2.0) * d2.clone() * sq(&b1))
        - k::<T>(3.0) * g.clone() / (k::<T>(2.0) * sq(d2) * b1)
        - g.clone() / (k::<T>(2.0) * d1.clone() * sq(&b2))
        - k::<T>(3.0) * g.clone() / (k::<T>(2.0) * sq(d1) * b2);
    let r = k::<T>(2.0) * g.clone() / (d1.clone() * sq(d2)) + k::<T>(2.0) * g / (sq(d1) * d2.clone());
    (t, r)
}

/// The `g1^2 g2^4` remainder of the sixth-order correction; the `g1^4 g2^2`
/// part is the same with the qubits relabeled.
fn rest6<T: Scalar>(p: &DispersiveParams<T>) -> T {
    let g = sq(&p.g1) * sq(&p.g2) * sq(&p.g2);
    let (d1, d2) = (&p.d1, &p.d2);
    let b1 = d1.clone() + p.a1.clone();
    let b2 = d2.clone() + p.a2.clone();
    let pow4 = |x: &T| sq(&sq(x));
    let f = |num: f64, den: T| k::<T>(num) * g.clone() / den;
    f(9.0 / 4.0, cube(d2) * sq(&b1))
        + f(23.0 / 4.0, pow4(d2) * b1.clone())
        + f(0.5, d1.clone() * pow4(&b2))
        - f(0.25, d1.clone() * sq(d2) * sq(&b2))
        - f(4.0, cube(d1) * d2.clone() * b2.clone())
        + f(3.5, sq(d1) * cube(&b2))
        - f(2.5, sq(d1) * d2.clone() * sq(&b2))
        + f(0.75, sq(d1) * sq(d2) * b2.clone())
        - f(4.0, sq(d1) * cube(d2))
        + f(4.0, cube(d1) * sq(&b2))
        - f(6.0, d1.clone() * pow4(d2))
}

/// Through sixth order: the fourth-order value with its dispersive part
/// replaced by the quotient of the corrected couplings and the dressed
/// gaps, plus the two remainders.
pub fn zeta6_value<T: Scalar>(p: &DispersiveParams<T>) -> T {
    let q = p.swapped();
    let dressed = |x: &DispersiveParams<T>| sq(&(v12(x) + v14(x))) / gap2(x);
    zeta4_value(p) - zeta_disp_value(p) + dressed(p) + dressed(&q) + rest6(p) + rest6(&q)
}

pub fn zeta4(p: &DispersiveParams<f64>) -> Result<ZzEstimate> {
    p.check_lambda4()?;
    Ok(ZzEstimate::new(zeta4_value(&p.lift()).re, Method::Zeta4))
}

pub fn zeta4_contributions(p: &DispersiveParams<f64>) -> Result<(f64, f64)> {
    p.check_lambda4()?;
    let (t, r) = zeta4_contributions_value(&p.lift());
    Ok((t.re, r.re))
}

pub fn zeta_disp(p: &DispersiveParams<f64>) -> Result<ZzEstimate> {
    p.check_lambda4()?;
    Ok(ZzEstimate::new(zeta_disp_value(&p.lift()).re, Method::Disp))
}

pub fn zeta6(p: &DispersiveParams<f64>) -> Result<ZzEstimate> {
    p.check_lambda4()?;
    let lifted = p.lift();
    nonresonant("dressed E011 - E020", gap2(&lifted).re)?;
    nonresonant("dressed E011 - E002", gap2(&lifted.swapped()).re)?;
    Ok(ZzEstimate::new(zeta6_value(&lifted).re, Method::Zeta6))
}

/// `(Delta_+ - alpha)^2 + Delta_-^2 - alpha^2`, zero where the fourth-order
/// ZZ vanishes for equal anharmonicities.
pub fn zero_circle_residual(sum: f64, diff: f64, alpha: f64) -> f64 {
    (sum - alpha).powi(2) + diff * diff - alpha * alpha
}

/// The eight rotation targets, as `(l, p, q)` label pairs in two groups.
pub const NPAD8_STEPS: [[([usize; 3], [usize; 3]); 4]; 2] = [
    [
        ([0, 1, 0], [1, 0, 0]),
        ([0, 0, 1], [1, 0, 0]),
        ([0, 1, 1], [1, 0, 1]),
        ([0, 1, 1], [1, 1, 0]),
    ],
    [
        ([0, 1, 1], [2, 0, 0]),
        ([0, 0, 1], [0, 1, 0]),
        ([0, 1, 1], [0, 0, 2]),
        ([0, 1, 1], [0, 2, 0]),
    ],
];

/// ZZ strength from the diagonal after the two grouped steps of
/// [`NPAD8_STEPS`], over any scalar.
pub fn npad8_zeta<T: Scalar>(p: &ModelParams<T>, levels: &[usize]) -> Result<T> {
    let h = qubit_resonator_qubit(p, levels)?;
    npad8_on(&h, levels)
}

pub fn npad8_on<T: Scalar>(h: &Matrix<T>, levels: &[usize]) -> Result<T> {
    let groups = NPAD8_STEPS
        .iter()
        .map(|step| {
            step.iter()
                .map(|(a, b)| Ok((label_to_index(a, levels)?, label_to_index(b, levels)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let out = npad_targeted(h, &groups, true)?;
    let e = |label: &BasisLabel| -> Result<T> { Ok(out.h_final.get(label_to_index(label, levels)?, label_to_index(label, levels)?).clone()) };
    let [l00, l10, l01, l11] = chain_labels();
    Ok(e(&l11)? - e(&l10)? - e(&l01)? + e(&l00)?)
}

pub fn zeta_npad8(p: &CqedParams) -> Result<ZzEstimate> {
    p.validate()?;
    let levels = p.levels.resolve(3)?;
    let z = npad8_zeta(&p.model::<C64>(), &levels)?;
    Ok(ZzEstimate::new(z.re, Method::Npad8))
}

/// Exact ZZ strength of the truncated chain.
pub fn zeta_numeric_chain(p: &CqedParams) -> Result<ZzEstimate> {
    p.validate()?;
    let levels = p.levels.resolve(3)?;
    let h = qubit_resonator_qubit(&p.model::<C64>(), &levels)?;
    zeta_numeric(&h, &levels, &chain_labels())
}

/// Every estimate at one point of a `Delta_+` cut.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersivePoint {
    pub sum: f64,
    pub diff: f64,
    pub numeric: f64,
    pub numeric_ambiguous: bool,
    pub zeta4: Option<f64>,
    pub zeta6: Option<f64>,
    pub npad8: f64,
    pub disp: Option<f64>,
}

pub fn dispersive_point(sum: f64, diff: f64, alpha: f64, g: f64, levels: usize) -> Result<DispersivePoint> {
    let p = DispersiveParams::from_sum_difference(sum, diff, alpha, g);
    let cq = p.to_cqed(levels);
    let numeric = zeta_numeric_chain(&cq)?;
    Ok(DispersivePoint {
        sum,
        diff,
        numeric: numeric.value,
        numeric_ambiguous: numeric.ambiguous,
        zeta4: zeta4(&p).ok().map(|z| z.value),
        zeta6: zeta6(&p).ok().map(|z| z.value),
        npad8: zeta_npad8(&cq)?.value,
        disp: zeta_disp(&p).ok().map(|z| z.value),
    })
}

/// Root of `f` in `[lo, hi]` by bisection, given a sign change.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// First sign change of `f` on a uniform grid of `steps` intervals, refined
/// by bisection.
pub fn first_zero(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, steps: usize, tol: f64) -> Option<f64> {
    let x = |i: usize| lo + (hi - lo) * i as f64 / steps as f64;
    let mut prev = f(lo);
    for i in 1..=steps {
        let cur = f(x(i));
        if prev.is_finite() && cur.is_finite() && (prev == 0.0 || prev.signum() != cur.signum()) {
            return bisect(&mut f, x(i - 1), x(i), tol);
        }
        prev = cur;
    }
    None
}
