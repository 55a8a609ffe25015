//! Two-level Givens rotations and pivot selection.
//!
//! A rotation on the pair `(j, k)` is the unitary whose `(j, k)` block is
//!
//! ```text
//!     [  c   w ]        w = s e^{-i phi}
//!     [ -w*  c ]
//! ```
//!
//! and acts as `H -> U H U^dagger`. It is built from the stable tangent
//! `t = sgn(delta) g / (|delta| + sqrt(delta^2 + g^2))`, which tends to 1
//! at resonance instead of blowing up.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{NumericScalar, Scalar};

/// Tolerance of the consistency check between a rotation and the matrix
/// it is applied to.
pub const STALE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GivensRotation<T> {
    pub j: usize,
    pub k: usize,
    /// `cos(theta/2)`.
    pub c: T,
    /// `sin(theta/2) >= 0` for numeric scalars. Real symbolic rotations carry
    /// the sign of `w` here instead and leave `phi = 0`.
    pub s: T,
    pub phi: f64,
    w: T,
    shift: T,
    source: Option<[T; 3]>,
}

impl<T: Scalar> GivensRotation<T> {
    pub fn identity(j: usize, k: usize) -> Self {
        Self {
            j,
            k,
            c: T::one(),
            s: T::zero(),
            phi: 0.0,
            w: T::zero(),
            shift: T::zero(),
            source: None,
        }
    }

    /// The off-diagonal block element `w = s e^{-i phi}`.
    pub fn w(&self) -> &T {
        &self.w
    }

    /// The diagonal renormalization `t g`: `H'jj = Hjj + t g`, `H'kk = Hkk - t g`.
    pub fn shift(&self) -> &T {
        &self.shift
    }

    pub fn is_identity(&self) -> bool {
        self.w.is_zero()
    }

    /// The rotation as a full `dim x dim` unitary.
    pub fn unitary(&self, dim: usize) -> Matrix<T> {
        let mut u = Matrix::identity(dim);
        u.set(self.j, self.j, self.c.clone());
        u.set(self.k, self.k, self.c.clone());
        u.set(self.j, self.k, self.w.clone());
        u.set(self.k, self.j, -self.w.conj());
        u
    }
}

fn check_pair<T>(h: &Matrix<T>, j: usize, k: usize) -> Result<(usize, usize)>
where
    T: Scalar,
{
    if j == k {
        return Err(Error::DiagonalPair(j));
    }
    let n = h.dim();
    if j >= n || k >= n {
        return Err(Error::IndexOutOfRange(j, k, n));
    }
    Ok((j.min(k), j.max(k)))
}

/// Builds the rotation that zeroes `H[j][k]` of the current matrix.
///
/// A pair given as `j > k` is reordered. A vanishing coupling yields the
/// identity rotation.
pub fn make_givens<T: Scalar>(h: &Matrix<T>, j: usize, k: usize) -> Result<GivensRotation<T>> {
    let (j, k) = check_pair(h, j, k)?;
    let hjk = h.get(j, k).clone();
    if hjk.is_zero() {
        return Ok(GivensRotation::identity(j, k));
    }
    let hjj = h.get(j, j).clone();
    let hkk = h.get(k, k).clone();
    let delta = (hjj.clone() - hkk.clone()) * T::from_f64(0.5);
    let g2 = hjk.norm_sqr();
    let radius = (delta.clone() * delta.clone() + g2.clone()).sqrt();
    let tau = delta.sign() * hjk.clone() / (delta.abs() + radius);
    let c = T::one() / (T::one() + tau.norm_sqr()).sqrt();
    let w = tau.clone() * c.clone();
    let shift = (tau * hjk.conj()).re();
    let (s, phi) = match w.value() {
        Some(z) if h.get(j, k).value().is_some() => (w.abs(), -z.arg()),
        _ => (w.clone(), 0.0),
    };
    Ok(GivensRotation {
        j,
        k,
        c,
        s,
        phi,
        w,
        shift,
        source: Some([hjj, hkk, hjk]),
    })
}

/// Applies a rotation built from this same matrix, using the closed-form
/// two-row update. `H'[j][k]` is set to an exact zero and the two diagonal
/// entries shift by `+- t g`, so the trace is preserved exactly.
pub fn apply_givens<T: Scalar>(h: &Matrix<T>, g: &GivensRotation<T>) -> Result<Matrix<T>> {
    let (j, k) = check_pair(h, g.j, g.k)?;
    if let Some([sjj, skk, sjk]) = &g.source {
        let now = [h.get(j, j), h.get(k, k), h.get(j, k)];
        for (then, now) in [sjj, skk, sjk].into_iter().zip(now) {
            if !then.same_entry(now, STALE_TOL) {
                return Err(Error::StaleRotation {
                    j,
                    k,
                    expected: format!("{then:?}"),
                    found: format!("{now:?}"),
                });
            }
        }
    } else if !h.get(j, k).is_zero() && g.is_identity() {
        return Err(Error::StaleRotation {
            j,
            k,
            expected: "zero coupling".into(),
            found: format!("{:?}", h.get(j, k)),
        });
    }
    if g.is_identity() {
        return Ok(h.clone());
    }
    let mut out = h.clone();
    let n = h.dim();
    let (c, w, wc) = (&g.c, &g.w, g.w.conj());
    for r in 0..n {
        if r == j || r == k {
            continue;
        }
        let hrj = h.get(r, j);
        let hrk = h.get(r, k);
        let new_rj = mix(c, hrj, &wc, hrk, false);
        let new_rk = mix(c, hrk, w, hrj, true);
        out.set(j, r, new_rj.conj());
        out.set(k, r, new_rk.conj());
        out.set(r, j, new_rj);
        out.set(r, k, new_rk);
    }
    out.set(j, j, h.get(j, j).clone() + g.shift.clone());
    out.set(k, k, h.get(k, k).clone() - g.shift.clone());
    out.set(j, k, T::zero());
    out.set(k, j, T::zero());
    Ok(out)
}

/// `a x + b y` (or `a x - b y`), skipping structurally zero terms.
fn mix<T: Scalar>(a: &T, x: &T, b: &T, y: &T, minus: bool) -> T {
    let first = if x.is_zero() { None } else { Some(a.clone() * x.clone()) };
    let second = if y.is_zero() { None } else { Some(b.clone() * y.clone()) };
    match (first, second) {
        (None, None) => T::zero(),
        (Some(p), None) => p,
        (None, Some(q)) => {
            if minus {
                -q
            } else {
                q
            }
        }
        (Some(p), Some(q)) => {
            if minus {
                p - q
            } else {
                p + q
            }
        }
    }
}

/// Applies a rotation by full conjugation, without requiring it to match
/// the current matrix. This is how rotations in a group, all built from the
/// group's starting matrix, are applied one after another; `H'[j][k]` is then
/// generally not zero.
pub fn apply_givens_unchecked<T: Scalar>(h: &Matrix<T>, g: &GivensRotation<T>) -> Result<Matrix<T>> {
    let (j, k) = check_pair(h, g.j, g.k)?;
    if g.is_identity() {
        return Ok(h.clone());
    }
    let n = h.dim();
    let mut out = h.clone();
    let (c, w, wc) = (&g.c, &g.w, g.w.conj());
    for r in 0..n {
        if r == j || r == k {
            continue;
        }
        let new_rj = mix(c, h.get(r, j), &wc, h.get(r, k), false);
        let new_rk = mix(c, h.get(r, k), w, h.get(r, j), true);
        out.set(j, r, new_rj.conj());
        out.set(k, r, new_rk.conj());
        out.set(r, j, new_rj);
        out.set(r, k, new_rk);
    }
    let (hjj, hkk, hjk, hkj) = (
        h.get(j, j).clone(),
        h.get(k, k).clone(),
        h.get(j, k).clone(),
        h.get(k, j).clone(),
    );
    let cc = c.clone() * c.clone();
    let ww = w.norm_sqr();
    let cw = c.clone() * w.clone();
    let cwc = c.clone() * wc.clone();
    let new_jj = (cc.clone() * hjj.clone()
        + cw.clone() * hkj.clone()
        + cwc.clone() * hjk.clone()
        + ww.clone() * hkk.clone())
    .re();
    let new_kk = (ww * hjj.clone() - cwc * hjk.clone() - cw.clone() * hkj.clone() + cc.clone() * hkk.clone()).re();
    let new_jk = -(cw.clone() * hjj) + cc * hjk - w.clone() * w.clone() * hkj + cw * hkk;
    out.set(j, j, new_jj);
    out.set(k, k, new_kk);
    out.set(k, j, new_jk.conj());
    out.set(j, k, new_jk);
    Ok(out)
}

/// How the next pair to rotate is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum PivotStrategy {
    /// Largest `|H[j][k]|` over `j < k`; ties go to the smallest `j`, then `k`.
    Largest,
    /// Row-major walk over `j < k`, skipping vanishing entries and wrapping
    /// around until a full pass finds nothing.
    Cyclic,
    /// Pairs taken in the given order.
    Fixed(Vec<(usize, usize)>),
}

/// Stateful pivot iterator over a strategy.
#[derive(Clone, Debug)]
pub struct PivotSelector {
    strategy: PivotStrategy,
    cursor: usize,
}

impl PivotSelector {
    pub fn new(strategy: PivotStrategy) -> Self {
        Self {
            strategy,
            cursor: 0,
        }
    }

    pub fn strategy(&self) -> &PivotStrategy {
        &self.strategy
    }

    /// Next pair among those accepted by `allowed`, or `None` when every
    /// allowed entry is at most `tol` in magnitude (or a fixed list is
    /// exhausted).
    pub fn next<T: NumericScalar>(
        &mut self,
        h: &Matrix<T>,
        tol: f64,
        allowed: impl Fn(usize, usize) -> bool,
    ) -> Option<(usize, usize)> {
        let n = h.dim();
        match &self.strategy {
            PivotStrategy::Largest => {
                let mut best: Option<((usize, usize), f64)> = None;
                for j in 0..n {
                    for k in (j + 1)..n {
                        if !allowed(j, k) {
                            continue;
                        }
                        let m = h.get(j, k).modulus();
                        if m > tol && best.map_or(true, |(_, b)| m > b) {
                            best = Some(((j, k), m));
                        }
                    }
                }
                best.map(|(p, _)| p)
            }
            PivotStrategy::Cyclic => {
                let pairs = n * (n - 1) / 2;
                for step in 0..pairs {
                    let idx = (self.cursor + step) % pairs;
                    let (j, k) = pair_at(idx, n);
                    if allowed(j, k) && h.get(j, k).modulus() > tol {
                        self.cursor = (idx + 1) % pairs;
                        return Some((j, k));
                    }
                }
                None
            }
            PivotStrategy::Fixed(list) => {
                let p = list.get(self.cursor).copied();
                self.cursor += 1;
                p
            }
        }
    }
}

/// The `idx`-th pair `j < k` in row-major order.
fn pair_at(idx: usize, n: usize) -> (usize, usize) {
    let mut rest = idx;
    for j in 0..n {
        let row = n - j - 1;
        if rest < row {
            return (j, j + 1 + rest);
        }
        rest -= row;
    }
    unreachable!("pair index {idx} out of range for dimension {n}")
}

/// One-shot pivot choice on the whole matrix.
pub fn select_pivot<T: NumericScalar>(
    h: &Matrix<T>,
    selector: &mut PivotSelector,
    tol: f64,
) -> Option<(usize, usize)> {
    selector.next(h, tol, |_, _| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C64;

    fn real(rows: &[&[f64]]) -> Matrix<C64> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_coupling_is_identity() {
        let h = real(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let g = make_givens(&h, 0, 1).unwrap();
        assert_eq!(g.c, C64::new(1.0, 0.0));
        assert_eq!(g.s, C64::new(0.0, 0.0));
    }

    #[test]
    fn unit_kappa_eighth_turn() {
        let h = real(&[&[0.5, 0.5], &[0.5, -0.5]]);
        let g = make_givens(&h, 0, 1).unwrap();
        let t = g.s.re / g.c.re;
        assert!((t - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let theta = 2.0 * g.s.re.atan2(g.c.re);
        assert!((theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn resonance_half_turn() {
        let h = real(&[&[0.3, 0.2], &[0.2, 0.3]]);
        let g = make_givens(&h, 0, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.c.re - r).abs() < 1e-15 && (g.s.re - r).abs() < 1e-15);
        let out = apply_givens(&h, &g).unwrap();
        assert!((out.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((out.get(1, 1).re - 0.1).abs() < 1e-15);
    }

    #[test]
    fn diagonal_pair_rejected() {
        let h = real(&[&[1.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(make_givens(&h, 1, 1).unwrap_err(), Error::DiagonalPair(1));
    }

    #[test]
    fn two_level_diagonalized() {
        let (d, g0) = (0.2, 0.35);
        let h = real(&[&[d, g0], &[g0, -d]]);
        let out = apply_givens(&h, &make_givens(&h, 0, 1).unwrap()).unwrap();
        let r = (d * d + g0 * g0).sqrt();
        assert!((out.get(0, 0).re - r).abs() < 1e-15);
        assert!((out.get(1, 1).re + r).abs() < 1e-15);
        assert_eq!(*out.get(0, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn complex_phase_and_unitary_form_agree() {
        let h = Matrix::hermitian(
            3,
            vec![
                C64::new(0.4, 0.0),
                C64::new(0.1, -0.2),
                C64::new(0.05, 0.3),
                C64::new(0.1, 0.2),
                C64::new(-0.3, 0.0),
                C64::new(0.2, 0.1),
                C64::new(0.05, -0.3),
                C64::new(0.2, -0.1),
                C64::new(0.1, 0.0),
            ],
        )
        .unwrap();
        let g = make_givens(&h, 0, 1).unwrap();
        assert!(g.s.re >= 0.0 && g.s.im == 0.0);
        let w = C64::from_polar(g.s.re, -g.phi);
        assert!((w - g.w()).norm() < 1e-15);
        let fast = apply_givens(&h, &g).unwrap();
        let u = g.unitary(3);
        let slow = crate::linalg::conjugate(&u, &h).unwrap();
        let grouped = apply_givens_unchecked(&h, &g).unwrap();
        assert!(fast.sub(&slow).unwrap().max_abs() < 1e-15);
        assert!(grouped.sub(&slow).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn stale_rotation_detected() {
        let h = real(&[&[1.0, 0.1, 0.2], &[0.1, 0.0, 0.3], &[0.2, 0.3, -1.0]]);
        let g = make_givens(&h, 0, 1).unwrap();
        let moved = apply_givens(&h, &make_givens(&h, 0, 2).unwrap()).unwrap();
        assert!(matches!(
            apply_givens(&moved, &g),
            Err(Error::StaleRotation { .. })
        ));
        assert!(apply_givens_unchecked(&moved, &g).is_ok());
    }

    #[test]
    fn pivot_rules() {
        let diag = real(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let mut sel = PivotSelector::new(PivotStrategy::Largest);
        assert_eq!(select_pivot(&diag, &mut sel, 0.0), None);

        let mut h = real(&[
            &[0.0, 0.1, 0.1, 0.0],
            &[0.1, 0.0, 0.0, 0.9],
            &[0.1, 0.0, 0.0, 0.0],
            &[0.0, 0.9, 0.0, 0.0],
        ]);
        assert_eq!(select_pivot(&h, &mut sel, 0.0), Some((1, 3)));
        h.set(1, 3, C64::new(0.0, 0.0));
        h.set(3, 1, C64::new(0.0, 0.0));
        assert_eq!(select_pivot(&h, &mut sel, 0.0), Some((0, 1)));

        let mut cyc = PivotSelector::new(PivotStrategy::Cyclic);
        assert_eq!(select_pivot(&h, &mut cyc, 0.0), Some((0, 1)));
        assert_eq!(select_pivot(&h, &mut cyc, 0.0), Some((0, 2)));
        assert_eq!(select_pivot(&h, &mut cyc, 0.0), Some((0, 1)));

        let mut fixed = PivotSelector::new(PivotStrategy::Fixed(vec![(2, 3), (0, 1)]));
        assert_eq!(select_pivot(&h, &mut fixed, 0.0), Some((2, 3)));
        assert_eq!(select_pivot(&h, &mut fixed, 0.0), Some((0, 1)));
        assert_eq!(select_pivot(&h, &mut fixed, 0.0), None);
    }

    #[test]
    fn pair_enumeration() {
        let n = 5;
        let all: Vec<_> = (0..10).map(|i| pair_at(i, n)).collect();
        let expect: Vec<_> = (0..n)
            .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
            .collect();
        assert_eq!(all, expect);
    }
}
