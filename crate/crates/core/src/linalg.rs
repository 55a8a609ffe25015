//! Dense square matrices over any [`Scalar`], plus the Jacobi eigensolver that
//! serves as the brute-force reference for everything else in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{NumericScalar, Scalar, C64};

/// Relative asymmetry tolerated (and symmetrized away) by [`Matrix::hermitian`].
pub const HERMITIAN_RTOL: f64 = 1e-12;

/// A dense `dim x dim` matrix stored row-major.
///
/// The same type carries Hermitian operators (H, D, V), anti-Hermitian
/// generators (S) and general unitaries; Hermiticity is checked only where a
/// constructor promises it.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<T>,
}

/// Alias used where a matrix is expected to be Hermitian.
pub type HermitianMatrix<T> = Matrix<T>;

/// Per-subsystem excitation numbers, e.g. `[l, p, q]`.
pub type BasisLabel = Vec<usize>;

impl<T: Scalar> Matrix<T> {
    /// Builds a matrix from row-major entries without any symmetry check.
    pub fn from_vec(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::EntryCount {
                dim,
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::EntryCount {
                    dim,
                    expected: dim * dim,
                    got: row.len() * dim,
                });
            }
            data.extend(row);
        }
        Self::from_vec(dim, data)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                data.push(f(j, k));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| T::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |j, k| if j == k { T::one() } else { T::zero() })
    }

    pub fn from_diagonal(diag: Vec<T>) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (j, d) in diag.into_iter().enumerate() {
            m.data[j * dim + j] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize) -> &T {
        &self.data[j * self.dim + k]
    }

    pub fn set(&mut self, j: usize, k: usize, value: T) {
        self.data[j * self.dim + k] = value;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<T> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|j| self.get(j, j).clone()).collect()
    }

    /// `D`: the diagonal part, off-diagonal entries zeroed.
    pub fn diagonal_part(&self) -> Self {
        Self::from_fn(self.dim, |j, k| {
            if j == k {
                self.get(j, j).clone()
            } else {
                T::zero()
            }
        })
    }

    /// `V`: the off-diagonal part, diagonal entries zeroed.
    pub fn offdiagonal_part(&self) -> Self {
        Self::from_fn(self.dim, |j, k| {
            if j == k {
                T::zero()
            } else {
                self.get(j, k).clone()
            }
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self.get(k, j).conj())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip(other, |a, b| a.clone() - b.clone()))
    }

    fn zip(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &T) -> Self {
        self.map(|x| {
            if x.is_zero() {
                T::zero()
            } else {
                x.clone() * factor.clone()
            }
        })
    }

    pub fn scale_f64(&self, factor: f64) -> Self {
        self.scale(&T::from_f64(factor))
    }

    /// Matrix product. Structurally zero factors are skipped, which keeps
    /// expression graphs from filling up with `0 * x` terms.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out: Vec<Option<T>> = vec![None; n * n];
        for i in 0..n {
            for m in 0..n {
                let a = self.get(i, m);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(m, j);
                    if b.is_zero() {
                        continue;
                    }
                    let term = a.clone() * b.clone();
                    let slot = &mut out[i * n + j];
                    *slot = Some(match slot.take() {
                        None => term,
                        Some(acc) => acc + term,
                    });
                }
            }
        }
        Ok(Self {
            dim: n,
            data: out.into_iter().map(|x| x.unwrap_or_else(T::zero)).collect(),
        })
    }

    pub fn is_structurally_diagonal(&self) -> bool {
        (0..self.dim).all(|j| (0..self.dim).all(|k| j == k || self.get(j, k).is_zero()))
    }
}

impl<T: NumericScalar> Matrix<T> {
    /// Builds a numeric Hermitian matrix. Asymmetry below [`HERMITIAN_RTOL`]
    /// (relative to the largest entry) is averaged away; anything larger is
    /// rejected.
    pub fn hermitian(dim: usize, data: Vec<T>) -> Result<Self> {
        let m = Self::from_vec(dim, data)?;
        m.symmetrized()
    }

    /// Validates Hermiticity and returns `(M + M^dagger) / 2`.
    pub fn symmetrized(&self) -> Result<Self> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let half = T::from_f64(0.5);
        let mut out = self.clone();
        for j in 0..self.dim {
            for k in j..self.dim {
                let a = *self.get(j, k);
                let b = self.get(k, j).conj();
                let deviation = (a - b).modulus();
                if deviation > HERMITIAN_RTOL * scale {
                    return Err(Error::NotHermitian {
                        row: j,
                        col: k,
                        deviation,
                    });
                }
                let avg = (a + b) * half;
                out.set(j, k, avg);
                out.set(k, j, avg.conj());
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.modulus().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest deviation `|M[j][k] - conj(M[k][j])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.dim {
            for k in 0..self.dim {
                worst = worst.max((*self.get(j, k) - self.get(k, j).conj()).modulus());
            }
        }
        worst
    }

    pub fn to_c64(&self) -> Matrix<C64> {
        self.map(|x| x.to_c64())
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|j| self.get(j, j).real()).collect()
    }
}

/// `AB - BA`.
pub fn commutator<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    ab.sub(&ba)
}

/// `C_0 .. C_m` with `C_0 = B` and `C_{t+1} = [A, C_t]`; costs exactly `m`
/// commutator evaluations.
pub fn nested_commutators<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    m: usize,
) -> Result<Vec<Matrix<T>>> {
    a.check_dim(b)?;
    let mut out = Vec::with_capacity(m + 1);
    out.push(b.clone());
    for t in 0..m {
        let next = commutator(a, &out[t])?;
        out.push(next);
    }
    Ok(out)
}

/// `C_t(A, B)`.
pub fn nested_commutator<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, t: usize) -> Result<Matrix<T>> {
    Ok(nested_commutators(a, b, t)?.pop().expect("at least C_0"))
}

/// Sum of `|H[m][n]|^2` over `m != n`, i.e. the squared off-diagonal
/// Frobenius norm.
pub fn offdiag_norm_sq<T: NumericScalar>(h: &Matrix<T>) -> f64 {
    let n = h.dim();
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                acc += h.get(j, k).modulus().powi(2);
            }
        }
    }
    acc
}

/// Result of [`eig_oracle`].
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary `U` with `U H U^dagger = diag(values)`; row `i` is the
    /// conjugated `i`-th eigenvector.
    pub unitary: Matrix<C64>,
    pub sweeps: usize,
}

impl Eigen {
    /// Components of the `i`-th eigenvector in the original basis.
    pub fn vector(&self, i: usize) -> Vec<C64> {
        (0..self.values.len())
            .map(|a| self.unitary.get(i, a).conj())
            .collect()
    }
}

pub const EIG_MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi eigensolver, run to machine precision.
pub fn eig_oracle<T: NumericScalar>(h: &Matrix<T>) -> Result<Eigen> {
    eig_oracle_with(h, EIG_MAX_SWEEPS)
}

pub fn eig_oracle_with<T: NumericScalar>(h: &Matrix<T>, max_sweeps: usize) -> Result<Eigen> {
    let n = h.dim();
    let mut a: Vec<C64> = h.entries().iter().map(|x| x.to_c64()).collect();
    let mut v: Vec<C64> = Matrix::<C64>::identity(n).into_entries();
    let norm = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let target = f64::EPSILON * norm;
    let off = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    s += a[j * n + k].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let residual = off(&a);
        if residual <= target || norm == 0.0 {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        sweeps += 1;
        let skip = f64::EPSILON * norm / (n as f64 * 16.0);
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= skip {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = phase.conj();
                // Q = [[c, s], [-s e, c e]] acting on (p, q).
                let qpp = C64::new(c, 0.0);
                let qpq = C64::new(s, 0.0);
                let qqp = -e * s;
                let qqq = e * c;
                for r in 0..n {
                    let x = a[r * n + p];
                    let y = a[r * n + q];
                    a[r * n + p] = x * qpp + y * qqp;
                    a[r * n + q] = x * qpq + y * qqq;
                    let x = v[r * n + p];
                    let y = v[r * n + q];
                    v[r * n + p] = x * qpp + y * qqp;
                    v[r * n + q] = x * qpq + y * qqq;
                }
                for col in 0..n {
                    let x = a[p * n + col];
                    let y = a[q * n + col];
                    a[p * n + col] = qpp.conj() * x + qqp.conj() * y;
                    a[q * n + col] = qpq.conj() * x + qqq.conj() * y;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p] = C64::new(app - t * mag, 0.0);
                a[q * n + q] = C64::new(aqq + t * mag, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].re.total_cmp(&a[y * n + y].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    // Row i of U is the conjugate of column order[i] of V.
    let unitary = Matrix::from_fn(n, |i, col| v[col * n + order[i]].conj());
    Ok(Eigen {
        values,
        unitary,
        sweeps,
    })
}

/// Largest singular value, via the eigenvalues of `M^dagger M`.
pub fn spectral_norm<T: NumericScalar>(m: &Matrix<T>) -> Result<f64> {
    let c = m.to_c64();
    let gram = c.adjoint().matmul(&c)?;
    let eig = eig_oracle(&gram)?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// `e^S` for anti-Hermitian `S`, using the eigen-decomposition of `iS`.
pub fn expm_antihermitian(s: &Matrix<C64>) -> Result<Matrix<C64>> {
    let is = s.scale(&C64::new(0.0, 1.0)).symmetrized()?;
    let eig = eig_oracle(&is)?;
    let n = s.dim();
    // iS = U^dagger diag(l) U, so S = U^dagger diag(-i l) U.
    let u = &eig.unitary;
    Ok(Matrix::from_fn(n, |j, k| {
        let mut acc = C64::new(0.0, 0.0);
        for (i, &l) in eig.values.iter().enumerate() {
            acc += u.get(i, j).conj() * C64::from_polar(1.0, -l) * u.get(i, k);
        }
        acc
    }))
}

/// Conjugation `U H U^dagger`.
pub fn conjugate<T: Scalar>(u: &Matrix<T>, h: &Matrix<T>) -> Result<Matrix<T>> {
    u.matmul(h)?.matmul(&u.adjoint())
}

/// `I (x) ... (x) op (x) ... (x) I` with lexicographic basis ordering over `dims`.
pub fn embed_operator<T: Scalar>(op: &Matrix<T>, slot: usize, dims: &[usize]) -> Result<Matrix<T>> {
    if slot >= dims.len() {
        return Err(Error::SlotOutOfRange {
            slot,
            count: dims.len(),
        });
    }
    if op.dim() != dims[slot] {
        return Err(Error::DimensionMismatch {
            left: op.dim(),
            right: dims[slot],
        });
    }
    let inner: usize = dims[slot + 1..].iter().product();
    let level = dims[slot];
    let total: usize = dims.iter().product();
    Ok(Matrix::from_fn(total, |j, k| {
        let (jo, js, ji) = (j / (level * inner), (j / inner) % level, j % inner);
        let (ko, ks, ki) = (k / (level * inner), (k / inner) % level, k % inner);
        if jo == ko && ji == ki {
            op.get(js, ks).clone()
        } else {
            T::zero()
        }
    }))
}

/// Ladder operator `b` with `b|n> = sqrt(n)|n-1>`.
pub fn annihilation<T: Scalar>(levels: usize) -> Matrix<T> {
    Matrix::from_fn(levels, |j, k| {
        if k == j + 1 {
            T::from_f64((k as f64).sqrt())
        } else {
            T::zero()
        }
    })
}

/// `b^dagger b`.
pub fn number<T: Scalar>(levels: usize) -> Matrix<T> {
    Matrix::from_diagonal((0..levels).map(|n| T::from_f64(n as f64)).collect())
}

pub fn basis_labels(dims: &[usize]) -> Vec<BasisLabel> {
    let total: usize = dims.iter().product();
    (0..total).map(|i| index_to_label(i, dims)).collect()
}

pub fn index_to_label(mut index: usize, dims: &[usize]) -> BasisLabel {
    let mut label = vec![0; dims.len()];
    for (slot, &d) in dims.iter().enumerate().rev() {
        label[slot] = index % d;
        index /= d;
    }
    label
}

pub fn label_to_index(label: &[usize], dims: &[usize]) -> Result<usize> {
    if label.len() != dims.len() {
        return Err(Error::DimensionMismatch {
            left: label.len(),
            right: dims.len(),
        });
    }
    let mut index = 0;
    for (slot, (&l, &d)) in label.iter().zip(dims).enumerate() {
        if l >= d {
            return Err(Error::IndexOutOfRange(slot, l, d));
        }
        index = index * d + l;
    }
    Ok(index)
}

/// Wire form: `{"dim": n, "entries": [[re, im], ...]}`.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&Matrix<C64>> for MatrixJson {
    fn from(m: &Matrix<C64>) -> Self {
        MatrixJson {
            dim: m.dim(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl MatrixJson {
    /// Converts to a matrix, validating Hermiticity.
    pub fn into_hermitian(self) -> Result<Matrix<C64>> {
        let data = self
            .entries
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        Matrix::hermitian(self.dim, data)
    }
}

pub fn matrix_from_json(text: &str) -> Result<Matrix<C64>> {
    let wire: MatrixJson = serde_json::from_str(text)?;
    wire.into_hermitian()
}

pub fn matrix_to_json(m: &Matrix<C64>) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("plain numbers serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pauli_commutator() {
        let a = Matrix::from_diagonal(vec![c(1.0), c(-1.0)]);
        let lam = 0.3;
        let b = Matrix::from_rows(vec![vec![c(0.0), c(lam)], vec![c(lam), c(0.0)]]).unwrap();
        let k = commutator(&a, &b).unwrap();
        assert_eq!(*k.get(0, 1), c(2.0 * lam));
        assert_eq!(*k.get(1, 0), c(-2.0 * lam));
        assert_eq!(*k.get(0, 0), c(0.0));
    }

    #[test]
    fn self_commutator_vanishes() {
        let a = Matrix::from_fn(3, |j, k| C64::new((j + 2 * k) as f64, j as f64 - k as f64));
        let z = commutator(&a, &a).unwrap();
        assert!(z.max_abs() == 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Matrix::<C64>::identity(2);
        let b = Matrix::<C64>::identity(3);
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nested_base_cases() {
        let a = Matrix::from_fn(3, |j, k| c((j * 3 + k) as f64));
        let b = Matrix::from_fn(3, |j, k| c((j + k * k) as f64));
        assert_eq!(nested_commutator(&a, &b, 0).unwrap(), b);
        assert_eq!(
            nested_commutator(&a, &b, 1).unwrap(),
            commutator(&a, &b).unwrap()
        );
    }

    #[test]
    fn offdiag_norm_two_level() {
        let g = 0.7;
        let h = Matrix::from_rows(vec![vec![c(1.0), c(g)], vec![c(g), c(-1.0)]]).unwrap();
        assert!((offdiag_norm_sq(&h) - 2.0 * g * g).abs() < 1e-15);
        assert_eq!(offdiag_norm_sq(&h.diagonal_part()), 0.0);
    }

    #[test]
    fn eig_sorts_diagonal() {
        let h = Matrix::from_diagonal(vec![c(3.0), c(1.0), c(2.0)]);
        let e = eig_oracle(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eig_bloch_radius() {
        let (d, g) = (0.4, 0.3);
        let h = Matrix::from_rows(vec![vec![c(d), c(g)], vec![c(g), c(-d)]]).unwrap();
        let e = eig_oracle(&h).unwrap();
        let r = (d * d + g * g).sqrt();
        assert!((e.values[0] + r).abs() < 1e-15);
        assert!((e.values[1] - r).abs() < 1e-15);
    }

    #[test]
    fn eig_no_convergence_reported() {
        let h = Matrix::from_fn(4, |j, k| C64::new(1.0 / (1 + j + k) as f64, 0.0));
        assert!(matches!(
            eig_oracle_with(&h, 0),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn embed_sigma_z() {
        let sz = Matrix::from_diagonal(vec![c(1.0), c(-1.0)]);
        let e = embed_operator(&sz, 0, &[2, 2]).unwrap();
        assert_eq!(e.diagonal(), vec![c(1.0), c(1.0), c(-1.0), c(-1.0)]);
        assert_eq!(embed_operator(&sz, 0, &[2]).unwrap(), sz);
        assert!(matches!(
            embed_operator(&sz, 2, &[2, 2]),
            Err(Error::SlotOutOfRange { .. })
        ));
    }

    #[test]
    fn hermitian_constructor() {
        let ok = Matrix::hermitian(2, vec![c(1.0), c(0.5), c(0.5 + 1e-14), c(2.0)]).unwrap();
        assert_eq!(*ok.get(0, 1), *ok.get(1, 0));
        assert!(matches!(
            Matrix::hermitian(2, vec![c(1.0), c(0.5), c(0.6), c(2.0)]),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            Matrix::<C64>::from_vec(0, vec![]),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn json_round_trip() {
        let h = Matrix::hermitian(
            2,
            vec![c(1.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(-1.0)],
        )
        .unwrap();
        let text = matrix_to_json(&h);
        assert_eq!(matrix_from_json(&text).unwrap(), h);
        assert!(matrix_from_json(r#"{"dim":2,"entries":[[1,0],[1,0],[0,0],[0,0]]}"#).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let dims = [3, 2, 4];
        for (i, l) in basis_labels(&dims).iter().enumerate() {
            assert_eq!(label_to_index(l, &dims).unwrap(), i);
        }
        assert!(label_to_index(&[3, 0, 0], &dims).is_err());
    }
}
