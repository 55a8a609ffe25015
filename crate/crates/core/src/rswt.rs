//! Recursive Schrieffer-Wolff transformation.
//!
//! Each iteration splits `H_n = D_n + V_n`, builds the first-order generator
//! `S` with `[S, D_n] = -V_n`, and replaces `H_n` by the truncated BCH series
//!
//! ```text
//!     H_{n+1} = D_n + sum_{t=1}^{m-1} t/(t+1)! C_t(S, V_n)
//! ```
//!
//! with `C_0(S, V) = V`, `C_{t+1} = [S, C_t]`. Every iteration squares the
//! order of the remaining coupling, so the schedule `m = K, K/2, K/4, ...`
//! reaches order `K` in about `log2 K` iterations.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{to_graph_json, Expr, GraphJson, Kind};
use crate::linalg::{nested_commutators, spectral_norm, Matrix};
use crate::npad::block_index;
use crate::scalar::{Scalar, C64};

/// Gaps at or below this magnitude are treated as degenerate.
pub const DEGENERATE_GAP_FLOOR: f64 = 1e-12;

/// Anti-Hermitian first-order generator.
#[derive(Clone, Debug)]
pub struct Generator<T> {
    pub s: Matrix<T>,
    /// Pairs `j < k` with a nonzero entry.
    pub support: Vec<(usize, usize)>,
}

/// Builds `S[j][k] = H[j][k] / (H[j][j] - H[k][k])` on the given pairs (all
/// nonzero off-diagonal pairs when `pairs` is `None`).
pub fn build_generator<T: Scalar>(h: &Matrix<T>, pairs: Option<&[(usize, usize)]>) -> Result<Generator<T>> {
    let n = h.dim();
    let all: Vec<(usize, usize)>;
    let pairs = match pairs {
        Some(p) => p,
        None => {
            all = (0..n)
                .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
                .collect();
            &all
        }
    };
    let mut s = Matrix::zeros(n);
    let mut support = Vec::new();
    for &(a, b) in pairs {
        if a == b {
            return Err(Error::DiagonalPair(a));
        }
        if a >= n || b >= n {
            return Err(Error::IndexOutOfRange(a, b, n));
        }
        let (j, k) = (a.min(b), a.max(b));
        let v = h.get(j, k);
        if v.is_zero() {
            continue;
        }
        let gap = h.get(j, j).clone() - h.get(k, k).clone();
        if let Some(g) = gap.value() {
            if g.norm() <= DEGENERATE_GAP_FLOOR {
                return Err(Error::DegenerateGap { j, k, gap: g.norm() });
            }
        }
        let sjk = v.clone() / gap;
        s.set(k, j, -sjk.conj());
        s.set(j, k, sjk);
        support.push((j, k));
    }
    Ok(Generator { s, support })
}

/// How an iteration treats the couplings.
#[derive(Clone, Debug, PartialEq)]
pub enum RswtMode {
    /// Eliminate every off-diagonal coupling.
    Full,
    /// Eliminate only couplings between different blocks of the partition;
    /// intra-block couplings are carried along.
    Block(Vec<Vec<usize>>),
}

/// Iteration schedule for target order `K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RswtPlan {
    pub order: usize,
    pub n_max: usize,
    pub m_schedule: Vec<usize>,
}

impl RswtPlan {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::OrderTooLow(order));
        }
        let n_max = (usize::BITS - 1 - order.leading_zeros()) as usize;
        let m_schedule = (0..n_max).map(|n| order >> n).collect();
        Ok(Self {
            order,
            n_max,
            m_schedule,
        })
    }
}

/// One iteration of the recursion.
#[derive(Clone, Debug)]
pub struct RswtRecord<T> {
    pub m: usize,
    pub d: Matrix<T>,
    pub v: Matrix<T>,
    pub s: Matrix<T>,
    pub h_next: Matrix<T>,
    pub commutators: usize,
}

#[derive(Clone, Debug)]
pub struct RswtTrace<T> {
    pub plan: RswtPlan,
    pub records: Vec<RswtRecord<T>>,
    /// Spectral norm of the first generator, when numeric.
    pub s1_norm: Option<f64>,
    /// Set when `s1_norm >= 1/2`, outside the regime where the truncation
    /// bound holds.
    pub bound_warning: bool,
}

impl<T: Scalar> RswtTrace<T> {
    pub fn commutators(&self) -> usize {
        self.records.iter().map(|r| r.commutators).sum()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `sum_t coeff(t) C_t` over `t` in `range`, skipping the accumulation when a
/// term is structurally zero.
fn weighted_sum<T: Scalar>(
    base: Matrix<T>,
    terms: &[Matrix<T>],
    range: std::ops::RangeInclusive<usize>,
    coeff: impl Fn(usize) -> f64,
) -> Result<Matrix<T>> {
    let mut acc = base;
    for t in range {
        let term = &terms[t];
        if term.is_structurally_diagonal() && term.diagonal().iter().all(Scalar::is_zero) {
            continue;
        }
        acc = acc.add(&term.scale_f64(coeff(t)))?;
    }
    Ok(acc)
}

fn split_block<T: Scalar>(v: &Matrix<T>, block: &[usize]) -> (Matrix<T>, Matrix<T>) {
    let n = v.dim();
    let inter = Matrix::from_fn(n, |j, k| {
        if block[j] != block[k] {
            v.get(j, k).clone()
        } else {
            T::zero()
        }
    });
    let intra = Matrix::from_fn(n, |j, k| {
        if block[j] == block[k] {
            v.get(j, k).clone()
        } else {
            T::zero()
        }
    });
    (inter, intra)
}

/// One truncated BCH iteration at level `m`.
pub fn rswt_step<T: Scalar>(h: &Matrix<T>, m: usize, mode: &RswtMode) -> Result<RswtRecord<T>> {
    if m < 1 {
        return Err(Error::TruncationTooLow);
    }
    let d = h.diagonal_part();
    let v = h.offdiagonal_part();
    match mode {
        RswtMode::Full => {
            let gen = build_generator(h, None)?;
            let c = nested_commutators(&gen.s, &v, m - 1)?;
            let h_next = weighted_sum(d.clone(), &c, 1..=m - 1, |t| t as f64 / factorial(t + 1))?;
            Ok(RswtRecord {
                m,
                d,
                v,
                s: gen.s,
                h_next,
                commutators: m - 1,
            })
        }
        RswtMode::Block(partition) => {
            let block = block_index(partition, h.dim())?;
            let (inter, intra) = split_block(&v, &block);
            let n = h.dim();
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
                .filter(|&(j, k)| block[j] != block[k])
                .collect();
            let gen = build_generator(h, Some(&pairs))?;
            let ci = nested_commutators(&gen.s, &inter, m - 1)?;
            let ca = nested_commutators(&gen.s, &intra, m)?;
            let h_next = weighted_sum(d.clone(), &ci, 1..=m - 1, |t| t as f64 / factorial(t + 1))?;
            let h_next = weighted_sum(h_next, &ca, 0..=m, |t| 1.0 / factorial(t))?;
            Ok(RswtRecord {
                m,
                d,
                v,
                s: gen.s,
                h_next,
                commutators: (m - 1) + m,
            })
        }
    }
}

fn numeric<T: Scalar>(m: &Matrix<T>) -> Option<Matrix<C64>> {
    let data = m
        .entries()
        .iter()
        .map(|x| x.value())
        .collect::<Option<Vec<_>>>()?;
    Matrix::from_vec(m.dim(), data).ok()
}

/// Runs the full schedule for target order `K`.
pub fn rswt<T: Scalar>(h: &Matrix<T>, order: usize, mode: &RswtMode) -> Result<(Matrix<T>, RswtTrace<T>)> {
    let plan = RswtPlan::new(order)?;
    let mut current = h.clone();
    let mut records = Vec::with_capacity(plan.n_max);
    for &m in &plan.m_schedule {
        let rec = rswt_step(&current, m, mode)?;
        current = rec.h_next.clone();
        records.push(rec);
    }
    let s1_norm = records
        .first()
        .and_then(|r| numeric(&r.s))
        .and_then(|s| spectral_norm(&s).ok());
    Ok((
        current,
        RswtTrace {
            plan,
            records,
            s1_norm,
            bound_warning: s1_norm.map_or(false, |x| x >= 0.5),
        },
    ))
}

/// Leading-order Schrieffer-Wolff: one iteration truncated at `m = 2`.
pub fn swt_leading_order<T: Scalar>(h: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(rswt_step(h, 2, &RswtMode::Full)?.h_next)
}

/// Upper bound on the truncation error of one iteration,
/// `(2^m / m!) ||S||^m / (1 - ||S||) ||V||`, valid for `||S|| < 1/2`.
pub fn truncation_error_bound(s_norm: f64, v_norm: f64, m: usize) -> Result<f64> {
    if !(s_norm < 0.5) {
        return Err(Error::BoundHypothesis(s_norm));
    }
    if m < 1 {
        return Err(Error::TruncationTooLow);
    }
    Ok(2f64.powi(m as i32) / factorial(m) * s_norm.powi(m as i32) / (1.0 - s_norm) * v_norm)
}

/// Commutators needed by a direct Schrieffer-Wolff expansion to order `K`:
/// `2^K - K - 1`.
pub fn commutator_count_swt(order: usize) -> Result<u128> {
    if order < 2 {
        return Err(Error::OrderTooLow(order));
    }
    if order >= 128 {
        return Err(Error::InvalidParams(format!("order {order} overflows the count")));
    }
    Ok((1u128 << order) - order as u128 - 1)
}

/// Commutators needed by the recursive scheme to order `K`:
/// `sum_{n=0}^{floor(log2 K)-1} (floor(K/2^n) - 1)`.
pub fn commutator_count_rswt(order: usize) -> Result<u128> {
    let plan = RswtPlan::new(order)?;
    Ok(plan.m_schedule.iter().map(|&m| (m - 1) as u128).sum())
}

#[derive(Serialize)]
struct RecordJson {
    m: usize,
    commutators: usize,
    diagonal: Vec<f64>,
    v_max: f64,
    s_max: f64,
}

#[derive(Serialize)]
struct TraceJson<'a> {
    plan: &'a RswtPlan,
    commutators: usize,
    s1_norm: Option<f64>,
    bound_warning: bool,
    records: Vec<RecordJson>,
}

impl<T: Scalar> RswtTrace<T> {
    /// Numeric summary of every iteration. Symbolic entries are reported as
    /// `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let max_abs = |m: &Matrix<T>| -> f64 {
            m.entries()
                .iter()
                .map(|x| x.value().map_or(f64::NAN, |z| z.norm()))
                .fold(0.0, f64::max)
        };
        let wire = TraceJson {
            plan: &self.plan,
            commutators: self.commutators(),
            s1_norm: self.s1_norm,
            bound_warning: self.bound_warning,
            records: self
                .records
                .iter()
                .map(|r| RecordJson {
                    m: r.m,
                    commutators: r.commutators,
                    diagonal: r
                        .h_next
                        .diagonal()
                        .iter()
                        .map(|x| x.value().map_or(f64::NAN, |z| z.re))
                        .collect(),
                    v_max: max_abs(&r.v),
                    s_max: max_abs(&r.s),
                })
                .collect(),
        };
        serde_json::to_value(wire).expect("plain numbers serialize")
    }
}

/// Layered export of a symbolic pipeline: parameters are layer 0, the
/// entries of `H_n` layer `n`, and `root` one layer past the last iteration.
/// A node keeps the earliest layer it appears in.
pub fn layered_export(trace: &RswtTrace<Expr>, root: &Expr) -> GraphJson {
    let mut layers: HashMap<u64, u32> = HashMap::new();
    let mut mark_params = vec![root.clone()];
    let mut seen = std::collections::HashSet::new();
    while let Some(e) = mark_params.pop() {
        if seen.insert(e.id()) {
            if matches!(e.kind(), Kind::Param(_)) {
                layers.insert(e.id(), 0);
            }
            mark_params.extend(e.kind().children().into_iter().cloned());
        }
    }
    for (n, rec) in trace.records.iter().enumerate() {
        for x in rec.h_next.entries() {
            if !matches!(x.kind(), Kind::Param(_) | Kind::Const(_)) {
                layers.entry(x.id()).or_insert(n as u32 + 1);
            }
        }
    }
    layers.insert(root.id(), trace.records.len() as u32 + 1);
    to_graph_json(root, &layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level(lam: f64) -> Matrix<C64> {
        let r = |x: f64| C64::new(x, 0.0);
        Matrix::from_rows(vec![vec![r(1.0), r(lam)], vec![r(lam), r(-1.0)]]).unwrap()
    }

    #[test]
    fn generator_of_two_level() {
        let g = build_generator(&two_level(0.3), None).unwrap();
        assert!((g.s.get(0, 1).re - 0.15).abs() < 1e-16);
        assert!((g.s.get(1, 0).re + 0.15).abs() < 1e-16);
        let diag = Matrix::from_diagonal(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        assert!(build_generator(&diag, None).unwrap().support.is_empty());
    }

    #[test]
    fn degenerate_gap_rejected() {
        let r = |x: f64| C64::new(x, 0.0);
        let h = Matrix::from_rows(vec![vec![r(1.0), r(0.1)], vec![r(0.1), r(1.0)]]).unwrap();
        assert!(matches!(
            build_generator(&h, None),
            Err(Error::DegenerateGap { j: 0, k: 1, .. })
        ));
    }

    #[test]
    fn second_order_two_level() {
        let lam = 0.1;
        let h1 = rswt_step(&two_level(lam), 2, &RswtMode::Full).unwrap().h_next;
        assert!((h1.get(0, 0).re - (1.0 + lam * lam / 2.0)).abs() < 1e-15);
        assert!((h1.get(1, 1).re + (1.0 + lam * lam / 2.0)).abs() < 1e-15);
        let err = (h1.get(0, 0).re - (1.0f64 + lam * lam).sqrt()).abs();
        assert!((err - 1.25e-5).abs() < 1e-7, "{err}");
    }

    #[test]
    fn level_one_is_bare_diagonal() {
        let h = two_level(0.2);
        let rec = rswt_step(&h, 1, &RswtMode::Full).unwrap();
        assert_eq!(rec.h_next, h.diagonal_part());
        assert_eq!(rec.commutators, 0);
    }

    #[test]
    fn block_without_inter_coupling() {
        let h = two_level(0.2);
        let rec = rswt_step(&h, 3, &RswtMode::Block(vec![vec![0, 1]])).unwrap();
        assert_eq!(rec.h_next, h);
    }

    #[test]
    fn plan_schedule() {
        let p = RswtPlan::new(6).unwrap();
        assert_eq!(p.n_max, 2);
        assert_eq!(p.m_schedule, vec![6, 3]);
        assert!(matches!(RswtPlan::new(1), Err(Error::OrderTooLow(1))));
    }

    #[test]
    fn counts_table() {
        let swt: Vec<u128> = (2..=8).map(|k| commutator_count_swt(k).unwrap()).collect();
        let rec: Vec<u128> = (2..=8).map(|k| commutator_count_rswt(k).unwrap()).collect();
        assert_eq!(swt, vec![1, 4, 11, 26, 57, 120, 247]);
        assert_eq!(rec, vec![1, 2, 4, 5, 7, 8, 11]);
    }

    #[test]
    fn bound_values() {
        assert_eq!(truncation_error_bound(0.0, 1.0, 3).unwrap(), 0.0);
        let b = truncation_error_bound(0.1, 1.0, 2).unwrap();
        assert!((b - 0.02222222222222).abs() < 1e-12);
        assert!(matches!(
            truncation_error_bound(0.5, 1.0, 2),
            Err(Error::BoundHypothesis(_))
        ));
    }

    #[test]
    fn order_two_equals_leading_order() {
        let h = two_level(0.05);
        let (a, trace) = rswt(&h, 2, &RswtMode::Full).unwrap();
        assert_eq!(a, swt_leading_order(&h).unwrap());
        assert_eq!(trace.commutators(), 1);
    }
}
