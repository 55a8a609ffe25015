use effham_core::expr::{eval, node_count, simplify, Expr, ParamEnv};
use effham_core::givens::{apply_givens, make_givens};
use effham_core::linalg::{conjugate, eig_oracle, offdiag_norm_sq, Matrix};
use effham_core::npad::{npad_diagonalize, NpadConfig};
use effham_core::rswt::{rswt, RswtMode};
use effham_core::C64;
use proptest::prelude::*;

fn hermitian(n: usize) -> impl Strategy<Value = Matrix<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        Matrix::from_fn(n, |j, k| {
            let (a, b) = v[j.min(k) * n + j.max(k)];
            match j.cmp(&k) {
                std::cmp::Ordering::Equal => C64::new(a, 0.0),
                std::cmp::Ordering::Less => C64::new(a, b),
                std::cmp::Ordering::Greater => C64::new(a, -b),
            }
        })
    })
}

fn sized_hermitian() -> impl Strategy<Value = Matrix<C64>> {
    (2usize..9).prop_flat_map(hermitian)
}

fn pivot(n: usize) -> impl Strategy<Value = (usize, usize)> {
    (0..n, 0..n).prop_filter("distinct", |(j, k)| j != k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_preserves_hermiticity((h, (j, k)) in sized_hermitian().prop_flat_map(|h| {
        let n = h.dim();
        (Just(h), pivot(n))
    })) {
        let g = make_givens(&h, j, k).unwrap();
        let out = apply_givens(&h, &g).unwrap();
        prop_assert!(out.hermiticity_defect() < 1e-14);
        prop_assert!(out.get(j, k).norm() < 1e-14);
    }

    #[test]
    fn rotation_removes_twice_the_pivot_weight((h, (j, k)) in sized_hermitian().prop_flat_map(|h| {
        let n = h.dim();
        (Just(h), pivot(n))
    })) {
        let before = offdiag_norm_sq(&h);
        let removed = 2.0 * h.get(j, k).norm_sqr();
        let g = make_givens(&h, j, k).unwrap();
        let after = offdiag_norm_sq(&apply_givens(&h, &g).unwrap());
        prop_assert!((before - removed - after).abs() <= 1e-12 * before.max(1.0));
    }

    #[test]
    fn rotation_is_unitary((h, (j, k)) in sized_hermitian().prop_flat_map(|h| {
        let n = h.dim();
        (Just(h), pivot(n))
    })) {
        let n = h.dim();
        let u = make_givens(&h, j, k).unwrap().unitary(n);
        let uu = u.matmul(&u.adjoint()).unwrap();
        let defect = uu.sub(&Matrix::identity(n)).unwrap().max_abs();
        prop_assert!(defect < 1e-14);
        // The explicit unitary reproduces the two-row update.
        let direct = apply_givens(&h, &make_givens(&h, j, k).unwrap()).unwrap();
        let via_u = conjugate(&u, &h).unwrap();
        prop_assert!(direct.sub(&via_u).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn npad_preserves_spectrum(h in sized_hermitian()) {
        let res = npad_diagonalize(&h, &NpadConfig::default()).unwrap();
        let oracle = eig_oracle(&h).unwrap().values;
        for (a, b) in res.sorted_diagonal().iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert!(res.h_final.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn rswt_output_stays_hermitian(h in (3usize..6).prop_flat_map(hermitian), order in 2usize..6) {
        // Keep the couplings small against the level spacing.
        let n = h.dim();
        let scaled = Matrix::from_fn(n, |j, k| {
            if j == k { C64::new(j as f64, 0.0) } else { h.get(j, k) * 0.05 }
        });
        let (out, _) = rswt(&scaled, order, &RswtMode::Full).unwrap();
        prop_assert!(out.hermiticity_defect() < 1e-13);
    }
}

#[derive(Clone, Debug)]
enum Tree {
    Leaf(usize),
    Const(f64),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Neg(Box<Tree>),
    Abs(Box<Tree>),
}

const NAMES: [&str; 3] = ["a", "b", "c"];

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (0usize..3).prop_map(Tree::Leaf),
        prop_oneof![Just(0.0), Just(1.0), Just(-1.0), -2.0f64..2.0].prop_map(Tree::Const),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Add(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Sub(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Mul(a.into(), b.into())),
            inner.clone().prop_map(|a| Tree::Neg(a.into())),
            inner.prop_map(|a| Tree::Abs(a.into())),
        ]
    })
}

fn build(t: &Tree) -> Expr {
    match t {
        Tree::Leaf(i) => Expr::param(NAMES[*i]),
        Tree::Const(v) => Expr::constant(*v),
        Tree::Add(a, b) => Expr::raw_add(build(a), build(b)),
        Tree::Sub(a, b) => Expr::raw_sub(build(a), build(b)),
        Tree::Mul(a, b) => Expr::raw_mul(build(a), build(b)),
        Tree::Neg(a) => Expr::raw_neg(build(a)),
        Tree::Abs(a) => Expr::raw_abs(build(a)),
    }
}

proptest! {
    #[test]
    fn simplify_keeps_the_value(t in tree(), vals in prop::array::uniform3(-3.0f64..3.0)) {
        let e = build(&t);
        let s = simplify(&e);
        let env: ParamEnv = NAMES.iter().copied().zip(vals).collect();
        let x = eval(&e, &env).unwrap();
        let y = eval(&s, &env).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{} vs {}", x, y);
        prop_assert!(node_count(&s) <= node_count(&e));
    }
}
