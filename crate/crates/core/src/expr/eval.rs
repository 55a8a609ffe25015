use std::collections::{BTreeMap, HashMap};

use super::{Expr, Kind};
use crate::error::{Error, Result};

/// Binding of parameter names to real values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, f64>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for ParamEnv {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        ParamEnv {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

/// Evaluates `e` under `env`. Shared subgraphs are evaluated once.
pub fn eval(e: &Expr, env: &ParamEnv) -> Result<f64> {
    Evaluator::new(env).eval(e)
}

/// Evaluation context whose memo persists across calls, so a batch of
/// expressions sharing subgraphs (e.g. all entries of a matrix) costs one pass.
pub struct Evaluator<'a> {
    env: &'a ParamEnv,
    memo: HashMap<u64, f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(env: &'a ParamEnv) -> Self {
        Self {
            env,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, root: &Expr) -> Result<f64> {
        if let Some(v) = self.memo.get(&root.id()) {
            return Ok(*v);
        }
        // Each frame is (node, which child of its parent it is, next child to visit).
        let mut stack: Vec<(Expr, usize, usize)> = vec![(root.clone(), 0, 0)];
        while let Some(top) = stack.last_mut() {
            let node = top.0.clone();
            let children = node.kind().children();
            if top.2 < children.len() {
                let idx = top.2;
                top.2 += 1;
                let child = children[idx];
                if !self.memo.contains_key(&child.id()) {
                    stack.push((child.clone(), idx, 0));
                }
                continue;
            }
            let arg = |i: usize| self.memo[&children[i].id()];
            let value = match node.kind() {
                Kind::Const(v) => *v,
                Kind::Param(name) => match self.env.get(name) {
                    Some(v) => v,
                    None => return Err(Error::UnboundParameter(name.to_string())),
                },
                Kind::Add(..) => arg(0) + arg(1),
                Kind::Sub(..) => arg(0) - arg(1),
                Kind::Mul(..) => arg(0) * arg(1),
                Kind::Div(..) => {
                    let d = arg(1);
                    if d == 0.0 {
                        return Err(domain("division by zero", &stack));
                    }
                    arg(0) / d
                }
                Kind::Neg(_) => -arg(0),
                Kind::Sqrt(_) => {
                    let x = arg(0);
                    if x < 0.0 {
                        return Err(domain(&format!("sqrt of negative value {x:e}"), &stack));
                    }
                    x.sqrt()
                }
                Kind::Abs(_) => arg(0).abs(),
            };
            self.memo.insert(node.id(), value);
            stack.pop();
        }
        Ok(self.memo[&root.id()])
    }
}

fn domain(what: &str, stack: &[(Expr, usize, usize)]) -> Error {
    let mut path = String::from("root");
    for (node, idx, _) in stack.iter().skip(1) {
        path.push_str(&format!("/{}:{}", idx, node.kind().name()));
    }
    Error::Domain {
        what: what.to_string(),
        path,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_value() {
        assert_eq!(eval(&Expr::constant(2.5), &ParamEnv::new()).unwrap(), 2.5);
    }

    #[test]
    fn stable_tangent_at_unit_kappa() {
        let k = Expr::param("kappa");
        let t = (Expr::sqrt(&k * &k + 1.0) - 1.0) / k;
        let v = eval(&t, &ParamEnv::new().with("kappa", 1.0)).unwrap();
        assert!((v - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((v - 0.41421356).abs() < 1e-8);
    }

    #[test]
    fn unbound_parameter_named() {
        let e = Expr::param("omega") + 1.0;
        assert_eq!(
            eval(&e, &ParamEnv::new()),
            Err(Error::UnboundParameter("omega".into()))
        );
    }

    #[test]
    fn domain_errors_carry_path() {
        let x = Expr::param("x");
        let e = Expr::constant(1.0) + Expr::sqrt(x.clone());
        match eval(&e, &ParamEnv::new().with("x", -1.0)) {
            Err(Error::Domain { path, .. }) => assert_eq!(path, "root/1:sqrt"),
            other => panic!("unexpected {other:?}"),
        }
        let d = Expr::constant(1.0) / x;
        assert!(matches!(
            eval(&d, &ParamEnv::new().with("x", 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn sign_of_symbol_fails_at_zero() {
        use crate::scalar::Scalar;
        let s = Expr::param("d").sign();
        assert_eq!(eval(&s, &ParamEnv::new().with("d", -3.0)).unwrap(), -1.0);
        assert!(eval(&s, &ParamEnv::new().with("d", 0.0)).is_err());
    }
}
