//! Immutable, hash-consed expression graphs over the reals.
//!
//! Every [`Expr`] is a handle to a node in a global deduplication table, so
//! structurally identical subtrees are always the same node. Arithmetic on
//! handles goes through folding constructors (`x + 0 -> x`, constant folding,
//! ...); the `raw_*` constructors skip folding and exist so that [`simplify`]
//! has something to do.

mod emit;
mod eval;

pub use emit::{emit, from_graph_json, parse_infix, to_graph_json, tree_size, Format, GraphJson, GraphNode};
pub use eval::{eval, Evaluator, ParamEnv};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, Weak};

use once_cell::sync::Lazy;

use crate::scalar::{Scalar, C64};

/// Node payload. Children are handles, so the graph is acyclic by
/// construction.
#[derive(Clone, Debug)]
pub enum Kind {
    Const(f64),
    Param(Arc<str>),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Sqrt(Expr),
    Abs(Expr),
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Const(_) => "const",
            Kind::Param(_) => "param",
            Kind::Add(..) => "add",
            Kind::Sub(..) => "sub",
            Kind::Mul(..) => "mul",
            Kind::Div(..) => "div",
            Kind::Neg(_) => "neg",
            Kind::Sqrt(_) => "sqrt",
            Kind::Abs(_) => "abs",
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Kind::Const(_) | Kind::Param(_) => vec![],
            Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => vec![a, b],
            Kind::Neg(a) | Kind::Sqrt(a) | Kind::Abs(a) => vec![a],
        }
    }

    fn take_children(&mut self, out: &mut Vec<Expr>) {
        match std::mem::replace(self, Kind::Const(0.0)) {
            Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => {
                out.push(a);
                out.push(b);
            }
            Kind::Neg(a) | Kind::Sqrt(a) | Kind::Abs(a) => out.push(a),
            Kind::Const(_) | Kind::Param(_) => {}
        }
    }
}

#[derive(Debug)]
pub struct Node {
    id: u64,
    kind: Kind,
}

impl Drop for Node {
    // Long chains would otherwise overflow the stack through recursive drops.
    fn drop(&mut self) {
        let mut stack = Vec::new();
        self.kind.take_children(&mut stack);
        while let Some(e) = stack.pop() {
            if let Ok(mut node) = Arc::try_unwrap(e.0) {
                node.kind.take_children(&mut stack);
            }
        }
    }
}

/// Shared handle to an expression node. Equality and hashing are by node
/// identity, which hash-consing makes equivalent to structural equality.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for Expr {}
impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Param(Arc<str>),
    Binary(u8, u64, u64),
    Unary(u8, u64),
}

struct Interner {
    table: HashMap<Key, Weak<Node>>,
    prune_at: usize,
}

static INTERNER: Lazy<Mutex<Interner>> = Lazy::new(|| {
    Mutex::new(Interner {
        table: HashMap::new(),
        prune_at: 1 << 16,
    })
});
static NEXT_ID: AtomicU64 = AtomicU64::new(0);

fn key_of(kind: &Kind) -> Key {
    match kind {
        Kind::Const(v) => {
            let v = if *v == 0.0 { 0.0 } else { *v };
            Key::Const(v.to_bits())
        }
        Kind::Param(n) => Key::Param(n.clone()),
        Kind::Add(a, b) => Key::Binary(0, a.id(), b.id()),
        Kind::Sub(a, b) => Key::Binary(1, a.id(), b.id()),
        Kind::Mul(a, b) => Key::Binary(2, a.id(), b.id()),
        Kind::Div(a, b) => Key::Binary(3, a.id(), b.id()),
        Kind::Neg(a) => Key::Unary(0, a.id()),
        Kind::Sqrt(a) => Key::Unary(1, a.id()),
        Kind::Abs(a) => Key::Unary(2, a.id()),
    }
}

fn intern(kind: Kind) -> Expr {
    let kind = match kind {
        Kind::Const(v) if v == 0.0 => Kind::Const(0.0),
        k => k,
    };
    let key = key_of(&kind);
    let mut guard = INTERNER.lock().unwrap_or_else(|p| p.into_inner());
    if let Some(node) = guard.table.get(&key).and_then(Weak::upgrade) {
        return Expr(node);
    }
    if guard.table.len() >= guard.prune_at {
        guard.table.retain(|_, w| w.strong_count() > 0);
        guard.prune_at = (guard.table.len() * 2).max(1 << 16);
    }
    let node = Arc::new(Node {
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        kind,
    });
    guard.table.insert(key, Arc::downgrade(&node));
    Expr(node)
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        intern(Kind::Const(v))
    }

    pub fn param(name: &str) -> Self {
        intern(Kind::Param(Arc::from(name)))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.kind() {
            Kind::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }

    pub fn raw_add(a: Expr, b: Expr) -> Self {
        intern(Kind::Add(a, b))
    }
    pub fn raw_sub(a: Expr, b: Expr) -> Self {
        intern(Kind::Sub(a, b))
    }
    pub fn raw_mul(a: Expr, b: Expr) -> Self {
        intern(Kind::Mul(a, b))
    }
    pub fn raw_div(a: Expr, b: Expr) -> Self {
        intern(Kind::Div(a, b))
    }
    pub fn raw_neg(a: Expr) -> Self {
        intern(Kind::Neg(a))
    }
    pub fn raw_sqrt(a: Expr) -> Self {
        intern(Kind::Sqrt(a))
    }
    pub fn raw_abs(a: Expr) -> Self {
        intern(Kind::Abs(a))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => match b.kind() {
                Kind::Neg(inner) => Expr::sub(a, inner.clone()),
                _ => Expr::raw_add(a, b),
            },
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (_, Some(y)) if y == 0.0 => a,
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            _ if a == b => Expr::constant(0.0),
            _ => match b.kind() {
                Kind::Neg(inner) => Expr::add(a, inner.clone()),
                _ => Expr::raw_sub(a, b),
            },
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::constant(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::raw_mul(a, b),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
            (_, Some(y)) if y == 1.0 => a,
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            (Some(x), _) if x == 0.0 => Expr::constant(0.0),
            _ => Expr::raw_div(a, b),
        }
    }

    pub fn neg(a: Expr) -> Self {
        if let Some(x) = a.as_const() {
            return Expr::constant(-x);
        }
        match a.kind() {
            Kind::Neg(inner) => inner.clone(),
            _ => Expr::raw_neg(a),
        }
    }

    pub fn sqrt(a: Expr) -> Self {
        match a.as_const() {
            Some(x) if x >= 0.0 => Expr::constant(x.sqrt()),
            _ => Expr::raw_sqrt(a),
        }
    }

    pub fn abs(a: Expr) -> Self {
        if let Some(x) = a.as_const() {
            return Expr::constant(x.abs());
        }
        match a.kind() {
            Kind::Abs(_) | Kind::Sqrt(_) => a,
            Kind::Neg(inner) => Expr::abs(inner.clone()),
            _ => Expr::raw_abs(a),
        }
    }
}

/// Rebuilds `e` bottom-up through the folding constructors.
pub fn simplify(e: &Expr) -> Expr {
    let mut done: HashMap<u64, Expr> = HashMap::new();
    let mut stack: Vec<(Expr, bool)> = vec![(e.clone(), false)];
    while let Some((node, expanded)) = stack.pop() {
        if done.contains_key(&node.id()) {
            continue;
        }
        if !expanded {
            stack.push((node.clone(), true));
            for c in node.kind().children() {
                if !done.contains_key(&c.id()) {
                    stack.push((c.clone(), false));
                }
            }
            continue;
        }
        let get = |c: &Expr| done[&c.id()].clone();
        let out = match node.kind() {
            Kind::Const(_) | Kind::Param(_) => node.clone(),
            Kind::Add(a, b) => Expr::add(get(a), get(b)),
            Kind::Sub(a, b) => Expr::sub(get(a), get(b)),
            Kind::Mul(a, b) => Expr::mul(get(a), get(b)),
            Kind::Div(a, b) => Expr::div(get(a), get(b)),
            Kind::Neg(a) => Expr::neg(get(a)),
            Kind::Sqrt(a) => Expr::sqrt(get(a)),
            Kind::Abs(a) => Expr::abs(get(a)),
        };
        done.insert(node.id(), out);
    }
    done.remove(&e.id()).expect("root simplified")
}

/// Number of distinct nodes reachable from `e`.
pub fn node_count(e: &Expr) -> usize {
    node_count_many(std::slice::from_ref(e))
}

/// Number of distinct nodes reachable from any of `roots`.
pub fn node_count_many(roots: &[Expr]) -> usize {
    let mut seen = HashSet::new();
    let mut stack: Vec<&Expr> = roots.iter().collect();
    while let Some(e) = stack.pop() {
        if seen.insert(e.id()) {
            stack.extend(e.kind().children());
        }
    }
    seen.len()
}

/// Names of all parameters reachable from `e`, sorted.
pub fn parameters(e: &Expr) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut names = std::collections::BTreeSet::new();
    let mut stack = vec![e];
    while let Some(x) = stack.pop() {
        if seen.insert(x.id()) {
            if let Kind::Param(n) = x.kind() {
                names.insert(n.to_string());
            }
            stack.extend(x.kind().children());
        }
    }
    names.into_iter().collect()
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if tree_size(self) <= 256 {
            f.write_str(&emit(self, Format::Infix))
        } else {
            write!(f, "Expr#{}[{} nodes]", self.id(), node_count(self))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit(self, Format::Infix))
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::constant(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $ctor:ident) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(self, rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self.clone(), rhs.clone())
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$ctor(self, Expr::constant(rhs))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self.clone())
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::constant(0.0)
    }
    fn one() -> Self {
        Expr::constant(1.0)
    }
    fn from_f64(x: f64) -> Self {
        Expr::constant(x)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn abs(&self) -> Self {
        Expr::abs(self.clone())
    }
    fn sqrt(&self) -> Self {
        Expr::sqrt(self.clone())
    }
    fn re(&self) -> Self {
        self.clone()
    }
    /// Folds for constants; otherwise `x / |x|`, which is undefined at zero.
    fn sign(&self) -> Self {
        match self.as_const() {
            Some(x) => Expr::constant(if x >= 0.0 { 1.0 } else { -1.0 }),
            None => Expr::div(self.clone(), Expr::abs(self.clone())),
        }
    }
    fn is_zero(&self) -> bool {
        self.is_const(0.0)
    }
    fn value(&self) -> Option<C64> {
        self.as_const().map(|v| C64::new(v, 0.0))
    }
    fn same_entry(&self, other: &Self, tol: f64) -> bool {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => (a - b).abs() <= tol * a.abs().max(1.0),
            _ => self == other,
        }
    }
    fn norm_sqr(&self) -> Self {
        Expr::mul(self.clone(), self.clone())
    }
}
