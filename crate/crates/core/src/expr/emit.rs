use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Expr, Kind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Infix,
    GraphJson,
}

/// Renders `e` as text. Graph JSON carries no layer tags; use
/// [`to_graph_json`] for layered exports.
pub fn emit(e: &Expr, format: Format) -> String {
    match format {
        Format::Infix => infix(e),
        Format::GraphJson => {
            serde_json::to_string(&to_graph_json(e, &HashMap::new())).expect("graph serializes")
        }
    }
}

/// Number of nodes the infix rendering would spell out (shared subgraphs
/// counted once per use), saturating.
pub fn tree_size(e: &Expr) -> u64 {
    let mut sizes: HashMap<u64, u64> = HashMap::new();
    post_order(e, |node| {
        let s = node
            .kind()
            .children()
            .iter()
            .fold(1u64, |acc, c| acc.saturating_add(sizes[&c.id()]));
        sizes.insert(node.id(), s);
    });
    sizes[&e.id()]
}

fn post_order(root: &Expr, mut visit: impl FnMut(&Expr)) {
    let mut seen = std::collections::HashSet::new();
    let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
    while let Some((node, expanded)) = stack.pop() {
        if expanded {
            visit(&node);
            continue;
        }
        if !seen.insert(node.id()) {
            continue;
        }
        stack.push((node.clone(), true));
        for c in node.kind().children().into_iter().rev() {
            if !seen.contains(&c.id()) {
                stack.push((c.clone(), false));
            }
        }
    }
}

fn number(v: f64) -> String {
    let body = if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v.abs() as i64)
    } else {
        format!("{:?}", v.abs())
    };
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        format!("(-{body})")
    } else {
        body
    }
}

fn infix(e: &Expr) -> String {
    let mut out = String::new();
    // Explicit stack of pending writes keeps deep graphs off the call stack.
    enum Item<'a> {
        Node(&'a Expr),
        Text(&'static str),
    }
    let mut stack = vec![Item::Node(e)];
    while let Some(item) = stack.pop() {
        match item {
            Item::Text(t) => out.push_str(t),
            Item::Node(n) => match n.kind() {
                Kind::Const(v) => out.push_str(&number(*v)),
                Kind::Param(name) => out.push_str(name),
                Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => {
                    let op = match n.kind() {
                        Kind::Add(..) => " + ",
                        Kind::Sub(..) => " - ",
                        Kind::Mul(..) => " * ",
                        _ => " / ",
                    };
                    out.push('(');
                    stack.push(Item::Text(")"));
                    stack.push(Item::Node(b));
                    stack.push(Item::Text(op));
                    stack.push(Item::Node(a));
                }
                Kind::Neg(a) => {
                    out.push_str("(-");
                    stack.push(Item::Text(")"));
                    stack.push(Item::Node(a));
                }
                Kind::Sqrt(a) | Kind::Abs(a) => {
                    out.push_str(if matches!(n.kind(), Kind::Sqrt(_)) {
                        "sqrt("
                    } else {
                        "abs("
                    });
                    stack.push(Item::Text(")"));
                    stack.push(Item::Node(a));
                }
            },
        }
    }
    out
}

/// Parses the infix syntax produced by [`emit`] (and ordinary
/// precedence-based arithmetic). Nodes are built without folding, so a
/// round trip preserves structure.
pub fn parse_infix(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", ch as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == b'+' {
                Expr::raw_add(lhs, rhs)
            } else {
                Expr::raw_sub(lhs, rhs)
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == b'*' {
                Expr::raw_mul(lhs, rhs)
            } else {
                Expr::raw_div(lhs, rhs)
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                let v = self.number()?;
                return Ok(Expr::constant(-v));
            }
            return Ok(Expr::raw_neg(self.unary()?));
        }
        self.primary()
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'+' || c == b'-')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        s.parse::<f64>().map_err(|_| Error::Parse {
            offset: start,
            message: format!("bad number `{s}`"),
        })
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::constant(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if matches!(name, "sqrt" | "abs") && self.peek() == Some(b'(') {
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    Ok(if name == "sqrt" {
                        Expr::raw_sqrt(arg)
                    } else {
                        Expr::raw_abs(arg)
                    })
                } else {
                    Ok(Expr::param(name))
                }
            }
            _ => Err(self.error("expected an operand")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub kind: String,
    pub children: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<u32>,
}

/// `{"nodes": [...], "root": id}` with nodes listed children-first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<GraphNode>,
    pub root: usize,
}

impl GraphJson {
    /// Checks ids are dense, children precede parents, arities match kinds.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Error::Json(m);
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(bad(format!("node {i} has id {}", n.id)));
            }
            let arity = match n.kind.as_str() {
                "const" | "param" => 0,
                "neg" | "sqrt" | "abs" => 1,
                "add" | "sub" | "mul" | "div" => 2,
                other => return Err(bad(format!("unknown kind `{other}`"))),
            };
            if n.children.len() != arity {
                return Err(bad(format!("node {i} ({}) has {} children", n.kind, n.children.len())));
            }
            if n.children.iter().any(|&c| c >= i) {
                return Err(bad(format!("node {i} references a later node")));
            }
            if n.kind == "const" && n.value.is_none() {
                return Err(bad(format!("const node {i} lacks a value")));
            }
            if n.kind == "param" && n.name.is_none() {
                return Err(bad(format!("param node {i} lacks a name")));
            }
        }
        if self.root >= self.nodes.len() {
            return Err(bad("root out of range".into()));
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).sum()
    }
}

/// Exports the DAG under `root`; `layers` tags selected nodes by node id.
pub fn to_graph_json(root: &Expr, layers: &HashMap<u64, u32>) -> GraphJson {
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut nodes = Vec::new();
    post_order(root, |node| {
        let id = nodes.len();
        index.insert(node.id(), id);
        let (value, name) = match node.kind() {
            Kind::Const(v) => (Some(*v), None),
            Kind::Param(n) => (None, Some(n.to_string())),
            _ => (None, None),
        };
        nodes.push(GraphNode {
            id,
            kind: node.kind().name().to_string(),
            children: node.kind().children().iter().map(|c| index[&c.id()]).collect(),
            value,
            name,
            layer: layers.get(&node.id()).copied(),
        });
    });
    GraphJson {
        root: index[&root.id()],
        nodes,
    }
}

/// Rebuilds an expression from its graph export.
pub fn from_graph_json(g: &GraphJson) -> Result<Expr> {
    g.validate()?;
    let mut built: Vec<Expr> = Vec::with_capacity(g.nodes.len());
    for n in &g.nodes {
        let c = |i: usize| built[n.children[i]].clone();
        let e = match n.kind.as_str() {
            "const" => Expr::constant(n.value.expect("validated")),
            "param" => Expr::param(n.name.as_deref().expect("validated")),
            "add" => Expr::raw_add(c(0), c(1)),
            "sub" => Expr::raw_sub(c(0), c(1)),
            "mul" => Expr::raw_mul(c(0), c(1)),
            "div" => Expr::raw_div(c(0), c(1)),
            "neg" => Expr::raw_neg(c(0)),
            "sqrt" => Expr::raw_sqrt(c(0)),
            _ => Expr::raw_abs(c(0)),
        };
        built.push(e);
    }
    Ok(built[g.root].clone())
}
