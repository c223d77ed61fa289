//! Program trees stored as a flat prefix (Polish) sequence of nodes.

use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::primitives::{format_const, AntAction, Func, PrimitiveSet, Terminal};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Maximum tree depth, counting a lone terminal as depth 1.
pub const MAX_DEPTH: usize = 17;

/// One node of a prefix-encoded tree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Func(Func),
    Input(usize),
    Const(f64),
    Action(AntAction),
}

impl Node {
    pub fn arity(&self) -> usize {
        match self {
            Node::Func(f) => f.arity(),
            _ => 0,
        }
    }
}

/// A program tree. Children of a function node follow it directly, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramTree {
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMethod {
    Grow,
    Full,
}

impl ProgramTree {
    /// Builds a tree from prefix nodes, checking that arities line up.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let tree = ProgramTree { nodes };
        if tree.nodes.is_empty() || tree.subtree_end(0) != Some(tree.nodes.len()) {
            return Err(Error::Parse("node sequence is not a single well-formed tree".into()));
        }
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Exclusive end of the subtree rooted at `start`, or `None` if the node
    /// sequence runs out first.
    pub fn subtree_end(&self, start: usize) -> Option<usize> {
        let mut pending = 1usize;
        let mut i = start;
        while pending > 0 {
            let node = self.nodes.get(i)?;
            pending = pending - 1 + node.arity();
            i += 1;
        }
        Some(i)
    }

    pub fn depth(&self) -> usize {
        let mut open: Vec<usize> = Vec::new();
        let mut max = 0;
        for node in &self.nodes {
            max = max.max(open.len() + 1);
            let arity = node.arity();
            if arity > 0 {
                open.push(arity);
            } else {
                while let Some(top) = open.last_mut() {
                    *top -= 1;
                    if *top == 0 {
                        open.pop();
                    } else {
                        break;
                    }
                }
            }
        }
        max
    }

    /// Depth of every leaf, in prefix order.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut open: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        for node in &self.nodes {
            let arity = node.arity();
            if arity > 0 {
                open.push(arity);
            } else {
                out.push(open.len() + 1);
                while let Some(top) = open.last_mut() {
                    *top -= 1;
                    if *top == 0 {
                        open.pop();
                    } else {
                        break;
                    }
                }
            }
        }
        out
    }

    /// Arity and depth invariants.
    pub fn is_valid(&self) -> bool {
        !self.nodes.is_empty()
            && self.subtree_end(0) == Some(self.nodes.len())
            && self.depth() <= MAX_DEPTH
    }

    /// Replaces the subtree at `start` with `replacement`.
    pub fn replace_subtree(&self, start: usize, replacement: &[Node]) -> ProgramTree {
        let end = self.subtree_end(start).expect("valid subtree index");
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - start) + replacement.len());
        nodes.extend_from_slice(&self.nodes[..start]);
        nodes.extend_from_slice(replacement);
        nodes.extend_from_slice(&self.nodes[end..]);
        ProgramTree { nodes }
    }

    pub fn subtree(&self, start: usize) -> &[Node] {
        let end = self.subtree_end(start).expect("valid subtree index");
        &self.nodes[start..end]
    }

    /// Checks that the tree is a pure value expression over `n_inputs` inputs.
    pub fn check_value_tree(&self, n_inputs: usize) -> Result<()> {
        for node in &self.nodes {
            match node {
                Node::Input(i) if *i >= n_inputs => {
                    return Err(Error::eval(format!("unbound terminal: input {i}")));
                }
                Node::Action(a) => {
                    return Err(Error::eval(format!("`{}` has no value", a.name())));
                }
                Node::Func(f) if !f.is_value() => {
                    return Err(Error::eval(format!("`{}` has no value", f.name())));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Evaluates the tree on a positional input binding.
    pub fn evaluate(&self, inputs: &[f64]) -> Result<f64> {
        self.check_value_tree(inputs.len())?;
        Ok(self.evaluate_unchecked(inputs))
    }

    /// Evaluates a tree that already passed [`check_value_tree`](Self::check_value_tree).
    pub fn evaluate_unchecked(&self, inputs: &[f64]) -> f64 {
        let mut pos = 0;
        eval_at(&self.nodes, &mut pos, inputs)
    }

    /// Renders the tree as a prefix s-expression, e.g. `(add x (mul x x))`.
    pub fn to_sexpr(&self, pset: &PrimitiveSet) -> String {
        let mut out = String::new();
        let mut pos = 0;
        write_sexpr(&self.nodes, &mut pos, pset, &mut out);
        out
    }

    /// Parses a prefix s-expression against `pset`. Numbers become constants.
    pub fn parse(text: &str, pset: &PrimitiveSet) -> Result<Self> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let mut nodes = Vec::new();
        parse_expr(&tokens, &mut pos, pset, &mut nodes)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input after tree in `{text}`")));
        }
        ProgramTree::from_nodes(nodes)
    }

    /// Wraps a display adapter that needs the primitive set for names.
    pub fn display<'a>(&'a self, pset: &'a PrimitiveSet) -> impl fmt::Display + 'a {
        struct D<'a>(&'a ProgramTree, &'a PrimitiveSet);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.to_sexpr(self.1))
            }
        }
        D(self, pset)
    }
}

#[inline]
fn truthy(v: f64) -> bool {
    v != 0.0
}

#[inline]
fn bool_val(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn eval_at(nodes: &[Node], pos: &mut usize, inputs: &[f64]) -> f64 {
    let node = nodes[*pos];
    *pos += 1;
    match node {
        Node::Input(i) => inputs[i],
        Node::Const(c) => c,
        Node::Action(_) => unreachable!("checked before evaluation"),
        Node::Func(f) => match f {
            Func::Add => eval_at(nodes, pos, inputs) + eval_at(nodes, pos, inputs),
            Func::Sub => {
                let a = eval_at(nodes, pos, inputs);
                a - eval_at(nodes, pos, inputs)
            }
            Func::Mul => eval_at(nodes, pos, inputs) * eval_at(nodes, pos, inputs),
            Func::Div => {
                let a = eval_at(nodes, pos, inputs);
                let b = eval_at(nodes, pos, inputs);
                if b == 0.0 {
                    1.0
                } else {
                    a / b
                }
            }
            Func::Neg => -eval_at(nodes, pos, inputs),
            Func::Sin => eval_at(nodes, pos, inputs).sin(),
            Func::Cos => eval_at(nodes, pos, inputs).cos(),
            Func::And => {
                let a = truthy(eval_at(nodes, pos, inputs));
                let b = truthy(eval_at(nodes, pos, inputs));
                bool_val(a && b)
            }
            Func::Or => {
                let a = truthy(eval_at(nodes, pos, inputs));
                let b = truthy(eval_at(nodes, pos, inputs));
                bool_val(a || b)
            }
            Func::Xor => {
                let a = truthy(eval_at(nodes, pos, inputs));
                let b = truthy(eval_at(nodes, pos, inputs));
                bool_val(a != b)
            }
            Func::Not => bool_val(!truthy(eval_at(nodes, pos, inputs))),
            Func::IfThenElse => {
                let c = truthy(eval_at(nodes, pos, inputs));
                let a = eval_at(nodes, pos, inputs);
                let b = eval_at(nodes, pos, inputs);
                if c {
                    a
                } else {
                    b
                }
            }
            Func::IfFoodAhead | Func::Prog2 | Func::Prog3 => {
                unreachable!("checked before evaluation")
            }
        },
    }
}

fn leaf_name(node: &Node, pset: &PrimitiveSet) -> String {
    match node {
        Node::Input(i) => pset
            .input_name(*i)
            .map(str::to_string)
            .unwrap_or_else(|| format!("$in{i}")),
        Node::Const(c) => format_const(*c),
        Node::Action(a) => a.name().to_string(),
        Node::Func(f) => f.name().to_string(),
    }
}

fn write_sexpr(nodes: &[Node], pos: &mut usize, pset: &PrimitiveSet, out: &mut String) {
    let node = nodes[*pos];
    *pos += 1;
    match node {
        Node::Func(f) => {
            out.push('(');
            out.push_str(f.name());
            for _ in 0..f.arity() {
                out.push(' ');
                write_sexpr(nodes, pos, pset, out);
            }
            out.push(')');
        }
        leaf => out.push_str(&leaf_name(&leaf, pset)),
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn parse_leaf(tok: &str, pset: &PrimitiveSet) -> Result<Node> {
    if let Some(i) = pset.input_index(tok) {
        return Ok(Node::Input(i));
    }
    if let Some(a) = AntAction::from_name(tok) {
        if pset.terminals().contains(&Terminal::Action(a)) {
            return Ok(Node::Action(a));
        }
    }
    if let Ok(v) = tok.parse::<f64>() {
        return Ok(Node::Const(v));
    }
    Err(Error::Parse(format!("unknown terminal `{tok}`")))
}

fn parse_expr(tokens: &[String], pos: &mut usize, pset: &PrimitiveSet, out: &mut Vec<Node>) -> Result<()> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let name = tokens
                .get(*pos)
                .ok_or_else(|| Error::Parse("missing function name".into()))?;
            *pos += 1;
            let f = Func::from_name(name)
                .filter(|f| pset.functions().contains(f))
                .ok_or_else(|| Error::Parse(format!("unknown function `{name}`")))?;
            out.push(Node::Func(f));
            for _ in 0..f.arity() {
                parse_expr(tokens, pos, pset, out)?;
            }
            match tokens.get(*pos).map(String::as_str) {
                Some(")") => {
                    *pos += 1;
                    Ok(())
                }
                _ => Err(Error::Parse(format!("`{name}` expects {} arguments", f.arity()))),
            }
        }
        ")" => Err(Error::Parse("unexpected `)`".into())),
        leaf => {
            out.push(parse_leaf(leaf, pset)?);
            Ok(())
        }
    }
}

fn random_terminal(pset: &PrimitiveSet, rng: &mut Rng) -> Node {
    let terminals = pset.terminals();
    match &terminals[rng.gen_range(0..terminals.len())] {
        Terminal::Input { index, .. } => Node::Input(*index),
        Terminal::Constant(c) => Node::Const(*c),
        Terminal::Action(a) => Node::Action(*a),
        Terminal::Erc { lo, hi } => Node::Const(rng.gen_range(*lo..=*hi)),
    }
}

fn random_function(pset: &PrimitiveSet, rng: &mut Rng) -> Node {
    let funcs = pset.functions();
    Node::Func(funcs[rng.gen_range(0..funcs.len())])
}

fn grow_into(
    pset: &PrimitiveSet,
    depth: usize,
    height: usize,
    min_depth: usize,
    method: InitMethod,
    rng: &mut Rng,
    out: &mut Vec<Node>,
) {
    let leaf = pset.functions().is_empty()
        || depth >= height
        || (method == InitMethod::Grow && depth >= min_depth && rng.gen::<f64>() < pset.terminal_ratio());
    if leaf {
        out.push(random_terminal(pset, rng));
    } else {
        let f = random_function(pset, rng);
        out.push(f);
        for _ in 0..f.arity() {
            grow_into(pset, depth + 1, height, min_depth, method, rng, out);
        }
    }
}

/// Generates a random tree whose height is drawn uniformly from
/// `[min_depth, max_depth]`. With `Full`, every leaf sits at exactly that
/// height (unless the set has no functions, in which case the tree is a
/// single terminal).
pub fn generate_random_tree(
    pset: &PrimitiveSet,
    min_depth: usize,
    max_depth: usize,
    method: InitMethod,
    rng: &mut Rng,
) -> Result<ProgramTree> {
    if !(1 <= min_depth && min_depth <= max_depth && max_depth <= MAX_DEPTH) {
        return Err(Error::config(format!(
            "depth bounds must satisfy 1 <= {min_depth} <= {max_depth} <= {MAX_DEPTH}"
        )));
    }
    if pset.terminals().is_empty() {
        return Err(Error::config("empty primitive set"));
    }
    let height = rng.gen_range(min_depth..=max_depth);
    let mut nodes = Vec::new();
    grow_into(pset, 1, height, min_depth, method, rng, &mut nodes);
    Ok(ProgramTree { nodes })
}

/// Initial depth range of ramped half-and-half.
pub const INIT_DEPTH: (usize, usize) = (1, 4);

/// One ramped half-and-half individual: grow or full with equal
/// probability, height uniform in [`INIT_DEPTH`].
pub fn ramped_half_and_half(pset: &PrimitiveSet, rng: &mut Rng) -> ProgramTree {
    let method = if rng.gen_bool(0.5) { InitMethod::Grow } else { InitMethod::Full };
    generate_random_tree(pset, INIT_DEPTH.0, INIT_DEPTH.1, method, rng)
        .expect("primitive sets are validated on construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn arith() -> PrimitiveSet {
        PrimitiveSet::new(
            vec![Func::Add, Func::Sub, Func::Mul, Func::Div],
            vec![Terminal::Input { name: "x".into(), index: 0 }],
        )
        .unwrap()
    }

    #[test]
    fn full_depth_one_is_a_lone_terminal() {
        let pset = PrimitiveSet::new(
            vec![Func::Add],
            vec![Terminal::Input { name: "x".into(), index: 0 }],
        )
        .unwrap();
        let mut rng = rng_from_seed(0);
        let t = generate_random_tree(&pset, 1, 1, InitMethod::Full, &mut rng).unwrap();
        assert_eq!(t.to_sexpr(&pset), "x");
    }

    #[test]
    fn full_trees_have_every_leaf_at_the_chosen_depth() {
        let pset = PrimitiveSet::regression();
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let t = generate_random_tree(&pset, 2, 2, InitMethod::Full, &mut rng).unwrap();
            assert!(t.leaf_depths().iter().all(|&d| d == 2));
        }
        for _ in 0..200 {
            let t = generate_random_tree(&pset, 3, 5, InitMethod::Full, &mut rng).unwrap();
            let d = t.depth();
            assert!(t.leaf_depths().iter().all(|&l| l == d));
        }
    }

    #[test]
    fn grow_trees_respect_depth_bounds() {
        let pset = PrimitiveSet::regression();
        let mut rng = rng_from_seed(2);
        let mut max_seen = 0;
        for _ in 0..1000 {
            let t = generate_random_tree(&pset, 1, 6, InitMethod::Grow, &mut rng).unwrap();
            let d = t.depth();
            assert!((1..=6).contains(&d));
            assert!(t.is_valid());
            max_seen = max_seen.max(d);
        }
        assert!(max_seen > 1);
    }

    #[test]
    fn bad_depth_bounds_are_rejected() {
        let mut rng = rng_from_seed(0);
        let p = arith();
        assert!(generate_random_tree(&p, 0, 2, InitMethod::Grow, &mut rng).is_err());
        assert!(generate_random_tree(&p, 3, 2, InitMethod::Grow, &mut rng).is_err());
        assert!(generate_random_tree(&p, 1, 18, InitMethod::Grow, &mut rng).is_err());
    }

    #[test]
    fn evaluates_arithmetic() {
        let p = arith();
        let t = ProgramTree::parse("(add x (mul x x))", &p).unwrap();
        assert_eq!(t.evaluate(&[2.0]).unwrap(), 6.0);
        let d = ProgramTree::parse("(div x 0)", &p).unwrap();
        assert_eq!(d.evaluate(&[5.0]).unwrap(), 1.0);
        let q = ProgramTree::parse(
            "(add (mul (mul x x) (mul x x)) (add (mul (mul x x) x) (add (mul x x) x)))",
            &p,
        )
        .unwrap();
        assert_eq!(q.evaluate(&[1.0]).unwrap(), 4.0);
    }

    #[test]
    fn unbound_terminal_is_an_error() {
        let p = PrimitiveSet::parity(3);
        let t = ProgramTree::parse("(and in0 in2)", &p).unwrap();
        assert!(t.evaluate(&[1.0, 1.0]).is_err());
        assert_eq!(t.evaluate(&[1.0, 0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn ant_trees_have_no_value() {
        let p = PrimitiveSet::ant();
        let t = ProgramTree::parse("(prog2 move turn-left)", &p).unwrap();
        assert!(t.evaluate(&[]).is_err());
    }

    #[test]
    fn sexpr_round_trips() {
        let p = PrimitiveSet::regression();
        let mut rng = rng_from_seed(5);
        for _ in 0..300 {
            let t = ramped_half_and_half(&p, &mut rng);
            let s = t.to_sexpr(&p);
            let back = ProgramTree::parse(&s, &p).unwrap();
            assert_eq!(back, t, "{s}");
        }
    }

    #[test]
    fn malformed_expressions_fail_to_parse() {
        let p = arith();
        assert!(ProgramTree::parse("(add x)", &p).is_err());
        assert!(ProgramTree::parse("(add x x x)", &p).is_err());
        assert!(ProgramTree::parse("(pow x x)", &p).is_err());
        assert!(ProgramTree::parse("x x", &p).is_err());
        assert!(ProgramTree::parse("y", &p).is_err());
        assert!(ProgramTree::from_nodes(vec![Node::Func(Func::Add), Node::Input(0)]).is_err());
    }

    #[test]
    fn erc_values_are_frozen_in_range() {
        let p = PrimitiveSet::regression();
        let mut rng = rng_from_seed(9);
        for _ in 0..200 {
            let t = ramped_half_and_half(&p, &mut rng);
            for n in t.nodes() {
                if let Node::Const(c) = n {
                    assert!((-1.0..=1.0).contains(c));
                }
            }
            let a = t.evaluate(&[0.3]).unwrap();
            let b = t.evaluate(&[0.3]).unwrap();
            assert!(a.to_bits() == b.to_bits() || a.is_nan());
        }
    }
}
