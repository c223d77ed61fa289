//! Function and terminal sets for tree programs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Function primitives. Every function has arity at least one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Add,
    Sub,
    Mul,
    /// Protected division: returns 1 when the divisor is zero.
    Div,
    Neg,
    Sin,
    Cos,
    And,
    Or,
    Xor,
    Not,
    IfThenElse,
    IfFoodAhead,
    Prog2,
    Prog3,
}

impl Func {
    pub const ALL: [Func; 15] = [
        Func::Add,
        Func::Sub,
        Func::Mul,
        Func::Div,
        Func::Neg,
        Func::Sin,
        Func::Cos,
        Func::And,
        Func::Or,
        Func::Xor,
        Func::Not,
        Func::IfThenElse,
        Func::IfFoodAhead,
        Func::Prog2,
        Func::Prog3,
    ];

    pub fn arity(self) -> usize {
        match self {
            Func::Neg | Func::Sin | Func::Cos | Func::Not => 1,
            Func::IfThenElse | Func::Prog3 => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Add => "add",
            Func::Sub => "sub",
            Func::Mul => "mul",
            Func::Div => "div",
            Func::Neg => "neg",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::And => "and",
            Func::Or => "or",
            Func::Xor => "xor",
            Func::Not => "not",
            Func::IfThenElse => "if_then_else",
            Func::IfFoodAhead => "if-food-ahead",
            Func::Prog2 => "prog2",
            Func::Prog3 => "prog3",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Whether the function computes a value (as opposed to sequencing ant
    /// actions).
    pub fn is_value(self) -> bool {
        !matches!(self, Func::IfFoodAhead | Func::Prog2 | Func::Prog3)
    }
}

/// Side-effecting terminals of the artificial-ant controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AntAction {
    Move,
    TurnLeft,
    TurnRight,
}

impl AntAction {
    pub const ALL: [AntAction; 3] = [AntAction::Move, AntAction::TurnLeft, AntAction::TurnRight];

    pub fn name(self) -> &'static str {
        match self {
            AntAction::Move => "move",
            AntAction::TurnLeft => "turn-left",
            AntAction::TurnRight => "turn-right",
        }
    }

    pub fn from_name(name: &str) -> Option<AntAction> {
        AntAction::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Terminal sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    /// Reads input `index` of the value binding.
    Input { name: String, index: usize },
    Constant(f64),
    Action(AntAction),
    /// Ephemeral random constant, drawn uniformly in `[lo, hi]` when the node
    /// is created and frozen afterwards.
    Erc { lo: f64, hi: f64 },
}

impl Terminal {
    pub fn name(&self) -> String {
        match self {
            Terminal::Input { name, .. } => name.clone(),
            Terminal::Constant(v) => format_const(*v),
            Terminal::Action(a) => a.name().to_string(),
            Terminal::Erc { .. } => "erc".to_string(),
        }
    }
}

pub(crate) fn format_const(v: f64) -> String {
    format!("{v:?}")
}

/// A validated set of functions and terminals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSet {
    functions: Vec<Func>,
    terminals: Vec<Terminal>,
}

impl PrimitiveSet {
    pub fn new(functions: Vec<Func>, terminals: Vec<Terminal>) -> Result<Self> {
        if terminals.is_empty() {
            return Err(Error::config("primitive set needs at least one terminal"));
        }
        let mut seen = HashSet::new();
        for name in functions
            .iter()
            .map(|f| f.name().to_string())
            .chain(terminals.iter().map(Terminal::name))
        {
            if !seen.insert(name.clone()) {
                return Err(Error::config(format!("duplicate primitive name `{name}`")));
            }
        }
        for t in &terminals {
            match t {
                Terminal::Input { name, .. } if name.parse::<f64>().is_ok() || name.contains(['(', ')', ' ']) => {
                    return Err(Error::config(format!("invalid input name `{name}`")));
                }
                Terminal::Erc { lo, hi } if !(lo <= hi) => {
                    return Err(Error::config("ERC range must satisfy lo <= hi"));
                }
                _ => {}
            }
        }
        Ok(PrimitiveSet { functions, terminals })
    }

    pub fn functions(&self) -> &[Func] {
        &self.functions
    }

    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    /// Number of distinct inputs a value binding must provide.
    pub fn input_count(&self) -> usize {
        self.terminals
            .iter()
            .filter_map(|t| match t {
                Terminal::Input { index, .. } => Some(index + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn input_name(&self, index: usize) -> Option<&str> {
        self.terminals.iter().find_map(|t| match t {
            Terminal::Input { name, index: i } if *i == index => Some(name.as_str()),
            _ => None,
        })
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.terminals.iter().find_map(|t| match t {
            Terminal::Input { name: n, index } if n == name => Some(*index),
            _ => None,
        })
    }

    /// Probability that the grow method picks a terminal at a free depth.
    pub fn terminal_ratio(&self) -> f64 {
        self.terminals.len() as f64 / (self.terminals.len() + self.functions.len()) as f64
    }

    /// Quartic symbolic regression: arithmetic, trigonometry, `x`, and ERCs.
    pub fn regression() -> Self {
        PrimitiveSet::new(
            vec![Func::Add, Func::Sub, Func::Mul, Func::Div, Func::Neg, Func::Sin, Func::Cos],
            vec![
                Terminal::Input { name: "x".into(), index: 0 },
                Terminal::Erc { lo: -1.0, hi: 1.0 },
            ],
        )
        .expect("regression primitive set")
    }

    /// Even parity over `n` inputs named `in0..`.
    pub fn parity(n: usize) -> Self {
        let mut terminals: Vec<Terminal> = (0..n)
            .map(|i| Terminal::Input { name: format!("in{i}"), index: i })
            .collect();
        terminals.push(Terminal::Constant(1.0));
        terminals.push(Terminal::Constant(0.0));
        PrimitiveSet::new(vec![Func::And, Func::Or, Func::Xor, Func::Not], terminals)
            .expect("parity primitive set")
    }

    /// Multiplexer with `addr_bits` address inputs `a0..` followed by
    /// `2^addr_bits` data inputs `d0..`.
    pub fn multiplexer(addr_bits: usize) -> Self {
        let data = 1usize << addr_bits;
        let mut terminals: Vec<Terminal> = (0..addr_bits)
            .map(|i| Terminal::Input { name: format!("a{i}"), index: i })
            .collect();
        terminals.extend((0..data).map(|i| Terminal::Input {
            name: format!("d{i}"),
            index: addr_bits + i,
        }));
        terminals.push(Terminal::Constant(1.0));
        terminals.push(Terminal::Constant(0.0));
        PrimitiveSet::new(vec![Func::And, Func::Or, Func::Not, Func::IfThenElse], terminals)
            .expect("multiplexer primitive set")
    }

    /// Artificial ant controller primitives.
    pub fn ant() -> Self {
        PrimitiveSet::new(
            vec![Func::IfFoodAhead, Func::Prog2, Func::Prog3],
            AntAction::ALL.into_iter().map(Terminal::Action).collect(),
        )
        .expect("ant primitive set")
    }
}
