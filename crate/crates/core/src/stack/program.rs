//! Linear stack programs.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Longest program the engine will produce.
pub const MAX_LEN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    PushFeature(usize),
    PushConst(f64),
    Add,
    Sub,
    Mul,
    /// Protected division: pushes 1 when the divisor is zero.
    Div,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::PushFeature(i) => write!(f, "x{i}"),
            Instruction::PushConst(c) => write!(f, "c:{c:?}"),
            Instruction::Add => f.write_str("add"),
            Instruction::Sub => f.write_str("sub"),
            Instruction::Mul => f.write_str("mul"),
            Instruction::Div => f.write_str("div"),
        }
    }
}

impl FromStr for Instruction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown instruction `{s}`"));
        Ok(match s {
            "add" => Instruction::Add,
            "sub" => Instruction::Sub,
            "mul" => Instruction::Mul,
            "div" => Instruction::Div,
            _ => {
                if let Some(c) = s.strip_prefix("c:") {
                    Instruction::PushConst(c.parse().map_err(|_| bad())?)
                } else if let Some(i) = s.strip_prefix('x') {
                    Instruction::PushFeature(i.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

/// A non-empty instruction sequence of at most [`MAX_LEN`] instructions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackProgram {
    instructions: Vec<Instruction>,
}

impl StackProgram {
    pub fn new(instructions: Vec<Instruction>) -> Result<Self> {
        if instructions.is_empty() || instructions.len() > MAX_LEN {
            return Err(Error::config(format!(
                "program length {} outside [1, {MAX_LEN}]",
                instructions.len()
            )));
        }
        Ok(StackProgram { instructions })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Length bounds plus feature indices below `n_features`.
    pub fn is_valid(&self, n_features: usize) -> bool {
        (1..=MAX_LEN).contains(&self.instructions.len())
            && self.instructions.iter().all(|ins| match ins {
                Instruction::PushFeature(i) => *i < n_features,
                _ => true,
            })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let instructions = text
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Instruction>>>()?;
        StackProgram::new(instructions)
    }
}

impl fmt::Display for StackProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ins) in self.instructions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{ins}")?;
        }
        Ok(())
    }
}

/// Runs `program` on one feature vector. Binary operators with fewer than two
/// operands on the stack are skipped. The output is the final stack read
/// bottom to top, cut or zero-padded to `output_dim`; non-finite values read
/// as 0.
pub fn execute_stack(program: &StackProgram, features: &[f64], output_dim: usize) -> Vec<f64> {
    let mut stack: Vec<f64> = Vec::with_capacity(program.len());
    for ins in program.instructions() {
        match *ins {
            Instruction::PushFeature(i) => stack.push(features[i]),
            Instruction::PushConst(c) => stack.push(c),
            op => {
                if stack.len() < 2 {
                    continue;
                }
                let b = stack.pop().expect("two operands");
                let a = stack.pop().expect("two operands");
                stack.push(match op {
                    Instruction::Add => a + b,
                    Instruction::Sub => a - b,
                    Instruction::Mul => a * b,
                    Instruction::Div => {
                        if b == 0.0 {
                            1.0
                        } else {
                            a / b
                        }
                    }
                    _ => unreachable!(),
                });
            }
        }
    }
    let mut out: Vec<f64> = stack
        .into_iter()
        .take(output_dim)
        .map(|v| if v.is_finite() { v } else { 0.0 })
        .collect();
    out.resize(output_dim, 0.0);
    out
}

/// A random instruction: feature pushes 40%, constants in `[-1, 1]` 10%,
/// each arithmetic operator 12.5%.
pub fn random_instruction(n_features: usize, rng: &mut Rng) -> Instruction {
    let u: f64 = rng.gen();
    if u < 0.4 {
        Instruction::PushFeature(rng.gen_range(0..n_features))
    } else if u < 0.5 {
        Instruction::PushConst(rng.gen_range(-1.0..=1.0))
    } else {
        match rng.gen_range(0..4) {
            0 => Instruction::Add,
            1 => Instruction::Sub,
            2 => Instruction::Mul,
            _ => Instruction::Div,
        }
    }
}

/// Initial program lengths are uniform in this range.
pub const INIT_LEN: (usize, usize) = (4, 16);

pub fn random_program(n_features: usize, rng: &mut Rng) -> StackProgram {
    let len = rng.gen_range(INIT_LEN.0..=INIT_LEN.1);
    StackProgram {
        instructions: (0..len).map(|_| random_instruction(n_features, rng)).collect(),
    }
}

/// One-point crossover with independent cut points. A child whose length
/// leaves `[1, MAX_LEN]` is replaced by its parent.
pub fn linear_crossover(a: &StackProgram, b: &StackProgram, rng: &mut Rng) -> (StackProgram, StackProgram) {
    let i = rng.gen_range(0..=a.len());
    let j = rng.gen_range(0..=b.len());
    let join = |x: &[Instruction], y: &[Instruction], parent: &StackProgram| {
        let len = x.len() + y.len();
        if (1..=MAX_LEN).contains(&len) {
            StackProgram {
                instructions: x.iter().chain(y).copied().collect(),
            }
        } else {
            parent.clone()
        }
    };
    let c1 = join(&a.instructions[..i], &b.instructions[j..], a);
    let c2 = join(&b.instructions[..j], &a.instructions[i..], b);
    (c1, c2)
}

/// Replaces one uniformly chosen instruction with a random one.
pub fn point_mutate(a: &StackProgram, n_features: usize, rng: &mut Rng) -> StackProgram {
    let mut child = a.clone();
    let i = rng.gen_range(0..child.len());
    child.instructions[i] = random_instruction(n_features, rng);
    child
}
