//! Artificial ant on a toroidal food grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{AntAction, Func, Node, ProgramTree};

pub const SANTA_FE_TEXT: &str = include_str!("../../data/santafe_trail.txt");
pub const SANTA_FE_STEPS: usize = 600;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heading {
    East,
    South,
    West,
    North,
}

impl Heading {
    fn delta(self) -> (isize, isize) {
        match self {
            Heading::East => (0, 1),
            Heading::South => (1, 0),
            Heading::West => (0, -1),
            Heading::North => (-1, 0),
        }
    }

    fn left(self) -> Heading {
        match self {
            Heading::East => Heading::North,
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
        }
    }

    fn right(self) -> Heading {
        match self {
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
            Heading::North => Heading::East,
        }
    }
}

/// Food map plus start pose and step budget. The grid wraps at both edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntTrail {
    pub width: usize,
    pub height: usize,
    pub food: Vec<bool>,
    pub start: (usize, usize),
    pub heading: Heading,
    pub food_total: usize,
    pub step_budget: usize,
}

impl AntTrail {
    /// Parses a grid of `#` (food), `.` (empty) and `S` (start, facing east).
    pub fn parse(text: &str, step_budget: usize) -> Result<Self> {
        if step_budget == 0 {
            return Err(Error::config("ant step budget must be positive"));
        }
        let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        let height = rows.len();
        let width = rows.first().map(|r| r.chars().count()).unwrap_or(0);
        if height == 0 || width == 0 {
            return Err(Error::Parse("empty ant trail".into()));
        }
        let mut food = Vec::with_capacity(width * height);
        let mut start = None;
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Parse(format!("trail row {} has the wrong width", r + 1)));
            }
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '#' => food.push(true),
                    '.' => food.push(false),
                    'S' => {
                        if start.replace((r, c)).is_some() {
                            return Err(Error::Parse("trail has more than one start cell".into()));
                        }
                        food.push(false);
                    }
                    other => return Err(Error::Parse(format!("unexpected trail character `{other}`"))),
                }
            }
        }
        let start = start.ok_or_else(|| Error::Parse("trail has no start cell `S`".into()))?;
        let food_total = food.iter().filter(|&&f| f).count();
        Ok(AntTrail {
            width,
            height,
            food,
            start,
            heading: Heading::East,
            food_total,
            step_budget,
        })
    }

    /// The Santa Fe trail: 32x32, 89 food cells, 600 steps.
    pub fn santa_fe() -> Self {
        AntTrail::parse(SANTA_FE_TEXT, SANTA_FE_STEPS).expect("bundled trail parses")
    }
}

struct Ant<'t> {
    trail: &'t AntTrail,
    food: Vec<bool>,
    row: usize,
    col: usize,
    heading: Heading,
    steps: usize,
    eaten: usize,
}

impl Ant<'_> {
    fn ahead(&self) -> (usize, usize) {
        let (dr, dc) = self.heading.delta();
        let h = self.trail.height as isize;
        let w = self.trail.width as isize;
        (
            (self.row as isize + dr).rem_euclid(h) as usize,
            (self.col as isize + dc).rem_euclid(w) as usize,
        )
    }

    fn food_ahead(&self) -> bool {
        let (r, c) = self.ahead();
        self.food[r * self.trail.width + c]
    }

    fn act(&mut self, action: AntAction) {
        if self.steps >= self.trail.step_budget {
            return;
        }
        self.steps += 1;
        match action {
            AntAction::Move => {
                let (r, c) = self.ahead();
                self.row = r;
                self.col = c;
                let cell = &mut self.food[r * self.trail.width + c];
                if *cell {
                    *cell = false;
                    self.eaten += 1;
                }
            }
            AntAction::TurnLeft => self.heading = self.heading.left(),
            AntAction::TurnRight => self.heading = self.heading.right(),
        }
    }

    fn exec(&mut self, nodes: &[Node], ends: &[usize], i: usize) {
        match nodes[i] {
            Node::Action(a) => self.act(a),
            Node::Func(Func::IfFoodAhead) => {
                let then_branch = i + 1;
                if self.food_ahead() {
                    self.exec(nodes, ends, then_branch);
                } else {
                    self.exec(nodes, ends, ends[then_branch]);
                }
            }
            Node::Func(f @ (Func::Prog2 | Func::Prog3)) => {
                let mut child = i + 1;
                for _ in 0..f.arity() {
                    self.exec(nodes, ends, child);
                    child = ends[child];
                }
            }
            _ => unreachable!("controller checked before simulation"),
        }
    }
}

/// Runs `controller` repeatedly until the step budget is spent and returns
/// the number of food cells eaten. Moves and turns cost one step each.
pub fn ant_simulate(controller: &ProgramTree, trail: &AntTrail) -> Result<usize> {
    let nodes = controller.nodes();
    for n in nodes {
        match n {
            Node::Action(_) | Node::Func(Func::IfFoodAhead | Func::Prog2 | Func::Prog3) => {}
            other => {
                return Err(Error::config(format!("non-ant primitive in controller: {other:?}")));
            }
        }
    }
    let ends: Vec<usize> = (0..nodes.len())
        .map(|i| controller.subtree_end(i).expect("well-formed tree"))
        .collect();
    let mut ant = Ant {
        trail,
        food: trail.food.clone(),
        row: trail.start.0,
        col: trail.start.1,
        heading: trail.heading,
        steps: 0,
        eaten: 0,
    };
    while ant.steps < trail.step_budget {
        let before = ant.steps;
        ant.exec(nodes, &ends, 0);
        if ant.steps == before {
            break;
        }
    }
    Ok(ant.eaten)
}
