//! Slippery gridworlds: FrozenLake, CliffWalking and Bridge.
//!
//! Actions are `0 = left, 1 = down, 2 = right, 3 = up` in every world. The
//! agent moves in the commanded direction with the intended-direction
//! probability; otherwise it turns left, turns right, or (CliffWalking only)
//! reverses, according to the relative-move distribution of the map half it
//! stands in. Moves off the grid leave the agent in place.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{ParamValue, PROB_TOL};
use crate::update::{redistribute, SplitRule};

pub const NUM_ACTIONS: usize = 4;
pub const LEFT: usize = 0;
pub const DOWN: usize = 1;
pub const RIGHT: usize = 2;
pub const UP: usize = 3;

/// Support labels of the relative-move distribution, in storage order.
pub const RELATIVE_MOVES: [&str; 4] = ["intended", "perp_left", "perp_right", "reverse"];

pub const DETERMINISTIC: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    FrozenLake,
    CliffWalking,
    Bridge,
}

impl GridKind {
    pub fn split_rule(self) -> SplitRule {
        match self {
            GridKind::CliffWalking => SplitRule::PerpendicularAndReverse,
            GridKind::FrozenLake | GridKind::Bridge => SplitRule::PerpendicularOnly,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            GridKind::Bridge => &["action_dist_left", "action_dist_right"],
            _ => &["action_dist"],
        }
    }

    pub fn canonical_map(self) -> GridMap {
        let text = match self {
            GridKind::FrozenLake => FROZEN_LAKE_4X4,
            GridKind::CliffWalking => CLIFF_WALKING_4X12,
            GridKind::Bridge => BRIDGE_3X9,
        };
        text.parse().expect("shipped map is valid")
    }
}

pub const FROZEN_LAKE_4X4: &str = "SFFF\nFHFH\nFFFH\nHFFG\n";

pub const CLIFF_WALKING_4X12: &str = "\
FFFFFFFFFFFF
FFFFFFFFFFFF
FFFFFFFFFFFF
SCCCCCCCCCCG
";

pub const BRIDGE_3X9: &str = "\
FHHFFFFFF
GFFSFFFFG
FHHFFFFFF

LLLLRRRRR
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Start,
    Free,
    Hole,
    Cliff,
    Goal,
}

impl Cell {
    fn from_char(c: char) -> Option<Cell> {
        Some(match c {
            'S' => Cell::Start,
            'F' => Cell::Free,
            'H' => Cell::Hole,
            'C' => Cell::Cliff,
            'G' => Cell::Goal,
            _ => return None,
        })
    }

    fn as_char(self) -> char {
        match self {
            Cell::Start => 'S',
            Cell::Free => 'F',
            Cell::Hole => 'H',
            Cell::Cliff => 'C',
            Cell::Goal => 'G',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Half {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
    start: usize,
    /// Per-column half assignment (Bridge only).
    halves: Option<Vec<Half>>,
}

impl GridMap {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn cell(&self, idx: usize) -> Cell {
        self.cells[idx]
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.cols, idx % self.cols)
    }

    pub fn has_halves(&self) -> bool {
        self.halves.is_some()
    }

    /// Index into [`GridParams::dists`] governing moves out of `idx`.
    pub fn half_index(&self, idx: usize) -> usize {
        match &self.halves {
            Some(h) if h[idx % self.cols] == Half::Right => 1,
            _ => 0,
        }
    }

    fn neighbour(&self, idx: usize, dir: usize) -> usize {
        let (r, c) = self.coords(idx);
        let (r, c) = match dir {
            LEFT if c > 0 => (r, c - 1),
            DOWN if r + 1 < self.rows => (r + 1, c),
            RIGHT if c + 1 < self.cols => (r, c + 1),
            UP if r > 0 => (r - 1, c),
            _ => (r, c),
        };
        self.index(r, c)
    }
}

impl FromStr for GridMap {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut blocks = text.trim().split("\n\n");
        let grid: Vec<&str> = blocks
            .next()
            .unwrap_or("")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if grid.is_empty() {
            return Err(Error::Parse("empty map".into()));
        }
        let cols = grid[0].chars().count();
        let mut cells = Vec::with_capacity(grid.len() * cols);
        for line in &grid {
            if line.chars().count() != cols {
                return Err(Error::Parse("ragged map rows".into()));
            }
            for ch in line.chars() {
                cells.push(
                    Cell::from_char(ch)
                        .ok_or_else(|| Error::Parse(format!("unknown map character `{ch}`")))?,
                );
            }
        }
        let starts: Vec<usize> = (0..cells.len()).filter(|&i| cells[i] == Cell::Start).collect();
        if starts.len() != 1 {
            return Err(Error::Parse(format!("map needs exactly one start, found {}", starts.len())));
        }
        if !cells.contains(&Cell::Goal) {
            return Err(Error::Parse("map has no goal".into()));
        }
        let halves = match blocks.next() {
            None => None,
            Some(block) => {
                let line = block.trim();
                let halves = line
                    .chars()
                    .map(|c| match c {
                        'L' => Ok(Half::Left),
                        'R' => Ok(Half::Right),
                        other => Err(Error::Parse(format!("unknown half marker `{other}`"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if halves.len() != cols {
                    return Err(Error::Parse(format!(
                        "half assignment covers {} of {cols} columns",
                        halves.len()
                    )));
                }
                Some(halves)
            }
        };
        Ok(GridMap {
            rows: grid.len(),
            cols,
            cells,
            start: starts[0],
            halves,
        })
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.cols) {
            let line: String = row.iter().map(|c| c.as_char()).collect();
            writeln!(f, "{line}")?;
        }
        if let Some(h) = &self.halves {
            writeln!(f)?;
            let line: String = h
                .iter()
                .map(|h| if *h == Half::Left { 'L' } else { 'R' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Relative-move distributions, one per map half (a single one for maps
/// without halves). Each is `[intended, perp_left, perp_right, reverse]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub dists: Vec<[f64; 4]>,
}

impl GridParams {
    pub fn uniform_for(kind: GridKind, dist: [f64; 4]) -> Self {
        let n = if kind == GridKind::Bridge { 2 } else { 1 };
        GridParams { dists: vec![dist; n] }
    }

    /// Same intended-direction probability `p` everywhere, residual split per `kind`.
    pub fn with_intended(kind: GridKind, p: f64) -> Self {
        Self::uniform_for(kind, intended_dist(p, kind.split_rule()))
    }

    pub fn validate(&self) -> Result<()> {
        for d in &self.dists {
            let sum: f64 = d.iter().sum();
            if d.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::config(format!("invalid action distribution {d:?}")));
            }
        }
        Ok(())
    }

    /// Mean intended-direction probability over halves.
    pub fn intended_prob(&self) -> f64 {
        self.dists.iter().map(|d| d[0]).sum::<f64>() / self.dists.len() as f64
    }
}

pub fn intended_dist(p: f64, split: SplitRule) -> [f64; 4] {
    let support: Vec<String> = RELATIVE_MOVES.iter().map(|s| s.to_string()).collect();
    let v = redistribute(&support, 0, p, split);
    let probs = v.as_probs().expect("categorical");
    [probs[0], probs[1], probs[2], probs[3]]
}

pub fn dist_param(dist: &[f64; 4]) -> ParamValue {
    ParamValue::Categorical {
        probs: dist.to_vec(),
        support: RELATIVE_MOVES.iter().map(|s| s.to_string()).collect(),
    }
}

/// Absolute direction of each relative move for `action`.
fn relative_dirs(action: usize) -> [usize; 4] {
    [action, (action + 1) % 4, (action + 3) % 4, (action + 2) % 4]
}

/// One possible result of a grid step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next: usize,
    pub prob: f64,
    pub reward: f64,
    pub done: bool,
}

pub fn is_terminal(kind: GridKind, map: &GridMap, idx: usize) -> bool {
    match map.cell(idx) {
        Cell::Goal => true,
        Cell::Hole => kind != GridKind::CliffWalking,
        _ => false,
    }
}

/// Successor, reward and termination after physically landing on `landed`.
fn resolve(kind: GridKind, map: &GridMap, landed: usize) -> (usize, f64, bool) {
    let cell = map.cell(landed);
    match kind {
        GridKind::FrozenLake => match cell {
            Cell::Goal => (landed, 1.0, true),
            Cell::Hole => (landed, 0.0, true),
            _ => (landed, 0.0, false),
        },
        GridKind::CliffWalking => match cell {
            Cell::Cliff => (map.start(), -100.0, false),
            Cell::Goal => (landed, 100.0, true),
            _ => (landed, -1.0, false),
        },
        GridKind::Bridge => match cell {
            Cell::Goal => (landed, 1.0, true),
            Cell::Hole => (landed, -1.0, true),
            _ => (landed, 0.0, false),
        },
    }
}

fn check_step(kind: GridKind, map: &GridMap, s: usize, a: usize) -> Result<()> {
    if s >= map.num_cells() {
        return Err(Error::contract(format!("cell {s} outside the map")));
    }
    if a >= NUM_ACTIONS {
        return Err(Error::contract(format!("grid action {a} out of range")));
    }
    if is_terminal(kind, map, s) {
        return Err(Error::contract(format!("cell {s} is terminal")));
    }
    Ok(())
}

/// Exact outcome distribution of taking `a` in `s`, identical outcomes merged.
pub fn outcomes(kind: GridKind, map: &GridMap, s: usize, a: usize, p: &GridParams) -> Result<Vec<Outcome>> {
    check_step(kind, map, s, a)?;
    let dist = &p.dists[map.half_index(s).min(p.dists.len() - 1)];
    let mut out: Vec<Outcome> = Vec::with_capacity(4);
    for (prob, dir) in dist.iter().zip(relative_dirs(a)) {
        if *prob <= 0.0 {
            continue;
        }
        let (next, reward, done) = resolve(kind, map, map.neighbour(s, dir));
        match out
            .iter_mut()
            .find(|o| o.next == next && o.reward == reward && o.done == done)
        {
            Some(o) => o.prob += prob,
            None => out.push(Outcome { next, prob: *prob, reward, done }),
        }
    }
    Ok(out)
}

/// Successor cells of `(s, a)` with their probabilities.
pub fn transition_model(kind: GridKind, map: &GridMap, s: usize, a: usize, p: &GridParams) -> Result<Vec<(usize, f64)>> {
    let mut cells: Vec<(usize, f64)> = Vec::with_capacity(4);
    for o in outcomes(kind, map, s, a, p)? {
        match cells.iter_mut().find(|(c, _)| *c == o.next) {
            Some((_, q)) => *q += o.prob,
            None => cells.push((o.next, o.prob)),
        }
    }
    Ok(cells)
}

/// Samples one step.
pub fn step<R: Rng + ?Sized>(
    kind: GridKind,
    map: &GridMap,
    s: usize,
    a: usize,
    p: &GridParams,
    rng: &mut R,
) -> Result<(usize, f64, bool)> {
    check_step(kind, map, s, a)?;
    let dist = &p.dists[map.half_index(s).min(p.dists.len() - 1)];
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = 0;
    for (i, prob) in dist.iter().enumerate() {
        if *prob <= 0.0 {
            continue;
        }
        chosen = i;
        acc += prob;
        if u < acc {
            break;
        }
    }
    let dir = relative_dirs(a)[chosen];
    Ok(resolve(kind, map, map.neighbour(s, dir)))
}
