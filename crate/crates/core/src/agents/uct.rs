//! UCT Monte Carlo tree search with uniform random rollouts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GenerativeModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MctsConfig {
    /// Search iterations per decision.
    pub m: u32,
    /// Search horizon: tree depth plus rollout length never exceeds `d`.
    pub d: u32,
    /// Exploration constant.
    pub c: f64,
    pub gamma: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            m: 300,
            d: 100,
            c: std::f64::consts::SQRT_2,
            gamma: 0.99,
        }
    }
}

impl MctsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.d < 1 || !(self.c >= 0.0) || !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(format!(
                "mcts needs m >= 1, d >= 1, c >= 0, gamma in (0, 1]; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// UCB1 score; unvisited children score +inf.
pub fn ucb_score(q_mean: f64, n_child: u32, n_parent: u32, c: f64) -> f64 {
    if n_child == 0 {
        return f64::INFINITY;
    }
    q_mean + c * ((n_parent.max(1) as f64).ln() / n_child as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub action: usize,
    /// Mean discounted return per root action. Unvisited actions carry the
    /// lowest visited mean so they never win a normalized comparison.
    pub q: Vec<f64>,
    pub visits: Vec<u32>,
}

#[derive(Clone, Default)]
struct Edge {
    n: u32,
    total: f64,
    children: Vec<usize>,
}

impl Edge {
    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.total / self.n as f64
        }
    }
}

struct Node<S> {
    state: S,
    terminal: bool,
    visits: u32,
    edges: Vec<Edge>,
}

fn select<S>(node: &Node<S>, c: f64) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (a, e) in node.edges.iter().enumerate() {
        let score = ucb_score(e.mean(), e.n, node.visits, c);
        if score > best_score {
            best = a;
            best_score = score;
        }
    }
    best
}

/// Runs `cfg.m` UCT iterations from `root` on `model`.
pub fn uct_search<M, R>(model: &M, root: &M::State, cfg: &MctsConfig, rng: &mut R) -> Result<SearchResult>
where
    M: GenerativeModel,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    if model.is_terminal(root) {
        return Err(Error::contract("search started from a terminal state"));
    }
    let n_actions = model.num_actions();
    let mut nodes = vec![Node {
        state: root.clone(),
        terminal: false,
        visits: 0,
        edges: vec![Edge::default(); n_actions],
    }];
    let mut path: Vec<(usize, usize, f64)> = Vec::new();

    for _ in 0..cfg.m {
        path.clear();
        let mut node = 0;
        let mut depth = 0u32;
        let leaf_value = loop {
            if nodes[node].terminal || depth >= cfg.d {
                break 0.0;
            }
            let a = select(&nodes[node], cfg.c);
            let (next, r, done) = model.step(&nodes[node].state, a, rng)?;
            path.push((node, a, r));
            depth += 1;
            let existing = nodes[node].edges[a]
                .children
                .iter()
                .copied()
                .find(|&i| nodes[i].state == next);
            match existing {
                Some(child) => node = child,
                None => {
                    let idx = nodes.len();
                    nodes[node].edges[a].children.push(idx);
                    let value = if done { 0.0 } else { rollout(model, &next, cfg.d - depth, cfg.gamma, rng)? };
                    nodes.push(Node {
                        state: next,
                        terminal: done,
                        visits: 0,
                        edges: vec![Edge::default(); n_actions],
                    });
                    break value;
                }
            }
        };
        let mut g = leaf_value;
        for &(n, a, r) in path.iter().rev() {
            g = r + cfg.gamma * g;
            let node = &mut nodes[n];
            node.visits += 1;
            node.edges[a].n += 1;
            node.edges[a].total += g;
        }
    }

    let root = &nodes[0];
    let visits: Vec<u32> = root.edges.iter().map(|e| e.n).collect();
    let floor = root
        .edges
        .iter()
        .filter(|e| e.n > 0)
        .map(Edge::mean)
        .fold(f64::INFINITY, f64::min);
    let q: Vec<f64> = root
        .edges
        .iter()
        .map(|e| if e.n > 0 { e.mean() } else { floor })
        .collect();
    Ok(SearchResult {
        action: argmax(&q),
        q,
        visits,
    })
}

fn rollout<M, R>(model: &M, start: &M::State, horizon: u32, gamma: f64, rng: &mut R) -> Result<f64>
where
    M: GenerativeModel,
    R: Rng + ?Sized,
{
    let n = model.num_actions();
    let mut s = start.clone();
    let mut ret = 0.0;
    let mut discount = 1.0;
    for _ in 0..horizon {
        let a = rng.gen_range(0..n);
        let (next, r, done) = model.step(&s, a, rng)?;
        ret += discount * r;
        discount *= gamma;
        if done {
            break;
        }
        s = next;
    }
    Ok(ret)
}

/// Index of the largest value, ties to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
