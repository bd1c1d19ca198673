//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use nsbench::agents::RobustModel;
use nsbench::envs::grid::{Cell, GridMap, Outcome};
use nsbench::Result;
use rand::Rng;

/// Earth mover's distance between two distributions on `0..n` with unit
/// spacing, by north-west corner transport along the sorted support.
pub fn transport_w1(p: &[f64], q: &[f64]) -> f64 {
    let mut supply = p.to_vec();
    let mut demand = q.to_vec();
    let (mut i, mut j) = (0, 0);
    let mut cost = 0.0;
    while i < supply.len() && j < demand.len() {
        let moved = supply[i].min(demand[j]);
        cost += moved * (i as f64 - j as f64).abs();
        supply[i] -= moved;
        demand[j] -= moved;
        if supply[i] <= demand[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    cost
}

pub fn random_dist<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Grid move in the Left/Down/Right/Up encoding; walls keep the agent in place.
pub fn grid_move(map: &GridMap, cell: usize, a: usize) -> usize {
    let (r, c) = map.coords(cell);
    let (r, c) = (r as isize, c as isize);
    let (nr, nc) = match a {
        0 => (r, c - 1),
        1 => (r + 1, c),
        2 => (r, c + 1),
        _ => (r - 1, c),
    };
    if nr < 0 || nc < 0 || nr >= map.rows() as isize || nc >= map.cols() as isize {
        cell
    } else {
        map.index(nr as usize, nc as usize)
    }
}

/// Breadth-first distances to the nearest goal, never entering holes.
pub fn goal_distances(map: &GridMap) -> Vec<Option<usize>> {
    let n = map.num_cells();
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for c in 0..n {
        if map.cell(c) == Cell::Goal {
            dist[c] = Some(0);
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        let d = dist[c].unwrap();
        for prev in 0..n {
            if dist[prev].is_some() || matches!(map.cell(prev), Cell::Hole | Cell::Goal) {
                continue;
            }
            if (0..4).any(|a| grid_move(map, prev, a) == c) {
                dist[prev] = Some(d + 1);
                queue.push_back(prev);
            }
        }
    }
    dist
}

/// Random robust toy: every (state, action) has an intended successor taken
/// with probability `p`, the rest spread over up to two other successors.
#[derive(Debug, Clone)]
pub struct Toy {
    pub states: usize,
    pub actions: usize,
    pub terminal: Vec<bool>,
    pub nominal: f64,
    /// (intended, others, reward per successor index 0 = intended)
    pub edges: Vec<Vec<(usize, Vec<usize>, Vec<f64>)>>,
}

impl Toy {
    pub fn random<R: Rng>(rng: &mut R) -> Toy {
        let states = rng.gen_range(2..=6);
        let actions = rng.gen_range(2..=3);
        let mut terminal: Vec<bool> = (0..states).map(|_| rng.gen_bool(0.3)).collect();
        terminal[0] = false;
        let edges = (0..states)
            .map(|_| {
                (0..actions)
                    .map(|_| {
                        let intended = rng.gen_range(0..states);
                        let others: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..states)).collect();
                        let rewards = (0..=others.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        (intended, others, rewards)
                    })
                    .collect()
            })
            .collect();
        Toy {
            states,
            actions,
            terminal,
            nominal: rng.gen_range(0.3..1.0),
            edges,
        }
    }
}

impl RobustModel for Toy {
    fn num_actions(&self) -> usize {
        self.actions
    }

    fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    fn nominal(&self) -> Result<f64> {
        Ok(self.nominal)
    }

    fn outcomes_at(&self, s: usize, a: usize, p: f64) -> Result<Vec<Outcome>> {
        let (intended, others, rewards) = &self.edges[s][a];
        let mut out = vec![Outcome {
            next: *intended,
            prob: p,
            reward: rewards[0],
            done: self.terminal[*intended],
        }];
        let share = (1.0 - p) / others.len() as f64;
        for (i, o) in others.iter().enumerate() {
            out.push(Outcome {
                next: *o,
                prob: share,
                reward: rewards[i + 1],
                done: self.terminal[*o],
            });
        }
        Ok(out)
    }
}

/// Exhaustive maximin value of `a` at `s`, enumerating every adversary
/// choice at every chance node without sharing subtrees.
pub fn brute_q(toy: &Toy, s: usize, a: usize, depth: u32, d: u32, gamma: f64, l: f64, k_points: usize, floor: f64) -> f64 {
    let radius = l * depth as f64;
    let hi = (toy.nominal + radius).min(1.0);
    let lo = (toy.nominal - radius).max(floor).min(hi);
    let mut worst = f64::INFINITY;
    for i in 0..k_points {
        let p = lo + (hi - lo) * i as f64 / (k_points - 1) as f64;
        let mut total = 0.0;
        for o in toy.outcomes_at(s, a, p).unwrap() {
            let cont = if o.done || depth + 1 >= d {
                0.0
            } else {
                (0..toy.actions)
                    .map(|b| brute_q(toy, o.next, b, depth + 1, d, gamma, l, k_points, floor))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            total += o.prob * (o.reward + gamma * cont);
        }
        worst = worst.min(total);
    }
    worst
}
