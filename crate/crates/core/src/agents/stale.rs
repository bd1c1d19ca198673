//! Stale policies: action values fitted once on the base environment and
//! never refreshed as the environment drifts.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::uct::argmax;
use crate::envs::{EnvKind, EnvModel, EnvState};
use crate::error::{Error, Result};
use crate::seed::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    TabularVi,
    DiscretizedQ,
}

/// Uniform binning of the cartpole state, `bins` buckets per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    pub bins: usize,
    pub low: [f64; 4],
    pub high: [f64; 4],
}

impl Discretizer {
    pub fn cartpole(bins: usize) -> Self {
        Discretizer {
            bins,
            low: [-2.4, -3.0, -0.21, -3.5],
            high: [2.4, 3.0, 0.21, 3.5],
        }
    }

    pub fn num_states(&self) -> usize {
        self.bins.pow(4)
    }

    pub fn index(&self, x: &[f64; 4]) -> usize {
        let mut idx = 0;
        for d in 0..4 {
            let frac = (x[d] - self.low[d]) / (self.high[d] - self.low[d]);
            let b = ((frac * self.bins as f64).floor().max(0.0) as usize).min(self.bins - 1);
            idx = idx * self.bins + b;
        }
        idx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StalePolicy {
    env: EnvKind,
    provider: ProviderKind,
    discretizer: Option<Discretizer>,
    num_actions: usize,
    q: Vec<f64>,
}

impl StalePolicy {
    pub fn env(&self) -> EnvKind {
        self.env
    }

    pub fn provider(&self) -> ProviderKind {
        self.provider
    }

    pub fn num_states(&self) -> usize {
        self.q.len() / self.num_actions
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn discretizer(&self) -> Option<&Discretizer> {
        self.discretizer.as_ref()
    }

    pub fn state_index(&self, s: &EnvState) -> Result<usize> {
        let idx = match (s, &self.discretizer) {
            (EnvState::Cell(c), None) => *c,
            (EnvState::CartPole(c), Some(d)) => d.index(&c.as_array()),
            _ => return Err(Error::contract("state does not match the stale policy")),
        };
        if idx >= self.num_states() {
            return Err(Error::contract(format!("state index {idx} outside the policy table")));
        }
        Ok(idx)
    }

    pub fn row(&self, idx: usize) -> &[f64] {
        &self.q[idx * self.num_actions..(idx + 1) * self.num_actions]
    }

    pub fn q_values(&self, s: &EnvState) -> Result<&[f64]> {
        Ok(self.row(self.state_index(s)?))
    }

    pub fn greedy(&self, s: &EnvState) -> Result<usize> {
        Ok(argmax(self.q_values(s)?))
    }

    /// Writes the table as CSV: a `#` header line naming the environment and
    /// discretization, then `state,action,q` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let bins = self.discretizer.map_or(0, |d| d.bins);
        writeln!(w, "# env={} provider={} bins={}", self.env, provider_str(self.provider), bins)?;
        writeln!(w, "state,action,q")?;
        let mut line = String::new();
        for s in 0..self.num_states() {
            for (a, q) in self.row(s).iter().enumerate() {
                line.clear();
                // {:?} keeps the shortest representation that round-trips
                let _ = write!(line, "{s},{a},{q:?}");
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty policy file".into()))??;
        let mut env = None;
        let mut provider = None;
        let mut bins = 0usize;
        for field in header.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("env", v)) => env = Some(v.parse::<EnvKind>()?),
                Some(("provider", v)) => {
                    provider = Some(match v {
                        "tabular_vi" => ProviderKind::TabularVi,
                        "discretized_q" => ProviderKind::DiscretizedQ,
                        _ => return Err(Error::Parse(format!("unknown provider `{v}`"))),
                    })
                }
                Some(("bins", v)) => bins = v.parse().map_err(|_| Error::Parse(format!("bad bins `{v}`")))?,
                _ => {}
            }
        }
        let env = env.ok_or_else(|| Error::Parse("policy header lacks env".into()))?;
        let provider = provider.ok_or_else(|| Error::Parse("policy header lacks provider".into()))?;
        let num_actions = env.num_actions();
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        for line in lines.skip(1) {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || parts.next().ok_or_else(|| Error::Parse(format!("short row `{line}`")));
            let s: usize = next()?.parse().map_err(|_| Error::Parse("bad state".into()))?;
            let a: usize = next()?.parse().map_err(|_| Error::Parse("bad action".into()))?;
            let q: f64 = next()?.parse().map_err(|_| Error::Parse("bad q".into()))?;
            rows.push((s, a, q));
        }
        let n_states = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let mut q = vec![0.0; n_states * num_actions];
        for (s, a, v) in rows {
            if a >= num_actions {
                return Err(Error::Parse(format!("action {a} out of range")));
            }
            q[s * num_actions + a] = v;
        }
        Ok(StalePolicy {
            env,
            provider,
            discretizer: (bins > 0).then(|| Discretizer::cartpole(bins)),
            num_actions,
            q,
        })
    }
}

fn provider_str(p: ProviderKind) -> &'static str {
    match p {
        ProviderKind::TabularVi => "tabular_vi",
        ProviderKind::DiscretizedQ => "discretized_q",
    }
}

/// Optimal state values of a gridworld model by value iteration.
///
/// Stops once successive sweeps differ by at most `tol`, which bounds the
/// Bellman residual of the returned values by `gamma * tol`.
pub fn value_iteration(model: &EnvModel, gamma: f64, tol: f64) -> Result<Vec<f64>> {
    let map = model
        .map()
        .ok_or_else(|| Error::Unsupported(format!("{} has no enumerable state space", model.kind())))?;
    let n = map.num_cells();
    let na = model.num_actions();
    let mut table = Vec::with_capacity(n);
    for s in 0..n {
        let terminal = model.is_terminal(&EnvState::Cell(s));
        let mut per_action = Vec::with_capacity(na);
        if !terminal {
            for a in 0..na {
                per_action.push(model.outcomes(s, a)?);
            }
        }
        table.push(per_action);
    }
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..10_000_000 {
        let mut diff: f64 = 0.0;
        for s in 0..n {
            if table[s].is_empty() {
                next[s] = 0.0;
                continue;
            }
            let best = table[s]
                .iter()
                .map(|outs| {
                    outs.iter()
                        .map(|o| o.prob * (o.reward + if o.done { 0.0 } else { gamma * v[o.next] }))
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            diff = diff.max((best - v[s]).abs());
            next[s] = best;
        }
        std::mem::swap(&mut v, &mut next);
        if diff <= tol {
            return Ok(v);
        }
    }
    Err(Error::contract("value iteration did not converge"))
}

/// Action values of `model` from its converged state values.
pub fn solve_stale_policy_tabular(model: &EnvModel, gamma: f64, tol: f64) -> Result<StalePolicy> {
    let v = value_iteration(model, gamma, tol)?;
    let na = model.num_actions();
    let mut q = vec![0.0; v.len() * na];
    for s in 0..v.len() {
        if model.is_terminal(&EnvState::Cell(s)) {
            continue;
        }
        for a in 0..na {
            q[s * na + a] = model
                .outcomes(s, a)?
                .iter()
                .map(|o| o.prob * (o.reward + if o.done { 0.0 } else { gamma * v[o.next] }))
                .sum();
        }
    }
    Ok(StalePolicy {
        env: model.kind(),
        provider: ProviderKind::TabularVi,
        discretizer: None,
        num_actions: na,
        q,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QLearningConfig {
    pub bins: usize,
    pub episodes: u32,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub max_steps: u32,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        QLearningConfig {
            bins: 10,
            episodes: 20_000,
            alpha: 0.1,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.01,
            max_steps: 500,
        }
    }
}

/// Tabular Q-learning over a uniform discretization of the cartpole state.
pub fn fit_stale_policy_discretized(model: &EnvModel, cfg: &QLearningConfig, rng: &mut Stream) -> Result<StalePolicy> {
    if model.kind() != EnvKind::CartPole {
        return Err(Error::Unsupported(format!("discretized Q-learning needs cartpole, got {}", model.kind())));
    }
    if cfg.bins < 1 {
        return Err(Error::config("need at least one bin per dimension"));
    }
    let disc = Discretizer::cartpole(cfg.bins);
    let na = model.num_actions();
    let mut q = vec![0.0; disc.num_states() * na];
    let decay_span = (cfg.episodes as f64 * 0.8).max(1.0);
    for ep in 0..cfg.episodes {
        let frac = (ep as f64 / decay_span).min(1.0);
        let eps = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
        let mut s = model.reset(rng);
        for _ in 0..cfg.max_steps {
            let cs = s.cartpole().expect("cartpole state");
            let si = disc.index(&cs.as_array());
            let a = if rng.gen::<f64>() < eps {
                rng.gen_range(0..na)
            } else {
                argmax(&q[si * na..(si + 1) * na])
            };
            let (next, r, done) = model.step(&s, a, rng)?;
            let target = if done {
                r
            } else {
                let ni = disc.index(&next.cartpole().expect("cartpole state").as_array());
                r + cfg.gamma * q[ni * na..(ni + 1) * na].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            };
            let slot = &mut q[si * na + a];
            *slot += cfg.alpha * (target - *slot);
            if done {
                break;
            }
            s = next;
        }
    }
    Ok(StalePolicy {
        env: EnvKind::CartPole,
        provider: ProviderKind::DiscretizedQ,
        discretizer: Some(disc),
        num_actions: na,
        q,
    })
}

/// Mean undiscounted return of the greedy policy over `episodes` runs capped at `cap` steps.
pub fn evaluate_greedy(model: &EnvModel, policy: &StalePolicy, episodes: u32, cap: u32, rng: &mut Stream) -> Result<f64> {
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut s = model.reset(rng);
        for _ in 0..cap {
            let (next, r, done) = model.step(&s, policy.greedy(&s)?, rng)?;
            total += r;
            if done {
                break;
            }
            s = next;
        }
    }
    Ok(total / episodes.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::grid::{GridKind, GridParams};
    use crate::envs::EnvParams;
    use crate::seed;
    use std::sync::Arc;

    fn frozen(p: f64) -> EnvModel {
        EnvModel::new(
            EnvKind::FrozenLake,
            EnvParams::Grid(GridParams::with_intended(GridKind::FrozenLake, p)),
            Some(Arc::new(GridKind::FrozenLake.canonical_map())),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_greedy_reaches_goal() {
        let m = frozen(1.0);
        let pol = solve_stale_policy_tabular(&m, 0.99, 1e-10).unwrap();
        let mut s = m.reset(&mut seed::stream(0));
        let mut rng = seed::stream(0);
        let mut reward = 0.0;
        for _ in 0..20 {
            let (n, r, done) = m.step(&s, pol.greedy(&s).unwrap(), &mut rng).unwrap();
            reward += r;
            if done {
                break;
            }
            s = n;
        }
        assert_eq!(reward, 1.0);
    }

    #[test]
    fn cartpole_rejected_by_vi() {
        let m = EnvModel::canonical(EnvKind::CartPole);
        assert!(matches!(solve_stale_policy_tabular(&m, 0.9, 1e-6), Err(Error::Unsupported(_))));
        let g = frozen(1.0);
        assert!(fit_stale_policy_discretized(&g, &QLearningConfig::default(), &mut seed::stream(0)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let pol = solve_stale_policy_tabular(&frozen(0.7), 0.99, 1e-8).unwrap();
        let mut buf = Vec::new();
        pol.write_csv(&mut buf).unwrap();
        let back = StalePolicy::read_csv(&buf[..]).unwrap();
        assert_eq!(back, pol);
    }

    #[test]
    fn discretizer_shape() {
        let d = Discretizer::cartpole(6);
        assert_eq!(d.num_states(), 1296);
        assert_eq!(d.index(&[-10.0; 4]), 0);
        assert_eq!(d.index(&[10.0; 4]), 1295);
    }
}
