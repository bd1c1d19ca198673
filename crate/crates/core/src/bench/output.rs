//! CSV rows and markdown summary tables.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::{EpisodeResult, RunStats};
use crate::error::Result;

pub const CSV_COLUMNS: [&str; 11] = [
    "env",
    "agent",
    "alpha",
    "change_mode",
    "target",
    "notify",
    "seed",
    "episode",
    "reward",
    "steps",
    "truncated",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub env: String,
    pub agent: String,
    pub alpha: Option<f64>,
    pub change_mode: String,
    pub target: Option<f64>,
    pub notify: String,
    pub seed: u64,
    pub episode: u64,
    pub reward: f64,
    pub steps: u64,
    pub truncated: bool,
}

impl ResultRow {
    pub fn new(cfg: &ExperimentConfig, r: &EpisodeResult) -> Self {
        ResultRow {
            env: cfg.env.to_string(),
            agent: cfg.agent.name().to_string(),
            alpha: cfg.agent.alpha(),
            change_mode: cfg.change_mode.name().to_string(),
            target: cfg.change_mode.target(),
            notify: cfg.notify.to_string(),
            seed: r.seed,
            episode: r.episode,
            reward: r.reward,
            steps: r.steps,
            truncated: r.truncated,
        }
    }

    /// Agent column label, e.g. `pamcts(0.25)`.
    pub fn agent_label(&self) -> String {
        match self.alpha {
            Some(a) => format!("{}({a})", self.agent),
            None => self.agent.clone(),
        }
    }

    /// Setting label, e.g. `single 0.6 / none`.
    pub fn setting_label(&self) -> String {
        match self.target {
            Some(t) => format!("{} {t} / {}", self.change_mode, self.notify),
            None => format!("{} / {}", self.change_mode, self.notify),
        }
    }
}

pub fn rows_for(cfg: &ExperimentConfig, results: &[EpisodeResult]) -> Vec<ResultRow> {
    results.iter().map(|r| ResultRow::new(cfg, r)).collect()
}

pub fn write_csv<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// `mean ± stderr` to two decimals.
pub fn format_cell(stats: &RunStats) -> String {
    format!("{:.2} ± {:.2}", stats.mean, stats.stderr)
}

/// Markdown table with one row per environment and setting and one column
/// per agent. Groups with fewer than two episodes show `n/a`.
pub fn markdown_table(rows: &[ResultRow]) -> String {
    let mut agents: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(String, String), BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        let label = row.agent_label();
        if !agents.contains(&label) {
            agents.push(label.clone());
        }
        groups
            .entry((row.env.clone(), row.setting_label()))
            .or_default()
            .entry(label)
            .or_default()
            .push(row.reward);
    }
    let mut out = String::from("| env | setting |");
    for a in &agents {
        out.push_str(&format!(" {a} |"));
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---|".repeat(agents.len()));
    out.push('\n');
    for ((env, setting), cells) in &groups {
        out.push_str(&format!("| {env} | {setting} |"));
        for a in &agents {
            let cell = match cells.get(a) {
                Some(r) => match RunStats::from_rewards(r, Duration::ZERO) {
                    Ok(s) => format_cell(&s),
                    Err(_) => "n/a".into(),
                },
                None => String::new(),
            };
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::{AgentSpec, ChangeMode};
    use crate::envs::EnvKind;

    fn sample() -> Vec<ResultRow> {
        let cfg = ExperimentConfig::new(EnvKind::FrozenLake, AgentSpec::Pamcts { alpha: 0.25 }, ChangeMode::Single { target: 0.6 });
        (0..4)
            .map(|i| {
                ResultRow::new(
                    &cfg,
                    &EpisodeResult { episode: i, seed: 1000 + i, reward: (1 - i % 2) as f64, steps: 7, truncated: false },
                )
            })
            .collect()
    }

    #[test]
    fn header_and_one_line() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &sample()[..1]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "env,agent,alpha,change_mode,target,notify,seed,episode,reward,steps,truncated");
        assert_eq!(lines[1], "frozenlake,pamcts,0.25,single,0.6,none,1000,0,1.0,7,false");
    }

    #[test]
    fn round_trip() {
        let mut rows = sample();
        rows[1].alpha = None;
        rows[1].target = None;
        rows[2].reward = 0.1 + 0.2;
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn empty_rows_still_have_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
        assert!(read_csv(&b"env,agent,alpha,change_mode,target,notify,seed,episode,reward,steps,truncated\n"[..]).unwrap().is_empty());
    }

    #[test]
    fn markdown_cell() {
        let s = RunStats::from_rewards(&[1.0, 0.0, 1.0, 0.0], Duration::ZERO).unwrap();
        assert_eq!(format_cell(&s), "0.50 ± 0.29");
        let table = markdown_table(&sample());
        assert!(table.contains("| frozenlake | single 0.6 / none | 0.50 ± 0.29 |"), "{table}");
        assert!(table.starts_with("| env | setting | pamcts(0.25) |"));
    }
}
