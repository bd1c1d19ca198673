//! Classic cart-pole balancing dynamics, explicit Euler integration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const X_THRESHOLD: f64 = 2.4;
/// 12 degrees.
pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

pub const ACTION_LEFT: usize = 0;
pub const ACTION_RIGHT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartPoleParams {
    pub gravity: f64,
    pub masscart: f64,
    pub masspole: f64,
    /// Half the pole length.
    pub pole_half_length: f64,
    pub force_mag: f64,
    pub tau: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        CartPoleParams {
            gravity: 9.8,
            masscart: 1.0,
            masspole: 0.1,
            pole_half_length: 0.5,
            force_mag: 10.0,
            tau: 0.02,
        }
    }
}

impl CartPoleParams {
    pub const NAMES: [&'static str; 6] = [
        "gravity",
        "masscart",
        "masspole",
        "pole_half_length",
        "force_mag",
        "tau",
    ];

    pub fn validate(&self) -> Result<()> {
        for name in Self::NAMES {
            let v = self.get(name).unwrap_or(0.0);
            if !(v > 0.0) {
                return Err(Error::config(format!("cartpole {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "gravity" => self.gravity,
            "masscart" => self.masscart,
            "masspole" => self.masspole,
            "pole_half_length" | "length" => self.pole_half_length,
            "force_mag" => self.force_mag,
            "tau" => self.tau,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Option<()> {
        let slot = match name {
            "gravity" => &mut self.gravity,
            "masscart" => &mut self.masscart,
            "masspole" => &mut self.masspole,
            "pole_half_length" | "length" => &mut self.pole_half_length,
            "force_mag" => &mut self.force_mag,
            "tau" => &mut self.tau,
            _ => return None,
        };
        *slot = value;
        Some(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn is_terminal(&self) -> bool {
        self.x.abs() > X_THRESHOLD || self.theta.abs() > THETA_THRESHOLD
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }
}

/// One Euler step. Reward is +1 for every step taken, including the one
/// that ends the episode.
pub fn step(s: &CartPoleState, action: usize, p: &CartPoleParams) -> Result<(CartPoleState, f64, bool)> {
    if s.is_terminal() {
        return Err(Error::contract("stepping a terminal cartpole state"));
    }
    let force = match action {
        ACTION_LEFT => -p.force_mag,
        ACTION_RIGHT => p.force_mag,
        a => return Err(Error::contract(format!("cartpole action {a} out of range"))),
    };
    let total_mass = p.masspole + p.masscart;
    let polemass_length = p.masspole * p.pole_half_length;
    let (sin, cos) = s.theta.sin_cos();

    let temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin) / total_mass;
    let theta_acc = (p.gravity * sin - cos * temp)
        / (p.pole_half_length * (4.0 / 3.0 - p.masspole * cos * cos / total_mass));
    let x_acc = temp - polemass_length * theta_acc * cos / total_mass;

    let next = CartPoleState {
        x: s.x + p.tau * s.x_dot,
        x_dot: s.x_dot + p.tau * x_acc,
        theta: s.theta + p.tau * s.theta_dot,
        theta_dot: s.theta_dot + p.tau * theta_acc,
    };
    Ok((next, 1.0, next.is_terminal()))
}

/// Initial state with every component uniform in [-0.05, 0.05].
pub fn reset<R: Rng + ?Sized>(rng: &mut R) -> CartPoleState {
    let mut u = || rng.gen_range(-0.05..=0.05);
    CartPoleState {
        x: u(),
        x_dot: u(),
        theta: u(),
        theta_dot: u(),
    }
}
