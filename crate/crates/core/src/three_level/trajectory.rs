//! Mean-position diagnostics along integrated three-level trajectories.

use super::analytic::oscillator_params;
use super::{Configuration, LevelPopulations, ThreeLevelParams};
use crate::davies::Trajectory;
use crate::error::{Error, Result};

/// Relative spacing deviation tolerated for a "uniform" time grid.
const GRID_TOL: f64 = 1e-9;

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 4 {
        return Err(Error::invalid("trajectory", "need at least 4 samples"));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= GRID_TOL * dt);
    if !uniform {
        return Err(Error::invalid("trajectory", "time grid must be uniform"));
    }
    Ok(dt)
}

/// First derivative: central differences inside, second-order one-sided at the ends.
fn first_derivative(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
    for i in 1..n - 1 {
        d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
    }
    d
}

fn second_derivative(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    let h2 = dt * dt;
    let mut d = vec![0.0; n];
    d[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) / h2;
    d[n - 1] = (2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) / h2;
    for i in 1..n - 1 {
        d[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / h2;
    }
    d
}

fn positions(params: &ThreeLevelParams, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.states
        .iter()
        .map(|rho| {
            let p = LevelPopulations::from_state(rho, params.configuration)?;
            Ok(0.5 * params.d * p.unbalance())
        })
        .collect()
}

/// `<X>(t)` with its derivatives and the residual of the oscillator equation.
#[derive(Debug, Clone)]
pub struct PositionResidual {
    pub times: Vec<f64>,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
    /// `m* X'' + Gamma X' + m* Omega^2 X - F` at every sample.
    pub residual: Vec<f64>,
    /// `max |residual|` over the largest magnitude of any single term.
    pub max_relative_residual: f64,
    /// Same measure on every other sample divided by `max_relative_residual`;
    /// close to 4 when the residual is pure second-order discretization error.
    pub refinement_ratio: Option<f64>,
    /// Set when the residual is significant but does not shrink like `dt^2`.
    pub coarse_grid: bool,
}

/// Velocity, acceleration, residual and the maximum relative residual.
type GridResidual = (Vec<f64>, Vec<f64>, Vec<f64>, f64);

fn residual_on_grid(params: &ThreeLevelParams, x: &[f64], dt: f64) -> Result<GridResidual> {
    let osc = oscillator_params(params)?;
    let v = first_derivative(x, dt);
    let a = second_derivative(x, dt);
    let m = osc.effective_mass;
    let mut scale = osc.drive.abs();
    let mut worst = 0.0_f64;
    let mut residual = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let terms = [m * a[i], osc.damping * v[i], m * osc.omega_sq * x[i]];
        for t in terms {
            scale = scale.max(t.abs());
        }
        let r = terms.iter().sum::<f64>() - osc.drive;
        worst = worst.max(r.abs());
        residual.push(r);
    }
    let rel = if scale > 0.0 { worst / scale } else { 0.0 };
    Ok((v, a, residual, rel))
}

/// Evaluates the oscillator equation along a trajectory sampled on a uniform grid.
pub fn mean_position_trajectory(
    params: &ThreeLevelParams,
    traj: &Trajectory,
) -> Result<PositionResidual> {
    let dt = uniform_step(&traj.times)?;
    let x = positions(params, traj)?;
    let (velocity, acceleration, residual, max_relative_residual) =
        residual_on_grid(params, &x, dt)?;

    let coarse: Vec<f64> = x.iter().step_by(2).copied().collect();
    let refinement_ratio = if coarse.len() >= 4 && max_relative_residual > 0.0 {
        let (_, _, _, rel) = residual_on_grid(params, &coarse, 2.0 * dt)?;
        Some(rel / max_relative_residual)
    } else {
        None
    };
    let coarse_grid = max_relative_residual > 1e-6 && refinement_ratio.is_some_and(|r| r < 3.0);

    Ok(PositionResidual {
        times: traj.times.clone(),
        position: x,
        velocity,
        acceleration,
        residual,
        max_relative_residual,
        refinement_ratio,
        coarse_grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverdampedWindow {
    /// Last half of the trajectory, which must start after five slow-mode times.
    LateTime,
    /// Every interior sample, transient included.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverdampedReport {
    /// Mean of `X'' / (-Gamma nbar X')` over the window.
    pub mean_ratio: f64,
    /// `max - min` of the ratio over the window.
    pub spread: f64,
    pub samples: usize,
    pub window_start: f64,
    /// Decay rate of the slow mode of the oscillator.
    pub slow_rate: f64,
    /// Whether `nbar >= 10`, where the overdamped reduction is expected to hold.
    pub high_temperature: bool,
}

/// Slow relaxation rate of `m* X'' + Gamma X' + m* Omega^2 X`.
fn slow_rate(params: &ThreeLevelParams) -> Result<f64> {
    let osc = oscillator_params(params)?;
    let b = osc.damping / osc.effective_mass;
    let disc = b * b - 4.0 * osc.omega_sq;
    Ok(0.5 * (b - disc.max(0.0).sqrt()))
}

/// Compares `<X''>` with `-Gamma nbar <X'>` along a Lambda trajectory.
pub fn overdamped_check(
    params: &ThreeLevelParams,
    traj: &Trajectory,
    window: OverdampedWindow,
) -> Result<OverdampedReport> {
    if params.configuration != Configuration::Lambda {
        return Err(Error::NotApplicable(
            "overdamped reduction is stated for the Lambda system".into(),
        ));
    }
    let gamma = params.common_gamma()?;
    let [n1, n2] = params.occupations()?;
    let nbar = 0.5 * (n1 + n2);
    if nbar == 0.0 {
        return Err(Error::DegenerateInput(
            "nbar = 0: reference rate -Gamma nbar vanishes".into(),
        ));
    }
    let dt = uniform_step(&traj.times)?;
    let x = positions(params, traj)?;
    let v = first_derivative(&x, dt);
    let a = second_derivative(&x, dt);
    let rate = slow_rate(params)?;

    let n = x.len();
    let (start, window_start) = match window {
        OverdampedWindow::Full => (1, traj.times[1]),
        OverdampedWindow::LateTime => {
            let t0 = traj.times[0];
            let mid = t0 + 0.5 * (traj.times[n - 1] - t0);
            if rate > 0.0 && mid < 5.0 / rate {
                return Err(Error::NotApplicable(format!(
                    "trajectory too short: late window starts at {mid:.3e}, \
                     five slow-mode times is {:.3e}",
                    5.0 / rate
                )));
            }
            let start = traj.times.iter().position(|&t| t >= mid).unwrap_or(n - 1);
            (start.max(1), traj.times[start.max(1)])
        }
    };
    let end = n - 1;
    let scale = x.iter().map(|v| v.abs()).fold(0.5 * params.d, f64::max);
    let floor = 1e-10 * scale * gamma * nbar;
    let ratios: Vec<f64> = (start..end)
        .filter(|&i| v[i].abs() > floor)
        .map(|i| a[i] / (-gamma * nbar * v[i]))
        .collect();
    if ratios.is_empty() {
        return Err(Error::NotApplicable(
            "trajectory is stationary in the window: derivatives below the noise floor".into(),
        ));
    }
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OverdampedReport {
        mean_ratio,
        spread: max - min,
        samples: ratios.len(),
        window_start,
        slow_rate: rate,
        high_temperature: nbar >= 10.0,
    })
}
