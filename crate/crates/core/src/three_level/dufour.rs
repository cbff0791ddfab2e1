//! Heat released by a Lambda system held at fixed (nonequilibrium) populations.

use super::LevelPopulations;
use crate::davies::{bose_occupation, temperature_for_occupation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DufourCurrents {
    pub j1: f64,
    pub j2: f64,
    /// `J_1 > J_2 > 0`.
    pub holds: bool,
}

/// `J_k = omega Gamma [(n_k + 1) P_e - n_k P_k]` for equal gaps `omega`.
pub fn dufour_currents(
    pops: &LevelPopulations,
    n1: f64,
    n2: f64,
    omega: f64,
    gamma: f64,
) -> DufourCurrents {
    let j = |n: f64, p: f64| omega * gamma * ((n + 1.0) * pops.pe - n * p);
    let j1 = j(n1, pops.p1);
    let j2 = j(n2, pops.p2);
    DufourCurrents {
        j1,
        j2,
        holds: j1 > j2 && j2 > 0.0,
    }
}

/// Two baths with equal finite heat capacity, warmed by clamped Lambda populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DufourSetup {
    pub populations: LevelPopulations,
    pub omega: f64,
    pub gamma: f64,
    /// Common initial occupation `n_1(0) = n_2(0)`.
    pub initial_occupation: f64,
    /// Heat capacity of each bath; `f64::INFINITY` keeps temperatures fixed.
    pub capacity: f64,
    pub horizon: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DufourHistory {
    pub times: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// A temperature reached zero before the horizon; the history stops there.
    pub halted: bool,
}

fn rhs(setup: &DufourSetup, t: [f64; 2]) -> Option<[f64; 2]> {
    if t[0] <= 0.0 || t[1] <= 0.0 {
        return None;
    }
    let n1 = bose_occupation(setup.omega, t[0]).ok()?;
    let n2 = bose_occupation(setup.omega, t[1]).ok()?;
    let j = dufour_currents(&setup.populations, n1, n2, setup.omega, setup.gamma);
    Some([j.j1 / setup.capacity, j.j2 / setup.capacity])
}

/// Integrates `dT_k/dt = J_k / C` with RK4, recomputing `n_k` from `T_k`.
pub fn finite_capacity_dufour(setup: &DufourSetup) -> Result<DufourHistory> {
    if !(setup.capacity > 0.0) {
        return Err(Error::invalid("capacity", "heat capacity must be positive"));
    }
    if !(setup.horizon > 0.0) || !(setup.step > 0.0) {
        return Err(Error::invalid(
            "horizon",
            "horizon and step must be positive",
        ));
    }
    if !(setup.gamma > 0.0) {
        return Err(Error::invalid("gamma", "rate must be positive"));
    }
    let t0 = temperature_for_occupation(setup.omega, setup.initial_occupation)?;
    if t0 == 0.0 {
        return Err(Error::invalid(
            "initial_occupation",
            "baths must start above zero temperature",
        ));
    }

    let steps = (setup.horizon / setup.step).ceil() as usize;
    let h = setup.horizon / steps as f64;
    let mut temps = [t0, t0];
    let mut history = DufourHistory {
        times: vec![0.0],
        t1: vec![t0],
        t2: vec![t0],
        halted: false,
    };
    let add = |a: [f64; 2], k: [f64; 2], s: f64| [a[0] + s * k[0], a[1] + s * k[1]];
    for i in 1..=steps {
        let next = (|| {
            let k1 = rhs(setup, temps)?;
            let k2 = rhs(setup, add(temps, k1, h / 2.0))?;
            let k3 = rhs(setup, add(temps, k2, h / 2.0))?;
            let k4 = rhs(setup, add(temps, k3, h))?;
            let out = [
                temps[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                temps[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            (out[0] > 0.0 && out[1] > 0.0).then_some(out)
        })();
        match next {
            Some(t) => {
                temps = t;
                history.times.push(i as f64 * h);
                history.t1.push(t[0]);
                history.t2.push(t[1]);
            }
            None => {
                history.halted = true;
                break;
            }
        }
    }
    Ok(history)
}
