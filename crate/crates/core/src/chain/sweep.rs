use rayon::prelude::*;

use super::{
    chain_system, classify, site_populations, ChainSpec, SitePopulations, TemperatureProfile,
    ThermophoresisVerdict,
};
use crate::davies::DaviesModel;
use crate::error::{Error, Result};
use crate::operator::DensityMatrix;

/// Steady state of one chain configuration.
#[derive(Debug, Clone)]
pub struct ChainSolution {
    pub state: DensityMatrix,
    pub populations: SitePopulations,
    /// Heat current into each local bath.
    pub heat_currents: Vec<f64>,
    /// `Err(NotApplicable)` for a flat profile.
    pub verdict: Result<ThermophoresisVerdict>,
}

pub fn solve_chain(spec: &ChainSpec, epsilon: f64) -> Result<ChainSolution> {
    let model = DaviesModel::new(chain_system(spec)?, epsilon)?;
    let state = model.steady_state()?;
    let populations = site_populations(&state, spec)?;
    let heat_currents = model.heat_currents(&state)?;
    let verdict = classify(&populations, &spec.profile);
    Ok(ChainSolution {
        state,
        populations,
        heat_currents,
        verdict,
    })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub g: f64,
    pub left: f64,
    pub right: f64,
    pub outcome: Result<ChainSolution>,
}

/// Steady states over every `(T_L, T_R)` pair (outer) and `g` (inner).
///
/// Grid points are solved in parallel on the current rayon pool; rows come back
/// in grid order. A failed point is reported in its row without stopping the sweep.
pub fn figure2_sweep(
    template: &ChainSpec,
    g_values: &[f64],
    temperatures: &[(f64, f64)],
    epsilon: f64,
) -> Vec<SweepRow> {
    let grid: Vec<(f64, f64, f64)> = temperatures
        .iter()
        .flat_map(|&(l, r)| g_values.iter().map(move |&g| (g, l, r)))
        .collect();
    grid.par_iter()
        .map(|&(g, left, right)| {
            let outcome = template
                .with_g(g)
                .and_then(|s| s.with_profile(TemperatureProfile::Linear { left, right }))
                .and_then(|s| solve_chain(&s, epsilon));
            SweepRow {
                g,
                left,
                right,
                outcome,
            }
        })
        .collect()
}

/// Default parameter grids for the four population panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure2Panel {
    /// Fixed gradient `T_L - T_R = 0.4`, mean temperature 0.3, 0.6, 0.9; `g = 0.1`.
    B,
    /// Fixed mean temperature 0.6, gradient 0.2, 0.4, 0.6; `g = 0.1`.
    C,
    /// `T_L = 0.8`, `T_R = 0.4`, `g` from 0.1 to 1.3.
    D,
    /// `T_L = 0.3`, `T_R = 0.1`, `g` from 0.1 to 1.3.
    E,
}

/// Default tunnelling sweep for panels D and E, in units of `h`.
pub const DEFAULT_G_SWEEP: [f64; 7] = [0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3];

impl Figure2Panel {
    pub const ALL: [Figure2Panel; 4] = [Self::B, Self::C, Self::D, Self::E];

    pub fn name(self) -> &'static str {
        match self {
            Self::B => "b",
            Self::C => "c",
            Self::D => "d",
            Self::E => "e",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::invalid(
                    "panel",
                    format!("unknown panel `{s}`, expected one of b, c, d, e"),
                )
            })
    }

    /// `(g values, (T_L, T_R) pairs)` with energies in units of `h`.
    pub fn grid(self) -> (Vec<f64>, Vec<(f64, f64)>) {
        match self {
            Self::B => (
                vec![0.1],
                [0.3, 0.6, 0.9].iter().map(|m| (m + 0.2, m - 0.2)).collect(),
            ),
            Self::C => (
                vec![0.1],
                [0.2, 0.4, 0.6]
                    .iter()
                    .map(|d| (0.6 + d / 2.0, 0.6 - d / 2.0))
                    .collect(),
            ),
            Self::D => (DEFAULT_G_SWEEP.to_vec(), vec![(0.8, 0.4)]),
            Self::E => (DEFAULT_G_SWEEP.to_vec(), vec![(0.3, 0.1)]),
        }
    }
}
