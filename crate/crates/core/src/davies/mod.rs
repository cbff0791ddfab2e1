//! Microscopic (global, secular) Lindblad master equation for a discrete system
//! coupled to several independent bosonic baths.
//!
//! Each bath couples through a Hermitian operator `sigma_k`. The coupling is
//! projected onto the Bohr frequencies of the system Hamiltonian,
//! `A_w = sum_{E_j - E_i = w} |i><i| sigma_k |j><j|`, and every component gets the
//! thermal rate
//!
//! ```text
//! gamma_k(w) = J_k(w) (1 + n_k(w))       w > 0  (emission into the bath)
//! gamma_k(w) = J_k(|w|) n_k(|w|)         w < 0  (absorption)
//! ```
//!
//! The generator is
//! `L[rho] = -i[H, rho] + sum_k sum_w gamma_k(w) (A rho A^dag - 1/2 {A^dag A, rho})`.

mod dynamics;
mod generator;
mod jumps;

pub use dynamics::{evolve, evolve_with, steady_state, EvolveOptions, Trajectory};
pub use generator::{heat_currents, liouvillian, DaviesModel, Liouvillian};
pub use jumps::{bohr_frequencies, jump_operators, EnergyLevels, JumpChannel, JumpOperatorSet};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;

/// Default tolerance for grouping nearly equal energies and Bohr frequencies.
pub const DEFAULT_FREQUENCY_TOL: f64 = 1e-8;

/// Mean excitation number `1 / (exp(w / T) - 1)` of a bosonic mode.
///
/// Returns 0 at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid(
            "omega",
            format!("must be positive, got {omega}"),
        ));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::invalid(
            "temperature",
            format!("must be non-negative, got {temperature}"),
        ));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Temperature at which a mode of frequency `omega` has occupation `n`.
pub fn temperature_for_occupation(omega: f64, n: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::invalid(
            "omega",
            format!("must be positive, got {omega}"),
        ));
    }
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::invalid(
            "occupation",
            format!("must be non-negative, got {n}"),
        ));
    }
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(omega / (1.0 / n).ln_1p())
}

/// Frequency dependence of the system-bath coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDensity {
    /// `J(w) = rate`.
    Flat { rate: f64 },
    /// `J(w) = slope * w`.
    Ohmic { slope: f64 },
}

impl SpectralDensity {
    pub fn flat(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::invalid(
                "rate",
                format!("flat spectral density needs rate > 0, got {rate}"),
            ));
        }
        Ok(Self::Flat { rate })
    }

    pub fn ohmic(slope: f64) -> Result<Self> {
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(Error::invalid(
                "slope",
                format!("ohmic spectral density needs slope > 0, got {slope}"),
            ));
        }
        Ok(Self::Ohmic { slope })
    }

    /// `J(|w|)`.
    pub fn value(&self, omega: f64) -> f64 {
        match *self {
            Self::Flat { rate } => rate,
            Self::Ohmic { slope } => slope * omega.abs(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Flat { rate } => Self::Flat {
                rate: rate * factor,
            },
            Self::Ohmic { slope } => Self::Ohmic {
                slope: slope * factor,
            },
        }
    }

    /// Thermal transition rate `gamma(w)`; `None` when the zero-frequency limit diverges.
    pub fn thermal_rate(&self, omega: f64, temperature: f64) -> Result<Option<f64>> {
        if omega == 0.0 {
            return Ok(match *self {
                Self::Flat { .. } => None,
                Self::Ohmic { slope } => Some(slope * temperature),
            });
        }
        let n = bose_occupation(omega.abs(), temperature)?;
        let j = self.value(omega);
        Ok(Some(if omega > 0.0 { j * (1.0 + n) } else { j * n }))
    }
}

/// One thermal reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub coupling: HermitianOperator,
    pub spectral: SpectralDensity,
    pub temperature: f64,
}

impl BathSpec {
    pub fn new(
        coupling: HermitianOperator,
        spectral: SpectralDensity,
        temperature: f64,
    ) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::invalid(
                "temperature",
                format!("bath temperature must be finite and >= 0, got {temperature}"),
            ));
        }
        Ok(Self {
            coupling,
            spectral,
            temperature,
        })
    }
}

/// System Hamiltonian plus an ordered list of baths.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSystem {
    hamiltonian: HermitianOperator,
    baths: Vec<BathSpec>,
}

impl OpenSystem {
    pub fn new(hamiltonian: HermitianOperator, baths: Vec<BathSpec>) -> Result<Self> {
        let dim = hamiltonian.dim();
        for bath in &baths {
            if bath.coupling.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: bath.coupling.dim(),
                });
            }
        }
        Ok(Self { hamiltonian, baths })
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn baths(&self) -> &[BathSpec] {
        &self.baths
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Same system with every spectral density multiplied by `factor`.
    pub fn with_scaled_coupling(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::invalid(
                "factor",
                "coupling scale factor must be positive",
            ));
        }
        let baths = self
            .baths
            .iter()
            .map(|b| BathSpec {
                spectral: b.spectral.scaled(factor),
                ..b.clone()
            })
            .collect();
        Ok(Self {
            hamiltonian: self.hamiltonian.clone(),
            baths,
        })
    }

    /// Same system with each bath temperature replaced.
    pub fn with_temperatures(&self, temperatures: &[f64]) -> Result<Self> {
        if temperatures.len() != self.baths.len() {
            return Err(Error::DimensionMismatch {
                expected: self.baths.len(),
                found: temperatures.len(),
            });
        }
        let baths = self
            .baths
            .iter()
            .zip(temperatures)
            .map(|(b, &t)| BathSpec::new(b.coupling.clone(), b.spectral, t))
            .collect::<Result<_>>()?;
        Self::new(self.hamiltonian.clone(), baths)
    }
}
