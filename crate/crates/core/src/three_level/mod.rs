//! Three-level Lambda and V systems: each of the two outer levels couples to the
//! shared level through its own bath.
//!
//! Basis order is `(|1>, |2>, |e>)` for Lambda and `(|g>, |1>, |2>)` for V. The
//! mean position of the particle is `<X> = (d/2)(P_2 - P_1)`, with the shared
//! level sitting at `X = 0`.

mod analytic;
mod dufour;
mod trajectory;

pub use analytic::{
    delta_ss, diagnostics, high_t_force, oscillator_params, rate_rhs, rate_steady_state,
    thermophoretic_force, HighTemperatureForce, OscillatorParams, ThermoDiagnostics,
};
pub use dufour::{
    dufour_currents, finite_capacity_dufour, DufourCurrents, DufourHistory, DufourSetup,
};
pub use trajectory::{
    mean_position_trajectory, overdamped_check, OverdampedReport, OverdampedWindow,
    PositionResidual,
};

use nalgebra::DMatrix;

use crate::davies::{
    bose_occupation, temperature_for_occupation, BathSpec, OpenSystem, SpectralDensity,
};
use crate::error::{Error, Result};
use crate::operator::{DensityMatrix, HermitianOperator};

/// Relative tolerance for treating two rates or frequencies as equal.
const EQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Configuration {
    Lambda,
    Vee,
}

impl Configuration {
    /// Basis indices of `(|1>, |2>, shared level)`.
    pub fn indices(self) -> [usize; 3] {
        match self {
            Configuration::Lambda => [0, 1, 2],
            Configuration::Vee => [1, 2, 0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelParams {
    pub configuration: Configuration,
    /// Transition frequencies between the shared level and levels 1, 2.
    pub omega: [f64; 2],
    pub gamma: [f64; 2],
    pub temperature: [f64; 2],
    /// Distance between the positions associated with levels 1 and 2.
    pub d: f64,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQUALITY_TOL * a.abs().max(b.abs())
}

impl ThreeLevelParams {
    pub fn new(
        configuration: Configuration,
        omega: [f64; 2],
        gamma: [f64; 2],
        temperature: [f64; 2],
        d: f64,
    ) -> Result<Self> {
        check_positive("omega1", omega[0])?;
        check_positive("omega2", omega[1])?;
        check_positive("gamma1", gamma[0])?;
        check_positive("gamma2", gamma[1])?;
        check_positive("d", d)?;
        for t in temperature {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::invalid(
                    "temperature",
                    format!("must be finite and >= 0, got {t}"),
                ));
            }
        }
        Ok(Self {
            configuration,
            omega,
            gamma,
            temperature,
            d,
        })
    }

    /// Equal frequencies `omega` and rates `gamma`, temperatures chosen to give
    /// occupations `n1`, `n2`.
    pub fn from_occupations(
        configuration: Configuration,
        omega: f64,
        gamma: f64,
        n1: f64,
        n2: f64,
        d: f64,
    ) -> Result<Self> {
        let t1 = temperature_for_occupation(omega, n1)?;
        let t2 = temperature_for_occupation(omega, n2)?;
        Self::new(configuration, [omega, omega], [gamma, gamma], [t1, t2], d)
    }

    pub fn with_configuration(self, configuration: Configuration) -> Self {
        Self {
            configuration,
            ..self
        }
    }

    /// Bath occupations `n_k`, each at its own transition frequency.
    pub fn occupations(&self) -> Result<[f64; 2]> {
        Ok([
            bose_occupation(self.omega[0], self.temperature[0])?,
            bose_occupation(self.omega[1], self.temperature[1])?,
        ])
    }

    /// The common rate, required by the equal-rate closed forms.
    pub fn common_gamma(&self) -> Result<f64> {
        if nearly_equal(self.gamma[0], self.gamma[1]) {
            Ok(self.gamma[0])
        } else {
            Err(Error::invalid(
                "gamma",
                format!(
                    "closed form needs gamma1 = gamma2, got {} and {}",
                    self.gamma[0], self.gamma[1]
                ),
            ))
        }
    }

    pub fn common_omega(&self) -> Result<f64> {
        if nearly_equal(self.omega[0], self.omega[1]) {
            Ok(self.omega[0])
        } else {
            Err(Error::invalid(
                "omega",
                format!(
                    "requires omega1 = omega2, got {} and {}",
                    self.omega[0], self.omega[1]
                ),
            ))
        }
    }

    /// Level energies in basis order.
    pub fn energies(&self) -> [f64; 3] {
        let [w1, w2] = self.omega;
        match self.configuration {
            // E_1 = 0, E_e = w1, E_2 = E_e - w2
            Configuration::Lambda => [0.0, w1 - w2, w1],
            Configuration::Vee => [0.0, w1, w2],
        }
    }

    /// `X = diag(-d/2, d/2, 0)` on levels 1, 2 and the shared level.
    pub fn position_operator(&self) -> HermitianOperator {
        let [i1, i2, _] = self.configuration.indices();
        let mut x = [0.0; 3];
        x[i1] = -self.d / 2.0;
        x[i2] = self.d / 2.0;
        HermitianOperator::diagonal(&x).expect("finite diagonal")
    }

    fn open_system(&self) -> Result<OpenSystem> {
        let h = HermitianOperator::diagonal(&self.energies())?;
        let [i1, i2, shared] = self.configuration.indices();
        let baths = [(i1, 0), (i2, 1)]
            .into_iter()
            .map(|(level, k)| {
                let mut s = DMatrix::zeros(3, 3);
                s[(level, shared)] = 1.0;
                s[(shared, level)] = 1.0;
                BathSpec::new(
                    HermitianOperator::from_real(s)?,
                    SpectralDensity::flat(self.gamma[k])?,
                    self.temperature[k],
                )
            })
            .collect::<Result<Vec<_>>>()?;
        OpenSystem::new(h, baths)
    }
}

/// Lambda system: bath `k` drives `|k> <-> |e>` through `|e><k| + |k><e|`.
pub fn lambda_system(params: &ThreeLevelParams) -> Result<OpenSystem> {
    if params.configuration != Configuration::Lambda {
        return Err(Error::invalid(
            "configuration",
            "expected a Lambda configuration",
        ));
    }
    params.open_system()
}

/// V system: bath `k` drives `|g> <-> |k>` through `|g><k| + |k><g|`.
pub fn vee_system(params: &ThreeLevelParams) -> Result<OpenSystem> {
    if params.configuration != Configuration::Vee {
        return Err(Error::invalid(
            "configuration",
            "expected a V configuration",
        ));
    }
    params.open_system()
}

/// Populations of levels 1, 2 and of the shared level (`|e>` for Lambda, `|g>` for V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPopulations {
    pub p1: f64,
    pub p2: f64,
    pub pe: f64,
}

impl LevelPopulations {
    pub fn new(p1: f64, p2: f64, pe: f64) -> Result<Self> {
        for p in [p1, p2, pe] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(
                    "populations",
                    format!("{p} is outside [0, 1]"),
                ));
            }
        }
        let total = p1 + p2 + pe;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invariant {
                what: "populations do not sum to 1",
                measured: total,
                tolerance: 1e-12,
            });
        }
        Ok(Self { p1, p2, pe })
    }

    /// Shared level population fixed by normalization.
    pub fn from_outer(p1: f64, p2: f64) -> Result<Self> {
        Self::new(p1, p2, 1.0 - p1 - p2)
    }

    pub fn from_state(rho: &DensityMatrix, configuration: Configuration) -> Result<Self> {
        if rho.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: rho.dim(),
            });
        }
        let [i1, i2, ie] = configuration.indices();
        let clamp = |p: f64| p.clamp(0.0, 1.0);
        Ok(Self {
            p1: clamp(rho.population(i1)),
            p2: clamp(rho.population(i2)),
            pe: clamp(rho.population(ie)),
        })
    }

    /// `Delta = P_2 - P_1`.
    pub fn unbalance(&self) -> f64 {
        self.p2 - self.p1
    }

    /// `P = (P_1 + P_2) / 2`.
    pub fn mean(&self) -> f64 {
        0.5 * (self.p1 + self.p2)
    }
}
