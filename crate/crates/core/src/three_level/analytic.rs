//! Closed-form rate-equation results.
//!
//! With equal rates `Gamma`, the mean position `<X> = (d/2) Delta` of either
//! configuration obeys a driven damped oscillator
//!
//! ```text
//! m* <X''> + Gamma <X'> + m* Omega^2 <X> = F,    m* = 1 / (4 nbar + 2)
//! Lambda: Omega^2 = Gamma^2 [nbar (3 nbar + 2) - 3/4 dn^2],        F = -(dn/2) m* Gamma^2 d
//! V:      Omega^2 = Gamma^2 [(3 nbar + 1)(nbar + 1) - 3/4 dn^2],  F = +(dn/2) m* Gamma^2 d
//! ```
//!
//! where `dn = n_2 - n_1` and `nbar = (n_1 + n_2) / 2`.

use super::{Configuration, LevelPopulations, ThreeLevelParams};
use crate::error::{Error, Result};

/// Occupation-derived quantities of a three-level model with equal rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoDiagnostics {
    pub n1: f64,
    pub n2: f64,
    pub delta_n: f64,
    pub n_bar: f64,
    pub effective_mass: f64,
    pub omega_sq: f64,
    /// Stationary `P_2 - P_1`; `None` when undefined (Lambda with both baths at T = 0).
    pub delta_ss: Option<f64>,
    pub force: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub effective_mass: f64,
    pub damping: f64,
    pub omega_sq: f64,
    pub drive: f64,
}

fn occupation_moments(params: &ThreeLevelParams) -> Result<(f64, f64, f64, f64)> {
    let [n1, n2] = params.occupations()?;
    Ok((n1, n2, n2 - n1, 0.5 * (n1 + n2)))
}

fn omega_sq_for(configuration: Configuration, gamma: f64, dn: f64, nbar: f64) -> f64 {
    let bracket = match configuration {
        Configuration::Lambda => nbar * (3.0 * nbar + 2.0),
        Configuration::Vee => (3.0 * nbar + 1.0) * (nbar + 1.0),
    };
    gamma * gamma * (bracket - 0.75 * dn * dn)
}

fn force_for(configuration: Configuration, gamma: f64, dn: f64, nbar: f64, d: f64) -> f64 {
    let m = 1.0 / (4.0 * nbar + 2.0);
    let lambda = -(dn / 2.0) * m * gamma * gamma * d;
    match configuration {
        Configuration::Lambda => lambda,
        Configuration::Vee => -lambda,
    }
}

/// Time derivatives `(dP_1/dt, dP_2/dt)` of the population rate equations.
///
/// Lambda: `dP_k/dt = Gamma_k (n_k + s) P_e - Gamma_k n_k P_k`;
/// V: `dP_k/dt = Gamma_k n_k P_g - Gamma_k (n_k + s) P_k`,
/// with `s = 1` when spontaneous emission is kept and `s = 0` otherwise.
pub fn rate_rhs(
    pops: &LevelPopulations,
    params: &ThreeLevelParams,
    spontaneous: bool,
) -> Result<(f64, f64)> {
    let n = params.occupations()?;
    let s = if spontaneous { 1.0 } else { 0.0 };
    let p = [pops.p1, pops.p2];
    let pe = 1.0 - pops.p1 - pops.p2;
    let rhs = |k: usize| {
        let g = params.gamma[k];
        match params.configuration {
            Configuration::Lambda => g * (n[k] + s) * pe - g * n[k] * p[k],
            Configuration::Vee => g * n[k] * pe - g * (n[k] + s) * p[k],
        }
    };
    Ok((rhs(0), rhs(1)))
}

/// Stationary solution of [`rate_rhs`].
pub fn rate_steady_state(params: &ThreeLevelParams, spontaneous: bool) -> Result<LevelPopulations> {
    let n = params.occupations()?;
    let s = if spontaneous { 1.0 } else { 0.0 };
    // balance per level: gain_k * P_shared = loss_k * P_k
    let (gain, loss) = match params.configuration {
        Configuration::Lambda => ([n[0] + s, n[1] + s], [n[0], n[1]]),
        Configuration::Vee => ([n[0], n[1]], [n[0] + s, n[1] + s]),
    };
    // (gain + loss) P_k + gain P_other = gain, solved for both levels
    let det = loss[0] * gain[1] + gain[0] * loss[1] + loss[0] * loss[1];
    if !(det > 0.0) {
        return Err(Error::DegenerateInput(
            "rate equations have no unique stationary state (no thermal excitation)".into(),
        ));
    }
    let p1 = gain[0] * loss[1] / det;
    let p2 = gain[1] * loss[0] / det;
    let pe = loss[0] * loss[1] / det;
    Ok(LevelPopulations { p1, p2, pe })
}

/// Stationary unbalance `P_2 - P_1` in closed form (equal rates).
///
/// Lambda: `-dn / [nbar (3 nbar + 2) - 3/4 dn^2]`; V: `dn / [(3 nbar + 1)(nbar + 1) - 3/4 dn^2]`.
pub fn delta_ss(params: &ThreeLevelParams) -> Result<f64> {
    params.common_gamma()?;
    let (_, _, dn, nbar) = occupation_moments(params)?;
    match params.configuration {
        Configuration::Lambda => {
            if nbar == 0.0 {
                return Err(Error::DegenerateInput(
                    "both baths at zero temperature: the Lambda system has no dynamics".into(),
                ));
            }
            Ok(-dn / (nbar * (3.0 * nbar + 2.0) - 0.75 * dn * dn))
        }
        Configuration::Vee => Ok(dn / ((3.0 * nbar + 1.0) * (nbar + 1.0) - 0.75 * dn * dn)),
    }
}

/// Thermophoretic drive: `F_q = -(dn/2) m* Gamma^2 d` for Lambda, `F_V = -F_q` for V.
pub fn thermophoretic_force(params: &ThreeLevelParams) -> Result<f64> {
    let gamma = params.common_gamma()?;
    let (_, _, dn, nbar) = occupation_moments(params)?;
    Ok(force_for(params.configuration, gamma, dn, nbar, params.d))
}

pub fn oscillator_params(params: &ThreeLevelParams) -> Result<OscillatorParams> {
    let gamma = params.common_gamma()?;
    let (_, _, dn, nbar) = occupation_moments(params)?;
    Ok(OscillatorParams {
        effective_mass: 1.0 / (4.0 * nbar + 2.0),
        damping: gamma,
        omega_sq: omega_sq_for(params.configuration, gamma, dn, nbar),
        drive: force_for(params.configuration, gamma, dn, nbar, params.d),
    })
}

pub fn diagnostics(params: &ThreeLevelParams) -> Result<ThermoDiagnostics> {
    let osc = oscillator_params(params)?;
    let (n1, n2, delta_n, n_bar) = occupation_moments(params)?;
    let delta_ss = match delta_ss(params) {
        Ok(v) => Some(v),
        Err(Error::DegenerateInput(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ThermoDiagnostics {
        n1,
        n2,
        delta_n,
        n_bar,
        effective_mass: osc.effective_mass,
        omega_sq: osc.omega_sq,
        delta_ss,
        force: osc.drive,
    })
}

/// High-temperature force against the overdamped right-hand side it approximates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighTemperatureForce {
    /// `-(T'/T) Gamma^2 d^2 / 6`, `T' = (T_2 - T_1)/d`, `T = (T_1 + T_2)/2`.
    pub high_t: f64,
    /// `-(dn / (3 nbar)) Gamma^2 d / 2` with exact Bose occupations.
    pub overdamped: f64,
    /// `|high_t / overdamped - 1|`, zero when both vanish.
    pub deviation: f64,
}

/// Lambda force in the high-temperature limit. Requires `omega_1 = omega_2`.
pub fn high_t_force(params: &ThreeLevelParams) -> Result<HighTemperatureForce> {
    let gamma = params.common_gamma()?;
    params.common_omega()?;
    let [t1, t2] = params.temperature;
    let t_mean = 0.5 * (t1 + t2);
    if t_mean == 0.0 {
        return Err(Error::DegenerateInput("mean temperature is zero".into()));
    }
    let d = params.d;
    let gradient = (t2 - t1) / d;
    let high_t = -(gradient / t_mean) * gamma * gamma * d * d / 6.0;
    let (_, _, dn, nbar) = occupation_moments(params)?;
    let overdamped = -(dn / (3.0 * nbar)) * gamma * gamma * d / 2.0;
    let deviation = if overdamped == 0.0 {
        if high_t == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (high_t / overdamped - 1.0).abs()
    };
    Ok(HighTemperatureForce {
        high_t,
        overdamped,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(config: Configuration, n1: f64, n2: f64) -> ThreeLevelParams {
        ThreeLevelParams::from_occupations(config, 1.0, 1.0, n1, n2, 1.0).unwrap()
    }

    #[test]
    fn delta_ss_symmetric_occupations() {
        assert_eq!(
            delta_ss(&params(Configuration::Lambda, 1.5, 1.5)).unwrap(),
            0.0
        );
    }

    #[test]
    fn delta_ss_cold_trap() {
        let p = ThreeLevelParams::new(
            Configuration::Lambda,
            [1.0, 1.0],
            [1.0, 1.0],
            [0.7, 0.0],
            1.0,
        )
        .unwrap();
        assert_relative_eq!(delta_ss(&p).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn delta_ss_worked_value() {
        // -(-1) / (1.5 * 6.5 - 0.75) = 1/9
        assert_relative_eq!(
            delta_ss(&params(Configuration::Lambda, 2.0, 1.0)).unwrap(),
            1.0 / 9.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn delta_ss_needs_thermal_excitation() {
        let p = ThreeLevelParams::new(
            Configuration::Lambda,
            [1.0, 1.0],
            [1.0, 1.0],
            [0.0, 0.0],
            1.0,
        )
        .unwrap();
        assert!(matches!(delta_ss(&p), Err(Error::DegenerateInput(_))));
        assert!(matches!(
            rate_steady_state(&p, true),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn forces_worked_value() {
        let lam = params(Configuration::Lambda, 2.0, 1.0);
        assert_relative_eq!(thermophoretic_force(&lam).unwrap(), 0.0625, epsilon = 1e-14);
        let vee = lam.with_configuration(Configuration::Vee);
        assert_relative_eq!(
            thermophoretic_force(&vee).unwrap(),
            -0.0625,
            epsilon = 1e-14
        );
        assert_eq!(
            thermophoretic_force(&params(Configuration::Lambda, 0.8, 0.8)).unwrap(),
            0.0
        );
    }

    #[test]
    fn oscillator_worked_values() {
        let lam = params(Configuration::Lambda, 2.0, 1.0);
        let o = oscillator_params(&lam).unwrap();
        assert_relative_eq!(o.effective_mass, 0.125, epsilon = 1e-15);
        assert_relative_eq!(o.omega_sq, 9.0, epsilon = 1e-12);
        let v = oscillator_params(&lam.with_configuration(Configuration::Vee)).unwrap();
        assert_relative_eq!(v.omega_sq, 13.0, epsilon = 1e-12);

        let zero = ThreeLevelParams::new(
            Configuration::Lambda,
            [1.0, 1.0],
            [1.0, 1.0],
            [0.0, 0.0],
            1.0,
        )
        .unwrap();
        assert_eq!(oscillator_params(&zero).unwrap().effective_mass, 0.5);
    }

    #[test]
    fn omega_sq_at_saturated_gradient() {
        // n2 = 0 gives |dn| = 2 nbar, where Omega^2 = 2 nbar Gamma^2
        let p = params(Configuration::Lambda, 3.0, 0.0);
        let o = oscillator_params(&p).unwrap();
        assert_relative_eq!(o.omega_sq, 2.0 * 1.5, epsilon = 1e-12);
    }

    #[test]
    fn rate_rhs_symmetry() {
        let p = params(Configuration::Lambda, 0.7, 0.7);
        let pops = LevelPopulations::new(0.3, 0.3, 0.4).unwrap();
        let (a, b) = rate_rhs(&pops, &p, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rate_rhs_vanishes_at_closed_form_steady_state() {
        for config in [Configuration::Lambda, Configuration::Vee] {
            let p = params(config, 2.0, 1.0);
            let ss = rate_steady_state(&p, true).unwrap();
            let (a, b) = rate_rhs(&ss, &p, true).unwrap();
            assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
            assert_relative_eq!(ss.unbalance(), delta_ss(&p).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn no_spontaneous_emission_no_unbalance() {
        let p = params(Configuration::Lambda, 4.0, 0.3);
        let ss = rate_steady_state(&p, false).unwrap();
        assert_eq!(ss.unbalance(), 0.0);
    }

    #[test]
    fn high_t_equal_temperatures() {
        let p = ThreeLevelParams::new(
            Configuration::Lambda,
            [1.0, 1.0],
            [1.0, 1.0],
            [3.0, 3.0],
            1.0,
        )
        .unwrap();
        let f = high_t_force(&p).unwrap();
        assert_eq!((f.high_t, f.overdamped, f.deviation), (0.0, 0.0, 0.0));
    }

    #[test]
    fn high_t_requires_equal_gaps_and_heat() {
        let p = ThreeLevelParams::new(
            Configuration::Lambda,
            [1.0, 2.0],
            [1.0, 1.0],
            [3.0, 2.0],
            1.0,
        )
        .unwrap();
        assert!(high_t_force(&p).is_err());
        let cold = ThreeLevelParams::new(
            Configuration::Lambda,
            [1.0, 1.0],
            [1.0, 1.0],
            [0.0, 0.0],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            high_t_force(&cold),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn high_t_force_worked_value() {
        // 40-digit evaluation with exact occupations
        let p = ThreeLevelParams::new(
            Configuration::Lambda,
            [1.0, 1.0],
            [1.0, 1.0],
            [100.0, 99.0],
            1.0,
        )
        .unwrap();
        let f = high_t_force(&p).unwrap();
        assert_relative_eq!(f.high_t, 0.001_675_041_876_046_901_2, max_relative = 1e-12);
        assert_relative_eq!(
            f.overdamped,
            0.001_683_473_270_488_276_6,
            max_relative = 1e-9
        );
        assert!(f.deviation < 0.01);
    }
}
