use nalgebra::SVD;
use num_complex::Complex64;

use super::Liouvillian;
use crate::error::{Error, Result};
use crate::operator::{devectorize, vectorize, ComplexMatrix, ComplexVector, DensityMatrix};

/// Trace drift and negative-eigenvalue slack tolerated along a trajectory.
pub const EVOLUTION_TOL: f64 = 1e-7;
/// Singular values below this fraction of the largest one span the null space.
pub const NULL_SPACE_TOL: f64 = 1e-10;
/// Maximum steady-state residual `||L rho|| / ||L||`.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveOptions {
    /// Fixed RK4 step; defaults to `0.01 / (max gamma + ||H||)`.
    pub step: Option<f64>,
}

/// Density matrices sampled on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    /// Population of basis state `i` at every sample.
    pub fn population(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.population(i)).collect()
    }
}

pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    evolve_with(l, rho0, times, EvolveOptions::default())
}

/// Classic fourth-order Runge-Kutta integration from `t = 0`, sampled at `times`.
///
/// Each grid interval is split into equal sub-steps no longer than the step size.
pub fn evolve_with(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    options: EvolveOptions,
) -> Result<Trajectory> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho0.dim(),
        });
    }
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0) {
            return Err(Error::invalid("times", "time grid must start at t >= 0"));
        }
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            "times",
            "time grid must be strictly increasing",
        ));
    }
    let max_step = match options.step {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(s) => return Err(Error::invalid("step", format!("must be positive, got {s}"))),
        None if l.characteristic_rate() > 0.0 => 0.01 / l.characteristic_rate(),
        None => f64::INFINITY,
    };

    let mut y = vectorize(rho0.matrix());
    let mut t = 0.0;
    let mut h = 0.0;
    // propagator over one grid interval, reused while the sub-step layout repeats
    let mut cached: Option<(u64, usize, ComplexMatrix)> = None;
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / max_step).ceil().max(1.0) as usize;
            h = span / steps as f64;
            let hit = matches!(&cached, Some((bits, n, _)) if *bits == h.to_bits() && *n == steps);
            if !hit {
                cached = Some((
                    h.to_bits(),
                    steps,
                    matrix_power(&rk4_propagator(l.matrix(), h), steps),
                ));
            }
            let (_, _, u) = cached.as_ref().expect("propagator cached above");
            y = u * &y;
        }
        t = target;
        states.push(snapshot(&y, h)?);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// One classic RK4 step for `y' = L y` is exactly `y -> P(hL) y` with
/// `P(z) = 1 + z + z^2/2 + z^3/6 + z^4/24`.
fn rk4_propagator(m: &ComplexMatrix, h: f64) -> ComplexMatrix {
    let n = m.nrows();
    let z = m * Complex64::new(h, 0.0);
    let id = ComplexMatrix::identity(n, n);
    // Horner form: I + z (I + z/2 (I + z/3 (I + z/4)))
    let mut p = &id + &z * Complex64::new(0.25, 0.0);
    for k in [3.0, 2.0, 1.0] {
        p = &id + (&z * &p) * Complex64::new(1.0 / k, 0.0);
    }
    p
}

fn matrix_power(m: &ComplexMatrix, mut e: usize) -> ComplexMatrix {
    let n = m.nrows();
    let mut result = ComplexMatrix::identity(n, n);
    let mut base = m.clone();
    let mut first = true;
    while e > 0 {
        if e & 1 == 1 {
            result = if first { base.clone() } else { &result * &base };
            first = false;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn snapshot(y: &ComplexVector, step: f64) -> Result<DensityMatrix> {
    let m = hermitize(&devectorize(y)?);
    DensityMatrix::with_tolerance(m, EVOLUTION_TOL, EVOLUTION_TOL).map_err(|e| match e {
        Error::Invariant { what, measured, .. } => Error::Accuracy {
            what,
            value: measured,
            step,
        },
        other => other,
    })
}

/// Unique null vector of the generator as a density matrix.
///
/// Uses the singular value decomposition of the superoperator; the null-space
/// dimension is the number of singular values below `1e-10` times the largest.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let svd = SVD::try_new(l.matrix().clone(), false, true, f64::EPSILON, 0).ok_or_else(|| {
        Error::SolverFailure("singular value decomposition did not converge".into())
    })?;
    let sv = &svd.singular_values;
    let largest = sv.max();
    if largest == 0.0 {
        // L = 0 is only possible for a one-dimensional system
        return if l.dim() == 1 {
            DensityMatrix::pure(1, 0)
        } else {
            Err(Error::NonUniqueSteadyState {
                dimension: l.dim() * l.dim(),
            })
        };
    }
    let threshold = NULL_SPACE_TOL * largest;
    let dimension = sv.iter().filter(|&&s| s < threshold).count();
    match dimension {
        0 => {
            return Err(Error::SolverFailure(format!(
                "no null vector: smallest relative singular value {:.3e}",
                sv.min() / largest
            )))
        }
        1 => {}
        d => return Err(Error::NonUniqueSteadyState { dimension: d }),
    }
    let idx = sv.imin();
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::SolverFailure("right singular vectors missing".into()))?;
    // L = U S V^dagger, null vector = conj of the matching row of V^dagger
    let null = ComplexVector::from_iterator(v_t.ncols(), v_t.row(idx).iter().map(|z| z.conj()));
    let mut m = devectorize(&null)?;
    let tr = m.trace();
    if tr.norm() < 1e-8 {
        return Err(Error::SolverFailure("null vector is traceless".into()));
    }
    m /= tr;
    let m = hermitize(&m);

    let residual = (l.matrix() * vectorize(&m)).norm() / largest;
    if residual > STEADY_RESIDUAL_TOL {
        return Err(Error::SolverFailure(format!(
            "steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL:.0e}"
        )));
    }
    DensityMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::davies::{liouvillian, OpenSystem};
    use crate::operator::HermitianOperator;

    #[test]
    fn trivial_generator_keeps_state_constant() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0, 3.0]).unwrap();
        let l = liouvillian(&OpenSystem::new(h, vec![]).unwrap(), 1e-8).unwrap();
        let rho0 = DensityMatrix::from_populations(&[0.1, 0.6, 0.3]).unwrap();
        let traj = evolve(&l, &rho0, &[0.0, 0.5, 1.0, 7.0]).unwrap();
        for s in &traj.states {
            assert!((s.matrix() - rho0.matrix()).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_time_grid() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
        let l = liouvillian(&OpenSystem::new(h, vec![]).unwrap(), 1e-8).unwrap();
        let rho0 = DensityMatrix::pure(2, 0).unwrap();
        assert!(evolve(&l, &rho0, &[0.0, 1.0, 1.0]).is_err());
        assert!(evolve(&l, &rho0, &[-1.0, 1.0]).is_err());
        let opts = EvolveOptions { step: Some(0.0) };
        assert!(evolve_with(&l, &rho0, &[1.0], opts).is_err());
    }

    #[test]
    fn closed_system_steady_state_is_not_unique() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
        let l = liouvillian(&OpenSystem::new(h, vec![]).unwrap(), 1e-8).unwrap();
        assert!(matches!(
            steady_state(&l),
            Err(Error::NonUniqueSteadyState { dimension: 2 })
        ));
    }
}
