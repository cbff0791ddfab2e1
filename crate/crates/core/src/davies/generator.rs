use num_complex::Complex64;

use super::jumps::{jump_operators, JumpOperatorSet};
use super::OpenSystem;
use crate::error::{Error, Result};
use crate::operator::{devectorize, vectorize, ComplexMatrix, DensityMatrix};

/// Superoperator acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    matrix: ComplexMatrix,
    dim: usize,
    characteristic_rate: f64,
}

impl Liouvillian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest thermal rate plus the spectral norm of the Hamiltonian.
    pub fn characteristic_rate(&self) -> f64 {
        self.characteristic_rate
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        devectorize(&(&self.matrix * vectorize(m)))
    }
}

/// Kronecker product; with column stacking `vec(B X A^T) = (A (x) B) vec(X)`.
fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn assemble(system: &OpenSystem, jumps: &JumpOperatorSet) -> Liouvillian {
    let d = system.dim();
    let id = ComplexMatrix::identity(d, d);
    let h = system.hamiltonian().matrix();
    let minus_i = Complex64::new(0.0, -1.0);

    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * minus_i;
    let mut decay = ComplexMatrix::zeros(d, d);
    for ch in jumps.channels.iter().flatten() {
        if ch.rate == 0.0 {
            continue;
        }
        let a = &ch.operator;
        let rate = Complex64::new(ch.rate, 0.0);
        l += kron(&a.conjugate(), a) * rate;
        decay += a.adjoint() * a * rate;
    }
    let half = Complex64::new(0.5, 0.0);
    l -= (kron(&id, &decay) + kron(&decay.transpose(), &id)) * half;

    let characteristic_rate = jumps.max_rate() + system.hamiltonian().spectral_norm();
    Liouvillian {
        matrix: l,
        dim: d,
        characteristic_rate,
    }
}

/// Davies generator `-i[H, .] + sum_k sum_w gamma_k(w) D[A_w^(k)]`.
pub fn liouvillian(system: &OpenSystem, epsilon: f64) -> Result<Liouvillian> {
    let jumps = jump_operators(system, epsilon)?;
    Ok(assemble(system, &jumps))
}

/// Heat current into every bath, `J_k = -Tr[D_k(rho) H]`.
///
/// Positive values mean heat leaves the system into bath `k`.
pub fn heat_currents(system: &OpenSystem, rho: &DensityMatrix, epsilon: f64) -> Result<Vec<f64>> {
    let jumps = jump_operators(system, epsilon)?;
    currents(system, &jumps, rho)
}

fn currents(system: &OpenSystem, jumps: &JumpOperatorSet, rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: rho.dim(),
        });
    }
    let h = system.hamiltonian().matrix();
    (0..jumps.bath_count())
        .map(|k| {
            let dk = jumps.dissipator(k, rho.matrix());
            let tr = (dk * h).trace();
            if tr.im.abs() > 1e-10 * tr.norm().max(1.0) {
                return Err(Error::NumericalConsistency(format!(
                    "heat current of bath {k} has imaginary part {:.3e}",
                    tr.im
                )));
            }
            Ok(-tr.re)
        })
        .collect()
}

/// An open system with its jump operators and generator, built once.
#[derive(Debug, Clone)]
pub struct DaviesModel {
    system: OpenSystem,
    jumps: JumpOperatorSet,
    liouvillian: Liouvillian,
}

impl DaviesModel {
    pub fn new(system: OpenSystem, epsilon: f64) -> Result<Self> {
        let jumps = jump_operators(&system, epsilon)?;
        let liouvillian = assemble(&system, &jumps);
        Ok(Self {
            system,
            jumps,
            liouvillian,
        })
    }

    pub fn system(&self) -> &OpenSystem {
        &self.system
    }

    pub fn jumps(&self) -> &JumpOperatorSet {
        &self.jumps
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liouvillian
    }

    pub fn steady_state(&self) -> Result<DensityMatrix> {
        super::steady_state(&self.liouvillian)
    }

    pub fn heat_currents(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        currents(&self.system, &self.jumps, rho)
    }
}
