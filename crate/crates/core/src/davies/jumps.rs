use num_complex::Complex64;

use super::OpenSystem;
use crate::error::{Error, Result};
use crate::operator::{eigh, ComplexMatrix, EigenDecomposition};

/// Eigenvalues grouped into distinct energy levels.
#[derive(Debug, Clone)]
pub struct EnergyLevels {
    /// Mean energy of each level, ascending.
    pub energies: Vec<f64>,
    /// Eigenvector column indices belonging to each level.
    pub members: Vec<Vec<usize>>,
}

impl EnergyLevels {
    /// Groups sorted eigenvalues closer than `epsilon` and checks that distinct levels
    /// are separated by more than `4 * epsilon`.
    pub fn group(eig: &EigenDecomposition, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(
                "epsilon",
                format!("grouping tolerance must be positive, got {epsilon}"),
            ));
        }
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for (i, &e) in eig.eigenvalues.iter().enumerate() {
            match members.last_mut() {
                Some(group) if e - last <= epsilon => group.push(i),
                _ => members.push(vec![i]),
            }
            last = e;
        }
        let energies: Vec<f64> = members
            .iter()
            .map(|g| g.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / g.len() as f64)
            .collect();
        if let Some(spacing) = energies.windows(2).map(|w| w[1] - w[0]).reduce(f64::min) {
            if spacing <= 4.0 * epsilon {
                return Err(Error::AmbiguousGrouping { epsilon, spacing });
            }
        }
        Ok(Self { energies, members })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn has_degeneracy(&self) -> bool {
        self.members.iter().any(|m| m.len() > 1)
    }
}

/// Positive Bohr frequencies of level pairs `a < b`, grouped within `epsilon`.
///
/// `pair_cluster[a][b]` is the index into the returned list for `a < b`.
struct PositiveFrequencies {
    values: Vec<f64>,
    pair_cluster: Vec<Vec<usize>>,
}

fn positive_frequencies(levels: &EnergyLevels, epsilon: f64) -> PositiveFrequencies {
    let n = levels.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((levels.energies[b] - levels.energies[a], a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut values = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    let mut pair_cluster = vec![vec![usize::MAX; n]; n];
    let mut last = f64::NEG_INFINITY;
    for (w, a, b) in pairs {
        if sums.is_empty() || w - last > epsilon {
            sums.push((0.0, 0));
        }
        let k = sums.len() - 1;
        sums[k].0 += w;
        sums[k].1 += 1;
        pair_cluster[a][b] = k;
        last = w;
    }
    for (s, count) in sums {
        values.push(s / count as f64);
    }
    PositiveFrequencies {
        values,
        pair_cluster,
    }
}

/// Distinct Bohr frequencies `E_j - E_i` over eigenstate pairs `i != j`, ascending.
///
/// Nearly equal differences are merged within `epsilon` and represented by their
/// mean. The set is closed under negation; zero appears only for degenerate levels.
pub fn bohr_frequencies(eig: &EigenDecomposition, epsilon: f64) -> Result<Vec<f64>> {
    let levels = EnergyLevels::group(eig, epsilon)?;
    let positive = positive_frequencies(&levels, epsilon).values;
    let mut out: Vec<f64> = positive.iter().rev().map(|w| -w).collect();
    if levels.has_degeneracy() {
        out.push(0.0);
    }
    out.extend(positive);
    Ok(out)
}

/// One dissipative channel: jump operator at a Bohr frequency with its thermal rate.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub frequency: f64,
    pub operator: ComplexMatrix,
    pub rate: f64,
}

/// Jump operators and rates for every bath of an [`OpenSystem`].
#[derive(Debug, Clone)]
pub struct JumpOperatorSet {
    pub epsilon: f64,
    pub eigen: EigenDecomposition,
    pub levels: EnergyLevels,
    /// Per bath, the channels with nonzero operators.
    pub channels: Vec<Vec<JumpChannel>>,
    /// Per bath, the Frobenius norm of the zero-frequency component.
    pub zero_frequency_norms: Vec<f64>,
}

impl JumpOperatorSet {
    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    pub fn bath_count(&self) -> usize {
        self.channels.len()
    }

    /// Largest rate over all channels.
    pub fn max_rate(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .map(|c| c.rate)
            .fold(0.0, f64::max)
    }

    /// Dissipator of bath `k` applied to a matrix.
    pub fn dissipator(&self, bath: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.nrows(), rho.ncols());
        for ch in &self.channels[bath] {
            if ch.rate == 0.0 {
                continue;
            }
            let a = &ch.operator;
            let ad = a.adjoint();
            let ada = &ad * a;
            let term = a * rho * &ad - (&ada * rho + rho * &ada) * Complex64::new(0.5, 0.0);
            out += term * Complex64::new(ch.rate, 0.0);
        }
        out
    }
}

fn operator_threshold(m: &ComplexMatrix) -> f64 {
    1e-12 * m.norm().max(1.0)
}

/// Projects every bath coupling onto the Bohr frequencies of the Hamiltonian.
///
/// A nonzero zero-frequency component with a flat spectral density is rejected,
/// since its rate diverges; with an ohmic density it gets `gamma(0) = slope * T`.
pub fn jump_operators(system: &OpenSystem, epsilon: f64) -> Result<JumpOperatorSet> {
    let eigen = eigh(system.hamiltonian());
    let levels = EnergyLevels::group(&eigen, epsilon)?;
    let freqs = positive_frequencies(&levels, epsilon);
    let dim = system.dim();
    let v = &eigen.eigenvectors;
    let vd = v.adjoint();

    // level index of every eigenvector
    let mut level_of = vec![0; dim];
    for (l, members) in levels.members.iter().enumerate() {
        for &i in members {
            level_of[i] = l;
        }
    }

    let nfreq = freqs.values.len();
    let mut channels = Vec::with_capacity(system.baths().len());
    let mut zero_frequency_norms = Vec::with_capacity(system.baths().len());

    for (k, bath) in system.baths().iter().enumerate() {
        let s = &vd * bath.coupling.matrix() * v;
        // eigenbasis blocks: index 0 = zero frequency, 1..=nfreq positive, nfreq+1.. negative
        let mut blocks = vec![ComplexMatrix::zeros(dim, dim); 2 * nfreq + 1];
        for i in 0..dim {
            for j in 0..dim {
                let (li, lj) = (level_of[i], level_of[j]);
                // A_w collects |i><i| sigma |j><j| with w = E_j - E_i
                let slot = match li.cmp(&lj) {
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Less => 1 + freqs.pair_cluster[li][lj],
                    std::cmp::Ordering::Greater => 1 + nfreq + freqs.pair_cluster[lj][li],
                };
                blocks[slot][(i, j)] = s[(i, j)];
            }
        }

        let threshold = operator_threshold(bath.coupling.matrix());
        let mut list = Vec::new();
        let mut zero_norm = 0.0;
        for (slot, block) in blocks.into_iter().enumerate() {
            let operator = v * block * &vd;
            let norm = operator.norm();
            let frequency = match slot {
                0 => 0.0,
                s if s <= nfreq => freqs.values[s - 1],
                s => -freqs.values[s - 1 - nfreq],
            };
            if slot == 0 {
                zero_norm = norm;
            }
            if norm <= threshold {
                continue;
            }
            let rate = match bath.spectral.thermal_rate(frequency, bath.temperature)? {
                Some(rate) => rate,
                None => return Err(Error::ZeroFrequencyDivergence { bath: k, norm }),
            };
            list.push(JumpChannel {
                frequency,
                operator,
                rate,
            });
        }
        list.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        channels.push(list);
        zero_frequency_norms.push(zero_norm);
    }

    Ok(JumpOperatorSet {
        epsilon,
        eigen,
        levels,
        channels,
        zero_frequency_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::davies::{BathSpec, SpectralDensity};
    use crate::operator::HermitianOperator;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn sigma(dim: usize, a: usize, b: usize) -> HermitianOperator {
        let mut m = DMatrix::zeros(dim, dim);
        m[(a, b)] = 1.0;
        m[(b, a)] = 1.0;
        HermitianOperator::from_real(m).unwrap()
    }

    #[test]
    fn lambda_levels_frequencies() {
        let w = 1.0;
        let eig = eigh(&HermitianOperator::diagonal(&[0.0, 0.0, w]).unwrap());
        assert_eq!(bohr_frequencies(&eig, 1e-8).unwrap(), vec![-w, 0.0, w]);
    }

    #[test]
    fn nondegenerate_levels_exclude_zero() {
        let eig = eigh(&HermitianOperator::diagonal(&[0.0, 0.3, 1.0]).unwrap());
        let f = bohr_frequencies(&eig, 1e-8).unwrap();
        let expected = [-1.0, -0.7, -0.3, 0.3, 0.7, 1.0];
        assert_eq!(f.len(), expected.len());
        for (a, b) in f.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn equal_gaps_are_merged() {
        // harmonic ladder: 0, 1, 2 -> gaps {1, 1, 2}
        let eig = eigh(&HermitianOperator::diagonal(&[0.0, 1.0, 2.0]).unwrap());
        assert_eq!(
            bohr_frequencies(&eig, 1e-8).unwrap(),
            vec![-2.0, -1.0, 1.0, 2.0]
        );
    }

    #[test]
    fn ambiguous_tolerance_is_rejected() {
        let eig = eigh(&HermitianOperator::diagonal(&[0.0, 1e-3, 1.0]).unwrap());
        assert!(matches!(
            bohr_frequencies(&eig, 5e-4),
            Err(Error::AmbiguousGrouping { .. })
        ));
        assert!(bohr_frequencies(&eig, 0.0).is_err());
    }

    #[test]
    fn zero_temperature_has_no_upward_rates() {
        let h = HermitianOperator::diagonal(&[0.0, 0.4, 1.0]).unwrap();
        let flat = SpectralDensity::flat(0.5).unwrap();
        let baths = vec![
            BathSpec::new(sigma(3, 0, 2), flat, 0.0).unwrap(),
            BathSpec::new(sigma(3, 1, 2), flat, 0.0).unwrap(),
        ];
        let set = jump_operators(&OpenSystem::new(h, baths).unwrap(), 1e-8).unwrap();
        for ch in set.channels.iter().flatten() {
            if ch.frequency < 0.0 {
                assert_eq!(ch.rate, 0.0);
            } else {
                assert_eq!(ch.rate, 0.5);
            }
        }
    }

    #[test]
    fn flat_density_with_diagonal_coupling_diverges() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
        let dephasing = HermitianOperator::diagonal(&[1.0, -1.0]).unwrap();
        let flat =
            BathSpec::new(dephasing.clone(), SpectralDensity::flat(1.0).unwrap(), 0.5).unwrap();
        let sys = OpenSystem::new(h.clone(), vec![flat]).unwrap();
        assert!(matches!(
            jump_operators(&sys, 1e-8),
            Err(Error::ZeroFrequencyDivergence { bath: 0, .. })
        ));

        let ohmic = BathSpec::new(dephasing, SpectralDensity::ohmic(0.2).unwrap(), 0.5).unwrap();
        let set = jump_operators(&OpenSystem::new(h, vec![ohmic]).unwrap(), 1e-8).unwrap();
        let zero = set.channels[0].iter().find(|c| c.frequency == 0.0).unwrap();
        assert_relative_eq!(zero.rate, 0.1);
    }
}
