//! N-site chain of two-level sites with nearest-neighbour tunnelling between the
//! excited states, each site coupled to its own thermal bath.
//!
//! Site `i` (0-based here, 1-based in reports) owns a local ground state `|g_i>`
//! at energy 0 and an excited state `|e_i>` at `h`, stored at basis indices `2i`
//! and `2i + 1`. Bath `i` couples through `|e_i><g_i| + |g_i><e_i|`.

mod classify;
mod sweep;

pub use classify::{
    classify, ThermophoresisVerdict, VerdictKind, DELOCALIZED_SYMMETRY, POPULATION_TOL,
};
pub use sweep::{
    figure2_sweep, solve_chain, ChainSolution, Figure2Panel, SweepRow, DEFAULT_G_SWEEP,
};

use nalgebra::DMatrix;

use crate::davies::{BathSpec, OpenSystem, SpectralDensity};
use crate::error::{Error, Result};
use crate::operator::{eigh, ComplexMatrix, DensityMatrix, HermitianOperator};

/// Bath rate used when none is given, in units of `h`.
pub const DEFAULT_CHAIN_RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum TemperatureProfile {
    /// `T_i = T_L + (i - 1)(T_R - T_L)/(N - 1)`.
    Linear {
        left: f64,
        right: f64,
    },
    Explicit(Vec<f64>),
}

impl TemperatureProfile {
    pub fn temperatures(&self, sites: usize) -> Result<Vec<f64>> {
        let temps = match self {
            Self::Linear { left, right } => {
                let span = (sites.max(2) - 1) as f64;
                (0..sites)
                    .map(|i| left + i as f64 * (right - left) / span)
                    .collect()
            }
            Self::Explicit(t) => {
                if t.len() != sites {
                    return Err(Error::DimensionMismatch {
                        expected: sites,
                        found: t.len(),
                    });
                }
                t.clone()
            }
        };
        if temps.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::invalid("temperatures", "must be finite and >= 0"));
        }
        Ok(temps)
    }

    /// Temperatures at the first and last site.
    pub fn ends(&self) -> Option<(f64, f64)> {
        match self {
            Self::Linear { left, right } => Some((*left, *right)),
            Self::Explicit(t) => Some((*t.first()?, *t.last()?)),
        }
    }

    /// Profile of the chain read from the other end.
    pub fn mirrored(&self) -> Self {
        match self {
            Self::Linear { left, right } => Self::Linear {
                left: *right,
                right: *left,
            },
            Self::Explicit(t) => Self::Explicit(t.iter().rev().copied().collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub sites: usize,
    /// On-site excitation energy.
    pub h: f64,
    /// Nearest-neighbour tunnelling between excited states.
    pub g: f64,
    /// Flat spectral density of every local bath.
    pub gamma: f64,
    pub profile: TemperatureProfile,
}

impl ChainSpec {
    pub fn new(
        sites: usize,
        h: f64,
        g: f64,
        gamma: f64,
        profile: TemperatureProfile,
    ) -> Result<Self> {
        if sites < 2 {
            return Err(Error::invalid(
                "N",
                format!("chain needs at least 2 sites, got {sites}"),
            ));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid("h", format!("must be > 0, got {h}")));
        }
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::invalid("g", format!("must be >= 0, got {g}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
        }
        profile.temperatures(sites)?;
        Ok(Self {
            sites,
            h,
            g,
            gamma,
            profile,
        })
    }

    /// Linear profile with the default bath rate.
    pub fn linear(sites: usize, h: f64, g: f64, left: f64, right: f64) -> Result<Self> {
        Self::new(
            sites,
            h,
            g,
            DEFAULT_CHAIN_RATE,
            TemperatureProfile::Linear { left, right },
        )
    }

    pub fn dim(&self) -> usize {
        2 * self.sites
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.sites, self.h, g, self.gamma, self.profile.clone())
    }

    pub fn with_profile(&self, profile: TemperatureProfile) -> Result<Self> {
        Self::new(self.sites, self.h, self.g, self.gamma, profile)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.sites, self.h, self.g, gamma, self.profile.clone())
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        let n = self.sites;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            m[(excited(i), excited(i))] = self.h;
        }
        for i in 0..n - 1 {
            m[(excited(i), excited(i + 1))] = self.g;
            m[(excited(i + 1), excited(i))] = self.g;
        }
        HermitianOperator::from_real(m).expect("chain Hamiltonian is real symmetric")
    }

    pub fn local_coupling(&self, site: usize) -> HermitianOperator {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        m[(ground(site), excited(site))] = 1.0;
        m[(excited(site), ground(site))] = 1.0;
        HermitianOperator::from_real(m).expect("local coupling is real symmetric")
    }
}

pub fn ground(site: usize) -> usize {
    2 * site
}

pub fn excited(site: usize) -> usize {
    2 * site + 1
}

pub fn chain_system(spec: &ChainSpec) -> Result<OpenSystem> {
    let temps = spec.profile.temperatures(spec.sites)?;
    let spectral = SpectralDensity::flat(spec.gamma)?;
    let baths = temps
        .iter()
        .enumerate()
        .map(|(i, &t)| BathSpec::new(spec.local_coupling(i), spectral, t))
        .collect::<Result<Vec<_>>>()?;
    OpenSystem::new(spec.hamiltonian(), baths)
}

/// Per-site occupation `P(g_i) + P(e_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SitePopulations(Vec<f64>);

impl SitePopulations {
    /// Wraps raw site populations, checking normalization to `1e-9`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant {
                what: "site populations do not sum to 1",
                measured: total,
                tolerance: 1e-9,
            });
        }
        if values.iter().any(|p| !(-1e-9..=1.0 + 1e-9).contains(p)) {
            return Err(Error::invalid(
                "populations",
                "site population outside [0, 1]",
            ));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based index of the most populated site (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.0.iter().enumerate() {
            if *p > self.0[best] {
                best = i;
            }
        }
        best + 1
    }

    pub fn mirrored(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    /// `1 - ||p - mirror(p)||_1 / 2`; equals 1 for a reflection-symmetric profile.
    pub fn symmetry_score(&self) -> f64 {
        let n = self.0.len();
        let l1: f64 = (0..n).map(|i| (self.0[i] - self.0[n - 1 - i]).abs()).sum();
        1.0 - 0.5 * l1
    }

    /// Mean site index `sum_i i p_i` (1-based).
    pub fn mean_site(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }
}

pub fn site_populations(rho: &DensityMatrix, spec: &ChainSpec) -> Result<SitePopulations> {
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho.dim(),
        });
    }
    SitePopulations::new(
        (0..spec.sites)
            .map(|i| rho.population(ground(i)) + rho.population(excited(i)))
            .collect(),
    )
}

/// `exp(-H/T) / Z`, evaluated in the eigenbasis with energies shifted to the ground level.
pub fn gibbs_state(h: &HermitianOperator, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature > 0.0) {
        return Err(Error::invalid(
            "temperature",
            format!("must be > 0, got {temperature}"),
        ));
    }
    let eig = eigh(h);
    let e0 = eig.eigenvalues[0];
    let z: f64 = eig
        .eigenvalues
        .iter()
        .map(|e| (-(e - e0) / temperature).exp())
        .sum();
    let rho: ComplexMatrix = eig.map_spectrum(|e| (-(e - e0) / temperature).exp() / z);
    let rho = (&rho + rho.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
    DensityMatrix::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_profile_endpoints() {
        let t = TemperatureProfile::Linear {
            left: 0.8,
            right: 0.4,
        }
        .temperatures(5)
        .unwrap();
        assert_eq!(t[0], 0.8);
        assert_relative_eq!(t[4], 0.4, epsilon = 1e-15);
        assert_relative_eq!(t[2], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn explicit_profile_length_checked() {
        assert!(TemperatureProfile::Explicit(vec![0.1, 0.2])
            .temperatures(3)
            .is_err());
        assert!(TemperatureProfile::Explicit(vec![0.1, -0.2])
            .temperatures(2)
            .is_err());
    }

    #[test]
    fn spec_validation() {
        let lin = TemperatureProfile::Linear {
            left: 0.5,
            right: 0.5,
        };
        assert!(ChainSpec::new(1, 1.0, 0.1, 0.01, lin.clone()).is_err());
        assert!(ChainSpec::new(3, 0.0, 0.1, 0.01, lin.clone()).is_err());
        assert!(ChainSpec::new(3, 1.0, -0.1, 0.01, lin.clone()).is_err());
        assert!(ChainSpec::new(3, 1.0, 0.1, 0.0, lin).is_err());
    }

    #[test]
    fn two_site_excited_block() {
        let spec = ChainSpec::linear(2, 1.0, 0.3, 0.5, 0.5).unwrap();
        let eig = eigh(&spec.hamiltonian());
        let e = &eig.eigenvalues;
        assert_relative_eq!(e[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(e[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(e[2], 0.7, epsilon = 1e-14);
        assert_relative_eq!(e[3], 1.3, epsilon = 1e-14);
    }

    #[test]
    fn populations_of_simple_states() {
        let spec = ChainSpec::linear(4, 1.0, 0.1, 0.5, 0.5).unwrap();
        let rho = DensityMatrix::pure(8, ground(2)).unwrap();
        let p = site_populations(&rho, &spec).unwrap();
        assert_eq!(p.values(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(p.argmax(), 3);

        let mixed = site_populations(&DensityMatrix::maximally_mixed(8), &spec).unwrap();
        for v in mixed.values() {
            assert_relative_eq!(*v, 0.25, epsilon = 1e-15);
        }
        assert_relative_eq!(mixed.symmetry_score(), 1.0);
        assert!(site_populations(&DensityMatrix::maximally_mixed(6), &spec).is_err());
    }

    #[test]
    fn gibbs_two_levels() {
        let h = 1.0;
        let rho = gibbs_state(&HermitianOperator::diagonal(&[0.0, h]).unwrap(), h).unwrap();
        // 40-digit Boltzmann factors
        assert_relative_eq!(rho.population(0), 0.731_058_578_630_004_9, epsilon = 1e-15);
        assert_relative_eq!(rho.population(1), 0.268_941_421_369_995_1, epsilon = 1e-15);
        assert!(gibbs_state(&HermitianOperator::identity(2), 0.0).is_err());
    }

    #[test]
    fn gibbs_infinite_temperature_limit() {
        let spec = ChainSpec::linear(3, 1.0, 0.4, 1.0, 1.0).unwrap();
        let rho = gibbs_state(&spec.hamiltonian(), 1e12).unwrap();
        let mixed = DensityMatrix::maximally_mixed(6);
        assert!(rho.trace_distance(&mixed).unwrap() < 1e-10);
    }
}
