use super::{SitePopulations, TemperatureProfile};
use crate::error::{Error, Result};

/// Absolute tolerance on population comparisons.
pub const POPULATION_TOL: f64 = 1e-6;
/// Minimum symmetry score for a delocalized profile.
pub const DELOCALIZED_SYMMETRY: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    /// Populations grow monotonically toward the cold end.
    Positive,
    /// Peak in the hotter half, decaying toward the cold end.
    Negative,
    /// Symmetric profile peaked in the middle of the chain.
    Delocalized,
    Mixed,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Positive => "positive",
            VerdictKind::Negative => "negative",
            VerdictKind::Delocalized => "delocalized",
            VerdictKind::Mixed => "mixed",
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermophoresisVerdict {
    pub kind: VerdictKind,
    /// 1-based most populated site.
    pub argmax: usize,
    /// Steps along the chain, read from hot to cold, where the population rises.
    pub rising_steps: usize,
    /// Steps, read from hot to cold, where the population falls.
    pub falling_steps: usize,
    /// Populations fall at every step from the peak to the cold end.
    pub decays_from_peak: bool,
    pub symmetry: f64,
    /// Displacement of the mean site toward the hot end, in site spacings.
    pub hot_shift: f64,
}

/// Reads a steady-state population profile as positive, negative, delocalized or mixed.
///
/// Checks run in that order of precedence: positive, delocalized, negative.
pub fn classify(
    pops: &SitePopulations,
    profile: &TemperatureProfile,
) -> Result<ThermophoresisVerdict> {
    let n = pops.len();
    if n < 3 {
        return Err(Error::NotApplicable(format!(
            "classification needs at least 3 sites, got {n}"
        )));
    }
    let (left, right) = profile
        .ends()
        .ok_or_else(|| Error::NotApplicable("empty temperature profile".into()))?;
    if left == right {
        return Err(Error::NotApplicable(
            "no temperature gradient between the chain ends".into(),
        ));
    }
    let hot_left = left > right;
    // oriented from the hot end to the cold end
    let oriented: Vec<f64> = if hot_left {
        pops.values().to_vec()
    } else {
        pops.values().iter().rev().copied().collect()
    };

    let steps: Vec<f64> = oriented.windows(2).map(|w| w[1] - w[0]).collect();
    let rising_steps = steps.iter().filter(|&&s| s > POPULATION_TOL).count();
    let falling_steps = steps.iter().filter(|&&s| s < -POPULATION_TOL).count();

    let argmax = pops.argmax();
    let peak = if hot_left { argmax - 1 } else { n - argmax };
    let decays_from_peak = steps[peak..].iter().all(|&s| s < -POPULATION_TOL);
    let symmetry = pops.symmetry_score();
    let centre = (n + 1) as f64 / 2.0;
    let hot_shift = if hot_left {
        centre - pops.mean_site()
    } else {
        pops.mean_site() - centre
    };

    let middle_quintile = ((argmax as f64) - centre).abs() <= n as f64 / 10.0;
    let kind = if rising_steps == n - 1 {
        VerdictKind::Positive
    } else if middle_quintile && symmetry >= DELOCALIZED_SYMMETRY {
        VerdictKind::Delocalized
    } else if peak < n / 2 && decays_from_peak {
        VerdictKind::Negative
    } else {
        VerdictKind::Mixed
    };

    Ok(ThermophoresisVerdict {
        kind,
        argmax,
        rising_steps,
        falling_steps,
        decays_from_peak,
        symmetry,
        hot_shift,
    })
}
