//! Comparison metrics, the non-classicality witness, bootstrap errors and
//! the display linearization of lattice sites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::Site;
use crate::scalar::Real;
use crate::single::PositionDistribution;
use crate::two_photon::{PositionPairDistribution, TwoPhotonDistribution};

/// Same-site opposite-coin probability below which a site enters the
/// violation test.
pub const ELIGIBILITY_THRESHOLD: f64 = 1e-12;

/// Default number of bootstrap replicas.
pub const DEFAULT_N_BOOT: usize = 1000;

/// Smallest accepted number of bootstrap replicas.
pub const MIN_N_BOOT: usize = 100;

/// Squared Bhattacharyya coefficient, optionally with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    pub value: f64,
    pub std_error: f64,
}

fn check_total<T: Real>(total: T) -> Result<()> {
    if !total.is_finite() || (total - T::one()).abs() > T::tol(1e-9) {
        return Err(WalkError::NotNormalized(total.as_f64()));
    }
    Ok(())
}

fn bhattacharyya<T: Real>(p: &[T], q: &[T]) -> f64 {
    let b: T = p.iter().zip(q).map(|(&a, &b)| (a * b).sqrt()).sum();
    (b * b).as_f64().clamp(0.0, 1.0)
}

/// `S = (Σ_r √(P(r) Q(r)))²` for single-photon distributions.
pub fn similarity_1p<T: Real>(
    p: &PositionDistribution<T>,
    q: &PositionDistribution<T>,
) -> Result<SimilarityResult> {
    if p.extent() != q.extent() {
        return Err(WalkError::ExtentMismatch);
    }
    check_total(p.total())?;
    check_total(q.total())?;
    Ok(SimilarityResult {
        value: bhattacharyya(p.values(), q.values()),
        std_error: 0.0,
    })
}

/// `S = (Σ_{r1 <= r2} √(P(r1, r2) Q(r1, r2)))²` over unordered site pairs.
pub fn similarity_2p<T: Real>(
    p: &PositionPairDistribution<T>,
    q: &PositionPairDistribution<T>,
) -> Result<SimilarityResult> {
    if p.extent() != q.extent() {
        return Err(WalkError::ExtentMismatch);
    }
    check_total(p.total())?;
    check_total(q.total())?;
    Ok(SimilarityResult {
        value: bhattacharyya(p.values(), q.values()),
        std_error: 0.0,
    })
}

/// Witness value at one unordered pair of distinct sites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationEntry {
    pub r1: Site,
    pub r2: Site,
    /// Both sites have vanishing same-site opposite-coin probability.
    pub eligible: bool,
    /// `(2/3) √(Γ11 Γ22) − Γ12`; `None` for ineligible pairs.
    pub v: Option<f64>,
    /// Form that keeps the same-site opposite-coin terms; `None` for
    /// ineligible pairs.
    pub v_full: Option<f64>,
    /// Standard error of `v`, zero for exact distributions.
    pub sigma: f64,
}

impl ViolationEntry {
    /// `V / σ`, if both are defined and `σ > 0`.
    pub fn significance(&self) -> Option<f64> {
        match self.v {
            Some(v) if self.sigma > 0.0 => Some(v / self.sigma),
            _ => None,
        }
    }
}

/// Witness evaluated over every unordered pair of distinct sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationResult {
    pub entries: Vec<ViolationEntry>,
}

impl ViolationResult {
    pub fn eligible(&self) -> impl Iterator<Item = &ViolationEntry> + '_ {
        self.entries.iter().filter(|e| e.eligible)
    }

    /// Eligible entry with the largest `V`.
    pub fn max(&self) -> Option<&ViolationEntry> {
        self.eligible()
            .filter(|e| e.v.is_some())
            .max_by(|a, b| a.v.partial_cmp(&b.v).expect("finite"))
    }

    /// Number of eligible pairs with `V > 0`.
    pub fn positive_count(&self) -> usize {
        self.eligible()
            .filter(|e| e.v.is_some_and(|v| v > 0.0))
            .count()
    }
}

/// Per-site `Γ_{r↑,r↓}`: half the probability of the unordered pair
/// `{(r, Up), (r, Down)}`, i.e. the ordered-pair weight.
fn opposite_coin_weight<T: Real>(coin_level: &TwoPhotonDistribution<T>, site: Site) -> f64 {
    coin_level
        .opposite_coin_at(site)
        .map_or(0.0, |p| p.as_f64() * 0.5)
}

/// Evaluates the witness `(2/3) √(Γ(r1,r1) Γ(r2,r2)) − Γ(r1,r2)` on `gamma`.
///
/// A site is eligible when its same-site opposite-coin probability in
/// `coin_level` is below [`ELIGIBILITY_THRESHOLD`]; sites outside the
/// coin-level extent carry no probability and are eligible. A pair is
/// evaluated only when both of its sites are eligible. The full form
/// `(2/3) √(Γ11 Γ22 − 2 Γ22 Γ1↑1↓ − 2 Γ11 Γ2↑2↓) − Γ12` is reported
/// alongside and coincides with the reduced one on eligible pairs.
pub fn violation_map<T: Real>(
    gamma: &PositionPairDistribution<T>,
    coin_level: &TwoPhotonDistribution<T>,
) -> ViolationResult {
    let sites: Vec<Site> = gamma.extent().sites().collect();
    let opposite: Vec<f64> = sites
        .iter()
        .map(|&s| opposite_coin_weight(coin_level, s))
        .collect();
    let diag: Vec<f64> = sites.iter().map(|&s| gamma.get(s, s).as_f64()).collect();
    let mut entries = Vec::new();
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            let eligible = 2.0 * opposite[i] < ELIGIBILITY_THRESHOLD
                && 2.0 * opposite[j] < ELIGIBILITY_THRESHOLD;
            let (v, v_full) = if eligible {
                let g12 = gamma.get(sites[i], sites[j]).as_f64();
                let reduced = 2.0 / 3.0 * (diag[i] * diag[j]).sqrt() - g12;
                let arg =
                    diag[i] * diag[j] - 2.0 * diag[j] * opposite[i] - 2.0 * diag[i] * opposite[j];
                let full = 2.0 / 3.0 * arg.max(0.0).sqrt() - g12;
                (Some(reduced), Some(full))
            } else {
                (None, None)
            };
            entries.push(ViolationEntry {
                r1: sites[i],
                r2: sites[j],
                eligible,
                v,
                v_full,
                sigma: 0.0,
            });
        }
    }
    ViolationResult { entries }
}

/// Replica count and seed of a bootstrap run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_boot: DEFAULT_N_BOOT,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn new(n_boot: usize, seed: u64) -> Result<Self> {
        if n_boot < MIN_N_BOOT {
            return Err(WalkError::InvalidParameter(format!(
                "at least {MIN_N_BOOT} bootstrap replicas are required, got {n_boot}"
            )));
        }
        Ok(Self { n_boot, seed })
    }
}

/// Draws one Poisson resample of `counts` from a generator seeded by the
/// run seed and the replica number.
pub fn poisson_resample(counts: &[f64], seed: u64, replica: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    counts
        .iter()
        .map(|&c| {
            if c > 0.0 {
                Poisson::new(c).expect("positive mean").sample(&mut rng)
            } else {
                0.0
            }
        })
        .collect()
}

/// Standard deviation of a vector-valued statistic under Poisson
/// resampling of every count.
///
/// Replica `k` draws from its own generator stream, so the result does not
/// depend on how replicas are scheduled across threads. Replicas on which
/// the statistic is undefined (it returns `None`, e.g. an all-zero
/// resample) are left out. Entries that are `NaN` in a replica are left out
/// of that entry's spread only.
pub fn bootstrap_std<F>(counts: &[f64], config: BootstrapConfig, statistic: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    BootstrapConfig::new(config.n_boot, config.seed)?;
    if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(WalkError::InvalidParameter(
            "counts must be finite and non-negative".into(),
        ));
    }
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(WalkError::NoEvents);
    }
    let replicas: Vec<Option<Vec<f64>>> = (0..config.n_boot as u64)
        .into_par_iter()
        .map(|k| statistic(&poisson_resample(counts, config.seed, k)))
        .collect();
    let replicas: Vec<Vec<f64>> = replicas.into_iter().flatten().collect();
    let Some(width) = replicas.first().map(Vec::len) else {
        return Err(WalkError::NoEvents);
    };
    let mut out = Vec::with_capacity(width);
    for k in 0..width {
        let vals: Vec<f64> = replicas
            .iter()
            .map(|r| r[k])
            .filter(|v| !v.is_nan())
            .collect();
        out.push(sample_std(&vals));
    }
    Ok(out)
}

fn sample_std(vals: &[f64]) -> f64 {
    if vals.len() < 2 {
        return 0.0;
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

/// Bootstrap errors of the normalized cells `N_k / Σ N`.
pub fn bootstrap_cell_errors(counts: &[f64], config: BootstrapConfig) -> Result<Vec<f64>> {
    bootstrap_std(counts, config, |c| {
        let total: f64 = c.iter().sum();
        (total > 0.0).then(|| c.iter().map(|v| v / total).collect())
    })
}

/// Display index `m + 7n` of a site inside the `7 × 7` window
/// `m, n ∈ [−3, 3]`.
pub fn linearize_site(m: i32, n: i32) -> Result<i32> {
    if !(-3..=3).contains(&m) || !(-3..=3).contains(&n) {
        return Err(WalkError::DisplayRange { m, n });
    }
    Ok(m + 7 * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeExtent;

    fn line(values: &[f64]) -> PositionDistribution<f64> {
        let e = LatticeExtent::new(0, values.len() as i32 - 1, 0, 0).unwrap();
        PositionDistribution::new(e, values.to_vec()).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let p = line(&[0.5, 0.5]);
        let q = line(&[1.0, 0.0]);
        assert_eq!(similarity_1p(&p, &p).unwrap().value, 1.0);
        assert!((similarity_1p(&p, &q).unwrap().value - 0.5).abs() < 1e-15);
        assert_eq!(
            similarity_1p(&line(&[1.0, 0.0]), &line(&[0.0, 1.0]))
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            similarity_1p(&p, &line(&[0.5, 0.5, 0.0])).unwrap_err(),
            WalkError::ExtentMismatch
        );
        assert!(matches!(
            similarity_1p(&p, &line(&[0.5, 0.6])),
            Err(WalkError::NotNormalized(_))
        ));
    }

    #[test]
    fn linearization() {
        assert_eq!(linearize_site(0, 0).unwrap(), 0);
        assert_eq!(linearize_site(1, 1).unwrap(), 8);
        assert_eq!(linearize_site(-3, 3).unwrap(), 18);
        assert_eq!(
            linearize_site(4, 0).unwrap_err(),
            WalkError::DisplayRange { m: 4, n: 0 }
        );
        let mut seen = std::collections::BTreeSet::new();
        for m in -3..=3 {
            for n in -3..=3 {
                let k = linearize_site(m, n).unwrap();
                assert!((-24..=24).contains(&k));
                assert!(seen.insert(k));
            }
        }
    }

    #[test]
    fn bootstrap_is_seeded() {
        let counts = [120.0, 40.0, 0.0, 900.0];
        let cfg = BootstrapConfig::new(200, 7).unwrap();
        let a = bootstrap_cell_errors(&counts, cfg).unwrap();
        let b = bootstrap_cell_errors(&counts, cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[2], 0.0);
        let other = bootstrap_cell_errors(&counts, BootstrapConfig::new(200, 8).unwrap()).unwrap();
        assert_ne!(a, other);
        assert!(bootstrap_cell_errors(&[0.0, 0.0], cfg).is_err());
        assert!(BootstrapConfig::new(99, 0).is_err());
    }
}
