//! From raw coincidence counts to an experimental two-photon distribution.
//!
//! Each output site is read by one detector channel with a singles rate and
//! a coupling efficiency. Two photons on the same site are only detected
//! when a fiber beamsplitter of transmissivity `t` sends them to different
//! detectors, which happens with probability `p = 2t(1 − t)`.
//!
//! Correction of one unordered site pair `{i, j}`:
//!
//! 1. the pair enters the distribution only if its raw count exceeds the
//!    accidental estimate `A_ij = 2 S_i S_j T w` by the selection factor;
//! 2. accidentals are subtracted and negative results clamp to zero;
//! 3. the result is divided by `η_i η_j`, and by `p` when `i = j`;
//! 4. the table is normalized to unit sum.
//!
//! Errors come from Poisson bootstrap replicas of the raw counts, with the
//! pair selection of the observed data held fixed.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    bootstrap_std, similarity_2p, violation_map, BootstrapConfig, SimilarityResult, ViolationResult,
};
use crate::error::{Result, WalkError};
use crate::lattice::{pair_count, pair_index, pairs, LatticeExtent, Site};
use crate::two_photon::{PositionPairDistribution, TwoPhotonDistribution};

/// Default ratio of raw counts to accidentals required to keep a pair.
pub const DEFAULT_SELECTION_FACTOR: f64 = 5.0;

/// Expected accidental coincidences `2 S_i S_j T w`.
pub fn accidentals(s_i: f64, s_j: f64, acquisition_time: f64, window: f64) -> f64 {
    2.0 * s_i * s_j * acquisition_time * window
}

/// Detector channel of one output site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeInfo {
    pub singles_hz: f64,
    pub efficiency: f64,
}

fn default_selection_factor() -> f64 {
    DEFAULT_SELECTION_FACTOR
}

/// Acquisition settings shared by all channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsMetadata {
    /// Acquisition time `T` in seconds.
    pub acquisition_time: f64,
    /// Coincidence window `w` in seconds.
    pub window: f64,
    /// Transmissivity `t` of the fiber beamsplitter for bunched pairs.
    pub fbs_transmissivity: f64,
    #[serde(default = "default_selection_factor")]
    pub selection_factor: f64,
}

impl CountsMetadata {
    /// `p = 2t(1 − t)`.
    pub fn bunched_detection_probability(&self) -> f64 {
        2.0 * self.fbs_transmissivity * (1.0 - self.fbs_transmissivity)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(WalkError::InvalidParameter(msg));
        if !(self.acquisition_time > 0.0 && self.acquisition_time.is_finite()) {
            return bad(format!(
                "acquisition time must be positive, got {}",
                self.acquisition_time
            ));
        }
        if !(self.window > 0.0 && self.window < self.acquisition_time) {
            return bad(format!(
                "coincidence window must lie in (0, T), got {}",
                self.window
            ));
        }
        if !(self.fbs_transmissivity > 0.0 && self.fbs_transmissivity < 1.0) {
            return bad(format!(
                "beamsplitter transmissivity must lie in (0, 1), got {}",
                self.fbs_transmissivity
            ));
        }
        if !(self.selection_factor >= 0.0 && self.selection_factor.is_finite()) {
            return bad(format!(
                "selection factor must be non-negative, got {}",
                self.selection_factor
            ));
        }
        Ok(())
    }
}

/// Singles, coincidences and settings of one acquisition.
#[derive(Clone, Debug, PartialEq)]
pub struct CountsRecord {
    pub modes: BTreeMap<Site, ModeInfo>,
    /// Raw counts keyed by `(r1, r2)` with `r1 <= r2`.
    pub coincidences: BTreeMap<(Site, Site), u64>,
    pub metadata: CountsMetadata,
}

impl CountsRecord {
    pub fn new(metadata: CountsMetadata) -> Self {
        Self {
            modes: BTreeMap::new(),
            coincidences: BTreeMap::new(),
            metadata,
        }
    }

    pub fn set_mode(&mut self, site: Site, singles_hz: f64, efficiency: f64) {
        self.modes.insert(
            site,
            ModeInfo {
                singles_hz,
                efficiency,
            },
        );
    }

    /// Adds raw counts to the unordered pair `{r1, r2}`.
    pub fn add_coincidences(&mut self, r1: Site, r2: Site, counts: u64) {
        let key = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        *self.coincidences.entry(key).or_insert(0) += counts;
    }

    pub fn total_events(&self) -> u64 {
        self.coincidences.values().sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.metadata.validate()?;
        if self.modes.is_empty() {
            return Err(WalkError::NoEvents);
        }
        for (site, info) in &self.modes {
            if !(info.singles_hz >= 0.0 && info.singles_hz.is_finite()) {
                return Err(WalkError::InvalidParameter(format!(
                    "singles rate at {site} must be non-negative"
                )));
            }
            if !(info.efficiency > 0.0 && info.efficiency <= 1.0) {
                return Err(WalkError::InvalidParameter(format!(
                    "efficiency at {site} must lie in (0, 1], got {}",
                    info.efficiency
                )));
            }
        }
        for &(r1, r2) in self.coincidences.keys() {
            for r in [r1, r2] {
                if !self.modes.contains_key(&r) {
                    return Err(WalkError::SiteOutOfExtent(r));
                }
            }
        }
        Ok(())
    }

    /// Smallest extent holding every detector channel.
    pub fn extent(&self) -> Result<LatticeExtent> {
        LatticeExtent::bounding(self.modes.keys().copied()).ok_or(WalkError::NoEvents)
    }
}

/// Per-pair constants of the correction, laid out like a
/// [`PositionPairDistribution`] over `extent`.
struct Correction {
    extent: LatticeExtent,
    raw: Vec<f64>,
    accidentals: Vec<f64>,
    divisor: Vec<f64>,
    selected: Vec<bool>,
}

impl Correction {
    fn build(rec: &CountsRecord) -> Result<Self> {
        rec.validate()?;
        let extent = rec.extent()?;
        let s = extent.site_count();
        let n = pair_count(s);
        let meta = &rec.metadata;
        let p_bunch = meta.bunched_detection_probability();
        let mut raw = vec![0.0; n];
        for (&(r1, r2), &c) in &rec.coincidences {
            let i = extent.site_index(r1).expect("bounded");
            let j = extent.site_index(r2).expect("bounded");
            raw[pair_index(s, i, j)] += c as f64;
        }
        let mut acc = vec![0.0; n];
        let mut divisor = vec![0.0; n];
        for (k, (i, j)) in pairs(s).enumerate() {
            let (ri, rj) = (extent.site_at(i), extent.site_at(j));
            let (Some(mi), Some(mj)) = (rec.modes.get(&ri), rec.modes.get(&rj)) else {
                continue;
            };
            acc[k] = accidentals(
                mi.singles_hz,
                mj.singles_hz,
                meta.acquisition_time,
                meta.window,
            );
            divisor[k] = mi.efficiency * mj.efficiency * if i == j { p_bunch } else { 1.0 };
        }
        let selected = raw
            .iter()
            .zip(&acc)
            .zip(&divisor)
            .map(|((&r, &a), &d)| d > 0.0 && r > meta.selection_factor * a)
            .collect();
        Ok(Self {
            extent,
            raw,
            accidentals: acc,
            divisor,
            selected,
        })
    }

    /// Corrected, normalized cells for a given raw-count vector; `None` if
    /// nothing survives.
    fn apply(&self, raw: &[f64]) -> Option<Vec<f64>> {
        let mut out: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                if self.selected[k] {
                    (r - self.accidentals[k]).max(0.0) / self.divisor[k]
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = out.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return None;
        }
        out.iter_mut().for_each(|v| *v /= total);
        Some(out)
    }
}

/// Experimental distribution with bootstrap errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectedCounts {
    pub distribution: PositionPairDistribution<f64>,
    /// Standard error of each cell, aligned with `distribution.values()`.
    pub std_errors: Vec<f64>,
    /// Whether each pair passed the accidental-ratio selection.
    pub selected: Vec<bool>,
    /// Accidental estimate of each pair.
    pub accidentals: Vec<f64>,
}

impl CorrectedCounts {
    pub fn std_error(&self, r1: Site, r2: Site) -> f64 {
        self.distribution
            .index_of(r1, r2)
            .map_or(0.0, |k| self.std_errors[k])
    }
}

/// Applies the full correction chain to `rec`.
pub fn correct_counts(rec: &CountsRecord, boot: BootstrapConfig) -> Result<CorrectedCounts> {
    let corr = Correction::build(rec)?;
    let cells = corr.apply(&corr.raw).ok_or(WalkError::NoEvents)?;
    let std_errors = bootstrap_std(&corr.raw, boot, |r| corr.apply(r))?;
    Ok(CorrectedCounts {
        distribution: PositionPairDistribution::new(corr.extent, cells)?,
        std_errors,
        selected: corr.selected,
        accidentals: corr.accidentals,
    })
}

/// Puts two distributions on a common extent: the larger of the two must
/// contain the other.
pub fn align(
    a: &PositionPairDistribution<f64>,
    b: &PositionPairDistribution<f64>,
) -> Result<(PositionPairDistribution<f64>, PositionPairDistribution<f64>)> {
    if a.extent() == b.extent() {
        Ok((a.clone(), b.clone()))
    } else if b.extent().contains_extent(a.extent()) {
        Ok((a.embed(*b.extent())?, b.clone()))
    } else if a.extent().contains_extent(b.extent()) {
        Ok((a.clone(), b.embed(*a.extent())?))
    } else {
        Err(WalkError::ExtentMismatch)
    }
}

/// Similarity between the corrected record and a theory distribution, with
/// its bootstrap error.
pub fn compare_to_theory(
    rec: &CountsRecord,
    theory: &PositionPairDistribution<f64>,
    boot: BootstrapConfig,
) -> Result<SimilarityResult> {
    let corr = Correction::build(rec)?;
    let cells = corr.apply(&corr.raw).ok_or(WalkError::NoEvents)?;
    let exp = PositionPairDistribution::new(corr.extent, cells)?;
    let (exp_aligned, theory_aligned) = align(&exp, theory)?;
    let value = similarity_2p(&exp_aligned, &theory_aligned)?.value;
    let target = *theory_aligned.extent();
    let errors = bootstrap_std(&corr.raw, boot, |r| {
        let cells = corr.apply(r)?;
        let d = PositionPairDistribution::new(corr.extent, cells).ok()?;
        let d = d.embed(target).ok()?;
        Some(vec![similarity_2p(&d, &theory_aligned).ok()?.value])
    })?;
    Ok(SimilarityResult {
        value,
        std_error: errors[0],
    })
}

/// Violation witness on the corrected record, with eligibility taken from
/// the coin-level theory and `σ` from bootstrap replicas.
pub fn violation_report(
    rec: &CountsRecord,
    coin_level: &TwoPhotonDistribution<f64>,
    boot: BootstrapConfig,
) -> Result<ViolationResult> {
    let corr = Correction::build(rec)?;
    let cells = corr.apply(&corr.raw).ok_or(WalkError::NoEvents)?;
    let exp = PositionPairDistribution::new(corr.extent, cells)?;
    let mut result = violation_map(&exp, coin_level);
    let sigmas = bootstrap_std(&corr.raw, boot, |r| {
        let cells = corr.apply(r)?;
        let d = PositionPairDistribution::new(corr.extent, cells).ok()?;
        Some(
            violation_map(&d, coin_level)
                .entries
                .iter()
                .map(|e| e.v.unwrap_or(f64::NAN))
                .collect(),
        )
    })?;
    for (e, s) in result.entries.iter_mut().zip(sigmas) {
        if e.eligible {
            e.sigma = s;
        }
    }
    Ok(result)
}

/// Settings for drawing synthetic counts from a theory distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisConfig {
    /// Expected number of detected true coincidences.
    pub events: f64,
    pub metadata: CountsMetadata,
    /// Channel of every site of the theory extent.
    pub modes: BTreeMap<Site, ModeInfo>,
    pub seed: u64,
}

impl SynthesisConfig {
    /// Every site of `extent` gets `singles_hz`; efficiencies cycle through
    /// `efficiencies` in site order.
    pub fn uniform_singles(
        extent: &LatticeExtent,
        singles_hz: f64,
        efficiencies: &[f64],
        events: f64,
        metadata: CountsMetadata,
        seed: u64,
    ) -> Self {
        let modes = extent
            .sites()
            .enumerate()
            .map(|(k, s)| {
                (
                    s,
                    ModeInfo {
                        singles_hz,
                        efficiency: efficiencies[k % efficiencies.len()],
                    },
                )
            })
            .collect();
        Self {
            events,
            metadata,
            modes,
            seed,
        }
    }
}

/// Draws raw counts whose expectation is the theory distribution seen
/// through the detection efficiencies, plus accidentals.
///
/// Every pair of the theory extent is sampled, so pairs with zero
/// probability still collect accidental counts.
pub fn synthesize_counts(
    theory: &PositionPairDistribution<f64>,
    config: &SynthesisConfig,
) -> Result<CountsRecord> {
    config.metadata.validate()?;
    if !(config.events > 0.0 && config.events.is_finite()) {
        return Err(WalkError::InvalidParameter(format!(
            "event count must be positive, got {}",
            config.events
        )));
    }
    let extent = *theory.extent();
    for s in extent.sites() {
        if !config.modes.contains_key(&s) {
            return Err(WalkError::SiteOutOfExtent(s));
        }
    }
    let meta = &config.metadata;
    let p_bunch = meta.bunched_detection_probability();
    let weights: Vec<(Site, Site, f64, f64)> = theory
        .iter()
        .map(|(r1, r2, p)| {
            let (m1, m2) = (&config.modes[&r1], &config.modes[&r2]);
            let det = m1.efficiency * m2.efficiency * if r1 == r2 { p_bunch } else { 1.0 };
            let acc = accidentals(
                m1.singles_hz,
                m2.singles_hz,
                meta.acquisition_time,
                meta.window,
            );
            (r1, r2, p * det, acc)
        })
        .collect();
    let norm: f64 = weights.iter().map(|w| w.2).sum();
    if norm <= 0.0 {
        return Err(WalkError::NoEvents);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = CountsRecord::new(*meta);
    rec.modes = config.modes.clone();
    for (r1, r2, w, acc) in weights {
        let mean = config.events * w / norm + acc;
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
        } else {
            0
        };
        if count > 0 {
            rec.add_coincidences(r1, r2, count);
        }
    }
    Ok(rec)
}
