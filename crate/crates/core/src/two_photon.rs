//! Two-photon output statistics.
//!
//! Each photon is evolved on its own by the same protocol. For a pair of
//! evolved single-photon states `a` and `b`, the bosonic and classical
//! probabilities of an unordered pair of output modes `{k1, k2}` are
//!
//! ```text
//! k1 != k2:  P_ind = |a(k1) b(k2) + a(k2) b(k1)|²
//!            P_dis = |a(k1)|² |b(k2)|² + |a(k2)|² |b(k1)|²
//! k1 == k2:  P_ind = 2 |a(k)|² |b(k)|²
//!            P_dis =   |a(k)|² |b(k)|²
//! ```
//!
//! and partial indistinguishability mixes the two as
//! `c0 · P_ind / Z_ind + (1 − c0) · P_dis`, where `Z_ind` is the total
//! bosonic weight (one for inputs in orthogonal modes).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{pair_count, pair_index, pairs, CoinState, LatticeExtent, ModeIndex, Site};
use crate::protocol::{PlateOp, Protocol};
use crate::scalar::Real;
use crate::single::{localized_state, InitialStateSpec, PositionDistribution};
use crate::walk::{auto_extent, evolve, WalkState};

/// Degree of indistinguishability `c0 ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndistinguishabilityModel<T: Real> {
    c0: T,
}

impl<T: Real> IndistinguishabilityModel<T> {
    pub fn new(c0: T) -> Result<Self> {
        if !(c0 >= T::zero() && c0 <= T::one()) {
            return Err(WalkError::InvalidParameter(format!(
                "c0 must lie in [0, 1], got {c0}"
            )));
        }
        Ok(Self { c0 })
    }

    pub fn indistinguishable() -> Self {
        Self { c0: T::one() }
    }

    pub fn distinguishable() -> Self {
        Self { c0: T::zero() }
    }

    pub fn c0(&self) -> T {
        self.c0
    }
}

/// Unnormalized bosonic and classical pair weights, stored over unordered
/// mode pairs `i <= j` in row-major order.
#[derive(Clone, Debug)]
pub struct PairTerms<T: Real> {
    extent: LatticeExtent,
    pub ind: Vec<T>,
    pub dis: Vec<T>,
}

impl<T: Real> PairTerms<T> {
    pub fn extent(&self) -> &LatticeExtent {
        &self.extent
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        pair_index(self.extent.mode_count(), i, j)
    }

    /// `Z_ind`, the total bosonic weight.
    pub fn bosonic_total(&self) -> T {
        self.ind.iter().copied().sum()
    }
}

fn check_normalized<T: Real>(state: &WalkState<T>) -> Result<()> {
    let norm = state.norm_sqr();
    if !norm.is_finite() || (norm - T::one()).abs() > T::tol(1e-10) {
        return Err(WalkError::NotNormalized(norm.as_f64()));
    }
    Ok(())
}

/// Bosonic and classical weights of every unordered output-mode pair.
pub fn pair_terms<T: Real>(a: &WalkState<T>, b: &WalkState<T>) -> Result<PairTerms<T>> {
    if a.extent() != b.extent() {
        return Err(WalkError::ExtentMismatch);
    }
    check_normalized(a)?;
    check_normalized(b)?;
    let n = a.extent().mode_count();
    let (av, bv) = (a.amplitudes(), b.amplitudes());
    let two = T::lit(2.0);
    let rows: Vec<(Vec<T>, Vec<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut ind = Vec::with_capacity(n - i);
            let mut dis = Vec::with_capacity(n - i);
            let (pa_i, pb_i) = (av[i].norm_sqr(), bv[i].norm_sqr());
            ind.push(two * pa_i * pb_i);
            dis.push(pa_i * pb_i);
            for j in i + 1..n {
                ind.push((av[i] * bv[j] + av[j] * bv[i]).norm_sqr());
                dis.push(pa_i * bv[j].norm_sqr() + av[j].norm_sqr() * pb_i);
            }
            (ind, dis)
        })
        .collect();
    let mut ind = Vec::with_capacity(pair_count(n));
    let mut dis = Vec::with_capacity(pair_count(n));
    for (ri, rd) in rows {
        ind.extend(ri);
        dis.extend(rd);
    }
    Ok(PairTerms {
        extent: *a.extent(),
        ind,
        dis,
    })
}

/// Probabilities over unordered pairs of output modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonDistribution<T: Real> {
    extent: LatticeExtent,
    c0: T,
    probabilities: Vec<T>,
}

impl<T: Real> TwoPhotonDistribution<T> {
    pub fn extent(&self) -> &LatticeExtent {
        &self.extent
    }

    pub fn c0(&self) -> T {
        self.c0
    }

    pub fn values(&self) -> &[T] {
        &self.probabilities
    }

    pub fn get(&self, k1: ModeIndex, k2: ModeIndex) -> Option<T> {
        let i = self.extent.mode_index(k1)?;
        let j = self.extent.mode_index(k2)?;
        Some(self.probabilities[pair_index(self.extent.mode_count(), i, j)])
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().copied().sum()
    }

    /// `((k1, k2), p)` with `k1 <= k2` in linear mode order.
    pub fn iter(&self) -> impl Iterator<Item = ((ModeIndex, ModeIndex), T)> + '_ {
        let n = self.extent.mode_count();
        pairs(n)
            .zip(self.probabilities.iter().copied())
            .map(move |((i, j), p)| ((self.extent.mode_at(i), self.extent.mode_at(j)), p))
    }

    /// Probability that the photons leave the same site with opposite
    /// coins, i.e. the unordered pair `{(r, Up), (r, Down)}`.
    pub fn opposite_coin_at(&self, site: Site) -> Option<T> {
        self.get(
            ModeIndex::new(site.m, site.n, CoinState::Up),
            ModeIndex::new(site.m, site.n, CoinState::Down),
        )
    }
}

/// Mixes the pair weights of two evolved photons at the given `c0`.
pub fn mix_pair_terms<T: Real>(
    terms: &PairTerms<T>,
    model: IndistinguishabilityModel<T>,
) -> TwoPhotonDistribution<T> {
    let c0 = model.c0();
    let z = terms.bosonic_total();
    let probabilities = terms
        .ind
        .iter()
        .zip(&terms.dis)
        .map(|(&i, &d)| c0 * (i / z) + (T::one() - c0) * d)
        .collect();
    TwoPhotonDistribution {
        extent: terms.extent,
        c0,
        probabilities,
    }
}

/// Output distribution of a photon pair whose members evolved into `a`
/// and `b`.
pub fn two_photon_distribution<T: Real>(
    a: &WalkState<T>,
    b: &WalkState<T>,
    model: IndistinguishabilityModel<T>,
) -> Result<TwoPhotonDistribution<T>> {
    Ok(mix_pair_terms(&pair_terms(a, b)?, model))
}

/// Probabilities over unordered pairs of sites, coin traced out.
///
/// Storage is row-major upper-triangular over sites in linearized order,
/// so the first site of every stored pair precedes or equals the second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionPairDistribution<T: Real> {
    extent: LatticeExtent,
    probabilities: Vec<T>,
}

impl<T: Real> PositionPairDistribution<T> {
    pub fn new(extent: LatticeExtent, probabilities: Vec<T>) -> Result<Self> {
        let expected = pair_count(extent.site_count());
        if probabilities.len() != expected {
            return Err(WalkError::LengthMismatch {
                expected,
                found: probabilities.len(),
            });
        }
        if probabilities
            .iter()
            .any(|p| *p < T::zero() || !p.is_finite())
        {
            return Err(WalkError::InvalidParameter(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            extent,
            probabilities,
        })
    }

    /// Builds a distribution from `(r1, r2, p)` entries; unordered pairs
    /// given twice are summed.
    pub fn from_entries<I>(extent: LatticeExtent, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Site, Site, T)>,
    {
        let s = extent.site_count();
        let mut probabilities = vec![T::zero(); pair_count(s)];
        for (r1, r2, p) in entries {
            let i = extent
                .site_index(r1)
                .ok_or(WalkError::SiteOutOfExtent(r1))?;
            let j = extent
                .site_index(r2)
                .ok_or(WalkError::SiteOutOfExtent(r2))?;
            probabilities[pair_index(s, i, j)] += p;
        }
        Self::new(extent, probabilities)
    }

    pub fn extent(&self) -> &LatticeExtent {
        &self.extent
    }

    pub fn values(&self) -> &[T] {
        &self.probabilities
    }

    pub fn index_of(&self, r1: Site, r2: Site) -> Option<usize> {
        let i = self.extent.site_index(r1)?;
        let j = self.extent.site_index(r2)?;
        Some(pair_index(self.extent.site_count(), i, j))
    }

    /// Probability of the unordered pair `{r1, r2}`; zero off the extent.
    pub fn get(&self, r1: Site, r2: Site) -> T {
        self.index_of(r1, r2)
            .map_or(T::zero(), |k| self.probabilities[k])
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().copied().sum()
    }

    /// `(r1, r2, p)` with `r1 <= r2`.
    pub fn iter(&self) -> impl Iterator<Item = (Site, Site, T)> + '_ {
        pairs(self.extent.site_count())
            .zip(self.probabilities.iter().copied())
            .map(move |((i, j), p)| (self.extent.site_at(i), self.extent.site_at(j), p))
    }

    /// Probability of finding one randomly chosen photon at each site.
    pub fn marginal(&self) -> PositionDistribution<T> {
        let s = self.extent.site_count();
        let half = T::lit(0.5);
        let mut out = vec![T::zero(); s];
        for ((i, j), &p) in pairs(s).zip(&self.probabilities) {
            if i == j {
                out[i] += p;
            } else {
                out[i] += half * p;
                out[j] += half * p;
            }
        }
        PositionDistribution::new(self.extent, out).expect("non-negative")
    }

    /// Same distribution over a larger extent.
    pub fn embed(&self, extent: LatticeExtent) -> Result<Self> {
        if !extent.contains_extent(&self.extent) {
            return Err(WalkError::ExtentMismatch);
        }
        Self::from_entries(extent, self.iter())
    }

    /// Same distribution over a smaller extent; fails if any probability
    /// above `tol` would be dropped.
    pub fn restrict(&self, extent: LatticeExtent, tol: T) -> Result<Self> {
        let mut kept = Vec::new();
        for (r1, r2, p) in self.iter() {
            if extent.contains(r1) && extent.contains(r2) {
                kept.push((r1, r2, p));
            } else if p > tol {
                return Err(WalkError::ExtentMismatch);
            }
        }
        Self::from_entries(extent, kept)
    }
}

/// `P(r1, r2) = Σ_{σ1, σ2} Γ(r1 σ1, r2 σ2)`.
pub fn position_pair_distribution<T: Real>(
    dist: &TwoPhotonDistribution<T>,
) -> PositionPairDistribution<T> {
    let extent = dist.extent;
    let n = extent.mode_count();
    let s = extent.site_count();
    let mut out = vec![T::zero(); pair_count(s)];
    for ((i, j), &p) in pairs(n).zip(&dist.probabilities) {
        out[pair_index(s, i / 2, j / 2)] += p;
    }
    PositionPairDistribution {
        extent,
        probabilities: out,
    }
}

/// `P(r1, r1) + P(r2, r2)`.
pub fn bunching_probability<T: Real>(
    dist: &PositionPairDistribution<T>,
    r1: Site,
    r2: Site,
) -> Result<T> {
    for r in [r1, r2] {
        if !dist.extent.contains(r) {
            return Err(WalkError::SiteOutOfExtent(r));
        }
    }
    Ok(dist.get(r1, r1) + dist.get(r2, r2))
}

/// Everything computed for one two-photon walk.
#[derive(Clone, Debug)]
pub struct TwoPhotonRun<T: Real> {
    pub extent: LatticeExtent,
    pub photon_a: WalkState<T>,
    pub photon_b: WalkState<T>,
    pub modes: TwoPhotonDistribution<T>,
    pub positions: PositionPairDistribution<T>,
}

/// Evolves both photons `steps` steps on a shared auto-sized extent and
/// mixes their statistics at `model`.
pub fn run_two_photon<T: Real>(
    protocol: &Protocol,
    steps: usize,
    a: &InitialStateSpec<T>,
    b: &InitialStateSpec<T>,
    model: IndistinguishabilityModel<T>,
) -> Result<TwoPhotonRun<T>> {
    let extent = auto_extent(protocol, steps, &[a.site, b.site])?;
    let photon_a = evolve(&localized_state(a, extent)?, protocol, steps)?;
    let photon_b = evolve(&localized_state(b, extent)?, protocol, steps)?;
    let modes = two_photon_distribution(&photon_a, &photon_b, model)?;
    let positions = position_pair_distribution(&modes);
    Ok(TwoPhotonRun {
        extent,
        photon_a,
        photon_b,
        modes,
        positions,
    })
}

/// Sites on which the HOM photons enter and bunch.
pub const HOM_SITES: (Site, Site) = (Site::new(1, 0), Site::new(-1, 0));

/// Three-plate beamsplitter `TX(δ1), C(π/4), TX(δ2)`.
pub fn hom_protocol(delta1: f64, delta2: f64) -> Result<Protocol> {
    Protocol::single_step(vec![
        PlateOp::shift_x(delta1)?,
        PlateOp::coin(std::f64::consts::FRAC_PI_4)?,
        PlateOp::shift_x(delta2)?,
    ])
}

fn hom_inputs<T: Real>() -> (InitialStateSpec<T>, InitialStateSpec<T>) {
    let (plus, minus) = HOM_SITES;
    let [u0, u1] = CoinState::Up.amplitudes::<T>();
    let [d0, d1] = CoinState::Down.amplitudes::<T>();
    (
        InitialStateSpec {
            site: plus,
            up: d0,
            down: d1,
        },
        InitialStateSpec {
            site: minus,
            up: u0,
            down: u1,
        },
    )
}

/// Simulated bunching probability of the HOM configuration: photons
/// `R = Down` at `(1, 0)` and `L = Up` at `(−1, 0)`, fully
/// indistinguishable, bunching counted at their input sites.
pub fn hom_bunching<T: Real>(delta1: f64, delta2: f64) -> Result<T> {
    let protocol = hom_protocol(delta1, delta2)?;
    let (a, b) = hom_inputs::<T>();
    let run = run_two_photon(
        &protocol,
        1,
        &a,
        &b,
        IndistinguishabilityModel::indistinguishable(),
    )?;
    bunching_probability(&run.positions, HOM_SITES.0, HOM_SITES.1)
}

/// Bunching probability over a grid, `result[i][j]` at
/// `(delta1[i], delta2[j])`.
pub fn hom_surface<T: Real>(delta1: &[f64], delta2: &[f64]) -> Result<Vec<Vec<T>>> {
    delta1
        .par_iter()
        .map(|&d1| delta2.iter().map(|&d2| hom_bunching(d1, d2)).collect())
        .collect()
}

/// Closed-form bunching probability
/// `(cos(δ1/2) cos(δ2/2) sin(δ1/2) sin(δ2/2))² + (sin(δ1/2) sin(δ2/2))²`.
pub fn hom_closed_form<T: Real>(delta1: T, delta2: T) -> T {
    let half = T::lit(0.5);
    let (s1, c1) = (delta1 * half).sin_cos();
    let (s2, c2) = (delta2 * half).sin_cos();
    (c1 * c2 * s1 * s2).powi(2) + (s1 * s2).powi(2)
}

/// HOM peak versus delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomScanResult<T: Real> {
    pub delays: Vec<T>,
    /// Overlap `c0(τ)` at each delay.
    pub overlaps: Vec<T>,
    /// Bunched coincidence rate relative to the large-delay baseline.
    pub rates: Vec<T>,
    pub visibility: T,
}

/// Scans the delay between the HOM photons.
///
/// The photon overlap falls off as `c0(τ) = c0_max · exp(−τ² / 2σ²)`.
/// The rate at each delay is the probability that both photons leave the
/// balanced beamsplitter through the output at `(1, 0)`, taken from the
/// simulated pair weights of the `δ1 = δ2 = π` configuration. Visibility is
/// `(rate(0) − baseline) / baseline` with the baseline at `c0 = 0`.
pub fn hom_scan<T: Real>(delays: &[T], sigma: T, c0_max: T) -> Result<HomScanResult<T>> {
    if sigma <= T::zero() || !sigma.is_finite() {
        return Err(WalkError::InvalidParameter(format!(
            "coherence sigma must be positive, got {sigma}"
        )));
    }
    IndistinguishabilityModel::new(c0_max)?;
    let pi = std::f64::consts::PI;
    let protocol = hom_protocol(pi, pi)?;
    let (a, b) = hom_inputs::<T>();
    let extent = auto_extent(&protocol, 1, &[a.site, b.site])?;
    let pa = evolve(&localized_state(&a, extent)?, &protocol, 1)?;
    let pb = evolve(&localized_state(&b, extent)?, &protocol, 1)?;
    let terms = pair_terms(&pa, &pb)?;
    let z = terms.bosonic_total();
    let out = HOM_SITES.0;
    let mut ind = T::zero();
    let mut dis = T::zero();
    for c1 in CoinState::ALL {
        for c2 in CoinState::ALL {
            if c2.index() < c1.index() {
                continue;
            }
            let i = extent
                .mode_index(ModeIndex::new(out.m, out.n, c1))
                .expect("in extent");
            let j = extent
                .mode_index(ModeIndex::new(out.m, out.n, c2))
                .expect("in extent");
            let k = terms.index(i, j);
            ind += terms.ind[k] / z;
            dis += terms.dis[k];
        }
    }
    let rate = |c0: T| (c0 * ind + (T::one() - c0) * dis) / dis;
    let two_sigma_sq = T::lit(2.0) * sigma * sigma;
    let overlaps: Vec<T> = delays
        .iter()
        .map(|&tau| c0_max * (-(tau * tau) / two_sigma_sq).exp())
        .collect();
    let rates = overlaps.iter().map(|&c| rate(c)).collect();
    let baseline = rate(T::zero());
    let visibility = (rate(c0_max) - baseline) / baseline;
    Ok(HomScanResult {
        delays: delays.to_vec(),
        overlaps,
        rates,
        visibility,
    })
}
