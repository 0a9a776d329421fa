//! Single-photon inputs and coin-traced position distributions.

use ndarray::Array1;
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{LatticeExtent, Site};
use crate::protocol::Protocol;
use crate::scalar::Real;
use crate::walk::{auto_extent, evolve, WalkState};

/// Polarization states used as coin inputs.
///
/// Circular states map directly onto the coin (`L` is `Up`, `R` is
/// `Down`). Linear states use `|H> = (|L> + |R>)/√2` and
/// `|V> = −i(|L> − |R>)/√2`, which gives
/// `|D> = ((1−i)|L> + (1+i)|R>)/2` and `|A> = ((1+i)|L> + (1−i)|R>)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    L,
    R,
    H,
    V,
    D,
    A,
}

impl Polarization {
    /// Coin amplitudes `(a_up, a_down)`.
    pub fn coin_amplitudes<T: Real>(self) -> (Complex<T>, Complex<T>) {
        let c = |re: f64, im: f64| Complex::new(T::lit(re), T::lit(im));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Polarization::L => (c(1.0, 0.0), c(0.0, 0.0)),
            Polarization::R => (c(0.0, 0.0), c(1.0, 0.0)),
            Polarization::H => (c(h, 0.0), c(h, 0.0)),
            Polarization::V => (c(0.0, -h), c(0.0, h)),
            Polarization::D => (c(0.5, -0.5), c(0.5, 0.5)),
            Polarization::A => (c(0.5, 0.5), c(0.5, -0.5)),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "L" | "l" | "up" | "Up" => Polarization::L,
            "R" | "r" | "down" | "Down" => Polarization::R,
            "H" | "h" => Polarization::H,
            "V" | "v" => Polarization::V,
            "D" | "d" => Polarization::D,
            "A" | "a" => Polarization::A,
            _ => return None,
        })
    }
}

/// A photon localized on one site with arbitrary coin amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSpec<T: Real> {
    pub site: Site,
    pub up: Complex<T>,
    pub down: Complex<T>,
}

fn check_coin_norm<T: Real>(up: Complex<T>, down: Complex<T>) -> Result<()> {
    let norm = up.norm_sqr() + down.norm_sqr();
    if !norm.is_finite() || (norm - T::one()).abs() > T::tol(1e-9) {
        return Err(WalkError::NotNormalized(norm.as_f64()));
    }
    Ok(())
}

impl<T: Real> InitialStateSpec<T> {
    pub fn new(site: Site, up: Complex<T>, down: Complex<T>) -> Result<Self> {
        check_coin_norm(up, down)?;
        Ok(Self { site, up, down })
    }

    pub fn polarized(site: Site, pol: Polarization) -> Self {
        let (up, down) = pol.coin_amplitudes();
        Self { site, up, down }
    }

    /// `cos(α/2)|1,0,Up> + i sin(α/2)|1,0,Down>`.
    pub fn from_alpha(alpha: T) -> Self {
        let half = alpha / T::lit(2.0);
        Self {
            site: Site::new(1, 0),
            up: Complex::new(half.cos(), T::zero()),
            down: Complex::new(T::zero(), half.sin()),
        }
    }
}

/// Places the photon described by `spec` on the given extent.
pub fn localized_state<T: Real>(
    spec: &InitialStateSpec<T>,
    extent: LatticeExtent,
) -> Result<WalkState<T>> {
    check_coin_norm(spec.up, spec.down)?;
    let s = extent
        .site_index(spec.site)
        .ok_or(WalkError::SiteOutOfExtent(spec.site))?;
    let mut amps = Array1::from_elem(extent.mode_count(), Complex::zero());
    amps[2 * s] = spec.up;
    amps[2 * s + 1] = spec.down;
    WalkState::new(extent, amps)
}

/// Probability of finding the walker on each site, coin traced out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution<T: Real> {
    extent: LatticeExtent,
    probabilities: Vec<T>,
}

impl<T: Real> PositionDistribution<T> {
    /// Builds a distribution from per-site values in linearized order.
    pub fn new(extent: LatticeExtent, probabilities: Vec<T>) -> Result<Self> {
        if probabilities.len() != extent.site_count() {
            return Err(WalkError::LengthMismatch {
                expected: extent.site_count(),
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

    pub fn extent(&self) -> &LatticeExtent {
        &self.extent
    }

    pub fn values(&self) -> &[T] {
        &self.probabilities
    }

    /// Probability at a site; zero outside the extent.
    pub fn get(&self, site: Site) -> T {
        self.extent
            .site_index(site)
            .map_or(T::zero(), |i| self.probabilities[i])
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().copied().sum()
    }

    /// `(site, p)` in `(n, m)` order.
    pub fn iter(&self) -> impl Iterator<Item = (Site, T)> + '_ {
        self.extent.sites().zip(self.probabilities.iter().copied())
    }

    /// Sites with probability above `threshold`.
    pub fn support(&self, threshold: T) -> Vec<Site> {
        self.iter()
            .filter(|(_, p)| *p > threshold)
            .map(|(s, _)| s)
            .collect()
    }
}

/// `P(r) = Σ_σ |<r,σ|ψ>|²`.
pub fn position_distribution<T: Real>(state: &WalkState<T>) -> PositionDistribution<T> {
    let amps = state.amplitudes();
    let probabilities = (0..state.extent().site_count())
        .map(|s| amps[2 * s].norm_sqr() + amps[2 * s + 1].norm_sqr())
        .collect();
    PositionDistribution {
        extent: *state.extent(),
        probabilities,
    }
}

/// Distributions after `0..=t_max` steps on the automatically sized extent.
pub fn step_series<T: Real>(
    spec: &InitialStateSpec<T>,
    protocol: &Protocol,
    t_max: usize,
) -> Result<Vec<PositionDistribution<T>>> {
    if protocol.is_empty() && t_max > 0 {
        return Err(WalkError::EmptyProtocol);
    }
    let extent = auto_extent(protocol, t_max, &[spec.site])?;
    let mut state = localized_state(spec, extent)?;
    let mut series = Vec::with_capacity(t_max + 1);
    series.push(position_distribution(&state));
    for step in 0..t_max {
        // Advance by exactly the plates of walk step `step`.
        let seg = Protocol::single_step(protocol.segment_for_step(step).to_vec())?;
        state = evolve(&state, &seg, 1)?;
        series.push(position_distribution(&state));
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn alpha_family() {
        let s0 = InitialStateSpec::<f64>::from_alpha(0.0);
        assert_eq!((s0.up, s0.down), (c(1.0, 0.0), c(0.0, 0.0)));
        let spi = InitialStateSpec::<f64>::from_alpha(PI);
        assert!((spi.up - c(0.0, 0.0)).norm() < 1e-15);
        assert!((spi.down - c(0.0, 1.0)).norm() < 1e-15);
        let half = InitialStateSpec::<f64>::from_alpha(PI / 2.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((half.up - c(h, 0.0)).norm() < 1e-15);
        assert!((half.down - c(0.0, h)).norm() < 1e-15);
        assert_eq!(half.site, Site::new(1, 0));
    }

    #[test]
    fn polarization_dictionary_is_consistent() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (hu, hd) = Polarization::H.coin_amplitudes::<f64>();
        let (vu, vd) = Polarization::V.coin_amplitudes::<f64>();
        for (pol, sign) in [(Polarization::D, 1.0), (Polarization::A, -1.0)] {
            let (u, d) = pol.coin_amplitudes::<f64>();
            assert!((u - (hu + vu * sign) * h).norm() < 1e-15);
            assert!((d - (hd + vd * sign) * h).norm() < 1e-15);
            assert!((u.norm_sqr() + d.norm_sqr() - 1.0).abs() < 1e-15);
        }
        // H and V are orthogonal.
        assert!((hu.conj() * vu + hd.conj() * vd).norm() < 1e-15);
    }

    #[test]
    fn localized_state_errors() {
        let e = LatticeExtent::square(1).unwrap();
        let far = InitialStateSpec::polarized(Site::new(2, 0), Polarization::H);
        assert!(matches!(
            localized_state::<f64>(&far, e),
            Err(WalkError::SiteOutOfExtent(_))
        ));
        let bad = InitialStateSpec {
            site: Site::new(0, 0),
            up: c(1.0, 0.0),
            down: c(0.1, 0.0),
        };
        assert!(matches!(
            localized_state(&bad, e),
            Err(WalkError::NotNormalized(_))
        ));
        assert!(InitialStateSpec::new(Site::new(0, 0), c(1.0, 0.0), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn delta_distribution() {
        let e = LatticeExtent::square(2).unwrap();
        let spec = InitialStateSpec::polarized(Site::new(1, 0), Polarization::D);
        let d = position_distribution(&localized_state::<f64>(&spec, e).unwrap());
        assert!((d.get(Site::new(1, 0)) - 1.0).abs() < 1e-15);
        assert_eq!(d.support(1e-15), vec![Site::new(1, 0)]);
    }

    #[test]
    fn zero_steps_series() {
        let spec = InitialStateSpec::polarized(Site::new(1, 0), Polarization::D);
        let s = step_series::<f64>(&spec, &Protocol::balanced(), 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].support(0.0), vec![Site::new(1, 0)]);
    }
}
