//! Gaussian-beam and ray-optics bookkeeping for the bench layout.
//!
//! Input beams pass a demagnifying telescope `f1, f2`, are collimated onto
//! the plate cascade by `f3`, and the lattice is imaged onto the fiber
//! array by `f4, f5, f6`. All lengths are in meters and all angles in
//! radians. The approximate far-field formulas are used throughout; when
//! their preconditions degrade a warning is logged and flagged in the
//! result instead of failing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::scalar::Real;

/// Fiber-array pitch the output spots must match.
pub const FIBER_PITCH: f64 = 250e-6;

/// Relative tolerance of the pitch-match check.
pub const PITCH_TOLERANCE: f64 = 0.05;

/// `z1 / f3` above which the collimation formula is flagged.
pub const RAYLEIGH_WARN_RATIO: f64 = 0.1;

/// `λ / Λ` at or above which the paraxial condition is reported failed.
pub const PARAXIAL_LIMIT: f64 = 1e-2;

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && !v.is_nan() {
        Ok(())
    } else {
        Err(WalkError::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn non_negative<T: Real>(name: &str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(WalkError::InvalidParameter(format!(
            "{name} must be non-negative, got {v}"
        )))
    }
}

/// Waist and wavelength of the input Gaussian beam.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec<T: Real> {
    pub waist: T,
    pub wavelength: T,
}

impl<T: Real> BeamSpec<T> {
    pub fn new(waist: T, wavelength: T) -> Result<Self> {
        positive("waist", waist)?;
        positive("wavelength", wavelength)?;
        Ok(Self { waist, wavelength })
    }

    /// 1 mm waist at 785 nm.
    pub fn catalog() -> Self {
        Self {
            waist: T::lit(1e-3),
            wavelength: T::lit(785e-9),
        }
    }
}

/// Focal lengths, input beam separation and grating period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutSpec<T: Real> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
    pub f4: T,
    pub f5: T,
    pub f6: T,
    /// Separation of the two input beams before the telescope.
    pub d0: T,
    /// Period `Λ` of the polarization gratings.
    pub grating_period: T,
}

impl<T: Real> LayoutSpec<T> {
    /// Bench values. The beam separation `d0 = 3.14 mm` is the value for
    /// which the input angle `d0 f2 / (f1 f3)` equals one lattice unit
    /// `λ / Λ = 1.57e-4 rad`; a separation of 3.14 cm would give ten
    /// lattice units.
    pub fn catalog() -> Self {
        Self {
            f1: T::lit(0.300),
            f2: T::lit(0.030),
            f3: T::lit(2.000),
            f4: T::lit(0.200),
            f5: T::lit(0.050),
            f6: T::lit(0.400),
            d0: T::lit(3.14e-3),
            grating_period: T::lit(5e-3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("f1", self.f1),
            ("f2", self.f2),
            ("f3", self.f3),
            ("f4", self.f4),
            ("f5", self.f5),
            ("f6", self.f6),
        ] {
            positive(name, f)?;
        }
        non_negative("d0", self.d0)?;
        positive("grating period", self.grating_period)
    }
}

/// `W1 = (f2/f1) W0`, `d1 = (f2/f1) d0`.
pub fn telescope<T: Real>(w0: T, d0: T, f1: T, f2: T) -> Result<(T, T)> {
    positive("f1", f1)?;
    positive("f2", f2)?;
    non_negative("W0", w0)?;
    non_negative("d0", d0)?;
    let scale = f2 / f1;
    Ok((w0 * scale, d0 * scale))
}

/// Far field behind the collimating lens.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Collimation<T: Real> {
    /// `W2 ≈ λ f3 / (π W1)`.
    pub w2: T,
    /// `θ2 = d1 / f3`.
    pub theta2: T,
    /// `z1 / f3` with `z1 = π W1² / λ`.
    pub rayleigh_ratio: T,
    /// The far-field approximation is questionable.
    pub warning: bool,
}

pub fn collimate<T: Real>(w1: T, d1: T, f3: T, wavelength: T) -> Result<Collimation<T>> {
    positive("W1", w1)?;
    positive("f3", f3)?;
    positive("wavelength", wavelength)?;
    non_negative("d1", d1)?;
    let pi = T::PI();
    let z1 = pi * w1 * w1 / wavelength;
    let rayleigh_ratio = z1 / f3;
    let warning = rayleigh_ratio > T::lit(RAYLEIGH_WARN_RATIO);
    if warning {
        log::warn!(
            "Rayleigh range {z1} m is not small against f3 = {f3} m; collimated waist is approximate"
        );
    }
    Ok(Collimation {
        w2: wavelength * f3 / (pi * w1),
        theta2: d1 / f3,
        rayleigh_ratio,
        warning,
    })
}

/// Lattice spacing in angle and transverse momentum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularUnit<T: Real> {
    /// `Δθ = λ / Λ`.
    pub delta_theta: T,
    /// `Δk⊥ = 2π / Λ`.
    pub delta_k_perp: T,
    /// `Δk⊥ / (2π/λ)`, equal to `Δθ`.
    pub paraxial_ratio: T,
    pub paraxial_ok: bool,
}

pub fn angular_unit<T: Real>(wavelength: T, grating_period: T) -> Result<AngularUnit<T>> {
    positive("wavelength", wavelength)?;
    positive("grating period", grating_period)?;
    let delta_theta = wavelength / grating_period;
    let delta_k_perp = T::TAU() / grating_period;
    let paraxial_ratio = delta_k_perp / (T::TAU() / wavelength);
    Ok(AngularUnit {
        delta_theta,
        delta_k_perp,
        paraxial_ratio,
        paraxial_ok: paraxial_ratio < T::lit(PARAXIAL_LIMIT),
    })
}

/// Spots on the fiber-array plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpots<T: Real> {
    /// `|d3| = Δθ f4 f6 / f5`, the pitch between neighbouring sites.
    pub d3: T,
    /// The imaging train inverts the lattice (`d3` carries a minus sign).
    pub inverted: bool,
    /// `W3 ≈ λ / (π W2) · f4 f6 / f5`.
    pub w3: T,
}

pub fn output_mapping<T: Real>(
    delta_theta: T,
    w2: T,
    f4: T,
    f5: T,
    f6: T,
    wavelength: T,
) -> Result<OutputSpots<T>> {
    positive("W2", w2)?;
    positive("f4", f4)?;
    positive("f5", f5)?;
    positive("f6", f6)?;
    positive("wavelength", wavelength)?;
    non_negative("angular unit", delta_theta)?;
    let mag = f4 * f6 / f5;
    let signed = -delta_theta * mag;
    Ok(OutputSpots {
        d3: signed.abs(),
        inverted: mag > T::zero(),
        w3: wavelength / (T::PI() * w2) * mag,
    })
}

/// `|d3|` within [`PITCH_TOLERANCE`] of the fiber pitch.
pub fn pitch_matches<T: Real>(d3: T) -> bool {
    let target = T::lit(FIBER_PITCH);
    ((d3.abs() - target) / target).abs() <= T::lit(PITCH_TOLERANCE)
}

/// Multiplicative transmission of the walk optics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBudget<T: Real> {
    pub per_plate_transmission: T,
    pub n_plates: u32,
    #[serde(default)]
    pub extra_factors: BTreeMap<String, T>,
}

impl<T: Real> LossBudget<T> {
    pub fn plates(per_plate_transmission: T, n_plates: u32) -> Self {
        Self {
            per_plate_transmission,
            n_plates,
            extra_factors: BTreeMap::new(),
        }
    }

    pub fn with_factor(mut self, name: &str, factor: T) -> Self {
        self.extra_factors.insert(name.to_string(), factor);
        self
    }
}

/// Overall efficiency and the factor of each stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport<T: Real> {
    pub overall: T,
    pub stages: Vec<(String, T)>,
}

fn unit_interval<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(WalkError::InvalidParameter(format!(
            "{name} must lie in (0, 1], got {v}"
        )))
    }
}

/// `per_plate^n_plates × Π extra_factors`.
pub fn loss_budget<T: Real>(budget: &LossBudget<T>) -> Result<LossReport<T>> {
    unit_interval("per-plate transmission", budget.per_plate_transmission)?;
    let plates = budget.per_plate_transmission.powi(budget.n_plates as i32);
    let mut stages = vec![(format!("plates x{}", budget.n_plates), plates)];
    let mut overall = plates;
    for (name, &f) in &budget.extra_factors {
        unit_interval(name, f)?;
        stages.push((name.clone(), f));
        overall *= f;
    }
    Ok(LossReport { overall, stages })
}

/// Every derived quantity of a layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport<T: Real> {
    pub w1: T,
    pub d1: T,
    pub collimation: Collimation<T>,
    pub angular: AngularUnit<T>,
    /// Input angle in lattice units, `θ2 / Δθ`.
    pub input_angle_units: T,
    pub spots: OutputSpots<T>,
    pub pitch_ok: bool,
}

/// Chains the telescope, collimation, lattice unit and output imaging.
pub fn geometry_report<T: Real>(
    layout: &LayoutSpec<T>,
    beam: &BeamSpec<T>,
) -> Result<GeometryReport<T>> {
    layout.validate()?;
    let (w1, d1) = telescope(beam.waist, layout.d0, layout.f1, layout.f2)?;
    let collimation = collimate(w1, d1, layout.f3, beam.wavelength)?;
    let angular = angular_unit(beam.wavelength, layout.grating_period)?;
    let spots = output_mapping(
        angular.delta_theta,
        collimation.w2,
        layout.f4,
        layout.f5,
        layout.f6,
        beam.wavelength,
    )?;
    Ok(GeometryReport {
        w1,
        d1,
        input_angle_units: collimation.theta2 / angular.delta_theta,
        collimation,
        angular,
        pitch_ok: pitch_matches(spots.d3),
        spots,
    })
}
