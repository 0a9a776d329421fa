//! Plate sequences: the walk program.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::scalar::canonical_angle;

/// Translation axis of a polarization grating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// One optical element of the cascade.
///
/// Angles are stored reduced to `[0, 2π)`; use the checked constructors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlateOp {
    /// Coin rotation `C(ω)`.
    Coin(f64),
    /// Polarization-dependent translation `T_x(δ)`.
    ShiftX(f64),
    /// Polarization-dependent translation `T_y(δ)`.
    ShiftY(f64),
}

fn checked(angle: f64) -> Result<f64> {
    if angle.is_finite() {
        Ok(canonical_angle(angle))
    } else {
        Err(WalkError::NonFiniteAngle(angle))
    }
}

impl PlateOp {
    pub fn coin(omega: f64) -> Result<Self> {
        checked(omega).map(PlateOp::Coin)
    }

    pub fn shift(axis: Axis, delta: f64) -> Result<Self> {
        let delta = checked(delta)?;
        Ok(match axis {
            Axis::X => PlateOp::ShiftX(delta),
            Axis::Y => PlateOp::ShiftY(delta),
        })
    }

    pub fn shift_x(delta: f64) -> Result<Self> {
        Self::shift(Axis::X, delta)
    }

    pub fn shift_y(delta: f64) -> Result<Self> {
        Self::shift(Axis::Y, delta)
    }

    pub fn angle(&self) -> f64 {
        match *self {
            PlateOp::Coin(a) | PlateOp::ShiftX(a) | PlateOp::ShiftY(a) => a,
        }
    }

    pub fn axis(&self) -> Option<Axis> {
        match self {
            PlateOp::Coin(_) => None,
            PlateOp::ShiftX(_) => Some(Axis::X),
            PlateOp::ShiftY(_) => Some(Axis::Y),
        }
    }

    /// Keyword used by the protocol language.
    pub fn keyword(&self) -> &'static str {
        match self {
            PlateOp::Coin(_) => "C",
            PlateOp::ShiftX(_) => "TX",
            PlateOp::ShiftY(_) => "TY",
        }
    }
}

/// An ordered plate sequence split into time steps.
///
/// Plates are listed in the order light meets them, so the first plate is
/// the rightmost factor of the step unitary. `step_boundaries` holds the
/// exclusive end index of every step; it is strictly increasing and its
/// last entry equals the plate count. A protocol without explicit step
/// markers is one step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    plates: Vec<PlateOp>,
    step_boundaries: Vec<usize>,
}

impl Protocol {
    pub fn new(plates: Vec<PlateOp>, step_boundaries: Vec<usize>) -> Result<Self> {
        for op in &plates {
            if !op.angle().is_finite() {
                return Err(WalkError::NonFiniteAngle(op.angle()));
            }
        }
        let plates: Vec<PlateOp> = plates
            .into_iter()
            .map(|op| match op {
                PlateOp::Coin(a) => PlateOp::Coin(canonical_angle(a)),
                PlateOp::ShiftX(a) => PlateOp::ShiftX(canonical_angle(a)),
                PlateOp::ShiftY(a) => PlateOp::ShiftY(canonical_angle(a)),
            })
            .collect();
        if plates.is_empty() {
            if !step_boundaries.is_empty() {
                return Err(WalkError::InvalidSteps(
                    "empty protocol cannot have steps".into(),
                ));
            }
            return Ok(Self::default());
        }
        if step_boundaries.is_empty() {
            let len = plates.len();
            return Ok(Self {
                plates,
                step_boundaries: vec![len],
            });
        }
        let mut prev = 0;
        for &b in &step_boundaries {
            if b <= prev {
                return Err(WalkError::InvalidSteps(format!(
                    "boundary {b} does not follow {prev}"
                )));
            }
            prev = b;
        }
        if prev != plates.len() {
            return Err(WalkError::InvalidSteps(format!(
                "last boundary {prev} does not end the {} plates",
                plates.len()
            )));
        }
        Ok(Self {
            plates,
            step_boundaries,
        })
    }

    /// All plates as one step.
    pub fn single_step(plates: Vec<PlateOp>) -> Result<Self> {
        Self::new(plates, Vec::new())
    }

    /// `U = T_y(π) C(π/4) T_x(π) C(π/4)`.
    pub fn balanced() -> Self {
        Self::single_step(vec![
            PlateOp::Coin(PI / 4.0),
            PlateOp::ShiftX(PI),
            PlateOp::Coin(PI / 4.0),
            PlateOp::ShiftY(PI),
        ])
        .expect("valid")
    }

    pub fn plates(&self) -> &[PlateOp] {
        &self.plates
    }

    pub fn step_boundaries(&self) -> &[usize] {
        &self.step_boundaries
    }

    pub fn is_empty(&self) -> bool {
        self.plates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.plates.len()
    }

    /// Number of steps the protocol is divided into.
    pub fn step_count(&self) -> usize {
        self.step_boundaries.len()
    }

    /// Plates of each step, in order.
    pub fn segments(&self) -> impl Iterator<Item = &[PlateOp]> + '_ {
        let starts = std::iter::once(0).chain(self.step_boundaries.iter().copied());
        starts
            .zip(self.step_boundaries.iter().copied())
            .map(move |(a, b)| &self.plates[a..b])
    }

    /// Plates applied during walk step `step` (zero based). Steps cycle
    /// through the segments, so a one-step protocol repeats itself.
    pub fn segment_for_step(&self, step: usize) -> &[PlateOp] {
        let k = self.step_count();
        let i = step % k;
        let start = if i == 0 {
            0
        } else {
            self.step_boundaries[i - 1]
        };
        &self.plates[start..self.step_boundaries[i]]
    }

    /// Concatenation: `self` followed by `other`.
    pub fn then(&self, other: &Protocol) -> Protocol {
        let offset = self.plates.len();
        let mut plates = self.plates.clone();
        plates.extend_from_slice(&other.plates);
        let mut bounds = self.step_boundaries.clone();
        bounds.extend(other.step_boundaries.iter().map(|b| b + offset));
        Protocol {
            plates,
            step_boundaries: bounds,
        }
    }

    /// Number of `(x, y)` translation plates met during the first `steps`
    /// walk steps.
    pub fn shift_counts(&self, steps: usize) -> (usize, usize) {
        if self.is_empty() {
            return (0, 0);
        }
        let mut counts = (0, 0);
        for step in 0..steps {
            for op in self.segment_for_step(step) {
                match op {
                    PlateOp::ShiftX(_) => counts.0 += 1,
                    PlateOp::ShiftY(_) => counts.1 += 1,
                    PlateOp::Coin(_) => {}
                }
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(PlateOp::coin(f64::NAN).is_err());
        assert!(PlateOp::shift_x(f64::INFINITY).is_err());
        assert_eq!(PlateOp::shift_y(3.0 * PI).unwrap(), PlateOp::ShiftY(PI));
    }

    #[test]
    fn boundaries_default_to_one_step() {
        let p = Protocol::balanced();
        assert_eq!(p.step_boundaries(), &[4]);
        assert_eq!(p.step_count(), 1);
        assert_eq!(p.segment_for_step(5).len(), 4);
    }

    #[test]
    fn boundaries_must_increase_and_close() {
        let plates = Protocol::balanced().plates().to_vec();
        assert!(Protocol::new(plates.clone(), vec![2, 2, 4]).is_err());
        assert!(Protocol::new(plates.clone(), vec![2, 3]).is_err());
        assert!(Protocol::new(plates.clone(), vec![0, 4]).is_err());
        let p = Protocol::new(plates, vec![2, 4]).unwrap();
        let segs: Vec<_> = p.segments().map(|s| s.len()).collect();
        assert_eq!(segs, vec![2, 2]);
        assert!(Protocol::new(vec![], vec![1]).is_err());
    }

    #[test]
    fn concatenation_keeps_steps() {
        let b = Protocol::balanced();
        let bb = b.then(&b);
        assert_eq!(bb.len(), 8);
        assert_eq!(bb.step_boundaries(), &[4, 8]);
        assert_eq!(bb.shift_counts(2), (2, 2));
        assert_eq!(b.shift_counts(3), (3, 3));
    }
}
