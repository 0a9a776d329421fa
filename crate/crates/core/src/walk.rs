//! Coin, translation and step operators of the 2D walk.
//!
//! Two interchangeable evaluation paths exist. [`coin_operator`],
//! [`shift_operator`] and [`compose_step`] build dense `N × N` matrices;
//! [`evolve`] pushes a state through the plates one at a time without ever
//! materializing a matrix. Both must agree to `1e-12`.
//!
//! Lattice edges are never wrapped. A translation that would carry more
//! than [`LEAK_TOLERANCE`] of amplitude off the extent is an
//! [`WalkError::ExtentOverflow`]. So that the dense matrices stay unitary,
//! the shifted branch of an edge mode is reflected back onto the mode
//! itself and the column is flagged; applying a flagged column to a
//! populated mode raises the same overflow error.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Result, WalkError};
use crate::lattice::{CoinState, LatticeExtent, ModeIndex, Site};
use crate::protocol::{Axis, PlateOp, Protocol};
use crate::scalar::{imag_unit, Real};

/// Amplitude magnitude below which a boundary crossing is ignored.
pub const LEAK_TOLERANCE: f64 = 1e-14;

/// `(cos x, sin x)` with exact values at multiples of `π/4`.
pub(crate) fn cos_sin(x: f64) -> (f64, f64) {
    let q = x / std::f64::consts::FRAC_PI_4;
    if q == q.round() && q.abs() <= 64.0 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        return match (q as i64).rem_euclid(8) {
            0 => (1.0, 0.0),
            1 => (h, h),
            2 => (0.0, 1.0),
            3 => (-h, h),
            4 => (-1.0, 0.0),
            5 => (-h, -h),
            6 => (0.0, -1.0),
            _ => (h, -h),
        };
    }
    (x.cos(), x.sin())
}

fn require_finite(angle: f64) -> Result<()> {
    if angle.is_finite() {
        Ok(())
    } else {
        Err(WalkError::NonFiniteAngle(angle))
    }
}

/// Single-photon pure state over the modes of an extent.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState<T: Real> {
    extent: LatticeExtent,
    amplitudes: Array1<Complex<T>>,
}

impl<T: Real> WalkState<T> {
    /// Wraps an amplitude vector; its squared norm must be one within
    /// `1e-10`.
    pub fn new(extent: LatticeExtent, amplitudes: Array1<Complex<T>>) -> Result<Self> {
        extent.validate()?;
        if amplitudes.len() != extent.mode_count() {
            return Err(WalkError::LengthMismatch {
                expected: extent.mode_count(),
                found: amplitudes.len(),
            });
        }
        let state = Self { extent, amplitudes };
        let norm = state.norm_sqr();
        if (norm - T::one()).abs() > T::tol(1e-10) || !norm.is_finite() {
            return Err(WalkError::NotNormalized(norm.as_f64()));
        }
        Ok(state)
    }

    /// The basis state `|mode>`.
    pub fn basis(extent: LatticeExtent, mode: ModeIndex) -> Result<Self> {
        let idx = extent
            .mode_index(mode)
            .ok_or(WalkError::SiteOutOfExtent(mode.site()))?;
        let mut amps = Array1::zeros(extent.mode_count());
        amps[idx] = Complex::one();
        Ok(Self {
            extent,
            amplitudes: amps,
        })
    }

    pub(crate) fn from_parts(extent: LatticeExtent, amplitudes: Array1<Complex<T>>) -> Self {
        debug_assert_eq!(amplitudes.len(), extent.mode_count());
        Self { extent, amplitudes }
    }

    pub fn extent(&self) -> &LatticeExtent {
        &self.extent
    }

    pub fn amplitudes(&self) -> &Array1<Complex<T>> {
        &self.amplitudes
    }

    pub fn amplitude(&self, mode: ModeIndex) -> Option<Complex<T>> {
        self.extent.mode_index(mode).map(|i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &WalkState<T>) -> Result<Complex<T>> {
        if self.extent != other.extent {
            return Err(WalkError::ExtentMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Copies the state into a larger extent.
    pub fn embed(&self, extent: LatticeExtent) -> Result<Self> {
        if !extent.contains_extent(&self.extent) {
            return Err(WalkError::ExtentMismatch);
        }
        let mut amps = Array1::zeros(extent.mode_count());
        for (i, a) in self.amplitudes.iter().enumerate() {
            let j = extent
                .mode_index(self.extent.mode_at(i))
                .expect("contained");
            amps[j] = *a;
        }
        Ok(Self::from_parts(extent, amps))
    }

    /// Sites carrying probability above `threshold`.
    pub fn support(&self, threshold: T) -> Vec<Site> {
        self.extent
            .sites()
            .enumerate()
            .filter(|(s, _)| {
                self.amplitudes[2 * s].norm_sqr() + self.amplitudes[2 * s + 1].norm_sqr()
                    > threshold
            })
            .map(|(_, site)| site)
            .collect()
    }
}

/// Dense evolution operator over the modes of an extent.
#[derive(Clone, Debug)]
pub struct StepUnitary<T: Real> {
    extent: LatticeExtent,
    matrix: Array2<Complex<T>>,
    /// Columns whose image leaves the extent.
    leaky: Vec<bool>,
}

impl<T: Real> StepUnitary<T> {
    pub fn identity(extent: LatticeExtent) -> Result<Self> {
        extent.validate()?;
        let n = extent.mode_count();
        Ok(Self {
            extent,
            matrix: Array2::eye(n),
            leaky: vec![false; n],
        })
    }

    pub fn extent(&self) -> &LatticeExtent {
        &self.extent
    }

    pub fn matrix(&self) -> &Array2<Complex<T>> {
        &self.matrix
    }

    /// Columns that would push amplitude across the lattice edge.
    pub fn leaky_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.leaky
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(i, _)| i)
    }

    /// `max |U†U − I|` over all entries.
    pub fn unitarity_defect(&self) -> T {
        let gram = self.matrix.t().mapv(|z| z.conj()).dot(&self.matrix);
        gram.indexed_iter()
            .map(|((i, j), z)| {
                let target = if i == j {
                    Complex::one()
                } else {
                    Complex::zero()
                };
                (z - target).norm()
            })
            .fold(T::zero(), T::max)
    }

    /// Operator that applies `self` first and then `next`.
    pub fn then(&self, next: &StepUnitary<T>) -> Result<StepUnitary<T>> {
        if self.extent != next.extent {
            return Err(WalkError::ExtentMismatch);
        }
        let eps = T::lit(LEAK_TOLERANCE);
        let leaky = (0..self.matrix.ncols())
            .map(|j| {
                self.leaky[j]
                    || self
                        .matrix
                        .column(j)
                        .iter()
                        .enumerate()
                        .any(|(i, z)| next.leaky[i] && z.norm() > eps)
            })
            .collect();
        Ok(StepUnitary {
            extent: self.extent,
            matrix: next.matrix.dot(&self.matrix),
            leaky,
        })
    }

    /// Applies the operator to a state on the same extent.
    pub fn apply(&self, state: &WalkState<T>) -> Result<WalkState<T>> {
        if state.extent != self.extent {
            return Err(WalkError::ExtentMismatch);
        }
        let eps = T::lit(LEAK_TOLERANCE);
        for (j, a) in state.amplitudes.iter().enumerate() {
            if self.leaky[j] && a.norm() > eps {
                let mode = self.extent.mode_at(j);
                return Err(WalkError::ExtentOverflow {
                    m: mode.m,
                    n: mode.n,
                    magnitude: a.norm().as_f64(),
                });
            }
        }
        Ok(WalkState::from_parts(
            self.extent,
            self.matrix.dot(&state.amplitudes),
        ))
    }

    /// `U^t`.
    pub fn power(&self, t: usize) -> Result<StepUnitary<T>> {
        let mut acc = StepUnitary::identity(self.extent)?;
        for _ in 0..t {
            acc = acc.then(self)?;
        }
        Ok(acc)
    }
}

/// Nonzero entries `(row, col, value)` of a plate and its leaky columns.
struct PlateEntries<T: Real> {
    entries: Vec<(usize, usize, Complex<T>)>,
    leaky: Vec<bool>,
}

impl<T: Real> PlateEntries<T> {
    fn dense(self, extent: LatticeExtent) -> StepUnitary<T> {
        let n = extent.mode_count();
        let mut matrix = Array2::zeros((n, n));
        for (i, j, v) in self.entries {
            matrix[[i, j]] += v;
        }
        StepUnitary {
            extent,
            matrix,
            leaky: self.leaky,
        }
    }
}

fn coin_entries<T: Real>(omega: f64, extent: &LatticeExtent) -> PlateEntries<T> {
    let (c, s) = cos_sin(omega);
    let diag = Complex::new(T::lit(c), T::zero());
    let off = Complex::new(T::zero(), T::lit(s));
    let mut entries = Vec::with_capacity(2 * extent.mode_count());
    for site in 0..extent.site_count() {
        let (u, d) = (2 * site, 2 * site + 1);
        entries.extend([(u, u, diag), (d, d, diag), (d, u, off), (u, d, off)]);
    }
    PlateEntries {
        entries,
        leaky: vec![false; extent.mode_count()],
    }
}

/// Target site of a full shift applied to `mode`.
fn shifted_site(mode: ModeIndex, axis: Axis) -> Site {
    let d = mode.coin.step();
    match axis {
        Axis::X => Site::new(mode.m + d, mode.n),
        Axis::Y => Site::new(mode.m, mode.n + d),
    }
}

fn shift_entries<T: Real>(axis: Axis, delta: f64, extent: &LatticeExtent) -> PlateEntries<T> {
    let (c, s) = cos_sin(delta / 2.0);
    let stay = Complex::new(T::lit(c), T::zero());
    let hop = Complex::new(T::zero(), T::lit(s));
    let n = extent.mode_count();
    let mut entries = Vec::with_capacity(2 * n);
    let mut leaky = vec![false; n];
    for (j, leak) in leaky.iter_mut().enumerate() {
        let mode = extent.mode_at(j);
        entries.push((j, j, stay));
        let target = shifted_site(mode, axis);
        match extent.mode_index(ModeIndex::new(target.m, target.n, mode.coin.flipped())) {
            Some(i) => entries.push((i, j, hop)),
            None => {
                entries.push((j, j, hop));
                *leak = s != 0.0;
            }
        }
    }
    PlateEntries { entries, leaky }
}

fn plate_entries<T: Real>(op: &PlateOp, extent: &LatticeExtent) -> Result<PlateEntries<T>> {
    require_finite(op.angle())?;
    extent.validate()?;
    Ok(match *op {
        PlateOp::Coin(w) => coin_entries(w, extent),
        PlateOp::ShiftX(d) => shift_entries(Axis::X, d, extent),
        PlateOp::ShiftY(d) => shift_entries(Axis::Y, d, extent),
    })
}

/// Coin rotation `C(ω) = I ⊗ [[cos ω, i sin ω], [i sin ω, cos ω]]` on the
/// `(Up, Down)` basis.
pub fn coin_operator<T: Real>(omega: f64, extent: LatticeExtent) -> Result<StepUnitary<T>> {
    Ok(plate_entries(&PlateOp::Coin(omega), &extent)?.dense(extent))
}

/// Translation `T_d(δ) = cos(δ/2) I + i sin(δ/2) S_d`.
///
/// `S_d` sends `|r, Up>` to `|r + e_d, Down>` and `|r, Down>` to
/// `|r − e_d, Up>`.
pub fn shift_operator<T: Real>(
    axis: Axis,
    delta: f64,
    extent: LatticeExtent,
) -> Result<StepUnitary<T>> {
    let op = match axis {
        Axis::X => PlateOp::ShiftX(delta),
        Axis::Y => PlateOp::ShiftY(delta),
    };
    Ok(plate_entries(&op, &extent)?.dense(extent))
}

/// Dense matrix of a single plate.
pub fn plate_operator<T: Real>(op: &PlateOp, extent: LatticeExtent) -> Result<StepUnitary<T>> {
    Ok(plate_entries(op, &extent)?.dense(extent))
}

impl<T: Real> StepUnitary<T> {
    /// `P · self` for a plate `P`, using only the plate's nonzero entries.
    fn then_plate(&self, op: &PlateOp) -> Result<StepUnitary<T>> {
        let plate = plate_entries::<T>(op, &self.extent)?;
        let eps = T::lit(LEAK_TOLERANCE);
        let leaky = (0..self.matrix.ncols())
            .map(|j| {
                self.leaky[j]
                    || self
                        .matrix
                        .column(j)
                        .iter()
                        .enumerate()
                        .any(|(i, z)| plate.leaky[i] && z.norm() > eps)
            })
            .collect();
        let mut matrix = Array2::zeros(self.matrix.raw_dim());
        for &(i, j, v) in &plate.entries {
            let src = self.matrix.row(j);
            matrix
                .row_mut(i)
                .zip_mut_with(&src, |o: &mut Complex<T>, &a| *o += v * a);
        }
        Ok(StepUnitary {
            extent: self.extent,
            matrix,
            leaky,
        })
    }
}

fn compose_plates<T: Real>(acc: StepUnitary<T>, plates: &[PlateOp]) -> Result<StepUnitary<T>> {
    plates.iter().try_fold(acc, |acc, op| acc.then_plate(op))
}

/// Product of every plate of the protocol, first plate rightmost.
pub fn compose_step<T: Real>(protocol: &Protocol, extent: LatticeExtent) -> Result<StepUnitary<T>> {
    if protocol.is_empty() {
        return Err(WalkError::EmptyProtocol);
    }
    compose_plates(StepUnitary::identity(extent)?, protocol.plates())
}

/// Dense operator of `steps` walk steps, cycling through the protocol's
/// step segments.
pub fn evolution_operator<T: Real>(
    protocol: &Protocol,
    extent: LatticeExtent,
    steps: usize,
) -> Result<StepUnitary<T>> {
    if steps == 0 {
        return StepUnitary::identity(extent);
    }
    if protocol.is_empty() {
        return Err(WalkError::EmptyProtocol);
    }
    let mut acc = StepUnitary::identity(extent)?;
    for step in 0..steps {
        acc = compose_plates(acc, protocol.segment_for_step(step))?;
    }
    Ok(acc)
}

/// Applies one plate directly to an amplitude vector.
pub(crate) fn apply_plate<T: Real>(
    amps: &Array1<Complex<T>>,
    op: &PlateOp,
    extent: &LatticeExtent,
) -> Result<Array1<Complex<T>>> {
    let mut out = Array1::zeros(amps.len());
    match *op {
        PlateOp::Coin(w) => {
            let (c, s) = cos_sin(w);
            let c = T::lit(c);
            let off = imag_unit::<T>() * T::lit(s);
            for site in 0..extent.site_count() {
                let (u, d) = (amps[2 * site], amps[2 * site + 1]);
                out[2 * site] = u * c + d * off;
                out[2 * site + 1] = u * off + d * c;
            }
        }
        PlateOp::ShiftX(delta) | PlateOp::ShiftY(delta) => {
            let axis = op.axis().expect("shift plate");
            let (c, s) = cos_sin(delta / 2.0);
            let c = T::lit(c);
            let hop = imag_unit::<T>() * T::lit(s);
            let eps = T::lit(LEAK_TOLERANCE);
            for (j, &a) in amps.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                out[j] += a * c;
                let moved = a * hop;
                let mode = extent.mode_at(j);
                let target = shifted_site(mode, axis);
                match extent.mode_index(ModeIndex::new(target.m, target.n, mode.coin.flipped())) {
                    Some(i) => out[i] += moved,
                    None if moved.norm() > eps => {
                        return Err(WalkError::ExtentOverflow {
                            m: mode.m,
                            n: mode.n,
                            magnitude: moved.norm().as_f64(),
                        })
                    }
                    None => out[j] += moved,
                }
            }
        }
    }
    Ok(out)
}

/// Applies `steps` walk steps to a state, plate by plate.
pub fn evolve<T: Real>(
    state: &WalkState<T>,
    protocol: &Protocol,
    steps: usize,
) -> Result<WalkState<T>> {
    if steps == 0 {
        return Ok(state.clone());
    }
    if protocol.is_empty() {
        return Err(WalkError::EmptyProtocol);
    }
    let mut amps = state.amplitudes.clone();
    for step in 0..steps {
        for op in protocol.segment_for_step(step) {
            amps = apply_plate(&amps, op, &state.extent)?;
        }
    }
    let out = WalkState::from_parts(state.extent, amps);
    debug_assert!((out.norm_sqr() - state.norm_sqr()).abs() < T::tol(1e-10));
    Ok(out)
}

/// Smallest extent that keeps every amplitude away from the edge: the
/// bounding box of the inputs padded by the number of translation plates
/// met along each axis.
pub fn auto_extent(protocol: &Protocol, steps: usize, inputs: &[Site]) -> Result<LatticeExtent> {
    let bbox = LatticeExtent::bounding(inputs.iter().copied()).ok_or(WalkError::NoInputSites)?;
    let (px, py) = protocol.shift_counts(steps);
    let extent = bbox.padded(px as i32, py as i32);
    extent.validate()?;
    Ok(extent)
}

/// Probability of each coin value at a site.
pub fn coin_weights<T: Real>(state: &WalkState<T>, site: Site) -> Option<[T; 2]> {
    let i = state.extent.site_index(site)?;
    Some([
        state.amplitudes[2 * i].norm_sqr(),
        state.amplitudes[2 * i + 1].norm_sqr(),
    ])
}

impl CoinState {
    /// Basis amplitudes `(Up, Down)` of this coin value.
    pub fn amplitudes<T: Real>(self) -> [Complex<T>; 2] {
        match self {
            CoinState::Up => [Complex::one(), Complex::zero()],
            CoinState::Down => [Complex::zero(), Complex::one()],
        }
    }
}
