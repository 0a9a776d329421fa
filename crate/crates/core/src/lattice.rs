//! Lattice sites, coin states and the linear mode layout.
//!
//! Modes are linearized with the coin index varying fastest, then `m`,
//! then `n`:
//!
//! ```text
//! index = coin + 2 * ((m - m_min) + width * (n - n_min))
//! ```

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

/// Internal two-level state of the walker.
///
/// `Up` is left-circular polarization, `Down` is right-circular.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoinState {
    Up,
    Down,
}

impl CoinState {
    pub const ALL: [CoinState; 2] = [CoinState::Up, CoinState::Down];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            CoinState::Up => 0,
            CoinState::Down => 1,
        }
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            CoinState::Up => CoinState::Down,
            CoinState::Down => CoinState::Up,
        }
    }

    /// Displacement picked up by a full shift: `Up` moves forward.
    #[inline]
    pub fn step(self) -> i32 {
        match self {
            CoinState::Up => 1,
            CoinState::Down => -1,
        }
    }
}

/// A lattice site `(m, n)`.
///
/// Sites order by `n` first and then `m`, which is the order sites appear
/// in the mode linearization and in every emitted table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub m: i32,
    pub n: i32,
}

impl Site {
    pub const fn new(m: i32, n: i32) -> Self {
        Self { m, n }
    }
}

impl Ord for Site {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.m).cmp(&(other.n, other.m))
    }
}

impl PartialOrd for Site {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

impl From<(i32, i32)> for Site {
    fn from((m, n): (i32, i32)) -> Self {
        Self { m, n }
    }
}

/// A single optical mode `|m, n, coin>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: i32,
    pub n: i32,
    pub coin: CoinState,
}

impl ModeIndex {
    pub const fn new(m: i32, n: i32, coin: CoinState) -> Self {
        Self { m, n, coin }
    }

    pub fn site(&self) -> Site {
        Site::new(self.m, self.n)
    }
}

/// Rectangular window of the infinite lattice, bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeExtent {
    pub m_min: i32,
    pub m_max: i32,
    pub n_min: i32,
    pub n_max: i32,
}

impl LatticeExtent {
    pub fn new(m_min: i32, m_max: i32, n_min: i32, n_max: i32) -> Result<Self> {
        let extent = Self {
            m_min,
            m_max,
            n_min,
            n_max,
        };
        extent.validate()?;
        Ok(extent)
    }

    /// Square extent `[-radius, radius]²`.
    pub fn square(radius: i32) -> Result<Self> {
        Self::new(-radius, radius, -radius, radius)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_min > self.m_max || self.n_min > self.n_max {
            return Err(WalkError::InvalidExtent(format!(
                "m in [{}, {}], n in [{}, {}]",
                self.m_min, self.m_max, self.n_min, self.n_max
            )));
        }
        let width = (self.m_max as i64 - self.m_min as i64 + 1) as u64;
        let height = (self.n_max as i64 - self.n_min as i64 + 1) as u64;
        let modes = width
            .checked_mul(height)
            .and_then(|s| s.checked_mul(2))
            .filter(|&n| usize::try_from(n).is_ok() && n <= i64::MAX as u64);
        if modes.is_none() {
            return Err(WalkError::InvalidExtent("mode count overflows".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn width(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    #[inline]
    pub fn height(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    #[inline]
    pub fn site_count(&self) -> usize {
        self.width() * self.height()
    }

    /// Total number of modes `N = 2 · sites`.
    #[inline]
    pub fn mode_count(&self) -> usize {
        2 * self.site_count()
    }

    #[inline]
    pub fn contains(&self, site: Site) -> bool {
        (self.m_min..=self.m_max).contains(&site.m) && (self.n_min..=self.n_max).contains(&site.n)
    }

    pub fn contains_extent(&self, other: &LatticeExtent) -> bool {
        self.m_min <= other.m_min
            && self.m_max >= other.m_max
            && self.n_min <= other.n_min
            && self.n_max >= other.n_max
    }

    /// Linear index of a site, `n` outer and `m` inner.
    #[inline]
    pub fn site_index(&self, site: Site) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        Some((site.m - self.m_min) as usize + self.width() * (site.n - self.n_min) as usize)
    }

    #[inline]
    pub fn site_at(&self, index: usize) -> Site {
        let w = self.width();
        Site::new(
            self.m_min + (index % w) as i32,
            self.n_min + (index / w) as i32,
        )
    }

    #[inline]
    pub fn mode_index(&self, mode: ModeIndex) -> Option<usize> {
        self.site_index(mode.site())
            .map(|s| 2 * s + mode.coin.index())
    }

    #[inline]
    pub fn mode_at(&self, index: usize) -> ModeIndex {
        let site = self.site_at(index / 2);
        let coin = if index.is_multiple_of(2) {
            CoinState::Up
        } else {
            CoinState::Down
        };
        ModeIndex::new(site.m, site.n, coin)
    }

    /// Sites in linearized order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.site_count()).map(move |i| self.site_at(i))
    }

    /// Smallest extent containing every site; `None` when empty.
    pub fn bounding<I: IntoIterator<Item = Site>>(sites: I) -> Option<Self> {
        sites.into_iter().fold(None, |acc, s| {
            Some(match acc {
                None => Self {
                    m_min: s.m,
                    m_max: s.m,
                    n_min: s.n,
                    n_max: s.n,
                },
                Some(e) => Self {
                    m_min: e.m_min.min(s.m),
                    m_max: e.m_max.max(s.m),
                    n_min: e.n_min.min(s.n),
                    n_max: e.n_max.max(s.n),
                },
            })
        })
    }

    /// Grows the extent by `pad_m` along `m` and `pad_n` along `n`.
    pub fn padded(&self, pad_m: i32, pad_n: i32) -> Self {
        Self {
            m_min: self.m_min - pad_m,
            m_max: self.m_max + pad_m,
            n_min: self.n_min - pad_n,
            n_max: self.n_max + pad_n,
        }
    }

    pub fn union(&self, other: &LatticeExtent) -> Self {
        Self {
            m_min: self.m_min.min(other.m_min),
            m_max: self.m_max.max(other.m_max),
            n_min: self.n_min.min(other.n_min),
            n_max: self.n_max.max(other.n_max),
        }
    }
}

/// Number of unordered pairs `{i, j}` (with `i == j` allowed) over `n` items.
#[inline]
pub(crate) fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of the unordered pair `{i, j}` in row-major upper-triangular
/// storage over `n` items.
#[inline]
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + b
}

/// Iterates `(i, j)` with `i <= j` in storage order.
pub(crate) fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}
