use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Cartesian axis of R³, stored zero-based and displayed one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axis(u8);

impl Axis {
    pub const X: Axis = Axis(0);
    pub const Y: Axis = Axis(1);
    pub const Z: Axis = Axis(2);
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// One-based constructor matching the usual `j = 1, 2, 3` labelling.
    pub fn new(j: usize) -> Result<Axis> {
        match j {
            1..=3 => Ok(Axis((j - 1) as u8)),
            _ => Err(Error::InvalidAxis(j)),
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Which lattice a wavefunction's amplitudes live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

impl Representation {
    pub fn other(self) -> Representation {
        match self {
            Representation::Position => Representation::Momentum,
            Representation::Momentum => Representation::Position,
        }
    }
}

/// Uniform cubic discretization of R³ with centered position and momentum
/// lattices.
///
/// Positions are `x_k = -L/2 + k·Δx` with `Δx = L/n`; momenta are
/// `p_k = (k - n/2)·Δp` with `Δp = 2πħ/L`, so `p = 0` is a lattice point and
/// `Δx·Δp·n = 2πħ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub box_length: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl GridSpec {
    pub fn new(n: usize, box_length: f64, hbar: f64) -> Result<GridSpec> {
        let grid = GridSpec { n, box_length, hbar };
        grid.validate()?;
        Ok(grid)
    }

    /// The reference grid used by the shipped configuration.
    pub fn reference() -> GridSpec {
        GridSpec { n: 96, box_length: 48.0, hbar: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n must be even, got odd n = {}", self.n)));
        }
        if self.n < 8 {
            return Err(Error::InvalidGrid(format!("n must be at least 8, got {}", self.n)));
        }
        if !(self.box_length.is_finite() && self.box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {}",
                self.box_length
            )));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidGrid(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.box_length
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn position(&self, k: usize) -> f64 {
        -0.5 * self.box_length + k as f64 * self.dx()
    }

    pub fn momentum(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dp()
    }

    /// Magnitude of the most negative lattice momentum, `n·Δp/2`.
    pub fn nyquist(&self) -> f64 {
        0.5 * self.n as f64 * self.dp()
    }

    /// Largest momentum reachable along the positive direction of an axis.
    pub fn max_momentum(&self) -> f64 {
        (self.n / 2 - 1) as f64 * self.dp()
    }

    pub fn cell_volume(&self, rep: Representation) -> f64 {
        let h = match rep {
            Representation::Position => self.dx(),
            Representation::Momentum => self.dp(),
        };
        h * h * h
    }

    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn unflat(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Flat index of the lattice origin `p = 0` (or `x = 0`).
    pub fn origin_index(&self) -> usize {
        let h = self.n / 2;
        self.flat(h, h, h)
    }

    pub fn momentum_vector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unflat(idx);
        [self.momentum(i), self.momentum(j), self.momentum(k)]
    }

    pub fn position_vector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unflat(idx);
        [self.position(i), self.position(j), self.position(k)]
    }

    pub fn coordinate(&self, rep: Representation, k: usize) -> f64 {
        match rep {
            Representation::Position => self.position(k),
            Representation::Momentum => self.momentum(k),
        }
    }

    /// Same lattice spacing, but with the box (and momentum spacing) rescaled
    /// so that the momentum lattice is unchanged under a new ħ.
    pub fn with_hbar_same_momenta(&self, hbar: f64) -> Result<GridSpec> {
        GridSpec::new(self.n, self.box_length * hbar / self.hbar, hbar)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} L={} hbar={}", self.n, self.box_length, self.hbar)
    }
}
