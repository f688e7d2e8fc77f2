//! Synthetic state families and the numeric domain-compliance check.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Representation};
use crate::state::WaveFunction;

/// Description of a synthetic momentum-space state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `exp(-|p - p0|²/(2σ²))`, so `|f|²` has per-axis standard deviation `σ/√2`.
    Gaussian {
        p0: [f64; 3],
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Radial shell `exp(-a/(1-u²))`, `u = (2|p| - r_in - r_out)/(r_out - r_in)`,
    /// identically zero for `|p| ≤ r_in` and `|p| ≥ r_out`.
    AnnularBump {
        r_in: f64,
        r_out: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        /// The constant `a` above; defaults to 1.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steepness: Option<f64>,
    },
}

impl StateSpec {
    pub fn gaussian(p0: [f64; 3], sigma: f64) -> StateSpec {
        StateSpec::Gaussian { p0, sigma, seed: None }
    }

    pub fn annular_bump(r_in: f64, r_out: f64) -> StateSpec {
        StateSpec::AnnularBump { r_in, r_out, seed: None, steepness: None }
    }

    pub fn with_seed(mut self, s: u64) -> StateSpec {
        match &mut self {
            StateSpec::Gaussian { seed, .. } | StateSpec::AnnularBump { seed, .. } => *seed = Some(s),
        }
        self
    }

    pub fn with_steepness(mut self, a: f64) -> StateSpec {
        if let StateSpec::AnnularBump { steepness, .. } = &mut self {
            *steepness = Some(a);
        }
        self
    }

    fn seed(&self) -> Option<u64> {
        match self {
            StateSpec::Gaussian { seed, .. } | StateSpec::AnnularBump { seed, .. } => *seed,
        }
    }

    /// Unnormalized profile at momentum `p`.
    fn profile(&self, p: [f64; 3]) -> f64 {
        match *self {
            StateSpec::Gaussian { p0, sigma, .. } => {
                let d2: f64 = (0..3).map(|k| (p[k] - p0[k]).powi(2)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            StateSpec::AnnularBump { r_in, r_out, steepness, .. } => {
                let r = norm3(p);
                if r <= r_in || r >= r_out {
                    return 0.0;
                }
                let u = (2.0 * r - r_in - r_out) / (r_out - r_in);
                let d = 1.0 - u * u;
                if d <= 0.0 {
                    0.0
                } else {
                    (-steepness.unwrap_or(1.0) / d).exp()
                }
            }
        }
    }

    fn validate(&self, grid: &GridSpec) -> Result<()> {
        match *self {
            StateSpec::Gaussian { p0, sigma, .. } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidState(format!("sigma must be positive, got {sigma}")));
                }
                if p0.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidState("non-finite p0".into()));
                }
                let reach = p0.iter().map(|c| c.abs()).fold(0.0, f64::max) + 5.0 * sigma;
                if reach > grid.max_momentum() {
                    return Err(Error::InvalidState(format!(
                        "gaussian support (|p0| + 5σ = {reach:.4}) exceeds the momentum lattice ({:.4})",
                        grid.max_momentum()
                    )));
                }
            }
            StateSpec::AnnularBump { r_in, r_out, steepness, .. } => {
                if !(r_in >= 0.0 && r_out > r_in && r_out.is_finite()) {
                    return Err(Error::InvalidState(format!(
                        "annular bump needs 0 <= r_in < r_out, got ({r_in}, {r_out})"
                    )));
                }
                if let Some(a) = steepness {
                    if !(a.is_finite() && a > 0.0) {
                        return Err(Error::InvalidState(format!("steepness must be positive, got {a}")));
                    }
                }
                if r_out > grid.nyquist() * (1.0 + 1e-12) {
                    return Err(Error::InvalidState(format!(
                        "annular bump r_out = {r_out} exceeds the momentum lattice ({:.4})",
                        grid.nyquist()
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Gaussian { p0, sigma, seed } => {
                write!(f, "gaussian(p0=[{},{},{}],sigma={}", p0[0], p0[1], p0[2], sigma)?;
                if let Some(s) = seed {
                    write!(f, ",seed={s}")?;
                }
                write!(f, ")")
            }
            StateSpec::AnnularBump { r_in, r_out, seed, steepness } => {
                write!(f, "annular_bump(r_in={r_in},r_out={r_out}")?;
                if let Some(a) = steepness {
                    write!(f, ",steepness={a}")?;
                }
                if let Some(s) = seed {
                    write!(f, ",seed={s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Smooth phase depending only on the direction of `p`: a random quadratic
/// form in the unit vector `p/|p|`.
#[derive(Debug, Clone)]
struct DirectionalPhase {
    linear: [f64; 3],
    quadratic: [[f64; 3]; 3],
}

impl DirectionalPhase {
    fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut linear = [0.0; 3];
        let mut quadratic = [[0.0; 3]; 3];
        for c in linear.iter_mut() {
            *c = rng.gen_range(-0.3..0.3);
        }
        for k in 0..3 {
            for l in k..3 {
                quadratic[k][l] = rng.gen_range(-0.3..0.3);
            }
        }
        DirectionalPhase { linear, quadratic }
    }

    fn at(&self, p: [f64; 3]) -> f64 {
        let r = norm3(p);
        if r == 0.0 {
            return 0.0;
        }
        let u = [p[0] / r, p[1] / r, p[2] / r];
        let mut phi = 0.0;
        for k in 0..3 {
            phi += self.linear[k] * u[k];
            for l in k..3 {
                phi += self.quadratic[k][l] * u[k] * u[l];
            }
        }
        phi
    }
}

/// Normalized momentum-representation state for `spec` on `grid`.
pub fn synthesize_state(grid: &GridSpec, spec: &StateSpec) -> Result<WaveFunction> {
    grid.validate()?;
    spec.validate(grid)?;
    let phase = spec.seed().map(DirectionalPhase::from_seed);
    let f = WaveFunction::from_fn(*grid, Representation::Momentum, |p| {
        let a = spec.profile(p);
        match &phase {
            Some(ph) if a != 0.0 => Complex64::from_polar(a, ph.at(p)),
            _ => Complex64::new(a, 0.0),
        }
    })?;
    if f.norm_sqr() == 0.0 {
        return Err(Error::InvalidState(format!("{spec} has no support on the lattice")));
    }
    f.normalized()
}

/// Outcome of [`domain_compliance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    /// Probability with `|p| < p_min`.
    pub mass_near_zero: f64,
    /// Larger of the position-edge and momentum-edge probabilities.
    pub mass_at_edges: f64,
    pub compliant: bool,
}

/// Probability carried by the outer two-cell shell of the lattice.
fn edge_mass(f: &WaveFunction) -> f64 {
    let g = f.grid();
    let n = g.n;
    let at_edge = |i: usize| i < 2 || i >= n - 2;
    let vol = f.cell_volume();
    f.envelope()
        .iter()
        .enumerate()
        .filter(|(idx, _)| g.unflat(*idx).iter().any(|&i| at_edge(i)))
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * vol
}

/// Numeric surrogate for membership in the operator domain: negligible mass
/// near `p = 0` and at the edges of both lattices.
///
/// For freely evolved states the position-edge mass is that of the stored
/// envelope, which is what the lattice actually has to resolve.
pub fn domain_compliance(f: &WaveFunction, p_min: f64, edge_tol: f64) -> ComplianceReport {
    let norm2 = f.norm_sqr().max(f64::MIN_POSITIVE);
    let mom = f.envelope_transform(Representation::Momentum);
    let pos = f.envelope_transform(Representation::Position);
    let g = f.grid();
    let mass_near_zero = mom
        .envelope()
        .iter()
        .enumerate()
        .filter(|(idx, _)| norm3(g.momentum_vector(*idx)) < p_min)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * mom.cell_volume()
        / norm2;
    let mass_at_edges = edge_mass(&mom).max(edge_mass(&pos)) / norm2;
    ComplianceReport {
        mass_near_zero,
        mass_at_edges,
        compliant: mass_near_zero < edge_tol && mass_at_edges < edge_tol,
    }
}
