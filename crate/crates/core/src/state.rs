//! Wavefunctions on the discretized R³ and the unitary position↔momentum
//! transform.

use std::borrow::Cow;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{dft3, half_shift};
use crate::grid::{GridSpec, Representation};

/// A complex amplitude field on a [`GridSpec`] lattice.
///
/// Amplitudes are samples of the continuum wavefunction, so norms and inner
/// products carry the cell volume of the lattice they live on.
///
/// A momentum-representation state may additionally carry a free-evolution
/// chirp `s = t/m`: the physical amplitude is
/// `exp(-i·s·|p|²/(2ħ))·envelope(p)`. The chirp is kept analytically so that
/// freely evolved packets, which quickly outgrow any periodic position box,
/// remain exactly representable. It is invisible to the semantics of every
/// public operation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: GridSpec,
    rep: Representation,
    amp: Vec<Complex64>,
    chirp: f64,
}

impl WaveFunction {
    pub fn new(grid: GridSpec, rep: Representation, amp: Vec<Complex64>) -> Result<WaveFunction> {
        grid.validate()?;
        if amp.len() != grid.len() {
            return Err(Error::InvalidState(format!(
                "expected {} amplitudes, got {}",
                grid.len(),
                amp.len()
            )));
        }
        if amp.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(WaveFunction { grid, rep, amp, chirp: 0.0 })
    }

    /// Builds a state by sampling `f` on the lattice of `rep`.
    pub fn from_fn(
        grid: GridSpec,
        rep: Representation,
        f: impl Fn([f64; 3]) -> Complex64,
    ) -> Result<WaveFunction> {
        grid.validate()?;
        let amp = (0..grid.len())
            .map(|idx| match rep {
                Representation::Position => f(grid.position_vector(idx)),
                Representation::Momentum => f(grid.momentum_vector(idx)),
            })
            .collect();
        WaveFunction::new(grid, rep, amp)
    }

    pub(crate) fn from_parts(grid: GridSpec, rep: Representation, amp: Vec<Complex64>, chirp: f64) -> Self {
        debug_assert!(chirp == 0.0 || rep == Representation::Momentum);
        WaveFunction { grid, rep, amp, chirp }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn rep(&self) -> Representation {
        self.rep
    }

    /// Free-evolution chirp `t/m` carried analytically (zero for ordinary states).
    pub fn chirp(&self) -> f64 {
        self.chirp
    }

    /// Raw stored samples, excluding any analytic chirp.
    pub fn envelope(&self) -> &[Complex64] {
        &self.amp
    }

    pub(crate) fn envelope_mut(&mut self) -> &mut [Complex64] {
        &mut self.amp
    }

    /// Physical amplitudes on the lattice of [`Self::rep`].
    pub fn amplitudes(&self) -> Cow<'_, [Complex64]> {
        if self.chirp == 0.0 {
            Cow::Borrowed(&self.amp)
        } else {
            Cow::Owned(self.materialized().amp)
        }
    }

    /// Folds the analytic chirp into the stored amplitudes.
    pub fn materialized(&self) -> WaveFunction {
        if self.chirp == 0.0 {
            return self.clone();
        }
        let c = -0.5 * self.chirp / self.grid.hbar;
        let mut out = WaveFunction::from_parts(self.grid, self.rep, self.amp.clone(), 0.0);
        out.multiply_pointwise(|p| Complex64::from_polar(1.0, c * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2])));
        out
    }

    pub(crate) fn with_chirp(mut self, chirp: f64) -> WaveFunction {
        debug_assert_eq!(self.rep, Representation::Momentum);
        self.chirp = chirp;
        self
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume(self.rep)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<WaveFunction> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero state".into()));
        }
        let s = 1.0 / n;
        self.amp.iter_mut().for_each(|z| *z *= s);
        Ok(self)
    }

    pub fn scaled(&self, c: Complex64) -> WaveFunction {
        let mut out = self.clone();
        out.scale_in_place(c);
        out
    }

    /// Returns `a·self + b·other`.
    pub fn lin_comb(&self, a: Complex64, other: &WaveFunction, b: Complex64) -> Result<WaveFunction> {
        let (f, g) = align(self, other)?;
        let amp = f.amp.iter().zip(&g.amp).map(|(x, y)| a * x + b * y).collect();
        Ok(WaveFunction::from_parts(f.grid, f.rep, amp, f.chirp))
    }

    pub fn add(&self, other: &WaveFunction) -> Result<WaveFunction> {
        self.lin_comb(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &WaveFunction) -> Result<WaveFunction> {
        self.lin_comb(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &WaveFunction) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Multiplies the stored samples pointwise by `symbol(coordinate vector)`.
    pub(crate) fn multiply_pointwise(&mut self, symbol: impl Fn([f64; 3]) -> Complex64) {
        let g = self.grid;
        let n = g.n;
        let axis: Vec<f64> = (0..n).map(|k| g.coordinate(self.rep, k)).collect();
        for (i, plane) in self.amp.chunks_mut(n * n).enumerate() {
            for (j, row) in plane.chunks_mut(n).enumerate() {
                for (k, z) in row.iter_mut().enumerate() {
                    *z *= symbol([axis[i], axis[j], axis[k]]);
                }
            }
        }
    }

    /// Like [`Self::multiply_pointwise`] for a real symbol.
    pub(crate) fn multiply_real(&mut self, symbol: impl Fn([f64; 3]) -> f64) {
        let g = self.grid;
        let n = g.n;
        let axis: Vec<f64> = (0..n).map(|k| g.coordinate(self.rep, k)).collect();
        for (i, plane) in self.amp.chunks_mut(n * n).enumerate() {
            for (j, row) in plane.chunks_mut(n).enumerate() {
                for (k, z) in row.iter_mut().enumerate() {
                    *z *= symbol([axis[i], axis[j], axis[k]]);
                }
            }
        }
    }

    pub(crate) fn scale_in_place(&mut self, c: Complex64) {
        self.amp.iter_mut().for_each(|z| *z *= c);
    }

    /// The state in the requested representation. Unitary; the identity when
    /// `target` is the current representation.
    pub fn transform(&self, target: Representation) -> WaveFunction {
        if target == self.rep {
            return self.clone();
        }
        self.clone().into_rep(target)
    }

    /// Consuming form of [`Self::transform`].
    pub fn into_rep(self, target: Representation) -> WaveFunction {
        if target == self.rep {
            return self;
        }
        let src = if self.chirp == 0.0 { self } else { self.materialized() };
        WaveFunction::from_parts(src.grid, target, centered_transform(&src.grid, src.amp, target), 0.0)
    }

    /// Transform of the stored samples, ignoring any chirp.
    pub(crate) fn envelope_transform(&self, target: Representation) -> WaveFunction {
        if target == self.rep {
            return WaveFunction::from_parts(self.grid, self.rep, self.amp.clone(), 0.0);
        }
        WaveFunction::from_parts(self.grid, target, centered_transform(&self.grid, self.amp.clone(), target), 0.0)
    }

    /// Complex conjugate in position representation (the time-reversed state).
    pub fn time_reversed(&self) -> WaveFunction {
        let pos = self.transform(Representation::Position);
        let amp = pos.amp.iter().map(|z| z.conj()).collect();
        WaveFunction::from_parts(self.grid, Representation::Position, amp, 0.0).transform(self.rep)
    }
}

/// Discretization of `F g(p) = (2πħ)^{-3/2} ∫ exp(-ip·x/ħ) g(x) dx` (and its
/// inverse) on the centered lattices. With `x_0 = -L/2` and `p_0 = -n·Δp/2`
/// the lattice-offset phases reduce to half-period index shifts on both sides
/// of a plain DFT.
fn centered_transform(grid: &GridSpec, mut amp: Vec<Complex64>, target: Representation) -> Vec<Complex64> {
    let n = grid.n;
    let (h, inverse) = match target {
        Representation::Momentum => (grid.dx(), false),
        Representation::Position => (grid.dp(), true),
    };
    let c = (h / (2.0 * PI * grid.hbar).sqrt()).powi(3);
    half_shift(&mut amp, n);
    dft3(&mut amp, n, inverse);
    half_shift(&mut amp, n);
    amp.iter_mut().for_each(|z| *z *= c);
    amp
}

/// Brings two states onto a common footing for pointwise arithmetic.
pub(crate) fn align<'a>(f: &'a WaveFunction, g: &'a WaveFunction) -> Result<(Cow<'a, WaveFunction>, Cow<'a, WaveFunction>)> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    if f.rep == g.rep && f.chirp == g.chirp {
        return Ok((Cow::Borrowed(f), Cow::Borrowed(g)));
    }
    if f.chirp == 0.0 && g.chirp == 0.0 {
        return Ok((Cow::Borrowed(f), Cow::Owned(g.transform(f.rep))));
    }
    let bring = |s: &'a WaveFunction| -> Cow<'a, WaveFunction> {
        if s.rep == Representation::Momentum {
            Cow::Owned(s.materialized())
        } else {
            Cow::Owned(s.transform(Representation::Momentum))
        }
    };
    Ok((bring(f), bring(g)))
}

/// `⟨f, g⟩ = ∫ f(x) conj(g(x)) dx`, linear in `f` and antilinear in `g`.
pub fn inner_product(f: &WaveFunction, g: &WaveFunction) -> Result<Complex64> {
    let (f, g) = align(f, g)?;
    let s: Complex64 = f.amp.iter().zip(&g.amp).map(|(a, b)| a * b.conj()).sum();
    Ok(s * f.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(grid: GridSpec, rep: Representation, seed: u64) -> WaveFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        WaveFunction::new(grid, rep, amp).unwrap()
    }

    #[test]
    fn transform_is_unitary_and_invertible() {
        let grid = GridSpec::new(16, 9.0, 0.7).unwrap();
        for seed in 0..100 {
            let rep = if seed % 2 == 0 { Representation::Position } else { Representation::Momentum };
            let f = random_state(grid, rep, seed);
            let g = f.transform(rep.other());
            assert!((g.norm() - f.norm()).abs() <= 1e-12 * f.norm());
            let back = g.transform(rep);
            assert!(back.distance(&f).unwrap() <= 1e-12 * f.norm());
        }
    }

    #[test]
    fn same_representation_is_identity() {
        let grid = GridSpec::new(8, 3.0, 1.0).unwrap();
        let f = random_state(grid, Representation::Momentum, 3);
        assert_eq!(f.transform(Representation::Momentum), f);
    }

    #[test]
    fn gaussian_widths_invert() {
        // ψ(x) = exp(-|x|²/(2a²)) has momentum amplitude
        // (a²/ħ)^{3/2} exp(-a²|p|²/(2ħ²)) under the (2πħ)^{-3/2} convention.
        let grid = GridSpec::new(64, 32.0, 1.0).unwrap();
        for a in [1.2, 1.5, 2.0] {
            let f = WaveFunction::from_fn(grid, Representation::Position, |x| {
                Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * a * a)).exp(), 0.0)
            })
            .unwrap();
            let g = f.transform(Representation::Momentum);
            let pref = (a * a).powf(1.5);
            let mut worst: f64 = 0.0;
            for (idx, z) in g.amplitudes().iter().enumerate() {
                let p = grid.momentum_vector(idx);
                let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                let exact = pref * (-a * a * p2 / 2.0).exp();
                worst = worst.max((z - exact).norm());
            }
            assert!(worst < 1e-10, "a = {a}: {worst}");
        }
    }

    #[test]
    fn inner_product_properties() {
        let grid = GridSpec::new(8, 4.0, 1.0).unwrap();
        for seed in 0..20 {
            let f = random_state(grid, Representation::Position, seed);
            let g = random_state(grid, Representation::Momentum, seed + 100);
            let fg = inner_product(&f, &g).unwrap();
            let gf = inner_product(&g, &f).unwrap();
            assert!((fg - gf.conj()).norm() < 1e-12 * f.norm() * g.norm());
            assert!(fg.norm() <= f.norm() * g.norm() * (1.0 + 1e-12));
            let ff = inner_product(&f, &f).unwrap();
            assert!((ff.re - f.norm_sqr()).abs() < 1e-12 * ff.re && ff.im.abs() < 1e-12 * ff.re);
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let f = random_state(GridSpec::new(8, 4.0, 1.0).unwrap(), Representation::Position, 1);
        let g = random_state(GridSpec::new(8, 5.0, 1.0).unwrap(), Representation::Position, 2);
        assert_eq!(inner_product(&f, &g), Err(Error::GridMismatch));
    }

    #[test]
    fn chirp_is_invisible() {
        let grid = GridSpec::new(8, 4.0, 1.0).unwrap();
        let f = random_state(grid, Representation::Momentum, 5);
        let chirped = f.clone().with_chirp(0.8);
        let plain = chirped.materialized();
        assert!((chirped.norm() - f.norm()).abs() < 1e-13);
        let a = inner_product(&chirped, &f).unwrap();
        let b = inner_product(&plain, &f).unwrap();
        assert!((a - b).norm() < 1e-13);
        let pos_a = chirped.transform(Representation::Position);
        let pos_b = plain.transform(Representation::Position);
        assert!(pos_a.distance(&pos_b).unwrap() < 1e-13);
    }

    /// Fornberg weights for the first derivative at 0 on the stencil `-m..=m`.
    fn fd_weights(m: i32) -> Vec<f64> {
        let xs: Vec<f64> = (-m..=m).map(f64::from).collect();
        let n = xs.len();
        let mut c = vec![vec![0.0; 2]; n];
        c[0][0] = 1.0;
        let mut c1 = 1.0;
        for i in 1..n {
            let mut c2 = 1.0;
            for j in 0..i {
                let c3 = xs[i] - xs[j];
                c2 *= c3;
                if j == i - 1 {
                    c[i][1] = c1 * (c[i - 1][0] - xs[i - 1] * c[i - 1][1]) / c2;
                    c[i][0] = -c1 * xs[i - 1] * c[i - 1][0] / c2;
                }
                c[j][1] = (xs[i] * c[j][1] - c[j][0]) / c3;
                c[j][0] = xs[i] * c[j][0] / c3;
            }
            c1 = c2;
        }
        c.into_iter().map(|w| w[1]).collect()
    }

    #[test]
    fn fornberg_weights_are_exact_on_polynomials() {
        let w = fd_weights(4);
        for deg in 0..=8 {
            let d: f64 = w.iter().zip(-4..=4).map(|(w, k)| w * f64::from(k).powi(deg)).sum();
            let expected = if deg == 1 { 1.0 } else { 0.0 };
            assert!((d - expected).abs() < 1e-10, "degree {deg}: {d}");
        }
    }

    #[test]
    fn position_multiplication_is_momentum_derivative() {
        let grid = GridSpec::new(64, 32.0, 1.0).unwrap();
        let (p0, sigma) = ([2.8, -0.8, 0.5], 0.55);
        let f = WaveFunction::from_fn(grid, Representation::Momentum, |p| {
            let d2: f64 = (0..3).map(|k| (p[k] - p0[k]).powi(2)).sum();
            Complex64::new((-d2 / (2.0 * sigma * sigma)).exp(), 0.0)
        })
        .unwrap()
        .normalized()
        .unwrap();
        let n = grid.n;
        let m = 12;
        let w = fd_weights(m);
        for axis in 0..3 {
            let mut pos = f.transform(Representation::Position);
            pos.multiply_pointwise(|x| Complex64::new(x[axis], 0.0));
            let spectral = pos.transform(Representation::Momentum);

            let stride = [n * n, n, 1][axis];
            let amp = f.envelope();
            let fd: Vec<Complex64> = (0..grid.len())
                .map(|idx| {
                    let k = grid.unflat(idx)[axis] as i64;
                    let mut d = Complex64::default();
                    for (wt, off) in w.iter().zip(-m..=m) {
                        let kk = k + i64::from(off);
                        if (0..n as i64).contains(&kk) {
                            d += wt * amp[(idx as i64 + i64::from(off) * stride as i64) as usize];
                        }
                    }
                    Complex64::new(0.0, grid.hbar) * d / grid.dp()
                })
                .collect();
            let fd = WaveFunction::new(grid, Representation::Momentum, fd).unwrap();
            let rel = spectral.distance(&fd).unwrap() / spectral.norm();
            assert!(rel <= 1e-6, "axis {axis}: {rel}");
        }
    }
}
