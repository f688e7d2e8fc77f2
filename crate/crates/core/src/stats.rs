//! Expectations, the time/energy uncertainty product and residuals of the
//! operator identities.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::domain_compliance;
use crate::grid::{Axis, GridSpec};
use crate::ops::{apply, build, MomentumSymbol, OpKind, OperatorExpr};
use crate::state::{inner_product, WaveFunction};

/// How far `‖f‖` may stray from 1 before expectations are refused.
pub const NORM_TOL: f64 = 1e-10;
/// Relative slack allowed below `ħ/2` for the uncertainty product.
pub const UNCERTAINTY_TOL: f64 = 1e-8;

/// Thresholds deciding whether a state counts as being in the operator domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompliancePolicy {
    pub p_min: f64,
    pub tol: f64,
}

impl Default for CompliancePolicy {
    fn default() -> Self {
        CompliancePolicy { p_min: 0.5, tol: 1e-8 }
    }
}

impl CompliancePolicy {
    pub fn admits(&self, f: &WaveFunction) -> bool {
        domain_compliance(f, self.p_min, self.tol).compliant
    }
}

/// `Re⟨Af, f⟩` together with the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub value: f64,
    pub imaginary_leak: f64,
}

impl Expectation {
    fn from_complex(z: Complex64) -> Self {
        Expectation { value: z.re, imaginary_leak: z.im.abs() }
    }
}

fn check_normalized(f: &WaveFunction) -> Result<()> {
    let n = f.norm();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

pub fn expectation(a: &OperatorExpr, f: &WaveFunction) -> Result<Expectation> {
    check_normalized(f)?;
    Ok(Expectation::from_complex(inner_product(&apply(a, f)?, f)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyResult {
    pub t: f64,
    pub tilde_t: [f64; 3],
    pub tilde_e: [f64; 3],
    pub delta_t: f64,
    pub delta_e: f64,
    pub product: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    /// Whether `f` passed the domain-compliance policy.
    pub compliant: bool,
    /// Largest imaginary leak among the six expectations.
    pub imaginary_leak: f64,
}

/// Residual identities that can be evaluated on a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckId {
    TimeNorm,
    XAbsP(Axis),
    ComponentCommutator(Axis),
    SumCommutator,
    SchwarzChain,
}

impl CheckId {
    pub fn name(&self) -> &'static str {
        match self {
            CheckId::TimeNorm => "eq5_time_norm",
            CheckId::XAbsP(_) => "eq9_x_absp",
            CheckId::ComponentCommutator(_) => "component_commutator",
            CheckId::SumCommutator => "sum_commutator",
            CheckId::SchwarzChain => "schwarz_chain",
        }
    }

    pub fn axis(&self) -> Option<Axis> {
        match self {
            CheckId::XAbsP(j) | CheckId::ComponentCommutator(j) => Some(*j),
            _ => None,
        }
    }

    pub fn default_threshold(&self) -> f64 {
        match self {
            CheckId::TimeNorm => 1e-10,
            CheckId::XAbsP(_) | CheckId::SumCommutator => 1e-6,
            // Residual is on 4[t_j,e_j].
            CheckId::ComponentCommutator(_) => 4e-6,
            CheckId::SchwarzChain => 0.0,
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.axis() {
            Some(j) => write!(f, "{}({})", self.name(), j),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualCheck {
    pub check: String,
    pub axis: Option<usize>,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub grid: GridSpec,
}

impl ResidualCheck {
    fn new(id: CheckId, value: f64, threshold: f64, grid: GridSpec) -> Self {
        ResidualCheck {
            check: id.name().to_string(),
            axis: id.axis().map(Axis::label),
            value,
            threshold,
            pass: value <= threshold,
            grid,
        }
    }
}

/// Everything needed about `t_j` and `e_j` on one state at one time value.
///
/// `t_j f` and `e_j f` are computed on construction; the images needed only by
/// commutator checks are computed on first use.
pub struct TimeEnergyCell<'a> {
    f: &'a WaveFunction,
    t: f64,
    time_ops: [OperatorExpr; 3],
    energy_ops: [OperatorExpr; 3],
    t_f: [WaveFunction; 3],
    e_f: [WaveFunction; 3],
    commutators: OnceLock<[WaveFunction; 3]>,
}

impl<'a> TimeEnergyCell<'a> {
    pub fn new(f: &'a WaveFunction, t: f64) -> Result<Self> {
        check_normalized(f)?;
        let time_ops = Axis::ALL.map(|axis| build(OpKind::Time { axis, t }));
        let energy_ops = Axis::ALL.map(|axis| build(OpKind::Energy { axis, t }));
        let time_ops = unpack(time_ops)?;
        let energy_ops = unpack(energy_ops)?;
        let t_f = unpack([0, 1, 2].map(|j| apply(&time_ops[j], f)))?;
        let e_f = unpack([0, 1, 2].map(|j| apply(&energy_ops[j], f)))?;
        Ok(TimeEnergyCell { f, t, time_ops, energy_ops, t_f, e_f, commutators: OnceLock::new() })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &WaveFunction {
        self.f
    }

    /// `[t_j, e_j] f` for each axis.
    pub fn commutators(&self) -> Result<&[WaveFunction; 3]> {
        if let Some(c) = self.commutators.get() {
            return Ok(c);
        }
        let c = unpack([0, 1, 2].map(|j| {
            let te = apply(&self.time_ops[j], &self.e_f[j])?;
            let et = apply(&self.energy_ops[j], &self.t_f[j])?;
            te.sub(&et)
        }))?;
        Ok(self.commutators.get_or_init(|| c))
    }

    pub fn uncertainty(&self, compliant: bool) -> Result<UncertaintyResult> {
        let f = self.f;
        let mut leak = 0.0f64;
        let mut spread = |images: &[WaveFunction; 3]| -> Result<([f64; 3], f64)> {
            let mut means = [0.0; 3];
            let mut var = 0.0;
            for j in 0..3 {
                let e = Expectation::from_complex(inner_product(&images[j], f)?);
                leak = leak.max(e.imaginary_leak);
                means[j] = e.value;
                var += images[j].lin_comb(one(), f, Complex64::new(-e.value, 0.0))?.norm_sqr();
            }
            Ok((means, var.sqrt()))
        };
        let (tilde_t, delta_t) = spread(&self.t_f)?;
        let (tilde_e, delta_e) = spread(&self.e_f)?;
        let product = delta_t * delta_e;
        let bound = 0.5 * f.grid().hbar;
        Ok(UncertaintyResult {
            t: self.t,
            tilde_t,
            tilde_e,
            delta_t,
            delta_e,
            product,
            bound,
            margin: product - bound,
            pass: product >= bound * (1.0 - UNCERTAINTY_TOL),
            compliant,
            imaginary_leak: leak,
        })
    }

    /// `|⟨Σ_j t_j² f, f⟩ − t²|`.
    pub fn time_norm_residual(&self) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            acc += inner_product(&apply(&self.time_ops[j], &self.t_f[j])?, self.f)?;
        }
        Ok((acc - self.t * self.t).norm())
    }

    /// `‖4[t_j,e_j]f − (2ħ/i + 2iħ p_j²|p|⁻²)f‖`.
    pub fn component_commutator_residual(&self, axis: Axis) -> Result<f64> {
        let hbar = self.f.grid().hbar;
        let c = &self.commutators()?[axis.index()];
        let mut p_exp = [0; 3];
        p_exp[axis.index()] = 2;
        let ratio = OperatorExpr::DiagMomentum(MomentumSymbol { coeff: 1.0, p_exp, r_pow: -2 });
        let expected = self.f.lin_comb(
            Complex64::new(0.0, -2.0 * hbar),
            &apply(&ratio, self.f)?,
            Complex64::new(0.0, 2.0 * hbar),
        )?;
        c.scaled(Complex64::new(4.0, 0.0)).distance(&expected)
    }

    fn commutator_sum(&self) -> Result<WaveFunction> {
        let [a, b, c] = self.commutators()?;
        a.add(b)?.add(c)
    }

    /// `‖Σ_j [t_j,e_j]f − (ħ/i)f‖`.
    pub fn sum_commutator_residual(&self) -> Result<f64> {
        let hbar = self.f.grid().hbar;
        self.commutator_sum()?.distance(&self.f.scaled(Complex64::new(0.0, -hbar)))
    }

    /// `max(0, |½Σ_j⟨[t_j,e_j]f,f⟩| − ΔT·ΔE)`.
    pub fn schwarz_residual(&self) -> Result<f64> {
        let lhs = 0.5 * inner_product(&self.commutator_sum()?, self.f)?.norm();
        let u = self.uncertainty(true)?;
        Ok((lhs - u.product).max(0.0))
    }

    pub fn residual(&self, id: CheckId) -> Result<f64> {
        match id {
            CheckId::TimeNorm => self.time_norm_residual(),
            CheckId::XAbsP(j) => x_abs_p_residual(self.f, j),
            CheckId::ComponentCommutator(j) => self.component_commutator_residual(j),
            CheckId::SumCommutator => self.sum_commutator_residual(),
            CheckId::SchwarzChain => self.schwarz_residual(),
        }
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn unpack<T>(arr: [Result<T>; 3]) -> Result<[T; 3]> {
    let [a, b, c] = arr;
    Ok([a?, b?, c?])
}

/// `‖[x_j, |p|]f − iħ·p_j|p|⁻¹ f‖`; independent of `t`.
pub fn x_abs_p_residual(f: &WaveFunction, axis: Axis) -> Result<f64> {
    let x = build(OpKind::Position(axis))?;
    let abs_p = build(OpKind::AbsPPow(1))?;
    let lhs = crate::ops::commutator_apply(&x, &abs_p, f)?;
    let rhs = apply(&build(OpKind::Momentum(axis))?.after(build(OpKind::AbsPPow(-1))?), f)?;
    lhs.distance(&rhs.scaled(Complex64::new(0.0, f.grid().hbar)))
}

pub fn uncertainty_check(f: &WaveFunction, t: f64) -> Result<UncertaintyResult> {
    uncertainty_check_with(f, t, &CompliancePolicy::default())
}

pub fn uncertainty_check_with(f: &WaveFunction, t: f64, policy: &CompliancePolicy) -> Result<UncertaintyResult> {
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    TimeEnergyCell::new(f, t)?.uncertainty(policy.admits(f))
}

pub fn residual(id: CheckId, f: &WaveFunction, t: f64) -> Result<ResidualCheck> {
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    let value = match id {
        CheckId::XAbsP(j) => {
            check_normalized(f)?;
            x_abs_p_residual(f, j)?
        }
        _ => TimeEnergyCell::new(f, t)?.residual(id)?,
    };
    Ok(ResidualCheck::new(id, value, id.default_threshold(), *f.grid()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{synthesize_state, StateSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_on(grid: GridSpec) -> WaveFunction {
        synthesize_state(&grid, &StateSpec::gaussian([3.0, 0.0, 0.0], 0.5)).unwrap()
    }

    fn small_grid() -> GridSpec {
        GridSpec::new(48, 24.0, 1.0).unwrap()
    }

    fn random_compliant(grid: &GridSpec, seed: u64) -> WaveFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r: f64 = rng.gen_range(3.0..3.5);
        let dir = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0f64)];
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-3);
        let p0 = dir.map(|d| r * d / n);
        let spec = StateSpec::gaussian(p0, rng.gen_range(0.45..0.55)).with_seed(seed);
        synthesize_state(grid, &spec).unwrap()
    }

    #[test]
    fn odd_time_symbol_has_zero_mean() {
        let g = GridSpec::new(32, 16.0, 1.0).unwrap();
        let f = synthesize_state(&g, &StateSpec::annular_bump(1.0, 5.0)).unwrap();
        let e = expectation(&build(OpKind::Time { axis: Axis::Y, t: 1.5 }).unwrap(), &f).unwrap();
        assert!(e.value.abs() <= 1e-10);
    }

    #[test]
    fn parity_odd_energy_has_zero_mean() {
        let g = GridSpec::new(32, 16.0, 1.0).unwrap();
        let f = synthesize_state(&g, &StateSpec::gaussian([0.0; 3], 1.0)).unwrap();
        let e = expectation(&build(OpKind::Energy { axis: Axis::X, t: 0.7 }).unwrap(), &f).unwrap();
        assert!(e.value.abs() <= 1e-8, "{e:?}");
    }

    #[test]
    fn time_expectation_matches_quadrature() {
        // Oracle: direct quadrature of t·p₁/|p|·|f(p)|² on a lattice of half
        // the momentum spacing, from the closed-form density.
        let (p0, sigma, t) = ([3.0, 0.0, 0.0], 0.5, 2.0);
        let n = 128;
        let dp = 2.0 * std::f64::consts::PI / 40.0;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = [i, j, k].map(|a| (a as f64 - (n / 2) as f64) * dp);
                    let d2: f64 = (0..3).map(|a| (p[a] - p0[a]).powi(2)).sum();
                    let rho = (-d2 / (sigma * sigma)).exp();
                    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    if r > 0.0 {
                        num += t * p[0] / r * rho;
                    }
                    den += rho;
                }
            }
        }
        let oracle = num / den;
        let f = reference_on(GridSpec::new(64, 20.0, 1.0).unwrap());
        let e = expectation(&build(OpKind::Time { axis: Axis::X, t }).unwrap(), &f).unwrap();
        assert!((e.value - oracle).abs() <= 1e-6, "{} vs {oracle}", e.value);
        assert!(e.imaginary_leak <= 1e-8);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let f = reference_on(small_grid()).scaled(Complex64::new(2.0, 0.0));
        let op = build(OpKind::Momentum(Axis::X)).unwrap();
        assert!(matches!(expectation(&op, &f), Err(Error::NotNormalized(_))));
        assert!(uncertainty_check(&f, 1.0).is_err());
    }

    #[test]
    fn zero_time_rejected() {
        let f = reference_on(small_grid());
        assert_eq!(uncertainty_check(&f, 0.0), Err(Error::ZeroTime));
        assert_eq!(residual(CheckId::SumCommutator, &f, 0.0), Err(Error::ZeroTime));
    }

    #[test]
    fn bound_holds_and_is_symmetric_in_t() {
        let f = reference_on(small_grid());
        let a = uncertainty_check(&f, 1.0).unwrap();
        let b = uncertainty_check(&f, -1.0).unwrap();
        assert!(a.pass && a.compliant && a.product >= 0.5 * (1.0 - 1e-8));
        assert!(a.imaginary_leak <= 1e-8);
        assert!((a.delta_t - b.delta_t).abs() <= 1e-12 * a.delta_t);
        assert!((a.delta_e - b.delta_e).abs() <= 1e-12 * a.delta_e);
        assert!((a.product - b.product).abs() <= 1e-12 * a.product);
        for j in 0..3 {
            assert!((a.tilde_t[j] + b.tilde_t[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn uncertainty_self_converges() {
        let coarse = uncertainty_check(&reference_on(GridSpec::new(64, 32.0, 1.0).unwrap()), 2.0).unwrap();
        let fine = uncertainty_check(&reference_on(GridSpec::new(128, 64.0, 1.0).unwrap()), 2.0).unwrap();
        for (a, b) in [
            (coarse.delta_t, fine.delta_t),
            (coarse.delta_e, fine.delta_e),
            (coarse.product, fine.product),
        ] {
            assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn scale_laws_in_t() {
        let f = random_compliant(&small_grid(), 11);
        let base = uncertainty_check(&f, 1.0).unwrap();
        for lambda in [-2.0, -0.5, 0.5, 2.0, 3.0] {
            let u = uncertainty_check(&f, lambda).unwrap();
            let l: f64 = f64::abs(lambda);
            assert!((u.delta_t - l * base.delta_t).abs() <= 1e-10);
            assert!((u.delta_e - base.delta_e / l).abs() <= 1e-10);
            assert!((u.product - base.product).abs() <= 1e-9);
        }
    }

    #[test]
    fn identities_on_reference_state() {
        let f = reference_on(GridSpec::new(64, 32.0, 1.0).unwrap());
        for id in [CheckId::TimeNorm, CheckId::SumCommutator, CheckId::SchwarzChain] {
            let r = residual(id, &f, 2.0).unwrap();
            assert!(r.pass, "{id}: {}", r.value);
        }
        for axis in Axis::ALL {
            for id in [CheckId::XAbsP(axis), CheckId::ComponentCommutator(axis)] {
                let r = residual(id, &f, -0.5).unwrap();
                assert!(r.pass, "{id}: {}", r.value);
            }
        }
    }

    #[test]
    fn schwarz_chain_clamps_on_random_states() {
        let g = GridSpec::new(32, 16.0, 1.0).unwrap();
        for seed in 0..20 {
            let f = random_compliant(&g, seed);
            let cell = TimeEnergyCell::new(&f, 1.0).unwrap();
            assert_eq!(cell.schwarz_residual().unwrap(), 0.0);
        }
    }

    #[test]
    fn sum_rule_converges_with_grid() {
        let coarse = reference_on(GridSpec::new(32, 16.0, 1.0).unwrap());
        let fine = reference_on(GridSpec::new(64, 32.0, 1.0).unwrap());
        let a = residual(CheckId::SumCommutator, &coarse, 1.0).unwrap().value;
        let b = residual(CheckId::SumCommutator, &fine, 1.0).unwrap().value;
        assert!(b <= a, "{b} > {a}");
    }

    #[test]
    fn residual_reports_metadata() {
        let f = reference_on(small_grid());
        let r = residual(CheckId::XAbsP(Axis::Z), &f, 1.0).unwrap();
        assert_eq!(r.check, "eq9_x_absp");
        assert_eq!(r.axis, Some(3));
        assert_eq!(r.grid, small_grid());
        assert!(r.value >= 0.0);
    }
}
