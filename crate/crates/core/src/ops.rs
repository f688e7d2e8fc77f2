//! Composable operator pipelines acting on wavefunctions.
//!
//! Every operator is built from diagonal leaves (multiplication by a symbol in
//! the momentum or position representation), scalars, sums and compositions.
//! [`apply`] interprets the tree, inserting transforms whenever consecutive
//! leaves live in different representations.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Axis, Representation};
use crate::state::WaveFunction;

/// `coeff · p₁^β₁ p₂^β₂ p₃^β₃ · |p|^s`, multiplied pointwise in momentum space.
///
/// When `s < 0` the value at the lattice origin `p = 0` is set to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSymbol {
    pub coeff: f64,
    pub p_exp: [u32; 3],
    pub r_pow: i32,
}

impl MomentumSymbol {
    pub fn component(axis: Axis) -> Self {
        let mut p_exp = [0; 3];
        p_exp[axis.index()] = 1;
        MomentumSymbol { coeff: 1.0, p_exp, r_pow: 0 }
    }

    pub fn abs_pow(s: i32) -> Self {
        MomentumSymbol { coeff: 1.0, p_exp: [0; 3], r_pow: s }
    }

    pub fn is_singular(&self) -> bool {
        self.r_pow < 0
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        if r2 == 0.0 && self.r_pow < 0 {
            return 0.0;
        }
        let mut v = self.coeff;
        for k in 0..3 {
            if self.p_exp[k] > 0 {
                v *= p[k].powi(self.p_exp[k] as i32);
            }
        }
        match self.r_pow {
            0 => v,
            s if s % 2 == 0 => v * r2.powi(s / 2),
            s => v * r2.sqrt().powi(s),
        }
    }
}

/// `x₁^α₁ x₂^α₂ x₃^α₃`, multiplied pointwise in position space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositionSymbol {
    pub x_exp: [u32; 3],
}

impl PositionSymbol {
    pub fn coordinate(axis: Axis) -> Self {
        let mut x_exp = [0; 3];
        x_exp[axis.index()] = 1;
        PositionSymbol { x_exp }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        (0..3).fold(1.0, |v, k| v * x[k].powi(self.x_exp[k] as i32))
    }
}

/// An operator pipeline. `Compose` applies its rightmost entry first.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorExpr {
    DiagMomentum(MomentumSymbol),
    DiagPosition(PositionSymbol),
    Scale(Complex64),
    Sum(Vec<OperatorExpr>),
    Compose(Vec<OperatorExpr>),
}

impl OperatorExpr {
    pub fn identity() -> OperatorExpr {
        OperatorExpr::Scale(Complex64::new(1.0, 0.0))
    }

    pub fn scalar(c: f64) -> OperatorExpr {
        OperatorExpr::Scale(Complex64::new(c, 0.0))
    }

    pub fn then_scaled(self, c: Complex64) -> OperatorExpr {
        OperatorExpr::Compose(vec![OperatorExpr::Scale(c), self])
    }

    /// `self − other`.
    pub fn minus(self, other: OperatorExpr) -> OperatorExpr {
        OperatorExpr::Sum(vec![self, other.then_scaled(Complex64::new(-1.0, 0.0))])
    }

    /// `self ∘ other` (other applied first).
    pub fn after(self, other: OperatorExpr) -> OperatorExpr {
        OperatorExpr::Compose(vec![self, other])
    }

    /// `[self, other] = self∘other − other∘self` as a pipeline.
    pub fn commutator(self, other: OperatorExpr) -> OperatorExpr {
        let ab = self.clone().after(other.clone());
        let ba = other.after(self);
        ab.minus(ba)
    }

    /// Whether any leaf is a negative power of `|p|`.
    pub fn is_singular(&self) -> bool {
        match self {
            OperatorExpr::DiagMomentum(s) => s.is_singular(),
            OperatorExpr::DiagPosition(_) | OperatorExpr::Scale(_) => false,
            OperatorExpr::Sum(v) | OperatorExpr::Compose(v) => v.iter().any(OperatorExpr::is_singular),
        }
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorExpr::DiagMomentum(s) => {
                write!(f, "{}", s.coeff)?;
                for (k, e) in s.p_exp.iter().enumerate() {
                    if *e > 0 {
                        write!(f, "*p{}^{}", k + 1, e)?;
                    }
                }
                if s.r_pow != 0 {
                    write!(f, "*|p|^{}", s.r_pow)?;
                }
                Ok(())
            }
            OperatorExpr::DiagPosition(s) => {
                let mut first = true;
                for (k, e) in s.x_exp.iter().enumerate() {
                    if *e > 0 {
                        write!(f, "{}x{}^{}", if first { "" } else { "*" }, k + 1, e)?;
                        first = false;
                    }
                }
                if first {
                    write!(f, "1")?;
                }
                Ok(())
            }
            OperatorExpr::Scale(c) => write!(f, "({})", c),
            OperatorExpr::Sum(v) => {
                write!(f, "(")?;
                for (i, op) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{op}")?;
                }
                write!(f, ")")
            }
            OperatorExpr::Compose(v) => {
                for (i, op) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "·")?;
                    }
                    write!(f, "{op}")?;
                }
                Ok(())
            }
        }
    }
}

/// The operators of the three-dimensional time/energy construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    Position(Axis),
    Momentum(Axis),
    /// `|p|^s`; singular at `p = 0` for `s < 0`.
    AbsPPow(i32),
    /// `t_j = t·p_j·|p|⁻¹`.
    Time { axis: Axis, t: f64 },
    /// `e_j = (|p|·x_j + x_j·|p|)/(4t)`.
    Energy { axis: Axis, t: f64 },
    /// `H = |p|²/(2m)`.
    FreeHamiltonian { mass: f64 },
}

fn check_time(t: f64) -> Result<()> {
    if t == 0.0 || !t.is_finite() {
        Err(Error::ZeroTime)
    } else {
        Ok(())
    }
}

pub fn build(kind: OpKind) -> Result<OperatorExpr> {
    use OperatorExpr::*;
    Ok(match kind {
        OpKind::Position(j) => DiagPosition(PositionSymbol::coordinate(j)),
        OpKind::Momentum(j) => DiagMomentum(MomentumSymbol::component(j)),
        OpKind::AbsPPow(s) => DiagMomentum(MomentumSymbol::abs_pow(s)),
        OpKind::Time { axis, t } => {
            check_time(t)?;
            DiagMomentum(MomentumSymbol { coeff: t, r_pow: -1, ..MomentumSymbol::component(axis) })
        }
        OpKind::Energy { axis, t } => {
            check_time(t)?;
            let abs_p = build(OpKind::AbsPPow(1))?;
            let x = build(OpKind::Position(axis))?;
            Compose(vec![
                OperatorExpr::scalar(1.0 / (4.0 * t)),
                Sum(vec![Compose(vec![abs_p.clone(), x.clone()]), Compose(vec![x, abs_p])]),
            ])
        }
        OpKind::FreeHamiltonian { mass } => {
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::NonPositiveMass(mass));
            }
            DiagMomentum(MomentumSymbol { coeff: 0.5 / mass, p_exp: [0; 3], r_pow: 2 })
        }
    })
}

/// Applies `op` to `f`; the result is in the representation of `f`.
pub fn apply(op: &OperatorExpr, f: &WaveFunction) -> Result<WaveFunction> {
    let out = eval(op, f.clone())?;
    Ok(out.into_rep(f.rep()))
}

/// `A(B f) − B(A f)`.
pub fn commutator_apply(a: &OperatorExpr, b: &OperatorExpr, f: &WaveFunction) -> Result<WaveFunction> {
    let ab = apply(a, &apply(b, f)?)?;
    let ba = apply(b, &apply(a, f)?)?;
    ab.sub(&ba)
}

fn to_momentum(w: WaveFunction) -> WaveFunction {
    if w.rep() == Representation::Momentum {
        w
    } else {
        w.into_rep(Representation::Momentum)
    }
}

fn eval(op: &OperatorExpr, w: WaveFunction) -> Result<WaveFunction> {
    match op {
        OperatorExpr::DiagMomentum(sym) => {
            let mut w = to_momentum(w);
            w.multiply_real(|p| sym.eval(p));
            Ok(w)
        }
        OperatorExpr::DiagPosition(sym) => {
            if w.chirp() == 0.0 {
                let mut w = w.into_rep(Representation::Position);
                w.multiply_real(|x| sym.eval(x));
                Ok(w)
            } else {
                // Under exp(-iHt) the coordinates conjugate to x_j + (t/m)·p_j,
                // which still commute with one another.
                let mut w = w;
                for axis in Axis::ALL {
                    for _ in 0..sym.x_exp[axis.index()] {
                        w = evolved_coordinate(axis, w);
                    }
                }
                Ok(w)
            }
        }
        OperatorExpr::Scale(c) => {
            let mut w = w;
            w.scale_in_place(*c);
            Ok(w)
        }
        OperatorExpr::Sum(terms) => {
            let Some((last, rest)) = terms.split_last() else {
                let mut w = w;
                w.scale_in_place(Complex64::new(0.0, 0.0));
                return Ok(w);
            };
            let input_rep = w.rep();
            let mut parts = Vec::with_capacity(terms.len());
            for term in rest {
                parts.push(eval(term, w.clone())?);
            }
            parts.push(eval(last, w)?);
            let target = if parts.iter().any(|p| p.rep() == input_rep) { input_rep } else { parts[0].rep() };
            let mut parts = parts.into_iter().map(|p| p.into_rep(target));
            let mut acc = parts.next().expect("nonempty sum");
            for part in parts {
                acc = acc.add(&part)?;
            }
            Ok(acc)
        }
        OperatorExpr::Compose(factors) => factors.iter().rev().try_fold(w, |acc, op| eval(op, acc)),
    }
}

/// `x_j` acting on a chirped momentum state, kept in the evolved frame.
fn evolved_coordinate(axis: Axis, w: WaveFunction) -> WaveFunction {
    let s = w.chirp();
    let mut pos = w.envelope_transform(Representation::Position);
    pos.multiply_real(|x| x[axis.index()]);
    let x_env = pos.envelope_transform(Representation::Momentum);
    let mut out = w;
    let g = *out.grid();
    for (idx, (z, xz)) in out.envelope_mut().iter_mut().zip(x_env.envelope()).enumerate() {
        let p = g.momentum_vector(idx)[axis.index()];
        *z = xz + s * p * *z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{synthesize_state, StateSpec};
    use crate::grid::GridSpec;
    use crate::state::inner_product;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn grid() -> GridSpec {
        GridSpec::new(64, 24.0, 1.0).unwrap()
    }

    fn gauss() -> WaveFunction {
        synthesize_state(&grid(), &StateSpec::gaussian([3.5, -1.0, 0.5], 0.6)).unwrap()
    }

    fn x(j: usize) -> OperatorExpr {
        build(OpKind::Position(Axis::new(j).unwrap())).unwrap()
    }

    fn p(j: usize) -> OperatorExpr {
        build(OpKind::Momentum(Axis::new(j).unwrap())).unwrap()
    }

    #[test]
    fn momentum_acts_diagonally() {
        let f = gauss();
        let g = apply(&p(1), &f).unwrap();
        let grid = *f.grid();
        for (idx, (a, b)) in f.envelope().iter().zip(g.envelope()).enumerate() {
            assert!((a * grid.momentum_vector(idx)[0] - b).norm() < 1e-15);
        }
    }

    #[test]
    fn position_acts_diagonally_on_point_mass() {
        let grid = GridSpec::new(64, 20.0, 1.0).unwrap();
        for k in [1usize, 2, 5] {
            let target = grid.flat(32 + k, 32, 32);
            let f = WaveFunction::from_fn(grid, Representation::Position, |_| Complex64::new(0.0, 0.0)).unwrap();
            let mut amp = f.envelope().to_vec();
            amp[target] = Complex64::new(1.0, 0.0);
            let f = WaveFunction::new(grid, Representation::Position, amp).unwrap();
            let g = apply(&x(1), &f).unwrap();
            assert_eq!(g.rep(), Representation::Position);
            assert!((g.envelope()[target].re - 0.3125 * k as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn abs_p_squared_is_composition() {
        let f = gauss();
        let a = apply(&build(OpKind::AbsPPow(2)).unwrap(), &f).unwrap();
        let r = build(OpKind::AbsPPow(1)).unwrap();
        let b = apply(&r.clone().after(r), &f).unwrap();
        assert!(a.distance(&b).unwrap() <= 1e-12 * a.norm());
    }

    #[test]
    fn zero_time_and_bad_mass_rejected() {
        assert_eq!(build(OpKind::Time { axis: Axis::X, t: 0.0 }), Err(Error::ZeroTime));
        assert_eq!(build(OpKind::Energy { axis: Axis::Z, t: 0.0 }), Err(Error::ZeroTime));
        assert!(matches!(build(OpKind::FreeHamiltonian { mass: 0.0 }), Err(Error::NonPositiveMass(_))));
        assert!(build(OpKind::FreeHamiltonian { mass: -1.0 }).is_err());
    }

    #[test]
    fn energy_structure() {
        let e = build(OpKind::Energy { axis: Axis::Y, t: 2.0 }).unwrap();
        let OperatorExpr::Compose(parts) = &e else { panic!("{e:?}") };
        assert_eq!(parts[0], OperatorExpr::scalar(0.125));
        let OperatorExpr::Sum(terms) = &parts[1] else { panic!() };
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0], OperatorExpr::Compose(vec![build(OpKind::AbsPPow(1)).unwrap(), x(2)]));
        assert_eq!(terms[1], OperatorExpr::Compose(vec![x(2), build(OpKind::AbsPPow(1)).unwrap()]));
    }

    #[test]
    fn sum_and_compose_semantics() {
        let f = gauss();
        let a = x(1);
        let b = p(2);
        let sum = apply(&OperatorExpr::Sum(vec![a.clone(), b.clone()]), &f).unwrap();
        let sep = apply(&a, &f).unwrap().add(&apply(&b, &f).unwrap()).unwrap();
        assert!(sum.distance(&sep).unwrap() <= 1e-12 * sum.norm());
        let comp = apply(&a.clone().after(b.clone()), &f).unwrap();
        let seq = apply(&a, &apply(&b, &f).unwrap()).unwrap();
        assert!(comp.distance(&seq).unwrap() <= 1e-13 * comp.norm());
    }

    #[test]
    fn linearity() {
        let g = grid();
        let f = gauss();
        let h = synthesize_state(&g, &StateSpec::annular_bump(0.5, 3.0).with_seed(1)).unwrap();
        let op = build(OpKind::Energy { axis: Axis::X, t: -1.5 }).unwrap();
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4));
        let lhs = apply(&op, &f.lin_comb(a, &h, b).unwrap()).unwrap();
        let rhs = apply(&op, &f).unwrap().lin_comb(a, &apply(&op, &h).unwrap(), b).unwrap();
        assert!(lhs.distance(&rhs).unwrap() <= 1e-12 * lhs.norm());
    }

    #[test]
    fn canonical_commutator_on_position_input() {
        let f = gauss().transform(Representation::Position);
        let c = commutator_apply(&x(1), &p(1), &f).unwrap();
        assert_eq!(c.rep(), Representation::Position);
        let expected = f.scaled(I * f.grid().hbar);
        let d = c.distance(&expected).unwrap();
        assert!(d <= 1e-8, "{d}");
        let c12 = commutator_apply(&x(1), &p(2), &f).unwrap();
        assert!(c12.norm() <= 1e-10);
    }

    #[test]
    fn guarded_singularity_leaves_origin_zero() {
        let g = grid();
        let f = synthesize_state(&g, &StateSpec::annular_bump(0.5, 3.0)).unwrap();
        let out = apply(&build(OpKind::AbsPPow(-1)).unwrap(), &f).unwrap();
        assert_eq!(f.envelope()[g.origin_index()], Complex64::new(0.0, 0.0));
        assert_eq!(out.envelope()[g.origin_index()], Complex64::new(0.0, 0.0));
        let sym = MomentumSymbol::abs_pow(-1);
        assert_eq!(sym.eval([0.0; 3]), 0.0);
        assert_eq!(MomentumSymbol::abs_pow(2).eval([0.0; 3]), 0.0);
        assert_eq!(MomentumSymbol::abs_pow(0).eval([0.0; 3]), 1.0);
        assert!(build(OpKind::Time { axis: Axis::X, t: 1.0 }).unwrap().is_singular());
        assert!(!build(OpKind::Energy { axis: Axis::X, t: 1.0 }).unwrap().is_singular());
    }

    #[test]
    fn evolved_frame_matches_materialized_state() {
        // Small chirp so the materialized packet still fits in the box.
        let f = gauss();
        let chirped = f.clone().with_chirp(0.4);
        let plain = chirped.materialized();
        for op in [x(1), x(3).after(x(2)), build(OpKind::Energy { axis: Axis::X, t: 0.4 }).unwrap()] {
            let a = apply(&op, &chirped).unwrap();
            let b = apply(&op, &plain).unwrap();
            assert!(a.chirp() != 0.0);
            let d = a.distance(&b).unwrap() / b.norm();
            assert!(d <= 1e-7, "{op} {d}");
        }
    }

    #[test]
    fn representation_independence() {
        let f = gauss();
        let op = build(OpKind::Energy { axis: Axis::Z, t: 0.7 }).unwrap().after(p(1));
        let a = apply(&op, &f).unwrap();
        let b = apply(&op, &f.transform(Representation::Position)).unwrap().transform(Representation::Momentum);
        assert!(a.distance(&b).unwrap() <= 1e-12 * a.norm());
    }

    #[test]
    fn energy_is_symmetric() {
        let g = grid();
        let op = build(OpKind::Energy { axis: Axis::X, t: 2.0 }).unwrap();
        for seed in 0..5 {
            let f = synthesize_state(&g, &StateSpec::annular_bump(0.6, 3.5).with_seed(seed)).unwrap();
            let h = synthesize_state(&g, &StateSpec::gaussian([1.0, 1.0, 0.5], 0.5).with_seed(seed + 50)).unwrap();
            let lhs = inner_product(&apply(&op, &f).unwrap(), &h).unwrap();
            let rhs = inner_product(&f, &apply(&op, &h).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn x_abs_p_commutator() {
        let f = gauss();
        let c = commutator_apply(&x(1), &build(OpKind::AbsPPow(1)).unwrap(), &f).unwrap();
        let rhs = apply(&p(1).after(build(OpKind::AbsPPow(-1)).unwrap()), &f)
            .unwrap()
            .scaled(I * f.grid().hbar);
        assert!(c.distance(&rhs).unwrap() <= 1e-6 * rhs.norm());
    }

    #[test]
    fn time_squares_sum_to_t_squared() {
        let t = 1.7;
        let f = gauss();
        let terms: Vec<OperatorExpr> = Axis::ALL
            .iter()
            .map(|&axis| {
                let tj = build(OpKind::Time { axis, t }).unwrap();
                tj.clone().after(tj)
            })
            .collect();
        let g = apply(&OperatorExpr::Sum(terms), &f).unwrap();
        let e = inner_product(&g, &f).unwrap();
        assert!((e.re - t * t).abs() <= 1e-10 && e.im.abs() <= 1e-10, "{e}");

        let sym = |axis: Axis| MomentumSymbol { coeff: t, r_pow: -1, ..MomentumSymbol::component(axis) };
        for p in [[1.0, 2.0, -0.5], [0.0, 0.0, 3.0], [-0.1, 0.2, 0.05]] {
            let total: f64 = Axis::ALL.iter().map(|&a| sym(a).eval(p).powi(2)).sum();
            assert!((total - t * t).abs() < 1e-13);
        }
    }

    #[test]
    fn built_operators_are_symmetric() {
        let g = GridSpec::new(32, 16.0, 1.0).unwrap();
        let ops: Vec<OperatorExpr> = [
            OpKind::Position(Axis::X),
            OpKind::Momentum(Axis::Y),
            OpKind::AbsPPow(1),
            OpKind::AbsPPow(2),
            OpKind::Time { axis: Axis::Z, t: -0.5 },
            OpKind::Energy { axis: Axis::X, t: 2.0 },
            OpKind::FreeHamiltonian { mass: 1.3 },
        ]
        .into_iter()
        .map(|k| build(k).unwrap())
        .collect();
        for seed in 0..20u64 {
            let f = synthesize_state(&g, &StateSpec::annular_bump(0.6, 3.5).with_seed(seed)).unwrap();
            let h = synthesize_state(&g, &StateSpec::annular_bump(0.8, 4.0).with_seed(seed + 100)).unwrap();
            for op in &ops {
                let of = apply(op, &f).unwrap();
                let lhs = inner_product(&of, &h).unwrap();
                let rhs = inner_product(&f, &apply(op, &h).unwrap()).unwrap();
                assert!((lhs - rhs).norm() <= 1e-8 * of.norm() * h.norm(), "{op}");
            }
        }
    }
}
