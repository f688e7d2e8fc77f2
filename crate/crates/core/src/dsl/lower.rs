use num_complex::Complex64;

use super::ast::{Ast, Atom, Sign};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::ops::{build, OpKind, OperatorExpr};
use crate::symbolic::{commutator, nc_mul, NCPoly, Scalar};

fn exponent(e: i64) -> Result<u32> {
    u32::try_from(e.unsigned_abs()).map_err(|_| Error::Lowering(format!("exponent {e} out of range")))
}

fn negative_power_error(base: &Ast, e: i64) -> Error {
    Error::Lowering(format!("negative power {e} of '{base}' is not allowed"))
}

fn rational(num: u64, den: u64) -> Result<Scalar> {
    let (n, d) = (i64::try_from(num), i64::try_from(den));
    match (n, d) {
        (Ok(n), Ok(d)) => Ok(Scalar::ratio(n, d)),
        _ => Err(Error::Lowering(format!("literal {num}/{den} out of range"))),
    }
}

fn lower_atom(a: Atom) -> Result<NCPoly> {
    Ok(match a {
        Atom::X(j) => NCPoly::x(j),
        Atom::P(j) => NCPoly::p(j),
        Atom::AbsP => NCPoly::abs_p_pow(1),
        Atom::I => NCPoly::scalar(Scalar::i()),
        Atom::Hbar => NCPoly::hbar(),
        Atom::T => NCPoly::t_pow(1),
        Atom::Rational { num, den } => NCPoly::scalar(rational(num, den)?),
    })
}

/// Translates an expression into the exact noncommutative algebra.
///
/// Negative powers are accepted for `|p|`, `t`, `i` and nonzero literals.
pub fn lower(ast: &Ast) -> Result<NCPoly> {
    match ast {
        Ast::Atom(a) => lower_atom(*a),
        Ast::Sum(terms) => terms.iter().try_fold(NCPoly::zero(), |acc, (sign, t)| {
            let v = lower(t)?;
            Ok(match sign {
                Sign::Plus => &acc + &v,
                Sign::Minus => &acc - &v,
            })
        }),
        Ast::Product(fs) => fs.iter().try_fold(NCPoly::one(), |acc, f| Ok(nc_mul(&acc, &lower(f)?))),
        Ast::Commutator(a, b) => Ok(commutator(&lower(a)?, &lower(b)?)),
        Ast::Power(base, e) if *e >= 0 => Ok(lower(base)?.pow(exponent(*e)?)),
        Ast::Power(base, e) => {
            let k = exponent(*e)?;
            let Ast::Atom(atom) = **base else { return Err(negative_power_error(base, *e)) };
            match atom {
                Atom::AbsP => Ok(NCPoly::abs_p_pow(i32::try_from(*e).map_err(|_| negative_power_error(base, *e))?)),
                Atom::T => Ok(NCPoly::t_pow(i32::try_from(*e).map_err(|_| negative_power_error(base, *e))?)),
                Atom::I => Ok(NCPoly::scalar(Scalar::imag(-1, 1).pow(k))),
                Atom::Rational { num, den } if num != 0 => {
                    let inv = rational(num, den)?.inv().ok_or_else(|| negative_power_error(base, *e))?;
                    Ok(NCPoly::scalar(inv.pow(k)))
                }
                _ => Err(negative_power_error(base, *e)),
            }
        }
    }
}

fn scale(c: Complex64) -> OperatorExpr {
    OperatorExpr::Scale(c)
}

fn compile_atom(a: Atom, grid: &GridSpec, t: f64) -> Result<OperatorExpr> {
    match a {
        Atom::X(j) => build(OpKind::Position(j)),
        Atom::P(j) => build(OpKind::Momentum(j)),
        Atom::AbsP => build(OpKind::AbsPPow(1)),
        Atom::I => Ok(scale(Complex64::i())),
        Atom::Hbar => Ok(OperatorExpr::scalar(grid.hbar)),
        Atom::T => Ok(OperatorExpr::scalar(t)),
        Atom::Rational { num, den } => Ok(OperatorExpr::scalar(num as f64 / den as f64)),
    }
}

/// Translates an expression into a numeric pipeline, substituting `grid.hbar`
/// for `hbar` and `t` for the time parameter.
pub fn compile(ast: &Ast, grid: &GridSpec, t: f64) -> Result<OperatorExpr> {
    match ast {
        Ast::Atom(a) => compile_atom(*a, grid, t),
        Ast::Sum(terms) => {
            let parts = terms
                .iter()
                .map(|(sign, term)| {
                    let op = compile(term, grid, t)?;
                    Ok(match sign {
                        Sign::Plus => op,
                        Sign::Minus => op.then_scaled(Complex64::new(-1.0, 0.0)),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(OperatorExpr::Sum(parts))
        }
        Ast::Product(fs) => Ok(OperatorExpr::Compose(fs.iter().map(|f| compile(f, grid, t)).collect::<Result<_>>()?)),
        Ast::Commutator(a, b) => Ok(compile(a, grid, t)?.commutator(compile(b, grid, t)?)),
        Ast::Power(base, e) if *e >= 0 => {
            let op = compile(base, grid, t)?;
            let k = exponent(*e)? as usize;
            Ok(if k == 0 { OperatorExpr::identity() } else { OperatorExpr::Compose(vec![op; k]) })
        }
        Ast::Power(base, e) => {
            let k = exponent(*e)? as i32;
            let Ast::Atom(atom) = **base else { return Err(negative_power_error(base, *e)) };
            match atom {
                Atom::AbsP => build(OpKind::AbsPPow(-k)),
                Atom::T if t == 0.0 => Err(Error::ZeroTime),
                Atom::T => Ok(OperatorExpr::scalar(t.powi(-k))),
                Atom::I => Ok(scale(Complex64::i().powi(-k))),
                Atom::Rational { num, den } if num != 0 => Ok(OperatorExpr::scalar((den as f64 / num as f64).powi(k))),
                _ => Err(negative_power_error(base, *e)),
            }
        }
    }
}
