//! Exact noncommutative algebra generated by `x_j`, `p_j` and `R = |p|`.
//!
//! Polynomials are kept in normal order `x^α p^β R^s` with Gaussian-rational
//! coefficients carrying separate powers of `ħ` and `t`.

mod poly;
mod scalar;

pub use poly::{commutator, nc_mul, Coefficient, Key, NCMonomial, NCPoly};
pub use scalar::Scalar;

use crate::grid::Axis;

/// `(t_j, e_j)` with `t_j = t·p_j·R⁻¹` and `e_j = (1/4)t⁻¹(R·x_j + x_j·R)`.
pub fn build_time_energy_ops(axis: Axis) -> (NCPoly, NCPoly) {
    let t = NCPoly::t_pow(1);
    let t_op = nc_mul(&nc_mul(&t, &NCPoly::p(axis)), &NCPoly::abs_p_pow(-1));
    let r = NCPoly::abs_p_pow(1);
    let x = NCPoly::x(axis);
    let sym = &nc_mul(&r, &x) + &nc_mul(&x, &r);
    let e_op = nc_mul(&NCPoly::t_pow(-1), &sym).scale(&Scalar::ratio(1, 4));
    (t_op, e_op)
}

/// `Σ_j template(j)`, followed by the isotropic merge `p₁² + p₂² + p₃² → R²`.
pub fn sum_over_axes(template: impl Fn(Axis) -> NCPoly) -> NCPoly {
    let total = Axis::ALL.iter().fold(NCPoly::zero(), |acc, &j| &acc + &template(j));
    poly::isotropic_reduce(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x(j: usize) -> NCPoly {
        NCPoly::x(Axis::new(j).unwrap())
    }

    fn p(j: usize) -> NCPoly {
        NCPoly::p(Axis::new(j).unwrap())
    }

    fn r(s: i32) -> NCPoly {
        NCPoly::abs_p_pow(s)
    }

    fn hbar() -> NCPoly {
        NCPoly::hbar()
    }

    fn c(s: Scalar) -> NCPoly {
        NCPoly::scalar(s)
    }

    fn i_hbar() -> NCPoly {
        &c(Scalar::i()) * &hbar()
    }

    fn prod(factors: &[NCPoly]) -> NCPoly {
        factors.iter().fold(NCPoly::one(), |acc, f| &acc * f)
    }

    #[test]
    fn canonical_pair_rewrites() {
        assert_eq!(&p(1) * &x(1), &prod(&[x(1), p(1)]) - &i_hbar());
        assert_eq!(&p(2) * &x(1), prod(&[x(1), p(2)]));
        assert_eq!(&x(1) * &p(2), prod(&[x(1), p(2)]));
        assert_eq!(commutator(&x(1), &p(1)), i_hbar());
        assert!(commutator(&x(1), &x(2)).is_zero());
        assert!(commutator(&p(3), &r(-1)).is_zero());
    }

    #[test]
    fn abs_p_against_position() {
        let expected = &prod(&[x(1), r(1)]) - &prod(&[i_hbar(), p(1), r(-1)]);
        assert_eq!(&r(1) * &x(1), expected);
        assert_eq!(commutator(&x(1), &r(1)), prod(&[i_hbar(), p(1), r(-1)]));
        assert_eq!(commutator(&x(1), &r(1)).to_string(), "i*hbar*p1*|p|^-1");
    }

    #[test]
    fn radial_powers_compose() {
        assert_eq!(&r(2) * &r(-2), NCPoly::one());
        for a in -3..=3 {
            for b in -3..=3 {
                assert_eq!(&r(a) * &r(b), r(a + b), "{a} {b}");
            }
        }
    }

    #[test]
    fn time_and_energy_normal_forms() {
        let (t1, e1) = build_time_energy_ops(Axis::X);
        let monos = t1.monomials();
        assert_eq!(monos.len(), 1);
        assert_eq!(monos[0].coeff, Coefficient { value: Scalar::one(), hbar_pow: 0, t_pow: 1 });
        assert_eq!(monos[0].p_exp, [1, 0, 0]);
        assert_eq!(monos[0].x_exp, [0, 0, 0]);
        assert_eq!(monos[0].r_pow, -1);

        // Hand computation: one application of the R^s rule to R·x₁.
        let expected = &prod(&[c(Scalar::ratio(1, 2)), NCPoly::t_pow(-1), x(1), r(1)])
            - &prod(&[c(Scalar::imag(1, 4)), hbar(), NCPoly::t_pow(-1), p(1), r(-1)]);
        assert_eq!(e1, expected);
        assert_eq!(e1.to_string(), "-1/4*i*hbar*t^-1*p1*|p|^-1 + 1/2*t^-1*x1*|p|");
    }

    #[test]
    fn component_commutators() {
        for axis in Axis::ALL {
            let (tj, ej) = build_time_energy_ops(axis);
            let four = commutator(&tj, &ej).scale(&Scalar::int(4));
            let mut pj2 = NCPoly::one();
            for _ in 0..2 {
                pj2 = &pj2 * &NCPoly::p(axis);
            }
            // 2ħ/i + 2iħ p_j² R⁻²
            let expected = &prod(&[c(Scalar::imag(-2, 1)), hbar()])
                + &prod(&[c(Scalar::imag(2, 1)), hbar(), pj2, r(-2)]);
            assert_eq!(four, expected, "axis {axis}");
            assert!(four.iter().all(|(k, _)| k.t_pow == 0));
        }
        let (t1, e1) = build_time_energy_ops(Axis::X);
        assert_eq!(commutator(&t1, &e1).to_string(), "-1/2*i*hbar + 1/2*i*hbar*p1^2*|p|^-2");
    }

    #[test]
    fn sum_rule_is_exact() {
        let total = sum_over_axes(|j| {
            let (tj, ej) = build_time_energy_ops(j);
            commutator(&tj, &ej)
        });
        let monos = total.monomials();
        assert_eq!(monos.len(), 1);
        let m = &monos[0];
        assert_eq!(m.coeff, Coefficient { value: Scalar::imag(-1, 1), hbar_pow: 1, t_pow: 0 });
        assert_eq!((m.x_exp, m.p_exp, m.r_pow), ([0; 3], [0; 3], 0));
        assert_eq!(total, prod(&[c(Scalar::imag(-1, 1)), hbar()]));
    }

    #[test]
    fn isotropic_merge() {
        let unit = sum_over_axes(|j| prod(&[NCPoly::p(j), NCPoly::p(j), r(-2)]));
        assert_eq!(unit, NCPoly::one());
        let plain = sum_over_axes(NCPoly::p);
        assert_eq!(plain, &(&p(1) + &p(2)) + &p(3));
        let unequal = sum_over_axes(|j| prod(&[c(Scalar::int(j.label() as i64)), NCPoly::p(j), NCPoly::p(j)]));
        assert_eq!(unequal.len(), 3);
    }

    #[test]
    fn rendering_is_canonical() {
        assert_eq!(NCPoly::zero().to_string(), "0");
        assert_eq!(NCPoly::one().to_string(), "1");
        assert_eq!((&p(1) * &x(1)).to_string(), "-i*hbar + x1*p1");
        let z = c(&Scalar::ratio(1, 2) + &Scalar::imag(-3, 1));
        assert_eq!((&z * &x(2)).to_string(), "(1/2 - 3*i)*x2");
        assert_eq!((&(&NCPoly::zero() - &x(1)) * &x(1)).to_string(), "-x1^2");
    }

    fn leaf() -> impl Strategy<Value = NCPoly> {
        prop_oneof![
            (1usize..=3).prop_map(x),
            (1usize..=3).prop_map(p),
            (-2i32..=2).prop_map(r),
            Just(hbar()),
            Just(c(Scalar::i())),
            prop_oneof![Just(1), Just(-1)].prop_map(NCPoly::t_pow),
            (-3i64..=3, 1i64..=3).prop_map(|(a, b)| c(Scalar::ratio(a, b))),
        ]
    }

    fn poly_strategy() -> impl Strategy<Value = NCPoly> {
        leaf().prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
                (inner.clone(), inner).prop_map(|(a, b)| &a * &b),
            ]
        })
    }

    fn generator() -> impl Strategy<Value = NCPoly> {
        prop_oneof![
            (1usize..=3).prop_map(x),
            (1usize..=3).prop_map(p),
            prop_oneof![Just(1), Just(-1)].prop_map(r),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn multiplication_is_associative(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
            prop_assert_eq!(nc_mul(&nc_mul(&a, &b), &c), nc_mul(&a, &nc_mul(&b, &c)));
        }

        #[test]
        fn multiplication_distributes(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        }

        #[test]
        fn jacobi_identity(a in generator(), b in generator(), c in generator()) {
            let total = &(&commutator(&a, &commutator(&b, &c)) + &commutator(&b, &commutator(&c, &a)))
                + &commutator(&c, &commutator(&a, &b));
            prop_assert!(total.is_zero(), "{}", total);
        }

        // Oracle: f(p)·x_k = x_k·f(p) − iħ·∂f/∂p_k for f = p^β R^s, with
        // ∂(p^β R^s)/∂p_k = β_k p^{β−e_k} R^s + s p^{β+e_k} R^{s−2}.
        #[test]
        fn momentum_functions_obey_leibniz(beta in prop::array::uniform3(0u32..3), s in -3i32..=3, k in 0usize..3) {
            let mono = |b: [u32; 3], s: i32, c: Scalar| {
                NCPoly::term(Key { x_exp: [0; 3], p_exp: b, r_pow: s, hbar_pow: 0, t_pow: 0 }, c)
            };
            let f = mono(beta, s, Scalar::one());
            let axis = Axis::ALL[k];
            let mut deriv = NCPoly::zero();
            if beta[k] > 0 {
                let mut b = beta;
                b[k] -= 1;
                deriv = &deriv + &mono(b, s, Scalar::int(i64::from(beta[k])));
            }
            if s != 0 {
                let mut b = beta;
                b[k] += 1;
                deriv = &deriv + &mono(b, s - 2, Scalar::int(i64::from(s)));
            }
            let expected = &(&NCPoly::x(axis) * &f) - &(&i_hbar() * &deriv);
            prop_assert_eq!(&f * &NCPoly::x(axis), expected);
        }

        #[test]
        fn scalars_commute_with_everything(a in poly_strategy(), k in -2i32..=2) {
            let s = &(&hbar() * &NCPoly::t_pow(k)) * &c(Scalar::imag(2, 3));
            prop_assert_eq!(&s * &a, &a * &s);
        }
    }
}
