//! Random expression generators for property checks and fuzzing.

use rand::Rng;

use super::ast::{Ast, Atom, Sign};
use super::lower::lower;
use crate::grid::Axis;

fn random_atom(rng: &mut impl Rng) -> Atom {
    let axis = Axis::ALL[rng.gen_range(0..3)];
    match rng.gen_range(0..6) {
        0 => Atom::X(axis),
        1 => Atom::P(axis),
        2 => Atom::AbsP,
        3 => [Atom::I, Atom::Hbar, Atom::T][rng.gen_range(0..3)],
        _ => Atom::Rational { num: rng.gen_range(0..20), den: rng.gen_range(1..10) },
    }
}

/// A random parser-canonical tree of depth at most `max_depth`; negative
/// powers may land on any base, so the result need not lower.
pub fn random_ast(rng: &mut impl Rng, max_depth: usize) -> Ast {
    if max_depth <= 1 || rng.gen_bool(0.25) {
        return Ast::Atom(random_atom(rng));
    }
    let d = max_depth - 1;
    match rng.gen_range(0..4) {
        0 => {
            let n = rng.gen_range(1..4);
            let mut terms: Vec<(Sign, Ast)> = (0..n)
                .map(|_| (if rng.gen_bool(0.5) { Sign::Minus } else { Sign::Plus }, random_ast(rng, d)))
                .collect();
            if n == 1 {
                terms[0].0 = Sign::Minus;
            }
            Ast::Sum(terms)
        }
        1 => Ast::Product((0..rng.gen_range(2..4)).map(|_| random_ast(rng, d)).collect()),
        2 => Ast::Power(Box::new(random_ast(rng, d)), rng.gen_range(-2..4)),
        _ => Ast::Commutator(Box::new(random_ast(rng, d)), Box::new(random_ast(rng, d))),
    }
}

fn numeric_candidate(rng: &mut impl Rng, max_depth: usize) -> Ast {
    if max_depth <= 1 || rng.gen_bool(0.3) {
        let atom = random_atom(rng);
        return match atom {
            Atom::AbsP if rng.gen_bool(0.5) => Ast::Power(Box::new(Ast::Atom(atom)), rng.gen_range(-2..0)),
            Atom::T if rng.gen_bool(0.3) => Ast::Power(Box::new(Ast::Atom(atom)), -1),
            _ => Ast::Atom(atom),
        };
    }
    let d = max_depth - 1;
    match rng.gen_range(0..4) {
        0 => Ast::Sum(vec![
            (Sign::Plus, numeric_candidate(rng, d)),
            (if rng.gen_bool(0.5) { Sign::Minus } else { Sign::Plus }, numeric_candidate(rng, d)),
        ]),
        1 => Ast::Product(vec![numeric_candidate(rng, d), numeric_candidate(rng, d)]),
        2 => Ast::Power(Box::new(numeric_candidate(rng, d)), 2),
        _ => Ast::Commutator(Box::new(numeric_candidate(rng, d)), Box::new(numeric_candidate(rng, d))),
    }
}

/// A random tree that lowers successfully to a polynomial of total degree at
/// most 4 with at most `max_terms` terms.
pub fn random_numeric_ast(rng: &mut impl Rng, max_depth: usize, max_terms: usize) -> Ast {
    loop {
        let ast = numeric_candidate(rng, max_depth);
        if let Ok(poly) = lower(&ast) {
            if poly.degree() <= 4 && poly.len() <= max_terms {
                return ast;
            }
        }
    }
}
