use std::fmt;

use crate::grid::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    X(Axis),
    P(Axis),
    AbsP,
    I,
    Hbar,
    T,
    /// Unsigned literal `num/den` with `den ≥ 1`, kept unreduced.
    Rational { num: u64, den: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Parsed operator expression.
///
/// The parser never produces a one-factor `Product` or a `Sum` holding a
/// single positive term; parenthesized subexpressions keep their own node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Sum(Vec<(Sign, Ast)>),
    Product(Vec<Ast>),
    Power(Box<Ast>, i64),
    Commutator(Box<Ast>, Box<Ast>),
    Atom(Atom),
}

impl Ast {
    pub fn atom(a: Atom) -> Ast {
        Ast::Atom(a)
    }

    pub fn depth(&self) -> usize {
        match self {
            Ast::Atom(_) => 1,
            Ast::Power(b, _) => 1 + b.depth(),
            Ast::Commutator(a, b) => 1 + a.depth().max(b.depth()),
            Ast::Sum(terms) => 1 + terms.iter().map(|(_, t)| t.depth()).max().unwrap_or(0),
            Ast::Product(fs) => 1 + fs.iter().map(Ast::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::X(j) => write!(f, "x{j}"),
            Atom::P(j) => write!(f, "p{j}"),
            Atom::AbsP => f.write_str("|p|"),
            Atom::I => f.write_str("i"),
            Atom::Hbar => f.write_str("hbar"),
            Atom::T => f.write_str("t"),
            Atom::Rational { num, den: 1 } => write!(f, "{num}"),
            Atom::Rational { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

fn parenthesized(f: &mut fmt::Formatter<'_>, a: &Ast, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({a})")
    } else {
        write!(f, "{a}")
    }
}

/// Canonical text: `a + b - c`, `a*b`, `a^-1`, `[a, b]`, with parentheses
/// exactly where the tree would otherwise reparse differently.
impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Atom(a) => write!(f, "{a}"),
            Ast::Sum(terms) => {
                for (n, (sign, term)) in terms.iter().enumerate() {
                    match (n, sign) {
                        (0, Sign::Plus) => {}
                        (0, Sign::Minus) => f.write_str("-")?,
                        (_, Sign::Plus) => f.write_str(" + ")?,
                        (_, Sign::Minus) => f.write_str(" - ")?,
                    }
                    parenthesized(f, term, matches!(term, Ast::Sum(_)))?;
                }
                Ok(())
            }
            Ast::Product(factors) => {
                for (n, factor) in factors.iter().enumerate() {
                    if n > 0 {
                        f.write_str("*")?;
                    }
                    parenthesized(f, factor, matches!(factor, Ast::Sum(_) | Ast::Product(_)))?;
                }
                Ok(())
            }
            Ast::Power(base, e) => {
                parenthesized(f, base, !matches!(**base, Ast::Atom(_) | Ast::Commutator(..)))?;
                write!(f, "^{e}")
            }
            Ast::Commutator(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

/// Canonical text of an expression tree.
pub fn format(ast: &Ast) -> String {
    ast.to_string()
}
