//! A small textual language for operator expressions.
//!
//! ```text
//! expr     := '-'? term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := atom ('^' '-'? int)?
//! atom     := x1 | x2 | x3 | p1 | p2 | p3 | '|p|' | i | hbar | t
//!           | int ('/' int)? | '(' expr ')' | '[' expr ',' expr ']'
//! ```
//!
//! `[a, b]` denotes `ab − ba`. Multiplication is always explicit.

mod ast;
mod lower;
mod parse;
pub mod sample;

pub use ast::{format, Ast, Atom, Sign};
pub use lower::{compile, lower};
pub use parse::{parse, ParseError};

/// Parses `text` and renders the normal form of its lowering.
pub fn reduce(text: &str) -> Result<String, String> {
    let ast = parse(text).map_err(|e| e.to_string())?;
    lower(&ast).map(|p| p.to_string()).map_err(|e| e.to_string())
}
