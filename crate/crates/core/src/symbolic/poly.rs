use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::Scalar;
use crate::grid::Axis;

/// Scalar factor of a monomial: `value · ħ^hbar_pow · t^t_pow`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coefficient {
    pub value: Scalar,
    pub hbar_pow: u32,
    pub t_pow: i32,
}

/// `coeff · x^α p^β R^s` in normal order (x leftmost, then p, then `R = |p|`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCMonomial {
    pub coeff: Coefficient,
    pub x_exp: [u32; 3],
    pub p_exp: [u32; 3],
    pub r_pow: i32,
}

/// Identity of a monomial up to its Gaussian-rational factor. The derived
/// ordering is the canonical term order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub x_exp: [u32; 3],
    pub p_exp: [u32; 3],
    pub r_pow: i32,
    pub hbar_pow: u32,
    pub t_pow: i32,
}

impl Key {
    const UNIT: Key = Key { x_exp: [0; 3], p_exp: [0; 3], r_pow: 0, hbar_pow: 0, t_pow: 0 };

    fn letters(&self) -> Vec<Letter> {
        let mut w = Vec::new();
        for k in 0..3 {
            w.extend(std::iter::repeat_n(Letter::X(k as u8), self.x_exp[k] as usize));
        }
        for k in 0..3 {
            w.extend(std::iter::repeat_n(Letter::P(k as u8), self.p_exp[k] as usize));
        }
        if self.r_pow != 0 {
            w.push(Letter::R(self.r_pow));
        }
        w
    }

    /// Total degree in `x` and `p` plus `|s|`.
    pub fn degree(&self) -> u32 {
        self.x_exp.iter().sum::<u32>() + self.p_exp.iter().sum::<u32>() + self.r_pow.unsigned_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Letter {
    X(u8),
    P(u8),
    R(i32),
}

/// A word still being rewritten.
struct Word {
    coeff: Scalar,
    hbar_pow: u32,
    t_pow: i32,
    letters: Vec<Letter>,
}

impl Word {
    fn with(&self, coeff: Scalar, extra_hbar: u32, letters: Vec<Letter>) -> Word {
        Word { coeff, hbar_pow: self.hbar_pow + extra_hbar, t_pow: self.t_pow, letters }
    }

    fn key(&self) -> Key {
        let mut key = Key { hbar_pow: self.hbar_pow, t_pow: self.t_pow, ..Key::UNIT };
        for l in &self.letters {
            match *l {
                Letter::X(k) => key.x_exp[k as usize] += 1,
                Letter::P(k) => key.p_exp[k as usize] += 1,
                Letter::R(s) => key.r_pow += s,
            }
        }
        key
    }
}

/// One rewrite at the first out-of-order adjacent pair, or `None` when the
/// word is already normal-ordered.
fn rewrite(w: &Word) -> Option<Vec<Word>> {
    use Letter::*;
    let minus_i = Scalar::imag(-1, 1);
    for i in 0..w.letters.len().saturating_sub(1) {
        let (a, b) = (w.letters[i], w.letters[i + 1]);
        let splice = |mid: &[Letter]| {
            let mut v = w.letters[..i].to_vec();
            v.extend_from_slice(mid);
            v.extend_from_slice(&w.letters[i + 2..]);
            v
        };
        let swapped = || w.with(w.coeff.clone(), 0, splice(&[b, a]));
        match (a, b) {
            (X(j), X(k)) | (P(j), P(k)) if j > k => return Some(vec![swapped()]),
            (R(_), P(_)) => return Some(vec![swapped()]),
            (R(s), R(u)) => {
                let merged = if s + u == 0 { splice(&[]) } else { splice(&[R(s + u)]) };
                return Some(vec![w.with(w.coeff.clone(), 0, merged)]);
            }
            // p_j x_k = x_k p_j − iħ δ_jk
            (P(j), X(k)) => {
                let mut out = vec![swapped()];
                if j == k {
                    out.push(w.with(&w.coeff * &minus_i, 1, splice(&[])));
                }
                return Some(out);
            }
            // R^s x_k = x_k R^s − iħ s p_k R^{s−2}
            (R(s), X(k)) => {
                let tail: &[Letter] = if s == 2 { &[P(k)] } else { &[P(k), R(s - 2)] };
                let c = &(&w.coeff * &minus_i) * &Scalar::int(i64::from(s));
                return Some(vec![swapped(), w.with(c, 1, splice(tail))]);
            }
            _ => {}
        }
    }
    None
}

/// A polynomial in the normal-ordered monomials, with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NCPoly {
    terms: BTreeMap<Key, Scalar>,
}

impl NCPoly {
    pub fn zero() -> NCPoly {
        NCPoly::default()
    }

    pub fn one() -> NCPoly {
        NCPoly::scalar(Scalar::one())
    }

    pub fn scalar(c: Scalar) -> NCPoly {
        NCPoly::term(Key::UNIT, c)
    }

    pub fn term(key: Key, c: Scalar) -> NCPoly {
        let mut p = NCPoly::zero();
        p.accumulate(key, &c);
        p
    }

    pub fn x(axis: Axis) -> NCPoly {
        let mut key = Key::UNIT;
        key.x_exp[axis.index()] = 1;
        NCPoly::term(key, Scalar::one())
    }

    pub fn p(axis: Axis) -> NCPoly {
        let mut key = Key::UNIT;
        key.p_exp[axis.index()] = 1;
        NCPoly::term(key, Scalar::one())
    }

    /// `R^s = |p|^s`.
    pub fn abs_p_pow(s: i32) -> NCPoly {
        NCPoly::term(Key { r_pow: s, ..Key::UNIT }, Scalar::one())
    }

    pub fn hbar() -> NCPoly {
        NCPoly::term(Key { hbar_pow: 1, ..Key::UNIT }, Scalar::one())
    }

    pub fn t_pow(k: i32) -> NCPoly {
        NCPoly::term(Key { t_pow: k, ..Key::UNIT }, Scalar::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &Key) -> Option<&Scalar> {
        self.terms.get(key)
    }

    pub fn monomials(&self) -> Vec<NCMonomial> {
        self.terms
            .iter()
            .map(|(k, c)| NCMonomial {
                coeff: Coefficient { value: c.clone(), hbar_pow: k.hbar_pow, t_pow: k.t_pow },
                x_exp: k.x_exp,
                p_exp: k.p_exp,
                r_pow: k.r_pow,
            })
            .collect()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Key::degree).max().unwrap_or(0)
    }

    fn accumulate(&mut self, key: Key, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: &Scalar) -> NCPoly {
        let mut out = NCPoly::zero();
        for (k, v) in &self.terms {
            out.accumulate(*k, &(v * c));
        }
        out
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &NCPoly) -> NCPoly {
        commutator(self, other)
    }

    /// `self^k` for `k ≥ 0`.
    pub fn pow(&self, k: u32) -> NCPoly {
        (0..k).fold(NCPoly::one(), |acc, _| nc_mul(&acc, self))
    }
}

/// Normal-ordered product: the concatenated words are rewritten with the
/// canonical commutation rule and the derivative rule for `R^s` until no rule
/// applies.
pub fn nc_mul(a: &NCPoly, b: &NCPoly) -> NCPoly {
    let mut out = NCPoly::zero();
    let mut stack = Vec::new();
    for (ka, ca) in &a.terms {
        for (kb, cb) in &b.terms {
            let mut letters = ka.letters();
            letters.extend(kb.letters());
            stack.push(Word {
                coeff: ca * cb,
                hbar_pow: ka.hbar_pow + kb.hbar_pow,
                t_pow: ka.t_pow + kb.t_pow,
                letters,
            });
        }
    }
    while let Some(w) = stack.pop() {
        match rewrite(&w) {
            Some(next) => stack.extend(next),
            None => out.accumulate(w.key(), &w.coeff),
        }
    }
    out
}

pub fn commutator(a: &NCPoly, b: &NCPoly) -> NCPoly {
    &nc_mul(a, b) - &nc_mul(b, a)
}

/// Merges `c·m·p₁² + c·m·p₂² + c·m·p₃²` into `c·m·R²` until no triple remains.
pub(crate) fn isotropic_reduce(mut poly: NCPoly) -> NCPoly {
    loop {
        let found = poly.terms.iter().find_map(|(k, c)| {
            if k.p_exp[0] < 2 {
                return None;
            }
            let mut base = *k;
            base.p_exp[0] -= 2;
            let partner = |axis: usize| {
                let mut key = base;
                key.p_exp[axis] += 2;
                key
            };
            let (k2, k3) = (partner(1), partner(2));
            (poly.terms.get(&k2) == Some(c) && poly.terms.get(&k3) == Some(c)).then(|| (*k, k2, k3, base, c.clone()))
        });
        let Some((k1, k2, k3, base, c)) = found else { return poly };
        for k in [k1, k2, k3] {
            poly.terms.remove(&k);
        }
        poly.accumulate(Key { r_pow: base.r_pow + 2, ..base }, &c);
    }
}

impl Add for &NCPoly {
    type Output = NCPoly;
    fn add(self, o: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.accumulate(*k, c);
        }
        out
    }
}

impl Sub for &NCPoly {
    type Output = NCPoly;
    fn sub(self, o: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.accumulate(*k, &-c);
        }
        out
    }
}

impl Neg for &NCPoly {
    type Output = NCPoly;
    fn neg(self) -> NCPoly {
        self.scale(&Scalar::int(-1))
    }
}

impl Mul for &NCPoly {
    type Output = NCPoly;
    fn mul(self, o: &NCPoly) -> NCPoly {
        nc_mul(self, o)
    }
}

/// Renders one monomial as DSL text.
fn write_term(f: &mut fmt::Formatter<'_>, k: &Key, c: &Scalar) -> fmt::Result {
    let mut factors: Vec<String> = Vec::new();
    let mut push = |base: &str, e: i64| {
        if e != 0 {
            factors.push(if e == 1 { base.to_string() } else { format!("{base}^{e}") });
        }
    };
    push("hbar", i64::from(k.hbar_pow));
    push("t", i64::from(k.t_pow));
    for j in 0..3 {
        push(&format!("x{}", j + 1), i64::from(k.x_exp[j]));
    }
    for j in 0..3 {
        push(&format!("p{}", j + 1), i64::from(k.p_exp[j]));
    }
    push("|p|", i64::from(k.r_pow));
    let body = factors.join("*");
    if factors.is_empty() {
        write!(f, "{c}")
    } else if c.is_one() {
        f.write_str(&body)
    } else if *c == Scalar::int(-1) {
        write!(f, "-{body}")
    } else {
        write!(f, "{c}*{body}")
    }
}

/// Canonical DSL rendering, e.g. `-1/2*i*hbar + 1/2*i*hbar*p1^2*|p|^-2`.
impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            let text = TermText(k, c).to_string();
            match (n, text.strip_prefix('-')) {
                (0, _) => f.write_str(&text)?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                (_, None) => write!(f, " + {text}")?,
            }
        }
        Ok(())
    }
}

struct TermText<'a>(&'a Key, &'a Scalar);

impl fmt::Display for TermText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.0, self.1)
    }
}

impl fmt::Display for NCMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let key = Key {
            x_exp: self.x_exp,
            p_exp: self.p_exp,
            r_pow: self.r_pow,
            hbar_pow: self.coeff.hbar_pow,
            t_pow: self.coeff.t_pow,
        };
        write_term(f, &key, &self.coeff.value)
    }
}
