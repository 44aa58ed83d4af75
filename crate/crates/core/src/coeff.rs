//! Coefficient rings Q[t_1..]/(t_i^{N_i}) (x) Lambda(tau_1..tau_m).
//!
//! A [`Scalar`] is a finitely supported map from parameter monomials to
//! rationals. Even parameters are truncated eagerly, odd parameters
//! anticommute and square to zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("scalars live in different parameter rings")]
    RingMismatch,
    #[error("duplicate parameter name `{0}`")]
    DuplicateName(String),
    #[error("truncation order of `{0}` must be positive")]
    BadTruncation(String),
    #[error("no value assigned to even parameter `{0}`")]
    MissingAssignment(String),
    #[error("too many odd parameters (at most 64)")]
    TooManyOdd,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(b: u32) -> Parity {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
    /// (-1)^{self * other}
    pub fn sign_with(self, other: Parity) -> i64 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, o: Parity) -> Parity {
        Parity::from_bit(self.bit() + o.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Number of pairs (i in a, j in b) with i > j; the sign of moving the odd
/// generators of `b` left past those of `a`.
pub fn crossing_parity(a: u64, b: u64) -> u32 {
    let mut n = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 63 { 0 } else { a & !((2u64 << j) - 1) };
        n += above.count_ones();
    }
    n & 1
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParameterRing {
    even: Vec<(String, u32)>,
    odd: Vec<String>,
}

impl ParameterRing {
    pub fn rationals() -> Arc<ParameterRing> {
        Arc::new(ParameterRing {
            even: vec![],
            odd: vec![],
        })
    }

    pub fn new(even: Vec<(String, u32)>, odd: Vec<String>) -> Result<Arc<ParameterRing>, CoeffError> {
        let mut seen = std::collections::HashSet::new();
        for (name, n) in &even {
            if *n == 0 {
                return Err(CoeffError::BadTruncation(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(CoeffError::DuplicateName(name.clone()));
            }
        }
        for name in &odd {
            if !seen.insert(name.clone()) {
                return Err(CoeffError::DuplicateName(name.clone()));
            }
        }
        if odd.len() > 64 {
            return Err(CoeffError::TooManyOdd);
        }
        Ok(Arc::new(ParameterRing { even, odd }))
    }

    pub fn even_params(&self) -> &[(String, u32)] {
        &self.even
    }
    pub fn odd_params(&self) -> &[String] {
        &self.odd
    }
    pub fn is_rationals(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }
    pub fn even_index(&self, name: &str) -> Option<usize> {
        self.even.iter().position(|(n, _)| n == name)
    }
    pub fn odd_index(&self, name: &str) -> Option<usize> {
        self.odd.iter().position(|n| n == name)
    }
    pub fn has_name(&self, name: &str) -> bool {
        self.even_index(name).is_some() || self.odd_index(name).is_some()
    }

    pub fn with_even(&self, name: &str, order: u32) -> Result<Arc<ParameterRing>, CoeffError> {
        let mut even = self.even.clone();
        even.push((name.to_string(), order));
        ParameterRing::new(even, self.odd.clone())
    }

    pub fn with_odd(&self, name: &str) -> Result<Arc<ParameterRing>, CoeffError> {
        let mut odd = self.odd.clone();
        odd.push(name.to_string());
        ParameterRing::new(self.even.clone(), odd)
    }

    pub fn unit_monomial(&self) -> PMono {
        PMono {
            even: vec![0; self.even.len()],
            odd: 0,
        }
    }

    pub fn describe(&self) -> String {
        if self.is_rationals() {
            return "Q".into();
        }
        let mut s = String::from("Q");
        if !self.even.is_empty() {
            let parts: Vec<String> = self.even.iter().map(|(n, k)| format!("{n}^{k}")).collect();
            s.push_str(&format!("[{}]/({})", self.even.iter().map(|e| e.0.clone()).collect::<Vec<_>>().join(","), parts.join(",")));
        }
        if !self.odd.is_empty() {
            s.push_str(&format!("[{}]", self.odd.join(",")));
        }
        s
    }
}

/// A parameter monomial: even exponents in declaration order and a bit set of
/// odd generators (written in ascending order).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PMono {
    pub even: Vec<u32>,
    pub odd: u64,
}

impl PMono {
    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.odd.count_ones())
    }
    pub fn is_unit(&self) -> bool {
        self.odd == 0 && self.even.iter().all(|&e| e == 0)
    }
    /// Product with truncation; `None` when the product vanishes. The bool is
    /// true when the odd reordering contributes a minus sign.
    pub fn mul(&self, other: &PMono, ring: &ParameterRing) -> Option<(PMono, bool)> {
        if self.odd & other.odd != 0 {
            return None;
        }
        let mut even = Vec::with_capacity(self.even.len());
        for (i, (a, b)) in self.even.iter().zip(&other.even).enumerate() {
            let e = a + b;
            if e >= ring.even[i].1 {
                return None;
            }
            even.push(e);
        }
        let neg = crossing_parity(self.odd, other.odd) == 1;
        Some((
            PMono {
                even,
                odd: self.odd | other.odd,
            },
            neg,
        ))
    }
    pub fn odd_degree(&self) -> u32 {
        self.odd.count_ones()
    }
    pub fn render(&self, ring: &ParameterRing) -> String {
        let mut parts = vec![];
        for (i, &e) in self.even.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(ring.even[i].0.clone()),
                _ => parts.push(format!("{}^{}", ring.even[i].0, e)),
            }
        }
        let mut bits = self.odd;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            parts.push(ring.odd[j].clone());
        }
        parts.join("*")
    }
}

#[derive(Clone, Debug)]
pub struct Scalar {
    ring: Arc<ParameterRing>,
    terms: BTreeMap<PMono, Q>,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}
impl Eq for Scalar {}

pub fn same_ring(a: &Arc<ParameterRing>, b: &Arc<ParameterRing>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Scalar {
    pub fn zero(ring: &Arc<ParameterRing>) -> Scalar {
        Scalar {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }
    pub fn one(ring: &Arc<ParameterRing>) -> Scalar {
        Scalar::from_rational(ring, Q::one())
    }
    pub fn from_int(ring: &Arc<ParameterRing>, n: i64) -> Scalar {
        Scalar::from_rational(ring, q(n))
    }
    pub fn from_rational(ring: &Arc<ParameterRing>, c: Q) -> Scalar {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(ring.unit_monomial(), c);
        }
        Scalar {
            ring: ring.clone(),
            terms,
        }
    }
    pub fn rational(c: Q) -> Scalar {
        Scalar::from_rational(&ParameterRing::rationals(), c)
    }
    pub fn monomial(ring: &Arc<ParameterRing>, m: PMono, c: Q) -> Scalar {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Scalar {
            ring: ring.clone(),
            terms,
        }
    }
    /// The generator with the given name (even or odd).
    pub fn param(ring: &Arc<ParameterRing>, name: &str) -> Result<Scalar, CoeffError> {
        let mut m = ring.unit_monomial();
        if let Some(i) = ring.even_index(name) {
            m.even[i] = 1;
            if ring.even[i].1 <= 1 {
                return Ok(Scalar::zero(ring));
            }
        } else if let Some(j) = ring.odd_index(name) {
            m.odd = 1u64 << j;
        } else {
            return Err(CoeffError::Parse(format!("unknown parameter `{name}`")));
        }
        Ok(Scalar::monomial(ring, m, Q::one()))
    }

    pub fn ring(&self) -> &Arc<ParameterRing> {
        &self.ring
    }
    pub fn terms(&self) -> &BTreeMap<PMono, Q> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_term().is_one()
    }
    pub fn constant_term(&self) -> Q {
        self.terms
            .get(&self.ring.unit_monomial())
            .cloned()
            .unwrap_or_else(Q::zero)
    }
    /// The rational value when the scalar has no parameter part.
    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_unit() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// `Some(parity)` for homogeneous scalars, `None` when inhomogeneous.
    /// Zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = match it.next() {
            None => return Some(Parity::Even),
            Some(p) => p,
        };
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn try_add(&self, o: &Scalar) -> Result<Scalar, CoeffError> {
        if !same_ring(&self.ring, &o.ring) {
            return Err(CoeffError::RingMismatch);
        }
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            add_term(&mut terms, m.clone(), c.clone());
        }
        Ok(Scalar {
            ring: self.ring.clone(),
            terms,
        })
    }

    pub fn try_mul(&self, o: &Scalar) -> Result<Scalar, CoeffError> {
        if !same_ring(&self.ring, &o.ring) {
            return Err(CoeffError::RingMismatch);
        }
        let mut terms = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if let Some((m, neg)) = a.mul(b, &self.ring) {
                    let c = ca * cb;
                    add_term(&mut terms, m, if neg { -c } else { c });
                }
            }
        }
        Ok(Scalar {
            ring: self.ring.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: &Q) -> Scalar {
        if c.is_zero() {
            return Scalar::zero(&self.ring);
        }
        Scalar {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// Multiplies by (-1)^{p} applied monomial-wise with the monomial parity:
    /// the grading automorphism raised to `p`.
    pub fn parity_twist(&self) -> Scalar {
        Scalar {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), if m.parity().is_odd() { -x.clone() } else { x.clone() }))
                .collect(),
        }
    }

    /// Part of the scalar whose monomials have the given parity.
    pub fn part(&self, p: Parity) -> Scalar {
        Scalar {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.parity() == p)
                .map(|(m, x)| (m.clone(), x.clone()))
                .collect(),
        }
    }

    /// Substitutes rationals for the even parameters and sends odd ones to 0.
    pub fn evaluate(&self, assignment: &HashMap<String, Q>) -> Result<Q, CoeffError> {
        let mut vals = Vec::with_capacity(self.ring.even.len());
        for (name, _) in &self.ring.even {
            match assignment.get(name) {
                Some(v) => vals.push(v.clone()),
                None => return Err(CoeffError::MissingAssignment(name.clone())),
            }
        }
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            if m.odd != 0 {
                continue;
            }
            let mut t = c.clone();
            for (i, &e) in m.even.iter().enumerate() {
                t *= num_traits::pow(vals[i].clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Re-expresses the scalar in a ring containing all of its parameter names.
    pub fn extend_to(&self, ring: &Arc<ParameterRing>) -> Result<Scalar, CoeffError> {
        if same_ring(&self.ring, ring) {
            return Ok(self.clone());
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut nm = ring.unit_monomial();
            for (i, &e) in m.even.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = &self.ring.even[i].0;
                let j = ring.even_index(name).ok_or(CoeffError::RingMismatch)?;
                if e >= ring.even[j].1 {
                    nm.even.clear();
                    break;
                }
                nm.even[j] = e;
            }
            if nm.even.len() != ring.even.len() {
                continue;
            }
            // Odd names are re-indexed; collect the new indices in the old order
            // and sort them, tracking the permutation sign.
            let mut idx = vec![];
            let mut bits = m.odd;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let j = ring.odd_index(&self.ring.odd[i]).ok_or(CoeffError::RingMismatch)?;
                idx.push(j);
            }
            let mut inv = 0;
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    if idx[a] > idx[b] {
                        inv += 1;
                    }
                }
            }
            nm.odd = idx.iter().fold(0u64, |acc, &j| acc | (1u64 << j));
            add_term(&mut terms, nm, if inv % 2 == 1 { -c.clone() } else { c.clone() });
        }
        Ok(Scalar {
            ring: ring.clone(),
            terms,
        })
    }

    /// Highest power of the named even parameter that divides nothing away:
    /// returns the coefficient scalar of `name^k` (other parameters kept).
    pub fn coefficient_of_even(&self, name: &str, k: u32) -> Scalar {
        let mut terms = BTreeMap::new();
        if let Some(i) = self.ring.even_index(name) {
            for (m, c) in &self.terms {
                if m.even[i] == k {
                    let mut nm = m.clone();
                    nm.even[i] = 0;
                    terms.insert(nm, c.clone());
                }
            }
        }
        Scalar {
            ring: self.ring.clone(),
            terms,
        }
    }

    /// The rational coefficient of one monomial.
    pub fn coefficient(&self, m: &PMono) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn parse(ring: &Arc<ParameterRing>, text: &str) -> Result<Scalar, CoeffError> {
        let e = expr::parse(text)?;
        eval_scalar(ring, &e)
    }
}

fn add_term(terms: &mut BTreeMap<PMono, Q>, m: PMono, c: Q) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let v = o.get() + c;
            if v.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = v;
            }
        }
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

fn eval_scalar(ring: &Arc<ParameterRing>, e: &expr::Expr) -> Result<Scalar, CoeffError> {
    use expr::Expr;
    Ok(match e {
        Expr::Num(c) => Scalar::from_rational(ring, c.clone()),
        Expr::Name(n) => Scalar::param(ring, n)?,
        Expr::Add(a, b) => eval_scalar(ring, a)?.try_add(&eval_scalar(ring, b)?)?,
        Expr::Sub(a, b) => eval_scalar(ring, a)?.try_add(&-eval_scalar(ring, b)?)?,
        Expr::Mul(a, b) => eval_scalar(ring, a)?.try_mul(&eval_scalar(ring, b)?)?,
        Expr::Div(a, b) => {
            let d = eval_scalar(ring, b)?
                .as_rational()
                .filter(|d| !d.is_zero())
                .ok_or_else(|| CoeffError::Parse("division only by nonzero rationals".into()))?;
            eval_scalar(ring, a)?.scale(&(Q::one() / d))
        }
        Expr::Neg(a) => -eval_scalar(ring, a)?,
        Expr::Pow(a, k) => {
            let base = eval_scalar(ring, a)?;
            let mut acc = Scalar::one(ring);
            for _ in 0..*k {
                acc = acc.try_mul(&base)?;
            }
            acc
        }
    })
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            ring: self.ring,
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl<'a> Neg for &'a Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}

// Operator sugar panics on ring mismatch; library code uses try_* where the
// rings can differ.
impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        self.try_add(o).expect("ring mismatch")
    }
}
impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self.try_add(&-o).expect("ring mismatch")
    }
}
impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        self.try_mul(o).expect("ring mismatch")
    }
}

pub fn fmt_rational(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if m.is_unit() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{}", m.render(&self.ring))?;
            } else if a.is_integer() {
                write!(f, "{}*{}", fmt_rational(&a), m.render(&self.ring))?;
            } else {
                write!(f, "({})*{}", fmt_rational(&a), m.render(&self.ring))?;
            }
        }
        Ok(())
    }
}

/// Tiny arithmetic-expression parser shared by the scalar and Grassmann
/// text formats.
pub mod expr {
    use super::{CoeffError, Q};
    use num_bigint::BigInt;

    #[derive(Debug, Clone)]
    pub enum Expr {
        Num(Q),
        Name(String),
        Add(Box<Expr>, Box<Expr>),
        Sub(Box<Expr>, Box<Expr>),
        Mul(Box<Expr>, Box<Expr>),
        Div(Box<Expr>, Box<Expr>),
        Neg(Box<Expr>),
        Pow(Box<Expr>, u32),
    }

    #[derive(Debug, Clone, PartialEq)]
    enum Tok {
        Int(BigInt),
        Name(String),
        Sym(char),
    }

    fn lex(s: &str) -> Result<Vec<Tok>, CoeffError> {
        let cs: Vec<char> = s.chars().collect();
        let mut i = 0;
        let mut out = vec![];
        while i < cs.len() {
            let c = cs[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let st = i;
                while i < cs.len() && cs[i].is_ascii_digit() {
                    i += 1;
                }
                let t: String = cs[st..i].iter().collect();
                out.push(Tok::Int(t.parse().unwrap()));
            } else if c.is_alphabetic() || c == '_' {
                let st = i;
                while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || cs[i] == '\'') {
                    i += 1;
                }
                out.push(Tok::Name(cs[st..i].iter().collect()));
            } else if "+-*/^()".contains(c) {
                out.push(Tok::Sym(c));
                i += 1;
            } else {
                return Err(CoeffError::Parse(format!("unexpected character `{c}`")));
            }
        }
        Ok(out)
    }

    struct P {
        toks: Vec<Tok>,
        pos: usize,
    }

    impl P {
        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos)
        }
        fn eat(&mut self, c: char) -> bool {
            if self.peek() == Some(&Tok::Sym(c)) {
                self.pos += 1;
                true
            } else {
                false
            }
        }
        fn expr(&mut self) -> Result<Expr, CoeffError> {
            let mut lhs = self.term()?;
            loop {
                if self.eat('+') {
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                } else if self.eat('-') {
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                } else {
                    return Ok(lhs);
                }
            }
        }
        fn term(&mut self) -> Result<Expr, CoeffError> {
            let mut lhs = self.unary()?;
            loop {
                if self.eat('*') {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                } else if self.eat('/') {
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                } else {
                    return Ok(lhs);
                }
            }
        }
        fn unary(&mut self) -> Result<Expr, CoeffError> {
            if self.eat('-') {
                return Ok(Expr::Neg(Box::new(self.unary()?)));
            }
            if self.eat('+') {
                return self.unary();
            }
            let base = self.atom()?;
            if self.eat('^') {
                match self.toks.get(self.pos).cloned() {
                    Some(Tok::Int(k)) => {
                        self.pos += 1;
                        let k: u32 = k
                            .try_into()
                            .map_err(|_| CoeffError::Parse("exponent too large".into()))?;
                        return Ok(Expr::Pow(Box::new(base), k));
                    }
                    _ => return Err(CoeffError::Parse("expected integer exponent".into())),
                }
            }
            Ok(base)
        }
        fn atom(&mut self) -> Result<Expr, CoeffError> {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    Ok(Expr::Num(Q::from_integer(n)))
                }
                Some(Tok::Name(s)) => {
                    self.pos += 1;
                    Ok(Expr::Name(s))
                }
                Some(Tok::Sym('(')) => {
                    self.pos += 1;
                    let e = self.expr()?;
                    if !self.eat(')') {
                        return Err(CoeffError::Parse("missing `)`".into()));
                    }
                    Ok(e)
                }
                other => Err(CoeffError::Parse(format!("unexpected token {other:?}"))),
            }
        }
    }

    pub fn parse(s: &str) -> Result<Expr, CoeffError> {
        let toks = lex(s)?;
        if toks.is_empty() {
            return Err(CoeffError::Parse("empty expression".into()));
        }
        let mut p = P { toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(CoeffError::Parse(format!("trailing input at token {}", p.pos)));
        }
        Ok(e)
    }

    pub fn parse_rational(s: &str) -> Result<Q, CoeffError> {
        fn ev(e: &Expr) -> Result<Q, CoeffError> {
            Ok(match e {
                Expr::Num(c) => c.clone(),
                Expr::Add(a, b) => ev(a)? + ev(b)?,
                Expr::Sub(a, b) => ev(a)? - ev(b)?,
                Expr::Mul(a, b) => ev(a)? * ev(b)?,
                Expr::Div(a, b) => {
                    let d = ev(b)?;
                    if num_traits::Zero::is_zero(&d) {
                        return Err(CoeffError::Parse("division by zero".into()));
                    }
                    ev(a)? / d
                }
                Expr::Neg(a) => -ev(a)?,
                Expr::Pow(a, k) => num_traits::pow(ev(a)?, *k as usize),
                Expr::Name(n) => return Err(CoeffError::Parse(format!("unexpected name `{n}`"))),
            })
        }
        ev(&parse(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring() -> Arc<ParameterRing> {
        ParameterRing::new(
            vec![("t".into(), 3)],
            vec!["tau1".into(), "tau2".into(), "tau3".into()],
        )
        .unwrap()
    }

    #[test]
    fn odd_generators() {
        let r = ring();
        let t1 = Scalar::param(&r, "tau1").unwrap();
        let t2 = Scalar::param(&r, "tau2").unwrap();
        assert!((&t1 * &t1).is_zero());
        assert_eq!(&t1 * &t2, -(&t2 * &t1));
        assert_eq!(t1.parity(), Some(Parity::Odd));
        let one = Scalar::one(&r);
        assert_eq!((&one + &t1).parity(), None);
        assert_eq!(Scalar::rational(qf(3, 2)).parity(), Some(Parity::Even));
    }

    #[test]
    fn truncation() {
        let r = ParameterRing::new(vec![("t".into(), 2)], vec![]).unwrap();
        let x = Scalar::parse(&r, "1 + t").unwrap();
        assert_eq!(&x * &x, Scalar::parse(&r, "1 + 2*t").unwrap());
    }

    #[test]
    fn evaluation() {
        let r = ring();
        let mut a = HashMap::new();
        a.insert("t".to_string(), q(5));
        assert_eq!(Scalar::parse(&r, "1 + t").unwrap().evaluate(&a).unwrap(), q(6));
        assert_eq!(Scalar::parse(&r, "tau1").unwrap().evaluate(&a).unwrap(), q(0));
        a.insert("t".to_string(), qf(1, 2));
        assert_eq!(Scalar::parse(&r, "2*t").unwrap().evaluate(&a).unwrap(), q(1));
        assert_eq!(
            Scalar::parse(&r, "t").unwrap().evaluate(&HashMap::new()),
            Err(CoeffError::MissingAssignment("t".into()))
        );
    }

    #[test]
    fn text_roundtrip() {
        let r = ring();
        let x = Scalar::parse(&r, "3/2 + 2*t - 5*tau1*tau2").unwrap();
        assert_eq!(x.to_string(), "3/2 - 5*tau1*tau2 + 2*t");
        let y = Scalar::parse(&r, &x.to_string()).unwrap();
        assert_eq!(x, y);
        assert_eq!(Scalar::parse(&r, "tau2*tau1").unwrap().to_string(), "-tau1*tau2");
        assert!(Scalar::parse(&r, "3 + sigma").is_err());
    }

    #[test]
    fn ring_mismatch_and_names() {
        let a = Scalar::one(&ring());
        let b = Scalar::one(&ParameterRing::rationals());
        assert_eq!(a.try_mul(&b), Err(CoeffError::RingMismatch));
        assert!(ParameterRing::new(vec![("t".into(), 2)], vec!["t".into()]).is_err());
        assert!(ParameterRing::new(vec![("t".into(), 0)], vec![]).is_err());
    }

    #[test]
    fn extension_reorders_odd_names() {
        let small = ParameterRing::new(vec![], vec!["b".into(), "a".into()]).unwrap();
        let big = ParameterRing::new(vec![], vec!["a".into(), "b".into()]).unwrap();
        let x = Scalar::parse(&small, "b*a").unwrap();
        assert_eq!(x.extend_to(&big).unwrap(), Scalar::parse(&big, "b*a").unwrap());
        assert_eq!(x.extend_to(&big).unwrap().to_string(), "-a*b");
    }

    #[test]
    fn too_many_odd_factors_vanish() {
        let r = ParameterRing::new(vec![], vec!["a".into(), "b".into()]).unwrap();
        let x = Scalar::parse(&r, "1 + a + 2*b").unwrap();
        let y = Scalar::parse(&r, "a - b").unwrap();
        let z = Scalar::parse(&r, "3*b + a").unwrap();
        let w = Scalar::parse(&r, "b").unwrap();
        assert!((&(&y * &z) * &w).is_zero());
        assert!(!(&x * &y).is_zero());
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        proptest::collection::vec((-3i64..4, 0u32..3, 0u64..8), 0..5).prop_map(|v| {
            let r = ring();
            let mut s = Scalar::zero(&r);
            for (c, e, o) in v {
                let m = PMono { even: vec![e], odd: o };
                s = &s + &Scalar::monomial(&r, m, q(c));
            }
            s
        })
    }

    proptest! {
        #[test]
        fn associative(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn graded_commutative(a in arb_scalar(), b in arb_scalar()) {
            for pa in [Parity::Even, Parity::Odd] {
                for pb in [Parity::Even, Parity::Odd] {
                    let (x, y) = (a.part(pa), b.part(pb));
                    let lhs = &x * &y;
                    let rhs = &y * &x;
                    let rhs = if pa.is_odd() && pb.is_odd() { -rhs } else { rhs };
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }

        #[test]
        fn evaluation_is_multiplicative(a in arb_scalar(), b in arb_scalar(), v in -5i64..5) {
            let mut asg = HashMap::new();
            asg.insert("t".to_string(), qf(v, 3));
            // Truncation at t^3 makes evaluation a homomorphism only modulo
            // t^3; compare on products whose t-degree stays below 3.
            let a1 = a.coefficient_of_even("t", 0);
            let b1 = b.coefficient_of_even("t", 0);
            prop_assert_eq!((&a1 * &b1).evaluate(&asg).unwrap(),
                a1.evaluate(&asg).unwrap() * b1.evaluate(&asg).unwrap());
        }
    }
}
