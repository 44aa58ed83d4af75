//! The Grassmann algebra Lambda(n) over a parameter ring.
//!
//! Monomials are bit sets (bit i-1 stands for xi_i) read in ascending order;
//! a term `c * xi^S` keeps its coefficient on the left.
//! Derivatives act from the left: d_i(xi_{j1}...xi_{jk}) carries the sign
//! (-1)^{#factors in front of xi_i}.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::coeff::{crossing_parity, expr, fmt_rational, CoeffError, ParameterRing, Parity, Scalar, Q};

pub const MAX_VARS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrassmannError {
    #[error("Grassmann elements over different numbers of generators ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("generator index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("too many generators: {0} (max {MAX_VARS})")]
    TooManyVars(usize),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// Sign of xi^a * xi^b = +/- xi^{a|b}; `None` when the sets overlap.
pub fn mono_mul(a: u32, b: u32) -> Option<(u32, bool)> {
    if a & b != 0 {
        return None;
    }
    Some((a | b, crossing_parity(a as u64, b as u64) == 1))
}

/// Left derivative of a monomial: (result, negative?) or `None`.
pub fn mono_partial(i: usize, s: u32) -> Option<(u32, bool)> {
    let bit = 1u32 << i;
    if s & bit == 0 {
        return None;
    }
    let before = (s & (bit - 1)).count_ones();
    Some((s & !bit, before % 2 == 1))
}

#[derive(Clone, Debug)]
pub struct GrassmannElement {
    n: usize,
    ring: Arc<ParameterRing>,
    terms: BTreeMap<u32, Scalar>,
}

impl PartialEq for GrassmannElement {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && crate::coeff::same_ring(&self.ring, &o.ring) && self.terms == o.terms
    }
}
impl Eq for GrassmannElement {}

impl GrassmannElement {
    pub fn zero(n: usize, ring: &Arc<ParameterRing>) -> Self {
        GrassmannElement {
            n,
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }
    pub fn constant(n: usize, c: Scalar) -> Self {
        let ring = c.ring().clone();
        let mut g = GrassmannElement::zero(n, &ring);
        g.add_term(0, c);
        g
    }
    pub fn monomial(n: usize, ring: &Arc<ParameterRing>, s: u32, c: Scalar) -> Self {
        let mut g = GrassmannElement::zero(n, ring);
        g.add_term(s, c);
        g
    }
    pub fn mono_q(n: usize, ring: &Arc<ParameterRing>, s: u32, c: Q) -> Self {
        Self::monomial(n, ring, s, Scalar::from_rational(ring, c))
    }
    /// The generator xi_i, 1-based.
    pub fn generator(n: usize, ring: &Arc<ParameterRing>, i: usize) -> Result<Self, GrassmannError> {
        if i == 0 || i > n {
            return Err(GrassmannError::IndexOutOfRange(i, n));
        }
        Ok(Self::mono_q(n, ring, 1 << (i - 1), Q::one()))
    }
    /// xi_1 ... xi_n
    pub fn top(n: usize, ring: &Arc<ParameterRing>) -> Self {
        Self::mono_q(n, ring, full_mask(n), Q::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn ring(&self) -> &Arc<ParameterRing> {
        &self.ring
    }
    pub fn terms(&self) -> &BTreeMap<u32, Scalar> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coefficient(&self, s: u32) -> Scalar {
        self.terms.get(&s).cloned().unwrap_or_else(|| Scalar::zero(&self.ring))
    }

    pub fn add_term(&mut self, s: u32, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&s) {
            Some(old) => &old + &c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(s, v);
        }
    }

    /// Parity of a homogeneous element (zero counts as even).
    pub fn parity(&self) -> Option<Parity> {
        let mut out: Option<Parity> = None;
        for (s, c) in &self.terms {
            let p = c.parity()? + Parity::from_bit(s.count_ones());
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(Parity::Even))
    }

    fn check(&self, o: &Self) -> Result<(), GrassmannError> {
        if self.n != o.n {
            return Err(GrassmannError::DimensionMismatch(self.n, o.n));
        }
        if !crate::coeff::same_ring(&self.ring, &o.ring) {
            return Err(CoeffError::RingMismatch.into());
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, GrassmannError> {
        self.check(o)?;
        let mut r = self.clone();
        for (s, c) in &o.terms {
            r.add_term(*s, c.clone());
        }
        Ok(r)
    }

    pub fn neg(&self) -> Self {
        GrassmannElement {
            n: self.n,
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(s, c)| (*s, -c)).collect(),
        }
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, GrassmannError> {
        self.try_add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        GrassmannElement {
            n: self.n,
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(s, x)| (*s, x.scale(c)))
                .filter(|(_, x)| !x.is_zero())
                .collect(),
        }
    }

    /// Left multiplication by a ring scalar.
    pub fn scalar_mul(&self, a: &Scalar) -> Result<Self, GrassmannError> {
        let mut r = GrassmannElement::zero(self.n, &self.ring);
        for (s, c) in &self.terms {
            r.add_term(*s, a.try_mul(c)?);
        }
        Ok(r)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, GrassmannError> {
        self.check(o)?;
        let mut r = GrassmannElement::zero(self.n, &self.ring);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if let Some((m, neg)) = mono_mul(*a, *b) {
                    // xi^a passes the coefficient of the right factor.
                    let cb2 = if a.count_ones() % 2 == 1 { cb.parity_twist() } else { cb.clone() };
                    let c = ca.try_mul(&cb2)?;
                    r.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(r)
    }

    /// Left partial derivative d/dxi_i (1-based).
    pub fn partial(&self, i: usize) -> Result<Self, GrassmannError> {
        if i == 0 || i > self.n {
            return Err(GrassmannError::IndexOutOfRange(i, self.n));
        }
        let mut r = GrassmannElement::zero(self.n, &self.ring);
        for (s, c) in &self.terms {
            if let Some((m, neg)) = mono_partial(i - 1, *s) {
                // The odd operator passes the coefficient first.
                let c2 = c.parity_twist();
                r.add_term(m, if neg { -c2 } else { c2 });
            }
        }
        Ok(r)
    }

    pub fn berezin_integral(&self) -> Scalar {
        self.coefficient(full_mask(self.n))
    }

    pub fn constant_term(&self) -> Scalar {
        self.coefficient(0)
    }

    /// Grassmann automorphism twist: xi_i -> -xi_i on the generators and the
    /// parity automorphism on scalars, i.e. multiply each homogeneous part by
    /// (-1)^{parity}.
    pub fn parity_twist(&self) -> Self {
        let mut r = GrassmannElement::zero(self.n, &self.ring);
        for (s, c) in &self.terms {
            let c2 = c.parity_twist();
            r.add_term(*s, if s.count_ones() % 2 == 1 { -c2 } else { c2 });
        }
        r
    }

    pub fn extend_ring(&self, ring: &Arc<ParameterRing>) -> Result<Self, GrassmannError> {
        let mut r = GrassmannElement::zero(self.n, ring);
        for (s, c) in &self.terms {
            r.add_term(*s, c.extend_to(ring)?);
        }
        Ok(r)
    }

    /// Parses `xi1*xi2 - (1/2)*xi3`; other names are ring parameters.
    pub fn parse(n: usize, ring: &Arc<ParameterRing>, text: &str) -> Result<Self, GrassmannError> {
        if n > MAX_VARS {
            return Err(GrassmannError::TooManyVars(n));
        }
        let e = expr::parse(text)?;
        eval(n, ring, &e)
    }
}

pub fn full_mask(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        (1u32 << n) - 1
    }
}

fn eval(n: usize, ring: &Arc<ParameterRing>, e: &expr::Expr) -> Result<GrassmannElement, GrassmannError> {
    use expr::Expr;
    Ok(match e {
        Expr::Num(c) => GrassmannElement::mono_q(n, ring, 0, c.clone()),
        Expr::Name(name) => {
            if let Some(k) = name.strip_prefix("xi").and_then(|d| d.parse::<usize>().ok()) {
                GrassmannElement::generator(n, ring, k)?
            } else {
                GrassmannElement::constant(n, Scalar::param(ring, name)?)
            }
        }
        Expr::Add(a, b) => eval(n, ring, a)?.try_add(&eval(n, ring, b)?)?,
        Expr::Sub(a, b) => eval(n, ring, a)?.try_sub(&eval(n, ring, b)?)?,
        Expr::Mul(a, b) => eval(n, ring, a)?.try_mul(&eval(n, ring, b)?)?,
        Expr::Div(a, b) => {
            let d = eval(n, ring, b)?;
            let d = match (d.terms.len(), d.terms.get(&0).and_then(|c| c.as_rational())) {
                (1, Some(v)) if !v.is_zero() => v,
                _ => return Err(CoeffError::Parse("division only by nonzero rationals".into()).into()),
            };
            eval(n, ring, a)?.scale(&(Q::one() / d))
        }
        Expr::Neg(a) => eval(n, ring, a)?.neg(),
        Expr::Pow(a, k) => {
            let b = eval(n, ring, a)?;
            let mut acc = GrassmannElement::mono_q(n, ring, 0, Q::one());
            for _ in 0..*k {
                acc = acc.try_mul(&b)?;
            }
            acc
        }
    })
}

pub fn render_mono(s: u32) -> String {
    let mut parts = vec![];
    for i in 0..32 {
        if s & (1 << i) != 0 {
            parts.push(format!("xi{}", i + 1));
        }
    }
    parts.join("*")
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in &self.terms {
            let rat = c.as_rational();
            match rat {
                Some(r) => {
                    let neg = r.is_negative();
                    let a = r.abs();
                    if first {
                        if neg {
                            write!(f, "-")?;
                        }
                    } else {
                        write!(f, " {} ", if neg { "-" } else { "+" })?;
                    }
                    if *s == 0 {
                        write!(f, "{}", fmt_rational(&a))?;
                    } else if a.is_one() {
                        write!(f, "{}", render_mono(*s))?;
                    } else if a.is_integer() {
                        write!(f, "{}*{}", fmt_rational(&a), render_mono(*s))?;
                    } else {
                        write!(f, "({})*{}", fmt_rational(&a), render_mono(*s))?;
                    }
                }
                None => {
                    if !first {
                        write!(f, " + ")?;
                    }
                    if *s == 0 {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "({c})*{}", render_mono(*s))?;
                    }
                }
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, qf};
    use proptest::prelude::*;

    fn r() -> Arc<ParameterRing> {
        ParameterRing::rationals()
    }
    fn g(n: usize, s: &str) -> GrassmannElement {
        GrassmannElement::parse(n, &r(), s).unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(g(2, "xi2*xi1"), g(2, "-xi1*xi2"));
        assert!(g(2, "xi1*xi1").is_zero());
        let x = g(2, "1 + xi1*xi2");
        assert_eq!(x.try_mul(&x).unwrap(), g(2, "1 + 2*xi1*xi2"));
    }

    #[test]
    fn derivatives() {
        let f = g(2, "xi1*xi2");
        assert_eq!(f.partial(1).unwrap(), g(2, "xi2"));
        assert_eq!(f.partial(2).unwrap(), g(2, "-xi1"));
        assert!(g(2, "xi2").partial(1).unwrap().is_zero());
        assert!(f.partial(3).is_err());
    }

    #[test]
    fn berezin() {
        assert_eq!(g(3, "xi1*xi2*xi3").berezin_integral(), Scalar::rational(q(1)));
        assert!(g(3, "1").berezin_integral().is_zero());
        assert_eq!(g(2, "2*xi1 + 5*xi1*xi2").berezin_integral(), Scalar::rational(q(5)));
    }

    #[test]
    fn display_roundtrip() {
        let f = g(3, "xi1*xi2 - (1/2)*xi3");
        assert_eq!(f.to_string(), "xi1*xi2 - (1/2)*xi3");
        assert_eq!(g(3, &f.to_string()), f);
        assert_eq!(f.coefficient(0b100), Scalar::rational(qf(-1, 2)));
    }

    #[test]
    fn odd_coefficients_pass_generators() {
        let ring = ParameterRing::new(vec![], vec!["tau".into()]).unwrap();
        let x = GrassmannElement::parse(2, &ring, "xi1").unwrap();
        let t = GrassmannElement::parse(2, &ring, "tau").unwrap();
        // xi1 * tau = -tau * xi1
        assert_eq!(x.try_mul(&t).unwrap(), t.try_mul(&x).unwrap().neg());
        // d_1 (tau xi1) = -tau
        let f = t.try_mul(&x).unwrap();
        assert_eq!(f.partial(1).unwrap(), t.neg());
    }

    #[test]
    fn superdimension() {
        for n in 1..=6usize {
            let even = (0u32..(1 << n)).filter(|s| s.count_ones() % 2 == 0).count();
            assert_eq!(even, 1 << (n - 1));
        }
    }

    fn arb(n: usize) -> impl Strategy<Value = GrassmannElement> {
        proptest::collection::vec((0u32..(1 << n), -3i64..4), 0..6).prop_map(move |v| {
            let mut f = GrassmannElement::zero(n, &ParameterRing::rationals());
            for (s, c) in v {
                f.add_term(s, Scalar::rational(q(c)));
            }
            f
        })
    }

    fn homogeneous_parts(f: &GrassmannElement) -> [GrassmannElement; 2] {
        let mut out = [GrassmannElement::zero(f.n, &f.ring), GrassmannElement::zero(f.n, &f.ring)];
        for (s, c) in &f.terms {
            out[(s.count_ones() % 2) as usize].add_term(*s, c.clone());
        }
        out
    }

    proptest! {
        #[test]
        fn supercommutative(f in arb(4), h in arb(4)) {
            let [f0, f1] = homogeneous_parts(&f);
            let [h0, h1] = homogeneous_parts(&h);
            for (a, pa) in [(&f0, 0), (&f1, 1)] {
                for (b, pb) in [(&h0, 0), (&h1, 1)] {
                    let ab = a.try_mul(b).unwrap();
                    let ba = b.try_mul(a).unwrap();
                    prop_assert_eq!(ab, if pa * pb == 1 { ba.neg() } else { ba });
                }
            }
        }

        #[test]
        fn associative(f in arb(4), h in arb(4), k in arb(4)) {
            prop_assert_eq!(f.try_mul(&h).unwrap().try_mul(&k).unwrap(),
                f.try_mul(&h.try_mul(&k).unwrap()).unwrap());
        }

        #[test]
        fn odd_derivation(f in arb(4), h in arb(4), i in 1usize..5) {
            for a in homogeneous_parts(&f) {
                let pa = a.parity().unwrap();
                let lhs = a.try_mul(&h).unwrap().partial(i).unwrap();
                let t1 = a.partial(i).unwrap().try_mul(&h).unwrap();
                let t2 = a.try_mul(&h.partial(i).unwrap()).unwrap();
                let rhs = if pa.is_odd() { t1.try_sub(&t2).unwrap() } else { t1.try_add(&t2).unwrap() };
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn derivatives_anticommute(f in arb(4), i in 1usize..5, j in 1usize..5) {
            let a = f.partial(i).unwrap().partial(j).unwrap();
            let b = f.partial(j).unwrap().partial(i).unwrap();
            prop_assert_eq!(a, b.neg());
        }
    }
}
