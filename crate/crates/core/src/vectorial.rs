//! Vectorial Lie superalgebras on the purely odd superspace C^{0|n}.
//!
//! Two layers: ring-level objects (`VectorField`, `VolumeForm`, `PolyForm`)
//! that follow the definitions literally, and a fast rational layer on the
//! monomial basis xi^S d_j used to build the algebras.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{q, CoeffError, ParameterRing, Parity, Scalar, Q};
use crate::grassmann::{full_mask, mono_mul, mono_partial, render_mono, GrassmannElement, GrassmannError};
use crate::liesuper::{BasisElement, Coordinatizer, LieError, QEntry, Sdim, SuperLieAlgebra};
use crate::linalg::{kernel_of_rows, rank_of, svec_add_scaled, Echelon, Gauss, SVec};

pub const MAX_DXI_DEGREE: u32 = 2;

#[derive(Debug, Error)]
pub enum VectorialError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("element is not homogeneous")]
    Inhomogeneous,
    #[error("family needs {0}")]
    Parameter(String),
    #[error("mismatched vector fields ({0})")]
    Mismatch(String),
    #[error("form degree in d(xi) exceeds the cap {MAX_DXI_DEGREE}")]
    DegreeCap,
    #[error("deformed family is not a free module over the parameter ring: {0}")]
    NotFree(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

fn sgn(b: bool) -> Q {
    if b {
        -Q::one()
    } else {
        Q::one()
    }
}

fn pow_sign(e: u32) -> Q {
    sgn(e % 2 == 1)
}

/// Splits f into homogeneous parts.
fn parity_parts(f: &GrassmannElement) -> [(Parity, GrassmannElement); 2] {
    let mut ev = GrassmannElement::zero(f.n(), f.ring());
    let mut od = GrassmannElement::zero(f.n(), f.ring());
    for (s, c) in f.terms() {
        for p in [Parity::Even, Parity::Odd] {
            let part = c.part(p);
            if part.is_zero() {
                continue;
            }
            let tot = p + Parity::from_bit(s.count_ones() % 2);
            if tot.is_odd() {
                od.add_term(*s, part);
            } else {
                ev.add_term(*s, part);
            }
        }
    }
    [(Parity::Even, ev), (Parity::Odd, od)]
}

// ---------------------------------------------------------------------------
// Ring-level objects

/// sum_i f_i d_i
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub coeffs: Vec<GrassmannElement>,
}

impl VectorField {
    pub fn new(coeffs: Vec<GrassmannElement>) -> Result<Self, VectorialError> {
        let n = coeffs.len();
        if n == 0 {
            return Err(VectorialError::InvalidSize("vector field on zero generators".into()));
        }
        for c in &coeffs {
            if c.n() != n || !crate::coeff::same_ring(c.ring(), coeffs[0].ring()) {
                return Err(VectorialError::Mismatch("coefficient ring or size".into()));
            }
        }
        Ok(VectorField { coeffs })
    }

    pub fn zero(n: usize, ring: &Arc<ParameterRing>) -> Self {
        VectorField {
            coeffs: vec![GrassmannElement::zero(n, ring); n],
        }
    }

    /// c * xi^S d_j with j 0-based.
    pub fn monomial(n: usize, ring: &Arc<ParameterRing>, s: u32, j: usize, c: Scalar) -> Self {
        let mut v = Self::zero(n, ring);
        v.coeffs[j] = GrassmannElement::monomial(n, ring, s, c);
        v
    }

    pub fn from_qvec(n: usize, v: &SVec) -> Self {
        Self::from_qvec_in(n, &ParameterRing::rationals(), v)
    }

    pub fn from_qvec_in(n: usize, ring: &Arc<ParameterRing>, v: &SVec) -> Self {
        let mut out = Self::zero(n, ring);
        for (k, c) in v {
            let (s, j) = fdecode(n, *k);
            out.coeffs[j].add_term(s, Scalar::from_rational(ring, c.clone()));
        }
        out
    }

    /// Rational coordinates on the monomial basis, if all coefficients are
    /// rational.
    pub fn to_qvec(&self) -> Option<SVec> {
        let n = self.n();
        let mut v = SVec::new();
        for (j, f) in self.coeffs.iter().enumerate() {
            for (s, c) in f.terms() {
                v.insert(fidx(n, *s, j), c.as_rational()?);
            }
        }
        Some(v)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn ring(&self) -> &Arc<ParameterRing> {
        self.coeffs[0].ring()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// p(f_i) + 1, if shared by every term.
    pub fn parity(&self) -> Option<Parity> {
        let mut p: Option<Parity> = None;
        for f in &self.coeffs {
            for (s, c) in f.terms() {
                let pc = c.parity()?;
                let t = pc + Parity::from_bit(s.count_ones() % 2) + Parity::Odd;
                match p {
                    None => p = Some(t),
                    Some(x) if x != t => return None,
                    _ => {}
                }
            }
        }
        Some(p.unwrap_or(Parity::Even))
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, VectorialError> {
        if self.n() != o.n() {
            return Err(VectorialError::Mismatch("sizes".into()));
        }
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.try_add(b)).collect::<Result<_, _>>()?;
        Ok(VectorField { coeffs })
    }

    pub fn scale(&self, c: &Q) -> Self {
        VectorField {
            coeffs: self.coeffs.iter().map(|f| f.scale(c)).collect(),
        }
    }

    /// a * D with the scalar on the left.
    pub fn scalar_mul(&self, a: &Scalar) -> Result<Self, VectorialError> {
        Ok(VectorField {
            coeffs: self.coeffs.iter().map(|f| f.scalar_mul(a)).collect::<Result<_, _>>()?,
        })
    }

    /// D(g) = sum_i f_i d_i(g)
    pub fn apply(&self, g: &GrassmannElement) -> Result<GrassmannElement, VectorialError> {
        let mut acc = GrassmannElement::zero(self.n(), self.ring());
        for (i, f) in self.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            acc = acc.try_add(&f.try_mul(&g.partial(i + 1)?)?)?;
        }
        Ok(acc)
    }

    /// [D, E]_j = D(e_j) - (-1)^{p(D)p(E)} E(d_j)
    pub fn bracket(&self, o: &Self) -> Result<Self, VectorialError> {
        let pd = self.parity().ok_or(VectorialError::Inhomogeneous)?;
        let pe = o.parity().ok_or(VectorialError::Inhomogeneous)?;
        let s = q(-pd.sign_with(pe));
        let mut coeffs = vec![];
        for j in 0..self.n() {
            let a = self.apply(&o.coeffs[j])?;
            let b = o.apply(&self.coeffs[j])?.scale(&s);
            coeffs.push(a.try_add(&b)?);
        }
        Ok(VectorField { coeffs })
    }

    /// Div = sum_i (-1)^{p(f_i)} d_i f_i
    pub fn divergence(&self) -> Result<GrassmannElement, VectorialError> {
        let mut acc = GrassmannElement::zero(self.n(), self.ring());
        for (i, f) in self.coeffs.iter().enumerate() {
            for (p, part) in parity_parts(f) {
                if part.is_zero() {
                    continue;
                }
                let d = part.partial(i + 1)?;
                acc = acc.try_add(&if p.is_odd() { d.neg() } else { d })?;
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec![];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!("({})*d{}", c, j + 1));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// f * vvol(xi)
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm {
    pub f: GrassmannElement,
}

impl VolumeForm {
    pub fn standard(n: usize, ring: &Arc<ParameterRing>) -> Self {
        VolumeForm {
            f: GrassmannElement::mono_q(n, ring, 0, Q::one()),
        }
    }

    /// (1 + c * xi_1...xi_n) vvol
    pub fn deformed(n: usize, c: Scalar) -> Self {
        let ring = c.ring().clone();
        let mut f = GrassmannElement::mono_q(n, &ring, 0, Q::one());
        f.add_term(full_mask(n), c);
        VolumeForm { f }
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.f.constant_term().constant_term().is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero()
    }
}

/// L_D(f vvol) = (D(f) + (-1)^{p(D)p(f)} f Div D) vvol
pub fn lie_derivative_volume(d: &VectorField, v: &VolumeForm) -> Result<VolumeForm, VectorialError> {
    let pd = d.parity().ok_or(VectorialError::Inhomogeneous)?;
    let div = d.divergence()?;
    let mut acc = d.apply(&v.f)?;
    for (p, part) in parity_parts(&v.f) {
        if part.is_zero() {
            continue;
        }
        let t = part.try_mul(&div)?;
        acc = acc.try_add(&t.scale(&q(pd.sign_with(p))))?;
    }
    Ok(VolumeForm { f: acc })
}

/// Symmetric Gram matrix G of omega = sum G_ij dxi_i dxi_j; the Poisson
/// bracket and Hamiltonian fields use G^{-1}.
#[derive(Clone, Debug, PartialEq)]
pub struct Gram {
    pub g: Vec<Vec<Q>>,
    pub inv: Vec<Vec<Q>>,
    /// Torus weight of each xi_i when the form is split.
    pub weights: Option<Vec<Vec<i64>>>,
    pub name: String,
}

impl Gram {
    /// omega = sum (dxi_i)^2
    pub fn squares(n: usize) -> Gram {
        let id: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
        Gram {
            g: id.clone(),
            inv: id,
            weights: None,
            name: "squares".into(),
        }
    }

    /// Antidiagonal G: omega = 2 sum_{i<i'} dxi_i dxi_{i'} (+ dxi_mid^2 for
    /// odd n), with i' = n+1-i. Equivalent to `squares` over Q(i).
    pub fn split(n: usize) -> Gram {
        let g: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| if i + j == n - 1 { Q::one() } else { Q::zero() }).collect()).collect();
        let r = n / 2;
        let weights = (0..n)
            .map(|i| {
                let mut w = vec![0i64; r];
                if i < r {
                    w[i] = 1;
                } else if n - 1 - i < r {
                    w[n - 1 - i] = -1;
                }
                w
            })
            .collect();
        Gram {
            g: g.clone(),
            inv: g,
            weights: Some(weights),
            name: "split".into(),
        }
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    fn mono_weight(&self, s: u32) -> Option<Vec<i64>> {
        let w = self.weights.as_ref()?;
        let mut out = vec![0i64; w.first().map(|x| x.len()).unwrap_or(0)];
        for (i, wi) in w.iter().enumerate() {
            if s & (1 << i) != 0 {
                for (o, x) in out.iter_mut().zip(wi) {
                    *o += x;
                }
            }
        }
        Some(out)
    }
}

/// {f, g} = (-1)^{p(f)} sum G^{-1}_{kl} d_k f d_l g
pub fn poisson(f: &GrassmannElement, g: &GrassmannElement, gram: &Gram) -> Result<GrassmannElement, VectorialError> {
    let h = hamiltonian_field(f, gram)?;
    h.apply(g)
}

/// H_f = (-1)^{p(f)} sum G^{-1}_{kl} d_k f d_l
pub fn hamiltonian_field(f: &GrassmannElement, gram: &Gram) -> Result<VectorField, VectorialError> {
    let n = f.n();
    if gram.n() != n {
        return Err(VectorialError::Mismatch("Gram size".into()));
    }
    let p = f.parity().ok_or(VectorialError::Inhomogeneous)?;
    let s = pow_sign(p.bit());
    let mut out = VectorField::zero(n, f.ring());
    for k in 0..n {
        let dk = f.partial(k + 1)?;
        if dk.is_zero() {
            continue;
        }
        for l in 0..n {
            let c = &gram.inv[k][l];
            if c.is_zero() {
                continue;
            }
            out.coeffs[l] = out.coeffs[l].try_add(&dk.scale(&(c * &s)))?;
        }
    }
    Ok(out)
}

/// Differential forms: polynomials in odd xi_i and even dxi_i. Keys are the
/// dxi exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm {
    n: usize,
    ring: Arc<ParameterRing>,
    terms: BTreeMap<Vec<u8>, GrassmannElement>,
}

impl PolyForm {
    pub fn zero(n: usize, ring: &Arc<ParameterRing>) -> Self {
        PolyForm {
            n,
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn function(f: &GrassmannElement) -> Self {
        let mut p = Self::zero(f.n(), f.ring());
        p.add_part(vec![0; f.n()], f.clone());
        p
    }

    pub fn dxi(n: usize, ring: &Arc<ParameterRing>, i: usize) -> Self {
        let mut e = vec![0u8; n];
        e[i - 1] = 1;
        let mut p = Self::zero(n, ring);
        p.add_part(e, GrassmannElement::mono_q(n, ring, 0, Q::one()));
        p
    }

    /// sum G_ij dxi_i dxi_j
    pub fn omega(gram: &Gram, ring: &Arc<ParameterRing>) -> Self {
        let n = gram.n();
        let mut p = Self::zero(n, ring);
        for i in 0..n {
            for j in 0..n {
                if gram.g[i][j].is_zero() {
                    continue;
                }
                let mut e = vec![0u8; n];
                e[i] += 1;
                e[j] += 1;
                p.add_part(e, GrassmannElement::mono_q(n, ring, 0, gram.g[i][j].clone()));
            }
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, GrassmannElement> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_part(&mut self, e: Vec<u8>, f: GrassmannElement) {
        let cur = self.terms.remove(&e).unwrap_or_else(|| GrassmannElement::zero(self.n, &self.ring));
        let s = cur.try_add(&f).expect("same ring");
        if !s.is_zero() {
            self.terms.insert(e, s);
        }
    }

    fn check_cap(&self) -> Result<(), VectorialError> {
        if self.terms.keys().any(|e| e.iter().map(|x| *x as u32).sum::<u32>() > MAX_DXI_DEGREE) {
            return Err(VectorialError::DegreeCap);
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, VectorialError> {
        let mut out = self.clone();
        for (e, f) in &o.terms {
            if !crate::coeff::same_ring(f.ring(), &self.ring) {
                return Err(VectorialError::Mismatch("form rings".into()));
            }
            out.add_part(e.clone(), f.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.n, &self.ring);
        for (e, f) in &self.terms {
            out.add_part(e.clone(), f.scale(c));
        }
        out
    }

    /// The dxi_i are even and central, so only the xi parts interact.
    pub fn try_mul(&self, o: &Self) -> Result<Self, VectorialError> {
        let mut out = Self::zero(self.n, &self.ring);
        for (ea, fa) in &self.terms {
            for (eb, fb) in &o.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_part(e, fa.try_mul(fb)?);
            }
        }
        out.check_cap()?;
        Ok(out)
    }

    /// d(f dxi^a) = sum_k dxi_k d_k(f) dxi^a
    pub fn exterior_d(&self) -> Result<Self, VectorialError> {
        let mut out = Self::zero(self.n, &self.ring);
        for (e, f) in &self.terms {
            for k in 0..self.n {
                let dk = f.partial(k + 1)?;
                if dk.is_zero() {
                    continue;
                }
                let mut e2 = e.clone();
                e2[k] += 1;
                out.add_part(e2, dk);
            }
        }
        out.check_cap()?;
        Ok(out)
    }

    /// L_D(f dxi^a) = D(f) dxi^a + (-1)^{p(D)p(f)} f L_D(dxi^a), with
    /// L_D(dxi_k) = (-1)^{p(D)} d(D(xi_k)).
    pub fn lie_derivative(&self, d: &VectorField) -> Result<Self, VectorialError> {
        let pd = d.parity().ok_or(VectorialError::Inhomogeneous)?;
        let n = self.n;
        let ld_dxi: Vec<PolyForm> = (0..n)
            .map(|k| PolyForm::function(&d.coeffs[k]).exterior_d().map(|x| x.scale(&pow_sign(pd.bit()))))
            .collect::<Result<_, _>>()?;
        let mut out = Self::zero(n, &self.ring);
        for (e, f) in &self.terms {
            let df = d.apply(f)?;
            out.add_part(e.clone(), df);
            // L_D(dxi^e) by the product rule on commuting even factors
            let mut ld = Self::zero(n, &self.ring);
            for k in 0..n {
                if e[k] == 0 {
                    continue;
                }
                let mut rest = e.clone();
                rest[k] -= 1;
                let mut mono = Self::zero(n, &self.ring);
                mono.add_part(rest, GrassmannElement::mono_q(n, &self.ring, 0, q(e[k] as i64)));
                ld = ld.try_add(&mono.try_mul(&ld_dxi[k])?)?;
            }
            for (p, part) in parity_parts(f) {
                if part.is_zero() {
                    continue;
                }
                let t = PolyForm::function(&part).try_mul(&ld)?;
                out = out.try_add(&t.scale(&q(pd.sign_with(p))))?;
            }
        }
        out.check_cap()?;
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Rational monomial layer

/// Index of xi^S d_j (j 0-based).
pub fn fidx(n: usize, s: u32, j: usize) -> usize {
    (j << n) | s as usize
}

pub fn fdecode(n: usize, k: usize) -> (u32, usize) {
    ((k & ((1usize << n) - 1)) as u32, k >> n)
}

fn field_parity(s: u32) -> Parity {
    Parity::from_bit((s.count_ones() + 1) % 2)
}

fn field_weight(n: usize, s: u32, j: usize) -> Vec<i64> {
    let mut w: Vec<i64> = (0..n).map(|i| ((s >> i) & 1) as i64).collect();
    w[j] -= 1;
    w
}

fn field_label(n: usize, k: usize) -> String {
    let (s, j) = fdecode(n, k);
    let m = render_mono(s).replace('*', "");
    format!("{m}d{}", j + 1)
}

/// [xi^A d_i, xi^B d_j] on monomials.
fn mono_field_bracket(n: usize, a: u32, i: usize, b: u32, j: usize, out: &mut SVec, c: &Q) {
    let pa = a.count_ones() + 1;
    let pb = b.count_ones() + 1;
    if let Some((b2, neg1)) = mono_partial(i, b) {
        if let Some((m, neg2)) = mono_mul(a, b2) {
            let k = fidx(n, m, j);
            let v = c * sgn(neg1 ^ neg2);
            *out.entry(k).or_insert_with(Q::zero) += v;
        }
    }
    if let Some((a2, neg1)) = mono_partial(j, a) {
        if let Some((m, neg2)) = mono_mul(b, a2) {
            let k = fidx(n, m, i);
            let v = -(c * sgn(neg1 ^ neg2) * pow_sign(pa * pb));
            *out.entry(k).or_insert_with(Q::zero) += v;
        }
    }
}

pub fn qfield_bracket(n: usize, x: &SVec, y: &SVec) -> SVec {
    let mut out = SVec::new();
    for (kx, cx) in x {
        let (a, i) = fdecode(n, *kx);
        for (ky, cy) in y {
            let (b, j) = fdecode(n, *ky);
            mono_field_bracket(n, a, i, b, j, &mut out, &(cx * cy));
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Divergence into function coordinates (keyed by the monomial bit set).
pub fn qdiv(n: usize, x: &SVec) -> SVec {
    let mut out = SVec::new();
    for (k, c) in x {
        let (s, j) = fdecode(n, *k);
        if let Some((m, neg)) = mono_partial(j, s) {
            let v = c * sgn(neg) * pow_sign(s.count_ones());
            *out.entry(m as usize).or_insert_with(Q::zero) += v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn render_field(n: usize, v: &SVec) -> String {
    let mut s = String::new();
    for (k, c) in v {
        let l = field_label(n, *k);
        let neg = *c < Q::zero();
        let a = if neg { -c.clone() } else { c.clone() };
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push(if neg { '-' } else { '+' });
        }
        if !a.is_one() {
            s.push_str(&crate::coeff::fmt_rational(&a));
            s.push('*');
        }
        s.push_str(&l);
    }
    s
}

struct FieldElem {
    label: String,
    vec: SVec,
    parity: Parity,
    degree: Option<i64>,
    weight: Option<Vec<i64>>,
}

fn assemble(name: &str, elems: Vec<FieldElem>, bracket: impl Fn(&SVec, &SVec) -> SVec) -> Result<SuperLieAlgebra, VectorialError> {
    let m = elems.len();
    let coords = Coordinatizer::new(&elems.iter().map(|e| e.vec.clone()).collect::<Vec<_>>());
    if coords.rank() != m {
        return Err(VectorialError::InvalidSize("dependent basis".into()));
    }
    let mut table = vec![vec![QEntry::new(); m]; m];
    for a in 0..m {
        for b in a..m {
            let r = bracket(&elems[a].vec, &elems[b].vec);
            let x = coords.coords(&r).ok_or(LieError::NotClosed)?;
            let s = q(elems[a].parity.sign_with(elems[b].parity));
            table[a][b] = x.iter().map(|(k, v)| (*k, v.clone())).collect();
            if a != b {
                table[b][a] = x.iter().map(|(k, v)| (*k, -v * &s)).collect();
            }
        }
    }
    let basis = elems
        .into_iter()
        .map(|e| {
            let mut b = BasisElement::new(e.label, e.parity);
            b.degree = e.degree;
            b.weight = e.weight;
            b
        })
        .collect();
    Ok(SuperLieAlgebra::from_rational_table(name, basis, table))
}

fn check_n(n: usize, min: usize) -> Result<(), VectorialError> {
    if n < min || n > 12 {
        return Err(VectorialError::InvalidSize(format!("n = {n} outside {min}..=12")));
    }
    Ok(())
}

/// Monomial fields ordered by degree, then monomial, then index.
fn monomial_fields(n: usize) -> Vec<(u32, usize)> {
    let mut v: Vec<(u32, usize)> = (0..(1u32 << n)).flat_map(|s| (0..n).map(move |j| (s, j))).collect();
    v.sort_by_key(|&(s, j)| (s.count_ones(), mono_order_key(s), j));
    v
}

fn mono_order_key(s: u32) -> Vec<u32> {
    (0..32).filter(|i| s & (1 << i) != 0).collect()
}

pub fn vect(n: usize) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 1)?;
    let elems = monomial_fields(n)
        .into_iter()
        .map(|(s, j)| {
            let mut v = SVec::new();
            v.insert(fidx(n, s, j), Q::one());
            FieldElem {
                label: field_label(n, fidx(n, s, j)),
                vec: v,
                parity: field_parity(s),
                degree: Some(s.count_ones() as i64 - 1),
                weight: Some(field_weight(n, s, j)),
            }
        })
        .collect();
    assemble(&format!("vect(0|{n})"), elems, |x, y| qfield_bracket(n, x, y))
}

/// Weight blocks of vect(0|n) in degree order.
fn weight_blocks(n: usize) -> Vec<(Vec<i64>, Vec<usize>)> {
    let mut blocks: BTreeMap<(i64, Vec<i64>), Vec<usize>> = BTreeMap::new();
    for (s, j) in monomial_fields(n) {
        let w = field_weight(n, s, j);
        blocks.entry((s.count_ones() as i64 - 1, w)).or_default().push(fidx(n, s, j));
    }
    blocks.into_iter().map(|((_, w), v)| (w, v)).collect()
}

/// Divergence-free fields per weight block, as (weight, vector).
pub fn svect_basis(n: usize) -> Vec<(Vec<i64>, SVec)> {
    let mut out = vec![];
    for (w, idx) in weight_blocks(n) {
        // rows: function monomial -> coefficients over local indices
        let mut rows: BTreeMap<usize, SVec> = BTreeMap::new();
        for (a, k) in idx.iter().enumerate() {
            let mut unit = SVec::new();
            unit.insert(*k, Q::one());
            for (m, c) in qdiv(n, &unit) {
                rows.entry(m).or_default().insert(a, c);
            }
        }
        for kv in kernel_of_rows(rows.into_values(), idx.len()) {
            let v: SVec = kv.into_iter().map(|(a, c)| (idx[a], c)).collect();
            out.push((w.clone(), normalize(v)));
        }
    }
    out
}

/// Scales so the first coefficient is 1.
fn normalize(mut v: SVec) -> SVec {
    if let Some(c) = v.values().next().cloned() {
        let inv = Q::one() / c;
        for x in v.values_mut() {
            *x *= &inv;
        }
    }
    v
}

pub fn svect(n: usize) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 2)?;
    let elems = svect_basis(n)
        .into_iter()
        .map(|(w, v)| {
            let (s, _) = fdecode(n, *v.keys().next().unwrap());
            FieldElem {
                label: render_field(n, &v),
                parity: field_parity(s),
                degree: Some(s.count_ones() as i64 - 1),
                weight: Some(w),
                vec: v,
            }
        })
        .collect();
    assemble(&format!("svect(0|{n})"), elems, |x, y| qfield_bracket(n, x, y))
}

fn reduced(w: &[i64]) -> Vec<i64> {
    let last = *w.last().unwrap();
    w[..w.len() - 1].iter().map(|x| x - last).collect()
}

/// Rational matrix of D -> L_D((1 + c Xi) vvol) on a list of basis fields
/// (each possibly multiplied by a parameter), computed with the ring-level
/// definitions. Output keyed by (function monomial, parameter monomial).
fn volume_condition(n: usize, ring: &Arc<ParameterRing>, c: &Scalar, fields: &[VectorField]) -> Result<Vec<SVec>, VectorialError> {
    let vol = VolumeForm::deformed(n, c.clone());
    let mut keys: BTreeMap<(u32, String), usize> = BTreeMap::new();
    let mut cols = vec![];
    for d in fields {
        let r = lie_derivative_volume(d, &vol)?;
        let mut col = SVec::new();
        for (s, sc) in r.f.terms() {
            for (m, x) in sc.terms() {
                let key = (*s, m.render(ring));
                let nk = keys.len();
                let k = *keys.entry(key).or_insert(nk);
                col.insert(k, x.clone());
            }
        }
        cols.push(col);
    }
    Ok(cols)
}

fn transpose(cols: &[SVec]) -> Vec<SVec> {
    let mut rows: BTreeMap<usize, SVec> = BTreeMap::new();
    for (a, c) in cols.iter().enumerate() {
        for (k, x) in c {
            rows.entry(*k).or_default().insert(a, x.clone());
        }
    }
    rows.into_values().collect()
}

/// svect~(0|n) for even n and a rational t != 0: the kernel of
/// D -> L_D((1 + t xi_1...xi_n) vvol) in vect(0|n).
pub fn svect_tilde_even_rational(n: usize, t: &Q) -> Result<SuperLieAlgebra, VectorialError> {
    let elems = tilde_even_elems(n, t)?;
    let mut g = assemble(&format!("svect~(0|{n}; t={})", crate::coeff::fmt_rational(t)), elems, |x, y| qfield_bracket(n, x, y))?;
    g.notes.push("reduced weights w_i - w_n; degrees omitted (filtered algebra)".into());
    Ok(g)
}

/// The basis of [`svect_tilde_even_rational`] as vectors in vect(0|n).
pub fn svect_tilde_even_fields(n: usize, t: &Q) -> Result<Vec<SVec>, VectorialError> {
    Ok(tilde_even_elems(n, t)?.into_iter().map(|e| e.vec).collect())
}

fn tilde_even_elems(n: usize, t: &Q) -> Result<Vec<FieldElem>, VectorialError> {
    check_n(n, 2)?;
    if n % 2 != 0 {
        return Err(VectorialError::Parameter("even n for an even parameter".into()));
    }
    let ring = ParameterRing::rationals();
    let c = Scalar::from_rational(&ring, t.clone());
    // blocks by reduced weight
    let mut blocks: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (s, j) in monomial_fields(n) {
        blocks.entry(reduced(&field_weight(n, s, j))).or_default().push(fidx(n, s, j));
    }
    let mut elems = vec![];
    let mut ordered: Vec<(Vec<i64>, Vec<usize>)> = blocks.into_iter().collect();
    ordered.sort_by_key(|(w, idx)| (fdecode(n, idx[0]).0.count_ones(), w.clone()));
    for (w, idx) in ordered {
        let fields: Vec<VectorField> = idx.iter().map(|k| {
            let mut u = SVec::new();
            u.insert(*k, Q::one());
            VectorField::from_qvec(n, &u)
        }).collect();
        let cols = volume_condition(n, &ring, &c, &fields)?;
        for kv in kernel_of_rows(transpose(&cols), idx.len()) {
            let v: SVec = normalize(kv.into_iter().map(|(a, x)| (idx[a], x)).collect());
            let (s, _) = fdecode(n, *v.keys().next().unwrap());
            elems.push(FieldElem {
                label: render_field(n, &v),
                parity: field_parity(s),
                degree: None,
                weight: Some(w.clone()),
                vec: v,
            });
        }
    }
    // deterministic: parity-homogeneous by construction since blocks mix
    // degrees of equal parity only when n is even
    for e in &elems {
        let ps: Vec<Parity> = e.vec.keys().map(|k| field_parity(fdecode(n, *k).0)).collect();
        if ps.windows(2).any(|w| w[0] != w[1]) {
            return Err(VectorialError::Inhomogeneous);
        }
    }
    Ok(elems)
}

/// Deformed families over a parameter eps with eps^2 = 0 (odd tau, or even t
/// truncated at first order). Elements D0 + eps D1 with D0 in svect.
type Lifts = (Vec<(Vec<i64>, SVec)>, Vec<SVec>);

/// For each divergence-free D0 a D1, reduced modulo svect, such that
/// D0 + eps D1 preserves (1 + eps Xi) vvol.
fn tilde_lifts(n: usize, ring: &Arc<ParameterRing>, eps: &Scalar) -> Result<Lifts, VectorialError> {
    let base = svect_basis(n);
    let mf = monomial_fields(n);
    let unit = |k: usize| -> SVec {
        let mut u = SVec::new();
        u.insert(k, Q::one());
        u
    };
    let eps_fields: Vec<VectorField> = mf
        .iter()
        .map(|&(s, j)| VectorField::from_qvec_in(n, ring, &unit(fidx(n, s, j))).scalar_mul(eps))
        .collect::<Result<_, _>>()?;
    let eps_cols = volume_condition_keyed(n, ring, eps, &eps_fields)?;
    let mut col_index: BTreeMap<(u32, String), usize> = BTreeMap::new();
    let eps_cols: Vec<SVec> = eps_cols.into_iter().map(|c| rekey(c, &mut col_index)).collect();
    let mut sv_ech = Echelon::new();
    for (_, v) in &base {
        sv_ech.insert(v.clone());
    }
    let mut lifts: Vec<SVec> = vec![];
    for (_, d0) in &base {
        let f0 = VectorField::from_qvec_in(n, ring, d0);
        let c0 = volume_condition_keyed(n, ring, eps, &[f0])?.pop().unwrap();
        let mut rhs = rekey(c0, &mut col_index);
        for v in rhs.values_mut() {
            *v = -v.clone();
        }
        let sol = crate::linalg::solve_columns(&eps_cols, &rhs)
            .ok_or_else(|| VectorialError::NotFree("a divergence-free field does not lift".into()))?;
        let mut d1 = SVec::new();
        for (a, x) in sol.iter().enumerate() {
            if !x.is_zero() {
                let (s, j) = mf[a];
                d1.insert(fidx(n, s, j), x.clone());
            }
        }
        sv_ech.reduce(&mut d1);
        lifts.push(d1);
    }
    // the eps-torsion must be exactly svect, otherwise the module is not free
    let ker_dim = kernel_of_rows(transpose(&eps_cols), mf.len()).len();
    if ker_dim != base.len() {
        return Err(VectorialError::NotFree(format!("eps-torsion has dim {ker_dim}, expected {}", base.len())));
    }
    Ok((base, lifts))
}

/// Module generators D0 + tau D1 of svect~(0|n) for odd n over Q[tau].
pub fn svect_tilde_generators(n: usize, tau: &str) -> Result<Vec<VectorField>, VectorialError> {
    check_n(n, 3)?;
    let ring = ParameterRing::new(vec![], vec![tau.to_string()])?;
    let eps = Scalar::param(&ring, tau)?;
    let (base, lifts) = tilde_lifts(n, &ring, &eps)?;
    base.iter()
        .zip(&lifts)
        .map(|((_, d0), d1)| VectorField::from_qvec_in(n, &ring, d0).try_add(&VectorField::from_qvec_in(n, &ring, d1).scalar_mul(&eps)?))
        .collect()
}

/// Deformed families over a parameter eps with eps^2 = 0 (odd tau, or even t
/// truncated at first order). Elements D0 + eps D1 with D0 in svect.
fn svect_tilde_module(n: usize, ring: &Arc<ParameterRing>, eps_name: &str, scale: &Q, odd: bool, name: String) -> Result<SuperLieAlgebra, VectorialError> {
    let eps = Scalar::param(ring, eps_name)?.scale(scale);
    let (base, lifts) = tilde_lifts(n, ring, &eps)?;
    let svect_span: Vec<SVec> = base.iter().map(|(_, v)| v.clone()).collect();
    let coords = Coordinatizer::new(&svect_span);
    let m = base.len();
    let parities: Vec<Parity> = base.iter().map(|(_, v)| field_parity(fdecode(n, *v.keys().next().unwrap()).0)).collect();
    let mut table: Vec<Vec<crate::liesuper::Entry>> = vec![vec![vec![]; m]; m];
    let eps_parity = if odd { Parity::Odd } else { Parity::Even };
    for a in 0..m {
        for b in 0..m {
            let (x0, x1) = (&base[a].1, &lifts[a]);
            let (y0, y1) = (&base[b].1, &lifts[b]);
            let r0 = qfield_bracket(n, x0, y0);
            let mut r1 = qfield_bracket(n, x1, y0);
            let s = q(parities[a].sign_with(eps_parity));
            svec_add_scaled(&mut r1, &qfield_bracket(n, x0, y1), &s);
            let c0 = coords.coords(&r0).ok_or(LieError::NotClosed)?;
            for (k, c) in &c0 {
                svec_add_scaled(&mut r1, &lifts[*k], &-c.clone());
            }
            let c1 = coords.coords(&r1).ok_or(LieError::NotClosed)?;
            let mut entry: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (k, c) in c0 {
                entry.insert(k, Scalar::from_rational(ring, c));
            }
            for (k, c) in c1 {
                let t = eps.scale(&c);
                let cur = entry.remove(&k).unwrap_or_else(|| Scalar::zero(ring));
                entry.insert(k, &cur + &t);
            }
            table[a][b] = entry.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        }
    }
    let basis: Vec<BasisElement> = base
        .iter()
        .zip(&lifts)
        .map(|((w, d0), d1)| {
            let mut label = render_field(n, d0);
            if !d1.is_empty() {
                let pre = if scale.is_one() { eps_name.to_string() } else { format!("{}*{eps_name}", crate::coeff::fmt_rational(scale)) };
                label = format!("{label}+{pre}*({})", render_field(n, d1));
            }
            BasisElement::new(label, field_parity(fdecode(n, *d0.keys().next().unwrap()).0)).with_weight(reduced(w))
        })
        .collect();
    let mut g = SuperLieAlgebra::from_full_table(name, ring, basis, table);
    g.notes.push(format!("elements D0 + {eps_name}*D1 with D0 divergence-free; reduced weights w_i - w_n"));
    Ok(g)
}

fn volume_condition_keyed(n: usize, ring: &Arc<ParameterRing>, c: &Scalar, fields: &[VectorField]) -> Result<Vec<BTreeMap<(u32, String), Q>>, VectorialError> {
    let vol = VolumeForm::deformed(n, c.clone());
    let mut out = vec![];
    for d in fields {
        let r = lie_derivative_volume(d, &vol)?;
        let mut col = BTreeMap::new();
        for (s, sc) in r.f.terms() {
            for (m, x) in sc.terms() {
                col.insert((*s, m.render(ring)), x.clone());
            }
        }
        out.push(col);
    }
    Ok(out)
}

fn rekey(c: BTreeMap<(u32, String), Q>, index: &mut BTreeMap<(u32, String), usize>) -> SVec {
    let mut v = SVec::new();
    for (k, x) in c {
        let nk = index.len();
        let i = *index.entry(k).or_insert(nk);
        v.insert(i, x);
    }
    v
}

/// svect~(0|n) for even n with a formal even parameter t, to first order.
pub fn svect_tilde_even_formal(n: usize, t: &str) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 2)?;
    if n % 2 != 0 {
        return Err(VectorialError::Parameter("even n for an even parameter".into()));
    }
    let ring = ParameterRing::new(vec![(t.to_string(), 2)], vec![])?;
    svect_tilde_module(n, &ring, t, &Q::one(), false, format!("svect~(0|{n}; {t})"))
}

/// svect~(0|n) for odd n over Q[tau], p(tau) odd.
pub fn svect_tilde_odd(n: usize, tau: &str) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 3)?;
    if n % 2 != 1 {
        return Err(VectorialError::Parameter("odd n for an odd parameter".into()));
    }
    let ring = ParameterRing::new(vec![], vec![tau.to_string()])?;
    svect_tilde_module(n, &ring, tau, &Q::one(), true, format!("svect~(0|{n}; {tau})"))
}

/// svect~(0|n) for the volume form (1 + r tau xi_1...xi_n) vvol, n odd.
pub fn svect_tilde_odd_scaled(n: usize, tau: &str, r: &Q) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 3)?;
    if n % 2 != 1 || r.is_zero() {
        return Err(VectorialError::Parameter("odd n and a nonzero multiple".into()));
    }
    let ring = ParameterRing::new(vec![], vec![tau.to_string()])?;
    let name = format!("svect~(0|{n}; {}{tau})", crate::coeff::fmt_rational(r));
    svect_tilde_module(n, &ring, tau, r, true, name)
}

/// H_{xi^A} on the rational layer.
pub fn qhamiltonian(n: usize, gram: &Gram, a: u32) -> SVec {
    let mut out = SVec::new();
    let s = pow_sign(a.count_ones());
    for k in 0..n {
        if let Some((m, neg)) = mono_partial(k, a) {
            for l in 0..n {
                let c = &gram.inv[k][l];
                if !c.is_zero() {
                    *out.entry(fidx(n, m, l)).or_insert_with(Q::zero) += c * &s * sgn(neg);
                }
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// {xi^A, xi^B} in function coordinates.
pub fn qpoisson(n: usize, gram: &Gram, x: &SVec, y: &SVec) -> SVec {
    let mut out = SVec::new();
    for (ka, ca) in x {
        let h = qhamiltonian(n, gram, *ka as u32);
        for (kb, cb) in y {
            for (kf, cf) in &h {
                let (s, j) = fdecode(n, *kf);
                if let Some((b2, neg1)) = mono_partial(j, *kb as u32) {
                    if let Some((m, neg2)) = mono_mul(s, b2) {
                        *out.entry(m as usize).or_insert_with(Q::zero) += ca * cb * cf * sgn(neg1 ^ neg2);
                    }
                }
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn monomials(n: usize) -> Vec<u32> {
    let mut v: Vec<u32> = (0..(1u32 << n)).collect();
    v.sort_by_key(|&s| (s.count_ones(), mono_order_key(s)));
    v
}

pub fn po(n: usize, gram: &Gram) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 1)?;
    let elems = monomials(n)
        .into_iter()
        .map(|s| {
            let mut v = SVec::new();
            v.insert(s as usize, Q::one());
            FieldElem {
                label: if s == 0 { "1".into() } else { render_mono(s).replace('*', "") },
                vec: v,
                parity: Parity::from_bit(s.count_ones() % 2),
                degree: Some(s.count_ones() as i64 - 2),
                weight: gram.mono_weight(s),
            }
        })
        .collect();
    let g2 = gram.clone();
    assemble(&format!("po(0|{n})"), elems, move |x, y| qpoisson(n, &g2, x, y))
}

fn hamiltonian_family(n: usize, gram: &Gram, top: bool, name: String) -> Result<SuperLieAlgebra, VectorialError> {
    let elems = monomials(n)
        .into_iter()
        .filter(|&s| s != 0 && (top || s != full_mask(n)))
        .map(|s| FieldElem {
            label: format!("H({})", render_mono(s).replace('*', "")),
            vec: qhamiltonian(n, gram, s),
            parity: Parity::from_bit(s.count_ones() % 2),
            degree: Some(s.count_ones() as i64 - 2),
            weight: gram.mono_weight(s),
        })
        .collect();
    let mut g = assemble(&name, elems, |x, y| qfield_bracket(n, x, y))?;
    g.notes.push(format!("symplectic form: {}", gram.name));
    Ok(g)
}

/// h(0|n): Hamiltonian fields H_f, f non-constant.
pub fn h(n: usize, gram: &Gram) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 2)?;
    hamiltonian_family(n, gram, true, format!("h(0|{n})"))
}

/// h'(0|n) = [h, h]: H_f with f of degree 1..n-1.
pub fn h_prime(n: usize, gram: &Gram) -> Result<SuperLieAlgebra, VectorialError> {
    check_n(n, 2)?;
    hamiltonian_family(n, gram, false, format!("h'(0|{n})"))
}

/// {D in vect(0|n) : L_D(omega) = 0}, from the ring-level Lie derivative.
pub fn symplectic_kernel(n: usize, gram: &Gram) -> Result<Vec<SVec>, VectorialError> {
    let ring = ParameterRing::rationals();
    let omega = PolyForm::omega(gram, &ring);
    let mf = monomial_fields(n);
    let mut keys: BTreeMap<(Vec<u8>, u32), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, SVec> = BTreeMap::new();
    for (a, &(s, j)) in mf.iter().enumerate() {
        let mut u = SVec::new();
        u.insert(fidx(n, s, j), Q::one());
        let l = omega.lie_derivative(&VectorField::from_qvec(n, &u))?;
        for (e, f) in l.terms() {
            for (m, c) in f.terms() {
                let nk = keys.len();
                let k = *keys.entry((e.clone(), *m)).or_insert(nk);
                rows.entry(k).or_default().insert(a, c.as_rational().unwrap_or_else(Q::zero));
            }
        }
    }
    Ok(kernel_of_rows(rows.into_values(), mf.len())
        .into_iter()
        .map(|v| v.into_iter().map(|(a, c)| (fidx(n, mf[a].0, mf[a].1), c)).collect())
        .collect())
}

// ---------------------------------------------------------------------------
// Exact sequences

#[derive(Clone, Debug, Serialize)]
pub struct NodeCheck {
    pub node: String,
    pub kernel: Sdim,
    pub image: Sdim,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub name: String,
    pub n: usize,
    pub nodes: Vec<NodeCheck>,
    pub exact: bool,
}

fn sdim_of(vecs: &[SVec], parity: impl Fn(usize) -> Parity) -> Sdim {
    let mut ev = vec![];
    let mut od = vec![];
    for v in vecs {
        match v.keys().next().map(|k| parity(*k)) {
            Some(Parity::Even) => ev.push(v.clone()),
            Some(Parity::Odd) => od.push(v.clone()),
            None => {}
        }
    }
    Sdim::new(rank_of(ev), rank_of(od))
}

fn fparity(n: usize) -> impl Fn(usize) -> Parity {
    move |k| field_parity(fdecode(n, k).0)
}

fn mparity(k: usize) -> Parity {
    Parity::from_bit((k as u32).count_ones() % 2)
}

/// Exactness of the short sequences connecting the vectorial families,
/// checked by rank bookkeeping at every node.
pub fn verify_sequence(name: &str, n: usize) -> Result<SequenceReport, VectorialError> {
    check_n(n, 2)?;
    let mut nodes = vec![];
    let unit = |k: usize| -> SVec {
        let mut u = SVec::new();
        u.insert(k, Q::one());
        u
    };
    match name {
        "PoH" => {
            // 0 -> Q -> po -> h -> 0, with H_- : po -> vect
            let gram = Gram::squares(n);
            let all: Vec<u32> = monomials(n);
            let images: Vec<SVec> = all.iter().map(|&s| qhamiltonian(n, &gram, s)).collect();
            let kernel = kernel_of_rows(transpose(&images), all.len());
            let ker_vecs: Vec<SVec> = kernel.iter().map(|v| v.iter().map(|(a, c)| (all[*a] as usize, c.clone())).collect()).collect();
            let consts = vec![unit(0)];
            let ker_is_const = ker_vecs.len() == 1 && ker_vecs[0].keys().all(|k| *k == 0);
            nodes.push(NodeCheck {
                node: "Q -> po".into(),
                kernel: Sdim::default(),
                image: sdim_of(&consts, mparity),
                exact: true,
            });
            nodes.push(NodeCheck {
                node: "po".into(),
                kernel: sdim_of(&ker_vecs, mparity),
                image: sdim_of(&consts, mparity),
                exact: ker_is_const,
            });
            let hk = symplectic_kernel(n, &gram)?;
            let img = sdim_of(&images, fparity(n));
            let hs = sdim_of(&hk, fparity(n));
            let mut e = Echelon::new();
            for v in &hk {
                e.insert(v.clone());
            }
            let inside = images.iter().all(|v| e.contains(v));
            nodes.push(NodeCheck {
                node: "h".into(),
                kernel: hs,
                image: img,
                exact: inside && img == hs,
            });
        }
        "h_prime_H" => {
            // 0 -> h' -> h -> Q H_{xi_1...xi_n} -> 0
            let gram = Gram::squares(n);
            let hp: Vec<SVec> = monomials(n).into_iter().filter(|&s| s != 0 && s != full_mask(n)).map(|s| qhamiltonian(n, &gram, s)).collect();
            let hk = symplectic_kernel(n, &gram)?;
            // h' is the derived algebra of h
            let mut der = vec![];
            for a in &hk {
                for b in &hk {
                    let r = qfield_bracket(n, a, b);
                    if !r.is_empty() {
                        der.push(r);
                    }
                }
            }
            let hp_s = sdim_of(&hp, fparity(n));
            let der_s = sdim_of(&der, fparity(n));
            let mut e = Echelon::new();
            for v in &der {
                e.insert(v.clone());
            }
            let same = hp.iter().all(|v| e.contains(v)) && hp_s == der_s;
            let top = qhamiltonian(n, &gram, full_mask(n));
            let top_outside = !e.contains(&top);
            let hs = sdim_of(&hk, fparity(n));
            let p = mparity(full_mask(n) as usize);
            let coker = if p.is_odd() { Sdim::new(0, 1) } else { Sdim::new(1, 0) };
            let total = Sdim::new(hp_s.even + coker.even, hp_s.odd + coker.odd);
            nodes.push(NodeCheck {
                node: "h' = [h, h]".into(),
                kernel: hp_s,
                image: der_s,
                exact: same,
            });
            nodes.push(NodeCheck {
                node: "h / h' = Q H_top".into(),
                kernel: hs,
                image: total,
                exact: top_outside && hs == total,
            });
        }
        "svect_div" => {
            // 0 -> svect -> vect -> Vol_0 -> 0 with Div
            let mf = monomial_fields(n);
            let cols: Vec<SVec> = mf.iter().map(|&(s, j)| qdiv(n, &unit(fidx(n, s, j)))).collect();
            let ker: Vec<SVec> = kernel_of_rows(transpose(&cols), mf.len())
                .into_iter()
                .map(|v| v.into_iter().map(|(a, c)| (fidx(n, mf[a].0, mf[a].1), c)).collect())
                .collect();
            let sv: Vec<SVec> = svect_basis(n).into_iter().map(|(_, v)| v).collect();
            let ks = sdim_of(&ker, fparity(n));
            let ss = sdim_of(&sv, fparity(n));
            let img = sdim_of(&cols, mparity);
            let vol0: Vec<SVec> = (0..(1usize << n)).filter(|&s| s != full_mask(n) as usize).map(unit).collect();
            let v0 = sdim_of(&vol0, mparity);
            let no_top = cols.iter().all(|c| !c.contains_key(&(full_mask(n) as usize)));
            nodes.push(NodeCheck {
                node: "svect = ker Div".into(),
                kernel: ks,
                image: ss,
                exact: ks == ss,
            });
            nodes.push(NodeCheck {
                node: "im Div = Vol_0".into(),
                kernel: v0,
                image: img,
                exact: no_top && img == v0,
            });
        }
        "vol0_int" => {
            // 0 -> Vol_0 -> F -> Q -> 0 with the Berezin integral
            let ring = ParameterRing::rationals();
            let all: Vec<usize> = (0..(1usize << n)).collect();
            let ints: Vec<Q> = all
                .iter()
                .map(|&s| GrassmannElement::mono_q(n, &ring, s as u32, Q::one()).berezin_integral().constant_term())
                .collect();
            let ker: Vec<SVec> = all.iter().filter(|&&s| ints[s].is_zero()).map(|&s| unit(s)).collect();
            let ks = sdim_of(&ker, mparity);
            let vol0: Vec<SVec> = all.iter().filter(|&&s| s != full_mask(n) as usize).map(|&s| unit(s)).collect();
            let v0 = sdim_of(&vol0, mparity);
            let surj = ints.iter().any(|c| !c.is_zero());
            let p = Parity::from_bit((n % 2) as u32);
            nodes.push(NodeCheck {
                node: "Vol_0 = ker int".into(),
                kernel: ks,
                image: v0,
                exact: ks == v0,
            });
            nodes.push(NodeCheck {
                node: "int onto Q".into(),
                kernel: if p.is_odd() { Sdim::new(0, 1) } else { Sdim::new(1, 0) },
                image: if surj { if p.is_odd() { Sdim::new(0, 1) } else { Sdim::new(1, 0) } } else { Sdim::default() },
                exact: surj,
            });
        }
        other => return Err(VectorialError::Parameter(format!("unknown sequence `{other}`"))),
    }
    let exact = nodes.iter().all(|x| x.exact);
    Ok(SequenceReport {
        name: name.into(),
        n,
        nodes,
        exact,
    })
}

// ---------------------------------------------------------------------------
// Equivalence of the two symplectic normal shapes over Q(i)

type GElem = BTreeMap<u32, Gauss>;

fn g_mul(a: &GElem, b: &GElem) -> GElem {
    let mut out = GElem::new();
    for (sa, ca) in a {
        for (sb, cb) in b {
            if let Some((m, neg)) = mono_mul(*sa, *sb) {
                let mut c = ca.mul(cb);
                if neg {
                    c = c.neg();
                }
                let e = out.entry(m).or_insert_with(Gauss::zero);
                *e = e.add(&c);
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn g_partial(a: &GElem, k: usize) -> GElem {
    let mut out = GElem::new();
    for (s, c) in a {
        if let Some((m, neg)) = mono_partial(k, *s) {
            out.insert(m, if neg { c.neg() } else { c.clone() });
        }
    }
    out
}

fn g_add(a: &mut GElem, b: &GElem, c: &Gauss) {
    for (s, x) in b {
        let e = a.entry(*s).or_insert_with(Gauss::zero);
        *e = e.add(&x.mul(c));
    }
    a.retain(|_, c| !c.is_zero());
}

fn g_poisson(n: usize, inv: &[Vec<Q>], f: &GElem, g: &GElem, pf: u32) -> GElem {
    let mut out = GElem::new();
    for k in 0..n {
        let dk = g_partial(f, k);
        if dk.is_empty() {
            continue;
        }
        for l in 0..n {
            if inv[k][l].is_zero() {
                continue;
            }
            let t = g_mul(&dk, &g_partial(g, l));
            g_add(&mut out, &t, &Gauss::real(&inv[k][l] * pow_sign(pf)));
        }
    }
    out
}

/// Checks that eta_a -> sum_k M_{ka} xi_k, with M built from the blocks
/// [[1, 1/2], [i, -i/2]] on each pair (i, n+1-i), carries the split Poisson
/// bracket to the sum-of-squares one on every pair of monomials.
pub fn split_form_equivalence(n: usize) -> bool {
    let one = Gauss::one();
    let half = Gauss::real(crate::coeff::qf(1, 2));
    let i = Gauss::i();
    let mi2 = Gauss::new(Q::zero(), crate::coeff::qf(-1, 2));
    // images of eta_a
    let mut img: Vec<GElem> = vec![GElem::new(); n];
    for a in 0..n / 2 {
        let b = n - 1 - a;
        // eta_a -> xi_a + i xi_b ; eta_b -> 1/2 xi_a - i/2 xi_b
        img[a].insert(1 << a, one.clone());
        img[a].insert(1 << b, i.clone());
        img[b].insert(1 << a, half.clone());
        img[b].insert(1 << b, mi2.clone());
    }
    if n % 2 == 1 {
        img[n / 2].insert(1 << (n / 2), one.clone());
    }
    let phi = |s: u32| -> GElem {
        let mut acc = GElem::new();
        acc.insert(0, Gauss::one());
        for a in 0..n {
            if s & (1 << a) != 0 {
                acc = g_mul(&acc, &img[a]);
            }
        }
        acc
    };
    let split = Gram::split(n);
    let sq = Gram::squares(n);
    for a in 0..(1u32 << n) {
        for b in 0..(1u32 << n) {
            let mut ua = SVec::new();
            ua.insert(a as usize, Q::one());
            let mut ub = SVec::new();
            ub.insert(b as usize, Q::one());
            let lhs_q = qpoisson(n, &split, &ua, &ub);
            let mut lhs = GElem::new();
            for (s, c) in &lhs_q {
                g_add(&mut lhs, &phi(*s as u32), &Gauss::real(c.clone()));
            }
            let rhs = g_poisson(n, &sq.inv, &phi(a), &phi(b), a.count_ones());
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}
