//! Deformations: brackets [x, y] + eps c(x, y) over a parameter ring with
//! eps^2 = 0, the obstruction square of a cochain, triviality witnesses,
//! rescalings inside the svect~ families and Clifford quantization.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{crossing_parity, fmt_rational, q, CoeffError, ParameterRing, Parity, Scalar, Q};
use crate::cohomology::{is_coboundary, CoboundaryResult, Cochain, CohomologyError};
use crate::grassmann::render_mono;
use crate::liesuper::{AxiomReport, BasisElement, Entry, LieError, Sdim, SuperLieAlgebra};
use crate::linalg::{svec_add_scaled, SVec};
use crate::vectorial::{qpoisson, svect_tilde_even_fields, svect_tilde_even_rational, svect_tilde_odd, svect_tilde_odd_scaled, Gram, VectorialError};

#[derive(Debug, Error)]
pub enum DeformError {
    #[error("cochain must have degree 2, got {0}")]
    NotTwoCochain(usize),
    #[error("Jacobi identity fails: {0}")]
    Jacobi(String),
    #[error("the family does not match its base algebra: {0}")]
    Mismatch(String),
    #[error("parameter must be nonzero")]
    ZeroParameter,
    #[error("invalid Clifford size {0}")]
    CliffordSize(usize),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Vectorial(#[from] VectorialError),
}

/// g over a parameter ring with bracket [x, y] + eps c(x, y).
#[derive(Clone, Debug)]
pub struct DeformedAlgebra {
    pub base: SuperLieAlgebra,
    pub algebra: SuperLieAlgebra,
    pub param: String,
    pub correction: Cochain,
}

impl DeformedAlgebra {
    pub fn check(&self) -> AxiomReport {
        self.algebra.check_axioms()
    }

    /// Reads a family over Q[eps] with eps^2 = 0 as base bracket plus
    /// eps times a 2-cochain. Both algebras must share the basis.
    pub fn from_family(base: &SuperLieAlgebra, family: &SuperLieAlgebra, param: &str) -> Result<DeformedAlgebra, DeformError> {
        if base.dim() != family.dim() || base.parities() != family.parities() {
            return Err(DeformError::Mismatch("bases differ".into()));
        }
        let ring = family.ring();
        let eps = Scalar::param(ring, param)?;
        let ep = ring.even_index(param).is_some();
        let mut corr = None::<Cochain>;
        let n = base.dim();
        for a in 0..n {
            for b in a..n {
                if a == b && base.parity(a) == Parity::Even {
                    continue;
                }
                let mut c0 = SVec::new();
                let mut c1 = SVec::new();
                for (k, c) in family.entry(a, b) {
                    for (m, x) in c.terms() {
                        if m.is_unit() {
                            c0.insert(*k, x.clone());
                        } else if eps.terms().contains_key(m) {
                            c1.insert(*k, x.clone());
                        } else {
                            return Err(DeformError::Mismatch(format!("term of order above one in [{a},{b}]")));
                        }
                    }
                }
                let base_e: SVec = base.qentry(a, b).iter().cloned().collect();
                if c0 != base_e {
                    return Err(DeformError::Mismatch(format!("order zero of [{a},{b}]")));
                }
                if !c1.is_empty() {
                    let p = Parity::from_bit(base.parity(a).bit() + base.parity(b).bit() + base.parity(*c1.keys().next().unwrap()).bit());
                    let co = corr.get_or_insert_with(|| Cochain::zero(2, p));
                    co.values.insert(vec![a, b], c1);
                }
            }
        }
        let default_p = if ep { Parity::Even } else { Parity::Odd };
        Ok(DeformedAlgebra {
            base: base.clone(),
            algebra: family.clone(),
            param: param.into(),
            correction: corr.unwrap_or_else(|| Cochain::zero(2, default_p)),
        })
    }
}

fn param_ring(c: &Cochain, param: &str, order: u32) -> Result<Arc<ParameterRing>, DeformError> {
    Ok(if c.parity.is_odd() {
        ParameterRing::new(vec![], vec![param.to_string()])?
    } else {
        ParameterRing::new(vec![(param.to_string(), order)], vec![])?
    })
}

/// Bracket [x, y] + eps c(x, y). Odd cochains pair with an odd eps, even
/// ones with an even eps truncated at eps^2 = 0.
pub fn deform_bracket(g: &SuperLieAlgebra, c: &Cochain, param: &str) -> Result<DeformedAlgebra, DeformError> {
    deform_bracket_truncated(g, c, param, 2)
}

/// Like [`deform_bracket`] with even parameters truncated at eps^order = 0.
/// With order >= 3 the Jacobi identity also needs the obstruction square to
/// vanish, and a failure reports its residual.
pub fn deform_bracket_truncated(g: &SuperLieAlgebra, c: &Cochain, param: &str, order: u32) -> Result<DeformedAlgebra, DeformError> {
    if c.k != 2 {
        return Err(DeformError::NotTwoCochain(c.k));
    }
    c.check(g)?;
    g.qtable()?;
    let ring = param_ring(c, param, order)?;
    let eps = Scalar::param(&ring, param)?;
    let mut basis = g.basis().to_vec();
    // keep a grading only when the cochain respects it
    let (mut keep_deg, mut keep_w) = (true, true);
    for (args, v) in &c.values {
        for k in v.keys() {
            let b = |i: usize| &basis[i];
            if let (Some(d0), Some(d1), Some(dk)) = (b(args[0]).degree, b(args[1]).degree, b(*k).degree) {
                keep_deg &= d0 + d1 == dk;
            }
            if let (Some(w0), Some(w1), Some(wk)) = (&b(args[0]).weight, &b(args[1]).weight, &b(*k).weight) {
                keep_w &= w0.iter().zip(w1).map(|(x, y)| x + y).collect::<Vec<_>>() == *wk;
            }
        }
    }
    for b in &mut basis {
        if !keep_deg {
            b.degree = None;
        }
        if !keep_w {
            b.weight = None;
        }
    }
    let algebra = SuperLieAlgebra::from_upper(format!("{}+{param}*c", g.name), &ring, basis, |i, j| {
        let mut e: Entry = g.qentry(i, j).iter().map(|(k, x)| (*k, Scalar::from_rational(&ring, x.clone()))).collect();
        for (k, x) in c.eval(g, &[i, j]) {
            e.push((k, eps.scale(&x)));
        }
        e
    });
    let mut algebra = algebra;
    algebra.notes.push(format!("deformed by a {} 2-cochain with parameter {param}", if c.parity.is_odd() { "odd" } else { "even" }));
    let d = DeformedAlgebra {
        base: g.clone(),
        algebra,
        param: param.into(),
        correction: c.clone(),
    };
    let rep = d.check();
    if !rep.ok() {
        let detail = if !c.parity.is_odd() && order > 2 {
            let r = nr_square(g, c)?;
            format!("{} Jacobi failures; obstruction square: {}", rep.jacobi.len(), r.render(g))
        } else {
            format!(
                "{} Jacobi, {} antisymmetry, {} parity failures; first {:?}",
                rep.jacobi.len(),
                rep.antisymmetry.len(),
                rep.parity.len(),
                rep.jacobi.first()
            )
        };
        return Err(DeformError::Jacobi(detail));
    }
    Ok(d)
}

/// The obstruction square of a 2-cochain c of parity p(c):
///
///   (-1)^{p(c)p(x)} c(x, c(y,z)) - c(c(x,y), z) - (-1)^{p(x)p(y) + p(c)p(y)} c(y, c(x,z))
///
/// i.e. the Jacobiator of c with itself. For even c it is the eps^2 term of
/// the Jacobiator of [,] + eps c.
pub fn nr_square(g: &SuperLieAlgebra, c: &Cochain) -> Result<Cochain, DeformError> {
    if c.k != 2 {
        return Err(DeformError::NotTwoCochain(c.k));
    }
    let pc = c.parity;
    let cc = |x: usize, v: &SVec, left: bool| -> SVec {
        let mut out = SVec::new();
        for (m, a) in v {
            let args = if left { [x, *m] } else { [*m, x] };
            svec_add_scaled(&mut out, &c.eval(g, &args), a);
        }
        out
    };
    let mut out = Cochain::zero(3, Parity::Even);
    for t in crate::cohomology::argument_tuples(g, 3) {
        let (x, y, z) = (t[0], t[1], t[2]);
        let (px, py) = (g.parity(x), g.parity(y));
        let mut v = SVec::new();
        svec_add_scaled(&mut v, &cc(x, &c.eval(g, &[y, z]), true), &q(pc.sign_with(px)));
        svec_add_scaled(&mut v, &cc(z, &c.eval(g, &[x, y]), false), &-Q::one());
        svec_add_scaled(&mut v, &cc(y, &c.eval(g, &[x, z]), true), &-q(px.sign_with(py) * pc.sign_with(py)));
        if !v.is_empty() {
            out.values.insert(t, v);
        }
    }
    out.parity = Parity::Even;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Triviality {
    pub trivial: bool,
    /// b with phi = id + s eps b carrying the deformed bracket to the
    /// undeformed one.
    pub witness: Option<Cochain>,
    pub sign: i64,
    /// Set when the correction is shown to be a nonzero class.
    pub class_nonzero: bool,
    pub note: String,
}

/// Searches for phi = id + eps b (b a 1-cochain) with
/// phi([x, y]_D) = [phi x, phi y] over the extended ring. Complete here
/// since eps^2 = 0: order one is the full order.
pub fn is_trivial(d: &DeformedAlgebra, order_budget: usize) -> Result<Triviality, DeformError> {
    if order_budget == 0 {
        return Ok(Triviality {
            trivial: false,
            witness: None,
            sign: 0,
            class_nonzero: false,
            note: "not attempted".into(),
        });
    }
    if d.correction.is_zero() {
        return Ok(Triviality {
            trivial: true,
            witness: Some(Cochain::zero(1, d.correction.parity)),
            sign: 1,
            class_nonzero: false,
            note: "zero correction".into(),
        });
    }
    match is_coboundary(&d.base, &d.correction)? {
        CoboundaryResult::NotCoboundary(_) => Ok(Triviality {
            trivial: false,
            witness: None,
            sign: 0,
            class_nonzero: true,
            note: "correction is a nonzero cohomology class".into(),
        }),
        CoboundaryResult::Coboundary(b) => {
            for s in [1i64, -1] {
                if verify_witness(d, &b, s)? {
                    return Ok(Triviality {
                        trivial: true,
                        witness: Some(b),
                        sign: s,
                        class_nonzero: false,
                        note: "explicit even automorphism found".into(),
                    });
                }
            }
            Ok(Triviality {
                trivial: false,
                witness: None,
                sign: 0,
                class_nonzero: false,
                note: "coboundary found but no automorphism verified".into(),
            })
        }
    }
}

/// Checks phi([x,y]_D) = [phi x, phi y]_base with phi = id + s eps b.
pub fn verify_witness(d: &DeformedAlgebra, b: &Cochain, s: i64) -> Result<bool, DeformError> {
    let ring = d.algebra.ring().clone();
    let eps = Scalar::param(&ring, &d.param)?.scale(&q(s));
    let base = d.base.extend_scalars(&ring)?;
    let n = d.base.dim();
    let phi: Vec<BTreeMap<usize, Scalar>> = (0..n)
        .map(|a| {
            let mut v = BTreeMap::new();
            v.insert(a, Scalar::one(&ring));
            for (k, x) in b.eval(&d.base, &[a]) {
                v.insert(k, eps.scale(&x));
            }
            v
        })
        .collect();
    for a in 0..n {
        for bb in a..n {
            let mut lhs: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (k, c) in d.algebra.entry(a, bb) {
                for (m, y) in &phi[*k] {
                    let slot = lhs.entry(*m).or_insert_with(|| Scalar::zero(&ring));
                    *slot = slot.try_add(&c.try_mul(y)?)?;
                }
            }
            lhs.retain(|_, v| !v.is_zero());
            let rhs = base.bracket(&phi[a], &phi[bb])?;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct Rescaling {
    pub n: usize,
    /// lambda^n = ratio
    pub ratio: String,
    /// Rational lambda when one exists.
    pub lambda: Option<String>,
    /// lambda^{d_a} per basis vector
    pub exponents: Vec<i64>,
    pub verified: bool,
}

fn rational_root(r: &Q, n: u32) -> Option<Q> {
    let root = |x: &num_bigint::BigInt| -> Option<num_bigint::BigInt> {
        let neg = x < &num_bigint::BigInt::zero();
        if neg && n % 2 == 0 {
            return None;
        }
        let a = if neg { -x.clone() } else { x.clone() };
        let y = a.nth_root(n);
        if y.pow(n) == a {
            Some(if neg { -y } else { y })
        } else {
            None
        }
    };
    Some(Q::new(root(r.numer())?, root(r.denom())?))
}

/// Verifies phi(e_a) = lambda^{d_a} T_a is a bracket homomorphism from src
/// to tgt for lambda^n = r, as an identity in Q[lambda]/(lambda^n - r).
fn check_scaling(src: &SuperLieAlgebra, tgt: &SuperLieAlgebra, d: &[i64], t: &[SVec], n: i64, r: &Q) -> Result<bool, DeformError> {
    let ring = tgt.ring().clone();
    let src = src.extend_scalars(&ring)?;
    // lambda^e -> (e mod n, r^{floor(e/n)})
    let reduce = |e: i64| -> (i64, Q) {
        let j = e.rem_euclid(n);
        let f = (e - j) / n;
        let mut c = Q::one();
        let base = if f >= 0 { r.clone() } else { Q::one() / r };
        for _ in 0..f.abs() {
            c *= &base;
        }
        (j, c)
    };
    let lift = |v: &SVec| -> BTreeMap<usize, Scalar> { v.iter().map(|(k, x)| (*k, Scalar::from_rational(&ring, x.clone()))).collect() };
    let m = src.dim();
    for a in 0..m {
        for b in a..m {
            let mut lhs: BTreeMap<(i64, usize), Scalar> = BTreeMap::new();
            for (k, c) in src.entry(a, b) {
                let (j, f) = reduce(d[*k] - d[a] - d[b]);
                for (m2, x) in &t[*k] {
                    let slot = lhs.entry((j, *m2)).or_insert_with(|| Scalar::zero(&ring));
                    *slot = slot.try_add(&c.scale(&(x * &f)))?;
                }
            }
            let mut rhs: BTreeMap<(i64, usize), Scalar> = BTreeMap::new();
            for (m2, x) in tgt.bracket(&lift(&t[a]), &lift(&t[b]))? {
                rhs.insert((0, m2), x);
            }
            lhs.retain(|_, v| !v.is_zero());
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The substitution xi_i -> lambda xi_i, lambda^n t = t', between
/// svect~(0|n; t) and svect~(0|n; t') for even n and rational t, t'.
pub fn rescaling_isomorphism(n: usize, t: &Q, t2: &Q) -> Result<Rescaling, DeformError> {
    if t.is_zero() || t2.is_zero() {
        return Err(DeformError::ZeroParameter);
    }
    let src = svect_tilde_even_rational(n, t)?;
    let tgt = svect_tilde_even_rational(n, t2)?;
    let r = t2 / t;
    let (d, tv) = scaled_images(n, t, t2, &r)?;
    let verified = check_scaling(&src, &tgt, &d, &tv, n as i64, &r)?;
    Ok(Rescaling {
        n,
        ratio: fmt_rational(&r),
        lambda: rational_root(&r, n as u32).map(|x| fmt_rational(&x)),
        exponents: d,
        verified,
    })
}

/// Basis fields of src carried by xi -> lambda xi, written as lambda^{d_a}
/// times a rational vector in the basis of tgt.
fn scaled_images(n: usize, t: &Q, t2: &Q, r: &Q) -> Result<(Vec<i64>, Vec<SVec>), DeformError> {
    let sf = svect_tilde_even_fields(n, t)?;
    let tf = svect_tilde_even_fields(n, t2)?;
    let coords = crate::liesuper::Coordinatizer::new(&tf);
    let mut ds = vec![];
    let mut ts = vec![];
    for v in &sf {
        let deg = |k: usize| crate::vectorial::fdecode(n, k).0.count_ones() as i64 - 1;
        let d0 = v.keys().map(|k| deg(*k)).min().unwrap_or(0);
        let mut w = SVec::new();
        for (k, x) in v {
            let e = deg(*k) - d0;
            if e % n as i64 != 0 {
                return Err(DeformError::Mismatch("degrees of one basis field differ by a non-multiple of n".into()));
            }
            let mut f = Q::one();
            for _ in 0..e / n as i64 {
                f *= r;
            }
            w.insert(*k, x * f);
        }
        ds.push(d0);
        ts.push(coords.coords(&w).ok_or(LieError::NotClosed)?);
    }
    Ok((ds, ts))
}

/// svect~(0|n; tau) and svect~(0|n; r tau) for odd n: phi(e_a) =
/// lambda^{deg a} e_a with lambda^n = r.
pub fn rescaling_isomorphism_odd(n: usize, r: &Q) -> Result<Rescaling, DeformError> {
    if r.is_zero() {
        return Err(DeformError::ZeroParameter);
    }
    let src = svect_tilde_odd(n, "tau")?;
    let tgt = svect_tilde_odd_scaled(n, "tau", r)?;
    let base = crate::vectorial::svect(n)?;
    let d: Vec<i64> = base.basis().iter().map(|b| b.degree.unwrap_or(0)).collect();
    let t: Vec<SVec> = (0..src.dim()).map(|a| base.basis_vec(a)).collect();
    let verified = check_scaling(&src, &tgt, &d, &t, n as i64, r)?;
    Ok(Rescaling {
        n,
        ratio: fmt_rational(r),
        lambda: rational_root(r, n as u32).map(|x| fmt_rational(&x)),
        exponents: d,
        verified,
    })
}

// ---------------------------------------------------------------------------
// Clifford quantization

/// Clifford superalgebra on m odd generators with gamma_i gamma_j +
/// gamma_j gamma_i = 2 t delta_ij. Elements are maps monomial -> scalar.
#[derive(Clone, Debug)]
pub struct CliffordAlgebra {
    pub m: usize,
    pub t: Scalar,
}

pub type CliffordElement = BTreeMap<u32, Scalar>;

/// Multiplying the first-order term of [Q f, Q g] by this constant gives
/// Q({f, g}) for the Poisson bracket of sum (dxi_i)^2. Frozen from the
/// brute-force check on two generators.
pub const QUANTIZATION_CONSTANT: i64 = -2;

impl CliffordAlgebra {
    pub fn new(m: usize, t: Scalar) -> Result<Self, DeformError> {
        if m == 0 || m > 16 {
            return Err(DeformError::CliffordSize(m));
        }
        Ok(CliffordAlgebra { m, t })
    }

    /// t as a formal even parameter (exact up to t^(m+1) = 0).
    pub fn formal(m: usize, name: &str) -> Result<Self, DeformError> {
        let ring = ParameterRing::new(vec![(name.to_string(), m as u32 + 1)], vec![])?;
        let t = Scalar::param(&ring, name)?;
        Self::new(m, t)
    }

    pub fn rational(m: usize, t: Q) -> Result<Self, DeformError> {
        Self::new(m, Scalar::from_rational(&ParameterRing::rationals(), t))
    }

    pub fn ring(&self) -> &Arc<ParameterRing> {
        self.t.ring()
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    fn t_pow(&self, k: u32) -> Result<Scalar, DeformError> {
        let mut x = Scalar::one(self.ring());
        for _ in 0..k {
            x = x.try_mul(&self.t)?;
        }
        Ok(x)
    }

    /// gamma_S gamma_T = (-1)^{#{i in S, j in T, i > j}} t^{|S & T|} gamma_{S ^ T}
    pub fn mono_mul(&self, s: u32, tt: u32) -> Result<(u32, Scalar), DeformError> {
        let sign = crossing_parity(s as u64, tt as u64);
        let c = self.t_pow((s & tt).count_ones())?;
        Ok((s ^ tt, if sign == 1 { -c } else { c }))
    }

    pub fn mul(&self, a: &CliffordElement, b: &CliffordElement) -> Result<CliffordElement, DeformError> {
        let mut out = CliffordElement::new();
        for (s, x) in a {
            for (tt, y) in b {
                let (m, c) = self.mono_mul(*s, *tt)?;
                let v = x.try_mul(y)?.try_mul(&c)?;
                let slot = out.entry(m).or_insert_with(|| Scalar::zero(self.ring()));
                *slot = slot.try_add(&v)?;
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Supercommutator of two monomials.
    pub fn mono_bracket(&self, s: u32, tt: u32) -> Result<CliffordElement, DeformError> {
        let (m1, c1) = self.mono_mul(s, tt)?;
        let (m2, c2) = self.mono_mul(tt, s)?;
        let sign = if (s.count_ones() * tt.count_ones()) % 2 == 1 { -1 } else { 1 };
        let mut out = CliffordElement::new();
        out.insert(m1, c1);
        let slot = out.entry(m2).or_insert_with(|| Scalar::zero(self.ring()));
        *slot = slot.try_add(&c2.scale(&q(-sign)))?;
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// The Lie superalgebra (Cl, supercommutator) on the monomial basis.
    pub fn lie_algebra(&self) -> Result<SuperLieAlgebra, DeformError> {
        let mut monos: Vec<u32> = (0..(1u32 << self.m)).collect();
        monos.sort_by_key(|s| (s.count_ones(), *s));
        let pos: BTreeMap<u32, usize> = monos.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let basis: Vec<BasisElement> = monos
            .iter()
            .map(|&s| BasisElement::new(if s == 0 { "1".to_string() } else { render_mono(s).replace("xi", "g").replace('*', "") }, Parity::from_bit(s.count_ones() % 2)))
            .collect();
        let mut table: Vec<Vec<Entry>> = vec![vec![vec![]; monos.len()]; monos.len()];
        for (i, &s) in monos.iter().enumerate() {
            for (j, &tt) in monos.iter().enumerate() {
                table[i][j] = self.mono_bracket(s, tt)?.into_iter().map(|(m, c)| (pos[&m], c)).collect();
            }
        }
        Ok(SuperLieAlgebra::from_full_table(format!("Cl({})", self.m), self.ring(), basis, table))
    }
}

/// Q(xi^S) = gamma_S. Distinct generators anticommute, so the normalized
/// antisymmetrization of gamma_{i_1}...gamma_{i_k} is the ordered product.
pub fn quantize(cl: &CliffordAlgebra, s: u32) -> CliffordElement {
    let mut e = CliffordElement::new();
    e.insert(s, Scalar::one(cl.ring()));
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonMatch {
    pub pairs: usize,
    pub mismatches: usize,
    pub order_zero_vanishes: bool,
    pub constant: i64,
}

/// Compares the t-linear part of [Q f, Q g] with constant * Q({f, g}) on all
/// pairs of monomials, at formal t.
pub fn first_order_poisson_match(m: usize) -> Result<PoissonMatch, DeformError> {
    let cl = CliffordAlgebra::formal(m, "t")?;
    let gram = Gram::squares(m);
    let mut mismatches = 0;
    let mut zero_ok = true;
    let mut pairs = 0;
    for s in 0..(1u32 << m) {
        for tt in 0..(1u32 << m) {
            pairs += 1;
            let br = cl.mono_bracket(s, tt)?;
            let mut lin = SVec::new();
            for (mono, c) in &br {
                if !c.coefficient_of_even("t", 0).is_zero() {
                    zero_ok = false;
                }
                let x = c.coefficient_of_even("t", 1).constant_term();
                if !x.is_zero() {
                    lin.insert(*mono as usize, x);
                }
            }
            let mut a = SVec::new();
            a.insert(s as usize, Q::one());
            let mut b = SVec::new();
            b.insert(tt as usize, Q::one());
            let pb: SVec = qpoisson(m, &gram, &a, &b).into_iter().map(|(k, x)| (k, x * q(QUANTIZATION_CONSTANT))).collect();
            if pb != lin {
                mismatches += 1;
            }
        }
    }
    Ok(PoissonMatch {
        pairs,
        mismatches,
        order_zero_vanishes: zero_ok,
        constant: QUANTIZATION_CONSTANT,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerNode {
    pub name: String,
    pub sdim: Sdim,
}

#[derive(Clone, Debug)]
pub struct QuantizationTower {
    pub nodes: Vec<TowerNode>,
    /// The last node as an algebra.
    pub quotient: SuperLieAlgebra,
    pub simple: bool,
}

/// At rational t != 0: Cl -> [Cl, Cl] -> [Cl, Cl] / center.
pub fn quantization_tower(m: usize, t: &Q) -> Result<QuantizationTower, DeformError> {
    if t.is_zero() {
        return Err(DeformError::ZeroParameter);
    }
    let cl = CliffordAlgebra::rational(m, t.clone())?.lie_algebra()?;
    let mut nodes = vec![TowerNode {
        name: format!("Cl({m})"),
        sdim: cl.sdim(),
    }];
    let der = cl.derived_subalgebra()?;
    let dvecs: Vec<SVec> = der.rows.clone();
    let dsub = cl.subalgebra(format!("[Cl({m}),Cl({m})]"), &homogeneous_basis(&cl, &dvecs), None)?;
    nodes.push(TowerNode {
        name: dsub.name.clone(),
        sdim: dsub.sdim(),
    });
    let center = dsub.center()?;
    let mut quo = dsub.quotient(&center)?;
    quo.name = format!("[Cl({m}),Cl({m})]/center");
    nodes.push(TowerNode {
        name: quo.name.clone(),
        sdim: quo.sdim(),
    });
    let simple = quo.is_simple()?.simple;
    Ok(QuantizationTower { nodes, quotient: quo, simple })
}

/// Splits spanning vectors into parity-homogeneous ones.
fn homogeneous_basis(g: &SuperLieAlgebra, vecs: &[SVec]) -> Vec<SVec> {
    let mut out = vec![];
    for p in [Parity::Even, Parity::Odd] {
        let part: Vec<SVec> = vecs.iter().map(|v| v.iter().filter(|(k, _)| g.parity(**k) == p).map(|(k, x)| (*k, x.clone())).collect::<SVec>()).filter(|v| !v.is_empty()).collect();
        out.extend(crate::linalg::span_basis(part));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{differential, h_sdim, Options};
    use crate::matrix::{gl, q_algebra};
    use crate::vectorial::{h_prime, svect};

    fn rep(g: &SuperLieAlgebra) -> Cochain {
        let r = h_sdim(g, 2, &Options::default()).unwrap();
        assert_eq!(r.representatives.len(), 1);
        r.representatives[0].clone()
    }

    #[test]
    fn odd_class_deforms() {
        let g = svect(3).unwrap();
        let c = rep(&g);
        assert!(c.parity.is_odd());
        let d = deform_bracket(&g, &c, "tau").unwrap();
        assert!(d.check().ok());
        let t = is_trivial(&d, 1).unwrap();
        assert!(!t.trivial && t.class_nonzero);
    }

    #[test]
    fn even_class_deforms() {
        let g = svect(4).unwrap();
        let c = rep(&g);
        assert!(!c.parity.is_odd());
        assert!(deform_bracket(&g, &c, "t").unwrap().check().ok());
    }

    /// Cocycle if and only if the first-order Jacobi identity holds: a
    /// non-cocycle correction must be rejected.
    #[test]
    fn fault_injection() {
        let g = svect(3).unwrap();
        let mut c = rep(&g);
        let (k, v) = c.values.iter().next().map(|(a, b)| (a.clone(), b.clone())).unwrap();
        let mut v2 = v.clone();
        let (t, x) = v.iter().next().unwrap();
        v2.insert(*t, x + Q::one());
        c.values.insert(k, v2);
        assert!(!differential(&g, &c).unwrap().is_zero());
        assert!(matches!(deform_bracket(&g, &c, "tau"), Err(DeformError::Jacobi(_))));
    }

    #[test]
    fn coboundary_deformation_is_trivial() {
        let g = q_algebra(2).unwrap();
        let mut b = Cochain::zero(1, Parity::Odd);
        b.add(&g, &[0], 4, q(1));
        b.add(&g, &[5], 2, q(3));
        let c = differential(&g, &b).unwrap();
        let d = deform_bracket(&g, &c, "tau").unwrap();
        let t = is_trivial(&d, 1).unwrap();
        assert!(t.trivial, "{}", t.note);
        let g = gl(2, 1).unwrap();
        let mut b = Cochain::zero(1, Parity::Even);
        b.add(&g, &[0], 1, q(2));
        let c = differential(&g, &b).unwrap();
        let d = deform_bracket(&g, &c, "t").unwrap();
        assert!(is_trivial(&d, 1).unwrap().trivial);
        let z = deform_bracket(&g, &Cochain::zero(2, Parity::Even), "t").unwrap();
        assert!(is_trivial(&z, 1).unwrap().trivial);
    }

    #[test]
    fn family_correction_is_the_class() {
        let base = svect(3).unwrap();
        let fam = svect_tilde_odd(3, "tau").unwrap();
        let d = DeformedAlgebra::from_family(&base, &fam, "tau").unwrap();
        assert!(differential(&base, &d.correction).unwrap().is_zero());
        let t = is_trivial(&d, 1).unwrap();
        assert!(t.class_nonzero);
    }

    #[test]
    fn obstruction_square() {
        let g = h_prime(5, &Gram::split(5)).unwrap();
        let c = rep(&g);
        let sq = nr_square(&g, &c).unwrap();
        let dsq = differential(&g, &sq).unwrap();
        assert!(dsq.is_zero());
        assert!(is_coboundary(&g, &sq).unwrap().is_coboundary());
        assert!(nr_square(&g, &Cochain::zero(2, Parity::Even)).unwrap().is_zero());
    }

    #[test]
    fn rescalings() {
        let r = rescaling_isomorphism(4, &q(1), &q(16)).unwrap();
        assert!(r.verified);
        assert_eq!(r.lambda.as_deref(), Some("2"));
        let r = rescaling_isomorphism(4, &q(1), &q(3)).unwrap();
        assert!(r.verified && r.lambda.is_none());
        let r = rescaling_isomorphism(4, &q(5), &q(5)).unwrap();
        assert!(r.verified);
        let r = rescaling_isomorphism_odd(3, &q(3)).unwrap();
        assert!(r.verified);
    }

    #[test]
    fn clifford_basics() {
        let cl = CliffordAlgebra::formal(2, "t").unwrap();
        let t = Scalar::param(cl.ring(), "t").unwrap();
        let b = cl.mono_bracket(0b01, 0b01).unwrap();
        assert_eq!(b.get(&0), Some(&t.scale(&q(2))));
        assert!(cl.mono_bracket(0b01, 0b10).unwrap().is_empty());
        let c0 = CliffordAlgebra::rational(3, Q::zero()).unwrap();
        for s in 0..8 {
            for u in 0..8 {
                assert!(c0.mono_bracket(s, u).unwrap().is_empty());
            }
        }
        let m = first_order_poisson_match(2).unwrap();
        assert_eq!(m.mismatches, 0);
    }

    #[test]
    fn clifford_is_associative() {
        let cl = CliffordAlgebra::formal(3, "t").unwrap();
        for a in 0..8u32 {
            for b in 0..8u32 {
                for c in 0..8u32 {
                    let x = quantize(&cl, a);
                    let y = quantize(&cl, b);
                    let z = quantize(&cl, c);
                    assert_eq!(cl.mul(&cl.mul(&x, &y).unwrap(), &z).unwrap(), cl.mul(&x, &cl.mul(&y, &z).unwrap()).unwrap());
                }
            }
        }
    }
}
