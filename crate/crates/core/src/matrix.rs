//! Matrix Lie superalgebras and supermatrix operations.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeff::{q, CoeffError, ParameterRing, Parity, Scalar, Q};
use crate::liesuper::{BasisElement, Coordinatizer, LieError, QEntry, SuperLieAlgebra};
use crate::linalg::{kernel_of_rows, SVec};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("matrix is not homogeneous")]
    Inhomogeneous,
    #[error("bilinear form is degenerate")]
    Degenerate,
    #[error("matrix is singular")]
    Singular,
    #[error("not an element of q(n)")]
    NotQueer,
    #[error("parameter `{0}` missing from the ring")]
    MissingParameter(String),
    #[error("excluded parameter value: {0}")]
    ExcludedParameter(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Format {
    pub parities: Vec<Parity>,
}

impl Format {
    pub fn standard(m: usize, n: usize) -> Format {
        let mut parities = vec![Parity::Even; m];
        parities.extend(vec![Parity::Odd; n]);
        Format { parities }
    }
    pub fn size(&self) -> usize {
        self.parities.len()
    }
    pub fn is_standard(&self) -> bool {
        self.parities.windows(2).all(|w| !(w[0].is_odd() && !w[1].is_odd()))
    }
    fn p(&self, i: usize) -> u32 {
        self.parities[i].bit()
    }
}

/// A homogeneous supermatrix with entries in a parameter ring.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix {
    pub format: Format,
    pub entries: Vec<Vec<Scalar>>,
    pub parity: Parity,
}

fn sgn(e: u32) -> Q {
    if e % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

impl SuperMatrix {
    pub fn zero(format: Format, ring: &Arc<ParameterRing>, parity: Parity) -> Self {
        let n = format.size();
        SuperMatrix {
            format,
            entries: vec![vec![Scalar::zero(ring); n]; n],
            parity,
        }
    }

    pub fn from_rational(format: Format, rows: &[Vec<Q>], parity: Parity) -> Self {
        let r = ParameterRing::rationals();
        SuperMatrix {
            format,
            entries: rows.iter().map(|row| row.iter().map(|c| Scalar::from_rational(&r, c.clone())).collect()).collect(),
            parity,
        }
    }

    pub fn size(&self) -> usize {
        self.format.size()
    }

    pub fn ring(&self) -> Arc<ParameterRing> {
        self.entries[0][0].ring().clone()
    }

    /// Every entry (i,j) has scalar parity p(X) + p_i + p_j.
    pub fn is_homogeneous(&self) -> bool {
        let n = self.size();
        for i in 0..n {
            for j in 0..n {
                let e = &self.entries[i][j];
                if e.is_zero() {
                    continue;
                }
                let want = self.parity + self.format.parities[i] + self.format.parities[j];
                if e.parity() != Some(want) {
                    return false;
                }
            }
        }
        true
    }

    pub fn mul(&self, o: &SuperMatrix) -> Result<SuperMatrix, MatrixError> {
        let n = self.size();
        let ring = self.ring();
        let mut out = SuperMatrix::zero(self.format.clone(), &ring, self.parity + o.parity);
        for i in 0..n {
            for k in 0..n {
                let mut acc = Scalar::zero(&ring);
                for j in 0..n {
                    if self.entries[i][j].is_zero() || o.entries[j][k].is_zero() {
                        continue;
                    }
                    acc = acc.try_add(&self.entries[i][j].try_mul(&o.entries[j][k])?)?;
                }
                out.entries[i][k] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &SuperMatrix) -> Result<SuperMatrix, MatrixError> {
        let mut out = self.clone();
        for (r, ro) in out.entries.iter_mut().zip(&o.entries) {
            for (a, b) in r.iter_mut().zip(ro) {
                *a = a.try_add(b)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> SuperMatrix {
        let mut out = self.clone();
        for r in out.entries.iter_mut() {
            for a in r.iter_mut() {
                *a = a.scale(c);
            }
        }
        out
    }

    /// [X, Y] = XY - (-1)^{p(X)p(Y)} YX
    pub fn supercommutator(&self, o: &SuperMatrix) -> Result<SuperMatrix, MatrixError> {
        let s = -q(self.parity.sign_with(o.parity));
        self.mul(o)?.add(&o.mul(self)?.scale(&s))
    }

    /// Supertrace sum_i (-1)^{p_i (p(X)+1)} X_ii; tr A - (-1)^{p(X)} tr D in
    /// standard format.
    pub fn str(&self) -> Result<Scalar, MatrixError> {
        let mut acc = Scalar::zero(&self.ring());
        for i in 0..self.size() {
            let e = self.format.p(i) * (self.parity.bit() + 1);
            acc = acc.try_add(&self.entries[i][i].scale(&sgn(e)))?;
        }
        Ok(acc)
    }

    pub fn trace(&self) -> Result<Scalar, MatrixError> {
        let mut acc = Scalar::zero(&self.ring());
        for i in 0..self.size() {
            acc = acc.try_add(&self.entries[i][i])?;
        }
        Ok(acc)
    }

    /// (X^st)_{ij} = (-1)^{(p_i+p_j)(p_i+p(X))} X_{ji}
    pub fn supertranspose(&self) -> Result<SuperMatrix, MatrixError> {
        if !self.is_homogeneous() {
            return Err(MatrixError::Inhomogeneous);
        }
        let n = self.size();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                let e = (self.format.p(i) + self.format.p(j)) * (self.format.p(i) + self.parity.bit());
                out.entries[i][j] = self.entries[j][i].scale(&sgn(e));
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.iter().all(|e| e.is_zero()))
    }

    pub fn to_rational(&self) -> Option<Vec<Vec<Q>>> {
        self.entries.iter().map(|r| r.iter().map(|e| e.as_rational()).collect()).collect()
    }
}

/// A homogeneous bilinear form given by its Gram matrix; the form takes the
/// values B(v_i, v_j) = (-1)^{p(B) p_i} B_ij on basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GramForm {
    pub matrix: SuperMatrix,
}

impl GramForm {
    pub fn new(matrix: SuperMatrix) -> Result<GramForm, MatrixError> {
        if !matrix.is_homogeneous() {
            return Err(MatrixError::Inhomogeneous);
        }
        Ok(GramForm { matrix })
    }

    pub fn parity(&self) -> Parity {
        self.matrix.parity
    }

    /// (B^u)_{ij} = (-1)^{p_i p_j + p(B)(p_i + p_j)} B_{ji}
    pub fn upsetting(&self) -> GramForm {
        let m = &self.matrix;
        let n = m.size();
        let mut out = m.clone();
        for i in 0..n {
            for j in 0..n {
                let (pi, pj) = (m.format.p(i), m.format.p(j));
                out.entries[i][j] = m.entries[j][i].scale(&sgn(pi * pj + m.parity.bit() * (pi + pj)));
            }
        }
        GramForm { matrix: out }
    }

    pub fn is_symmetric(&self) -> bool {
        self.upsetting() == *self
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.upsetting().matrix == self.matrix.scale(&q(-1))
    }

    /// The form on Pi(V): B'(Pi x, Pi y) = (-1)^{p(B) + p(x) + p(x)p(y)} B(x, y).
    pub fn pi_twist(&self) -> GramForm {
        let m = &self.matrix;
        let n = m.size();
        let pb = m.parity.bit();
        let flipped = Format {
            parities: m.format.parities.iter().map(|p| *p + Parity::Odd).collect(),
        };
        let mut out = SuperMatrix {
            format: flipped,
            entries: m.entries.clone(),
            parity: m.parity,
        };
        for i in 0..n {
            for j in 0..n {
                let (pi, pj) = (m.format.p(i), m.format.p(j));
                // value of the old form, then of the new one, then back to Gram
                let e = pb * pi + (pb + pi + pi * pj) + pb * (pi + 1);
                out.entries[i][j] = m.entries[i][j].scale(&sgn(e));
            }
        }
        GramForm { matrix: out }
    }

    /// B_ev(m|2n) = diag(A_m, J_2n) with A_m the antidiagonal unit matrix and
    /// J_2n = [[0, 1], [-1, 0]].
    pub fn even_standard(m: usize, n2: usize) -> Result<GramForm, MatrixError> {
        if n2 % 2 != 0 {
            return Err(MatrixError::InvalidSize("odd block of B_ev must be even-dimensional".into()));
        }
        let size = m + n2;
        let mut rows = vec![vec![Q::zero(); size]; size];
        for i in 0..m {
            rows[i][m - 1 - i] = Q::one();
        }
        let h = n2 / 2;
        for k in 0..h {
            rows[m + k][m + h + k] = Q::one();
            rows[m + h + k][m + k] = -Q::one();
        }
        GramForm::new(SuperMatrix::from_rational(Format::standard(m, n2), &rows, Parity::Even))
    }

    /// The odd form J_2n = [[0, 1_n], [-1_n, 0]] on (n|n), symmetric in the
    /// upsetting sense.
    pub fn odd_standard(n: usize) -> Result<GramForm, MatrixError> {
        let size = 2 * n;
        let mut rows = vec![vec![Q::zero(); size]; size];
        for k in 0..n {
            rows[k][n + k] = Q::one();
            rows[n + k][k] = -Q::one();
        }
        GramForm::new(SuperMatrix::from_rational(Format::standard(n, n), &rows, Parity::Odd))
    }
}

/// q(n) element [[A, B], [B, A]] -> tr B.
pub fn qtr(x: &SuperMatrix) -> Result<Scalar, MatrixError> {
    let n2 = x.size();
    if n2 % 2 != 0 || x.format != Format::standard(n2 / 2, n2 / 2) {
        return Err(MatrixError::NotQueer);
    }
    let n = n2 / 2;
    for i in 0..n {
        for j in 0..n {
            if x.entries[i][j] != x.entries[n + i][n + j] || x.entries[i][n + j] != x.entries[n + i][j] {
                return Err(MatrixError::NotQueer);
            }
        }
    }
    let mut acc = Scalar::zero(&x.ring());
    for i in 0..n {
        acc = acc.try_add(&x.entries[i][n + i])?;
    }
    Ok(acc)
}

type RMat = Vec<Vec<Scalar>>;

fn rmat_mul(a: &RMat, b: &RMat) -> Result<RMat, MatrixError> {
    let n = a.len();
    let ring = a[0][0].ring().clone();
    let mut out = vec![vec![Scalar::zero(&ring); n]; n];
    for i in 0..n {
        for k in 0..n {
            let mut acc = Scalar::zero(&ring);
            for j in 0..n {
                acc = acc.try_add(&a[i][j].try_mul(&b[j][k])?)?;
            }
            out[i][k] = acc;
        }
    }
    Ok(out)
}

fn rmat_is_zero(a: &RMat) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// Inverse of a square matrix over a parameter ring whose constant part is
/// invertible: A^{-1} = sum_k (-A0^{-1} N)^k A0^{-1}, finite by nilpotency.
pub fn ring_inverse(a: &RMat) -> Result<RMat, MatrixError> {
    let n = a.len();
    let ring = a[0][0].ring().clone();
    let a0: Vec<Vec<Q>> = a.iter().map(|r| r.iter().map(|x| x.constant_term()).collect()).collect();
    let a0i = rational_inverse(&a0).ok_or(MatrixError::Singular)?;
    let a0i_s: RMat = a0i.iter().map(|r| r.iter().map(|x| Scalar::from_rational(&ring, x.clone())).collect()).collect();
    let nil: RMat = (0..n)
        .map(|i| (0..n).map(|j| &a[i][j] - &Scalar::from_rational(&ring, a0[i][j].clone())).collect())
        .collect();
    let step: RMat = rmat_mul(&a0i_s, &nil)?.into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
    let mut term = a0i_s.clone();
    let mut acc = a0i_s.clone();
    for _ in 0..256 {
        term = rmat_mul(&step, &term)?;
        if rmat_is_zero(&term) {
            return Ok(acc);
        }
        for i in 0..n {
            for j in 0..n {
                acc[i][j] = &acc[i][j] + &term[i][j];
            }
        }
    }
    Err(MatrixError::Singular)
}

pub fn rational_inverse(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(p, c);
        let inv = Q::one() / m[c][c].clone();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..2 * n {
                    let t = &m[c][k] * &f;
                    m[r][k] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Queer determinant of the GQ(n) element [[A, B], [B, A]]:
/// 1 + tau * sum_{i>=1} tr((A^{-1}B)^{2i-1}) / (2i-1).
pub fn qet(a: &RMat, b: &RMat, tau: &str) -> Result<Scalar, MatrixError> {
    let ring = a[0][0].ring().clone();
    let t = Scalar::param(&ring, tau).map_err(|_| MatrixError::MissingParameter(tau.into()))?;
    let ai = ring_inverse(a)?;
    let c = rmat_mul(&ai, b)?;
    let c2 = rmat_mul(&c, &c)?;
    let mut pow = c.clone();
    let mut sum = Scalar::zero(&ring);
    let mut k = 1i64;
    while !rmat_is_zero(&pow) && k < 512 {
        let mut tr = Scalar::zero(&ring);
        for i in 0..pow.len() {
            tr = &tr + &pow[i][i];
        }
        sum = &sum + &tr.scale(&crate::coeff::qf(1, k));
        pow = rmat_mul(&pow, &c2)?;
        k += 2;
    }
    Ok(&Scalar::one(&ring) + &(&t * &sum))
}

// ---------------------------------------------------------------------------
// Constructors

type QMat = Vec<Vec<Q>>;

fn qmat_zero(n: usize) -> QMat {
    vec![vec![Q::zero(); n]; n]
}

fn unit(n: usize, i: usize, j: usize) -> QMat {
    let mut m = qmat_zero(n);
    m[i][j] = Q::one();
    m
}

fn qmat_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let mut out = qmat_zero(n);
    for i in 0..n {
        for j in 0..n {
            if a[i][j].is_zero() {
                continue;
            }
            for k in 0..n {
                if !b[j][k].is_zero() {
                    out[i][k] += &a[i][j] * &b[j][k];
                }
            }
        }
    }
    out
}

fn flat(m: &QMat) -> SVec {
    let n = m.len();
    let mut v = SVec::new();
    for i in 0..n {
        for j in 0..n {
            if !m[i][j].is_zero() {
                v.insert(i * n + j, m[i][j].clone());
            }
        }
    }
    v
}

/// One basis matrix of a matrix algebra.
#[derive(Clone, Debug)]
pub struct BasisMatrix {
    pub label: String,
    pub parity: Parity,
    pub matrix: QMat,
    pub weight: Option<Vec<i64>>,
}

/// The Lie superalgebra spanned by homogeneous matrices under the
/// supercommutator.
pub fn matrix_algebra(name: &str, basis: &[BasisMatrix]) -> Result<SuperLieAlgebra, MatrixError> {
    let m = basis.len();
    let coords = Coordinatizer::new(&basis.iter().map(|b| flat(&b.matrix)).collect::<Vec<_>>());
    if coords.rank() != m {
        return Err(MatrixError::InvalidSize("basis matrices are dependent".into()));
    }
    let mut table = vec![vec![QEntry::new(); m]; m];
    for a in 0..m {
        for b in a..m {
            let s = q(basis[a].parity.sign_with(basis[b].parity));
            let ab = qmat_mul(&basis[a].matrix, &basis[b].matrix);
            let ba = qmat_mul(&basis[b].matrix, &basis[a].matrix);
            let mut c = ab;
            for i in 0..c.len() {
                for j in 0..c.len() {
                    let t = &ba[i][j] * &s;
                    c[i][j] -= t;
                }
            }
            let x = coords.coords(&flat(&c)).ok_or(LieError::NotClosed)?;
            table[a][b] = x.iter().map(|(k, v)| (*k, v.clone())).collect();
            if a != b {
                table[b][a] = x.iter().map(|(k, v)| (*k, -v * &s)).collect();
            }
        }
    }
    let be = basis
        .iter()
        .map(|b| {
            let mut e = BasisElement::new(b.label.clone(), b.parity);
            e.weight = b.weight.clone();
            e
        })
        .collect();
    Ok(SuperLieAlgebra::from_rational_table(name, be, table))
}

fn weight_ij(size: usize, i: usize, j: usize) -> Vec<i64> {
    let mut w = vec![0i64; size];
    w[i] += 1;
    w[j] -= 1;
    w
}

fn label_e(i: usize, j: usize) -> String {
    format!("E{}_{}", i + 1, j + 1)
}

pub fn gl(m: usize, n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    let f = Format::standard(m, n);
    let s = m + n;
    if s == 0 {
        return Err(MatrixError::InvalidSize("gl(0|0)".into()));
    }
    let mut basis = vec![];
    for i in 0..s {
        for j in 0..s {
            basis.push(BasisMatrix {
                label: label_e(i, j),
                parity: f.parities[i] + f.parities[j],
                matrix: unit(s, i, j),
                weight: Some(weight_ij(s, i, j)),
            });
        }
    }
    matrix_algebra(&format!("gl({m}|{n})"), &basis)
}

fn sl_basis(m: usize, n: usize) -> Vec<BasisMatrix> {
    let f = Format::standard(m, n);
    let s = m + n;
    let mut basis = vec![];
    for i in 0..s {
        for j in 0..s {
            if i != j {
                basis.push(BasisMatrix {
                    label: label_e(i, j),
                    parity: f.parities[i] + f.parities[j],
                    matrix: unit(s, i, j),
                    weight: Some(weight_ij(s, i, j)),
                });
            }
        }
    }
    for i in 0..s - 1 {
        let mut h = qmat_zero(s);
        h[i][i] = Q::one();
        h[i + 1][i + 1] = sgn(f.p(i) + f.p(i + 1) + 1);
        basis.push(BasisMatrix {
            label: format!("H{}", i + 1),
            parity: Parity::Even,
            matrix: h,
            weight: Some(vec![0; s]),
        });
    }
    basis
}

pub fn sl(m: usize, n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    if m + n < 2 {
        return Err(MatrixError::InvalidSize("sl needs m+n >= 2".into()));
    }
    matrix_algebra(&format!("sl({m}|{n})"), &sl_basis(m, n))
}

pub fn psl(n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    if n < 2 {
        return Err(MatrixError::InvalidSize("psl(n|n) needs n >= 2".into()));
    }
    let g = sl(n, n)?;
    let c = g.center()?;
    let mut p = g.quotient(&c)?;
    p.name = format!("psl({n}|{n})");
    Ok(p)
}

fn queer_pair(n: usize, a: &QMat, odd: bool) -> QMat {
    let mut m = qmat_zero(2 * n);
    for i in 0..n {
        for j in 0..n {
            if odd {
                m[i][n + j] = a[i][j].clone();
                m[n + i][j] = a[i][j].clone();
            } else {
                m[i][j] = a[i][j].clone();
                m[n + i][n + j] = a[i][j].clone();
            }
        }
    }
    m
}

fn queer_basis(n: usize, traceless_odd: bool) -> Vec<BasisMatrix> {
    let mut basis = vec![];
    for (odd, tag) in [(false, "A"), (true, "B")] {
        for i in 0..n {
            for j in 0..n {
                if odd && traceless_odd && i == j {
                    continue;
                }
                let mut w = vec![0i64; n];
                w[i] += 1;
                w[j] -= 1;
                basis.push(BasisMatrix {
                    label: format!("{tag}{}_{}", i + 1, j + 1),
                    parity: if odd { Parity::Odd } else { Parity::Even },
                    matrix: queer_pair(n, &unit(n, i, j), odd),
                    weight: Some(w),
                });
            }
        }
        if odd && traceless_odd {
            for i in 0..n - 1 {
                let mut a = qmat_zero(n);
                a[i][i] = Q::one();
                a[i + 1][i + 1] = -Q::one();
                basis.push(BasisMatrix {
                    label: format!("BH{}", i + 1),
                    parity: Parity::Odd,
                    matrix: queer_pair(n, &a, true),
                    weight: Some(vec![0; n]),
                });
            }
        }
    }
    basis
}

pub fn q_algebra(n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    if n == 0 {
        return Err(MatrixError::InvalidSize("q(0)".into()));
    }
    matrix_algebra(&format!("q({n})"), &queer_basis(n, false))
}

pub fn sq(n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    if n < 2 {
        return Err(MatrixError::InvalidSize("sq needs n >= 2".into()));
    }
    matrix_algebra(&format!("sq({n})"), &queer_basis(n, true))
}

pub fn psq(n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    let g = sq(n)?;
    let c = g.center()?;
    let mut p = g.quotient(&c)?;
    p.name = format!("psq({n})");
    Ok(p)
}

pub fn pq(n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    let g = q_algebra(n)?;
    let c = g.center()?;
    let mut p = g.quotient(&c)?;
    p.name = format!("pq({n})");
    Ok(p)
}

/// The preserver of a homogeneous nondegenerate form:
/// X^st B + (-1)^{p(X)p(B)} B X = 0, solved per parity and per weight of
/// the diagonal torus of the result.
pub fn aut_b(name: &str, form: &GramForm) -> Result<SuperLieAlgebra, MatrixError> {
    let basis = aut_b_matrices(form)?;
    if basis.is_empty() {
        return Ok(SuperLieAlgebra::from_rational_table(name, vec![], vec![]));
    }
    matrix_algebra(name, &basis)
}

pub fn aut_b_matrices(form: &GramForm) -> Result<Vec<BasisMatrix>, MatrixError> {
    let b = form.matrix.to_rational().ok_or(MatrixError::Inhomogeneous)?;
    let fmt = &form.matrix.format;
    let s = fmt.size();
    if rational_inverse(&b).is_none() {
        return Err(MatrixError::Degenerate);
    }
    let pb = form.matrix.parity;
    // diagonal torus: d_i + d_j = 0 whenever B_ij != 0
    let mut rows = vec![];
    for i in 0..s {
        for j in 0..s {
            if !b[i][j].is_zero() {
                let mut r = SVec::new();
                *r.entry(i).or_insert_with(Q::zero) += Q::one();
                *r.entry(j).or_insert_with(Q::zero) += Q::one();
                rows.push(r);
            }
        }
    }
    let torus = kernel_of_rows(rows, s);
    let mut idx_w: Vec<Vec<i64>> = vec![vec![]; s];
    for t in &torus {
        let l = t.values().fold(num_bigint::BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
        for (i, w) in idx_w.iter_mut().enumerate() {
            let x = t.get(&i).cloned().unwrap_or_else(Q::zero) * Q::from_integer(l.clone());
            w.push(x.to_integer().try_into().unwrap_or(0));
        }
    }
    let wt = |i: usize, j: usize| -> Vec<i64> { idx_w[i].iter().zip(&idx_w[j]).map(|(a, c)| a - c).collect() };
    let mut basis: Vec<BasisMatrix> = vec![];
    for px in [Parity::Even, Parity::Odd] {
        let sign = q(px.sign_with(pb));
        let mut groups: BTreeMap<Vec<i64>, Vec<(usize, usize)>> = BTreeMap::new();
        for i in 0..s {
            for j in 0..s {
                if fmt.parities[i] + fmt.parities[j] == px {
                    groups.entry(wt(i, j)).or_default().push((i, j));
                }
            }
        }
        for (w, cells) in groups {
            let mut eqs: BTreeMap<(usize, usize), SVec> = BTreeMap::new();
            for (a, &(r, c)) in cells.iter().enumerate() {
                // X_{rc} sits in X^st_{cr} with sign (-1)^{(p_c+p_r)(p_c+p(X))}
                let e = (fmt.p(c) + fmt.p(r)) * (fmt.p(c) + px.bit());
                for k in 0..s {
                    if !b[r][k].is_zero() {
                        *eqs.entry((c, k)).or_default().entry(a).or_insert_with(Q::zero) += sgn(e) * &b[r][k];
                    }
                }
                for i in 0..s {
                    if !b[i][r].is_zero() {
                        *eqs.entry((i, c)).or_default().entry(a).or_insert_with(Q::zero) += &sign * &b[i][r];
                    }
                }
            }
            let rows: Vec<SVec> = eqs
                .into_values()
                .map(|mut r| {
                    r.retain(|_, v| !v.is_zero());
                    r
                })
                .filter(|r| !r.is_empty())
                .collect();
            for v in kernel_of_rows(rows, cells.len()) {
                let mut m = qmat_zero(s);
                for (a, x) in &v {
                    let (r, c) = cells[*a];
                    m[r][c] = x.clone();
                }
                let mut label = String::new();
                for (a, x) in &v {
                    let (r, c) = cells[*a];
                    let coef = if x.is_one() {
                        String::new()
                    } else if *x == -Q::one() {
                        "-".into()
                    } else {
                        format!("{}*", crate::coeff::fmt_rational(x))
                    };
                    if !label.is_empty() && !coef.starts_with('-') {
                        label.push('+');
                    }
                    label.push_str(&coef);
                    label.push_str(&label_e(r, c));
                }
                basis.push(BasisMatrix {
                    label,
                    parity: px,
                    matrix: m,
                    weight: Some(w.clone()),
                });
            }
        }
    }
    Ok(basis)
}

pub fn osp(m: usize, n2: usize) -> Result<SuperLieAlgebra, MatrixError> {
    aut_b(&format!("osp({m}|{n2})"), &GramForm::even_standard(m, n2)?)
}

pub fn pe(n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    aut_b(&format!("pe({n})"), &GramForm::odd_standard(n)?)
}

/// pe(n) intersected with sl(n|n); str vanishes on odd matrices, so only the
/// even part shrinks.
pub fn spe(n: usize) -> Result<SuperLieAlgebra, MatrixError> {
    let mats = aut_b_matrices(&GramForm::odd_standard(n)?)?;
    let strq = |m: &QMat| -> Q { (0..2 * n).map(|i| if i < n { m[i][i].clone() } else { -m[i][i].clone() }).sum() };
    let mut keep = vec![];
    let mut carrying: Vec<(BasisMatrix, Q)> = vec![];
    for b in mats {
        let s = if b.parity.is_odd() { Q::zero() } else { strq(&b.matrix) };
        if s.is_zero() {
            keep.push(b);
        } else {
            carrying.push((b, s));
        }
    }
    for w in carrying.windows(2) {
        let ((a, sa), (c, sc)) = (&w[0], &w[1]);
        let f = sa / sc;
        let mut m = a.matrix.clone();
        for (row, crow) in m.iter_mut().zip(&c.matrix) {
            for (x, y) in row.iter_mut().zip(crow) {
                *x -= &f * y;
            }
        }
        keep.push(BasisMatrix {
            label: format!("({})-({})", a.label, c.label),
            parity: Parity::Even,
            matrix: m,
            weight: a.weight.clone(),
        });
    }
    keep.sort_by_key(|b| b.parity);
    matrix_algebra(&format!("spe({n})"), &keep)
}

/// Coefficients (a, b, c) of the three squaring terms of osp_alpha(4|2):
/// the space of triples for which the super Jacobi identity holds, found by
/// evaluating the Jacobiator for each unit triple.
pub fn osp_alpha_jacobi_kernel() -> Vec<SVec> {
    let mut rows: BTreeMap<(usize, usize, usize, usize), SVec> = BTreeMap::new();
    for u in 0..3 {
        let mut abc = [Q::zero(), Q::zero(), Q::zero()];
        abc[u] = Q::one();
        let r = ParameterRing::rationals();
        let g = osp_alpha_raw(&r, [Scalar::from_rational(&r, abc[0].clone()), Scalar::from_rational(&r, abc[1].clone()), Scalar::from_rational(&r, abc[2].clone())]);
        let n = g.dim();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    for (m, c) in g.jacobiator(i, j, k) {
                        rows.entry((i, j, k, m)).or_default().insert(u, c.as_rational().unwrap());
                    }
                }
            }
        }
    }
    kernel_of_rows(rows.into_values(), 3)
}

fn osp_alpha_raw(ring: &Arc<ParameterRing>, abc: [Scalar; 3]) -> SuperLieAlgebra {
    // basis: e_a, h_a, f_a for a = 0,1,2, then v_s for s in {+,-}^3
    let mut basis = vec![];
    for a in 0..3 {
        let mut we = vec![0i64; 3];
        we[a] = 2;
        let mut wf = vec![0i64; 3];
        wf[a] = -2;
        basis.push(BasisElement::new(format!("e{}", a + 1), Parity::Even).with_weight(we));
        basis.push(BasisElement::new(format!("h{}", a + 1), Parity::Even).with_weight(vec![0; 3]));
        basis.push(BasisElement::new(format!("f{}", a + 1), Parity::Even).with_weight(wf));
    }
    let signs: Vec<[i64; 3]> = (0..8).map(|m| [if m & 4 == 0 { 1 } else { -1 }, if m & 2 == 0 { 1 } else { -1 }, if m & 1 == 0 { 1 } else { -1 }]).collect();
    for s in &signs {
        let l: String = s.iter().map(|x| if *x > 0 { '+' } else { '-' }).collect();
        basis.push(BasisElement::new(format!("v{l}"), Parity::Odd).with_weight(s.to_vec()));
    }
    let vidx = |s: &[i64; 3]| -> usize { 9 + signs.iter().position(|t| t == s).unwrap() };
    let sc = |c: i64| Scalar::from_int(ring, c);
    // psi(+,-) = 1
    let psi = |x: i64, y: i64| -> i64 {
        match (x, y) {
            (1, -1) => 1,
            (-1, 1) => -1,
            _ => 0,
        }
    };
    // P(u, w) as element of sl2 factor a: (index offset, coefficient)
    let pmap = |x: i64, y: i64| -> (usize, i64) {
        match (x, y) {
            (1, 1) => (0, 2),
            (-1, -1) => (2, -2),
            _ => (1, -1),
        }
    };
    SuperLieAlgebra::from_upper("osp_alpha(4|2)", ring, basis, |i, j| {
        let mut out = vec![];
        if i < 9 && j < 9 {
            let (a, x) = (i / 3, i % 3);
            let (b, y) = (j / 3, j % 3);
            if a == b {
                match (x, y) {
                    (0, 1) => out.push((3 * a, sc(-2))),
                    (0, 2) => out.push((3 * a + 1, sc(1))),
                    (1, 2) => out.push((3 * a + 2, sc(-2))),
                    _ => {}
                }
            }
        } else if i < 9 {
            let (a, x) = (i / 3, i % 3);
            let s = signs[j - 9];
            let mut t = s;
            match x {
                0 => {
                    if s[a] == -1 {
                        t[a] = 1;
                        out.push((vidx(&t), sc(1)));
                    }
                }
                1 => out.push((j, sc(s[a]))),
                _ => {
                    if s[a] == 1 {
                        t[a] = -1;
                        out.push((vidx(&t), sc(1)));
                    }
                }
            }
        } else {
            let s = signs[i - 9];
            let t = signs[j - 9];
            for a in 0..3 {
                let others: Vec<usize> = (0..3).filter(|&b| b != a).collect();
                let f = psi(s[others[0]], t[others[0]]) * psi(s[others[1]], t[others[1]]);
                if f == 0 {
                    continue;
                }
                let (off, c) = pmap(s[a], t[a]);
                out.push((3 * a + off, abc[a].scale(&q(f * c))));
            }
        }
        out
    })
}

/// osp_alpha(4|2) with squaring coefficients (1, alpha, -1-alpha).
pub fn osp_alpha(alpha: &Scalar) -> Result<SuperLieAlgebra, MatrixError> {
    if let Some(a) = alpha.as_rational() {
        if a.is_zero() || a == -Q::one() {
            return Err(MatrixError::ExcludedParameter(crate::coeff::fmt_rational(&a)));
        }
    }
    let ring = alpha.ring().clone();
    let one = Scalar::one(&ring);
    let c = -(&one + alpha);
    let mut g = osp_alpha_raw(&ring, [one, alpha.clone(), c]);
    g.name = format!("osp_alpha(4|2), alpha = {alpha}");
    g.notes.push(
        "odd brackets [v,w] = a psi psi P1 + b psi psi P2 + c psi psi P3 with (a,b,c) = (1, alpha, -1-alpha), \
         psi(v+,v-) = 1 and P(u,w)z = psi(u,z)w + psi(w,z)u"
            .into(),
    );
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::qf;
    use crate::liesuper::Sdim;
    use rand::{Rng, SeedableRng};

    #[test]
    fn dimensions() {
        assert_eq!(gl(2, 1).unwrap().sdim(), Sdim::new(5, 4));
        assert_eq!(q_algebra(3).unwrap().sdim(), Sdim::new(9, 9));
        assert_eq!(psq(3).unwrap().sdim(), Sdim::new(8, 8));
        assert_eq!(pq(3).unwrap().sdim(), Sdim::new(8, 9));
        assert_eq!(pe(2).unwrap().sdim(), Sdim::new(4, 4));
        assert_eq!(pe(3).unwrap().sdim(), Sdim::new(9, 9));
        assert_eq!(spe(3).unwrap().sdim(), Sdim::new(8, 9));
        assert_eq!(osp(2, 2).unwrap().sdim(), Sdim::new(4, 4));
        assert_eq!(osp(4, 2).unwrap().sdim(), Sdim::new(9, 8));
        assert_eq!(osp(3, 2).unwrap().sdim(), Sdim::new(6, 6));
        assert_eq!(psl(2).unwrap().sdim(), Sdim::new(6, 8));
        let one = GramForm::new(SuperMatrix::from_rational(Format::standard(1, 0), &[vec![q(1)]], Parity::Even)).unwrap();
        assert_eq!(aut_b("o1", &one).unwrap().dim(), 0);
    }

    #[test]
    fn osp_table() {
        for (m, n) in [(1, 2), (2, 2), (3, 2), (4, 2), (2, 4)] {
            let g = osp(m, n).unwrap();
            let k = n / 2;
            assert_eq!(g.sdim(), Sdim::new(m * (m - 1) / 2 + k * (2 * k + 1), m * n));
            assert!(g.check_axioms().ok());
        }
    }

    #[test]
    fn axioms_hold() {
        for g in [gl(2, 1).unwrap(), sl(2, 1).unwrap(), q_algebra(2).unwrap(), sq(3).unwrap(), psq(3).unwrap(), pe(2).unwrap(), spe(3).unwrap()] {
            assert!(g.check_axioms().ok(), "{}", g.name);
        }
    }

    #[test]
    fn supertrace_examples() {
        let one: Vec<Vec<Q>> = (0..3).map(|i| (0..3).map(|j| if i == j { q(1) } else { q(0) }).collect()).collect();
        let x = SuperMatrix::from_rational(Format::standard(2, 1), &one, Parity::Even);
        assert_eq!(x.str().unwrap(), Scalar::rational(q(1)));
        // odd matrix with tau-valued diagonal blocks
        let r = ParameterRing::new(vec![], vec!["tau".into()]).unwrap();
        let t = Scalar::param(&r, "tau").unwrap();
        let z = Scalar::zero(&r);
        let y = SuperMatrix {
            format: Format::standard(1, 1),
            entries: vec![vec![t.scale(&q(2)), z.clone()], vec![z, t.scale(&q(3))]],
            parity: Parity::Odd,
        };
        assert!(y.is_homogeneous());
        assert_eq!(y.str().unwrap(), t.scale(&q(5)));
    }

    fn random_qmat(rng: &mut impl Rng, n: usize) -> Vec<Vec<Q>> {
        (0..n).map(|_| (0..n).map(|_| q(rng.gen_range(-3..4))).collect()).collect()
    }

    fn homogeneous_part(m: &[Vec<Q>], f: &Format, p: Parity) -> Vec<Vec<Q>> {
        let n = m.len();
        (0..n)
            .map(|i| (0..n).map(|j| if f.parities[i] + f.parities[j] == p { m[i][j].clone() } else { q(0) }).collect())
            .collect()
    }

    #[test]
    fn str_and_supertranspose_properties() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(2, 1), (1, 2), (2, 2)] {
            let f = Format::standard(m, n);
            for _ in 0..10 {
                for px in [Parity::Even, Parity::Odd] {
                    for py in [Parity::Even, Parity::Odd] {
                        let x = SuperMatrix::from_rational(f.clone(), &homogeneous_part(&random_qmat(&mut rng, m + n), &f, px), px);
                        let y = SuperMatrix::from_rational(f.clone(), &homogeneous_part(&random_qmat(&mut rng, m + n), &f, py), py);
                        assert!(x.supercommutator(&y).unwrap().str().unwrap().is_zero());
                    }
                    let x = SuperMatrix::from_rational(f.clone(), &homogeneous_part(&random_qmat(&mut rng, m + n), &f, px), px);
                    let st = x.supertranspose().unwrap();
                    let st4 = st.supertranspose().unwrap().supertranspose().unwrap().supertranspose().unwrap();
                    assert_eq!(st4, x);
                    if px == Parity::Even {
                        assert_ne!(st.supertranspose().unwrap(), x.clone().scale(&q(2)));
                    }
                }
            }
        }
    }

    #[test]
    fn supertranspose_blocks() {
        // even antidiag(B, C) with odd entries -> antidiag(C^t, -B^t)
        let r = ParameterRing::new(vec![], vec!["tau1".into(), "tau2".into()]).unwrap();
        let (b, c) = (Scalar::param(&r, "tau1").unwrap(), Scalar::param(&r, "tau2").unwrap());
        let z = Scalar::zero(&r);
        let f = Format::standard(1, 1);
        let x = SuperMatrix { format: f.clone(), entries: vec![vec![z.clone(), b.clone()], vec![c.clone(), z.clone()]], parity: Parity::Even };
        let st = x.supertranspose().unwrap();
        assert_eq!(st.entries, vec![vec![z.clone(), c], vec![-b, z]]);
    }

    #[test]
    fn queertrace() {
        let g = q_algebra(3).unwrap();
        let _ = g;
        let n = 3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = Format::standard(n, n);
        let mk = |a: &QMat, b: &QMat, p: Parity| {
            let mut m = queer_pair(n, a, false);
            let mb = queer_pair(n, b, true);
            for i in 0..2 * n {
                for j in 0..2 * n {
                    m[i][j] += &mb[i][j];
                }
            }
            SuperMatrix::from_rational(f.clone(), &m, p)
        };
        let z = qmat_zero(n);
        let id: QMat = (0..n).map(|i| (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect()).collect();
        assert!(qtr(&mk(&random_qmat(&mut rng, n), &z, Parity::Even)).unwrap().is_zero());
        assert_eq!(qtr(&mk(&z, &id, Parity::Odd)).unwrap(), Scalar::rational(q(3)));
        for _ in 0..10 {
            for (pa, pb) in [(Parity::Even, Parity::Odd), (Parity::Odd, Parity::Odd), (Parity::Even, Parity::Even)] {
                let x = if pa.is_odd() { mk(&z, &random_qmat(&mut rng, n), pa) } else { mk(&random_qmat(&mut rng, n), &z, pa) };
                let y = if pb.is_odd() { mk(&z, &random_qmat(&mut rng, n), pb) } else { mk(&random_qmat(&mut rng, n), &z, pb) };
                assert!(qtr(&x.supercommutator(&y).unwrap()).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn forms() {
        let bev = GramForm::even_standard(2, 2).unwrap();
        assert!(bev.is_symmetric());
        assert_eq!(bev.upsetting().upsetting(), bev);
        let j = GramForm::odd_standard(2).unwrap();
        assert!(j.is_symmetric());
        let pj = j.pi_twist();
        assert!(pj.is_antisymmetric());
        assert_eq!(pj.parity(), Parity::Odd);
        assert!(!j.matrix.format.parities.is_empty());
    }

    #[test]
    fn qet_examples() {
        let r = ParameterRing::new(vec![], vec!["tau".into(), "tau'".into()]).unwrap();
        let one = vec![vec![Scalar::one(&r)]];
        let zero = vec![vec![Scalar::zero(&r)]];
        assert_eq!(qet(&one, &zero, "tau").unwrap(), Scalar::one(&r));
        let b = vec![vec![Scalar::param(&r, "tau'").unwrap()]];
        assert_eq!(qet(&one, &b, "tau").unwrap(), Scalar::parse(&r, "1 + tau*tau'").unwrap());
        let _ = qf(1, 2);
    }

    #[test]
    fn osp_alpha_constraints() {
        let ker = osp_alpha_jacobi_kernel();
        assert_eq!(ker.len(), 2);
        // a + b + c = 0 on the kernel
        for v in &ker {
            let s: Q = v.values().cloned().sum();
            assert!(s.is_zero());
        }
        let g = osp_alpha(&Scalar::rational(q(2))).unwrap();
        assert_eq!(g.sdim(), Sdim::new(9, 8));
        assert!(g.check_axioms().ok());
        assert!(osp_alpha(&Scalar::rational(q(-1))).is_err());
    }
}
