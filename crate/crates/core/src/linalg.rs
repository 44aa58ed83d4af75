//! Exact linear algebra: sparse rational echelon forms for moderate systems
//! and a fraction-free integer span engine for the large cohomology blocks.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::coeff::Q;

pub type SVec = BTreeMap<usize, Q>;

pub fn svec_add_scaled(v: &mut SVec, w: &SVec, c: &Q) {
    if c.is_zero() {
        return;
    }
    for (k, x) in w {
        let e = v.entry(*k).or_insert_with(Q::zero);
        *e += x * c;
        if e.is_zero() {
            v.remove(k);
        }
    }
}

pub fn svec_scale(v: &SVec, c: &Q) -> SVec {
    if c.is_zero() {
        return SVec::new();
    }
    v.iter().map(|(k, x)| (*k, x * c)).collect()
}

pub fn dense_to_svec(v: &[Q]) -> SVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn svec_to_dense(v: &SVec, n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n];
    for (k, x) in v {
        out[*k] = x.clone();
    }
    out
}

/// Row echelon form built incrementally. Each stored row has leading
/// coefficient 1 at its pivot column and no entries at smaller columns.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<SVec>,
    pivot_row: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Rebuilds an echelon from rows in reduced row echelon form.
    pub fn from_rows(rows: Vec<SVec>) -> Self {
        let mut e = Echelon::new();
        for r in rows {
            e.push_reduced(r);
        }
        e
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.pivot_row.keys().copied().collect()
    }

    /// Reduces `v` against the stored rows; on return no entry of `v` sits at
    /// a pivot column.
    pub fn reduce(&self, v: &mut SVec) {
        let mut cursor = 0usize;
        loop {
            let next = v.range(cursor..).find(|(k, _)| self.pivot_row.contains_key(k)).map(|(k, x)| (*k, x.clone()));
            match next {
                None => return,
                Some((k, c)) => {
                    let row = &self.rows[self.pivot_row[&k]];
                    svec_add_scaled(v, row, &-c);
                    cursor = k + 1;
                }
            }
        }
    }

    /// Like [`Echelon::reduce`] but also records the combination used:
    /// returns coefficients `a_r` with v_original = v_reduced + sum a_r row_r.
    pub fn reduce_tracked(&self, v: &mut SVec) -> BTreeMap<usize, Q> {
        let mut used = BTreeMap::new();
        let mut cursor = 0usize;
        loop {
            let next = v.range(cursor..).find(|(k, _)| self.pivot_row.contains_key(k)).map(|(k, x)| (*k, x.clone()));
            match next {
                None => return used,
                Some((k, c)) => {
                    let r = self.pivot_row[&k];
                    svec_add_scaled(v, &self.rows[r], &-c.clone());
                    *used.entry(r).or_insert_with(Q::zero) += c;
                    cursor = k + 1;
                }
            }
        }
    }

    /// Inserts a row; returns true when it was independent of the span.
    pub fn insert(&mut self, mut v: SVec) -> bool {
        self.reduce(&mut v);
        self.push_reduced(v)
    }

    /// Inserts an already reduced vector. Returns false for zero.
    pub fn push_reduced(&mut self, mut v: SVec) -> bool {
        let (k, lead) = match v.iter().next() {
            None => return false,
            Some((k, x)) => (*k, x.clone()),
        };
        if !lead.is_one() {
            let inv = Q::one() / lead;
            for x in v.values_mut() {
                *x *= &inv;
            }
        }
        self.pivot_row.insert(k, self.rows.len());
        self.rows.push(v);
        true
    }

    pub fn contains(&self, v: &SVec) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_empty()
    }

    /// Fully reduced rows (RREF), sorted by pivot column.
    pub fn rref_rows(&self) -> Vec<SVec> {
        let mut rows: Vec<(usize, SVec)> = self
            .pivot_row
            .iter()
            .map(|(k, r)| (*k, self.rows[*r].clone()))
            .collect();
        // Back substitution from the last pivot upwards.
        for i in (0..rows.len()).rev() {
            let (pk, prow) = rows[i].clone();
            for j in 0..i {
                let c = rows[j].1.get(&pk).cloned();
                if let Some(c) = c {
                    svec_add_scaled(&mut rows[j].1, &prow, &-c);
                }
            }
        }
        rows.into_iter().map(|(_, r)| r).collect()
    }

    /// Basis of {x in Q^ncols : row . x = 0 for all rows}.
    pub fn kernel(&self, ncols: usize) -> Vec<SVec> {
        let rref = self.rref_rows();
        let pivots: Vec<usize> = self.pivot_row.keys().copied().collect();
        let piv_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut out = vec![];
        for f in 0..ncols {
            if piv_set.contains(&f) {
                continue;
            }
            let mut x = SVec::new();
            x.insert(f, Q::one());
            for (p, row) in pivots.iter().zip(&rref) {
                if let Some(c) = row.get(&f) {
                    x.insert(*p, -c.clone());
                }
            }
            out.push(x);
        }
        out
    }
}

/// RREF basis of the span of `vecs`.
pub fn span_basis(vecs: impl IntoIterator<Item = SVec>) -> Vec<SVec> {
    let mut e = Echelon::new();
    for v in vecs {
        e.insert(v);
    }
    e.rref_rows()
}

pub fn rank_of(vecs: impl IntoIterator<Item = SVec>) -> usize {
    let mut e = Echelon::new();
    for v in vecs {
        e.insert(v);
    }
    e.rank()
}

/// Kernel of the linear map given by its rows (each row a functional on
/// Q^ncols).
pub fn kernel_of_rows(rows: impl IntoIterator<Item = SVec>, ncols: usize) -> Vec<SVec> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    e.kernel(ncols)
}

/// Solves sum_j x_j cols[j] = b. Returns the coefficients of one solution.
pub fn solve_columns(cols: &[SVec], b: &SVec) -> Option<Vec<Q>> {
    // Track each inserted column as a combination of the originals.
    let mut e = Echelon::new();
    let mut combos: Vec<SVec> = vec![];
    for (j, c) in cols.iter().enumerate() {
        let mut v = c.clone();
        let used = e.reduce_tracked(&mut v);
        let mut combo = SVec::new();
        combo.insert(j, Q::one());
        for (r, a) in used {
            svec_add_scaled(&mut combo, &combos[r], &-a);
        }
        if let Some((_, lead)) = v.iter().next() {
            let inv = Q::one() / lead.clone();
            combo = svec_scale(&combo, &inv);
            e.push_reduced(v);
            combos.push(combo);
        }
    }
    let mut v = b.clone();
    let used = e.reduce_tracked(&mut v);
    if !v.is_empty() {
        return None;
    }
    let mut x = SVec::new();
    for (r, a) in used {
        svec_add_scaled(&mut x, &combos[r], &a);
    }
    Some(svec_to_dense(&x, cols.len()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("machine integer overflow")]
    Overflow,
    #[error("budget exceeded: {0}")]
    Budget(String),
}

/// Integer types usable by the fraction-free span engine.
pub trait ExactInt: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn from_big(b: &BigInt) -> Option<Self>;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn gcd(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn is_unit(&self) -> bool;
    fn to_big(&self) -> BigInt;
}

impl ExactInt for i128 {
    fn from_big(b: &BigInt) -> Option<Self> {
        i128::try_from(b).ok()
    }
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        *self / *o
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl ExactInt for BigInt {
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn is_unit(&self) -> bool {
        Signed::abs(self).is_one()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

pub type IVec<T> = Vec<(u64, T)>;

/// Span of integer vectors keyed by u64 coordinates, kept in echelon form
/// with respect to the largest key of each vector. Vectors are stored
/// primitive (content 1, positive leading entry).
pub struct IntSpan<T: ExactInt> {
    pivots: HashMap<u64, usize>,
    vecs: Vec<IVec<T>>,
    nnz: usize,
    max_nnz: usize,
}

impl<T: ExactInt> IntSpan<T> {
    pub fn new(max_nnz: usize) -> Self {
        IntSpan {
            pivots: HashMap::new(),
            vecs: vec![],
            nnz: 0,
            max_nnz,
        }
    }

    pub fn rank(&self) -> usize {
        self.vecs.len()
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    fn primitive(v: &mut IVec<T>) {
        if v.is_empty() {
            return;
        }
        let mut g = T::zero();
        for (_, x) in v.iter() {
            g = g.gcd(x);
            if g.is_unit() {
                break;
            }
        }
        let neg = v.last().unwrap().1.is_negative();
        if !g.is_unit() || neg {
            let g = if neg { g.neg() } else { g };
            for (_, x) in v.iter_mut() {
                *x = x.div_exact(&g);
            }
        }
    }

    /// Reduces `v` (sorted by key) to a form with no entry at a pivot key.
    pub fn reduce(&self, mut v: IVec<T>) -> Result<IVec<T>, RankError> {
        let mut pos = v.len();
        while pos > 0 {
            let k = v[pos - 1].0;
            let pi = match self.pivots.get(&k) {
                None => {
                    pos -= 1;
                    continue;
                }
                Some(&pi) => pi,
            };
            let p = &self.vecs[pi];
            let pc = &p.last().unwrap().1;
            let c = &v[pos - 1].1;
            let g = pc.gcd(c);
            let a = pc.div_exact(&g);
            let b = c.div_exact(&g);
            v = merge_comb(&v, &a, p, &b)?;
            pos = v.partition_point(|(kk, _)| *kk < k);
            Self::primitive(&mut v);
        }
        Ok(v)
    }

    /// Adds `v` to the span; returns whether it was independent.
    pub fn insert(&mut self, v: IVec<T>) -> Result<bool, RankError> {
        let mut v = self.reduce(v)?;
        if v.is_empty() {
            return Ok(false);
        }
        Self::primitive(&mut v);
        let k = v.last().unwrap().0;
        self.nnz += v.len();
        if self.nnz > self.max_nnz {
            return Err(RankError::Budget(format!("more than {} stored nonzeros", self.max_nnz)));
        }
        self.pivots.insert(k, self.vecs.len());
        self.vecs.push(v);
        Ok(true)
    }
}

/// a*v - b*p for sorted sparse vectors.
fn merge_comb<T: ExactInt>(v: &IVec<T>, a: &T, p: &IVec<T>, b: &T) -> Result<IVec<T>, RankError> {
    let mut out = Vec::with_capacity(v.len() + p.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < p.len() {
        let ki = v.get(i).map(|x| x.0);
        let kj = p.get(j).map(|x| x.0);
        match (ki, kj) {
            (Some(x), Some(y)) if x == y => {
                let t1 = v[i].1.mul(a).ok_or(RankError::Overflow)?;
                let t2 = p[j].1.mul(b).ok_or(RankError::Overflow)?;
                let s = t1.sub(&t2).ok_or(RankError::Overflow)?;
                if !s.is_zero() {
                    out.push((x, s));
                }
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push((x, v[i].1.mul(a).ok_or(RankError::Overflow)?));
                i += 1;
            }
            (Some(x), None) => {
                out.push((x, v[i].1.mul(a).ok_or(RankError::Overflow)?));
                i += 1;
            }
            (_, Some(y)) => {
                let t = p[j].1.mul(b).ok_or(RankError::Overflow)?;
                out.push((y, t.neg()));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(out)
}

/// Rank of a family of integer vectors, trying i128 first and falling back to
/// big integers on overflow.
pub fn int_rank(vecs: &[IVec<BigInt>], max_nnz: usize) -> Result<usize, RankError> {
    let mut small = IntSpan::<i128>::new(max_nnz);
    let mut ok = true;
    for v in vecs {
        let conv: Option<IVec<i128>> = v.iter().map(|(k, x)| i128::from_big(x).map(|y| (*k, y))).collect();
        let conv = match conv {
            Some(c) => c,
            None => {
                ok = false;
                break;
            }
        };
        match small.insert(conv) {
            Ok(_) => {}
            Err(RankError::Overflow) => {
                ok = false;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if ok {
        return Ok(small.rank());
    }
    let mut big = IntSpan::<BigInt>::new(max_nnz);
    for v in vecs {
        big.insert(v.clone())?;
    }
    Ok(big.rank())
}

/// Scales a rational sparse vector to a primitive integer vector.
pub fn to_integer_vec(v: &BTreeMap<u64, Q>) -> IVec<BigInt> {
    let mut l = BigInt::one();
    for x in v.values() {
        l = l.lcm(x.denom());
    }
    v.iter()
        .filter(|(_, x)| !x.is_zero())
        .map(|(k, x)| (*k, (x * Q::from_integer(l.clone())).to_integer()))
        .collect()
}

/// Gaussian rationals Q(i), used to verify changes of variables that need a
/// square root of -1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gauss {
    pub re: Q,
    pub im: Q,
}

impl Gauss {
    pub fn new(re: Q, im: Q) -> Self {
        Gauss { re, im }
    }
    pub fn real(re: Q) -> Self {
        Gauss { re, im: Q::zero() }
    }
    pub fn zero() -> Self {
        Gauss::real(Q::zero())
    }
    pub fn one() -> Self {
        Gauss::real(Q::one())
    }
    pub fn i() -> Self {
        Gauss::new(Q::zero(), Q::one())
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn add(&self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }
    pub fn sub(&self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }
    pub fn mul(&self, o: &Gauss) -> Gauss {
        Gauss::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
    pub fn scale(&self, c: &Q) -> Gauss {
        Gauss::new(&self.re * c, &self.im * c)
    }
    pub fn neg(&self) -> Gauss {
        Gauss::new(-self.re.clone(), -self.im.clone())
    }
}

/// Determinant of a small square matrix over Q(i) by cofactor-free
/// elimination.
pub fn gauss_det(m: &[Vec<Gauss>]) -> Gauss {
    let n = m.len();
    let mut a: Vec<Vec<Gauss>> = m.to_vec();
    let mut det = Gauss::one();
    for c in 0..n {
        let p = match (c..n).find(|&r| !a[r][c].is_zero()) {
            None => return Gauss::zero(),
            Some(p) => p,
        };
        if p != c {
            a.swap(p, c);
            det = det.neg();
        }
        let piv = a[c][c].clone();
        det = det.mul(&piv);
        // inverse of piv
        let nrm = &piv.re * &piv.re + &piv.im * &piv.im;
        let inv = Gauss::new(&piv.re / &nrm, -(&piv.im / &nrm));
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].mul(&inv);
            for k in c..n {
                let t = f.mul(&a[c][k]);
                a[r][k] = a[r][k].sub(&t);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::q;
    use proptest::prelude::*;

    fn sv(v: &[i64]) -> SVec {
        dense_to_svec(&v.iter().map(|&x| q(x)).collect::<Vec<_>>())
    }

    #[test]
    fn kernel_and_rank() {
        let rows = vec![sv(&[1, 2, 3]), sv(&[2, 4, 6]), sv(&[0, 1, 1])];
        assert_eq!(rank_of(rows.clone()), 2);
        let k = kernel_of_rows(rows.clone(), 3);
        assert_eq!(k.len(), 1);
        for r in &rows {
            let dot: Q = r.iter().map(|(i, x)| x * k[0].get(i).cloned().unwrap_or_else(Q::zero)).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn solve() {
        let cols = vec![sv(&[1, 0, 1]), sv(&[0, 1, 1]), sv(&[1, 1, 2])];
        let b = sv(&[2, 3, 5]);
        let x = solve_columns(&cols, &b).unwrap();
        let mut acc = SVec::new();
        for (j, c) in cols.iter().enumerate() {
            svec_add_scaled(&mut acc, c, &x[j]);
        }
        assert_eq!(acc, b);
        assert!(solve_columns(&cols, &sv(&[1, 0, 0])).is_none());
    }

    #[test]
    fn gaussian_determinant() {
        let m = vec![
            vec![Gauss::one(), Gauss::real(crate::coeff::qf(1, 2))],
            vec![Gauss::i(), Gauss::i().scale(&crate::coeff::qf(-1, 2))],
        ];
        // det = -i/2 - i/2 = -i
        assert_eq!(gauss_det(&m), Gauss::i().neg());
    }

    fn rational_rank(vs: &[Vec<i64>]) -> usize {
        rank_of(vs.iter().map(|v| sv(v)))
    }

    proptest! {
        #[test]
        fn int_engine_matches_rational(rows in proptest::collection::vec(proptest::collection::vec(-4i64..5, 6), 1..8)) {
            let ivs: Vec<IVec<BigInt>> = rows.iter().map(|r| r.iter().enumerate()
                .filter(|(_, x)| **x != 0).map(|(k, x)| (k as u64, BigInt::from(*x))).collect()).collect();
            prop_assert_eq!(int_rank(&ivs, usize::MAX).unwrap(), rational_rank(&rows));
            let mut big = IntSpan::<BigInt>::new(usize::MAX);
            for v in &ivs { big.insert(v.clone()).unwrap(); }
            prop_assert_eq!(big.rank(), rational_rank(&rows));
        }
    }
}
