//! Finite-dimensional Lie superalgebras given by structure constants.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{q, same_ring, CoeffError, ParameterRing, Parity, Scalar, Q};
use crate::linalg::{svec_add_scaled, Echelon, SVec};

pub mod io;
pub mod iso;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operation needs rational structure constants")]
    NotRational,
    #[error("subspace is not an ideal: [{0}, row {1}] leaves it")]
    NotIdeal(String, usize),
    #[error("vector is not homogeneous")]
    Inhomogeneous,
    #[error("vectors do not close under the bracket")]
    NotClosed,
    #[error("superdimensions differ: {0} vs {1}")]
    SdimMismatch(Sdim, Sdim),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Default, PartialOrd, Ord)]
pub struct Sdim {
    pub even: usize,
    pub odd: usize,
}

impl Sdim {
    pub fn new(even: usize, odd: usize) -> Self {
        Sdim { even, odd }
    }
    pub fn total(&self) -> usize {
        self.even + self.odd
    }
}

impl fmt::Display for Sdim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.even, self.odd)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct BasisElement {
    pub label: String,
    pub parity: Parity,
    pub degree: Option<i64>,
    pub weight: Option<Vec<i64>>,
}

impl BasisElement {
    pub fn new(label: impl Into<String>, parity: Parity) -> Self {
        BasisElement {
            label: label.into(),
            parity,
            degree: None,
            weight: None,
        }
    }
    pub fn with_degree(mut self, d: i64) -> Self {
        self.degree = Some(d);
        self
    }
    pub fn with_weight(mut self, w: Vec<i64>) -> Self {
        self.weight = Some(w);
        self
    }
}

pub type Entry = Vec<(usize, Scalar)>;
pub type QEntry = Vec<(usize, Q)>;

/// A Lie superalgebra with a homogeneous basis. `table[i][j]` holds
/// [e_i, e_j] for all pairs; constructors fill j < i by super-antisymmetry.
#[derive(Clone, Debug)]
pub struct SuperLieAlgebra {
    pub name: String,
    ring: Arc<ParameterRing>,
    basis: Vec<BasisElement>,
    table: Vec<Vec<Entry>>,
    qtable: Option<Vec<Vec<QEntry>>>,
    /// Free-form notes carried into reports (normalizations and the like).
    pub notes: Vec<String>,
}

fn normalize_entry(mut e: Entry) -> Entry {
    e.sort_by_key(|x| x.0);
    let mut out: Entry = Vec::with_capacity(e.len());
    for (k, c) in e {
        if let Some(last) = out.last_mut() {
            if last.0 == k {
                last.1 = &last.1 + &c;
                continue;
            }
        }
        out.push((k, c));
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

impl SuperLieAlgebra {
    /// Builds the algebra from brackets [e_i, e_j] for i <= j; the rest
    /// follows from super-antisymmetry.
    pub fn from_upper<F>(name: impl Into<String>, ring: &Arc<ParameterRing>, basis: Vec<BasisElement>, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Entry,
    {
        let n = basis.len();
        let mut table = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in i..n {
                let e = normalize_entry(f(i, j));
                let s = basis[i].parity.sign_with(basis[j].parity);
                // [e_j, e_i] = -(-1)^{p_i p_j} [e_i, e_j]
                let mirrored: Entry = e.iter().map(|(k, c)| (*k, c.scale(&q(-s)))).collect();
                if i != j {
                    table[j][i] = mirrored;
                }
                table[i][j] = e;
            }
        }
        Self::from_full_table(name, ring, basis, table)
    }

    /// Uses the given full table as is (no symmetrization).
    pub fn from_full_table(name: impl Into<String>, ring: &Arc<ParameterRing>, basis: Vec<BasisElement>, table: Vec<Vec<Entry>>) -> Self {
        let table: Vec<Vec<Entry>> = table.into_iter().map(|row| row.into_iter().map(normalize_entry).collect()).collect();
        let mut g = SuperLieAlgebra {
            name: name.into(),
            ring: ring.clone(),
            basis,
            table,
            qtable: None,
            notes: vec![],
        };
        g.refresh_qtable();
        g
    }

    /// Rational structure constants given for all ordered pairs.
    pub fn from_rational_table(name: impl Into<String>, basis: Vec<BasisElement>, table: Vec<Vec<QEntry>>) -> Self {
        let ring = ParameterRing::rationals();
        let t = table
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| e.into_iter().map(|(k, c)| (k, Scalar::from_rational(&ring, c))).collect())
                    .collect()
            })
            .collect();
        Self::from_full_table(name, &ring, basis, t)
    }

    fn refresh_qtable(&mut self) {
        let mut out = Vec::with_capacity(self.table.len());
        for row in &self.table {
            let mut r = Vec::with_capacity(row.len());
            for e in row {
                let mut qe = Vec::with_capacity(e.len());
                for (k, c) in e {
                    match c.as_rational() {
                        Some(x) => qe.push((*k, x)),
                        None => {
                            self.qtable = None;
                            return;
                        }
                    }
                }
                r.push(qe);
            }
            out.push(r);
        }
        self.qtable = Some(out);
    }

    /// Overwrites one structure constant in place, without mirroring. Meant
    /// for fault-injection tests.
    pub fn set_structure_constant(&mut self, i: usize, j: usize, k: usize, c: Scalar) {
        let mut e = self.table[i][j].clone();
        e.retain(|x| x.0 != k);
        e.push((k, c));
        self.table[i][j] = normalize_entry(e);
        self.refresh_qtable();
    }

    pub fn ring(&self) -> &Arc<ParameterRing> {
        &self.ring
    }
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }
    pub fn parity(&self, i: usize) -> Parity {
        self.basis[i].parity
    }
    pub fn parities(&self) -> Vec<Parity> {
        self.basis.iter().map(|b| b.parity).collect()
    }
    pub fn labels(&self) -> Vec<String> {
        self.basis.iter().map(|b| b.label.clone()).collect()
    }
    pub fn sdim(&self) -> Sdim {
        let odd = self.basis.iter().filter(|b| b.parity.is_odd()).count();
        Sdim::new(self.dim() - odd, odd)
    }
    pub fn entry(&self, i: usize, j: usize) -> &Entry {
        &self.table[i][j]
    }
    pub fn is_rational(&self) -> bool {
        self.qtable.is_some()
    }
    pub fn qtable(&self) -> Result<&Vec<Vec<QEntry>>, LieError> {
        self.qtable.as_ref().ok_or(LieError::NotRational)
    }
    pub fn qentry(&self, i: usize, j: usize) -> &QEntry {
        &self.qtable.as_ref().expect("rational algebra")[i][j]
    }
    pub fn has_degrees(&self) -> bool {
        self.basis.iter().all(|b| b.degree.is_some())
    }
    pub fn has_weights(&self) -> bool {
        self.basis.iter().all(|b| b.weight.is_some())
    }
    pub fn set_label(&mut self, i: usize, label: impl Into<String>) {
        self.basis[i].label = label.into();
    }
    pub fn strip_gradings(&mut self) {
        for b in &mut self.basis {
            b.degree = None;
            b.weight = None;
        }
    }
    pub fn set_weights(&mut self, w: Vec<Vec<i64>>) {
        for (b, w) in self.basis.iter_mut().zip(w) {
            b.weight = Some(w);
        }
    }

    /// Bracket of ring-valued coordinate vectors x = sum x_i e_i (scalar on
    /// the left).
    pub fn bracket(&self, x: &BTreeMap<usize, Scalar>, y: &BTreeMap<usize, Scalar>) -> Result<BTreeMap<usize, Scalar>, LieError> {
        let mut out: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (i, xi) in x {
            for (j, yj) in y {
                if *i >= self.dim() || *j >= self.dim() {
                    return Err(LieError::Dimension(format!("index out of range {}", self.dim())));
                }
                let e = &self.table[*i][*j];
                if e.is_empty() {
                    continue;
                }
                // e_i passes y_j
                let yj2 = if self.basis[*i].parity.is_odd() { yj.parity_twist() } else { yj.clone() };
                let coef = xi.try_mul(&yj2)?;
                for (k, c) in e {
                    let v = coef.try_mul(c)?;
                    let slot = out.entry(*k).or_insert_with(|| Scalar::zero(&self.ring));
                    *slot = slot.try_add(&v)?;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Bracket of rational coordinate vectors.
    pub fn bracket_q(&self, x: &SVec, y: &SVec) -> SVec {
        let t = self.qtable.as_ref().expect("rational algebra");
        let mut out = SVec::new();
        for (i, xi) in x {
            for (j, yj) in y {
                let c = xi * yj;
                for (k, s) in &t[*i][*j] {
                    let e = out.entry(*k).or_insert_with(Q::zero);
                    *e += &c * s;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn basis_vec(&self, i: usize) -> SVec {
        let mut v = SVec::new();
        v.insert(i, Q::one());
        v
    }

    pub fn vec_parity(&self, v: &SVec) -> Option<Parity> {
        let mut p = None;
        for k in v.keys() {
            let pk = self.basis[*k].parity;
            match p {
                None => p = Some(pk),
                Some(x) if x != pk => return None,
                _ => {}
            }
        }
        Some(p.unwrap_or(Parity::Even))
    }

    /// Checks super-antisymmetry, parity consistency, additivity of degrees
    /// and weights, and the super Jacobi identity on all basis triples.
    pub fn check_axioms(&self) -> AxiomReport {
        use rayon::prelude::*;
        let n = self.dim();
        let mut rep = AxiomReport::default();
        for i in 0..n {
            for j in 0..n {
                let s = self.basis[i].parity.sign_with(self.basis[j].parity);
                let a = &self.table[i][j];
                let b = &self.table[j][i];
                let mut sum: BTreeMap<usize, Scalar> = a.iter().cloned().collect();
                for (k, c) in b {
                    let slot = sum.entry(*k).or_insert_with(|| Scalar::zero(&self.ring));
                    *slot = &*slot + &c.scale(&q(s));
                }
                sum.retain(|_, v| !v.is_zero());
                if !sum.is_empty() && i <= j {
                    rep.antisymmetry.push((i, j, render_entry(&sum, self)));
                }
                for (k, c) in a {
                    let pc = match c.parity() {
                        Some(p) => p,
                        None => {
                            rep.parity.push((i, j, *k));
                            continue;
                        }
                    };
                    if self.basis[*k].parity != self.basis[i].parity + self.basis[j].parity + pc {
                        rep.parity.push((i, j, *k));
                    }
                    if let (Some(di), Some(dj), Some(dk)) = (self.basis[i].degree, self.basis[j].degree, self.basis[*k].degree) {
                        if di + dj != dk {
                            rep.grading.push((i, j, *k));
                        }
                    }
                    if let (Some(wi), Some(wj), Some(wk)) = (&self.basis[i].weight, &self.basis[j].weight, &self.basis[*k].weight) {
                        if wi.iter().zip(wj).map(|(a, b)| a + b).collect::<Vec<_>>() != *wk {
                            rep.grading.push((i, j, *k));
                        }
                    }
                }
            }
        }
        let triples: Vec<(usize, usize, usize)> = (0..n)
            .flat_map(|i| (i..n).flat_map(move |j| (j..n).map(move |k| (i, j, k))))
            .collect();
        let bad: Vec<(usize, usize, usize, String)> = triples
            .par_iter()
            .filter_map(|&(i, j, k)| {
                let r = self.jacobiator(i, j, k);
                if r.is_empty() {
                    None
                } else {
                    Some((i, j, k, render_entry(&r, self)))
                }
            })
            .collect();
        rep.jacobi = bad;
        rep
    }

    /// [x,[y,z]] - [[x,y],z] - (-1)^{p(x)p(y)} [y,[x,z]] on basis vectors.
    pub fn jacobiator(&self, i: usize, j: usize, k: usize) -> BTreeMap<usize, Scalar> {
        let one = Scalar::one(&self.ring);
        let e = |a: usize| -> BTreeMap<usize, Scalar> {
            let mut m = BTreeMap::new();
            m.insert(a, one.clone());
            m
        };
        let to_map = |en: &Entry| -> BTreeMap<usize, Scalar> { en.iter().cloned().collect() };
        let t1 = self.bracket(&e(i), &to_map(&self.table[j][k])).unwrap();
        let t2 = self.bracket(&to_map(&self.table[i][j]), &e(k)).unwrap();
        let t3 = self.bracket(&e(j), &to_map(&self.table[i][k])).unwrap();
        let s = self.basis[i].parity.sign_with(self.basis[j].parity);
        let mut out = t1;
        for (kk, c) in t2 {
            let slot = out.entry(kk).or_insert_with(|| Scalar::zero(&self.ring));
            *slot = &*slot - &c;
        }
        for (kk, c) in t3 {
            let slot = out.entry(kk).or_insert_with(|| Scalar::zero(&self.ring));
            *slot = &*slot - &c.scale(&q(s));
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn whole(&self) -> SubSpace {
        SubSpace::from_vectors(self.dim(), (0..self.dim()).map(|i| self.basis_vec(i)))
    }

    pub fn derived_subalgebra(&self) -> Result<SubSpace, LieError> {
        let t = self.qtable()?;
        let mut e = Echelon::new();
        for row in t {
            for en in row {
                if !en.is_empty() {
                    e.insert(en.iter().cloned().collect());
                }
            }
        }
        Ok(SubSpace {
            ambient: self.dim(),
            rows: e.rref_rows(),
        })
    }

    pub fn center(&self) -> Result<SubSpace, LieError> {
        let t = self.qtable()?;
        let n = self.dim();
        // rows: for each x and output k, sum_j N^k_{x j} v_j = 0
        let mut rows: HashMap<(usize, usize), SVec> = HashMap::new();
        for (x, row) in t.iter().enumerate() {
            for (j, en) in row.iter().enumerate() {
                for (k, c) in en {
                    rows.entry((x, *k)).or_default().insert(j, c.clone());
                }
            }
        }
        let mut keys: Vec<_> = rows.keys().copied().collect();
        keys.sort();
        let mut e = Echelon::new();
        for k in keys {
            e.insert(rows.remove(&k).unwrap());
        }
        Ok(SubSpace::from_vectors(n, e.kernel(n)))
    }

    /// Smallest ideal containing the seed.
    pub fn ideal_closure(&self, seed: &SubSpace) -> Result<SubSpace, LieError> {
        self.qtable()?;
        Ok(self.ideal_closure_vecs(seed.rows.iter().cloned(), None).0)
    }

    /// Closure with optional early stop once the dimension reaches `stop`.
    fn ideal_closure_vecs(&self, seed: impl IntoIterator<Item = SVec>, stop: Option<usize>) -> (SubSpace, bool) {
        let n = self.dim();
        let mut e = Echelon::new();
        let mut queue: VecDeque<SVec> = VecDeque::new();
        for v in seed {
            if e.insert(v.clone()) {
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for x in 0..n {
                let w = self.bracket_q(&self.basis_vec(x), &v);
                if w.is_empty() {
                    continue;
                }
                if e.insert(w.clone()) {
                    queue.push_back(w);
                    if Some(e.rank()) == stop {
                        return (SubSpace { ambient: n, rows: e.rref_rows() }, true);
                    }
                }
            }
        }
        (SubSpace { ambient: n, rows: e.rref_rows() }, false)
    }

    /// Even basis vectors whose adjoint action is diagonal on the basis,
    /// together with the eigenvalue of each on every basis vector.
    pub fn inner_torus(&self) -> Result<(Vec<usize>, Vec<Vec<Q>>), LieError> {
        let t = self.qtable()?;
        let n = self.dim();
        let mut hs = vec![];
        for h in 0..n {
            if self.basis[h].parity.is_odd() {
                continue;
            }
            let diag = (0..n).all(|j| t[h][j].iter().all(|(k, _)| *k == j));
            if diag && (0..n).any(|j| !t[h][j].is_empty()) {
                hs.push(h);
            }
        }
        // Keep a mutually commuting family.
        let mut chosen: Vec<usize> = vec![];
        for h in hs {
            if chosen.iter().all(|&c| t[c][h].is_empty()) {
                chosen.push(h);
            }
        }
        let eig: Vec<Vec<Q>> = (0..n)
            .map(|j| {
                chosen
                    .iter()
                    .map(|&h| t[h][j].first().map(|x| x.1.clone()).unwrap_or_else(Q::zero))
                    .collect()
            })
            .collect();
        Ok((chosen, eig))
    }

    /// Groups of basis vectors sharing inner-torus eigenvalues and parity.
    pub fn weight_components(&self) -> Result<Vec<Vec<usize>>, LieError> {
        let (_, eig) = self.inner_torus()?;
        let mut groups: BTreeMap<(Vec<Q>, Parity), Vec<usize>> = BTreeMap::new();
        for j in 0..self.dim() {
            groups.entry((eig[j].clone(), self.basis[j].parity)).or_default().push(j);
        }
        Ok(groups.into_values().collect())
    }

    pub fn is_simple(&self) -> Result<SimplicityReport, LieError> {
        self.is_simple_with(0x5eed, 64)
    }

    /// Exact where possible; see the module docs of the report.
    pub fn is_simple_with(&self, seed: u64, random_seeds: usize) -> Result<SimplicityReport, LieError> {
        let t = self.qtable()?;
        let n = self.dim();
        if n <= 1 {
            return Ok(SimplicityReport::no(SimplicityMethod::Exact, "dimension at most 1", None));
        }
        let derived = self.derived_subalgebra()?;
        if derived.dim() < n {
            let w = if derived.dim() == 0 { None } else { Some(derived.sdim(self)) };
            return Ok(SimplicityReport::no(SimplicityMethod::Exact, "derived subalgebra is proper", w));
        }
        let comps = self.weight_components()?;
        let comp_of: Vec<usize> = {
            let mut v = vec![0; n];
            for (ci, c) in comps.iter().enumerate() {
                for &j in c {
                    v[j] = ci;
                }
            }
            v
        };
        let mut good = vec![false; comps.len()];
        for (ci, c) in comps.iter().enumerate() {
            if c.len() == 1 {
                let (cl, full) = self.ideal_closure_vecs([self.basis_vec(c[0])], Some(n));
                if full || cl.dim() == n {
                    good[ci] = true;
                } else {
                    return Ok(SimplicityReport::no(
                        SimplicityMethod::Exact,
                        &format!("ideal generated by {} is proper", self.basis[c[0]].label),
                        Some(cl.sdim(self)),
                    ));
                }
            }
        }
        // Propagate: V is good when the joint kernel of V -> (good parts) is 0.
        let joint_kernel = |ci: usize, good: &Vec<bool>| -> Vec<SVec> {
            let c = &comps[ci];
            let local: HashMap<usize, usize> = c.iter().enumerate().map(|(a, &b)| (b, a)).collect();
            let mut rows: BTreeMap<(usize, usize), SVec> = BTreeMap::new();
            for x in 0..n {
                for &j in c {
                    for (k, s) in &t[x][j] {
                        if good[comp_of[*k]] {
                            rows.entry((x, *k)).or_default().insert(local[&j], s.clone());
                        }
                    }
                }
            }
            let mut e = Echelon::new();
            for (_, r) in rows {
                e.insert(r);
            }
            e.kernel(c.len())
                .into_iter()
                .map(|v| v.into_iter().map(|(a, x)| (c[a], x)).collect())
                .collect()
        };
        loop {
            let mut changed = false;
            for ci in 0..comps.len() {
                if good[ci] {
                    continue;
                }
                if joint_kernel(ci, &good).is_empty() {
                    good[ci] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if good.iter().all(|&g| g) {
            return Ok(SimplicityReport::yes(SimplicityMethod::Exact));
        }
        if good.iter().any(|&g| g) {
            // Any proper ideal avoids the good components, so it sits in the
            // largest ad-stable subspace of the joint kernels.
            let mut k: Vec<SVec> = vec![];
            for ci in 0..comps.len() {
                if !good[ci] {
                    k.extend(joint_kernel(ci, &good));
                }
            }
            let mut s = SubSpace::from_vectors(n, k);
            loop {
                let before = s.dim();
                // v in S with [e_x, v] in S for all x
                let mut cons: Vec<SVec> = vec![];
                let basis = s.rows.clone();
                let mut ech = Echelon::new();
                for r in &s.rows {
                    ech.insert(r.clone());
                }
                // Parametrize v = sum a_r row_r; conditions: reduce([e_x, row_r]) mod S.
                let m = basis.len();
                let mut eqs: BTreeMap<(usize, usize), SVec> = BTreeMap::new();
                for x in 0..n {
                    for (ri, r) in basis.iter().enumerate() {
                        let mut w = self.bracket_q(&self.basis_vec(x), r);
                        ech.reduce(&mut w);
                        for (kk, c) in w {
                            eqs.entry((x, kk)).or_default().insert(ri, c);
                        }
                    }
                }
                for (_, r) in eqs {
                    cons.push(r);
                }
                let ker = crate::linalg::kernel_of_rows(cons, m);
                let vecs: Vec<SVec> = ker
                    .into_iter()
                    .map(|a| {
                        let mut v = SVec::new();
                        for (ri, c) in a {
                            svec_add_scaled(&mut v, &basis[ri], &c);
                        }
                        v
                    })
                    .collect();
                s = SubSpace::from_vectors(n, vecs);
                if s.dim() == before {
                    break;
                }
            }
            if s.dim() == 0 {
                return Ok(SimplicityReport::yes(SimplicityMethod::Exact));
            }
            return Ok(SimplicityReport::no(SimplicityMethod::Exact, "stable subspace outside the verified weight spaces", Some(s.sdim(self))));
        }
        // No foothold from the torus: try the Burnside criterion.
        if n <= 40 {
            if self.adjoint_generates_endomorphisms() {
                return Ok(SimplicityReport::yes(SimplicityMethod::Burnside));
            }
        }
        // Randomized seeds: one-sided evidence only.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in [Parity::Even, Parity::Odd] {
            let idx: Vec<usize> = (0..n).filter(|&j| self.basis[j].parity == p).collect();
            if idx.is_empty() {
                continue;
            }
            for j in &idx {
                let (cl, full) = self.ideal_closure_vecs([self.basis_vec(*j)], Some(n));
                if !full && cl.dim() < n {
                    return Ok(SimplicityReport::no(SimplicityMethod::Exact, "basis vector generates a proper ideal", Some(cl.sdim(self))));
                }
            }
            for _ in 0..random_seeds {
                let v: SVec = idx.iter().map(|&j| (j, q(rng.gen_range(-5..=5)))).filter(|(_, c)| !c.is_zero()).collect();
                if v.is_empty() {
                    continue;
                }
                let (cl, full) = self.ideal_closure_vecs([v], Some(n));
                if !full && cl.dim() < n {
                    return Ok(SimplicityReport::no(SimplicityMethod::Exact, "random seed generates a proper ideal", Some(cl.sdim(self))));
                }
            }
        }
        Ok(SimplicityReport::yes(SimplicityMethod::Heuristic))
    }

    /// True when the associative algebra generated by ad(g) is all of End(g);
    /// then g has no proper invariant subspace over any extension field.
    pub fn adjoint_generates_endomorphisms(&self) -> bool {
        let n = self.dim();
        let t = match &self.qtable {
            Some(t) => t,
            None => return false,
        };
        // ad(e_x) as sparse matrix: (k, j) -> N^k_{x j}
        let ads: Vec<Vec<(usize, usize, Q)>> = (0..n)
            .map(|x| {
                let mut m = vec![];
                for j in 0..n {
                    for (k, c) in &t[x][j] {
                        m.push((*k, j, c.clone()));
                    }
                }
                m
            })
            .collect();
        let flat = |m: &BTreeMap<(usize, usize), Q>| -> SVec { m.iter().map(|((a, b), c)| (a * n + b, c.clone())).collect() };
        let mut e = Echelon::new();
        let mut queue: VecDeque<BTreeMap<(usize, usize), Q>> = VecDeque::new();
        let mut id = BTreeMap::new();
        for i in 0..n {
            id.insert((i, i), Q::one());
        }
        e.insert(flat(&id));
        queue.push_back(id);
        while let Some(m) = queue.pop_front() {
            for ad in &ads {
                // ad * m
                let mut prod: BTreeMap<(usize, usize), Q> = BTreeMap::new();
                let mut by_row: HashMap<usize, Vec<(usize, &Q)>> = HashMap::new();
                for ((a, b), c) in &m {
                    by_row.entry(*a).or_default().push((*b, c));
                }
                for (k, j, c) in ad {
                    if let Some(r) = by_row.get(j) {
                        for (b, d) in r {
                            let slot = prod.entry((*k, *b)).or_insert_with(Q::zero);
                            *slot += c * *d;
                        }
                    }
                }
                prod.retain(|_, v| !v.is_zero());
                if prod.is_empty() {
                    continue;
                }
                if e.insert(flat(&prod)) {
                    if e.rank() == n * n {
                        return true;
                    }
                    queue.push_back(prod);
                }
            }
        }
        e.rank() == n * n
    }

    /// g / I on the complement spanned by the non-pivot basis vectors.
    pub fn quotient(&self, ideal: &SubSpace) -> Result<SuperLieAlgebra, LieError> {
        self.qtable()?;
        let n = self.dim();
        let mut ech = Echelon::new();
        for r in &ideal.rows {
            ech.insert(r.clone());
        }
        for (ri, r) in ideal.rows.iter().enumerate() {
            for x in 0..n {
                let w = self.bracket_q(&self.basis_vec(x), r);
                if !ech.contains(&w) {
                    return Err(LieError::NotIdeal(self.basis[x].label.clone(), ri));
                }
            }
        }
        let piv: HashSet<usize> = ech.pivots().into_iter().collect();
        let keep: Vec<usize> = (0..n).filter(|j| !piv.contains(j)).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let basis: Vec<BasisElement> = keep.iter().map(|&j| self.basis[j].clone()).collect();
        let m = keep.len();
        let mut table = vec![vec![QEntry::new(); m]; m];
        for a in 0..m {
            for b in 0..m {
                let mut w: SVec = self.qentry(keep[a], keep[b]).iter().cloned().collect();
                ech.reduce(&mut w);
                table[a][b] = w.into_iter().map(|(k, c)| (pos[&k], c)).collect();
            }
        }
        let mut g = SuperLieAlgebra::from_rational_table(format!("{}/I", self.name), basis, table);
        g.notes = self.notes.clone();
        Ok(g)
    }

    /// The subalgebra spanned by the given homogeneous vectors, in that basis.
    pub fn subalgebra(&self, name: impl Into<String>, vecs: &[SVec], labels: Option<Vec<String>>) -> Result<SuperLieAlgebra, LieError> {
        self.qtable()?;
        let m = vecs.len();
        let mut basis = Vec::with_capacity(m);
        for (a, v) in vecs.iter().enumerate() {
            let p = self.vec_parity(v).ok_or(LieError::Inhomogeneous)?;
            let label = match &labels {
                Some(l) => l[a].clone(),
                None => self.render(v),
            };
            let mut be = BasisElement::new(label, p);
            let degs: HashSet<Option<i64>> = v.keys().map(|k| self.basis[*k].degree).collect();
            if degs.len() == 1 {
                be.degree = *degs.iter().next().unwrap();
            }
            let wts: HashSet<Option<Vec<i64>>> = v.keys().map(|k| self.basis[*k].weight.clone()).collect();
            if wts.len() == 1 {
                be.weight = wts.into_iter().next().unwrap();
            }
            basis.push(be);
        }
        // Coordinates via echelon with tracked combinations.
        let cols: Vec<SVec> = vecs.to_vec();
        let mut table = vec![vec![QEntry::new(); m]; m];
        let coords = Coordinatizer::new(&cols);
        for a in 0..m {
            for b in a..m {
                let w = self.bracket_q(&vecs[a], &vecs[b]);
                let c = coords.coords(&w).ok_or(LieError::NotClosed)?;
                let s = basis[a].parity.sign_with(basis[b].parity);
                table[a][b] = c.iter().map(|(k, x)| (*k, x.clone())).collect();
                if a != b {
                    table[b][a] = c.iter().map(|(k, x)| (*k, -x * q(s))).collect();
                }
            }
        }
        let mut g = SuperLieAlgebra::from_rational_table(name, basis, table);
        if !g.has_degrees() {
            for b in &mut g.basis {
                b.degree = None;
            }
        }
        if !g.has_weights() {
            for b in &mut g.basis {
                b.weight = None;
            }
        }
        Ok(g)
    }

    pub fn render(&self, v: &SVec) -> String {
        if v.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (k, c)) in v.iter().enumerate() {
            let cs = crate::coeff::fmt_rational(c);
            let neg = cs.starts_with('-');
            let a = cs.trim_start_matches('-');
            if i > 0 {
                s.push_str(if neg { " - " } else { " + " });
            } else if neg {
                s.push('-');
            }
            if a != "1" {
                if a.contains('/') {
                    s.push_str(&format!("({a})*"));
                } else {
                    s.push_str(&format!("{a}*"));
                }
            }
            s.push_str(&self.basis[*k].label);
        }
        s
    }

    /// Algebra over an extended ring with the same structure constants.
    pub fn extend_scalars(&self, ring: &Arc<ParameterRing>) -> Result<SuperLieAlgebra, LieError> {
        if same_ring(ring, &self.ring) {
            return Ok(self.clone());
        }
        let table = self
            .table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.iter().map(|(k, c)| Ok((*k, c.extend_to(ring)?))).collect::<Result<Entry, CoeffError>>())
                    .collect::<Result<Vec<Entry>, CoeffError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut g = SuperLieAlgebra::from_full_table(self.name.clone(), ring, self.basis.clone(), table);
        g.notes = self.notes.clone();
        Ok(g)
    }

    /// Structure constants with even parameters evaluated and odd ones sent
    /// to zero.
    pub fn evaluate(&self, assignment: &HashMap<String, Q>) -> Result<SuperLieAlgebra, LieError> {
        let ring = ParameterRing::rationals();
        let mut table = vec![];
        for row in &self.table {
            let mut r = vec![];
            for e in row {
                let mut en = vec![];
                for (k, c) in e {
                    en.push((*k, Scalar::from_rational(&ring, c.evaluate(assignment)?)));
                }
                r.push(en);
            }
            table.push(r);
        }
        Ok(SuperLieAlgebra::from_full_table(self.name.clone(), &ring, self.basis.clone(), table))
    }
}

fn render_entry(m: &BTreeMap<usize, Scalar>, g: &SuperLieAlgebra) -> String {
    m.iter()
        .map(|(k, c)| format!("({c})*{}", g.basis[*k].label))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Coordinates of vectors in the span of a fixed independent family.
pub struct Coordinatizer {
    ech: Echelon,
    combos: Vec<SVec>,
}

impl Coordinatizer {
    pub fn new(vecs: &[SVec]) -> Self {
        let mut ech = Echelon::new();
        let mut combos: Vec<SVec> = vec![];
        for (j, c) in vecs.iter().enumerate() {
            let mut v = c.clone();
            let used = ech.reduce_tracked(&mut v);
            let mut combo = SVec::new();
            combo.insert(j, Q::one());
            for (r, a) in used {
                svec_add_scaled(&mut combo, &combos[r], &-a);
            }
            if let Some((_, lead)) = v.iter().next() {
                let inv = Q::one() / lead.clone();
                combo = crate::linalg::svec_scale(&combo, &inv);
                ech.push_reduced(v);
                combos.push(combo);
            }
        }
        Coordinatizer { ech, combos }
    }
    pub fn rank(&self) -> usize {
        self.ech.rank()
    }
    pub fn coords(&self, w: &SVec) -> Option<SVec> {
        let mut v = w.clone();
        let used = self.ech.reduce_tracked(&mut v);
        if !v.is_empty() {
            return None;
        }
        let mut x = SVec::new();
        for (r, a) in used {
            svec_add_scaled(&mut x, &self.combos[r], &a);
        }
        Some(x)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub antisymmetry: Vec<(usize, usize, String)>,
    pub jacobi: Vec<(usize, usize, usize, String)>,
    pub parity: Vec<(usize, usize, usize)>,
    pub grading: Vec<(usize, usize, usize)>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.antisymmetry.is_empty() && self.jacobi.is_empty() && self.parity.is_empty() && self.grading.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SimplicityMethod {
    /// Weight-space propagation or an explicit proper ideal.
    Exact,
    /// ad(g) generates all endomorphisms.
    Burnside,
    /// Random seeds found no proper ideal; not a proof.
    Heuristic,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplicityReport {
    pub simple: bool,
    pub method: SimplicityMethod,
    pub reason: String,
    pub ideal_sdim: Option<Sdim>,
}

impl SimplicityReport {
    fn yes(method: SimplicityMethod) -> Self {
        SimplicityReport {
            simple: true,
            method,
            reason: String::new(),
            ideal_sdim: None,
        }
    }
    fn no(method: SimplicityMethod, reason: &str, ideal_sdim: Option<Sdim>) -> Self {
        SimplicityReport {
            simple: false,
            method,
            reason: reason.into(),
            ideal_sdim,
        }
    }
}

/// A subspace of Q^ambient stored by its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SubSpace {
    pub ambient: usize,
    pub rows: Vec<SVec>,
}

impl SubSpace {
    pub fn zero(ambient: usize) -> Self {
        SubSpace { ambient, rows: vec![] }
    }
    pub fn from_vectors(ambient: usize, vecs: impl IntoIterator<Item = SVec>) -> Self {
        SubSpace {
            ambient,
            rows: crate::linalg::span_basis(vecs),
        }
    }
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
    /// Superdimension; rows of a graded subspace are homogeneous.
    pub fn sdim(&self, g: &SuperLieAlgebra) -> Sdim {
        let mut s = Sdim::default();
        for r in &self.rows {
            match g.vec_parity(r) {
                Some(Parity::Odd) => s.odd += 1,
                _ => s.even += 1,
            }
        }
        s
    }
    pub fn is_graded(&self, g: &SuperLieAlgebra) -> bool {
        self.rows.iter().all(|r| g.vec_parity(r).is_some())
    }
    pub fn contains(&self, v: &SVec) -> bool {
        let mut e = Echelon::new();
        for r in &self.rows {
            e.insert(r.clone());
        }
        e.contains(v)
    }
    pub fn contains_space(&self, o: &SubSpace) -> bool {
        let mut e = Echelon::new();
        for r in &self.rows {
            e.insert(r.clone());
        }
        o.rows.iter().all(|r| e.contains(r))
    }
}

/// A g-module given by its action matrices (one per basis element of g),
/// each a sparse map (row, col) -> rational.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleData {
    pub parities: Vec<Parity>,
    pub action: Vec<BTreeMap<(usize, usize), Q>>,
}

impl ModuleData {
    pub fn sdim(&self) -> Sdim {
        let odd = self.parities.iter().filter(|p| p.is_odd()).count();
        Sdim::new(self.parities.len() - odd, odd)
    }

    /// Pi(V): parities flipped, x . Pi v = (-1)^{p(x)} Pi(x . v).
    pub fn parity_shift(&self, g: &SuperLieAlgebra) -> ModuleData {
        ModuleData {
            parities: self.parities.iter().map(|p| *p + Parity::Odd).collect(),
            action: self
                .action
                .iter()
                .enumerate()
                .map(|(x, m)| {
                    if g.parity(x).is_odd() {
                        m.iter().map(|(k, c)| (*k, -c.clone())).collect()
                    } else {
                        m.clone()
                    }
                })
                .collect(),
        }
    }

    /// The adjoint module of a rational algebra.
    pub fn adjoint(g: &SuperLieAlgebra) -> Result<ModuleData, LieError> {
        let t = g.qtable()?;
        let action = (0..g.dim())
            .map(|x| {
                let mut m = BTreeMap::new();
                for j in 0..g.dim() {
                    for (k, c) in &t[x][j] {
                        m.insert((*k, j), c.clone());
                    }
                }
                m
            })
            .collect();
        Ok(ModuleData {
            parities: g.parities(),
            action,
        })
    }

    /// The trivial one-dimensional even module.
    pub fn trivial(g: &SuperLieAlgebra) -> ModuleData {
        ModuleData {
            parities: vec![Parity::Even],
            action: vec![BTreeMap::new(); g.dim()],
        }
    }

    /// Checks rho([x,y]) = rho(x)rho(y) - (-1)^{p(x)p(y)} rho(y)rho(x) and
    /// parity compatibility of the matrices.
    pub fn is_representation(&self, g: &SuperLieAlgebra) -> Result<bool, LieError> {
        let t = g.qtable()?;
        let n = g.dim();
        let mul = |a: &BTreeMap<(usize, usize), Q>, b: &BTreeMap<(usize, usize), Q>| {
            let mut out: BTreeMap<(usize, usize), Q> = BTreeMap::new();
            for ((i, k), x) in a {
                for ((k2, j), y) in b.range((*k, 0)..(*k + 1, 0)) {
                    debug_assert_eq!(k, k2);
                    *out.entry((*i, *j)).or_insert_with(Q::zero) += x * y;
                }
            }
            out.retain(|_, v| !v.is_zero());
            out
        };
        for x in 0..n {
            for ((i, j), _) in &self.action[x] {
                if self.parities[*i] != self.parities[*j] + g.parity(x) {
                    return Ok(false);
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let mut lhs: BTreeMap<(usize, usize), Q> = BTreeMap::new();
                for (k, c) in &t[x][y] {
                    for (ij, v) in &self.action[*k] {
                        *lhs.entry(*ij).or_insert_with(Q::zero) += c * v;
                    }
                }
                lhs.retain(|_, v| !v.is_zero());
                let s = g.parity(x).sign_with(g.parity(y));
                let mut rhs = mul(&self.action[x], &self.action[y]);
                for (ij, v) in mul(&self.action[y], &self.action[x]) {
                    *rhs.entry(ij).or_insert_with(Q::zero) -= v * q(s);
                }
                rhs.retain(|_, v| !v.is_zero());
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sl2() -> SuperLieAlgebra {
        let b = vec![
            BasisElement::new("e", Parity::Even).with_weight(vec![2]),
            BasisElement::new("h", Parity::Even).with_weight(vec![0]),
            BasisElement::new("f", Parity::Even).with_weight(vec![-2]),
        ];
        let r = ParameterRing::rationals();
        let s = |k: usize, c: i64| (k, Scalar::from_int(&r, c));
        SuperLieAlgebra::from_upper("sl(2)", &r, b, |i, j| match (i, j) {
            (0, 1) => vec![s(0, -2)],
            (0, 2) => vec![s(1, 1)],
            (1, 2) => vec![s(2, -2)],
            _ => vec![],
        })
    }

    pub(crate) fn gl11() -> SuperLieAlgebra {
        // E11, E22 even; E12, E21 odd
        let b = vec![
            BasisElement::new("E11", Parity::Even),
            BasisElement::new("E22", Parity::Even),
            BasisElement::new("E12", Parity::Odd),
            BasisElement::new("E21", Parity::Odd),
        ];
        let r = ParameterRing::rationals();
        let s = |k: usize, c: i64| (k, Scalar::from_int(&r, c));
        SuperLieAlgebra::from_upper("gl(1|1)", &r, b, |i, j| match (i, j) {
            (0, 2) => vec![s(2, 1)],
            (0, 3) => vec![s(3, -1)],
            (1, 2) => vec![s(2, -1)],
            (1, 3) => vec![s(3, 1)],
            (2, 3) => vec![s(0, 1), s(1, 1)],
            _ => vec![],
        })
    }

    fn abelian(even: usize, odd: usize) -> SuperLieAlgebra {
        let mut b = vec![];
        for i in 0..even {
            b.push(BasisElement::new(format!("a{i}"), Parity::Even));
        }
        for i in 0..odd {
            b.push(BasisElement::new(format!("b{i}"), Parity::Odd));
        }
        SuperLieAlgebra::from_upper("abelian", &ParameterRing::rationals(), b, |_, _| vec![])
    }

    #[test]
    fn axioms_and_fault_injection() {
        assert!(sl2().check_axioms().ok());
        let g = gl11();
        assert!(g.check_axioms().ok());
        let mut bad = g.clone();
        let old = bad.entry(2, 3).iter().find(|x| x.0 == 0).unwrap().1.clone();
        bad.set_structure_constant(2, 3, 0, &old + &Scalar::one(g.ring()));
        assert!(!bad.check_axioms().ok());
        assert!(abelian(2, 3).check_axioms().ok());
    }

    #[test]
    fn simplicity_and_center() {
        let r = sl2().is_simple().unwrap();
        assert!(r.simple);
        assert_eq!(r.method, SimplicityMethod::Exact);
        let g = gl11();
        assert!(!g.is_simple().unwrap().simple);
        assert_eq!(g.center().unwrap().sdim(&g), Sdim::new(1, 0));
        assert_eq!(g.derived_subalgebra().unwrap().sdim(&g), Sdim::new(1, 2));
        assert_eq!(abelian(1, 1).center().unwrap().dim(), 2);
        assert_eq!(abelian(3, 0).derived_subalgebra().unwrap().dim(), 0);
        assert!(!abelian(3, 0).is_simple().unwrap().simple);
    }

    #[test]
    fn burnside_detects_sl2() {
        assert!(sl2().adjoint_generates_endomorphisms());
        assert!(!gl11().adjoint_generates_endomorphisms());
    }

    #[test]
    fn quotients() {
        let g = gl11();
        let c = g.center().unwrap();
        let p = g.quotient(&c).unwrap();
        assert_eq!(p.sdim(), Sdim::new(1, 2));
        assert!(p.check_axioms().ok());
        let same = g.quotient(&SubSpace::zero(g.dim())).unwrap();
        assert_eq!(same.sdim(), g.sdim());
        // span of E12 is not an ideal
        let bad = SubSpace::from_vectors(4, [g.basis_vec(2)]);
        assert!(g.quotient(&bad).is_err());
    }

    #[test]
    fn ideal_closure_is_monotone_and_idempotent() {
        let g = gl11();
        let s1 = SubSpace::from_vectors(4, [g.basis_vec(2)]);
        let i1 = g.ideal_closure(&s1).unwrap();
        assert_eq!(g.ideal_closure(&i1).unwrap(), i1);
        let s2 = SubSpace::from_vectors(4, [g.basis_vec(2), g.basis_vec(0)]);
        let i2 = g.ideal_closure(&s2).unwrap();
        assert!(i2.contains_space(&i1));
    }

    #[test]
    fn parity_shift_of_modules() {
        let g = gl11();
        let triv = ModuleData::trivial(&g);
        assert_eq!(triv.parity_shift(&g).sdim(), Sdim::new(0, 1));
        let ad = ModuleData::adjoint(&g).unwrap();
        let pad = ad.parity_shift(&g);
        assert!(pad.is_representation(&g).unwrap());
        assert_eq!(pad.parity_shift(&g), ad);
        assert!(ad.is_representation(&g).unwrap());
    }

    #[test]
    fn bracket_with_odd_scalars() {
        let r = ParameterRing::new(vec![], vec!["a".into(), "b".into()]).unwrap();
        let g = gl11().extend_scalars(&r).unwrap();
        let x: BTreeMap<usize, Scalar> = [(2, Scalar::param(&r, "a").unwrap())].into_iter().collect();
        let y: BTreeMap<usize, Scalar> = [(3, Scalar::param(&r, "b").unwrap())].into_iter().collect();
        // a E12 and b E21 are both even elements; they must commute in the
        // ungraded sense: [x,y] = -[y,x].
        let xy = g.bracket(&x, &y).unwrap();
        let yx = g.bracket(&y, &x).unwrap();
        let neg: BTreeMap<usize, Scalar> = yx.into_iter().map(|(k, c)| (k, -c)).collect();
        assert_eq!(xy, neg);
        assert!(g.check_axioms().ok());
    }
}
