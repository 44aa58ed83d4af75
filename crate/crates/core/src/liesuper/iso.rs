//! One-sided isomorphism search between rational Lie superalgebras.
//!
//! Both algebras are split into weight components for their inner tori.
//! A linear map between the weight lattices is guessed by backtracking, then
//! the even map phi is propagated: once phi(x) is known, phi([x,y]) =
//! [phi(x), phi(y)] is linear in the unknown images. Free unknowns are
//! branched over a small set of rational scales.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use super::{Coordinatizer, LieError, Sdim, SuperLieAlgebra};
use crate::coeff::{q, qf, Parity, Q};
use crate::linalg::{svec_add_scaled, Echelon, SVec};

#[derive(Clone, Debug)]
pub struct Isomorphism {
    /// images[i] = phi(e_i) in the basis of the target.
    pub images: Vec<SVec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoOutcome {
    pub found: bool,
    pub reason: String,
    pub nodes: usize,
    #[serde(skip)]
    pub map: Option<Isomorphism>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Invariants {
    pub sdim: Sdim,
    pub derived_series: Vec<Sdim>,
    pub center: Sdim,
    pub torus_rank: usize,
    pub weight_profile: Vec<(Parity, usize, usize)>,
}

pub fn invariants(g: &SuperLieAlgebra) -> Result<Invariants, LieError> {
    let mut series = vec![];
    let mut cur = g.clone();
    loop {
        let d = cur.derived_subalgebra()?;
        let s = d.sdim(&cur);
        series.push(s);
        if d.dim() == cur.dim() || d.dim() == 0 {
            break;
        }
        cur = cur.subalgebra("d", &d.rows, None)?;
    }
    let center = g.center()?.sdim(g);
    let (t, _) = g.inner_torus()?;
    let comps = g.weight_components()?;
    let mut profile: BTreeMap<(Parity, usize), usize> = BTreeMap::new();
    for c in &comps {
        *profile.entry((g.parity(c[0]), c.len())).or_default() += 1;
    }
    Ok(Invariants {
        sdim: g.sdim(),
        derived_series: series,
        center,
        torus_rank: t.len(),
        weight_profile: profile.into_iter().map(|((p, d), m)| (p, d, m)).collect(),
    })
}

/// Checks phi[x,y] = [phi x, phi y] on all basis pairs, parity preservation
/// and invertibility.
pub fn verify(g: &SuperLieAlgebra, h: &SuperLieAlgebra, phi: &Isomorphism) -> bool {
    if phi.images.len() != g.dim() || g.dim() != h.dim() {
        return false;
    }
    for (i, v) in phi.images.iter().enumerate() {
        if v.keys().any(|k| h.parity(*k) != g.parity(i)) {
            return false;
        }
    }
    if crate::linalg::rank_of(phi.images.iter().cloned()) != g.dim() {
        return false;
    }
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let mut lhs = SVec::new();
            for (k, c) in g.qentry(i, j) {
                svec_add_scaled(&mut lhs, &phi.images[*k], c);
            }
            let rhs = h.bracket_q(&phi.images[i], &phi.images[j]);
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

fn scales() -> Vec<Q> {
    vec![q(1), q(-1), q(2), q(-2), qf(1, 2), qf(-1, 2), q(3), q(-3), qf(1, 3), qf(-1, 3), q(4), q(-4), qf(1, 4), qf(-1, 4)]
}

struct Comp {
    weight: Vec<Q>,
    parity: Parity,
    members: Vec<usize>,
}

fn components(g: &SuperLieAlgebra) -> Result<(Vec<Comp>, Vec<usize>), LieError> {
    let (_, eig) = g.inner_torus()?;
    let mut map: BTreeMap<(Vec<Q>, Parity), Vec<usize>> = BTreeMap::new();
    for j in 0..g.dim() {
        map.entry((eig[j].clone(), g.parity(j))).or_default().push(j);
    }
    let comps: Vec<Comp> = map
        .into_iter()
        .map(|((w, p), m)| Comp {
            weight: w,
            parity: p,
            members: m,
        })
        .collect();
    let mut of = vec![0; g.dim()];
    for (ci, c) in comps.iter().enumerate() {
        for &j in &c.members {
            of[j] = ci;
        }
    }
    Ok((comps, of))
}

fn qvec(w: &[Q]) -> SVec {
    w.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

pub fn find_isomorphism(g: &SuperLieAlgebra, h: &SuperLieAlgebra, budget: usize) -> Result<IsoOutcome, LieError> {
    if g.sdim() != h.sdim() {
        return Err(LieError::SdimMismatch(g.sdim(), h.sdim()));
    }
    let ig = invariants(g)?;
    let ih = invariants(h)?;
    if ig != ih {
        return Ok(IsoOutcome {
            found: false,
            reason: format!("invariants differ: {:?} vs {:?}", ig, ih),
            nodes: 0,
            map: None,
        });
    }
    let (cg, of_g) = components(g)?;
    let (ch, _) = components(h)?;
    // Independent weights of g, rarest signatures first.
    let sig = |c: &Comp| (c.parity, c.members.len());
    let mut sig_count: HashMap<(Parity, usize), usize> = HashMap::new();
    for c in &cg {
        *sig_count.entry(sig(c)).or_default() += 1;
    }
    let mut order: Vec<usize> = (0..cg.len()).filter(|&i| cg[i].weight.iter().any(|x| !x.is_zero())).collect();
    order.sort_by_key(|&i| (sig_count[&sig(&cg[i])], cg[i].members.len(), i));
    let mut base: Vec<usize> = vec![];
    {
        let mut e = Echelon::new();
        for &i in &order {
            if e.insert(qvec(&cg[i].weight)) {
                base.push(i);
            }
        }
    }
    let coords_g = Coordinatizer::new(&base.iter().map(|&i| qvec(&cg[i].weight)).collect::<Vec<_>>());
    let _ = coords_g;
    let mut state = Search {
        g,
        h,
        cg: &cg,
        ch: &ch,
        of_g: &of_g,
        nodes: 0,
        budget,
        mulsys: vec![],
    };
    let mut assign: Vec<usize> = vec![];
    let res = state.weights(&base, &mut assign);
    let nodes = state.nodes;
    Ok(match res {
        Some(m) => IsoOutcome {
            found: true,
            reason: String::new(),
            nodes,
            map: Some(m),
        },
        None => IsoOutcome {
            found: false,
            reason: if nodes >= budget { "budget exhausted".into() } else { "search space exhausted".into() },
            nodes,
            map: None,
        },
    })
}

struct Search<'a> {
    g: &'a SuperLieAlgebra,
    h: &'a SuperLieAlgebra,
    cg: &'a [Comp],
    ch: &'a [Comp],
    of_g: &'a [usize],
    nodes: usize,
    budget: usize,
    mulsys: Vec<MulEq>,
}

/// c_i c_j = r c_k for the scales of one-dimensional components.
struct MulEq {
    i: usize,
    j: usize,
    k: usize,
    r: Q,
}

fn factor(n: &num_bigint::BigInt) -> Option<(bool, BTreeMap<u64, i64>)> {
    use num_traits::{Signed, ToPrimitive};
    let neg = n.is_negative();
    let mut m = n.abs().to_u64()?;
    let mut out = BTreeMap::new();
    let mut p = 2u64;
    while p * p <= m {
        while m % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            m /= p;
        }
        p += 1;
        if p > 100_000 {
            return None;
        }
    }
    if m > 1 {
        *out.entry(m).or_insert(0) += 1;
    }
    Some((neg, out))
}

/// Sign bit and prime exponents of a nonzero rational.
fn log_q(x: &Q) -> Option<(bool, BTreeMap<u64, i64>)> {
    let (sn, mut en) = factor(x.numer())?;
    let (sd, ed) = factor(x.denom())?;
    for (p, e) in ed {
        *en.entry(p).or_insert(0) -= e;
    }
    en.retain(|_, e| *e != 0);
    Some((sn != sd, en))
}

/// Consistency of a linear system over GF(2), rows as (variable set, rhs).
fn gf2_consistent(rows: Vec<(Vec<usize>, bool)>) -> bool {
    let mut piv: BTreeMap<usize, (std::collections::BTreeSet<usize>, bool)> = BTreeMap::new();
    for (vars, rhs) in rows {
        let mut set: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
        for v in vars {
            if !set.insert(v) {
                set.remove(&v);
            }
        }
        let mut b = rhs;
        while let Some(&lead) = set.iter().next() {
            match piv.get(&lead) {
                Some((ps, pb)) => {
                    for v in ps {
                        if !set.insert(*v) {
                            set.remove(v);
                        }
                    }
                    b ^= *pb;
                }
                None => break,
            }
        }
        match set.iter().next() {
            Some(&lead) => {
                piv.insert(lead, (set, b));
            }
            None => {
                if b {
                    return false;
                }
            }
        }
    }
    true
}

impl<'a> Search<'a> {
    fn build_mulsys(&mut self, corr: &[usize]) -> bool {
        self.mulsys.clear();
        let g = self.g;
        let h = self.h;
        let one_dim = |k: usize| self.cg[self.of_g[k]].members.len() == 1 && self.cg[self.of_g[k]].weight.iter().any(|x| !x.is_zero());
        let img = |k: usize| self.ch[corr[self.of_g[k]]].members[0];
        for i in 0..g.dim() {
            if !one_dim(i) {
                continue;
            }
            for j in i..g.dim() {
                if !one_dim(j) {
                    continue;
                }
                let e = g.qentry(i, j);
                let hb = h.bracket_q(&h.basis_vec(img(i)), &h.basis_vec(img(j)));
                if e.is_empty() {
                    if !hb.is_empty() {
                        return false;
                    }
                    continue;
                }
                let k = e[0].0;
                if !one_dim(k) {
                    continue;
                }
                let a = e[0].1.clone();
                match hb.get(&img(k)) {
                    Some(b) if hb.len() == 1 => self.mulsys.push(MulEq { i, j, k, r: a / b }),
                    _ => return false,
                }
            }
        }
        true
    }

    /// Necessary condition for rational scales: the sign and prime-exponent
    /// systems of the multiplicative constraints are consistent.
    fn mul_feasible(&self, known: &[Option<SVec>]) -> bool {
        if self.mulsys.is_empty() {
            return true;
        }
        let val = |k: usize| -> Option<Q> { known[k].as_ref().map(|v| v.values().next().cloned().unwrap_or_else(Q::zero)) };
        let mut signs: Vec<(Vec<usize>, bool)> = vec![];
        let mut primes: BTreeMap<u64, Vec<SVec>> = BTreeMap::new();
        let mut per_eq: Vec<(SVec, BTreeMap<u64, i64>)> = vec![];
        for e in &self.mulsys {
            let mut rhs = e.r.clone();
            let mut vars: Vec<(usize, i64)> = vec![];
            for (x, ex) in [(e.i, 1i64), (e.j, 1), (e.k, -1)] {
                match val(x) {
                    Some(c) => {
                        if c.is_zero() {
                            return false;
                        }
                        if ex > 0 {
                            rhs /= c;
                        } else {
                            rhs *= c;
                        }
                    }
                    None => vars.push((x, ex)),
                }
            }
            let Some((sb, exps)) = log_q(&rhs) else { continue };
            signs.push((vars.iter().map(|(x, _)| *x).collect(), sb));
            let mut row = SVec::new();
            for (x, ex) in &vars {
                *row.entry(*x).or_insert_with(Q::zero) += q(*ex);
            }
            row.retain(|_, v| !v.is_zero());
            for p in exps.keys() {
                primes.entry(*p).or_default();
            }
            per_eq.push((row, exps));
        }
        if !gf2_consistent(signs) {
            return false;
        }
        let cc = self.g.dim();
        for (p, _) in primes {
            let mut ech = Echelon::new();
            for (row, exps) in &per_eq {
                let mut r = row.clone();
                if let Some(e) = exps.get(&p) {
                    r.insert(cc, q(*e));
                }
                if !r.is_empty() {
                    ech.insert(r);
                }
            }
            if ech.pivots().contains(&cc) {
                return false;
            }
        }
        true
    }

    /// Backtracks over images of the base weights; on a consistent full
    /// assignment, derives the component correspondence and propagates.
    fn weights(&mut self, base: &[usize], assign: &mut Vec<usize>) -> Option<Isomorphism> {
        if self.nodes >= self.budget {
            return None;
        }
        if assign.len() == base.len() {
            let corr = self.correspondence(base, assign)?;
            self.nodes += 1;
            return self.propagate_start(&corr);
        }
        let c = &self.cg[base[assign.len()]];
        for (hi, d) in self.ch.iter().enumerate() {
            if d.parity != c.parity || d.members.len() != c.members.len() || d.weight.iter().all(|x| x.is_zero()) {
                continue;
            }
            if assign.contains(&hi) {
                continue;
            }
            assign.push(hi);
            let r = self.weights(base, assign);
            assign.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }

    /// Component of h matched to each component of g, if the linear map
    /// sending the chosen base weights is a signature-preserving bijection.
    fn correspondence(&self, base: &[usize], assign: &[usize]) -> Option<Vec<usize>> {
        let hb: Vec<SVec> = assign.iter().map(|&i| qvec(&self.ch[i].weight)).collect();
        let coords_h = Coordinatizer::new(&hb);
        if coords_h.rank() != hb.len() {
            return None;
        }
        let gb: Vec<SVec> = base.iter().map(|&i| qvec(&self.cg[i].weight)).collect();
        // Map every h-weight into g-weight space.
        let mut index_g: HashMap<(Vec<Q>, Parity), usize> = HashMap::new();
        for (i, c) in self.cg.iter().enumerate() {
            index_g.insert((c.weight.clone(), c.parity), i);
        }
        let rg = self.cg[0].weight.len();
        let mut corr = vec![usize::MAX; self.cg.len()];
        for (hi, d) in self.ch.iter().enumerate() {
            let c = coords_h.coords(&qvec(&d.weight))?;
            let mut img = SVec::new();
            for (a, x) in c {
                svec_add_scaled(&mut img, &gb[a], &x);
            }
            let w: Vec<Q> = (0..rg).map(|k| img.get(&k).cloned().unwrap_or_else(Q::zero)).collect();
            let gi = *index_g.get(&(w, d.parity))?;
            if self.cg[gi].members.len() != d.members.len() || corr[gi] != usize::MAX {
                return None;
            }
            corr[gi] = hi;
        }
        if corr.iter().any(|&x| x == usize::MAX) {
            return None;
        }
        Some(corr)
    }

    fn propagate_start(&mut self, corr: &[usize]) -> Option<Isomorphism> {
        if !self.build_mulsys(corr) {
            return None;
        }
        let known: Vec<Option<SVec>> = vec![None; self.g.dim()];
        if !self.mul_feasible(&known) {
            return None;
        }
        self.propagate(corr, known)
    }

    fn propagate(&mut self, corr: &[usize], mut known: Vec<Option<SVec>>) -> Option<Isomorphism> {
        let g = self.g;
        let h = self.h;
        let n = g.dim();
        loop {
            if self.nodes >= self.budget {
                return None;
            }
            self.nodes += 1;
            if !self.mul_feasible(&known) {
                return None;
            }
            // Unknown variables u_{k, j'} for k unknown, j' in the matched
            // component.
            let mut var_of: HashMap<(usize, usize), usize> = HashMap::new();
            let mut vars: Vec<(usize, usize)> = vec![];
            for k in 0..n {
                if known[k].is_none() {
                    for &jp in &self.ch[corr[self.of_g[k]]].members {
                        var_of.insert((k, jp), vars.len());
                        vars.push((k, jp));
                    }
                }
            }
            if vars.is_empty() {
                let images: Vec<SVec> = known.into_iter().map(|v| v.unwrap()).collect();
                let iso = Isomorphism { images };
                return if verify(g, h, &iso) { Some(iso) } else { None };
            }
            let nv = vars.len();
            let const_col = nv;
            let mut ech = Echelon::new();
            let mut any_eq = false;
            for x in 0..n {
                for y in 0..n {
                    let kx = known[x].is_some();
                    let ky = known[y].is_some();
                    if !kx && !ky {
                        continue;
                    }
                    // rows keyed by output coordinate of h
                    let mut rows: BTreeMap<usize, SVec> = BTreeMap::new();
                    for (k, c) in g.qentry(x, y) {
                        match &known[*k] {
                            Some(v) => {
                                for (m, a) in v {
                                    *rows.entry(*m).or_default().entry(const_col).or_insert_with(Q::zero) += c * a;
                                }
                            }
                            None => {
                                for &jp in &self.ch[corr[self.of_g[*k]]].members {
                                    let vi = var_of[&(*k, jp)];
                                    *rows.entry(jp).or_default().entry(vi).or_insert_with(Q::zero) += c.clone();
                                }
                            }
                        }
                    }
                    match (&known[x], &known[y]) {
                        (Some(a), Some(b)) => {
                            for (m, c) in h.bracket_q(a, b) {
                                *rows.entry(m).or_default().entry(const_col).or_insert_with(Q::zero) -= c;
                            }
                        }
                        (Some(a), None) => {
                            for &jp in &self.ch[corr[self.of_g[y]]].members {
                                let vi = var_of[&(y, jp)];
                                for (m, c) in h.bracket_q(a, &h.basis_vec(jp)) {
                                    *rows.entry(m).or_default().entry(vi).or_insert_with(Q::zero) -= c;
                                }
                            }
                        }
                        (None, Some(b)) => {
                            for &jp in &self.ch[corr[self.of_g[x]]].members {
                                let vi = var_of[&(x, jp)];
                                for (m, c) in h.bracket_q(&h.basis_vec(jp), b) {
                                    *rows.entry(m).or_default().entry(vi).or_insert_with(Q::zero) -= c;
                                }
                            }
                        }
                        (None, None) => unreachable!(),
                    }
                    for (_, mut r) in rows {
                        r.retain(|_, v| !v.is_zero());
                        if r.is_empty() {
                            continue;
                        }
                        any_eq = true;
                        ech.insert(r);
                    }
                }
            }
            // Inconsistent: a row whose pivot is the constant column.
            if ech.pivots().contains(&const_col) {
                return None;
            }
            let rref = ech.rref_rows();
            let mut pinned: BTreeMap<usize, Q> = BTreeMap::new();
            for r in &rref {
                let (p, _) = r.iter().next().unwrap();
                let others = r.keys().filter(|k| **k != *p && **k != const_col).count();
                if others == 0 {
                    pinned.insert(*p, -r.get(&const_col).cloned().unwrap_or_else(Q::zero));
                }
            }
            // A basis vector is determined once all its variables are pinned.
            let mut progress = false;
            if any_eq {
                for k in 0..n {
                    if known[k].is_some() {
                        continue;
                    }
                    let members = &self.ch[corr[self.of_g[k]]].members;
                    if members.iter().all(|jp| pinned.contains_key(&var_of[&(k, *jp)])) {
                        let v: SVec = members
                            .iter()
                            .map(|jp| (*jp, pinned[&var_of[&(k, *jp)]].clone()))
                            .filter(|(_, c)| !c.is_zero())
                            .collect();
                        known[k] = Some(v);
                        progress = true;
                    }
                }
            }
            if progress {
                continue;
            }
            // Branch: choose a free variable, preferring one-dimensional
            // components with many constraints.
            let pivots: std::collections::HashSet<usize> = ech.pivots().into_iter().collect();
            let mut best: Option<(usize, usize)> = None;
            for k in 0..n {
                if known[k].is_some() {
                    continue;
                }
                let members = &self.ch[corr[self.of_g[k]]].members;
                let size = members.len();
                for jp in members {
                    let vi = var_of[&(k, *jp)];
                    if !pivots.contains(&vi) && !pinned.contains_key(&vi) {
                        if best.map(|(_, s)| size < s).unwrap_or(true) {
                            best = Some((vi, size));
                        }
                    }
                }
            }
            let (vi, size) = match best {
                Some(b) => b,
                None => {
                    // Everything constrained but not pinned: every variable is
                    // a pivot depending on others. Cannot happen with no free
                    // columns; treat as dead end.
                    return None;
                }
            };
            let mut choices = scales();
            if size > 1 {
                choices.insert(0, Q::zero());
            }
            for s in choices {
                if self.nodes >= self.budget {
                    return None;
                }
                // Solve the system with the extra equation var = s.
                let mut e2 = ech.clone();
                let mut extra = SVec::new();
                extra.insert(vi, Q::one());
                extra.insert(const_col, -s.clone());
                e2.insert(extra);
                if e2.pivots().contains(&const_col) {
                    continue;
                }
                let rref2 = e2.rref_rows();
                let mut pinned2: BTreeMap<usize, Q> = BTreeMap::new();
                for r in &rref2 {
                    let (p, _) = r.iter().next().unwrap();
                    if r.keys().all(|k| *k == *p || *k == const_col) {
                        pinned2.insert(*p, -r.get(&const_col).cloned().unwrap_or_else(Q::zero));
                    }
                }
                let mut known2 = known.clone();
                for k in 0..n {
                    if known2[k].is_some() {
                        continue;
                    }
                    let members = &self.ch[corr[self.of_g[k]]].members;
                    if members.iter().all(|jp| pinned2.contains_key(&var_of[&(k, *jp)])) {
                        let v: SVec = members
                            .iter()
                            .map(|jp| (*jp, pinned2[&var_of[&(k, *jp)]].clone()))
                            .filter(|(_, c)| !c.is_zero())
                            .collect();
                        if v.is_empty() {
                            // phi would kill a basis vector
                            known2[k] = None;
                            continue;
                        }
                        known2[k] = Some(v);
                    }
                }
                if known2 == known {
                    // Pin the chosen variable alone by splitting further: seed
                    // the whole vector of its basis element with it.
                    let (k, jp) = vars[vi];
                    let members = &self.ch[corr[self.of_g[k]]].members;
                    if members.len() == 1 {
                        let mut v = SVec::new();
                        if !s.is_zero() {
                            v.insert(jp, s.clone());
                            known2[k] = Some(v);
                        } else {
                            continue;
                        }
                    } else {
                        // Multi-dimensional component: branch on a full
                        // vector by recursing with the equation added.
                        if let Some(r) = self.propagate_with(corr, &known, e2.clone(), &vars, &var_of) {
                            return Some(r);
                        }
                        continue;
                    }
                }
                if let Some(r) = self.propagate(corr, known2) {
                    return Some(r);
                }
            }
            return None;
        }
    }

    /// Branching inside a multi-dimensional component: keep pinning free
    /// variables of the same basis vector until it is determined.
    fn propagate_with(
        &mut self,
        corr: &[usize],
        known: &[Option<SVec>],
        ech: Echelon,
        vars: &[(usize, usize)],
        var_of: &HashMap<(usize, usize), usize>,
    ) -> Option<Isomorphism> {
        let nv = vars.len();
        let const_col = nv;
        let rref = ech.rref_rows();
        let pivots: std::collections::HashSet<usize> = ech.pivots().into_iter().collect();
        let mut pinned: BTreeMap<usize, Q> = BTreeMap::new();
        for r in &rref {
            let (p, _) = r.iter().next().unwrap();
            if r.keys().all(|k| *k == *p || *k == const_col) {
                pinned.insert(*p, -r.get(&const_col).cloned().unwrap_or_else(Q::zero));
            }
        }
        let mut known2 = known.to_vec();
        let mut progressed = false;
        for k in 0..known.len() {
            if known2[k].is_some() {
                continue;
            }
            let members = &self.ch[corr[self.of_g[k]]].members;
            if members.iter().all(|jp| pinned.contains_key(&var_of[&(k, *jp)])) {
                let v: SVec = members
                    .iter()
                    .map(|jp| (*jp, pinned[&var_of[&(k, *jp)]].clone()))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                if v.is_empty() {
                    return None;
                }
                known2[k] = Some(v);
                progressed = true;
            }
        }
        if progressed {
            return self.propagate(corr, known2);
        }
        let free = (0..nv).find(|vi| !pivots.contains(vi) && !pinned.contains_key(vi))?;
        let mut choices = scales();
        choices.insert(0, Q::zero());
        for s in choices {
            if self.nodes >= self.budget {
                return None;
            }
            self.nodes += 1;
            let mut e2 = ech.clone();
            let mut extra = SVec::new();
            extra.insert(free, Q::one());
            extra.insert(const_col, -s);
            e2.insert(extra);
            if e2.pivots().contains(&const_col) {
                continue;
            }
            if let Some(r) = self.propagate_with(corr, known, e2, vars, var_of) {
                return Some(r);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::sl2;
    use super::*;
    use crate::coeff::ParameterRing;
    use crate::liesuper::BasisElement;

    #[test]
    fn sl2_with_itself_and_not_abelian() {
        let g = sl2();
        let out = find_isomorphism(&g, &g, 10_000).unwrap();
        assert!(out.found);
        assert!(verify(&g, &g, out.map.as_ref().unwrap()));
        let ab = SuperLieAlgebra::from_upper(
            "ab",
            &ParameterRing::rationals(),
            (0..3).map(|i| BasisElement::new(format!("a{i}"), Parity::Even)).collect(),
            |_, _| vec![],
        );
        assert!(!find_isomorphism(&g, &ab, 10_000).unwrap().found);
    }

    #[test]
    fn rescaled_sl2() {
        // e' = 2e, f' = f/2 gives the same table; use h' = -h, e <-> f.
        let g = sl2();
        let r = ParameterRing::rationals();
        let s = |k: usize, c: i64| (k, crate::coeff::Scalar::from_int(&r, c));
        let b = vec![
            BasisElement::new("x", Parity::Even),
            BasisElement::new("y", Parity::Even),
            BasisElement::new("hh", Parity::Even),
        ];
        // [hh, x] = 4x, [hh, y] = -4y, [x, y] = 2hh  (hh = 2h, x = 2e, y = 2f)
        let h = SuperLieAlgebra::from_upper("sl2'", &r, b, |i, j| match (i, j) {
            (0, 1) => vec![s(2, 2)],
            (0, 2) => vec![s(0, -4)],
            (1, 2) => vec![s(1, 4)],
            _ => vec![],
        });
        assert!(h.check_axioms().ok());
        let out = find_isomorphism(&g, &h, 10_000).unwrap();
        assert!(out.found, "{}", out.reason);
    }
}
