//! Verification suites run by `superlie verify`. Each check is exact; the
//! report carries no timings so repeated runs agree byte for byte.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::{q, qf, Scalar, Q};
use crate::cohomology::{differential, h_sdim, is_coboundary, Budget, CohomologyError, Options};
use crate::deform::{self, deform_bracket, first_order_poisson_match, is_trivial, nr_square, quantization_tower, DeformError};
use crate::liesuper::iso::{find_isomorphism, verify};
use crate::liesuper::{Sdim, SuperLieAlgebra};
use crate::matrix::{self, GramForm, MatrixError};
use crate::splitness::{self, SplitError, SplitOutcome, Term};
use crate::vectorial::{self, Gram, VectorialError};

pub const SUITES: &[&str] = &["thm-odd", "thm-even", "isoms", "sequences", "bott", "rigidity", "splitting", "quantization"];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{name}`; known: {known}", name = .0, known = SUITES.join(", "))]
    Unknown(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
}

impl From<CohomologyError> for SuiteError {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::Budget { .. } => SuiteError::Budget(e.to_string()),
            other => SuiteError::Failed(other.to_string()),
        }
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for SuiteError {
            fn from(e: $t) -> Self {
                SuiteError::Failed(e.to_string())
            }
        }
    )*};
}
failed_from!(DeformError, MatrixError, VectorialError, SplitError, crate::liesuper::LieError);

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Exact-zero confirmations, one line per verified identity.
    pub residuals: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub max_n: usize,
    pub budget: Budget,
    pub iso_budget: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_n: 5,
            budget: Budget::default(),
            iso_budget: 500_000,
        }
    }
}

struct Run {
    checks: Vec<Check>,
    residuals: Vec<String>,
}

impl Run {
    fn check(&mut self, name: impl Into<String>, pass: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), pass, detail });
    }
}

fn sdim_json(s: Sdim) -> Value {
    json!(format!("{}|{}", s.even, s.odd))
}

fn opts(o: &SuiteOptions) -> Options {
    Options {
        budget: o.budget.clone(),
        ..Options::default()
    }
}

fn triples(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

pub fn run_suite(name: &str, o: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let mut r = Run { checks: vec![], residuals: vec![] };
    match name {
        "thm-odd" => thm_odd(&mut r, o)?,
        "thm-even" => thm_even(&mut r, o)?,
        "isoms" => isoms(&mut r, o)?,
        "sequences" => sequences(&mut r, o)?,
        "bott" => bott(&mut r),
        "rigidity" => rigidity(&mut r, o)?,
        "splitting" => splitting(&mut r)?,
        "quantization" => quantization(&mut r)?,
        other => return Err(SuiteError::Unknown(other.into())),
    }
    Ok(SuiteReport {
        suite: name.into(),
        pass: r.checks.iter().all(|c| c.pass),
        checks: r.checks,
        residuals: r.residuals,
    })
}

fn thm_odd(r: &mut Run, o: &SuiteOptions) -> Result<(), SuiteError> {
    for n in [3usize, 5] {
        if n > o.max_n {
            continue;
        }
        let g = vectorial::svect(n)?;
        let h = h_sdim(&g, 2, &opts(o))?;
        r.check(format!("H2(svect(0|{n})) = 0|1"), h.sdim == Sdim::new(0, 1), json!({"sdim": sdim_json(h.sdim)}));
        for c in &h.representatives {
            let nonzero = !is_coboundary(&g, c)?.is_coboundary();
            r.check(format!("svect(0|{n}) representative is not a coboundary"), nonzero, json!({"cochain": c.render(&g)}));
            let d = deform_bracket(&g, c, "tau");
            let ok = d.as_ref().map(|d| d.check().ok()).unwrap_or(false);
            r.check(format!("svect(0|{n}) + tau c satisfies Jacobi over Q[tau]"), ok, json!({"error": d.err().map(|e| e.to_string())}));
            if ok {
                r.residuals.push(format!("Jacobi residual of svect(0|{n})+tau*c: exact zero on {} basis triples", triples(g.dim())));
            }
        }
        if n == 3 {
            let fam = vectorial::svect_tilde_odd(n, "tau")?;
            let d = deform::DeformedAlgebra::from_family(&g, &fam, "tau")?;
            let cocycle = differential(&g, &d.correction)?.is_zero();
            let t = is_trivial(&d, 1)?;
            r.check("tau-part of svect~(0|3) is a nonzero class", cocycle && t.class_nonzero, json!({"cocycle": cocycle, "note": t.note}));
        }
    }
    Ok(())
}

fn thm_even(r: &mut Run, o: &SuiteOptions) -> Result<(), SuiteError> {
    let mut algebras: Vec<SuperLieAlgebra> = vec![];
    if o.max_n >= 4 {
        algebras.push(vectorial::svect(4)?);
    }
    if o.max_n >= 5 {
        algebras.push(vectorial::h_prime(5, &Gram::split(5))?);
    }
    algebras.push(matrix::aut_b("osp(4|2)", &GramForm::even_standard(4, 2)?)?);
    for g in &algebras {
        let h = h_sdim(g, 2, &opts(o))?;
        r.check(format!("H2({}) = 1|0", g.name), h.sdim == Sdim::new(1, 0), json!({"sdim": sdim_json(h.sdim)}));
        for c in &h.representatives {
            let d = deform_bracket(g, c, "t");
            let ok = d.as_ref().map(|d| d.check().ok()).unwrap_or(false);
            r.check(format!("{} + t c satisfies Jacobi mod t^2", g.name), ok, json!({"error": d.err().map(|e| e.to_string())}));
            if ok {
                r.residuals.push(format!("Jacobi residual of {}+t*c mod t^2: exact zero on {} basis triples", g.name, triples(g.dim())));
            }
            if g.name.starts_with("h'") {
                let sq = nr_square(g, c)?;
                let cob = is_coboundary(g, &sq)?.is_coboundary();
                r.check(format!("obstruction square on {} is a coboundary", g.name), cob, json!({}));
            }
        }
    }
    Ok(())
}

fn iso_check(r: &mut Run, o: &SuiteOptions, g: &SuperLieAlgebra, h: &SuperLieAlgebra) -> Result<(), SuiteError> {
    let out = find_isomorphism(g, h, o.iso_budget)?;
    let ok = out.found && out.map.as_ref().is_some_and(|m| verify(g, h, m));
    r.check(format!("{} = {}", g.name, h.name), ok, json!({"nodes": out.nodes, "reason": out.reason}));
    if ok {
        r.residuals.push(format!("bracket tables of {} and {} agree exactly under the found map", g.name, h.name));
    }
    Ok(())
}

fn isoms(r: &mut Run, o: &SuiteOptions) -> Result<(), SuiteError> {
    iso_check(r, o, &vectorial::vect(2)?, &matrix::osp(2, 2)?)?;
    iso_check(r, o, &matrix::spe(3)?, &vectorial::svect(3)?)?;
    iso_check(r, o, &matrix::psl(2)?, &vectorial::h_prime(4, &Gram::split(4))?)?;
    for a in [q(2), q(3), qf(1, 2)] {
        let g = matrix::osp_alpha(&Scalar::rational(a.clone()))?;
        for b in [-q(1) - &a, q(1) / &a] {
            let h = matrix::osp_alpha(&Scalar::rational(b))?;
            iso_check(r, o, &g, &h)?;
        }
    }
    Ok(())
}

fn sequences(r: &mut Run, o: &SuiteOptions) -> Result<(), SuiteError> {
    for (name, top) in [("PoH", 5), ("h_prime_H", 5), ("svect_div", 4), ("vol0_int", 4)] {
        for n in 3..=top.min(o.max_n) {
            let s = vectorial::verify_sequence(name, n)?;
            r.check(format!("{name} exact at n = {n}"), s.exact, serde_json::to_value(&s.nodes).unwrap_or(Value::Null));
        }
    }
    Ok(())
}

fn bott(r: &mut Run) {
    for a in -8..=8 {
        let c = splitness::line_bundle_cohomology(a);
        let (h0, h1) = splitness::bott_dims(a);
        let b0: Vec<i64> = (0..=a).collect();
        let b1: Vec<i64> = (a + 1..=-1).rev().collect();
        let ok = c.h0 == h0 && c.h1 == h1 && c.h0_basis == b0 && c.h1_basis == b1 && c.window_ok;
        r.check(format!("O({a})"), ok, json!({"h0": c.h0, "h1": c.h1, "h0_basis": c.h0_basis, "h1_basis": c.h1_basis, "window": [c.window.0, c.window.1]}));
    }
}

fn rigidity(r: &mut Run, o: &SuiteOptions) -> Result<(), SuiteError> {
    for g in [matrix::psq(3)?, matrix::spe(4)?, vectorial::vect(3)?, matrix::osp(3, 2)?] {
        let h = h_sdim(&g, 2, &opts(o))?;
        r.check(format!("H2({}) = 0", g.name), h.sdim == Sdim::default(), json!({"sdim": sdim_json(h.sdim)}));
    }
    Ok(())
}

fn splitting(r: &mut Run) -> Result<(), SuiteError> {
    for k in [-3i64, -2, -1, 0, 2] {
        let (lo, hi) = splitness::window(k);
        let mut all = 0;
        let mut ok = true;
        let mut combined = vec![];
        for e in lo..=hi {
            let term = Term::phi(e, &["tau"], q(e.abs() + 1));
            combined.push(term.clone());
            let t = splitness::make_superstring(k, &[term])?;
            let rep = splitness::splitting_attempt(&t)?;
            all += 1;
            ok &= match &rep.outcome {
                SplitOutcome::Split(w) => splitness::verify_witness(&t, w) && rep.window_ok,
                SplitOutcome::Obstructed(_) => false,
            };
        }
        let t = splitness::make_superstring(k, &combined)?;
        let rep = splitness::splitting_attempt(&t)?;
        ok &= matches!(&rep.outcome, SplitOutcome::Split(w) if splitness::verify_witness(&t, w));
        r.check(format!("k = {k} splits"), ok, json!({"instances": all + 1, "window": [lo, hi]}));
        if ok {
            r.residuals.push(format!("k = {k}: witnesses carry every instance to the split model exactly"));
        }
    }
    for k in [-4i64, -5, -6] {
        let (dim, _) = splitness::obstruction_space(k);
        r.check(format!("dim obstruction space at k = {k} is {}", (k + 2).abs() - 1), dim as i64 == (k + 2).abs() - 1, json!({"dim": dim}));
        for i in 0..dim {
            let e = -1 - i as i64;
            let t = splitness::make_superstring(k, &[Term::phi(e, &["tau"], q(1))])?;
            let rep = splitness::splitting_attempt(&t)?;
            let (ok, v) = match &rep.outcome {
                SplitOutcome::Obstructed(c) => {
                    let mut unit = vec![Q::from_integer(0.into()); dim];
                    unit[i] = q(1);
                    (c.vector == unit, c.rendered.clone())
                }
                SplitOutcome::Split(_) => (false, "split".into()),
            };
            r.check(format!("k = {k}, tau*x^{e}*xi is obstructed"), ok, json!({"class": v}));
        }
    }
    Ok(())
}

fn quantization(r: &mut Run) -> Result<(), SuiteError> {
    let t = quantization_tower(4, &q(1))?;
    let dims: Vec<Value> = t.nodes.iter().map(|n| json!({"name": n.name, "sdim": sdim_json(n.sdim)})).collect();
    let hp = vectorial::h_prime(4, &Gram::split(4))?;
    let last = t.nodes.last().map(|n| n.sdim).unwrap_or_default();
    r.check("Clifford tower at 4 generators, t = 1: quotient 6|8", last == Sdim::new(6, 8) && last == hp.sdim(), json!({"nodes": dims}));
    r.check("quotient is simple", t.simple, json!({}));
    let ok = t.quotient.check_axioms().ok();
    r.check("quotient satisfies the axioms", ok, json!({}));
    let m = first_order_poisson_match(4)?;
    r.check("first-order Poisson match at formal t", m.mismatches == 0 && m.order_zero_vanishes, serde_json::to_value(&m).unwrap_or(Value::Null));
    if m.mismatches == 0 {
        r.residuals.push(format!("[Q f, Q g] - t*({})*Q({{f,g}}) = O(t^2) on all {} pairs", m.constant, m.pairs));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites() {
        for s in ["bott", "splitting", "quantization"] {
            let r = run_suite(s, &SuiteOptions::default()).unwrap();
            assert!(r.pass, "{s}: {:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        }
        assert!(matches!(run_suite("nope", &SuiteOptions::default()), Err(SuiteError::Unknown(_))));
    }

    #[test]
    fn budget_is_reported() {
        let o = SuiteOptions {
            budget: Budget { max_block: 2, ..Budget::default() },
            ..SuiteOptions::default()
        };
        assert!(matches!(run_suite("rigidity", &o), Err(SuiteError::Budget(_))));
    }
}
