//! Acceptance checks. One PASS/FAIL line per criterion; exits nonzero if any fails.
//!
//! Everything here is exact arithmetic over Q (or Q adjoined nilpotent
//! parameters), so every tolerance below is zero. The constants pin the
//! remaining knobs: search budgets, seeds and sample counts.

use std::process::ExitCode;
use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superlie::coeff::{q, qf, Parity, ParameterRing, Scalar, Q};
use superlie::cohomology::{self, argument_tuples, ce_differential, derivations, differential, h_sdim, is_coboundary, BlockMode, Cochain, Options};
use superlie::deform::{self, deform_bracket, first_order_poisson_match, quantization_tower, QUANTIZATION_CONSTANT};
use superlie::liesuper::iso::{find_isomorphism, verify};
use superlie::liesuper::{Sdim, SuperLieAlgebra};
use superlie::matrix::{self, qet, qtr, Format, GramForm, SuperMatrix};
use superlie::splitness::{self, SplitOutcome, Term};
use superlie::vectorial::{self, Gram};

/// Allowed residual in every identity: exact zero.
const RESIDUAL_TOLERANCE: usize = 0;
/// Node budget for the isomorphism search.
const ISO_BUDGET: usize = 500_000;
const SEED: u64 = 20_240_601;
/// Random cochains per (algebra, degree) in the sparse d^2 check.
const D2_SAMPLES: usize = 4;
/// Basis entries in each random cochain.
const D2_SUPPORT: usize = 3;
/// Full d^2 matrices are built up to this dimension.
const D2_FULL_MAX_DIM: usize = 17;
/// Random pairs in the trace checks and random group pairs for qet.
const TRACE_SAMPLES: usize = 12;
const QET_SAMPLES: usize = 12;
/// Entries of random rational matrices lie in [-ENTRY_RANGE, ENTRY_RANGE].
const ENTRY_RANGE: i64 = 5;

type Checks = Vec<(String, bool)>;
type Outcome = Result<Checks, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn h2(g: &SuperLieAlgebra, mode: BlockMode) -> Result<cohomology::CohomologyReport, String> {
    h_sdim(g, 2, &Options { mode, ..Options::default() }).map_err(err)
}

fn show(s: Sdim) -> String {
    format!("{}|{}", s.even, s.odd)
}

fn criterion_1() -> Outcome {
    let mut out = Checks::new();
    let g = vectorial::svect(3).map_err(err)?;
    let r = h2(&g, BlockMode::InnerInvariant)?;
    out.push((format!("H2(svect(0|3)) = {}", show(r.sdim)), r.sdim == Sdim::new(0, 1)));
    // independent count with no torus pruning
    let m = h2(&g, BlockMode::Monolithic)?;
    out.push((format!("unpruned count agrees ({})", show(m.sdim)), m.sdim == r.sdim));
    let c = r.representatives.first().ok_or("no representative")?;
    out.push(("representative is a cocycle".into(), differential(&g, c).map_err(err)?.is_zero()));
    out.push(("representative is not a coboundary".into(), !is_coboundary(&g, c).map_err(err)?.is_coboundary()));
    let d = deform_bracket(&g, c, "tau").map_err(err)?;
    let rep = d.algebra.check_axioms();
    out.push(("deformed bracket over Q[tau] passes exact Jacobi".into(), rep.ok()));
    Ok(out)
}

fn criterion_2() -> Outcome {
    let g = vectorial::svect(5).map_err(err)?;
    let r = h2(&g, BlockMode::InnerInvariant)?;
    let mut out = vec![(format!("H2(svect(0|5)) = {}", show(r.sdim)), r.sdim == Sdim::new(0, 1))];
    if let Some(c) = r.representatives.first() {
        out.push(("representative is a cocycle".into(), differential(&g, c).map_err(err)?.is_zero()));
        out.push(("representative is not a coboundary".into(), !is_coboundary(&g, c).map_err(err)?.is_coboundary()));
    }
    Ok(out)
}

fn criterion_3() -> Outcome {
    let mut out = Checks::new();
    let algebras = vec![
        vectorial::svect(4).map_err(err)?,
        vectorial::h_prime(5, &Gram::split(5)).map_err(err)?,
        matrix::aut_b("osp(4|2)", &GramForm::even_standard(4, 2).map_err(err)?).map_err(err)?,
    ];
    for g in &algebras {
        let r = h2(g, BlockMode::InnerInvariant)?;
        out.push((format!("H2({}) = {}", g.name, show(r.sdim)), r.sdim == Sdim::new(1, 0)));
        let f = h2(g, BlockMode::Full)?;
        out.push((format!("{} graded count agrees ({})", g.name, show(f.sdim)), f.sdim == r.sdim));
        for c in &r.representatives {
            out.push((format!("{} representative is not a coboundary", g.name), !is_coboundary(g, c).map_err(err)?.is_coboundary()));
            let d = deform_bracket(g, c, "t").map_err(err)?;
            out.push((format!("{} + t c is Jacobi mod t^2", g.name), d.algebra.check_axioms().ok()));
        }
    }
    Ok(out)
}

fn criterion_4() -> Outcome {
    let mut out = Checks::new();
    let algebras = [matrix::psq(3).map_err(err)?, matrix::spe(4).map_err(err)?, vectorial::vect(3).map_err(err)?, matrix::osp(3, 2).map_err(err)?];
    for g in &algebras {
        let r = h2(g, BlockMode::InnerInvariant)?;
        let f = h2(g, BlockMode::Full)?;
        out.push((format!("H2({}) = {} (graded {})", g.name, show(r.sdim), show(f.sdim)), r.sdim == Sdim::default() && f.sdim == Sdim::default()));
    }
    Ok(out)
}

fn iso(out: &mut Checks, g: &SuperLieAlgebra, h: &SuperLieAlgebra) -> Result<(), String> {
    let o = find_isomorphism(g, h, ISO_BUDGET).map_err(err)?;
    let ok = o.found && o.map.as_ref().is_some_and(|m| verify(g, h, m));
    out.push((format!("{} = {} ({} nodes)", g.name, h.name, o.nodes), ok));
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut out = Checks::new();
    iso(&mut out, &vectorial::vect(2).map_err(err)?, &matrix::osp(2, 2).map_err(err)?)?;
    iso(&mut out, &matrix::spe(3).map_err(err)?, &vectorial::svect(3).map_err(err)?)?;
    iso(&mut out, &matrix::psl(2).map_err(err)?, &vectorial::h_prime(4, &Gram::split(4)).map_err(err)?)?;
    for a in [q(2), q(3), qf(1, 2)] {
        let g = matrix::osp_alpha(&Scalar::rational(a.clone())).map_err(err)?;
        for b in [-q(1) - &a, q(1) / &a] {
            let h = matrix::osp_alpha(&Scalar::rational(b)).map_err(err)?;
            iso(&mut out, &g, &h)?;
        }
    }
    Ok(out)
}

fn criterion_6() -> Outcome {
    let mut out = Checks::new();
    for (name, top) in [("PoH", 5), ("h_prime_H", 5), ("svect_div", 4), ("vol0_int", 4)] {
        for n in 3..=top {
            let s = vectorial::verify_sequence(name, n).map_err(err)?;
            let nodes = s.nodes.iter().all(|c| c.exact);
            out.push((format!("{name} at n = {n} ({} nodes)", s.nodes.len()), s.exact && nodes && !s.nodes.is_empty()));
        }
    }
    // closed-form dimensions of the terms
    for n in 3..=5usize {
        let half = 1usize << (n - 1);
        let v = vectorial::vect(n).map_err(err)?;
        out.push((format!("sdim vect(0|{n})"), v.sdim() == Sdim::new(n * half, n * half)));
        let s = vectorial::svect(n).map_err(err)?;
        out.push((format!("dim svect(0|{n})"), s.dim() == (n - 1) * 2 * half + 1));
        let hp = vectorial::h_prime(n, &Gram::split(n)).map_err(err)?;
        out.push((format!("dim h'(0|{n})"), hp.dim() == 2 * half - 2));
        let po = vectorial::po(n, &Gram::split(n)).map_err(err)?;
        out.push((format!("sdim po(0|{n})"), po.sdim() == Sdim::new(half, half)));
    }
    Ok(out)
}

fn criterion_7() -> Outcome {
    let mut out = Checks::new();
    let t = quantization_tower(4, &q(1)).map_err(err)?;
    let last = t.nodes.last().map(|n| n.sdim).unwrap_or_default();
    out.push((format!("quotient sdim {}", show(last)), last == Sdim::new(6, 8) && t.quotient.sdim() == last));
    out.push(("quotient is simple".into(), t.simple));
    // necessary conditions checked directly: perfect and centreless
    let der = t.quotient.derived_subalgebra().map_err(err)?;
    let cen = t.quotient.center().map_err(err)?;
    out.push(("quotient is perfect with zero center".into(), der.dim() == t.quotient.dim() && cen.dim() == 0));
    let alt = t.quotient.is_simple_with(SEED, 16).map_err(err)?;
    out.push(("simplicity with an independent seed".into(), alt.simple));
    out.push(("quotient satisfies the axioms".into(), t.quotient.check_axioms().ok()));
    let m = first_order_poisson_match(4).map_err(err)?;
    out.push((
        format!("first-order Poisson match on {} pairs, constant {}", m.pairs, m.constant),
        m.mismatches == RESIDUAL_TOLERANCE && m.order_zero_vanishes && m.constant == QUANTIZATION_CONSTANT,
    ));
    // the formal tower at m = 4 also passes the axioms
    let cl = deform::CliffordAlgebra::formal(4, "t").map_err(err)?.lie_algebra().map_err(err)?;
    out.push(("formal Cl(4) satisfies the axioms".into(), cl.check_axioms().ok()));
    Ok(out)
}

fn criterion_8() -> Outcome {
    let mut out = Checks::new();
    for a in -8i64..=8 {
        let c = splitness::line_bundle_cohomology(a);
        let h0 = (a + 1).max(0) as usize;
        let h1 = (-a - 1).max(0) as usize;
        let b0: Vec<i64> = (0..=a).collect();
        let b1: Vec<i64> = (a + 1..=-1).rev().collect();
        let ok = c.h0 == h0 && c.h1 == h1 && c.h0_basis == b0 && c.h1_basis == b1 && c.window_ok && splitness::bott_dims(a) == (h0, h1);
        out.push((format!("O({a}): h0 = {}, h1 = {}", c.h0, c.h1), ok));
    }
    Ok(out)
}

fn splits(k: i64, terms: &[Term]) -> Result<bool, String> {
    let t = splitness::make_superstring(k, terms).map_err(err)?;
    let r = splitness::splitting_attempt(&t).map_err(err)?;
    Ok(match &r.outcome {
        SplitOutcome::Split(w) => splitness::verify_witness(&t, w) && r.window_ok,
        SplitOutcome::Obstructed(_) => false,
    })
}

fn criterion_9() -> Outcome {
    let mut out = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in [-3i64, -2, -1, 0, 2] {
        let (lo, hi) = splitness::window(k);
        let mut ok = true;
        let mut all = vec![];
        for e in lo..=hi {
            let term = Term::phi(e, &["tau"], q(rng.gen_range(1..=ENTRY_RANGE)));
            ok &= splits(k, std::slice::from_ref(&term))?;
            all.push(term);
            ok &= splits(k, &[Term::phi(e, &["tau", "sigma", "rho"], q(rng.gen_range(1..=ENTRY_RANGE)))])?;
        }
        ok &= splits(k, &all)?;
        out.push((format!("k = {k} splits on {} exponents", hi - lo + 1), ok));
    }
    for k in [-4i64, -5, -6] {
        let want = ((k + 2).abs() - 1) as usize;
        let (dim, p) = splitness::obstruction_space(k);
        out.push((format!("k = {k}: obstruction dim {dim}"), dim == want && p == Parity::Odd));
        for i in 0..want {
            let e = -1 - i as i64;
            let t = splitness::make_superstring(k, &[Term::phi(e, &["tau"], q(1))]).map_err(err)?;
            let r = splitness::splitting_attempt(&t).map_err(err)?;
            let ok = match &r.outcome {
                SplitOutcome::Obstructed(c) => c.vector.iter().enumerate().all(|(j, x)| if j == i { *x == q(1) } else { x.is_zero() }),
                SplitOutcome::Split(_) => false,
            };
            out.push((format!("k = {k}: class of tau x^{e} xi is basis vector {i}"), ok));
        }
    }
    Ok(out)
}

fn random_cochain(g: &SuperLieAlgebra, k: usize, rng: &mut ChaCha8Rng) -> Cochain {
    let tuples = argument_tuples(g, k);
    let parity = if rng.gen_bool(0.5) { Parity::Odd } else { Parity::Even };
    let mut c = Cochain::zero(k, parity);
    let mut tries = 0;
    while c.values.len() < D2_SUPPORT && tries < 1000 {
        tries += 1;
        let u = &tuples[rng.gen_range(0..tuples.len())];
        let pu = u.iter().fold(Parity::Even, |a, &i| a + g.parity(i));
        let targets: Vec<usize> = (0..g.dim()).filter(|&s| pu + g.parity(s) == parity).collect();
        if targets.is_empty() {
            continue;
        }
        let s = targets[rng.gen_range(0..targets.len())];
        c.add(g, u, s, q(rng.gen_range(1..=ENTRY_RANGE)));
    }
    c
}

fn d_squared(g: &SuperLieAlgebra, rng: &mut ChaCha8Rng) -> Result<bool, String> {
    for k in 0..=2 {
        if g.dim() <= D2_FULL_MAX_DIM {
            let d0 = ce_differential(g, k).map_err(err)?;
            let d1 = ce_differential(g, k + 1).map_err(err)?;
            if d1.compose(&d0).iter().map(|c| c.len()).sum::<usize>() > RESIDUAL_TOLERANCE {
                return Ok(false);
            }
        }
        for _ in 0..D2_SAMPLES {
            let c = random_cochain(g, k, rng);
            let dd = differential(g, &differential(g, &c).map_err(err)?).map_err(err)?;
            if !dd.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn random_q(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(-ENTRY_RANGE..=ENTRY_RANGE))
}

fn random_homogeneous(rng: &mut ChaCha8Rng, f: &Format, p: Parity) -> SuperMatrix {
    let n = f.size();
    let rows: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if f.parities[i] + f.parities[j] == p { random_q(rng) } else { q(0) }).collect())
        .collect();
    SuperMatrix::from_rational(f.clone(), &rows, p)
}

/// [[A, B], [B, A]] with A = 0 for odd elements and B = 0 for even ones.
fn random_queer(rng: &mut ChaCha8Rng, n: usize, p: Parity) -> SuperMatrix {
    let blk: Vec<Vec<Q>> = (0..n).map(|_| (0..n).map(|_| random_q(rng)).collect()).collect();
    let rows: Vec<Vec<Q>> = (0..2 * n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    let same = (i < n) == (j < n);
                    if same != p.is_odd() {
                        blk[i % n][j % n].clone()
                    } else {
                        q(0)
                    }
                })
                .collect()
        })
        .collect();
    SuperMatrix::from_rational(Format::standard(n, n), &rows, p)
}

type RMat = Vec<Vec<Scalar>>;

fn rmul(a: &RMat, b: &RMat) -> RMat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Scalar::zero(a[0][0].ring()), |acc, l| &acc + &(&a[i][l] * &b[l][j])))
                .collect()
        })
        .collect()
}

fn radd(a: &RMat, b: &RMat) -> RMat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect()).collect()
}

/// A random element [[A, B], [B, A]] of the queer group: A invertible over Q,
/// B with entries odd combinations of the generators.
fn random_queer_group(rng: &mut ChaCha8Rng, ring: &std::sync::Arc<ParameterRing>, odd: &[Scalar]) -> (RMat, RMat) {
    let a = loop {
        let m: Vec<Vec<Q>> = (0..2).map(|_| (0..2).map(|_| random_q(rng)).collect()).collect();
        if m[0][0].clone() * &m[1][1] - m[0][1].clone() * &m[1][0] != q(0) {
            break m;
        }
    };
    let a: RMat = a.into_iter().map(|r| r.into_iter().map(|x| Scalar::one(ring).scale(&x)).collect()).collect();
    let b: RMat = (0..2)
        .map(|_| {
            (0..2)
                .map(|_| odd.iter().fold(Scalar::zero(ring), |acc, o| &acc + &o.scale(&random_q(rng))))
                .collect()
        })
        .collect();
    (a, b)
}

fn criterion_10() -> Outcome {
    let mut out = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let gram4 = Gram::split(4);
    let mut algebras: Vec<SuperLieAlgebra> = vec![
        matrix::gl(2, 1).map_err(err)?,
        matrix::sl(2, 1).map_err(err)?,
        matrix::psl(2).map_err(err)?,
        matrix::q_algebra(2).map_err(err)?,
        matrix::sq(3).map_err(err)?,
        matrix::psq(3).map_err(err)?,
        matrix::pq(3).map_err(err)?,
        matrix::pe(3).map_err(err)?,
        matrix::spe(3).map_err(err)?,
        matrix::spe(4).map_err(err)?,
        matrix::osp(2, 2).map_err(err)?,
        matrix::osp(3, 2).map_err(err)?,
        matrix::aut_b("osp(4|2)", &GramForm::even_standard(4, 2).map_err(err)?).map_err(err)?,
        vectorial::vect(2).map_err(err)?,
        vectorial::vect(3).map_err(err)?,
        vectorial::svect(3).map_err(err)?,
        vectorial::svect(4).map_err(err)?,
        vectorial::svect(5).map_err(err)?,
        vectorial::svect_tilde_even_rational(4, &q(1)).map_err(err)?,
        vectorial::po(4, &gram4).map_err(err)?,
        vectorial::h(4, &gram4).map_err(err)?,
        vectorial::h_prime(4, &gram4).map_err(err)?,
        vectorial::h_prime(5, &Gram::split(5)).map_err(err)?,
        quantization_tower(4, &q(1)).map_err(err)?.quotient,
    ];
    for a in [q(2), q(3), qf(1, 2), q(-3), q(-2)] {
        algebras.push(matrix::osp_alpha(&Scalar::rational(a)).map_err(err)?);
    }
    let nonrational = vec![
        vectorial::svect_tilde_odd(3, "tau").map_err(err)?,
        vectorial::svect_tilde_even_formal(4, "t").map_err(err)?,
        deform::CliffordAlgebra::formal(3, "t").map_err(err)?.lie_algebra().map_err(err)?,
    ];
    let bad: Vec<String> = algebras.iter().chain(&nonrational).filter(|g| !g.check_axioms().ok()).map(|g| g.name.clone()).collect();
    out.push((format!("axioms hold on {} algebras {bad:?}", algebras.len() + nonrational.len()), bad.is_empty()));

    let mut bad = vec![];
    for g in &algebras {
        if !d_squared(g, &mut rng)? {
            bad.push(g.name.clone());
        }
    }
    out.push((format!("d^2 = 0 for k <= 2 on {} algebras {bad:?}", algebras.len()), bad.is_empty()));

    for g in [matrix::q_algebra(2).map_err(err)?, vectorial::vect(2).map_err(err)?, matrix::spe(3).map_err(err)?, vectorial::h_prime(4, &gram4).map_err(err)?] {
        let o = Options { mode: BlockMode::Full, ..Options::default() };
        let h0 = h_sdim(&g, 0, &o).map_err(err)?.sdim;
        let z = g.center().map_err(err)?.sdim(&g);
        out.push((format!("H0({}) = {} = center {}", g.name, show(h0), show(z)), h0 == z));
        let h1 = h_sdim(&g, 1, &o).map_err(err)?.sdim;
        let der = derivations(&g).map_err(err)?.outer();
        out.push((format!("H1({}) = {} = outer derivations {}", g.name, show(h1), show(der)), h1 == der));
    }

    let mut ok = true;
    for (m, n) in [(2, 1), (1, 2), (2, 2), (3, 1)] {
        let f = Format::standard(m, n);
        for _ in 0..TRACE_SAMPLES {
            for px in [Parity::Even, Parity::Odd] {
                for py in [Parity::Even, Parity::Odd] {
                    let x = random_homogeneous(&mut rng, &f, px);
                    let y = random_homogeneous(&mut rng, &f, py);
                    ok &= x.supercommutator(&y).map_err(err)?.str().map_err(err)?.is_zero();
                }
            }
        }
    }
    out.push(("str vanishes on brackets".into(), ok));

    let mut ok = true;
    for n in [2usize, 3] {
        for _ in 0..TRACE_SAMPLES {
            for px in [Parity::Even, Parity::Odd] {
                for py in [Parity::Even, Parity::Odd] {
                    let x = random_queer(&mut rng, n, px);
                    let y = random_queer(&mut rng, n, py);
                    ok &= qtr(&x.supercommutator(&y).map_err(err)?).map_err(err)?.is_zero();
                }
            }
        }
    }
    out.push(("qtr vanishes on brackets".into(), ok));

    let ring = ParameterRing::new(vec![], vec!["tau".into(), "b1".into(), "b2".into(), "b3".into()]).map_err(err)?;
    let odd: Vec<Scalar> = ["b1", "b2", "b3"].iter().map(|s| Scalar::param(&ring, s)).collect::<Result<_, _>>().map_err(err)?;
    let mut ok = true;
    for _ in 0..QET_SAMPLES {
        let (a1, b1) = random_queer_group(&mut rng, &ring, &odd);
        let (a2, b2) = random_queer_group(&mut rng, &ring, &odd);
        let a = radd(&rmul(&a1, &a2), &rmul(&b1, &b2));
        let b = radd(&rmul(&a1, &b2), &rmul(&b1, &a2));
        let lhs = qet(&a, &b, "tau").map_err(err)?;
        let rhs = &qet(&a1, &b1, "tau").map_err(err)? * &qet(&a2, &b2, "tau").map_err(err)?;
        ok &= (&lhs - &rhs).is_zero();
    }
    out.push((format!("qet is multiplicative on {QET_SAMPLES} random pairs in GQ(2)"), ok));
    Ok(out)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("svect(0|3): odd class, not a coboundary, exact deformation", criterion_1),
        ("svect(0|5): H2 = 0|1", criterion_2),
        ("even classes on svect(0|4), h'(0|5), osp(4|2)", criterion_3),
        ("rigid: psq(3), spe(4), vect(0|3), osp(3|2)", criterion_4),
        ("isomorphisms", criterion_5),
        ("exact sequences", criterion_6),
        ("Clifford quantization at m = 4", criterion_7),
        ("Bott formulas on P^1", criterion_8),
        ("splitting of superstrings", criterion_9),
        ("property suites", criterion_10),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = run();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(checks) => {
                let pass = checks.iter().all(|c| c.1);
                if !pass {
                    failed += 1;
                }
                println!("criterion {}: {} - {title} ({} checks, {secs:.1}s)", i + 1, if pass { "PASS" } else { "FAIL" }, checks.len());
                for (name, ok) in &checks {
                    println!("    [{}] {name}", if *ok { "ok" } else { "FAILED" });
                }
            }
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL - {title}: {e}", i + 1);
            }
        }
    }
    println!("{} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
