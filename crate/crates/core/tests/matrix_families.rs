use std::time::Instant;

use superlie::coeff::{q, qf, ParameterRing, Scalar};
use superlie::liesuper::iso::find_isomorphism;
use superlie::matrix::*;

#[test]
fn osp_alpha_one_is_osp42() {
    let t = Instant::now();
    let a = osp_alpha(&Scalar::rational(q(1))).unwrap();
    let b = osp(4, 2).unwrap();
    let out = find_isomorphism(&a, &b, 200_000).unwrap();
    eprintln!("{} nodes {} {:?}", out.reason, out.nodes, t.elapsed());
    assert!(out.found);
}

#[test]
fn osp_alpha_symmetries() {
    for a in [q(2), q(3), qf(1, 2)] {
        let g = osp_alpha(&Scalar::rational(a.clone())).unwrap();
        for b in [-q(1) - &a, q(1) / &a] {
            let h = osp_alpha(&Scalar::rational(b.clone())).unwrap();
            let t = Instant::now();
            let out = find_isomorphism(&g, &h, 200_000).unwrap();
            eprintln!("{a} -> {b}: {} nodes {} {:?}", out.reason, out.nodes, t.elapsed());
            assert!(out.found);
        }
    }
}

#[test]
fn simple_families() {
    for g in [psq(3).unwrap(), spe(3).unwrap(), psl(2).unwrap(), osp(3, 2).unwrap(), spe(4).unwrap()] {
        let t = Instant::now();
        let r = g.is_simple().unwrap();
        eprintln!("{} {:?} {:?}", g.name, r, t.elapsed());
        assert!(r.simple);
    }
    assert!(!q_algebra(2).unwrap().is_simple().unwrap().simple);
    assert!(!gl(2, 1).unwrap().is_simple().unwrap().simple);
}

#[test]
fn qet_is_multiplicative() {
    let r = ParameterRing::new(vec![], vec!["tau".into(), "r1".into(), "r2".into(), "r3".into(), "r4".into(), "s1".into(), "s2".into(), "s3".into(), "s4".into()]).unwrap();
    let p = |n: &str| Scalar::param(&r, n).unwrap();
    let c = |x: i64| Scalar::from_int(&r, x);
    let a1 = vec![vec![c(2), c(1)], vec![c(1), c(1)]];
    let b1 = vec![vec![p("r1"), p("r2")], vec![p("r3"), p("r4")]];
    let a2 = vec![vec![c(1), c(-1)], vec![c(3), c(2)]];
    let b2 = vec![vec![p("s1"), p("s2")], vec![p("s3"), p("s4")]];
    let mul = |x: &Vec<Vec<Scalar>>, y: &Vec<Vec<Scalar>>| -> Vec<Vec<Scalar>> {
        (0..2).map(|i| (0..2).map(|k| &(&x[i][0] * &y[0][k]) + &(&x[i][1] * &y[1][k])).collect()).collect()
    };
    let add = |x: Vec<Vec<Scalar>>, y: Vec<Vec<Scalar>>| -> Vec<Vec<Scalar>> {
        x.into_iter().zip(y).map(|(u, v)| u.into_iter().zip(v).map(|(a, b)| &a + &b).collect()).collect()
    };
    let a = add(mul(&a1, &a2), mul(&b1, &b2));
    let b = add(mul(&a1, &b2), mul(&b1, &a2));
    let lhs = qet(&a, &b, "tau").unwrap();
    let rhs = &qet(&a1, &b1, "tau").unwrap() * &qet(&a2, &b2, "tau").unwrap();
    assert_eq!(lhs, rhs);
}
