use superlie::coeff::{q, Q};
use superlie::cohomology::{h_sdim, Options};
use superlie::deform::*;
use superlie::liesuper::iso::find_isomorphism;
use superlie::liesuper::Sdim;
use superlie::matrix::{psl, q_algebra};
use superlie::vectorial::svect;

#[test]
fn clifford_tower_four() {
    let t = quantization_tower(4, &Q::from_integer(1.into())).unwrap();
    let dims: Vec<Sdim> = t.nodes.iter().map(|n| n.sdim).collect();
    assert_eq!(dims, vec![Sdim::new(8, 8), Sdim::new(7, 8), Sdim::new(6, 8)]);
    assert!(t.simple);
    // sum-of-squares form: no split torus over Q, so the rational search
    // cannot match it with psl(2|2)
    let out = find_isomorphism(&t.quotient, &psl(2).unwrap(), 1000).unwrap();
    assert!(!out.found);
}

#[test]
fn clifford_odd_center() {
    let t = quantization_tower(3, &q(1)).unwrap();
    println!("{:?}", t.nodes);
    assert_eq!(t.nodes[0].sdim, Sdim::new(4, 4));
    let _ = q_algebra(2).unwrap();
}

#[test]
fn poisson_first_order() {
    for m in 1..=4 {
        let r = first_order_poisson_match(m).unwrap();
        assert_eq!(r.mismatches, 0, "m = {m}");
        assert!(r.order_zero_vanishes);
    }
}

#[test]
fn svect3_deformation_is_jacobi_exact() {
    let g = svect(3).unwrap();
    let r = h_sdim(&g, 2, &Options::default()).unwrap();
    let d = deform_bracket(&g, &r.representatives[0], "tau").unwrap();
    assert!(d.check().ok());
}
