use std::time::Instant;

use superlie::cohomology::{h_sdim, Options};
use superlie::liesuper::{Sdim, SuperLieAlgebra};
use superlie::matrix::{aut_b, osp, psq, spe, GramForm};
use superlie::vectorial::{h_prime, svect, vect, Gram};

fn h2(g: &SuperLieAlgebra) -> Sdim {
    let t = Instant::now();
    let r = h_sdim(g, 2, &Options { representatives: false, ..Default::default() }).unwrap();
    let largest = r.blocks.iter().map(|b| b.cochains).max().unwrap_or(0);
    eprintln!("{}: H2 = {} ({} blocks, largest {largest}) {:?}", g.name, r.sdim, r.blocks.len(), t.elapsed());
    r.sdim
}

#[test]
fn rigid() {
    assert_eq!(h2(&psq(3).unwrap()), Sdim::default());
    assert_eq!(h2(&vect(3).unwrap()), Sdim::default());
    assert_eq!(h2(&osp(3, 2).unwrap()), Sdim::default());
    assert_eq!(h2(&spe(4).unwrap()), Sdim::default());
}

#[test]
fn even_classes() {
    assert_eq!(h2(&svect(4).unwrap()), Sdim::new(1, 0));
    assert_eq!(h2(&h_prime(5, &Gram::split(5)).unwrap()), Sdim::new(1, 0));
    let form = GramForm::even_standard(4, 2).unwrap();
    assert_eq!(h2(&aut_b("osp(4|2)", &form).unwrap()), Sdim::new(1, 0));
}

#[test]
fn svect5() {
    assert_eq!(h2(&svect(5).unwrap()), Sdim::new(0, 1));
}
