use xxz_im::bethe::{default_ladder, dual_im_bethe, im_bethe_limit};
use xxz_im::circuit::{build_im_circuit, dual_im_circuit, pairing};
use xxz_im::fermion::build_im_fermionic;
use xxz_im::{ModelParams, C64};

#[test]
fn bethe_route_n3_generic() {
    let p = ModelParams::new(C64::new(0.2, 0.9), C64::new(0.4, 0.0), 2.0, 3).unwrap();
    let im = im_bethe_limit(&p, &default_ladder(&p, 5)).unwrap();
    let circ = build_im_circuit(&p).unwrap();
    assert!(im.normalized_distance(&circ).unwrap() < 1e-8);
}

#[test]
fn bethe_route_n4_free_fermion() {
    let p = ModelParams::free_fermion(0.4, 2.0, 4).unwrap();
    let im = im_bethe_limit(&p, &default_ladder(&p, 5)).unwrap();
    let ff = build_im_fermionic(&p).unwrap();
    assert!(im.normalized_distance(&ff).unwrap() < 1e-6);
}

#[test]
fn dual_pairs_with_im_n2() {
    let p = ModelParams::new(C64::new(0.0, 0.8), C64::new(0.3, 0.1), 1.4, 2).unwrap();
    let im = im_bethe_limit(&p, &default_ladder(&p, 5)).unwrap();
    let dual = dual_im_bethe(&p, &default_ladder(&p, 5)).unwrap();
    assert!((pairing(&dual, &im) - 1.0).norm() < 1e-8);
    let mirrored = dual_im_circuit(&build_im_circuit(&p).unwrap(), p.q_weight).unwrap();
    assert!(dual.normalized_distance(&mirrored).unwrap() < 1e-8);
}
