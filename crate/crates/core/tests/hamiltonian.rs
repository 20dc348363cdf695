mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::explicit::{Explicit, Product};
use common::jacobi::jacobi_eigen;
use common::oracle::gauss_commutator;
use gauge_qme::dynamics::diagonalize;
use gauge_qme::hamiltonian::{build_qlm_with, build_schwinger_with, spectral_degeneracy_check};
use gauge_qme::lattice::{default_filling, enumerate_sector_basis, GaugeSector, LatticeSpec, ModelKind};
use gauge_qme::{build_hamiltonian, HoppingConvention, ModelParams};

fn sector_matrix(model: ModelKind, n: usize, lead: &[i32], p: ModelParams) -> (Vec<Product>, nalgebra::DMatrix<f64>) {
    let lattice = LatticeSpec::new(n).unwrap();
    let g = GaugeSector::from_leading(lead, n).unwrap();
    let basis = Arc::new(enumerate_sector_basis(model, &lattice, &g, default_filling(model, &lattice)).unwrap());
    let h = build_hamiltonian(&p, basis.clone()).unwrap();
    ((0..basis.dim()).map(|i| Product::from_basis(&basis, i)).collect(), h.matrix().clone())
}

#[test]
fn sector_matrices_equal_explicit_link_representation() {
    for (model, n, lead) in [
        (ModelKind::Schwinger, 6, vec![0, 0]),
        (ModelKind::Schwinger, 6, vec![1, -1]),
        (ModelKind::Schwinger, 6, vec![1, 0, -1]),
        (ModelKind::QuantumLink, 6, vec![0, 0]),
        (ModelKind::QuantumLink, 6, vec![1, -1]),
        (ModelKind::QuantumLink, 6, vec![-1, 1]),
    ] {
        let p = ModelParams::new(1.0, 0.37, 0.6, 0.9).unwrap();
        let (states, h) = sector_matrix(model, n, &lead, p);
        let x = Explicit::new(model, n, p.w, p.m, p.j, p.theta);
        // The explicit closure of any basis state reproduces the sector
        // (for Schwinger: at fixed filling, which hopping preserves).
        let closure = x.closure(&states[..1]);
        assert_eq!(closure, states, "{model:?} {lead:?}");
        let hx = x.dense(&states);
        assert!((&h - &hx).abs().max() < 1e-14, "{model:?} {lead:?}");
    }
}

#[test]
fn hamiltonian_commutes_with_gauss_law() {
    // Truncated full space: N = 4 with |L| <= 3 (Schwinger) and the full
    // 2^4 * 3^3 space (quantum link).
    for (model, cap) in [(ModelKind::Schwinger, 3), (ModelKind::QuantumLink, 1)] {
        let (worst, elements) = gauss_commutator(model, 4, cap);
        assert!(elements > 0);
        assert!(worst <= 1e-12, "{model:?}: [H, G] = {worst}");
    }
}

#[test]
fn theta_pi_resonant_manifold() {
    // At w = 0, theta = pi, m = 0 the zero-field and single-flipped-link
    // configurations share the energy J (N - 1) / 4.
    let j = 0.8;
    let p = ModelParams { w: 0.0, m: 0.0, j, theta: PI };
    let (states, h) = sector_matrix(ModelKind::Schwinger, 8, &[0, 0], p);
    let neel = states.iter().position(|s| s.links.iter().all(|&l| l == 0)).unwrap();
    assert!((h[(neel, neel)] - j * 7.0 / 4.0).abs() < 1e-14);
    let flipped = states.iter().position(|s| s.links.iter().filter(|&&l| l == -1).count() == 1 && s.links.iter().all(|&l| l <= 0));
    let k = flipped.unwrap();
    assert!((h[(k, k)] - j * 7.0 / 4.0).abs() < 1e-14);
}

#[test]
fn eigensolver_matches_jacobi_oracle() {
    let p = ModelParams::new(1.0, 0.2, 0.5, PI).unwrap();
    for model in [ModelKind::Schwinger, ModelKind::QuantumLink] {
        let lattice = LatticeSpec::new(6).unwrap();
        let g = GaugeSector::from_leading(&[1, -1], 6).unwrap();
        let basis = Arc::new(enumerate_sector_basis(model, &lattice, &g, default_filling(model, &lattice)).unwrap());
        let h = build_hamiltonian(&p, basis).unwrap();
        let eig = diagonalize(&h).unwrap();
        let (oracle, _) = jacobi_eigen(h.matrix());
        for (a, b) in eig.energies().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-11);
        }
        assert!(eig.reconstruction_error(h.matrix()) < 1e-12);
        assert!(eig.orthonormality_error() < 1e-12);
    }
}

#[test]
fn hopping_convention_preserves_spectrum() {
    let p = ModelParams::new(1.0, 0.4, 0.3, 1.1).unwrap();
    let lattice = LatticeSpec::new(8).unwrap();
    let g = GaugeSector::from_leading(&[1, -1], 8).unwrap();
    let sb = Arc::new(enumerate_sector_basis(ModelKind::Schwinger, &lattice, &g, Some(4)).unwrap());
    let a = build_schwinger_with(&p, sb.clone(), HoppingConvention::SiteOrdered).unwrap();
    let b = build_schwinger_with(&p, sb, HoppingConvention::Flipped).unwrap();
    assert!(spectral_degeneracy_check(&a, &b).unwrap() < 1e-10);
    assert!((a.matrix() - b.matrix()).abs().max() > 0.5);
    let qb = Arc::new(enumerate_sector_basis(ModelKind::QuantumLink, &lattice, &g, None).unwrap());
    let a = build_qlm_with(&p, qb.clone(), HoppingConvention::SiteOrdered).unwrap();
    let b = build_qlm_with(&p, qb, HoppingConvention::Flipped).unwrap();
    assert!(spectral_degeneracy_check(&a, &b).unwrap() < 1e-10);
}

#[test]
fn zero_coupling_spectra_coincide_across_sectors() {
    let p = ModelParams::new(1.0, 0.0, 0.0, PI).unwrap();
    let lattice = LatticeSpec::new(8).unwrap();
    let build = |lead: &[i32]| {
        let g = GaugeSector::from_leading(lead, 8).unwrap();
        build_hamiltonian(&p, Arc::new(enumerate_sector_basis(ModelKind::Schwinger, &lattice, &g, Some(4)).unwrap())).unwrap()
    };
    assert!(spectral_degeneracy_check(&build(&[0, 0]), &build(&[1, -1])).unwrap() < 1e-10);
    let p = ModelParams::new(1.0, 0.0, 0.5, PI).unwrap();
    let build = |lead: &[i32]| {
        let g = GaugeSector::from_leading(lead, 8).unwrap();
        build_hamiltonian(&p, Arc::new(enumerate_sector_basis(ModelKind::Schwinger, &lattice, &g, Some(4)).unwrap())).unwrap()
    };
    assert!(spectral_degeneracy_check(&build(&[0, 0]), &build(&[1, -1])).unwrap() > 1e-3);
}
