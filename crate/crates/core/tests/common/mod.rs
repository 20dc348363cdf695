#![allow(dead_code)]

pub mod explicit;
pub mod jacobi;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use gauge_qme::dynamics::{build_initial_state, InitialStateSpec, MultiSectorState};
use gauge_qme::experiments::runner::{prepare, PreparedSystem};
use gauge_qme::lattice::{GaugeSector, LatticeSpec, ModelKind};
use gauge_qme::par::ExecMode;
use gauge_qme::ModelParams;
use num_complex::Complex64;

use explicit::Product;

pub fn system(model: ModelKind, n: usize, params: ModelParams, spec: &InitialStateSpec) -> (PreparedSystem, MultiSectorState) {
    let sectors: BTreeSet<GaugeSector> = spec.sectors(n).unwrap().into_iter().collect();
    let sys = prepare(model, LatticeSpec::new(n).unwrap(), params, &sectors, usize::MAX, ExecMode::Parallel).unwrap();
    let psi = build_initial_state(spec, &sys.bases).unwrap();
    (sys, psi)
}

/// Library state as a vector over explicit products (`alpha_g psi_g`).
pub fn to_explicit(state: &MultiSectorState) -> BTreeMap<Product, Complex64> {
    let mut out = BTreeMap::new();
    for c in state.entries().values() {
        for i in 0..c.basis.dim() {
            let amp = c.coefficient * c.amplitudes[i];
            let prev = out.insert(Product::from_basis(&c.basis, i), amp);
            assert!(prev.is_none(), "sectors overlap");
        }
    }
    out
}

pub fn random_times(seed: u64, count: usize, t_max: f64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0.0..t_max)).collect()
}

pub fn max_abs_diff(a: &gauge_qme::rdm::CMatrix, b: &gauge_qme::rdm::CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
