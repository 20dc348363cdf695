//! Reference computations shared by the oracle tests and the acceptance suite.

use std::collections::BTreeMap;

use gauge_qme::dynamics::InitialStateSpec;
use gauge_qme::lattice::ModelKind;
use gauge_qme::rdm::CMatrix;
use gauge_qme::ModelParams;
use num_complex::Complex64;

use super::explicit::{Explicit, Product};
use super::{jacobi, system, to_explicit};

/// Sectors with weights `1, 2, 3, ...` (normalized) and phases `0.7 k`.
pub fn mixed_spec(model: ModelKind, n: usize, ell: usize, sectors: &[Vec<i32>]) -> InitialStateSpec {
    let weights: Vec<f64> = (1..=sectors.len()).map(|k| k as f64).collect();
    let norm: f64 = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let comps = sectors
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(k, (g, w))| (g.clone(), Complex64::from_polar(w / norm, 0.7 * k as f64)))
        .collect();
    InitialStateSpec::new(model, n, ell, comps)
}

/// States by explicit evolution (Jacobi eigenvectors) on explicit products.
pub fn oracle_states(model: ModelKind, n: usize, params: ModelParams, spec: &InitialStateSpec, times: &[f64]) -> Vec<(Vec<Product>, Vec<Complex64>)> {
    let (_, psi0) = system(model, n, params, spec);
    let explicit0 = to_explicit(&psi0);
    let x = Explicit::new(model, n, params.w, params.m, params.j, params.theta);
    let seeds: Vec<Product> = explicit0.keys().cloned().collect();
    let states = x.closure(&seeds);
    let h = x.dense(&states);
    let v: Vec<Complex64> = states.iter().map(|p| explicit0.get(p).copied().unwrap_or_default()).collect();
    jacobi::evolve(&h, &v, times)
        .into_iter()
        .map(|psi| (states.clone(), psi))
        .collect()
}

/// Largest `|<q|H|p> (G_n(q) - G_n(p))|` over a truncated full space, and the
/// number of off-diagonal elements inspected.
pub fn gauss_commutator(model: ModelKind, sites: usize, cap: i32) -> (f64, usize) {
    let x = Explicit::new(model, sites, 1.0, 0.3, 0.7, std::f64::consts::PI);
    let space = x.full_space(cap);
    let index: BTreeMap<&Product, usize> = space.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut worst: f64 = 0.0;
    let mut elements = 0;
    for p in &space {
        let gp: Vec<i32> = (1..=sites).map(|n| x.gauss(p, n)).collect();
        for (q, a) in x.hop(p).0 {
            if !index.contains_key(&q) {
                continue;
            }
            elements += 1;
            for n in 1..=sites {
                worst = worst.max((a * f64::from(x.gauss(&q, n) - gp[n - 1])).abs());
            }
        }
    }
    (worst, elements)
}

/// Spin-1 `S^x` and `S^y` in the basis `(-1, 0, 1)`.
fn spin_matrices() -> (CMatrix, CMatrix) {
    let mut up = CMatrix::zeros(3, 3);
    // S^+ |m> = sqrt 2 |m+1> for m = -1, 0
    up[(1, 0)] = Complex64::new(2f64.sqrt(), 0.0);
    up[(2, 1)] = Complex64::new(2f64.sqrt(), 0.0);
    let down = up.adjoint();
    let sx = (&up + &down).scale(0.5);
    let sy = (&up - &down) * Complex64::new(0.0, -0.5);
    (sx, sy)
}

/// Dense `O` on the full product space of A: `2^ell` occupations times `3^ell` links.
pub fn dense_order_parameter(ell: usize) -> CMatrix {
    let (sx, sy) = spin_matrices();
    let single = &sx + (&sx * &sx - &sy * &sy).scale(std::f64::consts::FRAC_1_SQRT_2);
    let links = 3usize.pow(ell as u32);
    let mut op = CMatrix::zeros(links, links);
    for site in 0..ell {
        // kron over links with `single` at position `site`.
        let mut m = CMatrix::identity(1, 1);
        for k in 0..ell {
            let f = if k == site { single.clone() } else { CMatrix::identity(3, 3) };
            m = m.kronecker(&f);
        }
        op += m;
    }
    CMatrix::identity(1 << ell, 1 << ell).kronecker(&op)
}

fn dense_index(occ: &[u8], links: &[i32]) -> usize {
    let o = occ.iter().fold(0usize, |acc, &b| 2 * acc + b as usize);
    let l = links.iter().fold(0usize, |acc, &s| 3 * acc + (s + 1) as usize);
    o * 3usize.pow(links.len() as u32) + l
}

/// `Tr(rho_A O)` with `rho_A` traced out of explicit quantum-link products.
pub fn dense_order_parameter_expectation(states: &[Product], psi: &[Complex64], ell: usize) -> Complex64 {
    let rho = super::explicit::brute_force_rdm(states, psi, ell);
    let size = (1 << ell) * 3usize.pow(ell as u32);
    let mut dense = CMatrix::zeros(size, size);
    for (((oa, la), (ob, lb)), z) in &rho {
        dense[(dense_index(oa, la), dense_index(ob, lb))] = *z;
    }
    (&dense * dense_order_parameter(ell)).trace()
}
