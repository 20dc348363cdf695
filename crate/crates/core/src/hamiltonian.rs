//! Sector Hamiltonians in the integrated-out (fermions only) representation.
//!
//! Fermionic modes are ordered by site index, `|n_1 n_2 ...> =
//! (c_1^+)^{n_1} (c_2^+)^{n_2} ... |0>`, and an annihilator or creator at
//! site `k` picks up `(-1)^(occupied sites left of k)`. With this convention
//! nearest-neighbour hopping carries sign `+1` and the quantum link pair
//! term `psi_n psi_{n+1}` carries sign `-1`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{FermionConfig, LinkConfig, ModelKind, SectorBasis};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub w: f64,
    pub m: f64,
    pub j: f64,
    pub theta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            w: 1.0,
            m: 0.0,
            j: 0.0,
            theta: 0.0,
        }
    }
}

impl ModelParams {
    pub fn new(w: f64, m: f64, j: f64, theta: f64) -> Result<Self> {
        let p = Self { w, m, j, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(Error::ContractViolation(format!("hopping w must be positive, got {}", self.w)));
        }
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(Error::ContractViolation(format!("coupling J must be non-negative, got {}", self.j)));
        }
        if !(0.0..=2.0 * PI).contains(&self.theta) {
            return Err(Error::ContractViolation(format!("theta must lie in [0, 2pi], got {}", self.theta)));
        }
        if !self.m.is_finite() {
            return Err(Error::ContractViolation("mass must be finite".into()));
        }
        Ok(())
    }

    /// Builders also accept `w = 0` (the static-charge limit).
    fn check_buildable(&self) -> Result<()> {
        if self.w == 0.0 {
            Self { w: 1.0, ..*self }.validate()
        } else {
            self.validate()
        }
    }

    fn background(&self) -> f64 {
        self.theta / (2.0 * PI)
    }
}

/// Overall sign applied to every off-diagonal (hopping or pair) element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HoppingConvention {
    #[default]
    SiteOrdered,
    Flipped,
}

impl HoppingConvention {
    fn factor(self) -> f64 {
        match self {
            HoppingConvention::SiteOrdered => 1.0,
            HoppingConvention::Flipped => -1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SectorHamiltonian {
    basis: Arc<SectorBasis>,
    params: ModelParams,
    matrix: DMatrix<f64>,
}

impl SectorHamiltonian {
    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |H - H^T|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        (m - m.transpose()).abs().max()
    }
}

/// Sign of `c_site` (or `c_site^+`) acting on `config`.
pub(crate) fn mode_sign(config: &FermionConfig, site: usize) -> f64 {
    if config.count_before(site) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Diagonal energy of one product state.
pub fn diagonal_energy(model: ModelKind, params: &ModelParams, fermions: &FermionConfig, links: &LinkConfig) -> f64 {
    let sites = fermions.sites();
    let bg = params.background();
    match model {
        ModelKind::Schwinger => {
            let mass: f64 = (1..=sites)
                .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } * f64::from(fermions.occ(n)))
                .sum();
            let field: f64 = links.values().iter().map(|&l| (f64::from(l) + bg).powi(2)).sum();
            params.m * mass + params.j * field
        }
        ModelKind::QuantumLink => {
            let mass = fermions.count() as f64;
            let field: f64 = links
                .values()
                .iter()
                .enumerate()
                .map(|(k, &s)| {
                    let n = k + 1;
                    let stag = if n % 2 == 1 { 1.0 } else { -1.0 };
                    (stag * f64::from(s) + bg).powi(2)
                })
                .sum();
            params.m * mass + params.j * field
        }
    }
}

fn check_model(basis: &SectorBasis, expected: ModelKind) -> Result<()> {
    if basis.model() != expected {
        return Err(Error::ModelMismatch {
            expected,
            found: basis.model(),
        });
    }
    Ok(())
}

pub fn build_schwinger_hamiltonian(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<SectorHamiltonian> {
    build_schwinger_with(params, basis, HoppingConvention::SiteOrdered)
}

pub fn build_schwinger_with(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    convention: HoppingConvention,
) -> Result<SectorHamiltonian> {
    check_model(&basis, ModelKind::Schwinger)?;
    params.check_buildable()?;
    let dim = basis.dim();
    let sites = basis.lattice().sites();
    let mut h = DMatrix::zeros(dim, dim);
    for (i, (fermions, links)) in basis.states().iter().enumerate() {
        h[(i, i)] = diagonal_energy(ModelKind::Schwinger, params, fermions, links);
        for n in 1..sites {
            let (src, dst) = match (fermions.occ(n), fermions.occ(n + 1)) {
                (0, 1) => (n + 1, n),
                (1, 0) => (n, n + 1),
                _ => continue,
            };
            // c_dst^+ c_src; the transporter is implied by re-deriving links.
            let removed = fermions.flipped(src);
            let sign = mode_sign(fermions, src) * mode_sign(&removed, dst);
            let target = removed.flipped(dst);
            let Some(j) = basis.position(&target) else {
                continue;
            };
            debug_assert_eq!(
                (basis.links(j).value(n) - links.value(n)).abs(),
                1,
                "hopping across bond {n} must shift its flux by one"
            );
            h[(j, i)] += -params.w * sign * convention.factor();
        }
    }
    Ok(SectorHamiltonian {
        basis,
        params: *params,
        matrix: h,
    })
}

/// `<m+1| S^+ |m>` for spin 1.
pub(crate) fn spin1_raise(m: i32) -> f64 {
    let m = f64::from(m);
    (2.0 - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn build_qlm_hamiltonian(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<SectorHamiltonian> {
    build_qlm_with(params, basis, HoppingConvention::SiteOrdered)
}

pub fn build_qlm_with(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    convention: HoppingConvention,
) -> Result<SectorHamiltonian> {
    check_model(&basis, ModelKind::QuantumLink)?;
    params.check_buildable()?;
    let dim = basis.dim();
    let sites = basis.lattice().sites();
    let mut h = DMatrix::zeros(dim, dim);
    for (i, (fermions, links)) in basis.states().iter().enumerate() {
        h[(i, i)] = diagonal_energy(ModelKind::QuantumLink, params, fermions, links);
        for n in 1..sites {
            let s = links.value(n);
            let (sign, ladder) = match (fermions.occ(n), fermions.occ(n + 1)) {
                (1, 1) => {
                    // psi_n S^+_n psi_{n+1}
                    let after = fermions.flipped(n + 1);
                    (mode_sign(fermions, n + 1) * mode_sign(&after, n), spin1_raise(s))
                }
                (0, 0) => {
                    // psi_{n+1}^+ S^-_n psi_n^+
                    let after = fermions.flipped(n);
                    (mode_sign(fermions, n) * mode_sign(&after, n + 1), spin1_raise(s - 1))
                }
                _ => continue,
            };
            if ladder == 0.0 {
                continue;
            }
            let target = fermions.flipped(n).flipped(n + 1);
            let Some(j) = basis.position(&target) else {
                continue;
            };
            debug_assert_eq!((basis.links(j).value(n) - s).abs(), 1);
            h[(j, i)] += -params.w * sign * ladder * convention.factor();
        }
    }
    Ok(SectorHamiltonian {
        basis,
        params: *params,
        matrix: h,
    })
}

/// Dispatch on the basis model.
pub fn build_hamiltonian(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<SectorHamiltonian> {
    match basis.model() {
        ModelKind::Schwinger => build_schwinger_hamiltonian(params, basis),
        ModelKind::QuantumLink => build_qlm_hamiltonian(params, basis),
    }
}

/// Ascending eigenvalues of a sector Hamiltonian.
pub fn spectrum(h: &SectorHamiltonian) -> Result<Vec<f64>> {
    let dim = h.dim();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let eig = nalgebra::SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, 0)
        .ok_or(Error::EigenConvergence(dim))?;
    let mut e: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// `max_n |E_a(n) - E_b(n)|` over the sorted spectra.
pub fn spectral_degeneracy_check(h_a: &SectorHamiltonian, h_b: &SectorHamiltonian) -> Result<f64> {
    if h_a.dim() != h_b.dim() {
        return Err(Error::DimensionMismatch(h_a.dim(), h_b.dim()));
    }
    let a = spectrum(h_a)?;
    let b = spectrum(h_b)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
