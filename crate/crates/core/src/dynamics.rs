//! Diagonalization, initial states and sector-resolved time evolution.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::SectorHamiltonian;
use crate::lattice::{FermionConfig, GaugeSector, ModelKind, SectorBasis};

/// Eigenvalues closer than this are treated as one degenerate level when
/// fixing the eigenvector basis.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Column `n` is the eigenvector of `energies()[n]`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `max |V diag(E) V^T - H|`.
    pub fn reconstruction_error(&self, h: &DMatrix<f64>) -> f64 {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.energies));
        (&self.vectors * d * self.vectors.transpose() - h).abs().max()
    }

    /// `max |V^T V - 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(n, n)).abs().max()
    }
}

/// Replace each degenerate block of eigenvectors by the Gram-Schmidt
/// orthonormalization of the projected unit vectors `P e_0, P e_1, ...`, so
/// the basis depends only on the eigenspace and not on the solver.
fn canonicalize(energies: &[f64], vectors: &mut DMatrix<f64>) {
    let dim = energies.len();
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (energies[end] - energies[end - 1]).abs() <= DEGENERACY_TOL * energies[end].abs().max(1.0) {
            end += 1;
        }
        let width = end - start;
        if width == 1 {
            fix_sign(vectors.column_mut(start));
        } else {
            let block = vectors.columns(start, width).into_owned();
            if let Some(canon) = canonical_block(&block) {
                vectors.columns_mut(start, width).copy_from(&canon);
            } else {
                for k in start..end {
                    fix_sign(vectors.column_mut(k));
                }
            }
        }
        start = end;
    }
}

fn fix_sign(mut v: nalgebra::DVectorViewMut<'_, f64>) {
    let scale = v.amax();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-8 * scale.max(1e-300)) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

fn canonical_block(block: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (dim, width) = block.shape();
    for threshold in [1e-3, 1e-6] {
        let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(width);
        for j in 0..dim {
            if chosen.len() == width {
                break;
            }
            let row = block.row(j).transpose();
            let mut v = block * row;
            for _ in 0..2 {
                for u in &chosen {
                    let overlap = u.dot(&v);
                    v.axpy(-overlap, u, 1.0);
                }
            }
            let norm = v.norm();
            if norm > threshold {
                chosen.push(v / norm);
            }
        }
        if chosen.len() == width {
            return Some(DMatrix::from_columns(&chosen));
        }
    }
    None
}

/// Full eigendecomposition with ascending energies and a deterministic basis
/// inside degenerate levels.
pub fn diagonalize(h: &SectorHamiltonian) -> Result<EigenDecomposition> {
    diagonalize_matrix(h.matrix())
}

pub fn diagonalize_matrix(h: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let dim = h.nrows();
    if dim != h.ncols() {
        return Err(Error::DimensionMismatch(dim, h.ncols()));
    }
    if dim == 0 {
        return Ok(EigenDecomposition {
            energies: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = nalgebra::SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0).ok_or(Error::EigenConvergence(dim))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    canonicalize(&energies, &mut vectors);
    Ok(EigenDecomposition { energies, vectors })
}

#[derive(Clone, Debug)]
pub struct SectorComponent {
    pub basis: Arc<SectorBasis>,
    pub coefficient: Complex64,
    pub amplitudes: DVector<Complex64>,
}

impl SectorComponent {
    pub fn weight(&self) -> f64 {
        self.coefficient.norm_sqr() * self.amplitudes.norm_squared()
    }
}

/// `sum_g alpha_g |psi_g>` with one normalized amplitude vector per sector.
#[derive(Clone, Debug)]
pub struct MultiSectorState {
    entries: BTreeMap<GaugeSector, SectorComponent>,
}

impl MultiSectorState {
    pub fn new(entries: BTreeMap<GaugeSector, SectorComponent>) -> Result<Self> {
        for (g, c) in &entries {
            if c.basis.sector() != g {
                return Err(Error::InvalidInitialState(format!("component keyed {g} holds basis of {}", c.basis.sector())));
            }
            if c.amplitudes.len() != c.basis.dim() {
                return Err(Error::DimensionMismatch(c.amplitudes.len(), c.basis.dim()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &BTreeMap<GaugeSector, SectorComponent> {
        &self.entries
    }

    pub fn sectors(&self) -> impl Iterator<Item = &GaugeSector> {
        self.entries.keys()
    }

    pub fn model(&self) -> Option<ModelKind> {
        self.entries.values().next().map(|c| c.basis.model())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(SectorComponent::weight).sum()
    }

    /// Multiply every component by `e^{i phi}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let phase = Complex64::from_polar(1.0, phi);
        let mut s = self.clone();
        for c in s.entries.values_mut() {
            c.coefficient *= phase;
        }
        s
    }
}

/// Recipe for the product-state superpositions used as quench initial states.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialStateSpec {
    pub model: ModelKind,
    pub ell: usize,
    /// Charges on sites `1..=ell` (zeros elsewhere) and their coefficient.
    pub components: Vec<(Vec<i32>, Complex64)>,
    pub seed: FermionConfig,
}

/// Default fermion seed: Neel state for the Schwinger model, bare vacuum for
/// the quantum link model.
pub fn default_seed(model: ModelKind, sites: usize) -> FermionConfig {
    match model {
        ModelKind::Schwinger => FermionConfig::neel(sites),
        ModelKind::QuantumLink => FermionConfig::vacuum(sites),
    }
}

/// Mixing angle `(pi/4) q / q_max` of the Mpemba family.
pub fn mpemba_angle(q: u32, q_max: u32) -> f64 {
    std::f64::consts::FRAC_PI_4 * f64::from(q) / f64::from(q_max)
}

impl InitialStateSpec {
    pub fn new(model: ModelKind, sites: usize, ell: usize, components: Vec<(Vec<i32>, Complex64)>) -> Self {
        Self {
            model,
            ell,
            components,
            seed: default_seed(model, sites),
        }
    }

    /// Equal-weight superposition of the given A-charge patterns.
    pub fn equal(model: ModelKind, sites: usize, ell: usize, sectors: &[Vec<i32>]) -> Self {
        let a = Complex64::new(1.0 / (sectors.len() as f64).sqrt(), 0.0);
        Self::new(model, sites, ell, sectors.iter().map(|g| (g.clone(), a)).collect())
    }

    /// `cos(angle) |first> + sin(angle) |second>`.
    pub fn mixed(model: ModelKind, sites: usize, ell: usize, first: Vec<i32>, second: Vec<i32>, angle: f64) -> Self {
        Self::new(
            model,
            sites,
            ell,
            vec![
                (first, Complex64::new(angle.cos(), 0.0)),
                (second, Complex64::new(angle.sin(), 0.0)),
            ],
        )
    }

    /// `cos(theta_q) |0_A> + sin(theta_q) |q_A>` with `q_A = pattern * q`.
    pub fn mpemba(model: ModelKind, sites: usize, pattern: &[i32], q: u32, q_max: u32) -> Self {
        let zero = vec![0; pattern.len()];
        let charged = pattern.iter().map(|&p| p * q as i32).collect();
        Self::mixed(model, sites, pattern.len(), zero, charged, mpemba_angle(q, q_max))
    }

    pub fn sectors(&self, sites: usize) -> Result<Vec<GaugeSector>> {
        self.components
            .iter()
            .map(|(g, _)| {
                if g.len() > self.ell {
                    return Err(Error::InvalidInitialState(format!(
                        "charge pattern {g:?} longer than the subsystem ({})",
                        self.ell
                    )));
                }
                GaugeSector::from_leading(g, sites)
            })
            .collect()
    }
}

pub type SectorBases = BTreeMap<GaugeSector, Arc<SectorBasis>>;

pub fn build_initial_state(spec: &InitialStateSpec, bases: &SectorBases) -> Result<MultiSectorState> {
    let sites = spec.seed.sites();
    let total: f64 = spec.components.iter().map(|(_, a)| a.norm_sqr()).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInitialState(format!("coefficients have total weight {total}")));
    }
    let mut entries = BTreeMap::new();
    for (sector, (_, coefficient)) in spec.sectors(sites)?.into_iter().zip(&spec.components) {
        let basis = bases.get(&sector).ok_or_else(|| Error::MissingSector(sector.charges().to_vec()))?;
        if basis.model() != spec.model {
            return Err(Error::ModelMismatch {
                expected: spec.model,
                found: basis.model(),
            });
        }
        let idx = basis
            .position(&spec.seed)
            .ok_or_else(|| Error::SeedAbsent(sector.charges().to_vec()))?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        let component = SectorComponent {
            basis: basis.clone(),
            coefficient: *coefficient,
            amplitudes,
        };
        if entries.insert(sector.clone(), component).is_some() {
            return Err(Error::InvalidInitialState(format!("sector {sector} listed twice")));
        }
    }
    MultiSectorState::new(entries)
}

pub type SectorEigs = BTreeMap<GaugeSector, Arc<EigenDecomposition>>;

fn propagate(eig: &EigenDecomposition, psi: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
    let v = eig.vectors();
    let re = psi.map(|z| z.re);
    let im = psi.map(|z| z.im);
    let cre = v.tr_mul(&re);
    let cim = v.tr_mul(&im);
    let coeffs = DVector::from_fn(eig.dim(), |n, _| {
        Complex64::new(cre[n], cim[n]) * Complex64::from_polar(1.0, -eig.energies()[n] * t)
    });
    apply_real(v, &coeffs)
}

fn apply_real(v: &DMatrix<f64>, c: &DVector<Complex64>) -> DVector<Complex64> {
    let re = v * c.map(|z| z.re);
    let im = v * c.map(|z| z.im);
    DVector::from_fn(re.len(), |i, _| Complex64::new(re[i], im[i]))
}

/// `e^{-iHt}` applied sector by sector; coefficients are untouched.
pub fn evolve(state: &MultiSectorState, eigs: &SectorEigs, t: f64) -> Result<MultiSectorState> {
    let mut entries = BTreeMap::new();
    for (g, c) in state.entries() {
        let eig = eigs.get(g).ok_or_else(|| Error::MissingSector(g.charges().to_vec()))?;
        if eig.dim() != c.amplitudes.len() {
            return Err(Error::DimensionMismatch(eig.dim(), c.amplitudes.len()));
        }
        entries.insert(
            g.clone(),
            SectorComponent {
                basis: c.basis.clone(),
                coefficient: c.coefficient,
                amplitudes: propagate(eig, &c.amplitudes, t),
            },
        );
    }
    Ok(MultiSectorState { entries })
}

/// Initial state expanded once in every sector eigenbasis, for repeated
/// evaluation at many times.
#[derive(Clone, Debug)]
pub struct Propagator {
    sectors: Vec<(GaugeSector, SectorComponent, Arc<EigenDecomposition>, DVector<Complex64>)>,
}

impl Propagator {
    pub fn new(state: &MultiSectorState, eigs: &SectorEigs) -> Result<Self> {
        let mut sectors = Vec::new();
        for (g, c) in state.entries() {
            let eig = eigs.get(g).ok_or_else(|| Error::MissingSector(g.charges().to_vec()))?;
            if eig.dim() != c.amplitudes.len() {
                return Err(Error::DimensionMismatch(eig.dim(), c.amplitudes.len()));
            }
            let v = eig.vectors();
            let cre = v.tr_mul(&c.amplitudes.map(|z| z.re));
            let cim = v.tr_mul(&c.amplitudes.map(|z| z.im));
            let overlaps = DVector::from_fn(eig.dim(), |n, _| Complex64::new(cre[n], cim[n]));
            sectors.push((g.clone(), c.clone(), eig.clone(), overlaps));
        }
        Ok(Self { sectors })
    }

    pub fn at(&self, t: f64) -> MultiSectorState {
        let entries = self
            .sectors
            .iter()
            .map(|(g, c, eig, overlaps)| {
                let phased = DVector::from_fn(eig.dim(), |n, _| {
                    overlaps[n] * Complex64::from_polar(1.0, -eig.energies()[n] * t)
                });
                (
                    g.clone(),
                    SectorComponent {
                        basis: c.basis.clone(),
                        coefficient: c.coefficient,
                        amplitudes: apply_real(eig.vectors(), &phased),
                    },
                )
            })
            .collect();
        MultiSectorState { entries }
    }

    /// `<H>` from the eigenbasis weights (time independent).
    pub fn spectral_energy(&self) -> f64 {
        self.sectors
            .iter()
            .map(|(_, c, eig, overlaps)| {
                let e: f64 = overlaps.iter().zip(eig.energies()).map(|(z, e)| z.norm_sqr() * e).sum();
                c.coefficient.norm_sqr() * e
            })
            .sum()
    }
}

pub type SectorHamiltonians = BTreeMap<GaugeSector, Arc<SectorHamiltonian>>;

/// `<psi|H|psi>` evaluated with the sector matrices.
pub fn energy(state: &MultiSectorState, hams: &SectorHamiltonians) -> Result<f64> {
    let mut total = 0.0;
    for (g, c) in state.entries() {
        let h = hams.get(g).ok_or_else(|| Error::MissingSector(g.charges().to_vec()))?;
        let m = h.matrix();
        let re = c.amplitudes.map(|z| z.re);
        let im = c.amplitudes.map(|z| z.im);
        let e = re.dot(&(m * &re)) + im.dot(&(m * &im));
        total += c.coefficient.norm_sqr() * e;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub values: Vec<T>,
}

impl<T> Trajectory<T> {
    pub fn new(times: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(times.len(), values.len()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, values })
    }
}

/// `[start, start + step, ...]` up to and including `end` (within rounding).
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| start + step * k as f64).collect()
}

/// `count` evenly spaced points on `[start, end]`, endpoints included.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| start + (end - start) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub const MIN_AVERAGE_SAMPLES: usize = 100;

/// Mean of the samples with `t` inside `[t_min, t_max]`.
pub fn long_time_average(values: &Trajectory<f64>, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let inside: Vec<f64> = values
        .times
        .iter()
        .zip(&values.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, v)| *v)
        .collect();
    if inside.len() < MIN_AVERAGE_SAMPLES {
        return Err(Error::TooFewSamples {
            found: inside.len(),
            needed: MIN_AVERAGE_SAMPLES,
        });
    }
    Ok(neumaier_sum(&inside) / inside.len() as f64)
}

/// Compensated summation.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
