//! Frequency decomposition of off-diagonal subsystem blocks.
//!
//! For a probe `O_A` mapping subsystem sector `g_A` to `g_A'`,
//! `Tr_A[O_A sigma_{g_A,g_A'}(t)] = sum_w z(w) e^{-iwt}` where every pair of
//! eigenstates `(n in g, n' in g')` contributes
//! `<E_gn|rho|E_g'n'><E_g'n'|O_A|E_gn>` at `w = E_gn - E_g'n'`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{EigenDecomposition, MultiSectorState, SectorEigs, DEGENERACY_TOL};
use crate::error::{Error, Result};
use crate::lattice::{SectorBasis, SubsystemSpec};
use crate::rdm::{CMatrix, PartialTrace, ReducedDensityMatrix, SubsystemBasis};

/// Bin width that only merges exactly degenerate gaps.
pub const EXACT_BIN: f64 = 1e-10;
/// Bin width for plotted distributions (units of `w`).
pub const PLOT_BIN: f64 = 0.01;
/// Seed of the random probe.
pub const RANDOM_PROBE_SEED: u64 = 0xC0FFEE;
/// Peaks below this fraction of the tallest coarse bin are ignored.
pub const PEAK_THRESHOLD: f64 = 0.05;

/// `O_A = sum c_{ii'} |g_A', i'><g_A, i|` on subsystem labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeOperator {
    pub bra: Vec<i32>,
    pub ket: Vec<i32>,
    /// `coefficients[(i, i')]`, rows over labels of `bra`, columns over `ket`.
    pub coefficients: CMatrix,
}

impl ProbeOperator {
    fn dims(basis: &SubsystemBasis, bra: &[i32], ket: &[i32]) -> Result<(usize, usize)> {
        let a = basis
            .sector_index(bra)
            .ok_or_else(|| Error::MissingSector(bra.to_vec()))?;
        let b = basis
            .sector_index(ket)
            .ok_or_else(|| Error::MissingSector(ket.to_vec()))?;
        Ok((basis.sectors()[a].len(), basis.sectors()[b].len()))
    }

    pub fn all_ones(basis: &SubsystemBasis, bra: &[i32], ket: &[i32]) -> Result<Self> {
        let (r, c) = Self::dims(basis, bra, ket)?;
        Ok(Self {
            bra: bra.to_vec(),
            ket: ket.to_vec(),
            coefficients: CMatrix::from_element(r, c, Complex64::new(1.0, 0.0)),
        })
    }

    pub fn identity(basis: &SubsystemBasis, bra: &[i32], ket: &[i32]) -> Result<Self> {
        let (r, c) = Self::dims(basis, bra, ket)?;
        Ok(Self {
            bra: bra.to_vec(),
            ket: ket.to_vec(),
            coefficients: CMatrix::identity(r, c),
        })
    }

    /// Entries drawn uniformly from the complex unit disk.
    pub fn random(basis: &SubsystemBasis, bra: &[i32], ket: &[i32], seed: u64) -> Result<Self> {
        let (r, c) = Self::dims(basis, bra, ket)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = CMatrix::from_fn(r, c, |_, _| {
            let radius: f64 = rng.random::<f64>().sqrt();
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(radius, phase)
        });
        Ok(Self {
            bra: bra.to_vec(),
            ket: ket.to_vec(),
            coefficients,
        })
    }

    /// `Tr_A[O_A sigma_{bra,ket}]`.
    pub fn signal(&self, rdm: &ReducedDensityMatrix) -> Result<Complex64> {
        let block = rdm
            .block(&self.bra, &self.ket)
            .ok_or_else(|| Error::MissingSector(self.bra.clone()))?;
        if block.shape() != self.coefficients.shape() {
            return Err(Error::DimensionMismatch(block.nrows(), self.coefficients.nrows()));
        }
        Ok(block.iter().zip(self.coefficients.iter()).map(|(s, c)| s * c).sum())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapDistribution {
    pub bin: f64,
    /// `(w, z(w))` sorted by frequency; `w` is the bin representative.
    pub entries: Vec<(f64, Complex64)>,
}

impl GapDistribution {
    pub fn from_pairs(bin: f64, pairs: impl IntoIterator<Item = (f64, Complex64)>) -> Self {
        let mut bins: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (w, z) in pairs {
            *bins.entry((w / bin).round() as i64).or_default() += z;
        }
        Self {
            bin,
            entries: bins.into_iter().map(|(k, z)| (k as f64 * bin, z)).collect(),
        }
    }

    /// `sum_w z(w) e^{-iwt}`.
    pub fn signal(&self, t: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|(w, z)| z * Complex64::from_polar(1.0, -w * t))
            .sum()
    }

    pub fn zero_frequency(&self) -> Complex64 {
        self.entries
            .iter()
            .find(|(w, _)| w.abs() < 0.5 * self.bin)
            .map(|(_, z)| *z)
            .unwrap_or_default()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(_, z)| z.norm()).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.entries.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max)
    }

    /// Fraction of `sum |z|` within `half_width` of an integer multiple of `spacing`.
    pub fn weight_near_multiples(&self, spacing: f64, half_width: f64) -> f64 {
        let total = self.total_weight();
        if total == 0.0 {
            return 0.0;
        }
        let near: f64 = self
            .entries
            .iter()
            .filter(|(w, _)| (w - (w / spacing).round() * spacing).abs() <= half_width)
            .map(|(_, z)| z.norm())
            .sum();
        near / total
    }
}

fn real_parts(m: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn expand(eig: &EigenDecomposition, psi: &DVector<Complex64>, alpha: Complex64) -> DVector<Complex64> {
    let v = eig.vectors();
    let re = v.tr_mul(&psi.map(|z| z.re));
    let im = v.tr_mul(&psi.map(|z| z.im));
    DVector::from_fn(eig.dim(), |n, _| alpha * Complex64::new(re[n], im[n]))
}

/// Enumerate every eigenpair contribution of the probe's block and bin it.
pub fn gap_distribution(
    eigs: &SectorEigs,
    state: &MultiSectorState,
    sub: &SubsystemSpec,
    probe: &ProbeOperator,
    bin: f64,
) -> Result<GapDistribution> {
    if !(bin > 0.0) {
        return Err(Error::ContractViolation(format!("bin width must be positive, got {bin}")));
    }
    let plan = PartialTrace::new(state, sub)?;
    let ell = sub.ell();
    let bras: Vec<_> = state.entries().iter().filter(|(g, _)| g.restrict(ell) == probe.bra).collect();
    let kets: Vec<_> = state.entries().iter().filter(|(g, _)| g.restrict(ell) == probe.ket).collect();
    if bras.is_empty() || kets.is_empty() {
        return Err(Error::MissingSector(if bras.is_empty() { probe.bra.clone() } else { probe.ket.clone() }));
    }
    let ones = ProbeOperator::all_ones(plan.basis(), &probe.bra, &probe.ket)?;
    if ones.coefficients.shape() != probe.coefficients.shape() {
        return Err(Error::DimensionMismatch(probe.coefficients.nrows(), ones.coefficients.nrows()));
    }
    let mut pairs: Vec<(f64, Complex64)> = Vec::new();
    for (g, cg) in &bras {
        let eg = eigs.get(*g).ok_or_else(|| Error::MissingSector(g.charges().to_vec()))?;
        let (_, places_g) = plan.placements(g).expect("sector in plan");
        let mut by_complement: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for (r, &(i, b)) in places_g.iter().enumerate() {
            by_complement.entry(b).or_default().push((i, r));
        }
        let xg = expand(eg, &cg.amplitudes, cg.coefficient);
        for (gp, cgp) in &kets {
            let egp = eigs.get(*gp).ok_or_else(|| Error::MissingSector(gp.charges().to_vec()))?;
            let (_, places_gp) = plan.placements(gp).expect("sector in plan");
            // (M V_g)[r', n] = sum_{r=(i,b)} c_{i i'} V_g[r, n] for r' = (i', b).
            let vg = eg.vectors();
            let mut mv = DMatrix::<Complex64>::zeros(egp.dim(), eg.dim());
            for (rp, &(ip, b)) in places_gp.iter().enumerate() {
                if let Some(rows) = by_complement.get(&b) {
                    for &(i, r) in rows {
                        let c = probe.coefficients[(i, ip)];
                        if c == Complex64::default() {
                            continue;
                        }
                        for n in 0..eg.dim() {
                            mv[(rp, n)] += c * vg[(r, n)];
                        }
                    }
                }
            }
            let (mre, mim) = real_parts(&mv);
            let ore = egp.vectors().tr_mul(&mre);
            let oim = egp.vectors().tr_mul(&mim);
            let xgp = expand(egp, &cgp.amplitudes, cgp.coefficient);
            pairs.reserve(eg.dim() * egp.dim());
            for n in 0..eg.dim() {
                for np in 0..egp.dim() {
                    let o = Complex64::new(ore[(np, n)], oim[(np, n)]);
                    let v = xg[n] * xgp[np].conj() * o;
                    pairs.push((eg.energies()[n] - egp.energies()[np], v));
                }
            }
        }
    }
    Ok(GapDistribution::from_pairs(bin, pairs))
}

/// Closed-form `z(0) = alpha_bra alpha_ket^* Tr(rho_D O^f)` at `J = 0`, where
/// every sector shares the fermionic eigenbasis `fermionic`. `rho_D` is the
/// dephased state `sum_E P_E |psi><psi| P_E`, which reduces to
/// `sum_n |c_n|^2 |E_n><E_n|` for a nondegenerate spectrum.
#[allow(clippy::too_many_arguments)]
pub fn zero_frequency_diagonal_ensemble(
    coupling: f64,
    fermion_basis: &SectorBasis,
    fermionic: &EigenDecomposition,
    seed: &DVector<Complex64>,
    sub: &SubsystemSpec,
    subsystem: &SubsystemBasis,
    probe: &ProbeOperator,
    alpha_bra: Complex64,
    alpha_ket: Complex64,
) -> Result<Complex64> {
    if coupling != 0.0 {
        return Err(Error::ContractViolation(format!(
            "the diagonal-ensemble form of z(0) needs J = 0, got {coupling}"
        )));
    }
    if seed.len() != fermionic.dim() || fermion_basis.dim() != fermionic.dim() {
        return Err(Error::DimensionMismatch(seed.len(), fermionic.dim()));
    }
    let ell = sub.ell();
    let bra = &subsystem.sectors()[subsystem
        .sector_index(&probe.bra)
        .ok_or_else(|| Error::MissingSector(probe.bra.clone()))?];
    let ket = &subsystem.sectors()[subsystem
        .sector_index(&probe.ket)
        .ok_or_else(|| Error::MissingSector(probe.ket.clone()))?];
    // O^f |i_A, b> = sum_{i'} c_{i i'} |i'_A, b> on fermion configurations.
    let sites = fermion_basis.lattice().sites();
    let mut images: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); fermion_basis.dim()];
    for (r, (fermions, _)) in fermion_basis.states().iter().enumerate() {
        let Some(i) = bra.position(fermions.leading_bits(ell)) else {
            continue;
        };
        let rest = fermions.trailing_bits(ell);
        for (ip, label) in ket.labels.iter().enumerate() {
            let c = probe.coefficients[(i, ip)];
            if c == Complex64::default() {
                continue;
            }
            let bits = (label.occupation << (sites - ell)) | rest;
            let target = crate::lattice::FermionConfig::from_bits(bits, sites);
            if let Some(rp) = fermion_basis.position(&target) {
                images[r].push((rp, c));
            }
        }
    }
    let energies = fermionic.energies();
    let v = fermionic.vectors();
    let mut trace = Complex64::default();
    let mut start = 0;
    while start < energies.len() {
        let mut end = start + 1;
        while end < energies.len()
            && (energies[end] - energies[end - 1]).abs() <= DEGENERACY_TOL * energies[end].abs().max(1.0)
        {
            end += 1;
        }
        let block = v.columns(start, end - start);
        let re = block * block.tr_mul(&seed.map(|z| z.re));
        let im = block * block.tr_mul(&seed.map(|z| z.im));
        let phi: Vec<Complex64> = re.iter().zip(im.iter()).map(|(a, b)| Complex64::new(*a, *b)).collect();
        for (r, image) in images.iter().enumerate() {
            for &(rp, c) in image {
                trace += phi[rp].conj() * c * phi[r];
            }
        }
        start = end;
    }
    Ok(alpha_bra * alpha_ket.conj() * trace)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub center: f64,
    pub weight: f64,
    pub std_dev: f64,
}

/// Coarse-bin `|z(w)|`, locate local maxima above `PEAK_THRESHOLD` of the
/// tallest bin and report the `|z|`-weighted mean and standard deviation
/// over each peak's support (bins descending monotonically from the maximum).
pub fn peak_statistics(dist: &GapDistribution, coarse_bin: f64) -> Vec<Peak> {
    if dist.entries.is_empty() || !(coarse_bin > 0.0) {
        return Vec::new();
    }
    let key = |w: f64| (w / coarse_bin).round() as i64;
    let lo = key(dist.entries[0].0);
    let hi = key(dist.entries[dist.entries.len() - 1].0);
    let len = (hi - lo + 1) as usize;
    let mut hist = vec![0.0; len];
    for (w, z) in &dist.entries {
        hist[(key(*w) - lo) as usize] += z.norm();
    }
    let top = hist.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for k in 0..len {
        let h = hist[k];
        let left = if k > 0 { hist[k - 1] } else { 0.0 };
        let right = if k + 1 < len { hist[k + 1] } else { 0.0 };
        if h < PEAK_THRESHOLD * top || h < left || h <= right {
            continue;
        }
        let mut a = k;
        while a > 0 && hist[a - 1] > 0.0 && hist[a - 1] <= hist[a] {
            a -= 1;
        }
        let mut b = k;
        while b + 1 < len && hist[b + 1] > 0.0 && hist[b + 1] <= hist[b] {
            b += 1;
        }
        let (klo, khi) = (lo + a as i64, lo + b as i64);
        let members: Vec<(f64, f64)> = dist
            .entries
            .iter()
            .filter(|(w, _)| (klo..=khi).contains(&key(*w)))
            .map(|(w, z)| (*w, z.norm()))
            .collect();
        let weight: f64 = members.iter().map(|(_, m)| m).sum();
        let center = members.iter().map(|(w, m)| w * m).sum::<f64>() / weight;
        let var = members.iter().map(|(w, m)| m * (w - center).powi(2)).sum::<f64>() / weight;
        peaks.push(Peak {
            center,
            weight,
            std_dev: var.sqrt(),
        });
    }
    peaks
}
