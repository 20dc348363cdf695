//! Block-structured reduced density matrix of the left subsystem.
//!
//! A subsystem label is the occupation of sites `1..=ell` together with the
//! links `1..=ell`. The traced-out label keeps both the remaining occupations
//! and the remaining links, so two sectors only interfere where their
//! complements agree link for link.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::MultiSectorState;
use crate::error::{Error, Result};
use crate::lattice::{next_link, GaugeSector, ModelKind, SubsystemSpec};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsystemLabel {
    /// Occupations of sites `1..=ell`, site 1 most significant.
    pub occupation: u32,
    /// Values of links `1..=ell`.
    pub links: Vec<i32>,
}

/// Labels of one subsystem charge pattern `g_A`, ordered by occupation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorLabels {
    pub charges: Vec<i32>,
    pub labels: Vec<SubsystemLabel>,
    lookup: Vec<Option<usize>>,
}

impl SectorLabels {
    /// Every occupation of `A` whose links, solved from the left boundary,
    /// stay inside the model's link range.
    pub fn enumerate(model: ModelKind, ell: usize, boundary_left: i32, charges: &[i32]) -> Self {
        assert_eq!(charges.len(), ell, "charge pattern must cover the subsystem");
        let mut labels = Vec::new();
        let mut lookup = vec![None; 1 << ell];
        'outer: for occupation in 0u32..(1 << ell) {
            let mut links = Vec::with_capacity(ell);
            let mut previous = boundary_left;
            for n in 1..=ell {
                let occ = ((occupation >> (ell - n)) & 1) as i32;
                let value = next_link(model, n, previous, charges[n - 1], occ);
                if model == ModelKind::QuantumLink && value.abs() > 1 {
                    continue 'outer;
                }
                links.push(value);
                previous = value;
            }
            lookup[occupation as usize] = Some(labels.len());
            labels.push(SubsystemLabel { occupation, links });
        }
        Self {
            charges: charges.to_vec(),
            labels,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, occupation: u32) -> Option<usize> {
        self.lookup.get(occupation as usize).copied().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemBasis {
    pub model: ModelKind,
    pub ell: usize,
    pub boundary_left: i32,
    sectors: Vec<SectorLabels>,
}

impl SubsystemBasis {
    /// Basis spanned by the given subsystem charge patterns (sorted, deduplicated).
    pub fn new(model: ModelKind, ell: usize, boundary_left: i32, patterns: impl IntoIterator<Item = Vec<i32>>) -> Self {
        let set: BTreeSet<Vec<i32>> = patterns.into_iter().collect();
        let sectors = set
            .into_iter()
            .map(|g| SectorLabels::enumerate(model, ell, boundary_left, &g))
            .collect();
        Self {
            model,
            ell,
            boundary_left,
            sectors,
        }
    }

    pub fn sectors(&self) -> &[SectorLabels] {
        &self.sectors
    }

    pub fn sector_index(&self, charges: &[i32]) -> Option<usize> {
        self.sectors.iter().position(|s| s.charges == charges)
    }

    pub fn dim(&self) -> usize {
        self.sectors.iter().map(SectorLabels::len).sum()
    }

    /// Offset of each sector in the dense ordering.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.sectors
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.len();
                o
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix {
    basis: SubsystemBasis,
    blocks: BTreeMap<(usize, usize), CMatrix>,
}

impl ReducedDensityMatrix {
    pub fn from_blocks(basis: SubsystemBasis, blocks: BTreeMap<(usize, usize), CMatrix>) -> Result<Self> {
        for (&(a, b), m) in &blocks {
            let (ra, rb) = match (basis.sectors.get(a), basis.sectors.get(b)) {
                (Some(x), Some(y)) => (x.len(), y.len()),
                _ => return Err(Error::DimensionMismatch(a.max(b), basis.sectors.len())),
            };
            if m.shape() != (ra, rb) {
                return Err(Error::DimensionMismatch(m.nrows(), ra));
            }
        }
        Ok(Self { basis, blocks })
    }

    /// Split a dense matrix on `basis` into all of its blocks.
    pub fn from_dense(basis: SubsystemBasis, dense: &CMatrix) -> Result<Self> {
        let dim = basis.dim();
        if dense.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(dense.nrows(), dim));
        }
        let offsets = basis.offsets();
        let mut blocks = BTreeMap::new();
        for (a, sa) in basis.sectors.iter().enumerate() {
            for (b, sb) in basis.sectors.iter().enumerate() {
                let m = dense.view((offsets[a], offsets[b]), (sa.len(), sb.len())).into_owned();
                blocks.insert((a, b), m);
            }
        }
        Ok(Self { basis, blocks })
    }

    pub fn basis(&self) -> &SubsystemBasis {
        &self.basis
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), CMatrix> {
        &self.blocks
    }

    /// Block `(g_A, g_A')` by charge patterns.
    pub fn block(&self, bra: &[i32], ket: &[i32]) -> Option<&CMatrix> {
        let a = self.basis.sector_index(bra)?;
        let b = self.basis.sector_index(ket)?;
        self.blocks.get(&(a, b))
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = self.basis.dim();
        let offsets = self.basis.offsets();
        let mut out = CMatrix::zeros(dim, dim);
        for (&(a, b), m) in &self.blocks {
            out.view_mut((offsets[a], offsets[b]), m.shape()).copy_from(m);
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks
            .iter()
            .filter(|((a, b), _)| a == b)
            .map(|(_, m)| m.trace())
            .sum()
    }

    /// `Tr rho^2` (Frobenius norm squared of the Hermitian matrix).
    pub fn purity(&self) -> f64 {
        self.blocks.values().map(|m| m.norm_squared()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.adjoint()).map(|z| z.norm()).max()
    }

    /// Smallest eigenvalue of the dense matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.to_dense();
        if d.nrows() == 0 {
            return 0.0;
        }
        hermitian_eigenvalues(&d).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Sector index pairs whose block has any entry above `tol`.
    pub fn support(&self, tol: f64) -> BTreeSet<(usize, usize)> {
        self.blocks
            .iter()
            .filter(|(_, m)| m.iter().any(|z| z.norm() > tol))
            .map(|(k, _)| *k)
            .collect()
    }
}

/// Eigenvalues of a Hermitian matrix (Hermitian part taken first).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()).scale(0.5);
    nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Precomputed placement of every basis state of every sector into
/// (subsystem label, complement label) pairs.
#[derive(Clone, Debug)]
pub struct PartialTrace {
    basis: SubsystemBasis,
    /// Per full sector: subsystem sector index and `(label, complement)` per basis state.
    layout: BTreeMap<GaugeSector, (usize, Vec<(usize, usize)>)>,
    complements: usize,
}

impl PartialTrace {
    pub fn new(state: &MultiSectorState, sub: &SubsystemSpec) -> Result<Self> {
        let ell = sub.ell();
        let Some(model) = state.model() else {
            return Err(Error::InvalidInitialState("state has no sectors".into()));
        };
        let first = state.entries().values().next().expect("nonempty");
        let lattice = *first.basis.lattice();
        if ell < 1 || ell + 2 > lattice.sites() {
            return Err(Error::InvalidSubsystem {
                ell,
                sites: lattice.sites(),
            });
        }
        let basis = SubsystemBasis::new(
            model,
            ell,
            lattice.boundary_left,
            state.sectors().map(|g| g.restrict(ell)),
        );
        let mut interned: HashMap<(u32, Vec<i32>), usize> = HashMap::new();
        let mut layout = BTreeMap::new();
        for (g, c) in state.entries() {
            if c.basis.model() != model {
                return Err(Error::ModelMismatch {
                    expected: model,
                    found: c.basis.model(),
                });
            }
            if *c.basis.lattice() != lattice {
                return Err(Error::InvalidInitialState("sectors on different lattices".into()));
            }
            let s = basis.sector_index(&g.restrict(ell)).expect("pattern registered");
            let labels = &basis.sectors[s];
            let mut places = Vec::with_capacity(c.basis.dim());
            for (fermions, links) in c.basis.states() {
                let position = labels
                    .position(fermions.leading_bits(ell))
                    .expect("basis state has a valid subsystem label");
                debug_assert_eq!(&labels.labels[position].links[..], &links.values()[..ell]);
                let key = (fermions.trailing_bits(ell), links.values()[ell..].to_vec());
                let next = interned.len();
                let id = *interned.entry(key).or_insert(next);
                places.push((position, id));
            }
            layout.insert(g.clone(), (s, places));
        }
        Ok(Self {
            basis,
            layout,
            complements: interned.len(),
        })
    }

    pub fn basis(&self) -> &SubsystemBasis {
        &self.basis
    }

    /// Subsystem sector index and `(label, complement)` per basis state of `g`.
    pub fn placements(&self, g: &GaugeSector) -> Option<&(usize, Vec<(usize, usize)>)> {
        self.layout.get(g)
    }

    /// Number of distinct complement labels.
    pub fn complements(&self) -> usize {
        self.complements
    }

    pub fn reduce(&self, state: &MultiSectorState) -> Result<ReducedDensityMatrix> {
        let mut amplitudes: Vec<(usize, CMatrix)> = Vec::with_capacity(self.layout.len());
        for (g, c) in state.entries() {
            let (s, places) = self
                .layout
                .get(g)
                .ok_or_else(|| Error::MissingSector(g.charges().to_vec()))?;
            if places.len() != c.amplitudes.len() {
                return Err(Error::DimensionMismatch(places.len(), c.amplitudes.len()));
            }
            let mut phi = CMatrix::zeros(self.basis.sectors[*s].len(), self.complements);
            for (&(a, b), psi) in places.iter().zip(c.amplitudes.iter()) {
                phi[(a, b)] += c.coefficient * psi;
            }
            amplitudes.push((*s, phi));
        }
        let n = self.basis.sectors.len();
        let mut blocks = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                let m = CMatrix::zeros(self.basis.sectors[a].len(), self.basis.sectors[b].len());
                blocks.insert((a, b), m);
            }
        }
        for (sa, pa) in &amplitudes {
            for (sb, pb) in &amplitudes {
                let block = blocks.get_mut(&(*sa, *sb)).expect("allocated");
                *block += pa * pb.adjoint();
            }
        }
        Ok(ReducedDensityMatrix {
            basis: self.basis.clone(),
            blocks,
        })
    }
}

/// `Tr_{A-bar} |psi><psi|` for a multi-sector state.
pub fn reduce(state: &MultiSectorState, sub: &SubsystemSpec) -> Result<ReducedDensityMatrix> {
    PartialTrace::new(state, sub)?.reduce(state)
}

/// Keep only the diagonal blocks.
pub fn symmetric_projection(rdm: &ReducedDensityMatrix) -> ReducedDensityMatrix {
    let blocks = rdm
        .blocks
        .iter()
        .filter(|((a, b), _)| a == b)
        .map(|(k, m)| (*k, m.clone()))
        .collect();
    ReducedDensityMatrix {
        basis: rdm.basis.clone(),
        blocks,
    }
}

/// Largest Frobenius norm of any block touching a sector outside `declared`.
pub fn block_leakage(rdm: &ReducedDensityMatrix, declared: &BTreeSet<Vec<i32>>) -> f64 {
    let inside = |k: usize| declared.contains(&rdm.basis.sectors[k].charges);
    rdm.blocks
        .iter()
        .filter(|((a, b), _)| !(inside(*a) && inside(*b)))
        .map(|(_, m)| m.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::dynamics::{build_initial_state, InitialStateSpec, SectorBases};
    use crate::lattice::{default_filling, enumerate_sector_basis, FermionConfig, LatticeSpec};

    fn state(model: ModelKind, n: usize, ell: usize, sectors: &[Vec<i32>]) -> MultiSectorState {
        let l = LatticeSpec::new(n).unwrap();
        let mut bases = SectorBases::new();
        for s in sectors {
            let g = GaugeSector::from_leading(s, n).unwrap();
            bases.insert(
                g.clone(),
                Arc::new(enumerate_sector_basis(model, &l, &g, default_filling(model, &l)).unwrap()),
            );
        }
        build_initial_state(&InitialStateSpec::equal(model, n, ell, sectors), &bases).unwrap()
    }

    #[test]
    fn equal_two_sector_initial_rdm() {
        for q in 1..=3 {
            let s = state(ModelKind::Schwinger, 8, 2, &[vec![0, 0], vec![q, -q]]);
            let rdm = reduce(&s, &SubsystemSpec::new(2, &LatticeSpec::new(8).unwrap()).unwrap()).unwrap();
            assert_eq!(rdm.basis().sectors().len(), 2);
            let neel = FermionConfig::neel(8).leading_bits(2);
            for ((a, b), m) in rdm.blocks() {
                let i = rdm.basis().sectors()[*a].position(neel).unwrap();
                let j = rdm.basis().sectors()[*b].position(neel).unwrap();
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        let expected = if (r, c) == (i, j) { 0.5 } else { 0.0 };
                        assert!((m[(r, c)] - Complex64::new(expected, 0.0)).norm() < 1e-14);
                    }
                }
            }
            assert!((rdm.trace().re - 1.0).abs() < 1e-14);
            assert!((rdm.purity() - 1.0).abs() < 1e-14);
            let sym = symmetric_projection(&rdm);
            assert_eq!(sym.blocks().len(), 2);
            assert!((sym.trace() - rdm.trace()).norm() < 1e-15);
            assert!((sym.purity() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn single_sector_has_one_block() {
        let s = state(ModelKind::QuantumLink, 6, 2, &[vec![1, -1]]);
        let rdm = reduce(&s, &SubsystemSpec::new(2, &LatticeSpec::new(6).unwrap()).unwrap()).unwrap();
        assert_eq!(rdm.blocks().len(), 1);
        assert!((rdm.trace().re - 1.0).abs() < 1e-14);
        let sym = symmetric_projection(&rdm);
        assert_eq!(sym.to_dense(), rdm.to_dense());
    }

    #[test]
    fn leakage_is_zero_on_declared_blocks() {
        let s = state(ModelKind::Schwinger, 6, 2, &[vec![0, 0], vec![1, -1]]);
        let rdm = reduce(&s, &SubsystemSpec::new(2, &LatticeSpec::new(6).unwrap()).unwrap()).unwrap();
        let declared: BTreeSet<Vec<i32>> = [vec![0, 0], vec![1, -1]].into_iter().collect();
        assert_eq!(block_leakage(&rdm, &declared), 0.0);
        let partial: BTreeSet<Vec<i32>> = [vec![0, 0]].into_iter().collect();
        assert!(block_leakage(&rdm, &partial) > 0.1);
    }

    #[test]
    fn qlm_labels_respect_truncation() {
        let labels = SectorLabels::enumerate(ModelKind::QuantumLink, 2, 0, &[1, -1]);
        // S1 = 1 - occ1, S2 = 1 - S1 - occ2
        for l in &labels.labels {
            assert!(l.links.iter().all(|s| s.abs() <= 1));
        }
        assert_eq!(labels.len(), 4);
        let labels = SectorLabels::enumerate(ModelKind::QuantumLink, 2, 0, &[1, 1]);
        assert!(labels.len() < 4);
    }

    #[test]
    fn too_large_subsystem_is_rejected() {
        assert!(SubsystemSpec::new(7, &LatticeSpec::new(8).unwrap()).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let s = state(ModelKind::Schwinger, 6, 2, &[vec![0, 0], vec![1, -1], vec![2, -2]]);
        let rdm = reduce(&s, &SubsystemSpec::new(2, &LatticeSpec::new(6).unwrap()).unwrap()).unwrap();
        let again = ReducedDensityMatrix::from_dense(rdm.basis().clone(), &rdm.to_dense()).unwrap();
        assert_eq!(again.to_dense(), rdm.to_dense());
        assert!(rdm.min_eigenvalue() > -1e-12);
    }
}
