//! Gauge sectors and Gauss-law constrained bases.
//!
//! Sites are numbered `1..=N`, links `1..=N-1` with link `n` on bond
//! `(n, n+1)`. The boundary links `0` and `N` are classical and carry the
//! fixed values of [`LatticeSpec`]. Inside one gauge sector the Gauss law
//! fixes every link from the fermion occupations, so a sector basis is a
//! list of occupations with their reconstructed links.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported site count (occupations are packed into a `u32`).
pub const MAX_SITES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Kogut-Susskind lattice Schwinger model with unbounded integer links.
    Schwinger,
    /// Spin-1 U(1) quantum link model.
    QuantumLink,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Schwinger => "schwinger",
            ModelKind::QuantumLink => "quantum-link",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "schwinger" => Some(ModelKind::Schwinger),
            "quantum-link" | "quantum_link" | "qlm" | "quantumlink" => Some(ModelKind::QuantumLink),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    sites: usize,
    pub boundary_left: i32,
    pub boundary_right: i32,
}

impl LatticeSpec {
    pub fn new(sites: usize) -> Result<Self> {
        Self::with_boundaries(sites, 0, 0)
    }

    pub fn with_boundaries(sites: usize, boundary_left: i32, boundary_right: i32) -> Result<Self> {
        if sites < 4 || sites % 2 != 0 {
            return Err(Error::InvalidLattice(format!(
                "site count must be even and at least 4, got {sites}"
            )));
        }
        if sites > MAX_SITES {
            return Err(Error::InvalidLattice(format!(
                "site count {sites} exceeds the supported maximum {MAX_SITES}"
            )));
        }
        Ok(Self {
            sites,
            boundary_left,
            boundary_right,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn links(&self) -> usize {
        self.sites - 1
    }
}

/// Integer Gauss-law charges `g_1..g_N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaugeSector {
    charges: Vec<i32>,
}

impl GaugeSector {
    pub fn new(charges: Vec<i32>) -> Self {
        Self { charges }
    }

    pub fn zero(sites: usize) -> Self {
        Self {
            charges: vec![0; sites],
        }
    }

    /// Charges given on the leftmost sites, zeros elsewhere.
    pub fn from_leading(leading: &[i32], sites: usize) -> Result<Self> {
        if leading.len() > sites {
            return Err(Error::DimensionMismatch(leading.len(), sites));
        }
        let mut charges = vec![0; sites];
        charges[..leading.len()].copy_from_slice(leading);
        Ok(Self { charges })
    }

    pub fn charges(&self) -> &[i32] {
        &self.charges
    }

    /// Charge on site `n` (1-based).
    pub fn charge(&self, n: usize) -> i32 {
        self.charges[n - 1]
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    /// Charges on sites `1..=ell`.
    pub fn restrict(&self, ell: usize) -> Vec<i32> {
        self.charges[..ell].to_vec()
    }

    pub fn vanishes_beyond(&self, ell: usize) -> bool {
        self.charges[ell..].iter().all(|&g| g == 0)
    }
}

impl fmt::Display for GaugeSector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, g) in self.charges.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "}}")
    }
}

/// Fermion occupations. Site 1 is the most significant bit, so the numeric
/// order of `bits` is the lexicographic order of the occupation string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FermionConfig {
    bits: u32,
    sites: u8,
}

impl FermionConfig {
    pub fn from_bits(bits: u32, sites: usize) -> Self {
        debug_assert!(sites <= MAX_SITES);
        debug_assert!(sites == 32 || bits >> sites == 0);
        Self {
            bits,
            sites: sites as u8,
        }
    }

    pub fn from_occupations(occ: &[u8]) -> Self {
        let sites = occ.len();
        let bits = occ
            .iter()
            .fold(0u32, |acc, &o| (acc << 1) | u32::from(o != 0));
        Self::from_bits(bits, sites)
    }

    /// `|1010...>`: occupied odd sites.
    pub fn neel(sites: usize) -> Self {
        let occ: Vec<u8> = (1..=sites).map(|n| (n % 2 == 1) as u8).collect();
        Self::from_occupations(&occ)
    }

    pub fn vacuum(sites: usize) -> Self {
        Self::from_bits(0, sites)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn sites(&self) -> usize {
        self.sites as usize
    }

    /// Occupation of site `n` (1-based).
    pub fn occ(&self, n: usize) -> i32 {
        ((self.bits >> (self.sites as usize - n)) & 1) as i32
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Occupied sites strictly left of site `n`.
    pub fn count_before(&self, n: usize) -> usize {
        (1..n).filter(|&k| self.occ(k) == 1).count()
    }

    /// Toggle the occupation of site `n`.
    pub fn flipped(&self, n: usize) -> Self {
        Self {
            bits: self.bits ^ (1 << (self.sites as usize - n)),
            sites: self.sites,
        }
    }

    /// Bits of sites `1..=ell`, site 1 most significant.
    pub fn leading_bits(&self, ell: usize) -> u32 {
        self.bits >> (self.sites as usize - ell)
    }

    /// Bits of sites `ell+1..=N`.
    pub fn trailing_bits(&self, ell: usize) -> u32 {
        let rest = self.sites as usize - ell;
        if rest == 0 {
            0
        } else {
            self.bits & ((1u32 << rest) - 1)
        }
    }
}

impl fmt::Display for FermionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for n in 1..=self.sites() {
            write!(f, "{}", self.occ(n))?;
        }
        write!(f, ">")
    }
}

/// Link values `L_1..L_{N-1}` (for the quantum link model, `S^z` values).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkConfig {
    values: Vec<i32>,
}

impl LinkConfig {
    pub fn new(values: Vec<i32>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    /// Value of link `n` (1-based).
    pub fn value(&self, n: usize) -> i32 {
        self.values[n - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_lengths(lattice: &LatticeSpec, sector: &GaugeSector, fermions: &FermionConfig) -> Result<()> {
    let n = lattice.sites();
    if sector.len() != n {
        return Err(Error::DimensionMismatch(sector.len(), n));
    }
    if fermions.sites() != n {
        return Err(Error::DimensionMismatch(fermions.sites(), n));
    }
    Ok(())
}

fn staggering(n: usize) -> i32 {
    (n % 2 == 1) as i32
}

fn sign(n: usize) -> i32 {
    // (-1)^(n+1)
    if n % 2 == 1 {
        1
    } else {
        -1
    }
}

/// Link value implied on link `n` from link `n-1` by the Gauss law at site `n`.
pub(crate) fn next_link(model: ModelKind, n: usize, previous: i32, charge: i32, occ: i32) -> i32 {
    match model {
        ModelKind::Schwinger => previous + charge + occ - staggering(n),
        ModelKind::QuantumLink => sign(n) * charge - previous - occ,
    }
}

/// Solve the Gauss law left to right from the left boundary value.
pub fn reconstruct_links(
    model: ModelKind,
    lattice: &LatticeSpec,
    sector: &GaugeSector,
    fermions: &FermionConfig,
) -> Result<LinkConfig> {
    check_lengths(lattice, sector, fermions)?;
    let mut values = Vec::with_capacity(lattice.links());
    let mut previous = lattice.boundary_left;
    for n in 1..lattice.sites() {
        let value = next_link(model, n, previous, sector.charge(n), fermions.occ(n));
        if model == ModelKind::QuantumLink && value.abs() > 1 {
            return Err(Error::TruncationViolation { link: n, value });
        }
        values.push(value);
        previous = value;
    }
    Ok(LinkConfig { values })
}

/// Whether the Gauss law at site `N` is met with the fixed right boundary.
pub fn closes_right_boundary(
    model: ModelKind,
    lattice: &LatticeSpec,
    sector: &GaugeSector,
    fermions: &FermionConfig,
    links: &LinkConfig,
) -> bool {
    let n = lattice.sites();
    let last = links.values.last().copied().unwrap_or(lattice.boundary_left);
    next_link(model, n, last, sector.charge(n), fermions.occ(n)) == lattice.boundary_right
}

/// Eigenvalue of `G_n` on the product state `|fermions>|links>`.
pub fn gauss_charge(
    model: ModelKind,
    lattice: &LatticeSpec,
    fermions: &FermionConfig,
    links: &LinkConfig,
    n: usize,
) -> i32 {
    let sites = lattice.sites();
    assert!((1..=sites).contains(&n), "site {n} outside 1..={sites}");
    let link = |k: usize| -> i32 {
        if k == 0 {
            lattice.boundary_left
        } else if k == sites {
            lattice.boundary_right
        } else {
            links.value(k)
        }
    };
    let occ = fermions.occ(n);
    match model {
        ModelKind::Schwinger => link(n) - link(n - 1) - occ + staggering(n),
        ModelKind::QuantumLink => sign(n) * (link(n) + link(n - 1) + occ),
    }
}

/// Ordered basis of one gauge sector.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    model: ModelKind,
    lattice: LatticeSpec,
    sector: GaugeSector,
    states: Vec<(FermionConfig, LinkConfig)>,
    index: HashMap<FermionConfig, usize>,
}

impl SectorBasis {
    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn sector(&self) -> &GaugeSector {
        &self.sector
    }

    pub fn states(&self) -> &[(FermionConfig, LinkConfig)] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn position(&self, fermions: &FermionConfig) -> Option<usize> {
        self.index.get(fermions).copied()
    }

    pub fn fermions(&self, i: usize) -> &FermionConfig {
        &self.states[i].0
    }

    pub fn links(&self, i: usize) -> &LinkConfig {
        &self.states[i].1
    }
}

/// Number of configurations a sector would hold, without storing them.
pub fn sector_dimension(
    model: ModelKind,
    lattice: &LatticeSpec,
    sector: &GaugeSector,
    filling: Option<usize>,
) -> Result<usize> {
    Ok(candidates(model, lattice, sector, filling)?.count())
}

fn candidates<'a>(
    model: ModelKind,
    lattice: &'a LatticeSpec,
    sector: &'a GaugeSector,
    filling: Option<usize>,
) -> Result<impl Iterator<Item = (FermionConfig, LinkConfig)> + 'a> {
    let sites = lattice.sites();
    if sector.len() != sites {
        return Err(Error::DimensionMismatch(sector.len(), sites));
    }
    if let Some(f) = filling {
        if f > sites {
            return Err(Error::InvalidLattice(format!("filling {f} exceeds {sites} sites")));
        }
    }
    Ok((0u32..(1u32 << sites)).filter_map(move |bits| {
        if let Some(f) = filling {
            if bits.count_ones() as usize != f {
                return None;
            }
        }
        let fermions = FermionConfig::from_bits(bits, sites);
        let links = reconstruct_links(model, lattice, sector, &fermions).ok()?;
        closes_right_boundary(model, lattice, sector, &fermions, &links).then_some((fermions, links))
    }))
}

/// All occupations of a sector (optionally at fixed filling) whose Gauss-law
/// reconstruction succeeds and closes on the right boundary, in
/// lexicographic order.
pub fn enumerate_sector_basis(
    model: ModelKind,
    lattice: &LatticeSpec,
    sector: &GaugeSector,
    filling: Option<usize>,
) -> Result<SectorBasis> {
    let states: Vec<_> = candidates(model, lattice, sector, filling)?.collect();
    let index = states
        .iter()
        .enumerate()
        .map(|(i, (f, _))| (*f, i))
        .collect();
    Ok(SectorBasis {
        model,
        lattice: *lattice,
        sector: sector.clone(),
        states,
        index,
    })
}

/// Default fermion-number restriction: half filling for the Schwinger model,
/// none for the quantum link model (its pair term changes fermion number).
pub fn default_filling(model: ModelKind, lattice: &LatticeSpec) -> Option<usize> {
    match model {
        ModelKind::Schwinger => Some(lattice.sites() / 2),
        ModelKind::QuantumLink => None,
    }
}

/// Subsystem `A`: sites `1..=ell` and links `1..=ell`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemSpec {
    ell: usize,
}

impl SubsystemSpec {
    pub fn new(ell: usize, lattice: &LatticeSpec) -> Result<Self> {
        if ell < 1 || ell + 2 > lattice.sites() {
            return Err(Error::InvalidSubsystem {
                ell,
                sites: lattice.sites(),
            });
        }
        Ok(Self { ell })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(n: usize) -> LatticeSpec {
        LatticeSpec::new(n).unwrap()
    }

    #[test]
    fn neel_vacuum_has_no_flux() {
        let l = lat(4);
        let links = reconstruct_links(
            ModelKind::Schwinger,
            &l,
            &GaugeSector::zero(4),
            &FermionConfig::neel(4),
        )
        .unwrap();
        assert_eq!(links.values(), &[0, 0, 0]);
    }

    #[test]
    fn charged_sector_links() {
        let l = lat(4);
        let g = GaugeSector::new(vec![1, -1, 0, 0]);
        let links = reconstruct_links(ModelKind::Schwinger, &l, &g, &FermionConfig::neel(4)).unwrap();
        assert_eq!(links.values(), &[1, 0, 0]);
    }

    #[test]
    fn qlm_truncation_violation() {
        let l = lat(4);
        let g = GaugeSector::new(vec![2, 0, 0, 0]);
        let err = reconstruct_links(ModelKind::QuantumLink, &l, &g, &FermionConfig::vacuum(4)).unwrap_err();
        assert!(matches!(err, Error::TruncationViolation { link: 1, value: 2 }));
    }

    #[test]
    fn gauss_charge_examples() {
        let l = lat(4);
        let neel = FermionConfig::neel(4);
        let zero = LinkConfig::new(vec![0, 0, 0]);
        for n in 1..=4 {
            assert_eq!(gauss_charge(ModelKind::Schwinger, &l, &neel, &zero, n), 0);
        }
        let flux = LinkConfig::new(vec![1, 0, 0]);
        assert_eq!(gauss_charge(ModelKind::Schwinger, &l, &neel, &flux, 1), 1);
        assert_eq!(gauss_charge(ModelKind::Schwinger, &l, &neel, &flux, 2), -1);
        let vac = FermionConfig::vacuum(4);
        assert_eq!(gauss_charge(ModelKind::QuantumLink, &l, &vac, &flux, 1), 1);
    }

    #[test]
    fn schwinger_half_filling_is_binomial() {
        let l = lat(4);
        let b = enumerate_sector_basis(ModelKind::Schwinger, &l, &GaugeSector::zero(4), Some(2)).unwrap();
        assert_eq!(b.dim(), 6);
        let bits: Vec<u32> = b.states().iter().map(|(f, _)| f.bits()).collect();
        let mut sorted = bits.clone();
        sorted.sort();
        assert_eq!(bits, sorted);
    }

    #[test]
    fn schwinger_sectors_share_occupations() {
        let l = lat(8);
        let a = enumerate_sector_basis(ModelKind::Schwinger, &l, &GaugeSector::zero(8), Some(4)).unwrap();
        let g = GaugeSector::from_leading(&[1, -1], 8).unwrap();
        let b = enumerate_sector_basis(ModelKind::Schwinger, &l, &g, Some(4)).unwrap();
        assert_eq!(a.dim(), b.dim());
        for (x, y) in a.states().iter().zip(b.states()) {
            assert_eq!(x.0, y.0);
        }
    }

    #[test]
    fn empty_basis_is_valid() {
        let l = lat(4);
        let g = GaugeSector::new(vec![3, 0, 0, 0]);
        let b = enumerate_sector_basis(ModelKind::QuantumLink, &l, &g, None).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn subsystem_bounds() {
        let l = lat(6);
        assert!(SubsystemSpec::new(0, &l).is_err());
        assert!(SubsystemSpec::new(4, &l).is_ok());
        assert!(SubsystemSpec::new(5, &l).is_err());
    }

    #[test]
    fn lattice_validation() {
        assert!(LatticeSpec::new(3).is_err());
        assert!(LatticeSpec::new(5).is_err());
        assert!(LatticeSpec::new(2).is_err());
        assert!(LatticeSpec::new(32).is_err());
    }

    #[test]
    fn bit_helpers() {
        let f = FermionConfig::from_occupations(&[1, 0, 1, 1, 0, 0]);
        assert_eq!(f.leading_bits(2), 0b10);
        assert_eq!(f.trailing_bits(2), 0b1100);
        assert_eq!(f.count_before(4), 2);
        assert_eq!(f.flipped(2).occ(2), 1);
        assert_eq!(f.to_string(), "|101100>");
    }
}
