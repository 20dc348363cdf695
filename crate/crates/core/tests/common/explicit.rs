//! Explicit-link reference model: product states carry every link value, the
//! Hamiltonian acts with link raising/lowering operators and Jordan-Wigner
//! fermions, and nothing knows about gauge sectors.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use gauge_qme::lattice::{FermionConfig, ModelKind};
use gauge_qme::rdm::{CMatrix, SubsystemBasis};
use gauge_qme::SectorBasis;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Product {
    /// `occ[k]` is site `k + 1`.
    pub occ: Vec<u8>,
    /// `links[k]` is link `k + 1` (between sites `k + 1` and `k + 2`).
    pub links: Vec<i32>,
}

impl Product {
    pub fn from_basis(basis: &SectorBasis, i: usize) -> Self {
        let f = basis.fermions(i);
        Self {
            occ: (1..=f.sites()).map(|n| f.occ(n) as u8).collect(),
            links: basis.links(i).values().to_vec(),
        }
    }

    pub fn fermions(&self) -> FermionConfig {
        FermionConfig::from_occupations(&self.occ)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Explicit {
    pub model: ModelKind,
    pub sites: usize,
    pub w: f64,
    pub m: f64,
    pub j: f64,
    pub theta: f64,
    /// Schwinger links are kept within `|L| <= link_cap`.
    pub link_cap: i32,
}

/// `c_k` on a Jordan-Wigner ordered occupation vector (0-based site `k`).
fn annihilate(occ: &mut [u8], k: usize) -> Option<f64> {
    if occ[k] == 0 {
        return None;
    }
    let before: u32 = occ[..k].iter().map(|&o| o as u32).sum();
    occ[k] = 0;
    Some(if before % 2 == 0 { 1.0 } else { -1.0 })
}

fn create(occ: &mut [u8], k: usize) -> Option<f64> {
    if occ[k] == 1 {
        return None;
    }
    let before: u32 = occ[..k].iter().map(|&o| o as u32).sum();
    occ[k] = 1;
    Some(if before % 2 == 0 { 1.0 } else { -1.0 })
}

/// `<s+1|S^+|s>` for spin 1, from `S^+ = sqrt(s(s+1) - m(m+1))`.
fn spin_raise(m: i32) -> Option<f64> {
    let v = 2.0 - f64::from(m) * f64::from(m + 1);
    (m < 1 && m >= -1).then(|| v.sqrt())
}

impl Explicit {
    pub fn new(model: ModelKind, sites: usize, w: f64, m: f64, j: f64, theta: f64) -> Self {
        Self {
            model,
            sites,
            w,
            m,
            j,
            theta,
            link_cap: 3,
        }
    }

    pub fn diagonal(&self, p: &Product) -> f64 {
        let bg = self.theta / (2.0 * std::f64::consts::PI);
        match self.model {
            ModelKind::Schwinger => {
                let mut e = 0.0;
                for (k, &o) in p.occ.iter().enumerate() {
                    let n = k + 1;
                    e += self.m * if n % 2 == 0 { 1.0 } else { -1.0 } * f64::from(o);
                }
                for &l in &p.links {
                    e += self.j * (f64::from(l) + bg).powi(2);
                }
                e
            }
            ModelKind::QuantumLink => {
                let mut e = self.m * p.occ.iter().map(|&o| f64::from(o)).sum::<f64>();
                for (k, &s) in p.links.iter().enumerate() {
                    let n = k + 1;
                    let sz = if n % 2 == 1 { f64::from(s) } else { -f64::from(s) };
                    e += self.j * (sz + bg).powi(2);
                }
                e
            }
        }
    }

    /// Off-diagonal action `H|p> = sum amp |q>` (without the diagonal part).
    /// The second value reports whether a Schwinger link hit the cap.
    pub fn hop(&self, p: &Product) -> (Vec<(Product, f64)>, bool) {
        let mut out = Vec::new();
        let mut capped = false;
        for k in 0..self.sites - 1 {
            match self.model {
                ModelKind::Schwinger => {
                    // -w c_k^+ U_k c_{k+1}
                    let mut q = p.clone();
                    if let Some(s1) = annihilate(&mut q.occ, k + 1) {
                        if let Some(s2) = create(&mut q.occ, k) {
                            q.links[k] += 1;
                            if q.links[k].abs() > self.link_cap {
                                capped = true;
                            } else {
                                out.push((q, -self.w * s1 * s2));
                            }
                        }
                    }
                    // -w c_{k+1}^+ U_k^+ c_k
                    let mut q = p.clone();
                    if let Some(s1) = annihilate(&mut q.occ, k) {
                        if let Some(s2) = create(&mut q.occ, k + 1) {
                            q.links[k] -= 1;
                            if q.links[k].abs() > self.link_cap {
                                capped = true;
                            } else {
                                out.push((q, -self.w * s1 * s2));
                            }
                        }
                    }
                }
                ModelKind::QuantumLink => {
                    // -w c_k S^+_k c_{k+1}
                    let mut q = p.clone();
                    if let Some(s1) = annihilate(&mut q.occ, k + 1) {
                        if let Some(s2) = annihilate(&mut q.occ, k) {
                            if let Some(r) = spin_raise(q.links[k]) {
                                q.links[k] += 1;
                                out.push((q, -self.w * s1 * s2 * r));
                            }
                        }
                    }
                    // -w c_{k+1}^+ S^-_k c_k^+
                    let mut q = p.clone();
                    if let Some(s1) = create(&mut q.occ, k) {
                        if let Some(s2) = create(&mut q.occ, k + 1) {
                            if q.links[k] > -1 {
                                let r = spin_raise(q.links[k] - 1).expect("lowering from -1 excluded");
                                q.links[k] -= 1;
                                out.push((q, -self.w * s1 * s2 * r));
                            }
                        }
                    }
                }
            }
        }
        (out, capped)
    }

    /// `G_n` (1-based) with zero boundary links.
    pub fn gauss(&self, p: &Product, n: usize) -> i32 {
        let link = |k: usize| if k == 0 || k == self.sites { 0 } else { p.links[k - 1] };
        let occ = i32::from(p.occ[n - 1]);
        match self.model {
            ModelKind::Schwinger => link(n) - link(n - 1) - occ + i32::from(n % 2 == 1),
            ModelKind::QuantumLink => {
                let s = if n % 2 == 1 { 1 } else { -1 };
                s * (link(n) + link(n - 1) + occ)
            }
        }
    }

    /// Every product state reachable from the seeds; panics if the link cap is hit.
    pub fn closure(&self, seeds: &[Product]) -> Vec<Product> {
        let mut seen: BTreeSet<Product> = seeds.iter().cloned().collect();
        let mut queue: VecDeque<Product> = seeds.iter().cloned().collect();
        while let Some(p) = queue.pop_front() {
            let (next, capped) = self.hop(&p);
            assert!(!capped, "link cap reached; raise link_cap");
            for (q, _) in next {
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Dense matrix on `states`; transitions leaving the list are dropped.
    pub fn dense(&self, states: &[Product]) -> DMatrix<f64> {
        let index: BTreeMap<&Product, usize> = states.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut h = DMatrix::zeros(states.len(), states.len());
        for (i, p) in states.iter().enumerate() {
            h[(i, i)] += self.diagonal(p);
            for (q, a) in self.hop(p).0 {
                if let Some(&j) = index.get(&q) {
                    h[(j, i)] += a;
                }
            }
        }
        h
    }

    /// All products with every link in the model's range (Schwinger: `|L| <= cap`).
    pub fn full_space(&self, cap: i32) -> Vec<Product> {
        let range: Vec<i32> = match self.model {
            ModelKind::Schwinger => (-cap..=cap).collect(),
            ModelKind::QuantumLink => vec![-1, 0, 1],
        };
        let mut out = Vec::new();
        let links = self.sites - 1;
        let total = range.len().pow(links as u32);
        for bits in 0u32..(1u32 << self.sites) {
            let occ: Vec<u8> = (0..self.sites).map(|k| ((bits >> (self.sites - 1 - k)) & 1) as u8).collect();
            for code in 0..total {
                let mut c = code;
                let mut l = Vec::with_capacity(links);
                for _ in 0..links {
                    l.push(range[c % range.len()]);
                    c /= range.len();
                }
                out.push(Product {
                    occ: occ.clone(),
                    links: l,
                });
            }
        }
        out
    }
}

/// `Tr_{A-bar} |psi><psi|` over explicit products, keyed by the subsystem
/// label `(occupations of 1..=ell, links 1..=ell)`.
pub fn brute_force_rdm(states: &[Product], psi: &[Complex64], ell: usize) -> BTreeMap<((Vec<u8>, Vec<i32>), (Vec<u8>, Vec<i32>)), Complex64> {
    let mut by_complement: BTreeMap<(Vec<u8>, Vec<i32>), Vec<((Vec<u8>, Vec<i32>), Complex64)>> = BTreeMap::new();
    for (p, &a) in states.iter().zip(psi) {
        let label = (p.occ[..ell].to_vec(), p.links[..ell].to_vec());
        let rest = (p.occ[ell..].to_vec(), p.links[ell..].to_vec());
        by_complement.entry(rest).or_default().push((label, a));
    }
    let mut rho = BTreeMap::new();
    for group in by_complement.values() {
        for (la, a) in group {
            for (lb, b) in group {
                *rho.entry((la.clone(), lb.clone())).or_insert(Complex64::default()) += a * b.conj();
            }
        }
    }
    rho
}

/// Dense index of every label in the library's subsystem basis.
pub fn label_index(basis: &SubsystemBasis) -> BTreeMap<(Vec<u8>, Vec<i32>), usize> {
    let offsets = basis.offsets();
    let mut out = BTreeMap::new();
    for (s, sector) in basis.sectors().iter().enumerate() {
        for (i, l) in sector.labels.iter().enumerate() {
            let occ: Vec<u8> = (0..basis.ell).map(|k| ((l.occupation >> (basis.ell - 1 - k)) & 1) as u8).collect();
            out.insert((occ, l.links.clone()), offsets[s] + i);
        }
    }
    out
}

/// Embed a brute-force RDM into the library's dense layout; panics on labels
/// the library does not know.
pub fn embed(rho: &BTreeMap<((Vec<u8>, Vec<i32>), (Vec<u8>, Vec<i32>)), Complex64>, basis: &SubsystemBasis) -> CMatrix {
    let index = label_index(basis);
    let mut out = CMatrix::zeros(basis.dim(), basis.dim());
    for ((a, b), z) in rho {
        if z.norm() == 0.0 {
            continue;
        }
        let i = *index.get(a).unwrap_or_else(|| panic!("unknown label {a:?}"));
        let j = *index.get(b).unwrap_or_else(|| panic!("unknown label {b:?}"));
        out[(i, j)] = *z;
    }
    out
}
