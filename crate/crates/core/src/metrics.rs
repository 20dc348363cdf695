//! Symmetry-breaking diagnostics on reduced density matrices.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::lattice::ModelKind;
use crate::rdm::{hermitian_eigenvalues, symmetric_projection, CMatrix, ReducedDensityMatrix, SubsystemLabel};

/// Base of every logarithm reported (natural log).
pub const LOG_BASE: f64 = std::f64::consts::E;

/// Eigenvalues below this are treated as exact zeros in entropies.
pub const EIGENVALUE_CLIP: f64 = 1e-10;

/// Eigenvalues below `-NEGATIVITY_TOL` make a density matrix invalid.
pub const NEGATIVITY_TOL: f64 = 1e-8;

fn log(x: f64) -> f64 {
    x.ln() / LOG_BASE.ln()
}

/// `-Tr rho log rho`.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let eigenvalues = hermitian_eigenvalues(rho);
    let mut s = 0.0;
    for l in eigenvalues {
        if l < -NEGATIVITY_TOL {
            return Err(Error::InvalidState(l));
        }
        let l = l.min(1.0);
        if l > EIGENVALUE_CLIP {
            s -= l * log(l);
        }
    }
    Ok(s)
}

/// `S[rho_{A,G}] - S[rho_A]`.
pub fn entanglement_asymmetry(rdm: &ReducedDensityMatrix) -> Result<f64> {
    let full = von_neumann_entropy(&rdm.to_dense())?;
    let sym = symmetric_projection(rdm);
    // Block-diagonal: entropies add over blocks.
    let mut projected = 0.0;
    for m in sym.blocks().values() {
        projected += von_neumann_entropy(m)?;
    }
    Ok(projected - full)
}

/// `S2[rho_{A,G}] - S2[rho_A]` with `S2 = -log Tr rho^2`.
pub fn renyi2_asymmetry(rdm: &ReducedDensityMatrix) -> f64 {
    let sym = symmetric_projection(rdm);
    -log(sym.purity()) + log(rdm.purity())
}

/// `1/2 || rho_A - rho_{A,G} ||_1`.
pub fn trace_distance(rdm: &ReducedDensityMatrix) -> f64 {
    let offsets = rdm.basis().offsets();
    let dim = rdm.basis().dim();
    let mut diff = CMatrix::zeros(dim, dim);
    for (&(a, b), m) in rdm.blocks() {
        if a != b {
            diff.view_mut((offsets[a], offsets[b]), m.shape()).copy_from(m);
        }
    }
    0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>()
}

/// `O = sum_{i in A} [S^x_i + ((S^x_i)^2 - (S^y_i)^2)/sqrt 2]` on the spin-1
/// links of the subsystem. Every nonzero element joins two labels with equal
/// occupations whose links differ on exactly one link by 1 or 2, and equals
/// `1/sqrt 2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct OrderParameterOp;

impl OrderParameterOp {
    pub fn matrix_element(&self, bra: &SubsystemLabel, ket: &SubsystemLabel) -> f64 {
        if bra.occupation != ket.occupation || bra.links.len() != ket.links.len() {
            return 0.0;
        }
        let mut changed = bra.links.iter().zip(&ket.links).filter(|(x, y)| x != y);
        match (changed.next(), changed.next()) {
            (Some((x, y)), None) if x.abs() <= 1 && y.abs() <= 1 => FRAC_1_SQRT_2,
            _ => 0.0,
        }
    }
}

/// `Tr(rho_A O)` for the quantum link model.
pub fn order_parameter(rdm: &ReducedDensityMatrix) -> Result<f64> {
    let model = rdm.basis().model;
    if model != ModelKind::QuantumLink {
        return Err(Error::UnsupportedModel(model));
    }
    let op = OrderParameterOp;
    let sectors = rdm.basis().sectors();
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for (&(a, b), m) in rdm.blocks() {
        for (i, la) in sectors[a].labels.iter().enumerate() {
            for (j, lb) in sectors[b].labels.iter().enumerate() {
                let o = op.matrix_element(lb, la);
                if o != 0.0 {
                    total += m[(i, j)] * o;
                }
            }
        }
    }
    Ok(total.re)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            times,
            values,
        }
    }

    pub fn map(&self, name: impl Into<String>, f: impl Fn(f64) -> f64) -> Self {
        Self::new(name, self.times.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

pub const DEFAULT_SMOOTHING: usize = 5;

/// Centered moving average; the window shrinks at the ends.
pub fn smooth(values: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Times where `a - b` changes sign after smoothing both series, linearly
/// interpolated between samples.
pub fn detect_crossing(a: &MetricSeries, b: &MetricSeries, width: usize) -> Result<Vec<f64>> {
    if a.times != b.times || a.values.len() != b.values.len() || a.values.len() != a.times.len() {
        return Err(Error::GridMismatch);
    }
    let sa = smooth(&a.values, width.max(1));
    let sb = smooth(&b.values, width.max(1));
    let diff: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| x - y).collect();
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, &d) in diff.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        if let Some((k, prev)) = last {
            if prev.signum() != d.signum() {
                let (t0, t1) = (a.times[k], a.times[i]);
                out.push(t0 + (t1 - t0) * prev / (prev - d));
            }
        }
        last = Some((i, d));
    }
    Ok(out)
}
