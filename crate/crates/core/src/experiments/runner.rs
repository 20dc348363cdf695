//! Scenario and sweep execution.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use super::config::{Metric, ProbeKind, ScenarioConfig};
use super::output::{sha256_hex, Cell, CsvTable, OutputDir, ResultManifest};
use super::svg::{line_plot, Line};
use crate::dynamics::{
    build_initial_state, diagonalize, energy, linspace, long_time_average, uniform_grid, InitialStateSpec,
    MultiSectorState, Propagator, SectorBases, SectorEigs, SectorHamiltonians, Trajectory,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, ModelParams};
use crate::lattice::{default_filling, enumerate_sector_basis, sector_dimension, GaugeSector, LatticeSpec, SubsystemSpec};
use crate::metrics::{
    detect_crossing, entanglement_asymmetry, order_parameter, renyi2_asymmetry, trace_distance, MetricSeries,
};
use crate::par::{self, ExecMode};
use crate::rdm::{PartialTrace, ReducedDensityMatrix, SubsystemBasis};
use crate::spectral::{
    gap_distribution, peak_statistics, zero_frequency_diagonal_ensemble, GapDistribution, Peak, ProbeOperator,
    EXACT_BIN,
};

const UNITS: &str = "time in units of 1/w, energies in units of w, natural logarithms";

/// Bases, Hamiltonians and eigendecompositions of a set of sectors.
#[derive(Clone, Debug)]
pub struct PreparedSystem {
    pub lattice: LatticeSpec,
    pub params: ModelParams,
    pub bases: SectorBases,
    pub hams: SectorHamiltonians,
    pub eigs: SectorEigs,
}

/// Builds and diagonalizes every sector; the dimension cap is checked for all
/// sectors before any matrix is allocated.
pub fn prepare(
    model: crate::lattice::ModelKind,
    lattice: LatticeSpec,
    params: ModelParams,
    sectors: &BTreeSet<GaugeSector>,
    cap: usize,
    mode: ExecMode,
) -> Result<PreparedSystem> {
    let filling = default_filling(model, &lattice);
    for g in sectors {
        let dim = sector_dimension(model, &lattice, g, filling)?;
        if dim > cap {
            return Err(Error::CapExceeded { dim, cap });
        }
    }
    let list: Vec<GaugeSector> = sectors.iter().cloned().collect();
    let built = par::try_map(mode, &list, |g| -> Result<_> {
        let basis = Arc::new(enumerate_sector_basis(model, &lattice, g, filling)?);
        let h = Arc::new(build_hamiltonian(&params, basis.clone())?);
        let eig = Arc::new(diagonalize(&h)?);
        Ok((g.clone(), basis, h, eig))
    })?;
    let mut out = PreparedSystem {
        lattice,
        params,
        bases: SectorBases::new(),
        hams: SectorHamiltonians::new(),
        eigs: SectorEigs::new(),
    };
    for (g, b, h, e) in built {
        out.bases.insert(g.clone(), b);
        out.hams.insert(g.clone(), h);
        out.eigs.insert(g, e);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Conservation {
    pub norm_drift: f64,
    /// `|<H>(t) - <H>(0)| / max(|<H>(0)|, w)`.
    pub energy_drift: f64,
    pub trace_error: f64,
    pub min_ea: f64,
}

#[derive(Clone, Debug)]
pub struct StateResult {
    pub name: String,
    pub spec: InitialStateSpec,
    pub series: BTreeMap<Metric, MetricSeries>,
    pub averages: BTreeMap<Metric, f64>,
    pub conservation: Conservation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingReport {
    pub metric: Metric,
    pub first: String,
    pub second: String,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub state: String,
    pub distribution: GapDistribution,
    pub peaks: Vec<Peak>,
}

#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub times: Vec<f64>,
    pub states: Vec<StateResult>,
    pub crossings: Vec<CrossingReport>,
    pub spectra: Vec<SpectrumResult>,
}

impl ScenarioResult {
    pub fn state(&self, name: &str) -> Option<&StateResult> {
        self.states.iter().find(|s| s.name == name)
    }
}

struct Sample {
    values: Vec<f64>,
    norm: f64,
    energy: f64,
    trace: f64,
    ea: f64,
}

fn metric_value(metric: Metric, rdm: &ReducedDensityMatrix, ea: f64) -> Result<f64> {
    Ok(match metric {
        Metric::EntanglementAsymmetry => ea,
        Metric::Renyi2 => renyi2_asymmetry(rdm),
        Metric::TraceDistance => trace_distance(rdm),
        // Reported as |<O>|.
        Metric::OrderParameter => order_parameter(rdm)?.abs(),
    })
}

fn sample(
    prop: &Propagator,
    plan: &PartialTrace,
    hams: &SectorHamiltonians,
    metrics: &[Metric],
    t: f64,
    with_energy: bool,
) -> Result<Sample> {
    let psi = prop.at(t);
    let rdm = plan.reduce(&psi)?;
    let ea = entanglement_asymmetry(&rdm)?;
    let values = metrics
        .iter()
        .map(|&m| metric_value(m, &rdm, ea))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample {
        values,
        norm: psi.norm_sqr(),
        energy: if with_energy { energy(&psi, hams)? } else { 0.0 },
        trace: rdm.trace().re,
        ea,
    })
}

fn lattice_of(cfg: &ScenarioConfig, n: usize) -> Result<LatticeSpec> {
    LatticeSpec::with_boundaries(n, cfg.boundary_left, cfg.boundary_right)
}

fn state_specs(cfg: &ScenarioConfig, n: usize) -> Vec<InitialStateSpec> {
    cfg.states.iter().map(|s| s.to_spec(cfg.model, n, cfg.ell)).collect()
}

fn needed_sectors(specs: &[InitialStateSpec], n: usize) -> Result<BTreeSet<GaugeSector>> {
    let mut set = BTreeSet::new();
    for s in specs {
        set.extend(s.sectors(n)?);
    }
    Ok(set)
}

/// Probe on the block between the first two listed sectors of `spec`.
pub fn default_probe(cfg: &ScenarioConfig, spec: &InitialStateSpec, basis: &SubsystemBasis, n: usize) -> Result<Option<ProbeOperator>> {
    let sectors = spec.sectors(n)?;
    if sectors.len() < 2 {
        return Ok(None);
    }
    let bra = sectors[0].restrict(cfg.ell);
    let ket = sectors[1].restrict(cfg.ell);
    if bra == ket {
        return Ok(None);
    }
    Ok(Some(match cfg.probe {
        ProbeKind::Ones => ProbeOperator::all_ones(basis, &bra, &ket)?,
        ProbeKind::Random => ProbeOperator::random(basis, &bra, &ket, cfg.seed)?,
    }))
}

/// Evolve every configured state and evaluate its metrics.
pub fn simulate(cfg: &ScenarioConfig, mode: ExecMode) -> Result<ScenarioResult> {
    cfg.validate()?;
    let n = cfg.n;
    let lattice = lattice_of(cfg, n)?;
    let sub = SubsystemSpec::new(cfg.ell, &lattice)?;
    let params = ModelParams::new(cfg.w, cfg.m, cfg.j, cfg.theta)?;
    let specs = state_specs(cfg, n);
    let times = uniform_grid(0.0, cfg.t_max, cfg.dt);
    let mut result = ScenarioResult {
        config: cfg.clone(),
        times: times.clone(),
        states: Vec::new(),
        crossings: Vec::new(),
        spectra: Vec::new(),
    };
    if specs.is_empty() || (cfg.metrics.is_empty() && !cfg.spectrum) {
        return Ok(result);
    }
    let system = prepare(cfg.model, lattice, params, &needed_sectors(&specs, n)?, cfg.cap_dim, mode)?;
    let avg_times = if cfg.avg_samples > 0 {
        linspace(cfg.avg_t_min, cfg.avg_t_max, cfg.avg_samples)
    } else {
        Vec::new()
    };
    for (state_cfg, spec) in cfg.states.iter().zip(&specs) {
        let psi0 = build_initial_state(spec, &system.bases)?;
        let plan = PartialTrace::new(&psi0, &sub)?;
        if cfg.spectrum {
            if let Some(probe) = default_probe(cfg, spec, plan.basis(), n)? {
                let distribution = gap_distribution(&system.eigs, &psi0, &sub, &probe, cfg.spectrum_bin)?;
                let peaks = peak_statistics(&distribution, cfg.peak_bin);
                result.spectra.push(SpectrumResult {
                    state: state_cfg.name.clone(),
                    distribution,
                    peaks,
                });
            }
        }
        if cfg.metrics.is_empty() {
            continue;
        }
        let prop = Propagator::new(&psi0, &system.eigs)?;
        let samples = par::try_map(mode, &times, |&t| sample(&prop, &plan, &system.hams, &cfg.metrics, t, true))?;
        let e0 = samples[0].energy;
        let n0 = samples[0].norm;
        let scale = e0.abs().max(cfg.w);
        let mut conservation = Conservation {
            min_ea: f64::INFINITY,
            ..Conservation::default()
        };
        for s in &samples {
            conservation.norm_drift = conservation.norm_drift.max((s.norm - n0).abs());
            conservation.energy_drift = conservation.energy_drift.max((s.energy - e0).abs() / scale);
            conservation.trace_error = conservation.trace_error.max((s.trace - 1.0).abs());
            conservation.min_ea = conservation.min_ea.min(s.ea);
        }
        let mut series = BTreeMap::new();
        for (k, &m) in cfg.metrics.iter().enumerate() {
            let values = samples.iter().map(|s| s.values[k]).collect();
            series.insert(m, MetricSeries::new(format!("{}:{}", state_cfg.name, m.name()), times.clone(), values));
        }
        let mut averages = BTreeMap::new();
        if !avg_times.is_empty() {
            let late = par::try_map(mode, &avg_times, |&t| sample(&prop, &plan, &system.hams, &cfg.metrics, t, false))?;
            for s in &late {
                conservation.norm_drift = conservation.norm_drift.max((s.norm - n0).abs());
                conservation.trace_error = conservation.trace_error.max((s.trace - 1.0).abs());
                conservation.min_ea = conservation.min_ea.min(s.ea);
            }
            for (k, &m) in cfg.metrics.iter().enumerate() {
                let traj = Trajectory::new(avg_times.clone(), late.iter().map(|s| s.values[k]).collect())?;
                averages.insert(m, long_time_average(&traj, (cfg.avg_t_min, cfg.avg_t_max))?);
            }
        }
        result.states.push(StateResult {
            name: state_cfg.name.clone(),
            spec: spec.clone(),
            series,
            averages,
            conservation,
        });
    }
    for &m in &cfg.metrics {
        for (i, a) in result.states.iter().enumerate() {
            for b in &result.states[i + 1..] {
                result.crossings.push(CrossingReport {
                    metric: m,
                    first: a.name.clone(),
                    second: b.name.clone(),
                    times: detect_crossing(&a.series[&m], &b.series[&m], cfg.crossing_window)?,
                });
            }
        }
    }
    Ok(result)
}

fn metric_note(m: Metric) -> &'static str {
    match m {
        Metric::EntanglementAsymmetry => "entanglement asymmetry S[rho_A,G] - S[rho_A]",
        Metric::Renyi2 => "Renyi-2 asymmetry log Tr rho_A^2 - log Tr rho_A,G^2",
        Metric::TraceDistance => "trace distance 1/2 ||rho_A - rho_A,G||_1",
        Metric::OrderParameter => "absolute value of the order parameter |<O>|",
    }
}

fn base_table(header: Vec<String>, cfg: &ScenarioConfig, digest: &str) -> CsvTable {
    let mut t = CsvTable::new(header);
    t.meta("scenario", cfg.scenario.clone())
        .meta("config_sha256", digest)
        .meta("model", cfg.model.name())
        .meta("units", UNITS);
    t
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub mode: ExecMode,
}

fn manifest(cfg: &ScenarioConfig, kind: &str, text: &str, started: Instant) -> ResultManifest {
    ResultManifest {
        scenario: cfg.scenario.clone(),
        kind: kind.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: text.to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        files: Vec::new(),
    }
}

/// Write the tables (and plots when requested) of a finished scenario.
pub fn write_scenario(result: &ScenarioResult, out: &mut OutputDir) -> Result<()> {
    let cfg = &result.config;
    let text = cfg.serialize();
    let digest = sha256_hex(text.as_bytes());
    for &m in &cfg.metrics {
        let mut header = vec!["wt".to_string()];
        header.extend(result.states.iter().map(|s| s.name.clone()));
        let mut t = base_table(header, cfg, &digest);
        t.meta("metric", metric_note(m));
        for (k, &time) in result.times.iter().enumerate() {
            let mut row = vec![Cell::Num(time)];
            row.extend(result.states.iter().map(|s| Cell::Num(s.series[&m].values[k])));
            t.push(row);
        }
        out.write(&format!("{}.csv", m.name()), &t.render())?;
        if cfg.plots {
            let lines: Vec<Line<'_>> = result
                .states
                .iter()
                .map(|s| Line {
                    label: &s.name,
                    x: &result.times,
                    y: &s.series[&m].values,
                })
                .collect();
            out.write(&format!("{}.svg", m.name()), &line_plot(&cfg.scenario, "wt", m.name(), &lines))?;
        }
    }
    if !cfg.metrics.is_empty() && !result.states.is_empty() {
        let mut t = base_table(
            vec!["metric".into(), "first".into(), "second".into(), "wt".into()],
            cfg,
            &digest,
        );
        t.meta("smoothing_window", cfg.crossing_window.to_string());
        for c in &result.crossings {
            for &time in &c.times {
                t.push(vec![
                    Cell::Text(c.metric.name().into()),
                    Cell::Text(c.first.clone()),
                    Cell::Text(c.second.clone()),
                    Cell::Num(time),
                ]);
            }
        }
        out.write("crossings.csv", &t.render())?;

        let mut t = base_table(
            vec![
                "state".into(),
                "norm_drift".into(),
                "energy_drift_rel".into(),
                "trace_error".into(),
                "min_ea".into(),
            ],
            cfg,
            &digest,
        );
        for s in &result.states {
            let c = s.conservation;
            t.push(vec![
                Cell::Text(s.name.clone()),
                Cell::Num(c.norm_drift),
                Cell::Num(c.energy_drift),
                Cell::Num(c.trace_error),
                Cell::Num(c.min_ea),
            ]);
        }
        out.write("conservation.csv", &t.render())?;

        if cfg.avg_samples > 0 {
            let mut t = base_table(vec!["state".into(), "metric".into(), "average".into()], cfg, &digest);
            t.meta(
                "window",
                format!("{} samples uniformly in wt = [{}, {}]", cfg.avg_samples, cfg.avg_t_min, cfg.avg_t_max),
            );
            for s in &result.states {
                for (m, v) in &s.averages {
                    t.push(vec![Cell::Text(s.name.clone()), Cell::Text(m.name().into()), Cell::Num(*v)]);
                }
            }
            out.write("averages.csv", &t.render())?;
        }
    }
    for sp in &result.spectra {
        let max = sp.distribution.max_weight();
        let mut t = base_table(vec!["w".into(), "abs_z".into(), "re_z".into(), "im_z".into()], cfg, &digest);
        t.meta("normalization", "abs_z divided by its global maximum; re_z and im_z unnormalized")
            .meta("bin", format!("{:?}", sp.distribution.bin))
            .meta(
                "weight_within_j_over_10_of_multiples_of_j",
                if cfg.j > 0.0 {
                    crate::experiments::output::format_sci(sp.distribution.weight_near_multiples(cfg.j, cfg.j / 10.0))
                } else {
                    "nan".into()
                },
            );
        for (w, z) in &sp.distribution.entries {
            t.push(vec![
                Cell::Num(*w),
                Cell::Num(if max > 0.0 { z.norm() / max } else { 0.0 }),
                Cell::Num(z.re),
                Cell::Num(z.im),
            ]);
        }
        out.write(&format!("spectrum_{}.csv", sp.state), &t.render())?;
        let mut t = base_table(vec!["center".into(), "weight".into(), "std_dev".into()], cfg, &digest);
        t.meta("coarse_bin", format!("{:?}", cfg.peak_bin));
        for p in &sp.peaks {
            t.push(vec![Cell::Num(p.center), Cell::Num(p.weight), Cell::Num(p.std_dev)]);
        }
        out.write(&format!("peaks_{}.csv", sp.state), &t.render())?;
        if cfg.plots {
            let xs: Vec<f64> = sp.distribution.entries.iter().map(|(w, _)| *w).collect();
            let ys: Vec<f64> = sp
                .distribution
                .entries
                .iter()
                .map(|(_, z)| if max > 0.0 { z.norm() / max } else { 0.0 })
                .collect();
            let svg = line_plot(&cfg.scenario, "omega / w", "|z| (normalized)", &[Line { label: &sp.state, x: &xs, y: &ys }]);
            out.write(&format!("spectrum_{}.svg", sp.state), &svg)?;
        }
    }
    Ok(())
}

pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ResultManifest> {
    let started = Instant::now();
    let result = simulate(cfg, opts.mode)?;
    let mut out = OutputDir::create(&opts.out_dir)?;
    write_scenario(&result, &mut out)?;
    out.finish(manifest(cfg, "run", &cfg.serialize(), started))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub j: f64,
    pub state: String,
    pub averages: BTreeMap<Metric, f64>,
    /// `|z(0)|` by enumeration and by the diagonal-ensemble form (J = 0 only).
    pub z0: Option<(f64, f64)>,
}

/// Zero-frequency weights of the first block of `psi0` by both methods.
pub fn zero_frequency_pair(
    cfg: &ScenarioConfig,
    system: &PreparedSystem,
    spec: &InitialStateSpec,
    psi0: &MultiSectorState,
    sub: &SubsystemSpec,
    plan: &PartialTrace,
) -> Result<Option<(Complex64, Complex64)>> {
    let n = system.lattice.sites();
    let Some(probe) = default_probe(cfg, spec, plan.basis(), n)? else {
        return Ok(None);
    };
    let sectors = spec.sectors(n)?;
    let enumerated = gap_distribution(&system.eigs, psi0, sub, &probe, EXACT_BIN)?.zero_frequency();
    let first = &psi0.entries()[&sectors[0]];
    let second = &psi0.entries()[&sectors[1]];
    let closed = zero_frequency_diagonal_ensemble(
        system.params.j,
        &first.basis,
        &system.eigs[&sectors[0]],
        &first.amplitudes,
        sub,
        plan.basis(),
        &probe,
        first.coefficient,
        second.coefficient,
    )?;
    Ok(Some((enumerated, closed)))
}

pub fn sweep(cfg: &ScenarioConfig, mode: ExecMode) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.j_list.is_empty() || cfg.n_list.is_empty() {
        return Err(Error::config(0, "j_list", "a sweep needs nonempty j_list and n_list"));
    }
    if cfg.avg_samples == 0 {
        return Err(Error::config(0, "avg_samples", "a sweep needs a long-time average"));
    }
    let avg_times = linspace(cfg.avg_t_min, cfg.avg_t_max, cfg.avg_samples);
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let lattice = lattice_of(cfg, n)?;
        let sub = SubsystemSpec::new(cfg.ell, &lattice)?;
        let specs = state_specs(cfg, n);
        let sectors = needed_sectors(&specs, n)?;
        for &j in &cfg.j_list {
            let params = ModelParams::new(cfg.w, cfg.m, j, cfg.theta)?;
            let system = prepare(cfg.model, lattice, params, &sectors, cfg.cap_dim, mode)?;
            for (state_cfg, spec) in cfg.states.iter().zip(&specs) {
                let psi0 = build_initial_state(spec, &system.bases)?;
                let plan = PartialTrace::new(&psi0, &sub)?;
                let prop = Propagator::new(&psi0, &system.eigs)?;
                let late = par::try_map(mode, &avg_times, |&t| sample(&prop, &plan, &system.hams, &cfg.metrics, t, false))?;
                let mut averages = BTreeMap::new();
                for (k, &m) in cfg.metrics.iter().enumerate() {
                    let traj = Trajectory::new(avg_times.clone(), late.iter().map(|s| s.values[k]).collect())?;
                    averages.insert(m, long_time_average(&traj, (cfg.avg_t_min, cfg.avg_t_max))?);
                }
                let z0 = if j == 0.0 && cfg.model == crate::lattice::ModelKind::Schwinger {
                    zero_frequency_pair(cfg, &system, spec, &psi0, &sub, &plan)?.map(|(a, b)| (a.norm(), b.norm()))
                } else {
                    None
                };
                rows.push(SweepRow {
                    n,
                    j,
                    state: state_cfg.name.clone(),
                    averages,
                    z0,
                });
            }
        }
    }
    Ok(rows)
}

pub fn run_sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ResultManifest> {
    let started = Instant::now();
    let rows = sweep(cfg, opts.mode)?;
    let text = cfg.serialize();
    let digest = sha256_hex(text.as_bytes());
    let mut out = OutputDir::create(&opts.out_dir)?;
    for &m in &cfg.metrics {
        let mut t = base_table(
            vec![
                "n".into(),
                "j".into(),
                "state".into(),
                "average".into(),
                "abs_z0_enumeration".into(),
                "abs_z0_closed_form".into(),
            ],
            cfg,
            &digest,
        );
        t.meta("metric", metric_note(m)).meta(
            "window",
            format!("{} samples uniformly in wt = [{}, {}]", cfg.avg_samples, cfg.avg_t_min, cfg.avg_t_max),
        );
        for r in &rows {
            let (a, b) = r.z0.unwrap_or((f64::NAN, f64::NAN));
            t.push(vec![
                Cell::Int(r.n as i64),
                Cell::Num(r.j),
                Cell::Text(r.state.clone()),
                Cell::Num(r.averages[&m]),
                Cell::Num(a),
                Cell::Num(b),
            ]);
        }
        out.write(&format!("sweep_{}.csv", m.name()), &t.render())?;
        if cfg.plots {
            let mut curves: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
            for r in &rows {
                let label = format!("{} N={}", r.state, r.n);
                match curves.iter_mut().find(|c| c.0 == label) {
                    Some(c) => {
                        c.1.push(r.j);
                        c.2.push(r.averages[&m]);
                    }
                    None => curves.push((label, vec![r.j], vec![r.averages[&m]])),
                }
            }
            let lines: Vec<Line<'_>> = curves.iter().map(|(l, x, y)| Line { label: l, x, y }).collect();
            out.write(&format!("sweep_{}.svg", m.name()), &line_plot(&cfg.scenario, "J / w", m.name(), &lines))?;
        }
    }
    out.finish(manifest(cfg, "sweep", &text, started))
}
