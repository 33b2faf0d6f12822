//! Monte Carlo multiscale driver: initial-scale parameters, per-scale
//! localizing probabilities, defect regions and the Wegner measurement.

use serde::{Deserialize, Serialize};

use crate::covering::{containing_centers, standard_covering, NEIGHBOURHOOD_CORE};
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::lattice::{classify_acceptable, density_report, eta_of_scale, AcceptabilityClass, DensityParams, EtaGrid, SiteSet};
use crate::operator::{
    classify_good, lowest_eigenvalue, resolvent_norm, Discretization, GoodnessParams, ProbeParams, SingleSiteProfile,
    SolverConfig, Verdict,
};
use crate::point_process::{sample_marked, split_marked, Configuration};
use crate::rng::StreamSeed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialScaleParams {
    pub delta_l: f64,
    pub e_l: f64,
    pub m_l: f64,
    pub c_u: f64,
    /// L > δ_L + δ₊, needed for the sets J to be non-trivial.
    pub box_fits: bool,
}

/// δ_L = 1 + ((p+d+1)ϱ^{−1} ln L)^{1/d}, E_L = C_u δ_L^{−2(d+1)}, m_L = ½√E_L.
/// The density must lie in the window L^{−ε₀} ≤ ϱ ≤ e^{L^d}.
pub fn initial_scale_params(d: usize, rho: f64, p: f64, l: f64, c_u: f64, eps0: f64, delta_plus: f64) -> Result<InitialScaleParams> {
    if d == 0 || !(l > 1.0) || !(p > 0.0) || !(c_u > 0.0) {
        return Err(Error::invalid(format!("need d ≥ 1, L > 1, p > 0, C_u > 0 (d = {d}, L = {l}, p = {p}, C_u = {c_u})")));
    }
    let lo = l.powf(-eps0);
    let hi_log = l.powi(d as i32);
    if !(rho >= lo) || !(rho.ln() <= hi_log) {
        return Err(Error::Domain(format!(
            "density {rho} outside the window L^(-eps0) <= rho <= exp(L^d) = [{lo}, e^{hi_log}]"
        )));
    }
    let df = d as f64;
    let delta_l = 1.0 + ((p + df + 1.0) / rho * l.ln()).powf(1.0 / df);
    let e_l = c_u * delta_l.powf(-2.0 * (df + 1.0));
    Ok(InitialScaleParams { delta_l, e_l, m_l: 0.5 * e_l.sqrt(), c_u, box_fits: l > delta_l + delta_plus })
}

/// Offsets k·δ₀ along one axis with Λ_{δ₀}(j) ⊂ Λ̂ = Λ_{L−δ₊}.
fn j_offsets(l: f64, delta0: f64, delta_plus: f64) -> Vec<i64> {
    let half_hat = 0.5 * (l - delta_plus);
    let kmax = ((half_hat - 0.5 * delta0) / delta0 + 1e-12).floor() as i64;
    if kmax < 0 {
        return Vec::new();
    }
    (-kmax..=kmax).collect()
}

/// J_e-filled configuration: one impurity at every j ∈ x + 2δ₀Z^d with
/// Λ_{δ₀}(j) ⊂ Λ̂.
pub fn filled_even_sites(cube: &Cube, delta0: f64, delta_plus: f64) -> Configuration {
    let ks: Vec<i64> = j_offsets(cube.side(), delta0, delta_plus).into_iter().filter(|k| k % 2 == 0).collect();
    let mut pts = vec![Vec::new()];
    for a in 0..cube.dim() {
        let c = cube.center()[a];
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                ks.iter().map(move |k| {
                    let mut q = p.clone();
                    q.push(c + *k as f64 * delta0);
                    q
                })
            })
            .collect();
    }
    if ks.is_empty() {
        pts.clear();
    }
    Configuration::new(cube.dim(), pts).expect("lattice points are distinct")
}

/// min over grid nodes of V̄(y) = (6δ₀)^{−d} ∫_{Λ_{6δ₀}(0)} V(y − a) da.
pub fn averaged_potential_min(cube: &Cube, x: &Configuration, profile: &SingleSiteProfile, delta0: f64, h: f64) -> f64 {
    let w = 6.0 * delta0;
    let n = (cube.side() / h).round() as usize;
    let d = cube.dim();
    let mut idx = vec![1usize; d];
    let mut best = f64::INFINITY;
    if n < 2 {
        return best;
    }
    loop {
        let y: Vec<f64> = (0..d).map(|a| cube.lower(a) + idx[a] as f64 * h).collect();
        let v: f64 = x
            .points()
            .iter()
            .map(|z| {
                let off: Vec<f64> = y.iter().zip(z).map(|(a, b)| a - b).collect();
                profile.cell_average(&off, w)
            })
            .sum();
        best = best.min(v);
        let mut a = 0;
        while a < d {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 1;
            a += 1;
        }
        if a == d {
            return best;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuSample {
    pub delta0: f64,
    pub lambda1: f64,
    /// λ₁δ₀^{2(d+1)}.
    pub scaled: f64,
    pub averaged_potential_min: f64,
    pub impurities: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuCalibration {
    pub c_u: f64,
    pub side: f64,
    pub samples: Vec<CuSample>,
}

/// C_u = ½ min over the sweep of λ₁(H_{X₁,Λ}) δ₀^{2(d+1)} with X₁ the
/// J_e-filled configuration.
pub fn calibrate_cu(d: usize, disc: &Discretization, sweep: &[f64], side: f64, cfg: &SolverConfig) -> Result<CuCalibration> {
    if sweep.is_empty() {
        return Err(Error::invalid("empty δ₀ sweep"));
    }
    let cube = Cube::centered(d, side)?;
    let dp = disc.profile.delta_plus;
    let mut samples = Vec::with_capacity(sweep.len());
    for &delta0 in sweep {
        if !(delta0 > dp) {
            return Err(Error::invalid(format!("δ₀ = {delta0} must exceed δ₊ = {dp}")));
        }
        if !(side > delta0 + dp) {
            return Err(Error::invalid(format!("box side {side} must exceed δ₀ + δ₊")));
        }
        let x1 = filled_even_sites(&cube, delta0, dp);
        let h = disc.assemble_plain(&cube, &x1)?;
        let lambda1 = lowest_eigenvalue(&h, cfg)?;
        if !(lambda1 > 0.0) {
            return Err(Error::Internal(format!("λ₁ = {lambda1} ≤ 0 for a nonnegative potential")));
        }
        samples.push(CuSample {
            delta0,
            lambda1,
            scaled: lambda1 * delta0.powi(2 * (d as i32 + 1)),
            averaged_potential_min: averaged_potential_min(&cube, &x1, &disc.profile, delta0, disc.spacing),
            impurities: x1.len(),
        });
    }
    let c_u = 0.5 * samples.iter().map(|s| s.scaled).fold(f64::INFINITY, f64::min);
    Ok(CuCalibration { c_u, side, samples })
}

/// Everything a trial needs besides its scale, energy and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSetup {
    pub dim: usize,
    /// ϱ; the marked process runs at 2ϱ.
    pub density: f64,
    pub disc: Discretization,
    /// η = e^{−L^κ}.
    pub kappa: f64,
    /// ε₁.
    pub eps_scale: f64,
    /// ε₂.
    pub eps_count: f64,
    pub probe: ProbeParams,
    pub solver: SolverConfig,
}

impl TrialSetup {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(self.density > 0.0) || !self.density.is_finite() {
            return Err(Error::invalid(format!("density must be positive, got {}", self.density)));
        }
        self.disc.profile.validate()?;
        if !(self.disc.spacing > 0.0) || self.disc.spacing > self.disc.profile.delta_minus / 4.0 {
            return Err(Error::invalid("grid spacing must lie in (0, δ₋/4]"));
        }
        DensityParams::new(self.eps_scale, self.eps_count)?;
        if !(self.kappa > 0.0) {
            return Err(Error::invalid("κ must be positive"));
        }
        Ok(())
    }

    fn density_params(&self) -> DensityParams {
        DensityParams { eps_scale: self.eps_scale, eps_count: self.eps_count }
    }

    fn goodness(&self, eta: f64, seed: StreamSeed) -> GoodnessParams {
        GoodnessParams {
            eps_scale: self.eps_scale,
            eta,
            probe: ProbeParams { seed: seed.split(7).value(), ..self.probe },
            window_side: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub scale: f64,
    pub energy: f64,
    pub acceptability: AcceptabilityClass,
    pub points: usize,
    /// None when the acceptability gate already failed.
    pub goodness: Option<Verdict>,
    pub free_sites_dense: Option<bool>,
    pub resolvent_norm: Option<f64>,
    pub fitted_mass: Option<f64>,
    pub localizing: bool,
}

/// One sampled configuration at scale L, shared by all energies.
struct TrialSample {
    cube: Cube,
    grid: EtaGrid,
    acceptability: AcceptabilityClass,
    points: usize,
    x: Configuration,
    x_prime: Configuration,
}

fn sample_trial(setup: &TrialSetup, l: f64, seed: StreamSeed) -> Result<TrialSample> {
    let cube = Cube::centered(setup.dim, l)?;
    let grid = EtaGrid::new(cube.clone(), eta_of_scale(l, setup.kappa)?)?;
    let marked = sample_marked(&cube, 2.0 * setup.density, seed)?;
    let y = marked.support();
    let verdict = classify_acceptable(&y, &grid, setup.density);
    let (x, x_prime) = split_marked(&marked);
    Ok(TrialSample { cube, grid, acceptability: verdict.class, points: y.len(), x, x_prime })
}

fn evaluate_trial(setup: &TrialSetup, s: &TrialSample, e: f64, m: f64, seed: StreamSeed) -> Result<TrialRecord> {
    let mut rec = TrialRecord {
        seed: seed.value(),
        scale: s.cube.side(),
        energy: e,
        acceptability: s.acceptability,
        points: s.points,
        goodness: None,
        free_sites_dense: None,
        resolvent_norm: None,
        fitted_mass: None,
        localizing: false,
    };
    if s.acceptability != AcceptabilityClass::Acceptable {
        return Ok(rec);
    }
    let h = setup.disc.assemble_plain(&s.cube, &s.x)?;
    let rep = classify_good(&h, e, m, &setup.goodness(s.grid.eta(), seed), &setup.solver)?;
    let sites: SiteSet = s.x_prime.points().iter().filter_map(|p| s.grid.site_of(p)).collect();
    let dense = density_report(&sites, &s.grid, &setup.density_params(), setup.disc.profile.delta_plus).dense;
    rec.goodness = Some(rep.verdict);
    rec.resolvent_norm = Some(rep.resolvent_norm);
    rec.fitted_mass = rep.fitted_mass();
    rec.free_sites_dense = Some(dense);
    rec.localizing = rep.verdict == Verdict::Good && dense;
    Ok(rec)
}

/// Runs `f(i)` for i in 0..n, concurrently when the `parallel` feature is on;
/// results come back in index order.
fn map_trials<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Wilson score interval at z = 1.96.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub scale: f64,
    pub energy: f64,
    pub mass: f64,
    pub trials: usize,
    pub acceptable: usize,
    pub passes: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// 1 − L^{−p}.
    pub target: f64,
    pub meets_target: bool,
    /// Median over passing trials of the largest mass the probed pairs allow.
    pub fitted_mass: Option<f64>,
}

impl ScaleEstimate {
    fn from_records(l: f64, e: f64, m: f64, p: f64, recs: &[TrialRecord]) -> Self {
        let trials = recs.len();
        let passes = recs.iter().filter(|r| r.localizing).count();
        let acceptable = recs.iter().filter(|r| r.acceptability == AcceptabilityClass::Acceptable).count();
        let fraction = passes as f64 / trials as f64;
        let (ci_low, ci_high) = wilson_interval(passes, trials);
        let target = 1.0 - l.powf(-p);
        let fitted_mass = median(recs.iter().filter(|r| r.localizing).filter_map(|r| r.fitted_mass).collect());
        Self { scale: l, energy: e, mass: m, trials, acceptable, passes, fraction, ci_low, ci_high, target, meets_target: fraction >= target, fitted_mass }
    }
}

/// Trial seeds are `master.split_path([scale_index, trial])`.
pub fn trial_seed(master: StreamSeed, scale_index: u64, trial: u64) -> StreamSeed {
    master.split_path(&[scale_index, trial])
}

/// Empirical P{localizing} at scale L for each energy, over `trials` samples
/// that are shared across energies. Records are ordered by trial, then energy.
#[allow(clippy::too_many_arguments)]
pub fn estimate_localizing_probability(
    setup: &TrialSetup,
    l: f64,
    energies: &[f64],
    m: f64,
    p: f64,
    trials: usize,
    master: StreamSeed,
    scale_index: u64,
) -> Result<(Vec<ScaleEstimate>, Vec<TrialRecord>)> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if energies.is_empty() {
        return Err(Error::invalid("at least one energy is required"));
    }
    setup.validate()?;
    let per_trial: Vec<Result<Vec<TrialRecord>>> = map_trials(trials, |t| {
        let seed = trial_seed(master, scale_index, t as u64);
        let s = sample_trial(setup, l, seed)?;
        energies.iter().map(|&e| evaluate_trial(setup, &s, e, m, seed)).collect()
    });
    let mut records = Vec::with_capacity(trials * energies.len());
    for r in per_trial {
        records.extend(r?);
    }
    let estimates = energies
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let recs: Vec<TrialRecord> = records.iter().skip(k).step_by(energies.len()).cloned().collect();
            ScaleEstimate::from_records(l, e, m, p, &recs)
        })
        .collect();
    Ok((estimates, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDefects {
    pub scale: f64,
    pub boxes: usize,
    /// Centers of the covering boxes that are not jgood.
    pub flagged: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectMap {
    pub levels: Vec<LevelDefects>,
    /// Centers r ∈ R_{n₁} of the boxes Λ_{3ℓ₂}(r) making up Υ_B.
    pub defect_centers: Vec<Vec<f64>>,
    pub defect_side: f64,
    pub probes: usize,
    pub uncovered_probes: usize,
    pub k2: usize,
    pub notsobad: bool,
}

/// Probe grid of step ℓ₂/8 over the box, cell midpoints.
pub fn defect_probes(cube: &Cube, ell2: f64) -> Vec<Vec<f64>> {
    let step = ell2 / 8.0;
    let count = (cube.side() / step).ceil() as usize;
    let step = cube.side() / count as f64;
    let mut out = vec![Vec::new()];
    for a in 0..cube.dim() {
        let lo = cube.lower(a);
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (0..count).map(move |i| {
                    let mut q = p.clone();
                    q.push(lo + (i as f64 + 0.5) * step);
                    q
                })
            })
            .collect();
    }
    out
}

/// [`defect_classify_with_probes`] on the default probe grid.
pub fn defect_classify<F>(cube: &Cube, levels: &[f64], k2: usize, neighbourhood: f64, is_jgood: F) -> Result<DefectMap>
where
    F: FnMut(&Cube) -> Result<bool>,
{
    let ell2 = *levels.last().ok_or_else(|| Error::invalid("at least one level is required"))?;
    defect_classify_with_probes(cube, levels, k2, neighbourhood, &defect_probes(cube, ell2), is_jgood)
}

/// Notsobad classification of Λ_{ℓ₁}. `levels` are L₁ > … > L_{n₁} = ℓ₂, each
/// covering-compatible with the box; `neighbourhood` is the side of
/// Λ(x, s·L_n) as a fraction of L_n. A probe is rescued when some jgood box
/// of some level contains its clipped neighbourhood. Each unrescued probe
/// contributes the finest-level center nearest to it, and Υ_B is the union
/// of the 3ℓ₂-boxes around those centers.
pub fn defect_classify_with_probes<F>(
    cube: &Cube,
    levels: &[f64],
    k2: usize,
    neighbourhood: f64,
    probes: &[Vec<f64>],
    mut is_jgood: F,
) -> Result<DefectMap>
where
    F: FnMut(&Cube) -> Result<bool>,
{
    if levels.is_empty() {
        return Err(Error::invalid("at least one level is required"));
    }
    let mut plans = Vec::with_capacity(levels.len());
    let mut good: Vec<std::collections::BTreeMap<Vec<i64>, bool>> = Vec::new();
    let mut out_levels = Vec::new();
    for &ln in levels {
        let plan = standard_covering(cube, ln)?;
        let mut map = std::collections::BTreeMap::new();
        let mut flagged = Vec::new();
        for c in plan.centers() {
            let ok = is_jgood(&Cube::new(c.clone(), ln)?)?;
            if !ok {
                flagged.push(c.clone());
            }
            map.insert(lattice_key(&plan_origin(cube), plan.step(), &c), ok);
        }
        out_levels.push(LevelDefects { scale: ln, boxes: plan.len(), flagged });
        good.push(map);
        plans.push(plan);
    }

    let finest = plans.last().expect("non-empty");
    let ell2 = finest.ell;
    let mut defect: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    let mut uncovered = 0;
    for x in probes {
        let rescued = plans.iter().zip(&good).any(|(plan, map)| {
            containing_centers(plan, x, neighbourhood * plan.ell)
                .iter()
                .any(|c| map.get(&lattice_key(&plan_origin(cube), plan.step(), c)).copied().unwrap_or(false))
        });
        if !rescued {
            uncovered += 1;
            defect.insert(nearest_lattice_index(finest, x));
        }
    }
    let c = cube.center();
    let defect_centers: Vec<Vec<f64>> =
        defect.iter().map(|k| k.iter().zip(c).map(|(ki, ci)| ci + *ki as f64 * finest.step()).collect()).collect();
    let notsobad = defect_centers.len() <= k2;
    Ok(DefectMap {
        levels: out_levels,
        defect_centers,
        defect_side: 3.0 * ell2,
        probes: probes.len(),
        uncovered_probes: uncovered,
        k2,
        notsobad,
    })
}

fn plan_origin(cube: &Cube) -> Vec<f64> {
    cube.center().to_vec()
}

fn lattice_key(origin: &[f64], step: f64, c: &[f64]) -> Vec<i64> {
    c.iter().zip(origin).map(|(ci, oi)| ((ci - oi) / step).round() as i64).collect()
}

fn nearest_lattice_index(plan: &crate::covering::CoveringPlan, x: &[f64]) -> Vec<i64> {
    let n = plan.n as i64;
    x.iter()
        .zip(plan.parent.center())
        .map(|(xi, ci)| {
            // ties go to the lower index
            let t = (xi - ci) / plan.step();
            let k = if (t - t.floor() - 0.5).abs() < 1e-12 { t.floor() } else { t.round() };
            (k as i64).clamp(-n, n)
        })
        .collect()
}

/// K₂ = (C″(K′ − 1))^{n₁}.
pub fn default_k2(k_prime: usize, c_second: usize, n1: u32) -> usize {
    (c_second * k_prime.saturating_sub(1)).saturating_pow(n1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerRecord {
    pub seed: u64,
    pub acceptable: bool,
    /// +∞ when E is on the spectrum.
    pub resolvent_norm: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerReport {
    pub scale: f64,
    pub energy: f64,
    pub c1: f64,
    pub rho1: f64,
    /// C₁ L^{4ρ₁/3} ln L.
    pub log_threshold: f64,
    pub trials: usize,
    pub acceptable: usize,
    pub passes: usize,
    pub fraction: f64,
    pub target: f64,
    pub meets_target: bool,
}

/// Fraction of samples that are acceptable and have ln‖R_{X,Λ}(E)‖ below
/// C₁ L^{4ρ₁/3} ln L.
#[allow(clippy::too_many_arguments)]
pub fn wegner_measure(
    setup: &TrialSetup,
    l: f64,
    e: f64,
    c1: f64,
    rho1: f64,
    p: f64,
    trials: usize,
    master: StreamSeed,
    scale_index: u64,
) -> Result<(WegnerReport, Vec<WegnerRecord>)> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if !(c1 >= 0.0) {
        return Err(Error::invalid("C₁ must be nonnegative"));
    }
    setup.validate()?;
    let log_threshold = c1 * l.powf(4.0 * rho1 / 3.0) * l.ln();
    let recs: Vec<Result<WegnerRecord>> = map_trials(trials, |t| {
        // a separate stream from the localizing trials at the same scale
        let seed = trial_seed(master, scale_index, t as u64).split(0x5765_676e);
        let s = sample_trial(setup, l, seed)?;
        let h = setup.disc.assemble_plain(&s.cube, &s.x)?;
        let norm = match resolvent_norm(&h, e, &setup.solver) {
            Ok(n) => n,
            Err(Error::ResolventBlowUp { .. }) => f64::INFINITY,
            Err(err) => return Err(err),
        };
        let acceptable = s.acceptability == AcceptabilityClass::Acceptable;
        Ok(WegnerRecord { seed: seed.value(), acceptable, resolvent_norm: norm, passes: acceptable && norm.ln() < log_threshold })
    });
    let recs: Vec<WegnerRecord> = recs.into_iter().collect::<Result<_>>()?;
    let passes = recs.iter().filter(|r| r.passes).count();
    let fraction = passes as f64 / trials as f64;
    let target = 1.0 - l.powf(-p);
    Ok((
        WegnerReport {
            scale: l,
            energy: e,
            c1,
            rho1,
            log_threshold,
            trials,
            acceptable: recs.iter().filter(|r| r.acceptable).count(),
            passes,
            fraction,
            target,
            meets_target: fraction >= target,
        },
        recs,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsaConstants {
    pub k1: usize,
    pub k2: usize,
    pub k_prime: usize,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsaConfig {
    pub setup: TrialSetup,
    /// Scales in increasing order.
    pub scales: Vec<f64>,
    pub energies: Vec<f64>,
    /// m₀.
    pub mass: f64,
    /// Exponent of the target 1 − L^{−p}.
    pub p: f64,
    pub rho1: f64,
    pub constants: MsaConstants,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsaReport {
    pub estimates: Vec<ScaleEstimate>,
    pub wegner: Vec<WegnerReport>,
    pub constants: MsaConstants,
    pub p: f64,
    pub mass: f64,
    pub all_targets_met: bool,
    /// Pass fractions never decrease with the scale, per energy.
    pub fractions_nondecreasing: bool,
    /// Every fitted mass is at least m₀/2.
    pub mass_retained: bool,
}

/// Output of one scale, handed to the caller as soon as it is done.
pub struct ScaleOutput<'a> {
    pub scale_index: usize,
    pub estimates: &'a [ScaleEstimate],
    pub records: &'a [TrialRecord],
    pub wegner: &'a [WegnerReport],
    pub wegner_records: &'a [WegnerRecord],
}

pub fn run_msa(config: &MsaConfig) -> Result<MsaReport> {
    run_msa_with(config, |_| Ok(()))
}

/// Runs every scale in turn; `sink` sees each scale's output before the next
/// one starts, so partial results survive a later failure.
pub fn run_msa_with<F>(config: &MsaConfig, mut sink: F) -> Result<MsaReport>
where
    F: FnMut(&ScaleOutput) -> Result<()>,
{
    if config.scales.is_empty() {
        return Err(Error::invalid("at least one scale is required"));
    }
    if config.scales.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("scales must be strictly increasing"));
    }
    let master = StreamSeed::new(config.seed);
    let mut estimates = Vec::new();
    let mut wegner = Vec::new();
    for (i, &l) in config.scales.iter().enumerate() {
        let (est, recs) = estimate_localizing_probability(
            &config.setup,
            l,
            &config.energies,
            config.mass,
            config.p,
            config.trials,
            master,
            i as u64,
        )?;
        let mut weg = Vec::new();
        let mut weg_recs = Vec::new();
        for (k, &e) in config.energies.iter().enumerate() {
            let (w, r) = wegner_measure(
                &config.setup,
                l,
                e,
                config.constants.c1,
                config.rho1,
                config.p,
                config.trials,
                master.split(k as u64 + 1),
                i as u64,
            )?;
            weg.push(w);
            weg_recs.extend(r);
        }
        sink(&ScaleOutput { scale_index: i, estimates: &est, records: &recs, wegner: &weg, wegner_records: &weg_recs })?;
        estimates.extend(est);
        wegner.extend(weg);
    }
    let ne = config.energies.len();
    let fractions_nondecreasing = (0..ne).all(|k| {
        let f: Vec<f64> = estimates.iter().skip(k).step_by(ne).map(|e| e.fraction).collect();
        f.windows(2).all(|w| w[1] >= w[0])
    });
    let mass_retained = estimates.iter().all(|e| e.fitted_mass.is_none_or(|m| m >= 0.5 * config.mass));
    let all_targets_met = estimates.iter().all(|e| e.meets_target) && wegner.iter().all(|w| w.meets_target);
    Ok(MsaReport {
        estimates,
        wegner,
        constants: config.constants,
        p: config.p,
        mass: config.mass,
        all_targets_met,
        fractions_nondecreasing,
        mass_retained,
    })
}

/// Default neighbourhood fraction for defect classification.
pub const DEFECT_NEIGHBOURHOOD: f64 = NEIGHBOURHOOD_CORE;
