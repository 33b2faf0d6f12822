//! The six subcommands. Each writes its data files into the run directory
//! and reports whether its targets were met.

use rayon::prelude::*;
use serde::Serialize;

use msalab::covering::{nearest_compatible_scale, standard_covering, validate, CoveringValidation};
use msalab::geometry::Cube;
use msalab::lattice::{eta_of_scale, EtaGrid};
use msalab::measurement::{
    decay_moment_bound, decay_rate_fit, default_time_grid, dynamical_moment, multiplicity_histogram, sudec_sweep,
    window_eigenpairs, DecayFit, MultiplicityCluster, SudecSweepPoint,
};
use msalab::msa::{run_msa_with, trial_seed, wegner_measure, MsaReport, TrialRecord, WegnerRecord, WegnerReport};
use msalab::operator::{
    classify_free_good, classify_good, nearest_eigenvalue, DiscreteHamiltonian, GoodnessParams, GoodnessReport,
    ProbeParams, Verdict,
};
use msalab::point_process::{check_deviation_bounds, sample_marked, sample_poisson, split_marked, BoundCheck, PoissonParams};
use msalab::rng::StreamSeed;
use msalab::Error;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::RunDir;

/// Whether a run met its targets, with a one-line reason when it did not.
pub type Outcome = Result<(), String>;

fn check_label(c: &BoundCheck) -> &'static str {
    match c {
        BoundCheck::Holds { .. } => "holds",
        BoundCheck::Violated { .. } => "violated",
        BoundCheck::NotAsserted { .. } => "not_asserted",
    }
}

#[derive(Serialize)]
struct MarkedCounts {
    n_y: usize,
    n_x: usize,
    n_x_prime: usize,
    identity_holds: bool,
}

#[derive(Serialize)]
struct SampleRecord {
    scale: f64,
    trial: usize,
    seed: u64,
    count: usize,
    points: Vec<Vec<f64>>,
    marked: Option<MarkedCounts>,
}

#[derive(Serialize)]
struct TailRow {
    mu: f64,
    k: u64,
    a: f64,
    bracket: &'static str,
    large_deviation: &'static str,
    lower_tail: &'static str,
    c_k: Option<f64>,
}

#[derive(Serialize)]
struct CountRow {
    scale: f64,
    trials: usize,
    mu: f64,
    mean: f64,
    variance: f64,
    mean_z: f64,
}

pub fn sample(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Outcome, CliError> {
    let scales = cfg.scales()?;
    let master = StreamSeed::new(cfg.seed);
    let mut records = Vec::new();
    let mut counts = Vec::new();
    for (i, &l) in scales.iter().enumerate() {
        let cube = Cube::centered(cfg.dimension, l)?;
        let recs: Vec<Result<SampleRecord, Error>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(master, i as u64, t as u64);
                let x = sample_poisson(&cube, &PoissonParams::new(cfg.density, seed.value())?)?;
                let marked = if cfg.sample.marked {
                    let m = sample_marked(&cube, 2.0 * cfg.density, seed.split(1))?;
                    let (a, b) = split_marked(&m);
                    Some(MarkedCounts { n_y: m.len(), n_x: a.len(), n_x_prime: b.len(), identity_holds: a.len() + b.len() == m.len() })
                } else {
                    None
                };
                Ok(SampleRecord { scale: l, trial: t, seed: seed.value(), count: x.len(), points: x.points().to_vec(), marked })
            })
            .collect();
        let recs: Vec<SampleRecord> = recs.into_iter().collect::<Result<_, _>>()?;
        let mu = cfg.density * cube.volume();
        let n = recs.len() as f64;
        let mean = recs.iter().map(|r| r.count as f64).sum::<f64>() / n;
        let variance = recs.iter().map(|r| (r.count as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        counts.push(CountRow { scale: l, trials: recs.len(), mu, mean, variance, mean_z: (mean - mu) / (mu / n).sqrt() });
        records.extend(recs);
    }
    let mut tails = Vec::new();
    for &mu in &cfg.sample.mu_grid {
        for k in 1..=cfg.sample.k_max {
            let r = check_deviation_bounds(mu, cfg.sample.deviation_a, k)?;
            tails.push(TailRow {
                mu,
                k,
                a: cfg.sample.deviation_a,
                bracket: check_label(&r.bracket),
                large_deviation: check_label(&r.large_deviation),
                lower_tail: check_label(&r.lower_tail),
                c_k: r.c_k,
            });
        }
    }
    run.jsonl("samples.jsonl", &records)?;
    run.csv("tails.csv", &["mu", "k", "a", "bracket", "large_deviation", "lower_tail", "c_k"], &tails)?;
    run.csv("counts.csv", &["scale", "trials", "mu", "mean", "variance", "mean_z"], &counts)?;

    let violated = tails.iter().filter(|t| [t.bracket, t.large_deviation, t.lower_tail].contains(&"violated")).count();
    let split_bad = records.iter().filter(|r| r.marked.as_ref().is_some_and(|m| !m.identity_holds)).count();
    Ok(if violated + split_bad == 0 {
        Ok(())
    } else {
        Err(format!("{violated} tail checks violated, {split_bad} marked splits inconsistent"))
    })
}

#[derive(Serialize)]
struct GoodboxRecord {
    scale: f64,
    trial: usize,
    seed: u64,
    resonant: bool,
    free_good: Option<bool>,
    report: GoodnessReport,
}

#[derive(Serialize)]
struct GoodboxRow {
    scale: f64,
    energy: f64,
    trials: usize,
    good: usize,
    jgood: usize,
    bad: usize,
    pass_fraction: f64,
    free_good_fraction: Option<f64>,
}

fn goodness_params(cfg: &ExperimentConfig, l: f64, seed: StreamSeed) -> Result<GoodnessParams, Error> {
    Ok(GoodnessParams {
        eps_scale: cfg.exponents.eps_scale,
        eta: eta_of_scale(l, cfg.exponents.kappa)?,
        probe: ProbeParams { seed: seed.split(7).value(), ..cfg.trial_setup().probe },
        window_side: 1.0,
    })
}

pub fn goodbox(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Outcome, CliError> {
    let scales = cfg.scales()?;
    let energies = cfg.energies();
    let master = StreamSeed::new(cfg.seed);
    let disc = cfg.disc();
    let solver = cfg.solver();
    let m = cfg.mass();
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, &l) in scales.iter().enumerate() {
        let cube = Cube::centered(cfg.dimension, l)?;
        let per: Vec<Result<Vec<GoodboxRecord>, Error>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(master, i as u64, t as u64);
                let (x, xp) = split_marked(&sample_marked(&cube, 2.0 * cfg.density, seed)?);
                let h = disc.assemble_plain(&cube, &x)?;
                let params = goodness_params(cfg, l, seed)?;
                let mut out = Vec::new();
                for &e in &energies {
                    let report = classify_good(&h, e, m, &params, &solver)?;
                    let free_good = if cfg.goodbox.free_sites {
                        let grid = EtaGrid::new(cube.clone(), params.eta)?;
                        let s = msalab::point_process::Configuration::new(
                            cfg.dimension,
                            xp.points().iter().filter_map(|p| grid.site_of(p).map(|k| grid.site_center(&k))).collect(),
                        )?;
                        let s = if x.is_disjoint(&s) { s } else { msalab::point_process::Configuration::empty(cfg.dimension) };
                        let free = cfg.free_site_params(seed.split(11).value());
                        Some(classify_free_good(&cube, &x, &s, &disc, e, m, &params, &free, &solver)?.free_good)
                    } else {
                        None
                    };
                    out.push(GoodboxRecord { scale: l, trial: t, seed: seed.value(), resonant: false, free_good, report });
                }
                if cfg.goodbox.resonant {
                    let e = nearest_eigenvalue(&h, cfg.energy.e0, &solver)?;
                    let report = classify_good(&h, e, m, &params, &solver)?;
                    out.push(GoodboxRecord { scale: l, trial: t, seed: seed.value(), resonant: true, free_good: None, report });
                }
                Ok(out)
            })
            .collect();
        let mut recs = Vec::new();
        for r in per {
            recs.extend(r?);
        }
        for &e in &energies {
            let sel: Vec<&GoodboxRecord> = recs.iter().filter(|r| !r.resonant && r.report.energy == e).collect();
            let count = |v: Verdict| sel.iter().filter(|r| r.report.verdict == v).count();
            let frees: Vec<bool> = sel.iter().filter_map(|r| r.free_good).collect();
            rows.push(GoodboxRow {
                scale: l,
                energy: e,
                trials: sel.len(),
                good: count(Verdict::Good),
                jgood: count(Verdict::Jgood),
                bad: count(Verdict::Bad),
                pass_fraction: count(Verdict::Good) as f64 / sel.len() as f64,
                free_good_fraction: (!frees.is_empty())
                    .then(|| frees.iter().filter(|f| **f).count() as f64 / frees.len() as f64),
            });
        }
        records.extend(recs);
    }
    run.jsonl("goodbox.jsonl", &records)?;
    run.csv(
        "goodbox.csv",
        &["scale", "energy", "trials", "good", "jgood", "bad", "pass_fraction", "free_good_fraction"],
        &rows,
    )?;
    Ok(Ok(()))
}

const ESTIMATE_HEADER: &[&str] = &[
    "scale", "energy", "mass", "trials", "acceptable", "passes", "fraction", "ci_low", "ci_high", "target",
    "meets_target", "fitted_mass",
];
const WEGNER_HEADER: &[&str] = &[
    "scale", "energy", "c1", "rho1", "log_threshold", "trials", "acceptable", "passes", "fraction", "target",
    "meets_target",
];

#[derive(Serialize)]
struct WegnerLine<'a> {
    scale: f64,
    energy: f64,
    #[serde(flatten)]
    record: &'a WegnerRecord,
}

pub fn msa(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Outcome, CliError> {
    let config = cfg.msa_config()?;
    let mut trials: Vec<TrialRecord> = Vec::new();
    let mut estimates = Vec::new();
    let mut wegner: Vec<WegnerReport> = Vec::new();
    let mut wegner_lines: Vec<(f64, f64, WegnerRecord)> = Vec::new();
    let mut io_error = None;
    let result = run_msa_with(&config, |out| {
        trials.extend_from_slice(out.records);
        estimates.extend_from_slice(out.estimates);
        wegner.extend_from_slice(out.wegner);
        let per_energy = out.wegner_records.len() / out.wegner.len().max(1);
        for (k, w) in out.wegner.iter().enumerate() {
            for r in &out.wegner_records[k * per_energy..(k + 1) * per_energy] {
                wegner_lines.push((w.scale, w.energy, r.clone()));
            }
        }
        // persist what is done so far
        let lines: Vec<WegnerLine> =
            wegner_lines.iter().map(|(scale, energy, record)| WegnerLine { scale: *scale, energy: *energy, record }).collect();
        let written = run
            .jsonl("trials.jsonl", &trials)
            .and_then(|_| run.jsonl("wegner.jsonl", &lines))
            .and_then(|_| run.csv("scales.csv", ESTIMATE_HEADER, &estimates))
            .and_then(|_| run.csv("wegner.csv", WEGNER_HEADER, &wegner));
        match written {
            Ok(()) => Ok(()),
            Err(e) => {
                io_error = Some(e);
                Err(Error::Internal("output failed".into()))
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let report: MsaReport = result?;
    run.json("report.json", &report)?;
    Ok(if report.all_targets_met {
        Ok(())
    } else {
        let missed = report.estimates.iter().filter(|e| !e.meets_target).count()
            + report.wegner.iter().filter(|w| !w.meets_target).count();
        Err(format!("{missed} scale/energy targets below 1 − L^(-p)"))
    })
}

pub fn wegner(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Outcome, CliError> {
    let config = cfg.msa_config()?;
    let master = StreamSeed::new(cfg.seed);
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    for (i, &l) in config.scales.iter().enumerate() {
        for (k, &e) in config.energies.iter().enumerate() {
            let (rep, recs) = wegner_measure(
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
            lines.extend(recs.into_iter().map(|r| (l, e, r)));
            reports.push(rep);
        }
    }
    let lines: Vec<WegnerLine> = lines.iter().map(|(scale, energy, record)| WegnerLine { scale: *scale, energy: *energy, record }).collect();
    run.jsonl("wegner.jsonl", &lines)?;
    run.csv("wegner.csv", WEGNER_HEADER, &reports)?;
    let missed = reports.iter().filter(|r| !r.meets_target).count();
    Ok(if missed == 0 { Ok(()) } else { Err(format!("{missed} Wegner targets below 1 − L^(-p)")) })
}

#[derive(Serialize)]
struct FitSummary {
    state: usize,
    eigenvalue: f64,
    fit: Option<DecayFit>,
    error: Option<String>,
}

#[derive(Serialize)]
struct MeasureRecord {
    scale: f64,
    trial: usize,
    seed: u64,
    points: usize,
    eigenvalues: Vec<f64>,
    max_residual: f64,
    fits: Vec<FitSummary>,
    multiplicities: Vec<MultiplicityCluster>,
    moment_p: f64,
    moment_sup: f64,
    moment_bound: Option<f64>,
    sudec: Vec<SudecSweepPoint>,
    #[serde(skip)]
    moment: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct FitRow {
    scale: f64,
    trial: usize,
    state: usize,
    eigenvalue: f64,
    mass: f64,
    intercept: f64,
    r_squared: f64,
    log_envelope: f64,
}

#[derive(Serialize)]
struct ShellRow {
    scale: f64,
    trial: usize,
    state: usize,
    radius: f64,
    log_norm: f64,
}

#[derive(Serialize)]
struct MomentRow {
    scale: f64,
    trial: usize,
    t: f64,
    value: f64,
}

#[derive(Serialize)]
struct ClusterRow {
    scale: f64,
    trial: usize,
    eigenvalue: f64,
    multiplicity: usize,
}

#[derive(Serialize)]
struct SudecRow {
    scale: f64,
    trial: usize,
    tau: f64,
    s: f64,
    max_constant: f64,
}

fn measure_instance(cfg: &ExperimentConfig, h: &DiscreteHamiltonian) -> Result<MeasureRecord, Error> {
    let e0 = cfg.energy.e0;
    let w = window_eigenpairs(h, e0, &cfg.solver())?;
    let mut fits = Vec::with_capacity(w.len());
    for (k, v) in w.eigenvectors.iter().enumerate() {
        let (fit, error) = match decay_rate_fit(h, v, None) {
            Ok(f) => (Some(f), None),
            Err(Error::Domain(m)) => (None, Some(m)),
            Err(e) => return Err(e),
        };
        fits.push(FitSummary { state: k, eigenvalue: w.eigenvalues[k], fit, error });
    }
    let good_fits: Vec<DecayFit> = fits.iter().filter_map(|f| f.fit.clone()).collect();
    let trace = dynamical_moment(h, &w, cfg.measure.moment_p, &default_time_grid());
    let moment_bound = (good_fits.len() == w.len()).then(|| decay_moment_bound(h, &good_fits, cfg.measure.moment_p));
    let sudec = if cfg.measure.sudec && !w.is_empty() {
        sudec_sweep(h, &w, &cfg.measure.taus, &cfg.measure.ss, cfg.measure.nu, cfg.measure.margin)?
    } else {
        Vec::new()
    };
    Ok(MeasureRecord {
        scale: h.cube().side(),
        trial: 0,
        seed: 0,
        points: 0,
        eigenvalues: w.eigenvalues.clone(),
        max_residual: w.max_residual,
        fits,
        multiplicities: multiplicity_histogram(&w, 1e-8 * e0.max(1.0)),
        moment_p: cfg.measure.moment_p,
        moment_sup: trace.sup,
        moment_bound,
        sudec,
        moment: trace.times.iter().copied().zip(trace.values.iter().copied()).collect(),
    })
}

pub fn measure(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Outcome, CliError> {
    let scales = cfg.scales()?;
    let master = StreamSeed::new(cfg.seed);
    let disc = cfg.disc();
    let mut fit_rows = Vec::new();
    let mut shell_rows = Vec::new();

    if let Some(rate) = cfg.measure.synthetic_mass {
        let l = scales[0];
        let h = DiscreteHamiltonian::free(&Cube::centered(cfg.dimension, l)?, disc.spacing)?;
        let psi: Vec<f64> = (0..h.size())
            .map(|i| (-rate * h.node_position(i).iter().map(|v| v * v).sum::<f64>().sqrt()).exp())
            .collect();
        let fit = decay_rate_fit(&h, &psi, None)?;
        push_fit_rows(l, 0, 0, f64::NAN, &fit, &mut fit_rows, &mut shell_rows);
        write_fit_tables(run, &fit_rows, &shell_rows)?;
        run.json("synthetic.json", &fit)?;
        return Ok(Ok(()));
    }

    let mut records = Vec::new();
    for (i, &l) in scales.iter().enumerate() {
        let cube = Cube::centered(cfg.dimension, l)?;
        let recs: Vec<Result<MeasureRecord, Error>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(master, i as u64, t as u64);
                let x = sample_poisson(&cube, &PoissonParams::new(cfg.density, seed.value())?)?;
                let h = disc.assemble_plain(&cube, &x)?;
                let mut r = measure_instance(cfg, &h)?;
                r.trial = t;
                r.seed = seed.value();
                r.points = x.len();
                Ok(r)
            })
            .collect();
        for r in recs {
            records.push(r?);
        }
    }
    let mut moment_rows = Vec::new();
    let mut cluster_rows = Vec::new();
    let mut sudec_rows = Vec::new();
    for r in &records {
        for f in &r.fits {
            if let Some(fit) = &f.fit {
                push_fit_rows(r.scale, r.trial, f.state, f.eigenvalue, fit, &mut fit_rows, &mut shell_rows);
            }
        }
        moment_rows.extend(r.moment.iter().map(|&(t, value)| MomentRow { scale: r.scale, trial: r.trial, t, value }));
        cluster_rows.extend(r.multiplicities.iter().map(|c| ClusterRow {
            scale: r.scale,
            trial: r.trial,
            eigenvalue: c.eigenvalue,
            multiplicity: c.multiplicity,
        }));
        sudec_rows.extend(r.sudec.iter().map(|p| SudecRow {
            scale: r.scale,
            trial: r.trial,
            tau: p.tau,
            s: p.s,
            max_constant: p.max_constant,
        }));
    }
    run.jsonl("measure.jsonl", &records)?;
    write_fit_tables(run, &fit_rows, &shell_rows)?;
    run.csv("moments.csv", &["scale", "trial", "t", "value"], &moment_rows)?;
    run.csv("multiplicity.csv", &["scale", "trial", "eigenvalue", "multiplicity"], &cluster_rows)?;
    run.csv("sudec.csv", &["scale", "trial", "tau", "s", "max_constant"], &sudec_rows)?;
    Ok(Ok(()))
}

fn push_fit_rows(
    scale: f64,
    trial: usize,
    state: usize,
    eigenvalue: f64,
    fit: &DecayFit,
    fits: &mut Vec<FitRow>,
    shells: &mut Vec<ShellRow>,
) {
    fits.push(FitRow {
        scale,
        trial,
        state,
        eigenvalue,
        mass: fit.mass,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        log_envelope: fit.log_envelope,
    });
    shells.extend(fit.shells.iter().map(|&(radius, v)| ShellRow { scale, trial, state, radius, log_norm: v.ln() }));
}

fn write_fit_tables(run: &mut RunDir, fits: &[FitRow], shells: &[ShellRow]) -> Result<(), CliError> {
    run.csv(
        "fits.csv",
        &["scale", "trial", "state", "eigenvalue", "mass", "intercept", "r_squared", "log_envelope"],
        fits,
    )?;
    run.csv("decay.csv", &["scale", "trial", "state", "radius", "log_norm"], shells)
}

#[derive(Serialize)]
struct CoveringRow {
    dim: usize,
    big: f64,
    ell: f64,
    compatible: bool,
    nearest: f64,
    n: Option<u64>,
    alpha: Option<f64>,
    boxes: Option<usize>,
    alpha_admissible: Option<bool>,
    alpha_consistent: Option<bool>,
    coverage: Option<bool>,
    boundary_cover_literal: Option<bool>,
    boundary_cover_core: Option<bool>,
    core_disjoint: Option<bool>,
    cardinality_ok: Option<bool>,
}

#[derive(Serialize)]
struct CoveringSummary {
    pairs: usize,
    compatible: usize,
    incompatible: usize,
    core_properties_hold: bool,
    literal_neighbourhood_holds: bool,
    literal_counterexample: Option<(f64, f64)>,
}

/// Ratios on the configured grid together with the ends of every admissible
/// interval (1 + 1.2n, 1 + 1.6n] inside the range.
pub fn covering_ratios(min: f64, max: f64, step: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut k = 0u64;
    loop {
        let r = min + k as f64 * step;
        if r > max + 1e-12 {
            break;
        }
        out.push((r * 1e9).round() / 1e9);
        k += 1;
    }
    for n in 1..=((max / 1.2).ceil() as u64) {
        for r in [1.0 + 1.2 * n as f64 + 1e-9, 1.0 + 1.6 * n as f64] {
            if r >= min && r <= max {
                out.push(r);
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

pub fn covering_check(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Outcome, CliError> {
    let c = &cfg.covering;
    if !(c.ell > 0.0) || !(c.ratio_step > 0.0) || !(c.ratio_min > 1.0) || c.ratio_max < c.ratio_min {
        return Err(CliError::Validation("covering needs ell > 0, step > 0 and 1 < ratio_min ≤ ratio_max".into()));
    }
    let ratios = covering_ratios(c.ratio_min, c.ratio_max, c.ratio_step);
    let mut rows = Vec::new();
    let mut core_ok = true;
    let mut literal_ok = true;
    let mut counterexample = None;
    for &d in &c.dims {
        for &r in &ratios {
            let big = r * c.ell;
            let parent = Cube::centered(d, big)?;
            let mut row = CoveringRow {
                dim: d,
                big,
                ell: c.ell,
                compatible: false,
                nearest: nearest_compatible_scale(big, c.ell),
                n: None,
                alpha: None,
                boxes: None,
                alpha_admissible: None,
                alpha_consistent: None,
                coverage: None,
                boundary_cover_literal: None,
                boundary_cover_core: None,
                core_disjoint: None,
                cardinality_ok: None,
            };
            match standard_covering(&parent, c.ell) {
                Ok(plan) => {
                    let v: CoveringValidation = validate(&plan);
                    core_ok &= v.holds_core();
                    literal_ok &= v.holds_literal();
                    if counterexample.is_none() {
                        counterexample = v.literal_counterexample.map(|y| (big, y));
                    }
                    row.compatible = true;
                    row.n = Some(plan.n);
                    row.alpha = Some(plan.alpha);
                    row.boxes = Some(v.cardinality);
                    row.alpha_admissible = Some(v.alpha_admissible);
                    row.alpha_consistent = Some(v.alpha_consistent);
                    row.coverage = Some(v.coverage);
                    row.boundary_cover_literal = Some(v.boundary_cover_literal);
                    row.boundary_cover_core = Some(v.boundary_cover_core);
                    row.core_disjoint = Some(v.core_disjoint);
                    row.cardinality_ok = Some(v.cardinality_ok);
                }
                Err(Error::IncompatibleScales { .. }) => {}
                Err(e) => return Err(e.into()),
            }
            rows.push(row);
        }
    }
    let compatible = rows.iter().filter(|r| r.compatible).count();
    let summary = CoveringSummary {
        pairs: rows.len(),
        compatible,
        incompatible: rows.len() - compatible,
        core_properties_hold: core_ok,
        literal_neighbourhood_holds: literal_ok,
        literal_counterexample: counterexample,
    };
    run.csv(
        "coverings.csv",
        &[
            "dim", "big", "ell", "compatible", "nearest", "n", "alpha", "boxes", "alpha_admissible", "alpha_consistent",
            "coverage", "boundary_cover_literal", "boundary_cover_core", "core_disjoint", "cardinality_ok",
        ],
        &rows,
    )?;
    run.json("covering_summary.json", &summary)?;
    Ok(if core_ok { Ok(()) } else { Err("a compatible covering violates a core property".into()) })
}
