//! Acceptance run: one PASS/FAIL line per criterion, with its wall time.
//!
//! Criterion 7 is expected to fail: the literal 2ℓ/5 boundary neighbourhood
//! does not fit in one covering box for any α > 3/5 (see README).

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use serde_json::{json, Value};

use msalab::covering::{standard_covering, validate};
use msalab::geometry::distance;
use msalab::lattice::{classify_acceptable, EtaGrid};
use msalab::msa::{calibrate_cu, initial_scale_params};
use msalab::operator::{
    classify_good_config, combes_thomas_bound, dense_eigenvalues, distance_to_spectrum, lowest_eigenvalue,
    max_displacement, move_point_check, nearest_eigenvalue, probe_centers, resolvent_norm, DiscreteHamiltonian,
    Discretization, GoodnessParams, MovePointRegime, Resolvent, SolverConfig, Verdict,
};
use msalab::point_process::{
    check_deviation_bounds, sample_marked, sample_poisson, split_marked, tail_bracket, Configuration, PoissonParams,
};
use msalab::measurement::window_eigenpairs;
use msalab::rng::{mix64, StreamSeed};
use msalab::Cube;
use msalab_cli::commands::covering_ratios;
use msalab_cli::load_manifest;

type Res = Result<(bool, String), Box<dyn Error>>;

const EXPECTED_FAIL: &[usize] = &[7];

/// Uniform on [0, 1) from a seed and a counter.
fn unit(seed: u64, i: u64) -> f64 {
    (mix64(seed ^ mix64(i.wrapping_add(0x9e37_79b9))) >> 11) as f64 / (1u64 << 53) as f64
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_msalab"))
}

fn run_cli(cmd: &str, config: &Path, out: &Path, threads: usize) -> Result<i32, Box<dyn Error>> {
    let o = bin()
        .args([cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("MSALAB_THREADS", threads.to_string())
        .output()?;
    o.status.code().ok_or_else(|| "killed by a signal".into())
}

fn write_config(dir: &Path, name: &str, v: &Value) -> Result<PathBuf, Box<dyn Error>> {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_vec_pretty(v)?)?;
    Ok(p)
}

fn data_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, Box<dyn Error>> {
    let m = load_manifest(&dir.join("manifest.json"))?;
    m.files.iter().map(|f| Ok((f.name.clone(), fs::read(dir.join(&f.name))?))).collect()
}

fn c1_poisson() -> Res {
    let mus = [0.5, 1.0, 2.0, 5.0, 10.0];
    let mut brackets = 0;
    let mut bad = Vec::new();
    for &mu in &mus {
        for k in 1..=10u64 {
            let b = tail_bracket(mu, k)?;
            brackets += 1;
            if !b.holds() {
                bad.push(format!("bracket μ={mu} k={k}"));
            }
        }
    }
    let mut deviations = 0;
    for &mu in &mus {
        for a in [7.5, 8.0, 12.0, 20.0] {
            for k in 1..=10u64 {
                let r = check_deviation_bounds(mu, a, k)?;
                if !r.large_deviation.asserted() {
                    bad.push(format!("large deviation not asserted at μ={mu} a={a}"));
                }
                deviations += 1;
                if !r.all_pass() {
                    bad.push(format!("deviation μ={mu} a={a} k={k}"));
                }
            }
        }
    }
    // sampler moments: d = 2, ϱ = 2, box volume μ/ϱ
    let n = 10_000u64;
    let mut worst_z: f64 = 0.0;
    for (i, &mu) in mus.iter().enumerate() {
        let cube = Cube::centered(2, (mu / 2.0).sqrt())?;
        let master = StreamSeed::new(0xacce_0001).split(i as u64);
        let counts: Vec<f64> = (0..n)
            .map(|t| {
                let x = sample_poisson(&cube, &PoissonParams::new(2.0, master.split(t).value())?)?;
                if !x.points().iter().all(|p| cube.contains(p)) {
                    return Err(msalab::Error::Internal("point outside the box".into()));
                }
                Ok(x.len() as f64)
            })
            .collect::<Result<_, _>>()?;
        let nf = n as f64;
        let mean = counts.iter().sum::<f64>() / nf;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let z_mean = (mean - mu) / (mu / nf).sqrt();
        let z_var = (var - mu) / ((mu + 2.0 * mu * mu) / nf).sqrt();
        worst_z = worst_z.max(z_mean.abs()).max(z_var.abs());
    }
    if worst_z >= 4.0 {
        bad.push(format!("sampler z = {worst_z:.2}"));
    }
    Ok((
        bad.is_empty(),
        format!("{brackets} brackets, {deviations} deviation checks, sampler max |z| = {worst_z:.2} over 10^4 trials {bad:?}"),
    ))
}

fn c2_marked() -> Res {
    let master = StreamSeed::new(0xacce_0002);
    let mut boxes = 0;
    let mut mismatches = 0;
    for t in 0..1000u64 {
        let d = 1 + (t % 2) as usize;
        let side = 3.0 + (t % 11) as f64;
        let cube = Cube::centered(d, side)?;
        let m = sample_marked(&cube, 2.0 * 1.5, master.split(t))?;
        let (x, xp) = split_marked(&m);
        let y = m.support();
        if !x.is_disjoint(&xp) {
            mismatches += 1;
        }
        let mut subs = vec![cube.clone()];
        for s in 0..4u64 {
            let c: Vec<f64> = (0..d).map(|a| (unit(t, 4 * s + a as u64) - 0.5) * side * 0.5).collect();
            subs.push(Cube::new(c, side * (0.25 + 0.5 * unit(t, 100 + s)))?);
        }
        for b in &subs {
            boxes += 1;
            if x.count_in(b) + xp.count_in(b) != y.count_in(b) {
                mismatches += 1;
            }
        }
    }
    Ok((mismatches == 0, format!("{boxes} boxes over 10^3 trials, {mismatches} mismatches")))
}

fn free_levels_1d(l: f64, h: f64) -> Vec<f64> {
    let n = (l / h).round() as usize - 1;
    (1..=n)
        .map(|k| 4.0 / (h * h) * (k as f64 * std::f64::consts::PI * h / (2.0 * l)).sin().powi(2))
        .collect()
}

fn c3_free_spectrum() -> Res {
    let h = 0.125;
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut compare = |got: &[f64], want: &[f64]| -> bool {
        if got.len() != want.len() {
            return false;
        }
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs() / w.abs().max(1.0));
        }
        checked += got.len();
        true
    };
    let mut counts_ok = true;
    for l in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let ham = DiscreteHamiltonian::free(&Cube::centered(1, l)?, h)?;
        counts_ok &= compare(&dense_eigenvalues(&ham), &free_levels_1d(l, h));
    }
    for l in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let mu = free_levels_1d(l, h);
        let mut want: Vec<f64> = mu.iter().flat_map(|a| mu.iter().map(move |b| a + b)).collect();
        want.sort_by(|a, b| a.total_cmp(b));
        let ham = DiscreteHamiltonian::free(&Cube::centered(2, l)?, h)?;
        if l <= 4.0 {
            counts_ok &= compare(&dense_eigenvalues(&ham), &want);
        } else {
            // lowest part of the spectrum, cut in a gap of the closed form
            let cut = (12..want.len() - 1).find(|&i| want[i + 1] - want[i] > 1e-3).ok_or("no gap")?;
            let e0 = 0.5 * (want[cut] + want[cut + 1]);
            let w = window_eigenpairs(&ham, e0, &SolverConfig { dense_limit: 0, ..cfg })?;
            counts_ok &= compare(&w.eigenvalues, &want[..=cut]);
        }
    }
    Ok((
        counts_ok && worst <= 1e-10,
        format!("{checked} eigenvalues (d=1,2; L ≤ 16; h = 1/8), max relative error {worst:.1e}"),
    ))
}

fn c4_cu(disc: &Discretization) -> Result<(bool, String, f64), Box<dyn Error>> {
    let sweep = [2.0, 3.0, 4.0, 6.0, 8.0];
    let cal = calibrate_cu(1, disc, &sweep, 32.0, &SolverConfig::default())?;
    let c = cal.c_u;
    let mut ok = cal.samples.iter().all(|s| s.lambda1 > 0.0);
    let argmin = cal
        .samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.scaled.total_cmp(&b.1.scaled))
        .map(|(i, _)| i)
        .ok_or("empty sweep")?;
    let mut margins = Vec::new();
    for (i, s) in cal.samples.iter().enumerate() {
        let floor = 2.0 * c * s.delta0.powi(-4);
        let rel = s.lambda1 / floor - 1.0;
        margins.push(format!("{}:{rel:.2}", s.delta0));
        ok &= if i == argmin { rel.abs() < 1e-12 } else { rel > 0.0 };
    }
    Ok((ok, format!("C_u = {c:.4}, tight at δ₀ = {}, λ₁/floor − 1 = [{}]", cal.samples[argmin].delta0, margins.join(" ")), c))
}

fn c5_combes_thomas(disc: &Discretization) -> Res {
    let cfg = SolverConfig::default();
    let cube = Cube::centered(1, 16.0)?;
    let centers = probe_centers(&cube);
    let master = StreamSeed::new(0xacce_0005);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for t in 0..20u64 {
        let x = sample_poisson(&cube, &PoissonParams::new(2.0 + (t % 4) as f64, master.split(t).value())?)?;
        let h = disc.assemble_plain(&cube, &x)?;
        let e0 = 0.5 * lowest_eigenvalue(&h, &cfg)?;
        for e in [0.0, 0.5 * e0, e0] {
            let mut r = Resolvent::new(&h, e, &cfg)?;
            for (i, a) in centers.iter().enumerate() {
                for b in &centers[i + 1..] {
                    let dist = distance(a, b);
                    if dist < 4.0 {
                        continue;
                    }
                    pairs += 1;
                    worst = worst.max(r.window_norm(a, b, 1.0) / (1.1 * combes_thomas_bound(e0, dist)));
                }
            }
        }
    }
    Ok((worst <= 1.0, format!("20 instances, {pairs} pair checks, worst ratio to 1.1·bound {worst:.3}")))
}

fn c6_move_point(disc: &Discretization) -> Res {
    let cfg = SolverConfig::default();
    let cube = Cube::centered(1, 8.0)?;
    let reach = disc.profile.reach();
    let sup = disc.profile.sup();
    let master = StreamSeed::new(0xacce_0006);
    let (mut norm_worst, mut dist_worst): (f64, f64) = (0.0, 0.0);
    let mut failures = 0;
    for t in 0..100u64 {
        let s = master.split(t).value();
        let bg = sample_poisson(&cube, &PoissonParams::new(1.5, s)?)?;
        let zeta = vec![(unit(s, 1) - 0.5) * (8.0 - 2.0 * reach - 0.1)];
        if bg.contains_point(&zeta) {
            continue;
        }
        let mut h0 = disc.assemble_plain(&cube, &bg)?;
        h0.add_impurity(&zeta, 1.0, &disc.profile);

        let e_b = 3.0 * unit(s, 2);
        let gamma = resolvent_norm(&h0, e_b, &cfg)?.max(1.0);
        let near = nearest_eigenvalue(&h0, 3.0 * unit(s, 3), &cfg)?;
        let e_n = (near + 0.8 * (unit(s, 4) - 0.5)).max(0.0);
        // slightly below 1/dist so the precondition survives rounding
        let beta = (0.999 / distance_to_spectrum(&h0, e_n, &cfg)?).clamp(2.0, 1e12);

        let eta = max_displacement(e_b, sup, gamma).min(max_displacement(e_n, sup, beta));
        let sign = if unit(s, 5) < 0.5 { -1.0 } else { 1.0 };
        let zp = vec![zeta[0] + sign * eta * unit(s, 6)];
        let a = move_point_check(&cube, &bg, disc, &zeta, &zp, e_b, MovePointRegime::Bounded { gamma }, &cfg)?;
        let b = move_point_check(&cube, &bg, disc, &zeta, &zp, e_n, MovePointRegime::NearSpectrum { beta }, &cfg)?;
        norm_worst = norm_worst.max(a.worst_ratio);
        dist_worst = dist_worst.max(b.worst_ratio);
        failures += usize::from(!a.holds) + usize::from(!b.holds);
    }
    Ok((
        failures == 0,
        format!("100 displacements, worst measured/permitted: norm {norm_worst:.4}, spectral distance {dist_worst:.4}"),
    ))
}

fn c7_covering() -> Res {
    let ell = 1.0;
    let mut pairs = 0;
    let mut core_fail = 0;
    let mut literal_fail = 0;
    let mut example = None;
    for d in [1, 2] {
        for r in covering_ratios(8.0, 40.0, 0.05) {
            let plan = standard_covering(&Cube::centered(d, r * ell)?, ell)?;
            let v = validate(&plan);
            pairs += 1;
            core_fail += usize::from(!v.holds_core());
            if !v.holds_literal() {
                literal_fail += 1;
                example.get_or_insert((d, r, v.literal_counterexample));
            }
        }
    }
    let incompatible = [2.0, 3.0, 4.4];
    let rejected = incompatible.iter().filter(|&&r| standard_covering(&Cube::centered(1, r).unwrap(), ell).is_err()).count();
    let ok = core_fail == 0 && literal_fail == 0 && rejected == incompatible.len();
    Ok((
        ok,
        format!(
            "{pairs} compatible pairs (d=1,2; L/ℓ ∈ [8, 40]): coverage, ℓ/5 neighbourhood, core disjointness and \
             cardinality fail on {core_fail}; literal 2ℓ/5 neighbourhood fails on {literal_fail} (first: {example:?}); \
             {rejected}/{} incompatible ratios rejected",
            incompatible.len()
        ),
    ))
}

fn c8_stability(disc: &Discretization) -> Res {
    let cfg = SolverConfig::default();
    let cube = Cube::centered(1, 8.0)?;
    let grid = EtaGrid::for_scale(cube.clone(), 1.0)?;
    let eta = grid.eta();
    let params = GoodnessParams { eta, ..GoodnessParams::default() };
    let (e, m) = (0.25, 0.25);
    let master = StreamSeed::new(0xacce_0008);
    let mut configs = 0;
    let mut verdicts = [0usize; 3];
    let (mut soft, mut hard) = (0, 0);
    let mut t = 0u64;
    while configs < 50 {
        let s = master.split(t).value();
        t += 1;
        let x = sample_poisson(&cube, &PoissonParams::new(4.0, s)?)?;
        if !classify_acceptable(&x, &grid, 4.0).is_acceptable() {
            continue;
        }
        configs += 1;
        let base = classify_good_config(&cube, &x, disc, e, m, &params, &cfg)?.verdict;
        for q in 0..10u64 {
            let pts = x
                .points()
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let site = grid.inner_site_of(p).ok_or("acceptable point outside its inner cell")?;
                    let c = grid.site_center(&site);
                    let u = unit(s ^ q.wrapping_mul(0x51ed), i as u64) - 0.5;
                    let np = vec![c[0] + 0.999 * u * eta * (1.0 - eta)];
                    if grid.inner_site_of(&np) != Some(site) {
                        return Err("perturbation left the cell".into());
                    }
                    Ok(np)
                })
                .collect::<Result<Vec<_>, Box<dyn Error>>>()?;
            let v = classify_good_config(&cube, &Configuration::new(1, pts)?, disc, e, m, &params, &cfg)?.verdict;
            verdicts[v as usize] += 1;
            if v != base {
                // good and jgood may trade places; a good box never turns bad
                if v.is_jgood() == base.is_jgood() {
                    soft += 1;
                } else if base == Verdict::Good || v == Verdict::Good {
                    hard += 1;
                } else {
                    soft += 1;
                }
            }
        }
    }
    Ok((
        hard == 0,
        format!(
            "50 acceptable boxes × 10 perturbations: good/jgood/bad = {}/{}/{}, {soft} slack changes, {hard} good↔bad flips",
            verdicts[0], verdicts[1], verdicts[2]
        ),
    ))
}

struct Runs {
    dir: tempfile::TempDir,
    dirs: Vec<(String, PathBuf)>,
}

fn c9_msa(runs: &mut Runs, c_u: f64, disc: &Discretization) -> Res {
    let scales = [8.0, 16.0, 32.0];
    let p = 0.37;
    let construction = |rho: f64| -> Result<(f64, f64), Box<dyn Error>> {
        let mut e0 = f64::INFINITY;
        for l in scales {
            e0 = e0.min(initial_scale_params(1, rho, p, l, c_u, 0.05, disc.profile.delta_plus)?.e_l);
        }
        Ok((e0, 0.5 * e0.sqrt()))
    };
    let config = |rho: f64, trials: usize| -> Result<Value, Box<dyn Error>> {
        let (e0, m0) = construction(rho)?;
        Ok(json!({
            "dimension": 1, "density": rho, "scales": scales, "p": p, "trials": trials, "seed": 9,
            "energy": {"e0": e0, "grid": [0.0, 0.5 * e0, e0]}, "mass": m0,
        }))
    };
    // calibration: smallest density meeting every target on a short run
    let mut rho_star = None;
    for rho in [1.0, 2.0, 4.0] {
        let c = write_config(runs.dir.path(), &format!("c9_rho{rho}.json"), &config(rho, 100)?)?;
        if run_cli("msa", &c, &runs.dir.path().join(format!("c9_rho{rho}")), 1)? == 0 {
            rho_star = Some(rho);
            break;
        }
    }
    let rho_star = rho_star.ok_or("no density in the sweep met the targets")?;
    let c_cal = rho_star / 32f64.ln();
    let rho = 4.0;
    let c = write_config(runs.dir.path(), "c9.json", &config(rho, 500)?)?;
    let out = runs.dir.path().join("c9");
    let code = run_cli("msa", &c, &out, 1)?;
    runs.dirs.push(("msa".into(), out.clone()));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json"))?)?;
    let mut parts = Vec::new();
    let mut ok = code == 0 && scales.iter().all(|l| rho >= c_cal * l.ln());
    for (est, weg) in report["estimates"].as_array().ok_or("estimates")?.iter().zip(report["wegner"].as_array().ok_or("wegner")?) {
        ok &= est["meets_target"] == true && weg["meets_target"] == true;
        if est["energy"].as_f64() == Some(0.0) || est == &report["estimates"][2] {
            parts.push(format!(
                "L={} E={:.4}: {:.3}/{:.3} (wegner {:.3})",
                est["scale"], est["energy"].as_f64().unwrap_or(f64::NAN), est["fraction"].as_f64().unwrap_or(f64::NAN),
                est["target"].as_f64().unwrap_or(f64::NAN), weg["fraction"].as_f64().unwrap_or(f64::NAN)
            ));
        }
    }
    let (e0, m0) = construction(rho)?;
    Ok((
        ok,
        format!(
            "C = {c_cal:.3} (ϱ* = {rho_star}), ϱ = {rho}, E₀ = {e0:.4}, m₀ = {m0:.4}, 500 trials: {}",
            parts.join("; ")
        ),
    ))
}

fn c10_signatures(runs: &mut Runs) -> Res {
    // the density of the localization run; most boxes then have no spectrum
    // below E₀, so the first 20 instances with a non-empty window are used
    let cfg = json!({"density": 4.0, "scales": [32], "trials": 400, "seed": 10, "energy": {"e0": 1.5}});
    let c = write_config(runs.dir.path(), "c10.json", &cfg)?;
    let out = runs.dir.path().join("c10");
    let code = run_cli("measure", &c, &out, 1)?;
    runs.dirs.push(("measure".into(), out.clone()));
    let mut ok = code == 0;
    let (mut states, mut min_mass, mut min_r2) = (0, f64::INFINITY, f64::INFINITY);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let (mut instances, mut scanned, mut clusters) = (0, 0, 0);
    for line in fs::read_to_string(out.join("measure.jsonl"))?.lines() {
        let r: Value = serde_json::from_str(line)?;
        scanned += 1;
        let n = r["eigenvalues"].as_array().ok_or("eigenvalues")?.len();
        if n == 0 {
            continue;
        }
        instances += 1;
        for f in r["fits"].as_array().ok_or("fits")? {
            states += 1;
            let m = f["fit"]["mass"].as_f64().unwrap_or(f64::NAN);
            let r2 = f["fit"]["r_squared"].as_f64().unwrap_or(f64::NAN);
            min_mass = min_mass.min(m);
            min_r2 = min_r2.min(r2);
            ok &= m > 0.0 && r2 >= 0.9;
        }
        let cl = r["multiplicities"].as_array().ok_or("multiplicities")?;
        clusters += cl.len();
        ok &= cl.iter().map(|c| c["multiplicity"].as_u64().unwrap_or(0) as usize).sum::<usize>() == n;
        let sup = r["moment_sup"].as_f64().unwrap_or(f64::NAN);
        let bound = r["moment_bound"].as_f64().unwrap_or(f64::NAN);
        ok &= sup.is_finite() && sup <= 2.0 * bound;
        lo = lo.min(sup / bound);
        hi = hi.max(sup / bound);
        if instances == 20 {
            break;
        }
    }
    ok &= instances == 20;
    Ok((
        ok,
        format!(
            "{instances} instances with states (ϱ=4, E₀=1.5, L=32; {scanned} sampled): {states} states, \
             min m̂ {min_mass:.3}, min r² {min_r2:.3}, moment sup/bound ∈ [{lo:.1e}, {hi:.1e}], {clusters} clusters"
        ),
    ))
}

fn c11_reproducible(runs: &mut Runs) -> Res {
    let small = [
        ("sample", json!({"density": 2.0, "scales": [6, 10], "trials": 20, "seed": 1})),
        ("goodbox", json!({"density": 4.0, "scales": [8], "trials": 12, "seed": 2})),
        ("wegner", json!({"density": 4.0, "scales": [8, 12], "trials": 16, "seed": 3})),
        ("covering-check", json!({"scales": [8], "covering": {"ratio_min": 2, "ratio_max": 12, "ratio_step": 0.5}})),
    ];
    for (cmd, cfg) in small {
        let c = write_config(runs.dir.path(), &format!("{cmd}.json"), &cfg)?;
        let out = runs.dir.path().join(cmd);
        if run_cli(cmd, &c, &out, 1)? != 0 {
            return Ok((false, format!("{cmd} failed")));
        }
        runs.dirs.push((cmd.to_string(), out));
    }
    let mut same = 0;
    let mut differing = Vec::new();
    let mut bytes = 0;
    for (i, (cmd, dir)) in runs.dirs.iter().enumerate() {
        let rerun = runs.dir.path().join(format!("rerun{i}"));
        let first = load_manifest(&dir.join("manifest.json"))?;
        let code = run_cli(cmd, &dir.join("config.json"), &rerun, 4)?;
        let second = load_manifest(&rerun.join("manifest.json"))?;
        let a = data_files(dir)?;
        if code == first.exit_code && a == data_files(&rerun)? && first.config_hash == second.config_hash {
            same += 1;
            bytes += a.iter().map(|(_, b)| b.len()).sum::<usize>();
        } else {
            differing.push(cmd.clone());
        }
    }
    Ok((
        differing.is_empty(),
        format!(
            "{same}/{} experiments byte-identical when rerun from config.json under MSALAB_THREADS 1 vs 4 ({bytes} bytes) {differing:?}",
            runs.dirs.len()
        ),
    ))
}

fn main() -> ExitCode {
    let disc = Discretization::default();
    let mut runs = Runs { dir: tempfile::tempdir().expect("temporary directory"), dirs: Vec::new() };
    let mut c_u = None;
    let mut unexpected = Vec::new();
    let mut passed = 0;
    // ACCEPTANCE_ONLY=3,5 runs a subset; criterion 9 needs 4
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut skipped = 0;

    for id in 1..=11usize {
        let limit = [10.0, 5.0, 30.0, 120.0, 120.0, 120.0, 60.0, 300.0, 1800.0, 600.0, f64::INFINITY][id - 1];
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            skipped += 1;
            continue;
        }
        let start = Instant::now();
        let result: Res = match id {
            1 => c1_poisson(),
            2 => c2_marked(),
            3 => c3_free_spectrum(),
            4 => c4_cu(&disc).map(|(ok, s, c)| {
                c_u = Some(c);
                (ok, s)
            }),
            5 => c5_combes_thomas(&disc),
            6 => c6_move_point(&disc),
            7 => c7_covering(),
            8 => c8_stability(&disc),
            9 => match c_u {
                Some(c) => c9_msa(&mut runs, c, &disc),
                None => Err("C_u calibration failed".into()),
            },
            10 => c10_signatures(&mut runs),
            _ => c11_reproducible(&mut runs),
        };
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
        let in_time = secs <= limit;
        let pass = ok && in_time;
        let limit_text = if limit.is_finite() { format!("limit {limit} s") } else { "no limit".into() };
        let timing = if in_time { String::new() } else { " over the time limit".into() };
        println!(
            "criterion {id:>2}: {} {detail}{timing} ({secs:.1} s, {limit_text})",
            if pass { "PASS" } else { "FAIL" }
        );
        if pass {
            passed += 1;
        } else if !EXPECTED_FAIL.contains(&id) {
            unexpected.push(id);
        }
    }
    println!("acceptance: {passed}/{} pass; expected failures {EXPECTED_FAIL:?}; unexpected failures {unexpected:?}", 11 - skipped);
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
