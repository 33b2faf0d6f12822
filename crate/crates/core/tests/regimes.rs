//! Monte Carlo regimes at L = 16, d = 1.

use msalab::geometry::Cube;
use msalab::msa::{calibrate_cu, estimate_localizing_probability, initial_scale_params, wegner_measure, TrialSetup};
use msalab::operator::{dense_eigenvalues, Discretization, ProbeParams, SolverConfig};
use msalab::point_process::{sample_poisson, PoissonParams};
use msalab::rng::StreamSeed;

const L: f64 = 16.0;
const P: f64 = 0.37;

fn setup(density: f64) -> TrialSetup {
    TrialSetup {
        dim: 1,
        density,
        disc: Discretization::default(),
        kappa: 1.0,
        eps_scale: 0.05,
        eps_count: 0.05,
        probe: ProbeParams::default(),
        solver: SolverConfig::default(),
    }
}

/// E_L of the initial-scale construction at L = 16 with calibrated C_u.
fn construction_energy(rho: f64) -> f64 {
    let disc = Discretization::default();
    let cu = calibrate_cu(1, &disc, &[2.0, 3.0, 4.0, 6.0, 8.0], 32.0, &SolverConfig::default()).unwrap().c_u;
    initial_scale_params(1, rho, P, L, cu, 0.05, disc.profile.delta_plus).unwrap().e_l
}

fn fraction(rho: f64, e: f64, m: f64, trials: usize) -> f64 {
    let (est, _) = estimate_localizing_probability(&setup(rho), L, &[e], m, P, trials, StreamSeed::new(16), 0).unwrap();
    est[0].fraction
}

#[test]
fn small_energy_meets_target_and_beats_resonance() {
    let e0 = construction_energy(4.0);
    let m = 0.5 * e0.sqrt();
    let calm = fraction(4.0, e0, m, 200);
    assert!(calm >= 1.0 - L.powf(-P), "{calm}");

    // median eigenvalue of a typical sample
    let cube = Cube::centered(1, L).unwrap();
    let x = sample_poisson(&cube, &PoissonParams::new(4.0, 3).unwrap()).unwrap();
    let ev = dense_eigenvalues(&Discretization::default().assemble_plain(&cube, &x).unwrap());
    let resonant = fraction(4.0, ev[ev.len() / 2], m, 200);
    assert!(resonant < calm, "resonant {resonant} vs {calm}");
}

#[test]
fn wegner_in_the_gap() {
    let e0 = construction_energy(4.0);
    let (rep, recs) = wegner_measure(&setup(4.0), L, e0, 1.0, 0.74, P, 1000, StreamSeed::new(17), 0).unwrap();
    // E₀ sits far below the spectrum, so every failure is an acceptability one
    assert!(recs.iter().all(|r| r.resolvent_norm.is_finite() && r.resolvent_norm.ln() < rep.log_threshold));
    assert_eq!(rep.passes, rep.acceptable);
    assert!(rep.fraction >= 0.99, "{}", rep.fraction);
}

#[test]
fn denser_is_not_worse() {
    let f: Vec<f64> = [2.0, 4.0, 8.0].iter().map(|&rho| fraction(rho, 0.25, 0.25, 200)).collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]), "{f:?}");
}
