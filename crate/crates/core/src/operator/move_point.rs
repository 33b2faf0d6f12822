use serde::{Deserialize, Serialize};

use super::eigen::SolverConfig;
use super::goodness::Discretization;
use super::hamiltonian::DiscreteHamiltonian;
use super::resolvent::{distance_to_spectrum, probe_centers, Resolvent};
use crate::error::{Error, Result};
use crate::geometry::{distance, Cube};
use crate::point_process::Configuration;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum MovePointRegime {
    /// ‖R_ζ(E)‖ ≤ γ with γ ≥ 1.
    Bounded { gamma: f64 },
    /// dist(E, σ(H_ζ)) ≤ 1/β with β ≥ 2.
    NearSpectrum { beta: f64 },
}

/// Largest displacement permitted for a bound γ (or β):
/// min{(4√(1+E)‖w‖∞γ)^{−2}, 1/4}.
pub fn max_displacement(e: f64, w_sup: f64, gamma: f64) -> f64 {
    (4.0 * (1.0 + e).sqrt() * w_sup * gamma).powi(-2).min(0.25)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub before: f64,
    pub after: f64,
    pub permitted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovePointReport {
    pub displacement: f64,
    pub eta_max: f64,
    /// ‖R_ζ‖ and ‖R_ζ′‖ (bounded regime).
    pub norm_before: Option<f64>,
    pub norm_after: Option<f64>,
    /// e^{√η}γ.
    pub norm_permitted: Option<f64>,
    pub kernel: Vec<KernelCheck>,
    /// dist(E, σ(H_ζ)) and dist(E, σ(H_ζ′)) (near-spectrum regime).
    pub dist_before: Option<f64>,
    pub dist_after: Option<f64>,
    /// e^{√η}/β.
    pub dist_permitted: Option<f64>,
    /// Largest measured/permitted ratio over all checked quantities.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Moves the impurity at `zeta` to `zeta_prime` with the rest of the potential
/// given by `w_config`, and checks the move-point bounds.
#[allow(clippy::too_many_arguments)]
pub fn move_point_check(
    cube: &Cube,
    w_config: &Configuration,
    disc: &Discretization,
    zeta: &[f64],
    zeta_prime: &[f64],
    e: f64,
    regime: MovePointRegime,
    cfg: &SolverConfig,
) -> Result<MovePointReport> {
    if e < 0.0 {
        return Err(Error::Precondition(format!("energy must be nonnegative, got {e}")));
    }
    let reach = disc.profile.reach();
    for z in [zeta, zeta_prime] {
        let support = Cube::new(z.to_vec(), 2.0 * reach)?;
        if !cube.contains_cube(&support) {
            return Err(Error::Precondition("single-site support leaves the box".into()));
        }
        if w_config.contains_point(z) {
            return Err(Error::Precondition("moved impurity collides with the background".into()));
        }
    }
    let scale_param = match regime {
        MovePointRegime::Bounded { gamma } if gamma >= 1.0 => gamma,
        MovePointRegime::NearSpectrum { beta } if beta >= 2.0 => beta,
        _ => return Err(Error::Precondition("need γ ≥ 1 or β ≥ 2".into())),
    };
    let eta_max = max_displacement(e, disc.profile.sup(), scale_param);
    let displacement = distance(zeta, zeta_prime);
    if displacement > eta_max {
        return Err(Error::Precondition(format!("displacement {displacement:e} exceeds η = {eta_max:e}")));
    }
    // the bounds hold for every admissible η ≥ |ζ′ − ζ|; the smallest is the
    // sharpest
    let sqrt_eta = displacement.sqrt();

    let build = |z: &[f64]| -> Result<DiscreteHamiltonian> {
        let mut h = disc.assemble_plain(cube, w_config)?;
        h.add_impurity(z, 1.0, &disc.profile);
        Ok(h)
    };
    let h0 = build(zeta)?;
    let h1 = build(zeta_prime)?;

    let mut report = MovePointReport {
        displacement,
        eta_max,
        norm_before: None,
        norm_after: None,
        norm_permitted: None,
        kernel: Vec::new(),
        dist_before: None,
        dist_after: None,
        dist_permitted: None,
        worst_ratio: 0.0,
        holds: true,
    };

    match regime {
        MovePointRegime::Bounded { gamma } => {
            let mut r0 = Resolvent::new(&h0, e, cfg)?;
            if r0.norm() > gamma {
                return Err(Error::Precondition(format!("‖R_ζ‖ = {} exceeds γ = {gamma}", r0.norm())));
            }
            let mut r1 = Resolvent::new(&h1, e, cfg)?;
            let permitted = sqrt_eta.exp() * gamma;
            report.norm_before = Some(r0.norm());
            report.norm_after = Some(r1.norm());
            report.norm_permitted = Some(permitted);
            report.worst_ratio = r1.norm() / permitted;

            let centers = probe_centers(cube);
            for (i, x) in centers.iter().enumerate() {
                for y in &centers[i..] {
                    let before = r0.window_norm(x, y, 1.0);
                    let after = r1.window_norm(x, y, 1.0);
                    let allowed = before + sqrt_eta * gamma;
                    let ratio = if allowed > 0.0 { after / allowed } else if after == 0.0 { 1.0 } else { f64::INFINITY };
                    report.worst_ratio = report.worst_ratio.max(ratio);
                    report.kernel.push(KernelCheck { x: x.clone(), y: y.clone(), before, after, permitted: allowed });
                }
            }
        }
        MovePointRegime::NearSpectrum { beta } => {
            let d0 = distance_to_spectrum(&h0, e, cfg)?;
            if d0 > 1.0 / beta {
                return Err(Error::Precondition(format!("dist(E, σ(H_ζ)) = {d0} exceeds 1/β")));
            }
            let d1 = distance_to_spectrum(&h1, e, cfg)?;
            let permitted = sqrt_eta.exp() / beta;
            report.dist_before = Some(d0);
            report.dist_after = Some(d1);
            report.dist_permitted = Some(permitted);
            report.worst_ratio = d1 / permitted;
        }
    }
    report.holds = report.worst_ratio <= 1.0 + 1e-12;
    Ok(report)
}
