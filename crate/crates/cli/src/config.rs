//! Experiment configuration. Every section is optional; missing fields take
//! the defaults below and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use msalab::covering::{scale_ladder, LadderOverrides, ScaleLadder};
use msalab::msa::{default_k2, MsaConfig, MsaConstants, TrialSetup};
use msalab::operator::{Discretization, FreeSiteParams, ProbeParams, ProfileShape, SingleSiteProfile, SolverConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dimension: usize,
    /// ϱ.
    pub density: f64,
    pub profile: ProfileConfig,
    /// Grid spacing h; δ₋/8 when absent.
    pub spacing: Option<f64>,
    /// Explicit scales; take precedence over the ladder's.
    pub scales: Option<Vec<f64>>,
    pub ladder: Option<LadderConfig>,
    pub energy: EnergyConfig,
    /// m; ½√E₀ when absent.
    pub mass: Option<f64>,
    pub exponents: Exponents,
    pub constants: Constants,
    /// Target exponent in 1 − L^{−p}.
    pub p: f64,
    pub rho1: f64,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub probe: ProbeConfig,
    pub solver: SolverSection,
    pub sample: SampleSection,
    pub goodbox: GoodboxSection,
    pub measure: MeasureSection,
    pub covering: CoveringSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            density: 4.0,
            profile: ProfileConfig::default(),
            spacing: None,
            scales: None,
            ladder: None,
            energy: EnergyConfig::default(),
            mass: None,
            exponents: Exponents::default(),
            constants: Constants::default(),
            p: 0.37,
            rho1: 0.74,
            trials: 100,
            seed: 0,
            output: None,
            probe: ProbeConfig::default(),
            solver: SolverSection::default(),
            sample: SampleSection::default(),
            goodbox: GoodboxSection::default(),
            measure: MeasureSection::default(),
            covering: CoveringSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub u_plus: f64,
    pub u_minus: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub shape: ProfileShape,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        let p = SingleSiteProfile::default();
        Self { u_plus: p.u_plus, u_minus: p.u_minus, delta_plus: p.delta_plus, delta_minus: p.delta_minus, shape: p.shape }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub l0: f64,
    #[serde(default)]
    pub rho1: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub n1: Option<u32>,
    #[serde(default)]
    pub tau0: Option<f64>,
    /// Smallest allowed level; unchecked when absent.
    #[serde(default)]
    pub min_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub e0: f64,
    /// Explicit energies; otherwise `points` evenly spaced values in [0, E₀].
    pub grid: Option<Vec<f64>>,
    pub points: usize,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self { e0: 0.25, grid: None, points: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Exponents {
    pub eps0: f64,
    /// ε₁.
    pub eps_scale: f64,
    /// ε₂.
    pub eps_count: f64,
    pub kappa: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Self { eps0: 0.05, eps_scale: 0.05, eps_count: 0.05, kappa: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub k1: usize,
    /// (2(K′−1))^{n₁} when absent.
    pub k2: Option<usize>,
    pub k_prime: usize,
    pub c1: f64,
    pub corner_cap: usize,
    pub n_samples: usize,
}

impl Default for Constants {
    fn default() -> Self {
        Self { k1: 8, k2: None, k_prime: 4, c1: 1.0, corner_cap: 12, n_samples: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub full_pairs_max_side: f64,
    pub sampled_pairs: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        let p = ProbeParams::default();
        Self { full_pairs_max_side: p.full_pairs_max_side, sampled_pairs: p.sampled_pairs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dense_limit: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self { dense_limit: s.dense_limit, tol: s.tol, max_iter: s.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSection {
    pub mu_grid: Vec<f64>,
    pub k_max: u64,
    /// a in P{N ≥ aμ} < e^{−aμ}.
    pub deviation_a: f64,
    /// Also sample the marked process at 2ϱ and record the split.
    pub marked: bool,
}

impl Default for SampleSection {
    fn default() -> Self {
        Self { mu_grid: vec![0.5, 1.0, 2.0, 5.0, 10.0], k_max: 10, deviation_a: 8.0, marked: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoodboxSection {
    /// Also test each sample at its own eigenvalue nearest to E₀.
    pub resonant: bool,
    /// Run the free-site check with B from X and S from the sites of X′.
    pub free_sites: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSection {
    /// Moment exponent p in ⟨x⟩^p.
    pub moment_p: f64,
    pub taus: Vec<f64>,
    pub ss: Vec<f64>,
    pub nu: f64,
    /// Probes whose unit windows leave Λ_{L−margin} are skipped.
    pub margin: f64,
    /// Fit e^{−m|x|} on the first scale instead of sampling.
    pub synthetic_mass: Option<f64>,
    pub sudec: bool,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self { moment_p: 1.0, taus: vec![1.5], ss: vec![0.5], nu: 1.0, margin: 1.0, synthetic_mass: None, sudec: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoveringSection {
    pub ell: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_step: f64,
    pub dims: Vec<usize>,
}

impl Default for CoveringSection {
    fn default() -> Self {
        Self { ell: 1.0, ratio_min: 8.0, ratio_max: 40.0, ratio_step: 0.05, dims: vec![1, 2] }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn profile(&self) -> SingleSiteProfile {
        let p = self.profile;
        SingleSiteProfile { u_plus: p.u_plus, u_minus: p.u_minus, delta_plus: p.delta_plus, delta_minus: p.delta_minus, shape: p.shape }
    }

    pub fn disc(&self) -> Discretization {
        let profile = self.profile();
        Discretization { profile, spacing: self.spacing.unwrap_or(profile.delta_minus / 8.0) }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { dense_limit: self.solver.dense_limit, tol: self.solver.tol, max_iter: self.solver.max_iter }
    }

    pub fn energies(&self) -> Vec<f64> {
        match &self.energy.grid {
            Some(g) => g.clone(),
            None if self.energy.points <= 1 => vec![self.energy.e0],
            None => {
                let n = self.energy.points - 1;
                (0..=n).map(|i| self.energy.e0 * i as f64 / n as f64).collect()
            }
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass.unwrap_or(0.5 * self.energy.e0.sqrt())
    }

    pub fn free_site_params(&self, seed: u64) -> FreeSiteParams {
        FreeSiteParams { corner_cap: self.constants.corner_cap, n_samples: self.constants.n_samples, seed }
    }

    pub fn ladder(&self) -> Result<Option<ScaleLadder>, CliError> {
        let Some(l) = self.ladder else { return Ok(None) };
        let overrides = LadderOverrides {
            p: l.p,
            rho1: l.rho1.or(Some(self.rho1)),
            n1: l.n1,
            tau0: l.tau0,
            min_level: Some(l.min_level),
        };
        Ok(Some(scale_ladder(l.l0, self.dimension, &overrides)?))
    }

    /// Explicit scales, else L₀^{ρ₁ρ₂}, ℓ₁ = L₀^{ρ₁} and L₀ from the ladder.
    pub fn scales(&self) -> Result<Vec<f64>, CliError> {
        let ladder = self.ladder()?;
        if let Some(s) = &self.scales {
            return Ok(s.clone());
        }
        match ladder {
            Some(l) => {
                let mut s = vec![l.l0.powf(l.rho1 * l.rho2), l.ell1, l.l0];
                s.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
                Ok(s)
            }
            None => Err(CliError::Validation("config needs `scales` or `ladder`".into())),
        }
    }

    pub fn trial_setup(&self) -> TrialSetup {
        TrialSetup {
            dim: self.dimension,
            density: self.density,
            disc: self.disc(),
            kappa: self.exponents.kappa,
            eps_scale: self.exponents.eps_scale,
            eps_count: self.exponents.eps_count,
            probe: ProbeParams {
                full_pairs_max_side: self.probe.full_pairs_max_side,
                sampled_pairs: self.probe.sampled_pairs,
                seed: 0,
            },
            solver: self.solver(),
        }
    }

    pub fn msa_config(&self) -> Result<MsaConfig, CliError> {
        let ladder = self.ladder()?;
        let n1 = ladder.as_ref().map(|l| l.n1).unwrap_or(1);
        let c = self.constants;
        Ok(MsaConfig {
            setup: self.trial_setup(),
            scales: self.scales()?,
            energies: self.energies(),
            mass: self.mass(),
            p: self.p,
            rho1: ladder.as_ref().map(|l| l.rho1).unwrap_or(self.rho1),
            constants: MsaConstants { k1: c.k1, k2: c.k2.unwrap_or_else(|| default_k2(c.k_prime, 2, n1)), k_prime: c.k_prime, c1: c.c1 },
            trials: self.trials,
            seed: self.seed,
        })
    }

    /// Checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.dimension == 0 || self.dimension > 3 {
            return bad(format!("dimension must be 1, 2 or 3, got {}", self.dimension));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.energy.e0 > 0.0) {
            return bad(format!("E₀ must be positive, got {}", self.energy.e0));
        }
        if self.energies().iter().any(|e| !e.is_finite() || *e < 0.0) {
            return bad("energies must be finite and nonnegative".into());
        }
        if !(self.mass() > 0.0) {
            return bad("mass must be positive".into());
        }
        if !(self.p > 0.0) {
            return bad(format!("p must be positive, got {}", self.p));
        }
        if let Some(s) = &self.scales {
            if s.is_empty() || s.iter().any(|l| !(*l > 1.0)) {
                return bad("scales must be non-empty and exceed 1".into());
            }
        }
        self.trial_setup().validate()?;
        self.ladder()?;
        Ok(())
    }
}
