use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eigen::SolverConfig;
use super::hamiltonian::DiscreteHamiltonian;
use super::profile::SingleSiteProfile;
use super::resolvent::{probe_centers, probe_pairs, ProbeParams, Resolvent};
use crate::error::{Error, Result};
use crate::geometry::{distance, Cube};
use crate::point_process::Configuration;
use crate::rng::StreamSeed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessParams {
    /// ε₁ in the norm threshold e^{L^{1−ε₁}}.
    pub eps_scale: f64,
    /// η of the box's grid; the jgood slack is η^{1/4}.
    pub eta: f64,
    pub probe: ProbeParams,
    pub window_side: f64,
}

impl Default for GoodnessParams {
    fn default() -> Self {
        Self { eps_scale: 0.05, eta: 0.0, probe: ProbeParams::default(), window_side: 1.0 }
    }
}

impl GoodnessParams {
    pub fn jgood_slack(&self) -> f64 {
        self.eta.powf(0.25)
    }

    /// ln of the norm threshold, L^{1−ε₁}.
    pub fn log_norm_threshold(&self, l: f64) -> f64 {
        l.powf(1.0 - self.eps_scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Good,
    Jgood,
    Bad,
}

impl Verdict {
    /// Good or jgood.
    pub fn is_jgood(self) -> bool {
        self != Verdict::Bad
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub energy: f64,
    pub mass: f64,
    pub scale: f64,
    /// +∞ when E is on the spectrum.
    pub resolvent_norm: f64,
    pub log_norm_threshold: f64,
    pub decay_samples: Vec<DecaySample>,
    pub verdict: Verdict,
    pub jgood_slack: f64,
    /// L^{1−ε₁} − ln‖R‖; negative when the norm condition fails.
    pub norm_margin: f64,
    /// min over samples of (−m|x−y| − ln value); negative when some decay
    /// sample exceeds e^{−m|x−y|}.
    pub decay_margin: f64,
}

impl GoodnessReport {
    fn bad_on_spectrum(e: f64, m: f64, l: f64, params: &GoodnessParams) -> Self {
        Self {
            energy: e,
            mass: m,
            scale: l,
            resolvent_norm: f64::INFINITY,
            log_norm_threshold: params.log_norm_threshold(l),
            decay_samples: Vec::new(),
            verdict: Verdict::Bad,
            jgood_slack: params.jgood_slack(),
            norm_margin: f64::NEG_INFINITY,
            decay_margin: f64::NEG_INFINITY,
        }
    }

    /// min over samples of −ln(value)/|x−y|: the largest m the samples allow.
    pub fn fitted_mass(&self) -> Option<f64> {
        self.decay_samples
            .iter()
            .map(|s| -s.value.ln() / s.distance)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Decides whether the box of `h` is (E, m)-good, jgood or bad.
pub fn classify_good(
    h: &DiscreteHamiltonian,
    e: f64,
    m: f64,
    params: &GoodnessParams,
    cfg: &SolverConfig,
) -> Result<GoodnessReport> {
    let l = h.cube().side();
    let mut res = match Resolvent::new(h, e, cfg) {
        Ok(r) => r,
        Err(Error::ResolventBlowUp { .. }) => return Ok(GoodnessReport::bad_on_spectrum(e, m, l, params)),
        Err(err) => return Err(err),
    };
    let norm = res.norm();
    let log_thr = params.log_norm_threshold(l);
    let slack = params.jgood_slack();

    let centers = probe_centers(h.cube());
    let pairs = probe_pairs(h.cube(), &centers, &params.probe);
    let nodes: Vec<Vec<usize>> = centers.iter().map(|c| h.window_nodes(c, params.window_side)).collect();

    // group by column window so each solve is reused
    let mut by_col: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (i, j) in &pairs {
        by_col[*j].push(*i);
    }
    let mut samples = Vec::with_capacity(pairs.len());
    for (j, rows) in by_col.iter().enumerate() {
        for &i in rows {
            let block = res.block(&nodes[i], &nodes[j]);
            samples.push(DecaySample {
                x: centers[i].clone(),
                y: centers[j].clone(),
                distance: distance(&centers[i], &centers[j]),
                value: super::linalg::spectral_norm(&block),
            });
        }
        res.clear_cache();
    }

    let ln_norm = norm.ln();
    let norm_margin = log_thr - ln_norm;
    let decay_margin = samples
        .iter()
        .map(|s| -m * s.distance - s.value.ln())
        .fold(f64::INFINITY, f64::min);
    let good = norm_margin >= 0.0 && decay_margin >= 0.0;
    let jgood = ln_norm <= log_thr + slack
        && samples.iter().all(|s| s.value <= (-m * s.distance).exp() + slack);
    let verdict = if good {
        Verdict::Good
    } else if jgood {
        Verdict::Jgood
    } else {
        Verdict::Bad
    };
    Ok(GoodnessReport {
        energy: e,
        mass: m,
        scale: l,
        resolvent_norm: norm,
        log_norm_threshold: log_thr,
        decay_samples: samples,
        verdict,
        jgood_slack: slack,
        norm_margin,
        decay_margin,
    })
}

/// Discretisation used to turn configurations into operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub profile: SingleSiteProfile,
    pub spacing: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        let profile = SingleSiteProfile::default();
        Self { profile, spacing: profile.delta_minus / 8.0 }
    }
}

impl Discretization {
    pub fn assemble(&self, cube: &Cube, x: &Configuration, y: &Configuration, t: &[f64]) -> Result<DiscreteHamiltonian> {
        DiscreteHamiltonian::assemble(cube, x, y, t, &self.profile, self.spacing)
    }

    pub fn assemble_plain(&self, cube: &Cube, x: &Configuration) -> Result<DiscreteHamiltonian> {
        self.assemble(cube, x, &Configuration::empty(cube.dim()), &[])
    }
}

/// [`classify_good`] for H_{X,Λ}.
pub fn classify_good_config(
    cube: &Cube,
    x: &Configuration,
    disc: &Discretization,
    e: f64,
    m: f64,
    params: &GoodnessParams,
    cfg: &SolverConfig,
) -> Result<GoodnessReport> {
    let h = disc.assemble_plain(cube, x)?;
    classify_good(&h, e, m, params, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeSiteParams {
    /// All 2^{|S|} corners are checked when |S| is at most this.
    pub corner_cap: usize,
    /// Uniform draws of t ∈ [0,1]^S (and, above the cap, random corners).
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for FreeSiteParams {
    fn default() -> Self {
        Self { corner_cap: 12, n_samples: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEvidence {
    pub t: Vec<f64>,
    pub corner: bool,
    pub verdict: Verdict,
    pub resolvent_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeGoodReport {
    /// Every checked t gave a good box.
    pub free_good: bool,
    /// The verdict rests on a finite sample of [0,1]^S.
    pub sampled: bool,
    pub evidence: Vec<FreeEvidence>,
}

/// Checks goodness of H_{B,(S,t),Λ} over corners and random interior points
/// of [0,1]^S.
#[allow(clippy::too_many_arguments)]
pub fn classify_free_good(
    cube: &Cube,
    b: &Configuration,
    s: &Configuration,
    disc: &Discretization,
    e: f64,
    m: f64,
    params: &GoodnessParams,
    free: &FreeSiteParams,
    cfg: &SolverConfig,
) -> Result<FreeGoodReport> {
    if !b.is_disjoint(s) {
        return Err(Error::invalid("B and S must be disjoint"));
    }
    let k = s.len();
    let mut ts: Vec<(Vec<f64>, bool)> = Vec::new();
    let mut rng = StreamSeed::new(free.seed).rng();
    if k <= free.corner_cap {
        for mask in 0u64..(1u64 << k) {
            ts.push(((0..k).map(|i| ((mask >> i) & 1) as f64).collect(), true));
        }
    } else {
        for _ in 0..free.n_samples {
            ts.push(((0..k).map(|_| rng.random::<bool>() as u8 as f64).collect(), true));
        }
    }
    if k > 0 {
        for _ in 0..free.n_samples {
            ts.push(((0..k).map(|_| rng.random::<f64>()).collect(), false));
        }
    }

    let mut evidence = Vec::with_capacity(ts.len());
    for (t, corner) in ts {
        let h = disc.assemble(cube, b, s, &t)?;
        let rep = classify_good(&h, e, m, params, cfg)?;
        evidence.push(FreeEvidence { t, corner, verdict: rep.verdict, resolvent_norm: rep.resolvent_norm });
    }
    let free_good = evidence.iter().all(|ev| ev.verdict == Verdict::Good);
    Ok(FreeGoodReport { free_good, sampled: k > 0, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::eigen::dense_eigenvalues;

    #[test]
    fn free_laplacian_below_spectrum_is_good() {
        let c = Cube::centered(1, 6.0).unwrap();
        let h = DiscreteHamiltonian::free(&c, 0.125).unwrap();
        let rep = classify_good(&h, -1.0, 1.0, &GoodnessParams::default(), &SolverConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Good);
        assert!(!rep.decay_samples.is_empty());
    }

    #[test]
    fn eigenvalue_is_bad() {
        let c = Cube::centered(1, 6.0).unwrap();
        let h = DiscreteHamiltonian::free(&c, 0.125).unwrap();
        let e = dense_eigenvalues(&h)[3];
        let rep = classify_good(&h, e, 0.1, &GoodnessParams::default(), &SolverConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Bad);
        assert!(rep.resolvent_norm.is_infinite());
    }

    #[test]
    fn empty_s_reduces_to_plain() {
        let c = Cube::centered(1, 6.0).unwrap();
        let disc = Discretization::default();
        let b = Configuration::new(1, vec![vec![0.3], vec![-2.0]]).unwrap();
        let cfg = SolverConfig::default();
        let p = GoodnessParams::default();
        let plain = classify_good_config(&c, &b, &disc, 0.2, 0.3, &p, &cfg).unwrap();
        let free =
            classify_free_good(&c, &b, &Configuration::empty(1), &disc, 0.2, 0.3, &p, &FreeSiteParams::default(), &cfg)
                .unwrap();
        assert_eq!(free.evidence.len(), 1);
        assert_eq!(free.evidence[0].verdict, plain.verdict);
        assert_eq!(free.evidence[0].resolvent_norm, plain.resolvent_norm);
        assert!(!free.sampled);
    }

    #[test]
    fn corners_match_direct_assembly() {
        let c = Cube::centered(1, 6.0).unwrap();
        let disc = Discretization::default();
        let b = Configuration::new(1, vec![vec![0.3]]).unwrap();
        let s = Configuration::new(1, vec![vec![-1.7], vec![2.1]]).unwrap();
        let cfg = SolverConfig::default();
        let p = GoodnessParams::default();
        let fp = FreeSiteParams { n_samples: 0, ..Default::default() };
        let rep = classify_free_good(&c, &b, &s, &disc, 0.4, 0.2, &p, &fp, &cfg).unwrap();
        assert_eq!(rep.evidence.len(), 4);
        for ev in &rep.evidence {
            let mut pts = b.points().to_vec();
            for (pt, t) in s.points().iter().zip(&ev.t) {
                if *t == 1.0 {
                    pts.push(pt.clone());
                }
            }
            let x = Configuration::new(1, pts).unwrap();
            let direct = classify_good_config(&c, &x, &disc, 0.4, 0.2, &p, &cfg).unwrap();
            assert_eq!(direct.verdict, ev.verdict);
            assert!((direct.resolvent_norm - ev.resolvent_norm).abs() < 1e-12 * direct.resolvent_norm);
        }
    }
}
