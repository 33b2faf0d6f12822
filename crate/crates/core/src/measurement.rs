//! Localization signatures measured on finite-volume spectra: eigenfunction
//! decay, SUDEC constants, multiplicities and dynamical moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bracket, distance, Cube};
use crate::operator::{probe_centers, spectral_window, DiscreteHamiltonian, SolverConfig, SpectralWindow};

/// Largest eigen-residual accepted for a spectral window.
pub const WINDOW_RESIDUAL: f64 = 1e-8;
/// Shell maxima below this are left out of decay fits.
pub const SHELL_FLOOR: f64 = 1e-14;

/// All eigenpairs of `h` in [0, E₀].
pub fn window_eigenpairs(h: &DiscreteHamiltonian, e0: f64, cfg: &SolverConfig) -> Result<SpectralWindow> {
    if !(e0 > 0.0) {
        return Err(Error::invalid(format!("E₀ must be positive, got {e0}")));
    }
    let w = spectral_window(h, e0, cfg)?;
    if w.max_residual > WINDOW_RESIDUAL {
        return Err(Error::SolverFailure { iterations: cfg.max_iter, residual: w.max_residual });
    }
    Ok(w)
}

/// ‖χ_x ψ‖ for each unit window of the tiling, with the grid weight h^d.
pub fn window_masses(h: &DiscreteHamiltonian, psi: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let w = h.spacing().powi(h.dim() as i32);
    probe_centers(h.cube())
        .into_iter()
        .map(|c| {
            let m = h.window_nodes(&c, 1.0).iter().map(|&i| psi[i] * psi[i]).sum::<f64>() * w;
            (c, m.sqrt())
        })
        .collect()
}

fn weighted_norm(h: &DiscreteHamiltonian, psi: &[f64]) -> f64 {
    (psi.iter().map(|v| v * v).sum::<f64>() * h.spacing().powi(h.dim() as i32)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted rate m̂.
    pub mass: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// ln of the smallest C with every shell maximum ≤ C e^{−m̂ r}.
    pub log_envelope: f64,
    pub center: Vec<f64>,
    /// (radius, largest window norm in the shell), radius ≥ 1.
    pub shells: Vec<(f64, f64)>,
}

impl DecayFit {
    /// min(1, C e^{−m̂ r}).
    pub fn envelope(&self, r: f64) -> f64 {
        (self.log_envelope - self.mass * r).exp().min(1.0)
    }
}

/// Least-squares fit of ln ‖χ_x ψ‖ against |x − center| over shell maxima.
/// ψ is normalised first; `center` defaults to the window of largest mass.
pub fn decay_rate_fit(h: &DiscreteHamiltonian, psi: &[f64], center: Option<&[f64]>) -> Result<DecayFit> {
    if psi.len() != h.size() {
        return Err(Error::invalid("grid function does not match the operator"));
    }
    let norm = weighted_norm(h, psi);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::invalid("cannot normalise a zero grid function"));
    }
    let psi: Vec<f64> = psi.iter().map(|v| v / norm).collect();
    let masses = window_masses(h, &psi);
    let center = match center {
        Some(c) => c.to_vec(),
        None => masses
            .iter()
            .fold(None::<&(Vec<f64>, f64)>, |best, m| match best {
                Some(b) if b.1 >= m.1 => Some(b),
                _ => Some(m),
            })
            .map(|m| m.0.clone())
            .ok_or_else(|| Error::Domain("box holds no unit window".into()))?,
    };
    let mut shells: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
    for (x, m) in &masses {
        let r = distance(x, &center).round() as u64;
        if r >= 1 {
            let e = shells.entry(r).or_insert(0.0);
            *e = e.max(*m);
        }
    }
    let shells: Vec<(f64, f64)> = shells.into_iter().map(|(r, v)| (r as f64, v)).collect();
    let usable: Vec<(f64, f64)> = shells.iter().filter(|s| s.1 >= SHELL_FLOOR).map(|&(r, v)| (r, v.ln())).collect();
    if usable.len() < 3 {
        return Err(Error::Domain(format!("insufficient range: {} usable shells", usable.len())));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|s| s.0).sum::<f64>() / n;
    let my = usable.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let syy: f64 = usable.iter().map(|s| (s.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable.iter().map(|s| (s.1 - intercept - slope * s.0).powi(2)).sum();
    let r_squared = if syy <= 1e-300 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    let mass = -slope;
    let log_envelope = usable.iter().map(|s| s.1 + mass * s.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit { mass, intercept, r_squared, log_envelope, center, shells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SudecParams {
    pub tau: f64,
    pub s: f64,
    /// Exponent of the weight T(x) = ⟨x⟩^ν.
    pub nu: f64,
}

impl SudecParams {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.tau > 1.0) || !(self.s > 0.0 && self.s < 1.0) || !(self.nu > d as f64 / 2.0) {
            return Err(Error::invalid(format!(
                "need τ > 1, s ∈ (0,1), ν > d/2; got τ = {}, s = {}, ν = {}",
                self.tau, self.s, self.nu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SudecPair {
    pub i: usize,
    pub j: usize,
    pub eigenvalue: f64,
    /// Smallest C over both orientations of the pair.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SudecReport {
    pub params: SudecParams,
    pub probes: usize,
    pub pairs: Vec<SudecPair>,
    pub max_constant: f64,
}

/// Integer points x whose unit window lies in Λ̂ = Λ_{L−margin}.
pub fn integer_probes(cube: &Cube, margin: f64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for a in 0..cube.dim() {
        let lo = (cube.lower(a) + 0.5 * margin + 0.5).ceil() as i64;
        let hi = (cube.upper(a) - 0.5 * margin - 0.5).floor() as i64;
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (lo..=hi).map(move |k| {
                    let mut q = p.clone();
                    q.push(k as f64);
                    q
                })
            })
            .collect();
    }
    out
}

/// Minimal C with ‖χ_xψ‖‖χ_yφ‖ ≤ C‖T^{−1}ψ‖‖T^{−1}φ‖ e^{⟨y⟩^τ} e^{−|x−y|^s}
/// over integer probes, for every same-eigenvalue pair (ψ included with
/// itself). `margin` trims probes whose windows leave Λ_{L−margin}.
pub fn sudec_check(h: &DiscreteHamiltonian, window: &SpectralWindow, params: SudecParams, margin: f64) -> Result<SudecReport> {
    params.validate(h.dim())?;
    let probes = integer_probes(h.cube(), margin);
    let tol = 1e-8 * window.e0.max(1.0);
    let clusters = multiplicity_histogram(window, tol);
    let wgt = window.cell_weight();
    let origin = h.cube().center().to_vec();
    let rel = |x: &[f64]| -> Vec<f64> { x.iter().zip(&origin).map(|(a, b)| a - b).collect() };

    // per eigenvector: ln‖χ_x ψ‖ at each probe and ln‖T^{−1}ψ‖
    let nodes: Vec<Vec<usize>> = probes.iter().map(|x| h.window_nodes(x, 1.0)).collect();
    let weights: Vec<f64> = (0..h.size()).map(|i| bracket(&rel(&h.node_position(i))).powf(-2.0 * params.nu)).collect();
    let logs: Vec<(Vec<f64>, f64)> = window
        .eigenvectors
        .iter()
        .map(|v| {
            let loc = nodes.iter().map(|ns| 0.5 * (ns.iter().map(|&i| v[i] * v[i]).sum::<f64>() * wgt).ln()).collect();
            let t = 0.5 * (v.iter().zip(&weights).map(|(a, w)| a * a * w).sum::<f64>() * wgt).ln();
            (loc, t)
        })
        .collect();
    let ybr: Vec<f64> = probes.iter().map(|y| bracket(&rel(y)).powf(params.tau)).collect();

    let oriented = |a: usize, b: usize| -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (ix, x) in probes.iter().enumerate() {
            for (iy, y) in probes.iter().enumerate() {
                let v = logs[a].0[ix] + logs[b].0[iy] - logs[a].1 - logs[b].1 - ybr[iy] + distance(x, y).powf(params.s);
                best = best.max(v);
            }
        }
        best
    };

    let mut pairs = Vec::new();
    let mut start = 0;
    for c in &clusters {
        for i in start..start + c.multiplicity {
            for j in i..start + c.multiplicity {
                let ln_c = oriented(i, j).min(oriented(j, i));
                pairs.push(SudecPair { i, j, eigenvalue: window.eigenvalues[i], constant: ln_c.exp() });
            }
        }
        start += c.multiplicity;
    }
    let max_constant = pairs.iter().map(|p| p.constant).fold(0.0, f64::max);
    Ok(SudecReport { params, probes: probes.len(), pairs, max_constant })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SudecSweepPoint {
    pub tau: f64,
    pub s: f64,
    pub max_constant: f64,
}

/// Largest SUDEC constant on a (τ, s) grid.
pub fn sudec_sweep(
    h: &DiscreteHamiltonian,
    window: &SpectralWindow,
    taus: &[f64],
    ss: &[f64],
    nu: f64,
    margin: f64,
) -> Result<Vec<SudecSweepPoint>> {
    let mut out = Vec::with_capacity(taus.len() * ss.len());
    for &tau in taus {
        for &s in ss {
            let r = sudec_check(h, window, SudecParams { tau, s, nu }, margin)?;
            out.push(SudecSweepPoint { tau, s, max_constant: r.max_constant });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityCluster {
    /// Mean of the clustered eigenvalues.
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Groups sorted eigenvalues whose gaps are within tol·max(1, |λ|).
pub fn multiplicity_histogram(window: &SpectralWindow, tol: f64) -> Vec<MultiplicityCluster> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &l in &window.eigenvalues {
        match out.last_mut() {
            Some((sum, n, last)) if l - *last <= tol * l.abs().max(1.0) => {
                *sum += l;
                *n += 1;
                *last = l;
            }
            _ => out.push((l, 1, l)),
        }
    }
    out.into_iter().map(|(sum, n, _)| MultiplicityCluster { eigenvalue: sum / n as f64, multiplicity: n }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTrace {
    pub p: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
}

/// t = 0 followed by 63 logarithmically spaced times up to 10³.
pub fn default_time_grid() -> Vec<f64> {
    let mut t = vec![0.0];
    let (a, b) = (-2.0f64, 3.0f64);
    t.extend((0..63).map(|i| 10f64.powf(a + (b - a) * i as f64 / 62.0)));
    t
}

/// ‖⟨x⟩^p e^{−itH} P χ₀‖²_HS, with P the projection onto the window and χ₀
/// the unit window at the box center:
/// Σ_{k,l} cos(t(λ_k − λ_l)) ⟨φ_k, ⟨x⟩^{2p} φ_l⟩ ⟨φ_l, χ₀ φ_k⟩.
pub fn dynamical_moment(h: &DiscreteHamiltonian, window: &SpectralWindow, p: f64, times: &[f64]) -> MomentTrace {
    let k = window.len();
    let wgt = window.cell_weight();
    let origin = h.cube().center().to_vec();
    let weight: Vec<f64> = (0..h.size())
        .map(|i| {
            let x: Vec<f64> = h.node_position(i).iter().zip(&origin).map(|(a, b)| a - b).collect();
            bracket(&x).powf(2.0 * p)
        })
        .collect();
    let chi0 = h.window_nodes(&origin, 1.0);
    let v = &window.eigenvectors;
    let mut mq = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let m: f64 = v[a].iter().zip(&v[b]).zip(&weight).map(|((x, y), w)| x * y * w).sum::<f64>() * wgt;
            let q: f64 = chi0.iter().map(|&i| v[a][i] * v[b][i]).sum::<f64>() * wgt;
            mq[a * k + b] = m * q;
            mq[b * k + a] = m * q;
        }
    }
    let values: Vec<f64> = times
        .iter()
        .map(|&t| {
            let mut s = 0.0;
            for a in 0..k {
                for b in 0..k {
                    s += (t * (window.eigenvalues[a] - window.eigenvalues[b])).cos() * mq[a * k + b];
                }
            }
            s.max(0.0)
        })
        .collect();
    let sup = values.iter().copied().fold(0.0, f64::max);
    MomentTrace { p, times: times.to_vec(), values, sup }
}

/// Upper bound on sup_t ‖⟨x⟩^p e^{−itH}Pχ₀‖²_HS from decay envelopes:
/// Σ_w max_w⟨x⟩^{2p} (Σ_k E_k(w) B_k)², where E_k(w) bounds ‖χ_wφ_k‖ and
/// B_k bounds ‖χ₀φ_k‖ through the tiling windows meeting χ₀.
pub fn decay_moment_bound(h: &DiscreteHamiltonian, fits: &[DecayFit], p: f64) -> f64 {
    let origin = h.cube().center().to_vec();
    let tiles = probe_centers(h.cube());
    let half_diag = 0.5 * (h.dim() as f64).sqrt();
    let near0: Vec<&Vec<f64>> =
        tiles.iter().filter(|w| w.iter().zip(&origin).all(|(a, b)| (a - b).abs() < 1.0)).collect();
    let b: Vec<f64> = fits
        .iter()
        .map(|f| near0.iter().map(|w| f.envelope(distance(w, &f.center).round()).powi(2)).sum::<f64>().sqrt().min(1.0))
        .collect();
    tiles
        .iter()
        .map(|w| {
            let r = distance(w, &origin) + half_diag;
            let s: f64 = fits.iter().zip(&b).map(|(f, bk)| f.envelope(distance(w, &f.center).round()) * bk).sum();
            (1.0 + r * r).powf(p) * s * s
        })
        .sum()
}
