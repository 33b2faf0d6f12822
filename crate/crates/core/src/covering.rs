//! Standard ℓ-coverings of boxes and the scale ladder of the induction.
//!
//! A standard covering of Λ_L(x) by boxes of side ℓ uses the centers
//! `x + αℓZ^d ∩ Λ_L(x)` with α = (L − ℓ)/(2ℓn) ∈ (3/5, 4/5]. Centers form a
//! product lattice, so every geometric property reduces exactly to one axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Cube;

pub const ALPHA_MIN: f64 = 0.6;
pub const ALPHA_MAX: f64 = 0.8;

/// Side of the neighbourhood Λ_{s}(y) asked to fit in a single covering box,
/// as a fraction of ℓ: the stated 2/5 and the attainable 1/5.
pub const NEIGHBOURHOOD_LITERAL: f64 = 0.4;
pub const NEIGHBOURHOOD_CORE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringPlan {
    pub parent: Cube,
    pub ell: f64,
    pub alpha: f64,
    pub n: u64,
    /// Center offsets along one axis, relative to the parent center.
    pub offsets: Vec<f64>,
}

impl CoveringPlan {
    pub fn dim(&self) -> usize {
        self.parent.dim()
    }

    pub fn len(&self) -> usize {
        self.offsets.len().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Lattice step αℓ.
    pub fn step(&self) -> f64 {
        self.alpha * self.ell
    }

    /// All centers, axis 0 varying fastest.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let c = self.parent.center();
        let mut out = vec![Vec::new()];
        for a in 0..self.dim() {
            let mut next = Vec::with_capacity(out.len() * self.offsets.len());
            for o in &self.offsets {
                for p in &out {
                    let mut q: Vec<f64> = p.clone();
                    q.push(c[a] + o);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn boxes(&self) -> Vec<Cube> {
        self.centers().into_iter().map(|c| Cube::new(c, self.ell).expect("positive side")).collect()
    }
}

fn alpha_for(l: f64, ell: f64, n: u64) -> f64 {
    (l - ell) / (2.0 * ell * n as f64)
}

fn admissible(alpha: f64) -> bool {
    alpha > ALPHA_MIN * (1.0 + 1e-12) && alpha <= ALPHA_MAX * (1.0 + 1e-12)
}

/// Nearest L′ admitting a standard ℓ-covering. Admissible ratios L′/ℓ fill
/// (1 + 1.2n, 1 + 1.6n]; the open lower ends are nudged inwards.
pub fn nearest_compatible_scale(l: f64, ell: f64) -> f64 {
    let r = l / ell;
    let n_max = (r.max(1.0) / 1.2).ceil() as u64 + 2;
    let mut best = f64::INFINITY;
    for n in 1..=n_max {
        let lo = 1.0 + 1.2 * n as f64;
        let hi = 1.0 + 1.6 * n as f64;
        let cand = if r > lo && r <= hi {
            r
        } else if r <= lo {
            lo * (1.0 + 1e-9)
        } else {
            hi
        };
        if (cand - r).abs() < (best - r).abs() {
            best = cand;
        }
    }
    best * ell
}

/// Standard ℓ-covering with the smallest admissible n.
pub fn standard_covering(parent: &Cube, ell: f64) -> Result<CoveringPlan> {
    let l = parent.side();
    if !(ell > 0.0) || !(ell < l) {
        return Err(Error::invalid(format!("need 0 < ℓ < L, got ℓ = {ell}, L = {l}")));
    }
    // α ≤ 4/5 ⟺ n ≥ (L−ℓ)/(1.6ℓ)
    let n_lo = (((l - ell) / (2.0 * ell * ALPHA_MAX)) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let n = (n_lo..n_lo + 2).find(|&n| admissible(alpha_for(l, ell, n)));
    let Some(n) = n else {
        return Err(Error::IncompatibleScales { big: l, small: ell, nearest: nearest_compatible_scale(l, ell) });
    };
    Ok(plan_with(parent.clone(), ell, n))
}

fn plan_with(parent: Cube, ell: f64, n: u64) -> CoveringPlan {
    let alpha = alpha_for(parent.side(), ell, n);
    let step = alpha * ell;
    let offsets = (-(n as i64)..=n as i64).map(|k| k as f64 * step).collect();
    CoveringPlan { parent, ell, alpha, n, offsets }
}

/// Restriction of `plan` to Λ_{(2nα+1)ℓ}(y) for a lattice point y.
pub fn nested_subcovering(plan: &CoveringPlan, y: &[f64], n: u64) -> Result<CoveringPlan> {
    if y.len() != plan.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let step = plan.step();
    for (yi, ci) in y.iter().zip(plan.parent.center()) {
        let k = (yi - ci) / step;
        if (k - k.round()).abs() > 1e-9 {
            return Err(Error::invalid("sub-box center is not on the covering lattice"));
        }
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let side = (2.0 * n as f64 * plan.alpha + 1.0) * plan.ell;
    let sub = Cube::new(y.to_vec(), side)?;
    if !plan.parent.contains_cube(&sub) {
        return Err(Error::invalid("sub-box is not contained in the parent box"));
    }
    // identical lattice, so the induced plan is the standard plan with the
    // same α and this n
    let mut out = plan_with(sub, plan.ell, n);
    out.alpha = plan.alpha;
    let offsets: Vec<f64> = (-(n as i64)..=n as i64).map(|k| k as f64 * step).collect();
    out.offsets = offsets;
    Ok(out)
}

/// Center whose ℓ-box contains Λ_{side}(y) ∩ Λ_L, if any. `y` may lie on
/// the closed parent box.
pub fn locate_container(plan: &CoveringPlan, y: &[f64], side: f64) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(plan.dim());
    for (a, yi) in y.iter().enumerate() {
        let c = plan.parent.center()[a];
        out.push(c + axis_container(plan, yi - c, side)?);
    }
    Some(out)
}

/// Every center whose ℓ-box contains Λ_{side}(y) ∩ Λ_L.
pub fn containing_centers(plan: &CoveringPlan, y: &[f64], side: f64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for (a, yi) in y.iter().enumerate() {
        let c = plan.parent.center()[a];
        let offs = axis_containers(plan, yi - c, side);
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                offs.iter().map(move |o| {
                    let mut q = p.clone();
                    q.push(c + o);
                    q
                })
            })
            .collect();
    }
    out
}

/// The ℓ′ nearest to `small` for which (big, ℓ′) admits a standard covering.
pub fn snap_small_scale(big: f64, small: f64) -> f64 {
    let ratio = nearest_compatible_scale(big, small) / small;
    let snapped = big / ratio;
    if (snapped - small).abs() > 1e-12 * small {
        log::info!("snapped scale {small} to {snapped} for a covering of side {big}");
    }
    snapped
}

/// Offset r with (y − s/2, y + s/2) ∩ (−L/2, L/2) ⊂ (r − ℓ/2, r + ℓ/2).
fn axis_container(plan: &CoveringPlan, y: f64, side: f64) -> Option<f64> {
    axis_containers(plan, y, side).into_iter().next()
}

fn axis_containers(plan: &CoveringPlan, y: f64, side: f64) -> Vec<f64> {
    let half = plan.parent.half();
    let tol = 1e-12 * plan.parent.side().max(1.0);
    if y.abs() > half + tol {
        return Vec::new();
    }
    let lo = (y - side / 2.0).max(-half);
    let hi = (y + side / 2.0).min(half);
    let h = plan.ell / 2.0;
    // the best candidates are the two lattice points around the interval's
    // midpoint
    let mid = 0.5 * (lo + hi);
    let k = (mid / plan.step()).floor() as i64;
    [k, k + 1]
        .into_iter()
        .filter(|k| k.unsigned_abs() <= plan.n)
        .map(|k| k as f64 * plan.step())
        .filter(|r| lo >= r - h - tol && hi <= r + h + tol)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringValidation {
    pub alpha_admissible: bool,
    /// α = (L − ℓ)/(2ℓn).
    pub alpha_consistent: bool,
    /// Every probe point lies in some covering box.
    pub coverage: bool,
    /// Every probe neighbourhood of side 2ℓ/5 fits in one box.
    pub boundary_cover_literal: bool,
    /// Same with side ℓ/5.
    pub boundary_cover_core: bool,
    /// Λ_{ℓ/5}(r) ∩ Λ_ℓ(r′) = ∅ for r ≠ r′.
    pub core_disjoint: bool,
    pub cardinality: usize,
    pub cardinality_ok: bool,
    pub probes: usize,
    /// A probe coordinate (relative to the parent center) where the literal
    /// neighbourhood fails.
    pub literal_counterexample: Option<f64>,
}

impl CoveringValidation {
    /// All properties, with the attainable neighbourhood side.
    pub fn holds_core(&self) -> bool {
        self.alpha_admissible
            && self.alpha_consistent
            && self.coverage
            && self.boundary_cover_core
            && self.core_disjoint
            && self.cardinality_ok
    }

    /// All properties as stated, including the 2ℓ/5 neighbourhood.
    pub fn holds_literal(&self) -> bool {
        self.holds_core() && self.boundary_cover_literal
    }
}

/// Probe offsets along one axis: a grid of step ℓ/40, the midpoints between
/// neighbouring centers, and the two faces.
fn axis_probes(plan: &CoveringPlan) -> Vec<f64> {
    let half = plan.parent.half();
    let step = plan.ell / 40.0;
    let n = (plan.parent.side() / step).floor() as i64;
    let mut out: Vec<f64> = (0..=n).map(|i| -half + i as f64 * step).collect();
    out.push(half);
    for w in plan.offsets.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

/// Checks every covering property by enumeration on a probe grid. The
/// covering is a product of one-dimensional coverings, so checking one axis
/// decides each property in every dimension.
pub fn validate(plan: &CoveringPlan) -> CoveringValidation {
    let l = plan.parent.side();
    let h = plan.ell / 2.0;
    let half = plan.parent.half();
    let probes = axis_probes(plan);

    let open_probes = probes.iter().filter(|y| y.abs() < half);
    let coverage = open_probes.clone().all(|y| plan.offsets.iter().any(|r| (y - r).abs() < h))
        && (plan.offsets.first().map(|r| r - h) <= Some(-half + 1e-12 * l))
        && (plan.offsets.last().map(|r| r + h) >= Some(half - 1e-12 * l));

    let literal_counterexample = probes
        .iter()
        .copied()
        .find(|y| axis_container(plan, *y, NEIGHBOURHOOD_LITERAL * plan.ell).is_none());
    let boundary_cover_core = probes.iter().all(|y| axis_container(plan, *y, NEIGHBOURHOOD_CORE * plan.ell).is_some());

    let core_half = plan.ell / 10.0;
    let mut core_disjoint = true;
    for (i, r) in plan.offsets.iter().enumerate() {
        for r2 in &plan.offsets[i + 1..] {
            if (r - r2).abs() < core_half + h - 1e-12 * l {
                core_disjoint = false;
            }
        }
    }
    let cardinality = plan.len();
    let cardinality_ok = (cardinality as f64) <= (2.0 * l / plan.ell).powi(plan.dim() as i32);
    CoveringValidation {
        alpha_admissible: admissible(plan.alpha),
        alpha_consistent: (plan.alpha - alpha_for(l, plan.ell, plan.n)).abs() <= 1e-12 * plan.alpha,
        coverage,
        boundary_cover_literal: literal_counterexample.is_none(),
        boundary_cover_core,
        core_disjoint,
        cardinality,
        cardinality_ok,
        probes: probes.len(),
        literal_counterexample,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LadderOverrides {
    pub p: Option<f64>,
    pub rho1: Option<f64>,
    pub n1: Option<u32>,
    pub tau0: Option<f64>,
    /// Smallest allowed level; `None` skips the check.
    pub min_level: Option<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    pub l0: f64,
    pub d: usize,
    pub p: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub n1: u32,
    pub tau0: f64,
    /// ℓ₁ = L₀^{ρ₁}.
    pub ell1: f64,
    /// L_n = ℓ₁^{ρ₁^n}, n = 0..=n₁.
    pub levels: Vec<f64>,
}

impl ScaleLadder {
    /// m₀ ≥ L₀^{−τ₀}.
    pub fn mass_ok(&self, m0: f64) -> bool {
        m0 >= self.l0.powf(-self.tau0)
    }
}

pub const DEFAULT_P_PER_DIM: f64 = 0.36;
pub const DEFAULT_RHO1: f64 = 0.74;
pub const DEFAULT_MIN_LEVEL: f64 = 6.0;

/// Checks 8/11 < d/(d+p) < ρ₁ < 3/4, p < d(ρ₁/2 − ρ₂) and 0 < τ₀ < ρ₂.
pub fn check_exponents(d: usize, p: f64, rho1: f64, rho2: f64, tau0: f64) -> Result<()> {
    let df = d as f64;
    let ratio = df / (df + p);
    let mut violated = Vec::new();
    if !(p > 0.0) {
        violated.push(format!("p > 0 (p = {p})"));
    }
    if !(8.0 / 11.0 < ratio) {
        violated.push(format!("8/11 < d/(d+p) (d/(d+p) = {ratio:.6})"));
    }
    if !(ratio < rho1) {
        violated.push(format!("d/(d+p) < ρ₁ ({ratio:.6} vs {rho1})"));
    }
    if !(rho1 < 0.75) {
        violated.push(format!("ρ₁ < 3/4 (ρ₁ = {rho1})"));
    }
    if !(p < df * (rho1 / 2.0 - rho2)) {
        violated.push(format!("p < d(ρ₁/2 − ρ₂) ({p} vs {})", df * (rho1 / 2.0 - rho2)));
    }
    if !(tau0 > 0.0 && tau0 < rho2) {
        violated.push(format!("0 < τ₀ < ρ₂ (τ₀ = {tau0}, ρ₂ = {rho2})"));
    }
    if violated.is_empty() {
        Ok(())
    } else {
        Err(Error::invalid(format!("scale ladder constraints violated: {}", violated.join("; "))))
    }
}

pub fn scale_ladder(l0: f64, d: usize, overrides: &LadderOverrides) -> Result<ScaleLadder> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(l0 > 1.0) {
        return Err(Error::invalid(format!("L₀ must exceed 1, got {l0}")));
    }
    let df = d as f64;
    let p = overrides.p.unwrap_or(DEFAULT_P_PER_DIM * df);
    let rho1 = overrides.rho1.unwrap_or(DEFAULT_RHO1);
    if !(rho1 > 0.0 && rho1 < 1.0) {
        return Err(Error::invalid(format!("ρ₁ must lie in (0, 1), got {rho1}")));
    }
    let n1 = match overrides.n1 {
        Some(n) => n,
        None => (1..=200u32)
            .find(|&n| p < df * (rho1 / 2.0 - rho1.powi(n as i32)))
            .ok_or_else(|| Error::invalid(format!("no n₁ satisfies p < d(ρ₁/2 − ρ₁^n₁) for p = {p}, ρ₁ = {rho1}")))?,
    };
    let rho2 = rho1.powi(n1 as i32);
    let tau0 = overrides.tau0.unwrap_or(0.5 * rho2);
    check_exponents(d, p, rho1, rho2, tau0)?;

    let ell1 = l0.powf(rho1);
    let levels: Vec<f64> = (0..=n1).map(|n| ell1.powf(rho1.powi(n as i32))).collect();
    if let Some(min) = overrides.min_level.unwrap_or(Some(DEFAULT_MIN_LEVEL)) {
        let smallest = *levels.last().expect("n₁ ≥ 0");
        if smallest < min {
            return Err(Error::Precondition(format!(
                "smallest level {smallest:.4} is below the minimum {min}; increase L₀"
            )));
        }
    }
    Ok(ScaleLadder { l0, d, p, rho1, rho2, n1, tau0, ell1, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_by_one() {
        let parent = Cube::centered(1, 11.0).unwrap();
        let plan = standard_covering(&parent, 1.0).unwrap();
        assert_eq!(plan.n, 7);
        assert!((plan.alpha - 5.0 / 7.0).abs() < 1e-15);
        assert_eq!(plan.len(), 15);
        let v = validate(&plan);
        assert!(v.holds_core(), "{v:?}");
        assert!(v.cardinality <= 22);
    }

    #[test]
    fn twice_ell_is_incompatible() {
        let parent = Cube::centered(1, 2.0).unwrap();
        match standard_covering(&parent, 1.0) {
            Err(Error::IncompatibleScales { nearest, .. }) => assert!((nearest - 2.2).abs() < 1e-6),
            other => panic!("unexpected {other:?}"),
        }
        let parent = Cube::centered(2, 3.0).unwrap();
        assert!(standard_covering(&parent, 1.0).is_err());
    }

    #[test]
    fn compatible_above_six() {
        for i in 0..200 {
            let r = 6.0 + i as f64 * 0.173;
            let parent = Cube::centered(1, r).unwrap();
            let plan = standard_covering(&parent, 1.0).unwrap();
            assert!(validate(&plan).holds_core());
        }
    }

    #[test]
    fn centers_of_2d_plan() {
        let parent = Cube::new(vec![1.0, -2.0], 11.0).unwrap();
        let plan = standard_covering(&parent, 1.0).unwrap();
        let cs = plan.centers();
        assert_eq!(cs.len(), 225);
        assert!(cs.iter().all(|c| parent.contains(c)));
        assert!((cs[1][0] - cs[0][0] - 5.0 / 7.0).abs() < 1e-12);
        assert_eq!(cs[1][1], cs[0][1]);
    }

    #[test]
    fn container_at_center_and_faces() {
        for d in [1usize, 2] {
            let parent = Cube::centered(d, 11.0).unwrap();
            let plan = standard_covering(&parent, 1.0).unwrap();
            let y = vec![0.0; d];
            let r = locate_container(&plan, &y, NEIGHBOURHOOD_LITERAL).unwrap();
            assert!(Cube::new(r, 1.0).unwrap().contains_cube(&Cube::new(y, 0.4).unwrap()));
            let mut face = vec![0.0; d];
            face[0] = 5.5;
            assert!(locate_container(&plan, &face, NEIGHBOURHOOD_LITERAL).is_some());
        }
    }

    #[test]
    fn literal_neighbourhood_fails_between_centers() {
        let parent = Cube::centered(1, 11.0).unwrap();
        let plan = standard_covering(&parent, 1.0).unwrap();
        let mid = 0.5 * plan.step();
        assert!(locate_container(&plan, &[mid], NEIGHBOURHOOD_LITERAL).is_none());
        assert!(locate_container(&plan, &[mid], NEIGHBOURHOOD_CORE).is_some());
        assert!(!validate(&plan).boundary_cover_literal);
    }

    #[test]
    fn nested_examples() {
        let parent = Cube::centered(1, 11.0).unwrap();
        let plan = standard_covering(&parent, 1.0).unwrap();
        let same = nested_subcovering(&plan, &[0.0], 7).unwrap();
        assert!((same.parent.side() - 11.0).abs() < 1e-12);
        assert_eq!(same.offsets, plan.offsets);

        let sub = nested_subcovering(&plan, &[0.0], 2).unwrap();
        assert!((sub.parent.side() - 27.0 / 7.0).abs() < 1e-12);
        assert_eq!(sub.len(), 5);
        assert!(validate(&sub).core_disjoint);
        assert!(validate(&sub).holds_core());

        let y = [2.0 * plan.step()];
        let a = nested_subcovering(&plan, &y, 3).unwrap();
        let b = nested_subcovering(&nested_subcovering(&plan, &[plan.step()], 4).unwrap(), &y, 3).unwrap();
        assert_eq!(a.centers().len(), b.centers().len());
        for (p, q) in a.centers().iter().zip(b.centers()) {
            assert!((p[0] - q[0]).abs() < 1e-12);
        }
        assert!(nested_subcovering(&plan, &[0.3], 2).is_err());
        assert!(nested_subcovering(&plan, &[3.0 * plan.step()], 6).is_err());
    }

    #[test]
    fn ladder_defaults_and_overrides() {
        let lad = scale_ladder(1e6, 1, &LadderOverrides { min_level: Some(None), ..Default::default() }).unwrap();
        assert_eq!(lad.n1, 16);
        assert!(lad.levels.windows(2).all(|w| w[1] < w[0]));
        assert!((lad.levels[0] - lad.ell1).abs() < 1e-9);

        let bad = LadderOverrides { rho1: Some(0.8), min_level: Some(None), ..Default::default() };
        let e = scale_ladder(1e6, 1, &bad).unwrap_err().to_string();
        assert!(e.contains("ρ₁ < 3/4"), "{e}");

        // p = 0.37 is incompatible with ρ₁ = 0.74 for every n₁
        let p37 = LadderOverrides { p: Some(0.37), min_level: Some(None), ..Default::default() };
        assert!(scale_ladder(1e6, 1, &p37).is_err());
    }
}
