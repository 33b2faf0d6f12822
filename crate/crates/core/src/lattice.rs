//! Configuration reduction on the η-grid.
//!
//! Sites of the grid `x + ηZ^d` whose cells fit inside the box are stored as
//! integer multi-indices relative to the box center, so a grid with 10^8 sites
//! per axis costs nothing until sites are actually touched.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::point_process::{Configuration, MarkedConfiguration, MarkedPoint, Point};

/// Integer multi-index k of the site `center + kη`.
pub type Site = Vec<i64>;
pub type SiteSet = BTreeSet<Site>;

/// κ for which e^{−L^κ} reproduces η_L = e^{−L^{10^6 d}}, per dimension.
pub const ASYMPTOTIC_KAPPA_PER_DIM: f64 = 1.0e6;

/// Multi-indices beyond this lose exactness in f64 arithmetic.
const MAX_INDEX: f64 = (1u64 << 52) as f64;

/// a + b as an unevaluated sum hi + lo.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// (d_hi + d_lo) − k·η, accurate to a few ulps of the result.
fn exact_residual(d_hi: f64, d_lo: f64, k: f64, eta: f64) -> f64 {
    let p = k * eta;
    let p_err = k.mul_add(eta, -p);
    let (s, e) = two_sum(d_hi, -p);
    s + (e + d_lo - p_err)
}

/// η_L = e^{−L^κ}.
pub fn eta_of_scale(l: f64, kappa: f64) -> Result<f64> {
    if !(l > 1.0) {
        return Err(Error::invalid(format!("scale must exceed 1, got {l}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let eta = (-l.powf(kappa)).exp();
    if eta < f64::MIN_POSITIVE {
        return Err(Error::Domain(format!(
            "eta = exp(-{l}^{kappa}) underflows; use a smaller kappa"
        )));
    }
    Ok(eta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaGrid {
    cube: Cube,
    eta: f64,
    /// Sites have |k_i| ≤ max_index on every axis.
    max_index: i64,
}

impl EtaGrid {
    pub fn new(cube: Cube, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::invalid(format!("eta must be positive, got {eta}")));
        }
        if eta >= 1.0 {
            return Err(Error::invalid("eta must be below 1"));
        }
        let ratio = cube.side() / eta;
        if ratio > MAX_INDEX {
            return Err(Error::Domain(format!(
                "box side / eta = {ratio:e} exceeds exact index range; use a smaller kappa"
            )));
        }
        if ratio < 1.0 {
            return Err(Error::invalid("eta larger than the box"));
        }
        // Λ_η(x + kη) ⊂ Λ  ⟺  |k|η + η/2 ≤ L/2
        let max_index = (((ratio - 1.0) * 0.5) * (1.0 + 1e-14)).floor() as i64;
        Ok(Self { cube, eta, max_index })
    }

    /// Grid on `cube` with η = e^{−L^κ}.
    pub fn for_scale(cube: Cube, kappa: f64) -> Result<Self> {
        let eta = eta_of_scale(cube.side(), kappa)?;
        Self::new(cube, eta)
    }

    pub fn cube(&self) -> &Cube {
        &self.cube
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    pub fn max_index(&self) -> i64 {
        self.max_index
    }

    pub fn sites_per_axis(&self) -> u64 {
        2 * self.max_index as u64 + 1
    }

    pub fn site_count(&self) -> f64 {
        (self.sites_per_axis() as f64).powi(self.dim() as i32)
    }

    pub fn is_site(&self, k: &[i64]) -> bool {
        k.len() == self.dim() && k.iter().all(|v| v.abs() <= self.max_index)
    }

    pub fn site_center(&self, k: &[i64]) -> Point {
        self.cube.center().iter().zip(k).map(|(c, v)| c + *v as f64 * self.eta).collect()
    }

    pub fn cell(&self, k: &[i64]) -> Cube {
        Cube::new(self.site_center(k), self.eta).expect("eta is positive")
    }

    /// Site whose cell Λ_η(j) contains `p`, if any.
    pub fn site_of(&self, p: &[f64]) -> Option<Site> {
        self.locate(p, 0.5)
    }

    /// Site whose inner cell Λ_{η(1−η)}(j) contains `p`, if any.
    pub fn inner_site_of(&self, p: &[f64]) -> Option<Site> {
        self.locate(p, 0.5 * (1.0 - self.eta))
    }

    fn locate(&self, p: &[f64], half_width: f64) -> Option<Site> {
        // η can be a few ulps of the coordinates, so the offset from the
        // nearest site is computed without rounding error
        let limit = half_width * self.eta;
        let mut k = Vec::with_capacity(self.dim());
        for (x, c) in p.iter().zip(self.cube.center()) {
            let (d_hi, d_lo) = two_sum(*x, -c);
            let guess = ((d_hi + d_lo) / self.eta).round();
            let best = [guess - 1.0, guess, guess + 1.0]
                .into_iter()
                .map(|r| (r, exact_residual(d_hi, d_lo, r, self.eta).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("three candidates");
            if best.1 >= limit || best.0.abs() > self.max_index as f64 {
                return None;
            }
            k.push(best.0 as i64);
        }
        Some(k)
    }

    /// Every site, in lexicographic order. Refuses grids with more than
    /// `limit` sites.
    pub fn all_sites(&self, limit: usize) -> Result<Vec<Site>> {
        if self.site_count() > limit as f64 {
            return Err(Error::Domain(format!(
                "grid has {:e} sites, more than the enumeration limit {limit}",
                self.site_count()
            )));
        }
        let m = self.max_index;
        let mut out = vec![Vec::new()];
        for _ in 0..self.dim() {
            out = out
                .into_iter()
                .flat_map(|prefix: Site| {
                    (-m..=m).map(move |v| {
                        let mut s = prefix.clone();
                        s.push(v);
                        s
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// Sites whose centers lie in the open cube `region`, as per-axis index
    /// ranges.
    pub fn site_ranges_in(&self, region: &Cube) -> Option<Vec<(i64, i64)>> {
        let mut out = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let c = self.cube.center()[axis];
            let lo = ((region.lower(axis) - c) / self.eta).floor() as i64 + 1;
            let hi = ((region.upper(axis) - c) / self.eta).ceil() as i64 - 1;
            // fix up rounding at the open ends
            let inside = |k: i64| {
                let x = c + k as f64 * self.eta;
                x > region.lower(axis) && x < region.upper(axis)
            };
            let mut lo = lo.max(-self.max_index);
            let mut hi = hi.min(self.max_index);
            while lo <= hi && !inside(lo) {
                lo += 1;
            }
            while hi >= lo && !inside(hi) {
                hi -= 1;
            }
            if lo > hi {
                return None;
            }
            out.push((lo, hi));
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptabilityClass {
    Acceptable,
    AcceptablePrime,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptabilityVerdict {
    /// N_X(Λ) < 16ϱL^d
    pub total_ok: bool,
    /// at most one point per η-cell
    pub cell_ok: bool,
    /// every point of Λ lies in some inner cell Λ_{η(1−η)}(j)
    pub strict_boundary_ok: bool,
    /// every point of Λ lies in some cell Λ_η(j)
    pub loose_boundary_ok: bool,
    pub class: AcceptabilityClass,
    pub count: usize,
}

impl AcceptabilityVerdict {
    pub fn is_acceptable(&self) -> bool {
        self.class == AcceptabilityClass::Acceptable
    }

    pub fn is_acceptable_prime(&self) -> bool {
        self.class != AcceptabilityClass::Neither
    }
}

/// 16ϱL^d.
pub fn count_threshold(density: f64, l: f64, d: usize) -> f64 {
    16.0 * density * l.powi(d as i32)
}

pub fn classify_acceptable(cfg: &Configuration, grid: &EtaGrid, density: f64) -> AcceptabilityVerdict {
    let cube = grid.cube();
    let inside: Vec<&Point> = cfg.points().iter().filter(|p| cube.contains(p)).collect();
    let count = inside.len();
    let total_ok = (count as f64) < count_threshold(density, cube.side(), grid.dim());

    let mut seen = SiteSet::new();
    let mut cell_ok = true;
    let mut strict_boundary_ok = true;
    let mut loose_boundary_ok = true;
    for p in inside {
        match grid.site_of(p) {
            Some(k) => {
                if grid.inner_site_of(p).is_none() {
                    strict_boundary_ok = false;
                }
                if !seen.insert(k) {
                    cell_ok = false;
                }
            }
            None => {
                loose_boundary_ok = false;
                strict_boundary_ok = false;
            }
        }
    }

    let class = if total_ok && cell_ok && strict_boundary_ok {
        AcceptabilityClass::Acceptable
    } else if total_ok && cell_ok && loose_boundary_ok {
        AcceptabilityClass::AcceptablePrime
    } else {
        AcceptabilityClass::Neither
    };
    AcceptabilityVerdict { total_ok, cell_ok, strict_boundary_ok, loose_boundary_ok, class, count }
}

/// Upper bound on P{Y not acceptable} for Y Poisson with density 2ϱ.
pub fn acceptability_failure_bound(l: f64, d: usize, density: f64, eta: f64) -> f64 {
    let di = d as i32;
    (-16.0 * density * l.powi(di)).exp()
        + 4.0 * d as f64 * density * (l.powi(di - 1) + l.powi(di)) * eta
        + 2.0 * density * density * l.powi(di) * eta.powi(di)
}

/// The occupied sites of an acceptable′ configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyClass {
    pub grid: EtaGrid,
    pub occupied: SiteSet,
}

impl OccupancyClass {
    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }
}

pub fn occupancy_class(cfg: &Configuration, grid: &EtaGrid, density: f64) -> Result<OccupancyClass> {
    let v = classify_acceptable(cfg, grid, density);
    if !v.is_acceptable_prime() {
        return Err(Error::Domain("configuration is not acceptable′ on this grid".into()));
    }
    let occupied = cfg
        .points()
        .iter()
        .filter(|p| grid.cube().contains(p))
        .map(|p| grid.site_of(p).expect("acceptable′ points lie in cells"))
        .collect();
    Ok(OccupancyClass { grid: grid.clone(), occupied })
}

/// One point at the center of every occupied cell.
pub fn snap_representative(occ: &OccupancyClass) -> Configuration {
    let points = occ.occupied.iter().map(|k| occ.grid.site_center(k)).collect();
    Configuration::new(occ.grid.dim(), points).expect("distinct sites give distinct centers")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    /// ε₁ in the sub-box side L^{1−ε₁}.
    pub eps_scale: f64,
    /// ε₂ in the site count L^{d−ε₂}.
    pub eps_count: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self { eps_scale: 0.05, eps_count: 0.05 }
    }
}

impl DensityParams {
    pub fn new(eps_scale: f64, eps_count: f64) -> Result<Self> {
        for (name, v) in [("eps_scale", eps_scale), ("eps_count", eps_count)] {
            if !(v > 0.0 && v < 0.25) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1/4), got {v}")));
            }
        }
        Ok(Self { eps_scale, eps_count })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub dense: bool,
    pub sub_side: f64,
    pub required: f64,
    pub min_count: usize,
    /// Center of a sub-box attaining the minimum.
    pub witness: Vec<f64>,
}

/// Candidate offsets along one axis: a half-step lattice from the lower end,
/// plus the position flush with the upper end.
fn candidate_centers(lo: f64, hi: f64, side: f64) -> Vec<f64> {
    let first = lo + side / 2.0;
    let last = hi - side / 2.0;
    if last <= first {
        return vec![0.5 * (lo + hi)];
    }
    let step = side / 2.0;
    let n = ((last - first) / step).floor() as usize;
    let mut out: Vec<f64> = (0..=n).map(|i| first + i as f64 * step).collect();
    if last - out[n] > 1e-12 * side {
        out.push(last);
    }
    out
}

/// Density condition for a free-site set: every sub-box Λ_{L^{1−ε₁}} ⊂ Λ_L,
/// shrunk by `delta_plus`, holds at least L^{d−ε₂} sites of `sites`.
pub fn density_report(sites: &SiteSet, grid: &EtaGrid, params: &DensityParams, delta_plus: f64) -> DensityReport {
    let cube = grid.cube();
    let d = grid.dim();
    let l = cube.side();
    let sub_side = l.powf(1.0 - params.eps_scale);
    let required = l.powf(d as f64 - params.eps_count);
    let hat_side = sub_side - delta_plus;

    let axes: Vec<Vec<f64>> = (0..d).map(|a| candidate_centers(cube.lower(a), cube.upper(a), sub_side)).collect();
    let centers: Vec<Point> = sites.iter().map(|k| grid.site_center(k)).collect();

    let mut min_count = usize::MAX;
    let mut witness = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let c: Vec<f64> = idx.iter().zip(&axes).map(|(i, a)| a[*i]).collect();
        let count = if hat_side > 0.0 {
            let hat = Cube::new(c.clone(), hat_side).expect("positive side");
            centers.iter().filter(|p| hat.contains(p)).count()
        } else {
            0
        };
        if count < min_count {
            min_count = count;
            witness = c;
        }
        // odometer
        let mut axis = 0;
        while axis < d {
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
        if axis == d {
            break;
        }
    }
    DensityReport { dense: min_count as f64 >= required, sub_side, required, min_count, witness }
}

pub fn is_dense(sites: &SiteSet, grid: &EtaGrid, params: &DensityParams, delta_plus: f64) -> bool {
    density_report(sites, grid, params, delta_plus).dense
}

/// A basic event C_{Λ,B,B′,S}: B sites hold an X point, B′ sites an X′
/// point, S sites a point of either kind, and all other sites are empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BEvent {
    pub b: SiteSet,
    pub b_prime: SiteSet,
    pub s: SiteSet,
}

impl BEvent {
    pub fn empty() -> Self {
        Self { b: SiteSet::new(), b_prime: SiteSet::new(), s: SiteSet::new() }
    }

    pub fn new(b: SiteSet, b_prime: SiteSet, s: SiteSet, grid: &EtaGrid, density: f64) -> Result<Self> {
        let e = Self { b, b_prime, s };
        e.validate(grid, density)?;
        Ok(e)
    }

    pub fn union(&self) -> SiteSet {
        self.b.iter().chain(&self.b_prime).chain(&self.s).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.b.len() + self.b_prime.len() + self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, grid: &EtaGrid, density: f64) -> Result<()> {
        if !self.b.is_disjoint(&self.b_prime) || !self.b.is_disjoint(&self.s) || !self.b_prime.is_disjoint(&self.s) {
            return Err(Error::invalid("B, B′ and S must be pairwise disjoint"));
        }
        if let Some(k) = self.union().iter().find(|k| !grid.is_site(k)) {
            return Err(Error::invalid(format!("{k:?} is not a grid site")));
        }
        let cap = count_threshold(density, grid.cube().side(), grid.dim());
        if self.len() as f64 >= cap {
            return Err(Error::invalid(format!("|B ⊔ B′ ⊔ S| = {} reaches 16ϱL^d = {cap}", self.len())));
        }
        Ok(())
    }

    /// Whether the two events, as sets of outcomes, meet.
    pub fn intersects(&self, other: &BEvent) -> bool {
        self.union() == other.union() && self.b.is_disjoint(&other.b_prime) && self.b_prime.is_disjoint(&other.b)
    }

    /// Whether a marked configuration (restricted to the grid's box) lies in
    /// the event.
    pub fn contains(&self, y: &MarkedConfiguration, grid: &EtaGrid) -> bool {
        let mut occupied = SiteSet::new();
        for MarkedPoint { point, mark } in y.entries() {
            if !grid.cube().contains(point) {
                continue;
            }
            let Some(k) = grid.site_of(point) else { return false };
            if (self.b.contains(&k) && !mark) || (self.b_prime.contains(&k) && *mark) {
                return false;
            }
            if !occupied.insert(k) {
                return false;
            }
        }
        occupied == self.union()
    }
}

/// Whether η_L ≪ √η_ℓ holds in the weak sense η_L < √η_ℓ.
pub fn scales_well_separated(parent: &EtaGrid, child: &EtaGrid) -> bool {
    parent.eta() < child.eta().sqrt()
}

/// Parent sites realising the child site `a`: those whose centers fall in the
/// inner child cell Λ_{η_ℓ(1−η_ℓ)}(a).
pub fn parent_sites_for(a: &[i64], child: &EtaGrid, parent: &EtaGrid) -> Vec<Site> {
    let inner = Cube::new(child.site_center(a), child.eta() * (1.0 - child.eta())).expect("positive side");
    let Some(ranges) = parent.site_ranges_in(&inner) else { return Vec::new() };
    let mut out = vec![Vec::new()];
    for (lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix: Site| {
                (lo..=hi).map(move |v| {
                    let mut s = prefix.clone();
                    s.push(v);
                    s
                })
            })
            .collect();
    }
    out
}

/// Rewrites a basic event on the child box in terms of the parent grid.
///
/// Each child site is replaced by one parent site from
/// [`parent_sites_for`]; the result lists every such choice. Because candidate
/// sets of distinct child sites are disjoint, distinct outputs have distinct
/// unions and are therefore pairwise disjoint events. At most `limit` events
/// are produced.
pub fn rebase_bevent(be: &BEvent, child: &EtaGrid, parent: &EtaGrid, limit: usize) -> Result<Vec<BEvent>> {
    if parent.eta() >= child.eta() {
        return Err(Error::invalid(format!(
            "parent eta {} must be smaller than child eta {}",
            parent.eta(),
            child.eta()
        )));
    }
    if !parent.cube().contains_cube(child.cube()) {
        return Err(Error::invalid("child box is not inside the parent box"));
    }
    if !scales_well_separated(parent, child) {
        log::warn!(
            "eta_L = {:e} is not below sqrt(eta_l) = {:e}; rebasing may be ambiguous",
            parent.eta(),
            child.eta().sqrt()
        );
    }

    enum Role {
        B,
        BPrime,
        S,
    }
    let mut slots: Vec<(Role, Vec<Site>)> = Vec::with_capacity(be.len());
    let mut total = 1f64;
    for (role, set) in [(0, &be.b), (1, &be.b_prime), (2, &be.s)] {
        for a in set {
            let cands = parent_sites_for(a, child, parent);
            total *= cands.len() as f64;
            let role = match role {
                0 => Role::B,
                1 => Role::BPrime,
                _ => Role::S,
            };
            slots.push((role, cands));
        }
    }
    if total > limit as f64 {
        return Err(Error::Domain(format!("rebasing would produce {total:e} events (limit {limit})")));
    }

    let mut out = vec![BEvent::empty()];
    for (role, cands) in &slots {
        let mut next = Vec::with_capacity(out.len() * cands.len());
        for ev in &out {
            for c in cands {
                let mut e = ev.clone();
                match role {
                    Role::B => e.b.insert(c.clone()),
                    Role::BPrime => e.b_prime.insert(c.clone()),
                    Role::S => e.s.insert(c.clone()),
                };
                next.push(e);
            }
        }
        out = next;
    }
    Ok(out)
}

/// JSON-lines record of a (marked) configuration in a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub dimension: usize,
    pub box_center: Vec<f64>,
    pub box_side: f64,
    pub points: Vec<Point>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub marks: Option<Vec<u8>>,
}

impl ConfigurationRecord {
    pub fn from_configuration(cube: &Cube, cfg: &Configuration) -> Self {
        Self {
            dimension: cube.dim(),
            box_center: cube.center().to_vec(),
            box_side: cube.side(),
            points: cfg.points().to_vec(),
            marks: None,
        }
    }

    pub fn from_marked(cube: &Cube, m: &MarkedConfiguration) -> Self {
        Self {
            dimension: cube.dim(),
            box_center: cube.center().to_vec(),
            box_side: cube.side(),
            points: m.entries().iter().map(|e| e.point.clone()).collect(),
            marks: Some(m.entries().iter().map(|e| e.mark as u8).collect()),
        }
    }
}
