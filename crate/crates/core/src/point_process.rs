//! Poisson and marked Poisson processes on cubes, plus exact Poisson tail
//! oracles.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::rng::StreamSeed;

pub type Point = Vec<f64>;

/// Largest mean for which the count is drawn by CDF inversion.
pub const INVERSION_LIMIT: f64 = 30.0;

/// A finite set of impurity locations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Configuration {
    dim: usize,
    points: Vec<Point>,
}

impl Configuration {
    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new() }
    }

    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self> {
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid(format!("all points must have dimension {dim}")));
        }
        let cfg = Self { dim, points };
        if !cfg.is_distinct() {
            return Err(Error::invalid("configuration points must be pairwise distinct"));
        }
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// N_X(A) for a cube A.
    pub fn count_in(&self, cube: &Cube) -> usize {
        self.points.iter().filter(|p| cube.contains(p)).count()
    }

    /// X ∩ A.
    pub fn restrict(&self, cube: &Cube) -> Configuration {
        Self {
            dim: self.dim,
            points: self.points.iter().filter(|p| cube.contains(p)).cloned().collect(),
        }
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.points.iter().any(|q| q.as_slice() == p)
    }

    pub fn is_disjoint(&self, other: &Configuration) -> bool {
        let keys: HashSet<Vec<u64>> = self.points.iter().map(|p| bits(p)).collect();
        other.points.iter().all(|p| !keys.contains(&bits(p)))
    }

    /// Disjoint union; fails if the two sets share a point.
    pub fn disjoint_union(&self, other: &Configuration) -> Result<Configuration> {
        if self.dim != other.dim {
            return Err(Error::invalid("dimension mismatch in union"));
        }
        if !self.is_disjoint(other) {
            return Err(Error::invalid("configurations are not disjoint"));
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Ok(Self { dim: self.dim, points })
    }

    /// Points sorted lexicographically, for set comparisons.
    pub fn sorted_points(&self) -> Vec<Point> {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| lex_cmp(a, b));
        pts
    }

    pub fn same_set(&self, other: &Configuration) -> bool {
        self.dim == other.dim && self.sorted_points() == other.sorted_points()
    }

    pub fn push(&mut self, p: Point) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::invalid("point dimension mismatch"));
        }
        if self.contains_point(&p) {
            return Err(Error::invalid("duplicate point"));
        }
        self.points.push(p);
        Ok(())
    }

    fn is_distinct(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.points.len());
        self.points.iter().all(|p| seen.insert(bits(p)))
    }
}

fn bits(p: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same point
    p.iter().map(|x| if *x == 0.0 { 0 } else { x.to_bits() }).collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub point: Point,
    /// ε_ζ = 1 when true.
    pub mark: bool,
}

/// A configuration whose points carry Bernoulli marks, (Y, ε_Y).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MarkedConfiguration {
    dim: usize,
    entries: Vec<MarkedPoint>,
}

impl MarkedConfiguration {
    pub fn new(dim: usize, entries: Vec<MarkedPoint>) -> Result<Self> {
        let pts: Vec<Point> = entries.iter().map(|e| e.point.clone()).collect();
        Configuration::new(dim, pts)?;
        Ok(Self { dim, entries })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[MarkedPoint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The underlying point set Y.
    pub fn support(&self) -> Configuration {
        Configuration {
            dim: self.dim,
            points: self.entries.iter().map(|e| e.point.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    pub density: f64,
    pub seed: u64,
}

impl PoissonParams {
    pub fn new(density: f64, seed: u64) -> Result<Self> {
        validate_density(density)?;
        Ok(Self { density, seed })
    }
}

fn validate_density(density: f64) -> Result<()> {
    if !(density > 0.0) || !density.is_finite() {
        return Err(Error::invalid(format!("density must be positive and finite, got {density}")));
    }
    Ok(())
}

/// Draws a Poisson(mean) count: CDF inversion up to [`INVERSION_LIMIT`],
/// rejection sampling above it.
pub fn sample_poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean <= INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                // lost to rounding at the far tail
                break;
            }
        }
        k
    } else {
        let dist = rand_distr::Poisson::new(mean).expect("mean is positive and finite");
        dist.sample(rng) as u64
    }
}

/// Uniform point in the open cube.
pub fn sample_uniform_point<R: Rng + ?Sized>(cube: &Cube, rng: &mut R) -> Point {
    loop {
        let p: Point = cube
            .center()
            .iter()
            .map(|c| c + (rng.random::<f64>() - 0.5) * cube.side())
            .collect();
        if cube.contains(&p) {
            return p;
        }
    }
}

/// Poisson process of the given density on `cube`, drawn from `rng`.
pub fn sample_poisson_with<R: Rng + ?Sized>(cube: &Cube, density: f64, rng: &mut R) -> Result<Configuration> {
    validate_density(density)?;
    let n = sample_poisson_count(density * cube.volume(), rng) as usize;
    let mut seen = HashSet::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let p = sample_uniform_point(cube, rng);
        if seen.insert(bits(&p)) {
            points.push(p);
        }
    }
    Ok(Configuration { dim: cube.dim(), points })
}

/// Poisson process with density `params.density` on `cube`.
///
/// The same `(cube, params)` always reproduces the same configuration.
pub fn sample_poisson(cube: &Cube, params: &PoissonParams) -> Result<Configuration> {
    let mut rng = StreamSeed::new(params.seed).rng();
    sample_poisson_with(cube, params.density, &mut rng)
}

/// Marked Poisson process: locations from a Poisson process of density
/// `density2` (the 2ϱ of the thinning construction), fair i.i.d. marks drawn
/// from an independent child stream.
pub fn sample_marked(cube: &Cube, density2: f64, seed: StreamSeed) -> Result<MarkedConfiguration> {
    let mut pos_rng = seed.split(0).rng();
    let mut mark_rng = seed.split(1).rng();
    let support = sample_poisson_with(cube, density2, &mut pos_rng)?;
    let entries = support
        .points
        .into_iter()
        .map(|point| MarkedPoint { point, mark: mark_rng.random::<bool>() })
        .collect();
    Ok(MarkedConfiguration { dim: cube.dim(), entries })
}

/// (X, X′): the mark-1 points and the mark-0 points.
pub fn split_marked(m: &MarkedConfiguration) -> (Configuration, Configuration) {
    let (ones, zeros): (Vec<&MarkedPoint>, Vec<&MarkedPoint>) = m.entries.iter().partition(|e| e.mark);
    let collect = |v: Vec<&MarkedPoint>| Configuration {
        dim: m.dim,
        points: v.into_iter().map(|e| e.point.clone()).collect(),
    };
    (collect(ones), collect(zeros))
}

/// ln k!
pub fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// P{N = k} for N ~ Poisson(mu).
pub fn poisson_pmf(mu: f64, k: u64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mu.ln() - mu - ln_factorial(k)).exp()
}

/// P{N ≥ k} for N ~ Poisson(mu).
///
/// Sums the upper tail directly when `k > mu` (no cancellation), otherwise
/// subtracts the lower CDF from one.
pub fn poisson_tail_exact(mu: f64, k: u64) -> Result<f64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("Poisson mean must be nonnegative and finite, got {mu}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    if k as f64 > mu {
        let mut term = poisson_pmf(mu, k);
        let mut sum = 0.0;
        let mut j = k;
        while term > 0.0 {
            sum += term;
            j += 1;
            term *= mu / j as f64;
            if term < 1e-18 * sum {
                break;
            }
        }
        Ok(sum.min(1.0))
    } else {
        let mut term = (-mu).exp();
        let mut cdf = 0.0;
        for j in 0..k {
            if j > 0 {
                term *= mu / j as f64;
            }
            cdf += term;
        }
        Ok((1.0 - cdf).clamp(0.0, 1.0))
    }
}

/// Outcome of checking one inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundCheck {
    Holds { exact: f64, bound: f64 },
    Violated { exact: f64, bound: f64 },
    NotAsserted { reason: String },
}

impl BoundCheck {
    fn compare(exact: f64, bound: f64) -> Self {
        if exact < bound {
            BoundCheck::Holds { exact, bound }
        } else {
            BoundCheck::Violated { exact, bound }
        }
    }

    pub fn passed(&self) -> bool {
        !matches!(self, BoundCheck::Violated { .. })
    }

    pub fn asserted(&self) -> bool {
        !matches!(self, BoundCheck::NotAsserted { .. })
    }
}

/// μ^k e^{−μ}/k! < P{N ≥ k} < μ^k/k!
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub mu: f64,
    pub k: u64,
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn holds(&self) -> bool {
        self.lower < self.exact && self.exact < self.upper
    }
}

pub fn tail_bracket(mu: f64, k: u64) -> Result<Bracket> {
    if k == 0 {
        return Err(Error::invalid("tail bracketing needs k ≥ 1"));
    }
    let exact = poisson_tail_exact(mu, k)?;
    let upper = (k as f64 * mu.ln() - ln_factorial(k)).exp();
    Ok(Bracket { mu, k, lower: upper * (-mu).exp(), exact, upper })
}

/// C_k = ∫₀^∞ λ^{k−1}/(k−1)! e^{−λ/2} dλ by composite Simpson quadrature.
pub fn lower_tail_constant(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("C_k is defined for k ≥ 1"));
    }
    let km1 = (k - 1) as f64;
    let lnf = ln_factorial(k - 1);
    let integrand = |lam: f64| {
        if lam == 0.0 {
            return if k == 1 { 1.0 } else { 0.0 };
        }
        (km1 * lam.ln() - lnf - 0.5 * lam).exp()
    };
    let upper = 2.0 * km1 + 40.0 * (km1 + 1.0).sqrt() + 100.0;
    let n = 40_000usize;
    let h = upper / n as f64;
    let mut acc = integrand(0.0) + integrand(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(i as f64 * h);
    }
    Ok(acc * h / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub mu: f64,
    pub a: f64,
    pub k: u64,
    /// P{N ≥ k} bracketing.
    pub bracket: BoundCheck,
    /// P{N ≥ aμ} < e^{−aμ}, asserted when eμ > 1 and a > e².
    pub large_deviation: BoundCheck,
    /// P{N < k} < C_k e^{−μ/2}, asserted when k ≥ 1.
    pub lower_tail: BoundCheck,
    pub c_k: Option<f64>,
}

impl DeviationReport {
    pub fn all_pass(&self) -> bool {
        self.bracket.passed() && self.large_deviation.passed() && self.lower_tail.passed()
    }
}

/// Checks the Poisson deviation inequalities at (μ, a, k). Parameters outside
/// an inequality's validity domain yield [`BoundCheck::NotAsserted`].
pub fn check_deviation_bounds(mu: f64, a: f64, k: u64) -> Result<DeviationReport> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("Poisson mean must be nonnegative and finite, got {mu}")));
    }
    let e = std::f64::consts::E;

    let bracket = if k >= 1 && mu > 0.0 {
        let b = tail_bracket(mu, k)?;
        if b.holds() {
            BoundCheck::Holds { exact: b.exact, bound: b.upper }
        } else {
            BoundCheck::Violated { exact: b.exact, bound: b.upper }
        }
    } else {
        BoundCheck::NotAsserted { reason: "bracketing needs k ≥ 1 and μ > 0".into() }
    };

    let large_deviation = if e * mu > 1.0 && a > e * e {
        let threshold = (a * mu).ceil() as u64;
        BoundCheck::compare(poisson_tail_exact(mu, threshold)?, (-a * mu).exp())
    } else {
        BoundCheck::NotAsserted { reason: format!("needs eμ > 1 and a > e² (μ = {mu}, a = {a})") }
    };

    let (lower_tail, c_k) = if k >= 1 {
        let c = lower_tail_constant(k)?;
        let exact = 1.0 - poisson_tail_exact(mu, k)?;
        // P{N < k} computed by direct summation when it is tiny
        let exact = if exact < 1e-3 { (0..k).map(|j| poisson_pmf(mu, j)).sum() } else { exact };
        (BoundCheck::compare(exact, c * (-0.5 * mu).exp()), Some(c))
    } else {
        (BoundCheck::NotAsserted { reason: "needs k ≥ 1".into() }, None)
    };

    Ok(DeviationReport { mu, a, k, bracket, large_deviation, lower_tail, c_k })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, side: f64) -> Cube {
        Cube::centered(d, side).unwrap()
    }

    #[test]
    fn zero_side_box_is_rejected() {
        assert!(Cube::centered(1, 0.0).is_err());
        let c = unit(1, 1.0);
        assert!(matches!(
            sample_poisson(&c, &PoissonParams { density: 0.0, seed: 1 }),
            Err(Error::InvalidParameter(_))
        ));
        assert!(PoissonParams::new(-1.0, 0).is_err());
    }

    #[test]
    fn reproducible() {
        let c = unit(2, 3.0);
        let p = PoissonParams::new(2.0, 99).unwrap();
        let a = sample_poisson(&c, &p).unwrap();
        let b = sample_poisson(&c, &p).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|x| c.contains(x)));
    }

    #[test]
    fn split_all_ones_and_all_zeros() {
        let pts: Vec<Point> = (0..4).map(|i| vec![i as f64 * 0.1]).collect();
        let ones = MarkedConfiguration::new(
            1,
            pts.iter().map(|p| MarkedPoint { point: p.clone(), mark: true }).collect(),
        )
        .unwrap();
        let (x, xp) = split_marked(&ones);
        assert_eq!(x.len(), 4);
        assert!(xp.is_empty());

        let zeros = MarkedConfiguration::new(
            1,
            pts.iter().map(|p| MarkedPoint { point: p.clone(), mark: false }).collect(),
        )
        .unwrap();
        let (x, xp) = split_marked(&zeros);
        assert!(x.is_empty());
        assert_eq!(xp.len(), 4);
    }

    #[test]
    fn split_mixed_five_points() {
        let entries = (0..5)
            .map(|i| MarkedPoint { point: vec![i as f64, 0.5], mark: i == 1 || i == 3 })
            .collect();
        let m = MarkedConfiguration::new(2, entries).unwrap();
        let (x, xp) = split_marked(&m);
        assert_eq!((x.len(), xp.len()), (2, 3));
        assert!(x.is_disjoint(&xp));
        assert!(x.disjoint_union(&xp).unwrap().same_set(&m.support()));
    }

    #[test]
    fn empty_marked_configuration() {
        // a tiny box with tiny density: the seed below produces zero points
        let c = unit(1, 1e-3);
        let m = (0..50u64)
            .map(|s| sample_marked(&c, 1e-3, StreamSeed::new(s)).unwrap())
            .find(|m| m.is_empty())
            .expect("some seed gives an empty sample");
        let (x, xp) = split_marked(&m);
        assert!(x.is_empty() && xp.is_empty());
    }

    #[test]
    fn tail_values() {
        // oracle: 1 - e^{-1}
        let t = poisson_tail_exact(1.0, 1).unwrap();
        assert!((t - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((t - 0.63212).abs() < 1e-5);
        assert_eq!(poisson_tail_exact(3.7, 0).unwrap(), 1.0);
        assert!(poisson_tail_exact(-1.0, 2).is_err());

        let b = tail_bracket(1.0, 1).unwrap();
        assert!((b.lower - 0.36788).abs() < 1e-5);
        assert_eq!(b.upper, 1.0);
        assert!(b.holds());
    }

    #[test]
    fn deviation_report_examples() {
        let r = check_deviation_bounds(1.0, 8.0, 1).unwrap();
        match r.large_deviation {
            BoundCheck::Holds { exact, bound } => {
                // e^{-1} Σ_{j≥8} 1/j!
                assert!((exact - 1.0255e-5).abs() < 1e-8, "{exact}");
                assert!((bound - (-8.0f64).exp()).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }

        let r = check_deviation_bounds(0.1, 8.0, 1).unwrap();
        assert!(!r.large_deviation.asserted());

        let r = check_deviation_bounds(20.0, 8.0, 1).unwrap();
        assert!((r.c_k.unwrap() - 2.0).abs() < 1e-9);
        match r.lower_tail {
            BoundCheck::Holds { exact, bound } => {
                assert!((exact - (-20.0f64).exp()).abs() < 1e-20);
                assert!((bound - 2.0 * (-10.0f64).exp()).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        // ∫ λ^{k-1}/(k-1)! e^{-λ/2} = 2^k
        for k in 1..=12u64 {
            let c = lower_tail_constant(k).unwrap();
            assert!((c / 2f64.powi(k as i32) - 1.0).abs() < 1e-9, "k={k}: {c}");
        }
    }

    #[test]
    fn count_sampler_large_mean_branch() {
        let mut rng = StreamSeed::new(5).rng();
        let n = 4000;
        let mean = 80.0;
        let s: f64 = (0..n).map(|_| sample_poisson_count(mean, &mut rng) as f64).sum();
        let avg = s / n as f64;
        assert!((avg - mean).abs() < 4.0 * (mean / n as f64).sqrt(), "{avg}");
    }
}
