//! D² sampling and the seeding algorithms built on it.
//!
//! All seeding runs go through [`Seeder::run`]: each step draws ℓ candidates,
//! evaluates every candidate's cost drop in one pass over `X`, and lets a
//! [`Rule`] pick one. Plain k-means++ is the one-candidate case, greedy
//! k-means++ is the [`Greedy`] rule, and arbitrary rules plug in the same way.
//! The run records a [`RunTrace`] from which the instrumentation replays
//! everything it needs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid_coords, total_cost, CenterSet, Coords, Provenance, WeightedPointSet};
use crate::rng;

/// What a rule sees when it has to pick among the candidates of one step.
pub struct Selection<'a> {
    /// 1-based step number.
    pub step: usize,
    /// Point indices of the ℓ candidates, in draw order.
    pub candidates: &'a [usize],
    /// `φ(X, C) − φ(X, C ∪ {c})` per candidate; `None` while no center exists.
    pub drops: Option<&'a [f64]>,
    /// `φ(X, C ∪ {c})` per candidate.
    pub costs_after: &'a [f64],
    pub points: &'a WeightedPointSet,
    pub centers: &'a CenterSet,
    run_seed: u64,
}

impl Selection<'_> {
    /// A random stream private to this step of this run.
    pub fn sub_rng(&self) -> ChaCha8Rng {
        rng::stream(rng::sub_seed(self.run_seed, self.step as u64))
    }
}

/// Picks one of the ℓ candidates. Returns a 0-based candidate slot.
pub trait Rule: Send + Sync {
    fn name(&self) -> &str;
    fn select(&self, s: &Selection<'_>) -> usize;
}

/// Always takes the first candidate; with ℓ = 1 this is plain k-means++.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstCandidate;

impl Rule for FirstCandidate {
    fn name(&self) -> &str {
        "first"
    }

    fn select(&self, _: &Selection<'_>) -> usize {
        0
    }
}

/// Takes the candidate with the largest cost drop, lowest slot on ties. Before
/// any center exists it takes the candidate with the smallest resulting cost.
#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy;

impl Rule for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn select(&self, s: &Selection<'_>) -> usize {
        match s.drops {
            Some(drops) => {
                let mut best = 0;
                for (j, &d) in drops.iter().enumerate().skip(1) {
                    if d > drops[best] {
                        best = j;
                    }
                }
                best
            }
            None => {
                let costs = s.costs_after;
                let mut best = 0;
                for (j, &c) in costs.iter().enumerate().skip(1) {
                    if c < costs[best] {
                        best = j;
                    }
                }
                best
            }
        }
    }
}

/// Takes the first candidate that is one of `prefer` (earlier entries of
/// `prefer` win), otherwise the first candidate not in `avoid`, and only falls
/// back to an avoided point when every candidate is one.
#[derive(Clone, Debug)]
pub struct PreferAvoid {
    pub name: String,
    pub prefer: Vec<usize>,
    pub avoid: Vec<usize>,
}

impl Rule for PreferAvoid {
    fn name(&self) -> &str {
        &self.name
    }

    fn select(&self, s: &Selection<'_>) -> usize {
        for p in &self.prefer {
            if let Some(j) = s.candidates.iter().position(|c| c == p) {
                return j;
            }
        }
        s.candidates
            .iter()
            .position(|c| !self.avoid.contains(c))
            .unwrap_or(0)
    }
}

/// How candidates are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// First draw ∝ weight, later draws ∝ current cost.
    D2,
    /// Every draw ∝ weight: the uniform-seeding baseline.
    Uniform,
}

/// One seeding step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub candidates: Vec<usize>,
    pub candidate_drops: Option<Vec<f64>>,
    pub candidate_costs_after: Vec<f64>,
    /// 0-based slot of the chosen candidate.
    pub chosen: usize,
    /// `None` when the step started without any center.
    pub cost_before: Option<f64>,
    pub cost_after: f64,
}

impl StepRecord {
    pub fn chosen_point(&self) -> usize {
        self.candidates[self.chosen]
    }
}

/// Full record of a seeding run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    pub ell: usize,
    pub rule: String,
    /// Point indices of the prescribed centers the run started from.
    pub prescribed: Vec<usize>,
    pub steps: Vec<StepRecord>,
    pub final_centers: CenterSet,
}

impl RunTrace {
    /// Point index of every center, prescribed ones first.
    pub fn center_points(&self) -> Vec<usize> {
        let mut out = self.prescribed.clone();
        out.extend(self.steps.iter().map(StepRecord::chosen_point));
        out
    }

    pub fn final_cost(&self) -> Option<f64> {
        self.steps.last().map(|s| s.cost_after)
    }
}

/// Pairwise squared distances of a point set, shared read-only by all trials.
#[derive(Debug)]
pub struct DistanceCache {
    n: usize,
    d: Vec<f64>,
}

impl DistanceCache {
    /// Largest `n²` the cache will hold (about 170 MB).
    pub const MAX_ENTRIES: usize = 22_000_000;

    pub fn build(x: &WeightedPointSet) -> Option<Self> {
        let n = x.len();
        if n.checked_mul(n)? > Self::MAX_ENTRIES {
            return None;
        }
        let mut d = vec![0.0; n * n];
        d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x.sq_dist(i, j);
            }
        });
        Some(DistanceCache { n, d })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

/// Runs seeding on one point set, optionally starting from prescribed centers.
pub struct Seeder<'a> {
    x: &'a WeightedPointSet,
    prescribed: Vec<usize>,
    cache: Option<&'a DistanceCache>,
    distinct: usize,
    distinct_prescribed: usize,
    weight_prefix: Vec<f64>,
}

impl<'a> Seeder<'a> {
    pub fn new(x: &'a WeightedPointSet) -> Self {
        Self::with_prescribed(x, Vec::new())
    }

    pub fn with_prescribed(x: &'a WeightedPointSet, prescribed: Vec<usize>) -> Self {
        let mut acc = 0.0;
        let weight_prefix = x
            .points()
            .iter()
            .map(|p| {
                acc += p.weight;
                acc
            })
            .collect();
        Seeder {
            x,
            distinct: x.distinct_count(),
            distinct_prescribed: x.distinct_among(&prescribed),
            prescribed,
            cache: None,
            weight_prefix,
        }
    }

    pub fn with_cache(mut self, cache: Option<&'a DistanceCache>) -> Self {
        self.cache = cache.filter(|c| c.n == self.x.len());
        self
    }

    pub fn points(&self) -> &WeightedPointSet {
        self.x
    }

    /// Weighted squared distances from every point to point `c`, written into `out`.
    fn weighted_dists(&self, c: usize, out: &mut [f64]) {
        match self.cache {
            Some(cache) => {
                for ((o, d), p) in out.iter_mut().zip(cache.row(c)).zip(self.x.points()) {
                    *o = p.weight * d;
                }
            }
            None => {
                let cc = &self.x.point(c).coords;
                for (o, p) in out.iter_mut().zip(self.x.points()) {
                    *o = p.weight * p.coords.sq_dist(cc);
                }
            }
        }
    }

    fn sq_dist(&self, i: usize, j: usize) -> f64 {
        match self.cache {
            Some(cache) => cache.row(i)[j],
            None => self.x.sq_dist(i, j),
        }
    }

    /// Seeds `k` centers on top of the prescribed ones.
    pub fn run(
        &self,
        k: usize,
        ell: usize,
        rule: &dyn Rule,
        mode: SamplingMode,
        seed: u64,
    ) -> Result<RunTrace> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if ell == 0 {
            return Err(Error::InvalidParameter("ℓ must be at least 1".into()));
        }
        if mode == SamplingMode::D2 && k + self.distinct_prescribed > self.distinct {
            return Err(Error::KExceedsPoints {
                k: k + self.distinct_prescribed,
                distinct: self.distinct,
            });
        }
        let n = self.x.len();
        let mut rng = rng::stream(seed);
        let mut centers = CenterSet::from_points(self.x, &self.prescribed);
        let mut center_points = self.prescribed.clone();

        // Current weighted cost of every point; meaningless while `centers` is empty.
        let mut cur = vec![f64::INFINITY; n];
        let mut scratch = vec![0.0; n];
        for &c in &self.prescribed {
            self.weighted_dists(c, &mut scratch);
            for (a, b) in cur.iter_mut().zip(&scratch) {
                if *b < *a {
                    *a = *b;
                }
            }
        }
        let mut cost: Option<f64> = (!centers.is_empty()).then(|| cur.iter().sum());
        let mut prefix = vec![0.0; n];
        let mut steps = Vec::with_capacity(k);

        for step in 1..=k {
            let candidates: Vec<usize> = match (mode, cost) {
                (SamplingMode::D2, Some(total)) if total > 0.0 => {
                    let mut acc = 0.0;
                    for (p, c) in prefix.iter_mut().zip(&cur) {
                        acc += c;
                        *p = acc;
                    }
                    (0..ell).map(|_| draw(&prefix, &mut rng)).collect()
                }
                (SamplingMode::D2, Some(_)) => {
                    let free: Vec<usize> = (0..n)
                        .filter(|&i| center_points.iter().all(|&c| self.sq_dist(i, c) > 0.0))
                        .collect();
                    if free.is_empty() {
                        return Err(Error::Exhausted);
                    }
                    (0..ell)
                        .map(|_| free[rng.random_range(0..free.len())])
                        .collect()
                }
                _ => (0..ell)
                    .map(|_| draw(&self.weight_prefix, &mut rng))
                    .collect(),
            };

            let mut drops = vec![0.0; ell];
            let mut costs_after = vec![0.0; ell];
            for j in 0..ell {
                if let Some(prev) = candidates[..j].iter().position(|&c| c == candidates[j]) {
                    drops[j] = drops[prev];
                    costs_after[j] = costs_after[prev];
                    continue;
                }
                self.weighted_dists(candidates[j], &mut scratch);
                let (mut drop, mut after) = (0.0, 0.0);
                if cost.is_some() {
                    for (c, d) in cur.iter().zip(&scratch) {
                        if d < c {
                            drop += c - d;
                            after += d;
                        } else {
                            after += c;
                        }
                    }
                } else {
                    after = scratch.iter().sum();
                }
                drops[j] = drop;
                costs_after[j] = after;
            }

            let sel = Selection {
                step,
                candidates: &candidates,
                drops: cost.is_some().then_some(drops.as_slice()),
                costs_after: &costs_after,
                points: self.x,
                centers: &centers,
                run_seed: seed,
            };
            let chosen = rule.select(&sel);
            if chosen >= ell {
                return Err(Error::RuleViolation {
                    rule: rule.name().to_string(),
                    index: chosen,
                    ell,
                });
            }
            let point = candidates[chosen];
            self.weighted_dists(point, &mut scratch);
            if cost.is_some() {
                for (c, d) in cur.iter_mut().zip(&scratch) {
                    if *d < *c {
                        *c = *d;
                    }
                }
            } else {
                cur.copy_from_slice(&scratch);
            }
            let cost_after = cur.iter().sum();
            centers.push(
                self.x.point(point).coords.clone(),
                Some(Provenance {
                    step,
                    candidate: chosen,
                    point,
                }),
            )?;
            center_points.push(point);
            steps.push(StepRecord {
                step,
                candidates,
                candidate_drops: cost.is_some().then_some(drops),
                candidate_costs_after: costs_after,
                chosen,
                cost_before: cost,
                cost_after,
            });
            cost = Some(cost_after);
        }

        Ok(RunTrace {
            seed,
            ell,
            rule: rule.name().to_string(),
            prescribed: self.prescribed.clone(),
            steps,
            final_centers: centers,
        })
    }
}

/// Inverts a cumulative sum: first index whose prefix exceeds `u · total`.
fn draw(prefix: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *prefix.last().expect("nonempty");
    let u = rng.random::<f64>() * total;
    let i = prefix.partition_point(|&p| p <= u);
    if i < prefix.len() {
        i
    } else {
        // `u` rounded up to `total`: take the last point with positive mass.
        let last = prefix.partition_point(|&p| p < total);
        last.min(prefix.len() - 1)
    }
}

/// One D² draw against an arbitrary center set: ∝ weight when `c` is empty,
/// uniform over points off every center when the total cost is zero.
pub fn d2_sample(x: &WeightedPointSet, c: &CenterSet, rng: &mut ChaCha8Rng) -> Result<usize> {
    let costs: Vec<f64> = if c.is_empty() {
        x.points().iter().map(|p| p.weight).collect()
    } else {
        if c.dim != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                got: c.dim,
            });
        }
        x.points()
            .iter()
            .map(|p| p.weight * c.nearest(&p.coords).expect("nonempty").1)
            .collect()
    };
    let mut acc = 0.0;
    let prefix: Vec<f64> = costs
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    if acc > 0.0 {
        return Ok(draw(&prefix, rng));
    }
    let free: Vec<usize> = (0..x.len())
        .filter(|&i| c.nearest(&x.point(i).coords).is_some_and(|(_, d)| d > 0.0))
        .collect();
    if free.is_empty() {
        return Err(Error::Exhausted);
    }
    Ok(free[rng.random_range(0..free.len())])
}

/// Algorithm 1: plain k-means++.
pub fn seed_kmeanspp(x: &WeightedPointSet, k: usize, seed: u64) -> Result<(CenterSet, RunTrace)> {
    seed_with_rule(x, k, 1, &FirstCandidate, seed)
}

/// Greedy k-means++ with ℓ candidates per step.
pub fn seed_greedy(
    x: &WeightedPointSet,
    k: usize,
    ell: usize,
    seed: u64,
) -> Result<(CenterSet, RunTrace)> {
    seed_with_rule(x, k, ell, &Greedy, seed)
}

/// ℓ candidates per step, the choice delegated to `rule`.
pub fn seed_with_rule(
    x: &WeightedPointSet,
    k: usize,
    ell: usize,
    rule: &dyn Rule,
    seed: u64,
) -> Result<(CenterSet, RunTrace)> {
    let trace = Seeder::new(x).run(k, ell, rule, SamplingMode::D2, seed)?;
    Ok((trace.final_centers.clone(), trace))
}

/// Every center drawn ∝ weight, ignoring the current centers.
pub fn seed_uniform(x: &WeightedPointSet, k: usize, seed: u64) -> Result<(CenterSet, RunTrace)> {
    let trace = Seeder::new(x).run(k, 1, &FirstCandidate, SamplingMode::Uniform, seed)?;
    Ok((trace.final_centers.clone(), trace))
}

/// Outcome of Lloyd refinement.
#[derive(Clone, Debug)]
pub struct LloydResult {
    pub centers: CenterSet,
    /// Cost before the first iteration, then after every accepted iteration.
    pub costs: Vec<f64>,
    pub iterations: usize,
}

/// Lloyd's algorithm: assign to the nearest center, move centers to weighted
/// centroids, repeat until the relative improvement drops below `tol`. An
/// iteration that would not lower the cost is discarded and ends the run.
pub fn lloyd_refine(
    x: &WeightedPointSet,
    c: &CenterSet,
    max_iters: usize,
    tol: f64,
) -> Result<LloydResult> {
    let mut centers = c.clone();
    let mut cost = total_cost(x, &centers)?;
    let mut costs = vec![cost];
    let mut iterations = 0;
    while iterations < max_iters && cost > 0.0 {
        iterations += 1;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
        for (i, p) in x.points().iter().enumerate() {
            let (j, _) = centers.nearest(&p.coords).expect("nonempty");
            members[j].push(i);
        }
        let mut next = CenterSet::empty(centers.dim);
        for (j, m) in members.iter().enumerate() {
            let keep = || centers.centers[j].clone();
            let coords: Coords = if m.is_empty() {
                keep()
            } else {
                centroid_coords(x, m).unwrap_or_else(|_| keep())
            };
            next.push(coords, centers.provenance[j])?;
        }
        let next_cost = total_cost(x, &next)?;
        if next_cost >= cost {
            break;
        }
        let improvement = (cost - next_cost) / cost;
        centers = next;
        cost = next_cost;
        costs.push(cost);
        if improvement < tol {
            break;
        }
    }
    Ok(LloydResult {
        centers,
        costs,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPoint;

    fn line(xs: &[f64]) -> WeightedPointSet {
        WeightedPointSet::from_unweighted(xs.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn d2_sample_never_picks_a_center() {
        let x = line(&[0.0, 1.0]);
        let c = CenterSet::from_points(&x, &[0]);
        let mut rng = rng::stream(1);
        for _ in 0..1000 {
            assert_eq!(d2_sample(&x, &c, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn d2_sample_empty_centers_follows_weights() {
        let x = WeightedPointSet::new(
            1,
            vec![
                WeightedPoint::new(vec![0.0], 1.0),
                WeightedPoint::new(vec![1.0], 3.0),
            ],
        )
        .unwrap();
        let mut rng = rng::stream(2);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| d2_sample(&x, &CenterSet::empty(1), &mut rng).unwrap() == 1)
            .count() as f64;
        let p = 0.75;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - n as f64 * p).abs() < 3.0 * sigma);
    }

    #[test]
    fn d2_sample_collinear_chi_square() {
        let x = line(&[0.0, 1.0, 3.0]);
        let c = CenterSet::from_points(&x, &[0]);
        let mut rng = rng::stream(3);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[d2_sample(&x, &c, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        let expect = [0.1 * n as f64, 0.9 * n as f64];
        let chi: f64 = counts[1..]
            .iter()
            .zip(expect)
            .map(|(&o, e)| (o as f64 - e).powi(2) / e)
            .sum();
        // 1 degree of freedom, 99.9% quantile.
        assert!(chi < 10.83, "chi = {chi}");
    }

    #[test]
    fn d2_sample_exhausted() {
        let x = line(&[0.0, 0.0]);
        let c = CenterSet::from_points(&x, &[0]);
        assert!(matches!(
            d2_sample(&x, &c, &mut rng::stream(0)),
            Err(Error::Exhausted)
        ));
    }

    #[test]
    fn kmeanspp_k_equals_n_covers_everything() {
        let x = line(&[0.0, 1.0, 5.0, 9.0, 20.0]);
        let (c, t) = seed_kmeanspp(&x, 5, 9).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(t.final_cost(), Some(0.0));
        assert!(matches!(
            seed_kmeanspp(&x, 6, 9),
            Err(Error::KExceedsPoints { .. })
        ));
    }

    #[test]
    fn kmeanspp_k1_cost_and_first_draw() {
        let x = line(&[0.0, 1.0, 5.0]);
        let (c, t) = seed_kmeanspp(&x, 1, 4).unwrap();
        assert_eq!(t.final_cost().unwrap(), total_cost(&x, &c).unwrap());
        assert_eq!(t.steps[0].cost_before, None);
        assert_eq!(t.steps[0].candidate_drops, None);
    }

    #[test]
    fn greedy_with_one_candidate_is_kmeanspp() {
        let x = line(&[0.0, 1.0, 4.0, 9.0, 11.0, 30.0, 31.0]);
        for seed in 0..50 {
            let (_, a) = seed_kmeanspp(&x, 4, seed).unwrap();
            let (_, b) = seed_greedy(&x, 4, 1, seed).unwrap();
            assert_eq!(a.center_points(), b.center_points());
            assert_eq!(a.final_cost(), b.final_cost());
        }
    }

    #[test]
    fn identical_candidates_choose_that_point() {
        let x = WeightedPointSet::new(
            1,
            vec![
                WeightedPoint::new(vec![0.0], 1.0),
                WeightedPoint::new(vec![1.0], 1.0),
            ],
        )
        .unwrap();
        let t = Seeder::with_prescribed(&x, vec![0])
            .run(1, 6, &Greedy, SamplingMode::D2, 5)
            .unwrap();
        assert_eq!(t.steps[0].candidates, vec![1; 6]);
        assert_eq!(t.steps[0].chosen_point(), 1);
    }

    struct Broken;
    impl Rule for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn select(&self, s: &Selection<'_>) -> usize {
            s.candidates.len()
        }
    }

    #[test]
    fn out_of_range_rule_is_rejected() {
        let x = line(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            seed_with_rule(&x, 2, 3, &Broken, 0),
            Err(Error::RuleViolation { index: 3, ell: 3, .. })
        ));
    }

    #[test]
    fn trace_is_consistent() {
        let mut pts = Vec::new();
        for i in 0..40 {
            let v = i as f64;
            pts.push(WeightedPoint::new(vec![v.sin() * 10.0, (v * 0.7).cos() * v], 0.5 + (i % 3) as f64));
        }
        let x = WeightedPointSet::new(2, pts).unwrap();
        for seed in 0..20 {
            let (c, t) = seed_greedy(&x, 6, 3, seed).unwrap();
            for w in t.steps.windows(2) {
                assert_eq!(Some(w[0].cost_after), w[1].cost_before);
            }
            for s in &t.steps {
                let drops = match &s.candidate_drops {
                    Some(d) => d,
                    None => continue,
                };
                let before = s.cost_before.unwrap();
                assert!(s.cost_after <= before);
                assert!(drops.iter().all(|&d| d <= drops[s.chosen]));
                let diff = before - s.cost_after;
                assert!((diff - drops[s.chosen]).abs() <= 1e-9 * before);
            }
            let recomputed = total_cost(&x, &c).unwrap();
            assert!((recomputed - t.final_cost().unwrap()).abs() <= 1e-9 * recomputed);
        }
    }

    #[test]
    fn cached_and_uncached_runs_agree() {
        let x = line(&[0.0, 1.0, 4.0, 9.0, 11.0, 30.0, 31.0, 50.0]);
        let cache = DistanceCache::build(&x).unwrap();
        for seed in 0..20 {
            let a = Seeder::new(&x).run(4, 3, &Greedy, SamplingMode::D2, seed).unwrap();
            let b = Seeder::new(&x)
                .with_cache(Some(&cache))
                .run(4, 3, &Greedy, SamplingMode::D2, seed)
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lloyd_fixed_point_is_unchanged() {
        let x = line(&[-1.0, 1.0, 9.0, 11.0]);
        let c = CenterSet::from_dense(1, vec![vec![0.0], vec![10.0]]).unwrap();
        let r = lloyd_refine(&x, &c, 10, 1e-9).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.centers.centers, c.centers);
    }

    #[test]
    fn lloyd_converges_to_pair_midpoints() {
        let x = WeightedPointSet::from_unweighted(vec![
            vec![0.0, 0.0],
            vec![0.0, 2.0],
            vec![100.0, 0.0],
            vec![100.0, 2.0],
        ])
        .unwrap();
        let c = CenterSet::from_dense(2, vec![vec![0.3, 0.4], vec![99.0, 1.5]]).unwrap();
        let r = lloyd_refine(&x, &c, 50, 1e-12).unwrap();
        assert_eq!(r.centers.centers[0], Coords::Dense(vec![0.0, 1.0]));
        assert_eq!(r.centers.centers[1], Coords::Dense(vec![100.0, 1.0]));
        assert_eq!(*r.costs.last().unwrap(), 4.0);
        assert!(r.costs.windows(2).all(|w| w[1] <= w[0]));
    }
}
