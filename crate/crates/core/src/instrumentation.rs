//! Diagnostics replayed from a [`RunTrace`] against a reference partition:
//! covered and solved clusters, HIT counts, the `R_i` radius with its two
//! neighbourhoods, good and bad steps, and the average uncovered-cluster cost.
//!
//! Step `s` (1-based) draws its candidates against `C_{s−1}`, the prescribed
//! centers plus the first `s − 1` chosen ones; every per-step quantity here is
//! evaluated against that set, before the step's own insertion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid_coords, total_cost, CenterSet, ClusterRef, Coords, WeightedPointSet};
use crate::seeding::RunTrace;

/// Default factor in the definition of a solved cluster.
pub const SOLVED_FACTOR: f64 = 1e5;

/// Where a reference partition came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSource {
    GroundTruth,
    ExactPartition,
    ExactSubset,
    /// Best of several Lloyd-polished k-means++ runs; not a certified optimum.
    HeuristicReference,
}

/// A fixed reference clustering of `X`.
#[derive(Clone, Debug)]
pub struct OptimalPartition {
    /// One entry per reference center; clusters may be empty.
    pub clusters: Vec<ClusterRef>,
    pub reference_centers: CenterSet,
    pub opt_cost: f64,
    pub source: ReferenceSource,
    /// Cluster label of every point.
    pub labels: Vec<usize>,
    /// Weighted centroid `μ(K)` per cluster (`None` when empty or weightless).
    pub centroids: Vec<Option<Coords>>,
    /// `φ*(K)` per cluster.
    pub opt1: Vec<f64>,
}

impl OptimalPartition {
    /// Assigns every point to its nearest reference center (lowest index on ties).
    pub fn from_centers(
        x: &WeightedPointSet,
        centers: CenterSet,
        source: ReferenceSource,
    ) -> Result<Self> {
        let opt_cost = total_cost(x, &centers)?;
        let mut clusters: Vec<ClusterRef> = (0..centers.len())
            .map(|label| ClusterRef {
                label,
                members: Vec::new(),
            })
            .collect();
        let labels: Vec<usize> = x
            .points()
            .iter()
            .map(|p| centers.nearest(&p.coords).expect("nonempty").0)
            .collect();
        for (i, &l) in labels.iter().enumerate() {
            clusters[l].members.push(i);
        }
        let mut centroids = Vec::with_capacity(clusters.len());
        let mut opt1 = Vec::with_capacity(clusters.len());
        for k in &clusters {
            match centroid_coords(x, &k.members) {
                Ok(mu) => {
                    opt1.push(
                        k.members
                            .iter()
                            .map(|&i| x.weight(i) * x.point(i).coords.sq_dist(&mu))
                            .sum(),
                    );
                    centroids.push(Some(mu));
                }
                Err(_) => {
                    opt1.push(0.0);
                    centroids.push(None);
                }
            }
        }
        Ok(OptimalPartition {
            clusters,
            reference_centers: centers,
            opt_cost,
            source,
            labels,
            centroids,
            opt1,
        })
    }

    pub fn nonempty(&self) -> impl Iterator<Item = &ClusterRef> {
        self.clusters.iter().filter(|k| !k.members.is_empty())
    }
}

/// `(covered, solved)` for cluster `members` against `c`. A cluster is covered
/// when some center coincides with one of its points.
pub fn cluster_status(
    x: &WeightedPointSet,
    members: &[usize],
    c: &CenterSet,
    solved_factor: f64,
) -> Result<(bool, bool)> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    let covered = c.centers.iter().any(|center| {
        members
            .iter()
            .any(|&i| x.point(i).coords.sq_dist(center) == 0.0)
    });
    let cost = crate::geometry::cluster_cost(x, members, c)?;
    let opt: f64 = match centroid_coords(x, members) {
        Ok(mu) => members
            .iter()
            .map(|&i| x.weight(i) * x.point(i).coords.sq_dist(&mu))
            .sum(),
        Err(_) => 0.0,
    };
    Ok((covered, cost <= solved_factor * opt))
}

/// Snapshot of the run after `i` seeding steps.
pub struct ReplayView<'a> {
    pub i: usize,
    /// False only for `i = 0` without prescribed centers.
    pub has_centers: bool,
    /// Point indices of `C_i`.
    pub center_points: &'a [usize],
    pub point_cost: &'a [f64],
    pub cluster_cost: &'a [f64],
    pub covered: &'a [bool],
    pub total: f64,
}

impl ReplayView<'_> {
    pub fn solved(&self, part: &OptimalPartition, k: usize, factor: f64) -> bool {
        self.has_centers && self.cluster_cost[k] <= factor * part.opt1[k]
    }
}

/// Walks `C_0, C_1, …, C_k`, calling `f` on each.
pub fn replay<F: FnMut(&ReplayView<'_>)>(
    x: &WeightedPointSet,
    trace: &RunTrace,
    part: &OptimalPartition,
    mut f: F,
) {
    let n = x.len();
    let nk = part.clusters.len();
    let mut cur = vec![f64::INFINITY; n];
    let mut covered = vec![false; nk];
    let mut cluster_cost = vec![f64::INFINITY; nk];
    let mut centers: Vec<usize> = Vec::new();
    let order = trace.center_points();
    let np = trace.prescribed.len();

    let add = |c: usize, cur: &mut [f64], covered: &mut [bool]| {
        let cc = &x.point(c).coords;
        for (i, p) in x.points().iter().enumerate() {
            let d = p.weight * p.coords.sq_dist(cc);
            if d < cur[i] {
                cur[i] = d;
            }
        }
        covered[part.labels[c]] = true;
    };
    let refresh = |cur: &[f64], cluster_cost: &mut [f64]| -> f64 {
        for (k, cl) in part.clusters.iter().enumerate() {
            cluster_cost[k] = cl.members.iter().map(|&i| cur[i]).sum();
        }
        cur.iter().sum()
    };

    for &c in &order[..np] {
        add(c, &mut cur, &mut covered);
        centers.push(c);
    }
    let mut total = if np > 0 {
        refresh(&cur, &mut cluster_cost)
    } else {
        f64::INFINITY
    };
    f(&ReplayView {
        i: 0,
        has_centers: np > 0,
        center_points: &centers,
        point_cost: &cur,
        cluster_cost: &cluster_cost,
        covered: &covered,
        total,
    });
    for (s, &c) in order[np..].iter().enumerate() {
        add(c, &mut cur, &mut covered);
        centers.push(c);
        total = refresh(&cur, &mut cluster_cost);
        f(&ReplayView {
            i: s + 1,
            has_centers: true,
            center_points: &centers,
            point_cost: &cur,
            cluster_cost: &cluster_cost,
            covered: &covered,
            total,
        });
    }
}

/// HIT counts of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitReport {
    /// Total HIT per cluster.
    pub totals: Vec<u64>,
    /// For each step, the clusters hit and how often.
    pub per_step: Vec<Vec<(usize, u32)>>,
}

impl HitReport {
    /// `HIT_{≥i}` per cluster: hits from step `i` (1-based) on.
    pub fn from_step(&self, i: usize) -> Vec<u64> {
        let mut out = vec![0; self.totals.len()];
        for hits in self.per_step.iter().skip(i.saturating_sub(1)) {
            for &(k, h) in hits {
                out[k] += h as u64;
            }
        }
        out
    }

    pub fn max(&self) -> u64 {
        self.totals.iter().copied().max().unwrap_or(0)
    }

    pub fn sum(&self) -> u64 {
        self.totals.iter().sum()
    }
}

/// Counts candidates that land in a cluster while it is neither covered nor
/// solved with respect to the centers the candidates were drawn against.
pub fn hit_series(
    x: &WeightedPointSet,
    trace: &RunTrace,
    part: &OptimalPartition,
    solved_factor: f64,
) -> HitReport {
    let nk = part.clusters.len();
    let mut totals = vec![0u64; nk];
    let mut per_step = Vec::with_capacity(trace.steps.len());
    replay(x, trace, part, |v| {
        let Some(step) = trace.steps.get(v.i) else {
            return;
        };
        let mut hits: Vec<(usize, u32)> = Vec::new();
        for &c in &step.candidates {
            let k = part.labels[c];
            if v.covered[k] || v.solved(part, k, solved_factor) {
                continue;
            }
            totals[k] += 1;
            match hits.iter_mut().find(|(l, _)| *l == k) {
                Some(h) => h.1 += 1,
                None => hits.push((k, 1)),
            }
        }
        hits.sort_unstable();
        per_step.push(hits);
    });
    HitReport { totals, per_step }
}

/// `R_i` and the two balls around `μ(K)` after `i` steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodStep {
    pub i: usize,
    pub r: f64,
    pub small_count: usize,
    pub small_weight: f64,
    pub big_count: usize,
    pub big_weight: f64,
    pub covered: bool,
    pub solved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSeries {
    /// First `i` with `φ(K, C_i) ≥ φ(X, C_i)/k`; `None` if never reached.
    pub i0: Option<usize>,
    pub steps: Vec<NeighborhoodStep>,
}

/// Points of `X` sorted by distance to a fixed center, for ball queries.
struct BallIndex {
    dist: Vec<f64>,
    weight_prefix: Vec<f64>,
}

impl BallIndex {
    fn new(x: &WeightedPointSet, mu: &Coords) -> Self {
        let mut v: Vec<(f64, f64)> = x
            .points()
            .iter()
            .map(|p| (p.coords.sq_dist(mu).sqrt(), p.weight))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let weight_prefix = v
            .iter()
            .map(|(_, w)| {
                acc += w;
                acc
            })
            .collect();
        BallIndex {
            dist: v.into_iter().map(|(d, _)| d).collect(),
            weight_prefix,
        }
    }

    /// Count and weight of the closed ball of radius `r`.
    fn ball(&self, r: f64) -> (usize, f64) {
        let n = self.dist.partition_point(|&d| d <= r);
        (n, if n == 0 { 0.0 } else { self.weight_prefix[n - 1] })
    }
}

/// The `R_i` series of cluster `cluster` from `i₀` on, with the closed balls of
/// radius `R_i/100` and `R_i/10` around `μ(K)`. `k` is the number of clusters
/// in the threshold `φ(X, C_i)/k`.
pub fn neighborhood_series(
    x: &WeightedPointSet,
    trace: &RunTrace,
    part: &OptimalPartition,
    cluster: usize,
    k: usize,
    solved_factor: f64,
) -> NeighborhoodSeries {
    let Some(mu) = part.centroids[cluster].clone() else {
        return NeighborhoodSeries {
            i0: None,
            steps: Vec::new(),
        };
    };
    let balls = BallIndex::new(x, &mu);
    let mut i0 = None;
    let mut r = f64::INFINITY;
    let mut steps = Vec::new();
    let mut dist_to_centers = f64::INFINITY;
    let mut seen = 0;
    replay(x, trace, part, |v| {
        for &c in &v.center_points[seen..] {
            dist_to_centers = dist_to_centers.min(x.point(c).coords.sq_dist(&mu).sqrt());
        }
        seen = v.center_points.len();
        if !v.has_centers {
            return;
        }
        if i0.is_none() {
            if v.cluster_cost[cluster] >= v.total / k as f64 {
                i0 = Some(v.i);
                r = dist_to_centers;
            } else {
                return;
            }
        } else if dist_to_centers <= r / 10.0 {
            r = dist_to_centers;
        }
        let (small_count, small_weight) = balls.ball(r / 100.0);
        let (big_count, big_weight) = balls.ball(r / 10.0);
        steps.push(NeighborhoodStep {
            i: v.i,
            r,
            small_count,
            small_weight,
            big_count,
            big_weight,
            covered: v.covered[cluster],
            solved: v.solved(part, cluster, solved_factor),
        });
    });
    NeighborhoodSeries { i0, steps }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepClass {
    Good,
    Bad,
}

/// A step is good when its chosen center lands in a cluster that was uncovered.
pub fn step_classes(x: &WeightedPointSet, trace: &RunTrace, part: &OptimalPartition) -> Vec<StepClass> {
    let mut covered = vec![false; part.clusters.len()];
    for &c in &trace.prescribed {
        covered[part.labels[c]] = true;
    }
    let _ = x;
    trace
        .steps
        .iter()
        .map(|s| {
            let k = part.labels[s.chosen_point()];
            let class = if covered[k] {
                StepClass::Bad
            } else {
                StepClass::Good
            };
            covered[k] = true;
            class
        })
        .collect()
}

/// `φ(X_i^U, C_i)/u_i` for `i = 1, 2, …` until no cluster is uncovered, where
/// `X_i^U` is the union of the `u_i` nonempty uncovered clusters.
pub fn avg_uncovered_cost(x: &WeightedPointSet, trace: &RunTrace, part: &OptimalPartition) -> Vec<f64> {
    let mut out = Vec::new();
    let mut done = false;
    replay(x, trace, part, |v| {
        if v.i == 0 || done {
            return;
        }
        let mut u = 0usize;
        let mut cost = 0.0;
        for (k, cl) in part.clusters.iter().enumerate() {
            if !cl.members.is_empty() && !v.covered[k] {
                u += 1;
                cost += v.cluster_cost[k];
            }
        }
        if u == 0 {
            done = true;
        } else {
            out.push(cost / u as f64);
        }
    });
    out
}

/// Per-step status of one cluster, combining the series above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStepStatus {
    pub i: usize,
    pub covered: bool,
    pub solved: bool,
    pub hit_count_this_step: u32,
    pub r: Option<f64>,
    pub n_small_size: Option<usize>,
    pub n_big_size: Option<usize>,
}

/// Status of `cluster` at each step `1..=k` (evaluated against `C_{i−1}`).
pub fn cluster_step_statuses(
    x: &WeightedPointSet,
    trace: &RunTrace,
    part: &OptimalPartition,
    cluster: usize,
    k: usize,
    solved_factor: f64,
) -> Vec<ClusterStepStatus> {
    let hits = hit_series(x, trace, part, solved_factor);
    let hood = neighborhood_series(x, trace, part, cluster, k, solved_factor);
    let mut flags = Vec::new();
    replay(x, trace, part, |v| {
        flags.push((v.covered[cluster], v.solved(part, cluster, solved_factor)));
    });
    (1..=trace.steps.len())
        .map(|step| {
            let before = step - 1;
            let h = hood.steps.iter().find(|s| s.i == before);
            ClusterStepStatus {
                i: step,
                covered: flags[before].0,
                solved: flags[before].1,
                hit_count_this_step: hits.per_step[before]
                    .iter()
                    .find(|(l, _)| *l == cluster)
                    .map_or(0, |h| h.1),
                r: h.map(|s| s.r),
                n_small_size: h.map(|s| s.small_count),
                n_big_size: h.map(|s| s.big_count),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPoint;
    use crate::seeding::{seed_greedy, seed_kmeanspp, Seeder, SamplingMode, Greedy};

    fn pairs() -> (WeightedPointSet, OptimalPartition) {
        let x = WeightedPointSet::from_unweighted(vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![50.0, 0.0],
            vec![50.0, 1.0],
            vec![0.0, 90.0],
            vec![1.0, 90.0],
        ])
        .unwrap();
        let c = CenterSet::from_dense(
            2,
            vec![vec![0.0, 0.5], vec![50.0, 0.5], vec![0.5, 90.0]],
        )
        .unwrap();
        let part = OptimalPartition::from_centers(&x, c, ReferenceSource::GroundTruth).unwrap();
        (x, part)
    }

    #[test]
    fn status_examples() {
        let (x, part) = pairs();
        let c = CenterSet::from_points(&x, &[1]);
        assert_eq!(cluster_status(&x, &[0, 1], &c, SOLVED_FACTOR).unwrap().0, true);
        let mu = CenterSet::from_dense(2, vec![vec![0.0, 0.5]]).unwrap();
        assert_eq!(cluster_status(&x, &[0, 1], &mu, SOLVED_FACTOR).unwrap(), (false, true));
        let far = CenterSet::from_dense(2, vec![vec![1e3, 1e3]]).unwrap();
        assert_eq!(cluster_status(&x, &[0, 1], &far, SOLVED_FACTOR).unwrap(), (false, false));
        assert_eq!(part.opt1, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn single_cluster_hits_at_most_ell() {
        let x = WeightedPointSet::from_unweighted(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let c = CenterSet::from_dense(1, vec![vec![1.0]]).unwrap();
        let part = OptimalPartition::from_centers(&x, c, ReferenceSource::GroundTruth).unwrap();
        for seed in 0..20 {
            let (_, t) = seed_greedy(&x, 1, 4, seed).unwrap();
            let h = hit_series(&x, &t, &part, SOLVED_FACTOR);
            assert_eq!(h.totals, vec![4]);
        }
    }

    #[test]
    fn prescribed_center_means_no_hits() {
        let (x, part) = pairs();
        for seed in 0..20 {
            let t = Seeder::with_prescribed(&x, vec![0])
                .run(2, 3, &Greedy, SamplingMode::D2, seed)
                .unwrap();
            assert_eq!(hit_series(&x, &t, &part, SOLVED_FACTOR).totals[0], 0);
        }
    }

    #[test]
    fn good_steps_count_covered_clusters() {
        let (x, part) = pairs();
        for seed in 0..30 {
            let (_, t) = seed_kmeanspp(&x, 4, seed).unwrap();
            let classes = step_classes(&x, &t, &part);
            assert_eq!(classes[0], StepClass::Good);
            let good = classes.iter().filter(|c| **c == StepClass::Good).count();
            let mut covered: Vec<usize> =
                t.center_points().iter().map(|&c| part.labels[c]).collect();
            covered.sort_unstable();
            covered.dedup();
            assert_eq!(good, covered.len());
        }
    }

    #[test]
    fn avg_uncovered_three_singletons() {
        let x = WeightedPointSet::from_unweighted(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let part = OptimalPartition::from_centers(
            &x,
            CenterSet::from_points(&x, &[0, 1, 2]),
            ReferenceSource::GroundTruth,
        )
        .unwrap();
        let t = Seeder::with_prescribed(&x, vec![])
            .run(3, 1, &crate::seeding::FirstCandidate, SamplingMode::D2, 11)
            .unwrap();
        let order = t.center_points();
        // Hand replay: after the first center, the other two pay their squared
        // distances; after the second, the last one pays its nearest distance.
        let d = |a: usize, b: usize| x.sq_dist(a, b);
        let rest: Vec<usize> = (0..3).filter(|i| *i != order[0]).collect();
        let first = (d(rest[0], order[0]) + d(rest[1], order[0])) / 2.0;
        let last = 3 - order[0] - order[1];
        let second = d(last, order[0]).min(d(last, order[1]));
        assert_eq!(avg_uncovered_cost(&x, &t, &part), vec![first, second]);
    }

    #[test]
    fn r_collapses_at_centroid() {
        // The centroid of {0, 2} is the point 1, which belongs to the cluster.
        let x = WeightedPointSet::new(
            1,
            vec![
                WeightedPoint::new(vec![0.0], 1.0),
                WeightedPoint::new(vec![1.0], 1.0),
                WeightedPoint::new(vec![2.0], 1.0),
                WeightedPoint::new(vec![1000.0], 1.0),
            ],
        )
        .unwrap();
        let part = OptimalPartition::from_centers(
            &x,
            CenterSet::from_dense(1, vec![vec![1.0], vec![1000.0]]).unwrap(),
            ReferenceSource::GroundTruth,
        )
        .unwrap();
        let t = Seeder::with_prescribed(&x, vec![3])
            .run(3, 1, &crate::seeding::FirstCandidate, SamplingMode::D2, 0)
            .unwrap();
        let s = neighborhood_series(&x, &t, &part, 0, 2, SOLVED_FACTOR);
        assert_eq!(s.i0, Some(0));
        let pos = t.center_points().iter().position(|&c| c == 1).unwrap();
        for st in &s.steps {
            if st.i >= pos {
                assert_eq!(st.r, 0.0);
            }
        }
        for w in s.steps.windows(2) {
            assert!(w[1].r <= w[0].r);
        }
    }
}
