//! Instance generators and instance-level reductions.
//!
//! An [`Instance`] bundles a point set with the number of centers to pick, the
//! prescribed centers the run starts from, and whatever the generator knows
//! about it: a reference solution, the rule the construction is designed
//! around, and the point whose selection marks the failure being measured.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{
    centroid_and_opt1, pad, simplex_vectors, total_cost, CenterSet, Coords, WeightedPoint,
    WeightedPointSet,
};
use crate::rng;
use crate::seeding::PreferAvoid;

pub mod greedy_lb;
pub mod hp;

pub use greedy_lb::{gen_greedy_lb, GreedyLbConstants, GreedyLbParams, GreedyLbReport};

/// A known good solution, with its cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub reference_centers: CenterSet,
    pub opt_cost: f64,
}

/// A named prefer/avoid rule over point indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleHint {
    pub name: String,
    pub prefer: Vec<usize>,
    pub avoid: Vec<usize>,
}

impl RuleHint {
    pub fn to_rule(&self) -> PreferAvoid {
        PreferAvoid {
            name: self.name.clone(),
            prefer: self.prefer.clone(),
            avoid: self.avoid.clone(),
        }
    }
}

/// Selecting `point` (within the first `within_steps` steps, if set) is the
/// failure the instance is built to provoke.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadEvent {
    pub point: usize,
    pub within_steps: Option<usize>,
}

impl BadEvent {
    /// Whether the run, given as the chosen point of every step, hit the event.
    pub fn occurred(&self, chosen: &[usize]) -> bool {
        let horizon = self.within_steps.unwrap_or(chosen.len()).min(chosen.len());
        chosen[..horizon].contains(&self.point)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub params: Value,
    pub ground_truth_cost: Option<f64>,
    /// Generator-specific diagnostics.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub diagnostics: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub x: WeightedPointSet,
    /// Number of centers to seed on top of the prescribed ones.
    pub k: usize,
    /// Point indices of the prescribed centers `C₀`.
    pub prescribed: Vec<usize>,
    pub ground_truth: Option<GroundTruth>,
    pub rule_hint: Option<RuleHint>,
    pub bad_event: Option<BadEvent>,
    pub metadata: Metadata,
}

impl Instance {
    /// A bare instance with no generator knowledge attached.
    pub fn plain(x: WeightedPointSet, k: usize, prescribed: Vec<usize>) -> Result<Self> {
        let inst = Instance {
            x,
            k,
            prescribed,
            ground_truth: None,
            rule_hint: None,
            bad_event: None,
            metadata: Metadata {
                generator: "file".into(),
                params: Value::Null,
                ground_truth_cost: None,
                diagnostics: Value::Null,
            },
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if let Some(&bad) = self.prescribed.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidParameter(format!(
                "prescribed center {bad} is not a point index (n = {n})"
            )));
        }
        if self.k + self.prescribed.len() > n {
            return Err(Error::KExceedsPoints {
                k: self.k + self.prescribed.len(),
                distinct: n,
            });
        }
        let hint_ok = self
            .rule_hint
            .iter()
            .flat_map(|h| h.prefer.iter().chain(&h.avoid))
            .chain(self.bad_event.iter().map(|b| &b.point))
            .all(|&i| i < n);
        if !hint_ok {
            return Err(Error::InvalidParameter(
                "rule hint or bad event refers to a missing point".into(),
            ));
        }
        Ok(())
    }
}

fn ground_truth_from_points(x: &WeightedPointSet, indices: &[usize]) -> Result<GroundTruth> {
    let reference_centers = CenterSet::from_points(x, indices);
    let opt_cost = total_cost(x, &reference_centers)?;
    Ok(GroundTruth {
        reference_centers,
        opt_cost,
    })
}

/// Weight factor making a point dominate the first draw.
pub const HEAVY_FACTOR: f64 = 1e6;

/// The small tree-like instance that defeats rules preferring far points.
///
/// Points, in order: the hub `d` (index 0), dummies `x_1..x_{k−2}` at distance
/// `k` from `d` along simplex directions, `c` (index `k−1`, weight `k`) at
/// distance `k` on its own direction, and `b` (index `k`) on the ray from `d`
/// through `c` at distance `k + 1`. The hub is heavier than everything else
/// combined by [`HEAVY_FACTOR`]. Leaving out `b` costs 1; leaving out `c`
/// costs `k`; leaving out a dummy costs `k²`.
pub fn gen_fig1(k: usize) -> Result<Instance> {
    if k < 4 {
        return Err(Error::InvalidParameter(format!("fig1 needs k ≥ 4, got {k}")));
    }
    let kf = k as f64;
    let dim = k - 2;
    let dirs = simplex_vectors(k - 1)?;
    let others = (k - 2) as f64 + kf + 1.0;
    let mut pts = vec![WeightedPoint::new(vec![0.0; dim], HEAVY_FACTOR * others)];
    for v in &dirs[..k - 2] {
        pts.push(WeightedPoint::new(v.iter().map(|a| kf * a).collect(), 1.0));
    }
    let ray = &dirs[k - 2];
    pts.push(WeightedPoint::new(ray.iter().map(|a| kf * a).collect(), kf));
    pts.push(WeightedPoint::new(
        ray.iter().map(|a| (kf + 1.0) * a).collect(),
        1.0,
    ));
    let x = WeightedPointSet::new(dim, pts)?;
    let (c, b) = (k - 1, k);
    let gt = ground_truth_from_points(&x, &(0..k).collect::<Vec<_>>())?;
    let inst = Instance {
        k,
        prescribed: Vec::new(),
        rule_hint: Some(RuleHint {
            name: "fig1-rule".into(),
            prefer: vec![0, b],
            avoid: vec![c],
        }),
        bad_event: Some(BadEvent {
            point: b,
            within_steps: None,
        }),
        metadata: Metadata {
            generator: "fig1".into(),
            params: json!({ "k": k }),
            ground_truth_cost: Some(gt.opt_cost),
            diagnostics: json!({
                "cost_omit_b": 1.0,
                "cost_omit_c": kf,
                "cost_omit_dummy": kf * kf,
            }),
        },
        ground_truth: Some(gt),
        x,
    };
    inst.validate()?;
    Ok(inst)
}

/// The instance on which a rule taking `b` eagerly and `c` reluctantly is
/// `Ω(k^{1−1/ℓ})`-approximate with constant probability.
///
/// Lives in `ℝ^{k+1}`. Points, in order: `d` at the origin (index 0,
/// prescribed), `x_1..x_{k−1}` at `k·e_i`, `c` at `k·e_k` with weight
/// `k^{1−1/ℓ}/2`, and `b` in the plane of the last two axes with
/// `‖b − d‖ = k` and `‖b − c‖ = 1`. All other weights are 1.
pub fn gen_appendix_a(k: usize, ell: usize) -> Result<Instance> {
    if k < 4 {
        return Err(Error::InvalidParameter(format!(
            "appendix-a needs k ≥ 4, got {k}"
        )));
    }
    if ell < 2 {
        return Err(Error::InvalidParameter(format!(
            "appendix-a needs ℓ ≥ 2, got {ell}"
        )));
    }
    let kf = k as f64;
    let dim = k + 1;
    let axis = |i: usize, v: f64| Coords::sparse(vec![(i as u32, v)]);
    let mut pts = vec![WeightedPoint::with_coords(Coords::sparse(vec![]), 1.0)];
    for i in 0..k - 1 {
        pts.push(WeightedPoint::with_coords(axis(i, kf), 1.0));
    }
    let w_c = kf.powf(1.0 - 1.0 / ell as f64) / 2.0;
    pts.push(WeightedPoint::with_coords(axis(k - 1, kf), w_c));
    // ‖b‖ = k and ‖b − c‖ = 1 force b = (k − 1/(2k), √(1 − 1/(4k²))).
    let bx = kf - 1.0 / (2.0 * kf);
    let by = (1.0 - 1.0 / (4.0 * kf * kf)).sqrt();
    pts.push(WeightedPoint::with_coords(
        Coords::sparse(vec![((k - 1) as u32, bx), (k as u32, by)]),
        1.0,
    ));
    let x = WeightedPointSet::new(dim, pts)?;
    let (c, b) = (k, k + 1);
    let gt = ground_truth_from_points(&x, &(0..=k).collect::<Vec<_>>())?;
    let inst = Instance {
        k,
        prescribed: vec![0],
        rule_hint: Some(RuleHint {
            name: "appendix-a-rule".into(),
            prefer: vec![b],
            avoid: vec![c],
        }),
        bad_event: Some(BadEvent {
            point: b,
            within_steps: Some(k / 2),
        }),
        metadata: Metadata {
            generator: "appendix-a".into(),
            params: json!({ "k": k, "l": ell }),
            ground_truth_cost: Some(gt.opt_cost),
            diagnostics: json!({
                "w_c": w_c,
                "bad_event_cost_lower_bound": w_c,
            }),
        },
        ground_truth: Some(gt),
        x,
    };
    inst.validate()?;
    Ok(inst)
}

/// Parameters of the Gaussian benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub k: usize,
    pub points_per_cluster: usize,
    pub dim: usize,
    pub separation: f64,
    /// Put all cluster means on one line, `separation` apart.
    #[serde(default)]
    pub collinear: bool,
    pub seed: u64,
}

/// `k` unit-variance isotropic blobs whose means are pairwise at least
/// `separation` apart. The reference solution uses the empirical mean of each
/// generated blob.
pub fn gen_gaussian_mixture(p: &GaussianParams) -> Result<Instance> {
    if p.k == 0 || p.points_per_cluster == 0 || p.dim == 0 {
        return Err(Error::InvalidParameter(
            "k, points per cluster and dimension must be positive".into(),
        ));
    }
    if !(p.separation >= 0.0 && p.separation.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "separation must be finite and nonnegative, got {}",
            p.separation
        )));
    }
    let mut rng = rng::stream(p.seed);
    let means: Vec<Vec<f64>> = if p.collinear || p.dim == 1 {
        (0..p.k)
            .map(|i| {
                let mut m = vec![0.0; p.dim];
                m[0] = i as f64 * p.separation;
                m
            })
            .collect()
    } else {
        let mut side = p.separation * 2.0 * (p.k as f64).powf(1.0 / p.dim as f64);
        let mut means: Vec<Vec<f64>> = Vec::with_capacity(p.k);
        let mut failures = 0;
        while means.len() < p.k {
            let m: Vec<f64> = (0..p.dim).map(|_| rng.random::<f64>() * side).collect();
            let ok = means.iter().all(|o| {
                o.iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                    >= p.separation * p.separation
            });
            if ok {
                means.push(m);
                failures = 0;
            } else {
                failures += 1;
                if failures > 1000 {
                    side *= 1.5;
                    failures = 0;
                }
            }
        }
        means
    };
    let mut pts = Vec::with_capacity(p.k * p.points_per_cluster);
    for m in &means {
        for _ in 0..p.points_per_cluster {
            let v: Vec<f64> = m
                .iter()
                .map(|c| c + rng.sample::<f64, _>(StandardNormal))
                .collect();
            pts.push(WeightedPoint::new(v, 1.0));
        }
    }
    let x = WeightedPointSet::new(p.dim, pts)?;
    let mut centers = Vec::with_capacity(p.k);
    for j in 0..p.k {
        let members: Vec<usize> =
            (j * p.points_per_cluster..(j + 1) * p.points_per_cluster).collect();
        centers.push(centroid_and_opt1(&x, &members)?.0);
    }
    let reference_centers = CenterSet::from_dense(p.dim, centers)?;
    let opt_cost = total_cost(&x, &reference_centers)?;
    let inst = Instance {
        k: p.k,
        prescribed: Vec::new(),
        ground_truth: Some(GroundTruth {
            reference_centers,
            opt_cost,
        }),
        rule_hint: None,
        bad_event: None,
        metadata: Metadata {
            generator: "gaussian".into(),
            params: serde_json::to_value(p)?,
            ground_truth_cost: Some(opt_cost),
            diagnostics: Value::Null,
        },
        x,
    };
    inst.validate()?;
    Ok(inst)
}

/// Replaces the prescribed centers by ordinary points heavy enough that
/// seeding picks them first: each gets weight `weight_factor` times the total
/// weight of the instance, and `k` grows by their number.
pub fn lift_prescribed(inst: &Instance, weight_factor: f64) -> Result<Instance> {
    if inst.prescribed.is_empty() {
        return Err(Error::InvalidParameter(
            "nothing to lift: no prescribed centers".into(),
        ));
    }
    let heavy = weight_factor * inst.x.total_weight();
    let mut pts = inst.x.points().to_vec();
    for &i in &inst.prescribed {
        pts[i].weight = heavy;
    }
    let x = WeightedPointSet::new(inst.x.dim(), pts)?;
    let lifted = inst.prescribed.len();
    let ground_truth = match &inst.ground_truth {
        Some(gt) => {
            let opt_cost = total_cost(&x, &gt.reference_centers)?;
            Some(GroundTruth {
                reference_centers: gt.reference_centers.clone(),
                opt_cost,
            })
        }
        None => None,
    };
    let mut metadata = inst.metadata.clone();
    metadata.params = json!({ "lifted_from": inst.metadata.params, "weight_factor": weight_factor });
    metadata.ground_truth_cost = ground_truth.as_ref().map(|g| g.opt_cost);
    let out = Instance {
        x,
        k: inst.k + lifted,
        prescribed: Vec::new(),
        ground_truth,
        rule_hint: inst.rule_hint.clone(),
        bad_event: inst.bad_event.as_ref().map(|b| BadEvent {
            point: b.point,
            within_steps: b.within_steps.map(|s| s + lifted),
        }),
        metadata,
    };
    out.validate()?;
    Ok(out)
}

/// Replaces each point of weight `w` by `round(scale · w)` unit-weight copies.
/// Prescribed points keep at least one copy. Costs scale by `scale`.
pub fn weights_to_multiplicity(inst: &Instance, scale: f64, max_points: usize) -> Result<Instance> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let copies: Vec<usize> = inst
        .x
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = (scale * p.weight).round() as usize;
            if c == 0 && inst.prescribed.contains(&i) {
                1
            } else {
                c
            }
        })
        .collect();
    let required: usize = copies.iter().sum();
    if required > max_points {
        return Err(Error::BudgetExceeded {
            what: "points",
            required: required as u128,
            budget: max_points as u128,
        });
    }
    let mut pts = Vec::with_capacity(required);
    let mut first: Vec<Option<usize>> = vec![None; inst.x.len()];
    let mut all: Vec<Vec<usize>> = vec![Vec::new(); inst.x.len()];
    for (i, &c) in copies.iter().enumerate() {
        for j in 0..c {
            if j == 0 {
                first[i] = Some(pts.len());
            }
            all[i].push(pts.len());
            pts.push(WeightedPoint::with_coords(inst.x.point(i).coords.clone(), 1.0));
        }
    }
    let x = WeightedPointSet::new(inst.x.dim(), pts)?;
    let map_all = |v: &[usize]| -> Vec<usize> { v.iter().flat_map(|&i| all[i].clone()).collect() };
    let ground_truth = match &inst.ground_truth {
        Some(gt) => Some(GroundTruth {
            reference_centers: gt.reference_centers.clone(),
            opt_cost: total_cost(&x, &gt.reference_centers)?,
        }),
        None => None,
    };
    let mut metadata = inst.metadata.clone();
    metadata.params = json!({ "expanded_from": inst.metadata.params, "scale": scale });
    metadata.ground_truth_cost = ground_truth.as_ref().map(|g| g.opt_cost);
    let bad_event = match &inst.bad_event {
        Some(b) => match first[b.point] {
            Some(p) => Some(BadEvent {
                point: p,
                within_steps: b.within_steps,
            }),
            None => None,
        },
        None => None,
    };
    let out = Instance {
        x,
        k: inst.k,
        prescribed: inst.prescribed.iter().filter_map(|&i| first[i]).collect(),
        ground_truth,
        rule_hint: inst.rule_hint.as_ref().map(|h| RuleHint {
            name: h.name.clone(),
            prefer: map_all(&h.prefer),
            avoid: map_all(&h.avoid),
        }),
        bad_event,
        metadata,
    };
    out.validate()?;
    Ok(out)
}

/// Zero-padded simplex direction `j` of `count` directions in a `dim`-space.
pub fn simplex_direction(count: usize, j: usize, dim: usize) -> Result<Vec<f64>> {
    let dirs = simplex_vectors(count)?;
    Ok(pad(&dirs[j], dim))
}
