//! The weighted instance on which greedy k-means++ loses a polylogarithmic
//! factor with constant probability.
//!
//! Layout, with `t` phases and `s_0, …, s_{t+1}` the vertices of a regular
//! simplex centered at `b` (pairwise inner product `−1/(t+1)`):
//!
//! - `b` at the origin, weight `1/t`; `c = s_0`, weight `1/10`.
//! - `n_i = k^i s_i` for `i = 1..=t+1` and `m_i = (1 + 10t) k^i s_i` for
//!   `i = 1..=t`, all of weight `1000/t`.
//! - `A`: `⌊k^{1.2}⌋` points `a_j = c + (k/√2)(s_0 + ν_j)` of weight
//!   `ℓ ln k / k²`, each `ν_j` a private orthogonal axis.
//! - `e_0 = k^{2t} f` on its own axis, and `t` groups `E_i` of `⌊√k⌋` points
//!   `e_0 + ν_{ij}` of weight `w_i`.
//!
//! `C₀ = {n_{t+1}, e_0}` and the number of centers to seed leaves exactly one
//! point out. `w_i` sits halfway between the cost drops of `b` and `c` against
//! `{n_{i+1}}`. Those two drops differ in roughly the `(i+2)`-th decimal digit
//! of `k`-based magnitudes, which f64 cannot resolve for `i ≥ 3` at `k = 1000`,
//! so the weights and every structural check are computed in a 320-bit model
//! that exploits the symmetry of `A` and of each `E_i`. The exported point set
//! is the f64 rounding of that model; how far it still respects the intended
//! cost-drop ordering is reported per phase.

use serde::{Deserialize, Serialize};

use super::hp::Hp;
use super::{BadEvent, GroundTruth, Instance, Metadata};
use crate::error::{Error, Result};
use crate::geometry::{simplex_vectors, total_cost, CenterSet, Coords, WeightedPoint, WeightedPointSet};

/// Literal constants of the construction, overridable for desk-scale runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyLbConstants {
    /// Divisor in `t = ℓ ln k / (c_t ln(ℓ ln k))`.
    pub c_t: f64,
    /// `d(n_i, m_i) = m_factor · t · k^i`.
    pub m_factor: f64,
    /// `w(n_i) = w(m_i) = nm_weight / t`.
    pub nm_weight: f64,
    pub w_c: f64,
    /// `w(b)`; `None` means `1/t`.
    pub w_b: Option<f64>,
    /// Upper constant in `k^{2i+2} ≤ w_i ≤ wi_upper · k^{2i+2}`.
    pub wi_upper: f64,
    pub solved_factor: f64,
    /// `d(b, e_0) = k^{far_exponent · t}`.
    pub far_exponent: f64,
    /// `|A| = ⌊k^{a_exponent}⌋`.
    pub a_exponent: f64,
    /// `|E_i| = ⌊k^{e_exponent}⌋`.
    pub e_exponent: f64,
    /// The construction assumes `ℓ < k^{ell_exponent}`; only reported.
    pub ell_exponent: f64,
}

impl Default for GreedyLbConstants {
    fn default() -> Self {
        GreedyLbConstants {
            c_t: 1000.0,
            m_factor: 10.0,
            nm_weight: 1000.0,
            w_c: 0.1,
            w_b: None,
            wi_upper: 3000.0,
            solved_factor: 1e5,
            far_exponent: 2.0,
            a_exponent: 1.2,
            e_exponent: 0.5,
            ell_exponent: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyLbParams {
    pub k: usize,
    pub ell: usize,
    #[serde(default)]
    pub constants: GreedyLbConstants,
    /// Use this `t` instead of the formula.
    #[serde(default)]
    pub t_override: Option<usize>,
    /// Refuse to build more points than this.
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_max_points() -> usize {
    100_000
}

impl GreedyLbParams {
    pub fn new(k: usize, ell: usize) -> Self {
        GreedyLbParams {
            k,
            ell,
            constants: GreedyLbConstants::default(),
            t_override: None,
            max_points: default_max_points(),
        }
    }
}

/// Self-check results of one phase, in high precision unless marked f64.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub i: usize,
    pub w_i: f64,
    /// `w_i / k^{2i+2}`; must lie in `[1, wi_upper]`.
    pub w_i_scaled: f64,
    pub wi_bounds_ok: bool,
    pub delta_b: f64,
    pub delta_c: f64,
    pub delta_e: f64,
    pub delta_n_i: f64,
    pub delta_m_next: Option<f64>,
    /// Largest drop among `n_{i'}`, `m_{i'}` (`i' < i`) and `c`.
    pub delta_low_max: f64,
    pub delta_m_i: f64,
    /// Not enforced.
    pub m_i_below_e: bool,
    /// `(Δ(b) − Δ(c)) / Δ(b)`: how fine the ordering is.
    pub b_c_relative_gap: f64,
    pub ordering_ok: bool,
    /// The same ordering recomputed on the exported f64 point set.
    pub f64_ordering_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyLbReport {
    pub t: usize,
    pub t_formula: f64,
    pub n_points: usize,
    pub a_count: usize,
    pub e_group_size: usize,
    pub ell_below_k_pow: bool,
    pub phases: Vec<PhaseReport>,
    pub n_pair_bound_ok: bool,
    pub a_pair_max_rel_err: f64,
    pub max_abs_coordinate: f64,
    pub cost_omit_b: f64,
    pub optimum_omits: String,
    pub optimum_cost: f64,
    pub all_checks_ok: bool,
}

/// A class of symmetric points in the model: one representative stands for
/// `mult` copies, any two of which are `intra` apart (squared).
#[derive(Clone)]
struct Class {
    name: String,
    simplex: Option<(usize, Hp)>,
    orth: Vec<(u32, Hp)>,
    w: Hp,
    mult: u64,
    intra: Option<Hp>,
}

struct Model {
    t: usize,
    classes: Vec<Class>,
    b: usize,
    c: usize,
    /// `n[i]` for `i = 1..=t+1` (index 0 unused).
    n: Vec<usize>,
    /// `m[i]` for `i = 1..=t` (index 0 unused).
    m: Vec<usize>,
    a: usize,
    e0: usize,
    /// `e[i]` for `i = 1..=t` (index 0 unused).
    e: Vec<usize>,
    inv_t1: Hp,
}

impl Model {
    fn sq_dist(&self, p: usize, q: usize) -> Hp {
        let (p, q) = (&self.classes[p], &self.classes[q]);
        let two = Hp::int(2);
        let mut s = match (&p.simplex, &q.simplex) {
            (None, None) => Hp::zero(),
            (Some((_, a)), None) | (None, Some((_, a))) => a.square(),
            (Some((i, a)), Some((j, b))) => {
                if i == j {
                    (a - b).square()
                } else {
                    // ‖a s_i − b s_j‖² with ⟨s_i, s_j⟩ = −1/(t+1).
                    a.square() + b.square() + &(&(&two * a) * b) * &self.inv_t1
                }
            }
        };
        let (mut i, mut j) = (0, 0);
        while i < p.orth.len() || j < q.orth.len() {
            let pi = p.orth.get(i).map(|o| o.0);
            let qj = q.orth.get(j).map(|o| o.0);
            match (pi, qj) {
                (Some(x), Some(y)) if x == y => {
                    s = s + (&p.orth[i].1 - &q.orth[j].1).square();
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    s = s + p.orth[i].1.square();
                    i += 1;
                }
                (Some(_), None) => {
                    s = s + p.orth[i].1.square();
                    i += 1;
                }
                _ => {
                    s = s + q.orth[j].1.square();
                    j += 1;
                }
            }
        }
        s
    }

    /// Per-copy cost of every class against the classes in `taken`.
    fn costs(&self, taken: &[bool]) -> Vec<Hp> {
        (0..self.classes.len())
            .map(|p| {
                if taken[p] {
                    return Hp::zero();
                }
                let mut best: Option<Hp> = None;
                for (q, &tk) in taken.iter().enumerate() {
                    if tk {
                        let d = self.sq_dist(p, q);
                        best = Some(match best {
                            Some(b) => b.min(d),
                            None => d,
                        });
                    }
                }
                &self.classes[p].w * &best.expect("some class is taken")
            })
            .collect()
    }

    /// Cost drop of adding one copy of class `x`.
    fn drop(&self, taken: &[bool], costs: &[Hp], x: usize) -> Hp {
        let mut total = Hp::zero();
        for (p, cl) in self.classes.iter().enumerate() {
            if taken[p] {
                continue;
            }
            let mult = Hp::int(cl.mult);
            if p == x {
                total = total + &costs[p];
                if cl.mult > 1 {
                    let intra = cl.intra.as_ref().expect("multi-copy class");
                    let gain = (&costs[p] - &(&cl.w * intra)).max(Hp::zero());
                    total = total + &Hp::int(cl.mult - 1) * &gain;
                }
            } else {
                let gain = (&costs[p] - &(&cl.w * &self.sq_dist(p, x))).max(Hp::zero());
                total = total + &mult * &gain;
            }
        }
        total
    }

    /// `Σ_{p ∈ S} w(p) max(0, d(p, from)² − d(p, to)²)`.
    fn restricted_drop(&self, set: &[usize], from: usize, to: usize) -> Hp {
        let mut total = Hp::zero();
        for &p in set {
            let cl = &self.classes[p];
            let gain = (&self.sq_dist(p, from) - &self.sq_dist(p, to)).max(Hp::zero());
            total = total + &(&Hp::int(cl.mult) * &cl.w) * &gain;
        }
        total
    }
}

fn integer_t(p: &GreedyLbParams) -> Result<(usize, f64)> {
    let ell_log = p.ell as f64 * (p.k as f64).ln();
    let formula = if ell_log > 1.0 {
        ell_log / (p.constants.c_t * ell_log.ln())
    } else {
        0.0
    };
    match p.t_override {
        Some(0) => Err(Error::TooSmallT(0.0)),
        Some(t) => Ok((t, formula)),
        None if formula >= 1.0 => Ok((formula.floor() as usize, formula)),
        None => Err(Error::TooSmallT(formula)),
    }
}

/// Builds the instance and runs all self-checks; fails with
/// [`Error::ConstructionCheck`] if any high-precision check does not hold.
pub fn build_greedy_lb(p: &GreedyLbParams) -> Result<(Instance, GreedyLbReport)> {
    if p.k < 2 || p.ell < 1 {
        return Err(Error::InvalidParameter(format!(
            "greedy-lb needs k ≥ 2 and ℓ ≥ 1, got k = {}, ℓ = {}",
            p.k, p.ell
        )));
    }
    let cst = &p.constants;
    let (t, t_formula) = integer_t(p)?;
    let k = p.k;
    let kf = k as f64;
    let a_count = kf.powf(cst.a_exponent).floor() as usize;
    let e_size = kf.powf(cst.e_exponent).floor() as usize;
    if a_count == 0 || e_size == 0 {
        return Err(Error::InvalidParameter(
            "k too small for a nonempty A and E_i".into(),
        ));
    }
    let n_points = 2 + (t + 1) + t + a_count + 1 + t * e_size;
    if n_points > p.max_points {
        return Err(Error::BudgetExceeded {
            what: "points",
            required: n_points as u128,
            budget: p.max_points as u128,
        });
    }
    let far_pow = (cst.far_exponent * t as f64).round() as u32;

    // High-precision model.
    let kh = Hp::int(k as u64);
    let th = Hp::int(t as u64);
    let one = Hp::one();
    let w_b = match cst.w_b {
        Some(w) => Hp::from_f64(w),
        None => &one / &th,
    };
    let w_c = &one / &Hp::from_f64(1.0 / cst.w_c);
    let w_nm = &Hp::from_f64(cst.nm_weight) / &th;
    let w_a_f64 = p.ell as f64 * kf.ln() / (kf * kf);
    let w_a = Hp::from_f64(w_a_f64);
    let m_scale = &one + &(&Hp::from_f64(cst.m_factor) * &th);
    let beta = &kh / &Hp::int(2).sqrt();
    let alpha = &one + &beta;
    let far = kh.powu(far_pow);

    let mut classes = Vec::new();
    let mut push = |c: Class| {
        classes.push(c);
        classes.len() - 1
    };
    let b = push(Class {
        name: "b".into(),
        simplex: None,
        orth: vec![],
        w: w_b.clone(),
        mult: 1,
        intra: None,
    });
    let c = push(Class {
        name: "c".into(),
        simplex: Some((0, one.clone())),
        orth: vec![],
        w: w_c.clone(),
        mult: 1,
        intra: None,
    });
    let mut n = vec![usize::MAX];
    for i in 1..=t + 1 {
        n.push(push(Class {
            name: format!("n_{i}"),
            simplex: Some((i, kh.powu(i as u32))),
            orth: vec![],
            w: w_nm.clone(),
            mult: 1,
            intra: None,
        }));
    }
    let mut m = vec![usize::MAX];
    for i in 1..=t {
        m.push(push(Class {
            name: format!("m_{i}"),
            simplex: Some((i, &m_scale * &kh.powu(i as u32))),
            orth: vec![],
            w: w_nm.clone(),
            mult: 1,
            intra: None,
        }));
    }
    let a = push(Class {
        name: "a".into(),
        simplex: Some((0, alpha.clone())),
        orth: vec![(0, beta.clone())],
        w: w_a.clone(),
        mult: a_count as u64,
        intra: Some(kh.square()),
    });
    let e0 = push(Class {
        name: "e_0".into(),
        simplex: None,
        orth: vec![(1, far.clone())],
        w: one.clone(),
        mult: 1,
        intra: None,
    });
    let mut e = vec![usize::MAX];
    for i in 1..=t {
        e.push(push(Class {
            name: format!("E_{i}"),
            simplex: None,
            orth: vec![(1, far.clone()), (1 + i as u32, one.clone())],
            // Filled in below once w_i is known.
            w: Hp::zero(),
            mult: e_size as u64,
            intra: Some(Hp::int(2)),
        }));
    }
    let mut model = Model {
        t,
        classes,
        b,
        c,
        n,
        m,
        a,
        e0,
        e,
        inv_t1: &one / &Hp::int(t as u64 + 1),
    };

    // w_i from the drops of b and c against {n_{i+1}} restricted to S_i.
    let mut w = vec![Hp::zero(); t + 1];
    for i in 1..=t {
        let mut s_i = vec![model.b, model.c, model.a];
        s_i.extend((1..=i).map(|j| model.n[j]));
        s_i.extend((1..=i).map(|j| model.m[j]));
        let db = model.restricted_drop(&s_i, model.n[i + 1], model.b);
        let dc = model.restricted_drop(&s_i, model.n[i + 1], model.c);
        w[i] = &(db + dc) / &Hp::int(2);
        let ei = model.e[i];
        model.classes[ei].w = w[i].clone();
    }

    // Phase checks in high precision.
    let mut failures: Vec<String> = Vec::new();
    let mut phases = Vec::with_capacity(t);
    for i in (1..=t).rev() {
        let taken = phase_state(&model, i);
        let costs = model.costs(&taken);
        let d = |x: usize| model.drop(&taken, &costs, x);
        let delta_b = d(model.b);
        let delta_c = d(model.c);
        let delta_e = d(model.e[i]);
        let delta_n_i = d(model.n[i]);
        let delta_m_next = (i < t).then(|| d(model.m[i + 1]));
        let mut low = delta_c.clone();
        for j in 1..i {
            low = low.max(d(model.n[j])).max(d(model.m[j]));
        }
        // m_i itself is only reported: its own cost outweighs what b saves on
        // it unless t is around 40 or more, so the phase-1 ordering fails at
        // every reachable scale.
        let delta_m_i = d(model.m[i]);
        let m_i_below_e = delta_m_i < delta_e;
        let scale = kh.powu(2 * i as u32 + 2);
        let ratio = &w[i] / &scale;
        let wi_bounds_ok = ratio >= one && ratio <= Hp::from_f64(cst.wi_upper);
        let mut ordering_ok = low < delta_e && delta_e < delta_b && delta_b < delta_n_i;
        if let Some(dm) = &delta_m_next {
            ordering_ok &= delta_b < *dm;
        }
        if !wi_bounds_ok {
            failures.push(format!("w_{i} / k^(2i+2) = {ratio:?} outside [1, {}]", cst.wi_upper));
        }
        if !ordering_ok {
            failures.push(format!(
                "phase {i}: low {low:?}, e {delta_e:?}, b {delta_b:?}, n_i {delta_n_i:?}, m_next {delta_m_next:?}"
            ));
        }
        phases.push(PhaseReport {
            i,
            w_i: w[i].to_f64(),
            w_i_scaled: ratio.to_f64(),
            wi_bounds_ok,
            b_c_relative_gap: (&(&delta_b - &delta_c) / &delta_b).to_f64(),
            delta_b: delta_b.to_f64(),
            delta_c: delta_c.to_f64(),
            delta_e: delta_e.to_f64(),
            delta_n_i: delta_n_i.to_f64(),
            delta_m_next: delta_m_next.as_ref().map(Hp::to_f64),
            delta_low_max: low.to_f64(),
            delta_m_i: delta_m_i.to_f64(),
            m_i_below_e,
            ordering_ok,
            f64_ordering_ok: false,
        });
    }

    // d(n_{i'}, n_i) ≥ k^i + k^{i'}/(2t) for all i' < i.
    let mut n_pair_bound_ok = true;
    for i in 2..=t + 1 {
        for j in 1..i {
            let bound = &kh.powu(i as u32) + &(&kh.powu(j as u32) / &(&Hp::int(2) * &th));
            if model.sq_dist(model.n[j], model.n[i]) < bound.square() {
                n_pair_bound_ok = false;
                failures.push(format!("d(n_{j}, n_{i}) below k^{i} + k^{j}/(2t)"));
            }
        }
    }

    // The optimum leaves out the single point whose removal is cheapest.
    let mut best: Option<(Hp, usize)> = None;
    let mut cost_omit_b = Hp::zero();
    for (p, cl) in model.classes.iter().enumerate() {
        if p == model.e0 || p == model.n[t + 1] {
            continue;
        }
        let mut nearest: Option<Hp> = cl.intra.clone();
        for q in 0..model.classes.len() {
            if q != p {
                let d = model.sq_dist(p, q);
                nearest = Some(match nearest {
                    Some(v) => v.min(d),
                    None => d,
                });
            }
        }
        let cost = &cl.w * &nearest.expect("more than one point");
        if p == model.b {
            cost_omit_b = cost.clone();
        }
        if best.as_ref().is_none_or(|(v, _)| cost < *v) {
            best = Some((cost, p));
        }
    }
    let (opt_hp, omit_class) = best.expect("nonempty");

    // f64 export.
    let (x, layout) = export(&model, a_count, e_size, &w)?;
    let max_abs = x.points().iter().fold(0.0f64, |m, p| m.max(p.coords.max_abs()));
    if max_abs > 1e300 {
        return Err(Error::ConstructionCheck(format!(
            "coordinate magnitude {max_abs:e} exceeds 1e300"
        )));
    }
    let a_pair_max_rel_err = a_pair_error(&x, &layout, kf);
    if a_pair_max_rel_err > 1e-6 {
        failures.push(format!(
            "d(a_i, a_j) deviates from k by {a_pair_max_rel_err:e} relative"
        ));
    }
    for ph in &mut phases {
        ph.f64_ordering_ok = f64_phase_ordering(&x, &layout, t, ph.i);
    }

    let omit_point = layout.first_point(&model, omit_class);
    let prescribed = vec![layout.n[t + 1], layout.e0];
    let keep: Vec<usize> = (0..x.len()).filter(|&i| i != omit_point).collect();
    let reference_centers = CenterSet::from_points(&x, &keep);
    let opt_cost = total_cost(&x, &reference_centers)?;
    let k_target = x.len() - prescribed.len() - 1;

    let report = GreedyLbReport {
        t,
        t_formula,
        n_points: x.len(),
        a_count,
        e_group_size: e_size,
        ell_below_k_pow: (p.ell as f64) < kf.powf(cst.ell_exponent),
        phases,
        n_pair_bound_ok,
        a_pair_max_rel_err,
        max_abs_coordinate: max_abs,
        cost_omit_b: cost_omit_b.to_f64(),
        optimum_omits: model.classes[omit_class].name.clone(),
        optimum_cost: opt_hp.to_f64(),
        all_checks_ok: failures.is_empty(),
    };
    if !failures.is_empty() {
        return Err(Error::ConstructionCheck(failures.join("; ")));
    }
    let inst = Instance {
        k: k_target,
        prescribed,
        ground_truth: Some(GroundTruth {
            reference_centers,
            opt_cost,
        }),
        rule_hint: None,
        bad_event: Some(BadEvent {
            point: layout.b,
            within_steps: None,
        }),
        metadata: Metadata {
            generator: "greedy-lb".into(),
            params: serde_json::to_value(p)?,
            ground_truth_cost: Some(opt_hp.to_f64()),
            diagnostics: serde_json::to_value(&report)?,
        },
        x,
    };
    inst.validate()?;
    Ok((inst, report))
}

/// Builds the instance; the self-check report is kept in its metadata.
pub fn gen_greedy_lb(p: &GreedyLbParams) -> Result<Instance> {
    build_greedy_lb(p).map(|(inst, _)| inst)
}

/// Classes taken at the start of phase `i`: `C₀ ∪ N_{≥i+1} ∪ M_{≥i+2} ∪ E_{≥i+1}`.
fn phase_state(model: &Model, i: usize) -> Vec<bool> {
    let t = model.t;
    let mut taken = vec![false; model.classes.len()];
    taken[model.e0] = true;
    for j in i + 1..=t + 1 {
        taken[model.n[j]] = true;
    }
    for j in i + 2..=t {
        taken[model.m[j]] = true;
    }
    for j in i + 1..=t {
        taken[model.e[j]] = true;
    }
    taken
}

/// Point indices of the exported set.
struct Layout {
    b: usize,
    c: usize,
    n: Vec<usize>,
    m: Vec<usize>,
    a: std::ops::Range<usize>,
    e0: usize,
    e: Vec<std::ops::Range<usize>>,
}

impl Layout {
    fn first_point(&self, model: &Model, class: usize) -> usize {
        if class == model.b {
            self.b
        } else if class == model.c {
            self.c
        } else if class == model.a {
            self.a.start
        } else if class == model.e0 {
            self.e0
        } else if let Some(i) = model.n.iter().position(|&v| v == class) {
            self.n[i]
        } else if let Some(i) = model.m.iter().position(|&v| v == class) {
            self.m[i]
        } else {
            let i = model.e.iter().position(|&v| v == class).expect("known class");
            self.e[i].start
        }
    }
}

fn export(
    model: &Model,
    a_count: usize,
    e_size: usize,
    w: &[Hp],
) -> Result<(WeightedPointSet, Layout)> {
    let t = model.t;
    let simplex = simplex_vectors(t + 2)?;
    let a_dim0 = t + 1;
    let f_dim = a_dim0 + a_count;
    let e_dim0 = f_dim + 1;
    let dim = e_dim0 + t * e_size;
    let on_simplex = |j: usize, scale: f64, extra: Vec<(u32, f64)>| {
        let mut pairs: Vec<(u32, f64)> = simplex[j]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(d, v)| (d as u32, scale * v))
            .collect();
        pairs.extend(extra);
        Coords::sparse(pairs)
    };
    let cl = |i: usize| &model.classes[i];
    let scalar = |i: usize| cl(i).simplex.as_ref().map(|s| s.1.to_f64()).unwrap_or(0.0);
    let mut pts = Vec::new();
    let mut add = |coords: Coords, weight: f64| {
        pts.push(WeightedPoint::with_coords(coords, weight));
        pts.len() - 1
    };
    let b = add(Coords::sparse(vec![]), cl(model.b).w.to_f64());
    let c = add(on_simplex(0, 1.0, vec![]), cl(model.c).w.to_f64());
    let mut n = vec![usize::MAX];
    for i in 1..=t + 1 {
        n.push(add(on_simplex(i, scalar(model.n[i]), vec![]), cl(model.n[i]).w.to_f64()));
    }
    let mut m = vec![usize::MAX];
    for i in 1..=t {
        m.push(add(on_simplex(i, scalar(model.m[i]), vec![]), cl(model.m[i]).w.to_f64()));
    }
    let alpha = scalar(model.a);
    let beta = cl(model.a).orth[0].1.to_f64();
    let w_a = cl(model.a).w.to_f64();
    let a_start = 2 + (t + 1) + t;
    for j in 0..a_count {
        add(
            on_simplex(0, alpha, vec![((a_dim0 + j) as u32, beta)]),
            w_a,
        );
    }
    let far = cl(model.e0).orth[0].1.to_f64();
    let e0 = add(Coords::sparse(vec![(f_dim as u32, far)]), 1.0);
    let mut e = vec![0..0];
    for i in 1..=t {
        let start = e0 + 1 + (i - 1) * e_size;
        for j in 0..e_size {
            let axis = e_dim0 + (i - 1) * e_size + j;
            add(
                Coords::sparse(vec![(f_dim as u32, far), (axis as u32, 1.0)]),
                w[i].to_f64(),
            );
        }
        e.push(start..start + e_size);
    }
    let x = WeightedPointSet::new(dim, pts)?;
    Ok((
        x,
        Layout {
            b,
            c,
            n,
            m,
            a: a_start..a_start + a_count,
            e0,
            e,
        },
    ))
}

/// Largest relative deviation of `d(a_i, a_j)` from `k` over all pairs.
fn a_pair_error(x: &WeightedPointSet, layout: &Layout, k: f64) -> f64 {
    use rayon::prelude::*;
    let a: Vec<usize> = layout.a.clone().collect();
    a.par_iter()
        .enumerate()
        .map(|(idx, &i)| {
            a[idx + 1..]
                .iter()
                .map(|&j| (x.sq_dist(i, j).sqrt() - k).abs() / k)
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// The phase-`i` cost-drop ordering evaluated directly on the f64 point set.
fn f64_phase_ordering(x: &WeightedPointSet, layout: &Layout, t: usize, i: usize) -> bool {
    let mut centers = vec![layout.e0];
    centers.extend((i + 1..=t + 1).map(|j| layout.n[j]));
    centers.extend((i + 2..=t).map(|j| layout.m[j]));
    for j in i + 1..=t {
        centers.extend(layout.e[j].clone());
    }
    let cur: Vec<f64> = (0..x.len())
        .map(|p| {
            x.weight(p)
                * centers
                    .iter()
                    .map(|&c| x.sq_dist(p, c))
                    .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let drop = |cand: usize| -> f64 {
        (0..x.len())
            .map(|p| (cur[p] - x.weight(p) * x.sq_dist(p, cand)).max(0.0))
            .sum()
    };
    let db = drop(layout.b);
    let de = drop(layout.e[i].start);
    let mut low = drop(layout.c);
    for j in 1..i {
        low = low.max(drop(layout.n[j])).max(drop(layout.m[j]));
    }
    let mut ok = low < de && de < db && db < drop(layout.n[i]);
    if i < t {
        ok &= db < drop(layout.m[i + 1]);
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk(k: usize, ell: usize, t: Option<usize>) -> GreedyLbParams {
        let mut p = GreedyLbParams::new(k, ell);
        p.constants.c_t = 1.0;
        p.t_override = t;
        p
    }

    #[test]
    fn t_formula() {
        let p = desk(1000, 4, None);
        let (t, f) = integer_t(&p).unwrap();
        assert_eq!(t, 8);
        assert!((f - 4.0 * 1000f64.ln() / (4.0 * 1000f64.ln()).ln()).abs() < 1e-12);
        assert!(matches!(
            integer_t(&GreedyLbParams::new(1000, 4)),
            Err(Error::TooSmallT(_))
        ));
    }

    #[test]
    fn model_distances_match_export() {
        let (inst, _) = build_greedy_lb(&desk(100, 3, Some(3))).unwrap();
        // d(b, n_i) = k^i and d(n_i, m_i) = 10 t k^i.
        let x = &inst.x;
        let (b, n1, m1) = (0, 2, 2 + 4);
        assert!((x.sq_dist(b, n1).sqrt() - 100.0).abs() < 1e-9);
        assert!((x.sq_dist(n1, m1).sqrt() - 30.0 * 100.0).abs() < 1e-6);
        assert!((x.sq_dist(b, 1).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_instance_passes_checks() {
        let (inst, r) = build_greedy_lb(&desk(100, 3, Some(3))).unwrap();
        assert!(r.all_checks_ok);
        assert_eq!(r.phases.len(), 3);
        for ph in &r.phases {
            assert!(ph.wi_bounds_ok && ph.ordering_ok, "{ph:?}");
        }
        assert_eq!(inst.k, inst.x.len() - 3);
        assert!((r.cost_omit_b - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_omits_b_when_t_exceeds_ten() {
        let (inst, r) = build_greedy_lb(&desk(100, 3, Some(11))).unwrap();
        assert_eq!(r.optimum_omits, "b");
        assert!((r.optimum_cost - 1.0 / 11.0).abs() < 1e-15);
        let gt = inst.ground_truth.unwrap();
        assert!((gt.opt_cost - 1.0 / 11.0).abs() < 1e-9);
    }
}
