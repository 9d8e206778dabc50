//! Weighted point sets, squared-distance costs, centroids and the regular
//! simplex used by the instance generators.
//!
//! Coordinates are either dense or sparse. The hard instances live in a few
//! thousand dimensions with only a handful of nonzeros per point, so the sparse
//! form keeps them tractable. Squared distances are always the direct sum of
//! squared coordinate differences; the `‖x‖² + ‖c‖² − 2⟨x, c⟩` expansion loses
//! everything on instances whose scales span dozens of orders of magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinates of a point or center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    Dense(Vec<f64>),
    Sparse(SparseVec),
}

/// Sorted `(index, value)` pairs; absent indices are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

impl SparseVec {
    /// Builds a sparse vector from pairs in any order. Duplicate indices are summed.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut idx: Vec<u32> = Vec::with_capacity(pairs.len());
        let mut val: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if idx.last() == Some(&i) {
                *val.last_mut().unwrap() += v;
            } else {
                idx.push(i);
                val.push(v);
            }
        }
        SparseVec { idx, val }
    }
}

impl Coords {
    pub fn dense(v: Vec<f64>) -> Self {
        Coords::Dense(v)
    }

    pub fn sparse(pairs: Vec<(u32, f64)>) -> Self {
        Coords::Sparse(SparseVec::from_pairs(pairs))
    }

    /// Squared Euclidean distance, summed coordinate by coordinate.
    pub fn sq_dist(&self, other: &Coords) -> f64 {
        match (self, other) {
            (Coords::Dense(a), Coords::Dense(b)) => dense_sq_dist(a, b),
            (Coords::Sparse(a), Coords::Sparse(b)) => sparse_sq_dist(a, b),
            (Coords::Dense(a), Coords::Sparse(b)) | (Coords::Sparse(b), Coords::Dense(a)) => {
                mixed_sq_dist(a, b)
            }
        }
    }

    /// Squared distance to a dense vector.
    pub fn sq_dist_dense(&self, other: &[f64]) -> f64 {
        match self {
            Coords::Dense(a) => dense_sq_dist(a, other),
            Coords::Sparse(s) => mixed_sq_dist(other, s),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        match self {
            Coords::Dense(v) => v.clone(),
            Coords::Sparse(s) => {
                let mut out = vec![0.0; dim];
                for (&i, &v) in s.idx.iter().zip(&s.val) {
                    out[i as usize] = v;
                }
                out
            }
        }
    }

    /// Adds `scale * self` into a dense accumulator.
    pub fn add_scaled_to(&self, acc: &mut [f64], scale: f64) {
        match self {
            Coords::Dense(v) => {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += scale * x;
                }
            }
            Coords::Sparse(s) => {
                for (&i, &v) in s.idx.iter().zip(&s.val) {
                    acc[i as usize] += scale * v;
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        let vals = match self {
            Coords::Dense(v) => v.as_slice(),
            Coords::Sparse(s) => s.val.as_slice(),
        };
        vals.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn check(&self, dim: usize) -> std::result::Result<(), String> {
        match self {
            Coords::Dense(v) => {
                if v.len() != dim {
                    return Err(format!("dense length {} != dim {dim}", v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err("non-finite".into());
                }
            }
            Coords::Sparse(s) => {
                if s.idx.len() != s.val.len() {
                    return Err("sparse idx/val length mismatch".into());
                }
                if s.idx.windows(2).any(|w| w[0] >= w[1]) {
                    return Err("sparse indices not strictly increasing".into());
                }
                if s.idx.last().is_some_and(|&i| i as usize >= dim) {
                    return Err(format!("sparse index out of range for dim {dim}"));
                }
                if s.val.iter().any(|x| !x.is_finite()) {
                    return Err("non-finite".into());
                }
            }
        }
        Ok(())
    }

    fn dim_hint(&self) -> usize {
        match self {
            Coords::Dense(v) => v.len(),
            Coords::Sparse(s) => s.idx.last().map_or(0, |&i| i as usize + 1),
        }
    }

    /// Nonzero coordinates as `(index, bits)` pairs; equal points give equal keys
    /// whatever their storage form (and `-0.0` is treated as zero).
    fn key(&self) -> Vec<(u32, u64)> {
        match self {
            Coords::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (i as u32, x.to_bits()))
                .collect(),
            Coords::Sparse(s) => s
                .idx
                .iter()
                .zip(&s.val)
                .filter(|(_, x)| **x != 0.0)
                .map(|(&i, x)| (i, x.to_bits()))
                .collect(),
        }
    }
}

#[inline]
fn dense_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn sparse_sq_dist(a: &SparseVec, b: &SparseVec) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut s = 0.0;
    while i < a.idx.len() && j < b.idx.len() {
        match a.idx[i].cmp(&b.idx[j]) {
            std::cmp::Ordering::Less => {
                s += a.val[i] * a.val[i];
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                s += b.val[j] * b.val[j];
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let d = a.val[i] - b.val[j];
                s += d * d;
                i += 1;
                j += 1;
            }
        }
    }
    for v in &a.val[i..] {
        s += v * v;
    }
    for v in &b.val[j..] {
        s += v * v;
    }
    s
}

fn mixed_sq_dist(dense: &[f64], sparse: &SparseVec) -> f64 {
    let mut s = 0.0;
    let mut j = 0;
    for (i, &x) in dense.iter().enumerate() {
        let d = if j < sparse.idx.len() && sparse.idx[j] as usize == i {
            j += 1;
            x - sparse.val[j - 1]
        } else {
            x
        };
        s += d * d;
    }
    s
}

/// A point of `X` with its nonnegative weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    #[serde(rename = "w")]
    pub weight: f64,
    pub coords: Coords,
}

impl WeightedPoint {
    pub fn new(coords: Vec<f64>, weight: f64) -> Self {
        WeightedPoint {
            coords: Coords::Dense(coords),
            weight,
        }
    }

    pub fn with_coords(coords: Coords, weight: f64) -> Self {
        WeightedPoint { coords, weight }
    }
}

/// The universe `X`: a nonempty list of weighted points of a common dimension
/// with positive total weight. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPointSet {
    dim: usize,
    points: Vec<WeightedPoint>,
    total_weight: f64,
}

impl WeightedPointSet {
    pub fn new(dim: usize, points: Vec<WeightedPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.weight.is_finite() || p.weight < 0.0 {
                return Err(Error::InvalidWeight(p.weight));
            }
            if let Err(msg) = p.coords.check(dim) {
                if msg == "non-finite" {
                    return Err(Error::NonFiniteCoordinate(i));
                }
                return Err(match &p.coords {
                    Coords::Dense(v) => Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    },
                    Coords::Sparse(_) => Error::Parse(format!("point {i}: {msg}")),
                });
            }
        }
        let total_weight: f64 = points.iter().map(|p| p.weight).sum();
        if total_weight <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        Ok(WeightedPointSet {
            dim,
            points,
            total_weight,
        })
    }

    /// Unit-weight dense points.
    pub fn from_unweighted(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        Self::new(
            dim,
            points
                .into_iter()
                .map(|c| WeightedPoint::new(c, 1.0))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[WeightedPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &WeightedPoint {
        &self.points[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.points[i].weight
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        self.points[i].coords.sq_dist(&self.points[j].coords)
    }

    pub fn is_unit_weight(&self) -> bool {
        self.points.iter().all(|p| p.weight == 1.0)
    }

    /// The subset of points at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.dim,
            indices.iter().map(|&i| self.points[i].clone()).collect(),
        )
    }

    /// Number of distinct coordinate vectors among points of positive weight.
    pub fn distinct_count(&self) -> usize {
        let mut keys: Vec<Vec<(u32, u64)>> = self
            .points
            .iter()
            .filter(|p| p.weight > 0.0)
            .map(|p| p.coords.key())
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    /// Number of distinct coordinate vectors among the given points.
    pub fn distinct_among(&self, indices: &[usize]) -> usize {
        let mut keys: Vec<Vec<(u32, u64)>> =
            indices.iter().map(|&i| self.points[i].coords.key()).collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    pub fn into_points(self) -> Vec<WeightedPoint> {
        self.points
    }
}

/// Where a seeded center came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// 1-based seeding step; 0 for prescribed centers.
    pub step: usize,
    /// 0-based candidate slot within the step.
    pub candidate: usize,
    /// Index of the source point in `X`.
    pub point: usize,
}

/// Ordered list of centers, optionally remembering where each came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterSet {
    pub dim: usize,
    pub centers: Vec<Coords>,
    pub provenance: Vec<Option<Provenance>>,
}

impl CenterSet {
    pub fn empty(dim: usize) -> Self {
        CenterSet {
            dim,
            centers: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn from_dense(dim: usize, centers: Vec<Vec<f64>>) -> Result<Self> {
        let mut set = Self::empty(dim);
        for c in centers {
            set.push(Coords::Dense(c), None)?;
        }
        Ok(set)
    }

    /// Centers at the given points of `x`, tagged as prescribed (step 0).
    pub fn from_points(x: &WeightedPointSet, indices: &[usize]) -> Self {
        CenterSet {
            dim: x.dim(),
            centers: indices
                .iter()
                .map(|&i| x.point(i).coords.clone())
                .collect(),
            provenance: indices
                .iter()
                .map(|&i| {
                    Some(Provenance {
                        step: 0,
                        candidate: 0,
                        point: i,
                    })
                })
                .collect(),
        }
    }

    pub fn push(&mut self, coords: Coords, provenance: Option<Provenance>) -> Result<()> {
        coords
            .check(self.dim)
            .map_err(|_| Error::DimensionMismatch {
                expected: self.dim,
                got: coords.dim_hint(),
            })?;
        self.centers.push(coords);
        self.provenance.push(provenance);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Index and squared distance of the nearest center (lowest index on ties).
    pub fn nearest(&self, coords: &Coords) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.centers.iter().enumerate() {
            let d = coords.sq_dist(c);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        best
    }
}

/// A cluster of an optimal (or reference) solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRef {
    pub label: usize,
    pub members: Vec<usize>,
}

fn check_centers(x_dim: usize, c: &CenterSet) -> Result<()> {
    if c.is_empty() {
        return Err(Error::NoCenters);
    }
    if c.dim != x_dim {
        return Err(Error::DimensionMismatch {
            expected: x_dim,
            got: c.dim,
        });
    }
    Ok(())
}

/// `w(x) · min_{c ∈ C} ‖x − c‖²`.
pub fn point_cost(x: &WeightedPoint, c: &CenterSet) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::NoCenters);
    }
    for center in &c.centers {
        center.check(c.dim).map_err(|_| Error::DimensionMismatch {
            expected: c.dim,
            got: center.dim_hint(),
        })?;
    }
    if let Coords::Dense(v) = &x.coords {
        if v.len() != c.dim {
            return Err(Error::DimensionMismatch {
                expected: c.dim,
                got: v.len(),
            });
        }
    }
    let (_, d) = c.nearest(&x.coords).expect("nonempty");
    Ok(x.weight * d)
}

/// `φ(X, C)`, summed in point-index order.
pub fn total_cost(x: &WeightedPointSet, c: &CenterSet) -> Result<f64> {
    check_centers(x.dim(), c)?;
    Ok(x
        .points()
        .iter()
        .map(|p| p.weight * c.nearest(&p.coords).expect("nonempty").1)
        .sum())
}

/// `φ(K, C)` for the members of `K`, in the order given.
pub fn cluster_cost(x: &WeightedPointSet, members: &[usize], c: &CenterSet) -> Result<f64> {
    check_centers(x.dim(), c)?;
    Ok(members
        .iter()
        .map(|&i| {
            let p = x.point(i);
            p.weight * c.nearest(&p.coords).expect("nonempty").1
        })
        .sum())
}

/// Weighted center of mass `μ(K)` and the one-center optimum `φ*(K) = φ(K, {μ(K)})`.
pub fn centroid_and_opt1(x: &WeightedPointSet, members: &[usize]) -> Result<(Vec<f64>, f64)> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    let w: f64 = members.iter().map(|&i| x.weight(i)).sum();
    if w <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let mut mu = vec![0.0; x.dim()];
    for &i in members {
        let p = x.point(i);
        p.coords.add_scaled_to(&mut mu, p.weight);
    }
    for m in &mut mu {
        *m /= w;
    }
    let opt = members
        .iter()
        .map(|&i| {
            let p = x.point(i);
            p.weight * p.coords.sq_dist_dense(&mu)
        })
        .sum();
    Ok((mu, opt))
}

/// Weighted centroid of `members` in the storage form of the inputs: sparse when
/// every member is sparse, dense otherwise.
pub fn centroid_coords(x: &WeightedPointSet, members: &[usize]) -> Result<Coords> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    let w: f64 = members.iter().map(|&i| x.weight(i)).sum();
    if w <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let all_sparse = members
        .iter()
        .all(|&i| matches!(x.point(i).coords, Coords::Sparse(_)));
    if !all_sparse {
        let (mu, _) = centroid_and_opt1(x, members)?;
        return Ok(Coords::Dense(mu));
    }
    let mut acc: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
    for &i in members {
        let p = x.point(i);
        if let Coords::Sparse(s) = &p.coords {
            for (&j, &v) in s.idx.iter().zip(&s.val) {
                *acc.entry(j).or_insert(0.0) += p.weight * v;
            }
        }
    }
    let (idx, val) = acc.into_iter().map(|(j, v)| (j, v / w)).unzip();
    Ok(Coords::Sparse(SparseVec { idx, val }))
}

/// `d` unit vectors in `ℝ^{d−1}` with pairwise inner product `−1/(d−1)`:
/// the vertices of a regular simplex centered at the origin.
///
/// Vertex `i` is `e_i − 𝟙/d` normalized and expressed in the Helmert basis of
/// the hyperplane orthogonal to `𝟙`, which gives every coordinate in closed form.
pub fn simplex_vectors(d: usize) -> Result<Vec<Vec<f64>>> {
    if d < 2 {
        return Err(Error::SimplexTooSmall(d));
    }
    let norm = ((d as f64 - 1.0) / d as f64).sqrt();
    let mut out = vec![vec![0.0; d - 1]; d];
    for j in 1..d {
        let h = 1.0 / ((j * (j + 1)) as f64).sqrt();
        for (i, v) in out.iter_mut().enumerate().take(j) {
            let _ = i;
            v[j - 1] = h / norm;
        }
        out[j][j - 1] = -(j as f64) * h / norm;
    }
    Ok(out)
}

/// Zero-pads simplex vectors into a `dim`-dimensional ambient space.
pub fn pad(v: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    out[..v.len()].copy_from_slice(v);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(points: &[(&[f64], f64)]) -> WeightedPointSet {
        WeightedPointSet::new(
            points[0].0.len(),
            points
                .iter()
                .map(|(c, w)| WeightedPoint::new(c.to_vec(), *w))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn point_cost_examples() {
        let origin = WeightedPoint::new(vec![0.0, 0.0], 1.0);
        let c = CenterSet::from_dense(2, vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(point_cost(&origin, &c).unwrap(), 0.0);

        let x = WeightedPoint::new(vec![3.0, 0.0], 2.0);
        let c = CenterSet::from_dense(2, vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(point_cost(&x, &c).unwrap(), 18.0);
    }

    #[test]
    fn point_cost_errors() {
        let x = WeightedPoint::new(vec![1.0, 2.0], 1.0);
        assert!(matches!(
            point_cost(&x, &CenterSet::empty(2)),
            Err(Error::NoCenters)
        ));
        let c = CenterSet::from_dense(3, vec![vec![0.0; 3]]).unwrap();
        assert!(matches!(
            point_cost(&x, &c),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut c = CenterSet::empty(2);
        assert!(c.push(Coords::Dense(vec![1.0]), None).is_err());
    }

    #[test]
    fn point_cost_matches_naive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let w = rng.random_range(0.0..3.0);
            let centers: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
                .collect();
            let mut naive = f64::INFINITY;
            for c in &centers {
                let mut s = 0.0;
                for t in 0..3 {
                    s += (x[t] - c[t]) * (x[t] - c[t]);
                }
                if s < naive {
                    naive = s;
                }
            }
            let cs = CenterSet::from_dense(3, centers).unwrap();
            let got = point_cost(&WeightedPoint::new(x, w), &cs).unwrap();
            assert_eq!(got, w * naive);
        }
    }

    #[test]
    fn total_cost_examples() {
        let x = set(&[(&[0.0, 0.0], 1.0), (&[2.0, 0.0], 1.0)]);
        let c = CenterSet::from_dense(2, vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(total_cost(&x, &c).unwrap(), 4.0);
        let all = CenterSet::from_points(&x, &[0, 1]);
        assert_eq!(total_cost(&x, &all).unwrap(), 0.0);
    }

    #[test]
    fn total_cost_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<(Vec<f64>, f64)> = (0..40)
            .map(|_| {
                (
                    (0..4).map(|_| rng.random_range(-10.0..10.0)).collect(),
                    rng.random_range(0.1..2.0),
                )
            })
            .collect();
        let centers: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..4).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let mut naive = 0.0;
        for (p, w) in &pts {
            let best = centers
                .iter()
                .map(|c| p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            naive += w * best;
        }
        let x = WeightedPointSet::new(
            4,
            pts.into_iter()
                .map(|(c, w)| WeightedPoint::new(c, w))
                .collect(),
        )
        .unwrap();
        let got = total_cost(&x, &CenterSet::from_dense(4, centers).unwrap()).unwrap();
        assert!((got - naive).abs() <= 1e-12 * naive);
    }

    #[test]
    fn centroid_examples() {
        let x = set(&[(&[3.0, -1.0], 2.0)]);
        assert_eq!(centroid_and_opt1(&x, &[0]).unwrap(), (vec![3.0, -1.0], 0.0));
        let x = set(&[(&[-1.0, 0.0], 1.0), (&[1.0, 0.0], 1.0)]);
        assert_eq!(centroid_and_opt1(&x, &[0, 1]).unwrap(), (vec![0.0, 0.0], 2.0));
        let z = set(&[(&[1.0], 0.0), (&[2.0], 1.0)]);
        assert!(matches!(centroid_and_opt1(&z, &[0]), Err(Error::ZeroWeight)));
    }

    #[test]
    fn centroid_beats_random_probes() {
        let x = set(&[(&[0.0, 1.0], 0.5), (&[2.0, 3.0], 2.0), (&[-1.0, 4.0], 1.25)]);
        let (_, opt) = centroid_and_opt1(&x, &[0, 1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let c = vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..8.0)];
            let cs = CenterSet::from_dense(2, vec![c]).unwrap();
            assert!(opt <= total_cost(&x, &cs).unwrap());
        }
    }

    #[test]
    fn simplex_small_cases() {
        let two = simplex_vectors(2).unwrap();
        assert!((two[0][0] - 1.0).abs() < 1e-15 && (two[1][0] + 1.0).abs() < 1e-15);
        let v = simplex_vectors(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ip: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { -0.5 };
                assert!((ip - want).abs() < 1e-12);
            }
        }
        assert!(matches!(simplex_vectors(1), Err(Error::SimplexTooSmall(1))));
    }

    #[test]
    fn simplex_gram_matrix() {
        for d in [2usize, 5, 7, 40] {
            let v = simplex_vectors(d).unwrap();
            assert_eq!(v.len(), d);
            for i in 0..d {
                assert_eq!(v[i].len(), d - 1);
                for j in 0..d {
                    let ip: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { -1.0 / (d as f64 - 1.0) };
                    assert!((ip - want).abs() < 1e-10, "d={d} i={i} j={j} ip={ip}");
                }
            }
        }
    }

    #[test]
    fn sparse_and_dense_distances_agree() {
        let a = Coords::sparse(vec![(4, 1.5), (0, -2.0)]);
        let b = Coords::sparse(vec![(2, 3.0), (4, 0.5)]);
        let ad = Coords::Dense(a.to_dense(6));
        let bd = Coords::Dense(b.to_dense(6));
        assert_eq!(a.sq_dist(&b), 4.0 + 9.0 + 1.0);
        assert_eq!(ad.sq_dist(&bd), a.sq_dist(&b));
        assert_eq!(ad.sq_dist(&b), a.sq_dist(&b));
        assert_eq!(b.sq_dist(&ad), a.sq_dist(&b));
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(matches!(
            WeightedPointSet::new(2, vec![]),
            Err(Error::EmptySet)
        ));
        assert!(matches!(
            WeightedPointSet::new(2, vec![WeightedPoint::new(vec![0.0, 0.0], -1.0)]),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(
            WeightedPointSet::new(2, vec![WeightedPoint::new(vec![0.0, 0.0], 0.0)]),
            Err(Error::ZeroWeight)
        ));
        assert!(matches!(
            WeightedPointSet::new(2, vec![WeightedPoint::new(vec![0.0], 1.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distinct_count_ignores_duplicates_and_zero_weight() {
        let x = set(&[
            (&[0.0, 0.0], 1.0),
            (&[-0.0, 0.0], 2.0),
            (&[1.0, 0.0], 1.0),
            (&[5.0, 5.0], 0.0),
        ]);
        assert_eq!(x.distinct_count(), 2);
    }

    fn arb_points(n: usize, d: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
        prop::collection::vec(
            (prop::collection::vec(-100.0f64..100.0, d), 0.01f64..10.0),
            1..n,
        )
    }

    proptest! {
        #[test]
        fn steiner_identity(pts in arb_points(20, 3), c in prop::collection::vec(-100.0f64..100.0, 3)) {
            let x = WeightedPointSet::new(3, pts.into_iter().map(|(c, w)| WeightedPoint::new(c, w)).collect()).unwrap();
            let all: Vec<usize> = (0..x.len()).collect();
            let (mu, opt) = centroid_and_opt1(&x, &all).unwrap();
            let lhs = total_cost(&x, &CenterSet::from_dense(3, vec![c.clone()]).unwrap()).unwrap();
            let shift: f64 = mu.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
            let rhs = opt + x.total_weight() * shift;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1e-300));
        }

        #[test]
        fn cost_monotone_in_centers(pts in arb_points(15, 2), extra in prop::collection::vec(-100.0f64..100.0, 2)) {
            let x = WeightedPointSet::new(2, pts.into_iter().map(|(c, w)| WeightedPoint::new(c, w)).collect()).unwrap();
            let mut c = CenterSet::from_points(&x, &[0]);
            let before = total_cost(&x, &c).unwrap();
            c.push(Coords::Dense(extra), None).unwrap();
            prop_assert!(total_cost(&x, &c).unwrap() <= before);
        }

        #[test]
        fn relaxed_triangle_inequality(a in prop::collection::vec(-1e3f64..1e3, 4), b in prop::collection::vec(-1e3f64..1e3, 4), c in prop::collection::vec(-1e3f64..1e3, 4)) {
            let (a, b, c) = (Coords::Dense(a), Coords::Dense(b), Coords::Dense(c));
            prop_assert!(a.sq_dist(&c) <= 2.0 * (a.sq_dist(&b) + b.sq_dist(&c)));
        }
    }
}
