//! Exact optima of small instances by enumeration, and the exact expectations
//! behind the uniform and D² sampling bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid_and_opt1, point_cost, CenterSet, WeightedPointSet};

/// Default enumeration budget, in subsets or partitions.
pub const DEFAULT_BUDGET: u128 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    SubsetEnum,
    PartitionEnum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Argmin {
    /// Point indices used as centers.
    Subset(Vec<usize>),
    /// Block label of every point.
    Partition(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactOptResult {
    pub opt_cost: f64,
    pub argmin: Argmin,
    pub method: OracleMethod,
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

/// Number of partitions of `n` items into at most `k` nonempty blocks.
pub fn partition_count(n: usize, k: usize) -> u128 {
    // Stirling numbers of the second kind, row by row.
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = row[j]
                .saturating_mul(j as u128)
                .saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[1..].iter().fold(0u128, |a, b| a.saturating_add(*b))
}

fn check_k(x: &WeightedPointSet, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > x.len() {
        return Err(Error::KExceedsPoints {
            k,
            distinct: x.len(),
        });
    }
    Ok(())
}

/// Minimizes `cost` over all `r`-subsets of `0..n`, visited in lexicographic
/// order. Ties go to the first minimizer, or the last if `keep_last`.
fn best_combination(
    n: usize,
    r: usize,
    keep_last: bool,
    mut cost: impl FnMut(&[usize]) -> f64,
) -> (f64, Vec<usize>) {
    let mut comb: Vec<usize> = (0..r).collect();
    let mut best = f64::INFINITY;
    let mut best_comb = comb.clone();
    loop {
        let c = cost(&comb);
        if c < best || (keep_last && c == best) {
            best = c;
            best_comb.copy_from_slice(&comb);
        }
        let Some(i) = (0..r).rev().find(|&i| comb[i] < n - r + i) else {
            break;
        };
        comb[i] += 1;
        for j in i + 1..r {
            comb[j] = comb[j - 1] + 1;
        }
    }
    (best, best_comb)
}

/// Best choice of `k` input points as centers.
pub fn opt_subset(x: &WeightedPointSet, k: usize, budget: u128) -> Result<ExactOptResult> {
    check_k(x, k)?;
    let n = x.len();
    let required = binomial(n, k);
    if required > budget {
        return Err(Error::BudgetExceeded {
            what: "subsets",
            required,
            budget,
        });
    }
    let (best, best_comb) = if 2 * k >= n {
        // Few points are left out and only they pay anything. The last
        // minimizing omitted set has the lexicographically first complement.
        let mut in_omitted = vec![false; n];
        let (cost, omitted) = best_combination(n, n - k, true, |omitted| {
            for &i in omitted {
                in_omitted[i] = true;
            }
            let cost = omitted
                .iter()
                .map(|&i| {
                    (0..n)
                        .filter(|&j| !in_omitted[j])
                        .map(|j| x.sq_dist(i, j))
                        .fold(f64::INFINITY, f64::min)
                        * x.weight(i)
                })
                .sum();
            for &i in omitted {
                in_omitted[i] = false;
            }
            cost
        });
        let centers = (0..n).filter(|i| !omitted.contains(i)).collect();
        (cost, centers)
    } else {
        let d: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| x.weight(i) * x.sq_dist(i, j)).collect())
            .collect();
        best_combination(n, k, false, |comb| {
            d.iter()
                .map(|row| comb.iter().map(|&j| row[j]).fold(f64::INFINITY, f64::min))
                .sum()
        })
    };
    Ok(ExactOptResult {
        opt_cost: best,
        argmin: Argmin::Subset(best_comb),
        method: OracleMethod::SubsetEnum,
    })
}

/// Best partition into at most `k` blocks, each served by its centroid.
pub fn opt_partition(x: &WeightedPointSet, k: usize, budget: u128) -> Result<ExactOptResult> {
    check_k(x, k)?;
    let n = x.len();
    let required = partition_count(n, k);
    if required > budget {
        return Err(Error::BudgetExceeded {
            what: "partitions",
            required,
            budget,
        });
    }
    // Restricted-growth strings: a[0] = 0, a[i] ≤ 1 + max(a[..i]), all < k.
    let mut a = vec![0usize; n];
    let mut m = vec![0usize; n]; // m[i] = max(a[..=i])
    let mut best = f64::INFINITY;
    let mut best_a = a.clone();
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
    loop {
        for b in &mut blocks {
            b.clear();
        }
        for (i, &l) in a.iter().enumerate() {
            blocks[l].push(i);
        }
        let mut cost = 0.0;
        for b in &blocks {
            if b.is_empty() {
                continue;
            }
            cost += match centroid_and_opt1(x, b) {
                Ok((_, c)) => c,
                Err(_) => 0.0,
            };
            if cost >= best {
                break;
            }
        }
        if cost < best {
            best = cost;
            best_a.copy_from_slice(&a);
        }
        let Some(i) = (1..n).rev().find(|&i| a[i] <= m[i - 1] && a[i] + 1 < k) else {
            break;
        };
        a[i] += 1;
        m[i] = m[i - 1].max(a[i]);
        for j in i + 1..n {
            a[j] = 0;
            m[j] = m[j - 1];
        }
    }
    Ok(ExactOptResult {
        opt_cost: best,
        argmin: Argmin::Partition(best_a),
        method: OracleMethod::PartitionEnum,
    })
}

/// Mean of `φ(K, {c})` over a uniformly random member `c` of `K`.
pub fn expected_uniform_cost(x: &WeightedPointSet, members: &[usize]) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    if members.iter().any(|&i| x.weight(i) != 1.0) {
        return Err(Error::NonUnitWeights);
    }
    let sum: f64 = members
        .iter()
        .map(|&c| members.iter().map(|&i| x.sq_dist(i, c)).sum::<f64>())
        .sum();
    Ok(sum / members.len() as f64)
}

/// `E[φ(K, C ∪ {c})]` when `c` is D²-sampled from `K` against `C`.
pub fn expected_d2_cost(x: &WeightedPointSet, members: &[usize], c: &CenterSet) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    let cur = members
        .iter()
        .map(|&i| point_cost(x.point(i), c))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = cur.iter().sum();
    if total == 0.0 {
        return Err(Error::DegenerateCovered);
    }
    let mut e = 0.0;
    for (a, &p) in members.iter().enumerate() {
        if cur[a] == 0.0 {
            continue;
        }
        let after: f64 = members
            .iter()
            .zip(&cur)
            .map(|(&i, &ci)| ci.min(x.weight(i) * x.sq_dist(i, p)))
            .sum();
        e += cur[a] / total * after;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(rng: &mut ChaCha8Rng, n: usize, d: usize, weighted: bool) -> WeightedPointSet {
        WeightedPointSet::new(
            d,
            (0..n)
                .map(|_| {
                    WeightedPoint::new(
                        (0..d).map(|_| rng.random_range(-10.0..10.0)).collect(),
                        if weighted { rng.random_range(0.1..3.0) } else { 1.0 },
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    /// Recursive subset enumeration, written independently of the iterative one.
    fn naive_subset(x: &WeightedPointSet, k: usize) -> f64 {
        fn go(x: &WeightedPointSet, k: usize, start: usize, chosen: &mut Vec<usize>, best: &mut f64) {
            if chosen.len() == k {
                let mut c = 0.0;
                for i in 0..x.len() {
                    let mut m = f64::INFINITY;
                    for &j in chosen.iter() {
                        m = m.min(x.sq_dist(i, j));
                    }
                    c += x.weight(i) * m;
                }
                *best = best.min(c);
                return;
            }
            for s in start..x.len() {
                chosen.push(s);
                go(x, k, s + 1, chosen, best);
                chosen.pop();
            }
        }
        let mut best = f64::INFINITY;
        go(x, k, 0, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn counts() {
        assert_eq!(binomial(12, 4), 495);
        assert_eq!(partition_count(4, 4), 15);
        assert_eq!(partition_count(12, 4), 700_075);
        assert_eq!(partition_count(5, 1), 1);
    }

    #[test]
    fn rgs_visits_every_partition_once() {
        let x = WeightedPointSet::from_unweighted((0..6).map(|i| vec![i as f64]).collect()).unwrap();
        // Enumerate by hand the number of partitions the loop visits through a
        // budget that is exactly the count.
        assert!(opt_partition(&x, 3, partition_count(6, 3)).is_ok());
        assert!(matches!(
            opt_partition(&x, 3, partition_count(6, 3) - 1),
            Err(Error::BudgetExceeded { required: 122, .. })
        ));
    }

    #[test]
    fn subset_examples() {
        let x = WeightedPointSet::from_unweighted(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 10.0],
            vec![1.0, 10.0],
        ])
        .unwrap();
        assert_eq!(opt_subset(&x, 4, DEFAULT_BUDGET).unwrap().opt_cost, 0.0);
        let r = opt_subset(&x, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.opt_cost, 2.0);
        assert_eq!(r.argmin, Argmin::Subset(vec![0, 2]));
    }

    #[test]
    fn omitted_set_enumeration_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for k in 4..=8 {
            let x = random_set(&mut rng, 8, 2, true);
            assert_eq!(opt_subset(&x, k, DEFAULT_BUDGET).unwrap().opt_cost, naive_subset(&x, k));
        }
        let line = WeightedPointSet::from_unweighted((0..4).map(|i| vec![i as f64]).collect()).unwrap();
        let r = opt_subset(&line, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.argmin, Argmin::Subset(vec![0, 1, 2]));
    }

    #[test]
    fn subset_matches_recursive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x = random_set(&mut rng, 8, 2, true);
            let got = opt_subset(&x, 3, DEFAULT_BUDGET).unwrap().opt_cost;
            assert_eq!(got, naive_subset(&x, 3));
        }
    }

    #[test]
    fn partition_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_set(&mut rng, 6, 3, true);
        let all: Vec<usize> = (0..6).collect();
        let got = opt_partition(&x, 1, DEFAULT_BUDGET).unwrap().opt_cost;
        assert!((got - centroid_and_opt1(&x, &all).unwrap().1).abs() < 1e-12 * got);

        let x = WeightedPointSet::from_unweighted(vec![
            vec![-0.1, 0.0],
            vec![0.1, 0.0],
            vec![99.9, 0.0],
            vec![100.1, 0.0],
        ])
        .unwrap();
        let r = opt_partition(&x, 2, DEFAULT_BUDGET).unwrap();
        assert!((r.opt_cost - 0.04).abs() < 1e-12);
        assert_eq!(r.argmin, Argmin::Partition(vec![0, 0, 1, 1]));
    }

    #[test]
    fn bracket_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let x = random_set(&mut rng, 7, 2, true);
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for k in 1..=4 {
                let p = opt_partition(&x, k, DEFAULT_BUDGET).unwrap().opt_cost;
                let s = opt_subset(&x, k, DEFAULT_BUDGET).unwrap().opt_cost;
                assert!(p <= s * (1.0 + 1e-12));
                assert!(s <= 2.0 * p * (1.0 + 1e-12));
                assert!(p <= prev.0 && s <= prev.1);
                prev = (p, s);
            }
        }
    }

    #[test]
    fn budget_error_carries_count() {
        let x = WeightedPointSet::from_unweighted((0..30).map(|i| vec![i as f64]).collect()).unwrap();
        match opt_subset(&x, 10, 1000) {
            Err(Error::BudgetExceeded { required, .. }) => assert_eq!(required, 30_045_015),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn uniform_expectation_examples() {
        let x = WeightedPointSet::from_unweighted(vec![vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(expected_uniform_cost(&x, &[0, 1]).unwrap(), 4.0);
        let w = WeightedPointSet::new(1, vec![WeightedPoint::new(vec![0.0], 2.0)]).unwrap();
        assert!(matches!(
            expected_uniform_cost(&w, &[0]),
            Err(Error::NonUnitWeights)
        ));
    }

    #[test]
    fn uniform_expectation_is_twice_opt() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let n = rng.random_range(1..=20);
            let d = rng.random_range(1..=5);
            let x = random_set(&mut rng, n, d, false);
            let all: Vec<usize> = (0..n).collect();
            let e = expected_uniform_cost(&x, &all).unwrap();
            let (_, opt) = centroid_and_opt1(&x, &all).unwrap();
            assert!((e - 2.0 * opt).abs() <= 1e-9 * e.max(1e-300));
        }
    }

    #[test]
    fn d2_expectation_two_point_closed_form() {
        // K = {−1, 1}, far center at 10: both pay (10 ∓ 1)², picking either
        // leaves the other at distance 2.
        let x = WeightedPointSet::from_unweighted(vec![vec![-1.0], vec![1.0], vec![10.0]]).unwrap();
        let e = expected_d2_cost(&x, &[0, 1], &CenterSet::from_points(&x, &[2])).unwrap();
        let (a, b) = (121.0f64, 81.0f64);
        let want = a / (a + b) * b.min(4.0) + b / (a + b) * a.min(4.0);
        assert_eq!(e, want);
        assert!(e <= 5.0 * 2.0);
        assert!(matches!(
            expected_d2_cost(&x, &[2], &CenterSet::from_points(&x, &[2])),
            Err(Error::DegenerateCovered)
        ));
    }

    #[test]
    fn d2_expectation_within_five_opt() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let n = rng.random_range(2..=10);
            let x = random_set(&mut rng, n + 3, 3, false);
            let members: Vec<usize> = (0..n).collect();
            let centers: Vec<usize> = (n..n + 3).collect();
            let e = expected_d2_cost(&x, &members, &CenterSet::from_points(&x, &centers)).unwrap();
            let (_, opt) = centroid_and_opt1(&x, &members).unwrap();
            assert!(e <= 5.0 * opt * (1.0 + 1e-12));
        }
    }
}
