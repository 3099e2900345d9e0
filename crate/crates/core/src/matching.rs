//! Multiset comparison of complex spectra.
//!
//! Degenerate bands make index-wise comparison of sorted spectra meaningless,
//! so spectra are paired greedily: repeatedly take the closest remaining
//! `(a, b)` pair in the complex plane.

use crate::error::{invalid, Result};
use crate::C64;

/// Candidate neighbours considered per element before the exhaustive fallback.
const CANDIDATES: usize = 12;

/// Greedy nearest-pair matching between two equally sized multisets.
/// Returns `pairs[i] = (index into a, index into b, distance)` in the order
/// they were matched.
pub fn greedy_match(a: &[C64], b: &[C64]) -> Result<Vec<(usize, usize, f64)>> {
    if a.len() != b.len() {
        return Err(invalid(format!("multisets differ in size: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut pairs = Vec::with_capacity(n);

    // b sorted by real part; candidates come from a window around each a
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| b[i].re.total_cmp(&b[j].re).then(b[i].im.total_cmp(&b[j].im)));
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &x) in a.iter().enumerate() {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(CANDIDATES + 1);
        let start = order.partition_point(|&j| b[j].re < x.re);
        let (mut lo, mut hi) = (start, start);
        loop {
            let bound = best.last().map(|&(d, _)| d).filter(|_| best.len() == CANDIDATES);
            let left = (lo > 0).then(|| (x.re - b[order[lo - 1]].re).abs());
            let right = (hi < n).then(|| (b[order[hi]].re - x.re).abs());
            let (take_left, gap) = match (left, right) {
                (None, None) => break,
                (Some(l), None) => (true, l),
                (None, Some(r)) => (false, r),
                (Some(l), Some(r)) => (l <= r, l.min(r)),
            };
            if bound.is_some_and(|d| gap > d) {
                break;
            }
            let j = if take_left {
                lo -= 1;
                order[lo]
            } else {
                hi += 1;
                order[hi - 1]
            };
            let d = (x - b[j]).norm();
            let pos = best.partition_point(|&(e, k)| (e, k) < (d, j));
            best.insert(pos, (d, j));
            best.truncate(CANDIDATES);
        }
        candidates.extend(best.into_iter().map(|(d, j)| (d, i, j)));
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    for (d, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j, d));
        }
    }

    // leftovers: exhaustive greedy among the unmatched
    let rest_a: Vec<usize> = (0..n).filter(|&i| !used_a[i]).collect();
    if !rest_a.is_empty() {
        let rest_b: Vec<usize> = (0..n).filter(|&j| !used_b[j]).collect();
        let mut all: Vec<(f64, usize, usize)> =
            rest_a.iter().flat_map(|&i| rest_b.iter().map(move |&j| ((a[i] - b[j]).norm(), i, j))).collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        for (d, i, j) in all {
            if !used_a[i] && !used_b[j] {
                used_a[i] = true;
                used_b[j] = true;
                pairs.push((i, j, d));
            }
        }
    }
    Ok(pairs)
}

/// Largest pair distance of the greedy matching.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> Result<f64> {
    Ok(greedy_match(a, b)?.iter().map(|p| p.2).fold(0.0, f64::max))
}

/// Outcome of checking that a spectrum is closed under complex conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationReport {
    pub passed: bool,
    pub max_distance: f64,
    pub tolerance: f64,
    /// Eigenvalues whose conjugate partner was farther than the tolerance.
    pub unmatched: Vec<C64>,
}

/// Pairs each eigenvalue with the conjugate of another. `tolerance` is
/// absolute; pass e.g. `1e-8 * median|λ|`.
pub fn conjugation_symmetry_check(values: &[C64], tolerance: f64) -> ConjugationReport {
    let conj: Vec<C64> = values.iter().map(|v| v.conj()).collect();
    let pairs = greedy_match(values, &conj).expect("equal sizes");
    let unmatched: Vec<C64> = pairs.iter().filter(|p| p.2 > tolerance).map(|p| values[p.0]).collect();
    let max_distance = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    ConjugationReport { passed: unmatched.is_empty(), max_distance, tolerance, unmatched }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn degenerate_multisets_match() {
        let a = [c(0.0, 0.0), c(-1.0, 0.0), c(-0.5, 0.0), c(-0.5, 0.0)];
        let b = [c(-0.5, 0.0), c(-1.0, 0.0), c(-0.5, 1e-13), c(0.0, 0.0)];
        assert!(multiset_distance(&a, &b).unwrap() < 1e-12);
        assert!(multiset_distance(&a, &b[..3]).is_err());
    }

    #[test]
    fn conjugation_examples() {
        let real = [c(0.0, 0.0), c(-1.0, 0.0), c(-0.5, 0.0), c(-0.5, 0.0)];
        assert!(conjugation_symmetry_check(&real, 1e-12).passed);
        let lone = conjugation_symmetry_check(&[c(-1.0, 2.0)], 1e-9);
        assert!(!lone.passed);
        assert_eq!(lone.unmatched, vec![c(-1.0, 2.0)]);
    }

    proptest! {
        #[test]
        fn permutation_has_zero_distance(xs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..60), seed in any::<u64>()) {
            let a: Vec<C64> = xs.iter().map(|&(r, i)| c(r, i)).collect();
            let mut b = a.clone();
            let n = b.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                b.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(multiset_distance(&a, &b).unwrap(), 0.0);
            let pairs = greedy_match(&a, &b).unwrap();
            prop_assert_eq!(pairs.len(), n);
        }
    }
}
