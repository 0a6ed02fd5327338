//! Small summary statistics and the trend test used by the experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson_interval(hits: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendTest {
    /// Kendall score: concordant minus discordant pairs across groups.
    pub s: i64,
    pub variance: f64,
    /// Continuity-corrected standard score.
    pub z: f64,
    /// One-sided p-value against an increasing trend.
    pub p_increasing: f64,
    /// One-sided p-value against a decreasing trend.
    pub p_decreasing: f64,
}

/// Mann-Kendall trend test on observations grouped by an ordered covariate
/// (tied times allowed). `groups[k]` holds the observations at the k-th grid point.
pub fn mann_kendall(groups: &[Vec<f64>]) -> TrendTest {
    let mut s = 0i64;
    for (g, earlier) in groups.iter().enumerate() {
        for later in &groups[g + 1..] {
            for &a in earlier {
                for &b in later {
                    s += match b.partial_cmp(&a) {
                        Some(std::cmp::Ordering::Greater) => 1,
                        Some(std::cmp::Ordering::Less) => -1,
                        _ => 0,
                    };
                }
            }
        }
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let time_ties: Vec<usize> = groups.iter().map(Vec::len).filter(|&t| t > 1).collect();
    let mut values: Vec<f64> = groups.iter().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    let mut value_ties = Vec::new();
    let mut run = 1usize;
    for w in values.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                value_ties.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        value_ties.push(run);
    }
    let variance = tied_score_variance(n, &time_ties, &value_ties);
    let z = if variance <= 0.0 {
        0.0
    } else if s > 0 {
        (s - 1) as f64 / variance.sqrt()
    } else if s < 0 {
        (s + 1) as f64 / variance.sqrt()
    } else {
        0.0
    };
    let normal = Normal::standard();
    TrendTest { s, variance, z, p_increasing: 1.0 - normal.cdf(z), p_decreasing: normal.cdf(z) }
}

/// Null variance of Kendall's score with ties in both rankings.
fn tied_score_variance(n: usize, t: &[usize], u: &[usize]) -> f64 {
    let n = n as f64;
    if n < 3.0 {
        return 0.0;
    }
    let f = |k: &[usize], g: &dyn Fn(f64) -> f64| k.iter().map(|&x| g(x as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = f(t, &|x| x * (x - 1.0) * (2.0 * x + 5.0));
    let vu = f(u, &|x| x * (x - 1.0) * (2.0 * x + 5.0));
    let t2 = f(t, &|x| x * (x - 1.0));
    let u2 = f(u, &|x| x * (x - 1.0));
    let t3 = f(t, &|x| x * (x - 1.0) * (x - 2.0));
    let u3 = f(u, &|x| x * (x - 1.0) * (x - 2.0));
    (v0 - vt - vu) / 18.0 + t3 * u3 / (9.0 * n * (n - 1.0) * (n - 2.0)) + t2 * u2 / (2.0 * n * (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Null variance of the score by enumerating every assignment of the
    /// pooled values to the groups (all permutations).
    fn permutation_variance(groups: &[Vec<f64>]) -> f64 {
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
        let mut idx: Vec<usize> = (0..pooled.len()).collect();
        let mut scores = Vec::new();
        permute(&mut idx, 0, &mut |perm| {
            let mut regrouped = Vec::new();
            let mut k = 0;
            for &sz in &sizes {
                regrouped.push(perm[k..k + sz].iter().map(|&i| pooled[i]).collect::<Vec<f64>>());
                k += sz;
            }
            scores.push(mann_kendall(&regrouped).s as f64);
        });
        let m = mean(&scores);
        scores.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / scores.len() as f64
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn variance_matches_permutation_distribution() {
        let cases = vec![
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            vec![vec![3.0, 1.0, 1.0], vec![2.0, 2.0], vec![0.0, 5.0]],
            vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0]],
        ];
        for groups in cases {
            let exact = permutation_variance(&groups);
            let formula = mann_kendall(&groups).variance;
            assert!((exact - formula).abs() < 1e-9, "{exact} vs {formula}");
        }
    }

    #[test]
    fn detects_a_clear_decrease() {
        let groups: Vec<Vec<f64>> = (0..3).map(|g| vec![1.0; 30 - 12 * g].into_iter().chain(vec![0.0; 10 + 12 * g]).collect()).collect();
        let t = mann_kendall(&groups);
        assert!(t.s < 0);
        assert!(t.p_decreasing < 0.01);
        assert!(t.p_increasing > 0.99);
    }

    #[test]
    fn constant_data_has_no_trend() {
        let t = mann_kendall(&[vec![0.0; 5], vec![0.0; 5], vec![0.0; 5]]);
        assert_eq!(t.s, 0);
        assert_eq!(t.z, 0.0);
        assert_eq!(t.p_increasing, 0.5);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 200, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.03);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson_interval(200, 200, Z95);
        assert!(lo > 0.97 && hi == 1.0);
    }

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(sample_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]), (32.0f64 / 7.0).sqrt());
        assert!(sample_std(&[1.0]).is_nan());
    }
}
