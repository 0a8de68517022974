//! Small statistical helpers shared by the experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("valid normal").cdf(x)
}

/// Kolmogorov–Smirnov distance between the empirical law of `sample` and `cdf`.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(0.5 * alpha).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Pearson chi-square statistic and p-value (1 degree of freedom) of the 2x2
/// table obtained by splitting each coordinate at its median.
pub fn quadrant_chi_square(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let mx = median(xs);
    let my = median(ys);
    let mut table = [[0.0f64; 2]; 2];
    for (&x, &y) in xs.iter().zip(ys) {
        table[(x > mx) as usize][(y > my) as usize] += 1.0;
    }
    let n = xs.len() as f64;
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let mut stat = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let expected = rows[r] * cols[c] / n;
            if expected > 0.0 {
                stat += (table[r][c] - expected).powi(2) / expected;
            }
        }
    }
    let p = 1.0 - ChiSquared::new(1.0).expect("valid chi-square").cdf(stat);
    (stat, p)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for (h, n) in [(0u64, 1000u64), (1, 1000), (500, 1000), (1000, 1000)] {
            let (lo, hi) = wilson_interval(h, n, Z95);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
        let (lo, hi) = wilson_interval(0, 1_000_000, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (1e6 + Z95 * Z95)).abs() < 1e-12);
    }

    #[test]
    fn ks_against_own_law_is_small() {
        let mut s = stream(3, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| s.uniform()).collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)) < 1.63 / 100.0);
        let ys: Vec<f64> = (0..10_000).map(|_| s.uniform()).collect();
        assert!(ks_two_sample(&xs, &ys) < ks_two_sample_critical(10_000, 10_000, 0.01));
        let shifted: Vec<f64> = ys.iter().map(|y| y + 0.1).collect();
        assert!(ks_two_sample(&xs, &shifted) > 0.09);
    }

    #[test]
    fn ks_two_sample_handles_ties() {
        let a = [1.0, 1.0, 2.0, 3.0];
        let b = [1.0, 2.0, 2.0, 3.0];
        assert!((ks_two_sample(&a, &b) - 0.25).abs() < 1e-15);
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn critical_value_matches_table() {
        assert!((ks_two_sample_critical(100, 100, 0.01) - 1.6276 * (0.02f64).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn chi_square_detects_dependence() {
        let mut s = stream(11, 0);
        let xs: Vec<f64> = (0..4000).map(|_| s.uniform()).collect();
        let ys: Vec<f64> = (0..4000).map(|_| s.uniform()).collect();
        let (_, p) = quadrant_chi_square(&xs, &ys);
        assert!(p > 0.001);
        let zs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x + 0.3 * y).collect();
        let (_, p) = quadrant_chi_square(&xs, &zs);
        assert!(p < 1e-10);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [0.1, 0.2, 0.5, 0.9];
        let ys: Vec<f64> = xs.iter().map(|x| -0.25 + 3.0 * x).collect();
        let (a, b) = linear_fit(&xs, &ys).unwrap();
        assert!((a + 0.25).abs() < 1e-12 && (b - 3.0).abs() < 1e-12);
    }
}
