//! Small statistical helpers used by the diagnostics and the experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};
use statrs::statistics::{Data, OrderStatistics, Statistics};

use crate::error::{invalid, Result};

/// Result of a chi-square test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    fn new(statistic: f64, dof: usize) -> Result<Self> {
        if dof == 0 {
            return invalid("chi-square test with no degrees of freedom");
        }
        let dist = ChiSquared::new(dof as f64).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
        Ok(ChiSquare {
            statistic,
            dof,
            p_value: dist.sf(statistic),
        })
    }

    pub fn rejects(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Bins `0..=max` grouped left to right so every group has expected count
/// at least `min_expected`; the tail beyond the last bin goes into the last
/// group. Returns the upper (inclusive) count of each group.
fn pool_bins(expected: &[f64], min_expected: f64) -> Vec<usize> {
    let mut cuts = Vec::new();
    let mut acc = 0.0;
    for (k, &e) in expected.iter().enumerate() {
        acc += e;
        if acc >= min_expected {
            cuts.push(k);
            acc = 0.0;
        }
    }
    if acc > 0.0 {
        cuts.pop();
        cuts.push(expected.len() - 1);
    }
    cuts
}

/// Goodness of fit of counts to Poisson(`mean`), pooling bins to an expected
/// count of at least 5.
pub fn chi_square_poisson(counts: &[u64], mean: f64) -> Result<ChiSquare> {
    if counts.is_empty() {
        return invalid("no counts");
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return invalid(format!("Poisson mean must be positive, got {mean}"));
    }
    let pois = Poisson::new(mean).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    let n = counts.len() as f64;
    let top = (*counts.iter().max().expect("non-empty") as f64).max(mean + 10.0 * mean.sqrt() + 10.0) as u64;
    let mut expected: Vec<f64> = (0..=top).map(|k| n * pois.pmf(k)).collect();
    *expected.last_mut().expect("non-empty") += n * pois.sf(top);
    let mut observed = vec![0.0; expected.len()];
    for &c in counts {
        observed[c.min(top) as usize] += 1.0;
    }
    let cuts = pool_bins(&expected, 5.0);
    let (mut stat, mut lo) = (0.0, 0);
    for &hi in &cuts {
        let e: f64 = expected[lo..=hi].iter().sum();
        let o: f64 = observed[lo..=hi].iter().sum();
        stat += (o - e) * (o - e) / e;
        lo = hi + 1;
    }
    ChiSquare::new(stat, cuts.len().saturating_sub(1))
}

/// Homogeneity of two samples of counts (a 2 x k contingency table, with
/// sparse columns pooled).
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.is_empty() || b.is_empty() {
        return invalid("both samples must be non-empty");
    }
    let top = *a.iter().chain(b).max().expect("non-empty") as usize;
    let mut ha = vec![0.0; top + 1];
    let mut hb = vec![0.0; top + 1];
    a.iter().for_each(|&c| ha[c as usize] += 1.0);
    b.iter().for_each(|&c| hb[c as usize] += 1.0);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    // pool so that the smaller expected cell count is at least 5
    let col: Vec<f64> = ha.iter().zip(&hb).map(|(x, y)| (x + y) * na.min(nb) / total).collect();
    let cuts = pool_bins(&col, 5.0);
    let (mut stat, mut lo) = (0.0, 0);
    for &hi in &cuts {
        let oa: f64 = ha[lo..=hi].iter().sum();
        let ob: f64 = hb[lo..=hi].iter().sum();
        let c = oa + ob;
        let (ea, eb) = (c * na / total, c * nb / total);
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
        lo = hi + 1;
    }
    ChiSquare::new(stat, cuts.len().saturating_sub(1))
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    Data::new(xs.to_vec()).median()
}

/// Variance over mean (sample variance).
pub fn dispersion_index(xs: &[f64]) -> f64 {
    let m = xs.mean();
    xs.variance() / m
}

/// Lag-1 autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 3 {
        return f64::NAN;
    }
    let m = xs.mean();
    let den: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / den
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid("a line fit needs at least two paired points");
    }
    let (mx, my) = (x.mean(), y.mean());
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return invalid("a line fit needs two distinct abscissae");
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Fits of a survival curve, compared on `log P`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFits {
    /// `P = exp(-a t^b)`.
    pub stretched_a: f64,
    pub stretched_b: f64,
    pub stretched_residual: f64,
    /// `P = c t^-k`.
    pub power_c: f64,
    pub power_k: f64,
    pub power_residual: f64,
    /// Slope of `log(-log P)` against `log t`.
    pub loglog_slope: f64,
    pub points: usize,
}

fn stretched_sse(t: &[f64], lp: &[f64], b: f64) -> (f64, f64) {
    let stb: f64 = t.iter().map(|x| x.powf(2.0 * b)).sum();
    let num: f64 = t.iter().zip(lp).map(|(x, l)| -l * x.powf(b)).sum();
    let a = (num / stb).max(0.0);
    let sse = t.iter().zip(lp).map(|(x, l)| (l + a * x.powf(b)).powi(2)).sum();
    (sse, a)
}

/// Fits both tail models to the points with `t > 0` and `0 < P < 1`. The
/// stretched exponential is fitted by least squares on `log P` (exact in
/// `a` for each `b`, golden-section search over `b`), as is the power law.
pub fn fit_tails(t: &[f64], p: &[f64]) -> Result<TailFits> {
    if t.len() != p.len() {
        return invalid("times and probabilities differ in length");
    }
    let (ts, lps): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(p)
        .filter(|(&t, &p)| t > 0.0 && p > 0.0 && p < 1.0)
        .map(|(&t, &p)| (t, p.ln()))
        .unzip();
    if ts.len() < 3 {
        return invalid(format!("need at least three usable points, got {}", ts.len()));
    }
    let lts: Vec<f64> = ts.iter().map(|x| x.ln()).collect();
    let (pa, pb) = linear_fit(&lts, &lps)?;
    let power_residual = lts.iter().zip(&lps).map(|(x, y)| (y - pa - pb * x).powi(2)).sum();
    let lls: Vec<f64> = lps.iter().map(|l| (-l).ln()).collect();
    let (_, loglog_slope) = linear_fit(&lts, &lls)?;

    let (mut lo, mut hi) = (1e-3_f64, 5.0_f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if stretched_sse(&ts, &lps, m1).0 < stretched_sse(&ts, &lps, m2).0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let b = 0.5 * (lo + hi);
    let (stretched_residual, a) = stretched_sse(&ts, &lps, b);
    Ok(TailFits {
        stretched_a: a,
        stretched_b: b,
        stretched_residual,
        power_c: pa.exp(),
        power_k: -pb,
        power_residual,
        loglog_slope,
        points: ts.len(),
    })
}
