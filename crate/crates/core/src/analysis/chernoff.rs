use crate::error::{invalid, Result};

/// Bounds on `P(P < (1 - eps) lambda)` and `P(P > (1 + eps) lambda)` for a
/// Poisson variable of mean `lambda`: `exp(-lambda eps^2 / 2)` and
/// `exp(-lambda eps^2 / 4)`.
pub fn chernoff_poisson(lambda: f64, eps: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("Poisson mean must be positive, got {lambda}"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0,1), got {eps}"));
    }
    let e2 = lambda * eps * eps;
    Ok(((-e2 / 2.0).exp(), (-e2 / 4.0).exp()))
}

/// Bound on `P(B >= n p + a)` for `B ~ Binomial(n, p)`.
pub fn chernoff_binomial(n: u64, p: f64, a: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0,1], got {p}"));
    }
    if n == 0 {
        return invalid("n must be positive");
    }
    if !(a > 0.0 && a.is_finite()) {
        return invalid(format!("a must be positive, got {a}"));
    }
    let m = n as f64 * p;
    Ok((a - (m + a) * (a / m).ln_1p()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Binomial, Distribution, Poisson};

    #[test]
    fn closed_forms() {
        let (lo, hi) = chernoff_poisson(100.0, 0.5).unwrap();
        assert!((lo - (-12.5f64).exp()).abs() < 1e-18);
        assert!((lo - 3.7267e-6).abs() < 1e-9);
        assert!((hi - (-6.25f64).exp()).abs() < 1e-15);
        let (lo, hi) = chernoff_poisson(10.0, 1e-9).unwrap();
        assert!(lo > 1.0 - 1e-15 && hi > 1.0 - 1e-15);
        // n p = 10, a = 10: exp(10 - 20 ln 2)
        let b = chernoff_binomial(100, 0.1, 10.0).unwrap();
        assert!((b - (10.0 - 20.0 * 2f64.ln()).exp()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(chernoff_poisson(0.0, 0.5).is_err());
        assert!(chernoff_poisson(1.0, 1.0).is_err());
        assert!(chernoff_poisson(1.0, 0.0).is_err());
        assert!(chernoff_binomial(10, 0.0, 1.0).is_err());
        assert!(chernoff_binomial(10, 0.5, 0.0).is_err());
        assert!(chernoff_binomial(0, 0.5, 1.0).is_err());
    }

    #[test]
    fn binomial_tail_is_bounded() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let (n, p) = (200u64, 0.05);
        let d = Binomial::new(n, p).unwrap();
        let draws: Vec<u64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        for a in [2.0, 5.0, 10.0] {
            let hit = draws.iter().filter(|&&b| b as f64 >= n as f64 * p + a).count() as f64 / draws.len() as f64;
            assert!(hit <= chernoff_binomial(n, p, a).unwrap(), "a={a} {hit}");
        }
    }

    #[test]
    fn poisson_tails_are_bounded() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for lambda in [10.0, 100.0] {
            let d = Poisson::new(lambda).unwrap();
            let draws: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
            for eps in [0.1, 0.3, 0.5] {
                let (lo, hi) = chernoff_poisson(lambda, eps).unwrap();
                let n = draws.len() as f64;
                let below = draws.iter().filter(|&&x| x < (1.0 - eps) * lambda).count() as f64 / n;
                let above = draws.iter().filter(|&&x| x > (1.0 + eps) * lambda).count() as f64 / n;
                assert!(below <= lo && above <= hi, "{lambda} {eps}: {below} {above}");
            }
        }
    }
}
