//! Integration against the standard normal density.

use crate::scalar::Real;

/// Half-width of the truncated integration range; the dropped tail mass is
/// 2·Φ(−8.5) ≈ 1.9e-17.
const RANGE: f64 = 8.5;
const NODES_PER_PANEL: usize = 16;
const START_PANELS: usize = 4;
const MAX_PANELS: usize = 1 << 12;

/// Gauss–Legendre nodes and weights on [-1, 1], via Newton on P_n.
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(n);
    let nf = T::c(n as f64);
    for i in 0..n {
        let mut x = (T::PI() * (T::c(i as f64) + T::c(0.75)) / (nf + T::c(0.5))).cos();
        let mut deriv = T::one();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            deriv = dp;
            let dx = p / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::c(4.0) {
                let (_, dp) = legendre(n, x);
                deriv = dp;
                break;
            }
        }
        let w = T::c(2.0) / ((T::one() - x * x) * deriv * deriv);
        out.push((x, w));
    }
    out
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for m in 2..=n {
        let mf = T::c(m as f64);
        let p2 = ((T::c(2.0) * mf - T::one()) * x * p1 - (mf - T::one()) * p0) / mf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::c(n as f64);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Composite Gauss–Legendre estimate of `∫ g(z) φ(z) dz` over the real line,
/// doubling the panel count until successive estimates agree to `tol`.
pub fn normal_expectation<T: Real>(tol: T, mut g: impl FnMut(T) -> T) -> T {
    let rule = gauss_legendre::<T>(NODES_PER_PANEL);
    let mut panels = START_PANELS;
    let mut prev = composite(&rule, panels, &mut g);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = composite(&rule, panels, &mut g);
        if (next - prev).abs() < tol {
            return next;
        }
        prev = next;
    }
    prev
}

fn composite<T: Real>(rule: &[(T, T)], panels: usize, g: &mut impl FnMut(T) -> T) -> T {
    let lo = -T::c(RANGE);
    let width = T::c(2.0 * RANGE) / T::c(panels as f64);
    let half = width / T::c(2.0);
    let norm = T::one() / T::TAU().sqrt();
    let mut total = T::zero();
    for p in 0..panels {
        let mid = lo + width * T::c(p as f64) + half;
        let mut acc = T::zero();
        for &(x, w) in rule {
            let z = mid + half * x;
            acc = acc + w * g(z) * (-(z * z) / T::c(2.0)).exp();
        }
        total = total + acc * half;
    }
    total * norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = gauss_legendre::<f64>(16);
        let sum: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // exact up to degree 31
        let x30: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert!((x30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn normal_moments() {
        let m0 = normal_expectation(1e-12, |_| 1.0f64);
        let m2 = normal_expectation(1e-12, |z: f64| z * z);
        let m4 = normal_expectation(1e-12, |z: f64| z.powi(4));
        assert!((m0 - 1.0).abs() < 1e-13);
        assert!((m2 - 1.0).abs() < 1e-13);
        assert!((m4 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn step_integrand_converges() {
        // E[1{Z <= 0.3}] = Φ(0.3), with a hard discontinuity
        let v = normal_expectation(1e-10, |z: f64| if z <= 0.3 { 1.0 } else { 0.0 });
        assert!((v - crate::normal::cdf(0.3)).abs() < 1e-3);
    }
}
