//! Gamma and Beta functions.
//!
//! [`gamma`] is a Lanczos approximation (g = 7, nine coefficients).
//! [`gamma_stirling`] is an independent route through upward recurrence and
//! the Stirling asymptotic series; the two are cross-checked in tests.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for real `x` that is not a non-positive integer.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let s = (PI * x).sin();
        if s == 0.0 {
            return f64::NAN;
        }
        return PI / (s * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `Γ(x)` for `x > 0` via `Γ(x) = Γ(x + n) / (x(x+1)…(x+n−1))` and the Stirling
/// series at `x + n ≥ 16`.
pub fn gamma_stirling(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut z = x;
    let mut denom = 1.0;
    while z < 16.0 {
        denom *= z;
        z += 1.0;
    }
    // Bernoulli terms B_{2k} / (2k (2k−1)), k = 1..8.
    const TERMS: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in TERMS {
        series += c * pow;
        pow *= inv2;
    }
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    ln.exp() / denom
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Surface area `2π^{n/2} / Γ(n/2)` of the unit sphere `S^{n−1} ⊂ R^n`.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_relative_eq!(gamma(1.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5), 0.5 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5), -2.0 * PI.sqrt(), max_relative = 1e-14);
        assert!(gamma(0.0).is_nan() || gamma(0.0).is_infinite());
    }

    #[test]
    fn lanczos_matches_stirling_on_0_20() {
        let mut worst: f64 = 0.0;
        for i in 1..4000 {
            let x = i as f64 * 0.005;
            let a = gamma(x);
            let b = gamma_stirling(x);
            worst = worst.max(((a - b) / b).abs());
        }
        assert!(worst <= 1e-13, "worst relative disagreement {worst:e}");
    }

    #[test]
    fn ln_gamma_consistent() {
        for &x in &[0.1, 0.5, 1.7, 3.2, 12.0, 19.5] {
            assert_relative_eq!(ln_gamma(x).exp(), gamma(x), max_relative = 1e-13);
        }
    }

    #[test]
    fn beta_and_sphere() {
        assert_relative_eq!(beta(0.5, 0.5), PI, max_relative = 1e-14);
        assert_relative_eq!(beta(2.0, 3.0), 1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
    }
}
