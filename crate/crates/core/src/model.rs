//! Model parameters and the geometry of the killing sets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Parameters of `X^a = X^0 + aY` in `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub alpha: f64,
    /// Jump weight `a ≥ 0`; `a = 0` is pure Brownian motion.
    pub weight: f64,
    /// Uniformity cap `M ≥ a`. Carried for reporting only, never used in formulas.
    pub weight_cap: Option<f64>,
}

impl ModelParams {
    pub fn new(dim: usize, alpha: f64, weight: f64) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return invalid(format!("alpha must lie in (0, 2), got {alpha}"));
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return invalid(format!("jump weight must be finite and >= 0, got {weight}"));
        }
        Ok(Self {
            dim,
            alpha,
            weight,
            weight_cap: None,
        })
    }

    pub fn with_weight_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap >= self.weight) {
            return invalid(format!(
                "weight cap {cap} is below the weight {}",
                self.weight
            ));
        }
        self.weight_cap = Some(cap);
        Ok(self)
    }

    /// Same `d` and `α`, different jump weight.
    pub fn with_weight(&self, weight: f64) -> Result<Self> {
        let mut p = Self::new(self.dim, self.alpha, weight)?;
        p.weight_cap = self.weight_cap.filter(|&m| m >= weight);
        Ok(p)
    }

    /// `(t_star, r_star) = (a^{2α/(α−2)}, a^{−α/(2−α)})`; `t_star = r_star²`.
    ///
    /// Below `t_star` the Brownian part dominates the on-diagonal decay, above it
    /// the stable part does. `r_star` is the matching length.
    pub fn regime_thresholds(&self) -> Result<(f64, f64)> {
        if self.weight == 0.0 {
            return Err(Error::NoFiniteThreshold);
        }
        let r_star = self.weight.powf(-self.alpha / (2.0 - self.alpha));
        Ok((r_star * r_star, r_star))
    }

    pub fn time_threshold(&self) -> Result<f64> {
        self.regime_thresholds().map(|(t, _)| t)
    }

    pub fn length_threshold(&self) -> Result<f64> {
        self.regime_thresholds().map(|(_, r)| r)
    }

    /// Factor `a^{α/(2−α)}` mapping a configuration with weight `a` onto weight 1.
    pub fn unit_weight_scale(&self) -> Result<f64> {
        self.length_threshold().map(|r| 1.0 / r)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return invalid(format!(
                "point has {} coordinates, model dimension is {}",
                x.len(),
                self.dim
            ));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return invalid("point coordinates must be finite");
        }
        Ok(())
    }
}

/// `{x : x_d > b1 + A(1 + sin(2π x_1 / L))/2}`, sandwiched as `H_{b1+A} ⊆ D ⊆ H_{b1}`.
///
/// The boundary is a cylinder over the curve in the `(x_1, x_d)` plane, so the
/// distance to the complement only depends on those two coordinates. In `d = 1`
/// there is no horizontal coordinate and `x_1` is read as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidalDomain {
    floor: f64,
    amplitude: f64,
    wavelength: f64,
}

impl SinusoidalDomain {
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn ceiling(&self) -> f64 {
        self.floor + self.amplitude
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Height of the boundary curve above horizontal coordinate `s`.
    pub fn height(&self, s: f64) -> f64 {
        self.floor + 0.5 * self.amplitude * (1.0 + (2.0 * PI * s / self.wavelength).sin())
    }

    fn height_slope(&self, s: f64) -> f64 {
        let k = 2.0 * PI / self.wavelength;
        0.5 * self.amplitude * k * (k * s).cos()
    }

    fn horizontal(x: &[f64]) -> f64 {
        if x.len() >= 2 {
            x[0]
        } else {
            0.0
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        let v = *x.last().expect("non-empty point");
        v > self.height(Self::horizontal(x))
    }

    /// Distance from `(u, v)` to the boundary curve, for `v` above the curve.
    ///
    /// The closest point lies within `|s − u| ≤ W` where `W² = D0² − (v − b2)²`
    /// and `D0 = v − h(u)` (every curve point is at least `v − b2` below `v`).
    /// The window is scanned on a grid finer than any basin of the squared
    /// distance, then each discrete local minimum is polished by golden
    /// section and a few Newton steps.
    fn distance_above(&self, u: f64, v: f64) -> f64 {
        let vertical = v - self.height(u);
        if self.amplitude == 0.0 {
            return vertical;
        }
        let gap = v - self.ceiling();
        let half_width = if gap > 0.0 {
            ((vertical - gap) * (vertical + gap)).max(0.0).sqrt()
        } else {
            vertical
        };
        if half_width == 0.0 {
            return vertical;
        }
        let dist2 = |s: f64| {
            let dh = self.height(s) - v;
            (s - u) * (s - u) + dh * dh
        };
        let spacing = (self.wavelength / 128.0)
            .min(vertical / 8.0)
            .max(half_width / 65_536.0);
        let n = ((2.0 * half_width / spacing).ceil() as usize).max(4);
        let h = 2.0 * half_width / n as f64;
        let lo = u - half_width;
        let samples: Vec<f64> = (0..=n).map(|i| dist2(lo + i as f64 * h)).collect();

        let mut best = vertical * vertical;
        for i in 0..=n {
            let left = if i == 0 {
                f64::INFINITY
            } else {
                samples[i - 1]
            };
            let right = if i == n {
                f64::INFINITY
            } else {
                samples[i + 1]
            };
            if samples[i] <= left && samples[i] <= right {
                let s0 = lo + i as f64 * h;
                let s = self.polish(u, v, s0 - h, s0 + h);
                best = best.min(dist2(s)).min(samples[i]);
            }
        }
        best.sqrt()
    }

    fn polish(&self, u: f64, v: f64, mut a: f64, mut b: f64) -> f64 {
        let dist2 = |s: f64| {
            let dh = self.height(s) - v;
            (s - u) * (s - u) + dh * dh
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (dist2(c), dist2(d));
        for _ in 0..200 {
            if (b - a).abs() <= 1e-12 * (1.0 + a.abs()) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = dist2(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = dist2(d);
            }
        }
        let mut s = 0.5 * (a + b);
        // Newton on the stationarity condition (s − u) + (h(s) − v) h'(s) = 0.
        let k = 2.0 * PI / self.wavelength;
        for _ in 0..3 {
            let hs = self.height(s);
            let hp = self.height_slope(s);
            let hpp = -0.5 * self.amplitude * k * k * (k * s).sin();
            let g = (s - u) + (hs - v) * hp;
            let gp = 1.0 + hp * hp + (hs - v) * hpp;
            if gp <= 0.0 {
                break;
            }
            let next = s - g / gp;
            if !(next.is_finite()) || dist2(next) > dist2(s) {
                break;
            }
            s = next;
        }
        s
    }
}

/// Open set on which the process is killed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// `H_b = {x : x_d > b}`.
    HalfSpace {
        floor: f64,
    },
    Sinusoidal(SinusoidalDomain),
}

impl Domain {
    pub fn half_space(floor: f64) -> Self {
        Domain::HalfSpace { floor }
    }

    /// Sinusoidal half-space-like domain with `b2 = b1 + amplitude`.
    pub fn sinusoidal(b1: f64, b2: f64, amplitude: f64, wavelength: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return invalid("amplitude must be finite and >= 0");
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return invalid("wavelength must be finite and > 0");
        }
        if ((b1 + amplitude) - b2).abs() > 1e-12 * (1.0 + b2.abs()) {
            return invalid(format!(
                "b2 = {b2} must equal b1 + amplitude = {}",
                b1 + amplitude
            ));
        }
        Ok(Domain::Sinusoidal(SinusoidalDomain {
            floor: b1,
            amplitude,
            wavelength,
        }))
    }

    /// Strict interior membership.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::HalfSpace { floor } => *x.last().expect("non-empty point") > *floor,
            Domain::Sinusoidal(s) => s.contains(x),
        }
    }

    /// Distance from `x` to the complement; zero outside the domain.
    pub fn delta(&self, x: &[f64]) -> f64 {
        let v = *x.last().expect("non-empty point");
        match self {
            Domain::HalfSpace { floor } => (v - floor).max(0.0),
            Domain::Sinusoidal(s) => {
                if !s.contains(x) {
                    0.0
                } else {
                    s.distance_above(SinusoidalDomain::horizontal(x), v)
                }
            }
        }
    }

    /// Membership in the closure; boundary points are accepted.
    pub fn in_closure(&self, x: &[f64]) -> bool {
        let v = *x.last().expect("non-empty point");
        match self {
            Domain::HalfSpace { floor } => v >= *floor,
            Domain::Sinusoidal(s) => v >= s.height(SinusoidalDomain::horizontal(x)),
        }
    }

    /// Level `b` of the largest half-space `H_b` containing the domain.
    pub fn outer_floor(&self) -> f64 {
        match self {
            Domain::HalfSpace { floor } => *floor,
            Domain::Sinusoidal(s) => s.floor,
        }
    }

    /// Level `b` of the smallest half-space `H_b` contained in the domain.
    pub fn inner_floor(&self) -> f64 {
        match self {
            Domain::HalfSpace { floor } => *floor,
            Domain::Sinusoidal(s) => s.ceiling(),
        }
    }

    /// The image `λD`.
    pub fn scaled(&self, lambda: f64) -> Domain {
        match self {
            Domain::HalfSpace { floor } => Domain::HalfSpace {
                floor: lambda * floor,
            },
            Domain::Sinusoidal(s) => Domain::Sinusoidal(SinusoidalDomain {
                floor: lambda * s.floor,
                amplitude: lambda * s.amplitude,
                wavelength: lambda * s.wavelength,
            }),
        }
    }
}

/// Killing set for the simulator: an unbounded [`Domain`] or a bounded box or ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Domain(Domain),
    /// Open box `∏ (lower_i, upper_i)`; an interval in `d = 1`.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl Region {
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower], vec![upper])
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return invalid("box bounds must be non-empty and of equal length");
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return invalid("box bounds must satisfy lower < upper");
        }
        Ok(Region::Box { lower, upper })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || center.is_empty() {
            return invalid("ball needs a non-empty center and positive radius");
        }
        Ok(Region::Ball { center, radius })
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Domain(d) => d.contains(x),
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| v > l && v < u),
            Region::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                r2 < radius * radius
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Region::Domain(_))
    }

    /// Dimension the region was built for, if it fixes one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Region::Domain(_) => None,
            Region::Box { lower, .. } => Some(lower.len()),
            Region::Ball { center, .. } => Some(center.len()),
        }
    }
}

impl From<Domain> for Region {
    fn from(d: Domain) -> Self {
        Region::Domain(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_space_membership() {
        let h0 = Domain::half_space(0.0);
        assert!(h0.contains(&[5.0, 1.0]));
        assert!(!h0.contains(&[5.0, 0.0]));
        assert!(!Domain::half_space(2.0).contains(&[0.0, 1.0]));
    }

    #[test]
    fn half_space_delta() {
        assert_eq!(Domain::half_space(0.0).delta(&[0.3, 3.0]), 3.0);
        assert_eq!(Domain::half_space(1.0).delta(&[0.5]), 0.0);
    }

    #[test]
    fn thresholds() {
        let p = ModelParams::new(1, 1.0, 1.0).unwrap();
        assert_eq!(p.regime_thresholds().unwrap(), (1.0, 1.0));
        let p = ModelParams::new(1, 1.0, 2.0).unwrap();
        assert_eq!(p.regime_thresholds().unwrap(), (0.25, 0.5));
        let p = ModelParams::new(1, 1.0, 0.5).unwrap();
        assert_eq!(p.regime_thresholds().unwrap(), (4.0, 2.0));
        let p = ModelParams::new(2, 0.7, 3.3).unwrap();
        let (t, r) = p.regime_thresholds().unwrap();
        assert_relative_eq!(t, 3.3f64.powf(1.4 / (0.7 - 2.0)), max_relative = 1e-14);
        assert_eq!(t, r * r);
    }

    #[test]
    fn zero_weight_has_no_threshold() {
        let p = ModelParams::new(1, 1.0, 0.0).unwrap();
        assert_eq!(p.regime_thresholds(), Err(Error::NoFiniteThreshold));
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::new(0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1, 2.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, -0.1).is_err());
        assert!(ModelParams::new(1, 1.0, 2.0)
            .unwrap()
            .with_weight_cap(1.0)
            .is_err());
    }

    #[test]
    fn sinusoidal_rejects_inconsistent_levels() {
        assert!(Domain::sinusoidal(0.0, 2.0, 1.0, 1.0).is_err());
        assert!(Domain::sinusoidal(0.0, 1.0, 1.0, 0.0).is_err());
    }

    /// Brute-force distance: dense scan of the curve over a generous window.
    fn dense_distance(s: &SinusoidalDomain, u: f64, v: f64) -> f64 {
        let w = (v - s.height(u)) + 1.0;
        let n = 400_000;
        (0..=n)
            .map(|i| {
                let t = u - w + 2.0 * w * i as f64 / n as f64;
                ((t - u).powi(2) + (s.height(t) - v).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn sinusoidal_distance_matches_dense_scan() {
        let dom = Domain::sinusoidal(0.0, 1.0, 1.0, 2.0 * PI).unwrap();
        let Domain::Sinusoidal(s) = dom else {
            unreachable!()
        };
        for &(u, v) in &[
            (0.0, 5.0),
            (1.3, 1.2),
            (-2.0, 0.4),
            (4.71, 0.05),
            (4.71, 0.6),
            (0.2, 40.0),
        ] {
            let exact = dom.delta(&[u, v]);
            let brute = dense_distance(&s, u, v);
            // The dense scan is accurate to ~ (grid step)², well under 1e-8 here.
            assert!(
                (exact - brute).abs() < 1e-8,
                "({u},{v}): {exact} vs {brute}"
            );
            assert!(exact <= brute + 1e-12);
        }
    }

    #[test]
    fn sinusoidal_far_point_sandwich() {
        let dom = Domain::sinusoidal(0.0, 1.0, 1.0, 2.0 * PI).unwrap();
        for &u in &[0.0, 0.5, 1.0, 2.5] {
            let v = 1000.0;
            let d = dom.delta(&[u, 0.0, v]);
            assert!(d >= v - 1.0 - 1e-12 && d <= v);
        }
    }

    #[test]
    fn scaled_domain_scales_distance() {
        let dom = Domain::sinusoidal(0.5, 1.25, 0.75, 3.0).unwrap();
        let x = [0.7, 2.0];
        let lam = 2.5;
        let scaled = dom.scaled(lam);
        assert_relative_eq!(
            scaled.delta(&[lam * x[0], lam * x[1]]),
            lam * dom.delta(&x),
            max_relative = 1e-10
        );
    }

    #[test]
    fn region_membership() {
        let iv = Region::interval(0.0, 2.0).unwrap();
        assert!(iv.contains(&[1.0]));
        assert!(!iv.contains(&[2.0]));
        let ball = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(ball.contains(&[0.5, 0.5]));
        assert!(!ball.contains(&[1.0, 0.0]));
        assert!(Region::interval(1.0, 1.0).is_err());
    }
}
