//! Closed-form envelopes: the free heat-kernel envelope `h^a_C`, the stable
//! form, the Dirichlet envelope with its boundary factors, survival envelopes
//! and the two Green-function forms `f^a_D`, `g^a_D`.
//!
//! Comparability constants are always explicit inputs. The estimates only
//! assert their existence, so callers fit or report them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Domain, ModelParams};
use crate::special::gamma;

/// Constants of a two-sided estimate: the outer multiplicative constant and the
/// constant in the Gaussian exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityConstants {
    pub outer: f64,
    pub exponent: f64,
}

impl ComparabilityConstants {
    pub const UNIT: Self = Self {
        outer: 1.0,
        exponent: 1.0,
    };

    pub fn new(outer: f64, exponent: f64) -> Result<Self> {
        if !(outer >= 1.0 && exponent >= 1.0) || !outer.is_finite() || !exponent.is_finite() {
            return invalid(format!(
                "comparability constants must be finite and >= 1, got ({outer}, {exponent})"
            ));
        }
        Ok(Self { outer, exponent })
    }
}

/// Which display produced an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeBranch {
    /// `a = 0`: Brownian Dirichlet envelope.
    Brownian,
    /// `t < t_star`: boundary factors in `δ`, Gaussian plus mixed term.
    ShortTime,
    /// `t > t_star`: boundary factors in `φ_a(δ)`, stable form.
    LongTime,
    /// `t = t_star`: union of both branches.
    Seam,
    /// Survival-probability envelope.
    Survival,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePair {
    pub lower: f64,
    pub upper: f64,
    pub constants: ComparabilityConstants,
    pub branch: EnvelopeBranch,
}

impl EnvelopePair {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Distances to the complement of both points and their separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub delta_x: f64,
    pub delta_y: f64,
    pub separation: f64,
}

impl PairGeometry {
    pub fn new(delta_x: f64, delta_y: f64, separation: f64) -> Result<Self> {
        if !(delta_x >= 0.0 && delta_y >= 0.0 && separation >= 0.0) {
            return invalid("distances must be non-negative");
        }
        Ok(Self {
            delta_x,
            delta_y,
            separation,
        })
    }

    /// Geometry of `x, y` in the closure of `domain`.
    pub fn of(params: &ModelParams, domain: &Domain, x: &[f64], y: &[f64]) -> Result<Self> {
        params.check_point(x)?;
        params.check_point(y)?;
        for p in [x, y] {
            if !domain.in_closure(p) {
                return Err(Error::OutsideDomain { point: p.to_vec() });
            }
        }
        Ok(Self {
            delta_x: domain.delta(x),
            delta_y: domain.delta(y),
            separation: distance(x, y),
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            delta_x: self.delta_y,
            delta_y: self.delta_x,
            separation: self.separation,
        }
    }
}

pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// `φ_a(r) = r ∧ (r/a)^{α/2}`, with `φ_0(r) = r`.
pub fn phi(alpha: f64, a: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !(a >= 0.0) {
        return invalid(format!("phi needs r >= 0 and a >= 0, got r = {r}, a = {a}"));
    }
    Ok(phi_unchecked(alpha, a, r))
}

#[inline]
pub(crate) fn phi_unchecked(alpha: f64, a: f64, r: f64) -> f64 {
    if a == 0.0 {
        r
    } else {
        r.min((r / a).powf(0.5 * alpha))
    }
}

/// `Φ_a(r) = r² + a^α r^α`.
pub fn levy_exponent(params: &ModelParams, r: f64) -> f64 {
    r * r + params.weight.powf(params.alpha) * r.powf(params.alpha)
}

/// `𝒜(d, α) = α 2^{α−1} π^{−d/2} Γ((d+α)/2) / Γ(1−α/2)`.
pub fn stable_constant(d: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return invalid(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    if d == 0 {
        return invalid("dimension must be at least 1");
    }
    let df = d as f64;
    Ok(alpha
        * 2f64.powf(alpha - 1.0)
        * std::f64::consts::PI.powf(-df / 2.0)
        * gamma((df + alpha) / 2.0)
        / gamma(1.0 - alpha / 2.0))
}

/// Lévy intensity `a^α 𝒜(d,α) r^{−(d+α)}`.
pub fn jump_intensity(params: &ModelParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Singular(format!("jump intensity at r = {r}")));
    }
    if params.weight == 0.0 {
        return Ok(0.0);
    }
    let a_alpha = params.weight.powf(params.alpha);
    Ok(a_alpha
        * stable_constant(params.dim, params.alpha)?
        * r.powf(-(params.dim as f64 + params.alpha)))
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("time must be finite and > 0, got {t}"));
    }
    Ok(())
}

/// `(a^α t)^{−d/α} ∧ a^α t / r^{d+α}`, valid at `r = 0`.
#[inline]
pub(crate) fn stable_form_unchecked(d: f64, alpha: f64, a: f64, t: f64, r: f64) -> f64 {
    let at = a.powf(alpha) * t;
    let diag = at.powf(-d / alpha);
    if r == 0.0 {
        diag
    } else {
        diag.min(at / r.powf(d + alpha))
    }
}

pub fn stable_form(params: &ModelParams, t: f64, r: f64) -> Result<f64> {
    if params.weight == 0.0 {
        return invalid("stable form is undefined for a = 0");
    }
    check_time(t)?;
    if !(r >= 0.0) {
        return invalid("separation must be >= 0");
    }
    Ok(stable_form_unchecked(
        params.dim as f64,
        params.alpha,
        params.weight,
        t,
        r,
    ))
}

/// Free-space envelope `h^a_C(t, x, y)` with `r = |x − y|`.
pub fn h_envelope(params: &ModelParams, c: f64, t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    if !(c > 0.0) || !(r >= 0.0) {
        return invalid("h envelope needs C > 0 and r >= 0");
    }
    Ok(h_envelope_unchecked(params, c, t, r))
}

pub(crate) fn h_envelope_unchecked(params: &ModelParams, c: f64, t: f64, r: f64) -> f64 {
    let d = params.dim as f64;
    let gauss = t.powf(-d / 2.0) * (-c * r * r / t).exp();
    if params.weight == 0.0 {
        return gauss;
    }
    let diag = t
        .powf(-d / 2.0)
        .min((params.weight.powf(params.alpha) * t).powf(-d / params.alpha));
    diag.min(gauss + stable_form_unchecked(d, params.alpha, params.weight, t, r))
}

/// `1 ∧ s/√t`.
#[inline]
pub(crate) fn boundary_factor(s: f64, t: f64) -> f64 {
    (s / t.sqrt()).min(1.0)
}

/// `q^a_D(t, x, y)` from distances.
pub fn q_form_geometry(params: &ModelParams, t: f64, g: &PairGeometry) -> f64 {
    let (alpha, a) = (params.alpha, params.weight);
    boundary_factor(phi_unchecked(alpha, a, g.delta_x), t)
        * boundary_factor(phi_unchecked(alpha, a, g.delta_y), t)
        * stable_form_unchecked(params.dim as f64, alpha, a, t, g.separation)
}

/// `q^a_D(t, x, y) = (1 ∧ φ_a(δ(x))/√t)(1 ∧ φ_a(δ(y))/√t) · stable form`.
pub fn q_form(params: &ModelParams, domain: &Domain, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if params.weight == 0.0 {
        return invalid("q form is undefined for a = 0");
    }
    check_time(t)?;
    let g = PairGeometry::of(params, domain, x, y)?;
    Ok(q_form_geometry(params, t, &g))
}

fn brownian_pair(
    params: &ModelParams,
    t: f64,
    g: &PairGeometry,
    k: ComparabilityConstants,
) -> (f64, f64) {
    let d = params.dim as f64;
    let r2 = g.separation * g.separation;
    let b = boundary_factor(g.delta_x, t) * boundary_factor(g.delta_y, t);
    let base = t.powf(-d / 2.0);
    let lower = b * base * (-k.exponent * r2 / t).exp() / k.outer;
    let upper = b * base * (-r2 / (k.exponent * t)).exp() * k.outer;
    (lower, upper)
}

fn short_time_pair(
    params: &ModelParams,
    t: f64,
    g: &PairGeometry,
    k: ComparabilityConstants,
) -> (f64, f64) {
    let d = params.dim as f64;
    let (alpha, a) = (params.alpha, params.weight);
    let r = g.separation;
    let b = boundary_factor(g.delta_x, t) * boundary_factor(g.delta_y, t);
    let base = t.powf(-d / 2.0);
    let mixed = if r == 0.0 {
        base
    } else {
        base.min(a.powf(alpha) * t / r.powf(d + alpha))
    };
    let lower = b * (base * (-k.exponent * r * r / t).exp() + mixed) / k.outer;
    let upper = b * (base * (-r * r / (k.exponent * t)).exp() + mixed) * k.outer;
    (lower, upper)
}

fn long_time_pair(
    params: &ModelParams,
    t: f64,
    g: &PairGeometry,
    k: ComparabilityConstants,
) -> (f64, f64) {
    let q = q_form_geometry(params, t, g);
    (q / k.outer, q * k.outer)
}

/// Two-sided Dirichlet heat kernel envelope from distances.
///
/// For `a > 0` the short-time display is used below `t_star` and the long-time
/// display above it; at `t_star` (relative tolerance 1e-12) both are evaluated
/// and the widest pair is returned. `a = 0` gives the Brownian envelope.
pub fn dirichlet_envelope_geometry(
    params: &ModelParams,
    t: f64,
    g: &PairGeometry,
    k: ComparabilityConstants,
) -> Result<EnvelopePair> {
    check_time(t)?;
    let pair = |(lower, upper): (f64, f64), branch| EnvelopePair {
        lower,
        upper,
        constants: k,
        branch,
    };
    if params.weight == 0.0 {
        return Ok(pair(
            brownian_pair(params, t, g, k),
            EnvelopeBranch::Brownian,
        ));
    }
    let t_star = params.time_threshold()?;
    if (t - t_star).abs() <= 1e-12 * t_star {
        let (l1, u1) = short_time_pair(params, t, g, k);
        let (l2, u2) = long_time_pair(params, t, g, k);
        Ok(pair((l1.min(l2), u1.max(u2)), EnvelopeBranch::Seam))
    } else if t < t_star {
        Ok(pair(
            short_time_pair(params, t, g, k),
            EnvelopeBranch::ShortTime,
        ))
    } else {
        Ok(pair(
            long_time_pair(params, t, g, k),
            EnvelopeBranch::LongTime,
        ))
    }
}

pub fn dirichlet_envelope(
    params: &ModelParams,
    domain: &Domain,
    t: f64,
    x: &[f64],
    y: &[f64],
    k: ComparabilityConstants,
) -> Result<EnvelopePair> {
    let g = PairGeometry::of(params, domain, x, y)?;
    dirichlet_envelope_geometry(params, t, &g, k)
}

/// `(c⁻¹ B, c B)` with `B = 1 ∧ φ_a(δ_D(x))/√t`.
pub fn survival_envelope(
    params: &ModelParams,
    domain: &Domain,
    t: f64,
    x: &[f64],
    k: ComparabilityConstants,
) -> Result<EnvelopePair> {
    check_time(t)?;
    params.check_point(x)?;
    if !domain.in_closure(x) {
        return Err(Error::OutsideDomain { point: x.to_vec() });
    }
    let b = boundary_factor(
        phi_unchecked(params.alpha, params.weight, domain.delta(x)),
        t,
    );
    Ok(EnvelopePair {
        lower: b / k.outer,
        upper: b * k.outer,
        constants: k,
        branch: EnvelopeBranch::Survival,
    })
}

/// `f^a_D` from distances; the regime `|x − y| ≥ r_star` form of the Green function.
pub fn green_f_geometry(params: &ModelParams, g: &PairGeometry) -> Result<f64> {
    let (d, alpha, a) = (params.dim, params.alpha, params.weight);
    if !(a > 0.0) {
        return invalid("f form needs a > 0");
    }
    let r = g.separation;
    let px = phi_unchecked(alpha, a, g.delta_x);
    let py = phi_unchecked(alpha, a, g.delta_y);
    let df = d as f64;
    if df > alpha {
        if r == 0.0 {
            return Err(Error::Singular("f form at x = y".into()));
        }
        let cap = a.powf(-alpha / 2.0);
        let rh = r.powf(alpha / 2.0);
        Ok(r.powf(alpha - df) * cap.min(px / rh) * cap.min(py / rh))
    } else if d == 1 && alpha == 1.0 {
        if r == 0.0 {
            return Err(Error::Singular("f form at x = y".into()));
        }
        // log((1 + a φφ/r)^{1/a}) without forming the power.
        Ok((a * px * py / r).ln_1p() / a)
    } else {
        let prod = px * py;
        let cap = prod.powf((alpha - 1.0) / alpha) / a;
        if r == 0.0 {
            Ok(cap)
        } else {
            Ok((prod / r).min(cap))
        }
    }
}

pub fn green_f(params: &ModelParams, domain: &Domain, x: &[f64], y: &[f64]) -> Result<f64> {
    let g = PairGeometry::of(params, domain, x, y)?;
    green_f_geometry(params, &g)
}

/// `g^a_D` from distances; the regime `|x − y| ≤ r_star` form of the Green function.
pub fn green_g_geometry(params: &ModelParams, g: &PairGeometry) -> Result<f64> {
    let (d, alpha, a) = (params.dim, params.alpha, params.weight);
    if !(a > 0.0) {
        return invalid("g form needs a > 0");
    }
    let r = g.separation;
    let prod = g.delta_x * g.delta_y;
    match d {
        1 => {
            let by_sep = if r == 0.0 { f64::INFINITY } else { prod / r };
            if alpha > 1.0 {
                let cap = a.powf(-alpha) * prod.powf((alpha - 1.0) / 2.0);
                Ok(prod.sqrt().min(by_sep).min(cap))
            } else if alpha == 1.0 {
                Ok(by_sep.min((a * prod.sqrt()).ln_1p() / a))
            } else {
                Ok(prod.sqrt().min(by_sep).min(a.powf(alpha / (alpha - 2.0))))
            }
        }
        2 => {
            if r == 0.0 {
                return Err(Error::Singular("g form at x = y in d = 2".into()));
            }
            let t_star = a.powf(2.0 * alpha / (alpha - 2.0));
            Ok((t_star.min(prod) / (r * r)).ln_1p())
        }
        _ => {
            if r == 0.0 {
                return Err(Error::Singular("g form at x = y in d >= 3".into()));
            }
            Ok(r.powf(2.0 - d as f64) * (prod / (r * r)).min(1.0))
        }
    }
}

pub fn green_g(params: &ModelParams, domain: &Domain, x: &[f64], y: &[f64]) -> Result<f64> {
    let g = PairGeometry::of(params, domain, x, y)?;
    green_g_geometry(params, &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(d: usize, alpha: f64, a: f64) -> ModelParams {
        ModelParams::new(d, alpha, a).unwrap()
    }

    const H0: Domain = Domain::HalfSpace { floor: 0.0 };

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.7, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(phi(1.0, 1.0, 4.0).unwrap(), 2.0);
        assert_eq!(phi(1.0, 4.0, 1.0).unwrap(), 0.5);
        assert_eq!(phi(1.3, 0.0, 2.5).unwrap(), 2.5);
        assert!(phi(1.0, 1.0, -1.0).is_err());
        assert!(phi(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn levy_exponent_values() {
        assert_eq!(levy_exponent(&params(1, 0.4, 1.0), 1.0), 2.0);
        assert_eq!(levy_exponent(&params(1, 1.0, 0.0), 3.0), 9.0);
        assert_eq!(levy_exponent(&params(1, 1.0, 2.0), 3.0), 15.0);
    }

    #[test]
    fn stable_constant_cauchy() {
        assert_relative_eq!(
            stable_constant(1, 1.0).unwrap(),
            1.0 / PI,
            max_relative = 1e-14
        );
        assert!(stable_constant(1, 1.999).unwrap().is_finite());
        assert!(stable_constant(1, 2.0).is_err());
        assert!(stable_constant(1, 0.0).is_err());
    }

    #[test]
    fn stable_constant_d3_dual_gamma() {
        use crate::special::gamma_stirling;
        let alt = 1.0 * 2f64.powf(0.0) * PI.powf(-1.5) * gamma_stirling(2.0) / gamma_stirling(0.5);
        assert_relative_eq!(stable_constant(3, 1.0).unwrap(), alt, max_relative = 1e-13);
        // Γ(2)/Γ(1/2) = 1/√π, so 𝒜(3,1) = π^{-2}.
        assert_relative_eq!(
            stable_constant(3, 1.0).unwrap(),
            PI.powi(-2),
            max_relative = 1e-13
        );
    }

    #[test]
    fn jump_intensity_values() {
        let p = params(1, 1.0, 1.0);
        assert_relative_eq!(
            jump_intensity(&p, 1.0).unwrap(),
            1.0 / PI,
            max_relative = 1e-14
        );
        let p = params(2, 1.3, 0.8);
        let ratio = jump_intensity(&p, 0.7).unwrap() / jump_intensity(&p, 1.4).unwrap();
        assert_relative_eq!(ratio, 2f64.powf(3.3), max_relative = 1e-13);
        assert_eq!(jump_intensity(&params(3, 1.0, 0.0), 2.0).unwrap(), 0.0);
        assert!(matches!(jump_intensity(&p, 0.0), Err(Error::Singular(_))));
    }

    #[test]
    fn h_envelope_values() {
        let p = params(1, 1.0, 1.0);
        assert_relative_eq!(h_envelope(&p, 1.0, 1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            h_envelope(&p, 1.0, 1.0, 2.0).unwrap(),
            (-4.0f64).exp() + 0.25,
            max_relative = 1e-14
        );
        assert_relative_eq!(h_envelope(&p, 1.0, 4.0, 0.0).unwrap(), 0.25);
        let p0 = params(2, 1.0, 0.0);
        assert_relative_eq!(
            h_envelope(&p0, 0.5, 2.0, 1.0).unwrap(),
            0.5 * (-0.25f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn stable_form_values() {
        let p = params(1, 1.0, 1.0);
        assert_eq!(stable_form(&p, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(stable_form(&p, 1.0, 2.0).unwrap(), 0.25);
        assert_eq!(stable_form(&p, 4.0, 1.0).unwrap(), 0.25);
        assert!(stable_form(&params(1, 1.0, 0.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn q_form_values() {
        let p = params(1, 1.0, 1.0);
        assert_eq!(q_form(&p, &H0, 1.0, &[1.0], &[2.0]).unwrap(), 1.0);
        assert_relative_eq!(
            q_form(&p, &H0, 100.0, &[1.0], &[2.0]).unwrap(),
            0.1 * 2f64.sqrt() / 10.0 * 0.01,
            max_relative = 1e-14
        );
        // x = y: boundary factors times the on-diagonal stable value.
        assert_relative_eq!(
            q_form(&p, &H0, 4.0, &[1.0], &[1.0]).unwrap(),
            0.5 * 0.5 * 0.25,
            max_relative = 1e-14
        );
        assert!(matches!(
            q_form(&p, &H0, 1.0, &[-1.0], &[1.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn dirichlet_envelope_branches() {
        let p = params(1, 1.0, 1.0);
        let k = ComparabilityConstants::UNIT;
        let e = dirichlet_envelope(&p, &H0, 4.0, &[1.0], &[1.0], k).unwrap();
        assert_eq!(e.branch, EnvelopeBranch::LongTime);
        assert_relative_eq!(e.lower, 0.0625, max_relative = 1e-14);
        assert_relative_eq!(e.upper, 0.0625, max_relative = 1e-14);

        let k = ComparabilityConstants::new(2.0, 3.0).unwrap();
        let seam = dirichlet_envelope(&p, &H0, 1.0, &[0.5], &[1.5], k).unwrap();
        assert_eq!(seam.branch, EnvelopeBranch::Seam);
        let g = PairGeometry::new(0.5, 1.5, 1.0).unwrap();
        let (l1, u1) = short_time_pair(&p, 1.0, &g, k);
        let (l2, u2) = long_time_pair(&p, 1.0, &g, k);
        assert_eq!(seam.lower, l1.min(l2));
        assert_eq!(seam.upper, u1.max(u2));
        assert!(seam.lower <= seam.upper);

        let p0 = params(1, 1.0, 0.0);
        let b = dirichlet_envelope(&p0, &H0, 1.0, &[1.0], &[1.0], ComparabilityConstants::UNIT)
            .unwrap();
        assert_eq!(b.branch, EnvelopeBranch::Brownian);
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }

    #[test]
    fn short_time_uses_plain_distance() {
        // a = 4, α = 1: t_star = 1/16; at t = 0.01 boundary factors use δ, not φ_a(δ).
        let p = params(1, 1.0, 4.0);
        let e = dirichlet_envelope(
            &p,
            &H0,
            0.01,
            &[0.05],
            &[0.05],
            ComparabilityConstants::UNIT,
        )
        .unwrap();
        assert_eq!(e.branch, EnvelopeBranch::ShortTime);
        let b = 0.05 / 0.1;
        let base = 10.0;
        assert_relative_eq!(e.lower, b * b * (base + base), max_relative = 1e-14);
    }

    #[test]
    fn survival_envelope_values() {
        let p = params(1, 1.0, 1.0);
        let e = survival_envelope(&p, &H0, 1.0, &[1.0], ComparabilityConstants::UNIT).unwrap();
        assert_eq!((e.lower, e.upper), (1.0, 1.0));
        let k = ComparabilityConstants::new(2.0, 1.0).unwrap();
        let e = survival_envelope(&p, &H0, 100.0, &[1.0], k).unwrap();
        assert_relative_eq!(e.lower, 0.05, max_relative = 1e-14);
        assert_relative_eq!(e.upper, 0.2, max_relative = 1e-14);
        let e = survival_envelope(&p, &H0, 100.0, &[1e12], k).unwrap();
        assert_eq!((e.lower, e.upper), (0.5, 2.0));
        assert!(survival_envelope(&p, &H0, 1.0, &[-1.0], k).is_err());
    }

    #[test]
    fn green_f_cases() {
        let p = params(1, 1.0, 1.0);
        // δx = 1, δy = 2: φ(2) = √2.
        assert_relative_eq!(
            green_f(&p, &H0, &[1.0], &[2.0]).unwrap(),
            (1.0 + 2f64.sqrt()).ln(),
            max_relative = 1e-14
        );
        let g = PairGeometry::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            green_f_geometry(&p, &g).unwrap(),
            2f64.ln(),
            max_relative = 1e-14
        );

        let p3 = params(3, 1.0, 1.0);
        let g = PairGeometry::new(50.0, 60.0, 1.0).unwrap();
        assert_relative_eq!(
            green_f_geometry(&p3, &g).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert!(matches!(
            green_f(&p3, &H0, &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]),
            Err(Error::Singular(_))
        ));

        let p15 = params(1, 1.5, 1.0);
        let g = PairGeometry::new(1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(
            green_f_geometry(&p15, &g).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        // d = 1 < α stays finite on the diagonal.
        let g = PairGeometry::new(1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(
            green_f_geometry(&p15, &g).unwrap(),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn green_f_log_form_small_weight() {
        // (1/a) log(1 + a s) → s as a → 0; no overflow of the 1/a power.
        let p = params(1, 1.0, 1e-12);
        let g = PairGeometry::new(1.0, 1.0, 1.0).unwrap();
        let phi1 = phi_unchecked(1.0, 1e-12, 1.0);
        assert_relative_eq!(
            green_f_geometry(&p, &g).unwrap(),
            phi1 * phi1,
            max_relative = 1e-9
        );
    }

    #[test]
    fn green_g_cases() {
        let g = PairGeometry::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(green_g_geometry(&params(3, 1.0, 1.0), &g).unwrap(), 1.0);
        assert_relative_eq!(
            green_g_geometry(&params(2, 1.0, 1.0), &g).unwrap(),
            2f64.ln(),
            max_relative = 1e-14
        );
        let g4 = PairGeometry::new(4.0, 4.0, 1.0).unwrap();
        assert_relative_eq!(green_g_geometry(&params(1, 0.5, 1.0), &g4).unwrap(), 1.0);
        let g = PairGeometry::new(1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(green_g_geometry(&params(1, 1.5, 1.0), &g).unwrap(), 1.0);
        assert_relative_eq!(
            green_g_geometry(&params(1, 1.0, 1.0), &g).unwrap(),
            2f64.ln(),
            max_relative = 1e-14
        );
        assert!(matches!(
            green_g(
                &params(3, 1.0, 1.0),
                &H0,
                &[0.0, 0.0, 1.0],
                &[0.0, 0.0, 1.0]
            ),
            Err(Error::Singular(_))
        ));
    }
}
