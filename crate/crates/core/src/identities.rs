//! Exact identities and inequalities: weight scaling, the φ-sandwich, regime
//! classification and the fractional power constant `Λ(α, p)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelopes::{
    h_envelope, phi_unchecked, q_form, stable_constant, stable_form, PairGeometry,
};
use crate::error::{invalid, Result};
use crate::model::{Domain, ModelParams};
use crate::quadrature::{
    integrate_segments, left_power_segment, right_power_segment, QuadratureResult, Segment,
    Tolerance,
};
use crate::rng::{chunk_ranges, substream, CHUNK};
use crate::special::{beta, sphere_area};

const TINY: f64 = 1e-300;

fn rel_error(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(TINY)
}

fn require_weight(params: &ModelParams) -> Result<()> {
    if params.weight > 0.0 {
        Ok(())
    } else {
        invalid("scaling identities need a > 0")
    }
}

/// `a^{α/(2−α)}`, the length factor taking weight `a` to weight 1.
fn length_factor(params: &ModelParams) -> Result<f64> {
    require_weight(params)?;
    params.unit_weight_scale()
}

/// Compares `q^a_D(a^{−2α/(2−α)} s, x, y)` with `a^{αd/(2−α)} q^1_{D_a}(s, x_a, y_a)`
/// where `x_a = a^{α/(2−α)} x` and `D_a` is `D` scaled by the same factor.
pub fn check_scaling_q(
    params: &ModelParams,
    domain: &Domain,
    s: f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    if !(s > 0.0) {
        return invalid("s must be > 0");
    }
    let k = length_factor(params)?;
    let (alpha, a) = (params.alpha, params.weight);
    let lhs = q_form(
        params,
        domain,
        a.powf(-2.0 * alpha / (2.0 - alpha)) * s,
        x,
        y,
    )?;
    let unit = params.with_weight(1.0)?;
    let xa: Vec<f64> = x.iter().map(|c| k * c).collect();
    let ya: Vec<f64> = y.iter().map(|c| k * c).collect();
    let rhs = a.powf(alpha * params.dim as f64 / (2.0 - alpha))
        * q_form(&unit, &domain.scaled(k), s, &xa, &ya)?;
    Ok(rel_error(lhs, rhs))
}

/// Compares `φ_a(δ_D(x))` with `a^{−α/(2−α)} φ_1(δ_{D_a}(x_a))`.
pub fn check_scaling_phi(params: &ModelParams, domain: &Domain, x: &[f64]) -> Result<f64> {
    let k = length_factor(params)?;
    params.check_point(x)?;
    if !domain.in_closure(x) {
        return Err(crate::Error::OutsideDomain { point: x.to_vec() });
    }
    let lhs = phi_unchecked(params.alpha, params.weight, domain.delta(x));
    let xa: Vec<f64> = x.iter().map(|c| k * c).collect();
    let rhs = phi_unchecked(params.alpha, 1.0, domain.scaled(k).delta(&xa)) / k;
    Ok(rel_error(lhs, rhs))
}

/// Compares `h^{aλ^{(α−2)/α}}_C(t, r)` with `λ^{−d} h^a_C(λ^{−2} t, λ^{−1} r)`.
pub fn check_free_scaling(params: &ModelParams, lam: f64, t: f64, r: f64, c: f64) -> Result<f64> {
    require_weight(params)?;
    if !(lam > 0.0) {
        return invalid("lambda must be > 0");
    }
    let alpha = params.alpha;
    let moved = params.with_weight(params.weight * lam.powf((alpha - 2.0) / alpha))?;
    let lhs = h_envelope(&moved, c, t, r)?;
    let rhs = lam.powi(-(params.dim as i32)) * h_envelope(params, c, t / (lam * lam), r / lam)?;
    Ok(rel_error(lhs, rhs))
}

/// The three members of the φ-sandwich chain `lower ≤ middle ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower <= self.middle && self.middle <= self.upper
    }
}

/// `½(1 ∧ r²φ(δx)φ(δy)/sep^α) ≤ (1 ∧ rφ(δx)/sep^{α/2})(1 ∧ rφ(δy)/sep^{α/2}) ≤ 1 ∧ r²φ(δx)φ(δy)/sep^α`
/// with `φ = φ_1`.
///
/// The upper bound is formed as the product of the two unclipped factors, so
/// the middle and upper members coincide bit for bit when neither is clipped.
pub fn phi_sandwich(
    r_scale: f64,
    delta_x: f64,
    delta_y: f64,
    sep: f64,
    alpha: f64,
) -> Result<Sandwich> {
    if !(r_scale > 0.0 && r_scale <= 1.0) {
        return invalid(format!("r must lie in (0, 1], got {r_scale}"));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return invalid(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    if !(sep > 0.0) || !(delta_x >= 0.0) || !(delta_y >= 0.0) {
        return invalid("need sep > 0 and non-negative distances");
    }
    if (delta_x - delta_y).abs() > sep {
        return invalid(format!(
            "inconsistent geometry: |{delta_x} - {delta_y}| exceeds separation {sep}"
        ));
    }
    let scale = sep.powf(alpha / 2.0);
    let fx = r_scale * phi_unchecked(alpha, 1.0, delta_x) / scale;
    let fy = r_scale * phi_unchecked(alpha, 1.0, delta_y) / scale;
    let upper = (fx * fy).min(1.0);
    Ok(Sandwich {
        lower: 0.5 * upper,
        middle: fx.min(1.0) * fy.min(1.0),
        upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    StableComparable,
    Mixed,
}

/// `StableComparable` iff `t ≥ c1·t_star` or `r ≥ r_star`.
pub fn regime_classify(params: &ModelParams, t: f64, r: f64, c1: f64) -> Result<Regime> {
    require_weight(params)?;
    if !(t > 0.0) || !(r >= 0.0) || !(c1 > 0.0) {
        return invalid("need t > 0, r >= 0, c1 > 0");
    }
    let (t_star, r_star) = params.regime_thresholds()?;
    Ok(if t >= c1 * t_star || r >= r_star {
        Regime::StableComparable
    } else {
        Regime::Mixed
    })
}

/// Observed range of `h^a_C / stable_form` over the stable-comparable region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

impl Band {
    /// Smallest `c2` with the band inside `[1/c2, c2]`.
    pub fn constant(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }

    fn merge(self, other: Self) -> Self {
        Self {
            min_ratio: self.min_ratio.min(other.min_ratio),
            max_ratio: self.max_ratio.max(other.max_ratio),
            samples: self.samples + other.samples,
        }
    }

    const EMPTY: Band = Band {
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        samples: 0,
    };
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// `(t, r)` in units of `(t_star, r_star)`, drawn log-uniformly from three
/// boxes whose union covers the stable-comparable region: both coordinates
/// above threshold, only `t` above, only `r` above.
fn comparable_sample<R: Rng>(rng: &mut R, c1: f64, i: usize) -> (f64, f64) {
    match i % 3 {
        0 => (log_uniform(rng, c1, c1 * 1e4), log_uniform(rng, 1.0, 1e3)),
        1 => (log_uniform(rng, c1, c1 * 1e4), log_uniform(rng, 1e-3, 1.0)),
        _ => (log_uniform(rng, c1 * 1e-4, c1), log_uniform(rng, 1.0, 1e3)),
    }
}

/// Band of `h^a_C(t, r) / stable_form(t, r)` over `samples` random points of
/// the stable-comparable region. Deterministic in `seed` whatever the thread count.
pub fn check_prop12_band(
    params: &ModelParams,
    c: f64,
    c1: f64,
    samples: usize,
    seed: u64,
) -> Result<Band> {
    require_weight(params)?;
    if !(c > 0.0 && c1 > 0.0) || samples == 0 {
        return invalid("need C > 0, c1 > 0 and at least one sample");
    }
    let (t_star, r_star) = params.regime_thresholds()?;
    let bands: Result<Vec<Band>> = chunk_ranges(samples, CHUNK)
        .into_par_iter()
        .map(|(stream, range)| {
            let mut rng = substream(seed, stream);
            let mut band = Band::EMPTY;
            for i in range {
                let (tu, ru) = comparable_sample(&mut rng, c1, i);
                let (t, r) = (tu * t_star, ru * r_star);
                let ratio = h_envelope(params, c, t, r)? / stable_form(params, t, r)?;
                band = band.merge(Band {
                    min_ratio: ratio,
                    max_ratio: ratio,
                    samples: 1,
                });
            }
            Ok(band)
        })
        .collect();
    Ok(bands?.into_iter().fold(Band::EMPTY, Band::merge))
}

/// `∫_{|y|=1, y_d ≥ 0} y_d^α m(dy)` against unnormalised surface measure; 1 in `d = 1`.
///
/// In `d ≥ 2` this reduces to `|S^{d−2}| ∫_0^{π/2} cos^α θ sin^{d−2} θ dθ`,
/// evaluated by quadrature.
pub fn hemisphere_moment(d: usize, alpha: f64) -> Result<f64> {
    if d == 0 || !(alpha > 0.0) {
        return invalid("need d >= 1 and alpha > 0");
    }
    if d == 1 {
        return Ok(1.0);
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let k = (d - 2) as i32;
    let segs = [
        left_power_segment(
            move |th: f64| th.cos().powf(alpha) * th.sin().powi(k),
            0.0,
            0.25 * std::f64::consts::PI,
            k as f64,
        ),
        right_power_segment(
            move |s: f64| s.sin().powf(alpha) * s.cos().powi(k),
            0.25 * std::f64::consts::PI,
            half_pi,
            alpha,
        ),
    ];
    let angular = integrate_segments(&segs, Tolerance::relative(1e-13))?;
    Ok(sphere_area(d - 1) * angular.value)
}

/// Closed form `|S^{d−2}| B((α+1)/2, (d−1)/2) / 2` of [`hemisphere_moment`] for `d ≥ 2`.
pub fn hemisphere_moment_closed(d: usize, alpha: f64) -> f64 {
    if d == 1 {
        return 1.0;
    }
    sphere_area(d - 1) * 0.5 * beta((alpha + 1.0) / 2.0, (d as f64 - 1.0) / 2.0)
}

/// `∫_0^1 (t^{α−p−1} − t^{p−1}) (1 − t)^{−α} dt`.
pub fn lambda_integral(alpha: f64, p: f64) -> Result<QuadratureResult> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return invalid(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    if !(p > 0.0 && p < alpha) {
        return invalid(format!("p must lie in (0, alpha) = (0, {alpha}), got {p}"));
    }
    let gap = alpha - 2.0 * p;
    if gap == 0.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }
    // On the left half each power t^e is peeled off and integrated exactly,
    // leaving t^e((1 − t)^{−α} − 1) ~ α t^{e+1}; on the right half the two
    // powers are combined as t^{p−1}(t^{α−2p} − 1) to keep the difference
    // accurate near t = 1.
    let bump = move |t: f64| (-alpha * (-t).ln_1p()).exp_m1();
    let (ea, eb) = (alpha - p - 1.0, p - 1.0);
    let left_a = move |t: f64| t.powf(ea) * bump(t);
    let left_b = move |t: f64| -t.powf(eb) * bump(t);
    let right = move |s: f64| {
        let t = 1.0 - s;
        t.powf(p - 1.0) * (gap * (-s).ln_1p()).exp_m1() * s.powf(-alpha)
    };
    let (pa, pb) = (0.5f64.powf(alpha - p) / (alpha - p), 0.5f64.powf(p) / p);
    let exact = pa - pb;
    let segs = [
        left_power_segment(left_a, 0.0, 0.5, ea + 1.0),
        left_power_segment(left_b, 0.0, 0.5, eb + 1.0),
        right_power_segment(right, 0.5, 1.0, 1.0 - alpha),
    ];
    let tol = Tolerance {
        abs: 1e-14 * (pa + pb),
        ..Tolerance::relative(1e-12)
    };
    let mut q = integrate_segments(&segs, tol)?;
    q.value += exact;
    q.abs_error_estimate += 4.0 * f64::EPSILON * exact.abs();
    Ok(q)
}

/// `Λ(α, p) = p 𝒜(d, α)/α · ∫_0^1 (t^{α−p−1} − t^{p−1})(1 − t)^{−α} dt · ∫_{y_d ≥ 0} y_d^α m(dy)`.
///
/// The coefficient is `𝒜(d, α)`, the constant of the `α/2`-fractional
/// Laplacian; [`check_power_identity`] confirms this normalisation in `d = 1`.
pub fn lambda_constant(d: usize, alpha: f64, p: f64) -> Result<f64> {
    let integral = lambda_integral(alpha, p)?.value;
    if integral == 0.0 {
        return Ok(0.0);
    }
    Ok(p * stable_constant(d, alpha)? / alpha * integral * hemisphere_moment(d, alpha)?)
}

/// Fractional Laplacian of `(x^+)^p` at a point versus `Λ(α, p) x^{p−α}` in `d = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerIdentityCheck {
    pub principal_value: f64,
    pub predicted: f64,
    pub quadrature_error: f64,
}

impl PowerIdentityCheck {
    /// Relative discrepancy; absolute when the prediction is exactly zero.
    pub fn error(&self) -> f64 {
        let diff = (self.principal_value - self.predicted).abs();
        if self.predicted == 0.0 {
            diff
        } else {
            diff / self.principal_value.abs().max(self.predicted.abs())
        }
    }
}

/// Even part of the binomial series: `(x+h)^p + (x−h)^p − 2x^p` for `h ≪ x`.
fn second_difference_series(p: f64, x: f64, h: f64) -> f64 {
    let ratio = (h / x) * (h / x);
    let mut coef = 1.0;
    let mut k = 0.0;
    let mut term_pow = 1.0;
    let mut sum = 0.0;
    for _ in 0..12 {
        coef *= (p - k) * (p - k - 1.0) / ((k + 1.0) * (k + 2.0));
        k += 2.0;
        term_pow *= ratio;
        sum += coef * term_pow;
    }
    2.0 * x.powf(p) * sum
}

/// Principal value `𝒜(1, α) p.v.∫ ((y^+)^p − x^p) |y − x|^{−1−α} dy` at `x = xd`,
/// written as the symmetric second difference
/// `𝒜 ∫_0^∞ (u(x+h) + u(x−h) − 2u(x)) h^{−1−α} dh`.
///
/// The range `h < x` uses the binomial series near 0 and an endpoint
/// substitution at `h = x`; the range `h > x` is mapped by `h = x/w` and the
/// constant part integrated analytically.
pub fn check_power_identity(alpha: f64, p: f64, xd: f64) -> Result<PowerIdentityCheck> {
    if !(xd > 0.0) {
        return invalid("xd must be > 0");
    }
    let predicted = lambda_constant(1, alpha, p)?;
    let x = xd;
    let small = 0.05 * x;
    let diff = move |h: f64| {
        if h < small {
            second_difference_series(p, x, h)
        } else {
            (x + h).powf(p) + (x - h).max(0.0).powf(p) - 2.0 * x.powf(p)
        }
    };
    let near = move |h: f64| diff(h) * h.powf(-1.0 - alpha);
    let far = move |w: f64| (1.0 + w).powf(p) * w.powf(alpha - p - 1.0);
    let segs = [
        left_power_segment(near, 0.0, small, 1.0 - alpha),
        Segment::new(near, small, 0.5 * x),
        Segment::new(
            move |h: f64| ((x + h).powf(p) - 2.0 * x.powf(p)) * h.powf(-1.0 - alpha),
            0.5 * x,
            x,
        ),
        right_power_segment(
            move |s: f64| s.powf(p) * (x - s).powf(-1.0 - alpha),
            0.5 * x,
            x,
            p,
        ),
        left_power_segment(far, 0.0, 1.0, alpha - p - 1.0),
    ];
    // The first four segments are in h, the last is the dimensionless tail
    // integral; rescale the tail before summing.
    let inner = integrate_segments(&segs[..4], Tolerance::relative(1e-12))?;
    let tail = integrate_segments(&segs[4..], Tolerance::relative(1e-12))?;
    let scale = x.powf(p - alpha);
    let total = inner.value + scale * (tail.value - 2.0 / alpha);
    let a1 = stable_constant(1, alpha)?;
    Ok(PowerIdentityCheck {
        principal_value: a1 * total,
        predicted: predicted * x.powf(p - alpha),
        quadrature_error: a1 * (inner.abs_error_estimate + scale * tail.abs_error_estimate),
    })
}

/// Largest errors observed in a random sweep of the scaling identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSweep {
    pub samples: usize,
    pub q_max: f64,
    pub phi_max: f64,
    pub free_max: f64,
}

impl ScalingSweep {
    fn merge(self, o: Self) -> Self {
        Self {
            samples: self.samples + o.samples,
            q_max: self.q_max.max(o.q_max),
            phi_max: self.phi_max.max(o.phi_max),
            free_max: self.free_max.max(o.free_max),
        }
    }

    const EMPTY: Self = Self {
        samples: 0,
        q_max: 0.0,
        phi_max: 0.0,
        free_max: 0.0,
    };
}

fn random_domain<R: Rng>(rng: &mut R, sinusoidal: bool) -> Domain {
    let floor = rng.random_range(-2.0..2.0);
    if sinusoidal {
        let amp = rng.random_range(0.05..1.0);
        let wavelength = rng.random_range(0.5..5.0);
        Domain::sinusoidal(floor, floor + amp, amp, wavelength).expect("valid domain")
    } else {
        Domain::half_space(floor)
    }
}

fn random_point<R: Rng>(rng: &mut R, d: usize, domain: &Domain) -> Vec<f64> {
    let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
    x[d - 1] = domain.inner_floor() + log_uniform(rng, 1e-3, 10.0);
    x
}

/// Random tuples with `a ∈ [0.1, 10]` (log-uniform), `α ∈ (0.2, 1.8)`,
/// `d ∈ {1, 2, 3}`, half-spaces and sinusoidal domains.
pub fn sweep_scaling(samples: usize, seed: u64) -> Result<ScalingSweep> {
    let parts: Result<Vec<ScalingSweep>> = chunk_ranges(samples, CHUNK)
        .into_par_iter()
        .map(|(stream, range)| {
            let mut rng = substream(seed, stream);
            let mut acc = ScalingSweep::EMPTY;
            for i in range {
                let d = rng.random_range(1..=3usize);
                let alpha = rng.random_range(0.2..1.8);
                let a = log_uniform(&mut rng, 0.1, 10.0);
                let params = ModelParams::new(d, alpha, a)?;
                let domain = random_domain(&mut rng, i % 4 == 3);
                let x = random_point(&mut rng, d, &domain);
                let y = random_point(&mut rng, d, &domain);
                let s = log_uniform(&mut rng, 1e-3, 1e3);
                let lam = log_uniform(&mut rng, 1e-2, 1e2);
                let t = log_uniform(&mut rng, 1e-3, 1e3);
                let r = log_uniform(&mut rng, 1e-3, 1e2);
                let c = rng.random_range(0.1..4.0);
                acc = acc.merge(ScalingSweep {
                    samples: 1,
                    q_max: check_scaling_q(&params, &domain, s, &x, &y)?,
                    phi_max: check_scaling_phi(&params, &domain, &x)?,
                    free_max: check_free_scaling(&params, lam, t, r, c)?,
                });
            }
            Ok(acc)
        })
        .collect();
    Ok(parts?
        .into_iter()
        .fold(ScalingSweep::EMPTY, ScalingSweep::merge))
}

/// Outcome of checking the φ-sandwich on random consistent samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichSweep {
    pub samples: usize,
    pub violations: usize,
}

/// Draws `δx`, `sep` and then `δy ∈ [max(0, δx − sep), δx + sep]`, which is
/// exactly the set of distances realisable by two points at distance `sep`.
pub fn sweep_sandwich(samples: usize, seed: u64) -> Result<SandwichSweep> {
    let parts: Result<Vec<SandwichSweep>> = chunk_ranges(samples, CHUNK)
        .into_par_iter()
        .map(|(stream, range)| {
            let mut rng = substream(seed, stream);
            let mut bad = 0;
            let n = range.len();
            for i in range {
                let alpha = rng.random_range(0.01..1.99);
                let r = if i % 10 == 0 {
                    1.0
                } else {
                    rng.random_range(1e-3..=1.0)
                };
                let sep = log_uniform(&mut rng, 1e-4, 1e4);
                let dx = if i % 17 == 0 {
                    0.0
                } else {
                    log_uniform(&mut rng, 1e-5, 1e5)
                };
                let lo = (dx - sep).max(0.0);
                let mut dy = match i % 5 {
                    0 => lo,
                    1 => dx + sep,
                    _ => rng.random_range(lo..=dx + sep),
                };
                // Rounding in `dx ± sep` can leave the pair a few ulps inconsistent.
                for _ in 0..8 {
                    if (dx - dy).abs() <= sep {
                        break;
                    }
                    dy = dx + (dy - dx) * (1.0 - 4.0 * f64::EPSILON);
                }
                if (dx - dy).abs() > sep {
                    dy = dx;
                }
                if !phi_sandwich(r, dx, dy, sep, alpha)?.holds() {
                    bad += 1;
                }
            }
            Ok(SandwichSweep {
                samples: n,
                violations: bad,
            })
        })
        .collect();
    Ok(parts?.into_iter().fold(
        SandwichSweep {
            samples: 0,
            violations: 0,
        },
        |a, b| SandwichSweep {
            samples: a.samples + b.samples,
            violations: a.violations + b.violations,
        },
    ))
}

/// Geometry of a pair used only for sandwich reporting.
pub fn sandwich_for(alpha: f64, r_scale: f64, g: &PairGeometry) -> Result<Sandwich> {
    phi_sandwich(r_scale, g.delta_x, g.delta_y, g.separation, alpha)
}
