//! Adaptive Gauss–Kronrod integration and the time-integral checks built on it.
//!
//! The integrator bisects the interval with the largest error estimate (a
//! global heap over all segments) using the 10/21-point Gauss–Kronrod pair.
//! Integrands here are products of powers, minima and exponentials, so every
//! caller passes the locations of the kinks it knows about, maps infinite
//! ranges with `u = 1/t` and removes known endpoint power laws by substitution.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::envelopes::{
    boundary_factor, green_f_geometry, green_g_geometry, phi_unchecked, q_form_geometry,
    PairGeometry,
};
use crate::error::{invalid, Error, Result};
use crate::model::{Domain, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    fn zero(evaluations: usize) -> Self {
        Self {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: evaluations.max(1),
        }
    }
}

/// Stopping rule: `error ≤ max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 1e-300,
            max_intervals: 20_000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-10)
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_226,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One 21-point Kronrod rule on `[a, b]`: `(value, error)`.
fn gk21(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

struct Piece {
    seg: usize,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// A finite integration segment with its own (possibly transformed) integrand.
pub struct Segment<'a> {
    pub f: Box<dyn Fn(f64) -> f64 + 'a>,
    pub a: f64,
    pub b: f64,
}

impl<'a> Segment<'a> {
    pub fn new(f: impl Fn(f64) -> f64 + 'a, a: f64, b: f64) -> Self {
        Self {
            f: Box::new(f),
            a,
            b,
        }
    }
}

/// Global adaptive integration of the sum of several segments.
pub fn integrate_segments(segments: &[Segment<'_>], tol: Tolerance) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Piece> = Vec::new();
    let mut evaluations = 0usize;
    for (i, s) in segments.iter().enumerate() {
        if s.a == s.b {
            continue;
        }
        let (value, err) = gk21(&*s.f, s.a, s.b);
        evaluations += 21;
        heap.push(Piece {
            seg: i,
            a: s.a,
            b: s.b,
            value,
            err,
        });
    }
    let totals = |heap: &BinaryHeap<Piece>, frozen: &[Piece]| {
        heap.iter()
            .chain(frozen.iter())
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
    };
    let mut intervals = heap.len();
    let (mut value, mut err) = totals(&heap, &frozen);
    let mut step = 0usize;
    loop {
        step += 1;
        if step % 64 == 0 {
            (value, err) = totals(&heap, &frozen);
        }
        if !value.is_finite() || !err.is_finite() {
            return Err(Error::NonConvergence {
                value,
                abs_error: err,
                evaluations,
                reason: "non-finite integrand values".into(),
            });
        }
        if err <= tol.abs.max(tol.rel * value.abs()) {
            (value, err) = totals(&heap, &frozen);
            if err <= tol.abs.max(tol.rel * value.abs()) {
                return Ok(QuadratureResult {
                    value,
                    abs_error_estimate: err,
                    evaluations: evaluations.max(1),
                });
            }
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::NonConvergence {
                value,
                abs_error: err,
                evaluations,
                reason: "all remaining intervals at roundoff width".into(),
            });
        };
        if intervals >= tol.max_intervals {
            heap.push(worst);
            let (value, err) = totals(&heap, &frozen);
            return Err(Error::NonConvergence {
                value,
                abs_error: err,
                evaluations,
                reason: format!("interval limit {} reached", tol.max_intervals),
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if mid <= worst.a.min(worst.b)
            || mid >= worst.a.max(worst.b)
            || width <= 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs())
        {
            frozen.push(worst);
            continue;
        }
        let f = &*segments[worst.seg].f;
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        evaluations += 42;
        intervals += 1;
        value += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Piece {
            seg: worst.seg,
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Piece {
            seg: worst.seg,
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
}

/// `∫_a^b f` with interior breakpoints.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<QuadratureResult> {
    let pts = sorted_points(a, b, breakpoints);
    let segs: Vec<Segment<'_>> = pts
        .windows(2)
        .map(|w| Segment::new(&f, w[0], w[1]))
        .collect();
    integrate_segments(&segs, tol)
}

/// `a`, the breakpoints strictly inside `(a, b)`, and `b`, sorted and deduplicated.
fn sorted_points(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    pts.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|&p| p > a && p < b && p.is_finite()),
    );
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Segment for `∫_a^b f(t) dt` where `f(t) ~ (t − a)^β` near `a`, `β > −1`.
///
/// Substitutes `t = a + (b − a) w^k` with `k = 1/(1 + β)`, which turns the
/// leading power into a constant.
pub fn left_power_segment<'a>(
    f: impl Fn(f64) -> f64 + 'a,
    a: f64,
    b: f64,
    beta: f64,
) -> Segment<'a> {
    let k = 1.0 / (1.0 + beta);
    let len = b - a;
    Segment::new(
        move |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let wk1 = w.powf(k - 1.0);
            let t = a + len * w * wk1;
            if t == a {
                return 0.0;
            }
            f(t) * len * k * wk1
        },
        0.0,
        1.0,
    )
}

/// Segment for `∫_a^b g(b − t) dt` where `g(s) ~ s^β` as `s → 0`, `β > −1`.
///
/// The integrand receives the distance to the right endpoint, so values
/// within rounding distance of `b` stay resolved.
pub fn right_power_segment<'a>(
    g: impl Fn(f64) -> f64 + 'a,
    a: f64,
    b: f64,
    beta: f64,
) -> Segment<'a> {
    let k = 1.0 / (1.0 + beta);
    let len = b - a;
    Segment::new(
        move |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let wk1 = w.powf(k - 1.0);
            g(len * w * wk1) * len * k * wk1
        },
        0.0,
        1.0,
    )
}

/// Segment for `∫_a^∞ f(t) dt`, `a > 0`, mapped by `w = 1/t`.
pub fn tail_segment<'a>(f: impl Fn(f64) -> f64 + 'a, a: f64) -> Segment<'a> {
    Segment::new(
        move |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            f(1.0 / w) / (w * w)
        },
        0.0,
        1.0 / a,
    )
}

/// `∫_0^∞ f` for positive integrands that are a pure power `u^β` (β > −1)
/// below the smallest kink and decay faster than `u^{-1}` above the largest.
///
/// Between consecutive kinks, extra geometric breakpoints (ratio 4) keep
/// every bisection tree shallow when kinks span many decades.
pub fn integrate_half_line(
    f: &dyn Fn(f64) -> f64,
    kinks: &[f64],
    left_power: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    let mut pts: Vec<f64> = kinks
        .iter()
        .copied()
        .filter(|k| *k > 0.0 && k.is_finite())
        .collect();
    if pts.is_empty() {
        pts.push(1.0);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pts = geometric_fill(&pts, 4.0);
    let first = pts[0];
    let last = *pts.last().unwrap();
    let mut segs = vec![left_power_segment(f, 0.0, first, left_power)];
    for w in pts.windows(2) {
        segs.push(Segment::new(f, w[0], w[1]));
    }
    segs.push(tail_segment(f, last));
    integrate_segments(&segs, tol)
}

/// Sorted positive points with geometric fill-ins so consecutive ratios are ≤ `ratio`.
fn geometric_fill(pts: &[f64], ratio: f64) -> Vec<f64> {
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let n = ((w[1] / w[0]).ln() / ratio.ln()).ceil().max(1.0) as usize;
        let step = (w[1] / w[0]).powf(1.0 / n as f64);
        let mut p = w[0];
        for _ in 1..n {
            p *= step;
            out.push(p);
        }
        out.push(w[1]);
    }
    out
}

/// Relative accuracy targeted by the time-integral checks.
pub const LEMMA_TOLERANCE: Tolerance = Tolerance::relative(1e-9);

/// `∫_0^∞ q^a_D(t,x,y) dt` from distances, via `u = |x−y|^α / t`.
///
/// In `u` the integrand is `q(r^α/u) r^α / u²`; it is a pure power
/// `u^{d/α − 1}` near 0, decays like `u^{-3}`, and has kinks at `u = a^α`
/// (stable form) and `u = r^α/φ_a(δ)²` (boundary factors). The range is split
/// at `u = 1` as well.
pub fn integrate_q_over_time_geometry(
    params: &ModelParams,
    g: &PairGeometry,
) -> Result<QuadratureResult> {
    let (alpha, a) = (params.alpha, params.weight);
    if !(a > 0.0) {
        return invalid("q integral needs a > 0");
    }
    let r = g.separation;
    if !(r > 0.0) {
        return invalid("q integral needs x != y");
    }
    let ra = r.powf(alpha);
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let t = ra / u;
        q_form_geometry(params, t, g) * ra / (u * u)
    };
    if g.delta_x == 0.0 || g.delta_y == 0.0 {
        let _ = f(1.0);
        return Ok(QuadratureResult::zero(1));
    }
    let px = phi_unchecked(alpha, a, g.delta_x);
    let py = phi_unchecked(alpha, a, g.delta_y);
    let kinks = [1.0, a.powf(alpha), ra / (px * px), ra / (py * py)];
    integrate_half_line(&f, &kinks, params.dim as f64 / alpha - 1.0, LEMMA_TOLERANCE)
}

pub fn integrate_q_over_time(
    params: &ModelParams,
    domain: &Domain,
    x: &[f64],
    y: &[f64],
) -> Result<QuadratureResult> {
    let g = PairGeometry::of(params, domain, x, y)?;
    integrate_q_over_time_geometry(params, &g)
}

fn check_short_range(params: &ModelParams, g: &PairGeometry) -> Result<(f64, f64)> {
    if !(params.weight > 0.0) {
        return invalid("needs a > 0");
    }
    let (t_star, r_star) = params.regime_thresholds()?;
    if !(g.separation > 0.0) {
        return invalid("needs x != y");
    }
    if g.separation > r_star * (1.0 + 1e-12) {
        return invalid(format!(
            "separation {} exceeds r_star = {r_star}",
            g.separation
        ));
    }
    Ok((t_star, r_star))
}

/// Short-time part: `∫_0^{t_star} (1∧δx/√t)(1∧δy/√t)[t^{−d/2}e^{−c r²/t} + (a^α t/r^{d+α} ∧ t^{−d/2})] dt`.
///
/// Integrated in `u = r²/t` over `[r²/t_star, ∞)`.
pub fn integrate_i_geometry(
    params: &ModelParams,
    c: f64,
    g: &PairGeometry,
) -> Result<QuadratureResult> {
    if !(c > 0.0) {
        return invalid("exponent constant c must be > 0");
    }
    let (t_star, _) = check_short_range(params, g)?;
    if g.delta_x == 0.0 || g.delta_y == 0.0 {
        return Ok(QuadratureResult::zero(1));
    }
    let d = params.dim as f64;
    let aa = params.weight.powf(params.alpha);
    let r = g.separation;
    let r2 = r * r;
    let rda = r.powf(d + params.alpha);
    let integrand_t = |t: f64| {
        let b = boundary_factor(g.delta_x, t) * boundary_factor(g.delta_y, t);
        let base = t.powf(-d / 2.0);
        b * (base * (-c * r2 / t).exp() + (aa * t / rda).min(base))
    };
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        integrand_t(r2 / u) * r2 / (u * u)
    };
    let u0 = r2 / t_star;
    let t_cross = (rda / aa).powf(1.0 / (1.0 + d / 2.0));
    let mut kinks: Vec<f64> = [
        r2 / (g.delta_x * g.delta_x),
        r2 / (g.delta_y * g.delta_y),
        r2 / t_cross,
        1.0 / c,
        4.0 / c,
        16.0 / c,
        64.0 / c,
    ]
    .into_iter()
    .filter(|&u| u > u0)
    .collect();
    kinks.push(u0);
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let pts = geometric_fill(&kinks, 4.0);
    let mut segs: Vec<Segment<'_>> = pts
        .windows(2)
        .map(|w| Segment::new(&f, w[0], w[1]))
        .collect();
    segs.push(tail_segment(&f, *pts.last().unwrap()));
    integrate_segments(&segs, LEMMA_TOLERANCE)
}

pub fn integrate_i(
    params: &ModelParams,
    domain: &Domain,
    c: f64,
    x: &[f64],
    y: &[f64],
) -> Result<QuadratureResult> {
    let g = PairGeometry::of(params, domain, x, y)?;
    integrate_i_geometry(params, c, &g)
}

/// Closed-form comparison shape for the short-time part, by dimension.
pub fn closed_i(params: &ModelParams, g: &PairGeometry) -> Result<f64> {
    let (t_star, r_star) = params.regime_thresholds()?;
    let r = g.separation;
    let prod = g.delta_x * g.delta_y;
    Ok(match params.dim {
        1 => r_star.min(prod.sqrt()).min(prod / r),
        2 => (t_star.min(prod) / (r * r)).ln_1p(),
        d => r.powf(2.0 - d as f64) * (prod / (r * r)).min(1.0),
    })
}

/// Long-time part: `∫_{t_star}^∞ q^a_D(t,x,y) dt`, integrated in `u = r^α/t` over `(0, r^α/t_star]`.
pub fn integrate_j_geometry(params: &ModelParams, g: &PairGeometry) -> Result<QuadratureResult> {
    let (t_star, _) = check_short_range(params, g)?;
    if g.delta_x == 0.0 || g.delta_y == 0.0 {
        return Ok(QuadratureResult::zero(1));
    }
    let (alpha, a) = (params.alpha, params.weight);
    let ra = g.separation.powf(alpha);
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        q_form_geometry(params, ra / u, g) * ra / (u * u)
    };
    let top = ra / t_star;
    let px = phi_unchecked(alpha, a, g.delta_x);
    let py = phi_unchecked(alpha, a, g.delta_y);
    let mut kinks: Vec<f64> = [a.powf(alpha), ra / (px * px), ra / (py * py)]
        .into_iter()
        .filter(|&u| u > 0.0 && u < top)
        .collect();
    kinks.push(top);
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let pts = geometric_fill(&kinks, 4.0);
    let mut segs = vec![left_power_segment(
        &f,
        0.0,
        pts[0],
        params.dim as f64 / alpha - 1.0,
    )];
    for w in pts.windows(2) {
        segs.push(Segment::new(&f, w[0], w[1]));
    }
    integrate_segments(&segs, LEMMA_TOLERANCE)
}

pub fn integrate_j(
    params: &ModelParams,
    domain: &Domain,
    x: &[f64],
    y: &[f64],
) -> Result<QuadratureResult> {
    let g = PairGeometry::of(params, domain, x, y)?;
    integrate_j_geometry(params, &g)
}

/// Bound shape `1 ∧ δxδy/r²` for the long-time part in `d ≥ 2`.
pub fn j_bound_shape(g: &PairGeometry) -> f64 {
    (g.delta_x * g.delta_y / (g.separation * g.separation)).min(1.0)
}

/// `I + J` in `d = 1` together with `g^a_D`, the form it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenSplit {
    pub short_time: QuadratureResult,
    pub long_time: QuadratureResult,
    pub green_g: f64,
}

impl GreenSplit {
    pub fn total(&self) -> f64 {
        self.short_time.value + self.long_time.value
    }

    pub fn ratio(&self) -> f64 {
        self.total() / self.green_g
    }
}

pub fn green_split_geometry(params: &ModelParams, c: f64, g: &PairGeometry) -> Result<GreenSplit> {
    Ok(GreenSplit {
        short_time: integrate_i_geometry(params, c, g)?,
        long_time: integrate_j_geometry(params, g)?,
        green_g: green_g_geometry(params, g)?,
    })
}

/// Ratio of `∫q dt` to `f^a_D`, the quantity whose band is checked.
pub fn q_integral_ratio(params: &ModelParams, g: &PairGeometry) -> Result<(QuadratureResult, f64)> {
    let q = integrate_q_over_time_geometry(params, g)?;
    let f = green_f_geometry(params, g)?;
    Ok((q, q.value / f))
}

/// `1 ∧ r^{α/2 − 1}`: equal to 1 on `[0, 1]`.
pub fn v_envelope(alpha: f64, r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else {
        r.powf(0.5 * alpha - 1.0)
    }
}

/// `∫_0^{x∧y} v(z) v(z + |x − y|) dz` with `v` replaced by [`v_envelope`].
pub fn green_halfline_envelope(alpha: f64, x: f64, y: f64) -> Result<QuadratureResult> {
    green_halfline_with(alpha, x, y, LEMMA_TOLERANCE)
}

fn green_halfline_with(alpha: f64, x: f64, y: f64, tol: Tolerance) -> Result<QuadratureResult> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return invalid("alpha must lie in (0, 2)");
    }
    if !(x >= 0.0 && y >= 0.0) {
        return invalid("half-line Green function needs x, y >= 0");
    }
    let m = x.min(y);
    let s = (x - y).abs();
    if m == 0.0 {
        return Ok(QuadratureResult::zero(1));
    }
    integrate(
        |z| v_envelope(alpha, z) * v_envelope(alpha, z + s),
        0.0,
        m,
        &[1.0, 1.0 - s],
        tol,
    )
}

/// Result of comparing `∫_0^r G_(0,r)(x,y) dy` (through its envelope surrogate)
/// with `(r ∧ r^{α/2})((x ∧ x^{α/2}) ∧ ((r−x) ∧ (r−x)^{α/2}))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalGreenCheck {
    pub lhs_envelope: f64,
    pub rhs_shape: f64,
    pub abs_error_estimate: f64,
}

impl IntervalGreenCheck {
    pub fn ratio(&self) -> f64 {
        self.lhs_envelope / self.rhs_shape
    }
}

fn power_min(alpha: f64, s: f64) -> f64 {
    s.min(s.powf(alpha / 2.0))
}

/// Upper surrogate for the interval Green mass.
///
/// `G_(0,r)(x,y)` is dominated by the half-line Green function seen from
/// either end, so `∫_0^r G_(0,r)(x,y) dy ≤ min(L(x), L(r − x))` with
/// `L(x) = ∫_0^r G_(0,∞)(x,y) dy`. Each `L` is a nested quadrature of
/// [`green_halfline_envelope`].
pub fn check_prop21(alpha: f64, r: f64, x: f64) -> Result<IntervalGreenCheck> {
    if !(r > 0.0 && x > 0.0 && x < r) {
        return invalid(format!("need 0 < x < r, got x = {x}, r = {r}"));
    }
    let inner = Tolerance::relative(1e-12);
    let mass = |x0: f64| -> Result<QuadratureResult> {
        let failure = std::cell::RefCell::new(None);
        let res = integrate(
            |y| match green_halfline_with(alpha, x0, y, inner) {
                Ok(q) => q.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            r,
            &[x0, 1.0, x0 - 1.0, x0 + 1.0],
            Tolerance::relative(1e-10),
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(res),
        }
    };
    let left = mass(x)?;
    let right = mass(r - x)?;
    let best = if left.value <= right.value {
        left
    } else {
        right
    };
    let rhs_shape = power_min(alpha, r) * power_min(alpha, x).min(power_min(alpha, r - x));
    Ok(IntervalGreenCheck {
        lhs_envelope: best.value,
        rhs_shape,
        abs_error_estimate: best.abs_error_estimate,
    })
}
