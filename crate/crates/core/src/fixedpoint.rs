//! Iteration of analytic maps and sampled contraction checks.
//!
//! Convergence of `z_{n+1} = f(z_n)` does not require `f` to be a contraction:
//! `z² + 1/4` converges to `1/2` on `[0, 1/2]` with `f'(1/2) = 1`, and the
//! fixed points of `tan` all have `|f'| >= 1`. For the ladder map, on the
//! other hand, a small disc around `p+` is mapped into itself with Lipschitz
//! constant close to `|γ|²`, and every orbit not started at `p-` enters it.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ladder::{fixed_points, LadderParams};
use crate::lowpass::{make_impedances, LowPassConfig};
use crate::ComplexValue;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticMap {
    /// Normalized ladder map `p -> 1 + t p/(t + p)`.
    Ladder { t: ComplexValue },
    /// `z -> z² + 1/4`.
    Quadratic,
    /// `z -> tan z` (principal branch).
    Tangent,
    /// `z -> slope z + offset`.
    Affine { slope: ComplexValue, offset: ComplexValue },
}

impl AnalyticMap {
    pub fn apply(&self, z: ComplexValue) -> ComplexValue {
        match *self {
            AnalyticMap::Ladder { t } => 1.0 + t * z / (t + z),
            AnalyticMap::Quadratic => z * z + 0.25,
            AnalyticMap::Tangent => z.tan(),
            AnalyticMap::Affine { slope, offset } => slope * z + offset,
        }
    }

    pub fn derivative(&self, z: ComplexValue) -> ComplexValue {
        match *self {
            AnalyticMap::Ladder { t } => {
                let d = t + z;
                t * t / (d * d)
            }
            AnalyticMap::Quadratic => 2.0 * z,
            AnalyticMap::Tangent => {
                let c = z.cos();
                1.0 / (c * c)
            }
            AnalyticMap::Affine { slope, .. } => slope,
        }
    }
}

fn is_finite(z: ComplexValue) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapTrace {
    /// `z_1, z_2, ...` up to the last finite iterate.
    pub values: Vec<ComplexValue>,
    /// 1-based index of the first non-finite iterate, if any.
    pub divergence_at: Option<usize>,
}

/// `n` terms of `z_{k+1} = f(z_k)`; stops at the first NaN or overflow.
pub fn iterate_map(map: &AnalyticMap, z1: ComplexValue, n: usize) -> Result<MapTrace> {
    if n == 0 {
        return Err(Error::invalid("trace length must be at least 1"));
    }
    if !is_finite(z1) {
        return Ok(MapTrace { values: Vec::new(), divergence_at: Some(1) });
    }
    let mut values = Vec::with_capacity(n);
    values.push(z1);
    let mut z = z1;
    for k in 2..=n {
        z = map.apply(z);
        if !is_finite(z) {
            return Ok(MapTrace { values, divergence_at: Some(k) });
        }
        values.push(z);
    }
    Ok(MapTrace { values, divergence_at: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscRegion {
    pub center: ComplexValue,
    pub radius: f64,
}

impl DiscRegion {
    pub fn new(center: ComplexValue, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }
}

/// Sampling region for [`check_contraction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Disc(DiscRegion),
    /// Segment `[lo, hi]` of the real axis.
    Interval { lo: f64, hi: f64 },
}

impl Region {
    fn size(&self) -> f64 {
        match *self {
            Region::Disc(d) => d.radius,
            Region::Interval { lo, hi } => hi - lo,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, on_boundary: bool) -> ComplexValue {
        match *self {
            Region::Disc(d) => {
                let r = if on_boundary { d.radius } else { d.radius * rng.gen::<f64>().sqrt() };
                d.center + ComplexValue::from_polar(r, 2.0 * PI * rng.gen::<f64>())
            }
            Region::Interval { lo, hi } => {
                let x = if on_boundary {
                    if rng.gen::<bool>() { hi } else { lo }
                } else {
                    lo + (hi - lo) * rng.gen::<f64>()
                };
                ComplexValue::new(x, 0.0)
            }
        }
    }

    fn clamp(&self, z: ComplexValue) -> ComplexValue {
        match *self {
            Region::Disc(d) => {
                let off = z - d.center;
                let r = off.norm();
                if r <= d.radius { z } else { d.center + off * (d.radius / r) }
            }
            Region::Interval { lo, hi } => ComplexValue::new(z.re.clamp(lo, hi), 0.0),
        }
    }

    fn near(&self, z: ComplexValue, rng: &mut ChaCha8Rng) -> ComplexValue {
        let step = 1e-4 * self.size() * rng.gen::<f64>();
        let dir = match self {
            Region::Disc(_) => ComplexValue::from_polar(1.0, 2.0 * PI * rng.gen::<f64>()),
            Region::Interval { .. } => ComplexValue::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0),
        };
        self.clamp(z + dir * step)
    }

    /// Closed-region membership with an outward tolerance of `1e-12`
    /// relative to the region's scale.
    pub fn contains(&self, z: ComplexValue) -> bool {
        match *self {
            Region::Disc(d) => {
                let tol = 1e-12 * (d.center.norm() + d.radius).max(1.0);
                (z - d.center).norm() <= d.radius + tol
            }
            Region::Interval { lo, hi } => {
                let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
                z.im.abs() <= tol && z.re >= lo - tol && z.re <= hi + tol
            }
        }
    }
}

impl From<DiscRegion> for Region {
    fn from(d: DiscRegion) -> Self {
        Region::Disc(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    pub maps_into_itself: bool,
    /// Largest sampled `|f(z') - f(z)|/|z' - z|`; a lower bound on the true
    /// Lipschitz constant.
    pub empirical_q: f64,
    pub sample_count: usize,
    pub worst_pair: (ComplexValue, ComplexValue),
}

pub const MIN_SAMPLES: usize = 100;

/// Samples `samples` point pairs in `region` and records the largest
/// Lipschitz ratio and whether every sampled image stays in the region.
///
/// Even-numbered pairs are independent uniform draws; odd-numbered pairs are
/// a uniform draw and a point within `1e-4` of the region's size of it, which
/// probes `|f'|`. Every fourth first point lies on the boundary.
pub fn check_contraction(map: &AnalyticMap, region: &Region, samples: usize, seed: u64) -> Result<ContractionReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if let Region::Interval { lo, hi } = *region {
        if !(hi > lo) {
            return Err(Error::invalid("interval needs lo < hi"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = true;
    let mut q = 0.0f64;
    let mut worst = (region.sample(&mut rng, false), region.sample(&mut rng, false));
    for i in 0..samples {
        let z = region.sample(&mut rng, i % 4 == 0);
        let w = if i % 2 == 1 { region.near(z, &mut rng) } else { region.sample(&mut rng, false) };
        let (fz, fw) = (map.apply(z), map.apply(w));
        inside &= region.contains(fz) && region.contains(fw);
        let gap = (w - z).norm();
        if gap == 0.0 {
            continue;
        }
        let ratio = (fw - fz).norm() / gap;
        if !ratio.is_finite() {
            inside = false;
            q = f64::INFINITY;
            worst = (z, w);
        } else if ratio > q {
            q = ratio;
            worst = (z, w);
        }
    }
    Ok(ContractionReport { maps_into_itself: inside, empirical_q: q, sample_count: samples, worst_pair: worst })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticReport {
    pub seed: f64,
    pub trace: MapTrace,
    /// `e_n = 1/2 - z_n` at the last index.
    pub final_error: f64,
    /// `n e_n` at the last index; tends to 1 for seeds in `[0, 1/2)`.
    pub scaled_error: f64,
    /// Least-squares `c` in `e_k ≈ c/k` over the second half of the trace.
    pub fitted_c: f64,
    /// No divergence and `|e_n| <= 2/n`.
    pub converged: bool,
}

/// Runs `z -> z² + 1/4` from a real seed and measures the `1/n` approach to
/// the neutral fixed point `1/2`.
pub fn quadratic_counterexample(seed: f64, n: usize) -> Result<QuadraticReport> {
    if n < 100 {
        return Err(Error::invalid(format!("need n >= 100, got {n}")));
    }
    let trace = iterate_map(&AnalyticMap::Quadratic, ComplexValue::new(seed, 0.0), n)?;
    let last = trace.values.len();
    let errors: Vec<f64> = trace.values.iter().map(|z| 0.5 - z.re).collect();
    let final_error = errors[last - 1];
    let (num, den) = errors
        .iter()
        .enumerate()
        .skip(last / 2)
        .map(|(i, e)| {
            let k = (i + 1) as f64;
            (e / k, 1.0 / (k * k))
        })
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let converged = trace.divergence_at.is_none() && final_error.abs() <= 2.0 / last as f64;
    Ok(QuadraticReport {
        seed,
        final_error,
        scaled_error: last as f64 * final_error,
        fitted_c: num / den,
        converged,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentFixedPoint {
    pub zeta: f64,
    /// `|sec² ζ| = 1 + ζ²` at a fixed point of `tan`.
    pub derivative_magnitude: f64,
}

/// The first `k` non-negative solutions of `tan ζ = ζ`: `0`, then one in each
/// `(jπ, jπ + π/2)`, located by bisection to `1e-12`.
pub fn tangent_fixed_points(k: usize) -> Result<Vec<TangentFixedPoint>> {
    if k == 0 {
        return Err(Error::invalid("need k >= 1"));
    }
    let g = |x: f64| x.tan() - x;
    let roots = (0..k).map(|j| {
        if j == 0 {
            return 0.0;
        }
        let base = j as f64 * PI;
        let (mut lo, mut hi) = (base, base + FRAC_PI_2 - 1e-9);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    });
    Ok(roots
        .map(|zeta| TangentFixedPoint { zeta, derivative_magnitude: 1.0 + zeta * zeta })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinReport {
    /// Radius of `D_ε` around `z+`, ohm.
    pub epsilon: f64,
    pub q_on_disc: f64,
    /// First index `n` (with `z_1 = Z1 + Z2`) such that `|z_n - z+| <= ε`.
    pub steps_to_enter: usize,
    pub gamma_abs_sq: f64,
    pub z_plus: ComplexValue,
}

/// Samples per disc during the ε search.
pub const BASIN_SAMPLES: usize = 2000;
pub const BASIN_SEED: u64 = 0x1add_e125;
const BASIN_MAX_STEPS: usize = 10_000_000;

/// Basin argument for the low-pass ladder; losses must be strictly positive.
pub fn basin_verification(filter: &LowPassConfig) -> Result<BasinReport> {
    if !(filter.series_loss > 0.0 && filter.shunt_loss > 0.0) {
        return Err(Error::invalid("basin verification needs r > 0 and r' > 0 (|gamma|^2 < 1 strictly)"));
    }
    basin_verification_params(&make_impedances(filter)?)
}

/// Halves `ε` from `|z+|/10` until `D_ε = {|z - z+| <= ε}` is mapped into
/// itself with sampled Lipschitz ratio at most `(1 + |γ|²)/2`, then follows
/// the orbit from `z_1 = Z1 + Z2` until it enters `D_ε`.
///
/// Works in the normalized coordinate `p = z/Z1`; the ratio and the entry
/// index are unchanged by the scaling.
pub fn basin_verification_params(params: &LadderParams) -> Result<BasinReport> {
    let t = params.t();
    let fp = fixed_points(t)?;
    if fp.is_marginal() {
        return Err(Error::invalid(format!("|gamma|^2 = {} is marginal", fp.gamma_abs_sq)));
    }
    let map = AnalyticMap::Ladder { t };
    let threshold = (1.0 + fp.gamma_abs_sq) / 2.0;
    let floor = 1e-12 * fp.p_plus.norm();
    let mut eps = fp.p_plus.norm() / 10.0;
    let q = loop {
        if eps < floor {
            return Err(Error::SearchFailure { floor: floor * params.z1().norm() });
        }
        let disc = Region::Disc(DiscRegion::new(fp.p_plus, eps)?);
        let rep = check_contraction(&map, &disc, BASIN_SAMPLES, BASIN_SEED)?;
        if rep.maps_into_itself && rep.empirical_q <= threshold {
            break rep.empirical_q;
        }
        eps /= 2.0;
    };

    let mut p = 1.0 + t;
    let mut n = 1;
    while (p - fp.p_plus).norm() > eps {
        if n >= BASIN_MAX_STEPS {
            return Err(Error::NoConvergence { iterations: n, rate: fp.gamma_abs_sq });
        }
        p = map.apply(p);
        if !is_finite(p) {
            return Err(Error::Pole { index: n + 1 });
        }
        n += 1;
    }
    Ok(BasinReport {
        epsilon: eps * params.z1().norm(),
        q_on_disc: q,
        steps_to_enter: n,
        gamma_abs_sq: fp.gamma_abs_sq,
        z_plus: params.z1() * fp.p_plus,
    })
}
