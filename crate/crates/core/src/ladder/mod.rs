//! Ladder recursion `z_{n+1} = Z1 + 1/(1/Z2 + 1/z_n)` and its normalized form
//! `p_{n+1} = 1 + t p_n / (t + p_n)` with `p = z/Z1`, `t = Z2/Z1`.
//!
//! The fixed points are `p± = (1 ± sqrt(1 + 4t))/2`, with the square root taken
//! on the sheet where its real part is positive. In the Möbius coordinate
//! `c(p) = (p - p+)/(p - p-)` one step of the recursion is multiplication by
//! `gamma^2`, `gamma = p-/p+`, so every orbit not started at `p-` converges to
//! `p+` geometrically.

mod resistive;

pub use resistive::{resistive_ladder, ResistiveLadder, ResistiveLimit};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ComplexValue;

/// Distance to the pole (or to zero) below which an iterate is treated as
/// having hit it.
pub const POLE_TOLERANCE: f64 = 1e-300;

/// Width of the band around the negative real axis treated as the cut.
pub const CUT_BAND: f64 = 1e-300;

/// Inputs with `|gamma|^2` above `1 - MARGINAL_GAP` are considered marginal.
pub const MARGINAL_GAP: f64 = 1e-12;

/// Largest relative deviation accepted by [`verify_contraction_law`].
pub const CONTRACTION_LAW_TOLERANCE: f64 = 1e-10;

pub(crate) fn scale(x: f64) -> f64 {
    x.max(1.0)
}

fn check_finite(z: ComplexValue, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {z}")))
    }
}

/// Series and shunt impedance of one ladder section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderParams {
    z1: ComplexValue,
    z2: ComplexValue,
    t: ComplexValue,
}

impl LadderParams {
    pub fn new(z1: ComplexValue, z2: ComplexValue) -> Result<Self> {
        check_finite(z1, "Z1")?;
        check_finite(z2, "Z2")?;
        if z1.norm() == 0.0 {
            return Err(Error::Degenerate("series impedance Z1 is zero, t = Z2/Z1 undefined"));
        }
        Ok(Self { z1, z2, t: z2 / z1 })
    }

    /// Series impedance `Z1`.
    pub fn z1(&self) -> ComplexValue {
        self.z1
    }

    /// Shunt impedance `Z2`.
    pub fn z2(&self) -> ComplexValue {
        self.z2
    }

    /// Normalized ratio `t = Z2/Z1`.
    pub fn t(&self) -> ComplexValue {
        self.t
    }
}

/// `sqrt(1 + 4t)` on the sheet with positive real part.
///
/// The cut is the closed ray `t <= -1/4` on the real axis; points within
/// [`CUT_BAND`] of it are rejected rather than assigned to either side.
pub fn branch_sqrt_1p4t(t: ComplexValue) -> Result<ComplexValue> {
    check_finite(t, "t")?;
    if t.im.abs() < CUT_BAND && t.re <= -0.25 {
        return Err(Error::Cut { t });
    }
    let w = sqrt_right_half(ComplexValue::new(1.0 + 4.0 * t.re, 4.0 * t.im));
    if w.re > 0.0 {
        Ok(w)
    } else {
        // Re w == 0 only happens on the cut
        Err(Error::Cut { t })
    }
}

// Half-angle formula; both components keep full relative accuracy, and the
// result always has Re >= 0.
fn sqrt_right_half(z: ComplexValue) -> ComplexValue {
    let (x, y) = (z.re, z.im);
    if x == 0.0 && y == 0.0 {
        return ComplexValue::new(0.0, 0.0);
    }
    let r = x.hypot(y);
    if x >= 0.0 {
        let s = ((r + x) / 2.0).sqrt();
        ComplexValue::new(s, y / (2.0 * s))
    } else {
        let s = ((r - x) / 2.0).sqrt();
        ComplexValue::new(y.abs() / (2.0 * s), s.copysign(y))
    }
}

/// Fixed points of the normalized recursion and the quantities that control
/// convergence toward them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointAnalysis {
    pub t: ComplexValue,
    /// Attracting fixed point `p+`.
    pub p_plus: ComplexValue,
    /// Repelling fixed point `p-`.
    pub p_minus: ComplexValue,
    /// `sqrt(1 + 4t) = a + ib` with `a > 0`.
    pub sqrt_1p4t: ComplexValue,
    /// `gamma = p-/p+`.
    pub gamma: ComplexValue,
    pub gamma_abs_sq: f64,
    /// Always true: `p+` is the attractor on the chosen sheet.
    pub stable_is_plus: bool,
}

impl FixedPointAnalysis {
    /// `gamma^2`, the multiplier of one step in the Möbius coordinate.
    pub fn gamma_sq(&self) -> ComplexValue {
        self.gamma * self.gamma
    }

    /// True when `|gamma|^2` is too close to one for the iteration to
    /// converge in a usable number of steps.
    pub fn is_marginal(&self) -> bool {
        self.gamma_abs_sq > 1.0 - MARGINAL_GAP
    }
}

pub fn fixed_points(t: ComplexValue) -> Result<FixedPointAnalysis> {
    let w = branch_sqrt_1p4t(t)?;
    let p_plus = (1.0 + w) / 2.0;
    // Vieta: p+ p- = -t. Avoids the cancellation in (1 - w)/2 for small t.
    let p_minus = -t / p_plus;
    let gamma = p_minus / p_plus;
    Ok(FixedPointAnalysis {
        t,
        p_plus,
        p_minus,
        sqrt_1p4t: w,
        gamma,
        gamma_abs_sq: gamma.norm_sqr(),
        stable_is_plus: true,
    })
}

/// One step of `p -> 1 + t p/(t + p)`.
pub fn ladder_step(t: ComplexValue, p: ComplexValue) -> Option<ComplexValue> {
    let denom = t + p;
    if denom.norm() <= POLE_TOLERANCE {
        None
    } else {
        Some(1.0 + t * p / denom)
    }
}

/// `c(p) = (p - p+)/(p - p-)`; sends `p+` to 0 and `p-` to infinity.
pub fn moebius_coordinate(p: ComplexValue, fp: &FixedPointAnalysis) -> Result<ComplexValue> {
    let d = p - fp.p_minus;
    if d.norm() <= POLE_TOLERANCE {
        return Err(Error::Infinity);
    }
    Ok((p - fp.p_plus) / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub n: usize,
    pub p: ComplexValue,
    /// Möbius coordinate; `None` when `p_n == p-`.
    pub c: Option<ComplexValue>,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub t: ComplexValue,
    pub entries: Vec<TraceEntry>,
    /// Index at which the orbit hit the pole `p = -t`; the trace ends with
    /// the entry before it.
    pub pole_at: Option<usize>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }
}

fn entry(n: usize, p: ComplexValue, fp: &FixedPointAnalysis) -> TraceEntry {
    TraceEntry {
        n,
        p,
        c: moebius_coordinate(p, fp).ok(),
        abs_err: (p - fp.p_plus).norm(),
    }
}

/// Runs `n` terms of the normalized recursion starting from `p1`.
///
/// Hitting the pole is not an error: the trace stops and records the index
/// in [`IterationTrace::pole_at`].
pub fn iterate_p(t: ComplexValue, p1: ComplexValue, n: usize) -> Result<IterationTrace> {
    if n == 0 {
        return Err(Error::invalid("trace length must be at least 1"));
    }
    check_finite(p1, "p1")?;
    let fp = fixed_points(t)?;
    let mut entries = Vec::with_capacity(n);
    entries.push(entry(1, p1, &fp));
    let mut p = p1;
    let mut pole_at = None;
    for k in 2..=n {
        match ladder_step(t, p) {
            Some(next) => {
                p = next;
                entries.push(entry(k, p, &fp));
            }
            None => {
                pole_at = Some(k);
                break;
            }
        }
    }
    Ok(IterationTrace { t, entries, pole_at })
}

/// Runs `n` terms of the unnormalized impedance recursion from `z1`.
pub fn iterate_z(params: &LadderParams, z1: ComplexValue, n: usize) -> Result<Vec<ComplexValue>> {
    if n == 0 {
        return Err(Error::invalid("trace length must be at least 1"));
    }
    check_finite(z1, "z1")?;
    if params.z2.norm() == 0.0 {
        return Err(Error::Degenerate("shunt impedance Z2 is zero, 1/Z2 undefined"));
    }
    let pole_scale = POLE_TOLERANCE * params.z1.norm();
    let mut out = Vec::with_capacity(n);
    out.push(z1);
    let mut z = z1;
    for k in 2..=n {
        if (z + params.z2).norm() <= pole_scale {
            return Err(Error::Pole { index: k });
        }
        z = if z.norm() == 0.0 {
            // shorted load: the shunt branch is bypassed
            params.z1
        } else {
            params.z1 + 1.0 / (1.0 / params.z2 + 1.0 / z)
        };
        out.push(z);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionLawReport {
    /// Number of consecutive pairs `(c_n, c_{n+1})` compared.
    pub steps_checked: usize,
    /// Largest `|c_{n+1} - gamma^2 c_n| / max(1, |c_{n+1}|)`.
    pub max_relative_deviation: f64,
    pub passed: bool,
    /// Set when the trace has fewer than two usable entries.
    pub insufficient_data: bool,
}

/// Checks the exact complex law `c_{n+1} = gamma^2 c_n` along a trace.
pub fn verify_contraction_law(trace: &IterationTrace, fp: &FixedPointAnalysis) -> ContractionLawReport {
    let g2 = fp.gamma_sq();
    let mut steps = 0;
    let mut worst = 0.0f64;
    for pair in trace.entries.windows(2) {
        let (Some(c0), Some(c1)) = (pair[0].c, pair[1].c) else {
            continue;
        };
        let dev = (c1 - g2 * c0).norm() / scale(c1.norm());
        worst = worst.max(dev);
        steps += 1;
    }
    if steps == 0 {
        return ContractionLawReport {
            steps_checked: 0,
            max_relative_deviation: 0.0,
            passed: false,
            insufficient_data: true,
        };
    }
    ContractionLawReport {
        steps_checked: steps,
        max_relative_deviation: worst,
        passed: worst <= CONTRACTION_LAW_TOLERANCE,
        insufficient_data: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    pub limit: ComplexValue,
    /// Number of recursion steps taken.
    pub iterations: usize,
    /// Geometric rate `|gamma|^2`.
    pub rate: f64,
    /// `|p_{n+1} - p_n| <= tol (1 - |gamma|^2)/2` held at the stop.
    pub step_criterion: bool,
    /// `|c_n| |p_n - p-| <= tol` held at the stop.
    pub bound_criterion: bool,
}

/// Iterates until the limit `p+` is reached to `tol` (relative to
/// `max(1, |p+|)`).
pub fn converge(t: ComplexValue, p1: ComplexValue, tol: f64, max_iter: usize) -> Result<Convergence> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    check_finite(p1, "p1")?;
    let fp = fixed_points(t)?;
    if p1 == fp.p_minus {
        return Err(Error::UnstableSeed);
    }
    let rate = fp.gamma_abs_sq;
    if fp.is_marginal() {
        return Err(Error::NoConvergence { iterations: 0, rate });
    }
    let tol = tol * scale(fp.p_plus.norm());
    let step_tol = tol * (1.0 - rate) / 2.0;
    let mut p = p1;
    for k in 0..=max_iter {
        // |c_n| |p_n - p-| is exactly |p_n - p+|
        let bound_criterion = match moebius_coordinate(p, &fp) {
            Ok(c) => c.norm() * (p - fp.p_minus).norm() <= tol,
            Err(_) => false,
        };
        if bound_criterion {
            return Ok(Convergence { limit: p, iterations: k, rate, step_criterion: false, bound_criterion });
        }
        if k == max_iter {
            break;
        }
        let next = ladder_step(t, p).ok_or(Error::Pole { index: k + 2 })?;
        let step_criterion = (next - p).norm() <= step_tol;
        p = next;
        if step_criterion {
            let bound_criterion = (p - fp.p_plus).norm() <= tol;
            return Ok(Convergence { limit: p, iterations: k + 1, rate, step_criterion, bound_criterion });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        (a - b).norm() <= tol * scale(b.norm())
    }

    #[test]
    fn sqrt_perfect_square_and_identity() {
        assert_eq!(branch_sqrt_1p4t(c(2.0, 0.0)).unwrap(), c(3.0, 0.0));
        assert_eq!(branch_sqrt_1p4t(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn sqrt_rejects_cut() {
        assert!(matches!(branch_sqrt_1p4t(c(-1.0, 0.0)), Err(Error::Cut { .. })));
        assert!(matches!(branch_sqrt_1p4t(c(-0.25, 0.0)), Err(Error::Cut { .. })));
        assert!(matches!(branch_sqrt_1p4t(c(-1e6, -0.0)), Err(Error::Cut { .. })));
        // just right of the cut's end point is fine
        assert!(branch_sqrt_1p4t(c(-0.2499, 0.0)).is_ok());
    }

    #[test]
    fn sqrt_near_cut_below() {
        // mpmath, 50 digits
        let w = branch_sqrt_1p4t(c(-1.0, -1e-6)).unwrap();
        let want = c(1.154700538378994876e-6, -1.732050807569262193);
        assert!((w.re - want.re).abs() <= 1e-15 * want.re);
        assert!((w.im - want.im).abs() <= 1e-15);
    }

    #[test]
    fn sqrt_rejects_nan() {
        assert!(matches!(branch_sqrt_1p4t(c(f64::NAN, 0.0)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn fixed_points_exact_cases() {
        let fp = fixed_points(c(2.0, 0.0)).unwrap();
        assert_eq!(fp.p_plus, c(2.0, 0.0));
        assert_eq!(fp.p_minus, c(-1.0, 0.0));
        assert_eq!(fp.gamma, c(-0.5, 0.0));
        assert_eq!(fp.gamma_abs_sq, 0.25);
        assert!(fp.stable_is_plus);

        let fp = fixed_points(c(0.0, 0.0)).unwrap();
        assert_eq!(fp.p_plus, c(1.0, 0.0));
        assert_eq!(fp.p_minus.norm(), 0.0);
        assert_eq!(fp.gamma.norm(), 0.0);
    }

    #[test]
    fn fixed_points_complex_t_match_oracle() {
        let t = c(1.0, 1.0);
        let fp = fixed_points(t).unwrap();
        // mpmath
        let pp = c(1.693897202308099089, 0.418796525390440752);
        let pm = c(-0.693897202308099089, -0.418796525390440752);
        assert!(close(fp.p_plus, pp, 1e-15));
        assert!(close(fp.p_minus, pm, 1e-15));
        for p in [fp.p_plus, fp.p_minus] {
            assert!((p * p - p - t).norm() <= 1e-12 * scale(t.norm()));
        }
        let (a, b) = (fp.sqrt_1p4t.re, fp.sqrt_1p4t.im);
        let formula = ((a - 1.0).powi(2) + b * b) / ((a + 1.0).powi(2) + b * b);
        assert!((formula - fp.gamma_abs_sq).abs() <= 1e-14);
    }

    #[test]
    fn iterate_p_exact_rationals() {
        let tr = iterate_p(c(2.0, 0.0), c(1.0, 0.0), 3).unwrap();
        assert_eq!(tr.len(), 3);
        assert!(close(tr.entries[1].p, c(5.0 / 3.0, 0.0), 1e-15));
        assert!(close(tr.entries[2].p, c(21.0 / 11.0, 0.0), 1e-15));
        assert_eq!(tr.pole_at, None);
    }

    #[test]
    fn iterate_p_from_repeller_and_zero_t() {
        let tr = iterate_p(c(2.0, 0.0), c(-1.0, 0.0), 20).unwrap();
        assert!(tr.entries.iter().all(|e| e.p == c(-1.0, 0.0) && e.c.is_none()));

        let tr = iterate_p(c(0.0, 0.0), c(7.0, 0.0), 5).unwrap();
        assert!(tr.entries[1..].iter().all(|e| e.p == c(1.0, 0.0)));
    }

    #[test]
    fn iterate_p_stops_at_pole() {
        // p1 = -t is the pole; the step to p2 cannot be taken
        let tr = iterate_p(c(2.0, 0.0), c(-2.0, 0.0), 5).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.pole_at, Some(2));
    }

    #[test]
    fn iterate_p_rejects_zero_length() {
        assert!(iterate_p(c(2.0, 0.0), c(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn iterate_z_direct_and_scaled() {
        let params = LadderParams::new(c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        let zs = iterate_z(&params, c(1.0, 0.0), 2).unwrap();
        assert!(close(zs[1], c(5.0 / 3.0, 0.0), 1e-15));

        let scaled = LadderParams::new(c(2.0, 0.0), c(4.0, 0.0)).unwrap();
        let zs2 = iterate_z(&scaled, c(2.0, 0.0), 10).unwrap();
        let ps = iterate_p(c(2.0, 0.0), c(1.0, 0.0), 10).unwrap();
        for (z, e) in zs2.iter().zip(&ps.entries) {
            assert!(close(*z, 2.0 * e.p, 1e-14));
        }
    }

    #[test]
    fn iterate_z_lossless_lc_stays_finite() {
        let z1 = c(0.0, 1.0);
        let z2 = c(0.0, -1.0 / 0.3);
        let params = LadderParams::new(z1, z2).unwrap();
        let zs = iterate_z(&params, z1 + z2, 200).unwrap();
        assert_eq!(zs.len(), 200);
        assert!(zs.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn iterate_z_degenerate_shunt() {
        let params = LadderParams::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(matches!(iterate_z(&params, c(1.0, 0.0), 3), Err(Error::Degenerate(_))));
        assert!(matches!(LadderParams::new(c(0.0, 0.0), c(1.0, 0.0)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn moebius_examples() {
        let fp = fixed_points(c(2.0, 0.0)).unwrap();
        assert_eq!(moebius_coordinate(fp.p_plus, &fp).unwrap(), c(0.0, 0.0));
        assert_eq!(moebius_coordinate(c(1.0, 0.0), &fp).unwrap(), c(-0.5, 0.0));
        assert_eq!(moebius_coordinate(fp.p_minus, &fp), Err(Error::Infinity));
    }

    #[test]
    fn contraction_law_exact_rationals() {
        let fp = fixed_points(c(2.0, 0.0)).unwrap();
        let tr = iterate_p(c(2.0, 0.0), c(1.0, 0.0), 2).unwrap();
        assert_eq!(tr.entries[0].c.unwrap(), c(-0.5, 0.0));
        assert!(close(tr.entries[1].c.unwrap(), c(-0.125, 0.0), 1e-15));
        let rep = verify_contraction_law(&tr, &fp);
        assert!(rep.passed);
        assert_eq!(rep.steps_checked, 1);
        assert!(rep.max_relative_deviation < 1e-15);
    }

    #[test]
    fn contraction_law_short_trace() {
        let fp = fixed_points(c(2.0, 0.0)).unwrap();
        let tr = iterate_p(c(2.0, 0.0), c(1.0, 0.0), 1).unwrap();
        let rep = verify_contraction_law(&tr, &fp);
        assert!(rep.insufficient_data);
        assert!(!rep.passed);
    }

    #[test]
    fn contraction_law_complex_trace_matches_oracle() {
        let t = c(0.3, 0.7);
        let fp = fixed_points(t).unwrap();
        let tr = iterate_p(t, c(1.0, 1.0), 50).unwrap();
        let rep = verify_contraction_law(&tr, &fp);
        assert!(rep.passed, "{rep:?}");
        // mpmath re-evaluation of the same orbit at 50 digits
        let p50 = c(1.348594334985286927, 0.412446778832277189);
        assert!(close(tr.entries[49].p, p50, 1e-14));
        assert!((fp.gamma_abs_sq - 0.14663493861481996).abs() < 1e-15);
    }

    #[test]
    fn converge_examples() {
        let r = converge(c(2.0, 0.0), c(1.0, 0.0), 1e-12, 1000).unwrap();
        assert!((r.limit - c(2.0, 0.0)).norm() <= 2e-12);
        assert_eq!(r.rate, 0.25);
        assert!(r.step_criterion || r.bound_criterion);

        let r = converge(c(2.0, 0.0), c(-1.0 + 1e-8, 0.0), 1e-12, 1000).unwrap();
        assert!((r.limit - c(2.0, 0.0)).norm() <= 2e-12);

        assert_eq!(converge(c(2.0, 0.0), c(-1.0, 0.0), 1e-12, 1000), Err(Error::UnstableSeed));
    }

    #[test]
    fn converge_iteration_bound() {
        let t = c(2.0, 0.0);
        let tol = 1e-12;
        let r = converge(t, c(1.0, 0.0), tol, 1000).unwrap();
        // |c1| = 1/2, |p - p-| stays O(3)
        let predicted = ((tol * 2.0 / (0.5 * 3.0)).ln() / 0.25f64.ln()).ceil() as usize;
        assert!(r.iterations <= predicted + 3, "{} vs {predicted}", r.iterations);
    }

    #[test]
    fn converge_rejects_marginal_and_bad_tol() {
        // t just above the cut: |gamma|^2 = 1 - O(1e-16)
        let err = converge(c(-1.0, -1e-17), c(1.0, 0.0), 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
        assert!(matches!(converge(c(2.0, 0.0), c(1.0, 0.0), 0.0, 10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn converge_runs_out_of_iterations() {
        let err = converge(c(2.0, 0.0), c(1.0, 0.0), 1e-14, 2).unwrap_err();
        assert_eq!(err, Error::NoConvergence { iterations: 2, rate: 0.25 });
    }
}
