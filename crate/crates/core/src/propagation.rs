//! Per-section transfer of the infinite ladder and wave-packet propagation.
//!
//! The voltage on section `n` is `V_n(ω) = (-γ(ω))^n V_s(ω)`. In the lossless
//! passband `-γ = e^{iδ(ω)}` with `δ = π + 2 atan sqrt(A)`, anchored so that
//! `δ -> π` at the cutoff. A slowly modulated carrier therefore arrives at
//! section `n` delayed by `n T_g`, `T_g = -dδ/dω`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ladder::{fixed_points, LadderParams};
use crate::lowpass::{a_parameter, make_impedances, LowPassConfig, Regime};
use crate::output::{CsvTable, Int};
use crate::ComplexValue;

/// Relative step of the central difference used for `dδ/dω`.
pub const DERIVATIVE_STEP: f64 = 1e-6;

/// Largest spectral magnitude, relative to the peak, allowed at `|ν| = ν0`.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Largest envelope magnitude, relative to the peak, allowed at the edges of
/// the time window.
pub const EDGE_LIMIT: f64 = 1e-8;

/// Per-section voltage ratio `-γ = -p-/p+`.
pub fn transfer_ratio(params: &LadderParams) -> Result<ComplexValue> {
    Ok(-fixed_points(params.t())?.gamma)
}

/// `-γ` at angular frequency `omega` for the given filter.
///
/// Lossless filters at or below the cutoff use the limit of the lossy
/// ladder, `-γ = -(1 + i sqrt(A))/(1 - i sqrt(A))`, since `t` sits on the cut
/// there.
pub fn transfer_at(filter: &LowPassConfig, omega: f64) -> Result<ComplexValue> {
    let cfg = filter.with_omega(omega)?;
    let omega_c = cfg.omega_c();
    if cfg.is_lossless() && Regime::classify(omega, omega_c) != Regime::AboveCutoff {
        let root_a = a_parameter(omega, omega_c).sqrt();
        let p_plus = ComplexValue::new(0.5, -0.5 * root_a);
        let p_minus = ComplexValue::new(0.5, 0.5 * root_a);
        return Ok(-p_minus / p_plus);
    }
    transfer_ratio(&make_impedances(&cfg)?)
}

fn wrap(phase: f64) -> f64 {
    let w = phase.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// `dδ/dω` by a central difference with step `DERIVATIVE_STEP * omega`
/// (shrunk to stay below the cutoff).
fn phase_derivative(filter: &LowPassConfig, omega: f64) -> Result<f64> {
    let omega_c = filter.omega_c();
    let h = (DERIVATIVE_STEP * omega).min((omega_c - omega) / 2.0);
    let hi = transfer_at(filter, omega + h)?;
    let lo = transfer_at(filter, omega - h)?;
    Ok((hi / lo).arg() / (2.0 * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferAnalysis {
    pub omega: f64,
    pub minus_gamma: ComplexValue,
    /// Unwrapped phase of `-γ`, radians.
    pub delta: f64,
    /// `T_g = -dδ/dω`, seconds per section.
    pub group_delay: f64,
    /// `|-γ|`.
    pub attenuation: f64,
}

/// Unwraps phases sampled on an increasing grid, walking downward from the
/// last node. The last node is placed on the branch nearest `anchor`.
pub fn unwrap_downward(omegas: &[f64], wrapped: &[f64], anchor: f64) -> Result<Vec<f64>> {
    assert_eq!(omegas.len(), wrapped.len());
    let Some(&last) = wrapped.last() else {
        return Ok(Vec::new());
    };
    let mut out = vec![0.0; wrapped.len()];
    let top = wrapped.len() - 1;
    out[top] = last + 2.0 * PI * ((anchor - last) / (2.0 * PI)).round();
    for k in (0..top).rev() {
        let jump = wrap(wrapped[k] - wrapped[k + 1]);
        if jump.abs() >= PI * (1.0 - 1e-12) {
            return Err(Error::Unwrap { omega_lo: omegas[k], omega_hi: omegas[k + 1], jump });
        }
        out[k] = out[k + 1] + jump;
    }
    Ok(out)
}

/// Transfer ratio, unwrapped phase and group delay on a passband grid.
/// The filter's own `omega` is ignored.
pub fn phase_curve(filter: &LowPassConfig, omega_grid: &[f64]) -> Result<Vec<TransferAnalysis>> {
    let omega_c = filter.omega_c();
    if omega_grid.iter().any(|&w| !(w > 0.0 && w < omega_c)) {
        return Err(Error::invalid(format!("grid must lie inside the passband (0, {omega_c})")));
    }
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    let ratios = omega_grid
        .iter()
        .map(|&w| transfer_at(filter, w))
        .collect::<Result<Vec<_>>>()?;
    let wrapped: Vec<f64> = ratios.iter().map(|r| r.arg()).collect();
    let anchor = match omega_grid.last() {
        Some(&top) => PI + 2.0 * a_parameter(top, omega_c).sqrt().atan(),
        None => return Ok(Vec::new()),
    };
    let delta = unwrap_downward(omega_grid, &wrapped, anchor)?;
    omega_grid
        .iter()
        .zip(ratios)
        .zip(delta)
        .map(|((&omega, minus_gamma), delta)| {
            Ok(TransferAnalysis {
                omega,
                minus_gamma,
                delta,
                group_delay: -phase_derivative(filter, omega)?,
                attenuation: minus_gamma.norm(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupVelocity {
    pub sections_per_second: f64,
    pub seconds_per_section: f64,
}

pub fn group_velocity(filter: &LowPassConfig, omega0: f64) -> Result<GroupVelocity> {
    let omega_c = filter.omega_c();
    if !(omega0 > 0.0 && omega0 < omega_c) {
        return Err(Error::invalid(format!("carrier must lie in the passband (0, {omega_c}), got {omega0}")));
    }
    let seconds_per_section = phase_derivative(filter, omega0)?.abs();
    Ok(GroupVelocity { sections_per_second: 1.0 / seconds_per_section, seconds_per_section })
}

/// Modulated source `f(t) e^{iω0 t}` sampled on a uniform grid, and the
/// frequency band used to resynthesize it at each section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketSimConfig {
    /// Carrier `ω0`, rad/s.
    pub omega0: f64,
    pub t_start: f64,
    pub dt: f64,
    /// Envelope `f(t_start + k dt)`.
    pub envelope: Vec<f64>,
    /// Half-width `ν0` of the band `|ν| < ν0` kept around the carrier.
    pub nu0: f64,
    pub sections: Vec<usize>,
    /// Quadrature nodes over `[-ν0, ν0]`.
    pub frequency_nodes: usize,
}

impl PacketSimConfig {
    /// Gaussian envelope `exp(-(t - t_c)²/(2σ²))` on `[t_start, t_end]`.
    #[allow(clippy::too_many_arguments)]
    pub fn gaussian(
        omega0: f64,
        sigma: f64,
        t_c: f64,
        t_start: f64,
        t_end: f64,
        dt: f64,
        nu0: f64,
        sections: Vec<usize>,
        frequency_nodes: usize,
    ) -> Result<Self> {
        if !(sigma > 0.0 && dt > 0.0 && t_end > t_start) {
            return Err(Error::invalid("need sigma > 0, dt > 0 and t_end > t_start"));
        }
        let samples = ((t_end - t_start) / dt).round() as usize + 1;
        let envelope = (0..samples)
            .map(|k| {
                let x = (t_start + k as f64 * dt - t_c) / sigma;
                (-0.5 * x * x).exp()
            })
            .collect();
        Ok(Self { omega0, t_start, dt, envelope, nu0, sections, frequency_nodes })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.envelope.len()).map(|k| self.t_start + k as f64 * self.dt).collect()
    }

    fn validate(&self, omega_c: f64) -> Result<()> {
        if !(self.omega0 > 0.0 && self.nu0 > 0.0 && self.dt > 0.0) {
            return Err(Error::invalid("omega0, nu0 and dt must be positive"));
        }
        if self.envelope.len() < 3 || self.frequency_nodes < 3 {
            return Err(Error::invalid("need at least 3 time samples and 3 frequency nodes"));
        }
        if self.sections.is_empty() {
            return Err(Error::invalid("no sections requested"));
        }
        if self.omega0 + self.nu0 >= omega_c || self.omega0 - self.nu0 <= 0.0 {
            return Err(Error::Bandwidth {
                reason: format!(
                    "band [{}, {}] is not inside the passband (0, {omega_c})",
                    self.omega0 - self.nu0,
                    self.omega0 + self.nu0
                ),
                leakage: 1.0,
            });
        }
        let peak = self.envelope.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let edge = self.envelope[0].abs().max(self.envelope[self.envelope.len() - 1].abs());
        if !(peak > 0.0) || edge > EDGE_LIMIT * peak {
            return Err(Error::invalid("envelope must be nonzero and decay to 1e-8 of its peak at the window edges"));
        }
        Ok(())
    }
}

/// Gaussian source sized so that every requested section's packet fits in
/// the time window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianPlan {
    /// Peak time of the source envelope.
    pub t_c: f64,
    pub config: PacketSimConfig,
}

/// Spectral cutoff of the plan: the Gaussian spectrum `exp(-σ²ν²/2)` is
/// `1e-8` of its peak at `ν0 = sqrt(2 ln 1e8)/σ`.
pub fn gaussian_bandwidth(sigma: f64) -> f64 {
    (2.0 * 1e8f64.ln()).sqrt() / sigma
}

/// Lays out a Gaussian packet `exp(-(t - t_c)²/(2σ²)) e^{iω0 t}` with
/// `t_c = 7σ`, sampling step `σ/20` and enough frequency nodes that the
/// quadrature's periodic images stay outside the window.
pub fn plan_gaussian(filter: &LowPassConfig, omega0: f64, sigma: f64, sections: &[usize]) -> Result<GaussianPlan> {
    filter.validate()?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let omega_c = filter.omega_c();
    if !(omega0 > 0.0 && omega0 < omega_c) {
        return Err(Error::invalid(format!("carrier must lie in the passband (0, {omega_c}), got {omega0}")));
    }
    let &n_max = sections.iter().max().ok_or_else(|| Error::invalid("no sections requested"))?;
    let nu0 = gaussian_bandwidth(sigma);
    if omega0 + nu0 >= omega_c || omega0 - nu0 <= 0.0 {
        // spectral magnitude, relative to the peak, where the band leaves (0, ω_c)
        let gap = (omega_c - omega0).min(omega0);
        let leakage = (-0.5 * (sigma * gap).powi(2)).exp();
        return Err(Error::Bandwidth {
            reason: format!("band omega0 ± {nu0:.4} leaves the passband (0, {omega_c})"),
            leakage,
        });
    }
    let slowest = group_velocity(filter, omega0 + nu0)?.seconds_per_section;
    let t_c = 7.0 * sigma;
    let t_end = 2.0 * t_c + n_max as f64 * slowest;
    let dt = sigma / 20.0;
    let t_end = (t_end / dt).ceil() * dt;
    let nodes = (4.0 * nu0 * t_end / PI).ceil() as usize + 1;
    let config = PacketSimConfig::gaussian(omega0, sigma, t_c, 0.0, t_end, dt, nu0, sections.to_vec(), nodes.max(16))?;
    Ok(GaussianPlan { t_c, config })
}

/// Voltage on one section of the ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionTrace {
    pub section: usize,
    pub times: Vec<f64>,
    pub voltage: Vec<ComplexValue>,
    /// `|V_n(t)|`.
    pub envelope: Vec<f64>,
    pub peak_time: f64,
}

impl SectionTrace {
    /// `t,v_re,v_im,envelope`.
    pub fn table(&self) -> CsvTable {
        let mut table = CsvTable::new(&["t", "v_re", "v_im", "envelope"]);
        for ((t, v), e) in self.times.iter().zip(&self.voltage).zip(&self.envelope) {
            table.push(vec![(*t).into(), v.re.into(), v.im.into(), (*e).into()]);
        }
        table
    }
}

/// Long format with a leading `section` column.
pub fn long_table(traces: &[SectionTrace]) -> CsvTable {
    let mut table = CsvTable::new(&["section", "t", "v_re", "v_im", "envelope"]);
    for tr in traces {
        for ((t, v), e) in tr.times.iter().zip(&tr.voltage).zip(&tr.envelope) {
            table.push(vec![Int(tr.section as i64).into(), (*t).into(), v.re.into(), v.im.into(), (*e).into()]);
        }
    }
    table
}

/// Sub-sample location of the maximum of `y` on the uniform grid `t`,
/// from the parabola through the largest sample and its neighbours.
pub fn peak_time(t: &[f64], y: &[f64]) -> f64 {
    let k = y
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > y[best] { i } else { best });
    if k == 0 || k + 1 == y.len() {
        return t[k];
    }
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    if curvature == 0.0 {
        return t[k];
    }
    let dt = t[k + 1] - t[k];
    t[k] + 0.5 * (y0 - y2) / curvature * dt
}

/// Spectrum of the envelope at `ν` (plain Riemann sum over the samples).
fn envelope_spectrum(cfg: &PacketSimConfig, times: &[f64], nu: f64) -> ComplexValue {
    let sum: ComplexValue = cfg
        .envelope
        .iter()
        .zip(times)
        .map(|(f, t)| *f * ComplexValue::cis(-nu * t))
        .sum();
    sum * cfg.dt
}

/// Propagates the modulated source into the infinite ladder:
/// `V_n(t) = e^{iω0 t} (1/2π) ∫_{|ν|<ν0} e^{iνt} (-γ(ω0 + ν))^n f̃(ν) dν`,
/// with the trapezoidal rule on a uniform `ν` grid.
pub fn propagate_packet(cfg: &PacketSimConfig, filter: &LowPassConfig) -> Result<Vec<SectionTrace>> {
    filter.validate()?;
    cfg.validate(filter.omega_c())?;
    let times = cfg.times();
    let m = cfg.frequency_nodes;
    let dnu = 2.0 * cfg.nu0 / (m - 1) as f64;
    let nus: Vec<f64> = (0..m).map(|j| -cfg.nu0 + j as f64 * dnu).collect();
    let spectrum: Vec<ComplexValue> = nus.iter().map(|&nu| envelope_spectrum(cfg, &times, nu)).collect();

    let peak = spectrum.iter().fold(0.0f64, |a, s| a.max(s.norm()));
    let leakage = spectrum[0].norm().max(spectrum[m - 1].norm()) / peak;
    if !(leakage <= LEAKAGE_LIMIT) {
        return Err(Error::Bandwidth {
            reason: format!("envelope spectrum at |nu| = {} is not negligible", cfg.nu0),
            leakage,
        });
    }

    let ratios = nus
        .iter()
        .map(|&nu| transfer_at(filter, cfg.omega0 + nu))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = (0..m)
        .map(|j| if j == 0 || j == m - 1 { dnu / 2.0 } else { dnu } / (2.0 * PI))
        .collect();

    let traces = cfg
        .sections
        .iter()
        .map(|&n| {
            let amplitudes: Vec<ComplexValue> = ratios
                .iter()
                .zip(&spectrum)
                .zip(&weights)
                .map(|((h, s), w)| h.powi(n as i32) * s * *w)
                .collect();
            let voltage: Vec<ComplexValue> = times
                .iter()
                .map(|&t| {
                    let baseband: ComplexValue = nus
                        .iter()
                        .zip(&amplitudes)
                        .map(|(nu, a)| a * ComplexValue::cis(nu * t))
                        .sum();
                    baseband * ComplexValue::cis(cfg.omega0 * t)
                })
                .collect();
            let envelope: Vec<f64> = voltage.iter().map(|v| v.norm()).collect();
            let peak_time = peak_time(&times, &envelope);
            SectionTrace { section: n, times: times.clone(), voltage, envelope, peak_time }
        })
        .collect();
    Ok(traces)
}
