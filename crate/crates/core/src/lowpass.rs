//! LC ladder filters with small loss resistances.
//!
//! Low-pass section: `Z1 = r + iωL`, `Z2 = r' + 1/(iωC)`, so
//! `1 + 4t = 1 - ω_c²/ω²` in the lossless case with `ω_c = 2/sqrt(LC)`.
//! Below the cutoff `1 + 4t` sits on the negative real axis, the branch cut,
//! and the infinite-ladder impedance only exists as the limit of lossy ladders
//! with `r, r' -> 0` taken after the number of sections goes to infinity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ladder::{fixed_points, LadderParams};
use crate::ComplexValue;

/// Relative distance to `ω_c` treated as sitting exactly on the cutoff.
pub const CUTOFF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowPassConfig {
    /// Henry.
    pub inductance: f64,
    /// Farad.
    pub capacitance: f64,
    /// Series loss `r`, ohm.
    pub series_loss: f64,
    /// Shunt loss `r'`, ohm.
    pub shunt_loss: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
}

impl LowPassConfig {
    pub fn new(inductance: f64, capacitance: f64, series_loss: f64, shunt_loss: f64, omega: f64) -> Result<Self> {
        let cfg = Self { inductance, capacitance, series_loss, shunt_loss, omega };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn lossless(inductance: f64, capacitance: f64, omega: f64) -> Result<Self> {
        Self::new(inductance, capacitance, 0.0, 0.0, omega)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64, name: &str| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
            }
        };
        let non_negative = |x: f64, name: &str| {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be non-negative and finite, got {x}")))
            }
        };
        positive(self.inductance, "L")?;
        positive(self.capacitance, "C")?;
        positive(self.omega, "omega")?;
        non_negative(self.series_loss, "r")?;
        non_negative(self.shunt_loss, "r'")
    }

    pub fn with_losses(&self, series_loss: f64, shunt_loss: f64) -> Result<Self> {
        Self::new(self.inductance, self.capacitance, series_loss, shunt_loss, self.omega)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.inductance, self.capacitance, self.series_loss, self.shunt_loss, omega)
    }

    pub fn omega_c(&self) -> f64 {
        2.0 / (self.inductance * self.capacitance).sqrt()
    }

    pub fn is_lossless(&self) -> bool {
        self.series_loss == 0.0 && self.shunt_loss == 0.0
    }
}

/// `ω_c = 2/sqrt(LC)`.
pub fn cutoff_frequency(inductance: f64, capacitance: f64) -> Result<f64> {
    if !(inductance > 0.0 && capacitance > 0.0) || !(inductance * capacitance).is_finite() {
        return Err(Error::invalid("L and C must be positive and finite"));
    }
    Ok(2.0 / (inductance * capacitance).sqrt())
}

pub fn make_impedances(cfg: &LowPassConfig) -> Result<LadderParams> {
    cfg.validate()?;
    let z1 = ComplexValue::new(cfg.series_loss, cfg.omega * cfg.inductance);
    let z2 = ComplexValue::new(cfg.shunt_loss, -1.0 / (cfg.omega * cfg.capacitance));
    LadderParams::new(z1, z2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BelowCutoff,
    AboveCutoff,
    AtCutoff,
}

impl Regime {
    pub fn classify(omega: f64, omega_c: f64) -> Self {
        if (omega - omega_c).abs() <= CUTOFF_TOLERANCE * omega_c {
            Regime::AtCutoff
        } else if omega < omega_c {
            Regime::BelowCutoff
        } else {
            Regime::AboveCutoff
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::BelowCutoff => "below_cutoff",
            Regime::AboveCutoff => "above_cutoff",
            Regime::AtCutoff => "at_cutoff",
        }
    }
}

/// `A = |1 - ω_c²/ω²|`, forced to zero at the cutoff.
pub fn a_parameter(omega: f64, omega_c: f64) -> f64 {
    match Regime::classify(omega, omega_c) {
        Regime::AtCutoff => 0.0,
        _ => {
            let ratio = omega_c / omega;
            (1.0 - ratio * ratio).abs()
        }
    }
}

/// Lossless limit of the infinite-ladder impedance (`r, r' -> 0`):
/// `(ωL/2)(sqrt(A) + i)` below the cutoff, `(iωL/2)(1 + sqrt(A))` above,
/// `iωL/2` at the cutoff.
pub fn limit_impedance(cfg: &LowPassConfig) -> ComplexValue {
    let omega_c = cfg.omega_c();
    let half = cfg.omega * cfg.inductance / 2.0;
    let root_a = a_parameter(cfg.omega, omega_c).sqrt();
    match Regime::classify(cfg.omega, omega_c) {
        Regime::BelowCutoff => ComplexValue::new(half * root_a, half),
        Regime::AboveCutoff => ComplexValue::new(0.0, half * (1.0 + root_a)),
        Regime::AtCutoff => ComplexValue::new(0.0, half),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    #[serde(rename = "A")]
    pub a: f64,
    pub omega: f64,
    pub omega_c: f64,
    /// `|Im(1 + 4t)|`, the size of the loss regularization.
    #[serde(skip)]
    pub epsilon_scale: f64,
    /// Infinite-ladder impedance at the configured losses.
    pub z_plus: ComplexValue,
    /// Its lossless limit.
    pub z_plus_limit: ComplexValue,
}

/// Infinite-ladder impedance `z+ = Z1 p+` for the configured (lossy) filter.
pub fn z_plus(cfg: &LowPassConfig) -> Result<ComplexValue> {
    let params = make_impedances(cfg)?;
    let fp = fixed_points(params.t())?;
    Ok(params.z1() * fp.p_plus)
}

pub fn regime_analysis(cfg: &LowPassConfig) -> Result<RegimeReport> {
    let params = make_impedances(cfg)?;
    let fp = fixed_points(params.t())?;
    let omega_c = cfg.omega_c();
    Ok(RegimeReport {
        regime: Regime::classify(cfg.omega, omega_c),
        a: a_parameter(cfg.omega, omega_c),
        omega: cfg.omega,
        omega_c,
        epsilon_scale: (4.0 * params.t().im).abs(),
        z_plus: params.z1() * fp.p_plus,
        z_plus_limit: limit_impedance(cfg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub limit: ComplexValue,
    pub observed_order: f64,
}

/// Estimates `lim z+(r = r' = s)` as `s -> 0` from a decreasing set of
/// losses.
///
/// The order comes from a least-squares fit of `log|z(s_k) - z(s_{k+1})|`
/// against `log s_k`; one Richardson step on the two smallest losses then
/// removes the leading `s^order` term.
pub fn limit_extrapolation(base: &LowPassConfig, losses: &[f64]) -> Result<Extrapolation> {
    if losses.len() < 3 {
        return Err(Error::invalid("loss sequence needs at least 3 entries"));
    }
    if losses.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("losses must be positive and finite"));
    }
    if losses.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("losses must be strictly decreasing"));
    }
    let zs = losses
        .iter()
        .map(|&s| z_plus(&base.with_losses(s, s)?))
        .collect::<Result<Vec<_>>>()?;
    let diffs: Vec<f64> = zs.windows(2).map(|w| (w[0] - w[1]).norm()).collect();
    if diffs.contains(&0.0) {
        return Err(Error::Fit("impedance does not change with the loss".into()));
    }
    if diffs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Fit("differences are not decreasing; omega too close to the cutoff?".into()));
    }
    let xs: Vec<f64> = losses[..diffs.len()].iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
    let order = least_squares_slope(&xs, &ys);
    if !(order > 0.0 && order.is_finite()) {
        return Err(Error::Fit(format!("non-positive observed order {order}")));
    }
    let m = losses.len();
    let (s1, s2) = (losses[m - 2], losses[m - 1]);
    let (z1, z2) = (zs[m - 2], zs[m - 1]);
    let (w1, w2) = (s1.powf(order), s2.powf(order));
    let limit = (z2 * w1 - z1 * w2) / (w1 - w2);
    Ok(Extrapolation { limit, observed_order: order })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// High-pass section: inductance and capacitance swap places,
/// `Z1 = r + 1/(iωC)`, `Z2 = r' + iωL`, so `t = -ω²LC` when lossless.
pub fn highpass_params(cfg: &LowPassConfig) -> Result<LadderParams> {
    cfg.validate()?;
    let z1 = ComplexValue::new(cfg.series_loss, -1.0 / (cfg.omega * cfg.capacitance));
    let z2 = ComplexValue::new(cfg.shunt_loss, cfg.omega * cfg.inductance);
    LadderParams::new(z1, z2)
}

/// Boundary where `1 + 4t = 1 - 4ω²LC` changes sign: `1/(2 sqrt(LC))`.
/// The high-pass ladder propagates above it.
pub fn highpass_cutoff_frequency(inductance: f64, capacitance: f64) -> Result<f64> {
    Ok(cutoff_frequency(inductance, capacitance)? / 4.0)
}

/// Infinite-ladder impedance of the high-pass ladder.
pub fn highpass_z_plus(cfg: &LowPassConfig) -> Result<ComplexValue> {
    let params = highpass_params(cfg)?;
    Ok(params.z1() * fixed_points(params.t())?.p_plus)
}
