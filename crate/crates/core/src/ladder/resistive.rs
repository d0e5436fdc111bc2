use serde::Serialize;

use crate::error::{Error, Result};

/// Limit of the resistive ladder `Z_{k+1} = R + p Z_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResistiveLimit {
    /// `|p| < 1`: the partial sums converge to `R/(1 - p)`.
    Convergent { value: f64 },
    /// `|p| >= 1`: no limit. `formal` is `R/(1 - p)`, which is not the value
    /// of the series; `None` for `p = 1`.
    Divergent { formal: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistiveLadder {
    pub resistance: f64,
    pub ratio: f64,
    /// `Z_1, ..., Z_n`.
    pub partial_sums: Vec<f64>,
    pub limit: ResistiveLimit,
}

impl ResistiveLadder {
    /// `Z_{k+1} = R/(1 - p) + p^k (Z_1 - R/(1 - p))`, for `p != 1`.
    pub fn closed_form(&self, k_plus_1: usize) -> Option<f64> {
        if self.ratio == 1.0 || k_plus_1 == 0 {
            return None;
        }
        let fixed = self.resistance / (1.0 - self.ratio);
        let z1 = *self.partial_sums.first()?;
        Some(fixed + self.ratio.powi(k_plus_1 as i32 - 1) * (z1 - fixed))
    }
}

/// Partial sums of a ladder of resistances `R, pR, p^2 R, ...`
/// (`Z_{k+1} = R + p Z_k`, `Z_1 = R` unless overridden).
pub fn resistive_ladder(resistance: f64, ratio: f64, n: usize, z1_override: Option<f64>) -> Result<ResistiveLadder> {
    if n == 0 {
        return Err(Error::invalid("number of sections must be at least 1"));
    }
    if !resistance.is_finite() || !ratio.is_finite() {
        return Err(Error::invalid("R and p must be finite"));
    }
    let z1 = z1_override.unwrap_or(resistance);
    let partial_sums: Vec<f64> = std::iter::successors(Some(z1), |z| Some(resistance + ratio * z))
        .take(n)
        .collect();
    let limit = if ratio.abs() < 1.0 {
        ResistiveLimit::Convergent { value: resistance / (1.0 - ratio) }
    } else {
        let formal = (ratio != 1.0).then(|| resistance / (1.0 - ratio));
        ResistiveLimit::Divergent { formal }
    };
    Ok(ResistiveLadder { resistance, ratio, partial_sums, limit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_ladder() {
        let lad = resistive_ladder(1.0, 0.5, 5, None).unwrap();
        assert_eq!(lad.partial_sums, vec![1.0, 1.5, 1.75, 1.875, 1.9375]);
        assert_eq!(lad.limit, ResistiveLimit::Convergent { value: 2.0 });
    }

    #[test]
    fn doubling_ladder_is_divergent() {
        let lad = resistive_ladder(1.0, 2.0, 4, None).unwrap();
        assert_eq!(lad.partial_sums, vec![1.0, 3.0, 7.0, 15.0]);
        assert_eq!(lad.limit, ResistiveLimit::Divergent { formal: Some(-1.0) });
    }

    #[test]
    fn zero_ratio_and_unit_ratio() {
        let lad = resistive_ladder(3.0, 0.0, 6, None).unwrap();
        assert!(lad.partial_sums.iter().all(|&z| z == 3.0));
        assert_eq!(lad.limit, ResistiveLimit::Convergent { value: 3.0 });

        let lad = resistive_ladder(1.0, 1.0, 3, None).unwrap();
        assert_eq!(lad.partial_sums, vec![1.0, 2.0, 3.0]);
        assert_eq!(lad.limit, ResistiveLimit::Divergent { formal: None });
        assert_eq!(lad.closed_form(2), None);
    }

    #[test]
    fn override_at_fixed_point_is_constant() {
        // Z_1 = R/(1 - p) makes every partial sum equal to it
        let lad = resistive_ladder(1.0, 2.0, 10, Some(-1.0)).unwrap();
        assert!(lad.partial_sums.iter().all(|&z| z == -1.0));
    }

    #[test]
    fn rejects_empty() {
        assert!(resistive_ladder(1.0, 0.5, 0, None).is_err());
    }
}
