use crate::error::{Error, Result};
use crate::linalg::SpectralDecomposition;
use crate::quench::{
    diagonal_ensemble, diagonal_entropy, entropy_trace, ipr, overlap_matrix, OverlapMatrix,
    QuenchSetup,
};
use crate::stats::window::TimeWindow;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Saturation value of `S_dec − S̄_D` for a fully delocalized pure state.
pub const UNIVERSAL_GAP: f64 = 1.0 - EULER_GAMMA;

/// `(1−γ)(ξ−1)/(ξ+1)`: interpolates between the localized (ξ = 1, gap 0) and
/// delocalized (ξ → ∞, gap 1−γ) limits.
pub fn universal_curve(xi: f64) -> Result<f64> {
    if !(xi >= 1.0) {
        return Err(Error::invalid(format!("xi must be >= 1, got {xi}")));
    }
    if xi.is_infinite() {
        return Ok(UNIVERSAL_GAP);
    }
    Ok(UNIVERSAL_GAP * (xi - 1.0) / (xi + 1.0))
}

/// One quench configuration reduced to its equilibration observables.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibrationReport {
    pub model: String,
    pub lambda0: f64,
    pub delta_lambda: f64,
    pub n0: usize,
    pub dim: usize,
    pub xi: f64,
    pub s_dec: f64,
    /// Window mean of `S_D(τ)`.
    pub s_mean: f64,
    /// Window variance of `S_D(τ)`.
    pub s_var: f64,
    /// `s_dec − s_mean`
    pub gap: f64,
    /// `√s_var / s_mean`, defined as 0 when `s_mean = 0`.
    pub fluct: f64,
}

impl EquilibrationReport {
    pub fn f_xi(&self) -> f64 {
        universal_curve(self.xi.max(1.0)).unwrap_or(0.0)
    }
}

pub fn equilibration_report(
    setup: &QuenchSetup,
    unperturbed: &SpectralDecomposition,
    perturbed: &SpectralDecomposition,
    window: &TimeWindow,
) -> Result<EquilibrationReport> {
    let o = overlap_matrix(unperturbed, perturbed)?;
    report_from_overlaps(setup, &o, window)
}

/// Same as [`equilibration_report`] for an overlap matrix already at hand,
/// e.g. one shared by several initial states.
pub fn report_from_overlaps(
    setup: &QuenchSetup,
    o: &OverlapMatrix,
    window: &TimeWindow,
) -> Result<EquilibrationReport> {
    let xi = ipr(o, setup.n0)?;
    let s_dec = diagonal_entropy(&diagonal_ensemble(o, setup.n0)?);
    let trace = entropy_trace(o, setup.n0, window)?;
    let (s_mean, s_var) = trace.stats();
    let fluct = if s_mean > 0.0 { s_var.sqrt() / s_mean } else { 0.0 };
    Ok(EquilibrationReport {
        model: setup.model.name().to_string(),
        lambda0: setup.lambda0(),
        delta_lambda: setup.delta_lambda,
        n0: setup.n0,
        dim: o.dim(),
        xi,
        s_dec,
        s_mean,
        s_var,
        gap: s_dec - s_mean,
        fluct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_reference_points() {
        assert_eq!(universal_curve(1.0).unwrap(), 0.0);
        assert!((universal_curve(3.0).unwrap() - UNIVERSAL_GAP / 2.0).abs() < 1e-15);
        assert!((universal_curve(1e9).unwrap() - 0.422_784_335).abs() < 1e-6);
        assert_eq!(universal_curve(f64::INFINITY).unwrap(), UNIVERSAL_GAP);
        assert!(universal_curve(0.99).is_err());
        assert!(universal_curve(f64::NAN).is_err());
    }

    #[test]
    fn curve_is_increasing_and_bounded() {
        let mut prev = -1.0;
        for k in 0..2000 {
            let xi = 1.0 + 0.01 * k as f64 * (1.0 + k as f64);
            let f = universal_curve(xi).unwrap();
            assert!(f > prev && f < UNIVERSAL_GAP);
            prev = f;
        }
    }
}
