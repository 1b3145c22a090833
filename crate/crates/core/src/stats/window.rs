use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling window `[tau0, tau0 + span]` with `n_steps` equally spaced
/// points, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeWindow {
    pub tau0: f64,
    pub span: f64,
    pub n_steps: usize,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self {
            tau0: 1e7,
            span: 250.0,
            n_steps: 1000,
        }
    }
}

impl TimeWindow {
    pub fn new(tau0: f64, span: f64, n_steps: usize) -> Result<Self> {
        let w = Self {
            tau0,
            span,
            n_steps,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau0.is_finite() && self.tau0 >= 0.0) {
            return Err(Error::invalid(format!("tau0 must be >= 0, got {}", self.tau0)));
        }
        if !(self.span.is_finite() && self.span > 0.0) {
            return Err(Error::invalid(format!("span must be > 0, got {}", self.span)));
        }
        if self.n_steps < 2 {
            return Err(Error::invalid(format!(
                "n_steps must be >= 2, got {}",
                self.n_steps
            )));
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        self.tau0 + k as f64 * self.span / (self.n_steps - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_steps).map(|k| self.time(k)).collect()
    }
}

/// Arithmetic mean and population variance (`⟨x²⟩ − ⟨x⟩²`, floored at 0).
pub fn window_stats(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::invalid("window statistics need at least one sample"));
    }
    let n = samples.len() as f64;
    // Centering on the first sample keeps the one-pass form translation-stable.
    let shift = samples[0];
    let (s1, s2) = samples.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - shift;
        (a + d, b + d * d)
    });
    let m1 = s1 / n;
    let var = (s2 / n - m1 * m1).max(0.0);
    Ok((shift + m1, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_trace() {
        assert_eq!(window_stats(&[0.7; 10]).unwrap(), (0.7, 0.0));
    }

    #[test]
    fn two_point_trace() {
        let l2 = std::f64::consts::LN_2;
        let (m, v) = window_stats(&[0.0, l2]).unwrap();
        assert!((m - l2 / 2.0).abs() < 1e-15);
        assert!((v - l2 * l2 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn matches_two_pass_on_seeded_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let xs: Vec<f64> = (0..1000).map(|_| 3.0 + rng.gen::<f64>()).collect();
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 1000.0;
        let (m, v) = window_stats(&xs).unwrap();
        assert!((m - mean).abs() < 1e-13);
        assert!((v - var).abs() < 1e-13);
    }

    #[test]
    fn empty_trace_rejected() {
        assert!(window_stats(&[]).is_err());
    }

    #[test]
    fn window_grid_includes_endpoints() {
        let w = TimeWindow::new(10.0, 5.0, 6).unwrap();
        assert_eq!(w.times(), vec![10.0, 11.0, 12.0, 13.0, 14.0, 15.0]);
        assert!(TimeWindow::new(0.0, 0.0, 10).is_err());
        assert!(TimeWindow::new(0.0, 1.0, 1).is_err());
        assert!(TimeWindow::new(-1.0, 1.0, 3).is_err());
    }
}
