use crate::{Error, Result};

/// Least-squares exponential fit `q(t) ≈ A e^{−ωt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub omega: f64,
    pub amplitude: f64,
    /// Coefficient of determination of the fit of `log q` against `t`.
    pub quality: f64,
    /// First time with `q < ½ q(0)`; the fit uses samples from here on.
    pub window_start: f64,
    pub points: usize,
}

/// Minimum number of post-transient samples.
pub const MIN_FIT_POINTS: usize = 10;

/// Fits the exponential decay rate of `q` past the transient, i.e. from the
/// first sample with `q < ½ q(0)`. Non-positive samples are skipped.
pub fn fit_decay_rate(series: &[(f64, f64)]) -> Result<DecayFit> {
    let (_, q0) = *series
        .first()
        .ok_or_else(|| Error::InsufficientData("empty series".into()))?;
    let start = series
        .iter()
        .position(|&(_, q)| q < 0.5 * q0)
        .ok_or_else(|| Error::InsufficientData("q never drops below half its initial value".into()))?;
    let pts: Vec<(f64, f64)> = series[start..]
        .iter()
        .filter(|&&(_, q)| q > 0.0 && q.is_finite())
        .map(|&(t, q)| (t, q.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} samples past the transient, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    if stt == 0.0 {
        return Err(Error::InsufficientData("all samples at one time".into()));
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let ss_res: f64 = pts
        .iter()
        .map(|&(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    let quality = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        omega: -slope,
        amplitude: intercept.exp(),
        quality,
        window_start: series[start].0,
        points: pts.len(),
    })
}

/// Observed order `log₂(coarse/fine)` for errors at spacings `h` and `h/2`.
pub fn convergence_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
