use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogitOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the largest absolute score component.
    pub score_tolerance: f64,
    /// Added to the information diagonal when a Newton step is near singular.
    pub ridge: f64,
}

impl Default for LogitOptions {
    fn default() -> Self {
        LogitOptions { max_iterations: 100, score_tolerance: 1e-8, ridge: 1e-8 }
    }
}

/// Fit of `P(y = 1) = σ(intercept + coefficient · x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub predictor: String,
    pub coefficient: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub intercept_std_error: f64,
    pub z_value: f64,
    pub p_value: f64,
    /// McFadden: `1 − ℓ(model)/ℓ(null)`.
    pub pseudo_r2: f64,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    /// Score components `Σ(y − p)` and `Σ x(y − p)` at the estimate, original units.
    pub score: [f64; 2],
    pub n_observations: usize,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `ln(1 + e^x)` without overflow.
fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(a: f64, b: f64, t: &[f64], y: &[bool]) -> f64 {
    t.iter()
        .zip(y)
        .map(|(ti, yi)| {
            let eta = a + b * ti;
            if *yi {
                -log1pexp(-eta)
            } else {
                -log1pexp(eta)
            }
        })
        .sum()
}

struct Moments {
    score: [f64; 2],
    info: [[f64; 2]; 2],
}

fn moments(a: f64, b: f64, t: &[f64], y: &[bool]) -> Moments {
    let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (ti, yi) in t.iter().zip(y) {
        let p = sigmoid(a + b * ti);
        let r = f64::from(u8::from(*yi)) - p;
        let w = p * (1.0 - p);
        g0 += r;
        g1 += ti * r;
        h00 += w;
        h01 += w * ti;
        h11 += w * ti * ti;
    }
    Moments { score: [g0, g1], info: [[h00, h01], [h01, h11]] }
}

fn invert(h: [[f64; 2]; 2], ridge: f64) -> Option<[[f64; 2]; 2]> {
    let scale = h[0][0].abs().max(h[1][1].abs()).max(f64::MIN_POSITIVE);
    let mut m = h;
    let mut det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.abs() > 1e-12 * scale * scale) {
        m[0][0] += ridge * scale.max(1.0);
        m[1][1] += ridge * scale.max(1.0);
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    }
    if !(det.is_finite() && det != 0.0) {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

/// Classes separate perfectly along a single predictor.
fn separated(x: &[f64], y: &[bool]) -> bool {
    let (mut min1, mut max1, mut min0, mut max0) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (xi, yi) in x.iter().zip(y) {
        if *yi {
            min1 = min1.min(*xi);
            max1 = max1.max(*xi);
        } else {
            min0 = min0.min(*xi);
            max0 = max0.max(*xi);
        }
    }
    max0 <= min1 || max1 <= min0
}

pub fn logit_fit(predictor: &str, x: &[f64], y: &[bool]) -> Result<RegressionResult> {
    logit_fit_with(predictor, x, y, &LogitOptions::default())
}

/// Newton-Raphson (IRLS) on the standardized predictor; estimates and
/// standard errors are mapped back to the original scale.
pub fn logit_fit_with(predictor: &str, x: &[f64], y: &[bool], opts: &LogitOptions) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::invalid("y", format!("length {} differs from x length {}", y.len(), x.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid("x", "at least three observations are required"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("x", "non-finite predictor value"));
    }
    let n1 = y.iter().filter(|v| **v).count();
    if n1 == 0 || n1 == n {
        return Err(Error::domain("both outcome classes must be present"));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf).sqrt();
    if !(sd > 0.0) || sd < 1e-12 * mean.abs().max(1.0) {
        return Err(Error::domain("predictor is constant"));
    }
    let t: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();

    let prevalence = n1 as f64 / nf;
    let null_ll = n1 as f64 * prevalence.ln() + (n - n1) as f64 * (1.0 - prevalence).ln();
    let sep = separated(x, y);

    let (mut a, mut b) = ((prevalence / (1.0 - prevalence)).ln(), 0.0);
    let mut ll = log_likelihood(a, b, &t, y);
    let mut converged = false;
    let mut iterations = 0;
    let mut m = moments(a, b, &t, y);
    while iterations < opts.max_iterations {
        if m.score[0].abs().max(m.score[1].abs()) < opts.score_tolerance {
            converged = true;
            break;
        }
        let Some(inv) = invert(m.info, opts.ridge) else { break };
        let da = inv[0][0] * m.score[0] + inv[0][1] * m.score[1];
        let db = inv[1][0] * m.score[0] + inv[1][1] * m.score[1];
        // Step halving keeps the likelihood non-decreasing.
        let mut step = 1.0;
        loop {
            let (na, nb) = (a + step * da, b + step * db);
            let nll = log_likelihood(na, nb, &t, y);
            if nll >= ll - 1e-12 * ll.abs() || step < 1e-10 {
                a = na;
                b = nb;
                ll = nll;
                break;
            }
            step /= 2.0;
        }
        iterations += 1;
        m = moments(a, b, &t, y);
    }
    if converged {
        // One more Newton step takes the score to rounding level.
        if let Some(inv) = invert(m.info, opts.ridge) {
            let na = a + inv[0][0] * m.score[0] + inv[0][1] * m.score[1];
            let nb = b + inv[1][0] * m.score[0] + inv[1][1] * m.score[1];
            let nll = log_likelihood(na, nb, &t, y);
            if nll >= ll {
                a = na;
                b = nb;
                ll = nll;
                m = moments(a, b, &t, y);
            }
        }
    }
    let mut warning = None;
    if sep {
        converged = false;
        warning = Some("outcome classes are perfectly separated by the predictor; estimates diverge".to_owned());
    } else if !converged {
        warning = Some(format!("no convergence after {iterations} iterations"));
    }

    let inv = invert(m.info, opts.ridge).unwrap_or([[f64::NAN; 2]; 2]);
    let se_bt = inv[1][1].sqrt();
    let coefficient = b / sd;
    let intercept = a - b * mean / sd;
    let k = mean / sd;
    let var_intercept = inv[0][0] + k * k * inv[1][1] - 2.0 * k * inv[0][1];
    let z_value = b / se_bt;
    let p_value = if z_value.is_finite() { libm::erfc(z_value.abs() / std::f64::consts::SQRT_2) } else { f64::NAN };
    let score = [m.score[0], sd * m.score[1] + mean * m.score[0]];
    Ok(RegressionResult {
        predictor: predictor.to_owned(),
        coefficient,
        intercept,
        std_error: se_bt / sd,
        intercept_std_error: var_intercept.max(0.0).sqrt(),
        z_value,
        p_value,
        pseudo_r2: 1.0 - ll / null_ll,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        score,
        n_observations: n,
        iterations,
        converged,
        warning,
    })
}
