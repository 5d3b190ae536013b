use crate::error::{Error, Result};

/// Paired-sample t statistic over matched observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    /// Zero spread in the differences; `t` is then `0` (no mean difference)
    /// or a signed infinity.
    pub degenerate: bool,
}

/// `t = mean(d) / (sd(d)/√k)` with `d_i = a_i − b_i` and the sample (k−1) sd.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::Pairing(a.len(), b.len()));
    }
    let k = a.len();
    if k < 2 {
        return Err(Error::Config(format!("paired t-test needs at least 2 pairs, got {k}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / k as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let sd = var.sqrt();
    let df = k - 1;
    if sd == 0.0 {
        let t = if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(mean)
        };
        return Ok(TTestResult {
            t,
            df,
            mean_diff: mean,
            sd_diff: 0.0,
            degenerate: true,
        });
    }
    Ok(TTestResult {
        t: mean / (sd / (k as f64).sqrt()),
        df,
        mean_diff: mean,
        sd_diff: sd,
        degenerate: false,
    })
}
