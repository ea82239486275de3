/// Least-squares line `y ≈ slope·x + intercept`; `residual` is the RMS misfit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> RateFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    assert!(x.len() >= 2, "need at least two points");
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    RateFit { slope, intercept, residual: (ss / n).sqrt() }
}

/// Slope fitted over the last half of the samples.
pub fn tail_rate(t: &[f64], y: &[f64]) -> RateFit {
    let start = t.len() / 2;
    let start = start.min(t.len().saturating_sub(2));
    fit_line(&t[start..], &y[start..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = fit_line(&x, &y);
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12 && f.residual < 1e-12);
    }

    #[test]
    fn tail_ignores_transient() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&v| if v < 10.0 { 0.0 } else { 2.0 * v }).collect();
        assert!((tail_rate(&t, &y).slope - 2.0).abs() < 1e-12);
    }
}
