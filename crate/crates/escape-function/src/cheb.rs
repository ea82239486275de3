/// Chebyshev interpolant of a function on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    pub a: f64,
    pub b: f64,
    coef: Vec<f64>,
    dcoef: Vec<f64>,
}

impl Chebyshev {
    /// Chebyshev–Gauss nodes for `n` coefficients.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let t = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect()
    }

    /// Interpolates values given at [`Chebyshev::nodes`].
    pub fn from_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len();
        let mut coef = vec![0.0; n];
        for (k, c) in coef.iter_mut().enumerate() {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(j, f)| f * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                .sum();
            *c = 2.0 * s / n as f64;
        }
        coef[0] *= 0.5;
        // derivative series in t, then chain rule dt/dx
        let mut dcoef = vec![0.0; n + 1];
        for k in (1..n).rev() {
            dcoef[k - 1] = dcoef[k + 1] + 2.0 * k as f64 * coef[k];
        }
        dcoef[0] *= 0.5;
        dcoef.truncate(n.max(1));
        let scale = 2.0 / (b - a);
        dcoef.iter_mut().for_each(|c| *c *= scale);
        Self { a, b, coef, dcoef }
    }

    fn clenshaw(c: &[f64], t: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + c[0]
    }

    fn t(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn value(&self, x: f64) -> f64 {
        Self::clenshaw(&self.coef, self.t(x))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        Self::clenshaw(&self.dcoef, self.t(x))
    }

    /// Magnitude of the trailing coefficients, a proxy for truncation error.
    pub fn tail(&self) -> f64 {
        self.coef.iter().rev().take(4).map(|c| c.abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_exp() {
        let xs = Chebyshev::nodes(-0.5, 1.5, 30);
        let c = Chebyshev::from_values(-0.5, 1.5, &xs.iter().map(|x| x.exp()).collect::<Vec<_>>());
        for &x in &[-0.5, 0.0, 0.37, 1.5] {
            assert!((c.value(x) - f64::exp(x)).abs() < 1e-13);
            assert!((c.derivative(x) - f64::exp(x)).abs() < 1e-11);
        }
    }
}
