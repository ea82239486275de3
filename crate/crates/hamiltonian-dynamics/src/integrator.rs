//! Dormand–Prince 5(4) with PI step-size control.

use crate::FlowError;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Dp5<F> {
    rhs: F,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    pub atol: f64,
    pub rtol: f64,
    pub h: f64,
    err_old: f64,
    fsal_valid: bool,
    pub steps: usize,
    pub max_steps: usize,
}

/// `rhs(y, dy)` returns `false` when `y` lies outside the domain of the field.
impl<F: FnMut(&[f64], &mut [f64]) -> bool> Dp5<F> {
    pub fn new(rhs: F, n: usize, tol: f64) -> Self {
        Self {
            rhs,
            k: vec![vec![0.0; n]; 7],
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
            atol: tol,
            rtol: tol,
            h: 0.0,
            err_old: 1e-4,
            fsal_valid: false,
            steps: 0,
            max_steps: 5_000_000,
        }
    }

    /// Integrates from `t` to `t_end` (either direction). `accept(t, y)` runs
    /// after every accepted step and may veto it by returning `false`, which
    /// stops integration with a chart exit at the last good time.
    pub fn run(
        &mut self,
        y: &mut [f64],
        mut t: f64,
        t_end: f64,
        mut accept: impl FnMut(f64, &[f64]) -> bool,
    ) -> Result<f64, FlowError> {
        let dir = if t_end >= t { 1.0 } else { -1.0 };
        if t == t_end {
            return Ok(t);
        }
        if !self.fsal_valid {
            if !(self.rhs)(y, &mut self.k[0]) {
                return Err(FlowError::ChartExit { time: t });
            }
            self.fsal_valid = true;
        }
        if self.h == 0.0 {
            self.h = self.initial_step(y, dir);
        }
        self.h = self.h.abs() * dir;
        let span = (t_end - t).abs();
        let h_min = 1e-14 * span.max(1.0);
        loop {
            let remaining = t_end - t;
            if remaining * dir <= 1e-15 * span.max(1.0) {
                return Ok(t_end);
            }
            let mut last = false;
            let mut h = self.h;
            if (h.abs()) >= remaining.abs() {
                h = remaining;
                last = true;
            }
            if h.abs() < h_min {
                return Err(FlowError::StepFailure { time: t, step: h });
            }
            if self.steps >= self.max_steps {
                return Err(FlowError::StepFailure { time: t, step: h });
            }
            match self.attempt(y, h) {
                Some(err) if err <= 1.0 => {
                    self.steps += 1;
                    let t_new = if last { t_end } else { t + h };
                    if !accept(t_new, &self.y_new) {
                        return Err(FlowError::ChartExit { time: t_new });
                    }
                    y.copy_from_slice(&self.y_new);
                    let (k0, rest) = self.k.split_at_mut(1);
                    k0[0].copy_from_slice(&rest[5]);
                    t = t_new;
                    let err = err.max(1e-10);
                    let fac = 0.9 * err.powf(-0.17) * self.err_old.powf(0.04);
                    let fac = fac.clamp(0.2, 10.0);
                    self.err_old = err;
                    // keep the natural step when the last one was clipped
                    if !last || fac < 1.0 {
                        self.h = h * fac;
                    }
                    if last {
                        return Ok(t);
                    }
                }
                Some(err) => {
                    let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                    self.h = h * fac;
                }
                None => {
                    self.h = h * 0.25;
                }
            }
        }
    }

    fn initial_step(&mut self, y: &[f64], dir: f64) -> f64 {
        let sc = |v: f64| self.atol + self.rtol * v.abs();
        let n = y.len() as f64;
        let d0 = (y.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y.iter().zip(&self.k[0]).map(|(v, f)| (f / sc(*v)).powi(2)).sum::<f64>() / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(1.0) * dir
    }

    fn attempt(&mut self, y: &[f64], h: f64) -> Option<f64> {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let tail = &mut self.k[s..];
            if !(self.rhs)(&self.tmp, &mut tail[0]) {
                return None;
            }
            if s == 6 {
                self.y_new.copy_from_slice(&self.tmp);
            }
        }
        let mut acc = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * self.k[j][i];
            }
            let e = h * e;
            let sc = self.atol + self.rtol * y[i].abs().max(self.y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / n as f64).sqrt();
        if err.is_finite() && self.y_new.iter().all(|v| v.is_finite()) {
            Some(err)
        } else {
            None
        }
    }
}
