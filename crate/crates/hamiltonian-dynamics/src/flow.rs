use nalgebra::DMatrix;

use crate::integrator::Dp5;
use crate::{FlowError, HamiltonianModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub jacobian: bool,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol: 1e-10, jacobian: true, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub end_state: Vec<f64>,
    /// `dφᵗ` at the start point; identity when the Jacobian was not requested.
    pub jacobian: DMatrix<f64>,
    /// Absolute change of each conserved quantity of the model.
    pub drift: Vec<f64>,
    pub steps: usize,
    pub time: f64,
}

fn rhs_for<'a, M: HamiltonianModel + ?Sized>(
    model: &'a M,
    jacobian: bool,
) -> impl FnMut(&[f64], &mut [f64]) -> bool + 'a {
    let d = model.dimension();
    let n = d / 2;
    let mut hess = vec![0.0; d * d];
    let mut gen = vec![0.0; d * d];
    move |y: &[f64], dy: &mut [f64]| {
        let x = &y[..d];
        model.field(x, &mut dy[..d]);
        if jacobian {
            model.hessian(x, &mut hess);
            // generator Ω·Hess with Ω = [[0, I], [−I, 0]]
            for i in 0..n {
                for k in 0..d {
                    gen[i * d + k] = hess[(n + i) * d + k];
                    gen[(n + i) * d + k] = -hess[i * d + k];
                }
            }
            let jm = &y[d..];
            let out = &mut dy[d..];
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += gen[i * d + k] * jm[k * d + j];
                    }
                    out[i * d + j] = acc;
                }
            }
        }
        dy.iter().all(|v| v.is_finite())
    }
}

fn validate<M: HamiltonianModel + ?Sized>(model: &M, start: &[f64], opts: &FlowOptions) -> Result<(), FlowError> {
    let d = model.dimension();
    if start.len() != d || d % 2 != 0 {
        return Err(FlowError::InvalidArgument(format!("start has length {}, model dimension {d}", start.len())));
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(FlowError::InvalidArgument(format!("tolerance {}", opts.tol)));
    }
    if !model.in_chart(start) {
        return Err(FlowError::ChartExit { time: 0.0 });
    }
    Ok(())
}

fn initial_vector(start: &[f64], jacobian: bool) -> Vec<f64> {
    let d = start.len();
    let mut y = start.to_vec();
    if jacobian {
        let mut id = vec![0.0; d * d];
        for i in 0..d {
            id[i * d + i] = 1.0;
        }
        y.extend(id);
    }
    y
}

fn result_from<M: HamiltonianModel + ?Sized>(
    model: &M,
    start_conserved: &[f64],
    y: &[f64],
    jacobian: bool,
    steps: usize,
    time: f64,
) -> FlowResult {
    let d = model.dimension();
    let end = y[..d].to_vec();
    let jac = if jacobian { DMatrix::from_row_slice(d, d, &y[d..]) } else { DMatrix::identity(d, d) };
    let drift = model.conserved(&end).iter().zip(start_conserved).map(|(a, b)| (a - b).abs()).collect();
    FlowResult { end_state: end, jacobian: jac, drift, steps, time }
}

/// Integrates the orbit (and optionally `dφᵗ`) for time `time`, which may be
/// negative. `observer(t, y)` sees every accepted step; `y` holds the state
/// followed by the row-major Jacobian when requested.
pub fn integrate_with<M: HamiltonianModel + ?Sized>(
    model: &M,
    start: &[f64],
    time: f64,
    opts: &FlowOptions,
    mut observer: impl FnMut(f64, &[f64]),
) -> Result<FlowResult, FlowError> {
    validate(model, start, opts)?;
    let d = model.dimension();
    let c0 = model.conserved(start);
    let mut y = initial_vector(start, opts.jacobian);
    let mut dp = Dp5::new(rhs_for(model, opts.jacobian), y.len(), opts.tol);
    dp.max_steps = opts.max_steps;
    dp.run(&mut y, 0.0, time, |t, yn| {
        let ok = model.in_chart(&yn[..d]);
        if ok {
            observer(t, yn);
        }
        ok
    })?;
    Ok(result_from(model, &c0, &y, opts.jacobian, dp.steps, time))
}

/// `φᵗ(start)` with its Jacobian; `tol` must lie in `[1e−13, 1e−6]`.
pub fn integrate_flow<M: HamiltonianModel + ?Sized>(
    model: &M,
    start: &[f64],
    time: f64,
    tol: f64,
) -> Result<FlowResult, FlowError> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(FlowError::InvalidArgument(format!("tolerance {tol} outside [1e-13, 1e-6]")));
    }
    integrate_with(model, start, time, &FlowOptions { tol, ..FlowOptions::default() }, |_, _| {})
}

pub fn tangent_flow<M: HamiltonianModel + ?Sized>(
    model: &M,
    start: &[f64],
    time: f64,
    tol: f64,
) -> Result<DMatrix<f64>, FlowError> {
    Ok(integrate_flow(model, start, time, tol)?.jacobian)
}

/// Flow results at each of the increasing times `times`, all measured from
/// `start` (so each Jacobian is the full `dφᵗ`).
pub fn integrate_sampled<M: HamiltonianModel + ?Sized>(
    model: &M,
    start: &[f64],
    times: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<FlowResult>, FlowError> {
    validate(model, start, opts)?;
    let d = model.dimension();
    let c0 = model.conserved(start);
    let mut y = initial_vector(start, opts.jacobian);
    let mut dp = Dp5::new(rhs_for(model, opts.jacobian), y.len(), opts.tol);
    dp.max_steps = opts.max_steps;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &ts in times {
        t = dp.run(&mut y, t, ts, |_, yn| model.in_chart(&yn[..d]))?;
        out.push(result_from(model, &c0, &y, opts.jacobian, dp.steps, ts));
    }
    Ok(out)
}

/// `log σᵢ(dφᵗ)` (descending) at `samples` equally spaced times in `(0, horizon]`.
pub fn finite_time_exponents<M: HamiltonianModel + ?Sized>(
    model: &M,
    start: &[f64],
    horizon: f64,
    samples: usize,
) -> Result<Vec<(f64, Vec<f64>)>, FlowError> {
    if !(horizon > 0.0) || samples == 0 {
        return Err(FlowError::InvalidArgument(format!("horizon {horizon}, samples {samples}")));
    }
    let times: Vec<f64> = (1..=samples).map(|k| horizon * k as f64 / samples as f64).collect();
    let opts = FlowOptions { tol: 1e-12, ..FlowOptions::default() };
    let res = integrate_sampled(model, start, &times, &opts)?;
    Ok(res
        .into_iter()
        .map(|r| {
            let mut sv: Vec<f64> = r.jacobian.singular_values().iter().map(|s| s.ln()).collect();
            sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
            (r.time, sv)
        })
        .collect())
}

/// Frobenius norm of `JᵀΩJ − Ω`.
pub fn symplectic_defect(j: &DMatrix<f64>) -> f64 {
    let d = j.nrows();
    let n = d / 2;
    let mut omega = DMatrix::zeros(d, d);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    (j.transpose() * &omega * j - omega).norm()
}
