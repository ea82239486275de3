use std::io::{self, Write};

use crate::flow::{integrate_sampled, FlowOptions};
use crate::{FlowError, HamiltonianModel};

/// One sample of a six-dimensional Kerr orbit together with its conserved values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitRow {
    pub t: f64,
    pub state: [f64; 6],
    pub p: f64,
    pub beta_c: f64,
    pub carter: f64,
}

/// Samples a 6D model whose conserved list is `(p, β, 𝒦)`.
pub fn kerr_orbit_rows<M: HamiltonianModel + ?Sized>(
    model: &M,
    start: &[f64],
    times: &[f64],
    tol: f64,
) -> Result<Vec<OrbitRow>, FlowError> {
    if model.dimension() != 6 || model.conserved_names().len() < 3 {
        return Err(FlowError::InvalidArgument("orbit rows need a 6D model with (p, beta, carter)".into()));
    }
    let opts = FlowOptions { tol, jacobian: false, ..FlowOptions::default() };
    let mut rows = Vec::with_capacity(times.len() + 1);
    let push = |rows: &mut Vec<OrbitRow>, t: f64, x: &[f64]| {
        let c = model.conserved(x);
        let mut state = [0.0; 6];
        state.copy_from_slice(x);
        rows.push(OrbitRow { t, state, p: c[0], beta_c: c[1], carter: c[2] });
    };
    push(&mut rows, 0.0, start);
    for r in integrate_sampled(model, start, times, &opts)? {
        push(&mut rows, r.time, &r.end_state);
    }
    Ok(rows)
}

pub fn write_orbit_csv<W: Write>(mut w: W, rows: &[OrbitRow]) -> io::Result<()> {
    writeln!(w, "t,r,theta,phi,xi,alpha,beta,p,beta_c,carter")?;
    for row in rows {
        let s = &row.state;
        let vals = [row.t, s[0], s[1], s[2], s[3], s[4], s[5], row.p, row.beta_c, row.carter];
        let line: Vec<String> = vals.iter().map(|v| format!("{v:.11e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
