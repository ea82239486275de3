use std::io::{self, Write};

use num_complex::Complex64 as C64;

use crate::band::BandMatrix;
use crate::model::CapProblem;

/// Staggered first difference at midpoint `j` (between nodes `j − 1` and `j`,
/// with node `−1` and node `n` the Dirichlet ends) as `(interior index, weight)`.
/// Ghosts beyond the ends are odd reflections.
fn staggered_row(j: usize, n: usize, order: usize, dx: f64) -> Vec<(usize, f64)> {
    let stencil: &[(isize, f64)] = if order == 2 {
        &[(-1, -1.0), (0, 1.0)]
    } else {
        &[(-2, 1.0 / 24.0), (-1, -27.0 / 24.0), (0, 27.0 / 24.0), (1, -1.0 / 24.0)]
    };
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(4);
    for &(off, w) in stencil {
        // node index k relative to the interior numbering 0..n
        let k = j as isize + off;
        let (k, sign) = if k == -2 {
            (0, -1.0)
        } else if k == n as isize + 1 {
            (n as isize - 1, -1.0)
        } else {
            (k, 1.0)
        };
        if k < 0 || k >= n as isize {
            continue;
        }
        let k = k as usize;
        match out.iter_mut().find(|(i, _)| *i == k) {
            Some(e) => e.1 += sign * w / dx,
            None => out.push((k, sign * w / dx)),
        }
    }
    out
}

/// `A = h²·Gᵀ diag(m) G + diag(v) − i·diag(W)` with `G` the staggered
/// difference, so the real part is symmetric by construction.
pub fn discretize(problem: &CapProblem) -> BandMatrix {
    let n = problem.n();
    let bw = if problem.order == 2 { 1 } else { 3 };
    let mut a = BandMatrix::zeros(n, bw, bw);
    let dx = problem.grid.dx();
    let h2 = problem.h * problem.h;
    for j in 0..=n {
        let row = staggered_row(j, n, problem.order, dx);
        let m = problem.mass_weight[j];
        for &(p, wp) in &row {
            for &(q, wq) in &row {
                a.add(p, q, C64::new(h2 * m * wp * wq, 0.0));
            }
        }
    }
    for i in 0..n {
        a.add(i, i, C64::new(problem.potential[i], -problem.absorber[i]));
    }
    a
}

/// Coordinate dump, one `row col re im` line per stored nonzero (1-based).
pub fn write_coordinate<W: Write>(matrix: &BandMatrix, out: &mut W) -> io::Result<()> {
    writeln!(out, "% {} {}", matrix.n(), matrix.n())?;
    for (i, j, v) in matrix.entries() {
        writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im)?;
    }
    Ok(())
}
