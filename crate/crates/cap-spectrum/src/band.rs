//! Complex banded matrices and their LU factorization with partial pivoting.

use num_complex::Complex64 as C64;

/// A square matrix with `kl` sub- and `ku` super-diagonals, stored by
/// diagonals: entry `(i, j)` lives at `data[(ku + i − j) + j·(kl + ku + 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![C64::new(0.0, 0.0); n * (kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        (self.ku + i - j) + j * (self.kl + self.ku + 1)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let w = self.kl + self.ku + 1;
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for j in 0..self.n {
            let xj = x[j];
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let col = &self.data[j * w..(j + 1) * w];
            for i in lo..=hi {
                y[i] += col[self.ku + i - j] * xj;
            }
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `A − z·I`.
    pub fn shifted(&self, z: C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let k = out.idx(i, i);
            out.data[k] -= z;
        }
        out
    }

    /// `s·A + t·I`.
    pub fn scaled_plus_identity(&self, s: C64, t: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        for i in 0..self.n {
            let k = out.idx(i, i);
            out.data[k] += t;
        }
        out
    }

    /// Largest `|a_ij|`, a cheap scale for tolerances.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> faer::Mat<C64> {
        faer::Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Nonzero entries as `(row, col, value)` in column order.
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for i in j.saturating_sub(self.ku)..=(j + self.kl).min(self.n - 1) {
                let v = self.get(i, j);
                if v != C64::new(0.0, 0.0) {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn lu(&self) -> BandLu {
        BandLu::new(self)
    }
}

/// `P·A = L·U` for a band matrix, with LAPACK-style interleaved row swaps.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    /// Upper bandwidth of `U`, `kl + ku`.
    kv: usize,
    data: Vec<C64>,
    pivots: Vec<usize>,
    /// First column with an exactly zero pivot, if any.
    pub zero_pivot: Option<usize>,
    /// `min |u_jj| / max |u_jj|`, a crude conditioning indicator.
    pub pivot_ratio: f64,
}

impl BandLu {
    fn ld(&self) -> usize {
        2 * self.kl + (self.kv - self.kl) + 1
    }

    fn at(&self, i: usize, j: usize) -> usize {
        (self.kv + i - j) + j * self.ld()
    }

    pub fn new(a: &BandMatrix) -> Self {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            kv,
            data: vec![C64::new(0.0, 0.0); n * ld],
            pivots: vec![0; n],
            zero_pivot: None,
            pivot_ratio: 0.0,
        };
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n.saturating_sub(1)) {
                let k = lu.at(i, j);
                lu.data[k] = a.get(i, j);
            }
        }
        let mut ju = 0usize;
        let (mut umin, mut umax) = (f64::INFINITY, 0.0f64);
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = -1.0;
            for r in 0..=km {
                let v = lu.data[lu.at(j + r, j)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.pivots[j] = j + p;
            umin = umin.min(best);
            umax = umax.max(best);
            if best == 0.0 {
                lu.zero_pivot.get_or_insert(j);
                continue;
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let (x, y) = (lu.at(j, c), lu.at(j + p, c));
                    lu.data.swap(x, y);
                }
            }
            let piv = lu.data[lu.at(j, j)];
            let inv = piv.inv();
            for r in 1..=km {
                let k = lu.at(j + r, j);
                lu.data[k] *= inv;
            }
            for c in j + 1..=ju {
                let t = lu.data[lu.at(j, c)];
                if t == C64::new(0.0, 0.0) {
                    continue;
                }
                for r in 1..=km {
                    let l = lu.data[lu.at(j + r, j)];
                    let k = lu.at(j + r, c);
                    lu.data[k] -= l * t;
                }
            }
        }
        lu.pivot_ratio = if umax > 0.0 { umin / umax } else { 0.0 };
        lu
    }

    pub fn is_singular(&self) -> bool {
        self.zero_pivot.is_some()
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            for r in 1..=km {
                b[j + r] -= self.data[self.at(j + r, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.data[self.at(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(self.kv)..j {
                b[i] -= self.data[self.at(i, j)] * bj;
            }
        }
    }

    /// Overwrites `b` with `A⁻ᴴ b`.
    pub fn solve_adjoint_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        // Uᴴ y = b
        for j in 0..n {
            let mut s = b[j];
            for i in j.saturating_sub(self.kv)..j {
                s -= self.data[self.at(i, j)].conj() * b[i];
            }
            b[j] = s / self.data[self.at(j, j)].conj();
        }
        // Lᴴ and the row swaps, in reverse order
        for j in (0..n).rev() {
            let km = self.kl.min(n - 1 - j);
            let mut s = b[j];
            for r in 1..=km {
                s -= self.data[self.at(j + r, j)].conj() * b[j + r];
            }
            b[j] = s;
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Unconjugated bilinear form `aᵀb`.
pub(crate) fn dot_t(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
