//! Small dense-structure solvers: tridiagonal systems and banded SPD factorizations.

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. `lower[i]` couples row `i + 1` to
/// column `i`, `upper[i]` couples row `i` to column `i + 1`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Thomas algorithm. No pivoting: intended for diagonally dominant or SPD
    /// systems, which is what the discretizations here produce.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        if piv == 0.0 || !piv.is_finite() {
            return Err(singular(0, piv));
        }
        if n > 1 {
            c[0] = self.upper[0] / piv;
        }
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if piv == 0.0 || !piv.is_finite() {
                return Err(singular(i, piv));
            }
            if i + 1 < n {
                c[i] = self.upper[i] / piv;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

fn singular(row: usize, piv: f64) -> Error {
    Error::Scheme {
        op: "tridiagonal_solve",
        msg: format!("zero or non-finite pivot {piv:e} at row {row}"),
    }
}

/// Symmetric positive definite band matrix, lower band stored row-major:
/// `band[i * (bw + 1) + (bw - (i - j))]` holds entry `(i, j)` for `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    /// Adds `v` to entry `(i, j)`; only the lower triangle (`j <= i`) is stored.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let k = self.idx(i, j);
        self.band[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            return 0.0;
        }
        self.band[self.idx(i, j)]
    }

    /// In-place banded Cholesky, `A = L Lᵀ`.
    pub fn factor(mut self) -> Result<BandedCholesky> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                // rows i and j are contiguous in k over k0..j
                let ri = i * w + bw - (i - k0);
                let rj = j * w + bw - (j - k0);
                let len = j - k0;
                let dotp: f64 = self.band[ri..ri + len]
                    .iter()
                    .zip(&self.band[rj..rj + len])
                    .map(|(a, b)| a * b)
                    .sum();
                let s = self.band[self.idx(i, j)] - dotp;
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Scheme {
                            op: "banded_cholesky",
                            msg: format!("matrix not positive definite at row {i} (pivot {s:e})"),
                        });
                    }
                    let k = self.idx(i, i);
                    self.band[k] = s.sqrt();
                } else {
                    let k = self.idx(i, j);
                    self.band[k] = s / self.band[self.idx(j, j)];
                }
            }
        }
        Ok(BandedCholesky { l: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l: BandedSpd,
}

impl BandedCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let (n, bw) = (l.n, l.bw);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= l.band[l.idx(i, k)] * y[k];
            }
            y[i] = s / l.band[l.idx(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= l.band[l.idx(k, i)] * y[k];
            }
            y[i] = s / l.band[l.idx(i, i)];
        }
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_product() {
        let mut t = Tridiagonal::zeros(5);
        for i in 0..5 {
            t.diag[i] = 4.0 + i as f64;
        }
        for i in 0..4 {
            t.lower[i] = -1.0;
            t.upper[i] = -0.5 * (i as f64 + 1.0);
        }
        let x = vec![1.0, -2.0, 0.5, 3.0, -1.0];
        let b = t.mul_vec(&x);
        let got = t.solve(&b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-13);
        }
    }

    #[test]
    fn banded_cholesky_solves_2d_laplacian() {
        // 3x4 grid five-point Laplacian, bandwidth 3
        let (nx, ny) = (3usize, 4usize);
        let n = nx * ny;
        let mut a = BandedSpd::zeros(n, nx);
        for j in 0..ny {
            for i in 0..nx {
                let p = j * nx + i;
                a.add(p, p, 4.0);
                if i > 0 {
                    a.add(p, p - 1, -1.0);
                }
                if j > 0 {
                    a.add(p, p - nx, -1.0);
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a.get(i, j) * x[j];
            }
        }
        let f = a.factor().unwrap();
        let got = f.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = BandedSpd::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        assert!(a.factor().is_err());
    }
}
