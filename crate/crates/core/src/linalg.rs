//! Dense complex matrices, one-sided Jacobi SVD and cyclic Jacobi
//! eigenvalues for Hermitian matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn conj_transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..=i).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Convergence threshold on `|<a_i, a_j>| / (‖a_i‖ ‖a_j‖)`.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 30;

/// `A = U diag(s) V*`, singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
    pub sweeps: usize,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.s.len();
        let us = CMatrix::from_fn(self.u.rows(), n, |i, j| self.u[(i, j)] * self.s[j]);
        us.mul(&self.v.conj_transpose())
    }
}

/// Rotation `(c, s)` with `t = s/c` annihilating the off-diagonal of
/// `[[p, g], [g, q]]` for real `g > 0`.
fn jacobi_rotation(p: f64, q: f64, g: f64) -> (f64, f64) {
    let zeta = (q - p) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let t = if zeta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t)
}

/// One-sided (Hestenes) Jacobi SVD of a square or tall matrix.
pub fn jacobi_svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        let t = jacobi_svd(&a.conj_transpose())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u, sweeps: t.sweeps });
    }
    // Column storage for the working copy and for V.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut vcols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
    // Columns below this norm are roundoff; their directions do not count toward convergence.
    let negligible = f64::EPSILON * norms.iter().sum::<f64>().sqrt();

    let mut sweeps = 0;
    let mut off = f64::INFINITY;
    while sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let (ni, nj) = (norms[i], norms[j]);
                if ni == 0.0 || nj == 0.0 {
                    continue;
                }
                let g: Complex64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x.conj() * y).sum();
                let gabs = g.norm();
                let scale = ni.sqrt() * nj.sqrt();
                if gabs == 0.0 || !(gabs > JACOBI_TOL * 1e-3 * scale) {
                    continue;
                }
                if ni.sqrt().min(nj.sqrt()) > negligible {
                    off = off.max(gabs / scale);
                }
                let phase = g / gabs;
                let (c, s) = jacobi_rotation(ni, nj, gabs);
                // Rotate a_j by the phase so the pair has real inner product, then apply the real rotation.
                rotate_pair(&mut cols, i, j, phase.conj(), c, s);
                rotate_pair(&mut vcols, i, j, phase.conj(), c, s);
                norms[i] = cols[i].iter().map(|z| z.norm_sqr()).sum();
                norms[j] = cols[j].iter().map(|z| z.norm_sqr()).sum();
            }
        }
        if off < JACOBI_TOL {
            break;
        }
    }
    if off >= JACOBI_TOL {
        return Err(Error::NonConvergence { what: "Jacobi SVD", achieved: off });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sv: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]).then(x.cmp(&y)));

    let mut u = CMatrix::zeros(m, n);
    let mut v = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sigma = sv[j];
        s.push(sigma);
        for i in 0..m {
            u[(i, k)] = if sigma > 0.0 { cols[j][i] / sigma } else { Complex64::new(0.0, 0.0) };
        }
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
    }
    Ok(Svd { u, s, v, sweeps })
}

fn rotate_pair(cols: &mut [Vec<Complex64>], i: usize, j: usize, phase: Complex64, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    let (ci, cj) = (&mut lo[i], &mut hi[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let yp = *y * phase;
        let xi = *x;
        *x = c * xi - s * yp;
        *y = s * xi + c * yp;
    }
}

/// Singular values only, descending.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_svd(a)?.s)
}

/// Eigenvalues of a Hermitian matrix by cyclic two-sided Jacobi rotations, descending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::Contract("eigenvalues need a square matrix".into()));
    }
    if !a.is_hermitian() {
        return Err(Error::Contract("matrix is not Hermitian".into()));
    }
    let n = a.rows();
    let mut m = a.clone();
    let total = m.frobenius_norm();
    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * total || total == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NonConvergence { what: "Jacobi eigenvalues", achieved: off / total });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g == 0.0 || g <= 1e-300 {
                    continue;
                }
                let phase = apq / g;
                // D* A D with D = diag(.., 1 at p, conj(phase) at q, ..) makes a_pq real.
                for k in 0..n {
                    m[(k, q)] *= phase.conj();
                }
                for k in 0..n {
                    m[(q, k)] *= phase;
                }
                let (c, s) = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, g);
                for k in 0..n {
                    let (x, y) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * x - s * y;
                    m[(k, q)] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * x - s * y;
                    m[(q, k)] = s * x + c * y;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)].im = 0.0;
                m[(q, q)].im = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}
