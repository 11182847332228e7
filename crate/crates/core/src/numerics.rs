//! Dense real matrices, residuals against a scaled identity, and a cyclic
//! Jacobi eigensolver used for counting distinct eigenvalues.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: max |M - M^T| = {asymmetry:e} exceeds {tol:e}")]
    NonSymmetricInput { asymmetry: f64, tol: f64 },
    #[error("jacobi iteration did not converge after {sweeps} sweeps")]
    NotConverged { sweeps: usize },
    #[error("ragged rows: row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
}

/// Dense row-major real matrix with an optional certified scale `c`
/// (the constant in `M Mᵀ = c I`).
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    scale: Option<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            scale: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m.scale = Some(1.0);
        m
    }

    /// All-ones matrix.
    pub fn ones(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![1.0; rows * cols],
            scale: None,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RealMatrix {
            rows,
            cols,
            data,
            scale: None,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, NumericsError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NumericsError::Ragged {
                    row: i,
                    len: r.len(),
                    expected: cols,
                });
            }
            data.extend_from_slice(r);
        }
        Ok(RealMatrix {
            rows: rows.len(),
            cols,
            data,
            scale: None,
        })
    }

    /// Builds from a flat row-major buffer. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must be rows*cols");
        RealMatrix {
            rows,
            cols,
            data,
            scale: None,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Order of a square matrix (row count).
    #[inline]
    pub fn order(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn scale_c(&self) -> Option<f64> {
        self.scale
    }

    /// Records the certified scale. Non-positive or non-finite values clear it.
    pub fn with_scale(mut self, c: f64) -> Self {
        self.scale = (c.is_finite() && c > 0.0).then_some(c);
        self
    }

    pub fn clear_scale(mut self) -> Self {
        self.scale = None;
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Entrywise multiple. Exact zeros stay `+0.0`, and a known scale is
    /// carried over as `c * factor²`.
    pub fn scaled(&self, factor: f64) -> Self {
        let data = self
            .data
            .iter()
            .map(|&x| if x == 0.0 { 0.0 } else { x * factor })
            .collect();
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
            scale: self.scale.map(|c| c * factor * factor),
        }
    }

    /// Product `self * other`. Panics on dimension mismatch.
    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = RealMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Largest `|M_ij - M_ji|`; infinite for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest `|M_ij + M_ji|` over all `i, j` (diagonal included).
    pub fn skewness_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Simultaneous row/column permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted_symmetric(&self, perm: &[usize]) -> RealMatrix {
        assert!(self.is_square() && perm.len() == self.rows);
        let mut m = Self::from_fn(self.rows, self.cols, |i, j| self.get(perm[i], perm[j]));
        m.scale = self.scale;
        m
    }
}

impl fmt::Display for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:>10.6}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// `M Mᵀ`. Each entry `(i, j)` with `j ≥ i` is computed once and mirrored,
/// so the result is exactly symmetric.
pub fn gram(m: &RealMatrix) -> RealMatrix {
    let n = m.rows();
    let mut g = RealMatrix::zeros(n, n);
    for i in 0..n {
        let ri = m.row(i);
        for j in i..n {
            let rj = m.row(j);
            let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            g.set(i, j, dot);
            g.set(j, i, dot);
        }
    }
    g
}

/// Recovers `c` as the mean of `diag(M Mᵀ)` and reports the largest entry
/// of `|M Mᵀ - c I|`.
pub fn residual_scaled_identity(m: &RealMatrix) -> (f64, f64) {
    let g = gram(m);
    let n = g.rows();
    if n == 0 {
        return (0.0, 0.0);
    }
    let c = (0..n).map(|i| g.get(i, i)).sum::<f64>() / n as f64;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { c } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    (c, worst)
}

/// Eigenvalue multiset of a symmetric matrix, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub tol_used: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

const MAX_SWEEPS: usize = 100;

/// Default Jacobi threshold: `1e-11 · max|entry|`.
pub fn default_sweep_tol(m: &RealMatrix) -> f64 {
    let scale = m.max_abs();
    if scale == 0.0 {
        f64::MIN_POSITIVE
    } else {
        1e-11 * scale
    }
}

/// Cyclic Jacobi eigenvalues. Sweeps visit the upper triangle in row-major
/// order and stop once every off-diagonal magnitude is below `sweep_tol`.
pub fn jacobi_spectrum(m: &RealMatrix, sweep_tol: f64) -> Result<Spectrum, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let asymmetry = m.asymmetry();
    if asymmetry > sweep_tol {
        return Err(NumericsError::NonSymmetricInput {
            asymmetry,
            tol: sweep_tol,
        });
    }
    let n = m.order();
    // symmetrize so rounding-level asymmetry cannot bias the rotations
    let mut a = RealMatrix::from_fn(n, n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)));

    let mut sweeps = 0;
    loop {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        if off < sweep_tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(NumericsError::NotConverged { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() < sweep_tol {
                    continue;
                }
                rotate(&mut a, p, q);
            }
        }
    }

    let mut values: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    values.sort_by(f64::total_cmp);
    Ok(Spectrum {
        values,
        tol_used: sweep_tol,
    })
}

/// One Jacobi similarity rotation annihilating `a[p][q]`.
fn rotate(a: &mut RealMatrix, p: usize, q: usize) {
    let n = a.order();
    let apq = a.get(p, q);
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a.set(k, p, new_kp);
        a.set(p, k, new_kp);
        a.set(k, q, new_kq);
        a.set(q, k, new_kq);
    }
    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
}

/// Default clustering tolerance: `1e-6 · max|eigenvalue|`.
pub fn default_cluster_tol(s: &Spectrum) -> f64 {
    1e-6 * s.max_abs()
}

/// Counts clusters of sorted eigenvalues; neighbours share a cluster when
/// their gap is at most `cluster_tol`.
pub fn cluster_eigenvalues(s: &Spectrum, cluster_tol: f64) -> usize {
    let mut sorted = s.values.clone();
    sorted.sort_by(f64::total_cmp);
    let mut iter = sorted.into_iter();
    let Some(mut prev) = iter.next() else {
        return 0;
    };
    let mut clusters = 1;
    for v in iter {
        if v - prev > cluster_tol {
            clusters += 1;
        }
        prev = v;
    }
    clusters
}
