//! Dense linear algebra for small symmetric systems.
//!
//! Coefficient blocks are low-dimensional (rarely more than a few dozen
//! columns), so the factorizations here are plain textbook routines rather
//! than bindings to an external BLAS/LAPACK.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    /// Factor `a = L L^T`. Returns `None` if a pivot is non-positive or
    /// non-finite, i.e. the matrix is not numerically positive definite.
    pub fn new(a: &ArrayView2<f64>) -> Option<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return None;
        }
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return None;
            }
            let diag = diag.sqrt();
            l[(j, j)] = diag;
            for i in (j + 1)..n {
                let mut v = a[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / diag;
            }
        }
        Some(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solve `A x = b` using the stored factor.
    pub fn solve(&self, b: &ArrayView1<f64>) -> Array1<f64> {
        let y = self.solve_lower(b);
        self.solve_upper(&y.view())
    }

    /// Solve `L y = b` (forward substitution).
    pub fn solve_lower(&self, b: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let mut y = Array1::<f64>::zeros(n);
        for i in 0..n {
            let mut v = b[i];
            for k in 0..i {
                v -= self.l[(i, k)] * y[k];
            }
            y[i] = v / self.l[(i, i)];
        }
        y
    }

    /// Solve `L^T x = y` (back substitution).
    pub fn solve_upper(&self, y: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let mut x = Array1::<f64>::zeros(n);
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in (i + 1)..n {
                v -= self.l[(k, i)] * x[k];
            }
            x[i] = v / self.l[(i, i)];
        }
        x
    }

    /// log |A| for the factored matrix.
    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diag().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Map a standard-normal vector `z` to a draw with covariance `A^{-1}`:
    /// solving `L^T u = z` gives `cov(u) = (L L^T)^{-1}`.
    pub fn inv_sqrt_mul(&self, z: &ArrayView1<f64>) -> Array1<f64> {
        self.solve_upper(z)
    }
}

/// Eigenvalues of a symmetric matrix via the cyclic Jacobi method.
/// Returned in descending order.
pub fn symmetric_eigenvalues(a: &ArrayView2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalue input must be square");
    let mut m = a.to_owned();
    // Symmetrize defensively; callers hold matrices symmetric to rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let scale: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = m.diag().to_vec();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eigs
}

/// Numerical rank: eigenvalues above `rel_tol` times the largest magnitude.
pub fn rank_from_eigenvalues(eigs: &[f64], rel_tol: f64) -> usize {
    let max_abs = eigs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return 0;
    }
    eigs.iter().filter(|v| v.abs() > rel_tol * max_abs).count()
}

/// Orthonormal basis of the null space of a row-constraint matrix
/// `c` (m x n, independent rows): returns `z` (n x (n-m)) with
/// `c z = 0` and `z^T z = I`. Computed from a full Householder QR of `c^T`.
pub fn null_space_of_rows(c: &ArrayView2<f64>) -> Array2<f64> {
    let m = c.nrows();
    let n = c.ncols();
    assert!(m < n, "constraints must leave at least one free dimension");
    let mut r = c.t().to_owned(); // n x m
    let mut q = Array2::<f64>::eye(n);
    for k in 0..m {
        // Householder vector for column k below the diagonal.
        let norm_x: f64 = (k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if norm_x <= 1e-300 {
            panic!("rank-deficient constraint matrix");
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm_x } else { norm_x };
        let mut v = Array1::<f64>::zeros(n);
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv <= 1e-300 {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to r and accumulate into q.
        for j in k..m {
            let dot: f64 = (k..n).map(|i| v[i] * r[(i, j)]).sum();
            let f = 2.0 * dot / vtv;
            for i in k..n {
                r[(i, j)] -= f * v[i];
            }
        }
        for j in 0..n {
            let dot: f64 = (k..n).map(|i| v[i] * q[(i, j)]).sum();
            let f = 2.0 * dot / vtv;
            for i in k..n {
                q[(i, j)] -= f * v[i];
            }
        }
    }
    // Rows m.. of q^T span the orthogonal complement of the columns of c^T.
    let qt = q.t();
    qt.slice(ndarray::s![.., m..]).to_owned()
}

/// `b^T diag(d) b` for a tall matrix `b` and weight vector `d`.
pub fn weighted_cross(b: &ArrayView2<f64>, d: &ArrayView1<f64>) -> Array2<f64> {
    assert_eq!(b.nrows(), d.len(), "weight length must match rows");
    let scaled = b.to_owned() * d.view().insert_axis(Axis(1));
    b.t().dot(&scaled)
}

/// Quadratic form `x^T a x`.
pub fn quad_form(a: &ArrayView2<f64>, x: &ArrayView1<f64>) -> f64 {
    x.dot(&a.dot(x))
}
