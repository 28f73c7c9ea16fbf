use num_complex::Complex64;

use super::eigen::normalize;
use super::{ComplexMatrix, LinalgError};

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        let lu = Self::factor_regularized(a, 0.0);
        if lu.singular {
            Err(LinalgError::Singular)
        } else {
            Ok(lu)
        }
    }

    /// Factors with zero pivots replaced by `floor` (inverse iteration wants
    /// a usable factorization of a nearly singular shift).
    pub fn factor_regularized(a: &ComplexMatrix, floor: f64) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.order();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    pivot = i;
                }
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                perm.swap(k, pivot);
                swaps += 1;
            }
            if lu[(k, k)].norm() == 0.0 {
                singular = true;
                if floor > 0.0 {
                    lu[(k, k)] = Complex64::new(floor, 0.0);
                } else {
                    continue;
                }
            }
            let inv = Complex64::new(1.0, 0.0) / lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] * inv;
                lu[(i, k)] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let val = lu[(i, j)] - factor * lu[(k, j)];
                    lu[(i, j)] = val;
                }
            }
        }
        Lu { lu, perm, swaps, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.order();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * y[j];
                y[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[(i, j)] * y[j];
                y[i] -= sub;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    /// Solves A X = B column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col = self.solve(&b.column(j));
            for (i, z) in col.into_iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        out
    }

    pub fn determinant(&self) -> Complex64 {
        if self.singular {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.lu.order();
        let mut det = if self.swaps.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for i in 0..n {
            det *= self.lu[(i, i)];
        }
        det
    }
}

pub fn determinant(a: &ComplexMatrix) -> Complex64 {
    Lu::factor_regularized(a, 0.0).determinant()
}

/// R factor of a thin Householder QR (rows >= cols).
fn qr_r_factor(a: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "qr_r_factor expects a tall matrix");
    let mut r = a.clone();
    for k in 0..n.min(m - 1) {
        let mut x: Vec<Complex64> = (k..m).map(|i| r[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm <= 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        x[0] += phase * xnorm;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= 1e-300 {
            continue;
        }
        let v: Vec<Complex64> = x.iter().map(|z| z / vnorm).collect();
        for j in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(i, w)| w.conj() * r[(k + i, j)]).sum();
            let twice = dot * 2.0;
            for (i, w) in v.iter().enumerate() {
                let val = r[(k + i, j)] - w * twice;
                r[(k + i, j)] = val;
            }
        }
    }
    r.submatrix(0, n, 0, n)
}

fn solve_upper(r: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = r.order();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for j in i + 1..n {
            let sub = r[(i, j)] * x[j];
            x[i] -= sub;
        }
        x[i] /= r[(i, i)];
    }
    x
}

fn solve_lower_adjoint(r: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    // Solves R* x = b with R upper triangular.
    let n = r.order();
    let mut x = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            let sub = r[(j, i)].conj() * x[j];
            x[i] -= sub;
        }
        x[i] /= r[(i, i)].conj();
    }
    x
}

/// Smallest singular value of a tall matrix (rows >= cols) together with an
/// approximate right singular vector, via QR and inverse iteration on R.
pub fn smallest_singular(a: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let n = a.cols();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut r = qr_r_factor(a);
    let scale = r.frobenius_norm().max(f64::MIN_POSITIVE);
    let floor = 1e-18 * scale;
    for i in 0..n {
        if r[(i, i)].norm() < floor {
            r[(i, i)] = Complex64::new(floor, 0.0);
        }
    }
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, 1.2643951443690567 * (i as f64 + 1.0)))
        .collect();
    normalize(&mut v);
    let mut inv_sigma_sq = 0.0f64;
    for _ in 0..24 {
        let y = solve_lower_adjoint(&r, &v);
        let mut z = solve_upper(&r, &y);
        let growth = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if !growth.is_finite() || growth == 0.0 {
            inv_sigma_sq = f64::MAX;
            break;
        }
        normalize(&mut z);
        v = z;
        if growth >= inv_sigma_sq && (growth - inv_sigma_sq) <= 1e-10 * growth {
            inv_sigma_sq = growth;
            break;
        }
        inv_sigma_sq = inv_sigma_sq.max(growth);
    }
    let sigma = if inv_sigma_sq > 0.0 { (1.0 / inv_sigma_sq).sqrt() } else { f64::MAX };
    (sigma, v)
}
