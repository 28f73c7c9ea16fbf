//! Dense complex linear algebra sized for small operator matrices (n ≤ ~64).
//!
//! Everything downstream (geometry checks, joint spectra, dilation models)
//! is built on the kernels in this module: products and adjoints, a complex
//! Hessenberg/QR eigensolver, a Jacobi Hermitian eigensolver, operator norm,
//! numerical radius, positive square roots and the range-restricted solve
//! that underlies fundamental-operator extraction.

use num_complex::Complex64;
use thiserror::Error;

mod eigen;
mod hermitian;
mod matrix;
mod solve;

pub use eigen::{eigenvalues, eigenvector_for, spectral_radius};
pub use hermitian::eigh;
pub use matrix::ComplexMatrix;
pub use solve::{determinant, smallest_singular, Lu};

#[derive(Debug, Clone, Error)]
pub enum LinalgError {
    #[error("matrix dimensions {0}x{1} and {2}x{3} are incompatible")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("eigenvalue iteration did not converge after {iterations} steps (subdiagonal residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("linear system is singular")]
    Singular,
    #[error("equation unsolvable on range of D (residual {0:.3e})")]
    UnsolvableOnRange(f64),
}

/// Absolute + relative tolerance pair; the effective tolerance at a given
/// scale is `abs + rel * scale`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        assert!(abs >= 0.0 && rel >= 0.0, "tolerances must be nonnegative");
        Tolerance { abs, rel }
    }

    pub fn effective(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }
}

/// AB - BA.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(LinalgError::DimensionMismatch(a.rows(), a.cols(), b.rows(), b.cols()));
    }
    Ok(&(a * b) - &(b * a))
}

/// Largest singular value, computed as sqrt of the top eigenvalue of A*A.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let gram = &a.adjoint() * a;
    let (vals, _) = eigh(&gram);
    vals.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

fn rotated_hermitian_top(a: &ComplexMatrix, theta: f64) -> f64 {
    let phase = Complex64::from_polar(1.0, theta);
    let rotated = a.scale(phase);
    let herm = &rotated.add(&rotated.adjoint()).scale(Complex64::new(0.5, 0.0));
    let (vals, _) = eigh(herm);
    vals.first().copied().unwrap_or(0.0)
}

fn golden_max(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    let mut best = f1.max(f2);
    for _ in 0..64 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = g(x1);
        }
        best = best.max(f1.max(f2));
    }
    best
}

/// Numerical radius ω(A) = sup { |<Ax,x>| : ||x|| = 1 }.
///
/// Evaluated as max over θ of λ_max((e^{iθ}A + e^{-iθ}A*)/2) on a θ-grid,
/// then refined by golden-section search around the best grid brackets.
/// The grid maximum is a lower bound of ω(A); the sweep function is
/// ||A||-Lipschitz in θ, which bounds the residual grid error.
pub fn numerical_radius(a: &ComplexMatrix, grid: usize) -> f64 {
    assert!(a.is_square(), "numerical radius needs a square matrix");
    let n = a.order();
    if n == 0 {
        return 0.0;
    }
    let grid = grid.max(8);
    let step = std::f64::consts::TAU / grid as f64;
    let values: Vec<f64> = (0..grid).map(|k| rotated_hermitian_top(a, k as f64 * step)).collect();
    let mut best = f64::NEG_INFINITY;
    // Refine around the three best grid points; local maxima of the sweep
    // need not be unique.
    let mut order: Vec<usize> = (0..grid).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
    for &k in order.iter().take(3) {
        let theta = k as f64 * step;
        let g = |t: f64| rotated_hermitian_top(a, t);
        best = best.max(golden_max(&g, theta - step, theta + step));
        best = best.max(values[k]);
    }
    best
}

/// Default θ-grid for the numerical-radius sweep.
pub const RADIUS_GRID: usize = 512;

/// Hermitian PSD square root: S with S² = A, eigenvalues within `tol`
/// of nonnegative are clamped to zero.
pub fn sqrt_psd(a: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix, LinalgError> {
    assert!(a.is_square(), "sqrt_psd needs a square matrix");
    let scale = a.frobenius_norm();
    let herm_defect = a.sub(&a.adjoint()).frobenius_norm();
    if herm_defect > tol.effective(scale).max(1e-13 * scale) {
        return Err(LinalgError::NotHermitian(herm_defect));
    }
    let sym = a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0));
    let (vals, vecs) = eigh(&sym);
    let eff = tol.effective(scale.max(1.0));
    if let Some(&min) = vals.last() {
        if min < -eff {
            return Err(LinalgError::NotPsd(min));
        }
    }
    let roots: Vec<Complex64> =
        vals.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)).collect();
    let s = &(&vecs * &ComplexMatrix::from_diag(&roots)) * &vecs.adjoint();
    // Symmetrize away rounding from the two-sided product.
    Ok(s.add(&s.adjoint()).scale(Complex64::new(0.5, 0.0)))
}

/// Result of a range-restricted solve D X D = R.
#[derive(Debug, Clone)]
pub struct RangeSolve {
    pub x: ComplexMatrix,
    pub residual: f64,
    pub rank: usize,
    pub cutoff: f64,
}

/// Solves D X D = R for the unique X supported on ran(D), where D is
/// Hermitian PSD. Singular values of D below `abs + rel * σ_max` are
/// treated as exact zeros, so X = D⁺ R D⁺ is automatically compressed
/// to the range. Errors when R is not supported on ran(D) within `tol`.
pub fn range_restricted_solve(
    d: &ComplexMatrix,
    r: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<RangeSolve, LinalgError> {
    if !d.is_square() || d.rows() != r.rows() || d.cols() != r.cols() {
        return Err(LinalgError::DimensionMismatch(d.rows(), d.cols(), r.rows(), r.cols()));
    }
    let herm_defect = d.sub(&d.adjoint()).frobenius_norm();
    if herm_defect > tol.effective(d.frobenius_norm()).max(1e-13 * d.frobenius_norm()) {
        return Err(LinalgError::NotHermitian(herm_defect));
    }
    let (vals, vecs) = eigh(d);
    let sigma_max = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol.abs + tol.rel * sigma_max;
    let inv: Vec<Complex64> = vals
        .iter()
        .map(|&v| if v > cutoff { Complex64::new(1.0 / v, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let rank = inv.iter().filter(|z| z.re != 0.0).count();
    let pinv = &(&vecs * &ComplexMatrix::from_diag(&inv)) * &vecs.adjoint();
    let x = &(&pinv * r) * &pinv;
    let residual = operator_norm(&(&(d * &x) * d).sub(r));
    if residual > tol.effective(operator_norm(r)) {
        return Err(LinalgError::UnsolvableOnRange(residual));
    }
    Ok(RangeSolve { x, residual, rank, cutoff })
}

/// Greedy minimal-distance matching between two multisets of complex
/// numbers; returns the largest matched distance. `None` on length mismatch.
pub fn greedy_match_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    greedy_match_by(a, b, |x, y| (x - y).norm())
}

/// Greedy matching for multisets of pairs (joint spectra), Euclidean on C².
pub fn greedy_match_pairs(
    a: &[(Complex64, Complex64)],
    b: &[(Complex64, Complex64)],
) -> Option<f64> {
    greedy_match_by(a, b, |x, y| ((x.0 - y.0).norm_sqr() + (x.1 - y.1).norm_sqr()).sqrt())
}

fn greedy_match_by<T: Copy>(a: &[T], b: &[T], dist: impl Fn(T, T) -> f64) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut left: Vec<T> = a.to_vec();
    let mut right: Vec<T> = b.to_vec();
    let mut worst = 0.0f64;
    while !left.is_empty() {
        let mut best = (0usize, 0usize, f64::INFINITY);
        for (i, &x) in left.iter().enumerate() {
            for (j, &y) in right.iter().enumerate() {
                let d = dist(x, y);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        worst = worst.max(best.2);
        left.swap_remove(best.0);
        right.swap_remove(best.1);
    }
    Some(worst)
}
