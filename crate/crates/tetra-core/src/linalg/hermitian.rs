use num_complex::Complex64;

use super::ComplexMatrix;

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.
///
/// Returns real eigenvalues sorted descending (stable under ties, so exact
/// 0/1 projections keep their coordinate order) and the matching unitary
/// eigenvector columns. The input is symmetrized first; callers are expected
/// to pass matrices that are Hermitian up to rounding.
pub fn eigh(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.order();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let mut m = a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut v = ComplexMatrix::identity(n);
    let norm = m.frobenius_norm();
    let target = (1e-15 * norm).max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let off = off_diagonal_norm(&m);
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let abs = apq.norm();
                if abs <= target / (n as f64) {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let w = apq / abs; // unit phase of the pivot
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                apply_rotation(&mut m, &mut v, p, q, c, s, w);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diags: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    // Stable sort keeps tied eigenvalues in coordinate order.
    order.sort_by(|&i, &j| diags[j].partial_cmp(&diags[i]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| diags[i]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (vals, vecs)
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.order();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Two-sided rotation J* M J and V <- V J with
/// J = [[c, s w], [-s conj(w), c]] acting on the (p, q) plane.
fn apply_rotation(
    m: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    w: Complex64,
) {
    let n = m.order();
    let cw = Complex64::new(c, 0.0);
    let sw = w * s;
    // M <- M J (columns p, q).
    for i in 0..n {
        let mp = m[(i, p)];
        let mq = m[(i, q)];
        m[(i, p)] = mp * cw - mq * sw.conj();
        m[(i, q)] = mp * sw + mq * cw;
    }
    // M <- J* M (rows p, q).
    for j in 0..n {
        let mp = m[(p, j)];
        let mq = m[(q, j)];
        m[(p, j)] = mp * cw - mq * sw;
        m[(q, j)] = mp * sw.conj() + mq * cw;
    }
    // Accumulate eigenvectors.
    for i in 0..v.rows() {
        let vp = v[(i, p)];
        let vq = v[(i, q)];
        v[(i, p)] = vp * cw - vq * sw.conj();
        v[(i, q)] = vp * sw + vq * cw;
    }
    // Clean the pivot pair to keep the matrix exactly Hermitian.
    let hpq = (m[(p, q)] + m[(q, p)].conj()) * Complex64::new(0.5, 0.0);
    m[(p, q)] = hpq;
    m[(q, p)] = hpq.conj();
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}
