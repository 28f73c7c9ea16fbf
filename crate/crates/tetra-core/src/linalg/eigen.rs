use num_complex::Complex64;

use super::solve::Lu;
use super::{ComplexMatrix, LinalgError};

/// QR iterations are capped at `ITER_CAP_PER_DIM * n` for an n x n matrix.
const ITER_CAP_PER_DIM: usize = 500;

/// Eigenvalues with algebraic multiplicity, via Householder Hessenberg
/// reduction followed by explicitly shifted QR with deflation.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let n = a.order();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let cap = ITER_CAP_PER_DIM * n;
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iters = 0usize;
    let mut stuck = 0usize;

    loop {
        // Split off any negligible subdiagonals at the active tail.
        while hi > 0 && subdiag_negligible(&h, hi, norm) {
            h[(hi, hi - 1)] = Complex64::new(0.0, 0.0);
            eig[hi] = h[(hi, hi)];
            if hi == 1 {
                eig[0] = h[(0, 0)];
                return Ok(eig);
            }
            hi -= 1;
            stuck = 0;
        }
        if hi == 0 {
            eig[0] = h[(0, 0)];
            return Ok(eig);
        }

        // Active unreduced block is lo..=hi.
        let mut lo = hi;
        while lo > 0 && !subdiag_negligible(&h, lo, norm) {
            lo -= 1;
        }

        if lo + 1 == hi {
            let (l1, l2) = eig_2x2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eig[lo] = l1;
            eig[hi] = l2;
            if lo == 0 {
                return Ok(eig);
            }
            h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
            hi = lo - 1;
            stuck = 0;
            continue;
        }

        iters += 1;
        stuck += 1;
        if iters > cap {
            let residual = (lo + 1..=hi).map(|i| h[(i, i - 1)].norm()).fold(0.0, f64::max);
            return Err(LinalgError::NonConvergence { iterations: iters, residual });
        }
        let shift = if stuck.is_multiple_of(12) {
            // Exceptional shift to break rare shift cycles.
            h[(hi, hi)] + Complex64::new(0.75, 0.34) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, lo, hi, shift);
    }
}

fn subdiag_negligible(h: &ComplexMatrix, i: usize, norm: f64) -> bool {
    let local = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
    let thresh = if local > 0.0 { 1e-15 * local } else { 1e-15 * norm };
    h[(i, i - 1)].norm() <= thresh
}

fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half = (a + d) * Complex64::new(0.5, 0.0);
    let delta = (a - d) * Complex64::new(0.5, 0.0);
    let disc = (delta * delta + b * c).sqrt();
    (half + disc, half - disc)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let (l1, l2) =
        eig_2x2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
    let d = h[(hi, hi)];
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Givens rotation with real c: G = [[c, s], [-conj(s), c]],
/// chosen so that G * [f, g]^T has a zero second component.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / d;
    let s = (f / f.norm()) * g.conj() / d;
    (c, s)
}

/// One explicit-shift QR sweep on the Hessenberg block lo..=hi.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        let cw = Complex64::new(c, 0.0);
        for j in k..=hi {
            let top = h[(k, j)];
            let bot = h[(k + 1, j)];
            h[(k, j)] = cw * top + s * bot;
            h[(k + 1, j)] = -s.conj() * top + cw * bot;
        }
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let cw = Complex64::new(c, 0.0);
        // R is upper triangular, so columns k, k+1 are supported on rows <= k+1.
        for i in lo..=(k + 1).min(hi) {
            let left = h[(i, k)];
            let right = h[(i, k + 1)];
            h[(i, k)] = left * cw + right * s.conj();
            h[(i, k + 1)] = -left * s + right * cw;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Householder reduction to upper Hessenberg form (eigenvalues only,
/// no transform accumulation).
fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.order();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
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
        // Left: H <- (I - 2vv*) H on rows k+1.., columns k..n.
        for j in k..n {
            let dot: Complex64 =
                v.iter().enumerate().map(|(i, w)| w.conj() * h[(k + 1 + i, j)]).sum();
            let twice = dot * 2.0;
            for (i, w) in v.iter().enumerate() {
                let val = h[(k + 1 + i, j)] - w * twice;
                h[(k + 1 + i, j)] = val;
            }
        }
        // Right: H <- H (I - 2vv*) on columns k+1.., all rows.
        for i in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(j, w)| h[(i, k + 1 + j)] * w).sum();
            let twice = dot * 2.0;
            for (j, w) in v.iter().enumerate() {
                let val = h[(i, k + 1 + j)] - twice * w.conj();
                h[(i, k + 1 + j)] = val;
            }
        }
        // Entries below the subdiagonal in column k are now zero by
        // construction; force them to silence rounding dust.
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Spectral radius r(A) = max |eigenvalue|.
pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64, LinalgError> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Eigenvector for a computed eigenvalue, by inverse iteration with a
/// slightly perturbed shift. The returned vector is unit norm; callers
/// verify the residual they care about.
pub fn eigenvector_for(
    a: &ComplexMatrix,
    lambda: Complex64,
) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.order();
    if n == 0 {
        return Err(LinalgError::Singular);
    }
    let scale = a.frobenius_norm().max(lambda.norm()).max(1.0);
    let shift = lambda + Complex64::new(1e-13 * scale, 3e-14 * scale);
    let shifted = a.sub(&ComplexMatrix::from_diag(&vec![shift; n]));
    let lu = Lu::factor_regularized(&shifted, 1e-300);
    // Deterministic start with incommensurate phases, so it is almost never
    // orthogonal to the target eigenvector.
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, 0.7548776662466927 * (i as f64 + 1.0)))
        .collect();
    normalize(&mut v);
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for _ in 0..4 {
        let mut w = lu.solve(&v);
        normalize(&mut w);
        let av = a.mul_vec(&w);
        let res = av
            .iter()
            .zip(&w)
            .map(|(x, y)| (x - lambda * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let better = best.as_ref().is_none_or(|(r, _)| res < *r);
        if better {
            best = Some((res, w.clone()));
        }
        v = w;
        if best.as_ref().unwrap().0 <= 1e-14 * scale {
            break;
        }
    }
    Ok(best.unwrap().1)
}

pub(crate) fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}
