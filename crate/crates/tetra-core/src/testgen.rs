//! Seeded generators shared by the test suites and benchmarks: random
//! unitaries, commuting parameter pairs with the model hypotheses enforced,
//! and planted joint-triangular pairs with known diagonal coefficients.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;
use crate::variety::pencil_sup_norm;

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng))
}

/// Haar-ish random unitary via Householder QR of a random matrix with the
/// R diagonal phases absorbed.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut q = ComplexMatrix::identity(n);
    // Product of random complex Householder reflectors and a diagonal phase.
    for _ in 0..n {
        let v: Vec<Complex64> = (0..n).map(|_| random_complex(rng)).collect();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 < 1e-12 {
            continue;
        }
        let refl = ComplexMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            id - v[i] * v[j].conj() * (2.0 / norm2)
        });
        q = &q * &refl;
    }
    let phases: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    &q * &ComplexMatrix::from_diag(&phases)
}

/// Commuting pair with [A1*, A1] = [A2*, A2], built as A2 = w A1 + d I with
/// |w| = 1, then scaled so sup over the circle of ||A1* + A2 z|| equals
/// `target_sup`.
pub fn hypothesis_pair(
    n: usize,
    target_sup: f64,
    rng: &mut ChaCha8Rng,
) -> (ComplexMatrix, ComplexMatrix) {
    let a1 = random_matrix(n, rng);
    let w = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    let d = random_complex(rng) * 0.3;
    let a2 = a1.scale(w).add(&ComplexMatrix::identity(n).scale(d));
    let sup = pencil_sup_norm(&a1, &a2, 256).max(1e-9);
    let factor = Complex64::new(target_sup / sup, 0.0);
    (a1.scale(factor), a2.scale(factor))
}

/// Planted commuting upper-triangular pair, conjugated by a random unitary.
/// Returns the pair and the planted joint diagonal coefficients.
///
/// Each diagonal block has well-separated diagonal entries and carries a
/// partner built as a quadratic polynomial in it, so the pair commutes
/// exactly while repeated joint pairs across blocks stay semisimple.
pub fn planted_pair(
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (ComplexMatrix, ComplexMatrix, Vec<(Complex64, Complex64)>) {
    let mut a = ComplexMatrix::zeros(n, n);
    let mut b = ComplexMatrix::zeros(n, n);
    let mut planted = Vec::with_capacity(n);
    let mut at = 0usize;
    while at < n {
        let max_block = (n - at).min(4);
        let size = rng.gen_range(1..=max_block);
        // Distinct diagonal values with a guaranteed separation.
        let mut diags: Vec<Complex64> = Vec::new();
        while diags.len() < size {
            let cand = random_complex(rng);
            if diags.iter().all(|d| (d - cand).norm() > 0.35) {
                diags.push(cand);
            }
        }
        let mut block = ComplexMatrix::from_diag(&diags);
        for i in 0..size {
            for j in i + 1..size {
                block[(i, j)] = random_complex(rng) * 0.3;
            }
        }
        let (c0, c1, c2) = (random_complex(rng), random_complex(rng), random_complex(rng) * 0.5);
        let partner = ComplexMatrix::identity(size)
            .scale(c0)
            .add(&block.scale(c1))
            .add(&(&block * &block).scale(c2));
        a.set_block(at, at, &block);
        b.set_block(at, at, &partner);
        for &d in &diags {
            planted.push((d, c0 + c1 * d + c2 * d * d));
        }
        at += size;
    }
    let u = random_unitary(n, rng);
    let conj = |m: &ComplexMatrix| &(&u * m) * &u.adjoint();
    (conj(&a), conj(&b), planted)
}

/// Contraction with operator norm scaled to `target`.
pub fn random_contraction(n: usize, target: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = random_matrix(n, rng);
    let norm = crate::linalg::operator_norm(&g).max(1e-9);
    g.scale(Complex64::new(target / norm, 0.0))
}
