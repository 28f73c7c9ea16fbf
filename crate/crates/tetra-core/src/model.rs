//! Truncated Hardy-space realizations of the dilation and functional-model
//! constructions.
//!
//! The model space is H_N ⊗ C^n: the first N Fourier modes of the Hardy
//! space with an n-dimensional fiber, laid out mode-major (block k holds the
//! coefficient of z^k). On it live
//!   Q1 = I ⊗ A1* + S ⊗ A2,  Q2 = I ⊗ A2* + S ⊗ A1,  V = S ⊗ I,
//! with S the truncated shift. Under [A1, A2] = 0 and [A1*, A1] = [A2*, A2]
//! the three commute exactly: the commutators reduce to those identities
//! coefficient-wise in I, S, S².
//!
//! Compressions to the leading m modes provide the factory of test
//! tetrablock contractions: the low modes are invariant under every
//! adjoint, so the compression dilates back exactly.

use num_complex::Complex64;
use thiserror::Error;

use crate::fundops::{self, check_pure, defect, extract_fundamental, FundopsError, OperatorTriple};
use crate::linalg::{self, commutator, operator_norm, ComplexMatrix, Lu, Tolerance};

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("model hypotheses violated: {which} has norm {norm:.3e}")]
    HypothesisViolated { which: &'static str, norm: f64 },
    #[error("T3 is not a pure contraction")]
    NotPure,
    #[error("tail bound {achieved:.3e} above requested {requested:.3e} at {modes} modes")]
    TailNotReached { achieved: f64, requested: f64, modes: usize },
    #[error("compression wants 2 <= m <= N, got m = {0}, N = {1}")]
    BadCompression(usize, usize),
    #[error("resolvent I - z T* is singular: z outside the admissible set")]
    ResolventSingular,
    #[error(transparent)]
    Fundops(#[from] FundopsError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Truncated Hardy space marker: N modes with an n-dimensional fiber,
/// mode-major layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedHardy {
    pub fiber_dim: usize,
    pub modes: usize,
}

impl TruncatedHardy {
    pub fn dim(&self) -> usize {
        self.fiber_dim * self.modes
    }
}

/// Truncated shift S e_k = e_{k+1}, S e_{N-1} = 0.
pub fn truncated_shift(modes: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(modes, modes, |i, j| {
        if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Circulant (periodic) shift: like the truncated shift but the top mode
/// wraps to mode zero, making it unitary.
pub fn circulant_shift(modes: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(modes, modes, |i, j| {
        if i == (j + 1) % modes {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[derive(Debug, Clone)]
pub struct ModelTriple {
    pub q1: ComplexMatrix,
    pub q2: ComplexMatrix,
    pub v: ComplexMatrix,
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub space: TruncatedHardy,
    /// ( ||[A1,A2]||, ||[A1*,A1] - [A2*,A2]|| ) measured at build time.
    pub hypothesis_residuals: (f64, f64),
}

fn hypothesis_residuals(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(f64, f64), ModelError> {
    let comm = operator_norm(&commutator(a1, a2)?);
    let c1 = commutator(&a1.adjoint(), a1)?;
    let c2 = commutator(&a2.adjoint(), a2)?;
    let self_defect = operator_norm(&c1.sub(&c2));
    let scale = 1.0 + operator_norm(a1) + operator_norm(a2);
    if comm > tol.effective(scale) {
        return Err(ModelError::HypothesisViolated { which: "[A1,A2]", norm: comm });
    }
    if self_defect > tol.effective(scale) {
        return Err(ModelError::HypothesisViolated {
            which: "[A1*,A1]-[A2*,A2]",
            norm: self_defect,
        });
    }
    Ok((comm, self_defect))
}

/// Assembles (Q1, Q2, V) on N modes from parameters satisfying the two
/// hypothesis identities.
pub fn build_model(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    modes: usize,
    tol: &Tolerance,
) -> Result<ModelTriple, ModelError> {
    assert!(a1.is_square() && a2.is_square() && a1.order() == a2.order());
    assert!(modes >= 2, "model needs at least two modes");
    let residuals = hypothesis_residuals(a1, a2, tol)?;
    let n = a1.order();
    let id = ComplexMatrix::identity(modes);
    let s = truncated_shift(modes);
    let q1 = id.kron(&a1.adjoint()).add(&s.kron(a2));
    let q2 = id.kron(&a2.adjoint()).add(&s.kron(a1));
    let v = s.kron(&ComplexMatrix::identity(n));
    Ok(ModelTriple {
        q1,
        q2,
        v,
        a1: a1.clone(),
        a2: a2.clone(),
        space: TruncatedHardy { fiber_dim: n, modes },
        hypothesis_residuals: residuals,
    })
}

/// Periodic variant with the circulant shift; its V is unitary, so the
/// triple is a tetrablock unitary whenever sup_z ||A1* + A2 z|| <= 1.
pub fn build_circulant_isometry(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    modes: usize,
    tol: &Tolerance,
) -> Result<OperatorTriple, ModelError> {
    hypothesis_residuals(a1, a2, tol)?;
    let n = a1.order();
    let id = ComplexMatrix::identity(modes);
    let c = circulant_shift(modes);
    let q1 = id.kron(&a1.adjoint()).add(&c.kron(a2));
    let q2 = id.kron(&a2.adjoint()).add(&c.kron(a1));
    let v = c.kron(&ComplexMatrix::identity(n));
    Ok(OperatorTriple::new(q1, q2, v, tol)?)
}

/// Compression to the leading m modes. Those modes are invariant under
/// Q1*, Q2*, V*, so the compression is a tetrablock contraction with a
/// nilpotent third component.
pub fn compress_to_comodel(mt: &ModelTriple, m: usize) -> Result<OperatorTriple, ModelError> {
    if m < 2 || m > mt.space.modes {
        return Err(ModelError::BadCompression(m, mt.space.modes));
    }
    let d = m * mt.space.fiber_dim;
    let cut = |q: &ComplexMatrix| q.submatrix(0, d, 0, d);
    Ok(OperatorTriple {
        t1: cut(&mt.q1),
        t2: cut(&mt.q2),
        t3: cut(&mt.v),
        residuals: [0.0; 3],
    })
}

/// The isometric embedding into the truncated Hardy space over the
/// defect space of T3*:
/// mode-k block is D_{T3*} T3*^k compressed to the defect basis of T3*.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub w: ComplexMatrix,
    /// ||T3*^N||; the isometry defect ||W*W - I|| is at most its square.
    pub tail: f64,
    pub fiber_dim: usize,
}

pub fn embed_w(
    tr: &OperatorTriple,
    modes: usize,
    tail_tol: f64,
    tol: &Tolerance,
) -> Result<Embedding, ModelError> {
    if !check_pure(&tr.t3, 4 * modes, tol) {
        return Err(ModelError::NotPure);
    }
    let space = defect(&tr.t3.adjoint(), tol)?;
    let r = space.rank();
    let d = tr.order();
    let adj = tr.t3.adjoint();
    let mut w = ComplexMatrix::zeros(modes * r, d);
    let mut power = ComplexMatrix::identity(d);
    let comp = space.basis.adjoint();
    for k in 0..modes {
        let block = &(&comp * &space.d) * &power;
        w.set_block(k * r, 0, &block);
        power = &power * &adj;
    }
    let tail = operator_norm(&power);
    if tail > tail_tol {
        return Err(ModelError::TailNotReached { achieved: tail, requested: tail_tol, modes });
    }
    Ok(Embedding { w, tail, fiber_dim: r })
}

#[derive(Debug, Clone)]
pub struct DilationReport {
    /// ||W* Q1 - T1 W*||, ||W* Q2 - T2 W*||, ||W* V - T3 W*||.
    pub intertwining: [f64; 3],
    /// max over m1 + m2 + n <= max_degree of
    /// ||W* Q1^{m1} Q2^{m2} V^n W - T1^{m1} T2^{m2} T3^n||.
    pub monomial_max: f64,
    pub monomials: Vec<(usize, usize, usize, f64)>,
    pub isometry_defect: f64,
    pub tail: f64,
}

/// Compares compressions of dilation monomials against the triple's own
/// monomials. `mt` must be built from the fundamental operators of the
/// adjoint triple and `w` from `embed_w`.
pub fn verify_dilation(
    tr: &OperatorTriple,
    mt: &ModelTriple,
    emb: &Embedding,
    max_degree: usize,
) -> DilationReport {
    let w = &emb.w;
    let wadj = w.adjoint();
    let intertwining = [
        operator_norm(&(&wadj * &mt.q1).sub(&(&tr.t1 * &wadj))),
        operator_norm(&(&wadj * &mt.q2).sub(&(&tr.t2 * &wadj))),
        operator_norm(&(&wadj * &mt.v).sub(&(&tr.t3 * &wadj))),
    ];
    let isometry_defect =
        operator_norm(&(&wadj * w).sub(&ComplexMatrix::identity(tr.order())));
    let deg = max_degree;
    let q1p = powers(&mt.q1, deg);
    let q2p = powers(&mt.q2, deg);
    let vp = powers(&mt.v, deg);
    let t1p = powers(&tr.t1, deg);
    let t2p = powers(&tr.t2, deg);
    let t3p = powers(&tr.t3, deg);
    let mut monomials = Vec::new();
    let mut monomial_max = 0.0f64;
    for m1 in 0..=deg {
        for m2 in 0..=deg - m1 {
            for n in 0..=deg - m1 - m2 {
                let big = &(&q1p[m1] * &q2p[m2]) * &vp[n];
                let compressed = &(&wadj * &big) * w;
                let small = &(&t1p[m1] * &t2p[m2]) * &t3p[n];
                let res = operator_norm(&compressed.sub(&small));
                monomial_max = monomial_max.max(res);
                monomials.push((m1, m2, n, res));
            }
        }
    }
    DilationReport { intertwining, monomial_max, monomials, isometry_defect, tail: emb.tail }
}

fn powers(m: &ComplexMatrix, up_to: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(up_to + 1);
    out.push(ComplexMatrix::identity(m.order()));
    for k in 1..=up_to {
        let next = &out[k - 1] * m;
        out.push(next);
    }
    out
}

/// Characteristic function of a contraction at z, as a matrix from the
/// defect basis of T to the defect basis of T*:
/// Theta(z) = [-T + z D_{T*} (I - z T*)^{-1} D_T] restricted to ran(D_T).
pub fn characteristic_function(
    t: &ComplexMatrix,
    z: Complex64,
    tol: &Tolerance,
) -> Result<ComplexMatrix, ModelError> {
    let (space_t, space_tstar, resolvent) = char_fn_parts(t, z, tol)?;
    let full = t
        .scale(Complex64::new(-1.0, 0.0))
        .add(&(&(&space_tstar.d * &resolvent) * &space_t.d).scale(z));
    Ok(&(&space_tstar.basis.adjoint() * &full) * &space_t.basis)
}

fn char_fn_parts(
    t: &ComplexMatrix,
    z: Complex64,
    tol: &Tolerance,
) -> Result<(fundops::DefectSpace, fundops::DefectSpace, ComplexMatrix), ModelError> {
    let n = t.order();
    let space_t = defect(t, tol)?;
    let space_tstar = defect(&t.adjoint(), tol)?;
    let shifted = ComplexMatrix::identity(n).sub(&t.adjoint().scale(z));
    let lu = Lu::factor(&shifted).map_err(|_| ModelError::ResolventSingular)?;
    let resolvent = lu.solve_matrix(&ComplexMatrix::identity(n));
    Ok((space_t, space_tstar, resolvent))
}

/// Residual of the kernel identity
/// I - Theta(w) Theta(z)* = (1 - w conj(z)) D_{T*} (I - w T*)^{-1} (I - conj(z) T)^{-1} D_{T*}
/// compressed to the defect basis of T*.
pub fn char_kernel_residual(
    t: &ComplexMatrix,
    z: Complex64,
    w: Complex64,
    tol: &Tolerance,
) -> Result<f64, ModelError> {
    let n = t.order();
    let theta_w = characteristic_function(t, w, tol)?;
    let theta_z = characteristic_function(t, z, tol)?;
    let space_tstar = defect(&t.adjoint(), tol)?;
    let r = space_tstar.rank();
    let lhs = ComplexMatrix::identity(r).sub(&(&theta_w * &theta_z.adjoint()));

    let lu_w = Lu::factor(&ComplexMatrix::identity(n).sub(&t.adjoint().scale(w)))
        .map_err(|_| ModelError::ResolventSingular)?;
    let lu_z = Lu::factor(&ComplexMatrix::identity(n).sub(&t.scale(z.conj())))
        .map_err(|_| ModelError::ResolventSingular)?;
    let inner = lu_w.solve_matrix(&lu_z.solve_matrix(&space_tstar.d));
    let full = (&space_tstar.d * &inner).scale(Complex64::new(1.0, 0.0) - w * z.conj());
    let rhs = space_tstar.compress(&full);
    Ok(operator_norm(&lhs.sub(&rhs)))
}

/// Taylor coefficients of Theta_T: C_0 = -T, C_k = D_{T*} T*^{k-1} D_T for
/// k >= 1, compressed to (defect basis of T) -> (defect basis of T*).
pub fn theta_coefficients(
    t: &ComplexMatrix,
    count: usize,
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>, ModelError> {
    let space_t = defect(t, tol)?;
    let space_tstar = defect(&t.adjoint(), tol)?;
    let left = space_tstar.basis.adjoint();
    let mut coeffs = Vec::with_capacity(count);
    coeffs.push(&(&left * &t.scale(Complex64::new(-1.0, 0.0))) * &space_t.basis);
    let adj = t.adjoint();
    let mut power = ComplexMatrix::identity(t.order());
    for _ in 1..count {
        let full = &(&space_tstar.d * &power) * &space_t.d;
        coeffs.push(&(&left * &full) * &space_t.basis);
        power = &power * &adj;
    }
    Ok(coeffs)
}

#[derive(Debug, Clone)]
pub struct ModelIdentityReport {
    /// ||W W* + M M* - I|| restricted to the leading (N - buffer) modes.
    pub residual: f64,
    pub tail: f64,
    pub window_modes: usize,
}

/// Checks W W* + M_Theta M_Theta* = I on the truncated Hardy space over the
/// defect space of T3*, leaving a buffer of top modes out of the window to
/// absorb the edge of the finite Toeplitz section.
pub fn verify_model_identity(
    tr: &OperatorTriple,
    modes: usize,
    buffer: usize,
    tail_tol: f64,
    tol: &Tolerance,
) -> Result<ModelIdentityReport, ModelError> {
    assert!(buffer < modes, "buffer must leave a nonempty window");
    let emb = embed_w(tr, modes, tail_tol, tol)?;
    let coeffs = theta_coefficients(&tr.t3, modes, tol)?;
    let r_star = emb.fiber_dim;
    let r = coeffs[0].cols();
    // Block lower-triangular Toeplitz section of the multiplier.
    let mut m = ComplexMatrix::zeros(modes * r_star, modes * r);
    for i in 0..modes {
        for j in 0..=i {
            m.set_block(i * r_star, j * r, &coeffs[i - j]);
        }
    }
    let gram = (&emb.w * &emb.w.adjoint()).add(&(&m * &m.adjoint()));
    let window = (modes - buffer) * r_star;
    let windowed = gram.submatrix(0, window, 0, window);
    let residual = operator_norm(&windowed.sub(&ComplexMatrix::identity(window)));
    Ok(ModelIdentityReport { residual, tail: emb.tail, window_modes: modes - buffer })
}

/// Dilation pipeline for a pure triple: extract the adjoint triple's
/// fundamental operators, build the model, embed, and verify monomials.
pub fn dilation_pipeline(
    tr: &OperatorTriple,
    modes: usize,
    max_degree: usize,
    tail_tol: f64,
    tol: &Tolerance,
) -> Result<(ModelTriple, Embedding, DilationReport), ModelError> {
    let fp = extract_fundamental(&tr.adjoint(), tol)?;
    let mt = build_model(&fp.a1, &fp.a2, modes, tol)?;
    let emb = embed_w(tr, modes, tail_tol, tol)?;
    let report = verify_dilation(tr, &mt, &emb, max_degree);
    Ok((mt, emb, report))
}
