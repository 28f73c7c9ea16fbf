//! Defect operators, fundamental operators and the class predicates for
//! commuting triples: sufficiency certificates for being a tetrablock
//! contraction, isometry/unitary checks and purity.
//!
//! The fundamental operators of a triple (T1, T2, T3) are the unique pair
//! (A1, A2) on the defect space of T3 solving
//!   T1 - T2* T3 = D A1 D,   T2 - T1* T3 = D A2 D,   D = (I - T3* T3)^{1/2},
//! reported here in an orthonormal basis of ran(D) ordered by decreasing
//! singular value of D.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    self, commutator, eigh, numerical_radius, operator_norm, range_restricted_solve, spectral_radius,
    sqrt_psd, ComplexMatrix, Tolerance, RADIUS_GRID,
};

#[derive(Debug, Clone, Error)]
pub enum FundopsError {
    #[error("triple members must be square matrices of equal order")]
    ShapeMismatch,
    #[error("triple does not commute: [T{0},T{1}] has norm {2:.3e}")]
    NotCommuting(usize, usize, f64),
    #[error("operator is not a contraction (norm {0:.6})")]
    NotAContraction(f64),
    #[error("fundamental equation {index} fails on the defect space (residual {residual:.3e})")]
    FundamentalEquationsFail { index: usize, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// A commuting triple with its pairwise commutation residuals
/// (T1T2, T1T3, T2T3 order).
#[derive(Debug, Clone)]
pub struct OperatorTriple {
    pub t1: ComplexMatrix,
    pub t2: ComplexMatrix,
    pub t3: ComplexMatrix,
    pub residuals: [f64; 3],
}

impl OperatorTriple {
    pub fn new(
        t1: ComplexMatrix,
        t2: ComplexMatrix,
        t3: ComplexMatrix,
        tol: &Tolerance,
    ) -> Result<Self, FundopsError> {
        if !t1.is_square() || t1.rows() != t2.rows() || t2.rows() != t3.rows() {
            return Err(FundopsError::ShapeMismatch);
        }
        let pairs = [(&t1, &t2, 1, 2), (&t1, &t3, 1, 3), (&t2, &t3, 2, 3)];
        let mut residuals = [0.0; 3];
        for (k, (a, b, i, j)) in pairs.iter().enumerate() {
            let res = operator_norm(&commutator(a, b)?);
            let scale = 1.0 + operator_norm(a) * operator_norm(b);
            if res > tol.abs.max(tol.rel) * scale {
                return Err(FundopsError::NotCommuting(*i, *j, res));
            }
            residuals[k] = res;
        }
        Ok(OperatorTriple { t1, t2, t3, residuals })
    }

    pub fn order(&self) -> usize {
        self.t1.order()
    }

    /// The adjoint triple (T1*, T2*, T3*).
    pub fn adjoint(&self) -> OperatorTriple {
        OperatorTriple {
            t1: self.t1.adjoint(),
            t2: self.t2.adjoint(),
            t3: self.t3.adjoint(),
            residuals: self.residuals,
        }
    }

    pub fn scalar(x1: Complex64, x2: Complex64, x3: Complex64) -> OperatorTriple {
        OperatorTriple {
            t1: ComplexMatrix::scalar(x1),
            t2: ComplexMatrix::scalar(x2),
            t3: ComplexMatrix::scalar(x3),
            residuals: [0.0; 3],
        }
    }
}

/// Defect operator D = (I - T*T)^{1/2} together with an orthonormal basis
/// of ran(D), columns ordered by decreasing singular value of D.
#[derive(Debug, Clone)]
pub struct DefectSpace {
    pub d: ComplexMatrix,
    pub basis: ComplexMatrix,
    pub singular_values: Vec<f64>,
}

impl DefectSpace {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    /// Compresses a full-space operator supported on the defect space to
    /// basis coordinates.
    pub fn compress(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.basis.adjoint() * m) * &self.basis
    }
}

pub fn defect(t: &ComplexMatrix, tol: &Tolerance) -> Result<DefectSpace, FundopsError> {
    let norm = operator_norm(t);
    if norm > 1.0 + tol.effective(1.0) {
        return Err(FundopsError::NotAContraction(norm));
    }
    let gram = ComplexMatrix::identity(t.order()).sub(&(&t.adjoint() * t));
    let d = sqrt_psd(&gram, tol)?;
    let (vals, vecs) = eigh(&d);
    let sigma_max = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol.abs + tol.rel * sigma_max;
    let rank = vals.iter().take_while(|&&v| v > cutoff).count();
    let basis = vecs.submatrix(0, t.order(), 0, rank);
    Ok(DefectSpace { d, basis, singular_values: vals[..rank].to_vec() })
}

/// Fundamental operators expressed in the defect basis, with the residuals
/// of the two defining equations.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub defect_basis: ComplexMatrix,
    pub residual1: f64,
    pub residual2: f64,
}

pub fn extract_fundamental(
    tr: &OperatorTriple,
    tol: &Tolerance,
) -> Result<FundamentalPair, FundopsError> {
    let space = defect(&tr.t3, tol)?;
    let rhs1 = tr.t1.sub(&(&tr.t2.adjoint() * &tr.t3));
    let rhs2 = tr.t2.sub(&(&tr.t1.adjoint() * &tr.t3));
    let sol1 = range_restricted_solve(&space.d, &rhs1, tol).map_err(|e| match e {
        linalg::LinalgError::UnsolvableOnRange(r) => {
            FundopsError::FundamentalEquationsFail { index: 1, residual: r }
        }
        other => FundopsError::Linalg(other),
    })?;
    let sol2 = range_restricted_solve(&space.d, &rhs2, tol).map_err(|e| match e {
        linalg::LinalgError::UnsolvableOnRange(r) => {
            FundopsError::FundamentalEquationsFail { index: 2, residual: r }
        }
        other => FundopsError::Linalg(other),
    })?;
    Ok(FundamentalPair {
        a1: space.compress(&sol1.x),
        a2: space.compress(&sol2.x),
        defect_basis: space.basis,
        residual1: sol1.residual,
        residual2: sol2.residual,
    })
}

/// max over sampled |z| = 1 of the numerical radius of A1 + z A2.
///
/// The maximum over the closed disc is attained on the circle: for each
/// rotation angle the sweep function is the top eigenvalue of a matrix
/// affine in (Re z, Im z), hence convex in z, and a max of convex
/// functions is convex.
pub fn fundamental_radius_sweep(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    circle_grid: usize,
    radius_grid: usize,
) -> f64 {
    let circle_grid = circle_grid.max(16);
    let step = std::f64::consts::TAU / circle_grid as f64;
    let mut max = 0.0f64;
    for k in 0..circle_grid {
        let z = Complex64::from_polar(1.0, k as f64 * step);
        let omega = numerical_radius(&a1.add(&a2.scale(z)), radius_grid);
        max = max.max(omega);
    }
    max
}

/// True together with the swept maximum when ω(A1 + z A2) <= 1 + tol over
/// the sampled circle.
pub fn verify_fundamental_radius(
    fp: &FundamentalPair,
    grid: usize,
    tol: &Tolerance,
) -> (bool, f64) {
    let max = fundamental_radius_sweep(&fp.a1, &fp.a2, grid, RADIUS_GRID);
    (max <= 1.0 + tol.effective(1.0), max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sufficiency {
    /// All hypotheses hold: the triple is certified a tetrablock contraction.
    Certified,
    /// Some ||Ti|| exceeds 1: certainly not a contraction triple.
    NotAContraction,
    /// Hypotheses fail but nothing is disproved; the criterion is one-sided.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct SufficiencyReport {
    pub verdict: Sufficiency,
    pub commutator_norm: f64,
    pub selfcommutator_defect: f64,
    pub radius: f64,
    pub norms: [f64; 3],
}

/// Sufficiency certificate: commuting fundamental operators with
/// [A1*,A1] = [A2*,A2] and ω(A1 + z A2) <= 1 on the circle, together with
/// contractive T's, certify a tetrablock contraction. Failure of any part
/// is reported as inconclusive, never as a disproof.
pub fn check_sufficiency(
    tr: &OperatorTriple,
    fp: &FundamentalPair,
    grid: usize,
    tol: &Tolerance,
) -> SufficiencyReport {
    let norms = [
        operator_norm(&tr.t1),
        operator_norm(&tr.t2),
        operator_norm(&tr.t3),
    ];
    let commutator_norm = operator_norm(&commutator(&fp.a1, &fp.a2).expect("same order"));
    let c1 = commutator(&fp.a1.adjoint(), &fp.a1).expect("square");
    let c2 = commutator(&fp.a2.adjoint(), &fp.a2).expect("square");
    let selfcommutator_defect = operator_norm(&c1.sub(&c2));
    let (radius_ok, radius) = verify_fundamental_radius(fp, grid, tol);
    let eff = tol.effective(1.0);
    let contraction_ok = norms.iter().all(|&n| n <= 1.0 + eff);
    let hyp_scale = 1.0 + operator_norm(&fp.a1) + operator_norm(&fp.a2);
    let hyp_ok = commutator_norm <= tol.effective(hyp_scale)
        && selfcommutator_defect <= tol.effective(hyp_scale);
    let verdict = if !contraction_ok {
        Sufficiency::NotAContraction
    } else if hyp_ok && radius_ok {
        Sufficiency::Certified
    } else {
        Sufficiency::Inconclusive
    };
    SufficiencyReport { verdict, commutator_norm, selfcommutator_defect, radius, norms }
}

/// T3 an isometry, T2 a contraction and T1 = T2* T3.
pub fn check_e_isometry(tr: &OperatorTriple, tol: &Tolerance) -> bool {
    let eff = tol.effective(1.0);
    let isometry_defect = operator_norm(
        &(&tr.t3.adjoint() * &tr.t3).sub(&ComplexMatrix::identity(tr.order())),
    );
    isometry_defect <= eff
        && operator_norm(&tr.t2) <= 1.0 + eff
        && operator_norm(&tr.t1.sub(&(&tr.t2.adjoint() * &tr.t3))) <= eff
}

/// T3 unitary, T2 a contraction and T1 = T2* T3. When those hold, T1 and
/// T2 must come out normal; the normality defect is folded into the
/// predicate as a consistency check.
pub fn check_e_unitary(tr: &OperatorTriple, tol: &Tolerance) -> bool {
    let eff = tol.effective(1.0);
    let id = ComplexMatrix::identity(tr.order());
    let unitary = operator_norm(&(&tr.t3.adjoint() * &tr.t3).sub(&id)) <= eff
        && operator_norm(&(&tr.t3 * &tr.t3.adjoint()).sub(&id)) <= eff;
    if !unitary
        || operator_norm(&tr.t2) > 1.0 + eff
        || operator_norm(&tr.t1.sub(&(&tr.t2.adjoint() * &tr.t3))) > eff
    {
        return false;
    }
    let normal = |t: &ComplexMatrix| {
        let scale = 1.0 + operator_norm(t).powi(2);
        operator_norm(&commutator(&t.adjoint(), t).expect("square")) <= 10.0 * tol.effective(scale)
    };
    normal(&tr.t1) && normal(&tr.t2)
}

/// Purity of a contraction: adjoint powers go to zero strongly. For
/// matrices this is spectral radius < 1, with a norm-decay fallback for
/// radii within tolerance of 1.
pub fn check_pure(t3: &ComplexMatrix, powers: usize, tol: &Tolerance) -> bool {
    let eff = tol.effective(1.0);
    if operator_norm(t3) > 1.0 + eff {
        return false;
    }
    match spectral_radius(t3) {
        Ok(r) if r < 1.0 - eff => true,
        _ => {
            let adj = t3.adjoint();
            let mut power = adj.clone();
            for _ in 0..powers.max(1) {
                if operator_norm(&power) <= eff {
                    return true;
                }
                power = &power * &adj;
            }
            false
        }
    }
}

/// Joint spectrum of the triple: tuples (x1, x2, x3) from simultaneous
/// deflation of all three matrices.
pub fn joint_spectrum_triple(
    tr: &OperatorTriple,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<(Complex64, Complex64, Complex64)>, crate::jointspec::JointSpecError> {
    let tuples = crate::jointspec::joint_eigenvalues_multi(
        &[tr.t1.clone(), tr.t2.clone(), tr.t3.clone()],
        seed,
        tol,
    )?;
    Ok(tuples.into_iter().map(|t| (t[0], t[1], t[2])).collect())
}
