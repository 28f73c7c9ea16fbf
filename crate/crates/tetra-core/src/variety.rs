//! Sampling and classification of the one-dimensional varieties
//! Ω = { (x1, x2, x3) : (x1, x2) ∈ σ_T(A1* + x3 A2, A2* + x3 A1) }
//! attached to a commuting pair with [A1*, A1] = [A2*, A2], plus the
//! projection (x1, x2, x3) -> (x1 + x2, x3) into the symmetrized bidisc.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{self, GammaPoint, RegionTag, Semantics, TetraPoint};
use crate::jointspec::{self, JointSpecError};
use crate::linalg::{self, commutator, determinant, operator_norm, ComplexMatrix, Tolerance};

#[derive(Debug, Clone, Error)]
pub enum VarietyError {
    #[error("variety hypothesis violated: {which} has norm {norm:.3e}")]
    HypothesisViolated { which: &'static str, norm: f64 },
    #[error("parameters must be square matrices of equal order")]
    ShapeMismatch,
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Validated variety parameters together with their hypothesis report.
#[derive(Debug, Clone)]
pub struct VarietyParams {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub commutator_norm: f64,
    pub selfcommutator_defect: f64,
    /// max over the validation grid of ||A1* + A2 z||, |z| = 1.
    pub sup_norm: f64,
    pub sup_grid: usize,
}

impl VarietyParams {
    pub fn new(
        a1: &ComplexMatrix,
        a2: &ComplexMatrix,
        sup_grid: usize,
        tol: &Tolerance,
    ) -> Result<Self, VarietyError> {
        if !a1.is_square() || !a2.is_square() || a1.order() != a2.order() {
            return Err(VarietyError::ShapeMismatch);
        }
        let commutator_norm = operator_norm(&commutator(a1, a2)?);
        let c1 = commutator(&a1.adjoint(), a1)?;
        let c2 = commutator(&a2.adjoint(), a2)?;
        let selfcommutator_defect = operator_norm(&c1.sub(&c2));
        let scale = 1.0 + operator_norm(a1) + operator_norm(a2);
        if commutator_norm > tol.effective(scale) {
            return Err(VarietyError::HypothesisViolated {
                which: "[A1,A2]",
                norm: commutator_norm,
            });
        }
        if selfcommutator_defect > tol.effective(scale) {
            return Err(VarietyError::HypothesisViolated {
                which: "[A1*,A1]-[A2*,A2]",
                norm: selfcommutator_defect,
            });
        }
        let sup_norm = pencil_sup_norm(a1, a2, sup_grid);
        Ok(VarietyParams {
            a1: a1.clone(),
            a2: a2.clone(),
            commutator_norm,
            selfcommutator_defect,
            sup_norm,
            sup_grid,
        })
    }

    pub fn order(&self) -> usize {
        self.a1.order()
    }

    /// The commuting pencil pair (A1* + x3 A2, A2* + x3 A1).
    pub fn pencil(&self, x3: Complex64) -> (ComplexMatrix, ComplexMatrix) {
        (
            self.a1.adjoint().add(&self.a2.scale(x3)),
            self.a2.adjoint().add(&self.a1.scale(x3)),
        )
    }
}

/// max over a circle grid of ||A1* + A2 z||.
pub fn pencil_sup_norm(a1: &ComplexMatrix, a2: &ComplexMatrix, grid: usize) -> f64 {
    let grid = grid.max(16);
    let step = std::f64::consts::TAU / grid as f64;
    let a1adj = a1.adjoint();
    (0..grid)
        .map(|k| operator_norm(&a1adj.add(&a2.scale(Complex64::from_polar(1.0, k as f64 * step)))))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloudPoint {
    #[serde(skip)]
    pub x1: Complex64,
    #[serde(skip)]
    pub x2: Complex64,
    #[serde(skip)]
    pub x3: Complex64,
    /// Smallest singular value of the stacked shifted pencil at this point.
    pub residual: f64,
    pub tag: RegionTag,
}

impl CloudPoint {
    pub fn tetra_point(&self) -> TetraPoint {
        TetraPoint::new(self.x1, self.x2, self.x3)
    }
}

#[derive(Debug, Clone)]
pub struct VarietyRecord {
    pub x3: Complex64,
    pub points: Vec<CloudPoint>,
}

#[derive(Debug, Clone)]
pub struct SampleFailure {
    pub x3: Complex64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct VarietyPointCloud {
    pub records: Vec<VarietyRecord>,
    pub failures: Vec<SampleFailure>,
}

impl VarietyPointCloud {
    pub fn iter_points(&self) -> impl Iterator<Item = &CloudPoint> {
        self.records.iter().flat_map(|r| r.points.iter())
    }

    pub fn len(&self) -> usize {
        self.records.iter().map(|r| r.points.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Default radii for the x3 sampling circles.
pub const DEFAULT_RADII: [f64; 7] = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];

/// x3 samples on concentric circles at the default radii.
pub fn default_x3_circles(angles: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    for &r in DEFAULT_RADII.iter() {
        if r == 0.0 {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        out.extend(circle(r, angles));
    }
    out
}

/// Uniform circle samples at midpoint angles (k + 1/2) * step; isolated
/// contacts at the compass points (such as a single bD_E touch at x3 = 1)
/// then do not alias the grid.
pub fn circle(radius: f64, angles: usize) -> Vec<Complex64> {
    let angles = angles.max(1);
    let step = std::f64::consts::TAU / angles as f64;
    (0..angles).map(|k| Complex64::from_polar(radius, (k as f64 + 0.5) * step)).collect()
}

/// Samples the variety at the given x3 values. Each sample forms the
/// pencil pair, verifies commutation, and reads the joint spectrum; failed
/// samples are recorded rather than fatal. Samples are processed in
/// parallel with per-sample derived seeds, so the output is order-stable.
pub fn sample_variety(
    vp: &VarietyParams,
    x3_samples: &[Complex64],
    seed: u64,
    band: f64,
    tol: &Tolerance,
) -> VarietyPointCloud {
    let results: Vec<Result<VarietyRecord, SampleFailure>> = x3_samples
        .par_iter()
        .enumerate()
        .map(|(idx, &x3)| sample_one(vp, x3, seed.wrapping_add(idx as u64), band, tol))
        .collect();
    let mut cloud = VarietyPointCloud::default();
    for r in results {
        match r {
            Ok(rec) => cloud.records.push(rec),
            Err(f) => cloud.failures.push(f),
        }
    }
    cloud
}

fn sample_one(
    vp: &VarietyParams,
    x3: Complex64,
    seed: u64,
    band: f64,
    tol: &Tolerance,
) -> Result<VarietyRecord, SampleFailure> {
    let (m1, m2) = vp.pencil(x3);
    let pair = jointspec::verify_commuting(&m1, &m2, tol)
        .map_err(|e| SampleFailure { x3, message: e.to_string() })?;
    let spectrum = jointspec::joint_eigenvalues(&pair, seed, tol)
        .map_err(|e: JointSpecError| SampleFailure { x3, message: e.to_string() })?;
    let points = spectrum
        .pairs
        .iter()
        .zip(&spectrum.residuals)
        .map(|(&(x1, x2), &residual)| {
            let tag = geometry::classify_tetra(&TetraPoint::new(x1, x2, x3), band, Semantics::Open);
            CloudPoint { x1, x2, x3, residual, tag }
        })
        .collect();
    Ok(VarietyRecord { x3, points })
}

/// det[z1 (A1* + x3 A2 - x1 I) + z2 (A2* + x3 A1 - x2 I)]; the point lies
/// on the variety iff this vanishes for every (z1, z2) in the closed
/// bidisc.
pub fn pencil_det(
    vp: &VarietyParams,
    x: &TetraPoint,
    z1: Complex64,
    z2: Complex64,
) -> Complex64 {
    let n = vp.order();
    let (m1, m2) = vp.pencil(x.x3);
    let shift = |m: &ComplexMatrix, v: Complex64| -> ComplexMatrix {
        let mut out = m.clone();
        for i in 0..n {
            out[(i, i)] -= v;
        }
        out
    };
    let combined = shift(&m1, x.x1).scale(z1).add(&shift(&m2, x.x2).scale(z2));
    determinant(&combined)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistinguishedVerdict {
    /// sup-norm < 1: the variety provably exits through the
    /// distinguished boundary.
    Distinguished,
    /// sup-norm = 1 within band, every boundary sample lands on the
    /// distinguished boundary and every interior sample stays interior.
    DistinguishedEmpirical,
    NotDistinguished { witness: CloudPoint },
    HypothesisViolated { sup_norm: f64 },
    Inconclusive { reason: String },
}

impl DistinguishedVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistinguishedVerdict::Distinguished => "Distinguished",
            DistinguishedVerdict::DistinguishedEmpirical => "Distinguished-Empirical",
            DistinguishedVerdict::NotDistinguished { .. } => "NotDistinguished",
            DistinguishedVerdict::HypothesisViolated { .. } => "HypothesisViolated",
            DistinguishedVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistinguishedReport {
    pub verdict: DistinguishedVerdict,
    pub sup_norm: f64,
    pub boundary_cloud: VarietyPointCloud,
    pub interior_cloud: VarietyPointCloud,
}

/// Distinguished-variety verdict.
///
/// sup-norm strictly below 1 certifies the variety; strictly above 1
/// violates the representation hypotheses. In the band around 1 the exit
/// behavior is probed empirically: boundary samples |x3| = 1 must classify
/// onto the distinguished boundary, interior samples |x3| <= 1 - delta must
/// stay interior. The witness of a negative verdict is taken from the first
/// offending sample, lexicographically largest point first, so reruns
/// report the same point.
pub fn classify_distinguished(
    vp: &VarietyParams,
    boundary_angles: usize,
    interior_angles: usize,
    delta: f64,
    seed: u64,
    band: f64,
    tol: &Tolerance,
) -> DistinguishedReport {
    // The grid sup-norm underestimates by at most ||A2|| * step / 2.
    let grid_slack = operator_norm(&vp.a2) * std::f64::consts::PI / vp.sup_grid as f64;
    let s_band = tol.effective(1.0) + grid_slack;
    let sup = vp.sup_norm;

    let boundary_cloud = sample_variety(vp, &circle(1.0, boundary_angles), seed, band, tol);
    let interior_samples: Vec<Complex64> = {
        let mut v = vec![Complex64::new(0.0, 0.0)];
        let radii: Vec<f64> = DEFAULT_RADII
            .iter()
            .copied()
            .filter(|&r| r > 0.0 && r <= 1.0 - delta)
            .collect();
        for &r in &radii {
            v.extend(circle(r, interior_angles));
        }
        if radii.iter().all(|&r| (r - (1.0 - delta)).abs() > 1e-12) {
            v.extend(circle(1.0 - delta, interior_angles));
        }
        v
    };
    let interior_cloud = sample_variety(vp, &interior_samples, seed, band, tol);

    let verdict = (|| {
        if sup > 1.0 + s_band {
            return DistinguishedVerdict::HypothesisViolated { sup_norm: sup };
        }
        if !boundary_cloud.failures.is_empty() || !interior_cloud.failures.is_empty() {
            return DistinguishedVerdict::Inconclusive {
                reason: format!(
                    "{} samples failed",
                    boundary_cloud.failures.len() + interior_cloud.failures.len()
                ),
            };
        }
        if sup < 1.0 - s_band {
            return DistinguishedVerdict::Distinguished;
        }
        for rec in &interior_cloud.records {
            let offenders: Vec<&CloudPoint> =
                rec.points.iter().filter(|p| p.tag != RegionTag::Interior).collect();
            if let Some(w) = lex_max(&offenders) {
                return DistinguishedVerdict::NotDistinguished { witness: *w };
            }
        }
        for rec in &boundary_cloud.records {
            let offenders: Vec<&CloudPoint> = rec
                .points
                .iter()
                .filter(|p| p.tag != RegionTag::DistinguishedBoundary)
                .collect();
            if let Some(w) = lex_max(&offenders) {
                return DistinguishedVerdict::NotDistinguished { witness: *w };
            }
        }
        DistinguishedVerdict::DistinguishedEmpirical
    })();

    DistinguishedReport { verdict, sup_norm: sup, boundary_cloud, interior_cloud }
}

fn lex_max<'a>(points: &[&'a CloudPoint]) -> Option<&'a CloudPoint> {
    points.iter().copied().max_by(|p, q| {
        let key = |c: &CloudPoint| [c.x1.re, c.x1.im, c.x2.re, c.x2.im, c.x3.re, c.x3.im];
        key(p).partial_cmp(&key(q)).unwrap()
    })
}

#[derive(Debug, Clone)]
pub struct BdeReport {
    /// No boundary sample lands on bD_E = {(x1, x2, x1 x2) : |x1|=|x2|=1}.
    pub disjoint_from_bde: bool,
    pub sup_norm_lt_1: bool,
    pub sup_norm: f64,
    pub bde_witness: Option<CloudPoint>,
}

/// Boundary criterion: for a distinguished variety, staying clear of bD_E
/// is equivalent to sup-norm < 1. Both sides are reported; disagreement
/// inside the tolerance band is possible and left to the caller.
pub fn check_bde_criterion(
    vp: &VarietyParams,
    boundary_angles: usize,
    seed: u64,
    band: f64,
    tol: &Tolerance,
) -> BdeReport {
    let cloud = sample_variety(vp, &circle(1.0, boundary_angles), seed, band, tol);
    let witness = cloud
        .iter_points()
        .find(|p| geometry::in_bde(&p.tetra_point(), band))
        .copied();
    let grid_slack = operator_norm(&vp.a2) * std::f64::consts::PI / vp.sup_grid as f64;
    BdeReport {
        disjoint_from_bde: witness.is_none(),
        sup_norm_lt_1: vp.sup_norm < 1.0 - tol.effective(1.0) - grid_slack,
        sup_norm: vp.sup_norm,
        bde_witness: witness,
    }
}

/// Projects cloud points to the symmetrized bidisc by (x1 + x2, x3) and
/// evaluates |det((A1 + A2)* + p (A1 + A2) - s I)| as a residual.
pub fn project_to_gamma(
    vp: &VarietyParams,
    cloud: &VarietyPointCloud,
) -> Vec<(GammaPoint, f64)> {
    let sum = vp.a1.add(&vp.a2);
    let sum_adj = sum.adjoint();
    let n = vp.order();
    cloud
        .iter_points()
        .map(|pt| {
            let s = pt.x1 + pt.x2;
            let p = pt.x3;
            let mut m = sum_adj.add(&sum.scale(p));
            for i in 0..n {
                m[(i, i)] -= s;
            }
            (GammaPoint::new(s, p), determinant(&m).norm())
        })
        .collect()
}
