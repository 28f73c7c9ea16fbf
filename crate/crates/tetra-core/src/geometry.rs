//! Membership and boundary classification for the tetrablock and the
//! symmetrized bidisc.
//!
//! A point (x1, x2, x3) lies in the open tetrablock iff |x3| < 1 and its
//! unique beta-decomposition x1 = b1 + conj(b2) x3, x2 = b2 + conj(b1) x3
//! has |b1| + |b2| < 1. The distinguished boundary is the set with
//! |x3| = 1, x1 = conj(x2) x3 and |x2| <= 1, equivalently the part of the
//! closure with |x3| = 1.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Boundary-band half width used when no explicit band is supplied. All
/// downstream tests generate points analytically, so the band can be tight.
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("beta decomposition undefined on |x3| = 1 (|x3| = {0})")]
    BetaUndefined(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetraPoint {
    pub x1: Complex64,
    pub x2: Complex64,
    pub x3: Complex64,
}

impl TetraPoint {
    pub fn new(x1: Complex64, x2: Complex64, x3: Complex64) -> Self {
        TetraPoint { x1, x2, x3 }
    }

    /// Point built from a beta pair and x3; lands in the open tetrablock
    /// when |b1| + |b2| < 1 and |x3| < 1.
    pub fn from_beta(beta: BetaPair, x3: Complex64) -> Self {
        TetraPoint {
            x1: beta.beta1 + beta.beta2.conj() * x3,
            x2: beta.beta2 + beta.beta1.conj() * x3,
            x3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPair {
    pub beta1: Complex64,
    pub beta2: Complex64,
}

impl BetaPair {
    pub fn new(beta1: Complex64, beta2: Complex64) -> Self {
        BetaPair { beta1, beta2 }
    }

    pub fn modulus_sum(&self) -> f64 {
        self.beta1.norm() + self.beta2.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPoint {
    pub s: Complex64,
    pub p: Complex64,
}

impl GammaPoint {
    pub fn new(s: Complex64, p: Complex64) -> Self {
        GammaPoint { s, p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    Interior,
    DistinguishedBoundary,
    OtherTopBoundary,
    ClosureInteriorFace,
    Outside,
}

impl RegionTag {
    pub fn in_closure(self) -> bool {
        self != RegionTag::Outside
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionTag::Interior => "Interior",
            RegionTag::DistinguishedBoundary => "DistinguishedBoundary",
            RegionTag::OtherTopBoundary => "OtherTopBoundary",
            RegionTag::ClosureInteriorFace => "ClosureInteriorFace",
            RegionTag::Outside => "Outside",
        }
    }
}

impl std::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Open vs closed membership semantics. Closed semantics merges the open
/// interior and the |beta1| + |beta2| = 1 face into `ClosureInteriorFace`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Open,
    Closed,
}

/// Unique beta pair of a point with |x3| < 1:
/// beta1 = (x1 - conj(x2) x3) / (1 - |x3|^2), beta2 symmetric.
pub fn beta_decompose(pt: &TetraPoint, band: f64) -> Result<BetaPair, GeometryError> {
    let m3 = pt.x3.norm();
    if m3 >= 1.0 - band {
        return Err(GeometryError::BetaUndefined(m3));
    }
    let denom = 1.0 - m3 * m3;
    Ok(BetaPair {
        beta1: (pt.x1 - pt.x2.conj() * pt.x3) / denom,
        beta2: (pt.x2 - pt.x1.conj() * pt.x3) / denom,
    })
}

/// Total classification of a point relative to the tetrablock.
///
/// The |x3| = 1 band is tested first: there the beta decomposition is
/// undefined and membership in the closure is exactly the distinguished
/// boundary condition x1 = conj(x2) x3, |x2| <= 1.
pub fn classify_tetra(pt: &TetraPoint, band: f64, semantics: Semantics) -> RegionTag {
    let m3 = pt.x3.norm();
    if m3 > 1.0 + band {
        return RegionTag::Outside;
    }
    if m3 >= 1.0 - band {
        let db = (pt.x1 - pt.x2.conj() * pt.x3).norm() <= band && pt.x2.norm() <= 1.0 + band;
        return if db { RegionTag::DistinguishedBoundary } else { RegionTag::Outside };
    }
    let beta = beta_decompose(pt, band).expect("|x3| < 1 - band here");
    let sum = beta.modulus_sum();
    match semantics {
        Semantics::Open => {
            if sum < 1.0 - band {
                RegionTag::Interior
            } else if sum <= 1.0 + band {
                RegionTag::OtherTopBoundary
            } else {
                RegionTag::Outside
            }
        }
        Semantics::Closed => {
            if sum <= 1.0 + band {
                RegionTag::ClosureInteriorFace
            } else {
                RegionTag::Outside
            }
        }
    }
}

/// Evaluates 1 - z x1 - w x2 + z w x3 over a grid x grid sample of the
/// torus |z| = |w| = 1 and reports whether the minimum modulus stays above
/// `threshold`, together with the minimum itself.
///
/// For a point of the closed tetrablock the kernel has no zero on the
/// closed bidisc, so 1/kernel is holomorphic there and its supremum is
/// attained on the torus; the torus minimum is then the global minimum.
/// Outside points are detected when the kernel's zero set meets the torus,
/// which holds for the |x3| < 1, |beta_i| <= 1 constructions used by the
/// cross-validation suites.
pub fn kernel_check(pt: &TetraPoint, grid: usize, threshold: f64) -> (bool, f64) {
    let grid = grid.max(8);
    let step = std::f64::consts::TAU / grid as f64;
    let mut min = f64::INFINITY;
    for i in 0..grid {
        let z = Complex64::from_polar(1.0, i as f64 * step);
        let a = 1.0 - z * pt.x1;
        let b = pt.x2 - z * pt.x3;
        for j in 0..grid {
            let w = Complex64::from_polar(1.0, j as f64 * step);
            let m = (a - w * b).norm();
            if m < min {
                min = m;
            }
        }
    }
    (min > threshold, min)
}

/// Classification of (s, p) against the symmetrized bidisc via the roots
/// of q(l) = l^2 - s l + p.
pub fn gamma_classify(gp: &GammaPoint, band: f64, semantics: Semantics) -> RegionTag {
    let (r1, r2) = quadratic_roots(gp.s, gp.p);
    let (m1, m2) = (r1.norm(), r2.norm());
    let hi = m1.max(m2);
    let lo = m1.min(m2);
    let on_circle = |m: f64| (m - 1.0).abs() <= band;
    if on_circle(m1) && on_circle(m2) {
        return RegionTag::DistinguishedBoundary;
    }
    if hi > 1.0 + band {
        return RegionTag::Outside;
    }
    match semantics {
        Semantics::Open => {
            if hi < 1.0 - band {
                RegionTag::Interior
            } else {
                RegionTag::OtherTopBoundary
            }
        }
        Semantics::Closed => {
            let _ = lo;
            RegionTag::ClosureInteriorFace
        }
    }
}

/// Stable roots of l^2 - s l + p.
fn quadratic_roots(s: Complex64, p: Complex64) -> (Complex64, Complex64) {
    let half = s * Complex64::new(0.5, 0.0);
    let disc = (half * half - p).sqrt();
    let r1 = if (half + disc).norm() >= (half - disc).norm() { half + disc } else { half - disc };
    if r1.norm() == 0.0 {
        return (r1, r1);
    }
    (r1, p / r1)
}

/// True iff (x1 + z x2, z x3) lies in the closed symmetrized bidisc for
/// every sampled z on the unit circle; up to sampling resolution this is
/// membership of the point in the closed tetrablock.
pub fn gamma_lift_check(pt: &TetraPoint, samples: usize, band: f64) -> bool {
    let samples = samples.max(8);
    let step = std::f64::consts::TAU / samples as f64;
    (0..samples).all(|k| {
        let z = Complex64::from_polar(1.0, k as f64 * step);
        let gp = GammaPoint::new(pt.x1 + z * pt.x2, z * pt.x3);
        gamma_classify(&gp, band, Semantics::Closed).in_closure()
    })
}

/// Membership in bD_E = { (x1, x2, x1 x2) : |x1| = |x2| = 1 }.
pub fn in_bde(pt: &TetraPoint, band: f64) -> bool {
    (pt.x1.norm() - 1.0).abs() <= band
        && (pt.x2.norm() - 1.0).abs() <= band
        && (pt.x3 - pt.x1 * pt.x2).norm() <= band
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(x1: f64, x2: f64, x3: f64) -> TetraPoint {
        TetraPoint::new(c(x1, 0.0), c(x2, 0.0), c(x3, 0.0))
    }

    const BAND: f64 = BOUNDARY_BAND;

    #[test]
    fn beta_of_origin_and_face_point() {
        let b = beta_decompose(&pt(0.0, 0.0, 0.0), BAND).unwrap();
        assert!(b.beta1.norm() < 1e-15 && b.beta2.norm() < 1e-15);
        let b = beta_decompose(&pt(0.0, 1.0, 0.0), BAND).unwrap();
        assert!(b.beta1.norm() < 1e-15 && (b.beta2 - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn beta_forward_construction_inverts() {
        // Forward-construct from beta = (1/4, 1/8) at x3 = 1/2, then invert.
        let expect = BetaPair::new(c(0.25, 0.0), c(0.125, 0.0));
        let p = TetraPoint::from_beta(expect, c(0.5, 0.0));
        assert!((p.x1 - c(0.25 + 0.125 * 0.5, 0.0)).norm() < 1e-15);
        assert!((p.x2 - c(0.125 + 0.25 * 0.5, 0.0)).norm() < 1e-15);
        let b = beta_decompose(&p, BAND).unwrap();
        assert!((b.beta1 - expect.beta1).norm() < 1e-14);
        assert!((b.beta2 - expect.beta2).norm() < 1e-14);
    }

    #[test]
    fn beta_rejects_unit_x3() {
        assert!(matches!(
            beta_decompose(&pt(0.0, 0.0, 1.0), BAND),
            Err(GeometryError::BetaUndefined(_))
        ));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_tetra(&pt(0.0, 0.0, 0.0), BAND, Semantics::Open), RegionTag::Interior);
        assert_eq!(
            classify_tetra(&pt(1.0, 0.0, 0.0), BAND, Semantics::Open),
            RegionTag::OtherTopBoundary
        );
        assert_eq!(
            classify_tetra(&pt(0.0, 1.0, 0.0), BAND, Semantics::Open),
            RegionTag::OtherTopBoundary
        );
        assert_eq!(
            classify_tetra(&pt(0.0, 0.0, 1.0), BAND, Semantics::Open),
            RegionTag::DistinguishedBoundary
        );
        assert_eq!(classify_tetra(&pt(2.0, 0.0, 0.0), BAND, Semantics::Open), RegionTag::Outside);
        assert_eq!(
            classify_tetra(&pt(1.0, 0.0, 0.0), BAND, Semantics::Closed),
            RegionTag::ClosureInteriorFace
        );
    }

    #[test]
    fn kernel_check_examples() {
        let (ok, min) = kernel_check(&pt(0.0, 0.0, 0.0), 64, 1e-9);
        assert!(ok && (min - 1.0).abs() < 1e-12);
        let (ok, min) = kernel_check(&pt(1.0, 0.0, 0.0), 64, 1e-9);
        assert!(!ok && min < 1e-12);
        let (ok, min) = kernel_check(&pt(0.0, 1.0, 0.0), 64, 1e-9);
        assert!(!ok && min < 1e-12);
    }

    #[test]
    fn gamma_examples() {
        let db = RegionTag::DistinguishedBoundary;
        assert_eq!(
            gamma_classify(&GammaPoint::new(c(0.0, 0.0), c(0.0, 0.0)), BAND, Semantics::Open),
            RegionTag::Interior
        );
        assert_eq!(
            gamma_classify(&GammaPoint::new(c(2.0, 0.0), c(1.0, 0.0)), BAND, Semantics::Open),
            db
        );
        assert_eq!(
            gamma_classify(&GammaPoint::new(c(0.0, 0.0), c(1.0, 0.0)), BAND, Semantics::Open),
            db
        );
        assert_eq!(
            gamma_classify(&GammaPoint::new(c(3.0, 0.0), c(1.0, 0.0)), BAND, Semantics::Open),
            RegionTag::Outside
        );
    }

    #[test]
    fn gamma_lift_examples() {
        assert!(gamma_lift_check(&pt(0.0, 0.0, 0.0), 32, BAND));
        assert!(!gamma_lift_check(&pt(2.0, 0.0, 0.0), 32, BAND));
        assert!(gamma_lift_check(&pt(0.0, 0.0, 1.0), 32, BAND));
    }

    #[test]
    fn bde_examples() {
        assert!(in_bde(&pt(1.0, 1.0, 1.0), BAND));
        assert!(in_bde(&pt(1.0, -1.0, -1.0), BAND));
        assert!(!in_bde(&pt(0.0, 0.0, 1.0), BAND));
    }

    #[test]
    fn bde_implies_distinguished_boundary() {
        // bD_E sits inside bE: x1 = conj(x2) x3 holds there.
        for k in 0..16 {
            let a = std::f64::consts::TAU * k as f64 / 16.0;
            let x1 = Complex64::from_polar(1.0, a);
            let x2 = Complex64::from_polar(1.0, 1.7 * a + 0.3);
            let p = TetraPoint::new(x1, x2, x1 * x2);
            assert!(in_bde(&p, BAND));
            assert_eq!(
                classify_tetra(&p, BAND, Semantics::Open),
                RegionTag::DistinguishedBoundary
            );
        }
    }
}
