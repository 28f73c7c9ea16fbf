//! Polynomial functional calculus for commuting triples and the von
//! Neumann inequality verifier over the boundary part of the variety
//! attached to a triple's fundamental operators.
//!
//! The verifier is one-sided safe: the right-hand side is a grid maximum
//! and underestimates the true supremum, so the pass criterion adds an
//! explicit Lipschitz-based sampling margin.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::fundops::{check_pure, extract_fundamental, FundopsError, OperatorTriple};
use crate::geometry::{RegionTag, TetraPoint};
use crate::linalg::{operator_norm, ComplexMatrix, Tolerance};
use crate::variety::{circle, sample_variety, VarietyError, VarietyParams, VarietyPointCloud};

#[derive(Debug, Clone, Error)]
pub enum VnError {
    #[error("polynomial parse error: {0}")]
    Parse(String),
    #[error("no cloud points left after filtering; sample the boundary more densely")]
    EmptyCloud,
    #[error("verifier hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error(transparent)]
    Fundops(#[from] FundopsError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
}

/// Holomorphic polynomial in (x1, x2, x3) with complex coefficients,
/// stored sparsely by exponent triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly3 {
    terms: BTreeMap<(u32, u32, u32), Complex64>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3 { terms: BTreeMap::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term((0, 0, 0), c);
        p
    }

    pub fn monomial(i: u32, j: u32, k: u32, c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term((i, j, k), c);
        p
    }

    pub fn add_term(&mut self, exp: (u32, u32, u32), c: Complex64) {
        let entry = self.terms.entry(exp).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() == 0.0 {
            self.terms.remove(&exp);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Complex64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j, k)| i + j + k).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (&(i1, j1, k1), &c1) in &self.terms {
            for (&(i2, j2, k2), &c2) in &other.terms {
                out.add_term((i1 + i2, j1 + j2, k1 + k2), c1 * c2);
            }
        }
        out
    }

    pub fn eval_point(&self, pt: &TetraPoint) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(i, j, k), &c)| {
                c * pt.x1.powu(i) * pt.x2.powu(j) * pt.x3.powu(k)
            })
            .sum()
    }

    /// Sum of c T1^i T2^j T3^k, powers via repeated squaring. For commuting
    /// inputs the factor order is immaterial.
    pub fn eval_triple(&self, tr: &OperatorTriple) -> ComplexMatrix {
        let d = tr.order();
        let mut acc = ComplexMatrix::zeros(d, d);
        let mut cache: BTreeMap<(u8, u32), ComplexMatrix> = BTreeMap::new();
        let power = |which: u8, m: &ComplexMatrix, e: u32, cache: &mut BTreeMap<(u8, u32), ComplexMatrix>| {
            cache.entry((which, e)).or_insert_with(|| m.pow(e as usize)).clone()
        };
        for (&(i, j, k), &c) in &self.terms {
            let p1 = power(1, &tr.t1, i, &mut cache);
            let p2 = power(2, &tr.t2, j, &mut cache);
            let p3 = power(3, &tr.t3, k, &mut cache);
            acc = acc.add(&(&(&p1 * &p2) * &p3).scale(c));
        }
        acc
    }

    /// Lipschitz bound on the closed tridisc in the max-coordinate metric:
    /// sum over terms of |c| (i + j + k).
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms.iter().map(|(&(i, j, k), c)| c.norm() * f64::from(i + j + k)).sum()
    }

    /// Random polynomial of total degree <= max_degree with coefficients
    /// uniform in the complex unit disc.
    pub fn random(rng: &mut ChaCha8Rng, max_degree: u32) -> Poly3 {
        let mut p = Poly3::zero();
        for i in 0..=max_degree {
            for j in 0..=max_degree - i {
                for k in 0..=max_degree - i - j {
                    let r: f64 = rng.gen_range(0.0f64..1.0).sqrt();
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    p.add_term((i, j, k), Complex64::from_polar(r, phase));
                }
            }
        }
        p
    }
}

impl FromStr for Poly3 {
    type Err = VnError;

    fn from_str(s: &str) -> Result<Self, VnError> {
        parse_poly(s)
    }
}

/// Polynomial with square matrix coefficients; evaluates blockwise via
/// Kronecker products.
#[derive(Debug, Clone)]
pub struct MatPoly3 {
    terms: BTreeMap<(u32, u32, u32), ComplexMatrix>,
    coeff_dim: usize,
}

impl MatPoly3 {
    pub fn new(coeff_dim: usize) -> Self {
        MatPoly3 { terms: BTreeMap::new(), coeff_dim }
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn add_term(&mut self, exp: (u32, u32, u32), c: ComplexMatrix) {
        assert_eq!((c.rows(), c.cols()), (self.coeff_dim, self.coeff_dim));
        match self.terms.get_mut(&exp) {
            Some(existing) => *existing = existing.add(&c),
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn eval_point(&self, pt: &TetraPoint) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.coeff_dim, self.coeff_dim);
        for (&(i, j, k), c) in &self.terms {
            acc = acc.add(&c.scale(pt.x1.powu(i) * pt.x2.powu(j) * pt.x3.powu(k)));
        }
        acc
    }

    pub fn eval_triple(&self, tr: &OperatorTriple) -> ComplexMatrix {
        let d = tr.order();
        let mut acc = ComplexMatrix::zeros(self.coeff_dim * d, self.coeff_dim * d);
        for (&(i, j, k), c) in &self.terms {
            let mono = &(&tr.t1.pow(i as usize) * &tr.t2.pow(j as usize)) * &tr.t3.pow(k as usize);
            acc = acc.add(&c.kron(&mono));
        }
        acc
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.terms.iter().map(|(&(i, j, k), c)| operator_norm(c) * f64::from(i + j + k)).sum()
    }
}

/// Maximum of |p| over the cloud, with the achieving point. With
/// `boundary_only` the cloud is filtered to distinguished-boundary tags.
pub fn variety_sup(
    p: &Poly3,
    cloud: &VarietyPointCloud,
    boundary_only: bool,
) -> Result<(f64, TetraPoint), VnError> {
    let mut best: Option<(f64, TetraPoint)> = None;
    for cp in cloud.iter_points() {
        if boundary_only && cp.tag != RegionTag::DistinguishedBoundary {
            continue;
        }
        let pt = cp.tetra_point();
        let v = p.eval_point(&pt).norm();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, pt));
        }
    }
    best.ok_or(VnError::EmptyCloud)
}

/// Matrix-valued variant: operator norm per point.
pub fn variety_sup_mat(
    p: &MatPoly3,
    cloud: &VarietyPointCloud,
    boundary_only: bool,
) -> Result<(f64, TetraPoint), VnError> {
    let mut best: Option<(f64, TetraPoint)> = None;
    for cp in cloud.iter_points() {
        if boundary_only && cp.tag != RegionTag::DistinguishedBoundary {
            continue;
        }
        let pt = cp.tetra_point();
        let v = operator_norm(&p.eval_point(&pt));
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, pt));
        }
    }
    best.ok_or(VnError::EmptyCloud)
}

#[derive(Debug, Clone)]
pub struct VnPolyVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub argmax: TetraPoint,
    pub degree: u32,
}

#[derive(Debug, Clone)]
pub struct VnHypothesisReport {
    pub fundamental_commutator: f64,
    pub selfcommutator_defect: f64,
    pub pure_adjoint: bool,
    pub defect_rank: usize,
}

#[derive(Debug, Clone)]
pub struct VnReport {
    pub hypothesis: VnHypothesisReport,
    pub boundary_points: usize,
    pub verdicts: Vec<VnPolyVerdict>,
}

impl VnReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Per-sample spacing bound for points of the boundary cloud: consecutive
/// x3 samples move by `step`, and the joint eigenvalues of the normal
/// pencil move by at most the Frobenius norms of the coefficient matrices
/// times that step.
fn sampling_margin(p_lip: f64, vp: &VarietyParams, angles: usize) -> f64 {
    let step = std::f64::consts::TAU / angles.max(1) as f64;
    let drift = 1.0 + vp.a1.frobenius_norm() + vp.a2.frobenius_norm();
    p_lip * step * drift + 1e-9
}

/// von Neumann verifier: builds the boundary cloud of the variety of the
/// triple's fundamental operators and checks, for every polynomial,
/// ||p(T1, T2, T3)|| <= max over the cloud of |p| plus the sampling margin.
///
/// Required hypotheses: the fundamental operators commute and
/// share self-commutators, and the adjoint triple is pure. Failures are
/// reported as errors, never as counterexamples.
pub fn verify_vn(
    tr: &OperatorTriple,
    polys: &[Poly3],
    boundary_angles: usize,
    seed: u64,
    band: f64,
    tol: &Tolerance,
) -> Result<VnReport, VnError> {
    let fp = extract_fundamental(tr, tol)?;
    // The co-isometric extension intertwines the triple with Toeplitz
    // operators whose boundary symbols are built from the adjoints of the
    // fundamental operators, so the polynomial bound runs over the variety
    // of (A1*, A2*): its pencil at x3 is (A1 + x3 A2*, A2 + x3 A1*), the
    // conjugate of the (A1, A2) variety. For real parameters the two
    // coincide.
    let vp = VarietyParams::new(&fp.a1.adjoint(), &fp.a2.adjoint(), boundary_angles.max(64), tol)
        .map_err(|e| {
        match e {
            VarietyError::HypothesisViolated { which, norm } => VnError::HypothesesNotMet(
                format!("fundamental operators violate {which} (norm {norm:.3e})"),
            ),
            other => VnError::Variety(other),
        }
    })?;
    let pure_adjoint = check_pure(&tr.t3.adjoint(), 4 * tr.order().max(8), tol);
    if !pure_adjoint {
        return Err(VnError::HypothesesNotMet("adjoint triple is not pure".into()));
    }
    let hypothesis = VnHypothesisReport {
        fundamental_commutator: vp.commutator_norm,
        selfcommutator_defect: vp.selfcommutator_defect,
        pure_adjoint,
        defect_rank: fp.a1.order(),
    };
    let cloud = sample_variety(&vp, &circle(1.0, boundary_angles), seed, band, tol);
    let verdicts: Vec<VnPolyVerdict> = polys
        .par_iter()
        .map(|p| {
            let lhs = operator_norm(&p.eval_triple(tr));
            let (rhs, argmax) = variety_sup(p, &cloud, true)?;
            let margin = sampling_margin(p.lipschitz_bound(), &vp, boundary_angles);
            Ok(VnPolyVerdict { lhs, rhs, margin, pass: lhs <= rhs + margin, argmax, degree: p.degree() })
        })
        .collect::<Result<_, VnError>>()?;
    Ok(VnReport { hypothesis, boundary_points: cloud.len(), verdicts })
}

/// Matrix-valued check against an existing boundary cloud.
pub fn verify_vn_mat(
    tr: &OperatorTriple,
    p: &MatPoly3,
    vp: &VarietyParams,
    cloud: &VarietyPointCloud,
    boundary_angles: usize,
) -> Result<VnPolyVerdict, VnError> {
    let lhs = operator_norm(&p.eval_triple(tr));
    let (rhs, argmax) = variety_sup_mat(p, cloud, true)?;
    let margin = sampling_margin(p.lipschitz_bound(), vp, boundary_angles);
    let degree = p.terms.keys().map(|&(i, j, k)| i + j + k).max().unwrap_or(0);
    Ok(VnPolyVerdict { lhs, rhs, margin, pass: lhs <= rhs + margin, argmax, degree })
}

// ---- polynomial grammar ----
//
// poly   := term (('+'|'-') term)*
// term   := coeff ('*'? mono)* | mono ('*'? mono)*
// coeff  := real | '(' complex ')' | complex-with-i (e.g. 0.5i)
// mono   := ('x1'|'x2'|'x3') ('^' uint)?
//
// Complex literals are written a+bi, with conjugates deliberately absent:
// the calculus is holomorphic.

fn parse_poly(input: &str) -> Result<Poly3, VnError> {
    let mut p = Poly3::zero();
    let s: Vec<char> = input.chars().collect();
    let mut at = 0usize;
    let n = s.len();
    let mut first = true;
    loop {
        skip_ws(&s, &mut at);
        if at >= n {
            if first {
                return Err(VnError::Parse("empty polynomial".into()));
            }
            break;
        }
        let mut sign = Complex64::new(1.0, 0.0);
        if s[at] == '+' || s[at] == '-' {
            if s[at] == '-' {
                sign = Complex64::new(-1.0, 0.0);
            }
            at += 1;
        } else if !first {
            return Err(VnError::Parse(format!("expected '+' or '-' at column {at}")));
        }
        let (coeff, exps) = parse_term(&s, &mut at)?;
        p.add_term(exps, sign * coeff);
        first = false;
    }
    Ok(p)
}

fn parse_term(s: &[char], at: &mut usize) -> Result<(Complex64, (u32, u32, u32)), VnError> {
    skip_ws(s, at);
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut have_any = false;
    if *at < s.len() && s[*at] == '(' {
        *at += 1;
        coeff = parse_complex_until(s, at, ')')?;
        if *at >= s.len() || s[*at] != ')' {
            return Err(VnError::Parse("unterminated '(' in coefficient".into()));
        }
        *at += 1;
        have_any = true;
    } else if *at < s.len() && (s[*at].is_ascii_digit() || s[*at] == '.') {
        let v = parse_real(s, at)?;
        if *at < s.len() && s[*at] == 'i' {
            *at += 1;
            coeff = Complex64::new(0.0, v);
        } else {
            coeff = Complex64::new(v, 0.0);
        }
        have_any = true;
    } else if *at < s.len() && s[*at] == 'i' {
        *at += 1;
        coeff = Complex64::new(0.0, 1.0);
        have_any = true;
    }
    let mut exps = (0u32, 0u32, 0u32);
    loop {
        skip_ws(s, at);
        let mut starred = false;
        if *at < s.len() && s[*at] == '*' {
            if !have_any {
                return Err(VnError::Parse(format!("dangling '*' at column {at}")));
            }
            *at += 1;
            starred = true;
            skip_ws(s, at);
        }
        if *at + 1 < s.len() && s[*at] == 'x' && matches!(s[*at + 1], '1' | '2' | '3') {
            let which = s[*at + 1];
            *at += 2;
            let mut e = 1u32;
            if *at < s.len() && s[*at] == '^' {
                *at += 1;
                e = parse_uint(s, at)?;
            }
            match which {
                '1' => exps.0 += e,
                '2' => exps.1 += e,
                _ => exps.2 += e,
            }
            have_any = true;
        } else {
            if starred {
                return Err(VnError::Parse(format!("dangling '*' at column {at}")));
            }
            break;
        }
    }
    if !have_any {
        return Err(VnError::Parse(format!("expected a term at column {at}")));
    }
    Ok((coeff, exps))
}

fn parse_complex_until(s: &[char], at: &mut usize, end: char) -> Result<Complex64, VnError> {
    let start = *at;
    let mut buf = String::new();
    while *at < s.len() && s[*at] != end {
        buf.push(s[*at]);
        *at += 1;
    }
    parse_complex_str(buf.trim())
        .ok_or_else(|| VnError::Parse(format!("bad complex literal at column {start}")))
}

/// Parses "a", "a+bi", "a-bi", "bi", "i", "-i".
pub fn parse_complex_str(s: &str) -> Option<Complex64> {
    let s = s.trim().replace(' ', "");
    if s.is_empty() {
        return None;
    }
    if let Ok(v) = s.parse::<f64>() {
        return Some(Complex64::new(v, 0.0));
    }
    if let Some(im_part) = s.strip_suffix('i') {
        // Split at the last sign that is not a leading sign or an exponent
        // sign.
        let chars: Vec<char> = im_part.chars().collect();
        let mut split = None;
        for idx in (1..chars.len()).rev() {
            if (chars[idx] == '+' || chars[idx] == '-')
                && chars[idx - 1] != 'e'
                && chars[idx - 1] != 'E'
            {
                split = Some(idx);
                break;
            }
        }
        match split {
            Some(idx) => {
                let re_part: String = chars[..idx].iter().collect();
                let im_str: String = chars[idx..].iter().collect();
                let re = re_part.parse::<f64>().ok()?;
                let im = match im_str.as_str() {
                    "+" => 1.0,
                    "-" => -1.0,
                    other => other.parse::<f64>().ok()?,
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im = match im_part {
                    "" => 1.0,
                    "-" => -1.0,
                    "+" => 1.0,
                    other => other.parse::<f64>().ok()?,
                };
                Some(Complex64::new(0.0, im))
            }
        }
    } else {
        None
    }
}

fn parse_real(s: &[char], at: &mut usize) -> Result<f64, VnError> {
    let start = *at;
    let mut buf = String::new();
    while *at < s.len()
        && (s[*at].is_ascii_digit()
            || s[*at] == '.'
            || s[*at] == 'e'
            || s[*at] == 'E'
            || ((s[*at] == '+' || s[*at] == '-')
                && *at > start
                && (s[*at - 1] == 'e' || s[*at - 1] == 'E')))
    {
        buf.push(s[*at]);
        *at += 1;
    }
    buf.parse::<f64>().map_err(|_| VnError::Parse(format!("bad number at column {start}")))
}

fn parse_uint(s: &[char], at: &mut usize) -> Result<u32, VnError> {
    let start = *at;
    let mut buf = String::new();
    while *at < s.len() && s[*at].is_ascii_digit() {
        buf.push(s[*at]);
        *at += 1;
    }
    buf.parse::<u32>().map_err(|_| VnError::Parse(format!("bad exponent at column {start}")))
}

fn skip_ws(s: &[char], at: &mut usize) {
    while *at < s.len() && s[*at].is_whitespace() {
        *at += 1;
    }
}
