//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them as they go).
//!
//! Criteria mix exact reproduction of the two worked parameter examples
//! with seeded property sweeps; every tolerance is pinned here.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tetra_core::fundops::{extract_fundamental, fundamental_radius_sweep, OperatorTriple};
use tetra_core::geometry::{
    classify_tetra, gamma_lift_check, kernel_check, BetaPair, RegionTag, Semantics, TetraPoint,
};
use tetra_core::io::matrix_to_json;
use tetra_core::jointspec::{joint_eigenvalues, verify_commuting};
use tetra_core::linalg::{
    greedy_match_pairs, numerical_radius, operator_norm, ComplexMatrix, Tolerance,
};
use tetra_core::model::{
    build_model, char_kernel_residual, compress_to_comodel, dilation_pipeline,
    verify_model_identity,
};
use tetra_core::testgen::{hypothesis_pair, planted_pair, random_contraction, random_matrix};
use tetra_core::variety::{
    classify_distinguished, DistinguishedVerdict, VarietyParams,
};
use tetra_core::vn::{verify_vn, Poly3};

const BAND: f64 = 1e-9;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn report(id: u32, desc: &str, pass: bool, elapsed: Duration) {
    println!(
        "ACCEPTANCE {:02} [{}] {} ({:.2}s)",
        id,
        if pass { "PASS" } else { "FAIL" },
        desc,
        elapsed.as_secs_f64()
    );
    assert!(pass, "acceptance criterion {id} failed: {desc}");
}

/// Flat-example parameters: commuting self-adjoint pair with sup-norm 1.
fn flat_params() -> (ComplexMatrix, ComplexMatrix) {
    let a = ComplexMatrix::from_rows(&[
        vec![re(0.0), re(0.0), re(0.0)],
        vec![re(0.0), re(0.0), re(1.0)],
        vec![re(0.0), re(1.0), re(0.0)],
    ]);
    let b = ComplexMatrix::from_rows(&[
        vec![re(1.0), re(0.0), re(0.0)],
        vec![re(0.0), re(0.0), re(0.0)],
        vec![re(0.0), re(0.0), re(0.0)],
    ]);
    (a, b)
}

/// Cubic-example parameter: E12 on C^3, used for both slots.
fn cubic_param() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(3, 3);
    m[(0, 1)] = re(1.0);
    m
}

fn write_matrix_file(dir: &std::path::Path, name: &str, m: &ComplexMatrix) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&matrix_to_json(m)).unwrap()).unwrap();
    path
}

fn tetra_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tetra"))
}

#[test]
fn acceptance_01_flat_example_reproduction() {
    let start = Instant::now();
    let (a, b) = flat_params();

    // Radius of A + Bz equals 1 on a 512-point circle grid.
    let step = std::f64::consts::TAU / 512.0;
    let max_dev = (0..512usize)
        .into_par_iter()
        .map(|k| {
            let z = Complex64::from_polar(1.0, k as f64 * step);
            (numerical_radius(&a.add(&b.scale(z)), 512) - 1.0).abs()
        })
        .reduce(|| 0.0, f64::max);

    // The variety subcommand flags the example, with witness (1, 0, 0).
    let dir = std::env::temp_dir().join(format!("tetra-acc1-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let fa = write_matrix_file(&dir, "a.json", &a);
    let fb = write_matrix_file(&dir, "b.json", &b);
    let out = tetra_bin()
        .args(["variety", "--a1"])
        .arg(&fa)
        .arg("--a2")
        .arg(&fb)
        .args(["--boundary-angles", "128", "--interior-angles", "32"])
        .output()
        .unwrap();
    let code = out.status.code();
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let witness_ok = body["verdict"] == "NotDistinguished"
        && body["witness"]["tag"] == "OtherTopBoundary"
        && (body["witness"]["x1"][0].as_f64().unwrap() - 1.0).abs() < 1e-8
        && body["witness"]["x1"][1].as_f64().unwrap().abs() < 1e-8
        && body["witness"]["x2"][0].as_f64().unwrap().abs() < 1e-8
        && body["witness"]["x3"][0].as_f64().unwrap().abs() < 1e-8;
    std::fs::remove_dir_all(&dir).ok();

    let elapsed = start.elapsed();
    let pass = max_dev < 1e-8 && code == Some(3) && witness_ok && elapsed < Duration::from_secs(1);
    report(1, "flat example: radius 1 on circle, NotDistinguished with witness (1,0,0)", pass, elapsed);
}

#[test]
fn acceptance_02_cubic_example_reproduction() {
    let start = Instant::now();
    let a = cubic_param();
    let vp = VarietyParams::new(&a, &a, 256, &tol()).unwrap();
    let report_dv = classify_distinguished(&vp, 256, 64, 0.01, 42, BAND, &tol());

    let verdict_ok = report_dv.verdict == DistinguishedVerdict::DistinguishedEmpirical;
    // Every sampled point satisfies the defining cubic x (x3 - x^2) = 0.
    let cubic_residual = report_dv
        .boundary_cloud
        .iter_points()
        .chain(report_dv.interior_cloud.iter_points())
        .map(|p| (p.x1 * (p.x3 - p.x1 * p.x1)).norm())
        .fold(0.0, f64::max);
    let boundary_ok = report_dv
        .boundary_cloud
        .iter_points()
        .all(|p| p.tag == RegionTag::DistinguishedBoundary);

    let elapsed = start.elapsed();
    let pass = verdict_ok
        && cubic_residual <= 1e-8
        && boundary_ok
        && elapsed < Duration::from_secs(5);
    report(2, "cubic example: on-variety residuals, boundary tags, empirical verdict", pass, elapsed);
}

#[test]
fn acceptance_03_joint_spectrum_oracle_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut failures = 0usize;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let (a, b, planted) = planted_pair(n, &mut rng);
        let pair = verify_commuting(&a, &b, &tol()).unwrap();
        let js = joint_eigenvalues(&pair, 42, &tol()).unwrap();
        let d = greedy_match_pairs(&js.pairs, &planted).unwrap();
        if d > 1e-7 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    report(3, "joint-spectrum oracle: 100 planted pairs matched to 1e-7", failures == 0, elapsed);
}

fn factory_params(count: usize, seed: u64) -> Vec<(ComplexMatrix, ComplexMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=4);
            hypothesis_pair(n, 0.9, &mut rng)
        })
        .collect()
}

#[test]
fn acceptance_04_fundamental_roundtrip() {
    let start = Instant::now();
    let params = factory_params(50, 1004);
    // The factory defect space is the top-mode block in canonical
    // coordinates, so the plain distance to (A1*, A2*) bounds the
    // unitary-invariant distance from above.
    let worst = params
        .par_iter()
        .map(|(a1, a2)| {
            let mt = build_model(a1, a2, 16, &tol()).unwrap();
            let tr = compress_to_comodel(&mt, 8).unwrap();
            let fp = extract_fundamental(&tr, &tol()).unwrap();
            let d1 = operator_norm(&fp.a1.sub(&a1.adjoint()));
            let d2 = operator_norm(&fp.a2.sub(&a2.adjoint()));
            d1.max(d2)
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    report(4, "fundamental-operator round trip on 50 factory triples within 1e-9", worst <= 1e-9, elapsed);
}

#[test]
fn acceptance_05_dilation_residuals() {
    let start = Instant::now();
    let params = factory_params(50, 1004);
    let worst = params
        .par_iter()
        .map(|(a1, a2)| {
            let mt = build_model(a1, a2, 16, &tol()).unwrap();
            let tr = compress_to_comodel(&mt, 8).unwrap();
            let (_, _, rep) = dilation_pipeline(&tr, 16, 4, 0.0, &tol()).unwrap();
            rep.monomial_max
                .max(rep.intertwining.iter().copied().fold(0.0, f64::max))
                .max(rep.isometry_defect)
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(30);
    report(5, "dilation monomials to degree 4 exact on 50 compressions", pass, elapsed);
}

#[test]
fn acceptance_06_model_identity() {
    let start = Instant::now();
    // Nilpotent third component: compression of the cubic-parameter model,
    // nilpotency index 4, checked at twice the index.
    let a = cubic_param().scale(re(0.5));
    let mt = build_model(&a, &a, 8, &tol()).unwrap();
    let tr = compress_to_comodel(&mt, 4).unwrap();
    let nilpotent = verify_model_identity(&tr, 8, 2, 0.0, &tol()).unwrap();

    // Scalar t = 0.9 at 256 modes with a 16-mode buffer.
    let scalar = OperatorTriple::scalar(re(0.05), re(0.05), re(0.9));
    let slow = verify_model_identity(&scalar, 256, 16, 1e-6, &tol()).unwrap();

    let elapsed = start.elapsed();
    let pass = nilpotent.residual <= 1e-8 && slow.residual <= 1e-6;
    report(6, "model identity: nilpotent exact, scalar 0.9 at 256 modes", pass, elapsed);
}

#[test]
fn acceptance_07_characteristic_kernel_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(1..=4);
        let t = random_contraction(n, rng.gen_range(0.4..0.97), &mut rng);
        for iz in 0..5 {
            for iw in 0..5 {
                let z = Complex64::from_polar(0.9 * iz as f64 / 4.0, 1.3 * iz as f64 + 0.4);
                let w = Complex64::from_polar(0.9 * iw as f64 / 4.0, 0.7 * iw as f64 + 2.1);
                worst = worst.max(char_kernel_residual(&t, z, w, &tol()).unwrap());
            }
        }
    }
    let elapsed = start.elapsed();
    report(7, "characteristic-function kernel identity on 5x5 grids, 20 contractions", worst <= 1e-8, elapsed);
}

#[test]
fn acceptance_08_von_neumann_property_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let polys: Vec<Poly3> = (0..200).map(|_| Poly3::random(&mut rng, 3)).collect();
    let params = factory_params(20, 1008);
    let all_pass = params
        .par_iter()
        .map(|(a1, a2)| {
            let mt = build_model(a1, a2, 8, &tol()).unwrap();
            let tr = compress_to_comodel(&mt, 4).unwrap();
            let rep = verify_vn(&tr, &polys, 2048, 42, BAND, &tol()).unwrap();
            rep.all_pass()
        })
        .reduce(|| true, |x, y| x && y);
    let elapsed = start.elapsed();
    let pass = all_pass && elapsed < Duration::from_secs(120);
    report(8, "von Neumann: 200 polynomials x 20 factory triples, no violations", pass, elapsed);
}

#[test]
fn acceptance_09_geometry_cross_validation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1009);

    let mut cases: Vec<(TetraPoint, bool)> = Vec::with_capacity(2000);
    for _ in 0..1000 {
        let sum = rng.gen_range(0.0..0.7);
        let split = rng.gen_range(0.0..1.0);
        let b1 = Complex64::from_polar(sum * split, rng.gen_range(0.0..std::f64::consts::TAU));
        let b2 = Complex64::from_polar(sum * (1.0 - split), rng.gen_range(0.0..std::f64::consts::TAU));
        let x3 = Complex64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..std::f64::consts::TAU));
        cases.push((TetraPoint::from_beta(BetaPair::new(b1, b2), x3), true));
    }
    for _ in 0..1000 {
        let sum = rng.gen_range(1.2..1.6);
        let split = rng.gen_range(0.35..0.65);
        let b1 = Complex64::from_polar(sum * split, rng.gen_range(0.0..std::f64::consts::TAU));
        let b2 = Complex64::from_polar(sum * (1.0 - split), rng.gen_range(0.0..std::f64::consts::TAU));
        let x3 = Complex64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..std::f64::consts::TAU));
        cases.push((TetraPoint::from_beta(BetaPair::new(b1, b2), x3), false));
    }
    let disagreements = cases
        .par_iter()
        .filter(|(pt, inside)| {
            let tag = classify_tetra(pt, BAND, Semantics::Open);
            // Interior constructions sit at kernel minimum >= 0.15, outside
            // ones land under 0.1 at grid 128; 0.1 separates the families.
            let (kernel_ok, _) = kernel_check(pt, 128, 0.1);
            let lift_ok = gamma_lift_check(pt, 64, BAND);
            if *inside {
                !(tag == RegionTag::Interior && kernel_ok && lift_ok)
            } else {
                !(tag == RegionTag::Outside && !kernel_ok && !lift_ok)
            }
        })
        .count();

    let mut radius_rng = ChaCha8Rng::seed_from_u64(2009);
    let mats: Vec<ComplexMatrix> =
        (0..500).map(|_| random_matrix(radius_rng.gen_range(1..=6), &mut radius_rng)).collect();
    let sandwich_violations = mats
        .par_iter()
        .filter(|m| {
            let norm = operator_norm(m);
            let omega = numerical_radius(m, 512);
            !(omega <= norm + 1e-9 && omega + 1e-9 >= norm / 2.0)
        })
        .count();

    let elapsed = start.elapsed();
    let pass = disagreements == 0 && sandwich_violations == 0;
    report(9, "geometry cross-validation on 2000 points; radius sandwich on 500 matrices", pass, elapsed);
}

#[test]
fn acceptance_10_radius_closure_property() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let pairs: Vec<(ComplexMatrix, ComplexMatrix)> = (0..100)
        .map(|_| {
            let n = rng.gen_range(1..=4);
            let a1 = random_matrix(n, &mut rng);
            let a2 = random_matrix(n, &mut rng);
            let sweep = fundamental_radius_sweep(&a1, &a2, 64, 128).max(1e-6);
            let s = re(0.97 / sweep);
            (a1.scale(s), a2.scale(s))
        })
        .collect();
    let worst = pairs
        .par_iter()
        .map(|(a1, a2)| {
            fundamental_radius_sweep(&a1.adjoint(), a2, 64, 256)
                .max(fundamental_radius_sweep(a1, &a2.adjoint(), 64, 256))
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    report(10, "radius closure: adjoint sweeps stay below 1 + 1e-8 on 100 pairs", worst <= 1.0 + 1e-8, elapsed);
}
