//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured evidence. Run with `cargo test -p specflow-cli --test
//! acceptance -- --nocapture` to see the per-criterion lines.

use std::sync::Arc;

use specflow_core::bifurcate::{
    detect_candidates, dirichlet_laplacian_eigenvalues, discretize_sturm_liouville,
    verify_branches, BranchOptions, VariationalFamily,
};
use specflow_core::exec;
use specflow_core::grassmann::{
    hormander_index, hormander_index_via_path, maslov_loop_index, relative_maslov_index,
    suspend_triple, transversal_to_pair, triple_signature, FrameGen, LagrangianPath,
};
use specflow_core::linalg::{self, Mat};
use specflow_core::parametrix::{certify_replay, parametrix_path};
use specflow_core::pathgen;
use specflow_core::reduction::{common_isotropic, compose_check, ReductionContext};
use specflow_core::specflow::{
    eigenvalue_tracking_oracle, morse_index, relative_morse_index, spectral_flow_via_crossings,
    spectral_flow_via_maslov, spectral_flow_via_morse, OperatorPath,
};
use specflow_core::symlin::{clean_intersection, graph_lagrangian, LagrangianFrame, Subspace};
use specflow_core::Tol;

fn tol() -> Tol {
    Tol::default()
}

fn margin(a: &LagrangianFrame, b: &LagrangianFrame) -> f64 {
    linalg::smallest_sv(&linalg::hcat(&[a.basis(), b.basis()]))
}

fn transverse_with_margin(a: &LagrangianFrame, b: &LagrangianFrame, t: &Tol) -> bool {
    clean_intersection(a.subspace(), b.subspace(), t)
        .map(|c| c.clean && margin(a, b) > 1e-3)
        .unwrap_or(false)
}

#[test]
fn criterion_01_four_way_agreement() {
    let t = tol();
    let seeds: Vec<u64> = (0..500).collect();
    let results = exec::map(&seeds, |&seed| {
        let mut rng = pathgen::rng(10_000 + seed);
        let n = 1 + (seed as usize % 8);
        let path = pathgen::random_regular_path(n, &mut rng, &t);
        let m = spectral_flow_via_morse(&path, &t).unwrap().value;
        let c = spectral_flow_via_crossings(&path, &t).unwrap().value;
        let ms = spectral_flow_via_maslov(&path, &t).unwrap().value;
        let o = eigenvalue_tracking_oracle(&path, 400, &t).unwrap().value;
        (seed, m, c, ms, o)
    });
    let disagreements: Vec<u64> = results
        .iter()
        .filter(|(_, m, c, ms, o)| !(m == c && c == ms && ms == o))
        .map(|(s, ..)| *s)
        .collect();
    assert!(
        disagreements.is_empty(),
        "method disagreement on seeds {disagreements:?}"
    );
    println!("criterion 1 (four-way spectral-flow agreement, 500 paths): PASS");
}

#[test]
fn criterion_02_crossing_form_law() {
    let t = tol();
    let cases: Vec<u64> = (0..200).collect();
    let results = exec::map(&cases, |&seed| {
        let mut rng = pathgen::rng(20_000 + seed);
        let n = 2 + (seed as usize % 5);
        let m = 1 + pathgen::random_index(&mut rng, n.min(3));
        let sigs: Vec<i64> = (-(m as i64)..=(m as i64))
            .filter(|s| (s + m as i64) % 2 == 0)
            .collect();
        let sig = sigs[pathgen::random_index(&mut rng, sigs.len())];
        let path = pathgen::prescribed_crossing_path(n, m, sig, &mut rng);
        // Spectral flow across the crossing: a small window around λ* = 0.
        let window = path.restricted(-0.25, 0.25).unwrap();
        let flow = spectral_flow_via_crossings(&window, &t).unwrap().value;
        (sig, flow)
    });
    for (i, (sig, flow)) in results.iter().enumerate() {
        assert_eq!(sig, flow, "case {i}: prescribed {sig}, computed {flow}");
    }
    println!("criterion 2 (crossing-form law on 200 prescribed crossings): PASS");
}

#[test]
fn criterion_03_relative_morse_identity() {
    let t = tol();
    let mut rng = pathgen::rng(30_000);
    let mut done = 0;
    while done < 200 {
        let n = 2 + pathgen::random_index(&mut rng, 5);
        let aa = pathgen::random_symmetric(n, &mut rng, 1.5);
        let ab = pathgen::random_symmetric(n, &mut rng, 1.5);
        if linalg::min_abs_eig_sym(&aa) < 1e-4 || linalg::min_abs_eig_sym(&ab) < 1e-4 {
            continue;
        }
        let lhs = relative_morse_index(&aa, &ab, &t).unwrap();
        let rhs = morse_index(&aa, &t).unwrap() as i64 - morse_index(&ab, &t).unwrap() as i64;
        assert_eq!(lhs, rhs);
        done += 1;
    }
    println!("criterion 3 (relative Morse identity, 200 pairs): PASS");
}

#[test]
fn criterion_04_hormander_consistency() {
    let t = tol();
    // Signature route against the winding route on random quadruples.
    let mut rng = pathgen::rng(40_000);
    let mut done = 0;
    while done < 100 {
        let n = 1 + pathgen::random_index(&mut rng, 4);
        let l0 = pathgen::random_lagrangian(n, &mut rng, &t);
        let l1 = pathgen::random_lagrangian(n, &mut rng, &t);
        let m0 = pathgen::random_lagrangian(n, &mut rng, &t);
        let m1 = pathgen::random_lagrangian(n, &mut rng, &t);
        let ok = transverse_with_margin(&l0, &l1, &t)
            && [(&l0, &m0), (&l0, &m1), (&l1, &m0), (&l1, &m1)]
                .iter()
                .all(|(a, b)| transverse_with_margin(a, b, &t));
        if !ok {
            continue;
        }
        let h_sig = hormander_index(&l0, &l1, &m0, &m1, &t).unwrap();
        let h_path = hormander_index_via_path(&l0, &l1, &m0, &m1, &t).unwrap();
        assert_eq!(h_sig, h_path);
        done += 1;
    }
    // Reference-change identity on random paths.
    let mut done = 0;
    while done < 100 {
        let n = 1 + pathgen::random_index(&mut rng, 3);
        let path = pathgen::random_lagrangian_path(n, &mut rng, &t);
        let l0 = pathgen::random_lagrangian(n, &mut rng, &t);
        let l1 = pathgen::random_lagrangian(n, &mut rng, &t);
        let ok = transverse_with_margin(&l0, &l1, &t)
            && [path.start(), path.end()]
                .iter()
                .all(|e| transverse_with_margin(e, &l0, &t) && transverse_with_margin(e, &l1, &t));
        if !ok {
            continue;
        }
        let m0 = relative_maslov_index(&path, &l0, &t).unwrap();
        let m1 = relative_maslov_index(&path, &l1, &t).unwrap();
        let h = hormander_index(&l0, &l1, path.start(), path.end(), &t).unwrap();
        assert_eq!(m1 - m0, h);
        done += 1;
    }
    println!("criterion 4 (Hörmander routes + reference-change identity, 100 + 100): PASS");
}

#[test]
fn criterion_05_reduction_laws() {
    let t = tol();
    let mut rng = pathgen::rng(50_000);
    // Composition and right-inverse laws on nested configurations.
    for trial in 0..50 {
        let n = 3 + trial % 4;
        let k1 = 2 + pathgen::random_index(&mut rng, n - 2);
        let k2 = 1 + pathgen::random_index(&mut rng, k1);
        let (i1, i2) = pathgen::nested_isotropic_pair(n, k1, k2, &mut rng, &t);
        let batch: Vec<LagrangianFrame> = (0..4)
            .map(|_| loop {
                let l = pathgen::random_lagrangian(n, &mut rng, &t);
                if clean_intersection(l.subspace(), &i1, &t)
                    .map(|c| c.clean)
                    .unwrap_or(false)
                {
                    break l;
                }
            })
            .collect();
        assert!(compose_check(&i1, &i2, &batch, &t).unwrap(), "trial {trial}");

        let ctx = ReductionContext::new(i1, &t).unwrap();
        let red = pathgen::random_lagrangian(n - k1, &mut rng, &t);
        let back = ctx.reduce(&ctx.extend(&red, &t).unwrap(), &t).unwrap();
        assert!(back.gap(&red) < 1e-8, "round trip gap {}", back.gap(&red));
    }
    // Maslov loop index invariant under reduction, exact integers.
    for trial in 0..50 {
        let n = 2 + trial % 2;
        let b0 = pathgen::random_symmetric(n, &mut rng, 1.0);
        let b1 = pathgen::random_symmetric(n, &mut rng, 0.6);
        let t_inner = t;
        let gen: FrameGen = Arc::new(move |s: f64| {
            let ang = 2.0 * std::f64::consts::PI * s;
            let m = &b0 + &b1 * ang.sin() + Mat::identity(n, n) * (2.0 + ang.cos());
            graph_lagrangian(&m, &t_inner)
        });
        let lpath = LagrangianPath::from_generator(0.0, 1.0, gen.clone(), 33, &t).unwrap();
        let full = maslov_loop_index(&lpath, &t).unwrap();
        let iso = common_isotropic(&lpath, &t).unwrap();
        let ctx = ReductionContext::from_h_subspace(&iso, &t).unwrap();
        let rgen: FrameGen = Arc::new(move |s| ctx.reduce_clean(&gen(s)?, &t_inner));
        let rpath = LagrangianPath::from_generator(0.0, 1.0, rgen, 33, &t).unwrap();
        assert_eq!(full, maslov_loop_index(&rpath, &t).unwrap(), "trial {trial}");
    }
    println!("criterion 5 (reduction composition/right-inverse/Maslov invariance, 50+50): PASS");
}

#[test]
fn criterion_06_suspension_invariance() {
    let t = tol();
    let mut rng = pathgen::rng(60_000);
    let mut done = 0;
    while done < 100 {
        let n = 1 + pathgen::random_index(&mut rng, 3);
        let l0 = pathgen::random_lagrangian(n, &mut rng, &t);
        let l1 = pathgen::random_lagrangian(n, &mut rng, &t);
        if !transverse_with_margin(&l0, &l1, &t) {
            continue;
        }
        let m = transversal_to_pair(&l0, &l1, &t).unwrap();
        if margin(&m, &l0) < 1e-3 || margin(&m, &l1) < 1e-3 {
            continue;
        }
        let base = triple_signature(&l0, &m, &l1, &t).unwrap();
        for k in 1..=3 {
            let (s0, sm, s1) = suspend_triple(&l0, &m, &l1, k);
            assert_eq!(triple_signature(&s0, &sm, &s1, &t).unwrap(), base);
        }
        done += 1;
    }
    // Co-diagonal blocks carry signature zero.
    for k in 1..=3usize {
        let delta = specflow_core::grassmann::codiagonal_frame(2 * k);
        let sig = triple_signature(
            &LagrangianFrame::h0(2 * k),
            &delta,
            &LagrangianFrame::h1(2 * k),
            &t,
        )
        .unwrap();
        assert_eq!(sig, 0);
    }
    println!("criterion 6 (suspension preserves triple signatures, 100 triples, k ≤ 3): PASS");
}

#[test]
fn criterion_07_parametrix_certificates() {
    let t = tol();
    let seeds: Vec<u64> = (0..50).collect();
    let results = exec::map(&seeds, |&seed| {
        let mut rng = pathgen::rng(70_000 + seed);
        let n = 2 + (seed as usize % 11);
        let crossings = (seed as usize % 4).min(n - 1);
        let op = pathgen::seeded_crossing_path(n, crossings, &mut rng);
        let pp = parametrix_path(&op, &t)?;
        // Replay at 10x density against the stored threshold.
        let replay = certify_replay(&op, &pp, 10, &t)?;
        // Fixed image space and rank bound along the parameter.
        let f = pp.f_space().clone();
        for i in 0..=40 {
            let l = -1.0 + 2.0 * (i as f64) / 40.0;
            let k = pp.k_at(l)?;
            let rank = linalg::singular_values(&k)
                .iter()
                .filter(|&&s| s > 1e-10)
                .count();
            if rank > f.dim() {
                return Err(specflow_core::Error::InvariantViolation(format!(
                    "rank {rank} exceeds dim F = {} at λ = {l}",
                    f.dim()
                )));
            }
            let off_image = (&k - f.projector() * &k).amax();
            if off_image > 1e-9 {
                return Err(specflow_core::Error::InvariantViolation(format!(
                    "image leaks out of F by {off_image:.3e} at λ = {l}"
                )));
            }
        }
        Ok((seed, replay, pp.certificate().threshold))
    });
    for r in &results {
        match r {
            Ok((_, replay, threshold)) => assert!(replay > threshold),
            Err(e) => panic!("parametrix failed: {e}"),
        }
    }
    println!("criterion 7 (parametrix certificates on 50 paths, 10x replay): PASS");
}

#[test]
fn criterion_08_bifurcation_pipeline() {
    let t = tol();
    let n = 200;
    let length = std::f64::consts::PI;
    let path = discretize_sturm_liouville(n, length, |_| 0.0, (0.5, 9.5)).unwrap();
    let fam = VariationalFamily::cubic(path, 1.0).unwrap();
    let report = detect_candidates(&fam, &t).unwrap();
    assert_eq!(report.candidates.len(), 3, "expected exactly 3 candidates");
    assert_eq!(report.total_sf, -3);
    assert_eq!(report.guaranteed_count, 3);
    let discrete = dirichlet_laplacian_eigenvalues(n, length);
    for (c, (k, e)) in report.candidates.iter().zip([(1, discrete[0]), (2, discrete[1]), (3, discrete[2])]) {
        let continuum = (k * k) as f64;
        assert!(
            (c.lambda - e).abs() / e < 0.01,
            "candidate {} vs discrete eigenvalue {e}",
            c.lambda
        );
        assert!((c.lambda - continuum).abs() / continuum < 0.01);
        assert!(c.certified);
        assert_eq!(c.kernel_dim, 1);
        assert_eq!(c.signature, -1);
    }
    let verified = verify_branches(&fam, &report, &BranchOptions::default(), &t).unwrap();
    assert_eq!(verified.branches.len(), 3);
    for b in &verified.branches {
        assert!(b.verified, "branch at {}: {:?}", b.lambda_star, b.failure);
        let exp = b.exponent.expect("fitted exponent");
        assert!((exp - 0.5).abs() <= 0.1, "exponent {exp}");
        for p in &b.points {
            assert!(p.residual < 1e-10, "residual {:.3e}", p.residual);
        }
    }
    println!("criterion 8 (Sturm-Liouville bifurcation pipeline, N = 200): PASS");
}

#[test]
fn criterion_09_homotopy_invariance() {
    let t = tol();
    let cases: Vec<u64> = (0..100).collect();
    let results = exec::map(&cases, |&seed| {
        let mut rng = pathgen::rng(90_000 + seed);
        let n = 1 + (seed as usize % 6);
        let path = pathgen::random_regular_path(n, &mut rng, &t);
        let (a, b) = path.interval();
        let base: Vec<i64> = vec![
            spectral_flow_via_morse(&path, &t).unwrap().value,
            spectral_flow_via_maslov(&path, &t).unwrap().value,
            eigenvalue_tracking_oracle(&path, 400, &t).unwrap().value,
        ];
        let endpoint_margin = linalg::min_abs_eig_sym(&path.eval(a))
            .min(linalg::min_abs_eig_sym(&path.eval(b)));
        let bump = pathgen::random_symmetric(n, &mut rng, 1.0);
        let eps = 0.4 * endpoint_margin / linalg::spectral_norm(&bump).max(1e-12);
        let inner = path.clone();
        let perturbed = OperatorPath::from_fn(a, b, n, move |l| inner.eval(l) + &bump * eps)
            .unwrap();
        let after: Vec<i64> = vec![
            spectral_flow_via_morse(&perturbed, &t).unwrap().value,
            spectral_flow_via_maslov(&perturbed, &t).unwrap().value,
            eigenvalue_tracking_oracle(&perturbed, 400, &t).unwrap().value,
        ];
        (seed, base, after)
    });
    for (seed, base, after) in &results {
        assert_eq!(base, after, "seed {seed}");
        assert!(base.windows(2).all(|w| w[0] == w[1]), "seed {seed}");
    }
    println!("criterion 9 (homotopy invariance on 100 perturbed paths): PASS");
}

#[test]
fn criterion_10_determinism() {
    // Identical configs and seeds must reproduce byte-identical reports.
    let bin = env!("CARGO_BIN_EXE_specflow");
    let dir = std::env::temp_dir().join(format!("specflow-acc-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{
  "kind": "random-seeded",
  "interval": [-1.0, 1.0],
  "dimension": 4,
  "seed": 17,
  "crossings": 2
}"#,
    )
    .unwrap();
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("run{run}"));
        std::fs::create_dir_all(&out).unwrap();
        for sub in ["sf", "parametrix", "flow-trace"] {
            let status = std::process::Command::new(bin)
                .args([
                    "--config",
                    config.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                    sub,
                ])
                .status()
                .unwrap();
            assert!(status.success(), "{sub} run {run} failed");
        }
        let mut blob = Vec::new();
        for f in ["sf_report.json", "parametrix_report.json", "flow-trace_report.json", "flow_trace.csv"] {
            blob.extend(std::fs::read(out.join(f)).unwrap());
        }
        outputs.push(blob);
    }
    assert_eq!(outputs[0], outputs[1], "reports differ between identical runs");
    let _ = std::fs::remove_dir_all(&dir);
    println!("criterion 10 (byte-identical reports across reruns): PASS");
}
