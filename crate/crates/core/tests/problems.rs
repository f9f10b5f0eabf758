mod common;

use common::*;
use tsplit::image::GrayImage;
use tsplit::linalg::Vector;
use tsplit::problems::*;
use tsplit::rng::SeededRng;
use tsplit::splitting::{run, AlgorithmKind, RunOptions, StopRule};

fn dense_of(inst: &ProblemInstance) -> &tsplit::linalg::DenseMatrix {
    match &inst.operator {
        Operator::Dense(d) => d,
        _ => panic!("expected a dense operator"),
    }
}

#[test]
fn scad_matrix_regenerates_from_the_seed() {
    let inst = gen_scad(200, 1000, 1).unwrap();
    let d = dense_of(&inst);
    let mut rng = SeededRng::new(1);
    let scale = 1.0 / 200f64.sqrt();
    for (k, entry) in d.data().iter().enumerate() {
        assert_eq!(*entry, rng.standard_normal() * scale, "entry {k}");
    }
    // columns have unit expected norm
    let norms: Vec<f64> = (0..1000).map(|j| (0..200).map(|i| d.get(i, j).powi(2)).sum::<f64>().sqrt()).collect();
    let mean = norms.iter().sum::<f64>() / 1000.0;
    assert!((mean - 1.0).abs() < 0.02, "mean column norm {mean}");
    assert!(norms.iter().all(|n| (0.7..1.3).contains(n)));
}

#[test]
fn planted_lasso_regenerates_in_draw_order() {
    let (m, n, seed, density) = (30, 80, 9, 0.1);
    let inst = gen_lasso(m, n, seed, density, 0.1).unwrap();
    let mut rng = SeededRng::new(seed);
    let d: Vec<f64> = (0..m * n).map(|_| rng.standard_normal() / (m as f64).sqrt()).collect();
    let support = rng.sample_indices(n, 8);
    let mut u0 = vec![0.0; n];
    for i in support {
        u0[i] = rng.standard_normal();
    }
    let b: Vec<f64> = (0..m)
        .map(|i| (0..n).map(|j| d[i * n + j] * u0[j]).sum::<f64>() + 1e-3 * rng.standard_normal())
        .collect();
    for (got, want) in dense_of(&inst).data().iter().zip(&d) {
        assert!((got - want).abs() <= 1e-15 * want.abs().max(1e-300));
    }
    assert_eq!(inst.x_true.as_ref().unwrap().as_slice(), u0.as_slice());
    for (got, want) in inst.b.iter().zip(&b) {
        assert!((got - want).abs() < 1e-14);
    }
}

#[test]
fn deblur_data_matches_direct_blur() {
    let img = GrayImage::gradient(64, 64);
    let exact = gen_deblur(&img, 9, 4.0, 3, 0.0, 1e-4).unwrap();
    let want = direct_blur(img.to_vector().as_slice(), 64, 64, 9, 4.0);
    let gap = exact.b.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-13, "{gap}");

    let noisy = gen_deblur(&img, 9, 4.0, 3, 1e-3, 1e-4).unwrap();
    let mut rng = SeededRng::new(3);
    for (got, clean) in noisy.b.iter().zip(&want) {
        assert!((got - (clean + 1e-3 * rng.standard_normal())).abs() < 1e-13);
    }
    assert_eq!(noisy.x_true.unwrap(), img.to_vector());
}

#[test]
fn box_instance_stays_in_the_box() {
    let inst = gen_three_op(20, 50, 4, 0.5, 0.1).unwrap();
    let (lo, hi) = inst.bounds.clone().unwrap();
    let u0 = inst.x_true.clone().unwrap();
    assert!(u0.iter().zip(lo.iter().zip(hi.iter())).all(|(x, (l, h))| l <= x && x <= h));
}

fn random_instance(rng: &mut SeededRng) -> ProblemInstance {
    let seed = rng.next_u64() % 1000;
    let (m, n) = (1 + rng.index(12), 1 + rng.index(12));
    match rng.index(5) {
        0 => gen_lasso(m, n, seed, rng.uniform(), rng.uniform_in(0.0, 1.0)).unwrap(),
        1 => gen_scad_with(m, n, seed, rng.index(2) == 0).unwrap(),
        2 => {
            let (h, w) = (2 + rng.index(10), 2 + rng.index(10));
            let img = GrayImage::test_pattern(h, w);
            gen_deblur(&img, 1 + 2 * rng.index(3), rng.uniform_in(0.3, 3.0), seed, 1e-3, 1e-4).unwrap()
        }
        3 => gen_three_op(m, n, seed, rng.uniform(), 0.2).unwrap(),
        _ => gen_feas2d(rng.uniform_in(0.1, 3.0), seed).unwrap(),
    }
}

fn serialized(inst: &ProblemInstance) -> String {
    let mut out = Vec::new();
    write_instance(&mut out, inst).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn instances_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = SeededRng::new(50);
    for k in 0..100 {
        let inst = random_instance(&mut rng);
        let path = dir.path().join(format!("inst{k}.txt"));
        save_instance(&inst, &path).unwrap();
        let back = load_instance(&path).unwrap();
        assert_eq!(back.kind, inst.kind);
        assert_eq!(back.seed, inst.seed);
        assert_eq!(back.dims(), inst.dims());
        assert_eq!(back.b, inst.b);
        assert_eq!(back.x_true, inst.x_true);
        assert_eq!(back.reg, inst.reg);
        assert_eq!(back.bounds, inst.bounds);
        assert_eq!(serialized(&back), serialized(&inst));
        let x = Vector::from_fn(inst.dim(), |i| (i as f64 * 0.37).sin());
        let (a, b) = (inst.operator.linear_map(), back.operator.linear_map());
        assert_eq!(a.apply(&x), b.apply(&x));
    }
}

#[test]
fn missing_instance_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_instance(dir.path().join("nope")), Err(ProblemError::Io(_))));
}

#[test]
fn generation_and_solving_are_deterministic() {
    let solve = || {
        let inst = gen_lasso(40, 100, 7, 0.05, 0.1).unwrap();
        let built = inst.build().unwrap();
        let alg = inst.algorithm(&built, AlgorithmKind::TwoStep, AlgorithmOverrides::default());
        let rec = run(&alg, &built.problem, inst.initial_state(), StopRule::default(), RunOptions::default()).unwrap();
        (serialized(&inst), rec.final_state, rec.iterations)
    };
    assert_eq!(solve(), solve());
}

#[test]
fn default_settings_follow_the_instance_kind() {
    let lasso = gen_lasso(10, 20, 1, 0.1, 0.1).unwrap();
    let scad = gen_scad(10, 20, 1).unwrap();
    assert_eq!(lasso.default_beta_rho(), 0.7);
    assert_eq!(scad.default_beta_rho(), 0.24);
    assert_eq!(scad.initial_state().x_cur, Vector::filled(20, 1.0));
    let img = GrayImage::gradient(4, 4);
    let deblur = gen_deblur(&img, 3, 1.0, 1, 0.0, 1e-4).unwrap();
    let s = deblur.initial_state();
    assert_eq!((s.x_prev2[0], s.x_prev1[0], s.x_cur[0]), (0.01, 0.0, 1.0));
}
