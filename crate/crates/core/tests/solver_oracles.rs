use coherence::matcore::eig_hermitian;
use coherence::measures::{c_tr_family_closed, c_tr_qubit};
use coherence::solver::{
    bolzano_bracket, char_poly_eval, closest_incoherent, grid_oracle, minimize_from, objective, project_simplex,
    subgradient, SolverConfig,
};
use coherence::states::{dephase, random_density_matrix, random_family_state, seeded_rng, DiagonalState, FamilyState};
use proptest::prelude::*;
use rand::Rng;

/// Random point of the simplex with every coordinate at least `floor`.
fn interior_point(rng: &mut impl Rng, d: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    raw.iter()
        .map(|v| floor + (1.0 - d as f64 * floor) * v / total)
        .collect()
}

/// Zero-sum perturbation `y` with `max |y_i| < bound` and `x − y` still nonnegative.
fn zero_sum_perturbation(rng: &mut impl Rng, x: &[f64], bound: f64) -> Vec<f64> {
    let d = x.len();
    let z: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = z.iter().sum::<f64>() / d as f64;
    let dir: Vec<f64> = z.iter().map(|v| v - mean).collect();
    let peak = dir.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut scale = rng.random_range(0.05..0.95) * bound / peak;
    // Keep δ = x − y inside the simplex.
    for (xi, yi) in x.iter().zip(&dir) {
        if *yi > 0.0 {
            scale = scale.min(0.999 * xi / yi);
        }
    }
    dir.iter().map(|v| v * scale).collect()
}

#[test]
fn subgradient_matches_central_differences() {
    // At generic interior points the objective is differentiable; compare the
    // eigenvector formula against finite differences along simplex directions.
    let mut rng = seeded_rng(101);
    let h = 1e-6;
    for seed in 0..40 {
        let d = 2 + seed as usize % 5;
        let rho = random_density_matrix(d, seed).unwrap();
        let delta = interior_point(&mut rng, d, 0.02);
        let (_, grad) = subgradient(rho.hermitian(), &delta).unwrap();
        for i in 0..d {
            for j in (i + 1)..d {
                let mut plus = delta.clone();
                let mut minus = delta.clone();
                plus[i] += h;
                plus[j] -= h;
                minus[i] -= h;
                minus[j] += h;
                let fd = (objective(rho.hermitian(), &plus).unwrap() - objective(rho.hermitian(), &minus).unwrap())
                    / (2.0 * h);
                let analytic = grad[i] - grad[j];
                assert!(
                    (fd - analytic).abs() < 1e-5,
                    "seed {seed} ({i},{j}): fd {fd} vs {analytic}"
                );
            }
        }
    }
}

#[test]
fn projection_is_nearest_simplex_point() {
    let mut rng = seeded_rng(7);
    for _ in 0..200 {
        let d = rng.random_range(2..7);
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.5)).collect();
        let p = project_simplex(&v);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let dist = |q: &[f64]| q.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        for _ in 0..20 {
            let q = interior_point(&mut rng, d, 0.0);
            assert!(dist(&p) <= dist(&q) + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_midpoint_convex(d in 2usize..=6, seed in any::<u64>()) {
        let rho = random_density_matrix(d, seed).unwrap();
        let mut rng = seeded_rng(seed ^ 0xabc);
        let a = interior_point(&mut rng, d, 0.0);
        let b = interior_point(&mut rng, d, 0.0);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let h = rho.hermitian();
        let lhs = objective(h, &mid).unwrap();
        let rhs = 0.5 * (objective(h, &a).unwrap() + objective(h, &b).unwrap());
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn solver_never_worse_than_dephasing(d in 2usize..=5, seed in any::<u64>()) {
        let rho = random_density_matrix(d, seed).unwrap();
        let r = closest_incoherent(&rho, &SolverConfig::default()).unwrap();
        let dephased = objective(rho.hermitian(), dephase(&rho).p()).unwrap();
        prop_assert!(r.value <= dephased);
        let p = r.argmin.unwrap();
        prop_assert!((p.p().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((objective(rho.hermitian(), p.p()).unwrap() - r.value).abs() < 1e-15);
    }

    #[test]
    fn char_poly_vanishes_on_spectrum(d in 2usize..=7, seed in any::<u64>()) {
        let f = random_family_state(d, seed).unwrap();
        let mut rng = seeded_rng(seed);
        let delta = DiagonalState::new(project_simplex(&interior_point(&mut rng, d, 0.0))).unwrap();
        let diff = f.hermitian().minus_diagonal(delta.p());
        let eig = eig_hermitian(&diff).unwrap();
        let scale = eig.values.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for &lambda in &eig.values {
            let p = char_poly_eval(lambda, &f, &delta).unwrap();
            prop_assert!(p.value.abs() <= 1e-8 * scale.powi(d as i32), "λ = {}: {}", lambda, p.value);
        }
    }

    #[test]
    fn product_form_agrees_off_poles(d in 2usize..=7, seed in any::<u64>(), lambda in -1.5f64..1.5) {
        let f = random_family_state(d, seed).unwrap();
        let mut rng = seeded_rng(seed.wrapping_mul(3));
        let delta = DiagonalState::new(project_simplex(&interior_point(&mut rng, d, 0.0))).unwrap();
        let p = char_poly_eval(lambda, &f, &delta).unwrap();
        if let Some(agrees) = p.cross_check {
            prop_assert!(agrees, "det {} vs product {:?}", p.value, p.product_form);
        }
    }
}

#[test]
fn family_solver_matches_closed_form_both_sides() {
    let cfg = SolverConfig::default();
    for seed in 0..70 {
        let d = 2 + seed as usize % 7;
        let f = random_family_state(d, seed).unwrap();
        let closed = c_tr_family_closed(&f).value;
        let numeric = closest_incoherent(&f.to_density(), &cfg).unwrap().value;
        assert!(
            numeric >= closed - 1e-6 && numeric <= closed + 1e-6,
            "seed {seed}: {numeric} vs {closed}"
        );
    }
}

#[test]
fn cold_start_descends_to_closed_form() {
    // Without the dephased warm start the subgradient iteration still finds 2(d−1)|a|.
    let cfg = SolverConfig {
        max_iters: 20_000,
        ..Default::default()
    };
    let fine = SolverConfig { step_init: 1e-3, ..cfg };
    for seed in 0..20 {
        let d = 2 + seed as usize % 5;
        let f = random_family_state(d, seed).unwrap();
        let start = vec![1.0 / d as f64; d];
        let coarse = minimize_from(&f.hermitian(), &start, &cfg).unwrap();
        let run = minimize_from(&f.hermitian(), &coarse.point, &fine).unwrap();
        let closed = c_tr_family_closed(&f).value;
        assert!(
            run.value - closed < 1e-4 && run.value >= closed - 1e-12,
            "seed {seed}: {} vs {closed}",
            run.value
        );
    }
}

#[test]
fn solver_beats_lattice_on_general_qutrits() {
    let cfg = SolverConfig::default();
    for seed in 0..15 {
        let rho = random_density_matrix(3, seed).unwrap();
        let grid = grid_oracle(&rho, 150).unwrap();
        let numeric = closest_incoherent(&rho, &cfg).unwrap();
        assert!(
            numeric.value <= grid.value + 1e-9,
            "seed {seed}: {} vs grid {}",
            numeric.value,
            grid.value
        );
        assert!(grid.value - numeric.value <= 3.0 / 150.0);
    }
}

#[test]
fn random_qubits_agree_with_closed_form() {
    let cfg = SolverConfig::default();
    for seed in 0..100 {
        let rho = random_density_matrix(2, seed).unwrap();
        let numeric = closest_incoherent(&rho, &cfg).unwrap().value;
        assert!((numeric - c_tr_qubit(&rho).unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn sign_structure_of_char_poly() {
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 500 {
        seed += 1;
        let d = 2 + seed as usize % 7;
        let f = random_family_state(d, seed).unwrap();
        if f.a() == 0.0 {
            continue;
        }
        let mut rng = seeded_rng(seed ^ 0x51);
        let y = zero_sum_perturbation(&mut rng, f.x(), d as f64 * f.a().abs());
        let delta: Vec<f64> = f.x().iter().zip(&y).map(|(x, y)| x - y).collect();
        let Ok(delta) = DiagonalState::new(delta) else { continue };
        if y.iter().all(|&v| v == 0.0) {
            continue;
        }
        let anchor = (d as f64 - 1.0) * f.a();
        let at_anchor = char_poly_eval(anchor, &f, &delta).unwrap().value;
        if f.a() > 0.0 {
            assert!(at_anchor < 0.0, "seed {seed}: f((d-1)a) = {at_anchor}");
        } else {
            let at_minus_infinity = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
            assert!(
                at_anchor * at_minus_infinity < 0.0,
                "seed {seed}: f((d-1)a) = {at_anchor}"
            );
        }

        let bracket = bolzano_bracket(&f, &delta).unwrap();
        assert!(bracket.eigenvalue_beyond, "seed {seed}");
        let eig = f.hermitian().minus_diagonal(delta.p()).eigenvalues().unwrap();
        let nearest = eig
            .iter()
            .map(|l| (l - bracket.witness).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest < 1e-9,
            "seed {seed}: witness {} not in {eig:?}",
            bracket.witness
        );
        checked += 1;
    }
}

#[test]
fn bracket_rejects_boundary_perturbation() {
    // |y_i| = d|a| exactly belongs to the singular-value branch, not the bracket.
    let f = FamilyState::new(vec![0.5, 0.5], 0.125).unwrap();
    let delta = DiagonalState::new(vec![0.25, 0.75]).unwrap();
    assert!(bolzano_bracket(&f, &delta).is_err());
}
