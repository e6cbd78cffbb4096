//! Worked examples checked against independent oracles.

mod common;

use common::*;
use constrained_weber::baseline::{grid_oracle, projected_subgradient, GridSpec, StepRule};
use constrained_weber::certificates::{check_certificates, Outcome};
use constrained_weber::experiments::{generate_instance, paper_region};
use constrained_weber::geometry::{Constraint, ConvexRegion};
use constrained_weber::scenarios::random_instance;
use constrained_weber::solver::{q_step, solve, solve_from, vertex_descent_check, SolverConfig};
use constrained_weber::{Status, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn benchmark_region_projection_of_far_point_matches_grid_search() {
    let region = paper_region();
    let y = p(&[10.0, 10.0]);
    let z = region.project(&y).unwrap();
    let oracle = grid_nearest(&region, &y, [-6.0, -13.0], [6.0, 7.0], 0.05);
    assert!((&z - &oracle).norm() <= 2e-3, "{z} vs {oracle}");
    assert!(region.contains(&z, 1e-9).unwrap());
    // the projection is at least as close as every feasible grid node
    assert!((&z - &y).norm() <= (&oracle - &y).norm() + 1e-12);
}

#[test]
fn benchmark_region_projection_matches_grid_search_around_the_boundary() {
    let region = paper_region();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let y = p(&[rng.random_range(-12.0..12.0), rng.random_range(-18.0..12.0)]);
        let z = region.project(&y).unwrap();
        let oracle = grid_nearest(&region, &y, [-6.0, -13.0], [6.0, 7.0], 0.05);
        // the distance is flat along the boundary, so compare distances
        let (dz, dg) = ((&z - &y).norm(), (&oracle - &y).norm());
        assert!(dz <= dg + 1e-12, "{y}");
        assert!(dg - dz <= 2e-3, "{y}: {z} vs {oracle}");
    }
}

#[test]
fn capped_triangle_solution_matches_golden_section_on_the_boundary() {
    let tri = triangle();
    let result = solve(&tri, &cap(0.1), &SolverConfig::default()).unwrap();
    assert_eq!(result.status, Status::Converged);
    // the optimum lies on y = 0.1 since the Fermat point is cut off
    let t = golden_section(|t| tri.value(&p(&[t, 0.1])), -1.0, 2.0, 1e-12);
    let oracle = p(&[t, 0.1]);
    assert!((&result.solution - &oracle).norm() <= 5e-4);
    let spec = GridSpec {
        lower: [-0.5, -0.5],
        upper: [1.5, 0.1],
        resolution: 0.01,
        refinement_rounds: 2,
    };
    let (g, _) = grid_oracle(&tri, &cap(0.1), &spec).unwrap();
    assert!((&result.solution - &g).norm() <= 5e-4, "{g}");
    // by symmetry the boundary optimum is at x = 0.5
    assert!((t - 0.5).abs() < 1e-6);
}

#[test]
fn constrained_optimum_is_a_fixed_point_of_q() {
    let tri = triangle();
    let region = cap(0.1);
    let tight = SolverConfig::with_epsilon(1e-13);
    let x_star = solve(&tri, &region, &tight).unwrap().solution;
    // cross-check the tight solution against golden section
    let t = golden_section(|t| tri.value(&p(&[t, 0.1])), -1.0, 2.0, 1e-12);
    assert!((&x_star - p(&[t, 0.1])).norm() < 1e-6);
    let q = q_step(&tri, &region, &x_star).unwrap();
    assert!((&q - &x_star).norm() <= 1e-8);
}

#[test]
fn hull_box_solution_matches_unconstrained_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let region = ConvexRegion::new(2, vec![Constraint::boxed(vec![-10.0; 2], vec![10.0; 2])]).unwrap();
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 3..=8, 8.0, 0.5..=2.0);
        let (xu, _) = inst.unconstrained_optimum(1e-12, 1_000_000);
        // a tight tolerance, since the distance to the limit after a step
        // below epsilon grows like epsilon / (1 - contraction rate)
        let result = solve(&inst, &region, &SolverConfig::with_epsilon(1e-10)).unwrap();
        assert!((&result.solution - &xu).norm() <= 1e-7);
    }
}

#[test]
fn vertex_descent_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 25 {
        let inst = random_instance(&mut rng, 3..=8, 5.0, 0.5..=2.0);
        let k = rng.random_range(0..inst.len());
        let a = inst.vertices()[k].clone();
        // halfplane through a^k with random orientation keeps a^k feasible
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let normal = p(&[angle.cos(), angle.sin()]);
        let region = ConvexRegion::new(
            2,
            vec![Constraint::Halfspace {
                offset: normal.dot(&a) + 0.5,
                normal,
            }],
        )
        .unwrap();
        let check = vertex_descent_check(&inst, &region, VertexId(k)).unwrap();
        let q = q_step(&inst, &region, &a).unwrap();
        let d = &q - &a;
        if d.norm() < 1e-9 {
            continue;
        }
        let t = 1e-7;
        let fd = (inst.value(&(&a + &d * t)) - inst.value(&a)) / t;
        assert!(
            (check.derivative - fd).abs() <= 1e-4 * fd.abs().max(1e-3),
            "{} vs {fd}",
            check.derivative
        );
        if let Some(closed) = check.closed_form {
            assert!((closed - check.derivative).abs() <= 1e-9 * (1.0 + closed.abs()));
        }
        checked += 1;
    }
}

#[test]
fn grid_oracle_agrees_with_solver_on_halfplane_cut() {
    let tri = triangle();
    let region = cap(0.1);
    let result = solve(&tri, &region, &SolverConfig::with_epsilon(1e-10)).unwrap();
    let spec = GridSpec {
        lower: [-0.5, -0.5],
        upper: [1.5, 0.5],
        resolution: 0.01,
        refinement_rounds: 2,
    };
    let (_, f_grid) = grid_oracle(&tri, &region, &spec).unwrap();
    let l: f64 = tri.total_weight();
    assert!(f_grid >= result.objective - 1e-12);
    assert!(f_grid <= result.objective + l * spec.final_resolution());
}

#[test]
fn subgradient_reaches_the_unconstrained_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inst = random_instance(&mut rng, 5..=8, 5.0, 0.5..=2.0);
    let (xu, _) = inst.unconstrained_optimum(1e-12, 1_000_000);
    let fu = inst.value(&xu);
    let region = ConvexRegion::new(2, vec![Constraint::boxed(vec![-10.0; 2], vec![10.0; 2])]).unwrap();
    let (_, f) = projected_subgradient(&inst, &region, 100_000, StepRule::default_for(&inst)).unwrap();
    assert!(f - fu <= 1e-3 * fu, "{f} vs {fu}");
}

#[test]
fn subgradient_never_beats_the_solver_on_cut_hulls() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let inst = random_instance(&mut rng, 3..=8, 5.0, 0.5..=2.0);
        let (xu, _) = inst.unconstrained_optimum(1e-12, 1_000_000);
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let normal = p(&[angle.cos(), angle.sin()]);
        let region = ConvexRegion::new(
            2,
            vec![Constraint::Halfspace {
                offset: normal.dot(&xu) - 1.0,
                normal,
            }],
        )
        .unwrap();
        let solved = solve(&inst, &region, &SolverConfig::with_epsilon(1e-8)).unwrap();
        let (_, f) = projected_subgradient(&inst, &region, 5_000, StepRule::default_for(&inst)).unwrap();
        assert!(f >= solved.objective - 1e-6, "{f} < {}", solved.objective);
    }
}

#[test]
fn vertex_certificates_hold_when_a_halfplane_cuts_the_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 200 {
        let inst = random_instance(&mut rng, 3..=10, 10.0, 0.5..=2.0);
        let k = rng.random_range(0..inst.len());
        let a = inst.vertices()[k].clone();
        let t = inst.t_modified(&a);
        if (&t - &a).norm() < 1e-9 {
            continue;
        }
        // halfplane orthogonal to the step, between a^k and T(a^k)
        let u = (&t - &a).normalize();
        let s = rng.random_range(0.05..0.95);
        let region = ConvexRegion::new(
            2,
            vec![Constraint::Halfspace {
                offset: u.dot(&(&a + (&t - &a) * s)),
                normal: u,
            }],
        )
        .unwrap();
        let report = check_certificates(&inst, &region, &a).unwrap();
        assert!(report.passed(), "{report}");
        for name in ["vertex_zero_term", "surrogate_below_half_objective", "strict_descent"] {
            let c = report.check(name).unwrap();
            assert!(
                matches!(c.outcome, Outcome::Passed | Outcome::DegenerateTight),
                "{report}"
            );
        }
        checked += 1;
    }
}

#[test]
fn benchmark_instances_look_like_their_distribution() {
    let mut means = Vec::new();
    for seed in 0..20 {
        let inst = generate_instance(seed, 50, 10.0, 10.0).unwrap();
        let mean: f64 = inst.vertices().iter().map(|a| a[0] + a[1]).sum::<f64>() / 100.0;
        means.push(mean);
        assert!(inst.weights().iter().all(|&w| w > 0.0 && w <= 10.0));
    }
    let avg = means.iter().sum::<f64>() / means.len() as f64;
    assert!(avg.abs() <= 4.0 * 10.0 / 100f64.sqrt());
}

#[test]
fn solver_starting_from_a_vertex_moves_away() {
    let tri = triangle();
    let result = solve_from(
        &tri,
        &cap(0.1),
        &SolverConfig {
            max_iterations: 1,
            ..SolverConfig::default()
        },
        p(&[0.0, 0.0]),
    )
    .unwrap();
    assert!(result.solution.norm() > 0.1);
    assert!(result.objective < tri.value(&p(&[0.0, 0.0])));
}
