//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Lines are written straight to stderr so they show without `--nocapture`.
//! Every criterion runs before the final assertion, so one failure does not
//! hide the others.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::p;
use constrained_weber::baseline::{grid_oracle, GridSpec};
use constrained_weber::certificates::{check_certificates, Outcome};
use constrained_weber::experiments::{paper_region, run_batch, BatchConfig};
use constrained_weber::geometry::{Constraint, ConvexRegion, FEASIBILITY_TOL};
use constrained_weber::scenarios::{bounding_box, random_instance, random_region, sample_feasible_points};
use constrained_weber::solver::{q_step, solve, solve_from, SolverConfig};
use constrained_weber::{Point, WeberInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPSILON: f64 = 1e-5;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn small_instance(rng: &mut ChaCha8Rng) -> WeberInstance {
    random_instance(rng, 3..=10, 10.0, 0.5..=2.0)
}

fn descent() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut tight, mut failures) = (0, 0, 0);
    let mut vertices = 0;
    let mut worst = f64::INFINITY;
    while checked < 10_000 {
        let inst = small_instance(&mut rng);
        let region = random_region(&mut rng, &inst).unwrap();
        for x in sample_feasible_points(&mut rng, &inst, &region, 10).unwrap() {
            let q = q_step(&inst, &region, &x).unwrap();
            if q == x || checked == 10_000 {
                continue;
            }
            let (fx, fq) = (inst.value(&x), inst.value(&q));
            let slack = fx - fq;
            worst = worst.min(slack / fx);
            if slack <= 0.0 {
                // a tie within rounding of f is flagged rather than failed
                if slack >= -1e-14 * fx {
                    tight += 1;
                } else {
                    failures += 1;
                }
            }
            if inst.vertices().contains(&x) {
                vertices += 1;
            }
            checked += 1;
        }
    }
    verdict(
        failures == 0,
        format!(
            "{checked} points ({vertices} vertices), {failures} failures, \
             {tight} degenerate-tight, min relative slack {worst:.2e}"
        ),
    )
}

const IDENTITIES: [&str; 8] = [
    "gradient_map_identity",
    "alpha_identity",
    "norm_expansion",
    "substitution_fixes_q",
    "surrogate_at_x",
    "surrogate_at_q",
    "vertex_zero_term",
    "surrogate_decomposition",
];

fn certificates() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut points, mut failures) = (0, 0);
    let mut worst_identity: f64 = 0.0;
    let mut first = None;
    while points < 1000 {
        let inst = small_instance(&mut rng);
        let region = random_region(&mut rng, &inst).unwrap();
        for x in sample_feasible_points(&mut rng, &inst, &region, 10).unwrap() {
            let report = check_certificates(&inst, &region, &x).unwrap();
            let mut ok = true;
            for c in &report.checks {
                if IDENTITIES.contains(&c.name) {
                    if c.outcome != Outcome::Skipped {
                        worst_identity = worst_identity.max(c.residual);
                        ok &= c.residual <= 1e-8;
                    }
                } else {
                    ok &= c.outcome != Outcome::Failed;
                }
            }
            if !ok {
                failures += 1;
                first.get_or_insert_with(|| report.to_string());
            }
            points += 1;
        }
    }
    if let Some(report) = first {
        eprint!("{report}");
    }
    verdict(
        failures == 0,
        format!("{points} points, {failures} failing, worst identity residual {worst_identity:.2e}"),
    )
}

fn unconstrained_agreement() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut within, mut worst) = (0, 0.0f64);
    for _ in 0..100 {
        let inst = small_instance(&mut rng);
        let (lo, hi) = bounding_box(&inst, 0.1);
        let region = ConvexRegion::new(2, vec![Constraint::boxed(lo.to_vec(), hi.to_vec())]).unwrap();
        let (xu, _) = inst.unconstrained_optimum(1e-13, 10_000_000);
        let x = solve(&inst, &region, &SolverConfig::with_epsilon(EPSILON)).unwrap().solution;
        let ratio = (&x - &xu).norm() / EPSILON;
        worst = worst.max(ratio);
        if ratio <= 10.0 {
            within += 1;
        }
    }
    verdict(
        within == 100,
        format!(
            "{within}/100 instances within 10 eps, worst distance {worst:.1} eps \
             (the stopping rule bounds the last step, not the distance to the limit)"
        ),
    )
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut failures, mut worst) = (0, 0.0f64);
    for _ in 0..50 {
        let inst = small_instance(&mut rng);
        let (xu, _) = inst.unconstrained_optimum(1e-12, 1_000_000);
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let normal = p(&[angle.cos(), angle.sin()]);
        let cut = rng.random_range(0.5..3.0);
        let region = ConvexRegion::new(
            2,
            vec![Constraint::Halfspace {
                offset: normal.dot(&xu) - cut,
                normal,
            }],
        )
        .unwrap();
        let f = solve(&inst, &region, &SolverConfig::with_epsilon(EPSILON)).unwrap().objective;
        let (lower, upper) = bounding_box(&inst, 0.1);
        let spec = GridSpec {
            lower,
            upper,
            resolution: 0.1,
            refinement_rounds: 3,
        };
        let (_, f_grid) = grid_oracle(&inst, &region, &spec).unwrap();
        let tol = inst.total_weight() * spec.final_resolution() + 1e-6;
        let gap = (f - f_grid).abs();
        worst = worst.max(gap / tol);
        if gap > tol {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!("50 instances, {failures} outside L*1e-4 + 1e-6, worst gap {worst:.3} of the tolerance"),
    )
}

fn vertex_non_stalling() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut checked, mut failures) = (0, 0);
    while checked < 100 {
        let inst = small_instance(&mut rng);
        let region = random_region(&mut rng, &inst).unwrap();
        let feasible: Vec<Point> = inst
            .vertices()
            .iter()
            .filter(|a| region.contains(a, 0.0).unwrap())
            .cloned()
            .collect();
        if feasible.is_empty() {
            continue;
        }
        let a = feasible[rng.random_range(0..feasible.len())].clone();
        let best = solve(&inst, &region, &SolverConfig::with_epsilon(1e-10)).unwrap().objective;
        if inst.value(&a) <= best + 1e-9 * (1.0 + best) {
            continue;
        }
        let one = SolverConfig {
            max_iterations: 1,
            ..SolverConfig::default()
        };
        let step = solve_from(&inst, &region, &one, a.clone()).unwrap();
        if step.solution == a || step.objective >= inst.value(&a) {
            failures += 1;
        }
        checked += 1;
    }
    verdict(
        failures == 0,
        format!("{checked} non-optimal feasible vertex starts, {failures} stalled"),
    )
}

fn benchmark() -> Verdict {
    let report = run_batch(&BatchConfig::default()).unwrap();
    let agg = &report.aggregates;
    let worse = report
        .records
        .iter()
        .filter(|r| !(r.f_solver <= r.f_baseline + 1e-4))
        .count();
    let pass = agg.failed == 0 && agg.max_constraint_violation <= 1e-6 && worse == 0;
    verdict(
        pass,
        format!(
            "{} experiments, {} failed, max violation {:.1e}, {worse} worse than the baseline, \
             {} better by more than 0.01 ({}), min difference {:.2e}",
            agg.experiments,
            agg.failed,
            agg.max_constraint_violation,
            agg.count_difference_above_0_01,
            agg.baseline,
            agg.min_difference,
        ),
    )
}

fn gradient_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut checked, mut failures, mut worst) = (0, 0, 0.0f64);
    while checked < 1000 {
        let inst = small_instance(&mut rng);
        let x = p(&[rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0)]);
        if inst.vertices().iter().any(|a| (a - &x).norm() < 1e-3) {
            continue;
        }
        let h = 1e-6;
        let fd = Point::from_iterator(
            2,
            (0..2).map(|i| {
                let mut e = Point::zeros(2);
                e[i] = h;
                (inst.value(&(&x + &e)) - inst.value(&(&x - &e))) / (2.0 * h)
            }),
        );
        let r = inst.r_tilde(&x);
        let ratio = (&r + &fd).norm() / (1e-5 * (1.0 + r.norm()));
        worst = worst.max(ratio);
        if ratio > 1.0 {
            failures += 1;
        }
        checked += 1;
    }
    verdict(
        failures == 0,
        format!("{checked} points, {failures} failures, worst residual {worst:.2e} of the tolerance"),
    )
}

fn projection_regions() -> Vec<(&'static str, ConvexRegion)> {
    let single = |c: Constraint| ConvexRegion::new(2, vec![c]).unwrap();
    vec![
        ("halfspace", single(Constraint::halfspace(vec![1.0, -2.0], 0.5))),
        ("ball", single(Constraint::ball(vec![1.0, 1.0], 2.0))),
        ("box", single(Constraint::boxed(vec![-1.0, -2.0], vec![3.0, 1.0]))),
        ("affine_equality", single(Constraint::affine_equality(vec![1.0, 1.0], 1.0))),
        (
            "poly2d",
            ConvexRegion::from_json(
                r#"{"dimension": 2, "constraints": [{"type": "poly2d", "coeffs_x": [0, 0, 0.5, 0], "sign_y": -1, "offset": 1}]}"#,
            )
            .unwrap(),
        ),
        ("benchmark region", paper_region()),
    ]
}

fn projection_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let draw = |rng: &mut ChaCha8Rng| p(&[rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)]);
    let mut failed = Vec::new();
    let mut worst = [0.0f64; 3];
    for (name, region) in projection_regions() {
        let feasible: Vec<Point> = (0..50).map(|_| region.project(&draw(&mut rng)).unwrap()).collect();
        let mut bad = 0;
        for _ in 0..1000 {
            let (x, y) = (draw(&mut rng), draw(&mut rng));
            let (px, py) = (region.project(&x).unwrap(), region.project(&y).unwrap());
            let idem = (region.project(&px).unwrap() - &px).norm();
            let expand = (&px - &py).norm() - (&x - &y).norm();
            let vi = feasible.iter().map(|w| (&x - &px).dot(&(w - &px))).fold(f64::MIN, f64::max);
            worst = [worst[0].max(idem), worst[1].max(expand), worst[2].max(vi)];
            let feasible = region.contains(&px, FEASIBILITY_TOL).unwrap();
            if !(feasible && idem <= 1e-8 && expand <= 1e-10 && vi <= 1e-8) {
                bad += 1;
            }
        }
        if bad > 0 {
            failed.push(format!("{name}: {bad}"));
        }
    }
    verdict(
        failed.is_empty(),
        format!(
            "6 regions x 1000 points, failing [{}], worst idempotence {:.1e}, \
             expansion {:.1e}, variational {:.1e}",
            failed.join(", "),
            worst[0],
            worst[1],
            worst[2]
        ),
    )
}

/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Verdict, u64);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        ("descent", descent, 60),
        ("certificates", certificates, 30),
        ("unconstrained agreement", unconstrained_agreement, 30),
        ("oracle equivalence", oracle_equivalence, 120),
        ("vertex non-stalling", vertex_non_stalling, 10),
        ("benchmark reproduction", benchmark, 300),
        ("gradient check", gradient_check, 10),
        ("projection properties", projection_properties, 60),
    ];
    let mut failed = Vec::new();
    let mut stderr = std::io::stderr();
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = v.pass && in_time;
        if !pass {
            failed.push(i + 1);
        }
        writeln!(
            stderr,
            "criterion {} {name}: {} | {} | {:.2} s of {limit} s",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        )
        .unwrap();
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
