//! The nine-constraint planar benchmark: region, seeded instances and the
//! batch runner comparing the solver against the projected-subgradient
//! baseline.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{projected_subgradient, StepRule};
use crate::geometry::{midpoint_convexity_violations, Constraint, ConvexRegion, Poly2d};
use crate::numeric::splitmix64;
use crate::solver::{solve, SolverConfig, Status};
use crate::weber::WeberInstance;
use crate::{Error, Point, Result};

/// Exact rational `num / den`.
type Ratio = (i64, i64);

fn to_f64((num, den): Ratio) -> f64 {
    num as f64 / den as f64
}

/// `sign_y * y + c0 + c1 x + c2 x^2 + c3 x^3 <= 0`
const CUBIC_UPPER: ([Ratio; 4], f64) = ([(-4, 1), (-1, 8), (1, 12), (1, 216)], 1.0);
const CUBIC_LOWER: ([Ratio; 4], f64) = ([(-133, 32), (7, 32), (-3, 32), (1, 32)], -1.0);

/// `a x + b y <= c` as `(a, b, c)`.
const LINEAR: [(Ratio, Ratio, Ratio); 7] = [
    ((4, 5), (1, 1), (59, 10)),
    ((1, 1), (0, 1), (11, 2)),
    ((3, 2), (-1, 1), (35, 4)),
    ((1, 1), (-1, 1), (13, 2)),
    ((-1, 3), (-1, 1), (11, 3)),
    ((-2, 3), (-1, 1), (13, 3)),
    ((-4, 1), (1, 1), (19, 1)),
];

fn cubic((coeffs, sign_y): ([Ratio; 4], f64)) -> Constraint {
    let c = coeffs.map(to_f64);
    Constraint::smooth(Poly2d::new(c, sign_y, 0.0).expect("valid benchmark cubic"))
}

fn linear((a, b, c): (Ratio, Ratio, Ratio)) -> Constraint {
    Constraint::halfspace(vec![to_f64(a), to_f64(b)], to_f64(c))
}

/// The benchmark region `{g(x, y) <= 0}` with its nine components in order:
/// upper cubic, four lines, lower cubic, three lines.
pub fn paper_region() -> ConvexRegion {
    let mut constraints = vec![cubic(CUBIC_UPPER)];
    constraints.extend(LINEAR[..4].iter().copied().map(linear));
    constraints.push(cubic(CUBIC_LOWER));
    constraints.extend(LINEAR[4..].iter().copied().map(linear));
    ConvexRegion::new(2, constraints).expect("benchmark region is nonempty")
}

/// Window `[lower, upper]` enclosing the benchmark region with margin.
pub const PLOT_WINDOW: ([f64; 2], [f64; 2]) = ([-10.0, -15.0], [10.0, 10.0]);

/// Sampled midpoint-convexity result for one smooth constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveConvexity {
    /// Position in the constraint list, zero-based.
    pub constraint: usize,
    pub samples: usize,
    pub violations: usize,
    pub worst_gap: f64,
    /// Smallest and largest `x` among violating midpoints.
    pub violation_x_range: Option<(f64, f64)>,
}

/// Midpoint-convexity spot check of each smooth constraint of
/// [`paper_region`] over [`PLOT_WINDOW`]. The individual cubic sets are not
/// convex everywhere; the intersection is, because the violations lie
/// outside the region.
pub fn paper_region_convexity(samples: usize, seed: u64) -> Vec<PrimitiveConvexity> {
    let (lo, hi) = PLOT_WINDOW;
    let (lo, hi) = (Point::from_row_slice(&lo), Point::from_row_slice(&hi));
    paper_region()
        .constraints()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match c {
            Constraint::Smooth(g) => {
                let found = midpoint_convexity_violations(g.as_ref(), &lo, &hi, samples, seed, 1e-12);
                let xs = found.iter().map(|v| 0.5 * (v.a[0] + v.b[0]));
                let range = xs.fold(None, |acc: Option<(f64, f64)>, x| {
                    Some(acc.map_or((x, x), |(a, b)| (a.min(x), b.max(x))))
                });
                Some(PrimitiveConvexity {
                    constraint: i,
                    samples,
                    violations: found.len(),
                    worst_gap: found.iter().map(|v| v.gap).fold(0.0, f64::max),
                    violation_x_range: range,
                })
            }
            _ => None,
        })
        .collect()
}

/// Seed of experiment `index` in a batch seeded with `seed`.
pub fn experiment_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ index)
}

/// Draws `m` planar vertices with i.i.d. `Normal(0, vertex_std^2)`
/// coordinates and weights uniform on `(0, weight_max]`.
///
/// The stream is ChaCha8 seeded with `seed`; a collinear or duplicated draw
/// is discarded and redrawn from the next ChaCha stream, at most 100 times.
pub fn generate_instance(
    seed: u64,
    m: usize,
    vertex_std: f64,
    weight_max: f64,
) -> Result<WeberInstance> {
    if m < 3 {
        return Err(Error::InvalidConfig(format!("m must be at least 3, got {m}")));
    }
    let normal = Normal::new(0.0, vertex_std)
        .map_err(|e| Error::InvalidConfig(format!("vertex_std: {e}")))?;
    if !(weight_max.is_finite() && weight_max > 0.0) {
        return Err(Error::InvalidConfig("weight_max must be positive".into()));
    }
    const ATTEMPTS: usize = 100;
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let vertices: Vec<Point> = (0..m)
            .map(|_| Point::from_vec(vec![normal.sample(&mut rng), normal.sample(&mut rng)]))
            .collect();
        let weights: Vec<f64> = (0..m)
            .map(|_| weight_max * (1.0 - rng.random::<f64>()))
            .collect();
        if let Ok(instance) = WeberInstance::new(vertices, weights) {
            return Ok(instance);
        }
    }
    Err(Error::GenerationFailed(ATTEMPTS))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub num_experiments: usize,
    pub m: usize,
    pub vertex_std: f64,
    pub weight_max: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub baseline_steps: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            num_experiments: 100,
            m: 50,
            vertex_std: 10.0,
            weight_max: 10.0,
            epsilon: 1e-5,
            seed: 1,
            baseline_steps: 5_000,
        }
    }
}

impl BatchConfig {
    fn validate(&self) -> Result<()> {
        if self.num_experiments == 0 || self.baseline_steps == 0 || self.m < 3 {
            return Err(Error::InvalidConfig(
                "experiments and baseline steps must be positive and m >= 3".into(),
            ));
        }
        if !(self.vertex_std > 0.0 && self.weight_max > 0.0 && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(
                "vertex_std, weight_max and epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One experiment. Numeric fields are NaN when the experiment failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub index: usize,
    pub seed: u64,
    pub f_solver: f64,
    pub f_baseline: f64,
    /// `f_baseline - f_solver`; positive when the solver did better.
    pub difference: f64,
    /// `max_j g_j(x_solver)`.
    pub max_constraint_value: f64,
    /// `max(0, max_constraint_value)`.
    pub max_constraint_violation: f64,
    pub iterations: usize,
    pub status: String,
    pub kkt_residual: f64,
    pub solution_x: f64,
    pub solution_y: f64,
}

impl ExperimentRecord {
    pub fn failed(&self) -> bool {
        self.status != Status::Converged.to_string()
            && self.status != Status::MaxIterationsReached.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchAggregates {
    /// Names the comparison method; the reference statistic was measured
    /// against a different solver.
    pub baseline: String,
    pub experiments: usize,
    pub failed: usize,
    pub not_converged: usize,
    pub count_difference_above_0_01: usize,
    pub max_difference: f64,
    pub max_difference_index: usize,
    pub min_difference: f64,
    pub max_constraint_violation: f64,
    pub max_constraint_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub config: BatchConfig,
    pub aggregates: BatchAggregates,
    pub records: Vec<ExperimentRecord>,
}

fn run_one(config: &BatchConfig, region: &ConvexRegion, index: usize) -> ExperimentRecord {
    let seed = experiment_seed(config.seed, index as u64);
    let mut record = ExperimentRecord {
        index,
        seed,
        f_solver: f64::NAN,
        f_baseline: f64::NAN,
        difference: f64::NAN,
        max_constraint_value: f64::NAN,
        max_constraint_violation: f64::NAN,
        iterations: 0,
        status: String::new(),
        kkt_residual: f64::NAN,
        solution_x: f64::NAN,
        solution_y: f64::NAN,
    };
    let outcome = (|| -> Result<()> {
        let instance = generate_instance(seed, config.m, config.vertex_std, config.weight_max)?;
        let result = solve(&instance, region, &SolverConfig::with_epsilon(config.epsilon))?;
        let (_, f_baseline) = projected_subgradient(
            &instance,
            region,
            config.baseline_steps,
            StepRule::default_for(&instance),
        )?;
        let g_max = region.max_constraint_value(&result.solution)?;
        record.f_solver = result.objective;
        record.f_baseline = f_baseline;
        record.difference = f_baseline - result.objective;
        record.max_constraint_value = g_max;
        record.max_constraint_violation = g_max.max(0.0);
        record.iterations = result.iterations;
        record.status = result.status.to_string();
        record.kkt_residual = result.kkt_residual;
        record.solution_x = result.solution[0];
        record.solution_y = result.solution[1];
        Ok(())
    })();
    if let Err(e) = outcome {
        record.status = format!("Failed: {e}");
    }
    record
}

fn aggregate(records: &[ExperimentRecord]) -> BatchAggregates {
    let ok: Vec<&ExperimentRecord> = records.iter().filter(|r| !r.failed()).collect();
    let (max_difference_index, max_difference) = ok
        .iter()
        .map(|r| (r.index, r.difference))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    BatchAggregates {
        baseline: "projected subgradient (in-repo)".into(),
        experiments: records.len(),
        failed: records.len() - ok.len(),
        not_converged: ok
            .iter()
            .filter(|r| r.status != Status::Converged.to_string())
            .count(),
        count_difference_above_0_01: ok.iter().filter(|r| r.difference > 0.01).count(),
        max_difference,
        max_difference_index,
        min_difference: ok.iter().map(|r| r.difference).fold(f64::INFINITY, f64::min),
        max_constraint_violation: ok
            .iter()
            .map(|r| r.max_constraint_violation)
            .fold(0.0, f64::max),
        max_constraint_value: ok
            .iter()
            .map(|r| r.max_constraint_value)
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Runs every experiment (in parallel, collected in index order) on
/// [`paper_region`]. Failures are recorded, not propagated.
pub fn run_batch(config: &BatchConfig) -> Result<BatchReport> {
    config.validate()?;
    let region = paper_region();
    let records: Vec<ExperimentRecord> = (0..config.num_experiments)
        .into_par_iter()
        .map(|i| run_one(config, &region, i))
        .collect();
    Ok(BatchReport {
        config: config.clone(),
        aggregates: aggregate(&records),
        records,
    })
}

/// JSON summary written to `report.json`: configuration and aggregates.
#[derive(Serialize)]
struct Summary<'a> {
    config: &'a BatchConfig,
    aggregates: &'a BatchAggregates,
}

impl BatchReport {
    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Summary {
            config: &self.config,
            aggregates: &self.aggregates,
        })?)
    }

    pub fn records_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
            .expect("csv output is UTF-8"))
    }

    fn plot_csv(&self, column: &str, value: impl Fn(&ExperimentRecord) -> f64) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", column])?;
        for r in &self.records {
            w.write_record([(r.index + 1).to_string(), value(r).to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
            .expect("csv output is UTF-8"))
    }

    /// Writes `report.csv`, `report.json`, `plotdata_difference.csv`,
    /// `plotdata_feasibility.csv` and the cubic convexity check
    /// `convexity.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), self.records_csv()?)?;
        fs::write(dir.join("report.json"), self.summary_json()?)?;
        fs::write(
            dir.join("plotdata_difference.csv"),
            self.plot_csv("difference", |r| r.difference)?,
        )?;
        fs::write(
            dir.join("plotdata_feasibility.csv"),
            self.plot_csv("max_constraint_value", |r| r.max_constraint_value)?,
        )?;
        fs::write(
            dir.join("convexity.json"),
            serde_json::to_string_pretty(&paper_region_convexity(10_000, self.config.seed))?,
        )?;
        Ok(())
    }
}
