//! Benchmark harness for the hybrid sparse matrix library.
//!
//! Two experiment families, both emitting per-repetition CSV records:
//!
//! - element insertion: builds the same matrix by single-element insertion
//!   through each storage strategy (direct CSC, direct COO, direct RBT, and
//!   the hybrid type with one sync back to CSC) and times each build,
//! - expression fusion: times fused vs. unfused evaluation of
//!   `trace(Aᵀ·B)` and `diagmat(A + B)` on random matrices.
//!
//! Workloads are fully determined by the seed; only the timings vary from
//! run to run. Timing windows cover the complete build including memory
//! allocation, and every repetition cross-checks that the strategies (or
//! the fused/unfused paths) produced identical results.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use spmat::expr::{eval_diagmat, eval_diagmat_unfused, eval_trace, eval_trace_unfused, ExprNode};
use spmat::io::BenchRecord;
use spmat::{CooBuilder, CscStorage, RbtStorage, SpMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    InsertUnordered,
    InsertQuasiOrdered,
    ExprTrace,
    ExprDiagmat,
}

impl Experiment {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "insert-unordered" => Some(Self::InsertUnordered),
            "insert-quasi-ordered" => Some(Self::InsertQuasiOrdered),
            "expr-trace" => Some(Self::ExprTrace),
            "expr-diagmat" => Some(Self::ExprDiagmat),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::InsertUnordered => "insert-unordered",
            Self::InsertQuasiOrdered => "insert-quasi-ordered",
            Self::ExprTrace => "expr-trace",
            Self::ExprDiagmat => "expr-diagmat",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub densities: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Direct-CSC insertion in unordered mode is skipped above this density;
    /// its quadratic build time dwarfs everything else.
    pub csc_density_cap: f64,
    pub quiet: bool,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n < 2 {
            return Err(BenchError::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.reps < 1 {
            return Err(BenchError::Config("reps must be at least 1".into()));
        }
        if self.densities.is_empty() {
            return Err(BenchError::Config(
                "at least one density is required".into(),
            ));
        }
        for &d in &self.densities {
            if !(d > 0.0 && d <= 1.0) {
                return Err(BenchError::Config(format!(
                    "density {d} outside the valid range (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    /// Strategies or evaluation paths disagreed; a correctness bug, not a
    /// benchmark artifact.
    #[error("correctness check failed: {0}")]
    Correctness(String),
}

/// Runs the experiment selected by the config.
pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::InsertUnordered | Experiment::InsertQuasiOrdered => bench_insert(cfg),
        Experiment::ExprTrace | Experiment::ExprDiagmat => bench_expr(cfg),
    }
}

/// The exact insertion sequence for one (density, rep) cell: distinct linear
/// positions with values in (0, 1], shuffled for unordered mode or strictly
/// increasing for quasi-ordered mode. Deterministic in all its arguments.
pub fn insertion_sequence(n: usize, density: f64, ordered: bool, seed: u64) -> Vec<(u64, f64)> {
    let total = n as u64 * n as u64;
    let count = (density * total as f64).round() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = std::collections::HashSet::with_capacity(count as usize);
    for j in (total - count)..total {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut positions: Vec<u64> = chosen.into_iter().collect();
    positions.sort_unstable();
    if !ordered {
        positions.shuffle(&mut rng);
    }
    positions
        .into_iter()
        .map(|p| (p, 1.0 - rng.random::<f64>()))
        .collect()
}

fn cell_seed(seed: u64, density_idx: usize, rep: usize) -> u64 {
    seed ^ ((density_idx as u64) << 40) ^ ((rep as u64) << 16)
}

fn seconds<R>(f: impl FnOnce() -> R) -> (f64, R) {
    let start = Instant::now();
    let result = f();
    (start.elapsed().as_secs_f64(), result)
}

fn progress(cfg: &BenchConfig, line: &str) {
    if !cfg.quiet {
        eprintln!("{line}");
    }
}

fn summarize(times: &[f64]) -> (f64, f64) {
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    (median, mean)
}

/// Element-insertion experiment: every strategy replays the identical
/// insertion sequence and the resulting matrices are checked for equality
/// before any timing is reported.
pub fn bench_insert(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    let ordered = cfg.experiment == Experiment::InsertQuasiOrdered;
    let n = cfg.n;
    let mut records = Vec::new();

    for (density_idx, &density) in cfg.densities.iter().enumerate() {
        let run_csc = ordered || density <= cfg.csc_density_cap;
        let mut per_format: Vec<(&str, Vec<f64>)> = Vec::new();

        for rep in 0..cfg.reps {
            let sequence =
                insertion_sequence(n, density, ordered, cell_seed(cfg.seed, density_idx, rep));
            if ordered {
                debug_assert!(sequence.windows(2).all(|w| w[0].0 < w[1].0));
            }
            let mut results: Vec<(&str, f64, SpMat)> = Vec::new();

            if run_csc {
                let (t, csc) = seconds(|| {
                    let mut csc = CscStorage::new(n, n);
                    for &(index, value) in &sequence {
                        let (row, col) = ((index % n as u64) as usize, (index / n as u64) as usize);
                        csc.insert(row, col, value)
                            .expect("generated index in bounds");
                    }
                    csc
                });
                results.push(("csc", t, SpMat::from_csc(csc)));
            }

            let (t, coo) = seconds(|| {
                let mut builder = CooBuilder::new(n, n);
                for &(index, value) in &sequence {
                    let (row, col) = ((index % n as u64) as usize, (index / n as u64) as usize);
                    builder
                        .push(row, col, value)
                        .expect("generated index in bounds");
                }
                builder.finish()
            });
            results.push(("coo", t, SpMat::from_coo(coo)));

            let (t, rbt) = seconds(|| {
                let mut tree = RbtStorage::new(n, n);
                for &(index, value) in &sequence {
                    tree.insert(index, value)
                        .expect("generated index in bounds");
                }
                tree
            });
            results.push(("rbt", t, SpMat::from_rbt(rbt)));

            let (t, hybrid) = seconds(|| {
                let mut m = SpMat::new(n, n);
                for &(index, value) in &sequence {
                    let (row, col) = ((index % n as u64) as usize, (index / n as u64) as usize);
                    m.set(row, col, value).expect("generated index in bounds");
                }
                m.ensure_csc();
                m
            });
            results.push(("hybrid", t, hybrid));

            let (reference_format, _, reference) = &results[results.len() - 1];
            for (format, _, matrix) in &results {
                if matrix != reference {
                    return Err(BenchError::Correctness(format!(
                        "{} build differs from {} build at n={n}, density={density}, rep={rep}",
                        format, reference_format
                    )));
                }
            }

            for (format, t, _) in &results {
                if let Some(entry) = per_format.iter_mut().find(|(f, _)| f == format) {
                    entry.1.push(*t);
                } else {
                    per_format.push((format, vec![*t]));
                }
                records.push(BenchRecord {
                    experiment: cfg.experiment.name().to_string(),
                    format: format.to_string(),
                    n_rows: n,
                    n_cols: n,
                    density,
                    rep,
                    seconds: *t,
                });
            }
        }

        for (format, times) in &per_format {
            let (median, mean) = summarize(times);
            progress(
                cfg,
                &format!(
                    "{} n={n} density={density} {format}: median {median:.6}s mean {mean:.6}s over {} reps",
                    cfg.experiment.name(),
                    times.len()
                ),
            );
        }
        if !run_csc {
            progress(
                cfg,
                &format!(
                    "{} n={n} density={density} csc: skipped (above cap {}; override with --csc-cap)",
                    cfg.experiment.name(),
                    cfg.csc_density_cap
                ),
            );
        }
    }
    Ok(records)
}

/// Expression-fusion experiment: times the fused and unfused paths of the
/// configured expression and insists on numerical agreement (relative 1e-10)
/// before emitting the timings.
pub fn bench_expr(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    let n = cfg.n;
    let mut records = Vec::new();
    for (density_idx, &density) in cfg.densities.iter().enumerate() {
        let mut fused_times = Vec::new();
        let mut unfused_times = Vec::new();
        for rep in 0..cfg.reps {
            let seed = cell_seed(cfg.seed, density_idx, rep);
            let a = SpMat::sprandu(n, n, density, seed)
                .map_err(|e| BenchError::Config(e.to_string()))?;
            let b = SpMat::sprandu(n, n, density, seed.wrapping_add(1))
                .map_err(|e| BenchError::Config(e.to_string()))?;

            let (t_fused, t_unfused) = match cfg.experiment {
                Experiment::ExprTrace => {
                    let tree = ExprNode::leaf(&a).transpose() * ExprNode::leaf(&b);
                    let (t_fused, fused) =
                        seconds(|| eval_trace(&tree).expect("shapes agree by construction"));
                    let (t_unfused, unfused) = seconds(|| {
                        eval_trace_unfused(&tree).expect("shapes agree by construction")
                    });
                    let scale = fused.abs().max(unfused.abs());
                    if (fused - unfused).abs() > 1e-10 * scale {
                        return Err(BenchError::Correctness(format!(
                            "trace paths disagree at density {density}, rep {rep}: fused {fused} vs unfused {unfused}"
                        )));
                    }
                    (t_fused, t_unfused)
                }
                Experiment::ExprDiagmat => {
                    let tree = ExprNode::leaf(&a) + ExprNode::leaf(&b);
                    let (t_fused, fused) =
                        seconds(|| eval_diagmat(&tree).expect("shapes agree by construction"));
                    let (t_unfused, unfused) = seconds(|| {
                        eval_diagmat_unfused(&tree).expect("shapes agree by construction")
                    });
                    if fused != unfused {
                        return Err(BenchError::Correctness(format!(
                            "diagmat paths disagree at density {density}, rep {rep}"
                        )));
                    }
                    (t_fused, t_unfused)
                }
                _ => unreachable!("bench_expr only handles the expr experiments"),
            };

            for (format, t) in [("fused", t_fused), ("unfused", t_unfused)] {
                records.push(BenchRecord {
                    experiment: cfg.experiment.name().to_string(),
                    format: format.to_string(),
                    n_rows: n,
                    n_cols: n,
                    density,
                    rep,
                    seconds: t,
                });
            }
            fused_times.push(t_fused);
            unfused_times.push(t_unfused);
        }
        let (fm, fa) = summarize(&fused_times);
        let (um, ua) = summarize(&unfused_times);
        progress(
            cfg,
            &format!(
                "{} n={n} density={density}: fused median {fm:.6}s mean {fa:.6}s; unfused median {um:.6}s mean {ua:.6}s",
                cfg.experiment.name()
            ),
        );
    }
    Ok(records)
}
