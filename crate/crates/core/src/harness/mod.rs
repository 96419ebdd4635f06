//! Experiment runner: phantom suites x supervision conditions, with reports.

mod condition;
mod report;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use condition::Condition;
pub use report::{csv_bytes, render_report, ReportFiles, CSV_COLUMNS};

use crate::depthmap::{reconstruct, DepthMap, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, fill_holes, MetricsReport};
use crate::optimfit::{fit, FitConfig, FitOutcome, Target};
use crate::phantom::{generate, Phantom, PhantomConfig};
use crate::projection::derive_annotation;
use crate::supervision::{SupervisionBundle, DEFAULT_ALPHA, DEFAULT_CLAMP_EPS};
use crate::voxcore::{Axis, Mask3D, Volume};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub suite_size: usize,
    pub phantom: PhantomConfig,
    pub conditions: Vec<Condition>,
    pub alpha: f64,
    pub tau: f32,
    pub fit: FitConfig,
    pub output_dir: PathBuf,
    /// Phantom `i` uses seed `master_seed + i`.
    pub master_seed: u64,
    /// Phantom seeds to render as PNGs.
    pub render_samples: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite_size: 20,
            phantom: PhantomConfig::standard(64),
            conditions: vec![
                Condition::Fixed1(Axis::Z),
                Condition::Fixed2(Axis::X, Axis::Y),
                Condition::Fixed3,
                Condition::Rand1,
                Condition::Rand1Depth,
            ],
            alpha: DEFAULT_ALPHA,
            tau: DEFAULT_TAU,
            fit: FitConfig::default(),
            output_dir: PathBuf::from("bench_out"),
            master_seed: 0,
            render_samples: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.suite_size == 0 {
            return Err(Error::Config("suite_size must be at least 1".into()));
        }
        if self.conditions.is_empty() {
            return Err(Error::Config("conditions must not be empty".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::Config(format!("tau must be non-negative, got {}", self.tau)));
        }
        self.phantom.validate()?;
        self.fit.validate()
    }

    pub fn phantom_seeds(&self) -> Vec<u64> {
        (0..self.suite_size as u64).map(|i| self.master_seed.wrapping_add(i)).collect()
    }
}

/// The random viewpoint for a phantom, fixed for the whole experiment.
pub fn draw_axis(master_seed: u64, phantom_seed: u64) -> Axis {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(phantom_seed);
    Axis::ALL[rng.random_range(0..3)]
}

/// Everything a single supervised fit produced.
#[derive(Clone, Debug)]
pub struct CellFit {
    pub axes: Vec<Axis>,
    pub depth_map: Option<DepthMap>,
    pub outcome: FitOutcome,
}

/// Builds the supervision for `condition` from `gt` and `intensity` and fits it.
pub fn fit_condition(
    intensity: &Volume,
    gt: &Mask3D,
    condition: Condition,
    drawn: Axis,
    alpha: f64,
    tau: f32,
    cfg: &FitConfig,
) -> Result<CellFit> {
    intensity.check_same_dims(gt, "intensity vs ground truth")?;
    let dims = gt.dims();
    if condition == Condition::Full3d {
        let outcome = fit(dims, Target::Full3d(gt), cfg)?;
        return Ok(CellFit { axes: vec![], depth_map: None, outcome });
    }
    let axes = condition.axes(drawn);
    let annotations: Vec<_> = axes.iter().map(|&a| derive_annotation(gt, a)).collect();
    // depth always comes from the image, never from gt
    let depth_map = if condition.uses_depth() {
        Some(reconstruct(&annotations[0], intensity, tau)?)
    } else {
        None
    };
    let bundle = SupervisionBundle::new(annotations, depth_map.clone(), alpha, DEFAULT_CLAMP_EPS)?;
    let outcome = fit(dims, Target::Weak(&bundle), cfg)?;
    Ok(CellFit { axes, depth_map, outcome })
}

#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub phantom_seed: u64,
    pub condition: Condition,
    pub axes: Vec<Axis>,
    pub raw: Option<MetricsReport>,
    pub filled: Option<MetricsReport>,
    pub final_loss: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub prediction: Option<Mask3D>,
    #[serde(skip)]
    pub depth_map: Option<DepthMap>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// The row that goes into the CSV report.
    pub fn reported(&self) -> Option<&MetricsReport> {
        if self.condition.skips_fill() {
            self.raw.as_ref()
        } else {
            self.filled.as_ref()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and population standard deviation; NaN for no samples.
    pub fn of(xs: &[f64]) -> Stat {
        if xs.is_empty() {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub dice: Stat,
    pub precision: Stat,
    pub recall: Stat,
    pub skeleton_recall: Stat,
    /// Over cells where the distance is defined.
    pub msd: Stat,
}

impl Aggregate {
    pub fn of<'a>(reports: impl IntoIterator<Item = &'a MetricsReport>) -> Aggregate {
        let reports: Vec<&MetricsReport> = reports.into_iter().collect();
        let col = |f: fn(&MetricsReport) -> f64| Stat::of(&reports.iter().map(|r| f(r)).collect::<Vec<_>>());
        let msd: Vec<f64> = reports.iter().filter_map(|r| r.msd).collect();
        Aggregate {
            count: reports.len(),
            dice: col(|r| r.dice),
            precision: col(|r| r.precision),
            recall: col(|r| r.recall),
            skeleton_recall: col(|r| r.skeleton_recall),
            msd: Stat::of(&msd),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub cells: Vec<CellResult>,
    pub raw: Aggregate,
    pub filled: Aggregate,
    /// Aggregate of the rows written to the CSV.
    pub reported: Aggregate,
    pub failed: usize,
}

impl ConditionResult {
    pub fn from_cells(condition: Condition, cells: Vec<CellResult>) -> Self {
        let raw = Aggregate::of(cells.iter().filter_map(|c| c.raw.as_ref()));
        let filled = Aggregate::of(cells.iter().filter_map(|c| c.filled.as_ref()));
        let reported = Aggregate::of(cells.iter().filter_map(|c| c.reported()));
        let failed = cells.iter().filter(|c| c.failed()).count();
        ConditionResult { condition, cells, raw, filled, reported, failed }
    }
}

fn run_cell(phantom: &Phantom, condition: Condition, cfg: &ExperimentConfig) -> Result<CellResult> {
    let drawn = draw_axis(cfg.master_seed, phantom.seed);
    let cell = fit_condition(&phantom.intensity, &phantom.gt, condition, drawn, cfg.alpha, cfg.tau, &cfg.fit)?;
    let prediction = cell.outcome.prediction;
    let raw = evaluate(&prediction, &phantom.gt, &phantom.centerline)?;
    let filled = evaluate(&fill_holes(&prediction), &phantom.gt, &phantom.centerline)?;
    let keep = cfg.render_samples.contains(&phantom.seed);
    Ok(CellResult {
        phantom_seed: phantom.seed,
        condition,
        axes: cell.axes,
        raw: Some(raw),
        filled: Some(filled),
        final_loss: cell.outcome.trace.last().map(|r| r.total),
        error: None,
        prediction: keep.then_some(prediction),
        depth_map: if keep { cell.depth_map } else { None },
    })
}

fn failed_cell(phantom_seed: u64, condition: Condition, e: &Error) -> CellResult {
    CellResult {
        phantom_seed,
        condition,
        axes: vec![],
        raw: None,
        filled: None,
        final_loss: None,
        error: Some(format!("phantom {phantom_seed}, condition {condition}: {e}")),
        prediction: None,
        depth_map: None,
    }
}

/// Runs every (phantom, condition) cell; failing cells are recorded, not fatal.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ConditionResult>> {
    cfg.validate()?;
    let seeds = cfg.phantom_seeds();
    let phantoms: Vec<(u64, Result<Phantom>)> = seeds
        .par_iter()
        .map(|&s| (s, generate(s, &cfg.phantom)))
        .collect();

    let mut conditions = cfg.conditions.clone();
    conditions.sort();
    conditions.dedup();

    let jobs: Vec<(usize, Condition)> = (0..phantoms.len())
        .flat_map(|i| conditions.iter().map(move |&c| (i, c)))
        .collect();
    let mut cells: Vec<CellResult> = jobs
        .into_par_iter()
        .map(|(i, c)| {
            let (seed, phantom) = &phantoms[i];
            match phantom {
                Ok(p) => run_cell(p, c, cfg).unwrap_or_else(|e| failed_cell(*seed, c, &e)),
                Err(e) => failed_cell(*seed, c, e),
            }
        })
        .collect();
    cells.sort_by_key(|c| (c.phantom_seed, c.condition));

    Ok(conditions
        .into_iter()
        .map(|c| {
            let mine = cells.iter().filter(|x| x.condition == c).cloned().collect();
            ConditionResult::from_cells(c, mine)
        })
        .collect())
}

/// Summary of a run plus its report.
#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub results: Vec<ConditionResult>,
    pub files: ReportFiles,
}

impl BenchOutcome {
    pub fn failed_cells(&self) -> usize {
        self.results.iter().map(|r| r.failed).sum()
    }
}

/// `run` followed by `render_report` into `cfg.output_dir`.
pub fn bench(cfg: &ExperimentConfig) -> Result<BenchOutcome> {
    let results = run(cfg)?;
    let files = render_report(&results, cfg)?;
    Ok(BenchOutcome { results, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxcore::Dims;

    fn tiny(conditions: Vec<Condition>, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            suite_size: n,
            phantom: PhantomConfig::standard(16),
            conditions,
            fit: FitConfig { steps: 40, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn axis_draw_is_stable_and_uses_all_axes() {
        let draws: Vec<Axis> = (0..60).map(|s| draw_axis(7, s)).collect();
        assert_eq!(draws, (0..60).map(|s| draw_axis(7, s)).collect::<Vec<_>>());
        for a in Axis::ALL {
            assert!(draws.contains(&a));
        }
    }

    #[test]
    fn rand_conditions_share_the_axis() {
        let res = run(&tiny(vec![Condition::Rand1, Condition::Rand1Depth], 3)).unwrap();
        for (a, b) in res[0].cells.iter().zip(&res[1].cells) {
            assert_eq!(a.phantom_seed, b.phantom_seed);
            assert_eq!(a.axes, b.axes);
            assert_eq!(a.axes, vec![draw_axis(0, a.phantom_seed)]);
        }
    }

    #[test]
    fn cells_are_sorted_and_counted() {
        let cfg = ExperimentConfig { master_seed: 5, ..tiny(vec![Condition::Rand1, Condition::Fixed3], 3) };
        let res = run(&cfg).unwrap();
        assert_eq!(res.len(), 2);
        assert_eq!(res[0].condition, Condition::Fixed3);
        let seeds: Vec<u64> = res[0].cells.iter().map(|c| c.phantom_seed).collect();
        assert_eq!(seeds, vec![5, 6, 7]);
        assert!(res.iter().all(|r| r.failed == 0 && r.raw.count == 3));
    }

    #[test]
    fn bad_phantom_marks_cells_failed() {
        let mut cfg = tiny(vec![Condition::Rand1], 2);
        cfg.phantom.dims = Dims::cube(3).unwrap();
        cfg.phantom.radius_range = (1.0, 1.0);
        let res = run(&cfg).unwrap();
        assert_eq!(res[0].failed, 2);
        assert!(res[0].cells[0].error.as_ref().unwrap().contains("phantom 0"));
    }

    #[test]
    fn invalid_config_is_rejected() {
        assert!(run(&tiny(vec![], 1)).is_err());
        assert!(run(&ExperimentConfig { suite_size: 0, ..tiny(vec![Condition::Rand1], 1) }).is_err());
    }

    #[test]
    fn stat_values() {
        let s = Stat::of(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert!(Stat::of(&[]).mean.is_nan());
    }
}
