use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Aggregate, ConditionResult, ExperimentConfig};
use crate::error::{Error, Result};
use crate::phantom::{generate, Phantom};
use crate::projection::{depth_enhanced_mip, derive_annotation, mask_projection, mip, save_png16, save_png8_mask};
use crate::voxcore::Axis;

pub const CSV_COLUMNS: [&str; 8] = [
    "phantom_seed",
    "condition",
    "filled",
    "dice",
    "precision",
    "recall",
    "skeleton_recall",
    "msd",
];

#[derive(Clone, Debug, Default)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub aggregate: PathBuf,
    pub renders: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    phantom_seed: u64,
    condition: String,
    filled: bool,
    dice: Option<f64>,
    precision: Option<f64>,
    recall: Option<f64>,
    skeleton_recall: Option<f64>,
    msd: Option<f64>,
}

#[derive(Serialize)]
struct ConditionSummary<'a> {
    condition: String,
    failed: usize,
    raw: &'a Aggregate,
    filled: &'a Aggregate,
    reported: &'a Aggregate,
    failures: Vec<&'a str>,
}

#[derive(Serialize)]
struct Summary<'a> {
    master_seed: u64,
    suite_size: usize,
    conditions: Vec<ConditionSummary<'a>>,
}

/// Writes `results.csv`, `aggregate.json` and renders for `cfg.render_samples`.
pub fn render_report(results: &[ConditionResult], cfg: &ExperimentConfig) -> Result<ReportFiles> {
    if results.is_empty() {
        return Err(Error::Config("no results to report".into()));
    }
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;

    let mut files = ReportFiles {
        csv: out.join("results.csv"),
        aggregate: out.join("aggregate.json"),
        renders: Vec::new(),
    };
    fs::write(&files.csv, csv_bytes(results)?)?;

    let summary = Summary {
        master_seed: cfg.master_seed,
        suite_size: cfg.suite_size,
        conditions: results
            .iter()
            .map(|r| ConditionSummary {
                condition: r.condition.to_string(),
                failed: r.failed,
                raw: &r.raw,
                filled: &r.filled,
                reported: &r.reported,
                failures: r.cells.iter().filter_map(|c| c.error.as_deref()).collect(),
            })
            .collect(),
    };
    fs::write(&files.aggregate, serde_json::to_string_pretty(&summary)?)?;

    for &seed in &cfg.render_samples {
        if !cfg.phantom_seeds().contains(&seed) {
            continue;
        }
        // generation failures are already recorded on the cells
        if let Ok(p) = generate(seed, &cfg.phantom) {
            files.renders.extend(render_phantom(results, &p, out)?);
        }
    }
    Ok(files)
}

/// The CSV report, rows sorted by (phantom_seed, condition).
pub fn csv_bytes(results: &[ConditionResult]) -> Result<Vec<u8>> {
    let mut cells: Vec<_> = results.iter().flat_map(|r| &r.cells).collect();
    cells.sort_by_key(|c| (c.phantom_seed, c.condition));
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        let m = c.reported();
        w.serialize(Row {
            phantom_seed: c.phantom_seed,
            condition: c.condition.to_string(),
            filled: !c.condition.skips_fill(),
            dice: m.map(|m| m.dice),
            precision: m.map(|m| m.precision),
            recall: m.map(|m| m.recall),
            skeleton_recall: m.map(|m| m.skeleton_recall),
            msd: m.and_then(|m| m.msd),
        })?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn render_phantom(results: &[ConditionResult], p: &Phantom, out: &Path) -> Result<Vec<PathBuf>> {
    let seed = p.seed;
    let dir = out.join("renders").join(format!("phantom_{seed}"));
    fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    for a in Axis::ALL {
        let (fw, bw) = depth_enhanced_mip(&p.intensity, a);
        for (name, img) in [("mip", mip(&p.intensity, a).0), ("p_fw", fw), ("p_bw", bw)] {
            let path = dir.join(format!("{name}_{a}.png"));
            save_png16(&path, &img)?;
            written.push(path);
        }
    }
    let mut masks = Vec::new();
    for a in Axis::ALL {
        masks.push((format!("annotation_{a}.png"), derive_annotation(&p.gt, a).mask));
    }
    for r in results {
        let Some(cell) = r.cells.iter().find(|c| c.phantom_seed == seed) else {
            continue;
        };
        let tag = r.condition.to_string().replace(':', "-");
        if let Some(d) = &cell.depth_map {
            masks.push((format!("depth_{tag}.png"), mask_projection(&d.mask, d.axis)));
        }
        if let Some(pred) = &cell.prediction {
            let axis = cell.axes.first().copied().unwrap_or(Axis::Z);
            masks.push((format!("prediction_{tag}.png"), mask_projection(pred, axis)));
        }
    }
    for (name, img) in masks {
        let path = dir.join(name);
        save_png8_mask(&path, &img)?;
        written.push(path);
    }
    Ok(written)
}
