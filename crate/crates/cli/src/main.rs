use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use vesselmip_core::depthmap::{reconstruct, DEFAULT_TAU};
use vesselmip_core::harness::{bench, draw_axis, fit_condition, Condition, ExperimentConfig};
use vesselmip_core::metrics::{evaluate, fill_holes};
use vesselmip_core::optimfit::FitConfig;
use vesselmip_core::phantom::{generate, PhantomConfig};
use vesselmip_core::projection::{
    depth_enhanced_mip, derive_annotation, load_annotation, mask_projection, mip, save_annotation, save_depth_raw,
    save_png16, save_png8_mask,
};
use vesselmip_core::supervision::DEFAULT_ALPHA;
use vesselmip_core::voxcore::io::{load_mask, load_volume, save_mask, save_volume};
use vesselmip_core::Axis;

#[derive(Parser)]
#[command(name = "vesselmip", version, about = "Vessel segmentation from annotated maximum-intensity projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic vessel phantom.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cube edge length for the standard config.
        #[arg(long, default_value_t = 64)]
        size: usize,
        /// Phantom config JSON, overrides --size.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output stem; writes <out>.vol, <out>_gt.vol, <out>_centerline.json, <out>_meta.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximum-intensity projection and depth images of a volume.
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        axis: Axis,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive a 2D annotation from a 3D mask.
    Annotate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        axis: Axis,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a depth map from an annotation and its volume.
    Depthmap {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        annotation: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a segmentation under one supervision condition.
    Fit {
        /// Phantom stem as written by `gen`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "rand1+d")]
        cond: Condition,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f32,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Drives the random viewpoint.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output stem; writes <out>.vol and <out>_loss.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a predicted mask against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        centerline: Option<PathBuf>,
        /// Fill holes in the prediction first.
        #[arg(long)]
        fill: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "custom")]
        label: String,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
        /// CSV file to append a row to.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run an experiment from a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn suffixed(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { seed, size, config, out } => {
            let cfg = match config {
                Some(p) => read_json(&p)?,
                None => PhantomConfig::standard(size),
            };
            let p = generate(seed, &cfg)?;
            ensure_parent(&out)?;
            save_volume(&out, &p.intensity)?;
            save_mask(&suffixed(&out, "_gt"), &p.gt)?;
            fs::write(suffixed(&out, "_centerline.json"), serde_json::to_string(&p.centerline)?)?;
            let meta = json!({
                "seed": seed,
                "config": cfg,
                "foreground_voxels": p.gt.count(),
                "foreground_fraction": p.gt.count() as f64 / p.gt.len() as f64,
                "segments": p.segments.len(),
                "occluder_voxels": p.occluders.count(),
            });
            fs::write(suffixed(&out, "_meta.json"), serde_json::to_string_pretty(&meta)?)?;
            println!("{} foreground voxels in {} segments", p.gt.count(), p.segments.len());
        }
        Command::Project { input, axis, out } => {
            let v = load_volume(&input)?;
            let (img, depth) = mip(&v, axis);
            let (fw, bw) = depth_enhanced_mip(&v, axis);
            save_png16(&suffixed(&out, "_mip.png"), &img)?;
            save_png16(&suffixed(&out, "_p_fw.png"), &fw)?;
            save_png16(&suffixed(&out, "_p_bw.png"), &bw)?;
            save_depth_raw(&suffixed(&out, "_z_fw"), &depth.z_fw, axis)?;
            save_depth_raw(&suffixed(&out, "_z_bw"), &depth.z_bw, axis)?;
        }
        Command::Annotate { gt, axis, out } => {
            let a = derive_annotation(&load_mask(&gt)?, axis);
            save_annotation(&out, &a)?;
            println!("{} annotated pixels", a.count());
        }
        Command::Depthmap { input, annotation, tau, out } => {
            let v = load_volume(&input)?;
            let a = load_annotation(&annotation)?;
            let d = reconstruct(&a, &v, tau)?;
            ensure_parent(&out)?;
            save_mask(&out, &d.mask)?;
            save_png8_mask(&suffixed(&out, "_projection.png"), &mask_projection(&d.mask, d.axis))?;
            println!("{} depth-map voxels", d.count());
        }
        Command::Fit { input, cond, alpha, tau, steps, lr, sigma, seed, out } => {
            let intensity = load_volume(&input)?;
            let gt = load_mask(&suffixed(&input, "_gt"))?;
            let defaults = FitConfig::default();
            let cfg = FitConfig {
                steps: steps.unwrap_or(defaults.steps),
                learning_rate: lr.unwrap_or(defaults.learning_rate),
                smoothing_sigma: sigma.unwrap_or(defaults.smoothing_sigma),
                seed,
                ..defaults
            };
            let drawn = draw_axis(seed, 0);
            let cell = fit_condition(&intensity, &gt, cond, drawn, alpha, tau, &cfg)?;
            ensure_parent(&out)?;
            save_mask(&out, &cell.outcome.prediction)?;
            let mut trace = String::from("step,total,term_2d,term_depth\n");
            for r in &cell.outcome.trace {
                trace.push_str(&format!("{},{},{},{}\n", r.step, r.total, r.term_2d, r.term_depth));
            }
            fs::write(suffixed(&out, "_loss.csv"), trace)?;
            let axes: Vec<String> = cell.axes.iter().map(|a| a.to_string()).collect();
            println!(
                "condition {cond} axes [{}]: {} voxels predicted",
                axes.join(","),
                cell.outcome.prediction.count()
            );
        }
        Command::Eval { pred, gt, centerline, fill, seed, label, out, csv } => {
            let mut p = load_mask(&pred)?;
            if fill {
                p = fill_holes(&p);
            }
            let gt = load_mask(&gt)?;
            let centerline: Vec<[usize; 3]> = match centerline {
                Some(c) => read_json(&c)?,
                None => gt.foreground(),
            };
            let report = evaluate(&p, &gt, &centerline)?;
            ensure_parent(&out)?;
            fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            if let Some(csv) = csv {
                let fresh = !csv.exists();
                ensure_parent(&csv)?;
                let mut f = OpenOptions::new().create(true).append(true).open(&csv)?;
                if fresh {
                    writeln!(f, "phantom_seed,condition,filled,dice,precision,recall,skeleton_recall,msd")?;
                }
                let msd = report.msd.map(|m| m.to_string()).unwrap_or_default();
                writeln!(
                    f,
                    "{seed},{label},{fill},{},{},{},{},{msd}",
                    report.dice, report.precision, report.recall, report.skeleton_recall
                )?;
            }
            println!("dice {:.4} precision {:.4} recall {:.4}", report.dice, report.precision, report.recall);
        }
        Command::Bench { config, out } => {
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let outcome = bench(&cfg)?;
            for r in &outcome.results {
                println!(
                    "{:<12} dice {:.4} +- {:.4}  precision {:.4}  failed {}",
                    r.condition.to_string(),
                    r.reported.dice.mean,
                    r.reported.dice.std,
                    r.reported.precision.mean,
                    r.failed
                );
            }
            println!("report written to {}", outcome.files.csv.display());
            let failed = outcome.failed_cells();
            if failed > 0 {
                eprintln!("{failed} cells failed");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
