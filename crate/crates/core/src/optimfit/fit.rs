use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::smooth::smooth;
use crate::error::{Error, Result};
use crate::supervision::{loss, loss_full3d, LossValue, SupervisionBundle, DEFAULT_CLAMP_EPS};
use crate::voxcore::{Dims, Grid, Mask3D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub adam_betas: (f64, f64),
    pub adam_eps: f64,
    pub init_logit: f64,
    pub smoothing_sigma: f64,
    pub binarize_threshold: f64,
    /// Not consumed by the optimiser itself, which is deterministic; callers
    /// use it for their own draws (e.g. the random viewpoint).
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            steps: 500,
            learning_rate: 0.05,
            adam_betas: (0.9, 0.999),
            adam_eps: 1e-8,
            init_logit: -2.0,
            smoothing_sigma: 0.0,
            binarize_threshold: 0.5,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        let (b1, b2) = self.adam_betas;
        if !((0.0..1.0).contains(&b1) && (0.0..1.0).contains(&b2)) {
            return bad(format!("adam betas must lie in [0, 1), got {:?}", self.adam_betas));
        }
        if !(self.adam_eps > 0.0) || !self.init_logit.is_finite() {
            return bad("adam_eps must be positive and init_logit finite".into());
        }
        if !(self.smoothing_sigma >= 0.0) {
            return bad(format!("smoothing_sigma must be non-negative, got {}", self.smoothing_sigma));
        }
        if !(self.binarize_threshold > 0.0 && self.binarize_threshold < 1.0) {
            return bad(format!("binarize_threshold must lie in (0, 1), got {}", self.binarize_threshold));
        }
        Ok(())
    }
}

/// What the field is fitted against.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Weak(&'a SupervisionBundle),
    Full3d(&'a Mask3D),
}

impl Target<'_> {
    fn evaluate(&self, y: &Grid<f64>) -> Result<LossValue> {
        match self {
            Target::Weak(s) => loss(y, s),
            Target::Full3d(gt) => loss_full3d(y, gt, DEFAULT_CLAMP_EPS),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LogitField {
    pub theta: Grid<f64>,
    pub smoothing_sigma: f64,
}

impl LogitField {
    pub fn constant(dims: Dims, logit: f64, smoothing_sigma: f64) -> Self {
        LogitField {
            theta: Grid::filled(dims, logit),
            smoothing_sigma,
        }
    }

    pub fn probabilities(&self) -> Grid<f64> {
        if self.smoothing_sigma > 0.0 {
            smooth(&self.theta, self.smoothing_sigma).map(|&s| sigmoid(s))
        } else {
            self.theta.map(|&s| sigmoid(s))
        }
    }
}

#[inline]
fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub total: f64,
    pub term_2d: f64,
    pub term_depth: f64,
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub prediction: Mask3D,
    pub probabilities: Grid<f64>,
    pub field: LogitField,
    /// Loss before each update, `steps` entries.
    pub trace: Vec<LossRecord>,
}

/// Fits a logit field of extent `dims` to `target` with Adam.
pub fn fit(dims: Dims, target: Target<'_>, cfg: &FitConfig) -> Result<FitOutcome> {
    cfg.validate()?;
    if let Target::Weak(s) = target {
        s.check_dims(dims)?;
    }
    if let Target::Full3d(gt) = target {
        if gt.dims() != dims {
            return Err(Error::DimsMismatch(format!(
                "target {:?} vs field {:?}",
                gt.dims().as_array(),
                dims.as_array()
            )));
        }
    }

    let sigma = cfg.smoothing_sigma;
    let mut field = LogitField::constant(dims, cfg.init_logit, sigma);
    let mut opt = Adam::new(dims.len(), cfg.learning_rate, cfg.adam_betas, cfg.adam_eps);
    let mut trace = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let y = field.probabilities();
        let l = target.evaluate(&y)?;
        if !l.total.is_finite() {
            return Err(Error::Divergence { step });
        }
        trace.push(LossRecord {
            step,
            total: l.total,
            term_2d: l.term_2d,
            term_depth: l.term_depth,
        });
        // dL/ds = dL/dy * y (1 - y), then back through the smoothing.
        let mut g = l.gradient;
        g.data_mut()
            .iter_mut()
            .zip(y.data())
            .for_each(|(g, &p)| *g *= p * (1.0 - p));
        let g = if sigma > 0.0 { smooth(&g, sigma) } else { g };
        opt.step(field.theta.data_mut(), g.data());
    }

    let probabilities = field.probabilities();
    if probabilities.data().iter().any(|p| !p.is_finite()) {
        return Err(Error::Divergence { step: cfg.steps });
    }
    let threshold = cfg.binarize_threshold;
    Ok(FitOutcome {
        prediction: probabilities.map(|&p| p >= threshold),
        probabilities,
        field,
        trace,
    })
}
