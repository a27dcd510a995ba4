//! Re-identification of the contact-model power laws from sweep data.
//!
//! Both springs are of the form `y = c · x^p`. For the air spring the
//! diameter enters linearly, so the regression target is `F / D`.
//!
//! The default fitter starts from the closed-form log-log least-squares
//! solution and refines it with Gauss-Newton on the untransformed residual,
//! halving the step whenever the sum of squares would grow.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::contact::{self, ContactParams, Peg};
use crate::error::{Error, Result};
use crate::registry::Registry;

pub const DEFAULT_FITTER: &str = "gauss-newton";
pub const MAX_ITERATIONS: usize = 50;
pub const STEP_TOLERANCE: f64 = 1e-10;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Air,
    Lumped,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Air => "air",
            ModelKind::Lumped => "lumped",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "air" => Ok(ModelKind::Air),
            "lumped" => Ok(ModelKind::Lumped),
            other => Err(Error::invalid("model", format!("`{other}` (expected air or lumped)"))),
        }
    }
}

/// One force-displacement reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSample {
    /// Intrusion, m.
    pub x: f64,
    /// Peg diameter, mm; absent for lumped sweeps.
    pub d: Option<f64>,
    /// Force, N.
    pub f: f64,
}

/// Power law `y = coefficient · x^exponent` fitted to (x, y) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub fitter: String,
    pub coefficient: f64,
    pub exponent: f64,
    /// RMS of `F − F̂`, N.
    pub residual_rms: f64,
    pub sample_count: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Closed-form log-log solution, reported for comparison.
    pub log_coefficient: f64,
    pub log_exponent: f64,
    /// RMS of `ln F − ln F̂` at the final estimate.
    pub log_residual_rms: f64,
}

pub trait PowerLawFitter: Send + Sync {
    fn name(&self) -> &'static str;

    /// Fits `y = c · x^p`. Inputs are already validated: at least three
    /// strictly positive pairs with at least two distinct `x`.
    fn fit(&self, x: &[f64], y: &[f64]) -> Result<PowerLawFit>;
}

/// Ordinary least squares of `ln y` against `ln x`.
#[derive(Debug, Default)]
pub struct LogLog;

/// Log-log start, then Gauss-Newton on `y − c · x^p` with step halving.
#[derive(Debug, Default)]
pub struct GaussNewton;

/// Closed-form log-log solution `(c, p)`.
pub fn log_log_estimate(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::RankDeficient("all x values are equal".into()));
    }
    let p = sxy / sxx;
    Ok(((my - p * mx).exp(), p))
}

impl PowerLawFitter for LogLog {
    fn name(&self) -> &'static str {
        "loglog"
    }

    fn fit(&self, x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
        let (c, p) = log_log_estimate(x, y)?;
        Ok(PowerLawFit {
            coefficient: c,
            exponent: p,
            iterations: 0,
            converged: true,
        })
    }
}

pub fn ssr(x: &[f64], y: &[f64], c: f64, p: f64) -> f64 {
    x.iter().zip(y).map(|(&xi, &yi)| (yi - c * xi.powf(p)).powi(2)).sum()
}

/// `ssr(b) − ssr(a)`, summed as `d · (d − 2 r_a)` with the model change `d`
/// evaluated through `expm1`/`ln_1p`. Near the optimum the change is far
/// below the rounding error of two separately computed sums.
fn ssr_change(x: &[f64], y: &[f64], a: (f64, f64), b: (f64, f64)) -> f64 {
    let log_ratio = ((b.0 - a.0) / a.0).ln_1p();
    let dp = b.1 - a.1;
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let ma = a.0 * xi.powf(a.1);
            let d = ma * (log_ratio + dp * xi.ln()).exp_m1();
            d * (d - 2.0 * (yi - ma))
        })
        .sum()
}

impl GaussNewton {
    /// Runs the refinement from `(c, p)` and returns the SSR of every
    /// accepted iterate alongside the fit.
    ///
    /// Iterates on `x / x0` with `x0` the geometric mean of `x`, which
    /// decorrelates coefficient and exponent.
    pub fn refine(&self, x: &[f64], y: &[f64], c0: f64, p0: f64) -> Result<(PowerLawFit, Vec<f64>)> {
        let x0 = (x.iter().map(|v| v.ln()).sum::<f64>() / x.len() as f64).exp();
        let scaled: Vec<f64> = x.iter().map(|v| v / x0).collect();
        let x = scaled.as_slice();
        let (mut c, mut p) = (c0 * x0.powf(p0), p0);
        let mut cost = ssr(x, y, c, p);
        let mut trace = vec![cost];
        let mut converged = false;
        let mut iterations = 0;

        while iterations < MAX_ITERATIONS {
            iterations += 1;
            // normal equations of the 2-parameter Jacobian
            let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (&xi, &yi) in x.iter().zip(y) {
                let m = xi.powf(p);
                let jc = m;
                let jp = c * m * xi.ln();
                let r = yi - c * m;
                a11 += jc * jc;
                a12 += jc * jp;
                a22 += jp * jp;
                g1 += jc * r;
                g2 += jp * r;
            }
            let det = a11 * a22 - a12 * a12;
            if !(det.is_finite() && det > 0.0) {
                return Err(Error::RankDeficient(format!("singular normal matrix (det = {det})")));
            }
            let dc = (a22 * g1 - a12 * g2) / det;
            let dp = (a11 * g2 - a12 * g1) / det;

            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let (nc, np) = (c + scale * dc, p + scale * dp);
                if nc > 0.0 {
                    let delta = ssr_change(x, y, (c, p), (nc, np));
                    if delta <= 0.0 {
                        accepted = Some((nc, np, cost + delta));
                        break;
                    }
                }
                scale *= 0.5;
            }
            let Some((nc, np, trial)) = accepted else {
                // no descent left along the Gauss-Newton direction
                converged = true;
                break;
            };
            // judge convergence on the full step: near the optimum rounding
            // noise in the cost can force halvings that say nothing about
            // the distance left
            let rel = (dc / c).abs().max((dp / p).abs());
            c = nc;
            p = np;
            cost = trial;
            trace.push(cost);
            if rel < STEP_TOLERANCE {
                converged = true;
                break;
            }
        }
        let fit = PowerLawFit {
            coefficient: c * x0.powf(-p),
            exponent: p,
            iterations,
            converged,
        };
        Ok((fit, trace))
    }
}

impl PowerLawFitter for GaussNewton {
    fn name(&self) -> &'static str {
        "gauss-newton"
    }

    fn fit(&self, x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
        let (c, p) = log_log_estimate(x, y)?;
        Ok(self.refine(x, y, c, p)?.0)
    }
}

pub fn registry() -> Registry<dyn PowerLawFitter> {
    Registry::new("fitter")
        .with("loglog", |_| -> Box<dyn PowerLawFitter> { Box::new(LogLog) })
        .with("gauss-newton", |_| -> Box<dyn PowerLawFitter> { Box::new(GaussNewton) })
}

/// Checks the samples and returns the regression pairs `(x, y)`.
pub fn regression_data(samples: &[SweepSample], model: ModelKind) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for (index, s) in samples.iter().enumerate() {
        if !(s.x > 0.0 && s.f > 0.0 && s.x.is_finite() && s.f.is_finite()) {
            return Err(Error::NonPositiveSample {
                index,
                x: s.x,
                force: s.f,
            });
        }
        let y = match (model, s.d) {
            (ModelKind::Lumped, _) => s.f,
            (ModelKind::Air, Some(d)) if d > 0.0 && d.is_finite() => s.f / d,
            (ModelKind::Air, d) => {
                return Err(Error::invalid(
                    "sample diameter",
                    format!("sample {index}: air model needs D > 0, got {d:?}"),
                ))
            }
        };
        xs.push(s.x);
        ys.push(y);
    }
    if xs.iter().all(|&v| v == xs[0]) {
        return Err(Error::RankDeficient("all x values are equal".into()));
    }
    Ok((xs, ys))
}

/// Fits the air (`F = a1 · D · x^a2`) or lumped (`F = a3 · x^a4`) law with
/// the named fitter.
pub fn fit_power_law_with(samples: &[SweepSample], model: ModelKind, fitter: &str) -> Result<FitResult> {
    let strategy = registry().create(fitter, &())?;
    let (xs, ys) = regression_data(samples, model)?;
    let (log_c, log_p) = log_log_estimate(&xs, &ys)?;
    let fit = strategy.fit(&xs, &ys)?;
    let (c, p) = (fit.coefficient, fit.exponent);

    let n = samples.len() as f64;
    let (mut sq, mut log_sq) = (0.0, 0.0);
    for s in samples {
        let scale = match model {
            ModelKind::Air => s.d.unwrap_or(1.0),
            ModelKind::Lumped => 1.0,
        };
        let predicted = scale * c * s.x.powf(p);
        sq += (s.f - predicted).powi(2);
        log_sq += (s.f.ln() - predicted.ln()).powi(2);
    }
    Ok(FitResult {
        model,
        fitter: strategy.name().to_string(),
        coefficient: c,
        exponent: p,
        residual_rms: (sq / n).sqrt(),
        sample_count: samples.len(),
        iterations: fit.iterations,
        converged: fit.converged,
        log_coefficient: log_c,
        log_exponent: log_p,
        log_residual_rms: (log_sq / n).sqrt(),
    })
}

pub fn fit_power_law(samples: &[SweepSample], model: ModelKind) -> Result<FitResult> {
    fit_power_law_with(samples, model, DEFAULT_FITTER)
}

/// Synthetic sweep from the forward model. Air sweeps take the product of
/// `xs` and `ds`; lumped sweeps ignore `ds`. Gaussian noise of standard
/// deviation `noise_rms` (N) is added with a generator seeded by `seed`.
pub fn generate_sweep(
    params: &ContactParams,
    model: ModelKind,
    xs: &[f64],
    ds: &[f64],
    noise_rms: f64,
    seed: u64,
) -> Result<Vec<SweepSample>> {
    params.validate()?;
    if xs.is_empty() {
        return Err(Error::invalid("sweep grid", "no x values"));
    }
    if let Some(bad) = xs.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid("sweep grid", format!("x = {bad} must be positive")));
    }
    let noise = Normal::new(0.0, noise_rms)
        .map_err(|e| Error::invalid("noise_rms", format!("{noise_rms}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut out = Vec::new();
    match model {
        ModelKind::Air => {
            if ds.is_empty() {
                return Err(Error::invalid("sweep grid", "air sweep needs diameters"));
            }
            for &d in ds {
                let peg = Peg::new(d)?;
                for &x in xs {
                    let f = contact::f_air(x, &peg, params) + noise.sample(&mut rng);
                    out.push(SweepSample { x, d: Some(d), f });
                }
            }
        }
        ModelKind::Lumped => {
            for &x in xs {
                let f = contact::f_lmp(x, params) + noise.sample(&mut rng);
                out.push(SweepSample { x, d: None, f });
            }
        }
    }
    Ok(out)
}

/// `n` evenly spaced points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
