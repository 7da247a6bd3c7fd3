use crate::config::{check_positive, parse_complex, ConfigFile};
use crate::output::{Format, Sink};
use crate::{CliError, Output};
use clap::Args;
use eisenlab_core::eisenstein::EisensteinSeries;
use eisenlab_core::halfplane::{validate_level, HalfPlanePoint};
use eisenlab_core::heckeseries::oldform_decay as decay_fit;
use eisenlab_core::quadrature::{
    luo_sarnak_scan, que_ratio as ratio_at, Region, TestFunction, LUO_SARNAK_CONSTANT,
};
use eisenlab_core::Cusp;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn parse_cusp(name: &str) -> Result<Cusp, CliError> {
    Ok(name.parse::<Cusp>()?)
}

fn parse_region(text: &str) -> Result<Region, CliError> {
    Ok(text.parse::<Region>()?)
}

fn check_levels(levels: &[u64]) -> Result<(), CliError> {
    if levels.is_empty() {
        return Err(CliError::Validation("at least one level is needed".into()));
    }
    for &q in levels {
        validate_level(q)?;
    }
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct EvalFlags {
    /// Level, 1 or prime.
    #[arg(long)]
    q: Option<u64>,
    /// inf or zero.
    #[arg(long)]
    cusp: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
    /// Spectral parameter: s = 1/2 + it.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalParams {
    q: u64,
    cusp: String,
    x: f64,
    y: f64,
    t: f64,
    tol: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            q: 1,
            cusp: "inf".into(),
            x: 0.0,
            y: 1.0,
            t: 0.0,
            tol: 1e-12,
        }
    }
}

#[derive(Serialize)]
struct EvalRecord {
    re: f64,
    im: f64,
    abs2: f64,
}

pub fn eval(cfg: &ConfigFile, out: &Output, flags: &EvalFlags) -> Result<(), CliError> {
    let p: EvalParams = cfg.resolve("eval", EvalParams::default(), flags)?;
    validate_level(p.q)?;
    let cusp = parse_cusp(&p.cusp)?;
    check_positive("tol", p.tol)?;
    let z = HalfPlanePoint::new(p.x, p.y)?;
    let series = EisensteinSeries::new(p.q, cusp, Complex64::new(0.5, p.t))?;
    let v = series.eval_anywhere(&z, p.tol)?;
    let mut sink = Sink::open(out.format_or(Format::Json), out.out.as_deref(), "eval", &p)?;
    sink.row(&EvalRecord {
        re: v.re,
        im: v.im,
        abs2: v.norm_sqr(),
    })?;
    sink.finish()
}

#[derive(Args, Debug, Serialize)]
pub struct QueFlags {
    /// Comma separated levels.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u64>>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    cusp: Option<String>,
    /// Boxes "x1,x2,y1,y2[;...]" inside the fundamental domain.
    #[arg(long, allow_hyphen_values = true)]
    region_a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    region_b: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueParams {
    levels: Vec<u64>,
    t: f64,
    cusp: String,
    region_a: String,
    region_b: String,
    tol: f64,
}

impl Default for QueParams {
    fn default() -> Self {
        Self {
            levels: vec![11, 101, 1009],
            t: 1.0,
            cusp: "inf".into(),
            region_a: "0,0.4,1.2,2".into(),
            region_b: "-0.5,0.5,1,3".into(),
            tol: 1e-8,
        }
    }
}

#[derive(Serialize)]
struct QueRow {
    q: u64,
    integral_a: f64,
    integral_b: f64,
    ratio: f64,
    target: f64,
    deviation: f64,
    error_a: f64,
    error_b: f64,
}

pub fn que_ratio(cfg: &ConfigFile, out: &Output, flags: &QueFlags) -> Result<(), CliError> {
    let p: QueParams = cfg.resolve("que-ratio", QueParams::default(), flags)?;
    check_levels(&p.levels)?;
    check_positive("tol", p.tol)?;
    let cusp = parse_cusp(&p.cusp)?;
    let a = parse_region(&p.region_a)?;
    let b = parse_region(&p.region_b)?;
    let rows = p
        .levels
        .par_iter()
        .map(|&q| {
            let r = ratio_at(q, cusp, p.t, &a, &b, p.tol)?;
            Ok(QueRow {
                q,
                integral_a: r.numerator.value,
                integral_b: r.denominator.value,
                ratio: r.ratio,
                target: r.target,
                deviation: r.deviation(),
                error_a: r.numerator.error,
                error_b: r.denominator.error,
            })
        })
        .collect::<Result<Vec<_>, eisenlab_core::Error>>()?;
    let mut sink = Sink::open(
        out.format_or(Format::Csv),
        out.out.as_deref(),
        "que-ratio",
        &p,
    )?;
    for row in &rows {
        sink.row(row)?;
    }
    sink.finish()
}

#[derive(Args, Debug, Serialize)]
pub struct ScanFlags {
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Explicit comma separated values of t; overrides the range.
    #[arg(long, value_delimiter = ',')]
    t_values: Option<Vec<f64>>,
    /// profile (bump in y, constant in x) or indicator (smoothed boxes).
    #[arg(long)]
    phi: Option<String>,
    /// Support [a, b] of the vertical profile.
    #[arg(long)]
    profile_a: Option<f64>,
    #[arg(long)]
    profile_b: Option<f64>,
    /// Boxes of the smoothed indicator.
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Smoothing width of the indicator.
    #[arg(long)]
    delta: Option<f64>,
    /// Multiplies phi.
    #[arg(long, allow_hyphen_values = true)]
    phi_scale: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    t_min: f64,
    t_max: f64,
    step: f64,
    t_values: Option<Vec<f64>>,
    phi: String,
    profile_a: f64,
    profile_b: f64,
    region: String,
    delta: f64,
    phi_scale: f64,
    tol: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            t_min: 10.0,
            t_max: 40.0,
            step: 5.0,
            t_values: None,
            phi: "profile".into(),
            profile_a: 1.2,
            profile_b: 2.8,
            region: "-0.25,0.25,1.1,2.5".into(),
            delta: 0.05,
            phi_scale: 1.0,
            tol: 1e-8,
        }
    }
}

impl ScanParams {
    fn t_values(&self) -> Result<Vec<f64>, CliError> {
        if let Some(ts) = &self.t_values {
            return Ok(ts.clone());
        }
        check_positive("step", self.step)?;
        if !(self.t_max >= self.t_min) {
            return Err(CliError::Validation("t-max must not be below t-min".into()));
        }
        // Computed from the index so repeated runs hit identical values.
        let n = ((self.t_max - self.t_min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.t_min + k as f64 * self.step).collect())
    }

    fn test_function(&self) -> Result<TestFunction, CliError> {
        let phi = match self.phi.as_str() {
            "profile" => TestFunction::vertical_profile(self.profile_a, self.profile_b)?,
            "indicator" => {
                TestFunction::smoothed_indicator(parse_region(&self.region)?, self.delta)?
            }
            other => {
                return Err(CliError::Validation(format!(
                    "unknown phi '{other}' (expected profile or indicator)"
                )))
            }
        };
        if !self.phi_scale.is_finite() || self.phi_scale == 0.0 {
            return Err(CliError::Validation(
                "phi-scale must be finite and nonzero".into(),
            ));
        }
        Ok(if self.phi_scale == 1.0 {
            phi
        } else {
            phi.scaled(self.phi_scale)
        })
    }
}

#[derive(Serialize)]
struct ScanRecord {
    t: f64,
    log_t: f64,
    lhs: f64,
    error: f64,
    predicted: f64,
}

#[derive(Serialize)]
struct ScanSummary {
    slope: f64,
    constant: f64,
    relative_deviation: f64,
    phi_mass: f64,
}

pub fn ls_scan(cfg: &ConfigFile, out: &Output, flags: &ScanFlags) -> Result<(), CliError> {
    let p: ScanParams = cfg.resolve("ls-scan", ScanParams::default(), flags)?;
    check_positive("tol", p.tol)?;
    let ts = p.t_values()?;
    let phi = p.test_function()?;
    let scan = luo_sarnak_scan(&ts, &phi, p.tol)?;
    let mut sink = Sink::open(
        out.format_or(Format::Csv),
        out.out.as_deref(),
        "ls-scan",
        &p,
    )?;
    for r in &scan.rows {
        sink.row(&ScanRecord {
            t: r.t,
            log_t: (0.25 + r.t * r.t).ln(),
            lhs: r.lhs,
            error: r.error,
            predicted: r.predicted,
        })?;
    }
    sink.summary(&ScanSummary {
        slope: scan.slope,
        constant: LUO_SARNAK_CONSTANT,
        relative_deviation: (scan.slope - LUO_SARNAK_CONSTANT).abs() / LUO_SARNAK_CONSTANT,
        phi_mass: scan.phi_mass,
    })?;
    sink.finish()
}

#[derive(Args, Debug, Serialize)]
pub struct DecayFlags {
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u64>>,
    /// First seed of the ensemble.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds averaged over.
    #[arg(long)]
    seeds: Option<u64>,
    /// Ramanujan exponent of the synthetic sequences, in [0, 7/64].
    #[arg(long)]
    theta: Option<f64>,
    /// Complex s, e.g. 0.5 or 0.5+0.1i.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Force tau(q) = 0 at every level.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    zero_tau_q: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    levels: Vec<u64>,
    seed: u64,
    seeds: u64,
    theta: f64,
    s: String,
    t: f64,
    zero_tau_q: bool,
}

impl Default for DecayParams {
    fn default() -> Self {
        Self {
            levels: vec![11, 101, 1009, 10007],
            seed: 0,
            seeds: 32,
            theta: 0.0,
            s: "0.5".into(),
            t: 1.0,
            zero_tau_q: false,
        }
    }
}

#[derive(Serialize)]
struct DecayRow {
    q: u64,
    rms_leading: f64,
    rms_remainder: f64,
}

#[derive(Serialize)]
struct DecaySummary {
    exponent: Option<f64>,
    expected: f64,
}

pub fn oldform_decay(cfg: &ConfigFile, out: &Output, flags: &DecayFlags) -> Result<(), CliError> {
    let p: DecayParams = cfg.resolve("oldform-decay", DecayParams::default(), flags)?;
    check_levels(&p.levels)?;
    if p.levels.contains(&1) {
        return Err(CliError::Validation("oldform levels must be prime".into()));
    }
    if p.seeds == 0 {
        return Err(CliError::Validation("seeds must be positive".into()));
    }
    let s = parse_complex(&p.s)?;
    let end = p
        .seed
        .checked_add(p.seeds)
        .ok_or_else(|| CliError::Validation("seed range overflows".into()))?;
    let fit = decay_fit(&p.levels, p.seed..end, p.theta, s, p.t, p.zero_tau_q)?;
    let mut sink = Sink::open(
        out.format_or(Format::Csv),
        out.out.as_deref(),
        "oldform-decay",
        &p,
    )?;
    for (i, &q) in fit.levels.iter().enumerate() {
        sink.row(&DecayRow {
            q,
            rms_leading: fit.rms_leading[i],
            rms_remainder: fit.rms_remainder[i],
        })?;
    }
    sink.summary(&DecaySummary {
        exponent: fit.exponent,
        expected: p.theta - 0.5,
    })?;
    sink.finish()
}
