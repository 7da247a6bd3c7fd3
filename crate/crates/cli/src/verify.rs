use crate::config::{check_positive, parse_complex, ConfigFile};
use crate::output::{Format, Sink};
use crate::{CliError, Output};
use clap::{Args, Subcommand};
use eisenlab_core::arith::{gcd, primes_up_to};
use eisenlab_core::eisenstein::{coset_sum_eval, scattering_matrix, EisensteinSeries};
use eisenlab_core::halfplane::{act_int, random_gamma0, random_point_in_f, validate_level};
use eisenlab_core::heckeseries::{
    lemma24_euler_factor_check, lemma24_exact_euler_factor_check, lemma24_lhs, lemma24_rhs,
    make_hecke_sequence, ramanujan_bound, AlphaReading, Display, OldformCoefficients,
    TildeConvention, FACTOR_TOL, THETA_MAX,
};
use eisenlab_core::Cusp;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Subcommand, Debug)]
pub enum Suite {
    /// Gamma_0(q)-invariance of |E(z, 1/2+it)|^2.
    Invariance(InvarianceFlags),
    /// Fourier expansion against the direct coset sum at real s >= 3/2.
    Oracle(OracleFlags),
    /// Unitarity of the scattering matrix on the critical line.
    Scattering(ScatteringFlags),
    /// Euler factors and closed forms of the divisor-twisted oldform series.
    Lemma24(LemmaFlags),
    /// Multiplicativity, the Hecke relation and the Ramanujan bound.
    Hecke(HeckeFlags),
}

/// One line of a verification report.
#[derive(Debug, Serialize)]
struct Check {
    suite: &'static str,
    case: String,
    max_deviation: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(suite: &'static str, case: String, max_deviation: f64, tolerance: f64) -> Self {
        // NaN deviations fail.
        Self {
            suite,
            case,
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
        }
    }
}

#[derive(Serialize)]
struct Summary {
    checks: usize,
    failed: usize,
    pass: bool,
}

pub fn run(cfg: &ConfigFile, out: &Output, suite: &Suite) -> Result<bool, CliError> {
    let (checks, mut sink) = match suite {
        Suite::Invariance(f) => {
            let p: InvarianceParams =
                cfg.resolve("verify-invariance", InvarianceParams::default(), f)?;
            (invariance(&p)?, open(out, "verify-invariance", &p)?)
        }
        Suite::Oracle(f) => {
            let p: OracleParams = cfg.resolve("verify-oracle", OracleParams::default(), f)?;
            (oracle(&p)?, open(out, "verify-oracle", &p)?)
        }
        Suite::Scattering(f) => {
            let p: ScatteringParams =
                cfg.resolve("verify-scattering", ScatteringParams::default(), f)?;
            (scattering(&p)?, open(out, "verify-scattering", &p)?)
        }
        Suite::Lemma24(f) => {
            let p: LemmaParams = cfg.resolve("verify-lemma24", LemmaParams::default(), f)?;
            (lemma24(&p)?, open(out, "verify-lemma24", &p)?)
        }
        Suite::Hecke(f) => {
            let p: HeckeParams = cfg.resolve("verify-hecke", HeckeParams::default(), f)?;
            (hecke(&p)?, open(out, "verify-hecke", &p)?)
        }
    };
    for c in &checks {
        sink.row(c)?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    sink.summary(&Summary {
        checks: checks.len(),
        failed,
        pass: failed == 0,
    })?;
    sink.finish()?;
    Ok(failed == 0)
}

fn open<P: Serialize>(out: &Output, command: &'static str, p: &P) -> Result<Sink, CliError> {
    Sink::open(out.format_or(Format::Json), out.out.as_deref(), command, p)
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

fn collect<T>(results: Vec<Result<T, eisenlab_core::Error>>) -> Result<Vec<T>, CliError> {
    Ok(results.into_iter().collect::<Result<Vec<_>, _>>()?)
}

#[derive(Args, Debug, Serialize)]
pub struct InvarianceFlags {
    /// Comma separated levels.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<u64>>,
    /// Comma separated values of t.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t: Option<Vec<f64>>,
    /// Random group elements per case.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceParams {
    q: Vec<u64>,
    t: Vec<f64>,
    trials: usize,
    seed: u64,
    tol: f64,
}

impl Default for InvarianceParams {
    fn default() -> Self {
        Self {
            q: vec![5, 11],
            t: vec![1.0, 5.0],
            trials: 20,
            seed: 0,
            tol: 1e-7,
        }
    }
}

/// `|E|^2` at a point of the fundamental domain against its value at a
/// random `Gamma_0(q)` translate. Deviations are relative to
/// `max(|E(z)|^2, 1e-3)`.
fn invariance(p: &InvarianceParams) -> Result<Vec<Check>, CliError> {
    check_levels(&p.q)?;
    check_positive("tol", p.tol)?;
    let mut cases = Vec::new();
    for &q in &p.q {
        for &t in &p.t {
            for &cusp in Cusp::all_for_level(q) {
                cases.push((q, t, cusp));
            }
        }
    }
    let results = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(q, t, cusp))| {
            let series = EisensteinSeries::new(q, cusp, Complex64::new(0.5, t))?;
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(i as u64));
            let mut worst: f64 = 0.0;
            for _ in 0..p.trials {
                let z = random_point_in_f(&mut rng);
                let g = random_gamma0(q, 50.max(q as i64), &mut rng);
                let a = series.eval_expansion(&z, 1e-13)?.norm_sqr();
                let b = series.eval_anywhere(&act_int(&g, &z)?, 1e-13)?.norm_sqr();
                worst = worst.max((a - b).abs() / a.max(1e-3));
            }
            Ok(Check::new(
                "invariance",
                format!("q={q} t={t} cusp={}", cusp.name()),
                worst,
                p.tol,
            ))
        })
        .collect();
    collect(results)
}

#[derive(Args, Debug, Serialize)]
pub struct OracleFlags {
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<u64>>,
    /// Random points of the fundamental domain per case.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Real s, at least 3/2.
    #[arg(long)]
    s: Option<f64>,
    /// Largest lower-left entry kept in the coset sum.
    #[arg(long)]
    bound: Option<f64>,
    /// Slack added to the rigorous tail.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleParams {
    q: Vec<u64>,
    points: usize,
    seed: u64,
    s: f64,
    bound: f64,
    tol: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            q: vec![1, 5, 11],
            points: 20,
            seed: 0,
            s: 2.0,
            bound: 300.0,
            tol: 1e-8,
        }
    }
}

/// Reports the largest excess of `|expansion - coset sum|` over the tail
/// bound of the coset sum.
fn oracle(p: &OracleParams) -> Result<Vec<Check>, CliError> {
    check_levels(&p.q)?;
    check_positive("tol", p.tol)?;
    let s = Complex64::new(p.s, 0.0);
    let cases: Vec<(u64, Cusp)> =
        p.q.iter()
            .flat_map(|&q| Cusp::all_for_level(q).iter().map(move |&c| (q, c)))
            .collect();
    let results = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(q, cusp))| {
            let series = EisensteinSeries::new(q, cusp, s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(i as u64));
            let mut excess = f64::NEG_INFINITY;
            for _ in 0..p.points {
                let z = random_point_in_f(&mut rng);
                let e = series.eval_expansion(&z, 1e-12)?;
                let o = coset_sum_eval(q, cusp, &z, s, p.bound)?;
                excess = excess.max((e - o.value).norm() - o.tail);
            }
            Ok(Check::new(
                "oracle",
                format!("q={q} cusp={}", cusp.name()),
                excess,
                p.tol,
            ))
        })
        .collect();
    collect(results)
}

#[derive(Args, Debug, Serialize)]
pub struct ScatteringFlags {
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringParams {
    q: Vec<u64>,
    t: Vec<f64>,
    tol: f64,
}

impl Default for ScatteringParams {
    fn default() -> Self {
        Self {
            q: vec![5, 11],
            t: vec![1.0, 5.0, 10.0],
            tol: 1e-6,
        }
    }
}

fn scattering(p: &ScatteringParams) -> Result<Vec<Check>, CliError> {
    check_levels(&p.q)?;
    check_positive("tol", p.tol)?;
    let mut out = Vec::new();
    for &q in &p.q {
        for &t in &p.t {
            let m = scattering_matrix(q, Complex64::new(0.5, t))?;
            out.push(Check::new(
                "scattering",
                format!("q={q} t={t}"),
                m.unitarity_defect(),
                p.tol,
            ));
        }
    }
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct LemmaFlags {
    /// Number of synthetic sequences.
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Euler factors are compared at every prime up to this bound and at
    /// the level.
    #[arg(long)]
    primes: Option<u64>,
    /// Number of coefficients compared per factor.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u64>>,
    /// Complex values of nu separated by ';', e.g. "0;-0.4;-1.4i".
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    /// Complex s of the truncated-sum comparison.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// The truncated sum runs over n <= truncation * level.
    #[arg(long)]
    truncation: Option<u64>,
    /// plain, q-free or both.
    #[arg(long)]
    display: Option<String>,
    /// valuation or valuation-minus-one.
    #[arg(long)]
    alpha: Option<String>,
    /// normalized or raw.
    #[arg(long)]
    convention: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaParams {
    seeds: u64,
    seed: u64,
    primes: u64,
    order: usize,
    theta: f64,
    levels: Vec<u64>,
    nu: String,
    s: String,
    truncation: u64,
    display: String,
    alpha: String,
    convention: String,
}

impl Default for LemmaParams {
    fn default() -> Self {
        Self {
            seeds: 20,
            seed: 0,
            primes: 50,
            order: 10,
            theta: THETA_MAX,
            levels: vec![11, 101],
            nu: "0;-0.4;-1.4i".into(),
            s: "3".into(),
            truncation: 2000,
            display: "both".into(),
            alpha: "valuation".into(),
            convention: "normalized".into(),
        }
    }
}

impl LemmaParams {
    fn displays(&self) -> Result<Vec<Display>, CliError> {
        match self.display.as_str() {
            "both" => Ok(vec![Display::Plain, Display::QFree]),
            "plain" => Ok(vec![Display::Plain]),
            "q-free" => Ok(vec![Display::QFree]),
            other => Err(CliError::Validation(format!(
                "unknown display '{other}' (expected plain, q-free or both)"
            ))),
        }
    }

    fn alpha(&self) -> Result<AlphaReading, CliError> {
        match self.alpha.as_str() {
            "valuation" => Ok(AlphaReading::Valuation),
            "valuation-minus-one" => Ok(AlphaReading::ValuationMinusOne),
            other => Err(CliError::Validation(format!("unknown alpha '{other}'"))),
        }
    }

    fn convention(&self) -> Result<TildeConvention, CliError> {
        match self.convention.as_str() {
            "normalized" => Ok(TildeConvention::Normalized),
            "raw" => Ok(TildeConvention::Raw),
            other => Err(CliError::Validation(format!(
                "unknown convention '{other}'"
            ))),
        }
    }
}

fn display_name(d: Display) -> &'static str {
    match d {
        Display::Plain => "plain",
        Display::QFree => "q-free",
    }
}

fn lemma24(p: &LemmaParams) -> Result<Vec<Check>, CliError> {
    check_levels(&p.levels)?;
    if p.levels.contains(&1) {
        return Err(CliError::Validation("oldform levels must be prime".into()));
    }
    if p.seeds == 0 || p.order == 0 || p.truncation == 0 {
        return Err(CliError::Validation(
            "seeds, order and truncation must be positive".into(),
        ));
    }
    let displays = p.displays()?;
    let alpha = p.alpha()?;
    let convention = p.convention()?;
    let nus =
        p.nu.split(';')
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()?;
    let s = parse_complex(&p.s)?;
    let max_prime = p
        .primes
        .max(*p.levels.iter().max().expect("levels are nonempty"));
    let seeds: Vec<u64> = (0..p.seeds).map(|k| p.seed.wrapping_add(k)).collect();
    let sequences = seeds
        .iter()
        .map(|&seed| make_hecke_sequence(seed, max_prime, p.theta))
        .collect::<Result<Vec<_>, _>>()?;

    let mut checks = Vec::new();
    for &q in &p.levels {
        let mut primes = primes_up_to(p.primes);
        if !primes.contains(&q) {
            primes.push(q);
        }
        let olds = sequences
            .iter()
            .map(|seq| OldformCoefficients::new(seq.clone(), q))
            .collect::<Result<Vec<_>, _>>()?;
        for &display in &displays {
            let floating = olds
                .par_iter()
                .zip(&seeds)
                .map(|(old, seed)| {
                    let mut worst: f64 = 0.0;
                    for &prime in &primes {
                        for &nu in &nus {
                            let c = lemma24_euler_factor_check(
                                old, prime, p.order, nu, display, alpha, convention,
                            )?;
                            worst = worst.max(c.max_deviation);
                        }
                    }
                    Ok(Check::new(
                        "lemma24",
                        format!(
                            "euler factors q={q} display={} seed={seed}",
                            display_name(display)
                        ),
                        worst,
                        FACTOR_TOL,
                    ))
                })
                .collect();
            checks.extend(collect(floating)?);

            // Exact comparison at nu = -1: any nonzero deviation fails.
            let exact = olds
                .par_iter()
                .map(|old| {
                    let mut worst: f64 = 0.0;
                    for &prime in &primes {
                        let c = lemma24_exact_euler_factor_check(
                            old, prime, p.order, 1, display, alpha, convention,
                        )?;
                        worst = worst.max(if c.agrees {
                            0.0
                        } else {
                            c.max_deviation.max(f64::MIN_POSITIVE)
                        });
                    }
                    Ok(worst)
                })
                .collect();
            let worst = collect(exact)?.into_iter().fold(0.0, f64::max);
            checks.push(Check::new(
                "lemma24",
                format!(
                    "exact euler factors q={q} display={} nu=-1",
                    display_name(display)
                ),
                worst,
                0.0,
            ));

            let truncated = nus
                .par_iter()
                .map(|&nu| {
                    let old = &olds[0];
                    let lhs = lemma24_lhs(old, s, nu, p.truncation * q, display, alpha)?;
                    let rhs = lemma24_rhs(old, s, nu, display, convention)?;
                    // Excess of the discrepancy over the rigorous tail.
                    let excess = (lhs.value - rhs).norm() - lhs.tail;
                    Ok(Check::new(
                        "lemma24",
                        format!(
                            "truncated sum q={q} display={} s={s} nu={nu} seed={}",
                            display_name(display),
                            seeds[0]
                        ),
                        excess,
                        1e-15 * rhs.norm().max(1.0),
                    ))
                })
                .collect();
            checks.extend(collect(truncated)?);
        }
    }
    Ok(checks)
}

#[derive(Args, Debug, Serialize)]
pub struct HeckeFlags {
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest prime carried by each sequence.
    #[arg(long)]
    primes: Option<u64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Pairs (m, n) range over 1..=n-max.
    #[arg(long)]
    n_max: Option<u64>,
    /// Tolerance of the floating Hecke relation, relative to max(1, |value|).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeckeParams {
    seeds: u64,
    seed: u64,
    primes: u64,
    theta: f64,
    n_max: u64,
    tol: f64,
}

impl Default for HeckeParams {
    fn default() -> Self {
        Self {
            seeds: 20,
            seed: 0,
            primes: 50,
            theta: THETA_MAX,
            n_max: 60,
            tol: 1e-10,
        }
    }
}

fn hecke(p: &HeckeParams) -> Result<Vec<Check>, CliError> {
    check_positive("tol", p.tol)?;
    if p.seeds == 0 || p.n_max == 0 {
        return Err(CliError::Validation(
            "seeds and n-max must be positive".into(),
        ));
    }
    let seeds: Vec<u64> = (0..p.seeds).map(|k| p.seed.wrapping_add(k)).collect();
    let results: Vec<Result<Vec<Check>, eisenlab_core::Error>> = seeds
        .par_iter()
        .map(|&seed| {
            let seq = make_hecke_sequence(seed, p.primes, p.theta)?;
            let ns: Vec<u64> = (1..=p.n_max).filter(|&n| seq.is_smooth(n)).collect();

            let mut mult_failures = 0u32;
            for &m in &ns {
                for &n in &ns {
                    if gcd(m, n) == 1
                        && seq.lambda_at_exact(m * n)?
                            != seq.lambda_at_exact(m)? * seq.lambda_at_exact(n)?
                    {
                        mult_failures += 1;
                    }
                }
            }

            let mut composition: f64 = 0.0;
            for &m in &ns {
                for &n in &ns {
                    let lhs = seq.lambda_at(m)? * seq.lambda_at(n)?;
                    let rhs = seq.hecke_composition(m, n)?;
                    composition = composition.max((lhs - rhs).abs() / rhs.abs().max(1.0));
                }
            }

            let mut bound_excess = f64::NEG_INFINITY;
            for (&prime, &lambda) in seq.prime_values() {
                bound_excess = bound_excess.max(lambda.abs() - ramanujan_bound(prime, p.theta));
            }

            Ok(vec![
                Check::new(
                    "hecke",
                    format!("exact multiplicativity seed={seed}"),
                    mult_failures as f64,
                    0.0,
                ),
                Check::new(
                    "hecke",
                    format!("hecke relation seed={seed}"),
                    composition,
                    p.tol,
                ),
                Check::new(
                    "hecke",
                    format!("ramanujan bound seed={seed}"),
                    bound_excess,
                    0.0,
                ),
            ])
        })
        .collect();
    Ok(collect(results)?.into_iter().flatten().collect())
}
