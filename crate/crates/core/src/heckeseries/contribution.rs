//! The oldform term of the spectral expansion built from the two twisted
//! series at `ν = -2it`, shifted to `s - it`.

use super::lemma::global_factor;
use super::{make_hecke_sequence, OldformCoefficients, TildeConvention};
use crate::error::{Error, Result};
use crate::specfun::{completed_zeta, ComplexValue};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Leading term and full value, each split into a part carrying all
/// dependence on `q` and a `q`-independent factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contribution215 {
    /// `τ(q) q^{1/2-2(s+it)} / (1 - q^{-2s})`.
    pub local_leading: ComplexValue,
    /// `τ(1) q^{1/2+it-s} / (1 - q^{-2s})` times the full bracket.
    pub local_bracket: ComplexValue,
    /// `L(s+it)L(s-it) / (ζ(2s) ξ(1+2it))` with Euler products over `p <= P`.
    pub global: ComplexValue,
    pub leading: ComplexValue,
    pub bracket: ComplexValue,
}

/// Evaluate the oldform contribution and its leading term.
pub fn oldform_contribution_215(
    old: &OldformCoefficients,
    s: ComplexValue,
    t: f64,
    convention: TildeConvention,
) -> Result<Contribution215> {
    if t == 0.0 {
        return Err(Error::Pole("ξ(1+2it) has a pole at t = 0".into()));
    }
    let q = old.level as f64;
    let lq = q.ln();
    let it = Complex64::new(0.0, t);
    let one = Complex64::new(1.0, 0.0);
    let qp = |z: Complex64| (z * lq).exp();
    let den = one - qp(-2.0 * s);
    if den.norm() < 1e-14 {
        return Err(Error::Pole(format!("1 - q^(-2s) vanishes at s = {s}")));
    }
    let w = qp(-2.0 * it);
    let tt = old.tau_tilde(convention)?;
    let x = qp(-s - it);
    let geometric = one / (one - qp(-one - 2.0 * it));
    let inner = one + w - tt * x - (one + w) * (one - tt * x) * geometric;
    let local_bracket = old.underlying.tau1() * qp(0.5 + it - s) / den * inner;
    let tau_q = old.underlying.tau_at(old.level)?;
    let local_leading = tau_q * qp(0.5 - 2.0 * (s + it)) / den;
    let xi = completed_zeta(one + 2.0 * it)?;
    let global = global_factor(old, s - it, -2.0 * it)? / xi;
    Ok(Contribution215 {
        local_leading,
        local_bracket,
        global,
        leading: local_leading * global,
        bracket: local_bracket * global,
    })
}

/// Root mean square of the leading term over a family of sequences at each
/// level, with the least-squares exponent of its decay in `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub levels: Vec<u64>,
    /// RMS over seeds of `|leading| / |global|`.
    pub rms_leading: Vec<f64>,
    /// RMS over seeds of `|bracket - leading| / |global|`.
    pub rms_remainder: Vec<f64>,
    /// `None` when some level has vanishing leading term.
    pub exponent: Option<f64>,
}

/// Fit `rms_leading ≈ C q^e`. One sequence per seed, truncated at the
/// largest level, serves every level; dividing by the `q`-independent
/// global factor removes the spread of the `L`-values between seeds.
/// With `zero_at_level` every sequence is altered to have `λ(q) = 0` at
/// the level being evaluated.
pub fn oldform_decay(
    levels: &[u64],
    seeds: std::ops::Range<u64>,
    theta: f64,
    s: ComplexValue,
    t: f64,
    zero_at_level: bool,
) -> Result<DecayFit> {
    if levels.len() < 2 || seeds.is_empty() {
        return Err(Error::Domain(
            "need at least two levels and one seed".into(),
        ));
    }
    let p_max = *levels.iter().max().expect("nonempty");
    let mut sum_lead = vec![0.0; levels.len()];
    let mut sum_rest = vec![0.0; levels.len()];
    let n = seeds.end - seeds.start;
    for seed in seeds {
        let seq = make_hecke_sequence(seed, p_max, theta)?;
        for (i, &q) in levels.iter().enumerate() {
            let seq = if zero_at_level {
                seq.clone().with_prime_value(q, 0.0)?
            } else {
                seq.clone()
            };
            let old = OldformCoefficients::new(seq, q)?;
            let c = oldform_contribution_215(&old, s, t, TildeConvention::Normalized)?;
            sum_lead[i] += c.local_leading.norm_sqr();
            sum_rest[i] += (c.local_bracket - c.local_leading).norm_sqr();
        }
    }
    let rms = |v: Vec<f64>| {
        v.into_iter()
            .map(|x| (x / n as f64).sqrt())
            .collect::<Vec<_>>()
    };
    let rms_leading = rms(sum_lead);
    let rms_remainder = rms(sum_rest);
    let xs: Vec<f64> = levels.iter().map(|&q| (q as f64).ln()).collect();
    let exponent = rms_leading.iter().all(|v| *v > 0.0).then(|| {
        let ys: Vec<f64> = rms_leading.iter().map(|v| v.ln()).collect();
        slope(&xs, &ys)
    });
    Ok(DecayFit {
        levels: levels.to_vec(),
        rms_leading,
        rms_remainder,
        exponent,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
