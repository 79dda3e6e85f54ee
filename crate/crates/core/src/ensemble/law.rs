use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::rng;

/// Distribution of a single entry of the measurement matrix.
///
/// `Spiky { delta, big_r }` is the law of `z = eps * (1 + R * eta)` where
/// `eps` is a symmetric sign and `eta` an independent selector with mean
/// `delta`. Samples are always normalized by the analytic `||z||_{L2}`, so
/// every law has mean zero and unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarLaw {
    Rademacher,
    Gaussian,
    Spiky { delta: f64, big_r: f64 },
}

impl ScalarLaw {
    /// Validated constructor for the spiky law. `big_r = 0` is accepted and
    /// degenerates to a Rademacher sign.
    pub fn spiky(delta: f64, big_r: f64) -> Result<Self> {
        let law = ScalarLaw::Spiky { delta, big_r };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if let ScalarLaw::Spiky { delta, big_r } = *self {
            if !(0.0..=1.0).contains(&delta) {
                return domain(format!("spike rate delta={delta} outside [0, 1]"));
            }
            if !(big_r.is_finite() && big_r >= 0.0) {
                return domain(format!("spike magnitude R={big_r} must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarLaw::Rademacher => "rademacher",
            ScalarLaw::Gaussian => "gaussian",
            ScalarLaw::Spiky { .. } => "spiky",
        }
    }

    /// Exact `||z||_{L2}` of the unnormalized variable.
    pub fn l2_scale(&self) -> f64 {
        match *self {
            ScalarLaw::Spiky { delta, big_r } => {
                (1.0 + ((1.0 + big_r).powi(2) - 1.0) * delta).sqrt()
            }
            _ => 1.0,
        }
    }

    /// Decodes one 64-bit draw into a normalized sample. Returns the sample
    /// and whether the spike selector fired (always `false` for the
    /// non-spiky laws).
    #[inline]
    pub fn decode(&self, bits: u64) -> (f64, bool) {
        match *self {
            ScalarLaw::Rademacher => (if bits & 1 == 0 { 1.0 } else { -1.0 }, false),
            ScalarLaw::Gaussian => {
                let u = rng::open_unit(bits);
                (standard_normal_quantile(u), false)
            }
            ScalarLaw::Spiky { delta, big_r } => {
                let sign = if bits & 1 == 0 { 1.0 } else { -1.0 };
                let spike = rng::open_unit(bits) < delta;
                let z = if spike { 1.0 + big_r } else { 1.0 };
                (sign * z / self.l2_scale(), spike)
            }
        }
    }

    /// The normalized support values `1/s` and `(1+R)/s` of the spiky law.
    pub fn spiky_levels(&self) -> Option<(f64, f64)> {
        match *self {
            ScalarLaw::Spiky { big_r, .. } => {
                let s = self.l2_scale();
                Some((1.0 / s, (1.0 + big_r) / s))
            }
            _ => None,
        }
    }
}

fn standard_normal_quantile(u: f64) -> f64 {
    // Normal::new(0, 1) cannot fail.
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(u)
}

/// Analytic `||z||_{L_p}` of the unnormalized variable.
///
/// * Spiky: `((1 - delta) + delta (1 + R)^p)^{1/p}`
/// * Rademacher: `1`
/// * Gaussian: `(2^{p/2} Gamma((p + 1)/2) / sqrt(pi))^{1/p}`
pub fn moment_lp_norm(law: &ScalarLaw, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return domain(format!("moment order p={p} must be finite and >= 1"));
    }
    law.validate()?;
    Ok(match *law {
        ScalarLaw::Rademacher => 1.0,
        ScalarLaw::Gaussian => {
            let ln_moment = 0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0))
                - 0.5 * std::f64::consts::PI.ln();
            (ln_moment / p).exp()
        }
        ScalarLaw::Spiky { delta, big_r } => {
            if delta == 0.0 || big_r == 0.0 {
                return Ok(1.0);
            }
            // log((1-delta) + delta (1+R)^p) without overflowing (1+R)^p.
            let a = (1.0 - delta).ln();
            let b = delta.ln() + p * big_r.ln_1p();
            let hi = a.max(b);
            let ln_moment = if delta == 1.0 {
                b
            } else {
                hi + ((a - hi).exp() + (b - hi).exp()).ln()
            };
            (ln_moment / p).exp()
        }
    })
}

/// `||z||_{L_p} / ||z||_{L_2}`, which is `||x||_{L_p}` for the normalized law.
pub fn moment_ratio(law: &ScalarLaw, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 2.0) {
        return domain(format!("moment ratio needs p >= 2, got {p}"));
    }
    if p == 2.0 {
        law.validate()?;
        return Ok(1.0);
    }
    Ok(moment_lp_norm(law, p)? / moment_lp_norm(law, 2.0)?)
}

/// Normalized marginal fourth moment `E x^4`.
pub fn normalized_fourth_moment(law: &ScalarLaw) -> Result<f64> {
    Ok(moment_ratio(law, 4.0)?.powi(4))
}

/// Exact `E <X, t>^4` for a vector `X` with iid coordinates from `law`:
/// `3 ||t||_2^4 + (m4 - 3) sum_j t_j^4`.
pub fn fourth_moment_linear_form(law: &ScalarLaw, t: &[f64]) -> Result<f64> {
    if t.is_empty() {
        return domain("empty direction vector");
    }
    if t.iter().any(|v| !v.is_finite()) {
        return domain("direction vector has non-finite entries");
    }
    let m4 = normalized_fourth_moment(law)?;
    let sq: f64 = t.iter().map(|v| v * v).sum();
    let quartic: f64 = t.iter().map(|v| v.powi(4)).sum();
    Ok(3.0 * sq * sq + (m4 - 3.0) * quartic)
}

/// Paley-Zygmund lower bound on `P(|<X, t>| >= theta ||t||_2)`:
/// `(1 - theta^2)^2 (E Z^2)^2 / E Z^4`.
pub fn small_ball_paley_zygmund(law: &ScalarLaw, t: &[f64], theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("theta={theta} must lie in (0, 1)"));
    }
    let fourth = fourth_moment_linear_form(law, t)?;
    let second: f64 = t.iter().map(|v| v * v).sum();
    if second == 0.0 {
        return domain("direction vector is zero");
    }
    let lead = (1.0 - theta * theta).powi(2);
    Ok(lead * second * second / fourth)
}

/// Monte Carlo estimate of `||x||_{L_p}` from `samples` seeded draws.
pub fn empirical_moment(law: &ScalarLaw, p: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return domain("need at least one sample");
    }
    if !(p.is_finite() && p > 0.0) {
        return domain(format!("moment order p={p} must be finite and positive"));
    }
    law.validate()?;
    let total: f64 = (0..samples as u64)
        .map(|k| law.decode(rng::mix(seed, k)).0.abs().powf(p))
        .sum();
    Ok((total / samples as f64).powf(1.0 / p))
}
