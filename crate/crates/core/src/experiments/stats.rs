/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Clamp so the interval always brackets the point estimate.
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckStats {
    pub successes: usize,
    pub trials: usize,
    pub frequency: f64,
    pub wilson_95_interval: (f64, f64),
}

impl CheckStats {
    pub fn from_counts(successes: usize, trials: usize) -> Self {
        let frequency = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        CheckStats {
            successes,
            trials,
            frequency,
            wilson_95_interval: wilson_interval(successes, trials),
        }
    }

    pub fn from_indicators<I: IntoIterator<Item = bool>>(it: I) -> Self {
        let (s, t) = it
            .into_iter()
            .fold((0, 0), |(s, t), ok| (s + usize::from(ok), t + 1));
        Self::from_counts(s, t)
    }
}
