use crate::error::{domain, Result};

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return domain(format!("delta={delta} outside [0, 1]"));
    }
    Ok(())
}

/// `(1 - delta)^e` for an integer exponent, stable for tiny `delta`.
fn pow_complement(delta: f64, e: u64) -> f64 {
    if e == 0 {
        1.0
    } else if delta == 1.0 {
        0.0
    } else {
        (e as f64 * (-delta).ln_1p()).exp()
    }
}

/// Probability that a single column of the spike pattern has exactly one
/// spike and it sits at a given row: `(1 - delta)^{N-1} delta`.
pub fn single_spike_probability(n_rows: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if n_rows == 0 {
        return domain("N must be >= 1");
    }
    Ok(pow_complement(delta, n_rows as u64 - 1) * delta)
}

/// Probability that, for a fixed row `i`, some column among `n - 1` others
/// has its only spike at row `i`:
/// `1 - (1 - (1 - delta)^{N-1} delta)^{n-1}`.
pub fn spike_event_probability(n_rows: usize, n_cols: usize, delta: f64) -> Result<f64> {
    if n_cols == 0 {
        return domain("n must be >= 1");
    }
    let pi = single_spike_probability(n_rows, delta)?;
    let others = n_cols as u64 - 1;
    if others == 0 || pi == 0.0 {
        return Ok(0.0);
    }
    if pi == 1.0 {
        return Ok(1.0);
    }
    Ok(-(others as f64 * (-pi).ln_1p()).exp_m1())
}

/// Product-form prediction that the spike event occurs at every row:
/// `spike_event_probability^N`.
pub fn all_rows_spike_probability_product(n_rows: usize, n_cols: usize, delta: f64) -> Result<f64> {
    Ok(spike_event_probability(n_rows, n_cols, delta)?.powi(n_rows as i32))
}

/// Exact probability that every row has a single-spike column among the
/// `n - 1` others, by inclusion-exclusion over the rows that are missed.
pub fn all_rows_spike_probability_exact(n_rows: usize, n_cols: usize, delta: f64) -> Result<f64> {
    if n_cols == 0 {
        return domain("n must be >= 1");
    }
    let pi = single_spike_probability(n_rows, delta)?;
    let others = (n_cols - 1) as f64;
    let mut total = 0.0;
    let mut binom = 1.0;
    for k in 0..=n_rows {
        let miss = 1.0 - k as f64 * pi;
        let term = if miss <= 0.0 {
            if others == 0.0 { 1.0 } else { 0.0 }
        } else {
            (others * miss.ln()).exp()
        };
        total += if k % 2 == 0 { binom * term } else { -binom * term };
        binom = binom * (n_rows - k) as f64 / (k + 1) as f64;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Probability that a column has no spike: `(1 - delta)^N`.
pub fn clean_column_probability(n_rows: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(pow_complement(delta, n_rows as u64))
}
