use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::metrics::SampleSet;

/// Mean of squares.
pub fn signal_power(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// Noise variance giving `snr_db = 10·log10(P_signal / P_noise)` for the
/// measured power of `signal`.
pub fn awgn_noise_variance(signal: &SampleSet, snr_db: f64) -> Result<f64> {
    let power = signal_power(signal.values());
    if power == 0.0 {
        return Err(Error::ZeroPowerSignal);
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!("snr_db must be finite, got {snr_db}")));
    }
    Ok(power / 10f64.powf(snr_db / 10.0))
}

/// Adds white Gaussian noise at `snr_db` relative to the measured signal
/// power.
pub fn add_awgn(signal: &SampleSet, snr_db: f64, seed: u64) -> Result<SampleSet> {
    let variance = awgn_noise_variance(signal, snr_db)?;
    let noise = Normal::new(0.0, variance.sqrt())
        .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
    let mut rng = crate::rng::stream(seed, &[]);
    let noisy = signal
        .values()
        .iter()
        .map(|&x| x + noise.sample(&mut rng))
        .collect();
    SampleSet::new(signal.label(), noisy)
}
