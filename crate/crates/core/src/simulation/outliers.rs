use rand::seq::index;

use super::DistributionSpec;
use crate::error::{Error, Result};
use crate::metrics::SampleSet;

/// Replaces `round(fraction · n)` positions, chosen uniformly without
/// replacement, with draws from `outlier`.
pub fn inject_outliers(
    samples: &SampleSet,
    fraction: f64,
    outlier: &DistributionSpec,
    seed: u64,
) -> Result<SampleSet> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "outlier fraction must be in [0, 1], got {fraction}"
        )));
    }
    let n = samples.len();
    let count = (fraction * n as f64).round() as usize;
    if count == 0 {
        return Ok(samples.clone());
    }
    let mut rng = crate::rng::stream(seed, &[]);
    let mut positions = index::sample(&mut rng, n, count).into_vec();
    positions.sort_unstable();
    let mut values = samples.values().to_vec();
    for p in positions {
        values[p] = outlier.sample(&mut rng);
    }
    SampleSet::new(samples.label(), values)
}
