use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, SampleSet};
use crate::overlap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleEstimate {
    pub mean_gssmd: f64,
    pub mean_ssmd: f64,
    pub repeats: usize,
    pub subsample_size: usize,
}

fn subsample<R: rand::Rng + ?Sized>(rng: &mut R, set: &SampleSet, size: usize) -> Result<SampleSet> {
    let mut idx = index::sample(rng, set.len(), size).into_vec();
    idx.sort_unstable();
    SampleSet::new(set.label(), idx.into_iter().map(|i| set.values()[i]).collect())
}

/// Averages GSSMD and SSMD over `repeats` independent subsamples of
/// `subsample_size` drawn without replacement from each group.
pub fn run_subsampled_estimate(
    neg: &SampleSet,
    pos: &SampleSet,
    subsample_size: usize,
    repeats: usize,
    seed: u64,
    bins: Option<usize>,
) -> Result<SubsampleEstimate> {
    let available = neg.len().min(pos.len());
    if subsample_size == 0 || subsample_size > available {
        return Err(Error::InvalidSubsampleSize {
            size: subsample_size,
            available,
        });
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let (mut sum_gssmd, mut sum_ssmd) = (0.0, 0.0);
    for r in 0..repeats as u64 {
        let mut rng = crate::rng::stream(seed, &[r]);
        let sub_neg = subsample(&mut rng, neg, subsample_size)?;
        let sub_pos = subsample(&mut rng, pos, subsample_size)?;
        sum_gssmd += overlap::gssmd(&sub_neg, &sub_pos, bins)?.gssmd;
        sum_ssmd += metrics::ssmd(&sub_pos.summarize(), &sub_neg.summarize())?;
    }
    Ok(SubsampleEstimate {
        mean_gssmd: sum_gssmd / repeats as f64,
        mean_ssmd: sum_ssmd / repeats as f64,
        repeats,
        subsample_size,
    })
}
