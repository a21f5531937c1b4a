use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::geometry::{ransac_estimate, RansacConfig};
use crate::manifest::ViewSet;
use crate::oracles::{CheckedMatcher, ViewRef};
use crate::seeds::derive;
use crate::{Homography, RansacResult};

/// Adjacent pairs oriented outward from the source: the forward chain
/// `source -> end` first, then the backward chain `source -> 0`.
pub fn plan_pairs(vs: &ViewSet) -> Vec<(usize, usize)> {
    plan_pairs_for(vs.len(), vs.source_index())
}

pub(crate) fn plan_pairs_for(n_views: usize, source: usize) -> Vec<(usize, usize)> {
    let forward = (source..n_views.saturating_sub(1)).map(|i| (i, i + 1));
    let backward = (1..=source).rev().map(|i| (i, i - 1));
    forward.chain(backward).collect()
}

/// View indices along each chain, both starting at the source.
pub(crate) fn chains(n_views: usize, source: usize) -> [Vec<usize>; 2] {
    [(source..n_views).collect(), (0..=source).rev().collect()]
}

/// Matching and robust fit for one adjacent pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub from: usize,
    pub to: usize,
    pub similarity: f64,
    pub correspondences: usize,
    pub ransac: Option<RansacResult>,
    pub reliable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PairEstimate {
    /// Mapping used to carry masks and content across the pair: the fitted
    /// homography when the pair is reliable, identity otherwise.
    pub fn hop(&self) -> Homography {
        match (&self.ransac, self.reliable) {
            (Some(r), true) => r.homography,
            _ => Homography::identity(),
        }
    }
}

fn estimate_pair(vs: &ViewSet, (i, j): (usize, usize), matcher: &CheckedMatcher, cfg: &PipelineConfig) -> PairEstimate {
    let mut out = PairEstimate {
        from: i,
        to: j,
        similarity: 0.0,
        correspondences: 0,
        ransac: None,
        reliable: false,
        error: None,
    };
    let m = match matcher.match_views(
        ViewRef {
            index: i,
            image: vs.view(i),
        },
        ViewRef {
            index: j,
            image: vs.view(j),
        },
    ) {
        Ok(m) => m,
        Err(e) => {
            out.error = Some(format!("matcher: {e}"));
            return out;
        }
    };
    out.similarity = m.similarity;
    out.correspondences = m.correspondences.len();
    let ransac = RansacConfig {
        rng_seed: derive(cfg.ransac.rng_seed, &[i as u64, j as u64]),
        ..cfg.ransac.clone()
    };
    match ransac_estimate(&m.correspondences, &ransac) {
        Ok(r) => out.ransac = Some(r),
        Err(e) => {
            out.error = Some(format!("ransac: {e}"));
            return out;
        }
    }
    if m.similarity < cfg.min_pair_similarity {
        out.error = Some(format!(
            "similarity {:.4} below {:.4}",
            m.similarity, cfg.min_pair_similarity
        ));
        return out;
    }
    out.reliable = true;
    out
}

/// Matches and fits every planned pair in parallel, in `plan_pairs` order.
/// Unreliable pairs are reported, not fatal, unless every pair leaving the
/// source is unreliable.
pub fn estimate_all(vs: &ViewSet, matcher: &CheckedMatcher, cfg: &PipelineConfig) -> Result<Vec<PairEstimate>, PipelineError> {
    let pairs = plan_pairs(vs);
    let out: Vec<PairEstimate> = pairs.par_iter().map(|&p| estimate_pair(vs, p, matcher, cfg)).collect();
    let s = vs.source_index();
    let from_source: Vec<&PairEstimate> = out.iter().filter(|p| p.from == s).collect();
    if from_source.iter().all(|p| !p.reliable) {
        let reasons = from_source
            .iter()
            .map(|p| format!("({}, {}): {}", p.from, p.to, p.error.as_deref().unwrap_or("unreliable")))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(PipelineError::SourceIsolated { view: s, reasons });
    }
    Ok(out)
}

/// Lookup of pair estimates by `(from, to)`.
pub(crate) fn index_pairs(pairs: &[PairEstimate]) -> HashMap<(usize, usize), &PairEstimate> {
    pairs.iter().map(|p| ((p.from, p.to), p)).collect()
}

/// For each view, whether an unreliable pair lies between it and the source.
pub(crate) fn chain_degraded(pairs: &[PairEstimate], n_views: usize, source: usize) -> Vec<bool> {
    let by = index_pairs(pairs);
    let mut out = vec![false; n_views];
    for chain in chains(n_views, source) {
        let mut bad = false;
        for w in chain.windows(2) {
            bad |= by.get(&(w[0], w[1])).is_none_or(|p| !p.reliable);
            out[w[1]] = bad;
        }
    }
    out
}

/// Composite source-to-view homographies, folded along each chain from the
/// hops actually used.
pub fn composite_homographies(pairs: &[PairEstimate], n_views: usize, source: usize) -> Result<Vec<Homography>, PipelineError> {
    let by = index_pairs(pairs);
    let mut out = vec![Homography::identity(); n_views];
    for chain in chains(n_views, source) {
        let mut acc = Homography::identity();
        for w in chain.windows(2) {
            let hop = by
                .get(&(w[0], w[1]))
                .map(|p| p.hop())
                .ok_or(PipelineError::MissingPair { from: w[0], to: w[1] })?;
            acc = acc.then(&hop)?;
            out[w[1]] = acc;
        }
    }
    Ok(out)
}
