use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gripper::GraspCandidate;
use super::occlusion::{occlusion_fraction, OcclusionContext};
use crate::contacts::ContactCluster;
use crate::error::{Error, Result};
use crate::geometry::{pose_from_rows, pose_to_rows};

pub const DEFAULT_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedGrasp {
    pub candidate: GraspCandidate,
    pub occlusion: f64,
    pub score: f64,
}

/// Contact score: confidence reward minus occlusion penalty, weighted by `lambda`.
pub fn contact_score(confidence: f64, occlusion: f64, lambda: f64) -> f64 {
    lambda * confidence - (1.0 - lambda) * occlusion
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::param("lambda", "must be in [0, 1]"))
    }
}

/// Scores candidates against precomputed occlusion fractions and sorts them
/// best first: higher score, then higher confidence, then lower occlusion,
/// then input position.
pub fn rank_with_occlusion(
    candidates: Vec<GraspCandidate>,
    occlusions: &[f64],
    lambda: f64,
) -> Result<Vec<RankedGrasp>> {
    check_lambda(lambda)?;
    if candidates.is_empty() {
        return Err(Error::NoGraspCandidates);
    }
    if occlusions.len() != candidates.len() {
        return Err(Error::param(
            "occlusions",
            "must have one entry per candidate",
        ));
    }
    let mut ranked: Vec<(usize, RankedGrasp)> = candidates
        .into_iter()
        .zip(occlusions)
        .enumerate()
        .map(|(i, (candidate, &occlusion))| {
            let score = contact_score(candidate.confidence, occlusion, lambda);
            (
                i,
                RankedGrasp {
                    candidate,
                    occlusion,
                    score,
                },
            )
        })
        .collect();
    ranked.sort_by(|(ia, a), (ib, b)| {
        b.score
            .total_cmp(&a.score)
            .then(b.candidate.confidence.total_cmp(&a.candidate.confidence))
            .then(a.occlusion.total_cmp(&b.occlusion))
            .then(ia.cmp(ib))
    });
    Ok(ranked.into_iter().map(|(_, r)| r).collect())
}

/// Occlusion-aware ranking against the predicted contact cluster.
pub fn rank_grasps(
    candidates: Vec<GraspCandidate>,
    cluster: &ContactCluster,
    lambda: f64,
    ctx: &OcclusionContext,
) -> Result<Vec<RankedGrasp>> {
    check_lambda(lambda)?;
    if candidates.is_empty() {
        return Err(Error::NoGraspCandidates);
    }
    let occlusions: Vec<f64> = candidates
        .par_iter()
        .map(|g| occlusion_fraction(g, cluster, ctx))
        .collect();
    rank_with_occlusion(candidates, &occlusions, lambda)
}

/// Flat export record for a ranked grasp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspRecord {
    pub pose: [[f64; 4]; 4],
    pub width: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "O")]
    pub o: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl From<&RankedGrasp> for GraspRecord {
    fn from(r: &RankedGrasp) -> Self {
        GraspRecord {
            pose: pose_to_rows(&r.candidate.pose),
            width: r.candidate.width,
            s: r.candidate.confidence,
            o: r.occlusion,
            c: r.score,
        }
    }
}

impl GraspRecord {
    pub fn pose(&self) -> crate::geometry::Pose {
        pose_from_rows(&self.pose)
    }
}

/// Ranked grasps as a pretty-printed JSON array of [`GraspRecord`]s.
pub fn grasps_to_json(ranked: &[RankedGrasp]) -> Result<String> {
    let records: Vec<GraspRecord> = ranked.iter().map(GraspRecord::from).collect();
    Ok(serde_json::to_string_pretty(&records)?)
}
