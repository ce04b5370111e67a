//! Result types shared by the descriptor selectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcuve::McuveConfig;
use crate::strs::StrsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Strs,
    Mcuve,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Strs => "strs",
            Method::Mcuve => "mcuve",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodConfig {
    Strs(StrsConfig),
    Mcuve(McuveConfig),
}

/// One candidate subset: an STRS sampling run, or one MC-UVE cut size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// 1-based run (STRS) or cut position (MC-UVE).
    pub run_index: usize,
    pub retention_ratio: f64,
    pub enforced_count: usize,
    pub selected_indices: Vec<usize>,
    /// Full-length PLS coefficients (scaled units) of the subset model fitted
    /// on the whole training set; exactly zero off the subset.
    pub coefficient_vector: Vec<f64>,
    /// `+∞` for failed runs; serialised as `null`.
    #[serde(with = "finite_or_null")]
    pub rmsecv: f64,
    pub degenerate_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub seed: u64,
    pub config: MethodConfig,
    pub best_subset: Vec<usize>,
    pub best_rmsecv: f64,
    pub best_run_index: usize,
    pub traces: Vec<RunTrace>,
}

impl SelectionResult {
    /// Assembles a result, choosing the trace with the smallest finite
    /// RMSECV (earliest on ties).
    pub fn from_traces(
        method: Method,
        seed: u64,
        config: MethodConfig,
        traces: Vec<RunTrace>,
    ) -> Result<Self> {
        let best = traces
            .iter()
            .filter(|t| t.rmsecv.is_finite())
            .min_by(|a, b| {
                a.rmsecv
                    .total_cmp(&b.rmsecv)
                    .then(a.run_index.cmp(&b.run_index))
            })
            .ok_or(Error::NoValidRun)?;
        Ok(Self {
            method,
            seed,
            config,
            best_subset: best.selected_indices.clone(),
            best_rmsecv: best.rmsecv,
            best_run_index: best.run_index,
            traces,
        })
    }

    pub fn best_trace(&self) -> &RunTrace {
        self.traces
            .iter()
            .find(|t| t.run_index == self.best_run_index)
            .expect("best run is among the traces")
    }
}

/// Descriptor indices ordered by weight (descending), lower index first on
/// ties.
pub fn rank_by_weight(indices: impl IntoIterator<Item = usize>, weights: &[f64]) -> Vec<usize> {
    let mut v: Vec<usize> = indices.into_iter().collect();
    v.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    v
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_breaks_ties_by_index() {
        let w = [0.25, 0.25, 0.1, 0.4];
        assert_eq!(rank_by_weight(0..4, &w), [3, 0, 1, 2]);
    }
}
