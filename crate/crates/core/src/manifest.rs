//! Run manifests: key-value records that make every output reproducible.
//!
//! Re-running a command with a manifest's seed and model specification
//! reproduces its outputs bit-identically on the same platform. All reals
//! are printed with 17 significant digits.

use crate::models::alpha::DilutenessReport;
use crate::sampler::SampleStats;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn format_real(x: f64) -> String {
    format!("{:.16e}", x)
}

/// SHA-256 of the canonical model description.
pub fn model_hash(description: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(description.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub model_description: String,
    pub alpha: Option<DilutenessReport>,
    pub replicas: u64,
    pub eps_grid: Vec<f64>,
    pub clan_sizes: Vec<usize>,
    pub clan_depths: Vec<usize>,
    pub l_max: Option<u32>,
    pub cell_edge: Option<f64>,
    pub cap: Option<usize>,
    pub wall_clock_ms: u128,
    pub extra: Vec<(String, String)>,
}

impl RunManifest {
    pub fn record_stats(&mut self, stats: &SampleStats) {
        self.clan_sizes.push(stats.clan_size);
        self.clan_depths.push(stats.clan_depth);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("tool_version", TOOL_VERSION.to_string());
        put("command", self.command.clone());
        put("seed", self.seed.to_string());
        put("model_hash", model_hash(&self.model_description));
        put("model", self.model_description.clone());
        if let Some(report) = &self.alpha {
            put("alpha", format_real(report.alpha));
            put("alpha_verdict", format!("{:?}", report.verdict));
            put("alpha_envelope_used", report.envelope_used.to_string());
            if let Some(t) = &report.truncation {
                put("alpha_l_max", t.l_max.to_string());
                if let Some(tail) = t.tail_estimate {
                    put("alpha_tail_estimate", format_real(tail));
                }
            }
        }
        put("replicas", self.replicas.to_string());
        if !self.eps_grid.is_empty() {
            put(
                "eps_grid",
                self.eps_grid
                    .iter()
                    .map(|&e| format_real(e))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if !self.clan_sizes.is_empty() {
            let n = self.clan_sizes.len() as f64;
            let mean = self.clan_sizes.iter().sum::<usize>() as f64 / n;
            let max = self.clan_sizes.iter().max().copied().unwrap_or(0);
            put("clan_size_mean", format_real(mean));
            put("clan_size_max", max.to_string());
            let dmean = self.clan_depths.iter().sum::<usize>() as f64 / n;
            let dmax = self.clan_depths.iter().max().copied().unwrap_or(0);
            put("clan_depth_mean", format_real(dmean));
            put("clan_depth_max", dmax.to_string());
            put("clan_size_histogram", histogram(&self.clan_sizes));
        }
        if let Some(l) = self.l_max {
            put("l_max", l.to_string());
        }
        if let Some(a) = self.cell_edge {
            put("cell_edge", format_real(a));
        }
        if let Some(c) = self.cap {
            put("clan_cap", c.to_string());
        }
        put("wall_clock_ms", self.wall_clock_ms.to_string());
        for (k, v) in &self.extra {
            put(k, v.clone());
        }
        out
    }
}

fn histogram(values: &[usize]) -> String {
    let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(v, c)| format!("{v}:{c}"))
        .collect::<Vec<_>>()
        .join(",")
}
