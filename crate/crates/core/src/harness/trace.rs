//! Trace records and their file formats: a CSV with one row per sampled
//! round for post-processing, a JSON run summary, and an optional JSONL
//! stream of per-round scratch values.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::engine::RoundScratch;
use crate::error::Result;

/// Per-round metrics. Consensus and feasibility residuals use the max norm.
/// The gap column reports |objective(mean state) - optimum| divided by the
/// node count, and is NaN when no oracle solution is attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: u64,
    pub zeta: f64,
    pub max_consensus: f64,
    pub max_feasibility: f64,
    pub gap: f64,
    pub per_node_consensus: Vec<f64>,
}

/// Render the fixed-schema CSV; float formatting is the shortest
/// round-trip representation, so identical runs produce identical bytes.
pub fn trace_csv_string(records: &[TraceRecord], n: usize) -> String {
    let mut out = String::new();
    out.push_str("k,zeta,max_consensus,max_feasibility,gap");
    for j in 1..=n {
        let _ = write!(out, ",per_node_consensus_{j}");
    }
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.k, r.zeta, r.max_consensus, r.max_feasibility, r.gap
        );
        for v in &r.per_node_consensus {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_trace_csv(records: &[TraceRecord], n: usize, path: &Path) -> Result<()> {
    std::fs::write(path, trace_csv_string(records, n))?;
    Ok(())
}

pub fn write_summary_json<T: Serialize>(summary: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// One JSON object per recorded round with the drawn constraint indices and
/// the intermediate points of every node.
pub fn write_scratch_jsonl(scratch: &[RoundScratch], path: &Path) -> Result<()> {
    let mut out = String::new();
    for sc in scratch {
        let nodes: Vec<serde_json::Value> = sc
            .nodes
            .iter()
            .map(|ns| {
                serde_json::json!({
                    "omega": ns.omega,
                    "post_mix": ns.post_mix.to_vec(),
                    "post_random": ns.post_random.to_vec(),
                })
            })
            .collect();
        let line = serde_json::json!({ "k": sc.k, "nodes": nodes });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_is_fixed() {
        let records = vec![TraceRecord {
            k: 0,
            zeta: 1.0,
            max_consensus: 0.5,
            max_feasibility: 0.0,
            gap: f64::NAN,
            per_node_consensus: vec![0.5, 0.25],
        }];
        let text = trace_csv_string(&records, 2);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,zeta,max_consensus,max_feasibility,gap,per_node_consensus_1,per_node_consensus_2"
        );
        assert_eq!(lines.next().unwrap(), "0,1,0.5,0,NaN,0.5,0.25");
    }
}
