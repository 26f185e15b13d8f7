use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::usage::ApiUsageRecord;
use crate::callgraph::CallGraph;
use crate::dex::MethodRef;
use crate::mapping::ApiPattern;

/// Flow findings come from method-level reachability, so they only ever
/// claim that a path is plausible.
pub const PLAUSIBLE_PATH: &str = "plausible_path";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowFinding {
    pub id: String,
    pub permission: String,
    pub source_pattern: ApiPattern,
    pub sink_pattern: ApiPattern,
    pub source_method: MethodRef,
    pub sink_method: MethodRef,
    /// Call edges from source method to sink method; 0 when they coincide.
    pub path_length: usize,
    pub launcher_reachable: bool,
    pub label: String,
}

/// A finding for every (source call site, sink call site) pair where the
/// sink's method is reachable from the source's method.
pub fn find_flows(graph: &CallGraph, usage: &[ApiUsageRecord], sinks: &[ApiPattern]) -> Vec<FlowFinding> {
    let mut sink_sites: BTreeSet<(usize, &ApiPattern)> = BTreeSet::new();
    for (node, m) in graph.nodes().iter().enumerate() {
        for pattern in sinks.iter().filter(|p| p.matches_method(m)) {
            for &caller in graph.predecessors(node) {
                sink_sites.insert((caller, pattern));
            }
        }
    }
    if sink_sites.is_empty() {
        return Vec::new();
    }
    let from_launcher = graph.launcher_reachable();

    let mut found = BTreeSet::new();
    for record in usage {
        for site in &record.call_sites {
            let Some(src) = graph.node_id(site) else { continue };
            let dist = graph.distances_from(src);
            for &(sink, pattern) in &sink_sites {
                if let Some(d) = dist[sink] {
                    found.insert((
                        record.permission.clone(),
                        record.pattern.clone(),
                        site.clone(),
                        pattern.clone(),
                        graph.node(sink).clone(),
                        d,
                        from_launcher[src],
                    ));
                }
            }
        }
    }
    found
        .into_iter()
        .enumerate()
        .map(|(i, (permission, source_pattern, source_method, sink_pattern, sink_method, path_length, launcher_reachable))| {
            FlowFinding {
                id: alloc::format!("flow-{:03}", i + 1),
                permission,
                source_pattern,
                sink_pattern,
                source_method,
                sink_method,
                path_length,
                launcher_reachable,
                label: PLAUSIBLE_PATH.into(),
            }
        })
        .collect()
}
