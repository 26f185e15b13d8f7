//! Method-level call graph over app code, with lifecycle entry points.
//!
//! Calls are resolved by their declared target only, without class-hierarchy
//! analysis. Platform and library callees appear as leaves.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dex::{Invocation, MethodRef};
use crate::manifest::ManifestModel;

pub const LIFECYCLE_METHODS: [&str; 3] = ["onCreate", "onStart", "onResume"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EntryPoint {
    pub node: usize,
    pub launcher: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    nodes: Vec<MethodRef>,
    index: BTreeMap<MethodRef, usize>,
    defined: Vec<bool>,
    succ: Vec<BTreeSet<usize>>,
    pred: Vec<BTreeSet<usize>>,
    entry_points: BTreeSet<EntryPoint>,
}

/// `com.example.Main` → `Lcom/example/Main;`
pub fn class_descriptor(java_name: &str) -> String {
    let mut s = String::with_capacity(java_name.len() + 2);
    s.push('L');
    s.extend(java_name.chars().map(|c| if c == '.' { '/' } else { c }));
    s.push(';');
    s
}

impl CallGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, m: &MethodRef) -> usize {
        if let Some(i) = self.index.get(m) {
            return *i;
        }
        let i = self.nodes.len();
        self.nodes.push(m.clone());
        self.index.insert(m.clone(), i);
        self.defined.push(false);
        self.succ.push(BTreeSet::new());
        self.pred.push(BTreeSet::new());
        i
    }

    pub fn add_defined(&mut self, m: &MethodRef) -> usize {
        let i = self.add_node(m);
        self.defined[i] = true;
        i
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.succ[from].insert(to);
        self.pred[to].insert(from);
    }

    pub fn add_entry_point(&mut self, node: usize, launcher: bool) {
        self.entry_points.insert(EntryPoint { node, launcher });
    }

    pub fn node(&self, i: usize) -> &MethodRef {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[MethodRef] {
        &self.nodes
    }

    pub fn node_id(&self, m: &MethodRef) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.defined[i]
    }

    pub fn successors(&self, i: usize) -> &BTreeSet<usize> {
        &self.succ[i]
    }

    pub fn predecessors(&self, i: usize) -> &BTreeSet<usize> {
        &self.pred[i]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(a, s)| s.iter().map(move |b| (a, *b)))
    }

    pub fn entry_points(&self) -> &BTreeSet<EntryPoint> {
        &self.entry_points
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Edge counts of shortest paths from `from`; `None` when unreachable.
    pub fn distances_from(&self, from: usize) -> Vec<Option<usize>> {
        self.bfs(core::iter::once(from))
    }

    fn bfs(&self, starts: impl Iterator<Item = usize>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        for s in starts {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(n) = queue.pop_front() {
            let d = dist[n].unwrap_or(0) + 1;
            for &m in &self.succ[n] {
                if dist[m].is_none() {
                    dist[m] = Some(d);
                    queue.push_back(m);
                }
            }
        }
        dist
    }

    /// Nodes reachable from any launcher entry point.
    pub fn launcher_reachable(&self) -> Vec<bool> {
        self.bfs(self.entry_points.iter().filter(|e| e.launcher).map(|e| e.node))
            .into_iter()
            .map(|d| d.is_some())
            .collect()
    }
}

/// Graph over app-defined methods and the externals they call. Entry points
/// are the lifecycle methods of manifest activity classes; those of launcher
/// activities (after alias resolution) are flagged.
pub fn build_call_graph(defined: &[MethodRef], invocations: &[Invocation], manifest: &ManifestModel) -> CallGraph {
    let mut g = CallGraph::new();
    for m in defined {
        g.add_defined(m);
    }
    for inv in invocations {
        let a = g.add_node(&inv.caller);
        let b = g.add_node(&inv.callee);
        g.add_edge(a, b);
    }
    let activities: BTreeSet<String> = manifest.activity_classes().iter().map(|a| class_descriptor(a)).collect();
    let launchers: BTreeSet<String> = manifest.launcher_classes().iter().map(|a| class_descriptor(a)).collect();
    for m in defined {
        if LIFECYCLE_METHODS.contains(&m.name.as_str()) && activities.contains(&m.class_descriptor) {
            let node = g.add_defined(m);
            g.add_entry_point(node, launchers.contains(&m.class_descriptor));
        }
    }
    g
}
