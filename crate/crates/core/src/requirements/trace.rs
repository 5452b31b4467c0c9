use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;
use petgraph::Direction as Dir;
use thiserror::Error;

use super::types::{ArtifactRef, LinkType, TraceLink};
use crate::project::Project;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From the entry level down to the artifact.
    Upstream,
    /// From the artifact down to the lowest level.
    Downstream,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("`{0}` is not a requirement, element or top event of this project")]
    Unresolved(String),
    #[error("trace links form a cycle: {}", .0.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" -> "))]
    Cycle(Vec<ArtifactRef>),
}

/// Orient a link from the upstream artifact to the downstream one. Links
/// that do not carry the chain (validation, justification) give `None`.
pub fn chain_edge(l: &TraceLink) -> Option<(&ArtifactRef, &ArtifactRef)> {
    match l.link_type {
        LinkType::Refines | LinkType::DerivesFrom => Some((&l.target, &l.source)),
        LinkType::SatisfiedBy | LinkType::AllocatedTo => Some((&l.source, &l.target)),
        LinkType::ValidatedBy | LinkType::JustifiedBy => None,
    }
}

/// Directed graph of chain-carrying links, upstream to downstream.
pub struct TraceGraph {
    graph: DiGraph<ArtifactRef, LinkType>,
    index: HashMap<ArtifactRef, NodeIndex>,
}

impl TraceGraph {
    pub fn build(project: &Project) -> Self {
        let mut g = Self {
            graph: DiGraph::new(),
            index: HashMap::new(),
        };
        for l in &project.links {
            if let Some((up, down)) = chain_edge(l) {
                let a = g.node(up);
                let b = g.node(down);
                g.graph.add_edge(a, b, l.link_type);
            }
        }
        g
    }

    fn node(&mut self, a: &ArtifactRef) -> NodeIndex {
        if let Some(&i) = self.index.get(a) {
            return i;
        }
        let i = self.graph.add_node(a.clone());
        self.index.insert(a.clone(), i);
        i
    }

    /// Neighbours in link declaration order.
    fn next(&self, n: NodeIndex, d: Dir) -> Vec<NodeIndex> {
        let mut v: Vec<_> = self.graph.edges_directed(n, d).map(|e| (e.id(), if d == Dir::Outgoing { e.target() } else { e.source() })).collect();
        v.sort_by_key(|(e, _)| *e);
        let mut out: Vec<NodeIndex> = Vec::new();
        for (_, n) in v {
            if !out.contains(&n) {
                out.push(n);
            }
        }
        out
    }

    pub fn upstream(&self, a: &ArtifactRef) -> Vec<&ArtifactRef> {
        self.index.get(a).map_or(Vec::new(), |&n| self.next(n, Dir::Incoming).into_iter().map(|i| &self.graph[i]).collect())
    }

    pub fn downstream(&self, a: &ArtifactRef) -> Vec<&ArtifactRef> {
        self.index.get(a).map_or(Vec::new(), |&n| self.next(n, Dir::Outgoing).into_iter().map(|i| &self.graph[i]).collect())
    }

    /// Every cycle as its strongly connected component, members sorted.
    pub fn cycles(&self) -> Vec<Vec<ArtifactRef>> {
        let mut out: Vec<Vec<ArtifactRef>> = tarjan_scc(&self.graph)
            .into_iter()
            .filter(|scc| scc.len() > 1 || self.graph.contains_edge(scc[0], scc[0]))
            .map(|scc| {
                let mut v: Vec<ArtifactRef> = scc.into_iter().map(|i| self.graph[i].clone()).collect();
                v.sort();
                v
            })
            .collect();
        out.sort();
        out
    }

    fn chains(&self, start: NodeIndex, d: Dir) -> Result<Vec<Vec<ArtifactRef>>, TraceError> {
        let mut out = Vec::new();
        let mut path = vec![start];
        self.walk(&mut path, d, &mut out)?;
        Ok(out
            .into_iter()
            .map(|p| {
                let mut v: Vec<ArtifactRef> = p.into_iter().map(|i| self.graph[i].clone()).collect();
                if d == Dir::Incoming {
                    v.reverse();
                }
                v
            })
            .collect())
    }

    fn walk(&self, path: &mut Vec<NodeIndex>, d: Dir, out: &mut Vec<Vec<NodeIndex>>) -> Result<(), TraceError> {
        let here = *path.last().unwrap();
        let next = self.next(here, d);
        if next.is_empty() {
            out.push(path.clone());
            return Ok(());
        }
        for n in next {
            if let Some(at) = path.iter().position(|&p| p == n) {
                let mut cyc: Vec<ArtifactRef> = path[at..].iter().map(|&i| self.graph[i].clone()).collect();
                cyc.push(self.graph[n].clone());
                if d == Dir::Incoming {
                    cyc.reverse();
                }
                return Err(TraceError::Cycle(cyc));
            }
            path.push(n);
            self.walk(path, d, out)?;
            path.pop();
        }
        Ok(())
    }
}

fn exists(project: &Project, a: &ArtifactRef) -> bool {
    match a {
        ArtifactRef::Requirement { id } => project.requirement(id).is_some(),
        ArtifactRef::Element { path } => project.element(path).is_some(),
        ArtifactRef::TopEvent { name } => project.top_event_names().contains(&name.as_str()),
    }
}

/// All chains through `artifact` in one direction. Upstream chains start at
/// an artifact with nothing above it and end at `artifact`; downstream
/// chains start at `artifact`.
pub fn trace_chain(project: &Project, artifact: &ArtifactRef, direction: Direction) -> Result<Vec<Vec<ArtifactRef>>, TraceError> {
    if !exists(project, artifact) {
        return Err(TraceError::Unresolved(artifact.to_string()));
    }
    let g = TraceGraph::build(project);
    let Some(&start) = g.index.get(artifact) else {
        return Ok(vec![vec![artifact.clone()]]);
    };
    let d = match direction {
        Direction::Upstream => Dir::Incoming,
        Direction::Downstream => Dir::Outgoing,
    };
    g.chains(start, d)
}
