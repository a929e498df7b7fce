//! Projection of a pattern graph into a target graph.
//!
//! A projection maps every pattern node to a target node whose type is
//! subsumed by the pattern type (and which carries the same marker when the
//! pattern node has one), and every pattern edge to a target edge whose
//! relation is subsumed by the pattern relation and whose endpoints are the
//! images of the pattern edge's endpoints. Node maps need not be injective.
//!
//! The search backtracks over pattern nodes ordered by descending degree.
//! Candidates are pruned per node by type and marker, and an edge is checked
//! as soon as both of its endpoints are assigned. Parallel target edges give
//! distinct morphisms, so the result is the full set of (node map, edge map)
//! pairs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CgError;
use crate::graph::{validate_graph, ConceptNode, ConceptualGraph, Referent};
use crate::ontology::Ontology;

/// Pattern id → target id, for nodes and edges. The derived order compares
/// images in pattern-id order, which is the documented result order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Morphism {
    pub node_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, String>,
}

/// All projections of `pattern` into `target`, sorted and duplicate-free.
pub fn project(ont: &Ontology, pattern: &ConceptualGraph, target: &ConceptualGraph) -> Result<Vec<Morphism>, CgError> {
    for g in [pattern, target] {
        let report = validate_graph(ont, g);
        if !report.is_empty() {
            return Err(CgError::InvalidGraph(report));
        }
    }
    Ok(project_unchecked(ont, pattern, target))
}

/// `true` iff at least one projection exists. Stops at the first one found.
pub fn projects(ont: &Ontology, pattern: &ConceptualGraph, target: &ConceptualGraph) -> Result<bool, CgError> {
    for g in [pattern, target] {
        let report = validate_graph(ont, g);
        if !report.is_empty() {
            return Err(CgError::InvalidGraph(report));
        }
    }
    let mut found = false;
    Matcher::new(ont, pattern, target, false).run(&mut |_| {
        found = true;
        false
    });
    Ok(found)
}

pub(crate) fn node_compatible(ont: &Ontology, p: &ConceptNode, t: &ConceptNode) -> bool {
    if let Referent::Marker(m) = &p.referent {
        if t.referent.marker() != Some(m.as_str()) {
            return false;
        }
    }
    ont.is_subtype(&p.type_id, &t.type_id)
}

/// Projection without validating the inputs first. Dangling pattern edges
/// make the result empty.
pub(crate) fn project_unchecked(ont: &Ontology, pattern: &ConceptualGraph, target: &ConceptualGraph) -> Vec<Morphism> {
    let mut out = Vec::new();
    Matcher::new(ont, pattern, target, false).run(&mut |m| {
        out.push(m);
        true
    });
    out.sort();
    out.dedup();
    out
}

/// Injective projections only (distinct pattern nodes map to distinct
/// target nodes). Used by contraction.
pub(crate) fn project_injective(ont: &Ontology, pattern: &ConceptualGraph, target: &ConceptualGraph) -> Vec<Morphism> {
    let mut out = Vec::new();
    Matcher::new(ont, pattern, target, true).run(&mut |m| {
        out.push(m);
        true
    });
    out.sort();
    out.dedup();
    out
}

struct PatternEdge<'a> {
    id: &'a str,
    src: usize,
    tgt: usize,
    // (target source, target target, target edge id)
    images: Vec<(usize, usize, &'a str)>,
}

struct Matcher<'a> {
    p_nodes: Vec<&'a ConceptNode>,
    t_nodes: Vec<&'a ConceptNode>,
    candidates: Vec<Vec<usize>>,
    edges: Vec<PatternEdge<'a>>,
    order: Vec<usize>,
    // edges whose later endpoint (in `order`) is at this position
    check_at: Vec<Vec<usize>>,
    injective: bool,
    viable: bool,
}

impl<'a> Matcher<'a> {
    fn new(ont: &Ontology, pattern: &'a ConceptualGraph, target: &'a ConceptualGraph, injective: bool) -> Self {
        let p_nodes: Vec<&ConceptNode> = pattern.nodes().collect();
        let t_nodes: Vec<&ConceptNode> = target.nodes().collect();
        let p_index: BTreeMap<&str, usize> = p_nodes.iter().enumerate().map(|(i, n)| (n.node_id.as_str(), i)).collect();
        let t_index: BTreeMap<&str, usize> = t_nodes.iter().enumerate().map(|(i, n)| (n.node_id.as_str(), i)).collect();

        let candidates: Vec<Vec<usize>> = p_nodes
            .iter()
            .map(|p| (0..t_nodes.len()).filter(|&j| node_compatible(ont, p, t_nodes[j])).collect())
            .collect();

        let mut viable = true;
        let mut edges = Vec::with_capacity(pattern.edge_count());
        for e in pattern.edges() {
            let (Some(&src), Some(&tgt)) = (p_index.get(e.source.as_str()), p_index.get(e.target.as_str())) else {
                viable = false;
                continue;
            };
            let images: Vec<(usize, usize, &str)> = target
                .edges()
                .filter(|te| ont.is_subrelation(&e.rel_id, &te.rel_id))
                .filter_map(|te| {
                    let s = *t_index.get(te.source.as_str())?;
                    let t = *t_index.get(te.target.as_str())?;
                    Some((s, t, te.edge_id.as_str()))
                })
                .collect();
            if images.is_empty() {
                viable = false;
            }
            edges.push(PatternEdge { id: e.edge_id.as_str(), src, tgt, images });
        }
        if candidates.iter().any(Vec::is_empty) {
            viable = false;
        }

        let mut degree = vec![0usize; p_nodes.len()];
        for e in &edges {
            degree[e.src] += 1;
            degree[e.tgt] += 1;
        }
        let mut order: Vec<usize> = (0..p_nodes.len()).collect();
        // stable sort keeps id order among equal degrees
        order.sort_by(|a, b| degree[*b].cmp(&degree[*a]));
        let mut position = vec![0usize; p_nodes.len()];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        let mut check_at = vec![Vec::new(); p_nodes.len()];
        for (k, e) in edges.iter().enumerate() {
            check_at[position[e.src].max(position[e.tgt])].push(k);
        }

        Matcher { p_nodes, t_nodes, candidates, edges, order, check_at, injective, viable }
    }

    /// Calls `emit` for every morphism; stops early when `emit` returns false.
    fn run(&self, emit: &mut dyn FnMut(Morphism) -> bool) {
        if !self.viable {
            return;
        }
        let mut assignment = vec![usize::MAX; self.p_nodes.len()];
        let mut used = vec![false; self.t_nodes.len()];
        self.extend(0, &mut assignment, &mut used, emit);
    }

    fn extend(
        &self,
        pos: usize,
        assignment: &mut [usize],
        used: &mut [bool],
        emit: &mut dyn FnMut(Morphism) -> bool,
    ) -> bool {
        if pos == self.order.len() {
            return self.emit_edge_maps(assignment, emit);
        }
        let node = self.order[pos];
        for &cand in &self.candidates[node] {
            if self.injective && used[cand] {
                continue;
            }
            assignment[node] = cand;
            let consistent = self.check_at[pos].iter().all(|&k| {
                let e = &self.edges[k];
                e.images.iter().any(|&(s, t, _)| s == assignment[e.src] && t == assignment[e.tgt])
            });
            if consistent {
                used[cand] = true;
                let go_on = self.extend(pos + 1, assignment, used, emit);
                used[cand] = false;
                if !go_on {
                    assignment[node] = usize::MAX;
                    return false;
                }
            }
        }
        assignment[node] = usize::MAX;
        true
    }

    fn emit_edge_maps(&self, assignment: &[usize], emit: &mut dyn FnMut(Morphism) -> bool) -> bool {
        let node_map: BTreeMap<String, String> = self
            .p_nodes
            .iter()
            .zip(assignment)
            .map(|(p, &t)| (p.node_id.clone(), self.t_nodes[t].node_id.clone()))
            .collect();
        let choices: Vec<Vec<&str>> = self
            .edges
            .iter()
            .map(|e| {
                e.images
                    .iter()
                    .filter(|&&(s, t, _)| s == assignment[e.src] && t == assignment[e.tgt])
                    .map(|&(_, _, id)| id)
                    .collect()
            })
            .collect();
        // odometer over the per-edge choices
        let mut idx = vec![0usize; choices.len()];
        loop {
            let edge_map = self
                .edges
                .iter()
                .zip(&choices)
                .zip(&idx)
                .map(|((e, c), &i)| (String::from(e.id), String::from(c[i])))
                .collect();
            if !emit(Morphism { node_map: node_map.clone(), edge_map }) {
                return false;
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return true;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}
