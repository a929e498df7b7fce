//! Canonical forms: a serialization that does not depend on node or edge ids.
//!
//! Nodes are ordered by iterated color refinement (initial color from type
//! and referent, refined by the sorted multiset of `(direction, relation,
//! neighbor color)`); remaining ties are broken by individualizing each
//! candidate of the first non-trivial cell and keeping the lexicographically
//! smallest rendering. Interchangeable twins are tried once. Connected
//! components are labeled independently and sorted by their rendering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::printer::serialize_graph;
use crate::graph::{ConceptNode, ConceptualGraph, Referent, RelationEdge};

/// A node's color with the sorted `(outgoing, relation, neighbor color)` list.
type Signature = (usize, Vec<(bool, usize, usize)>);

/// The canonical text of `g`. Two graphs have the same canonical form iff
/// they are isomorphic (types, referents and relations preserved; variable
/// names are treated as `*`).
pub fn canonical_form(g: &ConceptualGraph) -> String {
    canonical_labeling(g).0
}

/// The canonical form together with the original node ids listed in
/// canonical order.
pub(crate) fn canonical_labeling(g: &ConceptualGraph) -> (String, Vec<String>) {
    let idx = Indexed::new(g);
    let mut components: Vec<(String, Vec<usize>)> =
        idx.components().into_iter().map(|comp| idx.canonical_component(&comp)).collect();
    components.sort();
    let order: Vec<usize> = components.into_iter().flat_map(|(_, o)| o).collect();
    let text = serialize_graph(&idx.relabel(&order));
    let ids = order.into_iter().map(|i| idx.ids[i].clone()).collect();
    (text, ids)
}

struct Indexed {
    ids: Vec<String>,
    nodes: Vec<ConceptNode>,
    initial: Vec<usize>,
    // (source, relation rank, target)
    edges: Vec<(usize, usize, usize)>,
    rels: Vec<String>,
    // adjacency: (is_outgoing, relation rank, neighbor)
    adj: Vec<Vec<(bool, usize, usize)>>,
}

fn node_key(n: &ConceptNode) -> (&str, Option<&str>) {
    (n.type_id.as_str(), n.referent.marker())
}

impl Indexed {
    fn new(g: &ConceptualGraph) -> Self {
        let nodes: Vec<ConceptNode> = g.nodes().cloned().collect();
        let ids: Vec<String> = nodes.iter().map(|n| n.node_id.clone()).collect();
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let keys: BTreeSet<(&str, Option<&str>)> = nodes.iter().map(node_key).collect();
        let keys: Vec<_> = keys.into_iter().collect();
        let initial = nodes.iter().map(|n| keys.binary_search(&node_key(n)).unwrap()).collect();
        let rels: Vec<String> = g.edges().map(|e| e.rel_id.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); nodes.len()];
        for e in g.edges() {
            let (Some(&s), Some(&t)) = (index.get(e.source.as_str()), index.get(e.target.as_str())) else {
                continue;
            };
            let r = rels.binary_search(&e.rel_id).unwrap();
            edges.push((s, r, t));
            adj[s].push((true, r, t));
            adj[t].push((false, r, s));
        }
        Indexed { ids, nodes, initial, edges, rels, adj }
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let k = out.len();
            let mut members = vec![start];
            comp[start] = k;
            let mut i = 0;
            while i < members.len() {
                let v = members[i];
                for &(_, _, w) in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = k;
                        members.push(w);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Refines `colors` (indexed by position in `members`) to a stable,
    /// equitable partition. Colors are dense ranks.
    fn refine(&self, members: &[usize], local: &BTreeMap<usize, usize>, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = count_classes(&colors);
        loop {
            let sigs: Vec<Signature> = members
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let mut nb: Vec<(bool, usize, usize)> =
                        self.adj[v].iter().map(|&(out, r, w)| (out, r, colors[local[&w]])).collect();
                    nb.sort_unstable();
                    (colors[i], nb)
                })
                .collect();
            let mut distinct: Vec<&Signature> = sigs.iter().collect();
            distinct.sort();
            distinct.dedup();
            colors = sigs.iter().map(|s| distinct.binary_search(&s).unwrap()).collect();
            let now = distinct.len();
            if now == classes {
                return colors;
            }
            classes = now;
        }
    }

    fn canonical_component(&self, members: &[usize]) -> (String, Vec<usize>) {
        let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let init_keys: Vec<usize> = members.iter().map(|&v| self.initial[v]).collect();
        let mut ranks: Vec<usize> = init_keys.clone();
        ranks.sort_unstable();
        ranks.dedup();
        let colors: Vec<usize> = init_keys.iter().map(|k| ranks.binary_search(k).unwrap()).collect();
        let colors = self.refine(members, &local, colors);
        let mut best: Option<(String, Vec<usize>)> = None;
        self.search(members, &local, colors, &mut best);
        best.expect("search reaches at least one leaf")
    }

    fn search(
        &self,
        members: &[usize],
        local: &BTreeMap<usize, usize>,
        colors: Vec<usize>,
        best: &mut Option<(String, Vec<usize>)>,
    ) {
        // first (smallest color) non-singleton cell
        let mut sizes = vec![0usize; members.len()];
        for &c in &colors {
            sizes[c] += 1;
        }
        let Some(cell) = (0..members.len()).find(|&c| sizes[c] > 1) else {
            let mut order: Vec<usize> = vec![0; members.len()];
            for (i, &c) in colors.iter().enumerate() {
                order[c] = members[i];
            }
            let text = serialize_graph(&self.relabel(&order));
            if best.as_ref().is_none_or(|(b, _)| text < *b) {
                *best = Some((text, order));
            }
            return;
        };
        let candidates: Vec<usize> = (0..members.len()).filter(|&i| colors[i] == cell).collect();
        let mut representatives: Vec<usize> = Vec::new();
        for &i in &candidates {
            if representatives.iter().any(|&r| self.twins(members[r], members[i])) {
                continue;
            }
            representatives.push(i);
        }
        for i in representatives {
            let split: Vec<usize> =
                colors.iter().enumerate().map(|(j, &c)| if c == cell && j != i { 2 * c + 1 } else { 2 * c }).collect();
            let refined = self.refine(members, local, split);
            self.search(members, local, refined, best);
        }
    }

    /// `true` iff swapping `u` and `v` is an automorphism fixing every other
    /// node. Only called on nodes of the same color, hence of equal labels.
    fn twins(&self, u: usize, v: usize) -> bool {
        let swap = |x: usize| {
            if x == u {
                v
            } else if x == v {
                u
            } else {
                x
            }
        };
        let mut a: Vec<(usize, usize, usize)> = self.edges.clone();
        let mut b: Vec<(usize, usize, usize)> = self.edges.iter().map(|&(s, r, t)| (swap(s), r, swap(t))).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// The graph with node `order[k]` renamed `n{k+1}` and edges renumbered
    /// by (source label, relation, target label).
    fn relabel(&self, order: &[usize]) -> ConceptualGraph {
        let width = digits(order.len());
        let ewidth = digits(self.edges.len());
        let mut name = vec![String::new(); self.nodes.len()];
        let mut rank = vec![usize::MAX; self.nodes.len()];
        let mut g = ConceptualGraph::new();
        for (k, &v) in order.iter().enumerate() {
            name[v] = format!("n{:0width$}", k + 1);
            rank[v] = k;
            let n = &self.nodes[v];
            let referent = match &n.referent {
                Referent::Marker(m) => Referent::Marker(m.clone()),
                _ => Referent::Generic,
            };
            g.insert_node(ConceptNode::new(name[v].clone(), n.type_id.clone(), referent)).expect("unique names");
        }
        let mut edges: Vec<(usize, usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(s, _, t)| rank[s] != usize::MAX && rank[t] != usize::MAX)
            .map(|&(s, r, t)| (rank[s], r, rank[t]))
            .collect();
        edges.sort_unstable();
        for (k, (s, r, t)) in edges.into_iter().enumerate() {
            g.insert_edge(RelationEdge::new(
                format!("e{:0ewidth$}", k + 1),
                self.rels[r].clone(),
                name[order[s]].clone(),
                name[order[t]].clone(),
            ))
            .expect("unique names");
        }
        g
    }
}

fn count_classes(colors: &[usize]) -> usize {
    colors.iter().collect::<BTreeSet<_>>().len()
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut n = n / 10;
    while n > 0 {
        d += 1;
        n /= 10;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::parse_graph;

    #[test]
    fn renaming_does_not_matter() {
        let a = parse_graph("[A: *] -(r)-> [B: x]\n[B: x *b] -(s)-> [C: *]\n[B: x *b] -(r)-> [A: *]").unwrap();
        let b = parse_graph("[B: x *q] -(r)-> [A: *]\n[A: *] -(r)-> [B: x]\n[B: x *q] -(s)-> [C: *]").unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn markers_distinguish() {
        let a = parse_graph("[Langue: guarani]").unwrap();
        let b = parse_graph("[Langue: basque]").unwrap();
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn symmetric_graphs_terminate() {
        // a star of 30 identical leaves and a directed 12-cycle
        let mut star = String::from("[Hub: *h]");
        for _ in 0..30 {
            star.push_str("\n[Hub: *h] -(r)-> [Leaf: *]");
        }
        let g = parse_graph(&star).unwrap();
        let c = canonical_form(&g);
        assert_eq!(canonical_form(&parse_graph(&c).unwrap()), c);

        let mut cycle = String::new();
        for i in 0..12 {
            cycle.push_str(&format!("[T: *v{i}] -(r)-> [T: *v{}]\n", (i + 1) % 12));
        }
        let g = parse_graph(&cycle).unwrap();
        assert_eq!(g.node_count(), 12);
        let c = canonical_form(&g);
        assert_eq!(canonical_form(&parse_graph(&c).unwrap()), c);
    }

    #[test]
    fn distinguishes_cycle_from_two_cycles() {
        let mut six = String::new();
        for i in 0..6 {
            six.push_str(&format!("[T: *v{i}] -(r)-> [T: *v{}]\n", (i + 1) % 6));
        }
        let mut two = String::new();
        for i in 0..3 {
            two.push_str(&format!("[T: *a{i}] -(r)-> [T: *a{}]\n", (i + 1) % 3));
            two.push_str(&format!("[T: *b{i}] -(r)-> [T: *b{}]\n", (i + 1) % 3));
        }
        let a = parse_graph(&six).unwrap();
        let b = parse_graph(&two).unwrap();
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }
}
