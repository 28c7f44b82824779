//! Directed graphs read from whitespace-separated edge lists, and the edge
//! probability vectors that drive the cascade models.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// A directed graph with dense node indices. Parallel edges are collapsed by
/// summing weights; self-loops in the input are dropped.
#[derive(Clone, Debug)]
pub struct DirectedGraph {
    names: Vec<String>,
    edges: Vec<Edge>,
    /// Per node: `(neighbor, edge index)` sorted by neighbor.
    out_adj: Vec<Vec<(usize, usize)>>,
    in_adj: Vec<Vec<(usize, usize)>>,
}

impl DirectedGraph {
    /// Build from named nodes and raw (source, target, weight) triples.
    /// Collapses parallel edges; rejects self-loops and out-of-range indices.
    pub fn new(names: Vec<String>, raw_edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let n = names.len();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for (u, v, w) in raw_edges {
            if u >= n || v >= n {
                return Err(Error::InvalidItem { item: u.max(v), n });
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            match index.get(&(u, v)) {
                Some(&e) => edges[e].weight += w,
                None => {
                    index.insert((u, v), edges.len());
                    edges.push(Edge {
                        source: u,
                        target: v,
                        weight: w,
                    });
                }
            }
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            out_adj[edge.source].push((edge.target, e));
            in_adj[edge.target].push((edge.source, e));
        }
        for adj in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            adj.sort_unstable();
        }
        Ok(DirectedGraph {
            names,
            edges,
            out_adj,
            in_adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    /// Out-neighbors of `u` as `(target, edge index)`, ascending by target.
    pub fn out_neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.in_adj[v]
    }

    /// Distinct in-edges of `v` (post-collapse).
    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj[v].len()
    }

    pub fn total_degree(&self, v: usize) -> usize {
        self.in_adj[v].len() + self.out_adj[v].len()
    }

    /// Parse an in-memory edge list; see [`load_edge_list`].
    pub fn from_edge_list_text(text: &str) -> Result<Self> {
        load_edge_list(std::io::Cursor::new(text))
    }
}

/// Read a whitespace-separated edge list: one `u v [weight]` per line,
/// `#`-prefixed comment lines allowed. Nodes are re-indexed densely in order
/// of first appearance; parallel edges are summed; self-loops are ignored
/// with a warning.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<DirectedGraph> {
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut raw_edges: Vec<(usize, usize, f64)> = Vec::new();

    let mut intern = |token: &str, names: &mut Vec<String>| -> usize {
        match ids.get(token) {
            Some(&i) => i,
            None => {
                let i = names.len();
                ids.insert(token.to_string(), i);
                names.push(token.to_string());
                i
            }
        }
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_number = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(Error::Parse {
                line: line_number,
                message: format!("expected 'u v [weight]', got {} tokens", tokens.len()),
            });
        }
        for t in &tokens[..2] {
            if t.parse::<u64>().is_err() {
                return Err(Error::Parse {
                    line: line_number,
                    message: format!("unparseable node id '{t}'"),
                });
            }
        }
        let weight = match tokens.get(2) {
            None => 1.0,
            Some(t) => match t.parse::<f64>() {
                Ok(w) if w.is_finite() && w > 0.0 => w,
                _ => {
                    return Err(Error::Parse {
                        line: line_number,
                        message: format!("unparseable or non-positive weight '{t}'"),
                    })
                }
            },
        };
        let u = intern(tokens[0], &mut names);
        let v = intern(tokens[1], &mut names);
        if u == v {
            log::warn!(
                "line {line_number}: ignoring self-loop on node {}",
                tokens[0]
            );
            continue;
        }
        raw_edges.push((u, v, weight));
    }

    DirectedGraph::new(names, raw_edges)
}

/// Induced subgraph on the `limit` nodes of highest total degree (in + out,
/// weights ignored), ties to the lower node index. Nodes are re-indexed
/// densely preserving their original relative order.
pub fn top_active_subgraph(graph: &DirectedGraph, limit: usize) -> Result<DirectedGraph> {
    let n = graph.node_count();
    if limit < 1 || limit > n {
        return Err(Error::InvalidArgument(format!(
            "limit {limit} outside 1..={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.total_degree(v)), v));
    let mut keep: Vec<usize> = order[..limit].to_vec();
    keep.sort_unstable();

    let mut remap = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new;
    }
    let names = keep.iter().map(|&v| graph.names[v].clone()).collect();
    let raw_edges = graph
        .edges
        .iter()
        .filter(|e| remap[e.source] != usize::MAX && remap[e.target] != usize::MAX)
        .map(|e| (remap[e.source], remap[e.target], e.weight))
        .collect();
    DirectedGraph::new(names, raw_edges)
}

/// Per-edge activation probabilities, indexed like the graph's edge list.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(
                "edge probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(ProbabilityVector { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.probs[edge]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// Weighted-cascade probabilities: `p_{u,v} = weight(u,v) / indegree(v)`,
/// clamped into `[0, 1]` (weighted parallel edges can push the raw ratio
/// above 1).
pub fn weighted_cascade_probs(graph: &DirectedGraph) -> Result<ProbabilityVector> {
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let probs = graph
        .edges()
        .iter()
        .map(|e| (e.weight / graph.in_degree(e.target) as f64).clamp(0.0, 1.0))
        .collect();
    ProbabilityVector::new(probs)
}

/// `m` independent perturbed copies of `theta`: each entry is drawn uniformly
/// from `[lo_factor·p, hi_factor·p]` and clamped into `[0, 1]`.
pub fn perturb_probs(
    theta: &ProbabilityVector,
    lo_factor: f64,
    hi_factor: f64,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ProbabilityVector>> {
    if !(0.0 <= lo_factor && lo_factor <= hi_factor) {
        return Err(Error::InvalidArgument(
            "need 0 <= lo_factor <= hi_factor".into(),
        ));
    }
    let mut vectors = Vec::with_capacity(m);
    for _ in 0..m {
        let probs = theta
            .as_slice()
            .iter()
            .map(|&p| {
                let lo = lo_factor * p;
                let hi = hi_factor * p;
                let v = if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                };
                v.clamp(0.0, 1.0)
            })
            .collect();
        vectors.push(ProbabilityVector::new(probs)?);
    }
    Ok(vectors)
}

/// L1 distance between two probability vectors of equal length.
pub fn vector_distance(a: &ProbabilityVector, b: &ProbabilityVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// Serialize as a `#edges=<E>` header followed by one float per line in edge
/// order.
pub fn write_probability_vector<W: Write>(mut writer: W, theta: &ProbabilityVector) -> Result<()> {
    writeln!(writer, "#edges={}", theta.len())?;
    for p in theta.as_slice() {
        writeln!(writer, "{p}")?;
    }
    Ok(())
}

pub fn read_probability_vector<R: BufRead>(reader: R) -> Result<ProbabilityVector> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let header = header?;
    let expected: usize = header
        .strip_prefix("#edges=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or(Error::Parse {
            line: 1,
            message: format!("expected '#edges=<E>' header, got '{header}'"),
        })?;
    let mut probs = Vec::with_capacity(expected);
    for (lineno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let p: f64 = trimmed.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("unparseable probability '{trimmed}'"),
        })?;
        probs.push(p);
    }
    if probs.len() != expected {
        return Err(Error::Parse {
            line: probs.len() + 1,
            message: format!("header declares {expected} edges, found {}", probs.len()),
        });
    }
    ProbabilityVector::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_edge_list() {
        let g = DirectedGraph::from_edge_list_text("# c\n0 1\n1 2\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.edges().iter().all(|e| e.weight == 1.0));
    }

    #[test]
    fn explicit_weight() {
        let g = DirectedGraph::from_edge_list_text("0 1 2.5").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].weight, 2.5);
    }

    #[test]
    fn parallel_edges_collapse() {
        let g = DirectedGraph::from_edge_list_text("0 1\n0 1\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].weight, 2.0);
    }

    #[test]
    fn first_appearance_reindexing() {
        let g = DirectedGraph::from_edge_list_text("9 4\n4 7\n").unwrap();
        assert_eq!(g.node_names(), &["9", "4", "7"]);
        assert_eq!(
            g.edges()[0],
            Edge {
                source: 0,
                target: 1,
                weight: 1.0
            }
        );
    }

    #[test]
    fn malformed_lines_report_numbers() {
        let err = DirectedGraph::from_edge_list_text("0 1\nx 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = DirectedGraph::from_edge_list_text("0 1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = DirectedGraph::from_edge_list_text("0 1 -2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            DirectedGraph::from_edge_list_text(""),
            Err(Error::EmptyGraph)
        ));
        assert!(matches!(
            DirectedGraph::from_edge_list_text("# only comments\n"),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn self_loops_are_dropped() {
        let g = DirectedGraph::from_edge_list_text("0 0\n0 1\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn weighted_cascade_examples() {
        // two unit-weight in-edges -> each 0.5
        let g = DirectedGraph::from_edge_list_text("0 2\n1 2\n").unwrap();
        let theta = weighted_cascade_probs(&g).unwrap();
        assert_eq!(theta.as_slice(), &[0.5, 0.5]);

        // single predecessor -> 1
        let g = DirectedGraph::from_edge_list_text("0 1\n").unwrap();
        assert_eq!(weighted_cascade_probs(&g).unwrap().as_slice(), &[1.0]);

        // weights 3 and 1 over indegree 2 -> clamp(1.5) and 0.5
        let g = DirectedGraph::from_edge_list_text("0 2 3\n1 2 1\n").unwrap();
        assert_eq!(weighted_cascade_probs(&g).unwrap().as_slice(), &[1.0, 0.5]);
    }

    #[test]
    fn perturbation_degenerate_and_bounds() {
        let theta = ProbabilityVector::new(vec![0.5, 0.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let copies = perturb_probs(&theta, 1.0, 1.0, 4, &mut rng).unwrap();
        assert_eq!(copies.len(), 4);
        for c in &copies {
            assert_eq!(c, &theta);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let copies = perturb_probs(&theta, 0.9, 1.1, 16, &mut rng).unwrap();
        for c in &copies {
            let s = c.as_slice();
            assert!((0.45..=0.55).contains(&s[0]));
            assert_eq!(s[1], 0.0);
            assert!(s[2] <= 1.0);
        }
    }

    #[test]
    fn perturbation_is_seeded() {
        let theta = ProbabilityVector::new(vec![0.3, 0.7]).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(
            perturb_probs(&theta, 0.9, 1.1, 3, &mut a).unwrap(),
            perturb_probs(&theta, 0.9, 1.1, 3, &mut b).unwrap()
        );
    }

    #[test]
    fn distance_examples() {
        let a = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        let b = ProbabilityVector::new(vec![0.4, 0.7]).unwrap();
        assert!((vector_distance(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(vector_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(
            vector_distance(&a, &b).unwrap(),
            vector_distance(&b, &a).unwrap()
        );
        let c = ProbabilityVector::new(vec![0.1]).unwrap();
        assert!(matches!(
            vector_distance(&a, &c),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn top_active_star() {
        let g = DirectedGraph::from_edge_list_text("0 1\n0 2\n0 3\n0 4\n0 5\n").unwrap();
        let sub = top_active_subgraph(&g, 1).unwrap();
        assert_eq!(sub.node_count(), 1);
        assert_eq!(sub.edge_count(), 0);
        assert_eq!(sub.node_name(0), "0");

        let same = top_active_subgraph(&g, g.node_count()).unwrap();
        assert_eq!(same.node_count(), g.node_count());
        assert_eq!(same.edge_count(), g.edge_count());
    }

    #[test]
    fn probability_vector_roundtrip() {
        let theta = ProbabilityVector::new(vec![0.25, 1.0, 0.0, 0.125]).unwrap();
        let mut buf = Vec::new();
        write_probability_vector(&mut buf, &theta).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#edges=4\n"));
        let back = read_probability_vector(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, theta);
    }
}
