//! SNAP-style edge lists.
//!
//! One edge per line as two whitespace-separated non-negative integers, with an
//! optional third column holding the activation probability. Lines starting
//! with `#` are comments, except that a `# n=<n> weighted=<0|1>` header written
//! by [`save_edge_list`] fixes the node count so isolated nodes survive a round
//! trip.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::num::IntErrorKind;
use std::path::{Path, PathBuf};

use super::{Edge, WeightedGraph};
use crate::error::{check_probability, Error, Result};

/// A graph loaded from disk together with its id mapping.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: WeightedGraph,
    /// Dense ids of nodes eligible as seeds.
    pub candidates: Vec<usize>,
    /// `original_ids[i]` is the file id of dense node `i`.
    pub original_ids: Vec<u64>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

/// Raw parse result before pruning: edges over original ids.
#[derive(Clone, Debug, Default)]
pub struct RawEdgeList {
    pub declared_n: Option<usize>,
    pub edges: Vec<(u64, u64, Option<f64>)>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

fn parse_id(token: &str, path: &Path, line: usize) -> Result<u64> {
    token.parse::<u64>().map_err(|e| match e.kind() {
        IntErrorKind::PosOverflow => Error::NodeIdOverflow {
            path: path.to_path_buf(),
            line,
            token: token.to_string(),
        },
        _ => Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("expected a non-negative integer node id, found {token:?}"),
        },
    })
}

fn parse_header(comment: &str) -> Option<usize> {
    comment
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix("n="))
        .and_then(|v| v.parse().ok())
}

/// Parses an edge list from any reader; `path` only labels errors.
pub fn read_edge_list(reader: impl BufRead, path: &Path) -> Result<RawEdgeList> {
    let mut out = RawEdgeList::default();
    let mut seen = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if out.declared_n.is_none() {
                out.declared_n = parse_header(comment);
            }
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&tokens.len()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("expected 2 or 3 columns, found {}", tokens.len()),
            });
        }
        let u = parse_id(tokens[0], path, lineno)?;
        let v = parse_id(tokens[1], path, lineno)?;
        let q = match tokens.get(2) {
            Some(t) => {
                let q: f64 = t.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: format!("invalid edge probability {t:?}"),
                })?;
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno,
                        msg: format!("edge probability {q} outside [0, 1]"),
                    });
                }
                Some(q)
            }
            None => None,
        };
        if u == v {
            out.self_loops_dropped += 1;
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key, ()).is_some() {
            out.duplicates_dropped += 1;
            continue;
        }
        out.edges.push((key.0, key.1, q));
    }
    if out.self_loops_dropped > 0 {
        log::warn!("{}: dropped {} self-loops", path.display(), out.self_loops_dropped);
    }
    Ok(out)
}

/// Loads a SNAP edge list.
///
/// Nodes whose degree is at most `degree_min` are removed in a single pass
/// (degrees are computed once, on the full graph; removal is not iterated to
/// a fixpoint). Survivors are reindexed densely in ascending original-id
/// order. Nodes whose full-graph degree is at least `candidate_degree_min`
/// are returned as candidates. Edges without a weight column get `default_q`.
pub fn load_edge_list(
    path: impl AsRef<Path>,
    default_q: f64,
    degree_min: usize,
    candidate_degree_min: usize,
) -> Result<LoadedGraph> {
    let path = path.as_ref();
    check_probability("default_q", default_q)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let raw = read_edge_list(BufReader::new(file), path)?;
    build_loaded(raw, path, default_q, degree_min, candidate_degree_min)
}

fn build_loaded(
    raw: RawEdgeList,
    path: &Path,
    default_q: f64,
    degree_min: usize,
    candidate_degree_min: usize,
) -> Result<LoadedGraph> {
    let mut degree: BTreeMap<u64, usize> = BTreeMap::new();
    if let Some(n) = raw.declared_n {
        for id in 0..n as u64 {
            degree.insert(id, 0);
        }
    }
    for &(u, v, _) in &raw.edges {
        *degree.entry(u).or_default() += 1;
        *degree.entry(v).or_default() += 1;
    }
    let mut dense = HashMap::new();
    let mut original_ids = Vec::new();
    let mut candidates = Vec::new();
    for (&id, &deg) in &degree {
        // With no pruning requested, keep declared isolated nodes too.
        if degree_min > 0 && deg <= degree_min {
            continue;
        }
        let idx = original_ids.len();
        dense.insert(id, idx);
        original_ids.push(id);
        if deg >= candidate_degree_min {
            candidates.push(idx);
        }
    }
    if original_ids.len() > u32::MAX as usize {
        return Err(Error::NodeIdOverflow {
            path: path.to_path_buf(),
            line: 0,
            token: format!("{} nodes", original_ids.len()),
        });
    }
    let edges = raw
        .edges
        .iter()
        .filter_map(|&(u, v, q)| {
            let (du, dv) = (*dense.get(&u)?, *dense.get(&v)?);
            Some(Edge::new(du.min(dv), du.max(dv), q.unwrap_or(default_q)))
        })
        .collect();
    Ok(LoadedGraph {
        graph: WeightedGraph::from_parts(original_ids.len(), edges),
        candidates,
        original_ids,
        self_loops_dropped: raw.self_loops_dropped,
        duplicates_dropped: raw.duplicates_dropped,
    })
}

/// Writes the save format: `# n=<n> weighted=<0|1>` then one edge per line.
pub fn write_edge_list(graph: &WeightedGraph, weighted: bool, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "# n={} weighted={}", graph.n(), u8::from(weighted))?;
    for e in graph.edges() {
        if weighted {
            writeln!(w, "{} {} {}", e.u, e.v, e.q)?;
        } else {
            writeln!(w, "{} {}", e.u, e.v)?;
        }
    }
    w.flush()
}

pub fn save_edge_list(graph: &WeightedGraph, weighted: bool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_edge_list(graph, weighted, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Reads `node_id community_id` pairs (same comment rule as edge lists).
pub fn read_community_file(path: impl AsRef<Path>) -> Result<Vec<(u64, u64)>> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                path: path.clone(),
                line: idx + 1,
                msg: format!("expected 2 columns, found {}", tokens.len()),
            });
        }
        out.push((parse_id(tokens[0], &path, idx + 1)?, parse_id(tokens[1], &path, idx + 1)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn load_str(text: &str, degree_min: usize) -> Result<LoadedGraph> {
        let p = Path::new("mem");
        let raw = read_edge_list(Cursor::new(text), p)?;
        build_loaded(raw, p, 0.1, degree_min, 0)
    }

    #[test]
    fn path_graph() {
        let g = load_str("0 1\n1 2\n", 0).unwrap();
        assert_eq!(g.graph.n(), 3);
        assert_eq!(g.graph.edge_count(), 2);
        assert!(g.graph.edges().iter().all(|e| e.q == 0.1));
    }

    #[test]
    fn single_pass_pruning() {
        let g = load_str("0 1\n1 2\n", 1).unwrap();
        assert_eq!(g.graph.n(), 1);
        assert_eq!(g.graph.edge_count(), 0);
        assert_eq!(g.original_ids, vec![1]);
    }

    #[test]
    fn comments_duplicates_and_loops() {
        let plain = load_str("0 1\n1 2\n", 0).unwrap();
        let noisy = load_str("# header\n0 1\n# mid\n\n1\t2\n2 1\n3 3\n", 0).unwrap();
        assert_eq!(plain.graph, noisy.graph);
        assert_eq!(noisy.duplicates_dropped, 1);
        assert_eq!(noisy.self_loops_dropped, 1);
    }

    #[test]
    fn sparse_ids_are_reindexed() {
        let g = load_str("100 7\n7 55\n", 0).unwrap();
        assert_eq!(g.original_ids, vec![7, 55, 100]);
        let pairs: Vec<_> = g.graph.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 2), (0, 1)]);
    }

    #[test]
    fn errors_report_lines() {
        match load_str("0 1\n1 x\n", 0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match load_str("0 1 2 3\n", 0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_str("0 99999999999999999999999\n", 0),
            Err(Error::NodeIdOverflow { line: 1, .. })
        ));
        assert!(load_str("0 1 1.5\n", 0).is_err());
        assert!(load_edge_list("/nonexistent/graph.txt", 0.1, 0, 0).is_err());
    }

    #[test]
    fn header_keeps_isolated_nodes() {
        let g = WeightedGraph::new(5, vec![Edge::new(0, 3, 0.25)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# n=5 weighted=1\n"));
        let back = load_str(&text, 0).unwrap();
        assert_eq!(back.graph, g);
    }
}
