//! Plain-text edge-list graph files: first non-comment line is the node
//! count `N`, then one `i j` pair per line. `#` starts a comment.

use std::path::Path;

use stosync::graph::Graph;

use crate::error::CliError;

pub fn read_edge_list(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read graph file {}: {e}", path.display())))?;
    parse_edge_list(&text)
        .map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
        .map(|g| g.with_name(path.display().to_string()))
}

pub fn parse_edge_list(text: &str) -> Result<Graph, String> {
    let mut node_count: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match node_count {
            None => {
                let n: usize = fields
                    .next()
                    .unwrap()
                    .parse()
                    .map_err(|_| format!("line {}: expected node count", lineno + 1))?;
                if fields.next().is_some() {
                    return Err(format!("line {}: expected just the node count", lineno + 1));
                }
                node_count = Some(n);
            }
            Some(_) => {
                let mut parse = || -> Result<usize, String> {
                    fields
                        .next()
                        .ok_or_else(|| format!("line {}: expected `i j`", lineno + 1))?
                        .parse()
                        .map_err(|_| format!("line {}: expected integer endpoints", lineno + 1))
                };
                let a = parse()?;
                let b = parse()?;
                if fields.next().is_some() {
                    return Err(format!("line {}: expected exactly two endpoints", lineno + 1));
                }
                edges.push((a, b));
            }
        }
    }
    let node_count = node_count.ok_or("empty graph file")?;
    Graph::new(node_count, edges).map_err(|e| e.to_string())
}

pub fn write_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", graph.node_count()));
    for &(a, b) in graph.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}
