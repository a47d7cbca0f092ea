//! Text formats: the dynamic edge list and node label files.
//!
//! Edge list:
//!
//! ```text
//! # n=4 T=2
//! 1 1 2 3
//! 2 3 4 1
//! ```
//!
//! The header is mandatory. Each record is `t u v w` with a 1-based time
//! index, 1-based endpoints and a positive integer weight; pairs that do not
//! appear have weight zero. Other lines starting with `#` are comments.
//!
//! Label files hold one `node label` pair per line, both 1-based.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{CommunityAssignment, DynamicNetwork, WeightedGraph};

fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let body = line.trim_start_matches('#').trim();
    let mut n = None;
    let mut t = None;
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("malformed header field `{field}`")))?;
        let value: usize = value.parse().map_err(|_| {
            Error::parse(lineno, format!("header value `{value}` is not an integer"))
        })?;
        match key {
            "n" => n = Some(value),
            "T" => t = Some(value),
            _ => return Err(Error::parse(lineno, format!("unknown header key `{key}`"))),
        }
    }
    match (n, t) {
        (Some(n), Some(t)) if n > 0 && t > 0 => Ok((n, t)),
        _ => Err(Error::parse(
            lineno,
            "header must be `# n=<nodes> T=<steps>` with positive values",
        )),
    }
}

/// Reads a dynamic network from the edge-list format.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<DynamicNetwork> {
    let mut header = None;
    let mut graphs: Vec<WeightedGraph> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if header.is_none() {
            if !trimmed.starts_with('#') {
                return Err(Error::parse(
                    lineno,
                    "missing `# n=<nodes> T=<steps>` header",
                ));
            }
            let (n, t) = parse_header(trimmed, lineno)?;
            header = Some((n, t));
            graphs = (0..t)
                .map(|_| WeightedGraph::empty(n))
                .collect::<Result<_>>()?;
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let (n, steps) = header.expect("checked above");
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected `t u v w`, got {} fields", fields.len()),
            ));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(lineno, format!("`{s}` is not a nonnegative integer")))
        };
        let (t, u, v) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
        let w: u32 = fields[3].parse().map_err(|_| {
            Error::parse(
                lineno,
                format!("weight `{}` is not a nonnegative integer", fields[3]),
            )
        })?;
        if t == 0 || t > steps {
            return Err(Error::parse(
                lineno,
                format!("time {t} outside 1..={steps}"),
            ));
        }
        if u == 0 || v == 0 || u > n || v > n {
            return Err(Error::parse(lineno, format!("endpoint outside 1..={n}")));
        }
        if u == v {
            return Err(Error::parse(lineno, "self-loops are not allowed"));
        }
        let g = &mut graphs[t - 1];
        if g.weight(u - 1, v - 1) != 0 {
            return Err(Error::parse(
                lineno,
                format!("duplicate pair ({u}, {v}) at time {t}"),
            ));
        }
        g.set_weight(u - 1, v - 1, w)?;
    }
    if header.is_none() {
        return Err(Error::parse(0, "empty edge list"));
    }
    DynamicNetwork::new(graphs)
}

/// Writes the edge-list format; output is deterministic (time, then `u < v`).
pub fn write_edge_list<W: Write>(mut out: W, seq: &DynamicNetwork) -> Result<()> {
    writeln!(out, "# n={} T={}", seq.n(), seq.len())?;
    for (t, g) in seq.graphs().iter().enumerate() {
        for (u, v, w) in g.edges() {
            writeln!(out, "{} {} {} {}", t + 1, u + 1, v + 1, w)?;
        }
    }
    Ok(())
}

/// Reads `node label` lines. Every node in `1..=n` must appear exactly once;
/// `k` is the largest label seen.
pub fn read_labels<R: BufRead>(reader: R) -> Result<CommunityAssignment> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(lineno, "expected `node label`"));
        }
        let node: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(lineno, "node is not a positive integer"))?;
        let label: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, "label is not a positive integer"))?;
        if node == 0 || label == 0 {
            return Err(Error::parse(lineno, "nodes and labels are 1-based"));
        }
        pairs.push((lineno, node, label));
    }
    let n = pairs.iter().map(|p| p.1).max().unwrap_or(0);
    let k = pairs.iter().map(|p| p.2).max().unwrap_or(0);
    let mut labels = vec![0usize; n];
    for &(lineno, node, label) in &pairs {
        if labels[node - 1] != 0 {
            return Err(Error::parse(lineno, format!("node {node} labeled twice")));
        }
        labels[node - 1] = label;
    }
    if let Some(missing) = labels.iter().position(|&l| l == 0) {
        return Err(Error::parse(
            0,
            format!("node {} has no label", missing + 1),
        ));
    }
    CommunityAssignment::from_one_based(&labels, k)
}

pub fn write_labels<W: Write>(mut out: W, c: &CommunityAssignment) -> Result<()> {
    for (u, &l) in c.labels().iter().enumerate() {
        writeln!(out, "{} {}", u + 1, l + 1)?;
    }
    Ok(())
}
