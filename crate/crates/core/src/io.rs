//! Reading graphs from edge lists and Pajek files, and writing clusterings.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    /// Lines `u v [w]`, `#` starts a comment.
    Edgelist,
    /// The `*Vertices`, `*Edges`, `*Arcs`, `*Edgeslist` and `*Arcslist`
    /// sections of the Pajek `.net` format.
    Pajek,
}

impl Format {
    /// `.net` and `.paj` are Pajek, everything else is an edge list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("net") || ext.eq_ignore_ascii_case("paj") => Format::Pajek,
            _ => Format::Edgelist,
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Edgelist => "edgelist",
            Format::Pajek => "pajek",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edgelist" => Ok(Format::Edgelist),
            "pajek" => Ok(Format::Pajek),
            _ => Err(Error::invalid(format!("unknown graph format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    pub drop_self_edges: bool,
    /// Ignore weights: every adjacent pair gets weight 1 and self-edges
    /// are dropped.
    pub unweighted: bool,
}

/// A parsed graph with the original label of each vertex.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub labels: Vec<String>,
}

pub fn read_graph(path: impl AsRef<Path>, format: Format, options: ReadOptions) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text, format, options).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}

/// Parses graph text. Parse errors carry an empty path.
pub fn parse_graph(text: &str, format: Format, options: ReadOptions) -> Result<LoadedGraph> {
    let raw = match format {
        Format::Edgelist => parse_edgelist(text)?,
        Format::Pajek => parse_pajek(text)?,
    };
    let mut edges = raw.edges;
    if options.unweighted {
        for e in &mut edges {
            *e = (e.0.min(e.1), e.0.max(e.1), 1.0);
        }
        edges.retain(|e| e.0 != e.1);
        edges.sort_unstable_by_key(|e| (e.0, e.1));
        edges.dedup_by_key(|e| (e.0, e.1));
    } else if options.drop_self_edges {
        edges.retain(|e| e.0 != e.1);
    }
    let graph = Graph::from_edges(raw.labels.len(), edges)?;
    Ok(LoadedGraph {
        graph,
        labels: raw.labels,
    })
}

struct RawGraph {
    labels: Vec<String>,
    edges: Vec<(VertexId, VertexId, f64)>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: Default::default(),
        line,
        message: message.into(),
    }
}

fn parse_weight(token: &str, line: usize) -> Result<f64> {
    let w: f64 = token
        .parse()
        .map_err(|_| parse_error(line, format!("invalid weight '{token}'")))?;
    if !w.is_finite() {
        return Err(parse_error(line, format!("weight {token} is not finite")));
    }
    if w < 0.0 {
        return Err(parse_error(line, format!("negative weight {token}")));
    }
    Ok(w)
}

fn parse_edgelist(text: &str) -> Result<RawGraph> {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut names: Vec<&str> = Vec::new();
    let mut edges = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        let content = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() > 3 || fields.len() < 2 {
            return Err(parse_error(line_no, format!("expected 'u v [w]', got {} fields", fields.len())));
        }
        let w = match fields.get(2) {
            Some(t) => parse_weight(t, line_no)?,
            None => 1.0,
        };
        let mut endpoint = |token| {
            *ids.entry(token).or_insert_with(|| {
                names.push(token);
                names.len() - 1
            })
        };
        let u = endpoint(fields[0]);
        let v = endpoint(fields[1]);
        edges.push((u, v, w));
    }

    // Dense ids follow the sorted labels (numerically when all are
    // integers), so the graph does not depend on line order.
    let numeric: Option<Vec<i128>> = names.iter().map(|n| n.parse().ok()).collect();
    let mut order: Vec<usize> = (0..names.len()).collect();
    match numeric {
        Some(values) => order.sort_by_key(|&i| values[i]),
        None => order.sort_by_key(|&i| names[i]),
    }
    let mut rank = vec![0; names.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    for e in &mut edges {
        *e = (rank[e.0], rank[e.1], e.2);
    }
    Ok(RawGraph {
        labels: order.iter().map(|&i| names[i].to_string()).collect(),
        edges,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Vertices,
    Pairs,
    Lists,
}

fn parse_pajek(text: &str) -> Result<RawGraph> {
    let mut labels: Option<Vec<String>> = None;
    let mut edges = Vec::new();
    let mut section = Section::None;
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('*') {
            let mut fields = header.split_whitespace();
            let keyword = fields.next().unwrap_or("").to_ascii_lowercase();
            section = match keyword.as_str() {
                "vertices" => {
                    if labels.is_some() {
                        return Err(parse_error(line_no, "duplicate *Vertices section"));
                    }
                    let count = fields
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| parse_error(line_no, "*Vertices needs a vertex count"))?;
                    labels = Some((1..=count).map(|i| i.to_string()).collect());
                    Section::Vertices
                }
                "edges" | "arcs" => Section::Pairs,
                "edgeslist" | "arcslist" => Section::Lists,
                _ => return Err(parse_error(line_no, format!("unsupported section '*{keyword}'"))),
            };
            if section != Section::Vertices && labels.is_none() {
                return Err(parse_error(line_no, "edges before *Vertices"));
            }
            continue;
        }
        let n = labels.as_ref().map_or(0, |l| l.len());
        let vertex = |token: &str| -> Result<usize> {
            match token.parse::<usize>() {
                Ok(id) if (1..=n).contains(&id) => Ok(id - 1),
                _ => Err(parse_error(line_no, format!("invalid vertex '{token}' (expected 1..={n})"))),
            }
        };
        match section {
            Section::None => return Err(parse_error(line_no, "data outside of any section")),
            Section::Vertices => {
                let (id_token, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
                let v = vertex(id_token)?;
                let rest = rest.trim_start();
                let label = if let Some(quoted) = rest.strip_prefix('"') {
                    quoted
                        .split_once('"')
                        .map(|(label, _)| label)
                        .ok_or_else(|| parse_error(line_no, "unterminated vertex label"))?
                } else {
                    rest.split_whitespace().next().unwrap_or(id_token)
                };
                labels.as_mut().unwrap()[v] = label.to_string();
            }
            Section::Pairs => {
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if fields.len() < 2 {
                    return Err(parse_error(line_no, "expected 'u v [w]'"));
                }
                let w = match fields.get(2) {
                    Some(t) => parse_weight(t, line_no)?,
                    None => 1.0,
                };
                edges.push((vertex(fields[0])?, vertex(fields[1])?, w));
            }
            Section::Lists => {
                let mut fields = trimmed.split_whitespace();
                let u = vertex(fields.next().unwrap())?;
                for t in fields {
                    edges.push((u, vertex(t)?, 1.0));
                }
            }
        }
    }
    let labels = labels.ok_or_else(|| parse_error(text.lines().count().max(1), "missing *Vertices section"))?;
    Ok(RawGraph { labels, edges })
}

/// Writes `<label> <cluster>` per vertex in vertex order, with cluster ids
/// numbered densely in order of first appearance.
pub fn write_clustering(path: impl AsRef<Path>, labels: &[String], clustering: &Clustering) -> Result<()> {
    let path = path.as_ref();
    if labels.len() != clustering.vertex_count() {
        return Err(Error::InvalidClustering(format!(
            "{} labels for {} vertices",
            labels.len(),
            clustering.vertex_count()
        )));
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut dense: HashMap<usize, usize> = HashMap::new();
    for (v, label) in labels.iter().enumerate() {
        let next = dense.len();
        let id = *dense.entry(clustering.cluster_of(v)).or_insert(next);
        writeln!(out, "{label} {id}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_clustering`] for the graph `loaded`.
pub fn read_clustering(path: impl AsRef<Path>, loaded: &LoadedGraph) -> Result<Clustering> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let index: HashMap<&str, usize> = loaded.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut assignment: Vec<Option<usize>> = vec![None; loaded.labels.len()];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (label, cluster) = line
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| err("expected '<label> <cluster>'".into()))?;
        let v = *index
            .get(label.trim_end())
            .ok_or_else(|| err(format!("unknown vertex '{label}'")))?;
        let c: usize = cluster.parse().map_err(|_| err(format!("invalid cluster id '{cluster}'")))?;
        if assignment[v].replace(c).is_some() {
            return Err(err(format!("vertex '{label}' listed twice")));
        }
    }
    let labels = assignment
        .iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::InvalidClustering(format!("vertex '{}' missing", loaded.labels[v]))))
        .collect::<Result<Vec<_>>>()?;
    Clustering::from_assignment(&loaded.graph, &labels)
}
