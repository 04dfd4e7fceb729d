//! Undirected connected graphs with canonical link indexing.
//!
//! Nodes are numbered `0..n`. Every link is stored once as a pair `(u, v)`
//! with `u < v`; links are sorted lexicographically and that order defines
//! the link ids `0..l`. Each node keeps a sorted adjacency list of
//! `(neighbor, link id)` pairs, so a link shows up in exactly two lists.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::distributions::Open01;
use rand::Rng;

use crate::error::GraphError;

pub type NodeId = usize;
pub type LinkId = usize;

/// Maximum number of consecutive disconnected placements tolerated by
/// [`Graph::random_geometric`] before giving up.
pub const MAX_GEOMETRIC_REDRAWS: usize = 1000;

/// Graph family label carried through to invariants and bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    Path,
    Cycle,
    Complete,
    Regular { k: usize },
    StronglyRegular { k: usize, lambda: usize, mu: usize },
    Geometric,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::Path => write!(f, "path"),
            FamilyTag::Cycle => write!(f, "cycle"),
            FamilyTag::Complete => write!(f, "complete"),
            FamilyTag::Regular { .. } => write!(f, "k-regular"),
            FamilyTag::StronglyRegular { .. } => write!(f, "strongly-regular"),
            FamilyTag::Geometric => write!(f, "geometric"),
        }
    }
}

/// Deterministic graph families that can be built from a few parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    /// `k`-regular circulant on `n` nodes.
    Circulant { n: usize, k: usize },
    /// The (10, 3, 0, 1) strongly regular Petersen graph.
    Petersen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    links: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    positions: Option<Vec<(f64, f64)>>,
    family: Option<FamilyTag>,
}

/// Summary quantities of a graph used by the convergence bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphInvariants {
    pub n: usize,
    pub l: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub diameter: usize,
    pub family: Option<FamilyTag>,
}

impl Graph {
    /// Builds a graph from an unordered link list. Pairs may be given in
    /// either orientation; self-loops, duplicates, out-of-range endpoints
    /// and disconnected results are rejected.
    pub fn from_links(n: usize, links: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut canon = Vec::with_capacity(links.len());
        let mut seen = HashSet::with_capacity(links.len());
        for &(a, b) in links {
            if a >= n || b >= n {
                return Err(GraphError::NodeOutOfRange { node: a.max(b), n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let pair = (a.min(b), a.max(b));
            if !seen.insert(pair) {
                return Err(GraphError::DuplicateLink(pair.0, pair.1));
            }
            canon.push(pair);
        }
        canon.sort_unstable();

        let mut adjacency = vec![Vec::new(); n];
        for (e, &(u, v)) in canon.iter().enumerate() {
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let graph = Graph {
            n,
            links: canon,
            adjacency,
            positions: None,
            family: None,
        };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    pub fn family(family: Family) -> Result<Self, GraphError> {
        match family {
            Family::Path { n } => {
                if n < 2 {
                    return Err(GraphError::InvalidFamily(format!(
                        "path needs n >= 2, got {n}"
                    )));
                }
                let links: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
                Ok(Self::from_links(n, &links)?.with_family(FamilyTag::Path))
            }
            Family::Cycle { n } => {
                if n < 3 {
                    return Err(GraphError::InvalidFamily(format!(
                        "cycle needs n >= 3, got {n}"
                    )));
                }
                let links: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
                Ok(Self::from_links(n, &links)?.with_family(FamilyTag::Cycle))
            }
            Family::Complete { n } => {
                if n < 2 {
                    return Err(GraphError::InvalidFamily(format!(
                        "complete graph needs n >= 2, got {n}"
                    )));
                }
                let links: Vec<_> = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .collect();
                Ok(Self::from_links(n, &links)?.with_family(FamilyTag::Complete))
            }
            Family::Circulant { n, k } => {
                if k < 2 || k + 1 > n {
                    return Err(GraphError::InvalidFamily(format!(
                        "circulant needs 2 <= k <= n-1, got k={k}, n={n}"
                    )));
                }
                if k % 2 == 1 && n % 2 == 1 {
                    return Err(GraphError::InvalidFamily(format!(
                        "odd degree k={k} needs an even node count, got n={n}"
                    )));
                }
                let mut links = Vec::with_capacity(n * k / 2);
                for i in 0..n {
                    // offsets stay below n/2, so every pair is produced once
                    for off in 1..=k / 2 {
                        links.push((i, (i + off) % n));
                    }
                    if k % 2 == 1 && i < n / 2 {
                        links.push((i, i + n / 2));
                    }
                }
                Ok(Self::from_links(n, &links)?.with_family(FamilyTag::Regular { k }))
            }
            Family::Petersen => {
                let mut links = Vec::with_capacity(15);
                for i in 0..5 {
                    links.push((i, (i + 1) % 5));
                    links.push((i, i + 5));
                    links.push((5 + i, 5 + (i + 2) % 5));
                }
                Ok(Self::from_links(10, &links)?.with_family(FamilyTag::StronglyRegular {
                    k: 3,
                    lambda: 0,
                    mu: 1,
                }))
            }
        }
    }

    /// Places `n` nodes uniformly in the open unit square and keeps the
    /// `target_links` closest pairs, which is the same as growing a common
    /// radius until that many links exist. Distance ties are resolved by
    /// canonical pair order. Disconnected placements are redrawn from
    /// scratch.
    pub fn random_geometric<R: Rng + ?Sized>(
        n: usize,
        target_links: usize,
        rng: &mut R,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let max_links = n * (n - 1) / 2;
        if target_links + 1 < n || target_links > max_links {
            return Err(GraphError::LinkTargetOutOfRange {
                target: target_links,
                min: n - 1,
                max: max_links,
            });
        }

        let mut pairs: Vec<(f64, NodeId, NodeId)> = Vec::with_capacity(max_links);
        for _ in 0..MAX_GEOMETRIC_REDRAWS {
            let positions: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.sample(Open01), rng.sample(Open01)))
                .collect();

            pairs.clear();
            for i in 0..n {
                for j in i + 1..n {
                    let dx = positions[i].0 - positions[j].0;
                    let dy = positions[i].1 - positions[j].1;
                    pairs.push((dx * dx + dy * dy, i, j));
                }
            }
            // stable sort keeps canonical order among equal distances
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let links: Vec<_> = pairs[..target_links].iter().map(|&(_, i, j)| (i, j)).collect();

            match Self::from_links(n, &links) {
                Ok(mut g) => {
                    g.positions = Some(positions);
                    g.family = Some(FamilyTag::Geometric);
                    return Ok(g);
                }
                Err(GraphError::Disconnected) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(GraphError::Infeasible {
            attempts: MAX_GEOMETRIC_REDRAWS,
        })
    }

    /// Parses the edge-list text format: a header line `n l` followed by
    /// `l` lines of `u v`. Blank lines and lines starting with `#` are
    /// skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing `n l` header".into(),
        })?;
        let (n, l) = parse_pair(hline, header)?;

        let mut links = Vec::with_capacity(l);
        for (lineno, line) in lines {
            links.push(parse_pair(lineno, line)?);
        }
        if links.len() != l {
            return Err(GraphError::Parse {
                line: hline,
                msg: format!("header declares {l} links, found {}", links.len()),
            });
        }
        Self::from_links(n, &links)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self, GraphError> {
        let text = fs::read_to_string(path)?;
        Self::parse_edge_list(&text)
    }

    /// Attaches positions from the `i x y` text format.
    pub fn with_positions_text(mut self, text: &str) -> Result<Self, GraphError> {
        let mut positions = vec![None; self.n];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| GraphError::Parse { line: idx + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected `i x y`, got {line:?}")));
            }
            let i: usize = fields[0].parse().map_err(|_| err(format!("bad node id {:?}", fields[0])))?;
            let x: f64 = fields[1].parse().map_err(|_| err(format!("bad coordinate {:?}", fields[1])))?;
            let y: f64 = fields[2].parse().map_err(|_| err(format!("bad coordinate {:?}", fields[2])))?;
            if i >= self.n {
                return Err(GraphError::NodeOutOfRange { node: i, n: self.n });
            }
            positions[i] = Some((x, y));
        }
        let positions: Option<Vec<_>> = positions.into_iter().collect();
        match positions {
            Some(p) => {
                self.positions = Some(p);
                Ok(self)
            }
            None => Err(GraphError::Parse {
                line: 0,
                msg: "positions file does not cover every node".into(),
            }),
        }
    }

    /// Renders the edge-list text format accepted by [`Graph::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.links.len());
        for &(u, v) in &self.links {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn with_family(mut self, tag: FamilyTag) -> Self {
        self.family = Some(tag);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[(NodeId, NodeId)] {
        &self.links
    }

    pub fn link(&self, e: LinkId) -> (NodeId, NodeId) {
        self.links[e]
    }

    /// Sorted `(neighbor, link id)` pairs of node `i`.
    pub fn neighbors(&self, i: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adjacency[i].len()
    }

    pub fn positions(&self) -> Option<&[(f64, f64)]> {
        self.positions.as_deref()
    }

    pub fn family_tag(&self) -> Option<FamilyTag> {
        self.family
    }

    pub fn are_adjacent(&self, i: NodeId, j: NodeId) -> bool {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(nb, _)| nb)
            .is_ok()
    }

    /// Degree shared by every node, if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let k = self.degree(0);
        (0..self.n).all(|i| self.degree(i) == k).then_some(k)
    }

    fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|d| d.is_some())
    }

    fn bfs_distances(&self, source: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &(v, _) in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest shortest-path hop count over all node pairs.
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .map(|s| {
                self.bfs_distances(s)
                    .into_iter()
                    .map(|d| d.unwrap_or(0))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn invariants(&self) -> GraphInvariants {
        let degrees = (0..self.n).map(|i| self.degree(i));
        GraphInvariants {
            n: self.n,
            l: self.links.len(),
            min_degree: degrees.clone().min().unwrap_or(0),
            max_degree: degrees.max().unwrap_or(0),
            diameter: self.diameter(),
            family: self.family,
        }
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let mut it = text.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<usize, GraphError> {
        let tok = tok.ok_or_else(|| GraphError::Parse {
            line,
            msg: format!("expected two integers, got {text:?}"),
        })?;
        tok.parse().map_err(|_| GraphError::Parse {
            line,
            msg: format!("not a non-negative integer: {tok:?}"),
        })
    };
    let a = parse(it.next())?;
    let b = parse(it.next())?;
    if it.next().is_some() {
        return Err(GraphError::Parse {
            line,
            msg: format!("trailing fields in {text:?}"),
        });
    }
    Ok((a, b))
}
