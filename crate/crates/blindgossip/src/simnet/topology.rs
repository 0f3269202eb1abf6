use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Undirected simple graph on agents `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    neighbours: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    /// Builds from an edge list; rejects self-loops, duplicates and out-of-range ids.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, SimError> {
        let mut adj = vec![vec![false; n]; n];
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(SimError::Topology(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if a == b {
                return Err(SimError::Topology(format!("self-loop on {a}")));
            }
            if adj[a][b] {
                return Err(SimError::Topology(format!("duplicate edge ({a}, {b})")));
            }
            adj[a][b] = true;
            adj[b][a] = true;
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        let neighbours = adj.iter().map(|row| (0..n).filter(|&j| row[j]).collect()).collect();
        Ok(Self { n, neighbours, edges: list })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn ring(n: usize) -> Self {
        let edges: Vec<_> = match n {
            0 | 1 => vec![],
            2 => vec![(0, 1)],
            _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        };
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    /// Points uniform in the unit square, linked when closer than `radius`.
    /// Redraws until connected, up to `attempts` times.
    pub fn random_geometric<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R, attempts: usize) -> Result<Self, SimError> {
        for _ in 0..attempts {
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
                    if (dx * dx + dy * dy).sqrt() < radius {
                        edges.push((i, j));
                    }
                }
            }
            let t = Self::from_edges(n, &edges)?;
            if t.is_connected() {
                return Ok(t);
            }
        }
        Err(SimError::Topology(format!("no connected geometric graph with n = {n}, r = {radius} in {attempts} draws")))
    }

    /// Parses `"N\n i j\n ..."`; blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self, SimError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, first) = lines.next().ok_or_else(|| SimError::Topology("empty edge list".into()))?;
        let n: usize = first.parse().map_err(|_| SimError::Topology(format!("line 1: bad agent count {first:?}")))?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let ids: Vec<&str> = l.split_whitespace().collect();
            let parse = |s: &str| s.parse::<usize>().map_err(|_| SimError::Topology(format!("line {line}: bad id {s:?}")));
            match ids.as_slice() {
                [a, b] => edges.push((parse(a)?, parse(b)?)),
                _ => return Err(SimError::Topology(format!("line {line}: expected two ids"))),
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (a, b) in &self.edges {
            s.push_str(&format!("{a} {b}\n"));
        }
        s
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    pub fn neighbour_lists(&self) -> Vec<Vec<usize>> {
        self.neighbours.clone()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbours[a].binary_search(&b).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.neighbours[v] {
                if !std::mem::replace(&mut seen[w], true) {
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Named topology presets, as written in configs and on the command line:
/// `complete:N`, `ring:N`, `path:N`, `geometric:N:R`, `file:PATH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TopologySpec {
    Complete(usize),
    Ring(usize),
    Path(usize),
    Geometric { n: usize, radius: f64 },
    File(String),
}

pub const PRESETS: &str = "complete:N, ring:N, path:N, geometric:N:R, file:PATH";

impl TopologySpec {
    /// Builds the graph; geometric placement draws from `rng`.
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Topology, SimError> {
        match self {
            TopologySpec::Complete(n) => Ok(Topology::complete(*n)),
            TopologySpec::Ring(n) => Ok(Topology::ring(*n)),
            TopologySpec::Path(n) => Ok(Topology::path(*n)),
            TopologySpec::Geometric { n, radius } => Topology::random_geometric(*n, *radius, rng, 10_000),
            TopologySpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| SimError::Topology(format!("{path}: {e}")))?;
                Topology::parse_edge_list(&text)
            }
        }
    }
}

impl FromStr for TopologySpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::Topology(format!("unknown topology {s:?}; presets: {PRESETS}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let count = |v: &str| v.parse::<usize>().map_err(|_| bad());
        match kind {
            "complete" => Ok(TopologySpec::Complete(count(rest)?)),
            "ring" => Ok(TopologySpec::Ring(count(rest)?)),
            "path" => Ok(TopologySpec::Path(count(rest)?)),
            "geometric" => {
                let (n, r) = rest.split_once(':').ok_or_else(bad)?;
                let radius: f64 = r.parse().map_err(|_| bad())?;
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(bad());
                }
                Ok(TopologySpec::Geometric { n: count(n)?, radius })
            }
            "file" if !rest.is_empty() => Ok(TopologySpec::File(rest.to_string())),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for TopologySpec {
    type Error = SimError;

    fn try_from(s: String) -> Result<Self, SimError> {
        s.parse()
    }
}

impl From<TopologySpec> for String {
    fn from(t: TopologySpec) -> String {
        t.to_string()
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologySpec::Complete(n) => write!(f, "complete:{n}"),
            TopologySpec::Ring(n) => write!(f, "ring:{n}"),
            TopologySpec::Path(n) => write!(f, "path:{n}"),
            TopologySpec::Geometric { n, radius } => write!(f, "geometric:{n}:{radius}"),
            TopologySpec::File(p) => write!(f, "file:{p}"),
        }
    }
}
