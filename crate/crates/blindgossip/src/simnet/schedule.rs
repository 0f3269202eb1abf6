use rand::Rng;

use super::Topology;

/// Random pair selection over the edges of a (possibly changing) topology.
///
/// A pair is not reselected while its two members are still each other's
/// last partner; for two agents there is no third party, so the rule is
/// suspended.
#[derive(Debug, Clone)]
pub struct GossipSchedule<R> {
    rng: R,
    last: Vec<Option<usize>>,
}

impl<R: Rng> GossipSchedule<R> {
    pub fn new(n: usize, rng: R) -> Self {
        Self { rng, last: vec![None; n] }
    }

    pub fn admissible(&self, t: &Topology) -> Vec<(usize, usize)> {
        let edges = t.edges();
        if t.len() <= 2 {
            return edges.to_vec();
        }
        let open: Vec<_> = edges
            .iter()
            .copied()
            .filter(|&(i, j)| !(self.last[i] == Some(j) && self.last[j] == Some(i)))
            .collect();
        // Only a graph whose edges form a matching can block everything.
        if open.is_empty() {
            edges.to_vec()
        } else {
            open
        }
    }

    /// Uniform over admissible edges; `None` for an edgeless graph.
    pub fn random_pair(&mut self, t: &Topology) -> Option<(usize, usize)> {
        let open = self.admissible(t);
        if open.is_empty() {
            return None;
        }
        let (i, j) = open[self.rng.gen_range(0..open.len())];
        // Randomize who initiates; the protocol is symmetric.
        let (i, j) = if self.rng.gen() { (i, j) } else { (j, i) };
        self.last[i] = Some(j);
        self.last[j] = Some(i);
        Some((i, j))
    }
}

/// A fixed sequence of pairs with each agent's last participation precomputed,
/// so its final update can be flagged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedSchedule {
    pub pairs: Vec<(usize, usize)>,
    pub last_step: Vec<Option<usize>>,
}

impl PlannedSchedule {
    pub fn from_pairs(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        let mut last_step = vec![None; n];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            last_step[i] = Some(k);
            last_step[j] = Some(k);
        }
        Self { pairs, last_step }
    }

    /// `steps` pairs on a static topology.
    pub fn generate<R: Rng>(t: &Topology, steps: u64, rng: R) -> Self {
        Self::generate_dynamic(&[(0, t.clone())], steps, rng)
    }

    /// Topology `k` applies from step `changes[k].0` on; the first entry must start at 0.
    pub fn generate_dynamic<R: Rng>(changes: &[(u64, Topology)], steps: u64, rng: R) -> Self {
        assert!(changes.first().is_some_and(|c| c.0 == 0), "topology schedule must start at step 0");
        let n = changes[0].1.len();
        let mut sched = GossipSchedule::new(n, rng);
        let mut pairs = Vec::new();
        for step in 0..steps {
            let t = &changes.iter().rev().find(|c| c.0 <= step).expect("starts at 0").1;
            match sched.random_pair(t) {
                Some(p) => pairs.push(p),
                None => break,
            }
        }
        Self::from_pairs(n, pairs)
    }

    pub fn is_final(&self, step: usize, agent: usize) -> bool {
        self.last_step[agent] == Some(step)
    }
}
