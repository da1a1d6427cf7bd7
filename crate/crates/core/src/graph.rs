//! Heterogeneous Newman-Watts (HNW) networks.
//!
//! A ring of `N` nodes, each joined to every node within `kappa` lattice
//! spacings, plus `m` shortcuts. Every shortcut joins a node drawn uniformly
//! from the whole ring to a node drawn uniformly from a fixed set of `N_h`
//! hubs. Few hubs concentrate the shortcuts and make the degree sequence
//! heterogeneous; `N_h = N` recovers the ordinary Newman-Watts model.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::error::{config, Error, Result};

/// Undirected simple graph in compressed adjacency form.
///
/// Node ids are `0..node_count`. Neighbor lists are sorted, so iteration
/// order is deterministic. Instances are immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    kappa: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    hubs: Vec<usize>,
    shortcuts: Vec<(usize, usize)>,
}

impl Graph {
    /// Assembles a graph from a ring lattice, a hub set and a shortcut list.
    ///
    /// Shortcuts are normalized to `(low, high)` and must be distinct, must not
    /// duplicate a ring edge, and must touch at least one hub.
    pub fn from_parts(
        node_count: usize,
        kappa: usize,
        hubs: Vec<usize>,
        shortcuts: Vec<(usize, usize)>,
    ) -> Result<Self> {
        check_ring(node_count, kappa)?;

        let mut hubs = hubs;
        hubs.sort_unstable();
        if hubs.windows(2).any(|w| w[0] == w[1]) {
            return config("hub ids must be distinct");
        }
        if let Some(&h) = hubs.last() {
            if h >= node_count {
                return config(format!("hub id {h} out of range for {node_count} nodes"));
            }
        }

        let mut shortcuts: Vec<(usize, usize)> = shortcuts
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        shortcuts.sort_unstable();
        for w in shortcuts.windows(2) {
            if w[0] == w[1] {
                return config(format!("duplicate shortcut {} {}", w[0].0, w[0].1));
            }
        }
        for &(u, v) in &shortcuts {
            if v >= node_count {
                return config(format!("shortcut {u} {v} out of range"));
            }
            if u == v {
                return config(format!("self-loop at node {u}"));
            }
            if is_ring_pair(node_count, kappa, u, v) {
                return config(format!("shortcut {u} {v} duplicates a ring edge"));
            }
            if hubs.binary_search(&u).is_err() && hubs.binary_search(&v).is_err() {
                return config(format!("shortcut {u} {v} has no hub endpoint"));
            }
        }

        let mut degree = vec![2 * kappa; node_count];
        for &(u, v) in &shortcuts {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }

        let mut fill = offsets[..node_count].to_vec();
        let mut neighbors = vec![0; offsets[node_count]];
        let mut push = |x: usize, y: usize| {
            neighbors[fill[x]] = y;
            fill[x] += 1;
        };
        for x in 0..node_count {
            for d in 1..=kappa {
                let y = (x + d) % node_count;
                push(x, y);
                push(y, x);
            }
        }
        for &(u, v) in &shortcuts {
            push(u, v);
            push(v, u);
        }
        for x in 0..node_count {
            neighbors[offsets[x]..offsets[x + 1]].sort_unstable();
        }

        Ok(Self {
            node_count,
            kappa,
            offsets,
            neighbors,
            hubs,
            shortcuts,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Ring half-width: each node links to all nodes within this many spacings.
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn hub_ids(&self) -> &[usize] {
        &self.hubs
    }

    pub fn hub_count(&self) -> usize {
        self.hubs.len()
    }

    /// Shortcuts as `(low, high)` pairs in ascending order.
    pub fn shortcuts(&self) -> &[(usize, usize)] {
        &self.shortcuts
    }

    pub fn shortcut_count(&self) -> usize {
        self.shortcuts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.neighbors[self.offsets[x]..self.offsets[x + 1]]
    }

    #[inline]
    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.windows(2).map(|w| w[1] - w[0])
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.neighbors(x).binary_search(&y).is_ok()
    }

    pub fn is_hub(&self, x: usize) -> bool {
        self.hubs.binary_search(&x).is_ok()
    }

    /// All edges as `(low, high)` pairs, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count).flat_map(move |x| {
            self.neighbors(x)
                .iter()
                .copied()
                .filter(move |&y| y > x)
                .map(move |y| (x, y))
        })
    }

    /// Checks every structural invariant and reports the first violation.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count;
        let mut degree_sum = 0;
        for x in 0..n {
            let adj = self.neighbors(x);
            if adj.len() < 2 * self.kappa {
                return config(format!("node {x} has degree below 2*kappa"));
            }
            for w in adj.windows(2) {
                if w[0] >= w[1] {
                    return config(format!("adjacency of node {x} unsorted or duplicated"));
                }
            }
            for &y in adj {
                if y == x {
                    return config(format!("self-loop at node {x}"));
                }
                if y >= n || !self.has_edge(y, x) {
                    return config(format!("edge {x}-{y} is not symmetric"));
                }
            }
            for d in 1..=self.kappa {
                if !self.has_edge(x, (x + d) % n) {
                    return config(format!("ring edge {x}-{} missing", (x + d) % n));
                }
            }
            degree_sum += adj.len();
        }
        if degree_sum != 2 * (n * self.kappa + self.shortcuts.len()) {
            return config("degree sum does not equal 2(N*kappa + m)");
        }
        for &(u, v) in &self.shortcuts {
            if !self.is_hub(u) && !self.is_hub(v) {
                return config(format!("shortcut {u}-{v} has no hub endpoint"));
            }
        }
        Ok(())
    }
}

/// True when `u` and `v` are within `kappa` spacings of each other on the ring.
pub fn is_ring_pair(node_count: usize, kappa: usize, u: usize, v: usize) -> bool {
    let d = u.abs_diff(v);
    let d = d.min(node_count - d);
    d >= 1 && d <= kappa
}

fn check_ring(node_count: usize, kappa: usize) -> Result<()> {
    if kappa == 0 {
        return config("kappa must be at least 1");
    }
    if kappa > node_count.saturating_sub(1) / 2 {
        return config(format!(
            "ring of {node_count} nodes is too small for kappa={kappa} (need N >= 2*kappa+1)"
        ));
    }
    Ok(())
}

/// Periodic one-dimensional lattice: node `i` is joined to `i±1, ..., i±kappa`.
pub fn ring_lattice(node_count: usize, kappa: usize) -> Result<Graph> {
    Graph::from_parts(node_count, kappa, Vec::new(), Vec::new())
}

/// Number of node pairs that could still host a shortcut: pairs with at
/// least one hub endpoint that are not already ring edges.
pub fn shortcut_capacity(node_count: usize, kappa: usize, hubs: &[usize]) -> usize {
    let n = node_count;
    let pairs = |k: usize| k * k.saturating_sub(1) / 2;
    let mut is_hub = vec![false; n];
    for &h in hubs {
        is_hub[h] = true;
    }
    let touching = pairs(n) - pairs(n - hubs.len());
    let ring_touching = (0..n)
        .flat_map(|x| (1..=kappa).map(move |d| (x, (x + d) % n)))
        .filter(|&(x, y)| is_hub[x] || is_hub[y])
        .count();
    touching - ring_touching
}

/// Lower bound of [`shortcut_capacity`] over every possible hub placement.
/// A shortcut count at or below this is feasible whichever hubs are drawn.
pub fn guaranteed_shortcut_capacity(node_count: usize, kappa: usize, hub_count: usize) -> usize {
    let (n, h, kappa) = (node_count as u128, hub_count.min(node_count) as u128, kappa as u128);
    let pairs = |k: u128| k * k.saturating_sub(1) / 2;
    let touching = pairs(n) - pairs(n - h);
    // Ring edges touching a hub peak when no two hubs share a ring edge.
    let cap = touching.saturating_sub((n * kappa).min(2 * kappa * h));
    usize::try_from(cap).unwrap_or(usize::MAX)
}

/// Builds an HNW network.
///
/// Hubs are `hub_count` distinct nodes drawn uniformly without replacement.
/// Shortcuts are then drawn one at a time as (uniform node, uniform hub);
/// self-loops, ring edges and repeats are rejected and redrawn, so exactly
/// `shortcut_count` shortcuts end up in the graph. More than
/// `100 * shortcut_count` consecutive rejections aborts the build.
pub fn generate_hnw<R: Rng + ?Sized>(
    node_count: usize,
    kappa: usize,
    hub_count: usize,
    shortcut_count: usize,
    rng: &mut R,
) -> Result<Graph> {
    check_ring(node_count, kappa)?;
    if hub_count == 0 || hub_count > node_count {
        return config(format!(
            "hub count must lie in 1..={node_count}, got {hub_count}"
        ));
    }

    let hubs = index::sample(rng, node_count, hub_count).into_vec();
    let available = shortcut_capacity(node_count, kappa, &hubs);
    if shortcut_count > available {
        return Err(Error::InfeasibleShortcuts {
            requested: shortcut_count,
            available,
        });
    }

    let max_failures = 100 * shortcut_count;
    let mut placed = HashSet::with_capacity(shortcut_count);
    let mut shortcuts = Vec::with_capacity(shortcut_count);
    let mut failures = 0;
    while shortcuts.len() < shortcut_count {
        let u = rng.random_range(0..node_count);
        let h = hubs[rng.random_range(0..hub_count)];
        let pair = (u.min(h), u.max(h));
        if u == h || is_ring_pair(node_count, kappa, u, h) || !placed.insert(pair) {
            failures += 1;
            if failures > max_failures {
                return Err(Error::SamplingStalled {
                    failures,
                    placed: shortcuts.len(),
                    requested: shortcut_count,
                });
            }
            continue;
        }
        failures = 0;
        shortcuts.push(pair);
    }

    Graph::from_parts(node_count, kappa, hubs, shortcuts)
}

/// Summary of a degree sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeStats {
    pub node_count: usize,
    /// Sum of all degrees, i.e. twice the edge count.
    pub degree_sum: usize,
    pub mean_degree: f64,
    /// `(1/N) * sum_k k^2 N(k) - <k>`, the heterogeneity formula taken literally.
    pub paper_h: f64,
    /// `<k^2> - <k>^2`.
    pub variance: f64,
    /// Degree -> number of nodes with that degree.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let n = g.node_count();
    let mut histogram = BTreeMap::new();
    let mut sum: u128 = 0;
    let mut sum_sq: u128 = 0;
    for k in g.degrees() {
        *histogram.entry(k).or_insert(0) += 1;
        sum += k as u128;
        sum_sq += (k * k) as u128;
    }
    let nn = n as u128;
    let mean_degree = sum as f64 / n as f64;
    let second_moment = sum_sq as f64 / n as f64;
    // N * sum(k^2) - (sum k)^2 is an exact non-negative integer.
    let variance = (nn * sum_sq - sum * sum) as f64 / (nn * nn) as f64;
    DegreeStats {
        node_count: n,
        degree_sum: sum as usize,
        mean_degree,
        paper_h: second_moment - mean_degree,
        variance,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn five_cycle() {
        let g = ring_lattice(5, 1).unwrap();
        assert_eq!(g.edge_count(), 5);
        for x in 0..5 {
            assert_eq!(g.degree(x), 2);
        }
        assert_eq!(g.neighbors(0), &[1, 4]);
        assert_eq!(g.shortcut_count(), 0);
        assert!(g.hub_ids().is_empty());
    }

    #[test]
    fn five_nodes_kappa_two_is_complete() {
        let g = ring_lattice(5, 2).unwrap();
        for x in 0..5 {
            let expected: Vec<usize> = (0..5).filter(|&y| y != x).collect();
            assert_eq!(g.neighbors(x), expected.as_slice());
        }
    }

    #[test]
    fn default_ring() {
        let g = ring_lattice(2001, 2).unwrap();
        assert_eq!(g.edge_count(), 4002);
        assert!(g.degrees().all(|k| k == 4));
        g.validate().unwrap();
    }

    #[test]
    fn ring_too_small() {
        assert!(ring_lattice(4, 2).is_err());
        assert!(ring_lattice(2, 1).is_err());
        assert!(ring_lattice(10, 0).is_err());
        assert!(ring_lattice(3, 1).is_ok());
    }

    #[test]
    fn regular_stats() {
        let s = degree_stats(&ring_lattice(5, 1).unwrap());
        assert_eq!(s.mean_degree, 2.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.paper_h, 2.0);
        assert_eq!(s.histogram.get(&2), Some(&5));

        let s = degree_stats(&ring_lattice(2001, 2).unwrap());
        assert_eq!(s.mean_degree, 4.0);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn single_hub_takes_every_shortcut() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_hnw(201, 2, 1, 100, &mut rng).unwrap();
        g.validate().unwrap();
        let hub = g.hub_ids()[0];
        assert!(g.shortcuts().iter().all(|&(u, v)| u == hub || v == hub));
        assert_eq!(g.degree(hub), 4 + 100);
    }

    #[test]
    fn exact_shortcut_count_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for hubs in [1, 7, 41, 500, 2001] {
            let g = generate_hnw(2001, 2, hubs, 1000, &mut rng).unwrap();
            g.validate().unwrap();
            assert_eq!(g.shortcut_count(), 1000);
            assert_eq!(g.hub_count(), hubs);
            let s = degree_stats(&g);
            assert_eq!(s.degree_sum, 2 * (2001 * 2 + 1000));
            assert!((s.mean_degree - (4.0 + 2000.0 / 2001.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn capacity_counts_non_ring_hub_pairs() {
        // Brute-force count for a small ring.
        let n = 9;
        let kappa = 2;
        let hubs = [0, 4];
        let mut brute = 0;
        for u in 0..n {
            for v in u + 1..n {
                let touches = hubs.contains(&u) || hubs.contains(&v);
                if touches && !is_ring_pair(n, kappa, u, v) {
                    brute += 1;
                }
            }
        }
        assert_eq!(shortcut_capacity(n, kappa, &hubs), brute);
    }

    #[test]
    fn capacity_saturates_for_huge_rings() {
        assert_eq!(guaranteed_shortcut_capacity(usize::MAX, 2, usize::MAX), usize::MAX);
        assert!(check_ring(usize::MAX, usize::MAX).is_err());
        assert!(check_ring(5, 2).is_ok());
        assert!(check_ring(4, 2).is_err());
    }

    #[test]
    fn guaranteed_capacity_is_a_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, kappa) in [(7, 1), (9, 2), (15, 3), (30, 2)] {
            for h in 1..=n {
                let bound = guaranteed_shortcut_capacity(n, kappa, h);
                let mut min_seen = usize::MAX;
                for _ in 0..50 {
                    let hubs = index::sample(&mut rng, n, h).into_vec();
                    min_seen = min_seen.min(shortcut_capacity(n, kappa, &hubs));
                }
                assert!(bound <= min_seen, "n={n} kappa={kappa} h={h}");
            }
            // One hub: capacity is exact.
            assert_eq!(guaranteed_shortcut_capacity(n, kappa, 1), n - 1 - 2 * kappa);
            // All hubs: every non-ring pair.
            assert_eq!(
                guaranteed_shortcut_capacity(n, kappa, n),
                n * (n - 1) / 2 - n * kappa
            );
        }
    }

    #[test]
    fn infeasible_shortcut_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // One hub on an 11-ring with kappa 2 has 10 - 4 = 6 free partners.
        let ok = generate_hnw(11, 2, 1, 6, &mut rng).unwrap();
        assert_eq!(ok.shortcut_count(), 6);
        let err = generate_hnw(11, 2, 1, 7, &mut rng).unwrap_err();
        assert_eq!(
            err,
            Error::InfeasibleShortcuts {
                requested: 7,
                available: 6
            }
        );
    }

    #[test]
    fn bad_hub_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_hnw(20, 2, 0, 5, &mut rng).is_err());
        assert!(generate_hnw(20, 2, 21, 5, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_graph() {
        let a = generate_hnw(501, 2, 20, 250, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = generate_hnw(501, 2, 20, 250, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let c = generate_hnw(501, 2, 20, 250, &mut ChaCha8Rng::seed_from_u64(43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn from_parts_rejects_bad_shortcuts() {
        assert!(Graph::from_parts(10, 1, vec![0], vec![(0, 1)]).is_err()); // ring edge
        assert!(Graph::from_parts(10, 1, vec![0], vec![(3, 3)]).is_err());
        assert!(Graph::from_parts(10, 1, vec![0], vec![(3, 6)]).is_err()); // no hub
        assert!(Graph::from_parts(10, 1, vec![0], vec![(0, 5), (5, 0)]).is_err());
        assert!(Graph::from_parts(10, 1, vec![0, 0], vec![]).is_err());
        assert!(Graph::from_parts(10, 1, vec![0], vec![(0, 5)]).is_ok());
    }
}
