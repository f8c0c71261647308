//! Seeded topology generators.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError, NodeId};

/// A random spanning tree plus `extra_edges` distinct random chords, with
/// every node's port order shuffled. Pure function of its arguments.
pub fn generate_random_connected(
    n: usize,
    extra_edges: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let max = n * (n - 1) / 2;
    let requested = n - 1 + extra_edges;
    if requested > max {
        return Err(GraphError::InfeasibleEdgeCount { n, requested, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u32> = (1..=n as u32).collect();
    labels.shuffle(&mut rng);

    let mut present = vec![false; n * n];
    let mut edges = Vec::with_capacity(requested);
    for k in 1..n {
        let (a, b) = (labels[rng.gen_range(0..k)], labels[k]);
        let (i, j) = (a as usize - 1, b as usize - 1);
        present[i * n + j] = true;
        present[j * n + i] = true;
        edges.push((a, b));
    }

    if extra_edges > 0 {
        let mut candidates: Vec<(u32, u32)> = Vec::new();
        for a in 1..=n as u32 {
            for b in a + 1..=n as u32 {
                if !present[(a as usize - 1) * n + (b as usize - 1)] {
                    candidates.push((a, b));
                }
            }
        }
        let (chosen, _) = candidates.partial_shuffle(&mut rng, extra_edges);
        edges.extend_from_slice(chosen);
    }

    shuffled(n, &edges, &mut rng)
}

/// `k` cycles of `cluster_size` nodes each, joined into a random tree by
/// `k - 1` bridges. Cluster `c` holds nodes `c * size + 1 ..= (c + 1) * size`.
pub fn generate_clustered(k: usize, cluster_size: usize, seed: u64) -> Result<Graph, GraphError> {
    if k == 0 || cluster_size < 3 {
        return Err(GraphError::InvalidClusterShape {
            k,
            size: cluster_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = k * cluster_size;
    let node = |c: usize, i: usize| (c * cluster_size + i + 1) as u32;
    let mut edges = Vec::with_capacity(n + k - 1);
    for c in 0..k {
        for i in 0..cluster_size {
            edges.push((node(c, i), node(c, (i + 1) % cluster_size)));
        }
    }
    for c in 1..k {
        let other = rng.gen_range(0..c);
        let a = node(other, rng.gen_range(0..cluster_size));
        let b = node(c, rng.gen_range(0..cluster_size));
        edges.push((a, b));
    }
    shuffled(n, &edges, &mut rng)
}

fn shuffled(n: usize, edges: &[(u32, u32)], rng: &mut ChaCha8Rng) -> Result<Graph, GraphError> {
    let base = Graph::from_edges(n, edges)?;
    let mut lists: Vec<Vec<NodeId>> = base.nodes().map(|v| base.neighbors(v).to_vec()).collect();
    for list in lists.iter_mut() {
        list.shuffle(rng);
    }
    Graph::from_port_lists(lists)
}
