#![allow(dead_code)]

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vegnn_gnn::GraphTensor;
use vegnn_tensor::Mat;

/// A random graph on `n` vertices with one-hot features over `labels`
/// symbols; each possible edge is present with probability `p`.
pub fn random_graph(rng: &mut impl Rng, n: usize, labels: usize, p: f64) -> GraphTensor {
    let mut x = Mat::zeros((n, labels));
    for i in 0..n {
        x[[i, rng.gen_range(0..labels)]] = 1.0;
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    GraphTensor { x, edges }
}

/// The same graph with vertex `i` moved to row `perm[i]`.
pub fn permute(g: &GraphTensor, perm: &[usize]) -> GraphTensor {
    let n = g.num_vertices();
    let mut x = Mat::zeros(g.x.dim());
    for i in 0..n {
        x.row_mut(perm[i]).assign(&g.x.row(i));
    }
    let mut edges: Vec<(usize, usize)> =
        g.edges.iter().map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b]))).collect();
    edges.sort_unstable();
    GraphTensor { x, edges }
}

pub fn random_perm(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mat(rng: &mut impl Rng, r: usize, c: usize) -> Mat {
    Array2::from_shape_fn((r, c), |_| rng.gen_range(-1.0..1.0))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
