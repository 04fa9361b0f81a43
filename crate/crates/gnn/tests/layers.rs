mod common;

use common::*;
use ndarray::{array, Array2};
use vegnn_gnn::{pooled_size, readout, select_top, Batch, Conv, GraphTensor, SagPool, Topology};
use vegnn_tensor::{Mat, ParamStore, Tape};

fn single(n: usize, edges: &[(usize, usize)]) -> Topology {
    Topology { graph_of: vec![0; n].into(), n_graphs: 1, edges: edges.to_vec() }
}

fn run(conv: &Conv, store: &ParamStore, h: &Mat, topo: &Topology) -> Mat {
    let mut t = Tape::new();
    let x = t.constant(h.clone());
    let y = conv.forward(&mut t, store, x, topo).unwrap();
    t.value(y).clone()
}

fn relu(m: Mat) -> Mat {
    m.mapv(|v| v.max(0.0))
}

fn dense_adj(n: usize, edges: &[(usize, usize)]) -> Mat {
    let mut a = Mat::zeros((n, n));
    for &(x, y) in edges {
        a[[x, y]] = 1.0;
        a[[y, x]] = 1.0;
    }
    a
}

fn dense_gcn_norm(n: usize, edges: &[(usize, usize)]) -> Mat {
    let a = dense_adj(n, edges) + Mat::eye(n);
    let d: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    Mat::from_shape_fn((n, n), |(i, j)| a[[i, j]] / (d[i] * d[j]).sqrt())
}

#[test]
fn gcn_single_vertex_and_dense_oracle() {
    let mut r = rng(1);
    let mut s = ParamStore::new();
    let theta = s.add("t", random_mat(&mut r, 3, 4));
    let conv = Conv::Gcn { theta };
    let h = random_mat(&mut r, 1, 3);
    let got = run(&conv, &s, &h, &single(1, &[]));
    assert!(max_abs_diff(&got, &relu(h.dot(s.value(theta)))) < 1e-15);

    let edges = [(0, 1), (1, 2), (2, 3), (0, 3), (1, 4)];
    let h = random_mat(&mut r, 5, 3);
    let got = run(&conv, &s, &h, &single(5, &edges));
    let want = relu(dense_gcn_norm(5, &edges).dot(&h).dot(s.value(theta)));
    assert!(max_abs_diff(&got, &want) < 1e-12);
}

#[test]
fn multiscale_triangle_hand_sum() {
    let mut s = ParamStore::new();
    let conv = Conv::Multiscale { theta1: s.add("a", Mat::eye(2)), theta2: s.add("b", Mat::eye(2)) };
    // Non-negative inputs keep relu the identity.
    let h = array![[1.0, 0.5], [2.0, 0.0], [0.25, 3.0]];
    let got = run(&conv, &s, &h, &single(3, &[(0, 1), (1, 2), (0, 2)]));
    let total = h.sum_axis(ndarray::Axis(0));
    for u in 0..3 {
        // h_u + sum of the other two = column totals.
        assert!((&got.row(u) - &total).iter().all(|v| v.abs() < 1e-15));
    }
    let iso = run(&conv, &s, &array![[-1.0, 2.0]], &single(1, &[]));
    assert_eq!(iso, array![[0.0, 2.0]]);
}

#[test]
fn sage_mean_aggregation() {
    let mut r = rng(2);
    let mut s = ParamStore::new();
    let (t1, t2) = (s.add("a", random_mat(&mut r, 3, 4)), s.add("b", random_mat(&mut r, 3, 4)));
    let conv = Conv::Sage { theta1: t1, theta2: t2 };
    let edges = [(0, 1), (0, 2), (2, 3)];
    let h = random_mat(&mut r, 5, 3);
    let got = run(&conv, &s, &h, &single(5, &edges));
    let a = dense_adj(5, &edges);
    let mut mean = Mat::zeros((5, 3));
    for u in 0..5 {
        let d = a.row(u).sum();
        if d > 0.0 {
            mean.row_mut(u).assign(&(a.row(u).dot(&h) / d));
        }
    }
    let want = relu(h.dot(s.value(t1)) + mean.dot(s.value(t2)));
    assert!(max_abs_diff(&got, &want) < 1e-12);
    // Vertex 4 is isolated.
    assert!(max_abs_diff(&got.slice(ndarray::s![4..5, ..]).to_owned(), &relu(h.slice(ndarray::s![4..5, ..]).dot(s.value(t1)))) < 1e-15);

    // Two identical neighbours average to one of them.
    let h2 = array![[1.0, 0.0, 0.0], [0.3, 0.7, 0.1], [0.3, 0.7, 0.1]];
    let got = run(&conv, &s, &h2, &single(3, &[(0, 1), (0, 2)]));
    let want = relu(h2.row(0).insert_axis(ndarray::Axis(0)).dot(s.value(t1)) + h2.row(1).insert_axis(ndarray::Axis(0)).dot(s.value(t2)));
    assert!(max_abs_diff(&got.slice(ndarray::s![0..1, ..]).to_owned(), &want) < 1e-15);
}

fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.2 * x
    }
}

#[test]
fn attention_dense_oracle() {
    let mut r = rng(3);
    let mut s = ParamStore::new();
    let theta = s.add("t", random_mat(&mut r, 3, 4));
    let a_dst = s.add("ad", random_mat(&mut r, 4, 1));
    let a_src = s.add("as", random_mat(&mut r, 4, 1));
    let conv = Conv::Gat { theta, a_dst, a_src, slope: 0.2 };
    // Star: centre 0 with leaves 1, 2.
    let edges = [(0, 1), (0, 2)];
    let h = random_mat(&mut r, 3, 3);
    let got = run(&conv, &s, &h, &single(3, &edges));
    let z = h.dot(s.value(theta));
    let adj = dense_adj(3, &edges) + Mat::eye(3);
    let mut want = Mat::zeros((3, 4));
    for u in 0..3 {
        let nb: Vec<usize> = (0..3).filter(|&v| adj[[u, v]] > 0.0).collect();
        let e: Vec<f64> = nb.iter().map(|&v| leaky(z.row(u).dot(&s.value(a_dst).column(0)) + z.row(v).dot(&s.value(a_src).column(0)))).collect();
        let mx = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|x| (x - mx).exp()).collect();
        let total: f64 = w.iter().sum();
        assert!((w.iter().map(|x| x / total).sum::<f64>() - 1.0).abs() < 1e-12);
        for (k, &v) in nb.iter().enumerate() {
            want.row_mut(u).scaled_add(w[k] / total, &z.row(v));
        }
    }
    assert!(max_abs_diff(&got, &relu(want)) < 1e-12);

    let iso = random_mat(&mut r, 1, 3);
    let got = run(&conv, &s, &iso, &single(1, &[]));
    assert!(max_abs_diff(&got, &relu(iso.dot(s.value(theta)))) < 1e-15);
}

#[test]
fn arma_cycle_oracle_and_single_vertex() {
    let mut r = rng(4);
    let mut s = ParamStore::new();
    let (p, k) = (s.add("p", random_mat(&mut r, 3, 2)), s.add("k", random_mat(&mut r, 3, 2)));
    let conv = Conv::Arma { layers: vec![vec![(p, k)]] };
    let edges = [(0, 1), (1, 2), (2, 3), (0, 3)];
    let h = random_mat(&mut r, 4, 3);
    let got = run(&conv, &s, &h, &single(4, &edges));
    let want = relu(dense_gcn_norm(4, &edges).dot(&h).dot(s.value(p)) + h.dot(s.value(k)));
    assert!(max_abs_diff(&got, &want) < 1e-12);
    let one = random_mat(&mut r, 1, 3);
    let got = run(&conv, &s, &one, &single(1, &[]));
    assert!(max_abs_diff(&got, &relu(one.dot(s.value(p)) + one.dot(s.value(k)))) < 1e-15);

    // Two stacks of depth two average; the skip term always reads the input.
    let mut s2 = ParamStore::new();
    let mut w = |name: &str, rows| s2.add(name, random_mat(&mut r, rows, 2));
    let l = vec![vec![(w("p00", 3), w("k00", 3)), (w("p01", 2), w("k01", 3))], vec![(w("p10", 3), w("k10", 3)), (w("p11", 2), w("k11", 3))]];
    let conv = Conv::Arma { layers: l.clone() };
    let got = run(&conv, &s2, &h, &single(4, &edges));
    let lh = dense_gcn_norm(4, &edges);
    let mut acc = Mat::zeros((4, 2));
    for stack in &l {
        let mut x = h.clone();
        for &(p, k) in stack {
            x = relu(lh.dot(&x).dot(s2.value(p)) + h.dot(s2.value(k)));
        }
        acc = acc + x;
    }
    assert!(max_abs_diff(&got, &(acc / 2.0)) < 1e-12);
}

#[test]
fn conv_equivariance() {
    let mut r = rng(5);
    for variant in vegnn_gnn::Variant::ALL {
        let mut s = ParamStore::new();
        let mut init = vegnn_gnn::Init { store: &mut s, seed: 9, prefix: "c".into() };
        let conv = Conv::new(variant, &mut init, 4, 4, 6, (1, 1), 0.2);
        for _ in 0..10 {
            let g = random_graph(&mut r, 7, 4, 0.3);
            let perm = random_perm(&mut r, 7);
            let pg = permute(&g, &perm);
            let a = run(&conv, &s, &g.x, &Batch::new(&[&g]).topo);
            let b = run(&conv, &s, &pg.x, &Batch::new(&[&pg]).topo);
            for i in 0..7 {
                let d = (&a.row(i) - &b.row(perm[i])).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(d < 1e-12, "{variant}");
            }
        }
    }
}

#[test]
fn pooled_sizes() {
    assert_eq!(pooled_size(4, 0.5), 2);
    assert_eq!(pooled_size(5, 0.5), 3);
    assert_eq!(pooled_size(1, 0.5), 1);
    assert_eq!(pooled_size(7, 1.0), 7);
}

#[test]
fn select_top_matches_sort_oracle() {
    let scores = array![[0.1], [0.9], [-0.3], [0.5], [0.7]];
    let h = Mat::zeros((5, 2));
    let topo = single(5, &[]);
    assert_eq!(select_top(&scores, &h, &topo, 0.5), vec![1, 3, 4]);
    // Two graphs, kept per graph.
    let topo = Topology { graph_of: vec![0, 0, 1, 1, 1].into(), n_graphs: 2, edges: vec![] };
    assert_eq!(select_top(&scores, &h, &topo, 0.5), vec![1, 3, 4]);
}

#[test]
fn sag_pool_ratio_one_keeps_graph() {
    let mut r = rng(6);
    let mut s = ParamStore::new();
    let pool = SagPool { theta: s.add("p", random_mat(&mut r, 3, 1)), ratio: 1.0 };
    let g = random_graph(&mut r, 6, 3, 0.4);
    let b = Batch::new(&[&g]);
    let mut t = Tape::new();
    let x = t.constant(b.x.clone());
    let out = pool.forward(&mut t, &s, x, &b.topo).unwrap();
    assert_eq!(out.kept, (0..6).collect::<Vec<_>>());
    assert_eq!(out.topo, b.topo);
    // Kept rows are scaled by tanh scores.
    let z = b.topo.gcn_norm().to_dense().dot(&b.x).dot(s.value(pool.theta)).mapv(f64::tanh);
    let want = &b.x * &z;
    assert!(max_abs_diff(t.value(out.h), &want) < 1e-12);
}

#[test]
fn sag_pool_keeps_ceil_half_and_induced_edges() {
    let mut r = rng(7);
    let mut s = ParamStore::new();
    let pool = SagPool { theta: s.add("p", random_mat(&mut r, 4, 1)), ratio: 0.5 };
    for _ in 0..200 {
        let n1 = r.gen_range(1..12);
        let n2 = r.gen_range(1..12);
        let (g1, g2) = (random_graph(&mut r, n1, 4, 0.3), random_graph(&mut r, n2, 4, 0.3));
        let b = Batch::new(&[&g1, &g2]);
        let mut t = Tape::new();
        let x = t.constant(b.x.clone());
        let out = pool.forward(&mut t, &s, x, &b.topo).unwrap();
        assert_eq!(out.topo.sizes(), vec![n1.div_ceil(2), n2.div_ceil(2)]);
        for &(a, c) in &out.topo.edges {
            let (ga, gc) = (out.kept[a], out.kept[c]);
            assert!(b.topo.edges.contains(&(ga.min(gc), ga.max(gc))));
        }
        let expected = b.topo.edges.iter().filter(|(a, c)| out.kept.contains(a) && out.kept.contains(c)).count();
        assert_eq!(out.topo.edges.len(), expected);
    }
}

use rand::Rng;

#[test]
fn readout_examples() {
    let mut t = Tape::new();
    let h = t.constant(array![[1.0, -2.0, 3.0]]);
    let r = readout(&mut t, h, &single(1, &[])).unwrap();
    assert_eq!(t.value(r), &array![[1.0, -2.0, 3.0, 1.0, -2.0, 3.0]]);
    let h = t.constant(array![[0.0, 0.0], [1.0, 1.0]]);
    let r = readout(&mut t, h, &single(2, &[])).unwrap();
    assert_eq!(t.value(r), &array![[0.5, 0.5, 1.0, 1.0]]);
    let empty = Topology { graph_of: vec![0, 0].into(), n_graphs: 2, edges: vec![] };
    assert!(readout(&mut t, h, &empty).is_err());
}

#[test]
fn readout_ignores_row_order() {
    let mut r = rng(8);
    for _ in 0..50 {
        let n = r.gen_range(1..10);
        let x = random_mat(&mut r, n, 5);
        let perm = random_perm(&mut r, n);
        let px = Array2::from_shape_fn((n, 5), |(i, j)| x[[perm[i], j]]);
        let mut t = Tape::new();
        let (a, b) = (t.constant(x), t.constant(px));
        let ra = readout(&mut t, a, &single(n, &[])).unwrap();
        let rb = readout(&mut t, b, &single(n, &[])).unwrap();
        assert!(max_abs_diff(t.value(ra), t.value(rb)) < 1e-12);
    }
}

#[test]
fn from_graph_encodes_rows_in_vertex_order() {
    use vegnn_core::graph::{GraphBuilder, LabelSymbol, Vocabulary};
    let mut b = GraphBuilder::new("g");
    b.add_vertex(5, [LabelSymbol::base("o")]).add_vertex(2, [LabelSymbol::base("c")]);
    b.add_edge(5, 2, [LabelSymbol::base("1")]);
    let g = b.build().unwrap();
    let vocab = Vocabulary::from_base_labels([&g]);
    let gt = GraphTensor::from_graph(&g, &vocab).unwrap();
    assert_eq!(gt.x, array![[1.0, 0.0], [0.0, 1.0]]);
    assert_eq!(gt.edges, vec![(0, 1)]);
}
