use std::sync::Arc;

use rand::Rng;
use vegnn_tensor::{Mat, ParamId, ParamStore, Tape, TensorError, Var};

use crate::topo::Topology;
use crate::{glorot, GnnError, Variant};

/// Where a layer's parameters come from: the store, the run seed feeding the
/// per-parameter init streams, and a name prefix.
pub struct Init<'a> {
    pub store: &'a mut ParamStore,
    pub seed: u64,
    pub prefix: String,
}

impl Init<'_> {
    /// Registers a Glorot-uniform `rows × cols` matrix. `fan_in` may be
    /// smaller than `rows` when some input columns are never active.
    pub fn weight(&mut self, name: &str, rows: usize, cols: usize, fan_in: usize) -> ParamId {
        let full = format!("{}.{name}", self.prefix);
        let v = glorot(self.seed, &full, rows, cols, fan_in, cols);
        self.store.add(&full, v)
    }

    pub fn bias(&mut self, name: &str, cols: usize) -> ParamId {
        self.store.add(&format!("{}.{name}", self.prefix), Mat::zeros((1, cols)))
    }
}

/// One convolution block. No biases; σ is relu.
#[derive(Clone, Debug, PartialEq)]
pub enum Conv {
    /// `relu(Â H Θ)`.
    Gcn { theta: ParamId },
    /// `relu(H Θ₁ + A H Θ₂)`.
    Multiscale { theta1: ParamId, theta2: ParamId },
    /// Single-head attention over `N(u) ∪ {u}`; `a = [a_dst; a_src]`.
    Gat { theta: ParamId, a_dst: ParamId, a_src: ParamId, slope: f64 },
    /// `relu(H Θ₁ + mean_{N(u)}(H) Θ₂)`.
    Sage { theta1: ParamId, theta2: ParamId },
    /// `stacks × depth` weights: `(Θ_prop, Θ_skip)` per layer of each stack.
    Arma { layers: Vec<Vec<(ParamId, ParamId)>> },
}

impl Conv {
    pub fn new(variant: Variant, init: &mut Init, d_in: usize, fan_in: usize, m: usize, arma: (usize, usize), slope: f64) -> Self {
        match variant {
            Variant::Gcn => Conv::Gcn { theta: init.weight("theta", d_in, m, fan_in) },
            Variant::Multiscale => {
                Conv::Multiscale { theta1: init.weight("theta1", d_in, m, fan_in), theta2: init.weight("theta2", d_in, m, fan_in) }
            }
            Variant::Gat => Conv::Gat {
                theta: init.weight("theta", d_in, m, fan_in),
                a_dst: init.weight("a_dst", m, 1, 2 * m),
                a_src: init.weight("a_src", m, 1, 2 * m),
                slope,
            },
            Variant::Sage => Conv::Sage { theta1: init.weight("theta1", d_in, m, fan_in), theta2: init.weight("theta2", d_in, m, fan_in) },
            Variant::Arma => {
                let (stacks, depth) = arma;
                let layers = (0..stacks.max(1))
                    .map(|s| {
                        (0..depth.max(1))
                            .map(|k| {
                                let (rows, fan) = if k == 0 { (d_in, fan_in) } else { (m, m) };
                                let prop = init.weight(&format!("s{s}.k{k}.prop"), rows, m, fan);
                                let skip = init.weight(&format!("s{s}.k{k}.skip"), d_in, m, fan_in);
                                (prop, skip)
                            })
                            .collect()
                    })
                    .collect();
                Conv::Arma { layers }
            }
        }
    }

    pub fn forward(&self, t: &mut Tape, store: &ParamStore, h: Var, topo: &Topology) -> Result<Var, TensorError> {
        match self {
            Conv::Gcn { theta } => {
                let w = t.param(store, *theta);
                let hw = t.matmul(h, w)?;
                let y = t.spmm(Arc::new(topo.gcn_norm()), hw)?;
                Ok(t.relu(y))
            }
            Conv::Multiscale { theta1, theta2 } => {
                let a = Arc::new(topo.adjacency());
                self_plus_neighbours(t, store, h, *theta1, *theta2, a)
            }
            Conv::Sage { theta1, theta2 } => {
                let a = Arc::new(topo.mean_adjacency());
                self_plus_neighbours(t, store, h, *theta1, *theta2, a)
            }
            Conv::Gat { theta, a_dst, a_src, slope } => {
                let w = t.param(store, *theta);
                let z = t.matmul(h, w)?;
                let (ad, as_) = (t.param(store, *a_dst), t.param(store, *a_src));
                let sd = t.matmul(z, ad)?;
                let ss = t.matmul(z, as_)?;
                let (src, dst) = topo.attention_pairs();
                let e_d = t.gather_rows(sd, dst.clone())?;
                let e_s = t.gather_rows(ss, src.clone())?;
                let e = t.add(e_d, e_s)?;
                let e = t.leaky_relu(e, *slope);
                let alpha = t.segment_softmax(e, dst.clone(), topo.num_vertices())?;
                let msg = t.gather_rows(z, src)?;
                let msg = t.mul_col(msg, alpha)?;
                let out = t.scatter_add_rows(msg, dst, topo.num_vertices())?;
                Ok(t.relu(out))
            }
            Conv::Arma { layers } => {
                let l_hat = Arc::new(topo.gcn_norm());
                let mut outs = Vec::with_capacity(layers.len());
                for stack in layers {
                    let mut x = h;
                    for &(prop, skip) in stack {
                        let wp = t.param(store, prop);
                        let ws = t.param(store, skip);
                        let xp = t.matmul(x, wp)?;
                        let xp = t.spmm(l_hat.clone(), xp)?;
                        let hs = t.matmul(h, ws)?;
                        let y = t.add(xp, hs)?;
                        x = t.relu(y);
                    }
                    outs.push(x);
                }
                let mut acc = outs[0];
                for &o in &outs[1..] {
                    acc = t.add(acc, o)?;
                }
                Ok(if outs.len() > 1 { t.scale(acc, 1.0 / outs.len() as f64) } else { acc })
            }
        }
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        match self {
            Conv::Gcn { theta } => vec![*theta],
            Conv::Multiscale { theta1, theta2 } | Conv::Sage { theta1, theta2 } => vec![*theta1, *theta2],
            Conv::Gat { theta, a_dst, a_src, .. } => vec![*theta, *a_dst, *a_src],
            Conv::Arma { layers } => layers.iter().flatten().flat_map(|&(p, s)| [p, s]).collect(),
        }
    }
}

fn self_plus_neighbours(
    t: &mut Tape,
    store: &ParamStore,
    h: Var,
    theta1: ParamId,
    theta2: ParamId,
    agg: Arc<vegnn_tensor::Csr>,
) -> Result<Var, TensorError> {
    let (w1, w2) = (t.param(store, theta1), t.param(store, theta2));
    let own = t.matmul(h, w1)?;
    let nb = t.matmul(h, w2)?;
    let nb = t.spmm(agg, nb)?;
    let y = t.add(own, nb)?;
    Ok(t.relu(y))
}

/// Number of vertices top-k pooling keeps out of `n`: `ceil(ratio · n)`,
/// at least one.
pub fn pooled_size(n: usize, ratio: f64) -> usize {
    (((ratio * n as f64) - 1e-9).ceil() as usize).clamp(1, n.max(1))
}

/// Self-attention pooling: `Z = tanh(Â H θ)`, keep the top
/// `ceil(ratio · n)` vertices of each graph, scale kept rows by their score.
#[derive(Clone, Debug, PartialEq)]
pub struct SagPool {
    pub theta: ParamId,
    pub ratio: f64,
}

/// Result of one pooling step.
#[derive(Debug)]
pub struct Pooled {
    pub h: Var,
    pub topo: Topology,
    /// Kept rows of the input, ascending.
    pub kept: Vec<usize>,
}

impl SagPool {
    pub fn new(init: &mut Init, m: usize, ratio: f64) -> Self {
        Self { theta: init.weight("theta", m, 1, m), ratio }
    }

    pub fn forward(&self, t: &mut Tape, store: &ParamStore, h: Var, topo: &Topology) -> Result<Pooled, GnnError> {
        let sizes = topo.sizes();
        if let Some(g) = sizes.iter().position(|&s| s == 0) {
            return Err(GnnError::EmptyGraph(g));
        }
        let w = t.param(store, self.theta);
        let s = t.matmul(h, w)?;
        let s = t.spmm(Arc::new(topo.gcn_norm()), s)?;
        let z = t.tanh(s);
        let kept = select_top(t.value(z), t.value(h), topo, self.ratio);
        let idx: Arc<[usize]> = kept.clone().into();
        let hk = t.gather_rows(h, idx.clone())?;
        let zk = t.gather_rows(z, idx)?;
        let out = t.mul_col(hk, zk)?;
        Ok(Pooled { h: out, topo: topo.induced(&kept), kept })
    }
}

/// Per graph, the rows with the highest score; ties go to the row with the
/// lexicographically larger features, then the lower index.
pub fn select_top(scores: &Mat, h: &Mat, topo: &Topology, ratio: f64) -> Vec<usize> {
    let mut by_graph: Vec<Vec<usize>> = vec![Vec::new(); topo.n_graphs];
    for (i, &g) in topo.graph_of.iter().enumerate() {
        by_graph[g].push(i);
    }
    let mut kept = Vec::new();
    for rows in &mut by_graph {
        let k = pooled_size(rows.len(), ratio);
        rows.sort_by(|&a, &b| {
            scores[[b, 0]]
                .total_cmp(&scores[[a, 0]])
                .then_with(|| {
                    h.row(b).iter().zip(h.row(a).iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .then(a.cmp(&b))
        });
        kept.extend_from_slice(&rows[..k.min(rows.len())]);
    }
    kept.sort_unstable();
    kept
}

/// Per graph `[mean ∥ max]` of the rows, `n_graphs × 2d`.
pub fn readout(t: &mut Tape, h: Var, topo: &Topology) -> Result<Var, GnnError> {
    if let Some(g) = topo.sizes().iter().position(|&s| s == 0) {
        return Err(GnnError::EmptyGraph(g));
    }
    let mean = t.segment_mean(h, topo.graph_of.clone(), topo.n_graphs)?;
    let max = t.segment_max(h, topo.graph_of.clone(), topo.n_graphs)?;
    Ok(t.concat_cols(&[mean, max])?)
}

/// `2m → m → ⌊m/2⌋ → classes` with relu hidden layers, dropout after the
/// first, log-softmax output.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<(ParamId, ParamId)>,
    pub dropout: f64,
}

impl Mlp {
    pub fn new(init: &mut Init, m: usize, classes: usize, dropout: f64) -> Self {
        let widths = [2 * m, m, (m / 2).max(1), classes];
        let layers = (0..3)
            .map(|i| {
                (init.weight(&format!("w{}", i + 1), widths[i], widths[i + 1], widths[i]), init.bias(&format!("b{}", i + 1), widths[i + 1]))
            })
            .collect();
        Self { layers, dropout }
    }

    pub fn forward(&self, t: &mut Tape, store: &ParamStore, x: Var, train: bool, rng: &mut impl Rng) -> Result<Var, TensorError> {
        let mut h = x;
        for (i, &(w, b)) in self.layers.iter().enumerate() {
            let (w, b) = (t.param(store, w), t.param(store, b));
            let y = t.matmul(h, w)?;
            h = t.add_row(y, b)?;
            if i + 1 < self.layers.len() {
                h = t.relu(h);
            }
            if i == 0 {
                h = t.dropout(h, self.dropout, train, rng);
            }
        }
        Ok(t.log_softmax(h))
    }
}
