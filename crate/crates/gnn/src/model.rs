use rand::Rng;
use serde::{Deserialize, Serialize};
use vegnn_tensor::{Mat, ParamStore, Tape, Var};

use crate::layers::{readout, Conv, Init, Mlp, SagPool};
use crate::topo::Batch;
use crate::{GnnError, Variant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GnnConfig {
    pub variant: Variant,
    pub m: usize,
    pub blocks: usize,
    pub pool_ratio: f64,
    pub dropout: f64,
    pub arma_stacks: usize,
    pub arma_depth: usize,
    pub leaky_slope: f64,
    pub classes: usize,
}

impl GnnConfig {
    pub fn new(variant: Variant, m: usize) -> Self {
        Self { variant, m, blocks: 3, pool_ratio: 0.5, dropout: 0.5, arma_stacks: 1, arma_depth: 1, leaky_slope: 0.2, classes: 2 }
    }
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self::new(Variant::Gcn, 8)
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: GnnConfig,
    in_dim: usize,
    fan_in: usize,
    seed: u64,
}

/// `blocks × (conv → pool → readout)`, readouts summed, then the MLP head.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: GnnConfig,
    pub in_dim: usize,
    pub fan_in: usize,
    pub seed: u64,
    pub store: ParamStore,
    convs: Vec<Conv>,
    pools: Vec<SagPool>,
    mlp: Mlp,
}

impl Model {
    /// `fan_in` is the number of input columns that are ever non-zero; it sets
    /// the init range of first-layer weights.
    pub fn new(config: GnnConfig, in_dim: usize, fan_in: usize, seed: u64) -> Self {
        let mut store = ParamStore::new();
        let m = config.m;
        let mut convs = Vec::new();
        let mut pools = Vec::new();
        for b in 0..config.blocks {
            let (d, f) = if b == 0 { (in_dim, fan_in) } else { (m, m) };
            let mut init = Init { store: &mut store, seed, prefix: format!("conv{b}") };
            convs.push(Conv::new(config.variant, &mut init, d, f, m, (config.arma_stacks, config.arma_depth), config.leaky_slope));
            let mut init = Init { store: &mut store, seed, prefix: format!("pool{b}") };
            pools.push(SagPool::new(&mut init, m, config.pool_ratio));
        }
        let mut init = Init { store: &mut store, seed, prefix: "mlp".into() };
        let mlp = Mlp::new(&mut init, m, config.classes, config.dropout);
        Self { config, in_dim, fan_in, seed, store, convs, pools, mlp }
    }

    pub fn convs(&self) -> &[Conv] {
        &self.convs
    }

    pub fn pools(&self) -> &[SagPool] {
        &self.pools
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    /// The summed graph representation, `n_graphs × 2m`.
    pub fn embed(&self, t: &mut Tape, store: &ParamStore, batch: &Batch) -> Result<Var, GnnError> {
        if batch.x.ncols() != self.in_dim {
            return Err(GnnError::InputWidth { got: batch.x.ncols(), want: self.in_dim });
        }
        let mut h = t.constant(batch.x.clone());
        let mut topo = batch.topo.clone();
        let mut total: Option<Var> = None;
        for (conv, pool) in self.convs.iter().zip(&self.pools) {
            h = conv.forward(t, store, h, &topo)?;
            let p = pool.forward(t, store, h, &topo)?;
            h = p.h;
            topo = p.topo;
            let r = readout(t, h, &topo)?;
            total = Some(match total {
                Some(acc) => t.add(acc, r)?,
                None => r,
            });
        }
        total.ok_or_else(|| GnnError::Checkpoint("model has no blocks".into()))
    }

    /// Log-probabilities, `n_graphs × classes`. Uses `store` for parameter
    /// values so callers can evaluate perturbed copies.
    pub fn forward_with(&self, t: &mut Tape, store: &ParamStore, batch: &Batch, train: bool, rng: &mut impl Rng) -> Result<Var, GnnError> {
        let e = self.embed(t, store, batch)?;
        Ok(self.mlp.forward(t, store, e, train, rng)?)
    }

    pub fn forward(&self, t: &mut Tape, batch: &Batch, train: bool, rng: &mut impl Rng) -> Result<Var, GnnError> {
        self.forward_with(t, &self.store, batch, train, rng)
    }

    /// Evaluation-mode log-probabilities.
    pub fn log_probs(&self, batch: &Batch) -> Result<Mat, GnnError> {
        let mut t = Tape::new();
        // Dropout is off in evaluation, so the generator is never drawn from.
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        let out = self.forward(&mut t, batch, false, &mut rng)?;
        Ok(t.value(out).clone())
    }

    /// Arg-max class per graph; ties go to the lower class.
    pub fn predict(&self, batch: &Batch) -> Result<Vec<usize>, GnnError> {
        let lp = self.log_probs(batch)?;
        Ok(lp
            .rows()
            .into_iter()
            .map(|r| r.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best }).0)
            .collect())
    }

    /// JSON header line followed by the parameter text.
    pub fn to_text(&self) -> String {
        let h = Header { config: self.config.clone(), in_dim: self.in_dim, fan_in: self.fan_in, seed: self.seed };
        format!("{}\n{}", serde_json::to_string(&h).expect("header serialises"), self.store.to_text())
    }

    pub fn from_text(text: &str) -> Result<Self, GnnError> {
        let (head, body) = text.split_once('\n').unwrap_or((text, ""));
        let h: Header = serde_json::from_str(head).map_err(|e| GnnError::Checkpoint(format!("header: {e}")))?;
        let mut model = Model::new(h.config, h.in_dim, h.fan_in, h.seed);
        let saved = ParamStore::from_text(body)?;
        if saved.len() != model.store.len() {
            return Err(GnnError::Checkpoint(format!("{} parameters, expected {}", saved.len(), model.store.len())));
        }
        for id in saved.ids() {
            let name = saved.name(id);
            let target = model.store.id(name).ok_or_else(|| GnnError::Checkpoint(format!("unexpected parameter `{name}`")))?;
            if saved.value(id).dim() != model.store.value(target).dim() {
                return Err(GnnError::Checkpoint(format!("`{name}` has the wrong shape")));
            }
            *model.store.value_mut(target) = saved.value(id).clone();
        }
        Ok(model)
    }
}
