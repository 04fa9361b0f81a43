use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vegnn_core::seed::derive_seed;
use vegnn_gnn::{Batch, GraphTensor, Model};
use vegnn_tensor::{Adam, Tape};

use crate::TrainError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { max_epochs: 1000, batch_size: 128, patience: 50, lr: 5e-4, weight_decay: 1e-4, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.into()));
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be non-negative");
        }
        Ok(())
    }
}

/// Graphs with their class labels.
#[derive(Clone, Debug, Default)]
pub struct Examples<'a> {
    pub graphs: Vec<&'a GraphTensor>,
    pub labels: Vec<usize>,
}

impl<'a> Examples<'a> {
    pub fn select(graphs: &'a [GraphTensor], labels: &[usize], idx: &[usize]) -> Self {
        Self { graphs: idx.iter().map(|&i| &graphs[i]).collect(), labels: idx.iter().map(|&i| labels[i]).collect() }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

/// What [`EarlyStopping::observe`] concluded about the latest epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    Improved,
    Wait,
    Stop,
}

/// Stops after `patience` consecutive epochs without a strictly lower
/// validation loss.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    pub patience: usize,
    pub best: f64,
    /// 1-based epoch of the best loss; 0 before any observation.
    pub best_epoch: usize,
    epoch: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self { patience, best: f64::INFINITY, best_epoch: 0, epoch: 0 }
    }

    pub fn observe(&mut self, val_loss: f64) -> Stop {
        self.epoch += 1;
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = self.epoch;
            Stop::Improved
        } else if self.epoch - self.best_epoch >= self.patience {
            Stop::Stop
        } else {
            Stop::Wait
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Clone, Debug)]
pub struct Trained {
    /// Parameters from the best validation epoch.
    pub model: Model,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub best_val_acc: f64,
    pub history: Vec<EpochStats>,
}

/// Mean negative log-likelihood and accuracy in evaluation mode.
pub fn evaluate(model: &Model, data: &Examples, batch_size: usize) -> Result<(f64, f64), TrainError> {
    if data.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (gs, ys) in data.graphs.chunks(batch_size.max(1)).zip(data.labels.chunks(batch_size.max(1))) {
        let lp = model.log_probs(&Batch::new(gs))?;
        for (row, &y) in lp.rows().into_iter().zip(ys) {
            loss -= row[y];
            let pred = row.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b }).0;
            correct += usize::from(pred == y);
        }
    }
    Ok((loss / data.len() as f64, correct as f64 / data.len() as f64))
}

pub fn accuracy(model: &Model, data: &Examples) -> Result<f64, TrainError> {
    Ok(evaluate(model, data, 128)?.1)
}

/// Adam on the mean NLL over shuffled mini-batches, early stopping on the
/// validation loss. Returns the parameters of the best validation epoch.
pub fn train_model(cfg: &TrainConfig, mut model: Model, train: &Examples, val: &Examples) -> Result<Trained, TrainError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(TrainError::EmptyPartition("train"));
    }
    if val.is_empty() {
        return Err(TrainError::EmptyPartition("validation"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "train"));
    let mut adam = Adam::new(cfg.lr, cfg.weight_decay);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best_store = model.store.clone();
    let mut best_val_acc = 0.0;
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let gs: Vec<&GraphTensor> = chunk.iter().map(|&i| train.graphs[i]).collect();
            let ys: Vec<usize> = chunk.iter().map(|&i| train.labels[i]).collect();
            let batch = Batch::new(&gs);
            let mut t = Tape::new();
            let lp = model.forward(&mut t, &batch, true, &mut rng)?;
            let loss = t.nll(lp, ys.into())?;
            let l = t.scalar(loss);
            if !l.is_finite() {
                return Err(TrainError::NonFinite { epoch, loss: l });
            }
            total += l * chunk.len() as f64;
            let grads = t.backward(loss)?;
            adam.step(&mut model.store, &grads);
        }
        let (val_loss, val_acc) = evaluate(&model, val, cfg.batch_size)?;
        if !val_loss.is_finite() {
            return Err(TrainError::NonFinite { epoch, loss: val_loss });
        }
        history.push(EpochStats { epoch, train_loss: total / train.len() as f64, val_loss, val_acc });
        match stopper.observe(val_loss) {
            Stop::Improved => {
                best_store = model.store.clone();
                best_val_acc = val_acc;
            }
            Stop::Wait => {}
            Stop::Stop => break,
        }
    }
    log::debug!("stopped after {} epochs, best {} (val loss {:.4})", history.len(), stopper.best_epoch, stopper.best);
    model.store = best_store;
    Ok(Trained { model, best_epoch: stopper.best_epoch, best_val_loss: stopper.best, best_val_acc, history })
}
