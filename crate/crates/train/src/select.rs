use vegnn_gnn::{GnnConfig, Model};

use crate::encode::EncodedDataset;
use crate::split::Split;
use crate::train::{evaluate, train_model, Examples, TrainConfig, Trained};
use crate::TrainError;

#[derive(Clone, Debug)]
pub struct Selection {
    pub m_star: usize,
    /// Validation accuracy of every candidate, ascending `m`.
    pub val_acc: Vec<(usize, f64)>,
    pub test_acc: f64,
    pub trained: Trained,
}

/// Trains one model per `m`, keeps the best validation accuracy (smaller `m`
/// on ties) and reports its test accuracy. Every candidate starts from
/// `cfg.seed`.
pub fn select_m(
    cfg: &TrainConfig,
    base: &GnnConfig,
    m_set: &[usize],
    data: &EncodedDataset,
    split: &Split,
) -> Result<Selection, TrainError> {
    let mut ms = m_set.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if ms.is_empty() || ms[0] == 0 {
        return Err(TrainError::Config("the m set must hold positive widths".into()));
    }
    let train = Examples::select(&data.graphs, &data.labels, &split.train);
    let val = Examples::select(&data.graphs, &data.labels, &split.val);
    let mut best: Option<(usize, f64, Trained)> = None;
    let mut val_acc = Vec::new();
    for m in ms {
        let config = GnnConfig { m, ..base.clone() };
        let model = Model::new(config, data.in_dim(), data.fan_in, cfg.seed);
        let trained = train_model(cfg, model, &train, &val)?;
        let (_, acc) = evaluate(&trained.model, &val, cfg.batch_size)?;
        val_acc.push((m, acc));
        if best.as_ref().map_or(true, |b| acc > b.1) {
            best = Some((m, acc, trained));
        }
    }
    let (m_star, _, trained) = best.expect("at least one candidate");
    let test = Examples::select(&data.graphs, &data.labels, &split.test);
    let (_, test_acc) = evaluate(&trained.model, &test, cfg.batch_size)?;
    Ok(Selection { m_star, val_acc, test_acc, trained })
}
