mod common;

use common::*;
use ndarray::s;
use rand::Rng;
use vegnn_gnn::{Batch, GnnConfig, GraphTensor, Model, Variant};
use vegnn_tensor::{check_gradients, Mat, Tape, TensorError};

fn eval(model: &Model, graphs: &[&GraphTensor]) -> Mat {
    model.log_probs(&Batch::new(graphs)).unwrap()
}

#[test]
fn outputs_are_log_normalised() {
    let mut r = rng(1);
    for v in Variant::ALL {
        let model = Model::new(GnnConfig::new(v, 8), 4, 4, 3);
        let gs: Vec<GraphTensor> = (0..5).map(|_| { let n = r.gen_range(1..12); random_graph(&mut r, n, 4, 0.3) }).collect();
        let lp = eval(&model, &gs.iter().collect::<Vec<_>>());
        assert_eq!(lp.dim(), (5, 2));
        for row in lp.rows() {
            let lse = row.iter().map(|x| x.exp()).sum::<f64>().ln();
            assert!(lse.abs() < 1e-10);
        }
    }
}

#[test]
fn permutation_invariance() {
    let mut r = rng(2);
    for v in Variant::ALL {
        let model = Model::new(GnnConfig::new(v, 8), 4, 4, 11);
        for _ in 0..30 {
            let n = r.gen_range(1..14);
            let g = random_graph(&mut r, n, 4, 0.25);
            let pg = permute(&g, &random_perm(&mut r, n));
            let d = max_abs_diff(&eval(&model, &[&g]), &eval(&model, &[&pg]));
            assert!(d < 1e-6, "{v}: {d}");
        }
    }
}

#[test]
fn batching_does_not_mix_graphs() {
    let mut r = rng(3);
    let model = Model::new(GnnConfig::new(Variant::Gat, 8), 4, 4, 5);
    let gs: Vec<GraphTensor> = (0..4).map(|_| random_graph(&mut r, 9, 4, 0.3)).collect();
    let together = eval(&model, &gs.iter().collect::<Vec<_>>());
    for (i, g) in gs.iter().enumerate() {
        let alone = eval(&model, &[g]);
        assert!(max_abs_diff(&together.slice(s![i..i + 1, ..]).to_owned(), &alone) < 1e-12);
    }
}

#[test]
fn whole_model_gradients() {
    let mut r = rng(4);
    for v in Variant::ALL {
        let model = Model::new(GnnConfig::new(v, 4), 3, 3, 21);
        let g = random_graph(&mut r, 6, 3, 0.4);
        let h = random_graph(&mut r, 5, 3, 0.4);
        let batch = Batch::new(&[&g, &h]);
        let check = check_gradients(&model.store, 1e-5, |t: &mut Tape, s| {
            let mut no_rng = rand::rngs::mock::StepRng::new(0, 0);
            let lp = model.forward_with(t, s, &batch, false, &mut no_rng).map_err(|e| match e {
                vegnn_gnn::GnnError::Tensor(e) => e,
                other => TensorError::Domain { op: "forward", msg: other.to_string() },
            })?;
            t.nll(lp, vec![0, 1].into())
        })
        .unwrap();
        assert!(check.max_rel_error < 1e-4, "{v}: {check:?}");
    }
}

#[test]
fn eval_mode_is_deterministic_and_checkpoint_round_trips() {
    let mut r = rng(5);
    let model = Model::new(GnnConfig::new(Variant::Arma, 8), 4, 3, 7);
    let g = random_graph(&mut r, 10, 4, 0.3);
    let a = eval(&model, &[&g]);
    assert_eq!(a, eval(&model, &[&g]));
    let back = Model::from_text(&model.to_text()).unwrap();
    assert_eq!(back, model);
    assert_eq!(eval(&back, &[&g]), a);
    assert!(Model::from_text("{}\n").is_err());
}

#[test]
fn same_seed_same_init_and_names_are_unique() {
    for v in Variant::ALL {
        let a = Model::new(GnnConfig::new(v, 8), 5, 5, 1);
        let b = Model::new(GnnConfig::new(v, 8), 5, 5, 1);
        assert_eq!(a.store, b.store);
        assert_ne!(a.store, Model::new(GnnConfig::new(v, 8), 5, 5, 2).store);
        // MLP widths 16 -> 8 -> 4 -> 2.
        let w3 = a.store.value(a.store.id("mlp.w3").unwrap());
        assert_eq!(w3.dim(), (4, 2));
    }
}

/// Extra input columns that are zero in every graph leave the outputs unchanged
/// when the active fan-in is the same.
#[test]
fn inert_columns_do_not_change_outputs() {
    let mut r = rng(6);
    for v in Variant::ALL {
        let base = Model::new(GnnConfig::new(v, 8), 4, 4, 13);
        let wide = Model::new(GnnConfig::new(v, 8), 7, 4, 13);
        let g = random_graph(&mut r, 9, 4, 0.3);
        let mut gw = g.clone();
        gw.x = ndarray::concatenate(ndarray::Axis(1), &[g.x.view(), Mat::zeros((9, 3)).view()]).unwrap();
        assert_eq!(eval(&base, &[&g]), eval(&wide, &[&gw]), "{v}");
    }
}

#[test]
fn wrong_width_is_an_error() {
    let model = Model::new(GnnConfig::new(Variant::Gcn, 8), 4, 4, 1);
    let g = GraphTensor { x: Mat::zeros((3, 5)), edges: vec![] };
    assert!(model.log_probs(&Batch::new(&[&g])).is_err());
}
