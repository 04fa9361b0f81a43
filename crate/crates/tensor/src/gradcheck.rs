use crate::params::{ParamId, ParamStore};
use crate::tape::{Tape, Var};
use crate::TensorError;

/// Denominator floor for relative errors, so gradients that are zero up to
/// rounding compare on an absolute scale.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// Parameter name and flat index of the worst entry.
    pub worst: Option<(String, usize)>,
    pub entries: usize,
}

/// Compares backward-pass gradients of the scalar built by `f` against
/// central differences with step `h`, over every entry of every parameter.
pub fn check_gradients<F>(store: &ParamStore, h: f64, f: F) -> Result<GradCheck, TensorError>
where
    F: Fn(&mut Tape, &ParamStore) -> Result<Var, TensorError>,
{
    let mut tape = Tape::new();
    let loss = f(&mut tape, store)?;
    let grads = tape.backward(loss)?;
    let eval = |s: &ParamStore| -> Result<f64, TensorError> {
        let mut t = Tape::new();
        let l = f(&mut t, s)?;
        Ok(t.scalar(l))
    };
    let mut probe = store.clone();
    let mut out = GradCheck { max_rel_error: 0.0, worst: None, entries: 0 };
    for id in store.ids() {
        let analytic = grads.get_or_zero(id, store);
        for k in 0..analytic.len() {
            let orig = flat(store, id, k);
            set_flat(&mut probe, id, k, orig + h);
            let up = eval(&probe)?;
            set_flat(&mut probe, id, k, orig - h);
            let down = eval(&probe)?;
            set_flat(&mut probe, id, k, orig);
            let numeric = (up - down) / (2.0 * h);
            let a = analytic.iter().nth(k).copied().unwrap();
            let e = rel_error(a, numeric);
            out.entries += 1;
            if out.worst.is_none() || e > out.max_rel_error {
                out.max_rel_error = e;
                out.worst = Some((store.name(id).to_string(), k));
            }
        }
    }
    Ok(out)
}

fn flat(store: &ParamStore, id: ParamId, k: usize) -> f64 {
    *store.value(id).iter().nth(k).unwrap()
}

fn set_flat(store: &mut ParamStore, id: ParamId, k: usize, x: f64) {
    *store.value_mut(id).iter_mut().nth(k).unwrap() = x;
}
