use crate::params::ParamStore;
use crate::tape::Gradients;
use crate::Mat;
use ndarray::Zip;

/// Adam with L2 weight decay folded into the gradient (`g + λθ`).
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: u64,
    m: Vec<Mat>,
    v: Vec<Mat>,
}

impl Default for Adam {
    fn default() -> Self {
        Self::new(5e-4, 1e-4)
    }
}

impl Adam {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay, step: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One update of every parameter in `store`; parameters absent from
    /// `grads` see a zero gradient.
    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients) {
        while self.m.len() < store.len() {
            let dim = store.value(crate::ParamId(self.m.len())).dim();
            self.m.push(Mat::zeros(dim));
            self.v.push(Mat::zeros(dim));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, wd, lr, eps) = (self.beta1, self.beta2, self.weight_decay, self.lr, self.eps);
        for id in store.ids().collect::<Vec<_>>() {
            let zero;
            let g = match grads.get(id) {
                Some(g) => g,
                None => {
                    zero = Mat::zeros(store.value(id).dim());
                    &zero
                }
            };
            Zip::from(store.value_mut(id)).and(&mut self.m[id.0]).and(&mut self.v[id.0]).and(g).for_each(
                |th, m, v, &g| {
                    let g = g + wd * *th;
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *th -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                },
            );
        }
    }
}
