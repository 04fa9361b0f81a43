use statrs::distribution::{ContinuousCDF, Normal};

use crate::TrainError;

/// Largest number of non-zero differences handled by the exact null
/// distribution; above it the normal approximation is used.
pub const EXACT_MAX_N: usize = 25;

/// Differences and rank gaps closer than this are treated as equal.
const TIE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wilcoxon {
    /// `min(W⁺, W⁻)`.
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Two-sided.
    pub p: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub exact: bool,
}

/// Signed ranks of the non-zero differences `a - b`, average ranks for ties.
pub fn signed_ranks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| d.abs() > TIE_EPS).collect();
    d.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let mut ranks = vec![0.0; d.len()];
    let mut i = 0;
    while i < d.len() {
        let mut j = i + 1;
        while j < d.len() && d[j].abs() - d[i].abs() <= TIE_EPS {
            j += 1;
        }
        // Positions i..j share the mean of ranks i+1..=j.
        let r = (i + 1 + j) as f64 / 2.0;
        for k in i..j {
            ranks[k] = r.copysign(d[k]);
        }
        i = j;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test of paired samples.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<Wilcoxon, TrainError> {
    if a.len() != b.len() {
        return Err(TrainError::LengthMismatch(a.len(), b.len()));
    }
    let ranks = signed_ranks(a, b);
    let n = ranks.len();
    let w_plus: f64 = ranks.iter().filter(|r| **r > 0.0).sum();
    let w_minus: f64 = -ranks.iter().filter(|r| **r < 0.0).sum::<f64>();
    let w = w_plus.min(w_minus);
    if n == 0 {
        return Ok(Wilcoxon { w: 0.0, w_plus: 0.0, w_minus: 0.0, p: 1.0, n: 0, exact: true });
    }
    let abs: Vec<f64> = ranks.iter().map(|r| r.abs()).collect();
    let (p, exact) = if n <= EXACT_MAX_N { (exact_p(&abs, w), true) } else { (normal_p(&abs, w_plus), false) };
    Ok(Wilcoxon { w, w_plus, w_minus, p: p.clamp(f64::MIN_POSITIVE, 1.0), n, exact })
}

/// `2 · P(W⁺ ≤ w)` under the null, counting sign patterns over the given
/// ranks. Ranks are halves at worst, so doubling makes them integers.
fn exact_p(abs_ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = abs_ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let tail: f64 = counts[..=limit.min(total)].iter().sum();
    (2.0 * tail / 2f64.powi(abs_ranks.len() as i32)).min(1.0)
}

/// Normal approximation with tie and continuity corrections.
fn normal_p(abs_ranks: &[f64], w_plus: f64) -> f64 {
    let n = abs_ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = abs_ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_lists() {
        let a = [0.5, 0.7, 0.9];
        let w = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!((w.p, w.n, w.w), (1.0, 0, 0.0));
    }

    #[test]
    fn six_positive_differences() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [0.0; 6];
        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(w.w, 0.0);
        assert!((w.p - 0.03125).abs() < 1e-15);
        assert!(w.exact);
    }

    #[test]
    fn ties_get_average_ranks() {
        let r = signed_ranks(&[1.0, -1.0, 2.0, 0.0], &[0.0; 4]);
        assert_eq!(r, vec![1.5, -1.5, 3.0]);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(wilcoxon_signed_rank(&[1.0], &[]), Err(TrainError::LengthMismatch(1, 0))));
    }

    #[test]
    fn normal_branch_is_close_to_exact_for_moderate_n() {
        // 30 differences with alternating signs on small ranks.
        let a: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
        let b = vec![0.0; 30];
        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(!w.exact);
        let abs: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let exact = exact_p(&abs, w.w);
        assert!((w.p - exact).abs() < 0.01, "{} vs {exact}", w.p);
    }
}
