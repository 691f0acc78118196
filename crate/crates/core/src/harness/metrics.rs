use serde::{Deserialize, Serialize};

use crate::acquisition::{classify_point, Label};
use crate::error::{Error, Result};
use crate::gp::GPosterior;
use crate::problems::{GroundTruth, TruthLabel};

/// Classification quality on a truth grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub f1_super: f64,
    pub f1_sub: f64,
    /// Mean of `f1_super` and `f1_sub`.
    pub f1_macro: f64,
    /// Raw β-band counts before unknowns are resolved.
    pub n_super: usize,
    pub n_sub: usize,
    pub n_unknown: usize,
    /// The class was absent from both truth and predictions, so its F1 is 1.
    pub vacuous_super: bool,
    pub vacuous_sub: bool,
}

fn f1(tp: usize, fp: usize, fn_: usize) -> (f64, bool) {
    if tp + fp + fn_ == 0 {
        return (1.0, true);
    }
    // 2PR/(P+R) simplifies to 2TP/(2TP+FP+FN).
    ((2 * tp) as f64 / (2 * tp + fp + fn_) as f64, false)
}

/// Macro-F1 from per-point posterior summaries. Unknown points are resolved
/// by the sign of `mean − h`.
pub fn metrics_from_predictions(truth: &[TruthLabel], predictions: &[(f64, f64)], h: f64, beta: f64) -> MetricsRow {
    assert_eq!(truth.len(), predictions.len());
    let (mut n_super, mut n_sub, mut n_unknown) = (0, 0, 0);
    // [truth][predicted] with index 0 = super, 1 = sub.
    let mut confusion = [[0usize; 2]; 2];
    for (t, &(mean, std)) in truth.iter().zip(predictions) {
        let resolved = match classify_point(mean, std, h, beta) {
            Label::Super => {
                n_super += 1;
                TruthLabel::Super
            }
            Label::Sub => {
                n_sub += 1;
                TruthLabel::Sub
            }
            Label::Unknown => {
                n_unknown += 1;
                TruthLabel::of(mean, h)
            }
        };
        let ti = usize::from(*t == TruthLabel::Sub);
        let pi = usize::from(resolved == TruthLabel::Sub);
        confusion[ti][pi] += 1;
    }
    let (f1_super, vacuous_super) = f1(confusion[0][0], confusion[1][0], confusion[0][1]);
    let (f1_sub, vacuous_sub) = f1(confusion[1][1], confusion[0][1], confusion[1][0]);
    MetricsRow {
        f1_super,
        f1_sub,
        f1_macro: (f1_super + f1_sub) / 2.0,
        n_super,
        n_sub,
        n_unknown,
        vacuous_super,
        vacuous_sub,
    }
}

/// Posterior `(mean, std)` at every truth point.
pub fn predict_truth(gp: &GPosterior, truth: &GroundTruth) -> Result<Vec<(f64, f64)>> {
    truth.points.iter().map(|p| gp.mean_std(p)).collect()
}

pub fn evaluate_f1(gp: &GPosterior, truth: &GroundTruth, h: f64, beta: f64) -> Result<MetricsRow> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("truth set is empty".into()));
    }
    let preds = predict_truth(gp, truth)?;
    Ok(metrics_from_predictions(&truth.labels, &preds, h, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelFamily, KernelSpec, ObservationSet};
    use approx::assert_relative_eq;

    #[test]
    fn perfect_reproduction() {
        let truth = vec![TruthLabel::Super, TruthLabel::Sub, TruthLabel::Sub];
        let preds = vec![(2.0, 1e-6), (0.0, 1e-6), (-1.0, 1e-6)];
        let m = metrics_from_predictions(&truth, &preds, 1.0, 3.0);
        assert_eq!(m.f1_macro, 1.0);
        assert_eq!((m.n_super, m.n_sub, m.n_unknown), (1, 2, 0));
    }

    #[test]
    fn all_super_on_half_super_truth() {
        let n = 10;
        let truth: Vec<TruthLabel> = (0..n)
            .map(|i| if i < n / 2 { TruthLabel::Super } else { TruthLabel::Sub })
            .collect();
        let preds = vec![(5.0, 0.01); n];
        let m = metrics_from_predictions(&truth, &preds, 1.0, 3.0);
        assert_relative_eq!(m.f1_super, 2.0 / 3.0);
        assert_eq!(m.f1_sub, 0.0);
        assert_relative_eq!(m.f1_macro, 1.0 / 3.0);
    }

    #[test]
    fn prior_gp_resolves_to_sub() {
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 1, 1.0, 1.0).unwrap();
        let gp = GPosterior::fit(k, ObservationSet::new(0.1).unwrap()).unwrap();
        let truth = GroundTruth {
            points: vec![vec![0.0], vec![1.0], vec![2.0]],
            values: vec![0.0, 2.0, 0.0],
            labels: vec![TruthLabel::Sub, TruthLabel::Super, TruthLabel::Sub],
        };
        let m = evaluate_f1(&gp, &truth, 0.5, 1e6).unwrap();
        assert_eq!(m.n_unknown, 3);
        assert_eq!(m.f1_super, 0.0);
        assert_relative_eq!(m.f1_sub, 0.8);
    }

    #[test]
    fn absent_class_is_vacuous() {
        let truth = vec![TruthLabel::Sub; 4];
        let preds = vec![(0.0, 0.01); 4];
        let m = metrics_from_predictions(&truth, &preds, 1.0, 3.0);
        assert!(m.vacuous_super && !m.vacuous_sub);
        assert_eq!(m.f1_super, 1.0);
        assert_eq!(m.f1_macro, 1.0);
    }

    #[test]
    fn empty_truth_rejected() {
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 1, 1.0, 1.0).unwrap();
        let gp = GPosterior::fit(k, ObservationSet::new(0.1).unwrap()).unwrap();
        let truth = GroundTruth {
            points: vec![],
            values: vec![],
            labels: vec![],
        };
        assert!(evaluate_f1(&gp, &truth, 0.0, 3.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn macro_is_mean_of_classes(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..50);
            let truth: Vec<TruthLabel> = (0..n).map(|_| if rng.random() { TruthLabel::Super } else { TruthLabel::Sub }).collect();
            let preds: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..0.5))).collect();
            let m = metrics_from_predictions(&truth, &preds, 0.0, 2.0);
            proptest::prop_assert_eq!(m.f1_macro, (m.f1_super + m.f1_sub) / 2.0);
            proptest::prop_assert!((0.0..=1.0).contains(&m.f1_super) && (0.0..=1.0).contains(&m.f1_sub));
            proptest::prop_assert_eq!(m.n_super + m.n_sub + m.n_unknown, n);
        }
    }
}
