//! Byzantine rewrites of a captured node's report.
//!
//! Every attack acts on one node at a time; captured nodes never pool their
//! values.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bh;
use crate::model::HypothesisSet;
use crate::report::PValueReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackModel {
    None,
    /// Knows the labels: nulls to 0, non-nulls to 1.
    Oracle,
    /// Local BH classification: classified nulls to 0, classified non-nulls to 1.
    BhClassifier,
    /// Local BH classification, then each class is rescaled into the other's range.
    EnhancedBhClassifier,
    /// Uniform permutation of values over the node's hypothesis ids.
    Shuffling,
}

impl AttackModel {
    pub const ALL: [AttackModel; 5] = [
        AttackModel::None,
        AttackModel::Oracle,
        AttackModel::BhClassifier,
        AttackModel::EnhancedBhClassifier,
        AttackModel::Shuffling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackModel::None => "none",
            AttackModel::Oracle => "oracle",
            AttackModel::BhClassifier => "bh-classifier",
            AttackModel::EnhancedBhClassifier => "enhanced",
            AttackModel::Shuffling => "shuffling",
        }
    }
}

impl fmt::Display for AttackModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackModel::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::param("attack", format!("unknown attack `{s}`")))
    }
}

/// How captured nodes are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Capture {
    /// A fresh uniformly random subset of size `round(lambda * d)` per trial.
    #[default]
    Random,
    /// A fixed list of node ids.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub model: AttackModel,
    /// Fraction of nodes captured.
    pub lambda_frac: f64,
    pub capture: Capture,
}

impl AttackConfig {
    pub fn new(model: AttackModel, lambda_frac: f64) -> Self {
        Self { model, lambda_frac, capture: Capture::Random }
    }

    pub fn none() -> Self {
        Self::new(AttackModel::None, 0.0)
    }

    /// `round(lambda * d)`.
    pub fn captured_count(&self, d: usize) -> Result<usize> {
        captured_count(d, self.lambda_frac)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let k = self.captured_count(d)?;
        if let Capture::Fixed(nodes) = &self.capture {
            if nodes.len() != k {
                return Err(Error::param(
                    "captured",
                    format!("{} fixed nodes given but round(lambda * d) = {k}", nodes.len()),
                ));
            }
            let mut sorted = nodes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != nodes.len() || sorted.last().is_some_and(|&x| x >= d) {
                return Err(Error::param("captured", format!("node ids must be distinct and < {d}")));
            }
        }
        Ok(())
    }

    /// Captured node ids, ascending.
    pub fn resolve<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.validate(d)?;
        match &self.capture {
            Capture::Random => select_captured(d, self.lambda_frac, rng),
            Capture::Fixed(nodes) => {
                let mut nodes = nodes.clone();
                nodes.sort_unstable();
                Ok(nodes)
            }
        }
    }
}

fn captured_count(d: usize, lambda_frac: f64) -> Result<usize> {
    let k = (lambda_frac * d as f64).round();
    if !(0.0..=d as f64).contains(&k) {
        return Err(Error::param("lambda", format!("round({lambda_frac} * {d}) is not in [0, {d}]")));
    }
    Ok(k as usize)
}

/// Uniformly random set of `round(lambda * d)` node ids, ascending.
pub fn select_captured<R: Rng + ?Sized>(d: usize, lambda_frac: f64, rng: &mut R) -> Result<Vec<usize>> {
    let k = captured_count(d, lambda_frac)?;
    let mut nodes = rand::seq::index::sample(rng, d, k).into_vec();
    nodes.sort_unstable();
    Ok(nodes)
}

pub fn oracle_attack(report: &PValueReport, hs: &HypothesisSet) -> PValueReport {
    let values = report.entries.iter().map(|&(id, _)| if hs.is_null(id) { 0.0 } else { 1.0 });
    report.with_values(values)
}

/// Local BH at level `q` with denominator `m = report.len()`.
fn classify(values: &[f64], q: f64) -> (Vec<bool>, usize) {
    bh::rejection_mask(values, q, values.len().max(1))
}

/// Returns the rewritten report and the local rejection count `R_a`.
pub fn bh_classifier_attack(report: &PValueReport, q: f64) -> (PValueReport, usize) {
    let (rejected, r_a) = classify(&report.values(), q);
    let out = report.with_values(rejected.into_iter().map(|r| if r { 1.0 } else { 0.0 }));
    (out, r_a)
}

/// Affine, order-preserving map of `[from.0, from.1]` onto `[to.0, to.1]`.
/// A zero-width source lands on the target midpoint.
fn rescale(x: f64, from: (f64, f64), to: (f64, f64)) -> f64 {
    let width = from.1 - from.0;
    if width > 0.0 {
        let y = to.0 + (x - from.0) / width * (to.1 - to.0);
        y.clamp(to.0, to.1)
    } else {
        0.5 * (to.0 + to.1)
    }
}

fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Swaps the value ranges of the locally classified non-nulls (N) and nulls (U).
///
/// Left unchanged when either class is empty, since there is no range to move
/// into.
pub fn enhanced_bh_classifier_attack(report: &PValueReport, q: f64) -> PValueReport {
    let values = report.values();
    let (rejected, _) = classify(&values, q);
    let pick = |want: bool| values.iter().zip(&rejected).filter(move |(_, &r)| r == want).map(|(&v, _)| v);
    let (Some(n_span), Some(u_span)) = (span(pick(true)), span(pick(false))) else {
        return report.clone();
    };
    let out = values.iter().zip(&rejected).map(
        |(&v, &r)| {
            if r {
                rescale(v, n_span, u_span)
            } else {
                rescale(v, u_span, n_span)
            }
        },
    );
    report.with_values(out)
}

/// Reassigns the node's values to its ids by a uniform permutation.
pub fn shuffling_attack<R: Rng + ?Sized>(report: &PValueReport, rng: &mut R) -> PValueReport {
    let mut values = report.values();
    values.shuffle(rng);
    report.with_values(values)
}

/// Result of attacking every captured node.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    /// Rewritten reports, one per captured node in the order given.
    pub reports: Vec<PValueReport>,
    /// Local BH rejection count per captured node, for the classifier attacks.
    pub r_a_per_node: Option<Vec<usize>>,
    /// True nulls among the captured hypotheses.
    pub m0_realized: usize,
}

/// Applies `model` independently to each captured node's report.
pub fn apply_attack<R: Rng + ?Sized>(
    model: AttackModel,
    captured: &[PValueReport],
    hs: &HypothesisSet,
    q: f64,
    rng: &mut R,
) -> AttackOutcome {
    let m0_realized = captured.iter().flat_map(|r| r.entries.iter()).filter(|&&(id, _)| hs.is_null(id)).count();
    let mut r_a = Vec::new();
    let reports = captured
        .iter()
        .map(|report| match model {
            AttackModel::None => report.clone(),
            AttackModel::Oracle => oracle_attack(report, hs),
            AttackModel::BhClassifier => {
                let (out, r) = bh_classifier_attack(report, q);
                r_a.push(r);
                out
            }
            AttackModel::EnhancedBhClassifier => {
                r_a.push(classify(&report.values(), q).1);
                enhanced_bh_classifier_attack(report, q)
            }
            AttackModel::Shuffling => shuffling_attack(report, rng),
        })
        .collect();
    let r_a_per_node = matches!(model, AttackModel::BhClassifier | AttackModel::EnhancedBhClassifier).then_some(r_a);
    AttackOutcome { reports, r_a_per_node, m0_realized }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Label;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn report(values: &[f64]) -> PValueReport {
        PValueReport::new(0, values.iter().copied().enumerate().collect()).unwrap()
    }

    fn values(r: &PValueReport) -> Vec<f64> {
        r.values()
    }

    #[test]
    fn oracle() {
        let hs = HypothesisSet::new(vec![Label::NonNull, Label::TrueNull, Label::NonNull], 1).unwrap();
        let r = PValueReport::new(0, vec![(1, 0.7), (2, 0.001)]).unwrap();
        assert_eq!(oracle_attack(&r, &hs).entries, vec![(1, 0.0), (2, 1.0)]);

        let nulls = HypothesisSet::new(vec![Label::TrueNull; 3], 1).unwrap();
        assert_eq!(values(&oracle_attack(&report(&[0.2, 0.5, 0.9]), &nulls)), vec![0.0; 3]);
        let alts = HypothesisSet::new(vec![Label::NonNull; 3], 1).unwrap();
        assert_eq!(values(&oracle_attack(&report(&[0.2, 0.5, 0.9]), &alts)), vec![1.0; 3]);
    }

    #[test]
    fn classifier() {
        // local thresholds 0.0167, 0.0333, 0.05: only 0.001 clears.
        let (out, r_a) = bh_classifier_attack(&report(&[0.001, 0.5, 0.9]), 0.05);
        assert_eq!(values(&out), vec![1.0, 0.0, 0.0]);
        assert_eq!(r_a, 1);

        let (out, r_a) = bh_classifier_attack(&report(&[1.0; 4]), 0.05);
        assert_eq!((values(&out), r_a), (vec![0.0; 4], 0));
        let (out, r_a) = bh_classifier_attack(&report(&[0.0; 4]), 0.05);
        assert_eq!((values(&out), r_a), (vec![1.0; 4], 4));
    }

    #[test]
    fn enhanced_degenerate_source() {
        // N = {0.01}, U = {0.5, 1.0}: U collapses onto 0.01, N goes to the U midpoint.
        let out = enhanced_bh_classifier_attack(&report(&[0.01, 0.5, 1.0]), 0.05);
        assert_eq!(values(&out), vec![0.75, 0.01, 0.01]);
    }

    #[test]
    fn enhanced_swaps_singletons() {
        let out = enhanced_bh_classifier_attack(&report(&[0.3, 0.01]), 0.05);
        assert_eq!(values(&out), vec![0.01, 0.3]);
    }

    #[test]
    fn enhanced_without_rejections_is_identity() {
        let r = report(&[0.2, 0.6, 0.9]);
        assert_eq!(enhanced_bh_classifier_attack(&r, 0.05), r);
        let all = report(&[0.0, 0.001]);
        assert_eq!(enhanced_bh_classifier_attack(&all, 0.05), all);
    }

    #[test]
    fn enhanced_affine_map() {
        // q = 0.2, m = 5: thresholds .04 .08 .12 .16 .2 -> N = {0.01, 0.05}, U = {0.4, 0.7, 1.0}.
        let out = enhanced_bh_classifier_attack(&report(&[0.01, 0.05, 0.4, 0.7, 1.0]), 0.2);
        let want = [0.4, 1.0, 0.01, 0.03, 0.05];
        for (got, want) in values(&out).iter().zip(want) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn shuffle_single_entry() {
        let r = report(&[0.42]);
        assert_eq!(shuffling_attack(&r, &mut ChaCha8Rng::seed_from_u64(1)), r);
    }

    #[test]
    fn shuffle_is_uniform() {
        let r = report(&[0.1, 0.2, 0.3]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let perms: Vec<[f64; 3]> =
            vec![[0.1, 0.2, 0.3], [0.1, 0.3, 0.2], [0.2, 0.1, 0.3], [0.2, 0.3, 0.1], [0.3, 0.1, 0.2], [0.3, 0.2, 0.1]];
        let mut counts = [0usize; 6];
        let trials = 100_000;
        for _ in 0..trials {
            let v = values(&shuffling_attack(&r, &mut rng));
            let k = perms.iter().position(|p| p[..] == v[..]).unwrap();
            counts[k] += 1;
        }
        let p = 1.0 / 6.0;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        for c in counts {
            assert!((c as f64 / trials as f64 - p).abs() < 3.0 * se + 1e-3, "{counts:?}");
        }
    }

    #[test]
    fn capture_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(select_captured(20, 0.0, &mut rng).unwrap().is_empty());
        assert_eq!(select_captured(20, 1.0, &mut rng).unwrap(), (0..20).collect::<Vec<_>>());
        let four = select_captured(20, 0.2, &mut rng).unwrap();
        assert_eq!(four.len(), 4);
        assert!(four.windows(2).all(|w| w[0] < w[1]) && four[3] < 20);
        assert_eq!(select_captured(20, 0.05, &mut rng).unwrap().len(), 1);
        assert!(select_captured(20, 1.5, &mut rng).is_err());
        assert!(select_captured(20, -0.5, &mut rng).is_err());
    }

    #[test]
    fn fixed_capture_validation() {
        let mut cfg = AttackConfig::new(AttackModel::Oracle, 0.4);
        cfg.capture = Capture::Fixed(vec![3, 1]);
        assert_eq!(cfg.resolve(5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap(), vec![1, 3]);
        cfg.capture = Capture::Fixed(vec![1]);
        assert!(cfg.validate(5).is_err());
        cfg.capture = Capture::Fixed(vec![1, 1]);
        assert!(cfg.validate(5).is_err());
        cfg.capture = Capture::Fixed(vec![1, 5]);
        assert!(cfg.validate(5).is_err());
    }

    #[test]
    fn attack_names_round_trip() {
        for a in AttackModel::ALL {
            assert_eq!(a.name().parse::<AttackModel>().unwrap(), a);
        }
        assert!("bogus".parse::<AttackModel>().is_err());
    }

    fn local_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![3 => 0.0..=1.0f64, 1 => 0.0..0.01f64, 1 => Just(0.0)], 1..40)
    }

    proptest! {
        #[test]
        fn oracle_emits_only_endpoints(v in local_vec(), seed in any::<u64>()) {
            let labels = {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                v.iter().map(|_| if rng.random::<bool>() { Label::TrueNull } else { Label::NonNull }).collect()
            };
            let hs = HypothesisSet::new(labels, 1).unwrap();
            let out = oracle_attack(&report(&v), &hs);
            prop_assert!(out.values().iter().all(|&p| p == 0.0 || p == 1.0));
        }

        #[test]
        fn classifier_ones_count_is_r_a(v in local_vec(), q in prop_oneof![Just(0.05), Just(0.2)]) {
            let (out, r_a) = bh_classifier_attack(&report(&v), q);
            prop_assert_eq!(out.values().iter().filter(|&&p| p == 1.0).count(), r_a);
            prop_assert_eq!(r_a, bh::rejection_count(&v, q, v.len()));
        }

        #[test]
        fn enhanced_preserves_order_within_class(v in local_vec(), q in prop_oneof![Just(0.05), Just(0.2)]) {
            let out = enhanced_bh_classifier_attack(&report(&v), q).values();
            let (rejected, _) = classify(&v, q);
            for i in 0..v.len() {
                prop_assert!((0.0..=1.0).contains(&out[i]));
                for j in 0..v.len() {
                    if rejected[i] == rejected[j] && v[i] < v[j] {
                        prop_assert!(out[i] <= out[j]);
                    }
                }
            }
        }

        #[test]
        fn shuffle_preserves_multiset(v in local_vec(), seed in any::<u64>()) {
            let r = report(&v);
            let out = shuffling_attack(&r, &mut ChaCha8Rng::seed_from_u64(seed));
            let ids: Vec<usize> = out.entries.iter().map(|e| e.0).collect();
            prop_assert_eq!(ids, (0..v.len()).collect::<Vec<_>>());
            let (mut a, mut b) = (v.clone(), out.values());
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
