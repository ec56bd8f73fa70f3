//! Channel estimation, combining strategies, soft LLRs and the smart
//! combining classifier for taps whose attacker has an imperfect channel
//! estimate.

use num_complex::Complex64;

use super::detection::{PilotObservation, TapDetection};
use crate::{Bpsk, Error, Result};

/// How the receiver turns per-finger observations into symbol decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReceiverStrategy {
    /// Maximal-ratio combine every tap in the combine set.
    CombineAll,
    /// Use the main tap only.
    MainTapOnly,
    /// Combine the taps in the combine set whose pilots show no attack.
    DropDetectedTaps,
    /// Classify each symbol on a detected tap as kept, polarity-flipped or
    /// discarded, by the confidence metric against `threshold`.
    SmartCombine { threshold: f64 },
}

impl ReceiverStrategy {
    pub fn smart(threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(Error::param(format!(
                "smart-combining threshold must be >= 0, got {threshold}"
            )));
        }
        Ok(ReceiverStrategy::SmartCombine { threshold })
    }

    pub fn uses_detection(&self) -> bool {
        matches!(
            self,
            ReceiverStrategy::DropDetectedTaps | ReceiverStrategy::SmartCombine { .. }
        )
    }
}

/// Least-squares gain estimate: mean of `y x` over the pilots.
pub fn estimate_channel(pilots: &[PilotObservation]) -> Result<Complex64> {
    if pilots.is_empty() {
        return Err(Error::structural("channel estimation needs at least one pilot"));
    }
    let sum: Complex64 = pilots.iter().map(|p| p.y * p.x.value()).sum();
    Ok(sum / pilots.len() as f64)
}

/// Cluster statistics of one tap's pilots, split by the detection verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TapStatistics {
    /// Mean of `y x` over pilots that kept their polarity (estimates `h`).
    pub h_hat: Option<Complex64>,
    /// Mean of `-y x` over flipped pilots (estimates `h + 2ε`).
    pub h_attack_hat: Option<Complex64>,
    /// Whether the two cluster centres are more than `2 sigma` apart.
    pub gate_passed: bool,
    pub flipped_count: usize,
    pub unflipped_count: usize,
}

pub fn estimate_attack_statistics(pilots: &[PilotObservation], detection: &TapDetection, sigma: f64) -> TapStatistics {
    let (mut sum_u, mut n_u) = (Complex64::new(0.0, 0.0), 0usize);
    let (mut sum_f, mut n_f) = (Complex64::new(0.0, 0.0), 0usize);
    for p in pilots {
        let yx = p.y * p.x.value();
        if detection.flipped_positions.contains(&p.position) {
            sum_f -= yx;
            n_f += 1;
        } else {
            sum_u += yx;
            n_u += 1;
        }
    }
    let h_hat = (n_u > 0).then(|| sum_u / n_u as f64);
    let h_attack_hat = (n_f > 0).then(|| sum_f / n_f as f64);
    let gate_passed = match (h_hat, h_attack_hat) {
        (Some(u), Some(f)) => (f - u).norm() > 2.0 * sigma,
        _ => false,
    };
    TapStatistics {
        h_hat,
        h_attack_hat,
        gate_passed,
        flipped_count: n_f,
        unflipped_count: n_u,
    }
}

/// What to do with one symbol on an attacked tap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmartAction {
    Keep,
    FlipPolarity,
    Discard,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmartDecision {
    pub action: SmartAction,
    /// Log-likelihood ratio of the flipped cluster `±(h + 2ε)` against the
    /// clean cluster `±h`.
    pub confidence: f64,
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Flipped-versus-clean cluster confidence for one received symbol.
pub fn cluster_confidence(y: Complex64, h: Complex64, h_attack: Complex64, sigma2: f64) -> f64 {
    let d = |c: Complex64| -(y - c).norm_sqr() / sigma2;
    log_add_exp(d(h_attack), d(-h_attack)) - log_add_exp(d(h), d(-h))
}

/// Classifies `y`: confidence above `threshold` means the symbol sits in the
/// flipped cluster and its polarity is restored, below `-threshold` means it
/// was left alone, anything in between is discarded.
pub fn smart_combine(y: Complex64, stats: &TapStatistics, sigma2: f64, threshold: f64) -> Result<SmartDecision> {
    let (Some(h), Some(h_attack), true) = (stats.h_hat, stats.h_attack_hat, stats.gate_passed) else {
        return Err(Error::param(
            "smart combining requires tap statistics that passed the gate",
        ));
    };
    if !(sigma2 > 0.0) {
        return Err(Error::param("noise variance must be positive"));
    }
    let confidence = cluster_confidence(y, h, h_attack, sigma2);
    let action = if confidence > threshold {
        SmartAction::FlipPolarity
    } else if confidence < -threshold {
        SmartAction::Keep
    } else {
        SmartAction::Discard
    };
    Ok(SmartDecision { action, confidence })
}

/// LLR contribution of one observation `y = g x + CN(0, sigma2)`.
#[inline]
pub fn llr_term(y: Complex64, gain: Complex64, sigma2: f64) -> f64 {
    4.0 * (y * gain.conj()).re / sigma2
}

/// Maximal-ratio-combining LLR over `(observation, gain)` pairs. A symbol
/// whose polarity was restored enters as `(-y, h + 2ε)`.
pub fn symbol_llr(contributions: &[(Complex64, Complex64)], sigma2: f64) -> Result<f64> {
    if contributions.is_empty() {
        return Err(Error::structural("no taps to combine"));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::param("noise variance must be positive"));
    }
    Ok(contributions.iter().map(|&(y, g)| llr_term(y, g, sigma2)).sum())
}

/// Minimum-distance decision over the given taps; ties go to `+1`.
pub fn ml_decode_uncoded(y: &[Complex64], h: &[Complex64], taps: &[usize]) -> Result<Bpsk> {
    if y.len() != h.len() {
        return Err(Error::structural("observation and gain counts differ"));
    }
    if let Some(&bad) = taps.iter().find(|&&t| t >= y.len()) {
        return Err(Error::param(format!("tap {bad} out of range")));
    }
    let metric = |x: f64| -> f64 { taps.iter().map(|&l| (y[l] - h[l] * x).norm_sqr()).sum() };
    if metric(1.0) <= metric(-1.0) {
        Ok(Bpsk::Plus)
    } else {
        Ok(Bpsk::Minus)
    }
}

#[cfg(test)]
mod tests {
    use super::super::detection::detect_attack;
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pilots_for(h: Complex64, eps: Complex64, flips: &[bool]) -> Vec<PilotObservation> {
        flips
            .iter()
            .enumerate()
            .map(|(k, &f)| {
                let x = if k % 3 == 0 { Bpsk::Minus } else { Bpsk::Plus };
                let g = if f { -h - 2.0 * eps } else { h };
                PilotObservation {
                    position: k,
                    y: g * x.value(),
                    x,
                }
            })
            .collect()
    }

    #[test]
    fn estimate_channel_cases() {
        let h = c(0.4, -0.2);
        let clean = pilots_for(h, c(0.0, 0.0), &[false; 20]);
        assert!((estimate_channel(&clean).unwrap() - h).norm() < 1e-15);
        let all = pilots_for(h, c(0.0, 0.0), &[true; 20]);
        assert!((estimate_channel(&all).unwrap() + h).norm() < 1e-15);
        assert!(estimate_channel(&[]).is_err());
    }

    #[test]
    fn statistics_recover_offset() {
        let h = c(1.0, 0.0);
        let eps = c(0.5, 0.0);
        let flips: Vec<bool> = (0..20).map(|k| k % 2 == 0).collect();
        let pilots = pilots_for(h, eps, &flips);
        let det = detect_attack(&pilots, h);
        assert_eq!(det.flipped_positions.len(), 10);
        let stats = estimate_attack_statistics(&pilots, &det, 0.1);
        let diff = stats.h_attack_hat.unwrap() - stats.h_hat.unwrap();
        assert!((diff - 2.0 * eps).norm() < 1e-12);
        assert!(stats.gate_passed);
        assert_eq!((stats.flipped_count, stats.unflipped_count), (10, 10));
    }

    #[test]
    fn perfect_attack_fails_gate() {
        let h = c(0.0, 1.0);
        let flips: Vec<bool> = (0..20).map(|k| k % 3 == 1).collect();
        let pilots = pilots_for(h, c(0.0, 0.0), &flips);
        let det = detect_attack(&pilots, h);
        let stats = estimate_attack_statistics(&pilots, &det, 0.1);
        assert!(!stats.gate_passed);
        assert!(smart_combine(h, &stats, 0.01, 0.5).is_err());
        let none = detect_attack(&pilots_for(h, c(0.0, 0.0), &[false; 5]), h);
        let stats = estimate_attack_statistics(&pilots_for(h, c(0.0, 0.0), &[false; 5]), &none, 0.1);
        assert_eq!(stats.h_attack_hat, None);
        assert!(!stats.gate_passed);
    }

    fn gated(h: Complex64, ha: Complex64) -> TapStatistics {
        TapStatistics {
            h_hat: Some(h),
            h_attack_hat: Some(ha),
            gate_passed: true,
            flipped_count: 1,
            unflipped_count: 1,
        }
    }

    #[test]
    fn smart_decisions_at_cluster_centres() {
        let h = c(1.0, 0.0);
        let ha = c(3.0, 0.0);
        let stats = gated(h, ha);
        let d = smart_combine(ha, &stats, 0.1, 0.5).unwrap();
        assert_eq!(d.action, SmartAction::FlipPolarity);
        assert!(d.confidence > 10.0);
        let d = smart_combine(-ha, &stats, 0.1, 0.5).unwrap();
        assert_eq!(d.action, SmartAction::FlipPolarity);
        let d = smart_combine(h, &stats, 0.1, 0.5).unwrap();
        assert_eq!(d.action, SmartAction::Keep);
        assert!(d.confidence < -10.0);
    }

    #[test]
    fn equal_clusters_discard_everything() {
        let h = c(0.7, -0.3);
        let stats = gated(h, h);
        for y in [c(0.0, 0.0), h, -h, c(5.0, 2.0), c(-1.0, 0.1)] {
            let d = smart_combine(y, &stats, 0.3, 1e-9).unwrap();
            assert_eq!(d.confidence, 0.0);
            assert_eq!(d.action, SmartAction::Discard);
        }
    }

    #[test]
    fn confidence_is_stable_far_from_clusters() {
        // Both likelihoods underflow in the linear domain here.
        let v = cluster_confidence(c(60.0, 0.0), c(1.0, 0.0), c(3.0, 0.0), 0.01);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn llr_examples() {
        let h = c(0.6, 0.8);
        assert!((symbol_llr(&[(h, h)], 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((symbol_llr(&[(-h, h)], 1.0).unwrap() + 4.0).abs() < 1e-12);
        let two = symbol_llr(&[(h, h), (h, h)], 1.0).unwrap();
        assert!((two - 8.0).abs() < 1e-12);
        assert!(symbol_llr(&[], 1.0).is_err());
    }

    #[test]
    fn ml_decoding_cases() {
        let h = [c(0.8, 0.1), c(0.8, 0.1)];
        let y = [h[0] * -1.0, h[1] * -1.0];
        assert_eq!(ml_decode_uncoded(&y, &h, &[0, 1]).unwrap(), Bpsk::Minus);
        // second tap flipped: both hypotheses are equally far away
        let y = [h[0], -h[1]];
        let m = |x: f64| -> f64 { (0..2).map(|l| (y[l] - h[l] * x).norm_sqr()).sum() };
        assert!((m(1.0) - m(-1.0)).abs() < 1e-15);
        assert_eq!(ml_decode_uncoded(&y, &h, &[0, 1]).unwrap(), Bpsk::Plus);
        let y = [-h[0], h[1]];
        assert_eq!(ml_decode_uncoded(&y, &h, &[0]).unwrap(), Bpsk::Minus);
        assert!(ml_decode_uncoded(&y, &h, &[2]).is_err());
    }

    #[test]
    fn strategy_threshold_validation() {
        assert!(ReceiverStrategy::smart(-0.1).is_err());
        assert!(ReceiverStrategy::smart(0.5).unwrap().uses_detection());
        assert!(!ReceiverStrategy::CombineAll.uses_detection());
    }
}
