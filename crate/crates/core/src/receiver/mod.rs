//! The receiver chain for one frame: pilot-based channel estimation,
//! per-tap attack detection, the chosen combining strategy, and soft LLRs for
//! the data symbols.

mod combining;
mod detection;
mod frame;

pub use combining::{
    cluster_confidence, estimate_attack_statistics, estimate_channel, llr_term, ml_decode_uncoded, smart_combine,
    symbol_llr, ReceiverStrategy, SmartAction, SmartDecision, TapStatistics,
};
pub use detection::{
    analytic_pfalse, analytic_pmiss, analytic_q, detect_attack, gaussian_tail, gaussian_tail_inv, pilot_flipped,
    sigma2_for_q, DetectionReport, PilotObservation, TapDetection,
};
pub use frame::{place_pilots, Frame, PilotPlacement, DEFAULT_FRAME_LEN, DEFAULT_NUM_PILOTS};

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::{Error, Result};

/// Gain used as the polarity reference when testing pilots on a tap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PolarityReference {
    /// The receiver's channel-state knowledge of the tap (the true gain).
    #[default]
    Known,
    /// The plain pilot average on the tap itself.
    PilotEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverConfig {
    pub strategy: ReceiverStrategy,
    /// Taps eligible for combining, 0-based, ascending.
    pub combine_taps: Vec<usize>,
    pub sigma2: f64,
    pub reference: PolarityReference,
}

impl ReceiverConfig {
    pub fn new(strategy: ReceiverStrategy, mut combine_taps: Vec<usize>, sigma2: f64) -> Result<Self> {
        combine_taps.sort_unstable();
        combine_taps.dedup();
        if combine_taps.is_empty() {
            return Err(Error::param("receiver needs at least one tap to combine"));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::param(format!("noise variance must be positive, got {sigma2}")));
        }
        Ok(Self {
            strategy,
            combine_taps,
            sigma2,
            reference: PolarityReference::default(),
        })
    }

    pub fn with_reference(mut self, reference: PolarityReference) -> Self {
        self.reference = reference;
        self
    }

    /// Taps actually read by this strategy.
    pub fn active_taps(&self) -> Vec<usize> {
        match self.strategy {
            ReceiverStrategy::MainTapOnly => vec![0],
            _ => self.combine_taps.clone(),
        }
    }
}

/// Per-frame bookkeeping for the sweep statistics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameStats {
    /// Secondary taps examined for an attack.
    pub taps_checked: usize,
    /// Secondary taps declared attacked.
    pub taps_detected: usize,
    /// Detected taps whose cluster separation passed the gate.
    pub taps_gated: usize,
    /// Data symbols on gated taps handed to the smart classifier.
    pub smart_symbols: usize,
    /// Of those, symbols discarded for low confidence.
    pub smart_discarded: usize,
    pub smart_flipped: usize,
}

impl FrameStats {
    pub fn merge(&mut self, other: &FrameStats) {
        self.taps_checked += other.taps_checked;
        self.taps_detected += other.taps_detected;
        self.taps_gated += other.taps_gated;
        self.smart_symbols += other.smart_symbols;
        self.smart_discarded += other.smart_discarded;
        self.smart_flipped += other.smart_flipped;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameOutput {
    /// One LLR per data position, in frame order.
    pub llrs: Vec<f64>,
    pub detection: DetectionReport,
    pub stats: FrameStats,
}

/// Pilots of one tap paired with their known values.
pub fn tap_pilots(frame: &Frame, tap_obs: &[Complex64]) -> Vec<PilotObservation> {
    frame
        .pilot_positions()
        .iter()
        .map(|&k| PilotObservation {
            position: k,
            y: tap_obs[k],
            x: frame.symbols()[k],
        })
        .collect()
}

enum TapUse {
    Plain(Complex64),
    Smart(TapStatistics),
    Dropped,
}

/// Runs the receiver over one frame. `obs[l][k]` is the finger-`l` output for
/// symbol `k`; `known` is the receiver's channel-state knowledge, consulted
/// only as the polarity reference under [`PolarityReference::Known`].
pub fn process_frame(
    cfg: &ReceiverConfig,
    frame: &Frame,
    obs: &[Vec<Complex64>],
    known: &ChannelRealization,
) -> Result<FrameOutput> {
    let taps = cfg.active_taps();
    if let Some(&bad) = taps.iter().find(|&&t| t >= obs.len()) {
        return Err(Error::param(format!("tap {bad} not present in the observations")));
    }
    if obs.iter().any(|o| o.len() != frame.len()) {
        return Err(Error::structural("observation length differs from frame length"));
    }
    if frame.pilot_positions().is_empty() {
        return Err(Error::param("frame carries no pilots"));
    }
    let sigma = cfg.sigma2.sqrt();
    let mut stats = FrameStats::default();
    let mut report = DetectionReport {
        taps: vec![TapDetection::default(); obs.len()],
    };
    let mut uses = Vec::with_capacity(taps.len());
    for &l in &taps {
        let pilots = tap_pilots(frame, &obs[l]);
        let plain = estimate_channel(&pilots)?;
        if l == 0 || !cfg.strategy.uses_detection() {
            uses.push((l, TapUse::Plain(plain)));
            continue;
        }
        let reference = match cfg.reference {
            PolarityReference::Known => known.taps[l],
            PolarityReference::PilotEstimate => plain,
        };
        let det = detect_attack(&pilots, reference);
        stats.taps_checked += 1;
        let use_ = if !det.attacked {
            TapUse::Plain(plain)
        } else {
            stats.taps_detected += 1;
            match cfg.strategy {
                ReceiverStrategy::SmartCombine { .. } => {
                    let tap_stats = estimate_attack_statistics(&pilots, &det, sigma);
                    if tap_stats.gate_passed {
                        stats.taps_gated += 1;
                        TapUse::Smart(tap_stats)
                    } else {
                        TapUse::Dropped
                    }
                }
                _ => TapUse::Dropped,
            }
        };
        report.taps[l] = det;
        uses.push((l, use_));
    }

    let threshold = match cfg.strategy {
        ReceiverStrategy::SmartCombine { threshold } => threshold,
        _ => 0.0,
    };
    let mut llrs = Vec::with_capacity(frame.num_data());
    for &k in frame.data_positions() {
        let mut llr = 0.0;
        for (l, use_) in &uses {
            let y = obs[*l][k];
            match use_ {
                TapUse::Plain(h) => llr += llr_term(y, *h, cfg.sigma2),
                TapUse::Dropped => {}
                TapUse::Smart(ts) => {
                    let decision = smart_combine(y, ts, cfg.sigma2, threshold)?;
                    stats.smart_symbols += 1;
                    match decision.action {
                        SmartAction::Keep => {
                            llr += llr_term(y, ts.h_hat.expect("gated"), cfg.sigma2);
                        }
                        SmartAction::FlipPolarity => {
                            stats.smart_flipped += 1;
                            llr += llr_term(-y, ts.h_attack_hat.expect("gated"), cfg.sigma2);
                        }
                        SmartAction::Discard => stats.smart_discarded += 1,
                    }
                }
            }
        }
        llrs.push(llr);
    }
    Ok(FrameOutput {
        llrs,
        detection: report,
        stats,
    })
}
