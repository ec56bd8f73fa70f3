//! Error counting with confidence intervals, a plug-in mutual information
//! estimator, and Monte Carlo miss / false-alarm rates for pilot-polarity
//! detection.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::attacker::{apply_attack, plan_flips, sample_estimate_error, AttackerConfig};
use crate::channel::{complex_gaussian, ChannelRealization};
use crate::receiver::{detect_attack, place_pilots, tap_pilots, Frame};
use crate::rng::{mix_seed, SimRng};
use crate::{Bpsk, Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at normal quantile
/// `z`. Returns `(0, 1)` when there are no trials.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// A rate with its sample count and 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub events: u64,
    pub trials: u64,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn new(events: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(events, trials, Z_95);
        let value = if trials == 0 {
            0.0
        } else {
            events as f64 / trials as f64
        };
        Self {
            events,
            trials,
            value,
            ci_low,
            ci_high,
        }
    }

    /// Wilson interval at an arbitrary quantile.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.events, self.trials, z)
    }
}

// ---------------------------------------------------------------------------
// Bit error rate

#[derive(Clone, Debug, PartialEq)]
pub struct BerRecord {
    pub scenario_id: String,
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub frames: u64,
}

impl BerRecord {
    pub fn new(
        scenario_id: impl Into<String>,
        snr_db: f64,
        bit_errors: u64,
        bits_total: u64,
        frames: u64,
    ) -> Result<Self> {
        if bit_errors > bits_total {
            return Err(Error::param(format!("{bit_errors} errors out of {bits_total} bits")));
        }
        Ok(Self {
            scenario_id: scenario_id.into(),
            snr_db,
            bit_errors,
            bits_total,
            frames,
        })
    }

    pub fn ber(&self) -> RateEstimate {
        RateEstimate::new(self.bit_errors, self.bits_total)
    }
}

/// Sums a set of records for the same scenario and SNR point.
pub fn ber_accumulate<'a, I>(records: I) -> Result<(BerRecord, RateEstimate)>
where
    I: IntoIterator<Item = &'a BerRecord>,
{
    let mut iter = records.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::structural("cannot aggregate zero BER records"))?;
    let mut total = first.clone();
    for r in iter {
        if r.scenario_id != total.scenario_id || r.snr_db.to_bits() != total.snr_db.to_bits() {
            return Err(Error::structural(format!(
                "cannot merge ({}, {} dB) into ({}, {} dB)",
                r.scenario_id, r.snr_db, total.scenario_id, total.snr_db
            )));
        }
        total.bit_errors += r.bit_errors;
        total.bits_total += r.bits_total;
        total.frames += r.frames;
    }
    let rate = total.ber();
    Ok((total, rate))
}

// ---------------------------------------------------------------------------
// Mutual information

pub const MIN_MI_SAMPLES: usize = 10_000;
pub const MIN_MI_BINS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiEstimate {
    pub value_bits: f64,
    pub bins: usize,
    pub samples: usize,
}

/// Plug-in estimate of `I(x; y)` in bits for a binary input and a complex
/// output quantised on a `bins x bins` grid.
///
/// The grid spans the sample mean ±4 standard deviations on each axis; values
/// outside are clamped into the edge cells. Marginals and joint are the
/// empirical frequencies. The plug-in estimator is biased upward by roughly
/// `(B - 1) / (2 n ln 2)` bits for `B` occupied output cells and `n`
/// samples, so an independent pair reads slightly above zero.
pub fn mutual_information_plugin(samples: &[(Bpsk, Complex64)], bins: usize) -> Result<MiEstimate> {
    if samples.len() < MIN_MI_SAMPLES {
        return Err(Error::param(format!(
            "need at least {MIN_MI_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if bins < MIN_MI_BINS {
        return Err(Error::param(format!(
            "need at least {MIN_MI_BINS} bins per axis, got {bins}"
        )));
    }
    let n = samples.len() as f64;
    let axis = |f: fn(&Complex64) -> f64| -> (f64, f64) {
        let mean = samples.iter().map(|(_, y)| f(y)).sum::<f64>() / n;
        let var = samples.iter().map(|(_, y)| (f(y) - mean).powi(2)).sum::<f64>() / n;
        let half = 4.0 * var.sqrt();
        (mean - half, 2.0 * half)
    };
    let (re_lo, re_span) = axis(|y| y.re);
    let (im_lo, im_span) = axis(|y| y.im);
    let cell = |v: f64, lo: f64, span: f64| -> usize {
        if span <= 0.0 {
            return 0;
        }
        let i = ((v - lo) / span * bins as f64).floor();
        i.clamp(0.0, (bins - 1) as f64) as usize
    };

    let mut joint = vec![[0u64; 2]; bins * bins];
    let mut px = [0u64; 2];
    for (x, y) in samples {
        let c = cell(y.re, re_lo, re_span) * bins + cell(y.im, im_lo, im_span);
        joint[c][x.to_bit() as usize] += 1;
        px[x.to_bit() as usize] += 1;
    }
    let mut mi = 0.0;
    for counts in &joint {
        let py = (counts[0] + counts[1]) as f64 / n;
        for b in 0..2 {
            if counts[b] == 0 {
                continue;
            }
            let pxy = counts[b] as f64 / n;
            mi += pxy * (pxy / (py * px[b] as f64 / n)).log2();
        }
    }
    Ok(MiEstimate {
        value_bits: mi.max(0.0),
        bins,
        samples: samples.len(),
    })
}

// ---------------------------------------------------------------------------
// Detection rates

pub const MIN_DETECTION_TRIALS: u64 = 10_000;

/// One secondary tap observed through a fixed gain, with or without an
/// attacker on it.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionScenario {
    pub frame_len: usize,
    pub num_pilots: usize,
    /// Gain of the monitored tap.
    pub gain: Complex64,
    /// Noise variance; zero gives noiseless observations.
    pub sigma2: f64,
    pub flip_prob: f64,
    pub estimate_error_fraction: f64,
    pub pilot_aware: bool,
}

/// Monte Carlo miss and false-alarm rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionRates {
    /// Missed detections among attacked frames with at least one flip.
    pub p_miss: RateEstimate,
    /// Detections among frames without an attack.
    pub p_false: RateEstimate,
}

/// Runs `trials` frames without an attacker and `trials` frames with one,
/// through pilot placement, attack, noise and pilot-polarity detection
/// against the known gain.
pub fn empirical_detection_rates(scenario: &DetectionScenario, trials: u64, seed: u64) -> Result<DetectionRates> {
    if trials < MIN_DETECTION_TRIALS {
        return Err(Error::param(format!(
            "need at least {MIN_DETECTION_TRIALS} trials, got {trials}"
        )));
    }
    if !(scenario.sigma2 >= 0.0) {
        return Err(Error::param("noise variance must be non-negative"));
    }
    if scenario.num_pilots == 0 || scenario.num_pilots > scenario.frame_len {
        return Err(Error::param("pilot count must be in 1..=frame length"));
    }
    let attacker = AttackerConfig::new(
        [1],
        scenario.flip_prob,
        scenario.estimate_error_fraction,
        scenario.pilot_aware,
    )?;
    let h = ChannelRealization::fixed(vec![Complex64::new(1.0, 0.0), scenario.gain], 0);
    let num_data = scenario.frame_len - scenario.num_pilots;

    let mut false_alarms = 0;
    let mut misses = 0;
    let mut attacked_frames = 0;
    for t in 0..trials {
        let mut rng = SimRng::seed_from_u64(mix_seed(seed, &[t]));
        let pilots = place_pilots(rng.random(), t, scenario.frame_len, scenario.num_pilots)?;
        let data: Vec<Bpsk> = (0..num_data).map(|_| Bpsk::from_bit(rng.random_range(0..2))).collect();
        let frame = Frame::new(t, scenario.frame_len, &pilots, &data)?;
        for attacked in [false, true] {
            let cfg = if attacked {
                attacker.clone()
            } else {
                AttackerConfig::none()
            };
            let mask = plan_flips(&frame, 2, &cfg, &mut rng)?;
            let err = sample_estimate_error(&h, &cfg, &mut rng);
            let mut obs = apply_attack(frame.symbols(), &h, &mask, &err)?.swap_remove(1);
            if scenario.sigma2 > 0.0 {
                for y in obs.iter_mut() {
                    *y += complex_gaussian(scenario.sigma2, &mut rng);
                }
            }
            let detected = detect_attack(&tap_pilots(&frame, &obs), scenario.gain).attacked;
            if !attacked {
                false_alarms += u64::from(detected);
            } else if mask.flips_on_tap(1) > 0 {
                attacked_frames += 1;
                misses += u64::from(!detected);
            }
        }
    }
    Ok(DetectionRates {
        p_miss: RateEstimate::new(misses, attacked_frames),
        p_false: RateEstimate::new(false_alarms, trials),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::receiver::{analytic_pfalse, sigma2_for_q};

    fn record(errors: u64, bits: u64) -> BerRecord {
        BerRecord::new("A-none,C-1", 3.0, errors, bits, 1).unwrap()
    }

    #[test]
    fn wilson_reference_values() {
        // 10 of 100 at 95%: textbook interval (0.0552, 0.1744).
        let (lo, hi) = wilson_interval(10, 100, Z_95);
        assert!((lo - 0.05523).abs() < 1e-4, "{lo}");
        assert!((hi - 0.17437).abs() < 1e-4, "{hi}");
        let (lo, hi) = wilson_interval(0, 50, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.08);
        assert_eq!(wilson_interval(0, 0, Z_95), (0.0, 1.0));
    }

    #[test]
    fn ber_accumulate_sums_counts() {
        let (total, rate) = ber_accumulate(&[record(3, 100), record(7, 100)]).unwrap();
        assert_eq!((total.bit_errors, total.bits_total, total.frames), (10, 200, 2));
        assert!((rate.value - 0.05).abs() < 1e-15);
        assert!(rate.ci_low < 0.05 && rate.ci_high > 0.05);
    }

    #[test]
    fn ber_accumulate_rejects_empty_and_mixed() {
        assert!(ber_accumulate(&[]).is_err());
        let mut other = record(1, 10);
        other.scenario_id = "A-2,C-12".into();
        assert!(matches!(
            ber_accumulate(&[record(1, 10), other]),
            Err(Error::Structural(_))
        ));
        let mut other = record(1, 10);
        other.snr_db = 4.0;
        assert!(ber_accumulate(&[record(1, 10), other]).is_err());
        assert!(BerRecord::new("x", 0.0, 11, 10, 1).is_err());
    }

    fn bpsk_samples(n: usize, sigma2: f64, flip_prob: f64, seed: u64) -> Vec<(Bpsk, Complex64)> {
        let mut rng = SimRng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x = Bpsk::from_bit(rng.random_range(0..2));
                let sign = if rng.random_bool(flip_prob) { -1.0 } else { 1.0 };
                (
                    x,
                    Complex64::new(sign * x.value(), 0.0) + complex_gaussian(sigma2, &mut rng),
                )
            })
            .collect()
    }

    #[test]
    fn mi_near_noiseless_is_one_bit() {
        let est = mutual_information_plugin(&bpsk_samples(100_000, 1e-4, 0.0, 1), 16).unwrap();
        assert!(est.value_bits > 0.95, "{}", est.value_bits);
        assert!(est.value_bits <= 1.05);
    }

    #[test]
    fn mi_independent_is_near_zero() {
        let mut rng = SimRng::seed_from_u64(2);
        let samples: Vec<_> = (0..100_000)
            .map(|_| (Bpsk::from_bit(rng.random_range(0..2)), complex_gaussian(1.0, &mut rng)))
            .collect();
        let est = mutual_information_plugin(&samples, 16).unwrap();
        assert!(est.value_bits < 0.02, "{}", est.value_bits);
    }

    #[test]
    fn mi_compound_flip_channel_is_near_zero() {
        let est = mutual_information_plugin(&bpsk_samples(100_000, 1.0, 0.5, 3), 16).unwrap();
        assert!(est.value_bits < 0.02, "{}", est.value_bits);
    }

    #[test]
    fn mi_non_increasing_in_noise() {
        let mut last = f64::INFINITY;
        for (i, sigma2) in [0.05, 0.2, 0.5, 1.0, 2.0, 5.0].into_iter().enumerate() {
            let v = mutual_information_plugin(&bpsk_samples(50_000, sigma2, 0.0, 10 + i as u64), 16)
                .unwrap()
                .value_bits;
            assert!(v <= last + 0.02, "{sigma2}: {v} after {last}");
            last = v;
        }
    }

    #[test]
    fn mi_rejects_small_inputs() {
        assert!(mutual_information_plugin(&bpsk_samples(9_999, 1.0, 0.0, 4), 16).is_err());
        assert!(mutual_information_plugin(&bpsk_samples(10_000, 1.0, 0.0, 4), 7).is_err());
    }

    fn scenario(sigma2: f64, pilot_aware: bool) -> DetectionScenario {
        DetectionScenario {
            frame_len: 100,
            num_pilots: 20,
            gain: Complex64::new(0.6, -0.8),
            sigma2,
            flip_prob: 0.5,
            estimate_error_fraction: 0.0,
            pilot_aware,
        }
    }

    #[test]
    fn noiseless_rates() {
        let rates = empirical_detection_rates(&scenario(0.0, false), 10_000, 7).unwrap();
        assert_eq!(rates.p_false.events, 0);
        assert!(rates.p_miss.value < 1e-3);
        assert!(rates.p_miss.trials > 9_990);
        let aware = empirical_detection_rates(&scenario(0.0, true), 10_000, 7).unwrap();
        assert_eq!(aware.p_miss.value, 1.0);
    }

    #[test]
    fn false_alarm_matches_closed_form() {
        for lp in [5, 10, 20] {
            let q = 0.01;
            let s = DetectionScenario {
                num_pilots: lp,
                sigma2: sigma2_for_q(1.0, q).unwrap(),
                ..scenario(0.0, false)
            };
            let s = DetectionScenario {
                gain: Complex64::new(1.0, 0.0),
                ..s
            };
            let rates = empirical_detection_rates(&s, 10_000, 100 + lp as u64).unwrap();
            let (lo, hi) = rates.p_false.interval(3.0);
            let expected = analytic_pfalse(lp, q).unwrap();
            assert!(
                lo <= expected && expected <= hi,
                "Lp={lp}: {expected} not in [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn detection_rejects_few_trials() {
        assert!(empirical_detection_rates(&scenario(0.1, false), 9_999, 1).is_err());
    }
}
