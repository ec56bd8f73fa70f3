//! Pilot-polarity attack detection and its closed-form miss / false-alarm
//! probabilities.

use num_complex::Complex64;
use statrs::function::erf::erfc_inv;
use statrs::function::factorial::ln_binomial;

use crate::{Bpsk, Error, Result};

/// One received pilot on one tap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PilotObservation {
    pub position: usize,
    pub y: Complex64,
    pub x: Bpsk,
}

/// Verdict for one tap in one frame.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TapDetection {
    pub attacked: bool,
    pub flipped_positions: Vec<usize>,
}

/// Per-tap verdicts for one frame.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DetectionReport {
    pub taps: Vec<TapDetection>,
}

impl DetectionReport {
    pub fn any_attacked(&self) -> bool {
        self.taps.iter().any(|t| t.attacked)
    }
}

/// True if the pilot's projection onto the reference gain has the wrong sign.
#[inline]
pub fn pilot_flipped(obs: &PilotObservation, reference: Complex64) -> bool {
    (obs.y * reference.conj() * obs.x.value()).re < 0.0
}

/// Declares a pilot flipped when `Re(y conj(h_ref) x) < 0`; the tap is
/// attacked if any pilot is flipped.
pub fn detect_attack(pilots: &[PilotObservation], reference: Complex64) -> TapDetection {
    let flipped_positions: Vec<usize> = pilots
        .iter()
        .filter(|p| pilot_flipped(p, reference))
        .map(|p| p.position)
        .collect();
    TapDetection {
        attacked: !flipped_positions.is_empty(),
        flipped_positions,
    }
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`gaussian_tail`] on `(0, 1)`.
pub fn gaussian_tail_inv(q: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * q)
}

/// Probability that coherent polarity detection of a `+1` pilot sees a
/// negative sign: `Q(|h| sqrt(2 / sigma2))`.
pub fn analytic_q(h: Complex64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::param(format!("noise variance must be positive, got {sigma2}")));
    }
    Ok(gaussian_tail(h.norm() * (2.0 / sigma2).sqrt()))
}

/// Noise variance that makes [`analytic_q`] equal `q` for a gain of
/// magnitude `gain_abs`.
pub fn sigma2_for_q(gain_abs: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::param(format!("q must be in (0, 0.5), got {q}")));
    }
    let t = gaussian_tail_inv(q);
    Ok(2.0 * gain_abs * gain_abs / (t * t))
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::param(format!("{name} must be in [0, 1], got {v}")));
    }
    Ok(())
}

/// `exp(n ln b)` with the convention `0^0 = 1`.
fn ln_pow(base: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * base.ln()
    }
}

/// Per-frame misdetection probability, evaluated term by term as
///
/// `sum_{j=1}^{L} p^j (1-p)^{L-j} sum_{x=0}^{j} C(Lp, x) C(L-Lp, j-x) q^x`
///
/// with out-of-range binomials taken as zero. Every term is formed in the
/// log domain before exponentiation.
pub fn analytic_pmiss(frame_len: usize, num_pilots: usize, p: f64, q: f64) -> Result<f64> {
    check_prob("p", p)?;
    check_prob("q", q)?;
    if num_pilots > frame_len {
        return Err(Error::param("more pilots than frame symbols"));
    }
    let (l, lp) = (frame_len as u64, num_pilots as u64);
    let ld = l - lp;
    let mut total = 0.0;
    for j in 1..=l {
        let outer = ln_pow(p, j) + ln_pow(1.0 - p, l - j);
        if outer == f64::NEG_INFINITY {
            continue;
        }
        let x_lo = j.saturating_sub(ld);
        let x_hi = j.min(lp);
        for x in x_lo..=x_hi {
            let ln_term = outer + ln_binomial(lp, x) + ln_binomial(ld, j - x) + ln_pow(q, x);
            total += ln_term.exp();
        }
    }
    Ok(total)
}

/// Per-frame false-alarm probability `1 - (1 - q)^Lp`.
pub fn analytic_pfalse(num_pilots: usize, q: f64) -> Result<f64> {
    check_prob("q", q)?;
    let n = i32::try_from(num_pilots).map_err(|_| Error::param("too many pilots"))?;
    if n == 0 {
        return Ok(0.0);
    }
    // -expm1(n ln(1-q)) keeps precision when q is tiny.
    Ok(-((n as f64) * (-q).ln_1p()).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Sum over every flip pattern of `p^j (1-p)^{L-j}` times the probability
    /// that all flipped pilots are flipped back by noise, with the pilots at
    /// positions `0..Lp`.
    fn pmiss_enumerated(l: usize, lp: usize, p: f64, q: f64) -> f64 {
        let mut total = 0.0;
        for pattern in 1u32..(1 << l) {
            let j = pattern.count_ones() as i32;
            let weight = p.powi(j) * (1.0 - p).powi(l as i32 - j);
            let flipped_pilots: Vec<usize> = (0..lp).filter(|&k| pattern >> k & 1 == 1).collect();
            // enumerate noise events on the flipped pilots; miss iff every one is undone
            let x = flipped_pilots.len();
            let mut miss = 0.0;
            for undo in 0u32..(1 << x) {
                let undone = undo.count_ones() as i32;
                let pr = q.powi(undone) * (1.0 - q).powi(x as i32 - undone);
                if undone as usize == x {
                    miss += pr;
                }
            }
            total += weight * miss;
        }
        total
    }

    #[test]
    fn pmiss_matches_enumeration_on_small_frames() {
        for l in 1..=6 {
            for lp in 0..=l {
                for p in [0.25, 0.5] {
                    for q in [0.0, 0.3, 1.0] {
                        let a = analytic_pmiss(l, lp, p, q).unwrap();
                        let b = pmiss_enumerated(l, lp, p, q);
                        assert!((a - b).abs() < 1e-12, "L={l} Lp={lp} p={p} q={q}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn pmiss_tiny_case_by_hand() {
        // L=2, Lp=1, p=q=1/2: patterns {d}: 1/4, {p}: 1/4 * 1/2, {p,d}: 1/4 * 1/2
        let v = analytic_pmiss(2, 1, 0.5, 0.5).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pmiss_with_q_zero_keeps_only_pilot_free_patterns() {
        let (l, lp, p) = (30usize, 7usize, 0.3f64);
        let direct: f64 = (1..=l - lp)
            .map(|j| p.powi(j as i32) * (1.0 - p).powi((l - j) as i32) * ln_binomial((l - lp) as u64, j as u64).exp())
            .sum();
        let v = analytic_pmiss(l, lp, p, 0.0).unwrap();
        assert!((v - direct).abs() < 1e-14, "{v} vs {direct}");
    }

    #[test]
    fn pmiss_domain_errors() {
        assert!(analytic_pmiss(10, 11, 0.5, 0.1).is_err());
        assert!(analytic_pmiss(10, 2, 1.5, 0.1).is_err());
        assert!(analytic_pmiss(10, 2, 0.5, -0.1).is_err());
    }

    #[test]
    fn pfalse_values() {
        assert_eq!(analytic_pfalse(20, 0.0).unwrap(), 0.0);
        assert!((analytic_pfalse(1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        // 1 - 0.99^20 and 1 - 0.999^20 from a 30-digit evaluation
        let v = analytic_pfalse(20, 0.01).unwrap();
        assert!((v - 0.182_093_062_402_769_2).abs() < 1e-15, "{v}");
        let v = analytic_pfalse(20, 1e-3).unwrap();
        assert!((v - 0.019_811_135_170_465_3).abs() < 1e-15, "{v}");
        assert!(analytic_pfalse(3, 1.2).is_err());
    }

    #[test]
    fn pfalse_is_one_minus_product_of_survivals() {
        for lp in 0..=30 {
            for i in 0..=50 {
                let q = i as f64 / 50.0;
                let prod: f64 = (0..lp).map(|_| 1.0 - q).product();
                assert!((analytic_pfalse(lp, q).unwrap() - (1.0 - prod)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn q_limits_and_value() {
        assert!((analytic_q(c(0.0, 0.0), 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(analytic_q(c(1.0, 0.0), 1e-6).unwrap() < 1e-300);
        // Q(sqrt 2)
        let v = analytic_q(c(0.6, 0.8), 1.0).unwrap();
        assert!((v - 0.078_649_603_525_142_6).abs() < 1e-14, "{v}");
        assert!(analytic_q(c(1.0, 0.0), 0.0).is_err());
        let s2 = sigma2_for_q(1.0, 0.01).unwrap();
        assert!((analytic_q(c(1.0, 0.0), s2).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn detection_flags_inverted_pilots() {
        let h = c(0.3, -0.9);
        let pilots = [
            PilotObservation {
                position: 3,
                y: h,
                x: Bpsk::Plus,
            },
            PilotObservation {
                position: 8,
                y: h,
                x: Bpsk::Minus,
            },
            PilotObservation {
                position: 9,
                y: -h,
                x: Bpsk::Minus,
            },
        ];
        let det = detect_attack(&pilots, h);
        assert!(det.attacked);
        assert_eq!(det.flipped_positions, vec![8]);
        let clean = detect_attack(&pilots[2..], h);
        assert!(!clean.attacked && clean.flipped_positions.is_empty());
    }
}
