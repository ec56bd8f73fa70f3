use num_complex::Complex64;

use flipsim::channel::{sample_realization, PowerDelayProfile};
use flipsim::rng::{SeedMap, Stream};

const FRAMES: u64 = 10_000;

fn draws(pdp: &PowerDelayProfile, seed: u64) -> Vec<Vec<Complex64>> {
    let seeds = SeedMap::new(seed);
    (0..FRAMES)
        .map(|f| sample_realization(pdp, f, &mut seeds.rng(Stream::Channel, &[0, 0, f])).taps)
        .collect()
}

/// Normalised complex correlation `E[a conj(b)] / sqrt(E|a|^2 E|b|^2)`.
fn correlation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let cross: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let pa: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let pb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    cross.norm() / (pa * pb).sqrt()
}

#[test]
fn tap_powers_follow_the_profile() {
    for pdp in [PowerDelayProfile::two_tap(), PowerDelayProfile::four_tap()] {
        let h = draws(&pdp, 11);
        for (l, &power) in pdp.tap_powers().iter().enumerate() {
            let mean = h.iter().map(|t| t[l].norm_sqr()).sum::<f64>() / FRAMES as f64;
            // |h|^2 is exponential, so the sample mean has sd power / 100.
            assert!((mean - power).abs() < 4.0 * power / 100.0, "tap {l}: {mean} vs {power}");
        }
    }
}

#[test]
fn realizations_are_independent_across_frames_and_taps() {
    let h = draws(&PowerDelayProfile::four_tap(), 12);
    let bound = 4.0 / (FRAMES as f64).sqrt();
    for l in 0..4 {
        let tap: Vec<Complex64> = h.iter().map(|t| t[l]).collect();
        let lag1 = correlation(&tap[1..], &tap[..tap.len() - 1]);
        assert!(lag1 < bound, "tap {l} lag-1 correlation {lag1}");
        for m in l + 1..4 {
            let other: Vec<Complex64> = h.iter().map(|t| t[m]).collect();
            let c = correlation(&tap, &other);
            assert!(c < bound, "taps {l},{m} correlation {c}");
        }
    }
}

#[test]
fn rayleigh_amplitude_has_uniform_phase() {
    let h = draws(&PowerDelayProfile::two_tap(), 13);
    // E[h^2] = 0 for a circularly symmetric tap.
    let m2: Complex64 = h.iter().map(|t| t[0] * t[0]).sum::<Complex64>() / FRAMES as f64;
    assert!(m2.norm() < 4.0 * 0.5 / (FRAMES as f64).sqrt(), "{m2}");
}

#[test]
fn a_frame_sees_the_same_taps_for_every_symbol() {
    // One realization per frame: redrawing at the same address reproduces it.
    let pdp = PowerDelayProfile::two_tap();
    let seeds = SeedMap::new(5);
    let a = sample_realization(&pdp, 3, &mut seeds.rng(Stream::Channel, &[1, 2, 3]));
    let b = sample_realization(&pdp, 3, &mut seeds.rng(Stream::Channel, &[1, 2, 3]));
    let c = sample_realization(&pdp, 4, &mut seeds.rng(Stream::Channel, &[1, 2, 4]));
    assert_eq!(a, b);
    assert_ne!(a.taps, c.taps);
}
