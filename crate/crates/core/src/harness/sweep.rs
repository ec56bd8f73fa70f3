//! Sweep drivers. Each returns rows in a fixed order; the random draws of
//! every frame depend only on the seeds and the frame's position, so results
//! do not depend on thread count or scheduling.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::link::{collect_llrs, frames_per_block, map_to_frames, Link};
use super::output::ResultRow;
use crate::channel::{narrowband_observe, snr_db_to_sigma2};
use crate::metrics::{
    empirical_detection_rates, mutual_information_plugin, BerRecord, DetectionScenario, RateEstimate,
};
use crate::receiver::{analytic_pfalse, analytic_pmiss, sigma2_for_q, FrameStats};
use crate::rng::Stream;
use crate::turbo::TurboCode;
use crate::{Bpsk, Error, Result};

/// Rows plus whether any SNR point ran out of budget before collecting the
/// minimum number of error events.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub budget_exhausted: bool,
}

/// Counts for one SNR point of a BER sweep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub block_errors: u64,
    pub blocks: u64,
    pub frames: u64,
    /// Hard-decision errors on the coded bits before decoding.
    pub raw_errors: u64,
    pub raw_bits: u64,
    pub stats: FrameStats,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }

    pub fn record(&self, scenario_id: &str) -> Result<BerRecord> {
        BerRecord::new(scenario_id, self.snr_db, self.bit_errors, self.bits, self.frames)
    }
}

struct BlockResult {
    bit_errors: u64,
    raw_errors: u64,
    frames: u64,
    stats: FrameStats,
}

fn simulate_block(code: &TurboCode, link: &Link, sigma2: f64, snr_idx: u64, block: u64) -> Result<BlockResult> {
    let mut data_rng = link.seeds.rng(Stream::Data, &[snr_idx, block]);
    let info: Vec<u8> = (0..code.block_length()).map(|_| data_rng.random_range(0..2)).collect();
    let coded = code.encode(&info)?;
    let payloads = map_to_frames(&coded.coded_bits, link.data_per_frame(), &mut data_rng);
    debug_assert_eq!(
        payloads.len(),
        frames_per_block(coded.coded_bits.len(), link.data_per_frame())
    );
    let rx = link.receiver(sigma2)?;
    let mut stats = FrameStats::default();
    let mut per_frame = Vec::with_capacity(payloads.len());
    for (f, data) in payloads.iter().enumerate() {
        let out = link.run_frame(&rx, data, &[snr_idx, block, f as u64])?;
        stats.merge(&out.output.stats);
        per_frame.push(out.output.llrs);
    }
    let llrs = collect_llrs(&per_frame, coded.coded_bits.len())?;
    let raw_errors = llrs
        .iter()
        .zip(&coded.coded_bits)
        .filter(|(l, &b)| u8::from(**l < 0.0) != b)
        .count() as u64;
    let decoded = code.decode(&llrs)?;
    let bit_errors = decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
    Ok(BlockResult {
        bit_errors,
        raw_errors,
        frames: payloads.len() as u64,
        stats,
    })
}

/// Simulates one SNR point until `min_errors` information-bit errors or
/// `max_bits` information bits, whichever comes first. Blocks run in
/// parallel batches and are tallied in block order.
pub fn simulate_ber_point(cfg: &ExperimentConfig, snr_idx: usize) -> Result<BerPoint> {
    let code = TurboCode::new(&cfg.turbo)?;
    if cfg.max_bits < code.block_length() as u64 {
        return Err(Error::param(format!(
            "bit budget {} is smaller than one code block of {} bits",
            cfg.max_bits,
            code.block_length()
        )));
    }
    let link = Link::new(cfg)?;
    let snr_db = cfg.snr_grid_db[snr_idx];
    let sigma2 = snr_db_to_sigma2(snr_db);
    let k = code.block_length() as u64;
    let batch = (2 * rayon::current_num_threads()).max(1) as u64;
    let mut point = BerPoint {
        snr_db,
        ..BerPoint::default()
    };
    let mut next = 0u64;
    loop {
        let results: Vec<Result<BlockResult>> = (next..next + batch)
            .into_par_iter()
            .map(|b| simulate_block(&code, &link, sigma2, snr_idx as u64, b))
            .collect();
        next += batch;
        for r in results {
            let r = r?;
            point.blocks += 1;
            point.bits += k;
            point.bit_errors += r.bit_errors;
            point.block_errors += u64::from(r.bit_errors > 0);
            point.raw_errors += r.raw_errors;
            point.raw_bits += code.coded_length() as u64;
            point.frames += r.frames;
            point.stats.merge(&r.stats);
            if point.bit_errors >= cfg.min_errors || point.bits + k > cfg.max_bits {
                return Ok(point);
            }
        }
    }
}

fn ber_rows(cfg: &ExperimentConfig, p: &BerPoint) -> Vec<ResultRow> {
    let id = cfg.scenario_id();
    let seed = cfg.seeds.master();
    let mut rows = Vec::new();
    let mut ber = ResultRow::rate(&id, p.snr_db, "ber", &RateEstimate::new(p.bit_errors, p.bits), seed);
    if p.bit_errors < cfg.min_errors {
        ber = ber.with_note(format!(
            "budget exhausted: {} error events < {}",
            p.bit_errors, cfg.min_errors
        ));
    }
    rows.push(ber);
    rows.push(ResultRow::rate(
        &id,
        p.snr_db,
        "bler",
        &RateEstimate::new(p.block_errors, p.blocks),
        seed,
    ));
    rows.push(ResultRow::rate(
        &id,
        p.snr_db,
        "raw_ber",
        &RateEstimate::new(p.raw_errors, p.raw_bits),
        seed,
    ));
    let s = &p.stats;
    if cfg.strategy.uses_detection() {
        rows.push(ResultRow::rate(
            &id,
            p.snr_db,
            "detect_rate",
            &RateEstimate::new(s.taps_detected as u64, s.taps_checked as u64),
            seed,
        ));
    }
    if matches!(cfg.strategy, crate::receiver::ReceiverStrategy::SmartCombine { .. }) {
        rows.push(ResultRow::rate(
            &id,
            p.snr_db,
            "gate_rate",
            &RateEstimate::new(s.taps_gated as u64, s.taps_detected as u64),
            seed,
        ));
        rows.push(ResultRow::rate(
            &id,
            p.snr_db,
            "discard_rate",
            &RateEstimate::new(s.smart_discarded as u64, s.smart_symbols as u64),
            seed,
        ));
    }
    rows
}

/// Coded BER sweep over the configured SNR grid.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let mut out = SweepOutput::default();
    for i in 0..cfg.snr_grid_db.len() {
        let point = simulate_ber_point(cfg, i)?;
        out.budget_exhausted |= point.bit_errors < cfg.min_errors;
        out.rows.extend(ber_rows(cfg, &point));
    }
    Ok(out)
}

/// Uncoded BER over `num_symbols` data symbols at one SNR: hard decisions on
/// the receiver LLRs, no channel code.
pub fn uncoded_ber(cfg: &ExperimentConfig, snr_db: f64, num_symbols: u64) -> Result<BerRecord> {
    let link = Link::new(cfg)?;
    let rx = link.receiver(snr_db_to_sigma2(snr_db))?;
    let per_frame = link.data_per_frame() as u64;
    let frames = num_symbols.div_ceil(per_frame);
    let snr_key = snr_db.to_bits();
    let counts: Vec<Result<(u64, u64)>> = (0..frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = link.seeds.rng(Stream::Data, &[snr_key, f]);
            let data: Vec<Bpsk> = (0..per_frame).map(|_| Bpsk::from_bit(rng.random_range(0..2))).collect();
            let out = link.run_frame(&rx, &data, &[snr_key, f])?;
            let used = per_frame.min(num_symbols - f * per_frame);
            let errors = out.output.llrs[..used as usize]
                .iter()
                .zip(&data)
                .filter(|(l, x)| (**l < 0.0) != (**x == Bpsk::Minus))
                .count() as u64;
            Ok((errors, used))
        })
        .collect();
    let (mut errors, mut bits) = (0, 0);
    for c in counts {
        let (e, b) = c?;
        errors += e;
        bits += b;
    }
    BerRecord::new(cfg.scenario_id(), snr_db, errors, bits, frames)
}

fn grid_note(frame_len: usize, lp: usize, q: f64) -> String {
    format!("L={frame_len};Lp={lp};q={q}")
}

/// Closed-form miss and false-alarm probabilities over the `(L_p, q)` grid.
pub fn run_pmiss_pfalse(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let id = cfg.scenario_id();
    let seed = cfg.seeds.master();
    let p = cfg.attacker.flip_prob();
    let mut rows = Vec::new();
    for &q in &cfg.q_grid {
        let snr_db = crate::channel::sigma2_to_snr_db(sigma2_for_q(1.0, q)?);
        for &lp in &cfg.lp_grid {
            let note = grid_note(cfg.frame_len, lp, q);
            rows.push(
                ResultRow::point(
                    &id,
                    snr_db,
                    "pmiss_analytic",
                    analytic_pmiss(cfg.frame_len, lp, p, q)?,
                    0,
                    seed,
                )
                .with_note(note.clone()),
            );
            rows.push(
                ResultRow::point(&id, snr_db, "pfalse_analytic", analytic_pfalse(lp, q)?, 0, seed).with_note(note),
            );
        }
    }
    Ok(SweepOutput {
        rows,
        budget_exhausted: false,
    })
}

/// Closed-form and Monte Carlo detection probabilities over the `(L_p, q)`
/// grid. The monitored tap has unit gain and the noise variance is chosen so
/// that a single pilot's polarity is wrong with probability `q`.
pub fn run_detection_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let id = cfg.scenario_id();
    let seed = cfg.seeds.master();
    let mut out = run_pmiss_pfalse(cfg)?;
    let mut jobs = Vec::new();
    for (qi, &q) in cfg.q_grid.iter().enumerate() {
        for &lp in &cfg.lp_grid {
            jobs.push((qi, q, lp));
        }
    }
    let mc: Vec<Result<Vec<ResultRow>>> = jobs
        .par_iter()
        .map(|&(qi, q, lp)| {
            let sigma2 = sigma2_for_q(1.0, q)?;
            let snr_db = crate::channel::sigma2_to_snr_db(sigma2);
            let scenario = DetectionScenario {
                frame_len: cfg.frame_len,
                num_pilots: lp,
                gain: Complex64::new(1.0, 0.0),
                sigma2,
                flip_prob: cfg.attacker.flip_prob(),
                estimate_error_fraction: cfg.attacker.estimate_error_fraction(),
                pilot_aware: cfg.attacker.pilot_aware(),
            };
            let trial_seed = cfg.seeds.seed(Stream::Attacker, &[qi as u64, lp as u64]);
            let rates = empirical_detection_rates(&scenario, cfg.detect_trials, trial_seed)?;
            let note = grid_note(cfg.frame_len, lp, q);
            Ok(vec![
                ResultRow::rate(&id, snr_db, "pmiss_mc", &rates.p_miss, seed).with_note(note.clone()),
                ResultRow::rate(&id, snr_db, "pfalse_mc", &rates.p_false, seed).with_note(note),
            ])
        })
        .collect();
    for rows in mc {
        out.rows.extend(rows?);
    }
    Ok(out)
}

/// Plug-in mutual information between the BPSK input and a single tap's
/// output, with unit gain, for each flip probability and SNR.
pub fn run_mutual_info(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let id = cfg.scenario_id();
    let seed = cfg.seeds.master();
    let h = Complex64::new(1.0, 0.0);
    let mut rows = Vec::new();
    for (pi, &p) in cfg.mi_flip_probs.iter().enumerate() {
        for (si, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
            let sigma2 = snr_db_to_sigma2(snr_db);
            let mut rng = cfg.seeds.rng(Stream::Noise, &[pi as u64, si as u64]);
            let samples = (0..cfg.mi_samples)
                .map(|_| {
                    let x = Bpsk::from_bit(rng.random_range(0..2));
                    let flipped = rng.random_bool(p);
                    Ok((x, narrowband_observe(x, h, 1.0, sigma2, flipped, &mut rng)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let est = mutual_information_plugin(&samples, cfg.mi_bins)?;
            rows.push(
                ResultRow::point(
                    &id,
                    snr_db,
                    "mutual_info_bits",
                    est.value_bits,
                    est.samples as u64,
                    seed,
                )
                .with_note(format!("flip_prob={p};bins={}", est.bins)),
            );
        }
    }
    Ok(SweepOutput {
        rows,
        budget_exhausted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ConfigFile;

    /// Short blocks and a small budget; `extra` overrides any key.
    fn small(extra: &str) -> ExperimentConfig {
        let mut file = ConfigFile::from_toml_str(extra).unwrap();
        let defaults = ConfigFile::default();
        if file.block_length == defaults.block_length {
            file.block_length = 200;
        }
        if file.max_bits == defaults.max_bits {
            file.max_bits = 2000;
        }
        if file.snr_db == defaults.snr_db {
            file.snr_db = vec![0.0, 20.0];
        }
        ExperimentConfig::from_file(&file).unwrap()
    }

    #[test]
    fn budget_smaller_than_a_block_is_rejected() {
        let cfg = small("max_bits = 100");
        assert!(matches!(run_ber_sweep(&cfg), Err(Error::Parameter(_))));
    }

    #[test]
    fn ber_sweep_is_deterministic_and_respects_budget() {
        let cfg = small("");
        let a = run_ber_sweep(&cfg).unwrap();
        let b = run_ber_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        let bers: Vec<_> = a.rows.iter().filter(|r| r.metric == "ber").collect();
        assert_eq!(bers.len(), 2);
        assert!(bers.iter().all(|r| r.samples <= 2000 && r.samples % 200 == 0));
        // 20 dB over two taps: decoding is error-free, so the budget runs out.
        assert_eq!(bers[1].value, 0.0);
        assert!(a.budget_exhausted);
        assert!(bers[1].note.contains("budget exhausted"));
    }

    #[test]
    fn stop_rule_ends_on_error_count() {
        let cfg = small("scenario = \"A-2,C-12\"\nsnr_db = [30.0]\nmin_errors = 10\nmax_bits = 1000000");
        let p = simulate_ber_point(&cfg, 0).unwrap();
        assert!(p.bit_errors >= 10);
        assert!(p.bits < 1_000_000);
    }

    #[test]
    fn uncoded_ber_counts_symbols_exactly() {
        let cfg = small("tap_powers = [1.0]\nscenario = \"A-none,C-1\"");
        let r = uncoded_ber(&cfg, 5.0, 1000).unwrap();
        assert_eq!(r.bits_total, 1000);
        assert_eq!(r.frames, 13);
        assert!(r.bit_errors > 0 && r.bit_errors < 200);
    }

    #[test]
    fn analytic_grid_shapes() {
        let cfg = small("lp_grid = [1, 2, 3]\nq_grid = [0.01, 0.1]");
        let rows = run_pmiss_pfalse(&cfg).unwrap().rows;
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.note.starts_with("L=100;Lp=")));
    }

    #[test]
    fn mutual_info_rows() {
        let cfg = small("mi_samples = 20000\nsnr_db = [15.0]");
        let rows = run_mutual_info(&cfg).unwrap().rows;
        assert_eq!(rows.len(), 2);
        assert!(rows[0].value > 0.9, "{:?}", rows[0]);
        assert!(rows[1].value < 0.05, "{:?}", rows[1]);
    }
}
