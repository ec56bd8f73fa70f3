//! Symbol-by-symbol MAP (BCJR) decoding of one terminated RSC constituent.
//!
//! The forward/backward recursions run on probabilities with per-step
//! normalisation instead of log-domain Jacobian sums. Both compute the same
//! exact a-posteriori LLRs; the linear form needs one `exp` per trellis
//! section rather than one `ln(1 + exp)` per branch.

use super::trellis::Trellis;

/// Channel and extrinsic LLR magnitudes are clipped here so every branch
/// weight stays within `exp(±1.5 * LLR_CLIP / 2)` of one.
pub(crate) const LLR_CLIP: f64 = 50.0;

#[inline]
fn clip(v: f64) -> f64 {
    v.clamp(-LLR_CLIP, LLR_CLIP)
}

/// Soft inputs for one constituent decoder.
pub(crate) struct ConstituentInput<'a> {
    /// A-priori LLR of each information bit.
    pub apriori: &'a [f64],
    /// Channel LLR of each systematic bit.
    pub systematic: &'a [f64],
    /// Channel LLR of each parity bit (zero where punctured).
    pub parity: &'a [f64],
    pub tail_systematic: &'a [f64],
    pub tail_parity: &'a [f64],
}

/// Reusable buffers for [`extrinsic`].
#[derive(Default)]
pub(crate) struct Workspace {
    alpha: Vec<f64>,
    beta_next: Vec<f64>,
    beta: Vec<f64>,
    /// `gamma[4 k + 2 u + p]`
    gamma: Vec<f64>,
}

/// Writes the extrinsic LLR of every information bit into `out`.
#[allow(clippy::needless_range_loop)] // states index alpha, beta and the trellis together
pub(crate) fn extrinsic(trellis: &Trellis, input: &ConstituentInput<'_>, ws: &mut Workspace, out: &mut [f64]) {
    let k_info = input.systematic.len();
    let m = trellis.memory();
    let steps = k_info + m;
    let ns = trellis.num_states();

    // Branch weights exp((s_u L_u + s_p L_p) / 2) with s = +1 for bit 0.
    ws.gamma.clear();
    ws.gamma.resize(4 * steps, 0.0);
    for k in 0..steps {
        let (lu, lp) = if k < k_info {
            (clip(input.apriori[k] + input.systematic[k]), clip(input.parity[k]))
        } else {
            (
                clip(input.tail_systematic[k - k_info]),
                clip(input.tail_parity[k - k_info]),
            )
        };
        let eu = (0.5 * lu).exp();
        let ep = (0.5 * lp).exp();
        let g = &mut ws.gamma[4 * k..4 * k + 4];
        g[0] = eu * ep;
        g[1] = eu / ep;
        g[2] = ep / eu;
        g[3] = 1.0 / (eu * ep);
    }

    // Forward recursion; alpha[k * ns + s] is the state distribution before step k.
    ws.alpha.clear();
    ws.alpha.resize((steps + 1) * ns, 0.0);
    ws.alpha[0] = 1.0;
    for k in 0..steps {
        let (cur, rest) = ws.alpha.split_at_mut((k + 1) * ns);
        let cur = &cur[k * ns..];
        let nxt = &mut rest[..ns];
        let g = &ws.gamma[4 * k..4 * k + 4];
        for s in 0..ns {
            let a = cur[s];
            if a == 0.0 {
                continue;
            }
            if k < k_info {
                for u in 0..2u8 {
                    let p = trellis.parity(s, u);
                    nxt[trellis.next(s, u)] += a * g[(2 * u + p) as usize];
                }
            } else {
                let u = trellis.tail_input(s);
                let p = trellis.parity(s, u);
                nxt[trellis.next(s, u)] += a * g[(2 * u + p) as usize];
            }
        }
        let norm: f64 = nxt.iter().sum();
        nxt.iter_mut().for_each(|v| *v /= norm);
    }

    // Backward recursion, emitting extrinsic values for information steps.
    ws.beta_next.clear();
    ws.beta_next.resize(ns, 0.0);
    ws.beta_next[0] = 1.0;
    ws.beta.clear();
    ws.beta.resize(ns, 0.0);
    for k in (0..steps).rev() {
        let g = &ws.gamma[4 * k..4 * k + 4];
        let alpha = &ws.alpha[k * ns..(k + 1) * ns];
        if k < k_info {
            // Parity-only weights: the information-bit factor is common to
            // every branch with the same input and cancels in the extrinsic.
            let lp = clip(input.parity[k]);
            let ep = (0.5 * lp).exp();
            let gp = [ep, 1.0 / ep];
            let (mut num, mut den) = (0.0, 0.0);
            for s in 0..ns {
                let mut b = 0.0;
                for u in 0..2u8 {
                    let p = trellis.parity(s, u);
                    let nb = ws.beta_next[trellis.next(s, u)];
                    b += g[(2 * u + p) as usize] * nb;
                    let w = alpha[s] * gp[p as usize] * nb;
                    if u == 0 {
                        num += w;
                    } else {
                        den += w;
                    }
                }
                ws.beta[s] = b;
            }
            out[k] = if den == 0.0 {
                LLR_CLIP
            } else if num == 0.0 {
                -LLR_CLIP
            } else {
                clip((num / den).ln())
            };
        } else {
            for s in 0..ns {
                let u = trellis.tail_input(s);
                let p = trellis.parity(s, u);
                ws.beta[s] = g[(2 * u + p) as usize] * ws.beta_next[trellis.next(s, u)];
            }
        }
        let norm: f64 = ws.beta.iter().sum();
        ws.beta.iter_mut().for_each(|v| *v /= norm);
        std::mem::swap(&mut ws.beta, &mut ws.beta_next);
    }
}
