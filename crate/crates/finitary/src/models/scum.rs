//! Stochastic chains with unbounded memory (SCUMs) and their layered
//! coupling-from-the-past.
//!
//! A SCUM is specified by a conditional kernel g(b | past). Writing
//! m_k(b | a_{-k}..a_{-1}) for the infimum of g(b | .) over all pasts
//! extending the last k symbols, the layer weights
//! m_k - m_{k-1} decompose each conditional law into pieces that depend on
//! progressively more of the past. One uniform per time both selects how
//! much past the symbol needs (the conservative need is
//! min{k : u < alpha_k}, where alpha_k = inf over k-contexts of sum_b m_k)
//! and picks the symbol within the layers. A window is resolved once a
//! position of need zero is found below it with every later need fitting
//! inside the window: the regeneration depth theta.
//!
//! Kernels here have finite declared memory K (truncations of unbounded
//! kernels); draws whose need exceeds K cannot be certified and surface as
//! Unresolved rather than being guessed.

use crate::error::{Error, Result};
use crate::lattice::Symbol;
use crate::noise::UniformSource;

/// A conditional kernel with computable context infima.
pub trait ScumKernel: Sync {
    fn alphabet(&self) -> u8;
    /// Declared memory bound K.
    fn k_max(&self) -> usize;
    /// m_k(b | ctx): infimum of g(b | past) over pasts ending with `ctx`
    /// (chronological; ctx.last() is the immediate predecessor, k =
    /// ctx.len() <= K).
    fn m_k(&self, b: Symbol, ctx: &[Symbol]) -> f64;
}

/// alpha_k = inf over contexts of length k of sum_b m_k(b | ctx), computed
/// exactly by enumeration, k = 0..=K.
pub fn alphas(kernel: &dyn ScumKernel) -> Vec<f64> {
    let b = kernel.alphabet() as usize;
    let kmax = kernel.k_max();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut worst = f64::INFINITY;
        let mut ctx = vec![0 as Symbol; k];
        loop {
            let s: f64 = (0..b as u8).map(|sym| kernel.m_k(sym, &ctx)).sum();
            worst = worst.min(s);
            // odometer
            let mut i = 0;
            loop {
                if i == k {
                    break;
                }
                if (ctx[i] as usize) + 1 < b {
                    ctx[i] += 1;
                    break;
                }
                ctx[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        out.push(worst.min(1.0));
    }
    out
}

/// Geometric-domination bound on E[theta] from the alpha sequence, valid
/// when alpha_K = 1 (every draw needs at most K symbols): disjoint blocks
/// of K+1 consecutive zero-need positions regenerate independently.
pub fn theta_mean_bound(alpha: &[f64]) -> Option<f64> {
    let k = alpha.len() - 1;
    if alpha[k] < 1.0 - 1e-12 {
        return None;
    }
    let q = alpha[0].powi(k as i32 + 1);
    if q <= 0.0 {
        return None;
    }
    Some((k + 1) as f64 / q + (k + 1) as f64)
}

#[derive(Clone, Debug)]
pub struct ScumDraw {
    pub window: Vec<Symbol>,
    pub theta: u64,
}

/// Layered CFTP for the stationary law of a SCUM on [lo, hi].
pub fn scum_cftp(
    kernel: &dyn ScumKernel,
    source: &dyn UniformSource,
    stream: u32,
    lo: i64,
    hi: i64,
    t_max: u64,
) -> Result<ScumDraw> {
    if lo > hi {
        return Err(Error::domain("lo must be <= hi"));
    }
    let alpha = alphas(kernel);
    if alpha.iter().any(|&a| a <= 0.0) {
        return Err(Error::validation(
            "some alpha_k = 0 on the truncation: the layered CFTP cannot regenerate",
        ));
    }
    let kmax = kernel.k_max();
    let u_at = |pos: i64| source.uniform_at(stream, &[pos], 0);
    // conservative need of one draw; None when it exceeds the truncation
    let need = |u: f64| -> Option<usize> { alpha.iter().position(|&a| u < a) };
    let needs_for = |pos: i64| -> Result<usize> {
        need(u_at(pos)).ok_or(Error::Unresolved { site: vec![pos], t_max })
    };
    // needs of the fixed window positions above lo, computed once
    let window_len = (hi - lo) as usize + 1;
    let mut win_needs = Vec::with_capacity(window_len - 1);
    for t in 1..window_len {
        win_needs.push(needs_for(lo + t as i64)?);
    }
    // scan depth m upward; needs[i] is the need of position (lo - m) + i
    let mut needs: Vec<usize> = Vec::new();
    let mut theta: Option<u64> = None;
    'outer: for m in 0..=t_max {
        let base = lo - m as i64;
        needs.insert(0, needs_for(base)?);
        if needs[0] != 0 {
            continue;
        }
        // every position in [base, hi] may reach back only to base
        for (i, &k) in needs.iter().enumerate() {
            if k > i {
                continue 'outer;
            }
        }
        for (t, &k) in win_needs.iter().enumerate() {
            if k > m as usize + t + 1 {
                continue 'outer;
            }
        }
        theta = Some(m);
        break;
    }
    let Some(theta) = theta else {
        return Err(Error::Unresolved { site: vec![lo], t_max });
    };
    // reconstruct forward from the zero-need base
    let base = lo - theta as i64;
    let total = (hi - base) as usize + 1;
    let mut symbols: Vec<Symbol> = Vec::with_capacity(total);
    for i in 0..total {
        let pos = base + i as i64;
        let u = u_at(pos);
        let k_need = need(u).expect("certified above");
        debug_assert!(k_need <= i.min(kmax));
        // walk the layered intervals: layer k, symbol-major within layer
        let mut cum = 0.0f64;
        let mut chosen: Option<Symbol> = None;
        'layers: for k in 0..=k_need {
            let ctx = &symbols[i - k..i];
            for b in 0..kernel.alphabet() {
                let hi_w = kernel.m_k(b, ctx);
                let lo_w = if k == 0 {
                    0.0
                } else {
                    kernel.m_k(b, &symbols[i - (k - 1)..i])
                };
                let w = (hi_w - lo_w).max(0.0);
                if u < cum + w {
                    chosen = Some(b);
                    break 'layers;
                }
                cum += w;
            }
        }
        symbols.push(chosen.expect("u < alpha_k guarantees landing within the layers"));
    }
    Ok(ScumDraw { window: symbols[(lo - base) as usize..].to_vec(), theta })
}

/// g independent of the past: alpha_0 = 1, theta = 0, i.i.d. output.
pub struct IidScum {
    pub probs: Vec<f64>,
}

impl ScumKernel for IidScum {
    fn alphabet(&self) -> u8 {
        self.probs.len() as u8
    }
    fn k_max(&self) -> usize {
        0
    }
    fn m_k(&self, b: Symbol, _ctx: &[Symbol]) -> f64 {
        self.probs[b as usize]
    }
}

/// Order-1 Markov kernel viewed as a SCUM: m_0 is the column minimum, m_1
/// the exact row.
pub struct MarkovScum {
    pub kernel: Vec<Vec<f64>>,
}

impl ScumKernel for MarkovScum {
    fn alphabet(&self) -> u8 {
        self.kernel.len() as u8
    }
    fn k_max(&self) -> usize {
        1
    }
    fn m_k(&self, b: Symbol, ctx: &[Symbol]) -> f64 {
        match ctx.last() {
            None => (0..self.kernel.len())
                .map(|a| self.kernel[a][b as usize])
                .fold(f64::INFINITY, f64::min),
            Some(&a) => self.kernel[a as usize][b as usize],
        }
    }
}

/// Binary kernel with geometrically decaying memory:
/// g(1 | a) = base + sum_{j=1..K} w_j a_{-j}, w_j = amp * rho^{j-1}.
/// Exactly K-memory, so alpha_K = 1 and all infima are explicit.
pub struct GeometricMemoryScum {
    pub base: f64,
    pub weights: Vec<f64>,
}

impl GeometricMemoryScum {
    pub fn new(base: f64, amp: f64, rho: f64, k: usize) -> Result<GeometricMemoryScum> {
        let weights: Vec<f64> = (0..k).map(|j| amp * rho.powi(j as i32)).collect();
        let wsum: f64 = weights.iter().sum();
        if base <= 0.0 || base + wsum >= 1.0 {
            return Err(Error::validation(
                "need 0 < base and base + sum(weights) < 1 for a proper kernel",
            ));
        }
        Ok(GeometricMemoryScum { base, weights })
    }
}

impl ScumKernel for GeometricMemoryScum {
    fn alphabet(&self) -> u8 {
        2
    }
    fn k_max(&self) -> usize {
        self.weights.len()
    }
    fn m_k(&self, b: Symbol, ctx: &[Symbol]) -> f64 {
        // known contribution from the provided context; unseen sites take
        // the extreme that minimizes the requested symbol's probability
        let k = ctx.len();
        let known: f64 = (1..=k)
            .map(|j| self.weights[j - 1] * ctx[k - j] as f64)
            .sum();
        let unseen: f64 = self.weights[k..].iter().sum();
        match b {
            1 => self.base + known,               // unseen zeros minimize p(1)
            _ => 1.0 - self.base - known - unseen, // unseen ones minimize p(0)
        }
    }
}
