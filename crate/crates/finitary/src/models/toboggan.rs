//! The Toboggan (forward recurrence time) chain: P(0, i) = p_i,
//! P(i, i-1) = 1. Geometrically ergodic but never uniformly ergodic for
//! unbounded jump laws, which makes it the canonical chain that admits a
//! finitary coding yet no coupling-from-the-past construction.
//!
//! For the geometric jump law p_i = 2^{-i-1} the renewal indicators are
//! i.i.d. fair coins (the hazard is identically 1/2), and the coding is
//! explicit: X_i is the distance to the next renewal at or after i, and the
//! per-site regeneration depth theta_i equals that distance, with
//! P(theta = i) = 2^{-(i+1)}.

use crate::cftp::CodingSample;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::models::chain::ChainSpec;
use crate::noise::UniformSource;

#[derive(Clone, Debug)]
pub struct TobogganSpec {
    /// Jump law p_0..p_K (truncated; the recorded defect is the lost tail).
    pub p: Vec<f64>,
    pub tail_defect: f64,
}

impl TobogganSpec {
    /// The geometric instance p_i = 2^{-i-1}, truncated at K with the true
    /// tail mass lumped into the last entry so the vector sums to 1.
    pub fn geometric(k: usize) -> TobogganSpec {
        let mut p: Vec<f64> = (0..k).map(|i| 0.5f64.powi(i as i32 + 1)).collect();
        p.push(0.5f64.powi(k as i32));
        TobogganSpec { p, tail_defect: 0.0 }
    }

    pub fn new(p: Vec<f64>) -> Result<TobogganSpec> {
        if p.is_empty() || p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::validation("jump law must be nonempty and nonnegative"));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("jump law sums to {s}")));
        }
        if p[0] <= 0.0 {
            return Err(Error::validation("p_0 must be positive (aperiodicity)"));
        }
        Ok(TobogganSpec { p, tail_defect: 0.0 })
    }

    /// Is this the geometric instance the explicit coding applies to?
    pub fn is_geometric(&self) -> bool {
        let k = self.p.len() - 1;
        self.p
            .iter()
            .take(k)
            .enumerate()
            .all(|(i, &x)| (x - 0.5f64.powi(i as i32 + 1)).abs() < 1e-12)
            && (self.p[k] - 0.5f64.powi(k as i32)).abs() < 1e-12
    }

    /// The truncated transition kernel on states 0..=K, for the eigen-solve
    /// oracle.
    pub fn chain(&self) -> Result<ChainSpec> {
        let k = self.p.len();
        let p = self.p.clone();
        ChainSpec::truncated(
            k,
            move |i, j| {
                if i == 0 {
                    p[j]
                } else {
                    f64::from(j == i - 1)
                }
            },
            None,
        )
    }
}

/// Exact pmf of the regeneration depth in the geometric case.
pub fn theta_pmf(i: u64) -> f64 {
    0.5f64.powi(i as i32 + 1)
}

fn coin(source: &dyn UniformSource, stream: u32, pos: i64) -> bool {
    source.uniform_at(stream, &[pos], 0) < 0.5
}

const SCAN_CAP: u64 = 4096;

/// The explicit finitary coding of the geometric Toboggan chain at one time
/// index: scan the fair-coin renewal field forward for the next renewal.
/// The value, the regeneration depth, and the algorithmic radius all equal
/// that distance. Non-geometric jump laws are routed through the renewal
/// construction, not guessed here.
pub fn toboggan_coding(
    spec: &TobogganSpec,
    site: i64,
    source: &dyn UniformSource,
    stream: u32,
) -> Result<CodingSample> {
    if !spec.is_geometric() {
        return Err(Error::Domain(
            "explicit Toboggan coding is the geometric worked instance; \
             route general jump laws through renewal_cftp"
                .into(),
        ));
    }
    for k in 0..SCAN_CAP {
        if coin(source, stream, site + k as i64) {
            return Ok(CodingSample {
                site: Site(vec![site]),
                value: k.min(255) as u8,
                radius: k,
                tau: k,
            });
        }
    }
    Err(Error::Unresolved { site: vec![site], t_max: SCAN_CAP })
}

/// Joint coding over a window of time indices under shared noise.
pub fn toboggan_window(
    spec: &TobogganSpec,
    lo: i64,
    hi: i64,
    source: &dyn UniformSource,
    stream: u32,
) -> Result<Vec<CodingSample>> {
    (lo..=hi)
        .map(|i| toboggan_coding(spec, i, source, stream))
        .collect()
}
