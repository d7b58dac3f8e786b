//! Ferromagnetic Ising heat-bath dynamics as a monotone PCA, with perfect
//! sampling of the infinite-volume Gibbs field.
//!
//! Simultaneous heat-bath on all sites is not the Gibbs sampler, so sites
//! update on a checkerboard schedule: during the transition into time t the
//! sites with (sum of coordinates + t) even redraw from their conditional
//! law, the rest carry over. Each half-step is a block Gibbs update, so the
//! Gibbs measure is invariant and the model's time unit is the half-step
//! (radius accounting uses per-half-step reach 1).
//!
//! The update at a redrawing site sets spin +1 iff the site uniform falls
//! below sigmoid(2 beta S), S the neighbor spin sum; with shared uniforms
//! this coupling is monotone, so top/bottom envelopes certify coalescence.
//! Spin symbols: 0 is minus one, 1 is plus one, ordered 0 < 1.

use crate::cftp::{SiteSample, Strategy};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Symbol};
use crate::noise::NoiseField;
use crate::pca::{NoiseAt, PcaSpec, UpdateRule};
use crate::stats::{self, Ci};
use std::sync::Arc;

#[derive(Clone, Copy, Debug)]
pub struct IsingSpec {
    pub d: u32,
    /// Inverse temperature, >= 0. Zero external field throughout.
    pub beta: f64,
}

impl IsingSpec {
    pub fn new(d: u32, beta: f64) -> Result<IsingSpec> {
        if d == 0 {
            return Err(Error::validation("dimension must be >= 1"));
        }
        if !(beta >= 0.0) {
            return Err(Error::validation("beta must be >= 0"));
        }
        Ok(IsingSpec { d, beta })
    }
}

/// P(new spin = +1 | neighbor sum S) as a u64 threshold on raw noise bits.
/// Working on raw bits keeps the generic engine and the specialized d=2
/// kernel bit-identical.
fn plus_thresholds(d: u32, beta: f64) -> Vec<u64> {
    let nn = 2 * d as i64;
    (-nn..=nn)
        .map(|s| {
            let p = 1.0 / (1.0 + (-2.0 * beta * s as f64).exp());
            (p * (u64::MAX as f64)) as u64
        })
        .collect()
}

pub struct IsingRule {
    d: u32,
    /// indexed by neighbor sum + 2d
    thresholds: Vec<u64>,
    state_offsets: Vec<Vec<i64>>,
    noise_offsets: Vec<Vec<i64>>,
}

impl IsingRule {
    pub fn new(spec: &IsingSpec) -> IsingRule {
        let d = spec.d as usize;
        // offset 0 first (own spin for carry-over), then +-e_k
        let mut f = vec![vec![0i64; d]];
        for k in 0..d {
            for sgn in [1i64, -1] {
                let mut off = vec![0i64; d];
                off[k] = sgn;
                f.push(off);
            }
        }
        IsingRule {
            d: spec.d,
            thresholds: plus_thresholds(spec.d, spec.beta),
            state_offsets: f,
            noise_offsets: vec![vec![0; d]],
        }
    }
}

impl UpdateRule for IsingRule {
    fn state_offsets(&self) -> &[Vec<i64>] {
        &self.state_offsets
    }
    fn noise_offsets(&self) -> &[Vec<i64>] {
        &self.noise_offsets
    }
    fn alphabet(&self) -> u8 {
        2
    }
    fn apply(&self, site: &[i64], t_new: i64, state: &[Symbol], noise: &mut NoiseAt) -> Symbol {
        let parity = (site.iter().sum::<i64>() + t_new).rem_euclid(2);
        if parity != 0 {
            return state[0];
        }
        let s: i64 = state[1..]
            .iter()
            .map(|&v| 2 * v as i64 - 1)
            .sum();
        let idx = (s + 2 * self.d as i64) as usize;
        u8::from(noise.bits(0) < self.thresholds[idx])
    }
}

/// The single-site heat-bath PCA on the checkerboard schedule, monotone
/// with bottom = minus, top = plus.
pub fn ising_heatbath_pca(spec: &IsingSpec) -> Result<PcaSpec> {
    PcaSpec::new(spec.d, Arc::new(IsingRule::new(spec)), true)
}

/// Exact two-point function of the d=1 zero-field Ising chain:
/// E[Y_0 Y_k] = tanh(beta)^|k| (transfer matrix).
pub fn two_point_1d_exact(beta: f64, k: i64) -> f64 {
    beta.tanh().powi(k.unsigned_abs() as i32)
}

/// Parameters of the certified-box sampler.
#[derive(Clone, Copy, Debug)]
pub struct BoxedParams {
    /// Spatial margin around the target window (capped by the depth, since
    /// information travels one site per half-step).
    pub margin: u64,
    pub t_max: u64,
}

impl Default for BoxedParams {
    fn default() -> Self {
        BoxedParams { margin: 104, t_max: 1 << 14 }
    }
}

/// A perfect sample of the Ising field on the centered window of half-width
/// `half` in d=2.
#[derive(Clone, Debug)]
pub struct WindowSample2d {
    pub half: u64,
    /// Spins, +1/-1, row-major with y slowest, over (2 half + 1)^2 sites.
    pub spins: Vec<i8>,
    /// Per-site first certifying depth, same layout.
    pub taus: Vec<u64>,
    /// Depth at which the last site certified.
    pub depth: u64,
    /// Conservative per-replica radius bound: box half-width at the final
    /// depth plus the site offset (reported per sample by callers).
    pub box_half: u64,
}

impl WindowSample2d {
    pub fn spin(&self, x: i64, y: i64) -> i8 {
        let h = self.half as i64;
        self.spins[((y + h) * (2 * h + 1) + (x + h)) as usize]
    }
    pub fn magnetization_sum(&self) -> f64 {
        self.spins.iter().map(|&s| s as f64).sum()
    }
}

/// Specialized d=2 certified-box envelope sampler.
///
/// Identical in law (and bit-identical in output) to driving the generic
/// engine with `Strategy::BoxedEnvelope`, but hand-optimized: flat padded
/// slabs, in-place checkerboard updates, raw u64 threshold tests, and one
/// noise draw shared by both chains. The monotone sandwich makes every
/// certified value an exact infinite-volume sample.
pub fn ising2d_boxed_window(
    spec: &IsingSpec,
    half: u64,
    params: &BoxedParams,
    field: &NoiseField,
    stream: u32,
) -> Result<WindowSample2d> {
    if spec.d != 2 {
        return Err(Error::domain("ising2d_boxed_window requires d = 2"));
    }
    let thr = plus_thresholds(2, spec.beta);
    let base = field.stream_base(stream);
    let wside = (2 * half + 1) as usize;
    let mut taus = vec![0u64; wside * wside];
    let mut out = vec![0i8; wside * wside];
    let mut done = vec![false; wside * wside];
    let mut remaining = wside * wside;
    let mut t = 1u64;
    loop {
        // grow the box with the depth until the configured margin is hit
        let m = params.margin.min(t);
        let h = (half + m) as i64;
        let side = (2 * h + 1) as usize;
        let stride = side + 2;
        let mut top = vec![1i8; stride * stride];
        let mut bot = vec![-1i8; stride * stride];
        for s in 0..t {
            let t_new = -(t as i64) + s as i64 + 1;
            let t_noise = t_new - 1;
            for y in -h..=h {
                let row = ((y + h + 1) as usize) * stride;
                // x with (x + y + t_new) even
                let mut x = -h + (h + y + t_new).rem_euclid(2);
                while x <= h {
                    let idx = row + (x + h + 1) as usize;
                    let u = field.bits_with_base(base, &[x, y], t_noise);
                    let st = (top[idx - 1] as i32
                        + top[idx + 1] as i32
                        + top[idx - stride] as i32
                        + top[idx + stride] as i32) as i64;
                    top[idx] = if u < thr[(st + 4) as usize] { 1 } else { -1 };
                    let sb = (bot[idx - 1] as i32
                        + bot[idx + 1] as i32
                        + bot[idx - stride] as i32
                        + bot[idx + stride] as i32) as i64;
                    bot[idx] = if u < thr[(sb + 4) as usize] { 1 } else { -1 };
                    x += 2;
                }
            }
        }
        // record first-certifying depth per window site
        let hw = half as i64;
        for wy in -hw..=hw {
            for wx in -hw..=hw {
                let widx = ((wy + hw) * (2 * hw + 1) + (wx + hw)) as usize;
                if done[widx] {
                    continue;
                }
                let idx = ((wy + h + 1) as usize) * stride + (wx + h + 1) as usize;
                if top[idx] == bot[idx] {
                    out[widx] = top[idx];
                    taus[widx] = t;
                    done[widx] = true;
                    remaining -= 1;
                }
            }
        }
        if remaining == 0 {
            return Ok(WindowSample2d {
                half,
                spins: out,
                taus,
                depth: t,
                box_half: half + params.margin.min(t),
            });
        }
        if t >= params.t_max {
            let first = done.iter().position(|&d| !d).unwrap();
            let hw = half as i64;
            let site = vec![
                (first as i64 % (2 * hw + 1)) - hw,
                (first as i64 / (2 * hw + 1)) - hw,
            ];
            return Err(Error::Unresolved { site, t_max: params.t_max });
        }
        t *= 2;
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SusceptibilityRow {
    pub n: u64,
    pub replicas: u64,
    /// Var(S_n) / |Lambda_n| with its CI.
    pub ratio: f64,
    pub ci: Ci,
    pub mean_magnetization: f64,
}

/// Joint perfect samples of S_n = sum of spins over Lambda_n, one ratio row
/// per requested n. Unresolved replicas abort with the offending site; near
/// criticality that is the finding, not a failure of the scan.
pub fn susceptibility_scan(
    spec: &IsingSpec,
    sizes: &[u64],
    replicas: u32,
    field: &NoiseField,
    params: &BoxedParams,
    confidence: f64,
) -> Result<Vec<SusceptibilityRow>> {
    use rayon::prelude::*;
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sums: Vec<f64> = (0..replicas)
            .into_par_iter()
            .map(|r| -> Result<f64> {
                match spec.d {
                    2 => Ok(ising2d_boxed_window(spec, n, params, field, r)?
                        .magnetization_sum()),
                    _ => {
                        let pca = ising_heatbath_pca(spec)?;
                        let sites = LatticeBox::centered(spec.d, n).sites();
                        let samples = crate::cftp::sample_stationary(
                            &pca,
                            &sites,
                            Strategy::BoxedEnvelope { margin: params.margin },
                            field,
                            r,
                            params.t_max,
                        )?;
                        let mut s = 0.0;
                        for smp in samples {
                            match smp {
                                SiteSample::Coalesced(c) => {
                                    s += 2.0 * c.value as f64 - 1.0;
                                }
                                SiteSample::Unresolved { site, t_max } => {
                                    return Err(Error::Unresolved { site: site.0, t_max })
                                }
                            }
                        }
                        Ok(s)
                    }
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let vol = crate::lattice::ball_volume(spec.d, n)? as f64;
        let (var, var_ci) = stats::variance_ci(&sums, confidence);
        rows.push(SusceptibilityRow {
            n,
            replicas: replicas as u64,
            ratio: var / vol,
            ci: Ci { lo: var_ci.lo / vol, hi: var_ci.hi / vol },
            mean_magnetization: stats::mean(&sums) / vol,
        });
    }
    Ok(rows)
}

/// Exact finite-window variance ratio for the d=1 chain:
/// Var(S_n)/(2n+1) = sum_k (1 - |k|/(2n+1)) tanh(beta)^|k|, |k| <= 2n.
pub fn variance_ratio_1d_exact(beta: f64, n: u64) -> f64 {
    let len = (2 * n + 1) as i64;
    let t = beta.tanh();
    let mut acc = 1.0;
    for k in 1..len {
        acc += 2.0 * (1.0 - k as f64 / len as f64) * t.powi(k as i32);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cftp::{sample_stationary, Strategy};
    use crate::lattice::Site;

    #[test]
    fn monotonicity_audit_of_heatbath_rule() {
        let field = NoiseField::new(201);
        for beta in [0.0, 0.3, 0.8] {
            let spec = IsingSpec::new(2, beta).unwrap();
            let pca = ising_heatbath_pca(&spec).unwrap();
            pca.audit_monotonicity(&field, 0, 10_000).unwrap();
        }
    }

    #[test]
    fn infinite_temperature_is_iid_and_fast() {
        // beta = 0: the update ignores neighbors, so every site is settled
        // within one full checkerboard cycle (two half-steps).
        let spec = IsingSpec::new(1, 0.0).unwrap();
        let pca = ising_heatbath_pca(&spec).unwrap();
        let field = NoiseField::new(202);
        let mut plus = 0u64;
        let n = 20_000u32;
        for r in 0..n {
            let s = sample_stationary(
                &pca,
                &[Site(vec![0])],
                Strategy::MonotoneEnvelope,
                &field,
                r,
                16,
            )
            .unwrap()[0]
                .clone()
                .ok()
                .unwrap();
            assert!(s.tau <= 2, "tau = {} exceeds one cycle", s.tau);
            plus += s.value as u64;
        }
        let p = plus as f64 / n as f64;
        assert!((p - 0.5).abs() < 0.012, "P(+) = {p}");
    }

    #[test]
    fn fast_kernel_matches_generic_boxed_engine_bit_for_bit() {
        let spec = IsingSpec::new(2, 0.35).unwrap();
        let field = NoiseField::new(203);
        let pca = ising_heatbath_pca(&spec).unwrap();
        let params = BoxedParams { margin: 12, t_max: 1 << 12 };
        let sites = LatticeBox::centered(2, 2).sites();
        for r in 0..20 {
            let fast = ising2d_boxed_window(&spec, 2, &params, &field, r).unwrap();
            let generic = sample_stationary(
                &pca,
                &sites,
                Strategy::BoxedEnvelope { margin: 12 },
                &field,
                r,
                1 << 12,
            )
            .unwrap();
            for smp in generic {
                let c = smp.ok().unwrap();
                let (x, y) = (c.site.0[0], c.site.0[1]);
                let spin = 2 * c.value as i8 - 1;
                assert_eq!(spin, fast.spin(x, y), "value mismatch at ({x},{y}) r{r}");
                let h = fast.half as i64;
                let widx = ((y + h) * (2 * h + 1) + (x + h)) as usize;
                assert_eq!(c.tau, fast.taus[widx], "tau mismatch at ({x},{y}) r{r}");
            }
        }
    }

    #[test]
    fn one_dimensional_two_point_matches_transfer_matrix() {
        // E[Y_0 Y_k] = tanh(beta)^k at beta = 0.5, k <= 4, 10^4 replicas.
        let beta = 0.5;
        let spec = IsingSpec::new(1, beta).unwrap();
        let pca = ising_heatbath_pca(&spec).unwrap();
        let field = NoiseField::new(204);
        let sites: Vec<Site> = (0..=4).map(|k| Site(vec![k])).collect();
        let n = 10_000u32;
        let mut prods = vec![Vec::with_capacity(n as usize); 5];
        for r in 0..n {
            let smps = sample_stationary(
                &pca,
                &sites,
                Strategy::MonotoneEnvelope,
                &field,
                r,
                1 << 12,
            )
            .unwrap();
            let spins: Vec<f64> = smps
                .into_iter()
                .map(|s| 2.0 * s.ok().unwrap().value as f64 - 1.0)
                .collect();
            for (k, p) in prods.iter_mut().enumerate() {
                p.push(spins[0] * spins[k]);
            }
        }
        for k in 1..=4usize {
            let (m, ci) = stats::mean_ci(&prods[k], 0.95);
            let exact = two_point_1d_exact(beta, k as i64);
            let se = (ci.hi - ci.lo) / (2.0 * 1.96);
            assert!(
                (m - exact).abs() < 3.0 * se,
                "k={k}: {m} vs exact {exact} (se {se})"
            );
        }
    }

    #[test]
    fn magnetization_is_symmetric_in_the_uniqueness_regime() {
        let spec = IsingSpec::new(2, 0.2).unwrap();
        let field = NoiseField::new(205);
        let params = BoxedParams { margin: 32, t_max: 1 << 12 };
        let mut spins = Vec::new();
        for r in 0..2000 {
            let w = ising2d_boxed_window(&spec, 0, &params, &field, r).unwrap();
            spins.push(w.spins[0] as f64);
        }
        let (m, ci) = stats::mean_ci(&spins, 0.95);
        let se = (ci.hi - ci.lo) / (2.0 * 1.96);
        assert!(m.abs() < 3.0 * se, "magnetization {m} not within 3 sigma of 0");
    }

    #[test]
    fn variance_ratio_1d_exact_limits() {
        // ratio -> (1+tanh)/(1-tanh) = e^{2 beta}
        let beta = 0.5f64;
        let inf = (beta.tanh() + 1.0) / (1.0 - beta.tanh());
        assert!((inf - 1.0f64.exp()).abs() < 1e-12);
        let r200 = variance_ratio_1d_exact(beta, 200);
        assert!((r200 - inf).abs() < 0.01);
        assert!((variance_ratio_1d_exact(0.0, 5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn susceptibility_beta_zero_ratio_is_one() {
        let spec = IsingSpec::new(1, 0.0).unwrap();
        let field = NoiseField::new(206);
        let rows = susceptibility_scan(
            &spec,
            &[4],
            4000,
            &field,
            &BoxedParams { margin: 8, t_max: 64 },
            0.95,
        )
        .unwrap();
        assert!(rows[0].ci.contains(1.0), "ratio CI {:?} should contain 1", rows[0].ci);
    }

    #[test]
    fn susceptibility_1d_matches_exact_finite_window_value() {
        let beta = 0.5;
        let spec = IsingSpec::new(1, beta).unwrap();
        let field = NoiseField::new(207);
        let rows = susceptibilty_for_test(&spec, &field);
        for row in &rows {
            let exact = variance_ratio_1d_exact(beta, row.n);
            let se = (row.ci.hi - row.ci.lo) / (2.0 * 1.96);
            assert!(
                (row.ratio - exact).abs() < 3.0 * se,
                "n={}: {} vs exact {exact}",
                row.n,
                row.ratio
            );
        }
    }

    fn susceptibilty_for_test(spec: &IsingSpec, field: &NoiseField) -> Vec<SusceptibilityRow> {
        susceptibility_scan(
            spec,
            &[4, 8],
            3000,
            field,
            &BoxedParams { margin: 48, t_max: 1 << 12 },
            0.95,
        )
        .unwrap()
    }
}
