//! Coupling from the past for PCAs: coalescence detection with a doubling
//! schedule, stationary-field sampling with measured coding radii, and a
//! certified-box variant for monotone models where the full backward cone
//! is too expensive.
//!
//! Noise reuse contract: deepening the start time never changes the noise
//! already consumed, because draws are keyed by (stream, site, time) in a
//! counter-based source.

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Site, Symbol};
use crate::noise::UniformSource;
use crate::pca::{step, PcaSpec, Slab};

/// How coalescence is certified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Run only the top and bottom initial states of the declared order;
    /// requires `spec.monotone`.
    MonotoneEnvelope,
    /// Enumerate every initial configuration on the cone base; exact for
    /// arbitrary rules but exponential in the base volume.
    ExhaustiveCone { max_configs: u128 },
    /// Monotone envelope on a fixed box with boundary reads frozen at the
    /// extremal symbols. Exact by the sandwich argument; the reported
    /// radius is the (conservative) box extent rather than the cone reach.
    /// This is the practical choice for joint window sampling when
    /// relaxation is slow.
    BoxedEnvelope { margin: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoalescenceStatus {
    Coalesced,
    Unresolved,
}

/// Outcome of certifying one site.
#[derive(Clone, Debug)]
pub struct CoalescenceResult {
    pub status: CoalescenceStatus,
    /// First trial depth (doubling schedule) at which the value at (v, 0)
    /// was certified initial-independent; `t_max` if unresolved.
    pub tau: u64,
    pub value: Option<Symbol>,
    /// Spatial reach of the noise the certificate may have read.
    pub cone_radius: u64,
}

/// One perfect-simulation draw at a site.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CodingSample {
    pub site: Site,
    pub value: Symbol,
    /// Algorithmic coding radius (upper bound on the definitional one).
    pub radius: u64,
    pub tau: u64,
}

/// Per-site outcome of a joint sampling run.
#[derive(Clone, Debug)]
pub enum SiteSample {
    Coalesced(CodingSample),
    Unresolved { site: Site, t_max: u64 },
}

impl SiteSample {
    pub fn ok(self) -> Result<CodingSample> {
        match self {
            SiteSample::Coalesced(s) => Ok(s),
            SiteSample::Unresolved { site, t_max } => {
                Err(Error::Unresolved { site: site.0, t_max })
            }
        }
    }
}

fn bounding_box(d: u32, sites: &[Site]) -> Result<LatticeBox> {
    if sites.is_empty() {
        return Err(Error::domain("empty site list"));
    }
    for s in sites {
        if s.dim() != d {
            return Err(Error::domain("site dimension mismatch"));
        }
    }
    let dd = d as usize;
    let mut lo = sites[0].0.clone();
    let mut hi = sites[0].0.clone();
    for s in sites {
        for k in 0..dd {
            lo[k] = lo[k].min(s.0[k]);
            hi[k] = hi[k].max(s.0[k]);
        }
    }
    // the smallest l-infinity ball containing [lo, hi]: center at the
    // midpoint rounded down, radius covering the worst axis
    let center: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| (a + b) >> 1).collect();
    let radius = center
        .iter()
        .zip(lo.iter().zip(&hi))
        .map(|(c, (a, b))| ((c - a).unsigned_abs()).max((b - c).unsigned_abs()))
        .max()
        .unwrap_or(0);
    Ok(LatticeBox::new(Site(center), radius))
}

/// The doubling schedule 1, 2, 4, ... capped at `t_max`.
fn schedule(t_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut t = 1u64;
    while t <= t_max {
        out.push(t);
        if t > t_max / 2 {
            break;
        }
        t *= 2;
    }
    out
}

/// Evolve one initial slab from depth -t to 0 over the cone of `region`.
fn run_from(
    spec: &PcaSpec,
    region: &LatticeBox,
    t: u64,
    init: Symbol,
    source: &dyn UniformSource,
    stream: u32,
) -> Slab {
    let base_radius = region.radius + spec.reach() * t;
    let mut slab = Slab::from_ball(&region.center, base_radius, init);
    for s in 0..t {
        slab = step(spec, &slab, -(t as i64) + s as i64 + 1, source, stream);
    }
    slab
}

/// Top/bottom envelope run; returns the two slabs at time 0.
fn envelope_run(
    spec: &PcaSpec,
    region: &LatticeBox,
    t: u64,
    source: &dyn UniformSource,
    stream: u32,
) -> (Slab, Slab) {
    let base_radius = region.radius + spec.reach() * t;
    let mut top = Slab::from_ball(&region.center, base_radius, spec.top());
    let mut bot = Slab::from_ball(&region.center, base_radius, spec.bottom());
    let mut merged = false;
    for s in 0..t {
        let t_new = -(t as i64) + s as i64 + 1;
        top = step(spec, &top, t_new, source, stream);
        if merged {
            bot = top.clone();
        } else {
            bot = step(spec, &bot, t_new, source, stream);
            if top.data == bot.data {
                merged = true;
            }
        }
    }
    (top, bot)
}

/// All initial configurations on the cone base, evolved to time 0; returns
/// per-site agreement values (None where configurations disagree).
fn exhaustive_run(
    spec: &PcaSpec,
    region: &LatticeBox,
    t: u64,
    max_configs: u128,
    source: &dyn UniformSource,
    stream: u32,
) -> Result<Vec<Option<Symbol>>> {
    let base_radius = region.radius + spec.reach() * t;
    let base_vol = crate::lattice::ball_volume(spec.d, base_radius)?;
    let b = spec.alphabet() as u128;
    let configs = b
        .checked_pow(u32::try_from(base_vol).map_err(|_| {
            Error::Budget(format!("cone base volume {base_vol} too large to enumerate"))
        })?)
        .ok_or_else(|| Error::Budget("configuration count overflows u128".into()))?;
    if configs > max_configs {
        return Err(Error::Budget(format!(
            "|B|^|cone base| = {configs} exceeds budget {max_configs}"
        )));
    }
    let n_base = base_vol as usize;
    let mut assign = vec![0u8; n_base];
    let mut agreed: Option<Vec<Symbol>> = None;
    let mut alive: Option<Vec<bool>> = None;
    loop {
        let mut slab = Slab::from_ball(&region.center, base_radius, 0);
        slab.data.copy_from_slice(&assign);
        for s in 0..t {
            slab = step(spec, &slab, -(t as i64) + s as i64 + 1, source, stream);
        }
        match (&mut agreed, &mut alive) {
            (None, None) => {
                alive = Some(vec![true; slab.data.len()]);
                agreed = Some(slab.data.clone());
            }
            (Some(vals), Some(mask)) => {
                for (k, v) in slab.data.iter().enumerate() {
                    if vals[k] != *v {
                        mask[k] = false;
                    }
                }
            }
            _ => unreachable!(),
        }
        // odometer
        let mut k = 0;
        loop {
            if k == n_base {
                let vals = agreed.unwrap();
                let mask = alive.unwrap();
                return Ok(vals
                    .into_iter()
                    .zip(mask)
                    .map(|(v, ok)| if ok { Some(v) } else { None })
                    .collect());
            }
            if assign[k] + 1 < spec.alphabet() {
                assign[k] += 1;
                break;
            }
            assign[k] = 0;
            k += 1;
        }
    }
}

/// Certify coalescence at a single site.
pub fn coalescence(
    spec: &PcaSpec,
    v: &Site,
    strategy: Strategy,
    source: &dyn UniformSource,
    stream: u32,
    t_max: u64,
) -> Result<CoalescenceResult> {
    let samples = sample_stationary(spec, std::slice::from_ref(v), strategy, source, stream, t_max)?;
    Ok(match samples.into_iter().next().unwrap() {
        SiteSample::Coalesced(s) => CoalescenceResult {
            status: CoalescenceStatus::Coalesced,
            tau: s.tau,
            value: Some(s.value),
            cone_radius: s.radius,
        },
        SiteSample::Unresolved { t_max, .. } => CoalescenceResult {
            status: CoalescenceStatus::Unresolved,
            tau: t_max,
            value: None,
            cone_radius: t_max * spec.reach(),
        },
    })
}

/// Perfect-simulation draw at each requested site. One joint run per trial
/// depth over the bounding region, so all sites share noise and the joint
/// law is faithful; tau is certified per site (first depth in the doubling
/// schedule at which that site's value is initial-independent).
pub fn sample_stationary(
    spec: &PcaSpec,
    sites: &[Site],
    strategy: Strategy,
    source: &dyn UniformSource,
    stream: u32,
    t_max: u64,
) -> Result<Vec<SiteSample>> {
    if t_max == 0 {
        return Err(Error::domain("t_max must be positive"));
    }
    if let Strategy::MonotoneEnvelope = strategy {
        if !spec.monotone {
            return Err(Error::validation(
                "MonotoneEnvelope requires a monotone spec with declared top/bottom",
            ));
        }
    }
    if let Strategy::BoxedEnvelope { .. } = strategy {
        if !spec.monotone {
            return Err(Error::validation(
                "BoxedEnvelope requires a monotone spec with declared top/bottom",
            ));
        }
        return sample_window_boxed(spec, sites, strategy, source, stream, t_max);
    }
    let region = bounding_box(spec.d, sites)?;
    let reach = spec.reach();
    let mut out: Vec<Option<CodingSample>> = vec![None; sites.len()];
    for t in schedule(t_max) {
        let values: Vec<Option<Symbol>> = match strategy {
            Strategy::MonotoneEnvelope => {
                let (top, bot) = envelope_run(spec, &region, t, source, stream);
                sites
                    .iter()
                    .map(|s| {
                        let a = top.get(&s.0);
                        let b = bot.get(&s.0);
                        if a == b {
                            Some(a)
                        } else {
                            None
                        }
                    })
                    .collect()
            }
            Strategy::ExhaustiveCone { max_configs } => {
                let agreement = exhaustive_run(spec, &region, t, max_configs, source, stream)?;
                let slab_shape = Slab::from_ball(&region.center, region.radius, 0);
                sites
                    .iter()
                    .map(|s| agreement[slab_shape.index_of(&s.0)])
                    .collect()
            }
            Strategy::BoxedEnvelope { .. } => unreachable!(),
        };
        for (k, val) in values.into_iter().enumerate() {
            if out[k].is_none() {
                if let Some(v) = val {
                    out[k] = Some(CodingSample {
                        site: sites[k].clone(),
                        value: v,
                        radius: t * reach,
                        tau: t,
                    });
                }
            }
        }
        if out.iter().all(|o| o.is_some()) {
            break;
        }
    }
    Ok(out
        .into_iter()
        .zip(sites)
        .map(|(o, s)| match o {
            Some(sample) => SiteSample::Coalesced(sample),
            None => SiteSample::Unresolved { site: s.clone(), t_max },
        })
        .collect())
}

/// One synchronous transition on a fixed box with out-of-box neighbor reads
/// frozen at `fill`.
pub fn step_boxed(
    spec: &PcaSpec,
    cur: &Slab,
    t_new: i64,
    fill: Symbol,
    source: &dyn UniformSource,
    stream: u32,
) -> Slab {
    let d = cur.dim();
    let mut next = Slab::constant(cur.lo.clone(), cur.shape.clone(), 0);
    let rule = &*spec.rule;
    let f = rule.state_offsets();
    let mut state_buf = vec![0 as Symbol; f.len()];
    let mut site_buf = vec![0i64; d];
    let mut scratch = Vec::with_capacity(d);
    let mut cur_site = cur.lo.clone();
    for idx in 0..next.data.len() {
        for (k, off) in f.iter().enumerate() {
            for j in 0..d {
                site_buf[j] = cur_site[j] + off[j];
            }
            state_buf[k] = if cur.contains(&site_buf) {
                cur.get(&site_buf)
            } else {
                fill
            };
        }
        let mut noise = crate::pca::NoiseAt::new(
            source,
            stream,
            rule.noise_offsets(),
            &cur_site,
            t_new - 1,
            &mut scratch,
        );
        next.data[idx] = rule.apply(&cur_site, t_new, &state_buf, &mut noise);
        for k in (0..d).rev() {
            cur_site[k] += 1;
            if cur_site[k] < next.lo[k] + next.shape[k] as i64 {
                break;
            }
            cur_site[k] = next.lo[k];
        }
    }
    next
}

/// Certified-box monotone CFTP for a site list. Runs the top chain from
/// all-top with boundary frozen at top, and the bottom chain symmetrically;
/// by monotonicity both sandwich every infinite-volume trajectory, so
/// agreement at a site pins the stationary value exactly. The box margin is
/// fixed, depth follows the doubling schedule.
fn sample_window_boxed(
    spec: &PcaSpec,
    sites: &[Site],
    strategy: Strategy,
    source: &dyn UniformSource,
    stream: u32,
    t_max: u64,
) -> Result<Vec<SiteSample>> {
    let Strategy::BoxedEnvelope { margin } = strategy else {
        unreachable!()
    };
    let region = bounding_box(spec.d, sites)?;
    let mut out: Vec<Option<CodingSample>> = vec![None; sites.len()];
    for t in schedule(t_max) {
        // beyond reach * t the frozen boundary cannot influence the window
        // by time 0, so the box tracks the light cone until the margin caps
        let m = margin.min(spec.reach().saturating_mul(t));
        let boxr = LatticeBox::new(region.center.clone(), region.radius + m);
        let mut top = Slab::from_ball(&boxr.center, boxr.radius, spec.top());
        let mut bot = Slab::from_ball(&boxr.center, boxr.radius, spec.bottom());
        for s in 0..t {
            let t_new = -(t as i64) + s as i64 + 1;
            top = step_boxed(spec, &top, t_new, spec.top(), source, stream);
            bot = step_boxed(spec, &bot, t_new, spec.bottom(), source, stream);
        }
        for (k, site) in sites.iter().enumerate() {
            if out[k].is_none() {
                let a = top.get(&site.0);
                if a == bot.get(&site.0) {
                    out[k] = Some(CodingSample {
                        site: site.clone(),
                        value: a,
                        radius: boxr.radius + site.linf_dist(&boxr.center),
                        tau: t,
                    });
                }
            }
        }
        if out.iter().all(|o| o.is_some()) {
            break;
        }
    }
    Ok(out
        .into_iter()
        .zip(sites)
        .map(|(o, s)| match o {
            Some(sample) => SiteSample::Coalesced(sample),
            None => SiteSample::Unresolved { site: s.clone(), t_max },
        })
        .collect())
}
