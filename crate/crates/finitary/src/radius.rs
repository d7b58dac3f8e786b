//! Coding-radius utilities: the definition-faithful exhaustive oracle,
//! truncation to a block code, and composite-radius containment checks.

use crate::cftp::CodingSample;
use crate::error::{Error, Result};
use crate::lattice::{ball_volume, Site, Symbol, Window};
use crate::noise::UniformSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Exact(u64),
    Exceeds(u64),
}

/// Definitional coding radius at the origin of a black-box coding on a
/// bounded window: the smallest r such that every configuration agreeing
/// with `x` on B(0, r) yields the same output at 0, certified by exhaustive
/// perturbation of all sites outside the ball. Exponential cost; intended
/// for tiny instances only.
pub fn radius_oracle(
    coding: &dyn Fn(&Window) -> Symbol,
    x: &Window,
    alphabet: u8,
    r_max: u64,
    max_configs: u128,
) -> Result<OracleOutcome> {
    let d = x
        .sites()
        .first()
        .ok_or_else(|| Error::domain("empty window"))?
        .dim();
    let origin = Site::origin(d);
    let reference = coding(x);
    'radius: for r in 0..=r_max {
        if ball_volume(d, r)? > x.len() as u128 {
            // window no longer distinguishes radii
            break;
        }
        let free: Vec<Site> = x
            .sites()
            .iter()
            .filter(|s| origin.linf_dist(s) > r)
            .cloned()
            .collect();
        let combos = (alphabet as u128)
            .checked_pow(u32::try_from(free.len()).map_err(|_| {
                Error::Budget("free-site count exceeds enumeration width".into())
            })?)
            .ok_or_else(|| Error::Budget("perturbation count overflows".into()))?;
        if combos > max_configs {
            return Err(Error::Budget(format!(
                "{combos} perturbations exceed budget {max_configs}"
            )));
        }
        let mut assign = vec![0u8; free.len()];
        loop {
            let mut w = x.clone();
            for (s, v) in free.iter().zip(&assign) {
                w = w.with_value(s, *v);
            }
            if coding(&w) != reference {
                continue 'radius;
            }
            let mut k = 0;
            loop {
                if k == free.len() {
                    return Ok(OracleOutcome::Exact(r));
                }
                if assign[k] + 1 < alphabet {
                    assign[k] += 1;
                    break;
                }
                assign[k] = 0;
                k += 1;
            }
            if free.is_empty() {
                return Ok(OracleOutcome::Exact(r));
            }
        }
    }
    Ok(OracleOutcome::Exceeds(r_max))
}

/// Truncation of a sampled coding at level `n`: keep the value where the
/// measured radius is at most n, else emit the reference symbol. The result
/// is a block code of deterministic radius <= n.
pub fn truncate_samples(samples: &[CodingSample], n: u64, b0: Symbol) -> Vec<(Site, Symbol)> {
    samples
        .iter()
        .map(|s| {
            let v = if s.radius <= n { s.value } else { b0 };
            (s.site.clone(), v)
        })
        .collect()
}

/// Fraction of sites whose value the truncation altered (value replaced and
/// differing from the original).
pub fn truncation_altered_fraction(samples: &[CodingSample], n: u64, b0: Symbol) -> f64 {
    let altered = samples
        .iter()
        .filter(|s| s.radius > n && s.value != b0)
        .count();
    altered as f64 / samples.len() as f64
}

/// A d=1 coding from the noise field to a symbol field, reporting per-site
/// algorithmic radii. Used as the inner map of composition checks.
pub trait NoiseCoding1d: Sync {
    fn alphabet(&self) -> u8;
    fn sample(&self, source: &dyn UniformSource, stream: u32, site: i64) -> Result<CodingSample>;
}

/// A d=1 coding from a symbol field to symbols, reading its input through a
/// callback so the harness can instrument which input sites it examines.
pub trait FieldCoding1d: Sync {
    fn input_alphabet(&self) -> u8;
    fn code_at(&self, input: &mut dyn FnMut(i64) -> Symbol, site: i64) -> Symbol;
}

#[derive(Clone, Debug)]
pub struct CompositeReplica {
    /// Radius of the outer coding alone (max |k| over queried input sites).
    pub outer_radius: u64,
    /// Measured composite radius: the l-infinity extent of all inner-noise
    /// sites the composite evaluation depends on.
    pub composite_radius: u64,
    /// The containment bound max_{k in B(0, outer_radius)} (|k| + r1(k)).
    pub bound: u64,
    pub value: Symbol,
}

/// Measure the algorithmic radius of outer∘inner at the origin for one
/// replica and evaluate the union-of-random-balls containment bound.
pub fn composite_radius(
    inner: &dyn NoiseCoding1d,
    outer: &dyn FieldCoding1d,
    source: &dyn UniformSource,
    stream: u32,
) -> Result<CompositeReplica> {
    if inner.alphabet() != outer.input_alphabet() {
        return Err(Error::validation(
            "output alphabet of the inner coding must match the outer input alphabet",
        ));
    }
    let mut cache: std::collections::HashMap<i64, CodingSample> = std::collections::HashMap::new();
    let mut err: Option<Error> = None;
    let mut queried: Vec<i64> = Vec::new();
    let value = {
        let mut input = |k: i64| -> Symbol {
            queried.push(k);
            match cache.entry(k) {
                std::collections::hash_map::Entry::Occupied(e) => e.get().value,
                std::collections::hash_map::Entry::Vacant(e) => {
                    match inner.sample(source, stream, k) {
                        Ok(s) => {
                            let v = s.value;
                            e.insert(s);
                            v
                        }
                        Err(e2) => {
                            err.get_or_insert(e2);
                            0
                        }
                    }
                }
            }
        };
        outer.code_at(&mut input, 0)
    };
    if let Some(e) = err {
        return Err(e);
    }
    let outer_radius = queried.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0);
    let composite_radius = queried
        .iter()
        .map(|k| k.unsigned_abs() + cache[k].radius)
        .max()
        .unwrap_or(0);
    // bound ranges over the whole ball, not only the queried sites
    let mut bound = 0u64;
    for k in -(outer_radius as i64)..=(outer_radius as i64) {
        let r1 = match cache.get(&k) {
            Some(s) => s.radius,
            None => inner.sample(source, stream, k)?.radius,
        };
        bound = bound.max(k.unsigned_abs() + r1);
    }
    Ok(CompositeReplica { outer_radius, composite_radius, bound, value })
}

/// Identity field coding: reads exactly the origin.
pub struct IdentityField {
    pub alphabet: u8,
}

impl FieldCoding1d for IdentityField {
    fn input_alphabet(&self) -> u8 {
        self.alphabet
    }
    fn code_at(&self, input: &mut dyn FnMut(i64) -> Symbol, site: i64) -> Symbol {
        input(site)
    }
}

/// Outer coding that scans right from the site until it reads `target`
/// (capped), emitting the distance mod alphabet. Random radius driven by the
/// input field.
pub struct ScanToSymbol {
    pub alphabet: u8,
    pub target: Symbol,
    pub cap: u64,
}

impl FieldCoding1d for ScanToSymbol {
    fn input_alphabet(&self) -> u8 {
        self.alphabet
    }
    fn code_at(&self, input: &mut dyn FnMut(i64) -> Symbol, site: i64) -> Symbol {
        for k in 0..=self.cap {
            if input(site + k as i64) == self.target {
                return (k % self.alphabet as u64) as Symbol;
            }
        }
        0
    }
}

#[derive(Clone)]
pub struct ConstantRadiusCoding {
    pub alphabet: u8,
    pub radius: u64,
}

impl NoiseCoding1d for ConstantRadiusCoding {
    fn alphabet(&self) -> u8 {
        self.alphabet
    }
    fn sample(&self, source: &dyn UniformSource, stream: u32, site: i64) -> Result<CodingSample> {
        // parity of the noise bits over the ball; radius deterministic
        let mut acc = 0u64;
        for k in -(self.radius as i64)..=(self.radius as i64) {
            acc ^= source.bits_at(stream, &[site + k], 0);
        }
        Ok(CodingSample {
            site: Site(vec![site]),
            value: (acc % self.alphabet as u64) as Symbol,
            radius: self.radius,
            tau: self.radius,
        })
    }
}
