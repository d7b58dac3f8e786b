//! The thermodynamic jamming limit of the parking (random sequential
//! adsorption) process on Z^d.
//!
//! Each site carries an i.i.d. uniform priority; cars arrive in priority
//! order and a site is occupied iff all 2d nearest neighbors are empty at
//! its arrival. Equivalently, by the memoized recursion: a site is occupied
//! iff every neighbor of strictly lower priority is unoccupied. Chains of
//! strictly decreasing priorities are finite a.s., so the recursion
//! terminates and defines a finitary coding of the uniform field; the
//! algorithmic radius at a site is the l-infinity reach of its exploration.

use crate::cftp::CodingSample;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Site, Window};
use crate::noise::UniformSource;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug)]
pub struct ParkingSpec {
    pub d: u32,
}

impl ParkingSpec {
    pub fn new(d: u32) -> Result<ParkingSpec> {
        if d == 0 {
            return Err(Error::validation("dimension must be >= 1"));
        }
        Ok(ParkingSpec { d })
    }
}

/// One replica of the parking field: a priority source plus a shared value
/// memo. `restrict` limits the process to a finite region with free
/// boundary (the isolated-interval jamming model); `None` is the
/// thermodynamic limit on all of Z^d.
pub struct ParkingRun<'a> {
    spec: ParkingSpec,
    source: &'a dyn UniformSource,
    stream: u32,
    restrict: Option<LatticeBox>,
    memo: HashMap<Vec<i64>, bool>,
}

impl<'a> ParkingRun<'a> {
    pub fn new(
        spec: ParkingSpec,
        source: &'a dyn UniformSource,
        stream: u32,
        restrict: Option<LatticeBox>,
    ) -> ParkingRun<'a> {
        ParkingRun { spec, source, stream, restrict, memo: HashMap::new() }
    }

    /// Raw 64-bit priority; ties across distinct sites are a noise-source
    /// defect and are detected during comparisons.
    pub fn priority(&self, site: &[i64]) -> u64 {
        self.source.bits_at(self.stream, site, 0)
    }

    fn neighbors(&self, site: &[i64]) -> Vec<Vec<i64>> {
        let d = self.spec.d as usize;
        let mut out = Vec::with_capacity(2 * d);
        for k in 0..d {
            for sgn in [1i64, -1] {
                let mut n = site.to_vec();
                n[k] += sgn;
                let inside = match &self.restrict {
                    Some(b) => b.contains(&Site(n.clone())),
                    None => true,
                };
                if inside {
                    out.push(n);
                }
            }
        }
        out
    }

    /// Occupation value with a run-wide memo (fast path for bulk windows;
    /// no radius tracking).
    pub fn occupied(&mut self, site: &[i64]) -> Result<bool> {
        if let Some(&v) = self.memo.get(site) {
            return Ok(v);
        }
        let p = self.priority(site);
        let mut value = true;
        for nb in self.neighbors(site) {
            let q = self.priority(&nb);
            if q == p {
                return Err(Error::PriorityTie { a: site.to_vec(), b: nb });
            }
            if q < p && self.occupied(&nb)? {
                value = false;
                break;
            }
        }
        self.memo.insert(site.to_vec(), value);
        Ok(value)
    }

    /// Occupation plus the exact exploration radius for this site: the
    /// maximal l-infinity distance of any site whose priority the
    /// resolution read. Memoized only within the query so no exploration is
    /// pruned away.
    pub fn sample(&mut self, site: &[i64]) -> Result<CodingSample> {
        let mut local: HashMap<Vec<i64>, bool> = HashMap::new();
        let mut radius = 0u64;
        let value = self.resolve_tracked(site, site, &mut local, &mut radius)?;
        // share the values with the run memo
        for (k, v) in local {
            self.memo.insert(k, v);
        }
        Ok(CodingSample {
            site: Site(site.to_vec()),
            value: u8::from(value),
            radius,
            tau: radius,
        })
    }

    fn resolve_tracked(
        &self,
        origin: &[i64],
        site: &[i64],
        local: &mut HashMap<Vec<i64>, bool>,
        radius: &mut u64,
    ) -> Result<bool> {
        if let Some(&v) = local.get(site) {
            return Ok(v);
        }
        let p = self.priority(site);
        let mut value = true;
        for nb in self.neighbors(site) {
            let dist = origin
                .iter()
                .zip(&nb)
                .map(|(a, b)| a.abs_diff(*b))
                .max()
                .unwrap_or(0);
            *radius = (*radius).max(dist);
            let q = self.priority(&nb);
            if q == p {
                return Err(Error::PriorityTie { a: site.to_vec(), b: nb });
            }
            if q < p && self.resolve_tracked(origin, &nb, local, radius)? {
                value = false;
                break;
            }
        }
        local.insert(site.to_vec(), value);
        Ok(value)
    }

    /// Occupancy window over a box (0 = empty, 1 = occupied).
    pub fn window(&mut self, region: &LatticeBox) -> Result<Window> {
        let sites = region.sites();
        let mut pairs = Vec::with_capacity(sites.len());
        for s in sites {
            let v = self.occupied(&s.0)?;
            pairs.push((s, u8::from(v)));
        }
        Window::new(pairs)
    }

    /// Hard invariants of a resolved region: no two adjacent occupied
    /// sites, and every empty site has an occupied lower-priority neighbor
    /// as its blocking explanation.
    pub fn check_invariants(&mut self, region: &LatticeBox) -> Result<()> {
        for s in region.sites() {
            let occ = self.occupied(&s.0)?;
            let p = self.priority(&s.0);
            let mut blocked = false;
            for nb in self.neighbors(&s.0) {
                let nocc = self.occupied(&nb)?;
                if occ && nocc {
                    return Err(Error::domain(format!(
                        "adjacent occupied pair at {:?} and {:?}",
                        s.0, nb
                    )));
                }
                if self.priority(&nb) < p && nocc {
                    blocked = true;
                }
            }
            if !occ && !blocked {
                return Err(Error::domain(format!(
                    "empty site {:?} with no lower-priority occupied neighbor",
                    s.0
                )));
            }
        }
        Ok(())
    }
}

/// Single-site draw in the thermodynamic limit.
pub fn parking_occupation(
    spec: ParkingSpec,
    site: &Site,
    source: &dyn UniformSource,
    stream: u32,
) -> Result<CodingSample> {
    ParkingRun::new(spec, source, stream, None).sample(&site.0)
}

/// Expected occupied count a_n of the isolated n-site interval (d=1),
/// by the first-arrival split recursion
/// a_n = 1 + (2/n) * sum_{m <= n-2} a_m.
pub fn interval_expected_occupancy(n: usize) -> Vec<f64> {
    let mut a = vec![0.0f64; n + 1];
    let mut prefix = 0.0f64; // sum of a_0..a_{m}
    for m in 1..=n {
        // prefix currently holds sum_{j <= m-2} a_j
        a[m] = 1.0 + 2.0 * prefix / m as f64;
        prefix += a[m - 1];
    }
    a
}

/// Jamming density of the d=1 thermodynamic limit extracted from the
/// interval recursion: a_n - a_{n-1} converges to the density (the Flory
/// value (1 - e^{-2})/2).
pub fn density_1d_from_recursion(n: usize) -> f64 {
    let a = interval_expected_occupancy(n);
    a[n] - a[n - 1]
}
