//! Geometry of Z^d: sites, l-infinity balls, finite configuration windows,
//! and local observables with per-site oscillation vectors.
//!
//! Symbols are small unsigned indices into a per-experiment alphabet.
//! Everything here is immutable after construction and freely shareable
//! across threads.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

/// Alphabet index. Alphabets in this crate are finite and small.
pub type Symbol = u8;

/// A lattice site in Z^d. All sites in one experiment share the dimension.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, serde::Serialize, serde::Deserialize)]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn origin(d: u32) -> Site {
        Site(vec![0; d as usize])
    }
    pub fn dim(&self) -> u32 {
        self.0.len() as u32
    }
    pub fn linf_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
    pub fn linf_dist(&self, other: &Site) -> u64 {
        assert_eq!(self.dim(), other.dim(), "sites of mixed dimension");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .max()
            .unwrap_or(0)
    }
    pub fn offset(&self, u: &[i64]) -> Site {
        Site(self.0.iter().zip(u).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<i64>> for Site {
    fn from(v: Vec<i64>) -> Site {
        Site(v)
    }
}

/// Volume of the closed l-infinity ball of radius `r` in Z^d: (2r+1)^d,
/// computed in checked 128-bit arithmetic. Overflow is an error, never a
/// wraparound.
pub fn ball_volume(d: u32, r: u64) -> Result<u128> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let side = 2u128
        .checked_mul(r as u128)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::Overflow(format!("2*{r}+1 exceeds u128")))?;
    side.checked_pow(d)
        .ok_or_else(|| Error::Overflow(format!("(2*{r}+1)^{d} exceeds u128")))
}

/// A closed l-infinity ball `B(center, radius)`, the paper-facing notion of
/// a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    pub center: Site,
    pub radius: u64,
}

impl LatticeBox {
    pub fn new(center: Site, radius: u64) -> LatticeBox {
        LatticeBox { center, radius }
    }
    pub fn centered(d: u32, radius: u64) -> LatticeBox {
        LatticeBox { center: Site::origin(d), radius }
    }
    pub fn dim(&self) -> u32 {
        self.center.dim()
    }
    pub fn contains(&self, site: &Site) -> bool {
        self.center.linf_dist(site) <= self.radius
    }
    pub fn volume(&self) -> Result<u128> {
        ball_volume(self.dim(), self.radius)
    }
    /// All sites of the box in lexicographic order.
    pub fn sites(&self) -> Vec<Site> {
        let d = self.dim() as usize;
        let r = self.radius as i64;
        let mut out = Vec::new();
        let mut cur = vec![-r; d];
        loop {
            out.push(Site(
                cur.iter().zip(&self.center.0).map(|(o, c)| c + o).collect(),
            ));
            let mut k = d;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] < r {
                    cur[k] += 1;
                    for c in cur.iter_mut().skip(k + 1) {
                        *c = -r;
                    }
                    break;
                }
            }
            if cur.iter().all(|&c| c == -r) {
                unreachable!();
            }
        }
    }
}

/// A finite configuration: a sorted site list with one symbol per site.
/// Sites are kept in canonical lexicographic order so serialization is
/// deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    sites: Vec<Site>,
    values: Vec<Symbol>,
    index: HashMap<Site, usize>,
}

impl Window {
    pub fn new(mut pairs: Vec<(Site, Symbol)>) -> Result<Window> {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::validation(format!(
                    "duplicate site {:?} in window",
                    w[0].0
                )));
            }
        }
        let sites: Vec<Site> = pairs.iter().map(|(s, _)| s.clone()).collect();
        let values: Vec<Symbol> = pairs.iter().map(|(_, v)| *v).collect();
        let index = sites.iter().cloned().zip(0..).collect();
        Ok(Window { sites, values, index })
    }

    pub fn from_fn(sites: &[Site], f: impl Fn(&Site) -> Symbol) -> Window {
        let pairs: Vec<(Site, Symbol)> = sites.iter().map(|s| (s.clone(), f(s))).collect();
        Window::new(pairs).expect("sites must be distinct")
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }
    pub fn values(&self) -> &[Symbol] {
        &self.values
    }
    pub fn get(&self, site: &Site) -> Option<Symbol> {
        self.index.get(site).map(|&i| self.values[i])
    }
    pub fn covers(&self, sites: &[Site]) -> bool {
        sites.iter().all(|s| self.index.contains_key(s))
    }
    /// A copy with one site rewritten.
    pub fn with_value(&self, site: &Site, v: Symbol) -> Window {
        let mut w = self.clone();
        let i = *w.index.get(site).expect("site not in window");
        w.values[i] = v;
        w
    }
}

/// Hamming distance between two windows over the site set `lambda`, which
/// must be covered by both.
pub fn hamming(x: &Window, y: &Window, lambda: &[Site]) -> Result<u64> {
    let mut d = 0u64;
    for s in lambda {
        match (x.get(s), y.get(s)) {
            (Some(a), Some(b)) => {
                if a != b {
                    d += 1;
                }
            }
            _ => {
                return Err(Error::domain(format!(
                    "site {s:?} not covered by both windows"
                )))
            }
        }
    }
    Ok(d)
}

type EvalFn = Arc<dyn Fn(&Window) -> f64 + Send + Sync>;

/// A local observable: a finite dependence set, an evaluator, and the
/// per-site oscillation vector delta_j f (zero off the dependence set).
#[derive(Clone)]
pub struct Observable {
    dep: Vec<Site>,
    osc: Vec<f64>,
    eval: EvalFn,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable")
            .field("dep", &self.dep)
            .field("osc", &self.osc)
            .finish()
    }
}

impl Observable {
    /// `osc` entries are matched with `dep`; all must be finite and
    /// non-negative (the bounded-difference property).
    pub fn new(dep: Vec<Site>, osc: Vec<f64>, eval: EvalFn) -> Result<Observable> {
        if dep.len() != osc.len() {
            return Err(Error::validation("dep/osc length mismatch"));
        }
        if osc.iter().any(|&o| !o.is_finite() || o < 0.0) {
            return Err(Error::validation("oscillations must be finite and >= 0"));
        }
        let mut pairs: Vec<(Site, f64)> = dep.into_iter().zip(osc).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Observable {
            dep: pairs.iter().map(|(s, _)| s.clone()).collect(),
            osc: pairs.iter().map(|(_, o)| *o).collect(),
            eval: eval.clone(),
        })
    }

    pub fn dep(&self) -> &[Site] {
        &self.dep
    }
    pub fn osc(&self) -> &[f64] {
        &self.osc
    }

    pub fn eval(&self, w: &Window) -> Result<f64> {
        if !w.covers(&self.dep) {
            return Err(Error::domain("window does not cover dep(f)"));
        }
        Ok((self.eval)(w))
    }

    /// ||delta f||_p for integer p >= 1; empty dependence set gives 0.
    pub fn osc_norm(&self, p: u32) -> f64 {
        assert!(p >= 1, "osc_norm requires p >= 1");
        self.osc
            .iter()
            .map(|o| o.powi(p as i32))
            .sum::<f64>()
            .powf(1.0 / p as f64)
    }

    pub fn osc_norm_inf(&self) -> f64 {
        self.osc.iter().cloned().fold(0.0, f64::max)
    }

    /// ||delta f||_2^2, the quantity every concentration bound consumes.
    pub fn osc_sq(&self) -> f64 {
        self.osc.iter().map(|o| o * o).sum()
    }

    /// Sum of spins (symbols mapped 0 -> -1, 1 -> +1) over a site set.
    /// delta_j f = 2 at every site.
    pub fn spin_sum(sites: Vec<Site>) -> Observable {
        let dep = sites.clone();
        let osc = vec![2.0; dep.len()];
        Observable::new(
            dep,
            osc,
            Arc::new(move |w: &Window| {
                sites
                    .iter()
                    .map(|s| 2.0 * w.get(s).expect("covered") as f64 - 1.0)
                    .sum()
            }),
        )
        .expect("valid by construction")
    }

    /// Mean of spins over a site set; delta_j f = 2/n.
    pub fn spin_mean(sites: Vec<Site>) -> Observable {
        let n = sites.len() as f64;
        let dep = sites.clone();
        let osc = vec![2.0 / n; dep.len()];
        Observable::new(
            dep,
            osc,
            Arc::new(move |w: &Window| {
                sites
                    .iter()
                    .map(|s| 2.0 * w.get(s).expect("covered") as f64 - 1.0)
                    .sum::<f64>()
                    / n
            }),
        )
        .expect("valid by construction")
    }

    /// The spin at a single site; delta = 2, ||delta f||_2 = 2.
    pub fn single_spin(site: Site) -> Observable {
        let s = site.clone();
        Observable::new(
            vec![site],
            vec![2.0],
            Arc::new(move |w: &Window| 2.0 * w.get(&s).expect("covered") as f64 - 1.0),
        )
        .expect("valid by construction")
    }

    /// Indicator that a single site carries `symbol`; delta = 1,
    /// ||delta f||_2 = 1.
    pub fn site_indicator(site: Site, symbol: Symbol) -> Observable {
        let s = site.clone();
        Observable::new(
            vec![site],
            vec![1.0],
            Arc::new(move |w: &Window| {
                if w.get(&s).expect("covered") == symbol {
                    1.0
                } else {
                    0.0
                }
            }),
        )
        .expect("valid by construction")
    }
}

/// Exhaustive oscillation of `eval` at `site`: max |f(w) - f(w')| over all
/// assignments of the dependence set, with w, w' differing only at `site`.
/// Exponential in |dep|; used as an oracle for analytically supplied
/// oscillation vectors.
pub fn exhaustive_oscillation(
    dep: &[Site],
    alphabet: u8,
    eval: &dyn Fn(&Window) -> f64,
    site: &Site,
) -> f64 {
    let n = dep.len();
    let pos = dep.iter().position(|s| s == site);
    let Some(pos) = pos else { return 0.0 };
    let mut assign = vec![0u8; n];
    let mut worst = 0.0f64;
    loop {
        let w = Window::from_fn(dep, |s| {
            assign[dep.iter().position(|t| t == s).unwrap()]
        });
        let base = eval(&w);
        for v in 0..alphabet {
            if v == assign[pos] {
                continue;
            }
            let w2 = w.with_value(site, v);
            worst = worst.max((eval(&w2) - base).abs());
        }
        // odometer over the remaining coordinates
        let mut k = 0;
        loop {
            if k == n {
                return worst;
            }
            if assign[k] + 1 < alphabet {
                assign[k] += 1;
                break;
            }
            assign[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volume_matches_formula() {
        assert_eq!(ball_volume(1, 0).unwrap(), 1);
        assert_eq!(ball_volume(2, 1).unwrap(), 9);
        assert_eq!(ball_volume(3, 2).unwrap(), 125);
        assert_eq!(ball_volume(1, 7).unwrap(), 15);
    }

    #[test]
    fn ball_volume_overflow_is_an_error() {
        assert!(matches!(ball_volume(3, u64::MAX / 2), Err(Error::Overflow(_))));
        assert!(ball_volume(0, 1).is_err());
    }

    #[test]
    fn ball_volume_strictly_increasing_in_radius() {
        for d in 1..=3 {
            for r in 0..6u64 {
                assert!(ball_volume(d, r + 1).unwrap() > ball_volume(d, r).unwrap());
            }
            assert_eq!(ball_volume(1, 11).unwrap(), 23);
        }
    }

    #[test]
    fn box_membership_consistent_with_linf() {
        let b = LatticeBox::centered(2, 2);
        for s in b.sites() {
            assert!(b.contains(&s));
            assert!(s.linf_norm() <= 2);
        }
        assert_eq!(b.sites().len() as u128, b.volume().unwrap());
        assert!(!b.contains(&Site(vec![3, 0])));
    }

    #[test]
    fn hamming_basic_cases() {
        let sites: Vec<Site> = (0..5).map(|i| Site(vec![i])).collect();
        let x = Window::from_fn(&sites, |_| 0);
        let y = x.clone();
        assert_eq!(hamming(&x, &y, &sites).unwrap(), 0);
        let y2 = y.with_value(&Site(vec![2]), 1);
        assert_eq!(hamming(&x, &y2, &sites).unwrap(), 1);
        // domain error when lambda is not covered
        let off = vec![Site(vec![99])];
        assert!(hamming(&x, &y2, &off).is_err());
    }

    #[test]
    fn hamming_matches_per_site_count_on_random_pair() {
        // brute-force site-by-site comparison as the oracle
        let sites: Vec<Site> = (0..12).map(|i| Site(vec![i])).collect();
        let x = Window::from_fn(&sites, |s| (s.0[0] % 3) as Symbol);
        let y = Window::from_fn(&sites, |s| ((s.0[0] * 7 + 1) % 3) as Symbol);
        let oracle = sites
            .iter()
            .filter(|s| x.get(s) != y.get(s))
            .count() as u64;
        assert_eq!(hamming(&x, &y, &sites).unwrap(), oracle);
    }

    #[test]
    fn osc_norms_on_named_observables() {
        let lam: Vec<Site> = LatticeBox::centered(1, 3).sites();
        let f = Observable::spin_sum(lam.clone());
        // block spin sum: ||delta f||_2^2 = 4 |Lambda|
        assert!((f.osc_sq() - 4.0 * lam.len() as f64).abs() < 1e-12);
        let g = Observable::site_indicator(Site(vec![0]), 1);
        assert!((g.osc_norm(2) - 1.0).abs() < 1e-12);
        let c = Observable::new(vec![], vec![], Arc::new(|_| 42.0)).unwrap();
        assert_eq!(c.osc_norm(2), 0.0);
        assert_eq!(c.osc_norm(1), 0.0);
    }

    #[test]
    fn osc_norm_monotone_in_p() {
        let f = Observable::new(
            (0..6).map(|i| Site(vec![i])).collect(),
            vec![0.3, 1.2, 0.0, 2.0, 0.7, 0.1],
            Arc::new(|_| 0.0),
        )
        .unwrap();
        assert!(f.osc_norm_inf() <= f.osc_norm(2) + 1e-12);
        assert!(f.osc_norm(2) <= f.osc_norm(1) + 1e-12);
    }

    #[test]
    fn exhaustive_oscillation_agrees_with_analytic() {
        let dep: Vec<Site> = (0..3).map(|i| Site(vec![i])).collect();
        let f = Observable::spin_sum(dep.clone());
        let eval = move |w: &Window| {
            dep.iter()
                .map(|s| 2.0 * w.get(s).unwrap() as f64 - 1.0)
                .sum()
        };
        for s in f.dep() {
            let o = exhaustive_oscillation(f.dep(), 2, &eval, s);
            assert!((o - 2.0).abs() < 1e-12);
        }
        // off-dep sites have zero oscillation
        assert_eq!(
            exhaustive_oscillation(f.dep(), 2, &eval, &Site(vec![17])),
            0.0
        );
    }

    #[test]
    fn eval_depends_only_on_dep_fuzz() {
        // flipping any site outside dep never changes eval
        let dep: Vec<Site> = (0..4).map(|i| Site(vec![i])).collect();
        let f = Observable::spin_sum(dep.clone());
        let mut sites = dep.clone();
        sites.extend((4..10).map(|i| Site(vec![i])));
        let w = Window::from_fn(&sites, |s| (s.0[0] % 2) as Symbol);
        let base = f.eval(&w).unwrap();
        for i in 4..10 {
            let w2 = w.with_value(&Site(vec![i]), 1 - w.get(&Site(vec![i])).unwrap());
            assert_eq!(f.eval(&w2).unwrap(), base);
        }
    }

    #[test]
    fn window_rejects_duplicates_and_serializes_sorted() {
        let dup = Window::new(vec![(Site(vec![0]), 1), (Site(vec![0]), 0)]);
        assert!(dup.is_err());
        let w = Window::new(vec![(Site(vec![3]), 1), (Site(vec![-1]), 0)]).unwrap();
        assert_eq!(w.sites()[0], Site(vec![-1]));
    }
}
