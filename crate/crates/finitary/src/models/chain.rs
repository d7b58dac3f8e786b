//! Finite (or truncated-countable) Markov chains: kernel validation,
//! stationary laws by direct linear solve, Doeblin certificates, the
//! multigamma coupling-from-the-past, forward simulation, and return-time
//! tail diagnostics.
//!
//! Chains live on the d=1 time axis; noise for the backward construction is
//! keyed at negative positions, so these codings are left finitary by
//! construction (they read only noise at positions at or before the
//! output).

use crate::error::{Error, Result};
use crate::noise::{categorical_from_uniform, UniformSource};
use crate::stats::{self, LineFit};

/// A user-supplied uniform minorization P^m(x, .) >= beta * nu(.).
#[derive(Clone, Debug)]
pub struct DoeblinCert {
    pub m: u32,
    pub beta: f64,
    pub nu: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ChainSpec {
    kernel: Vec<Vec<f64>>,
    doeblin: Option<DoeblinCert>,
    /// Mass removed per row by truncating a countable state space, recorded
    /// at construction; rows are renormalized.
    pub tail_defect: f64,
}

const ROW_SUM_TOL: f64 = 1e-12;

impl ChainSpec {
    /// Validate a row-stochastic kernel: rows sum to 1 within 1e-12, the
    /// chain is irreducible and aperiodic on the truncated support.
    pub fn new(kernel: Vec<Vec<f64>>, doeblin: Option<DoeblinCert>) -> Result<ChainSpec> {
        let n = kernel.len();
        if n == 0 {
            return Err(Error::validation("empty kernel"));
        }
        for (i, row) in kernel.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation("kernel must be square"));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::validation("kernel entries must be finite and >= 0"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::validation(format!(
                    "row {i} sums to {s}, not within 1e-12 of 1"
                )));
            }
        }
        let spec = ChainSpec { kernel, doeblin, tail_defect: 0.0 };
        spec.check_irreducible_aperiodic()?;
        if let Some(cert) = &spec.doeblin {
            spec.verify_doeblin(cert)?;
        }
        Ok(spec)
    }

    /// Truncate a countable-state kernel given by `row(i, j)` to states
    /// 0..n, renormalizing rows and recording the worst tail defect.
    pub fn truncated(
        n: usize,
        row: impl Fn(usize, usize) -> f64,
        doeblin: Option<DoeblinCert>,
    ) -> Result<ChainSpec> {
        let mut kernel = Vec::with_capacity(n);
        let mut defect = 0.0f64;
        for i in 0..n {
            let mut r: Vec<f64> = (0..n).map(|j| row(i, j)).collect();
            let s: f64 = r.iter().sum();
            if s <= 0.0 {
                return Err(Error::validation(format!("row {i} has no mass on truncation")));
            }
            defect = defect.max(1.0 - s);
            for p in &mut r {
                *p /= s;
            }
            kernel.push(r);
        }
        let mut spec = ChainSpec::new(kernel, doeblin)?;
        spec.tail_defect = defect.max(0.0);
        Ok(spec)
    }

    pub fn n_states(&self) -> usize {
        self.kernel.len()
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn doeblin(&self) -> Option<&DoeblinCert> {
        self.doeblin.as_ref()
    }

    fn check_irreducible_aperiodic(&self) -> Result<()> {
        let n = self.n_states();
        let eps = 0.0;
        let reach_from = |start: usize, transpose: bool| -> Vec<bool> {
            let mut seen = vec![false; n];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let p = if transpose { self.kernel[v][u] } else { self.kernel[u][v] };
                    if p > eps && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        };
        let fwd = reach_from(0, false);
        let bwd = reach_from(0, true);
        if !(fwd.iter().all(|&b| b) && bwd.iter().all(|&b| b)) {
            return Err(Error::validation("kernel is not irreducible on its support"));
        }
        // period = gcd over edges (u,v) of dist(u) + 1 - dist(v), with BFS
        // distances from state 0; 1 means aperiodic
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        dist[0] = 0;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if self.kernel[u][v] > eps && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g: u64 = 0;
        for u in 0..n {
            for v in 0..n {
                if self.kernel[u][v] > eps {
                    let delta = (dist[u] as i64 + 1 - dist[v] as i64).unsigned_abs();
                    g = gcd(g, delta);
                }
            }
        }
        if g != 1 {
            return Err(Error::validation(format!("chain is periodic with period {g}")));
        }
        Ok(())
    }

    /// Verify the minorization inf_x P^m(x, y) >= beta * nu(y) pointwise on
    /// the truncated support.
    pub fn verify_doeblin(&self, cert: &DoeblinCert) -> Result<()> {
        if cert.m == 0 {
            return Err(Error::validation("Doeblin m must be >= 1"));
        }
        if !(cert.beta > 0.0 && cert.beta <= 1.0) {
            return Err(Error::validation("Doeblin beta must lie in (0, 1]"));
        }
        crate::noise::validate_weights(&cert.nu)?;
        if cert.nu.len() != self.n_states() {
            return Err(Error::validation("nu dimension mismatch"));
        }
        let pm = self.kernel_power(cert.m);
        for y in 0..self.n_states() {
            let floor: f64 = (0..self.n_states())
                .map(|x| pm[x][y])
                .fold(f64::INFINITY, f64::min);
            if floor + 1e-12 < cert.beta * cert.nu[y] {
                return Err(Error::validation(format!(
                    "minorization fails at state {y}: min_x P^m(x,{y}) = {floor} < beta*nu = {}",
                    cert.beta * cert.nu[y]
                )));
            }
        }
        Ok(())
    }

    pub fn kernel_power(&self, m: u32) -> Vec<Vec<f64>> {
        let n = self.n_states();
        let mut acc: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| f64::from(i == j)).collect())
            .collect();
        for _ in 0..m {
            let mut next = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..n {
                    let a = acc[i][k];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i][j] += a * self.kernel[k][j];
                    }
                }
            }
            acc = next;
        }
        acc
    }

    /// Stationary distribution by direct linear solve of pi P = pi,
    /// sum pi = 1 (Gaussian elimination with partial pivoting). This is the
    /// module-wide oracle every CFTP output law is compared against.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let n = self.n_states();
        // rows: (P^T - I) pi = 0 with the last equation replaced by sum = 1
        let mut a = vec![vec![0.0f64; n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = self.kernel[j][i] - f64::from(i == j);
            }
        }
        for j in 0..n {
            a[n - 1][j] = 1.0;
        }
        a[n - 1][n] = 1.0;
        // elimination
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
                .unwrap();
            if a[piv][col].abs() < 1e-14 {
                return Err(Error::domain("singular system in stationary solve"));
            }
            a.swap(col, piv);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        let mut pi: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
        let s: f64 = pi.iter().sum();
        for p in &mut pi {
            *p /= s;
        }
        Ok(pi)
    }

    /// Forward simulation from `start`, one uniform per step keyed at the
    /// step's position.
    pub fn simulate_path(
        &self,
        source: &dyn UniformSource,
        stream: u32,
        start: usize,
        len: usize,
    ) -> Vec<usize> {
        let mut path = Vec::with_capacity(len + 1);
        let mut x = start;
        path.push(x);
        for t in 0..len {
            let u = source.uniform_at(stream, &[t as i64], 0);
            x = categorical_from_uniform(u, &self.kernel[x]);
            path.push(x);
        }
        path
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Result of one multigamma CFTP draw.
#[derive(Clone, Debug)]
pub struct MultigammaDraw {
    pub state: usize,
    /// Regeneration depth in steps; theta/m is Geometric(beta) by
    /// construction.
    pub theta: u64,
}

/// Multigamma coupling from the past under a verified Doeblin certificate.
///
/// Going backward in m-step blocks, each block regenerates with probability
/// beta using one shared uniform: on regeneration all states coalesce to a
/// draw from nu, after which the residual kernel R = (P^m - beta nu)/(1-beta)
/// runs forward through the remaining blocks. The returned state is exactly
/// stationary. The single block uniform is reused for the regeneration
/// check, the nu draw, and the residual draw via disjoint rescaling.
///
/// Block j >= 1 consumes the uniform at position -j, so the coding reads
/// only positions < 0: left finitary.
pub fn multigamma_cftp(
    spec: &ChainSpec,
    source: &dyn UniformSource,
    stream: u32,
) -> Result<MultigammaDraw> {
    let cert = spec
        .doeblin()
        .ok_or_else(|| Error::validation("multigamma CFTP requires a Doeblin certificate"))?;
    let n = spec.n_states();
    let beta = cert.beta;
    // residual kernel rows; only needed when beta < 1
    let residual: Option<Vec<Vec<f64>>> = if beta < 1.0 {
        let pm = spec.kernel_power(cert.m);
        let mut r = vec![vec![0.0; n]; n];
        for x in 0..n {
            let mut s = 0.0;
            for y in 0..n {
                r[x][y] = ((pm[x][y] - beta * cert.nu[y]) / (1.0 - beta)).max(0.0);
                s += r[x][y];
            }
            for y in 0..n {
                r[x][y] /= s;
            }
        }
        Some(r)
    } else {
        None
    };
    // find the first regenerating block going backward
    let mut j = 1u64;
    let (mut state, depth) = loop {
        let u = source.uniform_at(stream, &[-(j as i64)], 0);
        if u < beta {
            let v = u / beta; // conditionally uniform given u < beta
            break (categorical_from_uniform(v, &cert.nu), j);
        }
        j += 1;
        if j > 1 << 40 {
            return Err(Error::domain("no regeneration after 2^40 blocks"));
        }
    };
    // run the residual kernel forward through blocks depth-1 .. 1
    if let Some(r) = &residual {
        for jj in (1..depth).rev() {
            let u = source.uniform_at(stream, &[-(jj as i64)], 0);
            let w = (u - beta) / (1.0 - beta); // conditionally uniform given no regen
            state = categorical_from_uniform(w, &r[state]);
        }
    }
    Ok(MultigammaDraw { state, theta: depth * cert.m as u64 })
}

#[derive(Debug, Clone)]
pub struct ReturnTimeReport {
    pub visits: usize,
    /// (k, empirical P(tau_b > k | X_0 = b)) pairs with nonzero mass.
    pub survival: Vec<(u64, f64)>,
    pub fit: LineFit,
    /// Verdict: slope CI excludes 0 on the log-survival curve.
    pub exponential_compatible: bool,
}

/// Empirical return-time tail to state `b` from one or more state paths,
/// with a log-linear fit of the survival curve.
pub fn return_time_tail(paths: &[Vec<usize>], b: usize, confidence: f64) -> Result<ReturnTimeReport> {
    let mut returns: Vec<u64> = Vec::new();
    for path in paths {
        let mut last: Option<usize> = None;
        for (t, &x) in path.iter().enumerate() {
            if x == b {
                if let Some(l) = last {
                    returns.push((t - l) as u64);
                }
                last = Some(t);
            }
        }
    }
    if returns.len() < 100 {
        return Err(Error::domain(format!(
            "need at least 100 visits to state {b}, got {}",
            returns.len()
        )));
    }
    let n = returns.len() as f64;
    let max = *returns.iter().max().unwrap();
    let mut survival = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..max {
        let p = returns.iter().filter(|&&r| r > k).count() as f64 / n;
        if p <= 0.0 {
            break;
        }
        survival.push((k, p));
        // drop the sparse extreme tail from the fit
        if p * n >= 10.0 {
            xs.push(k as f64);
            ys.push(p.ln());
        }
    }
    let fit = stats::ols_fit(&xs, &ys, confidence)
        .ok_or_else(|| Error::domain("not enough survival points to fit"))?;
    let exponential_compatible = fit.slope_ci.hi < 0.0;
    Ok(ReturnTimeReport { visits: returns.len(), survival, fit, exponential_compatible })
}

/// Empirical distribution over states from repeated draws, as a probability
/// vector.
pub fn empirical_law(draws: &[usize], n_states: usize) -> Vec<f64> {
    let mut counts = vec![0u64; n_states];
    for &d in draws {
        counts[d] += 1;
    }
    counts.iter().map(|&c| c as f64 / draws.len() as f64).collect()
}

pub fn law_ci_halfwidth(n_draws: usize, confidence: f64) -> f64 {
    stats::z_two_sided(confidence) * 0.5 / (n_draws as f64).sqrt()
}
