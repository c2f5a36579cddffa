//! How the clamp levels move with the bound `κ` while the active indices
//! `(α, β)` stay fixed: `μ(κ) = (κA + B)/(ακ² + c)` and `ν(κ) = κ μ(κ)`, with
//! `A = Σ_{i≤α} λ̂ᵢ`, `B = Σ_{i≥β} λ̂ᵢ`, `c = p − β + 1`.

use serde::Serialize;

use crate::error::{check_kappa, Error, Result};
use crate::solver::{candidate_mu, search_optimal, EigenSpectrum, TruncationSolution};

struct RegionSums {
    top: f64,
    bottom: f64,
    alpha: f64,
    tail_count: f64,
}

fn region_sums(alpha: usize, beta: usize, spectrum: &EigenSpectrum) -> Result<RegionSums> {
    let p = spectrum.dim();
    if !(alpha >= 1 && alpha < beta && beta <= p + 1) {
        return Err(Error::InvalidIndex(format!(
            "need 1 <= alpha < beta <= p + 1, got alpha = {alpha}, beta = {beta}, p = {p}"
        )));
    }
    let v = spectrum.values();
    Ok(RegionSums {
        top: v[..alpha].iter().sum(),
        bottom: v[beta - 1..].iter().rev().sum(),
        alpha: alpha as f64,
        tail_count: (p + 1 - beta) as f64,
    })
}

/// `μ(κ)` on the region `(α, β)`; the caller decides whether that region is active.
pub fn mu_of_kappa(alpha: usize, beta: usize, spectrum: &EigenSpectrum, kappa: f64) -> Result<f64> {
    candidate_mu(alpha, beta, spectrum, kappa)
}

pub fn nu_of_kappa(alpha: usize, beta: usize, spectrum: &EigenSpectrum, kappa: f64) -> Result<f64> {
    Ok(kappa * mu_of_kappa(alpha, beta, spectrum, kappa)?)
}

/// `γ₁ = Σ_{i≤α} λ̂ᵢ / Σ_{i≥β} λ̂ᵢ` and `γ₂ = (p − β + 1)/α`.
pub fn gamma_ratios(alpha: usize, beta: usize, spectrum: &EigenSpectrum) -> Result<(f64, f64)> {
    let s = region_sums(alpha, beta, spectrum)?;
    Ok((s.top / s.bottom, s.tail_count / s.alpha))
}

/// `κ_μ = max(√(r² + q) − r, 1)` with `r = B/A`, `q = c/α`.
pub fn kappa_mu_maximizer(alpha: usize, beta: usize, spectrum: &EigenSpectrum) -> Result<f64> {
    let s = region_sums(alpha, beta, spectrum)?;
    if s.top.is_nan() || s.top <= 0.0 {
        return Err(Error::InvalidIndex(format!("the top {alpha} entries sum to zero")));
    }
    let r = s.bottom / s.top;
    let q = s.tail_count / s.alpha;
    Ok(((r * r + q).sqrt() - r).max(1.0))
}

/// `κ_ν = q/r + √((q/r)² + q)`; `+∞` when the bottom sum vanishes and `ν`
/// keeps increasing.
pub fn kappa_nu_maximizer(alpha: usize, beta: usize, spectrum: &EigenSpectrum) -> Result<f64> {
    let s = region_sums(alpha, beta, spectrum)?;
    if s.top.is_nan() || s.top <= 0.0 {
        return Err(Error::InvalidIndex(format!("the top {alpha} entries sum to zero")));
    }
    if s.bottom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let qr = s.tail_count / s.alpha * s.top / s.bottom;
    let q = s.tail_count / s.alpha;
    Ok(qr + (qr * qr + q).sqrt())
}

/// Upper bound on `|dμ/dκ|` over `[k0, k1]` for the region `(α, β)`.
pub fn mu_slope_bound(alpha: usize, beta: usize, spectrum: &EigenSpectrum, k0: f64, k1: f64) -> Result<f64> {
    let s = region_sums(alpha, beta, spectrum)?;
    // μ' = (A(ακ² + c) − 2ακ(κA + B)) / (ακ² + c)²; bound each term separately
    let num = s.top * (s.alpha * k1 * k1 + s.tail_count) + 2.0 * s.alpha * k1 * (k1 * s.top + s.bottom);
    let den = s.alpha * k0 * k0 + s.tail_count;
    Ok(num / (den * den))
}

/// Whether `κ` lies in `[κ_μ, κ_ν]` for the solution's own region.
pub fn in_interval_stat(solution: &TruncationSolution, spectrum: &EigenSpectrum) -> Result<bool> {
    let t = solution
        .truncation
        .ok_or_else(|| Error::NotApplicable("the input already satisfies the bound".into()))?;
    let lo = kappa_mu_maximizer(t.alpha, t.beta, spectrum)?;
    let hi = kappa_nu_maximizer(t.alpha, t.beta, spectrum)?;
    Ok(lo <= solution.kappa && solution.kappa <= hi)
}

/// Solutions along an ascending grid of bounds. Points where the spectrum
/// already satisfies the bound are recorded with `α = 0`, `β = p + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TruncationPath {
    pub kappa_grid: Vec<f64>,
    pub alpha_seq: Vec<usize>,
    pub beta_seq: Vec<usize>,
    pub mu_seq: Vec<f64>,
    pub nu_seq: Vec<f64>,
    pub diff_alpha: Vec<i64>,
    pub diff_beta: Vec<i64>,
    /// `None` at feasible points.
    pub kappa_mu: Vec<Option<f64>>,
    pub kappa_nu: Vec<Option<f64>>,
    pub in_interval: Vec<Option<bool>>,
}

impl TruncationPath {
    pub fn len(&self) -> usize {
        self.kappa_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa_grid.is_empty()
    }

    pub fn has_negative_beta_step(&self) -> bool {
        self.diff_beta.iter().any(|&d| d < 0)
    }
}

/// `start, start + step, …` up to `stop` (inclusive within rounding).
pub fn kappa_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && start >= 1.0 && stop >= start) {
        return Err(Error::InvalidInput(format!(
            "need 1 <= start <= stop and step > 0, got {start}:{step}:{stop}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

pub fn trace_path(spectrum: &EigenSpectrum, grid: &[f64]) -> Result<TruncationPath> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    for &k in grid {
        check_kappa(k)?;
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("grid must be ascending".into()));
    }
    let p = spectrum.dim();
    let mut path = TruncationPath {
        kappa_grid: grid.to_vec(),
        alpha_seq: Vec::with_capacity(grid.len()),
        beta_seq: Vec::with_capacity(grid.len()),
        mu_seq: Vec::with_capacity(grid.len()),
        nu_seq: Vec::with_capacity(grid.len()),
        diff_alpha: Vec::new(),
        diff_beta: Vec::new(),
        kappa_mu: Vec::with_capacity(grid.len()),
        kappa_nu: Vec::with_capacity(grid.len()),
        in_interval: Vec::with_capacity(grid.len()),
    };
    for &kappa in grid {
        let sol = search_optimal(spectrum, kappa)?;
        let (alpha, beta) = sol.truncation.map_or((0, p + 1), |t| (t.alpha, t.beta));
        path.alpha_seq.push(alpha);
        path.beta_seq.push(beta);
        path.mu_seq.push(sol.mu);
        path.nu_seq.push(sol.nu);
        match sol.truncation {
            Some(t) => {
                path.kappa_mu.push(Some(kappa_mu_maximizer(t.alpha, t.beta, spectrum)?));
                path.kappa_nu.push(Some(kappa_nu_maximizer(t.alpha, t.beta, spectrum)?));
                path.in_interval.push(Some(in_interval_stat(&sol, spectrum)?));
            }
            None => {
                path.kappa_mu.push(None);
                path.kappa_nu.push(None);
                path.in_interval.push(None);
            }
        }
    }
    let diffs = |s: &[usize]| s.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    path.diff_alpha = diffs(&path.alpha_seq);
    path.diff_beta = diffs(&path.beta_seq);
    Ok(path)
}
