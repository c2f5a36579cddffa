//! The diagonal problem: given a descending spectrum `λ̂` and a bound `κ`,
//! find the clamp level `μ*` minimizing
//! `f(μ) = Σ_{λ̂ᵢ<μ} (μ − λ̂ᵢ)² + Σ_{κμ<λ̂ᵢ} (κμ − λ̂ᵢ)²`.
//!
//! `f` is piecewise quadratic with breakpoints at `λ̂ᵢ` and `λ̂ᵢ/κ`. The search
//! walks those breakpoints downward from `λ̂₁/κ`; on each segment the indices
//! `(α, β)` are fixed and the stationary point has a closed form.

use serde::Serialize;

use crate::error::{check_kappa, Error, Result};

/// Entries below `-NEGATIVE_SLACK · λ̂₁` are rejected rather than clamped to 0.
const NEGATIVE_SLACK: f64 = 1e-10;

/// A descending nonnegative spectrum of a p×p positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EigenSpectrum {
    values: Vec<f64>,
    positive_count: usize,
}

impl EigenSpectrum {
    /// Sorts, clamps tiny negatives to zero and zeroes entries at or below
    /// the default rank tolerance `p·2⁻⁵²·λ̂₁`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let tol = values.len() as f64 * f64::EPSILON;
        Self::with_tolerance(values, tol)
    }

    /// Like [`EigenSpectrum::new`] with an explicit relative rank tolerance.
    pub fn with_tolerance(mut values: Vec<f64>, rel_tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("spectrum is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("spectrum has non-finite entries".into()));
        }
        if !(rel_tol >= 0.0 && rel_tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "rank tolerance {rel_tol} must be finite and >= 0"
            )));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let top = values[0].max(0.0);
        let low = values[values.len() - 1];
        if low < -NEGATIVE_SLACK * top || (top == 0.0 && low < 0.0) {
            return Err(Error::InvalidInput(format!(
                "spectrum has negative entry {low}; the matrix is not positive semidefinite"
            )));
        }
        let cutoff = rel_tol * top;
        for v in values.iter_mut() {
            if *v <= cutoff {
                *v = 0.0;
            }
        }
        let positive_count = values.iter().take_while(|&&v| v > 0.0).count();
        Ok(EigenSpectrum { values, positive_count })
    }

    /// `values` padded with zeros to length `p`, as for the squared singular
    /// values of a p×n data matrix.
    pub fn padded(mut values: Vec<f64>, p: usize) -> Result<Self> {
        if values.len() > p {
            return Err(Error::Shape(format!(
                "{} values do not fit a dimension of {p}",
                values.len()
            )));
        }
        values.resize(p, 0.0);
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of entries above the rank tolerance (`m`).
    pub fn positive_count(&self) -> usize {
        self.positive_count
    }

    /// Full dimension `p`.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `λ̂ᵢ` for a 1-based index with `λ̂₀ = +∞` and `λ̂_{p+1} = 0`.
    pub fn at(&self, i: usize) -> f64 {
        match i {
            0 => f64::INFINITY,
            i if i > self.dim() => 0.0,
            i => self.values[i - 1],
        }
    }

    pub fn scaled(&self, c: f64) -> EigenSpectrum {
        EigenSpectrum {
            values: self.values.iter().map(|v| v * c).collect(),
            positive_count: self.positive_count,
        }
    }
}

/// Active indices of an infeasible solution: the top `alpha` entries are
/// clamped down to `ν*` and entries `beta..=p` are raised to `μ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub alpha: usize,
    pub beta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TruncationSolution {
    pub kappa: f64,
    pub mu: f64,
    pub nu: f64,
    pub lambda_star: Vec<f64>,
    /// `None` when the input already satisfies the bound and is returned as is.
    pub truncation: Option<Truncation>,
    pub candidates_evaluated: usize,
}

impl TruncationSolution {
    pub fn alpha(&self) -> Option<usize> {
        self.truncation.map(|t| t.alpha)
    }

    pub fn beta(&self) -> Option<usize> {
        self.truncation.map(|t| t.beta)
    }

    pub fn is_feasible_input(&self) -> bool {
        self.truncation.is_none()
    }

    /// `max Λ* / min Λ*`.
    pub fn condition_number(&self) -> f64 {
        self.lambda_star[0] / self.lambda_star[self.lambda_star.len() - 1]
    }

    /// Number of leading entries that differ from `μ*`, i.e. `β* − 1`.
    pub fn correction_rank(&self) -> usize {
        match self.truncation {
            Some(t) => t.beta - 1,
            None => self.lambda_star.iter().filter(|&&v| v > self.mu).count(),
        }
    }
}

pub fn clamp_eigenvalue(lambda_hat: f64, mu: f64, kappa: f64) -> f64 {
    lambda_hat.max(mu).min(kappa * mu)
}

pub fn objective(mu: f64, spectrum: &EigenSpectrum, kappa: f64) -> f64 {
    let nu = kappa * mu;
    spectrum
        .values()
        .iter()
        .map(|&l| {
            if l < mu {
                (mu - l) * (mu - l)
            } else if nu < l {
                (nu - l) * (nu - l)
            } else {
                0.0
            }
        })
        .sum()
}

pub fn objective_derivative(mu: f64, spectrum: &EigenSpectrum, kappa: f64) -> f64 {
    let nu = kappa * mu;
    spectrum
        .values()
        .iter()
        .map(|&l| {
            if l < mu {
                2.0 * (mu - l)
            } else if nu < l {
                2.0 * kappa * (nu - l)
            } else {
                0.0
            }
        })
        .sum()
}

fn check_indices(alpha: usize, beta: usize, p: usize) -> Result<()> {
    if alpha >= 1 && alpha < beta && beta <= p + 1 {
        Ok(())
    } else {
        Err(Error::InvalidIndex(format!(
            "need 1 <= alpha < beta <= p + 1, got alpha = {alpha}, beta = {beta}, p = {p}"
        )))
    }
}

fn candidate_from_sums(top: f64, bottom: f64, alpha: usize, beta: usize, p: usize, kappa: f64) -> f64 {
    (kappa * top + bottom) / (alpha as f64 * kappa * kappa + (p + 1 - beta) as f64)
}

/// Stationary point of `f` on `R_{α,β}`:
/// `(κ Σ_{i≤α} λ̂ᵢ + Σ_{i≥β} λ̂ᵢ) / (ακ² + p − β + 1)`.
pub fn candidate_mu(alpha: usize, beta: usize, spectrum: &EigenSpectrum, kappa: f64) -> Result<f64> {
    let p = spectrum.dim();
    check_indices(alpha, beta, p)?;
    let v = spectrum.values();
    let top: f64 = v[..alpha].iter().sum();
    let bottom: f64 = v[beta - 1..].iter().rev().sum();
    Ok(candidate_from_sums(top, bottom, alpha, beta, p, kappa))
}

/// `λ̂_α ≥ κμ > λ̂_{α+1}` and `λ̂_{β−1} ≥ μ > λ̂_β`.
pub fn region_contains(alpha: usize, beta: usize, mu: f64, spectrum: &EigenSpectrum, kappa: f64) -> bool {
    let nu = kappa * mu;
    let s = |i| spectrum.at(i);
    s(alpha) >= nu && nu > s(alpha + 1) && s(beta - 1) >= mu && mu > s(beta)
}

/// A breakpoint of `f` in μ: either `λ̂ᵢ/κ` (upper clamp starts at entry i)
/// or `λ̂ᵢ` (lower clamp starts). Compared multiplicatively to avoid rounding.
#[derive(Clone, Copy)]
enum Breakpoint {
    Upper(f64),
    Lower(f64),
}

impl Breakpoint {
    fn mu(self, kappa: f64) -> f64 {
        match self {
            Breakpoint::Upper(l) => l / kappa,
            Breakpoint::Lower(l) => l,
        }
    }

    /// `self >= other` as μ values.
    fn at_least(self, other: Breakpoint, kappa: f64) -> bool {
        use Breakpoint::*;
        match (self, other) {
            (Upper(a), Upper(b)) | (Lower(a), Lower(b)) => a >= b,
            (Upper(a), Lower(b)) => a >= kappa * b,
            (Lower(a), Upper(b)) => kappa * a >= b,
        }
    }
}

/// Global minimizer of `f` together with the truncated spectrum.
pub fn search_optimal(spectrum: &EigenSpectrum, kappa: f64) -> Result<TruncationSolution> {
    check_kappa(kappa)?;
    if spectrum.positive_count() == 0 {
        return Err(Error::InfeasibleZeroMatrix);
    }
    let p = spectrum.dim();
    let lam = spectrum.values();
    let finish = |mu: f64, truncation: Option<Truncation>, candidates: usize| TruncationSolution {
        kappa,
        mu,
        nu: kappa * mu,
        lambda_star: lam.iter().map(|&l| clamp_eigenvalue(l, mu, kappa)).collect(),
        truncation,
        candidates_evaluated: candidates,
    };

    let (top, low) = (spectrum.largest(), spectrum.smallest());
    if low > 0.0 && top <= kappa * low {
        return Ok(TruncationSolution {
            lambda_star: lam.to_vec(),
            ..finish(low, None, 0)
        });
    }

    if kappa == 1.0 {
        let mu = lam.iter().rev().sum::<f64>() / p as f64;
        let alpha = lam.iter().take_while(|&&l| l >= mu).count().max(1);
        let truncation = Truncation { alpha, beta: alpha + 1 };
        return Ok(finish(mu, Some(truncation), 1));
    }

    // prefix[i] = Σ_{j≤i} λ̂_j, suffix[i] = Σ_{j≥i} λ̂_j (1-based, suffix summed small-first)
    let mut prefix = vec![0.0; p + 2];
    for i in 1..=p {
        prefix[i] = prefix[i - 1] + lam[i - 1];
    }
    let mut suffix = vec![0.0; p + 2];
    for i in (1..=p).rev() {
        suffix[i] = suffix[i + 1] + lam[i - 1];
    }

    let mut alpha = 1;
    let mut beta = 1 + lam.iter().take_while(|&&l| kappa * l >= top).count();
    let mut hi = Breakpoint::Upper(top);
    let mut candidates = 0;
    loop {
        let upper = Breakpoint::Upper(spectrum.at(alpha + 1));
        let lower = Breakpoint::Lower(spectrum.at(beta));
        let upper_next = upper.at_least(lower, kappa);
        let lo = if upper_next { upper } else { lower };
        if !lo.at_least(hi, kappa) {
            candidates += 1;
            let c = candidate_from_sums(prefix[alpha], suffix[beta], alpha, beta, p, kappa);
            if c > lo.mu(kappa) {
                let mu = c.min(hi.mu(kappa));
                return Ok(finish(mu, Some(Truncation { alpha, beta }), candidates));
            }
        }
        hi = lo;
        if upper_next {
            alpha += 1;
        } else {
            beta += 1;
        }
        debug_assert!(alpha < beta && beta <= p + 1);
    }
}
