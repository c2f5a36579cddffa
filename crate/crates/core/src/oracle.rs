//! Brute-force checks for the truncation solver. Nothing here calls into the
//! solver; the objective and the segment formula are restated locally.

use rand::Rng;

use crate::datagen::{haar_orthogonal, RandomSeed};
use crate::error::{check_kappa, Error, Result};
use crate::linalg::{symmetric_eigendecomposition, Matrix, SpectralForm, SymmetricMatrix};
use crate::solver::EigenSpectrum;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn f(mu: f64, lam: &[f64], kappa: f64) -> f64 {
    let mut total = 0.0;
    for &l in lam {
        let clamped = l.clamp(mu, kappa * mu);
        total += (clamped - l) * (clamped - l);
    }
    total
}

/// Stationary point of the quadratic piece of `f` active at `mu`, with the
/// breakpoints `[lo, hi]` bounding that piece.
fn segment_stationary_point(mu: f64, lam: &[f64], kappa: f64) -> (f64, f64, f64) {
    let p = lam.len();
    let top: Vec<usize> = (0..p).filter(|&i| lam[i] > kappa * mu).collect();
    let bottom: Vec<usize> = (0..p).filter(|&i| lam[i] < mu).collect();
    let num = kappa * top.iter().map(|&i| lam[i]).sum::<f64>() + bottom.iter().map(|&i| lam[i]).sum::<f64>();
    let den = top.len() as f64 * kappa * kappa + bottom.len() as f64;
    if den == 0.0 {
        return (mu, mu, mu);
    }
    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    for &l in lam {
        // breakpoints l and l/κ split the μ axis; keep the pair around mu
        for b in [l, l / kappa] {
            if b < mu {
                lo = lo.max(b);
            } else if b > mu {
                hi = hi.min(b);
            }
        }
    }
    (num / den, lo, hi)
}

/// Minimizer of `f` by golden-section search on `(ε, λ̂₁/κ]` down to an
/// interval of width `tolerance`, then refined with the exact stationary
/// point of the quadratic piece containing the bracket.
pub fn golden_section_minimize_f(spectrum: &EigenSpectrum, kappa: f64, tolerance: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let lam = spectrum.values();
    let (top, low) = (lam[0], lam[lam.len() - 1]);
    if top <= 0.0 {
        return Err(Error::InfeasibleZeroMatrix);
    }
    if low > 0.0 && top <= kappa * low {
        return Err(Error::NotApplicable("the spectrum already satisfies the bound".into()));
    }

    let (mut a, mut b) = (0.0, top / kappa);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1, lam, kappa), f(x2, lam, kappa));
    // the cap only matters when `tolerance` is below the spacing of floats near b
    for _ in 0..500 {
        if b - a <= tolerance {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1, lam, kappa);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2, lam, kappa);
        }
    }
    // f is flat to rounding within ~√ε of the minimum, so the bracket alone
    // cannot pin μ down; a stationary point inside its own piece is exact
    let mid = 0.5 * (a + b);
    let mut best = (f(mid, lam, kappa), mid);
    for probe in [mid, a, b] {
        let (c, lo, hi) = segment_stationary_point(probe, lam, kappa);
        if c > 0.0 && lo <= c && c <= hi {
            return Ok(c);
        }
        let m = c.clamp(lo, hi);
        let fm = f(m, lam, kappa);
        if m > 0.0 && m <= top / kappa && fm < best.0 {
            best = (fm, m);
        }
    }
    Ok(best.1)
}

/// `‖U diag(e) Uᵀ − S‖_F` for an orthonormal `U`.
pub fn probe_objective(s: &SymmetricMatrix, basis: &Matrix, eigenvalues: &[f64]) -> f64 {
    let candidate = SpectralForm {
        vectors: basis.clone(),
        values: eigenvalues.to_vec(),
        full_dimension: basis.rows(),
    }
    .reconstruct();
    candidate.as_matrix().sub(s.as_matrix()).frobenius_norm()
}

/// Smallest `‖Σ − S‖_F` over randomly drawn feasible `Σ`. Half of the trials
/// use a Haar basis with random eigenvalues, half use the eigenbasis of `S`
/// with its eigenvalues clamped into `[t, κt]`; `t` is random in both.
///
/// Meant for small `p` (a dozen or so); every trial costs O(p³).
pub fn feasible_set_probe(s: &SymmetricMatrix, kappa: f64, trials: usize, seed: RandomSeed) -> Result<f64> {
    check_kappa(kappa)?;
    let p = s.dim();
    let own = symmetric_eigendecomposition(s)?;
    let scale = own
        .values
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut rng = seed.rng();
    let mut best = f64::INFINITY;
    for trial in 0..trials {
        let t = scale * 10f64.powf(rng.random_range(-3.0..0.5)) / kappa.sqrt();
        let (basis, values) = if trial % 2 == 0 {
            let basis = haar_orthogonal(p, seed.derive(trial as u64))?;
            let values: Vec<f64> = (0..p)
                .map(|_| (scale * rng.random_range(0.0..1.2)).clamp(t, kappa * t))
                .collect();
            (basis, values)
        } else {
            let values = own.values.iter().map(|&l| l.clamp(t, kappa * t)).collect();
            (own.vectors.clone(), values)
        };
        best = best.min(probe_objective(s, &basis, &values));
    }
    Ok(best)
}
