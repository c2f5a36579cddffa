//! Seeded synthetic data: Gaussian matrices, Haar bases, covariance models
//! with prescribed condition number, and multivariate normal samples.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    gram_scaled, symmetric_eigenvalues, DataMatrix, HouseholderQr, Matrix, SpectralForm, SymmetricMatrix,
};

/// Environment variable capping the worker threads used for repetitions.
pub const THREADS_ENV: &str = "C3MA_THREADS";

/// A 64-bit seed. Equal seeds and parameters give bit-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// An independent seed for repetition or component `index`, drawn from
    /// stream `index + 1` of this seed's generator.
    pub fn derive(self, index: u64) -> RandomSeed {
        let mut rng = self.rng();
        rng.set_stream(index.wrapping_add(1));
        RandomSeed(rng.next_u64())
    }
}

impl From<u64> for RandomSeed {
    fn from(seed: u64) -> Self {
        RandomSeed(seed)
    }
}

/// Eigenvalue placement between `10^i` and `10^{-i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    /// Arithmetic progression.
    #[default]
    Linear,
    /// Geometric progression.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSpec {
    pub p: usize,
    /// `i` in `κ(Σ) = 10^{2i}`.
    pub exponent: f64,
    pub spacing: Spacing,
    pub seed: RandomSeed,
}

fn gaussian_fill(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_col_major(rows, cols, data).expect("length matches shape")
}

/// p×n matrix of i.i.d. standard normal entries.
pub fn gaussian_matrix(p: usize, n: usize, seed: RandomSeed) -> Result<DataMatrix> {
    if p == 0 || n == 0 {
        return Err(Error::InvalidInput(format!("dimensions must be positive, got {p}x{n}")));
    }
    DataMatrix::new(gaussian_fill(p, n, &mut seed.rng()))
}

/// Haar-distributed p×p orthogonal matrix: QR of a Gaussian matrix with the
/// columns of Q flipped so that R has a positive diagonal.
pub fn haar_orthogonal(p: usize, seed: RandomSeed) -> Result<Matrix> {
    if p == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let g = gaussian_fill(p, p, &mut seed.rng());
    let qr = HouseholderQr::new(&g)?;
    let r = qr.r();
    let mut q = qr.q_full();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.col_mut(j).iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(q)
}

/// Descending eigenvalues from `10^i` to `10^{-i}`.
pub fn sigma_eigenvalues(p: usize, exponent: f64, spacing: Spacing) -> Vec<f64> {
    if p == 1 {
        return vec![1.0];
    }
    let last = (p - 1) as f64;
    let (hi, lo) = (10f64.powf(exponent), 10f64.powf(-exponent));
    (0..p)
        .map(|k| {
            let t = k as f64 / last;
            match k {
                0 => hi,
                k if k == p - 1 => lo,
                _ => match spacing {
                    Spacing::Linear => hi - (hi - lo) * t,
                    Spacing::Log => 10f64.powf(exponent * (1.0 - 2.0 * t)),
                },
            }
        })
        .collect()
}

/// `Σ = U Λ Uᵀ` with a Haar basis `U` and `Λ` from [`sigma_eigenvalues`].
pub fn make_sigma(spec: &SigmaSpec) -> Result<(SymmetricMatrix, SpectralForm)> {
    if spec.p < 2 {
        return Err(Error::InvalidInput(format!("need p >= 2, got {}", spec.p)));
    }
    if !(spec.exponent >= 0.0 && spec.exponent.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "exponent {} must be finite and >= 0",
            spec.exponent
        )));
    }
    let values = sigma_eigenvalues(spec.p, spec.exponent, spec.spacing);
    let vectors = haar_orthogonal(spec.p, spec.seed)?;
    let form = SpectralForm {
        vectors,
        values,
        full_dimension: spec.p,
    };
    Ok((form.reconstruct(), form))
}

/// `X = Σ^{1/2} Z` with `Σ^{1/2} = U Λ^{1/2} Uᵀ` and Gaussian `Z` (p×n).
pub fn sample_mvn(sigma: &SpectralForm, n: usize, seed: RandomSeed) -> Result<DataMatrix> {
    let p = sigma.vectors.rows();
    if sigma.vectors.cols() != p || sigma.values.len() != p || sigma.full_dimension != p {
        return Err(Error::InvalidInput(
            "covariance must be given by a full p×p eigenbasis".into(),
        ));
    }
    if sigma.values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("covariance must be positive definite".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one observation".into()));
    }
    let z = gaussian_fill(p, n, &mut seed.rng());
    let mut w = sigma.vectors.t_matmul(&z);
    for j in 0..n {
        for (wi, &l) in w.col_mut(j).iter_mut().zip(&sigma.values) {
            *wi *= l.sqrt();
        }
    }
    DataMatrix::new(sigma.vectors.matmul(&w))
}

/// `n` draws from `N(0, Σ)` with `κ(Σ) = 10^{2i}`; the basis of `Σ` comes
/// from `seed.derive(0)` and the sample from `seed.derive(1)`.
pub fn simulated_data(p: usize, n: usize, exponent: f64, spacing: Spacing, seed: RandomSeed) -> Result<DataMatrix> {
    let spec = SigmaSpec {
        p,
        exponent,
        spacing,
        seed: seed.derive(0),
    };
    let (_, sigma) = make_sigma(&spec)?;
    sample_mvn(&sigma, n, seed.derive(1))
}

/// `S_n = (1/n) X Xᵀ`.
pub fn sample_covariance(x: &DataMatrix) -> SymmetricMatrix {
    gram_scaled(x.as_matrix())
}

/// Runs `f` on a pool capped by `C3MA_THREADS` when that variable is set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Mean over `reps` of the descending eigenvalues of `S_n` for `N(0, I_p)` data.
pub fn eigen_dispersion(p: usize, n: usize, reps: usize, seed: RandomSeed) -> Result<Vec<f64>> {
    if reps == 0 {
        return Err(Error::InvalidInput("need at least one repetition".into()));
    }
    let runs: Vec<Vec<f64>> = with_thread_cap(|| {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let x = gaussian_matrix(p, n, seed.derive(r as u64))?;
                symmetric_eigenvalues(&sample_covariance(&x))
            })
            .collect::<Result<_>>()
    })?;
    let mut mean = vec![0.0; p];
    for run in &runs {
        for (m, v) in mean.iter_mut().zip(run) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= reps as f64);
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigendecomposition;

    #[test]
    fn gaussian_moments_and_determinism() {
        let x = gaussian_matrix(1000, 1000, RandomSeed(7)).unwrap();
        let v = x.as_matrix().as_slice();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.01);
        assert_eq!(x, gaussian_matrix(1000, 1000, RandomSeed(7)).unwrap());
        assert_ne!(x, gaussian_matrix(1000, 1000, RandomSeed(8)).unwrap());
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RandomSeed(3);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(5), RandomSeed(3).derive(5));
    }

    #[test]
    fn haar_is_orthogonal_and_centered() {
        for p in [1, 2, 5, 30] {
            let q = haar_orthogonal(p, RandomSeed(p as u64)).unwrap();
            assert!(q.orthonormality_defect() <= 1e-12 * p as f64);
        }
        let q1 = haar_orthogonal(1, RandomSeed(0)).unwrap();
        assert_eq!(q1[(0, 0)].abs(), 1.0);

        let draws = 10_000;
        let mean: f64 = (0..draws)
            .map(|k| haar_orthogonal(3, RandomSeed(k)).unwrap()[(0, 0)])
            .sum::<f64>()
            / draws as f64;
        assert!(mean.abs() < 0.05, "{mean}");
    }

    #[test]
    fn sigma_spacing() {
        let log = sigma_eigenvalues(4, 3.0, Spacing::Log);
        for (a, b) in log.iter().zip([1e3, 1e1, 1e-1, 1e-3]) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
        let lin = sigma_eigenvalues(3, 1.0, Spacing::Linear);
        assert_eq!((lin[0], lin[2]), (10.0, 0.1));
        assert!((lin[1] - 5.05).abs() < 1e-14);
    }

    #[test]
    fn make_sigma_round_trips() {
        for (i, spacing) in [(0.0, Spacing::Linear), (2.0, Spacing::Linear), (3.0, Spacing::Log)] {
            let spec = SigmaSpec {
                p: 12,
                exponent: i,
                spacing,
                seed: RandomSeed(11),
            };
            let (sigma, form) = make_sigma(&spec).unwrap();
            assert!((form.values[0] / form.values[11] / 10f64.powf(2.0 * i) - 1.0).abs() < 1e-8);
            let back = symmetric_eigendecomposition(&sigma).unwrap();
            for (a, b) in back.values.iter().zip(&form.values) {
                assert!(
                    (a - b).abs() <= 1e-8 * b.max(1e-300) + 1e-12 * form.values[0],
                    "{a} vs {b}"
                );
            }
        }
        let bad = SigmaSpec {
            p: 1,
            exponent: 1.0,
            spacing: Spacing::Linear,
            seed: RandomSeed(0),
        };
        assert!(make_sigma(&bad).is_err());
    }

    #[test]
    fn mvn_matches_covariance() {
        let spec = SigmaSpec {
            p: 3,
            exponent: 0.5,
            spacing: Spacing::Linear,
            seed: RandomSeed(1),
        };
        let (sigma, form) = make_sigma(&spec).unwrap();
        let x = sample_mvn(&form, 100_000, RandomSeed(2)).unwrap();
        let s = sample_covariance(&x);
        let rel = s.as_matrix().sub(sigma.as_matrix()).frobenius_norm() / sigma.as_matrix().frobenius_norm();
        assert!(rel <= 0.05, "{rel}");
        assert_eq!(x, sample_mvn(&form, 100_000, RandomSeed(2)).unwrap());

        let mut singular = form.clone();
        singular.values[2] = 0.0;
        assert!(sample_mvn(&singular, 10, RandomSeed(0)).is_err());
    }

    #[test]
    fn identity_mvn_is_gaussian() {
        let eye = SpectralForm {
            vectors: Matrix::identity(4),
            values: vec![1.0; 4],
            full_dimension: 4,
        };
        let x = sample_mvn(&eye, 5, RandomSeed(9)).unwrap();
        assert_eq!(x, gaussian_matrix(4, 5, RandomSeed(9)).unwrap());
    }

    #[test]
    fn sample_covariance_examples() {
        let x = DataMatrix::new(Matrix::from_rows(&[[1.0, -1.0], [1.0, -1.0]]).unwrap()).unwrap();
        assert_eq!(sample_covariance(&x).as_matrix().as_slice(), &[1.0, 1.0, 1.0, 1.0]);
        let n = 4.0_f64;
        let x = DataMatrix::new(Matrix::identity(4).scaled(n.sqrt())).unwrap();
        let s = sample_covariance(&x);
        assert!(s.as_matrix().sub(&Matrix::identity(4)).max_abs() < 1e-15);
        let x = gaussian_matrix(20, 8, RandomSeed(4)).unwrap();
        let ev = symmetric_eigenvalues(&sample_covariance(&x)).unwrap();
        assert!(*ev.last().unwrap() >= -1e-12 * ev[0]);
    }

    #[test]
    fn dispersion_regimes() {
        let m = eigen_dispersion(10, 5000, 4, RandomSeed(1)).unwrap();
        assert!(m.iter().all(|v| (v - 1.0).abs() < 0.1), "{m:?}");
        let m = eigen_dispersion(100, 100, 20, RandomSeed(2)).unwrap();
        assert!((m[0] - 4.0).abs() < 0.6, "{}", m[0]);
        assert_eq!(m, eigen_dispersion(100, 100, 20, RandomSeed(2)).unwrap());
    }
}
