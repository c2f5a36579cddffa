//! End-to-end solvers: factorize, solve the diagonal problem, assemble `Σ̂`.
//!
//! `Σ̂ = U Λ* Uᵀ` where every entry of `Λ*` past the first `k = β* − 1` equals
//! `μ*`, so `Σ̂ = μ* I + Σ_{i≤k} (λ*ᵢ − μ*) uᵢuᵢᵀ` needs only k eigenvectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_kappa, Error, Result};
use crate::linalg::{
    gram_scaled, mod_svd, symmetric_eigendecomposition, symmetric_eigenvalues, thin_svd, weighted_gram, DataMatrix,
    Matrix, SymmetricMatrix,
};
use crate::solver::{search_optimal, EigenSpectrum, TruncationSolution};

/// Above this dimension [`OutputForm::Auto`] produces the compact form.
pub const COMPACT_THRESHOLD: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "FU-SPT")]
    FuSpt,
    #[serde(rename = "GR-SVD")]
    GrSvd,
    #[serde(rename = "MOD-SVD")]
    ModSvd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::FuSpt, Algorithm::GrSvd, Algorithm::ModSvd];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FuSpt => "FU-SPT",
            Algorithm::GrSvd => "GR-SVD",
            Algorithm::ModSvd => "MOD-SVD",
        }
    }

    /// Whether the algorithm works from the data matrix rather than `S_n`.
    pub fn needs_factor(self) -> bool {
        !matches!(self, Algorithm::FuSpt)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "fu-spt" | "fu" => Ok(Algorithm::FuSpt),
            "gr-svd" | "gr" => Ok(Algorithm::GrSvd),
            "mod-svd" | "mod" => Ok(Algorithm::ModSvd),
            _ => Err(Error::InvalidInput(format!(
                "unknown algorithm '{s}' (expected fu-spt, gr-svd or mod-svd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputForm {
    /// Compact when `p > COMPACT_THRESHOLD`, dense otherwise.
    #[default]
    Auto,
    Dense,
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub output: OutputForm,
    /// Subtract each variable's mean across observations before solving.
    pub center: bool,
    /// Relative rank tolerance; `None` uses `p·2⁻⁵²`.
    pub rank_tolerance: Option<f64>,
}

/// `μ* I + Σ δᵢ uᵢuᵢᵀ` with orthonormal `uᵢ` (the columns) and `δᵢ ≥ 0` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactForm {
    pub mu_star: f64,
    pub columns: Matrix,
    pub deltas: Vec<f64>,
}

impl CompactForm {
    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn rank(&self) -> usize {
        self.deltas.len()
    }

    /// Number of stored reals, `p·k + k + 1`.
    pub fn stored_len(&self) -> usize {
        self.columns.as_slice().len() + self.deltas.len() + 1
    }

    pub fn densify(&self) -> SymmetricMatrix {
        let mut m = weighted_gram(&self.columns, &self.deltas);
        for i in 0..self.dim() {
            m[(i, i)] += self.mu_star;
        }
        SymmetricMatrix::from_matrix_unchecked(m)
    }
}

#[derive(Debug, Clone)]
pub enum ApproximationForm {
    Dense(SymmetricMatrix),
    Compact(CompactForm),
}

#[derive(Debug, Clone)]
pub struct CovarianceApproximation {
    pub form: ApproximationForm,
    pub solution: TruncationSolution,
    pub algorithm: Algorithm,
    /// Spectrum of `S_n` the solution was computed from.
    pub spectrum: EigenSpectrum,
}

impl CovarianceApproximation {
    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// `‖Σ̂ − S_n‖_F`, evaluated in the shared eigenbasis.
    pub fn objective(&self) -> f64 {
        self.solution
            .lambda_star
            .iter()
            .zip(self.spectrum.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `κ(Σ̂) = max Λ* / min Λ*`.
    pub fn kappa_achieved(&self) -> f64 {
        self.solution.condition_number()
    }

    pub fn to_dense(&self) -> SymmetricMatrix {
        match &self.form {
            ApproximationForm::Dense(m) => m.clone(),
            ApproximationForm::Compact(c) => densify(c),
        }
    }

    pub fn compact(&self) -> Option<&CompactForm> {
        match &self.form {
            ApproximationForm::Compact(c) => Some(c),
            ApproximationForm::Dense(_) => None,
        }
    }
}

pub fn densify(compact: &CompactForm) -> SymmetricMatrix {
    compact.densify()
}

fn spectrum_from(values: Vec<f64>, p: usize, opts: &SolveOptions) -> Result<EigenSpectrum> {
    let mut values = values;
    values.resize(p, 0.0);
    match opts.rank_tolerance {
        Some(tol) => EigenSpectrum::with_tolerance(values, tol),
        None => EigenSpectrum::new(values),
    }
}

/// Solves on a spectrum whose leading eigenvectors are the columns of `vectors`.
fn assemble(
    spectrum: EigenSpectrum,
    vectors: &Matrix,
    kappa: f64,
    algorithm: Algorithm,
    opts: &SolveOptions,
) -> Result<CovarianceApproximation> {
    let solution = search_optimal(&spectrum, kappa)?;
    let k = solution.correction_rank();
    debug_assert!(k <= vectors.cols());
    let compact = CompactForm {
        mu_star: solution.mu,
        columns: vectors.leading_columns(k),
        deltas: solution.lambda_star[..k].iter().map(|l| l - solution.mu).collect(),
    };
    let dense = match opts.output {
        OutputForm::Dense => true,
        OutputForm::Compact => false,
        OutputForm::Auto => spectrum.dim() <= COMPACT_THRESHOLD,
    };
    let form = if dense {
        ApproximationForm::Dense(compact.densify())
    } else {
        ApproximationForm::Compact(compact)
    };
    Ok(CovarianceApproximation {
        form,
        solution,
        algorithm,
        spectrum,
    })
}

/// Full eigendecomposition of `S`.
pub fn solve_fu_spt(s: &SymmetricMatrix, kappa: f64, opts: &SolveOptions) -> Result<CovarianceApproximation> {
    check_kappa(kappa)?;
    if s.is_zero() {
        return Err(Error::InfeasibleZeroMatrix);
    }
    let eig = symmetric_eigendecomposition(s)?;
    let spectrum = spectrum_from(eig.values, s.dim(), opts)?;
    assemble(spectrum, &eig.vectors, kappa, Algorithm::FuSpt, opts)
}

fn prepared(x: &DataMatrix, opts: &SolveOptions) -> Result<DataMatrix> {
    let x = if opts.center { x.centered() } else { x.clone() };
    if x.as_matrix().max_abs() == 0.0 {
        return Err(Error::InfeasibleZeroMatrix);
    }
    Ok(x)
}

fn scaled_for_svd(x: &DataMatrix) -> Result<DataMatrix> {
    DataMatrix::new(x.as_matrix().scaled(1.0 / (x.n() as f64).sqrt()))
}

fn require_tall(x: &DataMatrix, algorithm: Algorithm) -> Result<()> {
    if x.p() < x.n() {
        return Err(Error::Shape(format!(
            "{algorithm} needs p >= n, got p = {}, n = {}",
            x.p(),
            x.n()
        )));
    }
    Ok(())
}

/// Golub–Reinsch SVD of `X/√n`; `λ̂ = δ²` padded with zeros.
pub fn solve_gr_svd(x: &DataMatrix, kappa: f64, opts: &SolveOptions) -> Result<CovarianceApproximation> {
    check_kappa(kappa)?;
    require_tall(x, Algorithm::GrSvd)?;
    let x = prepared(x, opts)?;
    let svd = thin_svd(&scaled_for_svd(&x)?)?;
    let values = svd.values.iter().map(|d| d * d).collect();
    let spectrum = spectrum_from(values, x.p(), opts)?;
    assemble(spectrum, &svd.vectors, kappa, Algorithm::GrSvd, opts)
}

/// QR of `X/√n`, SVD of the triangular factor, left factor through the
/// implicit `Q`.
pub fn solve_mod_svd(x: &DataMatrix, kappa: f64, opts: &SolveOptions) -> Result<CovarianceApproximation> {
    check_kappa(kappa)?;
    require_tall(x, Algorithm::ModSvd)?;
    let x = prepared(x, opts)?;
    let svd = mod_svd(&scaled_for_svd(&x)?)?.left;
    let values = svd.values.iter().map(|d| d * d).collect();
    let spectrum = spectrum_from(values, x.p(), opts)?;
    assemble(spectrum, &svd.vectors, kappa, Algorithm::ModSvd, opts)
}

/// Spectrum of `S_n = (1/n) X Xᵀ` (after centering when asked), through the
/// SVD of `X/√n` when `p >= n` and the full eigendecomposition otherwise.
pub fn sample_spectrum(x: &DataMatrix, opts: &SolveOptions) -> Result<EigenSpectrum> {
    let x = prepared(x, opts)?;
    let values = if x.p() >= x.n() {
        thin_svd(&scaled_for_svd(&x)?)?.values.iter().map(|d| d * d).collect()
    } else {
        symmetric_eigenvalues(&gram_scaled(x.as_matrix()))?
    };
    spectrum_from(values, x.p(), opts)
}

/// Any of the three pipelines on a data matrix; FU-SPT forms `S_n` first.
pub fn solve_data(
    x: &DataMatrix,
    kappa: f64,
    algorithm: Algorithm,
    opts: &SolveOptions,
) -> Result<CovarianceApproximation> {
    match algorithm {
        Algorithm::FuSpt => {
            check_kappa(kappa)?;
            let x = prepared(x, opts)?;
            solve_fu_spt(&gram_scaled(x.as_matrix()), kappa, opts)
        }
        Algorithm::GrSvd => solve_gr_svd(x, kappa, opts),
        Algorithm::ModSvd => solve_mod_svd(x, kappa, opts),
    }
}

/// Covariance input: only FU-SPT applies, the factor structure is unknown.
pub fn solve_covariance(
    s: &SymmetricMatrix,
    kappa: f64,
    algorithm: Algorithm,
    opts: &SolveOptions,
) -> Result<CovarianceApproximation> {
    if algorithm.needs_factor() {
        return Err(Error::NotApplicable(format!(
            "{algorithm} needs the data matrix; use FU-SPT for a covariance input"
        )));
    }
    solve_fu_spt(s, kappa, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[&[f64]]) -> SymmetricMatrix {
        SymmetricMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn data(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn dense() -> SolveOptions {
        SolveOptions {
            output: OutputForm::Dense,
            ..Default::default()
        }
    }

    fn assert_close(a: &SymmetricMatrix, b: &Matrix, tol: f64) {
        let diff = a.as_matrix().sub(b).frobenius_norm();
        assert!(diff <= tol * b.frobenius_norm(), "diff {diff}");
    }

    #[test]
    fn fu_spt_feasible_short_circuit() {
        let s = sym(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let a = solve_fu_spt(&s, 5.0, &dense()).unwrap();
        assert!(a.solution.is_feasible_input());
        assert_close(&a.to_dense(), s.as_matrix(), 1e-15);
        assert_eq!(a.objective(), 0.0);
    }

    #[test]
    fn fu_spt_rank_one() {
        let a = solve_fu_spt(&sym(&[&[1.0, 1.0], &[1.0, 1.0]]), 4.0, &dense()).unwrap();
        let (mu, nu) = (8.0 / 17.0, 32.0 / 17.0);
        assert!((a.solution.mu - mu).abs() < 1e-15 && (a.solution.nu - nu).abs() < 1e-14);
        let expect =
            Matrix::from_rows(&[[(nu + mu) / 2.0, (nu - mu) / 2.0], [(nu - mu) / 2.0, (nu + mu) / 2.0]]).unwrap();
        assert_close(&a.to_dense(), &expect, 1e-14);
    }

    #[test]
    fn fu_spt_kappa_one_is_scaled_identity() {
        let s = sym(&[&[3.0, 1.0, 0.0], &[1.0, 2.0, 0.5], &[0.0, 0.5, 1.0]]);
        let a = solve_fu_spt(&s, 1.0, &dense()).unwrap();
        assert_close(&a.to_dense(), &Matrix::identity(3).scaled(2.0), 1e-14);
    }

    #[test]
    fn errors() {
        let zero = SymmetricMatrix::new(Matrix::zeros(3, 3)).unwrap();
        assert!(matches!(
            solve_fu_spt(&zero, 2.0, &dense()),
            Err(Error::InfeasibleZeroMatrix)
        ));
        let e1 = data(&[&[1.0], &[0.0], &[0.0]]);
        assert!(matches!(solve_gr_svd(&e1, 0.5, &dense()), Err(Error::InvalidKappa(_))));
        let wide = data(&[&[1.0, 2.0]]);
        assert!(matches!(solve_gr_svd(&wide, 2.0, &dense()), Err(Error::Shape(_))));
        assert!(matches!(solve_mod_svd(&wide, 2.0, &dense()), Err(Error::Shape(_))));
        let zx = data(&[&[0.0], &[0.0]]);
        assert!(matches!(
            solve_mod_svd(&zx, 2.0, &dense()),
            Err(Error::InfeasibleZeroMatrix)
        ));
        let s = sym(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            solve_covariance(&s, 2.0, Algorithm::GrSvd, &dense()),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn svd_pipelines_on_unit_vector() {
        for solve in [solve_gr_svd, solve_mod_svd] {
            let a = solve(&data(&[&[1.0], &[0.0], &[0.0]]), 2.0, &dense()).unwrap();
            assert!((a.solution.mu - 1.0 / 3.0).abs() < 1e-15);
            assert_close(
                &a.to_dense(),
                &Matrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
                1e-15,
            );
        }
    }

    #[test]
    fn svd_pipelines_match_fu_spt() {
        let x = data(&[&[1.0, -1.0], &[1.0, -1.0]]);
        let fu = solve_fu_spt(&sym(&[&[1.0, 1.0], &[1.0, 1.0]]), 4.0, &dense())
            .unwrap()
            .to_dense();
        for solve in [solve_gr_svd, solve_mod_svd] {
            assert_close(&solve(&x, 4.0, &dense()).unwrap().to_dense(), fu.as_matrix(), 1e-12);
        }
    }

    #[test]
    fn orthonormal_columns_give_two_levels() {
        // X = √n · (first n columns of a rotation) so S_n has eigenvalues 1 (n times) and 0
        let (p, n) = (6, 3);
        let q = crate::datagen::haar_orthogonal(p, crate::datagen::RandomSeed(5)).unwrap();
        let x = DataMatrix::new(q.leading_columns(n).scaled((n as f64).sqrt())).unwrap();
        let kappa = 4.0;
        for solve in [solve_gr_svd, solve_mod_svd] {
            let a = solve(&x, kappa, &dense()).unwrap();
            let mu = kappa * n as f64 / (n as f64 * kappa * kappa + (p - n) as f64);
            assert!((a.solution.mu - mu).abs() < 1e-14);
            assert_eq!(a.solution.beta(), Some(n + 1));
            assert!(a.solution.lambda_star[..n]
                .iter()
                .all(|&v| (v - kappa * mu).abs() < 1e-14));
        }
    }

    #[test]
    fn compact_examples() {
        let mut cols = Matrix::zeros(3, 1);
        cols[(0, 0)] = 1.0;
        let c = CompactForm {
            mu_star: 1.0 / 3.0,
            columns: cols,
            deltas: vec![1.0 / 3.0],
        };
        assert_close(
            &densify(&c),
            &Matrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
            1e-15,
        );
        let empty = CompactForm {
            mu_star: 0.5,
            columns: Matrix::zeros(4, 0),
            deltas: vec![],
        };
        assert_eq!(densify(&empty).as_matrix(), &Matrix::identity(4).scaled(0.5));
    }

    #[test]
    fn compact_round_trip_and_auto_threshold() {
        let x = crate::datagen::gaussian_matrix(30, 8, crate::datagen::RandomSeed(3)).unwrap();
        let compact = SolveOptions {
            output: OutputForm::Compact,
            ..Default::default()
        };
        let a = solve_gr_svd(&x, 10.0, &compact).unwrap();
        let c = a.compact().unwrap();
        assert_eq!(c.rank(), a.solution.beta().unwrap() - 1);
        assert_eq!(c.stored_len(), 30 * c.rank() + c.rank() + 1);
        let d = solve_gr_svd(&x, 10.0, &dense()).unwrap();
        assert_close(&a.to_dense(), d.to_dense().as_matrix(), 1e-10);
        let auto = solve_gr_svd(&x, 10.0, &SolveOptions::default()).unwrap();
        assert!(matches!(auto.form, ApproximationForm::Dense(_)));
    }

    #[test]
    fn centering_removes_means() {
        let x = data(&[&[1.0, 3.0], &[2.0, 2.0], &[5.0, 7.0]]);
        let opts = SolveOptions {
            center: true,
            ..dense()
        };
        let a = solve_data(&x, 3.0, Algorithm::FuSpt, &opts).unwrap();
        let b = solve_data(&x, 3.0, Algorithm::ModSvd, &opts).unwrap();
        assert_close(&a.to_dense(), b.to_dense().as_matrix(), 1e-12);
        // centered rows are (−1, 1), (0, 0), (−1, 1): rank one
        assert_eq!(a.spectrum.positive_count(), 1);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("svd".parse::<Algorithm>().is_err());
    }
}
