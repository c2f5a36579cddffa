//! Wall-clock comparison of the three pipelines on standard Gaussian data.
//!
//! Measurements run one at a time on the calling thread. Each algorithm gets
//! one untimed warm-up per size, then the repetitions are interleaved across
//! algorithms so slow drift in machine load hits all of them alike. The
//! pipelines produce the compact form, so the timed work is the factorization
//! and the truncation search rather than writing out a p×p matrix.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::datagen::{gaussian_matrix, RandomSeed};
use crate::error::{Error, Result};
use crate::io::csv_io;
use crate::linalg::DataMatrix;
use crate::pipeline::{solve_data, Algorithm, OutputForm, SolveOptions};

/// Smallest accepted repetition count.
pub const MIN_REPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub p_list: Vec<usize>,
    pub reps: usize,
    pub algorithms: Vec<Algorithm>,
    pub kappa: f64,
    pub seed: RandomSeed,
}

impl BenchConfig {
    fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::InvalidInput(format!(
                "reps must be at least {MIN_REPS}, got {}",
                self.reps
            )));
        }
        if self.n == 0 || self.p_list.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidInput(
                "need n > 0, at least one p and one algorithm".into(),
            ));
        }
        if let Some(&p) = self.p_list.iter().find(|&&p| p < self.n) {
            return Err(Error::InvalidInput(format!(
                "every p must be at least n = {}, got {p}",
                self.n
            )));
        }
        Ok(())
    }
}

/// One timed repetition, with the aggregate of its (algorithm, p) group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    pub rep: usize,
    pub wall_ms: f64,
    pub mean_ms: f64,
    pub median_ms: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Milliseconds for one solve of `x`.
pub fn time_solve(x: &DataMatrix, kappa: f64, algorithm: Algorithm) -> Result<f64> {
    let opts = SolveOptions {
        output: OutputForm::Compact,
        ..SolveOptions::default()
    };
    let start = Instant::now();
    let approx = solve_data(x, kappa, algorithm, &opts)?;
    let elapsed = start.elapsed();
    std::hint::black_box(&approx);
    Ok(elapsed.as_secs_f64() * 1e3)
}

/// Per-algorithm timings on one data matrix: warm-up, then `reps` interleaved rounds.
pub fn time_interleaved(x: &DataMatrix, kappa: f64, algorithms: &[Algorithm], reps: usize) -> Result<Vec<Vec<f64>>> {
    for &alg in algorithms {
        time_solve(x, kappa, alg)?;
    }
    let mut times = vec![Vec::with_capacity(reps); algorithms.len()];
    for _ in 0..reps {
        for (slot, &alg) in times.iter_mut().zip(algorithms) {
            slot.push(time_solve(x, kappa, alg)?);
        }
    }
    Ok(times)
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &p in &config.p_list {
        let x = gaussian_matrix(p, config.n, config.seed.derive(p as u64))?;
        let times = time_interleaved(&x, config.kappa, &config.algorithms, config.reps)?;
        for (&algorithm, t) in config.algorithms.iter().zip(&times) {
            let mean_ms = t.iter().sum::<f64>() / t.len() as f64;
            let median_ms = median(t);
            rows.extend(t.iter().enumerate().map(|(rep, &wall_ms)| BenchRow {
                algorithm,
                n: config.n,
                p,
                rep,
                wall_ms,
                mean_ms,
                median_ms,
            }));
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(writer: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["algorithm", "n", "p", "rep", "wall_ms", "mean_ms", "median_ms"])
        .map_err(csv_io)?;
    for r in rows {
        w.write_record([
            r.algorithm.name().to_string(),
            r.n.to_string(),
            r.p.to_string(),
            r.rep.to_string(),
            format!("{:.6}", r.wall_ms),
            format!("{:.6}", r.mean_ms),
            format!("{:.6}", r.median_ms),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(reps: usize) -> BenchConfig {
        BenchConfig {
            n: 4,
            p_list: vec![6, 8],
            reps,
            algorithms: Algorithm::ALL.to_vec(),
            kappa: 10.0,
            seed: RandomSeed(3),
        }
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn rows_per_group_and_csv_shape() {
        let rows = run_bench(&tiny(3)).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 3);
        for group in rows.chunks(3) {
            assert!(group
                .iter()
                .all(|r| r.algorithm == group[0].algorithm && r.p == group[0].p));
            let t: Vec<f64> = group.iter().map(|r| r.wall_ms).collect();
            assert!((group[0].median_ms - median(&t)).abs() < 1e-12);
            assert!(t.iter().all(|&v| v >= 0.0));
        }
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "algorithm,n,p,rep,wall_ms,mean_ms,median_ms");
        assert_eq!(lines.len(), 19);
        assert!(lines[1].starts_with("FU-SPT,4,6,0,"));
    }

    #[test]
    fn bad_ranges_are_rejected() {
        assert!(run_bench(&tiny(2)).is_err());
        let mut c = tiny(3);
        c.p_list = vec![2];
        assert!(run_bench(&c).is_err());
    }
}
