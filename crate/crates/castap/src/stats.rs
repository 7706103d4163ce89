//! Estimation-error statistics of the RD virtual snapshot: the error of
//! `z_r` built from a finite-sample covariance is asymptotically Gaussian
//! with covariance `C = (1/L) D (R^T (x) R) D^H`, and its Monte Carlo
//! verification.
//!
//! `R^T (x) R` is never materialized: every row of `D` factors into a
//! Doppler-bin outer product and a sparse lag-selection pattern, so each
//! entry of `C` contracts through the small per-bin-pair matrices
//! `B_ij = (u_i (x) I)^H R (u_j (x) I)`.

use crate::rd::RdMaps;
use crate::signal::{RadarScenario, SnapshotGenerator};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// Error covariance of the RD virtual snapshot estimate.
#[derive(Debug, Clone)]
pub struct ErrorCovariance {
    /// `m N_v x m N_v` Hermitian matrix.
    pub c: DMatrix<Complex64>,
    pub trace_value: f64,
    /// Degrees of freedom `m^2 N_v^2` of the squared-error statistic.
    pub dof: usize,
}

/// `C = (1/L) D (R^T (x) R) D^H` for the true covariance.
pub fn error_covariance(r: &DMatrix<Complex64>, rd: &RdMaps, l: usize) -> ErrorCovariance {
    let m_bins = rd.config().m_bins;
    let n_v = rd.maps().n_v();
    let dim = m_bins * n_v;
    let b = bin_pair_covariances(r, rd);
    let p = rd.maps().p();
    let pair_cache: Vec<Vec<(usize, usize)>> = (0..n_v).map(|k| p.pairs(k).collect()).collect();
    let inv_l = 1.0 / l as f64;
    let mut c = DMatrix::from_element(dim, dim, Complex64::default());
    for bi in 0..m_bins {
        for bj in 0..m_bins {
            let b_ij = &b[bi * m_bins + bj];
            let b_ji = &b[bj * m_bins + bi];
            for ks in 0..n_v {
                let wk = 1.0 / pair_cache[ks].len() as f64;
                for ls in 0..n_v {
                    let wl = 1.0 / pair_cache[ls].len() as f64;
                    let mut acc = Complex64::default();
                    for &(pb, pc) in &pair_cache[ls] {
                        for &(pa, pd) in &pair_cache[ks] {
                            acc += b_ij[(pa, pb)] * b_ji[(pc, pd)];
                        }
                    }
                    c[(bi * n_v + ks, bj * n_v + ls)] = acc * (wk * wl * inv_l);
                }
            }
        }
    }
    // clean up the Hermitian roundoff
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = (c[(i, j)] + c[(j, i)].conj()) * 0.5;
            c[(i, j)] = avg;
            c[(j, i)] = avg.conj();
        }
        c[(i, i)] = Complex64::new(c[(i, i)].re, 0.0);
    }
    let trace_value = (0..dim).map(|i| c[(i, i)].re).sum();
    ErrorCovariance {
        c,
        trace_value,
        dof: dim * dim,
    }
}

/// Same contraction with the covariance estimate substituted for `R`.
pub fn estimated_error_covariance(
    r_hat: &DMatrix<Complex64>,
    rd: &RdMaps,
    l: usize,
) -> ErrorCovariance {
    error_covariance(r_hat, rd, l)
}

/// Trace of the error covariance without forming the full matrix.
pub fn error_covariance_trace(r: &DMatrix<Complex64>, rd: &RdMaps, l: usize) -> f64 {
    let m_bins = rd.config().m_bins;
    let n_v = rd.maps().n_v();
    let b = bin_pair_covariances(r, rd);
    let p = rd.maps().p();
    let inv_l = 1.0 / l as f64;
    let mut trace = 0.0;
    for bi in 0..m_bins {
        let b_ii = &b[bi * m_bins + bi];
        for ks in 0..n_v {
            let pairs: Vec<(usize, usize)> = p.pairs(ks).collect();
            let w = 1.0 / pairs.len() as f64;
            let mut acc = Complex64::default();
            for &(pb, pc) in &pairs {
                for &(pa, pd) in &pairs {
                    acc += b_ii[(pa, pb)] * b_ii[(pc, pd)];
                }
            }
            trace += (acc * (w * w * inv_l)).re;
        }
    }
    trace
}

/// All `m^2` cross-bin spatial covariances `B_ij = (u_i (x) I)^H R (u_j (x) I)`.
fn bin_pair_covariances(r: &DMatrix<Complex64>, rd: &RdMaps) -> Vec<DMatrix<Complex64>> {
    let n = rd.maps().geometry().len();
    let m = rd.maps().m_pulses();
    let bins = rd.bins();
    let m_bins = bins.len();
    // left contraction per bin: y_i[p, m2*n+q] = sum_m1 conj(u_i[m1]) R[(m1,p),(m2,q)]
    let mut left = Vec::with_capacity(m_bins);
    for u in bins {
        let mut y = DMatrix::from_element(n, n * m, Complex64::default());
        for m1 in 0..m {
            let uc = u[m1].conj();
            for c in 0..n * m {
                for p in 0..n {
                    y[(p, c)] += uc * r[(m1 * n + p, c)];
                }
            }
        }
        left.push(y);
    }
    let mut out = Vec::with_capacity(m_bins * m_bins);
    for yi in &left {
        for u in bins {
            let mut b = DMatrix::from_element(n, n, Complex64::default());
            for m2 in 0..m {
                let um = u[m2];
                for q in 0..n {
                    for p in 0..n {
                        b[(p, q)] += yi[(p, m2 * n + q)] * um;
                    }
                }
            }
            out.push(b);
        }
    }
    out
}

/// One row of the Monte Carlo variance table.
#[derive(Debug, Clone, Copy)]
pub struct VarianceRow {
    pub l: usize,
    /// Mean of the squared snapshot error over the trials.
    pub empirical: f64,
    /// Mean of `trace(C_hat)` over the trials, each trial using its own
    /// covariance estimate.
    pub theoretical: f64,
}

/// Monte Carlo verification of the error-covariance trace: for each
/// sample count, draw `trials` independent training sets and average both
/// the squared snapshot error and the estimated theoretical trace.
/// Deterministic per seed and independent of thread count.
pub fn variance_experiment(
    scenario: &RadarScenario,
    rd: &RdMaps,
    l_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Vec<VarianceRow> {
    let generator = SnapshotGenerator::new(scenario);
    let r_true = crate::signal::true_covariance(scenario);
    let z_true = rd.apply_d(&r_true).expect("scenario matches rd maps");
    l_grid
        .iter()
        .enumerate()
        .map(|(li, &l)| {
            let pairs: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let s = derive_seed(seed, li as u64, trial as u64);
                    let r_hat = generator
                        .sample_covariance(l, s)
                        .expect("l >= 1 snapshots");
                    let z_hat = rd.apply_d(&r_hat).expect("dims fixed");
                    let err = (&z_hat - &z_true).norm_squared();
                    let theo = error_covariance_trace(&r_hat, rd, l);
                    (err, theo)
                })
                .collect();
            let empirical = pairs.iter().map(|p| p.0).sum::<f64>() / trials as f64;
            let theoretical = pairs.iter().map(|p| p.1).sum::<f64>() / trials as f64;
            VarianceRow {
                l,
                empirical,
                theoretical,
            }
        })
        .collect()
}

/// Stable seed mixing for independent Monte Carlo streams.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut x = master
        ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Squared norm of the whitened error, whitening restricted to the
/// eigenvalues of `C` above `1e-10 lambda_max`; its mean over trials is
/// the retained rank.
pub fn whitened_error_norm_sq(c: &ErrorCovariance, err: &DVector<Complex64>) -> (f64, usize) {
    let eig = nalgebra::SymmetricEigen::new(c.c.clone());
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-10 * lam_max;
    let mut stat = 0.0;
    let mut rank = 0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol {
            rank += 1;
            let proj = eig.eigenvectors.column(i).dotc(err).norm_sqr();
            stat += proj / lam;
        }
    }
    (stat, rank)
}
