//! First reduced-dimension stage: a small set of DFT Doppler channels
//! around the target frequency, the stacked block map `D` taking a
//! vectorized element-space covariance to the RD virtual snapshot, and
//! the map `G = D pinv(F)` linking the RD snapshot to the full virtual
//! snapshot.

use crate::error::{Error, Result};
use crate::geometry::VirtualMaps;
use crate::signal::temporal_steering;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;

/// Relative singular-value cutoff for the pseudo-inverse of `F`.
const PINV_RTOL: f64 = 1e-10;

/// Doppler-channel layout of the reduction stage.
#[derive(Debug, Clone)]
pub struct RdConfig {
    pub m_bins: usize,
    pub target_doppler: f64,
    pub bin_centers: Vec<f64>,
}

impl RdConfig {
    pub fn new(target_doppler: f64, m_bins: usize, m_pulses: usize) -> Result<Self> {
        let bin_centers = doppler_bin_centers(target_doppler, m_bins, m_pulses)?;
        Ok(Self {
            m_bins,
            target_doppler,
            bin_centers,
        })
    }
}

/// Doppler bin centers `w_t + (i - (m-1)/2)/M` for `i = 0..m`, requiring
/// odd `m` so the target sits on the middle bin.
pub fn doppler_bin_centers(target_doppler: f64, m_bins: usize, m_pulses: usize) -> Result<Vec<f64>> {
    if m_bins == 0 || m_bins.is_multiple_of(2) {
        return Err(Error::InvalidConfiguration(format!(
            "number of Doppler bins must be odd and >= 1, got {m_bins}"
        )));
    }
    let half = (m_bins as f64 - 1.0) / 2.0;
    Ok((0..m_bins)
        .map(|i| target_doppler + (i as f64 - half) / m_pulses as f64)
        .collect())
}

/// DFT column at frequency `freq`; same phasor law as the temporal
/// steering vector.
pub fn dft_bin_vector(freq: f64, m_pulses: usize) -> DVector<Complex64> {
    temporal_steering(freq, m_pulses)
}

/// Doppler-reduction maps for one `(geometry, M, m, target)` tuple.
#[derive(Debug, Clone)]
pub struct RdMaps {
    maps: Arc<VirtualMaps>,
    config: RdConfig,
    bins: Vec<DVector<Complex64>>,
    g: DMatrix<Complex64>,
    g_e0: DVector<Complex64>,
}

impl RdMaps {
    /// Build the reduction maps, forming `G = D pinv(F)` with the
    /// pseudo-inverse taken through the singular values of `F`. The rows
    /// of `F` have disjoint support, so `F F^H` is diagonal and carries
    /// the squared singular values directly; a value at or below
    /// `1e-10 * sigma_max` is a rank failure.
    pub fn build(maps: Arc<VirtualMaps>, config: RdConfig) -> Result<Self> {
        let m_pulses = maps.m_pulses();
        let bins: Vec<DVector<Complex64>> = config
            .bin_centers
            .iter()
            .map(|&w| dft_bin_vector(w, m_pulses))
            .collect();

        let gram = maps.f().gram();
        let mut sigma = Vec::with_capacity(gram.nrows());
        let mut sigma_max = 0.0f64;
        for i in 0..gram.nrows() {
            let s = gram[(i, i)].sqrt();
            sigma.push(s);
            sigma_max = sigma_max.max(s);
        }
        let tol = PINV_RTOL * sigma_max;
        if let Some((i, &s)) = sigma
            .iter()
            .enumerate()
            .find(|&(_, &s)| s <= tol || !s.is_finite())
        {
            return Err(Error::NumericalRank(format!(
                "F is rank deficient: singular value {s:.3e} at row {i} below tolerance {tol:.3e}"
            )));
        }

        let d = build_d_dense(&maps, &bins);
        let mut g = maps.f().right_mul_adjoint(&d)?;
        for (r, &s) in sigma.iter().enumerate() {
            let inv = 1.0 / (s * s);
            for i in 0..g.nrows() {
                g[(i, r)] *= inv;
            }
        }
        let g_e0 = g.column(maps.f().e0_index()).into_owned();
        Ok(Self {
            maps,
            config,
            bins,
            g,
            g_e0,
        })
    }

    pub fn maps(&self) -> &VirtualMaps {
        &self.maps
    }

    pub fn config(&self) -> &RdConfig {
        &self.config
    }

    /// Dimension of the RD virtual snapshot, `m * N_v`.
    pub fn rd_dim(&self) -> usize {
        self.config.m_bins * self.maps.n_v()
    }

    /// `G` of size `m N_v x N_v M_v`.
    pub fn g(&self) -> &DMatrix<Complex64> {
        &self.g
    }

    /// `G e0`, the RD image of a unit-power identity covariance.
    pub fn g_e0(&self) -> &DVector<Complex64> {
        &self.g_e0
    }

    /// RD virtual snapshot `z_r = D vec(R)`, computed blockwise: per bin
    /// the spatial covariance `(u (x) I)^H R (u (x) I)` followed by the
    /// coarray averaging of `P`.
    pub fn apply_d(&self, r: &DMatrix<Complex64>) -> Result<DVector<Complex64>> {
        let n = self.maps.geometry().len();
        let m = self.maps.m_pulses();
        if r.nrows() != n * m || r.ncols() != n * m {
            return Err(Error::ShapeMismatch(format!(
                "covariance must be {0}x{0}, got {1}x{2}",
                n * m,
                r.nrows(),
                r.ncols()
            )));
        }
        let n_v = self.maps.n_v();
        let mut z = DVector::from_element(self.rd_dim(), Complex64::default());
        for (bi, u) in self.bins.iter().enumerate() {
            let b = self.bin_spatial_covariance(r, u);
            let zb = self.maps.p().apply_to_matrix(&b);
            z.rows_mut(bi * n_v, n_v).copy_from(&zb);
        }
        Ok(z)
    }

    /// `(u (x) I)^H R (u (x) I)` for one Doppler bin.
    fn bin_spatial_covariance(
        &self,
        r: &DMatrix<Complex64>,
        u: &DVector<Complex64>,
    ) -> DMatrix<Complex64> {
        let n = self.maps.geometry().len();
        let m = self.maps.m_pulses();
        let mut y = DMatrix::from_element(n, n * m, Complex64::default());
        for m1 in 0..m {
            let uc = u[m1].conj();
            for c in 0..n * m {
                for p in 0..n {
                    y[(p, c)] += uc * r[(m1 * n + p, c)];
                }
            }
        }
        let mut b = DMatrix::from_element(n, n, Complex64::default());
        for m2 in 0..m {
            let um = u[m2];
            for q in 0..n {
                for p in 0..n {
                    b[(p, q)] += y[(p, m2 * n + q)] * um;
                }
            }
        }
        b
    }

    /// Dense `D` (`m N_v x N^2 M^2`): row `(bin i, lag k)` holds
    /// `conj(u_i[m1]) u_i[m2] / omega_k` at the covariance entries of the
    /// pairs with spatial lag `n_k`.
    pub fn d_dense(&self) -> DMatrix<Complex64> {
        build_d_dense(&self.maps, &self.bins)
    }

    /// `z_r = G z` for a full virtual snapshot `z`.
    pub fn apply_g(&self, z: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if z.len() != self.g.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "G expects length {}, got {}",
                self.g.ncols(),
                z.len()
            )));
        }
        Ok(&self.g * z)
    }

    /// RD virtual steering vector `G F (v* (x) v)`; `F (v* (x) v)` is the
    /// virtual steering image of `F`.
    pub fn rd_virtual_steering(&self, doppler: f64, spatial_freq: f64) -> DVector<Complex64> {
        let v_v = self.maps.virtual_steering(doppler, spatial_freq);
        &self.g * v_v
    }

    /// Doppler bin vectors `u(w_i)`.
    pub fn bins(&self) -> &[DVector<Complex64>] {
        &self.bins
    }
}

fn build_d_dense(maps: &VirtualMaps, bins: &[DVector<Complex64>]) -> DMatrix<Complex64> {
    let n = maps.geometry().len();
    let m = maps.m_pulses();
    let n_v = maps.n_v();
    let nm = n * m;
    let p = maps.p();
    let mut d = DMatrix::from_element(bins.len() * n_v, nm * nm, Complex64::default());
    for (bi, u) in bins.iter().enumerate() {
        for k in 0..n_v {
            let w = 1.0 / p.weight(k) as f64;
            let row = bi * n_v + k;
            for (i, j) in p.pairs(k) {
                for m1 in 0..m {
                    for m2 in 0..m {
                        // vec(R) column index of entry (m1*n+i, m2*n+j)
                        let col = (m2 * n + j) * nm + m1 * n + i;
                        d[(row, col)] += u[m1].conj() * u[m2] * w;
                    }
                }
            }
        }
    }
    d
}

/// RD virtual snapshot of a covariance estimate.
pub fn rd_virtual_snapshot(r_hat: &DMatrix<Complex64>, rd: &RdMaps) -> Result<DVector<Complex64>> {
    rd.apply_d(r_hat)
}
