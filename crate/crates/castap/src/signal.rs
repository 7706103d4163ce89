//! Scenario description, space-time steering, clutter covariance models,
//! and seeded snapshot generation.
//!
//! Frequencies are normalized: Doppler by the PRF (`w = f_d * t_r`) and
//! spatial frequency so that a sensor at integer position `d` contributes
//! the phase `2 pi d theta`.

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, VirtualMaps};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Target description: normalized Doppler, normalized spatial frequency,
/// complex amplitude.
#[derive(Debug, Clone, Copy)]
pub struct Target {
    pub doppler: f64,
    pub spatial_freq: f64,
    pub amplitude: Complex64,
}

impl Default for Target {
    fn default() -> Self {
        Self {
            doppler: 0.1667,
            spatial_freq: 0.0,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }
}

/// Airborne radar scenario: platform, waveform, and clutter parameters.
#[derive(Debug, Clone)]
pub struct RadarScenario {
    pub geom: ArrayGeometry,
    pub m_pulses: usize,
    /// Wavelength in meters.
    pub lambda: f64,
    /// Pulse repetition interval in seconds.
    pub t_r: f64,
    /// True platform velocity in m/s.
    pub v_p: f64,
    /// True crab angle in radians.
    pub psi: f64,
    /// Elevation angle in radians.
    pub phi: f64,
    /// Number of clutter patches on the iso-range ring.
    pub n_clutter: usize,
    /// Clutter-to-noise ratio in dB (total clutter power over noise power).
    pub cnr_db: f64,
    /// Noise power (linear).
    pub sigma_n2: f64,
    pub target: Target,
}

impl RadarScenario {
    /// Scenario with the desk defaults: lambda = 0.125 m, PRI = 1/4000 s,
    /// 361 clutter patches, unit noise power.
    pub fn new(geom: ArrayGeometry, m_pulses: usize) -> Self {
        Self {
            geom,
            m_pulses,
            lambda: 0.125,
            t_r: 1.0 / 4000.0,
            v_p: 125.0,
            psi: 0.0,
            phi: 0.0,
            n_clutter: 361,
            cnr_db: 40.0,
            sigma_n2: 1.0,
            target: Target::default(),
        }
    }

    /// Clutter-ridge slope `beta = 4 v_p t_r / lambda` (equals
    /// doppler/spatial frequency ratio for a side-looking array at
    /// half-wavelength spacing).
    pub fn beta(&self) -> f64 {
        4.0 * self.v_p * self.t_r / self.lambda
    }

    /// Set the platform velocity from a desired ridge slope.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.v_p = beta * self.lambda / (4.0 * self.t_r);
        self
    }

    pub fn n_elements(&self) -> usize {
        self.geom.len()
    }

    /// Joint space-time dimension `N * M`.
    pub fn nm(&self) -> usize {
        self.geom.len() * self.m_pulses
    }

    /// Per-patch power for equal-power patches at the configured CNR.
    pub fn patch_power(&self) -> f64 {
        self.sigma_n2 * 10f64.powf(self.cnr_db / 10.0) / self.n_clutter as f64
    }

    /// Clutter patches uniformly spaced in azimuth over the full ring.
    pub fn clutter_patches(&self) -> ClutterPatchSet {
        let n = self.n_clutter;
        let power = self.patch_power();
        let mut patches = ClutterPatchSet {
            azimuths: Vec::with_capacity(n),
            spatial_freqs: Vec::with_capacity(n),
            dopplers: Vec::with_capacity(n),
            powers: vec![power; n],
        };
        for i in 0..n {
            let theta = if n == 1 {
                0.0
            } else {
                -PI + 2.0 * PI * i as f64 / (n - 1) as f64
            };
            let (sf, dop) = clutter_frequencies(theta, self, self.v_p, self.psi);
            patches.azimuths.push(theta);
            patches.spatial_freqs.push(sf);
            patches.dopplers.push(dop);
        }
        patches
    }
}

/// Clutter patch set: per-patch azimuth, frequencies, and power.
#[derive(Debug, Clone)]
pub struct ClutterPatchSet {
    pub azimuths: Vec<f64>,
    pub spatial_freqs: Vec<f64>,
    pub dopplers: Vec<f64>,
    pub powers: Vec<f64>,
}

impl ClutterPatchSet {
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Temporal steering vector: entry `k` is `exp(j 2 pi k w)`.
pub fn temporal_steering(doppler: f64, m_pulses: usize) -> DVector<Complex64> {
    DVector::from_fn(m_pulses, |k, _| {
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 * doppler)
    })
}

/// Spatial steering vector over the array positions.
pub fn spatial_steering(spatial_freq: f64, geom: &ArrayGeometry) -> DVector<Complex64> {
    DVector::from_iterator(
        geom.len(),
        geom.positions()
            .iter()
            .map(|&d| Complex64::from_polar(1.0, 2.0 * PI * d as f64 * spatial_freq)),
    )
}

/// Space-time steering vector `b(w) (x) a(theta)` (pulse-major).
pub fn space_time_steering(
    doppler: f64,
    spatial_freq: f64,
    geom: &ArrayGeometry,
    m_pulses: usize,
) -> DVector<Complex64> {
    let b = temporal_steering(doppler, m_pulses);
    let a = spatial_steering(spatial_freq, geom);
    let n = a.len();
    let mut v = DVector::from_element(n * m_pulses, Complex64::default());
    for k in 0..m_pulses {
        for i in 0..n {
            v[k * n + i] = b[k] * a[i];
        }
    }
    v
}

/// Spatial and Doppler frequency of a clutter patch at azimuth `theta`,
/// computed with the supplied platform velocity and crab angle (so the
/// caller chooses true or measured values).
pub fn clutter_frequencies(
    theta: f64,
    scenario: &RadarScenario,
    v_p_used: f64,
    psi_used: f64,
) -> (f64, f64) {
    let cos_phi = scenario.phi.cos();
    let spatial = scenario.geom.d0() / scenario.lambda * cos_phi * theta.sin();
    let doppler = 2.0 * v_p_used * scenario.t_r / scenario.lambda * cos_phi * (theta + psi_used).sin();
    (spatial, doppler)
}

/// Element-space clutter steering matrix (one column per patch).
pub fn clutter_steering_matrix(scenario: &RadarScenario) -> DMatrix<Complex64> {
    let patches = scenario.clutter_patches();
    let nm = scenario.nm();
    let mut v = DMatrix::from_element(nm, patches.len(), Complex64::default());
    for (i, (&dop, &sf)) in patches
        .dopplers
        .iter()
        .zip(patches.spatial_freqs.iter())
        .enumerate()
    {
        v.set_column(i, &space_time_steering(dop, sf, &scenario.geom, scenario.m_pulses));
    }
    v
}

/// Clutter-only covariance `V diag(p) V^H`.
pub fn clutter_covariance(scenario: &RadarScenario) -> DMatrix<Complex64> {
    let v = clutter_steering_matrix(scenario);
    weighted_outer(&v, &scenario.clutter_patches().powers)
}

/// True interference covariance `V diag(p) V^H + sigma_n^2 I`.
pub fn true_covariance(scenario: &RadarScenario) -> DMatrix<Complex64> {
    let mut r = clutter_covariance(scenario);
    for i in 0..r.nrows() {
        r[(i, i)] += scenario.sigma_n2;
    }
    r
}

/// Virtual-domain clutter steering matrix on the coarray grid.
pub fn virtual_clutter_steering(scenario: &RadarScenario, maps: &VirtualMaps) -> DMatrix<Complex64> {
    let patches = scenario.clutter_patches();
    let mut v = DMatrix::from_element(maps.n_v() * maps.m_v(), patches.len(), Complex64::default());
    for (i, (&dop, &sf)) in patches
        .dopplers
        .iter()
        .zip(patches.spatial_freqs.iter())
        .enumerate()
    {
        v.set_column(i, &maps.virtual_steering(dop, sf));
    }
    v
}

/// Virtual-domain covariance `V_v diag(p) V_v^H + sigma_n^2 I`.
pub fn virtual_covariance(scenario: &RadarScenario, maps: &VirtualMaps) -> DMatrix<Complex64> {
    let v = virtual_clutter_steering(scenario, maps);
    let mut r = weighted_outer(&v, &scenario.clutter_patches().powers);
    for i in 0..r.nrows() {
        r[(i, i)] += scenario.sigma_n2;
    }
    r
}

/// `V diag(p) V^H` without forming `diag(p)`.
fn weighted_outer(v: &DMatrix<Complex64>, powers: &[f64]) -> DMatrix<Complex64> {
    let mut scaled = v.clone();
    for (i, &p) in powers.iter().enumerate() {
        let s = Complex64::new(p, 0.0);
        scaled.column_mut(i).scale_mut(1.0);
        for r in 0..scaled.nrows() {
            scaled[(r, i)] = v[(r, i)] * s;
        }
    }
    &scaled * v.adjoint()
}

/// Seeded generator of IID clutter-plus-noise snapshots. The steering
/// matrix is precomputed once; draws are deterministic per seed.
#[derive(Debug, Clone)]
pub struct SnapshotGenerator {
    steering: DMatrix<Complex64>,
    amp_sigmas: Vec<f64>,
    noise_sigma: f64,
    nm: usize,
}

impl SnapshotGenerator {
    pub fn new(scenario: &RadarScenario) -> Self {
        let patches = scenario.clutter_patches();
        Self {
            steering: clutter_steering_matrix(scenario),
            amp_sigmas: patches.powers.iter().map(|p| (p / 2.0).sqrt()).collect(),
            noise_sigma: (scenario.sigma_n2 / 2.0).sqrt(),
            nm: scenario.nm(),
        }
    }

    /// Draw `l` snapshots `x = V alpha + n` with circular complex Gaussian
    /// amplitudes and noise.
    pub fn snapshots(&self, l: usize, seed: u64) -> Vec<DVector<Complex64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let nc = self.amp_sigmas.len();
        (0..l)
            .map(|_| {
                let mut x = DVector::from_element(self.nm, Complex64::default());
                for (i, &s) in self.amp_sigmas.iter().enumerate().take(nc) {
                    let alpha = Complex64::new(
                        s * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng),
                        s * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng),
                    );
                    x.axpy(alpha, &self.steering.column(i).into_owned(), Complex64::new(1.0, 0.0));
                }
                for k in 0..self.nm {
                    x[k] += Complex64::new(
                        self.noise_sigma * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng),
                        self.noise_sigma * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng),
                    );
                }
                x
            })
            .collect()
    }

    /// Sample covariance of `l` fresh snapshots.
    pub fn sample_covariance(&self, l: usize, seed: u64) -> Result<DMatrix<Complex64>> {
        sample_covariance(&self.snapshots(l, seed))
    }
}

/// Convenience wrapper: draw `l` snapshots of the scenario.
pub fn generate_snapshots(scenario: &RadarScenario, l: usize, seed: u64) -> Vec<DVector<Complex64>> {
    SnapshotGenerator::new(scenario).snapshots(l, seed)
}

/// `(1/L) sum x_i x_i^H`.
pub fn sample_covariance(snapshots: &[DVector<Complex64>]) -> Result<DMatrix<Complex64>> {
    let l = snapshots.len();
    if l == 0 {
        return Err(Error::EmptyInput("sample_covariance needs at least one snapshot"));
    }
    let n = snapshots[0].len();
    let mut r = DMatrix::from_element(n, n, Complex64::default());
    for x in snapshots {
        // accumulate the lower triangle, mirror afterwards
        for j in 0..n {
            let xj = x[j].conj();
            for i in j..n {
                r[(i, j)] += x[i] * xj;
            }
        }
    }
    let scale = 1.0 / l as f64;
    for j in 0..n {
        for i in j..n {
            r[(i, j)] *= scale;
            if i != j {
                r[(j, i)] = r[(i, j)].conj();
            }
        }
    }
    Ok(r)
}
