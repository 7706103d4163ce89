//! Second reduced-dimension stage: the knowledge-aided overcomplete
//! dictionary. Azimuth is gridded uniformly; per angle the assumed
//! clutter Doppler (from measured platform velocity and crab angle) is
//! expanded into a small uncertainty grid whose width comes from the
//! error bounds, and each (angle, Doppler) pair becomes one RD virtual
//! steering atom.

use crate::error::{Error, Result};
use crate::rd::RdMaps;
use crate::signal::{clutter_frequencies, RadarScenario};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which Doppler-uncertainty bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundFormula {
    /// The bound as published, with the platform velocity entering the
    /// crab-angle term through `v'_p/2 (dpsi)^2 + v'_p - 1`.
    #[default]
    Literal,
    /// Small-angle simplification `sqrt((v'_p dpsi)^2 + dv^2)`, kept as a
    /// sanity cross-check of the literal form.
    Simplified,
}

/// Measured radar parameters and their error ranges.
#[derive(Debug, Clone)]
pub struct PriorKnowledge {
    /// Measured platform velocity `v'_p` in m/s.
    pub v_p_measured: f64,
    /// Measured crab angle in radians.
    pub psi_measured: f64,
    /// Velocity error bound in m/s.
    pub dv_pm: f64,
    /// Crab-angle error bound in radians.
    pub dpsi_m: f64,
    /// Doppler grid points per azimuth angle.
    pub m_e: usize,
    /// Azimuth grid size.
    pub n_angles: usize,
    pub bound_formula: BoundFormula,
}

impl PriorKnowledge {
    pub fn validate(&self) -> Result<()> {
        if self.dv_pm < 0.0 || self.dpsi_m < 0.0 {
            return Err(Error::InvalidPrior("error bounds must be non-negative".into()));
        }
        if self.m_e == 0 || self.n_angles == 0 {
            return Err(Error::InvalidPrior("m_e and n_angles must be >= 1".into()));
        }
        Ok(())
    }
}

/// Normalized-Doppler uncertainty half-width implied by the velocity and
/// crab-angle error bounds. The published expression is evaluated with
/// the velocity in m/s and the result converted to normalized Doppler by
/// the PRI.
pub fn doppler_uncertainty_bound(
    prior: &PriorKnowledge,
    phi: f64,
    lambda: f64,
    t_r: f64,
) -> Result<f64> {
    prior.validate()?;
    let v = prior.v_p_measured;
    let radicand = match prior.bound_formula {
        BoundFormula::Literal => {
            let a = v / 2.0 * prior.dpsi_m * prior.dpsi_m + v - 1.0;
            a * a + prior.dv_pm * prior.dv_pm - (v - 1.0) * (v - 1.0)
        }
        BoundFormula::Simplified => {
            let a = v * prior.dpsi_m;
            a * a + prior.dv_pm * prior.dv_pm
        }
    };
    if radicand < 0.0 {
        return Err(Error::InvalidPrior(format!(
            "negative radicand {radicand:.3e} in the Doppler uncertainty bound"
        )));
    }
    Ok(2.0 / lambda * phi.cos().abs() * radicand.sqrt() * t_r)
}

/// Uniform Doppler grid over `[assumed - bound, assumed + bound]`.
#[derive(Debug, Clone)]
pub struct DopplerGrid {
    pub freqs: Vec<f64>,
    /// Set when `m_e = 1` was requested for a nonzero bound, so the grid
    /// cannot cover the uncertainty interval.
    pub degenerate: bool,
}

pub fn doppler_grid(assumed: f64, bound: f64, m_e: usize) -> DopplerGrid {
    if bound == 0.0 {
        return DopplerGrid {
            freqs: vec![assumed; m_e.max(1)],
            degenerate: false,
        };
    }
    if m_e < 2 {
        return DopplerGrid {
            freqs: vec![assumed],
            degenerate: true,
        };
    }
    let lo = assumed - bound;
    let step = 2.0 * bound / (m_e - 1) as f64;
    DopplerGrid {
        freqs: (0..m_e).map(|k| lo + k as f64 * step).collect(),
        degenerate: false,
    }
}

/// Grid metadata of one atom.
#[derive(Debug, Clone, Copy)]
pub struct AtomInfo {
    pub theta_index: usize,
    pub theta: f64,
    pub doppler: f64,
    pub spatial_freq: f64,
}

/// Two-stage RD dictionary: unit-normalized atoms plus the raw steering
/// norms. The raw norm carries the Doppler-window gain of each atom and
/// is what the greedy selection correlates against; the stored columns
/// stay unit-norm.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub atoms: DMatrix<Complex64>,
    pub raw_norms: Vec<f64>,
    pub grid: Vec<AtomInfo>,
    pub degenerate_grid: bool,
}

impl Dictionary {
    pub fn n_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }
}

/// Build the `m N_v x (M_e * n_angles)` dictionary, columns ordered
/// angle-major. Atom values are the RD virtual steering vectors of the
/// gridded (angle, Doppler) pairs.
pub fn build_dictionary(
    scenario: &RadarScenario,
    prior: &PriorKnowledge,
    rd: &RdMaps,
) -> Result<Dictionary> {
    prior.validate()?;
    let bound = doppler_uncertainty_bound(prior, scenario.phi, scenario.lambda, scenario.t_r)?;
    let n_ang = prior.n_angles;
    let n_atoms = n_ang * prior.m_e.max(1);
    let dim = rd.rd_dim();
    let n_v = rd.maps().n_v();
    let m_v = rd.maps().m_v();
    let tlags = rd.maps().temporal_lags();
    let g = rd.g();

    let mut atoms = DMatrix::from_element(dim, n_atoms, Complex64::default());
    let mut raw_norms = Vec::with_capacity(n_atoms);
    let mut grid = Vec::with_capacity(n_atoms);
    let mut degenerate = false;
    let mut col = 0;

    // per-angle contraction of G with the spatial coarray steering:
    // h[r][kt] = sum_ks G[r, kt*N_v + ks] a_v[ks], so each atom is the
    // cheap product h * b_v(doppler)
    let mut h = vec![Complex64::default(); dim * m_v];
    for ai in 0..n_ang {
        let theta = -PI / 2.0 + (ai + 1) as f64 * PI / n_ang as f64;
        let (sf, assumed) =
            clutter_frequencies(theta, scenario, prior.v_p_measured, prior.psi_measured);
        let a_v = rd.maps().coarray_steering(sf);
        for r in 0..dim {
            for kt in 0..m_v {
                let mut acc = Complex64::default();
                for ks in 0..n_v {
                    acc += g[(r, kt * n_v + ks)] * a_v[ks];
                }
                h[r * m_v + kt] = acc;
            }
        }
        let dg = doppler_grid(assumed, bound, prior.m_e);
        degenerate |= dg.degenerate;
        for &w in &dg.freqs {
            let b_v: Vec<Complex64> = tlags
                .iter()
                .map(|&ml| Complex64::from_polar(1.0, 2.0 * PI * ml as f64 * w))
                .collect();
            let mut norm_sq = 0.0;
            for r in 0..dim {
                let mut acc = Complex64::default();
                for kt in 0..m_v {
                    acc += h[r * m_v + kt] * b_v[kt];
                }
                atoms[(r, col)] = acc;
                norm_sq += acc.norm_sqr();
            }
            let norm = norm_sq.sqrt();
            if norm > 0.0 {
                let inv = Complex64::new(1.0 / norm, 0.0);
                for r in 0..dim {
                    atoms[(r, col)] *= inv;
                }
            }
            raw_norms.push(norm);
            grid.push(AtomInfo {
                theta_index: ai,
                theta,
                doppler: w,
                spatial_freq: sf,
            });
            col += 1;
        }
    }
    Ok(Dictionary {
        atoms,
        raw_norms,
        grid,
        degenerate_grid: degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArrayGeometry, VirtualMaps};
    use crate::rd::RdConfig;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn prior(dv: f64, dpsi_deg: f64, m_e: usize, n_angles: usize) -> PriorKnowledge {
        PriorKnowledge {
            v_p_measured: 125.0,
            psi_measured: 0.0,
            dv_pm: dv,
            dpsi_m: dpsi_deg.to_radians(),
            m_e,
            n_angles,
            bound_formula: BoundFormula::Literal,
        }
    }

    fn small_rd(m_pulses: usize, m_bins: usize, target: f64) -> (RadarScenario, RdMaps) {
        let geom = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let scen = RadarScenario::new(geom.clone(), m_pulses);
        let maps = Arc::new(VirtualMaps::build(geom, m_pulses).unwrap());
        let rd = RdMaps::build(maps, RdConfig::new(target, m_bins, m_pulses).unwrap()).unwrap();
        (scen, rd)
    }

    #[test]
    fn bound_zero_errors_is_zero() {
        let p = prior(0.0, 0.0, 5, 10);
        let b = doppler_uncertainty_bound(&p, 0.0, 0.125, 1.0 / 4000.0).unwrap();
        assert_relative_eq!(b, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bound_velocity_only_reduces_exactly() {
        let p = prior(2.0, 0.0, 5, 10);
        let (lambda, tr) = (0.125, 1.0 / 4000.0);
        let b = doppler_uncertainty_bound(&p, 0.3, lambda, tr).unwrap();
        let expect = 2.0 / lambda * 0.3f64.cos() * 2.0 * tr;
        assert_relative_eq!(b, expect, max_relative = 1e-12);
    }

    #[test]
    fn bound_monotone_in_error_ranges() {
        let (lambda, tr) = (0.125, 1.0 / 4000.0);
        let b1 = doppler_uncertainty_bound(&prior(1.0, 0.5, 5, 10), 0.0, lambda, tr).unwrap();
        let b2 = doppler_uncertainty_bound(&prior(2.0, 0.5, 5, 10), 0.0, lambda, tr).unwrap();
        let b3 = doppler_uncertainty_bound(&prior(2.0, 1.0, 5, 10), 0.0, lambda, tr).unwrap();
        assert!(b2 >= b1);
        assert!(b3 >= b2);
    }

    #[test]
    fn bound_negative_radicand_rejected() {
        // sub-unit velocity with a large crab error drives the literal
        // radicand negative
        let mut p = prior(0.0, 0.0, 5, 10);
        p.v_p_measured = 0.5;
        p.dpsi_m = 0.4;
        assert!(matches!(
            doppler_uncertainty_bound(&p, 0.0, 0.125, 1.0 / 4000.0),
            Err(Error::InvalidPrior(_))
        ));
    }

    #[test]
    fn literal_and_simplified_bounds_close_at_desk_scale() {
        let mut p = prior(2.0, 1.0, 5, 10);
        let (lambda, tr) = (0.125, 1.0 / 4000.0);
        let lit = doppler_uncertainty_bound(&p, 0.0, lambda, tr).unwrap();
        p.bound_formula = BoundFormula::Simplified;
        let simp = doppler_uncertainty_bound(&p, 0.0, lambda, tr).unwrap();
        assert_relative_eq!(lit, simp, max_relative = 0.02);
    }

    #[test]
    fn doppler_grid_partition() {
        let g = doppler_grid(0.2, 0.05, 3);
        assert!(!g.degenerate);
        assert_relative_eq!(g.freqs[0], 0.15, epsilon = 1e-12);
        assert_relative_eq!(g.freqs[1], 0.20, epsilon = 1e-12);
        assert_relative_eq!(g.freqs[2], 0.25, epsilon = 1e-12);
        let z = doppler_grid(0.3, 0.0, 4);
        assert!(z.freqs.iter().all(|&f| f == 0.3));
        let d = doppler_grid(0.1, 0.02, 1);
        assert!(d.degenerate);
        assert_eq!(d.freqs, vec![0.1]);
        // endpoints land exactly on the bound edges
        let e = doppler_grid(-0.1, 0.013, 7);
        assert_relative_eq!(e.freqs[0], -0.113, epsilon = 1e-12);
        assert_relative_eq!(e.freqs[6], -0.087, epsilon = 1e-12);
    }

    #[test]
    fn dictionary_default_dimensions() {
        let geom = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let scen = RadarScenario::new(geom.clone(), 18);
        let maps = Arc::new(VirtualMaps::build(geom, 18).unwrap());
        let rd = RdMaps::build(maps, RdConfig::new(0.1667, 3, 18).unwrap()).unwrap();
        let n_v = rd.maps().n_v();
        let dict = build_dictionary(&scen, &prior(2.0, 1.0, 15, 5 * n_v), &rd).unwrap();
        assert_eq!(dict.dim(), 51);
        assert_eq!(dict.n_atoms(), 1275);
        for c in 0..dict.n_atoms() {
            assert_relative_eq!(dict.atoms.column(c).norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_error_collapses_doppler_grid() {
        let (scen, rd) = small_rd(6, 3, 0.1);
        let dict = build_dictionary(&scen, &prior(0.0, 0.0, 4, 8), &rd).unwrap();
        // the M_e atoms of each angle are identical
        for ai in 0..8 {
            let base = dict.atoms.column(ai * 4).into_owned();
            for k in 1..4 {
                let d = (dict.atoms.column(ai * 4 + k) - &base).norm();
                assert!(d < 1e-12);
            }
        }
    }

    #[test]
    fn atoms_match_rd_virtual_steering() {
        let (scen, rd) = small_rd(6, 3, 0.15);
        let dict = build_dictionary(&scen, &prior(2.0, 1.0, 3, 7), &rd).unwrap();
        for (c, info) in dict.grid.iter().enumerate() {
            let direct = rd.rd_virtual_steering(info.doppler, info.spatial_freq);
            let norm = direct.norm();
            assert_relative_eq!(dict.raw_norms[c], norm, max_relative = 1e-9);
            for r in 0..dict.dim() {
                let e = direct[r] / Complex64::new(norm, 0.0);
                assert_relative_eq!(dict.atoms[(r, c)].re, e.re, epsilon = 1e-9);
                assert_relative_eq!(dict.atoms[(r, c)].im, e.im, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn construction_deterministic() {
        let (scen, rd) = small_rd(5, 3, 0.2);
        let a = build_dictionary(&scen, &prior(1.5, 0.7, 5, 11), &rd).unwrap();
        let b = build_dictionary(&scen, &prior(1.5, 0.7, 5, 11), &rd).unwrap();
        assert_eq!(a.atoms.as_slice(), b.atoms.as_slice());
        assert_eq!(a.raw_norms, b.raw_norms);
    }

    /// Finer grids bring the dictionary manifold closer to the true
    /// clutter atoms when the truth lies inside the prior bounds.
    #[test]
    fn grid_refinement_tightens_manifold_coverage() {
        let geom = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let mut scen = RadarScenario::new(geom.clone(), 6);
        scen.n_clutter = 120;
        let maps = Arc::new(VirtualMaps::build(geom, 6).unwrap());
        let rd = RdMaps::build(maps, RdConfig::new(0.1, 3, 6).unwrap()).unwrap();
        // measured values offset but inside the bounds
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v_meas = scen.v_p + 1.2;
        let psi_meas = 0.4f64.to_radians();
        let mk = |m_e: usize, n_angles: usize| PriorKnowledge {
            v_p_measured: v_meas,
            psi_measured: psi_meas,
            dv_pm: 2.0,
            dpsi_m: 1.0f64.to_radians(),
            m_e,
            n_angles,
            bound_formula: BoundFormula::Literal,
        };
        let worst_angle = |dict: &Dictionary| -> f64 {
            let patches = scen.clutter_patches();
            let mut worst = 0.0f64;
            for i in 0..patches.len() {
                let s = rd.rd_virtual_steering(patches.dopplers[i], patches.spatial_freqs[i]);
                let sn = s.norm();
                let mut best = 0.0f64;
                for c in 0..dict.n_atoms() {
                    let ip = (dict.atoms.column(c).adjoint() * &s)[(0, 0)].norm() / sn;
                    best = best.max(ip.min(1.0));
                }
                worst = worst.max(best.acos());
            }
            worst
        };
        let n_v = rd.maps().n_v();
        let coarse = worst_angle(&build_dictionary(&scen, &mk(3, 2 * n_v), &rd).unwrap());
        let fine = worst_angle(&build_dictionary(&scen, &mk(9, 5 * n_v), &rd).unwrap());
        let _ = &mut rng;
        assert!(
            fine < coarse,
            "fine grid angle {fine} should beat coarse {coarse}"
        );
    }
}
