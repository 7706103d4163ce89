//! Clutter-subspace estimation by greedy atom pursuit, the
//! eigenanalysis-style filter weight, SINR evaluation, and the
//! clairvoyant reference filters.

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::rd::RdMaps;
use crate::signal::{
    self, space_time_steering, virtual_covariance, RadarScenario,
};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Atoms whose Gram-Schmidt residual falls below this norm are treated as
/// numerically inside the current span and skipped.
const GS_EPS: f64 = 1e-12;

/// Relative weight-vector norm below which the filter is flagged as
/// degenerate (target steering swallowed by the estimated subspace).
const DEGENERATE_EPS: f64 = 1e-9;

/// Orthonormal clutter-subspace estimate.
#[derive(Debug, Clone)]
pub struct SubspaceEstimate {
    /// Orthonormal basis, one column per accepted iteration.
    pub basis: DMatrix<Complex64>,
    /// Dictionary columns selected, in pick order.
    pub indices: Vec<usize>,
    /// Residual norm after each accepted iteration (non-increasing).
    pub residual_norms: Vec<f64>,
}

impl SubspaceEstimate {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// Greedy subspace pursuit over the dictionary columns.
///
/// Iterates: pick the candidate maximizing the selection correlation
/// `weight_j * |atom_j^H residual|`, orthonormalize it against the basis
/// (Gram-Schmidt, one re-orthogonalization pass), deflate the residual,
/// and remove the column from candidacy. Selection weights are the raw
/// steering norms of the atoms, so the correlation equals the inner
/// product with the unnormalized steering dictionary; pass `None` for
/// plain unit-norm correlation.
pub fn omp_subspace(
    z_r: &DVector<Complex64>,
    atoms: &DMatrix<Complex64>,
    selection_weights: Option<&[f64]>,
    k: usize,
) -> Result<SubspaceEstimate> {
    let dim = atoms.nrows();
    let n_atoms = atoms.ncols();
    if z_r.len() != dim {
        return Err(Error::ShapeMismatch(format!(
            "snapshot length {} does not match atom dimension {dim}",
            z_r.len()
        )));
    }
    if z_r.norm() == 0.0 {
        return Err(Error::EmptyInput("subspace pursuit needs a nonzero snapshot"));
    }
    if k > dim.min(n_atoms) {
        return Err(Error::InvalidConfiguration(format!(
            "k = {k} exceeds min(dimension {dim}, atoms {n_atoms})"
        )));
    }
    if let Some(w) = selection_weights {
        if w.len() != n_atoms {
            return Err(Error::ShapeMismatch(format!(
                "{} selection weights for {n_atoms} atoms",
                w.len()
            )));
        }
    }

    let mut residual = z_r.clone();
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(k);
    let mut indices = Vec::with_capacity(k);
    let mut residual_norms = Vec::with_capacity(k);
    let mut excluded = vec![false; n_atoms];
    let mut n_excluded = 0usize;

    while basis.len() < k && n_excluded < n_atoms {
        // selection: argmax of the weighted correlation, lowest index wins ties
        let mut best = usize::MAX;
        let mut best_corr = -1.0;
        for j in 0..n_atoms {
            if excluded[j] {
                continue;
            }
            let mut ip = Complex64::default();
            for r in 0..dim {
                ip += atoms[(r, j)].conj() * residual[r];
            }
            let corr = ip.norm() * selection_weights.map_or(1.0, |w| w[j]);
            if corr > best_corr {
                best_corr = corr;
                best = j;
            }
        }
        if best == usize::MAX {
            break;
        }
        excluded[best] = true;
        n_excluded += 1;

        let mut v = atoms.column(best).into_owned();
        // Gram-Schmidt with one re-orthogonalization pass
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&v);
                v.axpy(-coef, b, Complex64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm < GS_EPS {
            // numerically in the current span: drop the atom, keep iterating
            continue;
        }
        v /= Complex64::new(norm, 0.0);
        let coef = v.dotc(&residual);
        residual.axpy(-coef, &v, Complex64::new(1.0, 0.0));
        basis.push(v);
        indices.push(best);
        residual_norms.push(residual.norm());
    }

    let mut basis_mat = DMatrix::from_element(dim, basis.len(), Complex64::default());
    for (c, v) in basis.iter().enumerate() {
        basis_mat.set_column(c, v);
    }
    Ok(SubspaceEstimate {
        basis: basis_mat,
        indices,
        residual_norms,
    })
}

/// Pursuit over a knowledge-aided dictionary: correlations are taken
/// against the raw (unnormalized) steering atoms.
pub fn omp_subspace_dictionary(
    z_r: &DVector<Complex64>,
    dict: &Dictionary,
    k: usize,
) -> Result<SubspaceEstimate> {
    omp_subspace(z_r, &dict.atoms, Some(&dict.raw_norms), k)
}

/// Filter weight with a degeneracy flag.
#[derive(Debug, Clone)]
pub struct FilterWeight {
    pub w: DVector<Complex64>,
    /// Target steering numerically inside the estimated clutter subspace.
    pub degenerate: bool,
}

/// Project the target steering onto the orthogonal complement of the
/// estimated clutter subspace: `w = (I - V V^H) v`.
pub fn filter_weight(basis: &DMatrix<Complex64>, target_steering: &DVector<Complex64>) -> FilterWeight {
    let mut w = target_steering.clone();
    for c in 0..basis.ncols() {
        let b = basis.column(c);
        let coef = b.dotc(&w);
        w.axpy(-coef, &b.into_owned(), Complex64::new(1.0, 0.0));
    }
    let degenerate = w.norm() < DEGENERATE_EPS * target_steering.norm();
    FilterWeight { w, degenerate }
}

/// Output SINR in dB: `|alpha|^2 |w^H v|^2 / (w^H R w)`. A non-positive
/// denominator yields negative infinity.
pub fn output_sinr(
    w: &DVector<Complex64>,
    target_steering: &DVector<Complex64>,
    alpha: Complex64,
    r_metric: &DMatrix<Complex64>,
) -> f64 {
    let gain = w.dotc(target_steering).norm_sqr();
    let num = alpha.norm_sqr() * gain;
    let den = (w.adjoint() * r_metric * w)[(0, 0)].re;
    if den <= 0.0 || !den.is_finite() {
        return f64::NEG_INFINITY;
    }
    10.0 * (num / den).log10()
}

/// Solve `R x = v` by Cholesky, adding `1e-10 trace/dim` diagonal loading
/// when the factorization fails; the flag reports whether loading was
/// applied.
pub fn solve_pd(r: &DMatrix<Complex64>, v: &DVector<Complex64>) -> (DVector<Complex64>, bool) {
    if let Some(chol) = Cholesky::new(r.clone()) {
        return (chol.solve(v), false);
    }
    let dim = r.nrows();
    let trace: f64 = (0..dim).map(|i| r[(i, i)].re).sum();
    let load = Complex64::new(1e-10 * trace / dim as f64, 0.0);
    let mut loaded = r.clone();
    for i in 0..dim {
        loaded[(i, i)] += load;
    }
    let chol = Cholesky::new(loaded).expect("diagonally loaded covariance is positive definite");
    (chol.solve(v), true)
}

/// Count of eigenvalues above `noise_floor * (1 + eps)`.
pub fn numerical_clutter_rank(r: &DMatrix<Complex64>, noise_floor: f64, eps: f64) -> usize {
    let eig = SymmetricEigen::new(r.clone());
    eig.eigenvalues
        .iter()
        .filter(|&&v| v > noise_floor * (1.0 + eps))
        .count()
}

/// Principal-components weight from a covariance estimate: project the
/// target steering off the `k` dominant eigenvectors.
pub fn pc_weight(r_hat: &DMatrix<Complex64>, target_steering: &DVector<Complex64>, k: usize) -> FilterWeight {
    let eig = SymmetricEigen::new(r_hat.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let k = k.min(order.len());
    let mut basis = DMatrix::from_element(r_hat.nrows(), k, Complex64::default());
    for (c, &i) in order.iter().take(k).enumerate() {
        basis.set_column(c, &eig.eigenvectors.column(i).into_owned());
    }
    filter_weight(&basis, target_steering)
}

/// SINR evaluation covariances for one `(scenario, reduction)` pair: the
/// element-space covariance, the full virtual-domain covariance, and its
/// image under `G`.
#[derive(Debug, Clone)]
pub struct SinrMetrics {
    pub r_element: DMatrix<Complex64>,
    pub r_virtual: DMatrix<Complex64>,
    pub r_rd: DMatrix<Complex64>,
}

impl SinrMetrics {
    pub fn build(scenario: &RadarScenario, rd: &RdMaps) -> Self {
        let r_element = signal::true_covariance(scenario);
        let r_virtual = virtual_covariance(scenario, rd.maps());
        let g = rd.g();
        let r_rd_raw = g * &r_virtual * g.adjoint();
        // symmetrize away the matmul roundoff
        let mut r_rd = r_rd_raw.clone();
        for i in 0..r_rd.nrows() {
            for j in 0..r_rd.ncols() {
                r_rd[(i, j)] = (r_rd_raw[(i, j)] + r_rd_raw[(j, i)].conj()) * 0.5;
            }
        }
        Self {
            r_element,
            r_virtual,
            r_rd,
        }
    }

    /// Rebuild only the RD metric for a different reduction of the same
    /// scenario.
    pub fn with_rd(&self, rd: &RdMaps) -> Self {
        let g = rd.g();
        let raw = g * &self.r_virtual * g.adjoint();
        let mut r_rd = raw.clone();
        for i in 0..r_rd.nrows() {
            for j in 0..r_rd.ncols() {
                r_rd[(i, j)] = (raw[(i, j)] + raw[(j, i)].conj()) * 0.5;
            }
        }
        Self {
            r_element: self.r_element.clone(),
            r_virtual: self.r_virtual.clone(),
            r_rd,
        }
    }
}

/// One clairvoyant reference filter with its SINR.
#[derive(Debug, Clone)]
pub struct ReferenceFilter {
    pub w: DVector<Complex64>,
    pub sinr_db: f64,
    /// Diagonal loading was needed for the solve.
    pub loaded: bool,
}

/// The three known-covariance references: the element-space optimum, the
/// virtual-domain optimum, and the full pipeline run on the true
/// covariance.
#[derive(Debug, Clone)]
pub struct ClairvoyantFilters {
    pub element_opt: ReferenceFilter,
    pub cpa_v_opt: ReferenceFilter,
    pub proposed_opt: ReferenceFilter,
    pub proposed_weight: FilterWeight,
}

/// Evaluate the clairvoyant filters at the scenario target.
pub fn clairvoyant_filters(
    scenario: &RadarScenario,
    rd: &RdMaps,
    dict: &Dictionary,
    k: usize,
    metrics: &SinrMetrics,
) -> Result<ClairvoyantFilters> {
    let alpha = scenario.target.amplitude;
    let (dop, sf) = (scenario.target.doppler, scenario.target.spatial_freq);

    let v_el = space_time_steering(dop, sf, &scenario.geom, scenario.m_pulses);
    let (w_el, loaded_el) = solve_pd(&metrics.r_element, &v_el);
    let sinr_el = output_sinr(&w_el, &v_el, alpha, &metrics.r_element);

    let v_v = rd.maps().virtual_steering(dop, sf);
    let (w_v, loaded_v) = solve_pd(&metrics.r_virtual, &v_v);
    let sinr_v = output_sinr(&w_v, &v_v, alpha, &metrics.r_virtual);

    let z_r = rd.apply_d(&metrics.r_element)?;
    let sub = omp_subspace_dictionary(&z_r, dict, k)?;
    let v_rd = rd.rd_virtual_steering(dop, sf);
    let fw = filter_weight(&sub.basis, &v_rd);
    let sinr_p = output_sinr(&fw.w, &v_rd, alpha, &metrics.r_rd);

    Ok(ClairvoyantFilters {
        element_opt: ReferenceFilter {
            w: w_el,
            sinr_db: sinr_el,
            loaded: loaded_el,
        },
        cpa_v_opt: ReferenceFilter {
            w: w_v,
            sinr_db: sinr_v,
            loaded: loaded_v,
        },
        proposed_opt: ReferenceFilter {
            w: fw.w.clone(),
            sinr_db: sinr_p,
            loaded: false,
        },
        proposed_weight: fw,
    })
}
