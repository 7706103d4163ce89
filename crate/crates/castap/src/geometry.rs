//! Coprime array geometry, difference coarray, and the structural
//! transformation matrices linking an element-space covariance to the
//! virtual-domain snapshot.
//!
//! Sensor positions are kept as integers in units of the element spacing
//! `d0`, pulse times as integers in units of the PRI, so all coarray lag
//! arithmetic is exact.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Greatest common divisor of two positive integers.
fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Linear sensor array with positions in units of `d0`.
#[derive(Debug, Clone)]
pub struct ArrayGeometry {
    positions: Vec<i64>,
    d0: f64,
    coprime: Option<(u32, u32)>,
}

impl ArrayGeometry {
    /// Prototype coprime array: one subarray of `2*n1` sensors at spacing
    /// `n2*d0` merged with one of `n2` sensors at spacing `n1*d0`, sharing
    /// the sensor at the origin. Yields `N = 2*n1 + n2 - 1` sensors.
    pub fn coprime(n1: u32, n2: u32, d0: f64) -> Result<Self> {
        if n1 < 2 || n2 <= n1 {
            return Err(Error::InvalidConfiguration(format!(
                "coprime pair must satisfy 2 <= n1 < n2, got ({n1}, {n2})"
            )));
        }
        if gcd(n1, n2) != 1 {
            return Err(Error::InvalidConfiguration(format!(
                "({n1}, {n2}) are not coprime"
            )));
        }
        let mut positions: Vec<i64> = (0..2 * n1)
            .map(|i| (i * n2) as i64)
            .chain((0..n2).map(|j| (j * n1) as i64))
            .collect();
        positions.sort_unstable();
        positions.dedup();
        debug_assert_eq!(positions.len(), (2 * n1 + n2 - 1) as usize);
        Ok(Self {
            positions,
            d0,
            coprime: Some((n1, n2)),
        })
    }

    /// Uniform linear array with `n` sensors at unit spacing.
    pub fn ula(n: usize, d0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfiguration("ULA needs n >= 1".into()));
        }
        Ok(Self {
            positions: (0..n as i64).collect(),
            d0,
            coprime: None,
        })
    }

    /// Sensor positions in units of `d0`, sorted ascending, first = 0.
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Number of sensors.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Element unit spacing in meters.
    pub fn d0(&self) -> f64 {
        self.d0
    }

    /// The coprime pair, when the array was built as one.
    pub fn coprime_pair(&self) -> Option<(u32, u32)> {
        self.coprime
    }
}

/// Difference coarray of an array: the sorted distinct pairwise lags and
/// the number of sensor pairs contributing to each lag.
#[derive(Debug, Clone)]
pub struct Coarray {
    lags: Vec<i64>,
    weights: Vec<usize>,
}

impl Coarray {
    /// Brute-force pair enumeration over all `N^2` ordered sensor pairs.
    pub fn from_positions(positions: &[i64]) -> Self {
        let mut lags: Vec<i64> = positions
            .iter()
            .flat_map(|&di| positions.iter().map(move |&dj| di - dj))
            .collect();
        lags.sort_unstable();
        lags.dedup();
        let weights = lags
            .iter()
            .map(|&l| {
                positions
                    .iter()
                    .flat_map(|&di| positions.iter().map(move |&dj| di - dj))
                    .filter(|&d| d == l)
                    .count()
            })
            .collect();
        Self { lags, weights }
    }

    /// Distinct lags, sorted ascending (symmetric about zero).
    pub fn lags(&self) -> &[i64] {
        &self.lags
    }

    /// Pair count for the lag at index `k`.
    pub fn weight(&self, k: usize) -> usize {
        self.weights[k]
    }

    /// Number of distinct lags.
    pub fn n_v(&self) -> usize {
        self.lags.len()
    }

    /// Index of a lag in the sorted lag list.
    pub fn lag_index(&self, lag: i64) -> Option<usize> {
        self.lags.binary_search(&lag).ok()
    }
}

/// Row-stochastic lag-averaging matrix: maps `vec(A)` of an `n_src x n_src`
/// matrix to one averaged entry per distinct lag. Instantiated as the
/// spatial matrix `P` (sensor positions) and the temporal matrix `T`
/// (pulse indices).
#[derive(Debug, Clone)]
pub struct SelectionMatrix {
    n_src: usize,
    /// Per lag row: flattened column indices `i + j*n_src` of the pairs
    /// with `src[i] - src[j] = lag`, using column-major `vec`.
    rows: Vec<Vec<usize>>,
}

impl SelectionMatrix {
    pub fn from_sources(sources: &[i64]) -> Self {
        let coarray = Coarray::from_positions(sources);
        let n = sources.len();
        let mut rows = vec![Vec::new(); coarray.n_v()];
        for (j, &dj) in sources.iter().enumerate() {
            for (i, &di) in sources.iter().enumerate() {
                let k = coarray.lag_index(di - dj).expect("lag from same sources");
                rows[k].push(i + j * n);
            }
        }
        Self { n_src: n, rows }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_src * self.n_src
    }

    /// Pairs `(i, j)` contributing to lag row `k`.
    pub fn pairs(&self, k: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows[k].iter().map(move |&l| (l % self.n_src, l / self.n_src))
    }

    /// Row weight `omega(lag_k)`.
    pub fn weight(&self, k: usize) -> usize {
        self.rows[k].len()
    }

    /// Apply to the column-major vectorization of `a` (one averaged entry
    /// per lag).
    pub fn apply_to_matrix(&self, a: &DMatrix<Complex64>) -> DVector<Complex64> {
        debug_assert_eq!(a.nrows(), self.n_src);
        debug_assert_eq!(a.ncols(), self.n_src);
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|cols| {
                let sum: Complex64 = cols
                    .iter()
                    .map(|&l| a[(l % self.n_src, l / self.n_src)])
                    .sum();
                sum / cols.len() as f64
            }),
        )
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_cols());
        for (k, cols) in self.rows.iter().enumerate() {
            let w = 1.0 / cols.len() as f64;
            for &l in cols {
                m[(k, l)] = w;
            }
        }
        m
    }
}

/// Kronecker-reordering permutation: maps the column-major vectorization
/// of an `NM x NM` space-time covariance (pulse-major element order) to
/// the `(pulse-pair, sensor-pair)` ordering consumed by `T (x) P`.
///
/// Stored as an index vector; row `i` of the permutation matrix has its
/// single 1 at column `perm[i]`.
#[derive(Debug, Clone)]
pub struct PermutationJ {
    n: usize,
    m: usize,
    perm: Vec<usize>,
}

impl PermutationJ {
    pub fn new(n: usize, m: usize) -> Self {
        let size = n * n * m * m;
        let n2m = n * n * m;
        let n2 = n * n;
        let perm = (0..size)
            .map(|r| {
                // 1-based index arithmetic translated once to 0-based:
                // row r decomposes over radices (M, M, N, N).
                let k4 = r / n2m;
                let rem = r % n2m;
                let k3 = rem / n2;
                let k2 = (rem % n2) / n;
                let k1 = r % n;
                k4 * n2m + k2 * n * m + k3 * n + k1
            })
            .collect();
        Self { n, m, perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Column holding the 1 in row `i`.
    pub fn column_of_row(&self, i: usize) -> usize {
        self.perm[i]
    }

    /// `y = J x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.perm.iter().map(|&c| x[c]).collect()
    }

    /// `y = J^T x`.
    pub fn apply_transpose(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); x.len()];
        for (r, &c) in self.perm.iter().enumerate() {
            y[c] = x[r];
        }
        y
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }
}

/// Sparse representation of `F = (T (x) P) J`: every column has exactly one
/// nonzero because each column of `P` and of `T` does.
#[derive(Debug, Clone)]
pub struct VirtualMapF {
    rows: usize,
    cols: usize,
    /// For column `perm[l]` of F: the target row and value, indexed by the
    /// `(T (x) P)` column `l`.
    tp_col_row: Vec<u32>,
    tp_col_val: Vec<f64>,
    perm: Vec<usize>,
    e0_index: usize,
}

impl VirtualMapF {
    fn build(t: &SelectionMatrix, p: &SelectionMatrix, j: &PermutationJ, e0_index: usize) -> Self {
        let n2 = p.n_cols();
        let m2 = t.n_cols();
        let n_v = p.n_rows();
        // invert the column -> row maps of T and P (single nonzero per column)
        let mut t_row = vec![(0u32, 0.0f64); m2];
        for k in 0..t.n_rows() {
            let w = 1.0 / t.weight(k) as f64;
            for (i, jj) in t.pairs(k) {
                t_row[i + jj * t.n_src] = (k as u32, w);
            }
        }
        let mut p_row = vec![(0u32, 0.0f64); n2];
        for k in 0..p.n_rows() {
            let w = 1.0 / p.weight(k) as f64;
            for (i, jj) in p.pairs(k) {
                p_row[i + jj * p.n_src] = (k as u32, w);
            }
        }
        let mut tp_col_row = Vec::with_capacity(n2 * m2);
        let mut tp_col_val = Vec::with_capacity(n2 * m2);
        for l in 0..n2 * m2 {
            let (tr, tv) = t_row[l / n2];
            let (pr, pv) = p_row[l % n2];
            tp_col_row.push(tr * n_v as u32 + pr);
            tp_col_val.push(tv * pv);
        }
        Self {
            rows: t.n_rows() * n_v,
            cols: n2 * m2,
            tp_col_row,
            tp_col_val,
            perm: j.perm.clone(),
            e0_index,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// Row index of the joint zero-lag entry (the single nonzero of `e0`).
    pub fn e0_index(&self) -> usize {
        self.e0_index
    }

    /// `z = F x` for `x` of length `N^2 M^2`.
    pub fn apply(&self, x: &[Complex64]) -> Result<DVector<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "F expects a vector of length {}, got {}",
                self.cols,
                x.len()
            )));
        }
        let mut z = DVector::from_element(self.rows, Complex64::default());
        for l in 0..self.cols {
            z[self.tp_col_row[l] as usize] += self.tp_col_val[l] * x[self.perm[l]];
        }
        Ok(z)
    }

    /// `F` applied to the column-major vectorization of an `NM x NM` matrix.
    pub fn apply_to_covariance(&self, r: &DMatrix<Complex64>) -> Result<DVector<Complex64>> {
        if r.nrows() * r.ncols() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "F expects an {0}-entry covariance vectorization, got {1}x{2}",
                self.cols,
                r.nrows(),
                r.ncols()
            )));
        }
        self.apply(r.as_slice())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for l in 0..self.cols {
            m[(self.tp_col_row[l] as usize, self.perm[l])] = self.tp_col_val[l];
        }
        m
    }

    /// `F F^H`, dense. Used to form the pseudo-inverse of `F`.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.rows, self.rows);
        for l in 0..self.cols {
            let r = self.tp_col_row[l] as usize;
            g[(r, r)] += self.tp_col_val[l] * self.tp_col_val[l];
        }
        g
    }

    /// `Y = A F^H` for complex `A` with `N^2 M^2` columns.
    pub fn right_mul_adjoint(&self, a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if a.ncols() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "A F^H needs A with {} columns, got {}",
                self.cols,
                a.ncols()
            )));
        }
        let mut y = DMatrix::from_element(a.nrows(), self.rows, Complex64::default());
        for l in 0..self.cols {
            let r = self.tp_col_row[l] as usize;
            let v = self.tp_col_val[l];
            let c = self.perm[l];
            for i in 0..a.nrows() {
                y[(i, r)] += a[(i, c)] * v;
            }
        }
        Ok(y)
    }
}

/// All structural maps for one `(geometry, pulse count)` pair.
#[derive(Debug, Clone)]
pub struct VirtualMaps {
    geom: ArrayGeometry,
    m_pulses: usize,
    coarray: Coarray,
    p: SelectionMatrix,
    t: SelectionMatrix,
    j: PermutationJ,
    f: VirtualMapF,
    temporal_lags: Vec<i64>,
}

impl VirtualMaps {
    pub fn build(geom: ArrayGeometry, m_pulses: usize) -> Result<Self> {
        if m_pulses == 0 {
            return Err(Error::InvalidConfiguration("m_pulses must be >= 1".into()));
        }
        let coarray = Coarray::from_positions(geom.positions());
        let p = SelectionMatrix::from_sources(geom.positions());
        let pulses: Vec<i64> = (0..m_pulses as i64).collect();
        let t = SelectionMatrix::from_sources(&pulses);
        let j = PermutationJ::new(geom.len(), m_pulses);
        let temporal_lags: Vec<i64> = (-(m_pulses as i64 - 1)..m_pulses as i64).collect();
        // joint zero-lag row: temporal lag 0 is at index M-1, spatial lag 0
        // at its coarray position
        let ks0 = coarray.lag_index(0).expect("zero lag always present");
        let e0 = (m_pulses - 1) * coarray.n_v() + ks0;
        let f = VirtualMapF::build(&t, &p, &j, e0);
        Ok(Self {
            geom,
            m_pulses,
            coarray,
            p,
            t,
            j,
            f,
            temporal_lags,
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn m_pulses(&self) -> usize {
        self.m_pulses
    }

    pub fn coarray(&self) -> &Coarray {
        &self.coarray
    }

    pub fn p(&self) -> &SelectionMatrix {
        &self.p
    }

    pub fn t(&self) -> &SelectionMatrix {
        &self.t
    }

    pub fn j(&self) -> &PermutationJ {
        &self.j
    }

    pub fn f(&self) -> &VirtualMapF {
        &self.f
    }

    /// Virtual pulse lags `-(M-1)..=(M-1)` in units of the PRI.
    pub fn temporal_lags(&self) -> &[i64] {
        &self.temporal_lags
    }

    pub fn n_v(&self) -> usize {
        self.coarray.n_v()
    }

    pub fn m_v(&self) -> usize {
        self.temporal_lags.len()
    }

    /// Spatial coarray steering: entries `exp(j 2 pi n_k theta)` over the
    /// sorted lags.
    pub fn coarray_steering(&self, spatial_freq: f64) -> DVector<Complex64> {
        DVector::from_iterator(
            self.n_v(),
            self.coarray.lags().iter().map(|&n| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 * spatial_freq)
            }),
        )
    }

    /// Full-dimension virtual space-time steering `b_v (x) a_v` on the
    /// `(temporal lag, spatial lag)` grid; equals `F (v* (x) v)`.
    pub fn virtual_steering(&self, doppler: f64, spatial_freq: f64) -> DVector<Complex64> {
        let a = self.coarray_steering(spatial_freq);
        let n_v = self.n_v();
        let mut v = DVector::from_element(n_v * self.m_v(), Complex64::default());
        for (kt, &mlag) in self.temporal_lags.iter().enumerate() {
            let b = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * mlag as f64 * doppler);
            for ks in 0..n_v {
                v[kt * n_v + ks] = b * a[ks];
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kron(a: &DVector<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::from_element(a.len() * b.len(), Complex64::default());
        for i in 0..a.len() {
            for j in 0..b.len() {
                out[i * b.len() + j] = a[i] * b[j];
            }
        }
        out
    }

    fn random_unit_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
        DVector::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn coprime_2_3_positions() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        assert_eq!(g.positions(), &[0, 2, 3, 4, 6, 9]);
        assert_eq!(g.len(), 6);
    }

    #[test]
    fn coprime_3_5_has_ten_sensors() {
        let g = ArrayGeometry::coprime(3, 5, 0.0625).unwrap();
        assert_eq!(g.len(), 10);
    }

    #[test]
    fn non_coprime_rejected() {
        assert!(matches!(
            ArrayGeometry::coprime(2, 4, 0.0625),
            Err(Error::InvalidConfiguration(_))
        ));
        assert!(ArrayGeometry::coprime(3, 2, 0.0625).is_err());
    }

    #[test]
    fn coarray_2_3_lags_and_holes() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let ca = Coarray::from_positions(g.positions());
        let expected: Vec<i64> = vec![-9, -7, -6, -5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 9];
        assert_eq!(ca.lags(), expected.as_slice());
        assert_eq!(ca.n_v(), 17);
        assert!(ca.lag_index(8).is_none(), "hole at +8");
    }

    #[test]
    fn coarray_weights() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let ca = Coarray::from_positions(g.positions());
        let k0 = ca.lag_index(0).unwrap();
        assert_eq!(ca.weight(k0), 6);
        // pairs (3,2) and (4,3)
        let k1 = ca.lag_index(1).unwrap();
        assert_eq!(ca.weight(k1), 2);
        let total: usize = (0..ca.n_v()).map(|k| ca.weight(k)).sum();
        assert_eq!(total, 36);
        for (i, &l) in ca.lags().iter().enumerate() {
            let j = ca.lag_index(-l).expect("symmetric");
            assert_eq!(ca.weight(i), ca.weight(j));
        }
    }

    #[test]
    fn p_row_for_zero_lag() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let p = SelectionMatrix::from_sources(g.positions());
        let ca = Coarray::from_positions(g.positions());
        let k0 = ca.lag_index(0).unwrap();
        let dense = p.to_dense();
        for i in 0..6 {
            assert_relative_eq!(dense[(k0, i + i * 6)], 1.0 / 6.0);
        }
        assert_relative_eq!(dense.row(k0).sum(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn p_and_t_rows_are_stochastic() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let p = SelectionMatrix::from_sources(g.positions());
        for k in 0..p.n_rows() {
            let s: f64 = p.to_dense().row(k).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-14);
        }
        let pulses: Vec<i64> = (0..18).collect();
        let t = SelectionMatrix::from_sources(&pulses);
        assert_eq!(t.n_rows(), 35);
        for k in 0..t.n_rows() {
            let s: f64 = t.to_dense().row(k).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn t_single_pulse() {
        let t = SelectionMatrix::from_sources(&[0]);
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.n_cols(), 1);
        assert_relative_eq!(t.to_dense()[(0, 0)], 1.0);
    }

    #[test]
    fn p_maps_outer_product_to_coarray_phasors() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let p = SelectionMatrix::from_sources(g.positions());
        let ca = Coarray::from_positions(g.positions());
        let theta = 0.1375;
        let a = DVector::from_iterator(
            6,
            g.positions().iter().map(|&d| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * d as f64 * theta)
            }),
        );
        let outer = &a * a.adjoint();
        let z = p.apply_to_matrix(&outer);
        for (k, &lag) in ca.lags().iter().enumerate() {
            let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * lag as f64 * theta);
            assert_relative_eq!(z[k].re, expect.re, epsilon = 1e-12);
            assert_relative_eq!(z[k].im, expect.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn j_first_row_is_identity_entry() {
        for (n, m) in [(2usize, 2usize), (3, 4), (6, 18)] {
            let j = PermutationJ::new(n, m);
            assert_eq!(j.column_of_row(0), 0);
        }
    }

    #[test]
    fn j_round_trip_is_identity() {
        let j = PermutationJ::new(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_unit_vec(j.len(), &mut rng);
        let y = j.apply(x.as_slice());
        let back = j.apply_transpose(&y);
        for i in 0..x.len() {
            assert_relative_eq!(back[i].re, x[i].re);
            assert_relative_eq!(back[i].im, x[i].im);
        }
    }

    #[test]
    fn j_is_permutation() {
        let j = PermutationJ::new(3, 2);
        let mut seen = vec![false; j.len()];
        for r in 0..j.len() {
            let col = j.column_of_row(r);
            assert!(!seen[col]);
            seen[col] = true;
        }
        assert!(seen.into_iter().all(|s| s));
    }

    /// Kronecker-reordering identity: J [(b* (x) a*) (x) (b (x) a)]
    /// = (b* (x) b) (x) (a* (x) a).
    #[test]
    fn j_kronecker_identity_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &(n, m) in &[(2usize, 2usize), (2, 3), (3, 2), (3, 3), (4, 3), (3, 4), (4, 4)] {
            let j = PermutationJ::new(n, m);
            for _ in 0..50 {
                let a = random_unit_vec(n, &mut rng);
                let b = random_unit_vec(m, &mut rng);
                let ac = a.map(|v| v.conj());
                let bc = b.map(|v| v.conj());
                let x = kron(&kron(&bc, &ac), &kron(&b, &a));
                let lhs = j.apply(x.as_slice());
                let rhs = kron(&kron(&bc, &b), &kron(&ac, &a));
                for i in 0..lhs.len() {
                    assert_relative_eq!(lhs[i].re, rhs[i].re, epsilon = 1e-12, max_relative = 1e-12);
                    assert_relative_eq!(lhs[i].im, rhs[i].im, epsilon = 1e-12, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn f_dimensions_default_scale() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let maps = VirtualMaps::build(g, 18).unwrap();
        assert_eq!(maps.f().nrows(), 595);
        assert_eq!(maps.f().ncols(), 11664);
        assert_eq!(maps.n_v(), 17);
        assert_eq!(maps.m_v(), 35);
    }

    #[test]
    fn f_maps_identity_covariance_to_e0() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let maps = VirtualMaps::build(g, 4).unwrap();
        let nm = 6 * 4;
        let sigma2 = 2.5;
        let r = DMatrix::from_diagonal_element(nm, nm, c(sigma2, 0.0));
        let z = maps.f().apply_to_covariance(&r).unwrap();
        for i in 0..z.len() {
            let expect = if i == maps.f().e0_index() { sigma2 } else { 0.0 };
            assert_relative_eq!(z[i].re, expect, epsilon = 1e-12);
            assert_relative_eq!(z[i].im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn f_maps_steering_kron_to_virtual_steering() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let maps = VirtualMaps::build(g.clone(), 5).unwrap();
        let (doppler, theta) = (0.2133, -0.0871);
        let b = DVector::from_fn(5, |k, _| {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * doppler)
        });
        let a = DVector::from_iterator(
            6,
            g.positions().iter().map(|&d| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * d as f64 * theta)
            }),
        );
        let v = kron(&b, &a);
        let vkron = kron(&v.map(|x| x.conj()), &v);
        let z = maps.f().apply(vkron.as_slice()).unwrap();
        let expect = maps.virtual_steering(doppler, theta);
        for i in 0..z.len() {
            assert_relative_eq!(z[i].re, expect[i].re, epsilon = 1e-11);
            assert_relative_eq!(z[i].im, expect[i].im, epsilon = 1e-11);
        }
    }

    #[test]
    fn f_on_outer_product_equals_f_on_kron() {
        // vec(v v^H) = v* (x) v under column-major vec
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let maps = VirtualMaps::build(g, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = random_unit_vec(18, &mut rng);
        let outer = &v * v.adjoint();
        let z1 = maps.f().apply_to_covariance(&outer).unwrap();
        let z2 = maps.f().apply(kron(&v.map(|x| x.conj()), &v).as_slice()).unwrap();
        for i in 0..z1.len() {
            assert_relative_eq!(z1[i].re, z2[i].re, epsilon = 1e-12);
            assert_relative_eq!(z1[i].im, z2[i].im, epsilon = 1e-12);
        }
    }

    #[test]
    fn f_gram_is_diagonal_with_inverse_weights() {
        let g = ArrayGeometry::coprime(2, 3, 0.0625).unwrap();
        let maps = VirtualMaps::build(g, 3).unwrap();
        let gram = maps.f().gram();
        let dense = maps.f().to_dense();
        let brute = &dense * dense.transpose();
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                assert_relative_eq!(gram[(i, j)], brute[(i, j)], epsilon = 1e-13);
            }
        }
        for i in 0..gram.nrows() {
            assert!(gram[(i, i)] > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Coarray structure holds for arbitrary valid coprime pairs.
        #[test]
        fn prop_coarray_weights_sum_to_n_squared(n1 in 2u32..5, k in 1u32..4) {
            let n2 = n1 + k;
            prop_assume!(gcd(n1, n2) == 1);
            let g = ArrayGeometry::coprime(n1, n2, 0.0625).unwrap();
            let ca = Coarray::from_positions(g.positions());
            let total: usize = (0..ca.n_v()).map(|k| ca.weight(k)).sum();
            prop_assert_eq!(total, g.len() * g.len());
            let k0 = ca.lag_index(0).unwrap();
            prop_assert_eq!(ca.weight(k0), g.len());
            for (i, &l) in ca.lags().iter().enumerate() {
                let j = ca.lag_index(-l).unwrap();
                prop_assert_eq!(ca.weight(i), ca.weight(j));
            }
        }
    }
}
