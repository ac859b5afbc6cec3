//! Multi-frequency imaging functional built from the singular vectors of the
//! MSR matrices.
//!
//! For a search point `x`, with `W(x; ω)` the unit-normalized steering vector,
//!
//! ```text
//! E(x) = Σ_k Σ_{l ≤ L̂_k} ω_k (conj(W)·U_l) (conj(W)·conj(V_l))
//! ```
//!
//! For a single point scatterer and many directions `|E|` behaves like
//! `Σ_k ω_k J0(ω_k |x − z|)²`, whose continuum limit is [`psf_closed_form`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{Convention, MsrMatrix};
use crate::scene::{DirectionSet, ImagingGrid, Point2};
use crate::specfun::{bessel_j0, bessel_j1};

/// Singular triplets of one MSR matrix, `M = Σ_l σ_l U_l V_lᴴ`, with
/// singular values in descending order. `U_l` and `V_l` are the columns of
/// `left` and `right`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    pub left: DMatrix<Complex64>,
    pub right: DMatrix<Complex64>,
}

impl SvdResult {
    pub fn dim(&self) -> usize {
        self.singular_values.len()
    }

    /// `Σ_l U_l σ_l V_lᴴ` over all triplets.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.singular_values.iter().map(|&s| Complex64::new(s, 0.0)),
        ));
        &self.left * sigma * self.right.adjoint()
    }
}

/// Full SVD of a square complex matrix.
pub fn svd(m: &MsrMatrix) -> Result<SvdResult> {
    let n = m.dim();
    if m.entries.ncols() != n {
        return Err(Error::invalid("MSR matrix must be square"));
    }
    if n == 0 {
        return Err(Error::invalid("MSR matrix must be nonempty"));
    }
    if m.entries
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Numeric("MSR matrix has non-finite entries".into()));
    }
    let a = faer::Mat::<Complex64>::from_fn(n, n, |i, j| m.entries[(i, j)]);
    let dec = a.svd().map_err(|e| {
        Error::Numeric(format!(
            "SVD did not converge at omega = {}: {e:?}",
            m.omega
        ))
    })?;
    let (u, v) = (dec.U(), dec.V());
    let sv = dec.S().column_vector();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv[b].re.total_cmp(&sv[a].re).then(a.cmp(&b)));
    let singular_values = order.iter().map(|&i| sv[i].re.max(0.0)).collect();
    let left = DMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    let right = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SvdResult {
        singular_values,
        left,
        right,
    })
}

/// Signal-subspace dimension: the largest `L` with `σ_L ≥ tau σ_1`
/// (zero for the zero matrix).
pub fn select_rank(s: &SvdResult, tau: f64) -> usize {
    let Some(&top) = s.singular_values.first() else {
        return 0;
    };
    if top <= 0.0 {
        return 0;
    }
    s.singular_values
        .iter()
        .take_while(|&&sv| sv >= tau * top)
        .count()
}

/// Checks `0 < tau < 1`.
pub fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "rank threshold tau = {tau} must lie in (0, 1)"
        )))
    }
}

/// Unit steering vector `W(x; ω) = D/√N`, `D_s = exp(iω θ_s·x)`.
pub fn steering(x: Point2, omega: f64, dirs: &DirectionSet) -> DVector<Complex64> {
    let scale = 1.0 / (dirs.len() as f64).sqrt();
    DVector::from_iterator(
        dirs.len(),
        dirs.as_slice()
            .iter()
            .map(|d| Complex64::from_polar(scale, omega * d.dot(x))),
    )
}

/// One frequency's contribution to the imaging functional.
#[derive(Debug, Clone)]
pub struct FrequencyTerm {
    pub omega: f64,
    pub svd: SvdResult,
    pub rank: usize,
}

impl FrequencyTerm {
    fn value_at(&self, w: &DVector<Complex64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..self.rank {
            let u = self.svd.left.column(l);
            let v = self.svd.right.column(l);
            let mut wu = Complex64::new(0.0, 0.0);
            let mut wv = Complex64::new(0.0, 0.0);
            for s in 0..w.len() {
                wu += w[s].conj() * u[s];
                wv += w[s] * v[s];
            }
            // conj(W)·conj(V) = conj(W·V)
            acc += wu * wv.conj();
        }
        acc * self.omega
    }
}

/// `E(x)` accumulated over frequencies in the given order.
pub fn imaging_value(x: Point2, terms: &[FrequencyTerm], dirs: &DirectionSet) -> Result<Complex64> {
    let n = dirs.len();
    let mut total = Complex64::new(0.0, 0.0);
    for t in terms {
        if t.rank > n || t.svd.dim() != n {
            return Err(Error::invalid(format!(
                "frequency term of dimension {} and rank {} does not match N = {n}",
                t.svd.dim(),
                t.rank
            )));
        }
        if t.rank == 0 {
            continue;
        }
        let w = steering(x, t.omega, dirs);
        total += t.value_at(&w);
    }
    Ok(total)
}

/// Runs SVD and rank selection for each matrix.
pub fn frequency_terms(matrices: &[MsrMatrix], tau: f64) -> Result<Vec<FrequencyTerm>> {
    check_tau(tau)?;
    matrices
        .iter()
        .map(|m| {
            let s = svd(m)?;
            let rank = select_rank(&s, tau);
            Ok(FrequencyTerm {
                omega: m.omega,
                svd: s,
                rank,
            })
        })
        .collect()
}

/// Provenance of an [`ImagingMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub n: usize,
    pub k: usize,
    pub omegas: Vec<f64>,
    pub ranks: Vec<usize>,
    pub convention: Convention,
}

/// Sampled imaging functional on a grid, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingMap {
    pub grid: ImagingGrid,
    pub values: Vec<Complex64>,
    pub magnitude: Vec<f64>,
    pub metadata: MapMetadata,
}

impl ImagingMap {
    pub fn magnitude_at(&self, i: usize, j: usize) -> f64 {
        self.magnitude[j * self.grid.nx + i]
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude.iter().copied().fold(0.0, f64::max)
    }

    /// Flat index of the global maximum of `|E|` (smallest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (idx, &v) in self.magnitude.iter().enumerate() {
            if v > self.magnitude[best] {
                best = idx;
            }
        }
        best
    }

    /// Flat indices of local maxima of `|E|` over 8-neighborhoods, sorted by
    /// decreasing magnitude. Equal neighbors resolve to the smaller index.
    pub fn local_maxima(&self) -> Vec<usize> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut peaks = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                let v = self.magnitude[idx];
                let mut is_peak = true;
                'nbr: for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                            continue;
                        }
                        let nidx = jj as usize * nx + ii as usize;
                        let nv = self.magnitude[nidx];
                        if nv > v || (nv == v && nidx < idx) {
                            is_peak = false;
                            break 'nbr;
                        }
                    }
                }
                if is_peak {
                    peaks.push(idx);
                }
            }
        }
        peaks.sort_by(|&a, &b| {
            self.magnitude[b]
                .total_cmp(&self.magnitude[a])
                .then(a.cmp(&b))
        });
        peaks
    }

    /// Positions of the `count` strongest local maxima.
    pub fn top_peaks(&self, count: usize) -> Vec<Point2> {
        self.local_maxima()
            .into_iter()
            .take(count)
            .map(|idx| self.grid.point_at(idx))
            .collect()
    }

    /// Flat indices of the `fraction` largest magnitudes (at least one).
    pub fn top_fraction(&self, fraction: f64) -> Vec<usize> {
        let count = ((self.magnitude.len() as f64 * fraction).ceil() as usize)
            .clamp(1, self.magnitude.len());
        let mut idx: Vec<usize> = (0..self.magnitude.len()).collect();
        idx.sort_by(|&a, &b| {
            self.magnitude[b]
                .total_cmp(&self.magnitude[a])
                .then(a.cmp(&b))
        });
        idx.truncate(count);
        idx
    }
}

/// Evaluates `E` at every grid point. Each point is computed independently
/// with a fixed frequency/triplet order, so results are bit-reproducible
/// regardless of thread count.
pub fn evaluate_map(
    grid: &ImagingGrid,
    matrices: &[MsrMatrix],
    dirs: &DirectionSet,
    tau: f64,
) -> Result<ImagingMap> {
    grid.validate()?;
    let convention = matrices
        .first()
        .map_or(Convention::default(), |m| m.convention);
    for m in matrices {
        if m.dim() != dirs.len() {
            return Err(Error::invalid(format!(
                "MSR matrix of size {} does not match N = {}",
                m.dim(),
                dirs.len()
            )));
        }
        if m.convention != convention {
            return Err(Error::invalid("all MSR matrices must share one convention"));
        }
    }
    let terms = frequency_terms(matrices, tau)?;
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| imaging_value(grid.point_at(idx), &terms, dirs))
        .collect::<Result<_>>()?;
    let magnitude = values.iter().map(|v| v.norm()).collect();
    Ok(ImagingMap {
        grid: *grid,
        values,
        magnitude,
        metadata: MapMetadata {
            n: dirs.len(),
            k: matrices.len(),
            omegas: terms.iter().map(|t| t.omega).collect(),
            ranks: terms.iter().map(|t| t.rank).collect(),
            convention,
        },
    })
}

/// Continuum point spread function
/// `(1/4π²) [ω²/2 (J0(ωr)² + J1(ωr)²)]` evaluated between `omega1` and `omega_k`.
pub fn psf_closed_form(r: f64, omega1: f64, omega_k: f64) -> f64 {
    let g = |w: f64| {
        let (a, b) = (bessel_j0(w * r), bessel_j1(w * r));
        0.5 * w * w * (a * a + b * b)
    };
    (g(omega_k) - g(omega1)) / (4.0 * PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::assemble_msr;
    use crate::scene::{make_directions, make_frequencies, ScattererCloud};
    use crate::specfun::{circle_sum, quadrature_oracle_psf};

    fn single(z: Point2, omega: f64, n: usize, conv: Convention) -> (MsrMatrix, DirectionSet) {
        let dirs = make_directions(n).unwrap();
        let cloud = ScattererCloud::from_points(vec![z], 0.05).unwrap();
        (assemble_msr(&cloud, omega, &dirs, conv).unwrap(), dirs)
    }

    #[test]
    fn zero_matrix_svd() {
        let s = svd(&MsrMatrix::zeros(5, 1.0, Convention::Symmetric)).unwrap();
        assert!(s.singular_values.iter().all(|&v| v == 0.0));
        assert_eq!(select_rank(&s, 0.1), 0);
    }

    #[test]
    fn rank_one_spectrum() {
        let (m, _) = single(Point2::new(0.3, -0.4), 12.0, 16, Convention::Symmetric);
        let s = svd(&m).unwrap();
        let expected = 2.0 * PI / (0.025f64).ln().abs();
        assert!((s.singular_values[0] - expected).abs() < 1e-12);
        assert!(s.singular_values[1] <= 1e-10 * s.singular_values[0]);
        assert!((&s.reconstruct() - &m.entries).norm() <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn takagi_property_for_symmetric_convention() {
        let (m, _) = single(Point2::new(-0.2, 0.45), 11.0, 12, Convention::Symmetric);
        let s = svd(&m).unwrap();
        let u = s.left.column(0);
        let v = s.right.column(0);
        let vt_u: Complex64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
        assert!((vt_u.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singular_vectors_orthonormal() {
        let dirs = make_directions(12).unwrap();
        let cloud = ScattererCloud::from_points(
            vec![
                Point2::new(0.1, 0.2),
                Point2::new(-0.6, 0.3),
                Point2::new(0.5, -0.5),
            ],
            0.05,
        )
        .unwrap();
        let m = assemble_msr(&cloud, 12.0, &dirs, Convention::Paper).unwrap();
        let s = svd(&m).unwrap();
        let eye = DMatrix::<Complex64>::identity(12, 12);
        assert!((s.left.adjoint() * &s.left - &eye).norm() < 1e-10);
        assert!((s.right.adjoint() * &s.right - &eye).norm() < 1e-10);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(select_rank(&s, 0.01), 3);
    }

    #[test]
    fn two_scatterers_rank_and_threshold() {
        let dirs = make_directions(16).unwrap();
        let cloud = ScattererCloud::from_points(
            vec![Point2::new(0.13, 0.21), Point2::new(-0.37, 0.05)],
            0.05,
        )
        .unwrap();
        let m = assemble_msr(&cloud, 10.7, &dirs, Convention::Symmetric).unwrap();
        let s = svd(&m).unwrap();
        let above = s
            .singular_values
            .iter()
            .filter(|&&v| v > 1e-10 * s.singular_values[0])
            .count();
        assert_eq!(above, 2);
        assert_eq!(select_rank(&s, 0.999), 1);
    }

    #[test]
    fn tau_bounds() {
        assert!(check_tau(0.0).is_err());
        assert!(check_tau(1.0).is_err());
        assert!(check_tau(0.1).is_ok());
    }

    #[test]
    fn steering_basics() {
        let dirs = make_directions(12).unwrap();
        let w0 = steering(Point2::ORIGIN, 10.0, &dirs);
        for v in w0.iter() {
            assert!((v - Complex64::new(1.0 / 12f64.sqrt(), 0.0)).norm() < 1e-15);
        }
        let x = Point2::new(0.37, -1.2);
        let w = steering(x, 14.0, &dirs);
        let wn = steering(-x, 14.0, &dirs);
        assert!((w.norm() - 1.0).abs() < 1e-14);
        for (a, b) in w.iter().zip(wn.iter()) {
            assert!((a - b.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_rank_gives_zero() {
        let (m, dirs) = single(Point2::ORIGIN, 10.0, 8, Convention::Symmetric);
        let mut terms = frequency_terms(&[m], 0.1).unwrap();
        terms[0].rank = 0;
        assert_eq!(
            imaging_value(Point2::new(0.1, 0.0), &terms, &dirs).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn peak_value_is_sum_of_frequencies() {
        let z = Point2::new(0.2, -0.1);
        let dirs = make_directions(32).unwrap();
        let freqs = make_frequencies(0.4, 0.6, 10).unwrap();
        let cloud = ScattererCloud::from_points(vec![z], 0.05).unwrap();
        let mats: Vec<_> = freqs
            .omegas()
            .iter()
            .map(|&w| assemble_msr(&cloud, w, &dirs, Convention::Symmetric).unwrap())
            .collect();
        let terms = frequency_terms(&mats, 0.01).unwrap();
        let v = imaging_value(z, &terms, &dirs).unwrap();
        let expected: f64 = freqs.omegas().iter().sum();
        assert!((v.norm() - expected).abs() < 1e-8);
    }

    #[test]
    fn near_j0_zero_is_dark() {
        let z = Point2::new(0.1, 0.1);
        let omega = 2.0 * PI / 0.6;
        let (m, dirs) = single(z, omega, 64, Convention::Symmetric);
        let terms = frequency_terms(&[m], 0.01).unwrap();
        let x = z + Point2::new(2.404826 / omega, 0.0).rotated(0.4);
        let v = imaging_value(x, &terms, &dirs).unwrap();
        assert!(v.norm() <= 0.02 * omega);
        // matches the J0² profile through the direction-average oracle
        let cs = circle_sum(z - x, omega, &dirs);
        assert!((v.norm() - omega * cs.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn phase_rotation_leaves_value_unchanged() {
        let dirs = make_directions(12).unwrap();
        let cloud =
            ScattererCloud::from_points(vec![Point2::new(0.1, 0.2), Point2::new(-0.5, 0.4)], 0.05)
                .unwrap();
        let m = assemble_msr(&cloud, 12.0, &dirs, Convention::Symmetric).unwrap();
        let terms = frequency_terms(&[m], 0.01).unwrap();
        let mut rotated = terms.clone();
        for (l, phi) in [0.7, -2.1].iter().enumerate() {
            let ph = Complex64::from_polar(1.0, *phi);
            for r in 0..12 {
                rotated[0].svd.left[(r, l)] *= ph;
                rotated[0].svd.right[(r, l)] *= ph;
            }
        }
        for x in [
            Point2::new(0.0, 0.0),
            Point2::new(0.1, 0.2),
            Point2::new(-0.33, 0.71),
        ] {
            let a = imaging_value(x, &terms, &dirs).unwrap();
            let b = imaging_value(x, &rotated, &dirs).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_matrices_give_zero_map() {
        let dirs = make_directions(8).unwrap();
        let grid = ImagingGrid::centered_square(Point2::ORIGIN, 1.0, 11).unwrap();
        let mats = vec![MsrMatrix::zeros(8, 10.0, Convention::Symmetric); 3];
        let map = evaluate_map(&grid, &mats, &dirs, 0.1).unwrap();
        assert!(map.magnitude.iter().all(|&v| v == 0.0));
        assert_eq!(map.metadata.ranks, vec![0, 0, 0]);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let dirs = make_directions(8).unwrap();
        let grid = ImagingGrid::centered_square(Point2::ORIGIN, 1.0, 5).unwrap();
        let a = MsrMatrix::zeros(8, 10.0, Convention::Symmetric);
        let b = MsrMatrix::zeros(8, 11.0, Convention::Paper);
        assert!(evaluate_map(&grid, &[a.clone(), b], &dirs, 0.1).is_err());
        assert!(evaluate_map(
            &grid,
            &[MsrMatrix::zeros(6, 10.0, Convention::Symmetric)],
            &dirs,
            0.1
        )
        .is_err());
        assert!(evaluate_map(&grid, &[a], &dirs, 1.5).is_err());
    }

    #[test]
    fn centered_scatterer_peaks_at_center() {
        let z = Point2::ORIGIN;
        let dirs = make_directions(32).unwrap();
        let freqs = make_frequencies(0.4, 0.6, 10).unwrap();
        let cloud = ScattererCloud::from_points(vec![z], 0.05).unwrap();
        let mats: Vec<_> = freqs
            .omegas()
            .iter()
            .map(|&w| assemble_msr(&cloud, w, &dirs, Convention::Symmetric).unwrap())
            .collect();
        let grid = ImagingGrid::centered_square(Point2::ORIGIN, 2.0, 101).unwrap();
        let map = evaluate_map(&grid, &mats, &dirs, 0.01).unwrap();
        assert_eq!(map.argmax(), 50 * 101 + 50);
        assert_eq!(map.local_maxima()[0], 50 * 101 + 50);
    }

    #[test]
    fn psf_values() {
        let (w1, wk) = (2.0 * PI / 0.6, 2.0 * PI / 0.4);
        let at0 = psf_closed_form(0.0, w1, wk);
        assert!((at0 - (wk * wk - w1 * w1) / (8.0 * PI * PI)).abs() < 1e-14);
        assert!((at0 - 1.7361).abs() < 1e-4);
        assert_eq!(psf_closed_form(0.7, w1, w1), 0.0);
        let oracle = quadrature_oracle_psf(1.0, w1, wk, 4096).unwrap() / (4.0 * PI * PI);
        assert!((psf_closed_form(1.0, w1, wk) - oracle).abs() < 1e-8);
    }

    #[test]
    fn local_maxima_tie_break() {
        let grid = ImagingGrid::new(Point2::ORIGIN, 1.0, 4, 1).unwrap();
        let map = ImagingMap {
            grid,
            values: vec![Complex64::new(0.0, 0.0); 4],
            magnitude: vec![1.0, 3.0, 3.0, 2.0],
            metadata: MapMetadata {
                n: 2,
                k: 0,
                omegas: vec![],
                ranks: vec![],
                convention: Convention::Symmetric,
            },
        };
        assert_eq!(map.local_maxima(), vec![1]);
        assert_eq!(map.argmax(), 1);
        assert_eq!(map.top_fraction(0.5), vec![1, 2]);
    }
}
