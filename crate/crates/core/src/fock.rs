//! States of a single bosonic mode on a truncated Fock basis.
//!
//! A cutoff `D` keeps the levels `|0>..|D-1>`. Constructors renormalize to
//! unit trace and record the probability weight that fell outside the cutoff
//! in [`DensityMatrix::trace_deficit`], so downstream quantities always act
//! on proper states while the truncation error stays auditable.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{AvcError, Result};

/// Default tolerance on the truncation deficit accepted by constructors.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-8;
/// Hermiticity tolerance for state matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIGENVALUE_FLOOR, 0)` count as roundoff and are clipped.
pub const EIGENVALUE_FLOOR: f64 = 1e-10;
/// Allowed slack on `trace + trace_deficit = 1`.
pub const TRACE_BUDGET_TOL: f64 = 1e-9;

pub(crate) fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Log-pmf of a Poisson distribution with the given mean (mean 0 allowed).
pub fn poisson_ln_pmf(n: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n as f64 * mean.ln() - mean - ln_factorial(n)
}

/// Upper tail `P(X >= n0)` of a Poisson variable, summed in log space so
/// that tails far below the f64 underflow of naive term-by-term products
/// still come out accurate.
pub fn poisson_tail_ln(mean: f64, n0: usize) -> f64 {
    if mean == 0.0 {
        return if n0 == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if (n0 as f64) <= mean {
        // Head is small only in the complementary sense; sum the head with
        // compensation and subtract.
        let mut head = 0.0f64;
        let mut comp = 0.0f64;
        for n in 0..n0 {
            let term = poisson_ln_pmf(n, mean).exp();
            let y = term - comp;
            let t = head + y;
            comp = (t - head) - y;
            head = t;
        }
        return (1.0 - head).max(f64::MIN_POSITIVE).ln();
    }
    // Sum upward from n0; successive terms shrink by mean/(n+1) < 1.
    let ln_first = poisson_ln_pmf(n0, mean);
    let mut rest = 0.0f64;
    let mut ratio = 1.0f64;
    let mut n = n0;
    loop {
        ratio *= mean / (n as f64 + 1.0);
        if ratio < 1e-30 {
            break;
        }
        rest += ratio;
        n += 1;
        if n > n0 + 10_000 {
            break;
        }
    }
    ln_first + rest.ln_1p()
}

/// `P(X >= n0)` for a Poisson variable (may underflow to 0 for deep tails;
/// use [`poisson_tail_ln`] in that regime).
pub fn poisson_tail(mean: f64, n0: usize) -> f64 {
    poisson_tail_ln(mean, n0).exp()
}

/// Smallest cutoff `D` such that both the geometric (thermal) and Poisson
/// tails of a state with mean energy `e_max` fall below `tol`.
pub fn choose_cutoff(e_max: f64, tol: f64) -> usize {
    assert!(e_max >= 0.0 && tol > 0.0);
    let ratio = e_max / (e_max + 1.0);
    let mut d = 1usize;
    loop {
        let geom_ln = if ratio == 0.0 {
            f64::NEG_INFINITY
        } else {
            d as f64 * ratio.ln()
        };
        if geom_ln < tol.ln() && poisson_tail_ln(e_max, d) < tol.ln() {
            return d;
        }
        d += 1;
        if d > 100_000 {
            panic!("choose_cutoff did not converge for e_max={e_max}, tol={tol}");
        }
    }
}

/// Truncated coherent-state amplitude vector together with the weight lost
/// beyond the cutoff. Amplitudes are `e^{-|a|^2/2} a^n / sqrt(n!)`.
pub fn coherent_amplitudes(alpha: Complex64, dim: usize) -> (DVector<Complex64>, f64) {
    assert!(dim >= 1);
    let nsq = alpha.norm_sqr();
    let mut v = DVector::zeros(dim);
    if nsq == 0.0 {
        v[0] = Complex64::new(1.0, 0.0);
        return (v, 0.0);
    }
    let ln_mag0 = -nsq / 2.0;
    let phase = Complex64::from_polar(1.0, alpha.arg());
    let mut phase_n = Complex64::new(1.0, 0.0);
    for n in 0..dim {
        let ln_mag = ln_mag0 + 0.5 * (n as f64) * nsq.ln() - 0.5 * ln_factorial(n);
        v[n] = phase_n * ln_mag.exp();
        phase_n *= phase;
    }
    let deficit = poisson_tail(nsq, dim);
    (v, deficit)
}

/// Hermitian positive matrix on a truncated Fock space, renormalized to unit
/// trace, with the truncated probability weight kept on the side.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dim: usize,
    entries: DMatrix<Complex64>,
    trace_deficit: f64,
}

impl DensityMatrix {
    /// Vacuum state `|0><0|`.
    pub fn vacuum(dim: usize) -> Self {
        assert!(dim >= 1);
        let mut m = DMatrix::zeros(dim, dim);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        Self {
            dim,
            entries: m,
            trace_deficit: 0.0,
        }
    }

    /// Number state `|n><n|`. Requires `n < dim`.
    pub fn fock(n: usize, dim: usize) -> Self {
        assert!(n < dim);
        let mut m = DMatrix::zeros(dim, dim);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Self {
            dim,
            entries: m,
            trace_deficit: 0.0,
        }
    }

    /// Coherent state `|alpha><alpha|`, truncated and renormalized.
    pub fn coherent(alpha: Complex64, dim: usize) -> Result<Self> {
        Self::coherent_with_tol(alpha, dim, DEFAULT_TRUNCATION_TOL)
    }

    pub fn coherent_with_tol(alpha: Complex64, dim: usize, tol: f64) -> Result<Self> {
        let (v, deficit) = coherent_amplitudes(alpha, dim);
        if deficit > tol {
            return Err(AvcError::Truncation {
                deficit,
                tolerance: tol,
                dim,
            });
        }
        Ok(Self::pure_from_amplitudes(&v, deficit))
    }

    /// Rank-1 state from a (possibly subnormalized) amplitude vector. The
    /// vector is renormalized; `deficit` records the weight already lost.
    pub fn pure_from_amplitudes(v: &DVector<Complex64>, deficit: f64) -> Self {
        let norm = v.norm();
        assert!(norm > 0.0, "amplitude vector has zero norm");
        let w = v / Complex64::new(norm, 0.0);
        let m = &w * w.adjoint();
        Self {
            dim: v.len(),
            entries: m,
            trace_deficit: deficit,
        }
    }

    /// Thermal state of mean photon number `nbar`: geometric spectrum
    /// `nbar^n/(nbar+1)^{n+1}`, truncated deficit `(nbar/(nbar+1))^dim`.
    pub fn thermal(nbar: f64, dim: usize) -> Result<Self> {
        Self::thermal_with_tol(nbar, dim, DEFAULT_TRUNCATION_TOL)
    }

    pub fn thermal_with_tol(nbar: f64, dim: usize, tol: f64) -> Result<Self> {
        if nbar < 0.0 {
            return Err(AvcError::Domain(format!(
                "thermal mean photon number must be >= 0, got {nbar}"
            )));
        }
        assert!(dim >= 1);
        if nbar == 0.0 {
            return Ok(Self::vacuum(dim));
        }
        let r = nbar / (nbar + 1.0);
        let deficit = (dim as f64 * r.ln()).exp();
        if deficit > tol {
            return Err(AvcError::Truncation {
                deficit,
                tolerance: tol,
                dim,
            });
        }
        let mut diag = Vec::with_capacity(dim);
        for n in 0..dim {
            diag.push((n as f64 * r.ln()).exp() * (1.0 - r));
        }
        Ok(Self::from_diagonal_renormalized(&diag, deficit))
    }

    /// Phase-averaged coherent state of ring radius `b`: diagonal with
    /// Poisson(`b^2`) photon statistics.
    pub fn phase_averaged(b: f64, dim: usize) -> Result<Self> {
        Self::phase_averaged_with_tol(b, dim, DEFAULT_TRUNCATION_TOL)
    }

    pub fn phase_averaged_with_tol(b: f64, dim: usize, tol: f64) -> Result<Self> {
        if b < 0.0 {
            return Err(AvcError::Domain(format!(
                "phase-averaged ring radius must be >= 0, got {b}"
            )));
        }
        let mean = b * b;
        let deficit = poisson_tail(mean, dim);
        if deficit > tol {
            return Err(AvcError::Truncation {
                deficit,
                tolerance: tol,
                dim,
            });
        }
        let diag: Vec<f64> = (0..dim).map(|n| poisson_ln_pmf(n, mean).exp()).collect();
        Ok(Self::from_diagonal_renormalized(&diag, deficit))
    }

    /// Displaced phase-averaged coherent state: the uniform phase average of
    /// `|alpha + b e^{i phi}>` over `quadrature` equidistant angles. The
    /// integrand is a trigonometric polynomial of degree `< 2 dim` in `phi`,
    /// so `quadrature >= 4 dim` makes the trapezoid rule exact up to roundoff.
    pub fn displaced_phase_averaged(
        alpha: Complex64,
        b: f64,
        dim: usize,
        quadrature: usize,
    ) -> Result<Self> {
        Self::displaced_phase_averaged_with_tol(alpha, b, dim, quadrature, DEFAULT_TRUNCATION_TOL)
    }

    pub fn displaced_phase_averaged_with_tol(
        alpha: Complex64,
        b: f64,
        dim: usize,
        quadrature: usize,
        tol: f64,
    ) -> Result<Self> {
        if b < 0.0 {
            return Err(AvcError::Domain(format!(
                "displaced phase-averaged ring radius must be >= 0, got {b}"
            )));
        }
        if quadrature < 2 * dim {
            return Err(AvcError::Domain(format!(
                "phase quadrature needs at least 2 x cutoff = {} points for an exact \
                 trapezoid rule, got {quadrature}",
                2 * dim
            )));
        }
        if b == 0.0 {
            return Self::coherent_with_tol(alpha, dim, tol);
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut deficit = 0.0;
        let w = 1.0 / quadrature as f64;
        for j in 0..quadrature {
            let phi = 2.0 * std::f64::consts::PI * j as f64 * w;
            let point = alpha + Complex64::from_polar(b, phi);
            let (v, d) = coherent_amplitudes(point, dim);
            deficit += w * d;
            // accumulate w * v v^dagger
            for c in 0..dim {
                let vc = v[c].conj() * w;
                for r in 0..dim {
                    m[(r, c)] += v[r] * vc;
                }
            }
        }
        if deficit > tol {
            return Err(AvcError::Truncation {
                deficit,
                tolerance: tol,
                dim,
            });
        }
        Self::from_matrix(m, deficit)
    }

    /// Diagonal state from nonnegative weights; renormalizes and records the
    /// supplied deficit.
    pub fn from_diagonal_renormalized(diag: &[f64], deficit: f64) -> Self {
        let total: f64 = diag.iter().sum();
        assert!(total > 0.0);
        let dim = diag.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (n, &x) in diag.iter().enumerate() {
            m[(n, n)] = Complex64::new(x / total, 0.0);
        }
        Self {
            dim,
            entries: m,
            trace_deficit: deficit,
        }
    }

    /// Wrap a Hermitian matrix as a state: hermitizes roundoff, renormalizes
    /// the trace, and records `deficit`. Rejects visibly non-Hermitian input.
    pub fn from_matrix(m: DMatrix<Complex64>, deficit: f64) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() {
            return Err(AvcError::DimensionMismatch {
                left: dim,
                right: m.ncols(),
            });
        }
        let mut herm_err = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                let e = (m[(r, c)] - m[(c, r)].conj()).norm();
                herm_err = herm_err.max(e);
            }
        }
        if herm_err > 1e-9 {
            return Err(AvcError::Invariant(format!(
                "matrix is not Hermitian: max asymmetry {herm_err:.3e}"
            )));
        }
        let mut h = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                h[(r, c)] = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            }
        }
        let tr: f64 = (0..dim).map(|i| h[(i, i)].re).sum();
        if tr <= 0.0 {
            return Err(AvcError::Invariant(format!(
                "matrix trace {tr:.3e} is not positive"
            )));
        }
        let h = h / Complex64::new(tr, 0.0);
        Ok(Self {
            dim,
            entries: h,
            trace_deficit: deficit,
        })
    }

    /// Convex mixture of states on a shared cutoff.
    pub fn mix(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts
            .first()
            .ok_or_else(|| AvcError::Domain("empty mixture".into()))?
            .1
            .dim;
        let wsum: f64 = parts.iter().map(|(w, _)| *w).sum();
        if (wsum - 1.0).abs() > 1e-9 {
            return Err(AvcError::Domain(format!(
                "mixture weights sum to {wsum}, expected 1"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut deficit = 0.0;
        for (w, state) in parts {
            if state.dim != dim {
                return Err(AvcError::DimensionMismatch {
                    left: dim,
                    right: state.dim,
                });
            }
            m += &state.entries * Complex64::new(*w, 0.0);
            deficit += w * state.trace_deficit;
        }
        Ok(Self {
            dim,
            entries: m,
            trace_deficit: deficit,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Mean photon number `sum_n n rho_nn`.
    pub fn energy(&self) -> f64 {
        (0..self.dim)
            .map(|n| n as f64 * self.entries[(n, n)].re)
            .sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|n| self.entries[(n, n)].re).collect()
    }

    /// `true` when every off-diagonal entry is exactly zero (constructors of
    /// thermal / phase-averaged / number states produce that form).
    pub fn is_exactly_diagonal(&self) -> bool {
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c && self.entries[(r, c)] != Complex64::new(0.0, 0.0) {
                    return false;
                }
            }
        }
        true
    }

    /// Zero-pad to a larger cutoff (same state, bigger basis).
    pub fn embed(&self, new_dim: usize) -> Self {
        assert!(new_dim >= self.dim);
        let mut m = DMatrix::zeros(new_dim, new_dim);
        m.view_mut((0, 0), (self.dim, self.dim)).copy_from(&self.entries);
        Self {
            dim: new_dim,
            entries: m,
            trace_deficit: self.trace_deficit,
        }
    }

    /// Conjugate by the phase rotation `e^{i theta n}`.
    pub fn phase_rotated(&self, theta: f64) -> Self {
        let mut m = self.entries.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                let ph = Complex64::from_polar(1.0, theta * (r as f64 - c as f64));
                m[(r, c)] *= ph;
            }
        }
        Self {
            dim: self.dim,
            entries: m,
            trace_deficit: self.trace_deficit,
        }
    }

    /// Check the state invariants: Hermiticity, positivity up to the
    /// roundoff floor, and `trace + deficit = 1` within budget.
    pub fn validate(&self) -> Result<()> {
        let mut herm_err = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                herm_err = herm_err.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).norm());
            }
        }
        if herm_err > HERMITICITY_TOL {
            return Err(AvcError::Invariant(format!(
                "hermiticity violated: {herm_err:.3e}"
            )));
        }
        let eigs = self.entries.clone().symmetric_eigen().eigenvalues;
        let min_ev = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_ev < -EIGENVALUE_FLOOR {
            return Err(AvcError::NegativeEigenvalue {
                value: min_ev,
                floor: EIGENVALUE_FLOOR,
            });
        }
        // Constructors renormalize to unit trace, so `trace + deficit` may sit
        // up to one recorded deficit above 1; anything beyond that is a bug.
        let budget = self.trace() + self.trace_deficit;
        if budget < 1.0 - TRACE_BUDGET_TOL || budget > 1.0 + TRACE_BUDGET_TOL + self.trace_deficit {
            return Err(AvcError::Invariant(format!(
                "trace + deficit = {budget} is outside the unit budget"
            )));
        }
        Ok(())
    }
}

/// Raw one-norm `|| a - b ||_1` (sum of absolute eigenvalues of the
/// difference); lies in `[0, 2]` for states.
pub fn trace_norm_diff(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(AvcError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let diff = &a.entries - &b.entries;
    let eigs = diff.symmetric_eigen().eigenvalues;
    Ok(eigs.iter().map(|x| x.abs()).sum())
}

/// Trace distance `1/2 || a - b ||_1`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    Ok(trace_norm_diff(a, b)? / 2.0)
}

/// Finite weighted set of complex amplitudes standing in for an input
/// distribution over coherent states.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Constellation {
    points: Vec<(f64, f64)>,
    weights: Vec<f64>,
    mean_energy: f64,
}

impl Constellation {
    /// Build from points and nonnegative weights; weights are normalized.
    pub fn new(points: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(AvcError::Domain(
                "constellation needs matching, nonempty points and weights".into(),
            ));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(AvcError::Domain("constellation weights must be >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(AvcError::Domain("constellation weights sum to zero".into()));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mean_energy = points
            .iter()
            .zip(&weights)
            .map(|(p, w)| w * p.norm_sqr())
            .sum();
        Ok(Self {
            points: points.iter().map(|p| (p.re, p.im)).collect(),
            weights,
            mean_energy,
        })
    }

    pub fn single(alpha: Complex64) -> Self {
        Self {
            points: vec![(alpha.re, alpha.im)],
            weights: vec![1.0],
            mean_energy: alpha.norm_sqr(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Complex64 {
        Complex64::new(self.points[i].0, self.points[i].1)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean_energy
    }

    /// The input average `sum_i w_i |a_i><a_i|` on the given cutoff.
    pub fn average_state(&self, dim: usize) -> Result<DensityMatrix> {
        let mut m = DMatrix::zeros(dim, dim);
        let mut deficit = 0.0;
        for i in 0..self.len() {
            let (v, d) = coherent_amplitudes(self.point(i), dim);
            deficit += self.weights[i] * d;
            for c in 0..dim {
                let vc = v[c].conj() * self.weights[i];
                for r in 0..dim {
                    m[(r, c)] += v[r] * vc;
                }
            }
        }
        DensityMatrix::from_matrix(m, deficit)
    }

    /// Radii and weights of the points, for tail checks.
    pub fn radial_profile(&self) -> Vec<(f64, f64)> {
        (0..self.len())
            .map(|i| (self.point(i).norm(), self.weights[i]))
            .collect()
    }
}

/// Parametrized semi-classical jammer state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum JammerKind {
    /// Thermal state of the given mean photon number.
    Thermal { mean_photons: f64 },
    /// Phase-averaged coherent ring of the given radius.
    Phav { radius: f64 },
    /// Finite mixture of phase-averaged rings `(radius, weight)`.
    PhavMixture { components: Vec<(f64, f64)> },
    /// Displaced ring: coherent center plus phase-averaged ring radius.
    Dphav {
        center_re: f64,
        center_im: f64,
        radius: f64,
    },
}

/// A jammer input: its kind plus the derived power and sub-Gaussian tail
/// constant of its P-representation measure. Tail convention:
/// `P(|X| >= t) <= 2 exp(-t^2/K^2)`, i.e. `K_1 = K^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JammerSpec {
    pub kind: JammerKind,
    pub mean_energy: f64,
    pub subgaussian_k: f64,
}

const MIN_SUBGAUSSIAN_K: f64 = 1e-9;

impl JammerSpec {
    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    pub fn thermal(mean_photons: f64) -> Self {
        assert!(mean_photons >= 0.0);
        // Gaussian P function: P(|b| >= t) = exp(-t^2/N) <= 2 exp(-t^2/K^2)
        // for every K^2 >= N.
        Self {
            kind: JammerKind::Thermal { mean_photons },
            mean_energy: mean_photons,
            subgaussian_k: mean_photons.sqrt().max(MIN_SUBGAUSSIAN_K),
        }
    }

    pub fn phav(radius: f64) -> Self {
        assert!(radius >= 0.0);
        Self {
            kind: JammerKind::Phav { radius },
            mean_energy: radius * radius,
            subgaussian_k: point_mass_k(radius),
        }
    }

    pub fn phav_mixture(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(AvcError::Domain("empty phase-averaged mixture".into()));
        }
        if components.iter().any(|(b, w)| *b < 0.0 || *w < 0.0) {
            return Err(AvcError::Domain(
                "mixture radii and weights must be >= 0".into(),
            ));
        }
        let total: f64 = components.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(AvcError::Domain("mixture weights sum to zero".into()));
        }
        let components: Vec<(f64, f64)> =
            components.iter().map(|(b, w)| (*b, w / total)).collect();
        let mean_energy = components.iter().map(|(b, w)| w * b * b).sum();
        let samples: Vec<(f64, f64)> = components.clone();
        let k = empirical_subgaussian_k(&samples);
        Ok(Self {
            kind: JammerKind::PhavMixture { components },
            mean_energy,
            subgaussian_k: k,
        })
    }

    pub fn dphav(center: Complex64, radius: f64) -> Self {
        assert!(radius >= 0.0);
        let mean_energy = center.norm_sqr() + radius * radius;
        // P measure is uniform on a circle of radius `radius` around
        // `center`; the largest modulus bounds the tail.
        let k = point_mass_k(center.norm() + radius);
        Self {
            kind: JammerKind::Dphav {
                center_re: center.re,
                center_im: center.im,
                radius,
            },
            mean_energy,
            subgaussian_k: k,
        }
    }

    /// Build the density matrix of this jammer on the given cutoff.
    pub fn state(&self, dim: usize, quadrature: usize, tol: f64) -> Result<DensityMatrix> {
        match &self.kind {
            JammerKind::Thermal { mean_photons } => {
                DensityMatrix::thermal_with_tol(*mean_photons, dim, tol)
            }
            JammerKind::Phav { radius } => {
                DensityMatrix::phase_averaged_with_tol(*radius, dim, tol)
            }
            JammerKind::PhavMixture { components } => {
                let states: Vec<DensityMatrix> = components
                    .iter()
                    .map(|(b, _)| DensityMatrix::phase_averaged_with_tol(*b, dim, tol))
                    .collect::<Result<_>>()?;
                let parts: Vec<(f64, &DensityMatrix)> = components
                    .iter()
                    .zip(&states)
                    .map(|((_, w), s)| (*w, s))
                    .collect();
                DensityMatrix::mix(&parts)
            }
            JammerKind::Dphav {
                center_re,
                center_im,
                radius,
            } => DensityMatrix::displaced_phase_averaged_with_tol(
                Complex64::new(*center_re, *center_im),
                *radius,
                dim,
                quadrature,
                tol,
            ),
        }
    }

    /// Discrete P-representation quadrature: weighted coherent amplitudes
    /// whose mixture reproduces this jammer (thermal states use an
    /// equal-weight radial quantile rule).
    pub fn p_representation_points(
        &self,
        phase_points: usize,
        radial_points: usize,
    ) -> Vec<(Complex64, f64)> {
        let phases = phase_points.max(2);
        let ring = |radius: f64, weight: f64, out: &mut Vec<(Complex64, f64)>| {
            if radius == 0.0 {
                out.push((Complex64::new(0.0, 0.0), weight));
                return;
            }
            let w = weight / phases as f64;
            for j in 0..phases {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / phases as f64;
                out.push((Complex64::from_polar(radius, phi), w));
            }
        };
        let mut out = Vec::new();
        match &self.kind {
            JammerKind::Thermal { mean_photons } => {
                if *mean_photons == 0.0 {
                    out.push((Complex64::new(0.0, 0.0), 1.0));
                } else {
                    let j = radial_points.max(1);
                    for i in 0..j {
                        let q = (i as f64 + 0.5) / j as f64;
                        let r2 = -mean_photons * (1.0 - q).ln();
                        ring(r2.sqrt(), 1.0 / j as f64, &mut out);
                    }
                }
            }
            JammerKind::Phav { radius } => ring(*radius, 1.0, &mut out),
            JammerKind::PhavMixture { components } => {
                for (b, w) in components {
                    ring(*b, *w, &mut out);
                }
            }
            JammerKind::Dphav {
                center_re,
                center_im,
                radius,
            } => {
                let center = Complex64::new(*center_re, *center_im);
                if *radius == 0.0 {
                    out.push((center, 1.0));
                } else {
                    let w = 1.0 / phases as f64;
                    for j in 0..phases {
                        let phi = 2.0 * std::f64::consts::PI * j as f64 / phases as f64;
                        out.push((center + Complex64::from_polar(*radius, phi), w));
                    }
                }
            }
        }
        out
    }

    /// The jammer after uniform phase randomization. Thermal and
    /// phase-averaged kinds are fixed points; a displaced ring becomes a
    /// mixture of rings over the radii `|center + radius e^{i phi}|`.
    pub fn phase_averaged_spec(&self, quadrature: usize) -> Result<JammerSpec> {
        match &self.kind {
            JammerKind::Thermal { .. } | JammerKind::Phav { .. } | JammerKind::PhavMixture { .. } => {
                Ok(self.clone())
            }
            JammerKind::Dphav {
                center_re,
                center_im,
                radius,
            } => {
                let center = Complex64::new(*center_re, *center_im);
                if *radius == 0.0 {
                    return JammerSpec::phav_mixture(vec![(center.norm(), 1.0)]);
                }
                let m = quadrature.max(8);
                let mut comps = Vec::with_capacity(m);
                for j in 0..m {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    comps.push(((center + Complex64::from_polar(*radius, phi)).norm(), 1.0));
                }
                JammerSpec::phav_mixture(comps)
            }
        }
    }

    /// Verify the recorded power bound and sub-Gaussian constant.
    pub fn check(&self, power_budget: f64) -> Result<()> {
        if self.mean_energy > power_budget + 1e-12 {
            return Err(AvcError::Domain(format!(
                "jammer energy {} exceeds budget {}",
                self.mean_energy, power_budget
            )));
        }
        let samples: Vec<(f64, f64)> = self
            .p_representation_points(64, 64)
            .iter()
            .map(|(p, w)| (p.norm(), *w))
            .collect();
        let check = check_subgaussian(&samples, self.subgaussian_k);
        if !check.holds {
            return Err(AvcError::Invariant(format!(
                "sub-Gaussian tail check failed at t={:.6e}",
                check.worst_t
            )));
        }
        Ok(())
    }
}

/// Smallest K with `1 <= 2 exp(-t^2/K^2)` for all t up to the point mass.
fn point_mass_k(radius: f64) -> f64 {
    (radius / std::f64::consts::LN_2.sqrt()).max(MIN_SUBGAUSSIAN_K)
}

/// Smallest K for which a finite radial measure passes the tail bound.
fn empirical_subgaussian_k(samples: &[(f64, f64)]) -> f64 {
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut ksq: f64 = 0.0;
    // tail at radius r_i includes the mass at r_i itself
    let mut tail: f64 = sorted.iter().map(|(_, w)| w).sum();
    for (r, w) in &sorted {
        if *r > 0.0 && tail > 0.0 {
            // need 2 exp(-r^2/K^2) >= tail  =>  K^2 >= r^2 / ln(2/tail)
            let need = r * r / (2.0 / tail).ln();
            ksq = ksq.max(need);
        }
        tail -= w;
    }
    ksq.sqrt().max(MIN_SUBGAUSSIAN_K)
}

/// Result of the empirical sub-Gaussian tail scan.
#[derive(Clone, Copy, Debug)]
pub struct SubgaussianCheck {
    pub holds: bool,
    /// The scan point with the worst bound margin (the violating `t` when
    /// the check fails).
    pub worst_t: f64,
    /// `empirical_tail / bound` at `worst_t`.
    pub worst_ratio: f64,
}

/// Check `P(|X| >= t) <= 2 exp(-t^2/K^2)` for the weighted radial samples,
/// scanning the jump points of the empirical tail.
pub fn check_subgaussian(samples: &[(f64, f64)], k: f64) -> SubgaussianCheck {
    assert!(k > 0.0, "sub-Gaussian constant must be positive");
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: f64 = sorted.iter().map(|(_, w)| w).sum();
    let mut tail = total;
    let mut worst_t = 0.0;
    let mut worst_ratio = 0.0f64;
    for (r, w) in &sorted {
        let bound = 2.0 * (-r * r / (k * k)).exp();
        let ratio = if bound > 0.0 { tail / bound } else { f64::INFINITY };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_t = *r;
        }
        tail -= w;
    }
    SubgaussianCheck {
        holds: worst_ratio <= 1.0 + 1e-12,
        worst_t,
        worst_ratio,
    }
}
