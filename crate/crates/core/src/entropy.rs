//! Entropic functionals in bits: von Neumann and relative entropy, the
//! Gordon function `g(x) = (x+1) log2(x+1) - x log2 x` and its inverse,
//! binary entropy, Holevo quantities of jammed constellations, and the
//! effective photon numbers of a state sent through either splitter port
//! against vacuum.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::beamsplitter::{apply_bs, apply_bs_semiclassical, ChannelConfig};
use crate::error::{AvcError, Result};
use crate::fock::{Constellation, DensityMatrix, JammerSpec, EIGENVALUE_FLOOR};

/// Outcome of an entropy evaluation with its numerical context.
#[derive(Clone, Copy, Debug)]
pub struct EntropyReport {
    pub value_bits: f64,
    /// Smallest eigenvalue encountered before clipping.
    pub eigenvalue_floor: f64,
    /// Total magnitude of clipped (roundoff-negative) eigenvalues.
    pub clipped_mass: f64,
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let dim = m.nrows();
    let mut diagonal = true;
    'outer: for c in 0..dim {
        for r in 0..dim {
            if r != c && m[(r, c)] != Complex64::new(0.0, 0.0) {
                diagonal = false;
                break 'outer;
            }
        }
    }
    if diagonal {
        return (0..dim).map(|i| m[(i, i)].re).collect();
    }
    m.clone().symmetric_eigen().eigenvalues.iter().cloned().collect()
}

/// Von Neumann entropy `-tr(rho log2 rho)`. Eigenvalues in
/// `[-EIGENVALUE_FLOOR, 0)` are clipped to zero; anything lower errors out.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<EntropyReport> {
    entropy_of_eigenvalues(&hermitian_eigenvalues(rho.entries()))
}

/// Spectrum of a state (exact diagonal shortcut where applicable).
pub fn state_eigenvalues(rho: &DensityMatrix) -> Vec<f64> {
    hermitian_eigenvalues(rho.entries())
}

pub(crate) fn entropy_of_eigenvalues(eigs: &[f64]) -> Result<EntropyReport> {
    let mut floor = f64::INFINITY;
    let mut clipped = 0.0;
    let mut value = 0.0;
    for &l in eigs {
        floor = floor.min(l);
        if l < -EIGENVALUE_FLOOR {
            return Err(AvcError::NegativeEigenvalue {
                value: l,
                floor: EIGENVALUE_FLOOR,
            });
        }
        if l <= 0.0 {
            clipped += l.abs();
            continue;
        }
        value -= l * l.log2();
    }
    Ok(EntropyReport {
        value_bits: value,
        eigenvalue_floor: floor,
        clipped_mass: clipped,
    })
}

/// Relative entropy `D(rho || sigma)` in bits. Returns `+inf` when `rho`
/// carries more than `1e-12` mass outside the support of `sigma`
/// (sigma-eigenvalues below `1e-13` count as outside).
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(AvcError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    const SUPPORT_TOL: f64 = 1e-13;
    let se = sigma.entries().clone().symmetric_eigen();
    let mut cross = 0.0; // tr(rho log2 sigma)
    let mut outside = 0.0;
    for (j, &mu) in se.eigenvalues.iter().enumerate() {
        let v = se.eigenvectors.column(j);
        let w = (v.adjoint() * rho.entries() * v)[(0, 0)].re.max(0.0);
        if mu < SUPPORT_TOL {
            outside += w;
        } else {
            cross += w * mu.log2();
        }
    }
    if outside > 1e-12 {
        return Ok(f64::INFINITY);
    }
    let own = -von_neumann_entropy(rho)?.value_bits; // tr(rho log2 rho)
    Ok((own - cross).max(0.0))
}

/// Gordon function: the entropy in bits of a thermal state with mean photon
/// number `x`.
pub fn gordon_g(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(AvcError::Domain(format!("gordon_g needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Inverse of the Gordon function: bracketing bisection on `[0, 2^y]`
/// followed by one Newton polish. `|g(g_inv(y)) - y| <= 1e-12`.
pub fn gordon_g_inv(y: f64) -> Result<f64> {
    if y < 0.0 {
        return Err(AvcError::Domain(format!(
            "gordon_g_inv needs y >= 0, got {y}"
        )));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| (x + 1.0) * (x + 1.0).log2() - x * x.log2();
    let mut lo = 0.0f64;
    let mut hi = 2f64.powf(y);
    debug_assert!(g(hi) >= y);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // g'(x) = log2((x+1)/x), unbounded near zero; the bisection already
    // localized the root so one Newton step only polishes
    let deriv = ((x + 1.0) / x).log2();
    if deriv.is_finite() && deriv > 0.0 {
        x -= (g(x) - y) / deriv;
    }
    Ok(x.max(0.0))
}

/// Binary entropy `h(p)` in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AvcError::Domain(format!(
            "binary entropy needs p in [0,1], got {p}"
        )));
    }
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Holevo quantity of a constellation against one jammer state:
/// `S(sum_i w_i N_sigma(a_i)) - sum_i w_i S(N_sigma(a_i))`.
///
/// The channel is displacement covariant, so every conditional output is a
/// displaced copy of the alpha = 0 output and the conditional term equals
/// `S(N_sigma(0))`; [`holevo_chi_direct`] recomputes every term instead.
pub fn holevo_chi(c: &Constellation, jammer: &JammerSpec, cfg: &ChannelConfig) -> Result<f64> {
    let avg = average_output(c, jammer, cfg)?;
    let conditional =
        von_neumann_entropy(&apply_bs_semiclassical(Complex64::new(0.0, 0.0), jammer, cfg)?)?;
    let chi = von_neumann_entropy(&avg)?.value_bits - conditional.value_bits;
    Ok(chi.max(0.0))
}

/// Holevo quantity with every conditional entropy computed separately.
pub fn holevo_chi_direct(
    c: &Constellation,
    jammer: &JammerSpec,
    cfg: &ChannelConfig,
) -> Result<f64> {
    let avg = average_output(c, jammer, cfg)?;
    let mut conditional = 0.0;
    for i in 0..c.len() {
        let out = apply_bs_semiclassical(c.point(i), jammer, cfg)?;
        conditional += c.weight(i) * von_neumann_entropy(&out)?.value_bits;
    }
    Ok((von_neumann_entropy(&avg)?.value_bits - conditional).max(0.0))
}

/// The averaged channel output `sum_i w_i N_sigma(a_i)`.
pub fn average_output(
    c: &Constellation,
    jammer: &JammerSpec,
    cfg: &ChannelConfig,
) -> Result<DensityMatrix> {
    if c.is_empty() {
        return Err(AvcError::Domain("empty constellation".into()));
    }
    let dim = cfg.output_cutoff;
    let mut m = DMatrix::zeros(dim, dim);
    let mut deficit = 0.0;
    for i in 0..c.len() {
        let out = apply_bs_semiclassical(c.point(i), jammer, cfg)?;
        let w = Complex64::new(c.weight(i), 0.0);
        m += out.entries() * w;
        deficit += c.weight(i) * out.trace_deficit();
    }
    DensityMatrix::from_matrix(m, deficit)
}

/// Effective photon number of `x` transmitted through a splitter of
/// transmissivity `lambda` against vacuum on the other port:
/// `g^{-1}(S(x [+]_lambda |0><0|))`.
pub fn transmitted_photon_number(x: &DensityMatrix, lambda: f64) -> Result<f64> {
    let d = x.dim();
    let cfg = ChannelConfig::new(lambda, d)?;
    let out = apply_bs(x, &DensityMatrix::vacuum(d), &cfg)?;
    gordon_g_inv(von_neumann_entropy(&out)?.value_bits)
}

/// Effective photon number of `x` reflected into the observed port:
/// `g^{-1}(S(|0><0| [+]_lambda x))`.
pub fn reflected_photon_number(x: &DensityMatrix, lambda: f64) -> Result<f64> {
    let d = x.dim();
    let cfg = ChannelConfig::new(lambda, d)?;
    let out = apply_bs(&DensityMatrix::vacuum(d), x, &cfg)?;
    gordon_g_inv(von_neumann_entropy(&out)?.value_bits)
}
