//! The two-mode beam splitter channel, its photon-number-conserving block
//! unitary, the jammed single-output channel, and the pruning channel.
//!
//! The unitary maps annihilation operators as
//! `U' a1 U = sqrt(tau) a1 + sqrt(1-tau) a2`, so a coherent pair
//! `|a> (x) |b>` exits port 1 as `|sqrt(tau) a + sqrt(1-tau) b>`. Total
//! photon number is conserved, which makes the unitary block diagonal over
//! the total-excitation sectors; each block is built by a stable two-term
//! recurrence and cached per `(tau, cutoff, convention)`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::{Arc, LazyLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AvcError, Result};
use crate::fock::{coherent_amplitudes, DensityMatrix, JammerKind, JammerSpec};

/// Placement of the minus sign in the mode map. Both conventions share the
/// observed port-1 law; only the unobserved port flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignConvention {
    /// `U' a2 U = -sqrt(1-tau) a1 + sqrt(tau) a2` (default).
    NegativeReflection,
    /// `U' a2 U = +sqrt(1-tau) a1 - sqrt(tau) a2`.
    PositiveReflection,
}

impl Default for SignConvention {
    fn default() -> Self {
        SignConvention::NegativeReflection
    }
}

/// Transmissivity, cutoffs, and quadrature resolution of one channel setup.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub tau: f64,
    pub input_cutoff: usize,
    pub output_cutoff: usize,
    pub quadrature: usize,
    pub convention: SignConvention,
}

impl ChannelConfig {
    /// Defaults: output cutoff `2 D - 1` (exact block arithmetic before any
    /// truncation), quadrature `4 D`.
    pub fn new(tau: f64, input_cutoff: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(AvcError::Domain(format!(
                "transmissivity must lie in [0,1], got {tau}"
            )));
        }
        if input_cutoff == 0 {
            return Err(AvcError::Domain("input cutoff must be >= 1".into()));
        }
        Ok(Self {
            tau,
            input_cutoff,
            output_cutoff: 2 * input_cutoff - 1,
            quadrature: 4 * input_cutoff,
            convention: SignConvention::default(),
        })
    }

    pub fn with_output_cutoff(mut self, output_cutoff: usize) -> Self {
        assert!(output_cutoff >= 1);
        self.output_cutoff = output_cutoff;
        self
    }

    pub fn with_quadrature(mut self, quadrature: usize) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn with_convention(mut self, convention: SignConvention) -> Self {
        self.convention = convention;
        self
    }
}

/// Per-sector unitaries of the beam splitter: `blocks[n]` acts on
/// `span{ |n1, n - n1> }` and column `n1` holds the output amplitudes of the
/// input `|n1, n - n1>` over `|m, n - m>`. Entries are real.
#[derive(Clone, Debug)]
pub struct BlockUnitary {
    tau: f64,
    input_cutoff: usize,
    convention: SignConvention,
    blocks: Vec<DMatrix<f64>>,
}

impl BlockUnitary {
    fn build(tau: f64, input_cutoff: usize, convention: SignConvention) -> Self {
        let n_max = 2 * (input_cutoff - 1);
        let theta = tau.sqrt().clamp(0.0, 1.0).acos();
        let blocks = crate::par::map_indexed(n_max + 1, |n| {
            let mut a = rotation_block(theta, n);
            if convention == SignConvention::PositiveReflection {
                // parity flip on the unobserved port: (-1)^{n - m} per row
                for m in 0..=n {
                    if (n - m) % 2 == 1 {
                        for c in 0..=n {
                            a[(m, c)] = -a[(m, c)];
                        }
                    }
                }
            }
            a
        });
        Self {
            tau,
            input_cutoff,
            convention,
            blocks,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn input_cutoff(&self) -> usize {
        self.input_cutoff
    }

    pub fn block(&self, n: usize) -> &DMatrix<f64> {
        &self.blocks[n]
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Largest deviation of any block from orthogonality.
    pub fn max_unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.blocks {
            let g = a.transpose() * a;
            for r in 0..g.nrows() {
                for c in 0..g.ncols() {
                    let target = if r == c { 1.0 } else { 0.0 };
                    worst = worst.max((g[(r, c)] - target).abs());
                }
            }
        }
        worst
    }
}

/// Sector `n` of `exp(theta (a1' a2 - a2' a1))`, obtained by
/// eigendecomposing the Hermitian generator `i theta K` (the two-term ladder
/// recurrence loses orthogonality past a few dozen photons, the spectral
/// route stays orthogonal to machine precision at any size).
fn rotation_block(theta: f64, n: usize) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let size = n + 1;
    // H = i theta K with K[n1+1, n1] = sqrt((n1+1)(n - n1)), K antisymmetric
    let mut h = DMatrix::<Complex64>::zeros(size, size);
    for n1 in 0..n {
        let k = theta * ((n1 + 1) as f64 * (n - n1) as f64).sqrt();
        h[(n1 + 1, n1)] = Complex64::new(0.0, k);
        h[(n1, n1 + 1)] = Complex64::new(0.0, -k);
    }
    let se = h.symmetric_eigen();
    // exp(theta K) = exp(-i H) = V exp(-i Lambda) V'
    let mut phases = DMatrix::<Complex64>::zeros(size, size);
    for j in 0..size {
        phases[(j, j)] = Complex64::from_polar(1.0, -se.eigenvalues[j]);
    }
    let u = &se.eigenvectors * phases * se.eigenvectors.adjoint();
    let mut out = DMatrix::<f64>::zeros(size, size);
    for c in 0..size {
        for r in 0..size {
            out[(r, c)] = u[(r, c)].re;
        }
    }
    out
}

fn quantize_tau(tau: f64) -> u64 {
    (tau * 1e15).round() as u64
}

type CacheKey = (u64, usize, SignConvention);

static BLOCK_CACHE: LazyLock<RwLock<HashMap<CacheKey, Arc<BlockUnitary>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

static PERSIST_DIR: LazyLock<RwLock<Option<PathBuf>>> = LazyLock::new(|| RwLock::new(None));

/// Directory for on-disk persistence of built blocks (driven by the CLI's
/// cache environment variable). `None` disables persistence.
pub fn set_block_cache_dir(dir: Option<PathBuf>) {
    *PERSIST_DIR.write().unwrap() = dir;
}

/// Fetch (building or loading if needed) the block unitary for this
/// transmissivity and input cutoff. Concurrent readers share one `Arc`.
pub fn block_unitary(tau: f64, input_cutoff: usize, convention: SignConvention) -> Arc<BlockUnitary> {
    let key = (quantize_tau(tau), input_cutoff, convention);
    if let Some(hit) = BLOCK_CACHE.read().unwrap().get(&key) {
        return Arc::clone(hit);
    }
    let dir = PERSIST_DIR.read().unwrap().clone();
    let loaded = dir
        .as_ref()
        .and_then(|d| load_blocks(d, tau, input_cutoff, convention).ok());
    let built = loaded.unwrap_or_else(|| {
        let b = BlockUnitary::build(tau, input_cutoff, convention);
        if let Some(d) = dir.as_ref() {
            let _ = save_blocks(d, &b);
        }
        b
    });
    let arc = Arc::new(built);
    let mut cache = BLOCK_CACHE.write().unwrap();
    Arc::clone(cache.entry(key).or_insert(arc))
}

const BLOCK_MAGIC: &[u8; 8] = b"BAVCBLK1";
const BLOCK_FORMAT_VERSION: u32 = 1;

fn block_file_name(tau: f64, input_cutoff: usize, convention: SignConvention) -> String {
    let conv = match convention {
        SignConvention::NegativeReflection => 0u8,
        SignConvention::PositiveReflection => 1u8,
    };
    format!(
        "blocks_{:016x}_{}_{}.bin",
        quantize_tau(tau),
        input_cutoff,
        conv
    )
}

fn save_blocks(dir: &PathBuf, b: &BlockUnitary) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(block_file_name(b.tau, b.input_cutoff, b.convention));
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(BLOCK_MAGIC);
    buf.extend_from_slice(&BLOCK_FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&b.tau.to_le_bytes());
    buf.extend_from_slice(&(b.input_cutoff as u64).to_le_bytes());
    buf.push(match b.convention {
        SignConvention::NegativeReflection => 0,
        SignConvention::PositiveReflection => 1,
    });
    buf.extend_from_slice(&(b.blocks.len() as u64).to_le_bytes());
    for block in &b.blocks {
        for v in block.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::File::create(&tmp)?.write_all(&buf)?;
    std::fs::rename(tmp, path)
}

fn load_blocks(
    dir: &PathBuf,
    tau: f64,
    input_cutoff: usize,
    convention: SignConvention,
) -> std::io::Result<BlockUnitary> {
    let path = dir.join(block_file_name(tau, input_cutoff, convention));
    let mut bytes = Vec::new();
    std::fs::File::open(&path)?.read_to_end(&mut bytes)?;
    let bad = || std::io::Error::new(std::io::ErrorKind::InvalidData, "corrupt block cache file");
    if bytes.len() < 8 + 4 + 8 + 8 + 1 + 8 || &bytes[..8] != BLOCK_MAGIC {
        return Err(bad());
    }
    let mut off = 8;
    let mut take = |n: usize| -> std::io::Result<&[u8]> {
        if off + n > bytes.len() {
            return Err(bad());
        }
        let s = &bytes[off..off + n];
        off += n;
        Ok(s)
    };
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    let file_tau = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let file_dim = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let file_conv = take(1)?[0];
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let conv_ok = match convention {
        SignConvention::NegativeReflection => file_conv == 0,
        SignConvention::PositiveReflection => file_conv == 1,
    };
    if version != BLOCK_FORMAT_VERSION
        || quantize_tau(file_tau) != quantize_tau(tau)
        || file_dim != input_cutoff
        || !conv_ok
        || count != 2 * (input_cutoff - 1) + 1
    {
        return Err(bad());
    }
    let mut blocks = Vec::with_capacity(count);
    for n in 0..count {
        let rows = n + 1;
        let mut m = DMatrix::zeros(rows, rows);
        for i in 0..rows * rows {
            let v = f64::from_le_bytes(take(8)?.try_into().unwrap());
            m[(i % rows, i / rows)] = v;
        }
        blocks.push(m);
    }
    Ok(BlockUnitary {
        tau,
        input_cutoff,
        convention,
        blocks,
    })
}

fn split_re_im(m: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let mut re = DMatrix::zeros(r, c);
    let mut im = DMatrix::zeros(r, c);
    for j in 0..c {
        for i in 0..r {
            re[(i, j)] = m[(i, j)].re;
            im[(i, j)] = m[(i, j)].im;
        }
    }
    (re, im)
}

/// First output port of `U (rho (x) sigma) U'`, computed blockwise, written
/// on `cfg.output_cutoff` levels with the cut weight recorded as deficit.
pub fn apply_bs(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    cfg: &ChannelConfig,
) -> Result<DensityMatrix> {
    let d = rho.dim();
    if sigma.dim() != d {
        return Err(AvcError::DimensionMismatch {
            left: d,
            right: sigma.dim(),
        });
    }
    if cfg.input_cutoff != d {
        return Err(AvcError::DimensionMismatch {
            left: cfg.input_cutoff,
            right: d,
        });
    }
    let blocks = block_unitary(cfg.tau, d, cfg.convention);
    let full = 2 * d - 1;

    let out_full = if rho.is_exactly_diagonal() && sigma.is_exactly_diagonal() {
        apply_diagonal(&rho.diagonal(), &sigma.diagonal(), &blocks, full)
    } else {
        apply_general(rho, sigma, &blocks, full)
    };

    finish_output(out_full, rho.trace_deficit(), sigma.trace_deficit(), cfg)
}

fn finish_output(
    out_full: DMatrix<Complex64>,
    deficit_rho: f64,
    deficit_sigma: f64,
    cfg: &ChannelConfig,
) -> Result<DensityMatrix> {
    let full = out_full.nrows();
    let keep = cfg.output_cutoff.min(full);
    let kept_trace: f64 = (0..keep).map(|i| out_full[(i, i)].re).sum();
    let dropped = (1.0 - kept_trace).max(0.0);
    let mut m = DMatrix::zeros(cfg.output_cutoff, cfg.output_cutoff);
    m.view_mut((0, 0), (keep, keep))
        .copy_from(&out_full.view((0, 0), (keep, keep)));
    let deficit = 1.0 - (1.0 - deficit_rho) * (1.0 - deficit_sigma) * (1.0 - dropped);
    let state = DensityMatrix::from_matrix(m, deficit)?;
    Ok(state)
}

/// Diagonal-input fast path: the output is diagonal with
/// `w[m] = sum_{n1,n2} rho_{n1} sigma_{n2} A^{(n1+n2)}[m, n1]^2`.
fn apply_diagonal(
    rho_diag: &[f64],
    sigma_diag: &[f64],
    blocks: &BlockUnitary,
    full: usize,
) -> DMatrix<Complex64> {
    let d = rho_diag.len();
    let mut w = vec![0.0f64; full];
    for n1 in 0..d {
        if rho_diag[n1] == 0.0 {
            continue;
        }
        for n2 in 0..d {
            let p = rho_diag[n1] * sigma_diag[n2];
            if p == 0.0 {
                continue;
            }
            let n = n1 + n2;
            let a = blocks.block(n);
            for m in 0..=n {
                let amp = a[(m, n1)];
                w[m] += p * amp * amp;
            }
        }
    }
    let mut out = DMatrix::zeros(full, full);
    for m in 0..full {
        out[(m, m)] = Complex64::new(w[m], 0.0);
    }
    out
}

/// General product input. For each ordered sector pair `(N, N')` the output
/// contributes along the diagonal offset `delta = N - N'`:
/// `w[m, m-delta] += (A_N R A_N'^T)[m, m-delta]` with
/// `R[n1, n1'] = rho[n1, n1'] sigma[N-n1, N'-n1']`.
fn apply_general(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    blocks: &BlockUnitary,
    full: usize,
) -> DMatrix<Complex64> {
    let d = rho.dim();
    let n_max = 2 * (d - 1);
    let (rho_re, rho_im) = split_re_im(rho.entries());
    let (sig_re, sig_im) = split_re_im(sigma.entries());
    let mut out = DMatrix::<Complex64>::zeros(full, full);

    for n in 0..=n_max {
        let lo = n.saturating_sub(d - 1);
        let hi = n.min(d - 1);
        let a_n = blocks.block(n);
        for np in 0..=n_max {
            let lop = np.saturating_sub(d - 1);
            let hip = np.min(d - 1);
            // R over the valid input ranges (complex via two real parts)
            let rows = hi - lo + 1;
            let cols = hip - lop + 1;
            let mut r_re = DMatrix::<f64>::zeros(rows, cols);
            let mut r_im = DMatrix::<f64>::zeros(rows, cols);
            let mut any = false;
            for (bi, n1) in (lo..=hi).enumerate() {
                for (bj, n1p) in (lop..=hip).enumerate() {
                    let s_re = sig_re[(n - n1, np - n1p)];
                    let s_im = sig_im[(n - n1, np - n1p)];
                    let p_re = rho_re[(n1, n1p)];
                    let p_im = rho_im[(n1, n1p)];
                    let re = p_re * s_re - p_im * s_im;
                    let im = p_re * s_im + p_im * s_re;
                    if re != 0.0 || im != 0.0 {
                        any = true;
                    }
                    r_re[(bi, bj)] = re;
                    r_im[(bi, bj)] = im;
                }
            }
            if !any {
                continue;
            }
            let a_sub = a_n.view((0, lo), (n + 1, rows));
            let t_re = a_sub * &r_re;
            let t_im = a_sub * &r_im;
            let a_np = blocks.block(np);
            // delta-strip accumulation: m' = m - delta, m2 = n - m shared
            let delta = n as isize - np as isize;
            let m_lo = delta.max(0) as usize;
            let m_hi = n.min((np as isize + delta) as usize);
            for m in m_lo..=m_hi {
                let mp = (m as isize - delta) as usize;
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                for (bj, n1p) in (lop..=hip).enumerate() {
                    let w = a_np[(mp, n1p)];
                    acc_re += t_re[(m, bj)] * w;
                    acc_im += t_im[(m, bj)] * w;
                }
                out[(m, mp)] += Complex64::new(acc_re, acc_im);
            }
        }
    }
    out
}

/// Semi-classical fast path: the jammed output of a coherent input is a
/// mixture of coherent states over the jammer's P representation (exact
/// displaced-thermal form for thermal jammers).
pub fn apply_bs_semiclassical(
    alpha: Complex64,
    jammer: &JammerSpec,
    cfg: &ChannelConfig,
) -> Result<DensityMatrix> {
    let dim = cfg.output_cutoff;
    let tau = cfg.tau;
    let taup = 1.0 - tau;
    let signal = alpha * tau.sqrt();
    match &jammer.kind {
        JammerKind::Thermal { mean_photons } => {
            displaced_thermal(signal, taup * mean_photons, dim)
        }
        JammerKind::Phav { radius } => {
            phase_ring_output(signal, Complex64::new(0.0, 0.0), taup.sqrt() * radius, dim, cfg.quadrature)
        }
        JammerKind::PhavMixture { components } => {
            let mut m = DMatrix::zeros(dim, dim);
            let mut deficit = 0.0;
            for (b, w) in components {
                let part = phase_ring_output(
                    signal,
                    Complex64::new(0.0, 0.0),
                    taup.sqrt() * b,
                    dim,
                    cfg.quadrature,
                )?;
                deficit += w * part.trace_deficit();
                m += part.entries() * Complex64::new(*w, 0.0);
            }
            DensityMatrix::from_matrix(m, deficit)
        }
        JammerKind::Dphav {
            center_re,
            center_im,
            radius,
        } => {
            let center = Complex64::new(*center_re, *center_im);
            phase_ring_output(
                signal,
                center * taup.sqrt(),
                taup.sqrt() * radius,
                dim,
                cfg.quadrature,
            )
        }
    }
}

/// Mixture of coherent states on the ring `base + shift + r e^{i phi}`.
fn phase_ring_output(
    base: Complex64,
    shift: Complex64,
    r: f64,
    dim: usize,
    quadrature: usize,
) -> Result<DensityMatrix> {
    let center = base + shift;
    if r == 0.0 {
        let (v, deficit) = coherent_amplitudes(center, dim);
        return Ok(DensityMatrix::pure_from_amplitudes(&v, deficit));
    }
    let m_points = quadrature.max(2);
    let w = 1.0 / m_points as f64;
    let mut m = DMatrix::zeros(dim, dim);
    let mut deficit = 0.0;
    for j in 0..m_points {
        let phi = 2.0 * std::f64::consts::PI * j as f64 * w;
        let (v, dj) = coherent_amplitudes(center + Complex64::from_polar(r, phi), dim);
        deficit += w * dj;
        for c in 0..dim {
            let vc = v[c].conj() * w;
            for row in 0..dim {
                m[(row, c)] += v[row] * vc;
            }
        }
    }
    DensityMatrix::from_matrix(m, deficit)
}

/// Displaced thermal state `D(gamma) S_nbar D(gamma)'` assembled from
/// displaced number-state columns, with the spectral and truncation deficits
/// recorded.
pub fn displaced_thermal(gamma: Complex64, nbar: f64, dim: usize) -> Result<DensityMatrix> {
    if nbar == 0.0 {
        let (v, deficit) = coherent_amplitudes(gamma, dim);
        return Ok(DensityMatrix::pure_from_amplitudes(&v, deficit));
    }
    let r = nbar / (nbar + 1.0);
    let n_eff = thermal_support(nbar, 1e-14).min(dim);
    let cols = displaced_fock_columns(gamma, n_eff.saturating_sub(1), dim);
    let mut m = DMatrix::zeros(dim, dim);
    let mut captured = 0.0;
    for (n, col) in cols.iter().enumerate() {
        let lambda = (1.0 - r) * (n as f64 * r.ln()).exp();
        captured += lambda * col.norm_squared();
        for c in 0..dim {
            let vc = col[c].conj() * lambda;
            for row in 0..dim {
                m[(row, c)] += col[row] * vc;
            }
        }
    }
    DensityMatrix::from_matrix(m, (1.0 - captured).max(0.0))
}

/// Number of thermal eigenvalues needed before the spectral tail of a
/// mean-`nbar` state drops below `tol`.
pub fn thermal_support(nbar: f64, tol: f64) -> usize {
    if nbar <= 0.0 {
        return 1;
    }
    let r = nbar / (nbar + 1.0);
    ((tol.ln() / r.ln()).ceil() as usize).max(1)
}

/// Columns `D(gamma)|n>` for `n = 0..=n_max` on `dim` levels, via
/// `D(gamma)|n> = (a' - conj(gamma)) D(gamma)|n-1> / sqrt(n)`.
pub fn displaced_fock_columns(
    gamma: Complex64,
    n_max: usize,
    dim: usize,
) -> Vec<DVector<Complex64>> {
    let (col0, _) = coherent_amplitudes(gamma, dim);
    let mut cols = Vec::with_capacity(n_max + 1);
    cols.push(col0);
    let gbar = gamma.conj();
    for n in 1..=n_max {
        let prev: &DVector<Complex64> = &cols[n - 1];
        let mut v = DVector::zeros(dim);
        let inv = 1.0 / (n as f64).sqrt();
        for m in 0..dim {
            let raised = if m >= 1 {
                prev[m - 1] * (m as f64).sqrt()
            } else {
                Complex64::new(0.0, 0.0)
            };
            v[m] = (raised - gbar * prev[m]) * inv;
        }
        cols.push(v);
    }
    cols
}

/// Real displacement matrix `<m|D(r)|n>` for real `r >= 0` on `dim` levels.
pub fn displacement_matrix_real(r: f64, dim: usize) -> DMatrix<f64> {
    let cols = displaced_fock_columns(Complex64::new(r, 0.0), dim - 1, dim);
    let mut m = DMatrix::zeros(dim, dim);
    for (n, col) in cols.iter().enumerate() {
        for row in 0..dim {
            m[(row, n)] = col[row].re;
        }
    }
    m
}

/// The pruning channel: keep levels `0..=level`, fold the remaining weight
/// onto the vacuum. Trace is preserved exactly; the matrix dimension is kept.
pub fn prune(rho: &DensityMatrix, level: usize) -> DensityMatrix {
    let d = rho.dim();
    if level >= d - 1 {
        return rho.clone();
    }
    let mut m = DMatrix::zeros(d, d);
    m.view_mut((0, 0), (level + 1, level + 1))
        .copy_from(&rho.entries().view((0, 0), (level + 1, level + 1)));
    let lost: f64 = (level + 1..d).map(|n| rho.entries()[(n, n)].re).sum();
    m[(0, 0)] += Complex64::new(lost, 0.0);
    DensityMatrix::from_matrix(m, rho.trace_deficit()).expect("prune preserves hermiticity")
}

/// The finite-dimensional jammed channel: semi-classical beam splitter
/// output followed by pruning at `level`.
pub fn jammed_channel(
    alpha: Complex64,
    jammer: &JammerSpec,
    level: usize,
    cfg: &ChannelConfig,
) -> Result<DensityMatrix> {
    Ok(prune(&apply_bs_semiclassical(alpha, jammer, cfg)?, level))
}
