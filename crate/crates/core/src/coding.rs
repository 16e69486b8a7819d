//! Small-blocklength simulation of codes on the jammed channel: random
//! Gaussian-grid codebooks, pretty-good-measurement decoding, worst-case
//! jammer search over product strategies, and the common-randomness average
//! over joint phase rotations and permutations of encoder and decoder.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamsplitter::{apply_bs_semiclassical, ChannelConfig};
use crate::error::{AvcError, Result};
use crate::fock::{check_subgaussian, Constellation, JammerSpec};
use crate::optim::{golden_section, nelder_mead};
use crate::par;

/// A blocklength-`k` code: `M` codewords of coherent amplitudes plus a
/// positive-operator decoder on the `k`-fold truncated space whose last
/// element collects the failure outcome.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub blocklength: usize,
    pub message_count: usize,
    pub codewords: Vec<Vec<Complex64>>,
    /// Per-symbol average energy budget `(1/k) sum_i |x_i|^2 <= E`.
    pub energy_budget: f64,
    pub per_mode_cutoff: usize,
    pub tau: f64,
    /// `message_count + 1` positive matrices summing to the identity.
    pub decoder: Vec<DMatrix<Complex64>>,
}

impl Codebook {
    pub fn block_dim(&self) -> usize {
        self.per_mode_cutoff.pow(self.blocklength as u32)
    }

    /// POVM positivity and completeness, plus the per-codeword energy bound.
    pub fn validate(&self) -> Result<()> {
        let dim = self.block_dim();
        if self.decoder.len() != self.message_count + 1 {
            return Err(AvcError::Invariant(format!(
                "decoder has {} elements, expected {}",
                self.decoder.len(),
                self.message_count + 1
            )));
        }
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for d in &self.decoder {
            let min_ev = d
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_ev < -1e-10 {
                return Err(AvcError::Invariant(format!(
                    "decoder element has eigenvalue {min_ev:.3e}"
                )));
            }
            sum += d;
        }
        let mut defect = 0.0f64;
        for c in 0..dim {
            for r in 0..dim {
                let target = if r == c { 1.0 } else { 0.0 };
                defect = defect.max((sum[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
        if defect > 1e-8 {
            return Err(AvcError::Invariant(format!(
                "decoder completeness defect {defect:.3e}"
            )));
        }
        for (m, word) in self.codewords.iter().enumerate() {
            let avg: f64 =
                word.iter().map(|x| x.norm_sqr()).sum::<f64>() / self.blocklength as f64;
            if avg > self.energy_budget + 1e-9 {
                return Err(AvcError::Invariant(format!(
                    "codeword {m} has per-symbol energy {avg} > {}",
                    self.energy_budget
                )));
            }
        }
        Ok(())
    }
}

/// Jammer behaviour over a block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum JammerStrategy {
    /// Same state on every slot.
    Iid(JammerSpec),
    /// One state per slot.
    Product(Vec<JammerSpec>),
    /// Convex mixture of per-slot products (closed under symmetrization).
    MixtureOfProducts(Vec<(f64, Vec<JammerSpec>)>),
}

impl JammerStrategy {
    fn products(&self, k: usize) -> Vec<(f64, Vec<JammerSpec>)> {
        match self {
            JammerStrategy::Iid(spec) => vec![(1.0, vec![spec.clone(); k])],
            JammerStrategy::Product(specs) => {
                assert_eq!(specs.len(), k);
                vec![(1.0, specs.clone())]
            }
            JammerStrategy::MixtureOfProducts(mix) => mix.clone(),
        }
    }

    /// Largest total energy over the mixture branches.
    pub fn total_energy(&self, k: usize) -> f64 {
        self.products(k)
            .iter()
            .map(|(_, specs)| specs.iter().map(|s| s.mean_energy).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Phase-average every factor and average over all slot permutations.
    pub fn symmetrized(&self, k: usize, quadrature: usize) -> Result<JammerStrategy> {
        let mut out: Vec<(f64, Vec<JammerSpec>)> = Vec::new();
        for (w, specs) in self.products(k) {
            let rotated: Vec<JammerSpec> = specs
                .iter()
                .map(|s| s.phase_averaged_spec(quadrature))
                .collect::<Result<_>>()?;
            let perms = permutations(k);
            let pw = w / perms.len() as f64;
            for p in perms {
                let arranged: Vec<JammerSpec> =
                    (0..k).map(|i| rotated[p[i]].clone()).collect();
                out.push((pw, arranged));
            }
        }
        Ok(JammerStrategy::MixtureOfProducts(out))
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let k = used.len();
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn per_mode_config(tau: f64, cutoff: usize) -> Result<ChannelConfig> {
    Ok(ChannelConfig::new(tau, cutoff)?
        .with_output_cutoff(cutoff)
        .with_quadrature(4 * cutoff))
}

/// Block output `(x)_i N_{sigma_i}(x_i)` for one product branch.
fn block_output(
    codeword: &[Complex64],
    specs: &[JammerSpec],
    tau: f64,
    cutoff: usize,
) -> Result<DMatrix<Complex64>> {
    let cfg = per_mode_config(tau, cutoff)?;
    let mut out: Option<DMatrix<Complex64>> = None;
    for (x, spec) in codeword.iter().zip(specs) {
        let mode = apply_bs_semiclassical(*x, spec, &cfg)?;
        out = Some(match out {
            None => mode.entries().clone(),
            Some(acc) => acc.kronecker(mode.entries()),
        });
    }
    out.ok_or_else(|| AvcError::Domain("empty codeword".into()))
}

/// Channel output of a codeword under a (possibly mixed) jammer strategy.
pub fn strategy_output(
    codeword: &[Complex64],
    strategy: &JammerStrategy,
    tau: f64,
    cutoff: usize,
) -> Result<DMatrix<Complex64>> {
    let k = codeword.len();
    let dim = cutoff.pow(k as u32);
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for (w, specs) in strategy.products(k) {
        acc += block_output(codeword, &specs, tau, cutoff)? * Complex64::new(w, 0.0);
    }
    Ok(acc)
}

/// Average success probability `(1/M) sum_m tr(D_m out_m)` at one strategy.
pub fn success_probability(code: &Codebook, strategy: &JammerStrategy) -> Result<f64> {
    let outputs = par::map_indexed(code.message_count, |m| {
        strategy_output(&code.codewords[m], strategy, code.tau, code.per_mode_cutoff)
    });
    let mut total = 0.0;
    for (m, out) in outputs.into_iter().enumerate() {
        let out = out?;
        let p = (&code.decoder[m] * out).trace().re;
        total += p;
    }
    Ok((total / code.message_count as f64).clamp(0.0, 1.0))
}

/// Pretty-good measurement for the given output states: each element is
/// `S^{-1/2} rho_m S^{-1/2}` with `S = sum_m rho_m` inverted on its support;
/// the returned list carries the complementary failure element last.
pub fn pgm_decoder(outputs: &[DMatrix<Complex64>]) -> Result<Vec<DMatrix<Complex64>>> {
    if outputs.is_empty() {
        return Err(AvcError::Domain("no output states for the decoder".into()));
    }
    let dim = outputs[0].nrows();
    let mut s = DMatrix::<Complex64>::zeros(dim, dim);
    for o in outputs {
        if o.nrows() != dim {
            return Err(AvcError::DimensionMismatch {
                left: dim,
                right: o.nrows(),
            });
        }
        s += o;
    }
    let se = s.symmetric_eigen();
    let max_ev = se.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-12 * max_ev.max(1.0);
    let mut inv_sqrt = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..dim {
        let ev = se.eigenvalues[j];
        if ev > tol {
            let v = se.eigenvectors.column(j);
            inv_sqrt += v * v.adjoint() * Complex64::new(1.0 / ev.sqrt(), 0.0);
        }
    }
    let mut povm: Vec<DMatrix<Complex64>> = outputs
        .iter()
        .map(|o| &inv_sqrt * o * &inv_sqrt)
        .collect();
    let mut fail = DMatrix::<Complex64>::identity(dim, dim);
    for p in &povm {
        fail -= p;
    }
    povm.push(fail);
    Ok(povm)
}

/// Codebook generation parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodebookConfig {
    pub blocklength: usize,
    pub message_count: usize,
    /// Per-symbol average energy bound for every codeword.
    pub energy_budget: f64,
    pub tau: f64,
    pub per_mode_cutoff: usize,
    /// Typicality pruning: keep draws with
    /// `|| type(x^k) - base weights ||_1 <= delta` (infinite disables it).
    pub pruning_delta: f64,
    /// Decoder is the pretty-good measurement against this jammer.
    pub design_jammer: JammerSpec,
    pub max_tries: usize,
}

/// Draw a codebook i.i.d. from the base constellation, rejecting draws that
/// break the energy or typicality constraint, then attach the PGM decoder.
pub fn draw_codebook(base: &Constellation, cfg: &CodebookConfig, seed: u64) -> Result<Codebook> {
    if cfg.blocklength == 0 || cfg.message_count == 0 {
        return Err(AvcError::Config("blocklength and message count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cumulative: Vec<f64> = {
        let mut acc = 0.0;
        base.weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect()
    };
    let mut codewords = Vec::with_capacity(cfg.message_count);
    let mut tries = 0usize;
    while codewords.len() < cfg.message_count {
        tries += 1;
        if tries > cfg.max_tries {
            return Err(AvcError::RejectionBudget {
                tries,
                accepted: codewords.len(),
                needed: cfg.message_count,
            });
        }
        let mut word = Vec::with_capacity(cfg.blocklength);
        let mut counts = vec![0usize; base.len()];
        for _ in 0..cfg.blocklength {
            let u: f64 = rng.gen();
            let mut idx = base.len() - 1;
            for (i, c) in cumulative.iter().enumerate() {
                if u <= *c {
                    idx = i;
                    break;
                }
            }
            counts[idx] += 1;
            word.push(base.point(idx));
        }
        let avg_energy: f64 =
            word.iter().map(|x| x.norm_sqr()).sum::<f64>() / cfg.blocklength as f64;
        if avg_energy > cfg.energy_budget {
            continue;
        }
        if cfg.pruning_delta.is_finite() {
            let l1: f64 = (0..base.len())
                .map(|i| (counts[i] as f64 / cfg.blocklength as f64 - base.weight(i)).abs())
                .sum();
            if l1 > cfg.pruning_delta {
                continue;
            }
        }
        codewords.push(word);
    }
    let outputs: Vec<DMatrix<Complex64>> = codewords
        .iter()
        .map(|w| {
            block_output(
                w,
                &vec![cfg.design_jammer.clone(); cfg.blocklength],
                cfg.tau,
                cfg.per_mode_cutoff,
            )
        })
        .collect::<Result<_>>()?;
    let decoder = pgm_decoder(&outputs)?;
    let code = Codebook {
        blocklength: cfg.blocklength,
        message_count: cfg.message_count,
        codewords,
        energy_budget: cfg.energy_budget,
        per_mode_cutoff: cfg.per_mode_cutoff,
        tau: cfg.tau,
        decoder,
    };
    code.validate()?;
    Ok(code)
}

/// Product-strategy families searched by [`worst_case_jammer`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductJammerFamily {
    /// Vacuum on every slot (singleton family).
    Vacuum,
    /// Thermal state of one mean photon number on every slot.
    IidThermal,
    /// One ring radius on every slot.
    IidPhav,
    /// Per-slot coherent amplitudes (as zero-radius displaced rings),
    /// subject to the block energy bound and the empirical sub-Gaussian
    /// admission check.
    CoherentProduct,
}

/// Search the configured families for the lowest success probability.
/// The result is an upper bound on the true worst case.
pub fn worst_case_jammer(
    code: &Codebook,
    families: &[ProductJammerFamily],
    power: f64,
) -> Result<(f64, JammerStrategy)> {
    if families.is_empty() {
        return Err(AvcError::EmptyFamily);
    }
    let k = code.blocklength;
    let mut best: Option<(f64, JammerStrategy)> = None;
    let mut pending_err: Option<AvcError> = None;
    let consider = |v: f64, s: JammerStrategy, best: &mut Option<(f64, JammerStrategy)>| {
        if best.as_ref().map(|(b, _)| v < *b).unwrap_or(true) {
            *best = Some((v, s));
        }
    };
    for family in families {
        match family {
            ProductJammerFamily::Vacuum => {
                let s = JammerStrategy::Iid(JammerSpec::vacuum());
                let v = success_probability(code, &s)?;
                consider(v, s, &mut best);
            }
            ProductJammerFamily::IidThermal => {
                let mut eval = |n: f64| {
                    let s = JammerStrategy::Iid(JammerSpec::thermal(n.max(0.0)));
                    match success_probability(code, &s) {
                        Ok(v) => v,
                        Err(e) => {
                            pending_err.get_or_insert(e);
                            f64::INFINITY
                        }
                    }
                };
                let (argmin, v, _) =
                    golden_section(0.0, power, 1e-6 * power.max(1.0), 60, &mut eval);
                consider(
                    v,
                    JammerStrategy::Iid(JammerSpec::thermal(argmin)),
                    &mut best,
                );
            }
            ProductJammerFamily::IidPhav => {
                let bmax = power.sqrt();
                let mut eval = |b: f64| {
                    let s = JammerStrategy::Iid(JammerSpec::phav(b.max(0.0)));
                    match success_probability(code, &s) {
                        Ok(v) => v,
                        Err(e) => {
                            pending_err.get_or_insert(e);
                            f64::INFINITY
                        }
                    }
                };
                let (argmin, v, _) = golden_section(0.0, bmax, 1e-6 * bmax.max(1.0), 60, &mut eval);
                consider(v, JammerStrategy::Iid(JammerSpec::phav(argmin)), &mut best);
            }
            ProductJammerFamily::CoherentProduct => {
                let scale = (k as f64 * power).sqrt();
                let build = |p: &[f64]| -> Option<JammerStrategy> {
                    let mut betas: Vec<Complex64> = (0..k)
                        .map(|i| Complex64::new(p[2 * i], p[2 * i + 1]))
                        .collect();
                    let total: f64 = betas.iter().map(|b| b.norm_sqr()).sum();
                    if total > k as f64 * power {
                        let shrink = (k as f64 * power / total).sqrt();
                        for b in betas.iter_mut() {
                            *b *= shrink;
                        }
                    }
                    // admission: the empirical modulus distribution must be
                    // sub-Gaussian with K^2 <= P
                    let samples: Vec<(f64, f64)> =
                        betas.iter().map(|b| (b.norm(), 1.0 / k as f64)).collect();
                    if !check_subgaussian(&samples, power.sqrt()).holds {
                        return None;
                    }
                    Some(JammerStrategy::Product(
                        betas
                            .iter()
                            .map(|b| JammerSpec::dphav(*b, 0.0))
                            .collect(),
                    ))
                };
                let mut eval = |p: &[f64]| match build(p) {
                    None => f64::INFINITY,
                    Some(s) => match success_probability(code, &s) {
                        Ok(v) => v,
                        Err(e) => {
                            pending_err.get_or_insert(e);
                            f64::INFINITY
                        }
                    },
                };
                let start: Vec<f64> = (0..2 * k)
                    .map(|i| 0.3 * scale * if i % 2 == 0 { 1.0 } else { -0.5 })
                    .collect();
                let step = vec![0.3 * scale; 2 * k];
                let bounds = vec![(-scale, scale); 2 * k];
                let (p, v, _) = nelder_mead(&start, &step, &bounds, 1e-7, 80, &mut eval);
                if let Some(s) = build(&p) {
                    consider(v, s, &mut best);
                }
            }
        }
    }
    if let Some(e) = pending_err {
        return Err(e);
    }
    best.ok_or(AvcError::EmptyFamily)
}

fn permute_index(x: usize, perm: &[usize], d: usize, k: usize) -> usize {
    // digit j of x (slot j, stride d^{k-1-j}) moves to slot perm-position
    let mut digits = vec![0usize; k];
    let mut xr = x;
    for j in (0..k).rev() {
        digits[j] = xr % d;
        xr /= d;
    }
    let mut y = 0usize;
    for j in 0..k {
        // slot j of the permuted state holds former slot perm[j]
        y = y * d + digits[perm[j]];
    }
    y
}

/// Conjugate a block operator by the permutation unitary and the per-slot
/// phase rotations: `U_pi (x V(theta_i)) Op (x V(-theta_i)) U_pi^{-1}`.
fn rotate_permute_operator(
    op: &DMatrix<Complex64>,
    thetas: &[f64],
    perm: &[usize],
    d: usize,
) -> DMatrix<Complex64> {
    let k = thetas.len();
    let dim = op.nrows();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    // phase of basis index under (x) V(theta): sum_j theta_j n_j
    let phase_of = |x: usize| -> f64 {
        let mut acc = 0.0;
        let mut xr = x;
        for j in (0..k).rev() {
            acc += thetas[j] * (xr % d) as f64;
            xr /= d;
        }
        acc
    };
    for x in 0..dim {
        let px = permute_index(x, perm, d, k);
        let phx = phase_of(x);
        for y in 0..dim {
            let v = op[(x, y)];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let py = permute_index(y, perm, d, k);
            let ph = phx - phase_of(y);
            out[(px, py)] = v * Complex64::from_polar(1.0, ph);
        }
    }
    out
}

/// Monte Carlo common-randomness report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrReport {
    pub mc_mean: f64,
    pub mc_std_error: f64,
    /// Success of the unrotated code against the symmetrized jammer, which
    /// the phase/permutation average reproduces.
    pub symmetrized_value: f64,
    pub samples: usize,
}

/// Estimate the success probability of the common-randomness code: encoder
/// and decoder jointly rotated by uniform per-slot phases and a uniform slot
/// permutation, averaged over `samples` draws against the fixed strategy.
pub fn cr_average(
    code: &Codebook,
    strategy: &JammerStrategy,
    samples: usize,
    seed: u64,
) -> Result<CrReport> {
    if samples == 0 {
        return Err(AvcError::Domain("need at least one sample".into()));
    }
    let k = code.blocklength;
    let d = code.per_mode_cutoff;
    let values = par::map_indexed(samples, |s| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(s as u64),
        );
        let thetas: Vec<f64> = (0..k)
            .map(|_| rng.gen::<f64>() * 2.0 * std::f64::consts::PI)
            .collect();
        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let mut total = 0.0;
        for m in 0..code.message_count {
            // rotated, permuted codeword: slot j carries former slot perm[j]
            let word: Vec<Complex64> = (0..k)
                .map(|j| {
                    code.codewords[m][perm[j]]
                        * Complex64::from_polar(1.0, thetas[perm[j]])
                })
                .collect();
            let out = strategy_output(&word, strategy, code.tau, d)?;
            let dm = rotate_permute_operator(&code.decoder[m], &thetas, &perm, d);
            total += (dm * out).trace().re;
        }
        Ok(total / code.message_count as f64)
    });
    let mut vals = Vec::with_capacity(samples);
    for v in values {
        vals.push(v?);
    }
    let mean: f64 = vals.iter().sum::<f64>() / samples as f64;
    let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (samples.max(2) - 1) as f64;
    let symmetrized = success_probability(code, &strategy.symmetrized(k, 64)?)?;
    Ok(CrReport {
        mc_mean: mean,
        mc_std_error: (var / samples as f64).sqrt(),
        symmetrized_value: symmetrized,
        samples,
    })
}
