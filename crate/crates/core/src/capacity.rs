//! Discretized min-max evaluation of the jammed-channel capacity
//! `sup_mu inf_sigma chi(mu; N_sigma)` over Gaussian grid constellations and
//! parametric jammer families, together with the thermal closed form
//! `g(tau E + tau' P) - g(tau' P)`.
//!
//! The hot path exploits displacement covariance twice. First, every
//! conditional output entropy equals the alpha = 0 output entropy, so the
//! subtracted term is a cheap diagonal computation. Second, the averaged
//! output against a thermal jammer is `sum_n lambda_n M_n` where
//! `M_n = sum_i w_i D(g_i)|n><n|D(g_i)'` depends only on the constellation,
//! so a whole thermal-family search reuses one set of `M_n` aggregates.
//! Ring (phase-averaged) jammers are handled by an exact continuous phase
//! average: conjugating by `D(r e^{i phi})` and integrating over `phi` keeps
//! only index-diagonal transfer terms, an `O(D^3)` contraction.

use std::collections::HashMap;
use std::sync::RwLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::beamsplitter::{
    displaced_fock_columns, displacement_matrix_real, thermal_support, ChannelConfig,
};
use crate::entropy::{binary_entropy, entropy_of_eigenvalues, gordon_g, von_neumann_entropy};
use crate::error::{AvcError, Result};
use crate::fock::{choose_cutoff, poisson_ln_pmf, Constellation, DensityMatrix, JammerKind, JammerSpec};
use crate::optim::{golden_section, nelder_mead};
use crate::par;

/// `g(tau E + tau' P) - g(tau' P)` in bits.
pub fn closed_form_capacity(tau: f64, energy: f64, power: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(AvcError::Domain(format!("tau must be in [0,1], got {tau}")));
    }
    if energy < 0.0 || power < 0.0 {
        return Err(AvcError::Domain(
            "energy and power budgets must be >= 0".into(),
        ));
    }
    let taup = 1.0 - tau;
    Ok(gordon_g(tau * energy + taup * power)? - gordon_g(taup * power)?)
}

/// Square-grid discretization parameters for the input distribution.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    /// Box side / grid spacing.
    pub spacing: f64,
    /// Square of the disk radius actually covered by grid points.
    pub radius_sq: f64,
    /// Coupled disk parameter `1 / spacing`; the grid always covers
    /// `{ |a|^2 <= radius_sq }` with `radius_sq >= 1 / spacing`.
    pub coupled_disk: f64,
}

impl GridSpec {
    /// The covered disk is the larger of the `1/spacing` coupling and a
    /// `10 E'` energy disk, so the Gaussian mass and energy tails outside
    /// the grid stay negligible (`e^{-10}` mass) for every variance.
    pub fn new(spacing: f64, e_prime: f64) -> Result<Self> {
        if spacing <= 0.0 {
            return Err(AvcError::Domain(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        let coupled = 1.0 / spacing;
        Ok(Self {
            spacing,
            radius_sq: coupled.max(10.0 * e_prime),
            coupled_disk: coupled,
        })
    }

    /// Number of grid points inside the covered disk.
    pub fn point_count(&self) -> usize {
        let imax = (self.radius_sq.sqrt() / self.spacing).ceil() as i64;
        let mut count = 0usize;
        for i in -imax..=imax {
            for j in -imax..=imax {
                let x = i as f64 * self.spacing;
                let y = j as f64 * self.spacing;
                if x * x + y * y <= self.radius_sq {
                    count += 1;
                }
            }
        }
        count
    }
}

fn normal_cdf(x: f64, sd: f64) -> f64 {
    0.5 * (1.0 + erf(x / (sd * std::f64::consts::SQRT_2)))
}

/// Discretize a mean-zero complex Gaussian of variance `e_prime` onto the
/// grid: each point carries the Gaussian mass of its surrounding box,
/// renormalized over the covered disk. Points are pruned from the outside
/// in until the mean energy respects `budget`.
pub fn build_grid_constellation(
    e_prime: f64,
    budget: f64,
    grid: &GridSpec,
) -> Result<Constellation> {
    if e_prime >= budget && budget > 0.0 {
        return Err(AvcError::Domain(format!(
            "grid variance {e_prime} must stay below the energy budget {budget}"
        )));
    }
    if e_prime <= 1e-12 {
        return Ok(Constellation::single(Complex64::new(0.0, 0.0)));
    }
    let sd = (e_prime / 2.0).sqrt();
    let eps = grid.spacing;
    let imax = (grid.radius_sq.sqrt() / eps).ceil() as i64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in -imax..=imax {
        let x = i as f64 * eps;
        let wx = normal_cdf(x + eps / 2.0, sd) - normal_cdf(x - eps / 2.0, sd);
        for j in -imax..=imax {
            let y = j as f64 * eps;
            if x * x + y * y > grid.radius_sq {
                continue;
            }
            let wy = normal_cdf(y + eps / 2.0, sd) - normal_cdf(y - eps / 2.0, sd);
            points.push(Complex64::new(x, y));
            weights.push(wx * wy);
        }
    }
    let mut c = Constellation::new(points.clone(), weights.clone())?;
    // prune outermost boxes until the energy budget holds
    while c.mean_energy() > budget {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].norm_sqr().partial_cmp(&points[b].norm_sqr()).unwrap());
        let drop = *order.last().unwrap();
        points.remove(drop);
        weights.remove(drop);
        if points.is_empty() {
            return Err(AvcError::Domain(
                "energy pruning emptied the constellation".into(),
            ));
        }
        c = Constellation::new(points.clone(), weights.clone())?;
    }
    Ok(c)
}

/// Parametric jammer families searched by the inner minimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammerFamily {
    /// Thermal states of mean photon number in `[0, P]`.
    Thermal,
    /// Single phase-averaged ring of radius in `[0, sqrt(P)]`.
    Phav,
    /// Mixture of `components` rings under the power budget.
    PhavMixture { components: usize },
    /// Displaced ring with `|center|^2 + radius^2 <= P`.
    Dphav,
}

/// Precomputed channel data for one constellation at fixed transmissivity:
/// the displaced number-state aggregates `M_n`, their captured masses, and a
/// memo of ring-jammer averages.
pub struct GridChannelCache {
    tau: f64,
    dim: usize,
    n_cols: usize,
    aggregates: Vec<DMatrix<Complex64>>,
    captured: Vec<f64>,
    ring_memo: RwLock<HashMap<u64, (f64, f64)>>,
    max_power: f64,
}

impl GridChannelCache {
    /// Build the aggregates on `dim` levels with enough displaced columns to
    /// cover thermal jammers up to power `max_power`.
    pub fn build(c: &Constellation, tau: f64, max_power: f64, dim: usize) -> Self {
        let taup = 1.0 - tau;
        let n_cols = thermal_support(taup * max_power, 1e-13).min(dim);
        let mut aggregates = vec![DMatrix::<Complex64>::zeros(dim, dim); n_cols];
        let mut captured = vec![0.0f64; n_cols];
        let sqrt_tau = tau.sqrt();
        let chunk = 256usize;
        let total = c.len();
        let mut lo = 0usize;
        while lo < total {
            let hi = (lo + chunk).min(total);
            // columns for this chunk of grid points, in parallel
            let cols: Vec<Vec<DVector<Complex64>>> = par::map_indexed(hi - lo, |k| {
                let gamma = c.point(lo + k) * sqrt_tau;
                displaced_fock_columns(gamma, n_cols - 1, dim)
            });
            // accumulate each aggregate independently (order fixed by chunk
            // then in-chunk index, independent of thread count)
            let updates: Vec<(DMatrix<Complex64>, f64)> = par::map_indexed(n_cols, |n| {
                let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
                let mut mass = 0.0;
                for (k, point_cols) in cols.iter().enumerate() {
                    let w = c.weight(lo + k);
                    let col = &point_cols[n];
                    mass += w * col.norm_squared();
                    for cc in 0..dim {
                        let vc = col[cc].conj() * w;
                        for rr in 0..dim {
                            acc[(rr, cc)] += col[rr] * vc;
                        }
                    }
                }
                (acc, mass)
            });
            for (n, (acc, mass)) in updates.into_iter().enumerate() {
                aggregates[n] += acc;
                captured[n] += mass;
            }
            lo = hi;
        }
        Self {
            tau,
            dim,
            n_cols,
            aggregates,
            captured,
            ring_memo: RwLock::new(HashMap::new()),
            max_power,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Averaged output against a thermal jammer of mean photon number `nbar`.
    pub fn average_thermal(&self, nbar: f64) -> Result<DensityMatrix> {
        let noise = (1.0 - self.tau) * nbar;
        let mut m = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        let mut mass = 0.0;
        if noise == 0.0 {
            m += &self.aggregates[0];
            mass += self.captured[0];
        } else {
            let r = noise / (noise + 1.0);
            for n in 0..self.n_cols {
                let lambda = (1.0 - r) * (n as f64 * r.ln()).exp();
                if lambda < 1e-17 {
                    break;
                }
                m += &self.aggregates[n] * Complex64::new(lambda, 0.0);
                mass += lambda * self.captured[n];
            }
        }
        let deficit = (1.0 - mass).max(0.0);
        if deficit > 1e-6 {
            return Err(AvcError::NumericalBudget(format!(
                "thermal average lost {deficit:.3e} mass at cutoff {}",
                self.dim
            )));
        }
        DensityMatrix::from_matrix(m, deficit)
    }

    /// Entropy (bits) and deficit of the averaged output against a ring
    /// jammer of radius `b`, via the exact continuous phase average of
    /// `D(r e^{i phi}) rho_loss D(r e^{i phi})'` with `r = sqrt(tau') b`.
    fn ring_entropy(&self, b: f64) -> Result<(f64, f64)> {
        let key = (b * 1e12).round() as u64;
        if let Some(hit) = self.ring_memo.read().unwrap().get(&key) {
            return Ok(*hit);
        }
        let r = (1.0 - self.tau).sqrt() * b;
        let rho_loss = &self.aggregates[0];
        let value = if r == 0.0 {
            let ent = entropy_of_eigenvalues(&crate::entropy::hermitian_eigenvalues(rho_loss))?;
            (ent.value_bits, (1.0 - self.captured[0]).max(0.0))
        } else {
            let d = self.dim;
            let disp = displacement_matrix_real(r, d);
            // per output diagonal offset: out[m, m-k] =
            //   sum_a disp[m, a] rho_loss[a, a-k] disp[m-k, a-k]
            let diagonals: Vec<Vec<Complex64>> = par::map_indexed(d, |k| {
                let mut diag = vec![Complex64::new(0.0, 0.0); d - k];
                for (row, item) in diag.iter_mut().enumerate() {
                    let m = row + k;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in k..d {
                        let x = rho_loss[(a, a - k)];
                        if x.re == 0.0 && x.im == 0.0 {
                            continue;
                        }
                        acc += x * (disp[(m, a)] * disp[(m - k, a - k)]);
                    }
                    *item = acc;
                }
                diag
            });
            let mut out = DMatrix::<Complex64>::zeros(d, d);
            for (k, diag) in diagonals.iter().enumerate() {
                for (row, v) in diag.iter().enumerate() {
                    let m = row + k;
                    out[(m, m - k)] = *v;
                    if k > 0 {
                        out[(m - k, m)] = v.conj();
                    }
                }
            }
            let trace: f64 = (0..d).map(|i| out[(i, i)].re).sum();
            let deficit = (1.0 - trace).max(0.0);
            if deficit > 1e-6 {
                return Err(AvcError::NumericalBudget(format!(
                    "ring average lost {deficit:.3e} mass at cutoff {d}"
                )));
            }
            let state = DensityMatrix::from_matrix(out, deficit)?;
            (von_neumann_entropy(&state)?.value_bits, deficit)
        };
        self.ring_memo.write().unwrap().insert(key, value);
        Ok(value)
    }

    /// Entropy of the alpha = 0 conditional output for this jammer; by
    /// displacement covariance this is the conditional term of chi.
    fn conditional_entropy(&self, jammer: &JammerSpec) -> Result<f64> {
        let taup = 1.0 - self.tau;
        let diag_entropy = |diag: Vec<f64>| entropy_of_eigenvalues(&diag).map(|r| r.value_bits);
        match &jammer.kind {
            JammerKind::Thermal { mean_photons } => {
                let noise = taup * mean_photons;
                if noise == 0.0 {
                    return Ok(0.0);
                }
                let r = noise / (noise + 1.0);
                diag_entropy(
                    (0..self.dim)
                        .map(|n| (1.0 - r) * (n as f64 * r.ln()).exp())
                        .collect(),
                )
            }
            JammerKind::Phav { radius } => {
                let mean = taup * radius * radius;
                diag_entropy((0..self.dim).map(|n| poisson_ln_pmf(n, mean).exp()).collect())
            }
            JammerKind::PhavMixture { components } => {
                let mut diag = vec![0.0f64; self.dim];
                for (b, w) in components {
                    let mean = taup * b * b;
                    for (n, item) in diag.iter_mut().enumerate() {
                        *item += w * poisson_ln_pmf(n, mean).exp();
                    }
                }
                diag_entropy(diag)
            }
            // a displaced ring is a displaced copy of the centered ring, so
            // its conditional entropy equals the centered one
            JammerKind::Dphav { radius, .. } => {
                let mean = taup * radius * radius;
                diag_entropy((0..self.dim).map(|n| poisson_ln_pmf(n, mean).exp()).collect())
            }
        }
    }

    /// Holevo quantity of the cached constellation against one jammer.
    pub fn chi(&self, jammer: &JammerSpec) -> Result<f64> {
        let average_entropy = match &jammer.kind {
            JammerKind::Thermal { mean_photons } => {
                if *mean_photons > self.max_power + 1e-9 {
                    return Err(AvcError::Domain(format!(
                        "cache built for power {} cannot evaluate thermal({mean_photons})",
                        self.max_power
                    )));
                }
                von_neumann_entropy(&self.average_thermal(*mean_photons)?)?.value_bits
            }
            JammerKind::Phav { radius } => self.ring_entropy(*radius)?.0,
            JammerKind::PhavMixture { components } => {
                // need the mixed matrix, not mixed entropies
                let d = self.dim;
                let mut m = DMatrix::<Complex64>::zeros(d, d);
                let mut deficit = 0.0;
                for (b, w) in components {
                    let part = self.ring_average_matrix(*b)?;
                    deficit += w * part.1;
                    m += part.0 * Complex64::new(*w, 0.0);
                }
                let state = DensityMatrix::from_matrix(m, deficit)?;
                von_neumann_entropy(&state)?.value_bits
            }
            // the center displacement conjugates the average by a unitary
            // and leaves its entropy unchanged
            JammerKind::Dphav { radius, .. } => self.ring_entropy(*radius)?.0,
        };
        Ok((average_entropy - self.conditional_entropy(jammer)?).max(0.0))
    }

    /// Averaged-output matrix for a centered ring jammer (not memoized).
    fn ring_average_matrix(&self, b: f64) -> Result<(DMatrix<Complex64>, f64)> {
        let r = (1.0 - self.tau).sqrt() * b;
        let d = self.dim;
        let rho_loss = &self.aggregates[0];
        if r == 0.0 {
            return Ok((rho_loss.clone(), (1.0 - self.captured[0]).max(0.0)));
        }
        let disp = displacement_matrix_real(r, d);
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d {
            for m in k..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in k..d {
                    let x = rho_loss[(a, a - k)];
                    if x.re == 0.0 && x.im == 0.0 {
                        continue;
                    }
                    acc += x * (disp[(m, a)] * disp[(m - k, a - k)]);
                }
                out[(m, m - k)] = acc;
                if k > 0 {
                    out[(m - k, m)] = acc.conj();
                }
            }
        }
        let trace: f64 = (0..d).map(|i| out[(i, i)].re).sum();
        Ok((out, (1.0 - trace).max(0.0)))
    }

    /// Total unaccounted probability mass in the thermal aggregates at the
    /// working power, a bound on the assembly truncation error.
    pub fn deficit_at_power(&self, power: f64) -> f64 {
        let noise = (1.0 - self.tau) * power;
        if noise == 0.0 {
            return (1.0 - self.captured[0]).max(0.0);
        }
        let r = noise / (noise + 1.0);
        let mut mass = 0.0;
        for n in 0..self.n_cols {
            mass += (1.0 - r) * (n as f64 * r.ln()).exp() * self.captured[n];
        }
        (1.0 - mass).max(0.0)
    }
}

/// Outcome of the inner jammer minimization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InnerMinOutcome {
    pub value_bits: f64,
    pub jammer: JammerSpec,
    /// Best-so-far values over the search, non-increasing.
    pub trace: Vec<f64>,
}

/// Minimize chi over the given jammer families at power budget `power`,
/// using the prebuilt cache. Ties go to the lowest-energy jammer.
pub fn inner_min_jammer_cached(
    cache: &GridChannelCache,
    families: &[JammerFamily],
    power: f64,
) -> Result<InnerMinOutcome> {
    if families.is_empty() {
        return Err(AvcError::EmptyFamily);
    }
    let mut best: Option<(f64, JammerSpec)> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut err: Option<AvcError> = None;
    let consider = |value: f64, jammer: JammerSpec, best: &mut Option<(f64, JammerSpec)>| {
        let better = match best {
            None => true,
            Some((v, j)) => {
                value < *v - 1e-12 || (value < *v + 1e-12 && jammer.mean_energy < j.mean_energy)
            }
        };
        if better {
            *best = Some((value, jammer));
        }
    };
    for family in families {
        match family {
            JammerFamily::Thermal => {
                let mut eval = |n: f64| match cache.chi(&JammerSpec::thermal(n)) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::INFINITY
                    }
                };
                let (argmin, value, t) = golden_section(0.0, power, 1e-7 * power.max(1.0), 80, &mut eval);
                trace.extend(t);
                consider(value, JammerSpec::thermal(argmin), &mut best);
            }
            JammerFamily::Phav => {
                let bmax = power.sqrt();
                let mut eval = |b: f64| match cache.chi(&JammerSpec::phav(b)) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::INFINITY
                    }
                };
                let (argmin, value, t) = golden_section(0.0, bmax, 1e-7 * bmax.max(1.0), 80, &mut eval);
                trace.extend(t);
                consider(value, JammerSpec::phav(argmin), &mut best);
            }
            JammerFamily::PhavMixture { components } => {
                let k = (*components).clamp(2, 4);
                let bmax = power.sqrt();
                // parameters: k raw weights in [0.05, 1] then k radii
                let build = |p: &[f64]| -> Result<JammerSpec> {
                    let raw: Vec<f64> = p[..k].iter().map(|u| u.max(1e-3)).collect();
                    let total: f64 = raw.iter().sum();
                    let comps: Vec<(f64, f64)> = (0..k)
                        .map(|i| (p[k + i].clamp(0.0, bmax), raw[i] / total))
                        .collect();
                    JammerSpec::phav_mixture(comps)
                };
                let mut eval = |p: &[f64]| match build(p).and_then(|j| cache.chi(&j)) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::INFINITY
                    }
                };
                let mut start = vec![0.5; 2 * k];
                let mut step = vec![0.3; 2 * k];
                let mut bounds = vec![(0.05, 1.0); 2 * k];
                for i in 0..k {
                    start[k + i] = bmax * (0.4 + 0.5 * i as f64 / k.max(1) as f64);
                    step[k + i] = 0.25 * bmax;
                    bounds[k + i] = (0.0, bmax);
                }
                let (p, value, t) = nelder_mead(&start, &step, &bounds, 1e-7, 120, &mut eval);
                trace.extend(t);
                if let Ok(j) = build(&p) {
                    consider(value, j, &mut best);
                }
            }
            JammerFamily::Dphav => {
                let smax = power.sqrt();
                let build = |p: &[f64]| {
                    let center = p[0].clamp(0.0, smax);
                    let radius = (power - center * center).max(0.0).sqrt() * p[1].clamp(0.0, 1.0);
                    JammerSpec::dphav(Complex64::new(center, 0.0), radius)
                };
                let mut eval = |p: &[f64]| match cache.chi(&build(p)) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::INFINITY
                    }
                };
                let (p, value, t) = nelder_mead(
                    &[0.3 * smax, 0.9],
                    &[0.3 * smax, -0.4],
                    &[(0.0, smax), (0.0, 1.0)],
                    1e-7,
                    80,
                    &mut eval,
                );
                trace.extend(t);
                consider(value, build(&p), &mut best);
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    let (value_bits, jammer) = best.ok_or(AvcError::EmptyFamily)?;
    let mut running = f64::INFINITY;
    for v in trace.iter_mut() {
        running = running.min(*v);
        *v = running;
    }
    Ok(InnerMinOutcome {
        value_bits,
        jammer,
        trace,
    })
}

/// Convenience wrapper building the cache from a constellation.
pub fn inner_min_jammer(
    c: &Constellation,
    families: &[JammerFamily],
    power: f64,
    cfg: &ChannelConfig,
) -> Result<InnerMinOutcome> {
    let cache = GridChannelCache::build(c, cfg.tau, power, cfg.output_cutoff);
    inner_min_jammer_cached(&cache, families, power)
}

fn default_epsilon_schedule() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125]
}

fn default_e_prime_fractions() -> Vec<f64> {
    vec![0.9, 0.995]
}

fn default_convergence_tol() -> f64 {
    1e-4
}

fn default_families() -> Vec<JammerFamily> {
    vec![
        JammerFamily::Thermal,
        JammerFamily::Phav,
        JammerFamily::PhavMixture { components: 2 },
    ]
}

/// Configuration of the full min-max evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxConfig {
    pub tau: f64,
    /// Sender energy budget E (per-symbol mean photon number).
    pub energy_budget: f64,
    /// Jammer power budget P.
    pub jammer_power: f64,
    #[serde(default = "default_families")]
    pub families: Vec<JammerFamily>,
    #[serde(default = "default_epsilon_schedule")]
    pub epsilon_schedule: Vec<f64>,
    /// Gaussian variances tried, as fractions of the energy budget.
    #[serde(default = "default_e_prime_fractions")]
    pub e_prime_fractions: Vec<f64>,
    /// Stop refining once the stage value improves by less than this.
    #[serde(default = "default_convergence_tol")]
    pub convergence_tol_bits: f64,
    #[serde(default)]
    pub cutoff_override: Option<usize>,
}

/// One refinement stage of the outer search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageRecord {
    pub epsilon: f64,
    pub e_prime: f64,
    pub points: usize,
    pub mean_energy: f64,
    pub value_bits: f64,
    pub jammer: JammerSpec,
    pub cutoff: usize,
    pub deficit: f64,
}

/// Description of the best constellation found (the full point list is
/// reproducible from these parameters).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstellationSummary {
    pub e_prime: f64,
    pub epsilon: f64,
    pub radius_sq: f64,
    pub points: usize,
    pub mean_energy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub value_bits: f64,
    pub closed_form_bits: f64,
    pub best_constellation: ConstellationSummary,
    pub worst_jammer: JammerSpec,
    /// Inner-search best-so-far trace of the winning stage (non-increasing).
    pub inner_trace: Vec<f64>,
    /// Best-so-far outer values per stage (non-decreasing).
    pub outer_trace: Vec<f64>,
    pub stages: Vec<StageRecord>,
    pub cutoff: usize,
    pub deficit_budget: f64,
}

/// Working cutoff: thermal tail of the mean output below 1e-10, plus head
/// room for the displaced columns of the outermost grid points.
pub fn capacity_cutoff(tau: f64, energy: f64, power: f64, radius_sq: f64) -> usize {
    let mean = tau * energy + (1.0 - tau) * power;
    let base = choose_cutoff(mean.max(0.1), 1e-10);
    let reach = tau * radius_sq;
    base + (0.6 * reach + 5.0 * reach.sqrt() + 12.0).ceil() as usize
}

/// Maximize the inner minimum over Gaussian-discretized constellations on
/// the refinement schedule. Deterministic for a fixed config.
pub fn outer_max_input(config: &MinimaxConfig) -> Result<MinimaxResult> {
    if config.families.is_empty() {
        return Err(AvcError::EmptyFamily);
    }
    if config.epsilon_schedule.is_empty() || config.e_prime_fractions.is_empty() {
        return Err(AvcError::Config(
            "epsilon schedule and variance fractions must be nonempty".into(),
        ));
    }
    let closed = closed_form_capacity(config.tau, config.energy_budget, config.jammer_power)?;
    let mut stages = Vec::new();
    let mut outer_trace = Vec::new();
    let mut best: Option<(f64, StageRecord, InnerMinOutcome, ConstellationSummary)> = None;
    let mut prev_stage_best = f64::NEG_INFINITY;

    for (si, &eps) in config.epsilon_schedule.iter().enumerate() {
        let mut stage_best = f64::NEG_INFINITY;
        for &frac in &config.e_prime_fractions {
            let e_prime = frac * config.energy_budget;
            let grid = GridSpec::new(eps, e_prime)?;
            let constellation = build_grid_constellation(e_prime, config.energy_budget, &grid)?;
            let cutoff = config.cutoff_override.unwrap_or_else(|| {
                capacity_cutoff(
                    config.tau,
                    config.energy_budget,
                    config.jammer_power,
                    grid.radius_sq,
                )
            });
            let cache =
                GridChannelCache::build(&constellation, config.tau, config.jammer_power, cutoff);
            let deficit = cache.deficit_at_power(config.jammer_power);
            if deficit > 1e-7 {
                return Err(AvcError::NumericalBudget(format!(
                    "aggregate deficit {deficit:.3e} exceeds budget at cutoff {cutoff}"
                )));
            }
            let inner = inner_min_jammer_cached(&cache, &config.families, config.jammer_power)?;
            let record = StageRecord {
                epsilon: eps,
                e_prime,
                points: constellation.len(),
                mean_energy: constellation.mean_energy(),
                value_bits: inner.value_bits,
                jammer: inner.jammer.clone(),
                cutoff,
                deficit,
            };
            stage_best = stage_best.max(inner.value_bits);
            let summary = ConstellationSummary {
                e_prime,
                epsilon: eps,
                radius_sq: grid.radius_sq,
                points: constellation.len(),
                mean_energy: constellation.mean_energy(),
            };
            let replace = best
                .as_ref()
                .map(|(v, ..)| inner.value_bits > *v)
                .unwrap_or(true);
            if replace {
                best = Some((inner.value_bits, record.clone(), inner, summary));
            }
            stages.push(record);
            outer_trace.push(best.as_ref().unwrap().0);
        }
        if si > 0 && (stage_best - prev_stage_best).abs() < config.convergence_tol_bits {
            break;
        }
        prev_stage_best = stage_best;
    }

    let (value, record, inner, summary) = best.ok_or_else(|| {
        AvcError::Config("no stage produced a value; check the schedule".into())
    })?;
    Ok(MinimaxResult {
        value_bits: value,
        closed_form_bits: closed,
        best_constellation: summary,
        worst_jammer: inner.jammer,
        inner_trace: inner.trace,
        outer_trace,
        stages,
        cutoff: record.cutoff,
        deficit_budget: record.deficit,
    })
}

/// Entropy-continuity bound on energy-bounded states: with
/// `eps = ||rho - sigma||_1`, checks
/// `|S(rho) - S(sigma)| <= eps g(2 E / eps) + h(min(eps, 1))`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ContinuityCheck {
    pub holds: bool,
    pub entropy_gap_bits: f64,
    pub bound_bits: f64,
    pub distance: f64,
}

pub fn continuity_check(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    energy_bound: f64,
) -> Result<ContinuityCheck> {
    if rho.energy() > energy_bound + 1e-9 || sigma.energy() > energy_bound + 1e-9 {
        return Err(AvcError::Domain(format!(
            "both energies must stay below {energy_bound}"
        )));
    }
    let eps = crate::fock::trace_norm_diff(rho, sigma)?;
    let gap = (von_neumann_entropy(rho)?.value_bits - von_neumann_entropy(sigma)?.value_bits).abs();
    let bound = if eps == 0.0 {
        0.0
    } else {
        eps * gordon_g(2.0 * energy_bound / eps)? + binary_entropy(eps.min(1.0))?
    };
    Ok(ContinuityCheck {
        holds: gap <= bound + 1e-12,
        entropy_gap_bits: gap,
        bound_bits: bound,
        distance: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::trace_distance;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn closed_form_values() {
        // g(1) = 2 bits at full transmission, no jamming
        assert!((closed_form_capacity(1.0, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-12);
        // g(1) - g(0.5) at the symmetric point
        let v = closed_form_capacity(0.5, 1.0, 1.0).unwrap();
        assert!((v - 0.622_556_2).abs() < 1e-6, "got {v}");
        // no signal energy, no capacity
        for tau in [0.2, 0.8] {
            assert_eq!(closed_form_capacity(tau, 0.0, 1.3).unwrap(), 0.0);
        }
        assert!(closed_form_capacity(1.2, 1.0, 1.0).is_err());
    }

    #[test]
    fn grid_covers_coupled_disk() {
        let g = GridSpec::new(0.25, 1.0).unwrap();
        assert!(g.radius_sq >= 4.0 - 1e-12);
        assert!(g.radius_sq >= 10.0 - 1e-12); // energy disk dominates here
        let tiny = GridSpec::new(1.0, 0.05).unwrap();
        assert!((tiny.radius_sq - 1.0).abs() < 1e-12); // coupling dominates
    }

    #[test]
    fn huge_spacing_collapses_to_point_mass() {
        let g = GridSpec::new(40.0, 0.5).unwrap();
        let c = build_grid_constellation(0.5, 1.0, &g).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.point(0), Complex64::new(0.0, 0.0));
        assert!((c.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_average_converges_to_thermal() {
        // discretized Gaussian inputs average to the thermal state
        let dim = 40;
        let target = DensityMatrix::thermal_with_tol(1.0, dim, 1e-4).unwrap();
        let mut last = f64::INFINITY;
        for eps in [1.0, 0.5, 0.25] {
            let grid = GridSpec::new(eps, 1.0).unwrap();
            let c = build_grid_constellation(1.0, 1.01, &grid).unwrap();
            let avg = c.average_state(dim).unwrap();
            let dist = trace_distance(&avg, &target).unwrap();
            assert!(dist < last, "eps={eps}: {dist} !< {last}");
            last = dist;
        }
        assert!(last < 0.01, "final distance {last}");
    }

    #[test]
    fn grid_weights_and_energy() {
        let grid = GridSpec::new(0.5, 0.8).unwrap();
        let c = build_grid_constellation(0.8, 1.0, &grid).unwrap();
        assert!((c.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(c.mean_energy() <= 1.0);
        assert!((c.mean_energy() - 0.8).abs() < 0.05);
    }

    #[test]
    fn cache_thermal_average_matches_direct_assembly() {
        let tau = 0.6;
        let dim = 40;
        let c = Constellation::new(
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.6, 0.2),
                Complex64::new(-0.4, 0.5),
            ],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let cache = GridChannelCache::build(&c, tau, 1.0, dim);
        let avg = cache.average_thermal(0.7).unwrap();
        let cfg = ChannelConfig::new(tau, dim).unwrap().with_output_cutoff(dim);
        let direct = crate::entropy::average_output(&c, &JammerSpec::thermal(0.7), &cfg).unwrap();
        assert!(trace_distance(&avg, &direct).unwrap() < 1e-9);
    }

    #[test]
    fn cache_ring_chi_matches_generic_holevo() {
        let tau = 0.55;
        let dim = 42;
        let c = Constellation::new(
            vec![Complex64::new(0.4, 0.0), Complex64::new(-0.3, 0.3)],
            vec![0.6, 0.4],
        )
        .unwrap();
        let cache = GridChannelCache::build(&c, tau, 1.0, dim);
        let cfg = ChannelConfig::new(tau, dim).unwrap().with_output_cutoff(dim);
        for jam in [
            JammerSpec::phav(0.8),
            JammerSpec::phav_mixture(vec![(0.4, 0.3), (0.9, 0.7)]).unwrap(),
            JammerSpec::thermal(0.9),
            JammerSpec::dphav(Complex64::new(0.5, 0.0), 0.6),
        ] {
            let fast = cache.chi(&jam).unwrap();
            let slow = crate::entropy::holevo_chi(&c, &jam, &cfg).unwrap();
            assert!(
                (fast - slow).abs() < 1e-7,
                "jammer {jam:?}: fast {fast} vs slow {slow}"
            );
        }
    }

    #[test]
    fn chi_against_thermal_approaches_closed_form() {
        // modest grid: within a few percent already at eps = 0.25
        let (tau, e, p) = (0.5, 1.0, 1.0);
        let grid = GridSpec::new(0.25, 0.99 * e).unwrap();
        let c = build_grid_constellation(0.99 * e, e, &grid).unwrap();
        let cutoff = capacity_cutoff(tau, e, p, grid.radius_sq);
        let cache = GridChannelCache::build(&c, tau, p, cutoff);
        let chi = cache.chi(&JammerSpec::thermal(p)).unwrap();
        let closed = closed_form_capacity(tau, e, p).unwrap();
        assert!(chi <= closed + 1e-9, "chi {chi} above closed form {closed}");
        assert!((closed - chi) / closed < 0.03, "chi {chi} vs {closed}");
    }

    #[test]
    fn inner_min_thermal_family_sits_at_full_power() {
        let (tau, e, p) = (0.5, 1.0, 1.0);
        let grid = GridSpec::new(0.5, 0.95 * e).unwrap();
        let c = build_grid_constellation(0.95 * e, e, &grid).unwrap();
        let cutoff = capacity_cutoff(tau, e, p, grid.radius_sq);
        let cache = GridChannelCache::build(&c, tau, p, cutoff);
        let out = inner_min_jammer_cached(&cache, &[JammerFamily::Thermal], p).unwrap();
        match out.jammer.kind {
            JammerKind::Thermal { mean_photons } => {
                assert!((mean_photons - p).abs() < 1e-3, "minimizer at {mean_photons}")
            }
            ref other => panic!("unexpected jammer {other:?}"),
        }
        // oracle: exhaustive scan over a 20-point thermal grid
        let mut scan_best = f64::INFINITY;
        for k in 0..=20 {
            let n = p * k as f64 / 20.0;
            scan_best = scan_best.min(cache.chi(&JammerSpec::thermal(n)).unwrap());
        }
        assert!((out.value_bits - scan_best).abs() < 1e-6);
        // trace is non-increasing
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn inner_min_prefers_thermal_over_rings() {
        // rings of equal power randomize less, so the thermal member jams best
        let (tau, e, p) = (0.6, 0.8, 0.7);
        let grid = GridSpec::new(0.5, 0.9 * e).unwrap();
        let c = build_grid_constellation(0.9 * e, e, &grid).unwrap();
        let cutoff = capacity_cutoff(tau, e, p, grid.radius_sq);
        let cache = GridChannelCache::build(&c, tau, p, cutoff);
        let thermal_chi = cache.chi(&JammerSpec::thermal(p)).unwrap();
        let ring_chi = cache.chi(&JammerSpec::phav(p.sqrt())).unwrap();
        assert!(thermal_chi < ring_chi);
        let out = inner_min_jammer_cached(
            &cache,
            &[JammerFamily::Thermal, JammerFamily::Phav],
            p,
        )
        .unwrap();
        assert!(matches!(out.jammer.kind, JammerKind::Thermal { .. }));
        assert!((out.value_bits - thermal_chi).abs() < 1e-6);
    }

    #[test]
    fn displaced_ring_chi_equals_centered_ring_chi() {
        let (tau, p) = (0.5, 0.8);
        let grid = GridSpec::new(0.5, 0.7).unwrap();
        let c = build_grid_constellation(0.7, 0.8, &grid).unwrap();
        let cutoff = capacity_cutoff(tau, 0.8, p, grid.radius_sq);
        let cache = GridChannelCache::build(&c, tau, p, cutoff);
        let b = 0.6;
        let centered = cache.chi(&JammerSpec::phav(b)).unwrap();
        let displaced = cache
            .chi(&JammerSpec::dphav(Complex64::new(0.4, 0.0), b))
            .unwrap();
        assert!((centered - displaced).abs() < 1e-9);
    }

    #[test]
    fn inner_minimizer_respects_jammer_bookkeeping() {
        let (tau, e, p) = (0.5, 1.0, 0.8);
        let grid = GridSpec::new(0.5, 0.9 * e).unwrap();
        let c = build_grid_constellation(0.9 * e, e, &grid).unwrap();
        let cutoff = capacity_cutoff(tau, e, p, grid.radius_sq);
        let cache = GridChannelCache::build(&c, tau, p, cutoff);
        let out = inner_min_jammer_cached(
            &cache,
            &[
                JammerFamily::Thermal,
                JammerFamily::Phav,
                JammerFamily::PhavMixture { components: 2 },
                JammerFamily::Dphav,
            ],
            p,
        )
        .unwrap();
        // the reported minimizer satisfies the power budget and its own
        // sub-Gaussian tail certificate
        out.jammer.check(p).unwrap();
        assert!(out.jammer.mean_energy <= p + 1e-9);
    }

    #[test]
    fn outer_max_zero_energy_is_zero() {
        let cfg = MinimaxConfig {
            tau: 0.5,
            energy_budget: 0.0,
            jammer_power: 1.0,
            families: vec![JammerFamily::Thermal],
            epsilon_schedule: vec![1.0, 0.5],
            e_prime_fractions: vec![0.9],
            convergence_tol_bits: 1e-4,
            cutoff_override: None,
        };
        let res = outer_max_input(&cfg).unwrap();
        assert!(res.value_bits.abs() < 1e-9);
        assert_eq!(res.closed_form_bits, 0.0);
    }

    #[test]
    fn outer_max_quick_run_is_consistent() {
        let cfg = MinimaxConfig {
            tau: 0.5,
            energy_budget: 1.0,
            jammer_power: 1.0,
            families: vec![JammerFamily::Thermal],
            epsilon_schedule: vec![0.5, 0.25],
            e_prime_fractions: vec![0.9, 0.99],
            convergence_tol_bits: 1e-5,
            cutoff_override: None,
        };
        let res = outer_max_input(&cfg).unwrap();
        let closed = res.closed_form_bits;
        assert!(res.value_bits <= closed + 1e-3);
        assert!(res.value_bits >= closed * 0.95, "{} vs {}", res.value_bits, closed);
        assert!(res.outer_trace.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(!res.stages.is_empty());
        assert!(res.deficit_budget < 1e-7);
    }

    #[test]
    fn monotone_in_budgets() {
        let run = |e: f64, p: f64| {
            let cfg = MinimaxConfig {
                tau: 0.5,
                energy_budget: e,
                jammer_power: p,
                families: vec![JammerFamily::Thermal],
                epsilon_schedule: vec![0.5],
                e_prime_fractions: vec![0.95],
                convergence_tol_bits: 1e-4,
                cutoff_override: None,
            };
            outer_max_input(&cfg).unwrap().value_bits
        };
        // capacity grows with signal energy, shrinks with jammer power
        assert!(run(1.5, 1.0) > run(0.75, 1.0));
        assert!(run(1.0, 1.5) < run(1.0, 0.75));
    }

    #[test]
    fn continuity_bound_examples() {
        let a = DensityMatrix::thermal_with_tol(1.0, 60, 1e-6).unwrap();
        let same = continuity_check(&a, &a, 2.0).unwrap();
        assert!(same.holds && same.entropy_gap_bits == 0.0);

        let b = DensityMatrix::thermal_with_tol(1.01, 60, 1e-6).unwrap();
        let chk = continuity_check(&a, &b, 2.0).unwrap();
        assert!(chk.holds, "gap {} bound {}", chk.entropy_gap_bits, chk.bound_bits);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let d = 16;
            let base: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let mut bumped = base.clone();
            for x in bumped.iter_mut() {
                *x *= 1.0 + 0.01 * (rng.gen::<f64>() - 0.5);
            }
            let r = DensityMatrix::from_diagonal_renormalized(&base, 0.0);
            let s = DensityMatrix::from_diagonal_renormalized(&bumped, 0.0);
            let e = r.energy().max(s.energy()) + 0.1;
            let chk = continuity_check(&r, &s, e).unwrap();
            assert!(chk.holds, "gap {} bound {}", chk.entropy_gap_bits, chk.bound_bits);
        }
    }
}
