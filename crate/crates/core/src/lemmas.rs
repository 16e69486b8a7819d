//! Desk-scale numerical verification of the supporting bounds used by the
//! coding arguments: a local-to-global trace bound on multi-system states,
//! marginals of permutation averages, Poisson photon-tail bounds for ring
//! states and sub-Gaussian mixtures, type-class concentration, the
//! flat-type-to-iid domination, and the gentle measurement estimate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AvcError, Result};
use crate::fock::poisson_tail_ln;
use crate::par;

/// Sequences over an alphabet of size `alphabet` with fixed symbol counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeClass {
    pub alphabet: usize,
    pub blocklength: usize,
    pub counts: Vec<usize>,
}

impl TypeClass {
    pub fn new(alphabet: usize, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != alphabet {
            return Err(AvcError::DimensionMismatch {
                left: alphabet,
                right: counts.len(),
            });
        }
        Ok(Self {
            alphabet,
            blocklength: counts.iter().sum(),
            counts,
        })
    }

    /// Exact cardinality `k! / prod_i m_i!` via a product of binomials.
    pub fn cardinality(&self) -> Result<u128> {
        let mut remaining = self.blocklength as u128;
        let mut total: u128 = 1;
        for &m in &self.counts {
            total = total
                .checked_mul(binomial_u128(remaining, m as u128)?)
                .ok_or_else(|| AvcError::NumericalBudget("multinomial overflow".into()))?;
            remaining -= m as u128;
        }
        Ok(total)
    }

    /// Empirical distribution `m_i / k`.
    pub fn empirical(&self) -> Vec<f64> {
        let k = self.blocklength as f64;
        self.counts.iter().map(|&m| m as f64 / k).collect()
    }

    /// Shannon entropy of the empirical distribution, in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.empirical()
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| -p * p.log2())
            .sum()
    }

    /// The standard sandwich `(1+k)^{-d} 2^{kH} <= |T| <= 2^{kH}`,
    /// compared in log2 with a small float slack.
    pub fn size_bounds_hold(&self) -> Result<bool> {
        let log_card = (self.cardinality()? as f64).log2();
        let kh = self.blocklength as f64 * self.entropy_bits();
        let slack = 1e-9 * kh.max(1.0);
        let lower = kh - self.alphabet as f64 * (1.0 + self.blocklength as f64).log2();
        Ok(log_card <= kh + slack && log_card >= lower - slack)
    }
}

fn binomial_u128(n: u128, k: u128) -> Result<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .ok_or_else(|| AvcError::NumericalBudget("binomial overflow".into()))?
            / (i + 1);
    }
    Ok(acc)
}

/// All type classes of blocklength `k` over `[d]` (compositions of `k`).
pub fn enumerate_types(k: usize, d: usize) -> Vec<TypeClass> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for m in 0..=remaining {
            prefix.push(m);
            rec(remaining - m, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    rec(k, d, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|counts| TypeClass {
            alphabet: d,
            blocklength: k,
            counts,
        })
        .collect()
}

pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let h = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| h[(i, i)].re).sum();
    h / Complex64::new(tr, 0.0)
}

/// Rank-`rank` projector from the top eigenvectors of a random Hermitian.
pub fn random_projector(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    assert!(rank <= dim);
    let h = random_density(dim, rng);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let mut p = DMatrix::<Complex64>::zeros(dim, dim);
    for &j in order.iter().take(rank) {
        let v = se.eigenvectors.column(j);
        p += v * v.adjoint();
    }
    p
}

/// Partial trace of a `(C^d)^{(x) k}` operator onto site `site`.
pub fn marginal_at(
    rho: &DMatrix<Complex64>,
    d: usize,
    k: usize,
    site: usize,
) -> DMatrix<Complex64> {
    let dim = d.pow(k as u32);
    assert_eq!(rho.nrows(), dim);
    let stride = d.pow((k - 1 - site) as u32);
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for x in 0..dim {
        let a = (x / stride) % d;
        for b in 0..d {
            let y = ((x as i64) + ((b as i64) - (a as i64)) * (stride as i64)) as usize;
            out[(a, b)] += rho[(x, y)];
        }
    }
    out
}

/// `tr((A_0 (x) ... (x) A_{k-1}) rho)` without materializing the product.
pub fn trace_kron_product(
    ops: &[&DMatrix<Complex64>],
    rho: &DMatrix<Complex64>,
    d: usize,
) -> Complex64 {
    let k = ops.len();
    let dim = d.pow(k as u32);
    assert_eq!(rho.nrows(), dim);
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..dim {
        for y in 0..dim {
            let r = rho[(y, x)];
            if r.norm_sqr() == 0.0 {
                continue;
            }
            let mut prod = Complex64::new(1.0, 0.0);
            let (mut xr, mut yr) = (x, y);
            for site in (0..k).rev() {
                let (xd, yd) = (xr % d, yr % d);
                xr /= d;
                yr /= d;
                prod *= ops[site][(xd, yd)];
                if prod.norm_sqr() == 0.0 {
                    break;
                }
            }
            acc += prod * r;
        }
    }
    acc
}

/// Result of the local-to-global trace bound check
/// `tr Q^{(x) k} rho >= 1 - k eps` with
/// `eps = 1 - min_i tr Q (tr_{!=i} rho)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginalTraceBound {
    pub epsilon: f64,
    pub global: f64,
    pub bound: f64,
    pub holds: bool,
    /// Induction chain: `(tr Q^{(i)} rho, 1 - i eps)` for `i = 1..=k`.
    pub chain: Vec<(f64, f64)>,
}

pub fn marginal_trace_bound_check(
    rho: &DMatrix<Complex64>,
    q: &DMatrix<Complex64>,
    d: usize,
    k: usize,
) -> Result<MarginalTraceBound> {
    let dim = d.pow(k as u32);
    if rho.nrows() != dim || q.nrows() != d {
        return Err(AvcError::DimensionMismatch {
            left: rho.nrows(),
            right: dim,
        });
    }
    let mut eps: f64 = 0.0;
    for site in 0..k {
        let m = marginal_at(rho, d, k, site);
        let t = (q * m).trace().re;
        eps = eps.max(1.0 - t);
    }
    let identity = DMatrix::<Complex64>::identity(d, d);
    let mut chain = Vec::with_capacity(k);
    let mut global = 0.0;
    for i in 1..=k {
        let ops: Vec<&DMatrix<Complex64>> =
            (0..k).map(|j| if j < i { q } else { &identity }).collect();
        let t = trace_kron_product(&ops, rho, d).re;
        chain.push((t, 1.0 - i as f64 * eps));
        if i == k {
            global = t;
        }
    }
    let bound = 1.0 - k as f64 * eps;
    let holds = chain.iter().all(|(t, b)| *t >= *b - 1e-10);
    Ok(MarginalTraceBound {
        epsilon: eps,
        global,
        bound,
        holds,
        chain,
    })
}

/// Result of the permutation-average marginal check on diagonal product
/// states: the averaged state's marginal equals the arithmetic mean of the
/// factors, keeps the total energy exactly, and respects the power bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetrizedMarginal {
    pub marginal_matches_mean: bool,
    pub max_marginal_deviation: f64,
    pub energy_preserved: bool,
    pub marginal_energy: f64,
    pub power_ok: bool,
}

/// `factors[i]` is the diagonal of the i-th single-mode state. The full
/// permutation sum is materialized on the diagonal tensor, so `D^k` must be
/// modest (k <= 6 at small cutoffs).
pub fn symmetrized_marginal_check(factors: &[Vec<f64>], power: f64) -> Result<SymmetrizedMarginal> {
    let k = factors.len();
    if k == 0 || k > 8 {
        return Err(AvcError::Domain("need 1..=8 factors".into()));
    }
    let d = factors[0].len();
    if factors.iter().any(|f| f.len() != d) {
        return Err(AvcError::Domain("factor cutoffs differ".into()));
    }
    let dim = d.pow(k as u32);
    if dim > 2_000_000 {
        return Err(AvcError::Domain(format!("diagonal tensor too large: {dim}")));
    }
    let perms = permutations(k);
    let mut avg = vec![0.0f64; dim];
    let w = 1.0 / perms.len() as f64;
    for p in &perms {
        for (x, item) in avg.iter_mut().enumerate() {
            let mut v = w;
            let mut xr = x;
            for j in (0..k).rev() {
                let digit = xr % d;
                xr /= d;
                v *= factors[p[j]][digit];
            }
            *item += v;
        }
    }
    let mean: Vec<f64> = (0..d)
        .map(|n| factors.iter().map(|f| f[n]).sum::<f64>() / k as f64)
        .collect();
    let mut max_dev = 0.0f64;
    for site in 0..k {
        let stride = d.pow((k - 1 - site) as u32);
        let mut marg = vec![0.0f64; d];
        for (x, v) in avg.iter().enumerate() {
            marg[(x / stride) % d] += v;
        }
        for n in 0..d {
            max_dev = max_dev.max((marg[n] - mean[n]).abs());
        }
    }
    let energy_of =
        |diag: &[f64]| -> f64 { diag.iter().enumerate().map(|(n, p)| n as f64 * p).sum() };
    let total_direct: f64 = factors.iter().map(|f| energy_of(f)).sum();
    let mut total_avg = 0.0;
    for (x, v) in avg.iter().enumerate() {
        let mut xr = x;
        let mut n_total = 0usize;
        for _ in 0..k {
            n_total += xr % d;
            xr /= d;
        }
        total_avg += n_total as f64 * v;
    }
    let marginal_energy = energy_of(&mean);
    Ok(SymmetrizedMarginal {
        marginal_matches_mean: max_dev < 1e-12,
        max_marginal_deviation: max_dev,
        energy_preserved: (total_avg - total_direct).abs() < 1e-10 * total_direct.max(1.0),
        marginal_energy,
        power_ok: marginal_energy <= power + 1e-12,
    })
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

/// Photon-tail bounds for a ring state (Poisson statistics) and for a
/// sub-Gaussian mixture of rings. All tails handled in log space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhotonTailBound {
    /// `ln P(X >= N)` for the first ring component.
    pub ln_tail: f64,
    /// Whether `N >= 22 max(2, b^2)` so the `4^{-N}` bound applies.
    pub raw_bound_applicable: bool,
    pub raw_bound_holds: bool,
    /// Mixture tail vs `2^{2 - N min(2, log2(e) / (22 K^2))}`.
    pub mixed_bound_holds: bool,
    pub ln_mixture_tail: f64,
    pub ln_mixed_bound: f64,
}

/// `components` are `(ring radius, weight)`; `level` is the projector rank
/// N (the tail counts photon numbers >= N); `k_constant` is the
/// sub-Gaussian K of the mixing measure.
pub fn photon_tail_bound_check(
    components: &[(f64, f64)],
    level: usize,
    k_constant: f64,
) -> Result<PhotonTailBound> {
    if components.is_empty() || k_constant <= 0.0 {
        return Err(AvcError::Domain("need components and K > 0".into()));
    }
    let n = level as f64;
    let b_max_sq = components
        .iter()
        .map(|(b, _)| b * b)
        .fold(0.0f64, f64::max);
    let ln_tail = poisson_tail_ln(components[0].0 * components[0].0, level);
    let raw_applicable = n >= 22.0 * b_max_sq.max(2.0) - 1e-9;
    let raw_holds = !raw_applicable || ln_tail <= -n * 4.0f64.ln() + 1e-12;
    // log-sum-exp of the weighted component tails
    let parts: Vec<f64> = components
        .iter()
        .map(|(b, w)| {
            if *w == 0.0 {
                f64::NEG_INFINITY
            } else {
                w.ln() + poisson_tail_ln(b * b, level)
            }
        })
        .collect();
    let max_part = parts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ln_mixture_tail = if max_part.is_finite() {
        max_part
            + parts
                .iter()
                .map(|p| (p - max_part).exp())
                .sum::<f64>()
                .ln()
    } else {
        f64::NEG_INFINITY
    };
    let exponent = 2.0f64.min(std::f64::consts::LOG2_E / (22.0 * k_constant * k_constant));
    let ln_mixed_bound = (2.0 - n * exponent) * std::f64::consts::LN_2;
    Ok(PhotonTailBound {
        ln_tail,
        raw_bound_applicable: raw_applicable,
        raw_bound_holds: raw_holds,
        mixed_bound_holds: ln_mixture_tail <= ln_mixed_bound + 1e-12,
        ln_mixture_tail,
        ln_mixed_bound,
    })
}

/// Monte Carlo check of the type concentration bound
/// `P(|| type - pbar ||_1 > eps) <= C (2k)^d exp(-eps^2 k)` with `C = 2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypeConcentration {
    pub empirical_tail: f64,
    pub bound: f64,
    pub holds: bool,
    /// Smallest constant C that would still cover the empirical tail.
    pub sufficient_c: f64,
    pub trials: usize,
}

/// `ps` holds the `k` per-slot distributions on `[d]`. The permutation
/// average does not change the law of the type statistic, so sampling the
/// un-permuted product is exact.
pub fn type_concentration_check(
    ps: &[Vec<f64>],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<TypeConcentration> {
    let k = ps.len();
    if k == 0 || trials == 0 {
        return Err(AvcError::Domain("need slots and trials".into()));
    }
    let d = ps[0].len();
    if ps.iter().any(|p| p.len() != d) {
        return Err(AvcError::Domain("distribution sizes differ".into()));
    }
    let cumulative: Vec<Vec<f64>> = ps
        .iter()
        .map(|p| {
            let mut acc = 0.0;
            p.iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect()
        })
        .collect();
    let pbar: Vec<f64> = (0..d)
        .map(|i| ps.iter().map(|p| p[i]).sum::<f64>() / k as f64)
        .collect();
    let chunk = 4096usize;
    let partials = par::chunked_partials(trials, chunk, |range| {
        let mut exceed = 0usize;
        for t in range {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(t as u64),
            );
            let mut counts = vec![0usize; d];
            for cum in &cumulative {
                let u: f64 = rng.gen();
                let mut sym = d - 1;
                for (i, c) in cum.iter().enumerate() {
                    if u <= *c {
                        sym = i;
                        break;
                    }
                }
                counts[sym] += 1;
            }
            let l1: f64 = (0..d)
                .map(|i| (counts[i] as f64 / k as f64 - pbar[i]).abs())
                .sum();
            if l1 > epsilon {
                exceed += 1;
            }
        }
        exceed
    });
    let exceed: usize = partials.iter().sum();
    let empirical = exceed as f64 / trials as f64;
    let envelope = (2.0 * k as f64).powi(d as i32) * (-epsilon * epsilon * k as f64).exp();
    let bound = 2.0 * envelope;
    Ok(TypeConcentration {
        empirical_tail: empirical,
        bound,
        holds: empirical <= bound,
        sufficient_c: if envelope > 0.0 {
            empirical / envelope
        } else {
            0.0
        },
        trials,
    })
}

/// Exact check of `|T_m|^{-1} 1_{T_m} <= (2k)^d m^{(x) k}`, together with an
/// exhaustive recount of `|T_m|` when the sequence space is small enough.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypeToIidBound {
    pub holds: bool,
    pub cardinality: u128,
    /// Exhaustively recounted cardinality, when `d^k` was enumerable.
    pub enumerated: Option<u128>,
}

pub fn type_to_iid_bound_check(t: &TypeClass) -> Result<TypeToIidBound> {
    let k = t.blocklength as u128;
    let d = t.alphabet as u32;
    let card = t.cardinality()?;
    // k^k <= (2k)^d * prod_i m_i^{m_i} * |T_m| in exact integers
    let overflow = || AvcError::NumericalBudget("type bound overflow; reduce k".into());
    let mut lhs: u128 = 1;
    for _ in 0..k {
        lhs = lhs.checked_mul(k).ok_or_else(overflow)?;
    }
    let mut rhs: u128 = card;
    for _ in 0..d {
        rhs = rhs.checked_mul(2 * k).ok_or_else(overflow)?;
    }
    for &m in &t.counts {
        for _ in 0..m {
            rhs = rhs.checked_mul(m as u128).ok_or_else(overflow)?;
        }
    }
    let enumerable = (t.alphabet as f64).powi(t.blocklength as i32) <= 1e6;
    let enumerated = if enumerable {
        let mut count: u128 = 0;
        let total = t.alphabet.pow(t.blocklength as u32);
        for x in 0..total {
            let mut xr = x;
            let mut counts = vec![0usize; t.alphabet];
            for _ in 0..t.blocklength {
                counts[xr % t.alphabet] += 1;
                xr /= t.alphabet;
            }
            if counts == t.counts {
                count += 1;
            }
        }
        Some(count)
    } else {
        None
    };
    if let Some(c) = enumerated {
        if c != card {
            return Err(AvcError::Invariant(format!(
                "enumerated cardinality {c} disagrees with multinomial {card}"
            )));
        }
    }
    Ok(TypeToIidBound {
        holds: lhs <= rhs,
        cardinality: card,
        enumerated,
    })
}

/// Gentle measurement estimate
/// `|| P rho P - rho ||_1 <= 2 sqrt(tr((1 - P) rho))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GentleMeasurement {
    pub distance: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn gentle_measurement_check(
    rho: &DMatrix<Complex64>,
    projector: &DMatrix<Complex64>,
) -> Result<GentleMeasurement> {
    if rho.nrows() != projector.nrows() {
        return Err(AvcError::DimensionMismatch {
            left: rho.nrows(),
            right: projector.nrows(),
        });
    }
    let pinched = projector * rho * projector;
    let diff = &pinched - rho;
    let distance: f64 = diff
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum();
    let outside = 1.0f64.min((rho - &pinched).trace().re).max(0.0);
    let bound = 2.0 * outside.sqrt();
    Ok(GentleMeasurement {
        distance,
        bound,
        holds: distance <= bound + 1e-10,
    })
}
