//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them on success).

use bosonic_avc_core::beamsplitter::{
    apply_bs, apply_bs_semiclassical, block_unitary, ChannelConfig, SignConvention,
};
use bosonic_avc_core::capacity::{
    build_grid_constellation, capacity_cutoff, closed_form_capacity, outer_max_input,
    GridChannelCache, GridSpec, JammerFamily, MinimaxConfig,
};
use bosonic_avc_core::coding::{
    cr_average, pgm_decoder, success_probability, Codebook, JammerStrategy,
};
use bosonic_avc_core::entropy::{
    gordon_g, gordon_g_inv, reflected_photon_number, von_neumann_entropy,
};
use bosonic_avc_core::epi::{scan_families, ExpBase, Inequality, Orientation, ScanConfig, StateFamily};
use bosonic_avc_core::fock::{
    choose_cutoff, trace_distance, Constellation, DensityMatrix, JammerSpec,
};
use bosonic_avc_core::lemmas;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;

const TAUS: [f64; 3] = [0.25, 0.5, 0.75];
const ENERGIES: [f64; 3] = [0.5, 1.0, 2.0];
const POWERS: [f64; 3] = [0.5, 1.0, 2.0];

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn criterion_1_closed_form_reproduction() {
    let started = std::time::Instant::now();
    let mut worst_rel: f64 = 0.0;
    for tau in TAUS {
        for e in ENERGIES {
            for p in POWERS {
                let e_prime = 0.995 * e;
                let grid = GridSpec::new(0.125, e_prime).unwrap();
                let constellation = build_grid_constellation(e_prime, e, &grid).unwrap();
                assert!(constellation.mean_energy() <= e + 1e-12);
                let cutoff = capacity_cutoff(tau, e, p, grid.radius_sq);
                let cache = GridChannelCache::build(&constellation, tau, p, cutoff);
                let chi = cache.chi(&JammerSpec::thermal(p)).unwrap();
                let closed = closed_form_capacity(tau, e, p).unwrap();
                let rel = (closed - chi).abs() / closed;
                assert!(
                    rel < 0.02,
                    "(tau={tau}, E={e}, P={p}): chi {chi} vs closed {closed} (rel {rel:.4})"
                );
                worst_rel = worst_rel.max(rel);
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "criterion 1 runtime {elapsed:?} exceeds 5 minutes"
    );
    println!(
        "ACCEPTANCE 1: PASS - 27 closed-form points within 2% (worst {:.3}%), {:.1?}",
        100.0 * worst_rel,
        elapsed
    );
}

#[test]
fn criterion_2_minimax_consistency() {
    let started = std::time::Instant::now();
    let mut worst_low: f64 = 0.0;
    let mut worst_high: f64 = f64::NEG_INFINITY;
    for tau in TAUS {
        for e in ENERGIES {
            for p in POWERS {
                let config = MinimaxConfig {
                    tau,
                    energy_budget: e,
                    jammer_power: p,
                    families: vec![
                        JammerFamily::Thermal,
                        JammerFamily::Phav,
                        JammerFamily::PhavMixture { components: 2 },
                    ],
                    epsilon_schedule: vec![0.25, 0.125],
                    e_prime_fractions: vec![0.9, 0.995],
                    convergence_tol_bits: 1e-4,
                    cutoff_override: None,
                };
                let res = outer_max_input(&config).unwrap();
                let closed = res.closed_form_bits;
                let high = res.value_bits - closed;
                assert!(
                    high <= 1e-3,
                    "(tau={tau}, E={e}, P={p}): value {} above closed form {closed}",
                    res.value_bits
                );
                let rel_low = (closed - res.value_bits) / closed;
                assert!(
                    rel_low <= 0.02,
                    "(tau={tau}, E={e}, P={p}): value {} below closed form {closed} by {rel_low:.4}",
                    res.value_bits
                );
                worst_low = worst_low.max(rel_low);
                worst_high = worst_high.max(high);
            }
        }
    }
    println!(
        "ACCEPTANCE 2: PASS - minimax within [closed-2%, closed+1e-3] on all 27 points \
         (worst shortfall {:.3}%, worst excess {:.2e} bits), {:.1?}",
        100.0 * worst_low,
        worst_high,
        started.elapsed()
    );
}

#[test]
fn criterion_3_reflected_thermal_photon_number() {
    let started = std::time::Instant::now();
    let mut worst: f64 = 0.0;
    for p in POWERS {
        let dim = choose_cutoff(p, 1e-12).max(30);
        let state = DensityMatrix::thermal_with_tol(p, dim, 1e-6).unwrap();
        for i in 1..=9 {
            let tau = i as f64 / 10.0;
            let r = reflected_photon_number(&state, tau).unwrap();
            let expect = (1.0 - tau) * p;
            let err = (r - expect).abs();
            assert!(err < 1e-6, "tau={tau}, P={p}: {r} vs {expect}");
            worst = worst.max(err);
        }
    }
    println!(
        "ACCEPTANCE 3: PASS - reflected photon number equals (1-tau)P, worst error {:.2e}, {:.1?}",
        worst,
        started.elapsed()
    );
}

#[test]
fn criterion_4_epi_scan() {
    let started = std::time::Instant::now();
    let mut pairs = Vec::new();
    let means = [0.3, 0.6, 1.0, 1.6];
    for e in means {
        for p in means {
            pairs.push((
                StateFamily::Thermal { mean_photons: e },
                StateFamily::Thermal { mean_photons: p },
            ));
        }
        for n in 0..=5usize {
            pairs.push((
                StateFamily::Thermal { mean_photons: e },
                StateFamily::Fock { level: n },
            ));
        }
    }
    for bx in [0.4, 0.8, 1.2, 1.6] {
        for by in [0.4, 0.8, 1.2, 1.6] {
            pairs.push((StateFamily::Phav { radius: bx }, StateFamily::Phav { radius: by }));
        }
    }
    let config = ScanConfig {
        pairs,
        random_diagonal_pairs: 1000,
        lambdas: (1..=9).map(|i| i as f64 / 10.0).collect(),
        cutoff: 20,
        seed: 2024,
        inequality: Inequality::GSum,
        orientation: Orientation::Port,
        exp_base: ExpBase::Two,
        violation_threshold: -1e-6,
        confirm_candidates: true,
    };
    let report = scan_families(&config).unwrap();
    assert!(
        report.confirmed_violations.is_empty(),
        "confirmed violations: {:?}",
        report.confirmed_violations
    );
    if report.min_gap < -1e-6 {
        assert!(
            report.candidates == report.reclassified_numerical,
            "a candidate violation survived the doubling pass"
        );
    }
    println!(
        "ACCEPTANCE 4: PASS - {} gap records, min gap {:.3e}, {} candidate(s) all reclassified, {:.1?}",
        report.records.len(),
        report.min_gap,
        report.candidates,
        started.elapsed()
    );
}

#[test]
fn criterion_5_entropy_kernel() {
    let started = std::time::Instant::now();
    // thermal entropies against the closed form
    let mut n = 0.25f64;
    let mut worst: f64 = 0.0;
    while n <= 5.0 {
        let dim = choose_cutoff(n, 1e-13).max(40);
        let s = DensityMatrix::thermal_with_tol(n, dim, 1e-6).unwrap();
        let err = (von_neumann_entropy(&s).unwrap().value_bits - gordon_g(n).unwrap()).abs();
        assert!(err < 1e-8, "N={n}: entropy error {err}");
        worst = worst.max(err);
        n += 0.25;
    }
    // pure states
    for alpha in [c64(0.0, 0.0), c64(1.0, 0.5), c64(2.0, 0.0)] {
        let s = DensityMatrix::coherent(alpha, 50).unwrap();
        assert!(von_neumann_entropy(&s).unwrap().value_bits <= 1e-9);
    }
    // inverse identity on [0, 100]
    let mut x = 0.0f64;
    while x <= 100.0 {
        let y = gordon_g(x).unwrap();
        let back = gordon_g_inv(y).unwrap();
        assert!((back - x).abs() <= 1e-10 * x.max(1.0), "x={x} back={back}");
        x += 0.125;
    }
    println!(
        "ACCEPTANCE 5: PASS - thermal entropies within 1e-8 (worst {:.2e}), pure <= 1e-9, \
         inverse identity on [0,100], {:.1?}",
        worst,
        started.elapsed()
    );
}

#[test]
fn criterion_6_beam_splitter_laws() {
    let started = std::time::Instant::now();
    // coherent in, coherent out
    let d = 36;
    let mut worst: f64 = 0.0;
    for (a, b, tau) in [
        (c64(0.8, 0.3), c64(-0.4, 0.6), 0.62),
        (c64(1.2, 0.0), c64(0.5, -0.5), 0.25),
        (c64(0.0, 0.9), c64(0.7, 0.2), 0.85),
    ] {
        let cfg = ChannelConfig::new(tau, d).unwrap();
        let out = apply_bs(
            &DensityMatrix::coherent(a, d).unwrap(),
            &DensityMatrix::coherent(b, d).unwrap(),
            &cfg,
        )
        .unwrap();
        let target = DensityMatrix::coherent(
            a * tau.sqrt() + b * (1.0 - tau).sqrt(),
            cfg.output_cutoff,
        )
        .unwrap();
        let dist = trace_distance(&out, &target).unwrap();
        assert!(dist < 1e-8, "coherent law at tau={tau}: {dist}");
        worst = worst.max(dist);
    }
    // block unitarity at a large cutoff
    let defect = block_unitary(0.37, 90, SignConvention::NegativeReflection).max_unitarity_defect();
    assert!(defect < 1e-10, "unitarity defect {defect}");
    // displaced-ring mixing identity
    let tau = 0.55;
    let cfg = ChannelConfig::new(tau, d).unwrap();
    let out = apply_bs(
        &DensityMatrix::coherent(c64(0.9, 0.0), d).unwrap(),
        &DensityMatrix::phase_averaged(0.8, d).unwrap(),
        &cfg,
    )
    .unwrap();
    let target = DensityMatrix::displaced_phase_averaged(
        c64(0.9 * tau.sqrt(), 0.0),
        (1.0 - tau).sqrt() * 0.8,
        cfg.output_cutoff,
        4 * cfg.output_cutoff,
    )
    .unwrap();
    let mix_dist = trace_distance(&out, &target).unwrap();
    assert!(mix_dist < 1e-8, "ring mixing identity: {mix_dist}");
    println!(
        "ACCEPTANCE 6: PASS - coherent law (worst {:.2e}), unitarity defect {:.2e}, \
         ring mixing {:.2e}, {:.1?}",
        worst,
        defect,
        mix_dist,
        started.elapsed()
    );
}

#[test]
fn criterion_7_lemma_suite() {
    let started = std::time::Instant::now();
    // flat-type-to-iid domination, exhaustive for k <= 6, d <= 3
    for k in 1..=6usize {
        for d in 1..=3usize {
            for t in lemmas::enumerate_types(k, d) {
                let res = lemmas::type_to_iid_bound_check(&t).unwrap();
                assert!(res.holds, "type bound failed at k={k} d={d} {:?}", t.counts);
                assert!(t.size_bounds_hold().unwrap());
            }
        }
    }
    // local-to-global trace bound on 500 random states (k=3, d=4)
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
    for trial in 0..500 {
        let rho = lemmas::random_density(64, &mut rng);
        let q = lemmas::random_projector(4, 3, &mut rng);
        let res = lemmas::marginal_trace_bound_check(&rho, &q, 4, 3).unwrap();
        assert!(res.holds, "trial {trial}: {res:?}");
    }
    // photon-tail bounds
    for b_sq in [0.5f64, 1.0, 2.0] {
        for level in [44usize, 60, 88] {
            let res = lemmas::photon_tail_bound_check(&[(b_sq.sqrt(), 1.0)], level, 1.0).unwrap();
            assert!(res.raw_bound_applicable, "b^2={b_sq} N={level}");
            assert!(res.raw_bound_holds && res.mixed_bound_holds, "b^2={b_sq} N={level}");
        }
    }
    // type concentration Monte Carlo at the stated budget
    let ps = vec![vec![0.5, 0.5]; 1000];
    let conc = lemmas::type_concentration_check(&ps, 0.1, 100_000, 7).unwrap();
    assert!(conc.holds, "{conc:?}");
    // gentle measurement on 500 random pairs
    for trial in 0..500 {
        let dim = 16;
        let rho = lemmas::random_density(dim, &mut rng);
        let p = lemmas::random_projector(dim, 1 + trial % (dim - 1), &mut rng);
        let res = lemmas::gentle_measurement_check(&rho, &p).unwrap();
        assert!(res.holds, "trial {trial}: {res:?}");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "criterion 7 runtime {elapsed:?} exceeds 10 minutes"
    );
    println!(
        "ACCEPTANCE 7: PASS - exhaustive types, 500 trace-bound states, tail bounds, \
         1e5-trial concentration (tail {:.2e} <= {:.2e}), 500 gentle pairs, {:.1?}",
        conc.empirical_tail,
        conc.bound,
        elapsed
    );
}

#[test]
fn criterion_8_coding_simulator() {
    let started = std::time::Instant::now();
    // binary coherent codebook against the vacuum jammer at k = 1
    let d = 24;
    let alpha = 1.0f64;
    let cfg = ChannelConfig::new(1.0, d).unwrap().with_output_cutoff(d);
    let words = vec![vec![c64(0.0, 0.0)], vec![c64(alpha, 0.0)]];
    let outputs: Vec<DMatrix<Complex64>> = words
        .iter()
        .map(|w| {
            apply_bs_semiclassical(w[0], &JammerSpec::vacuum(), &cfg)
                .unwrap()
                .entries()
                .clone()
        })
        .collect();
    let code = Codebook {
        blocklength: 1,
        message_count: 2,
        codewords: words,
        energy_budget: alpha * alpha,
        per_mode_cutoff: d,
        tau: 1.0,
        decoder: pgm_decoder(&outputs).unwrap(),
    };
    code.validate().unwrap();
    let pgm = success_probability(&code, &JammerStrategy::Iid(JammerSpec::vacuum())).unwrap();
    let helstrom = 0.5 * (1.0 + (1.0 - (-alpha * alpha).exp()).sqrt());
    assert!(
        pgm <= helstrom + 1e-9 && pgm >= 0.95 * helstrom,
        "pgm {pgm} vs helstrom {helstrom}"
    );

    // common-randomness phase/permutation identity at k = 2, with an
    // asymmetric codebook so the permutation draw genuinely varies
    let words = vec![vec![c64(0.6, 0.0), c64(0.1, 0.2)], vec![c64(-0.2, 0.3), c64(0.5, 0.0)]];
    let outputs: Vec<DMatrix<Complex64>> = words
        .iter()
        .map(|w| {
            let cfg = ChannelConfig::new(0.8, 8).unwrap().with_output_cutoff(8);
            let m0 = apply_bs_semiclassical(w[0], &JammerSpec::vacuum(), &cfg).unwrap();
            let m1 = apply_bs_semiclassical(w[1], &JammerSpec::vacuum(), &cfg).unwrap();
            m0.entries().kronecker(m1.entries())
        })
        .collect();
    let code = Codebook {
        blocklength: 2,
        message_count: 2,
        codewords: words,
        energy_budget: 0.3,
        per_mode_cutoff: 8,
        tau: 0.8,
        decoder: pgm_decoder(&outputs).unwrap(),
    };
    code.validate().unwrap();
    let strategy = JammerStrategy::Product(vec![JammerSpec::phav(1.0), JammerSpec::vacuum()]);
    let rep = cr_average(&code, &strategy, 10_000, 42).unwrap();
    let gap = (rep.mc_mean - rep.symmetrized_value).abs();
    let band = (2.0 * rep.mc_std_error).max(1e-12); // roundoff floor
    assert!(
        rep.mc_std_error > 0.0,
        "sampler degenerated: zero Monte Carlo variance"
    );
    assert!(
        gap <= band,
        "CR identity: mc {} vs symmetrized {} (2 sigma = {:.3e})",
        rep.mc_mean,
        rep.symmetrized_value,
        band
    );
    println!(
        "ACCEPTANCE 8: PASS - PGM at {:.5} (helstrom {:.5}), CR identity gap {:.2e} \
         within 2 sigma ({:.2e}), {:.1?}",
        pgm,
        helstrom,
        gap,
        2.0 * rep.mc_std_error,
        started.elapsed()
    );
}

/// Supporting check used across criteria: the averaged constellation input
/// converges to the thermal state as the grid refines.
#[test]
fn grid_convergence_support_check() {
    let dim = 40;
    let target = DensityMatrix::thermal_with_tol(1.0, dim, 1e-4).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1.0, 0.5, 0.25, 0.125] {
        let grid = GridSpec::new(eps, 1.0).unwrap();
        let c: Constellation = build_grid_constellation(1.0, 1.01, &grid).unwrap();
        let dist = trace_distance(&c.average_state(dim).unwrap(), &target).unwrap();
        assert!(dist < last);
        last = dist;
    }
    assert!(last < 5e-3, "final distance {last}");
}
