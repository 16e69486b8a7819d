//! Subcommand implementations: scenario configs in, CSV tables and JSON
//! summaries out.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::Rng as _;
use rand::SeedableRng as _;
use serde::{Deserialize, Serialize};

use bosonic_avc_core::capacity::{self, GridSpec, MinimaxConfig};
use bosonic_avc_core::coding::{
    self, CodebookConfig, JammerStrategy, ProductJammerFamily,
};
use bosonic_avc_core::entropy;
use bosonic_avc_core::epi::{self, ScanConfig};
use bosonic_avc_core::fock::{choose_cutoff, DensityMatrix, JammerSpec};
use bosonic_avc_core::lemmas;

use crate::manifest::{fmt_f64, RunManifest};

pub fn write_csv(path: &Path, manifest: &RunManifest, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut body = String::new();
    body.push_str(&manifest.comment_line());
    body.push('\n');
    body.push_str(&header.join(","));
    body.push('\n');
    for row in rows {
        body.push_str(&row.join(","));
        body.push('\n');
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub struct CommonOverrides {
    pub seed: Option<u64>,
    pub cutoff_override: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Serialize)]
struct EpiSummary {
    min_gap: f64,
    argmin: Option<epi::GapRecord>,
    candidates: usize,
    reclassified_numerical: usize,
    confirmed_violations: Vec<epi::GapRecord>,
    records: usize,
    manifest: RunManifest,
}

pub fn cmd_epi_scan(config_path: &Path, out_dir: &Path, ov: &CommonOverrides) -> Result<i32> {
    let bytes = fs::read(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let mut config: ScanConfig = serde_json::from_slice(&bytes)
        .map_err(|e| anyhow::anyhow!("config parse error at line {}: {}", e.line(), e))?;
    if let Some(seed) = ov.seed {
        config.seed = seed;
    }
    if let Some(cut) = ov.cutoff_override {
        config.cutoff = cut;
    }
    if let Some(tol) = ov.tolerance {
        config.violation_threshold = -tol.abs();
    }
    let report = epi::scan_families(&config)?;
    let manifest = RunManifest::new("epi-scan", &serde_json::to_vec(&config)?, vec![config.seed])
        .with_cutoff("scan", config.cutoff)
        .with_cutoff("confirmation", 2 * config.cutoff);
    ensure_dir(out_dir)?;
    let header = [
        "x_label",
        "y_label",
        "lambda",
        "lhs",
        "rhs",
        "gap",
        "cutoff",
        "deficit_budget",
    ];
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.x_label.clone(),
                r.y_label.clone(),
                fmt_f64(r.lambda),
                fmt_f64(r.lhs_bits),
                fmt_f64(r.rhs_bits),
                fmt_f64(r.gap),
                r.cutoff.to_string(),
                fmt_f64(r.deficit_budget),
            ]
        })
        .collect();
    write_csv(&out_dir.join("epi_scan.csv"), &manifest, &header, &rows)?;
    let summary = EpiSummary {
        min_gap: report.min_gap,
        argmin: report.argmin.clone(),
        candidates: report.candidates,
        reclassified_numerical: report.reclassified_numerical,
        confirmed_violations: report.confirmed_violations.clone(),
        records: report.records.len(),
        manifest,
    };
    write_json(&out_dir.join("epi_scan_summary.json"), &summary)?;
    println!(
        "epi-scan: {} records, min gap {:.6e}, {} candidate(s), {} confirmed",
        report.records.len(),
        report.min_gap,
        report.candidates,
        report.confirmed_violations.len()
    );
    Ok(if report.confirmed_violations.is_empty() { 0 } else { 4 })
}

#[derive(Serialize)]
struct CapacitySummary {
    result: capacity::MinimaxResult,
    relative_gap_to_closed_form: f64,
    manifest: RunManifest,
}

pub fn cmd_capacity(config_path: &Path, out_dir: &Path, ov: &CommonOverrides) -> Result<i32> {
    let bytes = fs::read(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let mut config: MinimaxConfig = serde_json::from_slice(&bytes)
        .map_err(|e| anyhow::anyhow!("config parse error at line {}: {}", e.line(), e))?;
    if let Some(cut) = ov.cutoff_override {
        config.cutoff_override = Some(cut);
    }
    let result = capacity::outer_max_input(&config)?;
    let manifest = RunManifest::new("capacity", &serde_json::to_vec(&config)?, vec![])
        .with_cutoff("working", result.cutoff)
        .with_deficit("aggregates", result.deficit_budget);
    ensure_dir(out_dir)?;
    let header = [
        "stage",
        "epsilon",
        "e_prime",
        "points",
        "mean_energy",
        "value_bits",
        "jammer_energy",
        "cutoff",
        "deficit",
    ];
    let rows: Vec<Vec<String>> = result
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                i.to_string(),
                fmt_f64(s.epsilon),
                fmt_f64(s.e_prime),
                s.points.to_string(),
                fmt_f64(s.mean_energy),
                fmt_f64(s.value_bits),
                fmt_f64(s.jammer.mean_energy),
                s.cutoff.to_string(),
                fmt_f64(s.deficit),
            ]
        })
        .collect();
    write_csv(&out_dir.join("capacity_trace.csv"), &manifest, &header, &rows)?;
    let rel = if result.closed_form_bits > 0.0 {
        (result.closed_form_bits - result.value_bits) / result.closed_form_bits
    } else {
        0.0
    };
    println!(
        "capacity: value {:.7} bits, closed form {:.7} bits, relative gap {:.3e}",
        result.value_bits, result.closed_form_bits, rel
    );
    let summary = CapacitySummary {
        result,
        relative_gap_to_closed_form: rel,
        manifest,
    };
    write_json(&out_dir.join("capacity_result.json"), &summary)?;
    Ok(0)
}

#[derive(Serialize)]
struct LemmaRow {
    lemma: String,
    case: String,
    holds: bool,
    detail: String,
}

#[derive(Serialize)]
struct LemmaSummary {
    rows: Vec<LemmaRow>,
    all_pass: bool,
    manifest: RunManifest,
}

pub struct LemmaOptions {
    pub selector: String,
    pub blocklength: Option<usize>,
    pub alphabet: Option<usize>,
    pub trials: Option<usize>,
}

pub fn cmd_lemma_check(
    opts: &LemmaOptions,
    out_dir: Option<&Path>,
    ov: &CommonOverrides,
) -> Result<i32> {
    let seed = ov.seed.unwrap_or(7);
    let mut rows: Vec<LemmaRow> = Vec::new();
    let selected = |id: &str| opts.selector == "all" || opts.selector == id;
    let known = ["all", "1", "2", "3", "4", "5", "gentle"];
    if !known.contains(&opts.selector.as_str()) {
        return Err(bosonic_avc_core::AvcError::Config(format!(
            "unknown lemma selector '{}'; use one of {known:?}",
            opts.selector
        ))
        .into());
    }

    if selected("1") {
        let k = opts.blocklength.unwrap_or(3).min(5);
        let d = opts.alphabet.unwrap_or(4).min(6);
        let trials = opts.trials.unwrap_or(100);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut all = true;
        for _ in 0..trials {
            let rho = lemmas::random_density(d.pow(k as u32), &mut rng);
            let q = lemmas::random_projector(d, d - 1, &mut rng);
            all &= lemmas::marginal_trace_bound_check(&rho, &q, d, k)?.holds;
        }
        rows.push(LemmaRow {
            lemma: "1".into(),
            case: format!("{trials} random states, k={k}, d={d}"),
            holds: all,
            detail: "tr Q^k rho >= 1 - k eps with the full induction chain".into(),
        });
    }
    if selected("2") {
        let k = opts.blocklength.unwrap_or(4).min(6);
        let cutoff = 5usize;
        let trials = opts.trials.unwrap_or(25);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x22);
        let mut all = true;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let factors: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let raw: Vec<f64> = (0..cutoff)
                        .map(|_| rng.gen::<f64>() + 1e-3)
                        .collect();
                    let tot: f64 = raw.iter().sum();
                    raw.iter().map(|x| x / tot).collect()
                })
                .collect();
            let res = lemmas::symmetrized_marginal_check(&factors, cutoff as f64)?;
            all &= res.marginal_matches_mean && res.energy_preserved;
            worst = worst.max(res.max_marginal_deviation);
        }
        rows.push(LemmaRow {
            lemma: "2".into(),
            case: format!("{trials} random diagonal products, k={k}"),
            holds: all,
            detail: format!("max marginal deviation {worst:.3e}"),
        });
    }
    if selected("3") {
        let mut all = true;
        let mut cases = 0;
        for b_sq in [0.5f64, 1.0, 2.0] {
            for level in [44usize, 60, 88] {
                let res = lemmas::photon_tail_bound_check(&[(b_sq.sqrt(), 1.0)], level, 1.0)?;
                all &= res.raw_bound_holds && res.mixed_bound_holds;
                cases += 1;
            }
        }
        rows.push(LemmaRow {
            lemma: "3".into(),
            case: format!("{cases} (ring energy, level) pairs"),
            holds: all,
            detail: "Poisson tails vs 4^-N and the sub-Gaussian mixture bound".into(),
        });
    }
    if selected("4") {
        let k = opts.blocklength.unwrap_or(1000);
        let d = opts.alphabet.unwrap_or(2);
        let trials = opts.trials.unwrap_or(10_000);
        let ps = vec![vec![1.0 / d as f64; d]; k];
        let res = lemmas::type_concentration_check(&ps, 0.1, trials, seed)?;
        rows.push(LemmaRow {
            lemma: "4".into(),
            case: format!("{trials} trials, d={d}, k={k}, eps=0.1"),
            holds: res.holds,
            detail: format!(
                "empirical tail {:.4e} vs bound {:.4e} (C=2 suffices: {})",
                res.empirical_tail,
                res.bound,
                res.sufficient_c <= 2.0
            ),
        });
    }
    if selected("5") {
        let k = opts.blocklength.unwrap_or(6);
        let d = opts.alphabet.unwrap_or(3);
        let mut all = true;
        let mut count = 0;
        for t in lemmas::enumerate_types(k, d) {
            let res = lemmas::type_to_iid_bound_check(&t)?;
            all &= res.holds;
            all &= t.size_bounds_hold()?;
            count += 1;
        }
        rows.push(LemmaRow {
            lemma: "5".into(),
            case: format!("all {count} types with k={k}, d={d}"),
            holds: all,
            detail: "exact integer domination and type-size sandwich".into(),
        });
    }
    if selected("gentle") {
        let trials = opts.trials.unwrap_or(100);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x6e);
        let mut all = true;
        for t in 0..trials {
            let dim = 12;
            let rho = lemmas::random_density(dim, &mut rng);
            let p = lemmas::random_projector(dim, 1 + t % (dim - 1), &mut rng);
            all &= lemmas::gentle_measurement_check(&rho, &p)?.holds;
        }
        rows.push(LemmaRow {
            lemma: "gentle".into(),
            case: format!("{trials} random state/projector pairs"),
            holds: all,
            detail: "|| P rho P - rho ||_1 <= 2 sqrt(tr((1-P) rho))".into(),
        });
    }

    let all_pass = rows.iter().all(|r| r.holds);
    for r in &rows {
        println!(
            "lemma {:<6} {} [{}] {}",
            r.lemma,
            if r.holds { "PASS" } else { "FAIL" },
            r.case,
            r.detail
        );
    }
    let manifest = RunManifest::new(
        "lemma-check",
        format!(
            "{}:{:?}:{:?}:{:?}",
            opts.selector, opts.blocklength, opts.alphabet, opts.trials
        )
        .as_bytes(),
        vec![seed],
    );
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_json(
            &dir.join("lemma_check.json"),
            &LemmaSummary {
                rows,
                all_pass,
                manifest,
            },
        )?;
    }
    Ok(if all_pass { 0 } else { 4 })
}

fn default_pruning_delta() -> f64 {
    f64::INFINITY
}

fn default_base_epsilon() -> f64 {
    0.5
}

fn default_base_fraction() -> f64 {
    0.9
}

fn default_cr_samples() -> usize {
    2000
}

fn default_max_tries() -> usize {
    100_000
}

fn default_product_families() -> Vec<ProductJammerFamily> {
    vec![
        ProductJammerFamily::Vacuum,
        ProductJammerFamily::IidThermal,
        ProductJammerFamily::IidPhav,
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeSimConfig {
    pub tau: f64,
    pub blocklength: usize,
    pub message_count: usize,
    pub energy_budget: f64,
    pub jammer_power: f64,
    pub per_mode_cutoff: usize,
    #[serde(default = "default_pruning_delta")]
    pub pruning_delta: f64,
    #[serde(default = "default_base_epsilon")]
    pub base_epsilon: f64,
    #[serde(default = "default_base_fraction")]
    pub base_variance_fraction: f64,
    #[serde(default = "default_product_families")]
    pub families: Vec<ProductJammerFamily>,
    #[serde(default = "default_cr_samples")]
    pub cr_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_tries")]
    pub max_tries: usize,
}

#[derive(Serialize)]
struct CodeSimMeta {
    config: CodeSimConfig,
    energy_constraint: &'static str,
    decoder: &'static str,
    worst_case_is_upper_bound: bool,
    manifest: RunManifest,
}

pub fn cmd_code_sim(config_path: &Path, out_dir: &Path, ov: &CommonOverrides) -> Result<i32> {
    let bytes = fs::read(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let mut config: CodeSimConfig = serde_json::from_slice(&bytes)
        .map_err(|e| anyhow::anyhow!("config parse error at line {}: {}", e.line(), e))?;
    if let Some(seed) = ov.seed {
        config.seed = seed;
    }
    if let Some(cut) = ov.cutoff_override {
        config.per_mode_cutoff = cut;
    }
    let e_prime = config.base_variance_fraction * config.energy_budget;
    let base = if e_prime > 0.0 {
        capacity::build_grid_constellation(
            e_prime,
            config.energy_budget,
            &GridSpec::new(config.base_epsilon, e_prime)?,
        )?
    } else {
        bosonic_avc_core::fock::Constellation::single(Complex64::new(0.0, 0.0))
    };
    let cb_cfg = CodebookConfig {
        blocklength: config.blocklength,
        message_count: config.message_count,
        energy_budget: config.energy_budget,
        tau: config.tau,
        per_mode_cutoff: config.per_mode_cutoff,
        pruning_delta: config.pruning_delta,
        design_jammer: JammerSpec::vacuum(),
        max_tries: config.max_tries,
    };
    let code = coding::draw_codebook(&base, &cb_cfg, config.seed)?;
    let vacuum = coding::success_probability(&code, &JammerStrategy::Iid(JammerSpec::vacuum()))?;
    let (worst, worst_strategy) =
        coding::worst_case_jammer(&code, &config.families, config.jammer_power)?;
    let cr = coding::cr_average(
        &code,
        &JammerStrategy::Iid(JammerSpec::thermal(config.jammer_power)),
        config.cr_samples,
        config.seed.wrapping_add(1),
    )?;
    let manifest = RunManifest::new(
        "code-sim",
        &serde_json::to_vec(&config)?,
        vec![config.seed, config.seed.wrapping_add(1)],
    )
    .with_cutoff("per_mode", config.per_mode_cutoff);
    ensure_dir(out_dir)?;
    let header = ["quantity", "value", "detail"];
    let rows = vec![
        vec![
            "success_vacuum".into(),
            fmt_f64(vacuum),
            "iid vacuum jammer".into(),
        ],
        vec![
            "success_worst_case".into(),
            fmt_f64(worst),
            format!("{worst_strategy:?}").replace(',', ";"),
        ],
        vec![
            "cr_mc_mean".into(),
            fmt_f64(cr.mc_mean),
            format!("{} samples", cr.samples),
        ],
        vec![
            "cr_mc_std_error".into(),
            fmt_f64(cr.mc_std_error),
            "".into(),
        ],
        vec![
            "cr_symmetrized_value".into(),
            fmt_f64(cr.symmetrized_value),
            "success against the symmetrized jammer".into(),
        ],
    ];
    write_csv(&out_dir.join("code_sim.csv"), &manifest, &header, &rows)?;
    write_json(
        &out_dir.join("code_sim_meta.json"),
        &CodeSimMeta {
            config,
            energy_constraint: "per_symbol_average",
            decoder: "pretty_good_measurement",
            worst_case_is_upper_bound: true,
            manifest,
        },
    )?;
    println!(
        "code-sim: vacuum {vacuum:.6}, worst-case {worst:.6}, CR mean {:.6} (+-{:.2e})",
        cr.mc_mean, cr.mc_std_error
    );
    Ok(0)
}

pub struct StateInfoOptions {
    pub kind: String,
    pub param: f64,
    pub param_im: f64,
    pub param2: f64,
    pub cutoff: Option<usize>,
    pub nats: bool,
}

#[derive(Serialize)]
struct StateInfo {
    kind: String,
    cutoff: usize,
    trace: f64,
    trace_deficit: f64,
    energy: f64,
    entropy: f64,
    entropy_unit: &'static str,
    top_eigenvalues: Vec<f64>,
    manifest: RunManifest,
}

pub fn cmd_state_info(
    opts: &StateInfoOptions,
    out_dir: Option<&Path>,
    ov: &CommonOverrides,
) -> Result<i32> {
    let tol = ov.tolerance.unwrap_or(1e-8);
    let energy_scale = opts.param * opts.param + opts.param_im * opts.param_im + opts.param2;
    let cutoff = ov
        .cutoff_override
        .or(opts.cutoff)
        .unwrap_or_else(|| choose_cutoff(energy_scale.max(0.5), (tol * 1e-2).min(1e-10)).max(16));
    let state = match opts.kind.as_str() {
        "vacuum" => DensityMatrix::vacuum(cutoff),
        "fock" => {
            let n = opts.param as usize;
            anyhow::ensure!(n < cutoff, "fock level {n} needs a larger cutoff");
            DensityMatrix::fock(n, cutoff)
        }
        "coherent" => DensityMatrix::coherent_with_tol(
            Complex64::new(opts.param, opts.param_im),
            cutoff,
            tol,
        )?,
        "thermal" => DensityMatrix::thermal_with_tol(opts.param, cutoff, tol)?,
        "phav" => DensityMatrix::phase_averaged_with_tol(opts.param, cutoff, tol)?,
        "dphav" => DensityMatrix::displaced_phase_averaged_with_tol(
            Complex64::new(opts.param, opts.param_im),
            opts.param2,
            cutoff,
            4 * cutoff,
            tol,
        )?,
        other => anyhow::bail!("unknown state kind '{other}'"),
    };
    state.validate()?;
    let report = entropy::von_neumann_entropy(&state)?;
    let (entropy_value, unit) = if opts.nats {
        (report.value_bits * std::f64::consts::LN_2, "nats")
    } else {
        (report.value_bits, "bits")
    };
    let mut eigs = bosonic_avc_core::entropy::state_eigenvalues(&state);
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eigs.truncate(12);
    println!(
        "{} on {} levels: trace {:.12}, deficit {:.3e}, energy {:.9}, entropy {:.9} {}",
        opts.kind,
        cutoff,
        state.trace(),
        state.trace_deficit(),
        state.energy(),
        entropy_value,
        unit
    );
    println!("top eigenvalues: {:?}", eigs);
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        let manifest = RunManifest::new(
            "state-info",
            format!("{}:{}:{}:{}", opts.kind, opts.param, opts.param_im, opts.param2).as_bytes(),
            vec![],
        )
        .with_cutoff("state", cutoff);
        write_json(
            &dir.join("state_info.json"),
            &StateInfo {
                kind: opts.kind.clone(),
                cutoff,
                trace: state.trace(),
                trace_deficit: state.trace_deficit(),
                energy: state.energy(),
                entropy: entropy_value,
                entropy_unit: unit,
                top_eigenvalues: eigs,
                manifest,
            },
        )?;
    }
    Ok(0)
}

/// Map a core error onto the documented exit codes.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    use bosonic_avc_core::AvcError::*;
    if let Some(core) = err.downcast_ref::<bosonic_avc_core::AvcError>() {
        return match core {
            Config(_) | Domain(_) | DimensionMismatch { .. } | EmptyFamily => 2,
            Truncation { .. } | NumericalBudget(_) | RejectionBudget { .. } => 3,
            NegativeEigenvalue { .. } | Invariant(_) | SupportMismatch { .. } => 4,
        };
    }
    if err.to_string().contains("config parse error") {
        return 2;
    }
    1
}
