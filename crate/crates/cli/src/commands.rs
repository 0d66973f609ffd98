//! Subcommand bodies. Each one returns its files staged in memory; nothing touches the
//! output directory until the whole command has succeeded.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use q2ma_core::hamiltonian::Hamiltonian;
use q2ma_core::metropolis::{build_chain, classical_gap, mixing_time_estimate, ChainOptions, ChainWarning, MetropolisChain};
use q2ma_core::pea::leakage_analysis;
use q2ma_core::qsa::{
    controlled_w_budget, required_steps, run_annealing, AnnealOptions, AnnealSchedule, AnnealTrace, MeasurementMode,
};
use q2ma_core::spectral::{build_kick, EigenSystem, KickModel};
use q2ma_core::walk::{
    decomposition_residual, similarity_check, verify_gap_inequality, WalkOperator, WalkOptions, WalkSpace,
};
use q2ma_core::Tolerances;

use crate::config::{AnnealConfig, Config, HamiltonianConfig, InstanceConfig, KickConfig, ModeName, Steps};
use crate::error::CliError;
use crate::output::{csv_bytes, json_bytes, num, Staged};

/// Flags shared by every subcommand; they take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub mode: Option<ModeName>,
    pub lazy_chain: bool,
    pub allow_large: bool,
    /// Worker threads for `sweep`; `None` uses the rayon default.
    pub jobs: Option<usize>,
    pub tol: Tolerances,
}

impl RunOptions {
    fn chain_options(&self, config: &Config) -> ChainOptions {
        ChainOptions {
            lazy: self.lazy_chain || config.lazy_chain,
        }
    }

    fn walk_options(&self, config: &Config) -> WalkOptions {
        WalkOptions {
            allow_large: self.allow_large || config.allow_large,
        }
    }
}

struct Instance {
    h: Hamiltonian,
    system: EigenSystem,
    kick: KickModel,
}

fn instance(h: &HamiltonianConfig, kick: &KickConfig, tol: &Tolerances) -> Result<Instance, CliError> {
    let h = h.build()?;
    let system = EigenSystem::new(&h, tol)?;
    let kick = build_kick(&system, kick.kind(), tol)?;
    Ok(Instance { h, system, kick })
}

fn warning_json(w: &ChainWarning) -> serde_json::Value {
    match *w {
        ChainWarning::NegativeEigenvalue { index, value } => json!({ "negative_eigenvalue": { "index": index, "value": value } }),
    }
}

fn chain_for(inst: &Instance, beta: f64, opts: ChainOptions, tol: &Tolerances) -> Result<(MetropolisChain, f64), CliError> {
    let chain = build_chain(&inst.system, &inst.kick, beta, opts, tol)?;
    let delta = classical_gap(&chain, tol)?;
    Ok((chain, delta))
}

pub fn chain(config: &Config, opts: &RunOptions) -> Result<Staged, CliError> {
    let tol = &opts.tol;
    let inst = instance(config.hamiltonian()?, &config.kick, tol)?;
    let beta = config.beta()?;
    let (chain, delta) = chain_for(&inst, beta, opts.chain_options(config), tol)?;
    let m = chain.transition();
    let n = chain.dim();
    let rows: Vec<Vec<String>> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| vec![i.to_string(), j.to_string(), num(m[(i, j)])])
        .collect();
    let summary = json!({
        "beta": beta,
        "delta": delta,
        "eigenvalues": chain.eigenvalues(),
        "detailed_balance_residual": chain.detailed_balance_residual(),
        "stationary": chain.stationary(),
        "mixing_time_estimate": mixing_time_estimate(&chain, tol)?,
        "lazy": chain.is_lazy(),
        "warnings": chain.warnings().iter().map(warning_json).collect::<Vec<_>>(),
        "hamiltonian": inst.h.label(),
        "kick": config.kick,
    });
    let mut staged = Staged::default();
    staged.add("chain.csv", csv_bytes(&["i", "j", "m_ij"], &rows)?);
    staged.add("chain_summary.json", json_bytes(&summary)?);
    Ok(staged)
}

pub fn walk(config: &Config, opts: &RunOptions) -> Result<Staged, CliError> {
    let tol = &opts.tol;
    let inst = instance(config.hamiltonian()?, &config.kick, tol)?;
    let beta = config.beta()?;
    // Size limits are configuration errors and take precedence over chain structure.
    WalkSpace::new(&inst.system, &inst.kick, opts.chain_options(config).lazy, opts.walk_options(config))?;
    let (chain, _) = chain_for(&inst, beta, opts.chain_options(config), tol)?;
    let walk = WalkOperator::new(&inst.system, &inst.kick, &chain, opts.walk_options(config), tol)?;
    let gap = verify_gap_inequality(&walk, &chain, tol)?;
    let summary = json!({
        "beta": beta,
        "dim": walk.space().dim(),
        "delta_min": gap.delta_min,
        "two_sqrt_delta": gap.two_sqrt_delta,
        "ratio": gap.ratio,
        "all_nonnegative": gap.all_nonnegative,
        "pass": gap.pass,
        "fixed_point_residual": walk.fixed_point_residual(),
        "similarity_residual": similarity_check(&walk, &chain),
        "decomposition_residual": decomposition_residual(&walk, &chain),
        "unitarity_deviation": walk.w().unitarity_deviation(),
        "eigenphases": walk.eigenphases(),
        "chain_eigenvalues": chain.eigenvalues(),
        "eigenphase_convention": "exp(±2iθ_k), cos θ_k = λ_k",
        "hamiltonian": inst.h.label(),
        "kick": config.kick,
    });
    let mut staged = Staged::default();
    staged.add("walk_summary.json", json_bytes(&summary)?);
    Ok(staged)
}

fn step_counts(anneal: &AnnealConfig, beta: f64, h2: f64) -> Result<(Vec<usize>, bool), CliError> {
    let steps = match (&anneal.steps, anneal.epsilon) {
        (Some(Steps::One(d)), _) => (vec![*d], false),
        (Some(Steps::Many(ds)), _) => (ds.clone(), true),
        (None, Some(eps)) => (vec![required_steps(beta, h2, eps)?], false),
        (None, None) => return Err(CliError::Config("anneal needs `steps` or `epsilon`".into())),
    };
    if steps.0.iter().any(|&d| d == 0) {
        return Err(CliError::Config("step counts must be positive".into()));
    }
    let mut seen = steps.0.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != steps.0.len() {
        return Err(CliError::Config("step counts must be distinct".into()));
    }
    Ok(steps)
}

fn trace_rows(trace: &AnnealTrace) -> Vec<Vec<String>> {
    trace
        .steps
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                num(r.beta),
                num(r.overlap_sq),
                r.outcome.to_string(),
                num(r.cum_success),
                num(r.fidelity_to_exact),
                num(r.delta_min),
                r.cw_budget.to_string(),
            ]
        })
        .collect()
}

pub const TRACE_HEADER: [&str; 8] = [
    "step",
    "beta_j",
    "overlap_sq",
    "outcome",
    "cum_success",
    "fidelity_to_exact",
    "delta_min_j",
    "cw_budget_j",
];

pub fn anneal(config: &Config, opts: &RunOptions) -> Result<Staged, CliError> {
    let tol = &opts.tol;
    let inst = instance(config.hamiltonian()?, &config.kick, tol)?;
    let beta = config.beta()?;
    let anneal = config
        .anneal
        .as_ref()
        .ok_or_else(|| CliError::Config("config needs an `anneal` section".into()))?;
    let mode_name = opts.mode.unwrap_or(anneal.mode);
    let mode = anneal.measurement_mode(mode_name)?;
    let seed = opts.seed.unwrap_or(config.seed);
    let h2 = inst.h.second_moment();
    let (steps, many) = step_counts(anneal, beta, h2)?;
    let options = AnnealOptions {
        mode,
        policy: anneal.policy.policy(),
        max_retries: anneal.max_retries,
        chain: opts.chain_options(config),
        walk: opts.walk_options(config),
    };
    let mut staged = Staged::default();
    let mut runs = Vec::with_capacity(steps.len());
    for &d in &steps {
        let schedule = AnnealSchedule::new(beta, d, h2)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = run_annealing(&inst.system, &inst.kick, &schedule, &options, &mut rng, tol)?;
        let file = if many { format!("trace_d{d}.csv") } else { "trace.csv".to_string() };
        staged.add(file.clone(), csv_bytes(&TRACE_HEADER, &trace_rows(&trace))?);
        runs.push(json!({
            "d": d,
            "file": file,
            "final_fidelity": trace.final_fidelity,
            "final_trace_distance": trace.final_trace_distance,
            "final_gibbs_fidelity": trace.final_gibbs_fidelity,
            "cum_success": trace.cum_success,
            "zeno_infidelity": trace.zeno_infidelity(),
            "predicted_error": trace.predicted_error,
            "controlled_w_total": trace.controlled_w_total,
            "retries": trace.retries,
        }));
    }
    let budget = match chain_for(&inst, beta, options.chain, tol) {
        Ok((_, delta)) => {
            let schedule = AnnealSchedule::new(beta, steps[0], h2)?;
            let eps = schedule.predicted_error().min(0.5);
            let b = controlled_w_budget(&schedule, delta, eps)?;
            json!({ "delta": delta, "epsilon": eps, "quantum": b.quantum, "classical": b.classical, "ratio": b.ratio(), "log": "natural", "constants": 1 })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    let pea = match mode {
        MeasurementMode::Pea(p) => json!({ "bits": p.bits(), "repeats": p.repeats(), "window": p.window(), "time": p.time() }),
        MeasurementMode::Exact => serde_json::Value::Null,
    };
    let metadata = json!({
        "hamiltonian": inst.h.label(),
        "kick": config.kick,
        "schedule": { "kind": "linear", "beta": beta, "steps": steps, "h2": h2 },
        "seed": seed,
        "rng": "ChaCha8",
        "mode": mode_name,
        "pea": pea,
        "policy": anneal.policy,
        "max_retries": anneal.max_retries,
        "lazy_chain": options.chain.lazy,
        "budget": budget,
        "runs": runs,
    });
    staged.add("anneal_metadata.json", json_bytes(&metadata)?);
    Ok(staged)
}

pub const SWEEP_HEADER: [&str; 8] = ["instance", "beta", "delta", "delta_min", "ratio", "pass", "all_nonnegative", "error"];

#[derive(Debug, Clone)]
struct SweepRow {
    name: String,
    beta: f64,
    outcome: Result<(f64, f64, f64, bool, bool), String>,
}

fn sweep_instance(name: String, spec: &InstanceConfig, config: &Config, opts: &RunOptions) -> SweepRow {
    let tol = &opts.tol;
    let outcome = (|| -> Result<_, CliError> {
        let inst = instance(&spec.hamiltonian, &spec.kick, tol)?;
        let (chain, delta) = chain_for(&inst, spec.beta, opts.chain_options(config), tol)?;
        let walk = WalkOperator::new(&inst.system, &inst.kick, &chain, opts.walk_options(config), tol)?;
        let gap = verify_gap_inequality(&walk, &chain, tol)?;
        Ok((delta, gap.delta_min, gap.ratio, gap.pass, gap.all_nonnegative))
    })()
    .map_err(|e| e.to_string());
    SweepRow {
        name,
        beta: spec.beta,
        outcome,
    }
}

pub fn sweep(config: &Config, opts: &RunOptions) -> Result<Staged, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("config needs a `sweep` section".into()))?;
    let named: Vec<(String, &InstanceConfig)> = sweep
        .instances
        .iter()
        .enumerate()
        .map(|(k, s)| (s.name.clone().unwrap_or_else(|| format!("inst{k:03}")), s))
        .collect();
    let run = || -> Vec<SweepRow> {
        named
            .par_iter()
            .map(|(name, spec)| sweep_instance(name.clone(), spec, config, opts))
            .collect()
    };
    let mut rows = match opts.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("cannot start workers: {e}")))?
            .install(run),
        None => run(),
    };
    rows.sort_by(|a, b| a.name.cmp(&b.name).then(a.beta.total_cmp(&b.beta)));
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| match &r.outcome {
            Ok((delta, dmin, ratio, pass, nonneg)) => vec![
                r.name.clone(),
                num(r.beta),
                num(*delta),
                num(*dmin),
                num(*ratio),
                pass.to_string(),
                nonneg.to_string(),
                String::new(),
            ],
            Err(e) => vec![
                r.name.clone(),
                num(r.beta),
                String::new(),
                String::new(),
                String::new(),
                "false".into(),
                String::new(),
                e.clone(),
            ],
        })
        .collect();
    let mut staged = Staged::default();
    staged.add("sweep.csv", csv_bytes(&SWEEP_HEADER, &records)?);
    Ok(staged)
}

pub fn leakage(config: &Config, opts: &RunOptions) -> Result<Staged, CliError> {
    let tol = &opts.tol;
    let inst = instance(config.hamiltonian()?, &config.kick, tol)?;
    let settings = config.leakage.clone().unwrap_or_default();
    let mut bits = settings.bits.clone();
    bits.sort_unstable();
    bits.dedup();
    if bits.is_empty() || bits.iter().any(|&b| b == 0 || b > 52) {
        return Err(CliError::Config("leakage `bits` must be a non-empty list in 1..=52".into()));
    }
    let reports = bits
        .iter()
        .map(|&b| {
            let window = 1.0 / (1u64 << b) as f64;
            leakage_analysis(&inst.system, &inst.kick, window, settings.margin, settings.threshold)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let finest = reports.last().expect("non-empty");
    let mut header: Vec<String> = ["i", "E_i_normalized", "eta_i", "omega_i"].iter().map(|s| s.to_string()).collect();
    header.extend(bits.iter().map(|b| format!("eta_a{b}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..inst.system.dim())
        .map(|i| {
            let mut row = vec![
                i.to_string(),
                num(finest.normalized_energies[i]),
                num(finest.eta[i]),
                num(finest.omega[i]),
            ];
            row.extend(reports.iter().map(|r| num(r.eta[i])));
            row
        })
        .collect();
    let windows: Vec<_> = bits
        .iter()
        .zip(&reports)
        .map(|(b, r)| {
            json!({
                "bits": b,
                "window": r.window,
                "max_eta": r.max_eta(),
                "mean_eta": r.mean_eta(),
                "flagged": r.flagged(),
                "pass": r.passes(),
            })
        })
        .collect();
    let summary = json!({
        "hamiltonian": inst.h.label(),
        "kick": config.kick,
        "config": settings,
        "eta_definition": "sum of s_ik over k != i with |E_i - E_k| < window, normalized energies",
        "threshold_note": "0.1 is a calibration of 'eta << 1', not a derived bound",
        "windows": windows,
    });
    let mut staged = Staged::default();
    staged.add("leakage.csv", csv_bytes(&header_refs, &rows)?);
    staged.add("leakage_config.json", json_bytes(&summary)?);
    Ok(staged)
}
