use std::io::Write;
use std::path::Path;

use qsr_core::convex_split::{verify_lemma, ConvexSplitInstance};
use qsr_core::entropies::{fidelity, hmin, imax, mutual_info, von_neumann_entropy};
use qsr_core::linalg::io::{fmt17, read_state, to_json, StateFile};
use qsr_core::linalg::{derive_seed, random_state, StateKind};
use qsr_core::protocols::{
    merge, redistribute, split, MeasurementMode, ProtocolOptions, ProtocolTranscript, RedistributionInput,
    DEFAULT_AMPLITUDE_CAP,
};
use qsr_core::qeps::{qeps_lower_recovery, qeps_upper, qeps_upper_sweep, QepsOptions};
use qsr_core::suite::{self, SuiteOptions};
use qsr_core::{RegisterLayout, StateVector};
use rayon::prelude::*;

use crate::{invalid, CliError, Common, GenArgs, Kind, ProtocolArgs, QepsArgs, SuiteArgs};

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn b(x: bool) -> String {
    x.to_string()
}

fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header).map_err(runtime)?;
    for r in rows {
        w.write_record(r).map_err(runtime)?;
    }
    w.flush().map_err(runtime)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    if jobs == 0 {
        return Err(invalid("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(runtime)
}

/// Runs `f` for every trial on the pool; results keep trial order.
fn trials<T: Send>(jobs: usize, n: u64, f: impl Fn(u64) -> Result<T, CliError> + Sync) -> Result<Vec<T>, CliError> {
    pool(jobs)?.install(|| (0..n).into_par_iter().map(&f).collect())
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    if a.dims.len() != a.labels.len() {
        return Err(invalid(format!("{} dims for {} labels", a.dims.len(), a.labels.len())));
    }
    if a.dims.iter().any(|&d| d == 0) {
        return Err(invalid("dimensions must be positive"));
    }
    let layout = RegisterLayout::new(a.labels.iter().map(String::as_str).zip(a.dims.iter().copied()))?;
    let kind = match a.kind {
        Kind::Pure => StateKind::Pure,
        Kind::Density => StateKind::Density,
    };
    let s = random_state(kind, layout, a.seed)?;
    write_text(a.out_path.as_deref(), &to_json(&s))
}

struct Input {
    id: String,
    state: StateFile,
}

fn load(c: &Common) -> Result<Option<Input>, CliError> {
    let Some(p) = &c.input_path else { return Ok(None) };
    let state = read_state(p)?;
    let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into());
    Ok(Some(Input { id, state }))
}

fn check_trials(c: &Common) -> Result<u64, CliError> {
    let t = c.trials.unwrap_or(1);
    if t == 0 {
        return Err(invalid("--trials must be at least 1"));
    }
    Ok(t)
}

/// The input file for every trial, or a fresh random state per trial.
fn inputs(c: &Common, kind: StateKind, default_dims: &[(&str, usize)]) -> Result<Vec<Input>, CliError> {
    let n = check_trials(c)?;
    if let Some(inp) = load(c)? {
        if c.dims.is_some() {
            return Err(invalid("--dims only applies to random inputs; drop it or --input"));
        }
        return Ok((0..n).map(|_| Input { id: inp.id.clone(), state: inp.state.clone() }).collect());
    }
    let dims: Vec<usize> = match &c.dims {
        Some(d) if d.len() != default_dims.len() => {
            return Err(invalid(format!("--dims needs {} entries", default_dims.len())));
        }
        Some(d) => d.clone(),
        None => default_dims.iter().map(|x| x.1).collect(),
    };
    if dims.iter().any(|&d| d == 0) {
        return Err(invalid("dimensions must be positive"));
    }
    let layout = RegisterLayout::new(default_dims.iter().map(|x| x.0).zip(dims))?;
    let seed = c.seed.unwrap_or(0);
    (0..n)
        .map(|i| Ok(Input { id: format!("random-{i}"), state: random_state(kind, layout.clone(), derive_seed(seed, i))? }))
        .collect()
}

pub fn quantities(c: &Common) -> Result<(), CliError> {
    let ins = inputs(c, StateKind::Density, &[("A", 2), ("B", 2)])?;
    if ins.iter().any(|i| i.state.layout().len() < 2) {
        return Err(invalid("quantities need at least two registers"));
    }
    let rows = trials(c.jobs, ins.len() as u64, |i| {
        let inp = &ins[i as usize];
        let rho = inp.state.to_density();
        let labels = rho.layout().labels();
        let (a, rest) = (&labels[..1], &labels[1..]);
        Ok(vec![
            inp.id.clone(),
            a[0].to_string(),
            rest.join(" "),
            fmt17(von_neumann_entropy(&rho)),
            fmt17(fidelity(&rho, &rho)?),
            fmt17(mutual_info(&rho, a, rest)?),
            fmt17(imax(&rho, a, rest)?.value),
            fmt17(hmin(&rho, a, rest)?.value),
        ])
    })?;
    let header = ["input_id", "first", "rest", "entropy", "fidelity_self", "mutual_info", "imax", "hmin"];
    write_csv(c.out_path.as_deref(), &header, &rows)
}

pub fn convexsplit(c: &Common) -> Result<(), CliError> {
    let delta = c.delta.unwrap_or(0.12);
    if !(delta > 0.0 && delta < 1.0 / 6.0) {
        return Err(invalid(format!("--delta {delta} not in (0, 1/6)")));
    }
    if c.n_override == Some(0) {
        return Err(invalid("--n-override must be at least 1"));
    }
    let ins = inputs(c, StateKind::Density, &[("P", 2), ("Q", 2)])?;
    if ins.iter().any(|i| i.state.layout().len() != 2) {
        return Err(invalid("convexsplit needs a state on exactly two registers [P, Q]"));
    }
    let rows = trials(c.jobs, ins.len() as u64, |i| {
        let inp = &ins[i as usize];
        let rho = inp.state.to_density();
        let q = rho.layout().labels()[1].to_string();
        let sigma = rho.marginal(&[q.as_str()])?;
        let inst = ConvexSplitInstance::new(rho, sigma, delta, c.n_override)?;
        let r = verify_lemma(&inst)?;
        Ok(vec![
            inp.id.clone(),
            fmt17(delta),
            fmt17(r.k),
            r.n.to_string(),
            fmt17(r.mutual_info),
            fmt17(r.fidelity_sq),
            b(r.bound_3delta_ok),
            b(r.bound_6delta_ok),
        ])
    })?;
    let header = ["input_id", "delta", "k", "n", "mutual_info", "fidelity_sq", "bound_3delta_ok", "bound_6delta_ok"];
    write_csv(c.out_path.as_deref(), &header, &rows)
}

#[derive(Debug, Clone, Copy)]
pub enum Which {
    Redistribute,
    Split,
    Merge,
}

fn pure_of(s: &StateFile) -> Result<StateVector, CliError> {
    match s {
        StateFile::Pure(p) => Ok(p.clone()),
        StateFile::Density(_) => Err(invalid("protocols need a pure state file (kind \"pure\")")),
    }
}

pub fn protocol(which: Which, a: &ProtocolArgs) -> Result<(), CliError> {
    let c = &a.common;
    let eps = c.eps.unwrap_or(0.15);
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(invalid(format!("--eps {eps} not in (0, 1/3)")));
    }
    if c.n_override == Some(0) {
        return Err(invalid("--n-override must be at least 1"));
    }
    if c.n_override.is_some() && !matches!(which, Which::Redistribute) {
        return Err(invalid("--n-override only applies to redistribute"));
    }
    let t_dim = c.t_dim.unwrap_or(1);
    if t_dim == 0 {
        return Err(invalid("--t-dim must be at least 1"));
    }
    let cap = a.amplitude_cap.unwrap_or(DEFAULT_AMPLITUDE_CAP);
    let layout: &[(&str, usize)] = match which {
        Which::Redistribute => &[("R", 2), ("A", 1), ("B", 2), ("C", 2)],
        Which::Split => &[("R", 2), ("A", 2), ("C", 2)],
        Which::Merge => &[("R", 2), ("B", 2), ("C", 2)],
    };
    let ins = inputs(c, StateKind::Pure, layout)?;
    let psis: Vec<StateVector> = ins.iter().map(|i| pure_of(&i.state)).collect::<Result<_, _>>()?;
    let seed = c.seed.unwrap_or(0);
    let results: Vec<ProtocolTranscript> = trials(c.jobs, ins.len() as u64, |i| {
        let opts = ProtocolOptions {
            qeps: QepsOptions { t_dim, t_cap: t_dim.max(qsr_core::qeps::DEFAULT_T_CAP), restarts: 2, iterations: 200, seed: 0 },
            amplitude_cap: cap,
            mode: if a.sampled { MeasurementMode::Sampled } else { MeasurementMode::Channel },
            seed: derive_seed(seed, i),
        };
        let psi = &psis[i as usize];
        Ok(match which {
            Which::Redistribute => {
                let input = RedistributionInput { psi: psi.clone(), eps, achieving_point: None, n_override: c.n_override };
                redistribute(&input, &opts)?
            }
            Which::Split => split(psi, eps, &opts)?,
            Which::Merge => merge(psi, eps, &opts)?,
        })
    })?;
    if let Some(p) = &a.report {
        let text = serde_json::to_string_pretty(&results).map_err(runtime)?;
        std::fs::write(p, text + "\n").map_err(|e| invalid(format!("{}: {e}", p.display())))?;
    }
    let rows: Vec<Vec<String>> = ins
        .iter()
        .zip(&results)
        .map(|(inp, t)| {
            vec![
                inp.id.clone(),
                fmt17(eps),
                t.n.to_string(),
                fmt17(t.comm_qubits),
                t.comm_qubits_operational.to_string(),
                fmt17(t.output_fidelity_sq),
                b(t.in_ball_2eps),
            ]
        })
        .collect();
    let header = ["input_id", "eps", "n", "comm_qubits", "operational_qubits", "out_fidelity_sq", "in_ball"];
    write_csv(c.out_path.as_deref(), &header, &rows)
}

pub fn qeps(a: &QepsArgs) -> Result<(), CliError> {
    let c = &a.common;
    let eps = c.eps.unwrap_or(0.1);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("--eps {eps} not in (0, 1)")));
    }
    let t_dim = c.t_dim.unwrap_or(1);
    if t_dim == 0 || a.restarts == 0 || a.iterations == 0 {
        return Err(invalid("--t-dim, --restarts and --iterations must be at least 1"));
    }
    let ins = inputs(c, StateKind::Pure, &[("R", 2), ("A", 1), ("B", 2), ("C", 2)])?;
    let psis: Vec<StateVector> = ins.iter().map(|i| pure_of(&i.state)).collect::<Result<_, _>>()?;
    let seed = c.seed.unwrap_or(0);
    let rows = trials(c.jobs, ins.len() as u64, |i| {
        let s = derive_seed(seed, i);
        let opts = QepsOptions { t_dim, t_cap: t_dim, restarts: a.restarts, iterations: a.iterations, seed: s };
        let psi = &psis[i as usize];
        let est = if a.sweep { qeps_upper_sweep(psi, eps, &opts)? } else { qeps_upper(psi, eps, &opts)? };
        let low = qeps_lower_recovery(psi, eps, s)?;
        Ok(vec![
            ins[i as usize].id.clone(),
            fmt17(eps),
            est.feasible_point.t_dim.to_string(),
            fmt17(est.upper),
            fmt17(low.optimized),
            a.restarts.to_string(),
            b(est.converged),
        ])
    })?;
    let header = ["input_id", "eps", "t_dim", "upper_bits", "lower_bits", "restarts", "converged"];
    write_csv(c.out_path.as_deref(), &header, &rows)
}

pub fn suite(a: &SuiteArgs) -> Result<(), CliError> {
    let d = SuiteOptions::default();
    let opts = SuiteOptions {
        seed: a.seed,
        protocol_cap: a.amplitude_cap.unwrap_or(d.protocol_cap),
        duality_cap: a.amplitude_cap.unwrap_or(d.duality_cap),
    };
    let ids: Vec<u32> = match &a.only {
        Some(v) => {
            if let Some(bad) = v.iter().find(|&&i| !(1..=11).contains(&i)) {
                return Err(invalid(format!("no criterion {bad}")));
            }
            // 9 and 10 share their runs
            let mut v: Vec<u32> = v.iter().map(|&i| if i == 10 { 9 } else { i }).collect();
            v.sort_unstable();
            v.dedup();
            v
        }
        None => vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 11],
    };
    let mut reports = Vec::new();
    for id in ids {
        for r in suite::run_criterion(id, &opts) {
            eprintln!("{}", r.line());
            for row in &r.table {
                eprintln!("    {row}");
            }
            reports.push(r);
        }
    }
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut detail = r.detail.clone();
            if !r.table.is_empty() {
                detail = format!("{detail}; {}", r.table.join("; "));
            }
            vec![
                r.id.to_string(),
                r.name.to_string(),
                b(r.passed),
                b(r.property_ok),
                format!("{:.3}", r.seconds),
                format!("{}", r.limit_seconds),
                detail,
            ]
        })
        .collect();
    let header = ["id", "name", "passed", "property_ok", "seconds", "limit_seconds", "detail"];
    write_csv(a.out_path.as_deref(), &header, &rows)?;
    let failed: Vec<u32> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("criteria {failed:?} failed")))
    }
}
