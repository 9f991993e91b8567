use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use corrmine::concord::{concord_path, lambda_max_with, support_metrics, ConcordOptions, SupportMetrics};
use corrmine::generators::{
    kronecker_precision, sample_gaussian, sparse_random_precision, KroneckerConfig, PoissonField, PoissonFieldConfig,
    SparsePrecisionConfig,
};
use corrmine::io::{read_data_csv, read_triplets, write_data_csv, write_triplets};
use corrmine::matrix::{pseudo_partial_projection, zscore_project};
use corrmine::regimes::{contextual_isocline, task_isocline, ContextualKind, ScaleConstant, Task, TaskRegime};
use corrmine::rng::child_seed;
use corrmine::screening::design::{detectable_curve, sample_size_curve, SearchOptions};
use corrmine::screening::{
    ball_graph, crossing, critical_threshold, false_positive_prob, min_detectable_correlation,
    phase_transition_curve, screen_edges, sphere_constant, BallMode, NullModel, PhaseConfig, ScreenResult,
    ScreeningLaw, ScreeningPath,
};
use corrmine::{DataMatrix, Error, Role, SymMatrix, ZeroTolerance};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{Manifest, Output};
use crate::{
    Cli, Command, ConcordArgs, DesignArgs, DesignMode, Failure, Generate, ModelRole, NullKind, PhaseArgs, RegimeTable,
    RegimesArgs, ScreenArgs, Statistic,
};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let out = Output::new(&cli.out, cli.format)?;
    let manifest = match &cli.command {
        Command::Generate(g) => generate(cli, g, &out)?,
        Command::Screen(a) => screen(cli, a, &out)?,
        Command::Concord(a) => concord(cli, a, &out)?,
        Command::DesignCurve(a) => design_curve(cli, a, &out)?,
        Command::Phase(a) => phase(cli, a, &out)?,
        Command::Regimes(a) => regimes(cli, a, &out)?,
    };
    out.json("manifest.json", &manifest)
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a Command,
    format: crate::output::Format,
}

fn manifest(cli: &Cli, name: &str) -> Result<Manifest, Failure> {
    Manifest::new(name, cli.seed, &RunConfig { command: &cli.command, format: cli.format })
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path, e))
}

fn read_data(path: &Path) -> Result<DataMatrix, Failure> {
    read_data_csv(open(path)?).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path, role: Role) -> Result<SymMatrix, Failure> {
    read_triplets(open(path)?, role).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn write_model(out: &Output, model: &SymMatrix, name: &str) -> Result<(), Failure> {
    Ok(write_triplets(model, ZeroTolerance::default(), out.create(name)?)?)
}

fn write_data(out: &Output, data: &DataMatrix) -> Result<(), Failure> {
    Ok(write_data_csv(data, out.create("data.csv")?)?)
}

fn generate(cli: &Cli, g: &Generate, out: &Output) -> Result<Manifest, Failure> {
    let seed = cli.seed;
    let (name, model, data) = match g {
        Generate::Poisson(a) => {
            let mut cfg = PoissonFieldConfig::new(a.n1, a.n2);
            cfg.delta1 = a.delta1.unwrap_or(cfg.delta1);
            cfg.delta2 = a.delta2.unwrap_or(cfg.delta2);
            cfg.sigma_w = a.sigma;
            let field = PoissonField::new(cfg)?;
            let data = (a.samples > 0).then(|| field.sample_data(a.samples, seed)).transpose()?;
            ("generate poisson", field.precision(), data)
        }
        Generate::Sparse(a) => {
            let mut cfg = SparsePrecisionConfig::new(a.p, a.s, seed);
            cfg.magnitude = (a.magnitude_lo, a.magnitude_hi);
            let model = sparse_random_precision(&cfg)?;
            let data = (a.samples > 0).then(|| sample_gaussian(&model, a.samples, child_seed(seed, 1))).transpose()?;
            ("generate sparse", model, data)
        }
        Generate::Kronecker(a) => {
            let model = kronecker_precision(&KroneckerConfig::new(a.q, a.r, a.s_a, a.s_b, seed))?;
            let data = (a.samples > 0).then(|| sample_gaussian(&model, a.samples, child_seed(seed, 1))).transpose()?;
            ("generate kronecker", model, data)
        }
        Generate::Sample(a) => {
            let role = match a.role {
                ModelRole::Precision => Role::Precision,
                ModelRole::Covariance => Role::Covariance,
            };
            let model = read_model(&a.model, role)?;
            let data = sample_gaussian(&model, a.samples, seed)?;
            write_data(out, &data)?;
            return Ok(manifest(cli, "generate sample")?.constant("p", model.dim()));
        }
    };
    write_model(out, &model, "model.triplets")?;
    if let Some(data) = &data {
        write_data(out, data)?;
    }
    Ok(manifest(cli, name)?.constant("p", model.dim()).constant("zero_tolerance", ZeroTolerance::default().0))
}

#[derive(Serialize)]
struct EdgeRow {
    i: usize,
    j: usize,
    weight: f64,
}

#[derive(Serialize)]
struct HubRow {
    vertex: usize,
    degree: usize,
}

#[derive(Serialize)]
struct TruthReport {
    true_edges: usize,
    true_positive: usize,
    false_positive: usize,
    false_negative: usize,
    symmetric_difference: usize,
    sign_agreement_rate: f64,
    f1: f64,
}

impl TruthReport {
    fn new(m: SupportMetrics) -> Self {
        TruthReport {
            true_edges: m.true_positive + m.false_negative,
            true_positive: m.true_positive,
            false_positive: m.false_positive,
            false_negative: m.false_negative,
            symmetric_difference: m.false_positive + m.false_negative,
            sign_agreement_rate: m.sign_agreement_rate,
            f1: m.f1,
        }
    }
}

#[derive(Serialize)]
struct ScreenReport {
    n: usize,
    p: usize,
    rho: f64,
    threshold_used: f64,
    statistic: Statistic,
    path: Option<ScreeningPath>,
    rank: Option<usize>,
    search: &'static str,
    n_e: usize,
    hub_degree: usize,
    hub_count: usize,
    law: Option<ScreeningLaw>,
    truth: Option<TruthReport>,
}

fn screen(cli: &Cli, a: &ScreenArgs, out: &Output) -> Result<Manifest, Failure> {
    if !(0.0..=1.0).contains(&a.rho) {
        return Err(Failure::config(format!("rho must lie in [0, 1], got {}", a.rho)));
    }
    if a.hub_degree == 0 {
        return Err(Failure::config("hub-degree must be >= 1"));
    }
    if a.eps.is_some() && !a.fast {
        return Err(Failure::config("eps requires --fast"));
    }
    let data = read_data(&a.data)?;
    let truth = a.truth.as_deref().map(|t| read_model(t, Role::Precision)).transpose()?;
    let (n, p) = (data.n(), data.p());
    if let Some(t) = &truth {
        if t.dim() != p {
            return Err(Failure::config(format!("truth has dimension {}, data has {p} variables", t.dim())));
        }
    }
    // Both search modes read weights from the same unit vectors, so their
    // edge files agree byte for byte.
    let (u, path, role) = match a.statistic {
        Statistic::Correlation => (zscore_project(&data)?, None, Role::Correlation),
        Statistic::Partial => {
            let path = ScreeningPath::for_shape(n, p);
            let u = pseudo_partial_projection(&data)?;
            if path == ScreeningPath::StrictInverse && u.rank() != Some(p) {
                return Err(Error::SingularMatrix { condition: f64::INFINITY }.into());
            }
            (u, Some(path), Role::PartialCorrelation)
        }
    };
    let law = false_positive_prob(n as u64, p as u64, a.rho).ok();
    let (result, search) = if a.fast {
        let mode = a.eps.map_or(BallMode::Exact, BallMode::Approx);
        (ScreenResult::new(ball_graph(&u, a.rho, mode)?, a.hub_degree, law), "ball-graph")
    } else {
        let rows: Vec<Vec<f64>> = (0..p).into_par_iter().map(|i| (0..p).map(|j| if j > i { u.inner(i, j) } else { 0.0 }).collect()).collect();
        let m = DMatrix::from_fn(p, p, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => rows[i][j],
            std::cmp::Ordering::Greater => rows[j][i],
            std::cmp::Ordering::Equal => 1.0,
        });
        let dense = screen_edges(&SymMatrix::new(m, role)?, a.rho, Some(n))?;
        (ScreenResult::new(dense.graph, a.hub_degree, dense.law), "all-pairs")
    };
    let edges: Vec<EdgeRow> = result.graph.edges.iter().map(|e| EdgeRow { i: e.i, j: e.j, weight: e.weight }).collect();
    let degrees = result.graph.degrees();
    let hubs: Vec<HubRow> = result.hubs.iter().map(|&v| HubRow { vertex: v, degree: degrees[v] }).collect();
    out.table("edges", &edges)?;
    out.table("hubs", &hubs)?;
    let truth = truth.map(|t| support_metrics(&result.graph, &t)).transpose()?.map(TruthReport::new);
    out.json(
        "report.json",
        &ScreenReport {
            n,
            p,
            rho: a.rho,
            threshold_used: result.graph.threshold_used,
            statistic: a.statistic,
            path,
            rank: u.rank(),
            search,
            n_e: result.n_e,
            hub_degree: a.hub_degree,
            hub_count: result.hubs.len(),
            law: result.law,
            truth,
        },
    )?;
    Ok(manifest(cli, "screen")?
        .constant("a_n", sphere_constant(n as u64).ok())
        .constant("rho_c", critical_threshold(n as u64, p as u64).ok())
        .constant("zero_tolerance", ZeroTolerance::default().0))
}

#[derive(Serialize)]
struct PathRow {
    index: usize,
    lambda: f64,
    sweeps: usize,
    converged: bool,
    kkt_residual: f64,
    objective: f64,
    support_size: usize,
    f1: Option<f64>,
    true_positive: Option<usize>,
    false_positive: Option<usize>,
    false_negative: Option<usize>,
    sign_agreement_rate: Option<f64>,
}

#[derive(Serialize)]
struct FitSidecar<'a> {
    lambda: f64,
    sweeps: usize,
    converged: bool,
    kkt_residual: f64,
    objective_trace: &'a [f64],
}

#[derive(Serialize)]
struct ConcordSummary {
    selected_index: usize,
    selected_lambda: f64,
    selection: &'static str,
    lambda_max: f64,
    best_f1: Option<f64>,
}

fn concord(cli: &Cli, a: &ConcordArgs, out: &Output) -> Result<Manifest, Failure> {
    let opts = ConcordOptions { tol: a.tol, max_sweeps: a.max_sweeps, standardize: a.standardize };
    if !(a.tol > 0.0) {
        return Err(Failure::config(format!("tol must be > 0, got {}", a.tol)));
    }
    let data = read_data(&a.data)?;
    let truth = a.truth.as_deref().map(|t| read_model(t, Role::Precision)).transpose()?;
    let lmax = lambda_max_with(&data, &opts)?;
    let grid = match &a.lambdas {
        Some(g) => g.0.clone(),
        None => {
            if a.path_len == 0 {
                return Err(Failure::config("path-len must be >= 1"));
            }
            if !(a.min_ratio > 0.0 && a.min_ratio < 1.0) {
                return Err(Failure::config(format!("min-ratio must lie in (0, 1), got {}", a.min_ratio)));
            }
            if !(lmax > 0.0) {
                return Err(Failure::config("lambda_max is 0; pass --lambdas explicitly"));
            }
            let steps = a.path_len.saturating_sub(1).max(1) as f64;
            (0..a.path_len).map(|k| lmax * a.min_ratio.powf(k as f64 / steps)).collect()
        }
    };
    let states = concord_path(&data, &grid, &opts)?;
    let metrics: Vec<Option<SupportMetrics>> =
        states.iter().map(|s| truth.as_ref().map(|t| support_metrics(s, t)).transpose()).collect::<Result<_, _>>()?;
    let rows: Vec<PathRow> = states
        .iter()
        .zip(&metrics)
        .enumerate()
        .map(|(index, (s, m))| PathRow {
            index,
            lambda: s.lambda,
            sweeps: s.sweeps,
            converged: s.converged,
            kkt_residual: s.kkt_residual,
            objective: *s.objective_trace.last().unwrap_or(&f64::NAN),
            support_size: s.omega.support(ZeroTolerance::default()).len(),
            f1: m.map(|m| m.f1),
            true_positive: m.map(|m| m.true_positive),
            false_positive: m.map(|m| m.false_positive),
            false_negative: m.map(|m| m.false_negative),
            sign_agreement_rate: m.map(|m| m.sign_agreement_rate),
        })
        .collect();
    out.table("path", &rows)?;
    let (selected, selection) = if truth.is_some() {
        let best = (0..states.len()).fold(0, |b, k| if metrics[k].unwrap().f1 > metrics[b].unwrap().f1 { k } else { b });
        (best, "best-f1")
    } else {
        (states.len() - 1, "smallest-lambda")
    };
    let fit = &states[selected];
    write_model(out, &fit.omega, "omega.triplets")?;
    out.json(
        "fit.json",
        &FitSidecar {
            lambda: fit.lambda,
            sweeps: fit.sweeps,
            converged: fit.converged,
            kkt_residual: fit.kkt_residual,
            objective_trace: &fit.objective_trace,
        },
    )?;
    out.json(
        "metrics.json",
        &ConcordSummary {
            selected_index: selected,
            selected_lambda: fit.lambda,
            selection,
            lambda_max: lmax,
            best_f1: metrics[selected].map(|m| m.f1),
        },
    )?;
    Ok(manifest(cli, "concord")?
        .constant("lambda_max", lmax)
        .constant("tol", a.tol)
        .constant("zero_tolerance", ZeroTolerance::default().0))
}

fn design_curve(cli: &Cli, a: &DesignArgs, out: &Output) -> Result<Manifest, Failure> {
    let p = a.p.integers("p").map_err(Failure::config)?;
    match a.mode {
        DesignMode::SampleSize => out.table("curve", &sample_size_curve(&p, &a.rho.0, a.fwer)?)?,
        DesignMode::Detectable => {
            let n = a.n.integers("n").map_err(Failure::config)?;
            out.table("curve", &detectable_curve(&n, &p, a.fwer)?)?
        }
    }
    Ok(manifest(cli, "design-curve")?.constant("fwer", a.fwer).constant("max_n", SearchOptions::default().max_n))
}

#[derive(Serialize)]
struct PhaseSummary {
    path: ScreeningPath,
    trials: usize,
    empirical_half_crossing: Option<f64>,
    analytic_half_rho: Option<f64>,
}

fn phase(cli: &Cli, a: &PhaseArgs, out: &Output) -> Result<Manifest, Failure> {
    let null_model = match a.null {
        NullKind::Identity => NullModel::Identity,
        NullKind::Block => NullModel::BlockSparse { block_size: a.block_size, correlation: a.block_correlation },
    };
    let cfg = PhaseConfig { n: a.n, p: a.p, rho_grid: a.rho.0.clone(), trials: a.trials, null_model, seed: cli.seed };
    let table = phase_transition_curve(&cfg)?;
    out.table("phase", &table.rows)?;
    let analytic_half_rho = match null_model {
        NullModel::Identity => min_detectable_correlation(a.n as u64, a.p as u64, 0.5).ok(),
        NullModel::BlockSparse { .. } => None,
    };
    out.json(
        "summary.json",
        &PhaseSummary {
            path: table.path,
            trials: a.trials,
            empirical_half_crossing: crossing(&table.rows, 0.5),
            analytic_half_rho,
        },
    )?;
    Ok(manifest(cli, "phase")?
        .constant("a_n", sphere_constant(a.n as u64).ok())
        .constant("rho_c", critical_threshold(a.n as u64, a.p as u64).ok()))
}

#[derive(Serialize)]
struct RegimeRow {
    model_or_task: &'static str,
    level: f64,
    p: f64,
    n: f64,
    log_n: f64,
    q: Option<usize>,
    r: Option<usize>,
    m: Option<f64>,
    rho: Option<f64>,
}

fn regimes(cli: &Cli, a: &RegimesArgs, out: &Output) -> Result<Manifest, Failure> {
    let mut rows = Vec::new();
    match a.table {
        RegimeTable::Contextual => {
            let p = a.p.integers("p").map_err(Failure::config)?;
            let m = a.m.map_or(ScaleConstant::Auto, ScaleConstant::Fixed);
            for kind in ContextualKind::ALL {
                for pt in contextual_isocline(kind, m, a.level, &p)? {
                    rows.push(RegimeRow {
                        model_or_task: kind.name(),
                        level: a.level,
                        p: pt.p as f64,
                        n: pt.n,
                        log_n: pt.n.ln(),
                        q: Some(pt.q),
                        r: Some(pt.r),
                        m: pt.m,
                        rho: None,
                    });
                }
            }
        }
        RegimeTable::Tasks => {
            for task in Task::ALL {
                let regime = TaskRegime { task, alpha: a.alpha, beta: a.beta, nu: a.nu, screening_n: a.screening_n };
                for pt in task_isocline(&regime, a.level, &a.p.0)? {
                    rows.push(RegimeRow {
                        model_or_task: task.name(),
                        level: a.level,
                        p: pt.p,
                        n: pt.n,
                        log_n: pt.log_n,
                        q: None,
                        r: None,
                        m: None,
                        rho: pt.rho,
                    });
                }
            }
        }
    }
    out.table("regimes", &rows)?;
    Ok(manifest(cli, "regimes")?.constant("level", a.level))
}
