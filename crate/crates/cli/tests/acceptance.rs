//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line
//! with the measured values (visible with `--nocapture`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use corrmine::concord::{concord_fit, concord_objective, concord_path, lambda_max, support_metrics, ConcordOptions, ConcordState};
use corrmine::generators::{sample_gaussian, sparse_random_precision, PoissonField, PoissonFieldConfig, SparsePrecisionConfig};
use corrmine::matrix::{
    correlation_matrix, partial_correlation, precision, pseudo_partial_projection, sample_covariance, zscore_project,
    InverseMode,
};
use corrmine::regimes::{
    contextual_bound, contextual_required_n, task_bound, task_isocline, task_log_bound, ContextualKind, ContextualModel,
    ScaleConstant, Task, TaskRegime,
};
use corrmine::rng::substream;
use corrmine::screening::design::min_sample_size;
use corrmine::screening::sweep::{best_threshold, explosion_onset, support_sweep};
use corrmine::screening::{
    ball_graph, critical_threshold, crossing, min_detectable_correlation, phase_transition_curve, screen_edges,
    sphere_constant, BallMode, NullModel, PhaseConfig,
};
use corrmine::{DataMatrix, Role, SymMatrix};
use nalgebra::DMatrix;
use rand::Rng;

fn report(criterion: u32, pass: bool, detail: String) {
    println!("criterion {criterion:>2}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

#[test]
fn criterion_01_critical_threshold_band() {
    // 50-digit evaluation of the closed form
    #[allow(clippy::excessive_precision)]
    let reference = 0.112_563_503_715_058_809_15;
    let rc = critical_threshold(1500, 900).unwrap();
    let rel = (rc - reference).abs() / reference;
    report(1, rc > 0.0791 && rc < 0.13978 && rel <= 1e-10, format!("rho_c(1500, 900) = {rc:.15}, relative error {rel:.2e}"));
}

#[test]
fn criterion_02_sphere_constant_closed_forms() {
    let a3 = sphere_constant(3).unwrap();
    let a4 = sphere_constant(4).unwrap();
    let e3 = (a3 - std::f64::consts::FRAC_1_PI).abs();
    let e4 = (a4 - 0.5).abs();
    report(2, e3 <= 1e-12 && e4 <= 1e-12, format!("|a_3 - 1/pi| = {e3:.1e}, |a_4 - 1/2| = {e4:.1e}"));
}

#[test]
fn criterion_03_design_curve_anchor() {
    let n10 = min_sample_size(10_000_000_000, 0.6, 1e-4).unwrap();
    let n4 = min_sample_size(10_000, 0.6, 1e-4).unwrap();
    let ratio = n10 as f64 / n4 as f64;
    report(3, (150..=300).contains(&n10) && ratio <= 2.5, format!("n(p=1e10) = {n10}, n(p=1e4) = {n4}, ratio {ratio:.3}"));
}

#[test]
fn criterion_04_monte_carlo_phase_transition() {
    let (n, p) = (20, 1000);
    let rho_star = min_detectable_correlation(n as u64, p as u64, 0.5).unwrap();
    let mut rho_grid: Vec<f64> = (0..=28).map(|k| 0.78 + 0.005 * k as f64).collect();
    rho_grid.push(rho_star);
    let cfg = PhaseConfig { n, p, rho_grid, trials: 200, null_model: NullModel::Identity, seed: 2024 };
    let table = phase_transition_curve(&cfg).unwrap();
    let at_star = table.rows.iter().find(|r| r.rho == rho_star).unwrap().prob_any;
    let cross = crossing(&table.rows, 0.5);
    let gap = cross.map_or(f64::INFINITY, |c| (c - rho_star).abs());
    report(
        4,
        (0.35..=0.65).contains(&at_star) && gap <= 0.05,
        format!("rho* = {rho_star:.4}, empirical P(N_e>0) at rho* = {at_star:.3}, empirical crossing {cross:?}, gap {gap:.4}"),
    );
}

#[test]
fn criterion_05_poisson_field_recovery() {
    let (n, seeds) = (400, 5);
    let field = PoissonField::new(PoissonFieldConfig::new(10, 10)).unwrap();
    let p = field.p();
    let truth = field.stencil_support();
    let non_edges = p * (p - 1) / 2 - truth.len();
    let rho_c = critical_threshold(n as u64, p as u64).unwrap();
    let grid: Vec<f64> = (1..200).map(|k| 0.005 * k as f64).collect();
    let (mut best, mut onset, mut shaped) = (Vec::new(), Vec::new(), true);
    for seed in 0..seeds {
        let data = field.sample_data(n, seed).unwrap();
        let r = correlation_matrix(&sample_covariance(&data).unwrap()).unwrap();
        let pc = partial_correlation(&precision(&r, InverseMode::Strict).unwrap()).unwrap();
        let rows = support_sweep(&pc, &truth, &grid).unwrap();
        best.push(best_threshold(&rows).unwrap().symmetric_difference() as f64);
        onset.push(explosion_onset(&rows, non_edges, 0.01).unwrap_or(f64::NAN));
        // false edges rise monotonically as the threshold drops, from none
        // at high thresholds to most pairs at the lowest
        let monotone = rows.windows(2).all(|w| w[0].false_edges >= w[1].false_edges);
        let low = rows[0].false_edges as f64 / non_edges as f64;
        let high = rows.last().unwrap().false_edges;
        shaped &= monotone && low >= 0.5 && high == 0;
    }
    let best_med = median(best);
    let onset_med = median(onset);
    let rel = (onset_med - rho_c).abs() / rho_c;
    report(
        5,
        best_med <= 0.01 * truth.len() as f64 && rel <= 0.5 && shaped,
        format!(
            "median best symmetric difference {best_med} of {} true edges; median 1% false-edge onset {onset_med:.3} vs rho_c {rho_c:.4} (relative {rel:.2}); S-shape {shaped}",
            truth.len()
        ),
    );
}

#[test]
fn criterion_06_ball_graph_equivalence() {
    let rhos = [0.2, 0.5, 0.8];
    let mut mismatches = Vec::new();
    for k in 0..20u64 {
        let mut rng = substream(606, k);
        let p = rng.random_range(50..=500);
        let n = rng.random_range(5..=50);
        let rho = rhos[k as usize % 3];
        let x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
        let data = DataMatrix::new(x).unwrap();
        let dense = screen_edges(&correlation_matrix(&sample_covariance(&data).unwrap()).unwrap(), rho, Some(n)).unwrap();
        let fast = ball_graph(&zscore_project(&data).unwrap(), rho, BallMode::Exact).unwrap();
        if dense.graph.pairs() != fast.pairs() {
            mismatches.push((k, n, p, rho));
        }
    }
    report(6, mismatches.is_empty(), format!("20 instances, mismatches {mismatches:?}"));
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > tol {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Pseudo-likelihood for two variables written out term by term.
fn two_variable_objective(y: &DMatrix<f64>, d1: f64, d2: f64, o: f64, lambda: f64) -> f64 {
    let n = y.nrows() as f64;
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for k in 0..y.nrows() {
        r1 += (d1 * y[(k, 0)] + o * y[(k, 1)]).powi(2);
        r2 += (o * y[(k, 0)] + d2 * y[(k, 1)]).powi(2);
    }
    -n * (d1.ln() + d2.ln()) + 0.5 * (r1 + r2) + lambda * o.abs()
}

fn trace_ok(s: &ConcordState) -> bool {
    s.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

fn kkt_ok(s: &ConcordState, tol: f64) -> bool {
    !s.converged || s.kkt_residual <= 10.0 * tol
}

#[test]
fn criterion_07_concord_correctness() {
    let opts = ConcordOptions::default();
    let (mut fits, mut trace_bad, mut kkt_bad) = (0, 0, 0);
    let mut check = |s: &ConcordState| {
        fits += 1;
        trace_bad += usize::from(!trace_ok(s));
        kkt_bad += usize::from(!kkt_ok(s, opts.tol));
    };

    // (b) two-variable fit against a direct search of the objective
    let cov = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 2.0]), Role::Covariance).unwrap();
    let data = sample_gaussian(&cov, 100, 77).unwrap();
    let y = data.centered();
    let lambda = 4.0;
    let q = |d1: f64, d2: f64, o: f64| two_variable_objective(&y, d1, d2, o, lambda);
    let inner = |o: f64| {
        let d1 = golden(|d1| q(d1, golden(|d2| q(d1, d2, o), 0.01, 20.0, 1e-11), o), 0.01, 20.0, 1e-11);
        (d1, golden(|d2| q(d1, d2, o), 0.01, 20.0, 1e-11))
    };
    let o = golden(
        |o| {
            let (d1, d2) = inner(o);
            q(d1, d2, o)
        },
        -10.0,
        10.0,
        1e-10,
    );
    let (d1, d2) = inner(o);
    let tight = ConcordOptions { tol: 1e-10, ..opts };
    let fit = concord_fit(&data, lambda, &tight).unwrap();
    let oracle_gap = (fit.omega.get(0, 0) - d1).abs().max((fit.omega.get(1, 1) - d2).abs()).max((fit.omega.get(0, 1) - o).abs());
    let omega = fit.omega.clone();
    let objective_gap = (concord_objective(&omega, &data, lambda).unwrap() - q(omega.get(0, 0), omega.get(1, 1), omega.get(0, 1))).abs();
    check(&fit);

    // (d) support recovery on sparse models, plus the sign-agreement trend
    let sizes = [200usize, 500, 1000];
    let mut f1_at_1000 = Vec::new();
    let mut sign_by_n = [0.0f64; 3];
    for seed in 0..10u64 {
        let truth = sparse_random_precision(&SparsePrecisionConfig::new(50, 2, 500 + seed)).unwrap();
        for (k, &n) in sizes.iter().enumerate() {
            let data = sample_gaussian(&truth, n, 900 + seed).unwrap();
            let lmax = lambda_max(&data).unwrap();
            let grid: Vec<f64> = (0..30).map(|t| lmax * 0.01f64.powf(t as f64 / 29.0)).collect();
            let path = concord_path(&data, &grid, &opts).unwrap();
            let mut best = (f64::NEG_INFINITY, 0.0);
            for s in &path {
                check(s);
                let m = support_metrics(s, &truth).unwrap();
                if m.f1 > best.0 {
                    best = (m.f1, m.sign_agreement_rate);
                }
            }
            sign_by_n[k] += best.1 / 10.0;
            if n == 1000 {
                f1_at_1000.push(best.0);
            }
        }
    }
    let f1_med = median(f1_at_1000);
    let trend = sign_by_n[0] <= sign_by_n[1] && sign_by_n[1] <= sign_by_n[2];
    report(
        7,
        trace_bad == 0 && kkt_bad == 0 && oracle_gap <= 1e-4 && objective_gap <= 1e-8 && f1_med >= 0.9 && trend,
        format!(
            "{fits} fits: {trace_bad} non-monotone traces, {kkt_bad} KKT violations; p=2 oracle gap {oracle_gap:.2e}; median best F1 {f1_med:.3}; mean sign agreement over n = {sizes:?}: {sign_by_n:.3?}"
        ),
    );
}

#[test]
fn criterion_08_regime_tables() {
    let mut rng = substream(808, 0);
    let mut worst = 0.0f64;
    let mut rel = |a: f64, b: f64| worst = worst.max((a - b).abs() / b.abs().max(1e-300));
    for _ in 0..100 {
        let q = rng.random_range(2..200usize);
        let r = rng.random_range(2..200usize);
        let n = rng.random_range(1.0..1e5);
        let m = rng.random_range(q.max(r) as f64..1e6);
        let (qf, rf) = (q as f64, r as f64);
        let model = |kind| ContextualModel { kind, q, r, m: ScaleConstant::Fixed(m) };
        rel(contextual_bound(&model(ContextualKind::Saturated), n).unwrap(), qf.ln() + rf.ln() - 0.5 * n.ln());
        rel(contextual_bound(&model(ContextualKind::Sparse), n).unwrap(), 0.5 * (qf.ln() + rf.ln() + (qf * rf).ln().ln() - n.ln()));
        rel(contextual_bound(&model(ContextualKind::Kronecker), n).unwrap(), 0.5 * ((qf * qf + rf * rf).ln() + m.ln().ln() - n.ln()));
        rel(contextual_bound(&model(ContextualKind::KroneckerSparse), n).unwrap(), 0.5 * ((qf + rf).ln() + m.ln().ln() - n.ln()));
        let auto = ContextualModel { kind: ContextualKind::Kronecker, q, r, m: ScaleConstant::Auto };
        rel(contextual_bound(&auto, n).unwrap(), 0.5 * ((qf * qf + rf * rf) * n.max(qf.max(rf)).ln() / n).ln());

        let p = rng.random_range(2.0..1000.0f64);
        let nt = rng.random_range(1.0..200.0f64);
        let beta = rng.random_range(0.1..2.0);
        let nu = rng.random_range(0.05..1.0);
        let kappa = rng.random_range(0.0..10.0);
        let regime = |task| TaskRegime { task, alpha: 1.0, beta, nu, screening_n: 10 };
        rel(task_bound(&regime(Task::Screening), nt, p, Some(kappa)).unwrap(), 1.0 - (-kappa).exp());
        rel(task_bound(&regime(Task::Detection), nt, p, None).unwrap(), p * (-nt * beta).exp());
        rel(task_log_bound(&regime(Task::SupportRecovery), nt, p, None).unwrap(), (2f64.powf(p.powf(nu)) * (-nt * beta).exp()).ln());
        rel(task_bound(&regime(Task::ParamEstimation), nt, p, None).unwrap(), p * p.ln() / nt * beta);
        rel(task_bound(&regime(Task::PerformanceEstimation), nt, p, None).unwrap(), nt.powf(-2.0 / (1.0 + p)) * beta);
    }

    let ladder: Vec<f64> = Task::ALL
        .iter()
        .map(|&task| task_isocline(&TaskRegime::new(task), 0.05, &[1e6]).unwrap()[0].log_n)
        .collect();
    let ordered = ladder.windows(2).all(|w| w[0] <= w[1]);

    let need = |kind| contextual_required_n(&ContextualModel::new(kind, 100, 10), 0.0).unwrap();
    let (sat, sp, kr, ks) = (
        need(ContextualKind::Saturated),
        need(ContextualKind::Sparse),
        need(ContextualKind::Kronecker),
        need(ContextualKind::KroneckerSparse),
    );
    let fig4 = ks < kr && ks < sp && kr < sat && sp < sat && sat / ks >= 1e3;
    report(
        8,
        worst <= 1e-12 && ordered && fig4,
        format!(
            "worst relative deviation {worst:.1e}; task ladder log n at p=1e6 {ladder:.3?}; p=1000 (100 x 10) required n: saturated {sat:.0}, sparse {sp:.0}, kronecker {kr:.0}, kronecker+sparse {ks:.0}, ratio {:.0}",
            sat / ks
        ),
    );
}

#[test]
fn criterion_09_scale_invariance() {
    let mut worst = 0.0f64;
    let mut edges_equal = true;
    for k in 0..10u64 {
        let mut rng = substream(909, k);
        let (n, p) = if k < 7 { (40, 12) } else { (10, 30) };
        let mixing = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        let x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0)) * mixing;
        let data = DataMatrix::new(x).unwrap();
        let scale: Vec<f64> = (0..p).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
        let scaled = data.scale_columns(&scale).unwrap();
        let r0 = correlation_matrix(&sample_covariance(&data).unwrap()).unwrap();
        let r1 = correlation_matrix(&sample_covariance(&scaled).unwrap()).unwrap();
        worst = worst.max((r0.values() - r1.values()).amax());
        let (pc0, pc1) = if n > p {
            let f = |r: &SymMatrix| partial_correlation(&precision(r, InverseMode::Strict).unwrap()).unwrap();
            (f(&r0), f(&r1))
        } else {
            let f = |d: &DataMatrix| SymMatrix::new(pseudo_partial_projection(d).unwrap().gram(), Role::PartialCorrelation).unwrap();
            (f(&data), f(&scaled))
        };
        worst = worst.max((pc0.values() - pc1.values()).amax());
        for (a, b) in [(&r0, &r1), (&pc0, &pc1)] {
            for rho in [0.2, 0.5] {
                edges_equal &= screen_edges(a, rho, None).unwrap().graph.pairs() == screen_edges(b, rho, None).unwrap().graph.pairs();
            }
        }
    }
    report(9, worst <= 1e-10 && edges_equal, format!("max entry change {worst:.2e}; edge sets equal {edges_equal}"));
}

fn run(out: &Path, threads: usize, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_corrmine"))
        .args(args)
        .args(["--seed", "31", "--threads", &threads.to_string(), "--out"])
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success(), "corrmine {args:?} failed with {status}");
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (PathBuf::from(path.file_name().unwrap()), fs::read(&path).unwrap())
        })
        .collect()
}

#[test]
fn criterion_10_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = tmp.path().join("inputs");
    run(&inputs, 0, &["generate", "sparse", "--p", "40", "--s", "2", "--samples", "30"]);
    let data = inputs.join("data.csv");
    let model = inputs.join("model.triplets");
    let (data, model) = (data.to_str().unwrap(), model.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["generate", "poisson", "--n1", "6", "--n2", "7", "--samples", "120"],
        vec!["generate", "sparse", "--p", "40", "--s", "3", "--samples", "60"],
        vec!["generate", "kronecker", "--q", "5", "--r", "6", "--samples", "50"],
        vec!["generate", "sample", "--model", model, "--samples", "80"],
        vec!["screen", "--data", data, "--rho", "0.5", "--truth", model],
        vec!["screen", "--data", data, "--rho", "0.5", "--fast", "--format", "json"],
        vec!["concord", "--data", data, "--path-len", "8", "--truth", model],
        vec!["design-curve", "--p", "1e2:1e8:4:log", "--rho", "0.4,0.7"],
        vec!["design-curve", "--mode", "detectable", "--n", "20,200", "--p", "1e3,1e6", "--format", "json"],
        vec!["phase", "--n", "20", "--p", "150", "--trials", "40", "--rho", "0.5:0.95:10"],
        vec!["phase", "--n", "30", "--p", "60", "--trials", "20", "--null", "block", "--block-size", "5"],
        vec!["regimes", "--table", "tasks", "--p", "1e2,1e4,1e6"],
        vec!["regimes", "--table", "contextual", "--p", "100,400,900", "--level", "-1", "--format", "json"],
    ];
    let mut differing = Vec::new();
    for (k, args) in commands.iter().enumerate() {
        let runs: Vec<_> = [1, 2, 8]
            .iter()
            .map(|&t| {
                let dir = tmp.path().join(format!("c{k}-t{t}"));
                run(&dir, t, args);
                snapshot(&dir)
            })
            .collect();
        if runs[0].is_empty() || runs.iter().any(|r| r != &runs[0]) {
            differing.push(args.join(" "));
        }
    }
    report(10, differing.is_empty(), format!("{} commands x threads {{1, 2, 8}}; differing: {differing:?}", commands.len()));
}
