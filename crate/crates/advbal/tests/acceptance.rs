//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its elapsed time (visible with `--nocapture`).
//!
//! The Monte Carlo criteria run full experiments through the public API at
//! desk scale; frozen expected values and directions come from analytic
//! arguments or one-time large-sample oracle runs, noted inline.

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use advbal::adversarial::{
    adversarial_balance, exp_gradient_step, AdversarialParams, PredictionMode,
};
use advbal::baselines::{simplex_qp_solve, QpProblem, QpSolution};
use advbal::classifiers::{cross_val_select, gradient_check, FamilySpec};
use advbal::data::{BalancingProblem, WeightVector};
use advbal::diagnostics::{
    h_divergence, theorem_bound, threshold_cuts, weight_sq_norm, DiscriminatorFamily,
};
use advbal::experiment::{
    render_results_csv, render_results_json, run_experiment, BenchmarkConfig,
    ExperimentConfig, FamilyConfig, MethodConfig, MethodRow, OutputConfig, OutputFormat,
};
use advbal::rng::RngStream;

fn pass(name: &str, started: Instant, detail: &str) {
    println!(
        "ACCEPTANCE {name}: PASS ({:.1}s) {detail}",
        started.elapsed().as_secs_f64()
    );
}

fn gaussian(rng: &mut RngStream, n: usize, d: usize, shift: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.normal() + shift)
}

// ---------------------------------------------------------------------------
// C1: weight invariants across adversarial iterations, EG exactness
// ---------------------------------------------------------------------------

#[test]
fn c01_weight_invariant_suite() {
    let t0 = Instant::now();
    let sizes = [50usize, 500];
    let problems: Vec<(u64, usize)> = (0..50).map(|i| (i as u64, sizes[i % 2])).collect();
    problems.par_iter().for_each(|&(seed, n)| {
        let mut rng = RngStream::new(7000 + seed);
        let source = gaussian(&mut rng, n, 3, 0.0);
        let shift = 0.4 * rng.uniform();
        let target = gaussian(&mut rng, n, 3, shift);
        let prob = BalancingProblem::new(source, target).unwrap();
        let mut params = AdversarialParams::new(FamilySpec::logistic_regression());
        params.seed = seed;
        let (_, trace) = adversarial_balance(&prob, &params).unwrap();
        assert_eq!(trace.iterations.len(), 20);
        for (t, rec) in trace.iterations.iter().enumerate() {
            let mean: f64 = rec.weights.iter().sum::<f64>() / n as f64;
            assert!(
                (mean - 1.0).abs() <= 1e-9,
                "seed {seed} iter {t}: mean {mean}"
            );
            let min = rec.weights.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "seed {seed} iter {t}: min weight {min}");
        }
    });

    // exponentiated-gradient exactness
    let mut rng = RngStream::new(99);
    for _ in 0..200 {
        let n = 2 + rng.index(10);
        let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.uniform()).collect();
        let w = WeightVector::normalized(raw).unwrap();
        // constant losses: bit-exact identity
        let c = rng.uniform();
        let updated = exp_gradient_step(&w, &vec![c; n], 0.8).unwrap();
        for (a, b) in updated.iter().zip(w.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // well-separated losses: exact order preservation of weight ratios
        let losses: Vec<f64> = (0..n).map(|_| rng.index(8) as f64 * 0.125).collect();
        let updated = exp_gradient_step(&w, &losses, 0.9).unwrap();
        for i in 0..n {
            for j in 0..n {
                if losses[i] > losses[j] {
                    assert!(
                        updated.as_slice()[i] * w.as_slice()[j]
                            > updated.as_slice()[j] * w.as_slice()[i]
                    );
                }
            }
        }
    }
    pass("C1", t0, "50 adversarial runs keep weights positive and mean-1; EG exactness holds");
}

// ---------------------------------------------------------------------------
// C2: divergence-vs-minimal-loss equality for the symmetric threshold family
// ---------------------------------------------------------------------------

/// Independent route: directly maximize the weighted mean-difference form
/// over the same enumerated threshold family.
fn direct_threshold_divergence(prob: &BalancingProblem, w: &WeightVector) -> f64 {
    let source: Vec<f64> = prob.source().column(0).to_vec();
    let target: Vec<f64> = prob.target().column(0).to_vec();
    let mut pooled = source.clone();
    pooled.extend_from_slice(&target);
    let n = source.len() as f64;
    let n_target = target.len() as f64;
    let mut best = 0.0f64;
    for cut in threshold_cuts(&pooled) {
        let weighted_source: f64 = source
            .iter()
            .zip(w.iter())
            .filter(|(&x, _)| x > cut)
            .map(|(_, &wi)| wi)
            .sum::<f64>()
            / n;
        let target_mean = target.iter().filter(|&&x| x > cut).count() as f64 / n_target;
        best = best.max((weighted_source - target_mean).abs());
    }
    2.0 * best
}

#[test]
fn c02_symmetric_family_divergence_equality() {
    let t0 = Instant::now();
    let mut rng = RngStream::new(202);
    for case in 0..100 {
        let n = 3 + rng.index(28);
        let m = 3 + rng.index(28);
        let source = Array2::from_shape_fn((n, 1), |_| rng.normal());
        let target = Array2::from_shape_fn((m, 1), |_| rng.normal() * 1.4 + 0.3);
        let prob = BalancingProblem::new(source, target).unwrap();
        let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.02).collect();
        let w = WeightVector::normalized(raw).unwrap();
        let via_min_loss = h_divergence(
            &prob,
            &w,
            &DiscriminatorFamily::ExhaustiveThresholds,
            PredictionMode::TrainPredictions,
            0,
        )
        .unwrap();
        let direct = direct_threshold_divergence(&prob, &w);
        assert!(
            (via_min_loss - direct).abs() <= 1e-9,
            "case {case}: 2(1-minL) = {via_min_loss} vs direct {direct}"
        );
    }
    pass("C2", t0, "100 random instances agree within 1e-9");
}

// ---------------------------------------------------------------------------
// C3: analytic gradients vs central finite differences
// ---------------------------------------------------------------------------

#[test]
fn c03_gradient_checks() {
    let t0 = Instant::now();
    let cases: Vec<u64> = (0..20).collect();
    cases.par_iter().for_each(|&seed| {
        let mut rng = RngStream::new(300 + seed);
        let x = gaussian(&mut rng, 20, 3, 0.0);
        let x2 = gaussian(&mut rng, 20, 2, 0.0);
        let y: Vec<u8> = (0..20).map(|_| rng.bernoulli(0.5) as u8).collect();
        // guard against a degenerate all-one/all-zero draw
        let y = if y.iter().all(|&v| v == y[0]) {
            (0..20).map(|i| (i % 2) as u8).collect()
        } else {
            y
        };
        let w: Vec<f64> = (0..20).map(|_| 0.5 + rng.uniform()).collect();
        let lr = gradient_check(&FamilySpec::logistic_regression(), &x, &y, &w, 1e-6).unwrap();
        assert!(lr < 1e-4, "seed {seed}: lr {lr}");
        let depth = 1 + (seed % 3) as usize;
        let mlp = gradient_check(&FamilySpec::mlp(depth), &x, &y, &w, 1e-6).unwrap();
        assert!(mlp < 1e-4, "seed {seed}: mlp{depth} {mlp}");
        let kr = gradient_check(&FamilySpec::kernel_rbf(), &x2, &y, &w, 1e-6).unwrap();
        assert!(kr < 1e-4, "seed {seed}: kernel {kr}");
    });
    pass("C3", t0, "20 instances per family within relative 1e-4");
}

// ---------------------------------------------------------------------------
// C4: projected-gradient QP vs grid and KKT oracles
// ---------------------------------------------------------------------------

fn random_psd(rng: &mut RngStream, n: usize, jitter: f64) -> Array2<f64> {
    let a = Array2::from_shape_fn((n, n), |_| rng.normal());
    let mut q = a.t().dot(&a);
    for i in 0..n {
        q[[i, i]] += jitter;
    }
    q
}

#[test]
fn c04_qp_oracle_equivalence() {
    let t0 = Instant::now();
    let mut rng = RngStream::new(404);

    // dense grid over the mean-1 simplex, resolution 1e-3
    for case in 0..10 {
        let q = random_psd(&mut rng, 3, 0.05);
        let c = ndarray::Array1::from_shape_fn(3, |_| rng.normal());
        let qp = QpProblem::new(q, c).unwrap();
        let sol: QpSolution =
            simplex_qp_solve(&qp, &WeightVector::uniform(3).unwrap(), 1e-12, 200_000).unwrap();
        let steps = 1000usize;
        let mut best = [1.0f64; 3];
        let mut best_val = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let w = [
                    3.0 * i as f64 / steps as f64,
                    3.0 * j as f64 / steps as f64,
                    3.0 * (steps - i - j) as f64 / steps as f64,
                ];
                let val = qp.objective(&w);
                if val < best_val {
                    best_val = val;
                    best = w;
                }
            }
        }
        for (a, b) in sol.weights.iter().zip(&best) {
            assert!((a - b).abs() <= 1e-2, "case {case}: solver {a} vs grid {b}");
        }
    }

    // KKT residuals on random 4-dim instances
    for case in 0..10 {
        let q = random_psd(&mut rng, 4, 0.1);
        let c = ndarray::Array1::from_shape_fn(4, |_| rng.normal());
        let qp = QpProblem::new(q.clone(), c.clone()).unwrap();
        let sol =
            simplex_qp_solve(&qp, &WeightVector::uniform(4).unwrap(), 1e-12, 400_000).unwrap();
        let w = ndarray::Array1::from(sol.weights.as_slice().to_vec());
        let g = q.dot(&w) + &c;
        let support: Vec<usize> = (0..4).filter(|&i| w[i] > 1e-9).collect();
        let nu = support.iter().map(|&i| g[i]).sum::<f64>() / support.len() as f64;
        for i in 0..4 {
            if w[i] > 1e-9 {
                assert!(
                    (g[i] - nu).abs() <= 1e-6,
                    "case {case}: support residual {}",
                    (g[i] - nu).abs()
                );
            } else {
                assert!(g[i] >= nu - 1e-6, "case {case}: off-support gradient");
            }
        }
    }
    pass("C4", t0, "grid match within 1e-2 per coordinate; KKT residuals within 1e-6");
}

// ---------------------------------------------------------------------------
// C5/C6/C7: benchmark Monte Carlo comparisons
// ---------------------------------------------------------------------------

fn experiment(
    benchmark: BenchmarkConfig,
    sizes: Vec<usize>,
    replications: usize,
    methods: Vec<MethodConfig>,
    seed: u64,
) -> Vec<MethodRow> {
    let cfg = ExperimentConfig {
        benchmark,
        sizes,
        replications,
        methods,
        seed,
        bootstrap_samples: 200,
        workers: None,
        output: OutputConfig {
            path: "unused".into(),
            format: OutputFormat::Csv,
        },
    };
    let res = run_experiment(&cfg).unwrap();
    assert!(res.rows.iter().all(|r| !r.failed), "a method failed");
    res.rows
}

fn row<'a>(rows: &'a [MethodRow], method: &str, n: usize) -> &'a MethodRow {
    rows.iter()
        .find(|r| r.method == method && r.n == n)
        .unwrap_or_else(|| panic!("row {method}/{n} missing"))
}

fn lr() -> FamilyConfig {
    FamilyConfig::Named("lr".into())
}

#[test]
fn c05_kang_schafer_untransformed() {
    let t0 = Instant::now();
    let rows = experiment(
        BenchmarkConfig::KangSchafer { transformed: false },
        vec![2000],
        100,
        vec![
            MethodConfig::Unweighted,
            MethodConfig::Ipw { family: lr() },
            MethodConfig::Adversarial { family: lr() },
        ],
        1,
    );
    let unweighted = row(&rows, "unweighted", 2000);
    let ipw = row(&rows, "ipw(lr)", 2000);
    let adv = row(&rows, "adversarial(lr)", 2000);

    // one-time 2e6-sample oracle: E[Y | A=1] - 210 = -10.03, so the naive
    // treated mean is biased by far more than 5 in the negative direction
    let unw_bias = unweighted.bias.unwrap();
    assert!(unw_bias < -5.0, "unweighted bias {unw_bias}");
    let ipw_bias = ipw.bias.unwrap();
    assert!(ipw_bias.abs() < 1.0, "ipw bias {ipw_bias}");
    let adv_bias = adv.bias.unwrap();
    assert!(adv_bias.abs() < 1.0, "adversarial bias {adv_bias}");

    // per-replication: the adversarial estimate lands closer to 210 than
    // the unweighted treated mean in at least 90% of replications
    let mut adv_wins = 0;
    let mut ipw_close = 0;
    for r in 0..100 {
        let e_adv = adv.estimates[r].unwrap();
        let e_unw = unweighted.estimates[r].unwrap();
        if (e_adv - 210.0).abs() < (e_unw - 210.0).abs() {
            adv_wins += 1;
        }
        if (ipw.estimates[r].unwrap() - 210.0).abs() < 2.0 {
            ipw_close += 1;
        }
    }
    assert!(adv_wins >= 90, "adversarial beat unweighted in {adv_wins}/100");
    // the propensity model is correctly specified here: estimates land
    // within 2 of the truth in at least 80% of replications
    assert!(ipw_close >= 80, "ipw within 2 of truth in {ipw_close}/100");

    // misspecification hurts: on the paired transformed scenario the IPW
    // bias magnitude strictly exceeds the untransformed one
    let rows_tr = experiment(
        BenchmarkConfig::KangSchafer { transformed: true },
        vec![2000],
        100,
        vec![MethodConfig::Ipw { family: lr() }],
        1,
    );
    let ipw_tr_bias = row(&rows_tr, "ipw(lr)", 2000).bias.unwrap();
    assert!(
        ipw_tr_bias.abs() > ipw_bias.abs(),
        "transformed {ipw_tr_bias} vs untransformed {ipw_bias}"
    );
    pass(
        "C5",
        t0,
        &format!(
            "bias: unweighted {unw_bias:.2}, ipw {ipw_bias:.3}, adversarial {adv_bias:.3}"
        ),
    );
}

#[test]
fn c06_kang_schafer_transformed_rmse() {
    let t0 = Instant::now();
    let rows = experiment(
        BenchmarkConfig::KangSchafer { transformed: true },
        vec![1000],
        100,
        vec![
            MethodConfig::Ipw { family: lr() },
            MethodConfig::Adversarial { family: lr() },
        ],
        2,
    );
    let ipw_rmse = row(&rows, "ipw(lr)", 1000).rmse.unwrap();
    let adv_rmse = row(&rows, "adversarial(lr)", 1000).rmse.unwrap();
    assert!(
        adv_rmse < ipw_rmse,
        "adversarial rmse {adv_rmse} vs ipw rmse {ipw_rmse}"
    );
    pass(
        "C6",
        t0,
        &format!("rmse: adversarial {adv_rmse:.2} < ipw {ipw_rmse:.2}"),
    );
}

#[test]
fn c07_circular_kernel_methods() {
    let t0 = Instant::now();
    let rbf = FamilyConfig::Named("rbf".into());
    let main_rows = experiment(
        BenchmarkConfig::Circular,
        vec![500, 1000],
        100,
        vec![
            MethodConfig::Adversarial { family: lr() },
            MethodConfig::Adversarial { family: rbf.clone() },
            MethodConfig::MmdV1,
            MethodConfig::Ipw { family: lr() },
            MethodConfig::Unweighted,
        ],
        3,
    );
    // kernel-capacity methods beat the linear-family adversarial run
    let adv_lr_bias = row(&main_rows, "adversarial(lr)", 1000).bias.unwrap();
    let adv_rbf_bias = row(&main_rows, "adversarial(rbf)", 1000).bias.unwrap();
    let mmd_bias = row(&main_rows, "mmd_v1", 1000).bias.unwrap();
    assert!(
        mmd_bias.abs() < adv_lr_bias.abs(),
        "mmd {mmd_bias} vs adversarial-lr {adv_lr_bias}"
    );
    assert!(
        adv_rbf_bias.abs() < adv_lr_bias.abs(),
        "adversarial-rbf {adv_rbf_bias} vs adversarial-lr {adv_lr_bias}"
    );

    // kernel-MMD weights beat IPW-LR per replication most of the time (the
    // linear propensity model cannot see the radial confounding)
    let mmd_row = row(&main_rows, "mmd_v1", 1000);
    let ipw_row = row(&main_rows, "ipw(lr)", 1000);
    let mut mmd_wins = 0;
    for r in 0..100 {
        if mmd_row.estimates[r].unwrap().abs() < ipw_row.estimates[r].unwrap().abs() {
            mmd_wins += 1;
        }
    }
    assert!(mmd_wins >= 70, "mmd beat ipw in {mmd_wins}/100 replications");

    // at n=500, the kernel-capacity weighting clearly improves on the naive
    // mean while the linear-family methods sit at the unweighted level
    // (a 2e6-sample oracle puts the naive ATE bias at -0.170)
    let unw_bias_500 = row(&main_rows, "unweighted", 500).bias.unwrap();
    assert!(
        row(&main_rows, "mmd_v1", 500).bias.unwrap().abs() < unw_bias_500.abs(),
        "mmd at 500"
    );
    for method in ["ipw(lr)", "adversarial(lr)"] {
        let b = row(&main_rows, method, 500).bias.unwrap();
        assert!(
            b.abs() < unw_bias_500.abs() + 0.1,
            "{method} bias {b} vs unweighted {unw_bias_500}"
        );
    }

    // growth leg: every method's aggregate bias magnitude shrinks from
    // n=500 to n=5000
    let big_rows = experiment(
        BenchmarkConfig::Circular,
        vec![5000],
        12,
        vec![
            MethodConfig::Adversarial { family: lr() },
            MethodConfig::Adversarial { family: rbf },
            MethodConfig::MmdV1,
        ],
        3,
    );
    for method in ["adversarial(lr)", "adversarial(rbf)", "mmd_v1"] {
        let small = row(&main_rows, method, 500).bias.unwrap();
        let big = row(&big_rows, method, 5000).bias.unwrap();
        assert!(
            big.abs() < small.abs(),
            "{method}: |bias| n=5000 {big} vs n=500 {small}"
        );
    }
    pass(
        "C7",
        t0,
        &format!(
            "bias at n=1000: adversarial-lr {adv_lr_bias:.3}, adversarial-rbf {adv_rbf_bias:.3}, mmd {mmd_bias:.3}"
        ),
    );
}

// ---------------------------------------------------------------------------
// C8: estimation-error bound holds with the advertised confidence
// ---------------------------------------------------------------------------

#[test]
fn c08_error_bound_monte_carlo_validity() {
    let t0 = Instant::now();
    // f is a signed combination of three threshold functions with total
    // combination mass 1 = M_Y, so it lies in the bounded-combination
    // family over the threshold classifiers
    let cuts = [-0.5, 0.3, 1.0];
    let alphas = [0.5, -0.3, 0.2];
    let m_y = 1.0;
    let f = |x: f64| -> f64 {
        let mut v = 0.0;
        for (c, a) in cuts.iter().zip(&alphas) {
            if x > *c {
                v += a;
            }
        }
        v
    };

    let reps = 500;
    let covered: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(8000 + rep as u64);
            let n = 60;
            let n_target = 80;
            let source = Array2::from_shape_fn((n, 1), |_| rng.normal());
            let target = Array2::from_shape_fn((n_target, 1), |_| 0.4 + 1.1 * rng.normal());
            let prob = BalancingProblem::new(source.clone(), target.clone()).unwrap();
            let mut params = AdversarialParams::new(FamilySpec::logistic_regression());
            params.seed = rep as u64;
            let (w, _) = adversarial_balance(&prob, &params).unwrap();

            // outcomes: conditional mean f(x), symmetric noise keeping |y| <= M_Y
            let y: Vec<f64> = source
                .column(0)
                .iter()
                .map(|&x| {
                    let fx = f(x);
                    let room = m_y - fx.abs();
                    fx + room * rng.uniform_in(-1.0, 1.0)
                })
                .collect();

            let weighted: f64 = w
                .iter()
                .zip(&y)
                .map(|(wi, yi)| wi * yi)
                .sum::<f64>()
                / n as f64;
            let target_mean: f64 =
                target.column(0).iter().map(|&x| f(x)).sum::<f64>() / n_target as f64;
            let realized = (weighted - target_mean).abs();

            let d_h = h_divergence(
                &prob,
                &w,
                &DiscriminatorFamily::ExhaustiveThresholds,
                PredictionMode::TrainPredictions,
                0,
            )
            .unwrap();
            let bound = theorem_bound(d_h, weight_sq_norm(&w), m_y, 0.05).unwrap();
            (realized <= bound) as usize
        })
        .sum();

    let rate = covered as f64 / reps as f64;
    assert!(rate >= 0.95, "bound held in {covered}/{reps} replications");
    pass("C8", t0, &format!("bound coverage {rate:.3} at delta = 0.05"));
}

// ---------------------------------------------------------------------------
// C9: end-to-end determinism of the experiment runner
// ---------------------------------------------------------------------------

#[test]
fn c09_run_determinism() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig {
        benchmark: BenchmarkConfig::Circular,
        sizes: vec![200],
        replications: 6,
        methods: vec![
            MethodConfig::Unweighted,
            MethodConfig::Ipw { family: lr() },
            MethodConfig::MmdV1,
            MethodConfig::Adversarial { family: lr() },
        ],
        seed: 9,
        bootstrap_samples: 500,
        workers: None,
        output: OutputConfig {
            path: "unused".into(),
            format: OutputFormat::Csv,
        },
    };
    let first = run_experiment(&cfg).unwrap();
    let second = run_experiment(&cfg).unwrap();
    assert_eq!(render_results_csv(&first), render_results_csv(&second));
    assert_eq!(
        render_results_json(&first).unwrap(),
        render_results_json(&second).unwrap()
    );

    // serial and concurrent schedules agree byte for byte
    let serial = ExperimentConfig {
        workers: Some(1),
        ..cfg.clone()
    };
    let concurrent = ExperimentConfig {
        workers: Some(2),
        ..cfg
    };
    let a = run_experiment(&serial).unwrap();
    let b = run_experiment(&concurrent).unwrap();
    assert_eq!(render_results_csv(&a), render_results_csv(&b));
    assert_eq!(render_results_csv(&a), render_results_csv(&first));
    pass("C9", t0, "byte-identical output across reruns and schedules");
}

// ---------------------------------------------------------------------------
// C10: cross-validated family selection picks the right capacity
// ---------------------------------------------------------------------------

fn concentric_circles(rng: &mut RngStream, n: usize) -> (Array2<f64>, Vec<u8>) {
    let mut x = Array2::zeros((n, 2));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let inside = i % 2 == 0;
        let radius = if inside {
            0.7 * rng.uniform().sqrt()
        } else {
            1.1 + 0.4 * rng.uniform()
        };
        let angle = rng.uniform_in(0.0, std::f64::consts::TAU);
        x[[i, 0]] = radius * angle.cos();
        x[[i, 1]] = radius * angle.sin();
        y.push(inside as u8);
    }
    (x, y)
}

#[test]
fn c10_cross_validation_selection() {
    let t0 = Instant::now();
    let seeds: Vec<u64> = (0..50).collect();

    let kernel_wins: usize = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = RngStream::new(5000 + seed);
            let (x, y) = concentric_circles(&mut rng, 500);
            let w = vec![1.0; 500];
            let candidates = [
                FamilySpec::logistic_regression(),
                FamilySpec::kernel_rbf_with_scale(1.0),
            ];
            let sel = cross_val_select(&candidates, &x, &y, &w, 5, seed).unwrap();
            (sel.index == 1) as usize
        })
        .sum();
    assert!(kernel_wins >= 45, "kernel family selected in {kernel_wins}/50");

    let lr_wins: usize = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = RngStream::new(6000 + seed);
            let n = 500;
            let mut x = Array2::zeros((n, 1));
            let mut y = Vec::with_capacity(n);
            for i in 0..n {
                // classes separated by a clear margin around zero
                let v = rng.normal() + 0.25 * if i % 2 == 0 { 1.0 } else { -1.0 };
                let v = v.abs().max(0.25) * if i % 2 == 0 { 1.0 } else { -1.0 };
                x[[i, 0]] = v;
                y.push((v > 0.0) as u8);
            }
            let w = vec![1.0; n];
            let candidates = [
                FamilySpec::logistic_regression(),
                FamilySpec::kernel_rbf_with_scale(1.0),
            ];
            let sel = cross_val_select(&candidates, &x, &y, &w, 5, seed).unwrap();
            (sel.index == 0) as usize
        })
        .sum();
    assert!(lr_wins >= 45, "lr selected in {lr_wins}/50");
    pass(
        "C10",
        t0,
        &format!("kernel picked {kernel_wins}/50 on circles, lr picked {lr_wins}/50 on separable data"),
    );
}
