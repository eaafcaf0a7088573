//! Acceptance suite. Each test covers one numbered criterion, pins its
//! tolerances in place, and prints a `PASS` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

mod support;

use equicorr_core::harness::{builtin_grid, run_cell, ExperimentCell};
use equicorr_core::model::{
    determined_threshold, draw_observations, draw_signals, exact_risk, ModelParams, SignalVector,
};
use equicorr_core::normal::{abs_normal_tail, mills_bounds};
use equicorr_core::oracle::{between_group_gap, ideal_threshold_exact, ideal_threshold_grid};
use equicorr_core::scoring::discrepancy_pct;
use equicorr_core::thresholds::{iterative_threshold, ThresholdMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Master seed for every stochastic acceptance check; results are
/// fully deterministic given this value.
const MASTER_SEED: u64 = 1_000_003;

fn pass(tag: &str, detail: String) {
    println!("ACCEPTANCE {tag}: PASS ({detail})");
}

#[test]
fn c01_discrepancy_formula_fixtures() {
    // Reference (method error, ideal error, discrepancy %) rows from
    // the published comparison tables; pure arithmetic.
    let rows: [(f64, f64, f64); 16] = [
        (11.053, 9.473, 14.295),
        (11.143, 9.473, 14.987),
        (15.46, 9.473, 38.726),
        (12.052, 9.473, 21.399),
        (11.966, 9.473, 20.834),
        (8.534, 4.356, 48.957),
        (5.531, 4.356, 21.244),
        (17.432, 2.019, 88.418),
        (2.319, 2.019, 12.937),
        (11.062, 9.631, 12.936),
        (11.045, 9.631, 12.802),
        (15.178, 9.631, 36.546),
        (11.929, 9.631, 19.264),
        (11.97, 9.631, 19.541),
        (21.128, 18.201, 13.854),
        (6.415, 4.445, 30.709),
    ];
    for (e_method, e_ideal, want) in rows {
        let got = discrepancy_pct(e_method, e_ideal).unwrap();
        assert!(
            (got - want).abs() <= 0.01,
            "({e_method}, {e_ideal}): got {got}, want {want} +-0.01"
        );
    }
    pass("01 discrepancy-fixtures", format!("{} rows within +-0.01", rows.len()));
}

#[test]
fn c02_determined_rule_reproduction() {
    // Simulated mean of the determined rule must sit within +-20% of
    // the published values and within 3 SE of this artifact's own
    // analytic risk (the hard requirement).
    let cases = [(15.0, 2.319), (90.0, 1.252)];
    let mut details = Vec::new();
    for (i, (tau_sq, published)) in cases.into_iter().enumerate() {
        let params = ModelParams::with_beta(80, 0.7, 1.0, tau_sq, 0.0).unwrap();
        let analytic = exact_risk(&params, determined_threshold(&params).unwrap())
            .unwrap()
            .risk;
        let mut cell = ExperimentCell::new(params, vec![ThresholdMethod::Determined]);
        cell.reps = 1000;
        let result = run_cell(&cell, MASTER_SEED.wrapping_add(i as u64), 2).unwrap();
        let stats = result.methods[0].stats.unwrap();
        assert!(
            (stats.mean_total_error - published).abs() <= 0.2 * published,
            "tau_sq={tau_sq}: mean {} vs published {published} +-20%",
            stats.mean_total_error
        );
        assert!(
            (stats.mean_total_error - analytic).abs() <= 3.0 * stats.se_total_error,
            "tau_sq={tau_sq}: mean {} vs analytic {analytic}, se {}",
            stats.mean_total_error,
            stats.se_total_error
        );
        details.push(format!(
            "tau_sq={tau_sq}: mean={:.3} analytic={analytic:.3} published={published}",
            stats.mean_total_error
        ));
    }
    pass("02 determined-reproduction", details.join("; "));
}

#[test]
fn c03_rho_invariance_of_determined_risk() {
    let mut means = Vec::new();
    for (i, rho) in [0.0, 0.1, 0.7].into_iter().enumerate() {
        let params = ModelParams::with_beta(80, 0.3, 1.0, 15.0, rho).unwrap();
        let mut cell = ExperimentCell::new(params, vec![ThresholdMethod::Determined]);
        cell.reps = 1000;
        let result = run_cell(&cell, MASTER_SEED.wrapping_add(100 + i as u64), 2).unwrap();
        means.push(result.methods[0].stats.unwrap().mean_total_error);
    }
    for i in 0..means.len() {
        for j in (i + 1)..means.len() {
            let rel = (means[i] - means[j]).abs() / (0.5 * (means[i] + means[j]));
            assert!(
                rel < 0.05,
                "means {means:?}: pair ({i}, {j}) differs by {:.2}%",
                100.0 * rel
            );
        }
    }
    pass(
        "03 rho-invariance",
        format!("means at rho 0/0.1/0.7 = {means:?}"),
    );
}

#[test]
fn c04_ideal_dominance_across_grid() {
    let cells = builtin_grid(200);
    let table = equicorr_core::harness::run_grid(&cells, MASTER_SEED, 2).unwrap();
    let mut checked = 0;
    for (cell, result) in &table.rows {
        for outcome in &result.methods {
            let stats = outcome.stats.expect("built-in methods never error");
            let slack = 2.0 * (stats.se_total_error + result.ideal.se_total_error);
            assert!(
                result.ideal.mean_total_error <= stats.mean_total_error + slack,
                "cell m={} beta={:?} rho={} method {}: ideal {} > {} + {slack}",
                cell.params.m,
                cell.params.beta,
                cell.params.rho,
                outcome.name,
                result.ideal.mean_total_error,
                stats.mean_total_error
            );
            checked += 1;
        }
    }
    pass(
        "04 ideal-dominance",
        format!("{checked} (cell, method) pairs across {} cells", table.rows.len()),
    );
}

#[test]
fn c05_oracle_equivalence() {
    // Instances from the sparse separated regime the procedures
    // target. (The exact oracle also covers the select-everything
    // partition, which the grid's scan range cannot reach; with dense
    // signals at tiny m that partition can be uniquely optimal, so the
    // instance distribution stays away from that corner.)
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED.wrapping_add(500));
    for trial in 0..200 {
        let m = rng.gen_range(10..=20);
        let params = ModelParams::with_p(m, 0.2, 1.0, 15.0, 0.2).unwrap();
        let nu = draw_signals(&params, &mut rng).unwrap();
        let sample = draw_observations(&params, nu, &mut rng).unwrap();
        let grid = ideal_threshold_grid(&sample.y, &sample.nu, 100_000).unwrap();
        let exact = ideal_threshold_exact(&sample.y, &sample.nu).unwrap();
        assert_eq!(
            grid.min_total_error, exact.min_total_error,
            "trial {trial}: grid {} vs exact {}",
            grid.min_total_error, exact.min_total_error
        );
    }
    pass("05 oracle-equivalence", "200/200 instances identical".into());
}

#[test]
fn c06_grand_mean_cut_maximizes_between_group_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED.wrapping_add(600));
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(2..=12);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..10.0_f64)).collect();
        let mean = z.iter().sum::<f64>() / n as f64;
        let at_mean = match between_group_gap(&z, mean) {
            Ok(v) => v,
            Err(_) => continue, // constant sample; regenerate
        };
        let mut sorted = z.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let best_boundary = sorted
            .windows(2)
            .filter(|w| w[0] < w[1])
            .map(|w| between_group_gap(&z, w[0]).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            at_mean >= best_boundary - 1e-10,
            "dataset {z:?}: mean cut {at_mean} < best {best_boundary}"
        );
        done += 1;
    }
    pass("06 mean-split-gap", "100/100 datasets".into());
}

#[test]
fn c07_iterative_fixed_point() {
    let eps = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED.wrapping_add(700));
    let mut done = 0;
    while done < 100 {
        let m = rng.gen_range(6..=60);
        let params = ModelParams::with_p(m, 0.3, 1.0, 15.0, 0.0).unwrap();
        let nu = draw_signals(&params, &mut rng).unwrap();
        let sample = draw_observations(&params, nu, &mut rng).unwrap();
        let trace = iterative_threshold(&sample.y, eps, 1000).unwrap();
        if !trace.converged {
            continue;
        }
        let c = trace.c_final;
        let magnitudes: Vec<f64> = sample.y.iter().map(|v| v.abs()).collect();
        let lo: Vec<f64> = magnitudes.iter().copied().filter(|&w| w <= c).collect();
        let hi: Vec<f64> = magnitudes.iter().copied().filter(|&w| w > c).collect();
        if lo.is_empty() || hi.is_empty() {
            continue;
        }
        let mid = 0.5
            * (lo.iter().sum::<f64>() / lo.len() as f64
                + hi.iter().sum::<f64>() / hi.len() as f64);
        assert!(
            (c - mid).abs() < eps,
            "m={m}: c_final {c} vs recomputed midpoint {mid}"
        );
        done += 1;
    }
    pass("07 iterative-fixed-point", "100/100 datasets".into());
}

#[test]
fn c08_determined_rule_near_optimality() {
    // Cells with tau_sq/sigma0_sq >= 15 and p <= 0.3 from the built-in
    // grid values; the determined cut must be within 10% of the best
    // fixed cut on a 10^4-point scan.
    let mut checked = 0;
    for m in [80usize, 180] {
        for beta in [0.3, 0.7] {
            for (sigma0_sq, tau_sq) in [(1.0, 15.0), (1.0, 90.0), (3.0, 90.0)] {
                let params = ModelParams::with_beta(m, beta, sigma0_sq, tau_sq, 0.0).unwrap();
                assert!(params.resolve_p().unwrap() <= 0.3);
                let det_risk =
                    exact_risk(&params, determined_threshold(&params).unwrap()).unwrap().risk;
                let hi = 4.0 * (sigma0_sq + tau_sq).sqrt();
                let grid_min = (0..10_000)
                    .map(|g| {
                        let c = hi * g as f64 / 9_999.0;
                        exact_risk(&params, c).unwrap().risk
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    det_risk <= 1.10 * grid_min,
                    "m={m} beta={beta} sigma0_sq={sigma0_sq} tau_sq={tau_sq}: \
                     {det_risk} vs grid min {grid_min}"
                );
                checked += 1;
            }
        }
    }
    pass("08 near-optimality", format!("{checked} cells within 1.10x"));
}

#[test]
fn c09_mills_bracket() {
    for x in [1.5, 2.0, 3.0, 5.0, 8.0] {
        let bounds = mills_bounds(x).unwrap();
        let tail = abs_normal_tail(x, 1.0).unwrap().value();
        assert!(
            bounds.lower <= tail && tail <= bounds.upper,
            "x={x}: {tail} not in [{}, {}]",
            bounds.lower,
            bounds.upper
        );
    }
    pass("09 mills-bracket", "x in {1.5, 2, 3, 5, 8}".into());
}

#[test]
fn c10_sampler_covariance_moments() {
    // Empirical covariance of 1e5 draws against the exact covariance,
    // entrywise at 3 standard errors. With 6400 simultaneous entries
    // an exact sampler still leaves ~0.27% outside 3 SE, so the
    // entrywise gate carries a 1% exception budget; systematic errors
    // are caught by pooled per-class means tested at 3 SE of their own
    // (exactly computed) sampling deviation.
    const N: usize = 100_000;
    const M: usize = 80;
    let mut bits = vec![false; M];
    for i in 0..20 {
        bits[4 * i] = true;
    }
    let mut details = Vec::new();
    for (case, rho) in [0.7, -0.00633].into_iter().enumerate() {
        let params = ModelParams::with_beta(M, 0.3, 1.0, 15.0, rho).unwrap();
        let nu = SignalVector::new(bits.clone());
        let sigma: Vec<f64> = bits
            .iter()
            .map(|&s| if s { 4.0_f64 } else { 1.0 })
            .collect();
        let truth = |i: usize, j: usize| -> f64 {
            if i == j {
                sigma[i] * sigma[i]
            } else {
                rho * sigma[i] * sigma[j]
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED.wrapping_add(1000 + case as u64));
        let mut moments = vec![0.0_f64; M * M];
        for _ in 0..N {
            let sample = draw_observations(&params, nu.clone(), &mut rng).unwrap();
            for i in 0..M {
                let yi = sample.y[i];
                for j in i..M {
                    moments[i * M + j] += yi * sample.y[j];
                }
            }
        }
        // Entrywise: known-mean covariance estimate s_ij with
        // SE^2 = (sigma_ii sigma_jj + sigma_ij^2) / N.
        let mut outside = 0usize;
        let mut entries = 0usize;
        for i in 0..M {
            for j in i..M {
                let s = moments[i * M + j] / N as f64;
                let se = ((truth(i, i) * truth(j, j) + truth(i, j).powi(2)) / N as f64).sqrt();
                if (s - truth(i, j)).abs() > 3.0 * se {
                    outside += 1;
                }
                entries += 1;
            }
        }
        assert!(
            (outside as f64) <= 0.01 * entries as f64,
            "rho={rho}: {outside}/{entries} entries outside 3 SE"
        );

        // Pooled per-class deviations: classes are (diag/off-diag) x
        // (signal count of the pair). Var of the pooled mean uses the
        // exact Gaussian covariance of second-moment estimates:
        // Cov(s_ij, s_kl) = (sigma_ik sigma_jl + sigma_il sigma_jk)/N.
        let class_of = |i: usize, j: usize| -> usize {
            let signals = usize::from(bits[i]) + usize::from(bits[j]);
            if i == j {
                signals // 0 or 1 -> classes 0, 1
            } else {
                2 + signals // classes 2, 3, 4
            }
        };
        let mut class_pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 5];
        for i in 0..M {
            for j in i..M {
                class_pairs[class_of(i, j)].push((i, j));
            }
        }
        for (class, pairs) in class_pairs.iter().enumerate() {
            if pairs.is_empty() {
                continue;
            }
            let n = pairs.len() as f64;
            let mean_dev = pairs
                .iter()
                .map(|&(i, j)| moments[i * M + j] / N as f64 - truth(i, j))
                .sum::<f64>()
                / n;
            let mut var = 0.0;
            for &(i, j) in pairs {
                for &(k, l) in pairs {
                    var += (truth(i, k) * truth(j, l) + truth(i, l) * truth(j, k)) / N as f64;
                }
            }
            var /= n * n;
            let se = var.sqrt();
            assert!(
                mean_dev.abs() <= 3.0 * se,
                "rho={rho} class {class}: pooled deviation {mean_dev} vs 3 SE = {}",
                3.0 * se
            );
        }
        details.push(format!("rho={rho}: {outside}/{entries} beyond 3 SE, pooled classes ok"));
    }
    pass("10 sampler-moments", details.join("; "));
}
