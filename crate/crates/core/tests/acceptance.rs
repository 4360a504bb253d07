//! Acceptance gate: every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line. The process exits non-zero if any criterion fails.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use bandvar::autocov::band;
use bandvar::estimation::{fit_banded_var, rss_path};
use bandvar::experiments::{
    autocov_study, bandwidth_study, estimation_study, ordering_study, CoefficientErrors, MeanSd,
    StudyConfig,
};
use bandvar::linalg::{band_product, frobenius_norm, l1_norm, linf_norm, spectral_norm, BandedMatrix, DenseMatrix};
use bandvar::model::{banded_approximation_gap, theoretical_autocov_var1, BandedVarModel, TimeSeries};
use bandvar::rng::{SeedStream, StreamRng};
use bandvar::simulate::{gen_coefficients, gen_sigma_eps_structured, CoeffSetting};

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_usize(v: &[usize]) -> f64 {
    v.iter().sum::<usize>() as f64 / v.len() as f64
}

fn c1_uniform_k1() -> Outcome {
    let s = bandwidth_study(&StudyConfig::new(100, 200, 1, 100, SEED), CoeffSetting::Uniform).unwrap();
    let f = s.marginal();
    outcome(
        f.equal >= 70.0,
        format!("freq(k_hat = 1) = {:.0}% (over {:.0}%, under {:.0}%), need >= 70%", f.equal, f.over, f.under),
    )
}

fn c2_mixture_k1() -> Outcome {
    let s = bandwidth_study(&StudyConfig::new(100, 200, 1, 100, SEED), CoeffSetting::Mixture).unwrap();
    let f = s.marginal();
    outcome(
        f.equal >= 90.0,
        format!("freq(k_hat = 1) = {:.0}% (over {:.0}%, under {:.0}%), need >= 90%", f.equal, f.over, f.under),
    )
}

fn c3_marginal_beats_joint() -> Outcome {
    let s = bandwidth_study(&StudyConfig::new(100, 200, 2, 100, SEED), CoeffSetting::Uniform).unwrap();
    let (m, j) = (s.marginal(), s.joint());
    outcome(
        m.equal - j.equal >= 15.0 && j.over <= 2.0,
        format!(
            "freq(k_hat = 2) = {:.0}%, freq(k_tilde = 2) = {:.0}% (gap {:.0} pts, need >= 15), freq(k_tilde > 2) = {:.0}% (need <= 2%)",
            m.equal,
            j.equal,
            m.equal - j.equal,
            j.over
        ),
    )
}

fn c4_estimation_error() -> Outcome {
    let s = estimation_study(&StudyConfig::new(100, 200, 1, 100, SEED), CoeffSetting::Uniform).unwrap();
    let l2 = |e: &CoefficientErrors| e.l2;
    let est = MeanSd::of(&s.estimated.iter().map(l2).collect::<Vec<_>>());
    let ora = MeanSd::of(&s.oracle.iter().map(l2).collect::<Vec<_>>());
    let diff = (est.mean - ora.mean).abs();
    outcome(
        (0.20..=0.35).contains(&est.mean) && diff < 0.03,
        format!(
            "mean ||A_hat - A||_2 = {:.4} (sd {:.4}), need in [0.20, 0.35]; true-k0 mean {:.4}, |diff| = {:.4} (need < 0.03)",
            est.mean, est.sd, ora.mean, diff
        ),
    )
}

fn c5_frobenius_trend() -> Outcome {
    let err = |n: usize| {
        let s = estimation_study(&StudyConfig::new(100, n, 2, 50, SEED), CoeffSetting::Uniform).unwrap();
        mean(&s.oracle.iter().map(|e| e.frobenius).collect::<Vec<_>>())
    };
    let (e200, e800) = (err(200), err(800));
    let ratio = e200 / e800;
    outcome(
        (1.5..=2.7).contains(&ratio),
        format!("mean Frobenius error n=200: {e200:.4}, n=800: {e800:.4}, ratio {ratio:.3} (need in [1.5, 2.7])"),
    )
}

fn c6_autocov_ordering() -> Outcome {
    let s = autocov_study(&StudyConfig::new(100, 200, 3, 30, SEED), 0.8, 100).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (lag, errs) in [(0, &s.lag0), (1, &s.lag1)] {
        let b = mean(&errs.iter().map(|e| e.banded_l1).collect::<Vec<_>>());
        let t = mean(&errs.iter().map(|e| e.thresholded_l1).collect::<Vec<_>>());
        let sm = mean(&errs.iter().map(|e| e.sample_l1).collect::<Vec<_>>());
        let ok = b < t && t < sm && b / sm <= 0.4;
        pass &= ok;
        parts.push(format!(
            "lag {lag}: banded {b:.3} < thresholded {t:.3} < sample {sm:.3}, ratio {:.3} (need <= 0.4){}",
            b / sm,
            if ok { "" } else { " [violated]" }
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Solves the normal equations on the given support by Gaussian
/// elimination with partial pivoting.
fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = x[0].len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &yt) in x.iter().zip(y) {
        for r in 0..m {
            for c in 0..m {
                a[r][c] += row[r] * row[c];
            }
            a[r][m] += row[r] * yt;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..m).map(|r| a[r][m] / a[r][r]).collect()
}

fn c7_constrained_ls() -> Outcome {
    let mut rng = SeedStream::new(SEED).substream("constrained-ls").rng();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = rng.random_range(2..=8);
        let d = rng.random_range(1..=2);
        let k = rng.random_range(0..p);
        let n = rng.random_range((d + p * d + 10).max(20)..=60);
        let obs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let ts = TimeSeries::from_observations(&obs).unwrap();
        let fit = fit_banded_var(&ts, k, d, false).unwrap();
        for i in 0..p {
            // full lagged regressor set, then keep only in-band columns
            let support: Vec<(usize, usize)> = (1..=d)
                .flat_map(|l| (0..p).map(move |j| (l, j)))
                .filter(|&(_, j)| i.abs_diff(j) <= k)
                .collect();
            let x: Vec<Vec<f64>> = (d..n)
                .map(|t| support.iter().map(|&(l, j)| obs[t - l][j]).collect())
                .collect();
            let y: Vec<f64> = (d..n).map(|t| obs[t][i]).collect();
            let beta = normal_equations(&x, &y);
            for (&(l, j), b) in support.iter().zip(&beta) {
                worst = worst.max((fit.model.coeffs()[l - 1].get(i, j) - b).abs());
            }
            for l in 1..=d {
                for j in 0..p {
                    if i.abs_diff(j) > k {
                        worst = worst.max(fit.model.coeffs()[l - 1].get(i, j).abs());
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("max |coefficient difference| over 50 instances = {worst:.2e} (need <= 1e-8)"))
}

fn random_dense(rng: &mut StreamRng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn random_banded_int(rng: &mut StreamRng, p: usize, k: usize) -> BandedMatrix {
    let mut b = BandedMatrix::zeros(p, k).unwrap();
    for (i, j, _) in b.clone().band_entries() {
        b.set(i, j, rng.random_range(-9i32..=9) as f64).unwrap();
    }
    b
}

fn c8_property_suite() -> Outcome {
    let mut rng = SeedStream::new(SEED).substream("properties").rng();
    let mut failures = Vec::new();

    // banding idempotence
    let idem = (0..200).all(|_| {
        let p = rng.random_range(1..12);
        let h = random_dense(&mut rng, p, p);
        let r = rng.random_range(0..p + 2);
        band(&band(&h, r), r) == band(&h, r)
    });
    if !idem {
        failures.push("banding idempotence");
    }

    // nested RSS monotonicity
    let mut mono = true;
    for _ in 0..30 {
        let p = rng.random_range(3..10);
        let n = rng.random_range(40..80);
        let obs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let ts = TimeSeries::from_observations(&obs).unwrap();
        for i in 0..p {
            let path = rss_path(&ts, i, 1, p - 1).unwrap();
            mono &= path.windows(2).all(|w| w[1] <= w[0] + 1e-8);
        }
    }
    if !mono {
        failures.push("nested RSS monotonicity");
    }

    // Lyapunov residual
    let mut lyap = 0.0f64;
    for s in 0..20 {
        let p = 4 + s % 8;
        let k0 = s % 3;
        let a = gen_coefficients(CoeffSetting::Uniform, p.max(2 * k0 + 1), k0, None, &mut rng).unwrap();
        let p = a.dim();
        let sigma = gen_sigma_eps_structured(p).unwrap();
        let m = BandedVarModel::new(vec![a.clone()], k0, Some(sigma.clone())).unwrap();
        let s0 = theoretical_autocov_var1(&m, 0, 1_000_000).unwrap().matrix;
        let ad = a.to_dense();
        let res = s0.sub(&ad.matmul(&s0).unwrap().matmul(&ad.transpose()).unwrap()).unwrap().sub(&sigma).unwrap();
        lyap = lyap.max(frobenius_norm(&res) / frobenius_norm(&s0));
    }
    if lyap > 1e-8 {
        failures.push("Lyapunov residual");
    }

    // band product equals dense product on integers
    let exact = (0..200).all(|_| {
        let p = rng.random_range(1..10);
        let (ka, kb) = (rng.random_range(0..p), rng.random_range(0..p));
        let a = random_banded_int(&mut rng, p, ka);
        let b = random_banded_int(&mut rng, p, kb);
        band_product(&a, &b).unwrap().to_dense() == a.to_dense().matmul(&b.to_dense()).unwrap()
    });
    if !exact {
        failures.push("band product");
    }

    // seeded determinism across thread counts
    let cfg = StudyConfig::new(20, 80, 1, 6, 11);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    bandwidth_study(&cfg, CoeffSetting::Uniform).unwrap(),
                    autocov_study(&StudyConfig::new(12, 60, 1, 3, 5), 0.8, 10).unwrap(),
                )
            })
    };
    if run(1) != run(4) {
        failures.push("determinism across thread counts");
    }

    // spectral norm bound on 1000 matrices
    let bound = (0..1000).all(|_| {
        let r = rng.random_range(1..9);
        let c = rng.random_range(1..9);
        let m = random_dense(&mut rng, r, c);
        let s = spectral_norm(&m).unwrap();
        s * s <= l1_norm(&m) * linf_norm(&m) * (1.0 + 1e-10)
    });
    if !bound {
        failures.push("||M||_2^2 <= ||M||_1 ||M||_inf");
    }

    let detail = if failures.is_empty() {
        format!("all six properties hold (max Lyapunov residual {lyap:.1e})")
    } else {
        format!("failed: {} (max Lyapunov residual {lyap:.1e})", failures.join(", "))
    };
    outcome(failures.is_empty(), detail)
}

fn c9_truncation_decay() -> Outcome {
    let mut rng = SeedStream::new(SEED).substream("decay").rng();
    let a = gen_coefficients(CoeffSetting::Uniform, 50, 2, Some(0.8), &mut rng).unwrap();
    let sigma = gen_sigma_eps_structured(50).unwrap();
    let m = BandedVarModel::new(vec![a], 2, Some(sigma)).unwrap();
    let gaps: Vec<f64> = (2..=11).map(|r| banded_approximation_gap(&m, 0, r).unwrap().0).collect();
    let worst = gaps.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let limit = 0.8f64.powi(2) + 0.1;
    outcome(
        worst <= limit,
        format!("largest gap(r+1)/gap(r) over r = 2..10 is {worst:.4} (need <= {limit:.2})"),
    )
}

fn c10_orderings() -> Outcome {
    let mut cfg = StudyConfig::new(100, 200, 2, 20, SEED);
    cfg.bic.include_zero = true;
    let s = ordering_study(&cfg, 30, 5).unwrap();
    let one: Vec<f64> = s.orderings.iter().map(|o| mean(&o.one_step)).collect();
    let k: Vec<f64> = s.orderings.iter().map(|o| mean_usize(&o.k_hat)).collect();
    let bic: Vec<f64> = s.orderings.iter().map(|o| mean(&o.bic)).collect();
    let best = one[1..].iter().all(|&e| one[0] < e);
    let smaller = k[2] < k[0] && k[3] < k[0];
    let table = s
        .orderings
        .iter()
        .enumerate()
        .map(|(o, r)| format!("{} bic {:.1} k {:.2} err1 {:.4}", r.name, bic[o], k[o], one[o]))
        .collect::<Vec<_>>()
        .join(" | ");
    outcome(
        best && smaller,
        format!("true ordering best one-step error: {best}; random orderings select smaller k: {smaller}; {table}"),
    )
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("bandwidth selection, uniform setting, k0=1", c1_uniform_k1),
        ("bandwidth selection, mixture setting, k0=1", c2_mixture_k1),
        ("marginal vs whole-model criterion, k0=2", c3_marginal_beats_joint),
        ("coefficient estimation error, k0=1", c4_estimation_error),
        ("Frobenius error trend n=200 vs n=800", c5_frobenius_trend),
        ("autocovariance estimators: banded < thresholded < sample", c6_autocov_ordering),
        ("row-wise LS equals zero-constrained full regression", c7_constrained_ls),
        ("property suite", c8_property_suite),
        ("series truncation decay", c9_truncation_decay),
        ("ordering comparison", c10_orderings),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let id = idx + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {} [{name}] {} ({secs:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
