//! One function per subcommand except `bench`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use bandvar::autocov::{
    bootstrap_select_band, bootstrap_select_threshold, default_band_grid, default_band_width,
    default_threshold_grid, sample_autocov, AutocovEstimate, Tuning, WeightLaw,
};
use bandvar::estimation::fit_banded_var;
use bandvar::forecast::{deseasonalize, predict, rolling_evaluation, EvaluationOptions, FitSpec};
use bandvar::io::{format_f64, read_coords, read_series_file, write_json, write_series_file};
use bandvar::rng::SeedStream;
use bandvar::selection::{
    default_max_bandwidth, joint_bic_select, ordering_candidates, ordering_score, select_bandwidth,
    select_bandwidth_and_order, BicConfig,
};
use bandvar::simulate::{simulate as draw, CoeffSetting, SigmaKind, SimConfig};
use bandvar::{BandedVarModel, TimeSeries};

use crate::manifest::{sibling, Recorder};
use crate::{
    AutocovArgs, AutocovMethod, BicArgs, CliError, CliResult, FitArgs, ForecastArgs, GlobalArgs,
    OrderArgs, SelectArgs, Setting, Sigma, SimulateArgs, Weights,
};

pub fn coeff_setting(s: Setting) -> CoeffSetting {
    match s {
        Setting::Uniform => CoeffSetting::Uniform,
        Setting::Mixture => CoeffSetting::Mixture,
    }
}

fn bic_config(a: &BicArgs) -> BicConfig {
    BicConfig {
        c_n: a.c_n,
        penalty_multiplier: a.penalty_multiplier,
        include_zero: a.include_zero,
    }
}

/// Explicit bound, or `floor(sqrt(n))` capped at `p - 1`.
fn search_bound(ts: &TimeSeries, k_max: Option<usize>) -> usize {
    k_max.unwrap_or_else(|| default_max_bandwidth(ts.n()).min(ts.p() - 1))
}

fn centred(ts: &TimeSeries, demean: bool) -> TimeSeries {
    if demean {
        ts.demeaned().0
    } else {
        ts.clone()
    }
}

fn create(path: &Path) -> CliResult<File> {
    Ok(File::create(path)?)
}

/// Reads a model JSON, or the `model` member of a fit report.
fn load_model(path: &Path) -> CliResult<BandedVarModel> {
    let mut value: serde_json::Value =
        serde_json::from_reader(File::open(path)?).map_err(bandvar::Error::from)?;
    if let Some(inner) = value.get_mut("model") {
        value = inner.take();
    }
    Ok(serde_json::from_value(value).map_err(bandvar::Error::from)?)
}

pub fn simulate(g: &GlobalArgs, a: &SimulateArgs) -> CliResult<()> {
    let mut rec = Recorder::start("simulate", g, a)?;
    let cfg = SimConfig {
        target_norm: a.target_norm,
        burn_in: a.burn_in,
        sigma_eps_kind: match a.sigma {
            Sigma::Identity => SigmaKind::Identity,
            Sigma::Structured => SigmaKind::StructuredBbt,
        },
        ..SimConfig::new(a.p, a.n, a.k0, coeff_setting(a.setting), g.seed)
    };
    let sim = draw(&cfg)?;
    write_series_file(&sim.series, &a.out)?;
    rec.output(&a.out);
    let truth = sibling(&a.out, "truth.json");
    write_json(&sim.model, &truth)?;
    rec.output(&truth);
    rec.finish(&a.out)?;
    Ok(())
}

pub fn fit(g: &GlobalArgs, a: &FitArgs) -> CliResult<()> {
    let mut rec = Recorder::start("fit", g, a)?;
    let ts = read_series_file(&a.input)?;
    let k = match a.k {
        Some(k) => k,
        None => {
            let bound = search_bound(&ts, a.k_max);
            select_bandwidth(&centred(&ts, a.demean), a.d, bound, &bic_config(&a.bic))?.k_hat
        }
    };
    let report = fit_banded_var(&ts, k, a.d, a.demean)?;
    write_json(&report, &a.out)?;
    rec.output(&a.out);
    rec.finish(&a.out)?;
    println!("k = {k}");
    Ok(())
}

pub fn select(g: &GlobalArgs, a: &SelectArgs) -> CliResult<()> {
    let mut rec = Recorder::start("select", g, a)?;
    let ts = read_series_file(&a.input)?;
    let data = centred(&ts, a.demean);
    let cfg = bic_config(&a.bic);
    let k_max = search_bound(&ts, a.k_max);
    let trace = match a.l_max {
        Some(l_max) => select_bandwidth_and_order(&data, k_max, l_max, &cfg)?,
        None => select_bandwidth(&data, a.d, k_max, &cfg)?,
    };
    write_json(&trace, &a.out)?;
    rec.output(&a.out);
    let argmins = sibling(&a.out, "argmins.csv");
    trace.write_argmins_csv(create(&argmins)?)?;
    rec.output(&argmins);
    println!("k_hat = {}", trace.k_hat);
    if let Some(d) = trace.d_hat {
        println!("d_hat = {d}");
    }
    if a.joint {
        let joint = joint_bic_select(&data, a.d, k_max, &cfg)?;
        let path = sibling(&a.out, "joint.json");
        write_json(&joint, &path)?;
        rec.output(&path);
        println!("k_tilde = {}", joint.k_tilde);
    }
    rec.finish(&a.out)?;
    Ok(())
}

pub fn autocov(g: &GlobalArgs, a: &AutocovArgs) -> CliResult<()> {
    let mut rec = Recorder::start("autocov", g, a)?;
    let ts = read_series_file(&a.input)?;
    let law = match a.weights {
        Weights::Exponential => WeightLaw::Exponential,
        Weights::Normal => WeightLaw::Normal,
        Weights::Ones => WeightLaw::Ones,
    };
    let bootstrap = Tuning::Bootstrap { q: a.q, law };
    let stream = SeedStream::new(g.seed).substream("autocov");
    let banding_flags = a.r.is_some() || a.c.is_some();
    let mut risk_json = None;
    let estimate = match a.method {
        AutocovMethod::Sample => {
            if banding_flags || a.t.is_some() {
                return Err(CliError::Usage("--r, --c and --t do not apply to the sample estimator".into()));
            }
            AutocovEstimate::sample(&ts, a.lag)?
        }
        AutocovMethod::Banded => {
            if a.t.is_some() {
                return Err(CliError::Usage("--t applies to the thresholded estimator".into()));
            }
            match (a.r, a.c) {
                (Some(r), _) => AutocovEstimate::banded(&ts, a.lag, r, Tuning::Fixed)?,
                (None, Some(c)) => {
                    let r = default_band_width(ts.n(), ts.p(), c)?;
                    AutocovEstimate::banded(&ts, a.lag, r, Tuning::Rule { c })?
                }
                (None, None) => {
                    let grid = default_band_grid(ts.n(), ts.p())?;
                    let risk = bootstrap_select_band(&ts, a.lag, &grid, a.q, &stream.substream("band"), law)?;
                    let r = risk.argmin;
                    risk_json = Some(serde_json::to_value(&risk).map_err(bandvar::Error::from)?);
                    AutocovEstimate::banded(&ts, a.lag, r, bootstrap)?
                }
            }
        }
        AutocovMethod::Thresholded => {
            if banding_flags {
                return Err(CliError::Usage("--r and --c apply to the banded estimator".into()));
            }
            match a.t {
                Some(t) => AutocovEstimate::thresholded(&ts, a.lag, t, Tuning::Fixed)?,
                None => {
                    let grid = default_threshold_grid(&sample_autocov(&ts, a.lag)?);
                    let risk =
                        bootstrap_select_threshold(&ts, a.lag, &grid, a.q, &stream.substream("threshold"), law)?;
                    let t = risk.argmin;
                    risk_json = Some(serde_json::to_value(&risk).map_err(bandvar::Error::from)?);
                    AutocovEstimate::thresholded(&ts, a.lag, t, bootstrap)?
                }
            }
        }
    };
    let sidecar = estimate.write(&a.out)?;
    rec.output(&a.out);
    rec.output(&sidecar);
    if let Some(risk) = risk_json {
        let path = sibling(&a.out, "risk.json");
        write_json(&risk, &path)?;
        rec.output(&path);
    }
    rec.finish(&a.out)?;
    println!("{}", serde_json::to_string(&estimate.method).map_err(bandvar::Error::from)?);
    Ok(())
}

pub fn forecast(g: &GlobalArgs, a: &ForecastArgs) -> CliResult<()> {
    let mut rec = Recorder::start("forecast", g, a)?;
    let ts = read_series_file(&a.input)?;
    let (work, seasonal) = match a.period {
        Some(period) => {
            let (adjusted, table) = deseasonalize(&ts, period)?;
            (adjusted, Some(table))
        }
        None => (ts.clone(), None),
    };
    let spec = match &a.model {
        Some(path) => FitSpec::Fixed(load_model(path)?),
        None => FitSpec::Estimate {
            k: a.k,
            d: a.d,
            k_max: a.k_max,
            bic: bic_config(&a.bic),
            demean: a.demean,
        },
    };
    match a.holdout {
        Some(holdout) => {
            let opts = EvaluationOptions {
                refit: a.refit,
                metric: a.metric,
            };
            let report = rolling_evaluation(&work, &spec, holdout, a.horizon, opts)?;
            write_json(&report, &a.out)?;
            rec.output(&a.out);
            let errors = sibling(&a.out, "errors.csv");
            report.write_errors_csv(create(&errors)?)?;
            rec.output(&errors);
            for s in &report.summary {
                println!("h = {}: mean {} sd {} ({} errors)", s.horizon, s.mean, s.sd, s.count);
            }
        }
        None => {
            let model = spec.fit(&work)?;
            let mut pred = predict(&model, &work, a.horizon)?;
            if let Some(table) = &seasonal {
                for s in 0..a.horizon {
                    let effect = table.at(ts.n() + s);
                    for (i, e) in effect.iter().enumerate() {
                        pred[(i, s)] += e;
                    }
                }
            }
            let out = TimeSeries::new(pred)?.with_labels(ts.labels_or_default())?;
            write_series_file(&out, &a.out)?;
            rec.output(&a.out);
        }
    }
    rec.finish(&a.out)?;
    Ok(())
}

/// Coordinates in series order, matched by label.
fn series_coords(ts: &TimeSeries, path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let table = read_coords(File::open(path)?)?;
    ts.labels_or_default()
        .iter()
        .map(|label| {
            table
                .iter()
                .find(|(l, _, _)| l == label)
                .map(|&(_, x, y)| (x, y))
                .ok_or_else(|| CliError::Usage(format!("no coordinates for series {label:?}")))
        })
        .collect()
}

pub fn order(g: &GlobalArgs, a: &OrderArgs) -> CliResult<()> {
    let mut rec = Recorder::start("order", g, a)?;
    let ts = read_series_file(&a.input)?;
    let data = centred(&ts, a.demean);
    let cfg = bic_config(&a.bic);
    let k_max = search_bound(&ts, a.k_max);
    let mut candidates = vec![("given".to_string(), (0..ts.p()).collect::<Vec<_>>())];
    if let Some(path) = &a.coords {
        let coords = series_coords(&ts, path)?;
        for (strategy, perm) in ordering_candidates(&coords, &a.strategy)? {
            candidates.push((strategy.to_string(), perm));
        }
    }
    let labels = ts.labels_or_default();
    let mut lines = vec!["ordering,k_hat,bic_sum,series".to_string()];
    for (name, perm) in &candidates {
        let score = ordering_score(&data, perm, a.d, k_max, &cfg)?;
        let series: Vec<&str> = perm.iter().map(|&i| labels[i].as_str()).collect();
        lines.push(format!(
            "{name},{},{},{}",
            score.k_hat,
            format_f64(score.bic_sum),
            series.join(" ")
        ));
    }
    let mut f = create(&a.out)?;
    for line in &lines {
        writeln!(f, "{line}")?;
        println!("{line}");
    }
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}
