//! `bench`: the simulation tables as CSV.

use std::io::Write;

use bandvar::experiments::{
    autocov_study, bandwidth_study, estimation_study, AutocovErrors, EstimationStudy, Frequencies,
    MeanSd, StudyConfig,
};
use bandvar::io::format_f64;

use crate::commands::coeff_setting;
use crate::manifest::Recorder;
use crate::{BenchArgs, CliError, CliResult, GlobalArgs, Setting, Table};

type Pick = fn(&AutocovErrors) -> (f64, f64);

fn setting_name(s: Setting) -> &'static str {
    match s {
        Setting::Uniform => "uniform",
        Setting::Mixture => "mixture",
    }
}

fn frequencies_row(prefix: &str, f: Frequencies) -> String {
    format!("{prefix},{},{},{}", format_f64(f.equal), format_f64(f.over), format_f64(f.under))
}

fn mean_sd(m: MeanSd) -> String {
    format!("{},{}", format_f64(m.mean), format_f64(m.sd))
}

/// Header and rows of the requested table.
pub fn table(cfg: &StudyConfig, a: &BenchArgs) -> CliResult<Vec<String>> {
    let setting = coeff_setting(a.setting);
    let prefix = format!("{},{},{},{},{}", setting_name(a.setting), cfg.n, cfg.p, cfg.k0, cfg.reps);
    let freq_header = "setting,n,p,k0,reps,equal,over,under".to_string();
    Ok(match a.table {
        Table::T1 => vec![freq_header, frequencies_row(&prefix, bandwidth_study(cfg, setting)?.marginal())],
        Table::T2 => vec![freq_header, frequencies_row(&prefix, bandwidth_study(cfg, setting)?.joint())],
        Table::T3 => {
            let study = estimation_study(cfg, setting)?;
            let mut lines = vec![
                "setting,n,p,k0,reps,bandwidth,l1_mean,l1_sd,l2_mean,l2_sd,frobenius_mean,frobenius_sd"
                    .to_string(),
            ];
            for (name, errors) in [("estimated", &study.estimated), ("true", &study.oracle)] {
                lines.push(format!(
                    "{prefix},{name},{},{},{}",
                    mean_sd(EstimationStudy::summary(errors, |e| e.l1)),
                    mean_sd(EstimationStudy::summary(errors, |e| e.l2)),
                    mean_sd(EstimationStudy::summary(errors, |e| e.frobenius)),
                ));
            }
            lines
        }
        Table::T4 => {
            let study = autocov_study(cfg, a.target_norm, a.q)?;
            let prefix = format!("{},{},{},{},{}", cfg.n, cfg.p, cfg.k0, cfg.reps, format_f64(a.target_norm));
            let mut lines = vec!["n,p,k0,reps,norm,lag,estimator,l1_mean,l1_sd,l2_mean,l2_sd".to_string()];
            let pick: [(&str, Pick); 3] = [
                ("banded", |e| (e.banded_l1, e.banded_l2)),
                ("thresholded", |e| (e.thresholded_l1, e.thresholded_l2)),
                ("sample", |e| (e.sample_l1, e.sample_l2)),
            ];
            for (lag, errors) in [(0, &study.lag0), (1, &study.lag1)] {
                for (name, f) in pick {
                    let (l1, l2): (Vec<f64>, Vec<f64>) = errors.iter().map(f).unzip();
                    lines.push(format!(
                        "{prefix},{lag},{name},{},{}",
                        mean_sd(MeanSd::of(&l1)),
                        mean_sd(MeanSd::of(&l2))
                    ));
                }
            }
            lines
        }
    })
}

pub fn run(g: &GlobalArgs, a: &BenchArgs) -> CliResult<()> {
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let mut rec = Recorder::start("bench", g, a)?;
    let k0 = a.k0.unwrap_or(match a.table {
        Table::T4 => 3,
        _ => 1,
    });
    let mut cfg = StudyConfig::new(a.p, a.n, k0, a.reps, g.seed);
    cfg.k_max = a.k_max;
    let lines = table(&cfg, a)?;
    let mut f = std::fs::File::create(&a.out)?;
    for line in &lines {
        writeln!(f, "{line}")?;
        println!("{line}");
    }
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}
