//! The `simulate`, `benchmark` and `validate` subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use maxstable::rng_math::derive_seed;
use maxstable::simulate::{run_replications, summarize_counts, CountSummary};
use maxstable::validate::{run_suite, SuiteConfig};
use maxstable::{Algorithm, PreparedModel, Realization};

use crate::config::{ConfigError, RunConfig};
use crate::CliError;

/// Successful completion of a subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ChecksFailed,
}

fn output_path(config: &RunConfig) -> Result<&Path, CliError> {
    config.output.as_deref().ok_or_else(|| {
        CliError::Config(ConfigError::Invalid(vec![
            "output: no output path (set `output` in the config or pass --out)".into(),
        ]))
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Renders realizations as `rep,count,n_zero,z_1,…,z_N`. `rep` is the
/// replication's stream id, so any row can be replayed on its own.
pub fn realizations_csv(realizations: &[Realization]) -> String {
    let n = realizations.first().map_or(0, |r| r.z.len());
    let mut out = String::from("rep,count,n_zero");
    for j in 1..=n {
        let _ = write!(out, ",z_{j}");
    }
    out.push('\n');
    for (rep, r) in realizations.iter().enumerate() {
        let _ = write!(out, "{rep},{},", r.spectral_draw_count);
        if let Some(k) = r.n_zero {
            let _ = write!(out, "{k}");
        }
        for z in &r.z {
            let _ = write!(out, ",{z:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn cmd_simulate(config: &RunConfig) -> Result<Outcome, CliError> {
    let path = output_path(config)?;
    let law = PreparedModel::new(&config.model)?;
    let start = Instant::now();
    let reals = run_replications(config.seed, &law, config.algorithm, config.reps, config.threads)?;
    let elapsed = start.elapsed();
    write_file(path, &realizations_csv(&reals))?;
    let s = summarize_counts(&reals)?;
    println!(
        "{} on {} ({} sites): {} reps, mean count {:.4} (se {:.4}), {:.3}s",
        config.algorithm.name(),
        config.model.family_name(),
        config.model.n_sites(),
        s.reps,
        s.mean_count,
        s.se_count,
        elapsed.as_secs_f64()
    );
    println!("wrote {}", path.display());
    Ok(Outcome::Ok)
}

/// Per-rep cost table for the three engines run by `benchmark`.
pub fn benchmark_counts_csv(
    spectral: Option<&[Realization]>,
    given: &[Realization],
    adaptive: &[Realization],
) -> String {
    let mut out = String::from("rep,count_spectral,count_given_order,count_adaptive,n0_given_order,n0_adaptive\n");
    for (rep, (g, a)) in given.iter().zip(adaptive).enumerate() {
        let c1 = spectral
            .map(|s| s[rep].spectral_draw_count.to_string())
            .unwrap_or_default();
        let n0 = |r: &Realization| r.n_zero.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{rep},{c1},{},{},{},{}",
            g.spectral_draw_count,
            a.spectral_draw_count,
            n0(g),
            n0(a)
        );
    }
    out
}

/// Integer-binned N₀ histogram, one row per value 1..=N, raw counts.
pub fn n0_histogram_csv(given: &CountSummary, adaptive: &CountSummary) -> String {
    let mut out = String::from("n0,freq_given_order,freq_adaptive\n");
    let bins = given.n_zero_histogram.len().max(adaptive.n_zero_histogram.len());
    for k in 0..bins {
        let g = given.n_zero_histogram.get(k).copied().unwrap_or(0);
        let a = adaptive.n_zero_histogram.get(k).copied().unwrap_or(0);
        let _ = writeln!(out, "{},{g},{a}", k + 1);
    }
    out
}

pub fn cmd_benchmark(config: &RunConfig, skip_spectral: bool) -> Result<Outcome, CliError> {
    let path = output_path(config)?;
    let law = PreparedModel::new(&config.model)?;
    let run = |label: u64, algorithm: Algorithm| {
        let start = Instant::now();
        let reals = run_replications(
            derive_seed(config.seed, label),
            &law,
            algorithm,
            config.reps,
            config.threads,
        );
        reals.map(|r| (r, start.elapsed().as_secs_f64()))
    };
    let spectral = if skip_spectral {
        None
    } else {
        Some(run(1, Algorithm::Spectral)?)
    };
    let given = run(2, Algorithm::Extremal)?;
    let adaptive = run(3, Algorithm::ExtremalAdaptive)?;

    let sg = summarize_counts(&given.0)?;
    let sa = summarize_counts(&adaptive.0)?;
    write_file(
        path,
        &benchmark_counts_csv(spectral.as_ref().map(|s| s.0.as_slice()), &given.0, &adaptive.0),
    )?;
    let hist_path = sibling(path, "_n0_histogram.csv");
    write_file(&hist_path, &n0_histogram_csv(&sg, &sa))?;

    println!(
        "{} ({} sites), {} reps, seed {}",
        config.model.family_name(),
        config.model.n_sites(),
        config.reps,
        config.seed
    );
    println!(
        "{:<18} {:>12} {:>10} {:>10} {:>10} {:>9}",
        "algorithm", "mean_count", "se", "mean_n0", "se", "time_s"
    );
    let row = |name: &str, s: &CountSummary, secs: f64| {
        let n0 = s.mean_n_zero.map_or("-".into(), |m| format!("{m:.4}"));
        let n0se = s.se_n_zero.map_or("-".into(), |m| format!("{m:.4}"));
        println!(
            "{name:<18} {:>12.4} {:>10.4} {n0:>10} {n0se:>10} {secs:>9.3}",
            s.mean_count, s.se_count
        );
    };
    if let Some((reals, secs)) = &spectral {
        row("spectral", &summarize_counts(reals)?, *secs);
    }
    row("extremal", &sg, given.1);
    row("extremal_adaptive", &sa, adaptive.1);
    if let (Some(mg), Some(ma), Some(eg), Some(ea)) = (sg.mean_n_zero, sa.mean_n_zero, sg.se_n_zero, sa.se_n_zero) {
        println!(
            "N0 gap (given_order - adaptive): {:.4} (pooled se {:.4})",
            mg - ma,
            (eg * eg + ea * ea).sqrt()
        );
    }
    println!("wrote {} and {}", path.display(), hist_path.display());
    Ok(Outcome::Ok)
}

pub fn cmd_validate(config: &RunConfig) -> Result<Outcome, CliError> {
    let path = output_path(config)?;
    let (json_path, text_path) = if path.extension().is_some_and(|e| e == "txt") {
        (path.with_extension("json"), path.to_path_buf())
    } else {
        (path.to_path_buf(), path.with_extension("txt"))
    };
    let suite = SuiteConfig {
        reps: config.reps,
        h_draws: config.h_draws,
        fold_k: config.fold_k,
        seed: config.seed,
        threads: config.threads,
        negative_control: config.negative_control,
    };
    let start = Instant::now();
    let report = run_suite(&config.model, &suite)?;
    let text = report.to_text();
    write_file(&json_path, &report.to_json())?;
    write_file(&text_path, &text)?;
    print!("{text}");
    println!(
        "{:.3}s; wrote {} and {}",
        start.elapsed().as_secs_f64(),
        json_path.display(),
        text_path.display()
    );
    Ok(if report.all_passed() {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}
