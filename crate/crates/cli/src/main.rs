mod cache;
mod config;
mod error;
mod render;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ehpseq::ext_ehp::{ehp_assemble, ext_from_bg, ExtChart};
use ehpseq::lambda::{lambda_admissibles, lambda_differential, lambda_homology};
use ehpseq::resolution::{verify_exactness, Tower};
use serde::Serialize;

use cache::{resolutions, Cache};
use config::{Cli, CommandKind, Format, JobConfig};
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("ehpseq: {e}");
            return ExitCode::from(2);
        }
    }
    let result = JobConfig::from_cli(cli)
        .map_err(CliError::Usage)
        .and_then(|config| run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ehpseq: {e}");
            e.exit_code()
        }
    }
}

fn run(config: &JobConfig) -> Result<(), CliError> {
    let cache = config.cache_dir.as_deref().map(Cache::open).transpose()?;
    let (text, verdict) = match config.command {
        CommandKind::Resolve => (resolve(config, cache.as_ref())?, Ok(())),
        CommandKind::Ext => (ext(config, cache.as_ref())?, Ok(())),
        CommandKind::Ehp => (ehp(config)?, Ok(())),
        CommandKind::Lambda => (lambda(config), Ok(())),
        CommandKind::Compare => compare(config, cache.as_ref())?,
        CommandKind::Check => check(config)?,
    };
    emit(config, &text)?;
    verdict
}

fn emit(config: &JobConfig, text: &str) -> Result<(), CliError> {
    match &config.output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| CliError::io("<stdout>".as_ref(), e))
        }
    }
}

fn sphere(config: &JobConfig) -> u32 {
    config.sphere.expect("validated")
}

fn resolve(config: &JobConfig, cache: Option<&Cache>) -> Result<String, CliError> {
    let t = sphere(config);
    let all = resolutions(t, config.s_max, cache)?;
    Ok(all.last().expect("t >= 1").to_json())
}

fn bg_chart(config: &JobConfig, cache: Option<&Cache>) -> Result<ExtChart, CliError> {
    let mut chart = ExtChart::new();
    for bg in resolutions(config.t_max, config.s_max, cache)? {
        chart.extend(ext_from_bg(&bg, config.s_max)?);
    }
    Ok(chart)
}

fn render_chart(config: &JobConfig, chart: &ExtChart) -> String {
    match config.format {
        Format::Json => render::json(chart),
        Format::Tsv => render::chart_tsv(chart, config.representatives),
        Format::Ascii => render::chart_ascii(chart, sphere(config), config.s_max, config.t_max),
    }
}

fn ext(config: &JobConfig, cache: Option<&Cache>) -> Result<String, CliError> {
    let chart = bg_chart(config, cache)?;
    let chart = match config.sphere {
        Some(n) => chart.sphere(n),
        None => chart,
    };
    Ok(render_chart(config, &chart))
}

fn ehp(config: &JobConfig) -> Result<String, CliError> {
    let n = sphere(config);
    let tower = Tower::build(config.t_max + 1, config.s_max)?;
    let reports = (1..=config.t_max)
        .map(|t| ehp_assemble(&tower, n, t, config.s_max))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match config.format {
        Format::Json => render::json(&reports),
        _ => render::ehp_tsv(&reports),
    })
}

fn lambda(config: &JobConfig) -> String {
    let n = sphere(config);
    let chart = lambda_homology(n, config.s_max, config.t_max - n);
    render_chart(config, &chart)
}

#[derive(Serialize)]
struct Mismatch {
    n: u32,
    s: usize,
    t: u32,
    resolution: usize,
    lambda: usize,
}

#[derive(Serialize)]
struct Comparison {
    cells: usize,
    mismatches: Vec<Mismatch>,
}

type Verdict = Result<(), CliError>;

fn compare(config: &JobConfig, cache: Option<&Cache>) -> Result<(String, Verdict), CliError> {
    let bg = bg_chart(config, cache)?;
    let mut cmp = Comparison {
        cells: 0,
        mismatches: Vec::new(),
    };
    for n in 1..=config.n_max {
        let lambda = lambda_homology(n, config.s_max, config.t_max - n);
        for s in 0..=config.s_max {
            for t in n..=config.t_max {
                cmp.cells += 1;
                let (a, b) = (bg.dim(n, s, t), lambda.dim(n, s, t));
                if a != b {
                    cmp.mismatches.push(Mismatch {
                        n,
                        s,
                        t,
                        resolution: a,
                        lambda: b,
                    });
                }
            }
        }
    }
    let text = match config.format {
        Format::Json => render::json(&cmp),
        _ => {
            let mut out = String::from("n\ts\tt\tresolution\tlambda\n");
            for m in &cmp.mismatches {
                out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", m.n, m.s, m.t, m.resolution, m.lambda));
            }
            out
        }
    };
    eprintln!("compared {} cells, {} mismatches", cmp.cells, cmp.mismatches.len());
    let verdict = if cmp.mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} dimension mismatches", cmp.mismatches.len())))
    };
    Ok((text, verdict))
}

#[derive(Serialize)]
struct SuiteResult {
    suite: &'static str,
    passed: bool,
    detail: String,
}

fn check(config: &JobConfig) -> Result<(String, Verdict), CliError> {
    let tower = Tower::build(config.t_max, config.s_max)?;
    let mut results = Vec::new();

    let mut square = Ok(());
    for t in 1..=config.t_max {
        let complexes = [tower.bg(t), tower.da(t)];
        for c in complexes.into_iter().flatten() {
            if let Err(e) = c.check_square_zero() {
                square = Err(e.to_string());
            }
        }
        if !tower.bg(t).expect("in range").is_minimal() {
            square = Err(format!("BG({t}) is not minimal"));
        }
    }
    results.push(SuiteResult {
        suite: "square",
        passed: square.is_ok(),
        detail: square.err().unwrap_or_else(|| format!("BG and DA for t <= {}", config.t_max)),
    });

    let mut failures = Vec::new();
    for t in 1..=config.t_max {
        let bg = tower.bg(t).expect("in range").truncate(config.s_max)?;
        let report = verify_exactness(&bg, config.d_max);
        failures.extend(report.failures.iter().map(|f| format!("t={t} s={} d={}", f.s, f.d)));
    }
    results.push(SuiteResult {
        suite: "exactness",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("t <= {}, d <= {}", config.t_max, config.d_max)
        } else {
            failures.join(", ")
        },
    });

    let mut bad = Vec::new();
    for w in 0..=config.d_max {
        for s in 0..=w as usize {
            for m in lambda_admissibles(s, w, w + 1) {
                if !lambda_differential(&lambda_differential(&m.clone().into())).is_zero() {
                    bad.push(m.to_string());
                }
            }
        }
    }
    results.push(SuiteResult {
        suite: "lambda-d2",
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("w <= {}", config.d_max)
        } else {
            bad.join(", ")
        },
    });

    let text = match config.format {
        Format::Json => render::json(&results),
        _ => results
            .iter()
            .map(|r| format!("{}\t{}\t{}\n", r.suite, if r.passed { "pass" } else { "FAIL" }, r.detail))
            .collect(),
    };
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.suite).collect();
    let verdict = if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("suites failed: {}", failed.join(", "))))
    };
    Ok((text, verdict))
}
