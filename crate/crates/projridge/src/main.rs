use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use projridge::core::simgen::{StudyConfig, StudyKind};
use projridge::core::study::{RateScenario, RateClaim};
use projridge::core::threshold::{fit_thresholded, Regime, ScheduleParams, ScheduleWarning};
use projridge::core::tuning::{tune, TuningGrid};
use projridge::core::{factorize, DesignMatrix};
use projridge::harness::{self, default_workers};
use projridge::io::{self, read_json, read_vector_csv, to_json, vector_to_csv};
use projridge::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "projridge", version, about = "Projection ridge estimation and simulation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Gaussian,
    Moment,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClaimArg {
    T1ii,
    T3,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation study and write its report files.
    Simulate {
        #[arg(long)]
        study: String,
        /// JSON study configuration; presets are used when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Preset size overrides.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the thresholded ridge estimator at given schedule constants.
    Fit {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        response: PathBuf,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "gaussian")]
        regime: RegimeArg,
        /// Moment regime: dimension exponent, moment order, rate exponent.
        #[arg(long)]
        l: Option<f64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        t: Option<f64>,
        /// Write the estimate here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose (C1, C2) by the leave-one-out criterion.
    Tune {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        response: PathBuf,
        /// JSON grid; a default grid scaled to the response is used when absent.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Fit error slopes in n for a named scaling scenario.
    Ratecheck {
        #[arg(long, value_enum)]
        theorem: ClaimArg,
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the report recorded in a manifest.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory; defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate {
            study,
            config,
            out,
            workers,
            n,
            p,
            replications,
            seed,
        } => {
            let kind = StudyKind::parse(&study).ok_or_else(|| usage(format!("unknown study {study:?}")))?;
            let (mut cfg, base) = match &config {
                Some(path) => {
                    let cfg: StudyConfig = read_json(path)?;
                    if cfg.study != kind {
                        return Err(usage(format!(
                            "config describes study {}, not {}",
                            cfg.study.name(),
                            kind.name()
                        )));
                    }
                    (cfg, path.parent().map(Path::to_path_buf))
                }
                None => {
                    let (dn, dp) = default_size(kind)?;
                    (StudyConfig::preset(kind, n.unwrap_or(dn), p.unwrap_or(dp))?, None)
                }
            };
            if config.is_some() {
                if let Some(n) = n {
                    cfg.n = n;
                }
                if let Some(p) = p {
                    cfg.p = p;
                }
            }
            if let Some(r) = replications {
                cfg.replications = r;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let report = harness::run_study(&cfg, workers.unwrap_or_else(default_workers), base.as_deref())?;
            harness::emit_report(&report, &out)?;
            print!("{}", harness::table_text(&report));
            Ok(())
        }
        Command::Fit {
            design,
            response,
            c1,
            c2,
            alpha,
            regime,
            l,
            k,
            t,
            out,
        } => {
            let regime = match regime {
                RegimeArg::Gaussian => Regime::Gaussian,
                RegimeArg::Moment => Regime::Moment {
                    l: l.ok_or_else(|| usage("--l is required for the moment regime"))?,
                    k: k.ok_or_else(|| usage("--k is required for the moment regime"))?,
                    t: t.ok_or_else(|| usage("--t is required for the moment regime"))?,
                },
            };
            let s = ScheduleParams { c1, alpha, c2, regime };
            for w in s.validate()? {
                let ScheduleWarning::MomentOrderTooSmall { xi } = w;
                eprintln!("warning: xi = {xi} ≥ 1; the moment order is too small for this rate");
            }
            let x = io::load_design_csv(&design)?;
            let y = read_vector_csv(&response)?;
            let f = factorize(&x)?;
            let fit = fit_thresholded(&f, &y, &s)?;
            eprintln!(
                "a_n = {} h_n = {} selected {} of {}",
                io::fmt_num(fit.a_n),
                io::fmt_num(fit.h_n),
                fit.selected.len(),
                f.p()
            );
            emit_vector(&fit.theta_tilde, out.as_deref())
        }
        Command::Tune { design, response, grid } => {
            let x: DesignMatrix = io::load_design_csv(&design)?;
            let y = read_vector_csv(&response)?;
            let grid: TuningGrid = match grid {
                Some(g) => read_json(&g)?,
                None => TuningGrid::default_for(&y),
            };
            let f = factorize(&x)?;
            let cv = tune(&f, &y, &grid)?;
            print!("{}", to_json(&cv));
            Ok(())
        }
        Command::Ratecheck {
            theorem,
            scenario,
            seed,
            replications,
            workers,
            out,
        } => {
            let mut sc = RateScenario::preset(&scenario).ok_or_else(|| {
                usage(format!(
                    "unknown scenario {scenario:?}; available: {}",
                    RateScenario::names().join(", ")
                ))
            })?;
            let want = match theorem {
                ClaimArg::T1ii => RateClaim::T1ii,
                ClaimArg::T3 => RateClaim::T3,
            };
            if sc.claim != want {
                return Err(usage(format!("scenario {scenario} does not test the requested claim")));
            }
            if let Some(r) = replications {
                sc.replications = r;
            }
            let report = harness::rate_check(&sc, seed, workers.unwrap_or_else(default_workers))?;
            if let Some(path) = out {
                io::write_json(&path, &report)?;
            }
            print!("{}", harness::rate_report_text(&report));
            Ok(())
        }
        Command::Report { manifest, out, workers } => {
            let report = harness::rerun_manifest(&manifest, workers.unwrap_or_else(default_workers))?;
            let dir = match out {
                Some(d) => d,
                None => manifest.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
            };
            harness::emit_report(&report, &dir)?;
            print!("{}", harness::table_text(&report));
            Ok(())
        }
    }
}

fn default_size(kind: StudyKind) -> Result<(usize, usize)> {
    match kind {
        StudyKind::III => Ok((49, 96)),
        StudyKind::Custom => Err(usage("custom studies need --config")),
        _ => Ok((30, 100)),
    }
}

fn emit_vector(v: &[f64], out: Option<&Path>) -> Result<()> {
    let text = vector_to_csv(v);
    match out {
        Some(p) => io::write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
