use std::fs;
use std::path::PathBuf;
use std::process::exit;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;
use torsion_meet::config::JobConfig;
use torsion_meet::input::{parse_level_list, parse_points, parse_rational_list, parse_targets};
use torsion_meet::reports::Envelope;
use torsion_meet::run;
use torsion_meet::{exit_code, EXIT_REGRESSION};
use torsion_meet_core::error::{Error, Result};
use torsion_meet_core::meet::{sweep_locked_table, SweepConfig, BRUTE_FORCE_TOLERANCE};

#[derive(Parser)]
#[command(
    name = "torsion-meet",
    version,
    about = "Exact branch loci, fiber-product invariants and torsion-image \
             intersections for rational maps on elliptic curves"
)]
struct Cli {
    /// Plain-text job config (`key = value` lines) supplying flag defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Emit the report as a single JSON document.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Emit a CSV table (sweep and nevanlinna subcommands only).
    #[arg(long, global = true)]
    csv: bool,

    /// Seed echoed into the report envelope for randomized corpora.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the rendered output to PATH as the locked regression table.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "regression_check")]
    regression_lock: Option<PathBuf>,

    /// Compare the rendered output against PATH; a mismatch exits with 4.
    #[arg(long, global = true, value_name = "PATH")]
    regression_check: Option<PathBuf>,

    /// Also write the rendered output to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Branch locus and exact ramification table of one map.
    Branch {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
    },
    /// Degree of one map, cross-checked along two independent routes.
    Degree {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
    },
    /// Euler characteristic and degree bound of the fiber-product curve.
    Chi {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
        /// Second curve; defaults to the first.
        #[arg(long)]
        curve2: Option<String>,
        /// Second map; defaults to the first.
        #[arg(long)]
        map2: Option<String>,
    },
    /// Exact image of a torsion packet under one map.
    TorsionImages {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        level: Option<usize>,
        /// Take all orders up to the level instead of the kernel packet.
        #[arg(long)]
        cumulative: bool,
    },
    /// Exact intersection of two torsion images.
    Intersect {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        level: Option<usize>,
        /// Second curve; defaults to the first.
        #[arg(long)]
        curve2: Option<String>,
        /// Second map; defaults to the first.
        #[arg(long)]
        map2: Option<String>,
        /// Second level; defaults to the first.
        #[arg(long)]
        level2: Option<usize>,
        #[arg(long)]
        cumulative: bool,
        /// Recount by clustering floating-point samples and compare.
        #[arg(long)]
        brute: bool,
        /// Matching tolerance for the brute-force recount.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Torsion-image intersections across a Legendre parameter grid.
    Sweep {
        /// First-curve parameters, e.g. `2..12` or `2,3,1/2`.
        #[arg(long)]
        lambdas: Option<String>,
        /// Second-curve parameters.
        #[arg(long)]
        mus: Option<String>,
        /// Torsion levels, e.g. `2..10`.
        #[arg(long)]
        levels: Option<String>,
        /// Map on the first curve; defaults to `x`.
        #[arg(long)]
        map: Option<String>,
        /// Map on the second curve; defaults to the first map.
        #[arg(long)]
        map2: Option<String>,
        #[arg(long)]
        cumulative: bool,
    },
    /// Box experiment for intersections of finitely generated point sets.
    Mw {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
        /// Semicolon-separated generators, e.g. `(2,3); O`.
        #[arg(long)]
        generators: Option<String>,
        /// Coefficient box radius.
        #[arg(long)]
        radius: Option<i64>,
        #[arg(long)]
        curve2: Option<String>,
        #[arg(long)]
        map2: Option<String>,
        #[arg(long)]
        generators2: Option<String>,
        #[arg(long)]
        radius2: Option<i64>,
    },
    /// Value-distribution numerics over the complex points.
    Nevanlinna {
        #[command(subcommand)]
        mode: NevanCmd,
    },
}

#[derive(Subcommand)]
enum NevanCmd {
    /// Counting-to-characteristic ratios for chosen target values.
    Ratio {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
        /// Semicolon-separated values, rationals or `inf`.
        #[arg(long)]
        targets: Option<String>,
        /// r_max as a multiple of the largest period; defaults to 20.
        #[arg(long)]
        radius_factor: Option<f64>,
    },
    /// Margin of the summed truncated counting against the characteristic.
    Smt {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        targets: Option<String>,
        #[arg(long)]
        radius_factor: Option<f64>,
    },
}

#[derive(Clone, Copy)]
enum Mode {
    Text,
    Json,
    Csv,
}

fn main() {
    let cli = Cli::parse();
    let code = match drive(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    exit(code);
}

fn drive(cli: &Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
            JobConfig::parse(&text)?
        }
        None => JobConfig::default(),
    };
    let seed = num(cli.seed, &cfg, "seed")?;
    let mode = if cli.json {
        Mode::Json
    } else if cli.csv {
        Mode::Csv
    } else {
        Mode::Text
    };
    let output = execute(&cli.command, &cfg, mode, seed)?;
    if let Some(path) = &cli.regression_lock {
        write_file(path, &output)?;
    }
    if let Some(path) = &cli.out {
        write_file(path, &output)?;
    }
    print!("{output}");
    if let Some(path) = &cli.regression_check {
        let want = fs::read(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        if want != output.as_bytes() {
            eprintln!("regression mismatch against {}", path.display());
            return Ok(EXIT_REGRESSION);
        }
    }
    Ok(0)
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
}

fn execute(cmd: &Cmd, cfg: &JobConfig, mode: Mode, seed: Option<u64>) -> Result<String> {
    match cmd {
        Cmd::Branch { curve, map } => {
            let curve = req(curve, cfg, "curve")?;
            let map = req(map, cfg, "map")?;
            let (report, warnings) = run::run_branch(&curve, &map)?;
            finish("branch", seed, warnings, report, mode, run::render_branch)
        }
        Cmd::Degree { curve, map } => {
            let curve = req(curve, cfg, "curve")?;
            let map = req(map, cfg, "map")?;
            let (report, warnings) = run::run_degree(&curve, &map)?;
            finish("degree", seed, warnings, report, mode, run::render_degree)
        }
        Cmd::Chi { curve, map, curve2, map2 } => {
            let curve = req(curve, cfg, "curve")?;
            let map = req(map, cfg, "map")?;
            let curve2 = opt(curve2, cfg, "curve2").unwrap_or_else(|| curve.clone());
            let map2 = opt(map2, cfg, "map2").unwrap_or_else(|| map.clone());
            let (report, warnings) = run::run_chi(&curve, &map, &curve2, &map2)?;
            finish("chi", seed, warnings, report, mode, run::render_chi)
        }
        Cmd::TorsionImages { curve, map, level, cumulative } => {
            let curve = req(curve, cfg, "curve")?;
            let map = req(map, cfg, "map")?;
            let level = req_num(*level, cfg, "level")?;
            let cumulative = boolean(*cumulative, cfg, "cumulative")?;
            let (report, warnings) = run::run_torsion_images(&curve, &map, level, cumulative)?;
            finish("torsion-images", seed, warnings, report, mode, run::render_torsion_images)
        }
        Cmd::Intersect { curve, map, level, curve2, map2, level2, cumulative, brute, tolerance } => {
            let curve = req(curve, cfg, "curve")?;
            let map = req(map, cfg, "map")?;
            let level = req_num(*level, cfg, "level")?;
            let curve2 = opt(curve2, cfg, "curve2").unwrap_or_else(|| curve.clone());
            let map2 = opt(map2, cfg, "map2").unwrap_or_else(|| map.clone());
            let level2 = num(*level2, cfg, "level2")?.unwrap_or(level);
            let cumulative = boolean(*cumulative, cfg, "cumulative")?;
            let brute = boolean(*brute, cfg, "brute")?;
            let tolerance = num(*tolerance, cfg, "tolerance")?;
            if tolerance.is_some() && !brute {
                return Err(Error::invalid("--tolerance requires --brute"));
            }
            let brute = brute.then_some(tolerance.unwrap_or(BRUTE_FORCE_TOLERANCE));
            let (report, warnings) = run::run_intersect(
                &curve, &map, level, &curve2, &map2, level2, cumulative, brute,
            )?;
            finish("intersect", seed, warnings, report, mode, run::render_intersect)
        }
        Cmd::Sweep { lambdas, mus, levels, map, map2, cumulative } => {
            let map = opt(map, cfg, "map").unwrap_or_else(|| "x".to_string());
            let config = SweepConfig {
                lambdas: parse_rational_list(&req(lambdas, cfg, "lambdas")?)?,
                mus: parse_rational_list(&req(mus, cfg, "mus")?)?,
                levels: parse_level_list(&req(levels, cfg, "levels")?)?,
                map2: opt(map2, cfg, "map2").unwrap_or_else(|| map.clone()),
                map1: map,
                cumulative: boolean(*cumulative, cfg, "cumulative")?,
            };
            let (report, warnings) = run::run_sweep(&config);
            let env = Envelope::new("sweep", seed, warnings, report);
            match mode {
                Mode::Json => env.to_json(),
                Mode::Csv => Ok(sweep_locked_table(&env.report)),
                Mode::Text => Ok(run::render_text(&env, &run::render_sweep(&env.report))),
            }
        }
        Cmd::Mw { curve, map, generators, radius, curve2, map2, generators2, radius2 } => {
            let curve = req(curve, cfg, "curve")?;
            let map = req(map, cfg, "map")?;
            let generators = parse_points(&req(generators, cfg, "generators")?)?;
            let radius = req_num(*radius, cfg, "radius")?;
            let curve2 = opt(curve2, cfg, "curve2").unwrap_or_else(|| curve.clone());
            let map2 = opt(map2, cfg, "map2").unwrap_or_else(|| map.clone());
            let generators2 = match opt(generators2, cfg, "generators2") {
                Some(text) => parse_points(&text)?,
                None => generators.clone(),
            };
            let radius2 = num(*radius2, cfg, "radius2")?.unwrap_or(radius);
            let (report, warnings) = run::run_mw(
                &curve, &map, &generators, radius, &curve2, &map2, &generators2, radius2,
            )?;
            finish("mw", seed, warnings, report, mode, run::render_mw)
        }
        Cmd::Nevanlinna { mode: nevan } => match nevan {
            NevanCmd::Ratio { curve, map, targets, radius_factor } => {
                let curve = req(curve, cfg, "curve")?;
                let map = req(map, cfg, "map")?;
                let targets = parse_targets(&req(targets, cfg, "targets")?)?;
                let factor = num(*radius_factor, cfg, "radius_factor")?.unwrap_or(20.0);
                let (report, warnings) = run::run_nevan_ratio(&curve, &map, &targets, factor)?;
                let env = Envelope::new("nevanlinna-ratio", seed, warnings, report);
                match mode {
                    Mode::Json => env.to_json(),
                    Mode::Csv => Ok(run::ratio_csv(&env.report)),
                    Mode::Text => {
                        Ok(run::render_text(&env, &run::render_nevan_ratio(&env.report)))
                    }
                }
            }
            NevanCmd::Smt { curve, map, targets, radius_factor } => {
                let curve = req(curve, cfg, "curve")?;
                let map = req(map, cfg, "map")?;
                let targets = parse_targets(&req(targets, cfg, "targets")?)?;
                let factor = num(*radius_factor, cfg, "radius_factor")?.unwrap_or(20.0);
                let (report, warnings) = run::run_nevan_smt(&curve, &map, &targets, factor)?;
                let env = Envelope::new("nevanlinna-smt", seed, warnings, report);
                match mode {
                    Mode::Json => env.to_json(),
                    Mode::Csv => Ok(run::smt_csv(&env.report)),
                    Mode::Text => Ok(run::render_text(&env, &run::render_nevan_smt(&env.report))),
                }
            }
        },
    }
}

fn finish<T: Serialize>(
    command: &str,
    seed: Option<u64>,
    warnings: Vec<String>,
    report: T,
    mode: Mode,
    render: impl Fn(&T) -> String,
) -> Result<String> {
    let env = Envelope::new(command, seed, warnings, report);
    match mode {
        Mode::Json => env.to_json(),
        Mode::Text => Ok(run::render_text(&env, &render(&env.report))),
        Mode::Csv => Err(Error::invalid(format!(
            "`{command}` has no CSV format; use --json or the default text output"
        ))),
    }
}

fn req(flag: &Option<String>, cfg: &JobConfig, key: &str) -> Result<String> {
    opt(flag, cfg, key).ok_or_else(|| {
        Error::invalid(format!(
            "missing `{key}`: pass --{} or set it in the config",
            key.replace('_', "-")
        ))
    })
}

fn opt(flag: &Option<String>, cfg: &JobConfig, key: &str) -> Option<String> {
    flag.clone().or_else(|| cfg.get(key).map(str::to_string))
}

fn num<T: FromStr>(flag: Option<T>, cfg: &JobConfig, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    cfg.get(key)
        .map(|s| s.parse::<T>().map_err(|e| Error::invalid(format!("config key `{key}`: {e}"))))
        .transpose()
}

fn req_num<T: FromStr>(flag: Option<T>, cfg: &JobConfig, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    num(flag, cfg, key)?.ok_or_else(|| {
        Error::invalid(format!(
            "missing `{key}`: pass --{} or set it in the config",
            key.replace('_', "-")
        ))
    })
}

fn boolean(flag: bool, cfg: &JobConfig, key: &str) -> Result<bool> {
    if flag {
        return Ok(true);
    }
    match cfg.get(key) {
        None => Ok(false),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(other) => {
            Err(Error::invalid(format!("config key `{key}` must be true or false, got `{other}`")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_values() {
        let cfg = JobConfig::parse("level = 3\ncumulative = true\nseed = 9\n").unwrap();
        assert_eq!(req_num(Some(5usize), &cfg, "level").unwrap(), 5);
        assert_eq!(req_num::<usize>(None, &cfg, "level").unwrap(), 3);
        assert!(req_num::<usize>(None, &cfg, "level2").is_err());
        assert!(boolean(false, &cfg, "cumulative").unwrap());
        assert!(!boolean(false, &cfg, "brute").unwrap());
        assert_eq!(num::<u64>(None, &cfg, "seed").unwrap(), Some(9));
    }

    #[test]
    fn command_line_parses_nested_subcommands() {
        let cli = Cli::try_parse_from([
            "torsion-meet",
            "nevanlinna",
            "ratio",
            "--curve",
            "weierstrass:-1,0",
            "--map",
            "x",
            "--targets",
            "0;inf",
            "--json",
        ])
        .unwrap();
        assert!(cli.json);
        assert!(matches!(cli.command, Cmd::Nevanlinna { mode: NevanCmd::Ratio { .. } }));
        assert!(Cli::try_parse_from(["torsion-meet", "sweep", "--json", "--csv"]).is_err());
    }
}
