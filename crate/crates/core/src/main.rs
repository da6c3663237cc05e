use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use swipt_aoi::analytic::Method;
use swipt_aoi::mcsim::McOptions;
use swipt_aoi::sweep::{
    emit_plotdata, parse_grid, parse_methods, run_point, run_sweep, write_sweep_file, Axis, McSettings, Series,
    SweepSpec,
};
use swipt_aoi::validation::{run_validation, write_validation_file, ValidateOptions};
use swipt_aoi::{Scenario, SystemConfig};

fn flag(key: &str) -> String {
    key.replace('_', "-")
}

fn config_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .value_parser(clap::value_parser!(PathBuf))
            .help("flat `key = value` scenario file"),
    );
    SystemConfig::KEYS.iter().fold(cmd, |cmd, key| {
        cmd.arg(
            Arg::new(*key)
                .long(flag(key))
                .value_name("VALUE")
                .help(format!("override `{key}`"))
                .help_heading("Scenario overrides"),
        )
    })
}

fn mc_args(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("cycles")
            .long("cycles")
            .value_parser(clap::value_parser!(u64))
            .default_value("1000000")
            .help("Monte Carlo cycles per point"),
    )
    .arg(
        Arg::new("seed")
            .long("seed")
            .value_parser(clap::value_parser!(u64))
            .default_value("1"),
    )
    .arg(
        Arg::new("workers")
            .long("workers")
            .value_parser(clap::value_parser!(usize))
            .help("worker threads (default: all cores)"),
    )
}

fn cli() -> Command {
    let methods = Arg::new("methods")
        .long("methods")
        .default_value("analytic")
        .help("comma list of analytic, exact, mc");
    Command::new("swipt-aoi")
        .about("Average age of information in a two-way energy-harvesting relay network")
        .subcommand_required(true)
        .subcommand(mc_args(config_args(Command::new("point").about("evaluate one configuration"))).arg(methods.clone()))
        .subcommand(
            mc_args(config_args(Command::new("sweep").about("sweep one parameter and write CSV")))
                .arg(methods)
                .arg(
                    Arg::new("axis")
                        .long("axis")
                        .required(true)
                        .value_parser(["power", "blocklength", "update_bits", "p_min", "rho", "distance"]),
                )
                .arg(
                    Arg::new("grid")
                        .long("grid")
                        .required(true)
                        .help("start:stop:steps[:log] or a comma list"),
                )
                .arg(
                    Arg::new("series")
                        .long("series")
                        .action(ArgAction::Append)
                        .help("[label:]key=value[,key=value] curve; repeatable"),
                )
                .arg(Arg::new("out").long("out").default_value("sweep.csv").value_parser(clap::value_parser!(PathBuf))),
        )
        .subcommand(
            Command::new("plotdata")
                .about("split a sweep CSV into per-curve x/y files")
                .arg(Arg::new("csv").required(true).value_parser(clap::value_parser!(PathBuf)))
                .arg(Arg::new("out").long("out").default_value("plots").value_parser(clap::value_parser!(PathBuf)))
                .arg(Arg::new("figure").long("figure").help("file name prefix (default: from the sweep axis)")),
        )
        .subcommand(
            mc_args(config_args(Command::new("validate").about("cross-check the analytic model against simulation")))
                .arg(
                    Arg::new("trials")
                        .long("trials")
                        .value_parser(clap::value_parser!(u64))
                        .default_value("1000000"),
                )
                .arg(Arg::new("out").long("out").default_value(".").value_parser(clap::value_parser!(PathBuf))),
        )
}

fn overrides(m: &ArgMatches) -> Vec<(String, String)> {
    SystemConfig::KEYS
        .iter()
        .filter_map(|k| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect()
}

fn load_config(m: &ArgMatches) -> swipt_aoi::Result<SystemConfig> {
    let ov = overrides(m);
    match m.get_one::<PathBuf>("config") {
        Some(path) => SystemConfig::load(path, &ov),
        None => SystemConfig::parse_with_overrides("", &ov),
    }
}

fn mc_settings(m: &ArgMatches) -> McSettings {
    McSettings {
        cycles: *m.get_one::<u64>("cycles").unwrap(),
        options: McOptions {
            seed: *m.get_one::<u64>("seed").unwrap(),
            workers: m.get_one::<usize>("workers").copied(),
            ..McOptions::default()
        },
    }
}

fn echo_config(cfg: &SystemConfig) {
    for line in cfg.to_text().lines() {
        println!("# {line}");
    }
}

fn parse_series(raw: &str) -> swipt_aoi::Result<Series> {
    let (label, body) = match raw.split_once(':') {
        Some((l, b)) => (Some(l.to_string()), b),
        None => (None, raw),
    };
    let mut overrides = Vec::new();
    for pair in body.split(',') {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| swipt_aoi::Error::Grid(format!("series `{raw}`: expected key=value")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let label = label.unwrap_or_else(|| {
        overrides
            .iter()
            .map(|(k, v)| format!("{k}{v}"))
            .collect::<Vec<_>>()
            .join("_")
    });
    Ok(Series { label, overrides })
}

/// Distances used for power sweeps when no series is given.
fn default_distance_series() -> Vec<Series> {
    [30, 45, 60]
        .iter()
        .map(|d| Series {
            label: format!("d{d}"),
            overrides: vec![("d_ar".into(), d.to_string()), ("d_br".into(), d.to_string())],
        })
        .collect()
}

fn ms(v: f64) -> String {
    if v.is_finite() {
        format!("{:.4} ms", v * 1e3)
    } else {
        "unbounded".to_string()
    }
}

fn cmd_point(m: &ArgMatches) -> swipt_aoi::Result<ExitCode> {
    let cfg = load_config(m)?;
    echo_config(&cfg);
    let sc = Scenario::new(cfg)?;
    let methods = parse_methods(m.get_one::<String>("methods").unwrap())?;
    let results = run_point(&sc, &methods, &mc_settings(m))?;
    for r in &results {
        let rep = &r.report;
        println!(
            "{:<8} phi_a={:.6} phi_b={:.6} aaoi_a={} aaoi_b={} weighted_sum={} ci=±{}",
            rep.method.tag(),
            rep.phi_a,
            rep.phi_b,
            ms(rep.aaoi_a.as_f64()),
            ms(rep.aaoi_b.as_f64()),
            ms(rep.weighted_sum.as_f64()),
            ms(rep.ci_radius),
        );
    }
    let find = |m: Method| results.iter().find(|r| r.report.method == m);
    if let (Some(a), Some(mc)) = (find(Method::ClosedForm), find(Method::MonteCarlo)) {
        let gap = mc.report.weighted_sum.as_f64() - a.report.weighted_sum.as_f64();
        println!("analytic-mc gap: {} (mc ci ±{})", ms(gap.abs()), ms(mc.report.ci_radius));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(m: &ArgMatches) -> swipt_aoi::Result<ExitCode> {
    let cfg = load_config(m)?;
    let axis = Axis::parse(m.get_one::<String>("axis").unwrap())?;
    let grid = parse_grid(m.get_one::<String>("grid").unwrap(), axis)?;
    let methods = parse_methods(m.get_one::<String>("methods").unwrap())?;
    let mut spec = SweepSpec::new(axis, grid, methods);
    let mc = mc_settings(m);
    spec.mc = mc;
    spec.workers = mc.options.workers;
    spec.pinned = overrides(m).into_iter().map(|(k, _)| k).collect();
    spec.series = match m.get_many::<String>("series") {
        Some(list) => list.map(|s| parse_series(s)).collect::<swipt_aoi::Result<_>>()?,
        None if axis == Axis::Power => default_distance_series(),
        None => vec![Series::base()],
    };
    let out = m.get_one::<PathBuf>("out").unwrap();
    let outcome = run_sweep(&cfg, &spec)?;
    write_sweep_file(&outcome, out)?;
    println!("wrote {} rows to {}", outcome.rows.len(), out.display());
    if outcome.is_complete() {
        return Ok(ExitCode::SUCCESS);
    }
    for f in &outcome.failures {
        eprintln!("failed: series {} {} = {}: {}", f.series, axis.name(), f.x, f.error);
    }
    Ok(ExitCode::FAILURE)
}

fn cmd_plotdata(m: &ArgMatches) -> swipt_aoi::Result<ExitCode> {
    let files = emit_plotdata(
        m.get_one::<PathBuf>("csv").unwrap(),
        m.get_one::<PathBuf>("out").unwrap(),
        m.get_one::<String>("figure").map(String::as_str),
    )?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(m: &ArgMatches) -> swipt_aoi::Result<ExitCode> {
    let cfg = load_config(m)?;
    let mc = mc_settings(m);
    let opts = ValidateOptions {
        trials: *m.get_one::<u64>("trials").unwrap(),
        cycles: mc.cycles,
        seed: mc.options.seed,
        workers: mc.options.workers,
    };
    let checks = run_validation(&cfg, &opts)?;
    let dir = m.get_one::<PathBuf>("out").unwrap();
    std::fs::create_dir_all(dir)?;
    let path = dir.join("validate.csv");
    write_validation_file(&checks, &cfg, &opts, &path)?;
    for c in &checks {
        println!(
            "{} {:<22} gap {:.3e} tol {:.3e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.gap,
            c.tolerance
        );
    }
    println!("wrote {}", path.display());
    Ok(if checks.iter().all(|c| c.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let result = match matches.subcommand() {
        Some(("point", m)) => cmd_point(m),
        Some(("sweep", m)) => cmd_sweep(m),
        Some(("plotdata", m)) => cmd_plotdata(m),
        Some(("validate", m)) => cmd_validate(m),
        _ => unreachable!("subcommand required"),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
