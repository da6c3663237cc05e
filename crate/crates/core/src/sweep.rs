//! Parameter sweeps, CSV output and per-curve plot data.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analytic::{analytic_report, exact_report, Age, AoiReport, Method};
use crate::config::{Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::mcsim::{simulate_aoi, McOptions};
use crate::quad::Adaptive;

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Both source powers.
    Power,
    /// All four blocklengths.
    Blocklength,
    /// All four payload sizes.
    UpdateBits,
    PMin,
    Rho,
    /// Both source-relay distances.
    Distance,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::Power,
        Axis::Blocklength,
        Axis::UpdateBits,
        Axis::PMin,
        Axis::Rho,
        Axis::Distance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Power => "power",
            Axis::Blocklength => "blocklength",
            Axis::UpdateBits => "update_bits",
            Axis::PMin => "p_min",
            Axis::Rho => "rho",
            Axis::Distance => "distance",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Grid(format!("unknown axis `{s}`")))
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Axis::Blocklength | Axis::UpdateBits)
    }

    /// Config keys written by this axis.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Axis::Power => &["p_a", "p_b"],
            Axis::Blocklength => &["n_ar", "n_br", "n_ra", "n_rb"],
            Axis::UpdateBits => &["k_ar", "k_br", "k_ra", "k_rb"],
            Axis::PMin => &["p_min"],
            Axis::Rho => &["rho"],
            Axis::Distance => &["d_ar", "d_br"],
        }
    }

    /// Figure tag used for plot-data file names.
    pub fn figure(self) -> &'static str {
        match self {
            Axis::Power => "fig3",
            Axis::Blocklength => "fig4",
            Axis::UpdateBits => "fig5",
            Axis::PMin => "fig6",
            Axis::Rho => "rho",
            Axis::Distance => "distance",
        }
    }

    /// Writes `value` into every key of the axis except those in `pinned`.
    pub fn apply(self, cfg: &mut SystemConfig, value: f64, pinned: &[String]) -> Result<()> {
        let raw = if self.is_integer() {
            format!("{}", value as u64)
        } else {
            format!("{value:?}")
        };
        for key in self.keys() {
            if !pinned.iter().any(|p| p == key) {
                cfg.set(key, &raw)?;
            }
        }
        Ok(())
    }
}

/// Parses `start:stop:steps[:log]` or a comma-separated list. The result is
/// nonempty and strictly increasing; integer axes get integer values.
pub fn parse_grid(spec: &str, axis: Axis) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Grid(format!("`{spec}`: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let log = match parts.get(3).map(|s| s.trim()) {
            None => false,
            Some("log") => true,
            Some(_) => return Err(bad("fourth field must be `log`")),
        };
        if !(3..=4).contains(&parts.len()) {
            return Err(bad("expected start:stop:steps[:log]"));
        }
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let steps: usize = parts[2].trim().parse().map_err(|_| bad("steps must be a positive integer"))?;
        if steps == 0 {
            return Err(bad("steps must be a positive integer"));
        }
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(bad("log grids need positive endpoints"));
        }
        if steps == 1 {
            vec![start]
        } else {
            let last = (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    let t = i as f64 / last;
                    if i == steps - 1 {
                        stop
                    } else if log {
                        start * (stop / start).powf(t)
                    } else {
                        start + (stop - start) * t
                    }
                })
                .collect()
        }
    } else {
        spec.split(',').map(num).collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid"));
    }
    let values: Vec<f64> = if axis.is_integer() {
        values
            .into_iter()
            .map(|v| {
                let r = v.round();
                if (v - r).abs() > 1e-9 * r.abs().max(1.0) || r < 1.0 {
                    Err(bad("this axis takes positive integers"))
                } else {
                    Ok(r)
                }
            })
            .collect::<Result<_>>()?
    } else {
        values
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("values must be strictly increasing"));
    }
    Ok(values)
}

/// Parses `analytic,mc` style method lists.
pub fn parse_methods(spec: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for tag in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = match tag {
            "analytic" => Method::ClosedForm,
            "exact" => Method::ExactQuadrature,
            "mc" => Method::MonteCarlo,
            _ => return Err(Error::Grid(format!("unknown method `{tag}`"))),
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::Grid("no methods selected".into()));
    }
    Ok(out)
}

/// Monte Carlo settings for a point or a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub cycles: u64,
    pub options: McOptions,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            cycles: 1_000_000,
            options: McOptions::default(),
        }
    }
}

/// One method's result at one point; `stderr` holds the per-destination
/// age standard errors of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub report: AoiReport,
    pub stderr: Option<[f64; 2]>,
}

/// Evaluates every requested method at one configuration.
pub fn run_point(sc: &Scenario, methods: &[Method], mc: &McSettings) -> Result<Vec<MethodResult>> {
    methods
        .iter()
        .map(|&m| {
            Ok(match m {
                Method::ClosedForm => MethodResult {
                    report: analytic_report(sc),
                    stderr: None,
                },
                Method::ExactQuadrature => MethodResult {
                    report: exact_report(sc, &Adaptive::default())?,
                    stderr: None,
                },
                Method::MonteCarlo => {
                    let trace = simulate_aoi(sc, mc.cycles, &mc.options)?;
                    MethodResult {
                        report: trace.to_report(sc),
                        stderr: Some([trace.stderr_age_a, trace.stderr_age_b]),
                    }
                }
            })
        })
        .collect()
}

/// A labelled curve: extra overrides applied on top of the base config.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub overrides: Vec<(String, String)>,
}

impl Series {
    pub fn base() -> Self {
        Self {
            label: "base".into(),
            overrides: Vec::new(),
        }
    }

    /// `key=value` → series labelled `key<value>`.
    pub fn single(key: &str, value: &str) -> Self {
        Self {
            label: format!("{key}{value}"),
            overrides: vec![(key.to_string(), value.to_string())],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub methods: Vec<Method>,
    pub mc: McSettings,
    pub series: Vec<Series>,
    /// Keys the axis must leave alone.
    pub pinned: Vec<String>,
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn new(axis: Axis, grid: Vec<f64>, methods: Vec<Method>) -> Self {
        Self {
            axis,
            grid,
            methods,
            mc: McSettings::default(),
            series: vec![Series::base()],
            pinned: Vec::new(),
            workers: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("grid must be nonempty and strictly increasing".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Grid("no methods selected".into()));
        }
        if self.series.is_empty() {
            return Err(Error::Grid("no series".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub series: String,
    pub x: f64,
    pub results: Vec<MethodResult>,
}

#[derive(Debug)]
pub struct PointFailure {
    pub series: String,
    pub x: f64,
    pub error: Error,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub spec: SweepSpec,
    pub base: SystemConfig,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<PointFailure>,
}

impl SweepOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

fn point_config(base: &SystemConfig, spec: &SweepSpec, series: &Series, x: f64) -> Result<Scenario> {
    let mut cfg = base.clone();
    for (k, v) in &series.overrides {
        cfg.set(k, v)?;
    }
    spec.axis.apply(&mut cfg, x, &spec.pinned)?;
    Scenario::new(cfg)
}

/// Evaluates every (series, grid point) pair in parallel. Rows come back
/// in series-major grid order; failed points are listed separately.
pub fn run_sweep(base: &SystemConfig, spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.check()?;
    let jobs: Vec<(&Series, f64)> = spec
        .series
        .iter()
        .flat_map(|s| spec.grid.iter().map(move |&x| (s, x)))
        .collect();
    let mc = McSettings {
        options: McOptions {
            workers: None,
            ..spec.mc.options
        },
        ..spec.mc
    };
    let job = || {
        jobs.par_iter()
            .map(|&(series, x)| {
                point_config(base, spec, series, x)
                    .and_then(|sc| run_point(&sc, &spec.methods, &mc))
                    .map(|results| SweepRow {
                        series: series.label.clone(),
                        x,
                        results,
                    })
                    .map_err(|error| PointFailure {
                        series: series.label.clone(),
                        x,
                        error,
                    })
            })
            .collect::<Vec<_>>()
    };
    let evaluated = match spec.workers {
        None => job(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(job),
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in evaluated {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }
    Ok(SweepOutcome {
        spec: spec.clone(),
        base: base.clone(),
        rows,
        failures,
    })
}

/// Full-precision CSV cell; unbounded ages print as `inf`.
pub fn fmt_full(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Nine significant digits, used by the plot-data files.
pub fn fmt_short(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        fmt_full(v)
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes `# key = value` comment lines.
pub fn write_comment_header<W: Write>(out: &mut W, pairs: &[(&str, String)], cfg: &SystemConfig) -> std::io::Result<()> {
    for (k, v) in pairs {
        writeln!(out, "# {k} = {v}")?;
    }
    for line in cfg.to_text().lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

fn method_columns(m: Method) -> Vec<String> {
    let t = m.tag();
    let mut cols: Vec<String> = ["phi_a", "phi_b", "aaoi_a", "aaoi_b", "weighted_sum"]
        .iter()
        .map(|c| format!("{t}_{c}"))
        .collect();
    if m == Method::MonteCarlo {
        cols.push(format!("{t}_stderr_a"));
        cols.push(format!("{t}_stderr_b"));
    }
    cols
}

/// Serializes a sweep as CSV: `#` comment lines with the axis, methods and
/// resolved base config, then a header row and one row per grid point.
pub fn write_sweep_csv<W: Write>(outcome: &SweepOutcome, mut out: W) -> Result<()> {
    let spec = &outcome.spec;
    let methods: Vec<&str> = spec.methods.iter().map(|m| m.tag()).collect();
    write_comment_header(
        &mut out,
        &[
            ("axis", spec.axis.name().to_string()),
            ("methods", methods.join(",")),
            ("mc_cycles", spec.mc.cycles.to_string()),
            ("seed", spec.mc.options.seed.to_string()),
        ],
        &outcome.base,
    )?;
    let mut w = csv_writer(out);
    let mut header = vec!["series".to_string(), spec.axis.name().to_string()];
    for &m in &spec.methods {
        header.extend(method_columns(m));
    }
    w.write_record(&header)?;
    for row in &outcome.rows {
        let mut rec = vec![row.series.clone(), fmt_full(row.x)];
        for r in &row.results {
            let rep = &r.report;
            rec.extend(
                [rep.phi_a, rep.phi_b, rep.aaoi_a.as_f64(), rep.aaoi_b.as_f64(), rep.weighted_sum.as_f64()]
                    .map(fmt_full),
            );
            if let Some([a, b]) = r.stderr {
                rec.push(fmt_full(a));
                rec.push(fmt_full(b));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_file(outcome: &SweepOutcome, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    write_sweep_csv(outcome, std::io::BufWriter::new(file))
}

/// Parsed sweep CSV: comment metadata, header and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        for line in text.lines() {
            if let Some(body) = line.strip_prefix('#') {
                if let Some((k, v)) = body.split_once('=') {
                    meta.entry(k.trim().to_string()).or_insert_with(|| v.trim().to_string());
                }
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::MalformedCsv(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < 2 || header[0] != "series" {
            return Err(Error::MalformedCsv("expected a header starting with `series,<axis>`".into()));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::MalformedCsv(e.to_string()))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Self { meta, header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn value(&self, row: usize, col: usize) -> Result<f64> {
        self.rows[row][col]
            .trim()
            .parse()
            .map_err(|_| Error::MalformedCsv(format!("row {}: `{}` is not a number", row + 1, self.rows[row][col])))
    }
}

/// Splits a sweep CSV into one `x y` file per (method, series) curve,
/// named `<figure>_<method>_<series>.dat`. `figure` defaults to the tag of
/// the axis recorded in the CSV comments. Unbounded ages become blank lines,
/// which plotting tools draw as gaps.
pub fn emit_plotdata(csv_path: &Path, out_dir: &Path, figure: Option<&str>) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(csv_path)?;
    let table = SweepTable::parse(&text)?;
    if table.rows.is_empty() {
        return Err(Error::MalformedCsv("no data rows".into()));
    }
    let figure = match figure {
        Some(f) => f.to_string(),
        None => match table.meta.get("axis") {
            Some(a) => Axis::parse(a).map(|a| a.figure().to_string()).unwrap_or_else(|_| a.clone()),
            None => "sweep".to_string(),
        },
    };
    let curves: Vec<(String, usize)> = table
        .header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_suffix("_weighted_sum").map(|m| (m.to_string(), i)))
        .collect();
    if curves.is_empty() {
        return Err(Error::MalformedCsv("no `<method>_weighted_sum` column".into()));
    }
    // render everything before touching the file system
    let mut files: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut order: Vec<(String, String)> = Vec::new();
    for r in 0..table.rows.len() {
        if table.rows[r].len() != table.header.len() {
            return Err(Error::MalformedCsv(format!("row {} has {} fields", r + 1, table.rows[r].len())));
        }
        let label = table.rows[r][0].clone();
        let x = table.value(r, 1)?;
        for (method, col) in &curves {
            let y = table.value(r, *col)?;
            let key = (method.clone(), label.clone());
            if !files.contains_key(&key) {
                order.push(key.clone());
            }
            let body = files.entry(key).or_default();
            if y.is_finite() {
                body.push_str(&format!("{} {}\n", fmt_short(x), fmt_short(y)));
            } else {
                body.push('\n');
            }
        }
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for key in order {
        let path = out_dir.join(format!("{figure}_{}_{}.dat", key.0, sanitize(&key.1)));
        fs::write(&path, &files[&key])?;
        written.push(path);
    }
    Ok(written)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Weighted sum of one row recomputed from its own age columns.
pub fn recompute_weighted_sum(age_a: f64, age_b: f64, w_a: f64, w_b: f64) -> f64 {
    let to_age = |v: f64| if v.is_finite() { Age::Finite(v) } else { Age::Unbounded };
    crate::analytic::weighted_sum_aaoi(to_age(age_a), to_age(age_b), w_a, w_b).as_f64()
}
