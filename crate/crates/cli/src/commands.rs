use std::f64::consts::PI;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use lcladder::fixedpoint::{
    basin_verification, check_contraction, quadratic_counterexample, tangent_fixed_points, AnalyticMap, Region,
};
use lcladder::ladder::{resistive_ladder, ResistiveLimit};
use lcladder::ladder::{fixed_points, iterate_p, verify_contraction_law};
use lcladder::lowpass::{a_parameter, limit_impedance, z_plus, LowPassConfig, Regime};
use lcladder::output::{round_to, trace_table, CsvTable, Int, Precision};
use lcladder::propagation::{group_velocity, long_table, phase_curve, plan_gaussian, propagate_packet, transfer_at};
use lcladder::Error;

use crate::{Format, OutputArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
    Io(String),
}

impl CliError {
    /// 1: usage or validation, 2: domain error, 3: no contracting region found.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Domain(Error::InvalidInput(_) | Error::Degenerate(_)) => 1,
            CliError::Domain(Error::SearchFailure { .. }) => 3,
            CliError::Domain(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_real(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("not a number: {s}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not a finite number: {s}"))
    }
}

/// `re,im` or a bare real number.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_real(re)?, parse_real(im)?)),
        None => Ok(Complex64::new(parse_real(s)?, 0.0)),
    }
}

impl OutputArgs {
    fn precision(&self) -> Precision {
        if self.exact {
            Precision::Exact
        } else {
            Precision::Standard
        }
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Rounds every float in `v` to the output precision.
fn round_json(v: Value, precision: Precision) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) => json!(round_to(x, precision)),
            None => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(|x| round_json(x, precision)).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, x)| (k, round_json(x, precision))).collect()),
        other => other,
    }
}

fn json_text(v: Value, precision: Precision) -> String {
    let v = round_json(v, precision);
    serde_json::to_string_pretty(&v).expect("JSON values always serialize")
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types always serialize")
}

fn emit_json(v: Value, out: &OutputArgs) -> CliResult {
    write_text(out.out.as_deref(), &json_text(v, out.precision()))
}

fn emit_csv(table: &CsvTable, out: &OutputArgs) -> CliResult {
    write_text(out.out.as_deref(), &table.to_csv(out.precision()))
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

#[derive(Args, Debug)]
pub struct FixedPointArgs {
    /// t = Z2/Z1 as re,im
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub t: Complex64,
}

pub fn fixed_point(args: &FixedPointArgs, out: &OutputArgs) -> CliResult {
    let fp = fixed_points(args.t)?;
    let report = json!({
        "t": pair(fp.t),
        "p_plus": pair(fp.p_plus),
        "p_minus": pair(fp.p_minus),
        "gamma": pair(fp.gamma),
        "gamma_abs_sq": fp.gamma_abs_sq,
        "branch": { "a": fp.sqrt_1p4t.re, "b": fp.sqrt_1p4t.im },
    });
    match out.format_or(Format::Json) {
        Format::Json => emit_json(report, out),
        Format::Csv => {
            let mut table = CsvTable::new(&[
                "p_plus_re",
                "p_plus_im",
                "p_minus_re",
                "p_minus_im",
                "gamma_re",
                "gamma_im",
                "gamma_abs_sq",
                "a",
                "b",
            ]);
            table.push(vec![
                fp.p_plus.re.into(),
                fp.p_plus.im.into(),
                fp.p_minus.re.into(),
                fp.p_minus.im.into(),
                fp.gamma.re.into(),
                fp.gamma.im.into(),
                fp.gamma_abs_sq.into(),
                fp.sqrt_1p4t.re.into(),
                fp.sqrt_1p4t.im.into(),
            ]);
            emit_csv(&table, out)
        }
    }
}

#[derive(Args, Debug)]
pub struct IterateArgs {
    /// t = Z2/Z1 as re,im
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub t: Complex64,
    /// Starting value p_1 (default 1 + t, a single section closed by Z2)
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub p1: Option<Complex64>,
    /// Number of iterates
    #[arg(long)]
    pub n: usize,
}

pub fn iterate(args: &IterateArgs, out: &OutputArgs) -> CliResult {
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let p1 = args.p1.unwrap_or(1.0 + args.t);
    let trace = iterate_p(args.t, p1, args.n)?;
    match out.format_or(Format::Csv) {
        Format::Csv => emit_csv(&trace_table(&trace), out),
        Format::Json => {
            let fp = fixed_points(args.t)?;
            let law = verify_contraction_law(&trace, &fp);
            emit_json(json!({ "trace": to_value(&trace), "contraction_law": to_value(&law) }), out)
        }
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Series inductance L (H)
    #[arg(long = "L", value_parser = parse_real)]
    pub inductance: f64,
    /// Shunt capacitance C (F)
    #[arg(long = "C", value_parser = parse_real)]
    pub capacitance: f64,
    /// Series loss r (ohm)
    #[arg(long, default_value_t = 0.0, value_parser = parse_real)]
    pub r: f64,
    /// Shunt loss r' (ohm)
    #[arg(long = "r-prime", default_value_t = 0.0, value_parser = parse_real)]
    pub r_prime: f64,
    #[arg(long = "omega-min", value_parser = parse_real)]
    pub omega_min: f64,
    #[arg(long = "omega-max", value_parser = parse_real)]
    pub omega_max: f64,
    /// Number of grid points, at least 2
    #[arg(long)]
    pub steps: usize,
    /// Evaluate the lossless limit (r and r' are ignored)
    #[arg(long)]
    pub limit: bool,
}

struct SweepRow {
    omega: f64,
    omega_c: f64,
    regime: Regime,
    a: f64,
    z: Complex64,
    zlim: Complex64,
    gamma_abs: f64,
    delta: f64,
    group_delay: Option<f64>,
}

fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    if args.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    if !(args.omega_min > 0.0 && args.omega_max > args.omega_min) {
        return Err(usage("need 0 < --omega-min < --omega-max"));
    }
    let (r, r_prime) = if args.limit { (0.0, 0.0) } else { (args.r, args.r_prime) };
    let filter = LowPassConfig::new(args.inductance, args.capacitance, r, r_prime, args.omega_min)?;
    let omega_c = filter.omega_c();
    if filter.is_lossless() && !args.limit && args.omega_min <= omega_c * (1.0 + lcladder::lowpass::CUTOFF_TOLERANCE) {
        return Err(usage(format!(
            "lossless sweep reaches the passband (omega_c = {omega_c}); pass --limit or positive --r/--r-prime"
        )));
    }
    let span = args.omega_max - args.omega_min;
    let last = (args.steps - 1) as f64;
    let grid: Vec<f64> = (0..args.steps)
        .map(|k| if k + 1 == args.steps { args.omega_max } else { args.omega_min + span * k as f64 / last })
        .collect();

    let passband: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&w| Regime::classify(w, omega_c) == Regime::BelowCutoff)
        .collect();
    let curve = if passband.is_empty() { Vec::new() } else { phase_curve(&filter, &passband)? };

    let mut rows = Vec::with_capacity(grid.len());
    for (k, &omega) in grid.iter().enumerate() {
        let cfg = filter.with_omega(omega)?;
        let regime = Regime::classify(omega, omega_c);
        let zlim = limit_impedance(&cfg);
        let z = if args.limit { zlim } else { z_plus(&cfg)? };
        let minus_gamma = transfer_at(&filter, omega)?;
        let (delta, group_delay) = match curve.get(k) {
            Some(pt) if regime == Regime::BelowCutoff => (pt.delta, Some(pt.group_delay)),
            _ => (minus_gamma.arg().rem_euclid(2.0 * PI), None),
        };
        rows.push(SweepRow {
            omega,
            omega_c,
            regime,
            a: a_parameter(omega, omega_c),
            z,
            zlim,
            gamma_abs: minus_gamma.norm(),
            delta,
            group_delay,
        });
    }
    Ok(rows)
}

pub fn sweep(args: &SweepArgs, out: &OutputArgs) -> CliResult {
    let rows = sweep_rows(args)?;
    match out.format_or(Format::Csv) {
        Format::Csv => {
            let mut table = CsvTable::new(&[
                "omega",
                "regime",
                "A",
                "z_re",
                "z_im",
                "zlim_re",
                "zlim_im",
                "gamma_abs",
                "delta",
                "group_delay",
            ]);
            for row in &rows {
                table.push(vec![
                    row.omega.into(),
                    row.regime.as_str().into(),
                    row.a.into(),
                    row.z.re.into(),
                    row.z.im.into(),
                    row.zlim.re.into(),
                    row.zlim.im.into(),
                    row.gamma_abs.into(),
                    row.delta.into(),
                    row.group_delay.into(),
                ]);
            }
            emit_csv(&table, out)
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|row| {
                    json!({
                        "regime": row.regime.as_str(),
                        "A": row.a,
                        "omega": row.omega,
                        "omega_c": row.omega_c,
                        "z_plus": pair(row.z),
                        "z_plus_limit": pair(row.zlim),
                        "gamma_abs": row.gamma_abs,
                        "delta": row.delta,
                        "group_delay": row.group_delay,
                    })
                })
                .collect();
            emit_json(Value::Array(items), out)
        }
    }
}

#[derive(Args, Debug)]
pub struct PacketArgs {
    #[arg(long = "L", value_parser = parse_real)]
    pub inductance: f64,
    #[arg(long = "C", value_parser = parse_real)]
    pub capacitance: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_real)]
    pub r: f64,
    #[arg(long = "r-prime", default_value_t = 0.0, value_parser = parse_real)]
    pub r_prime: f64,
    /// Carrier frequency (rad/s), inside the passband
    #[arg(long, value_parser = parse_real)]
    pub omega0: f64,
    /// Gaussian envelope width (s)
    #[arg(long, value_parser = parse_real)]
    pub sigma: f64,
    /// Section indices, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub sections: Vec<usize>,
    /// One CSV per section (<out stem>_section<n>.csv), needs --out
    #[arg(long)]
    pub split: bool,
    /// Where to write the summary JSON (stdout when --out is given)
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn section_path(out: &Path, section: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_section{section}.csv"))
}

pub fn packet(args: &PacketArgs, out: &OutputArgs) -> CliResult {
    if args.split && out.out.is_none() {
        return Err(usage("--split needs --out"));
    }
    let filter = LowPassConfig::new(args.inductance, args.capacitance, args.r, args.r_prime, args.omega0)?;
    let plan = plan_gaussian(&filter, args.omega0, args.sigma, &args.sections)?;
    let traces = propagate_packet(&plan.config, &filter)?;
    let velocity = group_velocity(&filter, args.omega0)?;
    let peaks: serde_json::Map<String, Value> =
        traces.iter().map(|tr| (tr.section.to_string(), json!(tr.peak_time))).collect();
    let summary = json_text(
        json!({
            "t_c": plan.t_c,
            "seconds_per_section": velocity.seconds_per_section,
            "peak_times": peaks,
        }),
        out.precision(),
    );

    if out.format_or(Format::Csv) == Format::Json {
        return write_text(out.out.as_deref(), &summary);
    }
    let precision = out.precision();
    match (&out.out, args.split) {
        (Some(path), true) => {
            for tr in &traces {
                write_text(Some(&section_path(path, tr.section)), &tr.table().to_csv(precision))?;
            }
        }
        (path, _) => write_text(path.as_deref(), &long_table(&traces).to_csv(precision))?,
    }
    match (&args.summary, &out.out) {
        (Some(p), _) => write_text(Some(p), &summary),
        (None, Some(_)) => write_text(None, &summary),
        (None, None) => {
            eprintln!("{summary}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Quadratic,
    Tangent,
    LadderBasin,
}

#[derive(Args, Debug)]
pub struct ContractionArgs {
    #[arg(long, value_enum)]
    pub demo: Demo,
    /// Iterates of z -> z² + 1/4 (quadratic)
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Starting point in [0, 1/2] (quadratic)
    #[arg(long, default_value_t = 0.0, value_parser = parse_real)]
    pub start: f64,
    /// Pairs sampled for the Lipschitz scan (quadratic)
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// RNG seed for the Lipschitz scan (quadratic)
    #[arg(long, default_value_t = 8)]
    pub seed: u64,
    /// Number of real fixed points of tan (tangent)
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    #[arg(long = "L", value_parser = parse_real)]
    pub inductance: Option<f64>,
    #[arg(long = "C", value_parser = parse_real)]
    pub capacitance: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub omega: Option<f64>,
    /// Series loss r (ohm), must be positive (ladder-basin)
    #[arg(long, value_parser = parse_real)]
    pub r: Option<f64>,
    /// Shunt loss r' (ohm), defaults to r (ladder-basin)
    #[arg(long = "r-prime", value_parser = parse_real)]
    pub r_prime: Option<f64>,
}

pub fn contraction(args: &ContractionArgs, out: &OutputArgs) -> CliResult {
    match args.demo {
        Demo::Quadratic => {
            let report = quadratic_counterexample(args.start, args.n)?;
            let scan = check_contraction(
                &AnalyticMap::Quadratic,
                &Region::Interval { lo: 0.0, hi: 0.5 },
                args.samples,
                args.seed,
            )?;
            match out.format_or(Format::Json) {
                Format::Json => emit_json(
                    json!({ "demo": "quadratic", "report": to_value(&report), "lipschitz_scan": to_value(&scan) }),
                    out,
                ),
                Format::Csv => {
                    let mut table = CsvTable::new(&["n", "p_re", "p_im", "c_re", "c_im", "abs_err"]);
                    for (k, z) in report.trace.values.iter().enumerate() {
                        table.push(vec![
                            Int(k as i64 + 1).into(),
                            z.re.into(),
                            z.im.into(),
                            None.into(),
                            None.into(),
                            (z - 0.5).norm().into(),
                        ]);
                    }
                    emit_csv(&table, out)
                }
            }
        }
        Demo::Tangent => {
            let points = tangent_fixed_points(args.count)?;
            match out.format_or(Format::Json) {
                Format::Json => emit_json(json!({ "demo": "tangent", "fixed_points": to_value(&points) }), out),
                Format::Csv => {
                    let mut table = CsvTable::new(&["k", "zeta", "derivative_magnitude"]);
                    for (k, p) in points.iter().enumerate() {
                        table.push(vec![Int(k as i64 + 1).into(), p.zeta.into(), p.derivative_magnitude.into()]);
                    }
                    emit_csv(&table, out)
                }
            }
        }
        Demo::LadderBasin => {
            let (Some(l), Some(c), Some(omega), Some(r)) = (args.inductance, args.capacitance, args.omega, args.r)
            else {
                return Err(usage("ladder-basin needs --L, --C, --omega and --r"));
            };
            let filter = LowPassConfig::new(l, c, r, args.r_prime.unwrap_or(r), omega)?;
            let report = basin_verification(&filter)?;
            match out.format_or(Format::Json) {
                Format::Json => {
                    let mut v = to_value(&report);
                    v["demo"] = json!("ladder-basin");
                    emit_json(v, out)
                }
                Format::Csv => {
                    let mut table =
                        CsvTable::new(&["epsilon", "q_on_disc", "steps_to_enter", "gamma_abs_sq", "z_re", "z_im"]);
                    table.push(vec![
                        report.epsilon.into(),
                        report.q_on_disc.into(),
                        Int(report.steps_to_enter as i64).into(),
                        report.gamma_abs_sq.into(),
                        report.z_plus.re.into(),
                        report.z_plus.im.into(),
                    ]);
                    emit_csv(&table, out)
                }
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct ResistiveArgs {
    /// First resistance R (ohm)
    #[arg(long = "R", value_parser = parse_real, allow_hyphen_values = true)]
    pub resistance: f64,
    /// Ratio p between successive resistances
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub p: f64,
    /// Number of partial sums
    #[arg(long)]
    pub n: usize,
    /// Override of the first partial sum Z_1
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub z1: Option<f64>,
}

pub fn resistive(args: &ResistiveArgs, out: &OutputArgs) -> CliResult {
    let ladder = resistive_ladder(args.resistance, args.p, args.n, args.z1)?;
    match out.format_or(Format::Csv) {
        Format::Json => emit_json(to_value(&ladder), out),
        Format::Csv => {
            let mut table = CsvTable::new(&["n", "z", "closed_form"]);
            for (k, z) in ladder.partial_sums.iter().enumerate() {
                table.push(vec![Int(k as i64 + 1).into(), (*z).into(), ladder.closed_form(k + 1).into()]);
            }
            if let ResistiveLimit::Divergent { .. } = ladder.limit {
                eprintln!("note: |p| >= 1, the partial sums have no limit");
            }
            emit_csv(&table, out)
        }
    }
}
