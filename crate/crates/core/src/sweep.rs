//! Grid sweeps over the toy-model sphere, the tables they write and the
//! figure predicates evaluated on those tables.
//!
//! Output is deterministic: rows are sorted by `(theta, phi, m)` whatever the
//! thread count, floats are written with 17 significant digits, and the only
//! nondeterministic line (a `#` comment with a timestamp) can be switched off.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::length::Length;
use crate::mps;
use crate::mqc;
use crate::orderparam;
use crate::renorm::{self, Depth, RenormResult};
use crate::symmetry::BufferAxis;
use crate::toymodel::{self, ToyModelParams};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 10] = ["theta", "phi", "m", "fidelity", "O_z", "O_x", "zeta_z", "xi", "xi_tilde", "degenerate"];

pub const PROTOCOL_HEADER: [&str; 11] = [
    "theta",
    "phi",
    "m",
    "runs",
    "success_rate",
    "success_rate_sigma",
    "first_attempt_rate",
    "first_attempt_sigma",
    "predicted_success",
    "mean_attempts",
    "mean_sites",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fidelity,
    Orderparam,
    Lengths,
    Protocol,
    Point,
    /// Every column; used for the figure tables.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

/// One grid axis: an inclusive `linspace(min, max, count)`, or explicit
/// `values`, plus any `include` points merged in.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub include: Vec<f64>,
}

impl GridAxis {
    pub fn linspace(min: f64, max: f64, count: usize) -> Self {
        GridAxis { min: Some(min), max: Some(max), count: Some(count), ..Default::default() }
    }

    pub fn single(x: f64) -> Self {
        GridAxis { values: Some(vec![x]), ..Default::default() }
    }

    pub fn points(&self, name: &str) -> Result<Vec<f64>> {
        let mut out = match (&self.values, self.min, self.max, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => {
                if n == 0 {
                    return Err(Error::Config(format!("grid.{name}.count must be at least 1")));
                }
                if n == 1 {
                    vec![lo]
                } else {
                    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "grid.{name} needs either `values` or all of `min`, `max`, `count`"
                )))
            }
        };
        out.extend(&self.include);
        if let Some(bad) = out.iter().find(|x| !x.is_finite()) {
            return Err(Error::Config(format!("grid.{name} contains non-finite value {bad}")));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        if out.is_empty() {
            return Err(Error::Config(format!("grid.{name} is empty")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub theta: GridAxis,
    pub phi: GridAxis,
}

fn default_m_list() -> Vec<i64> {
    vec![0, 2, -1]
}

fn default_theta_gate() -> f64 {
    FRAC_PI_2
}

fn default_axis() -> BufferAxis {
    BufferAxis::Z
}

fn default_runs() -> u64 {
    10_000
}

/// Sweep configuration, read from TOML or JSON.
///
/// ```toml
/// mode = "fidelity"
/// m_list = [0, 2, -1]     # -1 is the m → ∞ limit
/// theta_gate = 1.5707963267948966
/// axis = "z"
///
/// [grid.theta]
/// values = [1.5707963267948966]
///
/// [grid.phi]
/// min = 0.0
/// max = 6.283185307179586
/// count = 41
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: Mode,
    pub grid: Grid,
    #[serde(default = "default_m_list")]
    pub m_list: Vec<i64>,
    #[serde(default = "default_theta_gate")]
    pub theta_gate: f64,
    #[serde(default = "default_axis")]
    pub axis: BufferAxis,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Protocol runs per cell (protocol mode only).
    #[serde(default = "default_runs")]
    pub runs: u64,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{e} (line {}, column {})", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.theta.points("theta")?;
        self.grid.phi.points("phi")?;
        if self.m_list.is_empty() {
            return Err(Error::Config("m_list is empty".into()));
        }
        for &m in &self.m_list {
            Depth::from_signed(m).map_err(|_| Error::Config(format!("m_list entry {m} is not a depth (use -1 for the limit)")))?;
            if m < 0 && self.mode == Mode::Protocol {
                return Err(Error::Config("protocol mode needs finite depths".into()));
            }
        }
        if !(0.0..2.0 * PI).contains(&self.theta_gate) {
            return Err(Error::Config(format!("theta_gate = {} is outside [0, 2π)", self.theta_gate)));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn depths(&self) -> Vec<Depth> {
        self.m_list.iter().map(|&m| Depth::from_signed(m).expect("validated")).collect()
    }
}

/// One `(θ, φ, m)` cell. Columns the mode does not compute are `NaN` /
/// `None` and print as `nan`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub theta: f64,
    pub phi: f64,
    pub m: Depth,
    pub fidelity: f64,
    pub o_z: f64,
    pub o_x: f64,
    pub zeta_z: Option<Length>,
    pub xi: Option<Length>,
    pub xi_tilde: Option<Length>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRow {
    pub theta: f64,
    pub phi: f64,
    pub m: u64,
    pub runs: u64,
    pub success_rate: f64,
    pub success_rate_sigma: f64,
    pub first_attempt_rate: f64,
    pub first_attempt_sigma: f64,
    pub predicted_success: f64,
    pub mean_attempts: f64,
    pub mean_sites: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepTable {
    Grid(Vec<Row>),
    Protocol(Vec<ProtocolRow>),
}

/// What to compute in one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellSpec {
    pub mode: Mode,
    pub axis: BufferAxis,
    pub theta_gate: f64,
    /// Propagate numerical-degeneracy and null-outcome errors instead of
    /// writing `nan`.
    pub strict: bool,
}

fn candidates(f: &crate::FactorizedTensor, axis: BufferAxis, m: Depth) -> Result<Vec<RenormResult>> {
    match m {
        Depth::Finite(m) => Ok(vec![renorm::buffer(f, axis, m as i64)?]),
        Depth::Infinite => renorm::limit_candidates(f, axis),
    }
}

fn soften(r: Result<f64>, strict: bool) -> Result<f64> {
    match r {
        Err(Error::NumericalDegeneracy { .. } | Error::NullOutcome(_)) if !strict => Ok(f64::NAN),
        other => other,
    }
}

/// Supremum of `value` over the candidates (a single one unless the flow
/// stalls).
fn sup(cands: &[RenormResult], value: impl Fn(&RenormResult) -> Result<f64>) -> Result<f64> {
    cands.iter().try_fold(f64::NEG_INFINITY, |acc, r| Ok(acc.max(value(r)?)))
}

fn worst_length(cands: &[RenormResult]) -> Length {
    cands.iter().fold(Length::Finite(0.0), |acc, r| match (acc, r.xi_tilde) {
        (Length::Finite(a), Length::Finite(b)) => Length::Finite(a.max(b)),
        _ => Length::Infinite,
    })
}

pub fn evaluate_cell(theta: f64, phi: f64, m: Depth, spec: &CellSpec) -> Result<Row> {
    let f = toymodel::toy_tensor(ToyModelParams::new(theta, phi))?;
    let uz = f.junk_symmetry(BufferAxis::Z).ok_or_else(|| Error::Factorization("missing z junk symmetry".into()))?;
    let zeta_z = renorm::junk_spectrum(f.junk(BufferAxis::Z.index()), uz)?.zeta;
    let xi = mps::fixed_points(&f.tensor())?.xi;
    let mut row = Row {
        theta,
        phi,
        m,
        fidelity: f64::NAN,
        o_z: f64::NAN,
        o_x: f64::NAN,
        zeta_z: Some(zeta_z),
        xi: Some(xi),
        xi_tilde: None,
        degenerate: false,
    };
    let want_fid = matches!(spec.mode, Mode::Fidelity | Mode::Point | Mode::All);
    let want_order = matches!(spec.mode, Mode::Orderparam | Mode::Point | Mode::All);

    let main = candidates(&f, spec.axis, m)?;
    row.xi_tilde = Some(worst_length(&main));
    row.degenerate = main.iter().any(|r| r.degenerate);
    if want_fid {
        row.fidelity = soften(sup(&main, |r| Ok(mqc::gate_fidelity(r, spec.theta_gate, None, None)?.fidelity)), spec.strict)?;
    }
    if want_order {
        let order = |cands: &[RenormResult]| soften(sup(cands, |r| Ok(orderparam::string_order_renormalized(r)?.limit)), spec.strict);
        for axis in BufferAxis::ALL {
            let value = if axis == spec.axis { order(&main)? } else { order(&candidates(&f, axis, m)?)? };
            match axis {
                BufferAxis::Z => row.o_z = value,
                BufferAxis::X => row.o_x = value,
            }
        }
    }
    Ok(row)
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    run_sweep_with_threads(cfg, None)
}

/// Evaluates every cell of the grid on `threads` workers (default: rayon's
/// global pool).
pub fn run_sweep_with_threads(cfg: &SweepConfig, threads: Option<usize>) -> Result<SweepTable> {
    cfg.validate()?;
    let thetas = cfg.grid.theta.points("theta")?;
    let phis = cfg.grid.phi.points("phi")?;
    let depths = cfg.depths();
    let cells: Vec<(f64, f64, Depth)> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| (t, p)))
        .flat_map(|(t, p)| depths.iter().map(move |&m| (t, p, m)))
        .collect();
    log::info!("sweeping {} cells in {:?} mode", cells.len(), cfg.mode);

    if cfg.mode == Mode::Protocol {
        let rows = with_pool(threads, || {
            cells
                .par_iter()
                .map(|&(t, p, m)| {
                    let Depth::Finite(m) = m else { unreachable!("validated") };
                    let f = toymodel::toy_tensor(ToyModelParams::new(t, p))?;
                    let seed = mqc::splitmix64(cfg.seed ^ t.to_bits() ^ p.to_bits().rotate_left(17) ^ m);
                    let s = mqc::simulate_many(&f, cfg.axis, m, cfg.theta_gate, cfg.runs, seed)?;
                    Ok(ProtocolRow {
                        theta: t,
                        phi: p,
                        m,
                        runs: s.runs,
                        success_rate: s.success_rate,
                        success_rate_sigma: s.success_rate_sigma,
                        first_attempt_rate: s.first_attempt_rate,
                        first_attempt_sigma: s.first_attempt_sigma,
                        predicted_success: s.predicted_success,
                        mean_attempts: s.mean_attempts,
                        mean_sites: s.mean_sites,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let mut rows = rows;
        rows.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.phi.total_cmp(&b.phi)).then(a.m.cmp(&b.m)));
        return Ok(SweepTable::Protocol(rows));
    }

    let spec = CellSpec { mode: cfg.mode, axis: cfg.axis, theta_gate: cfg.theta_gate, strict: cfg.mode == Mode::Point };
    let mut rows = with_pool(threads, || {
        cells.par_iter().map(|&(t, p, m)| evaluate_cell(t, p, m, &spec)).collect::<Result<Vec<_>>>()
    })??;
    rows.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.phi.total_cmp(&b.phi)).then(a.m.cmp(&b.m)));
    Ok(SweepTable::Grid(rows))
}

/// Strict single-point analysis.
#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub theta: f64,
    pub phi: f64,
    pub m: i64,
    pub axis: BufferAxis,
    pub theta_gate: f64,
    pub fidelity: f64,
    #[serde(rename = "O_z")]
    pub o_z: f64,
    #[serde(rename = "O_x")]
    pub o_x: f64,
    pub zeta_z: Length,
    pub xi: Length,
    pub xi_tilde: Length,
    pub degenerate: bool,
    /// `|λ₁|` of the junk part along the buffering axis.
    pub lambda1_modulus: f64,
    /// Postselection probability of the buffer (finite depth only).
    pub p_succ: Option<f64>,
}

pub fn run_point(theta: f64, phi: f64, m: Depth, axis: BufferAxis, theta_gate: f64) -> Result<PointReport> {
    let spec = CellSpec { mode: Mode::Point, axis, theta_gate, strict: true };
    let row = evaluate_cell(theta, phi, m, &spec)?;
    let f = toymodel::toy_tensor(ToyModelParams::new(theta, phi))?;
    let lambda1_modulus = crate::linalg::eigenvalues(f.junk(axis.index()))[0].norm();
    let p_succ = match m {
        Depth::Finite(m) => Some(mqc::postselect_probability(&f, axis, m)?),
        Depth::Infinite => None,
    };
    Ok(PointReport {
        theta,
        phi,
        m: m.to_signed(),
        axis,
        theta_gate,
        fidelity: row.fidelity,
        o_z: row.o_z,
        o_x: row.o_x,
        zeta_z: row.zeta_z.expect("always computed"),
        xi: row.xi.expect("always computed"),
        xi_tilde: row.xi_tilde.expect("always computed"),
        degenerate: row.degenerate,
        lambda1_modulus,
        p_succ,
    })
}

/// 17 significant digits; `nan` and `inf` spelled out.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_length(x: &Option<Length>) -> String {
    x.map_or_else(|| "nan".into(), |l| l.to_string())
}

fn json_float(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x.is_infinite() {
        Value::String(fmt_float(x))
    } else {
        json!(x)
    }
}

fn json_length(x: &Option<Length>) -> Value {
    match x {
        None => Value::Null,
        Some(Length::Infinite) => Value::String("inf".into()),
        Some(Length::Finite(v)) => json!(v),
    }
}

impl Row {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            fmt_float(self.theta),
            fmt_float(self.phi),
            self.m.to_string(),
            fmt_float(self.fidelity),
            fmt_float(self.o_z),
            fmt_float(self.o_x),
            fmt_length(&self.zeta_z),
            fmt_length(&self.xi),
            fmt_length(&self.xi_tilde),
            if self.degenerate { "1" } else { "0" }.into(),
        ]
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("theta".into(), json_float(self.theta));
        map.insert("phi".into(), json_float(self.phi));
        map.insert(
            "m".into(),
            match self.m {
                Depth::Finite(m) => json!(m),
                Depth::Infinite => Value::String("inf".into()),
            },
        );
        map.insert("fidelity".into(), json_float(self.fidelity));
        map.insert("O_z".into(), json_float(self.o_z));
        map.insert("O_x".into(), json_float(self.o_x));
        map.insert("zeta_z".into(), json_length(&self.zeta_z));
        map.insert("xi".into(), json_length(&self.xi));
        map.insert("xi_tilde".into(), json_length(&self.xi_tilde));
        map.insert("degenerate".into(), json!(u8::from(self.degenerate)));
        Value::Object(map)
    }
}

impl ProtocolRow {
    fn csv_record(&self) -> Vec<String> {
        vec![
            fmt_float(self.theta),
            fmt_float(self.phi),
            self.m.to_string(),
            self.runs.to_string(),
            fmt_float(self.success_rate),
            fmt_float(self.success_rate_sigma),
            fmt_float(self.first_attempt_rate),
            fmt_float(self.first_attempt_sigma),
            fmt_float(self.predicted_success),
            fmt_float(self.mean_attempts),
            fmt_float(self.mean_sites),
        ]
    }
}

fn meta_line(cfg: &SweepConfig) -> String {
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    format!("sptmqc {} mode={:?} seed={} generated_unix={now}", env!("CARGO_PKG_VERSION"), cfg.mode, cfg.seed)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes the table. With `meta`, CSV output starts with a `#` comment line
/// and JSON output is wrapped as `{"meta": …, "rows": […]}`.
pub fn write_table<W: Write>(table: &SweepTable, cfg: &SweepConfig, format: Format, meta: bool, mut out: W) -> Result<()> {
    match format {
        Format::Csv => {
            if meta {
                writeln!(out, "# {}", meta_line(cfg))?;
            }
            let mut w = csv::Writer::from_writer(out);
            match table {
                SweepTable::Grid(rows) => {
                    w.write_record(CSV_HEADER).map_err(csv_err)?;
                    for r in rows {
                        w.write_record(r.csv_record()).map_err(csv_err)?;
                    }
                }
                SweepTable::Protocol(rows) => {
                    w.write_record(PROTOCOL_HEADER).map_err(csv_err)?;
                    for r in rows {
                        w.write_record(r.csv_record()).map_err(csv_err)?;
                    }
                }
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<Value> = match table {
                SweepTable::Grid(rows) => rows.iter().map(Row::to_json).collect(),
                SweepTable::Protocol(rows) => rows.iter().map(|r| serde_json::to_value(r).expect("plain struct")).collect(),
            };
            let doc = if meta { json!({ "meta": meta_line(cfg), "rows": rows }) } else { Value::Array(rows) };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Io(e.into()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn table_to_string(table: &SweepTable, cfg: &SweepConfig, format: Format, meta: bool) -> Result<String> {
    let mut buf = Vec::new();
    write_table(table, cfg, format, meta, &mut buf)?;
    Ok(String::from_utf8(buf).expect("writer emits UTF-8"))
}

fn parse_float(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| Error::Config(format!("bad number `{s}`"))),
    }
}

fn parse_length(s: &str) -> Result<Option<Length>> {
    match s {
        "nan" => Ok(None),
        "inf" => Ok(Some(Length::Infinite)),
        _ => Ok(Some(Length::Finite(parse_float(s)?))),
    }
}

/// Reads a grid table written by [`write_table`], skipping `#` lines.
pub fn read_csv(text: &str) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let m = match &rec[2] {
            "inf" => Depth::Infinite,
            s => Depth::Finite(s.parse().map_err(|_| Error::Config(format!("bad depth `{s}`")))?),
        };
        rows.push(Row {
            theta: parse_float(&rec[0])?,
            phi: parse_float(&rec[1])?,
            m,
            fidelity: parse_float(&rec[3])?,
            o_z: parse_float(&rec[4])?,
            o_x: parse_float(&rec[5])?,
            zeta_z: parse_length(&rec[6])?,
            xi: parse_length(&rec[7])?,
            xi_tilde: parse_length(&rec[8])?,
            degenerate: &rec[9] == "1",
        });
    }
    Ok(rows)
}

/// A named sweep reproducing one figure.
#[derive(Debug, Clone)]
pub struct FigureSpec {
    pub name: &'static str,
    pub config: SweepConfig,
}

/// The `θ = π/2` row over `φ` and the `φ = 0` traverse over `θ` (with
/// `θ_c` inserted), each at `m ∈ {0, 2, ∞}` plus `m = 8` on the traverse.
pub fn figure_specs() -> Vec<FigureSpec> {
    let base = |grid: Grid, m_list: Vec<i64>, file: &str| SweepConfig {
        mode: Mode::All,
        grid,
        m_list,
        theta_gate: FRAC_PI_2,
        axis: BufferAxis::Z,
        seed: 0,
        output_path: Some(PathBuf::from(file)),
        format: Format::Csv,
        runs: default_runs(),
    };
    vec![
        FigureSpec {
            name: "fig2_row",
            config: base(
                Grid { theta: GridAxis::single(FRAC_PI_2), phi: GridAxis::linspace(0.0, 2.0 * PI, 41) },
                vec![0, 2, -1],
                "fig2_row.csv",
            ),
        },
        FigureSpec {
            name: "fig3_traverse",
            config: base(
                Grid {
                    theta: GridAxis { include: vec![toymodel::critical_theta()], ..GridAxis::linspace(0.0, PI, 41) },
                    phi: GridAxis::single(0.0),
                },
                vec![0, 2, 8, -1],
                "fig3_traverse.csv",
            ),
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct Predicate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn predicate(name: &str, failures: Vec<String>, checked: usize) -> Predicate {
    Predicate {
        name: name.into(),
        passed: failures.is_empty() && checked > 0,
        detail: if failures.is_empty() {
            format!("{checked} rows checked")
        } else {
            format!("{} of {checked} rows violate: {}", failures.len(), failures.join("; "))
        },
    }
}

/// Checks `cond` on every row selected by `select`.
fn check(name: &str, rows: &[Row], select: impl Fn(&Row) -> bool, cond: impl Fn(&Row) -> bool) -> Predicate {
    let selected: Vec<&Row> = rows.iter().filter(|r| select(r)).collect();
    let failures = selected
        .iter()
        .filter(|r| !cond(r))
        .map(|r| format!("(θ={:.4}, φ={:.4}, m={})", r.theta, r.phi, r.m))
        .collect();
    predicate(name, failures, selected.len())
}

const LIMIT_TOL: f64 = 1e-6;

fn is_inf(x: &Option<Length>) -> bool {
    matches!(x, Some(Length::Infinite))
}

/// Qualitative features of the `θ = π/2` row.
pub fn fig2_predicates(rows: &[Row]) -> Vec<Predicate> {
    let on_locus = |r: &Row| r.phi.cos().abs() < 1e-8;
    let limit = |r: &Row| r.m == Depth::Infinite;
    vec![
        check("zeta_z diverges exactly where cos φ = 0", rows, |_| true, |r| is_inf(&r.zeta_z) == on_locus(r)),
        check("limit fidelity is one off the cos φ = 0 locus", rows, |r| limit(r) && !on_locus(r), |r| (r.fidelity - 1.0).abs() < LIMIT_TOL),
        check("limit fidelity dips on the cos φ = 0 locus", rows, |r| limit(r) && on_locus(r), |r| r.fidelity < 1.0 - 1e-3),
        check("limit O_z is ½ off the locus", rows, |r| limit(r) && !on_locus(r), |r| (r.o_z - 0.5).abs() < LIMIT_TOL),
        check("limit O_z drops below ½ on the locus", rows, |r| limit(r) && on_locus(r), |r| r.o_z < 0.5 - LIMIT_TOL),
        check("xi_tilde stays finite along the row", rows, limit, |r| !is_inf(&r.xi_tilde) && !r.degenerate),
        check("bare fidelity is below one off the locus", rows, |r| r.m == Depth::Finite(0) && !on_locus(r), |r| r.fidelity < 1.0 - 1e-3),
    ]
}

/// Qualitative features of the `φ = 0` traverse.
pub fn fig3_predicates(rows: &[Row]) -> Vec<Predicate> {
    let theta_c = toymodel::critical_theta();
    let pole = |r: &Row| r.theta.sin() < 1e-8;
    let south = |r: &Row| (r.theta - PI).abs() < 1e-12;
    let critical = |r: &Row| (r.theta - theta_c).abs() < 1e-12;
    let special = |r: &Row| pole(r) || critical(r);
    let limit = |r: &Row| r.m == Depth::Infinite;
    vec![
        check("zeta_z diverges exactly at the poles", rows, |_| true, |r| is_inf(&r.zeta_z) == pole(r)),
        check("limit xi_tilde diverges at the poles and θ_c only", rows, limit, |r| is_inf(&r.xi_tilde) == special(r)),
        check("limit O_z is ½ away from the poles and θ_c", rows, |r| limit(r) && !special(r), |r| (r.o_z - 0.5).abs() < LIMIT_TOL),
        check("limit O_z is 1 at θ_c", rows, |r| limit(r) && critical(r), |r| (r.o_z - 1.0).abs() < 1e-8),
        check("limit O_z is not ½ at the South pole", rows, |r| limit(r) && south(r), |r| (r.o_z - 0.5).abs() > 1e-3),
        check("limit fidelity is one away from the poles and θ_c", rows, |r| limit(r) && !special(r), |r| (r.fidelity - 1.0).abs() < LIMIT_TOL),
        check("fidelity stays below one at the South pole", rows, |r| limit(r) && south(r), |r| r.fidelity < 1.0 - 1e-3),
        check("fidelity dips at θ_c", rows, |r| r.m == Depth::Finite(8) && critical(r), |r| r.fidelity < 0.01),
        check("θ_c is flagged degenerate in the limit", rows, |r| limit(r) && critical(r), |r| r.degenerate),
    ]
}

pub fn figure_predicates(name: &str, rows: &[Row]) -> Result<Vec<Predicate>> {
    match name {
        "fig2_row" => Ok(fig2_predicates(rows)),
        "fig3_traverse" => Ok(fig3_predicates(rows)),
        other => Err(Error::Config(format!("unknown figure `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    const FIG2: &str = r#"
mode = "fidelity"
m_list = [0, -1]

[grid.theta]
values = [1.5707963267948966]

[grid.phi]
min = 0.0
max = 1.5707963267948966
count = 3
"#;

    #[test]
    fn toml_config_round_trip() {
        let cfg = SweepConfig::from_toml_str(FIG2).unwrap();
        assert_eq!(cfg.mode, Mode::Fidelity);
        assert_eq!(cfg.grid.phi.points("phi").unwrap().len(), 3);
        let json = serde_json::to_string(&cfg).unwrap();
        let back = SweepConfig::from_json_str(&json).unwrap();
        assert_eq!(back.m_list, cfg.m_list);
    }

    #[test]
    fn config_errors_name_the_field() {
        let err = SweepConfig::from_toml_str(&FIG2.replace("count = 3", "count = 0")).unwrap_err();
        assert!(err.to_string().contains("grid.phi.count"), "{err}");
        let err = SweepConfig::from_toml_str(&FIG2.replace("m_list = [0, -1]", "m_list = [0, -3]")).unwrap_err();
        assert!(err.to_string().contains("-3"), "{err}");
        let err = SweepConfig::from_toml_str(&FIG2.replace("mode", "mood")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = SweepConfig::from_toml_str(&format!("theta_gate = 7.0\n{FIG2}")).unwrap_err();
        assert!(err.to_string().contains("theta_gate"), "{err}");
    }

    #[test]
    fn grid_include_and_dedup() {
        let g = GridAxis { include: vec![0.5, 1.0], ..GridAxis::linspace(0.0, 1.0, 3) };
        assert_eq!(g.points("theta").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(GridAxis::default().points("theta").is_err());
    }

    #[test]
    fn csv_round_trip_and_determinism() {
        let cfg = SweepConfig::from_toml_str(FIG2).unwrap();
        let table = run_sweep(&cfg).unwrap();
        let a = table_to_string(&table, &cfg, Format::Csv, false).unwrap();
        let b = table_to_string(&run_sweep_with_threads(&cfg, Some(1)).unwrap(), &cfg, Format::Csv, false).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("theta,phi,m,fidelity,O_z,O_x,zeta_z,xi,xi_tilde,degenerate\n"));
        assert!(!a.contains("+inf"));
        let rows = read_csv(&a).unwrap();
        let SweepTable::Grid(orig) = &table else { panic!() };
        assert_eq!(rows.len(), orig.len());
        for (x, y) in rows.iter().zip(orig) {
            assert_eq!(x.theta.to_bits(), y.theta.to_bits());
            assert!(x.fidelity.to_bits() == y.fidelity.to_bits() || (x.fidelity.is_nan() && y.fidelity.is_nan()));
            assert_eq!(x.zeta_z, y.zeta_z);
        }
        // O columns are skipped in fidelity mode
        assert!(rows.iter().all(|r| r.o_z.is_nan()));
        let with_meta = table_to_string(&table, &cfg, Format::Csv, true).unwrap();
        assert!(with_meta.starts_with("# sptmqc"));
        assert_eq!(read_csv(&with_meta).unwrap().len(), rows.len());
    }

    #[test]
    fn rows_are_sorted_with_limit_last() {
        let cfg = SweepConfig::from_toml_str(FIG2).unwrap();
        let SweepTable::Grid(rows) = run_sweep(&cfg).unwrap() else { panic!() };
        assert_eq!(rows[0].m, Depth::Finite(0));
        assert_eq!(rows[1].m, Depth::Infinite);
        let locus = rows.iter().find(|r| (r.phi - FRAC_PI_2).abs() < 1e-12 && r.m == Depth::Infinite).unwrap();
        assert_eq!(locus.zeta_z, Some(Length::Infinite));
        assert!(locus.fidelity < 0.999);
    }

    #[test]
    fn json_mirrors_columns() {
        let cfg = SweepConfig::from_toml_str(FIG2).unwrap();
        let table = run_sweep(&cfg).unwrap();
        let text = table_to_string(&table, &cfg, Format::Json, false).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        let first = &v[0];
        for key in CSV_HEADER {
            assert!(first.get(key).is_some(), "{key}");
        }
        assert_eq!(v[1]["m"], "inf");
        assert_eq!(v[0]["O_z"], Value::Null);
    }

    #[test]
    fn point_matches_library() {
        let p = run_point(FRAC_PI_2, FRAC_PI_4, Depth::Finite(8), BufferAxis::Z, FRAC_PI_2).unwrap();
        let f = toymodel::toy_tensor(ToyModelParams::new(FRAC_PI_2, FRAC_PI_4)).unwrap();
        let r = renorm::buffer(&f, BufferAxis::Z, 8).unwrap();
        let fid = mqc::gate_fidelity(&r, FRAC_PI_2, None, None).unwrap().fidelity;
        assert_eq!(p.fidelity.to_bits(), fid.to_bits());
        assert_eq!(p.xi_tilde, r.xi_tilde);
        assert!(p.p_succ.unwrap() > 0.0);
    }

    #[test]
    fn point_mode_is_strict() {
        let err = run_point(toymodel::critical_theta(), 0.0, Depth::Infinite, BufferAxis::Z, FRAC_PI_2).unwrap_err();
        assert!(matches!(err, Error::NullOutcome(_)), "{err}");
    }

    #[test]
    fn protocol_mode_rejects_limit() {
        let text = FIG2.replace("mode = \"fidelity\"", "mode = \"protocol\"");
        assert!(matches!(SweepConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn protocol_sweep() {
        let text = FIG2.replace("mode = \"fidelity\"", "mode = \"protocol\"\nruns = 200").replace("[0, -1]", "[1]");
        let cfg = SweepConfig::from_toml_str(&text).unwrap();
        let SweepTable::Protocol(rows) = run_sweep(&cfg).unwrap() else { panic!() };
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!((r.first_attempt_rate - r.predicted_success).abs() < 5.0 * r.first_attempt_sigma + 1e-3, "{r:?}");
        }
        let csv = table_to_string(&SweepTable::Protocol(rows), &cfg, Format::Csv, false).unwrap();
        assert!(csv.starts_with(&PROTOCOL_HEADER.join(",")));
    }
}
