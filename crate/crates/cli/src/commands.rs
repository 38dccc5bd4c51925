//! Command dispatch: each command returns a JSON report plus optional CSV tables.

use std::fmt;

use serde_json::{json, Value};

use latspec::floquet::{self, band_sample, build_symbol, common_period, periodic_spectrum_from};
use latspec::limitops::{
    enumerate_limit_ops, ess_spectrum_general, ess_spectrum_waveguide, member_spectrum, verify_member, DiscreteSearch,
    LimitOptions, DEFAULT_J_MAX, DEFAULT_LIMIT_TOL, DEFAULT_WINDOW_RADIUS,
};
use latspec::oracle::{coverage, eigenvalues, truncate, EigMode, TruncationConfig};
use latspec::symbol::{cloud_rows, range_cloud, spectrum_constant, ConstantOperatorView, DEFAULT_REFINE_TOL};
use latspec::threebody::{ess_spectrum_three_body, SampledPotential, ThreeBodyOracle, ThreeBodyProblem};
use latspec::wiener::{OperatorDescriptor, Profile};
use latspec::{Error, LatticeOperator, TorusGrid, Window};

use crate::config::{Command, Format, GridSpec, JobConfig, PotentialSection};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub radii: Vec<i64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub delta: Option<f64>,
    pub mode: Option<String>,
}

pub struct CsvTable {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub struct Report {
    pub json: Value,
    pub csv: Vec<CsvTable>,
    pub summary: String,
}

struct Settings {
    grid: Option<GridSpec>,
    refine_tol: f64,
    radii: Option<Vec<i64>>,
    mode: EigMode,
    delta: Option<f64>,
    seed: u64,
    residual_tol: Option<f64>,
    format: Format,
}

fn parse_mode(s: &str) -> Result<EigMode, CliError> {
    if s == "all" {
        return Ok(EigMode::All);
    }
    let k = s
        .strip_prefix("extremal:")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k > 0)
        .ok_or_else(|| invalid(format!("mode must be 'all' or 'extremal:k', got '{s}'")))?;
    Ok(EigMode::Extremal(k))
}

impl Settings {
    fn resolve(cfg: &JobConfig, o: &Overrides) -> Result<Self, CliError> {
        let refine_tol = o.tol.or(cfg.tol).unwrap_or(DEFAULT_REFINE_TOL);
        if !(refine_tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {refine_tol}")));
        }
        let radii = if o.radii.is_empty() { cfg.truncation.radii.clone() } else { Some(o.radii.clone()) };
        if let Some(r) = &radii {
            if r.is_empty() || r.iter().any(|&l| l < 1) {
                return Err(invalid("truncation radii must be a nonempty list of positive integers"));
            }
        }
        let mode = match o.mode.as_deref().or(cfg.truncation.mode.as_deref()) {
            Some(s) => parse_mode(s)?,
            None => EigMode::All,
        };
        let delta = o.delta.or(cfg.truncation.delta);
        if let Some(d) = delta {
            if !(d > 0.0) {
                return Err(invalid(format!("delta must be positive, got {d}")));
            }
        }
        let grid = match o.grid {
            Some(n) => Some(GridSpec::Uniform(n)),
            None => cfg.grid.clone(),
        };
        Ok(Settings {
            grid,
            refine_tol,
            radii,
            mode,
            delta,
            seed: o.seed.or(cfg.truncation.seed).unwrap_or(0x5eed),
            residual_tol: cfg.truncation.residual_tol,
            format: o.format.or(cfg.output.format).unwrap_or_default(),
        })
    }

    fn grid(&self, dim: usize, fallback: TorusGrid) -> Result<TorusGrid, CliError> {
        Ok(match &self.grid {
            None => fallback,
            Some(GridSpec::Uniform(n)) => TorusGrid::uniform(dim, *n)?,
            Some(GridSpec::PerAxis(v)) => {
                if v.len() != dim {
                    return Err(invalid(format!("grid has {} axes, operator has {dim}", v.len())));
                }
                TorusGrid::new(v.clone())?
            }
        })
    }

    fn truncations(&self, default_radii: &[i64]) -> Vec<TruncationConfig> {
        let radii = self.radii.as_deref().unwrap_or(default_radii);
        let mut base = TruncationConfig::new(1).with_seed(self.seed);
        base.mode = self.mode;
        if let Some(t) = self.residual_tol {
            base.residual_tol = t;
        }
        base.sequence(radii)
    }

    fn limit_options(&self, cfg: &JobConfig, dim: usize) -> Result<LimitOptions, CliError> {
        let mut opts = LimitOptions { refine_tol: self.refine_tol, ..Default::default() };
        if self.grid.is_some() {
            opts.grid = Some(self.grid(dim, TorusGrid::default_for(dim))?);
        }
        if let Some(r) = &self.radii {
            opts.search.radii = r.clone();
        }
        if let Some(d) = self.delta {
            opts.search.delta = d;
        }
        opts.search.seed = self.seed;
        if let Some(n) = cfg.limits.so_samples {
            if n < 2 {
                return Err(invalid("so_samples must be >= 2"));
            }
            opts.so_samples = n;
        }
        Ok(opts)
    }
}

fn operator(cfg: &JobConfig) -> Result<(OperatorDescriptor, LatticeOperator), CliError> {
    let d = cfg.operator.clone().ok_or_else(|| invalid("this command needs an 'operator' section"))?;
    let op = d.build()?;
    Ok((d, op))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn run(cfg: &JobConfig, o: &Overrides) -> Result<Report, CliError> {
    let s = Settings::resolve(cfg, o)?;
    match cfg.command {
        Command::Spectrum => spectrum(cfg, &s),
        Command::Bands => bands(cfg, &s),
        Command::Limitops => limitops(cfg, &s),
        Command::Oracle => oracle(cfg, &s),
        Command::Verify => verify(cfg, &s),
        Command::Waveguide => waveguide(cfg, &s),
        Command::Threebody => threebody(cfg, &s),
    }
}

fn spectrum(cfg: &JobConfig, s: &Settings) -> Result<Report, CliError> {
    let (desc, op) = operator(cfg)?;
    let mut csv = Vec::new();
    if op.is_constant() {
        let view = ConstantOperatorView::new(&op)?;
        let grid = s.grid(op.dim(), TorusGrid::default_for(op.dim()))?;
        let cloud = range_cloud(&view, &grid)?;
        let mut header: Vec<String> = (1..=op.dim()).map(|k| format!("theta_{k}")).collect();
        header.extend(["re".to_string(), "im".to_string()]);
        let table = CsvTable { file: "range.csv".into(), header, rows: cloud_rows(&cloud) };
        match spectrum_constant(&view, &grid, s.refine_tol) {
            Ok(sp) => {
                if s.format == Format::Csv {
                    csv.push(table);
                }
                let summary = format!("spectrum: {:?}", sp.to_pairs());
                let json = json!({"command": "spectrum", "operator": to_value(&desc), "spectrum": to_value(&sp), "members": [], "notes": []});
                return Ok(Report { json, csv, summary });
            }
            Err(Error::UseRangeCloud(im)) => {
                let json = json!({
                    "command": "spectrum",
                    "operator": to_value(&desc),
                    "spectrum": Value::Null,
                    "notes": [format!("symbol is not real (max |Im| = {im:e}); samples written to range.csv")],
                });
                return Ok(Report { json, csv: vec![table], summary: "spectrum: symbol range is not real".into() });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let g = ess_spectrum_general(&op, &s.limit_options(cfg, op.dim())?)?;
    let summary = format!("spectrum: {:?}", g.spectrum.to_pairs());
    let json = json!({
        "command": "spectrum",
        "operator": to_value(&desc),
        "spectrum": to_value(&g.spectrum),
        "members": to_value(&g.members),
        "notes": g.notes,
    });
    Ok(Report { json, csv, summary })
}

fn bands(cfg: &JobConfig, s: &Settings) -> Result<Report, CliError> {
    let (desc, op) = operator(cfg)?;
    let period = common_period(&op).ok_or_else(|| invalid("bands need a periodic operator"))?;
    let p = build_symbol(&op, &period)?;
    let grid = s.grid(op.dim(), floquet::default_grid(op.dim()))?;
    let sample = band_sample(&p, &grid)?;
    let sp = periodic_spectrum_from(&p, &sample, s.refine_tol)?;
    let ranges: Vec<(f64, f64)> = (0..sample.band_count()).map(|k| sample.band_range(k)).collect();
    let mut csv = Vec::new();
    if s.format == Format::Csv {
        let mut header: Vec<String> = (1..=op.dim()).map(|k| format!("theta_{k}")).collect();
        header.extend((1..=sample.band_count()).map(|k| format!("band_{k}")));
        csv.push(CsvTable { file: "bands.csv".into(), header, rows: sample.rows() });
    }
    let summary = format!("bands: {:?}", sp.to_pairs());
    let json = json!({
        "command": "bands",
        "operator": to_value(&desc),
        "period": period,
        "spectrum": to_value(&sp),
        "sampled_bands": ranges,
    });
    Ok(Report { json, csv, summary })
}

fn limitops(cfg: &JobConfig, s: &Settings) -> Result<Report, CliError> {
    let (desc, op) = operator(cfg)?;
    let opts = s.limit_options(cfg, op.dim())?;
    let j_max = cfg.limits.j_max.unwrap_or(DEFAULT_J_MAX);
    let tol = cfg.limits.tol.unwrap_or(DEFAULT_LIMIT_TOL);
    let radius = cfg.limits.radius.unwrap_or(DEFAULT_WINDOW_RADIUS);
    if radius < 0 {
        return Err(invalid("limit window radius must be >= 0"));
    }
    let general = ess_spectrum_general(&op, &opts)?;
    let family = enumerate_limit_ops(&op)?;
    let window = Window::cube(op.dim(), radius);
    let mut members = Vec::new();
    let mut all_ok = true;
    for m in &family.members {
        let (sp, discrete) = member_spectrum(&m.operator, &opts)?;
        let check = match &m.sequence {
            Some(_) => {
                let c = verify_member(&op, m, &window, j_max, tol)?;
                all_ok &= c.ok;
                let osc = c.terms.iter().map(|t| t.report.oscillation).fold(0.0, f64::max);
                json!({"ok": c.ok, "max_oscillation": osc})
            }
            None => Value::Null,
        };
        members.push(json!({
            "label": m.label,
            "operator": OperatorDescriptor::describe(&m.operator).map(|d| to_value(&d)).unwrap_or(Value::Null),
            "sequence": m.sequence.as_ref().map(|g| g.description.clone()),
            "spectrum": to_value(&sp),
            "discrete": to_value(&discrete),
            "partial_limit_check": check,
        }));
    }
    let summary = format!(
        "limitops: {} members, checks {}, spectrum {:?}",
        members.len(),
        if all_ok { "passed" } else { "FAILED" },
        general.spectrum.to_pairs()
    );
    let json = json!({
        "command": "limitops",
        "operator": to_value(&desc),
        "members": members,
        "connected_envelopes": to_value(&family.connected),
        "notes": family.notes,
        "spectrum": to_value(&general.spectrum),
        "window_radius": radius,
        "j_max": j_max,
        "tol": tol,
    });
    Ok(Report { json, csv: vec![], summary })
}

fn oracle(cfg: &JobConfig, s: &Settings) -> Result<Report, CliError> {
    let (desc, op) = operator(cfg)?;
    let mut per = Vec::new();
    let mut rows = Vec::new();
    for c in s.truncations(&[50, 100, 200]) {
        let m = truncate(&op, &c)?;
        let vals = eigenvalues(&m, &c)?;
        rows.extend(vals.iter().enumerate().map(|(i, &v)| vec![c.l as f64, i as f64, v]));
        per.push(json!({"L": c.l, "size": m.size(), "eigenvalues": vals}));
    }
    let csv = if s.format == Format::Csv {
        vec![CsvTable { file: "eigenvalues.csv".into(), header: vec!["L".into(), "index".into(), "value".into()], rows }]
    } else {
        vec![]
    };
    let json = json!({"command": "oracle", "operator": to_value(&desc), "truncations": per});
    Ok(Report { json, csv, summary: format!("oracle: {} truncations", s.truncations(&[50, 100, 200]).len()) })
}

fn verify(cfg: &JobConfig, s: &Settings) -> Result<Report, CliError> {
    let (desc, op) = operator(cfg)?;
    let opts = s.limit_options(cfg, op.dim())?;
    let predicted = ess_spectrum_general(&op, &LimitOptions { search: DiscreteSearch::default(), ..opts })?;
    let delta = s.delta.unwrap_or(0.01);
    let report = coverage(&predicted.spectrum, &op, &s.truncations(&[500, 1000, 2000]), delta)?;
    let stable: Vec<f64> = report.stable_outliers().map(|o| o.value).collect();
    let summary = format!(
        "verify: coverage_fraction={:.6} stable_outliers={} predicted={:?}",
        report.coverage_fraction,
        stable.len(),
        predicted.spectrum.to_pairs()
    );
    let json = json!({
        "command": "verify",
        "operator": to_value(&desc),
        "predicted": to_value(&predicted.spectrum),
        "coverage_fraction": report.coverage_fraction,
        "stable_outliers": stable,
        "mismatch": report.flags_mismatch(),
        "coverage": to_value(&report),
    });
    Ok(Report { json, csv: vec![], summary })
}

fn waveguide(cfg: &JobConfig, s: &Settings) -> Result<Report, CliError> {
    let w = cfg.waveguide.as_ref().ok_or_else(|| invalid("this command needs a 'waveguide' section"))?;
    let axis = w.dim.saturating_sub(1);
    let profiles: Vec<Profile> = w
        .profiles
        .iter()
        .map(|p| Profile { axis, start: p.start, middle: p.middle.clone(), minus: p.minus, plus: p.plus })
        .collect();
    let mut search = DiscreteSearch { seed: s.seed, ..Default::default() };
    if let Some(r) = &s.radii {
        search.radii = r.clone();
    }
    if let Some(d) = s.delta {
        search.delta = d;
    }
    let out = ess_spectrum_waveguide(w.dim, (w.minus[0], w.minus[1]), (w.plus[0], w.plus[1]), &profiles, &search)?;
    let summary = format!("waveguide: {:?}", out.spectrum.to_pairs());
    let json = json!({"command": "waveguide", "spectrum": to_value(&out.spectrum), "profiles": to_value(&out.profiles)});
    Ok(Report { json, csv: vec![], summary })
}

fn potential(p: &Option<PotentialSection>) -> Result<SampledPotential, CliError> {
    Ok(match p {
        None => SampledPotential::zero(),
        Some(p) => SampledPotential::new(p.radius, p.table.clone(), p.decay_radius.unwrap_or(p.radius))?,
    })
}

fn threebody(cfg: &JobConfig, s: &Settings) -> Result<Report, CliError> {
    let t = cfg.threebody.as_ref().ok_or_else(|| invalid("this command needs a 'threebody' section"))?;
    let problem = ThreeBodyProblem::new(
        t.m1,
        t.m2,
        potential(&t.w1)?,
        potential(&t.w2)?,
        potential(&t.w12)?,
        t.decay_tol.unwrap_or(1e-12),
    )?;
    let mut oracle = ThreeBodyOracle { seed: s.seed, ..Default::default() };
    if let Some(r) = &s.radii {
        oracle.radii = r.clone();
    }
    if let Some(r) = &t.interaction_radii {
        oracle.interaction_radii = r.clone();
    }
    if let Some(k) = t.count {
        oracle.count = k;
    }
    let out = ess_spectrum_three_body(&problem, &oracle)?;
    let summary = format!("threebody: {:?} bounds {:?}", out.spectrum.to_pairs(), out.bounds);
    let json = json!({
        "command": "threebody",
        "m": problem.m(),
        "spectrum": to_value(&out.spectrum),
        "h1": to_value(&out.h1),
        "h2": to_value(&out.h2),
        "h12": to_value(&out.h12),
        "bounds": [out.bounds.0, out.bounds.1],
    });
    Ok(Report { json, csv: vec![], summary })
}
