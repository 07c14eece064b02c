//! The pipeline commands. Each one reads its inputs, writes its outputs
//! under `out_dir` and returns what it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use rbdrift::decay::{build_series, DecaySeries, SeriesKind};
use rbdrift::fidelity::{FidelityReport, Pairing};
use rbdrift::fit::{compare, fit_models, FitResult};
use rbdrift::noise::{fit_gaussian_envelope, ramsey_decay};
use rbdrift::simulator::histogram;
use rbdrift::{simulate, BenchmarkDataset, DecayModel, Direction, ModelKind};
use serde::{Deserialize, Serialize};

use crate::config::{ReportConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::tables::{
    write_rows, ComparisonRow, DecayRow, DecayTable, HistogramRow, RamseyRow, SummaryRow,
};

pub const DATASET_FILE: &str = "dataset.csv";

/// A fit as stored on disk, tied to the dataset it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRecord {
    pub dataset_id: String,
    pub series: SeriesKind,
    pub fit: FitResult,
}

impl FitRecord {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> CliResult<BenchmarkDataset> {
    BenchmarkDataset::load(path).map_err(|e| match e {
        rbdrift::Error::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::from(other),
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn summarize(dataset: &BenchmarkDataset) -> Vec<SummaryRow> {
    dataset
        .lengths()
        .into_iter()
        .map(|m| {
            let up = mean(&dataset.estimates(m, Direction::Up));
            let down = mean(&dataset.estimates(m, Direction::Down));
            SummaryRow {
                m,
                mean_up: up,
                mean_down: down,
                tilde: up - (1.0 - down),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub dataset: PathBuf,
    pub summary: Vec<SummaryRow>,
}

/// Runs the configured simulation and writes `dataset.csv`, its metadata
/// sidecar and `summary.csv`.
pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<SimulateOutput> {
    let plan = cfg.plan()?;
    let ds = simulate(&plan)?;
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join(DATASET_FILE);
    ds.save(&path)?;
    let summary = summarize(&ds);
    write_rows(&cfg.output_dir.join("summary.csv"), &summary)?;
    Ok(SimulateOutput {
        dataset: path,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseySummary {
    pub configured_t2_star_us: f64,
    pub fitted_t2_star_us: f64,
    pub n_samples: usize,
    pub detuning: rbdrift::DetuningModel,
}

/// Ensemble Ramsey fringe and its Gaussian-envelope fit.
pub fn cmd_ramsey(cfg: &RunConfig) -> CliResult<(Vec<RamseyRow>, RamseySummary)> {
    let model = cfg.detuning.resolve(&cfg.qubit)?;
    let pts = ramsey_decay(
        &cfg.qubit,
        &model,
        &cfg.ramsey_delays(),
        cfg.ramsey.n_samples,
        cfg.seed,
    )?;
    let rows: Vec<RamseyRow> = pts
        .iter()
        .map(|&(delay_us, coherence)| RamseyRow { delay_us, coherence })
        .collect();
    // a single zero delay carries no decay information
    let fitted = if pts.iter().any(|&(t, _)| t > 0.0) {
        fit_gaussian_envelope(&pts)?
    } else {
        f64::NAN
    };
    let summary = RamseySummary {
        configured_t2_star_us: cfg.qubit.t2_star_us,
        fitted_t2_star_us: fitted,
        n_samples: cfg.ramsey.n_samples,
        detuning: model,
    };
    ensure_dir(&cfg.output_dir)?;
    write_rows(&cfg.output_dir.join("ramsey.csv"), &rows)?;
    if fitted.is_finite() {
        write_json(&cfg.output_dir.join("ramsey.json"), &summary)?;
    }
    Ok((rows, summary))
}

/// Parses a comma-separated model list such as `residual-spam,two-fidelity`.
pub fn parse_models(list: &str) -> CliResult<Vec<ModelKind>> {
    let kinds = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<ModelKind>().map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    if kinds.is_empty() {
        return Err(CliError::Config("no models given".into()));
    }
    Ok(kinds)
}

pub fn fit_file_name(series: SeriesKind, kind: ModelKind) -> String {
    match series {
        SeriesKind::Tilde => format!("fit_{kind}.json"),
        other => format!("fit_{}_{kind}.json", other.name()),
    }
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub files: Vec<PathBuf>,
    pub records: Vec<FitRecord>,
}

/// Fits each model to the chosen series of a dataset and writes one JSON
/// file per model. Non-converged fits are still written, then reported as
/// an error.
pub fn cmd_fit(
    dataset_path: &Path,
    models: &[ModelKind],
    series_kind: SeriesKind,
    out_dir: &Path,
) -> CliResult<FitOutput> {
    let ds = load_dataset(dataset_path)?;
    let dataset_id = ds.content_id()?;
    let series = build_series(&ds, series_kind)?;
    let results = fit_models(models, &series);
    ensure_dir(out_dir)?;
    let mut out = FitOutput {
        files: Vec::new(),
        records: Vec::new(),
    };
    for (kind, result) in models.iter().zip(results) {
        let record = FitRecord {
            dataset_id: dataset_id.clone(),
            series: series_kind,
            fit: result?,
        };
        let path = out_dir.join(fit_file_name(series_kind, *kind));
        write_json(&path, &record)?;
        out.files.push(path);
        out.records.push(record);
    }
    let failed: Vec<String> = out
        .records
        .iter()
        .filter(|r| !r.fit.converged)
        .map(|r| r.fit.kind().to_string())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::NonConvergence(failed.join(", ")));
    }
    Ok(out)
}

fn check_same_source(records: &[FitRecord]) -> CliResult<()> {
    if let Some(first) = records.first() {
        for r in &records[1..] {
            if r.dataset_id != first.dataset_id || r.series != first.series {
                return Err(CliError::Config(format!(
                    "fits come from different data ({} {} vs {} {})",
                    first.dataset_id,
                    first.series.name(),
                    r.dataset_id,
                    r.series.name()
                )));
            }
        }
    }
    Ok(())
}

/// All pairwise relative likelihoods, `b` relative to `a` for `a` listed
/// before `b`.
pub fn comparison_rows(records: &[FitRecord]) -> CliResult<Vec<ComparisonRow>> {
    check_same_source(records)?;
    let mut rows = Vec::new();
    for (i, a) in records.iter().enumerate() {
        for b in &records[i + 1..] {
            rows.push(ComparisonRow {
                model_a: a.fit.kind().to_string(),
                model_b: b.fit.kind().to_string(),
                aic_a: a.fit.aic,
                aic_b: b.fit.aic,
                relative_likelihood: compare(&a.fit, &b.fit)?,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_compare(fit_paths: &[PathBuf], out_dir: &Path) -> CliResult<Vec<ComparisonRow>> {
    if fit_paths.len() < 2 {
        return Err(CliError::Config("compare needs at least two fit files".into()));
    }
    let records = fit_paths
        .iter()
        .map(|p| FitRecord::load(p))
        .collect::<CliResult<Vec<_>>>()?;
    let rows = comparison_rows(&records)?;
    ensure_dir(out_dir)?;
    write_rows(&out_dir.join("comparison.csv"), &rows)?;
    Ok(rows)
}

/// `(value, standard error)` of the high and, for two-fidelity fits, low
/// polarization.
fn rates(fit: &FitResult) -> ((f64, f64), Option<(f64, f64)>) {
    let p = (fit.model.p(), fit.std_errors[1]);
    let q = fit.model.q().map(|q| (q, fit.std_errors[2]));
    (p, q)
}

pub fn interleaved_report(
    reference: &FitResult,
    interleaved: &FitResult,
    pairing: Pairing,
    n_g: f64,
) -> CliResult<FidelityReport> {
    let (p_ref, q_ref) = rates(reference);
    let (p_int, q_int) = rates(interleaved);
    let need_two = |what: &str| {
        CliError::Config(format!("pairing {pairing} needs a two-fidelity {what} fit"))
    };
    let (int, refr) = match pairing {
        Pairing::PP => (p_int, p_ref),
        Pairing::QQ => (
            q_int.ok_or_else(|| need_two("interleaved"))?,
            q_ref.ok_or_else(|| need_two("reference"))?,
        ),
        Pairing::QP => (q_int.ok_or_else(|| need_two("interleaved"))?, p_ref),
    };
    Ok(FidelityReport::interleaved(pairing, int, refr, n_g)?)
}

pub fn pairing_file_name(pairing: Pairing) -> String {
    format!("fidelity_{}.json", pairing.name().replace('/', "-"))
}

pub fn cmd_interleave(
    reference: &Path,
    interleaved: &Path,
    pairing: Pairing,
    n_g: f64,
    out_dir: &Path,
) -> CliResult<FidelityReport> {
    let r = FitRecord::load(reference)?;
    let i = FitRecord::load(interleaved)?;
    let report = interleaved_report(&r.fit, &i.fit, pairing, n_g)?;
    ensure_dir(out_dir)?;
    write_json(&out_dir.join(pairing_file_name(pairing)), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub model: ModelKind,
    /// `"p"` or `"q"`.
    pub rate: String,
    pub report: FidelityReport,
}

/// Everything `report` writes, as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub dataset_id: String,
    pub series: SeriesKind,
    pub fits: Vec<FitRecord>,
    pub comparisons: Vec<ComparisonRow>,
    pub fidelities: Vec<RateReport>,
    /// File names of the CSV tables written next to the bundle.
    pub tables: Vec<String>,
}

/// A column of the decay table: a fitted model or one two-fidelity branch.
enum Curve {
    Model(DecayModel),
    Branch { a: f64, rate: f64 },
}

impl Curve {
    fn at(&self, m: f64) -> f64 {
        match self {
            Curve::Model(model) => model.evaluate(m),
            Curve::Branch { a, rate } => a * rate.powf(m),
        }
    }
}

fn curve_columns(records: &[FitRecord]) -> Vec<(String, Curve)> {
    let mut cols = Vec::new();
    for r in records {
        let name = r.fit.kind().to_string();
        if let DecayModel::TwoFidelity { a, p, q } = r.fit.model {
            cols.push((name.clone(), Curve::Model(r.fit.model)));
            cols.push((format!("{name}/p"), Curve::Branch { a, rate: p }));
            cols.push((format!("{name}/q"), Curve::Branch { a, rate: q }));
        } else {
            cols.push((name, Curve::Model(r.fit.model)));
        }
    }
    cols
}

pub fn decay_table(series: &DecaySeries, records: &[FitRecord]) -> DecayTable {
    let cols = curve_columns(records);
    DecayTable {
        curves: cols.iter().map(|c| c.0.clone()).collect(),
        rows: series
            .points
            .iter()
            .map(|pt| DecayRow {
                m: pt.m,
                value: pt.value,
                variance: pt.variance,
                ci95: 1.96 * pt.variance.sqrt(),
                curves: cols.iter().map(|c| c.1.at(pt.m as f64)).collect(),
            })
            .collect(),
    }
}

/// Writes the decay table with model overlays, direction histograms at the
/// configured lengths, the comparison table and a JSON bundle.
pub fn cmd_report(
    dataset_path: &Path,
    fit_paths: &[PathBuf],
    report_cfg: &ReportConfig,
    n_g: f64,
    out_dir: &Path,
) -> CliResult<ReportBundle> {
    let ds = load_dataset(dataset_path)?;
    let dataset_id = ds.content_id()?;
    let records = fit_paths
        .iter()
        .map(|p| FitRecord::load(p))
        .collect::<CliResult<Vec<_>>>()?;
    check_same_source(&records)?;
    if let Some(r) = records.iter().find(|r| r.dataset_id != dataset_id) {
        return Err(CliError::Config(format!(
            "{} fit belongs to dataset {}, not {}",
            r.fit.kind(),
            r.dataset_id,
            dataset_id
        )));
    }
    let series_kind = records.first().map_or(SeriesKind::Tilde, |r| r.series);
    let series = build_series(&ds, series_kind)?;

    ensure_dir(out_dir)?;
    let mut tables = Vec::new();

    let decay = decay_table(&series, &records);
    let name = "decay.csv".to_string();
    fs::write(out_dir.join(&name), decay.to_csv_string()?)?;
    tables.push(name);

    for &m in &report_cfg.histogram_lengths {
        let h = histogram(&ds, m, report_cfg.histogram_bins)?;
        let rows: Vec<HistogramRow> = (0..h.up.len())
            .map(|i| HistogramRow {
                bin_low: h.edges[i],
                bin_high: h.edges[i + 1],
                up: h.up[i],
                down: h.down[i],
            })
            .collect();
        let name = format!("histogram_m{m}.csv");
        write_rows(&out_dir.join(&name), &rows)?;
        tables.push(name);
    }

    let comparisons = comparison_rows(&records)?;
    if !comparisons.is_empty() {
        let name = "comparison.csv".to_string();
        write_rows(&out_dir.join(&name), &comparisons)?;
        tables.push(name);
    }

    let mut fidelities = Vec::new();
    for r in &records {
        let (p, q) = rates(&r.fit);
        for (label, rate) in [("p", Some(p)), ("q", q)] {
            if let Some((value, se)) = rate {
                fidelities.push(RateReport {
                    model: r.fit.kind(),
                    rate: label.into(),
                    report: FidelityReport::reference(value, se, n_g),
                });
            }
        }
    }

    let bundle = ReportBundle {
        dataset_id,
        series: series_kind,
        fits: records,
        comparisons,
        fidelities,
        tables,
    };
    write_json(&out_dir.join("report.json"), &bundle)?;
    Ok(bundle)
}
