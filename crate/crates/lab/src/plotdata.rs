//! Per-n aggregation of `summary.csv` into one tidy plotting table.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use otb_core::fmt_f64;

use crate::LabError;

pub const PLOT_COLUMNS: [&str; 7] = [
    "n",
    "mean_gen",
    "se_gen",
    "bound_thm42_mean",
    "bound_thm54_mean",
    "bound_cor56",
    "regret_over_n_mean",
];

const REQUIRED: [&str; 6] = ["n", "gen", "regret_over_n", "thm42_total", "thm54_total", "cor56_total"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub n: usize,
    pub replications: usize,
    pub mean_gen: f64,
    pub se_gen: f64,
    pub bound_thm42_mean: f64,
    /// `None` when the bound was not applicable in any replication.
    pub bound_thm54_mean: Option<f64>,
    pub bound_cor56: Option<f64>,
    pub regret_over_n_mean: f64,
}

#[derive(Default)]
struct Acc {
    gen: Vec<f64>,
    thm42: Vec<f64>,
    thm54: Vec<f64>,
    cor56: Vec<f64>,
    regret_over_n: Vec<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn mean_opt(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| mean(xs))
}

/// Standard error `s/√R` with the `R − 1` sample variance; 0 for one value.
pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// Aggregates summary rows by `n`, in increasing `n`.
pub fn aggregate<R: Read>(summary: R) -> Result<Vec<PlotRow>, LabError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(summary);
    let headers = rdr.headers()?.clone();
    let missing: Vec<&str> =
        REQUIRED.iter().copied().filter(|c| !headers.iter().any(|h| h == *c)).collect();
    if !missing.is_empty() {
        return Err(LabError::PlotData(format!("summary is missing columns: {}", missing.join(", "))));
    }
    let col = |name: &str| headers.iter().position(|h| h == name).expect("checked above");
    let idx: Vec<usize> = REQUIRED.iter().map(|c| col(c)).collect();

    let mut cells: BTreeMap<usize, Acc> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(idx[i]).unwrap_or("");
        let real = |i: usize| -> Result<f64, LabError> {
            field(i).parse().map_err(|_| {
                LabError::PlotData(format!("row {}: bad {} value {:?}", line + 1, REQUIRED[i], field(i)))
            })
        };
        let n: usize = field(0)
            .parse()
            .map_err(|_| LabError::PlotData(format!("row {}: bad n value {:?}", line + 1, field(0))))?;
        let acc = cells.entry(n).or_default();
        acc.gen.push(real(1)?);
        acc.regret_over_n.push(real(2)?);
        acc.thm42.push(real(3)?);
        if !field(4).is_empty() {
            acc.thm54.push(real(4)?);
        }
        if !field(5).is_empty() {
            acc.cor56.push(real(5)?);
        }
    }
    if cells.is_empty() {
        return Err(LabError::PlotData("summary contains no data rows".into()));
    }
    Ok(cells
        .into_iter()
        .map(|(n, a)| PlotRow {
            n,
            replications: a.gen.len(),
            mean_gen: mean(&a.gen),
            se_gen: standard_error(&a.gen),
            bound_thm42_mean: mean(&a.thm42),
            bound_thm54_mean: mean_opt(&a.thm54),
            bound_cor56: mean_opt(&a.cor56),
            regret_over_n_mean: mean(&a.regret_over_n),
        })
        .collect())
}

pub fn write_plot_data<W: Write>(out: W, rows: &[PlotRow]) -> Result<(), LabError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(PLOT_COLUMNS)?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.mean_gen),
            fmt_f64(r.se_gen),
            fmt_f64(r.bound_thm42_mean),
            opt(r.bound_thm54_mean),
            opt(r.bound_cor56),
            fmt_f64(r.regret_over_n_mean),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads `summary`, aggregates it and writes the plot table to `out`.
/// Nothing is written when aggregation fails.
pub fn emit_plot_data(summary: &Path, out: &Path) -> Result<Vec<PlotRow>, LabError> {
    let io = |p: &Path| {
        let path = p.to_path_buf();
        move |source| LabError::Io { path, source }
    };
    let file = std::fs::File::open(summary).map_err(io(summary))?;
    let rows = aggregate(file)?;
    let mut buf = Vec::new();
    write_plot_data(&mut buf, &rows)?;
    std::fs::write(out, buf).map_err(io(out))?;
    Ok(rows)
}
