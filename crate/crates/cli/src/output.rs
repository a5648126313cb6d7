//! Result tables, the run manifest and the plots derived from them.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use streetperc::estimators::{logistic, CrossingCurvePoint};
use streetperc::{io, TessellationKind};

use crate::config::{Experiment, ExperimentConfig};
use crate::plot::{Chart, Series, Style};

pub const MANIFEST: &str = "manifest.toml";
pub const FITS: &str = "fits.csv";
pub const THETA: &str = "theta.csv";
pub const STRETCH: &str = "stretch.csv";
pub const TABLE1: &str = "table1.csv";
pub const TABLE1_DETAIL: &str = "table1_detail.csv";

/// One fitted crossing curve; `curve` names the CSV holding its points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub curve: String,
    pub kind: TessellationKind,
    pub gamma: f64,
    pub r_gamma: f64,
    pub window: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lambda_c: Option<f64>,
    pub lambda_c_se: Option<f64>,
    pub lambda_c_over_gamma: Option<f64>,
    pub lambda_c_over_gamma_se: Option<f64>,
    pub pbm_lambda_c_over_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub kind: TessellationKind,
    pub lambda: f64,
    pub lambda_over_gamma: f64,
    pub theta: f64,
    pub std_error: f64,
    pub censored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchRow {
    pub kind: TessellationKind,
    pub lambda: f64,
    pub lambda_over_gamma: f64,
    pub mu_hat: f64,
    pub std_error: f64,
    pub simulations: usize,
    pub skipped: usize,
    pub pairs: usize,
    pub min_mu_hat: f64,
    /// The lower bound `1/r`.
    pub inverse_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub r_gamma: f64,
    pub pvt_lambda_c_over_gamma: Option<f64>,
    pub pdt_lambda_c_over_gamma: Option<f64>,
    pub pbm_lambda_c_over_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDetailRow {
    pub r_gamma: f64,
    pub kind: TessellationKind,
    pub window: f64,
    pub lambda_c_over_gamma: f64,
    pub std_error: f64,
    pub pbm_lambda_c_over_gamma: f64,
    /// Literal Bernoulli bond approximation with `b_c = 0.5` (PVT only;
    /// empty where the equation has no root).
    pub bernoulli_lambda_c_over_gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub version: String,
    pub seed: u64,
    /// Every file written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    pub config: ExperimentConfig,
}

/// Output directory plus the list of files written into it.
pub struct Output {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn write_rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.path(name);
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.record(name);
        Ok(())
    }

    pub fn write_curve(&mut self, name: &str, points: &[CrossingCurvePoint]) -> Result<()> {
        io::write_crossing_curve(create(&self.path(name))?, points)?;
        self.record(name);
        Ok(())
    }

    /// Marks a file written elsewhere (e.g. incrementally) as an output.
    pub fn adopt(&mut self, name: &str) {
        self.record(name);
    }

    pub fn finish(
        mut self,
        experiment: Experiment,
        config: &ExperimentConfig,
        plots: bool,
    ) -> Result<Vec<String>> {
        if plots {
            for name in render_plots(&self.dir, experiment)? {
                self.record(&name);
            }
        }
        let manifest = Manifest {
            experiment,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed.unwrap_or(1),
            outputs: self.files.clone(),
            config: config.clone(),
        };
        std::fs::write(self.path(MANIFEST), toml::to_string(&manifest)?)?;
        self.files.push(MANIFEST.to_string());
        Ok(self.files)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("writing {}", path.display()))?,
    ))
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = r
        .deserialize()
        .collect::<csv::Result<Vec<T>>>()
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(rows)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Regenerates the plots of an experiment from its CSVs alone and returns
/// the file names written.
pub fn render_plots(dir: &Path, experiment: Experiment) -> Result<Vec<String>> {
    let charts = match experiment {
        Experiment::Threshold | Experiment::CrossingCurves => {
            vec![("crossing_curves.svg", curves_chart(dir)?)]
        }
        Experiment::Theta => vec![("theta.svg", theta_chart(dir)?)],
        Experiment::Stretch => vec![("stretch.svg", stretch_chart(dir)?)],
        Experiment::Table1 => vec![
            ("table1.svg", table_chart(dir)?),
            ("crossing_curves.svg", curves_chart(dir)?),
        ],
    };
    let mut names = Vec::new();
    for (name, chart) in charts {
        let path = dir.join(name);
        std::fs::write(&path, chart.to_svg())
            .with_context(|| format!("writing {}", path.display()))?;
        names.push(name.to_string());
    }
    Ok(names)
}

fn curves_chart(dir: &Path) -> Result<Chart> {
    let fits: Vec<FitRow> = read_rows(&dir.join(FITS))?;
    let mut chart = Chart {
        title: "Crossing probability".into(),
        x_label: "λ/γ".into(),
        y_label: "p̂(λ)".into(),
        y_range: Some((0.0, 1.0)),
        ..Default::default()
    };
    for (c, f) in fits.iter().enumerate() {
        let points = io::read_crossing_curve(
            File::open(dir.join(&f.curve)).with_context(|| format!("reading {}", f.curve))?,
        )?;
        let scaled: Vec<(f64, f64)> = points
            .iter()
            .map(|p| (p.lambda / f.gamma, p.p_hat))
            .collect();
        let name = format!("{} rγ={} L={}", f.kind, f.r_gamma, f.window);
        chart
            .series
            .push(Series::new(name, scaled.clone(), Style::Points, c));
        if let (Some(a), Some(b)) = (f.a, f.b) {
            let (lo, hi) = scaled
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p.0), hi.max(p.0))
                });
            if lo.is_finite() {
                let line = (0..=60)
                    .map(|i| {
                        let x = lo + (hi - lo) * i as f64 / 60.0;
                        (x, logistic(a * x * f.gamma + b))
                    })
                    .collect();
                chart.series.push(Series::new("", line, Style::Line, c));
            }
        }
    }
    Ok(chart)
}

fn theta_chart(dir: &Path) -> Result<Chart> {
    let rows: Vec<ThetaRow> = read_rows(&dir.join(THETA))?;
    let mut chart = Chart {
        title: "Percolation probability".into(),
        x_label: "λ/γ".into(),
        y_label: "θ̂(λ)".into(),
        y_range: Some((0.0, 1.0)),
        ..Default::default()
    };
    for (c, kind) in TessellationKind::ALL.into_iter().enumerate() {
        let sel: Vec<&ThetaRow> = rows.iter().filter(|r| r.kind == kind).collect();
        if sel.is_empty() {
            continue;
        }
        chart.series.push(
            Series::new(
                kind.to_string(),
                sel.iter().map(|r| (r.lambda_over_gamma, r.theta)).collect(),
                Style::LinePoints,
                c,
            )
            .with_errors(sel.iter().map(|r| r.std_error).collect()),
        );
    }
    Ok(chart)
}

fn stretch_chart(dir: &Path) -> Result<Chart> {
    let rows: Vec<StretchRow> = read_rows(&dir.join(STRETCH))?;
    let mut chart = Chart {
        title: "Stretch factor".into(),
        x_label: "λ/γ".into(),
        y_label: "μ̂ (hops per km)".into(),
        ..Default::default()
    };
    for (c, kind) in TessellationKind::ALL.into_iter().enumerate() {
        let sel: Vec<&StretchRow> = rows.iter().filter(|r| r.kind == kind).collect();
        if sel.is_empty() {
            continue;
        }
        chart.series.push(
            Series::new(
                kind.to_string(),
                sel.iter()
                    .map(|r| (r.lambda_over_gamma, r.mu_hat))
                    .collect(),
                Style::LinePoints,
                c,
            )
            .with_errors(sel.iter().map(|r| r.std_error).collect()),
        );
    }
    if let (Some(first), Some(lo), Some(hi)) = (
        rows.first(),
        rows.iter().map(|r| r.lambda_over_gamma).reduce(f64::min),
        rows.iter().map(|r| r.lambda_over_gamma).reduce(f64::max),
    ) {
        chart.series.push(Series::new(
            "1/r",
            vec![(lo, first.inverse_r), (hi, first.inverse_r)],
            Style::Line,
            5,
        ));
    }
    Ok(chart)
}

fn table_chart(dir: &Path) -> Result<Chart> {
    let rows: Vec<TableRow> = read_rows(&dir.join(TABLE1))?;
    let col = |f: fn(&TableRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter()
            .filter_map(|r| Some((r.r_gamma, f(r)?)))
            .collect()
    };
    let mut chart = Chart {
        title: "Critical intensity".into(),
        x_label: "rγ".into(),
        y_label: "λc/γ".into(),
        log_x: true,
        log_y: true,
        ..Default::default()
    };
    chart.series.push(Series::new(
        "PBM",
        col(|r| Some(r.pbm_lambda_c_over_gamma)),
        Style::Line,
        2,
    ));
    for (c, (name, f)) in [
        (
            "PVT",
            (|r: &TableRow| r.pvt_lambda_c_over_gamma) as fn(&TableRow) -> Option<f64>,
        ),
        ("PDT", |r: &TableRow| r.pdt_lambda_c_over_gamma),
    ]
    .into_iter()
    .enumerate()
    {
        let pts = col(f);
        if !pts.is_empty() {
            chart.series.push(Series::new(name, pts, Style::Points, c));
        }
    }
    Ok(chart)
}

/// File name stem for a curve: `crossing_curve_PVT`, plus a suffix.
pub fn curve_name(kind: TessellationKind, suffix: &str) -> String {
    format!("crossing_curve_{kind}{suffix}.csv")
}
