//! Experiment runners. Every independent piece (kind, window, table row, λ)
//! draws from its own substream of the run seed, so results do not depend
//! on worker count or on which pieces ran before.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use streetperc::estimators::{
    bernoulli_threshold, crossing_curve, fit_logistic_with, pbm_threshold, run_stretch_experiment,
    run_theta_tessellations, scan_threshold, theta_curve, CrossingCurvePoint, DeviceBudget,
    FitMethod, LogisticFit, ScanPlan, Scenario, ThetaPlan, ThetaSample,
};
use streetperc::{io, Error, Execution, RngState, TessellationKind};

use crate::config::{default_window, Resolved};
use crate::output::*;

/// Critical Bernoulli bond parameter used for the PVT approximation.
pub const BERNOULLI_B_C: f64 = 0.5;

pub struct RunContext {
    pub exec: Execution,
    pub quiet: bool,
}

fn kind_index(k: TessellationKind) -> u64 {
    match k {
        TessellationKind::Pvt => 0,
        TessellationKind::Pdt => 1,
    }
}

fn say(ctx: &RunContext, msg: impl AsRef<str>) {
    if !ctx.quiet {
        eprintln!("{}", msg.as_ref());
    }
}

fn scan_plan(c: &Resolved) -> ScanPlan {
    let cfg = &c.config;
    ScanPlan {
        coarse_points: cfg.coarse_points.unwrap_or(8),
        coarse_runs: cfg.coarse_runs.unwrap_or(20),
        fine_points: cfg.fine_points.unwrap_or(10),
        fine_runs: cfg.runs.unwrap_or(50),
        p_cross: cfg.p_cross.unwrap_or(0.6),
        method: cfg.fit.unwrap_or_default(),
        ..ScanPlan::default()
    }
}

struct Fitted {
    fit: Option<LogisticFit>,
    lambda_c: Option<(f64, f64)>,
}

fn fit_curve(points: &[CrossingCurvePoint], method: FitMethod, p: f64) -> Result<Fitted, Error> {
    let fit = fit_logistic_with(points, method)?;
    let lambda_c = (fit.lambda_at(p)?, fit.lambda_at_std_error(p)?);
    Ok(Fitted {
        fit: Some(fit),
        lambda_c: Some(lambda_c),
    })
}

fn fit_row(curve: String, s: &Scenario, f: &Fitted) -> Result<FitRow> {
    let g = s.gamma;
    Ok(FitRow {
        curve,
        kind: s.kind,
        gamma: g,
        r_gamma: s.r_gamma(),
        window: s.side(),
        a: f.fit.map(|f| f.a),
        b: f.fit.map(|f| f.b),
        lambda_c: f.lambda_c.map(|l| l.0),
        lambda_c_se: f.lambda_c.map(|l| l.1),
        lambda_c_over_gamma: f.lambda_c.map(|l| l.0 / g),
        lambda_c_over_gamma_se: f.lambda_c.map(|l| l.1 / g),
        pbm_lambda_c_over_gamma: pbm_threshold(s.r_gamma())?,
    })
}

/// λ_c by automatic scan, or by fitting a fixed grid if one is given.
fn threshold_for(
    s: &Scenario,
    c: &Resolved,
    rng: RngState,
    ctx: &RunContext,
    out: &mut Output,
    suffix: &str,
) -> Result<FitRow> {
    let name = curve_name(s.kind, suffix);
    let fitted = if c.lambdas().is_empty() {
        let scan = scan_threshold(s, &scan_plan(c), rng, ctx.exec)?;
        out.write_curve(&format!("coarse_{name}"), &scan.coarse)?;
        out.write_curve(&name, &scan.fine)?;
        Fitted {
            fit: Some(scan.fit),
            lambda_c: Some((scan.lambda_c, scan.lambda_c_se)),
        }
    } else {
        let points = crossing_curve(s, c.lambdas(), c.config.runs.unwrap_or(50), rng, ctx.exec)?;
        out.write_curve(&name, &points)?;
        fit_curve(
            &points,
            c.config.fit.unwrap_or_default(),
            c.config.p_cross.unwrap_or(0.6),
        )?
    };
    fit_row(name, s, &fitted)
}

pub fn threshold(c: &Resolved, ctx: &RunContext, out: &mut Output) -> Result<()> {
    let base = RngState::new(c.seed());
    let mut rows = Vec::new();
    for &kind in c.config.kind_list() {
        let s = Scenario::new(
            kind,
            c.gamma(),
            c.r().unwrap_or(f64::NAN),
            c.config.window.unwrap_or(30.0),
        )?;
        say(
            ctx,
            format!("threshold {kind} rγ={} L={}", s.r_gamma(), s.side()),
        );
        let row = threshold_for(&s, c, base.substream(&[kind_index(kind)]), ctx, out, "")?;
        say(
            ctx,
            format!(
                "  λc/γ = {:?} ± {:?}",
                row.lambda_c_over_gamma, row.lambda_c_over_gamma_se
            ),
        );
        rows.push(row);
    }
    out.write_rows(FITS, &rows)
}

pub fn crossing_curves(c: &Resolved, ctx: &RunContext, out: &mut Output) -> Result<()> {
    let base = RngState::new(c.seed());
    let method = c.config.fit.unwrap_or_default();
    let p = c.config.p_cross.unwrap_or(0.6);
    let mut rows = Vec::new();
    for &kind in c.config.kind_list() {
        for &side in c.config.windows.as_deref().unwrap_or(&[]) {
            let s = Scenario::new(kind, c.gamma(), c.r().unwrap_or(f64::NAN), side)?;
            say(ctx, format!("crossing curve {kind} L={side}"));
            let rng = base.substream(&[kind_index(kind), side.to_bits()]);
            let points =
                crossing_curve(&s, c.lambdas(), c.config.runs.unwrap_or(50), rng, ctx.exec)?;
            let name = curve_name(kind, &format!("_L{side}"));
            out.write_curve(&name, &points)?;
            let fitted = fit_curve(&points, method, p).unwrap_or_else(|e| {
                say(ctx, format!("  no fit for L={side}: {e}"));
                Fitted {
                    fit: None,
                    lambda_c: None,
                }
            });
            rows.push(fit_row(name, &s, &fitted)?);
        }
    }
    out.write_rows(FITS, &rows)
}

pub fn table1(c: &Resolved, ctx: &RunContext, out: &mut Output) -> Result<()> {
    let base = RngState::new(c.seed());
    let gamma = c.gamma();
    let mut fits = Vec::new();
    let mut table = Vec::new();
    let mut detail = Vec::new();
    for &rg in c.config.r_gamma_values.as_deref().unwrap_or(&[]) {
        let side = c.config.window.unwrap_or_else(|| default_window(rg));
        let pbm = pbm_threshold(rg)?;
        let mut row = TableRow {
            r_gamma: rg,
            pvt_lambda_c_over_gamma: None,
            pdt_lambda_c_over_gamma: None,
            pbm_lambda_c_over_gamma: pbm,
        };
        for &kind in c.config.kind_list() {
            let s = Scenario::new(kind, gamma, rg / gamma, side)?;
            say(ctx, format!("table1 {kind} rγ={rg} L={side}"));
            let rng = base.substream(&[kind_index(kind), rg.to_bits()]);
            let fit = threshold_for(&s, c, rng, ctx, out, &format!("_rg{rg}"))?;
            let (Some(lc), Some(se)) = (fit.lambda_c_over_gamma, fit.lambda_c_over_gamma_se) else {
                bail!("no threshold for {kind} at rγ = {rg}");
            };
            match kind {
                TessellationKind::Pvt => row.pvt_lambda_c_over_gamma = Some(lc),
                TessellationKind::Pdt => row.pdt_lambda_c_over_gamma = Some(lc),
            }
            let bernoulli = match kind {
                TessellationKind::Pvt => {
                    match bernoulli_threshold(gamma, rg / gamma, BERNOULLI_B_C) {
                        Ok(l) => Some(l / gamma),
                        Err(Error::NoRoot { .. }) => None,
                        Err(e) => return Err(e.into()),
                    }
                }
                TessellationKind::Pdt => None,
            };
            detail.push(TableDetailRow {
                r_gamma: rg,
                kind,
                window: side,
                lambda_c_over_gamma: lc,
                std_error: se,
                pbm_lambda_c_over_gamma: pbm,
                bernoulli_lambda_c_over_gamma: bernoulli,
            });
            fits.push(fit);
        }
        table.push(row);
    }
    out.write_rows(FITS, &fits)?;
    out.write_rows(TABLE1_DETAIL, &detail)?;
    out.write_rows(TABLE1, &table)
}

pub fn stretch(c: &Resolved, ctx: &RunContext, out: &mut Output) -> Result<()> {
    let base = RngState::new(c.seed());
    let r = c.r().unwrap_or(f64::NAN);
    let mut rows = Vec::new();
    for &kind in c.config.kind_list() {
        let s = Scenario::new(kind, c.gamma(), r, c.config.window.unwrap_or(5.0))?;
        for &lambda in c.lambdas() {
            say(ctx, format!("stretch {kind} λ={lambda}"));
            let p = run_stretch_experiment(
                &s,
                lambda,
                c.config.simulations.unwrap_or(100),
                c.config.min_dist.unwrap_or(4.0),
                base.substream(&[kind_index(kind)]),
                ctx.exec,
            )?;
            rows.push(StretchRow {
                kind,
                lambda,
                lambda_over_gamma: lambda / s.gamma,
                mu_hat: p.mu_hat,
                std_error: p.std_error,
                simulations: p.simulations,
                skipped: p.skipped,
                pairs: p.pairs,
                min_mu_hat: p.min_mu_hat,
                inverse_r: 1.0 / r,
            });
        }
    }
    out.write_rows(STRETCH, &rows)
}

fn theta_rows(
    kind: TessellationKind,
    gamma: f64,
    samples: &[ThetaSample],
    lambdas: &[f64],
) -> Result<Vec<ThetaRow>> {
    Ok(theta_curve(samples, lambdas)?
        .into_iter()
        .map(|e| ThetaRow {
            kind,
            lambda: e.lambda,
            lambda_over_gamma: e.lambda / gamma,
            theta: e.theta,
            std_error: e.std_error,
            censored: e.censored,
        })
        .collect())
}

pub fn theta(c: &Resolved, ctx: &RunContext, out: &mut Output) -> Result<()> {
    let gamma = c.gamma();
    let lambdas = c.lambdas();
    if let Some(path) = &c.config.samples {
        let kind = c.config.kind_list()[0];
        let samples = io::read_theta_samples(
            File::open(path).with_context(|| format!("reading samples {}", path.display()))?,
        )
        .with_context(|| format!("parsing samples {}", path.display()))?;
        say(
            ctx,
            format!(
                "theta replay of {} samples from {}",
                samples.len(),
                path.display()
            ),
        );
        return out.write_rows(THETA, &theta_rows(kind, gamma, &samples, lambdas)?);
    }
    let lambda_max = lambdas.iter().copied().fold(0.0, f64::max);
    let plan = ThetaPlan {
        tessellations: c.config.n.unwrap_or(10),
        placements: c.config.m.unwrap_or(30),
        budget: DeviceBudget::ExpectedAt {
            lambda: lambda_max,
            factor: c.config.budget_factor.unwrap_or(50.0),
        },
    };
    let mut rows = Vec::new();
    for &kind in c.config.kind_list() {
        let s = Scenario::new(
            kind,
            gamma,
            c.r().unwrap_or(f64::NAN),
            c.config.window.unwrap_or(10.0),
        )?;
        let rng = RngState::new(c.seed()).substream(&[kind_index(kind)]);
        let name = format!("theta_samples_{kind}.csv");
        let samples = theta_samples(&s, &plan, rng, ctx, &out.path(&name))?;
        out.adopt(&name);
        rows.extend(theta_rows(kind, gamma, &samples, lambdas)?);
    }
    out.write_rows(THETA, &rows)
}

/// Key identifying everything that determines a sample file's contents.
fn sample_key(s: &Scenario, plan: &ThetaPlan, rng: RngState) -> String {
    format!("{s:?}\n{plan:?}\n{rng:?}\n")
}

fn key_path(samples: &Path) -> PathBuf {
    samples.with_extension("key")
}

/// Runs tessellation after tessellation, rewriting the sample file after
/// each one. A rerun with the same settings keeps the tessellations already
/// on disk; the final file is the same either way.
fn theta_samples(
    s: &Scenario,
    plan: &ThetaPlan,
    rng: RngState,
    ctx: &RunContext,
    path: &Path,
) -> Result<Vec<ThetaSample>> {
    let key = sample_key(s, plan, rng);
    let kp = key_path(path);
    let mut samples: Vec<ThetaSample> = Vec::new();
    if path.exists() && std::fs::read_to_string(&kp).ok().as_deref() == Some(key.as_str()) {
        let stored = io::read_theta_samples(File::open(path)?)
            .with_context(|| format!("parsing stored samples {}", path.display()))?;
        // keep only whole tessellations
        let mut k = 0;
        while k < plan.tessellations {
            let rows: Vec<_> = stored.iter().filter(|x| x.k == k).copied().collect();
            if rows.len() != plan.placements {
                break;
            }
            samples.extend(rows);
            k += 1;
        }
        if k > 0 {
            say(
                ctx,
                format!("resuming {} from {} stored tessellations", s.kind, k),
            );
        }
    }
    std::fs::write(&kp, &key)?;
    let done = samples.len() / plan.placements;
    for k in done..plan.tessellations {
        say(
            ctx,
            format!(
                "theta {} tessellation {}/{}",
                s.kind,
                k + 1,
                plan.tessellations
            ),
        );
        samples.extend(run_theta_tessellations(s, plan, k..k + 1, rng, ctx.exec)?);
        let tmp = path.with_extension("csv.tmp");
        io::write_theta_samples(File::create(&tmp)?, &samples)?;
        std::fs::rename(&tmp, path)?;
    }
    Ok(samples)
}
