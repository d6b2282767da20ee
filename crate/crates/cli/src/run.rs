use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::json;
use zonesep::cauchy_general::MarchOptions;
use zonesep::{
    fv_run_with, l1_error, march_isochrone, profile_at, profile_in, seed_on_ray, Error, Execution,
    Grid1D, PiecewiseInitialData, Profile, Wavefield,
};

use crate::config::{Format, GeneralSection, Scenario};
use crate::svg::{plot, Series};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Solver(Error),
    Io(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Solver(e) => write!(f, "solver failure: {e}"),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OrderingViolation(_) | Error::InvalidInput(_) | Error::DomainMismatch => {
                CliError::Validation(e.to_string())
            }
            e => CliError::Solver(e),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn profile_json(p: &Profile) -> serde_json::Value {
    let samples: Vec<_> = p
        .samples
        .iter()
        .map(|s| {
            json!({
                "x": s.x, "R1": s.r.r1, "R2": s.r.r2,
                "u1": s.u.u1, "u2": s.u.u2, "zone": s.tag.to_string(),
            })
        })
        .collect();
    json!({ "t_star": p.t_star, "samples": samples })
}

fn profile_svg(p: &Profile, title: &str, rules: &[f64]) -> String {
    let xs: Vec<f64> = p.samples.iter().map(|s| s.x).collect();
    let u1: Vec<f64> = p.samples.iter().map(|s| s.u.u1).collect();
    let u2: Vec<f64> = p.samples.iter().map(|s| s.u.u2).collect();
    plot(
        title,
        &[
            Series {
                label: "u1",
                xs: &xs,
                ys: &u1,
                color: "#c0392b",
                dashed: false,
            },
            Series {
                label: "u2",
                xs: &xs,
                ys: &u2,
                color: "#2c6fbb",
                dashed: false,
            },
        ],
        rules,
    )
}

fn emit_profile(s: &Scenario, stem: &str, p: &Profile, rules: &[f64], title: &str) -> Result<()> {
    match s.format {
        Format::Csv => write_file(&s.out_dir, &format!("{stem}.csv"), &p.to_csv())?,
        Format::Json => {
            let body = serde_json::to_string_pretty(&profile_json(p)).expect("json of plain data");
            write_file(&s.out_dir, &format!("{stem}.json"), &body)?
        }
    };
    write_file(
        &s.out_dir,
        &format!("{stem}.svg"),
        &profile_svg(p, title, rules),
    )?;
    Ok(())
}

fn zone_rules(wf: &Wavefield, t: f64) -> Result<Vec<f64>> {
    let spans = wf.layout(t)?;
    Ok(spans[..spans.len() - 1].iter().map(|z| z.x_right).collect())
}

pub fn cmd_timeline(s: &Scenario) -> Result<()> {
    let wf = Wavefield::new(s.params)?;
    let tl = wf.build_timeline()?;
    match s.format {
        Format::Csv => {
            let mut ev = String::from("label,t,x,first,second,created,destroyed\n");
            for e in &tl.events {
                let zones = |v: &[zonesep::ZoneId]| {
                    v.iter()
                        .map(|z| z.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let _ = writeln!(
                    ev,
                    "{},{},{},{},{},{},{}",
                    e.label.as_str(),
                    e.time,
                    e.position,
                    e.participants.0.name(),
                    e.participants.1.name(),
                    zones(&e.created),
                    zones(&e.destroyed)
                );
            }
            write_file(&s.out_dir, "timeline_events.csv", &ev)?;
            let mut zl = String::from("zone,t_birth,t_death,born,died\n");
            for z in &tl.lifetimes {
                let _ = writeln!(
                    zl,
                    "{},{},{},{},{}",
                    z.zone,
                    z.t_birth,
                    z.t_death.map_or(String::new(), |t| t.to_string()),
                    z.born.map_or("", |l| l.as_str()),
                    z.died.map_or("", |l| l.as_str())
                );
            }
            write_file(&s.out_dir, "timeline_zones.csv", &zl)?;
        }
        Format::Json => {
            let body = json!({ "params": s.params, "timeline": tl });
            let text = serde_json::to_string_pretty(&body).expect("json of plain data");
            write_file(&s.out_dir, "timeline.json", &text)?;
        }
    }
    println!("{:<6} {:>22} {:>22}", "event", "t", "x");
    for e in &tl.events {
        println!("{:<6} {:>22} {:>22}", e.label.as_str(), e.time, e.position);
    }
    for n in &tl.notes {
        println!("note: {n}");
    }
    Ok(())
}

pub fn cmd_profile(s: &Scenario) -> Result<()> {
    let wf = Wavefield::new(s.params)?;
    let profiles = Execution::Parallel.map(&s.times, |&t| profile_at(&wf, t, s.samples));
    for (&t, p) in s.times.iter().zip(profiles) {
        let p = p?;
        let rules = zone_rules(&wf, t)?;
        emit_profile(
            s,
            &format!("profile_t{t}"),
            &p,
            &rules,
            &format!("t* = {t}"),
        )?;
        println!("t* = {t}: {} samples, {} zones", p.len(), rules.len() + 1);
    }
    Ok(())
}

fn fv_domain(s: &Scenario, wf: &Wavefield, t: f64) -> Result<(f64, f64)> {
    if let Some(d) = s.fv_domain {
        return Ok(d);
    }
    let spans = wf.layout(t)?;
    // the grid has to hold the initial plateau as well as the waves at t
    let lo = spans[0].x_right.min(s.params.x1);
    let hi = spans[spans.len() - 1].x_left.max(s.params.x2);
    let pad = 0.1 * (hi - lo).max(s.params.width());
    Ok((lo - pad, hi + pad))
}

pub fn cmd_compare(s: &Scenario) -> Result<()> {
    let wf = Wavefield::new(s.params)?;
    let mut summary = Vec::new();
    for &t in &s.times {
        let domain = fv_domain(s, &wf, t)?;
        let spans = wf.layout(t)?;
        let shocks = [spans[0].x_right, spans[spans.len() - 1].x_left];
        let mut last = None;
        for level in 0..s.refine {
            let cells = s.cells << level;
            let grid = Grid1D::new(domain.0, domain.1, cells, s.cfl)?;
            let field = fv_run_with(&s.params, grid, t, s.flux, Execution::Parallel)?;
            let exact = profile_in(&wf, t, s.samples.max(4 * cells), domain)?;
            let err = l1_error(&field, &exact)?;
            let reach = (10.0 * grid.dx()).max(0.02 * (shocks[1] - shocks[0]));
            let found: Vec<f64> = shocks
                .iter()
                .map(|&x| {
                    field
                        .steepest_front((x - reach, x + reach))
                        .unwrap_or(f64::NAN)
                })
                .collect();
            println!(
                "t = {t}, cells = {cells}: L1 = ({}, {}), shock offsets = ({}, {}) dx = {}",
                err[0],
                err[1],
                found[0] - shocks[0],
                found[1] - shocks[1],
                grid.dx()
            );
            summary.push(json!({
                "t": t, "cells": cells, "dx": grid.dx(),
                "l1_u1": err[0], "l1_u2": err[1],
                "shock1_exact": shocks[0], "shock1_fv": found[0],
                "shock2_exact": shocks[1], "shock2_fv": found[1],
            }));
            last = Some((field, exact));
        }
        let (field, exact) = last.expect("refine >= 1");
        let xs = field.grid.centers();
        let ex: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| {
                exact
                    .sample_at(x)
                    .map_or((f64::NAN, f64::NAN), |(_, u)| (u.u1, u.u2))
            })
            .collect();
        let mut csv = String::from("x,u1_fv,u2_fv,u1_exact,u2_exact\n");
        for (i, &x) in xs.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                x, field.u1[i], field.u2[i], ex[i].0, ex[i].1
            );
        }
        write_file(&s.out_dir, &format!("compare_t{t}.csv"), &csv)?;
        let (e1, e2): (Vec<f64>, Vec<f64>) = ex.into_iter().unzip();
        let svg = plot(
            &format!("t = {t}: exact (solid) and finite volume (dotted)"),
            &[
                Series {
                    label: "u1",
                    xs: &xs,
                    ys: &e1,
                    color: "#c0392b",
                    dashed: false,
                },
                Series {
                    label: "u2",
                    xs: &xs,
                    ys: &e2,
                    color: "#2c6fbb",
                    dashed: false,
                },
                Series {
                    label: "u1 fv",
                    xs: &xs,
                    ys: &field.u1,
                    color: "#c0392b",
                    dashed: true,
                },
                Series {
                    label: "u2 fv",
                    xs: &xs,
                    ys: &field.u2,
                    color: "#2c6fbb",
                    dashed: true,
                },
            ],
            &zone_rules(&wf, t)?,
        );
        write_file(&s.out_dir, &format!("compare_t{t}.svg"), &svg)?;
    }
    match s.format {
        Format::Csv => {
            let mut csv = String::from(
                "t,cells,dx,l1_u1,l1_u2,shock1_exact,shock1_fv,shock2_exact,shock2_fv\n",
            );
            for r in &summary {
                let keys = [
                    "t",
                    "cells",
                    "dx",
                    "l1_u1",
                    "l1_u2",
                    "shock1_exact",
                    "shock1_fv",
                    "shock2_exact",
                    "shock2_fv",
                ];
                let row: Vec<String> = keys.iter().map(|k| r[k].to_string()).collect();
                let _ = writeln!(csv, "{}", row.join(","));
            }
            write_file(&s.out_dir, "compare_summary.csv", &csv)?;
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(&summary).expect("json of plain data");
            write_file(&s.out_dir, "compare_summary.json", &text)?;
        }
    }
    Ok(())
}

fn general_data(s: &Scenario) -> Result<(PiecewiseInitialData, Option<&GeneralSection>)> {
    let p = zonesep::validate_params(s.params)?;
    Ok(match &s.general {
        Some(g) => {
            let mob = g.mobilities.map_or((p.mu1, p.mu2), |[a, b]| (a, b));
            let d = PiecewiseInitialData::new(
                mob,
                g.breaks.clone(),
                g.r1.clone(),
                g.r2.clone(),
                (g.domain[0], g.domain[1]),
            )?;
            (d, Some(g))
        }
        None => {
            let w = p.width();
            (
                PiecewiseInitialData::two_point(&p, (p.x1 - 4.0 * w, p.x2 + 4.0 * w))?,
                None,
            )
        }
    })
}

pub fn cmd_general(s: &Scenario) -> Result<()> {
    let (data, g) = general_data(s)?;
    let window = g
        .and_then(|g| g.window)
        .map_or(data.domain(), |[a, b]| (a, b));
    let mut opts = MarchOptions::new(&data, window);
    if let Some(h) = g.and_then(|g| g.h_max) {
        opts.h_max = h;
    }
    let (a_lo, a_hi) = data.a_curve().range();
    let a = g.and_then(|g| g.seed_a).unwrap_or(0.5 * (a_lo + a_hi));
    if !(a_lo..=a_hi).contains(&a) {
        return Err(CliError::Validation(format!(
            "seed_a {a} outside [{a_lo}, {a_hi}]"
        )));
    }
    let b0 = data.b_curve().sigma_at(data.a_curve().x_at(a), true)?;
    let b_hi = data.b_curve().range().1;
    let marches = Execution::Parallel.map(&s.times, |&t| {
        let seed = seed_on_ray(&data, (a, b0), (0.0, 1.0), t, b_hi - b0)?;
        march_isochrone(&data, &seed, &opts)
    });
    for (&t, m) in s.times.iter().zip(marches) {
        let m = m?;
        let p = m.profile(&data)?;
        let rules = m.crossing_positions();
        emit_profile(
            s,
            &format!("general_t{t}"),
            &p,
            &rules,
            &format!("t* = {t}, level-line march"),
        )?;
        println!(
            "t* = {t}: {} states, max drift {:e}, ends {:?}, crossings {:?}",
            m.states.len(),
            m.max_drift,
            m.stops,
            rules
        );
    }
    Ok(())
}
