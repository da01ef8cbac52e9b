//! Figure data: trajectory pairs near a capture threshold and phase portraits.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::io::{trajectory_csv, xy_csv};
use crate::harness::portrait::portrait;
use crate::harness::svg::Plot;
use crate::harness::{simulate, Initial, RunConfig};
use crate::model::Phi;
use crate::numerics::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Re φ and Im φ against θ for two nearby starting times.
    Fig1,
    /// |φ|² against θ for the same runs.
    Fig2,
    /// Frozen-Hamiltonian portraits at T = −2, 0, 2.
    Fig3,
    All,
}

impl std::str::FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" | "1" => Ok(Figure::Fig1),
            "fig2" | "2" => Ok(Figure::Fig2),
            "fig3" | "3" => Ok(Figure::Fig3),
            "all" => Ok(Figure::All),
            _ => Err(Error::InvalidInput(format!("unknown figure {s:?}"))),
        }
    }
}

pub const PORTRAIT_T: [f64; 3] = [-2.0, 0.0, 2.0];
/// Offset of the second starting time.
pub const THETA0_SHIFT: f64 = 0.01;

/// Default run behind the trajectory figures.
pub fn default_figure_config() -> RunConfig {
    RunConfig::new(0.01, -2.0, 1.0, Initial::State(Phi::new(0.02, 0.0))).expect("valid defaults")
}

fn pair_runs(cfg: &RunConfig) -> Result<[(f64, Trajectory); 2]> {
    let mut other = cfg.clone();
    other.theta0 = cfg.theta0 - THETA0_SHIFT;
    let (a, b) = std::thread::scope(|s| {
        let ha = s.spawn(|| simulate(cfg));
        let hb = s.spawn(|| simulate(&other));
        (ha.join().expect("worker panicked"), hb.join().expect("worker panicked"))
    });
    Ok([(cfg.theta0, a?), (other.theta0, b?)])
}

fn tag(theta0: f64) -> String {
    format!("{theta0:.2}")
}

fn write(dir: &Path, name: String, body: String, out: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, body)?;
    out.push(p);
    Ok(())
}

/// Writes CSV and SVG files for the requested figure(s) into `dir`;
/// returns the paths written.
pub fn emit_figures(cfg: &RunConfig, which: Figure, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let want = |f: Figure| which == Figure::All || which == f;

    if want(Figure::Fig1) || want(Figure::Fig2) {
        let runs = pair_runs(cfg)?;
        if want(Figure::Fig1) {
            let mut re = Plot::new(format!("Re phi, eps = {}", cfg.eps), "theta", "Re phi");
            let mut im = Plot::new(format!("Im phi, eps = {}", cfg.eps), "theta", "Im phi");
            let mut plane = Plot::new("phi in the complex plane", "Re phi", "Im phi");
            for (t0, traj) in &runs {
                write(
                    dir,
                    format!("fig1_theta0_{}.csv", tag(*t0)),
                    trajectory_csv(traj),
                    &mut out,
                )?;
                let label = format!("theta0 = {}", tag(*t0));
                re = re.line(label.clone(), traj.iter().map(|(t, s)| (t, s[0])).collect());
                im = im.line(label.clone(), traj.iter().map(|(t, s)| (t, s[1])).collect());
                plane = plane.line(label, traj.iter().map(|(_, s)| (s[0], s[1])).collect());
            }
            write(dir, "fig1_re.svg".into(), re.render(), &mut out)?;
            write(dir, "fig1_im.svg".into(), im.render(), &mut out)?;
            write(dir, "fig1_plane.svg".into(), plane.render(), &mut out)?;
        }
        if want(Figure::Fig2) {
            let mut plot = Plot::new(format!("|phi|^2, eps = {}", cfg.eps), "theta", "|phi|^2");
            for (t0, traj) in &runs {
                let rows: Vec<(f64, f64)> = traj.iter().map(|(t, s)| (t, s[0] * s[0] + s[1] * s[1])).collect();
                write(
                    dir,
                    format!("fig2_theta0_{}.csv", tag(*t0)),
                    xy_csv("theta,abs2", rows.iter().copied()),
                    &mut out,
                )?;
                plot = plot.line(format!("theta0 = {}", tag(*t0)), rows);
            }
            let (a, b) = cfg_range(&runs);
            plot = plot.line("1 + theta", vec![(a.max(-1.0), (1.0 + a).max(0.0)), (b, 1.0 + b)]);
            write(dir, "fig2.svg".into(), plot.render(), &mut out)?;
        }
    }

    if want(Figure::Fig3) {
        let portraits: Vec<_> = std::thread::scope(|s| {
            let hs: Vec<_> = PORTRAIT_T.iter().map(|&t| s.spawn(move || portrait(t))).collect();
            hs.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for (t, p) in PORTRAIT_T.iter().zip(portraits) {
            let p = p?;
            write(dir, format!("fig3_T_{t}.csv"), p.to_csv(), &mut out)?;
            write(dir, format!("fig3_T_{t}.svg"), p.to_svg(), &mut out)?;
        }
    }
    Ok(out)
}

fn cfg_range(runs: &[(f64, Trajectory); 2]) -> (f64, f64) {
    let a = runs.iter().map(|r| r.1.range().0).fold(f64::INFINITY, f64::min);
    let b = runs.iter().map(|r| r.1.range().1).fold(f64::NEG_INFINITY, f64::max);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_names_parse() {
        assert_eq!("fig2".parse::<Figure>().unwrap(), Figure::Fig2);
        assert_eq!("all".parse::<Figure>().unwrap(), Figure::All);
        assert!("fig9".parse::<Figure>().is_err());
    }
}
