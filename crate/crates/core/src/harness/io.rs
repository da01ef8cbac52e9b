//! CSV output. Numbers use `{:.16e}` (17 significant digits), lines end in LF.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::numerics::{IndependentVar, Trajectory};

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header line for a trajectory of the given kind.
pub fn trajectory_header(traj: &Trajectory) -> &'static str {
    match (traj.variable(), traj.dim()) {
        (IndependentVar::Theta, 2) => "theta,re,im,abs2",
        (IndependentVar::Z, 2) => "z,v,dv",
        (IndependentVar::Eta, 2) => "eta,x,y",
        (_, _) => "t,y0,y1",
    }
}

/// Trajectory as CSV text. θ-trajectories also get an |φ|² column.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let header = trajectory_header(traj);
    let with_abs2 = header.ends_with("abs2");
    let mut out = String::with_capacity(traj.len() * 80);
    if traj.dim() == 2 {
        out.push_str(header);
    } else {
        out.push('t');
        for k in 0..traj.dim() {
            let _ = write!(out, ",y{k}");
        }
    }
    out.push('\n');
    for (t, s) in traj.iter() {
        out.push_str(&fmt_num(t));
        for v in s {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        if with_abs2 {
            out.push(',');
            out.push_str(&fmt_num(s[0] * s[0] + s[1] * s[1]));
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    fs::write(path, trajectory_csv(traj))?;
    Ok(())
}

/// Two-column CSV from an arbitrary (x, y) series.
pub fn xy_csv(header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (x, y) in rows {
        let _ = writeln!(out, "{},{}", fmt_num(x), fmt_num(y));
    }
    out
}
