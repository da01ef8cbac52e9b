//! Level sets of the frozen Hamiltonian by marching squares.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::harness::io::fmt_num;
use crate::harness::svg::{Marker, Plot, Series, PALETTE};
use crate::model::{equilibria, hamiltonian, Equilibrium, EquilibriumKind, Phi};

pub const GRID: usize = 600;
pub const EXTENT: f64 = 2.2;
/// Regular levels besides the separatrix levels.
pub const REGULAR_LEVELS: usize = 24;

#[derive(Clone, Debug)]
pub struct Contour {
    pub level: f64,
    pub separatrix: bool,
    pub polylines: Vec<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug)]
pub struct Portrait {
    pub t_const: f64,
    pub contours: Vec<Contour>,
    pub equilibria: Vec<Equilibrium>,
}

pub fn portrait(t_const: f64) -> Result<Portrait> {
    portrait_with(t_const, GRID, EXTENT, REGULAR_LEVELS)
}

pub fn portrait_with(t_const: f64, n: usize, extent: f64, regular: usize) -> Result<Portrait> {
    if n < 3 || !(extent > 0.0) {
        return Err(Error::InvalidInput(format!("grid {n}, extent {extent}")));
    }
    let eq = equilibria(t_const)?;
    let h = extent * 2.0 / (n - 1) as f64;
    let coord = |k: usize| -extent + h * k as f64;
    let mut field = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            field[j * n + i] = hamiltonian(t_const, Phi::new(coord(i), coord(j)));
        }
    }
    // Regular levels span the values inside the inscribed disc, where the
    // quartic term has not yet swamped everything.
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n {
        for i in 0..n {
            if coord(i).hypot(coord(j)) <= extent {
                let v = field[j * n + i];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let mut levels: Vec<(f64, bool)> = (1..=regular)
        .map(|k| (lo + (hi - lo) * k as f64 / (regular + 1) as f64, false))
        .collect();
    for e in eq.iter().filter(|e| e.kind == EquilibriumKind::Saddle) {
        let v = hamiltonian(t_const, e.location);
        if !levels.iter().any(|(l, s)| *s && (l - v).abs() < 1e-12) {
            levels.push((v, true));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let contours = levels
        .into_iter()
        .map(|(level, separatrix)| Contour {
            level,
            separatrix,
            polylines: march(&field, n, extent, level),
        })
        .collect();
    Ok(Portrait {
        t_const,
        contours,
        equilibria: eq,
    })
}

/// Polylines of {field = level} on an n×n node grid over [−extent, extent]².
pub fn march(field: &[f64], n: usize, extent: f64, level: f64) -> Vec<Vec<(f64, f64)>> {
    let h = extent * 2.0 / (n - 1) as f64;
    let at = |i: usize, j: usize| field[j * n + i] - level;
    // Edge ids: horizontal (i,j)-(i+1,j) is 2(jn+i), vertical (i,j)-(i,j+1) is 2(jn+i)+1.
    let mut points: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut crossing = |id: usize| -> usize {
        points.entry(id).or_insert_with(|| {
            let node = id / 2;
            let (i, j) = (node % n, node / n);
            let (i2, j2) = if id.is_multiple_of(2) { (i + 1, j) } else { (i, j + 1) };
            let (a, b) = (at(i, j), at(i2, j2));
            let s = a / (a - b);
            let x = -extent + h * (i as f64 + s * (i2 - i) as f64);
            let y = -extent + h * (j as f64 + s * (j2 - j) as f64);
            (x, y)
        });
        id
    };
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            // corners counter-clockwise from (i,j); a zero value counts as above
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let edges = [
                2 * (j * n + i),
                2 * (j * n + i + 1) + 1,
                2 * ((j + 1) * n + i),
                2 * (j * n + i) + 1,
            ];
            let above: Vec<bool> = v.iter().map(|x| *x >= 0.0).collect();
            let cut: Vec<usize> = (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).collect();
            match cut.len() {
                2 => segs.push((crossing(edges[cut[0]]), crossing(edges[cut[1]]))),
                4 => {
                    let center = v.iter().sum::<f64>() / 4.0;
                    // pair each cut edge with the one that keeps the center's side connected
                    if (center >= 0.0) == above[0] {
                        segs.push((crossing(edges[0]), crossing(edges[1])));
                        segs.push((crossing(edges[2]), crossing(edges[3])));
                    } else {
                        segs.push((crossing(edges[3]), crossing(edges[0])));
                        segs.push((crossing(edges[1]), crossing(edges[2])));
                    }
                }
                _ => {}
            }
        }
    }
    chain(&segs, &points)
}

fn chain(segs: &[(usize, usize)], points: &HashMap<usize, (f64, f64)>) -> Vec<Vec<(f64, f64)>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segs.iter().enumerate() {
        adj.entry(a).or_default().push(k);
        adj.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    // open chains first (start at an end of degree 1), then closed loops
    let mut starts: Vec<usize> = segs.iter().map(|s| s.0).chain(segs.iter().map(|s| s.1)).collect();
    starts.sort_by_key(|e| (adj[e].len() != 1, *e));
    starts.dedup();
    for start in starts {
        while let Some(&first) = adj[&start].iter().find(|&&k| !used[k]) {
            let mut line = vec![points[&start]];
            let mut node = start;
            let mut seg = first;
            loop {
                used[seg] = true;
                let (a, b) = segs[seg];
                node = if a == node { b } else { a };
                line.push(points[&node]);
                match adj[&node].iter().find(|&&k| !used[k]) {
                    Some(&k) => seg = k,
                    None => break,
                }
            }
            out.push(line);
        }
    }
    out
}

impl Portrait {
    /// `record,level,index,re,im`; contour rows carry the polyline index,
    /// equilibrium rows the family number.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("record,level,index,re,im\n");
        for c in &self.contours {
            let rec = if c.separatrix { "separatrix" } else { "contour" };
            for (k, line) in c.polylines.iter().enumerate() {
                for &(x, y) in line {
                    let _ = writeln!(s, "{rec},{},{k},{},{}", fmt_num(c.level), fmt_num(x), fmt_num(y));
                }
            }
        }
        for e in &self.equilibria {
            let rec = match e.kind {
                EquilibriumKind::Center => "center",
                EquilibriumKind::Saddle => "saddle",
            };
            let _ = writeln!(
                s,
                "{rec},{},{},{},{}",
                fmt_num(hamiltonian(self.t_const, e.location)),
                e.family,
                fmt_num(e.location.re),
                fmt_num(e.location.im)
            );
        }
        s
    }

    pub fn to_svg(&self) -> String {
        let mut plot = Plot::new(format!("level sets of H, T = {}", self.t_const), "Re phi", "Im phi");
        plot.x_range = Some((-EXTENT, EXTENT));
        plot.y_range = Some((-EXTENT, EXTENT));
        for c in &self.contours {
            let color = if c.separatrix { PALETTE[1] } else { PALETTE[0] };
            for line in &c.polylines {
                plot.series.push(Series {
                    points: line.clone(),
                    color,
                    label: String::new(),
                });
            }
        }
        for e in &self.equilibria {
            plot.markers.push(Marker {
                at: (e.location.re, e.location.im),
                filled: e.kind == EquilibriumKind::Center,
            });
        }
        plot.render()
    }
}
