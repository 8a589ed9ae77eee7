use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diffsim::Dual;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scenarios::{Scenario, TaskVariation};

/// One `x y` pair per line; the polygon is closed implicitly.
pub fn polygon_text(vertices: &[Point]) -> String {
    let mut s = String::new();
    for v in vertices {
        writeln!(s, "{} {}", v[0], v[1]).unwrap();
    }
    s
}

pub fn parse_polygon(text: &str) -> Result<Vec<Point>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let bad = || Error::config(format!("line {}", n + 1), format!("expected `x y`, found `{line}`"));
            let mut it = line.split_whitespace();
            let x = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let y = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if it.next().is_some() {
                return Err(bad());
            }
            Ok([x, y])
        })
        .collect()
}

/// Closed SVG path, y up, with a 10% margin around the bounding box.
pub fn polygon_svg(vertices: &[Point]) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in vertices {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let m = 0.1 * span;
    let size = 400.0;
    let scale = size / (span + 2.0 * m);
    let mut d = String::new();
    for (i, v) in vertices.iter().enumerate() {
        let x = (v[0] - lo[0] + m) * scale;
        let y = (hi[1] - v[1] + m) * scale;
        write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" }).unwrap();
    }
    d.push('Z');
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <path d=\"{d}\" fill=\"#9ab\" stroke=\"#234\" stroke-width=\"1\"/>\n</svg>\n"
    )
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.txt` and `<stem>.svg` for the tool deformed to `theta`.
pub fn export_geometry(scenario: &Scenario, theta: &[f64], stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let shape = scenario.deformed(theta)?;
    let txt = stem.with_extension("txt");
    let svg = stem.with_extension("svg");
    write(&txt, &polygon_text(&shape.vertices))?;
    write(&svg, &polygon_svg(&shape.vertices))?;
    Ok((txt, svg))
}

/// Trajectory CSV of one rollout with tangents with respect to `theta`.
pub fn dump_rollout(scenario: &Scenario, variation: &TaskVariation, theta: &[f64], path: &Path) -> Result<()> {
    let traj = scenario.rollout::<Dual>(variation, theta)?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf, scenario.dim()).map_err(|e| Error::io(path, e))?;
    write(path, std::str::from_utf8(&buf).expect("csv is utf-8"))
}
