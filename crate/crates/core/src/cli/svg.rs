//! Bare SVG polylines, one 480x480 panel per file.

use crate::path::{fmt_f64, CadlagPath};

pub const PANEL: f64 = 480.0;
const MARGIN: f64 = 20.0;

/// Polylines in data coordinates; a single transform maps them to the panel.
pub fn polylines_svg(lines: &[Vec<(f64, f64)>], title: &str) -> String {
    let pts = lines.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        (x0, x1) = (x0 - 0.5, x1 + 0.5);
    }
    if y1 - y0 <= 0.0 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    let inner = PANEL - 2.0 * MARGIN;
    let (sx, sy) = (inner / (x1 - x0), inner / (y1 - y0));
    let (tx, ty) = (MARGIN - x0 * sx, MARGIN + y1 * sy);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{p}\" height=\"{p}\" viewBox=\"0 0 {p} {p}\">\n<title>{title}</title>\n",
        p = PANEL
    );
    for line in lines {
        let points: Vec<String> = line.iter().map(|(x, y)| format!("{},{}", fmt_f64(*x), fmt_f64(*y))).collect();
        out.push_str(&format!(
            "<polyline transform=\"matrix({sx} 0 0 {} {tx} {ty})\" fill=\"none\" stroke=\"black\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\" points=\"{}\"/>\n",
            -sy,
            points.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Completed-graph vertices: `(x_1, x_2)` for planar paths, `(t, x_k)` otherwise.
pub fn path_lines(path: &CadlagPath) -> Vec<Vec<(f64, f64)>> {
    let mut vertices: Vec<(f64, &[f64])> = Vec::new();
    for (t, l, r) in path.breakpoints() {
        vertices.push((t, l));
        if l != r {
            vertices.push((t, r));
        }
    }
    if path.dim() == 2 {
        vec![vertices.iter().map(|(_, v)| (v[0], v[1])).collect()]
    } else {
        (0..path.dim()).map(|k| vertices.iter().map(|(t, v)| (*t, v[k])).collect()).collect()
    }
}

pub fn path_svg(path: &CadlagPath, title: &str) -> String {
    polylines_svg(&path_lines(path), title)
}

/// Parses the `points` attributes back out of an SVG written by [`polylines_svg`].
pub fn parse_polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.split("points=\"")
        .skip(1)
        .map(|chunk| {
            let body = chunk.split('"').next().unwrap_or("");
            body.split_whitespace()
                .filter_map(|p| {
                    let (x, y) = p.split_once(',')?;
                    Some((x.parse().ok()?, y.parse().ok()?))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_survives_round_trip() {
        let p = CadlagPath::step(0.0, 1.0, 0.5, 0.0, 1.0).unwrap();
        let lines = path_lines(&p);
        let svg = path_svg(&p, "step");
        assert!(svg.contains("width=\"480\""));
        assert_eq!(parse_polylines(&svg), lines);
        assert_eq!(lines[0], vec![(0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (1.0, 1.0)]);
    }
}
