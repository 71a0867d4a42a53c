//! Static SVG figures: ternary plots for three-strategy simplices and unit
//! square plots for 2x2 product domains.
//!
//! Ternary corners sit at R=(0,0), B=(1,0), Y=(1/2,√3/2) for strategies
//! 0, 1, 2. Square plots put player 0's probability of strategy 0 on the
//! horizontal axis and player 1's on the vertical one.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::StrategySet;
use crate::geometry::{AnalysisMode, Region};
use crate::models::RestrictedSimplex;

const COORD_TOL: f64 = 1e-9;
const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Fills keyed by strategy index.
pub const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#e8c31c", "#2ca02c", "#9467bd", "#8c564b"];
pub const MIXED_FILL: &str = "#9a9a9a";
pub const MARKER_COLOR: &str = "#ff7f0e";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerShape {
    Star,
    Diamond,
    Dot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillLayer {
    pub color: String,
    pub opacity: f64,
    /// Polygons in data coordinates.
    pub polygons: Vec<Vec<Vec<f64>>>,
    /// Degenerate pieces drawn as strokes (segments) or dots.
    pub strokes: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveLayer {
    pub color: String,
    pub width: f64,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub shape: MarkerShape,
    pub color: String,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub width: f64,
    pub height: f64,
    pub title: Option<String>,
    pub fills: Vec<FillLayer>,
    pub curves: Vec<CurveLayer>,
    pub markers: Vec<Marker>,
    /// Closed dashed outlines, e.g. restricted simplices.
    pub dashes: Vec<Vec<Vec<f64>>>,
    /// Corner labels (ternary) or axis labels (square).
    pub labels: Vec<String>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            width: 400.0,
            height: 380.0,
            title: None,
            fills: Vec::new(),
            curves: Vec::new(),
            markers: Vec::new(),
            dashes: Vec::new(),
            labels: vec!["R".into(), "B".into(), "Y".into()],
        }
    }
}

pub fn strategy_color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

fn set_color(s: StrategySet) -> &'static str {
    if s.len() == 1 {
        strategy_color(s.iter().next().expect("singleton"))
    } else {
        MIXED_FILL
    }
}

/// Barycentric (p_R, p_B, p_Y) to plane coordinates.
pub fn to_cartesian(p: &[f64]) -> (f64, f64) {
    (p[1] + 0.5 * p[2], SQRT3_2 * p[2])
}

/// Inverse of [`to_cartesian`].
pub fn from_cartesian(x: f64, y: f64) -> [f64; 3] {
    let y_ = y / SQRT3_2;
    let b = x - 0.5 * y_;
    [1.0 - b - y_, b, y_]
}

impl PlotSpec {
    pub fn ternary() -> Self {
        Self::default()
    }

    pub fn square() -> Self {
        PlotSpec {
            width: 400.0,
            height: 400.0,
            labels: vec!["x".into(), "z".into()],
            ..Self::default()
        }
    }

    /// Region fills as unions of lattice cells. Symmetric three-strategy
    /// regions become triangles, 2x2 product regions rectangles.
    pub fn add_regions(&mut self, regions: &[Region]) -> Result<()> {
        for r in regions {
            let color = r
                .color
                .as_ref()
                .or(Some(&r.pattern))
                .and_then(|c| c.first().copied())
                .map(set_color)
                .unwrap_or(MIXED_FILL);
            let mut layer = FillLayer {
                color: color.to_string(),
                opacity: 0.85,
                polygons: Vec::new(),
                strokes: Vec::new(),
            };
            match (r.mode, r.factors.as_slice()) {
                (AnalysisMode::Symmetric, [f]) if f.k == 3 => {
                    let grid = f.grid();
                    layer.polygons = f.cells.iter().map(|&c| grid.corners(c as usize)).collect();
                    layer.strokes = f.points.iter().map(|p| vec![p.clone()]).collect();
                }
                (AnalysisMode::Product, [f0, f1]) if f0.k == 2 && f1.k == 2 => {
                    for a in spans(f0) {
                        for b in spans(f1) {
                            let pts = vec![
                                vec![a.0, b.0],
                                vec![a.1, b.0],
                                vec![a.1, b.1],
                                vec![a.0, b.1],
                            ];
                            if a.1 > a.0 && b.1 > b.0 {
                                layer.polygons.push(pts);
                            } else {
                                layer.strokes.push(vec![vec![a.0, b.0], vec![a.1, b.1]]);
                            }
                        }
                    }
                }
                _ => {
                    return Err(Error::Unsupported(
                        "plots cover three-strategy symmetric and 2x2 product regions".into(),
                    ))
                }
            }
            layer.strokes.dedup();
            self.fills.push(layer);
        }
        Ok(())
    }

    /// Dashed outline of a restricted simplex (three strategies).
    pub fn add_restricted(&mut self, poly: &RestrictedSimplex) {
        let mut v = poly.vertices.clone();
        v.sort_by(|a, b| {
            let (ax, ay) = to_cartesian(a);
            let (bx, by) = to_cartesian(b);
            let c = to_cartesian(&[1.0 / 3.0; 3]);
            (ay - c.1).atan2(ax - c.0).total_cmp(&(by - c.1).atan2(bx - c.0))
        });
        v.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
        self.dashes.push(v);
    }
}

/// Maximal runs of cells as intervals of the first coordinate, plus points.
fn spans(f: &crate::geometry::FactorPiece) -> Vec<(f64, f64)> {
    let m = f.resolution as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut run: Option<(u32, u32)> = None;
    for &c in &f.cells {
        run = match run {
            Some((s, e)) if c == e + 1 => Some((s, c)),
            Some((s, e)) => {
                out.push((s as f64 / m, (e + 1) as f64 / m));
                Some((c, c))
            }
            None => Some((c, c)),
        };
    }
    if let Some((s, e)) = run {
        out.push((s as f64 / m, (e + 1) as f64 / m));
    }
    out.extend(f.points.iter().map(|p| (p[0], p[0])));
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out.dedup();
    out
}

fn check_ternary(p: &[f64]) -> Result<()> {
    let ok = p.len() == 3
        && p.iter().all(|x| x.is_finite() && *x >= -COORD_TOL)
        && (p.iter().sum::<f64>() - 1.0).abs() <= COORD_TOL;
    if ok {
        Ok(())
    } else {
        Err(Error::validation(format!("{p:?} is not a point of the simplex")))
    }
}

fn check_square(p: &[f64]) -> Result<()> {
    if p.len() == 2 && p.iter().all(|x| x.is_finite() && (-COORD_TOL..=1.0 + COORD_TOL).contains(x)) {
        Ok(())
    } else {
        Err(Error::validation(format!("{p:?} is not a point of the unit square")))
    }
}

struct Frame {
    ox: f64,
    oy: f64,
    scale: f64,
    ternary: bool,
}

impl Frame {
    fn map(&self, p: &[f64]) -> (f64, f64) {
        let (x, y) = if self.ternary { to_cartesian(p) } else { (p[0], p[1]) };
        (self.ox + self.scale * x, self.oy - self.scale * y)
    }
}

fn f(x: f64) -> String {
    let s = format!("{x:.2}");
    // avoid "-0.00"
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn path(frame: &Frame, pts: &[Vec<f64>], close: bool) -> String {
    let mut d = String::new();
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = write!(d, "{}{},{}", if i == 0 { "M" } else { " L" }, f(x), f(y));
    }
    if close {
        d.push_str(" Z");
    }
    d
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn marker(frame: &Frame, m: &Marker) -> String {
    let (cx, cy) = frame.map(&m.point);
    let r = 7.0;
    match m.shape {
        MarkerShape::Dot => format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3.00\" fill=\"{}\"/>\n",
            f(cx),
            f(cy),
            escape(&m.color)
        ),
        MarkerShape::Diamond => format!(
            "<polygon points=\"{},{} {},{} {},{} {},{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.8\"/>\n",
            f(cx),
            f(cy - r),
            f(cx + r),
            f(cy),
            f(cx),
            f(cy + r),
            f(cx - r),
            f(cy),
            escape(&m.color)
        ),
        MarkerShape::Star => {
            let pts: Vec<String> = (0..10)
                .map(|i| {
                    let rad = if i % 2 == 0 { r * 1.2 } else { r * 0.5 };
                    let a = std::f64::consts::PI * (i as f64 / 5.0 - 0.5);
                    format!("{},{}", f(cx + rad * a.cos()), f(cy + rad * a.sin()))
                })
                .collect();
            format!(
                "<polygon points=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.8\"/>\n",
                pts.join(" "),
                escape(&m.color)
            )
        }
    }
}

fn render(spec: &PlotSpec, ternary: bool) -> Result<String> {
    let check = if ternary { check_ternary } else { check_square };
    for layer in &spec.fills {
        layer.polygons.iter().chain(&layer.strokes).flatten().try_for_each(|p| check(p))?;
    }
    spec.curves.iter().flat_map(|c| &c.points).try_for_each(|p| check(p))?;
    spec.markers.iter().try_for_each(|m| check(&m.point))?;
    spec.dashes.iter().flatten().try_for_each(|p| check(p))?;
    if !(spec.width > 0.0 && spec.height > 0.0) {
        return Err(Error::validation("canvas size must be positive"));
    }

    let margin = 40.0;
    let top = if spec.title.is_some() { 24.0 } else { 0.0 };
    let avail_w = spec.width - 2.0 * margin;
    let avail_h = spec.height - 2.0 * margin - top;
    let frame = if ternary {
        let scale = avail_w.min(avail_h / SQRT3_2);
        Frame {
            ox: (spec.width - scale) / 2.0,
            oy: top + margin + SQRT3_2 * scale + (avail_h - SQRT3_2 * scale) / 2.0,
            scale,
            ternary,
        }
    } else {
        let scale = avail_w.min(avail_h);
        Frame {
            ox: (spec.width - scale) / 2.0,
            oy: top + margin + scale,
            scale,
            ternary,
        }
    };

    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        f(spec.width),
        f(spec.height),
        f(spec.width),
        f(spec.height)
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    if let Some(t) = &spec.title {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"24.00\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
            f(spec.width / 2.0),
            escape(t)
        );
    }
    for layer in &spec.fills {
        let _ = writeln!(s, "<g fill=\"{}\" fill-opacity=\"{}\" stroke=\"none\">", escape(&layer.color), f(layer.opacity));
        if !layer.polygons.is_empty() {
            let d: Vec<String> = layer.polygons.iter().map(|p| path(&frame, p, true)).collect();
            let _ = writeln!(s, "<path d=\"{}\"/>", d.join(" "));
        }
        for st in &layer.strokes {
            if st.len() == 1 || st.windows(2).all(|w| w[0] == w[1]) {
                let (x, y) = frame.map(&st[0]);
                let _ = writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"2.00\"/>", f(x), f(y));
            } else {
                let _ = writeln!(
                    s,
                    "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2.50\"/>",
                    path(&frame, st, false),
                    escape(&layer.color)
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    for d in &spec.dashes {
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.00\" stroke-dasharray=\"4 3\"/>",
            path(&frame, d, true)
        );
    }
    for c in &spec.curves {
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
            path(&frame, &c.points, false),
            escape(&c.color),
            f(c.width)
        );
    }

    // outline and labels
    let label = |i: usize| spec.labels.get(i).map(|l| escape(l)).unwrap_or_default();
    if ternary {
        let corners = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.50\"/>",
            path(&frame, &corners, true)
        );
        let offsets = [(-10.0, 16.0, "end"), (10.0, 16.0, "start"), (0.0, -10.0, "middle")];
        for (i, (c, (dx, dy, anchor))) in corners.iter().zip(offsets).enumerate() {
            let (x, y) = frame.map(c);
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
                f(x + dx),
                f(y + dy),
                label(i)
            );
        }
    } else {
        let box_ = [vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.50\"/>",
            path(&frame, &box_, true)
        );
        for t in [0.0, 0.5, 1.0] {
            let (x, y) = frame.map(&[t, 0.0]);
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
                f(x),
                f(y + 14.0),
                t
            );
            let (x, y) = frame.map(&[0.0, t]);
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
                f(x - 6.0),
                f(y + 4.0),
                t
            );
        }
        let (x, y) = frame.map(&[0.5, 0.0]);
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>",
            f(x),
            f(y + 30.0),
            label(0)
        );
        let (x, y) = frame.map(&[0.0, 0.5]);
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 {} {})\">{}</text>",
            f(x - 26.0),
            f(y),
            f(x - 26.0),
            f(y),
            label(1)
        );
    }
    for m in &spec.markers {
        s.push_str(&marker(&frame, m));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_ternary(spec: &PlotSpec) -> Result<String> {
    render(spec, true)
}

pub fn render_square(spec: &PlotSpec) -> Result<String> {
    render(spec, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SetAnalyzer;
    use crate::io::bundled_game;

    #[test]
    fn corners_land_where_expected() {
        assert_eq!(to_cartesian(&[1.0, 0.0, 0.0]), (0.0, 0.0));
        assert_eq!(to_cartesian(&[0.0, 1.0, 0.0]), (1.0, 0.0));
        let (x, y) = to_cartesian(&[0.0, 0.0, 1.0]);
        assert!((x - 0.5).abs() < 1e-15 && (y - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let back = from_cartesian(0.3, 0.2);
        let (x, y) = to_cartesian(&back);
        assert!((x - 0.3).abs() < 1e-15 && (y - 0.2).abs() < 1e-15);
    }

    #[test]
    fn empty_spec_is_outline_with_labels() {
        let svg = render_ternary(&PlotSpec::ternary()).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
        for l in [">R<", ">B<", ">Y<"] {
            assert!(svg.contains(l));
        }
        assert_eq!(svg.matches("<path").count(), 1);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let mut spec = PlotSpec::ternary();
        spec.markers.push(Marker {
            shape: MarkerShape::Star,
            color: MARKER_COLOR.into(),
            point: vec![0.5, 0.6, -0.1],
        });
        assert!(render_ternary(&spec).is_err());
        let mut spec = PlotSpec::square();
        spec.markers.push(Marker {
            shape: MarkerShape::Diamond,
            color: MARKER_COLOR.into(),
            point: vec![0.5, 1.2],
        });
        assert!(render_square(&spec).is_err());
    }

    #[test]
    fn chain_store_has_one_rectangle() {
        let g = bundled_game("chain_store").unwrap();
        let a = SetAnalyzer::with_defaults(&g).unwrap();
        let regions = a.choice_sets(1.0 / 3.0).unwrap();
        let mut spec = PlotSpec::square();
        spec.add_regions(&regions).unwrap();
        let rects: Vec<_> = spec.fills.iter().flat_map(|l| &l.polygons).collect();
        assert_eq!(rects.len(), 1);
        let r = rects[0];
        assert!(r.iter().all(|p| p[0] <= 0.25 + 1e-12 && p[1] <= 0.25 + 1e-12));
        assert!(r.iter().any(|p| (p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12));
        render_square(&spec).unwrap();
    }

    #[test]
    fn g3_fills_use_three_colors() {
        let g = bundled_game("g3").unwrap();
        let a = SetAnalyzer::with_defaults(&g).unwrap();
        let regions: Vec<_> = a.choice_sets(1.0).unwrap().into_iter().filter(|r| !r.is_thin()).collect();
        let mut spec = PlotSpec::ternary();
        spec.add_regions(&regions).unwrap();
        let colors: std::collections::BTreeSet<_> = spec.fills.iter().map(|l| l.color.clone()).collect();
        assert_eq!(colors.len(), 3);
        let a = render_ternary(&spec).unwrap();
        assert_eq!(a, render_ternary(&spec).unwrap());
    }
}
