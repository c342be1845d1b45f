//! Deterministic SVG rendering of trajectories and wavefront profiles.
//!
//! Fixed 1000×1000 canvas, fixed 9-significant-digit decimal formatting,
//! and native circular-arc path commands for projected arcs (no polyline
//! sampling in the xy view), so identical input yields identical bytes.

use heisbill_core::geometry::{flow, GeodesicArc, ProjectedPath};
use heisbill_core::io::TrajectoryFile;
use heisbill_core::tables::TableSpec;
use heisbill_core::wavefront::WavefrontPoint;

pub const CANVAS: f64 = 1000.0;

/// Fixed decimal formatting with 9 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).clamp(0, 17) as usize;
    format!("{:.*}", decimals, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Xz,
}

/// Affine world→canvas map with uniform scale and flipped vertical axis.
struct Frame {
    scale: f64,
    x0: f64,
    y0: f64,
}

impl Frame {
    fn fit(min: (f64, f64), max: (f64, f64)) -> Frame {
        let w = (max.0 - min.0).max(1e-9);
        let h = (max.1 - min.1).max(1e-9);
        let scale = 0.9 * CANVAS / w.max(h);
        let cx = 0.5 * (min.0 + max.0);
        let cy = 0.5 * (min.1 + max.1);
        Frame {
            scale,
            x0: CANVAS / 2.0 - scale * cx,
            y0: CANVAS / 2.0 + scale * cy,
        }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        (self.x0 + self.scale * p.0, self.y0 - self.scale * p.1)
    }
}

fn project(plane: Plane, p: &heisbill_core::geometry::Point3) -> (f64, f64) {
    match plane {
        Plane::Xy => (p.x, p.y),
        Plane::Xz => (p.x, p.z),
    }
}

/// Bounding box over sampled arcs, events, and the table silhouette.
fn content_bbox(
    plane: Plane,
    arcs: &[GeodesicArc],
    table: Option<&TableSpec>,
) -> ((f64, f64), (f64, f64)) {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for arc in arcs {
        for k in 0..=32 {
            let t = arc.duration * k as f64 / 32.0;
            pts.push(project(plane, &arc.state_at(t).point));
        }
    }
    if let Some(t) = table {
        if plane == Plane::Xy {
            match *t {
                TableSpec::InfiniteCylinder { center, radius }
                | TableSpec::FiniteCylinder { center, radius, .. } => {
                    pts.push((center.0 - radius, center.1 - radius));
                    pts.push((center.0 + radius, center.1 + radius));
                }
                _ => {}
            }
        } else {
            match *t {
                TableSpec::HorizontalHalfSpace { z0, .. } => pts.push((0.0, z0)),
                TableSpec::HorizontalBand { z_lo, z_hi } => {
                    pts.push((0.0, z_lo));
                    pts.push((0.0, z_hi));
                }
                TableSpec::FiniteCylinder {
                    center,
                    radius,
                    z_lo,
                    z_hi,
                } => {
                    pts.push((center.0 - radius, z_lo));
                    pts.push((center.0 + radius, z_hi));
                }
                _ => {}
            }
        }
    }
    if pts.is_empty() {
        return ((-1.0, -1.0), (1.0, 1.0));
    }
    let mut min = (f64::MAX, f64::MAX);
    let mut max = (f64::MIN, f64::MIN);
    for p in pts {
        min.0 = min.0.min(p.0);
        min.1 = min.1.min(p.1);
        max.0 = max.0.max(p.0);
        max.1 = max.1.max(p.1);
    }
    (min, max)
}

/// Path data of one arc in the xy view: exact circular-arc commands, split
/// into quarter turns (SVG cannot express a full circle in one `A`).
fn arc_path_xy(frame: &Frame, arc: &GeodesicArc) -> String {
    let start = frame.map(project(Plane::Xy, &arc.start.point));
    let mut d = format!("M {} {}", fmt_sig(start.0), fmt_sig(start.1));
    match heisbill_core::geometry::projected_circle(&arc.start) {
        ProjectedPath::Line { .. } => {
            let end = frame.map(project(Plane::Xy, &arc.end().point));
            d.push_str(&format!(" L {} {}", fmt_sig(end.0), fmt_sig(end.1)));
        }
        ProjectedPath::Circle {
            radius,
            angular_rate,
            ..
        } => {
            let total_turn = angular_rate * arc.duration;
            let quarter = std::f64::consts::FRAC_PI_2;
            let pieces = (total_turn.abs() / quarter).ceil().max(1.0) as usize;
            let r_canvas = radius * frame.scale;
            // canvas y is flipped, so the sweep flag follows the sign of
            // the angular rate directly
            let sweep = if angular_rate > 0.0 { 0 } else { 1 };
            for k in 1..=pieces {
                let t = arc.duration * k as f64 / pieces as f64;
                let p = frame.map(project(Plane::Xy, &arc.state_at(t).point));
                d.push_str(&format!(
                    " A {} {} 0 0 {} {} {}",
                    fmt_sig(r_canvas),
                    fmt_sig(r_canvas),
                    sweep,
                    fmt_sig(p.0),
                    fmt_sig(p.1)
                ));
            }
        }
    }
    d
}

/// Polyline path of one arc in the xz view (the lift is not circular there).
fn arc_path_xz(frame: &Frame, arc: &GeodesicArc) -> String {
    let samples = 64;
    let mut d = String::new();
    for k in 0..=samples {
        let t = arc.duration * k as f64 / samples as f64;
        let p = frame.map(project(Plane::Xz, &flow(&arc.start, t).point));
        d.push_str(if k == 0 { "M " } else { " L " });
        d.push_str(&format!("{} {}", fmt_sig(p.0), fmt_sig(p.1)));
    }
    d
}

fn table_shapes(frame: &Frame, plane: Plane, table: &TableSpec, out: &mut String) {
    let line = |out: &mut String, a: (f64, f64), b: (f64, f64)| {
        let a = frame.map(a);
        let b = frame.map(b);
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" class=\"boundary\"/>\n",
            fmt_sig(a.0),
            fmt_sig(a.1),
            fmt_sig(b.0),
            fmt_sig(b.1)
        ));
    };
    let span = CANVAS / frame.scale;
    match (plane, *table) {
        (Plane::Xy, TableSpec::InfiniteCylinder { center, radius })
        | (Plane::Xy, TableSpec::FiniteCylinder { center, radius, .. }) => {
            let c = frame.map(center);
            out.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" class=\"boundary\"/>\n",
                fmt_sig(c.0),
                fmt_sig(c.1),
                fmt_sig(radius * frame.scale)
            ));
        }
        (Plane::Xy, TableSpec::VerticalHalfSpace { offset }) => {
            line(out, (-span, offset), (span, offset));
        }
        (Plane::Xz, TableSpec::HorizontalHalfSpace { z0, .. }) => {
            line(out, (-span, z0), (span, z0));
        }
        (Plane::Xz, TableSpec::HorizontalBand { z_lo, z_hi }) => {
            line(out, (-span, z_lo), (span, z_lo));
            line(out, (-span, z_hi), (span, z_hi));
        }
        (Plane::Xz, TableSpec::FiniteCylinder {
            center,
            radius,
            z_lo,
            z_hi,
        }) => {
            line(out, (center.0 - radius, z_lo), (center.0 + radius, z_lo));
            line(out, (center.0 - radius, z_hi), (center.0 + radius, z_hi));
            line(out, (center.0 - radius, z_lo), (center.0 - radius, z_hi));
            line(out, (center.0 + radius, z_lo), (center.0 + radius, z_hi));
        }
        _ => {}
    }
}

/// Renders a trajectory file: projected arcs as paths, reflection points as
/// markers, and the table silhouette for reference.
pub fn trajectory_svg(file: &TrajectoryFile, plane: Plane) -> String {
    let arcs = file.geodesic_arcs();
    let table = file.parse_table().ok();
    let (min, max) = content_bbox(plane, &arcs, table.as_ref());
    let frame = Frame::fit(min, max);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n",
        c = CANVAS
    ));
    out.push_str("  <style>.arc{fill:none;stroke:#1f4e79;stroke-width:2}.boundary{fill:none;stroke:#999;stroke-width:1.5;stroke-dasharray:6 4}.bounce{fill:#c0392b}</style>\n");
    if let Some(t) = &table {
        table_shapes(&frame, plane, t, &mut out);
    }
    for arc in &arcs {
        let d = match plane {
            Plane::Xy => arc_path_xy(&frame, arc),
            Plane::Xz => arc_path_xz(&frame, arc),
        };
        out.push_str(&format!("  <path class=\"arc\" d=\"{d}\"/>\n"));
    }
    for ev in &file.events {
        let p = frame.map(match plane {
            Plane::Xy => (ev.point.x, ev.point.y),
            Plane::Xz => (ev.point.x, ev.point.z),
        });
        out.push_str(&format!(
            "  <circle class=\"bounce\" cx=\"{}\" cy=\"{}\" r=\"4\"/>\n",
            fmt_sig(p.0),
            fmt_sig(p.1)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Wavefront profile: one polyline over (landing radius, height), with two
/// labeled axes.
pub fn wavefront_svg(points: &[WavefrontPoint]) -> String {
    let mut min = (f64::MAX, f64::MAX);
    let mut max = (f64::MIN, f64::MIN);
    for w in points {
        min.0 = min.0.min(w.landing_radius);
        min.1 = min.1.min(w.z1);
        max.0 = max.0.max(w.landing_radius);
        max.1 = max.1.max(w.z1);
    }
    min.0 = min.0.min(0.0);
    min.1 = min.1.min(0.0);
    let frame = Frame::fit(min, max);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n",
        c = CANVAS
    ));
    out.push_str("  <style>.profile{fill:none;stroke:#1f4e79;stroke-width:2}.axis{stroke:#333;stroke-width:1}.label{font:20px sans-serif;fill:#333}</style>\n");
    let origin = frame.map((0.0, 0.0));
    let x_end = frame.map((max.0, 0.0));
    let y_end = frame.map((0.0, max.1));
    out.push_str(&format!(
        "  <line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        fmt_sig(origin.0),
        fmt_sig(origin.1),
        fmt_sig(x_end.0),
        fmt_sig(x_end.1)
    ));
    out.push_str(&format!(
        "  <line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        fmt_sig(origin.0),
        fmt_sig(origin.1),
        fmt_sig(y_end.0),
        fmt_sig(y_end.1)
    ));
    out.push_str(&format!(
        "  <text class=\"label\" x=\"{}\" y=\"{}\">R</text>\n",
        fmt_sig(x_end.0 - 24.0),
        fmt_sig(x_end.1 + 28.0)
    ));
    out.push_str(&format!(
        "  <text class=\"label\" x=\"{}\" y=\"{}\">z1</text>\n",
        fmt_sig(y_end.0 + 10.0),
        fmt_sig(y_end.1 + 20.0)
    ));
    let mut pts = String::new();
    for (k, w) in points.iter().enumerate() {
        let p = frame.map((w.landing_radius, w.z1));
        if k > 0 {
            pts.push(' ');
        }
        pts.push_str(&format!("{},{}", fmt_sig(p.0), fmt_sig(p.1)));
    }
    out.push_str(&format!("  <polyline class=\"profile\" points=\"{pts}\"/>\n"));
    out.push_str("</svg>\n");
    out
}
