//! SVG drawing of a 2-D region: observations as dots, the preferred one
//! highlighted, known rows dotted, imputed rows dashed, the region shaded.

use std::fmt::Write;

use crate::polyhedra::{region_polygon_2d, ConstraintRow, GeometryError, Polyhedron, Viewport};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 0.2;

struct Frame {
    vp: Viewport,
}

impl Frame {
    fn px(&self, p: [f64; 2]) -> (String, String) {
        let x = (p[0] - self.vp.x_min) / (self.vp.x_max - self.vp.x_min) * SIZE;
        let y = (self.vp.y_max - p[1]) / (self.vp.y_max - self.vp.y_min) * SIZE;
        (fmt(x), fmt(y))
    }
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// End points of the line `a'x = b` inside the viewport.
fn clip_line(row: &ConstraintRow, vp: &Viewport) -> Option<([f64; 2], [f64; 2])> {
    let (a0, a1) = (row.a[0], row.a[1]);
    let nn = a0 * a0 + a1 * a1;
    if nn == 0.0 {
        return None;
    }
    let base = [a0 * row.b / nn, a1 * row.b / nn];
    let dir = [-a1, a0];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (d, p, min, max) in [
        (dir[0], base[0], vp.x_min, vp.x_max),
        (dir[1], base[1], vp.y_min, vp.y_max),
    ] {
        if d.abs() < 1e-15 {
            if p < min || p > max {
                return None;
            }
        } else {
            let (t0, t1) = ((min - p) / d, (max - p) / d);
            lo = lo.max(t0.min(t1));
            hi = hi.min(t0.max(t1));
        }
    }
    if lo > hi {
        return None;
    }
    let at = |t: f64| [base[0] + t * dir[0], base[1] + t * dir[1]];
    Some((at(lo), at(hi)))
}

fn line(out: &mut String, f: &Frame, row: &ConstraintRow, class: &str, dash: &str) {
    if let Some((p, q)) = clip_line(row, &f.vp) {
        let (x1, y1) = f.px(p);
        let (x2, y2) = f.px(q);
        let _ = writeln!(
            out,
            r#"<line class="{class}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="black" stroke-width="1.5" stroke-dasharray="{dash}"/>"#
        );
    }
}

/// Draws `known` rows dotted and `imputed` rows dashed over the region they
/// cut out. The viewport is the bounding box of the observations grown by
/// 20% on every side; a region leaving it is hatched.
pub fn render_region_svg(
    points: &[Vec<f64>],
    preferred: usize,
    known: &Polyhedron,
    imputed: &[ConstraintRow],
) -> Result<String, GeometryError> {
    if known.n != 2 {
        return Err(GeometryError::NotTwoDimensional(known.n));
    }
    if let Some(p) = points.iter().find(|p| p.len() != 2) {
        return Err(GeometryError::NotTwoDimensional(p.len()));
    }
    let vp = Viewport::around(points, MARGIN);
    let f = Frame { vp };
    let mut rows = known.rows.clone();
    rows.extend(imputed.iter().cloned());
    let region = Polyhedron { n: 2, rows };
    let polygon = match region_polygon_2d(&region, Some(&vp)) {
        Ok(p) => Some(p),
        Err(GeometryError::EmptyRegion) => None,
        Err(e) => return Err(e),
    };

    let mut out = String::new();
    let size = fmt(SIZE);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    out.push_str(
        "<defs><pattern id=\"hatch\" width=\"8\" height=\"8\" patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">\
         <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#3b6ea5\" stroke-width=\"1\"/></pattern></defs>\n",
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#);
    match &polygon {
        Some(poly) => {
            let pts: Vec<String> = poly
                .vertices
                .iter()
                .map(|&v| {
                    let (x, y) = f.px(v);
                    format!("{x},{y}")
                })
                .collect();
            let pts = pts.join(" ");
            let _ = writeln!(out, r##"<polygon class="region" points="{pts}" fill="#9ec3e6" fill-opacity="0.5"/>"##);
            if poly.clipped {
                let _ = writeln!(out, r#"<polygon class="clipped" points="{pts}" fill="url(#hatch)"/>"#);
                let _ = writeln!(
                    out,
                    r#"<text x="6.000000" y="16.000000" font-size="12">region extends beyond the view</text>"#
                );
            }
        }
        None => {
            let _ = writeln!(out, r#"<text x="6.000000" y="16.000000" font-size="12">empty region</text>"#);
        }
    }
    for r in &known.rows {
        line(&mut out, &f, r, "known", "2,3");
    }
    for r in imputed {
        line(&mut out, &f, r, "imputed", "8,4");
    }
    for (k, p) in points.iter().enumerate() {
        if k == preferred {
            continue;
        }
        let (x, y) = f.px([p[0], p[1]]);
        let _ = writeln!(out, r#"<circle class="observation" cx="{x}" cy="{y}" r="4" fill="black"/>"#);
    }
    if let Some(p) = points.get(preferred) {
        let (x, y) = f.px([p[0], p[1]]);
        let _ = writeln!(
            out,
            r##"<circle class="preferred" cx="{x}" cy="{y}" r="6" fill="#d62728" stroke="black" stroke-width="1"/>"##
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clips_axis_lines_to_the_box() {
        let vp = Viewport {
            x_min: 0.0,
            x_max: 4.0,
            y_min: 0.0,
            y_max: 2.0,
        };
        let (p, q) = clip_line(&ConstraintRow::new(vec![1.0, 0.0], 1.0), &vp).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && (q[0] - 1.0).abs() < 1e-12);
        assert!((p[1] - q[1]).abs() - 2.0 < 1e-12);
        assert!(clip_line(&ConstraintRow::new(vec![0.0, 1.0], 5.0), &vp).is_none());
    }

    #[test]
    fn output_is_deterministic_and_hatched_when_unbounded() {
        let pts = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![0.5, 0.5], 1.0)]).unwrap();
        let a = render_region_svg(&pts, 0, &known, &[]).unwrap();
        let b = render_region_svg(&pts, 0, &known, &[]).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("url(#hatch)"));
        assert!(a.contains(r#"class="preferred""#));
    }
}
