use std::fmt::Write as _;

use serde::Serialize;

use super::quarter::QuarterField;

/// Closed-form limit shapes g(x, y) = lim τ(⌊nx⌋, ⌊ny⌋) / n of classical LPP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ShapeReference {
    /// Weights geometric on {1, 2, ...} with success probability p.
    Geometric { p: f64 },
    /// Exponential weights with rate λ.
    Exponential { lambda: f64 },
}

impl ShapeReference {
    pub fn g(&self, x: f64, y: f64) -> f64 {
        match *self {
            // Each weight is one plus a geometric on {0, 1, ...}.
            ShapeReference::Geometric { p } => geometric_shape(p, x, y) + x + y,
            ShapeReference::Exponential { lambda } => exponential_shape(lambda, x, y),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ShapeReference::Geometric { p } => format!("geometric:{p}"),
            ShapeReference::Exponential { lambda } => format!("exponential:{lambda}"),
        }
    }
}

/// ((1-p)x + 2√(xy(1-p)) + (1-p)y) / p, the shape for geometric weights on
/// {0, 1, ...} with P(k) = p(1-p)^k.
pub fn geometric_shape(p: f64, x: f64, y: f64) -> f64 {
    let q = 1.0 - p;
    (q * x + 2.0 * (x * y * q).sqrt() + q * y) / p
}

/// (√x + √y)² / λ.
pub fn exponential_shape(lambda: f64, x: f64, y: f64) -> f64 {
    (x.sqrt() + y.sqrt()).powi(2) / lambda
}

/// Normalized front of C_n in a quarter-plane field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeProfile {
    pub n: u64,
    /// Staircase corners (x/n, y/n), x increasing, y nonincreasing.
    pub points: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ShapeReference>,
    /// sup |g(x, y)/n - 1| over front points with x/y in [1/4, 4].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_deviation: Option<f64>,
}

/// Front of C_n: for each column x ≥ 1 the highest arrived y. Cells beyond
/// the box (a column with no arrived cell) end the profile.
pub fn shape_profile(field: &QuarterField, n: u64, reference: Option<ShapeReference>) -> ShapeProfile {
    let scale = (n.max(1)) as f64;
    let front = field.front(n);
    let mut points = Vec::new();
    let mut dev: Option<f64> = None;
    for (x, y) in front.iter().enumerate().skip(1) {
        let y = y.unwrap_or(0);
        points.push((x as f64 / scale, y as f64 / scale));
        if y == 0 {
            break;
        }
        if let Some(r) = reference {
            let ratio = x as f64 / y as f64;
            if (0.25..=4.0).contains(&ratio) && n > 0 {
                let d = (r.g(x as f64, y as f64) / n as f64 - 1.0).abs();
                dev = Some(dev.map_or(d, |v| v.max(d)));
            }
        }
    }
    ShapeProfile { n, points, reference, sup_deviation: dev }
}

impl ShapeProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x_over_n,y_over_n\n");
        for (x, y) in &self.points {
            let _ = writeln!(s, "{x},{y}");
        }
        s
    }

    /// Level curve {g = 1} of the reference shape, parametrized by the angle.
    pub fn reference_curve(&self, samples: usize) -> Vec<(f64, f64)> {
        let Some(r) = self.reference else { return Vec::new() };
        (0..=samples)
            .map(|k| {
                let th = std::f64::consts::FRAC_PI_2 * k as f64 / samples as f64;
                let (dx, dy) = (th.cos(), th.sin());
                // g is 1-homogeneous, so the direction hits {g = 1} at 1/g(d).
                let s = 1.0 / r.g(dx, dy);
                (s * dx, s * dy)
            })
            .collect()
    }

    /// Plain SVG: the front polyline, plus the reference curve when known.
    pub fn to_svg(&self) -> String {
        let ref_curve = self.reference_curve(200);
        let extent = self
            .points
            .iter()
            .chain(ref_curve.iter())
            .fold(0.0f64, |m, (x, y)| m.max(*x).max(*y))
            .max(1e-9);
        let size = 600.0;
        let map = |(x, y): (f64, f64)| (40.0 + x / extent * (size - 80.0), size - 40.0 - y / extent * (size - 80.0));
        let poly = |pts: &[(f64, f64)]| {
            pts.iter()
                .map(|p| {
                    let (a, b) = map(*p);
                    format!("{a:.2},{b:.2}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (ox, oy) = map((0.0, 0.0));
        let (ex, _) = map((extent, 0.0));
        let (_, ey) = map((0.0, extent));
        let _ = writeln!(s, r#"<path d="M{ox},{ey} L{ox},{oy} L{ex},{oy}" stroke="black" fill="none"/>"#);
        let _ = writeln!(s, r#"<text x="{ox}" y="{}" font-size="12">t = {}</text>"#, oy + 20.0, self.n);
        // Staircase through the corners.
        let mut stair = Vec::with_capacity(2 * self.points.len());
        let mut prev_x = 0.0;
        for &(x, y) in &self.points {
            stair.push((prev_x, y));
            stair.push((x, y));
            prev_x = x;
        }
        let _ = writeln!(s, r#"<polyline points="{}" stroke="steelblue" fill="none"/>"#, poly(&stair));
        if !ref_curve.is_empty() {
            let _ = writeln!(s, r#"<polyline points="{}" stroke="crimson" stroke-dasharray="4 3" fill="none"/>"#, poly(&ref_curve));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::grow_quarter_plane;
    use crate::measures::{DiscreteMeasure, Law, MeasureFamily};

    #[test]
    fn diagonal_values() {
        assert!((geometric_shape(0.5, 1.0, 1.0) - 4.828_427_124_746_19).abs() < 1e-12);
        assert!((ShapeReference::Geometric { p: 0.5 }.g(1.0, 1.0) - 6.828_427_124_746_19).abs() < 1e-12);
        assert_eq!(exponential_shape(2.0, 1.0, 1.0), 2.0);
    }

    #[test]
    fn time_zero_hugs_the_axes() {
        let fam = MeasureFamily::constant(DiscreteMeasure::from_law(&Law::Geometric { p: 0.5 }).unwrap());
        let f = grow_quarter_plane(10, &fam, 0, 1).unwrap();
        let prof = shape_profile(&f, 0, None);
        assert_eq!(prof.points.len(), 1);
        assert_eq!(prof.points[0].1, 0.0);
    }

    #[test]
    fn classical_front_tracks_the_reference() {
        let fam = MeasureFamily::constant(DiscreteMeasure::from_law(&Law::Geometric { p: 0.5 }).unwrap());
        let f = grow_quarter_plane(700, &fam, 1000, 9).unwrap();
        let prof = shape_profile(&f, 1000, Some(ShapeReference::Geometric { p: 0.5 }));
        for w in prof.points.windows(2) {
            assert!(w[1].0 > w[0].0 && w[1].1 <= w[0].1);
        }
        let dev = prof.sup_deviation.unwrap();
        assert!(dev < 0.07, "{dev}");
        let svg = prof.to_svg();
        assert!(svg.starts_with("<svg") && svg.contains("crimson"));
    }
}
