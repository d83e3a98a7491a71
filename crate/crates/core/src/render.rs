//! Deterministic SVG output: the packing itself and a log-log residual plot.
//!
//! Coordinates are printed with three decimals, so identical inputs give
//! byte-identical files.

use std::fmt::Write;

use thiserror::Error;

use crate::packing::Packing;
use crate::scalar::Scalar;

pub const MIN_SIZE: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("image size {0} is below the minimum of {MIN_SIZE}")]
    SizeTooSmall(u32),
    #[error("convergence series is empty")]
    EmptySeries,
    #[error("series entry {index}: disc counts must be positive and strictly increasing")]
    NonIncreasing { index: usize },
    #[error("series entry {index}: value {value} is not positive and finite")]
    NonPositive { index: usize, value: f64 },
    #[error("a slope fit needs at least two points")]
    TooFewPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    /// Width and height in pixels.
    pub size: u32,
    /// Shade discs by log radius instead of a flat fill.
    pub gradient: bool,
    /// Print the residual area (packing) or fitted slope (convergence).
    pub annotate: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            size: 800,
            gradient: true,
            annotate: true,
        }
    }
}

impl RenderSpec {
    fn validate(&self) -> Result<(), RenderError> {
        if self.size < MIN_SIZE {
            return Err(RenderError::SizeTooSmall(self.size));
        }
        Ok(())
    }
}

fn header(out: &mut String, size: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, r##"<rect width="{size}" height="{size}" fill="#ffffff"/>"##);
}

/// Linear blend between two RGB colours, `t` in `[0, 1]`.
fn blend(t: f64) -> String {
    let (a, b) = ([0x1f, 0x3a, 0x93], [0xf2, 0xa9, 0x00]);
    let mix = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t.clamp(0.0, 1.0)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

/// One `<circle>` for the unit circle and one per disc.
pub fn render_packing<T: Scalar>(packing: &Packing<T>, spec: &RenderSpec) -> Result<String, RenderError> {
    spec.validate()?;
    let size = spec.size as f64;
    let margin = size * 0.02;
    let scale = (size - 2.0 * margin) / 2.0;
    let to_x = |x: f64| margin + (x + 1.0) * scale;
    let to_y = |y: f64| margin + (1.0 - y) * scale;

    let mut out = String::new();
    header(&mut out, spec.size);
    let _ = writeln!(
        out,
        r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        to_x(0.0),
        to_y(0.0),
        scale
    );
    let radii: Vec<f64> = packing.discs().iter().map(|d| d.radius().as_f64()).collect();
    let (lo, hi) = radii
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r.ln()), hi.max(r.ln())));
    for (d, &r) in packing.discs().iter().zip(&radii) {
        let c = d.center();
        let fill = if spec.gradient && hi > lo {
            blend((r.ln() - lo) / (hi - lo))
        } else {
            blend(1.0)
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="{fill}"/>"#,
            to_x(c.re.as_f64()),
            to_y(c.im.as_f64()),
            r * scale
        );
    }
    if spec.annotate {
        let _ = writeln!(
            out,
            r##"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="{:.3}" fill="#000000">N = {}, residual = {:.6e}</text>"##,
            margin,
            size - margin,
            (size / 40.0).max(8.0),
            packing.len(),
            packing.residual_area().as_f64()
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn validate_series(series: &[(usize, f64)]) -> Result<(), RenderError> {
    if series.is_empty() {
        return Err(RenderError::EmptySeries);
    }
    let mut last = 0usize;
    for (index, &(n, value)) in series.iter().enumerate() {
        if n <= last {
            return Err(RenderError::NonIncreasing { index });
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(RenderError::NonPositive { index, value });
        }
        last = n;
    }
    Ok(())
}

/// Least-squares slope of `ln value` against `ln n`.
pub fn fit_loglog_slope(series: &[(usize, f64)]) -> Result<f64, RenderError> {
    validate_series(series)?;
    if series.len() < 2 {
        return Err(RenderError::TooFewPoints);
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, v)| ((n as f64).ln(), v.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Log-log polyline of `(disc count, residual)` pairs.
pub fn render_convergence(series: &[(usize, f64)], spec: &RenderSpec) -> Result<String, RenderError> {
    spec.validate()?;
    validate_series(series)?;
    let size = spec.size as f64;
    let margin = size * 0.1;
    let span = size - 2.0 * margin;
    let xs: Vec<f64> = series.iter().map(|&(n, _)| (n as f64).log10()).collect();
    let ys: Vec<f64> = series.iter().map(|&(_, v)| v.log10()).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| margin + (x - x0) / (x1 - x0) * span;
    let py = |y: f64| size - margin - (y - y0) / (y1 - y0) * span;

    let mut out = String::new();
    header(&mut out, spec.size);
    let _ = writeln!(
        out,
        r##"<path d="M {:.3} {:.3} L {:.3} {:.3} L {:.3} {:.3}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        margin,
        margin,
        margin,
        size - margin,
        size - margin,
        size - margin
    );
    let points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.3},{:.3}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f3a93" stroke-width="1.5"/>"##,
        points.join(" ")
    );
    let font = (size / 40.0).max(8.0);
    let _ = writeln!(
        out,
        r##"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="{font:.3}" fill="#000000">log10 N: {x0:.3} .. {x1:.3}, log10 residual: {y0:.3} .. {y1:.3}</text>"##,
        margin,
        size - margin / 3.0
    );
    if spec.annotate && series.len() >= 2 {
        let slope = fit_loglog_slope(series)?;
        let _ = writeln!(
            out,
            r##"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="{font:.3}" fill="#000000">slope = {slope:.4}</text>"##,
            margin,
            margin / 2.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// About `points` log-spaced entries of the residual series, always
/// including the last.
pub fn log_spaced<T: Scalar>(series: &[(usize, T)], points: usize) -> Vec<(usize, f64)> {
    let Some(&(last, _)) = series.last() else {
        return Vec::new();
    };
    let mut out: Vec<(usize, f64)> = Vec::new();
    let steps = points.max(2) - 1;
    for i in 0..=steps {
        let n = ((last as f64).powf(i as f64 / steps as f64).round() as usize).clamp(1, last);
        if out.last().is_none_or(|&(m, _)| n > m) {
            out.push((n, series[n - 1].1.as_f64()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{pack_greedy, StopRule};

    #[test]
    fn one_circle_per_disc_plus_boundary() {
        let p = pack_greedy(StopRule::MaxDiscs(25), 0.99f64, 1e-6).unwrap();
        let svg = render_packing(&p, &RenderSpec::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 26);
        assert_eq!(svg, render_packing(&p, &RenderSpec::default()).unwrap());
        assert!(svg.contains("residual = "));
        let plain = render_packing(
            &p,
            &RenderSpec {
                annotate: false,
                ..RenderSpec::default()
            },
        )
        .unwrap();
        assert!(!plain.contains("<text"));
    }

    #[test]
    fn size_floor() {
        let p = Packing::<f64>::empty(0.9, 1e-6).unwrap();
        let small = RenderSpec {
            size: 63,
            ..RenderSpec::default()
        };
        assert_eq!(render_packing(&p, &small), Err(RenderError::SizeTooSmall(63)));
        assert_eq!(render_convergence(&[(1, 1.0)], &small), Err(RenderError::SizeTooSmall(63)));
    }

    #[test]
    fn slope_by_hand() {
        // ln v = 2 - (3/2) ln n exactly.
        let series: Vec<(usize, f64)> = [1usize, 4, 16]
            .iter()
            .map(|&n| (n, 2f64.exp() * (n as f64).powf(-1.5)))
            .collect();
        assert!((fit_loglog_slope(&series).unwrap() + 1.5).abs() < 1e-12);
        // Three non-collinear points: x = 0, ln 2, ln 4; y = 0, 0, ln 2.
        // Slope = sum (x - mx)(y - my) / sum (x - mx)^2 = 1/2.
        let s = fit_loglog_slope(&[(1, 1.0), (2, 1.0), (4, 2.0)]).unwrap();
        assert!((s - 0.5).abs() < 1e-12, "{s}");
    }

    #[test]
    fn series_validation() {
        let spec = RenderSpec::default();
        assert_eq!(render_convergence(&[], &spec), Err(RenderError::EmptySeries));
        assert_eq!(
            render_convergence(&[(2, 1.0), (2, 0.5)], &spec),
            Err(RenderError::NonIncreasing { index: 1 })
        );
        assert!(matches!(
            render_convergence(&[(1, 1.0), (2, 0.0)], &spec),
            Err(RenderError::NonPositive { index: 1, .. })
        ));
        assert_eq!(fit_loglog_slope(&[(3, 1.0)]), Err(RenderError::TooFewPoints));
        let svg = render_convergence(&[(1, 1.0)], &spec).unwrap();
        assert!(!svg.contains("slope"));
    }

    #[test]
    fn log_spacing() {
        let p = pack_greedy(StopRule::MaxDiscs(100), 0.99f64, 1e-6).unwrap();
        let s = log_spaced(&p.residual_series(), 10);
        assert_eq!(s.first().unwrap().0, 1);
        assert_eq!(s.last().unwrap().0, 100);
        assert!(s.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
        let svg = render_convergence(&s, &RenderSpec::default()).unwrap();
        assert!(svg.contains("<polyline") && svg.contains("slope = "));
    }
}
