use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const PANEL: f64 = 400.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 50.0, 50.0);
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Series of one panel: name and (ε, value) points.
struct Series {
    name: &'static str,
    points: Vec<(f64, f64)>,
}

struct Columns {
    eps: Vec<f64>,
    rel_gap: Vec<Option<f64>>,
    recovery: Vec<Option<f64>>,
    altmin: Vec<Option<f64>>,
    predicted: Vec<Option<f64>>,
}

fn parse(csv_text: &str) -> Result<Columns, PlotError> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| PlotError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PlotError::Parse {
                line: 1,
                message: format!("missing column {name}"),
            })
    };
    let idx = [
        col("eps")?,
        col("rel_gap")?,
        col("recovery_energy")?,
        col("altmin_energy")?,
        col("predicted_limit")?,
    ];
    let mut c = Columns {
        eps: vec![],
        rel_gap: vec![],
        recovery: vec![],
        altmin: vec![],
        predicted: vec![],
    };
    for record in reader.records() {
        let record = record.map_err(|e| PlotError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |k: usize| -> Result<Option<f64>, PlotError> {
            let s = record.get(idx[k]).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| PlotError::Parse {
                line,
                message: format!("not a number: {s:?}"),
            })
        };
        let eps = field(0)?.ok_or_else(|| PlotError::Parse {
            line,
            message: "empty eps".into(),
        })?;
        c.eps.push(eps);
        c.rel_gap.push(field(1)?);
        c.recovery.push(field(2)?);
        c.altmin.push(field(3)?);
        c.predicted.push(field(4)?);
    }
    Ok(c)
}

fn series(name: &'static str, eps: &[f64], values: &[Option<f64>]) -> Series {
    let points = eps
        .iter()
        .zip(values)
        .filter_map(|(&e, v)| v.map(|v| (e, v)))
        .filter(|&(e, v)| e > 0.0 && v > 0.0 && e.is_finite() && v.is_finite())
        .collect();
    Series { name, points }
}

/// Power-of-ten range covering the values.
fn decades(values: impl Iterator<Item = f64>) -> Option<(i32, i32)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return None;
    }
    let lo = lo.log10().floor() as i32;
    let hi = (hi.log10().ceil() as i32).max(lo + 1);
    Some((lo, hi))
}

fn panel(svg: &mut String, x0: f64, title: &str, all: &[Series]) {
    let (ml, mr, mt, mb) = MARGIN;
    let (w, h) = (PANEL - ml - mr, HEIGHT - mt - mb);
    let (left, top) = (x0 + ml, mt);
    let _ = write!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/><text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text><text x="{}" y="{}" text-anchor="middle" font-size="12">ε</text>"#,
        left + w / 2.0,
        top - 15.0,
        escape(title),
        left + w / 2.0,
        top + h + 38.0,
    );
    let xs = decades(all.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let ys = decades(all.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (Some((x_lo, x_hi)), Some((y_lo, y_hi))) = (xs, ys) else {
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14" fill="gray">no data</text>"#,
            left + w / 2.0,
            top + h / 2.0
        );
        return;
    };
    let px = |x: f64| left + (x.log10() - x_lo as f64) / (x_hi - x_lo) as f64 * w;
    let py = |y: f64| top + h - (y.log10() - y_lo as f64) / (y_hi - y_lo) as f64 * h;
    for k in x_lo..=x_hi {
        let x = px(10f64.powi(k));
        let _ = write!(
            svg,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle" font-size="11">1e{k}</text>"#,
            top + h,
            top + h + 5.0,
            top + h + 18.0
        );
    }
    for k in y_lo..=y_hi {
        let y = py(10f64.powi(k));
        let _ = write!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end" font-size="11">1e{k}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
    }
    for (i, s) in all.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if s.points.is_empty() {
            continue;
        }
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = write!(
            svg,
            r#"<polyline class="series" data-name="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            s.name,
            path.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = write!(
                svg,
                r#"<circle class="marker" data-series="{}" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                s.name,
                px(x),
                py(y)
            );
        }
        let ly = top + 14.0 + 16.0 * i as f64;
        let _ = write!(
            svg,
            r#"<circle cx="{}" cy="{}" r="4" fill="{color}"/><text x="{}" y="{}" font-size="11">{}</text>"#,
            left + 10.0,
            ly - 4.0,
            left + 18.0,
            ly,
            s.name
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Log-log chart of rel_gap and energies against ε from a sweep CSV.
pub fn emit_plot(csv_text: &str, title: Option<&str>) -> Result<String, PlotError> {
    let c = parse(csv_text)?;
    let gaps = [series("rel_gap", &c.eps, &c.rel_gap)];
    let energies = [
        series("recovery_energy", &c.eps, &c.recovery),
        series("altmin_energy", &c.eps, &c.altmin),
        series("predicted_limit", &c.eps, &c.predicted),
    ];
    let mut svg = format!(
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{}" font-family="sans-serif">"#,
        HEIGHT + 30.0
    );
    if let Some(t) = title {
        let _ = write!(
            svg,
            r#"<text x="{}" y="18" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(t)
        );
    }
    let _ = write!(svg, r#"<g transform="translate(0,20)">"#);
    panel(&mut svg, 40.0, "relative gap", &gaps);
    panel(&mut svg, 40.0 + PANEL + 60.0, "energy", &energies);
    svg.push_str("</g></svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "eps,eta,h,regime,recovery_energy,altmin_energy,predicted_limit,rel_gap,error\n";

    fn six_rows() -> String {
        let mut s = HEADER.to_string();
        for k in 0..6 {
            let e = 0.1 * 0.5f64.powi(k);
            s += &format!(
                "{e:e},{e:e},{:e},hencky_plasticity,{:e},,2.5e0,{:e},\n",
                e * e,
                2.5 + e,
                e / 2.5
            );
        }
        s
    }

    fn markers(svg: &str, name: &str) -> usize {
        svg.matches(&format!(r#"class="marker" data-series="{name}""#))
            .count()
    }

    #[test]
    fn six_rows_give_six_markers_per_series() {
        let svg = emit_plot(&six_rows(), Some("sweep")).unwrap();
        assert_eq!(markers(&svg, "rel_gap"), 6);
        assert_eq!(markers(&svg, "recovery_energy"), 6);
        assert_eq!(markers(&svg, "predicted_limit"), 6);
        assert_eq!(markers(&svg, "altmin_energy"), 0);
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn output_is_deterministic() {
        assert_eq!(
            emit_plot(&six_rows(), None).unwrap(),
            emit_plot(&six_rows(), None).unwrap()
        );
    }

    #[test]
    fn empty_data_has_axes_and_label() {
        let svg = emit_plot(HEADER, None).unwrap();
        assert_eq!(svg.matches("no data").count(), 2);
        assert!(svg.contains("<rect"));
        assert_eq!(svg.matches("class=\"marker\"").count(), 0);
    }

    #[test]
    fn malformed_number_reports_its_line() {
        let text = format!(
            "{HEADER}1e-1,1e-1,1e-2,elasticity,1,,1,0,\n5e-2,x,1e-3,elasticity,oops,,1,0,\n"
        );
        match emit_plot(&text, None) {
            Err(PlotError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_row_reports_its_line() {
        let text = format!("{HEADER}1e-1,1e-1\n");
        assert!(matches!(
            emit_plot(&text, None),
            Err(PlotError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn missing_column_is_an_error() {
        assert!(emit_plot("eps,rel_gap\n0.1,0.2\n", None).is_err());
    }
}
