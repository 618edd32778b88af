//! Scatter exports (CSV and SVG) and JSON report writing.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trec_io::Category;

/// One test system's actual and estimated value for one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub run_tag: String,
    pub category: Category,
    pub metric: String,
    pub actual: f64,
    pub estimated: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScatterExport {
    pub rows: Vec<ScatterRow>,
}

pub const SCATTER_HEADER: &str = "run_tag,category,metric,actual,estimated";

impl ScatterExport {
    pub fn metrics(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.metric.as_str()) {
                out.push(&r.metric);
            }
        }
        out
    }

    pub fn rows_for<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a ScatterRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SCATTER_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.run_tag, r.category, r.metric, r.actual, r.estimated
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        let mut header = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if !header {
                if line != SCATTER_HEADER {
                    return Err(Error::Parse {
                        source_name: "scatter".into(),
                        line: line_no,
                        message: format!("expected header {SCATTER_HEADER:?}"),
                    });
                }
                header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let bad = |message: String| Error::Parse {
                source_name: "scatter".into(),
                line: line_no,
                message,
            };
            if cols.len() != 5 {
                return Err(bad(format!("expected 5 columns, found {}", cols.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("bad number {s:?}")))
            };
            rows.push(ScatterRow {
                run_tag: cols[0].to_string(),
                category: cols[1].parse().map_err(|e: Error| bad(e.to_string()))?,
                metric: cols[2].to_string(),
                actual: num(cols[3])?,
                estimated: num(cols[4])?,
            });
        }
        Ok(ScatterExport { rows })
    }

    /// Renders one metric's rows as an SVG scatter plot with the `y = x`
    /// reference line. Traditional systems are grey, neural black, other
    /// blue.
    pub fn to_svg(&self, metric: &str, title: &str) -> String {
        const SIZE: f64 = 360.0;
        const MARGIN: f64 = 48.0;
        let plot = SIZE - 2.0 * MARGIN;
        let rows: Vec<&ScatterRow> = self.rows_for(metric).collect();
        let hi = rows.iter().flat_map(|r| [r.actual, r.estimated]).fold(0.0f64, f64::max);
        let hi = if hi <= 0.0 { 1.0 } else { (hi * 10.0).ceil() / 10.0 };
        let sx = |v: f64| MARGIN + v / hi * plot;
        let sy = |v: f64| SIZE - MARGIN - v / hi * plot;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
            SIZE / 2.0,
            escape(title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 3"/>"#,
            sx(0.0),
            sy(0.0),
            sx(hi),
            sy(hi)
        );
        for tick in 0..=4 {
            let v = hi * f64::from(tick) / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#,
                sx(v),
                SIZE - MARGIN + 14.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
                MARGIN - 4.0,
                sy(v) + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">actual {}</text>"#,
            SIZE / 2.0,
            SIZE - 10.0,
            escape(metric)
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(12 {}) rotate(-90)" text-anchor="middle">estimated {}</text>"#,
            SIZE / 2.0,
            escape(metric)
        );
        for r in rows {
            let color = match r.category {
                Category::Traditional => "#999999",
                Category::Neural => "#000000",
                Category::Other => "#1f77b4",
            };
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"><title>{}</title></circle>"#,
                sx(r.actual),
                sy(r.estimated),
                escape(&r.run_tag)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
