//! Minimal deterministic SVG line charts: linear axes, one polyline per
//! series, legend from the CSV header. A single data row is drawn as point
//! markers.

use std::fmt::Write as _;

use crate::error::{CliError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: [f64; 4] = [60.0, 150.0, 30.0, 50.0]; // left, right, top, bottom
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];
const TICKS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub x_label: String,
    pub series: Vec<String>,
    pub x: Vec<f64>,
    /// `columns[k][i]` is series `k` at row `i`.
    pub columns: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 || header.iter().all(|h| h.is_empty()) {
        return Err(CliError::Input("CSV needs an x column and at least one series".into()));
    }
    let mut x = Vec::new();
    let mut columns = vec![Vec::new(); header.len() - 1];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|v| v.parse::<f64>().ok().filter(|f| f.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::Input(format!("row {}: non-numeric value", line + 2)))?;
        x.push(vals[0]);
        for (k, v) in vals[1..].iter().enumerate() {
            columns[k].push(*v);
        }
    }
    if x.is_empty() {
        return Err(CliError::Input("CSV has no data rows".into()));
    }
    Ok(Table {
        x_label: header[0].clone(),
        series: header[1..].to_vec(),
        x,
        columns,
    })
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(t: &Table) -> String {
    let (x0, x1) = range(t.x.iter().copied());
    let (mut y0, y1) = range(t.columns.iter().flatten().copied());
    if y0 > 0.0 && y0 < 0.25 * y1 {
        y0 = 0.0;
    }
    let [ml, mr, mt, mb] = MARGIN;
    let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
    let sx = |v: f64| ml + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| mt + ph - (v - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{ml:.2}" y="{mt:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#,
            mt + ph,
            mt + ph + 5.0,
            mt + ph + 18.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{ml:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            ml - 5.0,
            ml - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        HEIGHT - 10.0,
        escape(&t.x_label)
    );
    for (k, (name, col)) in t.series.iter().zip(&t.columns).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if t.x.len() == 1 {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"><title>{}</title></circle>"#,
                sx(t.x[0]),
                sy(col[0]),
                escape(name)
            );
        } else {
            let pts: Vec<String> = t.x.iter().zip(col).map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
                pts.join(" "),
                escape(name)
            );
        }
        let ly = mt + 15.0 + 20.0 * k as f64;
        let lx = WIDTH - mr + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}
