use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::CSV_HEADER;
use crate::error::{Error, Result};
use crate::exactlinalg::parse_rational;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// A named polyline.
pub type Series = (String, Vec<(f64, f64)>);

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Line chart as a standalone SVG document. The plotted points are repeated in a
/// leading comment so the figure can be regenerated from the file alone.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|(_, v)| v.iter());
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    s.push_str("<!-- data\n");
    for (name, v) in series {
        for (x, y) in v {
            let _ = writeln!(s, "{},{x:.6},{y:.6}", name.replace("--", "-"));
        }
    }
    s.push_str("-->\n");
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        esc(title)
    );
    let (bx, by) = (sx(x0), sy(y0));
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN} {MARGIN} L{MARGIN} {by} L{} {by}" fill="none" stroke="black"/>"#,
        W - MARGIN
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text>"#,
            sx(fx),
            by + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{fy:.3}</text>"#,
            bx - 6.0,
            sy(fy) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        esc(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(y_label)
    );
    for (k, (name, v)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let d: Vec<String> = v
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            d.join(" ")
        );
        for &(x, y) in v {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly:.1}" fill="{color}" text-anchor="end">{}</text>"#,
            W - MARGIN,
            esc(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn value(name: &str, cell: &str) -> Result<f64> {
    if cell.contains('/') {
        let r = parse_rational(cell)?;
        return num_traits::ToPrimitive::to_f64(&r)
            .ok_or_else(|| Error::invalid(format!("{name}: {cell} is not representable")));
    }
    cell.parse()
        .map_err(|_| Error::invalid(format!("{name}: cannot parse {cell:?}")))
}

/// Reads an `aggregate.csv` and writes `accept_rate.svg` and `queries.svg` into
/// `out_dir`, one series per (tester, input, p). The x axis is `eps`, or `eps2` for
/// tolerant rows.
pub fn emit_plots(csv: &str, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut lines = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::invalid("not an aggregate CSV: header mismatch")),
    }
    let cols: Vec<&str> = CSV_HEADER.split(',').collect();
    let at = |name: &str| cols.iter().position(|c| *c == name).expect("known column");
    let mut rate: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut queries: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::invalid(format!("malformed row: {line}")));
        }
        let xcell = if f[at("eps")].is_empty() {
            f[at("eps2")]
        } else {
            f[at("eps")]
        };
        if xcell.is_empty() {
            continue;
        }
        let x = value("eps", xcell)?;
        let key = format!(
            "{} / {} / p={}",
            f[at("tester")],
            f[at("input")],
            f[at("p")]
        );
        rate.entry(key.clone())
            .or_default()
            .push((x, value("accept_rate", f[at("accept_rate")])?));
        queries
            .entry(key)
            .or_default()
            .push((x, value("mean_queries", f[at("mean_queries")])?));
    }
    if rate.is_empty() {
        return Err(Error::invalid("no plottable rows"));
    }
    let finish = |m: BTreeMap<String, Vec<(f64, f64)>>| -> Vec<Series> {
        m.into_iter()
            .map(|(k, mut v)| {
                v.sort_by(|a, b| a.0.total_cmp(&b.0));
                (k, v)
            })
            .collect()
    };
    fs::create_dir_all(out_dir)?;
    let a = out_dir.join("accept_rate.svg");
    let q = out_dir.join("queries.svg");
    fs::write(
        &a,
        render_svg("Acceptance rate", "eps", "accept rate", &finish(rate)),
    )?;
    fs::write(
        &q,
        render_svg("Queries per trial", "eps", "mean queries", &finish(queries)),
    )?;
    Ok(vec![a, q])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_from_csv() {
        let csv = format!(
            "# lattest-aggregate v1\n{CSV_HEADER}\n\
             integer,far,1/4,1/3,,,,1,10,2,0.200000,0.1,0.3,9.000,9,9,1\n\
             integer,far,1/8,1/3,,,,1,10,5,0.500000,0.1,0.3,30.000,30,30,1\n"
        );
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plots(&csv, dir.path()).unwrap();
        let svg = fs::read_to_string(&files[0]).unwrap();
        assert!(svg.contains("integer / far / p=1,0.125000,0.500000"));
        assert!(svg.contains("<polyline"));
        assert!(emit_plots("x,y\n", dir.path()).is_err());
    }
}
