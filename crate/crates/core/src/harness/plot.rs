use super::{BenchRow, RmseCell, RmseMap};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};

/// Heatmap quantity; both take the worse vessel of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    CrossTrack,
    Heading,
}

impl Metric {
    pub fn value(self, cell: &RmseCell) -> f64 {
        match self {
            Self::CrossTrack => cell.cross_track(),
            Self::Heading => cell.heading_deg(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::CrossTrack => "cross-track RMSE [m]",
            Self::Heading => "heading RMSE [deg]",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Self::CrossTrack => "cross_track",
            Self::Heading => "heading",
        }
    }
}

/// Gnuplot `pm3d` layout: `rho v_ref value completed`, one blank line after each
/// `rho` block. Incomplete cells keep their partial value and `completed = 0`.
pub fn write_heatmap_tsv<W: Write>(map: &RmseMap, metric: Metric, mut out: W) -> io::Result<()> {
    writeln!(out, "# {} {}", map.controller, metric.slug())?;
    writeln!(out, "# rho\tv_ref\tvalue\tcompleted")?;
    for (i, rho) in map.rho.iter().enumerate() {
        for (j, v) in map.v_ref.iter().enumerate() {
            let c = map.cell(i, j);
            writeln!(out, "{rho}\t{v}\t{}\t{}", metric.value(c), c.completed as u8)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Piecewise-linear approximation of the viridis colour map over `t` in `[0, 1]`.
fn viridis(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn svg_open(s: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heatmap over `v_ref` (x) and `rho` (y, increasing upwards) with per-cell values
/// and a colour bar. Incomplete cells are grey.
pub fn heatmap_svg(map: &RmseMap, metric: Metric) -> String {
    let (nx, ny) = (map.v_ref.len(), map.rho.len());
    let (cell, left, top) = (56.0, 64.0, 40.0);
    let (pw, ph) = (cell * nx as f64, cell * ny as f64);
    let (w, h) = (left + pw + 110.0, top + ph + 56.0);
    let values: Vec<f64> = map.cells.iter().filter(|c| c.completed).map(|c| metric.value(c)).filter(|v| v.is_finite()).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut s = String::new();
    svg_open(&mut s, w, h);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{} {}</text>"#, left + pw / 2.0, escape(&map.controller), metric.label());
    for i in 0..ny {
        for j in 0..nx {
            let c = map.cell(i, j);
            let v = metric.value(c);
            let (x, y) = (left + cell * j as f64, top + cell * (ny - 1 - i) as f64);
            let fill = if c.completed { viridis((v - lo) / span) } else { "#bbbbbb".to_string() };
            let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/>"#);
            let ink = if c.completed && (v - lo) / span > 0.6 { "black" } else { "white" };
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}" font-size="10">{v:.2}</text>"#, x + cell / 2.0, y + cell / 2.0 + 4.0);
        }
    }
    for (j, v) in map.v_ref.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{v:.1}</text>"#, left + cell * (j as f64 + 0.5), top + ph + 16.0);
    }
    for (i, rho) in map.rho.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{rho:.1}</text>"#, left - 6.0, top + cell * ((ny - 1 - i) as f64 + 0.5) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">v_ref [m/s]</text>"#, left + pw / 2.0, top + ph + 40.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">rho [m]</text>"#, top + ph / 2.0, top + ph / 2.0);
    let (bx, bw, steps) = (left + pw + 24.0, 16.0, 32usize);
    for k in 0..steps {
        let t = 1.0 - (k as f64 + 0.5) / steps as f64;
        let y = top + ph * k as f64 / steps as f64;
        let _ = writeln!(s, r#"<rect x="{bx}" y="{y}" width="{bw}" height="{}" fill="{}"/>"#, ph / steps as f64 + 0.5, viridis(t));
    }
    if lo.is_finite() {
        let _ = writeln!(s, r#"<text x="{}" y="{}">{hi:.2}</text>"#, bx + bw + 4.0, top + 10.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{lo:.2}</text>"#, bx + bw + 4.0, top + ph);
    }
    s.push_str("</svg>\n");
    s
}

/// One named curve of `(x, y)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Mean objective over seeds against fleet size, one curve per spill count and
/// stage. Points are ordered by `k`.
pub fn objective_series(rows: &[BenchRow]) -> Vec<Series> {
    type Stage = (&'static str, fn(&BenchRow) -> f64);
    let stages: [Stage; 4] =
        [("greedy", |r| r.greedy), ("heuristic", |r| r.heuristic), ("bnb_cold", |r| r.bnb_cold), ("bnb_warm", |r| r.bnb_warm)];
    let mut by_p: BTreeMap<usize, BTreeMap<usize, Vec<&BenchRow>>> = BTreeMap::new();
    for r in rows {
        by_p.entry(r.p).or_default().entry(r.k).or_default().push(r);
    }
    let mut out = Vec::new();
    for (p, by_k) in &by_p {
        for (name, f) in stages {
            let points = by_k.iter().map(|(k, rs)| (*k as f64, rs.iter().map(|r| f(r)).sum::<f64>() / rs.len() as f64)).collect();
            out.push(Series { label: format!("p={p} {name}"), points });
        }
    }
    out
}

/// Gnuplot index layout: one `# label` block per series, two blank lines apart.
pub fn write_series_tsv<W: Write>(series: &[Series], x_name: &str, y_name: &str, mut out: W) -> io::Result<()> {
    for (i, s) in series.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# {}", s.label)?;
        writeln!(out, "# {x_name}\t{y_name}")?;
        for (x, y) in &s.points {
            writeln!(out, "{x}\t{y}")?;
        }
    }
    Ok(())
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Line chart with markers, linear axes and a legend.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (left, top, pw, ph) = (80.0, 40.0, 420.0, 280.0);
    let (w, h) = (left + pw + 190.0, top + ph + 60.0);
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        (x0, x1, y0, y1) = (x0.min(x), x1.max(x), y0.min(y), y1.max(y));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        (x0, x1) = (x0 - 0.5, x1 + 0.5);
    }
    let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 0.5 * y0.abs().max(1.0) };
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| left + pw * (x - x0) / (x1 - x0);
    let sy = |y: f64| top + ph * (1.0 - (y - y0) / (y1 - y0));
    let mut s = String::new();
    svg_open(&mut s, w, h);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xv:.1}</text>"#, sx(xv), top + ph + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{yv:.4e}</text>"#, left - 4.0, sy(yv) + 4.0);
        let _ = writeln!(s, r##"<line x1="{left}" x2="{}" y1="{y}" y2="{y}" stroke="#dddddd"/>"##, left + pw, y = sy(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, top + ph + 40.0, escape(x_label));
    let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, top + ph / 2.0, top + ph / 2.0, escape(y_label));
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if (i / PALETTE.len()) % 2 == 1 { r#" stroke-dasharray="5 3""# } else { "" };
        let path: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, path.join(" "));
        for &(x, y) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = top + 12.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, left + pw + 12.0, left + pw + 32.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, left + pw + 38.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> RmseMap {
        let cell = |rho: f64, v_ref: f64, completed: bool| RmseCell {
            rho,
            v_ref,
            completed,
            sim_time: 1.0,
            rmse_cross_track: [rho, v_ref],
            rmse_heading_deg: [1.0, 2.0],
            max_stern_separation: 0.0,
        };
        RmseMap {
            controller: "pid".into(),
            rho: vec![10.0, 20.0],
            v_ref: vec![5.0, 15.0],
            cells: vec![cell(10.0, 5.0, true), cell(10.0, 15.0, true), cell(20.0, 5.0, true), cell(20.0, 15.0, false)],
        }
    }

    #[test]
    fn heatmap_tsv_has_one_block_per_rho() {
        let mut buf = Vec::new();
        write_heatmap_tsv(&map(), Metric::CrossTrack, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let blocks: Vec<&str> = text.trim_end().split("\n\n").collect();
        assert_eq!(blocks.len(), 2);
        assert!(text.contains("10\t15\t15\t1"));
        assert!(text.contains("20\t15\t20\t0"));
    }

    #[test]
    fn heatmap_svg_has_a_rect_per_cell_and_greys_incomplete() {
        let svg = heatmap_svg(&map(), Metric::Heading);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("stroke=\"white\"").count(), 4);
        assert_eq!(svg.matches("#bbbbbb").count(), 1);
    }

    #[test]
    fn viridis_endpoints() {
        assert_eq!(viridis(0.0), "#440154");
        assert_eq!(viridis(1.0), "#fde725");
        assert_eq!(viridis(f64::NAN), "#440154");
    }

    #[test]
    fn series_average_over_seeds_in_k_order() {
        let row = |k: usize, seed: u64, g: f64| BenchRow {
            p: 5,
            k,
            seed,
            greedy: g,
            heuristic: g,
            bnb_cold: g,
            bnb_warm: g,
            lower_bound: 0.0,
            gap_cold: 0.0,
            gap_warm: 0.0,
            nodes_cold: 0,
            nodes_warm: 0,
            cold_stopped: false,
            warm_stopped: false,
            improvement_pct: 0.0,
            wall_time: 0.0,
        };
        let s = objective_series(&[row(2, 0, 4.0), row(1, 0, 10.0), row(2, 1, 6.0)]);
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].label, "p=5 greedy");
        assert_eq!(s[0].points, vec![(1.0, 10.0), (2.0, 5.0)]);
        let svg = line_chart_svg("t", "k", "J", &s);
        assert_eq!(svg.matches("<polyline").count(), 4);
    }
}
