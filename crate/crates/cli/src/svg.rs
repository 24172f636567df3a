//! Standalone SVG 1.1 figures.
//!
//! Coordinates are written with two decimals and every element is emitted
//! in input order, so the same data always produce the same bytes.

use std::fmt::Write;

use survkit::km::KmCurve;
use survkit::report::{format_coef, format_number, format_p_value};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const FONT: &str = "Helvetica, Arial, sans-serif";

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Doc {
    body: String,
    width: f64,
    height: f64,
}

impl Doc {
    fn new(width: f64, height: f64) -> Self {
        let mut d = Self { body: String::new(), width, height };
        d.raw(&format!(r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, num(width), num(height)));
        d
    }

    fn raw(&mut self, s: &str) {
        self.body.push_str(s);
        self.body.push('\n');
    }

    #[allow(clippy::too_many_arguments)]
    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, dash: bool) {
        let dash = if dash { r#" stroke-dasharray="4 3""# } else { "" };
        self.raw(&format!(
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(width)
        ));
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        self.raw(&format!(
            r#"<text x="{}" y="{}" font-family="{FONT}" font-size="{}" text-anchor="{anchor}">{}</text>"#,
            num(x),
            num(y),
            num(size),
            escape(s)
        ));
    }

    fn vertical_text(&mut self, x: f64, y: f64, size: f64, s: &str) {
        self.raw(&format!(
            r#"<text x="{0}" y="{1}" font-family="{FONT}" font-size="{2}" text-anchor="middle" transform="rotate(-90 {0} {1})">{3}</text>"#,
            num(x),
            num(y),
            num(size),
            escape(s)
        ));
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body,
            w = num(self.width),
            h = num(self.height)
        )
    }
}

/// Round tick spacing (1, 2 or 5 times a power of ten) giving at most
/// `max_ticks` intervals over `[0, span]`.
fn tick_step(span: f64, max_ticks: usize) -> f64 {
    if span.is_nan() || span <= 0.0 {
        return 1.0;
    }
    let raw = span / max_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

pub struct KmSeries<'a> {
    pub label: String,
    pub curve: &'a KmCurve,
}

/// A smooth model curve drawn over the step functions.
pub struct FittedCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct KmPanel<'a> {
    pub title: String,
    pub series: Vec<KmSeries<'a>>,
    pub fitted: Vec<FittedCurve>,
    pub note: Option<String>,
}

const PANEL_W: f64 = 520.0;
const PLOT_L: f64 = 70.0;
const PLOT_R: f64 = 490.0;
const PLOT_T: f64 = 50.0;
const PLOT_B: f64 = 290.0;

fn panel_height(max_series: usize) -> f64 {
    PLOT_B + 70.0 + 16.0 * max_series as f64 + 10.0
}

/// Step survival curves with confidence bands and a number-at-risk table.
pub fn km_figure(panels: &[KmPanel<'_>]) -> String {
    let rows = panels.iter().map(|p| p.series.len()).max().unwrap_or(1).max(1);
    let mut doc = Doc::new(PANEL_W * panels.len().max(1) as f64, panel_height(rows));
    for (i, panel) in panels.iter().enumerate() {
        doc.raw(&format!(r#"<g transform="translate({},0)">"#, num(PANEL_W * i as f64)));
        draw_km_panel(&mut doc, panel);
        doc.raw("</g>");
    }
    doc.finish()
}

fn draw_km_panel(doc: &mut Doc, panel: &KmPanel<'_>) {
    let t_max = panel.series.iter().map(|s| s.curve.max_time()).fold(0.0, f64::max);
    let step = tick_step(t_max, 8);
    let x_end = (t_max / step).ceil().max(1.0) * step;
    let x = |t: f64| PLOT_L + (PLOT_R - PLOT_L) * t / x_end;
    let y = |s: f64| PLOT_B - (PLOT_B - PLOT_T) * s;

    doc.text((PLOT_L + PLOT_R) / 2.0, 24.0, 15.0, "middle", &panel.title);
    // axes and grid
    doc.line(PLOT_L, PLOT_B, PLOT_R, PLOT_B, "#000000", 1.0, false);
    doc.line(PLOT_L, PLOT_T, PLOT_L, PLOT_B, "#000000", 1.0, false);
    for k in 0..=4 {
        let s = k as f64 / 4.0;
        doc.line(PLOT_L - 4.0, y(s), PLOT_L, y(s), "#000000", 1.0, false);
        doc.text(PLOT_L - 7.0, y(s) + 4.0, 11.0, "end", &format_number(s));
    }
    let ticks = (x_end / step).round() as usize;
    for k in 0..=ticks {
        let t = step * k as f64;
        doc.line(x(t), PLOT_B, x(t), PLOT_B + 4.0, "#000000", 1.0, false);
        doc.text(x(t), PLOT_B + 16.0, 11.0, "middle", &format_number(t));
    }
    doc.text((PLOT_L + PLOT_R) / 2.0, PLOT_B + 34.0, 12.0, "middle", "Time (months)");
    doc.vertical_text(22.0, (PLOT_T + PLOT_B) / 2.0, 12.0, "Survival probability");

    for (i, s) in panel.series.iter().enumerate() {
        let c = s.curve;
        let col = color(i);
        // band: upper edge forward, lower edge back
        let mut band = format!("M {} {}", num(x(0.0)), num(y(1.0)));
        for k in 0..c.event_times.len() {
            let _ = write!(band, " H {} V {}", num(x(c.event_times[k])), num(y(c.ci_upper[k])));
        }
        let _ = write!(band, " H {}", num(x(c.max_time())));
        let last_lower = c.ci_lower.last().copied().unwrap_or(1.0);
        let _ = write!(band, " V {}", num(y(last_lower)));
        for k in (0..c.event_times.len()).rev() {
            let before = if k == 0 { 1.0 } else { c.ci_lower[k - 1] };
            let _ = write!(band, " H {} V {}", num(x(c.event_times[k])), num(y(before)));
        }
        band.push_str(" Z");
        doc.raw(&format!(r#"<path d="{band}" fill="{col}" fill-opacity="0.15" stroke="none"/>"#));

        let mut path = format!("M {} {}", num(x(0.0)), num(y(1.0)));
        for k in 0..c.event_times.len() {
            let _ = write!(path, " H {} V {}", num(x(c.event_times[k])), num(y(c.survival[k])));
        }
        let _ = write!(path, " H {}", num(x(c.max_time())));
        doc.raw(&format!(r#"<path d="{path}" fill="none" stroke="{col}" stroke-width="2"/>"#));
    }

    for (j, f) in panel.fitted.iter().enumerate() {
        let col = color(panel.series.len() + j);
        let pts: Vec<String> = f.points.iter().map(|&(t, s)| format!("{},{}", num(x(t)), num(y(s)))).collect();
        doc.raw(&format!(
            r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.5" stroke-dasharray="6 3"/>"#,
            pts.join(" ")
        ));
    }

    // legend, top right
    let entries: Vec<(&str, &str, bool)> = panel
        .series
        .iter()
        .enumerate()
        .map(|(i, s)| (s.label.as_str(), color(i), false))
        .chain(panel.fitted.iter().enumerate().map(|(j, f)| (f.label.as_str(), color(panel.series.len() + j), true)))
        .collect();
    for (i, (label, col, dashed)) in entries.iter().enumerate() {
        let ly = PLOT_T + 12.0 + 16.0 * i as f64;
        doc.line(PLOT_R - 170.0, ly - 4.0, PLOT_R - 150.0, ly - 4.0, col, 2.0, *dashed);
        doc.text(PLOT_R - 145.0, ly, 11.0, "start", label);
    }
    if let Some(note) = &panel.note {
        doc.text(PLOT_L + 10.0, PLOT_B - 10.0, 11.0, "start", note);
    }

    // number at risk
    let table_top = PLOT_B + 56.0;
    doc.text(8.0, table_top, 11.0, "start", "Number at risk");
    for (i, s) in panel.series.iter().enumerate() {
        let ry = table_top + 16.0 * (i + 1) as f64;
        doc.raw(&format!(
            r#"<rect x="8" y="{}" width="10" height="10" fill="{}"/>"#,
            num(ry - 9.0),
            color(i)
        ));
        for k in 0..=ticks {
            let t = step * k as f64;
            doc.text(x(t), ry, 11.0, "middle", &s.curve.at_risk_at(t).to_string());
        }
    }
}

pub struct ForestRow {
    pub label: String,
    pub hazard_ratio: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
}

/// Hazard ratios with 95% intervals on a log axis, reference line at 1.
pub fn forest_plot(title: &str, rows: &[ForestRow]) -> String {
    let (left, right, top) = (190.0, 550.0, 60.0);
    let row_h = 28.0;
    let height = top + row_h * rows.len() as f64 + 60.0;
    let mut doc = Doc::new(760.0, height);

    let finite = |v: f64| v.is_finite() && v > 0.0;
    let mut lo = rows.iter().map(|r| r.ci_lower).filter(|v| finite(*v)).fold(1.0, f64::min);
    let mut hi = rows.iter().map(|r| r.ci_upper).filter(|v| finite(*v)).fold(1.0, f64::max);
    lo = 10f64.powf((lo.log10() * 3.0).floor() / 3.0).min(0.5);
    hi = 10f64.powf((hi.log10() * 3.0).ceil() / 3.0).max(2.0);
    let x = |v: f64| left + (right - left) * (v.clamp(lo, hi).ln() - lo.ln()) / (hi.ln() - lo.ln());
    let bottom = top + row_h * rows.len() as f64;

    doc.text(380.0, 28.0, 15.0, "middle", title);
    doc.text(right + 100.0, top - 14.0, 11.0, "middle", "HR (95% CI)");
    doc.text(right + 190.0, top - 14.0, 11.0, "end", "p");
    doc.line(left, bottom, right, bottom, "#000000", 1.0, false);
    let mut decade = 10f64.powf(lo.log10().floor());
    while decade <= hi * 1.0001 {
        for m in [1.0, 2.0, 5.0] {
            let v = m * decade;
            if v >= lo * 0.9999 && v <= hi * 1.0001 {
                doc.line(x(v), bottom, x(v), bottom + 4.0, "#000000", 1.0, false);
                doc.text(x(v), bottom + 16.0, 11.0, "middle", &format_number(v));
            }
        }
        decade *= 10.0;
    }
    doc.text((left + right) / 2.0, bottom + 36.0, 12.0, "middle", "Hazard ratio (log scale)");
    doc.line(x(1.0), top - 6.0, x(1.0), bottom, "#555555", 1.0, true);

    for (i, r) in rows.iter().enumerate() {
        let cy = top + row_h * (i as f64 + 0.5);
        doc.raw(r#"<g class="estimate">"#);
        doc.text(left - 12.0, cy + 4.0, 12.0, "end", &r.label);
        doc.line(x(r.ci_lower), cy, x(r.ci_upper), cy, "#000000", 1.5, false);
        doc.raw(&format!(
            r##"<rect x="{}" y="{}" width="8" height="8" fill="#1f4e79"/>"##,
            num(x(r.hazard_ratio) - 4.0),
            num(cy - 4.0)
        ));
        doc.text(
            right + 100.0,
            cy + 4.0,
            11.0,
            "middle",
            &format!("{} ({} - {})", format_coef(r.hazard_ratio), format_coef(r.ci_lower), format_coef(r.ci_upper)),
        );
        doc.text(right + 190.0, cy + 4.0, 11.0, "end", &format_p_value(r.p_value));
        doc.raw("</g>");
    }
    doc.finish()
}

/// Bar histogram over explicit bin edges, with the mean marked.
pub fn histogram(title: &str, x_label: &str, edges: &[f64], counts: &[u64], mean: f64, sd: f64) -> String {
    let (left, right, top, bottom) = (70.0, 590.0, 50.0, 330.0);
    let mut doc = Doc::new(640.0, 390.0);
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let x = |v: f64| left + (right - left) * (v - lo) / (hi - lo);
    let c_max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let c_step = tick_step(c_max, 5);
    let c_end = (c_max / c_step).ceil() * c_step;
    let y = |c: f64| bottom - (bottom - top) * c / c_end;

    doc.text((left + right) / 2.0, 26.0, 15.0, "middle", title);
    doc.line(left, bottom, right, bottom, "#000000", 1.0, false);
    doc.line(left, top, left, bottom, "#000000", 1.0, false);
    for k in 0..=((c_end / c_step).round() as usize) {
        let c = c_step * k as f64;
        doc.line(left - 4.0, y(c), left, y(c), "#000000", 1.0, false);
        doc.text(left - 7.0, y(c) + 4.0, 11.0, "end", &format_number(c));
    }
    for (i, &c) in counts.iter().enumerate() {
        doc.raw(&format!(
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#4c72b0" stroke="#ffffff" stroke-width="0.5"/>"##,
            num(x(edges[i])),
            num(y(c as f64)),
            num(x(edges[i + 1]) - x(edges[i])),
            num(bottom - y(c as f64))
        ));
    }
    let x_step = tick_step(hi - lo, 8);
    let mut t = (lo / x_step).ceil() * x_step;
    while t <= hi + 1e-9 * x_step {
        doc.line(x(t), bottom, x(t), bottom + 4.0, "#000000", 1.0, false);
        doc.text(x(t), bottom + 16.0, 11.0, "middle", &format_number(t));
        t += x_step;
    }
    doc.line(x(mean), top, x(mean), bottom, "#d62728", 1.5, true);
    doc.text(right, top + 4.0, 11.0, "end", &format!("mean {}, sd {}", format_number(mean), format_number(sd)));
    doc.text((left + right) / 2.0, bottom + 36.0, 12.0, "middle", x_label);
    doc.vertical_text(22.0, (top + bottom) / 2.0, 12.0, "Patients");
    doc.finish()
}
