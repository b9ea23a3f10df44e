//! SVG and CSV output for p-value plots. Output is a pure function of the
//! plot, classification and style, so identical inputs give identical bytes.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plot::{PValuePlot, PlotClassification, PlotConfig};

pub const CSV_HEADER: &str = "rank,label,p_value,below_alpha,negative_effect";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Svg,
    Csv,
}

pub fn render_plot(
    plot: &PValuePlot,
    classification: &PlotClassification,
    config: &PlotConfig,
    format: RenderFormat,
) -> Result<Vec<u8>> {
    match format {
        RenderFormat::Svg => render_svg(plot, classification, config).map(String::into_bytes),
        RenderFormat::Csv => Ok(render_csv(plot).into_bytes()),
    }
}

pub fn render_csv(plot: &PValuePlot) -> String {
    let mut out = String::with_capacity(64 * (plot.n + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for pt in &plot.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            pt.rank,
            csv_field(&pt.label),
            pt.p,
            pt.p < plot.alpha,
            pt.negative_effect
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Rank tick spacing giving at most about ten labels.
fn rank_tick_step(n: usize) -> usize {
    [1, 2, 5, 10, 20, 25, 50, 100, 200, 250, 500, 1000]
        .into_iter()
        .find(|step| n / step <= 10)
        .unwrap_or_else(|| n.div_ceil(10))
}

pub fn render_svg(plot: &PValuePlot, classification: &PlotClassification, config: &PlotConfig) -> Result<String> {
    let style = &config.style;
    if style.width == 0 || style.height == 0 {
        return Err(Error::Config("render width and height must be positive".into()));
    }
    if 2 * style.margin >= style.width.min(style.height) {
        return Err(Error::Config("render margin leaves no room for the plot area".into()));
    }
    let (w, h, m) = (style.width as f64, style.height as f64, style.margin as f64);
    let plot_w = w - 2.0 * m;
    let plot_h = h - 2.0 * m;
    let n = plot.n.max(1) as f64;
    let sx = |rank: f64| m + rank / n * plot_w;
    let sy = |p: f64| h - m - p * plot_h;
    let r = style.point_radius;
    let fs = style.font_size;
    let font = xml_escape(&style.font_family);

    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"##,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, style.width, style.height);
    if let Some(title) = &style.title {
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-family="{font}" font-size="{}" text-anchor="middle">{}</text>"##,
            w / 2.0,
            m / 2.0,
            fs + 2,
            xml_escape(title)
        );
    }

    // Axes.
    let _ = writeln!(s, r##"<g class="axes" stroke="#000000" stroke-width="1" fill="none">"##);
    let _ = writeln!(s, r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"##, sx(0.0), sy(0.0), sx(n), sy(0.0));
    let _ = writeln!(s, r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"##, sx(0.0), sy(0.0), sx(0.0), sy(1.0));
    let step = rank_tick_step(plot.n);
    let mut tick = 0;
    while tick <= plot.n {
        let x = sx(tick as f64);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"##, sy(0.0), sy(0.0) + 5.0);
        tick += step;
    }
    for i in 0..=10 {
        let y = sy(i as f64 / 10.0);
        let _ = writeln!(s, r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"##, sx(0.0) - 5.0, sx(0.0));
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g class="tick-labels" font-family="{font}" font-size="{fs}" fill="#000000">"##);
    let mut tick = 0;
    while tick <= plot.n {
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{tick}</text>"##,
            sx(tick as f64),
            sy(0.0) + 8.0 + fs as f64
        );
        tick += step;
    }
    for i in (0..=10).step_by(2) {
        let p = i as f64 / 10.0;
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{p:.1}</text>"##,
            sx(0.0) - 8.0,
            sy(p) + fs as f64 / 3.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r##"<text class="axis-label" x="{:.2}" y="{:.2}" font-family="{font}" font-size="{fs}" text-anchor="middle">Rank</text>"##,
        m + plot_w / 2.0,
        h - m / 4.0
    );
    let _ = writeln!(
        s,
        r##"<text class="axis-label" x="{:.2}" y="{:.2}" font-family="{font}" font-size="{fs}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">p-value</text>"##,
        m / 3.0,
        m + plot_h / 2.0,
        m / 3.0,
        m + plot_h / 2.0
    );

    // p = rank/n reference and the α rule.
    let _ = writeln!(
        s,
        r##"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1" stroke-dasharray="6 4"/>"##,
        sx(0.0),
        sy(0.0),
        sx(n),
        sy(1.0),
        xml_escape(&style.reference_color)
    );
    let _ = writeln!(
        s,
        r##"<line class="alpha" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1"/>"##,
        sx(0.0),
        sy(plot.alpha),
        sx(n),
        sy(plot.alpha),
        xml_escape(&style.alpha_color)
    );

    let _ = writeln!(s, r##"<g class="points">"##);
    for pt in &plot.points {
        let (x, y) = (sx(pt.rank as f64), sy(pt.p));
        let label = xml_escape(&pt.label);
        if pt.negative_effect {
            let _ = writeln!(
                s,
                r##"<path class="point negative" d="M {x:.2} {:.2} L {:.2} {y:.2} L {x:.2} {:.2} L {:.2} {y:.2} Z" fill="{}"><title>{label}: p = {}</title></path>"##,
                y - 1.4 * r,
                x + 1.4 * r,
                y + 1.4 * r,
                x - 1.4 * r,
                xml_escape(&style.negative_color),
                pt.p
            );
        } else {
            let _ = writeln!(
                s,
                r##"<circle class="point" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{}"><title>{label}: p = {}</title></circle>"##,
                xml_escape(&style.point_color),
                pt.p
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let d = &classification.diagnostics;
    let _ = writeln!(
        s,
        r##"<text class="summary" x="{:.2}" y="{:.2}" font-family="{font}" font-size="{fs}">n = {}; {} below {}; {}; KS D = {:.4}, p = {:.4}</text>"##,
        m + 8.0,
        m + fs as f64,
        plot.n,
        plot.n_below_alpha,
        plot.alpha,
        classification.verdict,
        d.ks_statistic,
        d.ks_p
    );
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plot::{build_plot, classify_plot, PlotEntry};

    fn single() -> (PValuePlot, PlotClassification) {
        let plot = build_plot(&[PlotEntry::new("only", 0.5).unwrap()], 0.05).unwrap();
        let c = classify_plot(&plot, &PlotConfig::default()).unwrap();
        (plot, c)
    }

    #[test]
    fn single_point_has_one_marker() {
        let (plot, c) = single();
        let svg = render_svg(&plot, &c, &PlotConfig::default()).unwrap();
        assert_eq!(svg.matches(r##"<circle class="point""##).count(), 1);
        assert_eq!(svg.matches(r##"class="point negative""##).count(), 0);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn zero_dimension_is_a_config_error() {
        let (plot, c) = single();
        let mut cfg = PlotConfig::default();
        cfg.style.width = 0;
        assert!(matches!(render_plot(&plot, &c, &cfg, RenderFormat::Svg), Err(Error::Config(_))));
    }

    #[test]
    fn csv_layout() {
        let mut neg = PlotEntry::new("Hosein 1989, boys", 0.0046).unwrap();
        neg.negative_effect = true;
        let plot = build_plot(&[neg, PlotEntry::new("plain", 0.3).unwrap()], 0.05).unwrap();
        let csv = render_csv(&plot);
        assert_eq!(
            csv,
            "rank,label,p_value,below_alpha,negative_effect\n1,\"Hosein 1989, boys\",0.0046,true,true\n2,plain,0.3,false,false\n"
        );
    }

    #[test]
    fn escapes_markup_in_labels_and_title() {
        let plot = build_plot(&[PlotEntry::new("a<b>&c", 0.4).unwrap()], 0.05).unwrap();
        let c = classify_plot(&plot, &PlotConfig::default()).unwrap();
        let mut cfg = PlotConfig::default();
        cfg.style.title = Some("R&D".into());
        let svg = render_svg(&plot, &c, &cfg).unwrap();
        assert!(svg.contains("a&lt;b&gt;&amp;c"));
        assert!(svg.contains("R&amp;D"));
    }

    #[test]
    fn tick_steps() {
        assert_eq!(rank_tick_step(1), 1);
        assert_eq!(rank_tick_step(13), 2);
        assert_eq!(rank_tick_step(27), 5);
        assert_eq!(rank_tick_step(1000), 100);
    }
}
