//! Minimal self-contained SVG line plots: linear SNR axis, log SER axis.

use std::fmt::Write as _;
use std::path::Path;

use super::output::write_file;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// `(snr_db, value)`.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: Option<String>,
    /// Values at or below this (including 0) are drawn at the floor.
    pub log_floor: f64,
    pub x_label: String,
    pub y_label: String,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: None,
            log_floor: 1e-7,
            x_label: "SNR (dB)".into(),
            y_label: "SER".into(),
        }
    }
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(series: &[Series], options: &PlotOptions) -> Result<String, HarnessError> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(HarnessError::EmptySeries);
    }
    let floor = options.log_floor;
    let all = || series.iter().flat_map(|s| s.points.iter().copied());
    let (mut x_min, mut x_max) = all()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
            (lo.min(x), hi.max(x))
        });
    if x_min == x_max {
        x_min -= 1.0;
        x_max += 1.0;
    }
    let clamp_y = |y: f64| if y > floor { y } else { floor };
    let y_lo = all().map(|(_, y)| clamp_y(y)).fold(f64::INFINITY, f64::min);
    let y_hi = all()
        .map(|(_, y)| clamp_y(y))
        .fold(f64::NEG_INFINITY, f64::max);
    let dec_lo = y_lo.log10().floor();
    let mut dec_hi = y_hi.log10().ceil().max(dec_lo + 1.0);
    if dec_hi <= dec_lo {
        dec_hi = dec_lo + 1.0;
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| TOP + (dec_hi - clamp_y(y).log10()) / (dec_hi - dec_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        "<metadata>log_floor={floor}; values at or below the floor (including 0) are drawn at the floor</metadata>"
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    if let Some(title) = &options.title {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(title)
        );
    }

    // Decade grid and y labels.
    for d in (dec_lo as i32)..=(dec_hi as i32) {
        let y = TOP + (dec_hi - d as f64) / (dec_hi - dec_lo) * plot_h;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    // X ticks at up to ~8 evenly spaced positions.
    let ticks = 8;
    for t in 0..=ticks {
        let x = x_min + (x_max - x_min) * t as f64 / ticks as f64;
        let sx = px(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{sx:.2}" y1="{TOP}" x2="{sx:.2}" y2="{:.2}" stroke="#eee"/><text x="{sx:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 18.0,
            (x * 100.0).round() / 100.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0,
        escape(&options.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&options.y_label)
    );

    for (idx, s) in series.iter().enumerate() {
        let colour = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<g class="series" data-name="{}"><polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            escape(&s.name),
            path.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3" fill="{colour}" data-x="{x}" data-y="{y}"/>"#,
                px(x),
                py(y)
            );
        }
        svg.push_str("</g>\n");

        let ly = TOP + 14.0 + idx as f64 * 18.0;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend-entry"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text></g>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(
    series: &[Series],
    path: &Path,
    options: &PlotOptions,
) -> Result<(), HarnessError> {
    let svg = render_svg(series, options)?;
    write_file(path, &svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str, pts: &[(f64, f64)]) -> Series {
        Series {
            name: name.into(),
            points: pts.to_vec(),
        }
    }

    #[test]
    fn single_point_has_one_marker() {
        let svg = render_svg(&[s("a", &[(10.0, 0.01)])], &PlotOptions::default()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("class=\"marker\"").count(), 1);
    }

    #[test]
    fn legend_follows_input_order() {
        let svg = render_svg(
            &[s("second & <b>", &[(0.0, 0.5)]), s("first", &[(5.0, 0.1)])],
            &PlotOptions::default(),
        )
        .unwrap();
        let entries: Vec<_> = svg.match_indices("class=\"legend-entry\"").collect();
        assert_eq!(entries.len(), 2);
        let a = svg.find(">second &amp; &lt;b&gt;<").unwrap();
        let b = svg.rfind(">first<").unwrap();
        assert!(a < b);
    }

    #[test]
    fn zero_is_drawn_at_floor() {
        let opts = PlotOptions {
            log_floor: 1e-5,
            ..PlotOptions::default()
        };
        let svg = render_svg(&[s("z", &[(0.0, 0.1), (10.0, 0.0)])], &opts).unwrap();
        assert!(svg.contains("log_floor=0.00001"));
        assert!(svg.contains("data-y=\"0\""));
        assert!(svg.contains(">1e-5<"));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(
            render_svg(&[], &PlotOptions::default()),
            Err(HarnessError::EmptySeries)
        ));
        assert!(matches!(
            render_svg(&[s("e", &[])], &PlotOptions::default()),
            Err(HarnessError::EmptySeries)
        ));
    }
}
