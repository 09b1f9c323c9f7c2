use std::fmt::Write;

use super::stats::rolling_mean;
use super::HarnessError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Smallest "nice" step (1, 2 or 5 times a power of ten) giving at most
/// `max_ticks` intervals over `span`.
fn nice_step(span: f64, max_ticks: usize) -> f64 {
    let raw = span / max_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Standalone SVG of per-episode scores with a trailing rolling mean.
pub fn score_svg(title: &str, scores: &[f64], window: usize) -> Result<String, HarnessError> {
    if scores.is_empty() {
        return Err(HarnessError::NoEpisodes);
    }
    if window == 0 {
        return Err(HarnessError::BadArgument("window must be at least 1".into()));
    }
    let rolling = rolling_mean(scores, window);
    let n = scores.len();
    let y_max = scores.iter().copied().fold(0.0, f64::max).max(1.0);
    let y_step = nice_step(y_max, 6);
    let y_top = (y_max / y_step).ceil() * y_step;
    let x_span = (n.max(2) - 1) as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |i: usize| LEFT + plot_w * (i as f64) / x_span;
    let py = |v: f64| TOP + plot_h * (1.0 - v / y_top);
    let points = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i), py(v)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r#"<g class="axes" stroke="black">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/>"#, TOP + plot_h);
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="ticks">"#);
    for k in 0..=(y_top / y_step).round() as usize {
        let v = (k as f64 * y_step * 1e6).round() / 1e6;
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{v}</text>"##,
            LEFT - 5.0,
            LEFT + plot_w,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let x_step = nice_step(n as f64, 8).max(1.0) as usize;
    let ticks = std::iter::once(1).chain((x_step..=n).step_by(x_step).filter(|&e| e > 1));
    for ep in ticks {
        let x = px(ep - 1);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{ep}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Episode</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">Score</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let _ = writeln!(
        s,
        r##"<polyline class="score" fill="none" stroke="#7aa6d6" stroke-width="1" points="{}"/>"##,
        points(scores)
    );
    let _ = writeln!(
        s,
        r##"<polyline class="rolling" fill="none" stroke="#d62728" stroke-width="2" points="{}"/>"##,
        points(&rolling)
    );

    let lx = LEFT + plot_w - 190.0;
    let _ = writeln!(s, r#"<g class="legend">"#);
    let _ = writeln!(
        s,
        r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#7aa6d6"/><text x="{}" y="{}">Score per episode</text>"##,
        TOP + 10.0,
        lx + 25.0,
        TOP + 10.0,
        lx + 30.0,
        TOP + 14.0
    );
    let _ = writeln!(
        s,
        r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#d62728" stroke-width="2"/><text x="{}" y="{}">Rolling mean ({window})</text>"##,
        TOP + 28.0,
        lx + 25.0,
        TOP + 28.0,
        lx + 30.0,
        TOP + 32.0
    );
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyline_points(svg: &str, class: &str) -> Vec<(f64, f64)> {
        let tag = format!(r#"class="{class}""#);
        let line = svg.lines().find(|l| l.contains(&tag)).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        pts.split(' ')
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect()
    }

    #[test]
    fn one_vertex_per_episode() {
        let scores: Vec<f64> = (0..137).map(|i| f64::from(i % 40) * 10.0).collect();
        let svg = score_svg("t", &scores, 50).unwrap();
        assert_eq!(polyline_points(&svg, "score").len(), 137);
        assert_eq!(polyline_points(&svg, "rolling").len(), 137);
    }

    #[test]
    fn constant_scores_give_flat_rolling_line() {
        let svg = score_svg("flat", &[250.0; 20], 5).unwrap();
        let pts = polyline_points(&svg, "rolling");
        assert!(pts.iter().all(|p| p.1 == pts[0].1));
        assert_eq!(pts, polyline_points(&svg, "score"));
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(score_svg("x", &[], 50), Err(HarnessError::NoEpisodes)));
    }

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(1800.0, 6), 500.0);
        assert_eq!(nice_step(10.0, 8), 2.0);
    }
}
