//! Self-contained SVG box plots, one box per team size.

use std::fmt::Write as _;

use crate::stats::Summary64;
use crate::sweep::Row;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Score,
    Efficiency,
}

impl Metric {
    pub fn parse(name: &str) -> Result<Metric, PlotError> {
        match name {
            "score" => Ok(Metric::Score),
            "efficiency" => Ok(Metric::Efficiency),
            other => Err(PlotError::UnknownMetric(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Score => "score",
            Metric::Efficiency => "efficiency",
        }
    }

    fn value(self, r: &Row) -> Option<f64> {
        match self {
            Metric::Score => Some(f64::from(r.score)),
            Metric::Efficiency => r.efficiency,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PlotError {
    #[error("no data to plot")]
    EmptyData,
    #[error("unknown metric {0:?}, expected score or efficiency")]
    UnknownMetric(String),
}

/// Box statistics with Tukey whiskers at 1.5 IQR.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxStats {
    pub summary: Summary64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    let summary = Summary64::of(values)?;
    let lo = summary.q1 - 1.5 * summary.iqr();
    let hi = summary.q3 + 1.5 * summary.iqr();
    let inside = values.iter().copied().filter(|v| (lo..=hi).contains(v));
    let whisker_lo = inside.clone().fold(f64::INFINITY, f64::min);
    let whisker_hi = inside.fold(f64::NEG_INFINITY, f64::max);
    let mut outliers: Vec<f64> = values.iter().copied().filter(|v| !(lo..=hi).contains(v)).collect();
    outliers.sort_by(f64::total_cmp);
    Some(BoxStats { summary, whisker_lo, whisker_hi, outliers })
}

const W: f64 = 520.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn nice_max(m: f64) -> f64 {
    if m <= 1.0 {
        1.0
    } else {
        m.ceil()
    }
}

pub fn render_boxplot(rows: &[Row], metric: Metric) -> Result<String, PlotError> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.players).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let boxes: Vec<(usize, BoxStats)> = sizes
        .iter()
        .filter_map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.players == n).filter_map(|r| metric.value(r)).collect();
            box_stats(&v).map(|b| (n, b))
        })
        .collect();
    if boxes.is_empty() {
        return Err(PlotError::EmptyData);
    }
    let y_max = match metric {
        Metric::Score => 25.0,
        Metric::Efficiency => nice_max(boxes.iter().map(|(_, b)| b.summary.max).fold(0.5, f64::max)),
    };
    let plot_h = H - TOP - BOTTOM;
    let plot_w = W - LEFT - RIGHT;
    let y = |v: f64| TOP + plot_h * (1.0 - v / y_max);
    let slot = plot_w / boxes.len() as f64;
    let half = (slot * 0.3).min(40.0);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, metric.name());
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}" stroke="black"/>"#, TOP + plot_h);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#, TOP + plot_h, LEFT + plot_w, TOP + plot_h);
    let ticks = 5;
    for i in 0..=ticks {
        let v = y_max * i as f64 / ticks as f64;
        let yy = y(v);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{yy:.1}" x2="{LEFT}" y2="{yy:.1}" stroke="black"/>"#, LEFT - 4.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, LEFT - 6.0, yy + 4.0);
    }
    if metric == Metric::Efficiency {
        let yy = y(0.5);
        let _ = writeln!(
            s,
            r#"<line class="reference" x1="{LEFT}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="grey" stroke-dasharray="6,4"/>"#,
            LEFT + plot_w
        );
    }
    for (i, (n, b)) in boxes.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let m = &b.summary;
        let _ = writeln!(s, r#"<g class="box" data-players="{n}">"#);
        let _ = writeln!(s, r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#, y(b.whisker_hi), y(m.q3));
        let _ = writeln!(s, r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#, y(m.q1), y(b.whisker_lo));
        for w in [b.whisker_lo, b.whisker_hi] {
            let _ = writeln!(s, r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#, cx - half / 2.0, y(w), cx + half / 2.0, y(w));
        }
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#9ecae1" stroke="black"/>"##,
            cx - half,
            y(m.q3),
            2.0 * half,
            (y(m.q1) - y(m.q3)).max(0.0)
        );
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#, cx - half, y(m.median), cx + half, y(m.median));
        for o in &b.outliers {
            let _ = writeln!(s, r#"<circle cx="{cx:.1}" cy="{:.1}" r="2.5" fill="none" stroke="black"/>"#, y(*o));
        }
        let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{n}</text>"#, TOP + plot_h + 18.0);
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">players</text>"#, LEFT + plot_w / 2.0, H - 10.0);
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(players: usize, score: u8, hints: u32) -> Row {
        Row {
            players,
            seed: 0,
            score,
            hints,
            efficiency: crate::sweep::efficiency(score, hints),
            turns: 0,
            aic_installed: 0,
            aic_retracted: 0,
            violations: 0,
            wall_ms: None,
        }
    }

    #[test]
    fn efficiency_plot_has_the_reference_line() {
        let svg = render_boxplot(&[row(2, 20, 40), row(3, 18, 9)], Metric::Efficiency).unwrap();
        assert!(svg.contains(r#"class="reference""#) && svg.contains("stroke-dasharray"));
        let score = render_boxplot(&[row(2, 20, 40)], Metric::Score).unwrap();
        assert!(!score.contains("stroke-dasharray"));
    }

    #[test]
    fn single_game_boxes_are_degenerate_but_valid() {
        let svg = render_boxplot(&[row(2, 10, 5), row(4, 12, 6)], Metric::Score).unwrap();
        assert_eq!(svg.matches(r#"class="box""#).count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn errors() {
        assert_eq!(render_boxplot(&[], Metric::Score), Err(PlotError::EmptyData));
        assert_eq!(render_boxplot(&[row(2, 5, 0)], Metric::Efficiency), Err(PlotError::EmptyData));
        assert_eq!(Metric::parse("lives"), Err(PlotError::UnknownMetric("lives".into())));
    }

    #[test]
    fn whiskers_stop_at_the_last_point_inside_the_fence() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!((b.whisker_lo, b.whisker_hi), (1.0, 4.0));
    }
}
