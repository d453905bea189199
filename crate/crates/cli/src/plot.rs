//! Deterministic SVG line charts of results CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use mmlink::montecarlo::fmt_sig6;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    /// CSV column used as the x axis.
    pub x: String,
    pub x_label: String,
    pub y_label: String,
}

impl PlotSpec {
    pub fn for_column(x: &str) -> Self {
        let x_label = match x {
            "k_factor_db" => "K-factor [dB]",
            "velocity_kmh" => "Velocity [km/h]",
            "snr_db" => "SNR [dB]",
            "pilot_k_p" => "Pilot symbols K_P",
            other => other,
        };
        PlotSpec {
            x: x.to_string(),
            x_label: x_label.to_string(),
            y_label: "SE [bit/s/Hz]".to_string(),
        }
    }
}

/// One polyline; points keep the CSV text so values round-trip exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub method: String,
    pub pilot_k_p: Option<usize>,
    pub points: Vec<(String, String)>,
}

impl Series {
    fn numeric(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|(x, y)| (x.parse().unwrap_or(f64::NAN), y.parse().unwrap_or(f64::NAN)))
            .collect()
    }
}

const KEY_COLUMNS: [&str; 3] = ["k_factor_db", "velocity_kmh", "snr_db"];

/// Picks the first of `k_factor_db, velocity_kmh, snr_db` that varies.
pub fn default_x_column(csv_text: &str) -> Result<String> {
    let (headers, rows) = read_rows(csv_text)?;
    for key in KEY_COLUMNS {
        if let Some(i) = headers.iter().position(|h| h == key) {
            let mut values: Vec<&str> = rows.iter().map(|r| r[i].as_str()).collect();
            values.sort_unstable();
            values.dedup();
            if values.len() > 1 {
                return Ok(key.to_string());
            }
        }
    }
    Ok(KEY_COLUMNS[0].to_string())
}

fn read_rows(csv_text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_text.as_bytes());
    let headers: Vec<String> = reader.headers().context("reading CSV header")?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec.context("reading CSV row")?.iter().map(String::from).collect());
    }
    Ok((headers, rows))
}

/// Groups rows into series keyed by method and pilot pattern (plus any other
/// varying parameter). Perfect-CSI rows are merged across patterns by taking
/// the mean at each x.
pub fn build_series(csv_text: &str, spec: &PlotSpec) -> Result<Vec<Series>> {
    let (headers, rows) = read_rows(csv_text)?;
    if rows.is_empty() {
        bail!("CSV has no data rows");
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("unknown column `{name}`"))
    };
    let xi = col(&spec.x)?;
    let mi = col("method")?;
    let ki = col("pilot_k_p")?;
    let yi = col("se_mean")?;
    let others: Vec<(usize, &str)> = KEY_COLUMNS
        .iter()
        .filter(|k| **k != spec.x)
        .filter_map(|k| headers.iter().position(|h| h == k).map(|i| (i, *k)))
        .filter(|(i, _)| {
            let mut v: Vec<&str> = rows.iter().map(|r| r[*i].as_str()).collect();
            v.sort_unstable();
            v.dedup();
            v.len() > 1
        })
        .collect();

    // (method rank, k_p, extra) -> x -> y values
    type Key = (usize, String, usize, String);
    let mut groups: BTreeMap<Key, Vec<(String, Vec<String>)>> = BTreeMap::new();
    for r in &rows {
        let method = r[mi].clone();
        let perfect = method == "perfect";
        let k_p: usize = if perfect {
            0
        } else {
            r[ki].parse().with_context(|| format!("bad pilot_k_p `{}`", r[ki]))?
        };
        let extra = others
            .iter()
            .map(|(i, name)| format!(" {name}={}", r[*i]))
            .collect::<String>();
        let rank = match method.as_str() {
            "conventional" => 0,
            "ooba-mrc" => 1,
            "perfect" => 2,
            _ => 3,
        };
        let entry = groups.entry((rank, method, k_p, extra)).or_default();
        match entry.iter_mut().find(|(x, _)| *x == r[xi]) {
            Some((_, ys)) => ys.push(r[yi].clone()),
            None => entry.push((r[xi].clone(), vec![r[yi].clone()])),
        }
    }

    let mut out = Vec::new();
    for ((_, method, k_p, extra), mut pts) in groups {
        for (x, _) in &pts {
            x.parse::<f64>().with_context(|| format!("non-numeric x value `{x}`"))?;
        }
        pts.sort_by(|a, b| {
            let (xa, xb): (f64, f64) = (a.0.parse().unwrap(), b.0.parse().unwrap());
            xa.partial_cmp(&xb).unwrap_or(std::cmp::Ordering::Equal)
        });
        let points = pts
            .into_iter()
            .map(|(x, ys)| -> Result<(String, String)> {
                if ys.len() == 1 {
                    return Ok((x, ys.into_iter().next().unwrap()));
                }
                let vals = ys
                    .iter()
                    .map(|y| y.parse::<f64>().with_context(|| format!("non-numeric se_mean `{y}`")))
                    .collect::<Result<Vec<f64>>>()?;
                Ok((x, fmt_sig6(vals.iter().sum::<f64>() / vals.len() as f64)))
            })
            .collect::<Result<Vec<_>>>()?;
        let perfect = method == "perfect";
        let label = if perfect {
            format!("perfect CSI{extra}")
        } else {
            format!("{method} K_P={k_p}{extra}")
        };
        out.push(Series {
            label,
            method,
            pilot_k_p: (!perfect).then_some(k_p),
            points,
        });
    }
    Ok(out)
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn color(method: &str) -> &'static str {
    match method {
        "conventional" => "#1f77b4",
        "ooba-mrc" => "#d62728",
        "perfect" => "#000000",
        _ => "#7f7f7f",
    }
}

fn dash(k_p: Option<usize>) -> &'static str {
    match k_p {
        Some(1) | None => "",
        Some(2) => " stroke-dasharray=\"8 4\"",
        Some(4) => " stroke-dasharray=\"2 3\"",
        _ => " stroke-dasharray=\"10 3 2 3\"",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the series as an 800×500 SVG. Each series is preceded by a
/// comment carrying its data points verbatim.
pub fn render_svg(series: &[Series], spec: &PlotSpec) -> Result<String> {
    if series.is_empty() {
        bail!("nothing to plot");
    }
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.numeric()).collect();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (0.0f64, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if x_hi <= x_lo {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    let y_ticks = nice_ticks(y_lo, y_hi.max(y_lo + 1e-9));
    let y_step = if y_ticks.len() > 1 { y_ticks[1] - y_ticks[0] } else { 1.0 };
    if y_ticks.last().is_none_or(|t| *t < y_hi) {
        y_hi = y_ticks.last().map_or(y_hi, |t| t + y_step);
    } else {
        y_hi = *y_ticks.last().unwrap();
    }
    let y_ticks: Vec<f64> = nice_ticks(y_lo, y_hi);
    let x_ticks = nice_ticks(x_lo, x_hi);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<!-- x-column: {} -->", escape(&spec.x));
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        s,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#000000\"/>",
        MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h
    );
    for t in &x_ticks {
        let x = px(*t);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            MARGIN_TOP + plot_h + 18.0,
            fmt_sig6(*t)
        );
    }
    for t in &y_ticks {
        let y = py(*t);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            MARGIN_LEFT - 6.0,
            y + 4.0,
            fmt_sig6(*t)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&spec.y_label)
    );

    for (i, ser) in series.iter().enumerate() {
        let data = ser
            .points
            .iter()
            .map(|(x, y)| format!("{x},{y}"))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(s, "<!-- series label=\"{}\" data=\"{}\" -->", escape(&ser.label), data);
        let pts = ser
            .numeric()
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let c = color(&ser.method);
        let _ = writeln!(
            s,
            "<polyline points=\"{pts}\" fill=\"none\" stroke=\"{c}\" stroke-width=\"1.8\"{}/>",
            dash(ser.pilot_k_p)
        );
        for &(x, y) in &ser.numeric() {
            let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{c}\"/>", px(x), py(y));
        }
        let ly = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{c}\" stroke-width=\"1.8\"{}/>",
            lx + 28.0,
            dash(ser.pilot_k_p)
        );
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", lx + 34.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Recovers `(label, points)` from the data comments of a rendered SVG.
pub fn extract_series(svg: &str) -> Vec<(String, Vec<(String, String)>)> {
    let mut out = Vec::new();
    for line in svg.lines() {
        let Some(rest) = line.strip_prefix("<!-- series label=\"") else {
            continue;
        };
        let Some((label, rest)) = rest.split_once("\" data=\"") else {
            continue;
        };
        let Some((data, _)) = rest.split_once("\" -->") else {
            continue;
        };
        let points = data
            .split(';')
            .filter(|p| !p.is_empty())
            .filter_map(|p| p.split_once(',').map(|(x, y)| (x.to_string(), y.to_string())))
            .collect();
        let label = label
            .replace("&quot;", "\"")
            .replace("&gt;", ">")
            .replace("&lt;", "<")
            .replace("&amp;", "&");
        out.push((label, points));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        assert_eq!(nice_ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(nice_ticks(-20.0, 30.0), vec![-20.0, -10.0, 0.0, 10.0, 20.0, 30.0]);
    }
}
