use crate::estimators::GridPoint;

/// Minimal line plot with CI band, one polyline per series.
pub fn curve_svg(points: &[GridPoint], title: &str) -> String {
    let (w, h, ml, mb) = (640.0f64, 400.0f64, 60.0f64, 40.0f64);
    let mut series: Vec<&str> = Vec::new();
    for p in points {
        if !series.contains(&p.series.as_str()) {
            series.push(&p.series);
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.parameter).collect();
    let lo_y = points
        .iter()
        .map(|p| p.mean - p.ci_half_width)
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let hi_y = points
        .iter()
        .map(|p| p.mean + p.ci_half_width)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(lo_y + 1e-9);
    let lo_x = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_x = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span_x = (hi_x - lo_x).max(1e-9);
    let to_x = |v: f64| ml + (v - lo_x) / span_x * (w - ml - 20.0);
    let to_y = |v: f64| (h - mb) - (v - lo_y) / (hi_y - lo_y) * (h - mb - 30.0);

    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut body = String::new();
    for (si, name) in series.iter().enumerate() {
        let color = palette[si % palette.len()];
        let mut pts: Vec<&GridPoint> = points.iter().filter(|p| p.series == *name).collect();
        pts.sort_by(|a, b| a.parameter.partial_cmp(&b.parameter).unwrap());
        // CI band
        let mut band = String::from("M");
        for p in &pts {
            band.push_str(&format!(
                " {:.2},{:.2}",
                to_x(p.parameter),
                to_y(p.mean + p.ci_half_width)
            ));
        }
        for p in pts.iter().rev() {
            band.push_str(&format!(
                " L {:.2},{:.2}",
                to_x(p.parameter),
                to_y(p.mean - p.ci_half_width)
            ));
        }
        body.push_str(&format!(
            "<path d=\"{band} Z\" fill=\"{color}\" opacity=\"0.15\" stroke=\"none\"/>\n"
        ));
        // mean polyline
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", to_x(p.parameter), to_y(p.mean)))
            .collect();
        body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            line.join(" ")
        ));
        body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\" font-size=\"12\">{name}</text>\n",
            w - 150.0,
            20.0 + 14.0 * si as f64
        ));
    }
    // axes
    body.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#333\"/>\n",
        h - mb,
        w - 20.0
    ));
    body.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"30\" x2=\"{ml}\" y2=\"{}\" stroke=\"#333\"/>\n",
        h - mb
    ));
    for (v, label_y) in [(lo_y, h - mb), (hi_y, 30.0)] {
        body.push_str(&format!(
            "<text x=\"4\" y=\"{label_y}\" font-size=\"11\">{v:.3}</text>\n"
        ));
    }
    for (v, label_x) in [(lo_x, ml), (hi_x, w - 40.0)] {
        body.push_str(&format!(
            "<text x=\"{label_x}\" y=\"{}\" font-size=\"11\">{v:.2}</text>\n",
            h - mb + 16.0
        ));
    }
    body.push_str(&format!(
        "<text x=\"{}\" y=\"18\" font-size=\"13\" text-anchor=\"middle\">{title}</text>\n",
        w / 2.0
    ));
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{body}</svg>\n"
    )
}
