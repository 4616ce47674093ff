//! Minimal SVG line charts for experiment reports (data-only plotting).

/// One polyline: a label and (x, y) pairs.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Renders series as an SVG line chart. `log_y` plots log10(y), which suits
/// error-vs-order curves spanning decades.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);

    let tx = |v: f64| v;
    let ty = |v: f64| if log_y { v.max(1e-300).log10() } else { v };

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(tx(x));
            ys.push(ty(y));
        }
    }
    if xs.is_empty() {
        return format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\"/>");
    }
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let yspan = if y1 > y0 { y1 - y0 } else { 1.0 };
    let px = |v: f64| ml + (tx(v) - x0) / xspan * pw;
    let py = |v: f64| mt + ph - (ty(v) - y0) / yspan * ph;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#333\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        ml + pw / 2.0,
        title
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        ml + pw / 2.0,
        h - 12.0,
        x_label
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        mt + ph / 2.0,
        mt + ph / 2.0,
        if log_y { format!("log10 {y_label}") } else { y_label.to_string() }
    ));

    // axis ticks: 5 per axis
    for t in 0..=4 {
        let fx = x0 + xspan * t as f64 / 4.0;
        let fy = y0 + yspan * t as f64 / 4.0;
        let sx = ml + pw * t as f64 / 4.0;
        let sy = mt + ph - ph * t as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{sx}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n",
            mt + ph + 16.0,
            fx
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\n",
            ml - 6.0,
            sy + 4.0,
            fy
        ));
        svg.push_str(&format!(
            "<line x1=\"{ml}\" y1=\"{sy}\" x2=\"{}\" y2=\"{sy}\" stroke=\"#ddd\"/>\n",
            ml + pw
        ));
    }

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{},{}", px(x), py(y))).collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
        for &(x, y) in &s.points {
            svg.push_str(&format!("<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\"/>\n", px(x), py(y)));
        }
        let ly = mt + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            w - mr + 10.0,
            w - mr + 30.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            w - mr + 34.0,
            ly + 4.0,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
