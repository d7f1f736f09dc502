//! Summaries over experiment outputs, with optional SVG plots.

use std::collections::BTreeMap;
use std::path::Path;

use qperc_core::learn::{records_from_csv, ExperimentRecord, RECORD_HEADER};
use qperc_core::num::fixed;
use qperc_core::prior::{rank_plot, PriorHistogram};

use crate::config::ExperimentConfig;
use crate::run::{read_input, RunError, RunResult, Writer};

const VERDICT_HEADER: &str = "function_index,generator_tag,expressible,margin";

#[derive(Default)]
struct Acc {
    runs: usize,
    train: f64,
    test: f64,
    test_sq: f64,
}

impl Acc {
    fn add(&mut self, r: &ExperimentRecord) {
        self.runs += 1;
        self.train += r.train_error;
        self.test += r.test_error;
        self.test_sq += r.test_error * r.test_error;
    }

    fn mean_test(&self) -> f64 {
        self.test / self.runs as f64
    }

    fn stderr_test(&self) -> f64 {
        if self.runs < 2 {
            return 0.0;
        }
        let n = self.runs as f64;
        let var = (self.test_sq - self.test * self.test / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Generator family without its parameter, e.g. `fixed-count`.
fn family(tag: &str) -> &str {
    tag.split(':').next().unwrap_or(tag)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().replace('.', "-"))
}

pub fn run(config: &ExperimentConfig, out: &mut Writer) -> RunResult<()> {
    let mut records = Vec::new();
    let mut verdicts: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
    let mut histograms = Vec::new();
    for path in &config.inputs {
        let text = read_input(path)?;
        let first = text.lines().next().unwrap_or("").trim();
        if first.is_empty() {
            continue;
        }
        if first == RECORD_HEADER {
            records.extend(records_from_csv(&text).map_err(|e| RunError::Invalid(format!("{}: {e}", path.display())))?);
        } else if first == VERDICT_HEADER {
            for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
                let f: Vec<&str> = line.split(',').collect();
                let expressible = match f.get(2) {
                    Some(&"true") => 1,
                    Some(&"false") => 0,
                    _ => return Err(RunError::Invalid(format!("{}: bad verdict row {line:?}", path.display()))),
                };
                let e = verdicts.entry((stem(path), family(f[1]).to_string())).or_default();
                e.0 += 1;
                e.1 += expressible;
            }
        } else if first.starts_with('#') {
            let hist =
                PriorHistogram::from_text(&text).map_err(|e| RunError::Invalid(format!("{}: {e}", path.display())))?;
            histograms.push((stem(path), hist));
        } else {
            return Err(RunError::Invalid(format!("{}: unrecognised header {first:?}", path.display())));
        }
    }

    let mut groups: BTreeMap<(String, String, String), Acc> = BTreeMap::new();
    let mut by_lz: BTreeMap<(String, String, String), Acc> = BTreeMap::new();
    let mut by_balance: BTreeMap<(String, String, String), Acc> = BTreeMap::new();
    for r in &records {
        let key = |x: String| (r.model.clone(), r.encoding.clone(), x);
        groups.entry(key(r.generator_tag.clone())).or_default().add(r);
        // fixed-point text keeps the grouping exact and sortable per series
        by_lz.entry(key(fixed(r.lz))).or_default().add(r);
        by_balance.entry(key(fixed(r.class_balance))).or_default().add(r);
    }

    let mut summary =
        String::from("model,encoding,generator_tag,runs,mean_train_error,mean_test_error,stderr_test_error\n");
    for ((model, enc, tag), a) in &groups {
        summary.push_str(&format!(
            "{model},{enc},{tag},{},{},{},{}\n",
            a.runs,
            fixed(a.train / a.runs as f64),
            fixed(a.mean_test()),
            fixed(a.stderr_test())
        ));
    }
    out.write("summary.csv", &summary)?;
    let series_csv = |name: &str, map: &BTreeMap<(String, String, String), Acc>| {
        let mut rows: Vec<(&String, &String, f64, &Acc)> =
            map.iter().map(|((m, e, x), a)| (m, e, x.parse::<f64>().unwrap_or(f64::NAN), a)).collect();
        rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut csv = format!("model,encoding,{name},runs,mean_test_error\n");
        for (m, e, x, a) in &rows {
            csv.push_str(&format!("{m},{e},{},{},{}\n", fixed(*x), a.runs, fixed(a.mean_test())));
        }
        (csv, rows.iter().map(|(m, e, x, a)| (format!("{m}/{e}"), *x, a.mean_test())).collect::<Vec<_>>())
    };
    let (lz_csv, lz_points) = series_csv("lz", &by_lz);
    out.write("error-vs-lz.csv", &lz_csv)?;
    let (bal_csv, bal_points) = series_csv("class_balance", &by_balance);
    out.write("error-vs-balance.csv", &bal_csv)?;

    if !verdicts.is_empty() {
        let mut csv = String::from("source,generator_family,functions,expressible\n");
        for ((source, fam), (total, yes)) in &verdicts {
            csv.push_str(&format!("{source},{fam},{total},{yes}\n"));
        }
        out.write("expressible.csv", &csv)?;
    }

    for (name, hist) in &histograms {
        let ranks = rank_plot(hist).map_err(|e| RunError::Invalid(format!("{name}: {e}")))?;
        let mut csv = String::from("rank,probability\n");
        for (r, p) in &ranks {
            csv.push_str(&format!("{r},{}\n", fixed(*p)));
        }
        out.write(&format!("rank-{name}.csv",), &csv)?;
        if config.svg {
            let pts: Vec<(String, f64, f64)> = ranks.iter().map(|&(r, p)| (name.clone(), r as f64, p)).collect();
            out.write(&format!("rank-{name}.svg"), &svg_scatter(&pts, "rank", "probability"))?;
        }
    }
    if config.svg {
        out.write("error-vs-lz.svg", &svg_scatter(&lz_points, "LZ complexity", "mean test error"))?;
        out.write("error-vs-balance.svg", &svg_scatter(&bal_points, "class balance", "mean test error"))?;
    }
    Ok(())
}

const COLOURS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

/// Plain scatter plot on linear axes; one colour per series, points drawn as given.
pub fn svg_scatter(points: &[(String, f64, f64)], x_label: &str, y_label: &str) -> String {
    let (w, h, pad) = (640.0, 420.0, 50.0);
    let finite = |v: f64| v.is_finite();
    let xs: Vec<f64> = points.iter().map(|p| p.1).filter(|&v| finite(v)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2).filter(|&v| finite(v)).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let ((x0, x1), (y0, y1)) = (range(&xs), range(&ys));
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut series: Vec<&str> = points.iter().map(|p| p.0.as_str()).collect();
    series.dedup();
    series.sort_unstable();
    series.dedup();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <line x1=\"{pad}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{ly}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"14\" y=\"{cy}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {cy})\">{y_label}</text>\n\
         <text x=\"{pad}\" y=\"{ty}\" text-anchor=\"middle\">{x0:.3}</text>\n\
         <text x=\"{r}\" y=\"{ty}\" text-anchor=\"middle\">{x1:.3}</text>\n\
         <text x=\"{lx}\" y=\"{b}\" text-anchor=\"end\">{y0:.3}</text>\n\
         <text x=\"{lx}\" y=\"{pad}\" text-anchor=\"end\">{y1:.3}</text>\n",
        b = h - pad,
        r = w - pad,
        cx = w / 2.0,
        ly = h - 10.0,
        cy = h / 2.0,
        ty = h - pad + 15.0,
        lx = pad - 4.0,
    );
    for (k, name) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{colour}\">{name}</text>\n",
            w - pad - 150.0,
            pad + 14.0 * k as f64
        ));
        for p in points.iter().filter(|p| p.0 == *name && finite(p.1) && finite(p.2)) {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{colour}\"/>\n",
                sx(p.1),
                sy(p.2)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
