use std::fmt::Write as _;

use super::FitResult;

/// `*` p < .05, `**` p < .01, `***` p < .001.
pub fn significance_stars(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.001 => "***",
        Some(p) if p < 0.01 => "**",
        Some(p) if p < 0.05 => "*",
        _ => "",
    }
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "-".into())
}

/// Aligned plain-text parameter table followed by fit statistics.
pub fn render_table(result: &FitResult) -> String {
    let rows: Vec<[String; 7]> = result
        .estimates
        .iter()
        .map(|e| {
            [
                e.name(),
                format!("{:.4}", e.estimate),
                opt(e.se, 4),
                opt(e.z, 2),
                opt(e.p_value, 4),
                significance_stars(e.p_value).to_string(),
                format!("{:.3}", e.standardized),
            ]
        })
        .collect();
    let header = ["parameter", "estimate", "se", "z", "p", "", "std"];
    let mut width = header.map(str::len);
    for r in &rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: [&str; 7]| {
        let _ = write!(out, "{:<w$}", cells[0], w = width[0]);
        for (i, c) in cells.iter().enumerate().skip(1) {
            if i == 5 {
                let _ = write!(out, " {:<w$}", c, w = width[i]);
            } else {
                let _ = write!(out, "  {:>w$}", c, w = width[i]);
            }
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    };
    line(&mut out, header);
    for r in &rows {
        line(&mut out, [&r[0], &r[1], &r[2], &r[3], &r[4], &r[5], &r[6]]);
    }
    let s = &result.statistics;
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "N = {}  p = {}  free = {}  F_ML = {:.6}",
        s.n_cases, s.n_observed, s.n_free, s.discrepancy
    );
    let _ = writeln!(
        out,
        "chi-square = {:.3}  df = {}  RMSEA = {}  CFI = {}",
        s.chi_square,
        s.df,
        opt(s.rmsea, 4),
        opt(s.cfi, 4)
    );
    let c = &result.convergence;
    let _ = writeln!(
        out,
        "converged = {}  iterations = {}  gradient max-norm = {:.2e}",
        c.converged, c.iterations, c.gradient_norm
    );
    for w in &result.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stars() {
        assert_eq!(significance_stars(Some(0.0005)), "***");
        assert_eq!(significance_stars(Some(0.005)), "**");
        assert_eq!(significance_stars(Some(0.03)), "*");
        assert_eq!(significance_stars(Some(0.2)), "");
        assert_eq!(significance_stars(None), "");
    }
}
