//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use chrono::{Days, NaiveDate};
use hfsem::datamodel::{
    ingest_climate, CensusAreaId, DateWindow, Label, LabelRecord, QuestionId,
};
use hfsem::indicators::{aggregate_county, aggregate_daily, normalize, read_indicators, RecodingScheme};
use hfsem::scoring::{score_with, ScoreMethod};
use hfsem::sem::{
    fit, implied_covariance, ml_discrepancy, ml_gradient, standardize, FitOptions, ModelSpec,
    ObservedTable, ParameterVector, SampleMoments, DEFAULT_MODEL,
};
use hfsem::synth::{
    county_fips, generate_labels, generate_observations, random_parameters, sign_pattern_truth,
    stream_rng, uniform, LabelSynthConfig,
};
use nalgebra::{DMatrix, DVector};

type Outcome = Result<String, String>;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn default_model() -> ModelSpec {
    ModelSpec::parse(DEFAULT_MODEL).unwrap()
}

fn topologies() -> Vec<(&'static str, ModelSpec)> {
    [
        ("one-factor", "f =~ a b c"),
        ("two-latent", "x =~ a b\ny =~ c d\ny ~ x"),
        ("three-outcome", "x =~ a b c\ny1 =~ d e f\ny2 =~ g*free h i =1@h\ny3 =~ j k\ny1 ~ x\ny2 ~ x\ny3 ~ x"),
        ("five-outcome", "x =~ a b c d\ny1 =~ e f g\ny2 =~ h i\ny3 =~ j k l m\ny4 =~ n o p\ny5 =~ q r s\ny1 ~ x\ny2 ~ x\ny3 ~ x\ny4 ~ x\ny5 ~ x"),
        ("default", DEFAULT_MODEL),
    ]
    .iter()
    .map(|(n, t)| (*n, ModelSpec::parse(t).unwrap()))
    .collect()
}

fn score(label: Label) -> f64 {
    match label {
        Label::NotPresent => 0.0,
        Label::Low => -1.0,
        Label::Medium => 0.5,
        Label::High => 1.0,
    }
}

/// (county, question) → related-only mean, in one pass over the records.
fn brute_force(records: &[LabelRecord], window: DateWindow) -> BTreeMap<(String, String), Option<f64>> {
    let mut acc: BTreeMap<(String, String), (f64, u64)> = BTreeMap::new();
    for r in records.iter().filter(|r| window.contains(r.day)) {
        let e = acc.entry((r.area.county().to_string(), r.question.to_string())).or_default();
        e.0 += score(r.label);
        e.1 += (r.label != Label::NotPresent) as u64;
    }
    acc.into_iter().map(|(k, (s, n))| (k, (n > 0).then(|| s / n as f64))).collect()
}

fn criterion_1() -> Outcome {
    let qs = ["happiness", "hope", "trust", "anxiety", "purpose"];
    let mut cfg = LabelSynthConfig::uniform(1, 60, &qs, 34);
    cfg.questions[2].probabilities = [0.85, 0.05, 0.05, 0.05];
    let records = generate_labels(&cfg).map_err(|e| e.to_string())?;
    let window = DateWindow::study();
    let start = Instant::now();
    let m = normalize(&aggregate_county(&aggregate_daily(&records, &RecodingScheme::default()), window))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let oracle = brute_force(&records, window);
    let mut mismatches = 0;
    for ((c, q), v) in &oracle {
        let got = m.value(&hfsem::CountyId::new(c.as_str()).unwrap(), q);
        if got.map(f64::to_bits) != v.map(f64::to_bits) {
            mismatches += 1;
        }
    }
    check(
        records.len() >= 10_000 && m.counties().len() >= 50 && mismatches == 0 && secs < 5.0,
        format!(
            "{} records, {} counties, {} cells, {mismatches} bitwise mismatches, {secs:.3} s",
            records.len(),
            m.counties().len(),
            oracle.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let questions = ["hope", "trust", "purpose"].map(|q| QuestionId::new(q).unwrap());
    let base = NaiveDate::from_ymd_opt(2013, 1, 1).unwrap();
    let mut rng = stream_rng(2, 0);
    let mut violations = 0;
    let mut cells = 0;
    for _ in 0..1000 {
        let n = (uniform(&mut rng) * 200.0) as usize;
        let records: Vec<LabelRecord> = (0..n)
            .map(|i| {
                let c = (uniform(&mut rng) * 12.0) as usize;
                LabelRecord {
                    tweet: i.to_string(),
                    day: base + Days::new((uniform(&mut rng) * 4000.0) as u64),
                    area: CensusAreaId::new(format!("{}{:06}", county_fips(c).as_str(), 100)).unwrap(),
                    question: questions[(uniform(&mut rng) * 3.0) as usize].clone(),
                    label: Label::ALL[(uniform(&mut rng) * 4.0) as usize],
                }
            })
            .collect();
        let m = normalize(&aggregate_county(
            &aggregate_daily(&records, &RecodingScheme::default()),
            DateWindow::study(),
        ))
        .map_err(|e| e.to_string())?;
        for col in m.columns() {
            for i in 0..m.counties().len() {
                cells += 1;
                let ok = match col.value(i) {
                    Some(v) => (-1.0..=1.0).contains(&v) && col.support(i) > 0,
                    None => col.support(i) == 0,
                };
                violations += (!ok) as usize;
            }
        }
    }
    check(violations == 0, format!("1000 record sets, {cells} cells, {violations} violations"))
}

fn dense_sigma(spec: &ModelSpec, t: &ParameterVector) -> DMatrix<f64> {
    let p = spec.n_observed();
    let m = spec.n_latent();
    let k = m - 1;
    let mut lambda = DMatrix::zeros(p, m);
    for a in 0..p {
        lambda[(a, spec.owner(a))] = t.loadings[a];
    }
    let gamma = DMatrix::from_column_slice(k, 1, &t.paths);
    let phi = DMatrix::from_element(1, 1, t.exogenous_variance);
    let psi = DMatrix::from_diagonal(&DVector::from_vec(t.disturbance_variances.clone()));
    let mut lat = DMatrix::zeros(m, m);
    lat.view_mut((0, 0), (1, 1)).copy_from(&phi);
    if k > 0 {
        lat.view_mut((0, 1), (1, k)).copy_from(&(&phi * gamma.transpose()));
        lat.view_mut((1, 0), (k, 1)).copy_from(&(&gamma * &phi));
        lat.view_mut((1, 1), (k, k)).copy_from(&(&gamma * &phi * gamma.transpose() + psi));
    }
    let theta = DMatrix::from_diagonal(&DVector::from_vec(t.residual_variances.clone()));
    &lambda * lat * lambda.transpose() + theta
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut asym = 0;
    for (_, spec) in topologies() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..50 {
            let t = random_parameters(&spec, &mut rng);
            let s = implied_covariance(&spec, &t);
            worst = worst.max((&s - dense_sigma(&spec, &t)).abs().max());
            asym += (s != s.transpose()) as usize;
        }
    }
    check(
        worst < 1e-12 && asym == 0,
        format!("5 topologies x 50 draws, max |diff| {worst:.2e}, {asym} asymmetric"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for (_, spec) in topologies() {
        let names = spec.observed().to_vec();
        let mut rng = stream_rng(4, 0);
        for _ in 0..20 {
            let other = random_parameters(&spec, &mut rng);
            let s = SampleMoments::from_covariance(names.clone(), implied_covariance(&spec, &other), 500)
                .map_err(|e| e.to_string())?;
            let t = random_parameters(&spec, &mut rng);
            let (_, g) = ml_gradient(&spec, &s, &t).map_err(|e| e.to_string())?;
            let x = t.pack(&spec);
            let f = |x: &[f64]| {
                let t = ParameterVector::unpack(&spec, x).unwrap();
                ml_discrepancy(&s, &implied_covariance(&spec, &t)).unwrap()
            };
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
            for i in 0..x.len() {
                let h = 1e-6 * x[i].abs().max(1.0);
                let (mut up, mut dn) = (x.clone(), x.clone());
                up[i] += h;
                dn[i] -= h;
                let fd = (f(&up) - f(&dn)) / (2.0 * h);
                worst = worst.max((g[i] - fd).abs() / fd.abs().max(scale));
            }
        }
    }
    check(worst < 1e-5, format!("5 topologies x 20 points, max relative error {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, spec) in topologies() {
        let truth = if name == "default" {
            sign_pattern_truth(&spec, &["psychological_distress"])
        } else {
            random_parameters(&spec, &mut stream_rng(5, 0))
        };
        let s = SampleMoments::from_covariance(spec.observed().to_vec(), implied_covariance(&spec, &truth), 1000)
            .map_err(|e| e.to_string())?;
        let start = Instant::now();
        let opts = FitOptions { standard_errors: false, ..Default::default() };
        let r = fit(&spec, &s, &opts).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let err = r
            .parameters
            .pack(&spec)
            .iter()
            .zip(truth.pack(&spec))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let f = r.statistics.discrepancy;
        ok &= r.convergence.converged && err < 1e-4 && f < 1e-10 && secs < 60.0;
        lines.push(format!("{name}: err {err:.1e} F {f:.1e} {secs:.2}s"));
    }
    check(ok, lines.join("; "))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn sampled(spec: &ModelSpec, truth: &ParameterVector, n: usize, seed: u64) -> SampleMoments {
    let obs = generate_observations(spec, truth, n, seed).unwrap();
    SampleMoments::from_rows(obs.names, &obs.rows).unwrap()
}

fn opts_se() -> FitOptions {
    FitOptions { baseline: false, ..Default::default() }
}

fn criterion_6() -> Outcome {
    let spec = default_model();
    let truth = sign_pattern_truth(&spec, &["psychological_distress"]);
    let std_truth = standardize(&spec, &truth).map_err(|e| e.to_string())?;
    let target: Vec<f64> = std_truth.loadings.iter().chain(&std_truth.paths).copied().collect();
    let opts = FitOptions { standard_errors: false, baseline: false, ..Default::default() };
    let mut errors: Vec<Vec<f64>> = vec![Vec::new(); target.len()];
    for rep in 0..20 {
        let r = fit(&spec, &sampled(&spec, &truth, 5000, 600 + rep), &opts).map_err(|e| e.to_string())?;
        if !r.convergence.converged {
            return Err(format!("replication {rep} did not converge"));
        }
        let est: Vec<f64> = r.standardized.loadings.iter().chain(&r.standardized.paths).copied().collect();
        for (i, (e, t)) in est.iter().zip(&target).enumerate() {
            errors[i].push((e - t).abs());
        }
    }
    let worst_median = errors.into_iter().map(median).fold(0.0f64, f64::max);

    // SE*sqrt(N) averaged over 5 samples per size; a single sample's SEs
    // carry several percent of sampling noise at N = 1000.
    let sizes = [1000usize, 4000, 16000];
    let reps = 5;
    let mut scaled: Vec<Vec<f64>> = Vec::new();
    for (k, &n) in sizes.iter().enumerate() {
        let mut acc = vec![0.0; spec.n_free()];
        for rep in 0..reps {
            let seed = 700 + 10 * k as u64 + rep;
            let r = fit(&spec, &sampled(&spec, &truth, n, seed), &opts_se()).map_err(|e| e.to_string())?;
            let se: Option<Vec<f64>> = r.estimates.iter().filter(|e| e.free).map(|e| e.se).collect();
            let se = se.ok_or("missing standard errors")?;
            for (a, s) in acc.iter_mut().zip(se) {
                *a += s * (n as f64).sqrt() / reps as f64;
            }
        }
        scaled.push(acc);
    }
    let mut worst_ratio = 0.0f64;
    for s in &scaled[1..] {
        for (a, b) in s.iter().zip(&scaled[0]) {
            worst_ratio = worst_ratio.max((a / b - 1.0).abs());
        }
    }
    check(
        worst_median < 0.05 && worst_ratio < 0.10,
        format!(
            "max per-parameter median |error| {worst_median:.4} over 20 x N=5000; max deviation of mean SE*sqrt(N) from N=1000 {:.1}% (5 samples per N)",
            100.0 * worst_ratio
        ),
    )
}

fn criterion_7() -> Outcome {
    let spec = default_model();
    let truth = sign_pattern_truth(&spec, &["psychological_distress"]);
    let s = sampled(&spec, &truth, 2000, 7);
    let opts = FitOptions { gradient_tolerance: 1e-10, standard_errors: false, baseline: false, ..Default::default() };
    let base = fit(&spec, &s, &opts).map_err(|e| e.to_string())?;
    let std = |r: &hfsem::FitResult| -> Vec<f64> {
        r.standardized.loadings.iter().chain(&r.standardized.paths).copied().collect()
    };
    let b = std(&base);
    let mut worst = 0.0f64;
    let mut fits = 0;
    let mut unconverged = 0;
    for idx in 0..spec.n_observed() {
        for c in [0.1, 10.0] {
            let r = fit(&spec, &s.rescale(idx, c).map_err(|e| e.to_string())?, &opts).map_err(|e| e.to_string())?;
            unconverged += (!r.convergence.converged) as usize;
            fits += 1;
            for (x, y) in std(&r).iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    check(
        worst <= 1e-6,
        format!("{fits} rescaled fits ({unconverged} stopped at the iteration cap), max standardized change {worst:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let spec = default_model();
    let p = spec.n_observed();
    let latents = spec.n_latent();
    let endo = spec.n_endogenous();
    let counted = (p - latents) + endo + 1 + endo + p;
    let df = (p * (p + 1) / 2) as i64 - counted as i64;
    check(
        spec.n_free() == 107 && counted == 107 && spec.degrees_of_freedom() == 1118 && df == 1118,
        format!("p {p}, latents {latents}, free {}, df {}", spec.n_free(), spec.degrees_of_freedom()),
    )
}

/// Σ_lo Σ⁻¹ Σ_loᵀ with Σ_lo = M Λᵀ, built densely.
fn shrinkage_oracle(spec: &ModelSpec, t: &ParameterVector) -> DMatrix<f64> {
    let p = spec.n_observed();
    let m = spec.n_latent();
    let mut lambda = DMatrix::zeros(p, m);
    for a in 0..p {
        lambda[(a, spec.owner(a))] = t.loadings[a];
    }
    let gamma = DVector::from_vec(t.paths.clone());
    let mut lat = DMatrix::zeros(m, m);
    lat[(0, 0)] = t.exogenous_variance;
    for j in 0..m - 1 {
        lat[(0, j + 1)] = gamma[j] * t.exogenous_variance;
        lat[(j + 1, 0)] = gamma[j] * t.exogenous_variance;
        for k in 0..m - 1 {
            lat[(j + 1, k + 1)] = gamma[j] * gamma[k] * t.exogenous_variance;
        }
        lat[(j + 1, j + 1)] += t.disturbance_variances[j];
    }
    let lo = &lat * lambda.transpose();
    let sigma = dense_sigma(spec, t);
    let inv = sigma.try_inverse().expect("positive definite");
    &lo * inv * lo.transpose()
}

fn score_gap(spec: &ModelSpec, t: &ParameterVector, table: &ObservedTable) -> Result<f64, String> {
    let scores = score_with(spec, t, table, ScoreMethod::Regression).map_err(|e| e.to_string())?;
    let expected = shrinkage_oracle(spec, t);
    let n = scores.scores.len() as f64;
    let m = spec.n_latent();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let c = scores.scores.iter().map(|r| r[i] * r[j]).sum::<f64>() / (n - 1.0);
            worst = worst.max((c - expected[(i, j)]).abs());
        }
    }
    Ok(worst)
}

/// Scores come from the model fitted to the same cases, as in the scoring
/// command. The gap under the generating θ is printed too; it carries the
/// sampling error of S around Σ (about 0.009 per entry at this N).
fn criterion_9() -> Outcome {
    let spec = default_model();
    let truth = sign_pattern_truth(&spec, &["psychological_distress"]);
    let obs = generate_observations(&spec, &truth, 20_000, 9).map_err(|e| e.to_string())?;
    let table = ObservedTable {
        names: obs.names.clone(),
        counties: (0..obs.rows.len()).map(|i| county_fips(i % 29_700)).collect(),
        rows: obs.rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect(),
    };
    let s = SampleMoments::from_rows(obs.names.clone(), &obs.rows).map_err(|e| e.to_string())?;
    let opts = FitOptions { standard_errors: false, baseline: false, ..Default::default() };
    let r = fit(&spec, &s, &opts).map_err(|e| e.to_string())?;
    if !r.convergence.converged {
        return Err("fit did not converge".into());
    }
    let fitted = score_gap(&spec, &r.parameters, &table)?;
    let generating = score_gap(&spec, &truth, &table)?;
    check(
        fitted < 0.02,
        format!("10x10 score covariance vs dense oracle, max |diff| {fitted:.4} (generating θ: {generating:.4})"),
    )
}

fn run_pipeline(dir: &Path, seed: &str) -> Result<PathBuf, String> {
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        "out = \"out\"\n[inputs]\nlabels = \"out/labels.csv\"\nclimate = \"out/climate.csv\"\n",
    )
    .map_err(|e| e.to_string())?;
    let c = cfg.to_str().unwrap();
    for args in [
        vec!["simulate", "--config", c, "--seed", seed],
        vec!["aggregate", "--config", c],
        vec!["fit", "--config", c],
        vec!["scores", "--config", c],
    ] {
        let o = Command::new(env!("CARGO_BIN_EXE_hfsem"))
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&o.stderr)));
        }
    }
    Ok(dir.join("out"))
}

fn criterion_10() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let da = run_pipeline(a.path(), "2024")?;
    let db = run_pipeline(b.path(), "2024")?;
    let files = ["labels.csv", "climate.csv", "observations.csv", "truth.json", "indicators.csv", "fit.json", "fit.txt", "scores.csv"];
    let mut differing = Vec::new();
    for f in files {
        if std::fs::read(da.join(f)).ok() != std::fs::read(db.join(f)).ok() {
            differing.push(f);
        }
    }
    check(
        differing.is_empty(),
        format!("{} artifacts compared over a 200-county run, differing: {:?}", files.len(), differing),
    )
}

/// Needs `HFSEM_COUNTY_DATA` pointing at a directory with `indicators.csv`
/// (county indicator table) and `climate.csv` (hazard percentiles).
fn criterion_11() -> Verdict {
    let Some(dir) = std::env::var_os("HFSEM_COUNTY_DATA") else {
        return Verdict::Skip("HFSEM_COUNTY_DATA not set; no county data to check against".into());
    };
    let dir = PathBuf::from(dir);
    let run = || -> Outcome {
        let ind = read_indicators(
            std::fs::File::open(dir.join("indicators.csv")).map_err(|e| e.to_string())?,
            DateWindow::study(),
        )
        .map_err(|e| e.to_string())?;
        let climate = ingest_climate(std::fs::File::open(dir.join("climate.csv")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let spec = default_model();
        let table = ObservedTable::assemble(&ind, &climate, spec.observed()).map_err(|e| e.to_string())?;
        let (s, _) = SampleMoments::from_table(&table).map_err(|e| e.to_string())?;
        let r = fit(&spec, &s, &FitOptions::default()).map_err(|e| e.to_string())?;
        let mut ok = r.convergence.converged;
        let mut parts = Vec::new();
        for (j, l) in spec.endogenous().iter().enumerate() {
            let e = r.estimate(&l.name, "~", "climate_risk").unwrap();
            let b = r.standardized.paths[j];
            let want_positive = l.name == "psychological_distress";
            ok &= (b > 0.0) == want_positive && e.p_value.is_some_and(|p| p < 0.05);
            parts.push(format!("{} {b:+.2}", l.name));
        }
        check(ok, parts.join(", "))
    };
    match run() {
        Ok(d) => Verdict::Pass(d),
        Err(d) => Verdict::Fail(d),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("aggregation oracle equivalence", criterion_1),
        ("bound and missingness fuzz", criterion_2),
        ("implied covariance vs dense oracle", criterion_3),
        ("analytic gradient vs finite differences", criterion_4),
        ("population recovery", criterion_5),
        ("Monte Carlo recovery and SE scaling", criterion_6),
        ("standardization invariance", criterion_7),
        ("degrees-of-freedom audit", criterion_8),
        ("factor-score shrinkage", criterion_9),
        ("end-to-end determinism", criterion_10),
    ];
    let mut failed = 0;
    let mut verdicts = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = match std::panic::catch_unwind(f) {
            Ok(Ok(d)) => Verdict::Pass(d),
            Ok(Err(d)) => Verdict::Fail(d),
            Err(_) => Verdict::Fail("panicked".into()),
        };
        verdicts.push((i + 1, *name, v, start.elapsed().as_secs_f64()));
    }
    let start = Instant::now();
    verdicts.push((11, "structural sign pattern on county data", criterion_11(), start.elapsed().as_secs_f64()));
    println!();
    for (n, name, v, secs) in &verdicts {
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("criterion {n:>2} {tag} {name} ({secs:.1}s): {detail}");
    }
    println!();
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: ok");
}
