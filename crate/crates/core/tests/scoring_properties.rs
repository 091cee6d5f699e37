use hfsem::datamodel::CountyId;
use hfsem::scoring::{score_covariance, score_with, ScoreMethod};
use hfsem::sem::{ModelSpec, ObservedTable, DEFAULT_MODEL};
use hfsem::synth::{county_fips, generate_observations, random_parameters, sign_pattern_truth, stream_rng};

fn table(names: &[String], rows: &[Vec<f64>]) -> ObservedTable {
    ObservedTable {
        names: names.to_vec(),
        counties: (0..rows.len()).map(county_fips).collect(),
        rows: rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect(),
    }
}

#[test]
fn regression_scores_shrink_as_predicted() {
    let spec = ModelSpec::parse("x =~ a b c\ny1 =~ d e\ny2 =~ f g h\ny1 ~ x\ny2 ~ x").unwrap();
    let theta = random_parameters(&spec, &mut stream_rng(31, 0));
    let obs = generate_observations(&spec, &theta, 20_000, 32).unwrap();
    let scores = score_with(&spec, &theta, &table(&obs.names, &obs.rows), ScoreMethod::Regression).unwrap();
    let expected = score_covariance(&spec, &theta).unwrap();
    let n = scores.scores.len() as f64;
    let m = spec.n_latent();
    for i in 0..m {
        for j in 0..m {
            let cov = scores.scores.iter().map(|r| r[i] * r[j]).sum::<f64>() / (n - 1.0);
            // five sampling standard deviations of a Gaussian covariance entry
            let sd = ((expected[(i, i)] * expected[(j, j)] + expected[(i, j)].powi(2)) / n).sqrt();
            assert!((cov - expected[(i, j)]).abs() < 5.0 * sd, "({i},{j}) {cov} vs {}", expected[(i, j)]);
        }
    }
}

#[test]
fn row_order_and_column_shifts_leave_scores_unchanged() {
    let spec = ModelSpec::parse(DEFAULT_MODEL).unwrap();
    let theta = sign_pattern_truth(&spec, &["psychological_distress"]);
    let obs = generate_observations(&spec, &theta, 300, 9).unwrap();
    let base_table = table(&obs.names, &obs.rows);
    let base = score_with(&spec, &theta, &base_table, ScoreMethod::Regression).unwrap();

    let mut rev = base_table.clone();
    rev.rows.reverse();
    rev.counties.reverse();
    let r = score_with(&spec, &theta, &rev, ScoreMethod::Regression).unwrap();
    for (c, row) in base.counties.iter().zip(&base.scores) {
        let k = r.counties.iter().position(|x| x == c).unwrap();
        for (a, b) in row.iter().zip(&r.scores[k]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    let mut shifted = base_table.clone();
    for row in &mut shifted.rows {
        row[7] = row[7].map(|v| v + 25.0);
    }
    let s = score_with(&spec, &theta, &shifted, ScoreMethod::Regression).unwrap();
    for (a, b) in base.scores.iter().flatten().zip(s.scores.iter().flatten()) {
        assert!((a - b).abs() < 1e-9);
    }
    assert_eq!(base.latents[0], "climate_risk");
    assert_eq!(base.counties[0], CountyId::new("01001").unwrap());
}
