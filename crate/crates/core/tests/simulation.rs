use zimix::mml::EmConfig;
use zimix::sim::{run_cells, ScenarioSpec, SimConfig, SimulationReport};
use zimix::Method;

fn strip_time(mut r: SimulationReport) -> SimulationReport {
    r.runtime_secs = 0.0;
    r
}

fn small_cells() -> Vec<ScenarioSpec> {
    vec![
        ScenarioSpec::scenario1(0.25, 0.25, 60, 60, 6, 31),
        ScenarioSpec::scenario2(0.5, 0.75, 50, 80, 6, 31),
    ]
}

#[test]
fn single_replication_is_reproducible() {
    let cells = vec![ScenarioSpec::scenario1(0.5, 0.5, 100, 100, 1, 77)];
    let methods = [Method::MmlEm, Method::BinomialPlugin];
    let a = strip_time(run_cells::<f64>(&cells, &methods, &EmConfig::default()).unwrap());
    let b = strip_time(run_cells::<f64>(&cells, &methods, &EmConfig::default()).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_cells::<f64>(&small_cells(), &[Method::MmlEm], &EmConfig::default()).unwrap())
    };
    assert_eq!(strip_time(run(1)), strip_time(run(4)));
}

#[test]
fn estimator_order_does_not_matter() {
    let em = EmConfig::default();
    let ab = run_cells::<f64>(
        &small_cells(),
        &[Method::MmlEm, Method::BinomialPlugin, Method::EmpiricalLikelihood],
        &em,
    )
    .unwrap();
    let ba = run_cells::<f64>(
        &small_cells(),
        &[Method::EmpiricalLikelihood, Method::BinomialPlugin, Method::MmlEm],
        &em,
    )
    .unwrap();
    for (x, y) in ab.cells.iter().zip(&ba.cells) {
        for m in [Method::MmlEm, Method::BinomialPlugin, Method::EmpiricalLikelihood] {
            assert_eq!(x.summary(m), y.summary(m));
        }
    }
}

#[test]
fn config_file_drives_the_table_layout() {
    let cfg = SimConfig::from_toml(
        "scenario = 1\nlambda = [0.25, 0.5, 0.75]\np = [0.25, 0.5, 0.75]\nm = [40, 50]\nn = [40, 60]\nreps = 2\nseed = 9\n",
    )
    .unwrap();
    let cells = cfg.cells(0).unwrap();
    assert_eq!(cells.len(), 18);
    let report = run_cells::<f64>(&cells, &[Method::MmlEm, Method::BinomialPlugin], &EmConfig::default()).unwrap();
    let text = report.render_text();
    let lambda_row = text.lines().find(|l| l.starts_with("lambda")).unwrap();
    let p_row = text.lines().find(|l| l.starts_with("p ")).unwrap();
    let lambdas: Vec<&str> = lambda_row.split_whitespace().skip(1).collect();
    let ps: Vec<&str> = p_row.split_whitespace().skip(1).collect();
    assert_eq!(
        lambdas,
        ["0.25", "0.25", "0.25", "0.5", "0.5", "0.5", "0.75", "0.75", "0.75"]
    );
    assert_eq!(
        ps,
        ["0.25", "0.5", "0.75", "0.25", "0.5", "0.75", "0.25", "0.5", "0.75"]
    );
    for row in [
        "MSE of lambda [hat]",
        "MSE of lambda [tilde]",
        "MSE of p [hat]",
        "MSE of p [tilde]",
        "|F1-F1|inf [hat]",
        "|F2-F2|inf [tilde]",
    ] {
        assert!(text.contains(row), "missing row {row}");
    }
    assert!(text.contains("m=40, n=40") && text.contains("m=50, n=60"));
    assert!(report.cell(0.5, 0.75, 50, 60).is_some());
}

#[test]
fn f32_pipeline_tracks_f64() {
    let cells = vec![ScenarioSpec::scenario1(0.5, 0.5, 100, 100, 4, 12)];
    let a = run_cells::<f64>(&cells, &[Method::BinomialPlugin], &EmConfig::default()).unwrap();
    let b = run_cells::<f32>(&cells, &[Method::BinomialPlugin], &EmConfig::default()).unwrap();
    let (sa, sb) = (a.cells[0].metrics[0].1, b.cells[0].metrics[0].1);
    assert!((sa.mse_lambda - sb.mse_lambda).abs() < 1e-5);
    assert!((sa.ks_f2 - sb.ks_f2).abs() < 1e-3);
}
