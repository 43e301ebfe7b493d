use newsvendor_core::Family;
use newsvendor_harness::config::{ExperimentConfig, InstanceSpec};
use newsvendor_harness::experiment::{run_instance, run_matrix, INSTANCE_DIR};
use newsvendor_harness::io::read_json;
use newsvendor_harness::report::load;

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * x.abs().max(1.0),
        (None, None) => true,
        _ => false,
    }
}

#[test]
fn persisted_instances_replay_their_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        t_list: vec![2, 3],
        m_list: vec![3],
        n_list: vec![10, 50],
        n_true_params: 1,
        output_dir: dir.path().to_path_buf(),
        ..ExperimentConfig::desk()
    };
    run_matrix(&cfg, 2).unwrap();
    let (fd, mle, dro) = load(dir.path()).unwrap();
    assert_eq!(dro.len(), 2 * 2 * 4 * 2);
    assert!(dro.iter().any(|r| r.family == Family::Poisson));
    for (i, row) in dro.iter().enumerate() {
        let spec: InstanceSpec = read_json(&dir.path().join(INSTANCE_DIR).join(format!("{}.json", row.id))).unwrap();
        let again = run_instance(&spec, cfg.timeout_s);
        assert!(close(again.dro.cs_objective, row.cs_objective), "{}", row.id);
        assert!(close(again.dro.full_objective, row.full_objective), "{}", row.id);
        assert!(close(again.mle.predicted_cost, mle[i].predicted_cost), "{}", row.id);
        assert!(close(again.fd.fd_cost, fd[i].fd_cost), "{}", row.id);
    }
}
