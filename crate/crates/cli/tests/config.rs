use fedualex::fedsim::EvalPoint;
use fedualex::optimizers::Method;
use fedualex::problems::ProblemKind;
use fedualex_cli::{exit, parse_config, parse_config_str, CliError, Overrides};

fn preset_flags(name: &str) -> Overrides {
    Overrides {
        preset: Some(name.into()),
        ..Overrides::default()
    }
}

fn config_key(err: CliError) -> String {
    assert_eq!(err.exit_code(), exit::CONFIG);
    match err {
        CliError::Config { key, .. } => key,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn empty_file_with_preset() {
    let s = parse_config_str("", &preset_flags("l1-k10")).unwrap();
    assert_eq!(s.sim.local_steps, 10);
    assert_eq!(s.sim.rounds, 500);
    assert_eq!(s.sim.method, Method::FeDualEx);
    assert_eq!(s.sim.problem.kind, ProblemKind::L1);
    assert_eq!(s.seeds, 10);
}

#[test]
fn rounds_flag_overrides_preset() {
    let flags = Overrides {
        rounds: Some(7),
        ..preset_flags("l1-k10")
    };
    assert_eq!(parse_config_str("", &flags).unwrap().sim.rounds, 7);
}

#[test]
fn flags_beat_file_values() {
    let text = "preset = \"l1-k1\"\nrounds = 3\neta_c = 0.5\n";
    let s = parse_config_str(text, &Overrides::default()).unwrap();
    assert_eq!((s.sim.rounds, s.sim.eta_c), (3, 0.5));
    let flags = Overrides {
        rounds: Some(4),
        eta_c: Some(0.25),
        preset: Some("nuclear-k10".into()),
        ..Overrides::default()
    };
    let s = parse_config_str(text, &flags).unwrap();
    assert_eq!((s.sim.rounds, s.sim.eta_c), (4, 0.25));
    assert_eq!(s.sim.problem.kind, ProblemKind::Nuclear);
}

#[test]
fn zero_participation_is_rejected() {
    let flags = Overrides {
        participation: Some(0.0),
        ..preset_flags("l1-k10")
    };
    let err = parse_config_str("", &flags).unwrap_err();
    assert!(config_key(err).contains("participation"));
}

#[test]
fn unknown_key_is_rejected() {
    let err = parse_config_str("preset = \"l1-k1\"\nlearning_rate = 1.0\n", &Overrides::default()).unwrap_err();
    let CliError::Config { reason, .. } = &err else {
        panic!("{err:?}")
    };
    assert!(reason.contains("learning_rate"), "{reason}");
    config_key(err);

    let err = parse_config_str("preset = \"l1-k1\"\n[problem]\nsize = 3\n", &Overrides::default()).unwrap_err();
    config_key(err);
}

#[test]
fn unknown_names_are_rejected() {
    assert_eq!(
        config_key(parse_config_str("", &preset_flags("l2-k3")).unwrap_err()),
        "preset"
    );
    let flags = Overrides {
        method: Some("adam".into()),
        ..preset_flags("l1-k1")
    };
    assert_eq!(config_key(parse_config_str("", &flags).unwrap_err()), "method");
    let flags = Overrides {
        eval_every: Some("often".into()),
        ..preset_flags("l1-k1")
    };
    assert_eq!(config_key(parse_config_str("", &flags).unwrap_err()), "eval_every");
}

#[test]
fn problem_is_required_without_preset() {
    config_key(parse_config_str("", &Overrides::default()).unwrap_err());
    let s = parse_config_str("[problem]\nkind = \"quadratic\"\nn = 12\n", &Overrides::default()).unwrap();
    assert_eq!(s.sim.problem.kind, ProblemKind::Quadratic);
    assert_eq!(s.sim.problem.n, 12);
}

#[test]
fn problem_table_refines_the_preset() {
    let text = "preset = \"l1-k10\"\n[problem]\nlambda = 0.2\nm = 40\n";
    let s = parse_config_str(text, &Overrides::default()).unwrap();
    assert_eq!(s.sim.problem.lambda, 0.2);
    assert_eq!(s.sim.problem.m, 40);
    assert_eq!(s.sim.problem.n, 300);
}

#[test]
fn eval_settings() {
    let text = "preset = \"l1-k1\"\neval_every = 5\neval_point = \"ergodic\"\n";
    let s = parse_config_str(text, &Overrides::default()).unwrap();
    assert_eq!(s.sim.eval_every, Some(5));
    assert_eq!(s.sim.eval_point, EvalPoint::Ergodic);
    let s = parse_config_str("preset = \"l1-k1\"\neval_every = \"auto\"\n", &Overrides::default()).unwrap();
    assert_eq!(s.sim.eval_every, None);
    config_key(parse_config_str("preset = \"l1-k1\"\neval_every = 0\n", &Overrides::default()).unwrap_err());
}

#[test]
fn grid_and_seed_tables() {
    let text = "preset = \"l1-k1\"\n[grid]\neta_s = [1.0]\neta_c = [0.1, 0.01]\n[seeds]\ncount = 3\n";
    let s = parse_config_str(text, &Overrides::default()).unwrap();
    assert_eq!(s.eta_s_grid, vec![1.0]);
    assert_eq!(s.eta_c_grid, vec![0.1, 0.01]);
    assert_eq!(s.seeds, 3);
    for bad in [
        "[grid]\neta_s = []\n",
        "[grid]\neta_c = [-1.0]\n",
        "[seeds]\ncount = 0\n",
    ] {
        let text = format!("preset = \"l1-k1\"\n{bad}");
        config_key(parse_config_str(&text, &Overrides::default()).unwrap_err());
    }
}

#[test]
fn malformed_toml_is_a_config_error() {
    config_key(parse_config_str("rounds = = 3", &Overrides::default()).unwrap_err());
    config_key(parse_config_str("rounds = \"many\"", &Overrides::default()).unwrap_err());
}

#[test]
fn missing_file_is_an_io_error() {
    let err = parse_config(
        Some(std::path::Path::new("/nonexistent/fedualex.toml")),
        &Overrides::default(),
    )
    .unwrap_err();
    assert!(matches!(err, CliError::Io { .. }));
    assert_eq!(err.exit_code(), exit::IO);
}

#[test]
fn file_on_disk_matches_string() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let text = "preset = \"nuclear-k1\"\nseed = 4\n";
    std::fs::write(&path, text).unwrap();
    let a = parse_config(Some(&path), &Overrides::default()).unwrap();
    let b = parse_config_str(text, &Overrides::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.sim.seed, 4);
}
