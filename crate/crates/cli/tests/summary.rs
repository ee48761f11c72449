use fedualex::fedsim::RunRecord;
use fedualex::optimizers::Method;
use fedualex_cli::{exit, summarize};
use proptest::prelude::*;

fn series(gaps: &[f64]) -> Vec<RunRecord> {
    gaps.iter()
        .enumerate()
        .map(|(r, &g)| RunRecord {
            method: Method::FeDualEx,
            round: r * 2,
            cumulative_local_steps: r as u64 * 40,
            duality_gap: g,
            sparsity_x: 0.1 * r as f64,
            sparsity_y: 0.2,
            rank_x: r,
            rank_y: 1,
            wall_ms: 0.0,
            seed: 0,
        })
        .collect()
}

#[test]
fn single_record() {
    let s = summarize(&series(&[0.7])).unwrap();
    assert_eq!((s.final_round, s.best_round), (0, 0));
    assert_eq!((s.final_gap, s.best_gap), (0.7, 0.7));
    assert_eq!(s.oracle_calls, 0);
}

#[test]
fn monotone_series_is_best_at_the_end() {
    let recs = series(&[4.0, 2.0, 1.0, 0.5]);
    let s = summarize(&recs).unwrap();
    assert_eq!(s.best_round, 6);
    assert_eq!(s.final_round, 6);
    assert_eq!(s.final_rank_x, 3);
    assert_eq!(s.oracle_calls, 120 * Method::FeDualEx.oracle_calls_per_step());
}

#[test]
fn ties_go_to_the_earliest_round() {
    let s = summarize(&series(&[3.0, 1.0, 2.0, 1.0])).unwrap();
    assert_eq!(s.best_round, 2);
    assert_eq!(s.final_gap, 1.0);
}

#[test]
fn empty_series_is_an_error() {
    assert_eq!(summarize(&[]).unwrap_err().exit_code(), exit::CONFIG);
}

#[test]
fn display_lists_the_fields() {
    let text = summarize(&series(&[2.0, 1.0])).unwrap().to_string();
    for label in ["method", "final round", "final gap", "best round", "oracle calls"] {
        assert!(text.contains(label), "{text}");
    }
}

proptest! {
    #[test]
    fn best_matches_a_linear_scan(gaps in prop::collection::vec(0.0f64..10.0, 1..60)) {
        let recs = series(&gaps);
        let s = summarize(&recs).unwrap();
        let mut best = 0;
        for i in 1..gaps.len() {
            if gaps[i] < gaps[best] {
                best = i;
            }
        }
        prop_assert_eq!(s.best_round, recs[best].round);
        prop_assert_eq!(s.best_gap, gaps[best]);
        prop_assert_eq!(s.final_gap, *gaps.last().unwrap());
    }
}
