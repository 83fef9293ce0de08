use irreg_core::generate::random_regular;
use irreg_core::params::{PipelineParams, Preset};
use irreg_core::pipeline::{bounds_table, run_pipeline, Outcome};
use irreg_core::Error;

fn report_value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

#[test]
fn corollary1_is_refused_in_strict_mode() {
    let (b, eps) = Preset::Corollary1.b_eps();
    let g = random_regular(400, 20, 1).unwrap();
    let err = run_pipeline(&g, &PipelineParams::strict(b, eps), 1).unwrap_err();
    assert!(matches!(err, Error::Param(_)), "{err}");
    let table = bounds_table(400, 20, b, eps).unwrap();
    assert_eq!(report_value(&table, "range.status"), Some("INFEASIBLE"));
}

#[test]
fn zero_kkp_step_is_a_parameter_error() {
    let g = random_regular(20, 10, 0).unwrap();
    let err = run_pipeline(&g, &PipelineParams::empirical(0.2, 0.05, 1.0), 0).unwrap_err();
    assert!(matches!(err, Error::Param(_)));
    assert!(err.to_string().contains("KKP"));
}

#[test]
fn failures_name_a_stage_and_a_condition() {
    let g = random_regular(600, 60, 3).unwrap();
    let p = PipelineParams::empirical(0.2, 0.05, 1.0).with_retries(5);
    for seed in 0..3 {
        let run = run_pipeline(&g, &p, seed).unwrap();
        let report = run.report();
        match &run.outcome {
            Outcome::Failed(f) => {
                assert_eq!(report_value(&report, "failure.stage"), Some(f.stage.name()));
                let w = &f.witness;
                assert!(
                    w.contains('°') || w.contains("Δ_j") || w.contains("U_") || w.contains("options"),
                    "witness does not name a condition: {w}"
                );
            }
            Outcome::NotIrregular => {
                assert!(report_value(&report, "final.witness").is_some());
            }
            Outcome::Irregular => {
                assert_eq!(report_value(&report, "final.irregular"), Some("true"));
                assert_eq!(report_value(&report, "final.bound_ok"), Some("true"));
            }
        }
    }
}

#[test]
fn reports_are_reproducible() {
    let g = random_regular(1000, 40, 8).unwrap();
    let p = PipelineParams::empirical(0.2, 0.05, 2.0).with_retries(10);
    let a = run_pipeline(&g, &p, 21).unwrap();
    let b = run_pipeline(&g, &p, 21).unwrap();
    assert_eq!(a.report(), b.report());
    assert_eq!(a.omega3, b.omega3);
    let c = run_pipeline(&g, &p, 22).unwrap();
    assert_eq!(report_value(&c.report(), "seed"), Some("22"));
}
