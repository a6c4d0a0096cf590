//! Frozen mid-trajectory reference states for the c1 = 2 flow, computed with
//! an independent high-order integrator at rtol 1e-12 (values rounded to
//! 12 decimals). Checks the flow engine end to end, not just its fixed-point
//! capture.

use grf_core::flow::{integrate, IntegratorConfig};
use grf_core::math::abs;
use grf_core::space::{AlignedParams, DiagonalMetric};

#[test]
fn trajectory_matches_independent_integration() {
    let p = AlignedParams::new(2.0, 0.25, 0.5, 0.5).unwrap();
    let x0 = DiagonalMetric::new(1.5, 0.7, 3.0);
    let cases: [(f64, [f64; 3]); 3] = [
        (1.0, [1.252590518907, 0.925029633827, 2.229357576314]),
        (3.0, [1.042686249486, 0.990936626585, 2.013286335554]),
        (10.0, [1.000040631246, 0.999991819963, 2.000000378622]),
    ];
    for (t_end, expect) in cases {
        let cfg = IntegratorConfig {
            max_time: t_end,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..IntegratorConfig::default()
        };
        let traj = integrate(&p, &x0, &cfg).unwrap();
        let end = traj.last();
        assert!(abs(end.t - t_end) < 1e-9);
        for (i, e) in expect.iter().enumerate() {
            assert!(
                abs(end.state[i] - e) < 1e-7,
                "t={t_end} x{i}: {} vs {e}",
                end.state[i]
            );
        }
    }
}
