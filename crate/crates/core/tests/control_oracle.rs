use recipe_rl::bounds::Interval;
use recipe_rl::control::{pid_step, PidConfig, PidState};

/// PI loop on a first-order plant `x' = a x + b u`, discretized exactly,
/// against the closed-form power of the 2x2 loop matrix.
#[test]
fn pi_on_linear_plant_matches_closed_form() {
    let (a, b, dt) = (-0.01f64, 0.02f64, 1.0f64);
    let (kp, ki) = (-2.0, -0.005);
    let cfg = PidConfig {
        kp,
        ki,
        kd: 0.0,
        setpoint: 0.0,
        u_ss: 0.0,
        output: Interval::new(-1e9, 1e9).unwrap(),
    };
    let phi = (a * dt).exp();
    let gamma = b * (phi - 1.0) / a;

    // state s = [x, I]: I' = I + dt x,  x' = phi x + gamma (kp x + ki I')
    let m = [[phi + gamma * kp + gamma * ki * dt, gamma * ki], [dt, 1.0]];
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    assert!(disc > 0.0, "eigenvalues must be real and distinct");
    let l1 = 0.5 * (tr + disc.sqrt());
    let l2 = 0.5 * (tr - disc.sqrt());
    assert!(l1.abs() < 1.0 && l2.abs() < 1.0);

    let (x0, i0) = (1.0, 0.0);
    let closed = |k: i32| {
        let (p1, p2) = (l1.powi(k), l2.powi(k));
        let c = |r: usize, col: usize| {
            let id = if r == col { 1.0 } else { 0.0 };
            (p1 * (m[r][col] - l2 * id) - p2 * (m[r][col] - l1 * id)) / (l1 - l2)
        };
        (c(0, 0) * x0 + c(0, 1) * i0, c(1, 0) * x0 + c(1, 1) * i0)
    };

    let mut x = x0;
    let mut st = PidState::default();
    for k in 1..=500 {
        let (u, next) = pid_step(&cfg, &st, x, dt);
        st = next;
        x = phi * x + gamma * u;
        let (xe, ie) = closed(k);
        assert!((x - xe).abs() <= 1e-8, "step {k}: {x} vs {xe}");
        assert!((st.integral - ie).abs() <= 1e-8 * ie.abs().max(1.0), "step {k}");
    }
}
