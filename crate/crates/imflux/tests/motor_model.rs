//! Physics oracles for the machine model: an exact pointwise power balance,
//! energy dissipation along coast-down trajectories, and fourth-order
//! self-convergence of the integrator on the motor alone.
//!
//! The stored energy for the (rotor flux, stator current, speed) state is
//!     E = |lambda|^2/(2 Lr) + (Ls*sigma/2)|i|^2 + (J/2) omega^2
//! and along exact trajectories
//!     dE/dt = i.v - omega*T_L - Rs|i|^2 - Rr|lambda/Lr - beta*i|^2,
//! where lambda/Lr - beta*i is the rotor current. The identity fixes every
//! coefficient and cross-coupling sign of the model, so checking it on random
//! states is a complete consistency oracle, independent of any trajectory.

use imflux::motor::{motor_derivative, MotorParams, MotorState};
use imflux::rk4::{self, Rk4Buffers};
use imflux::vec2::Vec2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn energy(st: &MotorState, p: &MotorParams) -> f64 {
    st.lambda.norm_sq() / (2.0 * p.lr)
        + 0.5 * p.ls * p.sigma() * st.i.norm_sq()
        + 0.5 * p.j * st.omega * st.omega
}

#[test]
fn power_balance_is_exact_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let base = MotorParams::default();
    for trial in 0..200 {
        // vary the parameter set too, not only the state
        let p = MotorParams {
            ls: base.ls * rng.gen_range(0.5..2.0),
            lr: base.lr * rng.gen_range(0.5..2.0),
            m: base.m * rng.gen_range(0.5..1.1),
            rs: rng.gen_range(0.1..10.0),
            rr_true: rng.gen_range(0.1..10.0),
            j: rng.gen_range(1e-5..1e-2),
            pole_pairs: rng.gen_range(1..4),
            tl_true: rng.gen_range(-1.0..1.0),
        };
        if !p.validate().is_empty() {
            continue; // skip draws with sigma outside (0,1)
        }
        let st = MotorState {
            lambda: Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
            i: Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
            omega: rng.gen_range(-100.0..100.0),
        };
        let v = Vec2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let d = motor_derivative(&st, v, &p);

        let e_dot = st.lambda.dot(d.d_lambda) / p.lr
            + p.ls * p.sigma() * st.i.dot(d.d_i)
            + p.j * st.omega * d.d_omega;
        let rotor_current = st.lambda * (1.0 / p.lr) - st.i * p.beta();
        let balance = st.i.dot(v)
            - st.omega * p.tl_true
            - p.rs * st.i.norm_sq()
            - p.rr_true * rotor_current.norm_sq();

        let scale = e_dot.abs().max(balance.abs()).max(1.0);
        assert!(
            (e_dot - balance).abs() <= 1e-12 * scale,
            "trial {trial}: dE/dt {e_dot} vs power balance {balance}"
        );
    }
}

fn integrate_motor(
    p: &MotorParams,
    x0: [f64; 5],
    dt: f64,
    t_end: f64,
    v_of_t: impl Fn(f64) -> Vec2,
    mut on_step: impl FnMut(f64, &[f64]),
) -> [f64; 5] {
    let mut x = x0.to_vec();
    let mut buf = Rk4Buffers::new(5);
    let steps = (t_end / dt).round() as usize;
    for k in 0..steps {
        let t = k as f64 * dt;
        rk4::step(t, dt, &mut x, &mut buf, &mut |tt, xs, dxs| {
            let st = MotorState::from_slice(xs);
            let d = motor_derivative(&st, v_of_t(tt), p);
            d.d_lambda.write_to(&mut dxs[0..2]);
            d.d_i.write_to(&mut dxs[2..4]);
            dxs[4] = d.d_omega;
        });
        on_step((k + 1) as f64 * dt, &x);
    }
    [x[0], x[1], x[2], x[3], x[4]]
}

#[test]
fn coast_down_dissipates_energy_monotonically() {
    // v = 0, T_L = 0: dE/dt = -Rs|i|^2 - Rr|i_rotor|^2 <= 0. The electrical
    // subsystem bleeds out; the speed settles at whatever is left when torque
    // dies (no friction term), so only electrical energy is required to reach
    // zero.
    let p = MotorParams {
        tl_true: 0.0,
        ..MotorParams::default()
    };
    let x0 = [0.1, 0.05, 2.0, -1.0, 30.0];
    let st0 = MotorState::from_slice(&x0);
    let e0 = energy(&st0, &p);
    let elec0 = e0 - 0.5 * p.j * st0.omega * st0.omega;
    // 1.0 s covers ~9 time constants of the slowest electrical mode (~9/s
    // for the default parameters), enough for the energy ratio to clear 1e-6
    let mut prev = e0;
    let xf = integrate_motor(&p, x0, 2e-5, 1.0, |_| Vec2::new(0.0, 0.0), |_t, x| {
        let st = MotorState::from_slice(x);
        let e = energy(&st, &p);
        assert!(e <= prev + 1e-14 * e0, "energy rose: {prev} -> {e}");
        prev = e;
    });
    let stf = MotorState::from_slice(&xf);
    let elec_f = energy(&stf, &p) - 0.5 * p.j * stf.omega * stf.omega;
    assert!(
        elec_f < 1e-6 * elec0,
        "electrical energy failed to dissipate: {elec_f} of {elec0}"
    );
    assert!(stf.omega.is_finite() && stf.omega.abs() < 31.0);
}

#[test]
fn rk4_self_convergence_is_fourth_order() {
    // a rich driving voltage with no special symmetry
    let v_of_t = |t: f64| {
        let phase = 100.0 * t + 0.5 * (9.0 * t).sin();
        Vec2::new(
            30.0 * phase.cos() + 5.0 * (3.0 * t).sin(),
            30.0 * phase.sin(),
        )
    };
    let p = MotorParams::default();
    let x0 = [0.02, 0.0, 0.0, 0.0, 0.0];
    let run = |dt: f64| integrate_motor(&p, x0, dt, 0.05, v_of_t, |_, _| {});
    let x_c = run(4e-5);
    let x_m = run(2e-5);
    let x_f = run(1e-5);
    let dist = |a: &[f64; 5], b: &[f64; 5]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let e_coarse = dist(&x_c, &x_m);
    let e_fine = dist(&x_m, &x_f);
    // fourth order predicts a ratio of 16; demand at least half that
    assert!(
        e_coarse / e_fine >= 8.0,
        "convergence ratio {} (coarse {e_coarse}, fine {e_fine})",
        e_coarse / e_fine
    );
}
