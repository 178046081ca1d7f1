use grs_soliton::integrator::GridSpec;
use grs_soliton::phase::{integrate_phase, profile_with_r, to_phase};
use grs_soliton::seed::{compute_seed, SolitonParams};
use std::f64::consts::SQRT_2;

fn main() {
    let params = SolitonParams::from_q(-0.5).with_t_max(4.0);
    let seed = compute_seed(&params).unwrap();
    let grid = GridSpec::Log(9).points(params.eps_handoff, params.t_max);
    let (profile, r_values) = profile_with_r(&params, &seed, &grid).unwrap();
    let phase = integrate_phase(&params, &seed, *r_values.last().unwrap(), &r_values).unwrap();

    let r_exact = |t: f64| {
        let u = t / SQRT_2;
        let e = params.eps_handoff / SQRT_2;
        SQRT_2 * ((u / 2.0).tan().ln() - (e / 2.0).tan().ln())
    };
    println!("{:>10} {:>13} {:>13} {:>13} {:>13}", "t", "r_err", "prof_x_err", "phase_x_err", "phase_z_err");
    for ((s, &r), ph) in profile.samples.iter().zip(&r_values).zip(&phase.samples) {
        let u = s.t / SQRT_2;
        let p = to_phase(s);
        println!(
            "{:10.4e} {:13.3e} {:13.3e} {:13.3e} {:13.3e}",
            s.t,
            r - r_exact(s.t),
            p.x - u.cos(),
            ph.x - u.cos(),
            ph.z - SQRT_2 * u.sin(),
        );
    }
}
