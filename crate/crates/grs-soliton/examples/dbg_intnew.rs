use grs_soliton::integrator::GridSpec;
use grs_soliton::phase::{constraint_residual, integrate_phase, profile_with_r, to_phase};
use grs_soliton::seed::{compute_seed, SolitonParams};

fn main() {
    let params = SolitonParams::from_ell(0.0).with_t_max(100.0);
    let seed = compute_seed(&params).unwrap();
    let grid = GridSpec::Log(16).points(params.eps_handoff, params.t_max);
    let (profile, r_values) = profile_with_r(&params, &seed, &grid).unwrap();
    let phase = integrate_phase(&params, &seed, *r_values.last().unwrap(), &r_values).unwrap();
    println!("{:>11} {:>11} {:>13} {:>13} {:>13} {:>13}", "t", "r", "g_phase", "g_profile", "y_dev", "phisq_rel_dev");
    for ((s, &r), ph) in profile.samples.iter().zip(&r_values).zip(&phase.samples) {
        let direct = to_phase(s);
        let mut d2 = direct.clone();
        d2.r = r;
        println!(
            "{:11.4e} {:11.4e} {:13.3e} {:13.3e} {:13.3e} {:13.3e}",
            s.t, r,
            constraint_residual(ph, &params),
            constraint_residual(&d2, &params),
            ph.y - direct.y,
            (ph.phi_sq - direct.phi_sq) / direct.phi_sq,
        );
    }
}
