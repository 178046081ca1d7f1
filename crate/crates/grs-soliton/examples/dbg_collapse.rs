use grs_soliton::integrator::integrate;
use grs_soliton::seed::{compute_seed, SolitonParams};

fn main() {
    let params = SolitonParams::from_q(-0.5).with_t_max(10.0);
    let seed = compute_seed(&params).unwrap();
    let traj = integrate(&params, &seed).unwrap();
    println!("termination: {:?}", traj.termination);
    let last = traj.samples.last().unwrap();
    println!("last sample: t={} phi={:e} dphi={} f={:e}", last.t, last.phi, last.dphi, last.f);
    println!("pi*sqrt2 = {}", std::f64::consts::PI * std::f64::consts::SQRT_2);
}
