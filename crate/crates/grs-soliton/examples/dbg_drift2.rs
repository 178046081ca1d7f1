use grs_soliton::integrator::integrate;
use grs_soliton::invariants::conserved_at;
use grs_soliton::seed::{compute_seed, SolitonParams};

fn main() {
    for tol in [1e-4, 1e-5, 1e-6, 1e-7, 1e-8] {
        let params = SolitonParams::from_q(-47.0 / 12.0)
            .with_t_max(50.0)
            .with_tolerances(tol, tol);
        let seed = compute_seed(&params).unwrap();
        let traj = integrate(&params, &seed).unwrap();
        let mut max_all: f64 = 0.0;
        let mut argmax = 0.0;
        for s in &traj.samples {
            let c = conserved_at(s, &params).unwrap();
            if c.drift2 > max_all { max_all = c.drift2; argmax = s.t; }
        }
        println!("tol={tol:.0e}: drift2={max_all:.3e} at t={argmax:.4}");
    }
}
