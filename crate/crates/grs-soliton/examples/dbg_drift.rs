use grs_soliton::integrator::integrate;
use grs_soliton::invariants::conserved_at;
use grs_soliton::seed::{compute_seed, SolitonParams};

fn main() {
    for tol in [1e-4, 1e-6, 1e-8, 1e-10, 1e-12] {
        let params = SolitonParams::from_q(-47.0 / 12.0)
            .with_t_max(100.0)
            .with_tolerances(tol, tol);
        let seed = compute_seed(&params).unwrap();
        let traj = integrate(&params, &seed).unwrap();
        let mut max_all: f64 = 0.0;
        let mut argmax = 0.0;
        let mut max_late: f64 = 0.0; // only t >= 0.1
        for s in &traj.samples {
            let c = conserved_at(s, &params).unwrap();
            if c.drift2 > max_all {
                max_all = c.drift2;
                argmax = s.t;
            }
            if s.t >= 0.1 {
                max_late = max_late.max(c.drift2);
            }
        }
        println!("tol={tol:.0e}: max_drift2={max_all:.3e} (at t={argmax:.4}) late_drift={max_late:.3e}");
    }
}
