use grs_soliton::integrator::{integrate_sampled, GridSpec};
use grs_soliton::invariants::conserved_at;
use grs_soliton::seed::{compute_seed, SolitonParams};
use std::time::Instant;

fn main() {
    for (tol, n) in [(1e-10, 32), (1e-12, 32), (1e-10, 128), (1e-12, 128)] {
        let t0 = Instant::now();
        let params = SolitonParams::from_q(-47.0 / 12.0)
            .with_t_max(100.0)
            .with_tolerances(tol, tol);
        let seed = compute_seed(&params).unwrap();
        let grid = GridSpec::Log(n).points(params.eps_handoff, params.t_max);
        let traj = integrate_sampled(&params, &seed, &grid).unwrap();
        let mut max_d: f64 = 0.0;
        let mut argmax = 0.0;
        for s in &traj.samples {
            let c = conserved_at(s, &params).unwrap();
            if c.drift2 > max_d { max_d = c.drift2; argmax = s.t; }
        }
        println!("tol={tol:.0e} n={n}: drift={max_d:.3e} at t={argmax:.4e}  ({} ms)", t0.elapsed().as_millis());
    }
}
