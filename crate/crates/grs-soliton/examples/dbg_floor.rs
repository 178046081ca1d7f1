use grs_soliton::integrator::integrate;
use grs_soliton::invariants::conserved_at;
use grs_soliton::seed::{compute_seed, eval_seed, SolitonParams};

fn main() {
    let params = SolitonParams::from_q(-47.0 / 12.0).with_t_max(100.0);
    let seed = compute_seed(&params).unwrap();
    // pure-seed q2 drift (no integration): isolates evaluation noise
    for t in [1e-3, 1.3e-3, 2e-3, 1e-2] {
        let c = conserved_at(&eval_seed(&seed, t), &params).unwrap();
        println!("seed-only t={t:.2e}: drift2={:.3e}", c.drift2);
    }
    // integrated states near handoff vs seed states
    for tol in [1e-10_f64, 1e-12] {
        let p = params.clone().with_tolerances(tol, tol);
        let traj = integrate(&p, &seed).unwrap();
        for s in traj.samples.iter().take(16).step_by(3) {
            let exact = eval_seed(&seed, s.t);
            let c = conserved_at(s, &p).unwrap();
            println!(
                "tol={tol:.0e} t={:.5e}: drift2={:.3e} |df err|={:.3e} |dphi err|={:.3e}",
                s.t, c.drift2, (s.df - exact.df).abs(), (s.dphi - exact.dphi).abs()
            );
        }
    }
}
