use grs_soliton::integrator::integrate_sampled;
use grs_soliton::invariants::conserved_at;
use grs_soliton::seed::{compute_seed, SolitonParams};

fn main() {
    let reference = {
        let params = SolitonParams::from_q(-47.0 / 12.0).with_t_max(50.0).with_tolerances(1e-13, 1e-13);
        let seed = compute_seed(&params).unwrap();
        integrate_sampled(&params, &seed, &[50.0]).unwrap().last().clone()
    };
    for tol in [1e-6_f64, 1e-8] {
        let params = SolitonParams::from_q(-47.0 / 12.0).with_t_max(50.0).with_tolerances(tol, tol);
        let seed = compute_seed(&params).unwrap();
        let traj = integrate_sampled(&params, &seed, &[50.0]).unwrap();
        let s = traj.last();
        let c = conserved_at(s, &params).unwrap();
        // q2 sensitivities
        let dq2_ddphi = -4.0 * s.dphi / (s.phi * s.phi) + 4.0 * s.df / s.phi;
        let dq2_ddf = -2.0 * s.df + 4.0 * s.dphi / s.phi;
        println!(
            "tol={tol:.0e}: drift={:.3e} | errs: phi {:.2e} dphi {:.2e} df {:.2e} | contrib dphi {:.2e} df {:.2e}",
            c.drift2,
            (s.phi - reference.phi).abs(),
            (s.dphi - reference.dphi).abs(),
            (s.df - reference.df).abs(),
            dq2_ddphi * (s.dphi - reference.dphi),
            dq2_ddf * (s.df - reference.df),
        );
    }
}
