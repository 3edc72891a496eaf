// The mean spectral energy of uniform random configurations.
//
// Averaging `|S_m|²` over independent uniform points leaves only the
// diagonal terms, so the mean energy is `(N/V) Σ a_n`. A Monte Carlo
// estimate should land within a few standard errors.

use repulse::diagnostics::mean_energy_check;
use repulse::kernels::{spectral_truncation, KernelPair};
use repulse::manifolds::Manifold;
use repulse::spectrum::build_basis;

pub fn run() -> repulse::Result<()> {
    let periods = vec![1.0, 1.0];
    let torus = Manifold::torus(periods.clone())?;
    let kernel = KernelPair::heat(0.05, 2)?;
    for n in [1usize, 4, 8] {
        let lambda_max = spectral_truncation(&kernel, &periods, n, 1e-10)?;
        let basis = build_basis(&torus, &kernel, lambda_max)?;
        let r = mean_energy_check(&basis, n, 500, 7)?;
        println!(
            "N = {n}: mean {:.6}  target {:.6}  SE {:.2e}  deviation {:+.2} SE",
            r.mean,
            r.target,
            r.standard_error,
            if r.standard_error > 1e-12 * r.target { r.deviation / r.standard_error } else { 0.0 }
        );
        assert!(r.agree);
    }
    Ok(())
}

fn main() {
    run().expect("mean energy example failed");
}
