// The two energies of a torus configuration agree.
//
// The geometric energy sums the kernel over connecting geodesics; the
// spectral energy weights Weyl sums by `h(λ)`. Once the identity loops and
// the constant mode are put back, the two sides match to within the
// certified truncation tails (Poisson summation).

use repulse::energy::pretrace_residual;
use repulse::kernels::{spectral_truncation, KernelPair};
use repulse::manifolds::Manifold;
use repulse::optimize::uniform_random_configuration;
use repulse::spectrum::build_basis;

pub fn run() -> repulse::Result<()> {
    let eps = 1e-10;
    for periods in [vec![1.0], vec![1.0, 1.0], vec![1.0, 0.5, 2.0]] {
        let m = Manifold::torus(periods.clone())?;
        for t in [0.02, 0.1] {
            let kernel = KernelPair::heat(t, m.dim())?;
            let n = 6;
            let lambda_max = spectral_truncation(&kernel, &periods, n, eps)?;
            let basis = build_basis(&m, &kernel, lambda_max)?;
            let config = uniform_random_configuration(&m, n, 11)?;
            let r = pretrace_residual(&config, &m, &kernel, &basis, eps)?;
            println!(
                "periods {periods:?} t = {t}: E_geo {:.10e}  E_spec {:.10e}  residual {:+.2e}  budget {:.2e}  ({} modes)",
                r.geometric.value,
                r.spectral.value,
                r.residual,
                r.budget,
                basis.len()
            );
            assert!(r.within_budget());
        }
    }
    Ok(())
}

fn main() {
    run().expect("pretrace example failed");
}
