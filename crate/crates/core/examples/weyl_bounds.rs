// Certified minimizers satisfy the Weyl-sum bound.
//
// A configuration with energy below the uniform mean has every normalized
// Weyl sum `w_m` below `C(m)/√N`. A clustered configuration sits far above
// the mean and breaks the bound.

use repulse::diagnostics::weyl_report;
use repulse::energy::Configuration;
use repulse::kernels::KernelPair;
use repulse::manifolds::Manifold;
use repulse::optimize::{multistart, Objective, OptimizeParams};

pub fn run() -> repulse::Result<()> {
    let torus = Manifold::torus(vec![1.0, 1.0])?;
    let kernel = KernelPair::heat(0.05, 2)?;
    let n = 9;
    let objective = Objective::for_model(&torus, &kernel, n, 1e-10, 1e-10)?;
    let params = OptimizeParams {
        restarts: 2,
        max_iters: 1000,
        ..OptimizeParams::default()
    };
    let best = multistart(&objective, n, &params, false)?.best;
    let basis = objective.basis().expect("tori have a spectral basis");
    let report = weyl_report(&best.config, basis)?;
    println!(
        "N = {n}: energy {:.4e} vs mean {:.4e}, certified {}",
        report.energy, report.mean_level, report.certified_below_mean
    );
    for mode in report.modes.iter().take(8) {
        println!("  m = {:?}: w = {:.3e}  bound = {:.3e}", mode.index, mode.w, mode.bound);
    }
    assert!(report.certified_below_mean && report.all_pass);

    let clustered = Configuration::from_coords(&torus, &vec![vec![0.5, 0.5]; n])?;
    let bad = weyl_report(&clustered, basis)?;
    println!(
        "clustered: certified {}, {} of {} modes over the bound",
        bad.certified_below_mean,
        bad.failures(),
        bad.modes.len()
    );
    assert!(!bad.certified_below_mean && bad.failures() > 0);
    Ok(())
}

fn main() {
    run().expect("weyl example failed");
}
