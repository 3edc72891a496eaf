// Stable configurations on the Bolza surface.
//
// There is no closed-form spectrum here, so descent runs on the geometric
// energy and stability is judged by the net force on each point. The
// nearest-neighbour comparison against uniform random points is only a
// heuristic for spread.

use repulse::diagnostics::nearest_neighbor_statistics;
use repulse::kernels::KernelPair;
use repulse::manifolds::Manifold;
use repulse::optimize::{multistart, Objective, OptimizeParams};

pub fn run() -> repulse::Result<()> {
    let surface = Manifold::bolza()?;
    let kernel = KernelPair::heat(0.2, 2)?;
    let params = OptimizeParams {
        restarts: 2,
        grad_tol: 1e-7,
        ..OptimizeParams::default()
    };
    for n in [2usize, 3] {
        let objective = Objective::for_model(&surface, &kernel, n, 1e-10, 1e-10)?;
        let best = multistart(&objective, n, &params, false)?.best;
        let decreasing = best.trace.windows(2).all(|w| w[1].energy < w[0].energy);
        let nn = nearest_neighbor_statistics(&surface, &best.config)?;
        println!(
            "N = {n}: energy {:.10e}  max force {:.2e}  {} steps, monotone {decreasing}",
            best.energy.value, best.residual_norm, best.iterations
        );
        println!(
            "  nearest neighbour mean {:.4} vs uniform {:.4} (heuristic ratio {:.2})",
            nn.mean, nn.uniform_baseline, nn.regularity
        );
        assert!(best.residual_norm <= 1e-6 && decreasing);
    }
    Ok(())
}

fn main() {
    run().expect("hyperbolic example failed");
}
