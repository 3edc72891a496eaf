// Energy minimizers on a circle are equally spaced.
//
// Multistart descent from random starts lands on the regular N-gon, whose
// energy has a closed form: only modes that are multiples of N survive.
// The bandwidth shrinks with N so the surviving weights stay well above
// rounding level.

use std::f64::consts::PI;

use repulse::diagnostics::symmetric_minimizer_oracle;
use repulse::kernels::KernelPair;
use repulse::manifolds::Manifold;
use repulse::optimize::{multistart, Objective, OptimizeParams};

pub fn run() -> repulse::Result<()> {
    let circle = Manifold::torus(vec![1.0])?;
    let params = OptimizeParams {
        restarts: 4,
        grad_tol: 1e-10,
        ..OptimizeParams::default()
    };
    for n in 2..=6usize {
        let t = 1.0 / (PI * PI * (n * n) as f64);
        let kernel = KernelPair::heat(t, 1)?;
        let objective = Objective::for_model(&circle, &kernel, n, 1e-12, 1e-12)?;
        let best = multistart(&objective, n, &params, false)?.best;
        let mut xs: Vec<f64> = best.config.points().iter().map(|p| p.coords()[0]).collect();
        xs.sort_by(f64::total_cmp);
        let gaps: Vec<f64> = (0..n).map(|i| if i + 1 < n { xs[i + 1] - xs[i] } else { 1.0 + xs[0] - xs[i] }).collect();
        let spread = gaps.iter().fold(0.0f64, |a, g| a.max((g - 1.0 / n as f64).abs()));
        let oracle = symmetric_minimizer_oracle(n, 1.0, &kernel)?.value;
        println!(
            "N = {n}: energy {:.12e}  N-gon {:.12e}  gap spread {spread:.1e}  {:?}",
            best.energy.value, oracle, best.termination
        );
        assert!(spread < 1e-6);
        assert!((best.energy.value - oracle).abs() <= 1e-6 * oracle);
    }
    Ok(())
}

fn main() {
    run().expect("circle example failed");
}
