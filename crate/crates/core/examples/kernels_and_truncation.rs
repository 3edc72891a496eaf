// The heat kernel pair and its certified truncation.
//
// Prints `k`, `H` and `h` at a few arguments, then picks a geodesic radius
// and an eigenvalue cutoff for a target tolerance and checks each against
// the omitted terms summed by brute force.

use std::f64::consts::PI;

use repulse::kernels::{geometric_truncation_radius, spectral_truncation, KernelPair, OrbitGrowth};

pub fn run() -> repulse::Result<()> {
    let kernel = KernelPair::heat(0.05, 1)?;
    println!("heat kernel, t = {}, d = {}", kernel.t, kernel.dim);
    for rho in [0.0, 0.1, 0.3, 0.6] {
        println!(
            "  rho = {rho:.1}  k = {:.6e}  H = {:.6e}",
            kernel.potential(rho)?,
            kernel.force_magnitude(rho)?
        );
    }
    for m in 0..4 {
        let lambda = 4.0 * PI * PI * (m * m) as f64;
        println!("  lambda = {lambda:8.3}  h = {:.6e}", kernel.spectral_weight(lambda)?);
    }

    // on the unit circle the images of a point sit at integer offsets
    let eps = 1e-10;
    let growth = OrbitGrowth::lattice(&[1.0]);
    let radius = geometric_truncation_radius(&kernel, &growth, eps)?;
    let x = 0.3;
    let omitted: f64 = (-2000i64..=2000)
        .map(|j| (x + j as f64).abs())
        .filter(|rho| *rho > radius)
        .map(|rho| kernel.potential(rho).unwrap())
        .sum();
    println!("geodesic radius {radius} leaves out {omitted:.3e} (< {eps:.0e})");
    assert!(omitted < eps);

    let n_points = 8;
    let lambda_max = spectral_truncation(&kernel, &[1.0], n_points, eps)?;
    let cutoff = (lambda_max.sqrt() / (2.0 * PI)).floor() as i64;
    let omitted: f64 = (cutoff + 1..2000)
        .map(|m| 2.0 * kernel.spectral_weight(4.0 * PI * PI * (m * m) as f64).unwrap())
        .sum();
    let scaled = (n_points * n_points) as f64 * omitted;
    println!("eigenvalue cutoff {lambda_max:.3} (|m| <= {cutoff}) leaves out N²·{omitted:.3e} = {scaled:.3e}");
    assert!(scaled < eps);
    Ok(())
}

fn main() {
    run().expect("kernel example failed");
}
