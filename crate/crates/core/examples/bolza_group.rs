// The Bolza surface as a quotient of the Poincaré disk.
//
// Shows the generators, the shortest closed geodesics they produce, and an
// audit of the group presentation: relation word, area, and element counts
// in displacement shells.

use repulse::manifolds::{HyperbolicSurface, Manifold, Point};

pub fn run() -> repulse::Result<()> {
    let surface = HyperbolicSurface::bolza()?;
    let g = surface.geometry();
    println!("{}: area {:.12} (4π = {:.12})", surface.name(), surface.volume(), 4.0 * std::f64::consts::PI);
    println!("inradius {:.6}  circumradius {:.6}", g.inradius, g.circumradius);
    for (k, gen) in surface.generators().iter().enumerate() {
        println!("  generator {k}: trace {:.12}  translation length {:.12}", gen.trace(), gen.translation_length());
    }
    println!("systole {:.12}", surface.systole());

    let audit = surface.audit(6.0)?;
    println!(
        "audit to radius {}: {} elements, relation residual {:.2e}, area error {:.2e}",
        audit.radius, audit.element_count, audit.relation_residual, audit.area_error
    );
    for shell in &audit.shell_counts {
        println!("  ({:.0}, {:.0}]: {}", shell.inner, shell.outer, shell.count);
    }
    assert!(audit.passes());

    // every closed loop at the centre has at least systole length
    let m = Manifold::bolza()?;
    let origin = Point(vec![0.0, 0.0]);
    let loops = m.geodesics_between(&origin, &origin, 4.0)?;
    println!("{} loops of length <= 4 at the centre", loops.len());
    assert!(loops.iter().all(|s| s.length >= surface.systole() - 1e-9));
    Ok(())
}

fn main() {
    run().expect("group example failed");
}
