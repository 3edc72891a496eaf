use num_complex::Complex64;
use proptest::prelude::*;

use repulse::energy::{energy_geometric, energy_spectral, force_at, gradient_spectral, pretrace_residual, Configuration};
use repulse::kernels::{spectral_truncation, KernelPair};
use repulse::manifolds::{disk, Manifold, Point};
use repulse::optimize::uniform_random_configuration;
use repulse::spectrum::{build_basis, SpectralBasis};

const EPS: f64 = 1e-12;

fn torus_setup(periods: Vec<f64>, t: f64, n: usize) -> (Manifold, KernelPair, SpectralBasis) {
    let m = Manifold::torus(periods.clone()).unwrap();
    let k = KernelPair::heat(t, m.dim()).unwrap();
    let lambda = spectral_truncation(&k, &periods, n, EPS).unwrap();
    let b = build_basis(&m, &k, lambda).unwrap();
    (m, k, b)
}

fn unit(x: f64) -> f64 {
    x.rem_euclid(1.0)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn torus_distance_is_a_metric(
        a in prop::array::uniform2(0.0..1.0f64),
        b in prop::array::uniform2(0.0..1.0f64),
        c in prop::array::uniform2(0.0..1.0f64),
    ) {
        let m = Manifold::torus(vec![1.0, 0.7]).unwrap();
        let p = m.reduce(&[a[0], a[1] * 0.7]).unwrap();
        let q = m.reduce(&[b[0], b[1] * 0.7]).unwrap();
        let r = m.reduce(&[c[0], c[1] * 0.7]).unwrap();
        let pq = m.distance(&p, &q).unwrap();
        prop_assert_eq!(m.distance(&p, &p).unwrap(), 0.0);
        prop_assert!((pq - m.distance(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(pq <= m.distance(&p, &r).unwrap() + m.distance(&r, &q).unwrap() + 1e-12);
        prop_assert!(pq <= 0.5 * (1.0f64 + 0.49).sqrt() + 1e-12);
    }

    #[test]
    fn torus_reduce_is_idempotent(x in -50.0..50.0f64, y in -50.0..50.0f64) {
        let m = Manifold::torus(vec![1.0, 2.5]).unwrap();
        let p = m.reduce(&[x, y]).unwrap();
        prop_assert!(m.is_reduced(&p));
        prop_assert_eq!(m.reduce(p.coords()).unwrap(), p);
    }

    #[test]
    fn weyl_amplitudes_are_conjugate_symmetric(seed in any::<u64>(), n in 1usize..7) {
        let (m, _, b) = torus_setup(vec![1.0, 1.5], 0.05, n);
        let c = uniform_random_configuration(&m, n, seed).unwrap();
        let amps = b.weyl_amplitudes(c.points());
        for (i, mode) in b.modes().iter().enumerate() {
            let neg: Vec<i64> = mode.index.iter().map(|k| -k).collect();
            let j = b.modes().iter().position(|x| x.index == neg).unwrap();
            prop_assert!((amps[i] - amps[j].conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn energies_are_translation_and_permutation_invariant(
        seed in any::<u64>(),
        shift in prop::array::uniform2(0.0..1.0f64),
        n in 2usize..6,
    ) {
        let (m, k, b) = torus_setup(vec![1.0, 1.0], 0.05, n);
        let c = uniform_random_configuration(&m, n, seed).unwrap();
        let moved = Configuration::new(
            c.points().iter().map(|p| Point(vec![unit(p.0[0] + shift[0]), unit(p.0[1] + shift[1])])).collect(),
        ).unwrap();
        let mut rev = c.points().to_vec();
        rev.reverse();
        let rev = Configuration::new(rev).unwrap();
        let e = energy_spectral(&c, &b).unwrap().value;
        prop_assert!(close(e, energy_spectral(&moved, &b).unwrap().value, 1e-10));
        prop_assert!(close(e, energy_spectral(&rev, &b).unwrap().value, 1e-12));
        let g = energy_geometric(&c, &m, &k, EPS).unwrap().value;
        prop_assert!(close(g, energy_geometric(&moved, &m, &k, EPS).unwrap().value, 1e-10));
        prop_assert!(close(g, energy_geometric(&rev, &m, &k, EPS).unwrap().value, 1e-12));
    }

    #[test]
    fn pretrace_residual_stays_in_budget(seed in any::<u64>(), n in 1usize..9, t in 0.02..0.2f64) {
        let (m, k, b) = torus_setup(vec![1.0, 0.8], t, n);
        let c = uniform_random_configuration(&m, n, seed).unwrap();
        let r = pretrace_residual(&c, &m, &k, &b, EPS).unwrap();
        prop_assert!(r.within_budget(), "{:?}", r);
    }

    #[test]
    fn spectral_gradient_matches_central_differences(seed in any::<u64>()) {
        let n = 4;
        let (m, _, b) = torus_setup(vec![1.0, 1.0], 0.05, n);
        let c = uniform_random_configuration(&m, n, seed).unwrap();
        let grad = gradient_spectral(&c, &b).unwrap();
        let h = 1e-5;
        for i in 0..n {
            for axis in 0..2 {
                let shifted = |s: f64| {
                    let mut pts = c.points().to_vec();
                    pts[i].0[axis] = unit(pts[i].0[axis] + s);
                    energy_spectral(&Configuration::new(pts).unwrap(), &b).unwrap().value
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                prop_assert!((fd - grad[i][axis]).abs() <= 1e-5 * grad[i][axis].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn circle_force_is_minus_half_gradient(seed in any::<u64>(), n in 2usize..6) {
        let m = Manifold::torus(vec![1.0]).unwrap();
        let k = KernelPair::heat(0.03, 1).unwrap();
        let c = uniform_random_configuration(&m, n, seed).unwrap();
        let h = 1e-5;
        for i in 0..n {
            let f = force_at(&c, i, &m, &k, EPS).unwrap()[0];
            let shifted = |s: f64| {
                let mut pts = c.points().to_vec();
                pts[i] = m.retract(&pts[i], &[s]).unwrap();
                energy_geometric(&Configuration::new(pts).unwrap(), &m, &k, EPS).unwrap().value
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            prop_assert!((f + 0.5 * fd).abs() <= 1e-5 * f.abs().max(1e-3), "force {} fd {}", f, fd);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bolza_distance_is_a_metric(seed in any::<u64>()) {
        let m = Manifold::bolza().unwrap();
        let c = uniform_random_configuration(&m, 3, seed).unwrap();
        let [p, q, r] = [&c.points()[0], &c.points()[1], &c.points()[2]];
        let pq = m.distance(p, q).unwrap();
        prop_assert!(m.distance(p, p).unwrap() < 1e-12);
        prop_assert!((pq - m.distance(q, p).unwrap()).abs() < 1e-10);
        prop_assert!(pq <= m.distance(p, r).unwrap() + m.distance(r, q).unwrap() + 1e-10);
        // both points lie within the circumradius of the centre
        let Manifold::Hyperbolic(s) = &m else { unreachable!() };
        prop_assert!(pq <= 2.0 * s.geometry().circumradius + 1e-9);
    }

    #[test]
    fn short_exponential_steps_travel_their_length(
        seed in any::<u64>(),
        len in 0.01..1.0f64,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let m = Manifold::bolza().unwrap();
        let start = uniform_random_configuration(&m, 1, seed).unwrap();
        let p = &start.points()[0];
        let z = Complex64::new(p.0[0], p.0[1]);
        let w = disk::exp_map(z, Complex64::from_polar(len, angle));
        prop_assert!((disk::distance(z, w) - len).abs() < 1e-10);
        // reduction does not change the distance on the surface
        let q = m.retract(p, &[len * angle.cos(), len * angle.sin()]).unwrap();
        prop_assert!(m.distance(p, &q).unwrap() <= len + 1e-10);
    }

    #[test]
    fn bolza_force_is_minus_half_gradient(seed in any::<u64>()) {
        let m = Manifold::bolza().unwrap();
        let k = KernelPair::heat(0.2, 2).unwrap();
        let n = 3;
        let c = uniform_random_configuration(&m, n, seed).unwrap();
        let h = 1e-5;
        for i in 0..n {
            let f = force_at(&c, i, &m, &k, EPS).unwrap();
            for axis in 0..2 {
                let shifted = |s: f64| {
                    let mut v = [0.0; 2];
                    v[axis] = s;
                    let mut pts = c.points().to_vec();
                    pts[i] = m.retract(&pts[i], &v).unwrap();
                    energy_geometric(&Configuration::new(pts).unwrap(), &m, &k, EPS).unwrap().value
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                prop_assert!(
                    (f[axis] + 0.5 * fd).abs() <= 1e-5 * f[axis].abs().max(1e-3),
                    "force {} fd {}", f[axis], fd
                );
            }
        }
    }
}
