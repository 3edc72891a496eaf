//! Compact genus-2 hyperbolic surface presented by a Fuchsian group acting on
//! the Poincaré disk, together with breadth-first enumeration of the group.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::Serialize;

use super::disk::{self, Isometry};
use crate::error::{domain, Error, Result};
use crate::kernels::OrbitGrowth;

/// Default hard cap on the number of group elements held during enumeration.
pub const DEFAULT_MAX_ELEMENTS: usize = 4_000_000;

const DOMAIN_TOLERANCE: f64 = 1e-12;
const DEDUP_TOLERANCE: f64 = 1e-9;
const KEY_GRID: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupElement {
    pub isometry: Isometry,
    pub word_length: u32,
    pub displacement: f64,
}

/// Geometry of the Dirichlet domain centred at the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainGeometry {
    /// Polygon vertices in the disk, counter-clockwise.
    pub vertices: Vec<Complex64>,
    pub interior_angles: Vec<f64>,
    /// Area by Gauss–Bonnet from the measured interior angles.
    pub area: f64,
    pub inradius: f64,
    pub circumradius: f64,
}

struct ElementCache {
    radius: f64,
    elements: Arc<Vec<GroupElement>>,
}

pub struct HyperbolicSurface {
    name: String,
    /// Side pairings followed by their inverses: `generators[k + half]` inverts `generators[k]`.
    generators: Vec<Isometry>,
    relation: Vec<usize>,
    geometry: DomainGeometry,
    systole: f64,
    max_elements: usize,
    cache: RwLock<Option<ElementCache>>,
}

impl std::fmt::Debug for HyperbolicSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HyperbolicSurface")
            .field("name", &self.name)
            .field("generators", &self.generators)
            .field("systole", &self.systole)
            .finish()
    }
}

impl HyperbolicSurface {
    /// The Bolza surface: opposite sides of the regular octagon with interior
    /// angles π/4 are paired by hyperbolic translations through the centre.
    pub fn bolza() -> Result<Self> {
        Self::bolza_with_cap(DEFAULT_MAX_ELEMENTS)
    }

    pub fn bolza_with_cap(max_elements: usize) -> Result<Self> {
        // eight octagons meet at each vertex: cosh(inradius) = cot(π/8)
        let inradius = (1.0 / (PI / 8.0).tan()).acosh();
        let pairings: Vec<Isometry> = (0..4)
            .map(|k| Isometry::translation(2.0 * inradius, k as f64 * PI / 4.0))
            .collect();
        // g0 g1⁻¹ g2 g3⁻¹ g0⁻¹ g1 g2⁻¹ g3 = 1
        let relation = vec![0, 5, 2, 7, 4, 1, 6, 3];
        Self::from_side_pairings("bolza", pairings, relation, max_elements)
    }

    fn from_side_pairings(
        name: &str,
        pairings: Vec<Isometry>,
        relation: Vec<usize>,
        max_elements: usize,
    ) -> Result<Self> {
        let mut generators = pairings.clone();
        generators.extend(pairings.iter().map(Isometry::inverse));
        for g in &generators {
            if !(g.trace().abs() > 2.0) {
                return domain(format!("generator {g:?} is not hyperbolic"));
            }
        }
        let geometry = dirichlet_geometry(&generators)?;
        let mut surface = Self {
            name: name.to_string(),
            generators,
            relation,
            geometry,
            systole: 0.0,
            max_elements,
            cache: RwLock::new(None),
        };
        let residual = surface.relation_residual();
        if residual > 1e-10 {
            return domain(format!("relation word evaluates {residual:e} away from the identity"));
        }
        let genus = 2.0;
        let expected_area = 4.0 * PI * (genus - 1.0);
        if (surface.geometry.area - expected_area).abs() > 1e-9 {
            return domain(format!(
                "fundamental domain area {} differs from {expected_area}",
                surface.geometry.area
            ));
        }
        // every closed geodesic has a lift whose axis meets the domain, so its
        // translation length is realised by an element displacing 0 by at most
        // that length plus twice the circumradius
        let longest_generator = surface
            .generators
            .iter()
            .map(Isometry::displacement)
            .fold(0.0, f64::max);
        let search = longest_generator + 2.0 * surface.geometry.circumradius;
        surface.systole = surface
            .elements_within(search)?
            .iter()
            .skip(1)
            .map(|e| e.isometry.translation_length())
            .fold(f64::INFINITY, f64::min);
        Ok(surface)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn relation(&self) -> &[usize] {
        &self.relation
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geometry
    }

    pub fn volume(&self) -> f64 {
        self.geometry.area
    }

    /// Length of the shortest closed geodesic.
    pub fn systole(&self) -> f64 {
        self.systole
    }

    pub fn injectivity_radius_lower_bound(&self) -> f64 {
        self.systole / 2.0
    }

    pub fn max_elements(&self) -> usize {
        self.max_elements
    }

    /// Orbit points are pairwise at least a systole apart, so disjoint balls of
    /// radius `s = systole/2` give `n(ρ) ≤ area(B(ρ+s)) / area(B(s)) ≤ e^{s} e^{ρ} / (2(cosh s − 1))`.
    pub fn growth(&self) -> OrbitGrowth {
        let s = self.injectivity_radius_lower_bound();
        OrbitGrowth {
            constant: s.exp() / (2.0 * (s.cosh() - 1.0)),
            exponent: 1.0,
            degree: 0,
        }
    }

    /// Max-norm distance (up to sign) of the relation word from the identity.
    pub fn relation_residual(&self) -> f64 {
        let product = self
            .relation
            .iter()
            .fold(Isometry::IDENTITY, |acc, &i| acc.compose(&self.generators[i]));
        product.distance_up_to_sign(&Isometry::IDENTITY)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let d0 = disk::distance_from_origin(z);
        self.generators
            .iter()
            .all(|g| disk::distance_from_origin(g.apply(z)) >= d0 - DOMAIN_TOLERANCE)
    }

    /// Greedy Dirichlet reduction: apply the side pairing that brings the point
    /// closest to the centre until none strictly helps.
    pub fn reduce(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() >= 1.0 {
            return domain(format!("point {z} is not inside the unit disk"));
        }
        let mut current = z;
        let mut d0 = disk::distance_from_origin(current);
        for _ in 0..100_000 {
            let best = self
                .generators
                .iter()
                .map(|g| {
                    let w = g.apply(current);
                    (disk::distance_from_origin(w), w)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("surface has generators");
            if best.0 < d0 - DOMAIN_TOLERANCE {
                current = best.1;
                d0 = best.0;
            } else {
                return Ok(current);
            }
        }
        domain(format!("reduction of {z} did not terminate"))
    }

    /// All group elements (identity first) with displacement at most `radius`,
    /// sorted by displacement then matrix entries. Results are cached; the
    /// returned list may extend past `radius`.
    pub(crate) fn elements_within(&self, radius: f64) -> Result<Arc<Vec<GroupElement>>> {
        if let Some(cache) = self.cache.read().expect("cache lock").as_ref() {
            if cache.radius >= radius {
                return Ok(Arc::clone(&cache.elements));
            }
        }
        let radius = (radius * 2.0).ceil() / 2.0;
        let elements = Arc::new(self.breadth_first(radius)?);
        let mut guard = self.cache.write().expect("cache lock");
        let keep = guard.as_ref().map_or(true, |c| c.radius < radius);
        if keep {
            *guard = Some(ElementCache {
                radius,
                elements: Arc::clone(&elements),
            });
        }
        Ok(elements)
    }

    /// Nontrivial elements with `d(0, γ·0) ≤ radius`, canonically ordered.
    pub fn enumerate(&self, radius: f64) -> Result<Vec<GroupElement>> {
        if !(radius > 0.0) {
            return domain(format!("enumeration radius must be positive, got {radius}"));
        }
        let all = self.elements_within(radius)?;
        let end = all.partition_point(|e| e.displacement <= radius);
        Ok(all[1..end].to_vec())
    }

    fn breadth_first(&self, radius: f64) -> Result<Vec<GroupElement>> {
        // Tiles met by the segment from 0 to γ·0 form a chain of side-adjacent
        // tiles whose centres stay within the circumradius of the segment.
        let expand = radius + self.geometry.circumradius + 1e-9;
        let mut elements = vec![GroupElement {
            isometry: Isometry::IDENTITY,
            word_length: 0,
            displacement: 0.0,
        }];
        let mut index: HashMap<[i64; 4], Vec<u32>> = HashMap::new();
        index.insert(quantize(&Isometry::IDENTITY), vec![0]);
        let mut frontier = vec![0usize];
        let mut depth = 0;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for &i in &frontier {
                let base = elements[i].isometry;
                for g in &self.generators {
                    let candidate = base.compose(g).normalized();
                    let displacement = candidate.displacement();
                    if displacement > expand {
                        continue;
                    }
                    if find_duplicate(&index, &elements, &candidate).is_some() {
                        continue;
                    }
                    if elements.len() >= self.max_elements {
                        return Err(Error::ResourceLimit {
                            what: format!("enumerating group elements within displacement {radius}"),
                            cap: self.max_elements,
                        });
                    }
                    let id = elements.len();
                    index.entry(quantize(&candidate)).or_default().push(id as u32);
                    elements.push(GroupElement {
                        isometry: candidate,
                        word_length: depth,
                        displacement,
                    });
                    next.push(id);
                }
            }
            frontier = next;
        }
        elements.retain(|e| e.displacement <= radius);
        elements.sort_by(|x, y| {
            x.displacement
                .total_cmp(&y.displacement)
                .then_with(|| entries(&x.isometry).cmp_total(&entries(&y.isometry)))
        });
        Ok(elements)
    }

    /// Sample a point from the normalized area measure on the fundamental domain.
    pub fn sample_uniform<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let cap = self.geometry.circumradius.cosh() - 1.0;
        loop {
            // radial CDF of the hyperbolic area in a ball: (cosh ρ − 1) / (cosh R − 1)
            let u: f64 = rng.gen();
            let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
            let rho = (1.0 + u * cap).acosh();
            let z = Complex64::from_polar((rho / 2.0).tanh(), theta);
            if self.contains(z) {
                return z;
            }
        }
    }

    /// Visit every lift `γ·q` within `radius` of `p`, passing the length and the
    /// unit repelling direction at `p` in the orthonormal frame.
    pub(crate) fn visit_geodesics(
        &self,
        p: Complex64,
        q: Complex64,
        radius: f64,
        skip_identity: bool,
        mut visit: impl FnMut(f64, &[f64]),
    ) -> Result<()> {
        let reach = radius + disk::distance_from_origin(p) + disk::distance_from_origin(q);
        let elements = self.elements_within(reach)?;
        let end = elements.partition_point(|e| e.displacement <= reach);
        let dp = 1.0 - p.norm_sqr();
        let dq = 1.0 - q.norm_sqr();
        let start = usize::from(skip_identity);
        for e in &elements[start..end] {
            let image = e.isometry.apply(q);
            let d_image = e.isometry.image_defect(q, dq);
            let length = disk::distance_with_defects(p, dp, image, d_image);
            if length <= radius {
                match disk::direction_towards(p, image) {
                    Some(u) if length > 0.0 => visit(length, &[-u.re, -u.im]),
                    _ => visit(length, &[0.0, 0.0]),
                }
            }
        }
        Ok(())
    }

    /// Counts, relation residual and area check for reporting.
    pub fn audit(&self, radius: f64) -> Result<GroupAudit> {
        let elements = self.enumerate(radius)?;
        let shells = radius.ceil() as usize;
        let mut counts = vec![0usize; shells];
        for e in &elements {
            let shell = (e.displacement.floor() as usize).min(shells - 1);
            counts[shell] += 1;
        }
        let min_abs_trace = elements
            .iter()
            .map(|e| e.isometry.trace().abs())
            .fold(f64::INFINITY, f64::min);
        let max_determinant_error = self
            .generators
            .iter()
            .chain(elements.iter().map(|e| &e.isometry))
            .map(|g| (g.determinant() - 1.0).abs())
            .fold(0.0, f64::max);
        Ok(GroupAudit {
            surface: self.name.clone(),
            relation_residual: self.relation_residual(),
            area: self.geometry.area,
            area_error: (self.geometry.area - 4.0 * PI).abs(),
            generator_traces: self.generators[..self.generators.len() / 2]
                .iter()
                .map(Isometry::trace)
                .collect(),
            radius,
            element_count: elements.len(),
            shell_counts: counts
                .iter()
                .enumerate()
                .map(|(k, &count)| ShellCount {
                    inner: k as f64,
                    outer: (k + 1) as f64,
                    count,
                })
                .collect(),
            min_abs_trace,
            shortest_closed_geodesic: 2.0 * (min_abs_trace / 2.0).acosh(),
            max_determinant_error,
            inradius: self.geometry.inradius,
            circumradius: self.geometry.circumradius,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellCount {
    pub inner: f64,
    pub outer: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupAudit {
    pub surface: String,
    pub relation_residual: f64,
    pub area: f64,
    pub area_error: f64,
    pub generator_traces: Vec<f64>,
    pub radius: f64,
    pub element_count: usize,
    pub shell_counts: Vec<ShellCount>,
    pub min_abs_trace: f64,
    pub shortest_closed_geodesic: f64,
    pub max_determinant_error: f64,
    pub inradius: f64,
    pub circumradius: f64,
}

impl GroupAudit {
    pub fn shells_even(&self) -> bool {
        self.shell_counts.iter().all(|s| s.count % 2 == 0)
    }

    pub fn passes(&self) -> bool {
        self.relation_residual <= 1e-10 && self.area_error <= 1e-9 && self.shells_even()
    }
}

struct Entries([f64; 4]);

impl Entries {
    fn cmp_total(&self, other: &Entries) -> std::cmp::Ordering {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn entries(g: &Isometry) -> Entries {
    Entries([g.a.re, g.a.im, g.b.re, g.b.im])
}

fn quantize(g: &Isometry) -> [i64; 4] {
    entries(g).0.map(|x| (x / KEY_GRID).floor() as i64)
}

fn find_duplicate(
    index: &HashMap<[i64; 4], Vec<u32>>,
    elements: &[GroupElement],
    candidate: &Isometry,
) -> Option<usize> {
    let values = entries(candidate).0;
    // probe the neighbouring cell along any axis where the value sits near a cell edge
    let mut options: [[i64; 2]; 4] = [[0; 2]; 4];
    let mut counts = [1usize; 4];
    for (k, x) in values.iter().enumerate() {
        let scaled = x / KEY_GRID;
        let cell = scaled.floor();
        options[k][0] = cell as i64;
        let frac = scaled - cell;
        if frac < 1e-2 {
            options[k][1] = cell as i64 - 1;
            counts[k] = 2;
        } else if frac > 1.0 - 1e-2 {
            options[k][1] = cell as i64 + 1;
            counts[k] = 2;
        }
    }
    let tolerance = DEDUP_TOLERANCE * candidate.a.norm().max(1.0);
    for i0 in 0..counts[0] {
        for i1 in 0..counts[1] {
            for i2 in 0..counts[2] {
                for i3 in 0..counts[3] {
                    let key = [options[0][i0], options[1][i1], options[2][i2], options[3][i3]];
                    if let Some(ids) = index.get(&key) {
                        for &id in ids {
                            let existing = &elements[id as usize].isometry;
                            if existing.distance_up_to_sign(candidate) <= tolerance {
                                return Some(id as usize);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Vertices, angles and area of the Dirichlet domain at 0 for the given
/// generating set, worked out in the Klein model where sides are straight.
fn dirichlet_geometry(generators: &[Isometry]) -> Result<DomainGeometry> {
    // side for γ: bisector of 0 and γ·0, the Klein line x·u = tanh(d/2)
    let mut sides: Vec<(f64, [f64; 2], f64)> = generators
        .iter()
        .map(|g| {
            let image = g.apply(Complex64::new(0.0, 0.0));
            let angle = image.arg();
            let offset = (g.displacement() / 2.0).tanh();
            (angle.rem_euclid(2.0 * PI), [angle.cos(), angle.sin()], offset)
        })
        .collect();
    sides.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sides.len();
    let mut klein_vertices = Vec::with_capacity(n);
    for i in 0..n {
        let (_, u, s) = sides[i];
        let (_, v, r) = sides[(i + 1) % n];
        let det = u[0] * v[1] - u[1] * v[0];
        if det.abs() < 1e-14 {
            return domain("adjacent sides of the fundamental domain are parallel");
        }
        let x = [(s * v[1] - r * u[1]) / det, (u[0] * r - v[0] * s) / det];
        if x[0] * x[0] + x[1] * x[1] >= 1.0 {
            return domain("fundamental domain has ideal or exterior vertices");
        }
        klein_vertices.push(x);
    }
    let metric = |p: [f64; 2], x: [f64; 2], y: [f64; 2]| {
        let d = 1.0 - (p[0] * p[0] + p[1] * p[1]);
        let px = p[0] * x[0] + p[1] * x[1];
        let py = p[0] * y[0] + p[1] * y[1];
        (x[0] * y[0] + x[1] * y[1]) / d + px * py / (d * d)
    };
    let mut interior_angles = Vec::with_capacity(n);
    for i in 0..n {
        let v = klein_vertices[i];
        let prev = klein_vertices[(i + n - 1) % n];
        let next = klein_vertices[(i + 1) % n];
        let e1 = [prev[0] - v[0], prev[1] - v[1]];
        let e2 = [next[0] - v[0], next[1] - v[1]];
        let cos = metric(v, e1, e2) / (metric(v, e1, e1) * metric(v, e2, e2)).sqrt();
        interior_angles.push(cos.clamp(-1.0, 1.0).acos());
    }
    let area = (n as f64 - 2.0) * PI - interior_angles.iter().sum::<f64>();
    let vertices: Vec<Complex64> = klein_vertices
        .iter()
        .map(|x| {
            // Klein → Poincaré: z = x / (1 + sqrt(1 − |x|²))
            let k = Complex64::new(x[0], x[1]);
            k / (1.0 + (1.0 - k.norm_sqr()).sqrt())
        })
        .collect();
    let circumradius = vertices
        .iter()
        .map(|z| disk::distance_from_origin(*z))
        .fold(0.0, f64::max);
    let inradius = sides
        .iter()
        .map(|(_, _, s)| s.atanh())
        .fold(f64::INFINITY, f64::min);
    Ok(DomainGeometry {
        vertices,
        interior_angles,
        area,
        inradius,
        circumradius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bolza() -> HyperbolicSurface {
        HyperbolicSurface::bolza().unwrap()
    }

    #[test]
    fn bolza_construction_invariants() {
        let s = bolza();
        assert!(s.relation_residual() < 1e-10);
        assert!((s.volume() - 4.0 * PI).abs() < 1e-9);
        for angle in &s.geometry().interior_angles {
            assert!((angle - PI / 4.0).abs() < 1e-10);
        }
        for g in s.generators() {
            assert!(g.trace().abs() > 2.0);
            assert!((g.trace().abs() - 2.0 * (1.0 + 2f64.sqrt())).abs() < 1e-12);
        }
        // cosh(circumradius) = cot²(π/8) for the regular octagon with angles π/4
        let cot = 1.0 / (PI / 8.0).tan();
        assert!((s.geometry().circumradius.cosh() - cot * cot).abs() < 1e-9);
        let systole = 2.0 * (1.0 + 2f64.sqrt()).acosh();
        assert!((s.systole() - systole).abs() < 1e-10);
    }

    #[test]
    fn empty_below_systole_and_paired_with_inverses() {
        let s = bolza();
        assert!(s.enumerate(s.systole() - 1e-6).unwrap().is_empty());
        let elements = s.enumerate(7.0).unwrap();
        assert_eq!(elements.len() % 2, 0);
        for e in &elements {
            let inv = e.isometry.inverse();
            let found = elements
                .iter()
                .filter(|o| o.isometry.distance_up_to_sign(&inv) < 1e-8)
                .count();
            assert_eq!(found, 1);
        }
        // the eight generators are exactly the shortest elements
        let shortest: Vec<_> = elements
            .iter()
            .filter(|e| (e.displacement - s.systole()).abs() < 1e-9)
            .collect();
        assert_eq!(shortest.len(), 8);
        assert!(shortest.iter().all(|e| e.word_length == 1));
    }

    #[test]
    fn enumeration_is_sorted_and_duplicate_free() {
        let s = bolza();
        let elements = s.enumerate(8.0).unwrap();
        for w in elements.windows(2) {
            assert!(w[0].displacement <= w[1].displacement);
        }
        let mut points: Vec<Complex64> = elements
            .iter()
            .map(|e| e.isometry.apply(Complex64::new(0.0, 0.0)))
            .collect();
        points.sort_by(|a, b| a.re.total_cmp(&b.re));
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[j].re - points[i].re > 1e-6 {
                    break;
                }
                assert!(disk::distance(points[i], points[j]) > 1.0);
            }
        }
    }

    #[test]
    fn ball_growth_rate_is_close_to_one() {
        let s = bolza();
        for radius in [4.0, 6.0, 8.0] {
            let count = s.enumerate(radius).unwrap().len() + 1;
            // orbit points in a ball: area(B(R)) / area(F) = (cosh R − 1) / 2
            let predicted = (radius.cosh() - 1.0) / 2.0;
            let ratio = count as f64 / predicted;
            assert!((0.5..2.0).contains(&ratio), "R={radius}: {count} vs {predicted}");
            let rate = (count as f64).ln() / radius;
            assert!((0.5..2.0).contains(&rate));
        }
    }

    #[test]
    fn resource_cap_is_reported() {
        let s = HyperbolicSurface::bolza_with_cap(20_000).unwrap();
        match s.enumerate(14.0) {
            Err(Error::ResourceLimit { cap, .. }) => assert_eq!(cap, 20_000),
            other => panic!("expected resource limit, got {other:?}"),
        }
    }

    #[test]
    fn reduction_lands_in_domain() {
        let s = bolza();
        assert_eq!(s.reduce(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let g = s.generators()[0].compose(&s.generators()[6]).compose(&s.generators()[1]);
        let z = Complex64::new(0.12, -0.31);
        let reduced = s.reduce(g.apply(z)).unwrap();
        assert!(s.contains(reduced));
        assert!((reduced - z).norm() < 1e-10);
        assert!(s.reduce(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn audit_reports_consistent_values() {
        let s = bolza();
        let audit = s.audit(6.0).unwrap();
        assert!(audit.passes());
        assert!((audit.shortest_closed_geodesic - s.systole()).abs() < 1e-10);
        assert_eq!(
            audit.shell_counts.iter().map(|c| c.count).sum::<usize>(),
            audit.element_count
        );
    }
}
