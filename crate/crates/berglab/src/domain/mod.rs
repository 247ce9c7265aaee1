//! Model domains, defining functions, and weights.
//!
//! Every domain here is bounded and, except for the punctured disc, has
//! Lipschitz boundary. Two defining functions are exposed per domain: the
//! signed boundary distance and an algebraic choice; both are negative
//! inside, zero on the boundary, positive outside, and comparable on
//! interior grids.

pub mod quadrature;

use num_complex::Complex64 as Cx;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which defining function realizes the weight |rho|^r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoChoice {
    /// Signed boundary distance, negative inside.
    Distance,
    /// Polynomial-in-|z| choice, e.g. |z|^2 - 1 on the disc; per-factor on
    /// the polydisc.
    Algebraic,
}

/// Weight specification h = |rho|^r.
///
/// On the polydisc the algebraic choice is per-factor: h is the product of
/// the factor weights (1 - |z_k|^2)^r, which is what makes the weighted
/// norms and kernels factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub exponent: f64,
    pub rho: RhoChoice,
}

impl WeightSpec {
    pub fn unweighted() -> Self {
        WeightSpec {
            exponent: 0.0,
            rho: RhoChoice::Algebraic,
        }
    }

    pub fn new(exponent: f64, rho: RhoChoice) -> Result<Self> {
        if !(exponent >= 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight exponent must be a finite real >= 0, got {exponent}"
            )));
        }
        Ok(WeightSpec { exponent, rho })
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Disc,
    Polydisc(usize),
    Ball(usize),
    Annulus { eps: f64 },
    PuncturedDisc,
    Shell { r_in: f64, r_out: f64 },
    Lens {
        parent: Box<DomainSpec>,
        center: Vec<(f64, f64)>,
        radius: f64,
    },
}

/// A validated model domain together with its complex dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub dim: usize,
}

impl DomainSpec {
    pub fn disc() -> Self {
        DomainSpec {
            kind: DomainKind::Disc,
            dim: 1,
        }
    }

    pub fn punctured_disc() -> Self {
        DomainSpec {
            kind: DomainKind::PuncturedDisc,
            dim: 1,
        }
    }

    pub fn polydisc(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "polydisc dimension must be >= 1".into(),
            ));
        }
        Ok(DomainSpec {
            kind: DomainKind::Polydisc(n),
            dim: n,
        })
    }

    pub fn ball(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "ball dimension must be >= 1".into(),
            ));
        }
        Ok(DomainSpec {
            kind: DomainKind::Ball(n),
            dim: n,
        })
    }

    pub fn annulus(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "annulus inner radius must lie in (0,1), got {eps}"
            )));
        }
        Ok(DomainSpec {
            kind: DomainKind::Annulus { eps },
            dim: 1,
        })
    }

    pub fn shell(r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_in < r_out) || !r_out.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "shell radii must satisfy 0 < r_in < r_out, got ({r_in}, {r_out})"
            )));
        }
        Ok(DomainSpec {
            kind: DomainKind::Shell { r_in, r_out },
            dim: 2,
        })
    }

    /// Lens = parent ∩ B(center, radius). Restricted to planar parents
    /// (disc, annulus, punctured disc); nonemptiness and connectivity are
    /// checked on a grid.
    pub fn lens(parent: DomainSpec, center: Cx, radius: f64) -> Result<Self> {
        if parent.dim != 1 {
            return Err(Error::InvalidParameter(
                "lens parent must be a planar domain".into(),
            ));
        }
        if matches!(parent.kind, DomainKind::Lens { .. }) {
            return Err(Error::InvalidParameter(
                "nested lens domains are not supported".into(),
            ));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lens radius must be positive, got {radius}"
            )));
        }
        let spec = DomainSpec {
            kind: DomainKind::Lens {
                parent: Box::new(parent),
                center: vec![(center.re, center.im)],
                radius,
            },
            dim: 1,
        };
        let cells = spec.lens_grid_cells(96)?;
        if cells.is_empty() {
            return Err(Error::InvalidParameter(
                "empty lens: parent and ball do not intersect".into(),
            ));
        }
        if !grid_connected(&cells) {
            return Err(Error::InvalidParameter(
                "lens is disconnected on the sample grid".into(),
            ));
        }
        Ok(spec)
    }

    pub fn lens_center(&self) -> Option<Cx> {
        match &self.kind {
            DomainKind::Lens { center, .. } => Some(Cx::new(center[0].0, center[0].1)),
            _ => None,
        }
    }

    pub fn lens_radius(&self) -> Option<f64> {
        match &self.kind {
            DomainKind::Lens { radius, .. } => Some(*radius),
            _ => None,
        }
    }

    pub fn lens_parent(&self) -> Option<&DomainSpec> {
        match &self.kind {
            DomainKind::Lens { parent, .. } => Some(parent),
            _ => None,
        }
    }

    /// True for kinds invariant under independent coordinate rotations.
    pub fn is_reinhardt(&self) -> bool {
        !matches!(self.kind, DomainKind::Lens { .. })
    }

    /// A finite bound on the diameter.
    pub fn diameter_bound(&self) -> f64 {
        match &self.kind {
            DomainKind::Disc | DomainKind::PuncturedDisc | DomainKind::Annulus { .. } => 2.0,
            DomainKind::Polydisc(n) => 2.0 * (*n as f64).sqrt(),
            DomainKind::Ball(_) => 2.0,
            DomainKind::Shell { r_out, .. } => 2.0 * r_out,
            DomainKind::Lens { parent, radius, .. } => {
                parent.diameter_bound().min(2.0 * radius)
            }
        }
    }

    /// Stable identity string; feeds cache keys.
    pub fn fingerprint(&self) -> String {
        match &self.kind {
            DomainKind::Disc => "disc".into(),
            DomainKind::PuncturedDisc => "punctured_disc".into(),
            DomainKind::Polydisc(n) => format!("polydisc:{n}"),
            DomainKind::Ball(n) => format!("ball:{n}"),
            DomainKind::Annulus { eps } => format!("annulus:{eps:.17e}"),
            DomainKind::Shell { r_in, r_out } => {
                format!("shell:{r_in:.17e}:{r_out:.17e}")
            }
            DomainKind::Lens {
                parent,
                center,
                radius,
            } => format!(
                "lens({};{:.17e}+{:.17e}i;{:.17e})",
                parent.fingerprint(),
                center[0].0,
                center[0].1,
                radius
            ),
        }
    }

    /// Defining function: negative inside, zero on the boundary, positive
    /// outside. The puncture of the punctured disc has empty interior and
    /// zero measure, and the L^2 theory does not see it, so rho deliberately
    /// coincides with the disc's; the puncture shows up only in
    /// `boundary_grid` so that sup-norm checks can expose it.
    pub fn rho(&self, choice: RhoChoice, z: &[Cx]) -> f64 {
        match &self.kind {
            DomainKind::Disc | DomainKind::PuncturedDisc => {
                let t = z[0].norm();
                match choice {
                    RhoChoice::Algebraic => t * t - 1.0,
                    RhoChoice::Distance => t - 1.0,
                }
            }
            DomainKind::Polydisc(n) => {
                let mut m = f64::NEG_INFINITY;
                for k in 0..*n {
                    let t = z[k].norm();
                    let v = match choice {
                        RhoChoice::Algebraic => t * t - 1.0,
                        RhoChoice::Distance => t - 1.0,
                    };
                    m = m.max(v);
                }
                m
            }
            DomainKind::Ball(n) => {
                let s: f64 = z[..*n].iter().map(|c| c.norm_sqr()).sum();
                match choice {
                    RhoChoice::Algebraic => s - 1.0,
                    RhoChoice::Distance => s.sqrt() - 1.0,
                }
            }
            DomainKind::Annulus { eps } => {
                let t = z[0].norm();
                match choice {
                    RhoChoice::Algebraic => (t * t - 1.0).max(eps * eps - t * t),
                    RhoChoice::Distance => (t - 1.0).max(eps - t),
                }
            }
            DomainKind::Shell { r_in, r_out } => {
                let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                match choice {
                    RhoChoice::Algebraic => (s - r_out * r_out).max(r_in * r_in - s),
                    RhoChoice::Distance => {
                        let t = s.sqrt();
                        (t - r_out).max(r_in - t)
                    }
                }
            }
            DomainKind::Lens {
                parent,
                center,
                radius,
            } => {
                let p = Cx::new(center[0].0, center[0].1);
                let d = (z[0] - p).norm();
                let ball = match choice {
                    RhoChoice::Algebraic => d * d - radius * radius,
                    RhoChoice::Distance => d - radius,
                };
                parent.rho(choice, z).max(ball)
            }
        }
    }

    /// Index of the constraint attaining the max in `rho`; used to locate
    /// weight kinks along quadrature rays.
    pub fn rho_branch(&self, choice: RhoChoice, z: &[Cx]) -> usize {
        match &self.kind {
            DomainKind::Disc | DomainKind::PuncturedDisc | DomainKind::Ball(_) => 0,
            DomainKind::Polydisc(n) => {
                let mut best = 0;
                let mut m = f64::NEG_INFINITY;
                for k in 0..*n {
                    let t = z[k].norm();
                    let v = match choice {
                        RhoChoice::Algebraic => t * t - 1.0,
                        RhoChoice::Distance => t - 1.0,
                    };
                    if v > m {
                        m = v;
                        best = k;
                    }
                }
                best
            }
            DomainKind::Annulus { eps } => {
                let t = z[0].norm();
                let (outer, inner) = match choice {
                    RhoChoice::Algebraic => (t * t - 1.0, eps * eps - t * t),
                    RhoChoice::Distance => (t - 1.0, eps - t),
                };
                if outer >= inner {
                    0
                } else {
                    1
                }
            }
            DomainKind::Shell { r_in, r_out } => {
                let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                let (outer, inner) = match choice {
                    RhoChoice::Algebraic => (s - r_out * r_out, r_in * r_in - s),
                    RhoChoice::Distance => {
                        let t = s.sqrt();
                        (t - r_out, r_in - t)
                    }
                };
                if outer >= inner {
                    0
                } else {
                    1
                }
            }
            DomainKind::Lens {
                parent,
                center,
                radius,
            } => {
                let p = Cx::new(center[0].0, center[0].1);
                let d = (z[0] - p).norm();
                let ball = match choice {
                    RhoChoice::Algebraic => d * d - radius * radius,
                    RhoChoice::Distance => d - radius,
                };
                let pr = parent.rho(choice, z);
                if pr >= ball {
                    parent.rho_branch(choice, z)
                } else {
                    16 + 0
                }
            }
        }
    }

    /// Weight value h(z) = |rho(z)|^r for z strictly inside; identically 1
    /// for r = 0. On the polydisc the algebraic choice is per-factor.
    pub fn weight_value(&self, w: &WeightSpec, z: &[Cx]) -> f64 {
        if w.is_trivial() {
            return 1.0;
        }
        match (&self.kind, w.rho) {
            (DomainKind::Polydisc(n), RhoChoice::Algebraic) => {
                let mut prod = 1.0;
                for k in 0..*n {
                    prod *= (1.0 - z[k].norm_sqr()).abs().powf(w.exponent);
                }
                prod
            }
            _ => self.rho(w.rho, z).abs().powf(w.exponent),
        }
    }

    pub fn contains(&self, z: &[Cx]) -> bool {
        self.rho(RhoChoice::Distance, z) < 0.0
    }

    /// Distance from an interior point to the boundary.
    pub fn boundary_distance(&self, z: &[Cx]) -> f64 {
        -self.rho(RhoChoice::Distance, z)
    }

    /// Points distributed over each boundary component. The punctured disc
    /// contributes the puncture itself as a degenerate component.
    pub fn boundary_grid(&self, m: usize) -> Vec<Vec<Cx>> {
        let circle = |radius: f64, count: usize| -> Vec<Cx> {
            (0..count)
                .map(|j| {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                    Cx::from_polar(radius, th)
                })
                .collect()
        };
        match &self.kind {
            DomainKind::Disc => circle(1.0, m).into_iter().map(|z| vec![z]).collect(),
            DomainKind::PuncturedDisc => {
                let mut pts: Vec<Vec<Cx>> =
                    circle(1.0, m).into_iter().map(|z| vec![z]).collect();
                pts.push(vec![Cx::new(0.0, 0.0)]);
                pts
            }
            DomainKind::Annulus { eps } => {
                let mut pts: Vec<Vec<Cx>> =
                    circle(1.0, m).into_iter().map(|z| vec![z]).collect();
                pts.extend(circle(*eps, m).into_iter().map(|z| vec![z]));
                pts
            }
            DomainKind::Polydisc(n) => {
                let mut pts = Vec::with_capacity(n * m);
                for face in 0..*n {
                    for j in 0..m {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                        let mut z = vec![Cx::new(0.0, 0.0); *n];
                        z[face] = Cx::from_polar(1.0, th);
                        for l in 0..*n {
                            if l == face {
                                continue;
                            }
                            let r = golden_frac(j as u64 + 1);
                            let psi = 2.0
                                * std::f64::consts::PI
                                * golden_frac((j as u64 + 2) * (l as u64 + 3));
                            z[l] = Cx::from_polar(r, psi);
                        }
                        pts.push(z);
                    }
                }
                pts
            }
            DomainKind::Ball(n) => sphere_points(*n, 1.0, m),
            DomainKind::Shell { r_in, r_out } => {
                let mut pts = sphere_points(2, *r_out, m);
                pts.extend(sphere_points(2, *r_in, m));
                pts
            }
            DomainKind::Lens {
                parent,
                center,
                radius,
            } => {
                let p = Cx::new(center[0].0, center[0].1);
                let mut pts: Vec<Vec<Cx>> = Vec::new();
                // Arc of the ball boundary lying in the closed parent.
                for j in 0..(4 * m) {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / (4 * m) as f64;
                    let z = p + Cx::from_polar(*radius, th);
                    if parent.rho(RhoChoice::Distance, &[z]) <= 1e-12 {
                        pts.push(vec![z]);
                    }
                }
                // Part of the parent boundary inside the closed ball.
                for z in parent.boundary_grid(4 * m) {
                    if (z[0] - p).norm() <= radius + 1e-12 {
                        pts.push(z);
                    }
                }
                pts
            }
        }
    }

    /// Deterministic strictly-interior sample points, at least `count` of
    /// them, optionally keeping a safety margin to the boundary.
    pub fn interior_grid(&self, count: usize, min_dist: f64) -> Vec<Vec<Cx>> {
        let mut pts = Vec::with_capacity(count);
        let mut i = 0u64;
        // Rejection sampling over the bounding box with low-discrepancy
        // coordinates; deterministic.
        let bound = match &self.kind {
            DomainKind::Shell { r_out, .. } => *r_out,
            DomainKind::Lens { .. } => 1.0,
            _ => 1.0,
        };
        while pts.len() < count && i < 500_000 {
            i += 1;
            let mut z = Vec::with_capacity(self.dim);
            for k in 0..self.dim {
                let re = (2.0 * lds_frac(i, 2 * k) - 1.0) * bound;
                let im = (2.0 * lds_frac(i, 2 * k + 1) - 1.0) * bound;
                z.push(Cx::new(re, im));
            }
            if self.rho(RhoChoice::Distance, &z) <= -min_dist {
                pts.push(z);
            }
        }
        pts
    }

    /// Grid cells inside the lens, used for the connectivity check.
    fn lens_grid_cells(&self, res: usize) -> Result<Vec<(usize, usize)>> {
        let (p, radius) = match (&self.lens_center(), self.lens_radius()) {
            (Some(p), Some(r)) => (*p, r),
            _ => {
                return Err(Error::InvalidParameter(
                    "lens_grid_cells called on a non-lens domain".into(),
                ))
            }
        };
        let mut cells = Vec::new();
        for ix in 0..res {
            for iy in 0..res {
                let x = p.re - radius + 2.0 * radius * (ix as f64 + 0.5) / res as f64;
                let y = p.im - radius + 2.0 * radius * (iy as f64 + 0.5) / res as f64;
                let z = [Cx::new(x, y)];
                if self.rho(RhoChoice::Distance, &z) < 0.0 {
                    cells.push((ix, iy));
                }
            }
        }
        Ok(cells)
    }
}

/// Fractional part of k times the golden ratio; a dense low-discrepancy
/// sequence in [0,1).
fn golden_frac(k: u64) -> f64 {
    let g = 0.618_033_988_749_894_9_f64;
    (k as f64 * g).fract()
}

/// Kronecker sequence with independent irrational slopes per coordinate.
fn lds_frac(k: u64, coord: usize) -> f64 {
    // fractional parts of sqrt(2), sqrt(3), sqrt(5), ...
    const SLOPES: [f64; 8] = [
        0.414_213_562_373_095_1,
        0.732_050_807_568_877_3,
        0.236_067_977_499_789_7,
        0.645_751_311_064_590_7,
        0.316_624_790_355_399_8,
        0.605_551_275_463_989_3,
        0.123_105_625_617_661_1,
        0.358_898_943_540_673_6,
    ];
    (k as f64 * SLOPES[coord % SLOPES.len()]).fract()
}

fn sphere_points(n: usize, radius: f64, m: usize) -> Vec<Vec<Cx>> {
    let mut pts = Vec::with_capacity(m);
    for j in 1..=m {
        // Low-discrepancy split of |z_k|^2 over the simplex plus phases.
        let mut raw: Vec<f64> = (0..n)
            .map(|k| golden_frac(j as u64 * (k as u64 + 2) + 5).max(1e-3))
            .collect();
        let total: f64 = raw.iter().sum();
        for r in raw.iter_mut() {
            *r /= total;
        }
        let mut z = Vec::with_capacity(n);
        for (k, u) in raw.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * golden_frac(j as u64 * (k as u64 + 7) + 11);
            z.push(Cx::from_polar(radius * u.sqrt(), th));
        }
        pts.push(z);
    }
    pts
}

fn grid_connected(cells: &[(usize, usize)]) -> bool {
    use std::collections::{HashSet, VecDeque};
    if cells.is_empty() {
        return false;
    }
    let set: HashSet<(usize, usize)> = cells.iter().copied().collect();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    queue.push_back(cells[0]);
    seen.insert(cells[0]);
    while let Some((x, y)) = queue.pop_front() {
        let neighbors = [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ];
        for nb in neighbors {
            if set.contains(&nb) && seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    seen.len() == set.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn build_validates_parameters() {
        assert!(DomainSpec::annulus(0.5).is_ok());
        assert!(matches!(
            DomainSpec::annulus(1.2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            DomainSpec::shell(2.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        let ann = DomainSpec::annulus(0.5).unwrap();
        assert!(DomainSpec::lens(ann.clone(), cx(1.0, 0.0), 0.4).is_ok());
        // Ball far away from the annulus: empty lens.
        assert!(matches!(
            DomainSpec::lens(ann, cx(5.0, 0.0), 0.3),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn rho_examples() {
        let disc = DomainSpec::disc();
        assert_eq!(disc.rho(RhoChoice::Algebraic, &[cx(0.0, 0.0)]), -1.0);
        assert_eq!(disc.rho(RhoChoice::Distance, &[cx(0.0, 0.0)]), -1.0);
        let ann = DomainSpec::annulus(0.5).unwrap();
        let z = [cx(0.75, 0.0)];
        assert!((ann.rho(RhoChoice::Distance, &z) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn weight_examples() {
        let disc = DomainSpec::disc();
        let w0 = WeightSpec::unweighted();
        assert_eq!(disc.weight_value(&w0, &[cx(0.3, 0.2)]), 1.0);
        let w2 = WeightSpec::new(2.0, RhoChoice::Algebraic).unwrap();
        assert!((disc.weight_value(&w2, &[cx(0.0, 0.0)]) - 1.0).abs() < 1e-15);
        let w1 = WeightSpec::new(1.0, RhoChoice::Algebraic).unwrap();
        assert!((disc.weight_value(&w1, &[cx(0.6, 0.0)]) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn sign_coherence_on_interior_grids() {
        let domains = vec![
            DomainSpec::disc(),
            DomainSpec::punctured_disc(),
            DomainSpec::polydisc(2).unwrap(),
            DomainSpec::ball(2).unwrap(),
            DomainSpec::annulus(0.5).unwrap(),
            DomainSpec::shell(1.0, 2.0).unwrap(),
            DomainSpec::lens(DomainSpec::annulus(0.5).unwrap(), cx(1.0, 0.0), 0.4).unwrap(),
        ];
        for d in &domains {
            for z in d.interior_grid(200, 1e-6) {
                assert!(
                    d.rho(RhoChoice::Algebraic, &z) < 0.0,
                    "algebraic rho not negative inside {:?}",
                    d.kind
                );
                assert!(d.rho(RhoChoice::Distance, &z) < 0.0);
            }
        }
    }

    #[test]
    fn comparability_of_defining_functions() {
        // ratio algebraic/distance bounded and bounded away from zero on
        // interior grids with boundary distance >= 1e-3.
        let domains = vec![
            DomainSpec::disc(),
            DomainSpec::polydisc(2).unwrap(),
            DomainSpec::ball(2).unwrap(),
            DomainSpec::annulus(0.5).unwrap(),
            DomainSpec::shell(1.0, 2.0).unwrap(),
        ];
        for d in &domains {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for z in d.interior_grid(400, 1e-3) {
                let ratio = d.rho(RhoChoice::Algebraic, &z) / d.rho(RhoChoice::Distance, &z);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            assert!(lo > 0.05, "ratio lower bound {lo} for {:?}", d.kind);
            assert!(hi < 50.0, "ratio upper bound {hi} for {:?}", d.kind);
        }
    }

    #[test]
    fn boundary_grids_lie_on_the_boundary() {
        let disc = DomainSpec::disc();
        for z in disc.boundary_grid(4) {
            assert!((z[0].norm() - 1.0).abs() < 1e-14);
        }
        let ann = DomainSpec::annulus(0.5).unwrap();
        let pts = ann.boundary_grid(8);
        assert_eq!(pts.len(), 16);
        let shell = DomainSpec::shell(1.0, 2.0).unwrap();
        for z in shell.boundary_grid(16) {
            let t = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
            assert!((t - 1.0).abs() < 1e-12 || (t - 2.0).abs() < 1e-12);
        }
        // Punctured disc: the puncture is a boundary component.
        let pd = DomainSpec::punctured_disc();
        let pts = pd.boundary_grid(4);
        assert!(pts.iter().any(|z| z[0].norm() == 0.0));
    }

    #[test]
    fn lens_degenerate_to_full_disc() {
        // Parent disc, center 0, radius 2: the lens is the whole disc.
        let lens = DomainSpec::lens(DomainSpec::disc(), cx(0.0, 0.0), 2.0).unwrap();
        for z in DomainSpec::disc().interior_grid(100, 1e-6) {
            assert!(lens.contains(&z));
        }
    }
}
