//! Quadrature rules for the model domains.
//!
//! Reinhardt domains get tensor rules in polar coordinates: Gauss nodes in
//! the radial section (after substituting s = t^2, monomial moments become
//! polynomial) and equispaced angular nodes, which integrate trigonometric
//! polynomials exactly. Weighted inner products fold |rho|^r into the radial
//! rule as a Gauss-Jacobi weight, so weighted moments stay exact for every
//! real exponent r >= 0, not just integers. Lens domains use a polar cell
//! decomposition about the lens center with a fixed 8-point product rule per
//! cell; cells are aligned with the geometry's breakpoints, so the composite
//! rule converges at the rule's full order on piecewise-analytic integrands.

use num_complex::Complex64 as Cx;

use super::{DomainKind, DomainSpec, RhoChoice, WeightSpec};
use crate::error::{Error, Result};
use crate::linalg::symmetric_tridiagonal_eigen;
use crate::special::ln_beta;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Nodes and weights of a Gauss rule computed from the Jacobi matrix of the
/// orthogonal-polynomial recurrence (Golub-Welsch).
fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (vals, vecs) = symmetric_tridiagonal_eigen(diag, offdiag, true)?;
    let vecs = vecs.expect("vectors requested");
    let weights: Vec<f64> = (0..vals.len())
        .map(|i| mu0 * vecs[[0, i]] * vecs[[0, i]])
        .collect();
    Ok((vals, weights))
}

/// n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::UnsupportedOrder("need at least one node".into()));
    }
    let diag = vec![0.0; n];
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let kf = k as f64;
        off.push((kf * kf / (4.0 * kf * kf - 1.0)).sqrt());
    }
    golub_welsch(&diag, &off, 2.0)
}

/// n-point Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::UnsupportedOrder("need at least one node".into()));
    }
    if alpha <= -1.0 || beta <= -1.0 {
        return Err(Error::InvalidParameter(
            "Jacobi exponents must exceed -1".into(),
        ));
    }
    if alpha == 0.0 && beta == 0.0 {
        return gauss_legendre(n);
    }
    let ab = alpha + beta;
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_beta(alpha + 1.0, beta + 1.0)).exp();
    let mut diag = Vec::with_capacity(n);
    diag.push((beta - alpha) / (ab + 2.0));
    for k in 1..n {
        let kf = k as f64;
        let den = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        diag.push((beta * beta - alpha * alpha) / den);
    }
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    if n > 1 {
        let b1 = 4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
        off.push(b1.sqrt());
    }
    for k in 2..n {
        let kf = k as f64;
        let num = 4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab);
        let den = (2.0 * kf + ab).powi(2) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0);
        off.push((num / den).sqrt());
    }
    golub_welsch(&diag, &off, mu0)
}

/// Gauss rule for `int_lo^hi f(t) (hi-t)^alpha (t-lo)^beta dt`.
pub fn jacobi_on_interval(
    n: usize,
    lo: f64,
    hi: f64,
    alpha: f64,
    beta: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_jacobi(n, alpha, beta)?;
    let h = 0.5 * (hi - lo);
    let scale = h.powf(alpha + beta + 1.0);
    let nodes = x.iter().map(|&xi| lo + (xi + 1.0) * h).collect();
    let weights = w.iter().map(|&wi| wi * scale).collect();
    Ok((nodes, weights))
}

/// Gauss-Legendre rule for `int_lo^hi f(t) dt`.
pub fn legendre_on_interval(n: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    jacobi_on_interval(n, lo, hi, 0.0, 0.0)
}

// ---------------------------------------------------------------------------
// Radial rules on Reinhardt domains
// ---------------------------------------------------------------------------

/// Weight-aware radial section of a Reinhardt tensor rule.
///
/// Contract: with angular grids of `angular[k]` equispaced nodes per
/// coordinate, the flat rule with nodes (moduli * phases) and weights
/// `weights[i] * prod_k (2 pi / angular[k])` approximates
/// `int_Omega f(z) h(z) dV`. For integrands depending only on the moduli the
/// angular average is the value itself, so
/// `int f h dV = (2 pi)^n * sum_i weights[i] f(moduli_i)`.
#[derive(Clone, Debug)]
pub struct ReinhardtRadial {
    pub moduli: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Suggested angular node counts per coordinate.
    pub angular: Vec<usize>,
    /// Set when the weight cannot be folded exactly (non-separable polydisc
    /// distance weight); callers must verify accuracy by order doubling.
    pub reduced_accuracy: bool,
}

/// 1-d radial factor: nodes are moduli t, weights absorb the volume element
/// t dt and the radial weight h(t).
fn radial_1d(
    kind_lo: f64,
    weight: &WeightSpec,
    order: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    // kind_lo = 0 for disc-like, eps for annulus.
    let r = weight.exponent;
    let lo = kind_lo;
    if r == 0.0 {
        // int g(t) t dt = 1/2 int g(sqrt(s)) ds over (lo^2, 1)
        let (s, w) = legendre_on_interval(order, lo * lo, 1.0)?;
        let t: Vec<f64> = s.iter().map(|&si| si.sqrt()).collect();
        let wt: Vec<f64> = w.iter().map(|&wi| 0.5 * wi).collect();
        return Ok((t, wt));
    }
    match weight.rho {
        RhoChoice::Algebraic if lo == 0.0 => {
            // weight (1-t^2)^r = (1-s)^r: one Jacobi piece in s.
            let (s, w) = jacobi_on_interval(order, 0.0, 1.0, r, 0.0)?;
            let t: Vec<f64> = s.iter().map(|&si| si.sqrt()).collect();
            let wt: Vec<f64> = w.iter().map(|&wi| 0.5 * wi).collect();
            Ok((t, wt))
        }
        RhoChoice::Algebraic => {
            // annulus: weight min(1-s, s-eps^2)^r, kink at the midpoint.
            let e2 = lo * lo;
            let mid = 0.5 * (1.0 + e2);
            let (s1, w1) = jacobi_on_interval(order, e2, mid, 0.0, r)?;
            let (s2, w2) = jacobi_on_interval(order, mid, 1.0, r, 0.0)?;
            let mut t = Vec::with_capacity(2 * order);
            let mut wt = Vec::with_capacity(2 * order);
            for (si, wi) in s1.iter().zip(&w1).chain(s2.iter().zip(&w2)) {
                t.push(si.sqrt());
                wt.push(0.5 * wi);
            }
            Ok((t, wt))
        }
        RhoChoice::Distance if lo == 0.0 => {
            // weight (1-t)^r, volume element t dt folded in.
            let (t, w) = jacobi_on_interval(order, 0.0, 1.0, r, 0.0)?;
            let wt: Vec<f64> = t.iter().zip(&w).map(|(&ti, &wi)| wi * ti).collect();
            Ok((t, wt))
        }
        RhoChoice::Distance => {
            // annulus: weight min(1-t, t-eps)^r, kink at the midpoint.
            let mid = 0.5 * (1.0 + lo);
            let (t1, w1) = jacobi_on_interval(order, lo, mid, 0.0, r)?;
            let (t2, w2) = jacobi_on_interval(order, mid, 1.0, r, 0.0)?;
            let mut t = Vec::with_capacity(2 * order);
            let mut wt = Vec::with_capacity(2 * order);
            for (ti, wi) in t1.iter().zip(&w1).chain(t2.iter().zip(&w2)) {
                t.push(*ti);
                wt.push(wi * ti);
            }
            Ok((t, wt))
        }
    }
}

/// Radial s-section for ball/shell kinds: rule for
/// `int g(s) s^(n-1) h(sqrt(s)) ds` over (s_lo, s_hi).
fn radial_section_ball(
    s_lo: f64,
    s_hi: f64,
    n: usize,
    weight: &WeightSpec,
    order: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = weight.exponent;
    let pow = (n - 1) as i32;
    if r == 0.0 {
        let (s, w) = legendre_on_interval(order, s_lo, s_hi)?;
        let ws = s
            .iter()
            .zip(&w)
            .map(|(&si, &wi)| wi * si.powi(pow))
            .collect();
        return Ok((s, ws));
    }
    match weight.rho {
        RhoChoice::Algebraic if s_lo == 0.0 => {
            // (s_hi - s)^r with s_hi = 1 for the ball.
            let (s, w) = jacobi_on_interval(order, 0.0, s_hi, r, 0.0)?;
            let ws = s
                .iter()
                .zip(&w)
                .map(|(&si, &wi)| wi * si.powi(pow))
                .collect();
            Ok((s, ws))
        }
        RhoChoice::Algebraic => {
            // shell: weight min(s_hi - s, s - s_lo)^r.
            let mid = 0.5 * (s_lo + s_hi);
            let (s1, w1) = jacobi_on_interval(order, s_lo, mid, 0.0, r)?;
            let (s2, w2) = jacobi_on_interval(order, mid, s_hi, r, 0.0)?;
            let mut s = Vec::new();
            let mut ws = Vec::new();
            for (si, wi) in s1.iter().zip(&w1).chain(s2.iter().zip(&w2)) {
                s.push(*si);
                ws.push(wi * si.powi(pow));
            }
            Ok((s, ws))
        }
        RhoChoice::Distance => {
            // substitute s = sigma^2 so the weight becomes a Jacobi factor in
            // sigma; ds = 2 sigma d sigma.
            let t_lo = s_lo.sqrt();
            let t_hi = s_hi.sqrt();
            let pieces: Vec<(Vec<f64>, Vec<f64>, bool)> = if s_lo == 0.0 {
                let (t, w) = jacobi_on_interval(order, 0.0, t_hi, r, 0.0)?;
                vec![(t, w, true)]
            } else {
                let mid = 0.5 * (t_lo + t_hi);
                let (t1, w1) = jacobi_on_interval(order, t_lo, mid, 0.0, r)?;
                let (t2, w2) = jacobi_on_interval(order, mid, t_hi, r, 0.0)?;
                vec![(t1, w1, true), (t2, w2, true)]
            };
            let mut s = Vec::new();
            let mut ws = Vec::new();
            for (t, w, _) in pieces {
                for (ti, wi) in t.iter().zip(&w) {
                    let si = ti * ti;
                    s.push(si);
                    ws.push(wi * 2.0 * ti * si.powi(pow));
                }
            }
            Ok((s, ws))
        }
    }
}

impl ReinhardtRadial {
    pub fn build(domain: &DomainSpec, weight: &WeightSpec, order: usize) -> Result<Self> {
        if order < 4 {
            return Err(Error::UnsupportedOrder(format!(
                "quadrature order must be >= 4, got {order}"
            )));
        }
        let ang = 2 * order + 1;
        match &domain.kind {
            DomainKind::Disc | DomainKind::PuncturedDisc => {
                let (t, w) = radial_1d(0.0, weight, order)?;
                Ok(ReinhardtRadial {
                    moduli: t.iter().map(|&ti| vec![ti]).collect(),
                    weights: w,
                    angular: vec![ang],
                    reduced_accuracy: false,
                })
            }
            DomainKind::Annulus { eps } => {
                let (t, w) = radial_1d(*eps, weight, order)?;
                Ok(ReinhardtRadial {
                    moduli: t.iter().map(|&ti| vec![ti]).collect(),
                    weights: w,
                    angular: vec![ang],
                    reduced_accuracy: false,
                })
            }
            DomainKind::Polydisc(n) => {
                let n = *n;
                let separable = weight.is_trivial() || weight.rho == RhoChoice::Algebraic;
                let factor_weight = if separable {
                    *weight
                } else {
                    WeightSpec::unweighted()
                };
                let (t, w) = radial_1d(0.0, &factor_weight, order)?;
                // Tensor the factor rule.
                let mut moduli = vec![Vec::new()];
                let mut weights = vec![1.0f64];
                for _ in 0..n {
                    let mut nm = Vec::with_capacity(moduli.len() * t.len());
                    let mut nw = Vec::with_capacity(weights.len() * t.len());
                    for (m, wv) in moduli.iter().zip(&weights) {
                        for (ti, wi) in t.iter().zip(&w) {
                            let mut mm = m.clone();
                            mm.push(*ti);
                            nm.push(mm);
                            nw.push(wv * wi);
                        }
                    }
                    moduli = nm;
                    weights = nw;
                }
                let mut reduced = false;
                if !separable && !weight.is_trivial() {
                    // Fold the non-separable min-distance weight pointwise.
                    reduced = true;
                    for (m, wv) in moduli.iter().zip(weights.iter_mut()) {
                        let h = m
                            .iter()
                            .map(|&tk| 1.0 - tk)
                            .fold(f64::INFINITY, f64::min)
                            .powf(weight.exponent);
                        *wv *= h;
                    }
                }
                Ok(ReinhardtRadial {
                    moduli,
                    weights,
                    angular: vec![ang; n],
                    reduced_accuracy: reduced,
                })
            }
            DomainKind::Ball(n) => {
                let n = *n;
                if n == 1 {
                    let (t, w) = radial_1d(0.0, weight, order)?;
                    return Ok(ReinhardtRadial {
                        moduli: t.iter().map(|&ti| vec![ti]).collect(),
                        weights: w,
                        angular: vec![ang],
                        reduced_accuracy: false,
                    });
                }
                Self::ball_like(0.0, 1.0, n, weight, order, ang)
            }
            DomainKind::Shell { r_in, r_out } => {
                Self::ball_like(r_in * r_in, r_out * r_out, 2, weight, order, ang)
            }
            DomainKind::Lens { .. } => Err(Error::UnsupportedDomain(
                "lens domains use the cell rule, not the Reinhardt tensor rule".into(),
            )),
        }
    }

    /// Shared construction for ball(n) and the spherical shell: Gauss in
    /// s = |z|^2 times a stick-breaking parameterization of the simplex of
    /// squared moduli fractions.
    fn ball_like(
        s_lo: f64,
        s_hi: f64,
        n: usize,
        weight: &WeightSpec,
        order: usize,
        ang: usize,
    ) -> Result<ReinhardtRadial> {
        let (s, ws) = radial_section_ball(s_lo, s_hi, n, weight, order)?;
        // Stick-breaking rules for the inner simplex; coordinate y_j carries
        // the Jacobian (1-y_j)^(n-1-j).
        let mut y_rules = Vec::new();
        for j in 0..n - 1 {
            let (y, wy) = legendre_on_interval(order, 0.0, 1.0)?;
            let pow = (n - 2 - j) as i32;
            let wyj: Vec<f64> = y
                .iter()
                .zip(&wy)
                .map(|(&yi, &wi)| wi * (1.0 - yi).powi(pow))
                .collect();
            y_rules.push((y, wyj));
        }
        // Cartesian product over s and all y coordinates.
        let mut frac = vec![(Vec::<f64>::new(), 1.0f64)];
        for (y, wy) in &y_rules {
            let mut next = Vec::with_capacity(frac.len() * y.len());
            for (ys, wv) in &frac {
                for (yi, wi) in y.iter().zip(wy) {
                    let mut v = ys.clone();
                    v.push(*yi);
                    next.push((v, wv * wi));
                }
            }
            frac = next;
        }
        let scale = 1.0 / (2.0f64).powi(n as i32);
        let mut moduli = Vec::with_capacity(s.len() * frac.len());
        let mut weights = Vec::with_capacity(s.len() * frac.len());
        for (si, wsi) in s.iter().zip(&ws) {
            for (ys, wyv) in &frac {
                // stick-breaking fractions
                let mut v = Vec::with_capacity(n);
                let mut rem = 1.0f64;
                for &yj in ys {
                    v.push(yj * rem);
                    rem *= 1.0 - yj;
                }
                v.push(rem);
                let m: Vec<f64> = v.iter().map(|&vk| (si * vk).max(0.0).sqrt()).collect();
                moduli.push(m);
                weights.push(scale * wsi * wyv);
            }
        }
        Ok(ReinhardtRadial {
            moduli,
            weights,
            angular: vec![ang; n],
            reduced_accuracy: false,
        })
    }

    /// Integrate a moduli-only integrand: `int f(|z_1|,..,|z_n|) h dV`.
    pub fn integrate_radial(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let n = self.angular.len();
        let full_angle = TWO_PI.powi(n as i32);
        let mut acc = 0.0;
        for (m, w) in self.moduli.iter().zip(&self.weights) {
            acc += w * f(m);
        }
        acc * full_angle
    }

    /// Visit every node of the full tensor rule (radial times angular grids)
    /// without materializing it. The weight passed to the callback includes
    /// the angular factors.
    pub fn for_each_node(&self, visit: &mut dyn FnMut(&[Cx], f64)) {
        let n = self.angular.len();
        let mut phase_tables: Vec<Vec<Cx>> = Vec::with_capacity(n);
        for &mk in &self.angular {
            phase_tables.push(
                (0..mk)
                    .map(|j| Cx::from_polar(1.0, TWO_PI * j as f64 / mk as f64))
                    .collect(),
            );
        }
        let ang_weight: f64 = self.angular.iter().map(|&mk| TWO_PI / mk as f64).product();
        let mut z = vec![Cx::new(0.0, 0.0); n];
        let mut idx = vec![0usize; n];
        for (m, w) in self.moduli.iter().zip(&self.weights) {
            idx.iter_mut().for_each(|v| *v = 0);
            let wv = w * ang_weight;
            loop {
                for k in 0..n {
                    z[k] = phase_tables[k][idx[k]] * m[k];
                }
                visit(&z, wv);
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < self.angular[k] {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Flat volume rule
// ---------------------------------------------------------------------------

/// A flat quadrature rule: nodes strictly inside the domain, positive
/// weights, summing to the volume.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<Vec<Cx>>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
    pub order: usize,
    pub domain: DomainSpec,
}

impl QuadratureRule {
    /// Volume rule (weight 1). For Reinhardt kinds the rule integrates
    /// monomials z^a conj(z)^b with |a| + |b| <= exactness_degree to near
    /// machine precision; for the lens the stated degree is the per-cell
    /// polynomial exactness of the 8-point product rule.
    pub fn build(domain: &DomainSpec, order: usize) -> Result<Self> {
        if order < 4 {
            return Err(Error::UnsupportedOrder(format!(
                "quadrature order must be >= 4, got {order}"
            )));
        }
        match &domain.kind {
            DomainKind::Lens { .. } => {
                let rule = lens_rule(domain, order, None)?;
                Ok(QuadratureRule {
                    nodes: rule.nodes.into_iter().map(|z| vec![z]).collect(),
                    weights: rule.weights,
                    exactness_degree: 15,
                    order,
                    domain: domain.clone(),
                })
            }
            _ => {
                if order < domain.dim {
                    return Err(Error::UnsupportedOrder(format!(
                        "order {order} too small for dimension {}",
                        domain.dim
                    )));
                }
                let radial =
                    ReinhardtRadial::build(domain, &WeightSpec::unweighted(), order)?;
                let mut nodes = Vec::new();
                let mut weights = Vec::new();
                let n = domain.dim;
                let angle_counts = radial.angular.clone();
                let mut phase_tables: Vec<Vec<Cx>> = Vec::with_capacity(n);
                for &mk in &angle_counts {
                    phase_tables.push(
                        (0..mk)
                            .map(|j| Cx::from_polar(1.0, TWO_PI * j as f64 / mk as f64))
                            .collect(),
                    );
                }
                let ang_weight: f64 = angle_counts
                    .iter()
                    .map(|&mk| TWO_PI / mk as f64)
                    .product();
                // Enumerate the angular tensor grid.
                let mut idx = vec![0usize; n];
                for (m, w) in radial.moduli.iter().zip(&radial.weights) {
                    idx.iter_mut().for_each(|v| *v = 0);
                    loop {
                        let z: Vec<Cx> = (0..n)
                            .map(|k| phase_tables[k][idx[k]] * m[k])
                            .collect();
                        nodes.push(z);
                        weights.push(w * ang_weight);
                        // increment multi-index
                        let mut k = 0;
                        loop {
                            if k == n {
                                break;
                            }
                            idx[k] += 1;
                            if idx[k] < angle_counts[k] {
                                break;
                            }
                            idx[k] = 0;
                            k += 1;
                        }
                        if k == n {
                            break;
                        }
                    }
                }
                Ok(QuadratureRule {
                    nodes,
                    weights,
                    exactness_degree: 2 * order,
                    order,
                    domain: domain.clone(),
                })
            }
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate a complex-valued integrand over the domain.
    pub fn integrate(&self, f: impl Fn(&[Cx]) -> Cx) -> Cx {
        let mut acc = Cx::new(0.0, 0.0);
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(z) * *w;
        }
        acc
    }
}

/// Exact volume of a model domain (for rule validation).
pub fn exact_volume(domain: &DomainSpec) -> Option<f64> {
    let pi = std::f64::consts::PI;
    match &domain.kind {
        DomainKind::Disc | DomainKind::PuncturedDisc => Some(pi),
        DomainKind::Polydisc(n) => Some(pi.powi(*n as i32)),
        DomainKind::Ball(n) => {
            let mut v = 1.0;
            for k in 1..=*n {
                v *= pi / k as f64;
            }
            Some(v)
        }
        DomainKind::Annulus { eps } => Some(pi * (1.0 - eps * eps)),
        DomainKind::Shell { r_in, r_out } => {
            Some(pi * pi / 2.0 * (r_out.powi(4) - r_in.powi(4)))
        }
        DomainKind::Lens { .. } => None,
    }
}

// ---------------------------------------------------------------------------
// Lens cell rule
// ---------------------------------------------------------------------------

/// Flat rule on a lens domain; `weights` may include a folded weight h.
#[derive(Clone, Debug)]
pub struct LensRule {
    pub nodes: Vec<Cx>,
    pub weights: Vec<f64>,
}

const CELL_PTS: usize = 8;

/// Intersection parameters t > 0 of the ray p + t e^{i theta} with the
/// circle |z| = radius, ascending.
fn ray_circle_hits(p: Cx, dir: Cx, radius: f64) -> Vec<f64> {
    let b = (p.conj() * dir).re;
    let c = p.norm_sqr() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let mut out = Vec::new();
    for t in [-b - sq, -b + sq] {
        if t > 1e-14 {
            out.push(t);
        }
    }
    out
}

/// The portion of the ray p + t e^{i theta}, 0 < t < R, lying inside the
/// parent: a finite union of intervals determined by circle crossings.
fn ray_intervals(parent: &DomainSpec, p: Cx, radius: f64, theta: f64) -> Vec<(f64, f64)> {
    let dir = Cx::from_polar(1.0, theta);
    let mut cuts = vec![0.0, radius];
    match &parent.kind {
        DomainKind::Disc | DomainKind::PuncturedDisc => {
            cuts.extend(ray_circle_hits(p, dir, 1.0));
        }
        DomainKind::Annulus { eps } => {
            cuts.extend(ray_circle_hits(p, dir, 1.0));
            cuts.extend(ray_circle_hits(p, dir, *eps));
        }
        _ => {}
    }
    cuts.retain(|&t| t >= 0.0 && t <= radius);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut intervals = Vec::new();
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b - a < 1e-13 {
            continue;
        }
        let mid = p + dir * (0.5 * (a + b));
        if parent.rho(RhoChoice::Distance, &[mid]) < 0.0 {
            intervals.push((a, b));
        }
    }
    intervals
}

/// Angles at which the ray-interval structure changes; cells never straddle
/// them, so per-cell integrands stay analytic.
fn breakpoint_angles(parent: &DomainSpec, p: Cx, radius: f64) -> Vec<f64> {
    let scan = 2048usize;
    let signature = |theta: f64| -> usize {
        let iv = ray_intervals(parent, p, radius, theta);
        // Encode count and whether the last interval is clipped by R.
        let clipped = iv
            .last()
            .map(|&(_, b)| (b - radius).abs() < 1e-12)
            .unwrap_or(false);
        iv.len() * 2 + clipped as usize
    };
    let mut angles = Vec::new();
    let mut prev_sig = signature(0.0);
    for j in 1..=scan {
        let th = TWO_PI * j as f64 / scan as f64;
        let sig = signature(th);
        if sig != prev_sig {
            // bisect the change
            let mut lo = TWO_PI * (j - 1) as f64 / scan as f64;
            let mut hi = th;
            let lo_sig = prev_sig;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if signature(mid) == lo_sig {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            angles.push(hi);
            prev_sig = sig;
        }
    }
    angles
}

/// Radial kink positions of the weight along a ray, found by bisecting
/// changes of the defining-function branch.
fn radial_weight_breaks(
    carrier: &DomainSpec,
    weight: &WeightSpec,
    p: Cx,
    theta: f64,
    a: f64,
    b: f64,
) -> Vec<f64> {
    let dir = Cx::from_polar(1.0, theta);
    let branch = |t: f64| -> usize {
        let z = [p + dir * t];
        carrier.rho_branch(weight.rho, &z)
    };
    let scan = 32usize;
    let mut breaks = Vec::new();
    let mut prev = branch(a + 1e-13 * (b - a));
    for j in 1..=scan {
        let t = a + (b - a) * j as f64 / scan as f64;
        let cur = branch(t.min(b - 1e-13 * (b - a)));
        if cur != prev {
            let mut lo = a + (b - a) * (j - 1) as f64 / scan as f64;
            let mut hi = t;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if branch(mid) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            breaks.push(hi);
            prev = cur;
        }
    }
    breaks
}

/// Cellwise product rule over a lens. `order` controls the number of angular
/// strips; each cell carries an 8x8 Gauss product rule. When a weight is
/// given (with the domain whose defining function carries it: the lens
/// itself, or the ambient domain for localization), h(z) is folded into the
/// weights and radial segments are split at the weight's kink radii.
pub fn lens_rule(
    lens: &DomainSpec,
    order: usize,
    weight: Option<(&DomainSpec, &WeightSpec)>,
) -> Result<LensRule> {
    let (p, radius, parent) = match (&lens.lens_center(), lens.lens_radius(), lens.lens_parent()) {
        (Some(p), Some(r), Some(par)) => (*p, r, par.clone()),
        _ => {
            return Err(Error::UnsupportedDomain(
                "lens_rule requires a lens domain".into(),
            ))
        }
    };
    if order < 4 {
        return Err(Error::UnsupportedOrder(format!(
            "lens rule order must be >= 4, got {order}"
        )));
    }
    let (gt, gw) = gauss_legendre(CELL_PTS)?;

    let mut arc_bounds = breakpoint_angles(&parent, p, radius);
    arc_bounds.push(TWO_PI);
    arc_bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut prev = if arc_bounds.len() > 1 {
        arc_bounds[arc_bounds.len() - 1] - TWO_PI
    } else {
        0.0
    };
    // Uniform strips per arc, with geometric refinement into both arc
    // endpoints: at tangency breakpoints the ray-interval length behaves
    // like a square root of the angle, and the geometric tail restores
    // high-order convergence without coarsening the middle of the arc.
    let strip_edges = |strips: usize| -> Vec<f64> {
        let levels = 14usize;
        let mut edges = Vec::with_capacity(strips + 2 * levels + 1);
        edges.push(0.0);
        let first = 1.0 / strips as f64;
        for j in (1..=levels).rev() {
            edges.push(first * 0.5f64.powi(j as i32));
        }
        for k in 1..strips {
            edges.push(k as f64 / strips as f64);
        }
        let last = 1.0 - first;
        for j in 1..=levels {
            edges.push(last + first * (1.0 - 0.5f64.powi(j as i32)));
        }
        edges.push(1.0);
        edges
    };
    for &end in &arc_bounds {
        let span = end - prev;
        if span < 1e-12 {
            prev = end;
            continue;
        }
        let strips = (((span / TWO_PI) * order as f64).ceil() as usize).max(8);
        let edges = strip_edges(strips);
        for s in 0..edges.len() - 1 {
            let th_lo = prev + span * edges[s];
            let th_hi = prev + span * edges[s + 1];
            let h = 0.5 * (th_hi - th_lo);
            for (xt, wt) in gt.iter().zip(&gw) {
                let theta = th_lo + (xt + 1.0) * h;
                let w_theta = wt * h;
                let dir = Cx::from_polar(1.0, theta);
                for (a, b) in ray_intervals(&parent, p, radius, theta) {
                    // Split the segment at weight kinks.
                    let mut seg_bounds = vec![a];
                    if let Some((carrier, wsp)) = weight {
                        if !wsp.is_trivial() {
                            seg_bounds.extend(radial_weight_breaks(
                                carrier, wsp, p, theta, a, b,
                            ));
                        }
                    }
                    seg_bounds.push(b);
                    // Radial cells: high-degree integrands concentrate near
                    // the outer rim, so a single 8-point segment is not
                    // enough; subdivide so the composite rule tracks the
                    // requested order.
                    let nr = (order + CELL_PTS - 1) / CELL_PTS;
                    for seg in seg_bounds.windows(2) {
                        let (sa, sb) = (seg[0], seg[1]);
                        if sb - sa < 1e-14 {
                            continue;
                        }
                        for cell in 0..nr {
                            let ca = sa + (sb - sa) * cell as f64 / nr as f64;
                            let cb = sa + (sb - sa) * (cell + 1) as f64 / nr as f64;
                            let hr = 0.5 * (cb - ca);
                            for (xr, wr) in gt.iter().zip(&gw) {
                                let t = ca + (xr + 1.0) * hr;
                                let z = p + dir * t;
                                let mut w = w_theta * wr * hr * t;
                                if let Some((carrier, wsp)) = weight {
                                    w *= carrier.weight_value(wsp, &[z]);
                                }
                                nodes.push(z);
                                weights.push(w);
                            }
                        }
                    }
                }
            }
        }
        prev = end;
    }
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("lens rule has no nodes".into()));
    }
    Ok(LensRule { nodes, weights })
}

/// Closed-form area of the intersection of discs |z| < r1 and |z - d| < r2.
pub fn disc_intersection_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return std::f64::consts::PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    r1 * r1 * a1.acos() + r2 * r2 * a2.acos()
        - 0.5
            * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
                .max(0.0)
                .sqrt()
}
