//! Orthonormal bases and weighted Bergman kernels.
//!
//! On Reinhardt domains the monomials are orthogonal, so the kernel is a
//! diagonal series over a norm table. Norms come from closed forms (gamma /
//! beta ratios evaluated in log space) wherever they exist and from the
//! weight-aware radial rules otherwise; the two routes agree where both
//! exist, which the tests pin down. Lens domains get a numerical orthonormal
//! basis from a Gram-matrix eigendecomposition of shifted monomials.

use num_complex::Complex64 as Cx;

use crate::domain::quadrature::{lens_rule, LensRule, ReinhardtRadial};
use crate::domain::{DomainKind, DomainSpec, RhoChoice, WeightSpec};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen_jacobi;
use crate::special::{ln_beta, ln_factorial, ln_gamma};
use crate::symbol::SymbolExpr;

const PI: f64 = std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Monomial bases
// ---------------------------------------------------------------------------

/// Graded orthogonal monomial basis of A^2(Omega, |rho|^r) with norm table.
///
/// Index conventions: components are nonnegative except on the annulus,
/// where the single index runs over Z graded by |k|. On the shell only
/// nonnegative indices occur: every function holomorphic on the shell
/// extends across the hole, so negative-index candidates are not in the
/// space. On the polydisc the index set is the full tensor grid
/// [0, degree]^n (the basis of a product domain is the tensor product of the
/// factor bases), ordered by total degree.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub domain: DomainSpec,
    pub weight: WeightSpec,
    pub degree_bound: usize,
    pub indices: Vec<Vec<i64>>,
    pub norms2: Vec<f64>,
}

fn graded_simplex_indices(n: usize, degree: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut frontier = vec![(Vec::<i64>::new(), d)];
        for coord in 0..n {
            let mut next = Vec::new();
            for (prefix, rem) in &frontier {
                let range = if coord + 1 == n { *rem..=*rem } else { 0..=*rem };
                for a in range {
                    let mut p = prefix.clone();
                    p.push(a as i64);
                    next.push((p, rem - a));
                }
            }
            frontier = next;
        }
        for (idx, _) in frontier {
            out.push(idx);
        }
    }
    out
}

fn tensor_indices(n: usize, degree: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::<i64>::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * (degree + 1));
        for prefix in &out {
            for a in 0..=degree as i64 {
                let mut p = prefix.clone();
                p.push(a);
                next.push(p);
            }
        }
        out = next;
    }
    out.sort_by_key(|idx| (idx.iter().sum::<i64>(), idx.clone()));
    out
}

/// Closed-form squared norm where one exists.
pub fn norm2_closed(domain: &DomainSpec, weight: &WeightSpec, alpha: &[i64]) -> Option<f64> {
    let r = weight.exponent;
    match (&domain.kind, weight.rho) {
        (DomainKind::Disc | DomainKind::PuncturedDisc, RhoChoice::Algebraic) => {
            let k = alpha[0];
            if k < 0 {
                return None;
            }
            let k = k as f64;
            Some(PI * (ln_gamma(k + 1.0) + ln_gamma(r + 1.0) - ln_gamma(k + r + 2.0)).exp())
        }
        (DomainKind::Disc | DomainKind::PuncturedDisc, RhoChoice::Distance) => {
            let k = alpha[0];
            if k < 0 {
                return None;
            }
            Some(2.0 * PI * ln_beta(2.0 * k as f64 + 2.0, r + 1.0).exp())
        }
        (DomainKind::Polydisc(n), RhoChoice::Algebraic) => {
            let mut prod = 1.0;
            for k in 0..*n {
                let a = alpha[k];
                if a < 0 {
                    return None;
                }
                let a = a as f64;
                prod *=
                    PI * (ln_gamma(a + 1.0) + ln_gamma(r + 1.0) - ln_gamma(a + r + 2.0)).exp();
            }
            Some(prod)
        }
        (DomainKind::Polydisc(_), RhoChoice::Distance) => {
            if r == 0.0 {
                let mut prod = 1.0;
                for &a in alpha {
                    if a < 0 {
                        return None;
                    }
                    prod *= PI / (a as f64 + 1.0);
                }
                Some(prod)
            } else {
                None
            }
        }
        (DomainKind::Ball(n), RhoChoice::Algebraic) => {
            let n = *n;
            if alpha.iter().any(|&a| a < 0) {
                return None;
            }
            let total: i64 = alpha.iter().sum();
            let mut ln = (n as f64) * PI.ln() + ln_gamma(r + 1.0)
                - ln_gamma(total as f64 + n as f64 + r + 1.0);
            for &a in alpha {
                ln += ln_factorial(a as u64);
            }
            Some(ln.exp())
        }
        (DomainKind::Ball(n), RhoChoice::Distance) => {
            let n = *n;
            if alpha.iter().any(|&a| a < 0) {
                return None;
            }
            let total: i64 = alpha.iter().sum();
            // pi^n (alpha!/Gamma(|a|+n)) * 2 B(2|a|+2n, r+1)
            let mut ln = (n as f64) * PI.ln() - ln_gamma(total as f64 + n as f64)
                + std::f64::consts::LN_2
                + ln_beta(2.0 * total as f64 + 2.0 * n as f64, r + 1.0);
            for &a in alpha {
                ln += ln_factorial(a as u64);
            }
            Some(ln.exp())
        }
        (DomainKind::Annulus { eps }, _) => {
            if r != 0.0 {
                return None;
            }
            let k = alpha[0];
            if k == -1 {
                Some(2.0 * PI * (1.0 / eps).ln())
            } else {
                let kf = k as f64;
                let v = PI * (1.0 - eps.powi((2 * k + 2) as i32)) / (kf + 1.0);
                v.is_finite().then_some(v)
            }
        }
        (DomainKind::Shell { r_in, r_out }, _) => {
            if r != 0.0 {
                return None;
            }
            if alpha.iter().any(|&a| a < 0) {
                return None;
            }
            let (a, b) = (alpha[0] as f64, alpha[1] as f64);
            let d = a + b;
            let ln = 2.0 * PI.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(d + 2.0);
            let radial = (r_out.powf(2.0 * d + 4.0) - r_in.powf(2.0 * d + 4.0)) / (d + 2.0);
            Some(ln.exp() * radial)
        }
        (DomainKind::Lens { .. }, _) => None,
    }
}

/// Quadrature route for squared norms: the Dirichlet reduction leaves a 1-d
/// radial integral for every radial weight, so this stays cheap even on the
/// shell.
pub fn norm2_quad(
    domain: &DomainSpec,
    weight: &WeightSpec,
    alpha: &[i64],
    order: usize,
) -> Result<f64> {
    match &domain.kind {
        DomainKind::Annulus { eps } if alpha[0] <= -2 => {
            annulus_negative_norm2(*eps, weight, alpha[0], order)
        }
        DomainKind::Lens { .. } => Err(Error::UnsupportedIndex(
            "lens domains have no monomial norm table".into(),
        )),
        _ => {
            if alpha.iter().any(|&a| a < 0)
                && !matches!(domain.kind, DomainKind::Annulus { .. })
            {
                return Err(Error::UnsupportedIndex(format!(
                    "negative index {alpha:?} on {}",
                    domain.fingerprint()
                )));
            }
            let radial = ReinhardtRadial::build(domain, weight, order)?;
            let value = radial.integrate_radial(|t| {
                let mut p = 1.0;
                for (k, &a) in alpha.iter().enumerate() {
                    p *= t[k].powi(2 * a as i32);
                }
                p
            });
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::UnsupportedIndex(format!(
                    "norm of z^{alpha:?} did not evaluate to a positive number"
                )));
            }
            Ok(value)
        }
    }
}

/// Weighted annulus norms for strongly negative indices: substituting
/// u = eps/t turns t^(2k+1) into a polynomial, so Gauss stays exact and the
/// large dynamic range of t^(2k) never enters the rule.
fn annulus_negative_norm2(eps: f64, weight: &WeightSpec, k: i64, order: usize) -> Result<f64> {
    use crate::domain::quadrature::jacobi_on_interval;
    let m = (-k) as f64; // m >= 2
    let r = weight.exponent;
    // ||z^k||^2 = 2 pi eps^(2-2m) * int_eps^1 u^(2m-3) h(eps/u) du
    let integral = if r == 0.0 {
        let (u, w) = jacobi_on_interval(order, eps, 1.0, 0.0, 0.0)?;
        u.iter()
            .zip(&w)
            .map(|(&ui, &wi)| wi * ui.powf(2.0 * m - 3.0))
            .sum::<f64>()
    } else {
        match weight.rho {
            RhoChoice::Distance => {
                // h(eps/u) = u^{-r} min(u - eps, eps (1-u))^r, kink at
                // u* = 2 eps / (1 + eps)
                let ustar = 2.0 * eps / (1.0 + eps);
                let (u1, w1) = jacobi_on_interval(order, eps, ustar, 0.0, r)?;
                let (u2, w2) = jacobi_on_interval(order, ustar, 1.0, r, 0.0)?;
                let lower: f64 = u1
                    .iter()
                    .zip(&w1)
                    .map(|(&ui, &wi)| wi * ui.powf(2.0 * m - 3.0 - r))
                    .sum();
                let upper: f64 = u2
                    .iter()
                    .zip(&w2)
                    .map(|(&ui, &wi)| wi * ui.powf(2.0 * m - 3.0 - r) * eps.powf(r))
                    .sum();
                lower + upper
            }
            RhoChoice::Algebraic => {
                // h(eps/u) = u^{-2r} min(u^2-eps^2, eps^2(1-u^2))^r, kink
                // where u^2 = 2 eps^2/(1+eps^2)
                let ustar = (2.0 * eps * eps / (1.0 + eps * eps)).sqrt();
                let (u1, w1) = jacobi_on_interval(order, eps, ustar, 0.0, r)?;
                let (u2, w2) = jacobi_on_interval(order, ustar, 1.0, r, 0.0)?;
                let lower: f64 = u1
                    .iter()
                    .zip(&w1)
                    .map(|(&ui, &wi)| {
                        wi * ui.powf(2.0 * m - 3.0 - 2.0 * r) * (ui + eps).powf(r)
                    })
                    .sum();
                let upper: f64 = u2
                    .iter()
                    .zip(&w2)
                    .map(|(&ui, &wi)| {
                        wi * ui.powf(2.0 * m - 3.0 - 2.0 * r)
                            * (1.0 + ui).powf(r)
                            * eps.powf(2.0 * r)
                    })
                    .sum();
                lower + upper
            }
        }
    };
    let value = 2.0 * PI * eps.powf(2.0 - 2.0 * m) * integral;
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::UnsupportedIndex(format!(
            "annulus norm for index {k} overflows"
        )));
    }
    Ok(value)
}

impl MonomialBasis {
    /// Build the graded basis with its norm table. `order` feeds the radial
    /// quadrature for weights without closed-form norms.
    pub fn build(
        domain: &DomainSpec,
        weight: &WeightSpec,
        degree_bound: usize,
        order: usize,
    ) -> Result<Self> {
        let indices: Vec<Vec<i64>> = match &domain.kind {
            DomainKind::Disc | DomainKind::PuncturedDisc => {
                (0..=degree_bound as i64).map(|k| vec![k]).collect()
            }
            DomainKind::Annulus { .. } => {
                let mut idx = vec![vec![0i64]];
                for k in 1..=degree_bound as i64 {
                    idx.push(vec![k]);
                    idx.push(vec![-k]);
                }
                idx
            }
            DomainKind::Polydisc(n) => tensor_indices(*n, degree_bound),
            DomainKind::Ball(n) => graded_simplex_indices(*n, degree_bound),
            DomainKind::Shell { .. } => graded_simplex_indices(2, degree_bound),
            DomainKind::Lens { .. } => {
                return Err(Error::UnsupportedDomain(
                    "lens domains use lens_orthobasis".into(),
                ))
            }
        };
        // The quadrature-backed route must be exact through the highest
        // monomial degree present.
        let quad_order = order.max(degree_bound + 6);
        let mut norms2 = Vec::with_capacity(indices.len());
        for alpha in &indices {
            let v = match norm2_closed(domain, weight, alpha) {
                Some(v) => v,
                None => norm2_quad(domain, weight, alpha, quad_order)?,
            };
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::UnsupportedIndex(format!(
                    "norm table entry for {alpha:?} is not positive finite"
                )));
            }
            norms2.push(v);
        }
        Ok(MonomialBasis {
            domain: domain.clone(),
            weight: *weight,
            degree_bound,
            indices,
            norms2,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn grade(&self, i: usize) -> i64 {
        self.indices[i].iter().map(|a| a.abs()).sum()
    }

    /// z^alpha (negative annulus exponents allowed; z avoids 0 there).
    pub fn monomial(&self, i: usize, z: &[Cx]) -> Cx {
        let mut p = Cx::new(1.0, 0.0);
        for (k, &a) in self.indices[i].iter().enumerate() {
            p *= z[k].powi(a as i32);
        }
        p
    }

    /// Orthonormal basis element e_alpha(z) = z^alpha / ||z^alpha||.
    pub fn eval(&self, i: usize, z: &[Cx]) -> Cx {
        self.monomial(i, z) / self.norms2[i].sqrt()
    }
}

// ---------------------------------------------------------------------------
// Kernel evaluation
// ---------------------------------------------------------------------------

/// A truncated kernel value with a geometric tail estimate.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    pub value: Cx,
    pub truncation: usize,
    pub tail_bound: f64,
}

/// Kernel series summed by grade, with a measured geometric tail estimate.
pub fn kernel_series(basis: &MonomialBasis, w: &[Cx], z: &[Cx]) -> KernelValue {
    let mut grades: Vec<(i64, Cx)> = Vec::new();
    for i in 0..basis.len() {
        let term = basis.monomial(i, w) * basis.monomial(i, z).conj() / basis.norms2[i];
        let g = basis.grade(i);
        match grades.last_mut() {
            Some((gg, acc)) if *gg == g => *acc += term,
            _ => grades.push((g, term)),
        }
    }
    let value: Cx = grades.iter().map(|&(_, s)| s).sum();
    let mags: Vec<f64> = grades.iter().map(|&(_, s)| s.norm()).collect();
    KernelValue {
        value,
        truncation: basis.degree_bound,
        tail_bound: estimate_tail(&mags),
    }
}

fn estimate_tail(mags: &[f64]) -> f64 {
    let n = mags.len();
    if n < 3 {
        return f64::INFINITY;
    }
    let last = mags[n - 1];
    if last == 0.0 && mags[n - 2] == 0.0 {
        return 0.0;
    }
    let mut q: f64 = 0.0;
    for i in n.saturating_sub(4)..n - 1 {
        if mags[i] > 0.0 {
            q = q.max(mags[i + 1] / mags[i]);
        }
    }
    if q >= 1.0 || q == 0.0 {
        if last == 0.0 {
            return 0.0;
        }
        return f64::INFINITY;
    }
    last * q / (1.0 - q)
}

/// Classical closed forms (disc, ball, polydisc with the algebraic weight).
pub fn kernel_closed(domain: &DomainSpec, weight: &WeightSpec, w: &[Cx], z: &[Cx]) -> Result<Cx> {
    let r = weight.exponent;
    if r > 0.0 && weight.rho == RhoChoice::Distance {
        return Err(Error::UnsupportedDomain(
            "no closed-form kernel for the distance weight".into(),
        ));
    }
    match &domain.kind {
        DomainKind::Disc | DomainKind::PuncturedDisc => {
            let x = w[0] * z[0].conj();
            Ok(((r + 1.0) / PI) * (Cx::new(1.0, 0.0) - x).powf(-(r + 2.0)))
        }
        DomainKind::Ball(n) => {
            let n = *n;
            let x: Cx = (0..n).map(|k| w[k] * z[k].conj()).sum();
            let c = (ln_gamma(n as f64 + 1.0 + r) - ln_gamma(r + 1.0)).exp() / PI.powi(n as i32);
            Ok((Cx::new(1.0, 0.0) - x).powf(-(n as f64 + 1.0 + r)) * c)
        }
        DomainKind::Polydisc(n) => {
            let mut p = Cx::new(1.0, 0.0);
            for k in 0..*n {
                let x = w[k] * z[k].conj();
                p *= ((r + 1.0) / PI) * (Cx::new(1.0, 0.0) - x).powf(-(r + 2.0));
            }
            Ok(p)
        }
        _ => Err(Error::UnsupportedDomain(format!(
            "no closed-form kernel on {}",
            domain.fingerprint()
        ))),
    }
}

/// Coefficients of the normalized kernel k_z in the orthonormal basis:
/// c_alpha = conj(e_alpha(z)) / sqrt(K(z,z)). `tail` is the relative l^2
/// mass estimated beyond the truncation.
#[derive(Clone, Debug)]
pub struct NormalizedKernel {
    pub coeffs: Vec<Cx>,
    pub tail: f64,
    pub kernel_diag: f64,
}

pub fn normalized_kernel(basis: &MonomialBasis, z: &[Cx]) -> Result<NormalizedKernel> {
    let diag = kernel_series(basis, z, z);
    let k = diag.value.re;
    if !(k > 0.0) {
        return Err(Error::TruncationInsufficient(format!(
            "kernel diagonal at {z:?} evaluated to {k}"
        )));
    }
    let scale = 1.0 / k.sqrt();
    let coeffs: Vec<Cx> = (0..basis.len())
        .map(|i| basis.eval(i, z).conj() * scale)
        .collect();
    Ok(NormalizedKernel {
        coeffs,
        tail: diag.tail_bound / k,
        kernel_diag: k,
    })
}

/// Quadrature-realized reproducing defect |f(z) - <f, K_z>| for a
/// holomorphic polynomial f: f is projected onto the basis by the tensor
/// rule and the projection is evaluated at z.
pub fn reproduce_residual(
    basis: &MonomialBasis,
    f: &SymbolExpr,
    z: &[Cx],
    order: usize,
) -> Result<f64> {
    if !f.is_holomorphic_polynomial() {
        return Err(Error::NonHolomorphicSymbol(f.to_string()));
    }
    let radial = ReinhardtRadial::build(&basis.domain, &basis.weight, order)?;
    let mut fhat = vec![Cx::new(0.0, 0.0); basis.len()];
    radial.for_each_node(&mut |node: &[Cx], wt: f64| {
        let fv = f.eval(node).expect("polynomial evaluation is total");
        for (i, acc) in fhat.iter_mut().enumerate() {
            *acc += basis.eval(i, node).conj() * fv * wt;
        }
    });
    let mut reproduced = Cx::new(0.0, 0.0);
    for (i, c) in fhat.iter().enumerate() {
        reproduced += c * basis.eval(i, z);
    }
    Ok((f.eval(z)? - reproduced).norm())
}

// ---------------------------------------------------------------------------
// Numerical lens bases
// ---------------------------------------------------------------------------

/// Orthonormal polynomial basis on a lens domain, expressed in scaled
/// shifted monomials ((z - p)/scale)^k. Directions whose Gram eigenvalue
/// falls below the spectral cutoff are discarded and counted in `dropped`.
///
/// Polynomial density in A^2 of the lens holds for the boundary-centred
/// Jordan lenses used here; the span is a lower approximation of the space
/// in any case, and the downstream diagnostics are phrased to stay valid
/// under that one-sided error.
#[derive(Clone, Debug)]
pub struct NumericalBasis {
    pub domain: DomainSpec,
    pub weight: WeightSpec,
    /// Domain whose defining function carries the weight (the lens itself,
    /// or the ambient domain in localization scans).
    pub weight_carrier: DomainSpec,
    pub max_degree: usize,
    pub scale: f64,
    /// Row j: coefficients of p_j in the scaled shifted monomials.
    pub coeffs: Vec<Vec<Cx>>,
    /// Orthonormality defect in the rule's inner product after the
    /// re-orthogonalization pass.
    pub gram_residual: f64,
    /// Orthonormality defect against a doubled-order rule: conditioning of
    /// the monomial Gram amplifies quadrature differences by roughly the
    /// condition number, so this is reported rather than gated.
    pub quad_discrepancy: f64,
    pub dropped: usize,
}

const SPECTRAL_CUTOFF: f64 = 1e-13;
const GRAM_RESIDUAL_BOUND: f64 = 1e-8;

/// Gram matrix of scaled shifted monomials under a lens rule.
fn lens_monomial_gram(rule: &LensRule, p: Cx, scale: f64, maxdeg: usize) -> ndarray::Array2<Cx> {
    let m = maxdeg + 1;
    let mut gram = ndarray::Array2::<Cx>::zeros((m, m));
    let mut powers = vec![Cx::new(0.0, 0.0); m];
    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
        let u = (z - p) / scale;
        let mut acc = Cx::new(1.0, 0.0);
        for pw in powers.iter_mut() {
            *pw = acc;
            acc *= u;
        }
        for j in 0..m {
            for k in j..m {
                gram[[j, k]] += powers[k] * powers[j].conj() * *w;
            }
        }
    }
    for j in 0..m {
        for k in 0..j {
            gram[[j, k]] = gram[[k, j]].conj();
        }
    }
    gram
}

/// Orthonormalize shifted monomials on a lens by Gram eigendecomposition
/// with spectral cutoff and one re-orthonormalization pass; the final Gram
/// residual is measured against a doubled-order rule, so it reflects true
/// quadrature error rather than self-consistency.
pub fn lens_orthobasis(
    lens: &DomainSpec,
    maxdeg: usize,
    order: usize,
    weight: &WeightSpec,
    weight_carrier: &DomainSpec,
) -> Result<NumericalBasis> {
    if maxdeg > 40 {
        return Err(Error::InvalidParameter(format!(
            "lens basis degree is capped at 40, got {maxdeg}"
        )));
    }
    let p = lens
        .lens_center()
        .ok_or_else(|| Error::UnsupportedDomain("lens_orthobasis needs a lens".into()))?;
    let scale = lens.lens_radius().unwrap();
    let weight_opt = (!weight.is_trivial()).then_some((weight_carrier, weight));
    let rule = lens_rule(lens, order, weight_opt)?;
    let m = maxdeg + 1;
    let gram = lens_monomial_gram(&rule, p, scale, maxdeg);
    let (vals, vecs) = hermitian_eigen_jacobi(&gram)?;
    let vmax = vals.iter().cloned().fold(0.0f64, f64::max);
    let mut coeffs: Vec<Vec<Cx>> = Vec::new();
    let mut dropped = 0usize;
    for (j, &lam) in vals.iter().enumerate() {
        if lam < SPECTRAL_CUTOFF * vmax || lam <= 0.0 {
            dropped += 1;
            continue;
        }
        let inv = 1.0 / lam.sqrt();
        coeffs.push((0..m).map(|k| vecs[[k, j]] * inv).collect());
    }
    // Inner products are measured in function space (polynomial values at
    // the nodes): evaluating p_i costs one cancellation, so the error is
    // eps * sqrt(cond) instead of the eps * cond the coefficient Gram pays.
    let eval_at_nodes = |rows: &[Vec<Cx>], rl: &LensRule| -> ndarray::Array2<Cx> {
        let nb = rows.len();
        let mut v = ndarray::Array2::<Cx>::zeros((nb, rl.nodes.len()));
        for (col, (z, w)) in rl.nodes.iter().zip(&rl.weights).enumerate() {
            let u = (z - p) / scale;
            let sw = w.sqrt();
            for (i, row) in rows.iter().enumerate() {
                let mut acc = Cx::new(0.0, 0.0);
                for c in row.iter().rev() {
                    acc = acc * u + c;
                }
                v[[i, col]] = acc * sw;
            }
        }
        v
    };
    // g[[a, b]] = <p_a, p_b> (conjugate-linear in the second slot).
    let gram_of = |v: &ndarray::Array2<Cx>| -> ndarray::Array2<Cx> {
        let nb = v.nrows();
        let q = v.ncols();
        let mut g = ndarray::Array2::<Cx>::zeros((nb, nb));
        for a in 0..nb {
            for b in 0..nb {
                let mut acc = Cx::new(0.0, 0.0);
                for c in 0..q {
                    acc += v[[a, c]] * v[[b, c]].conj();
                }
                g[[a, b]] = acc;
            }
        }
        g
    };
    let mut values = eval_at_nodes(&coeffs, &rule);
    let g2 = gram_of(&values);
    let nb = coeffs.len();
    let mut l = ndarray::Array2::<Cx>::zeros((nb, nb));
    for i in 0..nb {
        for j in 0..=i {
            let mut sum = g2[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]].conj();
            }
            if i == j {
                let d = sum.re;
                if d <= 0.0 {
                    return Err(Error::QuadratureTooCoarse(
                        "lens Gram lost positivity during re-orthonormalization".into(),
                    ));
                }
                l[[i, j]] = Cx::new(d.sqrt(), 0.0);
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    // rows <- L^{-1} rows, and the node values alongside.
    let mut rows = coeffs.clone();
    for i in 0..nb {
        for a in 0..m {
            let mut v = coeffs[i][a];
            for k in 0..i {
                v -= l[[i, k]] * rows[k][a];
            }
            rows[i][a] = v / l[[i, i]];
        }
        for c in 0..values.ncols() {
            let mut v = values[[i, c]];
            for k in 0..i {
                v -= l[[i, k]] * values[[k, c]];
            }
            values[[i, c]] = v / l[[i, i]];
        }
    }
    let g3 = gram_of(&values);
    let mut residual = 0.0f64;
    for i in 0..nb {
        for j in 0..nb {
            let want = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((g3[[i, j]] - Cx::new(want, 0.0)).norm());
        }
    }
    if residual > GRAM_RESIDUAL_BOUND {
        return Err(Error::QuadratureTooCoarse(format!(
            "lens Gram residual {residual:.3e} exceeds {GRAM_RESIDUAL_BOUND:.0e} at order {order}"
        )));
    }
    // Canonical form: order rows by dominant monomial, rotate the dominant
    // coefficient to the positive real axis. Both operations preserve
    // orthonormality.
    let dominant = |row: &Vec<Cx>| -> usize {
        row.iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0
    };
    for row in rows.iter_mut() {
        let d = dominant(row);
        let phase = row[d] / row[d].norm();
        for c in row.iter_mut() {
            *c /= phase;
        }
    }
    rows.sort_by_key(&dominant);
    // Audit the rule itself against a doubled-order rule.
    let fine = lens_rule(lens, 2 * order, weight_opt)?;
    let vfine = eval_at_nodes(&rows, &fine);
    let g4 = gram_of(&vfine);
    let mut discrepancy = 0.0f64;
    for i in 0..nb {
        for j in 0..nb {
            let want = if i == j { 1.0 } else { 0.0 };
            discrepancy = discrepancy.max((g4[[i, j]] - Cx::new(want, 0.0)).norm());
        }
    }
    Ok(NumericalBasis {
        domain: lens.clone(),
        weight: *weight,
        weight_carrier: weight_carrier.clone(),
        max_degree: maxdeg,
        scale,
        coeffs: rows,
        gram_residual: residual,
        quad_discrepancy: discrepancy,
        dropped,
    })
}

impl NumericalBasis {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, j: usize, z: Cx) -> Cx {
        let p = self.domain.lens_center().unwrap();
        let u = (z - p) / self.scale;
        let mut acc = Cx::new(0.0, 0.0);
        for c in self.coeffs[j].iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    /// Coefficients of p_j in the unscaled shifted monomials (z - p)^k.
    pub fn coeffs_unscaled(&self, j: usize) -> Vec<Cx> {
        self.coeffs[j]
            .iter()
            .enumerate()
            .map(|(k, c)| c / self.scale.powi(k as i32))
            .collect()
    }
}

/// Diagonal kernel lower bound from a numerical basis: sum_j |p_j(z)|^2,
/// monotone nondecreasing in the degree cap.
pub fn kernel_diag_numeric(basis: &NumericalBasis, z: Cx) -> f64 {
    (0..basis.len()).map(|j| basis.eval(j, z).norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::quadrature::QuadratureRule;

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn disc_basis(r: f64, deg: usize) -> MonomialBasis {
        let w = WeightSpec::new(r, RhoChoice::Algebraic).unwrap();
        MonomialBasis::build(&DomainSpec::disc(), &w, deg, 32).unwrap()
    }

    #[test]
    fn norm_examples() {
        let b = disc_basis(0.0, 4);
        assert!((b.norms2[0] - PI).abs() < 1e-14);
        // disc, r=1, k=1 -> pi/6
        let b = disc_basis(1.0, 4);
        assert!((b.norms2[1] - PI / 6.0).abs() < 1e-14);
        // annulus, k=-1 -> 2 pi ln 2
        let ann = DomainSpec::annulus(0.5).unwrap();
        let b = MonomialBasis::build(&ann, &WeightSpec::unweighted(), 3, 32).unwrap();
        let i = b.indices.iter().position(|a| a[0] == -1).unwrap();
        assert!((b.norms2[i] - 2.0 * PI * (2.0f64).ln()).abs() < 1e-13);
    }

    #[test]
    fn closed_and_quadrature_norms_agree() {
        let cases: Vec<(DomainSpec, WeightSpec, usize)> = vec![
            (
                DomainSpec::disc(),
                WeightSpec::new(1.5, RhoChoice::Algebraic).unwrap(),
                8,
            ),
            (
                DomainSpec::disc(),
                WeightSpec::new(0.5, RhoChoice::Distance).unwrap(),
                8,
            ),
            (
                DomainSpec::ball(2).unwrap(),
                WeightSpec::new(1.0, RhoChoice::Algebraic).unwrap(),
                5,
            ),
            (
                DomainSpec::ball(2).unwrap(),
                WeightSpec::new(2.0, RhoChoice::Distance).unwrap(),
                5,
            ),
            (
                DomainSpec::shell(1.0, 2.0).unwrap(),
                WeightSpec::unweighted(),
                5,
            ),
            (
                DomainSpec::annulus(0.5).unwrap(),
                WeightSpec::unweighted(),
                6,
            ),
        ];
        for (dom, w, deg) in cases {
            let basis = MonomialBasis::build(&dom, &w, deg, 48).unwrap();
            for (i, alpha) in basis.indices.iter().enumerate() {
                if let Some(closed) = norm2_closed(&dom, &w, alpha) {
                    let quad = norm2_quad(&dom, &w, alpha, 48).unwrap();
                    let rel = (closed - quad).abs() / closed;
                    assert!(
                        rel < 1e-12,
                        "{} {:?} closed={closed} quad={quad}",
                        dom.fingerprint(),
                        alpha
                    );
                    assert_eq!(basis.norms2[i], closed);
                }
            }
        }
    }

    #[test]
    fn annulus_negative_norms_match_closed_form() {
        let w = WeightSpec::unweighted();
        for k in [-2i64, -5, -12, -40] {
            let got = annulus_negative_norm2(0.5, &w, k, 48).unwrap();
            let kf = k as f64;
            let want = PI * (1.0 - 0.5f64.powi((2 * k + 2) as i32)) / (kf + 1.0);
            assert!(
                (got - want).abs() < 1e-12 * want.abs(),
                "k={k} got={got} want={want}"
            );
        }
    }

    #[test]
    fn monomials_orthogonal_by_quadrature() {
        let ann = DomainSpec::annulus(0.5).unwrap();
        let basis = MonomialBasis::build(&ann, &WeightSpec::unweighted(), 6, 32).unwrap();
        let rule = QuadratureRule::build(&ann, 32).unwrap();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                let acc =
                    rule.integrate(|z| basis.monomial(i, z) * basis.monomial(j, z).conj());
                let bound = 1e-12 * (basis.norms2[i] * basis.norms2[j]).sqrt();
                assert!(acc.norm() <= bound, "({i},{j}): {acc}");
            }
        }
    }

    #[test]
    fn kernel_series_examples() {
        // disc, r=0, w=z=0 -> 1/pi
        let b = disc_basis(0.0, 50);
        let v = kernel_series(&b, &[cx(0.0, 0.0)], &[cx(0.0, 0.0)]);
        assert!((v.value.re - 1.0 / PI).abs() < 1e-14);
        assert!(v.tail_bound < 1e-14);
        // disc, r=2 -> 3/pi
        let b = disc_basis(2.0, 50);
        let v = kernel_series(&b, &[cx(0.0, 0.0)], &[cx(0.0, 0.0)]);
        assert!((v.value.re - 3.0 / PI).abs() < 1e-14);
        // ball n=2, r=0 -> 2/pi^2
        let ball = DomainSpec::ball(2).unwrap();
        let b = MonomialBasis::build(&ball, &WeightSpec::unweighted(), 30, 16).unwrap();
        let zero = [cx(0.0, 0.0), cx(0.0, 0.0)];
        let v = kernel_series(&b, &zero, &zero);
        assert!((v.value.re - 2.0 / (PI * PI)).abs() < 1e-14);
    }

    #[test]
    fn series_matches_closed_forms() {
        let w0 = WeightSpec::unweighted();
        // disc at |z| = 0.5: 16/(9 pi)
        let b = disc_basis(0.0, 200);
        let z = [cx(0.5, 0.0)];
        let got = kernel_series(&b, &z, &z).value.re;
        assert!((got - 16.0 / (9.0 * PI)).abs() < 1e-12);
        let closed = kernel_closed(&DomainSpec::disc(), &w0, &z, &z).unwrap();
        assert!((got - closed.re).abs() < 1e-12);
        // off-diagonal
        let wpt = [cx(0.5, 0.0)];
        let zpt = [cx(0.25, 0.0)];
        let got = kernel_series(&b, &wpt, &zpt).value;
        let want = kernel_closed(&DomainSpec::disc(), &w0, &wpt, &zpt).unwrap();
        assert!((got - want).norm() < 1e-12);
        // annulus has no closed form
        assert!(matches!(
            kernel_closed(&DomainSpec::annulus(0.5).unwrap(), &w0, &z, &z),
            Err(Error::UnsupportedDomain(_))
        ));
    }

    #[test]
    fn hermitian_symmetry_of_series() {
        let b = disc_basis(1.0, 120);
        let w = [cx(0.3, 0.4)];
        let z = [cx(-0.2, 0.5)];
        let a = kernel_series(&b, &w, &z).value;
        let bb = kernel_series(&b, &z, &w).value;
        assert!((a - bb.conj()).norm() < 1e-13);
    }

    #[test]
    fn diagonal_monotone_in_truncation() {
        let z = [cx(0.7, -0.1)];
        let mut prev = 0.0;
        for deg in [5usize, 10, 20, 40, 80] {
            let b = disc_basis(0.0, deg);
            let v = kernel_series(&b, &z, &z).value.re;
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn normalized_kernel_unit_norm() {
        let b = disc_basis(0.0, 200);
        let nk = normalized_kernel(&b, &[cx(0.5, 0.0)]).unwrap();
        let norm: f64 = nk.coeffs.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        // at z = 0 the normalized kernel is the constant basis vector
        let nk = normalized_kernel(&b, &[cx(0.0, 0.0)]).unwrap();
        assert!((nk.coeffs[0] - cx(1.0, 0.0)).norm() < 1e-14);
        assert!(nk.coeffs[1..].iter().all(|c| c.norm() < 1e-14));
        let b = disc_basis(1.0, 120);
        let nk = normalized_kernel(&b, &[cx(0.0, 0.0)]).unwrap();
        assert!((nk.coeffs[0] - cx(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn reproducing_defect_small() {
        let b = disc_basis(0.0, 100);
        let f = crate::symbol::parse("z1^3").unwrap();
        let res = reproduce_residual(&b, &f, &[cx(0.4, 0.0)], 64).unwrap();
        assert!(res <= 1e-8, "residual {res}");
        let f1 = crate::symbol::parse("1").unwrap();
        let res = reproduce_residual(&b, &f1, &[cx(0.3, 0.2)], 64).unwrap();
        assert!(res <= 1e-12);
        let bad = crate::symbol::parse("abs(z1)").unwrap();
        assert!(matches!(
            reproduce_residual(&b, &bad, &[cx(0.0, 0.0)], 64),
            Err(Error::NonHolomorphicSymbol(_))
        ));
    }

    #[test]
    fn cauchy_schwarz_bound_on_random_polynomials() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let b = disc_basis(1.0, 120);
        for _ in 0..50 {
            let deg = rng.gen_range(1..8);
            let coeffs: Vec<Cx> = (0..=deg)
                .map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let z = [cx(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6))];
            let fz: Cx = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * b.eval(k, &z))
                .sum();
            let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
            let kd = kernel_series(&b, &z, &z).value.re;
            assert!(fz.norm_sqr() <= norm2 * kd * (1.0 + 1e-12));
        }
    }

    #[test]
    fn extremal_function_attains_kernel_diag() {
        // equality in |f(z)|^2 <= ||f||^2 K(z,z) at f = k_z
        let b = disc_basis(0.0, 200);
        let z = [cx(0.6, 0.2)];
        let nk = normalized_kernel(&b, &z).unwrap();
        let fz: Cx = nk
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * b.eval(i, &z))
            .sum();
        let k = kernel_series(&b, &z, &z).value.re;
        assert!((fz.norm_sqr() - k).abs() <= 1e-8 * k);
    }

    #[test]
    fn domain_monotonicity_inner_disc() {
        // K_U(z,z) >= K_Omega(z,z) for an inner disc U containing z.
        let b = disc_basis(0.0, 200);
        let z = [cx(0.1, 0.05)];
        let komega = kernel_series(&b, &z, &z).value.re;
        let s: f64 = 0.5;
        let ku = s * s / (PI * (s * s - z[0].norm_sqr()).powi(2));
        assert!(ku >= komega);
    }

    #[test]
    fn lens_orthobasis_degenerate_disc() {
        // lens = whole disc: recovers e_k = z^k sqrt((k+1)/pi)
        let lens = DomainSpec::lens(DomainSpec::disc(), cx(0.0, 0.0), 2.0).unwrap();
        let nb = lens_orthobasis(&lens, 5, 48, &WeightSpec::unweighted(), &lens).unwrap();
        assert_eq!(nb.len(), 6);
        assert!(nb.gram_residual <= 1e-8);
        for k in 0..=5usize {
            let want = ((k as f64 + 1.0) / PI).sqrt();
            let un = nb.coeffs_unscaled(k);
            for (j, c) in un.iter().enumerate() {
                let expect = if j == k { want } else { 0.0 };
                assert!(
                    (c - cx(expect, 0.0)).norm() < 1e-8,
                    "k={k} j={j} got={c} want={expect}"
                );
            }
        }
        let kd = kernel_diag_numeric(&nb, cx(0.0, 0.0));
        assert!((kd - 1.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn lens_orthobasis_on_annulus_patch() {
        let ann = DomainSpec::annulus(0.5).unwrap();
        let lens = DomainSpec::lens(ann, cx(1.0, 0.0), 0.4).unwrap();
        let nb = lens_orthobasis(&lens, 20, 48, &WeightSpec::unweighted(), &lens).unwrap();
        assert!(nb.gram_residual <= 1e-8, "residual {}", nb.gram_residual);
        let nb10 = lens_orthobasis(&lens, 10, 48, &WeightSpec::unweighted(), &lens).unwrap();
        for z in lens.interior_grid(25, 1e-3) {
            let lo = kernel_diag_numeric(&nb10, z[0]);
            let hi = kernel_diag_numeric(&nb, z[0]);
            assert!(hi >= lo - 1e-10, "monotonicity failed at {z:?}");
            assert!(hi.is_finite() && hi > 0.0);
        }
    }

    #[test]
    fn lens_maxdeg_cap() {
        let lens = DomainSpec::lens(DomainSpec::disc(), cx(1.0, 0.0), 0.5).unwrap();
        assert!(matches!(
            lens_orthobasis(&lens, 41, 32, &WeightSpec::unweighted(), &lens),
            Err(Error::InvalidParameter(_))
        ));
    }
}
