//! Log-gamma and beta functions for positive real arguments.
//!
//! Norm constants of weighted monomials are ratios of gamma functions with
//! arguments up to a few hundred, so everything is computed in log space.
//! The Lanczos approximation below is accurate to about 1e-14 relative error
//! on the positive half line, comfortably inside the 1e-13 budget the norm
//! tables require.

/// Lanczos coefficients for g = 7, n = 9 (Godfrey's set, as circulated with
/// the GNU Scientific Library).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let w = z + 7.5;
    LN_SQRT_2PI + (z + 0.5) * w.ln() - w + sum.ln()
}

/// Gamma function for x > 0. Overflows past x ~ 171; callers needing large
/// arguments should stay in log space.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Natural log of the beta function B(a, b) for a, b > 0.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// ln(k!) for integer k >= 0.
pub fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(1e-300)
    }

    #[test]
    fn gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for k in 1..=20u64 {
            fact *= k as f64;
            assert!(rel_err(gamma(k as f64 + 1.0), fact) < 1e-13, "k={k}");
        }
    }

    #[test]
    fn gamma_half_integers() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!(rel_err(gamma(0.5), sqrt_pi) < 1e-13);
        assert!(rel_err(gamma(1.5), sqrt_pi / 2.0) < 1e-13);
        assert!(rel_err(gamma(2.5), 3.0 * sqrt_pi / 4.0) < 1e-13);
    }

    #[test]
    fn functional_equation_large_arguments() {
        // ln Γ(x+1) = ln Γ(x) + ln x up to 1e-13 relative, through x ~ 500.
        for &x in &[0.7, 1.3, 2.5, 10.0, 57.3, 123.4, 499.5] {
            let lhs = ln_gamma(x + 1.0);
            let rhs = ln_gamma(x) + x.ln();
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn beta_against_closed_form() {
        // B(a,b) = (a-1)!(b-1)!/(a+b-1)! for integers.
        let b = ln_beta(3.0, 4.0).exp();
        assert!(rel_err(b, 2.0 * 6.0 / 720.0) < 1e-13);
    }
}
