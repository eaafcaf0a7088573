//! Independent reference implementations used only by tests.
#![allow(dead_code)] // each test binary uses its own subset
//!
//! The normal CDF here is computed from first principles by two
//! classical routes that share nothing with the library's rational
//! approximation: an everywhere-convergent positive-term series in the
//! bulk and the Laplace continued fraction in the tails.

/// phi(x), written out locally so the oracle is self-contained.
pub fn oracle_pdf(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI).sqrt().recip() * (-0.5 * x * x).exp()
}

/// `Phi(x) - 0.5 = phi(x) * sum_{k>=0} x^(2k+1) / (1*3*...*(2k+1))`.
/// Every term is positive for x > 0, so there is no cancellation.
pub fn series_central(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= x * x / (2 * k + 1) as f64;
        let next = sum + term;
        if next == sum || k > 500 {
            return oracle_pdf(x) * next;
        }
        sum = next;
    }
}

/// Upper tail `1 - Phi(x)` for x >= 0 via the Laplace continued
/// fraction `phi(x) / (x + 1/(x + 2/(x + 3/(x + ...))))`, evaluated by
/// backward recursion from a depth far beyond convergence.
pub fn tail_continued_fraction(x: f64) -> f64 {
    let mut f = x;
    for k in (1..=400u32).rev() {
        f = x + k as f64 / f;
    }
    oracle_pdf(x) / f
}

/// Reference `Phi(x)`.
pub fn oracle_cdf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - oracle_cdf(-x);
    }
    if x < 3.0 {
        0.5 + series_central(x)
    } else {
        1.0 - tail_continued_fraction(x)
    }
}

/// Reference upper tail `1 - Phi(x)`, accurate relatively in the far
/// tail.
pub fn oracle_upper_tail(x: f64) -> f64 {
    assert!(x >= 0.0);
    if x < 3.0 {
        0.5 - series_central(x)
    } else {
        tail_continued_fraction(x)
    }
}

#[allow(dead_code)]
pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} (tol {tol})"
    );
}
