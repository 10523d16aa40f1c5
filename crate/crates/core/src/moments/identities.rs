//! Algebraic identities used to simplify the second moment, checked exactly.

use serde::Serialize;

use super::xi::disjoint_sum;
use super::{binom2, ACoeffs};
use crate::geometric::GeometricModel;
use crate::scalar::{ratio, Rational};

/// One identity evaluated at a given `(n, q)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub rhs: Rational,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        let pass = lhs == rhs;
        Self { name: name.into(), lhs, rhs, pass }
    }
}

/// Checks, with exact arithmetic:
///
/// * `product`: `a_i a_j = a_{i+j}(a_i + a_j - 1)` for all `1 <= i, j <= n`
///   (lhs/rhs are the first failing pair, or the pair `(n, n)`).
/// * `disjoint-rearrangement`: the disjoint-window double sum rewritten over
///   `i < j` with single sums and `C(n, 2)`.
/// * `square-expansion`: `(Σ a_i (n+1-i))^2` as cross terms plus squares.
///
/// Double sums are accumulated through prefix sums so that the number of
/// operations on large rationals stays linear in `n`.
pub fn check_identities(n: usize, model: &GeometricModel<Rational>) -> Vec<IdentityCheck> {
    let a_ext = ACoeffs::new(model, 2 * n.max(1));
    vec![
        product_identity(&a_ext, n),
        disjoint_rearrangement(&a_ext, n),
        square_expansion(&a_ext, n),
    ]
}

fn int(v: i64) -> Rational {
    ratio(v, 1)
}

fn product_identity(a: &ACoeffs<Rational>, n: usize) -> IdentityCheck {
    let n = n as i64;
    let mut last = (int(1), int(1));
    for i in 1..=n {
        for j in i..=n {
            let lhs = a.at(i) * a.at(j);
            let rhs = a.at(i + j) * (a.at(i) + a.at(j) - int(1));
            if lhs != rhs {
                return IdentityCheck::new(format!("product (i={i}, j={j})"), lhs, rhs);
            }
            last = (lhs, rhs);
        }
    }
    IdentityCheck::new("product", last.0, last.1)
}

/// `prefix[k] = Σ_{i=1..k} f(i)`.
fn prefix(n: i64, f: impl Fn(i64) -> Rational) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(int(0));
    for i in 1..=n {
        let next = out[(i - 1) as usize].clone() + f(i);
        out.push(next);
    }
    out
}

fn disjoint_rearrangement(a: &ACoeffs<Rational>, n: usize) -> IdentityCheck {
    let n = n as i64;
    let p = a.p().clone();
    let p2 = p.clone() * p.clone();

    let mut lhs = disjoint_sum(a, n);
    lhs *= p2.clone();

    let below = prefix(n, |i| a.at(i));
    let mut pairs = int(0);
    for j in 2..=n {
        pairs += a.at(j) * int(binom2(n + 2 - j)) * below[(j - 1) as usize].clone();
    }
    let mut single = int(0);
    let mut shifted = int(0);
    for i in 1..=n {
        single += a.at(i) * int(binom2(n + 2 - i) * (i - 1));
        shifted += a.at(i) * int(binom2(n + 1 - i));
    }
    let rhs = int(2) * p2.clone() * pairs - p2 * single - int(2) * p * shifted + int(binom2(n));
    IdentityCheck::new("disjoint-rearrangement", lhs, rhs)
}

fn square_expansion(a: &ACoeffs<Rational>, n: usize) -> IdentityCheck {
    let n = n as i64;
    let w = |i: i64| a.at(i) * int(n + 1 - i);
    let below = prefix(n, w);
    let linear = below[n as usize].clone();
    let lhs = linear.clone() * linear;
    let mut cross = int(0);
    let mut squares = int(0);
    for j in 1..=n {
        let wj = w(j);
        cross += wj.clone() * below[(j - 1) as usize].clone();
        squares += wj.clone() * wj;
    }
    IdentityCheck::new("square-expansion", lhs, int(2) * cross + squares)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_sizes_pass() {
        let m = GeometricModel::new(ratio(1, 2)).unwrap();
        for n in 0..=1 {
            assert!(check_identities(n, &m).iter().all(|c| c.pass));
        }
    }

    #[test]
    fn n5_q_third() {
        let m = GeometricModel::new(ratio(1, 3)).unwrap();
        let checks = check_identities(5, &m);
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn pointwise_product_at_half() {
        let m = GeometricModel::new(ratio(1, 2)).unwrap();
        let a = ACoeffs::new(&m, 2);
        assert_eq!(a.at(1) * a.at(1), int(4));
        assert_eq!(a.at(2) * (int(2) * a.at(1) - int(1)), int(4));
    }

    #[test]
    fn disjoint_lhs_matches_direct_double_sum() {
        let m = GeometricModel::new(ratio(2, 7)).unwrap();
        for n in 0..=12usize {
            let a = ACoeffs::new(&m, 2 * n.max(1));
            let nn = n as i64;
            let mut direct = int(0);
            for i in 2..=nn - 2 {
                for j in 2..=nn - 2 {
                    if i + j <= nn {
                        direct += a.at(i) * a.at(j) * int(binom2(nn + 2 - i - j));
                    }
                }
            }
            direct *= a.p().clone() * a.p().clone();
            let check = disjoint_rearrangement(&a, n);
            assert_eq!(check.lhs, direct, "n={n}");
            assert!(check.pass, "n={n}");
        }
    }
}
