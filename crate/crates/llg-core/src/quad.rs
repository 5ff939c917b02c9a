//! Symmetric quadrature rules on the reference triangle.
//!
//! Points are stored in barycentric coordinates and weights sum to one, so an
//! integral over a physical triangle `K` is `|K| * sum_q w_q f(x_q)`.
//! All rules have strictly positive weights.

use crate::num::{real, Real};

#[derive(Debug, Clone)]
pub struct TriQuadRule<T> {
    /// Highest polynomial degree integrated exactly.
    pub degree: u32,
    /// Barycentric coordinates of the quadrature points.
    pub points: Vec<[T; 3]>,
    /// Weights, normalized to sum to one.
    pub weights: Vec<T>,
}

/// Three-point edge-midpoint rule, exact for degree 2.
pub fn rule_degree_2<T: Real>() -> TriQuadRule<T> {
    let h = real::<T>(0.5);
    let z = T::zero();
    let w = T::one() / real::<T>(3.0);
    TriQuadRule {
        degree: 2,
        points: vec![[h, h, z], [z, h, h], [h, z, h]],
        weights: vec![w, w, w],
    }
}

/// Six-point rule, exact for degree 4 (used wherever degree 3 is required,
/// because the classical four-point degree-3 rule has a negative weight).
pub fn rule_degree_4<T: Real>() -> TriQuadRule<T> {
    let mut points = Vec::with_capacity(6);
    let mut weights = Vec::with_capacity(6);
    push_orbit3(
        &mut points,
        &mut weights,
        0.108_103_018_168_070,
        0.445_948_490_915_965,
        0.223_381_589_678_011,
    );
    push_orbit3(
        &mut points,
        &mut weights,
        0.816_847_572_980_459,
        0.091_576_213_509_771,
        0.109_951_743_655_322,
    );
    TriQuadRule {
        degree: 4,
        points,
        weights,
    }
}

/// Twelve-point rule, exact for degree 6.
pub fn rule_degree_6<T: Real>() -> TriQuadRule<T> {
    let mut points = Vec::with_capacity(12);
    let mut weights = Vec::with_capacity(12);
    push_orbit3(
        &mut points,
        &mut weights,
        0.501_426_509_658_179,
        0.249_286_745_170_910,
        0.116_786_275_726_379,
    );
    push_orbit3(
        &mut points,
        &mut weights,
        0.873_821_971_016_996,
        0.063_089_014_491_502,
        0.050_844_906_370_207,
    );
    push_orbit6(
        &mut points,
        &mut weights,
        0.053_145_049_844_816,
        0.310_352_451_033_785,
        0.082_851_075_618_374,
    );
    TriQuadRule {
        degree: 6,
        points,
        weights,
    }
}

/// Smallest stocked rule exact for at least `degree`.
///
/// Panics for `degree > 6`; nothing in the solver needs more.
pub fn rule_for_degree<T: Real>(degree: u32) -> TriQuadRule<T> {
    match degree {
        0..=2 => rule_degree_2(),
        3..=4 => rule_degree_4(),
        5..=6 => rule_degree_6(),
        d => panic!("no stocked triangle quadrature rule of degree {d} (max 6)"),
    }
}

fn push_orbit3<T: Real>(points: &mut Vec<[T; 3]>, weights: &mut Vec<T>, a: f64, b: f64, w: f64) {
    let (a, b, w) = (real::<T>(a), real::<T>(b), real::<T>(w));
    points.push([a, b, b]);
    points.push([b, a, b]);
    points.push([b, b, a]);
    weights.extend_from_slice(&[w, w, w]);
}

fn push_orbit6<T: Real>(points: &mut Vec<[T; 3]>, weights: &mut Vec<T>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for [x, y, z] in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        points.push([real::<T>(x), real::<T>(y), real::<T>(z)]);
        weights.push(real::<T>(w));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact value of `int_T x^p y^q` over the reference triangle
    /// `{x >= 0, y >= 0, x + y <= 1}`: `p! q! / (p + q + 2)!`.
    fn monomial_integral(p: u32, q: u32) -> f64 {
        let fact = |n: u32| (1..=n as u64).product::<u64>().max(1) as f64;
        fact(p) * fact(q) / fact(p + q + 2)
    }

    fn check_exactness(rule: &TriQuadRule<f64>) {
        // Reference triangle vertices (1,0,0) -> (0,0), (0,1,0) -> (1,0), (0,0,1) -> (0,1).
        let area = 0.5;
        for p in 0..=rule.degree {
            for q in 0..=(rule.degree - p) {
                let mut acc = 0.0;
                for (pt, w) in rule.points.iter().zip(&rule.weights) {
                    let x = pt[1];
                    let y = pt[2];
                    acc += w * x.powi(p as i32) * y.powi(q as i32);
                }
                let err = (area * acc - monomial_integral(p, q)).abs();
                assert!(
                    err < 1e-14,
                    "degree-{} rule missed x^{p} y^{q}: err {err:e}",
                    rule.degree
                );
            }
        }
    }

    #[test]
    fn rules_are_normalized_and_positive() {
        for rule in [rule_degree_2::<f64>(), rule_degree_4(), rule_degree_6()] {
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            for (w, pt) in rule.weights.iter().zip(&rule.points) {
                assert!(*w > 0.0);
                assert!((pt[0] + pt[1] + pt[2] - 1.0).abs() < 1e-14);
                assert!(pt.iter().all(|&l| l >= 0.0));
            }
        }
    }

    #[test]
    fn rules_integrate_monomials_exactly() {
        check_exactness(&rule_degree_2::<f64>());
        check_exactness(&rule_degree_4::<f64>());
        check_exactness(&rule_degree_6::<f64>());
    }

    #[test]
    fn dispatch_picks_smallest_sufficient_rule() {
        assert_eq!(rule_for_degree::<f64>(2).points.len(), 3);
        assert_eq!(rule_for_degree::<f64>(3).points.len(), 6);
        assert_eq!(rule_for_degree::<f64>(6).points.len(), 12);
    }

    #[test]
    #[should_panic(expected = "no stocked triangle quadrature")]
    fn dispatch_rejects_unsupported_degree() {
        let _ = rule_for_degree::<f64>(7);
    }
}
