//! Reference implementations used only by the tests. None of them share code
//! with the library paths they check.
#![allow(dead_code)]


use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wirephase::geometry::{DeformableCurve, Harmonic, SpaceCurve, TrigPoly};
use wirephase::linalg::{CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// κ and τ from central finite differences of point evaluations only, with a
/// separate step per derivative order (one Richardson level on the third).
pub fn fd_frenet(curve: &DeformableCurve, xi: f64, zeta: f64, s: f64) -> (f64, f64) {
    let r = |t: f64| curve.point(xi, zeta, s + t);
    let (h1, h2, h3) = (1e-5, 1e-4, 2e-3);
    let d1 = sub(r(h1), r(-h1)).map(|v| v / (2.0 * h1));
    let c = r(0.0);
    let (p, m) = (r(h2), r(-h2));
    let d2 = [0, 1, 2].map(|i| (p[i] - 2.0 * c[i] + m[i]) / (h2 * h2));
    let third = |h: f64| {
        let (p1, m1, p2, m2) = (r(h), r(-h), r(2.0 * h), r(-2.0 * h));
        [0, 1, 2].map(|i| (p2[i] - 2.0 * p1[i] + 2.0 * m1[i] - m2[i]) / (2.0 * h * h * h))
    };
    let (a, b) = (third(h3), third(2.0 * h3));
    let d3 = [0, 1, 2].map(|i| (4.0 * a[i] - b[i]) / 3.0);
    let b = cross(d1, d2);
    let bn = dot(b, b).sqrt();
    let v = dot(d1, d1).sqrt();
    (bn / (v * v * v), dot(b, d3) / (bn * bn))
}

/// Characteristic polynomial coefficients `c_0..c_n` of `det(λ − A)`
/// (monic, `c_n = 1`) by Faddeev–LeVerrier.
pub fn char_poly(a: &CMatrix) -> Vec<C64> {
    let n = a.rows();
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[n] = C64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        m = next;
        let am = a * &m;
        let tr: C64 = (0..n).map(|i| am[(i, i)]).sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

fn eval_real(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval_real(p, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval_real(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All roots of a polynomial with only real, simple roots inside
/// `[-bound, bound]`; critical points (roots of the derivative, found
/// recursively) bracket one root each.
pub fn real_roots(p: &[f64], bound: f64) -> Vec<f64> {
    let deg = p.len() - 1;
    if deg == 1 {
        return vec![-p[0] / p[1]];
    }
    let dp: Vec<f64> = (1..=deg).map(|k| k as f64 * p[k]).collect();
    let mut knots = vec![-bound];
    knots.extend(real_roots(&dp, bound));
    knots.push(bound);
    knots.windows(2).map(|w| bisect(p, w[0], w[1])).collect()
}

/// Ascending eigenvalues of a Hermitian matrix via its characteristic polynomial.
pub fn oracle_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let c = char_poly(a);
    let real: Vec<f64> = c.iter().map(|z| z.re).collect();
    let bound = 1.0 + (0..a.rows()).map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    real_roots(&real, bound)
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn random_poly(rng: &mut impl Rng, amp: f64) -> TrigPoly {
    TrigPoly(
        (2..=4)
            .map(|k| Harmonic(k, rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
            .collect(),
    )
}

/// Unit circle with random low-harmonic deformation directions.
pub fn random_family(rng: &mut impl Rng, amp: f64) -> DeformableCurve {
    let base = DeformableCurve::unit_circle().base;
    let mut dir = || SpaceCurve { x: random_poly(rng, amp), y: random_poly(rng, amp), z: random_poly(rng, amp) };
    let xi = dir();
    let zeta = dir();
    DeformableCurve { base, xi, zeta }
}

pub fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = dot(axis, axis).sqrt();
    let [x, y, z] = axis.map(|v| v / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}
