//! Brute-force oracles for n = 2, shared by the integration targets. They
//! grid the original parametrized objectives and polish the best grid
//! points by a compass search on the same objective.

#![allow(dead_code)]

use std::f64::consts::PI;

use bpnorm_core::linalg::{c64, ComplexVector};
use bpnorm_core::C64;
use bpnorm_core::BipartiteOperator;
use rayon::prelude::*;

/// Unit vector of C² at Bloch angles `(θ, φ)`.
pub fn bloch(theta: f64, phi: f64) -> ComplexVector {
    ComplexVector::from_vec(vec![c64((theta / 2.0).cos(), 0.0), c64(phi.cos(), phi.sin()) * (theta / 2.0).sin()])
}

fn angle_grid(res: usize) -> Vec<(f64, f64)> {
    (0..res)
        .flat_map(|a| (0..res).map(move |b| (PI * (a as f64 + 0.5) / res as f64, 2.0 * PI * b as f64 / res as f64)))
        .collect()
}

/// Maximizes `f` from `x` with a compass search whose step halves on failure.
pub fn compass_max<const D: usize>(f: impl Fn([f64; D]) -> f64, mut x: [f64; D], mut step: f64) -> f64 {
    let mut best = f(x);
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..D {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] += dir * step;
                let v = f(y);
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

type Entries = [[C64; 4]; 4];

fn entries(sigma: &BipartiteOperator) -> Entries {
    assert_eq!(sigma.n(), 2);
    let m = sigma.matrix();
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

fn spinor(theta: f64, phi: f64) -> [C64; 2] {
    [c64((theta / 2.0).cos(), 0.0), c64(phi.cos(), phi.sin()) * (theta / 2.0).sin()]
}

/// `Tr σ (s ⊗ t)` summed entry by entry, composite index `2i + k`.
fn pairing(sigma: &Entries, s: &[[C64; 2]; 2], t: &[[C64; 2]; 2]) -> C64 {
    let mut acc = c64(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    acc += sigma[2 * i + k][2 * j + l] * s[j][i] * t[l][k];
                }
            }
        }
    }
    acc
}

fn rank_one(v: &[C64; 2]) -> [[C64; 2]; 2] {
    std::array::from_fn(|a| std::array::from_fn(|b| v[a] * v[b].conj()))
}

/// The `keep` best pairs of grid angles under `value`, as `(θ₁, φ₁, θ₂, φ₂)`.
fn best_pairs(angles: &[(f64, f64)], keep: usize, value: impl Fn(usize, usize) -> f64 + Sync) -> Vec<[f64; 4]> {
    let m = angles.len();
    let mut scored: Vec<(f64, usize)> = (0..m * m).into_par_iter().map(|k| (value(k / m, k % m), k)).collect();
    scored.select_nth_unstable_by(keep, |a, b| b.0.total_cmp(&a.0));
    scored[..keep]
        .iter()
        .map(|&(_, k)| {
            let ((t1, p1), (t2, p2)) = (angles[k / m], angles[k % m]);
            [t1, p1, t2, p2]
        })
        .collect()
}

fn symmetry_from(h: &[C64; 2]) -> [[C64; 2]; 2] {
    let hh = rank_one(h);
    std::array::from_fn(|a| std::array::from_fn(|b| hh[a][b] * 2.0 - if a == b { c64(1.0, 0.0) } else { c64(0.0, 0.0) }))
}

const GRID: usize = 36;

/// `max |Tr σ (s ⊗ |g><g|)|` over the 2×2 symmetries `s` (`±I` and
/// `2|h><h| − I`) and unit `g`.
pub fn brute_force_alpha_2x2(sigma: &BipartiteOperator) -> f64 {
    let e = entries(sigma);
    let angles = angle_grid(GRID);
    let step = PI / GRID as f64;
    let syms: Vec<_> = angles.iter().map(|&(t, p)| symmetry_from(&spinor(t, p))).collect();
    let projs: Vec<_> = angles.iter().map(|&(t, p)| rank_one(&spinor(t, p))).collect();
    let objective = |x: [f64; 4]| pairing(&e, &symmetry_from(&spinor(x[0], x[1])), &rank_one(&spinor(x[2], x[3]))).norm();
    let symmetric = best_pairs(&angles, 6, |a, b| pairing(&e, &syms[a], &projs[b]).norm())
        .into_iter()
        .map(|x| compass_max(objective, x, step))
        .fold(0.0, f64::max);

    let one = [[c64(1.0, 0.0), c64(0.0, 0.0)], [c64(0.0, 0.0), c64(1.0, 0.0)]];
    let reduced = |x: [f64; 2]| pairing(&e, &one, &rank_one(&spinor(x[0], x[1]))).norm();
    let mut by_g: Vec<(f64, usize)> = projs.iter().enumerate().map(|(k, g)| (pairing(&e, &one, g).norm(), k)).collect();
    by_g.sort_by(|a, b| b.0.total_cmp(&a.0));
    let identity = by_g[..3]
        .iter()
        .map(|&(_, k)| compass_max(reduced, [angles[k].0, angles[k].1], step))
        .fold(0.0, f64::max);
    symmetric.max(identity)
}

/// `min <f⊗g, σ f⊗g>` over unit `f, g ∈ C²`.
pub fn brute_force_min_product_2x2(sigma: &BipartiteOperator, res: usize) -> f64 {
    let e = entries(sigma);
    let angles = angle_grid(res);
    let projs: Vec<_> = angles.iter().map(|&(t, p)| rank_one(&spinor(t, p))).collect();
    let objective = |x: [f64; 4]| -pairing(&e, &rank_one(&spinor(x[0], x[1])), &rank_one(&spinor(x[2], x[3]))).re;
    -best_pairs(&angles, 4, |a, b| -pairing(&e, &projs[a], &projs[b]).re)
        .into_iter()
        .map(|x| compass_max(objective, x, PI / res as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}
